use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of a run's metrics file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub total_reward: f64,
    pub fees_collected: f64,
    pub successes: usize,
    pub held: usize,
    pub canceled: usize,
    pub user_cancels: usize,
    pub expirations: usize,
    pub steps: usize,
    pub decisions: usize,
    /// Step-weighted mean fee rate, in percent.
    pub mean_fee_rate: f64,
    pub mean_leverage: f64,
    pub epsilon: f64,
    pub action_stddev: f64,
}

pub fn write_metrics_csv(metrics: &[EpochMetrics], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    let to_err = |e: csv::Error| Error::format(path, e.to_string());
    // written by hand so an empty run still gets a header
    w.write_record(METRICS_HEADER).map_err(to_err)?;
    for row in metrics {
        w.serialize(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<EpochMetrics>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers().map_err(|e| Error::format(path, e.to_string()))?;
    if header.iter().ne(METRICS_HEADER.iter().copied()) {
        return Err(Error::format(path, format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::format(path, e.to_string())))
        .collect()
}

pub const METRICS_HEADER: [&str; 14] = [
    "epoch",
    "total_reward",
    "fees_collected",
    "successes",
    "held",
    "canceled",
    "user_cancels",
    "expirations",
    "steps",
    "decisions",
    "mean_fee_rate",
    "mean_leverage",
    "epsilon",
    "action_stddev",
];

/// Trailing mean over the last `window` points (fewer near the start).
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, &x) in series.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= series[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Number of trailing epochs that make up the terminal window (10%, at least one).
pub fn terminal_window(epochs: usize) -> usize {
    epochs.div_ceil(10).max(1)
}

/// Mean total reward over the final 10% of epochs.
pub fn terminal_reward(metrics: &[EpochMetrics]) -> f64 {
    if metrics.is_empty() {
        return 0.0;
    }
    let tail = &metrics[metrics.len() - terminal_window(metrics.len()).min(metrics.len())..];
    tail.iter().map(|m| m.total_reward).sum::<f64>() / tail.len() as f64
}

/// Average ranks, ties sharing the mean of their positions (1-based).
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `NaN` when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Adjacent pairs that move against the wanted direction.
pub fn adjacent_inversions(series: &[f64], increasing: bool) -> usize {
    series
        .windows(2)
        .filter(|w| if increasing { w[1] < w[0] } else { w[1] > w[0] })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(epoch: usize, reward: f64) -> EpochMetrics {
        EpochMetrics {
            epoch,
            total_reward: reward,
            fees_collected: reward + 3.0,
            successes: 397,
            held: 12,
            canceled: 3,
            user_cancels: 2,
            expirations: 1,
            steps: 412,
            decisions: 412,
            mean_fee_rate: 0.1 + 0.2 / 3.0,
            mean_leverage: 42.0,
            epsilon: 0.999_999_999_999_999_9,
            action_stddev: 2.581_988_897_471_611,
        }
    }

    #[test]
    fn csv_round_trip_and_line_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows: Vec<_> = (0..30).map(|e| row(e, e as f64 * 1.1 - 7.3)).collect();
        write_metrics_csv(&rows, &path).unwrap();
        assert_eq!(read_metrics_csv(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert_eq!(text.lines().next().unwrap(), METRICS_HEADER.join(","));
    }

    #[test]
    fn empty_result_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics_csv(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);
        assert!(read_metrics_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_metrics_csv(Path::new("/nonexistent/m.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/m.csv"));
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(moving_average(&[4.0, 7.0, 1.0], 1), vec![4.0, 7.0, 1.0]);
        assert_eq!(moving_average(&[2.5; 6], 4), vec![2.5; 6]);
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.0, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn terminal_window_is_a_tenth() {
        assert_eq!(terminal_window(500), 50);
        assert_eq!(terminal_window(3000), 300);
        assert_eq!(terminal_window(5), 1);
        let rows: Vec<_> = (0..20).map(|e| row(e, e as f64)).collect();
        assert_eq!(terminal_reward(&rows), 18.5);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]), -1.0);
        // one adjacent swap out of four: 1 − 6·2/(4·15) = 0.8
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-12);
        assert!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).is_nan());
        assert_eq!(adjacent_inversions(&[1.0, 3.0, 2.0, 4.0], true), 1);
        assert_eq!(adjacent_inversions(&[1.0, 3.0, 2.0, 4.0], false), 2);
    }

    proptest! {
        #[test]
        fn csv_round_trips_arbitrary_floats(
            values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..20)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.csv");
            let rows: Vec<_> = values.iter().enumerate().map(|(i, &v)| EpochMetrics {
                total_reward: v,
                mean_fee_rate: v / 7.0,
                ..row(i, 0.0)
            }).collect();
            write_metrics_csv(&rows, &path).unwrap();
            let back = read_metrics_csv(&path).unwrap();
            for (a, b) in rows.iter().zip(&back) {
                prop_assert_eq!(a.total_reward.to_bits(), b.total_reward.to_bits());
                prop_assert_eq!(a.mean_fee_rate.to_bits(), b.mean_fee_rate.to_bits());
            }
        }

        #[test]
        fn moving_average_preserves_length_and_bounds(
            series in proptest::collection::vec(-1e6f64..1e6, 0..50),
            window in 1usize..10,
        ) {
            let out = moving_average(&series, window);
            prop_assert_eq!(out.len(), series.len());
            for (i, v) in out.iter().enumerate() {
                let lo = i.saturating_sub(window - 1);
                let slice = &series[lo..=i];
                let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
                let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(*v >= min - 1e-6 && *v <= max + 1e-6);
            }
        }
    }
}
