use std::fs;
use std::path::{Path, PathBuf};

use ammsim::experiment::{
    parse_mode, read_metrics_csv, run_behavior_change, run_dir_name, run_many, sweep as run_sweep, terminal_reward,
    ExperimentConfig, Manifest, RunResult, Scenario, SweepSpec, METRICS_FILE,
};
use ammsim::AgentKind;
use anyhow::Context;

use crate::resolve::{self, usage};
use crate::{BehaviorArgs, CompareArgs, RunArgs, SweepArgs};

pub const SWEEP_FILE: &str = "sweep.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const RATIOS_FILE: &str = "compare_ratios.csv";

fn create_root(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> anyhow::Error + '_ {
    move |e| anyhow::anyhow!("{}: {e}", path.display())
}

/// Train one config on every seed and write the results under `out`.
fn run_and_save(command: &str, cfg: &ExperimentConfig, threads: usize, out: &Path, behavior: bool) -> anyhow::Result<()> {
    create_root(out)?;
    let results: Vec<RunResult> = if behavior {
        cfg.seeds.iter().map(|&s| run_behavior_change(cfg, s)).collect::<Result<_, _>>()?
    } else {
        let jobs: Vec<_> = cfg.seeds.iter().map(|&s| (cfg.clone(), s)).collect();
        run_many(&jobs, threads)?
    };
    let mut manifest = Manifest::new(command, cfg);
    for r in &results {
        let dir = run_dir_name(cfg.agent, r.seed);
        manifest.save_run(out, &dir, r, cfg.agent.is_learning(), None)?;
        println!(
            "{} seed {}: terminal reward {:.3} over {} epochs ({:.1}s) -> {}",
            cfg.agent,
            r.seed,
            r.terminal_reward(),
            r.metrics.len(),
            r.duration.as_secs_f64(),
            out.join(&dir).display()
        );
    }
    manifest.write(out)?;
    Ok(())
}

pub fn train(args: RunArgs, baseline: bool) -> anyhow::Result<()> {
    let file = resolve::load_file(&args.common)?;
    let agent = if baseline {
        if args.agent.as_deref().is_some_and(|a| a != "baseline") {
            return Err(usage("the baseline subcommand does not take --agent"));
        }
        AgentKind::Baseline
    } else {
        let name = args
            .agent
            .as_deref()
            .or(file.agent.as_deref())
            .ok_or_else(|| ammsim::Error::config("agent", "required (flag --agent or config key)"))?;
        resolve::parse_agent(name)?
    };
    let cfg = resolve::experiment(&args.common, &file, agent, None)?;
    let threads = resolve::jobs(&args.common, &file)?;
    run_and_save(if baseline { "baseline" } else { "train" }, &cfg, threads, &args.common.out, false)
}

pub fn behavior_change(args: BehaviorArgs) -> anyhow::Result<()> {
    let file = resolve::load_file(&args.common)?;
    let from = parse_mode(&args.from).ok_or_else(|| ammsim::Error::config("from", "expected normal or loose"))?;
    let to = parse_mode(&args.to).ok_or_else(|| ammsim::Error::config("to", "expected normal or loose"))?;
    let agent = resolve::parse_agent(args.agent.as_deref().or(file.agent.as_deref()).unwrap_or("combined"))?;
    let cfg = resolve::experiment(&args.common, &file, agent, Some(Scenario::BehaviorChange { from, to }))?;
    let threads = resolve::jobs(&args.common, &file)?;
    run_and_save("behavior-change", &cfg, threads, &args.common.out, true)
}

pub fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let file = resolve::load_file(&args.common)?;
    let spec = match (&args.param, &args.values) {
        (Some(p), Some(v)) => SweepSpec::parse(p, v)?,
        (Some(_), None) => return Err(ammsim::Error::config("values", "required with --param").into()),
        (None, Some(_)) => return Err(ammsim::Error::config("param", "required with --values").into()),
        (None, None) => file
            .sweep
            .clone()
            .ok_or_else(|| ammsim::Error::config("param", "required (flags --param/--values or a [sweep] table)"))?,
    };
    if spec.is_empty() {
        return Err(ammsim::Error::config("values", "sweep needs at least one value").into());
    }
    let agents = match args.agents.as_ref().or(file.agents.as_ref()) {
        Some(names) => names.iter().map(|n| resolve::parse_agent(n)).collect::<anyhow::Result<Vec<_>>>()?,
        None => AgentKind::ALL.to_vec(),
    };
    if agents.is_empty() {
        return Err(ammsim::Error::config("agents", "at least one agent is required").into());
    }
    let base = resolve::experiment(&args.common, &file, agents[0], None)?;
    let threads = resolve::jobs(&args.common, &file)?;
    let out = &args.common.out;
    create_root(out)?;

    let rows = run_sweep(&base, &spec, &agents, threads)?;
    let path = out.join(SWEEP_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_error(&path))?;
    w.write_record(["param", "value", "agent", "terminal_reward", "per_seed"]).map_err(csv_error(&path))?;
    for row in &rows {
        let per_seed: Vec<String> = row.per_seed.iter().map(f64::to_string).collect();
        w.write_record([
            spec.name().to_string(),
            row.value.to_string(),
            row.agent.to_string(),
            row.terminal_reward.to_string(),
            per_seed.join(";"),
        ])
        .map_err(csv_error(&path))?;
        println!("{} = {:<8} {:<14} {:.3}", spec.name(), row.value, row.agent, row.terminal_reward);
    }
    w.flush().with_context(|| path.display().to_string())?;

    let mut manifest = Manifest::new("sweep", &base);
    manifest.sweep = Some(spec);
    manifest.write(out)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Terminal-reward mean for one agent in one run directory.
#[derive(Debug, Clone)]
pub struct CompareEntry {
    pub dir: PathBuf,
    pub agent: AgentKind,
    pub seeds: Vec<u64>,
    pub terminal_reward: f64,
}

pub fn collect_entries(dirs: &[PathBuf]) -> anyhow::Result<Vec<CompareEntry>> {
    if dirs.len() < 2 {
        return Err(usage("compare needs at least two run directories"));
    }
    let mut scenario: Option<(String, &Path)> = None;
    let mut entries = Vec::new();
    for dir in dirs {
        let manifest = Manifest::read(dir)?;
        match &scenario {
            None => scenario = Some((manifest.scenario.clone(), dir)),
            Some((s, first)) if *s != manifest.scenario => {
                return Err(usage(format!(
                    "scenario mismatch: {} ran `{s}` but {} ran `{}`",
                    first.display(),
                    dir.display(),
                    manifest.scenario
                )));
            }
            Some(_) => {}
        }
        if manifest.runs.is_empty() {
            return Err(usage(format!("{} has no training runs to compare", dir.display())));
        }
        let mut agents: Vec<AgentKind> = Vec::new();
        for run in &manifest.runs {
            if !agents.contains(&run.agent) {
                agents.push(run.agent);
            }
        }
        for agent in agents {
            let mut seeds = Vec::new();
            let mut total = 0.0;
            for run in manifest.runs.iter().filter(|r| r.agent == agent) {
                let metrics = read_metrics_csv(&dir.join(&run.dir).join(METRICS_FILE))?;
                total += terminal_reward(&metrics);
                seeds.push(run.seed);
            }
            let terminal_reward = total / seeds.len() as f64;
            entries.push(CompareEntry { dir: dir.clone(), agent, seeds, terminal_reward });
        }
    }
    Ok(entries)
}

pub fn compare(args: CompareArgs) -> anyhow::Result<()> {
    let entries = collect_entries(&args.dirs)?;
    create_root(&args.out)?;

    let path = args.out.join(COMPARE_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_error(&path))?;
    w.write_record(["dir", "agent", "seeds", "terminal_reward"]).map_err(csv_error(&path))?;
    println!("{:<40} {:<14} {:>6} {:>14}", "dir", "agent", "seeds", "terminal");
    for e in &entries {
        let seeds: Vec<String> = e.seeds.iter().map(u64::to_string).collect();
        w.write_record([e.dir.display().to_string(), e.agent.to_string(), seeds.join(";"), e.terminal_reward.to_string()])
            .map_err(csv_error(&path))?;
        println!("{:<40} {:<14} {:>6} {:>14.3}", e.dir.display(), e.agent, e.seeds.len(), e.terminal_reward);
    }
    w.flush().with_context(|| path.display().to_string())?;

    let path = args.out.join(RATIOS_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_error(&path))?;
    w.write_record(["dir", "agent", "vs_dir", "vs_agent", "ratio"]).map_err(csv_error(&path))?;
    println!();
    for (i, a) in entries.iter().enumerate() {
        for (j, b) in entries.iter().enumerate() {
            if i == j {
                continue;
            }
            let ratio = a.terminal_reward / b.terminal_reward;
            w.write_record([
                a.dir.display().to_string(),
                a.agent.to_string(),
                b.dir.display().to_string(),
                b.agent.to_string(),
                ratio.to_string(),
            ])
            .map_err(csv_error(&path))?;
            println!("{} [{}] / {} [{}] = {:.4}", a.dir.display(), a.agent, b.dir.display(), b.agent, ratio);
        }
    }
    w.flush().with_context(|| path.display().to_string())?;
    Ok(())
}
