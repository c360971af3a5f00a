use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::TruncatedNormal;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapOrder {
    /// Largest acceptable price impact, percent.
    pub tolerance: f64,
    /// Log-factor relaxing the tolerance to `tolerance · e^urgency`.
    pub urgency: f64,
    pub user_id: usize,
    /// Fixed on the first attempt and reused on retries.
    pub amount: Option<f64>,
    pub in_index: Option<usize>,
    pub tries: u32,
    /// True until the order is first put on hold.
    pub fresh: bool,
}

impl SwapOrder {
    pub fn new(tolerance: f64, urgency: f64, user_id: usize) -> Self {
        Self { tolerance, urgency, user_id, amount: None, in_index: None, tries: 0, fresh: true }
    }

    pub fn effective_tolerance(&self) -> f64 {
        self.tolerance * self.urgency.exp()
    }
}

/// FIFO of pending orders; held orders are slotted back in behind the head.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SwapQueue {
    orders: VecDeque<SwapOrder>,
}

impl SwapQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn head(&self) -> Option<&SwapOrder> {
        self.orders.front()
    }

    pub fn pop_head(&mut self) -> Option<SwapOrder> {
        self.orders.pop_front()
    }

    pub fn push(&mut self, order: SwapOrder) {
        self.orders.push_back(order);
    }

    /// Put a held order back `min(offset, len)` places behind the head.
    pub fn reinsert(&mut self, order: SwapOrder, offset: usize) -> usize {
        let at = offset.min(self.orders.len());
        self.orders.insert(at, order);
        at
    }

    pub fn iter(&self) -> impl Iterator<Item = &SwapOrder> {
        self.orders.iter()
    }

    pub fn get(&self, index: usize) -> Option<&SwapOrder> {
        self.orders.get(index)
    }
}

impl FromIterator<SwapOrder> for SwapQueue {
    fn from_iter<I: IntoIterator<Item = SwapOrder>>(iter: I) -> Self {
        Self { orders: iter.into_iter().collect() }
    }
}

/// Draw `count` orders with tolerance and urgency from the given
/// distributions and owners uniform over `0..num_users`.
pub fn generate_swaps<R: Rng + ?Sized>(
    count: usize,
    tolerance: &TruncatedNormal,
    urgency: &TruncatedNormal,
    num_users: usize,
    rng: &mut R,
) -> Result<SwapQueue> {
    (0..count)
        .map(|_| {
            let tol = tolerance.sample(rng)?;
            let urg = urgency.sample(rng)?;
            let user = rng.random_range(0..num_users);
            Ok(SwapOrder::new(tol, urg, user))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ToleranceMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn urgency() -> TruncatedNormal {
        crate::market::urgency_distribution()
    }

    #[test]
    fn generates_bounded_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = generate_swaps(400, &ToleranceMode::Normal.distribution(), &urgency(), 20, &mut rng).unwrap();
        assert_eq!(q.len(), 400);
        for o in q.iter() {
            assert!((0.1..=5.0).contains(&o.tolerance));
            assert!((0.0..=2f64.ln()).contains(&o.urgency));
            assert!(o.user_id < 20);
            assert!(o.fresh && o.tries == 0 && o.amount.is_none());
        }
    }

    #[test]
    fn same_seed_same_queue() {
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            generate_swaps(400, &ToleranceMode::Loose.distribution(), &urgency(), 20, &mut rng).unwrap()
        };
        assert_eq!(make(), make());
    }

    #[test]
    fn loose_mode_is_more_tolerant() {
        // Quadrature means of the two truncated normals: 0.3648 vs 1.0047.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mean = |mode: ToleranceMode, rng: &mut ChaCha8Rng| {
            let q = generate_swaps(400, &mode.distribution(), &urgency(), 20, rng).unwrap();
            q.iter().map(|o| o.tolerance).sum::<f64>() / 400.0
        };
        let normal = mean(ToleranceMode::Normal, &mut rng);
        let loose = mean(ToleranceMode::Loose, &mut rng);
        assert!(loose > normal);
        assert!((normal - 0.3648).abs() < 0.05 && (loose - 1.0047).abs() < 0.15);
    }

    #[test]
    fn reinsert_caps_at_queue_length() {
        let mut q: SwapQueue = (0..20).map(|i| SwapOrder::new(1.0, 0.0, i)).collect();
        let held = q.pop_head().unwrap();
        assert_eq!(q.reinsert(held, 10), 10);
        assert_eq!(q.get(10).unwrap().user_id, 0);

        let mut short: SwapQueue = (0..4).map(|i| SwapOrder::new(1.0, 0.0, i)).collect();
        let held = short.pop_head().unwrap();
        assert_eq!(short.reinsert(held, 10), 3);
        assert_eq!(short.get(3).unwrap().user_id, 0);
    }
}
