use rand::Rng;
use serde::{Deserialize, Serialize};

/// A trader holding a balance of each of the two pool tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub balances: [f64; 2],
}

impl User {
    pub fn new(id: usize, balance: f64) -> Self {
        Self { id, balances: [balance, balance] }
    }
}

/// `count` users with ids `0..count`, each holding `initial_balance` of both tokens.
pub fn generate_users(count: usize, initial_balance: f64) -> Vec<User> {
    (0..count).map(|id| User::new(id, initial_balance)).collect()
}

/// Apply the balance guard to a picked token: if the user holds less than
/// `threshold` times the other token, switch sides. Applied once.
pub fn guarded_side(balances: &[f64; 2], picked: usize, threshold: f64) -> usize {
    let other = 1 - picked;
    if balances[picked] < threshold * balances[other] {
        other
    } else {
        picked
    }
}

/// Pick the token the user sells: a fair coin, then the balance guard.
pub fn choose_trade_side<R: Rng + ?Sized>(user: &User, threshold: f64, rng: &mut R) -> usize {
    let picked = rng.random_range(0..2usize);
    guarded_side(&user.balances, picked, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn users_are_numbered_from_zero() {
        let users = generate_users(20, 1000.0);
        assert_eq!(users.len(), 20);
        assert!(users.iter().enumerate().all(|(i, u)| u.id == i && u.balances == [1000.0, 1000.0]));
        let whales = generate_users(20, 18_000.0);
        assert!(whales.iter().all(|u| u.balances == [18_000.0, 18_000.0]));
        assert_eq!(generate_users(1, 1000.0)[0].id, 0);
    }

    #[test]
    fn guard_inverts_depleted_side() {
        assert_eq!(guarded_side(&[1000.0, 1000.0], 0, 0.2), 0);
        assert_eq!(guarded_side(&[100.0, 1000.0], 0, 0.2), 1);
        assert_eq!(guarded_side(&[100.0, 1000.0], 1, 0.2), 1);
        assert_eq!(guarded_side(&[200.0, 1000.0], 0, 0.2), 0);
    }
}
