//! Turn penalties and the success bonus.

pub const SUCCESS_REWARD: f64 = 20.0;
pub const TURN_PENALTY: f64 = -1.0;
pub const MAX_TURNS: usize = 25;

/// -1 per turn, +20 added to the final turn on success.
pub fn compute_reward(n_turns: usize, success: bool) -> Vec<f64> {
    let mut r = vec![TURN_PENALTY; n_turns];
    if success {
        if let Some(last) = r.last_mut() {
            *last += SUCCESS_REWARD;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_shapes() {
        assert_eq!(compute_reward(5, true).iter().sum::<f64>(), 15.0);
        assert_eq!(compute_reward(25, false).iter().sum::<f64>(), -25.0);
        assert!(compute_reward(0, true).is_empty());
    }
}
