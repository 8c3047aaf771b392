//! Violation penalties and the two reward strategies.
//!
//! The reward of a transition depends only on the resulting operating point:
//! a successful next state (no violations) earns `r_plus`, an unsuccessful
//! one earns either the shaped violation penalty or a constant -1 per step,
//! depending on the strategy.

use serde::{Deserialize, Serialize};

use crate::powerflow::{GridNetwork, PowerFlowSolution};

/// Which branch handles unsuccessful steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardStrategy {
    /// Penalty shaped by violation magnitudes: `alpha * sum(line_overflow) +
    /// beta * sum(bus_violation)`.
    ShapedPenalty,
    /// Constant -1 on every unsuccessful step, so the return encodes negated
    /// episode length.
    ConstantStep,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RewardConfig {
    pub strategy: RewardStrategy,
    pub alpha: f64,
    pub beta: f64,
    pub r_plus: f64,
    /// Reward of a step whose power flow fails to converge; applied by the
    /// environment, never by [`reward`] itself.
    pub divergence_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            strategy: RewardStrategy::ShapedPenalty,
            alpha: -0.1,
            beta: -1000.0,
            r_plus: 1000.0,
            divergence_penalty: -1000.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.alpha > 0.0 {
            return Err(format!("alpha must be <= 0, got {}", self.alpha));
        }
        if self.beta > 0.0 {
            return Err(format!("beta must be <= 0, got {}", self.beta));
        }
        Ok(())
    }
}

/// Squared overflow per line: `max(s_line - s_max, 0)^2`.
pub fn line_overflow(s_line: &[f64], s_max: &[f64]) -> Vec<f64> {
    assert_eq!(s_line.len(), s_max.len());
    s_line
        .iter()
        .zip(s_max)
        .map(|(&s, &limit)| {
            let over = (s - limit).max(0.0);
            over * over
        })
        .collect()
}

/// Voltage violation per bus: `max((v - lower) * (v - upper), 0)`. Zero
/// inside the secure zone and on its boundary.
pub fn bus_violation(v_m: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    assert_eq!(v_m.len(), lower.len());
    assert_eq!(v_m.len(), upper.len());
    v_m.iter()
        .zip(lower.iter().zip(upper))
        .map(|(&v, (&lo, &hi))| ((v - lo) * (v - hi)).max(0.0))
        .collect()
}

/// The shaped penalty of an operating point.
pub fn f_penalty(
    v_m: &[f64],
    lower: &[f64],
    upper: &[f64],
    s_line: &[f64],
    s_max: &[f64],
    config: &RewardConfig,
) -> f64 {
    let overflow: f64 = line_overflow(s_line, s_max).iter().sum();
    let violation: f64 = bus_violation(v_m, lower, upper).iter().sum();
    config.alpha * overflow + config.beta * violation
}

/// Reward of a transition that produced `next`, already classified as
/// terminal or not. Divergent transitions never reach this function.
pub fn reward(
    next: &PowerFlowSolution,
    network: &GridNetwork,
    is_terminal: bool,
    config: &RewardConfig,
) -> f64 {
    if is_terminal {
        return config.r_plus;
    }
    match config.strategy {
        RewardStrategy::ShapedPenalty => {
            let lower: Vec<f64> = network.buses.iter().map(|b| b.v_min).collect();
            let upper: Vec<f64> = network.buses.iter().map(|b| b.v_max).collect();
            let s_max: Vec<f64> = network.branches.iter().map(|b| b.s_max).collect();
            f_penalty(&next.v_m, &lower, &upper, &next.s_line, &s_max, config)
        }
        RewardStrategy::ConstantStep => -1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_overflow_hand_cases() {
        assert!((line_overflow(&[1.2], &[1.0])[0] - 0.04).abs() < 1e-15);
        assert_eq!(line_overflow(&[0.9], &[1.0])[0], 0.0);
        assert_eq!(line_overflow(&[1.0], &[1.0])[0], 0.0);
    }

    #[test]
    fn bus_violation_hand_cases() {
        // (1.08 - 0.97)(1.08 - 1.07) = 0.11 * 0.01 = 0.0011
        let v = bus_violation(&[1.08], &[0.97], &[1.07])[0];
        assert!((v - 0.0011).abs() < 1e-12);
        assert_eq!(bus_violation(&[1.02], &[0.97], &[1.07])[0], 0.0);
        assert_eq!(bus_violation(&[0.97], &[0.97], &[1.07])[0], 0.0);
        assert_eq!(bus_violation(&[1.07], &[0.97], &[1.07])[0], 0.0);
    }

    #[test]
    fn composite_penalty_hand_case() {
        let config = RewardConfig::default();
        let p = f_penalty(
            &[1.08],
            &[0.97],
            &[1.07],
            &[1.2],
            &[1.0],
            &config,
        );
        // -0.1 * 0.04 + -1000 * 0.0011 = -0.004 - 1.1
        assert!((p - (-1.104)).abs() < 1e-9, "got {p}");
    }

    #[test]
    fn no_violation_zero_penalty() {
        let config = RewardConfig::default();
        let p = f_penalty(&[1.0, 1.02], &[0.97; 2], &[1.07; 2], &[0.5], &[1.0], &config);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn penalty_linear_in_violations() {
        let config = RewardConfig::default();
        let one = f_penalty(&[1.08], &[0.97], &[1.07], &[], &[], &config);
        let two = f_penalty(&[1.08, 1.08], &[0.97; 2], &[1.07; 2], &[], &[], &config);
        assert!((two - 2.0 * one).abs() < 1e-12);
    }

    fn dummy_solution(v_m: Vec<f64>, s_line: Vec<f64>) -> PowerFlowSolution {
        PowerFlowSolution {
            v_a: vec![0.0; v_m.len()],
            v_m,
            s_line,
            p_g: vec![],
            q_g: vec![],
            converged: true,
            iterations: 1,
            max_mismatch: 0.0,
        }
    }

    #[test]
    fn strategy_branches() {
        let net = crate::powerflow::desk14();
        let sol = dummy_solution(vec![1.0; 14], vec![0.1; 20]);

        let shaped = RewardConfig::default();
        assert_eq!(reward(&sol, &net, true, &shaped), 1000.0);

        let constant = RewardConfig {
            strategy: RewardStrategy::ConstantStep,
            r_plus: -1.0,
            ..RewardConfig::default()
        };
        assert_eq!(reward(&sol, &net, false, &constant), -1.0);
        assert_eq!(reward(&sol, &net, true, &constant), -1.0);

        let mut bad = dummy_solution(vec![1.0; 14], vec![0.1; 20]);
        bad.v_m[3] = 1.08;
        bad.s_line[0] = net.branches[0].s_max + 0.2;
        let r = reward(&bad, &net, false, &shaped);
        assert!((r - (-1.104)).abs() < 1e-9, "got {r}");
    }

    #[test]
    fn rejects_positive_coefficients() {
        let mut config = RewardConfig::default();
        config.alpha = 0.1;
        assert!(config.validate().is_err());
    }

    proptest! {
        #[test]
        fn shaped_nonterminal_reward_nonpositive(
            v in proptest::collection::vec(0.8f64..1.2, 14),
            s in proptest::collection::vec(0.0f64..3.0, 20),
        ) {
            let net = crate::powerflow::desk14();
            let sol = dummy_solution(v, s);
            let config = RewardConfig::default();
            let r = reward(&sol, &net, false, &config);
            prop_assert!(r <= 0.0);
        }

        #[test]
        fn penalty_nonincreasing_in_violation(extra in 0.0f64..0.5) {
            let config = RewardConfig::default();
            let base = f_penalty(&[1.08], &[0.97], &[1.07], &[1.2], &[1.0], &config);
            let worse =
                f_penalty(&[1.08 + extra], &[0.97], &[1.07], &[1.2 + extra], &[1.0], &config);
            prop_assert!(worse <= base);
        }
    }
}
