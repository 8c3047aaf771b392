//! Tanh-squashed Gaussian policy head.
//!
//! A policy network emits `(mean, log_std)` per action component; sampling
//! draws `u = mean + std * noise`, squashes through `tanh`, and maps
//! affinely into the action box. The log-probability includes the squash
//! correction, so it is the exact density of the emitted action.

/// Clamp range for raw log-std outputs.
pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Action box the squashed sample is mapped into.
#[derive(Debug, Clone, Copy)]
pub struct SquashBounds {
    pub low: f64,
    pub high: f64,
}

impl SquashBounds {
    pub fn center(&self) -> f64 {
        (self.low + self.high) / 2.0
    }

    pub fn half_range(&self) -> f64 {
        (self.high - self.low) / 2.0
    }
}

/// A reparameterized sample with the intermediates needed for its gradient.
#[derive(Debug, Clone)]
pub struct GaussianSample {
    pub action: Vec<f64>,
    pub log_prob: f64,
    pre_tanh: Vec<f64>,
    std: Vec<f64>,
    noise: Vec<f64>,
    clamped: Vec<bool>,
    half_range: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 - tanh(u)^2)` in a form stable for large `|u|`.
fn log1m_tanh2(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

/// Draws the tanh-squashed reparameterized sample `bounds(tanh(mean + std *
/// noise))` and its log-probability. `noise = 0` yields the greedy action.
pub fn gaussian_policy_sample(
    mean: &[f64],
    log_std_raw: &[f64],
    bounds: SquashBounds,
    noise: &[f64],
) -> GaussianSample {
    assert_eq!(mean.len(), log_std_raw.len());
    assert_eq!(mean.len(), noise.len());
    let n = mean.len();
    let center = bounds.center();
    let half = bounds.half_range();
    assert!(half > 0.0, "degenerate action box");

    let mut action = Vec::with_capacity(n);
    let mut pre_tanh = Vec::with_capacity(n);
    let mut std = Vec::with_capacity(n);
    let mut clamped = Vec::with_capacity(n);
    let mut log_prob = 0.0;
    for i in 0..n {
        let was_clamped = log_std_raw[i] < LOG_STD_MIN || log_std_raw[i] > LOG_STD_MAX;
        let ls = log_std_raw[i].clamp(LOG_STD_MIN, LOG_STD_MAX);
        let sd = ls.exp();
        let u = mean[i] + sd * noise[i];
        let t = u.tanh();
        // the affine map can overshoot the box by an ulp at tanh saturation
        action.push((center + half * t).clamp(bounds.low, bounds.high));
        pre_tanh.push(u);
        std.push(sd);
        clamped.push(was_clamped);
        // normal log-density in noise form, then the change of variables
        // through tanh and the affine map
        log_prob += -ls - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * noise[i] * noise[i];
        log_prob -= half.ln() + log1m_tanh2(u);
    }

    GaussianSample {
        action,
        log_prob,
        pre_tanh,
        std,
        noise: noise.to_vec(),
        clamped,
        half_range: half,
    }
}

/// Backpropagates through the sample: given `dL/d action` and `dL/d
/// log_prob`, returns `(dL/d mean, dL/d log_std_raw)` with the noise held
/// fixed (the reparameterization trick). Clamped log-std components get
/// zero gradient.
pub fn sample_gradients(
    sample: &GaussianSample,
    d_action: &[f64],
    d_log_prob: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = sample.action.len();
    assert_eq!(d_action.len(), n);
    let mut d_mean = Vec::with_capacity(n);
    let mut d_log_std = Vec::with_capacity(n);
    for i in 0..n {
        let t = sample.pre_tanh[i].tanh();
        // d action / d u and d log_prob / d u
        let du = d_action[i] * sample.half_range * (1.0 - t * t) + d_log_prob * 2.0 * t;
        d_mean.push(du);
        let dls = du * sample.std[i] * sample.noise[i] - d_log_prob;
        d_log_std.push(if sample.clamped[i] { 0.0 } else { dls });
    }
    (d_mean, d_log_std)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUNDS: SquashBounds = SquashBounds {
        low: 0.9,
        high: 1.1,
    };

    #[test]
    fn zero_noise_gives_squashed_mean() {
        let s = gaussian_policy_sample(&[0.3, -1.2], &[0.0, 0.5], BOUNDS, &[0.0, 0.0]);
        assert!((s.action[0] - (1.0 + 0.1 * 0.3f64.tanh())).abs() < 1e-15);
        assert!((s.action[1] - (1.0 + 0.1 * (-1.2f64).tanh())).abs() < 1e-15);
    }

    #[test]
    fn actions_always_inside_box() {
        for k in -50..50 {
            let noise = k as f64 * 0.5;
            let s = gaussian_policy_sample(&[2.0], &[1.0], BOUNDS, &[noise]);
            assert!((0.9..=1.1).contains(&s.action[0]));
        }
    }

    #[test]
    fn density_integrates_to_one() {
        // Simpson quadrature of exp(log_prob) over the action interval for
        // a 1-D policy, evaluating the density by inverting the squash at
        // each node.
        let mean = 0.2;
        let ls = -0.7f64;
        let std = ls.exp();
        let (c, h) = (BOUNDS.center(), BOUNDS.half_range());
        let n = 20001;
        let a0 = 0.9 + 1e-9;
        let a1 = 1.1 - 1e-9;
        let dx = (a1 - a0) / (n - 1) as f64;
        let mut total = 0.0;
        for k in 0..n {
            let a = a0 + dx * k as f64;
            let u = ((a - c) / h).atanh();
            let eps = (u - mean) / std;
            let s = gaussian_policy_sample(&[mean], &[ls], BOUNDS, &[eps]);
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            total += w * s.log_prob.exp();
        }
        total *= dx / 3.0;
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mean = vec![0.4, -0.3, 0.1];
        let log_std = vec![-0.5, 0.2, -1.0];
        let noise = vec![0.7, -1.1, 0.4];
        let weight = [0.6, -1.3, 0.9];
        let d_log_prob = 0.8;

        let loss = |mean: &[f64], log_std: &[f64]| -> f64 {
            let s = gaussian_policy_sample(mean, log_std, BOUNDS, &noise);
            s.action
                .iter()
                .zip(weight)
                .map(|(a, w)| a * w)
                .sum::<f64>()
                + d_log_prob * s.log_prob
        };

        let s = gaussian_policy_sample(&mean, &log_std, BOUNDS, &noise);
        let (d_mean, d_ls) = sample_gradients(&s, &weight, d_log_prob);

        let h = 1e-6;
        for i in 0..3 {
            let mut mp = mean.clone();
            let mut mm = mean.clone();
            mp[i] += h;
            mm[i] -= h;
            let fd = (loss(&mp, &log_std) - loss(&mm, &log_std)) / (2.0 * h);
            assert!(
                (fd - d_mean[i]).abs() < 1e-5 * (1.0 + fd.abs()),
                "mean[{i}]: fd {fd} vs {grad}",
                grad = d_mean[i]
            );

            let mut lp = log_std.clone();
            let mut lm = log_std.clone();
            lp[i] += h;
            lm[i] -= h;
            let fd = (loss(&mean, &lp) - loss(&mean, &lm)) / (2.0 * h);
            assert!(
                (fd - d_ls[i]).abs() < 1e-5 * (1.0 + fd.abs()),
                "log_std[{i}]: fd {fd} vs {grad}",
                grad = d_ls[i]
            );
        }
    }

    #[test]
    fn clamped_log_std_gets_zero_gradient() {
        let s = gaussian_policy_sample(&[0.0], &[5.0], BOUNDS, &[0.3]);
        let (_, d_ls) = sample_gradients(&s, &[1.0], 1.0);
        assert_eq!(d_ls[0], 0.0);
        // and the effective std was clamped
        assert!((s.std[0] - LOG_STD_MAX.exp()).abs() < 1e-12);
    }

    #[test]
    fn log_prob_stable_for_extreme_pre_tanh() {
        let s = gaussian_policy_sample(&[30.0], &[0.0], BOUNDS, &[0.0]);
        assert!(s.log_prob.is_finite());
    }
}
