//! Regularized weight `θ_w(f) = [1 − (1 + f/2^ν)^{−δ}]/δ`.

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Exponent applied to `θ_w` when it is used as a weight.
    pub beta: f64,
    pub delta: f64,
    pub nu: u32,
}

impl WeightParams {
    pub fn new(beta: f64, delta: f64, nu: u32) -> Result<Self, Error> {
        if !(beta >= 0.0) || !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Validation(format!(
                "weight needs beta ≥ 0 and delta > 0, got beta = {beta}, delta = {delta}"
            )));
        }
        Ok(Self { beta, delta, nu })
    }

    fn scale(&self) -> f64 {
        2f64.powi(self.nu as i32)
    }
}

/// `k`-th derivative of `θ_w` for `k ≥ 1`.
pub fn weight_derivative(f: f64, w: &WeightParams, k: u32) -> f64 {
    let s = w.scale();
    let t = 1.0 + f / s;
    let mut rising = 1.0;
    for j in 0..k.saturating_sub(1) {
        rising *= 1.0 + w.delta + j as f64;
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * rising * t.powf(-(k as f64) - w.delta) / s.powi(k as i32)
}

pub fn eval_weight_theta(f: f64, w: &WeightParams) -> (f64, f64, f64) {
    let s = w.scale();
    let x = f / s;
    // −expm1(−δ ln(1+x)) keeps small f accurate
    let th = -(-w.delta * x.ln_1p()).exp_m1() / w.delta;
    (th, weight_derivative(f, w, 1), weight_derivative(f, w, 2))
}

/// Constants found by sampling the weight inequalities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightSweep {
    /// `min 2^ν θ_w` over `f ≥ 1`.
    pub lower: f64,
    /// `max θ_w / min{1/δ, f/2^ν}`; at most one.
    pub upper_ratio: f64,
    /// `min θ_w′ / (min{2^ν, f}^δ f^{−1−δ} θ_w)`.
    pub derivative_lower: f64,
    /// `max f θ_w′ / θ_w`; at most one.
    pub derivative_upper_ratio: f64,
    /// `max |θ_w^{(k)}| f^k / θ_w` for `k = 1, 2, 3`.
    pub higher: [f64; 3],
    pub signs_alternate: bool,
    pub samples: usize,
}

impl WeightSweep {
    pub fn passes(&self) -> bool {
        self.lower > 0.0
            && self.lower.is_finite()
            && self.upper_ratio <= 1.0 + 1e-12
            && self.derivative_lower > 0.0
            && self.derivative_upper_ratio <= 1.0 + 1e-12
            && self.higher.iter().all(|c| c.is_finite())
            && self.signs_alternate
    }
}

/// Samples the weight inequalities on `n` log-spaced points of `[f0, f1]`
/// for every parameter set, returning constants uniform over all of them.
pub fn weight_sweep(params: &[WeightParams], f0: f64, f1: f64, n: usize) -> WeightSweep {
    let mut out = WeightSweep {
        lower: f64::INFINITY,
        upper_ratio: 0.0,
        derivative_lower: f64::INFINITY,
        derivative_upper_ratio: 0.0,
        higher: [0.0; 3],
        signs_alternate: true,
        samples: 0,
    };
    for w in params {
        let s = w.scale();
        for k in 0..n {
            let f = f0 * (f1 / f0).powf(k as f64 / (n - 1).max(1) as f64);
            let (th, d1, _) = eval_weight_theta(f, w);
            out.lower = out.lower.min(th * s);
            out.upper_ratio = out.upper_ratio.max(th / (1.0 / w.delta).min(f / s));
            let lower_shape = s.min(f).powf(w.delta) * f.powf(-1.0 - w.delta) * th;
            out.derivative_lower = out.derivative_lower.min(d1 / lower_shape);
            out.derivative_upper_ratio = out.derivative_upper_ratio.max(f * d1 / th);
            for j in 1..=3u32 {
                let dj = weight_derivative(f, w, j);
                let expect = if j % 2 == 1 { 1.0 } else { -1.0 };
                if dj * expect <= 0.0 {
                    out.signs_alternate = false;
                }
                out.higher[j as usize - 1] =
                    out.higher[j as usize - 1].max(dj.abs() * f.powi(j as i32) / th);
            }
            out.samples += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        let w = WeightParams::new(0.0, 1.0, 0).unwrap();
        assert!((eval_weight_theta(1e12, &w).0 - 1.0).abs() < 1e-11);
        for &(d, n) in &[(0.1, 0u32), (0.5, 3), (1.0, 10)] {
            let w = WeightParams::new(1.0, d, n).unwrap();
            assert_eq!(eval_weight_theta(0.0, &w).0, 0.0);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let w = WeightParams::new(1.0, 0.5, 2).unwrap();
        for &f in &[1.0, 7.0, 300.0] {
            let h = 1e-4 * f;
            let th = |x: f64| eval_weight_theta(x, &w).0;
            let d1 = (th(f + h) - th(f - h)) / (2.0 * h);
            let d2 = (th(f + h) - 2.0 * th(f) + th(f - h)) / (h * h);
            let (_, a1, a2) = eval_weight_theta(f, &w);
            assert!((a1 - d1).abs() < 1e-6 * a1.abs());
            assert!((a2 - d2).abs() < 1e-4 * a2.abs());
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(WeightParams::new(1.0, 0.0, 0).is_err());
        assert!(WeightParams::new(-1.0, 1.0, 0).is_err());
    }
}
