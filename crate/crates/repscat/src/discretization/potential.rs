//! Potential specification `H = ½p² − ½|x|^α + q` with radial `q`.

use serde::{Deserialize, Serialize};

use crate::geometry_phase::escape::Escape;
use crate::numerics::fit::log_log_fit;
use crate::numerics::jet::RJet;
use crate::numerics::spline::CubicSpline;
use crate::Error;

pub const ALPHA_MIN: f64 = 0.7;
pub const ALPHA_MAX: f64 = 1.9;

/// Radial perturbation families, all functions of `s = |x|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum QProfile {
    Zero,
    /// `coupling · (1 + s²)^{-exponent/2}`
    Power { coupling: f64, exponent: f64 },
    /// `coupling · f(s)^{-exponent}` in terms of the escape function.
    EscapePower { coupling: f64, exponent: f64 },
    /// `coupling · exp(-(s/width)²)`
    Gauss { coupling: f64, width: f64 },
    /// Natural cubic spline through `(s, q)` pairs, zero past the last knot.
    Table(CubicSpline),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub alpha: f64,
    pub dim: usize,
    pub q: QProfile,
    /// Declared decay rate in `|q| ≤ C f^{-1-ρ}`.
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShortRangeReport {
    /// Sampled `sup |q| f^{1+ρ}`.
    pub c0: f64,
    /// Sampled `sup |q'| f^{2+ρ}`.
    pub c1: f64,
    /// Far-field log–log growth rates of the two weighted quantities.
    pub growth0: f64,
    pub growth1: f64,
}

impl PotentialSpec {
    pub fn free(alpha: f64, dim: usize) -> Self {
        Self {
            alpha,
            dim,
            q: QProfile::Zero,
            rho: f64::INFINITY,
        }
    }

    pub fn with_q(alpha: f64, dim: usize, q: QProfile, rho: f64) -> Self {
        Self { alpha, dim, q, rho }
    }

    pub fn escape(&self) -> Escape {
        Escape::new(self.alpha, self.dim)
    }

    pub fn is_free(&self) -> bool {
        matches!(self.q, QProfile::Zero)
    }

    /// True when `q(s) = q(-s)` is guaranteed; every family here is radial.
    pub fn is_even(&self) -> bool {
        true
    }

    pub fn q_jet<const N: usize>(&self, s: RJet<N>) -> RJet<N> {
        match &self.q {
            QProfile::Zero => RJet::constant(0.0),
            QProfile::Power { coupling, exponent } => {
                (s * s).add_scalar(1.0).powf(-0.5 * exponent).scale(*coupling)
            }
            QProfile::EscapePower { coupling, exponent } => {
                self.escape().f_jet(s).powf(-exponent).scale(*coupling)
            }
            QProfile::Gauss { coupling, width } => {
                let t = s.scale(1.0 / width);
                (-(t * t)).exp().scale(*coupling)
            }
            QProfile::Table(sp) => {
                if s.value() >= sp.x_max() {
                    RJet::constant(0.0)
                } else {
                    sp.jet(s)
                }
            }
        }
    }

    pub fn q(&self, s: f64) -> f64 {
        match &self.q {
            QProfile::Zero => 0.0,
            _ => self.q_jet::<1>(RJet::constant(s.abs())).value(),
        }
    }

    pub fn dq(&self, s: f64) -> f64 {
        self.q_jet::<2>(RJet::variable(s.abs())).c[1]
    }

    /// Full potential `−½|x|^α + q(|x|)`.
    pub fn potential(&self, x: f64) -> f64 {
        -0.5 * x.abs().powf(self.alpha) + self.q(x)
    }

    /// Radius beyond which `q` is supported only through its analytic tail.
    pub fn table_extent(&self) -> Option<f64> {
        match &self.q {
            QProfile::Table(sp) => Some(sp.x_max()),
            _ => None,
        }
    }

    /// Checks parameter ranges and samples the short-range condition
    /// `|∂^k q| ≤ C_k f^{-1-k-ρ}`, `k = 0, 1`.
    pub fn validate(&self) -> Result<ShortRangeReport, Error> {
        if !self.alpha.is_finite() || self.alpha < ALPHA_MIN || self.alpha > ALPHA_MAX {
            return Err(Error::Validation(format!(
                "alpha = {} outside supported range [{ALPHA_MIN}, {ALPHA_MAX}]",
                self.alpha
            )));
        }
        if self.dim == 0 {
            return Err(Error::Validation("dim must be at least 1".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Validation(format!("rho = {} must be positive", self.rho)));
        }
        match &self.q {
            QProfile::Power { exponent, coupling } | QProfile::EscapePower { exponent, coupling } => {
                if !exponent.is_finite() || !coupling.is_finite() || *exponent < 0.0 {
                    return Err(Error::Validation(
                        "q exponent and coupling must be finite, exponent non-negative".into(),
                    ));
                }
            }
            QProfile::Gauss { width, coupling } => {
                if !(*width > 0.0) || !coupling.is_finite() {
                    return Err(Error::Validation("q.width must be positive".into()));
                }
            }
            QProfile::Table(sp) => {
                let tail = sp.eval(sp.x_max()).abs();
                let peak = (0..=200)
                    .map(|k| sp.eval(sp.x_min() + (sp.x_max() - sp.x_min()) * k as f64 / 200.0).abs())
                    .fold(0.0, f64::max);
                if sp.x_min() > 0.0 || tail > 1e-8 * peak.max(1e-300) {
                    return Err(Error::Validation(
                        "tabulated q must start at s = 0 and decay to zero at its last knot".into(),
                    ));
                }
            }
            QProfile::Zero => {}
        }
        let esc = self.escape();
        let rho = if self.rho.is_finite() { self.rho } else { 8.0 };
        let mut ss = Vec::new();
        let mut g0 = Vec::new();
        let mut g1 = Vec::new();
        let n = 600;
        for k in 0..=n {
            let s = 10f64.powf(-1.0 + 13.0 * k as f64 / n as f64);
            let j = self.q_jet::<2>(RJet::variable(s));
            let f = esc.f(s);
            ss.push(s);
            g0.push(j.c[0].abs() * f.powf(1.0 + rho));
            g1.push(j.c[1].abs() * f.powf(2.0 + rho));
        }
        let c0 = g0.iter().cloned().fold(0.0, f64::max);
        let c1 = g1.iter().cloned().fold(0.0, f64::max);
        if !c0.is_finite() || !c1.is_finite() {
            return Err(Error::Validation("q or its derivative is not finite".into()));
        }
        let far = |g: &[f64]| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = ss
                .iter()
                .zip(g)
                .filter(|(s, v)| **s >= 1e6 && **v > 1e-280)
                .map(|(s, v)| (*s, *v))
                .unzip();
            if xs.len() < 10 {
                0.0
            } else {
                log_log_fit(&xs, &ys).map(|f| f.slope).unwrap_or(0.0)
            }
        };
        let growth0 = far(&g0);
        let growth1 = far(&g1);
        let tol = 0.02;
        if growth0 > tol || growth1 > tol {
            return Err(Error::Validation(format!(
                "q violates the short-range condition with rho = {}: |q| f^(1+rho) grows like s^{:.3}, |q'| f^(2+rho) like s^{:.3}",
                self.rho, growth0, growth1
            )));
        }
        Ok(ShortRangeReport {
            c0,
            c1,
            growth0,
            growth1,
        })
    }

    /// `κ = (d + α/2 − 1)/(1 + α/2)`, the exponent in the normalizing
    /// constants of the approximate eigenfunctions.
    pub fn kappa(&self) -> f64 {
        (self.dim as f64 + 0.5 * self.alpha - 1.0) / (1.0 + 0.5 * self.alpha)
    }

    /// `κ' = (d − α/2 − 3)/(1 + α/2)`, used by the wave-matrix trace.
    pub fn kappa_trace(&self) -> f64 {
        (self.dim as f64 - 0.5 * self.alpha - 3.0) / (1.0 + 0.5 * self.alpha)
    }

    /// `β_c = min{ρ + 1/(1−α/2), 1 + α/(1−α/2)}`.
    pub fn beta_c(&self) -> f64 {
        let t = 1.0 - 0.5 * self.alpha;
        (self.rho + 1.0 / t).min(1.0 + self.alpha / t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_alpha_outside_range() {
        assert!(PotentialSpec::free(2.5, 1).validate().is_err());
        assert!(PotentialSpec::free(0.5, 1).validate().is_err());
        assert!(PotentialSpec::free(1.0, 1).validate().is_ok());
    }

    #[test]
    fn short_range_sampling_accepts_saturating_and_rejects_slow_wells() {
        let ok = PotentialSpec::with_q(
            1.0,
            1,
            QProfile::Power {
                coupling: 0.3,
                exponent: 1.0,
            },
            1.0,
        );
        assert!(ok.validate().is_ok());
        let well = PotentialSpec::with_q(
            1.0,
            1,
            QProfile::Power {
                coupling: -5.0,
                exponent: 0.2,
            },
            1.0,
        );
        assert!(well.validate().is_err());
    }

    #[test]
    fn kappa_constants_at_alpha_one() {
        let s = PotentialSpec::free(1.0, 1);
        assert!((s.kappa() - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.kappa_trace() + 5.0 / 3.0).abs() < 1e-15);
        assert!((s.beta_c() - 3.0).abs() < 1e-15);
    }
}
