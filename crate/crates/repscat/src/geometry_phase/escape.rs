//! Smoothed radius `r` and escape function `f = (r^{1−α/2} − 1)/(1 − α/2) + 1`.

use serde::{Deserialize, Serialize};

use super::cutoff::chi_jet;
use crate::numerics::jet::RJet;

const WIDE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Escape {
    pub alpha: f64,
    pub dim: usize,
}

/// Jets in `s = |x|` of the radial geometry at one point.
#[derive(Clone, Copy, Debug)]
pub struct RadialJets<const N: usize> {
    pub s: f64,
    pub r: RJet<N>,
    pub f: RJet<N>,
    /// `Δf` for a radial function in dimension `d`.
    pub lap_f: RJet<N>,
    /// `∂^f Δf = f_s (Δf)_s`.
    pub df_lap_f: RJet<N>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeValues {
    pub r: f64,
    pub f: f64,
    pub grad_r: Vec<f64>,
    pub grad_f: Vec<f64>,
    pub lap_f: f64,
}

impl Escape {
    pub fn new(alpha: f64, dim: usize) -> Self {
        Self { alpha, dim }
    }

    fn tau(&self) -> f64 {
        1.0 - 0.5 * self.alpha
    }

    pub fn r_jet<const N: usize>(&self, s: RJet<N>) -> RJet<N> {
        let v = s.value();
        if v >= 2.0 {
            return s;
        }
        if v <= 1.0 {
            return RJet::constant(1.0);
        }
        let c = chi_jet(s);
        c + (c.scale(-1.0).add_scalar(1.0)) * s
    }

    pub fn f_of_r_jet<const N: usize>(&self, r: RJet<N>) -> RJet<N> {
        let t = self.tau();
        r.powf(t).add_scalar(-1.0).scale(1.0 / t).add_scalar(1.0)
    }

    pub fn f_jet<const N: usize>(&self, s: RJet<N>) -> RJet<N> {
        self.f_of_r_jet(self.r_jet(s))
    }

    pub fn r(&self, s: f64) -> f64 {
        self.r_jet::<1>(RJet::constant(s.abs())).value()
    }

    pub fn f(&self, s: f64) -> f64 {
        self.f_jet::<1>(RJet::constant(s.abs())).value()
    }

    pub fn f_of_r(&self, r: f64) -> f64 {
        let t = self.tau();
        (r.powf(t) - 1.0) / t + 1.0
    }

    /// Inverse of `f` on the region `r ≥ 1` where `f` is a function of `r`.
    pub fn r_of_f(&self, f: f64) -> f64 {
        let t = self.tau();
        ((f - 1.0) * t + 1.0).powf(1.0 / t)
    }

    /// `df/ds`.
    pub fn f_s(&self, s: f64) -> f64 {
        self.f_jet::<2>(RJet::variable(s.abs())).c[1]
    }

    /// Jets through order `N − 1` (at most 11) of the radial geometry.
    pub fn radial<const N: usize>(&self, s: f64) -> RadialJets<N> {
        assert!(N <= WIDE - 4, "radial jets are limited to order {}", WIDE - 5);
        let s = s.abs();
        let sj = RJet::<WIDE>::variable(s);
        let r = self.r_jet(sj);
        let f = self.f_of_r_jet(r);
        let (lap_f, df_lap_f) = if s <= 1.0 {
            (RJet::constant(0.0), RJet::constant(0.0))
        } else {
            let fs = f.deriv();
            let fss = fs.deriv();
            let lap_f = if self.dim == 1 {
                fss
            } else {
                fss + (fs / sj).scale(self.dim as f64 - 1.0)
            };
            (lap_f, fs * lap_f.deriv())
        };
        RadialJets {
            s,
            r: r.truncate(),
            f: f.truncate(),
            lap_f: lap_f.truncate(),
            df_lap_f: df_lap_f.truncate(),
        }
    }

    /// Pointwise `r`, `f`, gradients and `Δf` at `x ∈ ℝ^d`.
    pub fn eval_r_f(&self, x: &[f64]) -> EscapeValues {
        let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = self.radial::<4>(s);
        let rs = g.r.c[1];
        let fs = g.f.c[1];
        let unit: Vec<f64> = if s > 0.0 {
            x.iter().map(|v| v / s).collect()
        } else {
            vec![0.0; x.len()]
        };
        EscapeValues {
            r: g.r.value(),
            f: g.f.value(),
            grad_r: unit.iter().map(|u| u * rs).collect(),
            grad_f: unit.iter().map(|u| u * fs).collect(),
            lap_f: g.lap_f.value(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((Escape::new(0.9, 1).f(1.0) - 1.0).abs() < 1e-15);
        assert!((Escape::new(1.0, 1).f(4.0) - 3.0).abs() < 1e-14);
        assert!((Escape::new(4.0 / 3.0, 1).f(8.0) - 4.0).abs() < 1e-13);
        let e = Escape::new(1.0, 1);
        assert!((e.r_of_f(e.f_of_r(37.0)) - 37.0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_central_differences() {
        for &alpha in &[0.8, 1.0, 1.5] {
            for &d in &[1usize, 3] {
                let e = Escape::new(alpha, d);
                for &s in &[4.0, 17.0, 250.0, 1000.0] {
                    let h = 1e-4 * s;
                    let g = e.radial::<4>(s);
                    let fd = (e.f(s + h) - e.f(s - h)) / (2.0 * h);
                    assert!((g.f.c[1] - fd).abs() <= 1e-6 * g.f.c[1].abs());
                    let lap = |t: f64| e.radial::<4>(t).lap_f.value();
                    let dl = (lap(s + h) - lap(s - h)) / (2.0 * h);
                    let expect = g.f.c[1] * dl;
                    assert!((g.df_lap_f.value() - expect).abs() <= 1e-6 * expect.abs());
                }
            }
        }
    }

    #[test]
    fn d1_laplacian_of_f_in_far_field() {
        let alpha = 1.2;
        let e = Escape::new(alpha, 1);
        let r: f64 = 9.0;
        let g = e.radial::<4>(r);
        let expect = -(alpha / 2.0) * r.powf(-alpha / 2.0 - 1.0);
        assert!((g.lap_f.value() - expect).abs() < 1e-15);
    }
}
