//! Exterior WKB solutions of `−½u″ + (−½s^α + q + c/(2s²) − z)u = 0`.
//!
//! The log-derivative `y = u′/u` solves `y′ + y² + k² = 0` with
//! `k² = s^α + 2z − 2q − c/s²`; its asymptotic series is built from
//! Taylor jets of `k²` and summed to its smallest term.

use num_complex::Complex64;

use super::potential::PotentialSpec;
use crate::geometry_phase::phase::theta;
use crate::numerics::jet::{CJet, RJet};
use crate::numerics::quadrature::{integrate_log_tail, GaussLegendre};
use crate::{Error, Sign};

const M: usize = 16;
const MAX_TERMS: usize = 12;

#[derive(Clone, Debug)]
pub struct Exterior {
    pub spec: PotentialSpec,
    pub centrifugal: f64,
    pub z: Complex64,
    /// `+` for `e^{+iθ}` behaviour, `−` for `e^{−iθ}`.
    pub sign: Sign,
}

impl Exterior {
    pub fn new(spec: &PotentialSpec, centrifugal: f64, z: Complex64, sign: Sign) -> Self {
        Self {
            spec: spec.clone(),
            centrifugal,
            z,
            sign,
        }
    }

    fn k2_jet(&self, s: f64) -> CJet<M> {
        let sj = RJet::<M>::variable(s);
        let q = self.spec.q_jet(sj);
        let real = sj.powf(self.spec.alpha) - q.scale(2.0) - (sj * sj).recip().scale(self.centrifugal);
        real.to_complex().add_scalar(2.0 * self.z)
    }

    /// Terms `y_0, y_1, …` of the series at `s`, truncated at the smallest.
    pub fn terms(&self, s: f64) -> Vec<Complex64> {
        let k2 = self.k2_jet(s);
        let y0 = k2.sqrt().mul_scalar(Complex64::new(0.0, self.sign.as_f64()));
        let inv = (y0.scale(2.0)).recip();
        let mut ys: Vec<CJet<M>> = vec![y0];
        let mut out = vec![y0.value()];
        let mut prev = f64::INFINITY;
        for n in 0..MAX_TERMS {
            let mut acc = ys[n].deriv();
            for j in 1..=n {
                acc = acc + ys[j] * ys[n + 1 - j];
            }
            let next = -(acc * inv);
            let mag = next.value().norm();
            if n >= 1 && mag >= prev {
                break;
            }
            prev = mag;
            out.push(next.value());
            ys.push(next);
        }
        out
    }

    /// `y = u′/u` at `s`.
    pub fn log_derivative(&self, s: f64) -> Complex64 {
        self.terms(s).iter().sum()
    }

    /// `ln(w(s1)/w(s0))` by Gauss–Legendre integration of `y`.
    pub fn log_ratio(&self, s0: f64, s1: f64) -> Complex64 {
        if s0 == s1 {
            return Complex64::new(0.0, 0.0);
        }
        let gl = GaussLegendre::new(16);
        let k = self.k2_jet(s0.max(s1)).value().sqrt().norm();
        let panels = ((k * (s1 - s0).abs() / 2.0).ceil() as usize).max(1);
        let h = (s1 - s0) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = s0 + p as f64 * h;
            acc += gl.integrate(a, a + h, |s| self.log_derivative(s));
        }
        acc
    }

    /// `ln w(s)` for the solution normalized by
    /// `w(s) = k^{−1/2} e^{±iθ(λ,s)} (1 + o(1))` as `s → ∞`; needs real `z`.
    pub fn log_normalized(&self, s: f64) -> Result<Complex64, Error> {
        if self.z.im != 0.0 {
            return Err(Error::Validation(
                "normalized exterior solutions need a real energy".into(),
            ));
        }
        if s < 2.0 {
            return Err(Error::Validation(format!("exterior solution requested at s = {s} < 2")));
        }
        let lambda = self.z.re;
        let a = self.spec.alpha;
        let sg = self.sign.as_f64();
        let i = Complex64::i();
        let esc = self.spec.escape();
        let cap_q = |t: f64| 2.0 * self.spec.q(t) + self.centrifugal / (t * t);
        let k_of = |t: f64| Complex64::new(t.powf(a) + 2.0 * lambda - cap_q(t), 0.0).sqrt();
        let i1 = integrate_log_tail(
            s,
            |t| {
                let h = t.powf(0.5 * a);
                let k = k_of(t);
                let qq = cap_q(t);
                let dd = (2.0 * lambda - qq) / (k + h);
                (-lambda * dd - qq * h) / (h * (k + h))
            },
            1e-15,
        );
        let i2 = integrate_log_tail(
            s,
            |t| self.terms(t).iter().skip(2).sum::<Complex64>(),
            1e-15,
        );
        let th = theta(&esc, lambda, s);
        Ok(i * sg * th - 0.5 * k_of(s).ln() - i * sg * i1 - i2)
    }

    pub fn normalized(&self, s: f64) -> Result<Complex64, Error> {
        Ok(self.log_normalized(s)?.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riccati_residual_is_small() {
        let spec = PotentialSpec::free(1.0, 1);
        let e = Exterior::new(&spec, 0.0, Complex64::new(1.0, 0.05), Sign::Plus);
        for &s in &[10.0, 40.0, 300.0] {
            let h = 1e-3;
            let y = e.log_derivative(s);
            let dy = (e.log_derivative(s + h) - e.log_derivative(s - h)) / (2.0 * h);
            let k2 = s + 2.0 * e.z;
            let res = (dy + y * y + k2).norm() / k2.norm();
            assert!(res < 1e-9, "{res} at {s}");
        }
    }

    #[test]
    fn normalized_solution_is_consistent_with_ratios() {
        let spec = PotentialSpec::free(1.3, 1);
        let e = Exterior::new(&spec, 0.0, Complex64::new(0.7, 0.0), Sign::Minus);
        let a = e.log_normalized(30.0).unwrap();
        let b = e.log_normalized(31.5).unwrap();
        let r = e.log_ratio(30.0, 31.5);
        assert!((b - a - r).norm() < 1e-11, "{}", (b - a - r).norm());
    }
}
