//! Smooth cutoff `χ` with `χ = 1` on `s ≤ 1`, `χ = 0` on `s ≥ 2`.
//!
//! Built from `ψ(t) = exp(−1/t)` as `χ(s) = ψ(2−s) / (ψ(2−s) + ψ(s−1))`.

use crate::numerics::jet::RJet;

pub const LOWER: f64 = 1.0;
pub const UPPER: f64 = 2.0;

fn psi<const N: usize>(t: RJet<N>) -> RJet<N> {
    if t.value() <= 0.0 {
        RJet::constant(0.0)
    } else {
        (-(t.recip())).exp()
    }
}

pub fn chi_jet<const N: usize>(s: RJet<N>) -> RJet<N> {
    let v = s.value();
    if v <= LOWER {
        return RJet::constant(1.0);
    }
    if v >= UPPER {
        return RJet::constant(0.0);
    }
    let a = psi(s.scale(-1.0).add_scalar(UPPER));
    let b = psi(s.add_scalar(-LOWER));
    a / (a + b)
}

pub fn chi(s: f64) -> f64 {
    chi_jet::<1>(RJet::constant(s)).value()
}

pub fn chi_prime(s: f64) -> f64 {
    chi_jet::<2>(RJet::variable(s)).c[1]
}

/// `χ̄_m = 1 − χ(f / 2^m)` as a jet in whatever variable `f` carries.
pub fn chi_bar_jet<const N: usize>(f: RJet<N>, m: u32) -> RJet<N> {
    let scaled = f.scale(0.5f64.powi(m as i32));
    chi_jet(scaled).scale(-1.0).add_scalar(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_interior() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(3.0), 0.0);
        let v = chi(1.5);
        assert!(v > 0.0 && v < 1.0);
        assert!((v - 0.5).abs() < 1e-15, "symmetric mollifier is 1/2 at the midpoint");
        assert!(chi_prime(1.5) < 0.0);
    }

    #[test]
    fn monotone_on_dense_samples() {
        let mut prev = 1.0;
        for k in 0..=20000 {
            let s = 0.9 + 1.2 * k as f64 / 20000.0;
            let v = chi(s);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            assert!(chi_prime(s) <= 1e-15);
            prev = v;
        }
    }
}
