//! Truncated Taylor series ("jets") for exact derivatives of closed-form
//! radial quantities.
//!
//! A `Jet<T, N>` holds the coefficients `c[k] = g^{(k)}(s) / k!` of a function
//! `g` around a base point `s`. Arithmetic propagates the coefficients through
//! the usual Cauchy-product recurrences, so derivatives of compositions are
//! exact up to rounding.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field over which jets are built: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn powf(self, p: f64) -> Self {
        if self.im == 0.0 && self.re > 0.0 {
            Complex64::new(self.re.powf(p), 0.0)
        } else {
            Complex64::powf(self, p)
        }
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T: Scalar, const N: usize> {
    pub c: [T; N],
}

pub type RJet<const N: usize> = Jet<f64, N>;
pub type CJet<const N: usize> = Jet<Complex64, N>;

impl<T: Scalar, const N: usize> Jet<T, N> {
    pub fn constant(v: T) -> Self {
        let mut c = [T::zero(); N];
        c[0] = v;
        Self { c }
    }

    /// The identity function `s + h` expanded at `s`.
    pub fn variable(v: T) -> Self {
        let mut c = [T::zero(); N];
        c[0] = v;
        if N > 1 {
            c[1] = T::from_f64(1.0);
        }
        Self { c }
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// k-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> T {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.c[k].scale(fact)
    }

    /// Jet of `g'`; the top coefficient is lost.
    pub fn deriv(&self) -> Self {
        let mut c = [T::zero(); N];
        for k in 0..N.saturating_sub(1) {
            c[k] = self.c[k + 1].scale((k + 1) as f64);
        }
        Self { c }
    }

    /// Jet of a different length; missing coefficients are zero.
    pub fn truncate<const M: usize>(&self) -> Jet<T, M> {
        let mut c = [T::zero(); M];
        for (k, v) in c.iter_mut().enumerate().take(N) {
            *v = self.c[k];
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = x.scale(s);
        }
        Self { c }
    }

    pub fn mul_scalar(&self, s: T) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = *x * s;
        }
        Self { c }
    }

    pub fn add_scalar(&self, s: T) -> Self {
        let mut c = self.c;
        c[0] = c[0] + s;
        Self { c }
    }

    pub fn recip(&self) -> Self {
        Self::constant(T::from_f64(1.0)) / *self
    }

    pub fn exp(&self) -> Self {
        let mut e = [T::zero(); N];
        e[0] = self.c[0].exp();
        for n in 1..N {
            let mut acc = T::zero();
            for k in 1..=n {
                acc = acc + self.c[k].scale(k as f64) * e[n - k];
            }
            e[n] = acc.scale(1.0 / n as f64);
        }
        Self { c: e }
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut l = [T::zero(); N];
        l[0] = a0.ln();
        for n in 1..N {
            let mut acc = T::zero();
            for k in 1..n {
                acc = acc + l[k].scale(k as f64) * self.c[n - k];
            }
            l[n] = (self.c[n] - acc.scale(1.0 / n as f64)) / a0;
        }
        Self { c: l }
    }

    /// Principal power `g^p`.
    pub fn powf(&self, p: f64) -> Self {
        let a0 = self.c[0];
        let mut f = [T::zero(); N];
        f[0] = a0.powf(p);
        for n in 1..N {
            let mut acc = T::zero();
            for k in 1..=n {
                let w = p * k as f64 - (n - k) as f64;
                acc = acc + self.c[k].scale(w) * f[n - k];
            }
            f[n] = acc.scale(1.0 / n as f64) / a0;
        }
        Self { c: f }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(T::from_f64(1.0));
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    /// Evaluate the truncated series at offset `h`.
    pub fn eval(&self, h: T) -> T {
        let mut acc = T::zero();
        for k in (0..N).rev() {
            acc = acc * h + self.c[k];
        }
        acc
    }
}

impl<const N: usize> Jet<f64, N> {
    pub fn to_complex(&self) -> Jet<Complex64, N> {
        let mut c = [Complex64::new(0.0, 0.0); N];
        for k in 0..N {
            c[k] = Complex64::new(self.c[k], 0.0);
        }
        Jet { c }
    }
}

impl<T: Scalar, const N: usize> Add for Jet<T, N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for k in 0..N {
            c[k] = c[k] + o.c[k];
        }
        Self { c }
    }
}

impl<T: Scalar, const N: usize> Sub for Jet<T, N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for k in 0..N {
            c[k] = c[k] - o.c[k];
        }
        Self { c }
    }
}

impl<T: Scalar, const N: usize> Neg for Jet<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = -*x;
        }
        Self { c }
    }
}

impl<T: Scalar, const N: usize> Mul for Jet<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [T::zero(); N];
        for n in 0..N {
            let mut acc = T::zero();
            for k in 0..=n {
                acc = acc + self.c[k] * o.c[n - k];
            }
            c[n] = acc;
        }
        Self { c }
    }
}

impl<T: Scalar, const N: usize> Div for Jet<T, N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [T::zero(); N];
        for n in 0..N {
            let mut acc = self.c[n];
            for k in 1..=n {
                acc = acc - o.c[k] * q[n - k];
            }
            q[n] = acc / o.c[0];
        }
        Self { c: q }
    }
}

impl<T: Scalar, const N: usize> Add<T> for Jet<T, N> {
    type Output = Self;
    fn add(self, s: T) -> Self {
        self.add_scalar(s)
    }
}

impl<T: Scalar, const N: usize> Sub<T> for Jet<T, N> {
    type Output = Self;
    fn sub(self, s: T) -> Self {
        self.add_scalar(-s)
    }
}

impl<T: Scalar, const N: usize> Mul<T> for Jet<T, N> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.mul_scalar(s)
    }
}

impl<T: Scalar, const N: usize> Div<T> for Jet<T, N> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = *x / s;
        }
        Self { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_and_log_match_closed_forms() {
        let s = 2.5_f64;
        let j = RJet::<5>::variable(s);
        let p = j.powf(1.7);
        assert!((p.derivative(1) - 1.7 * s.powf(0.7)).abs() < 1e-13);
        assert!((p.derivative(2) - 1.7 * 0.7 * s.powf(-0.3)).abs() < 1e-13);
        assert!((p.derivative(3) - 1.7 * 0.7 * -0.3 * s.powf(-1.3)).abs() < 1e-13);
        let l = j.ln();
        assert!((l.derivative(3) - 2.0 / s.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn exp_of_reciprocal_matches_chain_rule() {
        let t = 0.4_f64;
        let j = RJet::<4>::variable(t);
        let e = (-(j.recip())).exp();
        let g = (-1.0 / t).exp();
        assert!((e.derivative(1) - g / (t * t)).abs() < 1e-14);
        let d2 = g * (1.0 / t.powi(4) - 2.0 / t.powi(3));
        assert!((e.derivative(2) - d2).abs() < 1e-13);
    }

    #[test]
    fn complex_sqrt_is_principal() {
        let z = Complex64::new(-4.0, 1e-3);
        let j = CJet::<3>::variable(z).sqrt();
        assert!(j.value().re > 0.0);
        let d = j.derivative(1);
        let expect = 0.5 / z.sqrt();
        assert!((d - expect).norm() < 1e-12);
    }
}
