//! Shooting oracle: the channel equation `u″ = (−s^α + 2q + c/s² − 2λ)u`
//! integrated from the origin with 4-stage Gauss–Legendre collocation, then
//! matched at two radii to second-order Liouville–Green solutions
//! `a e^{±iΦ}` normalized so that `Φ − θ → 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::discretization::potential::PotentialSpec;
use crate::numerics::jet::RJet;
use crate::numerics::quadrature::{integrate_log_tail, GaussLegendre};
use crate::Error;

/// Butcher tableau of the 4-stage Gauss method, built from its nodes.
struct Collocation {
    c: [f64; 4],
    a: [[f64; 4]; 4],
    b: [f64; 4],
}

impl Collocation {
    fn new() -> Self {
        let gl = GaussLegendre::new(4);
        let mut c = [0.0; 4];
        for i in 0..4 {
            c[i] = 0.5 * (gl.nodes[i] + 1.0);
        }
        let lagrange = |j: usize, t: f64| -> f64 {
            (0..4).filter(|&m| m != j).map(|m| (t - c[m]) / (c[j] - c[m])).product()
        };
        let quad = GaussLegendre::new(8);
        let mut a = [[0.0; 4]; 4];
        let mut b = [0.0; 4];
        for j in 0..4 {
            for i in 0..4 {
                a[i][j] = quad.integrate(0.0, c[i], |t| lagrange(j, t));
            }
            b[j] = quad.integrate(0.0, 1.0, |t| lagrange(j, t));
        }
        Self { c, a, b }
    }
}

fn solve_dense<const N: usize>(mut m: [[f64; N]; N], mut rhs: [f64; N]) -> [f64; N] {
    for col in 0..N {
        let p = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, p);
        rhs.swap(col, p);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    x
}

/// The reduced equation of one channel.
#[derive(Clone, Debug)]
pub struct ChannelOde {
    pub spec: PotentialSpec,
    pub lambda: f64,
    /// `ℓ(ℓ+d−2) + (d−1)(d−3)/4`; zero on the line.
    pub centrifugal: f64,
    /// `ν = ℓ + (d−1)/2` for radial channels.
    pub nu: Option<f64>,
}

/// Outgoing and incoming amplitudes relative to `s^{−α/4} e^{±iθ}`.
#[derive(Clone, Copy, Debug)]
pub struct Amplitudes {
    pub outgoing: Complex64,
    pub incoming: Complex64,
    pub radii: (f64, f64),
}

impl ChannelOde {
    pub fn line(spec: &PotentialSpec, lambda: f64) -> Self {
        Self {
            spec: spec.clone(),
            lambda,
            centrifugal: 0.0,
            nu: None,
        }
    }

    pub fn radial(spec: &PotentialSpec, lambda: f64, ell: u32) -> Self {
        let d = spec.dim as f64;
        let nu = ell as f64 + 0.5 * (d - 1.0);
        Self {
            spec: spec.clone(),
            lambda,
            centrifugal: nu * (nu - 1.0),
            nu: Some(nu),
        }
    }

    /// `k² = s^α + 2λ − 2q − c/s²`.
    fn k2(&self, s: f64) -> f64 {
        let c = if self.centrifugal == 0.0 { 0.0 } else { self.centrifugal / (s * s) };
        s.powf(self.spec.alpha) + 2.0 * self.lambda - 2.0 * self.spec.q(s) - c
    }

    fn step(&self, tab: &Collocation, s: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let k2: [f64; 4] = std::array::from_fn(|i| self.k2(s + tab.c[i] * h));
        // stage unknowns K_i = (k_i, l_i): k_i = y1 + hΣa_ij l_j, l_i = −k2_i(y0 + hΣa_ij k_j)
        let mut m = [[0.0; 8]; 8];
        let mut rhs = [0.0; 8];
        for i in 0..4 {
            m[2 * i][2 * i] = 1.0;
            m[2 * i + 1][2 * i + 1] = 1.0;
            for j in 0..4 {
                m[2 * i][2 * j + 1] -= h * tab.a[i][j];
                m[2 * i + 1][2 * j] += h * tab.a[i][j] * k2[i];
            }
            rhs[2 * i] = y[1];
            rhs[2 * i + 1] = -k2[i] * y[0];
        }
        let k = solve_dense(m, rhs);
        let mut out = y;
        for j in 0..4 {
            out[0] += h * tab.b[j] * k[2 * j];
            out[1] += h * tab.b[j] * k[2 * j + 1];
        }
        out
    }

    /// Integrates `(u, u′)` from `s0` to `s1 > s0`.
    pub fn integrate(&self, s0: f64, y0: [f64; 2], s1: f64) -> [f64; 2] {
        let tab = Collocation::new();
        let mut s = s0;
        let mut y = y0;
        while s < s1 {
            let k = self.k2(s).abs().sqrt() + 1.0;
            let mut h = 0.4 / k;
            if s < 1.0 {
                h = h.min((0.1 * s).max(1e-6));
            }
            h = h.min(s1 - s);
            y = self.step(&tab, s, y, h);
            s += h;
        }
        y
    }

    /// Regular solution at `s1`: even or odd on the line, Frobenius start
    /// `s^ν(1 + b s² + e s^{α+2})` in radial channels.
    pub fn regular(&self, parity: i32, s1: f64) -> [f64; 2] {
        match self.nu {
            None => {
                let y0 = if parity > 0 { [1.0, 0.0] } else { [0.0, 1.0] };
                self.integrate(0.0, y0, s1)
            }
            Some(nu) => {
                let a = self.spec.alpha;
                let s0: f64 = 1e-3;
                let b = (2.0 * self.spec.q(0.0) - 2.0 * self.lambda) / (4.0 * nu + 2.0);
                let e = -1.0 / ((a + 2.0) * (2.0 * nu + a + 1.0));
                let u = s0.powf(nu) * (1.0 + b * s0 * s0 + e * s0.powf(a + 2.0));
                let du = nu * s0.powf(nu - 1.0)
                    + b * (nu + 2.0) * s0.powf(nu + 1.0)
                    + e * (nu + a + 2.0) * s0.powf(nu + a + 1.0);
                self.integrate(s0, [u, du], s1)
            }
        }
    }

    fn q_jet(&self, s: f64) -> RJet<5> {
        let sj = RJet::<5>::variable(s);
        let mut q = sj.powf(self.spec.alpha) - self.spec.q_jet(sj).scale(2.0);
        if self.centrifugal != 0.0 {
            q = q - (sj * sj).recip().scale(self.centrifugal);
        }
        q.add_scalar(2.0 * self.lambda)
    }

    /// `(a, ε, √Q)` with `a = Q^{−1/4}(1 + ε)`, `ε = −(a₀″/a₀)/(4Q)`.
    fn liouville_green(&self, s: f64) -> (f64, f64, f64) {
        let qj = self.q_jet(s);
        let a0 = qj.powf(-0.25);
        let a0pp = 2.0 * a0.c[2];
        let q = qj.value();
        let eps = -(a0pp / a0.value()) / (4.0 * q);
        (a0.value() * (1.0 + eps), eps, q.sqrt())
    }

    /// `θ(λ, s)` for `s ≥ 2`, where the smoothed radius equals `s`.
    fn theta(&self, s: f64) -> f64 {
        let a = self.spec.alpha;
        let t = 1.0 - 0.5 * a;
        s.powf(1.0 + 0.5 * a) / (1.0 + 0.5 * a) + self.lambda * ((s.powf(t) - 1.0) / t + 1.0)
    }

    /// `Φ(s) = θ(s) − ∫_s^∞ (Φ′ − θ′)`.
    fn phase(&self, s: f64) -> f64 {
        let a = self.spec.alpha;
        let lam = self.lambda;
        let tail = integrate_log_tail(
            s,
            |t| {
                let h = t.powf(0.5 * a);
                let x = 2.0 * self.spec.q(t) + self.centrifugal / (t * t);
                let (_, eps, sq) = self.liouville_green(t);
                let d = (2.0 * lam - x) / (sq + h);
                let g0 = (-lam * d - h * x) / (h * (sq + h));
                Complex64::new(g0 - 2.0 * eps * sq, 0.0)
            },
            1e-15,
        );
        self.theta(s) - tail.re
    }

    fn basis(&self, s: f64) -> Complex64 {
        let (a, _, _) = self.liouville_green(s);
        Complex64::from_polar(a, self.phase(s))
    }

    /// Amplitudes of the regular solution, matched at `r1` and a second
    /// radius about a quarter wavelength further out.
    pub fn amplitudes(&self, parity: i32, r1: f64) -> Result<Amplitudes, Error> {
        if r1 < 50.0 {
            return Err(Error::Validation(format!("matching radius {r1} must be at least 50")));
        }
        let mut r2 = r1 + 0.5 * PI / self.k2(r1).sqrt();
        let mut tries = 0;
        while ((self.phase(r2) - self.phase(r1)).sin()).abs() < 0.5 {
            r2 += 0.25 * PI / self.k2(r2).sqrt();
            tries += 1;
            if tries > 16 {
                return Err(Error::Numerical("could not respace the matching radii".into()));
            }
        }
        let u1 = self.regular(parity, r1)[0];
        let u2 = self.integrate(r1, self.regular(parity, r1), r2)[0];
        let (p1, p2) = (self.basis(r1), self.basis(r2));
        let det = p1 * p2.conj() - p1.conj() * p2;
        let outgoing = (u1 * p2.conj() - u2 * p1.conj()) / det;
        let incoming = (p1 * u2 - p2 * u1) / det;
        Ok(Amplitudes {
            outgoing,
            incoming,
            radii: (r1, r2),
        })
    }
}

pub fn kappa(spec: &PotentialSpec) -> f64 {
    let a = spec.alpha;
    (spec.dim as f64 + 0.5 * a - 1.0) / (1.0 + 0.5 * a)
}

/// `S` on the parity basis of the line: `(s_even, s_odd)`.
pub fn line_parity_eigenvalues(spec: &PotentialSpec, lambda: f64, r1: f64) -> Result<(Complex64, Complex64), Error> {
    let ode = ChannelOde::line(spec, lambda);
    let ph = Complex64::from_polar(1.0, 0.5 * PI * kappa(spec));
    let e = ode.amplitudes(1, r1)?;
    let o = ode.amplitudes(-1, r1)?;
    Ok((ph * e.outgoing / e.incoming, -ph * o.outgoing / o.incoming))
}

/// `S_ℓ` of radial channel `ℓ`.
pub fn channel_eigenvalue(spec: &PotentialSpec, lambda: f64, ell: u32, r1: f64) -> Result<Complex64, Error> {
    let ode = ChannelOde::radial(spec, lambda, ell);
    let a = ode.amplitudes(1, r1)?;
    let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * Complex64::from_polar(1.0, 0.5 * PI * kappa(spec)) * a.outgoing / a.incoming)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::airy::FreeAiryLine;

    #[test]
    fn collocation_tableau_has_order_conditions() {
        let t = Collocation::new();
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..4 {
            let row: f64 = t.a[i].iter().sum();
            assert!((row - t.c[i]).abs() < 1e-15);
        }
        let m7: f64 = (0..4).map(|j| t.b[j] * t.c[j].powi(7)).sum();
        assert!((m7 - 1.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn free_line_matches_airy() {
        let spec = PotentialSpec::free(1.0, 1);
        for &l in &[0.5, 1.0, 2.0] {
            let (se, so) = line_parity_eigenvalues(&spec, l, 60.0).unwrap();
            let (ae, ao) = FreeAiryLine::new(l).parity_eigenvalues();
            assert!((se - ae).norm() < 1e-8, "{l}: {se} vs {ae}");
            assert!((so - ao).norm() < 1e-8, "{l}: {so} vs {ao}");
        }
    }

    #[test]
    fn radial_channel_is_unimodular_and_radius_independent() {
        let spec = PotentialSpec::free(1.3, 3);
        for ell in 0..3 {
            let a = channel_eigenvalue(&spec, 1.0, ell, 60.0).unwrap();
            let b = channel_eigenvalue(&spec, 1.0, ell, 120.0).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-10);
            assert!((a - b).norm() < 1e-7, "{a} {b}");
        }
    }
}
