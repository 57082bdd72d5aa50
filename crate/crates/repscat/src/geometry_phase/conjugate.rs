//! Conjugate-operator quantities: `q₀`, the asymptotic phase `a_z`, the
//! remainder `q₂` of the factorization of `H − z`, and `ℓ_jk`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::chi_bar_jet;
use crate::discretization::potential::PotentialSpec;
use crate::numerics::jet::{CJet, RJet};
use crate::numerics::stencil::fornberg;
use crate::{Error, Sign};

const NJ: usize = 6;

/// `q₀` as a jet in `s = |x|`.
pub fn q0_jet<const N: usize>(spec: &PotentialSpec, s: f64) -> RJet<N> {
    let esc = spec.escape();
    let a = spec.alpha;
    let g = esc.radial::<N>(s);
    let q = spec.q_jet(RJet::<N>::variable(s.abs()));
    let ra = g.r.powf(a);
    q + (ra * g.lap_f * g.lap_f).scale(0.125)
        + (g.r.powf(0.5 * a - 1.0) * g.lap_f).scale(0.25 * a)
        + (ra * g.df_lap_f).scale(0.25)
        - g.r.powf(-2.0).scale(0.25 * a)
}

pub fn eval_q0(spec: &PotentialSpec, x: &[f64]) -> f64 {
    let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    q0_jet::<3>(spec, s).value()
}

/// Spectral window and cutoff index used by `a_z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseContext {
    pub spec: PotentialSpec,
    /// Smallest `m ≥ 1` with `2λ_min − 2q₀ + r^α > 1` on `f ≥ 2^m`.
    pub m: u32,
    pub window: (f64, f64),
}

impl PhaseContext {
    pub fn new(spec: PotentialSpec, window: (f64, f64)) -> Result<Self, Error> {
        let (lo, hi) = window;
        if !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Validation(format!("bad energy window [{lo}, {hi}]")));
        }
        let esc = spec.escape();
        for m in 1..=40u32 {
            let f0 = 2f64.powi(m as i32);
            let ok = (0..=400).all(|k| {
                let f = f0 * 1e6f64.powf(k as f64 / 400.0);
                let s = esc.r_of_f(f);
                let q0 = q0_jet::<1>(&spec, s).value();
                2.0 * lo - 2.0 * q0 + s.powf(spec.alpha) > 1.0
            });
            if ok {
                return Ok(Self { spec, m, window });
            }
        }
        Err(Error::Validation(
            "no cutoff index m makes 2λ − 2q₀ + r^α > 1 in the energy window".into(),
        ))
    }

    pub fn beta_c(&self) -> f64 {
        self.spec.beta_c()
    }

    /// Smallest `f` on the support of `χ̄_{m+1}`.
    pub fn support_start_f(&self, extra: u32) -> f64 {
        2f64.powi((self.m + extra) as i32)
    }
}

fn branch_argument<const N: usize>(
    spec: &PotentialSpec,
    z: Complex64,
    s: f64,
) -> (RJet<N>, RJet<N>, CJet<N>, CJet<N>) {
    let esc = spec.escape();
    let g = esc.radial::<N>(s);
    let q0 = q0_jet::<N>(spec, s).to_complex();
    let zq = q0.scale(-1.0).add_scalar(z);
    let w = zq.scale(2.0) + g.r.powf(spec.alpha).to_complex();
    (g.r, g.f, zq, w)
}

fn check_branch(w: Complex64, s: f64) -> Result<(), Error> {
    if w.im == 0.0 && w.re <= 0.0 {
        Err(Error::BranchCut(format!(
            "2(z − q₀) + r^α = {} on (−∞, 0] at |x| = {s}",
            w.re
        )))
    } else {
        Ok(())
    }
}

/// Jet of `a_z` in `s`.
pub fn phase_a_jet<const N: usize>(
    ctx: &PhaseContext,
    z: Complex64,
    s: f64,
    sign: Sign,
) -> Result<CJet<N>, Error> {
    let alpha = ctx.spec.alpha;
    let (r, f, zq, w) = branch_argument::<N>(&ctx.spec, z, s);
    let cut = chi_bar_jet(f, ctx.m);
    if cut.c.iter().all(|v| *v == 0.0) {
        return Ok(CJet::constant(Complex64::new(0.0, 0.0)));
    }
    check_branch(w.value(), s)?;
    let sg = sign.as_f64();
    let i = Complex64::i();
    let rm = r.powf(-0.5 * alpha).to_complex();
    let rm1 = r.powf(-0.5 * alpha - 1.0).to_complex();
    let body = rm * w.sqrt() + rm1.mul_scalar(i * (sg * 0.5 * alpha))
        - (zq / w * rm1).mul_scalar(i * (sg * 0.5 * alpha));
    Ok(cut.to_complex() * body)
}

pub fn phase_a(ctx: &PhaseContext, z: Complex64, s: f64, sign: Sign) -> Result<Complex64, Error> {
    Ok(phase_a_jet::<1>(ctx, z, s, sign)?.value())
}

/// `a₀ = r^{−α/2} √(2λ − 2q₀ + r^α)` without cutoff.
pub fn phase_a0(spec: &PotentialSpec, lambda: f64, s: f64) -> Result<f64, Error> {
    let esc = spec.escape();
    let r = esc.r(s);
    let w = 2.0 * lambda - 2.0 * q0_jet::<1>(spec, s).value() + r.powf(spec.alpha);
    if w <= 0.0 {
        return Err(Error::BranchCut(format!("2λ − 2q₀ + r^α = {w} at |x| = {s}")));
    }
    Ok(r.powf(-0.5 * spec.alpha) * w.sqrt())
}

/// Closed form of `q₂` on `supp χ̄_{m+1}`, including the
/// `(α²/8) r^{−2} (z−q₀)/(2z−2q₀+r^α)` term from expanding `r^α a²`.
pub fn q2_closed(ctx: &PhaseContext, z: Complex64, s: f64, sign: Sign) -> Result<Complex64, Error> {
    let alpha = ctx.spec.alpha;
    let (r, _, zq, w) = branch_argument::<NJ>(&ctx.spec, z, s);
    check_branch(w.value(), s)?;
    let rs = r.c[1];
    let q0 = q0_jet::<NJ>(&ctx.spec, s);
    let dr_q0 = rs * q0.c[1];
    let ratio = zq / w;
    let dr_ratio = ratio.c[1] * rs;
    let rv = r.value();
    let sg = sign.as_f64();
    let i = Complex64::i();
    let rat = ratio.value();
    Ok(i * (sg * 0.5 * dr_q0) / w.value().sqrt() - dr_ratio * (0.25 * alpha / rv)
        + rat * ((0.25 * alpha + 0.125 * alpha * alpha) / (rv * rv))
        - rat * rat * (alpha * alpha / (8.0 * rv * rv)))
}

/// `q₂` from its definition `±½ p^f(r^α a) + ½ r^α a² − ½ r^α + q₀ + (α/4) r^{−2} − z`.
pub fn q2_definitional(
    ctx: &PhaseContext,
    z: Complex64,
    s: f64,
    sign: Sign,
) -> Result<Complex64, Error> {
    let alpha = ctx.spec.alpha;
    let esc = ctx.spec.escape();
    let g = esc.radial::<NJ>(s);
    let a = phase_a_jet::<NJ>(ctx, z, s, sign)?;
    let ra = g.r.powf(alpha);
    let m = ra.to_complex() * a;
    let fs = g.f.c[1];
    let pf = -Complex64::i() * fs * m.c[1];
    let rv = g.r.value();
    let q0 = q0_jet::<1>(&ctx.spec, s).value();
    let av = a.value();
    Ok(pf * (0.5 * sign.as_f64()) + av * av * (0.5 * ra.value()) - 0.5 * ra.value() + q0
        + 0.25 * alpha / (rv * rv)
        - z)
}

/// `ℓ_jk = |∂f|² δ_jk − ∂_j f ∂_k f` at `x`.
pub fn eval_ell(spec: &PotentialSpec, x: &[f64]) -> Vec<Vec<f64>> {
    let ev = spec.escape().eval_r_f(x);
    let g2: f64 = ev.grad_f.iter().map(|v| v * v).sum();
    let d = x.len();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| if j == k { g2 } else { 0.0 } - ev.grad_f[j] * ev.grad_f[k])
                .collect()
        })
        .collect()
}

/// Derivative of order `m` of samples on a uniform grid, central in the
/// interior and one-sided near the ends.
pub fn uniform_derivative(v: &[Complex64], h: f64, order: usize, m: usize) -> Vec<Complex64> {
    let n = v.len();
    let k = order / 2 + (m - 1) / 2;
    let width = 2 * k + 1;
    assert!(n >= width + 2, "grid too short for the stencil");
    let scale = h.powi(m as i32);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut cache: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in 0..n {
        let start = if i < k {
            0
        } else if i + k >= n {
            n - width - 1
        } else {
            i - k
        };
        let len = if i < k || i + k >= n { width + 1 } else { width };
        let offset = i - start;
        let key = offset * 1000 + len;
        let w = match cache.iter().find(|(kk, _)| *kk == key) {
            Some((_, w)) => w.clone(),
            None => {
                let xs: Vec<f64> = (0..len).map(|j| j as f64 - offset as f64).collect();
                let w = fornberg(0.0, &xs, m);
                cache.push((key, w.clone()));
                w
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            acc += v[start + j] * *wj;
        }
        out[i] = acc / scale;
    }
    out
}

/// Record of the factorization residual under mesh halving.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorizationRecord {
    pub order: usize,
    pub spacings: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log2` of successive residual ratios.
    pub observed_orders: Vec<f64>,
}

/// Relative residual `‖(H−z)u − [½(A±a)r^α(A∓a) + q₂]u‖ / ‖u‖` for a radial
/// Gaussian probe `u = exp(−(s−c)²/(2w²))` on a uniform mesh of spacing `h`.
///
/// The `ℓ`-term vanishes on radial functions and is therefore omitted.
pub fn factorization_residual(
    ctx: &PhaseContext,
    z: Complex64,
    sign: Sign,
    center: f64,
    width: f64,
    h: f64,
    order: usize,
) -> Result<f64, Error> {
    let spec = &ctx.spec;
    let esc = spec.escape();
    let d = spec.dim as f64;
    let alpha = spec.alpha;
    let s0 = center - 12.0 * width;
    let s1 = center + 12.0 * width;
    if esc.f(s0) < ctx.support_start_f(1) {
        return Err(Error::Validation(format!(
            "probe support starts at |x| = {s0}, outside supp χ̄_(m+1) (f ≥ {})",
            ctx.support_start_f(1)
        )));
    }
    let n = ((s1 - s0) / h).round() as usize + 1;
    let s: Vec<f64> = (0..n).map(|i| s0 + i as f64 * h).collect();
    let u: Vec<Complex64> = s
        .iter()
        .map(|x| Complex64::new((-(x - center).powi(2) / (2.0 * width * width)).exp(), 0.0))
        .collect();
    let us = uniform_derivative(&u, h, order, 1);
    let uss = uniform_derivative(&u, h, order, 2);
    let i = Complex64::i();
    let sg = sign.as_f64();
    let mut geo = Vec::with_capacity(n);
    for &x in &s {
        let g = esc.radial::<4>(x);
        let a = phase_a(ctx, z, x, sign)?;
        let q2 = q2_closed(ctx, z, x, sign)?;
        geo.push((g.f.c[1], g.lap_f.value(), g.r.value().powf(alpha), a, q2));
    }
    // inner = r^α (A ∓ a) u
    let inner: Vec<Complex64> = (0..n)
        .map(|k| {
            let (fs, lap, ra, a, _) = geo[k];
            let au = -i * fs * us[k] - i * 0.5 * lap * u[k];
            (au - a * sg * u[k]) * ra
        })
        .collect();
    let inner_s = uniform_derivative(&inner, h, order, 1);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..n {
        let (fs, lap, _, a, q2) = geo[k];
        let x = s[k];
        let lhs = -0.5 * (uss[k] + (d - 1.0) / x * us[k])
            + (-0.5 * x.powf(alpha) + spec.q(x) - z) * u[k];
        let outer = -i * fs * inner_s[k] - i * 0.5 * lap * inner[k] + a * sg * inner[k];
        let rhs = 0.5 * outer + q2 * u[k];
        let w = x.powf(d - 1.0);
        num += (lhs - rhs).norm_sqr() * w;
        den += u[k].norm_sqr() * w;
    }
    Ok((num / den).sqrt())
}

pub fn factorization_convergence(
    ctx: &PhaseContext,
    z: Complex64,
    sign: Sign,
    center: f64,
    width: f64,
    h0: f64,
    order: usize,
    halvings: usize,
) -> Result<FactorizationRecord, Error> {
    let mut spacings = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..=halvings {
        let h = h0 / 2f64.powi(k as i32);
        spacings.push(h);
        residuals.push(factorization_residual(ctx, z, sign, center, width, h, order)?);
    }
    let observed_orders = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(FactorizationRecord {
        order,
        spacings,
        residuals,
        observed_orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(alpha: f64, dim: usize) -> PhaseContext {
        PhaseContext::new(PotentialSpec::free(alpha, dim), (0.5, 2.0)).unwrap()
    }

    #[test]
    fn q0_tail_constant_at_alpha_one() {
        // hand derivation: (α²/32 − α²/8 + α²/16 + α/8 − α/4) r^{−2}
        let spec = PotentialSpec::free(1.0, 1);
        for &r in &[4.0, 30.0, 700.0] {
            let v = q0_jet::<1>(&spec, r).value() * r * r;
            assert!((v + 5.0 / 32.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn q0_in_three_dimensions_matches_finite_differences() {
        let spec = PotentialSpec::free(1.3, 3);
        let esc = spec.escape();
        let a = spec.alpha;
        let r: f64 = 10.0;
        let h = 0.05;
        let d1 = |g: &dyn Fn(f64) -> f64, s: f64| {
            (g(s - 2.0 * h) - 8.0 * g(s - h) + 8.0 * g(s + h) - g(s + 2.0 * h)) / (12.0 * h)
        };
        let f = |s: f64| esc.f(s);
        let fs = |s: f64| d1(&f, s);
        let lap = |s: f64| d1(&fs, s) + 2.0 / s * fs(s);
        let dlap = d1(&lap, r);
        let l = lap(r);
        let fd = 0.125 * r.powf(a) * l * l + 0.25 * a * r.powf(0.5 * a - 1.0) * l
            + 0.25 * r.powf(a) * fs(r) * dlap
            - 0.25 * a / (r * r);
        let v = q0_jet::<1>(&spec, r).value();
        assert!((v - fd).abs() < 1e-6 * v.abs(), "{v} vs {fd}");
    }

    #[test]
    fn phase_a_tends_to_one_and_conjugates() {
        let c = ctx(1.0, 1);
        let a = phase_a(&c, Complex64::new(1.0, 0.0), 1e6, Sign::Plus).unwrap();
        assert!((a - 1.0).norm() < 1e-5);
        let zp = Complex64::new(1.0, 0.3);
        for &s in &[5.0, 40.0, 900.0] {
            let ap = phase_a(&c, zp, s, Sign::Plus).unwrap();
            let am = phase_a(&c, zp.conj(), s, Sign::Minus).unwrap();
            assert_eq!(ap.conj(), am);
        }
    }

    #[test]
    fn closed_and_definitional_q2_agree() {
        for &(alpha, dim) in &[(1.0, 1usize), (0.8, 1), (1.5, 3)] {
            let c = ctx(alpha, dim);
            let esc = c.spec.escape();
            let s0 = esc.r_of_f(c.support_start_f(1)) + 1.0;
            for &z in &[Complex64::new(1.0, 0.1), Complex64::new(0.5, 0.0)] {
                for sign in [Sign::Plus, Sign::Minus] {
                    for &s in &[s0, 2.0 * s0, 50.0 * s0] {
                        let a = q2_closed(&c, z, s, sign).unwrap();
                        let b = q2_definitional(&c, z, s, sign).unwrap();
                        // the definitional form cancels terms of size r^α
                        let floor = 1e3 * f64::EPSILON * (s.powf(alpha) + z.norm() + 1.0);
                        assert!((a - b).norm() < 1e-8 * a.norm() + floor, "{a} vs {b} at s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn ell_annihilates_radial_direction() {
        let spec = PotentialSpec::free(1.0, 3);
        let x = [3.0, -4.0, 12.0];
        let l = eval_ell(&spec, &x);
        let r = 13.0f64;
        for j in 0..3 {
            let v: f64 = (0..3).map(|k| l[j][k] * x[k]).sum();
            assert!(v.abs() < 1e-14);
            for k in 0..3 {
                let expect = r.powf(-1.0) * (if j == k { 1.0 } else { 0.0 } - x[j] * x[k] / (r * r));
                assert!((l[j][k] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn branch_cut_is_rejected() {
        let c = ctx(1.0, 1);
        let e = phase_a(&c, Complex64::new(-40.0, 0.0), 20.0, Sign::Plus);
        assert!(matches!(e, Err(Error::BranchCut(_))));
    }
}
