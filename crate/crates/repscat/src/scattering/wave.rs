//! `𝓕^±(λ)ψ` from far-field amplitudes, single-shell traces, Cesàro
//! averages, and the Parseval identity.
//!
//! Past the source, `R(λ ± i0)ψ − P = A w_±` exactly, where `w_±` is the
//! exterior solution normalized by `k^{−1/2}e^{±iθ}(1 + o(1))`. Hence
//! `𝓕^±ψ(ω) = (2π)^{−1/2} e^{±iπκ′/4} A(±ω)` with `κ′ = κ − 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sides, AngularVector, ChannelSet};
use crate::discretization::asymptotic::Exterior;
use crate::discretization::boundary::BoundaryMode;
use crate::discretization::field::WaveField;
use crate::discretization::grid::ChannelGrid;
use crate::geometry_phase::phase::theta;
use crate::numerics::quadrature::GaussLegendre;
use crate::numerics::stencil::fornberg;
use crate::resolvent::{ResolventResult, ResolventSolver, Source, SpectralPoint};
use crate::{Error, Sign};

/// `(2π)^{−1/2} e^{±iπκ′/4}`.
pub fn trace_constant(kappa_trace: f64, sign: Sign) -> Complex64 {
    Complex64::from_polar((2.0 * PI).powf(-0.5), sign.as_f64() * PI * kappa_trace / 4.0)
}

/// `A` with `u − P = A w_τ` at each side's end node, in [`sides`] order.
pub fn far_amplitudes(grid: &ChannelGrid, res: &ResolventResult) -> Result<Vec<Complex64>, Error> {
    let p = res.point;
    let ext = Exterior::new(&grid.spec, grid.centrifugal, Complex64::new(p.lambda, 0.0), p.sign);
    let w = ext.normalized(grid.length())?;
    let n = grid.n as i64;
    Ok(sides(grid)
        .iter()
        .map(|(_, side)| {
            let i = if *side == 0 { -n } else { n };
            let k = grid.unknown(i).expect("end nodes are unknowns");
            (res.field.values[k] - res.tail_end[*side]) / w
        })
        .collect())
}

/// Amplitudes of every channel placed in an angular vector: entry `ω`
/// holds the amplitude measured in direction `ω`.
pub fn place(set: &ChannelSet, per_channel: &[Vec<Complex64>]) -> AngularVector {
    let mut out = AngularVector::zeros(set.basis);
    for (ch, g) in set.grids.iter().enumerate() {
        let slots = set.slots(ch);
        for ((slot, _), a) in sides(g).iter().zip(&per_channel[ch]) {
            out.coeffs[slots[*slot]] = *a;
        }
    }
    out
}

/// `c·A` for `+`, `c·A(−·)` for `−`.
pub fn to_wave_vector(set: &ChannelSet, sign: Sign, amps: &AngularVector) -> AngularVector {
    let c = trace_constant(set.spec.kappa_trace(), sign);
    match sign {
        Sign::Plus => amps.scale(c),
        Sign::Minus => amps.reflect().scale(c),
    }
}

#[derive(Clone, Debug)]
pub struct WaveMatrixResult {
    pub value: AngularVector,
    /// Far amplitudes relative to `w_±`, by direction.
    pub amplitudes: AngularVector,
    pub solves: Vec<ResolventResult>,
    pub boundary_residual: f64,
}

/// Solves `R(λ ± i0)ψ` on every channel.
pub fn limiting_solves(set: &ChannelSet, lambda: f64, sign: Sign, src: &[Source]) -> Result<Vec<ResolventResult>, Error> {
    if src.len() != set.grids.len() {
        return Err(Error::Validation("one source per channel is required".into()));
    }
    set.grids
        .par_iter()
        .zip(src)
        .map(|(g, s)| {
            let point = SpectralPoint::real(lambda, sign);
            if !s.has_tails() && s.field.values.iter().all(|v| v.norm() == 0.0) {
                return Ok(ResolventResult::zero(&s.field, point));
            }
            ResolventSolver::new(g, point, BoundaryMode::Asymptotic, None)?.solve(s)
        })
        .collect()
}

/// `𝓕^±(λ)ψ` by exact matching at the truncation radius.
pub fn wave_matrix(set: &ChannelSet, lambda: f64, sign: Sign, src: &[Source]) -> Result<WaveMatrixResult, Error> {
    let solves = limiting_solves(set, lambda, sign, src)?;
    wave_matrix_from(set, sign, solves)
}

pub fn wave_matrix_from(set: &ChannelSet, sign: Sign, solves: Vec<ResolventResult>) -> Result<WaveMatrixResult, Error> {
    let per: Vec<Vec<Complex64>> = set
        .grids
        .iter()
        .zip(&solves)
        .map(|(g, r)| far_amplitudes(g, r))
        .collect::<Result<_, _>>()?;
    let amplitudes = place(set, &per);
    let boundary_residual = solves.iter().map(|r| r.boundary_residual).fold(0.0, f64::max);
    Ok(WaveMatrixResult {
        value: to_wave_vector(set, sign, &amplitudes),
        amplitudes,
        solves,
        boundary_residual,
    })
}

/// Local interpolation of `g(x_k)` at `x0` from `points` nearest nodes.
pub(crate) fn interpolate(grid: &ChannelGrid, x0: f64, points: usize, g: impl Fn(usize) -> Complex64) -> Complex64 {
    let n = grid.len();
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if grid.x(mid) < x0 {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let k = lo;
    let half = points / 2;
    let start = k.saturating_sub(half).min(n.saturating_sub(points));
    let idx: Vec<usize> = (start..(start + points).min(n)).collect();
    let xs: Vec<f64> = idx.iter().map(|&j| grid.x(j)).collect();
    let w = fornberg(x0, &xs, 0);
    idx.iter().zip(w).map(|(&j, wj)| g(j) * wj).sum()
}

/// `s^{α/4} e^{∓iθ} u` at node `k`, the demodulated far field.
fn demodulated(grid: &ChannelGrid, lambda: f64, sign: Sign, u: &WaveField, k: usize) -> Complex64 {
    let s = grid.x(k).abs();
    let esc = grid.spec.escape();
    let ph = Complex64::from_polar(s.powf(0.25 * grid.spec.alpha), -sign.as_f64() * theta(&esc, lambda, s));
    ph * u.values[k]
}

fn check_level(grid: &ChannelGrid, f: f64) -> Result<f64, Error> {
    if f < 4.0 {
        return Err(Error::Validation(format!("level f = {f} lies in the smoothing region (f < 4)")));
    }
    let esc = grid.spec.escape();
    let s = esc.r_of_f(f);
    if s > grid.length() - 1.0 {
        return Err(Error::Validation(format!("level f = {f} (|x| = {s}) is outside the grid")));
    }
    Ok(s)
}

/// Raw traces `s^{α/4}e^{∓iθ}u` at `|x| = s(f)` by direction.
fn raw_trace(set: &ChannelSet, lambda: f64, sign: Sign, fields: &[WaveField], f: f64) -> Result<AngularVector, Error> {
    let mut per = Vec::with_capacity(set.grids.len());
    for (g, u) in set.grids.iter().zip(fields) {
        let s = check_level(g, f)?;
        let pts = g.order() + 2;
        per.push(
            sides(g)
                .iter()
                .map(|(_, side)| {
                    let x0 = if *side == 0 { -s } else { s };
                    interpolate(g, x0, pts, |k| demodulated(g, lambda, sign, u, k))
                })
                .collect(),
        );
    }
    Ok(place(set, &per))
}

/// `(2π)^{−1/2} e^{±iπκ′/4} r^{(d+α/2−1)/2} e^{∓iθ} u(±f̃ω)` per direction.
pub fn shell_trace(set: &ChannelSet, lambda: f64, f: f64, sign: Sign, fields: &[WaveField]) -> Result<AngularVector, Error> {
    let raw = raw_trace(set, lambda, sign, fields, f)?;
    Ok(to_wave_vector(set, sign, &raw))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CesaroRecord {
    /// `R` of each average over `[R, 2R]`.
    pub radii: Vec<f64>,
    pub averages: Vec<AngularVector>,
    /// Aitken extrapolation of the last three averages.
    pub accelerated: Option<AngularVector>,
    /// `‖avg_k − avg_{k−1}‖`.
    pub increments: Vec<f64>,
    pub tolerance: f64,
    pub converged: bool,
}

impl CesaroRecord {
    pub fn best(&self) -> Option<&AngularVector> {
        self.accelerated.as_ref().or(self.averages.last())
    }
}

pub(crate) fn aitken(x: &[AngularVector]) -> Option<AngularVector> {
    if x.len() < 3 {
        return None;
    }
    let (a, b, c) = (&x[x.len() - 3], &x[x.len() - 2], &x[x.len() - 1]);
    let coeffs = (0..c.coeffs.len())
        .map(|i| {
            let d1 = c.coeffs[i] - b.coeffs[i];
            let d0 = b.coeffs[i] - a.coeffs[i];
            let den = d1 - d0;
            if den.norm() <= 1e-14 * (c.coeffs[i].norm() + 1e-300) || d1.norm() > d0.norm() {
                c.coeffs[i]
            } else {
                c.coeffs[i] - d1 * d1 / den
            }
        })
        .collect();
    Some(AngularVector {
        basis: c.basis,
        coeffs,
    })
}

/// `R^{−1}∫_R^{2R} g(f) df` with panels matched to the oscillation.
pub(crate) fn cesaro_average(
    set: &ChannelSet,
    r: f64,
    g: &(dyn Fn(f64) -> Result<AngularVector, Error> + Sync),
) -> Result<AngularVector, Error> {
    let esc = set.spec.escape();
    let s1 = esc.r_of_f(2.0 * r);
    // e^{2iθ} cross terms oscillate with df-wavelength ≈ π/(s^α + λ)
    let rate = s1.powf(set.spec.alpha) + 4.0;
    let panels = ((r * rate / PI).ceil() as usize).clamp(4, 400_000);
    let h = r / panels as f64;
    let rule = GaussLegendre::new(8);
    let parts = (0..panels)
        .into_par_iter()
        .map(|p| -> Result<AngularVector, Error> {
            let a = r + p as f64 * h;
            let mut acc = AngularVector::zeros(set.basis);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let f = a + 0.5 * h * (t + 1.0);
                acc = acc.add(&g(f)?.scale(Complex64::new(0.5 * h * w, 0.0)));
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total = parts.iter().fold(AngularVector::zeros(set.basis), |a, b| a.add(b));
    Ok(total.scale(Complex64::new(1.0 / r, 0.0)))
}

/// Largest `f` whose level stays clear of the truncation layer.
pub(crate) fn f_limit(set: &ChannelSet) -> f64 {
    let l = set.grids.iter().map(|g| g.length()).fold(f64::INFINITY, f64::min);
    set.spec.escape().f(0.9 * l)
}

/// Cesàro averages over `[R, 2R]` on a doubling ladder whose top window
/// ends at the last clear radius and whose bottom is at least `r0`.
pub fn cesaro_table(
    set: &ChannelSet,
    r0: f64,
    tol: f64,
    g: &(dyn Fn(f64) -> Result<AngularVector, Error> + Sync),
) -> Result<CesaroRecord, Error> {
    let top = f_limit(set);
    let mut radii = Vec::new();
    let mut r = 0.5 * top;
    while r >= r0.max(4.0) {
        radii.push(r);
        r *= 0.5;
    }
    radii.reverse();
    if radii.len() < 2 {
        return Err(Error::NoConvergence(format!(
            "grid reaches f = {top:.1}; at least two doubling levels from R = {r0} are needed"
        )));
    }
    let averages = radii
        .iter()
        .map(|&r| cesaro_average(set, r, g))
        .collect::<Result<Vec<_>, _>>()?;
    let increments: Vec<f64> = averages.windows(2).map(|w| w[1].distance(&w[0])).collect();
    let accelerated = aitken(&averages);
    let converged = match (&accelerated, averages.len()) {
        (Some(acc), n) => acc.distance(&averages[n - 1]) <= tol.max(0.0) || increments.last().copied().unwrap_or(f64::INFINITY) <= tol,
        (None, _) => increments.last().copied().unwrap_or(f64::INFINITY) <= tol,
    };
    Ok(CesaroRecord {
        radii,
        averages,
        accelerated,
        increments,
        tolerance: tol,
        converged,
    })
}

/// `𝓕^±(λ)ψ` as the Cesàro limit of shell traces of `u = R(λ ± i0)ψ`.
pub fn cesaro_wave_matrix(
    set: &ChannelSet,
    lambda: f64,
    sign: Sign,
    fields: &[WaveField],
    tol: f64,
) -> Result<(AngularVector, CesaroRecord), Error> {
    let rec = cesaro_table(set, 4.0, tol, &|f| shell_trace(set, lambda, f, sign, fields))?;
    if !rec.converged {
        return Err(Error::NoConvergence(format!(
            "Cesàro averages still move by {:.2e} at R = {} (tolerance {tol:.1e})",
            rec.increments.last().copied().unwrap_or(f64::NAN),
            rec.radii.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let best = rec.best().cloned().expect("at least two levels");
    Ok((best, rec))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub lambda: f64,
    /// `(1/2πi)⟨(R₊ − R₋)ψ, ψ⟩`.
    pub density: Complex64,
    pub plus_norm_sq: f64,
    pub minus_norm_sq: f64,
    pub rel_error_plus: f64,
    pub rel_error_minus: f64,
    /// `|‖𝓕⁺ψ‖ − ‖𝓕⁻ψ‖| / ‖𝓕⁺ψ‖`.
    pub norm_mismatch: f64,
    /// `|Im ρ| / ‖ψ‖²`.
    pub imag_ratio: f64,
    pub plus: AngularVector,
    pub minus: AngularVector,
}

impl ParsevalReport {
    pub fn rel_error(&self) -> f64 {
        self.rel_error_plus.max(self.rel_error_minus)
    }
}

/// Both sides of `(1/2πi)⟨(R₊ − R₋)ψ, ψ⟩ = ‖𝓕^±(λ)ψ‖²` for a compact `ψ`.
pub fn parseval_check(set: &ChannelSet, lambda: f64, psi: &[WaveField]) -> Result<ParsevalReport, Error> {
    let src: Vec<Source> = psi.iter().map(|p| Source::compact(p.clone())).collect();
    let plus = wave_matrix(set, lambda, Sign::Plus, &src)?;
    let minus = wave_matrix(set, lambda, Sign::Minus, &src)?;
    let mut density = Complex64::new(0.0, 0.0);
    let mut psi2 = 0.0;
    for ((p, a), b) in psi.iter().zip(&plus.solves).zip(&minus.solves) {
        density += (p.inner(&a.field) - p.inner(&b.field)) / Complex64::new(0.0, 2.0 * PI);
        psi2 += p.norm().powi(2);
    }
    let np = plus.value.norm().powi(2);
    let nm = minus.value.norm().powi(2);
    let rel = |n: f64| if density.re.abs() > 0.0 { (n - density.re).abs() / density.re.abs() } else { n };
    Ok(ParsevalReport {
        lambda,
        density,
        plus_norm_sq: np,
        minus_norm_sq: nm,
        rel_error_plus: rel(np),
        rel_error_minus: rel(nm),
        norm_mismatch: if np > 0.0 { (np.sqrt() - nm.sqrt()).abs() / np.sqrt() } else { nm.sqrt() },
        imag_ratio: if psi2 > 0.0 { density.im.abs() / psi2 } else { 0.0 },
        plus: plus.value,
        minus: minus.value,
    })
}
