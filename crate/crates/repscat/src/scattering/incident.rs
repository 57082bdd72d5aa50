//! Approximate generalized eigenfunctions `φ_λ^±[v]` and their sources
//! `ψ_λ^±[v] = (H − λ)φ_λ^±[v]`.
//!
//! In a reduced channel `φ^σ[v] = b χ̄(s) s^{−α/4} e^{iσθ}` on each side,
//! where `χ̄(s) = 1 − χ(s/2)` removes the origin and
//! `b = (2π)^{−1/2} e^{−iσπκ/4} v(σω)`. Past `s = 4` the source is the
//! closed form `b s^{−α/4} e^{iσθ} G(s)` with
//! `G = ½λ²s^{−α} + q + iσ(αλ/2)s^{−α/2−1} + (c/2 − α²/32 − α/8)s^{−2}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{sides, AngularVector, ChannelSet};
use crate::discretization::asymptotic::Exterior;
use crate::discretization::boundary::{BoundaryMode, Closures};
use crate::discretization::field::WaveField;
use crate::discretization::grid::ChannelGrid;
use crate::discretization::norms::shell_norms;
use crate::discretization::operator::apply;
use crate::geometry_phase::cutoff::chi_jet;
use crate::geometry_phase::phase::{theta, theta_s};
use crate::numerics::fit::line_fit;
use crate::numerics::jet::RJet;
use crate::resolvent::{Source, TailFn};
use crate::{Error, Sign};

/// `(2π)^{−1/2} e^{−iσπκ/4}`.
pub fn incident_constant(kappa: f64, sign: Sign) -> Complex64 {
    Complex64::from_polar((2.0 * PI).powf(-0.5), -sign.as_f64() * PI * kappa / 4.0)
}

/// `b` per channel and side, in the order of [`sides`].
pub fn side_amplitudes(set: &ChannelSet, lambda_sign: Sign, v: &AngularVector) -> Vec<Vec<Complex64>> {
    let c = incident_constant(set.spec.kappa(), lambda_sign);
    let w = match lambda_sign {
        Sign::Plus => v.coeffs.clone(),
        Sign::Minus => v.reflect().coeffs,
    };
    set.grids
        .iter()
        .enumerate()
        .map(|(ch, g)| {
            let slots = set.slots(ch);
            sides(g).iter().map(|(slot, _)| c * w[slots[*slot]]).collect()
        })
        .collect()
}

/// `s^{−α/4} e^{iσθ}` and its `s`-derivative for `s ≥ 2`.
fn leading(grid: &ChannelGrid, lambda: f64, sign: Sign, s: f64) -> (Complex64, Complex64) {
    let esc = grid.spec.escape();
    let a = grid.spec.alpha;
    let sg = sign.as_f64();
    let u0 = Complex64::from_polar(s.powf(-0.25 * a), sg * theta(&esc, lambda, s));
    let du = u0 * Complex64::new(-0.25 * a / s, sg * theta_s(&esc, lambda, s));
    (u0, du)
}

/// `G(s) = (H − λ)[s^{−α/4}e^{iσθ}] / (s^{−α/4}e^{iσθ})` for `s ≥ 2`.
pub fn source_ratio(grid: &ChannelGrid, lambda: f64, sign: Sign, s: f64) -> Complex64 {
    let a = grid.spec.alpha;
    let c = grid.centrifugal;
    let re = 0.5 * lambda * lambda * s.powf(-a)
        + grid.spec.q(s)
        + (0.5 * c - a * a / 32.0 - a / 8.0) / (s * s);
    Complex64::new(re, sign.as_f64() * 0.5 * a * lambda * s.powf(-0.5 * a - 1.0))
}

/// `(χ̄, χ̄′, χ̄″)` at `s`.
fn cutoff(s: f64) -> (f64, f64, f64) {
    let j = chi_jet(RJet::<3>::variable(s).scale(0.5));
    (1.0 - j.c[0], -j.c[1], -2.0 * j.c[2])
}

/// `(φ, ψ)` per unit amplitude at `s`.
fn profile(grid: &ChannelGrid, lambda: f64, sign: Sign, s: f64) -> (Complex64, Complex64) {
    let (cb, cb1, cb2) = cutoff(s);
    if cb == 0.0 && cb1 == 0.0 && cb2 == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let (u0, du) = leading(grid, lambda, sign, s);
    let g = u0 * source_ratio(grid, lambda, sign, s);
    (cb * u0, cb * g - 0.5 * cb2 * u0 - cb1 * du)
}

/// Particular exterior solution `P = b(s^{−α/4}e^{iσθ} − w_σ)` of
/// `(H − λ)P = ψ^σ` on `s ≥ 4`; it decays relative to `s^{−α/4}`.
pub fn tail_fn(grid: &ChannelGrid, lambda: f64, sign: Sign, b: Complex64) -> TailFn {
    let g = grid.clone();
    let ext = Exterior::new(&grid.spec, grid.centrifugal, Complex64::new(lambda, 0.0), sign);
    Arc::new(move |s: f64| {
        if s < 4.0 {
            return Err(Error::Validation(format!("tail requested inside the cutoff region at s = {s}")));
        }
        let (u0, _) = leading(&g, lambda, sign, s);
        Ok(b * (u0 - ext.normalized(s)?))
    })
}

#[derive(Clone)]
pub struct Incident {
    pub lambda: f64,
    pub sign: Sign,
    /// `φ^σ[v]` per channel.
    pub phi: Vec<WaveField>,
    /// Closed-form `ψ^σ[v]` per channel, with exterior tails.
    pub sources: Vec<Source>,
    /// `b` per channel and side.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// `max |H_h φ − ψ| / max |ψ|` over `s ≤ 0.9 L`.
    pub discrete_mismatch: f64,
    /// `2^{n/2}‖F_n ψ‖`, the summands of `‖ψ‖_B`, per channel.
    pub b_summands: Vec<Vec<f64>>,
    /// Fitted `log₂` slope of the summands beyond the cutoff shells.
    pub b_decay: f64,
}

fn channel_fields(grid: &Arc<ChannelGrid>, lambda: f64, sign: Sign, amps: &[Complex64]) -> (WaveField, WaveField) {
    let side_amp = |x: f64| -> Complex64 {
        let side = if x < 0.0 { 0 } else { 1 };
        sides(grid)
            .iter()
            .zip(amps)
            .find(|((_, sd), _)| *sd == side)
            .map(|(_, b)| *b)
            .unwrap_or(Complex64::new(0.0, 0.0))
    };
    let mut phi = WaveField::zeros(grid);
    let mut psi = WaveField::zeros(grid);
    for k in 0..grid.len() {
        let x = grid.x(k);
        let b = side_amp(x);
        if b == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (p, q) = profile(grid, lambda, sign, x.abs());
        phi.values[k] = b * p;
        psi.values[k] = b * q;
    }
    (phi, psi)
}

/// `φ_λ^σ[v]` and `ψ_λ^σ[v]` on every channel, with the discrete-`H`
/// cross-check of the closed form.
pub fn build_incident(set: &ChannelSet, lambda: f64, sign: Sign, v: &AngularVector) -> Result<Incident, Error> {
    if v.basis != set.basis {
        return Err(Error::Validation("angular vector basis does not match the channel set".into()));
    }
    for g in &set.grids {
        if g.length() < 8.0 {
            return Err(Error::Validation(format!("truncation radius {} too short for the cutoff", g.length())));
        }
    }
    let amplitudes = side_amplitudes(set, sign, v);
    let per_channel: Vec<_> = set
        .grids
        .par_iter()
        .zip(&amplitudes)
        .map(|(g, amps)| -> Result<_, Error> {
            let (phi, psi) = channel_fields(g, lambda, sign, amps);
            let z = Complex64::new(lambda, 0.0);
            let closures = Closures::build(g, z, sign, BoundaryMode::Dirichlet, [None, None], None)?;
            let h_phi = apply(g, z, &closures, &phi.values);
            let cap = 0.9 * g.length();
            let mut num: f64 = 0.0;
            let mut den: f64 = 0.0;
            for k in 0..g.len() {
                if g.x(k).abs() <= cap {
                    num = num.max((h_phi[k] - psi.values[k]).norm());
                    den = den.max(psi.values[k].norm());
                }
            }
            let mismatch = if den > 0.0 { num / den } else { num };
            let mut tails: [Option<TailFn>; 2] = [None, None];
            for ((_, side), b) in sides(g).iter().zip(amps) {
                if *b != Complex64::new(0.0, 0.0) {
                    tails[*side] = Some(tail_fn(g, lambda, sign, *b));
                }
            }
            let summands: Vec<f64> = shell_norms(&psi)
                .shell_l2
                .iter()
                .enumerate()
                .map(|(n, v)| 2f64.powf(0.5 * n as f64) * v)
                .collect();
            Ok((phi, Source { field: psi, tails }, mismatch, summands))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut phi = Vec::new();
    let mut sources = Vec::new();
    let mut discrete_mismatch: f64 = 0.0;
    let mut b_summands = Vec::new();
    for (p, s, m, b) in per_channel {
        phi.push(p);
        sources.push(s);
        discrete_mismatch = discrete_mismatch.max(m);
        b_summands.push(b);
    }
    let b_decay = summand_decay(&set.grids[0], &b_summands[0]);
    Ok(Incident {
        lambda,
        sign,
        phi,
        sources,
        amplitudes,
        discrete_mismatch,
        b_summands,
        b_decay,
    })
}

fn summand_decay(grid: &ChannelGrid, summands: &[f64]) -> f64 {
    let start = 3usize;
    let complete = grid.shells.complete.min(summands.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = (start..complete)
        .filter(|n| summands[*n] > 0.0)
        .map(|n| (n as f64, summands[n].log2()))
        .unzip();
    line_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope)
}
