//! Generalized eigenfunctions `φ = 𝓕^±(λ)*v`, their asymptotic data
//! `ξ±`, and the decomposition `φ − φ^+[ξ₊] − φ^−[ξ₋] ∈ B₀*`.
//!
//! Past the cutoff `φ = A_out w₊ + A_in w₋` exactly, so `ξ±` are read off
//! by a least-squares projection onto `w±` over an outer shell:
//! `ξ₊ = √(2π) e^{iπκ/4} A_out(ω)`, `ξ₋ = √(2π) e^{−iπκ/4} A_in(−ω)`.
//! The Cesàro formula with `(A ± a₀)φ` is kept as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::incident::build_incident;
use super::wave::{cesaro_table, f_limit, interpolate, limiting_solves, place, CesaroRecord};
use super::{sides, AngularVector, ChannelSet};
use crate::discretization::asymptotic::Exterior;
use crate::discretization::boundary::{BoundaryMode, Closures};
use crate::discretization::field::{apply_a, WaveField};
use crate::discretization::grid::ChannelGrid;
use crate::discretization::norms::{shell_l2, shell_norms};
use crate::discretization::operator::apply;
use crate::geometry_phase::conjugate::phase_a0;
use crate::geometry_phase::phase::theta;
use crate::numerics::fit::line_fit;
use crate::{Error, Sign};

#[derive(Clone, Debug)]
pub struct EigenfunctionRecord {
    pub lambda: f64,
    /// `φ = 𝓕^σ(λ)*v`.
    pub sign: Sign,
    pub v: AngularVector,
    pub fields: Vec<WaveField>,
    /// `2^{−n/2}‖F_n φ‖` per channel.
    pub profiles: Vec<Vec<f64>>,
    pub b_star: f64,
    /// `‖(H − λ)φ‖ / ‖ψ^σ[v]‖` over `4 ≤ |x| ≤ L/2`.
    pub interior_residual: f64,
    pub xi: Option<XiExtraction>,
    pub remainder_profiles: Option<Vec<Vec<f64>>>,
}

/// `φ_λ^σ[v] − R(λ ∓ i0)ψ_λ^σ[v]`.
pub fn wave_matrix_adjoint(set: &ChannelSet, lambda: f64, sign: Sign, v: &AngularVector) -> Result<EigenfunctionRecord, Error> {
    let inc = build_incident(set, lambda, sign, v)?;
    let solves = limiting_solves(set, lambda, sign.flip(), &inc.sources)?;
    let fields: Vec<WaveField> = inc.phi.iter().zip(&solves).map(|(p, r)| p.sub(&r.field)).collect();
    let z = Complex64::new(lambda, 0.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((g, phi), src) in set.grids.iter().zip(&fields).zip(&inc.sources) {
        let closures = Closures::build(g, z, sign, BoundaryMode::Dirichlet, [None, None], None)?;
        let h = apply(g, z, &closures, &phi.values);
        for k in 0..g.len() {
            let s = g.x(k).abs();
            if (4.0..=0.5 * g.length()).contains(&s) {
                num += h[k].norm_sqr() * g.jac(k);
                den += src.field.values[k].norm_sqr() * g.jac(k);
            }
        }
    }
    let profiles: Vec<Vec<f64>> = fields.iter().map(|f| shell_norms(f).profile).collect();
    let b_star = fields.iter().map(|f| shell_norms(f).b_star).fold(0.0, f64::max);
    Ok(EigenfunctionRecord {
        lambda,
        sign,
        v: v.clone(),
        fields,
        profiles,
        b_star,
        interior_residual: if den > 0.0 { (num / den).sqrt() } else { num.sqrt() },
        xi: None,
        remainder_profiles: None,
    })
}

/// `B*`-size of `φ_λ^σ[v] − R(λ ± i0)ψ_λ^σ[v]` relative to `φ_λ^σ[v]`,
/// which vanishes by Sommerfeld uniqueness.
pub fn sommerfeld_defect(set: &ChannelSet, lambda: f64, sign: Sign, v: &AngularVector) -> Result<f64, Error> {
    let inc = build_incident(set, lambda, sign, v)?;
    let solves = limiting_solves(set, lambda, sign, &inc.sources)?;
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (p, r) in inc.phi.iter().zip(&solves) {
        num = num.max(shell_norms(&p.sub(&r.field)).b_star);
        den = den.max(shell_norms(p).b_star);
    }
    Ok(if den > 0.0 { num / den } else { num })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiExtraction {
    pub xi_plus: AngularVector,
    pub xi_minus: AngularVector,
    /// Outer shell `[R, 2R]` in `f`.
    pub window: (f64, f64),
    /// Relative least-squares residual of the projection.
    pub fit_residual: f64,
    pub samples: usize,
}

/// Exterior basis `w₊` at increasing `s`, propagated by exterior ratios.
fn exterior_samples(grid: &ChannelGrid, lambda: f64, s: &[f64]) -> Result<Vec<Complex64>, Error> {
    let ext = Exterior::new(&grid.spec, grid.centrifugal, Complex64::new(lambda, 0.0), Sign::Plus);
    let mut out = Vec::with_capacity(s.len());
    let mut log_w = ext.log_normalized(s[0])?;
    out.push(log_w.exp());
    for w in s.windows(2) {
        log_w += ext.log_ratio(w[0], w[1]);
        out.push(log_w.exp());
    }
    Ok(out)
}

/// `(A_out, A_in)` of `u = A_out w₊ + A_in w₋` on one side by least squares.
fn project(grid: &ChannelGrid, lambda: f64, u: &WaveField, side: usize, window: (f64, f64), samples: usize) -> Result<(Complex64, Complex64, f64, f64, usize), Error> {
    let esc = grid.spec.escape();
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let x = grid.x(k);
            let on_side = if side == 0 { x < 0.0 } else { x > 0.0 };
            let f = esc.f(x);
            on_side && f >= window.0 && f <= window.1
        })
        .collect();
    if idx.len() < 4 {
        return Err(Error::Validation(format!("window {window:?} holds too few nodes")));
    }
    let step = (idx.len() / samples.max(4)).max(1);
    let mut picked: Vec<usize> = idx.iter().step_by(step).copied().collect();
    picked.sort_by(|a, b| grid.x(*a).abs().total_cmp(&grid.x(*b).abs()));
    let s: Vec<f64> = picked.iter().map(|&k| grid.x(k).abs()).collect();
    let wp = exterior_samples(grid, lambda, &s)?;
    // normal equations for [w₊ w₋][a b]ᵀ ≈ u, with w₋ = conj(w₊)
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut rhs = [Complex64::new(0.0, 0.0); 2];
    for (k, w) in picked.iter().zip(&wp) {
        let cols = [*w, w.conj()];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += cols[i].conj() * cols[j];
            }
            rhs[i] += cols[i].conj() * u.values[*k];
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let a = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
    let b = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det;
    let mut res = 0.0;
    let mut tot = 0.0;
    for (k, w) in picked.iter().zip(&wp) {
        res += (u.values[*k] - a * w - b * w.conj()).norm_sqr();
        tot += u.values[*k].norm_sqr();
    }
    Ok((a, b, res, tot, picked.len()))
}

/// Outermost doubling window `[R, 2R]` clear of the truncation layer.
pub fn default_window(set: &ChannelSet) -> (f64, f64) {
    let top = f_limit(set);
    (0.5 * top, top)
}

/// `ξ±` of a generalized eigenfunction by projection onto `w±` over
/// `window` (defaults to the outermost clear shell).
pub fn extract_asymptotic_xi(set: &ChannelSet, lambda: f64, fields: &[WaveField], window: Option<(f64, f64)>) -> Result<XiExtraction, Error> {
    let window = window.unwrap_or_else(|| default_window(set));
    if window.0 < 4.0 {
        return Err(Error::Validation(format!("window {window:?} reaches into the cutoff region")));
    }
    let per = set
        .grids
        .par_iter()
        .zip(fields)
        .map(|(g, u)| {
            sides(g)
                .iter()
                .map(|(_, side)| project(g, lambda, u, *side, window, 256))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let outs: Vec<Vec<Complex64>> = per.iter().map(|c| c.iter().map(|p| p.0).collect()).collect();
    let ins: Vec<Vec<Complex64>> = per.iter().map(|c| c.iter().map(|p| p.1).collect()).collect();
    let res: f64 = per.iter().flatten().map(|p| p.2).sum();
    let tot: f64 = per.iter().flatten().map(|p| p.3).sum();
    let samples = per.iter().flatten().map(|p| p.4).sum();
    let kappa = set.spec.kappa();
    let cp = Complex64::from_polar((2.0 * PI).sqrt(), PI * kappa / 4.0);
    let cm = Complex64::from_polar((2.0 * PI).sqrt(), -PI * kappa / 4.0);
    Ok(XiExtraction {
        xi_plus: place(set, &outs).scale(cp),
        xi_minus: place(set, &ins).reflect().scale(cm),
        window,
        fit_residual: if tot > 0.0 { (res / tot).sqrt() } else { 0.0 },
        samples,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiCesaro {
    pub plus: CesaroRecord,
    pub minus: CesaroRecord,
}

/// `ξ± = ±½c_± lim R^{−1}∫_R^{2R} r^{(d+α/2−1)/2} e^{∓iθ}(A ± a₀)φ df`, with
/// the `ω ↦ −ω` reflection that makes `φ^−[ξ₋]` consistent.
pub fn extract_xi_cesaro(set: &ChannelSet, lambda: f64, fields: &[WaveField], tol: f64) -> Result<XiCesaro, Error> {
    let spec = &set.spec;
    let esc = spec.escape();
    let kappa = spec.kappa();
    let a_fields: Vec<WaveField> = fields.iter().map(apply_a).collect();
    let integrand = |sg: Sign| {
        let a_fields = &a_fields;
        move |f: f64| -> Result<AngularVector, Error> {
            let s = esc.r_of_f(f);
            let a0 = phase_a0(spec, lambda, s)?;
            let mut per = Vec::new();
            for ((g, u), au) in set.grids.iter().zip(fields).zip(a_fields) {
                let pts = g.order() + 2;
                let row: Vec<Complex64> = sides(g)
                    .iter()
                    .map(|(_, side)| {
                        let x0 = if *side == 0 { -s } else { s };
                        interpolate(g, x0, pts, |k| {
                            let sk = g.x(k).abs();
                            let ph = Complex64::from_polar(sk.powf(0.25 * spec.alpha), -sg.as_f64() * theta(&esc, lambda, sk));
                            ph * (au.values[k] + sg.as_f64() * a0 * u.values[k])
                        })
                    })
                    .collect();
                per.push(row);
            }
            let v = place(set, &per);
            let c = Complex64::from_polar(0.5 * sg.as_f64() * (2.0 * PI).sqrt(), sg.as_f64() * PI * kappa / 4.0);
            Ok(match sg {
                Sign::Plus => v.scale(c),
                Sign::Minus => v.reflect().scale(c),
            })
        }
    };
    let plus_fn = integrand(Sign::Plus);
    let minus_fn = integrand(Sign::Minus);
    let plus = cesaro_table(set, 4.0, tol, &plus_fn)?;
    let minus = cesaro_table(set, 4.0, tol, &minus_fn)?;
    Ok(XiCesaro { plus, minus })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `2^{−n/2}‖F_n(φ − φ^+[ξ₊] − φ^−[ξ₋])‖`, summed over channels.
    pub remainder_profile: Vec<f64>,
    pub remainder_slope: f64,
    /// `2^{−n}∫_{F_n} 2π|φ|²` over complete shells.
    pub shell_averages: Vec<f64>,
    /// Richardson extrapolation of the last two shell averages.
    pub shell_limit: f64,
    /// `‖ξ₊‖² + ‖ξ₋‖²`.
    pub xi_energy: f64,
    pub shell_rel_error: f64,
    /// Relative error of the raw last complete shell.
    pub shell_rel_error_raw: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub norm_mismatch: f64,
}

/// Remainder profile and the norm identities for an extracted record.
pub fn decomposition_check(set: &ChannelSet, record: &EigenfunctionRecord, xi: &XiExtraction) -> Result<DecompositionReport, Error> {
    let lambda = record.lambda;
    let plus = build_incident(set, lambda, Sign::Plus, &xi.xi_plus)?;
    let minus = build_incident(set, lambda, Sign::Minus, &xi.xi_minus)?;
    let g0 = &set.grids[0];
    let shells = g0.shells.shells.len();
    let complete = set.grids.iter().map(|g| g.shells.complete).min().unwrap_or(0);
    let mut rem2 = vec![0.0; shells];
    let mut phi2 = vec![0.0; shells];
    for (((phi, p), m), g) in record.fields.iter().zip(&plus.phi).zip(&minus.phi).zip(&set.grids) {
        let r = phi.sub(p).sub(m);
        for (n, v) in shell_l2(&r).iter().enumerate().take(shells) {
            rem2[n] += v * v;
        }
        for (n, v) in shell_l2(phi).iter().enumerate().take(shells) {
            phi2[n] += v * v;
        }
        debug_assert_eq!(g.shells.shells.len(), shells);
    }
    let remainder_profile: Vec<f64> = rem2.iter().enumerate().map(|(n, v)| 2f64.powf(-0.5 * n as f64) * v.sqrt()).collect();
    let start = 3usize.min(complete.saturating_sub(2));
    let (xs, ys): (Vec<f64>, Vec<f64>) = (start..complete)
        .filter(|n| remainder_profile[*n] > 0.0)
        .map(|n| (n as f64, remainder_profile[n].log2()))
        .unzip();
    let remainder_slope = line_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    let shell_averages: Vec<f64> = (0..complete).map(|n| 2.0 * PI * phi2[n] * 2f64.powi(-(n as i32))).collect();
    let alpha = set.spec.alpha;
    let p = 2.0 * alpha / (2.0 - alpha);
    let shell_limit = match shell_averages.len() {
        0 => 0.0,
        1 => shell_averages[0],
        n => {
            let r = 2f64.powf(p);
            (r * shell_averages[n - 1] - shell_averages[n - 2]) / (r - 1.0)
        }
    };
    let np = xi.xi_plus.norm();
    let nm = xi.xi_minus.norm();
    let xi_energy = np * np + nm * nm;
    let rel = |v: f64| if xi_energy > 0.0 { (v - xi_energy).abs() / xi_energy } else { v.abs() };
    Ok(DecompositionReport {
        remainder_slope,
        remainder_profile,
        shell_rel_error: rel(shell_limit),
        shell_rel_error_raw: rel(shell_averages.last().copied().unwrap_or(0.0)),
        shell_limit,
        shell_averages,
        xi_energy,
        norm_plus: np,
        norm_minus: nm,
        norm_mismatch: if np > 0.0 { (np - nm).abs() / np } else { nm },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::GridConfig;
    use crate::discretization::potential::PotentialSpec;
    use crate::scattering::smatrix::{scattering_matrix, ScatteringOptions};

    fn set(l: f64) -> ChannelSet {
        let cfg = GridConfig {
            length: l,
            order: 8,
            points_per_wavelength: 24.0,
            n_min: 0,
            ..GridConfig::default()
        };
        ChannelSet::new(&PotentialSpec::free(1.0, 1), &cfg, 0).unwrap()
    }

    #[test]
    fn round_trip_and_scattering_relation() {
        let s = set(120.0);
        let v = AngularVector::new(s.basis, vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.9)]).unwrap();
        let rec = wave_matrix_adjoint(&s, 1.0, Sign::Plus, &v).unwrap();
        assert!(rec.interior_residual < 1e-5, "{}", rec.interior_residual);
        let xi = extract_asymptotic_xi(&s, 1.0, &rec.fields, None).unwrap();
        assert!(xi.xi_plus.distance(&v) < 1e-5, "{:?} vs {:?}", xi.xi_plus, v);
        let sm = scattering_matrix(&s, 1.0, &ScatteringOptions::default()).unwrap();
        assert!(sm.apply(&xi.xi_minus).distance(&xi.xi_plus) < 1e-5);
        assert!((xi.xi_plus.norm() - xi.xi_minus.norm()).abs() < 1e-5);
    }

    #[test]
    fn outgoing_probe_has_no_incoming_part() {
        let s = set(400.0);
        let v = AngularVector::new(s.basis, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)]).unwrap();
        let inc = build_incident(&s, 0.5, Sign::Plus, &v).unwrap();
        let xi = extract_xi_cesaro(&s, 0.5, &inc.phi, 1e-3).unwrap();
        assert!(xi.plus.best().unwrap().distance(&v) < 1e-3);
        assert!(xi.minus.best().unwrap().norm() < 1e-3);
    }

    #[test]
    fn zero_field_has_zero_data() {
        let s = set(60.0);
        let rec = wave_matrix_adjoint(&s, 1.0, Sign::Minus, &AngularVector::zeros(s.basis)).unwrap();
        assert!(rec.fields[0].values.iter().all(|v| v.norm() == 0.0));
        let xi = extract_asymptotic_xi(&s, 1.0, &rec.fields, None).unwrap();
        assert_eq!(xi.xi_plus.norm(), 0.0);
        let rep = decomposition_check(&s, &rec, &xi).unwrap();
        assert!(rep.remainder_profile.iter().all(|v| *v == 0.0));
        assert!(rep.shell_averages.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sommerfeld_same_sign_resolvent_annihilates() {
        let s = set(80.0);
        let v = AngularVector::new(s.basis, vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, -0.4)]).unwrap();
        let d = sommerfeld_defect(&s, 1.0, Sign::Plus, &v).unwrap();
        assert!(d < 1e-6, "{d}");
    }
}
