//! Limiting-absorption bounds, radiation-condition profiles and the
//! spectral-density pre-check.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ResolventSolver, Source, SpectralPoint};
use crate::discretization::boundary::BoundaryMode;
use crate::discretization::field::{apply_a, apply_pf, WaveField};
use crate::discretization::grid::{Channel, ChannelGrid};
use crate::discretization::norms::shell_norms;
use crate::geometry_phase::conjugate::{phase_a, PhaseContext};
use crate::numerics::fit::line_fit;
use crate::{Error, Sign};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LapReport {
    pub lambda: f64,
    pub eps: Vec<f64>,
    /// Per `ε`: `‖Rψ‖_{B*}`, `‖p^f Rψ‖_{B*}`, `⟨p f^{−1}ℓ p⟩^{1/2}` and
    /// `‖r^{−α}p² Rψ‖_{B*}`, each over `‖ψ‖_B`.
    pub quotients: Vec<[f64; 4]>,
    pub sup: [f64; 4],
    /// Relative change of each quotient over the last step.
    pub last_change: [f64; 4],
}

impl LapReport {
    pub fn stable(&self, tol: f64) -> bool {
        self.last_change.iter().all(|c| *c <= tol) && self.sup.iter().all(|v| v.is_finite())
    }
}

/// The four weighted quotients for `u = R(z)ψ`.
pub fn lap_quotients(u: &WaveField, psi: &WaveField) -> [f64; 4] {
    let g = &u.grid;
    let b = shell_norms(psi).b;
    let esc = g.spec.escape();
    let alpha = g.spec.alpha;
    let q1 = shell_norms(u).b_star;
    let q2 = shell_norms(&apply_pf(u)).b_star;
    let q3 = match g.channel {
        Channel::Line => 0.0,
        Channel::Radial { ell } => {
            let ang = ell as f64 * (ell as f64 + g.spec.dim as f64 - 2.0);
            (0..g.len())
                .map(|k| {
                    let x = g.x(k);
                    let fs = esc.f_s(x);
                    u.values[k].norm_sqr() * fs * fs * ang / (x * x) / esc.f(x) * g.jac(k)
                })
                .sum::<f64>()
                .sqrt()
        }
    };
    let upp = u.second_derivative();
    let p2 = u.map_x(|_, _| Complex64::new(0.0, 0.0));
    let p2 = p2.with_values(
        (0..g.len())
            .map(|k| {
                let x = g.x(k);
                let lap = -upp.values[k] + g.centrifugal / (x * x) * u.values[k];
                lap * esc.r(x).powf(-alpha)
            })
            .collect(),
    );
    let q4 = shell_norms(&p2).b_star;
    [q1 / b, q2 / b, q3 / b, q4 / b]
}

/// Tabulates the quotients at `z = λ + iε` as `ε` decreases.
pub fn lap_diagnostic(
    grid: &Arc<ChannelGrid>,
    lambda: f64,
    src: &Source,
    eps: &[f64],
) -> Result<LapReport, Error> {
    let quotients = eps
        .par_iter()
        .map(|&e| {
            let p = SpectralPoint::new(lambda, e, Sign::Plus)?;
            let u = ResolventSolver::new(grid, p, BoundaryMode::Asymptotic, None)?.solve(src)?;
            Ok(lap_quotients(&u.field, &src.field))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut sup = [0.0f64; 4];
    for q in &quotients {
        for i in 0..4 {
            sup[i] = sup[i].max(q[i]);
        }
    }
    let mut last_change = [0.0; 4];
    if quotients.len() >= 2 {
        let a = quotients[quotients.len() - 2];
        let b = quotients[quotients.len() - 1];
        for i in 0..4 {
            let scale = a[i].abs().max(b[i].abs());
            last_change[i] = if scale > 0.0 { (a[i] - b[i]).abs() / scale } else { 0.0 };
        }
    }
    Ok(LapReport {
        lambda,
        eps: eps.to_vec(),
        quotients,
        sup,
        last_change,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiationReport {
    pub beta: f64,
    /// `2^{−n/2}‖F_n f^β (A ∓ a_±) u‖` over complete shells.
    pub correct: Vec<f64>,
    /// Same with the opposite sign of `a`.
    pub wrong: Vec<f64>,
    pub correct_slope: f64,
    pub wrong_slope: f64,
    /// `wrong / correct` in the last complete shell.
    pub final_ratio: f64,
}

/// Shell profiles of the radiation condition for `u = R(λ ± i0)ψ`.
pub fn radiation_profile(
    u: &WaveField,
    ctx: &PhaseContext,
    lambda: f64,
    sign: Sign,
    beta: f64,
) -> Result<RadiationReport, Error> {
    let g = &u.grid;
    let esc = g.spec.escape();
    let au = apply_a(u);
    let z = Complex64::new(lambda, 0.0);
    let mut a_vals = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        a_vals.push(phase_a(ctx, z, g.x(k).abs(), sign)?);
    }
    let weighted = |s: f64| {
        u.with_values(
            (0..g.len())
                .map(|k| esc.f(g.x(k)).powf(beta) * (au.values[k] - s * a_vals[k] * u.values[k]))
                .collect(),
        )
    };
    let complete = g.shells.complete;
    let sg = sign.as_f64();
    let correct: Vec<f64> = shell_norms(&weighted(sg)).profile.into_iter().take(complete).collect();
    let wrong: Vec<f64> = shell_norms(&weighted(-sg)).profile.into_iter().take(complete).collect();
    let slope = |p: &[f64]| {
        let start = ctx.m as usize + 1;
        let (xs, ys): (Vec<f64>, Vec<f64>) = p
            .iter()
            .enumerate()
            .skip(start.min(p.len().saturating_sub(2)))
            .filter(|(_, v)| **v > 0.0)
            .map(|(n, v)| (n as f64, v.log2()))
            .unzip();
        line_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope)
    };
    let last = complete.saturating_sub(1);
    let final_ratio = match (wrong.get(last), correct.get(last)) {
        (Some(w), Some(c)) if *c > 0.0 => w / c,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => f64::NAN,
    };
    Ok(RadiationReport {
        beta,
        correct_slope: slope(&correct),
        wrong_slope: slope(&wrong),
        correct,
        wrong,
        final_ratio,
    })
}

/// Solves `R(λ ± i0)ψ` and reports its radiation profiles.
pub fn radiation_diagnostic(
    grid: &Arc<ChannelGrid>,
    ctx: &PhaseContext,
    lambda: f64,
    sign: Sign,
    src: &Source,
    beta: f64,
) -> Result<RadiationReport, Error> {
    if !(0.0..ctx.beta_c()).contains(&beta) {
        return Err(Error::Validation(format!(
            "β = {beta} must lie in [0, β_c) = [0, {})",
            ctx.beta_c()
        )));
    }
    let u = ResolventSolver::new(grid, SpectralPoint::real(lambda, sign), BoundaryMode::Asymptotic, Some(ctx))?
        .solve(src)?;
    radiation_profile(&u.field, ctx, lambda, sign, beta)
}

/// `(1/2πi)⟨(R(λ+i0) − R(λ−i0))ψ, ψ⟩` from the two limiting solves.
pub fn spectral_density(plus: &WaveField, minus: &WaveField, psi: &WaveField) -> Complex64 {
    (psi.inner(plus) - psi.inner(minus)) / Complex64::new(0.0, 2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::GridConfig;
    use crate::discretization::potential::PotentialSpec;

    fn grid() -> Arc<ChannelGrid> {
        let cfg = GridConfig {
            length: 100.0,
            order: 6,
            points_per_wavelength: 16.0,
            n_min: 0,
            ..GridConfig::default()
        };
        Arc::new(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).unwrap())
    }

    #[test]
    fn line_has_no_angular_quotient() {
        let g = grid();
        let psi = WaveField::from_fn(&g, |x| Complex64::new((-(x - 6.0).powi(2)).exp(), 0.0));
        let rep = lap_diagnostic(&g, 1.0, &Source::compact(psi), &[0.1, 0.01]).unwrap();
        assert!(rep.quotients.iter().all(|q| q[2] == 0.0));
        assert!(rep.sup.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn spectral_density_is_real_and_positive() {
        let g = grid();
        let psi = WaveField::from_fn(&g, |x| Complex64::new((-(x - 2.0).powi(2)).exp(), 0.3 * (-x * x).exp()));
        let src = Source::compact(psi.clone());
        let solve = |s| {
            ResolventSolver::new(&g, SpectralPoint::real(0.8, s), BoundaryMode::Asymptotic, None)
                .unwrap()
                .solve(&src)
                .unwrap()
                .field
        };
        let rho = spectral_density(&solve(Sign::Plus), &solve(Sign::Minus), &psi);
        let n2 = psi.norm().powi(2);
        assert!(rho.im.abs() <= 1e-8 * n2, "{rho}");
        assert!(rho.re > 0.0);
    }
}
