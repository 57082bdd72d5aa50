//! Limiting resolvents by two routes: an `ε`-sequence with Richardson
//! extrapolation, and a direct solve at `ε = 0` with a radiating closure.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExtrapolationRecord, ResolventResult, ResolventSolver, Source, SpectralPoint};
use crate::discretization::boundary::BoundaryMode;
use crate::discretization::field::WaveField;
use crate::discretization::grid::ChannelGrid;
use crate::discretization::norms::weighted_l2;
use crate::geometry_phase::conjugate::PhaseContext;
use crate::numerics::fit::log_log_fit;
use crate::{Error, Sign};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitingOptions {
    pub eps0: f64,
    pub halvings: usize,
    /// Number of Richardson eliminations (`ε`, `ε²`, …).
    pub richardson: usize,
    /// Allowed `‖f^{−1}(u_a − u_b)‖ / ‖f^{−1}u_b‖`.
    pub route_tolerance: f64,
    pub mode: BoundaryMode,
}

impl Default for LimitingOptions {
    fn default() -> Self {
        Self {
            eps0: 0.1,
            halvings: 8,
            richardson: 3,
            route_tolerance: 1e-5,
            mode: BoundaryMode::Asymptotic,
        }
    }
}

/// `‖f^{−s}(R(z_k) − R(z_{k+1}))ψ‖ / ‖f^{s}ψ‖ ≈ C |z_k − z_{k+1}|^ω`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderFit {
    pub s: f64,
    pub steps: Vec<f64>,
    pub quotients: Vec<f64>,
    pub omega: f64,
    pub constant: f64,
}

#[derive(Clone, Debug)]
pub struct LimitingRecord {
    /// Route (b), the reference.
    pub direct: ResolventResult,
    /// Route (a), absent for sources with tails.
    pub extrapolated: Option<WaveField>,
    /// Weighted relative difference of the routes.
    pub discrepancy: Option<f64>,
    pub holder: Option<HolderFit>,
}

impl LimitingRecord {
    pub fn agrees(&self, tol: f64) -> bool {
        self.discrepancy.map_or(true, |d| d <= tol)
    }
}

fn rel_weighted(a: &WaveField, b: &WaveField) -> f64 {
    let den = weighted_l2(b, -1.0);
    let num = weighted_l2(&a.sub(b), -1.0);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Richardson table for `u(ε) = u₀ + u₁ε + …` on `ε_k = ε₀ 2^{−k}`.
fn richardson(
    fields: &[WaveField],
    levels: usize,
) -> (WaveField, Vec<Vec<f64>>) {
    let mut col: Vec<WaveField> = fields.to_vec();
    let mut table = Vec::new();
    for j in 1..=levels.min(fields.len().saturating_sub(1)) {
        let fac = 2f64.powi(j as i32) - 1.0;
        let next: Vec<WaveField> = col
            .windows(2)
            .map(|w| {
                let d = w[1].sub(&w[0]);
                w[1].add(&d.scale((1.0 / fac).into()))
            })
            .collect();
        table.push(col.windows(2).map(|w| rel_weighted(&w[1], &w[0])).collect());
        col = next;
    }
    table.push(col.windows(2).map(|w| rel_weighted(&w[1], &w[0])).collect());
    (col.last().expect("non-empty sequence").clone(), table)
}

/// Both routes and the Hölder fit, without judging their agreement.
pub fn limiting_routes(
    grid: &Arc<ChannelGrid>,
    lambda: f64,
    sign: Sign,
    src: &Source,
    ctx: Option<&PhaseContext>,
    opts: &LimitingOptions,
) -> Result<LimitingRecord, Error> {
    let direct_solver = ResolventSolver::new(grid, SpectralPoint::real(lambda, sign), opts.mode, ctx)?;
    let mut direct = direct_solver.solve(src)?;
    if src.has_tails() {
        return Ok(LimitingRecord {
            direct,
            extrapolated: None,
            discrepancy: None,
            holder: None,
        });
    }
    let eps: Vec<f64> = (0..=opts.halvings).map(|k| opts.eps0 * 0.5f64.powi(k as i32)).collect();
    let fields = eps
        .par_iter()
        .map(|&e| {
            let p = SpectralPoint::new(lambda, e, sign)?;
            Ok(ResolventSolver::new(grid, p, BoundaryMode::Asymptotic, ctx)?.solve(src)?.field)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let (extrapolated, table) = richardson(&fields, opts.richardson);
    let discrepancy = rel_weighted(&extrapolated, &direct.field);
    let holder = holder_fit(&fields, &eps, &src.field, 1.0);
    direct.extrapolation = Some(ExtrapolationRecord { eps, table });
    Ok(LimitingRecord {
        direct,
        extrapolated: Some(extrapolated),
        discrepancy: Some(discrepancy),
        holder,
    })
}

/// `R(λ ± i0)ψ`; fails when the routes disagree beyond tolerance.
pub fn limiting_resolvent(
    grid: &Arc<ChannelGrid>,
    lambda: f64,
    sign: Sign,
    src: &Source,
    ctx: Option<&PhaseContext>,
    opts: &LimitingOptions,
) -> Result<LimitingRecord, Error> {
    let rec = limiting_routes(grid, lambda, sign, src, ctx, opts)?;
    if !rec.agrees(opts.route_tolerance) {
        return Err(Error::NoConvergence(format!(
            "limiting-resolvent routes differ by {:.3e} (tolerance {:.1e})",
            rec.discrepancy.unwrap_or(f64::NAN),
            opts.route_tolerance
        )));
    }
    Ok(rec)
}

/// Fits the Hölder exponent over successive members of an `ε`-sequence.
pub fn holder_fit(fields: &[WaveField], eps: &[f64], psi: &WaveField, s: f64) -> Option<HolderFit> {
    let den = weighted_l2(psi, s);
    if den == 0.0 || fields.len() < 3 {
        return None;
    }
    let steps: Vec<f64> = eps.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let quotients: Vec<f64> = fields
        .windows(2)
        .map(|w| weighted_l2(&w[0].sub(&w[1]), -s) / den)
        .collect();
    let fit = log_log_fit(&steps, &quotients)?;
    Some(HolderFit {
        s,
        steps,
        quotients,
        omega: fit.slope,
        constant: fit.intercept.exp(),
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::discretization::grid::{Channel, GridConfig};
    use crate::discretization::potential::PotentialSpec;

    #[test]
    fn richardson_is_exact_on_quadratics() {
        let cfg = GridConfig {
            length: 8.0,
            n_min: 0,
            points_per_wavelength: 4.0,
            ..GridConfig::default()
        };
        let g = Arc::new(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).unwrap());
        let base = WaveField::from_fn(&g, |x| Complex64::new(x.cos(), x.sin()));
        let slope = WaveField::from_fn(&g, |x| Complex64::new(1.0 + x * x, 0.0));
        let curve = WaveField::from_fn(&g, |x| Complex64::new(0.0, x));
        let fields: Vec<WaveField> = (0..5)
            .map(|k| {
                let e = 0.1 * 0.5f64.powi(k);
                base.add(&slope.scale(e.into())).add(&curve.scale((e * e).into()))
            })
            .collect();
        let (r, _) = richardson(&fields, 2);
        assert!(rel_weighted(&r, &base) < 1e-13);
    }
}
