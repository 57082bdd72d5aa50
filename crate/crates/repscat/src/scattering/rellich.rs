//! Evidence, not proof, for the absence of `B₀*` eigenfunctions: inverse
//! iteration at `λ` converges to box quasi-modes whose shell profiles do
//! not decay, and weighted limiting-resolvent norms vary without spikes.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::boundary::BoundaryMode;
use crate::discretization::field::WaveField;
use crate::discretization::grid::ChannelGrid;
use crate::discretization::norms::{shell_norms, weighted_l2};
use crate::numerics::fit::line_fit;
use crate::resolvent::{ResolventSolver, Source, SpectralPoint};
use crate::{Error, Sign};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RellichReport {
    pub lambda: f64,
    pub eps: f64,
    pub seed: u64,
    /// Fitted `log₂` slope of `2^{−n/2}‖F_n u‖` for each converged quasi-mode.
    pub slopes: Vec<f64>,
    /// Every slope exceeds `−slope_tolerance`.
    pub non_decaying: bool,
    pub slope_tolerance: f64,
    /// `(λ, ‖f^{−1}R(λ+i0)ψ‖ / ‖fψ‖)` over the sweep.
    pub sweep: Vec<(f64, f64)>,
    /// Largest ratio of neighbouring sweep values.
    pub max_jump: f64,
    pub note: String,
}

fn profile_slope(u: &WaveField) -> f64 {
    let sn = shell_norms(u);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (1..sn.complete)
        .filter(|n| sn.profile[*n] > 0.0)
        .map(|n| (n as f64, sn.profile[n].log2()))
        .unzip();
    line_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope)
}

/// Inverse iteration from `seeds` random starts plus a resolvent-norm sweep.
pub fn rellich_probe(
    grid: &Arc<ChannelGrid>,
    lambda: f64,
    seeds: usize,
    seed: u64,
    sweep: &[f64],
) -> Result<RellichReport, Error> {
    grid.spec.validate()?;
    let eps = 1e-6;
    let solver = ResolventSolver::new(grid, SpectralPoint::new(lambda, eps, Sign::Plus)?, BoundaryMode::Dirichlet, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<WaveField> = (0..seeds)
        .map(|_| {
            let mut u = WaveField::zeros(grid);
            for v in u.values.iter_mut() {
                *v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
            u
        })
        .collect();
    let slopes = starts
        .into_par_iter()
        .map(|mut u| -> Result<f64, Error> {
            for _ in 0..6 {
                let next = solver.solve(&Source::compact(u.clone()))?.field;
                let n = next.norm();
                u = next.scale(Complex64::new(1.0 / n, 0.0));
            }
            Ok(profile_slope(&u))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let psi = WaveField::from_fn(grid, |x| Complex64::new((-(x.abs() - 3.0).powi(2)).exp(), 0.0));
    let den = weighted_l2(&psi, 1.0);
    let values = sweep
        .par_iter()
        .map(|&l| -> Result<(f64, f64), Error> {
            let u = ResolventSolver::new(grid, SpectralPoint::real(l, Sign::Plus), BoundaryMode::Asymptotic, None)?
                .solve(&Source::compact(psi.clone()))?
                .field;
            Ok((l, weighted_l2(&u, -1.0) / den))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_jump = values
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).max(w[0].1 / w[1].1))
        .fold(1.0, f64::max);
    let slope_tolerance = 0.05;
    Ok(RellichReport {
        lambda,
        eps,
        seed,
        non_decaying: slopes.iter().all(|s| *s > -slope_tolerance),
        slopes,
        slope_tolerance,
        sweep: values,
        max_jump,
        note: "numerical evidence only: finite grids cannot decide B0* membership".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::{Channel, GridConfig};
    use crate::discretization::potential::{PotentialSpec, QProfile};

    fn grid(spec: &PotentialSpec) -> Arc<ChannelGrid> {
        let cfg = GridConfig {
            length: 200.0,
            order: 6,
            points_per_wavelength: 12.0,
            ..GridConfig::default()
        };
        Arc::new(ChannelGrid::new(spec, Channel::Line, cfg).unwrap())
    }

    #[test]
    fn free_case_quasi_modes_do_not_decay() {
        let g = grid(&PotentialSpec::free(1.0, 1));
        let sweep: Vec<f64> = (0..8).map(|k| 0.25 * 1.5f64.powi(k)).collect();
        let rep = rellich_probe(&g, 1.0, 10, 11, &sweep).unwrap();
        assert!(rep.non_decaying, "{:?}", rep.slopes);
        assert!(rep.max_jump < 3.0, "{:?}", rep.sweep);
    }

    #[test]
    fn rejects_long_range_well() {
        let spec = PotentialSpec::with_q(1.0, 1, QProfile::Power { coupling: -50.0, exponent: 0.5 }, 1.0);
        let g = grid(&PotentialSpec::free(1.0, 1));
        let bad = Arc::new(ChannelGrid::new(&spec, Channel::Line, g.config.clone()).unwrap());
        assert!(matches!(rellich_probe(&bad, 1.0, 1, 0, &[]), Err(Error::Validation(_))));
    }
}
