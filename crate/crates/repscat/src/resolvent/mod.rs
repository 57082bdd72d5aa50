//! Resolvent solves `R(z)ψ` and the limiting resolvents `R(λ ± i0)ψ`.

pub mod diagnostics;
pub mod limiting;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::asymptotic::Exterior;
use crate::discretization::boundary::{BoundaryMode, Closures, TailData};
use crate::discretization::field::WaveField;
use crate::discretization::grid::ChannelGrid;
use crate::discretization::operator::{assemble, boundary_shift, scaled_rhs};
use crate::geometry_phase::conjugate::PhaseContext;
use crate::numerics::banded::{BandLu, BandMatrix};
use crate::{Error, Sign};

pub use diagnostics::{lap_diagnostic, radiation_diagnostic, spectral_density, LapReport, RadiationReport};
pub use limiting::{limiting_resolvent, limiting_routes, HolderFit, LimitingOptions, LimitingRecord};

/// `z = λ + iσε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub eps: f64,
    pub sign: Sign,
}

impl SpectralPoint {
    pub fn new(lambda: f64, eps: f64, sign: Sign) -> Result<Self, Error> {
        if !lambda.is_finite() || !(0.0..1.0).contains(&eps) {
            return Err(Error::Validation(format!(
                "spectral point needs finite λ and ε in [0, 1), got λ = {lambda}, ε = {eps}"
            )));
        }
        Ok(Self { lambda, eps, sign })
    }

    pub fn real(lambda: f64, sign: Sign) -> Self {
        Self {
            lambda,
            eps: 0.0,
            sign,
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.lambda, self.sign.as_f64() * self.eps)
    }
}

/// A particular exterior solution of `(H − λ)P = ψ` as a function of `|x|`.
pub type TailFn = Arc<dyn Fn(f64) -> Result<Complex64, Error> + Send + Sync>;

/// Right-hand side on the grid, with optional tails `[x < 0, x > 0]` for
/// sources extending past `L`.
#[derive(Clone)]
pub struct Source {
    pub field: WaveField,
    pub tails: [Option<TailFn>; 2],
}

impl Source {
    pub fn compact(field: WaveField) -> Self {
        Self {
            field,
            tails: [None, None],
        }
    }

    pub fn has_tails(&self) -> bool {
        self.tails.iter().any(|t| t.is_some())
    }

    pub fn conj(&self) -> Result<Self, Error> {
        if self.has_tails() {
            return Err(Error::Validation("conjugating a source with tails is not supported".into()));
        }
        Ok(Self::compact(self.field.conj()))
    }

    /// Tail values at the end node and ghosts of side `side` (0 left, 1 right).
    fn tail_data(&self, grid: &ChannelGrid, side: usize) -> Result<Option<TailData>, Error> {
        let Some(t) = &self.tails[side] else {
            return Ok(None);
        };
        let n = grid.n as i64;
        let s = |i: i64| grid.node(i).x.abs();
        let ghosts = (1..=grid.ghosts() as i64)
            .map(|g| t(s(n + g)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(TailData { end: t(s(n))?, ghosts }))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExtrapolationRecord {
    pub eps: Vec<f64>,
    /// Weighted norm of successive differences in each Richardson column.
    pub table: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ResolventResult {
    pub field: WaveField,
    pub point: SpectralPoint,
    /// `‖M v − b‖ / ‖b‖` of the banded system.
    pub solver_residual: f64,
    /// Relative mismatch of the discrete and exterior log-derivatives of
    /// `u − P` at each end.
    pub boundary_residual: f64,
    /// Tail values `P` at the end nodes `[left, right]`.
    pub tail_end: [Complex64; 2],
    pub extrapolation: Option<ExtrapolationRecord>,
}

impl ResolventResult {
    /// The solution for a vanishing source.
    pub fn zero(like: &WaveField, point: SpectralPoint) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            field: like.with_values(vec![zero; like.len()]),
            point,
            solver_residual: 0.0,
            boundary_residual: 0.0,
            tail_end: [zero; 2],
            extrapolation: None,
        }
    }
}

/// Factorized `H − z` for one channel, reused across right-hand sides.
pub struct ResolventSolver {
    pub grid: Arc<ChannelGrid>,
    pub point: SpectralPoint,
    pub mode: BoundaryMode,
    closures: Closures,
    matrix: BandMatrix,
    lu: BandLu,
}

impl ResolventSolver {
    pub fn new(
        grid: &Arc<ChannelGrid>,
        point: SpectralPoint,
        mode: BoundaryMode,
        ctx: Option<&PhaseContext>,
    ) -> Result<Self, Error> {
        let z = point.z();
        let self_adjoint = matches!(mode, BoundaryMode::Dirichlet);
        if point.eps == 0.0 && self_adjoint {
            return Err(Error::Validation(
                "a real energy needs a radiating or absorbing boundary".into(),
            ));
        }
        let closures = Closures::build(grid, z, point.sign, mode, [None, None], ctx)?;
        let (matrix, _) = assemble(grid, z, &closures);
        let lu = matrix.clone().factor()?;
        Ok(Self {
            grid: grid.clone(),
            point,
            mode,
            closures,
            matrix,
            lu,
        })
    }

    pub fn solve(&self, src: &Source) -> Result<ResolventResult, Error> {
        let g = &self.grid;
        if g.len() != src.field.len() {
            return Err(Error::Validation("source lives on a different grid".into()));
        }
        if src.has_tails() && self.point.eps != 0.0 {
            return Err(Error::Validation(
                "sources extending past L are only supported at real energies".into(),
            ));
        }
        let left = if g.is_line() { src.tail_data(g, 0)? } else { None };
        let right = src.tail_data(g, 1)?;
        let closures = if src.has_tails() {
            self.closures.with_tails(g, [left.as_ref(), right.as_ref()])?
        } else {
            self.closures.clone()
        };
        let shift = boundary_shift(g, &closures);
        let rhs = scaled_rhs(g, &src.field.values, &shift);
        let v = self.lu.solve(&rhs);
        let mv = self.matrix.matvec(&v);
        let num: f64 = mv.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = rhs.iter().map(|b| b.norm_sqr()).sum();
        let solver_residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        if !solver_residual.is_finite() {
            return Err(Error::Numerical("banded solve produced non-finite values".into()));
        }
        let field = src.field.with_values(g.from_v(&v));
        let zero = Complex64::new(0.0, 0.0);
        let tail_end = [
            left.as_ref().map(|t| t.end).unwrap_or(zero),
            right.as_ref().map(|t| t.end).unwrap_or(zero),
        ];
        let boundary_residual = self.boundary_residual(&field, src)?;
        Ok(ResolventResult {
            field,
            point: self.point,
            solver_residual,
            boundary_residual,
            tail_end,
            extrapolation: None,
        })
    }

    /// Mismatch of `u − P` near each end with the exterior solution through
    /// the end value, relative to that value.
    fn boundary_residual(&self, u: &WaveField, src: &Source) -> Result<f64, Error> {
        let g = &self.grid;
        let sides: &[usize] = if g.is_line() { &[0, 1] } else { &[1] };
        let scale = u.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let radiating = matches!(self.mode, BoundaryMode::Asymptotic | BoundaryMode::DefaultPhase);
        let ext = Exterior::new(&g.spec, g.centrifugal, self.point.z(), self.point.sign);
        let n = g.n as i64;
        let mut worst: f64 = 0.0;
        for &side in sides {
            let dir = if side == 0 { -1 } else { 1 };
            let hom = |i: i64| -> Result<Complex64, Error> {
                let k = g.unknown(dir * i).expect("end nodes are unknowns");
                let p = match &src.tails[side] {
                    Some(t) => t(g.x(k).abs())?,
                    None => Complex64::new(0.0, 0.0),
                };
                Ok(u.values[k] - p)
            };
            let end = hom(n)?;
            if !radiating {
                if scale > 0.0 {
                    worst = worst.max(end.norm() / scale);
                }
                continue;
            }
            if end.norm() <= 1e-300 {
                continue;
            }
            let xn = g.node(n).x;
            for j in 1..=g.ghosts() as i64 {
                let xj = g.node(n - j).x;
                let predicted = end * ext.log_ratio(xn, xj).exp();
                worst = worst.max((hom(n - j)? - predicted).norm() / end.norm());
            }
        }
        Ok(worst)
    }
}

/// Single solve of `(H − z)u = ψ`.
pub fn solve_resolvent(
    grid: &Arc<ChannelGrid>,
    point: SpectralPoint,
    src: &Source,
    mode: BoundaryMode,
    ctx: Option<&PhaseContext>,
) -> Result<ResolventResult, Error> {
    ResolventSolver::new(grid, point, mode, ctx)?.solve(src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::{Channel, GridConfig};
    use crate::discretization::operator::apply;
    use crate::discretization::potential::PotentialSpec;

    fn grid(l: f64) -> Arc<ChannelGrid> {
        let cfg = GridConfig {
            length: l,
            order: 6,
            points_per_wavelength: 20.0,
            n_min: 0,
            ..GridConfig::default()
        };
        Arc::new(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).unwrap())
    }

    fn bump(g: &Arc<ChannelGrid>) -> WaveField {
        WaveField::from_fn(g, |x| Complex64::new((-(x - 3.0).powi(2)).exp(), 0.5 * (-(x + 2.0).powi(2)).exp()))
    }

    #[test]
    fn defining_residual_is_tiny() {
        let g = grid(60.0);
        let psi = bump(&g);
        let p = SpectralPoint::new(1.0, 0.0, Sign::Plus).unwrap();
        let r = solve_resolvent(&g, p, &Source::compact(psi.clone()), BoundaryMode::Asymptotic, None).unwrap();
        assert!(r.solver_residual < 1e-10, "{}", r.solver_residual);
        let c = Closures::build(&g, p.z(), p.sign, BoundaryMode::Asymptotic, [None, None], None).unwrap();
        let hu = psi.with_values(apply(&g, p.z(), &c, &r.field.values));
        // unscaling by J^{-3/2} near the origin amplifies rounding
        let err = hu.sub(&psi).norm() / psi.norm();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn self_adjoint_truncation_obeys_spectral_bound() {
        let g = grid(40.0);
        let psi = bump(&g);
        for &eps in &[0.5, 0.1, 0.02] {
            let p = SpectralPoint::new(0.7, eps, Sign::Minus).unwrap();
            let r = solve_resolvent(&g, p, &Source::compact(psi.clone()), BoundaryMode::Dirichlet, None).unwrap();
            assert!(r.field.norm() <= psi.norm() / eps * (1.0 + 1e-12));
        }
    }

    #[test]
    fn outgoing_boundary_residual_is_small() {
        let g = grid(80.0);
        let p = SpectralPoint::real(1.0, Sign::Plus);
        let r = solve_resolvent(&g, p, &Source::compact(bump(&g)), BoundaryMode::Asymptotic, None).unwrap();
        assert!(r.boundary_residual < 1e-6, "{}", r.boundary_residual);
    }

    #[test]
    fn rejects_real_energy_with_reflecting_wall() {
        let g = grid(20.0);
        let p = SpectralPoint::real(1.0, Sign::Plus);
        assert!(matches!(
            ResolventSolver::new(&g, p, BoundaryMode::Dirichlet, None),
            Err(Error::Validation(_))
        ));
        assert!(SpectralPoint::new(1.0, 1.5, Sign::Plus).is_err());
    }
}
