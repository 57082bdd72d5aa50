//! Ghost-node closures at the truncation radius.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::asymptotic::Exterior;
use super::grid::ChannelGrid;
use crate::geometry_phase::conjugate::{phase_a, PhaseContext};
use crate::{Error, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Ghosts continue an exterior WKB solution with the radiation behaviour.
    Asymptotic,
    /// First-order closure `(A ∓ a_z)u = 0` with the phase `a_z`.
    DefaultPhase,
    /// Odd reflection about the first ghost node.
    Dirichlet,
    /// Complex absorbing ramp `∓iσ((|x| − L + w)/w)^p` inside `|x| > L − w`,
    /// followed by a Dirichlet wall.
    AbsorbingLayer { width: f64, strength: f64, power: i32 },
}

impl Default for BoundaryMode {
    fn default() -> Self {
        BoundaryMode::Asymptotic
    }
}

/// Values of a particular solution of the exterior equation, used when the
/// source extends past the truncation radius.
#[derive(Clone, Debug, Default)]
pub struct TailData {
    /// `P` at the end node.
    pub end: Complex64,
    /// `P` at ghosts `1..=K`.
    pub ghosts: Vec<Complex64>,
}

/// `v_{end+g} = Σ c · v_{end−j} + constant`, in `v = J^{−1/2}u` variables.
#[derive(Clone, Debug)]
pub struct GhostRule {
    pub terms: Vec<(usize, Complex64)>,
    pub constant: Complex64,
}

#[derive(Clone, Debug)]
pub struct EndClosure {
    pub rules: Vec<GhostRule>,
    /// `u_g/u_end` of the exterior solution, for ratio-type closures.
    pub ratios: Vec<Complex64>,
}

impl EndClosure {
    /// Same closure with ghost constants for the tail `P`.
    pub fn with_tail(&self, grid: &ChannelGrid, tail: &TailData) -> Result<Self, Error> {
        if self.ratios.is_empty() {
            return Err(Error::Validation(
                "sources extending past L need a ratio-type boundary closure".into(),
            ));
        }
        let n = grid.n as i64;
        let rules = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, rule)| {
                let g = i + 1;
                let jg = grid.node(n + g as i64).jac;
                GhostRule {
                    terms: rule.terms.clone(),
                    constant: (tail.ghosts[i] - self.ratios[i] * tail.end) / jg.sqrt(),
                }
            })
            .collect();
        Ok(Self {
            rules,
            ratios: self.ratios.clone(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Closures {
    pub right: EndClosure,
    /// Present on the line only.
    pub left: Option<EndClosure>,
    pub cap: Option<(f64, f64, i32, f64)>,
}

impl Closures {
    /// Builds both ends for `z` with the radiation behaviour of `sign`.
    pub fn build(
        grid: &ChannelGrid,
        z: Complex64,
        sign: Sign,
        mode: BoundaryMode,
        tails: [Option<&TailData>; 2],
        ctx: Option<&PhaseContext>,
    ) -> Result<Self, Error> {
        let right = end_closure(grid, z, sign, mode, tails[1], ctx)?;
        let left = if grid.is_line() {
            Some(end_closure(grid, z, sign, mode, tails[0], ctx)?)
        } else {
            None
        };
        let cap = match mode {
            BoundaryMode::AbsorbingLayer {
                width,
                strength,
                power,
            } => {
                if !(width > 0.0) || width >= grid.length() - 4.0 {
                    return Err(Error::Validation(format!(
                        "absorbing layer width {width} must be positive and leave |x| ≥ 4 free"
                    )));
                }
                Some((grid.length() - width, width, power, -sign.as_f64() * strength))
            }
            _ => None,
        };
        Ok(Self { right, left, cap })
    }

    /// Replaces ghost constants using tails `[left, right]`.
    pub fn with_tails(&self, grid: &ChannelGrid, tails: [Option<&TailData>; 2]) -> Result<Self, Error> {
        let mut out = self.clone();
        if let Some(t) = tails[1] {
            out.right = self.right.with_tail(grid, t)?;
        }
        if let (Some(t), Some(l)) = (tails[0], self.left.as_ref()) {
            out.left = Some(l.with_tail(grid, t)?);
        }
        Ok(out)
    }

    /// Imaginary absorbing potential at `x`, zero outside the layer.
    pub fn cap_at(&self, x: f64) -> Complex64 {
        match self.cap {
            Some((start, width, power, s)) if x.abs() > start => {
                Complex64::new(0.0, s * ((x.abs() - start) / width).powi(power))
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

fn end_closure(
    grid: &ChannelGrid,
    z: Complex64,
    sign: Sign,
    mode: BoundaryMode,
    tail: Option<&TailData>,
    ctx: Option<&PhaseContext>,
) -> Result<EndClosure, Error> {
    let kk = grid.ghosts();
    let n = grid.n as i64;
    let end = grid.node(n);
    let zero = Complex64::new(0.0, 0.0);
    let p_end = tail.map(|t| t.end).unwrap_or(zero);
    let p_g = |g: usize| tail.and_then(|t| t.ghosts.get(g - 1).copied()).unwrap_or(zero);
    let ratio_rules = |ratios: Vec<Complex64>| -> EndClosure {
        let rules = (1..=kk)
            .map(|g| {
                let gn = grid.node(n + g as i64);
                let r = ratios[g - 1];
                GhostRule {
                    terms: vec![(0, r * (end.jac / gn.jac).sqrt())],
                    constant: (p_g(g) - r * p_end) / gn.jac.sqrt(),
                }
            })
            .collect();
        EndClosure { rules, ratios }
    };
    match mode {
        BoundaryMode::Asymptotic => {
            let ext = Exterior::new(&grid.spec, grid.centrifugal, z, sign);
            let ratios = (1..=kk)
                .map(|g| ext.log_ratio(end.x, grid.node(n + g as i64).x).exp())
                .collect();
            Ok(ratio_rules(ratios))
        }
        BoundaryMode::DefaultPhase => {
            let ctx = ctx.ok_or_else(|| {
                Error::Validation("the phase closure needs a phase context".into())
            })?;
            let esc = grid.spec.escape();
            let d = grid.spec.dim as f64;
            let sg = sign.as_f64();
            let y = |s: f64| -> Result<Complex64, Error> {
                let g = esc.radial::<3>(s);
                let fs = g.f.c[1];
                let a = phase_a(ctx, z, s, sign)?;
                Ok(Complex64::i() * sg * a / fs - g.lap_f.value() / (2.0 * fs)
                    + (d - 1.0) / (2.0 * s))
            };
            let y0 = y(end.x)?;
            let mut ratios = Vec::with_capacity(kk);
            for g in 1..=kk {
                let xg = grid.node(n + g as i64).x;
                let yg = y(xg)?;
                ratios.push((0.5 * (y0 + yg) * (xg - end.x)).exp());
            }
            Ok(ratio_rules(ratios))
        }
        BoundaryMode::Dirichlet | BoundaryMode::AbsorbingLayer { .. } => {
            let rules = (1..=kk)
                .map(|g| GhostRule {
                    terms: if g >= 2 {
                        vec![(g - 2, Complex64::new(-1.0, 0.0))]
                    } else {
                        Vec::new()
                    },
                    constant: zero,
                })
                .collect();
            Ok(EndClosure {
                rules,
                ratios: Vec::new(),
            })
        }
    }
}
