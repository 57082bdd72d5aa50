//! Stationary wave matrices `𝓕^±(λ)`, the scattering matrix `S(λ)` and
//! generalized eigenfunctions, assembled channel by channel.
//!
//! On the line an angular vector has the two entries `v(+1), v(−1)` with
//! counting measure. For radial `q` in `d ≥ 2` it carries one spherical
//! harmonic per degree `ℓ ≤ ℓ_max`; every harmonic of a degree behaves the
//! same, so one representative suffices.

pub mod eigen;
pub mod incident;
pub mod rellich;
pub mod smatrix;
pub mod wave;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::grid::{Channel, ChannelGrid, GridConfig};
use crate::discretization::potential::PotentialSpec;
use crate::Error;

pub use eigen::{
    decomposition_check, extract_asymptotic_xi, extract_xi_cesaro, wave_matrix_adjoint, DecompositionReport,
    EigenfunctionRecord, XiExtraction,
};
pub use incident::{build_incident, Incident};
pub use rellich::{rellich_probe, RellichReport};
pub use smatrix::{scattering_matrix, ScatteringMatrix, ScatteringOptions};
pub use wave::{cesaro_wave_matrix, parseval_check, shell_trace, wave_matrix, CesaroRecord, ParsevalReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularBasis {
    /// `ω = +1, −1` on `𝕊⁰`, counting measure.
    Directions,
    /// Degrees `ℓ = 0..=ell_max` on `𝕊^{d−1}`.
    Harmonics { dim: usize, ell_max: u32 },
}

impl AngularBasis {
    pub fn len(&self) -> usize {
        match self {
            AngularBasis::Directions => 2,
            AngularBasis::Harmonics { ell_max, .. } => *ell_max as usize + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            AngularBasis::Directions => vec!["omega=+1".into(), "omega=-1".into()],
            AngularBasis::Harmonics { ell_max, .. } => (0..=*ell_max).map(|l| format!("ell={l}")).collect(),
        }
    }

    /// `v ↦ v(−·)`: swap on the line, `(−1)^ℓ` on harmonics.
    pub fn reflect(&self, c: &[Complex64]) -> Vec<Complex64> {
        match self {
            AngularBasis::Directions => vec![c[1], c[0]],
            AngularBasis::Harmonics { .. } => c
                .iter()
                .enumerate()
                .map(|(l, v)| if l % 2 == 0 { *v } else { -v })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularVector {
    pub basis: AngularBasis,
    pub coeffs: Vec<Complex64>,
}

impl AngularVector {
    pub fn new(basis: AngularBasis, coeffs: Vec<Complex64>) -> Result<Self, Error> {
        if coeffs.len() != basis.len() {
            return Err(Error::Validation(format!(
                "angular vector has {} entries, basis needs {}",
                coeffs.len(),
                basis.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Validation("angular vector has non-finite entries".into()));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: AngularBasis) -> Self {
        Self {
            basis,
            coeffs: vec![Complex64::new(0.0, 0.0); basis.len()],
        }
    }

    pub fn unit(basis: AngularBasis, i: usize) -> Self {
        let mut v = Self::zeros(basis);
        v.coeffs[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn reflect(&self) -> Self {
        Self {
            basis: self.basis,
            coeffs: self.basis.reflect(&self.coeffs),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            basis: self.basis,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.sub(o).norm()
    }
}

/// The channel grids of one problem: a single line grid for `d = 1`, one
/// radial grid per degree otherwise.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    pub spec: PotentialSpec,
    pub basis: AngularBasis,
    pub grids: Vec<Arc<ChannelGrid>>,
}

impl ChannelSet {
    pub fn new(spec: &PotentialSpec, config: &GridConfig, ell_max: u32) -> Result<Self, Error> {
        if spec.dim == 0 {
            return Err(Error::Validation("dimension must be at least 1".into()));
        }
        if spec.dim == 1 {
            let g = ChannelGrid::new(spec, Channel::Line, config.clone())?;
            return Ok(Self {
                spec: spec.clone(),
                basis: AngularBasis::Directions,
                grids: vec![Arc::new(g)],
            });
        }
        let grids = (0..=ell_max)
            .map(|ell| ChannelGrid::new(spec, Channel::Radial { ell }, config.clone()).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            spec: spec.clone(),
            basis: AngularBasis::Harmonics {
                dim: spec.dim,
                ell_max,
            },
            grids,
        })
    }

    /// Entries of an angular vector carried by channel `c`.
    pub fn slots(&self, c: usize) -> Vec<usize> {
        match self.basis {
            AngularBasis::Directions => vec![0, 1],
            AngularBasis::Harmonics { .. } => vec![c],
        }
    }
}

/// Directions `ω` reachable on a channel grid, as `(slot, side)` with
/// side `0` for `x < 0` and `1` for `x > 0`.
pub(crate) fn sides(grid: &ChannelGrid) -> Vec<(usize, usize)> {
    if grid.is_line() {
        vec![(0, 1), (1, 0)]
    } else {
        vec![(0, 1)]
    }
}
