//! `S(λ)` column by column: `S v = −2πi 𝓕⁺(λ) ψ_λ^−[v]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::incident::build_incident;
use super::wave::{cesaro_table, limiting_solves, shell_trace, wave_matrix_from};
use super::{AngularBasis, AngularVector, ChannelSet};
use crate::discretization::field::WaveField;
use crate::{Error, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extraction {
    /// Exact exterior matching at the truncation radius.
    Matching,
    /// Aitken-accelerated Cesàro averages of shell traces.
    Cesaro,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ScatteringOptions {
    pub extraction: Extraction,
    /// Unitarity defect above which the result is flagged.
    pub defect_threshold: f64,
    pub cesaro_tolerance: f64,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self {
            extraction: Extraction::Matching,
            defect_threshold: 1e-5,
            cesaro_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringMatrix {
    pub lambda: f64,
    pub basis: AngularBasis,
    pub labels: Vec<String>,
    /// Row-major, `matrix[i][j] = (S e_j)_i`.
    pub matrix: Vec<Vec<Complex64>>,
    /// `‖S*S − I‖_F`.
    pub unitarity_defect: f64,
    /// `max_j ‖2πi 𝓕⁺ψ⁺[e_j] − e_j‖`.
    pub round_trip_defect: f64,
    /// `‖SP − PS‖_F` with the parity swap, on the line.
    pub parity_commutator: Option<f64>,
    pub boundary_residual: f64,
    pub length: f64,
    pub order: usize,
    pub points_per_wavelength: f64,
    pub ell_max: Option<u32>,
    pub extraction: Extraction,
    pub flagged: bool,
}

impl ScatteringMatrix {
    pub fn apply(&self, v: &AngularVector) -> AngularVector {
        let coeffs = self
            .matrix
            .iter()
            .map(|row| row.iter().zip(&v.coeffs).map(|(a, b)| a * b).sum())
            .collect();
        AngularVector {
            basis: self.basis,
            coeffs,
        }
    }

    /// Frobenius distance to another matrix on the same basis.
    pub fn distance(&self, other: &[Vec<Complex64>]) -> f64 {
        frobenius_diff(&self.matrix, other)
    }
}

pub fn frobenius_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

pub fn unitarity_defect(m: &[Vec<Complex64>]) -> f64 {
    let n = m.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut s: Complex64 = (0..n).map(|k| m[k][i].conj() * m[k][j]).sum();
            if i == j {
                s -= 1.0;
            }
            acc += s.norm_sqr();
        }
    }
    acc.sqrt()
}

fn parity_commutator(m: &[Vec<Complex64>]) -> f64 {
    let sp = [[m[0][1], m[0][0]], [m[1][1], m[1][0]]];
    let ps = [[m[1][0], m[1][1]], [m[0][0], m[0][1]]];
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += (sp[i][j] - ps[i][j]).norm_sqr();
        }
    }
    acc.sqrt()
}

struct Column {
    value: AngularVector,
    round_trip: f64,
    boundary_residual: f64,
}

fn column(set: &ChannelSet, lambda: f64, j: usize, opts: &ScatteringOptions) -> Result<Column, Error> {
    let e = AngularVector::unit(set.basis, j);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let incoming = build_incident(set, lambda, Sign::Minus, &e)?;
    let solves = limiting_solves(set, lambda, Sign::Plus, &incoming.sources)?;
    let value = match opts.extraction {
        Extraction::Matching => {
            let w = wave_matrix_from(set, Sign::Plus, solves.clone())?;
            w.value.scale(-two_pi_i)
        }
        Extraction::Cesaro => {
            let fields: Vec<WaveField> = solves.iter().map(|r| r.field.clone()).collect();
            let rec = cesaro_table(set, 4.0, opts.cesaro_tolerance, &|f| shell_trace(set, lambda, f, Sign::Plus, &fields))?;
            rec.best().cloned().expect("at least two levels").scale(-two_pi_i)
        }
    };
    let outgoing = build_incident(set, lambda, Sign::Plus, &e)?;
    let check = wave_matrix_from(set, Sign::Plus, limiting_solves(set, lambda, Sign::Plus, &outgoing.sources)?)?;
    let round_trip = check.value.scale(two_pi_i).distance(&e);
    let boundary_residual = solves
        .iter()
        .map(|r| r.boundary_residual)
        .fold(check.boundary_residual, f64::max);
    Ok(Column {
        value,
        round_trip,
        boundary_residual,
    })
}

/// `S(λ)` on the channel basis of `set`.
pub fn scattering_matrix(set: &ChannelSet, lambda: f64, opts: &ScatteringOptions) -> Result<ScatteringMatrix, Error> {
    let n = set.basis.len();
    let columns = (0..n)
        .into_par_iter()
        .map(|j| column(set, lambda, j, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix: Vec<Vec<Complex64>> = (0..n).map(|i| columns.iter().map(|c| c.value.coeffs[i]).collect()).collect();
    let unitarity_defect = unitarity_defect(&matrix);
    let g = &set.grids[0];
    Ok(ScatteringMatrix {
        lambda,
        basis: set.basis,
        labels: set.basis.labels(),
        parity_commutator: matches!(set.basis, AngularBasis::Directions).then(|| parity_commutator(&matrix)),
        round_trip_defect: columns.iter().map(|c| c.round_trip).fold(0.0, f64::max),
        boundary_residual: columns.iter().map(|c| c.boundary_residual).fold(0.0, f64::max),
        matrix,
        unitarity_defect,
        length: g.length(),
        order: g.order(),
        points_per_wavelength: g.config.points_per_wavelength,
        ell_max: match set.basis {
            AngularBasis::Harmonics { ell_max, .. } => Some(ell_max),
            AngularBasis::Directions => None,
        },
        extraction: opts.extraction,
        flagged: !(unitarity_defect <= opts.defect_threshold),
    })
}
