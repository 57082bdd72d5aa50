//! Independent reference solutions: exact Airy scattering for the free
//! `α = 1` line and high-order ODE shooting for radial problems.

pub mod airy;
pub mod ode;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::grid::Channel;
use crate::discretization::potential::PotentialSpec;
use crate::scattering::smatrix::unitarity_defect;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Airy,
    OdeShooting,
}

/// Phase-stripped amplitudes of one regular solution at one radius pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub label: String,
    pub radii: (f64, f64),
    pub outgoing: Complex64,
    pub incoming: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub lambda: f64,
    pub method: OracleMethod,
    pub labels: Vec<String>,
    /// Row-major, on the same basis as the pipeline matrix.
    pub matrix: Vec<Vec<Complex64>>,
    pub unitarity_defect: f64,
    pub amplitudes: Vec<AmplitudeRow>,
    /// Largest change of any entry between the matching radius pairs.
    pub radius_variation: Option<f64>,
}

/// Default inner matching radii of the shooting oracle.
pub const MATCHING_RADII: [f64; 2] = [60.0, 120.0];

/// `S(λ)` of the free `α = 1` line from Airy functions.
pub fn airy_smatrix(lambda: f64) -> OracleResult {
    let m: Vec<Vec<Complex64>> = airy::FreeAiryLine::new(lambda).s_matrix().iter().map(|r| r.to_vec()).collect();
    OracleResult {
        lambda,
        method: OracleMethod::Airy,
        labels: vec!["omega=+1".into(), "omega=-1".into()],
        unitarity_defect: unitarity_defect(&m),
        matrix: m,
        amplitudes: Vec::new(),
        radius_variation: None,
    }
}

fn matrix_at(spec: &PotentialSpec, lambda: f64, channel: Channel, r1: f64) -> Result<(Vec<Vec<Complex64>>, Vec<AmplitudeRow>), Error> {
    let row = |label: &str, a: ode::Amplitudes| AmplitudeRow {
        label: label.into(),
        radii: a.radii,
        outgoing: a.outgoing,
        incoming: a.incoming,
    };
    match channel {
        Channel::Line => {
            let o = ode::ChannelOde::line(spec, lambda);
            let rows = vec![row("even", o.amplitudes(1, r1)?), row("odd", o.amplitudes(-1, r1)?)];
            let (se, so) = ode::line_parity_eigenvalues(spec, lambda, r1)?;
            let (a, b) = (0.5 * (se + so), 0.5 * (se - so));
            Ok((vec![vec![a, b], vec![b, a]], rows))
        }
        Channel::Radial { ell } => {
            let o = ode::ChannelOde::radial(spec, lambda, ell);
            let rows = vec![row(&format!("ell={ell}"), o.amplitudes(1, r1)?)];
            Ok((vec![vec![ode::channel_eigenvalue(spec, lambda, ell, r1)?]], rows))
        }
    }
}

/// `S(λ)` by shooting: 2×2 on the line, the scalar `S_ℓ` for a radial channel.
pub fn ode_smatrix(lambda: f64, spec: &PotentialSpec, channel: Channel) -> Result<OracleResult, Error> {
    ode_smatrix_at(lambda, spec, channel, &MATCHING_RADII)
}

/// As [`ode_smatrix`], matching at every radius in `radii` (each ≥ 50); the
/// matrix is taken from the first.
pub fn ode_smatrix_at(lambda: f64, spec: &PotentialSpec, channel: Channel, radii: &[f64]) -> Result<OracleResult, Error> {
    spec.validate()?;
    if radii.is_empty() {
        return Err(Error::Validation("no matching radius given".into()));
    }
    if matches!(channel, Channel::Line) != (spec.dim == 1) {
        return Err(Error::Validation(format!("channel {channel:?} does not fit dimension {}", spec.dim)));
    }
    let mut mats = Vec::new();
    let mut amplitudes = Vec::new();
    for &r in radii {
        let (m, rows) = matrix_at(spec, lambda, channel, r)?;
        mats.push(m);
        amplitudes.extend(rows);
    }
    let radius_variation = (radii.len() > 1).then(|| {
        mats[1..]
            .iter()
            .map(|m| crate::scattering::smatrix::frobenius_diff(m, &mats[0]))
            .fold(0.0, f64::max)
    });
    let matrix = mats.swap_remove(0);
    let labels = match channel {
        Channel::Line => vec!["omega=+1".into(), "omega=-1".into()],
        Channel::Radial { ell } => vec![format!("ell={ell}")],
    };
    Ok(OracleResult {
        lambda,
        method: OracleMethod::OdeShooting,
        labels,
        unitarity_defect: unitarity_defect(&matrix),
        matrix,
        amplitudes,
        radius_variation,
    })
}

/// Diagonal `S` over the harmonics `ℓ = 0..=ell_max` of a radial problem.
pub fn ode_harmonic_smatrix(lambda: f64, spec: &PotentialSpec, ell_max: u32) -> Result<OracleResult, Error> {
    let per: Vec<OracleResult> = (0..=ell_max)
        .map(|ell| ode_smatrix(lambda, spec, Channel::Radial { ell }))
        .collect::<Result<_, _>>()?;
    let n = per.len();
    let mut matrix = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (l, r) in per.iter().enumerate() {
        matrix[l][l] = r.matrix[0][0];
    }
    Ok(OracleResult {
        lambda,
        method: OracleMethod::OdeShooting,
        labels: per.iter().map(|r| r.labels[0].clone()).collect(),
        unitarity_defect: unitarity_defect(&matrix),
        matrix,
        amplitudes: per.iter().flat_map(|r| r.amplitudes.clone()).collect(),
        radius_variation: per.iter().filter_map(|r| r.radius_variation).reduce(f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::smatrix::frobenius_diff;

    #[test]
    fn oracles_agree_on_the_free_line() {
        let spec = PotentialSpec::free(1.0, 1);
        for l in [0.5, 1.0, 2.0] {
            let a = airy_smatrix(l);
            let o = ode_smatrix(l, &spec, Channel::Line).unwrap();
            assert!(a.unitarity_defect < 1e-10);
            assert!(o.unitarity_defect < 1e-8);
            assert!(o.radius_variation.unwrap() < 1e-7);
            assert!(frobenius_diff(&a.matrix, &o.matrix) < 1e-8);
        }
    }

    #[test]
    fn channel_must_fit_dimension() {
        let spec = PotentialSpec::free(1.0, 3);
        assert!(matches!(ode_smatrix(1.0, &spec, Channel::Line), Err(Error::Validation(_))));
    }
}
