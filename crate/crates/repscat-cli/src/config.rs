//! Run configuration: a TOML file of flat key–value tables.
//!
//! ```toml
//! seed = 7
//!
//! [potential]
//! alpha = 1.0          # required, 0.7 ≤ α ≤ 1.9
//! dim = 1
//! q = "power"          # zero | power | escape_power | gauss
//! coupling = 0.3
//! exponent = 3.0       # power and escape_power
//! width = 1.0          # gauss
//! rho = 1.0            # optional, inferred from the family when absent
//!
//! [grid]
//! length = 400.0
//! order = 12
//! points_per_wavelength = 20.0
//! ell_max = 0
//!
//! [spectral]
//! lambdas = [0.5, 1.0] # or lambda_start / lambda_stop / lambda_count
//! eps = [0.1, 0.05]    # optional ε schedule for `sweep`
//!
//! [job]
//! sign = "plus"
//! ```

use std::path::{Path, PathBuf};

use repscat::discretization::grid::GridConfig;
use repscat::discretization::potential::{PotentialSpec, QProfile};
use repscat::geometry_phase::phase::Phase;
use repscat::scattering::smatrix::Extraction;
use repscat::Sign;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    #[serde(default)]
    potential: RawPotential,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    spectral: RawSpectral,
    #[serde(default)]
    job: RawJob,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    alpha: Option<f64>,
    dim: Option<usize>,
    q: Option<String>,
    coupling: Option<f64>,
    exponent: Option<f64>,
    width: Option<f64>,
    rho: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    length: Option<f64>,
    order: Option<usize>,
    points_per_wavelength: Option<f64>,
    ell_max: Option<u32>,
    lambda_max: Option<f64>,
    n_min: Option<u32>,
    node_limit: Option<usize>,
    origin_spacing: Option<f64>,
    origin_grading: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectral {
    lambdas: Option<Vec<f64>>,
    lambda_start: Option<f64>,
    lambda_stop: Option<f64>,
    lambda_count: Option<usize>,
    eps: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    sign: Option<String>,
    extraction: Option<String>,
    source_center: Option<f64>,
    source_width: Option<f64>,
    source_momentum: Option<f64>,
    /// Interleaved real and imaginary parts of the angular vector.
    v: Option<Vec<f64>>,
    corpus_size: Option<usize>,
    phase: Option<String>,
    phase_shift: Option<f64>,
    dump_fields: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Gaussian wave packet `exp(−(x−c)²/w²) e^{ikx}` used as the source.
#[derive(Clone, Debug, Serialize)]
pub struct SourceSpec {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseChoice {
    Default,
    ExponentShift(f64),
}

impl PhaseChoice {
    pub fn phase(self) -> Phase {
        match self {
            PhaseChoice::Default => Phase::Default,
            PhaseChoice::ExponentShift(d) => Phase::ExponentShift(d),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JobConfig {
    pub sign: Sign,
    pub extraction: Extraction,
    pub source: SourceSpec,
    pub v: Option<Vec<[f64; 2]>>,
    pub corpus_size: usize,
    pub phase: PhaseChoice,
    pub dump_fields: bool,
}

/// A validated run configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub potential: PotentialSpec,
    pub grid: GridConfig,
    pub ell_max: u32,
    pub lambdas: Vec<f64>,
    pub eps: Vec<f64>,
    pub job: JobConfig,
    pub out_dir: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn required<T>(v: Option<T>, field: &str) -> Result<T, CliError> {
    v.ok_or_else(|| invalid(format!("missing required field `{field}`")))
}

fn q_param(v: Option<f64>, field: &str, family: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| invalid(format!("q = \"{family}\" needs `{field}`")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        let p = raw.potential;
        let alpha = required(p.alpha, "potential.alpha")?;
        let dim = p.dim.unwrap_or(1);
        let family = p.q.as_deref().unwrap_or("zero");
        let (q, inferred_rho) = match family {
            "zero" => (QProfile::Zero, f64::INFINITY),
            "power" => {
                let exponent = q_param(p.exponent, "potential.exponent", family)?;
                let q = QProfile::Power {
                    coupling: q_param(p.coupling, "potential.coupling", family)?,
                    exponent,
                };
                (q, exponent / (1.0 - 0.5 * alpha) - 1.0)
            }
            "escape_power" => {
                let exponent = q_param(p.exponent, "potential.exponent", family)?;
                let q = QProfile::EscapePower {
                    coupling: q_param(p.coupling, "potential.coupling", family)?,
                    exponent,
                };
                (q, exponent - 1.0)
            }
            "gauss" => {
                let q = QProfile::Gauss {
                    coupling: q_param(p.coupling, "potential.coupling", family)?,
                    width: q_param(p.width, "potential.width", family)?,
                };
                (q, 1.0)
            }
            other => return Err(invalid(format!("unknown q family `{other}` in `potential.q`"))),
        };
        let potential = PotentialSpec::with_q(alpha, dim, q, p.rho.unwrap_or(inferred_rho));
        potential.validate().map_err(|e| match e {
            repscat::Error::Validation(m) => invalid(format!("potential: {m}")),
            other => invalid(other.to_string()),
        })?;

        let s = raw.spectral;
        let lambdas = match (s.lambdas, s.lambda_start, s.lambda_stop, s.lambda_count) {
            (Some(l), None, None, None) => l,
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            },
            (None, None, None, None) => return Err(invalid("missing required field `spectral.lambdas`")),
            _ => {
                return Err(invalid(
                    "give either `spectral.lambdas` or all of `spectral.lambda_start`, `lambda_stop`, `lambda_count`",
                ))
            }
        };
        if lambdas.is_empty() {
            return Err(invalid("`spectral.lambdas` is empty"));
        }
        if let Some(bad) = lambdas.iter().find(|l| !l.is_finite()) {
            return Err(invalid(format!("`spectral.lambdas` contains {bad}")));
        }
        let eps = s.eps.unwrap_or_else(|| (0..=6).map(|k| 0.1 * 0.5f64.powi(k)).collect());
        if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) {
            return Err(invalid("`spectral.eps` needs at least two positive values"));
        }

        let g = raw.grid;
        let d = GridConfig::default();
        let lambda_top = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let grid = GridConfig {
            length: g.length.unwrap_or(d.length),
            order: g.order.unwrap_or(d.order),
            points_per_wavelength: g.points_per_wavelength.unwrap_or(d.points_per_wavelength),
            lambda_max: g.lambda_max.unwrap_or(lambda_top.max(d.lambda_max)),
            n_min: g.n_min.unwrap_or(d.n_min),
            node_limit: g.node_limit.unwrap_or(d.node_limit),
            origin_spacing: g.origin_spacing.unwrap_or(d.origin_spacing),
            origin_grading: g.origin_grading.unwrap_or(d.origin_grading),
        };
        let ell_max = g.ell_max.unwrap_or(0);
        if dim == 1 && ell_max != 0 {
            return Err(invalid("`grid.ell_max` applies only to dim ≥ 2"));
        }

        let j = raw.job;
        let sign = match j.sign.as_deref().unwrap_or("plus") {
            "plus" => Sign::Plus,
            "minus" => Sign::Minus,
            other => return Err(invalid(format!("`job.sign` must be plus or minus, got `{other}`"))),
        };
        let extraction = match j.extraction.as_deref().unwrap_or("matching") {
            "matching" => Extraction::Matching,
            "cesaro" => Extraction::Cesaro,
            other => return Err(invalid(format!("`job.extraction` must be matching or cesaro, got `{other}`"))),
        };
        let phase = match j.phase.as_deref().unwrap_or("default") {
            "default" => PhaseChoice::Default,
            "exponent_shift" => PhaseChoice::ExponentShift(j.phase_shift.unwrap_or(0.25)),
            other => return Err(invalid(format!("`job.phase` must be default or exponent_shift, got `{other}`"))),
        };
        let v = match j.v {
            None => None,
            Some(raw) if raw.len() % 2 != 0 => return Err(invalid("`job.v` needs interleaved real and imaginary parts")),
            Some(raw) => Some(raw.chunks(2).map(|c| [c[0], c[1]]).collect()),
        };
        let source = SourceSpec {
            center: j.source_center.unwrap_or(if dim == 1 { 0.0 } else { 2.0 }),
            width: j.source_width.unwrap_or(1.0),
            momentum: j.source_momentum.unwrap_or(0.0),
        };
        if !(source.width > 0.0) {
            return Err(invalid("`job.source_width` must be positive"));
        }
        let corpus_size = j.corpus_size.unwrap_or(4);
        if corpus_size == 0 {
            return Err(invalid("`job.corpus_size` must be at least 1"));
        }
        Ok(Self {
            seed: raw.seed.unwrap_or(0),
            potential,
            grid,
            ell_max,
            lambdas,
            eps,
            job: JobConfig {
                sign,
                extraction,
                source,
                v,
                corpus_size,
                phase,
                dump_fields: j.dump_fields.unwrap_or(true),
            },
            out_dir: raw.output.dir,
        })
    }
}

/// Acceptance thresholds; any subset may be overridden from a TOML file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed shortfall of the fitted eikonal exponent below its prediction.
    pub eikonal_margin: f64,
    /// Allowed shortfall of the observed factorization order.
    pub factorization_margin: f64,
    pub parseval: f64,
    pub unitarity: f64,
    /// Pipeline versus Airy functions.
    pub oracle_airy: f64,
    /// Pipeline versus ODE shooting.
    pub oracle_ode: f64,
    pub round_trip: f64,
    pub s_relation: f64,
    pub norm_equality: f64,
    pub shell_average: f64,
    pub lap_change: f64,
    pub route: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eikonal_margin: 0.1,
            factorization_margin: 0.5,
            parseval: 1e-4,
            unitarity: 1e-5,
            oracle_airy: 1e-6,
            oracle_ode: 1e-5,
            round_trip: 1e-4,
            s_relation: 1e-4,
            norm_equality: 1e-4,
            shell_average: 1e-3,
            lap_change: 1e-2,
            route: 1e-5,
        }
    }
}

impl Tolerances {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let t: Self = toml::from_str(&text).map_err(|e| invalid(format!("tolerance overrides: {e}")))?;
        let values = [
            t.eikonal_margin,
            t.factorization_margin,
            t.parseval,
            t.unitarity,
            t.oracle_airy,
            t.oracle_ode,
            t.round_trip,
            t.s_relation,
            t.norm_equality,
            t.shell_average,
            t.lap_change,
            t.route,
        ];
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("tolerance overrides must be non-negative"));
        }
        Ok(t)
    }
}
