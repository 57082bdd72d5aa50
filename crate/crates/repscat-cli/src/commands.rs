use std::fs::File;
use std::io::BufWriter;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use repscat::discretization::dump::write_field;
use repscat::discretization::field::WaveField;
use repscat::discretization::grid::{Channel, ChannelGrid};
use repscat::discretization::norms::{shell_norms, weighted_l2};
use repscat::numerics::fit::log_log_fit;
use repscat::oracle::{airy_smatrix, ode_harmonic_smatrix, ode_smatrix, OracleResult};
use repscat::resolvent::diagnostics::{lap_diagnostic, LapReport};
use repscat::resolvent::limiting::{limiting_routes, LimitingOptions, LimitingRecord};
use repscat::resolvent::Source;
use repscat::scattering::eigen::{decomposition_check, extract_asymptotic_xi, wave_matrix_adjoint, DecompositionReport, XiExtraction};
use repscat::scattering::smatrix::{frobenius_diff, scattering_matrix, ScatteringMatrix, ScatteringOptions};
use repscat::scattering::wave::{parseval_check, ParsevalReport};
use repscat::scattering::{AngularBasis, AngularVector, ChannelSet};
use repscat::{Complex64, Sign};
use serde::Serialize;

use crate::config::{RunConfig, SourceSpec, Tolerances};
use crate::error::CliError;
use crate::output::{num, OutDir};

pub fn channel_label(g: &ChannelGrid) -> String {
    match g.channel {
        Channel::Line => "line".into(),
        Channel::Radial { ell } => format!("ell={ell}"),
    }
}

fn sign_label(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

pub fn channel_set(cfg: &RunConfig) -> Result<ChannelSet, CliError> {
    Ok(ChannelSet::new(&cfg.potential, &cfg.grid, cfg.ell_max)?)
}

pub fn packet(g: &Arc<ChannelGrid>, s: &SourceSpec) -> WaveField {
    WaveField::from_fn(g, |x| {
        let env = (-((x - s.center) / s.width).powi(2)).exp();
        Complex64::from_polar(env, s.momentum * x)
    })
}

/// Seeded random sums of two Gaussian packets, one field per channel.
pub fn corpus(set: &ChannelSet, seed: u64, size: usize) -> Vec<Vec<WaveField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = if set.spec.dim == 1 { -6.0 } else { 1.0 };
    (0..size)
        .map(|_| {
            let c1: f64 = rng.gen_range(lo..6.0);
            let c2: f64 = rng.gen_range(lo..6.0);
            let w1: f64 = rng.gen_range(0.5..2.0);
            let w2: f64 = rng.gen_range(0.5..2.0);
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let k: f64 = rng.gen_range(0.0..3.0);
            set.grids
                .iter()
                .map(|g| {
                    WaveField::from_fn(g, |x| {
                        a * (-(x - c1).powi(2) / (w1 * w1)).exp()
                            + b * (-(x - c2).powi(2) / (w2 * w2)).exp() * Complex64::from_polar(1.0, k * x)
                    })
                })
                .collect()
        })
        .collect()
}

/// The configured angular vector, or a fixed generic one.
pub fn angular_vector(cfg: &RunConfig, basis: AngularBasis) -> Result<AngularVector, CliError> {
    let coeffs: Vec<Complex64> = match &cfg.job.v {
        Some(v) => v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
        None => (0..basis.len())
            .map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64), 0.7 * k as f64 + 0.3))
            .collect(),
    };
    Ok(AngularVector::new(basis, coeffs)?)
}

pub fn run_parallel<T: Send, F>(lambdas: &[f64], f: F) -> Result<Vec<T>, CliError>
where
    F: Fn(f64) -> Result<T, CliError> + Sync + Send,
{
    lambdas.par_iter().map(|&l| f(l)).collect()
}

fn finish(flags: Vec<String>) -> Result<(), CliError> {
    if flags.is_empty() {
        Ok(())
    } else {
        Err(CliError::Flagged(flags.join("; ")))
    }
}

#[derive(Serialize)]
struct SolveChannel {
    channel: String,
    solver_residual: f64,
    boundary_residual: f64,
    route_discrepancy: Option<f64>,
    holder_omega: Option<f64>,
    b_star: f64,
    weighted_norm: f64,
    field_file: Option<String>,
}

#[derive(Serialize)]
struct SolveRow {
    lambda: f64,
    channels: Vec<SolveChannel>,
    parseval: ParsevalReport,
    parseval_rel_error: f64,
}

pub fn cmd_solve(cfg: &RunConfig, tol: &Tolerances, out: &mut OutDir) -> Result<(), CliError> {
    let set = channel_set(cfg)?;
    let sign = cfg.job.sign;
    let psi: Vec<WaveField> = set.grids.iter().map(|g| packet(g, &cfg.job.source)).collect();
    let results = run_parallel(&cfg.lambdas, |lambda| -> Result<(SolveRow, Vec<LimitingRecord>), CliError> {
        let records = set
            .grids
            .iter()
            .zip(&psi)
            .map(|(g, p)| limiting_routes(g, lambda, sign, &Source::compact(p.clone()), None, &LimitingOptions::default()))
            .collect::<Result<Vec<_>, _>>()?;
        let parseval = parseval_check(&set, lambda, &psi)?;
        let channels = set
            .grids
            .iter()
            .zip(&records)
            .map(|(g, r)| SolveChannel {
                channel: channel_label(g),
                solver_residual: r.direct.solver_residual,
                boundary_residual: r.direct.boundary_residual,
                route_discrepancy: r.discrepancy,
                holder_omega: r.holder.as_ref().map(|h| h.omega),
                b_star: shell_norms(&r.direct.field).b_star,
                weighted_norm: weighted_l2(&r.direct.field, -1.0),
                field_file: None,
            })
            .collect();
        let row = SolveRow {
            lambda,
            channels,
            parseval_rel_error: parseval.rel_error_plus.max(parseval.rel_error_minus),
            parseval,
        };
        Ok((row, records))
    })?;
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for (i, (mut row, records)) in results.into_iter().enumerate() {
        for (c, (ch, rec)) in row.channels.iter_mut().zip(&records).enumerate() {
            if cfg.job.dump_fields {
                let name = format!("field_{i:03}_{c:02}.rsfd");
                write_field(BufWriter::new(File::create(out.path(&name))?), &rec.direct.field)?;
                out.record(out.path(&name));
                ch.field_file = Some(name);
            }
            if ch.route_discrepancy.is_some_and(|d| !(d <= tol.route)) {
                flags.push(format!("λ = {}: {} routes differ by {:.2e}", row.lambda, ch.channel, ch.route_discrepancy.unwrap_or(f64::NAN)));
            }
        }
        if !(row.parseval_rel_error <= tol.parseval) {
            flags.push(format!("λ = {}: Parseval rel. error {:.2e}", row.lambda, row.parseval_rel_error));
        }
        rows.push(row);
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            r.channels.iter().map(move |c| {
                vec![
                    num(r.lambda),
                    c.channel.clone(),
                    num(c.solver_residual),
                    num(c.boundary_residual),
                    c.route_discrepancy.map(num).unwrap_or_default(),
                    c.holder_omega.map(num).unwrap_or_default(),
                    num(c.b_star),
                    num(c.weighted_norm),
                    num(r.parseval_rel_error),
                ]
            })
        })
        .collect();
    out.json("solve.json", "solve", cfg, tol, &serde_json::json!({ "rows": rows, "flags": flags }))?;
    out.csv(
        "solve.csv",
        &[
            "lambda",
            "channel",
            "solver_residual",
            "boundary_residual",
            "route_discrepancy",
            "holder_omega",
            "b_star",
            "weighted_norm",
            "parseval_rel_error",
        ],
        &table,
    )?;
    finish(flags)
}

/// The independent reference for `S(λ)` and its tolerance.
fn oracle(cfg: &RunConfig, tol: &Tolerances, lambda: f64) -> Result<(OracleResult, f64), CliError> {
    let spec = &cfg.potential;
    if spec.dim == 1 && spec.is_free() && spec.alpha == 1.0 {
        Ok((airy_smatrix(lambda), tol.oracle_airy))
    } else if spec.dim == 1 {
        Ok((ode_smatrix(lambda, spec, Channel::Line)?, tol.oracle_ode))
    } else {
        Ok((ode_harmonic_smatrix(lambda, spec, cfg.ell_max)?, tol.oracle_ode))
    }
}

#[derive(Serialize)]
struct SmatrixRow {
    lambda: f64,
    smatrix: ScatteringMatrix,
    oracle: OracleResult,
    oracle_diff: f64,
    oracle_tolerance: f64,
}

pub fn cmd_smatrix(cfg: &RunConfig, tol: &Tolerances, out: &mut OutDir) -> Result<(), CliError> {
    let set = channel_set(cfg)?;
    let opts = ScatteringOptions {
        extraction: cfg.job.extraction,
        defect_threshold: tol.unitarity,
        ..ScatteringOptions::default()
    };
    let rows = run_parallel(&cfg.lambdas, |lambda| -> Result<SmatrixRow, CliError> {
        let smatrix = scattering_matrix(&set, lambda, &opts)?;
        let (oracle, oracle_tolerance) = oracle(cfg, tol, lambda)?;
        Ok(SmatrixRow {
            lambda,
            oracle_diff: frobenius_diff(&smatrix.matrix, &oracle.matrix),
            smatrix,
            oracle,
            oracle_tolerance,
        })
    })?;
    let mut flags = Vec::new();
    for r in &rows {
        if r.smatrix.flagged {
            flags.push(format!("λ = {}: unitarity defect {:.2e}", r.lambda, r.smatrix.unitarity_defect));
        }
        if !(r.oracle_diff <= r.oracle_tolerance) {
            flags.push(format!("λ = {}: oracle difference {:.2e}", r.lambda, r.oracle_diff));
        }
    }
    let summary: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.lambda),
                num(r.smatrix.unitarity_defect),
                num(r.oracle_diff),
                num(r.smatrix.round_trip_defect),
                num(r.smatrix.boundary_residual),
                r.smatrix.flagged.to_string(),
            ]
        })
        .collect();
    let entries: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            let labels = &r.smatrix.labels;
            r.smatrix.matrix.iter().enumerate().flat_map(move |(i, row)| {
                row.iter().enumerate().map(move |(j, s)| {
                    let o = r.oracle.matrix[i][j];
                    vec![
                        num(r.lambda),
                        labels[i].clone(),
                        labels[j].clone(),
                        num(s.re),
                        num(s.im),
                        num(o.re),
                        num(o.im),
                    ]
                })
            })
        })
        .collect();
    out.json("smatrix.json", "smatrix", cfg, tol, &serde_json::json!({ "rows": rows, "flags": flags }))?;
    out.csv(
        "smatrix.csv",
        &["lambda", "unitarity_defect", "oracle_diff", "round_trip_defect", "boundary_residual", "flagged"],
        &summary,
    )?;
    out.csv("smatrix_entries.csv", &["lambda", "row", "col", "re", "im", "oracle_re", "oracle_im"], &entries)?;
    finish(flags)
}

/// Eigenfunction pipeline at one `λ`: `φ = 𝓕^σ(λ)*v`, its asymptotic data,
/// and the identities it must satisfy.
#[derive(Serialize)]
pub struct EigenRow {
    pub lambda: f64,
    pub sign: Sign,
    pub round_trip: f64,
    pub s_relation: f64,
    pub xi: XiExtraction,
    pub decomposition: DecompositionReport,
    pub interior_residual: f64,
    pub b_star: f64,
    pub profiles: Vec<Vec<f64>>,
}

pub fn eigen_row(set: &ChannelSet, lambda: f64, sign: Sign, v: &AngularVector) -> Result<EigenRow, CliError> {
    let sm = scattering_matrix(set, lambda, &ScatteringOptions::default())?;
    let rec = wave_matrix_adjoint(set, lambda, sign, v)?;
    let xi = extract_asymptotic_xi(set, lambda, &rec.fields, None)?;
    let given = if sign == Sign::Plus { &xi.xi_plus } else { &xi.xi_minus };
    let round_trip = given.distance(v) / v.norm();
    let s_relation = sm.apply(&xi.xi_minus).distance(&xi.xi_plus) / xi.xi_plus.norm();
    let decomposition = decomposition_check(set, &rec, &xi)?;
    Ok(EigenRow {
        lambda,
        sign,
        round_trip,
        s_relation,
        xi,
        decomposition,
        interior_residual: rec.interior_residual,
        b_star: rec.b_star,
        profiles: rec.profiles,
    })
}

pub fn cmd_eigenfun(cfg: &RunConfig, tol: &Tolerances, out: &mut OutDir) -> Result<(), CliError> {
    let set = channel_set(cfg)?;
    let v = angular_vector(cfg, set.basis)?;
    let rows = run_parallel(&cfg.lambdas, |lambda| eigen_row(&set, lambda, cfg.job.sign, &v))?;
    let mut flags = Vec::new();
    for r in &rows {
        let d = &r.decomposition;
        let checks = [
            ("round trip", r.round_trip, tol.round_trip),
            ("S relation", r.s_relation, tol.s_relation),
            ("norm equality", d.norm_mismatch, tol.norm_equality),
            ("shell average", d.shell_rel_error, tol.shell_average),
        ];
        for (name, value, t) in checks {
            if !(value <= t) {
                flags.push(format!("λ = {}: {name} {value:.2e} > {t:.0e}", r.lambda));
            }
        }
        if !(d.remainder_slope < 0.0) {
            flags.push(format!("λ = {}: remainder slope {:.3} is not negative", r.lambda, d.remainder_slope));
        }
    }
    let summary: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let d = &r.decomposition;
            vec![
                num(r.lambda),
                sign_label(r.sign).into(),
                num(r.round_trip),
                num(r.s_relation),
                num(d.remainder_slope),
                num(d.norm_mismatch),
                num(d.shell_rel_error),
                num(r.interior_residual),
                num(r.b_star),
            ]
        })
        .collect();
    let mut profiles = Vec::new();
    for r in &rows {
        for (g, p) in set.grids.iter().zip(&r.profiles) {
            for (n, v) in p.iter().enumerate() {
                profiles.push(vec![num(r.lambda), format!("phi:{}", channel_label(g)), n.to_string(), num(*v)]);
            }
        }
        for (n, v) in r.decomposition.remainder_profile.iter().enumerate() {
            profiles.push(vec![num(r.lambda), "remainder".into(), n.to_string(), num(*v)]);
        }
    }
    out.json("eigenfun.json", "eigenfun", cfg, tol, &serde_json::json!({ "v": v, "rows": rows, "flags": flags }))?;
    out.csv(
        "eigenfun.csv",
        &[
            "lambda",
            "sign",
            "round_trip",
            "s_relation",
            "remainder_slope",
            "norm_mismatch",
            "shell_rel_error",
            "interior_residual",
            "b_star",
        ],
        &summary,
    )?;
    out.csv("eigenfun_profiles.csv", &["lambda", "series", "shell", "value"], &profiles)?;
    finish(flags)
}

#[derive(Serialize)]
struct SweepRow {
    lambda: f64,
    channel: String,
    lap: LapReport,
    holder_omega: Option<f64>,
    route_discrepancy: Option<f64>,
    /// `‖f^{−1}R(λ ± i0)ψ‖ / ‖fψ‖`.
    resolvent_quotient: f64,
}

/// Hölder fit of `λ ↦ R(λ ± i0)ψ` over every pair of λ in the sweep.
#[derive(Serialize)]
struct LambdaHolder {
    channel: String,
    steps: Vec<f64>,
    quotients: Vec<f64>,
    omega: Option<f64>,
}

pub fn cmd_sweep(cfg: &RunConfig, tol: &Tolerances, out: &mut OutDir) -> Result<(), CliError> {
    let set = channel_set(cfg)?;
    let sign = cfg.job.sign;
    let psi: Vec<Source> = set.grids.iter().map(|g| Source::compact(packet(g, &cfg.job.source))).collect();
    let per_lambda = run_parallel(&cfg.lambdas, |lambda| -> Result<Vec<(SweepRow, WaveField)>, CliError> {
        set.grids
            .iter()
            .zip(&psi)
            .map(|(g, src)| {
                let lap = lap_diagnostic(g, lambda, src, &cfg.eps)?;
                let rec = limiting_routes(g, lambda, sign, src, None, &LimitingOptions::default())?;
                let row = SweepRow {
                    lambda,
                    channel: channel_label(g),
                    lap,
                    holder_omega: rec.holder.as_ref().map(|h| h.omega),
                    route_discrepancy: rec.discrepancy,
                    resolvent_quotient: weighted_l2(&rec.direct.field, -1.0) / weighted_l2(&src.field, 1.0),
                };
                Ok((row, rec.direct.field))
            })
            .collect()
    })?;
    let mut holder = Vec::new();
    for (c, g) in set.grids.iter().enumerate() {
        let den = weighted_l2(&psi[c].field, 1.0);
        let (steps, quotients): (Vec<f64>, Vec<f64>) = (0..per_lambda.len())
            .flat_map(|i| (i + 1..per_lambda.len()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (a, b) = (&per_lambda[i][c], &per_lambda[j][c]);
                ((b.0.lambda - a.0.lambda).abs(), weighted_l2(&b.1.sub(&a.1), -1.0) / den)
            })
            .unzip();
        holder.push(LambdaHolder {
            channel: channel_label(g),
            omega: log_log_fit(&steps, &quotients).map(|f| f.slope),
            steps,
            quotients,
        });
    }
    let rows: Vec<SweepRow> = per_lambda.into_iter().flatten().map(|(r, _)| r).collect();
    let mut flags = Vec::new();
    for r in &rows {
        let change = r.lap.last_change.iter().cloned().fold(0.0, f64::max);
        if !r.lap.stable(tol.lap_change) {
            flags.push(format!("λ = {} {}: LAP quotients moved by {change:.2e}", r.lambda, r.channel));
        }
        if !r.holder_omega.is_some_and(|w| w > 0.0) {
            flags.push(format!("λ = {} {}: no positive Hölder exponent", r.lambda, r.channel));
        }
    }
    let summary: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![num(r.lambda), r.channel.clone()];
            v.extend(r.lap.sup.iter().map(|x| num(*x)));
            v.push(num(r.lap.last_change.iter().cloned().fold(0.0, f64::max)));
            v.push(r.holder_omega.map(num).unwrap_or_default());
            v.push(r.route_discrepancy.map(num).unwrap_or_default());
            v.push(num(r.resolvent_quotient));
            v
        })
        .collect();
    let quotients: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            r.lap.eps.iter().zip(&r.lap.quotients).map(move |(e, q)| {
                let mut v = vec![num(r.lambda), r.channel.clone(), num(*e)];
                v.extend(q.iter().map(|x| num(*x)));
                v
            })
        })
        .collect();
    out.json(
        "sweep.json",
        "sweep",
        cfg,
        tol,
        &serde_json::json!({ "rows": rows, "lambda_holder": holder, "flags": flags }),
    )?;
    out.csv(
        "sweep.csv",
        &[
            "lambda",
            "channel",
            "sup_b_star",
            "sup_pf",
            "sup_ell",
            "sup_rp2",
            "last_change",
            "holder_omega",
            "route_discrepancy",
            "resolvent_quotient",
        ],
        &summary,
    )?;
    out.csv(
        "sweep_quotients.csv",
        &["lambda", "channel", "eps", "q_b_star", "q_pf", "q_ell", "q_rp2"],
        &quotients,
    )?;
    finish(flags)
}
