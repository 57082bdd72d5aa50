//! Pass/fail table over the identity suite.

use repscat::geometry_phase::conjugate::{factorization_convergence, PhaseContext};
use repscat::geometry_phase::phase::eikonal_residual;
use repscat::geometry_phase::weight::{weight_sweep, WeightParams};
use repscat::scattering::wave::parseval_check;
use repscat::{Complex64, Sign};
use serde::Serialize;

use crate::commands::{angular_vector, channel_set, corpus, eigen_row, run_parallel};
use crate::config::{RunConfig, Tolerances};
use crate::error::CliError;
use crate::output::{num, OutDir};

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub name: String,
    /// What is being checked, in words.
    pub identity: String,
    pub lambda: Option<f64>,
    pub measured: f64,
    /// `measured` must be at least this (`"ge"`) or at most this (`"le"`).
    pub threshold: f64,
    pub relation: &'static str,
    /// The asymptotic order the measurement is compared with, when there is one.
    pub predicted: Option<f64>,
    pub pass: bool,
}

fn at_most(name: &str, identity: &str, lambda: Option<f64>, measured: f64, tol: f64) -> AuditRow {
    AuditRow {
        name: name.into(),
        identity: identity.into(),
        lambda,
        measured,
        threshold: tol,
        relation: "le",
        predicted: None,
        pass: measured <= tol,
    }
}

fn at_least(name: &str, identity: &str, lambda: Option<f64>, measured: f64, bound: f64, predicted: Option<f64>) -> AuditRow {
    AuditRow {
        name: name.into(),
        identity: identity.into(),
        lambda,
        measured,
        threshold: bound,
        relation: "ge",
        predicted,
        pass: measured >= bound,
    }
}

fn weight_rows() -> Result<Vec<AuditRow>, CliError> {
    let params = [0.1, 0.5, 1.0]
        .iter()
        .flat_map(|&d| (0..=10).map(move |nu| WeightParams::new(1.0, d, nu)))
        .collect::<Result<Vec<_>, _>>()?;
    let sw = weight_sweep(&params, 1.0, 1e4, 400);
    let identity = "weight function bounds over delta in {0.1, 0.5, 1}, nu in 0..=10, f in [1, 1e4]";
    Ok(vec![
        at_least("weight_lower", identity, None, sw.lower, f64::MIN_POSITIVE, None),
        at_most("weight_upper_ratio", identity, None, sw.upper_ratio, 1.0 + 1e-12),
        at_least("weight_derivative_lower", identity, None, sw.derivative_lower, f64::MIN_POSITIVE, None),
        at_most("weight_derivative_upper_ratio", identity, None, sw.derivative_upper_ratio, 1.0 + 1e-12),
        AuditRow {
            pass: sw.passes(),
            ..at_most("weight_higher_derivatives", identity, None, sw.higher.iter().cloned().fold(0.0, f64::max), f64::MAX)
        },
    ])
}

pub fn audit_rows(cfg: &RunConfig, tol: &Tolerances) -> Result<Vec<AuditRow>, CliError> {
    let spec = &cfg.potential;
    let phase = cfg.job.phase.phase();
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let rep = eikonal_residual(lambda, spec, &phase, (10.0, 1e3), 60)?;
        rows.push(at_least(
            "eikonal_order",
            "decay exponent of the eikonal residual in f over [10, 1e3]",
            Some(lambda),
            rep.exponent(),
            rep.predicted_exponent - tol.eikonal_margin,
            Some(rep.predicted_exponent),
        ));
    }

    let lo = cfg.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cfg.lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ctx = PhaseContext::new(spec.clone(), (lo, hi))?;
    let order = 4;
    let fac = factorization_convergence(&ctx, Complex64::new(lo, 0.1), Sign::Plus, 50.0, 2.0, 0.2, order, 2)?;
    let observed = fac.observed_orders.iter().cloned().fold(f64::INFINITY, f64::min);
    rows.push(at_least(
        "factorization_order",
        "observed convergence order of the conjugate-operator factorization under two halvings",
        Some(lo),
        observed,
        order as f64 - tol.factorization_margin,
        Some(order as f64),
    ));

    rows.extend(weight_rows()?);

    let set = channel_set(cfg)?;
    let psis = corpus(&set, cfg.seed, cfg.job.corpus_size);
    let v = angular_vector(cfg, set.basis)?;
    let per_lambda = run_parallel(&cfg.lambdas, |lambda| -> Result<Vec<AuditRow>, CliError> {
        let mut out = Vec::new();
        let mut worst: f64 = 0.0;
        for psi in &psis {
            let rep = parseval_check(&set, lambda, psi)?;
            worst = worst.max(rep.rel_error_plus).max(rep.rel_error_minus);
        }
        out.push(at_most(
            "parseval",
            "‖F±ψ‖² against the spectral density ⟨(R₊ − R₋)ψ, ψ⟩/2πi over the seeded corpus",
            Some(lambda),
            worst,
            tol.parseval,
        ));
        let e = eigen_row(&set, lambda, Sign::Plus, &v)?;
        out.push(at_most(
            "round_trip",
            "v recovered as 2πi F⁺ψ⁺[v] from the generalized eigenfunction",
            Some(lambda),
            e.round_trip,
            tol.round_trip,
        ));
        out.push(at_most(
            "norm_equality",
            "‖ξ₊‖ = ‖ξ₋‖ for the generalized eigenfunction",
            Some(lambda),
            e.decomposition.norm_mismatch,
            tol.norm_equality,
        ));
        out.push(at_most(
            "shell_average",
            "extrapolated shell average of 2π|φ|² against ‖ξ₊‖² + ‖ξ₋‖²",
            Some(lambda),
            e.decomposition.shell_rel_error,
            tol.shell_average,
        ));
        Ok(out)
    })?;
    rows.extend(per_lambda.into_iter().flatten());
    Ok(rows)
}

pub fn cmd_audit(cfg: &RunConfig, tol: &Tolerances, out: &mut OutDir) -> Result<(), CliError> {
    let rows = audit_rows(cfg, tol)?;
    for r in &rows {
        let lambda = r.lambda.map(|l| format!(" λ={l}")).unwrap_or_default();
        let cmp = if r.relation == "ge" { "≥" } else { "≤" };
        let predicted = r.predicted.map(|p| format!(" (predicted {p:.3})")).unwrap_or_default();
        println!(
            "{} {}{lambda}: {:.4e} {cmp} {:.4e}{predicted}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.threshold
        );
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| match r.lambda {
            Some(l) => format!("{} at λ = {l}", r.name),
            None => r.name.clone(),
        })
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.lambda.map(num).unwrap_or_default(),
                num(r.measured),
                r.relation.to_string(),
                num(r.threshold),
                r.predicted.map(num).unwrap_or_default(),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
                r.identity.clone(),
            ]
        })
        .collect();
    out.json(
        "audit.json",
        "audit",
        cfg,
        tol,
        &serde_json::json!({ "rows": rows, "all_pass": failed.is_empty() }),
    )?;
    out.csv(
        "audit.csv",
        &["name", "lambda", "measured", "relation", "threshold", "predicted", "verdict", "identity"],
        &table,
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Flagged(format!("audit rows failed: {}", failed.join(", "))))
    }
}
