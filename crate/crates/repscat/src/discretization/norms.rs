//! Dyadic-shell norms `B`, `B*` and the `B₀*` profile.

use serde::{Deserialize, Serialize};

use super::field::WaveField;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellNorms {
    /// `‖F_n u‖` for each shell.
    pub shell_l2: Vec<f64>,
    /// `Σ_n 2^{n/2} ‖F_n u‖`.
    pub b: f64,
    /// `max_n 2^{−n/2} ‖F_n u‖`.
    pub b_star: f64,
    /// `2^{−n/2} ‖F_n u‖`.
    pub profile: Vec<f64>,
    pub complete: usize,
}

pub fn shell_l2(u: &WaveField) -> Vec<f64> {
    let g = &u.grid;
    g.shells
        .shells
        .iter()
        .map(|idx| {
            idx.iter()
                .map(|&k| u.values[k].norm_sqr() * g.jac(k))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

pub fn shell_norms(u: &WaveField) -> ShellNorms {
    let l2 = shell_l2(u);
    let b = l2.iter().enumerate().map(|(n, v)| 2f64.powf(0.5 * n as f64) * v).sum();
    let profile: Vec<f64> = l2.iter().enumerate().map(|(n, v)| 2f64.powf(-0.5 * n as f64) * v).collect();
    let b_star = profile.iter().cloned().fold(0.0, f64::max);
    ShellNorms {
        shell_l2: l2,
        b,
        b_star,
        profile,
        complete: u.grid.shells.complete,
    }
}

/// `‖f^s u‖_{L²}`.
pub fn weighted_l2(u: &WaveField, s: f64) -> f64 {
    let g = &u.grid;
    let esc = g.spec.escape();
    (0..g.len())
        .map(|k| u.values[k].norm_sqr() * g.jac(k) * esc.f(g.x(k)).powf(2.0 * s))
        .sum::<f64>()
        .sqrt()
}
