//! Liouville-mapped graded grids for one angular channel.
//!
//! A unit-spaced computational variable `ξ` is mapped to `x = X(ξ)` with
//! `dX/dξ = J = 1/ρ(x)`. The node density `ρ` follows the local momentum
//! `√(2λ_max + |x|^α)` plus a geometric grading `1/√(h₀² + (x/β)²)` toward
//! the origin, where `|x|^α` is not smooth. Fields are stored as physical values `u`; the operator works with
//! `v = J^{−1/2} u`, in which the kinetic term is a constant-coefficient
//! stencil.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::potential::PotentialSpec;
use crate::numerics::jet::RJet;
use crate::numerics::quadrature::GaussLegendre;
use crate::numerics::stencil::{fornberg, CentralStencil};
use crate::Error;

/// Angular channel of the reduced problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    /// `d = 1` on the whole line.
    Line,
    /// Spherical harmonic degree `ℓ` of a radial problem in `d ≥ 2`.
    Radial { ell: u32 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Truncation radius `L`.
    pub length: f64,
    /// Even stencil order.
    pub order: usize,
    pub points_per_wavelength: f64,
    pub lambda_max: f64,
    /// Minimum number of complete dyadic shells required.
    pub n_min: u32,
    pub node_limit: usize,
    /// Node spacing at the origin.
    pub origin_spacing: f64,
    /// Nodes per unit of `ln x` in the origin grading.
    pub origin_grading: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            length: 400.0,
            order: 12,
            points_per_wavelength: 20.0,
            lambda_max: 2.0,
            n_min: 4,
            node_limit: 5_000_000,
            origin_spacing: 1e-4,
            origin_grading: 64.0,
        }
    }
}

/// Dyadic shells `F_n = {2^n ≤ f < 2^{n+1}}` as lists of unknown indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellPartition {
    pub shells: Vec<Vec<usize>>,
    /// Number of shells lying entirely inside the grid.
    pub complete: usize,
    pub f_end: f64,
}

#[derive(Clone, Debug)]
struct Density {
    scale: f64,
    momentum: f64,
    lambda_max: f64,
    alpha: f64,
    h0: f64,
    beta: f64,
    /// Pure `β/x` grading from `x = h0` instead of a capped grading from 0.
    log_origin: bool,
}

impl Density {
    fn jet<const N: usize>(&self, x: RJet<N>) -> RJet<N> {
        let x2 = x * x;
        let kin = x2
            .add_scalar(1.0)
            .powf(0.5 * self.alpha)
            .add_scalar(2.0 * self.lambda_max + 1.0)
            .sqrt()
            .scale(self.momentum);
        let (kin, grading) = if self.log_origin {
            (kin * x2 * x2.add_scalar(1.0).recip(), x.recip().scale(self.beta))
        } else {
            let g = x2
                .scale(1.0 / (self.beta * self.beta))
                .add_scalar(self.h0 * self.h0)
                .powf(-0.5);
            (kin, g)
        };
        (kin + grading).scale(self.scale)
    }

    fn start(&self) -> f64 {
        if self.log_origin {
            self.h0
        } else {
            0.0
        }
    }

    fn value(&self, x: f64) -> f64 {
        self.jet::<1>(RJet::constant(x)).value()
    }
}

/// A graded grid for one channel, with `order/2` ghost nodes past each end.
#[derive(Clone, Debug)]
pub struct ChannelGrid {
    pub spec: PotentialSpec,
    pub channel: Channel,
    pub config: GridConfig,
    pub stencil: CentralStencil,
    /// Index of the last interior node on the positive side; `x_n = L`.
    pub n: usize,
    /// `ℓ(ℓ+d−2) + (d−1)(d−3)/4`, zero on the line.
    pub centrifugal: f64,
    pub shells: ShellPartition,
    hx: Vec<f64>,
    hj: Vec<f64>,
    hjx: Vec<f64>,
    hqs: Vec<f64>,
}

/// Geometric data at one signed node.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub x: f64,
    pub jac: f64,
    pub jac_x: f64,
    pub qs: f64,
}

impl ChannelGrid {
    pub fn new(spec: &PotentialSpec, channel: Channel, config: GridConfig) -> Result<Self, Error> {
        let l = config.length;
        if !(l >= 4.0) || !l.is_finite() {
            return Err(Error::Validation(format!("grid length L = {l} must be at least 4")));
        }
        if config.order < 2 || config.order > 12 || config.order % 2 != 0 {
            return Err(Error::Validation(format!(
                "stencil order {} must be even and in 2..=12",
                config.order
            )));
        }
        if !(config.points_per_wavelength > 0.0) || !(config.origin_spacing > 0.0) || !(config.origin_grading > 0.0) {
            return Err(Error::Validation("grid resolution parameters must be positive".into()));
        }
        let centrifugal = match channel {
            Channel::Line => {
                if spec.dim != 1 {
                    return Err(Error::Validation("the line channel needs d = 1".into()));
                }
                0.0
            }
            Channel::Radial { ell } => {
                if spec.dim < 2 {
                    return Err(Error::Validation("radial channels need d ≥ 2".into()));
                }
                let d = spec.dim as f64;
                let l = ell as f64;
                l * (l + d - 2.0) + (d - 1.0) * (d - 3.0) / 4.0
            }
        };
        let esc = spec.escape();
        let f_end = esc.f(l);
        let complete = (f_end.log2().floor() as i64).max(0) as usize;
        if complete < config.n_min as usize {
            return Err(Error::Validation(format!(
                "L = {l} gives f(L) = {f_end:.3}, only {complete} complete shells; at least {} required",
                config.n_min
            )));
        }
        let mut density = Density {
            scale: 1.0,
            momentum: config.points_per_wavelength / (2.0 * PI),
            lambda_max: config.lambda_max.max(0.0),
            alpha: spec.alpha,
            h0: config.origin_spacing,
            beta: config.origin_grading,
            log_origin: centrifugal < 0.0,
        };
        let raw = integrate_density(&density, l);
        let estimate = match channel {
            Channel::Line => 2.0 * raw,
            Channel::Radial { .. } => raw,
        };
        if !(estimate < config.node_limit as f64) {
            return Err(Error::Validation(format!(
                "resolution budget exceeded: about {estimate:.3e} nodes for L = {l} (limit {})",
                config.node_limit
            )));
        }
        let n = raw.ceil().max(8.0) as usize;
        density.scale = n as f64 / raw;
        let stencil = CentralStencil::new(config.order);
        let ghosts = stencil.half_width;
        let hx = map_nodes(&density, n + ghosts);
        let mut hj = Vec::with_capacity(hx.len());
        let mut hjx = Vec::with_capacity(hx.len());
        let mut hqs = Vec::with_capacity(hx.len());
        for &x in &hx {
            let r = density.jet::<3>(RJet::variable(x));
            let (p, p1, p2) = (r.c[0], r.c[1], 2.0 * r.c[2]);
            hj.push(1.0 / p);
            hjx.push(-p1 / (p * p));
            hqs.push(0.25 * p2 / p.powi(3) - 0.375 * p1 * p1 / p.powi(4));
        }
        let mut grid = Self {
            spec: spec.clone(),
            channel,
            config,
            stencil,
            n,
            centrifugal,
            shells: ShellPartition {
                shells: Vec::new(),
                complete,
                f_end,
            },
            hx,
            hj,
            hjx,
            hqs,
        };
        grid.config.length = grid.hx[n];
        grid.shells = grid.build_shells();
        Ok(grid)
    }

    fn build_shells(&self) -> ShellPartition {
        let esc = self.spec.escape();
        let f_end = esc.f(self.length());
        let top = f_end.log2().floor().max(0.0) as usize;
        let mut shells = vec![Vec::new(); top + 1];
        for k in 0..self.len() {
            let f = esc.f(self.x(k));
            let s = (f.log2().floor().max(0.0) as usize).min(top);
            shells[s].push(k);
        }
        while shells.last().is_some_and(|s| s.is_empty()) {
            shells.pop();
        }
        ShellPartition {
            shells,
            complete: top,
            f_end,
        }
    }

    pub fn length(&self) -> f64 {
        self.hx[self.n]
    }

    pub fn ghosts(&self) -> usize {
        self.stencil.half_width
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Number of unknowns.
    pub fn len(&self) -> usize {
        match self.channel {
            Channel::Line => 2 * self.n + 1,
            Channel::Radial { .. } => self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_line(&self) -> bool {
        self.channel == Channel::Line
    }

    /// Signed node index of unknown `k`.
    pub fn signed(&self, k: usize) -> i64 {
        match self.channel {
            Channel::Line => k as i64 - self.n as i64,
            Channel::Radial { .. } => k as i64 + 1,
        }
    }

    /// Unknown index of signed node `i`, if it is an unknown.
    pub fn unknown(&self, i: i64) -> Option<usize> {
        match self.channel {
            Channel::Line => {
                let k = i + self.n as i64;
                (0..self.len() as i64).contains(&k).then_some(k as usize)
            }
            Channel::Radial { .. } => (1..=self.n as i64).contains(&i).then(|| (i - 1) as usize),
        }
    }

    /// Geometric data at signed node `i`, ghosts included.
    pub fn node(&self, i: i64) -> Node {
        let a = i.unsigned_abs() as usize;
        let s = if i < 0 { -1.0 } else { 1.0 };
        Node {
            x: s * self.hx[a],
            jac: self.hj[a],
            jac_x: s * self.hjx[a],
            qs: self.hqs[a],
        }
    }

    pub fn x(&self, k: usize) -> f64 {
        self.node(self.signed(k)).x
    }

    pub fn jac(&self, k: usize) -> f64 {
        self.node(self.signed(k)).jac
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.x(k)).collect()
    }

    /// Quadrature weights for `∫ |u|² dx` over the unknowns.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.jac(k)).collect()
    }

    /// Largest spacing relative to the local wavelength `2π/√(2λ_max + |x|^α)`.
    pub fn resolution_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let x = self.x(k);
            let wl = 2.0 * PI / (2.0 * self.config.lambda_max + x.abs().powf(self.spec.alpha)).sqrt();
            worst = worst.max(self.jac(k) * self.config.points_per_wavelength / wl);
        }
        worst
    }

    /// Whether the grid starts at `x = origin_spacing` on a logarithmic
    /// scale. Used when `c < 0`, where both Frobenius branches are square
    /// integrable and `v ∝ x^{−1/2}u` tends to a constant for the regular one.
    pub fn log_origin(&self) -> bool {
        !self.is_line() && self.centrifugal < 0.0
    }

    /// Unknown and sign standing in for the radial node `j ≤ 0`: odd or even
    /// reflection `v_{−i} = ±v_i` about the origin, or even reflection about
    /// `ξ = ½` on a logarithmic grid.
    pub fn origin_reflection(&self, j: i64) -> Option<(usize, f64)> {
        let Channel::Radial { ell } = self.channel else {
            return None;
        };
        if self.log_origin() {
            return self.unknown(1 - j).map(|k| (k, 1.0));
        }
        if j == 0 {
            return None;
        }
        let p = if ell % 2 == 0 { -1.0 } else { 1.0 };
        self.unknown(-j).map(|k| (k, p))
    }

    /// `v = J^{−1/2} u`.
    pub fn to_v(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter()
            .enumerate()
            .map(|(k, v)| v / self.jac(k).sqrt())
            .collect()
    }

    pub fn from_v(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter()
            .enumerate()
            .map(|(k, w)| w * self.jac(k).sqrt())
            .collect()
    }

    /// Stencil weights in `ξ` for derivative `m` at unknown `k`, using
    /// parity ghosts at the origin and one-sided stencils at the far ends.
    fn xi_stencil(&self, k: usize, m: usize) -> Vec<(usize, f64)> {
        let kk = self.stencil.half_width as i64;
        let i = self.signed(k);
        let lo = match self.channel {
            Channel::Line => -(self.n as i64),
            Channel::Radial { .. } => i64::MIN,
        };
        let hi = self.n as i64;
        let mut out: Vec<(usize, f64)> = Vec::new();
        let push = |out: &mut Vec<(usize, f64)>, j: i64, w: f64| {
            if let Some(idx) = self.unknown(j) {
                out.push((idx, w));
            } else if j <= 0 {
                if let Some((idx, p)) = self.origin_reflection(j) {
                    out.push((idx, p * w));
                }
            }
        };
        if i - kk >= lo && i + kk <= hi {
            let c = if m == 1 { &self.stencil.d1 } else { &self.stencil.d2 };
            for (o, w) in c.iter().enumerate() {
                push(&mut out, i - kk + o as i64, *w);
            }
            return out;
        }
        let width = 2 * kk + 1 + m as i64 - 1;
        let start = if i + kk > hi { hi - width + 1 } else { lo };
        let xs: Vec<f64> = (0..width).map(|o| (start + o - i) as f64).collect();
        let w = fornberg(0.0, &xs, m);
        for (o, wv) in w.iter().enumerate() {
            push(&mut out, start + o as i64, *wv);
        }
        out
    }

    /// `u_x` from nodal values of `u`.
    pub fn derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        let v = self.to_v(u);
        (0..self.len())
            .map(|k| {
                let nd = self.node(self.signed(k));
                let vxi: Complex64 = self.xi_stencil(k, 1).iter().map(|(j, w)| v[*j] * *w).sum();
                (vxi + 0.5 * nd.jac_x * v[k]) / nd.jac.sqrt()
            })
            .collect()
    }

    /// `u_xx` from nodal values of `u`.
    pub fn second_derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        let v = self.to_v(u);
        (0..self.len())
            .map(|k| {
                let nd = self.node(self.signed(k));
                let vxx: Complex64 = self.xi_stencil(k, 2).iter().map(|(j, w)| v[*j] * *w).sum();
                (vxx - 2.0 * nd.qs * v[k]) / nd.jac.powf(1.5)
            })
            .collect()
    }
}

fn integrate_density(d: &Density, l: f64) -> f64 {
    let gl = GaussLegendre::new(8);
    let mut acc = 0.0;
    let mut a = d.start();
    let mut b = if d.log_origin { 2.0 * a } else { d.h0 }.min(l);
    while a < l {
        acc += gl.integrate(a, b, |x| d.value(x));
        a = b;
        b = if b < 1.0 { (2.0 * b).min(l) } else { (1.25 * b).min(l) };
    }
    acc
}

/// Positive-side nodes `X(0..=count)` from `dX/dξ = 1/ρ(X)`.
fn map_nodes(d: &Density, count: usize) -> Vec<f64> {
    let sub = 4;
    let h = 1.0 / sub as f64;
    let g = |x: f64| 1.0 / d.value(x);
    let mut out = Vec::with_capacity(count + 1);
    let mut x = d.start();
    out.push(x);
    for _ in 0..count {
        for _ in 0..sub {
            let k1 = g(x);
            let k2 = g(x + 0.5 * h * k1);
            let k3 = g(x + 0.5 * h * k2);
            let k4 = g(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(alpha: f64, l: f64, order: usize) -> ChannelGrid {
        let cfg = GridConfig {
            length: l,
            order,
            n_min: 0,
            ..GridConfig::default()
        };
        ChannelGrid::new(&PotentialSpec::free(alpha, 1), Channel::Line, cfg).unwrap()
    }

    #[test]
    fn end_node_sits_at_length() {
        let g = line(1.0, 200.0, 4);
        assert!((g.length() - 200.0).abs() < 1e-6, "{}", g.length());
        assert!((g.x(0) + g.length()).abs() < 1e-12);
        assert_eq!(g.x(g.n), 0.0);
    }

    #[test]
    fn shells_count_matches_closed_form() {
        let g = line(1.0, 1000.0, 4);
        assert!((g.shells.f_end - (2.0 * (1000f64.sqrt() - 1.0) + 1.0)).abs() < 1e-3);
        assert_eq!(g.shells.complete, 5);
        let total: usize = g.shells.shells.iter().map(|s| s.len()).sum();
        assert_eq!(total, g.len());
    }

    #[test]
    fn rejects_short_domains_and_budget() {
        let cfg = GridConfig {
            length: 3.0,
            ..GridConfig::default()
        };
        assert!(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).is_err());
        let cfg = GridConfig {
            length: 1e7,
            n_min: 0,
            ..GridConfig::default()
        };
        assert!(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).is_err());
    }

    #[test]
    fn derivatives_of_smooth_field() {
        let g = line(1.0, 60.0, 8);
        let u: Vec<Complex64> = g.xs().iter().map(|x| Complex64::new((0.3 * x).sin(), (0.2 * x).cos())).collect();
        let du = g.derivative(&u);
        let ddu = g.second_derivative(&u);
        for k in (10..g.len() - 10).step_by(97) {
            let x = g.x(k);
            let e1 = Complex64::new(0.3 * (0.3 * x).cos(), -0.2 * (0.2 * x).sin());
            let e2 = Complex64::new(-0.09 * (0.3 * x).sin(), -0.04 * (0.2 * x).cos());
            assert!((du[k] - e1).norm() < 1e-8, "{x}");
            assert!((ddu[k] - e2).norm() < 1e-7, "{x}");
        }
    }

    #[test]
    fn radial_parity_ghosts() {
        let cfg = GridConfig {
            length: 60.0,
            n_min: 0,
            order: 6,
            ..GridConfig::default()
        };
        let g = ChannelGrid::new(&PotentialSpec::free(1.0, 3), Channel::Radial { ell: 0 }, cfg).unwrap();
        assert_eq!(g.centrifugal, 0.0);
        let u: Vec<Complex64> = g.xs().iter().map(|x| Complex64::new((0.7 * x).sin(), 0.0)).collect();
        let du = g.derivative(&u);
        for k in [0usize, 1, 2, 50, 1000] {
            let x = g.x(k);
            assert!((du[k].re - 0.7 * (0.7 * x).cos()).abs() < 1e-9, "{x}");
        }
    }
}
