//! Gauss–Legendre rules, a logarithmic-panel integrator for slowly decaying
//! tails, and a double-exponential rule on `[r, ∞)`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{AddAssign, Mul};

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(c + h * x) * (w * h);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_{r0}^{∞} g(s) ds` using unit panels in `t = ln s`.
///
/// Panels stop once the geometric extrapolation of the remaining tail falls
/// below `tol` relative to the running sum, or at `s = 1e300`.
pub fn integrate_log_tail<F>(r0: f64, mut g: F, tol: f64) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let rule = GaussLegendre::new(10);
    let t_max = 300.0 * std::f64::consts::LN_10;
    let mut t = r0.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev: Option<Complex64> = None;
    let mut quiet = 0;
    while t < t_max {
        let t1 = (t + 1.0).min(t_max);
        let panel: Complex64 = rule.integrate(t, t1, |tt| {
            let s = tt.exp();
            g(s) * s
        });
        sum += panel;
        let scale = sum.norm().max(1e-300);
        let tail = match prev {
            Some(p) if p.norm() > 0.0 => {
                let ratio = panel.norm() / p.norm();
                if ratio < 0.999 {
                    panel.norm() * ratio / (1.0 - ratio)
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        };
        if panel.norm() == 0.0 || tail < tol * scale {
            quiet += 1;
            if quiet >= 2 {
                if tail.is_finite() {
                    if let Some(p) = prev {
                        let ratio = panel.norm() / p.norm().max(1e-300);
                        if ratio < 1.0 {
                            sum += panel * (ratio / (1.0 - ratio));
                        }
                    }
                }
                break;
            }
        } else {
            quiet = 0;
        }
        prev = Some(panel);
        t = t1;
    }
    sum
}

/// Double-exponential quadrature of `∫_r^∞ g(s) ds` with the map
/// `s = r + r·exp((π/2) sinh t)`.
pub fn de_semi_infinite<F>(r: f64, mut g: F, h: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let t_lo = -4.5;
    let t_hi = (2.0 * 680.0 / PI).asinh();
    let n = ((t_hi - t_lo) / h).ceil() as usize;
    let mut acc = 0.0;
    for k in 0..=n {
        let t = t_lo + k as f64 * h;
        if t > t_hi {
            break;
        }
        let e = (0.5 * PI * t.sinh()).exp();
        let s = r + r * e;
        let ds = r * 0.5 * PI * t.cosh() * e;
        let v = g(s) * ds;
        if v.is_finite() {
            acc += v;
        }
    }
    acc * h
}
