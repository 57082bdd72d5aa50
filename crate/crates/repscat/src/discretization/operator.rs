//! Banded assembly of `H − z` in Liouville variables.
//!
//! Row `i` reads `−½ Σ_j c_j v_{i+j} + [Q_s + J²(V − z)] v_i = J^{3/2} ψ_i`
//! with `V = −½|x|^α + q + c/(2x²)`; the interior matrix is symmetric.

use num_complex::Complex64;

use super::boundary::{Closures, EndClosure};
use super::grid::ChannelGrid;
use crate::numerics::banded::BandMatrix;

/// `−½|x|^α + q(|x|) + c/(2x²)` at `x`.
pub fn effective_potential(grid: &ChannelGrid, x: f64) -> f64 {
    let v = grid.spec.potential(x);
    if grid.is_line() {
        v
    } else {
        v + 0.5 * grid.centrifugal / (x * x)
    }
}

/// Where a stencil reference to signed node `j` lands.
enum Target {
    Unknown(usize, f64),
    Ghost { right: bool, g: usize },
    Zero,
}

fn locate(grid: &ChannelGrid, j: i64) -> Target {
    let n = grid.n as i64;
    if let Some(k) = grid.unknown(j) {
        return Target::Unknown(k, 1.0);
    }
    if j > n {
        return Target::Ghost {
            right: true,
            g: (j - n) as usize,
        };
    }
    if grid.is_line() {
        return Target::Ghost {
            right: false,
            g: (-n - j) as usize,
        };
    }
    match grid.origin_reflection(j) {
        Some((k, p)) => Target::Unknown(k, p),
        None => Target::Zero,
    }
}

fn end_index(grid: &ChannelGrid, right: bool, back: usize) -> usize {
    if right {
        grid.len() - 1 - back
    } else {
        back
    }
}

fn closure_for<'a>(c: &'a Closures, right: bool) -> &'a EndClosure {
    if right {
        &c.right
    } else {
        c.left.as_ref().expect("line grids carry a left closure")
    }
}

/// Diagonal `Q_s + J²(V + cap − z)` at unknown `k`.
fn diagonal(grid: &ChannelGrid, c: &Closures, z: Complex64, k: usize) -> Complex64 {
    let nd = grid.node(grid.signed(k));
    let pot = effective_potential(grid, nd.x) + c.cap_at(nd.x) - z;
    nd.qs + nd.jac * nd.jac * pot
}

/// Assembles `H − z`, returning the matrix and the boundary contribution to
/// the right-hand side (already in scaled units).
pub fn assemble(grid: &ChannelGrid, z: Complex64, closures: &Closures) -> (BandMatrix, Vec<Complex64>) {
    let n = grid.len();
    let kk = grid.ghosts();
    let mut m = BandMatrix::zeros(n, kk, kk);
    let mut shift = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let i = grid.signed(k);
        m.add(k, k, diagonal(grid, closures, z, k));
        for o in -(kk as i64)..=(kk as i64) {
            let w = Complex64::new(-0.5 * grid.stencil.c2(o), 0.0);
            match locate(grid, i + o) {
                Target::Unknown(j, s) => m.add(k, j, w * s),
                Target::Zero => {}
                Target::Ghost { right, g } => {
                    let rule = &closure_for(closures, right).rules[g - 1];
                    for (back, c) in &rule.terms {
                        m.add(k, end_index(grid, right, *back), w * c);
                    }
                    shift[k] -= w * rule.constant;
                }
            }
        }
    }
    (m, shift)
}

/// Boundary contribution to the right-hand side alone.
pub fn boundary_shift(grid: &ChannelGrid, closures: &Closures) -> Vec<Complex64> {
    let n = grid.len();
    let kk = grid.ghosts() as i64;
    let mut shift = vec![Complex64::new(0.0, 0.0); n];
    let rows = (0..(kk as usize).min(n)).chain(n.saturating_sub(kk as usize)..n);
    for k in rows {
        let i = grid.signed(k);
        for o in -kk..=kk {
            if let Target::Ghost { right, g } = locate(grid, i + o) {
                let w = -0.5 * grid.stencil.c2(o);
                shift[k] -= w * closure_for(closures, right).rules[g - 1].constant;
            }
        }
    }
    shift
}

/// Right-hand side `J^{3/2} ψ` plus the boundary shift.
pub fn scaled_rhs(grid: &ChannelGrid, psi: &[Complex64], shift: &[Complex64]) -> Vec<Complex64> {
    psi.iter()
        .enumerate()
        .map(|(k, p)| p * grid.jac(k).powf(1.5) + shift[k])
        .collect()
}

/// `(H − z)u` at every unknown, with ghosts supplied by `closures`.
pub fn apply(grid: &ChannelGrid, z: Complex64, closures: &Closures, u: &[Complex64]) -> Vec<Complex64> {
    let (m, shift) = assemble(grid, z, closures);
    let v = grid.to_v(u);
    let mv = m.matvec(&v);
    mv.iter()
        .enumerate()
        .map(|(k, x)| (x - shift[k]) / grid.jac(k).powf(1.5))
        .collect()
}
