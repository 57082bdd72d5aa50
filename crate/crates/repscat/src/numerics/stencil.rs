//! Finite-difference weights by Fornberg's recursion.

/// Weights `w[j]` such that `g^{(m)}(x0) ≈ Σ_j w[j] g(xs[j])`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Central stencil of even `order` on the unit lattice, as offsets
/// `-K..=K` with `K = order / 2`.
#[derive(Clone, Debug)]
pub struct CentralStencil {
    pub half_width: usize,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl CentralStencil {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2 && order % 2 == 0, "stencil order must be even");
        let k = order / 2;
        let xs: Vec<f64> = (-(k as i64)..=k as i64).map(|j| j as f64).collect();
        Self {
            half_width: k,
            d1: fornberg(0.0, &xs, 1),
            d2: fornberg(0.0, &xs, 2),
        }
    }

    /// Coefficient of offset `j` in the second-derivative stencil.
    pub fn c2(&self, j: i64) -> f64 {
        let k = self.half_width as i64;
        if j.abs() > k {
            0.0
        } else {
            self.d2[(j + k) as usize]
        }
    }

    pub fn c1(&self, j: i64) -> f64 {
        let k = self.half_width as i64;
        if j.abs() > k {
            0.0
        } else {
            self.d1[(j + k) as usize]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_fourth_order_weights() {
        let s = CentralStencil::new(4);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in s.d2.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let e1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in s.d1.iter().zip(e1) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn eighth_order_center_weight() {
        let s = CentralStencil::new(8);
        assert!((s.c2(0) + 205.0 / 72.0).abs() < 1e-13);
        assert!((s.c2(4) + 1.0 / 560.0).abs() < 1e-15);
    }
}
