//! Banded complex matrices and LU factorization with partial pivoting.
//!
//! Storage is row-major: row `i` holds columns `i - kl ..= i + kl + ku`, the
//! extra `kl` super-diagonals absorbing pivoting fill-in.

use num_complex::Complex64;

use crate::Error;

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in j0..=j1 {
                acc += self.data[self.idx(i, j)] * x[j];
            }
            *yi = acc;
        }
        y
    }

    /// Largest `|A_ij - A_ji|` over the band; zero for a symmetric matrix.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let j1 = (i + self.ku.min(self.kl)).min(self.n - 1);
            for j in i..=j1 {
                worst = worst.max((self.get(i, j) - self.get(j, i)).norm());
            }
        }
        worst
    }

    pub fn factor(mut self) -> Result<BandLu, Error> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..n {
            let rmax = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = self.data[self.idx(i, i)].norm();
            for r in i + 1..=rmax {
                let v = self.data[self.idx(r, i)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[i] = p;
            if best == 0.0 || best < 1e-300 * scale.max(1.0) {
                return Err(Error::Numerical(format!(
                    "singular banded matrix at pivot {i}"
                )));
            }
            let cmax = (i + reach).min(n - 1);
            if p != i {
                for c in i..=cmax {
                    let a = self.idx(i, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(i, i)];
            for r in i + 1..=rmax {
                let ri = self.idx(r, i);
                let m = self.data[ri] / d;
                self.data[ri] = m;
                if m == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in i + 1..=cmax {
                    let ic = self.idx(i, c);
                    let rc = self.idx(r, c);
                    let t = self.data[ic];
                    self.data[rc] -= m * t;
                }
            }
        }
        Ok(BandLu { a: self, piv })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.a.n;
        let kl = self.a.kl;
        let reach = kl + self.a.ku;
        let mut x = b.to_vec();
        for i in 0..n {
            let p = self.piv[i];
            if p != i {
                x.swap(i, p);
            }
            let xi = x[i];
            for r in i + 1..=(i + kl).min(n - 1) {
                x[r] -= self.a.data[self.a.idx(r, i)] * xi;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for c in i + 1..=(i + reach).min(n - 1) {
                acc -= self.a.data[self.a.idx(i, c)] * x[c];
            }
            x[i] = acc / self.a.data[self.a.idx(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut m: Vec<Vec<Complex64>> = a.to_vec();
        let mut x = b.to_vec();
        for i in 0..n {
            let p = (i..n)
                .max_by(|&r, &s| m[r][i].norm().partial_cmp(&m[s][i].norm()).unwrap())
                .unwrap();
            m.swap(i, p);
            x.swap(i, p);
            for r in i + 1..n {
                let f = m[r][i] / m[i][i];
                for c in i..n {
                    let t = m[i][c];
                    m[r][c] -= f * t;
                }
                let t = x[i];
                x[r] -= f * t;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for c in i + 1..n {
                acc -= m[i][c] * x[c];
            }
            x[i] = acc / m[i][i];
        }
        x
    }

    #[test]
    fn matches_dense_elimination_with_pivoting() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, kl, ku) = (40, 3, 2);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal forces row exchanges
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    * if i == j { 0.01 } else { 1.0 };
                band.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let xd = dense_solve(&dense, &b);
        let lu = band.clone().factor().unwrap();
        let xb = lu.solve(&b);
        for (p, q) in xd.iter().zip(&xb) {
            assert!((p - q).norm() < 1e-10 * (1.0 + p.norm()));
        }
        let r = band.matvec(&xb);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).norm() < 1e-11);
        }
    }
}
