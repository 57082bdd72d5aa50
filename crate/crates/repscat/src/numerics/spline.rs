//! Natural cubic spline on increasing knots.

use crate::numerics::jet::RJet;
use crate::Error;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, Error> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::Validation(
                "tabulated profile needs at least 3 (x, y) pairs".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "tabulated profile abscissae must be strictly increasing".into(),
            ));
        }
        // tridiagonal system for second derivatives, natural ends
        let mut a = vec![0.0; n];
        let mut b = vec![1.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(Self { xs, ys, m })
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    /// Jet of the spline at `x`; exact within one segment.
    pub fn jet<const N: usize>(&self, x: RJet<N>) -> RJet<N> {
        let i = self.segment(x.value());
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x.add_scalar(-x1)).scale(-1.0 / h);
        let b = x.add_scalar(-x0).scale(1.0 / h);
        let lin = a.scale(self.ys[i]) + b.scale(self.ys[i + 1]);
        let cub = (a.powi(3) - a).scale(self.m[i] * h * h / 6.0)
            + (b.powi(3) - b).scale(self.m[i + 1] * h * h / 6.0);
        lin + cub
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet::<1>(RJet::constant(x)).value()
    }
}
