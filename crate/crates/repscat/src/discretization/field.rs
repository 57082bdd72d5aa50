//! Nodal fields on a channel grid and the conjugate operator `A`.

use std::sync::Arc;

use num_complex::Complex64;

use super::grid::ChannelGrid;

#[derive(Clone, Debug)]
pub struct WaveField {
    pub grid: Arc<ChannelGrid>,
    /// Physical values `u` at the unknowns.
    pub values: Vec<Complex64>,
}

impl WaveField {
    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<ChannelGrid>, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.x(k))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `∫ ū w dx`.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (a, b))| a.conj() * b * self.grid.jac(k))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn conj(&self) -> Self {
        self.with_values(self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &WaveField) -> Self {
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &WaveField) -> Self {
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    /// Pointwise product with a function of `x`.
    pub fn map_x(&self, mut f: impl FnMut(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| f(self.grid.x(k), *v))
            .collect();
        self.with_values(values)
    }

    pub fn derivative(&self) -> Self {
        self.with_values(self.grid.derivative(&self.values))
    }

    pub fn second_derivative(&self) -> Self {
        self.with_values(self.grid.second_derivative(&self.values))
    }
}

/// `p^f u = −i ∂f·∂u` on the reduced channel field.
pub fn apply_pf(u: &WaveField) -> WaveField {
    let g = &u.grid;
    let esc = g.spec.escape();
    let d = g.spec.dim as f64;
    let du = u.derivative();
    let values = (0..g.len())
        .map(|k| {
            let x = g.x(k);
            let fx = x.signum() * esc.f_s(x);
            let radial = if g.is_line() { 0.0 } else { (d - 1.0) / (2.0 * x) };
            -Complex64::i() * fx * (du.values[k] - radial * u.values[k])
        })
        .collect();
    u.with_values(values)
}

/// `A u = p^f u − (i/2)(Δf) u`.
pub fn apply_a(u: &WaveField) -> WaveField {
    let g = &u.grid;
    let esc = g.spec.escape();
    let pf = apply_pf(u);
    let values = (0..g.len())
        .map(|k| {
            let lap = esc.radial::<3>(g.x(k)).lap_f.value();
            pf.values[k] - Complex64::i() * 0.5 * lap * u.values[k]
        })
        .collect();
    u.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::{Channel, GridConfig};
    use crate::discretization::potential::PotentialSpec;
    use crate::geometry_phase::phase::theta;

    fn line(l: f64) -> Arc<ChannelGrid> {
        let cfg = GridConfig {
            length: l,
            order: 8,
            points_per_wavelength: 24.0,
            ..GridConfig::default()
        };
        Arc::new(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).unwrap())
    }

    #[test]
    fn a_on_plane_phase_has_leading_value() {
        let g = line(160.0);
        let esc = g.spec.escape();
        let lambda = 1.0;
        let u = WaveField::from_fn(&g, |x| Complex64::from_polar(1.0, theta(&esc, lambda, x)));
        let au = apply_a(&u);
        let k = (0..g.len()).min_by(|a, b| (g.x(*a) - 100.0).abs().total_cmp(&(g.x(*b) - 100.0).abs())).unwrap();
        let r = g.x(k);
        let ratio = au.values[k] / u.values[k];
        assert!((ratio.re - (1.0 + lambda / r)).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn a_is_symmetric_on_real_interior_fields() {
        let g = line(80.0);
        let u = WaveField::from_fn(&g, |x| Complex64::new((-(x - 30.0).powi(2) / 4.0).exp() * (2.0 * x).cos(), 0.0));
        let v = apply_a(&u);
        assert!(u.inner(&v).im.abs() < 1e-10);
    }

    #[test]
    fn constant_field_gives_half_laplacian() {
        let g = line(80.0);
        let u = WaveField::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        let au = apply_a(&u);
        for k in (0..g.len()).step_by(501) {
            let r = g.x(k).abs();
            if !(4.0..70.0).contains(&r) {
                continue;
            }
            let fpp = -0.5 * r.powf(-1.5);
            assert!((au.values[k] - Complex64::new(0.0, -0.5 * fpp)).norm() < 1e-10);
        }
    }
}
