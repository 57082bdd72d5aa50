//! Grid and field dumps.
//!
//! Field files use the `RSFD` layout: the four magic bytes `RSFD`, a `u32`
//! format version, a `u64` node count `n`, then `n` node positions, `n` real
//! parts and `n` imaginary parts, all little-endian `f64`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::WaveField;
use super::grid::{Channel, ChannelGrid};
use crate::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const FIELD_MAGIC: &[u8; 4] = b"RSFD";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridDump {
    pub schema_version: u32,
    pub alpha: f64,
    pub dim: usize,
    pub channel: Channel,
    pub length: f64,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub jacobian: Vec<f64>,
    /// Stencil weights for the second derivative at offsets `−K..=K`.
    pub stencil_d2: Vec<f64>,
    pub shell_sizes: Vec<usize>,
}

pub fn grid_dump(grid: &ChannelGrid) -> GridDump {
    GridDump {
        schema_version: SCHEMA_VERSION,
        alpha: grid.spec.alpha,
        dim: grid.spec.dim,
        channel: grid.channel,
        length: grid.length(),
        order: grid.order(),
        nodes: grid.xs(),
        jacobian: grid.weights(),
        stencil_d2: grid.stencil.d2.clone(),
        shell_sizes: grid.shells.shells.iter().map(|s| s.len()).collect(),
    }
}

/// JSON manifest written next to a binary field file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldManifest {
    pub schema_version: u32,
    pub file: String,
    pub format: String,
    pub nodes: usize,
    pub alpha: f64,
    pub dim: usize,
    pub channel: Channel,
    pub description: String,
}

pub fn write_field<W: Write>(mut w: W, field: &WaveField) -> std::io::Result<()> {
    let n = field.len();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&SCHEMA_VERSION.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    for k in 0..n {
        w.write_all(&field.grid.x(k).to_le_bytes())?;
    }
    for v in &field.values {
        w.write_all(&v.re.to_le_bytes())?;
    }
    for v in &field.values {
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads an `RSFD` file into `(x, u)`.
pub fn read_field<R: Read>(mut r: R) -> Result<(Vec<f64>, Vec<Complex64>), Error> {
    let io = |e: std::io::Error| Error::Validation(format!("field file: {e}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Validation("not an RSFD field file".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(io)?;
    let version = u32::from_le_bytes(b4);
    if version != SCHEMA_VERSION {
        return Err(Error::Validation(format!("unsupported RSFD version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(io)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut read_vec = |r: &mut R| -> Result<Vec<f64>, Error> {
        (0..n)
            .map(|_| {
                r.read_exact(&mut b8).map_err(io)?;
                Ok(f64::from_le_bytes(b8))
            })
            .collect()
    };
    let x = read_vec(&mut r)?;
    let re = read_vec(&mut r)?;
    let im = read_vec(&mut r)?;
    Ok((x, re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::discretization::grid::GridConfig;
    use crate::discretization::potential::PotentialSpec;

    #[test]
    fn field_round_trip() {
        let cfg = GridConfig {
            length: 40.0,
            n_min: 0,
            ..GridConfig::default()
        };
        let g = Arc::new(ChannelGrid::new(&PotentialSpec::free(1.0, 1), Channel::Line, cfg).unwrap());
        let u = WaveField::from_fn(&g, |x| Complex64::new(x.sin(), x.cos()));
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let (x, v) = read_field(buf.as_slice()).unwrap();
        assert_eq!(x, g.xs());
        assert_eq!(v, u.values);
        let d = grid_dump(&g);
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"schema_version\":1"));
    }
}
