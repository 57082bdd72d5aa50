//! Grids, operator assembly, boundary closures and weighted norms.

pub mod asymptotic;
pub mod boundary;
pub mod dump;
pub mod field;
pub mod grid;
pub mod norms;
pub mod operator;
pub mod potential;

pub use boundary::{BoundaryMode, Closures, TailData};
pub use field::{apply_a, apply_pf, WaveField};
pub use grid::{Channel, ChannelGrid, GridConfig, ShellPartition};
pub use norms::{shell_norms, weighted_l2, ShellNorms};
pub use potential::{PotentialSpec, QProfile};
