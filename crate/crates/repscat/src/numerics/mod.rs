//! Numerical building blocks shared by the physics modules.

pub mod banded;
pub mod fit;
pub mod jet;
pub mod quadrature;
pub mod spline;
pub mod stencil;
