//! Numerical building blocks shared by the geometry and energy modules.

pub mod interp;
pub mod quadrature;
pub mod spectral;
