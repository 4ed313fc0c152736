//! Generalized O'Hara knot energies of closed curves.
//!
//! The energy `E_Φ(f) = ∬ (1/Φ(|Δf|) - 1/Φ(D(s1, s2))) ds1 ds2` is evaluated
//! by several algebraically equivalent routes: the direct subtracted
//! integral, the tangent-difference/wedge decomposition, its dot-product
//! form, and the cosine formula built from the conformal angle φ and the
//! tangent angle ψ. Agreement between the routes, Möbius-map experiments and
//! a length-constrained minimizer are exercised by the test suites.

pub mod angles;
pub mod curve;
pub mod energy;
pub mod error;
pub mod kernel;
pub mod minimize;
pub mod mobius;
pub mod numeric;
pub mod run;

pub use curve::{Curve, CurveFamily};
pub use energy::{EnergyBreakdown, Method, QuadratureSpec};
pub use error::{Error, Result};
pub use kernel::KernelSpec;
