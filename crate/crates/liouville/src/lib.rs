//! Numerical toolkit for conformal metrics `g = e^{2u} δ` on the plane,
//! where `u` solves or super-solves the Liouville equation `Δu + e^{2u} = 0`.
//!
//! The crate constructs exact solutions from meromorphic developing
//! functions, evaluates conformal lengths, areas, distances and diameters by
//! adaptive quadrature and grid shortest paths, and verifies a family of
//! geometric inequalities (isoperimetric, covering, diameter and volume
//! bounds) at desk scale with certified lower bounds and numerical upper
//! bounds.

pub mod covering;
pub mod descriptor;
pub mod devfn;
pub mod error;
pub mod experiments;
pub mod geodesic;
pub mod metric;
pub mod quad;
pub mod radial;
pub mod svg;

pub use error::{Error, Result};
