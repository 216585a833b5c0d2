//! Numerical state-integral partition functions of shaped triangulated
//! pseudo 3-manifolds, built on Faddeev's noncompact quantum dilogarithm.
//!
//! Module map:
//! - [`qdl`]: Φ_b and Li₂ evaluation, shift/strip extension, asymptotics.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature over complex contours.
//! - [`triangulation`]: ordered-tetrahedra gluing complexes, shapes, gauge
//!   action, 3–2 Pachner moves, admissibility via integer homology.
//! - [`shape_space`]: exact rational symplectic structure on shape variables.
//! - [`kernels`]: charged tetrahedral operator kernels and their symmetries.
//! - [`state_integral`]: assembly and evaluation of the partition functions,
//!   the worked knot-complement examples and H-triangulation limits.
//! - [`asymptotics`]: saddle points, descent contours and volume extraction.
//! - [`integral_identities`]: quadrature checks of the hypergeometric-type
//!   integral identities the state-integral reductions rest on.

pub mod asymptotics;
pub mod integral_identities;
pub mod kernels;
pub mod qdl;
pub mod quad;
pub mod shape_space;
pub mod state_integral;
pub mod triangulation;

pub use num_complex::Complex64;
