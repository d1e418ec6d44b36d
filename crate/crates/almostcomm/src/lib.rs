//! Finite-matrix approximate representations of surfaces, the topological
//! indices that obstruct approximating them by exactly commuting matrices,
//! constructive solvers that produce exact representations when the index
//! vanishes, and a spherical quantum-Hall lattice model exercising the whole
//! machinery.
//!
//! Modules mirror the pipeline:
//!
//! * [`linalg`] — dense complex primitives (eig, norms, matrix functions,
//!   polar decomposition, Pfaffian sign);
//! * [`repr`] — canonical approximate representations (spin triples, clock
//!   and shift pairs, self-dual doubles) and defect measurement;
//! * [`indices`] — Bott index (spectral and trace formulas), torus winding
//!   numbers, and the self-dual Z2 Pfaffian index, each with a gap
//!   certificate;
//! * [`transforms`] — coordinate changes between surfaces and the pipeline
//!   producing exactly commuting approximants;
//! * [`lattice`] — tight-binding quantum Hall model on a sphere with a
//!   monopole flux, band compression, index sweeps, and Wannier-localization
//!   diagnostics;
//! * [`io`] — the CMAT matrix text format and CSV emission.

pub mod indices;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod repr;
pub mod testutil;
pub mod transforms;
