//! Numerical laboratory for packing functionals from potential theory on
//! the sphere and the torus: Bombieri-Weyl polynomial norms, unipolar Green
//! functions, Weierstrass sigma machinery with its sublattice refinement,
//! and toroidal pseudopolynomials, together with the quadrature and
//! configuration-optimization plumbing they need.
//!
//! All numerical kernels are generic over the scalar type through
//! [`scalar::Real`] (`f64` for production accuracy, `f32` compiles and runs
//! at smoke accuracy); the aliases at the crate root fix `f64`.

pub mod elliptic;
pub mod error;
pub mod optim;
pub mod packing;
pub mod pseudo;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod sphere;
pub mod torus;
pub mod weyl;
pub mod xprec;

pub use error::{Error, Result};

/// Production-precision aliases.
pub type ComplexPoint64 = sphere::ComplexPoint<f64>;
pub type SpherePoint64 = sphere::SpherePoint<f64>;
pub type SphereGrid64 = sphere::SphereGrid<f64>;
pub type Lattice64 = elliptic::Lattice<f64>;
pub type TorusGreen64 = torus::TorusGreen<f64>;
pub type TorusGrid64 = torus::TorusGrid<f64>;
pub type WeylPolynomial64 = weyl::WeylPolynomial<f64>;
pub type RootConfiguration64 = weyl::RootConfiguration<f64>;
pub type PackingResult64 = packing::PackingResult<f64>;
pub type Pseudopolynomial64 = pseudo::Pseudopolynomial<f64>;
