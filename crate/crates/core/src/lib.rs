//! Affinely optimal containment chains between convex bodies.
//!
//! The crate computes chains `r*L1 + c ⊆ K ⊆ R*L2 + d`, searches for the
//! affine position minimizing `R/r`, and certifies optimality with weighted
//! contact decompositions. Polytopes and ellipsoids are supported at desk
//! scale (dimension at most 6).

pub mod certificates;
pub mod convex_bodies;
pub mod demos;
pub mod error;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod meb;
pub mod mean_ellipsoids;
pub mod optimizer;
pub mod separation;

pub use certificates::{Certificate, Chain, Falsifier, WeightedPair};
pub use convex_bodies::{Body, ContactPair, Ellipsoid, Facet, Polytope};
pub use error::{Error, Result};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

/// Largest dimension for which polytopes keep both descriptions.
pub const MAX_DIM: usize = 6;
