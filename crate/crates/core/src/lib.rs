//! Newton-polyhedron invariants of integer polynomials, complete exponential
//! sums modulo prime powers, and exact checks of the face decomposition of
//! those sums.

pub mod bounds;
pub mod error;
pub mod faceformula;
pub mod modarith;
pub mod newton;
pub mod poly;
pub mod rational;
pub mod sums;

pub use error::{Error, Result};
pub use num_rational::BigRational;
pub use newton::{enumerate_faces, Face, FaceKey, FaceLattice, Facet, Limits, NewtonPolyhedron, SigmaData};
pub use poly::{parse_polynomial, ExponentVector, Polynomial, SparsePoly};
