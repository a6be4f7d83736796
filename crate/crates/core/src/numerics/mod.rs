//! Complex dense linear algebra and deterministic random streams.

mod matrix;
mod random;
pub(crate) mod svd;

pub use matrix::{dot, norm_sq, CMatrix};
pub use random::{complex_gaussian, standard_complex_gaussian, RandomStream, StreamRng};
pub use svd::{pseudo_inverse, pseudo_inverse_with_tol, svd, Svd};
