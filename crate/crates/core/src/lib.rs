//! Minimal and maximal operator-system cones on matrix algebras.
//!
//! Numeric kernel types are generic over a [`Real`] scalar; the aliases below
//! fix the double-precision instances used by the searches, the CLI and the
//! JSON formats.

pub mod arch;
pub mod block;
pub mod cones;
pub mod duality;
pub mod ebclass;
pub mod eigen;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod norms;
pub mod nnls;
pub mod random;
pub mod scalar;
pub mod seesaw;
pub mod selftest;
pub mod separable;
pub mod verify;

pub use block::{hermitian_tensor_decompose, is_psd, BlockMatrix, PsdCheck, PSD_TOL};
pub use eigen::{eig_hermitian, Spectrum};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type ComplexMatrix = Matrix<f64>;
pub type ComplexMatrix32 = Matrix<f32>;
pub type BlockElement = BlockMatrix<f64>;
pub type BlockElement32 = BlockMatrix<f32>;
