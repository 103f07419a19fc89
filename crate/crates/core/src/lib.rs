pub mod complexes;
pub mod division;
pub mod error;
pub mod hefer;
pub mod linalg;
pub mod multilinear;
pub mod poly;
pub mod quadrature;

pub use error::{Error, Result};
pub use multilinear::{Form, FormMap, LambdaIndex, SymIndex};
pub use poly::{Poly, PolyMatrix, Rat};
