pub mod bench;
pub mod error;
pub mod hybrid;
pub mod linalg;
pub mod lpreg;
pub mod optim;
pub mod problem;
pub mod rng;
pub mod sampling;
pub mod vmv;

pub use error::{Result, SketchError};
