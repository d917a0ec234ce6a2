pub mod covariance;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lrt;
pub mod pevd;
pub mod polymat;
pub mod projection;
pub mod signalgen;

pub use error::{Error, Result};
pub use polymat::LaurentMatrix;
