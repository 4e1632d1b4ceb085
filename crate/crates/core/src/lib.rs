pub mod distributed;
pub mod error;
pub mod experiment;
pub mod fixture;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod pursuit;
pub mod rng;
pub mod signal;
pub mod support;

pub use error::{Error, Result};
