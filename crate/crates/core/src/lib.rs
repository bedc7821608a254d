pub mod conformal;
pub mod domain;
pub mod error;
pub mod extract;
pub mod harness;
pub mod io;
pub mod learners;
pub mod metrics;
pub mod rng;
