pub mod cli;
pub mod continuation;
pub mod covariance;
pub mod dual;
pub mod freq_est;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod newton;
pub mod sys_id;

pub use error::{Error, Result};
