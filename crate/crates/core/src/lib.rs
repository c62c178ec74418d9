//! Flows of time-varying real analytic vector fields computed as
//! chronological (Lie/Picard) series on truncated Taylor data, with
//! seminorm-based convergence certificates.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod expr;
pub mod extension;
pub mod flow;
pub mod geometry;
pub mod oracle;
pub mod seminorm;
mod serde_util;
pub mod timevarying;

pub use error::{Error, Result};
