//! HTTP annotation service and the `ann` command line.

pub mod api;
pub mod auth;
pub mod claims;
pub mod cli;
pub mod error;

pub use api::{router, AppState, ServiceConfig};
