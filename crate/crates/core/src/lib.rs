//! Exact stability analysis for weighted configurations of linear subspaces.

pub mod balance;
pub mod cone;
pub mod config;
pub mod corpus;
pub mod correspondence;
pub mod error;
pub mod exact;
pub mod filtration;
pub mod hilbert_mumford;
pub mod io;

pub use error::{Error, Result};
