//! Offline engine and experiment harness for multimodal query clarification
//! in conversational search.

pub mod clarify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod genret;
pub mod harness;
pub mod retrieval;
pub mod text;

pub use error::{Error, Result};
