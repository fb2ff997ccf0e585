//! Session server and command-line tools for interactive topic modeling.
//!
//! [`session::Session`] owns the model version stack of one user and
//! serializes every mutation. [`api::router`] exposes it over HTTP and
//! [`cli`] drives the same session type from scripts, so both paths share
//! one code path for relabels and reports.

pub mod api;
pub mod cli;
pub mod session;

pub use api::router;
pub use session::{Action, Session, SessionError, SessionOptions, Snapshot, MAX_SELECTION};
