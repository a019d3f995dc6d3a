//! Remediation of untagged PDFs into tagged, PDF/UA-oriented documents, and
//! tag-accuracy scoring of tagged PDFs against ground truth.

pub mod autotag;
pub mod error;
pub mod fixture;
pub mod geometry;
pub mod mathtext;
pub mod model;
pub mod pdf;
pub mod region;
pub mod scorer;
pub mod session;
pub mod structure;
pub mod tagmap;

pub use error::{Error, Result};
