//! Experiment harness: configuration, measurements, reference management,
//! studies and CSV output.

pub mod cache;
pub mod config;
pub mod measure;
pub mod oracle;
pub mod study;
pub mod table;

pub use config::{Method, StudyConfig, TestCase};
