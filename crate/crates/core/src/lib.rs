//! Numerical estimators for Hölder-order regularity of functions and
//! set-valued mappings.

pub mod calculus;
pub mod catalog;
pub mod config;
pub mod error;
pub mod lsip;
pub mod moduli;
pub mod penalty;
pub mod report;
pub mod settings;
pub mod verify;
pub mod setmap;

pub use error::{Error, Result};
pub use settings::Settings;
