//! Schreier families, repeated averages and the norms built from them.

pub mod acceptance;
pub mod audit;
pub mod blocks;
pub mod cli;
pub mod error;
pub mod families;
pub mod norms;
pub mod ordinal;
pub mod sets;
pub mod vector;
pub mod witnesses;

pub use error::{Error, Result};
