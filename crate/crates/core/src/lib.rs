pub mod baseline;
pub mod bench;
pub mod catalog;
pub mod demand;
pub mod error;
pub mod lp;
pub mod optimizer;

pub use error::{Error, Result};
