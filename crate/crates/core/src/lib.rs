pub mod audit;
pub mod data;
pub mod error;
pub mod fisher;
pub mod longrun;
pub mod np;
pub mod report;
pub mod statdist;
pub mod types;

pub use error::{Error, Result};
pub use types::{Sign, TailDirection, Tails, TestKind};
