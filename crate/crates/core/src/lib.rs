#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bishop;
pub mod circle;
pub mod error;
pub mod funcpair;
pub mod hypersurface;
pub mod levi;
pub mod sector;
pub mod stats;

pub use error::{Error, Result};
