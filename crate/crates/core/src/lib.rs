// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binmat;
pub mod channel;
pub mod codes;
pub mod config;
pub mod decoders;
pub mod error;
pub mod exitchart;
pub mod harness;
pub mod infotheory;

pub use error::{Error, Result};
