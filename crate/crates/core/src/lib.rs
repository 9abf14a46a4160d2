#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;

pub mod bayes_factors;
pub mod error;
pub mod ic_weights;
pub mod linmod;
pub mod model_space;
pub mod posterior;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
