#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod counterexample;
pub mod density;
pub mod error;
pub mod jet;
pub mod mot;
pub mod quad;
pub mod radialcost;
pub mod roots;

pub use error::{Error, Result};
