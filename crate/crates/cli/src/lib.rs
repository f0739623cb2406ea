//! Library surface of the scenario runner; the binary in `main.rs` is a
//! thin dispatcher over these modules.

// Validation uses `!(x > 0.0)` so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod emit;
pub mod presets;
