//! Bulk-surface Allen–Cahn dynamics with a Robin transmission condition
//! `K∂νu + u = h(φ)` and its affine limit `u|Γ = αφ + η`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod grid;
pub mod linsolve;
pub mod model;

pub use error::{Error, Result};
pub mod limit;
pub mod robin;
mod scheme;
pub mod trajectory;

pub use scheme::Reaction;
pub mod harness;
pub mod config;
pub mod io;
