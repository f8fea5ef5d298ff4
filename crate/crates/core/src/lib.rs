//! Type inference for a small functional language with extensible records,
//! based on algebraic subtyping with row variables.
//!
//! The pipeline is [`syntax::parse`] → [`infer::Engine`] → [`coalesce`] →
//! [`coalesce::print_type`]. [`ground`] and [`eval`] are independent
//! reference implementations used to test the inference engine.

pub mod cli;
pub mod coalesce;
pub mod eval;
pub mod ground;
pub mod infer;
pub mod syntax;
pub mod trace;
pub mod types;
