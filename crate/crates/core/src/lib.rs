//! Exact solver, simulator and checker for the zero-sum permutation stopping
//! game: a zero-sum multiset is revealed one element at a time in uniformly
//! random order, and the player may stop once to collect the sum of the
//! elements not yet seen (or, in the dual game, of those already seen).

pub mod cli;
pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod multiset;
pub mod numeric;
pub mod reduction;
pub mod strategies;
pub mod verify;

pub use error::{Error, Result};
pub use multiset::{load_multiset, parse_multiset, Multiset, PayoffMode};
pub use numeric::{BigCount, Rational};
pub use strategies::{build_tables, StrategyTables};
