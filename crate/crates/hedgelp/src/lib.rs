//! Model-free super-replication pricing under proportional transaction
//! costs on finite path grids.
//!
//! The library builds both sides of the hedging duality as explicit linear
//! programs — the semi-static super-replication problem over portfolios of
//! static options plus dynamic stock trading, and the transport problem
//! over approximate-martingale path measures with operator-bounded terminal
//! marginals — solves them in float or exact rational arithmetic, and
//! cross-certifies optima, arbitrage verdicts, and the associated pathwise
//! inequalities.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dual;
pub mod instance;
pub mod lp;
pub mod market;
pub mod pricing;
pub mod primal;
pub mod scalar;

pub use market::{
    build_tree, enumerate_paths, eval_payoff, interpolate, path_max, GridSpec, Path, PayoffKind,
    PayoffSpec, TradeBound, Tree,
};
pub use scalar::{rat_from_decimal, rat_to_decimal, LpScalar, Rat};
