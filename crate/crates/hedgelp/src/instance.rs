//! A fully materialized pricing problem: grid, enumerated paths, filtration
//! tree, per-path payoff values, and (optionally) the static pricing model.

use crate::market::{
    self, build_tree, enumerate_paths_capped, GridSpec, MarketError, Path, PayoffSpec, Tree,
    DEFAULT_ENUMERATION_CAP,
};
use crate::pricing::PricingModel;
use crate::scalar::Rat;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("market: {0}")]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub grid: GridSpec,
    pub paths: Vec<Path>,
    pub tree: Tree,
    pub payoff: PayoffSpec,
    /// Payoff value per enumerated path, in path order.
    pub payoff_values: Vec<Rat>,
    /// Static pricing model; absent for the statics-free constrained
    /// problem (initial capital only).
    pub pricing: Option<PricingModel>,
}

impl Instance {
    pub fn new(
        grid: GridSpec,
        payoff: PayoffSpec,
        pricing: Option<PricingModel>,
    ) -> Result<Self, InstanceError> {
        Self::with_cap(grid, payoff, pricing, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(
        grid: GridSpec,
        payoff: PayoffSpec,
        pricing: Option<PricingModel>,
        cap: u128,
    ) -> Result<Self, InstanceError> {
        let paths = enumerate_paths_capped(&grid, cap)?;
        let tree = build_tree(&paths, &grid);
        let payoff_values = paths
            .iter()
            .map(|p| market::eval_payoff(&payoff, p, &grid))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance { grid, paths, tree, payoff, payoff_values, pricing })
    }

    /// Terminal grid index of a path.
    pub fn terminal_of(&self, path_index: usize) -> u32 {
        self.paths[path_index].terminal_index()
    }

    /// The instance with a different trading bound, payoff values reused.
    pub fn with_bound(&self, bound: crate::market::TradeBound) -> Self {
        let mut inst = self.clone();
        inst.grid = self.grid.with_bound(bound);
        inst
    }
}
