//! Discrete market model: the truncated price grid, enumerated path space,
//! its prefix tree (the filtration), payoffs, and grid interpolation.
//!
//! Prices live on the grid `{0, h, 2h, ..., J*h}` with `h = 1/n`; every
//! path starts at the normalized initial price 1, so `n <= J` is required
//! for 1 to lie inside the truncated grid. A path of `N` trading periods is
//! stored as `N + 1` grid indices.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::scalar::{rat_int, rat_to_decimal, Rat};

/// Default ceiling on `(J+1)^N`, the number of enumerated paths.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum MarketError {
    #[error("{0}")]
    InvalidGrid(String),
    #[error("path space too large: (J+1)^N = {count} exceeds enumeration cap {cap}")]
    EnumerationCap { count: u128, cap: u128 },
    #[error("interpolation point {0} is negative")]
    NegativePoint(String),
    #[error("table payoff has no entry for path {0}")]
    MissingTableEntry(String),
    #[error("payoff table: {0}")]
    BadTable(String),
}

/// Trading-increment bound per period: `|gamma_k - gamma_{k-1}| <= M`.
#[derive(Debug, Clone, PartialEq)]
pub enum TradeBound {
    Unbounded,
    Finite(Rat),
}

impl TradeBound {
    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            TradeBound::Unbounded => None,
            TradeBound::Finite(m) => Some(m),
        }
    }
}

/// The discretized market: refinement `n` (step `h = 1/n`), truncation `J`,
/// horizon `N`, transaction cost rate `kappa`, and the trading bound.
#[derive(Debug, Clone)]
pub struct GridSpec {
    n: u32,
    trunc: u32,
    periods: u32,
    kappa: Rat,
    bound: TradeBound,
}

impl GridSpec {
    /// Builds and validates a grid. Structural requirements: `n >= 1`,
    /// `J >= n` (so the initial price 1 is on the truncated grid),
    /// `N >= 1`, `0 <= kappa < 1`, and a nonnegative finite bound.
    ///
    /// The standing assumption `kappa < 1/4` of the hedging duality is a
    /// separate check ([`GridSpec::standing_kappa`]) so that band
    /// feasibility probes can run at larger rates.
    pub fn new(n: u32, trunc: u32, periods: u32, kappa: Rat, bound: TradeBound) -> Result<Self, MarketError> {
        if n < 1 {
            return Err(MarketError::InvalidGrid("grid refinement n must be >= 1".into()));
        }
        if trunc < n {
            return Err(MarketError::InvalidGrid(format!(
                "truncation J = {trunc} puts the ceiling J*h below the initial price 1 (need J >= n = {n})"
            )));
        }
        if periods < 1 {
            return Err(MarketError::InvalidGrid("horizon N must be >= 1".into()));
        }
        if kappa.is_negative() || kappa >= rat_int(1) {
            return Err(MarketError::InvalidGrid(format!(
                "kappa = {} outside [0, 1)",
                rat_to_decimal(&kappa, 12)
            )));
        }
        if let TradeBound::Finite(m) = &bound {
            if m.is_negative() {
                return Err(MarketError::InvalidGrid("trading bound M must be nonnegative".into()));
            }
        }
        Ok(GridSpec { n, trunc, periods, kappa, bound })
    }

    /// Enforces the standing assumption `kappa < 1/4`.
    pub fn standing_kappa(&self) -> Result<(), MarketError> {
        if self.kappa >= Rat::new(1.into(), 4.into()) {
            return Err(MarketError::InvalidGrid(format!(
                "kappa = {} violates the standing assumption kappa < 1/4",
                rat_to_decimal(&self.kappa, 12)
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn trunc(&self) -> u32 {
        self.trunc
    }
    pub fn periods(&self) -> u32 {
        self.periods
    }
    pub fn kappa(&self) -> &Rat {
        &self.kappa
    }
    pub fn bound(&self) -> &TradeBound {
        &self.bound
    }
    pub fn with_bound(&self, bound: TradeBound) -> Self {
        let mut g = self.clone();
        g.bound = bound;
        g
    }
    pub fn with_kappa(&self, kappa: Rat) -> Result<Self, MarketError> {
        GridSpec::new(self.n, self.trunc, self.periods, kappa, self.bound.clone())
    }

    /// Grid step `h = 1/n`.
    pub fn step(&self) -> Rat {
        Rat::new(1.into(), self.n.into())
    }

    /// Index of the initial price 1 on the grid (`1 = n * h`).
    pub fn initial_index(&self) -> u32 {
        self.n
    }

    /// Number of terminal grid points, `J + 1`.
    pub fn terminal_points(&self) -> usize {
        self.trunc as usize + 1
    }

    /// Exact grid value `idx * h`.
    pub fn value(&self, idx: u32) -> Rat {
        Rat::new(idx.into(), self.n.into())
    }

    pub fn value_f64(&self, idx: u32) -> f64 {
        idx as f64 / self.n as f64
    }

    /// `(J+1)^N` without enumerating.
    pub fn path_space_size(&self) -> Option<u128> {
        (self.trunc as u128 + 1).checked_pow(self.periods)
    }
}

/// A price trajectory on the grid, stored as grid indices. `indices[0]`
/// is always the initial index `n` (price 1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Path {
    indices: Vec<u32>,
}

impl Path {
    pub fn new(indices: Vec<u32>) -> Self {
        Path { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len_periods(&self) -> usize {
        self.indices.len() - 1
    }

    pub fn terminal_index(&self) -> u32 {
        *self.indices.last().expect("path is nonempty")
    }

    pub fn value(&self, k: usize, grid: &GridSpec) -> Rat {
        grid.value(self.indices[k])
    }

    pub fn values(&self, grid: &GridSpec) -> Vec<Rat> {
        self.indices.iter().map(|&i| grid.value(i)).collect()
    }

    pub fn values_f64(&self, grid: &GridSpec) -> Vec<f64> {
        self.indices.iter().map(|&i| grid.value_f64(i)).collect()
    }

    /// Running maximum over the whole path; equals the sup norm since all
    /// coordinates are nonnegative.
    pub fn max_index(&self) -> u32 {
        *self.indices.iter().max().expect("path is nonempty")
    }

    /// Renders the post-time-zero coordinates, e.g. `(1,0,2)` -> "0 2".
    pub fn display_tail(&self, grid: &GridSpec) -> String {
        let mut s = String::new();
        for (i, &idx) in self.indices.iter().enumerate().skip(1) {
            if i > 1 {
                s.push(' ');
            }
            let _ = write!(s, "{}", crate::scalar::rat_render(&grid.value(idx)));
        }
        s
    }
}

/// Sup-norm distance between two paths on the same grid.
pub fn path_distance(a: &Path, b: &Path, grid: &GridSpec) -> Rat {
    a.indices
        .iter()
        .zip(&b.indices)
        .map(|(&x, &y)| Signed::abs(&(grid.value(x) - grid.value(y))))
        .max()
        .unwrap_or_else(Rat::zero)
}

/// The running maximum `max_k s_k` of a path as an exact rational.
pub fn path_max(path: &Path, grid: &GridSpec) -> Rat {
    grid.value(path.max_index())
}

/// Enumerates all `(J+1)^N` grid paths in lexicographic order of
/// `(s_1, ..., s_N)`. Deterministic across runs.
pub fn enumerate_paths(grid: &GridSpec) -> Result<Vec<Path>, MarketError> {
    enumerate_paths_capped(grid, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_paths_capped(grid: &GridSpec, cap: u128) -> Result<Vec<Path>, MarketError> {
    let count = grid
        .path_space_size()
        .ok_or(MarketError::EnumerationCap { count: u128::MAX, cap })?;
    if count > cap {
        return Err(MarketError::EnumerationCap { count, cap });
    }
    let base = grid.trunc + 1;
    let n_steps = grid.periods as usize;
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0u32; n_steps];
    loop {
        let mut indices = Vec::with_capacity(n_steps + 1);
        indices.push(grid.initial_index());
        indices.extend_from_slice(&digits);
        out.push(Path::new(indices));
        // increment the least significant digit (rightmost varies fastest)
        let mut pos = n_steps;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < base {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// One node of the filtration tree: a path prefix `(s_0, ..., s_depth)`.
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub depth: u32,
    pub parent: Option<usize>,
    /// Grid index of the price at this node.
    pub value_index: u32,
    /// Contiguous range of enumerated path indices passing through.
    pub path_range: (usize, usize),
    /// Prefix of grid indices from the root (inclusive).
    pub prefix: Vec<u32>,
}

impl TreeNode {
    pub fn path_count(&self) -> usize {
        self.path_range.1 - self.path_range.0
    }
}

/// Prefix tree over the enumerated path space; node ids are breadth-first
/// by depth and lexicographic within a depth.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    depth_offsets: Vec<usize>,
    base: usize,
    periods: usize,
    path_count: usize,
}

/// Builds the prefix tree of the complete lexicographic enumeration.
pub fn build_tree(paths: &[Path], grid: &GridSpec) -> Tree {
    let base = grid.trunc as usize + 1;
    let periods = grid.periods as usize;
    debug_assert_eq!(paths.len(), base.pow(periods as u32));
    let mut nodes = Vec::new();
    let mut depth_offsets = Vec::with_capacity(periods + 2);
    let mut prefix_index_of = vec![0usize]; // node id per prefix rank at current depth
    depth_offsets.push(0);
    nodes.push(TreeNode {
        depth: 0,
        parent: None,
        value_index: grid.initial_index(),
        path_range: (0, paths.len()),
        prefix: vec![grid.initial_index()],
    });
    for depth in 1..=periods {
        depth_offsets.push(nodes.len());
        let count = base.pow(depth as u32);
        let block = paths.len() / count;
        let mut next_index_of = Vec::with_capacity(count);
        for rank in 0..count {
            let parent_rank = rank / base;
            let parent = prefix_index_of[parent_rank];
            let lo = rank * block;
            let mut prefix = nodes[parent].prefix.clone();
            let value_index = paths[lo].indices()[depth];
            prefix.push(value_index);
            next_index_of.push(nodes.len());
            nodes.push(TreeNode {
                depth: depth as u32,
                parent: Some(parent),
                value_index,
                path_range: (lo, lo + block),
                prefix,
            });
        }
        prefix_index_of = next_index_of;
    }
    depth_offsets.push(nodes.len());
    Tree { nodes, depth_offsets, base, periods, path_count: paths.len() }
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn path_count(&self) -> usize {
        self.path_count
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Node ids at a given depth.
    pub fn depth_range(&self, depth: usize) -> std::ops::Range<usize> {
        self.depth_offsets[depth]..self.depth_offsets[depth + 1]
    }

    /// Ids of all internal nodes (depth `0..N-1`), the support of the
    /// dynamic trading variables.
    pub fn internal_nodes(&self) -> std::ops::Range<usize> {
        self.depth_offsets[0]..self.depth_offsets[self.periods]
    }

    /// Count of internal nodes.
    pub fn internal_count(&self) -> usize {
        self.depth_offsets[self.periods]
    }

    /// The node a path passes through at `depth`, in O(1).
    pub fn node_of(&self, path_index: usize, depth: usize) -> usize {
        let block = self.path_count / self.base.pow(depth as u32);
        self.depth_offsets[depth] + path_index / block
    }

    /// Node id of a prefix `(s_0, d_1, ..., d_k)` of grid indices, by
    /// positional arithmetic on the complete tree.
    pub fn node_by_prefix(&self, prefix: &[u32]) -> Option<usize> {
        if prefix.is_empty() || prefix.len() > self.periods + 1 {
            return None;
        }
        if prefix[0] as usize != self.nodes[0].value_index as usize {
            return None;
        }
        let mut rank = 0usize;
        for &d in &prefix[1..] {
            if d as usize >= self.base {
                return None;
            }
            rank = rank * self.base + d as usize;
        }
        Some(self.depth_offsets[prefix.len() - 1] + rank)
    }
}

/// Modulus of continuity, declared as a slope: `m(t) = slope * t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    Slope(Rat),
    None,
}

impl Modulus {
    pub fn apply(&self, t: &Rat) -> Option<Rat> {
        match self {
            Modulus::Slope(c) => Some(c * t),
            Modulus::None => None,
        }
    }
    pub fn apply_f64(&self, t: f64) -> Option<f64> {
        match self {
            Modulus::Slope(c) => Some(c.to_f64().unwrap_or(f64::NAN) * t),
            Modulus::None => None,
        }
    }
}

/// Payoff of a path-dependent European claim.
///
/// Built-in kinds evaluate on arbitrary nonnegative paths; `Table` holds
/// explicit values keyed by the post-time-zero grid indices and only
/// evaluates on enumerated grid paths.
#[derive(Debug, Clone)]
pub enum PayoffKind {
    Call { strike: Rat },
    Put { strike: Rat },
    Asian { strike: Rat },
    Lookback,
    Table { values: BTreeMap<Vec<u32>, Rat>, declared_nonnegative: bool },
}

#[derive(Debug, Clone)]
pub struct PayoffSpec {
    pub kind: PayoffKind,
    pub modulus: Modulus,
}

impl PayoffSpec {
    pub fn call(strike: Rat) -> Self {
        PayoffSpec { kind: PayoffKind::Call { strike }, modulus: Modulus::Slope(rat_int(1)) }
    }
    pub fn put(strike: Rat) -> Self {
        PayoffSpec { kind: PayoffKind::Put { strike }, modulus: Modulus::Slope(rat_int(1)) }
    }
    pub fn asian(strike: Rat) -> Self {
        PayoffSpec { kind: PayoffKind::Asian { strike }, modulus: Modulus::Slope(rat_int(1)) }
    }
    /// Lookback `max_k s_k - s_N`. Its sup-norm modulus slope is 2: the
    /// running maximum and the terminal value each move by at most the
    /// path distance, and they enter with opposite signs.
    pub fn lookback() -> Self {
        PayoffSpec { kind: PayoffKind::Lookback, modulus: Modulus::Slope(rat_int(2)) }
    }
    pub fn table(values: BTreeMap<Vec<u32>, Rat>, declared_nonnegative: bool, modulus: Modulus) -> Self {
        PayoffSpec { kind: PayoffKind::Table { values, declared_nonnegative }, modulus }
    }

    pub fn is_table(&self) -> bool {
        matches!(self.kind, PayoffKind::Table { .. })
    }

    /// Whether the claim is declared nonnegative (all built-ins are).
    pub fn declared_nonnegative(&self) -> bool {
        match &self.kind {
            PayoffKind::Table { declared_nonnegative, .. } => *declared_nonnegative,
            _ => true,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            PayoffKind::Call { strike } => format!("call(strike={})", rat_to_decimal(strike, 12)),
            PayoffKind::Put { strike } => format!("put(strike={})", rat_to_decimal(strike, 12)),
            PayoffKind::Asian { strike } => format!("asian(strike={})", rat_to_decimal(strike, 12)),
            PayoffKind::Lookback => "lookback".to_owned(),
            PayoffKind::Table { values, .. } => format!("table({} entries)", values.len()),
        }
    }
}

/// Exact payoff value on a grid path.
pub fn eval_payoff(payoff: &PayoffSpec, path: &Path, grid: &GridSpec) -> Result<Rat, MarketError> {
    let zero = Rat::zero();
    match &payoff.kind {
        PayoffKind::Call { strike } => {
            let v = grid.value(path.terminal_index()) - strike;
            Ok(if v > zero { v } else { zero })
        }
        PayoffKind::Put { strike } => {
            let v = strike - grid.value(path.terminal_index());
            Ok(if v > zero { v } else { zero })
        }
        PayoffKind::Asian { strike } => {
            let n = path.len_periods();
            let sum: Rat = path.indices()[1..].iter().map(|&i| grid.value(i)).fold(zero.clone(), |a, b| a + b);
            let mean = sum / rat_int(n as i64);
            let v = mean - strike;
            Ok(if v > zero { v } else { zero })
        }
        PayoffKind::Lookback => Ok(path_max(path, grid) - grid.value(path.terminal_index())),
        PayoffKind::Table { values, .. } => values
            .get(&path.indices()[1..].to_vec())
            .cloned()
            .ok_or_else(|| MarketError::MissingTableEntry(path.display_tail(grid))),
    }
}

/// Payoff value on an arbitrary nonnegative path (built-in kinds only).
pub fn eval_payoff_f64(payoff: &PayoffSpec, values: &[f64]) -> Option<f64> {
    match &payoff.kind {
        PayoffKind::Call { strike } => {
            let k = strike.to_f64().unwrap();
            Some((values[values.len() - 1] - k).max(0.0))
        }
        PayoffKind::Put { strike } => {
            let k = strike.to_f64().unwrap();
            Some((k - values[values.len() - 1]).max(0.0))
        }
        PayoffKind::Asian { strike } => {
            let k = strike.to_f64().unwrap();
            let n = values.len() - 1;
            let mean = values[1..].iter().sum::<f64>() / n as f64;
            Some((mean - k).max(0.0))
        }
        PayoffKind::Lookback => {
            let mx = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some(mx - values[values.len() - 1])
        }
        PayoffKind::Table { .. } => None,
    }
}

/// Sup of the payoff over the enumerated path set (the bound `K`).
pub fn payoff_bound(payoff: &PayoffSpec, paths: &[Path], grid: &GridSpec) -> Result<Rat, MarketError> {
    let mut best = Rat::zero();
    let mut first = true;
    for p in paths {
        let v = eval_payoff(payoff, p, grid)?;
        if first || v > best {
            best = v;
            first = false;
        }
    }
    Ok(best)
}

/// Piecewise-linear interpolation of a grid function at `x >= 0`:
/// `(1-a) g(floor(nx) h) + a g((floor(nx)+1) h)` with `a = nx - floor(nx)`.
/// The function is extended constantly to the right of `J*h`.
pub fn interpolate(g: &[Rat], n: u32, x: &Rat) -> Result<Rat, MarketError> {
    if x.is_negative() {
        return Err(MarketError::NegativePoint(rat_to_decimal(x, 12)));
    }
    let nx = x * rat_int(n as i64);
    let fl = nx.floor();
    let alpha = &nx - &fl;
    let j = fl.to_integer().to_usize().unwrap_or(usize::MAX);
    let last = g.len() - 1;
    let g_lo = g[j.min(last)].clone();
    let g_hi = g[(j + 1).min(last)].clone();
    Ok((rat_int(1) - &alpha) * g_lo + alpha * g_hi)
}

/// Float twin of [`interpolate`], used when evaluating lifted portfolios
/// on continuum paths.
pub fn interpolate_f64(g: &[f64], n: u32, x: f64) -> Result<f64, MarketError> {
    if x < 0.0 {
        return Err(MarketError::NegativePoint(format!("{x}")));
    }
    let nx = n as f64 * x;
    let fl = nx.floor();
    let alpha = nx - fl;
    let j = fl as usize;
    let last = g.len() - 1;
    Ok((1.0 - alpha) * g[j.min(last)] + alpha * g[(j + 1).min(last)])
}

/// Reads a payoff table from CSV rows `s_1,...,s_N,value`. Coordinates
/// must be grid points of the given grid.
pub fn payoff_table_from_csv(
    text: &str,
    grid: &GridSpec,
    declared_nonnegative: bool,
    modulus: Modulus,
) -> Result<PayoffSpec, MarketError> {
    let mut values = BTreeMap::new();
    let n_steps = grid.periods() as usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_steps + 1 {
            return Err(MarketError::BadTable(format!(
                "line {}: expected {} fields (s_1..s_{},value), got {}",
                lineno + 1,
                n_steps + 1,
                n_steps,
                fields.len()
            )));
        }
        let mut key = Vec::with_capacity(n_steps);
        for f in &fields[..n_steps] {
            let v = crate::scalar::rat_from_str(f)
                .map_err(|e| MarketError::BadTable(format!("line {}: {e}", lineno + 1)))?;
            let idx = &v * rat_int(grid.n() as i64);
            if !idx.is_integer() || idx.is_negative() {
                return Err(MarketError::BadTable(format!(
                    "line {}: coordinate {} is not on the grid",
                    lineno + 1,
                    f
                )));
            }
            let idx = idx.to_integer().to_u32().ok_or_else(|| {
                MarketError::BadTable(format!("line {}: coordinate {} out of range", lineno + 1, f))
            })?;
            if idx > grid.trunc() {
                return Err(MarketError::BadTable(format!(
                    "line {}: coordinate {} exceeds the grid ceiling",
                    lineno + 1,
                    f
                )));
            }
            key.push(idx);
        }
        let value = crate::scalar::rat_from_str(fields[n_steps])
            .map_err(|e| MarketError::BadTable(format!("line {}: {e}", lineno + 1)))?;
        if declared_nonnegative && value.is_negative() {
            return Err(MarketError::BadTable(format!(
                "line {}: negative value in a table declared nonnegative",
                lineno + 1
            )));
        }
        values.insert(key, value);
    }
    if values.is_empty() {
        return Err(MarketError::BadTable("table has no rows".into()));
    }
    Ok(PayoffSpec::table(values, declared_nonnegative, modulus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_frac;

    fn grid(n: u32, j: u32, periods: u32) -> GridSpec {
        GridSpec::new(n, j, periods, rat_frac(1, 10), TradeBound::Unbounded).unwrap()
    }

    #[test]
    fn enumerate_small_cases() {
        // (n=1, J=1, N=2) -> 4 paths (1,0,0),(1,0,1),(1,1,0),(1,1,1)
        let g = grid(1, 1, 2);
        let paths = enumerate_paths(&g).unwrap();
        let got: Vec<Vec<u32>> = paths.iter().map(|p| p.indices().to_vec()).collect();
        assert_eq!(got, vec![vec![1, 0, 0], vec![1, 0, 1], vec![1, 1, 0], vec![1, 1, 1]]);

        // (n=1, J=2, N=1) -> 3 paths
        let g = grid(1, 2, 1);
        let paths = enumerate_paths(&g).unwrap();
        let got: Vec<Vec<u32>> = paths.iter().map(|p| p.indices().to_vec()).collect();
        assert_eq!(got, vec![vec![1, 0], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn enumerate_count_matches_independent_counter() {
        // (n=2, J=4, N=3): count by an independent brute-force counter
        let g = grid(2, 4, 3);
        let paths = enumerate_paths(&g).unwrap();
        let mut counter = 0u64;
        for _ in 0..5u64 {
            for _ in 0..5u64 {
                for _ in 0..5u64 {
                    counter += 1;
                }
            }
        }
        assert_eq!(paths.len() as u64, counter);
        assert_eq!(paths.len(), 125);
        for p in &paths {
            assert!(p.indices().iter().all(|&i| i <= 4));
            assert_eq!(p.indices()[0], 2); // s_0 = 1 at n = 2
        }
    }

    #[test]
    fn enumerate_cap_error_names_count() {
        let g = grid(1, 9, 7); // 10^7 paths
        match enumerate_paths(&g) {
            Err(MarketError::EnumerationCap { count, cap }) => {
                assert_eq!(count, 10_000_000);
                assert_eq!(cap, DEFAULT_ENUMERATION_CAP);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn tree_shapes() {
        // (J=1, N=2): 1 root + 2 depth-1 + 4 leaves
        let g = grid(1, 1, 2);
        let paths = enumerate_paths(&g).unwrap();
        let tree = build_tree(&paths, &g);
        assert_eq!(tree.depth_range(0).len(), 1);
        assert_eq!(tree.depth_range(1).len(), 2);
        assert_eq!(tree.depth_range(2).len(), 4);

        // (J=2, N=1): 1 root + 3 leaves
        let g = grid(1, 2, 1);
        let paths = enumerate_paths(&g).unwrap();
        let tree = build_tree(&paths, &g);
        assert_eq!(tree.depth_range(0).len(), 1);
        assert_eq!(tree.depth_range(1).len(), 3);

        // (J=2, N=2): 1 + 3 + 9 nodes, counts (J+1)^k per depth
        let g = grid(1, 2, 2);
        let paths = enumerate_paths(&g).unwrap();
        let tree = build_tree(&paths, &g);
        for depth in 0..=2usize {
            assert_eq!(tree.depth_range(depth).len(), 3usize.pow(depth as u32));
        }
        assert_eq!(tree.nodes().len(), 1 + 3 + 9);

        // leaf path counts sum to the path count
        let leaf_sum: usize = tree.depth_range(2).map(|id| tree.node(id).path_count()).sum();
        assert_eq!(leaf_sum, paths.len());

        // node_of agrees with prefix containment
        for (pi, p) in paths.iter().enumerate() {
            for depth in 0..=2usize {
                let node = tree.node(tree.node_of(pi, depth));
                assert_eq!(node.prefix.as_slice(), &p.indices()[..=depth]);
                assert!(node.path_range.0 <= pi && pi < node.path_range.1);
            }
        }
    }

    #[test]
    fn payoff_values() {
        let g = grid(1, 2, 2);
        let call = PayoffSpec::call(rat_int(1));
        let p = Path::new(vec![1, 0, 2]);
        assert_eq!(eval_payoff(&call, &p, &g).unwrap(), rat_int(1));

        let lb = PayoffSpec::lookback();
        let p = Path::new(vec![1, 0, 0]);
        assert_eq!(eval_payoff(&lb, &p, &g).unwrap(), rat_int(1));

        let asian = PayoffSpec::asian(rat_int(1));
        let p = Path::new(vec![1, 2, 2]);
        assert_eq!(eval_payoff(&asian, &p, &g).unwrap(), rat_int(1));

        let put = PayoffSpec::put(rat_int(1));
        let p = Path::new(vec![1, 2, 0]);
        assert_eq!(eval_payoff(&put, &p, &g).unwrap(), rat_int(1));
    }

    #[test]
    fn table_missing_entry_is_error() {
        let g = grid(1, 1, 1);
        let mut values = BTreeMap::new();
        values.insert(vec![0u32], rat_int(3));
        let table = PayoffSpec::table(values, true, Modulus::None);
        assert!(eval_payoff(&table, &Path::new(vec![1, 0]), &g).is_ok());
        assert!(matches!(
            eval_payoff(&table, &Path::new(vec![1, 1]), &g),
            Err(MarketError::MissingTableEntry(_))
        ));
    }

    #[test]
    fn interpolate_matches_hand_value() {
        // g = (0, 1, 4) on the h = 0.5 grid, x = 0.75 -> 2.5
        let g = vec![rat_int(0), rat_int(1), rat_int(4)];
        let x = rat_frac(3, 4);
        assert_eq!(interpolate(&g, 2, &x).unwrap(), rat_frac(5, 2));
        // grid points are exact
        assert_eq!(interpolate(&g, 2, &rat_frac(1, 2)).unwrap(), rat_int(1));
        assert_eq!(interpolate(&g, 2, &rat_int(1)).unwrap(), rat_int(4));
        // negative input is a domain error
        assert!(interpolate(&g, 2, &rat_int(-1)).is_err());
        // constant extension beyond the ceiling
        assert_eq!(interpolate(&g, 2, &rat_int(9)).unwrap(), rat_int(4));
    }

    #[test]
    fn interpolate_fixes_linear_functions() {
        // g(x) = x sampled on the grid is a fixed point below the ceiling
        let n = 2u32;
        let g: Vec<Rat> = (0..=6u32).map(|i| Rat::new(i.into(), n.into())).collect();
        for num in 0..=24u32 {
            let x = Rat::new(num.into(), 8.into()); // step 1/8 through [0, 3]
            assert_eq!(interpolate(&g, n, &x).unwrap(), x);
        }
    }

    #[test]
    fn interpolate_linear_on_cells() {
        let g = vec![rat_int(0), rat_int(5), rat_int(1), rat_int(7)];
        let n = 1u32;
        // x, y in the cell [1, 2], theta in [0,1]
        let x = rat_frac(5, 4);
        let y = rat_frac(7, 4);
        for th_num in 0..=4 {
            let th = rat_frac(th_num, 4);
            let point = &th * &x + (rat_int(1) - &th) * &y;
            let lhs = interpolate(&g, n, &point).unwrap();
            let rhs = &th * interpolate(&g, n, &x).unwrap() + (rat_int(1) - &th) * interpolate(&g, n, &y).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn path_max_is_brute_force_max() {
        let g = grid(1, 2, 2);
        let p = Path::new(vec![1, 0, 2]);
        assert_eq!(path_max(&p, &g), rat_int(2));
        let p = Path::new(vec![1, 1, 1]);
        assert_eq!(path_max(&p, &g), rat_int(1));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 1, 1, rat_int(0), TradeBound::Unbounded).is_err());
        assert!(GridSpec::new(2, 1, 1, rat_int(0), TradeBound::Unbounded).is_err()); // Jh < 1
        assert!(GridSpec::new(1, 1, 0, rat_int(0), TradeBound::Unbounded).is_err());
        assert!(GridSpec::new(1, 1, 1, rat_int(1), TradeBound::Unbounded).is_err());
        assert!(GridSpec::new(1, 1, 1, rat_frac(-1, 10), TradeBound::Unbounded).is_err());
        let g = GridSpec::new(1, 1, 1, rat_frac(3, 10), TradeBound::Unbounded).unwrap();
        assert!(g.standing_kappa().is_err());
        let g = GridSpec::new(1, 1, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        assert!(g.standing_kappa().is_ok());
    }

    #[test]
    fn csv_table_round_trip() {
        let g = grid(2, 4, 2);
        let text = "0.5,1,0.25\n1,1,0\n# comment\n2,0.5,1.5\n";
        let payoff = payoff_table_from_csv(text, &g, true, Modulus::None).unwrap();
        let p = Path::new(vec![2, 1, 2]);
        assert_eq!(eval_payoff(&payoff, &p, &g).unwrap(), rat_frac(1, 4));
        let p = Path::new(vec![2, 4, 1]);
        assert_eq!(eval_payoff(&payoff, &p, &g).unwrap(), rat_frac(3, 2));
        // off-grid coordinate
        assert!(payoff_table_from_csv("0.3,1,0\n", &g, true, Modulus::None).is_err());
        // wrong arity
        assert!(payoff_table_from_csv("0.5,0\n", &g, true, Modulus::None).is_err());
    }
}
