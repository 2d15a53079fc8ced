//! Super-replication linear programs: the semi-static hedging problem
//! (static option leg priced by the operator plus dynamic trading under
//! proportional costs) and the statics-free constrained problem (initial
//! capital plus bounded trading), together with portfolio evaluation,
//! normalization, lifting to off-grid paths, and CSV export/import.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::instance::Instance;
use crate::lp::{self, LinearProgram, Rel, Sense, Status, VarId};
use crate::market::{interpolate_f64, GridSpec, Path, TradeBound, Tree};
use crate::pricing::{call_value, PricingOperator};
use crate::scalar::{rat_from_str, rat_int, rat_render, LpScalar, Rat};

#[derive(Debug, thiserror::Error)]
pub enum HedgeError {
    #[error("lp: {0}")]
    Lp(#[from] lp::LpError),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("the constrained problem needs a finite trading bound")]
    NeedsFiniteBound,
    #[error("the semi-static problem needs a pricing model")]
    NeedsPricing,
    #[error("portfolio artifact: {0}")]
    BadArtifact(String),
}

/// Static leg of a portfolio: a grid function on the terminal points for
/// the semi-static problem, or plain initial capital for the constrained
/// one.
#[derive(Debug, Clone, PartialEq)]
pub enum StaticLeg<S> {
    Terminal(Vec<S>),
    Capital(S),
}

/// A hedging portfolio on the filtration tree. `gamma[v]` is the stock
/// position held from node `v` (depth `< N`); `inc_up`/`inc_down` is the
/// nonnegative decomposition of the increment from the parent position.
#[derive(Debug, Clone)]
pub struct Portfolio<S> {
    pub static_leg: StaticLeg<S>,
    pub gamma: Vec<S>,
    pub inc_up: Vec<S>,
    pub inc_down: Vec<S>,
}

impl<S: LpScalar> Portfolio<S> {
    /// Subtracts `min(u, w)` at every node, putting the increment
    /// decomposition in normal form without touching `gamma` or the
    /// static leg.
    pub fn normalize(&mut self) {
        for (u, w) in self.inc_up.iter_mut().zip(self.inc_down.iter_mut()) {
            let m = if *u < *w { u.clone() } else { w.clone() };
            *u = u.clone() - m.clone();
            *w = w.clone() - m;
        }
    }

    pub fn is_normal_form(&self) -> bool {
        self.inc_up
            .iter()
            .zip(&self.inc_down)
            .all(|(u, w)| *u == S::zero() || *w == S::zero())
    }

    pub fn to_f64(&self) -> Portfolio<f64> {
        let static_leg = match &self.static_leg {
            StaticLeg::Terminal(f) => StaticLeg::Terminal(f.iter().map(|v| v.to_f64()).collect()),
            StaticLeg::Capital(x) => StaticLeg::Capital(x.to_f64()),
        };
        Portfolio {
            static_leg,
            gamma: self.gamma.iter().map(|v| v.to_f64()).collect(),
            inc_up: self.inc_up.iter().map(|v| v.to_f64()).collect(),
            inc_down: self.inc_down.iter().map(|v| v.to_f64()).collect(),
        }
    }
}

/// Terminal wealth of a strategy along a path: static value plus trading
/// gains minus proportional costs, with the pre-trade position zero.
pub fn terminal_wealth<S: LpScalar>(
    static_value: S,
    positions: &[S],
    path_values: &[S],
    kappa: &S,
) -> S {
    let steps = path_values.len() - 1;
    let mut acc = static_value;
    let mut prev = S::zero();
    for k in 0..steps {
        let gain = positions[k].clone() * (path_values[k + 1].clone() - path_values[k].clone());
        let turn = (positions[k].clone() - prev).abs_val();
        acc = acc + gain - kappa.clone() * path_values[k].clone() * turn;
        prev = positions[k].clone();
    }
    acc
}

/// Portfolio value at maturity on a grid path.
pub fn portfolio_value<S: LpScalar>(
    portfolio: &Portfolio<S>,
    path: &Path,
    grid: &GridSpec,
    tree: &Tree,
) -> S {
    let steps = path.len_periods();
    let positions: Vec<S> = (0..steps)
        .map(|k| {
            let node = tree
                .node_by_prefix(&path.indices()[..=k])
                .expect("path prefix is a tree node");
            portfolio.gamma[node].clone()
        })
        .collect();
    let static_value = match &portfolio.static_leg {
        StaticLeg::Terminal(f) => f[path.terminal_index() as usize].clone(),
        StaticLeg::Capital(x) => x.clone(),
    };
    let values: Vec<S> = path.indices().iter().map(|&i| S::from_rat(&grid.value(i))).collect();
    terminal_wealth(static_value, &positions, &values, &S::from_rat(grid.kappa()))
}

/// Variable handles of an assembled hedging LP.
#[derive(Debug, Clone)]
pub struct HedgeVars {
    /// Epigraph of the static price (measure-set form), the cash position
    /// (quote form), or the initial capital (constrained form).
    pub head: VarId,
    /// Positive/negative parts of the terminal grid function when the
    /// widened measure-set form splits it; plain `f` otherwise.
    pub f_pos: Vec<VarId>,
    pub f_neg: Vec<VarId>,
    pub buys: Vec<VarId>,
    pub sells: Vec<VarId>,
    pub gamma: Vec<VarId>,
    pub inc_up: Vec<VarId>,
    pub inc_down: Vec<VarId>,
    /// Row ids of the per-path super-replication rows, in path order.
    pub path_rows: Vec<usize>,
}

fn add_dynamics(
    lp: &mut LinearProgram,
    inst: &Instance,
    path_row_terms: &mut [Vec<(lp::VarIdOrIndex, Rat)>],
) -> (Vec<VarId>, Vec<VarId>, Vec<VarId>) {
    let tree = &inst.tree;
    let grid = &inst.grid;
    let kappa = grid.kappa();
    let mut gamma = Vec::with_capacity(tree.internal_count());
    let mut inc_up = Vec::with_capacity(tree.internal_count());
    let mut inc_down = Vec::with_capacity(tree.internal_count());
    for v in tree.internal_nodes() {
        gamma.push(lp.add_var(format!("g_{v}"), None, None, rat_int(0)).unwrap());
        inc_up.push(lp.add_var(format!("u_{v}"), Some(rat_int(0)), None, rat_int(0)).unwrap());
        inc_down.push(lp.add_var(format!("w_{v}"), Some(rat_int(0)), None, rat_int(0)).unwrap());
    }
    for v in tree.internal_nodes() {
        let node = tree.node(v);
        let mut terms = vec![
            (gamma[v].into(), rat_int(1)),
            (inc_up[v].into(), rat_int(-1)),
            (inc_down[v].into(), rat_int(1)),
        ];
        if let Some(parent) = node.parent {
            terms.push((gamma[parent].into(), rat_int(-1)));
        }
        lp.add_row(format!("inc_{v}"), Rel::Eq, terms, rat_int(0)).unwrap();
        if let TradeBound::Finite(m) = grid.bound() {
            lp.add_row(
                format!("cap_{v}"),
                Rel::Le,
                vec![(inc_up[v].into(), rat_int(1)), (inc_down[v].into(), rat_int(1))],
                m.clone(),
            )
            .unwrap();
        }
    }
    let n_steps = grid.periods() as usize;
    for (p, path) in inst.paths.iter().enumerate() {
        for k in 0..n_steps {
            let v = tree.node_of(p, k);
            let s_k = grid.value(path.indices()[k]);
            let ds = grid.value(path.indices()[k + 1]) - &s_k;
            if !ds.is_zero() {
                path_row_terms[p].push((gamma[v].into(), ds));
            }
            let cost = kappa * &s_k;
            if !cost.is_zero() {
                path_row_terms[p].push((inc_up[v].into(), -(cost.clone())));
                path_row_terms[p].push((inc_down[v].into(), -cost));
            }
        }
    }
    (gamma, inc_up, inc_down)
}

/// Assembles the semi-static super-replication LP: minimize the price of
/// the static leg subject to terminal-wealth domination on every
/// enumerated path, increment bookkeeping, and the trading cap when the
/// bound is finite.
pub fn build_semistatic_lp(inst: &Instance) -> Result<(LinearProgram, HedgeVars), HedgeError> {
    let pricing = inst.pricing.as_ref().ok_or(HedgeError::NeedsPricing)?;
    let grid = &inst.grid;
    let points = grid.terminal_points();
    let eps = &pricing.epsilon;
    let mut lp = LinearProgram::new("semistatic_hedge", Sense::Minimize);
    let mut path_row_terms: Vec<Vec<(lp::VarIdOrIndex, Rat)>> = vec![Vec::new(); inst.paths.len()];

    let head;
    let mut f_pos = Vec::new();
    let mut f_neg = Vec::new();
    let mut buys = Vec::new();
    let mut sells = Vec::new();
    match &pricing.operator {
        PricingOperator::MeasureSet { measures } => {
            head = lp.add_var("t", None, None, rat_int(1)).unwrap();
            let split = !eps.is_zero();
            for x in 0..points {
                let obj = if split { eps.clone() } else { rat_int(0) };
                f_pos.push(
                    lp.add_var(
                        format!("f_{x}"),
                        if split { Some(rat_int(0)) } else { None },
                        None,
                        obj.clone(),
                    )
                    .unwrap(),
                );
                if split {
                    f_neg.push(lp.add_var(format!("fneg_{x}"), Some(rat_int(0)), None, obj).unwrap());
                }
            }
            for (j, m) in measures.iter().enumerate() {
                let mut terms = vec![(head.into(), rat_int(1))];
                for x in 0..points {
                    if m[x].is_zero() {
                        continue;
                    }
                    terms.push((f_pos[x].into(), -(m[x].clone())));
                    if split {
                        terms.push((f_neg[x].into(), m[x].clone()));
                    }
                }
                lp.add_row(format!("price_{j}"), Rel::Ge, terms, rat_int(0)).unwrap();
            }
            for (p, path) in inst.paths.iter().enumerate() {
                let x = path.terminal_index() as usize;
                path_row_terms[p].push((f_pos[x].into(), rat_int(1)));
                if split {
                    path_row_terms[p].push((f_neg[x].into(), rat_int(-1)));
                }
            }
        }
        PricingOperator::CallQuotes { quotes } => {
            head = lp.add_var("cash", None, None, rat_int(1)).unwrap();
            for (i, q) in quotes.iter().enumerate() {
                buys.push(lp.add_var(format!("buy_{i}"), Some(rat_int(0)), None, &q.ask + eps).unwrap());
                sells.push(lp.add_var(format!("sell_{i}"), Some(rat_int(0)), None, -(&q.bid - eps)).unwrap());
            }
            for (p, path) in inst.paths.iter().enumerate() {
                path_row_terms[p].push((head.into(), rat_int(1)));
                for (i, q) in quotes.iter().enumerate() {
                    let cv = call_value(grid, path.terminal_index(), &q.strike);
                    if !cv.is_zero() {
                        path_row_terms[p].push((buys[i].into(), cv.clone()));
                        path_row_terms[p].push((sells[i].into(), -cv));
                    }
                }
            }
        }
    }

    let (gamma, inc_up, inc_down) = add_dynamics(&mut lp, inst, &mut path_row_terms);
    let mut path_rows = Vec::with_capacity(inst.paths.len());
    for (p, terms) in path_row_terms.into_iter().enumerate() {
        let row =
            lp.add_row(format!("path_{p}"), Rel::Ge, terms, inst.payoff_values[p].clone()).unwrap();
        path_rows.push(row);
    }
    Ok((lp, HedgeVars { head, f_pos, f_neg, buys, sells, gamma, inc_up, inc_down, path_rows }))
}

/// Assembles the statics-free constrained LP: minimize initial capital
/// subject to domination, with the per-period trading cap.
pub fn build_constrained_lp(inst: &Instance) -> Result<(LinearProgram, HedgeVars), HedgeError> {
    let mut lp = LinearProgram::new("constrained_hedge", Sense::Minimize);
    let mut path_row_terms: Vec<Vec<(lp::VarIdOrIndex, Rat)>> = vec![Vec::new(); inst.paths.len()];
    let head = lp.add_var("x", None, None, rat_int(1)).unwrap();
    for terms in path_row_terms.iter_mut() {
        terms.push((head.into(), rat_int(1)));
    }
    let (gamma, inc_up, inc_down) = add_dynamics(&mut lp, inst, &mut path_row_terms);
    let mut path_rows = Vec::with_capacity(inst.paths.len());
    for (p, terms) in path_row_terms.into_iter().enumerate() {
        let row =
            lp.add_row(format!("path_{p}"), Rel::Ge, terms, inst.payoff_values[p].clone()).unwrap();
        path_rows.push(row);
    }
    Ok((
        lp,
        HedgeVars {
            head,
            f_pos: Vec::new(),
            f_neg: Vec::new(),
            buys: Vec::new(),
            sells: Vec::new(),
            gamma,
            inc_up,
            inc_down,
            path_rows,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeStatus {
    Optimal,
    /// The hedger can push the cost below any bound: model-independent
    /// arbitrage in the statics.
    ArbitrageUnbounded,
    /// Dominating portfolios exist for every claim here (cash replication),
    /// so this status never arises from a well-formed instance; kept for
    /// surface completeness.
    InfeasibleNone,
}

#[derive(Debug, Clone)]
pub struct HedgeResult<S> {
    pub status: HedgeStatus,
    pub value: Option<S>,
    pub portfolio: Option<Portfolio<S>>,
    /// `terminal wealth - payoff` per path, from the normalized portfolio.
    pub slacks: Vec<S>,
    pub ray: Option<lp::RayCertificate<S>>,
    /// Dual weights of the path rows (the transport certificate).
    pub path_duals: Vec<S>,
    pub pivot_count: usize,
    pub pivot_hash: u64,
}

fn extract_portfolio<S: LpScalar>(
    inst: &Instance,
    vars: &HedgeVars,
    primal: &[S],
    semistatic: bool,
) -> Portfolio<S> {
    let static_leg = if !semistatic {
        StaticLeg::Capital(primal[vars.head.0].clone())
    } else if !vars.f_pos.is_empty() {
        let f = (0..vars.f_pos.len())
            .map(|x| {
                let mut v = primal[vars.f_pos[x].0].clone();
                if !vars.f_neg.is_empty() {
                    v = v - primal[vars.f_neg[x].0].clone();
                }
                v
            })
            .collect();
        StaticLeg::Terminal(f)
    } else {
        // quote form: f(x) = cash + sum (buy - sell) * (x - K)^+
        let pricing = inst.pricing.as_ref().expect("semistatic instance has pricing");
        let PricingOperator::CallQuotes { quotes } = &pricing.operator else {
            unreachable!("no f variables implies the quote form")
        };
        let f = (0..inst.grid.terminal_points() as u32)
            .map(|x| {
                let mut v = primal[vars.head.0].clone();
                for (i, q) in quotes.iter().enumerate() {
                    let cv = S::from_rat(&call_value(&inst.grid, x, &q.strike));
                    v = v + cv.clone() * primal[vars.buys[i].0].clone()
                        - cv * primal[vars.sells[i].0].clone();
                }
                v
            })
            .collect();
        StaticLeg::Terminal(f)
    };
    Portfolio {
        static_leg,
        gamma: vars.gamma.iter().map(|v| primal[v.0].clone()).collect(),
        inc_up: vars.inc_up.iter().map(|v| primal[v.0].clone()).collect(),
        inc_down: vars.inc_down.iter().map(|v| primal[v.0].clone()).collect(),
    }
}

fn finish_solve<S: LpScalar>(
    inst: &Instance,
    lp_prog: &LinearProgram,
    vars: &HedgeVars,
    opts: &lp::SolveOptions,
    semistatic: bool,
) -> Result<HedgeResult<S>, HedgeError> {
    let sol = lp::solve_with_options::<S>(lp_prog, opts)?;
    match sol.status {
        Status::Optimal => {
            let mut portfolio = extract_portfolio(inst, vars, &sol.primal, semistatic);
            portfolio.normalize();
            let mut slacks = Vec::with_capacity(inst.paths.len());
            for (p, path) in inst.paths.iter().enumerate() {
                let wealth = portfolio_value(&portfolio, path, &inst.grid, &inst.tree);
                let slack = wealth - S::from_rat(&inst.payoff_values[p]);
                let tol = S::base_eps() * (S::one() + slack.abs_val()) * S::from_rat(&rat_int(100));
                if slack < -(tol) {
                    return Err(HedgeError::Inconsistency(format!(
                        "normalized portfolio under-replicates path {p}"
                    )));
                }
                slacks.push(slack);
            }
            let path_duals = vars.path_rows.iter().map(|&r| sol.duals[r].clone()).collect();
            Ok(HedgeResult {
                status: HedgeStatus::Optimal,
                value: Some(sol.objective_value().clone()),
                portfolio: Some(portfolio),
                slacks,
                ray: None,
                path_duals,
                pivot_count: sol.pivot_count,
                pivot_hash: sol.pivot_hash,
            })
        }
        Status::Unbounded => {
            let ray = sol.ray.clone().expect("unbounded solve carries a ray");
            ray.verify(lp_prog).map_err(HedgeError::Inconsistency)?;
            Ok(HedgeResult {
                status: HedgeStatus::ArbitrageUnbounded,
                value: None,
                portfolio: None,
                slacks: Vec::new(),
                ray: Some(ray),
                path_duals: Vec::new(),
                pivot_count: sol.pivot_count,
                pivot_hash: sol.pivot_hash,
            })
        }
        Status::Infeasible => Err(HedgeError::Inconsistency(
            "hedging LP reported infeasible, yet cash replication is always feasible".into(),
        )),
    }
}

/// Solves the semi-static super-replication problem.
pub fn solve_primal<S: LpScalar>(inst: &Instance) -> Result<HedgeResult<S>, HedgeError> {
    solve_primal_with_options(inst, &Default::default())
}

pub fn solve_primal_with_options<S: LpScalar>(
    inst: &Instance,
    opts: &lp::SolveOptions,
) -> Result<HedgeResult<S>, HedgeError> {
    let (lp_prog, vars) = build_semistatic_lp(inst)?;
    finish_solve(inst, &lp_prog, &vars, opts, true)
}

/// Solves the statics-free constrained problem. The trading bound must be
/// finite.
pub fn solve_constrained<S: LpScalar>(inst: &Instance) -> Result<HedgeResult<S>, HedgeError> {
    solve_constrained_with_options(inst, &Default::default())
}

pub fn solve_constrained_with_options<S: LpScalar>(
    inst: &Instance,
    opts: &lp::SolveOptions,
) -> Result<HedgeResult<S>, HedgeError> {
    if inst.grid.bound().as_finite().is_none() {
        return Err(HedgeError::NeedsFiniteBound);
    }
    let (lp_prog, vars) = build_constrained_lp(inst)?;
    finish_solve(inst, &lp_prog, &vars, opts, false)
}

/// Outcome of lifting a grid portfolio to an off-grid path.
#[derive(Debug, Clone, Copy)]
pub struct LiftedValue {
    pub value: f64,
    /// Set when some coordinate rounded down beyond the grid ceiling; the
    /// position and static leg are then extended constantly.
    pub out_of_model: bool,
}

/// Evaluates the lifted strategy on a continuum path `omega` (with
/// `omega[0] = 1`): positions are read at the floored grid prefix, the
/// static leg is interpolated piecewise-linearly.
pub fn lift_portfolio(
    portfolio: &Portfolio<f64>,
    omega: &[f64],
    grid: &GridSpec,
    tree: &Tree,
) -> LiftedValue {
    let n = grid.n();
    let trunc = grid.trunc();
    let steps = omega.len() - 1;
    let mut out_of_model = false;
    let floored: Vec<u32> = omega
        .iter()
        .map(|&x| {
            let raw = (n as f64 * x).floor();
            let idx = if raw < 0.0 { 0 } else { raw as u64 };
            if idx > trunc as u64 {
                out_of_model = true;
                trunc
            } else {
                idx as u32
            }
        })
        .collect();
    let positions: Vec<f64> = (0..steps)
        .map(|k| {
            let node = tree.node_by_prefix(&floored[..=k]).expect("floored prefix is on the tree");
            portfolio.gamma[node]
        })
        .collect();
    let static_value = match &portfolio.static_leg {
        StaticLeg::Terminal(f) => interpolate_f64(f, n, omega[steps]).expect("omega is nonnegative"),
        StaticLeg::Capital(x) => *x,
    };
    let kappa = LpScalar::to_f64(grid.kappa());
    LiftedValue { value: terminal_wealth(static_value, &positions, omega, &kappa), out_of_model }
}

/// Serializes a portfolio as CSV: node rows `depth,prefix,gamma,u,w`
/// (prefix space-separated), then either terminal rows `s_N,f` or a single
/// `x,<capital>` row.
pub fn portfolio_to_csv<S: LpScalar>(portfolio: &Portfolio<S>, grid: &GridSpec, tree: &Tree) -> String {
    let mut out = String::from("depth,prefix,gamma,u,w\n");
    for v in tree.internal_nodes() {
        let node = tree.node(v);
        let prefix = node
            .prefix
            .iter()
            .map(|&i| rat_render(&grid.value(i)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            node.depth,
            prefix,
            portfolio.gamma[v].render(),
            portfolio.inc_up[v].render(),
            portfolio.inc_down[v].render()
        );
    }
    match &portfolio.static_leg {
        StaticLeg::Terminal(f) => {
            out.push_str("s_N,f\n");
            for (x, value) in f.iter().enumerate() {
                let _ = writeln!(out, "{},{}", rat_render(&grid.value(x as u32)), value.render());
            }
        }
        StaticLeg::Capital(x) => {
            let _ = writeln!(out, "x,{}", x.render());
        }
    }
    out
}

/// Parses a portfolio CSV produced by [`portfolio_to_csv`]. Coefficients
/// must be decimal literals (the exact-mode export renders them so).
pub fn portfolio_from_csv(text: &str, grid: &GridSpec, tree: &Tree) -> Result<Portfolio<Rat>, HedgeError> {
    let internal = tree.internal_count();
    let mut gamma = vec![rat_int(0); internal];
    let mut inc_up = vec![rat_int(0); internal];
    let mut inc_down = vec![rat_int(0); internal];
    let mut seen = vec![false; internal];
    let mut f: Vec<Option<Rat>> = vec![None; grid.terminal_points()];
    let mut capital: Option<Rat> = None;
    let mut section_static = false;
    let bad = |ln: usize, msg: &str| HedgeError::BadArtifact(format!("line {}: {msg}", ln + 1));
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == "depth,prefix,gamma,u,w" {
            continue;
        }
        if line == "s_N,f" {
            section_static = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if !section_static && fields.len() == 2 && fields[0] == "x" {
            capital = Some(rat_from_str(fields[1]).map_err(|e| bad(ln, &e.to_string()))?);
            continue;
        }
        if section_static {
            if fields.len() != 2 {
                return Err(bad(ln, "expected s_N,f"));
            }
            let s = rat_from_str(fields[0]).map_err(|e| bad(ln, &e.to_string()))?;
            let idx = s * rat_int(grid.n() as i64);
            if !idx.is_integer() || idx.is_negative() {
                return Err(bad(ln, "terminal point off the grid"));
            }
            let idx = num_traits::ToPrimitive::to_usize(&idx.to_integer())
                .filter(|&i| i < f.len())
                .ok_or_else(|| bad(ln, "terminal point outside the grid"))?;
            f[idx] = Some(rat_from_str(fields[1]).map_err(|e| bad(ln, &e.to_string()))?);
            continue;
        }
        if fields.len() != 5 {
            return Err(bad(ln, "expected depth,prefix,gamma,u,w"));
        }
        let prefix: Vec<u32> = fields[1]
            .split(' ')
            .map(|tok| {
                let v = rat_from_str(tok).map_err(|e| bad(ln, &e.to_string()))?;
                let idx = v * rat_int(grid.n() as i64);
                if !idx.is_integer() || idx.is_negative() {
                    return Err(bad(ln, "prefix coordinate off the grid"));
                }
                num_traits::ToPrimitive::to_u32(&idx.to_integer())
                    .ok_or_else(|| bad(ln, "prefix coordinate out of range"))
            })
            .collect::<Result<_, _>>()?;
        let node = tree
            .node_by_prefix(&prefix)
            .filter(|&v| v < internal)
            .ok_or_else(|| bad(ln, "prefix is not an internal tree node"))?;
        gamma[node] = rat_from_str(fields[2]).map_err(|e| bad(ln, &e.to_string()))?;
        inc_up[node] = rat_from_str(fields[3]).map_err(|e| bad(ln, &e.to_string()))?;
        inc_down[node] = rat_from_str(fields[4]).map_err(|e| bad(ln, &e.to_string()))?;
        seen[node] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(HedgeError::BadArtifact(format!("node {missing} missing from the artifact")));
    }
    let static_leg = if let Some(x) = capital {
        StaticLeg::Capital(x)
    } else {
        let f = f
            .into_iter()
            .enumerate()
            .map(|(x, v)| v.ok_or_else(|| HedgeError::BadArtifact(format!("terminal point {x} missing"))))
            .collect::<Result<Vec<_>, _>>()?;
        StaticLeg::Terminal(f)
    };
    Ok(Portfolio { static_leg, gamma, inc_up, inc_down })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{PayoffSpec, TradeBound};
    use crate::pricing::PricingModel;
    use crate::scalar::rat_frac;

    fn instance_a() -> Instance {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let op = PricingOperator::measure_set(
            vec![vec![rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)]],
            &grid,
        )
        .unwrap();
        Instance::new(grid, PayoffSpec::call(rat_int(1)), Some(PricingModel::exact(op))).unwrap()
    }

    #[test]
    fn portfolio_value_hand_cases() {
        let inst = instance_a();
        // no trading, constant static leg: value is the constant on every path
        let portfolio = Portfolio {
            static_leg: StaticLeg::Terminal(vec![rat_int(5); 3]),
            gamma: vec![rat_int(0)],
            inc_up: vec![rat_int(0)],
            inc_down: vec![rat_int(0)],
        };
        for p in &inst.paths {
            assert_eq!(portfolio_value(&portfolio, p, &inst.grid, &inst.tree), rat_int(5));
        }
        // gamma(root)=1, f=0, path (1,2), kappa=0.1: (2-1) - 0.1*1*1 = 0.9
        let portfolio = Portfolio {
            static_leg: StaticLeg::Terminal(vec![rat_int(0); 3]),
            gamma: vec![rat_int(1)],
            inc_up: vec![rat_int(1)],
            inc_down: vec![rat_int(0)],
        };
        let p = Path::new(vec![1, 2]);
        assert_eq!(portfolio_value(&portfolio, &p, &inst.grid, &inst.tree), rat_frac(9, 10));
        // frictionless linear gain: kappa=0, gamma=a, f=0 gives a(s-1)
        let grid0 = GridSpec::new(1, 2, 1, rat_int(0), TradeBound::Unbounded).unwrap();
        let inst0 = Instance::new(grid0, PayoffSpec::call(rat_int(1)), None).unwrap();
        let portfolio = Portfolio {
            static_leg: StaticLeg::Terminal(vec![rat_int(0); 3]),
            gamma: vec![rat_int(3)],
            inc_up: vec![rat_int(3)],
            inc_down: vec![rat_int(0)],
        };
        let p = Path::new(vec![1, 0]);
        assert_eq!(portfolio_value(&portfolio, &p, &inst0.grid, &inst0.tree), rat_int(-3));
    }

    #[test]
    fn instance_a_primal_value_is_one_quarter() {
        let inst = instance_a();
        let result = solve_primal::<Rat>(&inst).unwrap();
        assert_eq!(result.status, HedgeStatus::Optimal);
        assert_eq!(result.value.unwrap(), rat_frac(1, 4));
        // complementary slackness: some path binds
        assert!(result.slacks.iter().any(|s| s.is_zero()));
        let portfolio = result.portfolio.unwrap();
        assert!(portfolio.is_normal_form());

        let f = solve_primal::<f64>(&inst).unwrap();
        assert!((f.value.unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn constant_claim_prices_to_itself() {
        let grid = GridSpec::new(1, 2, 2, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let op = PricingOperator::measure_set(
            vec![vec![rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)]],
            &grid,
        )
        .unwrap();
        let mut values = std::collections::BTreeMap::new();
        for p in crate::market::enumerate_paths(&grid).unwrap() {
            values.insert(p.indices()[1..].to_vec(), rat_int(5));
        }
        let payoff = PayoffSpec::table(values, true, crate::market::Modulus::None);
        let inst = Instance::new(grid, payoff, Some(PricingModel::exact(op))).unwrap();
        let result = solve_primal::<Rat>(&inst).unwrap();
        assert_eq!(result.value.unwrap(), rat_int(5));
    }

    #[test]
    fn zero_claim_prices_to_zero() {
        let base = instance_a();
        let mut values = std::collections::BTreeMap::new();
        for p in &base.paths {
            values.insert(p.indices()[1..].to_vec(), rat_int(0));
        }
        let payoff = PayoffSpec::table(values, true, crate::market::Modulus::None);
        let inst = Instance::new(base.grid.clone(), payoff, base.pricing.clone()).unwrap();
        let result = solve_primal::<Rat>(&inst).unwrap();
        assert_eq!(result.value.unwrap(), rat_int(0));
    }

    #[test]
    fn mean_above_band_is_arbitrage() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let op = PricingOperator::measure_set(
            vec![vec![rat_frac(1, 10), rat_frac(3, 5), rat_frac(3, 10)]], // mean 1.2
            &grid,
        )
        .unwrap();
        let inst =
            Instance::new(grid, PayoffSpec::call(rat_int(1)), Some(PricingModel::exact(op))).unwrap();
        let result = solve_primal::<Rat>(&inst).unwrap();
        assert_eq!(result.status, HedgeStatus::ArbitrageUnbounded);
        let ray = result.ray.unwrap();
        // the ray is a dominating portfolio direction with negative cost
        assert!(ray.objective_delta < rat_int(0));
    }

    #[test]
    fn constrained_m_zero_is_sup_payoff() {
        let grid = GridSpec::new(1, 2, 2, rat_frac(1, 10), TradeBound::Finite(rat_int(0))).unwrap();
        let inst = Instance::new(grid, PayoffSpec::lookback(), None).unwrap();
        let result = solve_constrained::<Rat>(&inst).unwrap();
        let sup =
            inst.payoff_values.iter().cloned().fold(rat_int(0), |a, b| if b > a { b } else { a });
        assert_eq!(result.value.unwrap(), sup);
        assert_eq!(sup, rat_int(2)); // path (1,2,0): running max 2, terminal 0
    }

    #[test]
    fn constrained_constant_claim() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Finite(rat_int(7))).unwrap();
        let mut values = std::collections::BTreeMap::new();
        for p in crate::market::enumerate_paths(&grid).unwrap() {
            values.insert(p.indices()[1..].to_vec(), rat_int(3));
        }
        let payoff = PayoffSpec::table(values, true, crate::market::Modulus::None);
        let inst = Instance::new(grid, payoff, None).unwrap();
        let result = solve_constrained::<Rat>(&inst).unwrap();
        assert_eq!(result.value.unwrap(), rat_int(3));
    }

    #[test]
    fn monotone_in_bound_and_kappa() {
        let base = instance_a();
        // value is nonincreasing as the trading bound grows
        let mut prev: Option<Rat> = None;
        for m in [0i64, 1, 5, 1000] {
            let inst = base.with_bound(TradeBound::Finite(rat_int(m)));
            let v = solve_primal::<Rat>(&inst).unwrap().value.unwrap();
            if let Some(p) = &prev {
                assert!(v <= *p, "value must not increase with the bound");
            }
            prev = Some(v);
        }
        let unbounded = solve_primal::<Rat>(&base).unwrap().value.unwrap();
        assert!(unbounded <= prev.unwrap());

        // value is nondecreasing in kappa
        let mut prev: Option<Rat> = None;
        for (num, den) in [(0i64, 1i64), (1, 20), (1, 10), (1, 5)] {
            let grid = base.grid.with_kappa(rat_frac(num, den)).unwrap();
            let inst = Instance::new(grid, base.payoff.clone(), base.pricing.clone()).unwrap();
            let v = solve_primal::<Rat>(&inst).unwrap().value.unwrap();
            if let Some(p) = &prev {
                assert!(v >= *p, "value must not decrease with kappa");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn normal_form_preserves_objective_and_feasibility() {
        let inst = instance_a().with_bound(TradeBound::Finite(rat_int(2)));
        let result = solve_primal::<Rat>(&inst).unwrap();
        let portfolio = result.portfolio.unwrap();
        assert!(portfolio.is_normal_form());
        // slacks recomputed from the normalized portfolio are nonnegative
        for s in &result.slacks {
            assert!(!s.is_negative());
        }
        // re-solving reproduces the same optimum
        let again = solve_primal::<Rat>(&inst).unwrap();
        assert_eq!(again.value, result.value);
        assert_eq!(again.pivot_hash, result.pivot_hash);
    }

    #[test]
    fn portfolio_csv_round_trip() {
        let inst = instance_a();
        let result = solve_primal::<Rat>(&inst).unwrap();
        let portfolio = result.portfolio.unwrap();
        let csv = portfolio_to_csv(&portfolio, &inst.grid, &inst.tree);
        let back = portfolio_from_csv(&csv, &inst.grid, &inst.tree).unwrap();
        assert_eq!(back.gamma, portfolio.gamma);
        assert_eq!(back.static_leg, portfolio.static_leg);

        // constrained variant round-trips through the capital row
        let instc = inst.with_bound(TradeBound::Finite(rat_int(2)));
        let rc = solve_constrained::<Rat>(&instc).unwrap();
        let pc = rc.portfolio.unwrap();
        let csv = portfolio_to_csv(&pc, &instc.grid, &instc.tree);
        let back = portfolio_from_csv(&csv, &instc.grid, &instc.tree).unwrap();
        assert_eq!(back.static_leg, pc.static_leg);
    }

    #[test]
    fn lift_on_grid_path_matches_grid_value() {
        let inst = instance_a().with_bound(TradeBound::Finite(rat_int(3)));
        let result = solve_primal::<Rat>(&inst).unwrap();
        let portfolio = result.portfolio.unwrap();
        let pf = portfolio.to_f64();
        for (p, path) in inst.paths.iter().enumerate() {
            let omega = path.values_f64(&inst.grid);
            let lifted = lift_portfolio(&pf, &omega, &inst.grid, &inst.tree);
            assert!(!lifted.out_of_model);
            let grid_value =
                LpScalar::to_f64(&portfolio_value(&portfolio, path, &inst.grid, &inst.tree));
            assert!((lifted.value - grid_value).abs() < 1e-12, "path {p}");
        }
    }

    #[test]
    fn lift_flags_out_of_model_paths() {
        let inst = instance_a().with_bound(TradeBound::Finite(rat_int(3)));
        let result = solve_primal::<Rat>(&inst).unwrap();
        let pf = result.portfolio.unwrap().to_f64();
        let lifted = lift_portfolio(&pf, &[1.0, 7.5], &inst.grid, &inst.tree);
        assert!(lifted.out_of_model);
    }
}
