//! Dual transport problems: maximization over approximate-martingale path
//! measures with operator-bounded terminal marginals, the conjugate-penalty
//! dual of the constrained problem, and no-arbitrage feasibility probes.
//!
//! Band and penalty rows are written in mass-multiplied form: with
//! `m(v) = sum_{paths through v} q * (s_N - s_v)` and
//! `c(v) = s_v * sum_{paths through v} q`, the shadow-price band at node
//! `v` reads `|m(v)| <= kappa c(v)` and the penalty epigraph reads
//! `t_v >= |m(v)| - kappa c(v)`, so zero-mass nodes are vacuous and no
//! division ever occurs.

use num_traits::Zero;

use crate::instance::Instance;
use crate::lp::{self, FarkasCertificate, LinearProgram, Rel, Sense, Status, VarId};
use crate::market::TradeBound;
use crate::pricing::{marginal_constraints, MarginalConstraintFamily};
use crate::scalar::{rat_int, LpScalar, Rat};

#[derive(Debug, thiserror::Error)]
pub enum DualError {
    #[error("lp: {0}")]
    Lp(#[from] lp::LpError),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("the dual problem needs a pricing model")]
    NeedsPricing,
    #[error("cell is empty")]
    EmptyCell,
}

/// A probability assignment over enumerated paths.
#[derive(Debug, Clone)]
pub struct PathMeasure<S> {
    pub weights: Vec<S>,
}

impl<S: LpScalar> PathMeasure<S> {
    pub fn mass(&self) -> S {
        self.weights.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn expectation(&self, values: &[Rat]) -> S {
        self.weights
            .iter()
            .zip(values)
            .fold(S::zero(), |acc, (q, v)| acc + q.clone() * S::from_rat(v))
    }

    /// Terminal marginal induced on the grid points.
    pub fn terminal_marginal(&self, inst: &Instance) -> Vec<S> {
        let mut out = vec![S::zero(); inst.grid.terminal_points()];
        for (p, q) in self.weights.iter().enumerate() {
            let x = inst.terminal_of(p) as usize;
            out[x] = out[x].clone() + q.clone();
        }
        out
    }

    pub fn to_f64(&self) -> PathMeasure<f64> {
        PathMeasure { weights: self.weights.iter().map(|w| w.to_f64()).collect() }
    }
}

/// Per-node conditional expectation of the terminal price given the
/// filtration at `depth`; `None` marks vacuous (zero-mass) nodes.
pub fn conditional_expectation<S: LpScalar>(
    q: &PathMeasure<S>,
    inst: &Instance,
    depth: usize,
) -> Vec<Option<S>> {
    let tree = &inst.tree;
    tree.depth_range(depth)
        .map(|v| {
            let node = tree.node(v);
            let mut mass = S::zero();
            let mut wsum = S::zero();
            for p in node.path_range.0..node.path_range.1 {
                let w = q.weights[p].clone();
                let s_n = S::from_rat(&inst.grid.value(inst.terminal_of(p)));
                mass = mass + w.clone();
                wsum = wsum + w * s_n;
            }
            if mass == S::zero() {
                None
            } else {
                Some(wsum / mass)
            }
        })
        .collect()
}

/// Variable handles of an assembled transport LP.
#[derive(Debug, Clone)]
pub struct TransportVars {
    pub weights: Vec<VarId>,
    pub mix: Vec<VarId>,
    pub penalties: Vec<VarId>,
}

fn band_terms(
    inst: &Instance,
    v: usize,
    weights: &[VarId],
    kappa_shift: &Rat,
) -> Vec<(lp::VarIdOrIndex, Rat)> {
    // coefficients q_w * (s_N(w) - (1 +/- kappa) s_v) over paths through v
    let node = inst.tree.node(v);
    let s_v = inst.grid.value(node.value_index);
    let shifted = kappa_shift * &s_v;
    (node.path_range.0..node.path_range.1)
        .filter_map(|p| {
            let coef = inst.grid.value(inst.terminal_of(p)) - &shifted;
            (!coef.is_zero()).then(|| (weights[p].into(), coef))
        })
        .collect()
}

fn add_marginal_rows(
    lp: &mut LinearProgram,
    inst: &Instance,
    family: &MarginalConstraintFamily,
    weights: &[VarId],
) -> Vec<VarId> {
    let mix: Vec<VarId> = (0..family.aux_count)
        .map(|j| lp.add_var(format!("mix_{j}"), Some(rat_int(0)), None, rat_int(0)).unwrap())
        .collect();
    // terminal marginal expanded through the path weights
    let mut by_terminal: Vec<Vec<usize>> = vec![Vec::new(); inst.grid.terminal_points()];
    for (p, path) in inst.paths.iter().enumerate() {
        by_terminal[path.terminal_index() as usize].push(p);
    }
    for row in &family.rows {
        let mut terms: Vec<(lp::VarIdOrIndex, Rat)> = Vec::new();
        for (x, a) in &row.marg_terms {
            for &p in &by_terminal[*x] {
                terms.push((weights[p].into(), a.clone()));
            }
        }
        for (j, a) in &row.aux_terms {
            terms.push((mix[*j].into(), a.clone()));
        }
        lp.add_row(row.label.clone(), row.rel, terms, row.rhs.clone()).unwrap();
    }
    mix
}

/// Assembles the hard-band transport LP over the approximate-martingale
/// measures consistent with the pricing model: maximize `E_q[G]` subject
/// to total mass 1, per-node band rows, and the marginal family. This is
/// the dual of the semi-static problem with an unbounded trading increment.
pub fn build_dual_lp(inst: &Instance) -> Result<(LinearProgram, TransportVars), DualError> {
    build_dual_lp_with_objective(inst, None)
}

/// Same constraint set with an arbitrary objective vector over paths
/// (`None` uses the payoff). Used by the feasibility and local probes.
pub fn build_dual_lp_with_objective(
    inst: &Instance,
    objective: Option<&[Rat]>,
) -> Result<(LinearProgram, TransportVars), DualError> {
    let pricing = inst.pricing.as_ref().ok_or(DualError::NeedsPricing)?;
    let mut lp = LinearProgram::new("approx_martingale_transport", Sense::Maximize);
    let weights = add_weight_vars(&mut lp, inst, objective);
    lp.add_row(
        "mass",
        Rel::Eq,
        weights.iter().map(|&w| (w.into(), rat_int(1))).collect(),
        rat_int(1),
    )
    .unwrap();
    let kappa = inst.grid.kappa().clone();
    let lo_shift = rat_int(1) - &kappa;
    let hi_shift = rat_int(1) + &kappa;
    for v in inst.tree.internal_nodes() {
        let lo = band_terms(inst, v, &weights, &lo_shift);
        if !lo.is_empty() {
            lp.add_row(format!("band_lo_{v}"), Rel::Ge, lo, rat_int(0)).unwrap();
        }
        let hi = band_terms(inst, v, &weights, &hi_shift);
        if !hi.is_empty() {
            lp.add_row(format!("band_hi_{v}"), Rel::Le, hi, rat_int(0)).unwrap();
        }
    }
    let family = marginal_constraints(pricing, &inst.grid);
    let mix = add_marginal_rows(&mut lp, inst, &family, &weights);
    Ok((lp, TransportVars { weights, mix, penalties: Vec::new() }))
}

fn add_weight_vars(
    lp: &mut LinearProgram,
    inst: &Instance,
    objective: Option<&[Rat]>,
) -> Vec<VarId> {
    (0..inst.paths.len())
        .map(|p| {
            let obj = match objective {
                Some(c) => c[p].clone(),
                None => inst.payoff_values[p].clone(),
            };
            lp.add_var(format!("q_{p}"), Some(rat_int(0)), None, obj).unwrap()
        })
        .collect()
}

fn add_penalty_block(
    lp: &mut LinearProgram,
    inst: &Instance,
    weights: &[VarId],
    bound: &Rat,
) -> Vec<VarId> {
    let kappa = inst.grid.kappa().clone();
    let lo_shift = rat_int(1) - &kappa;
    let hi_shift = rat_int(1) + &kappa;
    let mut penalties = Vec::with_capacity(inst.tree.internal_count());
    for v in inst.tree.internal_nodes() {
        let t = lp.add_var(format!("pen_{v}"), Some(rat_int(0)), None, -(bound.clone())).unwrap();
        penalties.push(t);
        // t_v >= m(v) - kappa c(v):  t_v - sum q (s_N - (1+kappa) s_v) >= 0
        let mut up: Vec<(lp::VarIdOrIndex, Rat)> = vec![(t.into(), rat_int(1))];
        for (var, coef) in band_terms(inst, v, weights, &hi_shift) {
            up.push((var, -coef));
        }
        lp.add_row(format!("pen_up_{v}"), Rel::Ge, up, rat_int(0)).unwrap();
        // t_v >= -m(v) - kappa c(v):  t_v + sum q (s_N - (1-kappa) s_v) >= 0
        let mut dn: Vec<(lp::VarIdOrIndex, Rat)> = vec![(t.into(), rat_int(1))];
        dn.extend(band_terms(inst, v, weights, &lo_shift));
        lp.add_row(format!("pen_dn_{v}"), Rel::Ge, dn, rat_int(0)).unwrap();
    }
    penalties
}

/// Assembles the penalized transport LP dual to the semi-static problem
/// with a finite trading increment `M`: the hard band is replaced by the
/// conjugate penalty `M (|m(v)| - kappa c(v))^+` while the marginal family
/// stays.
pub fn build_dual_penalized_lp(
    inst: &Instance,
    bound: &Rat,
) -> Result<(LinearProgram, TransportVars), DualError> {
    let pricing = inst.pricing.as_ref().ok_or(DualError::NeedsPricing)?;
    let mut lp = LinearProgram::new("penalized_transport", Sense::Maximize);
    let weights = add_weight_vars(&mut lp, inst, None);
    lp.add_row(
        "mass",
        Rel::Eq,
        weights.iter().map(|&w| (w.into(), rat_int(1))).collect(),
        rat_int(1),
    )
    .unwrap();
    let penalties = add_penalty_block(&mut lp, inst, &weights, bound);
    let family = marginal_constraints(pricing, &inst.grid);
    let mix = add_marginal_rows(&mut lp, inst, &family, &weights);
    Ok((lp, TransportVars { weights, mix, penalties }))
}

/// Assembles the statics-free penalty dual: maximize
/// `E_q[F] - M sum_v t_v` over all probability measures on the enumerated
/// paths, with the per-node conjugate-penalty epigraph. Dual to the
/// constrained hedging problem.
pub fn build_penalty_dual_lp(
    inst: &Instance,
    bound: &Rat,
) -> Result<(LinearProgram, TransportVars), DualError> {
    let mut lp = LinearProgram::new("penalty_transport", Sense::Maximize);
    let weights = add_weight_vars(&mut lp, inst, None);
    lp.add_row(
        "mass",
        Rel::Eq,
        weights.iter().map(|&w| (w.into(), rat_int(1))).collect(),
        rat_int(1),
    )
    .unwrap();
    let penalties = add_penalty_block(&mut lp, inst, &weights, bound);
    Ok((lp, TransportVars { weights, mix: Vec::new(), penalties }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualStatus {
    Optimal,
    /// The measure set is empty: model-independent arbitrage.
    InfeasibleEmpty,
}

#[derive(Debug, Clone)]
pub struct DualResult<S> {
    pub status: DualStatus,
    pub value: Option<S>,
    pub measure: Option<PathMeasure<S>>,
    /// Labels of inequality rows binding at the optimum.
    pub binding: Vec<String>,
    pub farkas: Option<FarkasCertificate<S>>,
    /// True when the finite-bound penalty form was solved.
    pub penalized: bool,
    pub pivot_count: usize,
    pub pivot_hash: u64,
}

fn binding_rows<S: LpScalar>(lp: &LinearProgram, x: &[S]) -> Vec<String> {
    lp.row_violations(x)
        .into_iter()
        .enumerate()
        .filter_map(|(i, (viol, scale))| {
            let label = lp.row_label(i);
            let tol = S::base_eps() * scale;
            let at_face = viol.abs_val() <= tol;
            (at_face && (label.starts_with("band_") || label.starts_with("quote_")))
                .then(|| label.to_owned())
        })
        .collect()
}

/// Solves the transport dual matching the instance's trading bound: the
/// hard band when unbounded, the penalized form when finite.
pub fn solve_dual<S: LpScalar>(inst: &Instance) -> Result<DualResult<S>, DualError> {
    solve_dual_with_options(inst, &Default::default())
}

pub fn solve_dual_with_options<S: LpScalar>(
    inst: &Instance,
    opts: &lp::SolveOptions,
) -> Result<DualResult<S>, DualError> {
    let (lp_prog, vars, penalized) = match inst.grid.bound() {
        TradeBound::Unbounded => {
            let (lp_prog, vars) = build_dual_lp(inst)?;
            (lp_prog, vars, false)
        }
        TradeBound::Finite(m) => {
            let (lp_prog, vars) = build_dual_penalized_lp(inst, m)?;
            (lp_prog, vars, true)
        }
    };
    let sol = lp::solve_with_options::<S>(&lp_prog, opts)?;
    match sol.status {
        Status::Optimal => {
            let measure = PathMeasure {
                weights: vars.weights.iter().map(|v| sol.primal[v.0].clone()).collect(),
            };
            // the optimum recomputed independently from the measure
            let recomputed = if penalized {
                let TradeBound::Finite(m) = inst.grid.bound() else { unreachable!() };
                penalty_value(&measure, inst, m)
            } else {
                measure.expectation(&inst.payoff_values)
            };
            let diff = (recomputed - sol.objective_value().clone()).abs_val();
            let tol = S::base_eps()
                * (S::one() + sol.objective_value().abs_val())
                * S::from_rat(&rat_int(100));
            if diff > tol {
                return Err(DualError::Inconsistency(
                    "objective does not match the measure's recomputed value".into(),
                ));
            }
            Ok(DualResult {
                status: DualStatus::Optimal,
                value: Some(sol.objective_value().clone()),
                binding: binding_rows(&lp_prog, &sol.primal),
                measure: Some(measure),
                farkas: None,
                penalized,
                pivot_count: sol.pivot_count,
                pivot_hash: sol.pivot_hash,
            })
        }
        Status::Infeasible => {
            let farkas = sol.farkas.clone().expect("infeasible solve carries a certificate");
            farkas.verify(&lp_prog).map_err(DualError::Inconsistency)?;
            Ok(DualResult {
                status: DualStatus::InfeasibleEmpty,
                value: None,
                measure: None,
                binding: Vec::new(),
                farkas: Some(farkas),
                penalized,
                pivot_count: sol.pivot_count,
                pivot_hash: sol.pivot_hash,
            })
        }
        Status::Unbounded => Err(DualError::Inconsistency(
            "transport LP cannot be unbounded: mass is 1 and the payoff is finite".into(),
        )),
    }
}

/// Directly computes `E_q[F] - M sum_v (|m(v)| - kappa c(v))^+` from the
/// measure, bypassing the LP epigraph; the independent oracle for the
/// penalty LPs.
pub fn penalty_value<S: LpScalar>(q: &PathMeasure<S>, inst: &Instance, bound: &Rat) -> S {
    let mut value = q.expectation(&inst.payoff_values);
    let kappa = S::from_rat(inst.grid.kappa());
    let m_s = S::from_rat(bound);
    for v in inst.tree.internal_nodes() {
        let node = inst.tree.node(v);
        let s_v = S::from_rat(&inst.grid.value(node.value_index));
        let mut mass = S::zero();
        let mut dev = S::zero();
        for p in node.path_range.0..node.path_range.1 {
            let w = q.weights[p].clone();
            let s_n = S::from_rat(&inst.grid.value(inst.terminal_of(p)));
            dev = dev + w.clone() * (s_n - s_v.clone());
            mass = mass + w;
        }
        let excess = dev.abs_val() - kappa.clone() * s_v * mass;
        if excess > S::zero() {
            value = value - m_s.clone() * excess;
        }
    }
    value
}

/// Report from certifying a path measure against the approximate
/// martingale band and the marginal family.
#[derive(Debug, Clone)]
pub struct CertifyReport {
    pub mass_error: f64,
    pub band_violations: usize,
    pub marginal_feasible: bool,
}

impl CertifyReport {
    pub fn certified(&self) -> bool {
        self.mass_error <= 1e-10 && self.band_violations == 0 && self.marginal_feasible
    }
}

/// Certifies membership of `q` in the approximate-martingale measure set:
/// unit mass, per-node band in mass-multiplied form, and marginal
/// feasibility by one LP call. Exact in exact mode; scaled tolerances with
/// a 1e-8 marginal slack in float mode.
pub fn certify_measure<S: LpScalar>(
    q: &PathMeasure<S>,
    inst: &Instance,
) -> Result<CertifyReport, DualError> {
    let pricing = inst.pricing.as_ref().ok_or(DualError::NeedsPricing)?;
    let mass_error = LpScalar::to_f64(&(q.mass() - S::one()).abs_val()).abs();
    let kappa = S::from_rat(inst.grid.kappa());
    let mut band_violations = 0usize;
    for v in inst.tree.internal_nodes() {
        let node = inst.tree.node(v);
        let s_v = S::from_rat(&inst.grid.value(node.value_index));
        let mut mass = S::zero();
        let mut dev = S::zero();
        let mut scale = S::one();
        for p in node.path_range.0..node.path_range.1 {
            let w = q.weights[p].clone();
            let s_n = S::from_rat(&inst.grid.value(inst.terminal_of(p)));
            scale = scale + w.abs_val() * s_n.abs_val();
            dev = dev + w.clone() * (s_n - s_v.clone());
            mass = mass + w;
        }
        let excess = dev.abs_val() - kappa.clone() * s_v * mass;
        if excess > S::base_eps() * scale {
            band_violations += 1;
        }
    }
    let family = marginal_constraints(pricing, &inst.grid);
    let marginal: Vec<Rat> = q.terminal_marginal(inst).iter().map(|w| w.to_rat()).collect();
    let marginal_feasible = if S::EXACT {
        family.is_feasible(&marginal)?
    } else {
        family_feasible_with_slack(&family, &marginal, &Rat::new(1.into(), 100_000_000.into()))?
    };
    Ok(CertifyReport { mass_error, band_violations, marginal_feasible })
}

fn family_feasible_with_slack(
    family: &MarginalConstraintFamily,
    marginal: &[Rat],
    slack: &Rat,
) -> Result<bool, lp::LpError> {
    let mut rows = Vec::new();
    for r in &family.rows {
        match r.rel {
            Rel::Le => {
                let mut r = r.clone();
                r.rhs = &r.rhs + slack;
                rows.push(r);
            }
            Rel::Ge => {
                let mut r = r.clone();
                r.rhs = &r.rhs - slack;
                rows.push(r);
            }
            Rel::Eq => {
                let mut up = r.clone();
                up.label = format!("{}_up", r.label);
                up.rel = Rel::Le;
                up.rhs = &r.rhs + slack;
                rows.push(up);
                let mut dn = r.clone();
                dn.label = format!("{}_dn", r.label);
                dn.rel = Rel::Ge;
                dn.rhs = &r.rhs - slack;
                rows.push(dn);
            }
        }
    }
    MarginalConstraintFamily { aux_count: family.aux_count, rows }.is_feasible(marginal)
}

/// Verdict of the no-arbitrage feasibility probe (objective-zero hard-band
/// transport LP, any trading bound).
#[derive(Debug)]
pub enum FtapVerdict<S> {
    /// A witness measure exists: no model-independent arbitrage.
    Feasible(PathMeasure<S>),
    /// The measure set is empty; the certificate proves it.
    Infeasible(FarkasCertificate<S>),
}

pub fn ftap_feasibility<S: LpScalar>(inst: &Instance) -> Result<FtapVerdict<S>, DualError> {
    let zeros = vec![rat_int(0); inst.paths.len()];
    let (lp_prog, vars) = build_dual_lp_with_objective(inst, Some(&zeros))?;
    let sol = lp::solve_with_options::<S>(&lp_prog, &Default::default())?;
    match sol.status {
        Status::Optimal => Ok(FtapVerdict::Feasible(PathMeasure {
            weights: vars.weights.iter().map(|v| sol.primal[v.0].clone()).collect(),
        })),
        Status::Infeasible => {
            let farkas = sol.farkas.expect("infeasible solve carries a certificate");
            farkas.verify(&lp_prog).map_err(DualError::Inconsistency)?;
            Ok(FtapVerdict::Infeasible(farkas))
        }
        Status::Unbounded => {
            Err(DualError::Inconsistency("objective-zero LP cannot be unbounded".into()))
        }
    }
}

/// Maximal probability the measure set assigns to a set of paths; zero
/// certifies a local arbitrage supported there.
pub fn local_arbitrage_probe<S: LpScalar>(
    inst: &Instance,
    cell: &[usize],
) -> Result<(S, PathMeasure<S>), DualError> {
    if cell.is_empty() {
        return Err(DualError::EmptyCell);
    }
    let mut objective = vec![rat_int(0); inst.paths.len()];
    for &p in cell {
        objective[p] = rat_int(1);
    }
    let (lp_prog, vars) = build_dual_lp_with_objective(inst, Some(&objective))?;
    let sol = lp::solve_with_options::<S>(&lp_prog, &Default::default())?;
    match sol.status {
        Status::Optimal => {
            let measure = PathMeasure {
                weights: vars.weights.iter().map(|v| sol.primal[v.0].clone()).collect(),
            };
            Ok((sol.objective_value().clone(), measure))
        }
        Status::Infeasible => Err(DualError::Inconsistency(
            "probe on an empty measure set; run the feasibility probe first".into(),
        )),
        Status::Unbounded => Err(DualError::Inconsistency("probe LP cannot be unbounded".into())),
    }
}
