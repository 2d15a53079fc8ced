//! Self-contained linear programming subsystem with a float mode and an
//! exact rational mode, exposing row duals and machine-checkable
//! infeasibility / unboundedness certificates.
//!
//! Variables are free or nonnegative at the solver core; other bounds are
//! desugared into labeled rows when a program is assembled, which keeps the
//! exact strong-duality identity `objective = sum(dual_i * rhs_i)` free of
//! bound bookkeeping.

mod simplex;

use std::fmt::Write as _;

use num_traits::Signed;

use crate::scalar::{LpScalar, Rat};

pub use simplex::solve_with_options;

/// Hard cap on simplex pivots before a solver-stall error.
pub const DEFAULT_PIVOT_CAP: usize = 1_000_000;
/// Exact mode rejects programs with more than this many nonzeros.
pub const DEFAULT_EXACT_NONZERO_CAP: usize = 2_000;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("invalid bounds on variable {0:?}: lower exceeds upper")]
    InvalidBounds(String),
    #[error("unknown variable id {0}")]
    UnknownVar(usize),
    #[error("solver stalled: pivot cap {0} exceeded")]
    Stall(usize),
    #[error("exact mode cap exceeded: {nonzeros} nonzeros > {cap}; use float mode")]
    ExactCap { nonzeros: usize, cap: usize },
    #[error("solution is not optimal; duals unavailable")]
    NotOptimal,
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub label: String,
    /// True when the variable is constrained to be nonnegative at the core;
    /// free otherwise. Other bounds are desugared into rows.
    pub nonneg: bool,
    pub obj: Rat,
}

#[derive(Debug, Clone)]
pub(crate) struct RowDef {
    pub label: String,
    pub rel: Rel,
    pub terms: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

/// A linear program over exact rational data. The same program can be
/// solved in float or exact mode.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub name: String,
    sense: Sense,
    vars: Vec<VarDef>,
    rows: Vec<RowDef>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        LinearProgram { name: name.into(), sense, vars: Vec::new(), rows: Vec::new() }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Adds a variable. `lower`/`upper` other than `None`/`Some(0)` lower
    /// bounds are encoded as labeled rows `lb_<label>` / `ub_<label>`.
    pub fn add_var(
        &mut self,
        label: impl Into<String>,
        lower: Option<Rat>,
        upper: Option<Rat>,
        obj: Rat,
    ) -> Result<VarId, LpError> {
        let label = label.into();
        if self.vars.iter().any(|v| v.label == label) {
            return Err(LpError::DuplicateLabel(label));
        }
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if l > u {
                return Err(LpError::InvalidBounds(label));
            }
        }
        let id = self.vars.len();
        let zero = num_traits::Zero::zero();
        let (nonneg, lb_row) = match &lower {
            None => (false, None),
            Some(l) if *l == zero => (true, None),
            Some(l) if l > &zero => (true, Some(l.clone())),
            Some(l) => (false, Some(l.clone())),
        };
        self.vars.push(VarDef { label: label.clone(), nonneg, obj });
        if let Some(l) = lb_row {
            self.add_row(format!("lb_{label}"), Rel::Ge, vec![(VarId(id).into(), num_traits::One::one())], l)?;
        }
        if let Some(u) = upper {
            self.add_row(format!("ub_{label}"), Rel::Le, vec![(VarId(id).into(), num_traits::One::one())], u)?;
        }
        Ok(VarId(id))
    }

    pub fn add_row(
        &mut self,
        label: impl Into<String>,
        rel: Rel,
        terms: Vec<(VarIdOrIndex, Rat)>,
        rhs: Rat,
    ) -> Result<usize, LpError> {
        let label = label.into();
        if self.rows.iter().any(|r| r.label == label) {
            return Err(LpError::DuplicateLabel(label));
        }
        let mut seen: Vec<(usize, Rat)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            let idx = v.index();
            if idx >= self.vars.len() {
                return Err(LpError::UnknownVar(idx));
            }
            // merge duplicate variable mentions
            if let Some(slot) = seen.iter_mut().find(|(j, _)| *j == idx) {
                slot.1 = &slot.1 + &a;
            } else {
                seen.push((idx, a));
            }
        }
        seen.retain(|(_, a)| !num_traits::Zero::is_zero(a));
        let id = self.rows.len();
        self.rows.push(RowDef { label, rel, terms: seen, rhs });
        Ok(id)
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    pub fn var_label(&self, id: usize) -> &str {
        &self.vars[id].label
    }

    pub fn row_label(&self, id: usize) -> &str {
        &self.rows[id].label
    }

    pub(crate) fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub(crate) fn rows(&self) -> &[RowDef] {
        &self.rows
    }

    /// Residual of a primal assignment against every row, as
    /// `(violation amount, row scale)` pairs; a feasible assignment has all
    /// violations nonpositive (exact) or below tolerance (float).
    pub fn row_violations<S: LpScalar>(&self, x: &[S]) -> Vec<(S, S)> {
        self.rows
            .iter()
            .map(|row| {
                let mut lhs = S::zero();
                let mut scale = S::one();
                for (j, a) in &row.terms {
                    let a_s = S::from_rat(a);
                    scale = scale + a_s.abs_val();
                    lhs = lhs + a_s * x[*j].clone();
                }
                let rhs = S::from_rat(&row.rhs);
                scale = scale + rhs.abs_val();
                let viol = match row.rel {
                    Rel::Le => lhs - rhs,
                    Rel::Ge => rhs - lhs,
                    Rel::Eq => (lhs - rhs).abs_val(),
                };
                (viol, scale)
            })
            .collect()
    }

    /// Solves in float mode with default options.
    pub fn solve_float(&self) -> Result<Solution<f64>, LpError> {
        solve_with_options(self, &SolveOptions::default())
    }

    /// Solves in exact rational mode; refuses programs beyond the nonzero
    /// cap with an error directing to float mode.
    pub fn solve_exact(&self) -> Result<Solution<Rat>, LpError> {
        solve_with_options(self, &SolveOptions::default())
    }

    /// Writes the program in CPLEX LP text format for external cross-checks.
    pub fn dump_lp_format(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ Problem: {}", self.name);
        let _ = writeln!(
            out,
            "{}",
            match self.sense {
                Sense::Minimize => "Minimize",
                Sense::Maximize => "Maximize",
            }
        );
        let mut obj = String::from(" obj:");
        let mut any = false;
        for v in &self.vars {
            if num_traits::Zero::is_zero(&v.obj) {
                continue;
            }
            push_term(&mut obj, &v.obj, &v.label, &mut any);
        }
        if !any {
            obj.push_str(" 0 __zero");
        }
        let _ = writeln!(out, "{obj}");
        let _ = writeln!(out, "Subject To");
        for row in &self.rows {
            let mut line = format!(" {}:", row.label);
            let mut any = false;
            for (j, a) in &row.terms {
                push_term(&mut line, a, &self.vars[*j].label, &mut any);
            }
            if !any {
                line.push_str(" 0 __zero");
            }
            let _ = writeln!(out, "{line} {} {}", row.rel.symbol(), fmt_coef(&row.rhs));
            let _ = line;
        }
        let _ = writeln!(out, "Bounds");
        for v in &self.vars {
            if !v.nonneg {
                let _ = writeln!(out, " {} free", v.label);
            }
        }
        let _ = writeln!(out, "End");
        out
    }
}

fn fmt_coef(r: &Rat) -> String {
    crate::scalar::rat_to_decimal(r, 17)
}

fn push_term(line: &mut String, a: &Rat, label: &str, any: &mut bool) {
    let mag = Signed::abs(a);
    if a.is_negative() {
        let _ = write!(line, " - {} {}", fmt_coef(&mag), label);
    } else if *any {
        let _ = write!(line, " + {} {}", fmt_coef(&mag), label);
    } else {
        let _ = write!(line, " {} {}", fmt_coef(&mag), label);
    }
    *any = true;
}

/// Anything usable as a variable reference in `add_row`.
#[derive(Debug, Clone, Copy)]
pub struct VarIdOrIndex(usize);

impl VarIdOrIndex {
    fn index(self) -> usize {
        self.0
    }
}

impl From<VarId> for VarIdOrIndex {
    fn from(v: VarId) -> Self {
        VarIdOrIndex(v.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Nonnegative-combination proof that no feasible point exists: with the
/// stored multipliers (`>= 0` on `<=` rows, `<= 0` on `>=` rows), the
/// aggregated row has nonnegative coefficients on every nonnegative
/// variable, zero on every free variable, and a negative right-hand side.
#[derive(Debug, Clone)]
pub struct FarkasCertificate<S> {
    pub row_mults: Vec<S>,
}

impl<S: LpScalar> FarkasCertificate<S> {
    pub fn verify(&self, lp: &LinearProgram) -> Result<(), String> {
        let eps = S::base_eps();
        if self.row_mults.len() != lp.row_count() {
            return Err("multiplier count mismatch".into());
        }
        let mut alpha = vec![S::zero(); lp.var_count()];
        let mut beta = S::zero();
        for (i, row) in lp.rows().iter().enumerate() {
            let m = &self.row_mults[i];
            let bad_sign = match row.rel {
                Rel::Le => *m < -(eps.clone()),
                Rel::Ge => *m > eps.clone(),
                Rel::Eq => false,
            };
            if bad_sign {
                return Err(format!("multiplier sign violated on row {}", row.label));
            }
            for (j, a) in &row.terms {
                alpha[*j] = alpha[*j].clone() + m.clone() * S::from_rat(a);
            }
            beta = beta + m.clone() * S::from_rat(&row.rhs);
        }
        for (j, v) in lp.vars().iter().enumerate() {
            let scale = S::one() + alpha[j].abs_val();
            if v.nonneg {
                if alpha[j] < -(eps.clone() * scale) {
                    return Err(format!("aggregated coefficient negative on {}", v.label));
                }
            } else if alpha[j].abs_val() > eps.clone() * scale {
                return Err(format!("aggregated coefficient nonzero on free {}", v.label));
            }
        }
        let scale = S::one() + beta.abs_val();
        if beta >= -(eps * scale) {
            return Err("aggregated right-hand side not negative".into());
        }
        Ok(())
    }

    /// Human-readable row-combination dump.
    pub fn render(&self, lp: &LinearProgram) -> String {
        let mut out = String::from("infeasibility certificate (row combination):\n");
        for (i, m) in self.row_mults.iter().enumerate() {
            if m.abs_val() > S::base_eps() || (S::EXACT && !(m.clone() == S::zero())) {
                let _ = writeln!(out, "  {} * {}", m, lp.row_label(i));
            }
        }
        out.push_str("aggregates to: nonneg combination with negative rhs\n");
        out
    }
}

/// Feasible improving ray proving unboundedness: moving along `var_deltas`
/// preserves every row and variable sign while improving the objective.
#[derive(Debug, Clone)]
pub struct RayCertificate<S> {
    pub var_deltas: Vec<S>,
    pub objective_delta: S,
}

impl<S: LpScalar> RayCertificate<S> {
    pub fn verify(&self, lp: &LinearProgram) -> Result<(), String> {
        let eps = S::base_eps();
        if self.var_deltas.len() != lp.var_count() {
            return Err("delta count mismatch".into());
        }
        for (j, v) in lp.vars().iter().enumerate() {
            if v.nonneg {
                let scale = S::one() + self.var_deltas[j].abs_val();
                if self.var_deltas[j] < -(eps.clone() * scale) {
                    return Err(format!("ray leaves the nonnegative orthant on {}", v.label));
                }
            }
        }
        for row in lp.rows() {
            let mut dot = S::zero();
            let mut scale = S::one();
            for (j, a) in &row.terms {
                let a_s = S::from_rat(a);
                scale = scale + a_s.abs_val() * self.var_deltas[*j].abs_val();
                dot = dot + a_s * self.var_deltas[*j].clone();
            }
            let tol = eps.clone() * scale;
            let ok = match row.rel {
                Rel::Le => dot <= tol,
                Rel::Ge => dot >= -(tol),
                Rel::Eq => dot.abs_val() <= tol,
            };
            if !ok {
                return Err(format!("ray violates row {}", row.label));
            }
        }
        let mut obj = S::zero();
        for (j, v) in lp.vars().iter().enumerate() {
            obj = obj + S::from_rat(&v.obj) * self.var_deltas[j].clone();
        }
        let improving = match lp.sense() {
            Sense::Minimize => obj < -(eps.clone()),
            Sense::Maximize => obj > eps.clone(),
        };
        if !improving {
            return Err("ray does not improve the objective".into());
        }
        Ok(())
    }
}

/// Result of a solve. At `Optimal` the primal/dual vectors are populated;
/// `Infeasible`/`Unbounded` carry their certificates instead.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub status: Status,
    pub objective: Option<S>,
    /// One value per variable (optimal only).
    pub primal: Vec<S>,
    /// One value per row: nonnegative on binding `<=` rows of a
    /// maximization, nonpositive on its `>=` rows, mirrored for
    /// minimization (optimal only).
    pub duals: Vec<S>,
    pub farkas: Option<FarkasCertificate<S>>,
    pub ray: Option<RayCertificate<S>>,
    /// Largest primal feasibility violation, scaled.
    pub feas_residual: S,
    /// Largest complementary-slackness product, scaled.
    pub cs_residual: S,
    pub pivot_count: usize,
    /// FNV-1a hash of the pivot (entering, leaving) sequence; equal inputs
    /// produce equal hashes.
    pub pivot_hash: u64,
}

impl<S: LpScalar> Solution<S> {
    pub fn objective_value(&self) -> &S {
        self.objective.as_ref().expect("objective available at optimal status")
    }

    /// Dual objective `sum(dual_i * rhs_i)`; equals the primal objective
    /// exactly in exact mode at optimal status.
    pub fn dual_objective(&self, lp: &LinearProgram) -> S {
        let mut acc = S::zero();
        for (i, row) in lp.rows().iter().enumerate() {
            acc = acc + self.duals[i].clone() * S::from_rat(&row.rhs);
        }
        acc
    }
}

/// Labeled dual map per spec: only meaningful at optimal status.
pub fn extract_duals<S: LpScalar>(
    sol: &Solution<S>,
    lp: &LinearProgram,
) -> Result<Vec<(String, S)>, LpError> {
    if sol.status != Status::Optimal {
        return Err(LpError::NotOptimal);
    }
    Ok(lp
        .rows()
        .iter()
        .zip(&sol.duals)
        .map(|(row, d)| (row.label.clone(), d.clone()))
        .collect())
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub pivot_cap: usize,
    pub exact_nonzero_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { pivot_cap: DEFAULT_PIVOT_CAP, exact_nonzero_cap: DEFAULT_EXACT_NONZERO_CAP }
    }
}
