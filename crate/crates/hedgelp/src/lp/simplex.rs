//! Two-phase revised simplex over a generic scalar, with an explicit basis
//! inverse. Pivot rule: largest reduced cost, falling back to Bland's rule
//! after a degeneracy streak of 50 pivots; ties break on the lowest index,
//! so identical inputs produce identical pivot sequences.

use super::{
    FarkasCertificate, LinearProgram, LpError, RayCertificate, Rel, Sense, Solution, SolveOptions,
    Status,
};
use crate::scalar::LpScalar;

const DEGENERACY_STREAK: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    /// Structural column: original variable index and orientation
    /// (free variables are split into a +1 and a -1 part).
    Structural { var: usize, positive: bool },
    Slack { row: usize },
    Artificial { row: usize },
}

struct Standard<S> {
    m: usize,
    cols: Vec<Vec<(usize, S)>>,
    kinds: Vec<ColKind>,
    /// Phase-2 costs (internal minimize orientation).
    costs: Vec<S>,
    col_norm: Vec<S>,
    b: Vec<S>,
    /// True when the row was multiplied by -1 to make the rhs nonnegative.
    flipped: Vec<bool>,
    first_artificial: usize,
}

fn build_standard<S: LpScalar>(lp: &LinearProgram) -> Standard<S> {
    let m = lp.row_count();
    let negate = lp.sense() == Sense::Maximize;
    let mut cols: Vec<Vec<(usize, S)>> = Vec::new();
    let mut kinds = Vec::new();
    let mut costs = Vec::new();

    // structural columns, in variable order (split parts adjacent)
    let mut row_sign: Vec<S> = Vec::with_capacity(m);
    let mut b: Vec<S> = Vec::with_capacity(m);
    let mut flipped = Vec::with_capacity(m);
    for row in lp.rows() {
        let rhs = S::from_rat(&row.rhs);
        if rhs < S::zero() {
            row_sign.push(-(S::one()));
            b.push(-(rhs));
            flipped.push(true);
        } else {
            row_sign.push(S::one());
            b.push(rhs);
            flipped.push(false);
        }
    }

    // gather per-variable sparse columns once
    let mut var_cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); lp.var_count()];
    for (i, row) in lp.rows().iter().enumerate() {
        for (j, a) in &row.terms {
            var_cols[*j].push((i, row_sign[i].clone() * S::from_rat(a)));
        }
    }
    for (v, def) in lp.vars().iter().enumerate() {
        let mut c = S::from_rat(&def.obj);
        if negate {
            c = -c;
        }
        cols.push(var_cols[v].clone());
        kinds.push(ColKind::Structural { var: v, positive: true });
        costs.push(c.clone());
        if !def.nonneg {
            cols.push(var_cols[v].iter().map(|(i, a)| (*i, -(a.clone()))).collect());
            kinds.push(ColKind::Structural { var: v, positive: false });
            costs.push(-c);
        }
    }
    // slack columns
    for (i, row) in lp.rows().iter().enumerate() {
        let sigma = match row.rel {
            Rel::Le => S::one(),
            Rel::Ge => -(S::one()),
            Rel::Eq => continue,
        };
        cols.push(vec![(i, row_sign[i].clone() * sigma)]);
        kinds.push(ColKind::Slack { row: i });
        costs.push(S::zero());
    }
    let first_artificial = cols.len();
    for i in 0..m {
        cols.push(vec![(i, S::one())]);
        kinds.push(ColKind::Artificial { row: i });
        costs.push(S::zero());
    }
    let col_norm = cols
        .iter()
        .zip(&costs)
        .map(|(col, c)| {
            let mut n = c.abs_val();
            for (_, a) in col {
                n = n + a.abs_val();
            }
            n
        })
        .collect();
    Standard { m, cols, kinds, costs, col_norm, b, flipped, first_artificial }
}

struct Engine<'a, S: LpScalar> {
    std: &'a Standard<S>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<S>>,
    beta: Vec<S>,
    pivots: usize,
    pivot_hash: u64,
    pivot_cap: usize,
    bland: bool,
    degen_streak: usize,
}

impl<'a, S: LpScalar> Engine<'a, S> {
    fn new(std: &'a Standard<S>, pivot_cap: usize) -> Self {
        let m = std.m;
        let mut basis = Vec::with_capacity(m);
        let mut in_basis = vec![false; std.cols.len()];
        // initial basis: slack where its post-flip coefficient is +1, else artificial
        let mut slack_of_row = vec![None; m];
        for (j, kind) in std.kinds.iter().enumerate() {
            if let ColKind::Slack { row } = kind {
                if std.cols[j][0].1 == S::one() {
                    slack_of_row[*row] = Some(j);
                }
            }
        }
        for i in 0..m {
            let j = slack_of_row[i].unwrap_or(std.first_artificial + i);
            basis.push(j);
            in_basis[j] = true;
        }
        let binv = (0..m)
            .map(|r| {
                let mut row = vec![S::zero(); m];
                row[r] = S::one();
                row
            })
            .collect();
        let beta = std.b.clone();
        Engine {
            std,
            basis,
            in_basis,
            binv,
            beta,
            pivots: 0,
            pivot_hash: 0xcbf29ce484222325,
            pivot_cap,
            bland: false,
            degen_streak: 0,
        }
    }

    fn duals(&self, costs: &[S]) -> Vec<S> {
        let m = self.std.m;
        let mut y = vec![S::zero(); m];
        let zero = S::zero();
        for r in 0..m {
            let c = &costs[self.basis[r]];
            if *c == zero {
                continue;
            }
            for k in 0..m {
                let b = &self.binv[r][k];
                if *b != zero {
                    y[k] = y[k].clone() + c.clone() * b.clone();
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[S], costs: &[S]) -> S {
        let zero = S::zero();
        let mut v = costs[j].clone();
        for (i, a) in &self.std.cols[j] {
            if y[*i] != zero {
                v = v - y[*i].clone() * a.clone();
            }
        }
        v
    }

    fn direction(&self, j: usize) -> Vec<S> {
        let m = self.std.m;
        let zero = S::zero();
        let mut t = vec![S::zero(); m];
        for (i, a) in &self.std.cols[j] {
            for r in 0..m {
                let b = &self.binv[r][*i];
                if *b != zero {
                    t[r] = t[r].clone() + b.clone() * a.clone();
                }
            }
        }
        t
    }

    fn record_pivot(&mut self, entering: usize, leaving_row: usize) {
        for byte in entering
            .to_le_bytes()
            .into_iter()
            .chain(leaving_row.to_le_bytes())
        {
            self.pivot_hash ^= byte as u64;
            self.pivot_hash = self.pivot_hash.wrapping_mul(0x100000001b3);
        }
        self.pivots += 1;
    }

    fn pivot(&mut self, entering: usize, r: usize, t: &[S]) {
        let m = self.std.m;
        let zero = S::zero();
        let piv = t[r].clone();
        if piv != S::one() {
            for k in 0..m {
                if self.binv[r][k] != zero {
                    self.binv[r][k] = self.binv[r][k].clone() / piv.clone();
                }
            }
            self.beta[r] = self.beta[r].clone() / piv.clone();
        }
        for i in 0..m {
            if i == r || t[i] == zero {
                continue;
            }
            let factor = t[i].clone();
            for k in 0..m {
                if self.binv[r][k] != zero {
                    self.binv[i][k] =
                        self.binv[i][k].clone() - factor.clone() * self.binv[r][k].clone();
                }
            }
            if self.beta[r] != zero {
                self.beta[i] = self.beta[i].clone() - factor * self.beta[r].clone();
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[entering] = true;
        self.basis[r] = entering;
        self.record_pivot(entering, r);
    }

    /// Runs one simplex phase to optimality or unboundedness.
    /// `allow` filters the columns that may enter.
    fn run_phase(
        &mut self,
        costs: &[S],
        allow: impl Fn(&ColKind) -> bool,
    ) -> Result<Option<(usize, Vec<S>)>, LpError> {
        loop {
            if self.pivots > self.pivot_cap {
                return Err(LpError::Stall(self.pivot_cap));
            }
            let y = self.duals(costs);
            let mut entering: Option<(usize, S)> = None;
            for j in 0..self.std.cols.len() {
                if self.in_basis[j] || !allow(&self.std.kinds[j]) {
                    continue;
                }
                let cbar = self.reduced_cost(j, &y, costs);
                let tol = S::base_eps() * (S::one() + self.std.col_norm[j].clone());
                if cbar < -(tol) {
                    if self.bland {
                        entering = Some((j, cbar));
                        break;
                    }
                    match &entering {
                        Some((_, best)) if !(cbar < *best) => {}
                        _ => entering = Some((j, cbar)),
                    }
                }
            }
            let Some((j, _)) = entering else {
                return Ok(None); // optimal for this phase
            };
            let t = self.direction(j);
            let mut t_scale = S::one();
            for v in &t {
                let a = v.abs_val();
                if a > t_scale {
                    t_scale = a;
                }
            }
            let piv_tol = S::base_eps() * t_scale;
            let mut leave: Option<(usize, S)> = None;
            for r in 0..self.std.m {
                if !(t[r] > piv_tol) {
                    continue;
                }
                let ratio = self.beta[r].clone() / t[r].clone();
                let better = match &leave {
                    None => true,
                    Some((cur, best)) => {
                        if ratio < *best {
                            true
                        } else if ratio == *best {
                            if self.bland {
                                self.basis[r] < self.basis[*cur]
                            } else {
                                false // keep the lowest row index seen first
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, theta)) = leave else {
                return Ok(Some((j, t))); // unbounded direction
            };
            let degen_tol = S::base_eps() * (S::one() + theta.abs_val());
            let degenerate = !(theta > degen_tol);
            if degenerate {
                self.degen_streak += 1;
                if self.degen_streak >= DEGENERACY_STREAK {
                    self.bland = true;
                }
            } else {
                self.degen_streak = 0;
                self.bland = false;
            }
            self.pivot(j, r, &t);
        }
    }

    /// Pivots zero-level artificial variables out of the basis where a
    /// structural or slack column has a nonzero entry; rows where none does
    /// are redundant and keep their artificial at level zero.
    fn purge_artificials(&mut self) {
        for r in 0..self.std.m {
            if !matches!(self.std.kinds[self.basis[r]], ColKind::Artificial { .. }) {
                continue;
            }
            let mut found = None;
            'cols: for j in 0..self.std.first_artificial {
                if self.in_basis[j] {
                    continue;
                }
                let mut val = S::zero();
                for (i, a) in &self.std.cols[j] {
                    val = val + self.binv[r][*i].clone() * a.clone();
                }
                let tol = S::base_eps() * (S::one() + self.std.col_norm[j].clone());
                if val.abs_val() > tol {
                    found = Some(j);
                    break 'cols;
                }
            }
            if let Some(j) = found {
                let t = self.direction(j);
                self.pivot(j, r, &t);
            }
        }
    }
}

pub fn solve_with_options<S: LpScalar>(
    lp: &LinearProgram,
    opts: &SolveOptions,
) -> Result<Solution<S>, LpError> {
    if S::EXACT {
        let nz = lp.nonzeros();
        if nz > opts.exact_nonzero_cap {
            return Err(LpError::ExactCap { nonzeros: nz, cap: opts.exact_nonzero_cap });
        }
    }
    let std = build_standard::<S>(lp);
    let mut eng = Engine::new(&std, opts.pivot_cap);

    // phase 1: minimize the sum of artificials
    let mut phase1_costs = vec![S::zero(); std.cols.len()];
    for j in std.first_artificial..std.cols.len() {
        phase1_costs[j] = S::one();
    }
    let outcome = eng.run_phase(&phase1_costs, |_| true)?;
    debug_assert!(outcome.is_none(), "phase 1 is bounded below by zero");
    let mut infeas = S::zero();
    for r in 0..std.m {
        if matches!(std.kinds[eng.basis[r]], ColKind::Artificial { .. }) {
            infeas = infeas + eng.beta[r].clone();
        }
    }
    let mut b_scale = S::one();
    for v in &std.b {
        b_scale = b_scale + v.abs_val();
    }
    if infeas > S::base_eps() * b_scale {
        let y = eng.duals(&phase1_costs);
        let mults = (0..std.m)
            .map(|i| if std.flipped[i] { y[i].clone() } else { -(y[i].clone()) })
            .collect();
        let farkas = FarkasCertificate { row_mults: mults };
        return Ok(Solution {
            status: Status::Infeasible,
            objective: None,
            primal: Vec::new(),
            duals: Vec::new(),
            farkas: Some(farkas),
            ray: None,
            feas_residual: S::zero(),
            cs_residual: S::zero(),
            pivot_count: eng.pivots,
            pivot_hash: eng.pivot_hash,
        });
    }
    eng.purge_artificials();
    eng.bland = false;
    eng.degen_streak = 0;

    // phase 2: minimize the (possibly negated) objective; artificials are banned
    let outcome = eng.run_phase(&std.costs, |k| !matches!(k, ColKind::Artificial { .. }))?;
    if let Some((entering, t)) = outcome {
        // unbounded: assemble the improving ray in original variable space
        let mut deltas = vec![S::zero(); lp.var_count()];
        apply_structural(&std.kinds[entering], &mut deltas, S::one());
        for r in 0..std.m {
            if t[r] == S::zero() {
                continue;
            }
            apply_structural(&std.kinds[eng.basis[r]], &mut deltas, -(t[r].clone()));
        }
        let mut obj_delta = S::zero();
        for (v, def) in lp.vars().iter().enumerate() {
            obj_delta = obj_delta + S::from_rat(&def.obj) * deltas[v].clone();
        }
        return Ok(Solution {
            status: Status::Unbounded,
            objective: None,
            primal: Vec::new(),
            duals: Vec::new(),
            farkas: None,
            ray: Some(RayCertificate { var_deltas: deltas, objective_delta: obj_delta }),
            feas_residual: S::zero(),
            cs_residual: S::zero(),
            pivot_count: eng.pivots,
            pivot_hash: eng.pivot_hash,
        });
    }

    // optimal: recover primal, duals, objective, residuals
    let mut primal = vec![S::zero(); lp.var_count()];
    for r in 0..std.m {
        apply_structural(&std.kinds[eng.basis[r]], &mut primal, eng.beta[r].clone());
    }
    let mut objective = S::zero();
    for (v, def) in lp.vars().iter().enumerate() {
        objective = objective + S::from_rat(&def.obj) * primal[v].clone();
    }
    let y = eng.duals(&std.costs);
    let negate = lp.sense() == Sense::Maximize;
    let duals: Vec<S> = (0..std.m)
        .map(|i| {
            let yo = if std.flipped[i] { -(y[i].clone()) } else { y[i].clone() };
            if negate {
                -(yo)
            } else {
                yo
            }
        })
        .collect();

    let mut feas_residual = S::zero();
    for (viol, scale) in lp.row_violations(&primal) {
        let normalized = viol / scale;
        if normalized > feas_residual {
            feas_residual = normalized;
        }
    }
    // complementary slackness: dual * row slack and primal * reduced cost
    let mut cs_residual = S::zero();
    for (i, row) in lp.rows().iter().enumerate() {
        let mut lhs = S::zero();
        let mut scale = S::one() + duals[i].abs_val();
        for (j, a) in &row.terms {
            let a_s = S::from_rat(a);
            scale = scale + a_s.abs_val();
            lhs = lhs + a_s * primal[*j].clone();
        }
        let slack = (S::from_rat(&row.rhs) - lhs).abs_val();
        let prod = duals[i].abs_val() * slack / scale;
        if prod > cs_residual {
            cs_residual = prod;
        }
    }
    for j in 0..std.first_artificial {
        if eng.in_basis[j] {
            continue;
        }
        let cbar = eng.reduced_cost(j, &y, &std.costs);
        let ColKind::Structural { var, .. } = std.kinds[j] else {
            continue;
        };
        let scale = S::one() + std.col_norm[j].clone();
        let prod = primal[var].abs_val() * cbar.abs_val() / scale;
        if prod > cs_residual {
            cs_residual = prod;
        }
    }

    Ok(Solution {
        status: Status::Optimal,
        objective: Some(objective),
        primal,
        duals,
        farkas: None,
        ray: None,
        feas_residual,
        cs_residual,
        pivot_count: eng.pivots,
        pivot_hash: eng.pivot_hash,
    })
}

fn apply_structural<S: LpScalar>(kind: &ColKind, out: &mut [S], amount: S) {
    if let ColKind::Structural { var, positive } = kind {
        if *positive {
            out[*var] = out[*var].clone() + amount;
        } else {
            out[*var] = out[*var].clone() - amount;
        }
    }
}
