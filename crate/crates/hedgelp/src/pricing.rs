//! Sublinear pricing operator for static options and its dual constraint
//! family on terminal marginals.
//!
//! Two finitely parameterized forms are provided: a finite set of candidate
//! terminal laws (the price of `f` is the worst-case expectation) and a
//! book of call quotes with bid/ask spreads plus unit cash (the price is
//! the cheapest static super-replication). Both are convex, positively
//! homogeneous, and map constants to themselves by construction.

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::lp::{self, LinearProgram, Rel, Sense, Status};
use crate::market::GridSpec;
use crate::scalar::{rat_int, rat_to_decimal, LpScalar, Rat};

#[derive(Debug, thiserror::Error)]
pub enum PricingError {
    #[error("{0}")]
    Invalid(String),
    #[error("static quotes admit arbitrage: the replication cost is unbounded below")]
    StaticArbitrage,
    #[error("lp: {0}")]
    Lp(#[from] lp::LpError),
}

#[derive(Debug, Clone)]
pub struct CallQuote {
    pub strike: Rat,
    pub bid: Rat,
    pub ask: Rat,
}

#[derive(Debug, Clone)]
pub enum PricingOperator {
    MeasureSet { measures: Vec<Vec<Rat>> },
    CallQuotes { quotes: Vec<CallQuote> },
}

/// A pricing operator together with the scalar widening `epsilon >= 0`
/// applied to every marginal inequality (a finite surrogate for the
/// relaxed marginal family; flagged in reports when nonzero).
#[derive(Debug, Clone)]
pub struct PricingModel {
    pub operator: PricingOperator,
    pub epsilon: Rat,
}

impl PricingModel {
    pub fn new(operator: PricingOperator, epsilon: Rat) -> Result<Self, PricingError> {
        if epsilon.is_negative() {
            return Err(PricingError::Invalid("epsilon must be nonnegative".into()));
        }
        Ok(PricingModel { operator, epsilon })
    }

    pub fn exact(operator: PricingOperator) -> Self {
        PricingModel { operator, epsilon: rat_int(0) }
    }

    pub fn describe(&self) -> String {
        let base = match &self.operator {
            PricingOperator::MeasureSet { measures } => format!("measure-set({} laws)", measures.len()),
            PricingOperator::CallQuotes { quotes } => format!("call-quotes({} strikes)", quotes.len()),
        };
        if self.epsilon.is_zero() {
            base
        } else {
            format!("{base} widened by epsilon={}", rat_to_decimal(&self.epsilon, 12))
        }
    }
}

impl PricingOperator {
    /// Candidate-law form. Each vector is a probability over the terminal
    /// grid points `{0, h, ..., Jh}`: nonnegative with total mass 1 within
    /// 1e-12.
    pub fn measure_set(measures: Vec<Vec<Rat>>, grid: &GridSpec) -> Result<Self, PricingError> {
        if measures.is_empty() {
            return Err(PricingError::Invalid("measure set is empty".into()));
        }
        let want = grid.terminal_points();
        let tol = Rat::new(1.into(), 1_000_000_000_000i64.into());
        for (j, m) in measures.iter().enumerate() {
            if m.len() != want {
                return Err(PricingError::Invalid(format!(
                    "measure {j} has {} weights, expected {want} (one per terminal grid point)",
                    m.len()
                )));
            }
            if m.iter().any(|w| w.is_negative()) {
                return Err(PricingError::Invalid(format!("measure {j} has a negative weight")));
            }
            let sum: Rat = m.iter().cloned().fold(rat_int(0), |a, b| a + b);
            if Signed::abs(&(sum.clone() - rat_int(1))) > tol {
                return Err(PricingError::Invalid(format!(
                    "measure {j} sums to {}, not 1",
                    rat_to_decimal(&sum, 14)
                )));
            }
        }
        Ok(PricingOperator::MeasureSet { measures })
    }

    /// Quote-book form: distinct nonnegative strikes with `bid <= ask`.
    pub fn call_quotes(quotes: Vec<CallQuote>) -> Result<Self, PricingError> {
        for (i, q) in quotes.iter().enumerate() {
            if q.bid > q.ask {
                return Err(PricingError::Invalid(format!(
                    "quote {i}: bid {} exceeds ask {}",
                    rat_to_decimal(&q.bid, 12),
                    rat_to_decimal(&q.ask, 12)
                )));
            }
            if q.strike.is_negative() {
                return Err(PricingError::Invalid(format!("quote {i}: negative strike")));
            }
        }
        for i in 0..quotes.len() {
            for k in i + 1..quotes.len() {
                if quotes[i].strike == quotes[k].strike {
                    return Err(PricingError::Invalid(format!("quotes {i} and {k} share a strike")));
                }
            }
        }
        Ok(PricingOperator::CallQuotes { quotes })
    }

    /// Bypasses validation; only for exercising the axiom checker on
    /// malformed operators.
    pub fn from_parts_unchecked(measures: Vec<Vec<Rat>>) -> Self {
        PricingOperator::MeasureSet { measures }
    }
}

/// Call payoff `(x - strike)^+` at a terminal grid point.
pub fn call_value(grid: &GridSpec, idx: u32, strike: &Rat) -> Rat {
    let v = grid.value(idx) - strike;
    if v.is_negative() {
        rat_int(0)
    } else {
        v
    }
}

/// Prices a static payoff `f` given by its values on the terminal grid.
///
/// Measure-set form: the maximum expectation over the candidate laws.
/// Quote form: the optimal value of the static super-replication LP
/// (cash at price 1, calls bought at ask / sold at bid). An unbounded
/// replication LP means the quotes admit arbitrage and is an error.
pub fn price_static<S: LpScalar>(
    op: &PricingOperator,
    f: &[Rat],
    grid: &GridSpec,
) -> Result<S, PricingError> {
    match op {
        PricingOperator::MeasureSet { measures } => {
            let mut best: Option<S> = None;
            for m in measures {
                let mut e = S::zero();
                for (x, w) in m.iter().enumerate() {
                    e = e + S::from_rat(w) * S::from_rat(&f[x]);
                }
                best = Some(match best {
                    None => e,
                    Some(b) if e > b => e,
                    Some(b) => b,
                });
            }
            Ok(best.expect("measure set is nonempty"))
        }
        PricingOperator::CallQuotes { .. } => {
            let lp = static_replication_lp(op, f, grid, &rat_int(0));
            let sol = lp::solve_with_options::<S>(&lp, &Default::default())?;
            match sol.status {
                Status::Optimal => Ok(sol.objective_value().clone()),
                Status::Unbounded => Err(PricingError::StaticArbitrage),
                Status::Infeasible => unreachable!("cash replication is always feasible"),
            }
        }
    }
}

/// The cheapest-static-super-replication LP for the quote form, with the
/// effective spread widened by `epsilon` (buy at `ask + eps`, sell at
/// `bid - eps`).
pub fn static_replication_lp(op: &PricingOperator, f: &[Rat], grid: &GridSpec, epsilon: &Rat) -> LinearProgram {
    let PricingOperator::CallQuotes { quotes } = op else {
        panic!("static replication LP applies to the quote form");
    };
    let mut lp = LinearProgram::new("static_replication", Sense::Minimize);
    let cash = lp.add_var("cash", None, None, rat_int(1)).unwrap();
    let mut buys = Vec::new();
    let mut sells = Vec::new();
    for (i, q) in quotes.iter().enumerate() {
        buys.push(lp.add_var(format!("buy_{i}"), Some(rat_int(0)), None, &q.ask + epsilon).unwrap());
        sells.push(lp.add_var(format!("sell_{i}"), Some(rat_int(0)), None, -(&q.bid - epsilon)).unwrap());
    }
    for x in 0..grid.terminal_points() as u32 {
        let mut terms = vec![(cash.into(), rat_int(1))];
        for (i, q) in quotes.iter().enumerate() {
            let cv = call_value(grid, x, &q.strike);
            if !cv.is_zero() {
                terms.push((buys[i].into(), cv.clone()));
                terms.push((sells[i].into(), -cv));
            }
        }
        lp.add_row(format!("dom_{x}"), Rel::Ge, terms, f[x as usize].clone()).unwrap();
    }
    lp
}

/// One linear constraint of the marginal family, expressed over the
/// terminal-marginal coordinates and optional auxiliary mixing variables.
#[derive(Debug, Clone)]
pub struct FamilyRow {
    pub label: String,
    pub rel: Rel,
    pub marg_terms: Vec<(usize, Rat)>,
    pub aux_terms: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

/// Finite family of linear constraints characterizing the terminal
/// marginals consistent with the pricing operator. Auxiliary variables
/// (the hull mixing weights) are nonnegative.
#[derive(Debug, Clone)]
pub struct MarginalConstraintFamily {
    pub aux_count: usize,
    pub rows: Vec<FamilyRow>,
}

/// Emits the marginal constraint family.
///
/// Measure-set form: `marginal = sum_j lambda_j mu_j`, `lambda >= 0`,
/// `sum lambda = 1`; with `epsilon > 0` each linking equality is split and
/// widened into `|marginal_x - (sum lambda mu)_x| <= epsilon`. Quote form:
/// `bid_i - eps <= E[(x-K_i)^+] <= ask_i + eps` plus total mass 1.
pub fn marginal_constraints(model: &PricingModel, grid: &GridSpec) -> MarginalConstraintFamily {
    let eps = &model.epsilon;
    let mut rows = Vec::new();
    match &model.operator {
        PricingOperator::MeasureSet { measures } => {
            let aux_count = measures.len();
            for x in 0..grid.terminal_points() {
                let marg_terms = vec![(x, rat_int(1))];
                let aux_terms: Vec<(usize, Rat)> =
                    measures.iter().enumerate().map(|(j, m)| (j, -(m[x].clone()))).collect();
                if eps.is_zero() {
                    rows.push(FamilyRow {
                        label: format!("hull_{x}"),
                        rel: Rel::Eq,
                        marg_terms,
                        aux_terms,
                        rhs: rat_int(0),
                    });
                } else {
                    rows.push(FamilyRow {
                        label: format!("hull_up_{x}"),
                        rel: Rel::Le,
                        marg_terms: marg_terms.clone(),
                        aux_terms: aux_terms.clone(),
                        rhs: eps.clone(),
                    });
                    rows.push(FamilyRow {
                        label: format!("hull_lo_{x}"),
                        rel: Rel::Ge,
                        marg_terms,
                        aux_terms,
                        rhs: -(eps.clone()),
                    });
                }
            }
            rows.push(FamilyRow {
                label: "mix_mass".into(),
                rel: Rel::Eq,
                marg_terms: Vec::new(),
                aux_terms: (0..aux_count).map(|j| (j, rat_int(1))).collect(),
                rhs: rat_int(1),
            });
            MarginalConstraintFamily { aux_count, rows }
        }
        PricingOperator::CallQuotes { quotes } => {
            for (i, q) in quotes.iter().enumerate() {
                let terms: Vec<(usize, Rat)> = (0..grid.terminal_points() as u32)
                    .filter_map(|x| {
                        let cv = call_value(grid, x, &q.strike);
                        (!cv.is_zero()).then_some((x as usize, cv))
                    })
                    .collect();
                rows.push(FamilyRow {
                    label: format!("quote_ask_{i}"),
                    rel: Rel::Le,
                    marg_terms: terms.clone(),
                    aux_terms: Vec::new(),
                    rhs: &q.ask + eps,
                });
                rows.push(FamilyRow {
                    label: format!("quote_bid_{i}"),
                    rel: Rel::Ge,
                    marg_terms: terms,
                    aux_terms: Vec::new(),
                    rhs: &q.bid - eps,
                });
            }
            rows.push(FamilyRow {
                label: "marg_mass".into(),
                rel: Rel::Eq,
                marg_terms: (0..grid.terminal_points()).map(|x| (x, rat_int(1))).collect(),
                aux_terms: Vec::new(),
                rhs: rat_int(1),
            });
            MarginalConstraintFamily { aux_count: 0, rows }
        }
    }
}

impl MarginalConstraintFamily {
    /// Decides feasibility of a fixed marginal vector by one LP
    /// feasibility call over the auxiliary variables.
    pub fn is_feasible(&self, marginal: &[Rat]) -> Result<bool, lp::LpError> {
        let mut lp = LinearProgram::new("marginal_feasibility", Sense::Minimize);
        let aux: Vec<_> = (0..self.aux_count)
            .map(|j| lp.add_var(format!("mix_{j}"), Some(rat_int(0)), None, rat_int(0)).unwrap())
            .collect();
        for row in &self.rows {
            let mut rhs = row.rhs.clone();
            for (x, a) in &row.marg_terms {
                rhs = rhs - a * &marginal[*x];
            }
            let terms: Vec<_> = row.aux_terms.iter().map(|(j, a)| (aux[*j].into(), a.clone())).collect();
            lp.add_row(row.label.clone(), row.rel, terms, rhs).unwrap();
        }
        let sol = lp.solve_exact()?;
        Ok(sol.status == Status::Optimal)
    }

    /// LP maximum of `E_rho[f]` over marginals satisfying the family (with
    /// `rho >= 0`); the support-function counterpart of [`price_static`].
    pub fn max_expectation<S: LpScalar>(
        &self,
        f: &[Rat],
        grid: &GridSpec,
    ) -> Result<(Status, Option<S>), lp::LpError> {
        let mut lp = LinearProgram::new("marginal_support", Sense::Maximize);
        let rho: Vec<_> = (0..grid.terminal_points())
            .map(|x| lp.add_var(format!("rho_{x}"), Some(rat_int(0)), None, f[x].clone()).unwrap())
            .collect();
        let aux: Vec<_> = (0..self.aux_count)
            .map(|j| lp.add_var(format!("mix_{j}"), Some(rat_int(0)), None, rat_int(0)).unwrap())
            .collect();
        for row in &self.rows {
            let mut terms: Vec<_> = row.marg_terms.iter().map(|(x, a)| (rho[*x].into(), a.clone())).collect();
            terms.extend(row.aux_terms.iter().map(|(j, a)| (aux[*j].into(), a.clone())));
            lp.add_row(row.label.clone(), row.rel, terms, row.rhs.clone()).unwrap();
        }
        // total mass (implied by the measure-set family at epsilon zero)
        if !self.rows.iter().any(|r| r.label == "marg_mass") {
            lp.add_row(
                "marg_mass",
                Rel::Eq,
                rho.iter().map(|&v| (v.into(), rat_int(1))).collect(),
                rat_int(1),
            )
            .unwrap();
        }
        let sol = lp::solve_with_options::<S>(&lp, &Default::default())?;
        Ok((sol.status, sol.objective))
    }
}

/// One recorded axiom violation with its witness.
#[derive(Debug, Clone)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    pub witness: String,
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub trials: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Randomized check of sublinearity, positive homogeneity, and constant
/// preservation on `trials` random grid-function pairs. Violations are
/// report entries, not errors.
pub fn check_axioms(
    op: &PricingOperator,
    grid: &GridSpec,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<AxiomReport, PricingError> {
    let mut violations = Vec::new();
    let points = grid.terminal_points();
    let price = |f: &[Rat]| -> Result<f64, PricingError> { price_static::<f64>(op, f, grid) };
    for trial in 0..trials {
        let f: Vec<Rat> = (0..points).map(|_| rand_rat(rng)).collect();
        let g: Vec<Rat> = (0..points).map(|_| rand_rat(rng)).collect();
        let lambda = Rat::new((1 + rng.gen_range(0..40i64)).into(), 10.into());
        let a = rand_rat(rng);

        let pf = price(&f)?;
        let pg = price(&g)?;
        let sum: Vec<Rat> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
        let psum = price(&sum)?;
        if psum > pf + pg + 1e-9 {
            violations.push(AxiomViolation {
                axiom: "sub-additivity",
                witness: format!("trial {trial}: P(f+g)={psum} > P(f)+P(g)={}", pf + pg),
            });
        }
        let scaled: Vec<Rat> = f.iter().map(|x| x * &lambda).collect();
        let pscaled = price(&scaled)?;
        let lam = LpScalar::to_f64(&lambda);
        if (pscaled - lam * pf).abs() > 1e-9 * (1.0 + lam.abs() * pf.abs()) {
            violations.push(AxiomViolation {
                axiom: "positive homogeneity",
                witness: format!("trial {trial}: P(l f)={pscaled} vs l P(f)={}", lam * pf),
            });
        }
        let constant = vec![a.clone(); points];
        let pconst = price(&constant)?;
        let aval = LpScalar::to_f64(&a);
        if (pconst - aval).abs() > 1e-12 * (1.0 + aval.abs()) {
            violations.push(AxiomViolation {
                axiom: "constant preservation",
                witness: format!("trial {trial}: P({aval})={pconst}"),
            });
        }
    }
    Ok(AxiomReport { trials, violations })
}

fn rand_rat(rng: &mut impl Rng) -> Rat {
    // dyadic values in [-5, 5] keep exact arithmetic cheap
    Rat::new(rng.gen_range(-80..=80i64).into(), 16.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::TradeBound;
    use crate::scalar::rat_frac;
    use rand::SeedableRng;

    fn grid12() -> GridSpec {
        GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap()
    }

    fn quarter_half_quarter(grid: &GridSpec) -> PricingOperator {
        PricingOperator::measure_set(
            vec![vec![rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)]],
            grid,
        )
        .unwrap()
    }

    #[test]
    fn measure_set_prices_identity() {
        let grid = grid12();
        let op = quarter_half_quarter(&grid);
        let f = vec![rat_int(0), rat_int(1), rat_int(2)];
        let p: Rat = price_static(&op, &f, &grid).unwrap();
        assert_eq!(p, rat_int(1)); // 0*0.25 + 1*0.5 + 2*0.25

        // constants are preserved and scaling is exact
        let c = vec![rat_int(7); 3];
        let p: Rat = price_static(&op, &c, &grid).unwrap();
        assert_eq!(p, rat_int(7));
        let f2: Vec<Rat> = f.iter().map(|x| x * rat_int(2)).collect();
        let p: Rat = price_static(&op, &f2, &grid).unwrap();
        assert_eq!(p, rat_int(2));
    }

    #[test]
    fn constructor_rejects_bad_measures() {
        let grid = grid12();
        assert!(PricingOperator::measure_set(vec![vec![rat_frac(1, 2), rat_frac(2, 5), rat_int(0)]], &grid).is_err());
        assert!(PricingOperator::measure_set(vec![vec![rat_frac(3, 2), -rat_frac(1, 2), rat_int(0)]], &grid).is_err());
        assert!(PricingOperator::measure_set(vec![vec![rat_frac(1, 2), rat_frac(1, 2)]], &grid).is_err());
        assert!(
            PricingOperator::call_quotes(vec![CallQuote { strike: rat_int(1), bid: rat_frac(3, 10), ask: rat_frac(1, 5) }])
                .is_err()
        );
    }

    #[test]
    fn axioms_pass_for_valid_operators() {
        let grid = grid12();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let report = check_axioms(&quarter_half_quarter(&grid), &grid, 200, &mut rng).unwrap();
        assert!(report.passed(), "{:?}", report.violations);

        let quotes = PricingOperator::call_quotes(vec![CallQuote {
            strike: rat_int(1),
            bid: rat_frac(1, 5),
            ask: rat_frac(3, 10),
        }])
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let report = check_axioms(&quotes, &grid, 60, &mut rng).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn axioms_catch_subnormalized_measure() {
        let grid = grid12();
        let bad = PricingOperator::from_parts_unchecked(vec![vec![
            rat_frac(9, 40),
            rat_frac(9, 20),
            rat_frac(9, 40),
        ]]); // sums to 0.9
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let report = check_axioms(&bad, &grid, 20, &mut rng).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.axiom == "constant preservation"));
    }

    #[test]
    fn singleton_family_pins_marginal() {
        let grid = grid12();
        let model = PricingModel::exact(quarter_half_quarter(&grid));
        let family = marginal_constraints(&model, &grid);
        assert!(family.is_feasible(&[rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)]).unwrap());
        assert!(!family.is_feasible(&[rat_frac(1, 2), rat_frac(1, 4), rat_frac(1, 4)]).unwrap());
    }

    #[test]
    fn two_measure_family_is_their_segment() {
        let grid = grid12();
        let mu1 = vec![rat_int(1), rat_int(0), rat_int(0)];
        let mu2 = vec![rat_int(0), rat_int(0), rat_int(1)];
        let op = PricingOperator::measure_set(vec![mu1, mu2], &grid).unwrap();
        let family = marginal_constraints(&PricingModel::exact(op), &grid);
        // midpoint feasible, off-segment not
        assert!(family.is_feasible(&[rat_frac(1, 2), rat_int(0), rat_frac(1, 2)]).unwrap());
        assert!(!family.is_feasible(&[rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)]).unwrap());
    }

    #[test]
    fn quote_family_bounds_call_expectation() {
        let grid = grid12();
        let op = PricingOperator::call_quotes(vec![CallQuote {
            strike: rat_int(1),
            bid: rat_frac(1, 5),
            ask: rat_frac(3, 10),
        }])
        .unwrap();
        let family = marginal_constraints(&PricingModel::exact(op), &grid);
        // E[(x-1)^+] = rho_2 must lie in [0.2, 0.3]
        assert!(family.is_feasible(&[rat_frac(4, 5), rat_int(0), rat_frac(1, 5)]).unwrap());
        assert!(family.is_feasible(&[rat_frac(7, 10), rat_int(0), rat_frac(3, 10)]).unwrap());
        assert!(!family.is_feasible(&[rat_frac(3, 5), rat_int(0), rat_frac(2, 5)]).unwrap());
    }

    #[test]
    fn support_function_identity_measure_set() {
        let grid = grid12();
        let model = PricingModel::exact(
            PricingOperator::measure_set(
                vec![
                    vec![rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)],
                    vec![rat_frac(1, 2), rat_frac(1, 2), rat_int(0)],
                ],
                &grid,
            )
            .unwrap(),
        );
        let family = marginal_constraints(&model, &grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..25 {
            let f: Vec<Rat> = (0..3).map(|_| rand_rat(&mut rng)).collect();
            let direct: Rat = price_static(&model.operator, &f, &grid).unwrap();
            let (status, lp_max) = family.max_expectation::<Rat>(&f, &grid).unwrap();
            assert_eq!(status, Status::Optimal);
            assert_eq!(lp_max.unwrap(), direct);
        }
    }

    #[test]
    fn quote_duality_equality_at_optimum() {
        let grid = grid12();
        let op = PricingOperator::call_quotes(vec![
            CallQuote { strike: rat_int(1), bid: rat_frac(1, 5), ask: rat_frac(3, 10) },
            CallQuote { strike: rat_int(0), bid: rat_frac(9, 10), ask: rat_frac(11, 10) },
        ])
        .unwrap();
        let model = PricingModel::exact(op);
        let family = marginal_constraints(&model, &grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let f: Vec<Rat> = (0..3).map(|_| rand_rat(&mut rng)).collect();
            let direct: Rat = price_static(&model.operator, &f, &grid).unwrap();
            let (status, lp_max) = family.max_expectation::<Rat>(&f, &grid).unwrap();
            assert_eq!(status, Status::Optimal);
            assert_eq!(lp_max.unwrap(), direct);
        }
    }

    #[test]
    fn measure_set_price_is_monotone() {
        let grid = grid12();
        let op = quarter_half_quarter(&grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let f: Vec<Rat> = (0..3).map(|_| rand_rat(&mut rng)).collect();
            let bump: Vec<Rat> = (0..3)
                .map(|_| Rat::new(rng.gen_range(0..=20i64).into(), 16.into()))
                .collect();
            let g: Vec<Rat> = f.iter().zip(&bump).map(|(x, b)| x + b).collect();
            let pf: Rat = price_static(&op, &f, &grid).unwrap();
            let pg: Rat = price_static(&op, &g, &grid).unwrap();
            assert!(pf <= pg);
        }
    }

    #[test]
    fn arbitrage_quotes_error() {
        let grid = grid12();
        // selling the K=1 call at 0.5 funds buying the dominating K=0 call at 0.3
        let op = PricingOperator::call_quotes(vec![
            CallQuote { strike: rat_int(0), bid: rat_frac(1, 5), ask: rat_frac(3, 10) },
            CallQuote { strike: rat_int(1), bid: rat_frac(1, 2), ask: rat_frac(3, 5) },
        ])
        .unwrap();
        let f = vec![rat_int(0); 3];
        let err = price_static::<Rat>(&op, &f, &grid).unwrap_err();
        assert!(matches!(err, PricingError::StaticArbitrage));
    }
}
