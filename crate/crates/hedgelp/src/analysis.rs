//! Explicit constructions and certification harnesses: the running-maximum
//! hedging strategy and its pathwise inequality, the tail-option price
//! bound, duality-gap reports, and parameter sweeps with budget checks.

use rand::Rng;

use crate::dual::{solve_dual_with_options, DualStatus};
use crate::instance::Instance;
use crate::lp::SolveOptions;
use crate::market::{GridSpec, Modulus, Path, PayoffSpec, TradeBound};
use crate::pricing::{price_static, PricingModel};
use crate::primal::{solve_primal_with_options, terminal_wealth, HedgeStatus};
use crate::scalar::{rat_render, LpScalar, Rat};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("{0}")]
    Params(String),
    #[error("hedge: {0}")]
    Hedge(#[from] crate::primal::HedgeError),
    #[error("dual: {0}")]
    Dual(#[from] crate::dual::DualError),
    #[error("pricing: {0}")]
    Pricing(#[from] crate::pricing::PricingError),
    #[error("instance: {0}")]
    Instance(#[from] crate::instance::InstanceError),
    #[error("statuses disagree: primal {primal}, dual {dual}")]
    StatusMismatch { primal: &'static str, dual: &'static str },
}

/// Parameters of the running-maximum strategy: exponent `r` in `(2, p)`,
/// conjugate factor `c_r = r/(r-1)`, and the cost load
/// `lambda = kappa r c_r`, which must stay below 1.
#[derive(Debug, Clone, Copy)]
pub struct DoobParams {
    pub r: f64,
    pub kappa: f64,
    pub c_r: f64,
    pub lambda: f64,
    /// Growth exponent bound, recorded as metadata when supplied.
    pub p: Option<f64>,
}

impl DoobParams {
    pub fn new(r: f64, kappa: f64, p: Option<f64>) -> Result<Self, AnalysisError> {
        if !r.is_finite() || r <= 2.0 {
            return Err(AnalysisError::Params(format!("exponent r = {r} must exceed 2")));
        }
        if let Some(p) = p {
            if !p.is_finite() || r >= p {
                return Err(AnalysisError::Params(format!("exponent r = {r} must stay below p = {p}")));
            }
        }
        let c_r = r / (r - 1.0);
        let lambda = kappa * r * c_r;
        if lambda >= 1.0 {
            return Err(AnalysisError::Params(format!(
                "kappa * r * c_r = {lambda} >= 1; pick a larger r or a smaller kappa"
            )));
        }
        Ok(DoobParams { r, kappa, c_r, lambda, p })
    }
}

/// The explicit strategy: static leg `(c_r x)^r - c_r` and position
/// `-r c_r (running max)^{r-1}` held before each step.
#[derive(Debug, Clone, Copy)]
pub struct DoobStrategy {
    pub params: DoobParams,
}

pub fn doob_strategy(params: DoobParams) -> DoobStrategy {
    DoobStrategy { params }
}

impl DoobStrategy {
    pub fn static_at(&self, x: f64) -> f64 {
        (self.params.c_r * x).powf(self.params.r) - self.params.c_r
    }

    /// Position held from time `k`, a function of the running maximum
    /// `max(s_0..s_k)`.
    pub fn position(&self, running_max: f64) -> f64 {
        -self.params.r * self.params.c_r * running_max.powf(self.params.r - 1.0)
    }

    /// Terminal wealth along a path.
    pub fn wealth(&self, values: &[f64]) -> f64 {
        let steps = values.len() - 1;
        let mut positions = Vec::with_capacity(steps);
        let mut running = values[0];
        for &v in &values[..steps] {
            running = running.max(v);
            positions.push(self.position(running));
        }
        terminal_wealth(self.static_at(values[steps]), &positions, values, &self.params.kappa)
    }

    /// The pathwise floor `(1 - lambda) * (sup norm)^r`.
    pub fn floor(&self, values: &[f64]) -> f64 {
        let mx = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (1.0 - self.params.lambda) * mx.powf(self.params.r)
    }
}

#[derive(Debug, Clone)]
pub struct DoobReport {
    pub checked: usize,
    pub violations: Vec<(usize, f64, f64)>,
    pub min_slack: f64,
}

impl DoobReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the pathwise inequality `wealth >= (1 - lambda) |S|^r` on the
/// given paths at 1e-9 relative tolerance.
pub fn verify_doob(strategy: &DoobStrategy, paths: &[Vec<f64>]) -> DoobReport {
    let mut violations = Vec::new();
    let mut min_slack = f64::INFINITY;
    for (i, values) in paths.iter().enumerate() {
        let wealth = strategy.wealth(values);
        let floor = strategy.floor(values);
        let slack = wealth - floor;
        if slack < min_slack {
            min_slack = slack;
        }
        if slack < -1e-9 * floor.abs().max(1.0) {
            violations.push((i, wealth, floor));
        }
    }
    DoobReport { checked: paths.len(), violations, min_slack }
}

/// Uniform i.i.d. grid paths (each coordinate uniform on the grid points).
pub fn sample_grid_paths(grid: &GridSpec, count: usize, rng: &mut impl Rng) -> Vec<Path> {
    (0..count)
        .map(|_| {
            let mut indices = Vec::with_capacity(grid.periods() as usize + 1);
            indices.push(grid.initial_index());
            for _ in 0..grid.periods() {
                indices.push(rng.gen_range(0..=grid.trunc()));
            }
            Path::new(indices)
        })
        .collect()
}

/// The tail option `|S|^2 1{|S| >= threshold}` as an explicit table over
/// the enumerated paths.
pub fn tail_payoff(grid: &GridSpec, threshold: &Rat) -> Result<PayoffSpec, AnalysisError> {
    let paths = crate::market::enumerate_paths(grid).map_err(crate::instance::InstanceError::from)?;
    let mut values = std::collections::BTreeMap::new();
    for p in &paths {
        let mx = crate::market::path_max(p, grid);
        let v = if &mx >= threshold { &mx * &mx } else { crate::scalar::rat_int(0) };
        values.insert(p.indices()[1..].to_vec(), v);
    }
    Ok(PayoffSpec::table(values, true, Modulus::None))
}

#[derive(Debug, Clone)]
pub struct TailReport {
    pub threshold: f64,
    pub lp_value: f64,
    pub bound: f64,
}

impl TailReport {
    pub fn holds(&self) -> bool {
        self.lp_value <= self.bound + 1e-9 * (1.0 + self.bound.abs())
    }
}

/// Compares the super-replication price of the tail option against the
/// explicit-strategy bound `P(static leg) / ((1-lambda) threshold^(r-2))`.
pub fn tail_bound_check(
    grid: &GridSpec,
    pricing: &PricingModel,
    params: &DoobParams,
    threshold: &Rat,
) -> Result<TailReport, AnalysisError> {
    let payoff = tail_payoff(grid, threshold)?;
    let inst = Instance::new(grid.clone(), payoff, Some(pricing.clone()))?;
    let result = solve_primal_with_options::<f64>(&inst, &SolveOptions::default())?;
    let lp_value = match result.status {
        HedgeStatus::Optimal => result.value.unwrap(),
        _ => {
            return Err(AnalysisError::Params(
                "tail bound needs an arbitrage-free pricing model".into(),
            ))
        }
    };
    let strategy = doob_strategy(*params);
    let f_hat: Vec<Rat> = (0..grid.terminal_points() as u32)
        .map(|x| {
            Rat::from_float(strategy.static_at(grid.value_f64(x)))
                .expect("static leg values are finite")
        })
        .collect();
    let price: f64 = price_static(&pricing.operator, &f_hat, grid)?;
    let t = LpScalar::to_f64(threshold);
    let bound = price / ((1.0 - params.lambda) * t.powf(params.r - 2.0));
    Ok(TailReport { threshold: t, lp_value, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapStatus {
    OptimalPair,
    ArbitragePair,
}

#[derive(Debug, Clone)]
pub struct GapReport<S> {
    pub status: GapStatus,
    pub primal: Option<S>,
    pub dual: Option<S>,
    pub gap: Option<S>,
    pub binding: Vec<String>,
}

impl<S: LpScalar> GapReport<S> {
    /// Zero gap in exact mode, at most 1e-7 in float mode.
    pub fn gap_ok(&self) -> bool {
        match &self.gap {
            None => true,
            Some(g) => {
                if S::EXACT {
                    *g == S::zero()
                } else {
                    LpScalar::to_f64(g).abs() <= 1e-7
                }
            }
        }
    }
}

/// Solves both sides and pairs the verdicts: optimal with optimal (gap
/// asserted), or primal-unbounded with dual-infeasible. A mixed pairing is
/// a hard inconsistency error.
pub fn duality_gap<S: LpScalar>(inst: &Instance) -> Result<GapReport<S>, AnalysisError> {
    duality_gap_with_options(inst, &SolveOptions::default())
}

pub fn duality_gap_with_options<S: LpScalar>(
    inst: &Instance,
    opts: &SolveOptions,
) -> Result<GapReport<S>, AnalysisError> {
    let primal = solve_primal_with_options::<S>(inst, opts)?;
    let dual = solve_dual_with_options::<S>(inst, opts)?;
    match (primal.status, dual.status) {
        (HedgeStatus::Optimal, DualStatus::Optimal) => {
            let p = primal.value.unwrap();
            let d = dual.value.unwrap();
            let gap = (p.clone() - d.clone()).abs_val();
            Ok(GapReport {
                status: GapStatus::OptimalPair,
                primal: Some(p),
                dual: Some(d),
                gap: Some(gap),
                binding: dual.binding,
            })
        }
        (HedgeStatus::ArbitrageUnbounded, DualStatus::InfeasibleEmpty) => Ok(GapReport {
            status: GapStatus::ArbitragePair,
            primal: None,
            dual: None,
            gap: None,
            binding: Vec::new(),
        }),
        (p, d) => Err(AnalysisError::StatusMismatch {
            primal: match p {
                HedgeStatus::Optimal => "optimal",
                HedgeStatus::ArbitrageUnbounded => "unbounded",
                HedgeStatus::InfeasibleNone => "infeasible",
            },
            dual: match d {
                DualStatus::Optimal => "optimal",
                DualStatus::InfeasibleEmpty => "infeasible",
            },
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Kappa,
    Bound,
    Refinement,
    Truncation,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "kappa" => Some(SweepAxis::Kappa),
            "M" | "bound" => Some(SweepAxis::Bound),
            "n" | "refinement" => Some(SweepAxis::Refinement),
            "J" | "truncation" => Some(SweepAxis::Truncation),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Kappa => "kappa",
            SweepAxis::Bound => "M",
            SweepAxis::Refinement => "n",
            SweepAxis::Truncation => "J",
        }
    }
}

#[derive(Debug, Clone)]
pub enum AxisValue {
    Number(Rat),
    Unbounded,
}

impl AxisValue {
    pub fn label(&self) -> String {
        match self {
            AxisValue::Number(r) => rat_render(r),
            AxisValue::Unbounded => "unbounded".into(),
        }
    }
}

/// Base configuration a sweep perturbs along one axis.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub grid: GridSpec,
    pub payoff: PayoffSpec,
    pub pricing: PricingModel,
}

#[derive(Debug, Clone)]
pub struct SweepPoint<S> {
    pub label: String,
    pub primal: Option<S>,
    pub dual: Option<S>,
    pub gap: Option<S>,
    pub status: String,
    pub budget: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepReport<S> {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint<S>>,
    /// Named monotonicity / budget verdicts with pass flags.
    pub verdicts: Vec<(String, bool)>,
}

impl<S: LpScalar> SweepReport<S> {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.error.is_none() && p.gap.as_ref().map_or(true, gap_ok::<S>))
            && self.verdicts.iter().all(|(_, ok)| *ok)
    }

    /// One row per axis value: `axis_value,primal,dual,gap,status,budget`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis_value,primal,dual,gap,status,budget\n");
        for p in &self.points {
            let fmt = |v: &Option<S>| v.as_ref().map(|x| x.render()).unwrap_or_else(|| "".into());
            let budget = p.budget.map(|b| format!("{b}")).unwrap_or_else(|| "n/a".into());
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.label,
                fmt(&p.primal),
                fmt(&p.dual),
                fmt(&p.gap),
                p.status,
                budget
            ));
        }
        out
    }
}

fn gap_ok<S: LpScalar>(g: &S) -> bool {
    if S::EXACT {
        *g == S::zero()
    } else {
        LpScalar::to_f64(g).abs() <= 1e-7
    }
}

/// The discretization error budget `(N + 2 kappa) M N h + m(h)`, available
/// when the bound is finite and the payoff declares a modulus.
pub fn error_budget(grid: &GridSpec, payoff: &PayoffSpec) -> Option<f64> {
    let m = grid.bound().as_finite()?;
    let h = 1.0 / grid.n() as f64;
    let modulus = payoff.modulus.apply_f64(h)?;
    let n = grid.periods() as f64;
    let kappa = LpScalar::to_f64(grid.kappa());
    Some((n + 2.0 * kappa) * LpScalar::to_f64(m) * n * h + modulus)
}

fn sweep_grid(base: &SweepBase, axis: SweepAxis, value: &AxisValue) -> Result<GridSpec, String> {
    let g = &base.grid;
    match (axis, value) {
        (SweepAxis::Kappa, AxisValue::Number(k)) => {
            let g = g.with_kappa(k.clone()).map_err(|e| e.to_string())?;
            g.standing_kappa().map_err(|e| e.to_string())?;
            Ok(g)
        }
        (SweepAxis::Bound, AxisValue::Number(m)) => Ok(g.with_bound(TradeBound::Finite(m.clone()))),
        (SweepAxis::Bound, AxisValue::Unbounded) => Ok(g.with_bound(TradeBound::Unbounded)),
        (SweepAxis::Refinement, AxisValue::Number(v)) => {
            let n: u32 = int_axis(v)?;
            // keep the price ceiling J*h fixed while refining
            let scaled = g.trunc() as u64 * n as u64;
            if scaled % g.n() as u64 != 0 {
                return Err(format!("refinement {n} does not divide the ceiling evenly"));
            }
            GridSpec::new(n, (scaled / g.n() as u64) as u32, g.periods(), g.kappa().clone(), g.bound().clone())
                .map_err(|e| e.to_string())
        }
        (SweepAxis::Truncation, AxisValue::Number(v)) => {
            let j: u32 = int_axis(v)?;
            GridSpec::new(g.n(), j, g.periods(), g.kappa().clone(), g.bound().clone())
                .map_err(|e| e.to_string())
        }
        _ => Err(format!("axis {} takes numeric values", axis.name())),
    }
}

fn int_axis(v: &Rat) -> Result<u32, String> {
    if !v.is_integer() {
        return Err(format!("{} is not an integer", rat_render(v)));
    }
    num_traits::ToPrimitive::to_u32(&v.to_integer()).ok_or_else(|| "value out of range".to_string())
}

/// Runs the duality pair at every axis value, recording values, gaps,
/// error budgets, and the axis's monotonicity verdicts. Point failures are
/// recorded and the sweep continues.
pub fn convergence_sweep<S: LpScalar>(
    base: &SweepBase,
    axis: SweepAxis,
    values: &[AxisValue],
    opts: &SolveOptions,
) -> SweepReport<S> {
    let mut points = Vec::with_capacity(values.len());
    for value in values {
        let label = value.label();
        let point = match sweep_point::<S>(base, axis, value, opts) {
            Ok(p) => p,
            Err(e) => SweepPoint {
                label: label.clone(),
                primal: None,
                dual: None,
                gap: None,
                status: "error".into(),
                budget: None,
                error: Some(e),
            },
        };
        points.push(point);
    }
    let mut verdicts = Vec::new();
    let numeric = |sel: fn(&SweepPoint<S>) -> Option<S>| -> Vec<S> {
        points.iter().filter_map(sel).collect()
    };
    match axis {
        SweepAxis::Kappa => {
            let duals = numeric(|p| p.dual.clone());
            let ok = duals.windows(2).all(|w| w[0] <= w[1]);
            verdicts.push(("dual value nondecreasing in kappa".into(), ok && duals.len() == points.len()));
        }
        SweepAxis::Bound => {
            let primals = numeric(|p| p.primal.clone());
            let ok = primals.windows(2).all(|w| w[0] >= w[1]);
            verdicts
                .push(("primal value nonincreasing in M".into(), ok && primals.len() == points.len()));
        }
        SweepAxis::Truncation => {
            let primals = numeric(|p| p.primal.clone());
            let ok = primals.windows(2).all(|w| w[0] <= w[1]);
            verdicts
                .push(("primal value nondecreasing in J".into(), ok && primals.len() == points.len()));
        }
        SweepAxis::Refinement => {
            // the budget scales exactly with h = 1/n
            let budgets: Vec<(f64, f64)> = points
                .iter()
                .filter_map(|p| {
                    let b = p.budget?;
                    let n: f64 = p.label.parse().ok()?;
                    Some((n, b))
                })
                .collect();
            let ok = budgets.len() == points.len()
                && budgets
                    .windows(2)
                    .all(|w| (w[0].1 * w[0].0 - w[1].1 * w[1].0).abs() <= 1e-9 * (1.0 + w[0].1.abs()));
            verdicts.push(("error budget scales with the step h".into(), ok));
        }
    }
    SweepReport { axis, points, verdicts }
}

fn sweep_point<S: LpScalar>(
    base: &SweepBase,
    axis: SweepAxis,
    value: &AxisValue,
    opts: &SolveOptions,
) -> Result<SweepPoint<S>, String> {
    let grid = sweep_grid(base, axis, value)?;
    let budget = error_budget(&grid, &base.payoff);
    // measure-set pricing is tied to the terminal grid; revalidate on the
    // perturbed grid (call quotes are dimension-free)
    let pricing = match &base.pricing.operator {
        crate::pricing::PricingOperator::MeasureSet { measures } => PricingModel::new(
            crate::pricing::PricingOperator::measure_set(measures.clone(), &grid)
                .map_err(|e| format!("{e}; use call quotes for grid-changing sweeps"))?,
            base.pricing.epsilon.clone(),
        )
        .map_err(|e| e.to_string())?,
        crate::pricing::PricingOperator::CallQuotes { .. } => base.pricing.clone(),
    };
    let inst =
        Instance::new(grid, base.payoff.clone(), Some(pricing)).map_err(|e| e.to_string())?;
    let report = duality_gap_with_options::<S>(&inst, opts).map_err(|e| e.to_string())?;
    Ok(SweepPoint {
        label: value.label(),
        primal: report.primal,
        dual: report.dual,
        gap: report.gap,
        status: match report.status {
            GapStatus::OptimalPair => "optimal".into(),
            GapStatus::ArbitragePair => "arbitrage".into(),
        },
        budget,
        error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::PricingOperator;
    use crate::scalar::{rat_frac, rat_int};
    use rand::SeedableRng;

    fn pricing_a(grid: &GridSpec) -> PricingModel {
        PricingModel::exact(
            PricingOperator::measure_set(
                vec![vec![rat_frac(1, 4), rat_frac(1, 2), rat_frac(1, 4)]],
                grid,
            )
            .unwrap(),
        )
    }

    #[test]
    fn doob_params_hand_values() {
        let p = DoobParams::new(3.0, 0.1, None).unwrap();
        assert!((p.c_r - 1.5).abs() < 1e-12);
        assert!((p.lambda - 0.45).abs() < 1e-12);
        let s = doob_strategy(p);
        assert!((s.static_at(1.0) - 1.875).abs() < 1e-12);
        assert!((s.static_at(0.0) + 1.5).abs() < 1e-12);
        assert!((s.position(1.0) + 4.5).abs() < 1e-12);
        // lambda >= 1 is rejected with the requirement spelled out
        let err = DoobParams::new(3.0, 0.24, None).unwrap_err();
        assert!(err.to_string().contains("kappa * r * c_r"));
        assert!(DoobParams::new(2.0, 0.1, None).is_err());
        assert!(DoobParams::new(3.0, 0.1, Some(2.5)).is_err());
    }

    #[test]
    fn doob_constant_path_hand_value() {
        let strategy = doob_strategy(DoobParams::new(3.0, 0.1, None).unwrap());
        // constant path: single transaction at time zero costs lambda
        let values = vec![1.0, 1.0, 1.0, 1.0];
        let wealth = strategy.wealth(&values);
        assert!((wealth - 1.425).abs() < 1e-12);
        assert!((strategy.floor(&values) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn doob_inequality_on_sampled_paths() {
        let grid = GridSpec::new(2, 10, 4, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let strategy = doob_strategy(DoobParams::new(3.0, 0.1, None).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let paths = sample_grid_paths(&grid, 2000, &mut rng);
        let values: Vec<Vec<f64>> = paths.iter().map(|p| p.values_f64(&grid)).collect();
        let report = verify_doob(&strategy, &values);
        assert!(report.passed(), "violations: {:?}", &report.violations[..report.violations.len().min(3)]);

        // monotone increasing path
        let inc: Vec<f64> = vec![1.0, 1.5, 2.0, 3.0, 5.0];
        let report = verify_doob(&strategy, &[inc]);
        assert!(report.passed());
        assert!(report.min_slack >= 0.0);
    }

    #[test]
    fn tail_bound_holds_on_grid() {
        let grid = GridSpec::new(1, 4, 2, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        // terminal law on {0,1,2,3,4} with mean exactly 1
        let op = PricingOperator::measure_set(
            vec![vec![
                rat_frac(2, 5),
                rat_frac(7, 20),
                rat_frac(3, 20),
                rat_frac(1, 20),
                rat_frac(1, 20),
            ]],
            &grid,
        )
        .unwrap();
        let pricing = PricingModel::exact(op);
        let params = DoobParams::new(3.0, 0.1, None).unwrap();
        for m0 in [rat_int(1), rat_frac(3, 2), rat_int(2)] {
            let report = tail_bound_check(&grid, &pricing, &params, &m0).unwrap();
            assert!(report.holds(), "threshold {}: {} vs {}", report.threshold, report.lp_value, report.bound);
        }
        // beyond the ceiling the option vanishes and the price is nonpositive
        let report = tail_bound_check(&grid, &pricing, &params, &rat_int(9)).unwrap();
        assert!(report.lp_value <= 1e-9 && report.lp_value <= report.bound);
        // doubling the threshold scales the closed-form side by 2^(2-r)
        let a = tail_bound_check(&grid, &pricing, &params, &rat_int(1)).unwrap();
        let b = tail_bound_check(&grid, &pricing, &params, &rat_int(2)).unwrap();
        assert!((b.bound - a.bound / 2.0).abs() < 1e-9 * (1.0 + a.bound.abs()));
    }

    #[test]
    fn gap_report_instance_a() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let inst =
            Instance::new(grid.clone(), PayoffSpec::call(rat_int(1)), Some(pricing_a(&grid))).unwrap();
        let report = duality_gap::<Rat>(&inst).unwrap();
        assert_eq!(report.status, GapStatus::OptimalPair);
        assert_eq!(report.primal.unwrap(), rat_frac(1, 4));
        assert_eq!(report.dual.unwrap(), rat_frac(1, 4));
        assert_eq!(report.gap.unwrap(), rat_int(0));
    }

    #[test]
    fn gap_report_arbitrage_pairing() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let op = PricingOperator::measure_set(
            vec![vec![rat_frac(1, 10), rat_frac(3, 5), rat_frac(3, 10)]],
            &grid,
        )
        .unwrap();
        let inst = Instance::new(
            grid,
            PayoffSpec::call(rat_int(1)),
            Some(PricingModel::exact(op)),
        )
        .unwrap();
        let report = duality_gap::<Rat>(&inst).unwrap();
        assert_eq!(report.status, GapStatus::ArbitragePair);
    }

    #[test]
    fn kappa_sweep_monotone() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let base = SweepBase {
            pricing: pricing_a(&grid),
            payoff: PayoffSpec::call(rat_int(1)),
            grid,
        };
        let values: Vec<AxisValue> = [(0i64, 1i64), (1, 20), (1, 10), (1, 5)]
            .iter()
            .map(|&(n, d)| AxisValue::Number(rat_frac(n, d)))
            .collect();
        let report = convergence_sweep::<Rat>(&base, SweepAxis::Kappa, &values, &Default::default());
        assert!(report.passed(), "{:?}", report.verdicts);
        let csv = report.to_csv();
        assert!(csv.starts_with("axis_value,primal,dual,gap,status,budget\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn bound_sweep_monotone() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let base = SweepBase {
            pricing: pricing_a(&grid),
            payoff: PayoffSpec::call(rat_int(1)),
            grid,
        };
        let values = vec![
            AxisValue::Number(rat_int(0)),
            AxisValue::Number(rat_int(1)),
            AxisValue::Number(rat_int(5)),
            AxisValue::Number(rat_int(1000)),
            AxisValue::Unbounded,
        ];
        let report = convergence_sweep::<Rat>(&base, SweepAxis::Bound, &values, &Default::default());
        assert!(report.passed(), "{:?}", report.verdicts);
    }

    #[test]
    fn refinement_sweep_budget_halves() {
        let grid = GridSpec::new(1, 2, 2, rat_frac(1, 10), TradeBound::Finite(rat_int(2)))
            .unwrap();
        let op = PricingOperator::call_quotes(vec![crate::pricing::CallQuote {
            strike: rat_int(1),
            bid: rat_frac(1, 10),
            ask: rat_frac(4, 10),
        }])
        .unwrap();
        let base = SweepBase {
            grid,
            payoff: PayoffSpec::call(rat_int(1)),
            pricing: PricingModel::exact(op),
        };
        let values = vec![AxisValue::Number(rat_int(1)), AxisValue::Number(rat_int(2))];
        let report =
            convergence_sweep::<f64>(&base, SweepAxis::Refinement, &values, &Default::default());
        assert!(report.passed(), "points: {:?}", report.points.iter().map(|p| &p.error).collect::<Vec<_>>());
        let b1 = report.points[0].budget.unwrap();
        let b2 = report.points[1].budget.unwrap();
        assert!((b2 - b1 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_records_point_failures_and_continues() {
        let grid = GridSpec::new(1, 2, 1, rat_frac(1, 10), TradeBound::Unbounded).unwrap();
        let base = SweepBase {
            pricing: pricing_a(&grid),
            payoff: PayoffSpec::call(rat_int(1)),
            grid,
        };
        // kappa = 0.3 violates the standing assumption; the sweep keeps going
        let values = vec![
            AxisValue::Number(rat_frac(1, 10)),
            AxisValue::Number(rat_frac(3, 10)),
        ];
        let report = convergence_sweep::<Rat>(&base, SweepAxis::Kappa, &values, &Default::default());
        assert!(report.points[0].error.is_none());
        assert!(report.points[1].error.is_some());
        assert!(!report.passed());
    }
}
