//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`). Tolerances are pinned in code.

use std::fmt::Write as _;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use hedgelp::analysis::{
    convergence_sweep, doob_strategy, duality_gap, sample_grid_paths, tail_bound_check,
    verify_doob, AxisValue, DoobParams, GapStatus, SweepAxis, SweepBase,
};
use hedgelp::dual::{
    build_penalty_dual_lp, certify_measure, ftap_feasibility, solve_dual, FtapVerdict, PathMeasure,
};
use hedgelp::instance::Instance;
use hedgelp::lp::{LinearProgram, Rel, Sense, Status};
use hedgelp::market::{GridSpec, Modulus, PayoffSpec, TradeBound};
use hedgelp::pricing::{check_axioms, CallQuote, PricingModel, PricingOperator};
use hedgelp::primal::{lift_portfolio, solve_constrained, solve_primal, HedgeStatus, StaticLeg};
use hedgelp::scalar::{rat_from_decimal, rat_to_decimal, LpScalar, Rat};
use num_traits::Signed;

fn rint(v: i64) -> Rat {
    Rat::from_integer(v.into())
}

fn rfrac(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn instance_a() -> Instance {
    let grid = GridSpec::new(1, 2, 1, rfrac(1, 10), TradeBound::Unbounded).unwrap();
    let op = PricingOperator::measure_set(
        vec![vec![rfrac(1, 4), rfrac(1, 2), rfrac(1, 4)]],
        &grid,
    )
    .unwrap();
    Instance::new(grid, PayoffSpec::call(rint(1)), Some(PricingModel::exact(op))).unwrap()
}

/// Dyadic probability vector: `len` weights in 64ths summing to one.
fn random_measure(len: usize, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    let mut units = vec![0u32; len];
    for _ in 0..64 {
        units[rng.gen_range(0..len)] += 1;
    }
    units.into_iter().map(|u| Rat::new(u.into(), 64.into())).collect()
}

fn random_payoff(rng: &mut ChaCha8Rng) -> PayoffSpec {
    let strike = rfrac(rng.gen_range(0..=4i64), 2); // 0, 0.5, ..., 2
    match rng.gen_range(0..4u8) {
        0 => PayoffSpec::call(strike),
        1 => PayoffSpec::put(strike),
        2 => PayoffSpec::asian(strike),
        _ => PayoffSpec::lookback(),
    }
}

/// Feasible-by-construction randomized instance within the criterion-1
/// parameter box. Feasibility: the pricing operator always admits the
/// point mass at 1, so the constant path carries a witness measure.
fn random_feasible_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n: u32 = *[1u32, 2].choose(rng).unwrap();
    let trunc = rng.gen_range(n.max(1)..=3u32);
    let periods = rng.gen_range(1..=3u32);
    let kappa = [rint(0), rfrac(1, 20), rfrac(1, 10), rfrac(1, 5)].choose(rng).unwrap().clone();
    let bound = match rng.gen_range(0..3u8) {
        0 => TradeBound::Finite(rint(1)),
        1 => TradeBound::Finite(rint(5)),
        _ => TradeBound::Unbounded,
    };
    let grid = GridSpec::new(n, trunc, periods, kappa, bound).unwrap();
    let points = grid.terminal_points();
    let operator = if rng.gen_bool(0.6) {
        // point mass at the initial price plus a few random laws
        let mut delta_one = vec![rint(0); points];
        delta_one[grid.initial_index() as usize] = rint(1);
        let mut measures = vec![delta_one];
        for _ in 0..rng.gen_range(0..=2) {
            measures.push(random_measure(points, rng));
        }
        PricingOperator::measure_set(measures, &grid).unwrap()
    } else {
        // quotes straddling the constant-path call values
        let strikes = [rint(0), rfrac(1, 2), rint(1), rfrac(3, 2)];
        let count = rng.gen_range(1..=3usize);
        let quotes = strikes
            .choose_multiple(rng, count)
            .map(|k| {
                let value = {
                    let v = rint(1) - k;
                    if v < rint(0) {
                        rint(0)
                    } else {
                        v
                    }
                };
                let below = rfrac(rng.gen_range(0..=8i64), 16);
                let above = rfrac(rng.gen_range(0..=8i64), 16);
                let bid = if &value - &below < rint(0) { rint(0) } else { &value - &below };
                CallQuote { strike: k.clone(), bid, ask: &value + &above }
            })
            .collect();
        PricingOperator::call_quotes(quotes).unwrap()
    };
    let payoff = random_payoff(rng);
    Instance::new(grid, payoff, Some(PricingModel::exact(operator))).unwrap()
}

/// Body of criterion 1, reused by the determinism criterion: returns a
/// deterministic per-instance report.
fn strong_duality_suite(seed: u64, count: usize) -> (String, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = String::new();
    let mut exact_ok = 0usize;
    let mut float_ok = 0usize;
    for i in 0..count {
        let inst = random_feasible_instance(&mut rng);
        let exact = duality_gap::<Rat>(&inst).expect("statuses pair");
        assert_eq!(exact.status, GapStatus::OptimalPair, "instance {i} must be feasible");
        let p = exact.primal.clone().unwrap();
        let d = exact.dual.clone().unwrap();
        if p == d {
            exact_ok += 1;
        }
        let float = duality_gap::<f64>(&inst).expect("statuses pair");
        let fp = float.primal.unwrap();
        let fd = float.dual.unwrap();
        if (fp - fd).abs() <= 1e-7 {
            float_ok += 1;
        }
        let _ = writeln!(
            report,
            "instance {i}: exact {} | float {:.12} vs {:.12}",
            rat_to_decimal(&p, 14),
            fp,
            fd
        );
    }
    (report, exact_ok, float_ok)
}

#[test]
fn c01_strong_duality_suite() {
    let start = Instant::now();
    let count = 50;
    let (_, exact_ok, float_ok) = strong_duality_suite(20240817, count);
    let elapsed = start.elapsed();
    assert_eq!(exact_ok, count, "exact primal and dual optima must agree exactly");
    assert_eq!(float_ok, count, "float optima must agree within 1e-7");
    assert!(elapsed.as_secs_f64() < 60.0, "suite took {elapsed:?}, budget is 60 s");
    println!(
        "criterion 1 (strong duality, {count} randomized instances, both modes): PASS in {:.2?}",
        elapsed
    );
}

#[test]
fn c02_oracle_instance_a() {
    let inst = instance_a();
    let p = solve_primal::<Rat>(&inst).unwrap();
    let d = solve_dual::<Rat>(&inst).unwrap();
    assert_eq!(p.value.as_ref().unwrap(), &rfrac(1, 4));
    assert_eq!(d.value.as_ref().unwrap(), &rfrac(1, 4));
    println!("criterion 2 (oracle instance A, both values exactly 1/4): PASS");
}

#[test]
fn c03_arbitrage_pairing() {
    // mean-1.2 marginal at kappa = 0.1: band [0.9, 1.1] excludes it
    let grid = GridSpec::new(1, 2, 1, rfrac(1, 10), TradeBound::Unbounded).unwrap();
    let op = PricingOperator::measure_set(
        vec![vec![rfrac(1, 10), rfrac(3, 5), rfrac(3, 10)]],
        &grid,
    )
    .unwrap();
    let inst =
        Instance::new(grid, PayoffSpec::call(rint(1)), Some(PricingModel::exact(op))).unwrap();
    let primal = solve_primal::<Rat>(&inst).unwrap();
    assert_eq!(primal.status, HedgeStatus::ArbitrageUnbounded);
    let ray = primal.ray.as_ref().expect("improving ray");
    let (primal_lp, _) = hedgelp::primal::build_semistatic_lp(&inst).unwrap();
    ray.verify(&primal_lp).expect("ray certificate verifies");

    let dual = solve_dual::<Rat>(&inst).unwrap();
    assert_eq!(dual.status, hedgelp::dual::DualStatus::InfeasibleEmpty);
    let farkas = dual.farkas.as_ref().expect("infeasibility certificate");
    let (dual_lp, _) = hedgelp::dual::build_dual_lp(&inst).unwrap();
    farkas.verify(&dual_lp).expect("farkas certificate verifies");

    // the same marginal is admissible once the band widens to [0.75, 1.25]
    let grid = GridSpec::new(1, 2, 1, rfrac(1, 4), TradeBound::Unbounded).unwrap();
    let op = PricingOperator::measure_set(
        vec![vec![rfrac(1, 10), rfrac(3, 5), rfrac(3, 10)]],
        &grid,
    )
    .unwrap();
    let inst =
        Instance::new(grid, PayoffSpec::call(rint(1)), Some(PricingModel::exact(op))).unwrap();
    assert!(matches!(ftap_feasibility::<Rat>(&inst).unwrap(), FtapVerdict::Feasible(_)));

    // exit codes through the binary: 2 for the arbitrage run, 0 at 0.25
    let dir = tempfile::tempdir().unwrap();
    let arb = r#"{
        "grid": {"n": 1, "J": 2, "N": 1, "kappa": 0.1},
        "payoff": {"kind": "call", "strike": 1},
        "pricing": {"measures": [[0.1, 0.6, 0.3]]}
    }"#;
    std::fs::write(dir.path().join("arb.json"), arb).unwrap();
    std::fs::write(dir.path().join("arb25.json"), arb.replace("0.1}", "0.25}")).unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_hedgelp"))
        .args(["price", "--exact", "--config"])
        .arg(dir.path().join("arb.json"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_hedgelp"))
        .args(["ftap", "--exact", "--config"])
        .arg(dir.path().join("arb25.json"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    println!("criterion 3 (arbitrage pairing with verified certificates, exit codes 2 then 0): PASS");
}

#[test]
fn c04_penalty_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0usize;
    for i in 0..20 {
        let n: u32 = *[1u32, 2].choose(&mut rng).unwrap();
        let trunc = rng.gen_range(n..=n + 1);
        let periods = rng.gen_range(1..=2u32);
        let kappa = [rint(0), rfrac(1, 10), rfrac(1, 5)].choose(&mut rng).unwrap().clone();
        let grid = GridSpec::new(n, trunc, periods, kappa, TradeBound::Unbounded).unwrap();
        // arbitrary sign-free claim as an explicit table
        let paths = hedgelp::market::enumerate_paths(&grid).unwrap();
        let mut values = std::collections::BTreeMap::new();
        for p in &paths {
            values.insert(p.indices()[1..].to_vec(), rfrac(rng.gen_range(-16..=16i64), 8));
        }
        let payoff = PayoffSpec::table(values, false, Modulus::None);
        for m in [rint(0), rint(1), rint(10)] {
            let inst = Instance::new(
                grid.with_bound(TradeBound::Finite(m.clone())),
                payoff.clone(),
                None,
            )
            .unwrap();
            let primal = solve_constrained::<Rat>(&inst).unwrap();
            let (dual_lp, _) = build_penalty_dual_lp(&inst, &m).unwrap();
            let dual = dual_lp.solve_exact().unwrap();
            assert_eq!(dual.status, Status::Optimal);
            assert_eq!(
                primal.value.as_ref().unwrap(),
                dual.objective_value(),
                "instance {i}, bound {m}"
            );
            if m == rint(0) {
                let sup = inst.payoff_values.iter().max().unwrap();
                assert_eq!(primal.value.as_ref().unwrap(), sup, "bound 0 is the sup");
            }
            checked += 1;
        }
    }
    println!("criterion 4 (penalty duality on {checked} exact solves, M in {{0,1,10}}): PASS");
}

#[test]
fn c05_doob_pathwise_inequality() {
    let params = DoobParams::new(3.0, 0.1, None).unwrap();
    let strategy = doob_strategy(params);
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut total = 0usize;
    for (n, j, periods) in [(1u32, 10u32, 5u32), (2, 10, 4), (1, 7, 3)] {
        let grid = GridSpec::new(n, j, periods, rfrac(1, 10), TradeBound::Unbounded).unwrap();
        let paths = sample_grid_paths(&grid, 4000, &mut rng);
        let values: Vec<Vec<f64>> = paths.iter().map(|p| p.values_f64(&grid)).collect();
        let report = verify_doob(&strategy, &values);
        assert!(
            report.passed(),
            "grid (n={n}, J={j}, N={periods}): {} violations",
            report.violations.len()
        );
        total += report.checked;
    }
    assert!(total >= 10_000);
    // constant-path hand values
    let constant = vec![1.0; 4];
    assert!((strategy.wealth(&constant) - 1.425).abs() < 1e-12);
    assert!((strategy.floor(&constant) - 0.55).abs() < 1e-12);
    println!("criterion 5 (pathwise floor on {total} random grid paths + hand value 1.425/0.55): PASS");
}

#[test]
fn c06_lifting_budget() {
    let grid = GridSpec::new(2, 4, 2, rfrac(1, 10), TradeBound::Finite(rint(1))).unwrap();
    let op = PricingOperator::measure_set(
        vec![
            {
                let mut delta_one = vec![rint(0); 5];
                delta_one[2] = rint(1);
                delta_one
            },
            vec![rfrac(1, 4), rfrac(1, 4), rfrac(1, 4), rfrac(1, 8), rfrac(1, 8)],
        ],
        &grid,
    )
    .unwrap();
    let inst = Instance::new(grid, PayoffSpec::call(rint(1)), Some(PricingModel::exact(op))).unwrap();
    let result = solve_primal::<Rat>(&inst).unwrap();
    assert_eq!(result.status, HedgeStatus::Optimal);
    let portfolio = result.portfolio.unwrap().to_f64();

    // budget (N + 2 kappa) M N h + m(h) with slope-1 modulus
    let h = 0.5;
    let budget = (2.0 + 0.2) * 1.0 * 2.0 * h + h;
    let ceiling = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let omega = vec![1.0, rng.gen_range(0.0..=ceiling), rng.gen_range(0.0..=ceiling)];
        let lifted = lift_portfolio(&portfolio, &omega, &inst.grid, &inst.tree);
        assert!(!lifted.out_of_model);
        let g = hedgelp::market::eval_payoff_f64(&inst.payoff, &omega).unwrap();
        if lifted.value < g - budget - 1e-9 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    println!("criterion 6 (lifting budget on 1000 off-grid paths, zero violations): PASS");
}

#[test]
fn c07_monotonicity_and_martingale_oracle() {
    // dual value nondecreasing in kappa on a quote-book instance where the
    // band actually binds
    let grid = GridSpec::new(1, 2, 2, rfrac(1, 10), TradeBound::Unbounded).unwrap();
    let op = PricingOperator::call_quotes(vec![CallQuote {
        strike: rint(1),
        bid: rfrac(1, 10),
        ask: rfrac(2, 5),
    }])
    .unwrap();
    let base = SweepBase {
        grid: grid.clone(),
        payoff: PayoffSpec::lookback(),
        pricing: PricingModel::exact(op.clone()),
    };
    let kappas: Vec<AxisValue> = [(0i64, 1i64), (1, 20), (1, 10), (1, 5)]
        .iter()
        .map(|&(a, b)| AxisValue::Number(rfrac(a, b)))
        .collect();
    let sweep = convergence_sweep::<Rat>(&base, SweepAxis::Kappa, &kappas, &Default::default());
    assert!(sweep.passed(), "kappa sweep: {:?}", sweep.verdicts);
    let duals: Vec<Rat> = sweep.points.iter().map(|p| p.dual.clone().unwrap()).collect();
    assert!(duals.windows(2).all(|w| w[0] <= w[1]));
    assert!(duals[0] < duals[3], "kappa must move the value on this instance");

    // primal value nonincreasing in M
    let bounds = vec![
        AxisValue::Number(rint(0)),
        AxisValue::Number(rint(1)),
        AxisValue::Number(rint(5)),
        AxisValue::Number(rint(1000)),
    ];
    let sweep = convergence_sweep::<Rat>(&base, SweepAxis::Bound, &bounds, &Default::default());
    assert!(sweep.passed(), "bound sweep: {:?}", sweep.verdicts);

    // kappa = 0: the dual equals an independently built martingale LP with
    // per-node equality rows
    let grid0 = grid.with_kappa(rint(0)).unwrap();
    let inst = Instance::new(grid0, PayoffSpec::lookback(), Some(PricingModel::exact(op))).unwrap();
    let dual = solve_dual::<Rat>(&inst).unwrap();
    let dual_value = dual.value.unwrap();

    let mut oracle = LinearProgram::new("martingale_oracle", Sense::Maximize);
    let q: Vec<_> = (0..inst.paths.len())
        .map(|p| {
            oracle
                .add_var(format!("q_{p}"), Some(rint(0)), None, inst.payoff_values[p].clone())
                .unwrap()
        })
        .collect();
    oracle
        .add_row("mass", Rel::Eq, q.iter().map(|&v| (v.into(), rint(1))).collect(), rint(1))
        .unwrap();
    for v in inst.tree.internal_nodes() {
        let node = inst.tree.node(v);
        let s_v = inst.grid.value(node.value_index);
        let terms: Vec<_> = (node.path_range.0..node.path_range.1)
            .filter_map(|p| {
                let coef = inst.grid.value(inst.paths[p].terminal_index()) - &s_v;
                (!num_traits::Zero::is_zero(&coef)).then(|| (q[p].into(), coef))
            })
            .collect();
        if !terms.is_empty() {
            oracle.add_row(format!("mart_{v}"), Rel::Eq, terms, rint(0)).unwrap();
        }
    }
    // quote bounds written directly from the book
    let call_at = |x: u32| {
        let v = inst.grid.value(x) - rint(1);
        if v < rint(0) {
            rint(0)
        } else {
            v
        }
    };
    let mut ask_terms = Vec::new();
    for (p, path) in inst.paths.iter().enumerate() {
        let cv = call_at(path.terminal_index());
        if !num_traits::Zero::is_zero(&cv) {
            ask_terms.push((q[p].into(), cv));
        }
    }
    oracle.add_row("ask", Rel::Le, ask_terms.clone(), rfrac(2, 5)).unwrap();
    oracle.add_row("bid", Rel::Ge, ask_terms, rfrac(1, 10)).unwrap();
    let oracle_value = oracle.solve_exact().unwrap().objective_value().clone();
    assert!(
        Signed::abs(&(dual_value.clone() - oracle_value.clone()))
            <= rat_from_decimal("1e-9").unwrap(),
        "{dual_value} vs {oracle_value}"
    );
    println!("criterion 7 (monotone sweeps + frictionless martingale oracle match): PASS");
}

#[test]
fn c08_tail_bound() {
    let grid = GridSpec::new(1, 4, 2, rfrac(1, 10), TradeBound::Unbounded).unwrap();
    // terminal law on {0..4} with mean 1
    let op = PricingOperator::measure_set(
        vec![vec![rfrac(2, 5), rfrac(7, 20), rfrac(3, 20), rfrac(1, 20), rfrac(1, 20)]],
        &grid,
    )
    .unwrap();
    let pricing = PricingModel::exact(op);
    let params = DoobParams::new(3.0, 0.1, None).unwrap();
    for m0 in [rint(1), rfrac(3, 2), rint(2)] {
        let report = tail_bound_check(&grid, &pricing, &params, &m0).unwrap();
        assert!(
            report.holds(),
            "threshold {}: price {} exceeds bound {}",
            report.threshold,
            report.lp_value,
            report.bound
        );
    }
    println!("criterion 8 (tail-option bound at thresholds 1, 1.5, 2 on the J=4 grid): PASS");
}

#[test]
fn c09_pricing_axioms() {
    let grid = GridSpec::new(1, 2, 1, rfrac(1, 10), TradeBound::Unbounded).unwrap();
    let measures = PricingOperator::measure_set(
        vec![
            vec![rfrac(1, 4), rfrac(1, 2), rfrac(1, 4)],
            vec![rfrac(1, 2), rfrac(3, 8), rfrac(1, 8)],
        ],
        &grid,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let report = check_axioms(&measures, &grid, 1000, &mut rng).unwrap();
    assert!(report.passed(), "measure-set violations: {:?}", report.violations.len());

    let quotes = PricingOperator::call_quotes(vec![
        CallQuote { strike: rint(1), bid: rfrac(1, 5), ask: rfrac(3, 10) },
        CallQuote { strike: rint(0), bid: rfrac(9, 10), ask: rfrac(11, 10) },
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(910);
    let report = check_axioms(&quotes, &grid, 1000, &mut rng).unwrap();
    assert!(report.passed(), "quote violations: {:?}", report.violations.len());
    println!("criterion 9 (sublinearity/homogeneity/constants, 1000 trials per variant): PASS");
}

#[test]
fn c10_determinism() {
    // the strong-duality suite reproduces byte-identically under a fixed seed
    let (report_a, _, _) = strong_duality_suite(20240817, 12);
    let (report_b, _, _) = strong_duality_suite(20240817, 12);
    assert_eq!(report_a, report_b);

    // and the CLI report is byte-identical across runs
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "grid": {"n": 1, "J": 2, "N": 1, "kappa": 0.1},
        "payoff": {"kind": "call", "strike": 1},
        "pricing": {"measures": [[0.25, 0.5, 0.25]]},
        "solver": {"mode": "exact", "seed": 7}
    }"#;
    std::fs::write(dir.path().join("a.json"), cfg).unwrap();
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_hedgelp"))
            .args(["price", "--config"])
            .arg(dir.path().join("a.json"))
            .output()
            .unwrap()
    };
    let one = run();
    let two = run();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
    println!("criterion 10 (byte-identical reports under fixed seeds): PASS");
}

// Beyond the numbered criteria: the epsilon-widened marginal surrogate
// keeps the exact duality pairing in both pricing forms.
#[test]
fn extra_epsilon_widening_preserves_exact_duality() {
    let grid = GridSpec::new(1, 2, 2, rfrac(1, 10), TradeBound::Unbounded).unwrap();
    let measures = PricingOperator::measure_set(
        vec![vec![rfrac(1, 4), rfrac(1, 2), rfrac(1, 4)]],
        &grid,
    )
    .unwrap();
    let model = PricingModel::new(measures, rfrac(1, 100)).unwrap();
    let inst = Instance::new(grid.clone(), PayoffSpec::call(rint(1)), Some(model)).unwrap();
    let gap = duality_gap::<Rat>(&inst).unwrap();
    assert_eq!(gap.status, GapStatus::OptimalPair);
    assert_eq!(gap.gap.unwrap(), rint(0));
    // widening can only raise the transport value
    let tight = duality_gap::<Rat>(&instance_a()).unwrap();
    assert!(gap.dual.unwrap() >= tight.dual.unwrap());

    let quotes = PricingOperator::call_quotes(vec![CallQuote {
        strike: rint(1),
        bid: rfrac(1, 5),
        ask: rfrac(3, 10),
    }])
    .unwrap();
    let model = PricingModel::new(quotes, rfrac(1, 100)).unwrap();
    let inst = Instance::new(grid, PayoffSpec::call(rint(1)), Some(model)).unwrap();
    let gap = duality_gap::<Rat>(&inst).unwrap();
    assert_eq!(gap.status, GapStatus::OptimalPair);
    assert_eq!(gap.gap.unwrap(), rint(0));
}

// The weak-duality chain and the primal-dual measure consistency on
// randomized feasible pairs.
#[test]
fn extra_weak_duality_randomized_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    for i in 0..12 {
        let inst = random_feasible_instance(&mut rng);
        let dual = solve_dual::<Rat>(&inst).unwrap();
        let q = dual.measure.clone().unwrap();
        if !dual.penalized {
            assert!(certify_measure(&q, &inst).unwrap().certified(), "instance {i}");
        }
        // any feasible portfolio's cost dominates the measure's payoff
        // expectation net of penalties
        let primal = solve_primal::<Rat>(&inst).unwrap();
        let cost = primal.value.clone().unwrap();
        let payoff_side = match inst.grid.bound() {
            TradeBound::Unbounded => q.expectation(&inst.payoff_values),
            TradeBound::Finite(m) => hedgelp::dual::penalty_value(&q, &inst, m),
        };
        assert!(payoff_side <= cost, "instance {i}");

        // the primal's path duals are a feasible measure reproducing the optimum
        let qp = PathMeasure { weights: primal.path_duals.clone() };
        let side = match inst.grid.bound() {
            TradeBound::Unbounded => qp.expectation(&inst.payoff_values),
            TradeBound::Finite(m) => hedgelp::dual::penalty_value(&qp, &inst, m),
        };
        assert_eq!(side, cost, "instance {i}: complementary measure value");
    }
}

// Portfolio slack feasibility across random instances: the normalized
// optimal portfolio super-replicates path by path, exactly in exact mode.
#[test]
fn extra_portfolio_slack_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(778);
    for _ in 0..10 {
        let inst = random_feasible_instance(&mut rng);
        let result = solve_primal::<Rat>(&inst).unwrap();
        let portfolio = result.portfolio.unwrap();
        assert!(portfolio.is_normal_form());
        for s in &result.slacks {
            assert!(s >= &rint(0));
        }
        if let StaticLeg::Terminal(f) = &portfolio.static_leg {
            assert_eq!(f.len(), inst.grid.terminal_points());
        }
    }
}
