//! Batch command implementations behind the binary: config ingestion,
//! solve dispatch, report emission, CSV artifacts, and the stable exit-code
//! contract.
//!
//! Exit codes: 0 success, 1 assertion failures, 2 arbitrage, 3 internal
//! inconsistency, 64 config error, 66 missing input artifact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    self, convergence_sweep, doob_strategy, duality_gap_with_options, sample_grid_paths,
    verify_doob, AxisValue, DoobParams, GapStatus, SweepAxis, SweepBase,
};
use crate::config::{parse_cell_spec, resolve_cell, ConfigError, RunConfig, SolveMode};
use crate::dual::{
    build_dual_lp, build_dual_penalized_lp, build_penalty_dual_lp, ftap_feasibility,
    local_arbitrage_probe, penalty_value, FtapVerdict, PathMeasure,
};
use crate::instance::Instance;
use crate::lp::{self, LpError};
use crate::market::{eval_payoff_f64, TradeBound};
use crate::pricing::check_axioms;
use crate::primal::{
    build_constrained_lp, build_semistatic_lp, portfolio_from_csv, portfolio_to_csv,
    solve_constrained_with_options, HedgeStatus,
};
use crate::scalar::{rat_render, LpScalar, Rat};

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const ASSERTION_FAILURES: i32 = 1;
    pub const ARBITRAGE: i32 = 2;
    pub const INCONSISTENCY: i32 = 3;
    pub const CONFIG: i32 = 64;
    pub const MISSING_ARTIFACT: i32 = 66;
}

/// A finished command: the report text, files to persist, and the exit
/// code. Reports are deterministic byte-for-byte for a fixed config and
/// seed.
pub struct CmdOutput {
    pub report: String,
    pub files: Vec<(PathBuf, String)>,
    pub code: i32,
}

impl CmdOutput {
    fn new(report: String, code: i32) -> Self {
        CmdOutput { report, files: Vec::new(), code }
    }
}

fn config_failure(err: &ConfigError) -> CmdOutput {
    let mut report = String::from("config error\n");
    for issue in err.issues() {
        let _ = writeln!(report, "  {issue}");
    }
    let code = match err {
        ConfigError::Unreadable { .. } => exit_code::MISSING_ARTIFACT,
        _ => exit_code::CONFIG,
    };
    CmdOutput::new(report, code)
}

fn lp_failure(e: &LpError) -> CmdOutput {
    let code = match e {
        LpError::ExactCap { .. } => exit_code::CONFIG,
        _ => exit_code::INCONSISTENCY,
    };
    CmdOutput::new(format!("solver error: {e}\n"), code)
}

fn header(cmd: &str, config: &RunConfig) -> String {
    let mut out = format!("hedgelp {cmd}\nconfig: {}\n", config.effective_json());
    if !num_traits::Zero::is_zero(&config.epsilon) {
        out.push_str(
            "note: epsilon-widened marginals are a finite surrogate for the relaxed marginal family\n",
        );
    }
    out
}

fn measure_csv<S: LpScalar>(q: &PathMeasure<S>, inst: &Instance) -> String {
    let mut out = String::new();
    let n = inst.grid.periods() as usize;
    let mut head = (1..=n).map(|k| format!("s_{k}")).collect::<Vec<_>>().join(",");
    head.push_str(",weight");
    out.push_str(&head);
    out.push('\n');
    for (p, w) in q.weights.iter().enumerate() {
        if *w == S::zero() {
            continue;
        }
        let coords = inst.paths[p].indices()[1..]
            .iter()
            .map(|&i| rat_render(&inst.grid.value(i)))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "{coords},{}", w.render());
    }
    out
}

fn dump_lp_files(
    files: &mut Vec<(PathBuf, String)>,
    base: &Path,
    parts: &[(&str, &lp::LinearProgram)],
) {
    for (suffix, program) in parts {
        let mut path = base.as_os_str().to_owned();
        path.push(format!(".{suffix}.lp"));
        files.push((PathBuf::from(path), program.dump_lp_format()));
    }
}

/// Price the claim: solve both sides of the duality and report values,
/// gap, and binding constraints, or the paired arbitrage certificates.
pub fn cmd_price(config: &RunConfig, base_dir: &Path) -> CmdOutput {
    let inst = match config.instance(base_dir) {
        Ok(i) => i,
        Err(e) => return config_failure(&e),
    };
    match config.mode {
        SolveMode::Float => price_in_mode::<f64>(config, &inst),
        SolveMode::Exact => price_in_mode::<Rat>(config, &inst),
    }
}

fn price_in_mode<S: LpScalar>(config: &RunConfig, inst: &Instance) -> CmdOutput {
    let mut report = header("price", config);
    let _ = writeln!(report, "pricing: {}", inst.pricing.as_ref().unwrap().describe());
    let opts = config.solve_options();
    match duality_gap_with_options::<S>(inst, &opts) {
        Ok(gap) => match gap.status {
            GapStatus::OptimalPair => {
                let _ = writeln!(report, "primal value: {}", gap.primal.as_ref().unwrap().describe());
                let _ = writeln!(report, "dual value: {}", gap.dual.as_ref().unwrap().describe());
                let _ = writeln!(report, "gap: {}", gap.gap.as_ref().unwrap().describe());
                let binding =
                    if gap.binding.is_empty() { "(none)".to_string() } else { gap.binding.join(", ") };
                let _ = writeln!(report, "binding constraints: {binding}");
                let ok = gap.gap_ok();
                let _ = writeln!(report, "status: {}", if ok { "optimal pair" } else { "gap exceeds tolerance" });
                let mut out = CmdOutput::new(
                    report,
                    if ok { exit_code::OK } else { exit_code::INCONSISTENCY },
                );
                attach_price_artifacts::<S>(&mut out, config, inst, &opts);
                out
            }
            GapStatus::ArbitragePair => {
                let _ = writeln!(report, "status: model-independent arbitrage");
                let _ = writeln!(
                    report,
                    "the hedging problem is unbounded below and the measure set is empty"
                );
                let mut out = CmdOutput::new(report, exit_code::ARBITRAGE);
                attach_arbitrage_artifacts::<S>(&mut out, config, inst, &opts);
                out
            }
        },
        Err(analysis::AnalysisError::Hedge(crate::primal::HedgeError::Lp(e)))
        | Err(analysis::AnalysisError::Dual(crate::dual::DualError::Lp(e))) => lp_failure(&e),
        Err(e) => CmdOutput::new(format!("{report}status: inconsistency\n  {e}\n"), exit_code::INCONSISTENCY),
    }
}

fn attach_price_artifacts<S: LpScalar>(
    out: &mut CmdOutput,
    config: &RunConfig,
    inst: &Instance,
    opts: &lp::SolveOptions,
) {
    if let Some(dir) = &config.out_dir {
        if let Ok(result) = crate::primal::solve_primal_with_options::<S>(inst, opts) {
            if let Some(portfolio) = &result.portfolio {
                out.files.push((
                    dir.join("portfolio.csv"),
                    portfolio_to_csv(portfolio, &inst.grid, &inst.tree),
                ));
            }
        }
        if let Ok(result) = crate::dual::solve_dual_with_options::<S>(inst, opts) {
            if let Some(q) = &result.measure {
                out.files.push((dir.join("measure.csv"), measure_csv(q, inst)));
            }
        }
    }
    if let Some(base) = &config.dump_lp {
        if let (Ok((plp, _)), bound) = (build_semistatic_lp(inst), inst.grid.bound()) {
            let dual_prog = match bound {
                TradeBound::Unbounded => build_dual_lp(inst).map(|(l, _)| l),
                TradeBound::Finite(m) => build_dual_penalized_lp(inst, m).map(|(l, _)| l),
            };
            if let Ok(dlp) = dual_prog {
                dump_lp_files(&mut out.files, base, &[("primal", &plp), ("dual", &dlp)]);
            }
        }
    }
}

fn attach_arbitrage_artifacts<S: LpScalar>(
    out: &mut CmdOutput,
    config: &RunConfig,
    inst: &Instance,
    opts: &lp::SolveOptions,
) {
    let Ok(dual) = crate::dual::solve_dual_with_options::<S>(inst, opts) else {
        return;
    };
    if let Some(farkas) = &dual.farkas {
        let (lp_prog, _) = match inst.grid.bound() {
            TradeBound::Unbounded => build_dual_lp(inst).expect("dual LP rebuilds"),
            TradeBound::Finite(m) => build_dual_penalized_lp(inst, m).expect("dual LP rebuilds"),
        };
        let text = farkas.render(&lp_prog);
        let _ = writeln!(out.report, "{text}");
        if let Some(dir) = &config.out_dir {
            out.files.push((dir.join("farkas.txt"), text));
        }
    }
    if let Ok(primal) = crate::primal::solve_primal_with_options::<S>(inst, opts) {
        if let Some(ray) = &primal.ray {
            let _ = writeln!(
                out.report,
                "improving portfolio ray: cost direction {}",
                ray.objective_delta.describe()
            );
        }
    }
}

/// Constrained-versus-penalty pricing: both sides of the statics-free
/// duality at a finite trading bound.
pub fn cmd_penalty(config: &RunConfig, base_dir: &Path) -> CmdOutput {
    let TradeBound::Finite(bound) = config.bound.clone() else {
        return CmdOutput::new(
            "config error\n  grid.M: the penalty command needs a finite trading bound\n".into(),
            exit_code::CONFIG,
        );
    };
    let inst = match config.constrained_instance(base_dir) {
        Ok(i) => i,
        Err(e) => return config_failure(&e),
    };
    match config.mode {
        SolveMode::Float => penalty_in_mode::<f64>(config, &inst, &bound),
        SolveMode::Exact => penalty_in_mode::<Rat>(config, &inst, &bound),
    }
}

fn penalty_in_mode<S: LpScalar>(config: &RunConfig, inst: &Instance, bound: &Rat) -> CmdOutput {
    let mut report = header("penalty", config);
    let opts = config.solve_options();
    let primal = match solve_constrained_with_options::<S>(inst, &opts) {
        Ok(r) => r,
        Err(crate::primal::HedgeError::Lp(e)) => return lp_failure(&e),
        Err(e) => return CmdOutput::new(format!("error: {e}\n"), exit_code::INCONSISTENCY),
    };
    let (dual_prog, vars) = match build_penalty_dual_lp(inst, bound) {
        Ok(x) => x,
        Err(e) => return CmdOutput::new(format!("error: {e}\n"), exit_code::INCONSISTENCY),
    };
    let dual_sol = match lp::solve_with_options::<S>(&dual_prog, &opts) {
        Ok(s) => s,
        Err(e) => return lp_failure(&e),
    };
    if dual_sol.status != lp::Status::Optimal || primal.status != HedgeStatus::Optimal {
        return CmdOutput::new(
            format!("{report}status: inconsistency (penalty pair must both be optimal)\n"),
            exit_code::INCONSISTENCY,
        );
    }
    let p = primal.value.unwrap();
    let d = dual_sol.objective_value().clone();
    let gap = (p.clone() - d.clone()).abs_val();
    let q = PathMeasure::<S> {
        weights: vars.weights.iter().map(|v| dual_sol.primal[v.0].clone()).collect(),
    };
    let recheck = penalty_value(&q, inst, bound);
    let _ = writeln!(report, "constrained value: {}", p.describe());
    let _ = writeln!(report, "penalty dual value: {}", d.describe());
    let _ = writeln!(report, "gap: {}", gap.describe());
    let _ = writeln!(report, "penalty recomputation: {}", recheck.describe());
    let gap_ok = if S::EXACT {
        gap == S::zero()
    } else {
        LpScalar::to_f64(&gap).abs() <= 1e-7
    };
    let recheck_ok = {
        let diff = (recheck - d).abs_val();
        if S::EXACT {
            diff == S::zero()
        } else {
            LpScalar::to_f64(&diff).abs() <= 1e-9 * (1.0 + LpScalar::to_f64(&p).abs())
        }
    };
    let _ = writeln!(report, "status: {}", if gap_ok && recheck_ok { "equal" } else { "gap" });
    let mut out = CmdOutput::new(
        report,
        if gap_ok && recheck_ok { exit_code::OK } else { exit_code::INCONSISTENCY },
    );
    if let Some(dir) = &config.out_dir {
        if let Some(portfolio) = &primal.portfolio {
            out.files
                .push((dir.join("portfolio.csv"), portfolio_to_csv(portfolio, &inst.grid, &inst.tree)));
        }
        out.files.push((dir.join("measure.csv"), measure_csv(&q, inst)));
    }
    if let Some(base) = &config.dump_lp {
        if let Ok((plp, _)) = build_constrained_lp(inst) {
            dump_lp_files(&mut out.files, base, &[("constrained", &plp), ("penalty", &dual_prog)]);
        }
    }
    out
}

/// No-arbitrage feasibility probe, with an optional local cell probe.
pub fn cmd_ftap(config: &RunConfig, base_dir: &Path, cell_flag: Option<&str>) -> CmdOutput {
    let inst = match config.probe_instance(base_dir) {
        Ok(i) => i,
        Err(e) => return config_failure(&e),
    };
    let cell_spec = cell_flag.or(config.cell.as_deref());
    match config.mode {
        SolveMode::Float => ftap_in_mode::<f64>(config, &inst, cell_spec),
        SolveMode::Exact => ftap_in_mode::<Rat>(config, &inst, cell_spec),
    }
}

fn ftap_in_mode<S: LpScalar>(config: &RunConfig, inst: &Instance, cell_spec: Option<&str>) -> CmdOutput {
    let mut report = header("ftap", config);
    let cell = match cell_spec {
        None => None,
        Some(spec) => match parse_cell_spec(spec).and_then(|pins| resolve_cell(&pins, inst)) {
            Ok(c) => Some(c),
            Err(e) => {
                return CmdOutput::new(format!("config error\n  cell: {e}\n"), exit_code::CONFIG)
            }
        },
    };
    match ftap_feasibility::<S>(inst) {
        Ok(FtapVerdict::Feasible(witness)) => {
            let _ = writeln!(report, "verdict: no model-independent arbitrage (witness found)");
            let mut out = CmdOutput::new(report, exit_code::OK);
            if let Some(cell) = cell {
                match local_arbitrage_probe::<S>(inst, &cell) {
                    Ok((value, _)) => {
                        let _ = writeln!(out.report, "cell paths: {}", cell.len());
                        let _ = writeln!(out.report, "max cell probability: {}", value.describe());
                    }
                    Err(e) => {
                        return CmdOutput::new(
                            format!("{}error: {e}\n", out.report),
                            exit_code::INCONSISTENCY,
                        )
                    }
                }
            }
            if let Some(dir) = &config.out_dir {
                out.files.push((dir.join("witness.csv"), measure_csv(&witness, inst)));
            }
            out
        }
        Ok(FtapVerdict::Infeasible(farkas)) => {
            let _ = writeln!(report, "verdict: model-independent arbitrage (measure set is empty)");
            let (lp_prog, _) = build_dual_lp(inst).expect("band LP rebuilds");
            let text = farkas.render(&lp_prog);
            let _ = writeln!(report, "{text}");
            let mut out = CmdOutput::new(report, exit_code::ARBITRAGE);
            if let Some(dir) = &config.out_dir {
                out.files.push((dir.join("farkas.txt"), text));
            }
            out
        }
        Err(crate::dual::DualError::Lp(e)) => lp_failure(&e),
        Err(e) => CmdOutput::new(format!("error: {e}\n"), exit_code::INCONSISTENCY),
    }
}

/// Verification harnesses: the pathwise inequality, the lifting budget, or
/// the pricing axioms.
pub fn cmd_verify(
    config: &RunConfig,
    base_dir: &Path,
    which: &str,
    samples: Option<usize>,
    portfolio: Option<&Path>,
) -> CmdOutput {
    match which {
        "doob" => verify_doob_cmd(config, samples),
        "lift" => verify_lift_cmd(config, base_dir, samples, portfolio),
        "axioms" => verify_axioms_cmd(config, samples),
        other => CmdOutput::new(
            format!("config error\n  --which: unknown check {other:?} (doob|lift|axioms)\n"),
            exit_code::CONFIG,
        ),
    }
}

fn verify_doob_cmd(config: &RunConfig, samples: Option<usize>) -> CmdOutput {
    let mut report = header("verify doob", config);
    let grid = match config.grid_for_hedging() {
        Ok(g) => g,
        Err(e) => return config_failure(&e),
    };
    let kappa = LpScalar::to_f64(grid.kappa());
    let params = match DoobParams::new(config.doob_r, kappa, config.doob_p) {
        Ok(p) => p,
        Err(e) => {
            return CmdOutput::new(format!("config error\n  doob.r: {e}\n"), exit_code::CONFIG)
        }
    };
    let strategy = doob_strategy(params);
    let count = samples.unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let paths = sample_grid_paths(&grid, count, &mut rng);
    let values: Vec<Vec<f64>> = paths.iter().map(|p| p.values_f64(&grid)).collect();
    let result = verify_doob(&strategy, &values);
    let _ = writeln!(report, "r: {}, c_r: {}, lambda: {}", params.r, params.c_r, params.lambda);
    let _ = writeln!(report, "paths checked: {}", result.checked);
    let _ = writeln!(report, "violations: {}", result.violations.len());
    let _ = writeln!(report, "min slack: {}", result.min_slack);
    let constant = vec![1.0; grid.periods() as usize + 1];
    let _ = writeln!(
        report,
        "constant-path wealth: {} (floor {})",
        strategy.wealth(&constant),
        strategy.floor(&constant)
    );
    let code = if result.passed() { exit_code::OK } else { exit_code::ASSERTION_FAILURES };
    CmdOutput::new(report, code)
}

fn verify_lift_cmd(
    config: &RunConfig,
    base_dir: &Path,
    samples: Option<usize>,
    portfolio: Option<&Path>,
) -> CmdOutput {
    let mut report = header("verify lift", config);
    let inst = match config.constrained_instance(base_dir) {
        Ok(i) => i,
        Err(e) => return config_failure(&e),
    };
    let TradeBound::Finite(_) = inst.grid.bound() else {
        return CmdOutput::new(
            "config error\n  grid.M: the lifting budget needs a finite trading bound\n".into(),
            exit_code::CONFIG,
        );
    };
    let Some(budget) = analysis::error_budget(&inst.grid, &inst.payoff) else {
        return CmdOutput::new(
            "config error\n  payoff: the lifting budget needs a declared modulus\n".into(),
            exit_code::CONFIG,
        );
    };
    if inst.payoff.is_table() {
        return CmdOutput::new(
            "config error\n  payoff: table payoffs cannot be evaluated off the grid\n".into(),
            exit_code::CONFIG,
        );
    }
    let artifact = match portfolio {
        Some(p) => p.to_path_buf(),
        None => match &config.out_dir {
            Some(dir) => dir.join("portfolio.csv"),
            None => {
                return CmdOutput::new(
                    "missing artifact: give --portfolio or an output dir with portfolio.csv\n".into(),
                    exit_code::MISSING_ARTIFACT,
                )
            }
        },
    };
    let text = match std::fs::read_to_string(&artifact) {
        Ok(t) => t,
        Err(e) => {
            return CmdOutput::new(
                format!("missing artifact: cannot read {}: {e}\n", artifact.display()),
                exit_code::MISSING_ARTIFACT,
            )
        }
    };
    let grid_portfolio = match portfolio_from_csv(&text, &inst.grid, &inst.tree) {
        Ok(p) => p,
        Err(e) => return CmdOutput::new(format!("artifact error: {e}\n"), exit_code::CONFIG),
    };
    let pf = grid_portfolio.to_f64();
    let count = samples.unwrap_or(1_000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ceiling = inst.grid.trunc() as f64 / inst.grid.n() as f64;
    let steps = inst.grid.periods() as usize;
    let mut violations = 0usize;
    let mut out_of_model = 0usize;
    let mut min_slack = f64::INFINITY;
    for _ in 0..count {
        let mut omega = Vec::with_capacity(steps + 1);
        omega.push(1.0);
        for _ in 0..steps {
            omega.push(rng.gen_range(0.0..=ceiling));
        }
        let lifted = crate::primal::lift_portfolio(&pf, &omega, &inst.grid, &inst.tree);
        if lifted.out_of_model {
            out_of_model += 1;
        }
        let g = eval_payoff_f64(&inst.payoff, &omega).expect("built-in payoff");
        let floor = g - budget;
        let slack = lifted.value - floor;
        if slack < min_slack {
            min_slack = slack;
        }
        if slack < -1e-9 * (1.0 + floor.abs()) {
            violations += 1;
        }
    }
    let _ = writeln!(report, "samples: {count}");
    let _ = writeln!(report, "error budget: {budget}");
    let _ = writeln!(report, "violations: {violations}");
    let _ = writeln!(report, "out-of-model paths: {out_of_model}");
    let _ = writeln!(report, "min slack: {min_slack}");
    let code = if violations == 0 { exit_code::OK } else { exit_code::ASSERTION_FAILURES };
    CmdOutput::new(report, code)
}

fn verify_axioms_cmd(config: &RunConfig, samples: Option<usize>) -> CmdOutput {
    let mut report = header("verify axioms", config);
    let grid = match config.grid_for_band_probe() {
        Ok(g) => g,
        Err(e) => return config_failure(&e),
    };
    let pricing = match config.pricing_model(&grid) {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let trials = samples.unwrap_or(1_000);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let result = match check_axioms(&pricing.operator, &grid, trials, &mut rng) {
        Ok(r) => r,
        Err(e) => return CmdOutput::new(format!("error: {e}\n"), exit_code::INCONSISTENCY),
    };
    let _ = writeln!(report, "trials: {}", result.trials);
    let _ = writeln!(report, "violations: {}", result.violations.len());
    for v in result.violations.iter().take(10) {
        let _ = writeln!(report, "  {}: {}", v.axiom, v.witness);
    }
    let code = if result.passed() { exit_code::OK } else { exit_code::ASSERTION_FAILURES };
    CmdOutput::new(report, code)
}

/// Parameter sweep along one axis with per-point duality checks and
/// monotonicity verdicts.
pub fn cmd_sweep(config: &RunConfig, base_dir: &Path, axis: &str, values: &str) -> CmdOutput {
    let Some(axis) = SweepAxis::parse(axis) else {
        return CmdOutput::new(
            format!("config error\n  --axis: unknown axis {axis:?} (kappa|M|n|J)\n"),
            exit_code::CONFIG,
        );
    };
    let parsed: Result<Vec<AxisValue>, String> = values
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok == "unbounded" {
                Ok(AxisValue::Unbounded)
            } else {
                crate::scalar::rat_from_str(tok).map(AxisValue::Number).map_err(|e| e.to_string())
            }
        })
        .collect();
    let values = match parsed {
        Ok(v) if !v.is_empty() => v,
        Ok(_) => {
            return CmdOutput::new("config error\n  --values: empty list\n".into(), exit_code::CONFIG)
        }
        Err(e) => {
            return CmdOutput::new(format!("config error\n  --values: {e}\n"), exit_code::CONFIG)
        }
    };
    let grid = match config.grid_for_hedging() {
        Ok(g) => g,
        Err(e) => return config_failure(&e),
    };
    let payoff = match config.payoff_spec(&grid, base_dir) {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let pricing = match config.pricing_model(&grid) {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let base = SweepBase { grid, payoff, pricing };
    let opts = config.solve_options();
    let (csv, verdict_lines, passed) = match config.mode {
        SolveMode::Float => {
            let r = convergence_sweep::<f64>(&base, axis, &values, &opts);
            (r.to_csv(), verdict_text(&r.verdicts, &r), r.passed())
        }
        SolveMode::Exact => {
            let r = convergence_sweep::<Rat>(&base, axis, &values, &opts);
            (r.to_csv(), verdict_text(&r.verdicts, &r), r.passed())
        }
    };
    let mut report = header("sweep", config);
    let _ = writeln!(report, "axis: {}", axis.name());
    report.push_str(&verdict_lines);
    let mut out = CmdOutput::new(report, if passed { exit_code::OK } else { exit_code::ASSERTION_FAILURES });
    match &config.out_dir {
        Some(dir) => out.files.push((dir.join("sweep.csv"), csv)),
        None => {
            out.report.push_str(&csv);
        }
    }
    out
}

fn verdict_text<S: LpScalar>(
    verdicts: &[(String, bool)],
    report: &analysis::SweepReport<S>,
) -> String {
    let mut out = String::new();
    for p in &report.points {
        if let Some(e) = &p.error {
            let _ = writeln!(out, "point {} failed: {e}", p.label);
        }
    }
    for (name, ok) in verdicts {
        let _ = writeln!(out, "verdict: {name}: {}", if *ok { "pass" } else { "FAIL" });
    }
    out
}

/// Persists a command's files, creating parent directories.
pub fn write_outputs(output: &CmdOutput) -> std::io::Result<()> {
    for (path, content) in &output.files {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, content)?;
    }
    Ok(())
}
