//! Run configuration: JSON schema, exact numeric parsing, validation with
//! field-level messages, and construction of solve-ready instances.
//!
//! Numbers are read through `serde_json`'s arbitrary-precision
//! representation and converted to exact rationals from their decimal
//! source text, so `0.1` is exactly 1/10 in exact mode.

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};

use serde::Deserialize;

use crate::instance::Instance;
use crate::market::{GridSpec, Modulus, PayoffSpec, TradeBound};
use crate::pricing::{CallQuote, PricingModel, PricingOperator};
use crate::scalar::{rat_from_decimal, rat_int, rat_render, Rat};

#[derive(Debug, Clone)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("config validation failed")]
    Invalid(Vec<ConfigIssue>),
    #[error("cannot read {path}: {message}")]
    Unreadable { path: String, message: String },
}

impl ConfigError {
    pub fn issues(&self) -> Vec<ConfigIssue> {
        match self {
            ConfigError::Invalid(v) => v.clone(),
            other => vec![ConfigIssue { field: "config".into(), message: other.to_string() }],
        }
    }
}

fn num_to_rat(n: &serde_json::Number, field: &str, issues: &mut Vec<ConfigIssue>) -> Rat {
    match rat_from_decimal(&n.to_string()) {
        Ok(r) => r,
        Err(e) => {
            issues.push(ConfigIssue { field: field.into(), message: e.to_string() });
            rat_int(0)
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    payoff: RawPayoff,
    #[serde(default)]
    pricing: Option<RawPricing>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    doob: Option<RawDoob>,
    #[serde(default)]
    cell: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: u32,
    #[serde(rename = "J")]
    trunc: u32,
    #[serde(rename = "N")]
    periods: u32,
    kappa: serde_json::Number,
    #[serde(rename = "M", default)]
    bound: Option<RawBound>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBound {
    Number(serde_json::Number),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPayoff {
    kind: String,
    #[serde(default)]
    strike: Option<serde_json::Number>,
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    nonnegative: Option<bool>,
    #[serde(default)]
    modulus_slope: Option<serde_json::Number>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPricing {
    #[serde(default)]
    measures: Option<Vec<Vec<serde_json::Number>>>,
    #[serde(default)]
    calls: Option<Vec<RawQuote>>,
    #[serde(default)]
    epsilon: Option<serde_json::Number>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuote {
    strike: serde_json::Number,
    bid: serde_json::Number,
    ask: serde_json::Number,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    tolerance: Option<serde_json::Number>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    enumeration_cap: Option<u64>,
    #[serde(default)]
    exact_nonzero_cap: Option<usize>,
    #[serde(default)]
    pivot_cap: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    dir: Option<String>,
    #[serde(default)]
    dump_lp: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoob {
    r: serde_json::Number,
    #[serde(default)]
    p: Option<serde_json::Number>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Float,
    Exact,
}

/// Payoff description, resolved but with table files loaded on demand.
#[derive(Debug, Clone)]
pub enum PayoffCfg {
    Call { strike: Rat },
    Put { strike: Rat },
    Asian { strike: Rat },
    Lookback,
    Table { path: PathBuf, nonnegative: bool, modulus_slope: Option<Rat> },
}

#[derive(Debug, Clone)]
pub enum PricingCfg {
    Measures(Vec<Vec<Rat>>),
    Calls(Vec<(Rat, Rat, Rat)>),
}

/// Fully validated run configuration with every default applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: u32,
    pub trunc: u32,
    pub periods: u32,
    pub kappa: Rat,
    pub bound: TradeBound,
    pub payoff: PayoffCfg,
    pub pricing: Option<PricingCfg>,
    pub epsilon: Rat,
    pub mode: SolveMode,
    pub tolerance: f64,
    pub seed: u64,
    pub enumeration_cap: u128,
    pub exact_nonzero_cap: usize,
    pub pivot_cap: usize,
    pub out_dir: Option<PathBuf>,
    pub dump_lp: Option<PathBuf>,
    pub doob_r: f64,
    pub doob_p: Option<f64>,
    pub cell: Option<String>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let mut issues = Vec::new();

    let kappa = num_to_rat(&raw.grid.kappa, "grid.kappa", &mut issues);
    let bound = match &raw.grid.bound {
        None => TradeBound::Unbounded,
        Some(RawBound::Word(w)) if w == "unbounded" => TradeBound::Unbounded,
        Some(RawBound::Word(w)) => {
            issues.push(ConfigIssue {
                field: "grid.M".into(),
                message: format!("expected a number or \"unbounded\", got {w:?}"),
            });
            TradeBound::Unbounded
        }
        Some(RawBound::Number(n)) => {
            let m = num_to_rat(n, "grid.M", &mut issues);
            if m < rat_int(0) {
                issues.push(ConfigIssue {
                    field: "grid.M".into(),
                    message: "trading bound must be nonnegative".into(),
                });
            }
            TradeBound::Finite(m)
        }
    };
    // structural grid validation (the kappa < 1/4 standing assumption is
    // checked per command)
    if let Err(e) = GridSpec::new(raw.grid.n, raw.grid.trunc, raw.grid.periods, kappa.clone(), bound.clone())
    {
        issues.push(ConfigIssue { field: "grid".into(), message: e.to_string() });
    }

    let strike = |field: &str, v: &Option<serde_json::Number>, issues: &mut Vec<ConfigIssue>| match v {
        Some(n) => num_to_rat(n, field, issues),
        None => {
            issues.push(ConfigIssue { field: field.into(), message: "strike is required".into() });
            rat_int(0)
        }
    };
    let payoff = match raw.payoff.kind.as_str() {
        "call" => PayoffCfg::Call { strike: strike("payoff.strike", &raw.payoff.strike, &mut issues) },
        "put" => PayoffCfg::Put { strike: strike("payoff.strike", &raw.payoff.strike, &mut issues) },
        "asian" => PayoffCfg::Asian { strike: strike("payoff.strike", &raw.payoff.strike, &mut issues) },
        "lookback" => PayoffCfg::Lookback,
        "table" => {
            let path = raw.payoff.path.clone().unwrap_or_else(|| {
                issues.push(ConfigIssue {
                    field: "payoff.path".into(),
                    message: "table payoffs need a CSV path".into(),
                });
                String::new()
            });
            PayoffCfg::Table {
                path: PathBuf::from(path),
                nonnegative: raw.payoff.nonnegative.unwrap_or(false),
                modulus_slope: raw
                    .payoff
                    .modulus_slope
                    .as_ref()
                    .map(|n| num_to_rat(n, "payoff.modulus_slope", &mut issues)),
            }
        }
        other => {
            issues.push(ConfigIssue {
                field: "payoff.kind".into(),
                message: format!("unknown kind {other:?} (call|put|asian|lookback|table)"),
            });
            PayoffCfg::Lookback
        }
    };
    if !matches!(payoff, PayoffCfg::Table { .. }) {
        if raw.payoff.path.is_some() || raw.payoff.nonnegative.is_some() || raw.payoff.modulus_slope.is_some()
        {
            issues.push(ConfigIssue {
                field: "payoff".into(),
                message: "path/nonnegative/modulus_slope apply to table payoffs only".into(),
            });
        }
    }

    let mut epsilon = rat_int(0);
    let pricing = match &raw.pricing {
        None => None,
        Some(p) => {
            if let Some(e) = &p.epsilon {
                epsilon = num_to_rat(e, "pricing.epsilon", &mut issues);
                if epsilon < rat_int(0) {
                    issues.push(ConfigIssue {
                        field: "pricing.epsilon".into(),
                        message: "epsilon must be nonnegative".into(),
                    });
                }
            }
            match (&p.measures, &p.calls) {
                (Some(_), Some(_)) => {
                    issues.push(ConfigIssue {
                        field: "pricing".into(),
                        message: "give either measures or calls, not both".into(),
                    });
                    None
                }
                (Some(ms), None) => Some(PricingCfg::Measures(
                    ms.iter()
                        .enumerate()
                        .map(|(j, m)| {
                            m.iter()
                                .map(|w| num_to_rat(w, &format!("pricing.measures[{j}]"), &mut issues))
                                .collect()
                        })
                        .collect(),
                )),
                (None, Some(qs)) => Some(PricingCfg::Calls(
                    qs.iter()
                        .enumerate()
                        .map(|(i, q)| {
                            (
                                num_to_rat(&q.strike, &format!("pricing.calls[{i}].strike"), &mut issues),
                                num_to_rat(&q.bid, &format!("pricing.calls[{i}].bid"), &mut issues),
                                num_to_rat(&q.ask, &format!("pricing.calls[{i}].ask"), &mut issues),
                            )
                        })
                        .collect(),
                )),
                (None, None) => {
                    issues.push(ConfigIssue {
                        field: "pricing".into(),
                        message: "give measures or calls".into(),
                    });
                    None
                }
            }
        }
    };

    let mode = match raw.solver.mode.as_deref() {
        None | Some("float") => SolveMode::Float,
        Some("exact") => SolveMode::Exact,
        Some(other) => {
            issues.push(ConfigIssue {
                field: "solver.mode".into(),
                message: format!("unknown mode {other:?} (float|exact)"),
            });
            SolveMode::Float
        }
    };
    let tolerance = match &raw.solver.tolerance {
        None => 1e-9,
        Some(n) => {
            let t = n.as_f64().unwrap_or(f64::NAN);
            if !(t > 0.0 && t.is_finite()) {
                issues.push(ConfigIssue {
                    field: "solver.tolerance".into(),
                    message: "tolerance must be a positive number".into(),
                });
            }
            t
        }
    };
    let doob_r = match &raw.doob {
        None => 3.0,
        Some(d) => d.r.as_f64().unwrap_or(f64::NAN),
    };
    let doob_p = raw.doob.as_ref().and_then(|d| d.p.as_ref()).map(|n| n.as_f64().unwrap_or(f64::NAN));

    if let Some(cell) = &raw.cell {
        if cell.trim().is_empty() {
            issues.push(ConfigIssue { field: "cell".into(), message: "cell spec is empty".into() });
        }
    }

    let config = RunConfig {
        n: raw.grid.n,
        trunc: raw.grid.trunc,
        periods: raw.grid.periods,
        kappa,
        bound,
        payoff,
        pricing,
        epsilon,
        mode,
        tolerance,
        seed: raw.solver.seed.unwrap_or(0),
        enumeration_cap: raw.solver.enumeration_cap.unwrap_or(1_000_000) as u128,
        exact_nonzero_cap: raw.solver.exact_nonzero_cap.unwrap_or(crate::lp::DEFAULT_EXACT_NONZERO_CAP),
        pivot_cap: raw.solver.pivot_cap.unwrap_or(crate::lp::DEFAULT_PIVOT_CAP),
        out_dir: raw.output.dir.map(PathBuf::from),
        dump_lp: raw.output.dump_lp.map(PathBuf::from),
        doob_r,
        doob_p,
        cell: raw.cell,
    };
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(issues))
    }
}

impl RunConfig {
    /// Grid for hedging/duality commands, which enforce the standing
    /// assumption `kappa < 1/4`.
    pub fn grid_for_hedging(&self) -> Result<GridSpec, ConfigError> {
        let grid = self.grid_structural()?;
        grid.standing_kappa().map_err(|e| {
            ConfigError::Invalid(vec![ConfigIssue { field: "grid.kappa".into(), message: e.to_string() }])
        })?;
        Ok(grid)
    }

    /// Grid for the band feasibility probe, which accepts any
    /// `kappa` in `[0, 1)`.
    pub fn grid_for_band_probe(&self) -> Result<GridSpec, ConfigError> {
        self.grid_structural()
    }

    fn grid_structural(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::new(self.n, self.trunc, self.periods, self.kappa.clone(), self.bound.clone()).map_err(
            |e| ConfigError::Invalid(vec![ConfigIssue { field: "grid".into(), message: e.to_string() }]),
        )
    }

    /// Builds the payoff, loading table CSVs relative to `base_dir`.
    pub fn payoff_spec(&self, grid: &GridSpec, base_dir: &FsPath) -> Result<PayoffSpec, ConfigError> {
        let issue = |message: String| {
            ConfigError::Invalid(vec![ConfigIssue { field: "payoff".into(), message }])
        };
        match &self.payoff {
            PayoffCfg::Call { strike } => Ok(PayoffSpec::call(strike.clone())),
            PayoffCfg::Put { strike } => Ok(PayoffSpec::put(strike.clone())),
            PayoffCfg::Asian { strike } => Ok(PayoffSpec::asian(strike.clone())),
            PayoffCfg::Lookback => Ok(PayoffSpec::lookback()),
            PayoffCfg::Table { path, nonnegative, modulus_slope } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let text = std::fs::read_to_string(&full).map_err(|e| ConfigError::Unreadable {
                    path: full.display().to_string(),
                    message: e.to_string(),
                })?;
                let modulus = match modulus_slope {
                    Some(c) => Modulus::Slope(c.clone()),
                    None => Modulus::None,
                };
                crate::market::payoff_table_from_csv(&text, grid, *nonnegative, modulus)
                    .map_err(|e| issue(e.to_string()))
            }
        }
    }

    /// Builds the pricing model; errors when the config has no pricing
    /// block.
    pub fn pricing_model(&self, grid: &GridSpec) -> Result<PricingModel, ConfigError> {
        let issue = |field: &str, message: String| {
            ConfigError::Invalid(vec![ConfigIssue { field: field.into(), message }])
        };
        let cfg = self
            .pricing
            .as_ref()
            .ok_or_else(|| issue("pricing", "this command needs a pricing block".into()))?;
        let operator = match cfg {
            PricingCfg::Measures(ms) => PricingOperator::measure_set(ms.clone(), grid)
                .map_err(|e| issue("pricing.measures", e.to_string()))?,
            PricingCfg::Calls(qs) => PricingOperator::call_quotes(
                qs.iter()
                    .map(|(strike, bid, ask)| CallQuote {
                        strike: strike.clone(),
                        bid: bid.clone(),
                        ask: ask.clone(),
                    })
                    .collect(),
            )
            .map_err(|e| issue("pricing.calls", e.to_string()))?,
        };
        PricingModel::new(operator, self.epsilon.clone())
            .map_err(|e| issue("pricing.epsilon", e.to_string()))
    }

    /// Materializes the instance for hedging/duality commands.
    pub fn instance(&self, base_dir: &FsPath) -> Result<Instance, ConfigError> {
        let grid = self.grid_for_hedging()?;
        self.instance_on(grid, base_dir, true)
    }

    /// Materializes the instance for the band probe (relaxed kappa).
    pub fn probe_instance(&self, base_dir: &FsPath) -> Result<Instance, ConfigError> {
        let grid = self.grid_for_band_probe()?;
        self.instance_on(grid, base_dir, true)
    }

    /// Materializes the statics-free instance (no pricing block needed).
    pub fn constrained_instance(&self, base_dir: &FsPath) -> Result<Instance, ConfigError> {
        let grid = self.grid_for_hedging()?;
        self.instance_on(grid, base_dir, false)
    }

    fn instance_on(
        &self,
        grid: GridSpec,
        base_dir: &FsPath,
        with_pricing: bool,
    ) -> Result<Instance, ConfigError> {
        let payoff = self.payoff_spec(&grid, base_dir)?;
        let pricing = if with_pricing { Some(self.pricing_model(&grid)?) } else { None };
        Instance::with_cap(grid, payoff, pricing, self.enumeration_cap).map_err(|e| {
            ConfigError::Invalid(vec![ConfigIssue { field: "grid".into(), message: e.to_string() }])
        })
    }

    pub fn solve_options(&self) -> crate::lp::SolveOptions {
        crate::lp::SolveOptions {
            pivot_cap: self.pivot_cap,
            exact_nonzero_cap: self.exact_nonzero_cap,
        }
    }

    /// Canonical one-line rendering of the effective configuration with
    /// every default applied; echoed into report headers.
    pub fn effective_json(&self) -> String {
        let mut grid = BTreeMap::new();
        grid.insert("J", self.trunc.to_string());
        grid.insert("M", match &self.bound {
            TradeBound::Unbounded => "unbounded".to_string(),
            TradeBound::Finite(m) => rat_render(m),
        });
        grid.insert("N", self.periods.to_string());
        grid.insert("kappa", rat_render(&self.kappa));
        grid.insert("n", self.n.to_string());
        let payoff = match &self.payoff {
            PayoffCfg::Call { strike } => format!("call(strike={})", rat_render(strike)),
            PayoffCfg::Put { strike } => format!("put(strike={})", rat_render(strike)),
            PayoffCfg::Asian { strike } => format!("asian(strike={})", rat_render(strike)),
            PayoffCfg::Lookback => "lookback".to_string(),
            PayoffCfg::Table { path, .. } => format!("table({})", path.display()),
        };
        let pricing = match &self.pricing {
            None => "none".to_string(),
            Some(PricingCfg::Measures(ms)) => format!(
                "measures[{}]",
                ms.iter()
                    .map(|m| format!("({})", m.iter().map(rat_render).collect::<Vec<_>>().join(",")))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Some(PricingCfg::Calls(qs)) => format!(
                "calls[{}]",
                qs.iter()
                    .map(|(k, b, a)| format!("(K={},bid={},ask={})", rat_render(k), rat_render(b), rat_render(a)))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        };
        format!(
            "{{grid:{{J:{},M:{},N:{},kappa:{},n:{}}},payoff:{},pricing:{},epsilon:{},mode:{},tolerance:{},seed:{},enumeration_cap:{},exact_nonzero_cap:{},pivot_cap:{},doob_r:{}}}",
            grid["J"],
            grid["M"],
            grid["N"],
            grid["kappa"],
            grid["n"],
            payoff,
            pricing,
            rat_render(&self.epsilon),
            match self.mode {
                SolveMode::Float => "float",
                SolveMode::Exact => "exact",
            },
            self.tolerance,
            self.seed,
            self.enumeration_cap,
            self.exact_nonzero_cap,
            self.pivot_cap,
            self.doob_r,
        )
    }
}

/// Parses a cell spec like `"s1=2,s3=0.5"` into `(time, grid value)` pins.
pub fn parse_cell_spec(spec: &str) -> Result<Vec<(u32, Rat)>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("cell spec is empty".into());
    }
    spec.split(',')
        .map(|part| {
            let part = part.trim();
            let (lhs, rhs) = part
                .split_once('=')
                .ok_or_else(|| format!("{part:?} is not of the form s<k>=<value>"))?;
            let k: u32 = lhs
                .trim()
                .strip_prefix('s')
                .ok_or_else(|| format!("{lhs:?} should look like s1, s2, ..."))?
                .parse()
                .map_err(|_| format!("{lhs:?} has no valid time index"))?;
            if k == 0 {
                return Err("time 0 is fixed at the initial price".into());
            }
            let v = crate::scalar::rat_from_str(rhs.trim()).map_err(|e| e.to_string())?;
            Ok((k, v))
        })
        .collect()
}

/// Resolves cell pins to the set of matching path indices.
pub fn resolve_cell(pins: &[(u32, Rat)], inst: &Instance) -> Result<Vec<usize>, String> {
    for (k, _) in pins {
        if *k > inst.grid.periods() {
            return Err(format!("time s{k} exceeds the horizon N = {}", inst.grid.periods()));
        }
    }
    let matches: Vec<usize> = inst
        .paths
        .iter()
        .enumerate()
        .filter(|(_, path)| {
            pins.iter().all(|(k, v)| &inst.grid.value(path.indices()[*k as usize]) == v)
        })
        .map(|(i, _)| i)
        .collect();
    if matches.is_empty() {
        return Err("cell matches no enumerated path".into());
    }
    Ok(matches)
}
