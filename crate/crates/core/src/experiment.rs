//! Seeded batches of random markets: block completeness on sampled
//! allocations and equilibrium checks on sampled offer profiles.
//!
//! ```toml
//! version = 1
//! seed = 7
//! trials = 1000
//! numeric = "mixed"        # exact | float | mixed (alternating by trial id)
//! masses = "random"        # random (k/8) | uniform (1/n)
//! sampler = "mixed"        # bertrand | near-bertrand | scrambled | mixed
//!
//! [levels]
//! min = 2
//! max = 16
//!
//! [tolerances]
//! tol = 1e-9
//! eta = 1e-6
//! epsilon_cap = 0.05       # optional
//!
//! [output]                 # optional; the CLI can override
//! rows = "rows.csv"
//! summary = "summary.json"
//! ```
//!
//! Trial `t` draws everything from [`trial_rng`]`(seed, t)`, so a row depends
//! only on the config and its id. Trials run on the rayon pool.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocking::{classify_non_bertrand, find_block, verify_block, BlockConfig};
use crate::equilibrium::{verify_equilibrium, BestResponseParams};
use crate::market::{Allocation, Firm, MarketPopulation, OfferMenu, OfferProfile};
use crate::payoff::is_bertrand;
use crate::sample::{random_allocation, random_kind, random_menu, random_population, trial_rng, AllocationKind};
use crate::scalar::{self, Exact, Scalar};

pub const EXPERIMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericChoice {
    Exact,
    Float,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassSpec {
    Random,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerSpec {
    Bertrand,
    NearBertrand,
    Scrambled,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tol: f64,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_cap: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    pub trials: u64,
    #[serde(default = "mixed_numeric")]
    pub numeric: NumericChoice,
    pub levels: LevelRange,
    #[serde(default = "random_masses")]
    pub masses: MassSpec,
    #[serde(default = "mixed_sampler")]
    pub sampler: SamplerSpec,
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Outputs,
}

fn mixed_numeric() -> NumericChoice {
    NumericChoice::Mixed
}

fn random_masses() -> MassSpec {
    MassSpec::Random
}

fn mixed_sampler() -> SamplerSpec {
    SamplerSpec::Mixed
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed experiment config: {0}")]
    Syntax(String),
    #[error("unsupported experiment config version {0} (expected {EXPERIMENT_VERSION})")]
    Version(u32),
    #[error("trials must be positive")]
    NoTrials,
    #[error("{0} must be positive and finite")]
    Tolerance(&'static str),
    #[error("level range {min}..={max} must lie within 1..=32")]
    Levels { min: usize, max: usize },
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The defaults used by the acceptance suite: `n` in 2..=16, mixed
    /// backends and samplers, `tol = 1e-9`, `η = 1e-6`.
    pub fn standard(seed: u64, trials: u64) -> Self {
        Self {
            version: EXPERIMENT_VERSION,
            seed,
            trials,
            numeric: NumericChoice::Mixed,
            levels: LevelRange { min: 2, max: 16 },
            masses: MassSpec::Random,
            sampler: SamplerSpec::Mixed,
            tolerances: Tolerances {
                tol: 1e-9,
                eta: 1e-6,
                epsilon_cap: None,
            },
            output: Outputs::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != EXPERIMENT_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tolerances.tol) {
            return Err(ConfigError::Tolerance("tol"));
        }
        if !positive(self.tolerances.eta) {
            return Err(ConfigError::Tolerance("eta"));
        }
        if self.tolerances.epsilon_cap.is_some_and(|c| !positive(c)) {
            return Err(ConfigError::Tolerance("epsilon_cap"));
        }
        let LevelRange { min, max } = self.levels;
        if min == 0 || min > max || max > 32 {
            return Err(ConfigError::Levels { min, max });
        }
        Ok(())
    }
}

/// Which offer profile a trial checks for equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// Each firm offers exactly its hired workers their paid wage.
    FromAllocation,
    /// Both firms offer every worker her productivity.
    Canonical,
    /// Two independent random monotone menus.
    Random,
}

/// One trial's outcome. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: u64,
    pub numeric: &'static str,
    pub n: usize,
    pub sampler: &'static str,
    pub bertrand: bool,
    /// Case numbers whose predicates hold, `;`-separated.
    pub cases: String,
    pub block_found: bool,
    pub block_case: String,
    pub block_verified: bool,
    pub block_gain: f64,
    /// Block found and verified exactly when the allocation is not Bertrand.
    pub outcome_ok: bool,
    pub error: String,
    pub profile: ProfileKind,
    pub is_equilibrium: bool,
    pub profit1: f64,
    pub profit2: f64,
    pub max_deviation_gain: f64,
    /// Equilibrium profits lie in `[-1e-9, η · total mass]`.
    pub zero_profit_ok: bool,
    /// Distance of an equilibrium profit outside that band; 0 otherwise.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub seed: u64,
    pub trials: u64,
    pub bertrand: u64,
    pub non_bertrand: u64,
    pub block_found_on_non_bertrand: u64,
    pub no_block_on_bertrand: u64,
    /// Share of non-Bertrand allocations with a verified block.
    pub block_rate: f64,
    /// Trials whose outcome contradicts the Bertrand test.
    pub failures: Vec<u64>,
    /// Trials in which each case predicate held.
    pub case_hits: BTreeMap<String, u64>,
    /// Which case produced the returned block.
    pub block_cases: BTreeMap<String, u64>,
    pub equilibria: u64,
    pub zero_profit_violations: u64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRow>,
    pub summary: ExperimentSummary,
}

/// Runs every trial and summarizes; rows are ordered by trial id.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    cfg.validate()?;
    let mut rows: Vec<TrialRow> = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect();
    rows.sort_by_key(|r| r.trial);
    let summary = summarize(cfg, &rows);
    Ok(ExperimentReport { rows, summary })
}

struct Draw {
    n: usize,
    kind: AllocationKind,
    pop: MarketPopulation<Exact>,
    alloc: Allocation<Exact>,
    profile_kind: ProfileKind,
    menus: [OfferMenu<Exact>; 2],
}

fn draw(cfg: &ExperimentConfig, trial: u64) -> Draw {
    let mut rng = trial_rng(cfg.seed, trial);
    let n = rng.gen_range(cfg.levels.min..=cfg.levels.max);
    let mut pop = random_population(&mut rng, n);
    if cfg.masses == MassSpec::Uniform {
        pop = MarketPopulation::new(pop.levels().to_vec(), vec![Exact::ratio(1, n as i64); n])
            .expect("uniform masses are valid");
    }
    let drawn = random_kind(&mut rng);
    let kind = match cfg.sampler {
        SamplerSpec::Bertrand => AllocationKind::Bertrand,
        SamplerSpec::NearBertrand => AllocationKind::NearBertrand,
        SamplerSpec::Scrambled => AllocationKind::Scrambled,
        SamplerSpec::Mixed => drawn,
    };
    let alloc = random_allocation(&mut rng, &pop, kind);
    let profile_kind = match rng.gen_range(0..3) {
        0 => ProfileKind::FromAllocation,
        1 => ProfileKind::Canonical,
        _ => ProfileKind::Random,
    };
    let menus = [random_menu(&mut rng, &pop), random_menu(&mut rng, &pop)];
    Draw {
        n,
        kind,
        pop,
        alloc,
        profile_kind,
        menus,
    }
}

/// Runs a single trial; identical to the corresponding row of
/// [`run_experiment`].
pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> TrialRow {
    let d = draw(cfg, trial);
    let exact = match cfg.numeric {
        NumericChoice::Exact => true,
        NumericChoice::Float => false,
        NumericChoice::Mixed => trial.is_multiple_of(2),
    };
    if exact {
        evaluate::<Exact>(cfg, trial, &d)
    } else {
        evaluate::<f64>(cfg, trial, &d)
    }
}

fn sampler_name(kind: AllocationKind) -> &'static str {
    match kind {
        AllocationKind::Bertrand => "bertrand",
        AllocationKind::NearBertrand => "near-bertrand",
        AllocationKind::Scrambled => "scrambled",
    }
}

fn evaluate<S: Scalar>(cfg: &ExperimentConfig, trial: u64, d: &Draw) -> TrialRow {
    let from = |x: f64| S::from_f64(x).expect("validated tolerance");
    let tol = from(cfg.tolerances.tol);
    let eta = from(cfg.tolerances.eta);
    let pop: MarketPopulation<S> = d.pop.convert();
    let alloc: Allocation<S> = d.alloc.convert();

    let bertrand = is_bertrand(&alloc, &pop, &tol).holds();
    let mut cases: Vec<u8> = classify_non_bertrand(&alloc, &pop, &tol)
        .iter()
        .map(|h| h.case.number())
        .collect();
    cases.dedup();
    let mut block_cfg = BlockConfig::new(tol.clone());
    if let Some(cap) = cfg.tolerances.epsilon_cap {
        block_cfg = block_cfg.with_epsilon_cap(from(cap));
    }
    let (block_found, block_case, block_verified, block_gain, error) = match find_block(&alloc, &pop, &block_cfg) {
        Ok(Some(p)) => {
            let v = verify_block(&alloc, &p, &pop);
            (
                true,
                p.case_label.name().to_string(),
                v.valid,
                v.gain().to_f64(),
                String::new(),
            )
        }
        Ok(None) => (false, String::new(), false, 0.0, String::new()),
        Err(e) => (false, String::new(), false, 0.0, e.to_string()),
    };
    let outcome_ok = if bertrand {
        !block_found
    } else {
        block_found && block_verified
    };

    let profile: OfferProfile<S> = match d.profile_kind {
        ProfileKind::FromAllocation => OfferProfile::from_allocation(&alloc).expect("sampled allocations are monotone"),
        ProfileKind::Canonical => OfferProfile::canonical_bertrand(&pop),
        ProfileKind::Random => OfferProfile::new(d.menus[0].convert(), d.menus[1].convert()),
    };
    let params = BestResponseParams::new(eta.clone()).expect("validated eta");
    let report = verify_equilibrium(&profile, &pop, &params, &tol).expect("profiles are aligned and monotone");
    let [p1, p2] = Firm::BOTH.map(|f| report.firm(f).current_profit.clone());
    let upper = eta * pop.total_mass().clone();
    let lower = -S::ratio(1, 1_000_000_000);
    let violation = if report.is_equilibrium {
        [&p1, &p2]
            .into_iter()
            .map(|p| {
                scalar::max(
                    S::zero(),
                    scalar::max(p.clone() - upper.clone(), lower.clone() - p.clone()),
                )
            })
            .fold(S::zero(), scalar::max)
    } else {
        S::zero()
    };

    TrialRow {
        trial,
        numeric: if S::EXACT { "exact" } else { "float" },
        n: d.n,
        sampler: sampler_name(d.kind),
        bertrand,
        cases: cases.iter().map(u8::to_string).collect::<Vec<_>>().join(";"),
        block_found,
        block_case,
        block_verified,
        block_gain,
        outcome_ok,
        error,
        profile: d.profile_kind,
        is_equilibrium: report.is_equilibrium,
        profit1: p1.to_f64(),
        profit2: p2.to_f64(),
        max_deviation_gain: report.max_gain().to_f64(),
        zero_profit_ok: violation.is_zero(),
        violation: violation.to_f64(),
    }
}

fn summarize(cfg: &ExperimentConfig, rows: &[TrialRow]) -> ExperimentSummary {
    let count = |f: &dyn Fn(&TrialRow) -> bool| rows.iter().filter(|r| f(r)).count() as u64;
    let bertrand = count(&|r| r.bertrand);
    let non_bertrand = rows.len() as u64 - bertrand;
    let block_found_on_non_bertrand = count(&|r| !r.bertrand && r.block_found && r.block_verified);
    let mut case_hits = BTreeMap::new();
    let mut block_cases = BTreeMap::new();
    for r in rows {
        for c in r.cases.split(';').filter(|c| !c.is_empty()) {
            let name = c
                .parse()
                .ok()
                .and_then(crate::blocking::CaseLabel::from_number)
                .map_or(c.to_string(), |l| l.name().to_string());
            *case_hits.entry(name).or_insert(0) += 1;
        }
        if r.block_found {
            *block_cases.entry(r.block_case.clone()).or_insert(0) += 1;
        }
    }
    ExperimentSummary {
        seed: cfg.seed,
        trials: rows.len() as u64,
        bertrand,
        non_bertrand,
        block_found_on_non_bertrand,
        no_block_on_bertrand: count(&|r| r.bertrand && !r.block_found),
        block_rate: if non_bertrand == 0 {
            1.0
        } else {
            block_found_on_non_bertrand as f64 / non_bertrand as f64
        },
        failures: rows.iter().filter(|r| !r.outcome_ok).map(|r| r.trial).collect(),
        case_hits,
        block_cases,
        equilibria: count(&|r| r.is_equilibrium),
        zero_profit_violations: count(&|r| !r.zero_profit_ok),
        max_violation: rows.iter().map(|r| r.violation).fold(0.0, f64::max),
    }
}
