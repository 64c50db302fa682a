//! TOML scenario files.
//!
//! ```toml
//! version = 1
//! numeric = "exact"            # or "float"; default "exact"
//!
//! [population]
//! levels = ["1/4", "1/2"]      # strings ("3/4", "0.25") or TOML numbers
//! masses = [0.5, 0.5]
//!
//! [[allocation.firm1]]         # one entry per hired level; others vacant
//! level = "1/2"
//! wage = "1/2"
//! intervals = [["0", "1/2"]]
//!
//! [[menu.firm2]]               # same shape; unlisted levels get no offer
//! level = "1/4"
//! wage = "1/4"
//! intervals = [[0, 1]]
//!
//! [policy]                     # optional
//! theta = "1/2"
//! accept_at_reservation = true
//! ```
//!
//! Unknown keys are rejected. Allocations and menus are read as written and
//! not checked for monotonicity, so that invalid inputs can be diagnosed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::choice::TiePolicy;
use crate::error::ModelError;
use crate::index_set::IndexSet;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation, Offer, OfferMenu, OfferProfile, Position};
use crate::scalar::{Exact, NumericMode, Scalar};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Syntax(String),
    #[error("unsupported scenario version {0} (expected {SCENARIO_VERSION})")]
    Version(u32),
    #[error("{field}: cannot read number {text:?}")]
    Number { field: String, text: String },
    #[error("{0} lists level {1} twice")]
    DuplicateSlot(String, String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn read<S: Scalar>(&self, field: &str) -> Result<S, ScenarioError> {
        let bad = |text: String| ScenarioError::Number {
            field: field.to_string(),
            text,
        };
        match self {
            Number::Int(i) => Ok(S::ratio(*i, 1)),
            Number::Float(x) => S::from_f64(*x).ok_or_else(|| bad(x.to_string())),
            Number::Text(t) => S::parse(t).ok_or_else(|| bad(t.clone())),
        }
    }

    fn write<S: Scalar>(x: &S) -> Number {
        if S::EXACT {
            Number::Text(x.render())
        } else {
            Number::Float(x.to_f64())
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u32,
    #[serde(default)]
    numeric: NumericMode,
    population: RawPopulation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allocation: Option<RawFirms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    menu: Option<RawFirms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    policy: Option<RawPolicy>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPopulation {
    levels: Vec<Number>,
    masses: Vec<Number>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFirms {
    #[serde(default)]
    firm1: Vec<RawSlot>,
    #[serde(default)]
    firm2: Vec<RawSlot>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlot {
    level: Number,
    wage: Number,
    intervals: Vec<[Number; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<Number>,
    #[serde(default = "yes")]
    accept_at_reservation: bool,
}

fn yes() -> bool {
    true
}

/// A parsed scenario in one numeric backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    pub numeric: NumericMode,
    pub population: MarketPopulation<S>,
    pub allocation: Option<Allocation<S>>,
    /// Raw per-level offers for each firm, not yet checked for monotonicity.
    pub menus: Option<[Vec<Offer<S>>; 2]>,
    pub policy: TiePolicy<S>,
}

/// A scenario in the backend its `numeric` field asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyScenario {
    Exact(Scenario<Exact>),
    Float(Scenario<f64>),
}

/// Parses a scenario into the backend named by its `numeric` field.
pub fn parse_scenario(text: &str) -> Result<AnyScenario, ScenarioError> {
    let raw = read_raw(text)?;
    Ok(match raw.numeric {
        NumericMode::Exact => AnyScenario::Exact(Scenario::from_raw(&raw)?),
        NumericMode::Float => AnyScenario::Float(Scenario::from_raw(&raw)?),
    })
}

fn read_raw(text: &str) -> Result<RawScenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
    if raw.version != SCENARIO_VERSION {
        return Err(ScenarioError::Version(raw.version));
    }
    Ok(raw)
}

impl<S: Scalar> Scenario<S> {
    /// Parses into backend `S` regardless of the file's `numeric` field.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Self::from_raw(&read_raw(text)?)
    }

    pub fn new(population: MarketPopulation<S>) -> Self {
        Self {
            numeric: if S::EXACT {
                NumericMode::Exact
            } else {
                NumericMode::Float
            },
            population,
            allocation: None,
            menus: None,
            policy: TiePolicy::default(),
        }
    }

    pub fn with_allocation(mut self, alloc: Allocation<S>) -> Self {
        self.allocation = Some(alloc);
        self
    }

    pub fn with_profile(mut self, profile: &OfferProfile<S>) -> Self {
        self.menus = Some(Firm::BOTH.map(|f| profile.menu(f).slots().to_vec()));
        self
    }

    fn from_raw(raw: &RawScenario) -> Result<Self, ScenarioError> {
        let levels = numbers(&raw.population.levels, "population.levels")?;
        let masses = numbers(&raw.population.masses, "population.masses")?;
        let population = MarketPopulation::new(levels, masses)?;

        let allocation = match &raw.allocation {
            Some(firms) => {
                let [a, b] = [("allocation.firm1", &firms.firm1), ("allocation.firm2", &firms.firm2)]
                    .map(|(name, slots)| read_slots(name, slots, &population));
                let to_alloc = |v: Vec<(IndexSet<S>, S)>| {
                    FirmAllocation::from_slots(v.into_iter().map(|(h, w)| Position::new(h, w)).collect())
                };
                Some(Allocation::new(to_alloc(a?), to_alloc(b?)))
            }
            None => None,
        };

        let menus = match &raw.menu {
            Some(firms) => {
                let [a, b] = [("menu.firm1", &firms.firm1), ("menu.firm2", &firms.firm2)]
                    .map(|(name, slots)| read_slots(name, slots, &population));
                let to_offers = |v: Vec<(IndexSet<S>, S)>| -> Vec<Offer<S>> {
                    v.into_iter().map(|(offered, wage)| Offer { offered, wage }).collect()
                };
                Some([to_offers(a?), to_offers(b?)])
            }
            None => None,
        };

        let policy = match &raw.policy {
            Some(p) => {
                let theta = match &p.theta {
                    Some(t) => t.read("policy.theta")?,
                    None => S::ratio(1, 2),
                };
                TiePolicy::new(theta, p.accept_at_reservation)?
            }
            None => TiePolicy::default(),
        };

        Ok(Self {
            numeric: raw.numeric,
            population,
            allocation,
            menus,
            policy,
        })
    }

    /// The menus as an offer profile; fails when a menu is not monotone.
    pub fn profile(&self) -> Option<Result<OfferProfile<S>, ModelError>> {
        let [a, b] = self.menus.as_ref()?;
        Some((|| {
            Ok(OfferProfile::new(
                OfferMenu::new(a.clone())?,
                OfferMenu::new(b.clone())?,
            ))
        })())
    }

    /// Levels where a firm's menu posts a wage below an active lower level.
    pub fn menu_violations(&self) -> Vec<(Firm, usize)> {
        let mut out = Vec::new();
        let Some(menus) = &self.menus else {
            return out;
        };
        for firm in Firm::BOTH {
            let mut floor: Option<&S> = None;
            for (k, o) in menus[firm.index()].iter().enumerate() {
                if !o.is_active() {
                    continue;
                }
                if o.wage < S::zero() || floor.is_some_and(|f| o.wage < *f) {
                    out.push((firm, k));
                }
                if floor.is_none_or(|f| o.wage > *f) {
                    floor = Some(&o.wage);
                }
            }
        }
        out
    }

    /// Serializes to the TOML schema; [`Scenario::parse`] reads it back
    /// identically.
    pub fn to_toml(&self) -> String {
        let pop = &self.population;
        let slots_of = |pairs: Vec<(&IndexSet<S>, &S)>| -> Vec<RawSlot> {
            pairs
                .into_iter()
                .enumerate()
                .filter(|(_, (set, wage))| !set.is_empty() || !wage.is_zero())
                .map(|(k, (set, wage))| RawSlot {
                    level: Number::write(pop.level(k)),
                    wage: Number::write(wage),
                    intervals: set
                        .to_pairs()
                        .iter()
                        .map(|(a, b)| [Number::write(a), Number::write(b)])
                        .collect(),
                })
                .collect()
        };
        let allocation = self.allocation.as_ref().map(|a| {
            let [firm1, firm2] =
                Firm::BOTH.map(|f| slots_of(a.firm(f).slots().iter().map(|p| (&p.hired, &p.wage)).collect()));
            RawFirms { firm1, firm2 }
        });
        let menu = self.menus.as_ref().map(|m| {
            let [firm1, firm2] =
                Firm::BOTH.map(|f| slots_of(m[f.index()].iter().map(|o| (&o.offered, &o.wage)).collect()));
            RawFirms { firm1, firm2 }
        });
        let raw = RawScenario {
            version: SCENARIO_VERSION,
            numeric: self.numeric,
            population: RawPopulation {
                levels: pop.levels().iter().map(Number::write).collect(),
                masses: pop.masses().iter().map(Number::write).collect(),
            },
            allocation,
            menu,
            policy: Some(RawPolicy {
                theta: Some(Number::write(self.policy.theta())),
                accept_at_reservation: self.policy.accept_at_reservation,
            }),
        };
        toml::to_string(&raw).expect("scenario serializes")
    }
}

fn numbers<S: Scalar>(xs: &[Number], field: &str) -> Result<Vec<S>, ScenarioError> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| x.read(&format!("{field}[{i}]")))
        .collect()
}

/// Dense per-level `(set, wage)` pairs from a sparse slot list.
fn read_slots<S: Scalar>(
    name: &str,
    slots: &[RawSlot],
    pop: &MarketPopulation<S>,
) -> Result<Vec<(IndexSet<S>, S)>, ScenarioError> {
    let mut out: Vec<Option<(IndexSet<S>, S)>> = vec![None; pop.len()];
    for (i, slot) in slots.iter().enumerate() {
        let field = format!("{name}[{i}]");
        let level: S = slot.level.read(&format!("{field}.level"))?;
        let k = pop
            .index_of(&level)
            .ok_or_else(|| ModelError::UnknownLevel(level.render()))?;
        if out[k].is_some() {
            return Err(ScenarioError::DuplicateSlot(name.to_string(), level.render()));
        }
        let wage: S = slot.wage.read(&format!("{field}.wage"))?;
        if !wage.is_finite() {
            return Err(ModelError::InvalidWage(wage.render()).into());
        }
        let pairs = slot
            .intervals
            .iter()
            .map(|[a, b]| {
                Ok((
                    a.read(&format!("{field}.intervals"))?,
                    b.read(&format!("{field}.intervals"))?,
                ))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        out[k] = Some((IndexSet::from_pairs(pairs)?, wage));
    }
    Ok(out
        .into_iter()
        .map(|s| s.unwrap_or_else(|| (IndexSet::empty(), S::zero())))
        .collect())
}
