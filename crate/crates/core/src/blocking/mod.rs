//! The cooperative game: block verification (Conditions 1–4), the six-case
//! classification of non-Bertrand allocations, and constructive blocks.

mod classify;
mod construct;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation};
use crate::scalar::Scalar;

pub use classify::{classify_non_bertrand, CaseHit};
pub use construct::construct_block;
pub(crate) use verify::level_conditions;
pub use verify::verify_block;

/// Which branch of the non-Bertrand case analysis produced a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseLabel {
    /// A firm pays more than productivity.
    Overpaid,
    /// Unemployment where a firm pays below productivity.
    UnderemployedUnderpaid,
    /// Unemployment where a firm pays exactly productivity.
    UnderemployedAtProductivity,
    /// A firm employs everyone at a level below productivity.
    MonopsonyUnderpay,
    /// A firm shares a level, paying at least the rival but below productivity.
    DuopsonyUnderpay,
    /// A firm pays productivity while the rival underpays part of the level.
    AsymmetricPoach,
    /// Found by exhaustive search rather than construction.
    OracleFound,
}

impl CaseLabel {
    pub const CONSTRUCTIVE: [CaseLabel; 6] = [
        CaseLabel::Overpaid,
        CaseLabel::UnderemployedUnderpaid,
        CaseLabel::UnderemployedAtProductivity,
        CaseLabel::MonopsonyUnderpay,
        CaseLabel::DuopsonyUnderpay,
        CaseLabel::AsymmetricPoach,
    ];

    /// Position in the case analysis, 1–6; 0 for oracle results.
    pub fn number(self) -> u8 {
        match self {
            CaseLabel::Overpaid => 1,
            CaseLabel::UnderemployedUnderpaid => 2,
            CaseLabel::UnderemployedAtProductivity => 3,
            CaseLabel::MonopsonyUnderpay => 4,
            CaseLabel::DuopsonyUnderpay => 5,
            CaseLabel::AsymmetricPoach => 6,
            CaseLabel::OracleFound => 0,
        }
    }

    pub fn from_number(n: u8) -> Option<CaseLabel> {
        CaseLabel::CONSTRUCTIVE.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::Overpaid => "overpaid",
            CaseLabel::UnderemployedUnderpaid => "underemployed-underpaid",
            CaseLabel::UnderemployedAtProductivity => "underemployed-at-productivity",
            CaseLabel::MonopsonyUnderpay => "monopsony-underpay",
            CaseLabel::DuopsonyUnderpay => "duopsony-underpay",
            CaseLabel::AsymmetricPoach => "asymmetric-poach",
            CaseLabel::OracleFound => "oracle-found",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four per-level conditions under which a firm's alternative is
/// feasible against the status quo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Wage weakly above own old wage and strictly above the rival's.
    OutbidAll,
    /// No wage cut, and new hires fit beside the rival's workers.
    BesideRival,
    /// Strictly above the rival's wage and new hires fit beside own old workers.
    PoachRival,
    /// New hires fit within the unemployed.
    FromUnemployed,
}

impl Condition {
    pub fn number(self) -> u8 {
        match self {
            Condition::OutbidAll => 1,
            Condition::BesideRival => 2,
            Condition::PoachRival => 3,
            Condition::FromUnemployed => 4,
        }
    }
}

/// A candidate alternative allocation for one firm.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProposal<S> {
    pub blocker: Firm,
    pub alternative: FirmAllocation<S>,
    pub case_label: CaseLabel,
    /// Levels whose case predicate motivated the construction.
    pub levels: Vec<usize>,
    /// Named construction parameters (`epsilon_prime`, `delta`, `p`, ...).
    pub parameters: BTreeMap<String, S>,
}

impl<S: Scalar> BlockProposal<S> {
    pub fn new(blocker: Firm, alternative: FirmAllocation<S>, case_label: CaseLabel) -> Self {
        Self {
            blocker,
            alternative,
            case_label,
            levels: Vec::new(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn parameter(&self, name: &str) -> Option<&S> {
        self.parameters.get(name)
    }
}

/// Result of checking a proposal against an allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVerdict<S> {
    /// Conditions satisfied at each level; an empty entry fails the block.
    pub per_level_condition: Vec<Vec<Condition>>,
    pub profit_before: S,
    pub profit_after: S,
    /// The alternative itself is a well-formed firm allocation.
    pub alternative_valid: bool,
    pub valid: bool,
}

impl<S: Scalar> BlockVerdict<S> {
    pub fn gain(&self) -> S {
        self.profit_after.clone() - self.profit_before.clone()
    }

    /// Levels where no condition holds.
    pub fn failing_levels(&self) -> Vec<usize> {
        self.per_level_condition
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_empty())
            .map(|(k, _)| k)
            .collect()
    }
}

/// Tunables for the constructive cases.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockConfig<S> {
    /// Classification tolerance: relative on masses, absolute on wages.
    pub tol: S,
    /// Upper bound on the wage increment ε′; `None` starts at half the slack.
    pub epsilon_cap: Option<S>,
    /// Maximum number of times ε′ is halved before a case gives up.
    pub max_halvings: u32,
}

impl<S: Scalar> BlockConfig<S> {
    pub fn new(tol: S) -> Self {
        Self {
            tol,
            epsilon_cap: None,
            max_halvings: 40,
        }
    }

    pub fn with_epsilon_cap(mut self, cap: S) -> Self {
        self.epsilon_cap = Some(cap);
        self
    }

    pub fn convert<T: Scalar>(&self) -> BlockConfig<T> {
        BlockConfig {
            tol: crate::scalar::convert(&self.tol),
            epsilon_cap: self.epsilon_cap.as_ref().map(crate::scalar::convert),
            max_halvings: self.max_halvings,
        }
    }
}

impl<S: Scalar> Default for BlockConfig<S> {
    fn default() -> Self {
        Self::new(if S::EXACT {
            S::zero()
        } else {
            S::ratio(1, 1_000_000_000)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("case {case} construction for {firm} found no profitable alternative")]
    ConstructionFailed { case: CaseLabel, firm: Firm },
    #[error("case {case} predicate does not hold for {firm} on the given levels")]
    PredicateFails { case: CaseLabel, firm: Firm },
}

/// Classifies the allocation and returns the first verified constructive
/// block in case order, or `None` when the allocation is Bertrand.
///
/// A case whose construction fails is skipped in favour of later cases; an
/// error is returned only when every applicable case fails.
pub fn find_block<S: Scalar>(
    alloc: &Allocation<S>,
    pop: &MarketPopulation<S>,
    cfg: &BlockConfig<S>,
) -> Result<Option<BlockProposal<S>>, BlockError> {
    let hits = classify_non_bertrand(alloc, pop, &cfg.tol);
    let mut last_err = None;
    for hit in &hits {
        match construct_block(alloc, hit, pop, cfg) {
            Ok(p) => {
                if verify_block(alloc, &p, pop).valid {
                    return Ok(Some(p));
                }
                last_err = Some(BlockError::ConstructionFailed {
                    case: hit.case,
                    firm: hit.firm,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    match last_err {
        Some(e) => Err(e),
        None => Ok(None),
    }
}

/// Like [`find_block`] but restricted to one case.
pub fn find_block_in_case<S: Scalar>(
    alloc: &Allocation<S>,
    pop: &MarketPopulation<S>,
    cfg: &BlockConfig<S>,
    case: CaseLabel,
) -> Result<Option<BlockProposal<S>>, BlockError> {
    let hits: Vec<_> = classify_non_bertrand(alloc, pop, &cfg.tol)
        .into_iter()
        .filter(|h| h.case == case)
        .collect();
    let mut last_err = None;
    for hit in &hits {
        match construct_block(alloc, hit, pop, cfg) {
            Ok(p) if verify_block(alloc, &p, pop).valid => return Ok(Some(p)),
            Ok(_) => last_err = Some(BlockError::ConstructionFailed { case, firm: hit.firm }),
            Err(e) => last_err = Some(e),
        }
    }
    match last_err {
        Some(e) => Err(e),
        None => Ok(None),
    }
}
