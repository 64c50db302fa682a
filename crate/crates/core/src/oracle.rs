//! Exhaustive search on small instances: block existence, core membership
//! and best responses over a finite lattice of wages and hiring fractions.
//!
//! Enumeration is depth-first in lexicographic order (levels ascending;
//! within a level "no hire" first, then wages ascending, then fractions
//! ascending), so the first hit is deterministic. Subtrees are pruned only
//! when they provably contain no hit, which preserves that order.

use thiserror::Error;

use crate::blocking::{level_conditions, verify_block, BlockProposal, CaseLabel};
use crate::choice::{hired_at_level, TiePolicy};
use crate::index_set::IndexSet;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation, Offer, OfferMenu, OfferProfile};
use crate::payoff::total_profit;
use crate::scalar::{self, exceeds, Scalar};

/// Default bound on the raw number of enumerated assignments.
pub const DEFAULT_CAP: u128 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {size} assignments exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("lattice has {found} levels, population has {expected}")]
    LevelMismatch { expected: usize, found: usize },
}

/// Finite action space explored by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchLattice<S> {
    /// Sorted, distinct candidate wages for each level.
    pub wage_candidates: Vec<Vec<S>>,
    /// Sorted, distinct hired fractions in `[0, 1]`; zero means "no hire".
    pub mass_fractions: Vec<S>,
    pub cap: u128,
}

fn sorted_unique<S: Scalar>(mut xs: Vec<S>) -> Vec<S> {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite candidates"));
    xs.dedup();
    xs
}

impl<S: Scalar> SearchLattice<S> {
    /// The same wage list at each of `levels` levels.
    pub fn uniform(levels: usize, wages: Vec<S>, fractions: Vec<S>) -> Self {
        let wages = sorted_unique(wages);
        Self {
            wage_candidates: vec![wages; levels],
            mass_fractions: sorted_unique(fractions),
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap.max(1);
        self
    }

    /// `{0}` ∪ wages paid in `alloc` ∪ those plus `eta` ∪ grid levels, with
    /// fractions `{0, 1/2, 1}`.
    pub fn for_allocation(alloc: &Allocation<S>, pop: &MarketPopulation<S>, eta: &S) -> Self {
        let mut wages = vec![S::zero()];
        for firm in Firm::BOTH {
            let fa = alloc.firm(firm);
            for k in 0..fa.len() {
                if fa.is_employed(k) {
                    wages.push(fa.wage(k).clone());
                    wages.push(fa.wage(k).clone() + eta.clone());
                }
            }
        }
        wages.extend(pop.levels().iter().cloned());
        Self::uniform(pop.len(), wages, default_fractions())
    }

    /// `{0}` ∪ rival's active wages ∪ those plus `eta` ∪ grid levels.
    pub fn for_rival_menu(rival: &OfferMenu<S>, pop: &MarketPopulation<S>, eta: &S) -> Self {
        Self::uniform(pop.len(), wage_ladder(rival, pop, eta), default_fractions())
    }

    fn positive_fractions(&self) -> Vec<S> {
        self.mass_fractions
            .iter()
            .filter(|f| **f > S::zero())
            .cloned()
            .collect()
    }

    /// Assignments per firm for block search.
    pub fn proposal_count(&self) -> u128 {
        let nf = self.positive_fractions().len() as u128;
        self.wage_candidates
            .iter()
            .fold(1u128, |acc, w| acc.saturating_mul(1 + w.len() as u128 * nf))
    }

    /// Wage assignments for best-response search.
    pub fn menu_count(&self) -> u128 {
        self.wage_candidates
            .iter()
            .fold(1u128, |acc, w| acc.saturating_mul(1 + w.len() as u128))
    }

    fn check(&self, pop: &MarketPopulation<S>, size: u128) -> Result<(), OracleError> {
        if self.wage_candidates.len() != pop.len() {
            return Err(OracleError::LevelMismatch {
                expected: pop.len(),
                found: self.wage_candidates.len(),
            });
        }
        if size > self.cap {
            return Err(OracleError::CapExceeded { size, cap: self.cap });
        }
        Ok(())
    }
}

fn default_fractions<S: Scalar>() -> Vec<S> {
    vec![S::zero(), S::ratio(1, 2), S::one()]
}

/// The candidate wage ladder shared by the oracle and the dynamic program.
pub fn wage_ladder<S: Scalar>(rival: &OfferMenu<S>, pop: &MarketPopulation<S>, eta: &S) -> Vec<S> {
    let mut wages = vec![S::zero()];
    for offer in rival.slots() {
        if offer.is_active() {
            wages.push(offer.wage.clone());
            wages.push(offer.wage.clone() + eta.clone());
        }
    }
    wages.extend(pop.levels().iter().cloned());
    sorted_unique(wages)
}

/// One option at one level: `None` wage means no hire.
struct Choice<S> {
    wage: Option<S>,
    fraction: S,
    value: S,
}

trait Visitor<S> {
    /// False when no completion of this prefix can be a hit.
    fn viable(&self, _level: usize, _partial: &S) -> bool {
        true
    }
    /// Called on each complete assignment; returning true stops the search.
    fn leaf(&mut self, picks: &[usize], total: &S) -> bool;
}

/// Depth-first enumeration of monotone assignments.
fn search<S: Scalar, V: Visitor<S>>(table: &[Vec<Choice<S>>], visitor: &mut V) {
    fn go<S: Scalar, V: Visitor<S>>(
        table: &[Vec<Choice<S>>],
        k: usize,
        floor: Option<&S>,
        partial: &S,
        picks: &mut Vec<usize>,
        visitor: &mut V,
    ) -> bool {
        if !visitor.viable(k, partial) {
            return false;
        }
        if k == table.len() {
            return visitor.leaf(picks, partial);
        }
        for (i, c) in table[k].iter().enumerate() {
            if let (Some(w), Some(f)) = (&c.wage, floor) {
                if w < f {
                    continue;
                }
            }
            let next_floor = c.wage.as_ref().or(floor);
            picks.push(i);
            let stop = go(
                table,
                k + 1,
                next_floor,
                &(partial.clone() + c.value.clone()),
                picks,
                visitor,
            );
            picks.pop();
            if stop {
                return true;
            }
        }
        false
    }
    let mut picks = Vec::with_capacity(table.len());
    go(table, 0, None, &S::zero(), &mut picks, visitor);
}

/// Best achievable value from each level onward, ignoring monotonicity.
fn optimistic_tail<S: Scalar>(table: &[Vec<Choice<S>>]) -> Vec<S> {
    let mut tail = vec![S::zero(); table.len() + 1];
    for k in (0..table.len()).rev() {
        let best = table[k].iter().map(|c| c.value.clone()).fold(S::zero(), scalar::max);
        tail[k] = tail[k + 1].clone() + best;
    }
    tail
}

fn proposal_options<S: Scalar>(
    alloc: &Allocation<S>,
    pop: &MarketPopulation<S>,
    lattice: &SearchLattice<S>,
    j: Firm,
    feasible_only: bool,
) -> Vec<Vec<Choice<S>>> {
    let fractions = lattice.positive_fractions();
    (0..pop.len())
        .map(|k| {
            let mut opts = vec![Choice {
                wage: None,
                fraction: S::zero(),
                value: S::zero(),
            }];
            let v = pop.level(k).clone();
            for w in &lattice.wage_candidates[k] {
                for phi in &fractions {
                    let mass = phi.clone() * pop.mass(k).clone();
                    if feasible_only && level_conditions(alloc, j, pop, k, &mass, w).is_empty() {
                        continue;
                    }
                    opts.push(Choice {
                        wage: Some(w.clone()),
                        fraction: phi.clone(),
                        value: (v.clone() - w.clone()) * mass,
                    });
                }
            }
            opts
        })
        .collect()
}

fn realize<S: Scalar>(table: &[Vec<Choice<S>>], picks: &[usize]) -> FirmAllocation<S> {
    let mut fa = FirmAllocation::vacant(table.len());
    for (k, &i) in picks.iter().enumerate() {
        let c = &table[k][i];
        if let Some(w) = &c.wage {
            let set = IndexSet::interval(S::zero(), c.fraction.clone()).expect("fraction within [0, 1]");
            if !set.is_empty() {
                fa.set(k, set, w.clone());
            }
        }
    }
    fa
}

struct FirstBlock<'a, S> {
    tail: &'a [S],
    before: S,
    hit: Option<Vec<usize>>,
}

impl<S: Scalar> Visitor<S> for FirstBlock<'_, S> {
    fn viable(&self, level: usize, partial: &S) -> bool {
        exceeds(&(partial.clone() + self.tail[level].clone()), &self.before)
    }

    fn leaf(&mut self, picks: &[usize], total: &S) -> bool {
        if exceeds(total, &self.before) {
            self.hit = Some(picks.to_vec());
            true
        } else {
            false
        }
    }
}

/// First blocking proposal in enumeration order (firm 1's proposals before
/// firm 2's), or `None` when no lattice proposal blocks.
pub fn oracle_find_block<S: Scalar>(
    alloc: &Allocation<S>,
    pop: &MarketPopulation<S>,
    lattice: &SearchLattice<S>,
) -> Result<Option<BlockProposal<S>>, OracleError> {
    let size = lattice.proposal_count().saturating_mul(2);
    lattice.check(pop, size)?;
    for j in Firm::BOTH {
        let table = proposal_options(alloc, pop, lattice, j, true);
        let tail = optimistic_tail(&table);
        let mut visitor = FirstBlock {
            tail: &tail,
            before: total_profit(alloc.firm(j), pop),
            hit: None,
        };
        search(&table, &mut visitor);
        if let Some(picks) = visitor.hit {
            let p = BlockProposal::new(j, realize(&table, &picks), CaseLabel::OracleFound);
            if verify_block(alloc, &p, pop).valid {
                return Ok(Some(p));
            }
        }
    }
    Ok(None)
}

/// No lattice proposal blocks `alloc`.
pub fn oracle_is_core<S: Scalar>(
    alloc: &Allocation<S>,
    pop: &MarketPopulation<S>,
    lattice: &SearchLattice<S>,
) -> Result<bool, OracleError> {
    oracle_find_block(alloc, pop, lattice).map(|b| b.is_none())
}

struct Everything<F> {
    f: F,
}

impl<S: Scalar, F: FnMut(&[usize]) -> bool> Visitor<S> for Everything<F> {
    fn leaf(&mut self, picks: &[usize], _total: &S) -> bool {
        (self.f)(picks)
    }
}

/// Calls `visit` on every monotone lattice proposal of `firm`, feasible or
/// not. Returning true from `visit` stops the enumeration.
pub fn enumerate_proposals<S: Scalar>(
    alloc: &Allocation<S>,
    pop: &MarketPopulation<S>,
    lattice: &SearchLattice<S>,
    firm: Firm,
    mut visit: impl FnMut(&BlockProposal<S>) -> bool,
) -> Result<(), OracleError> {
    lattice.check(pop, lattice.proposal_count())?;
    let table = proposal_options(alloc, pop, lattice, firm, false);
    let mut visitor = Everything {
        f: |picks: &[usize]| {
            let p = BlockProposal::new(firm, realize(&table, picks), CaseLabel::OracleFound);
            visit(&p)
        },
    };
    search(&table, &mut visitor);
    Ok(())
}

/// Offer that hires as many workers as possible at wage `x`: everyone the
/// rival does not outbid.
pub(crate) fn widest_offer<S: Scalar>(rival: &Offer<S>, x: &S) -> Offer<S> {
    let offered = if rival.is_active() && *x < rival.wage {
        rival.offered.complement()
    } else {
        IndexSet::full()
    };
    Offer {
        offered,
        wage: x.clone(),
    }
}

/// Profit at level `k` from `firm` posting the widest offer at wage `x`.
pub(crate) fn level_value<S: Scalar>(
    firm: Firm,
    rival: &OfferMenu<S>,
    pop: &MarketPopulation<S>,
    policy: &TiePolicy<S>,
    k: usize,
    x: &S,
) -> S {
    let offer = widest_offer(rival.slot(k), x);
    let hired = hired_at_level(firm, &offer, rival.slot(k), policy);
    (pop.level(k).clone() - x.clone()) * hired.measure() * pop.mass(k).clone()
}

struct BestMenu<'a, S> {
    tail: &'a [S],
    best: S,
    picks: Vec<usize>,
}

impl<S: Scalar> Visitor<S> for BestMenu<'_, S> {
    fn viable(&self, level: usize, partial: &S) -> bool {
        partial.clone() + self.tail[level].clone() > self.best
    }

    fn leaf(&mut self, picks: &[usize], total: &S) -> bool {
        if *total > self.best {
            self.best = total.clone();
            self.picks = picks.to_vec();
        }
        false
    }
}

/// Profit-maximal monotone menu for `firm` against `rival` over the
/// lattice wages, and its profit under [`crate::induce_allocation`].
///
/// Wages with non-positive value at a level are dropped from that level:
/// declining to offer is never worse and never tightens monotonicity.
pub fn oracle_best_response<S: Scalar>(
    firm: Firm,
    rival: &OfferMenu<S>,
    pop: &MarketPopulation<S>,
    lattice: &SearchLattice<S>,
    policy: &TiePolicy<S>,
) -> Result<(OfferMenu<S>, S), OracleError> {
    lattice.check(pop, lattice.menu_count())?;
    let table: Vec<Vec<Choice<S>>> = (0..pop.len())
        .map(|k| {
            let mut opts = vec![Choice {
                wage: None,
                fraction: S::zero(),
                value: S::zero(),
            }];
            for x in &lattice.wage_candidates[k] {
                let value = level_value(firm, rival, pop, policy, k, x);
                if value > S::zero() {
                    opts.push(Choice {
                        wage: Some(x.clone()),
                        fraction: S::one(),
                        value,
                    });
                }
            }
            opts
        })
        .collect();
    let tail = optimistic_tail(&table);
    // Seeded with the all-skip menu so pruning is active from the start.
    let mut visitor = BestMenu {
        tail: &tail,
        best: S::zero(),
        picks: vec![0; pop.len()],
    };
    search(&table, &mut visitor);
    let slots = visitor
        .picks
        .iter()
        .enumerate()
        .map(|(k, &i)| match &table[k][i].wage {
            Some(x) => widest_offer(rival.slot(k), x),
            None => Offer::none(),
        })
        .collect();
    let menu = OfferMenu::new(slots).expect("enumerated wages are monotone");
    let profit = induced_profit(firm, &menu, rival, pop, policy);
    Ok((menu, profit))
}

/// Profit of `firm` when it posts `menu` against `rival`.
pub fn induced_profit<S: Scalar>(
    firm: Firm,
    menu: &OfferMenu<S>,
    rival: &OfferMenu<S>,
    pop: &MarketPopulation<S>,
    policy: &TiePolicy<S>,
) -> S {
    let profile = match firm {
        Firm::One => OfferProfile::new(menu.clone(), rival.clone()),
        Firm::Two => OfferProfile::new(rival.clone(), menu.clone()),
    };
    let alloc = crate::choice::induce_allocation(&profile, pop, policy).expect("monotone menus");
    total_profit(alloc.firm(firm), pop)
}
