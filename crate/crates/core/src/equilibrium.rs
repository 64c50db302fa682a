//! The offer game: monotone best responses, Nash verification, and turning
//! a cooperative block into a profitable menu deviation.

use thiserror::Error;

use crate::blocking::BlockProposal;
use crate::choice::{induce_allocation, TiePolicy};
use crate::error::ModelError;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation, Offer, OfferMenu, OfferProfile};
use crate::oracle::{induced_profit, level_value, wage_ladder, widest_offer};
use crate::payoff::total_profit;
use crate::sample::repair_monotone;
use crate::scalar::{self, Scalar};

/// Where best-response wage candidates come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WageSource<S> {
    /// `{0}` ∪ rival wages ∪ rival wages + η ∪ grid levels.
    Derived,
    /// A fixed list, used at every level.
    Explicit(Vec<S>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseParams<S> {
    /// Increment used to outbid the rival strictly.
    pub eta: S,
    pub wages: WageSource<S>,
    pub tie_policy: TiePolicy<S>,
}

impl<S: Scalar> BestResponseParams<S> {
    pub fn new(eta: S) -> Result<Self, ModelError> {
        if eta <= S::zero() || !eta.is_finite() {
            return Err(ModelError::InvalidWage(eta.render()));
        }
        Ok(Self {
            eta,
            wages: WageSource::Derived,
            tie_policy: TiePolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: TiePolicy<S>) -> Self {
        self.tie_policy = policy;
        self
    }

    pub fn with_wages(mut self, wages: Vec<S>) -> Self {
        self.wages = WageSource::Explicit(wages);
        self
    }

    pub fn ladder(&self, rival: &OfferMenu<S>, pop: &MarketPopulation<S>) -> Vec<S> {
        match &self.wages {
            WageSource::Derived => wage_ladder(rival, pop, &self.eta),
            WageSource::Explicit(ws) => {
                let mut ws = ws.clone();
                ws.sort_by(|a, b| a.partial_cmp(b).expect("finite wages"));
                ws.dedup();
                ws
            }
        }
    }
}

/// A menu together with the profit it earns against the rival.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<S> {
    pub menu: OfferMenu<S>,
    pub profit: S,
}

/// Profit-maximizing monotone menu for `firm` against `rival`.
///
/// With ladder `W`, the value of posting `W[i]` at level `k` is
/// `g(k, i) = max(0, (v_k - W[i]) * h(k, W[i]))` where `h` is the mass the
/// widest offer at that wage attracts. `D[k][i]`, the best total over levels
/// `0..=k` with every posted wage at most `W[i]`, satisfies
/// `D[k][i] = max(D[k][i-1], D[k-1][i] + g(k, i))`; unposted levels do not
/// constrain monotonicity. The menu is recovered by backtracking.
pub fn best_response<S: Scalar>(
    firm: Firm,
    rival: &OfferMenu<S>,
    pop: &MarketPopulation<S>,
    params: &BestResponseParams<S>,
) -> BestResponse<S> {
    let ladder = params.ladder(rival, pop);
    let n = pop.len();
    let m = ladder.len();
    let policy = &params.tie_policy;
    let g: Vec<Vec<S>> = (0..n)
        .map(|k| {
            ladder
                .iter()
                .map(|x| scalar::max(S::zero(), level_value(firm, rival, pop, policy, k, x)))
                .collect()
        })
        .collect();

    // d[k + 1][i]; row 0 is the empty prefix.
    let mut d = vec![vec![S::zero(); m]; n + 1];
    for k in 0..n {
        for i in 0..m {
            let take = d[k][i].clone() + g[k][i].clone();
            d[k + 1][i] = if i > 0 {
                scalar::max(d[k + 1][i - 1].clone(), take)
            } else {
                take
            };
        }
    }

    let mut slots = vec![Offer::none(); n];
    if m > 0 {
        let mut i = m - 1;
        for k in (0..n).rev() {
            while i > 0 && d[k + 1][i] == d[k + 1][i - 1] {
                i -= 1;
            }
            if g[k][i] > S::zero() {
                slots[k] = widest_offer(rival.slot(k), &ladder[i]);
            }
        }
    }
    let menu = OfferMenu::new(slots).expect("backtracked wages are monotone");
    let profit = induced_profit(firm, &menu, rival, pop, policy);
    BestResponse { menu, profit }
}

/// One firm's position in a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmReport<S> {
    pub current_profit: S,
    pub best_profit: S,
    /// `best_profit - current_profit`.
    pub gain: S,
    /// The best-response menu witnessing `best_profit`.
    pub witness: OfferMenu<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    pub per_firm: [FirmReport<S>; 2],
    pub allocation: Allocation<S>,
    pub is_equilibrium: bool,
}

impl<S: Scalar> EquilibriumReport<S> {
    pub fn firm(&self, firm: Firm) -> &FirmReport<S> {
        &self.per_firm[firm.index()]
    }

    pub fn max_gain(&self) -> S {
        scalar::max(self.per_firm[0].gain.clone(), self.per_firm[1].gain.clone())
    }
}

/// Compares each firm's profit under `profile` with its best response.
pub fn verify_equilibrium<S: Scalar>(
    profile: &OfferProfile<S>,
    pop: &MarketPopulation<S>,
    params: &BestResponseParams<S>,
    tol: &S,
) -> Result<EquilibriumReport<S>, ModelError> {
    let allocation = induce_allocation(profile, pop, &params.tie_policy)?;
    let per_firm = Firm::BOTH.map(|firm| {
        let current_profit = total_profit(allocation.firm(firm), pop);
        let br = best_response(firm, profile.menu(firm.other()), pop, params);
        FirmReport {
            gain: br.profit.clone() - current_profit.clone(),
            current_profit,
            best_profit: br.profit,
            witness: br.menu,
        }
    });
    let is_equilibrium = per_firm.iter().all(|r| r.gain <= *tol);
    Ok(EquilibriumReport {
        per_firm,
        allocation,
        is_equilibrium,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("deviation menu reproduces a different allocation at level {level}")]
    Mismatch { level: usize },
}

/// A menu deviation realizing a block.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation<S> {
    pub firm: Firm,
    pub menu: OfferMenu<S>,
    /// The blocker's allocation induced by the deviation.
    pub realized: FirmAllocation<S>,
    pub profit_before: S,
    pub profit_after: S,
    /// Whether wages had to be raised by η to break ties.
    pub bumped: bool,
}

impl<S: Scalar> Deviation<S> {
    pub fn gain(&self) -> S {
        self.profit_after.clone() - self.profit_before.clone()
    }
}

fn menu_for<S: Scalar>(alt: &FirmAllocation<S>) -> OfferMenu<S> {
    OfferMenu::from_allocation(alt).expect("valid alternative yields a monotone menu")
}

/// Converts a verified block into a menu deviation against `profile`.
///
/// The blocker offers exactly the workers it hires in the alternative, at the
/// alternative's wages, and withholds every other offer. Contested workers
/// are won through the strict wage conditions, the rest are free. If a wage
/// tie still lets the rival keep some of them, the tied wages are raised by
/// `eta` (keeping the menu monotone) and the result is checked again.
pub fn block_to_deviation<S: Scalar>(
    proposal: &BlockProposal<S>,
    profile: &OfferProfile<S>,
    pop: &MarketPopulation<S>,
    policy: &TiePolicy<S>,
    eta: &S,
) -> Result<Deviation<S>, DeviationError> {
    let j = proposal.blocker;
    let before = induce_allocation(profile, pop, policy)?;
    let profit_before = total_profit(before.firm(j), pop);
    let rival_menu = profile.menu(j.other());

    let attempt = |alt: &FirmAllocation<S>| -> Result<(OfferMenu<S>, FirmAllocation<S>), DeviationError> {
        let menu = menu_for(alt);
        let deviated = profile.clone().with_menu(j, menu.clone());
        let realized = induce_allocation(&deviated, pop, policy)?.firm(j).clone();
        Ok((menu, realized))
    };

    let target = &proposal.alternative;
    let (menu, realized) = attempt(target)?;
    if let Some(level) = first_mismatch(&realized, target) {
        let mut bumped = target.clone();
        for k in 0..pop.len() {
            let rival = rival_menu.slot(k);
            if bumped.is_employed(k)
                && rival.is_active()
                && !rival.offered.is_disjoint_from(bumped.hired(k))
                && *bumped.wage(k) <= rival.wage
            {
                let hired = bumped.hired(k).clone();
                bumped.set(k, hired, rival.wage.clone() + eta.clone());
            }
        }
        repair_monotone(&mut bumped);
        let (menu, realized) = attempt(&bumped)?;
        if first_mismatch(&realized, &bumped).is_some() {
            return Err(DeviationError::Mismatch { level });
        }
        let profit_after = total_profit(&realized, pop);
        return Ok(Deviation {
            firm: j,
            menu,
            realized,
            profit_before,
            profit_after,
            bumped: true,
        });
    }
    let profit_after = total_profit(&realized, pop);
    Ok(Deviation {
        firm: j,
        menu,
        realized,
        profit_before,
        profit_after,
        bumped: false,
    })
}

fn first_mismatch<S: Scalar>(a: &FirmAllocation<S>, b: &FirmAllocation<S>) -> Option<usize> {
    (0..a.len().max(b.len())).find(|&k| k >= a.len() || k >= b.len() || a.slot(k) != b.slot(k))
}

/// One round of alternating best responses.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsRound<S> {
    pub profile: OfferProfile<S>,
    pub profits: [S; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace<S> {
    pub rounds: Vec<DynamicsRound<S>>,
    /// True when the last round changed neither firm's profit opportunity.
    pub converged: bool,
}

/// Alternates best responses (firm 1, then firm 2) from `init` until neither
/// firm can gain more than the backend slack, or `max_iter` rounds pass.
pub fn best_response_dynamics<S: Scalar>(
    init: &OfferProfile<S>,
    pop: &MarketPopulation<S>,
    params: &BestResponseParams<S>,
    max_iter: usize,
) -> Result<DynamicsTrace<S>, ModelError> {
    let policy = &params.tie_policy;
    let profits_of = |p: &OfferProfile<S>| -> Result<[S; 2], ModelError> {
        let a = induce_allocation(p, pop, policy)?;
        Ok(Firm::BOTH.map(|f| total_profit(a.firm(f), pop)))
    };
    let mut profile = init.clone();
    let mut rounds = vec![DynamicsRound {
        profits: profits_of(&profile)?,
        profile: profile.clone(),
    }];
    for _ in 0..max_iter {
        let mut moved = false;
        for firm in Firm::BOTH {
            let current = profits_of(&profile)?[firm.index()].clone();
            let br = best_response(firm, profile.menu(firm.other()), pop, params);
            if scalar::exceeds(&br.profit, &current) {
                profile = profile.with_menu(firm, br.menu);
                moved = true;
            }
        }
        rounds.push(DynamicsRound {
            profits: profits_of(&profile)?,
            profile: profile.clone(),
        });
        if !moved {
            return Ok(DynamicsTrace {
                rounds,
                converged: true,
            });
        }
    }
    Ok(DynamicsTrace {
        rounds,
        converged: false,
    })
}
