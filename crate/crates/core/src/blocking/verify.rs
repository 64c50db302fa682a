use crate::market::{Allocation, Firm, MarketPopulation};
use crate::payoff::total_profit;
use crate::scalar::{approx_le, exceeds, strictly_above, Scalar};

use super::{BlockProposal, BlockVerdict, Condition};

/// Checks every level of the proposal against Conditions 1–4 and compares
/// the blocker's profit before and after.
///
/// Mass inequalities allow the backend slack; "strictly higher wage" uses the
/// strictness margin; the profit gain must exceed the slack. A proposal whose
/// alternative is not itself a valid firm allocation is never valid.
pub fn verify_block<S: Scalar>(
    alloc: &Allocation<S>,
    proposal: &BlockProposal<S>,
    pop: &MarketPopulation<S>,
) -> BlockVerdict<S> {
    let j = proposal.blocker;
    let own = alloc.firm(j);
    let alt = &proposal.alternative;
    let alternative_valid = alt.violations(j, pop).is_empty();

    let mut per_level_condition = Vec::with_capacity(pop.len());
    if alt.len() == pop.len() {
        for k in 0..pop.len() {
            let w_new = effective(alt.is_employed(k), alt.wage(k));
            per_level_condition.push(level_conditions(alloc, j, pop, k, &alt.hired_mass(k, pop), &w_new));
        }
    }

    let profit_before = total_profit(own, pop);
    let profit_after = if alternative_valid {
        total_profit(alt, pop)
    } else {
        profit_before.clone()
    };
    let valid = alternative_valid
        && per_level_condition.iter().all(|c| !c.is_empty())
        && exceeds(&profit_after, &profit_before);
    BlockVerdict {
        per_level_condition,
        profit_before,
        profit_after,
        alternative_valid,
        valid,
    }
}

/// Conditions met at level `k` if `j` hires mass `f_new` there at effective
/// wage `w_new`.
pub(crate) fn level_conditions<S: Scalar>(
    alloc: &Allocation<S>,
    j: Firm,
    pop: &MarketPopulation<S>,
    k: usize,
    f_new: &S,
    w_new: &S,
) -> Vec<Condition> {
    let own = alloc.firm(j);
    let rival = alloc.firm(j.other());
    let f = pop.mass(k).clone();
    let f_own = own.hired_mass(k, pop);
    let f_rival = rival.hired_mass(k, pop);
    let w_own = effective(own.is_employed(k), own.wage(k));
    let w_rival = effective(rival.is_employed(k), rival.wage(k));

    let beats_rival = strictly_above(w_new, &w_rival);
    let no_cut = approx_le(&w_own, w_new);
    let mut met = Vec::new();
    if beats_rival && no_cut {
        met.push(Condition::OutbidAll);
    }
    if no_cut && approx_le(&(f_new.clone() + f_rival.clone()), &f) {
        met.push(Condition::BesideRival);
    }
    if beats_rival && approx_le(&(f_new.clone() + f_own.clone()), &f) {
        met.push(Condition::PoachRival);
    }
    if approx_le(&(f_new.clone() + f_own + f_rival), &f) {
        met.push(Condition::FromUnemployed);
    }
    met
}

fn effective<S: Scalar>(employed: bool, wage: &S) -> S {
    if employed {
        wage.clone()
    } else {
        S::zero()
    }
}
