use crate::market::{Allocation, Firm, MarketPopulation};
use crate::payoff::LevelFacts;
use crate::scalar::Scalar;

use super::CaseLabel;

/// One case predicate holding for one firm on a set of levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseHit {
    pub case: CaseLabel,
    pub firm: Firm,
    /// Ascending level indices where the predicate holds.
    pub levels: Vec<usize>,
}

/// Evaluates the six case predicates for both firms at every level.
///
/// Hits are ordered by case, then firm. The list is empty exactly when
/// [`crate::is_bertrand`] holds at the same tolerance.
pub fn classify_non_bertrand<S: Scalar>(alloc: &Allocation<S>, pop: &MarketPopulation<S>, tol: &S) -> Vec<CaseHit> {
    let facts: Vec<LevelFacts<S>> = (0..pop.len()).map(|k| LevelFacts::new(alloc, pop, k, tol)).collect();
    let mut hits = Vec::new();
    for case in CaseLabel::CONSTRUCTIVE {
        for firm in Firm::BOTH {
            let levels: Vec<usize> = facts
                .iter()
                .enumerate()
                .filter(|(_, lf)| case_holds(case, firm, lf, tol))
                .map(|(k, _)| k)
                .collect();
            if !levels.is_empty() {
                hits.push(CaseHit { case, firm, levels });
            }
        }
    }
    hits
}

pub(crate) fn case_holds<S: Scalar>(case: CaseLabel, j: Firm, lf: &LevelFacts<S>, tol: &S) -> bool {
    let o = j.other();
    let (ji, oi) = (j.index(), o.index());
    match case {
        CaseLabel::Overpaid => lf.overpaid(j, tol),
        CaseLabel::UnderemployedUnderpaid => !lf.full && lf.underpaid(j, tol),
        CaseLabel::UnderemployedAtProductivity => !lf.full && lf.paid_productivity(j, tol),
        CaseLabel::MonopsonyUnderpay => lf.employed[ji] && lf.underpaid(j, tol) && lf.hires_all(j, tol),
        CaseLabel::DuopsonyUnderpay => lf.hires_part(j, tol) && lf.underpaid(j, tol) && lf.wage[oi] <= lf.wage[ji],
        CaseLabel::AsymmetricPoach => lf.paid_productivity(j, tol) && lf.hires_part(o, tol) && lf.underpaid(o, tol),
        CaseLabel::OracleFound => false,
    }
}
