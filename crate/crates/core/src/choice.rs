//! Worker acceptance: turns a pair of offer menus into an allocation.

use crate::error::ModelError;
use crate::index_set::IndexSet;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation, Offer, OfferProfile, Position};
use crate::scalar::Scalar;

/// How indifferent workers behave.
#[derive(Debug, Clone, PartialEq)]
pub struct TiePolicy<S> {
    theta: S,
    /// Accept a zero wage over unemployment.
    pub accept_at_reservation: bool,
}

impl<S: Scalar> TiePolicy<S> {
    /// `theta` is the share of equal-wage overlap assigned to firm 1, taken
    /// from the left of the overlap index set.
    pub fn new(theta: S, accept_at_reservation: bool) -> Result<Self, ModelError> {
        if !theta.is_finite() || theta < S::zero() || theta > S::one() {
            return Err(ModelError::InvalidTheta(theta.render()));
        }
        Ok(Self {
            theta,
            accept_at_reservation,
        })
    }

    pub fn theta(&self) -> &S {
        &self.theta
    }

    /// Share of a tied overlap that goes to `firm`.
    pub fn tie_share(&self, firm: Firm) -> S {
        match firm {
            Firm::One => self.theta.clone(),
            Firm::Two => S::one() - self.theta.clone(),
        }
    }

    pub fn accepts(&self, wage: &S) -> bool {
        *wage > S::zero() || (self.accept_at_reservation && wage.is_zero())
    }

    pub fn convert<T: Scalar>(&self) -> TiePolicy<T> {
        TiePolicy {
            theta: crate::scalar::convert(&self.theta),
            accept_at_reservation: self.accept_at_reservation,
        }
    }
}

impl<S: Scalar> Default for TiePolicy<S> {
    fn default() -> Self {
        Self {
            theta: S::ratio(1, 2),
            accept_at_reservation: true,
        }
    }
}

/// Second stage of the game: each worker takes the best offer she holds.
///
/// Workers offered by one firm accept when the wage is acceptable; workers
/// offered by both take the strictly higher wage, and on an exact tie the
/// leftmost `theta` share of the overlap goes to firm 1. Paid wage equals the
/// offered wage on the hired support and zero elsewhere.
pub fn induce_allocation<S: Scalar>(
    offers: &OfferProfile<S>,
    pop: &MarketPopulation<S>,
    policy: &TiePolicy<S>,
) -> Result<Allocation<S>, ModelError> {
    for firm in Firm::BOTH {
        let menu = offers.menu(firm);
        if menu.len() != pop.len() {
            return Err(ModelError::SlotCount {
                expected: pop.len(),
                found: menu.len(),
            });
        }
        if !menu.is_monotone() {
            return Err(ModelError::NonMonotoneMenu(firm.to_string()));
        }
    }
    let m1 = offers.menu(Firm::One);
    let m2 = offers.menu(Firm::Two);
    let mut slots1 = Vec::with_capacity(pop.len());
    let mut slots2 = Vec::with_capacity(pop.len());
    for k in 0..pop.len() {
        let (h1, h2) = accept_offers(m1.slot(k), m2.slot(k), policy);
        slots1.push(paid(h1, &m1.slot(k).wage));
        slots2.push(paid(h2, &m2.slot(k).wage));
    }
    Ok(Allocation::new(
        FirmAllocation::from_slots(slots1),
        FirmAllocation::from_slots(slots2),
    ))
}

/// Workers at one level that `firm` hires with offer `own` against the
/// rival's offer `rival`.
pub(crate) fn hired_at_level<S: Scalar>(
    firm: Firm,
    own: &Offer<S>,
    rival: &Offer<S>,
    policy: &TiePolicy<S>,
) -> IndexSet<S> {
    let (o1, o2) = match firm {
        Firm::One => (own, rival),
        Firm::Two => (rival, own),
    };
    let (h1, h2) = accept_offers(o1, o2, policy);
    match firm {
        Firm::One => h1,
        Firm::Two => h2,
    }
}

fn paid<S: Scalar>(hired: IndexSet<S>, wage: &S) -> Position<S> {
    if hired.is_empty() {
        Position::vacant()
    } else {
        Position::new(hired, wage.clone())
    }
}

fn accept_offers<S: Scalar>(o1: &Offer<S>, o2: &Offer<S>, policy: &TiePolicy<S>) -> (IndexSet<S>, IndexSet<S>) {
    let both = o1.offered.intersect(&o2.offered);
    let only1 = o1.offered.subtract(&both);
    let only2 = o2.offered.subtract(&both);
    let ok1 = policy.accepts(&o1.wage);
    let ok2 = policy.accepts(&o2.wage);

    let mut h1 = if ok1 { only1 } else { IndexSet::empty() };
    let mut h2 = if ok2 { only2 } else { IndexSet::empty() };
    if !both.is_empty() {
        if o1.wage > o2.wage {
            if ok1 {
                h1 = h1.union(&both);
            }
        } else if o2.wage > o1.wage {
            if ok2 {
                h2 = h2.union(&both);
            }
        } else if ok1 {
            let (left, right) = both.split_leftmost(policy.theta());
            h1 = h1.union(&left);
            h2 = h2.union(&right);
        }
    }
    (h1, h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::OfferMenu;
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    fn single() -> MarketPopulation<Exact> {
        MarketPopulation::new(vec![q(1, 2)], vec![q(1, 1)]).unwrap()
    }

    fn menu(set: IndexSet<Exact>, wage: Exact) -> OfferMenu<Exact> {
        OfferMenu::new(vec![Offer { offered: set, wage }]).unwrap()
    }

    #[test]
    fn higher_wage_takes_contested_workers() {
        let p = OfferProfile::new(menu(IndexSet::full(), q(2, 5)), menu(IndexSet::full(), q(3, 10)));
        let a = induce_allocation(&p, &single(), &TiePolicy::default()).unwrap();
        assert_eq!(a.firm(Firm::One).hired(0), &IndexSet::full());
        assert!(a.firm(Firm::Two).hired(0).is_empty());
        assert_eq!(a.firm(Firm::Two).wage(0), &q(0, 1));
    }

    #[test]
    fn equal_wages_split_by_theta() {
        let p = OfferProfile::new(menu(IndexSet::full(), q(2, 5)), menu(IndexSet::full(), q(2, 5)));
        let a = induce_allocation(&p, &single(), &TiePolicy::default()).unwrap();
        assert_eq!(a.firm(Firm::One).share(0), q(1, 2));
        assert_eq!(a.firm(Firm::Two).share(0), q(1, 2));
        assert_eq!(
            a.firm(Firm::One).hired(0),
            &IndexSet::interval(q(0, 1), q(1, 2)).unwrap()
        );
    }

    #[test]
    fn sole_offer_is_accepted_and_rest_unemployed() {
        let half = IndexSet::interval(q(0, 1), q(1, 2)).unwrap();
        let p = OfferProfile::new(menu(half.clone(), q(1, 5)), OfferMenu::silent(1));
        let pop = single();
        let a = induce_allocation(&p, &pop, &TiePolicy::default()).unwrap();
        assert_eq!(a.firm(Firm::One).hired(0), &half);
        assert_eq!(a.unemployed_mass(0, &pop), q(1, 2));
    }

    #[test]
    fn zero_wage_acceptance_follows_policy() {
        let p = OfferProfile::new(menu(IndexSet::full(), q(0, 1)), OfferMenu::silent(1));
        let yes = induce_allocation(&p, &single(), &TiePolicy::default()).unwrap();
        assert_eq!(yes.firm(Firm::One).share(0), q(1, 1));
        let strict = TiePolicy::new(q(1, 2), false).unwrap();
        let no = induce_allocation(&p, &single(), &strict).unwrap();
        assert!(no.firm(Firm::One).hired(0).is_empty());
    }

    #[test]
    fn theta_outside_unit_interval_rejected() {
        assert!(TiePolicy::new(q(3, 2), true).is_err());
    }
}
