use bertrand_core::fixtures::{bertrand_split, case_fixture};
use bertrand_core::*;

fn q(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

fn two_level() -> MarketPopulation<Exact> {
    MarketPopulation::new(vec![q(1, 2), q(1, 1)], vec![q(1, 2), q(1, 2)]).unwrap()
}

fn quarter_lattice(n: usize) -> SearchLattice<Exact> {
    SearchLattice::uniform(n, (0..=4).map(|k| q(k, 4)).collect(), vec![q(0, 1), q(1, 2), q(1, 1)])
}

fn eta() -> Exact {
    q(1, 1_000_000_000)
}

#[test]
fn bertrand_allocation_has_no_lattice_block() {
    let pop = two_level();
    let a = bertrand_split(&pop, &q(1, 1));
    assert_eq!(oracle_find_block(&a, &pop, &quarter_lattice(2)).unwrap(), None);
    assert!(oracle_is_core(&a, &pop, &SearchLattice::for_allocation(&a, &pop, &eta())).unwrap());
}

#[test]
fn full_unemployment_is_blocked() {
    let pop = two_level();
    let a = Allocation::vacant(2);
    let p = oracle_find_block(&a, &pop, &quarter_lattice(2)).unwrap().unwrap();
    assert_eq!(p.blocker, Firm::One);
    assert_eq!(p.case_label, CaseLabel::OracleFound);
    assert!(verify_block(&a, &p, &pop).valid);
}

#[test]
fn oracle_rejects_non_bertrand_fixtures() {
    for case in [
        CaseLabel::Overpaid,
        CaseLabel::UnderemployedAtProductivity,
        CaseLabel::AsymmetricPoach,
    ] {
        let fx = case_fixture(case);
        let lattice = SearchLattice::for_allocation(&fx.alloc, &fx.pop, &eta());
        assert!(!oracle_is_core(&fx.alloc, &fx.pop, &lattice).unwrap(), "{case}");
    }
}

#[test]
fn oracle_cap_is_enforced() {
    let pop = two_level();
    let lattice = quarter_lattice(2).with_cap(10);
    assert!(matches!(
        oracle_find_block(&Allocation::vacant(2), &pop, &lattice),
        Err(OracleError::CapExceeded { .. })
    ));
}

#[test]
fn enumeration_visits_every_monotone_proposal() {
    let pop = MarketPopulation::new(vec![q(1, 2)], vec![q(1, 1)]).unwrap();
    let mut count = 0;
    enumerate_proposals(&Allocation::vacant(1), &pop, &quarter_lattice(1), Firm::One, |_| {
        count += 1;
        false
    })
    .unwrap();
    // No hire, or one of 5 wages at one of 2 positive fractions.
    assert_eq!(count, 11);
}

#[test]
fn best_response_to_productivity_offers_is_zero() {
    let pop = two_level();
    let rival = OfferMenu::at_productivity(&pop);
    let lattice = SearchLattice::for_rival_menu(&rival, &pop, &eta());
    let (_, profit) = oracle_best_response(Firm::One, &rival, &pop, &lattice, &TiePolicy::default()).unwrap();
    assert_eq!(profit, q(0, 1));
}

#[test]
fn best_response_to_silence_hires_everyone_at_zero() {
    let pop = two_level();
    let rival = OfferMenu::silent(2);
    let lattice = SearchLattice::for_rival_menu(&rival, &pop, &eta());
    let (menu, profit) = oracle_best_response(Firm::Two, &rival, &pop, &lattice, &TiePolicy::default()).unwrap();
    assert_eq!(profit, q(3, 4));
    assert!(menu
        .slots()
        .iter()
        .all(|o| o.wage == q(0, 1) && o.offered == IndexSet::full()));
}

#[test]
fn best_response_outbids_flat_rival_on_high_level_only() {
    let pop = MarketPopulation::new(vec![q(1, 5), q(3, 5)], vec![q(1, 2), q(1, 2)]).unwrap();
    let flat = Offer {
        offered: IndexSet::full(),
        wage: q(3, 10),
    };
    let rival = OfferMenu::new(vec![flat.clone(), flat]).unwrap();
    let lattice = SearchLattice::for_rival_menu(&rival, &pop, &eta());
    let (menu, profit) = oracle_best_response(Firm::One, &rival, &pop, &lattice, &TiePolicy::default()).unwrap();
    assert_eq!(profit, q(3, 20) - eta() / q(2, 1));
    assert!(!menu.slot(0).is_active());
    assert_eq!(menu.slot(1).wage, q(3, 10) + eta());
}
