//! Small hand-built markets, one per blocking case, plus Bertrand baselines.
//! Shared by tests, benchmarks and the command line.

use crate::blocking::{BlockConfig, CaseLabel};
use crate::index_set::IndexSet;
use crate::market::{Allocation, FirmAllocation, MarketPopulation};
use crate::scalar::Exact;

fn q(n: i64, d: i64) -> Exact {
    num_rational::BigRational::new(n.into(), d.into())
}

fn pop(levels: &[(i64, i64)], masses: &[(i64, i64)]) -> MarketPopulation<Exact> {
    MarketPopulation::new(
        levels.iter().map(|&(n, d)| q(n, d)).collect(),
        masses.iter().map(|&(n, d)| q(n, d)).collect(),
    )
    .expect("fixture population is valid")
}

fn span(a: (i64, i64), b: (i64, i64)) -> IndexSet<Exact> {
    IndexSet::interval(q(a.0, a.1), q(b.0, b.1)).expect("fixture interval is valid")
}

/// A named market together with the allocation under test.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub pop: MarketPopulation<Exact>,
    pub alloc: Allocation<Exact>,
}

/// The fixture exhibiting `case`. Panics for [`CaseLabel::OracleFound`].
pub fn case_fixture(case: CaseLabel) -> Fixture {
    match case {
        CaseLabel::Overpaid => {
            let pop = pop(&[(1, 2)], &[(1, 1)]);
            let f1 = FirmAllocation::vacant(1).with(0, IndexSet::full(), q(3, 5));
            Fixture {
                name: "overpaid",
                alloc: Allocation::new(f1, FirmAllocation::vacant(1)),
                pop,
            }
        }
        CaseLabel::UnderemployedUnderpaid => {
            let pop = pop(&[(3, 10), (7, 10)], &[(1, 2), (1, 2)]);
            let f1 = FirmAllocation::vacant(2).with(0, IndexSet::full(), q(1, 10));
            Fixture {
                name: "underemployed-underpaid",
                alloc: Allocation::new(f1, FirmAllocation::vacant(2)),
                pop,
            }
        }
        CaseLabel::UnderemployedAtProductivity => {
            let pop = pop(&[(2, 5), (4, 5)], &[(1, 2), (1, 2)]);
            let f1 = FirmAllocation::vacant(2).with(1, span((0, 1), (1, 2)), q(4, 5));
            Fixture {
                name: "underemployed-at-productivity",
                alloc: Allocation::new(f1, FirmAllocation::vacant(2)),
                pop,
            }
        }
        CaseLabel::MonopsonyUnderpay => {
            let pop = pop(&[(3, 5)], &[(1, 1)]);
            let f1 = FirmAllocation::vacant(1).with(0, IndexSet::full(), q(1, 10));
            Fixture {
                name: "monopsony-underpay",
                alloc: Allocation::new(f1, FirmAllocation::vacant(1)),
                pop,
            }
        }
        CaseLabel::DuopsonyUnderpay => {
            let pop = pop(&[(3, 5)], &[(1, 1)]);
            let f1 = FirmAllocation::vacant(1).with(0, span((0, 1), (1, 2)), q(1, 5));
            let f2 = FirmAllocation::vacant(1).with(0, span((1, 2), (1, 1)), q(3, 20));
            Fixture {
                name: "duopsony-underpay",
                alloc: Allocation::new(f1, f2),
                pop,
            }
        }
        CaseLabel::AsymmetricPoach => {
            let pop = pop(&[(1, 2)], &[(1, 1)]);
            let f1 = FirmAllocation::vacant(1).with(0, span((0, 1), (1, 2)), q(1, 2));
            let f2 = FirmAllocation::vacant(1).with(0, span((1, 2), (1, 1)), q(1, 5));
            Fixture {
                name: "asymmetric-poach",
                alloc: Allocation::new(f1, f2),
                pop,
            }
        }
        CaseLabel::OracleFound => panic!("no fixture for oracle-found blocks"),
    }
}

/// Block configuration under which the fixture reproduces its documented
/// numbers: ε′ capped at 1/20 for the outbidding cases and 1/10 for the
/// asymmetric poach.
pub fn case_config(case: CaseLabel) -> BlockConfig<Exact> {
    let cfg = BlockConfig::new(q(0, 1));
    match case {
        CaseLabel::MonopsonyUnderpay | CaseLabel::DuopsonyUnderpay => cfg.with_epsilon_cap(q(1, 20)),
        CaseLabel::AsymmetricPoach => cfg.with_epsilon_cap(q(1, 10)),
        _ => cfg,
    }
}

/// All six case fixtures in case order.
pub fn all_case_fixtures() -> Vec<(CaseLabel, Fixture)> {
    CaseLabel::CONSTRUCTIVE.iter().map(|&c| (c, case_fixture(c))).collect()
}

/// Populations used for equilibrium checks.
pub fn fixture_populations() -> Vec<MarketPopulation<Exact>> {
    vec![
        pop(&[(1, 2)], &[(1, 1)]),
        pop(&[(1, 2), (1, 1)], &[(1, 2), (1, 2)]),
        pop(&[(3, 10), (7, 10)], &[(1, 2), (1, 2)]),
        pop(&[(1, 4), (1, 2), (3, 4), (1, 1)], &[(1, 4), (1, 4), (1, 4), (1, 4)]),
        pop(&[(1, 5), (3, 5)], &[(1, 2), (1, 2)]),
        pop(&[(0, 1), (1, 3), (2, 3)], &[(1, 3), (1, 6), (1, 2)]),
    ]
}

/// Firm 1 hires `[0, split)` and firm 2 the rest of every level, both at
/// productivity.
pub fn bertrand_split(pop: &MarketPopulation<Exact>, split: &Exact) -> Allocation<Exact> {
    let left = IndexSet::interval(q(0, 1), split.clone()).expect("split within [0, 1]");
    let right = left.complement();
    let mut f1 = FirmAllocation::vacant(pop.len());
    let mut f2 = FirmAllocation::vacant(pop.len());
    for k in 0..pop.len() {
        if !left.is_empty() {
            f1.set(k, left.clone(), pop.level(k).clone());
        }
        if !right.is_empty() {
            f2.set(k, right.clone(), pop.level(k).clone());
        }
    }
    Allocation::new(f1, f2)
}

/// Unemployment family for the interval bound: `n` equally spaced levels,
/// the lowest `low` of them fully employed by firm 1 at half productivity,
/// the rest employed by firm 1 at productivity on `[0, 1 - sigma)` with the
/// remainder unemployed. With `alternate`, every second upper level is
/// instead fully employed at productivity, so only part of the interval is
/// underemployed.
pub fn unemployment_family(n: usize, low: usize, sigma: &Exact, alternate: bool) -> Fixture {
    assert!(low < n, "at least one upper level");
    let levels: Vec<Exact> = (1..=n).map(|k| q(k as i64, n as i64)).collect();
    let masses = vec![q(1, n as i64); n];
    let pop = MarketPopulation::new(levels, masses).expect("family population is valid");
    let employed = IndexSet::interval(q(0, 1), q(1, 1) - sigma.clone()).expect("sigma within [0, 1]");
    let mut f1 = FirmAllocation::vacant(n);
    for k in 0..n {
        let v = pop.level(k).clone();
        if k < low {
            f1.set(k, IndexSet::full(), v / q(2, 1));
        } else if alternate && (k - low) % 2 == 1 {
            f1.set(k, IndexSet::full(), v);
        } else if !employed.is_empty() {
            f1.set(k, employed.clone(), v);
        }
    }
    Fixture {
        name: "unemployment-family",
        alloc: Allocation::new(f1, FirmAllocation::vacant(n)),
        pop,
    }
}
