//! Firm profits and the Bertrand-allocation test.

use crate::error::ModelError;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation};
use crate::scalar::{self, Scalar};

/// Per-level and total profit of one firm.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfitReport<S> {
    pub per_level: Vec<S>,
    pub total: S,
}

/// `(v - w(v)) * f(v)` summed over levels. Profit may be negative.
pub fn firm_profit<S: Scalar>(
    alloc: &FirmAllocation<S>,
    pop: &MarketPopulation<S>,
) -> Result<ProfitReport<S>, ModelError> {
    if alloc.len() != pop.len() {
        return Err(ModelError::SlotCount {
            expected: pop.len(),
            found: alloc.len(),
        });
    }
    let per_level: Vec<S> = (0..pop.len()).map(|k| level_profit(alloc, k, pop)).collect();
    let total = per_level.iter().cloned().fold(S::zero(), |a, b| a + b);
    Ok(ProfitReport { per_level, total })
}

pub(crate) fn level_profit<S: Scalar>(alloc: &FirmAllocation<S>, k: usize, pop: &MarketPopulation<S>) -> S {
    if !alloc.is_employed(k) {
        return S::zero();
    }
    (pop.level(k).clone() - alloc.wage(k).clone()) * alloc.hired_mass(k, pop)
}

/// Total profit; panics on a slot-count mismatch, which validated inputs rule out.
pub fn total_profit<S: Scalar>(alloc: &FirmAllocation<S>, pop: &MarketPopulation<S>) -> S {
    firm_profit(alloc, pop)
        .expect("allocation aligned with population")
        .total
}

/// Which Bertrand condition fails at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BertrandFailure {
    /// Some workers at the level are unemployed.
    FullEmployment,
    /// The firm employs workers at a wage different from productivity.
    WageEqualsProductivity(Firm),
}

/// Outcome of [`is_bertrand`]: the failing levels, empty when the allocation
/// is Bertrand.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BertrandCertificate {
    pub failures: Vec<(usize, BertrandFailure)>,
}

impl BertrandCertificate {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tolerance-aware view of one level of an allocation. Shared by the
/// Bertrand test and the case classifier so that both agree exactly.
#[derive(Debug, Clone)]
pub(crate) struct LevelFacts<S> {
    pub v: S,
    pub mass: S,
    pub hired: [S; 2],
    /// Paid wage, or zero when the firm's share is within tolerance of zero.
    pub wage: [S; 2],
    pub employed: [bool; 2],
    pub full: bool,
}

impl<S: Scalar> LevelFacts<S> {
    pub fn new(alloc: &Allocation<S>, pop: &MarketPopulation<S>, k: usize, tol: &S) -> Self {
        let mass = pop.mass(k).clone();
        let mut hired = [S::zero(), S::zero()];
        let mut wage = [S::zero(), S::zero()];
        let mut employed = [false, false];
        for firm in Firm::BOTH {
            let i = firm.index();
            let fa = alloc.firm(firm);
            hired[i] = fa.hired_mass(k, pop);
            employed[i] = fa.share(k) > *tol;
            if employed[i] {
                wage[i] = fa.wage(k).clone();
            }
        }
        let gap = mass.clone() - hired[0].clone() - hired[1].clone();
        let full = scalar::abs(gap) <= tol.clone() * mass.clone();
        Self {
            v: pop.level(k).clone(),
            mass,
            hired,
            wage,
            employed,
            full,
        }
    }

    pub fn paid_productivity(&self, firm: Firm, tol: &S) -> bool {
        scalar::abs(self.wage[firm.index()].clone() - self.v.clone()) <= *tol
    }

    pub fn underpaid(&self, firm: Firm, tol: &S) -> bool {
        self.wage[firm.index()] < self.v.clone() - tol.clone()
    }

    pub fn overpaid(&self, firm: Firm, tol: &S) -> bool {
        self.employed[firm.index()] && self.wage[firm.index()] > self.v.clone() + tol.clone()
    }

    /// `f_i(v) = f(v)` up to the relative mass tolerance.
    pub fn hires_all(&self, firm: Firm, tol: &S) -> bool {
        self.mass.clone() - self.hired[firm.index()].clone() <= tol.clone() * self.mass.clone()
    }

    /// `f_i(v) ∈ (0, f(v))` with both ends tolerance-aware.
    pub fn hires_part(&self, firm: Firm, tol: &S) -> bool {
        self.employed[firm.index()] && !self.hires_all(firm, tol)
    }
}

/// Full employment at every level, and every employing firm pays exactly
/// productivity. Masses compare relative to the level mass (`tol * f`), wages
/// absolutely; a firm whose share is at most `tol` is treated as not hiring.
pub fn is_bertrand<S: Scalar>(alloc: &Allocation<S>, pop: &MarketPopulation<S>, tol: &S) -> BertrandCertificate {
    let mut failures = Vec::new();
    for k in 0..pop.len() {
        let facts = LevelFacts::new(alloc, pop, k, tol);
        if !facts.full {
            failures.push((k, BertrandFailure::FullEmployment));
        }
        for firm in Firm::BOTH {
            if facts.employed[firm.index()] && !facts.paid_productivity(firm, tol) {
                failures.push((k, BertrandFailure::WageEqualsProductivity(firm)));
            }
        }
    }
    BertrandCertificate { failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_set::IndexSet;
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    fn single(v: Exact) -> MarketPopulation<Exact> {
        MarketPopulation::new(vec![v], vec![q(1, 1)]).unwrap()
    }

    #[test]
    fn profit_zero_when_wage_equals_productivity() {
        let pop = single(q(1, 2));
        let f = FirmAllocation::vacant(1).with(0, IndexSet::full(), q(1, 2));
        assert_eq!(firm_profit(&f, &pop).unwrap().total, q(0, 1));
    }

    #[test]
    fn profit_negative_when_overpaying() {
        let pop = single(q(1, 2));
        let f = FirmAllocation::vacant(1).with(0, IndexSet::full(), q(3, 5));
        assert_eq!(firm_profit(&f, &pop).unwrap().total, q(-1, 10));
    }

    #[test]
    fn profit_scales_with_hired_share() {
        let pop = single(q(4, 5));
        let f = FirmAllocation::vacant(1).with(0, IndexSet::interval(q(0, 1), q(1, 2)).unwrap(), q(3, 10));
        let report = firm_profit(&f, &pop).unwrap();
        assert_eq!(report.total, q(1, 4));
        assert_eq!(report.per_level, vec![q(1, 4)]);
    }

    #[test]
    fn profit_rejects_misaligned_allocation() {
        let pop = single(q(1, 2));
        assert!(firm_profit(&FirmAllocation::<Exact>::vacant(2), &pop).is_err());
    }

    #[test]
    fn canonical_monopoly_is_bertrand() {
        let pop = MarketPopulation::new(vec![q(1, 4), q(3, 4)], vec![q(1, 2), q(1, 2)]).unwrap();
        let a = Allocation::new(
            FirmAllocation::everyone_at_productivity(&pop),
            FirmAllocation::vacant(2),
        );
        assert!(is_bertrand(&a, &pop, &q(0, 1)).holds());
    }

    #[test]
    fn underpayment_fails_wage_condition() {
        let pop = MarketPopulation::new(vec![q(1, 4), q(3, 4)], vec![q(1, 2), q(1, 2)]).unwrap();
        let f = FirmAllocation::vacant(2)
            .with(0, IndexSet::full(), q(3, 20))
            .with(1, IndexSet::full(), q(13, 20));
        let cert = is_bertrand(&Allocation::new(f, FirmAllocation::vacant(2)), &pop, &q(0, 1));
        assert_eq!(
            cert.failures,
            vec![
                (0, BertrandFailure::WageEqualsProductivity(Firm::One)),
                (1, BertrandFailure::WageEqualsProductivity(Firm::One)),
            ]
        );
    }

    #[test]
    fn even_split_at_productivity_is_bertrand() {
        let pop = MarketPopulation::new(vec![q(1, 4), q(3, 4)], vec![q(1, 2), q(1, 2)]).unwrap();
        let left = IndexSet::interval(q(0, 1), q(1, 2)).unwrap();
        let right = left.complement();
        let mut f1 = FirmAllocation::vacant(2);
        let mut f2 = FirmAllocation::vacant(2);
        for k in 0..2 {
            f1.set(k, left.clone(), pop.level(k).clone());
            f2.set(k, right.clone(), pop.level(k).clone());
        }
        let a = Allocation::new(f1.clone(), f2.clone());
        assert!(is_bertrand(&a, &pop, &q(0, 1)).holds());
        // Relabeling the shares leaves the verdict unchanged.
        assert!(is_bertrand(&Allocation::new(f2, f1), &pop, &q(0, 1)).holds());
    }

    #[test]
    fn float_tolerance_absorbs_rounding() {
        let pop = MarketPopulation::new(vec![0.3], vec![1.0]).unwrap();
        let f = FirmAllocation::vacant(1).with(0, IndexSet::full(), 0.1 + 0.2);
        let a = Allocation::new(f, FirmAllocation::vacant(1));
        assert!(!is_bertrand(&a, &pop, &0.0).holds());
        assert!(is_bertrand(&a, &pop, &1e-9).holds());
    }
}
