//! Market primitives: the worker population, allocations and offer menus.
//!
//! Productivity is discretized into a finite grid of levels, each carrying a
//! positive worker mass. Per-level vectors in allocations and menus are
//! aligned with [`MarketPopulation::levels`].

use std::fmt;

use crate::error::ModelError;
use crate::index_set::IndexSet;
use crate::scalar::{self, Scalar};

/// One of the two competing firms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub const BOTH: [Firm; 2] = [Firm::One, Firm::Two];

    pub fn other(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Firm::One => 0,
            Firm::Two => 1,
        }
    }

    /// 1-based number used in reports and files.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Firm> {
        match n {
            1 => Some(Firm::One),
            2 => Some(Firm::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Firm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "firm{}", self.number())
    }
}

/// Productivity grid with the worker mass at each level.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPopulation<S> {
    levels: Vec<S>,
    masses: Vec<S>,
    total_mass: S,
}

impl<S: Scalar> MarketPopulation<S> {
    pub fn new(levels: Vec<S>, masses: Vec<S>) -> Result<Self, ModelError> {
        if levels.len() != masses.len() {
            return Err(ModelError::LengthMismatch {
                levels: levels.len(),
                masses: masses.len(),
            });
        }
        if levels.is_empty() {
            return Err(ModelError::EmptyPopulation);
        }
        for (i, v) in levels.iter().enumerate() {
            if !v.is_finite() || *v < S::zero() || *v > S::one() {
                return Err(ModelError::LevelOutOfRange(v.render()));
            }
            if i > 0 && levels[i - 1] >= *v {
                return Err(ModelError::UnsortedLevels(i));
            }
        }
        for m in &masses {
            if !m.is_finite() || *m <= S::zero() {
                return Err(ModelError::NonPositiveMass(m.render()));
            }
        }
        let total_mass = masses.iter().cloned().fold(S::zero(), |a, b| a + b);
        Ok(Self {
            levels,
            masses,
            total_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[S] {
        &self.levels
    }

    pub fn masses(&self) -> &[S] {
        &self.masses
    }

    pub fn level(&self, k: usize) -> &S {
        &self.levels[k]
    }

    pub fn mass(&self, k: usize) -> &S {
        &self.masses[k]
    }

    pub fn total_mass(&self) -> &S {
        &self.total_mass
    }

    /// Smallest per-level mass (the discrete lower density bound).
    pub fn min_mass(&self) -> S {
        self.masses
            .iter()
            .cloned()
            .reduce(scalar::min)
            .expect("non-empty population")
    }

    pub fn max_mass(&self) -> S {
        self.masses
            .iter()
            .cloned()
            .reduce(scalar::max)
            .expect("non-empty population")
    }

    /// Position of an exact productivity value on the grid.
    pub fn index_of(&self, level: &S) -> Option<usize> {
        self.levels.iter().position(|v| v == level)
    }

    /// Width of the productivity cell `(v_{k-1}, v_k]` that level `k`
    /// represents, with `v_{-1} = 0`.
    pub fn cell_width(&self, k: usize) -> S {
        let lower = if k == 0 { S::zero() } else { self.levels[k - 1].clone() };
        self.levels[k].clone() - lower
    }

    /// Left edge of the cell for level `k`.
    pub fn cell_start(&self, k: usize) -> S {
        if k == 0 {
            S::zero()
        } else {
            self.levels[k - 1].clone()
        }
    }

    pub fn convert<T: Scalar>(&self) -> MarketPopulation<T> {
        MarketPopulation::new(
            self.levels.iter().map(scalar::convert).collect(),
            self.masses.iter().map(scalar::convert).collect(),
        )
        .expect("conversion preserves validity")
    }
}

/// What one firm does at one productivity level.
#[derive(Debug, Clone, PartialEq)]
pub struct Position<S> {
    pub hired: IndexSet<S>,
    pub wage: S,
}

impl<S: Scalar> Position<S> {
    pub fn vacant() -> Self {
        Self {
            hired: IndexSet::empty(),
            wage: S::zero(),
        }
    }

    pub fn new(hired: IndexSet<S>, wage: S) -> Self {
        Self { hired, wage }
    }

    pub fn is_employed(&self) -> bool {
        self.hired.measure() > S::zero()
    }
}

/// One firm's hires and paid wages across all levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmAllocation<S> {
    slots: Vec<Position<S>>,
}

impl<S: Scalar> FirmAllocation<S> {
    pub fn vacant(levels: usize) -> Self {
        Self {
            slots: (0..levels).map(|_| Position::vacant()).collect(),
        }
    }

    pub fn from_slots(slots: Vec<Position<S>>) -> Self {
        Self { slots }
    }

    /// Every worker at every level hired at wage equal to productivity.
    pub fn everyone_at_productivity(pop: &MarketPopulation<S>) -> Self {
        Self {
            slots: pop
                .levels()
                .iter()
                .map(|v| Position::new(IndexSet::full(), v.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Position<S>] {
        &self.slots
    }

    pub fn slot(&self, k: usize) -> &Position<S> {
        &self.slots[k]
    }

    pub fn set(&mut self, k: usize, hired: IndexSet<S>, wage: S) {
        self.slots[k] = Position::new(hired, wage);
    }

    pub fn with(mut self, k: usize, hired: IndexSet<S>, wage: S) -> Self {
        self.set(k, hired, wage);
        self
    }

    pub fn hired(&self, k: usize) -> &IndexSet<S> {
        &self.slots[k].hired
    }

    pub fn wage(&self, k: usize) -> &S {
        &self.slots[k].wage
    }

    pub fn share(&self, k: usize) -> S {
        self.slots[k].hired.measure()
    }

    pub fn is_employed(&self, k: usize) -> bool {
        self.slots[k].is_employed()
    }

    /// Hired mass `f_i(v)` at level `k`.
    pub fn hired_mass(&self, k: usize, pop: &MarketPopulation<S>) -> S {
        self.share(k) * pop.mass(k).clone()
    }

    pub fn employed_mass(&self, pop: &MarketPopulation<S>) -> S {
        (0..self.len()).fold(S::zero(), |acc, k| acc + self.hired_mass(k, pop))
    }

    /// Largest wage paid at employed levels strictly below `k`, or zero.
    pub fn sup_wage_below(&self, k: usize) -> S {
        self.slots[..k]
            .iter()
            .filter(|p| p.is_employed())
            .map(|p| p.wage.clone())
            .fold(S::zero(), scalar::max)
    }

    /// Largest wage paid at employed levels up to and including `k`, or zero.
    pub fn sup_wage_through(&self, k: usize) -> S {
        self.sup_wage_below(k + 1)
    }

    /// Checks this firm's own invariants: slot count, non-negative wages,
    /// zero wage off the hired support, and monotone wages on the support.
    pub fn violations(&self, firm: Firm, pop: &MarketPopulation<S>) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.len() != pop.len() {
            out.push(Violation::SlotCount {
                firm,
                expected: pop.len(),
                found: self.len(),
            });
            return out;
        }
        let mut running: Option<S> = None;
        for (k, slot) in self.slots.iter().enumerate() {
            if !slot.wage.is_finite() || slot.wage < S::zero() {
                out.push(Violation::NegativeWage { firm, level: k });
            }
            if !slot.is_employed() {
                if !slot.wage.is_zero() {
                    out.push(Violation::WageOffSupport { firm, level: k });
                }
                continue;
            }
            if let Some(prev) = &running {
                if slot.wage < *prev {
                    out.push(Violation::NonMonotone { firm, level: k });
                }
            }
            running = Some(match running {
                Some(prev) => scalar::max(prev, slot.wage.clone()),
                None => slot.wage.clone(),
            });
        }
        out
    }

    pub fn convert<T: Scalar>(&self) -> FirmAllocation<T> {
        FirmAllocation {
            slots: self
                .slots
                .iter()
                .map(|p| Position::new(p.hired.convert(), scalar::convert(&p.wage)))
                .collect(),
        }
    }
}

/// Hires and wages of both firms.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<S> {
    firms: [FirmAllocation<S>; 2],
}

impl<S: Scalar> Allocation<S> {
    pub fn new(firm1: FirmAllocation<S>, firm2: FirmAllocation<S>) -> Self {
        Self { firms: [firm1, firm2] }
    }

    pub fn vacant(levels: usize) -> Self {
        Self::new(FirmAllocation::vacant(levels), FirmAllocation::vacant(levels))
    }

    pub fn firm(&self, firm: Firm) -> &FirmAllocation<S> {
        &self.firms[firm.index()]
    }

    pub fn firm_mut(&mut self, firm: Firm) -> &mut FirmAllocation<S> {
        &mut self.firms[firm.index()]
    }

    pub fn with_firm(mut self, firm: Firm, alloc: FirmAllocation<S>) -> Self {
        self.firms[firm.index()] = alloc;
        self
    }

    pub fn len(&self) -> usize {
        self.firms[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.firms[0].is_empty()
    }

    /// Index set of workers at level `k` employed by neither firm.
    pub fn unemployed(&self, k: usize) -> IndexSet<S> {
        self.firms[0].hired(k).union(self.firms[1].hired(k)).complement()
    }

    /// Mass of unemployed workers at level `k`.
    pub fn unemployed_mass(&self, k: usize, pop: &MarketPopulation<S>) -> S {
        pop.mass(k).clone() - self.firms[0].hired_mass(k, pop) - self.firms[1].hired_mass(k, pop)
    }

    pub fn convert<T: Scalar>(&self) -> Allocation<T> {
        Allocation::new(self.firms[0].convert(), self.firms[1].convert())
    }
}

/// An invariant violated by an allocation or menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SlotCount {
        firm: Firm,
        expected: usize,
        found: usize,
    },
    /// Both firms claim the same workers at a level.
    Overlap {
        level: usize,
    },
    NonMonotone {
        firm: Firm,
        level: usize,
    },
    WageOffSupport {
        firm: Firm,
        level: usize,
    },
    NegativeWage {
        firm: Firm,
        level: usize,
    },
}

impl Violation {
    pub fn level(&self) -> Option<usize> {
        match self {
            Violation::SlotCount { .. } => None,
            Violation::Overlap { level }
            | Violation::NonMonotone { level, .. }
            | Violation::WageOffSupport { level, .. }
            | Violation::NegativeWage { level, .. } => Some(*level),
        }
    }

    /// Human-readable message naming the productivity value.
    pub fn describe<S: Scalar>(&self, pop: &MarketPopulation<S>) -> String {
        let at = |k: &usize| {
            pop.levels()
                .get(*k)
                .map(|v| v.render())
                .unwrap_or_else(|| format!("#{k}"))
        };
        match self {
            Violation::SlotCount { firm, expected, found } => {
                format!("{firm}: expected {expected} level slots, found {found}")
            }
            Violation::Overlap { level } => {
                format!("level {}: firms' hired index sets overlap", at(level))
            }
            Violation::NonMonotone { firm, level } => {
                format!("{firm}: wage decreases at level {}", at(level))
            }
            Violation::WageOffSupport { firm, level } => {
                format!("{firm}: nonzero wage without hires at level {}", at(level))
            }
            Violation::NegativeWage { firm, level } => {
                format!("{firm}: negative wage at level {}", at(level))
            }
        }
    }
}

/// Lists every violated allocation invariant; empty means valid.
pub fn validate_allocation<S: Scalar>(alloc: &Allocation<S>, pop: &MarketPopulation<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    for firm in Firm::BOTH {
        out.extend(alloc.firm(firm).violations(firm, pop));
    }
    if out.iter().any(|v| matches!(v, Violation::SlotCount { .. })) {
        return out;
    }
    for k in 0..pop.len() {
        if !alloc
            .firm(Firm::One)
            .hired(k)
            .is_disjoint_from(alloc.firm(Firm::Two).hired(k))
        {
            out.push(Violation::Overlap { level: k });
        }
    }
    out.sort_by_key(|v| v.level());
    out
}

/// A wage offer to a set of workers at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Offer<S> {
    pub offered: IndexSet<S>,
    pub wage: S,
}

impl<S: Scalar> Offer<S> {
    pub fn none() -> Self {
        Self {
            offered: IndexSet::empty(),
            wage: S::zero(),
        }
    }

    pub fn is_active(&self) -> bool {
        self.offered.measure() > S::zero()
    }
}

/// One firm's strategy: offered index sets and one wage per level.
///
/// Wages on levels without offers are normalized to zero and excluded from
/// the monotonicity requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferMenu<S> {
    slots: Vec<Offer<S>>,
}

impl<S: Scalar> OfferMenu<S> {
    pub fn new(slots: Vec<Offer<S>>) -> Result<Self, ModelError> {
        let slots: Vec<Offer<S>> = slots
            .into_iter()
            .map(|o| if o.is_active() { o } else { Offer::none() })
            .collect();
        let mut running: Option<S> = None;
        for o in slots.iter().filter(|o| o.is_active()) {
            if !o.wage.is_finite() || o.wage < S::zero() {
                return Err(ModelError::InvalidWage(o.wage.render()));
            }
            if let Some(prev) = &running {
                if o.wage < *prev {
                    return Err(ModelError::NonMonotoneMenu(o.wage.render()));
                }
            }
            running = Some(o.wage.clone());
        }
        Ok(Self { slots })
    }

    pub fn silent(levels: usize) -> Self {
        Self {
            slots: (0..levels).map(|_| Offer::none()).collect(),
        }
    }

    /// Offers every worker a wage equal to her productivity.
    pub fn at_productivity(pop: &MarketPopulation<S>) -> Self {
        Self {
            slots: pop
                .levels()
                .iter()
                .map(|v| Offer {
                    offered: IndexSet::full(),
                    wage: v.clone(),
                })
                .collect(),
        }
    }

    /// Offers exactly the hired workers their paid wage.
    pub fn from_allocation(alloc: &FirmAllocation<S>) -> Result<Self, ModelError> {
        Self::new(
            alloc
                .slots()
                .iter()
                .map(|p| Offer {
                    offered: p.hired.clone(),
                    wage: p.wage.clone(),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Offer<S>] {
        &self.slots
    }

    pub fn slot(&self, k: usize) -> &Offer<S> {
        &self.slots[k]
    }

    /// True when active wages are non-negative and non-decreasing.
    pub fn is_monotone(&self) -> bool {
        let mut running: Option<&S> = None;
        for o in self.slots.iter().filter(|o| o.is_active()) {
            if o.wage < S::zero() {
                return false;
            }
            if let Some(prev) = running {
                if o.wage < *prev {
                    return false;
                }
            }
            running = Some(&o.wage);
        }
        true
    }

    pub fn convert<T: Scalar>(&self) -> OfferMenu<T> {
        OfferMenu {
            slots: self
                .slots
                .iter()
                .map(|o| Offer {
                    offered: o.offered.convert(),
                    wage: scalar::convert(&o.wage),
                })
                .collect(),
        }
    }
}

/// Menus of both firms.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferProfile<S> {
    menus: [OfferMenu<S>; 2],
}

impl<S: Scalar> OfferProfile<S> {
    pub fn new(firm1: OfferMenu<S>, firm2: OfferMenu<S>) -> Self {
        Self { menus: [firm1, firm2] }
    }

    /// Both firms offer every worker her productivity.
    pub fn canonical_bertrand(pop: &MarketPopulation<S>) -> Self {
        Self::new(OfferMenu::at_productivity(pop), OfferMenu::at_productivity(pop))
    }

    /// Each firm offers exactly its hired workers their paid wage; this
    /// profile induces `alloc` under any tie policy.
    pub fn from_allocation(alloc: &Allocation<S>) -> Result<Self, ModelError> {
        Ok(Self::new(
            OfferMenu::from_allocation(alloc.firm(Firm::One))?,
            OfferMenu::from_allocation(alloc.firm(Firm::Two))?,
        ))
    }

    pub fn menu(&self, firm: Firm) -> &OfferMenu<S> {
        &self.menus[firm.index()]
    }

    pub fn with_menu(mut self, firm: Firm, menu: OfferMenu<S>) -> Self {
        self.menus[firm.index()] = menu;
        self
    }

    pub fn convert<T: Scalar>(&self) -> OfferProfile<T> {
        OfferProfile::new(self.menus[0].convert(), self.menus[1].convert())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    fn quarter_grid() -> MarketPopulation<Exact> {
        MarketPopulation::new(vec![q(1, 4), q(1, 2), q(3, 4), q(1, 1)], vec![q(1, 4); 4]).unwrap()
    }

    #[test]
    fn population_totals_mass() {
        let pop = quarter_grid();
        assert_eq!(pop.total_mass(), &q(1, 1));
        let single = MarketPopulation::new(vec![q(1, 2)], vec![q(1, 1)]).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn population_rejects_bad_inputs() {
        assert_eq!(
            MarketPopulation::new(vec![q(1, 2), q(2, 5)], vec![q(1, 1), q(1, 1)]),
            Err(ModelError::UnsortedLevels(1))
        );
        assert!(matches!(
            MarketPopulation::new(vec![q(3, 2)], vec![q(1, 1)]),
            Err(ModelError::LevelOutOfRange(_))
        ));
        assert!(matches!(
            MarketPopulation::new(vec![q(1, 2)], vec![q(0, 1)]),
            Err(ModelError::NonPositiveMass(_))
        ));
        assert!(matches!(
            MarketPopulation::new(vec![q(1, 2)], vec![]),
            Err(ModelError::LengthMismatch { .. })
        ));
        assert!(MarketPopulation::<f64>::new(vec![0.5], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn bertrand_monopoly_is_valid() {
        let pop = quarter_grid();
        let a = Allocation::new(
            FirmAllocation::everyone_at_productivity(&pop),
            FirmAllocation::vacant(4),
        );
        assert!(validate_allocation(&a, &pop).is_empty());
    }

    #[test]
    fn decreasing_wage_flags_the_higher_level() {
        let pop = MarketPopulation::new(vec![q(1, 2), q(4, 5)], vec![q(1, 1), q(1, 1)]).unwrap();
        let f1 = FirmAllocation::vacant(2)
            .with(0, IndexSet::full(), q(3, 5))
            .with(1, IndexSet::full(), q(2, 5));
        let v = validate_allocation(&Allocation::new(f1, FirmAllocation::vacant(2)), &pop);
        assert_eq!(
            v,
            vec![Violation::NonMonotone {
                firm: Firm::One,
                level: 1
            }]
        );
    }

    #[test]
    fn overlapping_hires_flagged() {
        let pop = MarketPopulation::new(vec![q(1, 2)], vec![q(1, 1)]).unwrap();
        let set = IndexSet::interval(q(0, 1), q(7, 10)).unwrap();
        let a = Allocation::new(
            FirmAllocation::vacant(1).with(0, set.clone(), q(1, 2)),
            FirmAllocation::vacant(1).with(0, set, q(1, 2)),
        );
        assert_eq!(validate_allocation(&a, &pop), vec![Violation::Overlap { level: 0 }]);
    }

    #[test]
    fn wage_without_hires_flagged() {
        let pop = MarketPopulation::new(vec![q(1, 2)], vec![q(1, 1)]).unwrap();
        let a = Allocation::new(
            FirmAllocation::vacant(1).with(0, IndexSet::empty(), q(1, 4)),
            FirmAllocation::vacant(1),
        );
        assert_eq!(
            validate_allocation(&a, &pop),
            vec![Violation::WageOffSupport {
                firm: Firm::One,
                level: 0
            }]
        );
    }

    #[test]
    fn monotonicity_ignores_unhired_levels() {
        let pop = quarter_grid();
        let f = FirmAllocation::vacant(4)
            .with(0, IndexSet::full(), q(1, 4))
            .with(3, IndexSet::full(), q(1, 2));
        assert!(f.violations(Firm::One, &pop).is_empty());
        assert_eq!(f.sup_wage_below(3), q(1, 4));
        assert_eq!(f.sup_wage_below(0), q(0, 1));
    }

    #[test]
    fn menu_normalizes_unoffered_wages() {
        let m = OfferMenu::new(vec![
            Offer {
                offered: IndexSet::full(),
                wage: q(1, 2),
            },
            Offer {
                offered: IndexSet::empty(),
                wage: q(1, 10),
            },
            Offer {
                offered: IndexSet::full(),
                wage: q(3, 5),
            },
        ])
        .unwrap();
        assert_eq!(m.slot(1).wage, q(0, 1));
        assert!(m.is_monotone());
        assert!(OfferMenu::new(vec![
            Offer {
                offered: IndexSet::full(),
                wage: q(1, 2)
            },
            Offer {
                offered: IndexSet::full(),
                wage: q(1, 4)
            },
        ])
        .is_err());
    }
}
