use std::collections::BTreeMap;

use crate::index_set::IndexSet;
use crate::market::{Allocation, Firm, FirmAllocation, MarketPopulation};
use crate::payoff::LevelFacts;
use crate::scalar::{self, Scalar};

use super::classify::case_holds;
use super::{verify_block, BlockConfig, BlockError, BlockProposal, CaseHit, CaseLabel};

/// Builds a verified block for one classified case.
///
/// Every returned proposal has passed [`verify_block`]. Cases with a free
/// wage increment ε′ start at half the available slack (capped by
/// `cfg.epsilon_cap`) and halve it until the block verifies.
pub fn construct_block<S: Scalar>(
    alloc: &Allocation<S>,
    hit: &CaseHit,
    pop: &MarketPopulation<S>,
    cfg: &BlockConfig<S>,
) -> Result<BlockProposal<S>, BlockError> {
    let holds = !hit.levels.is_empty()
        && hit.levels.iter().all(|&k| {
            k < pop.len() && case_holds(hit.case, hit.firm, &LevelFacts::new(alloc, pop, k, &cfg.tol), &cfg.tol)
        });
    if !holds {
        return Err(BlockError::PredicateFails {
            case: hit.case,
            firm: hit.firm,
        });
    }
    let cx = Ctx { alloc, pop, cfg };
    let built = match hit.case {
        CaseLabel::Overpaid => cx.fire_overpaid(hit.firm, &hit.levels),
        CaseLabel::UnderemployedUnderpaid => cx.hire_unemployed(hit.firm, &hit.levels),
        CaseLabel::UnderemployedAtProductivity => cx.swap_for_unemployed(hit.firm, &hit.levels),
        CaseLabel::MonopsonyUnderpay => cx
            .poach_monopsony(hit.firm, &hit.levels)
            .or_else(|| cx.poach_cheap_set(hit.firm, &hit.levels)),
        CaseLabel::DuopsonyUnderpay => cx.outbid_shared(hit.firm, &hit.levels),
        CaseLabel::AsymmetricPoach => cx.poach_underpaid_rival(hit.firm, &hit.levels),
        CaseLabel::OracleFound => None,
    };
    built
        .map(|mut p| {
            p.levels = hit.levels.clone();
            p
        })
        .ok_or(BlockError::ConstructionFailed {
            case: hit.case,
            firm: hit.firm,
        })
}

struct Ctx<'a, S> {
    alloc: &'a Allocation<S>,
    pop: &'a MarketPopulation<S>,
    cfg: &'a BlockConfig<S>,
}

fn effective<S: Scalar>(fa: &FirmAllocation<S>, k: usize) -> S {
    if fa.is_employed(k) {
        fa.wage(k).clone()
    } else {
        S::zero()
    }
}

/// Sets a slot, vacating it when the hired set is empty.
fn place<S: Scalar>(fa: &mut FirmAllocation<S>, k: usize, hired: IndexSet<S>, wage: S) {
    if hired.is_empty() {
        fa.set(k, IndexSet::empty(), S::zero());
    } else {
        fa.set(k, hired, wage);
    }
}

/// Maximal runs of consecutive indices in an ascending list.
fn segments(levels: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &k in levels {
        match out.last_mut() {
            Some(seg) if *seg.last().expect("segments are non-empty") + 1 == k => seg.push(k),
            _ => out.push(vec![k]),
        }
    }
    out
}

fn params<S: Scalar>(pairs: Vec<(&str, S)>) -> BTreeMap<String, S> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

impl<S: Scalar> Ctx<'_, S> {
    fn own(&self, firm: Firm) -> &FirmAllocation<S> {
        self.alloc.firm(firm)
    }

    fn v(&self, k: usize) -> S {
        self.pop.level(k).clone()
    }

    fn epsilon_schedule(&self, slack: &S) -> Vec<S> {
        let mut eps = scalar::half(slack.clone());
        if let Some(cap) = &self.cfg.epsilon_cap {
            eps = scalar::min(eps, cap.clone());
        }
        let floor = S::strict_margin() * S::ratio(2, 1);
        let mut out = Vec::new();
        for _ in 0..=self.cfg.max_halvings {
            if eps <= S::zero() || (!S::EXACT && eps < floor) {
                break;
            }
            out.push(eps.clone());
            eps = scalar::half(eps);
        }
        out
    }

    /// Gain of a proposal when it verifies.
    fn verified_gain(&self, p: &BlockProposal<S>) -> Option<S> {
        let verdict = verify_block(self.alloc, p, self.pop);
        verdict.valid.then(|| verdict.gain())
    }

    fn checked(&self, p: BlockProposal<S>) -> Option<BlockProposal<S>> {
        self.verified_gain(&p).map(|_| p)
    }

    /// Fire every worker on the overpaid levels.
    fn fire_overpaid(&self, j: Firm, levels: &[usize]) -> Option<BlockProposal<S>> {
        let mut alt = self.own(j).clone();
        for &k in levels {
            place(&mut alt, k, IndexSet::empty(), S::zero());
        }
        self.checked(BlockProposal::new(j, alt, CaseLabel::Overpaid))
    }

    /// Hire everyone the rival does not employ, at the highest wage already
    /// paid at or below the level.
    fn hire_unemployed(&self, j: Firm, levels: &[usize]) -> Option<BlockProposal<S>> {
        let own = self.own(j);
        let rival = self.own(j.other());
        let mut alt = own.clone();
        let mut fallback = None;
        for &k in levels {
            let wage = if own.is_employed(k) {
                own.wage(k).clone()
            } else {
                own.sup_wage_below(k)
            };
            if wage >= self.v(k) {
                continue;
            }
            if fallback.is_none() {
                fallback = Some(wage.clone());
            }
            place(&mut alt, k, rival.hired(k).complement(), wage);
        }
        let mut p = BlockProposal::new(j, alt, CaseLabel::UnderemployedUnderpaid);
        p.parameters = params(vec![("fallback_wage", fallback?)]);
        self.checked(p)
    }

    /// On a run of levels bounded by flagged levels, release own workers and
    /// hire the unemployed at the highest wage paid below the run.
    fn swap_for_unemployed(&self, j: Firm, flagged: &[usize]) -> Option<BlockProposal<S>> {
        let own = self.own(j);
        let mut best: Option<(S, BlockProposal<S>, usize, usize)> = None;
        for (ai, &a) in flagged.iter().enumerate() {
            let s = own.sup_wage_below(a);
            for (bi, &b) in flagged.iter().enumerate().skip(ai) {
                let mut alt = own.clone();
                for k in a..=b {
                    place(&mut alt, k, self.alloc.unemployed(k), s.clone());
                }
                let p = BlockProposal::new(j, alt, CaseLabel::UnderemployedAtProductivity);
                if let Some(gain) = self.verified_gain(&p) {
                    if best.as_ref().is_none_or(|(g, ..)| gain > *g) {
                        best = Some((gain, p, ai, bi));
                    }
                }
            }
        }
        let (_, mut p, ai, bi) = best?;
        let (a, b) = (flagged[ai], flagged[bi]);
        let s = own.sup_wage_below(a);
        let v_lower = self.pop.cell_start(a);
        let v_upper = self.v(b);
        let mu = v_upper.clone() - v_lower.clone();
        let mut pp = vec![
            ("v_lower", v_lower.clone()),
            ("v_upper", v_upper),
            ("fallback_wage", s.clone()),
            ("delta", v_lower - s),
            ("mu_interval", mu.clone()),
        ];
        if mu > S::zero() {
            let run = &flagged[ai..=bi];
            let covered = run.iter().fold(S::zero(), |acc, &k| acc + self.pop.cell_width(k));
            let share = covered / mu.clone();
            let eps = run
                .iter()
                .map(|&k| self.alloc.unemployed_mass(k, self.pop) / self.pop.cell_width(k))
                .reduce(scalar::min)
                .expect("run is non-empty");
            let delta = pp[3].1.clone();
            let pmu = share.clone() * mu.clone();
            let bound = delta * pmu.clone() * eps.clone() + scalar::half(pmu.clone() * pmu) * eps.clone();
            pp.extend([("p", share), ("epsilon", eps), ("bound", bound)]);
        }
        p.parameters = params(pp);
        Some(p)
    }

    /// The rival of the monopsonist poaches a run of monopsonized levels at
    /// just above the monopsonist's wage, lifting its higher wages to keep
    /// its menu monotone.
    fn poach_monopsony(&self, j: Firm, flagged: &[usize]) -> Option<BlockProposal<S>> {
        let o = j.other();
        let mono = self.own(j);
        let poacher = self.own(o);
        let n = self.pop.len();
        for seg in segments(flagged) {
            for ai in 0..seg.len() {
                for bi in ai..seg.len() {
                    let (a, b) = (seg[ai], seg[bi]);
                    let w_p = poacher.sup_wage_below(a);
                    let slack = (a..=b)
                        .map(|l| self.v(l) - scalar::max(mono.wage(l).clone(), w_p.clone()))
                        .reduce(scalar::min)
                        .expect("run is non-empty");
                    if slack <= S::zero() {
                        continue;
                    }
                    for eps in self.epsilon_schedule(&slack) {
                        let mut alt = poacher.clone();
                        for l in a..=b {
                            let wage = scalar::max(
                                scalar::max(w_p.clone(), mono.wage(l).clone() + eps.clone()),
                                effective(poacher, l),
                            );
                            alt.set(l, IndexSet::full(), wage);
                        }
                        let top = mono.wage(b).clone() + eps.clone();
                        for l in b + 1..n {
                            if poacher.is_employed(l) {
                                let lifted = scalar::max(top.clone(), poacher.wage(l).clone());
                                alt.set(l, poacher.hired(l).clone(), lifted);
                            }
                        }
                        let mut p = BlockProposal::new(o, alt, CaseLabel::MonopsonyUnderpay);
                        if self.verified_gain(&p).is_some() {
                            p.parameters = params(vec![
                                ("subcase", S::one()),
                                ("epsilon_prime", eps),
                                ("fallback_wage", w_p),
                                ("v_lower", self.pop.cell_start(a)),
                                ("v_upper", self.v(b)),
                            ]);
                            return Some(p);
                        }
                    }
                }
            }
        }
        None
    }

    /// The monopsonist poaches every higher level where the rival pays less
    /// than the monopsonist already pays below, keeping its own wages.
    fn poach_cheap_set(&self, j: Firm, flagged: &[usize]) -> Option<BlockProposal<S>> {
        let own = self.own(j);
        let rival = self.own(j.other());
        let first = *flagged.first()?;
        let mut alt = own.clone();
        let mut poached = 0usize;
        for l in first + 1..self.pop.len() {
            if !rival.is_employed(l) {
                continue;
            }
            let cheap = flagged.iter().any(|&k| k < l && *rival.wage(l) < *own.wage(k));
            if !cheap {
                continue;
            }
            let wage = if own.is_employed(l) {
                own.wage(l).clone()
            } else {
                alt.sup_wage_below(l)
            };
            let gain = (self.v(l) - wage.clone()) * (self.pop.mass(l).clone() - own.hired_mass(l, self.pop));
            if gain > S::zero() {
                alt.set(l, IndexSet::full(), wage);
                poached += 1;
            }
        }
        if poached == 0 {
            return None;
        }
        let mut p = BlockProposal::new(j, alt, CaseLabel::MonopsonyUnderpay);
        p.parameters = params(vec![("subcase", S::ratio(2, 1))]);
        self.checked(p)
    }

    /// Hire the whole of every shared level at ε′ above the current wage,
    /// then restore monotonicity by a running maximum.
    fn outbid_shared(&self, j: Firm, flagged: &[usize]) -> Option<BlockProposal<S>> {
        let own = self.own(j);
        let slack = flagged
            .iter()
            .map(|&k| self.v(k) - own.wage(k).clone())
            .reduce(scalar::min)?;
        let eps_level = flagged
            .iter()
            .map(|&k| {
                let m = self.pop.mass(k).clone();
                let unfilled = (m.clone() - own.hired_mass(k, self.pop)) / m;
                scalar::min(self.v(k) - own.wage(k).clone(), unfilled)
            })
            .reduce(scalar::min)?;
        let mass_v = flagged.iter().fold(S::zero(), |acc, &k| acc + self.pop.mass(k).clone());
        let payroll = own.employed_mass(self.pop);
        for eps in self.epsilon_schedule(&slack) {
            let mut alt = own.clone();
            for &k in flagged {
                alt.set(k, IndexSet::full(), own.wage(k).clone() + eps.clone());
            }
            let mut floor = S::zero();
            for k in 0..self.pop.len() {
                if !alt.is_employed(k) {
                    continue;
                }
                if *alt.wage(k) < floor {
                    let hired = alt.hired(k).clone();
                    alt.set(k, hired, floor.clone());
                } else {
                    floor = alt.wage(k).clone();
                }
            }
            let mut p = BlockProposal::new(j, alt, CaseLabel::DuopsonyUnderpay);
            if self.verified_gain(&p).is_some() {
                let bound = (eps_level.clone() - eps.clone()) * eps_level.clone() * mass_v.clone()
                    - eps.clone() * payroll.clone();
                p.parameters = params(vec![
                    ("epsilon", eps_level),
                    ("epsilon_prime", eps),
                    ("mass_flagged", mass_v),
                    ("payroll", payroll),
                    ("bound", bound),
                ]);
                return Some(p);
            }
        }
        None
    }

    /// Release own at-productivity workers on a run ending at a flagged level
    /// and take the rival's underpaid workers (and the unemployed) at a wage
    /// just above everything the rival pays on the run.
    fn poach_underpaid_rival(&self, j: Firm, flagged: &[usize]) -> Option<BlockProposal<S>> {
        let own = self.own(j);
        let rival = self.own(j.other());
        let mut best: Option<(S, BlockProposal<S>)> = None;
        for &top in flagged {
            let mut rival_max = S::zero();
            for a in (0..=top).rev() {
                let w_o = effective(rival, a);
                if w_o >= self.v(a) {
                    break;
                }
                rival_max = scalar::max(rival_max, w_o);
                let lo = scalar::max(own.sup_wage_below(a), rival_max.clone());
                let hi = self.v(a);
                if lo >= hi {
                    break;
                }
                let mut eps = scalar::half(hi - lo.clone());
                if let Some(cap) = &self.cfg.epsilon_cap {
                    eps = scalar::min(eps, cap.clone());
                }
                let x = lo + eps.clone();
                let mut alt = own.clone();
                for l in a..=top {
                    place(&mut alt, l, own.hired(l).complement(), x.clone());
                }
                let mut p = BlockProposal::new(j, alt, CaseLabel::AsymmetricPoach);
                if let Some(gain) = self.verified_gain(&p) {
                    if best.as_ref().is_none_or(|(g, _)| gain > *g) {
                        p.parameters = params(vec![
                            ("v_i_prime", self.v(top)),
                            ("v_lower", self.v(a)),
                            ("wage", x.clone()),
                            ("delta", self.v(top) - x),
                            ("epsilon_prime", eps),
                        ]);
                        best = Some((gain, p));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
    }
}
