//! Sofic entropy quantities assembled from microstate counts along a
//! finite schedule of sofic maps, windows, `δ` and `ε`.
//!
//! Every quantity is a table of `(1/d) log` count brackets per cell and a
//! headline: the max over σ replaces the limsup, and the scheduled lists
//! replace the inf over `F` and `δ` (and the sup over `ε` or covers).

pub mod classify;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{Bracket, CountBracket, ExtReal, Mode};
use crate::group::{FiniteSubset, GroupKind, GroupModel};
use crate::microstate::{
    bowen_ap_count, conditional_max, n_cover, n_separated, ApMode, CoverProfiles, Enumeration, Microstate,
    MicrostateSpace, DEFAULT_NODE_CAP,
};
use crate::microstate::{cover_count::DEFAULT_COVER_BUDGET, separated::DEFAULT_CLIQUE_BUDGET};
use crate::report::{Cell, Check, Directionality, EntropyReport, Pipeline};
use crate::shift::{CoverSpec, CylinderIndicator, InvariantMeasure};
use crate::sofic::SoficMap;
use crate::system::System;

pub use classify::{classify, ClassifyReport, DepthCheck, Evidence};

pub const CYLINDER_LABEL: &str = "cylinder-cover restricted";
const SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Search nodes per microstate enumeration.
    pub nodes: u64,
    pub clique_budget: u64,
    pub cover_budget: u64,
    /// Largest `k^d` enumerated exhaustively for AP counts.
    pub ap_exhaustive: f64,
    pub ap_samples: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            nodes: DEFAULT_NODE_CAP,
            clique_budget: DEFAULT_CLIQUE_BUDGET,
            cover_budget: DEFAULT_COVER_BUDGET,
            ap_exhaustive: (1u64 << 24) as f64,
            ap_samples: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub sigmas: Vec<SoficMap>,
    pub f_list: Vec<FiniteSubset>,
    pub delta_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub r: u64,
    pub caps: Caps,
    pub seed: u64,
    /// Threshold for "≤ 0" verdicts.
    pub tolerance: f64,
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x > 0.0 && x.is_finite()) && xs.windows(2).all(|w| w[0] > w[1])
}

impl Schedule {
    pub fn validate(&self, sys: &System) -> Result<()> {
        if self.sigmas.is_empty() || self.f_list.is_empty() || self.delta_list.is_empty() || self.eps_list.is_empty()
        {
            return Err(Error::invalid("schedule lists must be non-empty"));
        }
        let group = sys.group();
        if let Some(s) = self.sigmas.iter().find(|s| *s.group() != group) {
            return Err(Error::invalid(format!("sofic map {} is not over {group}", s.label())));
        }
        if self.f_list.iter().any(|f| f.is_empty()) {
            return Err(Error::invalid("F must be non-empty"));
        }
        if !self.f_list.windows(2).all(|w| w[0].is_subset(&w[1])) {
            return Err(Error::invalid("F list must increase under inclusion"));
        }
        if !strictly_decreasing(&self.delta_list) {
            return Err(Error::invalid("δ list must be positive and strictly decreasing"));
        }
        if !strictly_decreasing(&self.eps_list) {
            return Err(Error::invalid("ε list must be positive and strictly decreasing"));
        }
        let tail = sys.tail(self.r);
        if let Some(&eps) = self.eps_list.iter().find(|&&e| e <= 2.0 * tail) {
            return Err(Error::MarginViolation { eps, tail });
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        Ok(())
    }

    /// Desk-scale defaults: cyclic maps `d ∈ {4, 8, 12}` on `Z`, small tori
    /// on `Z^2`, regular representations on `Z/m`, and for odometers cyclic
    /// maps of size `2 m` and `4 m` with `δ` below the truncation resolution.
    pub fn default_for(sys: &System) -> Result<Schedule> {
        let group = sys.group();
        let ints = |xs: &[i64]| FiniteSubset::from_ints(&group, xs);
        let mut s = match (sys, group.kind()) {
            (System::Odometer(o), _) => {
                let m = o.modulus() as usize;
                let floor = 2.0 * o.resolution();
                let mut eps_list: Vec<f64> = [0.5, 0.25, 0.1].into_iter().filter(|&e| e > floor).collect();
                if eps_list.is_empty() {
                    eps_list.push(2.0 * floor);
                }
                Schedule {
                    sigmas: vec![SoficMap::cyclic(2 * m)?, SoficMap::cyclic(4 * m)?],
                    f_list: vec![ints(&[0, 1])?],
                    delta_list: vec![0.0005],
                    eps_list,
                    r: 0,
                    ..Schedule::base()
                }
            }
            (_, GroupKind::Lattice(1)) => Schedule {
                sigmas: [4, 8, 12].iter().map(|&d| SoficMap::cyclic(d)).collect::<Result<_>>()?,
                f_list: vec![ints(&[0, 1])?],
                delta_list: vec![0.25],
                eps_list: vec![0.3],
                r: 4,
                ..Schedule::base()
            },
            (_, GroupKind::Lattice(_)) => Schedule {
                sigmas: vec![SoficMap::torus(2, 2)?, SoficMap::torus(2, 3)?, SoficMap::torus(3, 3)?],
                f_list: vec![FiniteSubset::new(&group, group.generators())?],
                delta_list: vec![0.25],
                eps_list: vec![0.1],
                r: 7,
                ..Schedule::base()
            },
            (_, GroupKind::Cyclic(m)) => {
                let w0 = crate::shift::Metric::new(&group).w0();
                let k = sys.label_count().max(2) as f64;
                let copies: Vec<usize> = (1..=3)
                    .filter(|&c| ((c as u64 * m) as f64) * k.log2() <= 16.0)
                    .collect();
                let copies = if copies.is_empty() { vec![1] } else { copies };
                Schedule {
                    sigmas: copies.iter().map(|&c| SoficMap::regular(m, c)).collect::<Result<_>>()?,
                    f_list: vec![FiniteSubset::new(&group, group.generators())?],
                    delta_list: vec![0.25],
                    eps_list: vec![0.9 * w0],
                    r: m / 2,
                    ..Schedule::base()
                }
            }
        };
        if let System::Shift(shift) = sys {
            s.r = s.r.min(shift.r_max());
        }
        Ok(s)
    }

    fn base() -> Schedule {
        Schedule {
            sigmas: Vec::new(),
            f_list: Vec::new(),
            delta_list: Vec::new(),
            eps_list: Vec::new(),
            r: 0,
            caps: Caps::default(),
            seed: 0,
            tolerance: 0.05,
        }
    }
}

/// One `(σ, F, δ)` microstate set.
pub(crate) struct Slot<'a> {
    pub(crate) sigma: usize,
    pub(crate) f: usize,
    pub(crate) delta: usize,
    pub(crate) space: MicrostateSpace<'a>,
    pub(crate) points: Enumeration,
}

impl Slot<'_> {
    fn pessimistic(&self) -> Vec<&Microstate> {
        self.points.pessimistic()
    }

    fn optimistic(&self) -> Vec<&Microstate> {
        self.points.optimistic()
    }
}

/// Enumerates every `(σ, F, δ)` of the schedule, in schedule order.
pub(crate) fn grid<'a>(sys: &'a System, sched: &'a Schedule) -> Result<Vec<Slot<'a>>> {
    sched.validate(sys)?;
    let keys: Vec<(usize, usize, usize)> = (0..sched.sigmas.len())
        .flat_map(|s| {
            (0..sched.f_list.len()).flat_map(move |f| (0..sched.delta_list.len()).map(move |d| (s, f, d)))
        })
        .collect();
    keys.into_par_iter()
        .map(|(s, f, d)| {
            let space = MicrostateSpace::new(sys, &sched.sigmas[s], &sched.f_list[f], sched.r)?
                .with_node_cap(sched.caps.nodes);
            let points = space.enumerate(sched.delta_list[d])?;
            Ok(Slot {
                sigma: s,
                f,
                delta: d,
                space,
                points,
            })
        })
        .collect()
}

/// A cell's non-σ key and bracket.
struct Entry {
    key: Vec<usize>,
    bracket: Bracket,
}

/// `inf` over keys of the `max` over σ.
fn inf_of_max(entries: &[Entry]) -> Bracket {
    let mut by_key: BTreeMap<&[usize], Bracket> = BTreeMap::new();
    for e in entries {
        by_key
            .entry(&e.key)
            .and_modify(|b| *b = b.max(e.bracket))
            .or_insert(e.bracket);
    }
    if by_key.is_empty() {
        return Bracket::neg_inf();
    }
    Bracket::inf(by_key.into_values())
}

struct CellSpec {
    delta: Option<f64>,
    eps: Option<f64>,
    tag: String,
}

fn render(sched: &Schedule, group: &GroupModel, slot_sigma: usize, f: usize, spec: CellSpec, b: Bracket, mode: Mode) -> Cell {
    let sigma = &sched.sigmas[slot_sigma];
    Cell {
        d: sigma.d(),
        sigma: sigma.label().to_string(),
        f_radius: sched.f_list[f].radius(group),
        delta: spec.delta,
        eps: spec.eps,
        lo: b.lo,
        hi: b.hi,
        mode,
        tag: spec.tag,
    }
}

fn log_bracket(count: CountBracket, d: usize) -> Bracket {
    Bracket::normalized_log(count, d)
}

/// `N(𝒰, X)`, via the language on the cover window (or the odometer points).
pub fn cover_number(sys: &System, u: &CoverSpec) -> Result<CountBracket> {
    let patterns: Vec<Vec<crate::shift::Symbol>> = match sys {
        System::Shift(s) => s.language(&u.window, 1 << 16)?,
        System::Odometer(o) => o.points().map(|x| vec![x as crate::shift::Symbol]).collect(),
    };
    let mut rows = Vec::with_capacity(patterns.len());
    for p in &patterns {
        let m = u.memberships(p);
        if m.is_empty() {
            return Err(Error::NotCovered(format!("{} misses {p:?}", u.name)));
        }
        rows.push(vec![m]);
    }
    let profiles = CoverProfiles::from_memberships(rows);
    let all: Vec<usize> = (0..profiles.len()).collect();
    Ok(profiles.count(&all, DEFAULT_COVER_BUDGET).count)
}

/// `sup_ε inf_{F,δ} max_σ (1/d) log N_ε(X^d_{F,δ,σ})`.
pub fn h_topological(sys: &System, sched: &Schedule) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_topological_on(sys, sched, &slots)
}

pub(crate) fn h_topological_on(sys: &System, sched: &Schedule, slots: &[Slot<'_>]) -> Result<EntropyReport> {
    let group = sys.group();
    let jobs: Vec<(usize, usize)> = (0..slots.len())
        .flat_map(|i| (0..sched.eps_list.len()).map(move |e| (i, e)))
        .collect();
    let counts = jobs
        .par_iter()
        .map(|&(i, e)| {
            let s = &slots[i];
            n_separated(
                &s.space,
                &s.pessimistic(),
                &s.optimistic(),
                sched.eps_list[e],
                sched.caps.clique_budget,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    let mut keys = Vec::new();
    let mut per_eps: Vec<Vec<Entry>> = (0..sched.eps_list.len()).map(|_| Vec::new()).collect();
    for (&(i, e), c) in jobs.iter().zip(&counts) {
        let s = &slots[i];
        let b = log_bracket(c.count, s.space.d());
        cells.push(render(
            sched,
            &group,
            s.sigma,
            s.f,
            CellSpec {
                delta: Some(sched.delta_list[s.delta]),
                eps: Some(sched.eps_list[e]),
                tag: String::new(),
            },
            b,
            c.mode,
        ));
        keys.push((s.sigma, s.f, s.delta, vec![e], b.hi));
        per_eps[e].push(Entry {
            key: vec![s.f, s.delta],
            bracket: b,
        });
    }
    let headline = Bracket::sup(per_eps.iter().map(|es| inf_of_max(es)));
    let check = monotone_check_from(&keys);
    Ok(
        EntropyReport::new("h_topological", Pipeline::Sofic, sys.name(), headline, Directionality::Bracket, cells)
            .with_check(check),
    )
}

/// `inf_{F,δ} max_σ (1/d) log N(𝒰^d, X^d_{F,δ,σ})`, checked against `log N(𝒰, X)`.
pub fn h_cover(sys: &System, u: &CoverSpec, sched: &Schedule) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_cover_on(sys, u, sched, &slots)
}

pub(crate) fn h_cover_on(sys: &System, u: &CoverSpec, sched: &Schedule, slots: &[Slot<'_>]) -> Result<EntropyReport> {
    let counts = slots
        .par_iter()
        .map(|s| {
            let lo = n_cover(&s.space, u, &s.pessimistic(), sched.caps.cover_budget)?;
            let hi = n_cover(&s.space, u, &s.optimistic(), sched.caps.cover_budget)?;
            Ok((CountBracket::new(lo.count.lo.min(hi.count.hi), hi.count.hi), lo.mode.combine(hi.mode)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cells, entries, keys) = slot_cells(sys, sched, slots, &counts, None, &u.name);
    let headline = inf_of_max(&entries);
    let n = cover_number(sys, u)?;
    let bound = ExtReal::ln_count(n.hi);
    let holds = headline.hi.value() <= bound.value() + SLACK;
    let check = Check::new(
        "h(𝒰) ≤ log N(𝒰, X)",
        holds,
        format!("hi {} vs log N = {} (N in {})", headline.hi, bound, n),
    );
    Ok(
        EntropyReport::new("h_cover", Pipeline::Sofic, sys.name(), headline, Directionality::CertifiedUpper, cells)
            .with_label(CYLINDER_LABEL)
            .with_check(check)
            .with_check(monotone_check_from(&keys)),
    )
}

type Keys = Vec<(usize, usize, usize, Vec<usize>, ExtReal)>;

/// Larger `F` and smaller `δ` never raise `hi` for a fixed σ and extra key.
fn monotone_check_from(keys: &Keys) -> Check {
    let mut bad = 0;
    for a in keys {
        for b in keys {
            if a.0 == b.0 && a.3 == b.3 && a.1 <= b.1 && a.2 <= b.2 && (a.1, a.2) != (b.1, b.2) && b.4 > a.4 {
                bad += 1;
            }
        }
    }
    Check::new(
        "monotone in F and δ",
        bad == 0,
        if bad == 0 {
            "hi column non-increasing".to_string()
        } else {
            format!("{bad} increasing pairs")
        },
    )
}

fn slot_cells(
    sys: &System,
    sched: &Schedule,
    slots: &[Slot<'_>],
    counts: &[(CountBracket, Mode)],
    eps: Option<f64>,
    tag: &str,
) -> (Vec<Cell>, Vec<Entry>, Keys) {
    let group = sys.group();
    let mut cells = Vec::new();
    let mut entries = Vec::new();
    let mut keys = Vec::new();
    for (s, &(count, mode)) in slots.iter().zip(counts) {
        let b = log_bracket(count, s.space.d());
        cells.push(render(
            sched,
            &group,
            s.sigma,
            s.f,
            CellSpec {
                delta: Some(sched.delta_list[s.delta]),
                eps,
                tag: tag.to_string(),
            },
            b,
            mode,
        ));
        entries.push(Entry {
            key: vec![s.f, s.delta],
            bracket: b,
        });
        keys.push((s.sigma, s.f, s.delta, Vec::new(), b.hi));
    }
    (cells, entries, keys)
}

/// `inf_{F,δ} max_σ (1/d) log max_{V ∈ 𝒰_2^d} N(𝒰_1^d, X^d_{F,δ,σ} ∩ V)`.
pub fn h_cover_conditional(sys: &System, u1: &CoverSpec, u2: &CoverSpec, sched: &Schedule) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_cover_conditional_on(sys, u1, u2, sched, &slots)
}

pub(crate) fn h_cover_conditional_on(
    sys: &System,
    u1: &CoverSpec,
    u2: &CoverSpec,
    sched: &Schedule,
    slots: &[Slot<'_>],
) -> Result<EntropyReport> {
    let counts = slots
        .par_iter()
        .map(|s| {
            let lo = conditional_max(&s.space, u1, u2, &s.pessimistic(), sched.caps.cover_budget)?;
            let hi = conditional_max(&s.space, u1, u2, &s.optimistic(), sched.caps.cover_budget)?;
            Ok((CountBracket::new(lo.count.lo.min(hi.count.hi), hi.count.hi), lo.mode.combine(hi.mode)))
        })
        .collect::<Result<Vec<_>>>()?;
    let tag = format!("{}|{}", u1.name, u2.name);
    let (cells, entries, keys) = slot_cells(sys, sched, slots, &counts, None, &tag);
    let headline = inf_of_max(&entries);
    Ok(EntropyReport::new(
        "h_cover_conditional",
        Pipeline::Sofic,
        sys.name(),
        headline,
        Directionality::CertifiedUpper,
        cells,
    )
    .with_label(CYLINDER_LABEL)
    .with_check(monotone_check_from(&keys)))
}

/// `sup_{𝒰_1 in family} h(𝒰_1 | 𝒰_2)`.
pub fn h_space_conditional(
    sys: &System,
    u2: &CoverSpec,
    family: &[CoverSpec],
    sched: &Schedule,
) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_space_conditional_on(sys, u2, family, sched, &slots)
}

pub(crate) fn h_space_conditional_on(
    sys: &System,
    u2: &CoverSpec,
    family: &[CoverSpec],
    sched: &Schedule,
    slots: &[Slot<'_>],
) -> Result<EntropyReport> {
    if family.is_empty() {
        return Err(Error::invalid("cover family must be non-empty"));
    }
    let mut cells = Vec::new();
    let mut checks = Vec::new();
    let mut headline = Bracket::neg_inf();
    for u1 in family {
        let r = h_cover_conditional_on(sys, u1, u2, sched, slots)?;
        headline = headline.max(r.headline);
        cells.extend(r.cells);
        checks.extend(r.checks);
    }
    let mut report = EntropyReport::new(
        "h_space_conditional",
        Pipeline::Sofic,
        sys.name(),
        headline,
        Directionality::Bracket,
        cells,
    )
    .with_label(CYLINDER_LABEL);
    report.checks = checks;
    Ok(report)
}

/// `inf_{𝒱 in v_family} h(X | 𝒱)`.
pub fn h_star(sys: &System, v_family: &[CoverSpec], family: &[CoverSpec], sched: &Schedule) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_star_on(sys, v_family, family, sched, &slots)
}

pub(crate) fn h_star_on(
    sys: &System,
    v_family: &[CoverSpec],
    family: &[CoverSpec],
    sched: &Schedule,
    slots: &[Slot<'_>],
) -> Result<EntropyReport> {
    if v_family.is_empty() {
        return Err(Error::invalid("conditioning family must be non-empty"));
    }
    let mut cells = Vec::new();
    let mut his = Vec::new();
    let mut headline = Bracket::exact(ExtReal::POS_INF);
    for v in v_family {
        let r = h_space_conditional_on(sys, v, family, sched, slots)?;
        headline = headline.min(r.headline);
        his.push((v.name.clone(), r.headline.hi));
        cells.extend(r.cells);
    }
    let refining = his.windows(2).all(|w| w[1].1 <= w[0].1);
    let detail = his
        .iter()
        .map(|(n, h)| format!("{n}: {h}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(
        EntropyReport::new("h_star", Pipeline::Sofic, sys.name(), headline, Directionality::Bracket, cells)
            .with_label(CYLINDER_LABEL)
            .with_check(Check::new("non-increasing along the conditioning family", refining, detail)),
    )
}

/// `inf_{L,F,δ} max_σ (1/d) log N(𝒰^d, X^d_{F,δ,σ,μ,L})`.
pub fn h_measure_cover(
    sys: &System,
    mu: &InvariantMeasure,
    u: &CoverSpec,
    l_family: &[Vec<CylinderIndicator>],
    sched: &Schedule,
) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_measure_cover_on(sys, mu, u, l_family, sched, &slots)
}

pub(crate) fn h_measure_cover_on(
    sys: &System,
    mu: &InvariantMeasure,
    u: &CoverSpec,
    l_family: &[Vec<CylinderIndicator>],
    sched: &Schedule,
    slots: &[Slot<'_>],
) -> Result<EntropyReport> {
    if l_family.is_empty() {
        return Err(Error::invalid("L family must be non-empty"));
    }
    if !l_family.windows(2).all(|w| w[1].len() >= w[0].len() && w[1].starts_with(&w[0])) {
        return Err(Error::invalid("L family must be increasing"));
    }
    let jobs: Vec<(usize, usize)> = (0..l_family.len())
        .flat_map(|l| (0..slots.len()).map(move |i| (l, i)))
        .collect();
    let counts = jobs
        .par_iter()
        .map(|&(l, i)| {
            let s = &slots[i];
            let delta = sched.delta_list[s.delta];
            let mut pess = Vec::new();
            for m in s.pessimistic() {
                if s.space.empirical_check(m, mu, &l_family[l], delta)? {
                    pess.push(m);
                }
            }
            let mut opt = pess.clone();
            for m in &s.points.unknown {
                if s.space.empirical_check(m, mu, &l_family[l], delta)? {
                    opt.push(m);
                }
            }
            let lo = n_cover(&s.space, u, &pess, sched.caps.cover_budget)?;
            let hi = n_cover(&s.space, u, &opt, sched.caps.cover_budget)?;
            Ok((CountBracket::new(lo.count.lo.min(hi.count.hi), hi.count.hi), lo.mode.combine(hi.mode)))
        })
        .collect::<Result<Vec<_>>>()?;
    let group = sys.group();
    let mut cells = Vec::new();
    let mut entries = Vec::new();
    let mut per_l: Vec<Vec<Entry>> = (0..l_family.len()).map(|_| Vec::new()).collect();
    for (&(l, i), &(count, mode)) in jobs.iter().zip(&counts) {
        let s = &slots[i];
        let b = log_bracket(count, s.space.d());
        cells.push(render(
            sched,
            &group,
            s.sigma,
            s.f,
            CellSpec {
                delta: Some(sched.delta_list[s.delta]),
                eps: None,
                tag: format!("L={}", l_family[l].len()),
            },
            b,
            mode,
        ));
        entries.push(Entry {
            key: vec![l, s.f, s.delta],
            bracket: b,
        });
        per_l[l].push(Entry {
            key: vec![s.f, s.delta],
            bracket: b,
        });
    }
    let headline = inf_of_max(&entries);
    let trend = per_l
        .iter()
        .enumerate()
        .map(|(l, es)| format!("|L|={}: {}", l_family[l].len(), inf_of_max(es)))
        .collect::<Vec<_>>()
        .join(", ");
    let top = h_cover_on(sys, u, sched, slots)?;
    let holds = headline.hi <= top.headline.hi;
    Ok(EntropyReport::new(
        "h_measure_cover",
        Pipeline::Sofic,
        sys.name(),
        headline,
        Directionality::CertifiedUpper,
        cells,
    )
    .with_label(CYLINDER_LABEL)
    .with_check(Check::new("convergence in L", true, trend))
    .with_check(Check::new(
        "h_μ(𝒰) ≤ h(𝒰)",
        holds,
        format!("{} vs {}", headline.hi, top.headline.hi),
    )))
}

/// `inf_F inf_ε max_σ (1/d) log |AP(σ, α: F, ε)|`.
pub fn bowen_measure_entropy(
    sys: &System,
    mu: &InvariantMeasure,
    alpha: &CoverSpec,
    sched: &Schedule,
) -> Result<EntropyReport> {
    sched.validate(sys)?;
    let shift = sys
        .as_shift()
        .ok_or_else(|| Error::invalid("Bowen counts need a subshift"))?;
    let mode = ApMode::Auto {
        cap: sched.caps.ap_exhaustive,
        samples: sched.caps.ap_samples,
        seed: sched.seed,
    };
    let jobs: Vec<(usize, usize, usize)> = (0..sched.f_list.len())
        .flat_map(|f| {
            (0..sched.eps_list.len())
                .flat_map(move |e| (0..sched.sigmas.len()).map(move |s| (f, e, s)))
        })
        .collect();
    let counts = jobs
        .par_iter()
        .map(|&(f, e, s)| {
            bowen_ap_count(shift, &sched.sigmas[s], alpha, &sched.f_list[f], sched.eps_list[e], mu, mode)
        })
        .collect::<Result<Vec<_>>>()?;
    let group = sys.group();
    let mut cells = Vec::new();
    let mut entries = Vec::new();
    for (&(f, e, s), c) in jobs.iter().zip(&counts) {
        let b = log_bracket(c.count, sched.sigmas[s].d());
        cells.push(render(
            sched,
            &group,
            s,
            f,
            CellSpec {
                delta: None,
                eps: Some(sched.eps_list[e]),
                tag: alpha.name.clone(),
            },
            b,
            c.mode,
        ));
        entries.push(Entry {
            key: vec![f, e],
            bracket: b,
        });
    }
    let headline = inf_of_max(&entries);
    let bound = (alpha.len() as f64).ln();
    Ok(EntropyReport::new(
        "bowen_measure_entropy",
        Pipeline::Sofic,
        sys.name(),
        headline,
        Directionality::CertifiedUpper,
        cells,
    )
    .with_check(Check::new(
        "h_μ,Σ(α) ≤ log |α|",
        headline.hi.value() <= bound + SLACK,
        format!("{} vs {bound}", headline.hi),
    )))
}

/// `inf_{F,δ} max_σ (1/d) log max_{V ∈ 𝒰^d} N_ε(X^d_{F,δ,σ} ∩ V)`.
pub fn h_eps_conditional(sys: &System, eps: f64, u: &CoverSpec, sched: &Schedule) -> Result<EntropyReport> {
    let slots = grid(sys, sched)?;
    h_eps_conditional_on(sys, eps, u, sched, &slots)
}

/// `max_V N_ε(S ∩ V)`: `lo` over certified points, `hi` over all points,
/// with groups formed on the optimistic set (certified points first).
fn separated_in_groups(
    space: &MicrostateSpace<'_>,
    u: &CoverSpec,
    slot: &Slot<'_>,
    eps: f64,
    budget: u64,
) -> Result<(CountBracket, Mode)> {
    let pts = slot.optimistic();
    let k = slot.points.certified_in.len();
    if pts.is_empty() {
        return Ok((CountBracket::exact(0.0), Mode::Exact));
    }
    let (groups, complete) = CoverProfiles::build(space, u, &pts)?.groups();
    let (mut lo, mut hi, mut mode) = (0.0f64, 0.0f64, Mode::Exact);
    for g in &groups {
        let members: Vec<&Microstate> = g.iter().map(|&p| pts[p]).collect();
        let certified = g.iter().take_while(|&&p| p < k).count();
        let c = n_separated(space, &members[..certified], &members, eps, budget)?;
        lo = lo.max(c.count.lo);
        hi = hi.max(c.count.hi);
        mode = mode.combine(c.mode);
    }
    if !complete {
        let c = n_separated(space, &pts[..k], &pts, eps, budget)?;
        hi = c.count.hi;
        mode = mode.combine(c.mode).combine(Mode::Greedy);
    }
    Ok((CountBracket::new(lo.min(hi), hi), mode))
}

pub(crate) fn h_eps_conditional_on(
    sys: &System,
    eps: f64,
    u: &CoverSpec,
    sched: &Schedule,
    slots: &[Slot<'_>],
) -> Result<EntropyReport> {
    let tail = sys.tail(sched.r);
    if eps <= 2.0 * tail {
        return Err(Error::MarginViolation { eps, tail });
    }
    let budget = sched.caps.clique_budget;
    let counts = slots
        .par_iter()
        .map(|s| {
            separated_in_groups(&s.space, u, s, eps, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    let (cells, entries, keys) = slot_cells(sys, sched, slots, &counts, Some(eps), &u.name);
    let headline = inf_of_max(&entries);
    Ok(EntropyReport::new(
        "h_eps_conditional",
        Pipeline::Sofic,
        sys.name(),
        headline,
        Directionality::CertifiedUpper,
        cells,
    )
    .with_check(monotone_check_from(&keys)))
}

/// `h(ε_1 | 𝒰) ≤ h(𝒱 | 𝒰) ≤ h(ε_2 | 𝒰)` on brackets, for a cylinder cover
/// `𝒱` of diameter below `ε_1` and Lebesgue number above `ε_2`.
pub fn sandwich_check(
    sys: &System,
    u: &CoverSpec,
    v: &CoverSpec,
    eps1: f64,
    eps2: f64,
    sched: &Schedule,
) -> Result<Check> {
    let shift = sys
        .as_shift()
        .ok_or_else(|| Error::invalid("the sandwich check needs a subshift"))?;
    let diam = v.diameter_bound(shift);
    let leb = v.lebesgue_lower(shift);
    if !(diam < eps1 && leb > eps2) {
        return Err(Error::invalid(format!(
            "{} has diameter ≤ {diam} and Lebesgue number ≥ {leb}; need diameter < {eps1} and Lebesgue > {eps2}",
            v.name
        )));
    }
    let slots = grid(sys, sched)?;
    let a = h_eps_conditional_on(sys, eps1, u, sched, &slots)?.headline;
    let b = h_cover_conditional_on(sys, v, u, sched, &slots)?.headline;
    let c = h_eps_conditional_on(sys, eps2, u, sched, &slots)?.headline;
    let holds = a.lo <= b.hi && b.lo <= c.hi;
    Ok(Check::new(
        "sandwich",
        holds,
        format!("h(ε1|𝒰) {a}, h(𝒱|𝒰) {b}, h(ε2|𝒰) {c}"),
    ))
}

#[cfg(test)]
mod tests;
