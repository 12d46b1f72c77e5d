//! Følner-set entropy: joins `(𝒲)_F`, the subadditive function
//! `m_{𝒲_1,𝒲_2}(F)`, its normalized limits `h^a`, and tail entropy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{h_topological, Schedule, CYLINDER_LABEL};
use crate::error::{Error, Result};
use crate::extreal::{Bracket, ExtReal, Mode};
use crate::group::{folner, FiniteSubset, GroupKind, GroupModel};
use crate::microstate::cover_count::{conditional_counts, CoverProfiles, DEFAULT_COVER_BUDGET};
use crate::report::{Cell, Check, Directionality, EntropyReport, Pipeline};
use crate::shift::{CoverMember, CoverSpec, ShiftSystem, Symbol};
use crate::system::System;

/// Patterns enumerated on a joined window when both covers are partitions.
pub const PARTITION_PATTERN_CAP: usize = 1 << 21;
/// Patterns enumerated on a joined window for general covers.
pub const COVER_PATTERN_CAP: usize = 1 << 16;

/// `⋁_{g∈F} g^{-1} 𝒲` on the window `F + W_0`.
#[derive(Clone, Debug)]
pub struct JoinCover {
    pub base: CoverSpec,
    pub f: FiniteSubset,
    pub window: FiniteSubset,
    /// Positions of `g + W_0` inside `window`, per `g` in `F`.
    positions: Vec<Vec<usize>>,
}

impl JoinCover {
    pub fn new(group: &GroupModel, base: &CoverSpec, f: &FiniteSubset) -> Self {
        let window = base.window.sum(group, f);
        JoinCover::on_window(group, base, f, window)
    }

    fn on_window(group: &GroupModel, base: &CoverSpec, f: &FiniteSubset, window: FiniteSubset) -> Self {
        let positions = f
            .elements()
            .iter()
            .map(|&g| {
                base.window
                    .elements()
                    .iter()
                    .map(|&h| window.position(&group.op(g, h)).expect("g + W0 inside the joined window"))
                    .collect()
            })
            .collect();
        JoinCover {
            base: base.clone(),
            f: f.clone(),
            window,
            positions,
        }
    }

    /// Member indices of `𝒲` containing each translate of the pattern.
    pub fn memberships(&self, pattern: &[Symbol]) -> Vec<Vec<u32>> {
        self.positions
            .iter()
            .map(|pos| {
                let sub: Vec<Symbol> = pos.iter().map(|&p| pattern[p]).collect();
                self.base.memberships(&sub)
            })
            .collect()
    }

    /// Upper bound on the number of members, `|𝒲|^{|F|}`.
    pub fn member_bound(&self) -> f64 {
        (self.base.len() as f64).powi(self.f.len() as i32)
    }
}

/// Largest dense cell table, in window patterns.
const TABLE_CAP: usize = 1 << 20;
const MISSING: u32 = u32::MAX;

/// Cell of a partition whose members are pattern sets or `X`, looked up by
/// the mixed-radix code of the window pattern.
struct CellIndex {
    whole: bool,
    radix: usize,
    table: Vec<u32>,
}

impl CellIndex {
    fn new(cover: &CoverSpec, alphabet: usize) -> Option<Self> {
        if !cover.is_partition() {
            return None;
        }
        if cover.is_whole() {
            return Some(CellIndex {
                whole: true,
                radix: alphabet,
                table: Vec::new(),
            });
        }
        let size = (alphabet as f64).powi(cover.window.len() as i32);
        if size > TABLE_CAP as f64 {
            return None;
        }
        let mut table = vec![MISSING; size as usize];
        for (i, m) in cover.members.iter().enumerate() {
            match m {
                CoverMember::Patterns(set) => {
                    for p in set {
                        table[code(p, alphabet)] = i as u32;
                    }
                }
                CoverMember::Whole => return None,
            }
        }
        Some(CellIndex {
            whole: false,
            radix: alphabet,
            table,
        })
    }
}

fn code(p: &[Symbol], radix: usize) -> usize {
    p.iter().fold(0, |acc, &a| acc * radix + a as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Key {
    Small(u128),
    Big(Vec<u32>),
}

/// Mixed-radix code of the cell of every translate.
struct Encoder<'a> {
    join: &'a JoinCover,
    index: CellIndex,
    radix: u128,
    small: bool,
}

impl<'a> Encoder<'a> {
    fn new(join: &'a JoinCover, index: CellIndex) -> Self {
        let k = join.base.len().max(1);
        let small = (k as f64).log2() * join.f.len() as f64 <= 126.0;
        Encoder {
            join,
            index,
            radix: k as u128,
            small,
        }
    }

    fn cell(&self, pattern: &[Symbol], pos: &[usize]) -> Result<u32> {
        let sub = pos.iter().fold(0, |a, &p| a * self.index.radix + pattern[p] as usize);
        let c = self.index.table[sub];
        if c == MISSING {
            let sub: Vec<Symbol> = pos.iter().map(|&p| pattern[p]).collect();
            return Err(Error::NotCovered(format!("{} misses {sub:?}", self.join.base.name)));
        }
        Ok(c)
    }

    fn small_key(&self, pattern: &[Symbol]) -> Result<u128> {
        if self.index.whole {
            return Ok(0);
        }
        let mut acc = 0u128;
        for pos in &self.join.positions {
            acc = acc * self.radix + self.cell(pattern, pos)? as u128;
        }
        Ok(acc)
    }

    fn key(&self, pattern: &[Symbol]) -> Result<Key> {
        if self.small {
            return self.small_key(pattern).map(Key::Small);
        }
        if self.index.whole {
            return Ok(Key::Small(0));
        }
        let mut big = Vec::with_capacity(self.join.positions.len());
        for pos in &self.join.positions {
            big.push(self.cell(pattern, pos)?);
        }
        Ok(Key::Big(big))
    }
}

/// Largest number of distinct `𝒲_1` keys sharing one `𝒲_2` key.
fn max_fiber<K: Ord>(
    sys: &ShiftSystem,
    window: &FiniteSubset,
    key: impl Fn(&[Symbol]) -> Result<(K, K)>,
) -> Result<usize> {
    let mut pairs = Vec::new();
    let mut err = None;
    sys.visit_language(window, PARTITION_PATTERN_CAP, &mut |p| {
        if pairs.len() >= PARTITION_PATTERN_CAP {
            err = Some(Error::cap(
                "patterns on the joined window",
                pairs.len() as f64 + 1.0,
                PARTITION_PATTERN_CAP as f64,
            ));
            return false;
        }
        match key(p) {
            Ok(kk) => {
                pairs.push(kk);
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    pairs.sort_unstable();
    pairs.dedup();
    let mut best = 0usize;
    let mut run = 0usize;
    for i in 0..pairs.len() {
        run = if i > 0 && pairs[i - 1].0 == pairs[i].0 { run + 1 } else { 1 };
        best = best.max(run);
    }
    Ok(best)
}

/// `m_{𝒲_1,𝒲_2}(F) = max_{K ∈ (𝒲_2)_F} log N((𝒲_1)_F, K)`, exact for
/// partitions and bracketed by set cover bounds otherwise.
pub fn m_value(sys: &ShiftSystem, w1: &CoverSpec, w2: &CoverSpec, f: &FiniteSubset) -> Result<Bracket> {
    let group = sys.group();
    if f.is_empty() {
        return Err(Error::invalid("F must be non-empty"));
    }
    let window = w1.window.sum(group, f).union(&w2.window.sum(group, f));
    let j1 = JoinCover::on_window(group, w1, f, window.clone());
    let j2 = JoinCover::on_window(group, w2, f, window.clone());
    let q = sys.alphabet_size();
    if let (Some(i1), Some(i2)) = (CellIndex::new(w1, q), CellIndex::new(w2, q)) {
        let e1 = Encoder::new(&j1, i1);
        let e2 = Encoder::new(&j2, i2);
        let best = if e1.small && e2.small {
            max_fiber(sys, &window, |p| Ok((e2.small_key(p)?, e1.small_key(p)?)))?
        } else {
            max_fiber(sys, &window, |p| Ok((e2.key(p)?, e1.key(p)?)))?
        };
        return Ok(Bracket::exact(ExtReal::ln_count(best as f64)));
    }
    let patterns = sys.language(&window, COVER_PATTERN_CAP)?;
    let mut rows1 = Vec::with_capacity(patterns.len());
    let mut rows2 = Vec::with_capacity(patterns.len());
    for p in &patterns {
        let (m1, m2) = (j1.memberships(p), j2.memberships(p));
        if m1.iter().chain(&m2).any(|m| m.is_empty()) {
            return Err(Error::NotCovered(format!("pattern {p:?} is not covered")));
        }
        rows1.push(m1);
        rows2.push(m2);
    }
    let c = conditional_counts(
        &CoverProfiles::from_memberships(rows1),
        &CoverProfiles::from_memberships(rows2),
        DEFAULT_COVER_BUDGET,
    );
    Ok(Bracket::new(ExtReal::ln_count(c.count.lo), ExtReal::ln_count(c.count.hi)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: u64,
    pub size: usize,
    pub m: Bracket,
    pub normalized: Bracket,
}

/// `m(F_n)` and `m(F_n)/|F_n|` along a Følner sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditiveTrace {
    pub points: Vec<TracePoint>,
}

impl SubadditiveTrace {
    /// Every step of the normalized `hi` series is non-increasing up to `tol`.
    pub fn non_increasing(&self, tol: f64) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].normalized.hi.value() <= w[0].normalized.hi.value() + tol)
    }

    /// The smallest normalized term, a bound from subadditivity.
    pub fn fekete_bound(&self) -> Bracket {
        Bracket::inf(self.points.iter().map(|p| p.normalized))
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.points.last()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmenableEstimate {
    pub report: EntropyReport,
    pub trace: SubadditiveTrace,
}

fn check_indices(indices: &[u64]) -> Result<()> {
    if indices.is_empty() || indices[0] == 0 || !indices.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("Følner indices must be positive and increasing"));
    }
    Ok(())
}

/// Følner indices used when none are given.
pub fn default_indices(sys: &System) -> Vec<u64> {
    match (sys, sys.group().kind()) {
        (System::Odometer(_), _) => vec![8, 16, 32, 64, 128],
        (_, GroupKind::Lattice(1)) => vec![4, 8, 12, 16, 20],
        (_, GroupKind::Lattice(_)) => vec![1, 2, 3, 4],
        (_, GroupKind::Cyclic(m)) => (1..=m.min(12)).collect(),
    }
}

/// Covers over which `h^a(G, X)` is taken when none are given: the standard
/// partition for subshifts, every level partition for odometers.
pub fn default_family(sys: &System) -> Result<Vec<CoverSpec>> {
    match sys {
        System::Shift(_) => Ok(vec![sys.standard_partition()?]),
        System::Odometer(o) => sys.refining_family(o.depth() as u64),
    }
}

/// `h^a(G, 𝒲_1 | 𝒲_2)` at the largest index, with the whole series.
pub fn h_a_conditional(sys: &System, w1: &CoverSpec, w2: &CoverSpec, indices: &[u64]) -> Result<AmenableEstimate> {
    check_indices(indices)?;
    let shift = sys.to_shift()?;
    let group = *shift.group();
    let points = indices
        .par_iter()
        .map(|&n| {
            let f = folner(&group, n)?.base;
            let m = m_value(&shift, w1, w2, &f)?;
            let k = 1.0 / f.len() as f64;
            Ok(TracePoint {
                n,
                size: f.len(),
                m,
                normalized: Bracket::new(m.lo.scale(k), m.hi.scale(k)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trace = SubadditiveTrace { points };
    let tag = format!("{}|{}", w1.name, w2.name);
    let cells = trace
        .points
        .iter()
        .map(|p| Cell {
            d: p.size,
            sigma: format!("folner({})", p.n),
            f_radius: p.n,
            delta: None,
            eps: None,
            lo: p.normalized.lo,
            hi: p.normalized.hi,
            mode: if p.m.lo == p.m.hi { Mode::Exact } else { Mode::Greedy },
            tag: tag.clone(),
        })
        .collect();
    let headline = trace.last().expect("non-empty indices").normalized;
    let report = EntropyReport::new(
        "h_a_conditional",
        Pipeline::Amenable,
        sys.name(),
        headline,
        Directionality::CertifiedUpper,
        cells,
    )
    .with_label(CYLINDER_LABEL)
    .with_check(Check::new(
        "normalized series non-increasing",
        trace.non_increasing(1e-9),
        format!("Fekete bound {}", trace.fekete_bound()),
    ));
    Ok(AmenableEstimate { report, trace })
}

fn combine(quantity: &str, sys: &System, parts: Vec<EntropyReport>, headline: Bracket) -> EntropyReport {
    let mut cells = Vec::new();
    let mut checks = Vec::new();
    for r in parts {
        cells.extend(r.cells);
        checks.extend(r.checks);
    }
    let mut report = EntropyReport::new(quantity, Pipeline::Amenable, sys.name(), headline, Directionality::Bracket, cells)
        .with_label(CYLINDER_LABEL);
    report.checks = checks;
    report
}

/// `sup_{𝒲 in family} h^a(G, 𝒲 | {X})`.
pub fn h_a_topological(sys: &System, family: &[CoverSpec], indices: &[u64]) -> Result<EntropyReport> {
    if family.is_empty() {
        return Err(Error::invalid("cover family must be non-empty"));
    }
    let whole = sys.whole_cover();
    let mut parts = Vec::new();
    let mut headline = Bracket::neg_inf();
    for w in family {
        let e = h_a_conditional(sys, w, &whole, indices)?;
        headline = headline.max(e.report.headline);
        parts.push(e.report);
    }
    Ok(combine("h_a_topological", sys, parts, headline))
}

/// `inf_{𝒱} sup_{𝒲} h^a(G, 𝒲 | 𝒱)`.
pub fn h_a_tail(sys: &System, v_family: &[CoverSpec], family: &[CoverSpec], indices: &[u64]) -> Result<EntropyReport> {
    if v_family.is_empty() || family.is_empty() {
        return Err(Error::invalid("cover families must be non-empty"));
    }
    let mut parts = Vec::new();
    let mut headline = Bracket::exact(ExtReal::POS_INF);
    for v in v_family {
        let mut sup = Bracket::neg_inf();
        for w in family {
            let e = h_a_conditional(sys, w, v, indices)?;
            sup = sup.max(e.report.headline);
            parts.push(e.report);
        }
        headline = headline.min(sup);
    }
    Ok(combine("h_a_tail", sys, parts, headline))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub system: String,
    pub sofic: Bracket,
    pub amenable: Bracket,
    pub midpoint_diff: f64,
    pub gap: f64,
    pub overlap: bool,
}

/// Brackets closer than this count as overlapping.
pub const OVERLAP_SLACK: f64 = 1e-12;

/// Runs `h_topological` and `h_a_topological` on the same system.
pub fn cross_check_sofic_amenable(
    sys: &System,
    sched: &Schedule,
    indices: &[u64],
) -> Result<(CrossCheck, EntropyReport, EntropyReport)> {
    let sofic = h_topological(sys, sched)?;
    let amenable = h_a_topological(sys, &default_family(sys)?, indices)?;
    let (a, b) = (sofic.headline, amenable.headline);
    let midpoint_diff = (a.midpoint().value() - b.midpoint().value()).abs();
    let gap = a.gap(&b);
    Ok((
        CrossCheck {
            system: sys.name(),
            sofic: a,
            amenable: b,
            midpoint_diff,
            gap,
            overlap: gap <= OVERLAP_SLACK,
        },
        sofic,
        amenable,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::shifted_folner;
    use crate::shift::transfer_matrix_entropy;
    use crate::GroupElement;

    fn box_n(sys: &ShiftSystem, n: i64) -> FiniteSubset {
        FiniteSubset::from_ints(sys.group(), &(0..n).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn full_shift_m_is_n_log2() {
        let sys = ShiftSystem::full_shift(2).unwrap();
        let std = CoverSpec::standard_partition(&sys);
        let whole = CoverSpec::whole(sys.group());
        for n in 1..=12 {
            let m = m_value(&sys, &std, &whole, &box_n(&sys, n)).unwrap();
            assert_eq!(m, Bracket::exact(ExtReal::ln_count(2f64.powi(n as i32))));
        }
    }

    #[test]
    fn golden_mean_m_examples() {
        let sys = ShiftSystem::golden_mean();
        let std = CoverSpec::standard_partition(&sys);
        let whole = CoverSpec::whole(sys.group());
        let m = m_value(&sys, &std, &whole, &box_n(&sys, 3)).unwrap();
        assert_eq!(m, Bracket::exact(ExtReal::ln_count(5.0)));
        let m = m_value(&sys, &whole, &std, &box_n(&sys, 7)).unwrap();
        assert_eq!(m, Bracket::exact(ExtReal::ZERO));
    }

    #[test]
    fn finer_conditioning_gives_zero() {
        let sys = ShiftSystem::golden_mean();
        let std = CoverSpec::standard_partition(&sys);
        let fine = CoverSpec::window_partition(&sys, 1).unwrap();
        let m = m_value(&sys, &std, &fine, &box_n(&sys, 6)).unwrap();
        assert_eq!(m, Bracket::exact(ExtReal::ZERO));
    }

    #[test]
    fn general_cover_path_agrees_with_partition_path() {
        let sys = ShiftSystem::full_shift(2).unwrap();
        let std = CoverSpec::standard_partition(&sys);
        let whole = CoverSpec::whole(sys.group());
        let mut generic = std.clone();
        generic.kind = crate::shift::CoverKind::Open;
        let f = box_n(&sys, 5);
        assert_eq!(m_value(&sys, &generic, &whole, &f).unwrap(), m_value(&sys, &std, &whole, &f).unwrap());
    }

    #[test]
    fn translation_invariance() {
        let sys = ShiftSystem::golden_mean();
        let std = CoverSpec::standard_partition(&sys);
        let whole = CoverSpec::whole(sys.group());
        let g = *sys.group();
        for n in 1..8 {
            let a = folner(&g, n).unwrap().base;
            let b = shifted_folner(&g, n, GroupElement::scalar(-5)).unwrap().base;
            assert_eq!(m_value(&sys, &std, &whole, &a).unwrap(), m_value(&sys, &std, &whole, &b).unwrap());
        }
    }

    #[test]
    fn golden_mean_h_a_near_oracle() {
        let sys = System::builtin("golden-mean").unwrap();
        let std = sys.standard_partition().unwrap();
        let e = h_a_conditional(&sys, &std, &sys.whole_cover(), &[5, 10, 20]).unwrap();
        let oracle = transfer_matrix_entropy(sys.as_shift().unwrap()).unwrap();
        let h = e.report.headline.hi.value();
        assert!((h - oracle).abs() <= 0.05, "{h} vs {oracle}");
        assert!((h - (17711f64).ln() / 20.0).abs() < 1e-12);
        assert!(e.trace.non_increasing(1e-12));
        assert!(e.report.checks_hold());
    }

    #[test]
    fn odometer_trend_to_zero() {
        let sys = System::builtin("odometer-2adic").unwrap();
        let r = h_a_topological(&sys, &default_family(&sys).unwrap(), &default_indices(&sys)).unwrap();
        assert!((r.headline.hi.value() - 64f64.ln() / 128.0).abs() < 1e-12);
    }

    #[test]
    fn tail_is_zero_for_full_shift() {
        let sys = System::builtin("full-shift-2").unwrap();
        let v = sys.refining_family(1).unwrap();
        let fam = sys.refining_family(1).unwrap();
        let r = h_a_tail(&sys, &v, &fam, &[4, 8]).unwrap();
        assert_eq!(r.headline.hi, ExtReal::ZERO);
        assert_eq!(r.pipeline, Pipeline::Amenable);
    }

    #[test]
    fn cross_check_full_shift_overlaps() {
        let sys = System::builtin("full-shift-2").unwrap();
        let sched = Schedule::default_for(&sys).unwrap();
        let (c, _, _) = cross_check_sofic_amenable(&sys, &sched, &[4, 8]).unwrap();
        assert!(c.overlap);
        assert!(c.midpoint_diff < 1e-12);
    }

    #[test]
    fn indices_validated() {
        let sys = System::builtin("full-shift-2").unwrap();
        let std = sys.standard_partition().unwrap();
        assert!(h_a_conditional(&sys, &std, &sys.whole_cover(), &[3, 2]).is_err());
        assert!(h_a_conditional(&sys, &std, &sys.whole_cover(), &[]).is_err());
    }
}
