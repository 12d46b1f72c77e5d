//! Minimal cover numbers `N(𝒰^d, S)` of finite microstate sets by product
//! covers, with `N(𝒰^d, ∅) = 0`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{Microstate, MicrostateSpace};
use crate::error::{Error, Result};
use crate::extreal::{CountBracket, Mode};
use crate::shift::{CoverSpec, Symbol};

/// Largest number of candidate products generated for exact set cover.
pub const CANDIDATE_CAP: usize = 1 << 16;
pub const DEFAULT_COVER_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverCount {
    pub count: CountBracket,
    pub mode: Mode,
}

impl CoverCount {
    fn exact(n: usize) -> Self {
        CoverCount {
            count: CountBracket::exact(n as f64),
            mode: Mode::Exact,
        }
    }

    fn max(self, other: CoverCount) -> CoverCount {
        CoverCount {
            count: self.count.max(other.count),
            mode: self.mode.combine(other.mode),
        }
    }
}

/// For every point and coordinate, the set of cover members containing
/// that coordinate, interned.
#[derive(Clone, Debug)]
pub struct CoverProfiles {
    sets: Vec<Vec<u32>>,
    profiles: Vec<Vec<u32>>,
}

impl CoverProfiles {
    pub fn build(space: &MicrostateSpace<'_>, cover: &CoverSpec, points: &[&Microstate]) -> Result<Self> {
        let mut cache: HashMap<Vec<Symbol>, Vec<u32>> = HashMap::new();
        let mut rows = Vec::with_capacity(points.len());
        for m in points {
            let pats = space.coordinate_patterns(m, &cover.window)?;
            let mut row = Vec::with_capacity(pats.len());
            for p in pats {
                if let Some(ms) = cache.get(&p) {
                    row.push(ms.clone());
                    continue;
                }
                let members = cover.memberships(&p);
                if members.is_empty() {
                    return Err(Error::NotCovered(format!(
                        "{} misses the pullback pattern {p:?}",
                        cover.name
                    )));
                }
                cache.insert(p, members.clone());
                row.push(members);
            }
            rows.push(row);
        }
        Ok(CoverProfiles::from_memberships(rows))
    }

    /// `rows[p][i]`: sorted member indices containing coordinate `i` of point `p`.
    pub fn from_memberships(rows: Vec<Vec<Vec<u32>>>) -> Self {
        let mut by_set: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets = Vec::new();
        let profiles = rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|members| {
                        *by_set.entry(members.clone()).or_insert_with(|| {
                            sets.push(members);
                            (sets.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect();
        CoverProfiles { sets, profiles }
    }

    /// The non-empty sets `S ∩ V` over products `V`; false if the candidate
    /// products were truncated.
    pub fn groups(&self) -> (Vec<Vec<usize>>, bool) {
        let all: Vec<usize> = (0..self.len()).collect();
        if self.determined(&all) {
            let mut g: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
            for p in all {
                g.entry(self.cell(p)).or_default().push(p);
            }
            return (g.into_values().collect(), true);
        }
        let mut cands = Vec::new();
        let complete = all.iter().all(|&p| self.products_of(p, &mut cands, CANDIDATE_CAP));
        cands.sort();
        cands.dedup();
        let groups = cands
            .par_iter()
            .map(|v| all.iter().copied().filter(|&p| self.contains(v, p)).collect())
            .collect();
        (groups, complete)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    fn determined(&self, subset: &[usize]) -> bool {
        subset
            .iter()
            .all(|&p| self.profiles[p].iter().all(|&s| self.sets[s as usize].len() == 1))
    }

    /// Member choice per coordinate when every coordinate lies in exactly one member.
    fn cell(&self, p: usize) -> Vec<u32> {
        self.profiles[p].iter().map(|&s| self.sets[s as usize][0]).collect()
    }

    /// Every product `V_1 x .. x V_d` containing point `p`, up to `cap` in total.
    fn products_of(&self, p: usize, out: &mut Vec<Vec<u32>>, cap: usize) -> bool {
        let choices: Vec<&[u32]> = self.profiles[p].iter().map(|&s| self.sets[s as usize].as_slice()).collect();
        let mut idx = vec![0usize; choices.len()];
        loop {
            if out.len() >= cap {
                return false;
            }
            out.push(idx.iter().zip(&choices).map(|(&k, c)| c[k]).collect());
            let mut i = choices.len();
            loop {
                if i == 0 {
                    return true;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < choices[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    fn contains(&self, product: &[u32], p: usize) -> bool {
        product
            .iter()
            .zip(&self.profiles[p])
            .all(|(v, &s)| self.sets[s as usize].binary_search(v).is_ok())
    }

    /// `N(𝒰^d, S)` for the points in `subset`.
    pub fn count(&self, subset: &[usize], budget: u64) -> CoverCount {
        if subset.is_empty() {
            return CoverCount::exact(0);
        }
        let mut uniq: BTreeMap<&[u32], usize> = BTreeMap::new();
        for &p in subset {
            uniq.entry(self.profiles[p].as_slice()).or_insert(p);
        }
        let reps: Vec<usize> = uniq.into_values().collect();
        if self.determined(&reps) {
            return CoverCount::exact(reps.len());
        }
        let fallback = || {
            let mut firsts: Vec<Vec<u32>> = reps
                .iter()
                .map(|&p| self.profiles[p].iter().map(|&s| self.sets[s as usize][0]).collect())
                .collect();
            firsts.sort();
            firsts.dedup();
            CoverCount {
                count: CountBracket::new(1.0, firsts.len() as f64),
                mode: Mode::Greedy,
            }
        };
        let mut cands = Vec::new();
        for &p in &reps {
            if !self.products_of(p, &mut cands, CANDIDATE_CAP) {
                return fallback();
            }
        }
        cands.sort();
        cands.dedup();
        if cands.len().saturating_mul(reps.len()) > 1 << 26 {
            return fallback();
        }
        let u = reps.len();
        let words = u.div_ceil(64);
        let cover_sets: Vec<Vec<u64>> = cands
            .par_iter()
            .map(|v| {
                let mut row = vec![0u64; words];
                for (k, &p) in reps.iter().enumerate() {
                    if self.contains(v, p) {
                        row[k / 64] |= 1 << (k % 64);
                    }
                }
                row
            })
            .collect();
        let (best, lower, exact) = set_cover(u, &cover_sets, budget);
        CoverCount {
            count: CountBracket::new(lower as f64, best as f64),
            mode: if exact { Mode::Exact } else { Mode::Greedy },
        }
    }
}

/// `N(𝒰^d, S)`.
pub fn n_cover(
    space: &MicrostateSpace<'_>,
    cover: &CoverSpec,
    points: &[&Microstate],
    budget: u64,
) -> Result<CoverCount> {
    let prof = CoverProfiles::build(space, cover, points)?;
    let all: Vec<usize> = (0..points.len()).collect();
    Ok(prof.count(&all, budget))
}

/// `max_{V in 𝒰_2^d} N(𝒰_1^d, S ∩ V)`.
pub fn conditional_max(
    space: &MicrostateSpace<'_>,
    u1: &CoverSpec,
    u2: &CoverSpec,
    points: &[&Microstate],
    budget: u64,
) -> Result<CoverCount> {
    if points.is_empty() {
        return Ok(CoverCount::exact(0));
    }
    let p1 = CoverProfiles::build(space, u1, points)?;
    let p2 = CoverProfiles::build(space, u2, points)?;
    Ok(conditional_counts(&p1, &p2, budget))
}

/// [`conditional_max`] on precomputed profiles of the same points.
pub fn conditional_counts(p1: &CoverProfiles, p2: &CoverProfiles, budget: u64) -> CoverCount {
    if p1.is_empty() {
        return CoverCount::exact(0);
    }
    let (groups, complete) = p2.groups();
    let best = groups
        .par_iter()
        .map(|g| p1.count(g, budget))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(CoverCount::exact(0), CoverCount::max);
    if complete {
        return best;
    }
    let all: Vec<usize> = (0..p1.len()).collect();
    let whole = p1.count(&all, budget);
    CoverCount {
        count: CountBracket::new(best.count.lo.min(whole.count.hi), whole.count.hi),
        mode: Mode::Greedy,
    }
}

/// Minimum set cover of `0..universe` by `sets`, as `(best, lower bound, exact)`.
pub fn set_cover(universe: usize, sets: &[Vec<u64>], budget: u64) -> (usize, usize, bool) {
    if universe == 0 {
        return (0, 0, true);
    }
    let words = universe.div_ceil(64);
    let mut full = vec![0u64; words];
    for k in 0..universe {
        full[k / 64] |= 1 << (k % 64);
    }
    let greedy = greedy_cover(&full, sets);
    let maxcard = sets.iter().map(|s| popcount(s)).max().unwrap_or(1).max(1);
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (j, s) in sets.iter().enumerate() {
        for (k, c) in containing.iter_mut().enumerate() {
            if s[k / 64] >> (k % 64) & 1 == 1 {
                c.push(j);
            }
        }
    }
    let mut bb = CoverSearch {
        sets,
        containing: &containing,
        best: greedy,
        nodes: 0,
        budget,
        aborted: false,
    };
    bb.search(full, 0);
    if bb.aborted {
        let lp = universe.div_ceil(maxcard);
        let ln = (greedy as f64 / (1.0 + (universe as f64).ln())).ceil() as usize;
        (bb.best, lp.max(ln).min(bb.best), false)
    } else {
        (bb.best, bb.best, true)
    }
}

/// Greedy set cover size.
pub fn greedy_cover(full: &[u64], sets: &[Vec<u64>]) -> usize {
    let mut unc = full.to_vec();
    let mut n = 0;
    while popcount(&unc) > 0 {
        let (j, gain) = sets
            .iter()
            .enumerate()
            .map(|(j, s)| (j, inter_count(s, &unc)))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("at least one set");
        assert!(gain > 0, "sets do not cover the universe");
        for (u, s) in unc.iter_mut().zip(&sets[j]) {
            *u &= !s;
        }
        n += 1;
    }
    n
}

fn popcount(b: &[u64]) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn inter_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

struct CoverSearch<'s> {
    sets: &'s [Vec<u64>],
    containing: &'s [Vec<usize>],
    best: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl CoverSearch<'_> {
    fn search(&mut self, unc: Vec<u64>, chosen: usize) {
        let left = popcount(&unc);
        if left == 0 {
            self.best = self.best.min(chosen);
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let maxgain = self.sets.iter().map(|s| inter_count(s, &unc)).max().unwrap_or(0);
        if maxgain == 0 || chosen + left.div_ceil(maxgain) >= self.best {
            return;
        }
        let mut pick = None;
        for (k, c) in self.containing.iter().enumerate() {
            if unc[k / 64] >> (k % 64) & 1 == 1 && pick.is_none_or(|(_, n)| c.len() < n) {
                pick = Some((k, c.len()));
            }
        }
        let (e, _) = pick.expect("an uncovered element");
        let mut opts: Vec<(usize, usize)> = self.containing[e]
            .iter()
            .map(|&j| (j, inter_count(&self.sets[j], &unc)))
            .collect();
        opts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (j, _) in opts {
            let next: Vec<u64> = unc.iter().zip(&self.sets[j]).map(|(u, s)| u & !s).collect();
            self.search(next, chosen + 1);
            if self.aborted {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::group::{FiniteSubset, GroupElement, GroupModel};
    use crate::shift::{CoverKind, CoverMember};
    use crate::sofic::SoficMap;
    use crate::system::System;
    use proptest::prelude::*;

    fn setup(d: usize) -> (System, SoficMap, FiniteSubset) {
        (
            System::builtin("full-shift-2").unwrap(),
            SoficMap::cyclic(d).unwrap(),
            FiniteSubset::from_ints(&GroupModel::integers(), &[1]).unwrap(),
        )
    }

    fn overlapping_cover() -> CoverSpec {
        let e = FiniteSubset::singleton(GroupElement::IDENTITY);
        CoverSpec::new(
            "overlap",
            e,
            vec![
                CoverMember::Patterns(BTreeSet::from([vec![0]])),
                CoverMember::Whole,
                CoverMember::Patterns(BTreeSet::from([vec![1]])),
            ],
            CoverKind::Open,
        )
        .unwrap()
    }

    #[test]
    fn cover_examples() {
        let (sys, sigma, f) = setup(3);
        let sp = MicrostateSpace::new(&sys, &sigma, &f, 3).unwrap();
        let e = sp.enumerate(0.5).unwrap();
        let pts = e.pessimistic();
        assert_eq!(pts.len(), 8);
        let whole = sys.whole_cover();
        assert_eq!(n_cover(&sp, &whole, &pts, 100).unwrap().count, CountBracket::exact(1.0));
        assert_eq!(n_cover(&sp, &whole, &[], 100).unwrap().count, CountBracket::exact(0.0));
        let std = sys.standard_partition().unwrap();
        assert_eq!(n_cover(&sp, &std, &pts, 100).unwrap().count, CountBracket::exact(8.0));
        assert_eq!(n_cover(&sp, &std, &pts[..1], 100).unwrap().count, CountBracket::exact(1.0));
        // A member equal to X makes one product enough.
        assert_eq!(
            n_cover(&sp, &overlapping_cover(), &pts, 100).unwrap().count,
            CountBracket::exact(1.0)
        );
    }

    #[test]
    fn conditional_examples() {
        let (sys, sigma, f) = setup(4);
        let sp = MicrostateSpace::new(&sys, &sigma, &f, 3).unwrap();
        let e = sp.enumerate(0.5).unwrap();
        let pts = e.pessimistic();
        let std = sys.standard_partition().unwrap();
        let whole = sys.whole_cover();
        assert_eq!(conditional_max(&sp, &std, &std, &pts, 100).unwrap().count.hi, 1.0);
        assert_eq!(conditional_max(&sp, &std, &whole, &pts, 100).unwrap().count.hi, 16.0);
        assert_eq!(conditional_max(&sp, &whole, &std, &pts, 100).unwrap().count.hi, 1.0);
        let fine = crate::shift::CoverSpec::window_partition(sys.as_shift().unwrap(), 1).unwrap();
        assert_eq!(conditional_max(&sp, &std, &fine, &pts, 100).unwrap().count.hi, 1.0);
    }

    #[test]
    fn missing_member_is_reported() {
        let (sys, sigma, f) = setup(2);
        let sp = MicrostateSpace::new(&sys, &sigma, &f, 3).unwrap();
        let e = sp.enumerate(0.5).unwrap();
        let half = CoverSpec::new(
            "half",
            FiniteSubset::singleton(GroupElement::IDENTITY),
            vec![CoverMember::Patterns(BTreeSet::from([vec![0]]))],
            CoverKind::Open,
        )
        .unwrap();
        assert!(matches!(n_cover(&sp, &half, &e.pessimistic(), 10), Err(Error::NotCovered(_))));
    }

    fn brute_cover(universe: usize, sets: &[Vec<u64>]) -> usize {
        let full: u64 = (1u64 << universe) - 1;
        (0u32..(1 << sets.len()))
            .filter(|mask| {
                let mut cov = 0u64;
                for (j, s) in sets.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        cov |= s[0];
                    }
                }
                cov & full == full
            })
            .map(|m| m.count_ones() as usize)
            .min()
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn set_cover_exact_and_greedy(universe in 1usize..10, raw in proptest::collection::vec(any::<u16>(), 1..9)) {
            let full: u64 = (1u64 << universe) - 1;
            let mut sets: Vec<Vec<u64>> = raw.iter().map(|&r| vec![r as u64 & full]).collect();
            // Singletons keep the instance feasible.
            for k in 0..universe {
                if !sets.iter().any(|s| s[0] >> k & 1 == 1) {
                    sets.push(vec![1 << k]);
                }
            }
            let (best, lower, exact) = set_cover(universe, &sets, 1 << 20);
            prop_assert!(exact);
            prop_assert_eq!(best, lower);
            if sets.len() <= 16 {
                prop_assert_eq!(best, brute_cover(universe, &sets));
            }
            let g = greedy_cover(&[full], &sets);
            prop_assert!(g >= best);
            prop_assert!(g as f64 <= best as f64 * (1.0 + (universe as f64).ln()) + 1e-9);
            let (b1, l1, _) = set_cover(universe, &sets, 1);
            prop_assert!(l1 <= best && best <= b1);
        }

        #[test]
        fn composition_inequality(d in 2usize..6, delta in 0.2f64..0.9, golden in any::<bool>(), r1 in 0u64..2, r2 in 0u64..2) {
            let sys = System::builtin(if golden { "golden-mean" } else { "full-shift-2" }).unwrap();
            let sigma = SoficMap::cyclic(d).unwrap();
            let f = FiniteSubset::from_ints(&GroupModel::integers(), &[1]).unwrap();
            let sp = MicrostateSpace::new(&sys, &sigma, &f, 3).unwrap();
            let e = sp.enumerate(delta).unwrap();
            let pts = e.optimistic();
            let shift = sys.as_shift().unwrap();
            let v1 = CoverSpec::window_partition(shift, r1).unwrap();
            let v2 = CoverSpec::window_partition(shift, r2).unwrap();
            let n1 = n_cover(&sp, &v1, &pts, 1 << 16).unwrap().count;
            let n2 = n_cover(&sp, &v2, &pts, 1 << 16).unwrap().count;
            let c = conditional_max(&sp, &v1, &v2, &pts, 1 << 16).unwrap().count;
            prop_assert!(n1.lo <= n2.hi * c.hi);
        }
    }
}
