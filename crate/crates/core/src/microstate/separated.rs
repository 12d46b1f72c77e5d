//! Bounds on `N_ε`, the largest `(ρ_d, ε)`-separated subset of a microstate set.

use rayon::prelude::*;

use super::{Microstate, MicrostateSpace};
use crate::error::{Error, Result};
use crate::extreal::{CountBracket, Mode};

/// Largest vertex count handled with adjacency bitsets.
pub const BITSET_CAP: usize = 8192;
pub const DEFAULT_CLIQUE_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatedCount {
    pub count: CountBracket,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EdgeRule {
    /// Certified separated pairs only.
    Certified,
    /// Separated or undecided pairs.
    Possible,
}

/// `lo` is a separated set among `certified` points using certified
/// separations; `hi` bounds every separated set among `optimistic` points
/// using every pair that might be separated.
pub fn n_separated(
    space: &MicrostateSpace<'_>,
    certified: &[&Microstate],
    optimistic: &[&Microstate],
    eps: f64,
    budget: u64,
) -> Result<SeparatedCount> {
    let tail = space.tail();
    if eps <= 2.0 * tail {
        return Err(Error::MarginViolation { eps, tail });
    }
    let prefix = certified.len() <= optimistic.len()
        && certified.iter().zip(optimistic).all(|(a, b)| std::ptr::eq(*a, *b));
    let ((lo, lo_exact), (hi, hi_exact)) = if prefix && optimistic.len() <= BITSET_CAP {
        let (sure, possible) = adjacency(space, optimistic, eps);
        let k = certified.len();
        let sure = truncate(&sure, k);
        let (found, _, e1) = clique_or_trivial(&sure, k, budget);
        let (_, bound, e2) = clique_or_trivial(&possible, optimistic.len(), budget);
        ((found, e1), (bound, e2))
    } else {
        (
            clique_bounds(space, certified, eps, EdgeRule::Certified, budget, true),
            clique_bounds(space, optimistic, eps, EdgeRule::Possible, budget, false),
        )
    };
    let hi = hi.max(lo);
    Ok(SeparatedCount {
        count: CountBracket::new(lo as f64, hi as f64),
        mode: if lo_exact && hi_exact {
            Mode::Exact
        } else {
            Mode::Greedy
        },
    })
}

fn clique_or_trivial(adj: &[Vec<u64>], n: usize, budget: u64) -> (usize, usize, bool) {
    if n <= 1 {
        (n, n, true)
    } else {
        max_clique(adj, n, budget)
    }
}

/// Certified and possible separation graphs in one pass over the pairs.
fn adjacency(space: &MicrostateSpace<'_>, points: &[&Microstate], eps: f64) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let n = points.len();
    let words = n.div_ceil(64);
    let keys: Vec<_> = points.iter().map(|m| space.distance_keys(m)).collect();
    let kernel = space.distance_kernel();
    let rows: Vec<(Vec<u64>, Vec<u64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sure = vec![0u64; words];
            let mut possible = vec![0u64; words];
            for j in i + 1..n {
                match kernel.separation(&keys[i], &keys[j], eps) {
                    Some(true) => {
                        sure[j / 64] |= 1 << (j % 64);
                        possible[j / 64] |= 1 << (j % 64);
                    }
                    None => possible[j / 64] |= 1 << (j % 64),
                    Some(false) => {}
                }
            }
            (sure, possible)
        })
        .collect();
    let (mut sure, mut possible): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    symmetrize(&mut sure);
    symmetrize(&mut possible);
    (sure, possible)
}

fn symmetrize(adj: &mut [Vec<u64>]) {
    let n = adj.len();
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j / 64] >> (j % 64) & 1 == 1 {
                adj[j][i / 64] |= 1 << (i % 64);
            }
        }
    }
}

/// The induced graph on the first `k` vertices.
fn truncate(adj: &[Vec<u64>], k: usize) -> Vec<Vec<u64>> {
    let words = k.div_ceil(64);
    adj[..k]
        .iter()
        .map(|row| {
            let mut r = row[..words].to_vec();
            if !k.is_multiple_of(64) {
                if let Some(last) = r.last_mut() {
                    *last &= (1u64 << (k % 64)) - 1;
                }
            }
            r
        })
        .collect()
}

/// Returns the requested side (`want_lower`: a clique found; otherwise an
/// upper bound on the clique number) and whether it is exact.
fn clique_bounds(
    space: &MicrostateSpace<'_>,
    points: &[&Microstate],
    eps: f64,
    rule: EdgeRule,
    budget: u64,
    want_lower: bool,
) -> (usize, bool) {
    let n = points.len();
    if n <= 1 {
        return (n, true);
    }
    let keys: Vec<_> = points.iter().map(|m| space.distance_keys(m)).collect();
    let kernel = space.distance_kernel();
    let edge = |i: usize, j: usize| match kernel.separation(&keys[i], &keys[j], eps) {
        Some(true) => true,
        Some(false) => false,
        None => rule == EdgeRule::Possible,
    };
    if n > BITSET_CAP {
        if !want_lower {
            return (n, false);
        }
        let mut chosen: Vec<usize> = Vec::new();
        for v in 0..n {
            if chosen.iter().all(|&u| edge(u, v)) {
                chosen.push(v);
            }
        }
        return (chosen.len(), false);
    }
    let words = n.div_ceil(64);
    let mut adj: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u64; words];
            for j in i + 1..n {
                if edge(i, j) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    symmetrize(&mut adj);
    let (found, bound, exact) = max_clique(&adj, n, budget);
    if want_lower {
        (found, exact)
    } else {
        (bound, exact)
    }
}

/// Maximum clique by branch and bound with greedy colouring bounds.
/// Returns `(best found, upper bound, exact)`.
pub fn max_clique(adj: &[Vec<u64>], n: usize, budget: u64) -> (usize, usize, bool) {
    let words = n.div_ceil(64);
    let mut alive = vec![0u64; words];
    for v in 0..n {
        alive[v / 64] |= 1 << (v % 64);
    }
    // Vertices adjacent to every other live vertex lie in every maximum clique.
    let mut forced = 0;
    loop {
        let live = popcount(&alive);
        let mut removed = false;
        for v in 0..n {
            if alive[v / 64] >> (v % 64) & 1 == 0 {
                continue;
            }
            let deg = adj[v].iter().zip(&alive).map(|(a, b)| (a & b).count_ones() as usize).sum::<usize>();
            if deg + 1 == live {
                alive[v / 64] &= !(1 << (v % 64));
                forced += 1;
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    if popcount(&alive) == 0 {
        return (forced, forced, true);
    }
    let mut s = CliqueSearch {
        adj,
        best: 0,
        nodes: 0,
        budget,
        aborted: false,
    };
    let root_colours = s.colour(&alive).1.last().copied().unwrap_or(0);
    s.best = greedy_clique(adj, &alive);
    s.expand(alive, 0);
    let best = forced + s.best;
    if s.aborted {
        (best, forced + root_colours.max(s.best), false)
    } else {
        (best, best, true)
    }
}

fn popcount(b: &[u64]) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn first_bit(b: &[u64]) -> Option<usize> {
    b.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(k, &w)| k * 64 + w.trailing_zeros() as usize)
}

fn greedy_clique(adj: &[Vec<u64>], alive: &[u64]) -> usize {
    let mut cand = alive.to_vec();
    let mut size = 0;
    while let Some(v) = best_vertex(adj, &cand) {
        size += 1;
        for (c, a) in cand.iter_mut().zip(&adj[v]) {
            *c &= a;
        }
    }
    size
}

fn best_vertex(adj: &[Vec<u64>], cand: &[u64]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (k, &w) in cand.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let v = k * 64 + w.trailing_zeros() as usize;
            w &= w - 1;
            let deg: usize = adj[v].iter().zip(cand).map(|(a, c)| (a & c).count_ones() as usize).sum();
            if best.is_none_or(|(_, d)| deg > d) {
                best = Some((v, deg));
            }
        }
    }
    best.map(|(v, _)| v)
}

struct CliqueSearch<'g> {
    adj: &'g [Vec<u64>],
    best: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl CliqueSearch<'_> {
    /// Sequential greedy colouring; returns vertices with their colour numbers,
    /// colours non-decreasing.
    fn colour(&self, cand: &[u64]) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = cand.to_vec();
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut c = 0;
        while first_bit(&uncoloured).is_some() {
            c += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = first_bit(&q) {
                q[v / 64] &= !(1 << (v % 64));
                for (x, a) in q.iter_mut().zip(&self.adj[v]) {
                    *x &= !a;
                }
                uncoloured[v / 64] &= !(1 << (v % 64));
                order.push(v);
                colours.push(c);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, mut cand: Vec<u64>, size: usize) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let (order, colours) = self.colour(&cand);
        for k in (0..order.len()).rev() {
            if size + colours[k] <= self.best {
                return;
            }
            let v = order[k];
            let next: Vec<u64> = cand.iter().zip(&self.adj[v]).map(|(c, a)| c & a).collect();
            if next.iter().all(|&w| w == 0) {
                self.best = self.best.max(size + 1);
            } else {
                self.expand(next, size + 1);
                if self.aborted {
                    return;
                }
            }
            cand[v / 64] &= !(1 << (v % 64));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteSubset, GroupModel};
    use crate::sofic::SoficMap;
    use crate::system::System;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
        let mut adj = vec![vec![0u64; n.div_ceil(64)]; n];
        for &(a, b) in edges {
            adj[a][b / 64] |= 1 << (b % 64);
            adj[b][a / 64] |= 1 << (a % 64);
        }
        adj
    }

    fn brute_clique(n: usize, adj: &[Vec<u64>]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let ok = vs.iter().all(|&a| vs.iter().all(|&b| a == b || adj[a][b / 64] >> (b % 64) & 1 == 1));
            if ok {
                best = best.max(vs.len());
            }
        }
        best
    }

    #[test]
    fn small_graphs() {
        let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(max_clique(&c5, 5, 1000), (2, 2, true));
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(max_clique(&k4, 4, 1000), (4, 4, true));
        let empty = graph(3, &[]);
        assert_eq!(max_clique(&empty, 3, 1000).0, 1);
    }

    #[test]
    fn separated_examples() {
        let sys = System::builtin("full-shift-2").unwrap();
        let sigma = SoficMap::cyclic(2).unwrap();
        let f = FiniteSubset::from_ints(&GroupModel::integers(), &[1]).unwrap();
        let sp = MicrostateSpace::new(&sys, &sigma, &f, 4).unwrap();
        let e = sp.enumerate(0.5).unwrap();
        assert_eq!(e.certified_in.len(), 4);
        let pts = e.pessimistic();
        // w_0 = 1/3, so any ε in (2 t(R), w_0] separates all four labelings.
        let n = n_separated(&sp, &pts, &pts, 0.3, 1000).unwrap();
        assert_eq!(n.count, CountBracket::exact(4.0));
        let one = [pts[0]];
        assert_eq!(n_separated(&sp, &one, &one, 0.3, 1000).unwrap().count, CountBracket::exact(1.0));
        assert_eq!(n_separated(&sp, &[], &[], 0.3, 1000).unwrap().count, CountBracket::exact(0.0));
        assert!(matches!(
            n_separated(&sp, &pts, &pts, 0.05, 1000),
            Err(Error::MarginViolation { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn clique_matches_brute_force(n in 1usize..11, bits in proptest::collection::vec(any::<bool>(), 55)) {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k % bits.len()] { edges.push((a, b)); }
                    k += 1;
                }
            }
            let adj = graph(n, &edges);
            let (found, bound, exact) = max_clique(&adj, n, 1 << 20);
            prop_assert!(exact);
            prop_assert_eq!(found, brute_clique(n, &adj));
            prop_assert_eq!(bound, found);
            let (f2, b2, _) = max_clique(&adj, n, 1);
            prop_assert!(f2 <= found && found <= b2);
        }

        #[test]
        fn separated_monotone_in_eps(d in 3usize..7, e1 in 0.2f64..0.9, e2 in 0.2f64..0.9) {
            let sys = System::builtin("golden-mean").unwrap();
            let sigma = SoficMap::cyclic(d).unwrap();
            let f = FiniteSubset::from_ints(&GroupModel::integers(), &[1]).unwrap();
            let sp = MicrostateSpace::new(&sys, &sigma, &f, 4).unwrap();
            let e = sp.enumerate(0.5).unwrap();
            let (a, b) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let pess = e.pessimistic();
            let opt = e.optimistic();
            let na = n_separated(&sp, &pess, &opt, a, 1 << 20).unwrap();
            let nb = n_separated(&sp, &pess, &opt, b, 1 << 20).unwrap();
            prop_assert!(nb.count.lo <= na.count.hi);
        }
    }
}
