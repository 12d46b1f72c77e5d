//! Higher-block presentation of a one-dimensional SFT.

use std::collections::{HashSet, VecDeque};

use super::{ShiftSystem, Symbol};
use crate::error::{Error, Result};
use crate::group::{FiniteSubset, GroupKind};

/// Largest number of block states before a system counts as not recodable.
pub const STATE_CAP: usize = 1 << 16;

/// States are the locally allowed `k`-words (`k = max(span - 1, 1)`), edges
/// the locally allowed `(k+1)`-words.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGraph {
    q: usize,
    k: usize,
    succ: Vec<Vec<u32>>,
    essential: Vec<bool>,
}

impl BlockGraph {
    pub fn build(sys: &ShiftSystem) -> Result<Self> {
        if sys.group().kind() != GroupKind::Lattice(1) {
            return Err(Error::NotRecodable("block graphs need the group Z".into()));
        }
        let q = sys.alphabet_size();
        let rules: Vec<(Vec<usize>, Vec<Symbol>)> = sys
            .forbidden()
            .iter()
            .map(|f| {
                let base = f.shape.elements()[0].0[0];
                let offs = f
                    .shape
                    .elements()
                    .iter()
                    .map(|g| (g.0[0] - base) as usize)
                    .collect();
                (offs, f.pattern.clone())
            })
            .collect();
        let span = rules
            .iter()
            .map(|(o, _)| o.last().copied().unwrap_or(0) + 1)
            .max()
            .unwrap_or(1);
        let k = span.saturating_sub(1).max(1);
        let n_states = (q as f64).powi(k as i32);
        if n_states > STATE_CAP as f64 {
            return Err(Error::NotRecodable(format!(
                "{q}^{k} block states exceed the cap {STATE_CAP}"
            )));
        }
        let n_states = n_states as usize;
        let allowed = |w: &[Symbol]| {
            rules.iter().all(|(offs, pat)| {
                let last = offs.last().copied().unwrap_or(0);
                if last >= w.len() {
                    return true;
                }
                (0..w.len() - last).all(|h| !offs.iter().zip(pat).all(|(&o, &b)| w[h + o] == b))
            })
        };
        let mut succ = vec![Vec::new(); n_states];
        let mut word = vec![0 as Symbol; k + 1];
        for (s, out) in succ.iter_mut().enumerate() {
            decode(s, q, &mut word[..k]);
            if !allowed(&word[..k]) {
                continue;
            }
            for a in 0..q {
                word[k] = a as Symbol;
                if allowed(&word) {
                    out.push(((s * q + a) % n_states) as u32);
                }
            }
        }
        let essential = trim(&succ);
        Ok(BlockGraph {
            q,
            k,
            succ,
            essential,
        })
    }

    pub fn block_length(&self) -> usize {
        self.k
    }

    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    pub fn essential_count(&self) -> usize {
        self.essential.iter().filter(|&&e| e).count()
    }

    fn essential_succ(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[s]
            .iter()
            .map(|&t| t as usize)
            .filter(|&t| self.essential[t])
    }

    /// Number of words of length `n` occurring in points of the shift.
    pub fn count_words(&self, n: usize) -> u128 {
        if n < self.k {
            let mut seen = HashSet::new();
            let mut w = vec![0; self.k];
            for s in (0..self.state_count()).filter(|&s| self.essential[s]) {
                decode(s, self.q, &mut w);
                seen.insert(w[..n].to_vec());
            }
            return seen.len() as u128;
        }
        let mut v: Vec<u128> = self.essential.iter().map(|&e| e as u128).collect();
        for _ in 0..n - self.k {
            let mut next = vec![0u128; v.len()];
            for (s, &c) in v.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for t in self.essential_succ(s) {
                    next[t] = next[t].saturating_add(c);
                }
            }
            v = next;
        }
        v.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }

    /// Visits, in lexicographic order, the restrictions to `window` of the
    /// words on its convex hull that occur in points of the shift.
    pub fn visit_window(&self, window: &FiniteSubset, f: &mut dyn FnMut(&[Symbol]) -> bool) {
        let elems = window.elements();
        let a = elems[0].0[0];
        let b = elems[elems.len() - 1].0[0];
        let n = (b - a + 1) as usize;
        let idx: Vec<usize> = elems.iter().map(|g| (g.0[0] - a) as usize).collect();
        let convex = idx.len() == n && n >= self.k;
        let mut seen = HashSet::new();
        let mut proj = vec![0 as Symbol; idx.len()];
        let mut emit = |word: &[Symbol]| -> bool {
            for (p, &i) in proj.iter_mut().zip(&idx) {
                *p = word[i];
            }
            if convex || seen.insert(proj.clone()) {
                f(&proj)
            } else {
                true
            }
        };
        let mut w = vec![0 as Symbol; n.max(self.k)];
        if n < self.k {
            for s in (0..self.state_count()).filter(|&s| self.essential[s]) {
                decode(s, self.q, &mut w);
                if !emit(&w[..n]) {
                    return;
                }
            }
            return;
        }
        for s in (0..self.state_count()).filter(|&s| self.essential[s]) {
            decode(s, self.q, &mut w[..self.k]);
            if !self.walk(s, self.k, n, &mut w, &mut emit) {
                return;
            }
        }
    }

    fn walk(
        &self,
        s: usize,
        pos: usize,
        n: usize,
        w: &mut [Symbol],
        emit: &mut dyn FnMut(&[Symbol]) -> bool,
    ) -> bool {
        if pos == n {
            return emit(&w[..n]);
        }
        for t in self.essential_succ(s) {
            w[pos] = (t % self.q) as Symbol;
            if !self.walk(t, pos + 1, n, w, emit) {
                return false;
            }
        }
        true
    }

    /// Whether the pattern on `window` occurs in some point of the shift.
    pub fn extendable(&self, window: &FiniteSubset, pattern: &[Symbol]) -> bool {
        let elems = window.elements();
        let a = elems[0].0[0];
        let b = elems[elems.len() - 1].0[0];
        let n = ((b - a + 1) as usize).max(self.k);
        let mut cons: Vec<Option<Symbol>> = vec![None; n];
        for (g, &s) in elems.iter().zip(pattern) {
            cons[(g.0[0] - a) as usize] = Some(s);
        }
        let mut w = vec![0; self.k];
        let mut cur: Vec<bool> = (0..self.state_count())
            .map(|s| {
                self.essential[s] && {
                    decode(s, self.q, &mut w);
                    w.iter().zip(&cons).all(|(&x, c)| c.is_none_or(|c| c == x))
                }
            })
            .collect();
        for c in &cons[self.k..] {
            let mut next = vec![false; cur.len()];
            for s in (0..cur.len()).filter(|&s| cur[s]) {
                for t in self.essential_succ(s) {
                    if c.is_none_or(|c| c as usize == t % self.q) {
                        next[t] = true;
                    }
                }
            }
            cur = next;
        }
        cur.iter().any(|&x| x)
    }

    /// `log` of the spectral radius of the essential adjacency matrix.
    ///
    /// Iterates with `A + I` (same Perron vector, aperiodic) and stops once
    /// the Collatz-Wielandt bounds agree to `tol` relative.
    pub fn entropy(&self, tol: f64) -> Result<f64> {
        let ess: Vec<usize> = (0..self.state_count()).filter(|&s| self.essential[s]).collect();
        if ess.is_empty() {
            return Err(Error::EmptySystem);
        }
        let mut v = vec![0.0f64; self.state_count()];
        for &s in &ess {
            v[s] = 1.0;
        }
        let mut estimate = 0.0;
        for _ in 0..2_000_000 {
            let mut w = v.clone();
            for &s in &ess {
                for t in self.essential_succ(s) {
                    w[t] += v[s];
                }
            }
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &s in &ess {
                let r = w[s] / v[s];
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let norm: f64 = ess.iter().map(|&s| w[s]).sum();
            estimate = norm / ess.iter().map(|&s| v[s]).sum::<f64>();
            for &s in &ess {
                v[s] = w[s] / norm;
            }
            if hi - lo <= tol * hi {
                estimate = 0.5 * (lo + hi);
                break;
            }
        }
        Ok((estimate - 1.0).max(f64::MIN_POSITIVE).ln())
    }
}

fn decode(mut code: usize, q: usize, out: &mut [Symbol]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % q) as Symbol;
        code /= q;
    }
}

/// States lying on a bi-infinite path: repeatedly drop sources and sinks.
fn trim(succ: &[Vec<u32>]) -> Vec<bool> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    let mut outdeg = vec![0usize; n];
    let mut pred = vec![Vec::new(); n];
    for (s, out) in succ.iter().enumerate() {
        outdeg[s] = out.len();
        for &t in out {
            indeg[t as usize] += 1;
            pred[t as usize].push(s);
        }
    }
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| indeg[s] == 0 || outdeg[s] == 0).collect();
    while let Some(s) = queue.pop_front() {
        if !alive[s] {
            continue;
        }
        alive[s] = false;
        for &t in &succ[s] {
            let t = t as usize;
            indeg[t] -= 1;
            if alive[t] && indeg[t] == 0 {
                queue.push_back(t);
            }
        }
        for &p in &pred[s] {
            outdeg[p] -= 1;
            if alive[p] && outdeg[p] == 0 {
                queue.push_back(p);
            }
        }
    }
    alive
}

/// Topological entropy of a one-dimensional SFT, to relative tolerance 1e-10
/// on the spectral radius.
pub fn transfer_matrix_entropy(sys: &ShiftSystem) -> Result<f64> {
    sys.block_graph()?.entropy(1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteSubset, GroupModel};
    use crate::shift::Forbidden;

    #[test]
    fn entropy_examples() {
        for k in 1..5 {
            let h = transfer_matrix_entropy(&ShiftSystem::full_shift(k).unwrap()).unwrap();
            assert!((h - (k as f64).ln()).abs() < 1e-9, "k={k}: {h}");
        }
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let h = transfer_matrix_entropy(&ShiftSystem::golden_mean()).unwrap();
        assert!((h - phi.ln()).abs() < 1e-8);
        let h = transfer_matrix_entropy(&ShiftSystem::fixed_point()).unwrap();
        assert!(h.abs() < 1e-9);
    }

    #[test]
    fn periodic_graph_converges() {
        // Only the 5-cycle a -> a+1 mod 5 is allowed: zero entropy, period 5.
        let z = GroupModel::integers();
        let mut forbidden = Vec::new();
        for a in 0..5u16 {
            for b in 0..5u16 {
                if b != (a + 1) % 5 {
                    forbidden.push(Forbidden {
                        shape: FiniteSubset::from_ints(&z, &[0, 1]).unwrap(),
                        pattern: vec![a, b],
                    });
                }
            }
        }
        let sys = ShiftSystem::new("cycle5", z, (0..5).map(|a| a.to_string()).collect(), forbidden, 2).unwrap();
        let g = BlockGraph::build(&sys).unwrap();
        assert_eq!(g.count_words(17), 5);
        assert!(g.entropy(1e-10).unwrap().abs() < 1e-8);
    }

    #[test]
    fn long_range_constraints_are_not_recodable() {
        let z = GroupModel::integers();
        let sys = ShiftSystem::new(
            "far",
            z,
            vec!["0".into(), "1".into()],
            vec![Forbidden {
                shape: FiniteSubset::from_ints(&z, &[0, 20]).unwrap(),
                pattern: vec![1, 1],
            }],
            20,
        )
        .unwrap();
        assert!(matches!(
            transfer_matrix_entropy(&sys),
            Err(Error::NotRecodable(_))
        ));
        let w = FiniteSubset::from_ints(&z, &[0, 1, 2]).unwrap();
        assert!(!sys.allowed_patterns(&w).unwrap().extendability_certified);
    }

    #[test]
    fn gapped_window_projection() {
        let z = GroupModel::integers();
        let gm = ShiftSystem::golden_mean();
        let w = FiniteSubset::from_ints(&z, &[0, 2]).unwrap();
        // On {0, 2} every pair occurs (101 is allowed).
        assert_eq!(gm.language(&w, 100).unwrap().len(), 4);
    }
}
