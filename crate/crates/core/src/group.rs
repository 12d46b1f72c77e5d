//! Supported groups (`Z`, `Z^2`, `Z/m`), finite subsets, Følner boxes and
//! finite-index subgroup chains of `Z`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sofic::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// `Z^rank`, rank 1 or 2.
    Lattice(u8),
    /// `Z/m`.
    Cyclic(u64),
}

/// An element in additive normal form. Rank-1 groups keep the second
/// coordinate at 0; `Z/m` residues live in `[0, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub [i64; 2]);

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement([0, 0]);

    pub fn scalar(n: i64) -> Self {
        GroupElement([n, 0])
    }

    pub fn pair(a: i64, b: i64) -> Self {
        GroupElement([a, b])
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0[0], self.0[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupModel {
    kind: GroupKind,
}

impl GroupModel {
    pub fn integers() -> Self {
        GroupModel {
            kind: GroupKind::Lattice(1),
        }
    }

    pub fn lattice2() -> Self {
        GroupModel {
            kind: GroupKind::Lattice(2),
        }
    }

    pub fn cyclic(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("Z/m needs m >= 1"));
        }
        Ok(GroupModel {
            kind: GroupKind::Cyclic(m),
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            GroupKind::Lattice(r) => r as usize,
            GroupKind::Cyclic(_) => 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, GroupKind::Cyclic(_))
    }

    pub fn order(&self) -> Option<u64> {
        match self.kind {
            GroupKind::Cyclic(m) => Some(m),
            GroupKind::Lattice(_) => None,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::IDENTITY
    }

    /// Standard generators: basis vectors, or `1 mod m`.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self.kind {
            GroupKind::Lattice(2) => vec![GroupElement::pair(1, 0), GroupElement::pair(0, 1)],
            GroupKind::Cyclic(1) => vec![GroupElement::scalar(0)],
            _ => vec![GroupElement::scalar(1)],
        }
    }

    pub fn generator_names(&self) -> Vec<&'static str> {
        match self.kind {
            GroupKind::Lattice(2) => vec!["e1", "e2"],
            _ => vec!["e1"],
        }
    }

    pub fn normalize(&self, g: GroupElement) -> GroupElement {
        match self.kind {
            GroupKind::Lattice(1) => GroupElement([g.0[0], 0]),
            GroupKind::Lattice(_) => g,
            GroupKind::Cyclic(m) => GroupElement([g.0[0].rem_euclid(m as i64), 0]),
        }
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        match (self.rank(), coords) {
            (1, [a]) => Ok(self.normalize(GroupElement::scalar(*a))),
            (2, [a, b]) => Ok(GroupElement::pair(*a, *b)),
            _ => Err(Error::invalid(format!(
                "expected {} coordinate(s), got {:?}",
                self.rank(),
                coords
            ))),
        }
    }

    pub fn op(&self, g: GroupElement, h: GroupElement) -> GroupElement {
        self.normalize(GroupElement([g.0[0] + h.0[0], g.0[1] + h.0[1]]))
    }

    pub fn inverse(&self, g: GroupElement) -> GroupElement {
        self.normalize(GroupElement([-g.0[0], -g.0[1]]))
    }

    /// Word length in the standard symmetric generating set (ℓ¹ on `Z^2`).
    pub fn word_length(&self, g: GroupElement) -> u64 {
        match self.kind {
            GroupKind::Lattice(_) => g.0[0].unsigned_abs() + g.0[1].unsigned_abs(),
            GroupKind::Cyclic(m) => {
                let r = g.0[0].rem_euclid(m as i64) as u64;
                r.min(m - r)
            }
        }
    }

    pub fn ball(&self, radius: u64) -> FiniteSubset {
        ball(self, radius)
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for GroupModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" => Ok(GroupModel::integers()),
            "Z2" => Ok(GroupModel::lattice2()),
            other => match other.strip_prefix("Z/") {
                Some(m) => {
                    let m: u64 = m
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad group order in {other:?}")))?;
                    GroupModel::cyclic(m)
                }
                None => Err(Error::Parse(format!("unknown group {other:?}"))),
            },
        }
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Lattice(1) => write!(f, "Z"),
            GroupKind::Lattice(r) => write!(f, "Z{r}"),
            GroupKind::Cyclic(m) => write!(f, "Z/{m}"),
        }
    }
}

/// Non-empty, deduplicated, sorted set of normal-form elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteSubset {
    elements: Vec<GroupElement>,
}

impl FiniteSubset {
    pub fn new(group: &GroupModel, elems: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        let set: BTreeSet<GroupElement> = elems.into_iter().map(|g| group.normalize(g)).collect();
        if set.is_empty() {
            return Err(Error::invalid("finite subset must be non-empty"));
        }
        Ok(FiniteSubset {
            elements: set.into_iter().collect(),
        })
    }

    /// Convenience for rank-1 groups.
    pub fn from_ints(group: &GroupModel, xs: &[i64]) -> Result<Self> {
        FiniteSubset::new(group, xs.iter().map(|&x| GroupElement::scalar(x)))
    }

    pub fn singleton(g: GroupElement) -> Self {
        FiniteSubset { elements: vec![g] }
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    pub fn union(&self, other: &FiniteSubset) -> FiniteSubset {
        let set: BTreeSet<GroupElement> = self
            .elements
            .iter()
            .chain(other.elements.iter())
            .copied()
            .collect();
        FiniteSubset {
            elements: set.into_iter().collect(),
        }
    }

    /// Right translate `F g = {f + g}` (the groups are abelian).
    pub fn translate(&self, group: &GroupModel, g: GroupElement) -> FiniteSubset {
        FiniteSubset::new(group, self.elements.iter().map(|&f| group.op(f, g)))
            .expect("translate of non-empty set is non-empty")
    }

    /// Minkowski sum `F + W`.
    pub fn sum(&self, group: &GroupModel, other: &FiniteSubset) -> FiniteSubset {
        let elems = self
            .elements
            .iter()
            .flat_map(|&f| other.elements.iter().map(move |&w| group.op(f, w)));
        FiniteSubset::new(group, elems).expect("sum of non-empty sets is non-empty")
    }

    /// Largest word length among the elements.
    pub fn radius(&self, group: &GroupModel) -> u64 {
        self.elements
            .iter()
            .map(|&g| group.word_length(g))
            .max()
            .unwrap_or(0)
    }

    /// `|g F Δ F| / |F|`, exact.
    pub fn defect(&self, group: &GroupModel, g: GroupElement) -> Ratio<u64> {
        let shifted = self.translate(group, g);
        let both = self.elements.iter().filter(|h| shifted.contains(h)).count();
        let sym = (self.len() - both) + (shifted.len() - both);
        Ratio::new(sym as u64, self.len() as u64)
    }
}

pub fn ball(group: &GroupModel, radius: u64) -> FiniteSubset {
    let r = radius as i64;
    let elems: Vec<GroupElement> = match group.kind() {
        GroupKind::Lattice(1) => (-r..=r).map(GroupElement::scalar).collect(),
        GroupKind::Lattice(_) => {
            let mut v = Vec::new();
            for a in -r..=r {
                let rest = r - a.abs();
                for b in -rest..=rest {
                    v.push(GroupElement::pair(a, b));
                }
            }
            v
        }
        GroupKind::Cyclic(m) => (0..m as i64)
            .map(GroupElement::scalar)
            .filter(|&g| group.word_length(g) <= radius)
            .collect(),
    };
    FiniteSubset::new(group, elems).expect("ball contains the identity")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FolnerSet {
    pub base: FiniteSubset,
    pub index: u64,
    /// `|gF Δ F|/|F|` per standard generator, in generator order.
    pub defects: Vec<(GroupElement, Ratio<u64>)>,
}

impl FolnerSet {
    pub fn defect(&self, g: &GroupElement) -> Option<Ratio<u64>> {
        self.defects.iter().find(|(h, _)| h == g).map(|(_, r)| *r)
    }
}

/// Boxes anchored at the identity: `[0, n)` or `[0, n)^2`; `Z/m` saturates at
/// the whole group once `n >= m`.
pub fn folner(group: &GroupModel, n: u64) -> Result<FolnerSet> {
    if n == 0 {
        return Err(Error::invalid("Følner index must be >= 1"));
    }
    let n_i = n as i64;
    let base = match group.kind() {
        GroupKind::Lattice(1) => FiniteSubset::new(group, (0..n_i).map(GroupElement::scalar))?,
        GroupKind::Lattice(_) => FiniteSubset::new(
            group,
            (0..n_i).flat_map(|a| (0..n_i).map(move |b| GroupElement::pair(a, b))),
        )?,
        GroupKind::Cyclic(m) => {
            let top = n.min(m) as i64;
            FiniteSubset::new(group, (0..top).map(GroupElement::scalar))?
        }
    };
    Ok(folner_from_base(group, base, n))
}

/// Box `[a, a+n)` (rank 1) or `[a,a+n) x [b,b+n)` (rank 2).
pub fn shifted_folner(group: &GroupModel, n: u64, anchor: GroupElement) -> Result<FolnerSet> {
    let f = folner(group, n)?;
    let base = f.base.translate(group, anchor);
    Ok(folner_from_base(group, base, n))
}

fn folner_from_base(group: &GroupModel, base: FiniteSubset, n: u64) -> FolnerSet {
    let defects = group
        .generators()
        .into_iter()
        .map(|g| (g, base.defect(group, g)))
        .collect();
    FolnerSet {
        base,
        index: n,
        defects,
    }
}

/// `Z = G_0 >= G_1 >= ...` with `G_k = m_k Z`, `m_0 = 1`, `m_k | m_{k+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupChain {
    indices: Vec<u64>,
}

impl SubgroupChain {
    pub fn new(indices: Vec<u64>) -> Result<Self> {
        if indices.first() != Some(&1) {
            return Err(Error::invalid("chain must start at index 1"));
        }
        for w in indices.windows(2) {
            if w[1] <= w[0] || w[1] % w[0] != 0 {
                return Err(Error::invalid(format!(
                    "chain indices must strictly increase by divisibility, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(SubgroupChain { indices })
    }

    /// `1, 2, 4, ..., 2^depth`.
    pub fn dyadic(depth: usize) -> Self {
        SubgroupChain {
            indices: (0..=depth).map(|k| 1u64 << k).collect(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let idx: std::result::Result<Vec<u64>, _> =
            s.split(',').map(|t| t.trim().parse::<u64>()).collect();
        SubgroupChain::new(idx.map_err(|e| Error::Parse(format!("bad chain {s:?}: {e}")))?)
    }

    pub fn group(&self) -> GroupModel {
        GroupModel::integers()
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index(&self, level: usize) -> Result<u64> {
        self.indices.get(level).copied().ok_or_else(|| {
            Error::invalid(format!(
                "level {level} out of range for chain of length {}",
                self.indices.len()
            ))
        })
    }
}

/// `Z / m_level Z` with the left action `g . (a mod m) = (g + a) mod m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSpace {
    pub modulus: u64,
}

impl CosetSpace {
    pub fn len(&self) -> usize {
        self.modulus as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn act(&self, g: i64, coset: u64) -> u64 {
        (g + coset as i64).rem_euclid(self.modulus as i64) as u64
    }

    /// The action of `g` as a permutation of the cosets `0..m`.
    pub fn permutation(&self, g: i64) -> Permutation {
        Permutation::from_images((0..self.modulus).map(|a| self.act(g, a) as u32).collect())
            .expect("translation is a bijection")
    }
}

pub fn coset_space(chain: &SubgroupChain, level: usize) -> Result<CosetSpace> {
    Ok(CosetSpace {
        modulus: chain.index(level)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupModel {
        GroupModel::integers()
    }

    #[test]
    fn balls_in_z_and_z2() {
        assert_eq!(ball(&z(), 0).elements(), &[GroupElement::IDENTITY]);
        let b2 = ball(&z(), 2);
        assert_eq!(b2.len(), 5);
        assert_eq!(
            b2.elements().iter().map(|g| g.0[0]).collect::<Vec<_>>(),
            vec![-2, -1, 0, 1, 2]
        );
        let z2 = GroupModel::lattice2();
        let b1 = ball(&z2, 1);
        assert_eq!(b1.len(), 5);
        for g in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            assert!(b1.contains(&GroupElement::pair(g.0, g.1)));
        }
    }

    #[test]
    fn balls_are_symmetric_and_nested() {
        for g in [z(), GroupModel::lattice2(), GroupModel::cyclic(7).unwrap()] {
            for r in 0..4 {
                let b = ball(&g, r);
                assert!(b.contains(&g.identity()));
                for &h in b.elements() {
                    assert!(b.contains(&g.inverse(h)));
                }
                assert!(b.is_subset(&ball(&g, r + 1)));
            }
        }
    }

    #[test]
    fn folner_boxes() {
        let f = folner(&z(), 10).unwrap();
        assert_eq!(f.base.len(), 10);
        assert_eq!(f.defect(&GroupElement::scalar(1)), Some(Ratio::new(2, 10)));

        let z2 = GroupModel::lattice2();
        let f = folner(&z2, 4).unwrap();
        assert_eq!(f.base.len(), 16);
        assert_eq!(f.defect(&GroupElement::pair(1, 0)), Some(Ratio::new(1, 2)));

        let c6 = GroupModel::cyclic(6).unwrap();
        let f = folner(&c6, 7).unwrap();
        assert_eq!(f.base.len(), 6);
        assert!(f.defects.iter().all(|(_, r)| *r == Ratio::new(0, 1)));
    }

    #[test]
    fn folner_defects_decay() {
        for g in [z(), GroupModel::lattice2()] {
            let mut prev = None;
            for n in 1..30u64 {
                let f = folner(&g, n).unwrap();
                for (_, r) in &f.defects {
                    let x = *r.numer() as f64 / *r.denom() as f64;
                    assert!((0.0..=2.0).contains(&x));
                    assert!(x <= 4.0 / n as f64);
                    if let Some(p) = prev {
                        assert!(x <= p);
                    }
                    prev = Some(x);
                }
                prev = None;
            }
        }
    }

    #[test]
    fn coset_spaces() {
        let chain = SubgroupChain::parse("1,2,4,8").unwrap();
        let cs = coset_space(&chain, 2).unwrap();
        assert_eq!(cs.len(), 4);
        let p = cs.permutation(1);
        assert_eq!(p.cycle_lengths(), vec![4]);

        let chain = SubgroupChain::parse("1,2").unwrap();
        let cs = coset_space(&chain, 0).unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs.permutation(1).is_identity());

        let chain = SubgroupChain::parse("1,3,9").unwrap();
        let cs = coset_space(&chain, 1).unwrap();
        assert_eq!(cs.len(), 3);
        assert!(cs.permutation(3).is_identity());
    }

    #[test]
    fn coset_action_is_bijective() {
        let chain = SubgroupChain::dyadic(5);
        for level in 0..chain.len() {
            let cs = coset_space(&chain, level).unwrap();
            for g in -5..5 {
                // Permutation::from_images validates bijectivity.
                let _ = cs.permutation(g);
            }
        }
    }

    #[test]
    fn chain_validation() {
        assert!(SubgroupChain::parse("1,4,6").is_err());
        assert!(SubgroupChain::parse("2,4").is_err());
        assert!(SubgroupChain::parse("1,1").is_err());
        assert!(SubgroupChain::parse("1,3,9").is_ok());
    }

    #[test]
    fn parse_groups() {
        assert_eq!(GroupModel::parse("Z").unwrap(), z());
        assert_eq!(GroupModel::parse("Z2").unwrap(), GroupModel::lattice2());
        assert_eq!(
            GroupModel::parse("Z/6").unwrap(),
            GroupModel::cyclic(6).unwrap()
        );
        assert!(GroupModel::parse("F2").is_err());
        assert_eq!(GroupModel::parse("Z/6").unwrap().to_string(), "Z/6");
    }
}
