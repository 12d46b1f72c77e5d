//! Sofic approximations `σ: G -> Sym(d)` for the supported groups.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{coset_space, FiniteSubset, GroupElement, GroupKind, GroupModel, SubgroupChain};
pub use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoficMap {
    group: GroupModel,
    d: usize,
    /// One permutation per standard generator, in generator order.
    gens: Vec<Permutation>,
    label: String,
}

impl SoficMap {
    pub fn from_tables(group: GroupModel, gens: Vec<Permutation>) -> Result<Self> {
        let want = group.generators().len();
        if gens.len() != want {
            return Err(Error::invalid(format!(
                "{group} needs {want} generator permutation(s), got {}",
                gens.len()
            )));
        }
        let d = gens[0].len();
        if d == 0 || gens.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("generator permutations must share d >= 1"));
        }
        Ok(SoficMap {
            group,
            d,
            gens,
            label: format!("tables(d={d})"),
        })
    }

    /// `Z -> Sym(d)`, `1 -> (a -> a+1 mod d)`.
    pub fn cyclic(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be >= 1"));
        }
        Ok(SoficMap {
            group: GroupModel::integers(),
            d,
            gens: vec![Permutation::rotation(d, 1)],
            label: format!("cyclic({d})"),
        })
    }

    /// `Z^2 -> Sym(d1 d2)` through the quotient `Z/d1 x Z/d2`; the point
    /// `(x, y)` has index `x + d1 y`.
    pub fn torus(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::invalid("torus sides must be >= 1"));
        }
        let idx = |x: usize, y: usize| (x % d1 + d1 * (y % d2)) as u32;
        let mut e1 = vec![0u32; d1 * d2];
        let mut e2 = vec![0u32; d1 * d2];
        for y in 0..d2 {
            for x in 0..d1 {
                e1[idx(x, y) as usize] = idx(x + 1, y);
                e2[idx(x, y) as usize] = idx(x, y + 1);
            }
        }
        Ok(SoficMap {
            group: GroupModel::lattice2(),
            d: d1 * d2,
            gens: vec![
                Permutation::from_images(e1)?,
                Permutation::from_images(e2)?,
            ],
            label: format!("torus({d1},{d2})"),
        })
    }

    /// Action of `Z` on the cosets `Z / m_level Z`.
    pub fn chain(chain: &SubgroupChain, level: usize) -> Result<Self> {
        let cs = coset_space(chain, level)?;
        Ok(SoficMap {
            group: GroupModel::integers(),
            d: cs.len(),
            gens: vec![cs.permutation(1)],
            label: format!("chain(level={level},d={})", cs.len()),
        })
    }

    /// `Z/m` acting on `copies` disjoint copies of itself.
    pub fn regular(m: u64, copies: usize) -> Result<Self> {
        let group = GroupModel::cyclic(m)?;
        if copies == 0 {
            return Err(Error::invalid("copies must be >= 1"));
        }
        let m_us = m as usize;
        let images = (0..m_us * copies)
            .map(|a| ((a / m_us) * m_us + (a % m_us + 1) % m_us) as u32)
            .collect();
        Ok(SoficMap {
            group,
            d: m_us * copies,
            gens: vec![Permutation::from_images(images)?],
            label: format!("regular(m={m},copies={copies})"),
        })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generator_perms(&self) -> &[Permutation] {
        &self.gens
    }

    /// `σ_g`, composed along the normal form `e1^a e2^b`.
    pub fn sigma_of(&self, g: GroupElement) -> Permutation {
        let g = self.group.normalize(g);
        match self.group.kind() {
            GroupKind::Lattice(2) => self.gens[0].pow(g.0[0]).compose(&self.gens[1].pow(g.0[1])),
            _ => self.gens[0].pow(g.0[0]),
        }
    }

    pub fn goodness(&self, f: &FiniteSubset) -> GoodnessReport {
        let table: BTreeMap<GroupElement, Permutation> = f
            .elements()
            .iter()
            .map(|&g| (g, self.sigma_of(g)))
            .collect();
        let d = self.d as u64;
        let mut mult = BTreeMap::new();
        let mut free = BTreeMap::new();
        for &s in f.elements() {
            for &t in f.elements() {
                let st = self.sigma_of(self.group.op(s, t));
                let comp = table[&s].compose(&table[&t]);
                let agree = (0..self.d as u32)
                    .filter(|&a| comp.apply(a) == st.apply(a))
                    .count() as u64;
                mult.insert((s, t), Ratio::new(agree, d));
                if s != t {
                    let differ = (0..self.d as u32)
                        .filter(|&a| table[&s].apply(a) != table[&t].apply(a))
                        .count() as u64;
                    free.insert((s, t), Ratio::new(differ, d));
                }
            }
        }
        GoodnessReport {
            mult_fraction: mult,
            free_fraction: free,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let gens = self
            .group
            .generator_names()
            .into_iter()
            .zip(&self.gens)
            .map(|(name, p)| (name.to_string(), p.images().iter().map(|&a| a + 1).collect()))
            .collect();
        Ok(serde_json::to_string(&SoficJson { d: self.d, gens })?)
    }

    pub fn from_json(group: GroupModel, s: &str) -> Result<Self> {
        let raw: SoficJson = serde_json::from_str(s)?;
        let mut gens = Vec::new();
        for name in group.generator_names() {
            let images = raw
                .gens
                .get(name)
                .ok_or_else(|| Error::Parse(format!("missing generator {name:?}")))?;
            if images.len() != raw.d || images.contains(&0) {
                return Err(Error::Parse(format!(
                    "generator {name:?} must list {} 1-based images",
                    raw.d
                )));
            }
            gens.push(Permutation::from_images(
                images.iter().map(|&a| a - 1).collect(),
            )?);
        }
        SoficMap::from_tables(group, gens)
    }
}

#[derive(Serialize, Deserialize)]
struct SoficJson {
    d: usize,
    gens: BTreeMap<String, Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodnessReport {
    pub mult_fraction: BTreeMap<(GroupElement, GroupElement), Ratio<u64>>,
    pub free_fraction: BTreeMap<(GroupElement, GroupElement), Ratio<u64>>,
}

impl GoodnessReport {
    pub fn min_mult(&self) -> Ratio<u64> {
        self.mult_fraction
            .values()
            .copied()
            .min()
            .unwrap_or(Ratio::new(1, 1))
    }

    pub fn min_free(&self) -> Ratio<u64> {
        self.free_fraction
            .values()
            .copied()
            .min()
            .unwrap_or(Ratio::new(1, 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ball;
    use proptest::prelude::*;

    fn one() -> Ratio<u64> {
        Ratio::new(1, 1)
    }

    #[test]
    fn cyclic_examples() {
        let s = SoficMap::cyclic(1).unwrap();
        assert!(s.sigma_of(GroupElement::scalar(1)).is_identity());
        let s = SoficMap::cyclic(5).unwrap();
        // 1-based: 1 -> 3 under σ_2.
        assert_eq!(s.sigma_of(GroupElement::scalar(2)).apply(0) + 1, 3);
        assert!(s.sigma_of(GroupElement::scalar(0)).is_identity());
        assert_eq!(
            s.sigma_of(GroupElement::scalar(7)),
            Permutation::rotation(5, 2)
        );
        let g = SoficMap::cyclic(4)
            .unwrap()
            .goodness(&ball(&GroupModel::integers(), 2));
        assert_eq!(g.min_mult(), one());
    }

    #[test]
    fn torus_examples() {
        let t = SoficMap::torus(2, 2).unwrap();
        assert_eq!(t.sigma_of(GroupElement::pair(1, 0)).cycle_lengths(), vec![2, 2]);
        let t = SoficMap::torus(3, 1).unwrap();
        assert_eq!(
            t.sigma_of(GroupElement::pair(1, 0)),
            SoficMap::cyclic(3).unwrap().sigma_of(GroupElement::scalar(1))
        );
        let t = SoficMap::torus(2, 3).unwrap();
        assert!(t.sigma_of(GroupElement::pair(2, 3)).is_identity());
        let g = SoficMap::torus(4, 4)
            .unwrap()
            .goodness(&ball(&GroupModel::lattice2(), 1));
        assert_eq!(g.min_mult(), one());
    }

    #[test]
    fn chain_examples() {
        let c = SubgroupChain::parse("1,2,4,8").unwrap();
        let s = SoficMap::chain(&c, 2).unwrap();
        assert_eq!(s.d(), 4);
        assert_eq!(s.sigma_of(GroupElement::scalar(1)).cycle_lengths(), vec![4]);
        let c = SubgroupChain::parse("1,2").unwrap();
        assert!(SoficMap::chain(&c, 0)
            .unwrap()
            .sigma_of(GroupElement::scalar(1))
            .is_identity());
        let c = SubgroupChain::parse("1,3,9").unwrap();
        assert!(SoficMap::chain(&c, 1)
            .unwrap()
            .sigma_of(GroupElement::scalar(3))
            .is_identity());
    }

    #[test]
    fn free_fraction_examples() {
        let z = GroupModel::integers();
        let s = SoficMap::cyclic(2).unwrap();
        let f = FiniteSubset::from_ints(&z, &[0, 2]).unwrap();
        let g = s.goodness(&f);
        let key = (GroupElement::scalar(0), GroupElement::scalar(2));
        assert_eq!(g.free_fraction[&key], Ratio::new(0, 1));

        let s = SoficMap::cyclic(7).unwrap();
        let f = FiniteSubset::from_ints(&z, &[0, 1, 3]).unwrap();
        assert_eq!(s.goodness(&f).min_free(), one());
    }

    #[test]
    fn regular_cyclic_is_homomorphic() {
        let s = SoficMap::regular(6, 3).unwrap();
        assert_eq!(s.d(), 18);
        let g = s.goodness(&ball(s.group(), 3));
        assert_eq!(g.min_mult(), one());
        assert_eq!(g.min_free(), one());
    }

    #[test]
    fn json_round_trip() {
        let s = SoficMap::torus(2, 3).unwrap();
        let json = s.to_json().unwrap();
        assert!(json.contains("\"e1\""));
        let back = SoficMap::from_json(GroupModel::lattice2(), &json).unwrap();
        assert_eq!(back.generator_perms(), s.generator_perms());
        assert!(SoficMap::from_json(GroupModel::integers(), r#"{"d":2,"gens":{"e1":[1,1]}}"#).is_err());
        let c = SoficMap::from_json(GroupModel::integers(), r#"{"d":3,"gens":{"e1":[2,3,1]}}"#).unwrap();
        assert_eq!(c.generator_perms()[0], Permutation::rotation(3, 1));
    }

    proptest! {
        #[test]
        fn identity_and_homomorphism(d1 in 1usize..6, d2 in 1usize..6, a in -9i64..9, b in -9i64..9, c in -9i64..9, e in -9i64..9) {
            let t = SoficMap::torus(d1, d2).unwrap();
            prop_assert!(t.sigma_of(GroupElement::IDENTITY).is_identity());
            let g = GroupElement::pair(a, b);
            let h = GroupElement::pair(c, e);
            let gh = t.group().op(g, h);
            prop_assert_eq!(t.sigma_of(gh), t.sigma_of(g).compose(&t.sigma_of(h)));
        }

        #[test]
        fn cyclic_free_on_small_balls(r in 0u64..5, extra in 1usize..6) {
            let d = 2 * r as usize + extra;
            let s = SoficMap::cyclic(d).unwrap();
            let g = s.goodness(&ball(&GroupModel::integers(), r));
            prop_assert_eq!(g.min_free(), Ratio::new(1, 1));
            prop_assert_eq!(g.min_mult(), Ratio::new(1, 1));
        }
    }
}
