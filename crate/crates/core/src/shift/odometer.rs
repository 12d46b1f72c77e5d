//! Boundary action of `Z` on a chain of finite-index subgroups, truncated at
//! a finite depth.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CoverKind, CoverMember, CoverSpec, Forbidden, ShiftSystem, Symbol};
use crate::error::{Error, Result};
use crate::group::{FiniteSubset, GroupElement, GroupModel, SubgroupChain};

/// Points at depth `D` are residues `x mod m_D`; level `k` of `x` is `x mod m_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdometerSystem {
    chain: SubgroupChain,
    depth: usize,
}

impl OdometerSystem {
    pub fn new(chain: SubgroupChain, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::invalid("odometer depth must be >= 1"));
        }
        let m = chain.index(depth)?;
        if m > Symbol::MAX as u64 {
            return Err(Error::invalid("odometer truncation too deep to label"));
        }
        Ok(OdometerSystem { chain, depth })
    }

    /// `Z_2` truncated at `depth`; the chain runs deeper so that coset maps
    /// beyond the truncation are available as sofic approximations.
    pub fn dyadic(depth: usize) -> Result<Self> {
        OdometerSystem::new(SubgroupChain::dyadic(depth + 8), depth)
    }

    pub fn chain(&self) -> &SubgroupChain {
        &self.chain
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        OdometerSystem::new(self.chain.clone(), depth)
    }

    pub fn group(&self) -> GroupModel {
        GroupModel::integers()
    }

    /// Number of points at the truncation depth, `m_depth`.
    pub fn modulus(&self) -> u64 {
        self.chain.indices()[self.depth]
    }

    pub fn points(&self) -> impl Iterator<Item = u64> {
        0..self.modulus()
    }

    /// The compatible coset sequence `(x_0, .., x_depth)`.
    pub fn coordinates(&self, x: u64) -> Vec<u64> {
        self.chain.indices()[..=self.depth]
            .iter()
            .map(|&m| x % m)
            .collect()
    }

    /// `g . x`: addition with carries, i.e. `x + g mod m_depth`.
    pub fn act(&self, g: i64, x: u64) -> u64 {
        (x as i64 + g).rem_euclid(self.modulus() as i64) as u64
    }

    /// First level at which two truncated points differ.
    pub fn disagreement_level(&self, x: u64, y: u64) -> Option<usize> {
        self.chain.indices()[..=self.depth]
            .iter()
            .position(|&m| x % m != y % m)
    }

    /// Truncation error: two points equal at every level up to the depth are
    /// within this distance.
    pub fn resolution(&self) -> f64 {
        0.5f64.powi(self.depth as i32 + 1)
    }

    /// `ρ(x, y) = 2^{-k}` at the first disagreement `k`; `[0, 2^{-(depth+1)}]`
    /// when the truncations agree.
    pub fn rho_interval(&self, x: u64, y: u64) -> (f64, f64) {
        match self.disagreement_level(x, y) {
            Some(k) => {
                let r = 0.5f64.powi(k as i32);
                (r, r)
            }
            None => (0.0, self.resolution()),
        }
    }

    /// Checks, for every `k <= depth`, that `ρ(x, y) <= 2^{-k}` implies
    /// `ρ(gx, gy) <= 2^{-k}` for all points and all `g` in `Z / m_depth`.
    pub fn equicontinuity_check(&self) -> bool {
        let m = self.modulus();
        for k in 0..=self.depth {
            let bound = 0.5f64.powi(k as i32);
            for x in 0..m {
                for y in 0..m {
                    if self.rho_interval(x, y).1 > bound {
                        continue;
                    }
                    for g in 0..m as i64 {
                        if self.rho_interval(self.act(g, x), self.act(g, y)).1 > bound {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Partition into the cylinders `O_x` at `level`, as a cover of labels.
    pub fn level_partition(&self, level: usize) -> Result<CoverSpec> {
        let mk = self.chain.index(level)?;
        if level > self.depth {
            return Err(Error::invalid("level beyond the truncation depth"));
        }
        let members = (0..mk)
            .map(|c| {
                CoverMember::Patterns(
                    self.points()
                        .filter(|x| x % mk == c)
                        .map(|x| vec![x as Symbol])
                        .collect::<BTreeSet<_>>(),
                )
            })
            .collect();
        CoverSpec::new(
            format!("level({level})"),
            FiniteSubset::singleton(GroupElement::IDENTITY),
            members,
            CoverKind::Partition,
        )
    }

    /// The truncation as a one-dimensional SFT: symbols are residues and the
    /// only allowed transitions are `a -> a + 1`.
    pub fn as_shift(&self) -> Result<ShiftSystem> {
        let z = GroupModel::integers();
        let m = self.modulus() as Symbol;
        let shape = FiniteSubset::from_ints(&z, &[0, 1])?;
        let mut forbidden = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if (a as u64 + 1) % m as u64 != b as u64 {
                    forbidden.push(Forbidden {
                        shape: shape.clone(),
                        pattern: vec![a, b],
                    });
                }
            }
        }
        ShiftSystem::new(
            format!("odometer-depth-{}", self.depth),
            z,
            (0..m).map(|a| a.to_string()).collect(),
            forbidden,
            1,
        )
    }
}
