//! Cylinder covers: every member is `X` itself or a union of cylinders on a
//! common window `W0`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ShiftSystem, Symbol};
use crate::error::{Error, Result};
use crate::group::{ball, FiniteSubset, GroupElement, GroupModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverKind {
    Open,
    Closed,
    Partition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverMember {
    Whole,
    /// Union of the cylinders `[p]_{W0}` over the listed patterns.
    Patterns(BTreeSet<Vec<Symbol>>),
}

impl CoverMember {
    pub fn contains(&self, pattern: &[Symbol]) -> bool {
        match self {
            CoverMember::Whole => true,
            CoverMember::Patterns(set) => set.contains(pattern),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub name: String,
    pub window: FiniteSubset,
    pub members: Vec<CoverMember>,
    pub kind: CoverKind,
}

impl CoverSpec {
    pub fn new(
        name: impl Into<String>,
        window: FiniteSubset,
        members: Vec<CoverMember>,
        kind: CoverKind,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("a cover needs at least one member"));
        }
        Ok(CoverSpec {
            name: name.into(),
            window,
            members,
            kind,
        })
    }

    /// The trivial cover `{X}`.
    pub fn whole(group: &GroupModel) -> Self {
        CoverSpec {
            name: "{X}".into(),
            window: FiniteSubset::singleton(group.identity()),
            members: vec![CoverMember::Whole],
            kind: CoverKind::Partition,
        }
    }

    /// `{[a]_e : a in A}`.
    pub fn standard_partition(sys: &ShiftSystem) -> Self {
        CoverSpec {
            name: "standard".into(),
            window: FiniteSubset::singleton(GroupElement::IDENTITY),
            members: (0..sys.alphabet_size() as Symbol)
                .map(|a| CoverMember::Patterns(BTreeSet::from([vec![a]])))
                .collect(),
            kind: CoverKind::Partition,
        }
    }

    /// One cell per allowed pattern on `ball(radius)`.
    pub fn window_partition(sys: &ShiftSystem, radius: u64) -> Result<Self> {
        let window = ball(sys.group(), radius);
        let members = sys
            .language(&window, 1 << 16)?
            .into_iter()
            .map(|p| CoverMember::Patterns(BTreeSet::from([p])))
            .collect();
        CoverSpec::new(format!("window({radius})"), window, members, CoverKind::Partition)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.members.iter().any(|m| matches!(m, CoverMember::Whole))
            && self.kind == CoverKind::Partition
            && self.members.len() == 1
    }

    pub fn is_partition(&self) -> bool {
        self.kind == CoverKind::Partition
    }

    /// Indices of the members containing a point whose restriction to `W0` is
    /// `pattern`.
    pub fn memberships(&self, pattern: &[Symbol]) -> Vec<u32> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.contains(pattern))
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Checks coverage of the given `W0` patterns, and disjointness for partitions.
    pub fn validate_on(&self, patterns: &[Vec<Symbol>]) -> Result<()> {
        for p in patterns {
            let m = self.memberships(p);
            if m.is_empty() {
                return Err(Error::NotCovered(format!("{} misses {p:?}", self.name)));
            }
            if self.kind == CoverKind::Partition && m.len() > 1 {
                return Err(Error::invalid(format!(
                    "{} is flagged as a partition but {p:?} lies in {} members",
                    self.name,
                    m.len()
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self, sys: &ShiftSystem) -> Result<()> {
        self.validate_on(&sys.language(&self.window, 1 << 20)?)
    }

    fn inner_radius(&self, group: &GroupModel) -> Option<u64> {
        if !self.window.contains(&group.identity()) {
            return None;
        }
        let mut r = 0;
        while r < 4096 && ball(group, r + 1).is_subset(&self.window) {
            r += 1;
        }
        Some(r)
    }

    /// Upper bound on the largest member diameter.
    pub fn diameter_bound(&self, sys: &ShiftSystem) -> f64 {
        let group = sys.group();
        let Some(r) = self.inner_radius(group) else {
            return 1.0;
        };
        let metric = sys.metric();
        let b = ball(group, r);
        let mut worst: f64 = 0.0;
        for m in &self.members {
            let CoverMember::Patterns(set) = m else {
                return 1.0;
            };
            let mut diam = metric.tail(r);
            for &g in b.elements() {
                let i = self.window.position(&g).expect("ball inside window");
                let mut it = set.iter().map(|p| p[i]);
                if let Some(first) = it.next() {
                    if it.any(|a| a != first) {
                        diam += metric.weight(group, g);
                    }
                }
            }
            worst = worst.max(diam);
        }
        worst.min(1.0)
    }

    /// Lower bound on the Lebesgue number: sets of diameter below the smallest
    /// window weight agree on the whole window. Only for covers whose members
    /// are single cylinders on a ball.
    pub fn lebesgue_lower(&self, sys: &ShiftSystem) -> f64 {
        let group = sys.group();
        let singletons = self
            .members
            .iter()
            .all(|m| matches!(m, CoverMember::Patterns(s) if s.len() == 1));
        if self.is_whole() {
            return 1.0;
        }
        match self.inner_radius(group) {
            Some(r) if singletons && ball(group, r) == self.window => {
                sys.metric().weight_of_length(r)
            }
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let gm = ShiftSystem::golden_mean();
        assert_eq!(CoverSpec::standard_partition(&full).len(), 2);
        let s = CoverSpec::standard_partition(&gm);
        assert_eq!(s.len(), 2);
        s.validate(&gm).unwrap();
        let w = CoverSpec::window_partition(&gm, 1).unwrap();
        assert_eq!(w.len(), 5);
        w.validate(&gm).unwrap();
        CoverSpec::whole(gm.group()).validate(&gm).unwrap();
    }

    #[test]
    fn validation_catches_gaps_and_overlaps() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let e = FiniteSubset::singleton(GroupElement::IDENTITY);
        let half = CoverSpec::new(
            "half",
            e.clone(),
            vec![CoverMember::Patterns(BTreeSet::from([vec![0]]))],
            CoverKind::Open,
        )
        .unwrap();
        assert!(matches!(half.validate(&full), Err(Error::NotCovered(_))));
        let overlap = CoverSpec::new(
            "overlap",
            e,
            vec![
                CoverMember::Whole,
                CoverMember::Patterns(BTreeSet::from([vec![0]])),
            ],
            CoverKind::Partition,
        )
        .unwrap();
        assert!(overlap.validate(&full).is_err());
    }

    #[test]
    fn diameters() {
        let full = ShiftSystem::full_shift(2).unwrap();
        let m = *full.metric();
        let s = CoverSpec::standard_partition(&full);
        assert!((s.diameter_bound(&full) - m.tail(0)).abs() < 1e-15);
        let w2 = CoverSpec::window_partition(&full, 2).unwrap();
        assert!((w2.diameter_bound(&full) - m.tail(2)).abs() < 1e-15);
        assert!((w2.lebesgue_lower(&full) - m.weight_of_length(2)).abs() < 1e-15);
    }
}
