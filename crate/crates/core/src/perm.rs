use std::fmt;

use crate::error::{Error, Result};

/// A bijection of `{0, .., d-1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(d: usize) -> Self {
        Permutation {
            images: (0..d as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &a in &images {
            let a = a as usize;
            if a >= d || seen[a] {
                return Err(Error::invalid(format!(
                    "not a permutation of {d} points: {images:?}"
                )));
            }
            seen[a] = true;
        }
        Ok(Permutation { images })
    }

    /// `a -> a + shift mod d`.
    pub fn rotation(d: usize, shift: i64) -> Self {
        let d_i = d as i64;
        Permutation {
            images: (0..d_i).map(|a| (a + shift).rem_euclid(d_i) as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, a: u32) -> u32 {
        self.images[a as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len());
        Permutation {
            images: other.images.iter().map(|&a| self.images[a as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (a, &b) in self.images.iter().enumerate() {
            inv[b as usize] = a as u32;
        }
        Permutation { images: inv }
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn pow(&self, n: i64) -> Permutation {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Permutation::identity(self.len());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq);
            }
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(a, &b)| a as u32 == b)
    }

    /// Cycle lengths in decreasing order.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut a = start;
            while !seen[a] {
                seen[a] = true;
                a = self.images[a] as usize;
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rotation_powers() {
        let p = Permutation::rotation(5, 1);
        assert_eq!(p.pow(2).apply(0), 2);
        assert!(p.pow(5).is_identity());
        assert_eq!(p.pow(-1), p.inverse());
        assert_eq!(p.cycle_lengths(), vec![5]);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_images(vec![0, 0]).is_err());
        assert!(Permutation::from_images(vec![0, 2]).is_err());
    }

    fn perm_strategy() -> impl Strategy<Value = Permutation> {
        (1usize..12).prop_flat_map(|d| {
            Just((0..d as u32).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::from_images(v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn pow_is_homomorphic(p in perm_strategy(), a in -20i64..20, b in -20i64..20) {
            prop_assert_eq!(p.pow(a).compose(&p.pow(b)), p.pow(a + b));
        }

        #[test]
        fn inverse_cancels(p in perm_strategy()) {
            prop_assert!(p.compose(&p.inverse()).is_identity());
        }
    }
}
