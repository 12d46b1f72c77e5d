//! Bernoulli and Markov measures, evaluated on cylinders.

use serde::{Deserialize, Serialize};

use super::Symbol;
use crate::error::{Error, Result};
use crate::group::{FiniteSubset, GroupKind, GroupModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InvariantMeasure {
    Bernoulli(Vec<f64>),
    /// Stationary Markov chain on `Z`.
    Markov { p: Vec<Vec<f64>>, pi: Vec<f64> },
}

const PROB_TOL: f64 = 1e-9;

impl InvariantMeasure {
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        check_distribution(&p)?;
        Ok(InvariantMeasure::Bernoulli(p))
    }

    /// Bernoulli measure on two symbols with `P(1) = p1`.
    pub fn bernoulli2(p1: f64) -> Result<Self> {
        Self::bernoulli(vec![1.0 - p1, p1])
    }

    /// Markov measure with the unique stationary vector of `p`.
    pub fn markov(p: Vec<Vec<f64>>) -> Result<Self> {
        check_stochastic(&p)?;
        let pi = stationary(&p)?;
        Ok(InvariantMeasure::Markov { p, pi })
    }

    pub fn markov_with_stationary(p: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        check_stochastic(&p)?;
        check_distribution(&pi)?;
        if pi.len() != p.len() {
            return Err(Error::invalid("stationary vector has the wrong length"));
        }
        for j in 0..p.len() {
            let s: f64 = (0..p.len()).map(|i| pi[i] * p[i][j]).sum();
            if (s - pi[j]).abs() > PROB_TOL {
                return Err(Error::invalid("pi is not stationary for P"));
            }
        }
        Ok(InvariantMeasure::Markov { p, pi })
    }

    /// Measure of maximal entropy of the golden-mean shift.
    pub fn golden_mean_parry() -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = vec![vec![1.0 / phi, 1.0 / (phi * phi)], vec![1.0, 0.0]];
        let z = 1.0 + phi * phi;
        InvariantMeasure::Markov {
            p,
            pi: vec![phi * phi / z, 1.0 / z],
        }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            InvariantMeasure::Bernoulli(p) => p.len(),
            InvariantMeasure::Markov { pi, .. } => pi.len(),
        }
    }

    /// `μ([φ]_F)`.
    pub fn mu_cylinder(&self, group: &GroupModel, window: &FiniteSubset, phi: &[Symbol]) -> Result<f64> {
        if phi.len() != window.len() {
            return Err(Error::invalid("pattern length differs from its window"));
        }
        if phi.iter().any(|&a| a as usize >= self.alphabet_size()) {
            return Ok(0.0);
        }
        match self {
            InvariantMeasure::Bernoulli(p) => Ok(phi.iter().map(|&a| p[a as usize]).product()),
            InvariantMeasure::Markov { p, pi } => {
                if group.kind() != GroupKind::Lattice(1) {
                    return Err(Error::UnsupportedWindow(format!(
                        "Markov measures are defined on Z only, not {group}"
                    )));
                }
                let elems = window.elements();
                let mut prob = pi[phi[0] as usize];
                for j in 1..elems.len() {
                    let gap = (elems[j].0[0] - elems[j - 1].0[0]) as u32;
                    let from = phi[j - 1] as usize;
                    let to = phi[j] as usize;
                    prob *= matrix_power_entry(p, gap, from, to);
                    if prob == 0.0 {
                        break;
                    }
                }
                Ok(prob)
            }
        }
    }
}

fn matrix_power_entry(p: &[Vec<f64>], n: u32, from: usize, to: usize) -> f64 {
    let mut row = vec![0.0; p.len()];
    row[from] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; p.len()];
        for (i, &r) in row.iter().enumerate() {
            if r != 0.0 {
                for (j, &q) in p[i].iter().enumerate() {
                    next[j] += r * q;
                }
            }
        }
        row = next;
    }
    row[to]
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::invalid(format!("not a probability vector: {p:?}")));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > PROB_TOL {
        return Err(Error::invalid(format!("probabilities do not sum to 1: {p:?}")));
    }
    Ok(())
}

fn check_stochastic(p: &[Vec<f64>]) -> Result<()> {
    if p.iter().any(|row| row.len() != p.len()) {
        return Err(Error::invalid("transition matrix must be square"));
    }
    p.iter().try_for_each(|row| check_distribution(row))
}

/// Solves `πP = π`, `Σπ = 1` by Gaussian elimination.
fn stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // Rows: (P^T - I) with the last equation replaced by the normalisation.
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for j in 0..n {
            row[j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[n - 1][j] = 1.0;
    }
    a[n - 1][n] = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty");
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::invalid(
                "transition matrix has no unique stationary vector; pass it explicitly",
            ));
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect())
}

/// `1_{[pattern]_window}` as a test function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderIndicator {
    pub window: FiniteSubset,
    pub pattern: Vec<Symbol>,
}

impl CylinderIndicator {
    /// `[a]` at the identity.
    pub fn symbol_at_origin(group: &GroupModel, a: Symbol) -> Self {
        CylinderIndicator {
            window: FiniteSubset::singleton(group.identity()),
            pattern: vec![a],
        }
    }

    pub fn expectation(&self, group: &GroupModel, mu: &InvariantMeasure) -> Result<f64> {
        mu.mu_cylinder(group, &self.window, &self.pattern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: i64) -> FiniteSubset {
        FiniteSubset::from_ints(&GroupModel::integers(), &(0..n).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cylinder_examples() {
        let z = GroupModel::integers();
        let b = InvariantMeasure::bernoulli2(0.5).unwrap();
        for phi in [[0, 0, 0], [1, 0, 1], [1, 1, 1]] {
            assert_eq!(b.mu_cylinder(&z, &interval(3), &phi).unwrap(), 0.125);
        }
        let b = InvariantMeasure::bernoulli(vec![0.25, 0.75]).unwrap();
        assert_eq!(b.mu_cylinder(&z, &interval(2), &[1, 1]).unwrap(), 9.0 / 16.0);
        let m = InvariantMeasure::golden_mean_parry();
        assert_eq!(m.mu_cylinder(&z, &interval(2), &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn markov_sums_to_one_on_gapped_windows() {
        let z = GroupModel::integers();
        let m = InvariantMeasure::golden_mean_parry();
        let w = FiniteSubset::from_ints(&z, &[0, 2, 3, 7]).unwrap();
        let mut total = 0.0;
        for code in 0..16u16 {
            let phi: Vec<Symbol> = (0..4).map(|j| (code >> j) & 1).collect();
            total += m.mu_cylinder(&z, &w, &phi).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!(matches!(
            m.mu_cylinder(&GroupModel::lattice2(), &FiniteSubset::singleton(crate::group::GroupElement::IDENTITY), &[0]),
            Err(Error::UnsupportedWindow(_))
        ));
    }

    #[test]
    fn stationary_vector() {
        let m = InvariantMeasure::markov(vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let InvariantMeasure::Markov { pi, .. } = m else { unreachable!() };
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-12);
        let parry = InvariantMeasure::golden_mean_parry();
        let InvariantMeasure::Markov { p, pi } = parry else { unreachable!() };
        assert!(InvariantMeasure::markov_with_stationary(p, pi).is_ok());
        assert!(InvariantMeasure::bernoulli(vec![0.5, 0.6]).is_err());
    }
}
