//! Counts of labeled partitions `β` of `{0..d}` with `d_F(α, β) <= ε`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::{CountBracket, Mode};
use crate::group::FiniteSubset;
use crate::shift::{CoverSpec, InvariantMeasure, ShiftSystem};
use crate::sofic::SoficMap;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
const SAMPLE_CHUNK: usize = 1024;
/// Slack on `d_F <= ε` for the rounding of sums of measures.
const AP_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ApMode {
    /// Enumerate every β when `k^d` is at most the cap, else sample.
    Auto { cap: f64, samples: usize, seed: u64 },
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApCount {
    /// Bracket on `|AP(σ, α: F, ε)|`.
    pub count: CountBracket,
    /// Point estimate of the count.
    pub estimate: f64,
    /// `k^d`.
    pub total: f64,
    pub mode: Mode,
}

/// `μ(A_φ)` for every `φ: F -> {0..k}`, indexed by `Σ_j φ(s_j) k^j`.
pub fn cell_measures(
    sys: &ShiftSystem,
    alpha: &CoverSpec,
    f: &FiniteSubset,
    mu: &InvariantMeasure,
) -> Result<Vec<f64>> {
    if !alpha.is_partition() {
        return Err(Error::invalid("Bowen counts need a partition"));
    }
    let group = sys.group();
    let k = alpha.len();
    let cells = (k as f64).powi(f.len() as i32);
    if cells > (1u64 << 16) as f64 {
        return Err(Error::cap("cells of the F-join of α", cells, (1u64 << 16) as f64));
    }
    let joined = alpha.window.sum(group, f);
    let pos: Vec<Vec<usize>> = f
        .elements()
        .iter()
        .map(|&s| {
            alpha
                .window
                .elements()
                .iter()
                .map(|&w| joined.position(&group.op(s, w)).expect("inside the joined window"))
                .collect()
        })
        .collect();
    let mut out = vec![0.0; cells as usize];
    let mut err = None;
    sys.visit_language(&joined, usize::MAX, &mut |p| {
        let mut code = 0usize;
        let mut scale = 1usize;
        for ps in &pos {
            let sub: Vec<_> = ps.iter().map(|&i| p[i]).collect();
            let Some(&m) = alpha.memberships(&sub).first() else {
                err = Some(Error::NotCovered(format!("{} misses {sub:?}", alpha.name)));
                return false;
            };
            code += m as usize * scale;
            scale *= k;
        }
        match mu.mu_cylinder(group, &joined, p) {
            Ok(x) => out[code] += x,
            Err(e) => {
                err = Some(e);
                return false;
            }
        }
        true
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(out)
}

struct ApKernel<'a> {
    d: usize,
    k: usize,
    /// `images[j][i] = σ_{s_j}(i)`.
    images: Vec<Vec<u32>>,
    mu: &'a [f64],
    mu_total: f64,
    eps: f64,
}

impl ApKernel<'_> {
    fn qualifies(&self, beta: &[u16], counts: &mut [u32], touched: &mut Vec<usize>) -> bool {
        touched.clear();
        for i in 0..self.d {
            let mut code = 0usize;
            let mut scale = 1usize;
            for img in &self.images {
                code += beta[img[i] as usize] as usize * scale;
                scale *= self.k;
            }
            if counts[code] == 0 {
                touched.push(code);
            }
            counts[code] += 1;
        }
        let mut dist = self.mu_total;
        for &c in touched.iter() {
            let z = counts[c] as f64 / self.d as f64;
            dist += (self.mu[c] - z).abs() - self.mu[c];
            counts[c] = 0;
        }
        dist <= self.eps + AP_SLACK
    }
}

/// `|AP(σ, α: F, ε)|` with `ζ` the uniform measure on `{0..d}`.
pub fn bowen_ap_count(
    sys: &ShiftSystem,
    sigma: &SoficMap,
    alpha: &CoverSpec,
    f: &FiniteSubset,
    eps: f64,
    mu: &InvariantMeasure,
    mode: ApMode,
) -> Result<ApCount> {
    let mu_cells = cell_measures(sys, alpha, f, mu)?;
    ap_count_with(sigma, alpha.len(), f, eps, &mu_cells, mode)
}

/// As [`bowen_ap_count`] with precomputed cell measures.
pub fn ap_count_with(
    sigma: &SoficMap,
    k: usize,
    f: &FiniteSubset,
    eps: f64,
    mu_cells: &[f64],
    mode: ApMode,
) -> Result<ApCount> {
    let d = sigma.d();
    let kernel = ApKernel {
        d,
        k,
        images: f
            .elements()
            .iter()
            .map(|&s| sigma.sigma_of(s).images().to_vec())
            .collect(),
        mu: mu_cells,
        mu_total: mu_cells.iter().sum(),
        eps,
    };
    let total = (k as f64).powi(d as i32);
    let exhaustive = match mode {
        ApMode::Auto { cap, .. } => total <= cap,
        ApMode::Sampled { .. } => false,
    };
    if exhaustive {
        let n = total as u64;
        let hits: u64 = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![0u16; d], vec![0u32; mu_cells.len()], Vec::new()),
                |(beta, counts, touched), idx| {
                    let mut x = idx;
                    for b in beta.iter_mut() {
                        *b = (x % k as u64) as u16;
                        x /= k as u64;
                    }
                    kernel.qualifies(beta, counts, touched) as u64
                },
            )
            .sum();
        return Ok(ApCount {
            count: CountBracket::exact(hits as f64),
            estimate: hits as f64,
            total,
            mode: Mode::Exact,
        });
    }
    let (samples, seed) = match mode {
        ApMode::Auto { samples, seed, .. } | ApMode::Sampled { samples, seed } => (samples, seed),
    };
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one sample"));
    }
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            let mut beta = vec![0u16; d];
            let mut counts = vec![0u32; mu_cells.len()];
            let mut touched = Vec::new();
            let mut h = 0u64;
            for _ in 0..n {
                for b in beta.iter_mut() {
                    *b = rng.gen_range(0..k as u16);
                }
                h += kernel.qualifies(&beta, &mut counts, &mut touched) as u64;
            }
            h
        })
        .sum();
    let (lo, hi) = wilson(hits, samples as u64, Z95);
    let p = hits as f64 / samples as f64;
    Ok(ApCount {
        count: CountBracket::new(total * lo, total * hi),
        estimate: total * p,
        total,
        mode: Mode::Sampled,
    })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(hits: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;
    use proptest::prelude::*;

    fn setup() -> (ShiftSystem, CoverSpec, InvariantMeasure) {
        let sys = ShiftSystem::full_shift(2).unwrap();
        let alpha = CoverSpec::standard_partition(&sys);
        (sys, alpha, InvariantMeasure::bernoulli2(0.5).unwrap())
    }

    fn exhaustive() -> ApMode {
        ApMode::Auto {
            cap: (1u64 << 24) as f64,
            samples: 10_000,
            seed: 7,
        }
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn ap_examples() {
        let (sys, alpha, mu) = setup();
        let z = GroupModel::integers();
        let f0 = FiniteSubset::from_ints(&z, &[0]).unwrap();
        let s2 = SoficMap::cyclic(2).unwrap();
        let c = bowen_ap_count(&sys, &s2, &alpha, &f0, 0.1, &mu, exhaustive()).unwrap();
        assert_eq!(c.count, CountBracket::exact(2.0));
        let c = bowen_ap_count(&sys, &s2, &alpha, &f0, 2.0, &mu, exhaustive()).unwrap();
        assert_eq!(c.count, CountBracket::exact(4.0));
        let f01 = FiniteSubset::from_ints(&z, &[0, 1]).unwrap();
        let s5 = SoficMap::cyclic(5).unwrap();
        let c = bowen_ap_count(&sys, &s5, &alpha, &f01, 2.0, &mu, exhaustive()).unwrap();
        assert_eq!(c.count, CountBracket::exact(32.0));
    }

    #[test]
    fn type_class_oracle() {
        let (sys, alpha, mu) = setup();
        let f0 = FiniteSubset::from_ints(&GroupModel::integers(), &[0]).unwrap();
        for d in [4usize, 8, 12] {
            let sigma = SoficMap::cyclic(d).unwrap();
            for eps in [0.25, 0.5, 1.0] {
                let got = bowen_ap_count(&sys, &sigma, &alpha, &f0, eps, &mu, exhaustive()).unwrap();
                // d_F = 2 |1/2 - c/d| for a labeling with c ones.
                let want: u64 = (0..=d as u64)
                    .filter(|&c| 2.0 * (0.5 - c as f64 / d as f64).abs() <= eps + 1e-12)
                    .map(|c| binom(d as u64, c))
                    .sum();
                assert_eq!(got.count, CountBracket::exact(want as f64));
            }
        }
    }

    #[test]
    fn monte_carlo_covers_the_oracle() {
        let (sys, alpha, mu) = setup();
        let f0 = FiniteSubset::from_ints(&GroupModel::integers(), &[0]).unwrap();
        let sigma = SoficMap::cyclic(20).unwrap();
        let mode = ApMode::Sampled {
            samples: 10_000,
            seed: 11,
        };
        let c = bowen_ap_count(&sys, &sigma, &alpha, &f0, 0.25, &mu, mode).unwrap();
        let q = 772_616.0 / 1_048_576.0;
        assert!(c.count.lo <= q * c.total && q * c.total <= c.count.hi, "{c:?}");
        let again = bowen_ap_count(&sys, &sigma, &alpha, &f0, 0.25, &mu, mode).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn wilson_interval() {
        let (lo, hi) = wilson(50, 100, Z95);
        assert!(lo < 0.5 && 0.5 < hi);
        assert_eq!(wilson(0, 10, Z95).0, 0.0);
        assert_eq!(wilson(10, 10, Z95).1, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn never_exceeds_k_to_the_d(d in 1usize..9, eps in 0.0f64..2.5, wide in any::<bool>()) {
            let (sys, alpha, mu) = setup();
            let z = GroupModel::integers();
            let f = FiniteSubset::from_ints(&z, if wide { &[0, 1, 3] } else { &[0] }).unwrap();
            let sigma = SoficMap::cyclic(d).unwrap();
            let c = bowen_ap_count(&sys, &sigma, &alpha, &f, eps, &mu, exhaustive()).unwrap();
            prop_assert!(c.count.hi <= 2f64.powi(d as i32));
        }

        #[test]
        fn sampling_agrees_with_enumeration(d in 4usize..11, eps in 0.1f64..1.2, seed in 0u64..1000) {
            let (sys, alpha, mu) = setup();
            let f = FiniteSubset::from_ints(&GroupModel::integers(), &[0, 1]).unwrap();
            let sigma = SoficMap::cyclic(d).unwrap();
            let exact = bowen_ap_count(&sys, &sigma, &alpha, &f, eps, &mu, exhaustive()).unwrap();
            let mc = bowen_ap_count(&sys, &sigma, &alpha, &f, eps, &mu, ApMode::Sampled { samples: 4000, seed }).unwrap();
            let (lo, hi) = wilson((mc.estimate / mc.total * 4000.0).round() as u64, 4000, 4.4);
            let q = exact.count.lo / exact.total;
            prop_assert!(lo <= q && q <= hi, "q={} not in [{}, {}]", q, lo, hi);
        }
    }
}
