//! Seeded randomized property suites.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use sel_core::amenable::m_value;
use sel_core::entropy::{h_cover, h_cover_conditional, h_measure_cover, Schedule};
use sel_core::group::GroupKind;
use sel_core::microstate::{conditional_max, n_cover, n_separated, Microstate, MicrostateSpace};
use sel_core::shift::CylinderIndicator;
use sel_core::{
    Bracket, CoverSpec, ExtReal, FiniteSubset, GroupElement, GroupModel, InvariantMeasure, Result, ShiftSystem,
    SoficMap, System,
};

pub const INSTANCES: usize = 100;
const BUDGET: u64 = 1_000_000;
/// Absolute slack when comparing sums of logarithms of integer counts.
const LOG_SLACK: f64 = 1e-12;

pub const NAMES: [&str; 7] = [
    "membership",
    "separated",
    "composition",
    "chain",
    "subadditivity",
    "translation",
    "conventions",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub instances: usize,
    pub passed: usize,
    /// First failing instance, if any.
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn holds(&self) -> bool {
        self.passed == self.instances && self.instances >= INSTANCES
    }
}

type Instance = fn(&mut ChaCha8Rng) -> Result<Option<String>>;

pub fn run_property(name: &str, seed: u64) -> Option<SuiteResult> {
    let (salt, f): (u64, Instance) = match name {
        "membership" => (1, membership),
        "separated" => (2, separated),
        "composition" => (3, composition),
        "chain" => (4, chain),
        "subadditivity" => (5, subadditivity),
        "translation" => (6, translation),
        "conventions" => (7, conventions),
        _ => return None,
    };
    let mut passed = 0;
    let mut failure = None;
    for i in 0..INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(salt << 32 | i as u64);
        match f(&mut rng) {
            Ok(None) => passed += 1,
            Ok(Some(msg)) => {
                failure.get_or_insert(format!("instance {i}: {msg}"));
            }
            Err(e) => {
                failure.get_or_insert(format!("instance {i}: error {e}"));
            }
        }
    }
    Some(SuiteResult {
        name: name.to_string(),
        instances: INSTANCES,
        passed,
        failure,
    })
}

fn pick_system(rng: &mut ChaCha8Rng) -> (System, usize) {
    match rng.gen_range(0..3) {
        0 => (System::builtin("full-shift-2").unwrap(), 8),
        1 => (System::builtin("golden-mean").unwrap(), 8),
        _ => (System::builtin("full-shift-3").unwrap(), 5),
    }
}

fn ints(xs: &[i64]) -> FiniteSubset {
    FiniteSubset::from_ints(&GroupModel::integers(), xs).unwrap()
}

fn pick_cover(rng: &mut ChaCha8Rng, sys: &System) -> Result<CoverSpec> {
    Ok(match rng.gen_range(0..3) {
        0 => sys.standard_partition()?,
        1 => CoverSpec::window_partition(sys.as_shift().unwrap(), 1)?,
        _ => sys.whole_cover(),
    })
}

fn as_set(ms: &[&Microstate]) -> BTreeSet<Vec<u8>> {
    ms.iter().map(|m| m.labels.iter().map(|&a| a as u8).collect()).collect()
}

/// `X_{F_2,δ_1} ⊆ X_{F_1,δ_2}` for `F_1 ⊆ F_2`, `δ_1 < δ_2`, on both the
/// certified and optimistic sets, and pruning agrees with brute force.
fn membership(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (sys, dmax) = pick_system(rng);
    let d = rng.gen_range(3..=dmax);
    let sigma = SoficMap::cyclic(d)?;
    let f1 = if rng.gen_bool(0.5) { ints(&[0]) } else { ints(&[0, 1]) };
    let f2 = f1.union(&ints(&[rng.gen_range(-2..=2)]));
    let d1 = rng.gen_range(0.05..0.5);
    let d2 = d1 + rng.gen_range(0.01..0.3);
    let r = rng.gen_range(2..=6);
    let small = MicrostateSpace::new(&sys, &sigma, &f2, r)?;
    let big = MicrostateSpace::new(&sys, &sigma, &f1, r)?;
    let (es, eb) = (small.enumerate(d1)?, big.enumerate(d2)?);
    if !as_set(&es.pessimistic()).is_subset(&as_set(&eb.pessimistic())) {
        return Ok(Some(format!("certified set not monotone: d={d} F1={f1:?} F2={f2:?} δ=({d1},{d2})")));
    }
    if !as_set(&es.optimistic()).is_subset(&as_set(&eb.optimistic())) {
        return Ok(Some(format!("optimistic set not monotone: d={d} F1={f1:?} F2={f2:?} δ=({d1},{d2})")));
    }
    if (sys.label_count() as f64).powi(d as i32) <= 4096.0 {
        let brute = small.brute_force(d1)?;
        if brute.certified_in != es.certified_in || brute.unknown != es.unknown {
            return Ok(Some(format!("pruned scan differs from brute force at d={d}")));
        }
    }
    Ok(None)
}

fn small_space(rng: &mut ChaCha8Rng) -> (System, SoficMap, f64) {
    let sys = if rng.gen_bool(0.5) {
        System::builtin("full-shift-2").unwrap()
    } else {
        System::builtin("golden-mean").unwrap()
    };
    let sigma = SoficMap::cyclic(rng.gen_range(3..=7)).unwrap();
    (sys, sigma, rng.gen_range(0.2..0.5))
}

/// `ε_1 < ε_2` implies `N_{ε_2}.lo <= N_{ε_1}.hi`.
fn separated(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (sys, sigma, delta) = small_space(rng);
    let space = MicrostateSpace::new(&sys, &sigma, &ints(&[0, 1]), 4)?;
    let e = space.enumerate(delta)?;
    let (cert, opt) = (e.pessimistic(), e.optimistic());
    let eps1 = rng.gen_range(0.1..0.9);
    let eps2 = eps1 + rng.gen_range(0.01..0.4);
    let c1 = n_separated(&space, &cert, &opt, eps1, BUDGET)?.count;
    let c2 = n_separated(&space, &cert, &opt, eps2, BUDGET)?.count;
    if c2.lo > c1.hi {
        return Ok(Some(format!("N at ε={eps2} is {c2} but N at ε={eps1} is {c1}")));
    }
    Ok(None)
}

/// `N(𝒱_1, K).lo <= N(𝒱_2, K).hi · max_V N(𝒱_1, K ∩ V).hi`.
fn composition(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (sys, sigma, delta) = small_space(rng);
    let f = if rng.gen_bool(0.5) { ints(&[0]) } else { ints(&[0, 1]) };
    let space = MicrostateSpace::new(&sys, &sigma, &f, 4)?;
    let e = space.enumerate(delta)?;
    let k: Vec<&Microstate> = e.optimistic().into_iter().filter(|_| rng.gen_bool(0.6)).collect();
    let v1 = pick_cover(rng, &sys)?;
    let v2 = pick_cover(rng, &sys)?;
    let a = n_cover(&space, &v1, &k, BUDGET)?.count;
    let b = n_cover(&space, &v2, &k, BUDGET)?.count;
    let c = conditional_max(&space, &v1, &v2, &k, BUDGET)?.count;
    if a.lo > b.hi * c.hi {
        return Ok(Some(format!(
            "N({}, K) = {a} exceeds N({}, K) = {b} times {c} (|K| = {})",
            v1.name,
            v2.name,
            k.len()
        )));
    }
    Ok(None)
}

fn le_sum(a: ExtReal, b: ExtReal, c: ExtReal) -> bool {
    let rhs = b + c;
    a.is_neg_inf() || (!rhs.is_neg_inf() && a.value() <= rhs.value() + LOG_SLACK)
}

/// `h(𝒰_1).lo <= h(𝒰_2).hi + h(𝒰_1 | 𝒰_2).hi` and the same with `h_μ`.
fn chain(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (sys, dmax) = pick_system(rng);
    let mut sched = Schedule::default_for(&sys)?;
    let count = rng.gen_range(1..=2);
    let mut ds: Vec<usize> = (0..count).map(|_| rng.gen_range(3..=dmax)).collect();
    ds.sort_unstable();
    ds.dedup();
    sched.sigmas = ds.iter().map(|&d| SoficMap::cyclic(d)).collect::<Result<_>>()?;
    sched.f_list = vec![if rng.gen_bool(0.5) { ints(&[0]) } else { ints(&[0, 1]) }];
    sched.delta_list = vec![rng.gen_range(0.15..0.5)];
    let u1 = pick_cover(rng, &sys)?;
    let u2 = pick_cover(rng, &sys)?;
    let cond = h_cover_conditional(&sys, &u1, &u2, &sched)?.headline.hi;
    let a = h_cover(&sys, &u1, &sched)?.headline;
    let b = h_cover(&sys, &u2, &sched)?.headline;
    if !le_sum(a.lo, b.hi, cond) {
        return Ok(Some(format!("h({}) = {a} > h({}) = {b} + {cond}", u1.name, u2.name)));
    }
    let mu = match sys.name().as_str() {
        "golden-mean" => InvariantMeasure::golden_mean_parry(),
        "full-shift-2" => InvariantMeasure::bernoulli2(rng.gen_range(0.2..0.8))?,
        _ => InvariantMeasure::bernoulli(vec![1.0 / 3.0; 3])?,
    };
    let l = vec![vec![CylinderIndicator::symbol_at_origin(&sys.group(), 1)]];
    let am = h_measure_cover(&sys, &mu, &u1, &l, &sched)?.headline;
    let bm = h_measure_cover(&sys, &mu, &u2, &l, &sched)?.headline;
    if !le_sum(am.lo, bm.hi, cond) {
        return Ok(Some(format!("h_μ({}) = {am} > h_μ({}) = {bm} + {cond}", u1.name, u2.name)));
    }
    Ok(None)
}

struct MCase {
    sys: ShiftSystem,
    w1: CoverSpec,
    w2: CoverSpec,
}

type BoxGen = Box<dyn Fn(&mut ChaCha8Rng) -> FiniteSubset>;

fn m_case(rng: &mut ChaCha8Rng) -> Result<(MCase, BoxGen)> {
    let lattice = rng.gen_range(0..4) == 3;
    if lattice {
        let sys = ShiftSystem::full_shift_on(GroupModel::lattice2(), 2)?;
        let w1 = CoverSpec::standard_partition(&sys);
        let w2 = if rng.gen_bool(0.5) { CoverSpec::whole(sys.group()) } else { w1.clone() };
        let boxes = |rng: &mut ChaCha8Rng| {
            let (a, b) = (rng.gen_range(0..=1i64), rng.gen_range(0..=1i64));
            let (w, h) = (rng.gen_range(1..=2i64), rng.gen_range(1..=2i64));
            let pts: Vec<GroupElement> = (a..a + w)
                .flat_map(|x| (b..b + h).map(move |y| GroupElement::pair(x, y)))
                .collect();
            FiniteSubset::new(&GroupModel::lattice2(), pts).unwrap()
        };
        return Ok((MCase { sys, w1, w2 }, Box::new(boxes)));
    }
    let (sys, len, off) = match rng.gen_range(0..3) {
        0 => (ShiftSystem::full_shift(2)?, 4, 3),
        1 => (ShiftSystem::golden_mean(), 4, 3),
        _ => (ShiftSystem::full_shift(3)?, 2, 2),
    };
    let w1 = if rng.gen_bool(0.5) {
        CoverSpec::standard_partition(&sys)
    } else {
        CoverSpec::window_partition(&sys, 1)?
    };
    let w2 = match rng.gen_range(0..3) {
        0 => CoverSpec::whole(sys.group()),
        1 => CoverSpec::standard_partition(&sys),
        _ => CoverSpec::window_partition(&sys, 1)?,
    };
    let boxes = move |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(-off..=off);
        let l = rng.gen_range(1..=len);
        ints(&(a..a + l).collect::<Vec<_>>())
    };
    Ok((MCase { sys, w1, w2 }, Box::new(boxes)))
}

/// `m(E ∪ F) <= m(E) + m(F)` for random boxes.
fn subadditivity(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (c, boxes) = m_case(rng)?;
    let (e, f) = (boxes(rng), boxes(rng));
    let u = e.union(&f);
    let m = |s: &FiniteSubset| m_value(&c.sys, &c.w1, &c.w2, s);
    let (mu, me, mf) = (m(&u)?, m(&e)?, m(&f)?);
    if !le_sum(mu.lo, me.hi, mf.hi) {
        return Ok(Some(format!(
            "{} on {}|{}: m(E∪F) = {mu} > {me} + {mf} for E={e:?} F={f:?}",
            c.sys.name(),
            c.w1.name,
            c.w2.name
        )));
    }
    Ok(None)
}

/// `m(F + g) = m(F)` exactly.
fn translation(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (c, boxes) = m_case(rng)?;
    let f = boxes(rng);
    let g = match c.sys.group().kind() {
        GroupKind::Lattice(2) => GroupElement::pair(rng.gen_range(-50..=50), rng.gen_range(-50..=50)),
        _ => GroupElement::scalar(rng.gen_range(-1000..=1000)),
    };
    let moved = f.translate(c.sys.group(), g);
    let (a, b) = (m_value(&c.sys, &c.w1, &c.w2, &f)?, m_value(&c.sys, &c.w1, &c.w2, &moved)?);
    if a != b {
        return Ok(Some(format!("m(F) = {a} but m(F + {g:?}) = {b}")));
    }
    Ok(None)
}

fn random_ext(rng: &mut ChaCha8Rng) -> ExtReal {
    match rng.gen_range(0..4) {
        0 => ExtReal::NEG_INF,
        1 => ExtReal::ZERO,
        _ => ExtReal::new(rng.gen_range(-5.0..5.0)),
    }
}

/// `log 0 = -inf` and `r + (-inf) = -inf` through arithmetic, aggregates,
/// serialization and one estimator run with an empty certified set.
fn conventions(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let ninf = ExtReal::NEG_INF;
    let (x, y) = (random_ext(rng), random_ext(rng));
    let c = rng.gen_range(0.01..10.0);
    let d = rng.gen_range(1..100usize);
    let checks = [
        ("log 0", ExtReal::ln_count(0.0) == ninf),
        ("normalized log 0", ExtReal::normalized_log(0.0, d) == ninf),
        ("x + -inf", x + ninf == ninf && ninf + x == ninf),
        ("-inf + inf", ninf + ExtReal::POS_INF == ninf),
        ("scale", ninf.scale(c) == ninf),
        ("max", ninf.max(x) == x && x.max(ninf) == x),
        ("min", ninf.min(x) == ninf),
        ("sum order", (x + y == ninf) == (x == ninf || y == ninf)),
        ("empty sup", Bracket::sup(std::iter::empty()) == Bracket::neg_inf()),
        (
            "sup skips -inf",
            Bracket::sup([Bracket::neg_inf(), Bracket::exact(x)]) == Bracket::exact(x),
        ),
        (
            "bracket sum",
            (Bracket::new(ninf, x.max(y)) + Bracket::exact(y)).lo == ninf,
        ),
        (
            "json",
            serde_json::to_string(&ninf).map(|s| s == "\"-inf\"").unwrap_or(false)
                && serde_json::from_str::<ExtReal>("\"-inf\"").map(|v| v == ninf).unwrap_or(false),
        ),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Ok(Some(format!("{name} fails for x={x} y={y} c={c}")));
    }
    if rng.gen_range(0..10) == 0 {
        let sys = System::builtin("golden-mean")?;
        let mut sched = Schedule::default_for(&sys)?;
        sched.sigmas = vec![SoficMap::cyclic(rng.gen_range(3..=8))?];
        sched.delta_list = vec![0.01];
        let r = h_cover(&sys, &sys.standard_partition()?, &sched)?;
        let json = r.to_json()?;
        if !(r.headline.lo.is_neg_inf() && r.neg_inf && json.contains("\"-inf\"") && r.to_csv().contains("-inf")) {
            return Ok(Some(format!("empty certified set does not report -inf: {}", r.headline)));
        }
    }
    Ok(None)
}
