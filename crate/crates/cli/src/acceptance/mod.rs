//! Acceptance suite: ten numbered criteria, each a pass/fail line with a
//! deterministic JSON artifact.

pub mod properties;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use sel_core::amenable::{cross_check_sofic_amenable, default_indices, h_a_topological, m_value};
use sel_core::entropy::{
    bowen_measure_entropy, classify, h_measure_cover, h_space_conditional, h_topological, Schedule,
};
use sel_core::group::folner;
use sel_core::microstate::bowen::{bowen_ap_count, ApMode};
use sel_core::shift::{transfer_matrix_entropy, CylinderIndicator};
use sel_core::{Bracket, CoverSpec, ExtReal, FiniteSubset, GroupModel, InvariantMeasure, ShiftSystem, SoficMap, System};

use crate::error::CliError;
use properties::{run_property, SuiteResult};

pub const DEFAULT_SEED: u64 = 20240611;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "amenable-exactness"),
    (2, "golden-mean"),
    (3, "sofic-bracket"),
    (4, "cross-check"),
    (5, "h-expansive"),
    (6, "profinite"),
    (7, "bowen"),
    (8, "properties"),
    (9, "usc"),
    (10, "determinism"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    All,
    Criterion(u8),
    /// One property suite of criterion 8.
    Property(&'static str),
}

impl Selection {
    /// `all`, a criterion number or name, or a property suite name.
    pub fn parse(name: &str) -> Option<Selection> {
        let name = name.trim();
        if name == "all" {
            return Some(Selection::All);
        }
        if let Some((id, _)) = CRITERIA.iter().find(|(id, n)| *n == name || id.to_string() == name) {
            return Some(Selection::Criterion(*id));
        }
        properties::NAMES.iter().find(|n| **n == name).map(|n| Selection::Property(n))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub artifact: Value,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub outcomes: Vec<Outcome>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    /// Timing-free JSON; identical across runs with the same seed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("acceptance report serializes") + "\n"
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let _ = writeln!(
                out,
                "criterion {:>2} {:<20} {} ({:.1}s) {}",
                o.id,
                o.name,
                if o.pass { "PASS" } else { "FAIL" },
                o.elapsed.as_secs_f64(),
                o.detail
            );
        }
        out
    }
}

pub fn run(selection: &Selection, seed: u64) -> SuiteReport {
    let outcomes = match selection {
        Selection::All => {
            let first: Vec<Outcome> = (1..=9).map(|id| criterion(id, seed)).collect();
            let tenth = determinism(seed, Some(&first));
            first.into_iter().chain([tenth]).collect()
        }
        Selection::Criterion(10) => vec![determinism(seed, None)],
        Selection::Criterion(id) => vec![criterion(*id, seed)],
        Selection::Property(name) => {
            let start = Instant::now();
            let r = run_property(name, seed).expect("known property suite");
            vec![property_outcome(vec![r], start)]
        }
    };
    SuiteReport { seed, outcomes }
}

fn criterion(id: u8, seed: u64) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => amenable_exactness(),
        2 => golden_mean(),
        3 => sofic_bracket(),
        4 => cross_check(),
        5 => h_expansive(),
        6 => profinite(),
        7 => bowen(seed),
        8 => {
            let suites = properties::NAMES
                .iter()
                .map(|n| run_property(n, seed).expect("known property suite"))
                .collect();
            return property_outcome(suites, start);
        }
        9 => usc(),
        _ => unreachable!("criterion ids are 1 to 9 here"),
    };
    let (pass, detail, artifact) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}"), Value::Null),
    };
    finish(id, pass, detail, artifact, start)
}

fn finish(id: u8, pass: bool, detail: String, artifact: Value, start: Instant) -> Outcome {
    Outcome {
        id,
        name: CRITERIA[id as usize - 1].1.to_string(),
        pass,
        detail,
        artifact,
        elapsed: start.elapsed(),
    }
}

fn property_outcome(suites: Vec<SuiteResult>, start: Instant) -> Outcome {
    let pass = suites.iter().all(SuiteResult::holds);
    let detail = suites
        .iter()
        .map(|s| match &s.failure {
            None => format!("{} {}/{}", s.name, s.passed, s.instances),
            Some(f) => format!("{} {}/{} ({f})", s.name, s.passed, s.instances),
        })
        .collect::<Vec<_>>()
        .join("; ");
    finish(8, pass, detail, json!(suites), start)
}

type Criterion = Result<(bool, String, Value), CliError>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn ln2() -> f64 {
    2f64.ln()
}

/// `m(F) = n log 2` for `F = [0, n)`, `n <= 20`, as the log of the exact
/// count `2^n`, with the whole sweep under one second.
fn amenable_exactness() -> Criterion {
    let start = Instant::now();
    let sys = ShiftSystem::full_shift(2)?;
    let std = CoverSpec::standard_partition(&sys);
    let whole = CoverSpec::whole(sys.group());
    let mut bad = Vec::new();
    let mut values = Vec::new();
    for n in 1..=20u64 {
        let f = folner(sys.group(), n)?.base;
        let m = m_value(&sys, &std, &whole, &f)?;
        let want = ExtReal::ln_count(2f64.powi(n as i32));
        if m != Bracket::exact(want) || m.lo.value() != n as f64 * ln2() {
            bad.push(n);
        }
        values.push(json!({"n": n, "m": m}));
    }
    let fast = start.elapsed() < Duration::from_secs(1);
    let detail = if bad.is_empty() {
        format!("m([0,n)) = n log 2 for n = 1..20, runtime under 1 s: {fast}")
    } else {
        format!("mismatch at n = {bad:?}")
    };
    Ok((bad.is_empty() && fast, detail, json!(values)))
}

fn golden_mean() -> Criterion {
    let sys = System::builtin("golden-mean")?;
    let r = h_a_topological(&sys, &[sys.standard_partition()?], &[5, 10, 20])?;
    let oracle = transfer_matrix_entropy(sys.as_shift().expect("subshift"))?;
    let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let h = r.headline.hi.value();
    let pass = (h - oracle).abs() <= 0.05 && (oracle - log_phi).abs() <= 1e-8;
    let detail = format!(
        "h_a(n=20) = {h:.6}, transfer matrix {oracle:.10}, log φ {log_phi:.10}, difference {:.4}",
        (h - oracle).abs()
    );
    Ok((pass, detail, json!({"report": to_value(&r), "oracle": oracle})))
}

fn full_shift_schedule(sys: &System) -> Result<Schedule, CliError> {
    let mut s = Schedule::default_for(sys)?;
    s.sigmas = [4, 8, 12].into_iter().map(SoficMap::cyclic).collect::<Result<_, _>>()?;
    Ok(s)
}

fn sofic_bracket() -> Criterion {
    let start = Instant::now();
    let sys = System::builtin("full-shift-2")?;
    let r = h_topological(&sys, &full_shift_schedule(&sys)?)?;
    let fast = start.elapsed() <= Duration::from_secs(120);
    let pass = r.headline.contains(ln2()) && r.headline.width() <= 0.2 && fast;
    let detail = format!(
        "headline {} contains log 2: {}, width {:.4}, runtime within 2 min: {fast}",
        r.headline,
        r.headline.contains(ln2()),
        r.headline.width()
    );
    Ok((pass, detail, to_value(&r)))
}

/// Sofic and amenable headlines agree to within 0.1: the gap between the
/// brackets and the distance between their midpoints are both at most 0.1.
fn cross_check() -> Criterion {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut art = Vec::new();
    for name in ["full-shift-2", "golden-mean"] {
        let sys = System::builtin(name)?;
        let sched = full_shift_schedule(&sys)?;
        let (c, _, _) = cross_check_sofic_amenable(&sys, &sched, &default_indices(&sys))?;
        pass &= c.midpoint_diff <= 0.1 && c.gap <= 0.1;
        parts.push(format!(
            "{name}: sofic {} amenable {} gap {:.4} midpoint difference {:.4} literal overlap {}",
            c.sofic, c.amenable, c.gap, c.midpoint_diff, c.overlap
        ));
        art.push(to_value(&c));
    }
    Ok((pass, parts.join("; "), json!(art)))
}

fn h_expansive() -> Criterion {
    let sys = System::builtin("full-shift-2")?;
    let mut sched = Schedule::default_for(&sys)?;
    sched.sigmas = [4, 8].into_iter().map(SoficMap::cyclic).collect::<Result<_, _>>()?;
    let r = h_space_conditional(&sys, &sys.standard_partition()?, &sys.refining_family(2)?, &sched)?;
    let hi = r.headline.hi.value();
    let pass = hi <= 0.05;
    Ok((pass, format!("h(X | standard) = {} over window(0..2), d <= 8", r.headline), to_value(&r)))
}

fn profinite() -> Criterion {
    let sys = System::builtin("odometer-2adic")?;
    let sched = Schedule::default_for(&sys)?;
    let c = classify(&sys, &sched)?;
    let top = h_topological(&sys, &sched)?;
    let space = c
        .evidence
        .iter()
        .find(|e| e.quantity == "h_space_conditional")
        .map(|e| e.headline)
        .expect("classify reports h_space_conditional");
    let depths_ok = c.depth_checks.len() == 6 && c.depth_checks.iter().all(|d| !d.expansive);
    let pass = !c.expansive && depths_ok && top.headline.hi.value() <= 0.05 && space.hi.value() <= 0.05;
    let detail = format!(
        "expansive {} at depths 1..{}, h_topological {}, h_space_conditional {}",
        c.expansive,
        c.depth_checks.len(),
        top.headline,
        space
    );
    Ok((pass, detail, json!({"classify": to_value(&c), "h_topological": to_value(&top)})))
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exhaustive brackets at `d <= 12` within `log 2 ± 0.15` (width at most
/// 0.3), and the `d = 20` Wilson interval covering the type-class count.
fn bowen(seed: u64) -> Criterion {
    let sys = System::builtin("full-shift-2")?;
    let g = GroupModel::integers();
    let mut sched = full_shift_schedule(&sys)?;
    sched.f_list = vec![FiniteSubset::from_ints(&g, &[0])?, FiniteSubset::from_ints(&g, &[0, 1])?];
    sched.eps_list = vec![1.0, 0.5];
    sched.seed = seed;
    let half = InvariantMeasure::bernoulli2(0.5)?;
    let alpha = sys.standard_partition()?;
    let r = bowen_measure_entropy(&sys, &half, &alpha, &sched)?;
    let exhaustive_ok = r.headline.contains_within(ln2(), 0.15) && r.headline.width() <= 0.3;

    let d = 20u64;
    let eps = 0.25;
    let shift = sys.as_shift().expect("subshift");
    let mc = bowen_ap_count(
        shift,
        &SoficMap::cyclic(d as usize)?,
        &alpha,
        &FiniteSubset::from_ints(&g, &[0])?,
        eps,
        &half,
        ApMode::Sampled { samples: 10_000, seed },
    )?;
    // A labeling with c ones sits at distance 2|1/2 - c/d| from μ.
    let oracle: f64 = (0..=d)
        .filter(|&c| 2.0 * (0.5 - c as f64 / d as f64).abs() <= eps + 1e-12)
        .map(|c| binom(d, c))
        .sum();
    let mc_ok = mc.count.lo <= oracle && oracle <= mc.count.hi;
    let detail = format!(
        "exhaustive bracket {} within log 2 ± 0.15, width {:.4}; d=20 Monte Carlo interval [{:.0}, {:.0}] vs oracle {oracle:.0}",
        r.headline,
        r.headline.width(),
        mc.count.lo,
        mc.count.hi
    );
    Ok((
        exhaustive_ok && mc_ok,
        detail,
        json!({"report": to_value(&r), "monte_carlo": to_value(&mc), "oracle": oracle}),
    ))
}

/// `hi(μ_{p_n}) <= hi(μ_{0.4}) + width(μ_{0.4}) + 0.05`.
fn usc() -> Criterion {
    let sys = System::builtin("full-shift-2")?;
    let mut sched = full_shift_schedule(&sys)?;
    sched.delta_list = vec![0.05];
    let l = vec![vec![CylinderIndicator::symbol_at_origin(&sys.group(), 1)]];
    let std = sys.standard_partition()?;
    let at = |p: f64| -> Result<Bracket, CliError> {
        Ok(h_measure_cover(&sys, &InvariantMeasure::bernoulli2(p)?, &std, &l, &sched)?.headline)
    };
    let limit = at(0.4)?;
    let width = if limit.width().is_finite() { limit.width() } else { 0.0 };
    let bound = limit.hi.value() + width + 0.05;
    let mut pass = true;
    let mut rows = Vec::new();
    for p in [0.5, 0.45, 0.41, 0.405] {
        let b = at(p)?;
        pass &= b.hi.value() <= bound;
        rows.push(json!({"p": p, "headline": b}));
    }
    let detail = format!(
        "limit p=0.4 {limit}, bound {bound:.4}, hi at p_n: {}",
        rows.iter()
            .map(|r| format!("{}", r["headline"]["hi"]))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok((pass, detail, json!({"limit": limit, "points": rows})))
}

/// Re-runs criteria 1 to 9 and compares the JSON bytes.
fn determinism(seed: u64, first: Option<&[Outcome]>) -> Outcome {
    let start = Instant::now();
    let render = |o: &[Outcome]| {
        SuiteReport {
            seed,
            outcomes: o.to_vec(),
        }
        .to_json()
    };
    let a = match first {
        Some(o) => render(o),
        None => render(&(1..=9).map(|id| criterion(id, seed)).collect::<Vec<_>>()),
    };
    let b = render(&(1..=9).map(|id| criterion(id, seed)).collect::<Vec<_>>());
    let same = a == b;
    let detail = format!("two runs with seed {seed}: {} bytes, identical: {same}", a.len());
    finish(10, same, detail, json!({"bytes": a.len()}), start)
}
