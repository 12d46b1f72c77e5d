//! Microstates: labelings `ω: {0..d} -> labels` pulled back along a sofic
//! map to candidate tuples `(x_1, .., x_d)`.
//!
//! For a subshift the pullback is `x_i(g) = ω(σ_g(i))` on the window
//! `ball(R + r_F)`. For an odometer the label is the truncated point itself.

pub mod bowen;
pub mod cover_count;
pub mod separated;

use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{ball, FiniteSubset, GroupElement, GroupKind};
use crate::shift::{CylinderIndicator, InvariantMeasure, OdometerSystem, ShiftSystem, Symbol};
use crate::sofic::SoficMap;
use crate::system::System;

pub use bowen::{bowen_ap_count, ApCount, ApMode};
pub use cover_count::{conditional_counts, conditional_max, n_cover, set_cover, CoverCount, CoverProfiles};
pub use separated::{max_clique, n_separated, SeparatedCount};

pub const DEFAULT_NODE_CAP: u64 = 1 << 24;

/// Relative slack applied to threshold comparisons in the sound direction.
const REL_SLACK: f64 = 1e-9;
/// Empirical averages within this of `δ` count as equal to it.
const TIE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    In,
    Out,
    Unknown,
}

/// The worst `s` and its root-mean-square interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub s: GroupElement,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub status: Status,
    pub witness: Option<Witness>,
    /// Set when a forbidden or non-extendable pattern appears in a pullback.
    pub forbidden: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Microstate {
    pub labels: Vec<Symbol>,
}

impl Microstate {
    pub fn new(labels: Vec<Symbol>) -> Self {
        Microstate { labels }
    }

    pub fn d(&self) -> usize {
        self.labels.len()
    }
}

/// Certified-in and undecided microstates, in lexicographic order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Enumeration {
    pub certified_in: Vec<Microstate>,
    pub unknown: Vec<Microstate>,
    pub nodes: u64,
}

impl Enumeration {
    /// IN followed by UNKNOWN: the optimistic point set.
    pub fn optimistic(&self) -> Vec<&Microstate> {
        self.certified_in.iter().chain(&self.unknown).collect()
    }

    pub fn pessimistic(&self) -> Vec<&Microstate> {
        self.certified_in.iter().collect()
    }
}

#[derive(Clone, Debug)]
enum Kind<'a> {
    Shift {
        sys: &'a ShiftSystem,
        tail: f64,
        /// Positions of `ball(R)` inside the pullback window.
        ball_pos: Vec<usize>,
        ball_w: Vec<f64>,
    },
    Odometer(&'a OdometerSystem),
}

/// A term `ρ(s x_i, x_{σ_s(i)})` is a sum of atoms; each atom compares two labels.
#[derive(Clone, Debug)]
struct Atom {
    a: u32,
    b: u32,
    /// Shift: weight of the coordinate. Odometer: unused.
    w: f64,
    /// Odometer: the group element added to `ω(a)`.
    shift: i64,
    term: u32,
}

#[derive(Clone, Debug)]
struct Constraint {
    idx: Vec<u32>,
    sym: Vec<Symbol>,
}

pub struct MicrostateSpace<'a> {
    kind: Kind<'a>,
    sigma: &'a SoficMap,
    f: FiniteSubset,
    r: u64,
    d: usize,
    labels: usize,
    window: FiniteSubset,
    /// `pull[i][j] = σ_{window[j]}(i)`.
    pull: Vec<Vec<u32>>,
    atoms: Vec<Atom>,
    atoms_at: Vec<Vec<u32>>,
    constraints: Vec<Constraint>,
    constraints_at: Vec<Vec<u32>>,
    /// Extra upper slack per term (the metric tail for shifts).
    term_extra: f64,
    extendable: Option<Box<dyn Fn(&[Symbol]) -> bool + Send + Sync + 'a>>,
    node_cap: u64,
}

impl<'a> MicrostateSpace<'a> {
    pub fn new(system: &'a System, sigma: &'a SoficMap, f: &FiniteSubset, r: u64) -> Result<Self> {
        if sigma.group() != &system.group() {
            return Err(Error::invalid(format!(
                "sofic map is for {} but the system lives on {}",
                sigma.group(),
                system.group()
            )));
        }
        let group = system.group();
        let d = sigma.d();
        match system {
            System::Shift(sys) => {
                if r > sys.r_max() {
                    return Err(Error::WindowTooSmall(format!(
                        "R = {r} exceeds R_max = {}",
                        sys.r_max()
                    )));
                }
                let rf = f.radius(&group);
                let window = ball(&group, r + rf);
                let perms: Vec<_> = window.elements().iter().map(|&g| sigma.sigma_of(g)).collect();
                let pull: Vec<Vec<u32>> = (0..d as u32)
                    .map(|i| perms.iter().map(|p| p.apply(i)).collect())
                    .collect();
                let b = ball(&group, r);
                let ball_pos: Vec<usize> = b
                    .elements()
                    .iter()
                    .map(|g| window.position(g).expect("ball(R) inside the pullback window"))
                    .collect();
                let ball_w = sys.metric().weights_on(&group, &b);
                let mut atoms = Vec::new();
                for (si, &s) in f.elements().iter().enumerate() {
                    let sigma_s = sigma.sigma_of(s);
                    for i in 0..d {
                        let term = (si * d + i) as u32;
                        let si_img = sigma_s.apply(i as u32) as usize;
                        for (k, &g) in b.elements().iter().enumerate() {
                            let gs = group.op(g, s);
                            let ja = window.position(&gs).ok_or_else(|| {
                                Error::WindowTooSmall(format!("{gs} outside the pullback window"))
                            })?;
                            let a = pull[i][ja];
                            let bb = pull[si_img][ball_pos[k]];
                            if a != bb {
                                atoms.push(Atom {
                                    a,
                                    b: bb,
                                    w: ball_w[k],
                                    shift: 0,
                                    term,
                                });
                            }
                        }
                    }
                }
                let mut seen = HashSet::new();
                let mut constraints = Vec::new();
                let placements = sys.placements(&window);
                for row in &pull {
                    'pl: for pl in &placements {
                        let mut pairs: Vec<(u32, Symbol)> = pl
                            .positions
                            .iter()
                            .zip(&pl.pattern)
                            .map(|(&p, &a)| (row[p], a))
                            .collect();
                        pairs.sort_unstable();
                        pairs.dedup();
                        for w in pairs.windows(2) {
                            if w[0].0 == w[1].0 {
                                continue 'pl;
                            }
                        }
                        if seen.insert(pairs.clone()) {
                            let (idx, sym) = pairs.into_iter().unzip();
                            constraints.push(Constraint { idx, sym });
                        }
                    }
                }
                let extendable = extendability_check(sys, &window)?;
                let tail = sys.metric().tail(r);
                let mut space = MicrostateSpace {
                    kind: Kind::Shift {
                        sys,
                        tail,
                        ball_pos,
                        ball_w,
                    },
                    sigma,
                    f: f.clone(),
                    r,
                    d,
                    labels: sys.alphabet_size(),
                    window,
                    pull,
                    atoms,
                    atoms_at: Vec::new(),
                    constraints,
                    constraints_at: Vec::new(),
                    term_extra: tail,
                    extendable,
                    node_cap: DEFAULT_NODE_CAP,
                };
                space.index_triggers();
                Ok(space)
            }
            System::Odometer(o) => {
                let window = FiniteSubset::singleton(GroupElement::IDENTITY);
                let pull = (0..d as u32).map(|i| vec![i]).collect();
                let mut atoms = Vec::new();
                for (si, &s) in f.elements().iter().enumerate() {
                    let sigma_s = sigma.sigma_of(s);
                    for i in 0..d {
                        atoms.push(Atom {
                            a: i as u32,
                            b: sigma_s.apply(i as u32),
                            w: 0.0,
                            shift: s.0[0],
                            term: (si * d + i) as u32,
                        });
                    }
                }
                let mut space = MicrostateSpace {
                    kind: Kind::Odometer(o),
                    sigma,
                    f: f.clone(),
                    r,
                    d,
                    labels: o.modulus() as usize,
                    window,
                    pull,
                    atoms,
                    atoms_at: Vec::new(),
                    constraints: Vec::new(),
                    constraints_at: Vec::new(),
                    term_extra: 0.0,
                    extendable: None,
                    node_cap: DEFAULT_NODE_CAP,
                };
                space.index_triggers();
                Ok(space)
            }
        }
    }

    fn index_triggers(&mut self) {
        let d = self.d;
        self.atoms_at = vec![Vec::new(); d];
        for (k, at) in self.atoms.iter().enumerate() {
            self.atoms_at[at.a.max(at.b) as usize].push(k as u32);
        }
        self.constraints_at = vec![Vec::new(); d];
        for (k, c) in self.constraints.iter().enumerate() {
            let top = *c.idx.iter().max().expect("non-empty constraint");
            self.constraints_at[top as usize].push(k as u32);
        }
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    pub fn sigma(&self) -> &SoficMap {
        self.sigma
    }

    pub fn f(&self) -> &FiniteSubset {
        &self.f
    }

    /// The pullback window `ball(R + r_F)`; `{e}` for odometers.
    pub fn window(&self) -> &FiniteSubset {
        &self.window
    }

    /// Upper bound on `ρ(x, y)` for points whose pullbacks agree.
    pub fn tail(&self) -> f64 {
        match &self.kind {
            Kind::Shift { tail, .. } => *tail,
            Kind::Odometer(o) => o.resolution(),
        }
    }

    pub fn is_odometer(&self) -> bool {
        matches!(self.kind, Kind::Odometer(_))
    }

    /// `x_i` restricted to `W`, for `W` inside the pullback window.
    pub fn pullback_on(&self, m: &Microstate, i: usize, w: &FiniteSubset) -> Result<Vec<Symbol>> {
        w.elements()
            .iter()
            .map(|g| {
                self.window
                    .position(g)
                    .map(|j| m.labels[self.pull[i][j] as usize])
                    .ok_or_else(|| {
                        Error::WindowTooSmall(format!(
                            "{g} lies outside the pullback window of radius {}",
                            self.window_radius()
                        ))
                    })
            })
            .collect()
    }

    fn window_radius(&self) -> u64 {
        match &self.kind {
            Kind::Shift { sys, .. } => self.window.radius(sys.group()),
            Kind::Odometer(_) => 0,
        }
    }

    /// The whole pullback pattern of `x_i`.
    pub fn pullback(&self, m: &Microstate, i: usize) -> Vec<Symbol> {
        self.pull[i].iter().map(|&j| m.labels[j as usize]).collect()
    }

    fn atom_interval(&self, at: &Atom, w: &[Symbol]) -> (f64, f64) {
        match &self.kind {
            Kind::Shift { .. } => {
                if w[at.a as usize] != w[at.b as usize] {
                    (at.w, at.w)
                } else {
                    (0.0, 0.0)
                }
            }
            Kind::Odometer(o) => {
                let x = o.act(at.shift, w[at.a as usize] as u64);
                o.rho_interval(x, w[at.b as usize] as u64)
            }
        }
    }

    fn thresholds(&self, delta: f64) -> (f64, f64) {
        let t = delta * delta * self.d as f64;
        (t * (1.0 - REL_SLACK), t * (1.0 + REL_SLACK))
    }

    /// Per-`s` sums of squared lower and upper term values.
    fn term_sums(&self, w: &[Symbol]) -> (Vec<f64>, Vec<f64>) {
        let nterms = self.f.len() * self.d;
        let mut lo = vec![0.0; nterms];
        let mut hi = vec![0.0; nterms];
        for at in &self.atoms {
            let (l, h) = self.atom_interval(at, w);
            lo[at.term as usize] += l;
            hi[at.term as usize] += h;
        }
        let mut lo2 = vec![0.0; self.f.len()];
        let mut hi2 = vec![0.0; self.f.len()];
        for t in 0..nterms {
            let l = lo[t].min(1.0);
            let h = (hi[t] + self.term_extra).min(1.0).max(l);
            lo2[t / self.d] += l * l;
            hi2[t / self.d] += h * h;
        }
        (lo2, hi2)
    }

    fn violates(&self, w: &[Symbol]) -> bool {
        if self.constraints.iter().any(|c| c.idx.iter().zip(&c.sym).all(|(&i, &a)| w[i as usize] == a)) {
            return true;
        }
        if let Some(ext) = &self.extendable {
            let mut buf = vec![0; self.window.len()];
            for row in &self.pull {
                for (b, &j) in buf.iter_mut().zip(row) {
                    *b = w[j as usize];
                }
                if !ext(&buf) {
                    return true;
                }
            }
        }
        false
    }

    fn classify_full(&self, w: &[Symbol], delta: f64) -> MembershipVerdict {
        if self.violates(w) {
            return MembershipVerdict {
                status: Status::Out,
                witness: None,
                forbidden: true,
            };
        }
        let (in_t, out_t) = self.thresholds(delta);
        let (lo2, hi2) = self.term_sums(w);
        let d = self.d as f64;
        let mut worst = 0;
        for k in 0..lo2.len() {
            if (lo2[k], hi2[k]) > (lo2[worst], hi2[worst]) {
                worst = k;
            }
        }
        let status = if lo2.iter().any(|&x| x > out_t) {
            Status::Out
        } else if hi2.iter().all(|&x| x < in_t) {
            Status::In
        } else {
            Status::Unknown
        };
        let witness = (!lo2.is_empty()).then(|| Witness {
            s: self.f.elements()[worst],
            lo: (lo2[worst] / d).sqrt(),
            hi: (hi2[worst] / d).sqrt(),
        });
        MembershipVerdict {
            status,
            witness,
            forbidden: false,
        }
    }

    /// Three-valued test of `max_s sqrt((1/d) Σ_i ρ²(s x_i, x_{σ_s(i)})) < δ`.
    pub fn membership(&self, m: &Microstate, delta: f64) -> Result<MembershipVerdict> {
        self.check_labels(m)?;
        check_delta(delta)?;
        Ok(self.classify_full(&m.labels, delta))
    }

    fn check_labels(&self, m: &Microstate) -> Result<()> {
        if m.d() != self.d {
            return Err(Error::invalid(format!("microstate has d = {} but σ has d = {}", m.d(), self.d)));
        }
        if m.labels.iter().any(|&a| a as usize >= self.labels) {
            return Err(Error::invalid("label outside the alphabet"));
        }
        Ok(())
    }

    /// Exhaustive pruned scan of all labelings.
    pub fn enumerate(&self, delta: f64) -> Result<Enumeration> {
        check_delta(delta)?;
        let q = self.labels;
        let d = self.d;
        let mut depth = 0;
        let mut tasks = 1usize;
        while depth < d && tasks < 256 {
            tasks = tasks.saturating_mul(q);
            depth += 1;
        }
        let nodes = AtomicU64::new(0);
        let results: Vec<Result<Vec<(Vec<Symbol>, Status)>>> = (0..tasks)
            .into_par_iter()
            .map(|t| {
                let mut prefix = vec![0 as Symbol; depth];
                let mut x = t;
                for p in (0..depth).rev() {
                    prefix[p] = (x % q) as Symbol;
                    x /= q;
                }
                let mut search = Search::new(self, delta, &nodes);
                search.run(&prefix)?;
                Ok(search.found)
            })
            .collect();
        let mut out = Enumeration {
            nodes: nodes.load(Ordering::Relaxed),
            ..Default::default()
        };
        for r in results {
            for (labels, st) in r? {
                match st {
                    Status::In => out.certified_in.push(Microstate::new(labels)),
                    Status::Unknown => out.unknown.push(Microstate::new(labels)),
                    Status::Out => {}
                }
            }
        }
        Ok(out)
    }

    /// Unpruned scan through [`MicrostateSpace::membership`]; a test oracle.
    pub fn brute_force(&self, delta: f64) -> Result<Enumeration> {
        let total = (self.labels as f64).powi(self.d as i32);
        if total > self.node_cap as f64 {
            return Err(Error::cap("labelings", total, self.node_cap as f64));
        }
        let mut out = Enumeration::default();
        let mut w = vec![0 as Symbol; self.d];
        loop {
            match self.classify_full(&w, delta).status {
                Status::In => out.certified_in.push(Microstate::new(w.clone())),
                Status::Unknown => out.unknown.push(Microstate::new(w.clone())),
                Status::Out => {}
            }
            out.nodes += 1;
            let mut p = self.d;
            loop {
                if p == 0 {
                    return Ok(out);
                }
                p -= 1;
                w[p] += 1;
                if (w[p] as usize) < self.labels {
                    break;
                }
                w[p] = 0;
            }
        }
    }

    /// `max_{f in L} |(1/d) Σ_i f(x_i) - μ(f)| < δ`.
    pub fn empirical_check(
        &self,
        m: &Microstate,
        mu: &InvariantMeasure,
        l: &[CylinderIndicator],
        delta: f64,
    ) -> Result<bool> {
        let Kind::Shift { sys, .. } = &self.kind else {
            return Err(Error::UnsupportedWindow(
                "empirical checks need cylinder functions on a subshift".into(),
            ));
        };
        for f in l {
            let expect = f.expectation(sys.group(), mu)?;
            let mut hits = 0usize;
            for i in 0..self.d {
                if self.pullback_on(m, i, &f.window)? == f.pattern {
                    hits += 1;
                }
            }
            if (hits as f64 / self.d as f64 - expect).abs() >= delta - TIE_SLACK {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Interval for `ρ(x_i, x_i')` at every coordinate.
    pub fn coordinate_distances(&self, m1: &Microstate, m2: &Microstate) -> Vec<(f64, f64)> {
        (0..self.d)
            .map(|i| match &self.kind {
                Kind::Shift {
                    tail, ball_pos, ball_w, ..
                } => {
                    let row = &self.pull[i];
                    let mut lo = 0.0;
                    for (&p, &w) in ball_pos.iter().zip(ball_w) {
                        let j = row[p] as usize;
                        if m1.labels[j] != m2.labels[j] {
                            lo += w;
                        }
                    }
                    (lo, (lo + tail).min(1.0).max(lo))
                }
                Kind::Odometer(o) => o.rho_interval(m1.labels[i] as u64, m2.labels[i] as u64),
            })
            .collect()
    }

    /// `ρ_d(x, x') = max_i ρ(x_i, x_i')` as an interval.
    pub fn rho_d_interval(&self, m1: &Microstate, m2: &Microstate) -> (f64, f64) {
        self.coordinate_distances(m1, m2)
            .into_iter()
            .fold((0.0, 0.0), |(a, b), (l, h)| (a.max(l), b.max(h)))
    }

    /// Per-coordinate data from which distances are computed quickly: the
    /// labels seen on `ball(R)` (shifts) or the label itself (odometers).
    pub(crate) fn distance_keys(&self, m: &Microstate) -> Vec<Symbol> {
        match &self.kind {
            Kind::Shift { ball_pos, .. } => {
                let mut v = Vec::with_capacity(self.d * ball_pos.len());
                for row in &self.pull {
                    v.extend(ball_pos.iter().map(|&p| m.labels[row[p] as usize]));
                }
                v
            }
            Kind::Odometer(_) => m.labels.clone(),
        }
    }

    pub(crate) fn distance_kernel(&self) -> DistanceKernel<'_> {
        match &self.kind {
            Kind::Shift { tail, ball_w, .. } => DistanceKernel::Shift {
                weights: ball_w,
                tail: *tail,
            },
            Kind::Odometer(o) => DistanceKernel::Odometer(o),
        }
    }

    /// Labels of `W0`-patterns of every coordinate, for cover membership.
    pub fn coordinate_patterns(&self, m: &Microstate, w0: &FiniteSubset) -> Result<Vec<Vec<Symbol>>> {
        (0..self.d).map(|i| self.pullback_on(m, i, w0)).collect()
    }

    /// Line-oriented dump: `d` followed by `ω` as a symbol string.
    pub fn dump_line(&self, m: &Microstate) -> String {
        let body = match &self.kind {
            Kind::Shift { sys, .. } => sys.format_pattern(&m.labels),
            Kind::Odometer(_) => m
                .labels
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
        };
        format!("{} {}", self.d, body)
    }
}

pub(crate) enum DistanceKernel<'a> {
    Shift { weights: &'a [f64], tail: f64 },
    Odometer(&'a OdometerSystem),
}

impl DistanceKernel<'_> {
    /// Classifies a pair against `eps`: `Some(true)` certified separated,
    /// `Some(false)` certified closer, `None` undecided.
    pub(crate) fn separation(&self, x: &[Symbol], y: &[Symbol], eps: f64) -> Option<bool> {
        match self {
            DistanceKernel::Shift { weights, tail } => {
                let total: f64 = weights.iter().sum();
                if (total + tail).min(1.0) < eps {
                    return Some(false);
                }
                let b = weights.len();
                let mut all_close = true;
                for (cx, cy) in x.chunks_exact(b).zip(y.chunks_exact(b)) {
                    let mut lo = 0.0;
                    for k in 0..b {
                        if cx[k] != cy[k] {
                            lo += weights[k];
                        }
                    }
                    if lo >= eps {
                        return Some(true);
                    }
                    if (lo + tail).min(1.0) >= eps {
                        all_close = false;
                    }
                }
                all_close.then_some(false)
            }
            DistanceKernel::Odometer(o) => {
                let mut all_close = true;
                for (&a, &b) in x.iter().zip(y) {
                    let (lo, hi) = o.rho_interval(a as u64, b as u64);
                    if lo >= eps {
                        return Some(true);
                    }
                    if hi >= eps {
                        all_close = false;
                    }
                }
                all_close.then_some(false)
            }
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("δ must be positive, got {delta}")));
    }
    Ok(())
}

type ExtCheck<'a> = Option<Box<dyn Fn(&[Symbol]) -> bool + Send + Sync + 'a>>;

/// Global extendability of pullback patterns where it is decidable.
fn extendability_check<'a>(sys: &'a ShiftSystem, window: &FiniteSubset) -> Result<ExtCheck<'a>> {
    if sys.forbidden().is_empty() {
        return Ok(None);
    }
    match sys.group().kind() {
        GroupKind::Lattice(1) => match sys.block_graph() {
            Ok(graph) => {
                let w = window.clone();
                Ok(Some(Box::new(move |p: &[Symbol]| graph.extendable(&w, p))))
            }
            Err(Error::NotRecodable(_)) => Ok(None),
            Err(e) => Err(e),
        },
        GroupKind::Cyclic(_) => {
            let lang: BTreeSet<Vec<Symbol>> = sys.language(window, 1 << 20)?.into_iter().collect();
            Ok(Some(Box::new(move |p: &[Symbol]| lang.contains(p))))
        }
        GroupKind::Lattice(_) => Ok(None),
    }
}

struct Undo {
    term: u32,
    partial: f64,
    s: u32,
    lo2: f64,
}

struct Search<'s, 'a> {
    space: &'s MicrostateSpace<'a>,
    delta: f64,
    out_t: f64,
    w: Vec<Symbol>,
    partial: Vec<f64>,
    lo2: Vec<f64>,
    undo: Vec<Undo>,
    found: Vec<(Vec<Symbol>, Status)>,
    nodes: &'s AtomicU64,
    local_nodes: u64,
}

impl<'s, 'a> Search<'s, 'a> {
    fn new(space: &'s MicrostateSpace<'a>, delta: f64, nodes: &'s AtomicU64) -> Self {
        let (_, out_t) = space.thresholds(delta);
        Search {
            space,
            delta,
            out_t,
            w: vec![0; space.d],
            partial: vec![0.0; space.f.len() * space.d],
            lo2: vec![0.0; space.f.len()],
            undo: Vec::new(),
            found: Vec::new(),
            nodes,
            local_nodes: 0,
        }
    }

    fn count_node(&mut self) -> Result<()> {
        self.local_nodes += 1;
        if self.local_nodes == 4096 {
            let total = self.nodes.fetch_add(self.local_nodes, Ordering::Relaxed) + self.local_nodes;
            self.local_nodes = 0;
            if total > self.space.node_cap {
                return Err(Error::cap(
                    "microstate search nodes",
                    total as f64,
                    self.space.node_cap as f64,
                ));
            }
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let total = self.nodes.fetch_add(self.local_nodes, Ordering::Relaxed) + self.local_nodes;
        self.local_nodes = 0;
        if total > self.space.node_cap {
            return Err(Error::cap(
                "microstate search nodes",
                total as f64,
                self.space.node_cap as f64,
            ));
        }
        Ok(())
    }

    /// Assigns `w[p]` and applies every check triggered at `p`; false if pruned.
    fn place(&mut self, p: usize) -> bool {
        let sp = self.space;
        for &c in &sp.constraints_at[p] {
            let c = &sp.constraints[c as usize];
            if c.idx.iter().zip(&c.sym).all(|(&i, &a)| self.w[i as usize] == a) {
                return false;
            }
        }
        let d = sp.d;
        for &k in &sp.atoms_at[p] {
            let at = &sp.atoms[k as usize];
            let (l, _) = sp.atom_interval(at, &self.w);
            if l > 0.0 {
                let t = at.term as usize;
                let s = t / d;
                self.undo.push(Undo {
                    term: at.term,
                    partial: self.partial[t],
                    s: s as u32,
                    lo2: self.lo2[s],
                });
                let old = self.partial[t].min(1.0);
                self.partial[t] += l;
                let new = self.partial[t].min(1.0);
                self.lo2[s] += new * new - old * old;
                if self.lo2[s] > self.out_t {
                    return false;
                }
            }
        }
        true
    }

    fn rollback(&mut self, mark: usize) {
        while self.undo.len() > mark {
            let u = self.undo.pop().expect("non-empty");
            self.partial[u.term as usize] = u.partial;
            self.lo2[u.s as usize] = u.lo2;
        }
    }

    fn run(&mut self, prefix: &[Symbol]) -> Result<()> {
        for (p, &a) in prefix.iter().enumerate() {
            self.w[p] = a;
            self.count_node()?;
            if !self.place(p) {
                return self.flush();
            }
        }
        self.rec(prefix.len())?;
        self.flush()
    }

    fn rec(&mut self, p: usize) -> Result<()> {
        let sp = self.space;
        if p == sp.d {
            let v = sp.classify_full(&self.w, self.delta);
            if v.status != Status::Out {
                self.found.push((self.w.clone(), v.status));
            }
            return Ok(());
        }
        for a in 0..sp.labels as Symbol {
            self.w[p] = a;
            self.count_node()?;
            let mark = self.undo.len();
            if self.place(p) {
                self.rec(p + 1)?;
            }
            self.rollback(mark);
        }
        Ok(())
    }
}
