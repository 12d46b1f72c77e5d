//! Subshifts over the supported groups, with the truncated word-length metric.

pub mod cover;
pub mod measure;
pub mod odometer;
pub mod transfer;

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{ball, FiniteSubset, GroupElement, GroupKind, GroupModel};

pub use cover::{CoverKind, CoverMember, CoverSpec};
pub use measure::{CylinderIndicator, InvariantMeasure};
pub use odometer::OdometerSystem;
pub use transfer::{transfer_matrix_entropy, BlockGraph};

pub type Symbol = u16;

/// Weights `w_g = 2^{-|g|} / Z` with `Z` the sum over the whole group, so the
/// weights sum to exactly 1 and every tail has a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    kind: GroupKind,
}

impl Metric {
    pub fn new(group: &GroupModel) -> Self {
        Metric { kind: group.kind() }
    }

    /// Number of elements of word length exactly `n`.
    fn sphere(&self, n: u64) -> f64 {
        match self.kind {
            GroupKind::Lattice(1) => {
                if n == 0 {
                    1.0
                } else {
                    2.0
                }
            }
            GroupKind::Lattice(_) => {
                if n == 0 {
                    1.0
                } else {
                    4.0 * n as f64
                }
            }
            GroupKind::Cyclic(m) => {
                if n == 0 {
                    1.0
                } else if 2 * n < m {
                    2.0
                } else if 2 * n == m {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn normalizer(&self) -> f64 {
        match self.kind {
            GroupKind::Lattice(1) => 3.0,
            GroupKind::Lattice(_) => 9.0,
            GroupKind::Cyclic(m) => (0..=m / 2).map(|n| self.sphere(n) * 0.5f64.powi(n as i32)).sum(),
        }
    }

    pub fn weight_of_length(&self, n: u64) -> f64 {
        0.5f64.powi(n as i32) / self.normalizer()
    }

    pub fn weight(&self, group: &GroupModel, g: GroupElement) -> f64 {
        self.weight_of_length(group.word_length(g))
    }

    /// `w_e`.
    pub fn w0(&self) -> f64 {
        self.weight_of_length(0)
    }

    /// `t(R) = sum_{|g| > R} w_g`.
    pub fn tail(&self, r: u64) -> f64 {
        let z = self.normalizer();
        let p = 0.5f64.powi(r as i32);
        match self.kind {
            GroupKind::Lattice(1) => 2.0 * p / z,
            GroupKind::Lattice(_) => 4.0 * p * (r as f64 + 2.0) / z,
            GroupKind::Cyclic(m) => {
                let inner: f64 = (0..=r.min(m / 2))
                    .map(|n| self.sphere(n) * 0.5f64.powi(n as i32))
                    .sum();
                ((z - inner) / z).max(0.0)
            }
        }
    }

    /// Weights of the elements of `window`, in window order.
    pub fn weights_on(&self, group: &GroupModel, window: &FiniteSubset) -> Vec<f64> {
        window
            .elements()
            .iter()
            .map(|&g| self.weight(group, g))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Forbidden {
    pub shape: FiniteSubset,
    /// Symbols in the sorted order of `shape`.
    pub pattern: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftSystem {
    name: String,
    group: GroupModel,
    alphabet: Vec<String>,
    forbidden: Vec<Forbidden>,
    r_max: u64,
    metric: Metric,
    #[serde(skip)]
    graph: Option<Arc<BlockGraph>>,
}

/// A pattern on a window, symbols listed in the window's sorted order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowPattern {
    pub symbols: Vec<Symbol>,
    pub certified_extendable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSet {
    pub window: FiniteSubset,
    pub patterns: Vec<WindowPattern>,
    /// Whether extendability was decided (rank 1 and finite groups) or left open (`Z^2`).
    pub extendability_certified: bool,
}

impl PatternSet {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// A forbidden pattern placed inside a window: positions are window indices.
#[derive(Clone, Debug)]
pub(crate) struct Placement {
    pub positions: Vec<usize>,
    pub pattern: Vec<Symbol>,
}

impl ShiftSystem {
    pub fn new(
        name: impl Into<String>,
        group: GroupModel,
        alphabet: Vec<String>,
        forbidden: Vec<Forbidden>,
        r_max: u64,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::invalid("alphabet must be non-empty"));
        }
        if alphabet.len() > Symbol::MAX as usize {
            return Err(Error::invalid("alphabet too large"));
        }
        for f in &forbidden {
            if f.pattern.len() != f.shape.len() {
                return Err(Error::invalid("forbidden pattern length differs from its shape"));
            }
            if f.pattern.iter().any(|&a| a as usize >= alphabet.len()) {
                return Err(Error::invalid("forbidden pattern uses a symbol outside the alphabet"));
            }
            if f.shape.radius(&group) > r_max {
                return Err(Error::invalid(format!(
                    "forbidden shape of radius {} does not fit in ball({r_max})",
                    f.shape.radius(&group)
                )));
            }
        }
        let mut sys = ShiftSystem {
            name: name.into(),
            metric: Metric::new(&group),
            group,
            alphabet,
            forbidden,
            r_max,
            graph: None,
        };
        if group.kind() == GroupKind::Lattice(1) {
            sys.graph = BlockGraph::build(&sys).ok().map(Arc::new);
        }
        sys.check_non_degenerate()?;
        Ok(sys)
    }

    fn check_non_degenerate(&self) -> Result<()> {
        match self.group.kind() {
            GroupKind::Lattice(1) if self.graph.is_some() => {
                if self.block_graph()?.essential_count() == 0 {
                    return Err(Error::EmptySystem);
                }
            }
            _ => {
                let w = ball(&self.group, self.max_shape_radius().max(1));
                if self.locally_allowed(&w, 1)?.is_empty() {
                    return Err(Error::EmptySystem);
                }
            }
        }
        Ok(())
    }

    pub fn full_shift(k: usize) -> Result<Self> {
        ShiftSystem::full_shift_on(GroupModel::integers(), k)
    }

    pub fn full_shift_on(group: GroupModel, k: usize) -> Result<Self> {
        let name = match group.kind() {
            GroupKind::Lattice(1) => format!("full-shift-{k}"),
            _ => format!("full-shift-{k}-over-{group}"),
        };
        ShiftSystem::new(name, group, (0..k).map(|a| a.to_string()).collect(), vec![], 8)
    }

    pub fn golden_mean() -> Self {
        let z = GroupModel::integers();
        ShiftSystem::new(
            "golden-mean",
            z,
            vec!["0".into(), "1".into()],
            vec![Forbidden {
                shape: FiniteSubset::from_ints(&z, &[0, 1]).expect("shape"),
                pattern: vec![1, 1],
            }],
            8,
        )
        .expect("golden-mean shift is non-degenerate")
    }

    /// Only the constant configuration `...000...` survives.
    pub fn fixed_point() -> Self {
        let z = GroupModel::integers();
        ShiftSystem::new(
            "fixed-point",
            z,
            vec!["0".into(), "1".into()],
            vec![Forbidden {
                shape: FiniteSubset::from_ints(&z, &[0]).expect("shape"),
                pattern: vec![1],
            }],
            8,
        )
        .expect("fixed point system is non-degenerate")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Higher-block graph, available on `Z` for recodable constraints.
    pub fn block_graph(&self) -> Result<&BlockGraph> {
        self.graph.as_deref().ok_or_else(|| {
            Error::NotRecodable(format!("{} has no block presentation", self.name))
        })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn forbidden(&self) -> &[Forbidden] {
        &self.forbidden
    }

    pub fn r_max(&self) -> u64 {
        self.r_max
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn max_shape_radius(&self) -> u64 {
        self.forbidden
            .iter()
            .map(|f| f.shape.radius(&self.group))
            .max()
            .unwrap_or(0)
    }

    pub fn symbol_index(&self, s: &str) -> Result<Symbol> {
        self.alphabet
            .iter()
            .position(|a| a == s)
            .map(|i| i as Symbol)
            .ok_or_else(|| Error::Parse(format!("symbol {s:?} not in alphabet")))
    }

    pub fn format_pattern(&self, symbols: &[Symbol]) -> String {
        symbols
            .iter()
            .map(|&a| self.alphabet[a as usize].as_str())
            .collect::<Vec<_>>()
            .join(if self.alphabet.iter().all(|a| a.len() == 1) { "" } else { "," })
    }

    /// Every translate of every forbidden shape lying inside `window`.
    pub(crate) fn placements(&self, window: &FiniteSubset) -> Vec<Placement> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for f in &self.forbidden {
            let s0 = f.shape.elements()[0];
            for &w in window.elements() {
                let h = self.group.op(w, self.group.inverse(s0));
                let positions: Option<Vec<usize>> = f
                    .shape
                    .elements()
                    .iter()
                    .map(|&s| window.position(&self.group.op(s, h)))
                    .collect();
                if let Some(positions) = positions {
                    let key = (positions.clone(), f.pattern.clone());
                    if seen.insert(key) {
                        out.push(Placement {
                            positions,
                            pattern: f.pattern.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Depth-first enumeration of locally allowed patterns on `window` in
    /// lexicographic order (window order, symbol order).
    pub fn locally_allowed(&self, window: &FiniteSubset, cap: usize) -> Result<Vec<Vec<Symbol>>> {
        let mut out = Vec::new();
        self.visit_locally_allowed(window, &mut |p| {
            out.push(p.to_vec());
            out.len() < cap
        });
        Ok(out)
    }

    /// Calls `f` on each locally allowed pattern until it returns false.
    pub fn visit_locally_allowed(&self, window: &FiniteSubset, f: &mut dyn FnMut(&[Symbol]) -> bool) {
        let n = window.len();
        let mut by_last: Vec<Vec<Placement>> = vec![Vec::new(); n];
        for p in self.placements(window) {
            let last = *p.positions.iter().max().expect("non-empty shape");
            by_last[last].push(p);
        }
        let q = self.alphabet.len() as Symbol;
        let mut cur = vec![0 as Symbol; n];
        fn rec(
            pos: usize,
            n: usize,
            q: Symbol,
            cur: &mut [Symbol],
            by_last: &[Vec<Placement>],
            f: &mut dyn FnMut(&[Symbol]) -> bool,
        ) -> bool {
            if pos == n {
                return f(cur);
            }
            for a in 0..q {
                cur[pos] = a;
                let bad = by_last[pos].iter().any(|pl| {
                    pl.positions
                        .iter()
                        .zip(&pl.pattern)
                        .all(|(&i, &b)| cur[i] == b)
                });
                if !bad && !rec(pos + 1, n, q, cur, by_last, f) {
                    return false;
                }
            }
            true
        }
        rec(0, n, q, &mut cur, &by_last, f);
    }

    pub fn is_locally_allowed(&self, window: &FiniteSubset, symbols: &[Symbol]) -> bool {
        self.placements(window).iter().all(|pl| {
            !pl.positions
                .iter()
                .zip(&pl.pattern)
                .all(|(&i, &b)| symbols[i] == b)
        })
    }

    /// All configurations of a subshift over `Z/m`, as symbol vectors indexed
    /// by residue.
    pub fn finite_points(&self, cap: usize) -> Result<Vec<Vec<Symbol>>> {
        let GroupKind::Cyclic(m) = self.group.kind() else {
            return Err(Error::invalid("finite_points needs a finite group"));
        };
        let size = (self.alphabet.len() as f64).powi(m as i32);
        if size > cap as f64 {
            return Err(Error::cap("configurations of the finite system", size, cap as f64));
        }
        let whole = ball(&self.group, m);
        self.locally_allowed(&whole, usize::MAX)
    }

    /// Patterns on `window` that occur in some point of `X`: certified on `Z`
    /// and on finite groups, locally allowed patterns on `Z^2`.
    pub fn language(&self, window: &FiniteSubset, cap: usize) -> Result<Vec<Vec<Symbol>>> {
        let mut out = Vec::new();
        let mut over = false;
        self.visit_language(window, cap, &mut |p| {
            if out.len() >= cap {
                over = true;
                return false;
            }
            out.push(p.to_vec());
            true
        })?;
        if over {
            return Err(Error::cap(
                format!("patterns on a window of size {}", window.len()),
                out.len() as f64 + 1.0,
                cap as f64,
            ));
        }
        Ok(out)
    }

    /// Streaming version of [`ShiftSystem::language`]; stops when `f` returns false.
    pub fn visit_language(
        &self,
        window: &FiniteSubset,
        cap: usize,
        f: &mut dyn FnMut(&[Symbol]) -> bool,
    ) -> Result<()> {
        match self.group.kind() {
            GroupKind::Lattice(1) if self.graph.is_some() => {
                self.block_graph()?.visit_window(window, f);
                Ok(())
            }
            GroupKind::Lattice(_) => {
                self.visit_locally_allowed(window, f);
                Ok(())
            }
            GroupKind::Cyclic(_) => {
                let points = self.finite_points(cap.max(1 << 20))?;
                let mut seen = HashSet::new();
                for x in points {
                    let p: Vec<Symbol> = window
                        .elements()
                        .iter()
                        .map(|g| x[g.0[0] as usize])
                        .collect();
                    if seen.insert(p.clone()) && !f(&p) {
                        break;
                    }
                }
                Ok(())
            }
        }
    }

    pub fn allowed_patterns(&self, window: &FiniteSubset) -> Result<PatternSet> {
        let bound = self.r_max + 2 * self.max_shape_radius() + 64;
        if window.radius(&self.group) > bound {
            return Err(Error::invalid(format!(
                "window radius exceeds enumerable range {bound}"
            )));
        }
        let raw = self.locally_allowed(window, usize::MAX)?;
        if raw.is_empty() {
            return Err(Error::EmptySystem);
        }
        let (certified, ext): (bool, Box<dyn Fn(&[Symbol]) -> bool>) = match self.group.kind() {
            GroupKind::Lattice(1) if self.graph.is_some() => {
                let graph = self.block_graph()?.clone();
                let w = window.clone();
                (true, Box::new(move |p: &[Symbol]| graph.extendable(&w, p)))
            }
            GroupKind::Lattice(_) => (false, Box::new(|_: &[Symbol]| false)),
            GroupKind::Cyclic(_) => {
                let lang: HashSet<Vec<Symbol>> =
                    self.language(window, usize::MAX)?.into_iter().collect();
                (true, Box::new(move |p: &[Symbol]| lang.contains(p)))
            }
        };
        let patterns = raw
            .into_iter()
            .map(|symbols| WindowPattern {
                certified_extendable: ext(&symbols),
                symbols,
            })
            .collect();
        Ok(PatternSet {
            window: window.clone(),
            patterns,
            extendability_certified: certified,
        })
    }

    /// `[lo, lo + t(R)]` with `lo = sum_{|g| <= R} w_g [x_g != y_g]`, for two
    /// patterns on the same window containing `ball(R)`.
    pub fn rho_interval(
        &self,
        window: &FiniteSubset,
        x: &[Symbol],
        y: &[Symbol],
        r: u64,
    ) -> Result<(f64, f64)> {
        let b = ball(&self.group, r);
        let mut lo = 0.0;
        for &g in b.elements() {
            let i = window.position(&g).ok_or_else(|| {
                Error::WindowTooSmall(format!("ball({r}) is not inside the window"))
            })?;
            if x[i] != y[i] {
                lo += self.metric.weight(&self.group, g);
            }
        }
        let hi = (lo + self.metric.tail(r)).min(1.0);
        Ok((lo, hi.max(lo)))
    }

    /// Diameter of the cells of a partition defined on `window` (upper bound
    /// `t(R)` where `ball(R)` is the largest ball inside the window).
    pub fn cylinder_diameter(&self, window: &FiniteSubset) -> f64 {
        let mut r = 0u64;
        while ball(&self.group, r + 1).is_subset(window) {
            r += 1;
            if r > 4096 {
                break;
            }
        }
        if ball(&self.group, 0).is_subset(window) {
            self.metric.tail(r)
        } else {
            1.0
        }
    }
}

/// Parses the system file format
/// `{"group": "Z", "alphabet": [..], "forbidden": [{"shape": [..], "pattern": [..]}], "R_max": 8}`.
pub fn parse_system_json(name: &str, text: &str) -> Result<ShiftSystem> {
    #[derive(Deserialize)]
    struct RawForbidden {
        shape: Vec<serde_json::Value>,
        pattern: Vec<String>,
    }
    #[derive(Deserialize)]
    struct Raw {
        group: String,
        alphabet: Vec<String>,
        #[serde(default)]
        forbidden: Vec<RawForbidden>,
        #[serde(rename = "R_max", default = "default_r_max")]
        r_max: u64,
    }
    fn default_r_max() -> u64 {
        8
    }
    let raw: Raw = serde_json::from_str(text)?;
    let group = GroupModel::parse(&raw.group)?;
    let index = |s: &str| -> Result<Symbol> {
        raw.alphabet
            .iter()
            .position(|a| a == s)
            .map(|i| i as Symbol)
            .ok_or_else(|| Error::Parse(format!("symbol {s:?} not in alphabet")))
    };
    let mut forbidden = Vec::new();
    for f in &raw.forbidden {
        if f.shape.len() != f.pattern.len() {
            return Err(Error::Parse("shape and pattern lengths differ".into()));
        }
        let mut cells = Vec::new();
        for (v, s) in f.shape.iter().zip(&f.pattern) {
            let coords: Vec<i64> = match v {
                serde_json::Value::Number(n) => vec![n
                    .as_i64()
                    .ok_or_else(|| Error::Parse(format!("bad coordinate {n}")))?],
                serde_json::Value::Array(a) => a
                    .iter()
                    .map(|c| c.as_i64().ok_or_else(|| Error::Parse(format!("bad coordinate {c}"))))
                    .collect::<Result<_>>()?,
                other => return Err(Error::Parse(format!("bad shape entry {other}"))),
            };
            cells.push((group.element(&coords)?, index(s)?));
        }
        cells.sort();
        cells.dedup_by(|a, b| a.0 == b.0);
        if cells.len() != f.shape.len() {
            return Err(Error::Parse("repeated element in a forbidden shape".into()));
        }
        forbidden.push(Forbidden {
            shape: FiniteSubset::new(&group, cells.iter().map(|c| c.0))?,
            pattern: cells.iter().map(|c| c.1).collect(),
        });
    }
    ShiftSystem::new(name, group, raw.alphabet.clone(), forbidden, raw.r_max)
}
