//! Entropy reports: headline bracket, per-cell table, checks, JSON and CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::Result;
use crate::extreal::{round12, Bracket, ExtReal, Mode};

/// Which side of a reported bracket bounds the limit quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directionality {
    CertifiedUpper,
    CertifiedLower,
    Bracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Sofic,
    Amenable,
}

fn opt12<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_f64(round12(*v)),
        None => s.serialize_none(),
    }
}

/// One `(σ, F, δ, ε)` entry, as `(1/d) log` of a count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub d: usize,
    pub sigma: String,
    #[serde(rename = "F_radius")]
    pub f_radius: u64,
    #[serde(serialize_with = "opt12")]
    pub delta: Option<f64>,
    #[serde(serialize_with = "opt12")]
    pub eps: Option<f64>,
    pub lo: ExtReal,
    pub hi: ExtReal,
    pub mode: Mode,
    /// Cover, `L` size or Følner index distinguishing cells of one report.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub tag: String,
}

impl Cell {
    pub fn bracket(&self) -> Bracket {
        Bracket::new(self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            holds,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub quantity: String,
    pub pipeline: Pipeline,
    pub system: String,
    pub headline: Bracket,
    pub mode: Mode,
    pub directionality: Directionality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub neg_inf: bool,
    pub checks: Vec<Check>,
    pub cells: Vec<Cell>,
}

impl EntropyReport {
    pub fn new(
        quantity: impl Into<String>,
        pipeline: Pipeline,
        system: impl Into<String>,
        headline: Bracket,
        directionality: Directionality,
        cells: Vec<Cell>,
    ) -> Self {
        let mode = cells.iter().map(|c| c.mode).max().unwrap_or(Mode::Exact);
        EntropyReport {
            quantity: quantity.into(),
            pipeline,
            system: system.into(),
            headline,
            mode,
            directionality,
            label: None,
            neg_inf: headline.lo.is_neg_inf() || headline.hi.is_neg_inf(),
            checks: Vec::new(),
            cells,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_check(mut self, check: Check) -> Self {
        self.checks.push(check);
        self
    }

    pub fn checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        cells_csv(&self.quantity, &self.cells)
    }
}

/// Flat CSV of cells, one row per cell.
pub fn cells_csv(quantity: &str, cells: &[Cell]) -> String {
    let mut out = String::from("quantity,d,sigma,F_radius,delta,eps,lo,hi,mode,tag\n");
    let num = |x: Option<f64>| x.map(|v| round12(v).to_string()).unwrap_or_default();
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            quantity,
            c.d,
            c.sigma,
            c.f_radius,
            num(c.delta),
            num(c.eps),
            csv_ext(c.lo),
            csv_ext(c.hi),
            c.mode,
            c.tag.replace(',', ";")
        );
    }
    out
}

fn csv_ext(x: ExtReal) -> String {
    if x.is_finite() {
        round12(x.value()).to_string()
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EntropyReport {
        let cells = vec![Cell {
            d: 4,
            sigma: "cyclic(4)".into(),
            f_radius: 1,
            delta: Some(0.25),
            eps: None,
            lo: ExtReal::NEG_INF,
            hi: ExtReal::new(2f64.ln() / 3.0),
            mode: Mode::Greedy,
            tag: String::new(),
        }];
        EntropyReport::new(
            "h_cover",
            Pipeline::Sofic,
            "full-shift-2",
            Bracket::new(ExtReal::NEG_INF, ExtReal::new(0.5)),
            Directionality::CertifiedUpper,
            cells,
        )
    }

    #[test]
    fn json_shape() {
        let r = sample();
        assert!(r.neg_inf);
        assert_eq!(r.mode, Mode::Greedy);
        let text = r.to_json().unwrap();
        assert!(text.starts_with("{\n  \"quantity\""));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["quantity"], "h_cover");
        assert_eq!(v["pipeline"], "sofic");
        assert_eq!(v["directionality"], "certified-upper");
        assert_eq!(v["headline"]["lo"], "-inf");
        assert_eq!(v["cells"][0]["F_radius"], 1);
        assert_eq!(v["cells"][0]["hi"], 0.231049060187);
        assert!(v["cells"][0]["eps"].is_null());
    }

    #[test]
    fn json_roundtrip() {
        let r = sample();
        let back: EntropyReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.headline, r.headline);
        assert_eq!(back.cells.len(), 1);
    }

    #[test]
    fn csv_rows() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "h_cover,4,cyclic(4),1,0.25,,-inf,0.231049060187,greedy,");
    }
}
