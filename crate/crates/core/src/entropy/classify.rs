//! Expansiveness by window search, with h-expansive and asymptotically
//! h-expansive evidence from conditional entropies.

use serde::{Deserialize, Serialize};

use super::{grid, h_space_conditional_on, h_star_on, Schedule};
use crate::error::Result;
use crate::extreal::{Bracket, ExtReal};
use crate::group::ball;
use crate::shift::{CoverSpec, OdometerSystem, ShiftSystem};
use crate::system::System;

/// A truncation depth at which a pair of points never separates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthCheck {
    pub depth: usize,
    pub expansive: bool,
    pub witness: (u64, u64),
    /// `sup_g ρ(g x, g y)` for the witness pair.
    pub sup_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub quantity: String,
    pub cover: String,
    pub headline: Bracket,
    pub tolerance: f64,
    pub holds: bool,
}

impl Evidence {
    fn new(quantity: &str, cover: &str, headline: Bracket, tolerance: f64) -> Self {
        Evidence {
            quantity: quantity.to_string(),
            cover: cover.to_string(),
            headline,
            tolerance,
            holds: headline.hi.value() <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub system: String,
    pub expansive: bool,
    /// Bracket on the supremum of expansive constants.
    pub expansive_constant: Bracket,
    pub depth_checks: Vec<DepthCheck>,
    pub h_expansive_evidence: bool,
    pub asympt_h_expansive_evidence: bool,
    pub evidence: Vec<Evidence>,
}

/// Distinct points differ at some coordinate `g`, and shifting by `g`
/// moves that difference to the identity, so every `κ < w_e` separates.
/// Returns the bracket on the supremum of expansive constants, after checking
/// that the window language is non-empty.
fn shift_constant(sys: &ShiftSystem, r: u64) -> Result<Bracket> {
    let w = ball(sys.group(), r);
    if sys.language(&w, 1 << 12)?.is_empty() {
        return Err(crate::error::Error::EmptySystem);
    }
    Ok(Bracket::from_f64(sys.metric().w0(), 1.0))
}

/// For every level `k` up to the depth, the points `0` and `m_k` agree at
/// levels `<= k` and every translate stays `2^{-(k+1)}`-close.
fn odometer_depths(o: &OdometerSystem) -> Result<Vec<DepthCheck>> {
    let m = o.modulus();
    let mut out = Vec::new();
    for k in 1..=o.depth() {
        let mk = o.chain().index(k)?;
        let (x, y) = (0, mk % m);
        let sup = (0..m as i64)
            .map(|g| o.rho_interval(o.act(g, x), o.act(g, y)).1)
            .fold(0.0f64, f64::max);
        out.push(DepthCheck {
            depth: k,
            expansive: false,
            witness: (x, y),
            sup_distance: sup,
        });
    }
    Ok(out)
}

pub fn classify(sys: &System, sched: &Schedule) -> Result<ClassifyReport> {
    let (expansive, constant, depth_checks) = match sys {
        System::Shift(s) => (true, shift_constant(s, 1)?, Vec::new()),
        System::Odometer(o) => {
            let checks = odometer_depths(o)?;
            let hi = checks.iter().map(|c| c.sup_distance).fold(o.resolution(), f64::min);
            (false, Bracket::from_f64(0.0, hi), checks)
        }
    };
    let slots = grid(sys, sched)?;
    let u = sys.standard_partition()?;
    let family: Vec<CoverSpec> = match sys {
        System::Shift(_) => sys.refining_family(2)?,
        System::Odometer(o) => sys.refining_family(o.depth() as u64)?,
    };
    let space = h_space_conditional_on(sys, &u, &family, sched, &slots)?;
    let v_family = sys.refining_family(match sys {
        System::Shift(_) => 1,
        System::Odometer(_) => 2,
    })?;
    let star = h_star_on(sys, &v_family, &family, sched, &slots)?;
    let e1 = Evidence::new("h_space_conditional", &u.name, space.headline, sched.tolerance);
    let e2 = Evidence::new(
        "h_star",
        &v_family.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(","),
        star.headline,
        sched.tolerance,
    );
    Ok(ClassifyReport {
        system: sys.name(),
        expansive,
        expansive_constant: constant,
        depth_checks,
        h_expansive_evidence: e1.holds,
        asympt_h_expansive_evidence: e2.holds,
        evidence: vec![e1, e2],
    })
}

impl ClassifyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Lower end of the constant bracket, or `-inf` when not expansive.
    pub fn constant_lower(&self) -> ExtReal {
        if self.expansive {
            self.expansive_constant.lo
        } else {
            ExtReal::NEG_INF
        }
    }
}
