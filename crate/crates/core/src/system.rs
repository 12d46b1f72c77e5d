//! Systems the estimators run on, and the built-in registry.

use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::shift::{CoverSpec, OdometerSystem, ShiftSystem};

#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Shift(ShiftSystem),
    Odometer(OdometerSystem),
}

pub const BUILTIN_NAMES: &[&str] = &["full-shift-k", "golden-mean", "odometer-2adic", "fixed-point"];

impl System {
    /// `full-shift-<k>`, `golden-mean`, `odometer-2adic[-<depth>]`, `fixed-point`.
    pub fn builtin(name: &str) -> Result<Self> {
        if let Some(k) = name.strip_prefix("full-shift-") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad alphabet size in {name:?}")))?;
            if k == 0 {
                return Err(Error::invalid("full shift needs k >= 1"));
            }
            return Ok(System::Shift(ShiftSystem::full_shift(k)?));
        }
        if let Some(rest) = name.strip_prefix("odometer-2adic") {
            let depth = match rest.strip_prefix('-') {
                Some(d) => d
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad depth in {name:?}")))?,
                None if rest.is_empty() => 6,
                None => return Err(Error::Parse(format!("unknown system {name:?}"))),
            };
            return Ok(System::Odometer(OdometerSystem::dyadic(depth)?));
        }
        match name {
            "golden-mean" => Ok(System::Shift(ShiftSystem::golden_mean())),
            "fixed-point" => Ok(System::Shift(ShiftSystem::fixed_point())),
            _ => Err(Error::Parse(format!(
                "unknown system {name:?}; built-ins are {}",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            System::Shift(s) => s.name().to_string(),
            System::Odometer(o) => format!("odometer(depth={})", o.depth()),
        }
    }

    pub fn group(&self) -> GroupModel {
        match self {
            System::Shift(s) => *s.group(),
            System::Odometer(o) => o.group(),
        }
    }

    /// Size of the label set used by microstates.
    pub fn label_count(&self) -> usize {
        match self {
            System::Shift(s) => s.alphabet_size(),
            System::Odometer(o) => o.modulus() as usize,
        }
    }

    /// Largest distance between two points whose window data agree.
    pub fn tail(&self, r: u64) -> f64 {
        match self {
            System::Shift(s) => s.metric().tail(r),
            System::Odometer(o) => o.resolution(),
        }
    }

    pub fn as_shift(&self) -> Option<&ShiftSystem> {
        match self {
            System::Shift(s) => Some(s),
            System::Odometer(_) => None,
        }
    }

    /// The system as a subshift, for the Følner pipeline.
    pub fn to_shift(&self) -> Result<ShiftSystem> {
        match self {
            System::Shift(s) => Ok(s.clone()),
            System::Odometer(o) => o.as_shift(),
        }
    }

    /// The partition by the coordinate at the identity (shifts) or by the
    /// first non-trivial level (odometers).
    pub fn standard_partition(&self) -> Result<CoverSpec> {
        match self {
            System::Shift(s) => Ok(CoverSpec::standard_partition(s)),
            System::Odometer(o) => o.level_partition(1),
        }
    }

    pub fn whole_cover(&self) -> CoverSpec {
        CoverSpec::whole(&self.group())
    }

    /// Partitions of increasing resolution up to `max`: window radii for
    /// shifts, levels `1..=max` for odometers.
    pub fn refining_family(&self, max: u64) -> Result<Vec<CoverSpec>> {
        match self {
            System::Shift(s) => (0..=max).map(|r| CoverSpec::window_partition(s, r)).collect(),
            System::Odometer(o) => (1..=(max as usize).min(o.depth()))
                .map(|k| o.level_partition(k))
                .collect(),
        }
    }
}
