//! Experiment configuration: TOML file, command-line overrides, defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sel_core::entropy::Caps;
use sel_core::group::{ball, GroupKind};
use sel_core::shift::parse_system_json;
use sel_core::{CoverSpec, InvariantMeasure, Schedule, SoficMap, System};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in system name or path to a system JSON file.
    pub system: String,
    pub quantity: String,
    /// Sofic approximation sizes; empty means the system default.
    pub d: Vec<usize>,
    /// `F = ball(r)` for each radius.
    pub f_radii: Vec<u64>,
    pub delta: Vec<f64>,
    pub eps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    pub folner: Vec<u64>,
    pub cover: String,
    pub given: String,
    /// Largest cylinder radius in the cover family.
    pub family_radius: u64,
    /// Largest cylinder radius in the conditioning family of `h_star`.
    pub v_radius: u64,
    /// `bernoulli(p)`, `uniform` or `parry`.
    pub measure: String,
    /// Separation scale of `h_eps_conditional`; the first `eps` if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sep_eps: Option<f64>,
    pub caps: Caps,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: "full-shift-2".into(),
            quantity: "h_topological".into(),
            d: Vec::new(),
            f_radii: Vec::new(),
            delta: Vec::new(),
            eps: Vec::new(),
            r: None,
            folner: Vec::new(),
            cover: "standard".into(),
            given: "whole".into(),
            family_radius: 2,
            v_radius: 1,
            measure: "bernoulli(0.5)".into(),
            sep_eps: None,
            caps: Caps::default(),
            seed: 0,
            tolerance: 0.05,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn system(&self) -> Result<System, CliError> {
        let path = Path::new(&self.system);
        if self.system.ends_with(".json") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            return Ok(System::Shift(parse_system_json(name, &text)?));
        }
        Ok(System::builtin(&self.system)?)
    }

    pub fn schedule(&self, sys: &System) -> Result<Schedule, CliError> {
        let mut s = Schedule::default_for(sys)?;
        if !self.d.is_empty() {
            s.sigmas = self
                .d
                .iter()
                .map(|&d| sigma_for(sys, d))
                .collect::<Result<_, _>>()?;
        }
        let group = sys.group();
        if !self.f_radii.is_empty() {
            s.f_list = self.f_radii.iter().map(|&r| ball(&group, r)).collect();
        }
        if !self.delta.is_empty() {
            s.delta_list = self.delta.clone();
        }
        if !self.eps.is_empty() {
            s.eps_list = self.eps.clone();
        }
        if let Some(r) = self.r {
            s.r = match sys.as_shift() {
                Some(shift) => r.min(shift.r_max()),
                None => r,
            };
        }
        s.caps = self.caps;
        s.seed = self.seed;
        s.tolerance = self.tolerance;
        s.validate(sys)?;
        Ok(s)
    }

    pub fn measure(&self, sys: &System) -> Result<InvariantMeasure, CliError> {
        parse_measure(&self.measure, sys)
    }
}

/// The sofic map of size `d` used for the system's group.
pub fn sigma_for(sys: &System, d: usize) -> Result<SoficMap, CliError> {
    let map = match sys.group().kind() {
        GroupKind::Lattice(1) => SoficMap::cyclic(d)?,
        GroupKind::Lattice(_) => {
            let a = (1..=d).filter(|&a| d.is_multiple_of(a) && a * a <= d).max().unwrap_or(1);
            SoficMap::torus(a, d / a)?
        }
        GroupKind::Cyclic(m) => {
            if d == 0 || !(d as u64).is_multiple_of(m) {
                return Err(CliError::Config(format!("d = {d} is not a multiple of the group order {m}")));
            }
            SoficMap::regular(m, d / m as usize)?
        }
    };
    Ok(map)
}

/// `standard`, `whole`, `window(r)` or `level(k)`.
pub fn parse_cover(name: &str, sys: &System) -> Result<CoverSpec, CliError> {
    let name = name.trim();
    let arg = |prefix: &str| -> Option<Result<u64, CliError>> {
        name.strip_prefix(prefix).and_then(|t| t.strip_suffix(')')).map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("bad cover {name:?}")))
        })
    };
    match name {
        "standard" => return Ok(sys.standard_partition()?),
        "whole" | "{X}" => return Ok(sys.whole_cover()),
        _ => {}
    }
    if let Some(r) = arg("window(") {
        let shift = sys
            .as_shift()
            .ok_or_else(|| CliError::Config("window covers need a subshift".into()))?;
        return Ok(CoverSpec::window_partition(shift, r?)?);
    }
    if let Some(k) = arg("level(") {
        return match sys {
            System::Odometer(o) => Ok(o.level_partition(k? as usize)?),
            System::Shift(_) => Err(CliError::Config("level covers need an odometer".into())),
        };
    }
    Err(CliError::Config(format!("unknown cover {name:?}")))
}

/// `bernoulli(p)` on two symbols, `uniform` or `parry`.
pub fn parse_measure(name: &str, sys: &System) -> Result<InvariantMeasure, CliError> {
    let name = name.trim();
    if let Some(p) = name.strip_prefix("bernoulli(").and_then(|t| t.strip_suffix(')')) {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad measure {name:?}")))?;
        return Ok(InvariantMeasure::bernoulli2(p)?);
    }
    match name {
        "uniform" => {
            let k = sys.label_count();
            Ok(InvariantMeasure::bernoulli(vec![1.0 / k as f64; k])?)
        }
        "parry" => Ok(InvariantMeasure::golden_mean_parry()),
        _ => Err(CliError::Config(format!("unknown measure {name:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_omitted_fields() {
        let c = ExperimentConfig::from_toml("system = \"golden-mean\"\nd = [4, 8]\n").unwrap();
        assert_eq!(c.system, "golden-mean");
        assert_eq!(c.quantity, "h_topological");
        assert_eq!(c.caps, Caps::default());
        let s = c.schedule(&c.system().unwrap()).unwrap();
        assert_eq!(s.sigmas.len(), 2);
    }

    #[test]
    fn toml_round_trip_is_stable() {
        let mut c = ExperimentConfig::default();
        c.d = vec![4, 8, 12];
        c.delta = vec![0.25];
        c.r = Some(3);
        c.sep_eps = Some(0.3);
        let text = c.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("sytem = \"x\"").is_err());
    }

    #[test]
    fn covers_and_measures() {
        let sys = System::builtin("full-shift-2").unwrap();
        assert_eq!(parse_cover("window(1)", &sys).unwrap().name, "window(1)");
        assert!(parse_cover("level(1)", &sys).is_err());
        assert!(parse_cover("nope", &sys).is_err());
        assert!(parse_measure("bernoulli(0.3)", &sys).is_ok());
        let odo = System::builtin("odometer-2adic").unwrap();
        assert_eq!(parse_cover("level(2)", &odo).unwrap().name, "level(2)");
    }

    #[test]
    fn sigma_sizes_by_group() {
        let z2 = System::Shift(sel_core::ShiftSystem::full_shift_on(sel_core::GroupModel::lattice2(), 2).unwrap());
        assert_eq!(sigma_for(&z2, 6).unwrap().d(), 6);
        let c3 = System::Shift(
            sel_core::ShiftSystem::full_shift_on(sel_core::GroupModel::cyclic(3).unwrap(), 2).unwrap(),
        );
        assert!(sigma_for(&c3, 4).is_err());
        assert_eq!(sigma_for(&c3, 6).unwrap().d(), 6);
    }
}
