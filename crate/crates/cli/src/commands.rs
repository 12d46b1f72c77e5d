//! The `estimate`, `classify`, `compare` and `dump-microstates` commands.

use std::fs;
use std::path::Path;

use serde::Serialize;

use sel_core::amenable::{
    cross_check_sofic_amenable, default_indices, h_a_conditional, h_a_tail, h_a_topological,
};
use sel_core::entropy::{
    bowen_measure_entropy, classify, h_cover, h_cover_conditional, h_eps_conditional, h_measure_cover,
    h_space_conditional, h_star, h_topological,
};
use sel_core::group::ball;
use sel_core::microstate::MicrostateSpace;
use sel_core::report::cells_csv;
use sel_core::shift::CylinderIndicator;
use sel_core::{CrossCheck, EntropyReport, System};

use crate::config::{parse_cover, sigma_for, ExperimentConfig};
use crate::error::CliError;

/// What a command writes: `report.json`, `cells.csv` and a one-line summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub json: String,
    pub csv: String,
    pub summary: String,
}

impl Output {
    fn from_report(r: &EntropyReport) -> Result<Self, CliError> {
        Ok(Output {
            json: r.to_json()? + "\n",
            csv: r.to_csv(),
            summary: format!(
                "{} {} = {} ({}, {})",
                r.system,
                r.quantity,
                r.headline,
                r.mode,
                serde_json::to_value(r.directionality).map_err(sel_core::Error::from)?.as_str().unwrap_or("")
            ),
        })
    }

    /// Writes both files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), &self.json)?;
        fs::write(dir.join("cells.csv"), &self.csv)?;
        Ok(())
    }
}

pub const QUANTITIES: [&str; 11] = [
    "h_topological",
    "h_cover",
    "h_cover_conditional",
    "h_space_conditional",
    "h_star",
    "h_measure_cover",
    "bowen_measure_entropy",
    "h_eps_conditional",
    "h_a_conditional",
    "h_a_topological",
    "h_a_tail",
];

fn indices(cfg: &ExperimentConfig, sys: &System) -> Vec<u64> {
    if cfg.folner.is_empty() {
        default_indices(sys)
    } else {
        cfg.folner.clone()
    }
}

pub fn estimate(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    if !QUANTITIES.contains(&cfg.quantity.as_str()) {
        return Err(CliError::Config(format!(
            "unknown quantity {:?}; expected one of {}",
            cfg.quantity,
            QUANTITIES.join(", ")
        )));
    }
    let sys = cfg.system()?;
    let amenable = cfg.quantity.starts_with("h_a_");
    let report = if amenable {
        let n = indices(cfg, &sys);
        let family = sys.refining_family(cfg.family_radius)?;
        match cfg.quantity.as_str() {
            "h_a_conditional" => {
                h_a_conditional(&sys, &parse_cover(&cfg.cover, &sys)?, &parse_cover(&cfg.given, &sys)?, &n)?.report
            }
            "h_a_topological" => h_a_topological(&sys, &family, &n)?,
            _ => h_a_tail(&sys, &sys.refining_family(cfg.v_radius)?, &family, &n)?,
        }
    } else {
        let sched = cfg.schedule(&sys)?;
        let u = || parse_cover(&cfg.cover, &sys);
        match cfg.quantity.as_str() {
            "h_topological" => h_topological(&sys, &sched)?,
            "h_cover" => h_cover(&sys, &u()?, &sched)?,
            "h_cover_conditional" => h_cover_conditional(&sys, &u()?, &parse_cover(&cfg.given, &sys)?, &sched)?,
            "h_space_conditional" => {
                h_space_conditional(&sys, &u()?, &sys.refining_family(cfg.family_radius)?, &sched)?
            }
            "h_star" => h_star(
                &sys,
                &sys.refining_family(cfg.v_radius)?,
                &sys.refining_family(cfg.family_radius)?,
                &sched,
            )?,
            "h_measure_cover" => {
                let l = vec![vec![CylinderIndicator::symbol_at_origin(&sys.group(), 1)]];
                h_measure_cover(&sys, &cfg.measure(&sys)?, &u()?, &l, &sched)?
            }
            "bowen_measure_entropy" => bowen_measure_entropy(&sys, &cfg.measure(&sys)?, &u()?, &sched)?,
            _ => {
                let eps = cfg.sep_eps.unwrap_or(sched.eps_list[0]);
                h_eps_conditional(&sys, eps, &parse_cover(&cfg.given, &sys)?, &sched)?
            }
        }
    };
    Output::from_report(&report)
}

pub fn classify_system(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let sys = cfg.system()?;
    let sched = cfg.schedule(&sys)?;
    let c = classify(&sys, &sched)?;
    Ok(Output {
        json: c.to_json()? + "\n",
        csv: cells_csv("classify", &[]),
        summary: format!(
            "{} expansive={} h_expansive_evidence={} asympt_h_expansive_evidence={}",
            c.system, c.expansive, c.h_expansive_evidence, c.asympt_h_expansive_evidence
        ),
    })
}

#[derive(Serialize)]
struct CompareReport<'a> {
    cross_check: &'a CrossCheck,
    sofic: &'a EntropyReport,
    amenable: &'a EntropyReport,
}

pub fn compare(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let sys = cfg.system()?;
    let sched = cfg.schedule(&sys)?;
    let (c, sofic, amenable) = cross_check_sofic_amenable(&sys, &sched, &indices(cfg, &sys))?;
    let json = serde_json::to_string_pretty(&CompareReport {
        cross_check: &c,
        sofic: &sofic,
        amenable: &amenable,
    })
    .map_err(sel_core::Error::from)?;
    let mut csv = sofic.to_csv();
    csv.extend(amenable.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
    Ok(Output {
        json: json + "\n",
        csv,
        summary: format!(
            "{} sofic {} amenable {} midpoint difference {:.6} overlap {}",
            c.system, c.sofic, c.amenable, c.midpoint_diff, c.overlap
        ),
    })
}

/// One line per microstate: status, labels and worst `s` with its interval.
pub fn dump_microstates(cfg: &ExperimentConfig, limit: usize) -> Result<String, CliError> {
    let sys = cfg.system()?;
    let d = *cfg.d.first().ok_or_else(|| CliError::Config("dump-microstates needs --d".into()))?;
    let sigma = sigma_for(&sys, d)?;
    let sched = cfg.schedule(&sys)?;
    let f = match cfg.f_radii.first() {
        Some(&r) => ball(&sys.group(), r),
        None => sched.f_list[0].clone(),
    };
    let space = MicrostateSpace::new(&sys, &sigma, &f, sched.r)?.with_node_cap(sched.caps.nodes);
    let e = space.enumerate(sched.delta_list[0])?;
    let mut out = format!(
        "# {} sigma={} F={:?} delta={} in={} unknown={}\n",
        sys.name(),
        sigma.label(),
        f.elements(),
        sched.delta_list[0],
        e.certified_in.len(),
        e.unknown.len()
    );
    for m in e.optimistic().into_iter().take(limit) {
        out.push_str(&space.dump_line(m));
        out.push('\n');
    }
    Ok(out)
}
