use std::path::Path;

use oamwalk::lattice::MomentumConvention;
use oamwalk::spectral::{brillouin_grid, dispersion, eigenstate_circle, winding_number};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::SequenceConfig;
use crate::error::CliError;
use crate::output::Output;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub convention: MomentumConvention,
}

fn default_points() -> usize {
    1001
}

pub fn run(mut cfg: BandsConfig, dir: &Path) -> Result<Output, CliError> {
    let seq = cfg.sequence.resolve("wavepacket")?;
    if cfg.points < 2 {
        return Err(CliError::Config(format!("points: need at least 2, got {}", cfg.points)));
    }
    let bands = dispersion(&seq, &brillouin_grid(cfg.points), cfg.convention)?;
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));

    // A sequence without chiral symmetry has no winding; report why instead of failing.
    let topology = match (
        winding_number(&seq, cfg.convention),
        eigenstate_circle(&seq, &bands.k_grid, cfg.convention),
    ) {
        (Ok(w), Ok(circle)) => json!({
            "winding": w,
            "normal": circle.normal,
            "planarity_residual": circle.max_distance,
        }),
        (Err(e), _) | (_, Err(e)) => json!({ "winding": null, "reason": e.to_string() }),
    };
    let gap = bands.omega[0]
        .iter()
        .zip(&bands.omega[1])
        .map(|(a, b)| (a - b).abs())
        .fold(f64::INFINITY, f64::min);

    let mut o = Output::new(dir, "bands", &cfg)?;
    o.csv("bands.csv", &bands.to_csv())?;
    o.json(
        "bands.json",
        json!({
            "points": cfg.points,
            "spacing": seq.spacing(),
            "min_band_separation": gap,
            "max_abs_velocity": [max_abs(&bands.velocity[0]), max_abs(&bands.velocity[1])],
            "topology": topology,
        }),
    )?;
    Ok(o)
}
