use std::path::Path;

use oamwalk::photonics::{pupil_overlap, pupil_plane_action, qplate_radial_coefficients, RadialExpansion};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::CliError;
use crate::output::Output;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    /// Input OAM values of the `L`-polarized `LG_{0,m}` beam.
    #[serde(default = "default_m")]
    pub m: Vec<i64>,
    #[serde(default = "default_p_max")]
    pub p_max: u32,
    /// OAM of the propagation-overlap scan.
    #[serde(default = "default_overlap_m")]
    pub overlap_m: i64,
    /// Normalized propagation distances `z/z_R`.
    #[serde(default = "default_zeta")]
    pub zeta: Vec<f64>,
}

fn default_m() -> Vec<i64> {
    vec![0, 1, 2, 3]
}

fn default_p_max() -> u32 {
    3
}

fn default_overlap_m() -> i64 {
    1
}

fn default_zeta() -> Vec<f64> {
    (0..=6).map(|j| j as f64 / 20.0).collect()
}

pub fn run(cfg: RadialConfig, dir: &Path) -> Result<Output, CliError> {
    let expansions = cfg
        .m
        .iter()
        .map(|&m| qplate_radial_coefficients(m, cfg.p_max))
        .collect::<Result<Vec<RadialExpansion>, _>>()?;
    let overlaps = cfg
        .zeta
        .iter()
        .map(|&z| pupil_overlap(cfg.overlap_m, z))
        .collect::<Result<Vec<f64>, _>>()?;
    let pupil = pupil_plane_action(cfg.overlap_m)?;

    let mut o = Output::new(dir, "radial", &cfg)?;
    let mut table = String::from("m,p,abs_c_sq\n");
    for e in &expansions {
        o.csv(&format!("radial_m{}.csv", e.m), &e.to_csv())?;
        for (p, c) in e.abs_sq().iter().enumerate() {
            table.push_str(&format!("{},{p},{c:?}\n", e.m));
        }
    }
    o.csv("table.csv", &table)?;
    let mut scan = String::from("zeta,overlap\n");
    for (z, v) in cfg.zeta.iter().zip(&overlaps) {
        scan.push_str(&format!("{z:?},{v:?}\n"));
    }
    o.csv("overlap.csv", &scan)?;
    o.json(
        "radial.json",
        json!({
            "expansions": expansions
                .iter()
                .map(|e| json!({
                    "m": e.m,
                    "coefficients": e.coefficients.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                    "abs_c_sq": e.abs_sq(),
                    "residual": e.residual,
                }))
                .collect::<Vec<_>>(),
            "overlap_m": cfg.overlap_m,
            "overlap": cfg.zeta.iter().zip(&overlaps).map(|(z, v)| json!({"zeta": z, "overlap": v})).collect::<Vec<_>>(),
            "pupil": pupil,
        }),
    )?;
    Ok(o)
}
