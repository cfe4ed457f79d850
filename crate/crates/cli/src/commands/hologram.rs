use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use oamwalk::photonics::{gaussian_walker, make_hologram, walker_target, HologramGrid};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ComplexValue;
use crate::error::CliError;
use crate::output::{keyed, Output};

/// Walker state encoded on the mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    Localized { m: i64 },
    Gaussian { sigma: f64, k0: f64, half_width: i64 },
    /// `{"<m>": [re, im] | re}`, normalized on use.
    Coefficients(BTreeMap<i64, ComplexValue>),
}

/// Pixel grid; each field defaults separately so single keys can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_side")]
    pub height: usize,
    #[serde(default = "default_pitch")]
    pub pixel_pitch: f64,
    /// Blazed-grating frequency in cycles per unit length.
    #[serde(default = "default_carrier")]
    pub carrier: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: default_side(),
            height: default_side(),
            pixel_pitch: default_pitch(),
            carrier: default_carrier(),
        }
    }
}

impl From<GridConfig> for HologramGrid {
    fn from(g: GridConfig) -> Self {
        HologramGrid {
            width: g.width,
            height: g.height,
            pixel_pitch: g.pixel_pitch,
            carrier: g.carrier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HologramConfig {
    #[serde(default)]
    pub grid: GridConfig,
    /// Beam waist in the units of `grid.pixel_pitch`.
    #[serde(default = "default_waist")]
    pub waist: f64,
    #[serde(default = "default_target")]
    pub target: Target,
}

fn default_side() -> usize {
    256
}

fn default_pitch() -> f64 {
    1.0
}

fn default_carrier() -> f64 {
    0.1
}

fn default_waist() -> f64 {
    40.0
}

fn default_target() -> Target {
    Target::Localized { m: 3 }
}

fn coefficients(target: &Target) -> Result<BTreeMap<i64, Complex64>, CliError> {
    match target {
        Target::Localized { m } => Ok(BTreeMap::from([(*m, Complex64::new(1.0, 0.0))])),
        Target::Gaussian { sigma, k0, half_width } => {
            if *half_width < 0 {
                return Err(CliError::Config("target.gaussian.half_width: must be ≥ 0".into()));
            }
            Ok(gaussian_walker(*sigma, *k0, *half_width)?)
        }
        Target::Coefficients(map) => {
            let raw: BTreeMap<i64, Complex64> = map.iter().map(|(&m, c)| (m, c.value())).collect();
            let norm = raw.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(CliError::Config("target.coefficients: must not all vanish".into()));
            }
            Ok(raw.into_iter().map(|(m, c)| (m, c / norm)).collect())
        }
    }
}

pub fn run(cfg: HologramConfig, dir: &Path) -> Result<Output, CliError> {
    let grid = HologramGrid::from(cfg.grid);
    let coeffs = coefficients(&cfg.target)?;
    let (amplitude, phase) = walker_target(&coeffs, grid, cfg.waist)?;
    let map = make_hologram(&amplitude, &phase, grid)?;

    // Winding of the mask on the ring through the brightest pixel.
    let center = ((cfg.grid.width as f64 - 1.0) / 2.0, (cfg.grid.height as f64 - 1.0) / 2.0);
    let peak = amplitude
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(idx, _)| idx)
        .expect("nonempty grid");
    let (pi, pj) = ((peak % cfg.grid.width) as f64, (peak / cfg.grid.width) as f64);
    let ring = (pi - center.0).hypot(pj - center.1);
    let winding = (ring >= 2.0).then(|| map.winding(center, ring, 4096));

    let (lo, hi) = map
        .phases
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));

    let mut o = Output::new(dir, "hologram", &cfg)?;
    let pgm = map.to_pgm(&o.provenance());
    o.bytes("hologram.pgm", &pgm)?;
    o.csv("hologram_phases.csv", &map.to_csv())?;
    o.json(
        "hologram.json",
        json!({
            "width": cfg.grid.width,
            "height": cfg.grid.height,
            "phase_min": lo,
            "phase_max": hi,
            "ring_radius_px": ring,
            "winding": winding,
            "coefficients": keyed(coeffs.iter().map(|(m, c)| (m, [c.re, c.im]))),
        }),
    )?;
    Ok(o)
}
