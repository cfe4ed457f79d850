use std::path::Path;

use oamwalk::lattice::{marginal_csv, marginals_csv, MomentumConvention};
use oamwalk::wavepacket::{
    brillouin_sweep, cat_split, half_zone_grid, predicted_drift, propagate, sweep_csv, CoinChoice, WavepacketSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::SequenceConfig;
use crate::error::CliError;
use crate::output::{keyed, Output};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Step-by-step evolution of one packet.
    #[default]
    Propagate,
    /// Final mean OAM over `k₀ ∈ [0, π]` for both bands.
    Sweep,
    /// Band-superposition packet and its two lobes.
    Cat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub k0: f64,
    /// Used by `propagate`; `sweep` runs both bands and `cat` the band superposition.
    #[serde(default = "default_coin")]
    pub coin: CoinChoice,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub window: Option<(i64, i64)>,
    #[serde(default)]
    pub convention: MomentumConvention,
    /// Sweep points `k₀ = jπ/divisions`.
    #[serde(default = "default_divisions")]
    pub divisions: usize,
}

fn default_sigma() -> f64 {
    2.0
}

fn default_coin() -> CoinChoice {
    CoinChoice::Band(1)
}

fn default_steps() -> usize {
    5
}

fn default_divisions() -> usize {
    8
}

pub fn run(mut cfg: WavepacketConfig, dir: &Path) -> Result<Output, CliError> {
    let seq = cfg.sequence.resolve("wavepacket")?;
    match cfg.mode {
        Mode::Propagate => {
            let spec = WavepacketSpec {
                sigma: cfg.sigma,
                k0: cfg.k0,
                coin: cfg.coin,
                window: cfg.window,
                convention: cfg.convention,
            };
            let run = propagate(&spec, &seq, cfg.steps)?;
            cfg.window = Some(run.states[0].window());
            let drift = match cfg.coin {
                CoinChoice::Band(b) => Some(predicted_drift(&seq, cfg.k0, b, cfg.convention)?),
                _ => None,
            };
            let mut o = Output::new(dir, "wavepacket", &cfg)?;
            o.csv("marginals.csv", &marginals_csv(&run.marginals))?;
            let mut moments = String::from("step,mean_oam,variance\n");
            for (n, (m, v)) in run.mean.iter().zip(&run.variance).enumerate() {
                moments.push_str(&format!("{n},{m:?},{v:?}\n"));
            }
            o.csv("moments.csv", &moments)?;
            o.json(
                "wavepacket.json",
                json!({
                    "mode": "propagate",
                    "predicted_drift_per_step": drift,
                    "steps": run.marginals_json(),
                }),
            )?;
            Ok(o)
        }
        Mode::Sweep => {
            if cfg.divisions == 0 {
                return Err(CliError::Config("divisions: must be positive".into()));
            }
            let grid = half_zone_grid(cfg.divisions);
            let band1 = brillouin_sweep(cfg.sigma, 1, &grid, cfg.steps, &seq, cfg.convention)?;
            let band2 = brillouin_sweep(cfg.sigma, 2, &grid, cfg.steps, &seq, cfg.convention)?;
            let antisymmetry = band1
                .iter()
                .zip(&band2)
                .map(|(a, b)| (a.mean_oam + b.mean_oam).abs())
                .fold(0.0, f64::max);
            let mut o = Output::new(dir, "wavepacket", &cfg)?;
            o.csv("sweep_band1.csv", &sweep_csv(&band1))?;
            o.csv("sweep_band2.csv", &sweep_csv(&band2))?;
            o.json(
                "sweep.json",
                json!({
                    "mode": "sweep",
                    "band1": band1,
                    "band2": band2,
                    "max_band_swap_residual": antisymmetry,
                }),
            )?;
            Ok(o)
        }
        Mode::Cat => {
            let split = cat_split(cfg.sigma, cfg.k0, cfg.steps, &seq, cfg.convention)?;
            let mut o = Output::new(dir, "wavepacket", &cfg)?;
            o.csv("cat_marginal.csv", &marginal_csv(&split.marginal))?;
            o.json(
                "cat.json",
                json!({
                    "mode": "cat",
                    "entropy_bits": split.entropy,
                    "lobes": split.lobes,
                    "separation": split.separation,
                    "half_masses": [split.half_masses.0, split.half_masses.1],
                    "marginal": keyed(split.marginal.iter().map(|(m, p)| (m, p))),
                }),
            )?;
            Ok(o)
        }
    }
}
