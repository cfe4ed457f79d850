use std::collections::BTreeMap;
use std::path::Path;

use oamwalk::lattice::{
    coin_walker_entanglement, default_window, evolve, marginal_csv, marginals_csv, oam_marginal, PolState,
    SpinOrbitState, DEFAULT_EDGE_TOLERANCE,
};
use oamwalk::metrics::{poisson_sigma, sample_counts, MetricsReport, ProbDist};
use oamwalk::photonics::{efficiency_correction, evolve_with_dephasing};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::SequenceConfig;
use crate::error::CliError;
use crate::output::{keyed, Output};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub m0: i64,
    /// `{"l": [re, im], "r": [re, im]}`, normalized on use.
    #[serde(default = "default_coin")]
    pub coin: PolState,
    #[serde(default)]
    pub window: Option<(i64, i64)>,
    #[serde(default = "default_edge_tolerance")]
    pub edge_tolerance: f64,
    /// Step spacing over Rayleigh range; adds the per-step Gouy phase.
    #[serde(default)]
    pub gouy_d_over_zr: Option<f64>,
    /// Per-OAM detection efficiency applied before sampling and divided out after.
    #[serde(default)]
    pub efficiency: Option<BTreeMap<i64, f64>>,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_steps() -> usize {
    4
}

fn default_coin() -> PolState {
    PolState::right()
}

fn default_edge_tolerance() -> f64 {
    DEFAULT_EDGE_TOLERANCE
}

pub fn run(mut cfg: WalkConfig, dir: &Path) -> Result<Output, CliError> {
    let seq = cfg.sequence.resolve("standard-paper")?;
    let window = *cfg.window.get_or_insert_with(|| {
        let (lo, hi) = default_window(&seq, cfg.steps);
        (lo + cfg.m0, hi + cfg.m0)
    });
    let coin = PolState::normalized(cfg.coin.l, cfg.coin.r)?;
    let psi0 = SpinOrbitState::localized(cfg.m0, coin, window)?.with_edge_tolerance(cfg.edge_tolerance);
    let states = match cfg.gouy_d_over_zr {
        Some(d) => evolve_with_dephasing(&psi0, &seq, cfg.steps, d)?,
        None => evolve(&psi0, &seq, cfg.steps)?,
    };
    let marginals = states.iter().map(oam_marginal).collect::<Result<Vec<_>, _>>()?;
    let last = states.last().expect("nonempty");
    let final_marginal = marginals.last().expect("nonempty");

    let mut o = Output::new(dir, "walk", &cfg)?;
    o.csv("marginals.csv", &marginals_csv(&marginals))?;
    o.csv("final_marginal.csv", &marginal_csv(final_marginal))?;

    let mut result = json!({
        "steps": cfg.steps,
        "window": window,
        "norm_drift": (last.norm_sqr() - 1.0).abs(),
        "coin_walker_entropy_bits": coin_walker_entanglement(last)?,
        "marginals": marginals
            .iter()
            .map(|d| keyed(d.iter().map(|(m, p)| (m, p))))
            .collect::<Vec<_>>(),
        "final_state": serde_json::to_value(last).expect("state serializes"),
    });

    if let Some(shots) = cfg.shots {
        let eta: BTreeMap<i64, f64> = final_marginal
            .keys()
            .map(|&m| (m, cfg.efficiency.as_ref().and_then(|e| e.get(&m)).copied().unwrap_or(1.0)))
            .collect();
        let detected = detected_distribution(final_marginal, &eta)?;
        let counts = sample_counts(&detected, shots, cfg.seed)?;
        let sigma = poisson_sigma(&counts);
        let mut csv = String::from("m,count,sigma\n");
        for (m, c) in &counts.counts {
            csv.push_str(&format!("{m},{c},{:?}\n", sigma[m]));
        }
        o.csv("counts.csv", &csv)?;
        let measured = counts.frequencies()?;
        let corrected = if cfg.efficiency.is_some() {
            efficiency_correction(&measured, &eta)?
        } else {
            measured
        };
        let report = MetricsReport::compare(final_marginal, &corrected, Some(shots), Some(cfg.seed))?;
        o.json(
            "metrics.json",
            json!({
                "metrics": report,
                "corrected": keyed(corrected.iter().map(|(m, p)| (m, p))),
            }),
        )?;
        result["counts"] = keyed(counts.counts.iter().map(|(m, c)| (m, *c)));
    }
    o.json("walk.json", result)?;
    Ok(o)
}

/// `P(m) η(m)`, renormalized.
fn detected_distribution(p: &ProbDist<i64>, eta: &BTreeMap<i64, f64>) -> Result<ProbDist<i64>, CliError> {
    let mut weighted = BTreeMap::new();
    for (&m, prob) in p.iter() {
        let e = eta[&m];
        if !(e > 0.0 && e <= 1.0) {
            return Err(CliError::Config(format!("efficiency.{m}: must lie in (0, 1], got {e}")));
        }
        weighted.insert(m, prob * e);
    }
    Ok(ProbDist::sub_normalized(weighted)?.normalized()?)
}
