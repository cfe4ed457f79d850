use std::collections::BTreeMap;
use std::path::Path;

use oamwalk::lattice::Polarization;
use oamwalk::metrics::{sample_counts, MetricsReport};
use oamwalk::multiphoton::{
    dpt_joint, inequality_scan, ipt_joint, lift_walk_unitary, significance_csv, significance_scan, top_violation,
    Inequality, JointDistribution, MeasurementBasis, ModeIndex,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::SequenceConfig;
use crate::error::CliError;
use crate::output::Output;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPhotonConfig {
    #[serde(default)]
    pub sequence: SequenceConfig,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Circular-basis input modes of the two photons.
    #[serde(default = "default_inputs")]
    pub inputs: [ModeIndex; 2],
    #[serde(default)]
    pub basis: MeasurementBasis,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_steps() -> usize {
    3
}

fn default_inputs() -> [ModeIndex; 2] {
    [ModeIndex::new(Polarization::L, 0), ModeIndex::new(Polarization::R, 0)]
}

type Pair = (ModeIndex, ModeIndex);

fn scan_csv(classical: &BTreeMap<Pair, f64>, photon: &BTreeMap<Pair, f64>) -> String {
    let mut out = String::from("pol1,m1,pol2,m2,T_classical,T_photon\n");
    for ((p, q), t) in classical {
        out.push_str(&format!("{},{},{},{},{t:?},{:?}\n", p.pol, p.m, q.pol, q.m, photon[&(*p, *q)]));
    }
    out
}

fn pair_json(entry: Option<(Pair, f64)>) -> Value {
    entry.map_or(Value::Null, |((p, q), t)| json!({ "p": p, "q": q, "T": t }))
}

fn summary(joint: &JointDistribution) -> (BTreeMap<Pair, f64>, BTreeMap<Pair, f64>, Value) {
    let modes = joint.support_modes();
    let classical = inequality_scan(&joint.coincidences, &modes, Inequality::Classical);
    let photon = inequality_scan(&joint.coincidences, &modes, Inequality::Photon);
    let value = json!({
        "coincidence_mass": joint.coincidences.total(),
        "bunched": [joint.bunched.0, joint.bunched.1],
        "violating_pairs": {
            "classical": classical.values().filter(|t| **t > 0.0).count(),
            "photon": photon.values().filter(|t| **t > 0.0).count(),
        },
        "top": {
            "classical": pair_json(top_violation(&classical)),
            "photon": pair_json(top_violation(&photon)),
        },
    });
    (classical, photon, value)
}

pub fn run(mut cfg: TwoPhotonConfig, dir: &Path) -> Result<Output, CliError> {
    let seq = cfg.sequence.resolve("wavepacket")?;
    let [a, b] = cfg.inputs;
    for (i, mode) in cfg.inputs.iter().enumerate() {
        if !matches!(mode.pol, Polarization::L | Polarization::R) {
            return Err(CliError::Config(format!("inputs.{i}.pol: must be \"L\" or \"R\"")));
        }
    }
    let window = (a.m.min(b.m), a.m.max(b.m));
    let u = lift_walk_unitary(&seq, cfg.steps, window)?.measured_in(cfg.basis);
    let ipt = ipt_joint(&u, a, b)?;
    let dpt = dpt_joint(&u, a, b)?;
    let (ipt_classical, ipt_photon, ipt_summary) = summary(&ipt);
    let (dpt_classical, dpt_photon, dpt_summary) = summary(&dpt);
    let comparison = MetricsReport::compare(&ipt.coincidences, &dpt.coincidences, None, None)?;

    let mut o = Output::new(dir, "twophoton", &cfg)?;
    o.csv("ipt.csv", &ipt.to_csv())?;
    o.csv("dpt.csv", &dpt.to_csv())?;
    o.csv("ipt_inequalities.csv", &scan_csv(&ipt_classical, &ipt_photon))?;
    o.csv("dpt_inequalities.csv", &scan_csv(&dpt_classical, &dpt_photon))?;

    let mut result = json!({
        "isometry_residual": u.isometry_residual(),
        "ipt": ipt_summary,
        "dpt": dpt_summary,
        "ipt_vs_dpt": comparison,
    });
    if let Some(shots) = cfg.shots {
        let counts = sample_counts(&ipt.coincidences, shots, cfg.seed)?;
        let modes = ipt.support_modes();
        let mut top = serde_json::Map::new();
        for (name, which) in [("classical", Inequality::Classical), ("photon", Inequality::Photon)] {
            let scan = significance_scan(&counts, which, &modes);
            o.csv(&format!("significance_{name}.csv"), &significance_csv(&scan))?;
            let best = scan
                .iter()
                .max_by(|x, y| x.1.significance.total_cmp(&y.1.significance))
                .map_or(Value::Null, |((p, q), s)| json!({ "p": p, "q": q, "significance": s }));
            top.insert(name.to_string(), best);
        }
        let mut csv = String::from("pol1,m1,pol2,m2,count\n");
        for ((p, q), c) in &counts.counts {
            csv.push_str(&format!("{},{},{},{},{c}\n", p.pol, p.m, q.pol, q.m));
        }
        o.csv("counts.csv", &csv)?;
        let measured = counts.frequencies()?;
        result["sampled"] = json!({
            "shots": shots,
            "recorded": counts.recorded(),
            "top_significance": top,
            "vs_ipt": MetricsReport::compare(&ipt.coincidences, &measured, Some(shots), Some(cfg.seed))?,
            "vs_dpt": MetricsReport::compare(&dpt.coincidences, &measured, Some(shots), Some(cfg.seed))?,
        });
    }
    o.json("twophoton.json", result)?;
    Ok(o)
}
