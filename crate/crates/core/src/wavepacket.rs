//! Gaussian wavepackets on a single band and their propagation.
//!
//! A packet is `|φ⟩ ⊗ Σ_j A(j) e^{−ik₀j} |j·|2q|⟩` with `A(j) ∝ e^{−j²/2σ²}`
//! and a constant coin `|φ⟩`, usually a band eigenstate at `k₀`. Under the
//! standard momentum convention the packet centre drifts by `−V_s(k₀)`
//! lattice sites per step; the mirrored convention flips that sign.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    coin_walker_entanglement, evolve, oam_marginal, MomentumConvention, PolState, Polarization,
    SpinOrbitState, StepSequence,
};
use crate::metrics::ProbDist;
use crate::spectral::{bands_at, group_velocity};

/// Envelope amplitude below which the window edge is considered empty.
pub const ENVELOPE_EDGE_TOL: f64 = 1e-10;

/// Relative envelope amplitude at the edge of the default window.
const DEFAULT_WINDOW_TAIL: f64 = 1e-12;

/// Coin of a wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinChoice {
    /// Eigenstate `φ_s(k₀)` of band 1 or 2.
    Band(u8),
    /// `(φ₁(k₀) + φ₂(k₀))/√2`.
    BandSuperposition,
    /// Fixed polarization, normalized on use.
    Override(PolState),
}

/// Parameters of a Gaussian wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    /// Envelope width in lattice sites.
    pub sigma: f64,
    /// Mean quasi-momentum in radians.
    pub k0: f64,
    pub coin: CoinChoice,
    /// OAM window; `None` selects [`default_wavepacket_window`] for the run.
    pub window: Option<(i64, i64)>,
    pub convention: MomentumConvention,
}

impl WavepacketSpec {
    pub fn on_band(sigma: f64, k0: f64, band: u8) -> Self {
        Self {
            sigma,
            k0,
            coin: CoinChoice::Band(band),
            window: None,
            convention: MomentumConvention::Standard,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !self.k0.is_finite() {
            return Err(Error::validation("k0", "must be finite"));
        }
        if let CoinChoice::Band(b) = self.coin {
            if b != 1 && b != 2 {
                return Err(Error::validation("band", format!("must be 1 or 2, got {b}")));
            }
        }
        Ok(())
    }
}

/// Window holding the envelope down to `1e-12` of its peak plus room for `steps` steps.
pub fn default_wavepacket_window(sigma: f64, seq: &StepSequence, steps: usize) -> (i64, i64) {
    let tail = (sigma * (2.0 * (1.0 / DEFAULT_WINDOW_TAIL).ln()).sqrt()).ceil() as i64;
    let half = (tail + steps as i64 + 2) * seq.spacing();
    (-half, half)
}

fn resolve_coin(spec: &WavepacketSpec, seq: &StepSequence) -> Result<PolState> {
    match spec.coin {
        CoinChoice::Band(b) => Ok(bands_at(seq, spec.k0, spec.convention)?[b as usize - 1].state),
        CoinChoice::BandSuperposition => {
            let [p1, p2] = bands_at(seq, spec.k0, spec.convention)?;
            PolState::normalized(
                (p1.state.l + p2.state.l) * FRAC_1_SQRT_2,
                (p1.state.r + p2.state.r) * FRAC_1_SQRT_2,
            )
        }
        CoinChoice::Override(c) => PolState::normalized(c.l, c.r),
    }
}

/// Builds the packet on `spec.window`, or on the default window for `steps` steps.
pub fn make_wavepacket_for(spec: &WavepacketSpec, seq: &StepSequence, steps: usize) -> Result<SpinOrbitState> {
    spec.validate()?;
    let window = spec
        .window
        .unwrap_or_else(|| default_wavepacket_window(spec.sigma, seq, steps));
    let spacing = seq.spacing();
    let coin = resolve_coin(spec, seq)?;

    let j_min = window.0.div_euclid(spacing) + i64::from(window.0.rem_euclid(spacing) != 0);
    let j_max = window.1.div_euclid(spacing);
    let envelope = |j: i64| (-(j as f64).powi(2) / (2.0 * spec.sigma * spec.sigma)).exp();
    let a0 = (j_min..=j_max).map(|j| envelope(j).powi(2)).sum::<f64>().sqrt();
    for j in [j_min - 1, j_max + 1] {
        let outside = envelope(j) / a0.max(f64::MIN_POSITIVE);
        if j_min > j_max || outside >= ENVELOPE_EDGE_TOL {
            return Err(Error::Window {
                m: j * spacing,
                m_min: window.0,
                m_max: window.1,
            });
        }
    }

    let sign = spec.convention.sign();
    let mut state = SpinOrbitState::zeros(window)?;
    for j in j_min..=j_max {
        let w = Complex64::from_polar(envelope(j) / a0, -sign * spec.k0 * j as f64);
        *state.amp_mut(Polarization::L, j * spacing) = coin.l * w;
        *state.amp_mut(Polarization::R, j * spacing) = coin.r * w;
    }
    Ok(state)
}

/// Builds the packet on `spec.window`, or on the default window for 0 steps.
pub fn make_wavepacket(spec: &WavepacketSpec, seq: &StepSequence) -> Result<SpinOrbitState> {
    make_wavepacket_for(spec, seq, 0)
}

/// `Σ m P(m)`.
pub fn mean_oam(dist: &ProbDist<i64>) -> f64 {
    dist.iter().map(|(m, p)| *m as f64 * p).sum::<f64>() / dist.total()
}

/// `Σ (m − ⟨m⟩)² P(m)`.
pub fn variance(dist: &ProbDist<i64>) -> f64 {
    let mu = mean_oam(dist);
    dist.iter().map(|(m, p)| (*m as f64 - mu).powi(2) * p).sum::<f64>() / dist.total()
}

/// Circular mean of the quasi-momentum spectrum,
/// `arg Σ_pol Σ_j ā(j+1) a(j)` in the given convention.
pub fn mean_quasi_momentum(state: &SpinOrbitState, spacing: i64, convention: MomentumConvention) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for pol in [Polarization::L, Polarization::R] {
        for m in state.sites() {
            acc += state.amp(pol, m + spacing).conj() * state.amp(pol, m);
        }
    }
    convention.sign() * acc.arg()
}

/// `Σ_pol |Σ_j a(pol, j) e^{ikj}|²` at each `k`; constant in time for a
/// translation-invariant walk.
pub fn momentum_spectrum(state: &SpinOrbitState, spacing: i64, k_grid: &[f64]) -> Vec<f64> {
    k_grid
        .iter()
        .map(|&k| {
            [Polarization::L, Polarization::R]
                .iter()
                .map(|&pol| {
                    state
                        .sites()
                        .filter(|m| m.rem_euclid(spacing) == 0)
                        .map(|m| state.amp(pol, m) * Complex64::from_polar(1.0, k * (m / spacing) as f64))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum()
        })
        .collect()
}

/// Per-step observables of a propagated packet; entry 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub states: Vec<SpinOrbitState>,
    pub marginals: Vec<ProbDist<i64>>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl Propagation {
    /// JSON array of per-step `{ "step", "mean", "variance", "P": {m: p} }`.
    pub fn marginals_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .marginals
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let p: BTreeMap<String, f64> = d.iter().map(|(m, p)| (m.to_string(), p)).collect();
                serde_json::json!({
                    "step": n,
                    "mean": self.mean[n],
                    "variance": self.variance[n],
                    "P": p,
                })
            })
            .collect();
        serde_json::Value::Array(steps)
    }
}

/// Prepares the packet and evolves it for `steps` steps.
pub fn propagate(spec: &WavepacketSpec, seq: &StepSequence, steps: usize) -> Result<Propagation> {
    let psi0 = make_wavepacket_for(spec, seq, steps)?;
    let states = evolve(&psi0, seq, steps)?;
    let marginals = states.iter().map(oam_marginal).collect::<Result<Vec<_>>>()?;
    Ok(Propagation {
        mean: marginals.iter().map(mean_oam).collect(),
        variance: marginals.iter().map(variance).collect(),
        states,
        marginals,
    })
}

/// Mean OAM displacement per step predicted by the band velocity at `k₀`.
pub fn predicted_drift(seq: &StepSequence, k0: f64, band: u8, convention: MomentumConvention) -> Result<f64> {
    let (v1, v2) = group_velocity(seq, k0, convention)?;
    let v = if band == 1 { v1 } else { v2 };
    Ok(-convention.sign() * v * seq.spacing() as f64)
}

/// One point of a Brillouin-zone sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k0: f64,
    pub mean_oam: f64,
    pub variance: f64,
}

/// Final mean OAM and variance after `steps` steps for each `k₀`.
pub fn brillouin_sweep(
    sigma: f64,
    band: u8,
    k0s: &[f64],
    steps: usize,
    seq: &StepSequence,
    convention: MomentumConvention,
) -> Result<Vec<SweepPoint>> {
    k0s.par_iter()
        .map(|&k0| {
            let spec = WavepacketSpec {
                convention,
                ..WavepacketSpec::on_band(sigma, k0, band)
            };
            let run = propagate(&spec, seq, steps)?;
            Ok(SweepPoint {
                k0,
                mean_oam: run.mean[steps],
                variance: run.variance[steps],
            })
        })
        .collect()
}

/// Rows `k0,mean_oam,variance`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("k0,mean_oam,variance\n");
    for p in points {
        out.push_str(&format!("{:?},{:?},{:?}\n", p.k0, p.mean_oam, p.variance));
    }
    out
}

/// `k₀ = j π / divisions` for `j = 0..=divisions`.
pub fn half_zone_grid(divisions: usize) -> Vec<f64> {
    (0..=divisions).map(|j| PI * j as f64 / divisions as f64).collect()
}

/// Observables of a band-superposition packet after splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct CatSplit {
    pub marginal: ProbDist<i64>,
    /// Coin-walker entropy in bits.
    pub entropy: f64,
    /// OAM of the two strongest lobes in ascending order; one entry when unimodal.
    pub lobes: Vec<i64>,
    /// Distance between the lobes, 0 when unimodal.
    pub separation: i64,
    /// Probability below and above the midpoint between the lobes; a
    /// site on the midpoint contributes half to each side.
    pub half_masses: (f64, f64),
}

/// Lobes of a distribution: local maxima of the 3-point moving average,
/// ignoring peaks below 1% of the highest one.
pub fn find_lobes(dist: &ProbDist<i64>) -> Vec<i64> {
    let sites: Vec<i64> = dist.keys().copied().collect();
    if sites.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = (sites[0], *sites.last().expect("nonempty"));
    let p = |m: i64| dist.get(&m);
    let smooth: Vec<(i64, f64)> = (lo..=hi).map(|m| (m, (p(m - 1) + p(m) + p(m + 1)) / 3.0)).collect();
    let top = smooth.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut peaks: Vec<(i64, f64)> = (0..smooth.len())
        .filter(|&i| {
            let v = smooth[i].1;
            let left = if i > 0 { smooth[i - 1].1 } else { 0.0 };
            let right = smooth.get(i + 1).map_or(0.0, |x| x.1);
            v > left && v >= right && v >= 0.01 * top
        })
        .map(|i| smooth[i])
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut lobes: Vec<i64> = peaks.iter().take(2).map(|x| x.0).collect();
    lobes.sort_unstable();
    lobes
}

/// Prepares `(φ₁(k₀)+φ₂(k₀))/√2 ⊗ envelope`, evolves it and locates the two lobes.
pub fn cat_split(
    sigma: f64,
    k0: f64,
    steps: usize,
    seq: &StepSequence,
    convention: MomentumConvention,
) -> Result<CatSplit> {
    let spec = WavepacketSpec {
        sigma,
        k0,
        coin: CoinChoice::BandSuperposition,
        window: None,
        convention,
    };
    let psi0 = make_wavepacket_for(&spec, seq, steps)?;
    let last = evolve(&psi0, seq, steps)?.pop().expect("nonempty");
    let marginal = oam_marginal(&last)?;
    let entropy = coin_walker_entanglement(&last)?;
    let lobes = find_lobes(&marginal);
    let (separation, mid) = match lobes.as_slice() {
        [a, b] => (b - a, 0.5 * (a + b) as f64),
        [a] => (0, *a as f64),
        _ => (0, 0.0),
    };
    let mut halves = (0.0, 0.0);
    for (m, p) in marginal.iter() {
        let x = *m as f64;
        if x < mid {
            halves.0 += p;
        } else if x > mid {
            halves.1 += p;
        } else {
            halves.0 += 0.5 * p;
            halves.1 += 0.5 * p;
        }
    }
    Ok(CatSplit {
        marginal,
        entropy,
        lobes,
        separation,
        half_masses: halves,
    })
}
