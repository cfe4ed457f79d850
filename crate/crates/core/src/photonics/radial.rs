use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::modes::{hygg_amplitude, lg_radial};
use super::quadrature::{integrate_piecewise, QuadOptions};
use super::special::{gamma, ln_gamma};
use crate::error::{Error, Result};
use crate::lattice::{apply_step, SpinOrbitState, StepSequence};
use crate::metrics::ProbDist;

/// Radial overlap tolerance.
pub const OVERLAP_TOL: f64 = 1e-10;

/// Panel width of the piecewise radial quadrature, in units of `w₀`.
const PANEL: f64 = 0.5;

fn overlap_options() -> QuadOptions {
    QuadOptions {
        abs_tol: OVERLAP_TOL,
        rel_tol: 0.0,
        max_intervals: 2000,
    }
}

/// Upper radius where `e^{−2ρ²/w(ζ)²}` has dropped below 1e-12 of its peak
/// for the largest radial orders used here.
fn cutoff(zeta: f64) -> f64 {
    9.0 * (1.0 + zeta * zeta).sqrt()
}

/// `∫₀^R conj(f) g 2πρ dρ` on panels of width `PANEL`.
pub fn radial_overlap(
    f: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
    r_max: f64,
) -> Result<Complex64> {
    let panels = (r_max / PANEL).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|j| j as f64 * r_max / panels as f64).collect();
    integrate_piecewise(|r| f(r).conj() * g(r) * (2.0 * PI * r), &breaks, overlap_options())
}

/// Radial index of the HyGG mode leaving a tuned `q = 1/2` plate for an
/// input `LG_{0,m}`: `|m| − |m+1|`.
pub fn qplate_output_index(m: i64) -> f64 {
    m.abs() as f64 - (m + 1).abs() as f64
}

/// `c_p` of the LG expansion of the plate output, with `p = 0..=p_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialExpansion {
    pub m: i64,
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
}

impl RadialExpansion {
    pub fn abs_sq(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,abs_c_sq\n");
        for (p, c) in self.abs_sq().iter().enumerate() {
            out.push_str(&format!("{p},{c:?}\n"));
        }
        out
    }
}

/// Expansion of `HyGG_{|m|−|m+1|, m+1}(·, 0⁺)` onto `LG_{p, m+1}(·, 0)`
/// by numeric overlap; `residual = 1 − Σ|c_p|²`.
pub fn qplate_radial_coefficients(m: i64, p_max: u32) -> Result<RadialExpansion> {
    let out_m = m + 1;
    let index = qplate_output_index(m);
    let hygg = |r: f64| hygg_amplitude(index, out_m, r, 0.0).unwrap_or_default();
    let coefficients = (0..=p_max)
        .into_par_iter()
        .map(|p| radial_overlap(|r| lg_radial(p, out_m, r, 0.0), hygg, cutoff(0.0)))
        .collect::<Result<Vec<_>>>()?;
    let residual = 1.0 - coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>();
    Ok(RadialExpansion {
        m,
        coefficients,
        residual,
    })
}

/// Closed-form coefficient
/// `√(1/(p! m! (p+|m+1|)!)) (|m+1|+|m|)! Γ(p + (|m+1|−|m|)/2) / Γ((|m+1|−|m|)/2)`
/// for `m ≥ 0`. It lacks a normalization factor: the value at `p = m = 0`
/// is 1, while the overlap integral gives `c₀² = π/4`.
pub fn closed_form_coefficient(p: u32, m: i64) -> Result<f64> {
    if m < 0 {
        return Err(Error::validation("m", "closed form needs m ≥ 0"));
    }
    let (pf, mf) = (p as f64, m as f64);
    let up = (m + 1) as f64;
    let half = (up - mf) / 2.0;
    let log = -0.5 * (ln_gamma(pf + 1.0) + ln_gamma(mf + 1.0) + ln_gamma(pf + up + 1.0)) + ln_gamma(up + mf + 1.0);
    Ok(log.exp() * gamma(pf + half) / gamma(half))
}

/// `|⟨LG_{0,m}(·,ζ) | HyGG_{|m|−|m+1|, m+1}(·,ζ)⟩|²`: fidelity of the plate
/// output to the input radial profile after a propagation distance `ζ`.
pub fn pupil_overlap(m: i64, zeta: f64) -> Result<f64> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::validation("zeta", format!("must be finite and ≥ 0, got {zeta}")));
    }
    let index = qplate_output_index(m);
    // Validate once so the closure below cannot fail.
    hygg_amplitude(index, m + 1, 1.0, zeta)?;
    let c = radial_overlap(
        |r| lg_radial(0, m, r, zeta),
        |r| hygg_amplitude(index, m + 1, r, zeta).unwrap_or_default(),
        cutoff(zeta),
    )?;
    Ok(c.norm_sqr())
}

/// Result of checking that a tuned plate at the pupil keeps the radial
/// profile of `LG_{0,m}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PupilReport {
    pub m: i64,
    pub overlap: f64,
    pub holds: bool,
}

pub fn pupil_plane_action(m: i64) -> Result<PupilReport> {
    let overlap = pupil_overlap(m, 0.0)?;
    Ok(PupilReport {
        m,
        overlap,
        holds: (overlap - 1.0).abs() < 1e-8,
    })
}

/// Free-space phase `c_m → e^{−i 2|m| arctan(d/z_R)} c_m` accumulated between
/// steps, applied to both polarization components.
pub fn gouy_step_dephasing(state: &SpinOrbitState, d_over_zr: f64) -> Result<SpinOrbitState> {
    if !(d_over_zr >= 0.0) || !d_over_zr.is_finite() {
        return Err(Error::validation("d_over_zR", format!("must be finite and ≥ 0, got {d_over_zr}")));
    }
    let angle = 2.0 * d_over_zr.atan();
    let m_min = state.m_min();
    let mut out = state.clone();
    let (l, r) = out.components_mut();
    for (j, (a, b)) in l.iter_mut().zip(r.iter_mut()).enumerate() {
        let m = m_min + j as i64;
        let phase = Complex64::from_polar(1.0, -angle * m.abs() as f64);
        *a *= phase;
        *b *= phase;
    }
    Ok(out)
}

/// Walk with [`gouy_step_dephasing`] applied after every step; returns
/// `steps + 1` states.
pub fn evolve_with_dephasing(
    state: &SpinOrbitState,
    seq: &StepSequence,
    steps: usize,
    d_over_zr: f64,
) -> Result<Vec<SpinOrbitState>> {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state.clone());
    for _ in 0..steps {
        let next = apply_step(states.last().expect("nonempty"), seq)?;
        states.push(gouy_step_dephasing(&next, d_over_zr)?);
    }
    Ok(states)
}

/// `P(m)/η(m)`, renormalized. Every outcome with positive probability needs
/// a positive efficiency.
pub fn efficiency_correction(dist: &ProbDist<i64>, eta: &BTreeMap<i64, f64>) -> Result<ProbDist<i64>> {
    let mut corrected = BTreeMap::new();
    for (&m, p) in dist.iter() {
        if p == 0.0 {
            corrected.insert(m, 0.0);
            continue;
        }
        let e = eta.get(&m).copied().unwrap_or(0.0);
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::ZeroEfficiency { m, value: e });
        }
        corrected.insert(m, p / e);
    }
    ProbDist::from_map_unchecked(corrected, true).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{evolve, oam_marginal, PolState};
    use crate::metrics::similarity;

    #[test]
    fn table_of_power_coefficients() {
        let table: [(i64, [f64; 4]); 4] = [
            (0, [0.785, 0.098, 0.036, 0.019]),
            (1, [0.883, 0.073, 0.020, 0.008]),
            (2, [0.920, 0.057, 0.012, 0.004]),
            (3, [0.939, 0.046, 0.008, 0.002]),
        ];
        for (m, row) in table {
            let e = qplate_radial_coefficients(m, 3).unwrap();
            for (got, want) in e.abs_sq().iter().zip(row) {
                assert!((got - want).abs() <= 0.005, "m={m}: {got} vs {want}");
            }
        }
        let e = qplate_radial_coefficients(0, 3).unwrap();
        assert!((e.residual - 0.062).abs() <= 0.005);
        assert!((e.abs_sq()[0] - PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn coefficients_real_and_accumulating() {
        for m in [-2, 0, 2] {
            let e = qplate_radial_coefficients(m, 12).unwrap();
            for (p, c) in e.coefficients.iter().enumerate() {
                assert!(c.im.abs() < 1e-12, "m={m}: {c}");
                // Positive for m ≥ 0; for m < 0 only c₀ is, as Γ(p − 1/2)/Γ(−1/2) < 0.
                assert!(if m >= 0 || p == 0 { c.re > 0.0 } else { c.re < 0.0 }, "m={m} p={p}: {c}");
            }
            assert!(e.residual >= -1e-9 && e.residual < 0.05);
            let small = qplate_radial_coefficients(m, 4).unwrap();
            assert!(small.residual > e.residual);
        }
    }

    #[test]
    fn closed_form_is_unnormalized() {
        assert!((closed_form_coefficient(0, 0).unwrap() - 1.0).abs() < 1e-14);
        let overlap = qplate_radial_coefficients(0, 0).unwrap().abs_sq()[0];
        assert!((overlap - 1.0).abs() > 0.2);
        assert!(closed_form_coefficient(0, -1).is_err());
    }

    #[test]
    fn pupil_limit_preserves_profile() {
        for m in [-3, -1, 0, 1, 4] {
            let r = pupil_plane_action(m).unwrap();
            assert!(r.holds, "m={m}: {}", r.overlap);
        }
    }

    #[test]
    fn near_field_overlap() {
        let v = pupil_overlap(1, 0.1).unwrap();
        assert!((v - 0.93).abs() <= 0.01, "{v}");
        let mut last = pupil_overlap(1, 0.0).unwrap();
        for j in 1..=15 {
            let next = pupil_overlap(1, 0.02 * j as f64).unwrap();
            assert!(next < last, "ζ={}: {next} ≥ {last}", 0.02 * j as f64);
            last = next;
        }
    }

    #[test]
    fn gouy_phases() {
        let s = SpinOrbitState::localized(1, PolState::left(), (-3, 3)).unwrap();
        assert_eq!(gouy_step_dephasing(&s, 0.0).unwrap(), s);
        let out = gouy_step_dephasing(&s, 0.01).unwrap();
        let phase = out.amp(crate::lattice::Polarization::L, 1).arg();
        assert!((phase + 2.0 * 0.01f64.atan()).abs() < 1e-15);
        assert!((phase + 0.0200).abs() < 1e-4);
        assert!((out.norm_sqr() - s.norm_sqr()).abs() <= 4.0 * f64::EPSILON);
        assert!(gouy_step_dephasing(&s, -0.1).is_err());
    }

    #[test]
    fn far_field_degrades_walk() {
        let seq = StepSequence::standard_paper(std::f64::consts::PI).unwrap();
        let coin = PolState::normalized(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap();
        let s0 = SpinOrbitState::localized(0, coin, (-12, 12)).unwrap();
        let ideal = oam_marginal(evolve(&s0, &seq, 5).unwrap().last().unwrap()).unwrap();
        let score = |d: f64| {
            let run = evolve_with_dephasing(&s0, &seq, 5, d).unwrap();
            similarity(&ideal, &oam_marginal(run.last().unwrap()).unwrap()).unwrap()
        };
        let (near, far) = (score(0.01), score(0.5));
        assert!(far < near, "{far} vs {near}");
        assert!(near > 0.99);
    }

    #[test]
    fn efficiency_round_trip() {
        let raw = ProbDist::from_pairs([(-2, 0.1), (-1, 0.2), (0, 0.3), (1, 0.25), (2, 0.15)]).unwrap();
        let eta: BTreeMap<i64, f64> = (-2i64..=2).map(|m| (m, 1.0 / (1.0 + m.abs() as f64))).collect();
        let biased = ProbDist::sub_normalized(raw.iter().map(|(&m, p)| (m, p * eta[&m])).collect())
            .unwrap()
            .normalized()
            .unwrap();
        let back = efficiency_correction(&biased, &eta).unwrap();
        for (&m, p) in raw.iter() {
            assert!((back.get(&m) - p).abs() < 1e-12);
        }
        assert!((back.total() - 1.0).abs() < 1e-12);
        let uniform: BTreeMap<i64, f64> = (-2..=2).map(|m| (m, 0.4)).collect();
        let same = efficiency_correction(&raw, &uniform).unwrap();
        for (&m, p) in raw.iter() {
            assert!((same.get(&m) - p).abs() < 1e-15);
        }
    }

    #[test]
    fn efficiency_errors() {
        let raw = ProbDist::from_pairs([(0, 0.5), (3, 0.5)]).unwrap();
        let eta: BTreeMap<i64, f64> = [(0, 0.5)].into_iter().collect();
        assert_eq!(efficiency_correction(&raw, &eta), Err(Error::ZeroEfficiency { m: 3, value: 0.0 }));
        let eta: BTreeMap<i64, f64> = [(0, 0.5), (3, -0.1)].into_iter().collect();
        assert!(matches!(efficiency_correction(&raw, &eta), Err(Error::ZeroEfficiency { m: 3, .. })));
    }
}
