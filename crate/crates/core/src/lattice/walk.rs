use std::collections::BTreeMap;

use num_complex::Complex64;

use super::optics::{check_qplate_retardance, retarder_matrix, shift_of, Mat2, OpticalElement, StepSequence};
use super::state::{Polarization, SpinOrbitState};
use crate::error::{Error, Result};
use crate::metrics::ProbDist;

const NORM_GUARD: f64 = 1e-9;

fn require_normalized(state: &SpinOrbitState) -> Result<()> {
    let n = state.norm_sqr();
    if (n - 1.0).abs() > NORM_GUARD {
        return Err(Error::validation("state", format!("norm² is {n}, expected 1")));
    }
    Ok(())
}

/// `[−(n+2)|2q|, (n+2)|2q|]`: one step moves amplitude at most `|2q|` sites.
pub fn default_window(seq: &StepSequence, steps: usize) -> (i64, i64) {
    let half = (steps as i64 + 2) * seq.spacing();
    (-half, half)
}

/// Applies the same 2×2 Jones matrix to the coin at every site.
fn apply_coin(state: &SpinOrbitState, u: &Mat2) -> SpinOrbitState {
    let mut out = state.clone();
    let (l, r) = out.components_mut();
    for (a, b) in l.iter_mut().zip(r.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = u[(0, 0)] * x + u[(0, 1)] * y;
        *b = u[(1, 0)] * x + u[(1, 1)] * y;
    }
    out
}

/// Retarder with retardance `delta_w` and fast axis `theta` on every OAM site.
pub fn apply_waveplate(state: &SpinOrbitState, delta_w: f64, theta: f64) -> Result<SpinOrbitState> {
    require_normalized(state)?;
    OpticalElement::waveplate(delta_w, theta).validate()?;
    Ok(apply_coin(state, &retarder_matrix(delta_w, theta)))
}

/// q-plate of charge `q`, retardance `delta` and axis offset `alpha0`:
///
/// `|L,m⟩ → cos(δ/2)|L,m⟩ − i sin(δ/2) e^{2iα₀}|R,m+2q⟩`,
/// `|R,m⟩ → cos(δ/2)|R,m⟩ − i sin(δ/2) e^{−2iα₀}|L,m−2q⟩`.
///
/// Fails when amplitude above the edge tolerance would leave the window or
/// lands on its outermost sites.
pub fn apply_qplate(state: &SpinOrbitState, q: f64, delta: f64, alpha0: f64) -> Result<SpinOrbitState> {
    require_normalized(state)?;
    OpticalElement::qplate(q, delta, alpha0).validate()?;
    let shift = shift_of(q)?;
    check_qplate_retardance(delta)?;

    let c = Complex64::new((delta / 2.0).cos(), 0.0);
    let s = (delta / 2.0).sin();
    let to_r = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, 2.0 * alpha0);
    let to_l = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -2.0 * alpha0);

    let tol = state.edge_tolerance();
    let (m_min, m_max) = state.window();
    let src_l = state.component(Polarization::L);
    let src_r = state.component(Polarization::R);

    for (i, m) in state.sites().enumerate() {
        for (target, amp) in [(m + shift, to_r * src_l[i]), (m - shift, to_l * src_r[i])] {
            if (target < m_min || target > m_max) && amp.norm() > tol {
                return Err(Error::Truncation {
                    m: target,
                    magnitude: amp.norm(),
                    limit: tol,
                });
            }
        }
    }

    let mut out = state.clone();
    let width = state.width() as i64;
    let (out_l, out_r) = out.components_mut();
    for i in 0..width {
        let iu = i as usize;
        let from_r = i + shift;
        let from_l = i - shift;
        out_l[iu] = c * src_l[iu]
            + if (0..width).contains(&from_r) {
                to_l * src_r[from_r as usize]
            } else {
                Complex64::new(0.0, 0.0)
            };
        out_r[iu] = c * src_r[iu]
            + if (0..width).contains(&from_l) {
                to_r * src_l[from_l as usize]
            } else {
                Complex64::new(0.0, 0.0)
            };
    }
    out.check_edges()?;
    Ok(out)
}

pub fn apply_element(state: &SpinOrbitState, element: &OpticalElement) -> Result<SpinOrbitState> {
    match *element {
        OpticalElement::WavePlate {
            retardance,
            axis_angle,
        } => apply_waveplate(state, retardance, axis_angle),
        OpticalElement::QPlate {
            charge,
            retardance,
            axis_offset,
        } => apply_qplate(state, charge, retardance, axis_offset),
    }
}

/// One walk step: every element of `seq` in order.
pub fn apply_step(state: &SpinOrbitState, seq: &StepSequence) -> Result<SpinOrbitState> {
    seq.elements()
        .iter()
        .try_fold(state.clone(), |s, el| apply_element(&s, el))
}

/// States after steps `0..=steps`; entry 0 is the input.
pub fn evolve(state: &SpinOrbitState, seq: &StepSequence, steps: usize) -> Result<Vec<SpinOrbitState>> {
    require_normalized(state)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for _ in 0..steps {
        let next = apply_step(out.last().expect("nonempty"), seq)?;
        out.push(next);
    }
    Ok(out)
}

/// `P(m) = Σ_pol |a(pol, m)|²` over every site of the window.
pub fn oam_marginal(state: &SpinOrbitState) -> Result<ProbDist<i64>> {
    let probs: BTreeMap<i64, f64> = state
        .sites()
        .map(|m| {
            (
                m,
                state.amp(Polarization::L, m).norm_sqr() + state.amp(Polarization::R, m).norm_sqr(),
            )
        })
        .collect();
    ProbDist::new(probs)
}

/// Rows `m,P`.
pub fn marginal_csv(dist: &ProbDist<i64>) -> String {
    let mut out = String::from("m,P\n");
    for (m, p) in dist.iter() {
        out.push_str(&format!("{m},{p:?}\n"));
    }
    out
}

/// Rows `step,m,P` for a sequence of marginals.
pub fn marginals_csv(dists: &[ProbDist<i64>]) -> String {
    let mut out = String::from("step,m,P\n");
    for (n, dist) in dists.iter().enumerate() {
        for (m, p) in dist.iter() {
            out.push_str(&format!("{n},{m},{p:?}\n"));
        }
    }
    out
}

/// `P(pol, m) = |a(pol, m)|²`.
pub fn full_distribution(state: &SpinOrbitState) -> Result<ProbDist<(Polarization, i64)>> {
    let mut probs = BTreeMap::new();
    for pol in [Polarization::L, Polarization::R] {
        for m in state.sites() {
            probs.insert((pol, m), state.amp(pol, m).norm_sqr());
        }
    }
    ProbDist::new(probs)
}

/// `ρ_coin = Tr_walker |ψ⟩⟨ψ|`, normalized to unit trace.
pub fn reduced_coin_density(state: &SpinOrbitState) -> Result<Mat2> {
    require_normalized(state)?;
    let l = state.component(Polarization::L);
    let r = state.component(Polarization::R);
    let mut rho = Mat2::zeros();
    for (a, b) in l.iter().zip(r) {
        rho[(0, 0)] += a * a.conj();
        rho[(0, 1)] += a * b.conj();
        rho[(1, 0)] += b * a.conj();
        rho[(1, 1)] += b * b.conj();
    }
    let trace = (rho[(0, 0)] + rho[(1, 1)]).re;
    Ok(rho / Complex64::new(trace, 0.0))
}

/// Von Neumann entropy of the reduced coin state, in bits; 0 for product
/// states and 1 for maximal spin-orbit entanglement.
pub fn coin_walker_entanglement(state: &SpinOrbitState) -> Result<f64> {
    let rho = reduced_coin_density(state)?;
    let (a, d) = (rho[(0, 0)].re, rho[(1, 1)].re);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + rho[(0, 1)].norm_sqr()).sqrt();
    let h = |p: f64| if p > 1e-300 { -p * p.log2() } else { 0.0 };
    Ok(h(mean + radius) + h((mean - radius).max(0.0)))
}
