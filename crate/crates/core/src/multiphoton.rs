//! Two-photon walks, beam-splitter coincidences and photon correlation inequalities.
//!
//! Both photons traverse the same single-particle network `U` and then meet
//! a symmetric 50:50 splitter (transmission `1/√2`, reflection `i/√2`) on
//! the same input port; a coincidence is one photon on each output port.
//! A two-photon outcome is written `(p, q)` with `p` on port A and `q` on
//! port B, so every coincidence map is symmetric and carries total mass 1/2.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{evolve, Polarization, SpinOrbitState, StepSequence};
use crate::metrics::{CountRecord, ProbDist};

/// Probabilities at or below this are left out of outcome scans.
pub const OUTCOME_FLOOR: f64 = 1e-12;

/// Single-photon mode: polarization and OAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub pol: Polarization,
    pub m: i64,
}

impl ModeIndex {
    pub const fn new(pol: Polarization, m: i64) -> Self {
        Self { pol, m }
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.pol, self.m)
    }
}

/// Polarization basis of the analyzers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    #[default]
    HV,
    LR,
}

/// Mode-to-mode transfer matrix; column `j` is the image of `inputs[j]`
/// expanded on `outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleUnitary {
    pub inputs: Vec<ModeIndex>,
    pub outputs: Vec<ModeIndex>,
    pub matrix: DMatrix<Complex64>,
}

impl SingleParticleUnitary {
    pub fn new(inputs: Vec<ModeIndex>, outputs: Vec<ModeIndex>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != outputs.len() || matrix.ncols() != inputs.len() {
            return Err(Error::validation(
                "unitary",
                format!(
                    "matrix is {}×{}, modes give {}×{}",
                    matrix.nrows(),
                    matrix.ncols(),
                    outputs.len(),
                    inputs.len()
                ),
            ));
        }
        Ok(Self {
            inputs,
            outputs,
            matrix,
        })
    }

    fn column(&self, mode: ModeIndex) -> Result<usize> {
        self.inputs
            .iter()
            .position(|&x| x == mode)
            .ok_or_else(|| Error::validation("input", format!("mode ({mode}) is not an input of the network")))
    }

    /// `max |U†U − I|`; zero for an isometry.
    pub fn isometry_residual(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        let n = g.nrows();
        (g - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Re-expresses the outputs on the analyzer basis. Input is assumed in
    /// the circular basis; `⟨H|ψ⟩ = (a_L + a_R)/√2`, `⟨V|ψ⟩ = i(a_L − a_R)/√2`.
    pub fn measured_in(&self, basis: MeasurementBasis) -> Self {
        if basis == MeasurementBasis::LR {
            return self.clone();
        }
        let mut sites: Vec<i64> = self.outputs.iter().map(|o| o.m).collect();
        sites.sort_unstable();
        sites.dedup();
        let row_of: BTreeMap<ModeIndex, usize> =
            self.outputs.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let mut outputs = Vec::with_capacity(2 * sites.len());
        for pol in [Polarization::H, Polarization::V] {
            outputs.extend(sites.iter().map(|&m| ModeIndex::new(pol, m)));
        }
        let h = FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        let matrix = DMatrix::from_fn(outputs.len(), self.inputs.len(), |r, c| {
            let m = outputs[r].m;
            let get = |pol| {
                row_of
                    .get(&ModeIndex::new(pol, m))
                    .map_or(zero, |&row| self.matrix[(row, c)])
            };
            let (l, rr) = (get(Polarization::L), get(Polarization::R));
            if outputs[r].pol == Polarization::H {
                (l + rr) * h
            } else {
                i * (l - rr) * h
            }
        });
        Self {
            inputs: self.inputs.clone(),
            outputs,
            matrix,
        }
    }
}

fn circular_modes(window: (i64, i64)) -> Vec<ModeIndex> {
    [Polarization::L, Polarization::R]
        .iter()
        .flat_map(|&pol| (window.0..=window.1).map(move |m| ModeIndex::new(pol, m)))
        .collect()
}

/// Dense transfer matrix of `steps` walk steps from the input `window`.
///
/// The output window is the input window padded by `(steps + 2)|2q|` on
/// each side, so no input column is truncated and the matrix is an isometry.
pub fn lift_walk_unitary(seq: &StepSequence, steps: usize, window: (i64, i64)) -> Result<SingleParticleUnitary> {
    if window.0 > window.1 {
        return Err(Error::validation("window", "m_min exceeds m_max"));
    }
    let pad = (steps as i64 + 2) * seq.spacing();
    let out_window = (window.0 - pad, window.1 + pad);
    let inputs = circular_modes(window);
    let outputs = circular_modes(out_window);
    let columns = inputs
        .par_iter()
        .map(|mode| {
            let mut psi = SpinOrbitState::zeros(out_window)?;
            *psi.amp_mut(mode.pol, mode.m) = Complex64::new(1.0, 0.0);
            let last = evolve(&psi, seq, steps)?.pop().expect("nonempty");
            Ok(last.amplitudes().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = DMatrix::from_fn(outputs.len(), inputs.len(), |r, c| columns[c][r]);
    SingleParticleUnitary::new(inputs, outputs, matrix)
}

/// Two-photon model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhotonModel {
    /// Indistinguishable photons: bosonic interference.
    Ipt,
    /// Distinguishable photons: classical composition.
    Dpt,
}

/// Output of a two-photon computation.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub model: PhotonModel,
    /// `P̄(p, q)` before the splitter, keyed with `p ≤ q`; normalized.
    pub pre_splitter: ProbDist<(ModeIndex, ModeIndex)>,
    /// `P(p on A, q on B)`, symmetric; total 1/2.
    pub coincidences: ProbDist<(ModeIndex, ModeIndex)>,
    /// Probability that both photons leave through port A, and through port B.
    pub bunched: (f64, f64),
}

impl JointDistribution {
    fn from_pre_splitter(model: PhotonModel, pre: BTreeMap<(ModeIndex, ModeIndex), f64>) -> Result<Self> {
        let mut coincidences = BTreeMap::new();
        let mut bunched = 0.0;
        for (&(p, q), &pbar) in &pre {
            if p == q {
                // |2_p⟩ on one splitter port: 1/4 on each bunched port, 1/2 split.
                coincidences.insert((p, p), 0.5 * pbar);
            } else {
                coincidences.insert((p, q), 0.25 * pbar);
                coincidences.insert((q, p), 0.25 * pbar);
            }
            bunched += 0.25 * pbar;
        }
        Ok(Self {
            model,
            pre_splitter: ProbDist::new(pre)?,
            coincidences: ProbDist::sub_normalized(coincidences)?,
            bunched: (bunched, bunched),
        })
    }

    /// `P(p on A, q on B)`.
    pub fn coincidence(&self, p: ModeIndex, q: ModeIndex) -> f64 {
        self.coincidences.get(&(p, q))
    }

    /// `P̄(p, q)` before the splitter, in either order.
    pub fn pre(&self, p: ModeIndex, q: ModeIndex) -> f64 {
        self.pre_splitter.get(&(p.min(q), p.max(q)))
    }

    /// Modes carrying a coincidence probability above [`OUTCOME_FLOOR`].
    pub fn support_modes(&self) -> BTreeSet<ModeIndex> {
        self.coincidences
            .iter()
            .filter(|(_, p)| *p > OUTCOME_FLOOR)
            .flat_map(|((a, b), _)| [*a, *b])
            .collect()
    }

    /// Rows `pol1,m1,pol2,m2,P` of the coincidence map.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pol1,m1,pol2,m2,P\n");
        for ((p, q), prob) in self.coincidences.iter() {
            out.push_str(&format!("{},{},{},{},{:?}\n", p.pol, p.m, q.pol, q.m, prob));
        }
        out
    }
}

fn pre_splitter_map(
    u: &SingleParticleUnitary,
    in1: ModeIndex,
    in2: ModeIndex,
    prob: impl Fn(usize, usize, usize, usize) -> f64 + Sync,
) -> Result<BTreeMap<(ModeIndex, ModeIndex), f64>> {
    let c1 = u.column(in1)?;
    let c2 = u.column(in2)?;
    let n = u.outputs.len();
    let rows: Vec<Vec<((ModeIndex, ModeIndex), f64)>> = (0..n)
        .into_par_iter()
        .map(|p| {
            (p..n)
                .map(|q| ((u.outputs[p], u.outputs[q]), prob(c1, c2, p, q)))
                .collect()
        })
        .collect();
    let mut map = BTreeMap::new();
    for ((a, b), v) in rows.into_iter().flatten() {
        map.insert((a.min(b), a.max(b)), v);
    }
    Ok(map)
}

/// Indistinguishable photons in `in1` and `in2` (possibly equal).
///
/// `P̄(p, q) = |U_{1p}U_{2q} + U_{1q}U_{2p}|² / (∏ n_in! ∏ n_out!)`.
pub fn ipt_joint(u: &SingleParticleUnitary, in1: ModeIndex, in2: ModeIndex) -> Result<JointDistribution> {
    let occupancy_in = if in1 == in2 { 2.0 } else { 1.0 };
    let m = &u.matrix;
    let pre = pre_splitter_map(u, in1, in2, |c1, c2, p, q| {
        let perm = m[(p, c1)] * m[(q, c2)] + m[(q, c1)] * m[(p, c2)];
        let occupancy_out = if p == q { 2.0 } else { 1.0 };
        perm.norm_sqr() / (occupancy_in * occupancy_out)
    })?;
    JointDistribution::from_pre_splitter(PhotonModel::Ipt, pre)
}

/// Distinguishable photons: `P̄(p, q) = |U_{1p}U_{2q}|² + |U_{1q}U_{2p}|²`,
/// `P̄(p, p) = |U_{1p}U_{2p}|²`.
pub fn dpt_joint(u: &SingleParticleUnitary, in1: ModeIndex, in2: ModeIndex) -> Result<JointDistribution> {
    let m = &u.matrix;
    let pre = pre_splitter_map(u, in1, in2, |c1, c2, p, q| {
        let direct = (m[(p, c1)] * m[(q, c2)]).norm_sqr();
        if p == q {
            direct
        } else {
            direct + (m[(q, c1)] * m[(p, c2)]).norm_sqr()
        }
    })?;
    JointDistribution::from_pre_splitter(PhotonModel::Dpt, pre)
}

/// Bosonic computation with an extra two-valued label on every mode.
///
/// With `distinguishable` the photons carry orthogonal labels and the
/// label is traced out at detection; otherwise both share one label and
/// the result is [`ipt_joint`].
pub fn labeled_joint(
    u: &SingleParticleUnitary,
    in1: ModeIndex,
    in2: ModeIndex,
    distinguishable: bool,
) -> Result<JointDistribution> {
    let (l1, l2) = (0usize, usize::from(distinguishable));
    let m = &u.matrix;
    let n = u.outputs.len();
    let c1 = u.column(in1)?;
    let c2 = u.column(in2)?;
    // Extended mode index: (output row, label).
    let amp = |col: usize, label: usize, row: usize, out_label: usize| {
        if label == out_label {
            m[(row, col)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let occupancy_in = if c1 == c2 && l1 == l2 { 2.0 } else { 1.0 };
    let mut pre = BTreeMap::new();
    for p in 0..n {
        for q in p..n {
            let mut total = 0.0;
            for la in 0..2 {
                for lb in 0..2 {
                    if p == q && lb < la {
                        continue;
                    }
                    let perm = amp(c1, l1, p, la) * amp(c2, l2, q, lb) + amp(c1, l1, q, lb) * amp(c2, l2, p, la);
                    let occupancy_out = if p == q && la == lb { 2.0 } else { 1.0 };
                    total += perm.norm_sqr() / (occupancy_in * occupancy_out);
                }
            }
            let (a, b) = (u.outputs[p], u.outputs[q]);
            pre.insert((a.min(b), a.max(b)), total);
        }
    }
    let model = if distinguishable {
        PhotonModel::Dpt
    } else {
        PhotonModel::Ipt
    };
    JointDistribution::from_pre_splitter(model, pre)
}

/// Which correlation bound is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `T = √(P_pp P_qq)/3 − P_pq`, nonpositive for classical light.
    Classical,
    /// `T = √(P_pp P_qq) − P_pq`, nonpositive for distinguishable photons.
    Photon,
}

impl Inequality {
    pub fn prefactor(self) -> f64 {
        match self {
            Inequality::Classical => 1.0 / 3.0,
            Inequality::Photon => 1.0,
        }
    }
}

/// `T = a√(P_pp P_qq) − P_pq` on a coincidence map; absent entries read as 0.
pub fn inequality_t(dist: &ProbDist<(ModeIndex, ModeIndex)>, p: ModeIndex, q: ModeIndex, which: Inequality) -> f64 {
    which.prefactor() * (dist.get(&(p, p)) * dist.get(&(q, q))).sqrt() - dist.get(&(p, q))
}

pub fn classical_inequality_t(dist: &ProbDist<(ModeIndex, ModeIndex)>, p: ModeIndex, q: ModeIndex) -> f64 {
    inequality_t(dist, p, q, Inequality::Classical)
}

pub fn photon_inequality_t(dist: &ProbDist<(ModeIndex, ModeIndex)>, p: ModeIndex, q: ModeIndex) -> f64 {
    inequality_t(dist, p, q, Inequality::Photon)
}

/// `T` for every pair `p < q` of the given modes.
pub fn inequality_scan(
    dist: &ProbDist<(ModeIndex, ModeIndex)>,
    modes: &BTreeSet<ModeIndex>,
    which: Inequality,
) -> BTreeMap<(ModeIndex, ModeIndex), f64> {
    let modes: Vec<ModeIndex> = modes.iter().copied().collect();
    let mut out = BTreeMap::new();
    for (i, &p) in modes.iter().enumerate() {
        for &q in &modes[i + 1..] {
            out.insert((p, q), inequality_t(dist, p, q, which));
        }
    }
    out
}

/// Inequality value with its Poisson uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Significance {
    pub t: f64,
    pub sigma: f64,
    /// `T / σ(T)`.
    pub significance: f64,
}

/// `T` and `σ(T)` from coincidence counts normalized by the recorded total `N`.
///
/// First-order propagation with `Var(c) = c`:
/// `σ² = [a²(c_pp + c_qq)/4 + c_pq] / N²`.
pub fn pair_significance(
    counts: &CountRecord<(ModeIndex, ModeIndex)>,
    p: ModeIndex,
    q: ModeIndex,
    which: Inequality,
) -> Result<Significance> {
    let cpp = counts.get(&(p, p)) as f64;
    let cqq = counts.get(&(q, q)) as f64;
    let cpq = counts.get(&(p, q)) as f64;
    if cpp + cqq + cpq == 0.0 {
        return Err(Error::ZeroCount {
            pair: format!("({p}) ({q})"),
        });
    }
    let n = counts.recorded() as f64;
    let a = which.prefactor();
    let t = (a * (cpp * cqq).sqrt() - cpq) / n;
    let sigma = (a * a * (cpp + cqq) / 4.0 + cpq).sqrt() / n;
    Ok(Significance {
        t,
        sigma,
        significance: t / sigma,
    })
}

/// Significance for each listed pair.
pub fn violation_significance(
    counts: &CountRecord<(ModeIndex, ModeIndex)>,
    which: Inequality,
    pairs: &[(ModeIndex, ModeIndex)],
) -> Result<BTreeMap<(ModeIndex, ModeIndex), Significance>> {
    pairs
        .iter()
        .map(|&(p, q)| Ok(((p, q), pair_significance(counts, p, q, which)?)))
        .collect()
}

/// Significance for every pair `p < q` of `modes` with at least one count
/// among `c_pp`, `c_qq`, `c_pq`.
pub fn significance_scan(
    counts: &CountRecord<(ModeIndex, ModeIndex)>,
    which: Inequality,
    modes: &BTreeSet<ModeIndex>,
) -> BTreeMap<(ModeIndex, ModeIndex), Significance> {
    let modes: Vec<ModeIndex> = modes.iter().copied().collect();
    let mut out = BTreeMap::new();
    for (i, &p) in modes.iter().enumerate() {
        for &q in &modes[i + 1..] {
            if let Ok(s) = pair_significance(counts, p, q, which) {
                out.insert((p, q), s);
            }
        }
    }
    out
}

/// Rows `pol1,m1,pol2,m2,T,sigma,significance`.
pub fn significance_csv(map: &BTreeMap<(ModeIndex, ModeIndex), Significance>) -> String {
    let mut out = String::from("pol1,m1,pol2,m2,T,sigma,significance\n");
    for ((p, q), s) in map {
        out.push_str(&format!(
            "{},{},{},{},{:?},{:?},{:?}\n",
            p.pol, p.m, q.pol, q.m, s.t, s.sigma, s.significance
        ));
    }
    out
}

/// Pair with the largest `T` in a scan.
pub fn top_violation(scan: &BTreeMap<(ModeIndex, ModeIndex), f64>) -> Option<((ModeIndex, ModeIndex), f64)> {
    scan.iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (*k, *v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{sample_counts, tvd};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const L0: ModeIndex = ModeIndex::new(Polarization::L, 0);
    const R0: ModeIndex = ModeIndex::new(Polarization::R, 0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_network() -> SingleParticleUnitary {
        let modes = vec![L0, R0];
        SingleParticleUnitary::new(modes.clone(), modes, DMatrix::identity(2, 2)).unwrap()
    }

    fn hom_network() -> SingleParticleUnitary {
        let modes = vec![L0, R0];
        let h = FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)]);
        SingleParticleUnitary::new(modes.clone(), modes, m).unwrap()
    }

    fn walk3() -> SingleParticleUnitary {
        lift_walk_unitary(&StepSequence::wavepacket(PI).unwrap(), 3, (-1, 1)).unwrap()
    }

    fn random_unitary(entries: &[(f64, f64)], n: usize) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(n, n, |r, col| {
            let (x, y) = entries[r * n + col];
            c(x, y)
        });
        a.qr().q()
    }

    #[test]
    fn lifted_identity_for_zero_steps() {
        let seq = StepSequence::wavepacket(PI).unwrap();
        let u = lift_walk_unitary(&seq, 0, (-2, 2)).unwrap();
        assert!(u.isometry_residual() < 1e-15);
        for (j, mode) in u.inputs.iter().enumerate() {
            let row = u.outputs.iter().position(|o| o == mode).unwrap();
            assert_eq!(u.matrix[(row, j)], c(1.0, 0.0));
            assert!((u.matrix.column(j).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lifted_columns_match_evolution() {
        let seq = StepSequence::standard_paper(1.2).unwrap();
        let u = lift_walk_unitary(&seq, 3, (-2, 2)).unwrap();
        assert!(u.isometry_residual() < 1e-12);
        let j = u.inputs.iter().position(|&x| x == L0).unwrap();
        let psi = SpinOrbitState::localized(0, crate::lattice::PolState::left(), (-12, 12)).unwrap();
        let last = evolve(&psi, &seq, 3).unwrap().pop().unwrap();
        for (r, o) in u.outputs.iter().enumerate() {
            assert!((u.matrix[(r, j)] - last.amp(o.pol, o.m)).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_network_coincidences() {
        for joint in [
            ipt_joint(&identity_network(), L0, R0).unwrap(),
            dpt_joint(&identity_network(), L0, R0).unwrap(),
        ] {
            assert!((joint.coincidence(L0, R0) - 0.25).abs() < 1e-15);
            assert!((joint.coincidence(R0, L0) - 0.25).abs() < 1e-15);
            assert_eq!(joint.coincidence(L0, L0), 0.0);
            assert!((joint.coincidences.total() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn hong_ou_mandel_dip() {
        let ipt = ipt_joint(&hom_network(), L0, R0).unwrap();
        let dpt = dpt_joint(&hom_network(), L0, R0).unwrap();
        assert!(ipt.pre(L0, R0).abs() < 1e-12);
        assert!((dpt.pre(L0, R0) - 0.5).abs() < 1e-12);
        assert!((ipt.pre(L0, L0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn doubly_occupied_input() {
        let joint = ipt_joint(&hom_network(), L0, L0).unwrap();
        assert!((joint.pre(L0, R0) - 0.5).abs() < 1e-12);
        assert!((joint.pre(L0, L0) - 0.25).abs() < 1e-12);
        assert!((joint.pre_splitter.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_step_parity_and_splitter_bookkeeping() {
        let u = walk3().measured_in(MeasurementBasis::LR);
        let ipt = ipt_joint(&u, L0, R0).unwrap();
        for ((p, q), prob) in ipt.coincidences.iter() {
            if p.m.rem_euclid(2) == 0 || q.m.rem_euclid(2) == 0 {
                assert!(prob < 1e-14);
            }
            assert_eq!(prob, ipt.coincidence(*q, *p));
        }
        let total = ipt.coincidences.total() + ipt.bunched.0 + ipt.bunched.1;
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn models_differ_and_photon_bound() {
        for basis in [MeasurementBasis::LR, MeasurementBasis::HV] {
            let u = walk3().measured_in(basis);
            let ipt = ipt_joint(&u, L0, R0).unwrap();
            let dpt = dpt_joint(&u, L0, R0).unwrap();
            assert!(tvd(&ipt.coincidences, &dpt.coincidences).unwrap() > 0.05);
            let modes: BTreeSet<ModeIndex> = ipt.support_modes().union(&dpt.support_modes()).copied().collect();
            let dscan = inequality_scan(&dpt.coincidences, &modes, Inequality::Photon);
            assert!(dscan.values().all(|&t| t <= 1e-15));
            let iscan = inequality_scan(&ipt.coincidences, &modes, Inequality::Photon);
            assert!(top_violation(&iscan).unwrap().1 > 0.0);
        }
    }

    #[test]
    fn labeled_route_reproduces_both_models() {
        let u = walk3().measured_in(MeasurementBasis::HV);
        let dpt = dpt_joint(&u, L0, R0).unwrap();
        let lab = labeled_joint(&u, L0, R0, true).unwrap();
        let ipt = ipt_joint(&u, L0, R0).unwrap();
        let same = labeled_joint(&u, L0, R0, false).unwrap();
        for ((k, a), (k2, b)) in dpt.coincidences.iter().zip(lab.coincidences.iter()) {
            assert_eq!(k, k2);
            assert!((a - b).abs() < 1e-12);
        }
        for ((_, a), (_, b)) in ipt.coincidences.iter().zip(same.coincidences.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hv_projection_preserves_norm() {
        let u = walk3();
        let hv = u.measured_in(MeasurementBasis::HV);
        assert!(hv.isometry_residual() < 1e-12);
        assert!(hv.outputs.iter().all(|o| matches!(o.pol, Polarization::H | Polarization::V)));
    }

    #[test]
    fn inequality_edge_cases() {
        let p = ModeIndex::new(Polarization::H, 1);
        let q = ModeIndex::new(Polarization::V, -1);
        let dist = ProbDist::sub_normalized(BTreeMap::from([((p, q), 0.2), ((q, p), 0.2)])).unwrap();
        assert_eq!(photon_inequality_t(&dist, p, q), -0.2);
        assert_eq!(classical_inequality_t(&dist, p, q), -0.2);
    }

    #[test]
    fn significance_scaling_and_zero() {
        let p = ModeIndex::new(Polarization::H, 1);
        let q = ModeIndex::new(Polarization::H, 3);
        let counts = CountRecord::new(BTreeMap::from([((p, p), 90), ((q, q), 40), ((p, q), 30)]), 1000).unwrap();
        let s1 = pair_significance(&counts, p, q, Inequality::Photon).unwrap();
        let s100 = pair_significance(&counts.scaled(100), p, q, Inequality::Photon).unwrap();
        assert!((s100.significance / s1.significance - 10.0).abs() < 1e-9);
        assert!((s1.t - 30.0 / 160.0).abs() < 1e-15);

        let zero_t = CountRecord::new(BTreeMap::from([((p, p), 4), ((q, q), 9), ((p, q), 6)]), 100).unwrap();
        assert_eq!(pair_significance(&zero_t, p, q, Inequality::Photon).unwrap().significance, 0.0);

        let empty = CountRecord::new(BTreeMap::from([((p, p), 0)]), 10).unwrap();
        assert!(matches!(
            pair_significance(&empty, p, q, Inequality::Photon),
            Err(Error::ZeroCount { .. })
        ));
    }

    #[test]
    fn synthetic_counts_show_violation() {
        let u = walk3().measured_in(MeasurementBasis::HV);
        let ipt = ipt_joint(&u, L0, R0).unwrap();
        let scan = inequality_scan(&ipt.coincidences, &ipt.support_modes(), Inequality::Photon);
        let ((p, q), _) = top_violation(&scan).unwrap();
        let counts = sample_counts(&ipt.coincidences, 10_000, 7).unwrap();
        let s = pair_significance(&counts, p, q, Inequality::Photon).unwrap();
        assert!(s.significance > 3.0, "{s:?}");
    }

    proptest! {
        #[test]
        fn dpt_never_violates(entries in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16)) {
            let modes: Vec<ModeIndex> = (0..4).map(|m| ModeIndex::new(Polarization::L, m)).collect();
            let u = SingleParticleUnitary::new(modes.clone(), modes.clone(), random_unitary(&entries, 4)).unwrap();
            let dpt = dpt_joint(&u, modes[0], modes[1]).unwrap();
            let set: BTreeSet<ModeIndex> = modes.iter().copied().collect();
            for t in inequality_scan(&dpt.coincidences, &set, Inequality::Photon).values() {
                prop_assert!(*t <= 1e-15);
            }
            let ipt = ipt_joint(&u, modes[0], modes[1]).unwrap();
            for ((p, q), prob) in ipt.coincidences.iter() {
                prop_assert_eq!(prob, ipt.coincidence(*q, *p));
            }
        }
    }
}
