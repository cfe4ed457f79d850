//! Momentum-space description of translation-invariant walks.
//!
//! A plane wave `|k⟩ = Σ_j e^{−ikj} |j·|2q|⟩` diagonalizes the lattice shift, so
//! one step acts on `|coin⟩ ⊗ |k⟩` through the 2×2 Bloch matrix `U_k`. Every
//! element has unit determinant, which places `U_k` in `SU(2)`. Quasi-energies
//! are read from the eigenvalues `e^{−iω}` of the gauged operator
//! `e^{iπ/2} U_k`; the gauge gives the step determinant −1 of an abstract
//! unbiased coin followed by a conditional shift, and fixes which band touches
//! `ω = 0`. Physical predictions (probabilities, group velocities, Stokes
//! vectors) do not depend on it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Mat2, MomentumConvention, PolState, StepSequence};

/// Phase multiplying `U_k` before quasi-energies are extracted.
pub const GAUGE_PHASE: f64 = FRAC_PI_2;

/// Eigenvalues closer than this on the unit circle count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Central-difference step for [`group_velocity_fd`].
pub const FD_STEP: f64 = 1e-5;

/// Largest distance of a Stokes point from the fitted plane still counted as planar.
pub const PLANARITY_TOL: f64 = 1e-6;

/// Grid size used by [`winding_number`].
pub const WINDING_GRID: usize = 4096;

/// Reference direction fixing the orientation of the chiral-circle normal.
const ORIENTATION_REFERENCE: [f64; 3] = [0.25, 0.5, 1.0];

/// Step of the path from `k = 0` used to carry band labels to an isolated `k`.
const LABEL_PATH_STEP: f64 = 0.02;

fn gauge() -> Complex64 {
    Complex64::from_polar(1.0, GAUGE_PHASE)
}

/// Maps an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Bloch matrix of one step at quasi-momentum `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochOperator {
    pub k: f64,
    /// Product of the element matrices, in `SU(2)`.
    pub matrix: Mat2,
    /// `d(matrix)/dk`.
    pub derivative: Mat2,
}

impl BlochOperator {
    /// `e^{iπ/2} U_k`, whose eigenvalues are `e^{−iω_s(k)}`.
    pub fn gauged(&self) -> Mat2 {
        self.matrix * gauge()
    }

    /// Unordered eigenpairs of the gauged operator.
    pub fn eigenpairs(&self) -> Result<[Eigenpair; 2]> {
        let [(l1, v1), (l2, v2)] = eig2(&self.gauged());
        let gap = (l1 - l2).norm();
        if gap < DEGENERACY_TOL {
            return Err(Error::DegenerateBand { k: self.k, gap });
        }
        Ok([Eigenpair::new(l1, v1), Eigenpair::new(l2, v2)])
    }
}

/// One quasi-energy with its gauge-fixed coin eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub eigenvalue: Complex64,
    /// `ω ∈ (−π, π]` with `eigenvalue = e^{−iω}`.
    pub omega: f64,
    pub state: PolState,
}

impl Eigenpair {
    fn new(eigenvalue: Complex64, v: [Complex64; 2]) -> Self {
        Self {
            eigenvalue,
            omega: wrap_angle(-eigenvalue.arg()),
            state: fix_gauge(v),
        }
    }
}

/// `⟨L|φ⟩` real and nonnegative, or `⟨R|φ⟩` where the first vanishes.
fn fix_gauge(v: [Complex64; 2]) -> PolState {
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    if v[0].norm() > 1e-12 * norm {
        let phase = v[0].conj() / v[0].norm();
        PolState::new(Complex64::new(v[0].norm() / norm, 0.0), v[1] * phase / norm)
    } else {
        PolState::new(zero, Complex64::new(v[1].norm() / norm, 0.0))
    }
}

/// Eigen-decomposition of a normal 2×2 matrix in closed form.
pub(crate) fn eig2(m: &Mat2) -> [(Complex64, [Complex64; 2]); 2] {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_trace = (a + d) / 2.0;
    let disc = (half_trace * half_trace - (a * d - b * c)).sqrt();
    let lambdas = [half_trace + disc, half_trace - disc];
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if b.norm() <= 1e-15 * scale && c.norm() <= 1e-15 * scale {
        return [(a, [one, zero]), (d, [zero, one])];
    }
    lambdas.map(|lambda| {
        let u = [b, lambda - a];
        let w = [lambda - d, c];
        let nu = u[0].norm_sqr() + u[1].norm_sqr();
        let nw = w[0].norm_sqr() + w[1].norm_sqr();
        (lambda, if nu >= nw { u } else { w })
    })
}

/// Bloch matrix of `seq` at `k`.
pub fn bloch_operator(seq: &StepSequence, k: f64, convention: MomentumConvention) -> BlochOperator {
    BlochOperator {
        k,
        matrix: seq.bloch_matrix(k, convention),
        derivative: seq.bloch_derivative(k, convention),
    }
}

/// `dω/dk = Re(i e^{iω} ⟨φ| d(e^{iπ/2}U_k)/dk |φ⟩)` for a normalized eigenvector.
fn hellmann_feynman(op: &BlochOperator, pair: &Eigenpair) -> f64 {
    let v = Vector2::new(pair.state.l, pair.state.r);
    let x = v.dotc(&(op.derivative * gauge() * v));
    (Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, pair.omega) * x).re
}

/// Orders `current` so that each entry continues the matching entry of `previous`.
fn match_bands(previous: &[Eigenpair; 2], current: [Eigenpair; 2]) -> [Eigenpair; 2] {
    let keep = (current[0].eigenvalue - previous[0].eigenvalue).norm()
        + (current[1].eigenvalue - previous[1].eigenvalue).norm();
    let swap = (current[1].eigenvalue - previous[0].eigenvalue).norm()
        + (current[0].eigenvalue - previous[1].eigenvalue).norm();
    if swap < keep {
        [current[1], current[0]]
    } else {
        current
    }
}

/// Band 1 then band 2; band 2 is the one with the smaller `|ω|`.
fn label_at_origin(pairs: [Eigenpair; 2]) -> [Eigenpair; 2] {
    if pairs[0].omega.abs() < pairs[1].omega.abs() {
        [pairs[1], pairs[0]]
    } else {
        pairs
    }
}

/// Labels the eigenpairs on an ascending grid by continuity from the point
/// nearest `k = 0`.
fn label_grid(k_grid: &[f64], raw: Vec<[Eigenpair; 2]>) -> Vec<[Eigenpair; 2]> {
    let start = k_grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .expect("nonempty grid");
    let mut out = raw;
    out[start] = label_at_origin(out[start]);
    for i in start + 1..out.len() {
        out[i] = match_bands(&out[i - 1], out[i]);
    }
    for i in (0..start).rev() {
        out[i] = match_bands(&out[i + 1], out[i]);
    }
    out
}

/// Band data on a quasi-momentum grid. Index 0 is band 1, index 1 is band 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStructure {
    pub k_grid: Vec<f64>,
    pub omega: [Vec<f64>; 2],
    pub velocity: [Vec<f64>; 2],
    pub eigenstates: [Vec<PolState>; 2],
    pub stokes: [Vec<[f64; 3]>; 2],
}

impl BandStructure {
    /// Rows `k,omega1,omega2,V1,V2,s1x,s1y,s1z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,omega1,omega2,V1,V2,s1x,s1y,s1z\n");
        for i in 0..self.k_grid.len() {
            let s = self.stokes[0][i];
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
                self.k_grid[i],
                self.omega[0][i],
                self.omega[1][i],
                self.velocity[0][i],
                self.velocity[1][i],
                s[0],
                s[1],
                s[2]
            ));
        }
        out
    }
}

/// `n` points `k_j = −π + 2π(j+1)/n` covering `(−π, π]`.
pub fn brillouin_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| -PI + TAU * (j + 1) as f64 / n as f64).collect()
}

fn check_grid(k_grid: &[f64]) -> Result<()> {
    if k_grid.is_empty() {
        return Err(Error::validation("k_grid", "must not be empty"));
    }
    if k_grid.iter().any(|k| !(-PI..=PI + 1e-12).contains(k)) {
        return Err(Error::validation("k_grid", "values must lie in (−π, π]"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("k_grid", "values must be strictly increasing"));
    }
    Ok(())
}

/// Quasi-energies, eigenstates, Stokes vectors and group velocities on an
/// ascending grid inside `(−π, π]`.
pub fn dispersion(seq: &StepSequence, k_grid: &[f64], convention: MomentumConvention) -> Result<BandStructure> {
    check_grid(k_grid)?;
    let ops: Vec<BlochOperator> = k_grid
        .par_iter()
        .map(|&k| bloch_operator(seq, k, convention))
        .collect();
    let raw = ops
        .par_iter()
        .map(BlochOperator::eigenpairs)
        .collect::<Result<Vec<_>>>()?;
    let labeled = label_grid(k_grid, raw);

    let mut bands = BandStructure {
        k_grid: k_grid.to_vec(),
        omega: Default::default(),
        velocity: Default::default(),
        eigenstates: Default::default(),
        stokes: Default::default(),
    };
    for (op, pairs) in ops.iter().zip(&labeled) {
        for s in 0..2 {
            bands.omega[s].push(pairs[s].omega);
            bands.velocity[s].push(hellmann_feynman(op, &pairs[s]));
            bands.eigenstates[s].push(pairs[s].state);
            bands.stokes[s].push(pairs[s].state.stokes());
        }
    }
    Ok(bands)
}

/// Labeled eigenpairs at an arbitrary `k`, carried along a path from `k = 0`.
pub fn bands_at(seq: &StepSequence, k: f64, convention: MomentumConvention) -> Result<[Eigenpair; 2]> {
    let steps = ((k.abs() / LABEL_PATH_STEP).ceil() as usize).max(1);
    let mut pairs = label_at_origin(bloch_operator(seq, 0.0, convention).eigenpairs()?);
    for i in 1..=steps {
        let kk = k * i as f64 / steps as f64;
        pairs = match_bands(&pairs, bloch_operator(seq, kk, convention).eigenpairs()?);
    }
    Ok(pairs)
}

/// `(V₁, V₂) = dω_s/dk` in lattice units per step, from the eigenvector
/// expectation of `dU_k/dk`.
pub fn group_velocity(seq: &StepSequence, k: f64, convention: MomentumConvention) -> Result<(f64, f64)> {
    let pairs = bands_at(seq, k, convention)?;
    let op = bloch_operator(seq, k, convention);
    Ok((hellmann_feynman(&op, &pairs[0]), hellmann_feynman(&op, &pairs[1])))
}

/// `(V₁, V₂)` by a central difference of step `h`.
pub fn group_velocity_fd(
    seq: &StepSequence,
    k: f64,
    h: f64,
    convention: MomentumConvention,
) -> Result<(f64, f64)> {
    let center = bands_at(seq, k, convention)?;
    let plus = match_bands(&center, bloch_operator(seq, k + h, convention).eigenpairs()?);
    let minus = match_bands(&center, bloch_operator(seq, k - h, convention).eigenpairs()?);
    let v = |s: usize| wrap_angle(plus[s].omega - minus[s].omega) / (2.0 * h);
    Ok((v(0), v(1)))
}

/// Stokes trajectory of band 1 and the great-circle plane through it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiralCircle {
    pub k_grid: Vec<f64>,
    pub stokes: Vec<[f64; 3]>,
    /// Unit normal of the least-squares plane through the origin, with
    /// positive component along `(0.25, 0.5, 1)`.
    pub normal: [f64; 3],
    /// Largest `|s · normal|` over the trajectory.
    pub max_distance: f64,
}

impl ChiralCircle {
    /// Signed number of turns of the trajectory about the normal, before rounding.
    pub fn raw_winding(&self) -> f64 {
        let n = Vector3::from(self.normal);
        let trial = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = (trial - n * n.dot(&trial)).normalize();
        let e2 = n.cross(&e1);
        let angles: Vec<f64> = self
            .stokes
            .iter()
            .map(|s| {
                let v = Vector3::from(*s);
                v.dot(&e2).atan2(v.dot(&e1))
            })
            .collect();
        let total: f64 = (0..angles.len())
            .map(|i| wrap_angle(angles[(i + 1) % angles.len()] - angles[i]))
            .sum();
        total / TAU
    }
}

/// Fits the chiral great circle to the band-1 Stokes vectors.
pub fn eigenstate_circle(
    seq: &StepSequence,
    k_grid: &[f64],
    convention: MomentumConvention,
) -> Result<ChiralCircle> {
    let bands = dispersion(seq, k_grid, convention)?;
    let stokes = bands.stokes[0].clone();
    let scatter = stokes.iter().fold(Matrix3::<f64>::zeros(), |acc, s| {
        let v = Vector3::from(*s);
        acc + v * v.transpose()
    });
    let eig = SymmetricEigen::new(scatter);
    let idx = eig.eigenvalues.imin();
    let mut n: Vector3<f64> = eig.eigenvectors.column(idx).into_owned().normalize();
    if n.dot(&Vector3::from(ORIENTATION_REFERENCE)) < 0.0 {
        n = -n;
    }
    let max_distance = stokes
        .iter()
        .map(|s| Vector3::from(*s).dot(&n).abs())
        .fold(0.0, f64::max);
    if max_distance > PLANARITY_TOL {
        return Err(Error::NotPlanar { distance: max_distance });
    }
    Ok(ChiralCircle {
        k_grid: bands.k_grid,
        stokes,
        normal: [n.x, n.y, n.z],
        max_distance,
    })
}

/// Winding of the band-1 eigenstate over the Brillouin zone on a grid of `points`.
pub fn winding_number_on(seq: &StepSequence, points: usize, convention: MomentumConvention) -> Result<i64> {
    let circle = eigenstate_circle(seq, &brillouin_grid(points), convention)?;
    Ok(circle.raw_winding().round() as i64)
}

/// Winding of the band-1 eigenstate on a 4096-point grid.
pub fn winding_number(seq: &StepSequence, convention: MomentumConvention) -> Result<i64> {
    winding_number_on(seq, WINDING_GRID, convention)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::OpticalElement;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    const STD: MomentumConvention = MomentumConvention::Standard;

    fn preset() -> StepSequence {
        StepSequence::wavepacket(PI).unwrap()
    }

    fn closed_omega2(k: f64) -> f64 {
        (k.sin() * FRAC_1_SQRT_2).asin()
    }

    fn closed_velocity2(k: f64) -> f64 {
        k.cos() * FRAC_1_SQRT_2 / (1.0 - 0.5 * k.sin().powi(2)).sqrt()
    }

    fn max_abs(m: &Mat2) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn zero_retardance_is_k_independent() {
        let seq = StepSequence::wavepacket(0.0).unwrap();
        let u0 = bloch_operator(&seq, 0.0, STD).matrix;
        for k in [-2.0, 0.5, PI] {
            assert!(max_abs(&(bloch_operator(&seq, k, STD).matrix - u0)) < 1e-15);
        }
    }

    #[test]
    fn origin_is_plain_coin_product() {
        let seq = StepSequence::standard_paper(1.2).unwrap();
        let product = seq.elements().iter().fold(Mat2::identity(), |acc, el| {
            let m = match *el {
                OpticalElement::WavePlate { retardance, axis_angle } => {
                    crate::lattice::retarder_matrix(retardance, axis_angle)
                }
                OpticalElement::QPlate { retardance, axis_offset, .. } => {
                    crate::lattice::retarder_matrix(retardance, axis_offset)
                }
            };
            m * acc
        });
        assert!(max_abs(&(bloch_operator(&seq, 0.0, STD).matrix - product)) < 1e-15);
    }

    #[test]
    fn brillouin_periodicity() {
        let seq = StepSequence::standard_paper(1.1).unwrap();
        for k in [-3.0, -1.0, 0.0, 2.5] {
            let d = bloch_operator(&seq, k + TAU, STD).matrix - bloch_operator(&seq, k, STD).matrix;
            assert!(max_abs(&d) < 1e-14);
        }
    }

    #[test]
    fn closed_form_dispersion() {
        let grid = brillouin_grid(1001);
        let bands = dispersion(&preset(), &grid, STD).unwrap();
        for (i, &k) in grid.iter().enumerate() {
            let w2 = closed_omega2(k);
            assert!(wrap_angle(bands.omega[1][i] - w2).abs() < 1e-10, "k={k}");
            assert!(wrap_angle(bands.omega[0][i] - (PI - w2)).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn spectral_examples() {
        let bands = dispersion(&preset(), &[0.0, FRAC_PI_2], STD).unwrap();
        assert!(bands.omega[1][0].abs() < 1e-12);
        assert!((bands.omega[0][0] - PI).abs() < 1e-12);
        assert!((bands.omega[1][1] - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn eigen_residuals() {
        let seq = StepSequence::standard_paper(1.57).unwrap();
        for &k in &brillouin_grid(257) {
            let op = bloch_operator(&seq, k, STD);
            let u = op.gauged();
            assert!(max_abs(&(u.adjoint() * u - Mat2::identity())) < 1e-12);
            for pair in op.eigenpairs().unwrap() {
                let v = Vector2::new(pair.state.l, pair.state.r);
                let res = u * v - v * Complex64::from_polar(1.0, -pair.omega);
                assert!(res.norm() < 1e-10);
                assert!(pair.state.l.im == 0.0 && pair.state.l.re >= 0.0);
            }
        }
    }

    #[test]
    fn eig2_diagonal_and_defective_safe() {
        let d = Mat2::new(
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
        );
        let [(l1, v1), (l2, v2)] = eig2(&d);
        assert_eq!((l1, v1[0]), (d[(0, 0)], Complex64::new(1.0, 0.0)));
        assert_eq!((l2, v2[1]), (d[(1, 1)], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn degenerate_bands_reported() {
        let seq = StepSequence::new(vec![OpticalElement::qplate(0.5, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            dispersion(&seq, &[0.0], STD),
            Err(Error::DegenerateBand { .. })
        ));
    }

    #[test]
    fn group_velocity_examples() {
        let seq = preset();
        for k in [FRAC_PI_2, -FRAC_PI_2] {
            let (v1, v2) = group_velocity(&seq, k, STD).unwrap();
            assert!(v1.abs() < 1e-9 && v2.abs() < 1e-9);
        }
        let (v1, v2) = group_velocity(&seq, 0.0, STD).unwrap();
        assert!((v2 - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((v1 + FRAC_1_SQRT_2).abs() < 1e-12);
        let (m1, m2) = group_velocity(&seq, 0.0, MomentumConvention::Mirrored).unwrap();
        assert!((m1 + v1).abs() < 1e-12 && (m2 + v2).abs() < 1e-12);
    }

    #[test]
    fn band_velocities_match_closed_form() {
        let grid = brillouin_grid(1001);
        let bands = dispersion(&preset(), &grid, STD).unwrap();
        let mut vmax: f64 = 0.0;
        for (i, &k) in grid.iter().enumerate() {
            let v2 = closed_velocity2(k);
            assert!((bands.velocity[1][i] - v2).abs() < 1e-10);
            assert!((bands.velocity[0][i] + bands.velocity[1][i]).abs() < 1e-9);
            vmax = vmax.max(bands.velocity[0][i].abs());
        }
        assert!((vmax - FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn finite_difference_matches_analytic() {
        for seq in [preset(), StepSequence::standard_paper(1.57).unwrap()] {
            for k in [-2.9, -1.0, 0.0, 0.4, 2.2, 3.0] {
                let a = group_velocity(&seq, k, STD).unwrap();
                let f = group_velocity_fd(&seq, k, FD_STEP, STD).unwrap();
                assert!((a.0 - f.0).abs() < 1e-6 && (a.1 - f.1).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn chiral_circle_of_preset() {
        let circle = eigenstate_circle(&preset(), &brillouin_grid(WINDING_GRID), STD).unwrap();
        assert!(circle.max_distance < 1e-8);
        let expected = [-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
        for i in 0..3 {
            assert!((circle.normal[i] - expected[i]).abs() < 1e-10);
        }
        assert_eq!(winding_number(&preset(), STD).unwrap(), 1);
    }

    #[test]
    fn winding_stable_under_refinement() {
        for delta in [PI, 2.5, 1.57] {
            let seq = StepSequence::wavepacket(delta).unwrap();
            assert_eq!(
                winding_number_on(&seq, 512, STD).unwrap(),
                winding_number_on(&seq, 4096, STD).unwrap()
            );
        }
    }

    #[test]
    fn trivial_winding() {
        let seq = StepSequence::new(vec![
            OpticalElement::qwp(FRAC_PI_4),
            OpticalElement::qplate(0.5, 0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(winding_number(&seq, STD).unwrap(), 0);
    }

    #[test]
    fn broken_chiral_symmetry_is_not_planar() {
        let seq = StepSequence::new(vec![
            OpticalElement::waveplate(0.7, 0.2),
            OpticalElement::qplate(0.5, 2.0, 0.0),
            OpticalElement::waveplate(1.3, 1.0),
            OpticalElement::qplate(0.5, 1.0, 0.4),
        ])
        .unwrap();
        assert!(matches!(
            eigenstate_circle(&seq, &brillouin_grid(512), STD),
            Err(Error::NotPlanar { .. })
        ));
    }

    #[test]
    fn band_csv_header() {
        let csv = dispersion(&preset(), &[0.0], STD).unwrap().to_csv();
        assert!(csv.starts_with("k,omega1,omega2,V1,V2,s1x,s1y,s1z\n0.0,"));
    }

    proptest! {
        #[test]
        fn bloch_matrix_is_special_unitary(delta in 0.0..PI, k in -PI..PI, t in -PI..PI) {
            let seq = StepSequence::new(vec![
                OpticalElement::qwp(t),
                OpticalElement::qplate(-1.0, delta, 0.3),
                OpticalElement::hwp(0.1),
            ]).unwrap();
            let u = bloch_operator(&seq, k, STD).matrix;
            prop_assert!(max_abs(&(u.adjoint() * u - Mat2::identity())) < 1e-12);
            prop_assert!((u.determinant() - 1.0).norm() < 1e-12);
        }
    }
}
