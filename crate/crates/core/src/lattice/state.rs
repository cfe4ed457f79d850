use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest amplitude magnitude tolerated on the outermost window sites.
pub const DEFAULT_EDGE_TOLERANCE: f64 = 1e-10;

const NORM_TOL: f64 = 1e-12;

/// Polarization label. `L`/`R` form the circular coin basis; `H`/`V` only
/// appear as measurement labels on two-photon outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    L,
    R,
    H,
    V,
}

impl Polarization {
    pub(crate) fn circular_index(self) -> usize {
        match self {
            Polarization::L => 0,
            Polarization::R => 1,
            other => panic!("{other:?} is not a circular polarization"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::L => "L",
            Polarization::R => "R",
            Polarization::H => "H",
            Polarization::V => "V",
        }
    }
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coin (polarization) amplitudes on `{|L⟩, |R⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolState {
    pub l: Complex64,
    pub r: Complex64,
}

impl PolState {
    pub const fn new(l: Complex64, r: Complex64) -> Self {
        Self { l, r }
    }

    pub const fn left() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub const fn right() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Rescales `(l, r)` to unit norm.
    pub fn normalized(l: Complex64, r: Complex64) -> Result<Self> {
        let norm = (l.norm_sqr() + r.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validation("coin", "amplitudes must not vanish"));
        }
        Ok(Self::new(l / norm, r / norm))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.l.norm_sqr() + self.r.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn component(&self, pol: Polarization) -> Complex64 {
        match pol.circular_index() {
            0 => self.l,
            _ => self.r,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PolState) -> Complex64 {
        self.l.conj() * other.l + self.r.conj() * other.r
    }

    /// Stokes vector `(2 Re(l̄r), 2 Im(l̄r), |l|² − |r|²)`; the third axis
    /// points to `|L⟩` on the Poincaré sphere.
    pub fn stokes(&self) -> [f64; 3] {
        let c = self.l.conj() * self.r;
        [2.0 * c.re, 2.0 * c.im, self.l.norm_sqr() - self.r.norm_sqr()]
    }

    pub(crate) fn to_array(self) -> [Complex64; 2] {
        [self.l, self.r]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    m_min: i64,
    m_max: i64,
    amplitudes: Vec<Complex64>,
}

/// Amplitudes over `(polarization, m)` on the window `[m_min, m_max]`.
///
/// Storage is polarization-major: every `L` amplitude in ascending `m`, then
/// every `R` amplitude. The JSON form is
/// `{"m_min":…, "m_max":…, "amplitudes":[[re,im], …]}` in the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct SpinOrbitState {
    m_min: i64,
    m_max: i64,
    amplitudes: Vec<Complex64>,
    #[serde(skip)]
    edge_tolerance: f64,
}

impl TryFrom<RawState> for SpinOrbitState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        Self::from_amplitudes(raw.m_min, raw.m_max, raw.amplitudes)
    }
}

fn check_window(window: (i64, i64)) -> Result<usize> {
    let (m_min, m_max) = window;
    if m_min > m_max {
        return Err(Error::validation(
            "window",
            format!("m_min {m_min} exceeds m_max {m_max}"),
        ));
    }
    Ok((m_max - m_min + 1) as usize)
}

impl SpinOrbitState {
    /// All-zero state on a window.
    pub fn zeros(window: (i64, i64)) -> Result<Self> {
        let width = check_window(window)?;
        Ok(Self {
            m_min: window.0,
            m_max: window.1,
            amplitudes: vec![Complex64::new(0.0, 0.0); 2 * width],
            edge_tolerance: DEFAULT_EDGE_TOLERANCE,
        })
    }

    /// `coin ⊗ |m0⟩`.
    pub fn localized(m0: i64, coin: PolState, window: (i64, i64)) -> Result<Self> {
        if !coin.is_normalized() {
            return Err(Error::validation(
                "coin",
                format!("norm² is {}, expected 1", coin.norm_sqr()),
            ));
        }
        let mut state = Self::zeros(window)?;
        if m0 < state.m_min || m0 > state.m_max {
            return Err(Error::Window {
                m: m0,
                m_min: state.m_min,
                m_max: state.m_max,
            });
        }
        let [l, r] = coin.to_array();
        *state.amp_mut(Polarization::L, m0) = l;
        *state.amp_mut(Polarization::R, m0) = r;
        Ok(state)
    }

    /// `coin ⊗ Σ_m walker[m − m_min] |m⟩`.
    pub fn product(coin: PolState, m_min: i64, walker: &[Complex64]) -> Result<Self> {
        if walker.is_empty() {
            return Err(Error::validation("walker", "amplitudes must not be empty"));
        }
        let m_max = m_min + walker.len() as i64 - 1;
        let mut amplitudes = Vec::with_capacity(2 * walker.len());
        amplitudes.extend(walker.iter().map(|w| coin.l * w));
        amplitudes.extend(walker.iter().map(|w| coin.r * w));
        Self::from_amplitudes(m_min, m_max, amplitudes)
    }

    /// Wraps pol-major amplitudes; the length must be `2 (m_max − m_min + 1)`.
    pub fn from_amplitudes(m_min: i64, m_max: i64, amplitudes: Vec<Complex64>) -> Result<Self> {
        let width = check_window((m_min, m_max))?;
        if amplitudes.len() != 2 * width {
            return Err(Error::validation(
                "amplitudes",
                format!("expected {} entries, got {}", 2 * width, amplitudes.len()),
            ));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::validation("amplitudes", "entries must be finite"));
        }
        Ok(Self {
            m_min,
            m_max,
            amplitudes,
            edge_tolerance: DEFAULT_EDGE_TOLERANCE,
        })
    }

    pub fn with_edge_tolerance(mut self, tol: f64) -> Self {
        self.edge_tolerance = tol;
        self
    }

    pub fn edge_tolerance(&self) -> f64 {
        self.edge_tolerance
    }

    pub fn m_min(&self) -> i64 {
        self.m_min
    }

    pub fn m_max(&self) -> i64 {
        self.m_max
    }

    pub fn window(&self) -> (i64, i64) {
        (self.m_min, self.m_max)
    }

    /// Number of OAM sites in the window.
    pub fn width(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + Clone {
        self.m_min..=self.m_max
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitudes of one circular component in ascending `m`.
    pub fn component(&self, pol: Polarization) -> &[Complex64] {
        let w = self.width();
        let i = pol.circular_index();
        &self.amplitudes[i * w..(i + 1) * w]
    }

    pub(crate) fn components_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        let w = self.width();
        self.amplitudes.split_at_mut(w)
    }

    /// Amplitude at `(pol, m)`, zero outside the window.
    pub fn amp(&self, pol: Polarization, m: i64) -> Complex64 {
        if m < self.m_min || m > self.m_max {
            return Complex64::new(0.0, 0.0);
        }
        self.component(pol)[(m - self.m_min) as usize]
    }

    /// Mutable amplitude at `(pol, m)`; panics outside the window.
    pub fn amp_mut(&mut self, pol: Polarization, m: i64) -> &mut Complex64 {
        assert!(m >= self.m_min && m <= self.m_max, "m = {m} outside window");
        let idx = pol.circular_index() * self.width() + (m - self.m_min) as usize;
        &mut self.amplitudes[idx]
    }

    pub fn coin_at(&self, m: i64) -> PolState {
        PolState::new(self.amp(Polarization::L, m), self.amp(Polarization::R, m))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::validation("state", "cannot normalize the zero state"));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// `⟨self|other⟩` over the union of both windows.
    pub fn inner(&self, other: &SpinOrbitState) -> Complex64 {
        let lo = self.m_min.max(other.m_min);
        let hi = self.m_max.min(other.m_max);
        let mut acc = Complex64::new(0.0, 0.0);
        for pol in [Polarization::L, Polarization::R] {
            for m in lo..=hi {
                acc += self.amp(pol, m).conj() * other.amp(pol, m);
            }
        }
        acc
    }

    /// Walker amplitudes `⟨coin|ψ⟩` in ascending `m`.
    pub fn project_coin(&self, coin: &PolState) -> Vec<Complex64> {
        self.component(Polarization::L)
            .iter()
            .zip(self.component(Polarization::R))
            .map(|(l, r)| coin.l.conj() * l + coin.r.conj() * r)
            .collect()
    }

    /// Same amplitudes on a window that contains the current one.
    pub fn embedded(&self, window: (i64, i64)) -> Result<Self> {
        if window.0 > self.m_min || window.1 < self.m_max {
            return Err(Error::validation(
                "window",
                format!(
                    "[{}, {}] does not contain [{}, {}]",
                    window.0, window.1, self.m_min, self.m_max
                ),
            ));
        }
        let mut out = Self::zeros(window)?.with_edge_tolerance(self.edge_tolerance);
        for pol in [Polarization::L, Polarization::R] {
            for m in self.sites() {
                *out.amp_mut(pol, m) = self.amp(pol, m);
            }
        }
        Ok(out)
    }

    /// Fails when either outermost site carries amplitude above the edge tolerance.
    pub fn check_edges(&self) -> Result<()> {
        for m in [self.m_min, self.m_max] {
            for pol in [Polarization::L, Polarization::R] {
                let magnitude = self.amp(pol, m).norm();
                if magnitude > self.edge_tolerance {
                    return Err(Error::Truncation {
                        m,
                        magnitude,
                        limit: self.edge_tolerance,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    #[test]
    fn localized_delta() {
        let s = SpinOrbitState::localized(0, PolState::left(), (-5, 5)).unwrap();
        assert_eq!(s.amp(Polarization::L, 0), Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.width(), 11);
    }

    #[test]
    fn localized_superposition_coin() {
        let coin = PolState::normalized(Complex64::new(1.0, 0.0), I).unwrap();
        let s = SpinOrbitState::localized(0, coin, (-4, 4)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amp(Polarization::L, 0) - h).norm() < 1e-15);
        assert!((s.amp(Polarization::R, 0) - I * h).norm() < 1e-15);
    }

    #[test]
    fn localized_outside_window() {
        let err = SpinOrbitState::localized(6, PolState::right(), (-5, 5)).unwrap_err();
        assert_eq!(
            err,
            Error::Window {
                m: 6,
                m_min: -5,
                m_max: 5
            }
        );
    }

    #[test]
    fn unnormalized_coin_rejected() {
        let coin = PolState::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(
            SpinOrbitState::localized(0, coin, (-1, 1)),
            Err(Error::Validation { field: "coin", .. })
        ));
    }

    #[test]
    fn json_layout_is_pol_major() {
        let mut s = SpinOrbitState::zeros((0, 1)).unwrap();
        *s.amp_mut(Polarization::R, 0) = Complex64::new(0.6, 0.0);
        *s.amp_mut(Polarization::L, 1) = Complex64::new(0.0, 0.8);
        let json = s.to_json();
        assert_eq!(
            json,
            r#"{"m_min":0,"m_max":1,"amplitudes":[[0.0,0.0],[0.0,0.8],[0.6,0.0],[0.0,0.0]]}"#
        );
        let back: SpinOrbitState = serde_json::from_str(&json).unwrap();
        assert_eq!(back.amplitudes(), s.amplitudes());
        assert_eq!(back.edge_tolerance(), DEFAULT_EDGE_TOLERANCE);
    }

    #[test]
    fn json_rejects_wrong_length_and_unknown_keys() {
        assert!(serde_json::from_str::<SpinOrbitState>(
            r#"{"m_min":0,"m_max":1,"amplitudes":[[1.0,0.0]]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<SpinOrbitState>(
            r#"{"m_min":0,"m_max":0,"amplitudes":[[1.0,0.0],[0.0,0.0]],"extra":1}"#
        )
        .is_err());
    }

    #[test]
    fn stokes_of_basis_states() {
        assert_eq!(PolState::left().stokes(), [0.0, 0.0, 1.0]);
        assert_eq!(PolState::right().stokes(), [0.0, 0.0, -1.0]);
        let h = PolState::normalized(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        let s = h.stokes();
        assert!((s[0] - 1.0).abs() < 1e-15 && s[1].abs() < 1e-15 && s[2].abs() < 1e-15);
    }
}
