use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2×2 complex matrix on the circular basis `(|L⟩, |R⟩)`; column `j` is the
/// image of basis state `j`.
pub type Mat2 = Matrix2<Complex64>;

/// Slack allowed above π (and below 0) for q-plate retardance, absorbing the
/// rounding of expressions such as `2.0 * FRAC_PI_2`.
pub const QPLATE_RETARDANCE_TOL: f64 = 4.0 * f64::EPSILON;

const HALF_INTEGER_TOL: f64 = 1e-12;

/// Jones unitary of a linear retarder with retardance `delta` and fast axis
/// `theta`:
///
/// `W = cos(δ/2) I − i sin(δ/2) (e^{2iθ} |R⟩⟨L| + e^{−2iθ} |L⟩⟨R|)`.
///
/// Every retarder has unit determinant, and `W(π, 0)|L⟩ = −i|R⟩`.
pub fn retarder_matrix(delta: f64, theta: f64) -> Mat2 {
    let c = Complex64::new((delta / 2.0).cos(), 0.0);
    let s = (delta / 2.0).sin();
    let down = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, 2.0 * theta);
    let up = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -2.0 * theta);
    Mat2::new(c, up, down, c)
}

/// Sign convention tying the lattice shift to quasi-momentum.
///
/// `Standard` maps a shift of `+|2q|` to the phase `e^{+ik}`, which makes the
/// lower band of the wavepacket preset start at `V₂(0) = +1/√2`. `Mirrored`
/// uses `e^{−ik}` and flips the sign of every group velocity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentumConvention {
    #[default]
    Standard,
    Mirrored,
}

impl MomentumConvention {
    pub fn sign(self) -> f64 {
        match self {
            MomentumConvention::Standard => 1.0,
            MomentumConvention::Mirrored => -1.0,
        }
    }
}

/// One optical element acting on a single photon. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum OpticalElement {
    /// Homogeneous retarder; acts on polarization only.
    WavePlate { retardance: f64, axis_angle: f64 },
    /// Patterned retarder with local axis `α(φ) = qφ + α₀`; flips circular
    /// polarization while shifting OAM by `±2q`.
    QPlate {
        charge: f64,
        retardance: f64,
        axis_offset: f64,
    },
}

impl OpticalElement {
    pub fn waveplate(retardance: f64, axis_angle: f64) -> Self {
        OpticalElement::WavePlate {
            retardance,
            axis_angle,
        }
    }

    pub fn qwp(axis_angle: f64) -> Self {
        Self::waveplate(FRAC_PI_2, axis_angle)
    }

    pub fn hwp(axis_angle: f64) -> Self {
        Self::waveplate(PI, axis_angle)
    }

    pub fn qplate(charge: f64, retardance: f64, axis_offset: f64) -> Self {
        OpticalElement::QPlate {
            charge,
            retardance,
            axis_offset,
        }
    }

    /// Checks finiteness, the integer OAM shift and the retardance range.
    pub fn validate(&self) -> Result<()> {
        match *self {
            OpticalElement::WavePlate {
                retardance,
                axis_angle,
            } => {
                if !retardance.is_finite() || !axis_angle.is_finite() {
                    return Err(Error::validation("waveplate", "angles must be finite"));
                }
                Ok(())
            }
            OpticalElement::QPlate {
                charge,
                retardance,
                axis_offset,
            } => {
                shift_of(charge)?;
                check_qplate_retardance(retardance)?;
                if !axis_offset.is_finite() {
                    return Err(Error::validation("axis_offset", "must be finite"));
                }
                Ok(())
            }
        }
    }

    /// OAM shift `2q` for a q-plate, `None` for a wave plate.
    pub fn oam_shift(&self) -> Option<i64> {
        match *self {
            OpticalElement::WavePlate { .. } => None,
            OpticalElement::QPlate { charge, .. } => Some((2.0 * charge).round() as i64),
        }
    }

    /// Momentum-space matrix with the lattice shift replaced by `e^{±ik}`.
    pub fn bloch_matrix(&self, k: f64, convention: MomentumConvention) -> Mat2 {
        match *self {
            OpticalElement::WavePlate {
                retardance,
                axis_angle,
            } => retarder_matrix(retardance, axis_angle),
            OpticalElement::QPlate {
                charge,
                retardance,
                axis_offset,
            } => retarder_matrix(
                retardance,
                axis_offset + 0.5 * charge.signum() * convention.sign() * k,
            ),
        }
    }

    /// `d/dk` of [`Self::bloch_matrix`].
    pub fn bloch_derivative(&self, k: f64, convention: MomentumConvention) -> Mat2 {
        match *self {
            OpticalElement::WavePlate { .. } => Mat2::zeros(),
            OpticalElement::QPlate { charge, .. } => {
                let u = self.bloch_matrix(k, convention);
                let rate = charge.signum() * convention.sign();
                let z = Complex64::new(0.0, 0.0);
                Mat2::new(
                    z,
                    Complex64::new(0.0, -rate) * u[(0, 1)],
                    Complex64::new(0.0, rate) * u[(1, 0)],
                    z,
                )
            }
        }
    }
}

pub(crate) fn shift_of(charge: f64) -> Result<i64> {
    let two_q = 2.0 * charge;
    if !two_q.is_finite() || (two_q - two_q.round()).abs() > HALF_INTEGER_TOL || two_q.round() == 0.0 {
        return Err(Error::validation(
            "charge",
            format!("2q must be a nonzero integer, got q = {charge}"),
        ));
    }
    Ok(two_q.round() as i64)
}

pub(crate) fn check_qplate_retardance(delta: f64) -> Result<()> {
    if !(-QPLATE_RETARDANCE_TOL..=PI + QPLATE_RETARDANCE_TOL).contains(&delta) {
        return Err(Error::validation(
            "retardance",
            format!("q-plate retardance {delta} lies outside [0, π]"),
        ));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    elements: Vec<OpticalElement>,
}

/// Ordered optical elements forming one walk step; the first element acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct StepSequence {
    elements: Vec<OpticalElement>,
}

impl TryFrom<RawSequence> for StepSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        Self::new(raw.elements)
    }
}

impl StepSequence {
    /// Validates each element; all q-plates must share `|2q|`.
    pub fn new(elements: Vec<OpticalElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::validation("sequence", "must contain at least one element"));
        }
        let mut spacing = None;
        for el in &elements {
            el.validate()?;
            if let Some(shift) = el.oam_shift() {
                match spacing {
                    None => spacing = Some(shift.abs()),
                    Some(s) if s != shift.abs() => {
                        return Err(Error::validation(
                            "sequence",
                            format!("q-plates disagree on |2q|: {s} and {}", shift.abs()),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Self { elements })
    }

    /// QWP@45°, q-plate (q = 1/2, δ, α₀ = 0), HWP@0°.
    pub fn standard_paper(delta: f64) -> Result<Self> {
        Self::new(vec![
            OpticalElement::qwp(FRAC_PI_4),
            OpticalElement::qplate(0.5, delta, 0.0),
            OpticalElement::hwp(0.0),
        ])
    }

    /// QWP@45°, q-plate (q = 1/2, δ, α₀ = 0).
    pub fn wavepacket(delta: f64) -> Result<Self> {
        Self::new(vec![
            OpticalElement::qwp(FRAC_PI_4),
            OpticalElement::qplate(0.5, delta, 0.0),
        ])
    }

    /// Looks up `"standard-paper"` or `"wavepacket"`.
    pub fn preset(name: &str, delta: f64) -> Result<Self> {
        match name {
            "standard-paper" => Self::standard_paper(delta),
            "wavepacket" => Self::wavepacket(delta),
            other => Err(Error::validation(
                "preset",
                format!("unknown preset {other:?}; expected \"standard-paper\" or \"wavepacket\""),
            )),
        }
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    /// Lattice spacing `|2q|`; 1 when the sequence has no q-plate.
    pub fn spacing(&self) -> i64 {
        self.elements
            .iter()
            .find_map(OpticalElement::oam_shift)
            .map_or(1, i64::abs)
    }

    /// Bloch matrix of one full step, `U_k = E_last ⋯ E_first`; in `SU(2)`.
    pub fn bloch_matrix(&self, k: f64, convention: MomentumConvention) -> Mat2 {
        self.elements
            .iter()
            .fold(Mat2::identity(), |acc, el| el.bloch_matrix(k, convention) * acc)
    }

    /// `dU_k/dk` by the product rule.
    pub fn bloch_derivative(&self, k: f64, convention: MomentumConvention) -> Mat2 {
        let mats: Vec<Mat2> = self
            .elements
            .iter()
            .map(|el| el.bloch_matrix(k, convention))
            .collect();
        let mut total = Mat2::zeros();
        for (i, el) in self.elements.iter().enumerate() {
            if matches!(el, OpticalElement::WavePlate { .. }) {
                continue;
            }
            let mut term = Mat2::identity();
            for (j, m) in mats.iter().enumerate() {
                let factor = if i == j {
                    el.bloch_derivative(k, convention)
                } else {
                    *m
                };
                term = factor * term;
            }
            total += term;
        }
        total
    }
}
