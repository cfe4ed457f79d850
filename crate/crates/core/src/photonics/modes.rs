use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::special::{gamma, hyp1f1_scaled, laguerre, ln_gamma};
use crate::error::{Error, Result};

/// Transverse mode family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeFamily {
    #[serde(rename = "LG")]
    LaguerreGauss,
    #[serde(rename = "HyGG")]
    HypergeometricGauss,
}

/// A transverse mode. LG needs integer `p ≥ 0`; HyGG accepts real `p` with
/// `p + |m| > −1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMode {
    pub family: ModeFamily,
    pub p: f64,
    pub m: i64,
    pub w0: f64,
    pub wavelength: f64,
}

impl RadialMode {
    pub fn lg(p: u32, m: i64, w0: f64, wavelength: f64) -> Self {
        Self {
            family: ModeFamily::LaguerreGauss,
            p: p as f64,
            m,
            w0,
            wavelength,
        }
    }

    pub fn hygg(p: f64, m: i64, w0: f64, wavelength: f64) -> Self {
        Self {
            family: ModeFamily::HypergeometricGauss,
            p,
            m,
            w0,
            wavelength,
        }
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.w0 * self.w0 / self.wavelength
    }

    /// Field at `(r, φ, z)` in physical units.
    pub fn amplitude(&self, r: f64, phi: f64, z: f64) -> Result<Complex64> {
        if !(self.w0 > 0.0 && self.wavelength > 0.0) {
            return Err(Error::validation("mode", "w0 and wavelength must be positive"));
        }
        match self.family {
            ModeFamily::LaguerreGauss => {
                if self.p < 0.0 || self.p.fract() != 0.0 {
                    return Err(Error::validation("p", format!("LG needs integer p ≥ 0, got {}", self.p)));
                }
                Ok(lg_amplitude(self.p as u32, self.m, r, phi, z, self.w0, self.wavelength))
            }
            ModeFamily::HypergeometricGauss => {
                let radial = hygg_amplitude(self.p, self.m, r / self.w0, z / self.rayleigh_range())?;
                Ok(radial / self.w0 * Complex64::from_polar(1.0, self.m as f64 * phi))
            }
        }
    }
}

fn lg_norm(p: u32, am: f64, w: f64) -> f64 {
    let log = (am + 1.0) * 2f64.ln() + ln_gamma(p as f64 + 1.0) - ln_gamma(p as f64 + am + 1.0);
    (log.exp() / (PI * w * w)).sqrt()
}

/// Laguerre–Gauss field `LG_{p,m}(r, φ, z)`, unit-normalized over the plane
/// and carrying the Gouy factor `e^{−i(2p+|m|+1) arctan(z/z_R)}`.
/// The wavefront radius is `R(z) = z(1 + (z_R/z)²)`, flat at `z = 0`.
pub fn lg_amplitude(p: u32, m: i64, r: f64, phi: f64, z: f64, w0: f64, wavelength: f64) -> Complex64 {
    let am = m.unsigned_abs() as f64;
    let zr = PI * w0 * w0 / wavelength;
    let zeta = z / zr;
    let w = w0 * (1.0 + zeta * zeta).sqrt();
    let x = r / w;
    let magnitude = lg_norm(p, am, w) * x.powf(am) * (-x * x).exp() * laguerre(p, am, 2.0 * x * x);
    // πr²/(λR) with R = z(1 + (z_R/z)²).
    let curvature = PI * r * r * z / (wavelength * (z * z + zr * zr));
    let gouy = (2.0 * p as f64 + am + 1.0) * zeta.atan();
    Complex64::from_polar(magnitude, curvature + m as f64 * phi - gouy)
}

/// Radial LG profile in the dimensionless coordinates `ρ = r/w₀`, `ζ = z/z_R`
/// (azimuthal factor dropped).
pub fn lg_radial(p: u32, m: i64, rho: f64, zeta: f64) -> Complex64 {
    lg_amplitude(p, m, rho, 0.0, zeta, 1.0, PI)
}

/// Amplitude normalizing `ρ^{n} e^{−ρ²}` over the plane.
fn pupil_norm(n: f64) -> f64 {
    (2f64.powf(n + 1.0) / (PI * gamma(n + 1.0))).sqrt()
}

/// Radial HyGG profile `HyGG_{p,m}(ρ, ζ)`, unit-normalized over the plane.
///
/// At `ζ = 0` the pupil-plane limit `N ρ^{p+|m|} e^{−ρ²}` is returned with a
/// real positive normalization `N`.
pub fn hygg_amplitude(p: f64, m: i64, rho: f64, zeta: f64) -> Result<Complex64> {
    let am = m.unsigned_abs() as f64;
    if !(p + am > -1.0) || !(1.0 + am + p / 2.0 > 0.0) {
        return Err(Error::validation("p", format!("HyGG needs p + |m| > −1, got p = {p}, m = {m}")));
    }
    if !(zeta >= 0.0) || !(rho >= 0.0) {
        return Err(Error::validation("zeta", "HyGG needs ρ ≥ 0 and ζ ≥ 0"));
    }
    if zeta == 0.0 {
        if rho == 0.0 && p + am == 0.0 {
            return Ok(Complex64::new(pupil_norm(0.0), 0.0));
        }
        let value = pupil_norm(p + am) * rho.powf(p + am) * (-rho * rho).exp();
        return Ok(Complex64::new(value, 0.0));
    }
    let i = Complex64::i();
    let zi = Complex64::new(zeta, 1.0);
    let prefactor = i.powf(am + 1.0)
        * (2f64.powf(p + am + 1.0) / (PI * gamma(p + am + 1.0))).sqrt()
        * (gamma(1.0 + am + p / 2.0) / gamma(am + 1.0))
        * zeta.powf(p / 2.0)
        * zi.powf(-(1.0 + am + p / 2.0))
        * rho.powf(am);
    let rho2 = rho * rho;
    let z = rho2 / (zeta * zi);
    let gauss = -i * rho2 / zi;
    Ok(prefactor * hyp1f1_scaled(-p / 2.0, 1.0 + am, z, gauss)?)
}
