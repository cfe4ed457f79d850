use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::modes::lg_amplitude;
use crate::error::{Error, Result};

/// Bisection stops once the bracket is narrower than this.
pub const SINC_INVERSE_TOL: f64 = 1e-12;

/// `sin x / x`, one at the origin.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `1 − sinc x`, accurate near the origin.
fn one_minus_sinc(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-4 {
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        1.0 - x.sin() / x
    }
}

/// Inverse of `sinc` on the branch `[−π, 0]`, where it rises from 0 to 1.
pub fn sinc_inverse(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::validation("amplitude", format!("sinc⁻¹ needs a ∈ [0, 1], got {a}")));
    }
    let (mut lo, mut hi) = (-PI, 0.0);
    while hi - lo > SINC_INVERSE_TOL {
        let mid = 0.5 * (lo + hi);
        if one_minus_sinc(mid) > 1.0 - a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `M(A) = 1 + sinc⁻¹(A)/π ∈ [0, 1]`.
pub fn modulation_depth(a: f64) -> Result<f64> {
    Ok(1.0 + sinc_inverse(a)? / PI)
}

/// `x mod 2π` in `[0, 2π)`.
fn wrap_positive(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Hologram phase `F = M(A) · Mod(P + B − π M(A), 2π)` for one pixel.
pub fn hologram_phase(a: f64, p: f64, b: f64) -> Result<f64> {
    let m = modulation_depth(a)?;
    Ok(m * wrap_positive(p + b - PI * m))
}

/// Pixel grid and blazed grating. Lengths share one unit; `carrier` is in
/// cycles per unit length along `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HologramGrid {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch: f64,
    pub carrier: f64,
}

impl HologramGrid {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("grid", "width and height must be positive"));
        }
        if !(self.pixel_pitch > 0.0) || !self.pixel_pitch.is_finite() {
            return Err(Error::validation("pixel_pitch", "must be positive"));
        }
        if !self.carrier.is_finite() {
            return Err(Error::validation("carrier", "must be finite"));
        }
        Ok(())
    }

    /// Physical coordinates of pixel `(i, j)`, origin at the grid center,
    /// `y` pointing up from row 0 at the top.
    pub fn coordinates(&self, i: usize, j: usize) -> (f64, f64) {
        let x = (i as f64 - (self.width as f64 - 1.0) / 2.0) * self.pixel_pitch;
        let y = ((self.height as f64 - 1.0) / 2.0 - j as f64) * self.pixel_pitch;
        (x, y)
    }

    /// Blazed grating `B = 2π f x mod 2π`.
    pub fn grating(&self, x: f64) -> f64 {
        wrap_positive(TAU * self.carrier * x)
    }

    fn pixels(&self) -> usize {
        self.width * self.height
    }
}

/// Phase mask with values in `[0, 2π)`, row-major from the top row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HologramMap {
    pub grid: HologramGrid,
    pub phases: Vec<f64>,
}

impl HologramMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.phases[j * self.grid.width + i]
    }

    /// 8-bit level `⌊F/2π · 256⌋`, capped at 255.
    pub fn gray_level(phase: f64) -> u8 {
        ((phase / TAU * 256.0).floor() as i64).clamp(0, 255) as u8
    }

    /// Binary portable graymap. `comment` is written on one `#` line.
    pub fn to_pgm(&self, comment: &str) -> Vec<u8> {
        let comment = comment.replace(['\n', '\r'], " ");
        let mut out = format!("P5\n# {comment}\n{} {}\n255\n", self.grid.width, self.grid.height).into_bytes();
        out.extend(self.phases.iter().map(|&f| Self::gray_level(f)));
        out
    }

    /// `x,y,phase` rows with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,phase\n");
        for j in 0..self.grid.height {
            for i in 0..self.grid.width {
                out.push_str(&format!("{i},{j},{:?}\n", self.get(i, j)));
            }
        }
        out
    }

    /// Net number of `2π` windings of the mask sampled at nearest pixels on a
    /// circle of `radius` pixels about `center` (pixel coordinates),
    /// counterclockwise in the displayed orientation.
    pub fn winding(&self, center: (f64, f64), radius: f64, samples: usize) -> f64 {
        let sample = |t: f64| {
            let (s, c) = t.sin_cos();
            let i = (center.0 + radius * c).round().clamp(0.0, self.grid.width as f64 - 1.0) as usize;
            let j = (center.1 - radius * s).round().clamp(0.0, self.grid.height as f64 - 1.0) as usize;
            self.get(i, j)
        };
        let mut total = 0.0;
        let mut prev = sample(0.0);
        for n in 1..=samples {
            let next = sample(TAU * n as f64 / samples as f64);
            let d = next - prev;
            total += d - TAU * (d / TAU).round();
            prev = next;
        }
        total / TAU
    }
}

/// Synthesizes the mask for a target field given as amplitude `A ∈ [0, 1]`
/// and phase `P`, both row-major over `grid`.
pub fn make_hologram(amplitude: &[f64], phase: &[f64], grid: HologramGrid) -> Result<HologramMap> {
    grid.validate()?;
    if amplitude.len() != grid.pixels() || phase.len() != grid.pixels() {
        return Err(Error::validation(
            "target",
            format!("expected {} pixels, got {} and {}", grid.pixels(), amplitude.len(), phase.len()),
        ));
    }
    let phases = (0..grid.pixels())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % grid.width, idx / grid.width);
            let a = amplitude[idx];
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::AmplitudeRange { x: i, y: j, value: a });
            }
            let (x, _) = grid.coordinates(i, j);
            hologram_phase(a, phase[idx], grid.grating(x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HologramMap { grid, phases })
}

/// `Σ_m c_m LG_{0,m}(r, φ, 0)` with waist `w0` at physical point `(x, y)`.
pub fn walker_field(coefficients: &BTreeMap<i64, Complex64>, x: f64, y: f64, w0: f64) -> Complex64 {
    let (r, phi) = (x.hypot(y), y.atan2(x));
    coefficients
        .iter()
        .map(|(&m, &c)| c * lg_amplitude(0, m, r, phi, 0.0, w0, 1.0))
        .sum()
}

/// Amplitude and phase maps of [`walker_field`], scaled to `max A = 1`.
pub fn walker_target(
    coefficients: &BTreeMap<i64, Complex64>,
    grid: HologramGrid,
    w0: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    grid.validate()?;
    if !(w0 > 0.0) {
        return Err(Error::validation("waist", "must be positive"));
    }
    let field: Vec<Complex64> = (0..grid.pixels())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = grid.coordinates(idx % grid.width, idx / grid.width);
            walker_field(coefficients, x, y, w0)
        })
        .collect();
    let peak = field.iter().map(|e| e.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::validation("target", "field vanishes on the grid"));
    }
    let amplitude = field.iter().map(|e| (e.norm() / peak).min(1.0)).collect();
    let phase = field.iter().map(|e| e.arg()).collect();
    Ok((amplitude, phase))
}

/// Walker superposition `A₀ Σ_m e^{−i k₀ m} e^{−m²/2σ²} |m⟩` over `|m| ≤ half_width`.
pub fn gaussian_walker(sigma: f64, k0: f64, half_width: i64) -> Result<BTreeMap<i64, Complex64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::validation("sigma", "must be positive"));
    }
    let raw: BTreeMap<i64, Complex64> = (-half_width..=half_width)
        .map(|m| {
            let mf = m as f64;
            (m, Complex64::from_polar((-mf * mf / (2.0 * sigma * sigma)).exp(), -k0 * mf))
        })
        .collect();
    let norm = raw.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok(raw.into_iter().map(|(m, c)| (m, c / norm)).collect())
}

/// Hologram for a walker superposition of `p = 0` LG modes.
pub fn make_walker_hologram(
    coefficients: &BTreeMap<i64, Complex64>,
    grid: HologramGrid,
    w0: f64,
) -> Result<HologramMap> {
    let (amplitude, phase) = walker_target(coefficients, grid, w0)?;
    make_hologram(&amplitude, &phase, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(width: usize, height: usize, carrier: f64) -> HologramGrid {
        HologramGrid {
            width,
            height,
            pixel_pitch: 1.0,
            carrier,
        }
    }

    #[test]
    fn sinc_inverse_branch() {
        assert!(sinc_inverse(1.0).unwrap().abs() < 1e-10);
        assert!((sinc_inverse(0.0).unwrap() + PI).abs() < 1e-10);
        for a in [0.1, 0.37, 0.5, 0.9, 0.999] {
            let x = sinc_inverse(a).unwrap();
            assert!((-PI..=0.0).contains(&x));
            assert!((sinc(x) - a).abs() < 1e-10);
        }
        assert!(sinc_inverse(1.2).is_err());
    }

    #[test]
    fn uniform_targets() {
        let g = grid(6, 4, 0.0);
        let n = 24;
        let map = make_hologram(&vec![1.0; n], &vec![0.0; n], g).unwrap();
        assert!(map.phases.iter().all(|&f| (f - PI).abs() < 1e-9));
        let map = make_hologram(&vec![0.0; n], &vec![1.3; n], g).unwrap();
        assert!(map.phases.iter().all(|&f| f.abs() < 1e-9));
    }

    #[test]
    fn values_in_range() {
        let g = grid(32, 24, 0.13);
        let n = g.width * g.height;
        let amp: Vec<f64> = (0..n).map(|k| (k % 17) as f64 / 16.0).collect();
        let ph: Vec<f64> = (0..n).map(|k| -7.0 + 0.37 * k as f64).collect();
        let map = make_hologram(&amp, &ph, g).unwrap();
        assert!(map.phases.iter().all(|&f| (0.0..TAU).contains(&f)));
    }

    #[test]
    fn amplitude_range_error() {
        let g = grid(2, 2, 0.0);
        let err = make_hologram(&[0.2, 0.3, 1.01, 0.0], &[0.0; 4], g).unwrap_err();
        assert_eq!(err, Error::AmplitudeRange { x: 0, y: 1, value: 1.01 });
        assert!(make_hologram(&[0.2; 3], &[0.0; 4], g).is_err());
    }

    #[test]
    fn unit_amplitude_round_trip() {
        let g = grid(20, 10, 0.11);
        let n = g.width * g.height;
        let ph: Vec<f64> = (0..n).map(|k| (k as f64 * 0.731).sin() * 5.0).collect();
        let map = make_hologram(&vec![1.0; n], &ph, g).unwrap();
        for j in 0..g.height {
            for i in 0..g.width {
                let (x, _) = g.coordinates(i, j);
                let d = map.get(i, j) - (ph[j * g.width + i] + TAU * g.carrier * x);
                let off = (d + PI) - TAU * ((d + PI) / TAU).round();
                assert!(off.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fork_of_order_three() {
        let g = grid(160, 160, 0.08);
        let w0 = 30.0;
        let target: BTreeMap<i64, Complex64> = [(3, Complex64::new(1.0, 0.0))].into_iter().collect();
        let map = make_walker_hologram(&target, g, w0).unwrap();
        let ring = w0 * (1.5f64).sqrt();
        let center = (79.5, 79.5);
        let w = map.winding(center, ring, 4000);
        assert!((w - 3.0).abs() < 0.1, "{w}");
        let flat = make_walker_hologram(&[(0, Complex64::new(1.0, 0.0))].into_iter().collect(), g, w0).unwrap();
        assert!(flat.winding(center, 10.0, 4000).abs() < 0.1);
    }

    #[test]
    fn pgm_encoding() {
        let g = grid(3, 2, 0.0);
        let map = HologramMap {
            grid: g,
            phases: vec![0.0, PI, TAU - 1e-12, 0.5, 1.0, 6.0],
        };
        let bytes = map.to_pgm("test");
        let header = b"P5\n# test\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 128, 255, 20, 40, 244]);
        let csv = map.to_csv();
        assert!(csv.starts_with("x,y,phase\n0,0,0.0\n1,0,3.141592653589793\n"));
    }

    #[test]
    fn gaussian_walker_normalized() {
        let w = gaussian_walker(2.0, PI / 2.0, 12).unwrap();
        let n: f64 = w.values().map(|c| c.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
        assert!((w[&1].arg() + PI / 2.0).abs() < 1e-14);
    }
}
