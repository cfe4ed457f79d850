//! Transverse-mode optics behind the OAM encoding.
//!
//! Radial coordinates are dimensionless (`ρ = r/w₀`, `ζ = z/z_R`) unless a
//! function takes `w₀` and `λ` explicitly. Every mode is unit-normalized over
//! the transverse plane.

pub mod hologram;
pub mod modes;
pub mod quadrature;
pub mod radial;
pub mod special;

pub use hologram::{
    gaussian_walker, hologram_phase, make_hologram, make_walker_hologram, modulation_depth, sinc, sinc_inverse,
    walker_field, walker_target, HologramGrid, HologramMap,
};
pub use modes::{hygg_amplitude, lg_amplitude, lg_radial, ModeFamily, RadialMode};
pub use quadrature::QuadOptions;
pub use radial::{
    closed_form_coefficient, efficiency_correction, evolve_with_dephasing, gouy_step_dephasing, pupil_overlap,
    pupil_plane_action, qplate_output_index, qplate_radial_coefficients, radial_overlap, PupilReport,
    RadialExpansion,
};
