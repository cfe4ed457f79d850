//! Spin-orbit photon states on a truncated OAM lattice.
//!
//! The coin is the photon polarization in the circular basis `{|L⟩, |R⟩}`
//! and the walker is the OAM index `m`. A [`SpinOrbitState`] stores one complex
//! amplitude per `(polarization, m)` pair inside a finite window
//! `[m_min, m_max]`; the q-plate shifts amplitude by `±2q` sites, and the
//! window edges are guarded so that truncation never silently loses norm.
//!
//! `|↑⟩` of the abstract coin is identified with `|L⟩` (moving up in `m`
//! through a q-plate); relabeling the coin mirrors every distribution.

mod optics;
mod state;
mod walk;

pub use optics::{
    retarder_matrix, Mat2, MomentumConvention, OpticalElement, StepSequence, QPLATE_RETARDANCE_TOL,
};
pub use state::{PolState, Polarization, SpinOrbitState, DEFAULT_EDGE_TOLERANCE};
pub use walk::{
    apply_element, apply_qplate, apply_step, apply_waveplate, coin_walker_entanglement,
    default_window, evolve, full_distribution, marginal_csv, marginals_csv, oam_marginal,
    reduced_coin_density,
};
