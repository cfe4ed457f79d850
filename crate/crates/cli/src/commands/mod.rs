//! One module per subcommand. Each config type rejects unknown keys, fills
//! every default on deserialization and is serialized back as the resolved
//! config once the run has settled any remaining choices (window, preset).

pub mod bands;
pub mod hologram;
pub mod radial;
pub mod twophoton;
pub mod walk;
pub mod wavepacket;
