//! Signal-level ToA backend.
//!
//! A comb-patterned PRS grid is OFDM-modulated per cell, passed through a
//! geometric multipath channel seen through every transmit/receive beam pair,
//! and correlated against the regenerated burst. Each station's ToA is the
//! earliest first-peak delay among its beam pairs.
//!
//! Array orientation: a base station's boresight points at the centre of the
//! deployment bounds and the UE turns its boresight toward whichever station
//! it is measuring. Elements are isotropic. Channel delays are applied as
//! circular fractional shifts of the whole burst.

mod beam;
mod channel;
mod grid;
mod ofdm;
mod sweep;
mod waveform;

pub use beam::{beam_codebook, codebook_azimuths, Beam, UraConfig, SECTOR_HALF_WIDTH};
pub use channel::{build_paths, relative_azimuth, ChannelConfig, Path, PathSet};
pub use grid::{gen_prs_grid, PrsConfig, ResourceGrid};
pub use ofdm::{ofdm_modulate, OfdmModem};
pub use sweep::{
    simulate_toa_signal, sweep_and_estimate_toa, sweep_with_waveform, BeamSweepReport, PairMeasurement, PrsWaveform,
    SignalConfig,
};
pub use waveform::{read_waveform, write_waveform};
