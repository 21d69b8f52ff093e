pub mod analysis;
pub mod correlation;
pub mod error;
pub mod io;
pub mod params;
pub mod receiver;
pub mod spectrum;
pub mod waveform;
