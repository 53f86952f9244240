//! Diagonal (classical) catalysts, their spectra, ratio probes, and the
//! assembly of mixed-state embezzlers from trace embezzlers.

pub mod catalyst;
pub mod contraction;
pub mod mixed;
pub mod ratio;
pub mod rational;
pub mod spectrum;

pub use catalyst::{approx_catalyst, approx_catalyst_error, DiagonalFamily, TraceEmbezzler};
pub use contraction::{contraction_trial, ContractionTrial};
pub use mixed::{mixed_from_trace_embezzlers, MixedEmbezzleConstruction};
pub use ratio::{ratio_probe, RatioProbeReport, RatioRow};
pub use rational::{rationalize_spectrum, Rational};
pub use spectrum::{ltw_spectrum_bruteforce, ltw_spectrum_closed_form, SpectrumRow, SpectrumTable};
