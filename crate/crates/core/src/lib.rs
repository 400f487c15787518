//! Single-lead ECG analysis built around the wavelet synchrosqueezing transform.
//!
//! The crate covers the whole chain used to evaluate beat detection and beat
//! classification on MIT-BIH style recordings:
//!
//! - [`wfdb`]: header / format 212 / annotation parsing, AAMI mapping, DS1/DS2 split
//! - [`dsp`]: Butterworth design, zero-phase filtering, moving averages, log-envelope preprocessing
//! - [`sst`]: bump-wavelet CWT, reassignment, squeezing, ridge tracking, reconstruction, blockwise phase
//! - [`rpeak`]: two-moving-average QRS detector, refractory filter, phase-based beat recovery, scoring
//! - [`features`]: per-beat phase and RR/amplitude features, Z-index
//! - [`ml`]: weighted one-vs-one RBF SVM (SMO), stratified CV, KNN, confusion metrics
//! - [`synth`]: adaptive non-harmonic signal generator used as ground truth in tests
//! - [`pipeline`]: batch commands driving the above over a record directory

pub mod dsp;
pub mod error;
pub mod features;
pub mod ml;
pub mod pipeline;
pub mod rpeak;
pub mod sst;
pub mod synth;
pub mod wfdb;

pub use error::{Error, Result};
