//! Downlink TDOA positioning simulator that picks which base stations to
//! measure from by their geometric dilution of precision, over deployments
//! mixing LOS and NLOS links.
//!
//! The crate covers the full measurement-to-fix chain:
//!
//! - [`scenario`]: UMi and indoor-office deployments with LOS/NLOS links
//! - [`measurement`]: ToA simulation and reference-relative TDOA vectors
//! - [`gdop`]: TDOA design matrix and GDOP
//! - [`solver`]: least-squares fix by steepest descent
//! - [`selection`]: GDOP-ranked, nearest-first and random station selection
//! - [`prs`]: optional signal-level ToA backend (PRS, OFDM, beam sweeping)
//! - [`harness`]: Monte-Carlo experiments, error CDFs and CSV export

pub mod error;
pub mod gdop;
pub mod harness;
pub mod measurement;
pub mod prs;
pub mod rng;
pub mod scenario;
pub mod selection;
pub mod solver;

pub use error::{Error, Result};
pub use gdop::{design_matrix, gdop, per_reference_scores, DesignMatrix, GdopScore, Weights};
pub use harness::{run_experiment, ExperimentConfig, TrialReport};
pub use measurement::{
    range_residual_model, simulate_toa_abstract, tdoa_from_toa, Backend, NoiseModel, TdoaSystem, TdoaVector, ToaSet,
    SPEED_OF_LIGHT,
};
pub use prs::{simulate_toa_signal, SignalConfig};
pub use scenario::{
    distance, gen_ioo, gen_umi, BaseStation, BsId, IooParams, Point2, Rect, Scenario, ScenarioKind, UmiParams,
};
pub use selection::{select_distance, select_gdop, select_random, SelectionResult, Strategy};
pub use solver::{cost, gradient, solve, PositionEstimate, SolverConfig};
