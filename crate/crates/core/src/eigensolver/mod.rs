//! Finite-difference spectra of reduced operators on truncated intervals.

mod grid;
mod ladder;
mod matrix;

pub use grid::{Grid, GridPolicy, DEFAULT_MIN_NODES, DEFAULT_RATIO};
pub use ladder::{
    essential_bottom, LadderConfig, LevelSpectrum, Outcome, SpectrumEstimate, StateClass, DEFAULT_DRIFT_TOL,
    DEFAULT_TRACKED, MASS_THRESHOLD,
};
pub use matrix::{discretize, Block, DiscretizedOperator, EIGEN_TOL};
