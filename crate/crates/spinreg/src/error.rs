use thiserror::Error;

/// Errors shared across the simulator.
#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    #[error("invalid gate specification: {0}")]
    InvalidGate(String),

    #[error(
        "ambiguous labeling of level {label}: candidates {candidate_a} and {candidate_b} \
         (overlaps {overlap_a:.9} / {overlap_b:.9}, dominance {dominance_a:.9} / {dominance_b:.9})"
    )]
    AmbiguousLabeling {
        label: usize,
        candidate_a: usize,
        candidate_b: usize,
        overlap_a: f64,
        overlap_b: f64,
        dominance_a: f64,
        dominance_b: f64,
    },

    #[error("eigensolver failed to converge after {0} sweeps")]
    EigenConvergence(usize),

    #[error("electron Rabi correction is singular at delta_b = 0")]
    DegenerateField,

    #[error("state is already in the {0:?} frame")]
    FrameMismatch(crate::pulse::Frame),

    #[error(
        "integration step too coarse: delta_Iz changed by {rel_change:.3e} (> {tol:.1e}) \
         between step {step:.3e} s and its half"
    )]
    StepTooCoarse {
        step: f64,
        rel_change: f64,
        tol: f64,
    },
}
