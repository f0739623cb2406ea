//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("r_max must be positive, got {0}")]
    NonPositiveRmax(f64),

    #[error("point count {got} is below the minimum of {min}")]
    PointCountTooSmall { got: usize, min: usize },

    #[error("r = {r} lies outside the grid range [{lo}, {hi}]")]
    OutsideGrid { r: f64, lo: f64, hi: f64 },

    #[error("invalid quantum numbers: n = {n}, l = {l} (need n >= max(1, l+1))")]
    BadQuantumNumbers { n: u32, l: u32 },

    #[error("r must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error(
        "grid ends at r_max = {r_max} but the classically allowed region of \
         (n = {n}, l = {l}) extends to {r_tp:.1}; enlarge the grid"
    )]
    RmaxInsideAllowed {
        n: u32,
        l: u32,
        r_max: f64,
        r_tp: f64,
    },

    #[error(
        "logarithmic-derivative mismatch {mismatch:.3e} exceeds {tolerance:.1e} when matching \
         the two branches for n = {n}, l = {l} on a {points}-point grid with r_max = {r_max}"
    )]
    MatchingFailure {
        n: u32,
        l: u32,
        mismatch: f64,
        tolerance: f64,
        points: usize,
        r_max: f64,
    },

    #[error("delta_n must be positive, got {0}")]
    NonPositiveDeltaN(f64),

    #[error("n0 = {0} is too small for a Gaussian coefficient window")]
    N0TooSmall(u32),

    #[error("coefficient amplitudes are not unimodal about n0 in the chosen window")]
    NonUnimodalCoefficients,

    #[error("pulse duration tau_p must be positive, got {0}")]
    NonPositiveTauP(f64),

    #[error("no eigenstate supplied for n = {0} in the coefficient window")]
    MissingBasisState(u32),

    #[error("basis state (n = {n}, l = {l}) lives on a different grid than the field")]
    ForeignGrid { n: u32, l: u32 },

    #[error("turn-on mode requires the ground state in the basis")]
    MissingGroundState,

    #[error("energy must be negative for a bound orbit, got {0}")]
    UnboundEnergy(f64),

    #[error("no classically allowed region: E = {energy} lies below the potential minimum")]
    NoClassicalRegion { energy: f64 },

    #[error("r0 = {r0} is outside the classically allowed range [{r_min:.6}, {r_max:.6}]")]
    OutsideAllowedRegion { r0: f64, r_min: f64, r_max: f64 },

    #[error("time interval is empty: t0 = {t0}, t1 = {t1}")]
    EmptyTimeSpan { t0: f64, t1: f64 },

    #[error("sample times must be sorted, strictly increasing and inside [t0, t1]")]
    BadSampleTimes,

    #[error("integrator tolerances must be positive")]
    BadTolerances,

    #[error("evaluation at r = {r}, t = {t} is too close to a node (|psi| = {amplitude:.3e})")]
    NodeProximity { r: f64, t: f64, amplitude: f64 },

    #[error("trajectory and snapshot times differ: {t_trajectory} vs {t_snapshot}")]
    MismatchedTimes { t_trajectory: f64, t_snapshot: f64 },

    #[error("trajectory has no sample at t = {0}")]
    MissingSample(f64),

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("sample count must be at least 1")]
    EmptySampleRequest,

    #[error("snapshot carries no probability mass")]
    DegenerateDistribution,
}
