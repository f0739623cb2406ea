//! Radial Rydberg wavepacket dynamics in atomic units: hydrogenic bound
//! eigenstates at high n, Gaussian-coefficient wavepackets with their
//! autocorrelation observable, de Broglie-Bohm guidance trajectories driven
//! by the synthesized field, and classical radial Kepler motion as the
//! comparison baseline.
//!
//! Ensembles, time series and grid sweeps run data-parallel through rayon
//! when the default `parallel` feature is enabled; disabling it yields a
//! bitwise-identical sequential build.

// Validation sites use `!(x > 0.0)` so NaN inputs are rejected; the
// clippy rewrite `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod grid;
pub mod kepler;
pub mod numeric;
pub mod packet;
pub mod pilot;
pub mod trajectory;
pub mod units;

pub use error::{Error, Result};

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order, and per-item work never shares
/// mutable state, so results are identical either way.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Index-space variant of [`par_map`].
pub(crate) fn par_map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
