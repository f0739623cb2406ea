//! Time series for a single particle, shared by the Bohmian and classical
//! integrators and by the CSV emitters.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Bohm,
    Classical,
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: f64,
    pub v: f64,
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus {
    Completed,
    /// The controller demanded steps below the floor for too long; samples
    /// stop at the last good state.
    StepUnderflow {
        t: f64,
    },
    /// The particle left the grid; samples stop at the last good state.
    LeftGrid {
        t: f64,
        r: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub initial_r: f64,
    pub initial_t: f64,
    pub samples: Vec<TrajectorySample>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn max_r(&self) -> f64 {
        self.samples.iter().map(|s| s.r).fold(f64::MIN, f64::max)
    }

    /// The sample closest to t, if within tolerance.
    pub fn sample_at(&self, t: f64, tol: f64) -> Option<&TrajectorySample> {
        let i = self
            .samples
            .partition_point(|s| s.t < t)
            .min(self.samples.len().saturating_sub(1));
        let mut best: Option<&TrajectorySample> = None;
        for j in i.saturating_sub(1)..=i {
            if let Some(s) = self.samples.get(j) {
                if (s.t - t).abs() <= tol && best.is_none_or(|b| (s.t - t).abs() < (b.t - t).abs())
                {
                    best = Some(s);
                }
            }
        }
        best
    }

    /// First sample time at which r exceeds the threshold.
    pub fn first_time_above(&self, r_threshold: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.r > r_threshold).map(|s| s.t)
    }
}

/// Sample times must be sorted, strictly increasing and inside [t0, t1].
pub(crate) fn validate_sample_times(times: &[f64], t0: f64, t1: f64) -> Result<()> {
    let eps = 1e-9 * (1.0 + t1.abs().max(t0.abs()));
    for (i, &t) in times.iter().enumerate() {
        if t < t0 - eps || t > t1 + eps {
            return Err(Error::BadSampleTimes);
        }
        if i > 0 && t <= times[i - 1] {
            return Err(Error::BadSampleTimes);
        }
    }
    Ok(())
}

/// Evenly spaced sample times over [t0, t1], endpoints included.
pub fn linspace(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![t0];
    }
    (0..count)
        .map(|i| t0 + (t1 - t0) * i as f64 / (count - 1) as f64)
        .collect()
}
