//! De Broglie-Bohm guidance dynamics on a synthesized radial field: the
//! velocity field v = Im(ψ̄ ∂_r ψ)/|ψ|², the quantum potential
//! Q = -(∂²_r ρ)/(2ρ), adaptive trajectory integration with node guards,
//! position sampling from ρ² and the equivariance diagnostic.
//!
//! The equation of motion is brutally sensitive near quasi-nodes of the
//! field, where the guidance quotient diverges. Below a density floor the
//! velocity is clamped to one grid cell per near-node step and the step
//! controller is capped so a trajectory may stall against a node but can
//! never jump across it.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::Eigenstate;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::numeric::{dopri5_step, hermite};
use crate::packet::{SuperposedField, WavefieldSnapshot};
use crate::trajectory::{
    validate_sample_times, Trajectory, TrajectoryKind, TrajectorySample, TrajectoryStatus,
};
use crate::{par_map, par_map_range};

/// A complex radial field the guidance law can differentiate.
pub trait WaveField: Sync {
    fn grid(&self) -> &Arc<RadialGrid>;

    /// ψ and ∂ψ/∂r at (r, t); r must lie inside the grid.
    fn psi_dpsi(&self, r: f64, t: f64) -> (Complex64, Complex64);

    /// |ψ|² at grid node i; overridden where samples are available directly.
    fn rho2_at_node(&self, i: usize, t: f64) -> f64 {
        let (psi, _) = self.psi_dpsi(self.grid().nodes()[i], t);
        psi.norm_sqr()
    }
}

impl WaveField for SuperposedField {
    fn grid(&self) -> &Arc<RadialGrid> {
        SuperposedField::grid(self)
    }

    fn psi_dpsi(&self, r: f64, t: f64) -> (Complex64, Complex64) {
        self.synthesize(r, t)
            .expect("guidance evaluations stay inside the grid")
    }

    fn rho2_at_node(&self, i: usize, t: f64) -> f64 {
        // Exact node samples, no interpolation.
        SuperposedField::rho2_at_node(self, i, t)
    }
}

/// A single stationary eigenstate as a guidance field; its velocity field
/// vanishes identically.
#[derive(Debug, Clone)]
pub struct StationaryField {
    state: Arc<Eigenstate>,
}

impl StationaryField {
    pub fn new(state: Arc<Eigenstate>) -> Self {
        StationaryField { state }
    }
}

impl WaveField for StationaryField {
    fn grid(&self) -> &Arc<RadialGrid> {
        self.state.grid()
    }

    fn psi_dpsi(&self, r: f64, t: f64) -> (Complex64, Complex64) {
        let (u, du) = self
            .state
            .evaluate(r)
            .expect("guidance evaluations stay inside the grid");
        let (sin, cos) = (-self.state.energy() * t).sin_cos();
        let phase = Complex64::new(cos, sin);
        (phase * u, phase * du)
    }

    fn rho2_at_node(&self, i: usize, _t: f64) -> f64 {
        let u = self.state.samples()[i];
        u * u
    }
}

/// Step-control and node-guard parameters for guidance integration.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// Absolute tolerance on r, in au.
    pub abs_tol: f64,
    /// Largest step, in au of time.
    pub max_step: f64,
    /// Step cap while the density floor is tripped; also sets the clamped
    /// velocity v_cap = (local grid spacing)/max_step_near_node.
    pub max_step_near_node: f64,
    /// Node-guard threshold as a fraction of the current max of ρ².
    pub density_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 2000.0,
            max_step_near_node: 20.0,
            density_floor: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.max_step_near_node > 0.0
            && self.density_floor > 0.0
        {
            Ok(())
        } else {
            Err(Error::BadTolerances)
        }
    }
}

/// Guidance velocity plus the node-guard flag that tells the integrator to
/// shrink its step.
#[derive(Debug, Clone, Copy)]
pub struct VelocitySample {
    pub v: f64,
    pub guarded: bool,
}

/// Lattice of max_r ρ²(r, t) over the working time window; the node-guard
/// floor is relative to this scale because the packet's overall amplitude
/// varies by orders of magnitude across r and t.
#[derive(Debug, Clone)]
struct DensityScale {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

const DENSITY_LATTICE_DT: f64 = 1000.0;

impl DensityScale {
    fn build<F: WaveField>(field: &F, t_lo: f64, t_hi: f64) -> Self {
        let span = (t_hi - t_lo).max(0.0);
        let count = ((span / DENSITY_LATTICE_DT).ceil() as usize + 2).clamp(2, 8193);
        let dt = (span / (count - 1) as f64).max(1e-300);
        let n_nodes = field.grid().len();
        let values = par_map_range(count, |j| {
            let t = t_lo + dt * j as f64;
            let mut max = 0.0_f64;
            for i in 0..n_nodes {
                max = max.max(field.rho2_at_node(i, t));
            }
            max
        });
        DensityScale {
            t0: t_lo,
            dt,
            values,
        }
    }

    fn max_rho2(&self, t: f64) -> f64 {
        let x = ((t - self.t0) / self.dt).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (x as usize).min(self.values.len() - 2);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

const MIN_STEP: f64 = 1e-6;
const UNDERFLOW_PATIENCE: usize = 1000;
const SAFETY: f64 = 0.9;
const EQUIVARIANCE_BINS: usize = 50;

/// Guidance-law evaluator bound to a field, with the density scale
/// precomputed over a working time window.
pub struct Guidance<'a, F: WaveField> {
    field: &'a F,
    config: IntegratorConfig,
    scale: DensityScale,
}

impl<'a, F: WaveField> Guidance<'a, F> {
    /// `t_lo..t_hi` must cover every time the guidance will be evaluated at.
    pub fn new(field: &'a F, config: IntegratorConfig, t_lo: f64, t_hi: f64) -> Result<Self> {
        config.validate()?;
        if !(t_hi >= t_lo) {
            return Err(Error::EmptyTimeSpan { t0: t_lo, t1: t_hi });
        }
        Ok(Guidance {
            field,
            config,
            scale: DensityScale::build(field, t_lo, t_hi),
        })
    }

    pub fn field(&self) -> &F {
        self.field
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    /// v = Im(ψ̄ ∂_r ψ)/|ψ|², clamped to ±v_cap below the density floor.
    pub fn velocity(&self, r: f64, t: f64) -> VelocitySample {
        let grid = self.field.grid();
        let r_eval = r.clamp(grid.first_node(), grid.r_max());
        let (psi, dpsi) = self.field.psi_dpsi(r_eval, t);
        let rho2 = psi.norm_sqr();
        let flux = (psi.conj() * dpsi).im;
        let floor = self.config.density_floor * self.scale.max_rho2(t);
        if rho2 <= floor {
            let v_cap = grid.spacing_at(r_eval) / self.config.max_step_near_node;
            let v = if flux == 0.0 {
                0.0
            } else {
                flux.signum() * v_cap
            };
            VelocitySample { v, guarded: true }
        } else {
            VelocitySample {
                v: flux / rho2,
                guarded: false,
            }
        }
    }

    /// Q = -(∂²_r ρ)/(2ρ) with ρ = |ψ|, from a uniform 5-point stencil of
    /// the local grid spacing. Defined away from quasi-nodes.
    pub fn quantum_potential(&self, r: f64, t: f64) -> Result<f64> {
        let grid = self.field.grid();
        if !grid.contains(r) {
            return Err(Error::OutsideGrid {
                r,
                lo: grid.first_node(),
                hi: grid.r_max(),
            });
        }
        let (psi0, _) = self.field.psi_dpsi(r, t);
        let rho0 = psi0.norm();
        let max_amp = self.scale.max_rho2(t).sqrt();
        if rho0 <= 0.01 * max_amp {
            return Err(Error::NodeProximity {
                r,
                t,
                amplitude: rho0,
            });
        }
        let h = grid.spacing_at(r);
        if r - 2.0 * h < grid.first_node() || r + 2.0 * h > grid.r_max() {
            return Err(Error::OutsideGrid {
                r,
                lo: grid.first_node() + 2.0 * h,
                hi: grid.r_max() - 2.0 * h,
            });
        }
        let rho = |x: f64| self.field.psi_dpsi(x, t).0.norm();
        let d2 = (-rho(r - 2.0 * h) + 16.0 * rho(r - h) - 30.0 * rho0 + 16.0 * rho(r + h)
            - rho(r + 2.0 * h))
            / (12.0 * h * h);
        Ok(-d2 / (2.0 * rho0))
    }

    /// Distance from r to the nearest local minimum of ρ²(·, t) along the
    /// grid, floored at half a cell.
    fn distance_to_density_minimum(&self, r: f64, t: f64) -> f64 {
        let grid = self.field.grid();
        let half_cell = 0.5 * grid.spacing_at(r);
        let i0 = match grid.cell_of(r) {
            Ok(i) => i,
            Err(_) => return half_cell,
        };
        let n = grid.len();
        let max_walk = 512usize;
        let mut best = f64::INFINITY;
        for (start, dir) in [(i0, -1i64), (i0 + 1, 1i64)] {
            let mut k = start as i64;
            let mut prev = self.field.rho2_at_node(k as usize, t);
            for _ in 0..max_walk {
                let next = k + dir;
                if next < 0 || next as usize >= n {
                    break;
                }
                let val = self.field.rho2_at_node(next as usize, t);
                if val > prev {
                    break;
                }
                prev = val;
                k = next;
            }
            best = best.min((grid.nodes()[k as usize] - r).abs());
        }
        best.max(half_cell)
    }

    /// Integrate dr/dt = v(r, t) from (r0, t0) to t1 with an embedded
    /// Dormand-Prince 4/5 pair under PI step control, dense cubic-Hermite
    /// output at the requested sample times, and node guards.
    pub fn integrate(&self, r0: f64, t0: f64, t1: f64, sample_times: &[f64]) -> Result<Trajectory> {
        let grid = self.field.grid();
        if !grid.contains(r0) {
            return Err(Error::OutsideGrid {
                r: r0,
                lo: grid.first_node(),
                hi: grid.r_max(),
            });
        }
        if !(t1 > t0) {
            return Err(Error::EmptyTimeSpan { t0, t1 });
        }
        validate_sample_times(sample_times, t0, t1)?;

        let time_eps = 1e-9 * (1.0 + t1.abs());
        let mut samples = Vec::with_capacity(sample_times.len());
        let mut si = 0usize;

        let mut t = t0;
        let mut r = r0;
        let vs = self.velocity(r, t);
        let mut k1 = vs.v;
        let mut guarded = vs.guarded;

        while si < sample_times.len() && sample_times[si] <= t0 + time_eps {
            samples.push(TrajectorySample {
                t: t0,
                r: r0,
                v: k1,
            });
            si += 1;
        }

        let rhs = |tt: f64, rr: f64| {
            let s = self.velocity(rr, tt);
            (s.v, s.guarded)
        };

        let mut h = self.config.max_step.min((t1 - t0) / 64.0).max(MIN_STEP);
        let mut err_prev: f64 = 1e-4;
        let mut underflow_run = 0usize;
        let mut status = TrajectoryStatus::Completed;

        while t < t1 - time_eps {
            if guarded {
                let d = self.distance_to_density_minimum(r, t);
                let vmag = k1.abs().max(1e-300);
                h = h.min(self.config.max_step_near_node).min(d / (2.0 * vmag));
            }
            h = h.min(self.config.max_step).min(t1 - t);
            if h < MIN_STEP {
                underflow_run += 1;
                if underflow_run >= UNDERFLOW_PATIENCE {
                    status = TrajectoryStatus::StepUnderflow { t };
                    break;
                }
            } else {
                underflow_run = 0;
            }

            let step = dopri5_step(rhs, t, r, h, k1);
            let tol = self.config.abs_tol + self.config.rel_tol * r.abs().max(step.y_new.abs());
            let err_norm = (step.error / tol).max(1e-16);

            if err_norm <= 1.0 {
                let t_new = t + h;
                while si < sample_times.len() && sample_times[si] <= t_new + time_eps {
                    let ts = sample_times[si].min(t_new);
                    let rs = hermite(ts, t, r, k1, t_new, step.y_new, step.k_end)
                        .clamp(grid.first_node(), grid.r_max());
                    let v = self.velocity(rs, ts).v;
                    samples.push(TrajectorySample { t: ts, r: rs, v });
                    si += 1;
                }
                t = t_new;
                r = step.y_new;
                k1 = step.k_end;
                guarded = step.guarded;
                if r < grid.first_node() || r > grid.r_max() {
                    status = TrajectoryStatus::LeftGrid { t, r };
                    break;
                }
                let fac = SAFETY * err_norm.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                h *= fac.clamp(0.2, 5.0);
                err_prev = err_norm.max(1e-4);
            } else {
                h *= (SAFETY * err_norm.powf(-0.2)).clamp(0.1, 0.9);
                guarded = guarded || step.guarded;
            }
        }

        if status == TrajectoryStatus::Completed {
            while si < sample_times.len() && sample_times[si] <= t1 + time_eps {
                let v = self.velocity(r, t1).v;
                samples.push(TrajectorySample { t: t1, r, v });
                si += 1;
            }
        }

        Ok(Trajectory {
            kind: TrajectoryKind::Bohm,
            initial_r: r0,
            initial_t: t0,
            samples,
            status,
        })
    }

    /// One trajectory per initial position (sorted internally), integrated
    /// independently and in parallel. Carries per-member status and the
    /// non-crossing check at every common output time.
    pub fn run_ensemble(
        &self,
        positions: &[f64],
        t0: f64,
        t1: f64,
        sample_times: &[f64],
    ) -> Result<EnsembleRun> {
        if positions.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let grid = self.field.grid();
        for &r0 in positions {
            if !grid.contains(r0) {
                return Err(Error::OutsideGrid {
                    r: r0,
                    lo: grid.first_node(),
                    hi: grid.r_max(),
                });
            }
        }
        let mut sorted = positions.to_vec();
        sorted.sort_by(f64::total_cmp);

        let trajectories: Vec<Trajectory> = par_map(&sorted, |&r0| {
            self.integrate(r0, t0, t1, sample_times)
                .expect("inputs validated for every ensemble member")
        })
        .into_iter()
        .collect();

        let mut ordering_preserved = true;
        let mut first_violation = None;
        'outer: for j in 0..sample_times.len() {
            let mut prev: Option<(usize, f64)> = None;
            for (idx, traj) in trajectories.iter().enumerate() {
                let Some(s) = traj.samples.get(j) else {
                    continue;
                };
                if let Some((_, r_prev)) = prev {
                    if s.r <= r_prev {
                        ordering_preserved = false;
                        first_violation = Some(OrderingViolation {
                            t: s.t,
                            lower_member: idx - 1,
                        });
                        break 'outer;
                    }
                }
                prev = Some((idx, s.r));
            }
        }

        Ok(EnsembleRun {
            trajectories,
            ordering_preserved,
            first_violation,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrderingViolation {
    pub t: f64,
    pub lower_member: usize,
}

#[derive(Debug)]
pub struct EnsembleRun {
    pub trajectories: Vec<Trajectory>,
    pub ordering_preserved: bool,
    pub first_violation: Option<OrderingViolation>,
}

/// Stratified inverse-CDF positions from ρ² of a snapshot: u_i = (i + η_i)/N
/// with η_i from a ChaCha8 stream, deterministic for a fixed seed. Output is
/// ascending.
pub fn sample_positions(snapshot: &WavefieldSnapshot, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptySampleRequest);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let u = (i as f64 + rng.gen::<f64>()) / count as f64;
        out.push(snapshot.quantile(u)?);
    }
    Ok(out)
}

/// Total-variation distance between the ensemble's positions at time t and
/// ρ²(·, t), over 50 equal-probability bins of the reference snapshot.
pub fn equivariance_distance(
    trajectories: &[Trajectory],
    snapshot: &WavefieldSnapshot,
    t: f64,
) -> Result<f64> {
    if trajectories.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let tol = 1e-6 * (1.0 + t.abs());
    if (snapshot.t() - t).abs() > tol {
        return Err(Error::MismatchedTimes {
            t_trajectory: t,
            t_snapshot: snapshot.t(),
        });
    }
    let mut positions = Vec::with_capacity(trajectories.len());
    for traj in trajectories {
        let s = traj.sample_at(t, tol).ok_or(Error::MissingSample(t))?;
        positions.push(s.r);
    }

    let bins = EQUIVARIANCE_BINS;
    let mut edges = Vec::with_capacity(bins - 1);
    for k in 1..bins {
        edges.push(snapshot.quantile(k as f64 / bins as f64)?);
    }
    let mut counts = vec![0usize; bins];
    for &r in &positions {
        let b = edges.partition_point(|&e| e < r);
        counts[b] += 1;
    }
    let n = positions.len() as f64;
    let uniform = 1.0 / bins as f64;
    let tv = 0.5
        * counts
            .iter()
            .map(|&c| (c as f64 / n - uniform).abs())
            .sum::<f64>();
    Ok(tv)
}
