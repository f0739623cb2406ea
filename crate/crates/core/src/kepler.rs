//! Classical radial Coulomb motion at fixed energy and angular momentum:
//! dr/dt = ±√(2(E + 1/r - L²/2r²)), with the square-root singularity at the
//! turning points handled by an exact local quadratic step and the L² = 0
//! collision at the origin by its r^{3/2} local solution.
//!
//! The velocity is always reconstructed from r through the energy relation,
//! so the sampled motion conserves E to rounding by construction.

use crate::error::{Error, Result};
use crate::numeric::{dopri5_step, hermite};
use crate::trajectory::{
    validate_sample_times, Trajectory, TrajectoryKind, TrajectorySample, TrajectoryStatus,
};

/// Closed-form (r, v) as a function of t inside a turning neighborhood.
type LocalModel = Box<dyn Fn(f64) -> (f64, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialDirection {
    Outward,
    Inward,
}

/// State of one classical radial electron; E < 0 (bound), L² = l(l+1).
#[derive(Debug, Clone, Copy)]
pub struct ClassicalState {
    pub energy: f64,
    pub l_squared: f64,
    pub r: f64,
    pub direction: RadialDirection,
}

impl ClassicalState {
    pub fn new(energy: f64, l_squared: f64, r: f64, direction: RadialDirection) -> Result<Self> {
        let (r_min, r_max) = turning_points(energy, l_squared)?;
        if r < r_min - 1e-9 || r > r_max + 1e-9 || r <= 0.0 {
            return Err(Error::OutsideAllowedRegion {
                r0: r,
                r_min,
                r_max,
            });
        }
        Ok(ClassicalState {
            energy,
            l_squared,
            r,
            direction,
        })
    }
}

fn v_eff(r: f64, l_squared: f64) -> f64 {
    -1.0 / r + l_squared / (2.0 * r * r)
}

fn v_eff_slope(r: f64, l_squared: f64) -> f64 {
    1.0 / (r * r) - l_squared / (r * r * r)
}

/// Roots of E = -1/r + L²/(2r²), i.e. of E·r² + r - L²/2 = 0. For L² = 0 the
/// inner root degenerates to the collision at r = 0.
pub fn turning_points(energy: f64, l_squared: f64) -> Result<(f64, f64)> {
    if !(energy < 0.0) {
        return Err(Error::UnboundEnergy(energy));
    }
    if l_squared == 0.0 {
        return Ok((0.0, -1.0 / energy));
    }
    let disc = 1.0 + 2.0 * energy * l_squared;
    if disc < 0.0 {
        return Err(Error::NoClassicalRegion { energy });
    }
    let sqrt_disc = disc.sqrt();
    // Outer root without cancellation, inner from the root product.
    let r_outer = (-1.0 - sqrt_disc) / (2.0 * energy);
    let r_inner = l_squared / (-2.0 * energy) / r_outer;
    Ok((r_inner, r_outer))
}

/// Radial period 2π(-2E)^{-3/2}; independent of L (Coulomb degeneracy).
pub fn radial_period(energy: f64) -> f64 {
    2.0 * std::f64::consts::PI * (-2.0 * energy).powf(-1.5)
}

/// Neighborhood of a turning point inside which the exact local quadratic
/// step replaces the Runge-Kutta integrator, in au.
const TURNING_NEIGHBORHOOD: f64 = 1e-3;
const REL_TOL: f64 = 1e-13;
const ABS_TOL: f64 = 1e-13;
const SAFETY: f64 = 0.9;

pub fn integrate_classical(
    r0: f64,
    energy: f64,
    l_squared: f64,
    direction: RadialDirection,
    t0: f64,
    t1: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    let state = ClassicalState::new(energy, l_squared, r0, direction)?;
    if !(t1 > t0) {
        return Err(Error::EmptyTimeSpan { t0, t1 });
    }
    validate_sample_times(sample_times, t0, t1)?;
    let (r_lo, r_hi) = turning_points(energy, l_squared)?;
    if l_squared > 0.0 && r_hi - r_lo < 20.0 * TURNING_NEIGHBORHOOD {
        return Err(Error::NoClassicalRegion { energy });
    }

    let speed = |r: f64| {
        (2.0 * (energy - v_eff(r.max(1e-12), l_squared)))
            .max(0.0)
            .sqrt()
    };
    let mut s: f64 = match state.direction {
        RadialDirection::Outward => 1.0,
        RadialDirection::Inward => -1.0,
    };
    let mut r = state.r.clamp(r_lo.max(1e-12), r_hi);
    let mut t = t0;

    let time_eps = 1e-9 * (1.0 + t1.abs());
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut si = 0usize;
    while si < sample_times.len() && sample_times[si] <= t0 + time_eps {
        samples.push(TrajectorySample {
            t: t0,
            r,
            v: s * speed(r),
        });
        si += 1;
    }

    let max_step = radial_period(energy) / 32.0;
    let mut h = max_step.min((t1 - t0) / 16.0);
    let mut err_prev: f64 = 1e-4;

    while t < t1 - time_eps {
        let target = if s > 0.0 { r_hi } else { r_lo };
        let dist = (target - r) * s;

        let near_collision = l_squared == 0.0 && s < 0.0 && r <= TURNING_NEIGHBORHOOD;
        if dist.max(0.0) <= TURNING_NEIGHBORHOOD || near_collision {
            // Local analytic crossing.
            let (t_turn, model): (f64, LocalModel) = if near_collision {
                // r(τ)^{3/2} is linear near the origin fall: τ(r) =
                // (√2/3) r^{3/2} (1 - 3Er/10).
                let tau = |rr: f64| {
                    std::f64::consts::SQRT_2 / 3.0 * rr.powf(1.5) * (1.0 - 0.3 * energy * rr)
                };
                let t_turn = t + tau(r);
                let m = move |tt: f64| -> (f64, f64) {
                    let dtau = (tt - t_turn).abs();
                    let rr = (4.5 * dtau * dtau).powf(1.0 / 3.0);
                    let vv = (2.0 * (energy + 1.0 / rr.max(1e-12))).max(0.0).sqrt();
                    (rr, (tt - t_turn).signum() * vv)
                };
                (t_turn, Box::new(m))
            } else {
                let ap = v_eff_slope(target, l_squared).abs();
                let tau1 = (2.0 * dist.max(0.0) / ap).sqrt();
                let t_turn = t + tau1;
                let sign_out = if s > 0.0 { -1.0 } else { 1.0 };
                let m = move |tt: f64| -> (f64, f64) {
                    let dt = tt - t_turn;
                    (target + sign_out * 0.5 * ap * dt * dt, sign_out * ap * dt)
                };
                (t_turn, Box::new(m))
            };
            let exit_dist = if near_collision {
                TURNING_NEIGHBORHOOD
            } else {
                TURNING_NEIGHBORHOOD.min((r_hi - r_lo) / 4.0)
            };
            let tau_exit = if near_collision {
                std::f64::consts::SQRT_2 / 3.0
                    * exit_dist.powf(1.5)
                    * (1.0 - 0.3 * energy * exit_dist)
            } else {
                (2.0 * exit_dist / v_eff_slope(target, l_squared).abs()).sqrt()
            };
            let t_exit = (t_turn + tau_exit).min(t1);
            while si < sample_times.len() && sample_times[si] <= t_exit + time_eps {
                let ts = sample_times[si].min(t_exit);
                let (rs, vs) = model(ts);
                samples.push(TrajectorySample {
                    t: ts,
                    r: rs.clamp(r_lo.max(0.0), r_hi),
                    v: vs,
                });
                si += 1;
            }
            let (r_exit, _) = model(t_exit);
            r = r_exit.clamp(r_lo.max(1e-12), r_hi);
            if t_exit > t_turn {
                s = -s;
            }
            t = t_exit;
            if t >= t1 - time_eps {
                break;
            }
            // The approach shrank the step; leave the neighborhood briskly.
            h = h.max(max_step / 64.0);
            continue;
        }

        // Smooth stretch: cap the step so the turning neighborhood is
        // entered, never overshot.
        let v_here = speed(r);
        let mut h_try = h.min(max_step).min(t1 - t);
        if v_here > 0.0 {
            let linear_cap = 0.8 * (dist - 0.5 * TURNING_NEIGHBORHOOD) / v_here;
            h_try = h_try.min(linear_cap.max(MIN_CLASSICAL_STEP));
        }
        let rhs = |_tt: f64, rr: f64| (s * speed(rr), false);
        let k1 = s * v_here;
        let step = dopri5_step(rhs, t, r, h_try, k1);
        let tol = ABS_TOL + REL_TOL * r.abs().max(step.y_new.abs());
        let err_norm = (step.error / tol).max(1e-16);
        if err_norm <= 1.0 {
            let t_new = t + h_try;
            while si < sample_times.len() && sample_times[si] <= t_new + time_eps {
                let ts = sample_times[si].min(t_new);
                let rs = hermite(ts, t, r, k1, t_new, step.y_new, step.k_end)
                    .clamp(r_lo.max(1e-12), r_hi);
                samples.push(TrajectorySample {
                    t: ts,
                    r: rs,
                    v: s * speed(rs),
                });
                si += 1;
            }
            t = t_new;
            r = step.y_new.clamp(r_lo.max(1e-12), r_hi);
            let fac = SAFETY * err_norm.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h = h_try * fac.clamp(0.2, 5.0);
            err_prev = err_norm.max(1e-4);
        } else {
            h = h_try * (SAFETY * err_norm.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    while si < sample_times.len() && sample_times[si] <= t1 + time_eps {
        samples.push(TrajectorySample {
            t: t1,
            r,
            v: s * speed(r),
        });
        si += 1;
    }

    Ok(Trajectory {
        kind: TrajectoryKind::Classical,
        initial_r: state.r,
        initial_t: t0,
        samples,
        status: TrajectoryStatus::Completed,
    })
}

const MIN_CLASSICAL_STEP: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigen_energy;
    use crate::trajectory::linspace;
    use approx::assert_relative_eq;

    const E0: f64 = -3.125e-4;

    #[test]
    fn turning_points_quadratic_oracle() {
        // Oracle: roots of E r² + r - L²/2 via sum/product (no cancellation).
        let (r_min, r_max) = turning_points(E0, 2.0).unwrap();
        assert_relative_eq!(r_max, 3198.99969, max_relative = 1e-8);
        assert_relative_eq!(r_min, 1.0003127, max_relative = 1e-6);
        assert_relative_eq!(r_min * r_max, 2.0 / (2.0 * 3.125e-4), max_relative = 1e-12);
        assert_relative_eq!(r_min + r_max, 3200.0, max_relative = 1e-12);
        // Against the criterion-level claim.
        assert!((r_max - 3199.0).abs() / 3199.0 < 1e-3);
    }

    #[test]
    fn turning_points_degenerate_and_l_zero() {
        let (r_min, r_max) = turning_points(E0, 0.0).unwrap();
        assert_eq!(r_min, 0.0);
        assert_relative_eq!(r_max, 3200.0, max_relative = 1e-12);
        // Circular orbit: E at the potential minimum, both roots at L².
        let l2 = 2.0;
        let e_circ = -1.0 / (2.0 * l2);
        let (a, b) = turning_points(e_circ, l2).unwrap();
        assert_relative_eq!(a, l2, max_relative = 1e-7);
        assert_relative_eq!(b, l2, max_relative = 1e-7);
        assert!(turning_points(0.1, 2.0).is_err());
        assert!(matches!(
            turning_points(-0.5, 2.0),
            Err(Error::NoClassicalRegion { .. })
        ));
    }

    #[test]
    fn period_matches_kepler_third_law() {
        // Launch at the outer turning point; after one analytic period the
        // trajectory must be back at the turning point.
        let e0 = eigen_energy(40).unwrap();
        let period = radial_period(e0);
        assert_relative_eq!(
            period,
            crate::packet::classical_period(40),
            max_relative = 1e-12
        );
        for l2 in [2.0, 0.0] {
            let (_, r_hi) = turning_points(e0, l2).unwrap();
            let times = linspace(0.0, 1.2 * period, 1201);
            let traj = integrate_classical(
                r_hi,
                e0,
                l2,
                RadialDirection::Outward,
                0.0,
                1.2 * period,
                &times,
            )
            .unwrap();
            // Quadratic fit around the sampled maximum near t = period.
            let window: Vec<&TrajectorySample> = traj
                .samples
                .iter()
                .filter(|s| (s.t - period).abs() < 0.1 * period)
                .collect();
            let peak = window.iter().max_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
            assert!(
                (peak.t - period).abs() < 1e-3 * period,
                "L² = {l2}: return at {} vs period {period}",
                peak.t
            );
            assert!((peak.r - r_hi).abs() / r_hi < 1e-5);
        }
    }

    #[test]
    fn energy_is_conserved_to_rounding() {
        let e0 = eigen_energy(40).unwrap();
        let period = radial_period(e0);
        let times = linspace(0.0, 3.0 * period, 900);
        let traj = integrate_classical(
            2.0,
            e0,
            2.0,
            RadialDirection::Outward,
            0.0,
            3.0 * period,
            &times,
        )
        .unwrap();
        let (r_lo, r_hi) = turning_points(e0, 2.0).unwrap();
        for s in &traj.samples {
            let e = 0.5 * s.v * s.v + v_eff(s.r, 2.0);
            assert!(
                (e - e0).abs() < 1e-10,
                "energy drift {} at t = {}",
                e - e0,
                s.t
            );
            assert!(s.r >= r_lo - 1e-9 && s.r <= r_hi + 1e-9);
        }
    }

    #[test]
    fn core_launch_reaches_turning_point_at_half_period() {
        let e0 = eigen_energy(40).unwrap();
        let period = radial_period(e0);
        let (_, r_hi) = turning_points(e0, 2.0).unwrap();
        let times = linspace(0.0, period, 2000);
        let traj = integrate_classical(2.0, e0, 2.0, RadialDirection::Outward, 0.0, period, &times)
            .unwrap();
        let peak = traj
            .samples
            .iter()
            .max_by(|a, b| a.r.total_cmp(&b.r))
            .unwrap();
        assert!(
            (peak.t - period / 2.0).abs() < 0.02 * period,
            "apex at {} vs {}",
            peak.t,
            period / 2.0
        );
        assert!(peak.r > 0.999 * r_hi);
    }

    #[test]
    fn launch_at_turning_point_turns_inward() {
        let e0 = eigen_energy(40).unwrap();
        let (_, r_hi) = turning_points(e0, 2.0).unwrap();
        let times = linspace(0.0, 1000.0, 11);
        let traj =
            integrate_classical(r_hi, e0, 2.0, RadialDirection::Outward, 0.0, 1000.0, &times)
                .unwrap();
        assert_eq!(traj.samples[0].v, 0.0);
        assert!(traj.samples.last().unwrap().r < r_hi);
        assert!(traj.samples.last().unwrap().v < 0.0);
    }

    #[test]
    fn time_reversal_returns_to_the_start() {
        let e0 = eigen_energy(40).unwrap();
        let period = radial_period(e0);
        let span = 0.8 * period;
        let times = linspace(0.0, span, 5);
        let fwd = integrate_classical(100.0, e0, 2.0, RadialDirection::Outward, 0.0, span, &times)
            .unwrap();
        let end = fwd.samples.last().unwrap();
        let back_dir = if end.v > 0.0 {
            RadialDirection::Inward
        } else {
            RadialDirection::Outward
        };
        let bwd = integrate_classical(end.r, e0, 2.0, back_dir, 0.0, span, &times).unwrap();
        let home = bwd.samples.last().unwrap();
        assert!(
            (home.r - 100.0).abs() < 1e-6,
            "returned to {} instead of 100",
            home.r
        );
    }

    #[test]
    fn rejects_out_of_region_launch() {
        let e0 = eigen_energy(40).unwrap();
        assert!(matches!(
            integrate_classical(0.5, e0, 2.0, RadialDirection::Outward, 0.0, 10.0, &[]),
            Err(Error::OutsideAllowedRegion { .. })
        ));
        assert!(matches!(
            integrate_classical(4000.0, e0, 2.0, RadialDirection::Outward, 0.0, 10.0, &[]),
            Err(Error::OutsideAllowedRegion { .. })
        ));
    }
}
