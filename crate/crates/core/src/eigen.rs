//! Hydrogenic bound radial eigenstates u_{nl}(r) = r·R_{nl}(r) at high n.
//!
//! States are produced by two-sided Numerov integration at the exact analytic
//! energy E_n = -1/(2n²): outward from a power-series start near the origin,
//! inward from a WKB-seeded decaying tail, amplitude-matched near the outer
//! classical turning point. A closed-form Laguerre evaluation is useless at
//! n ≈ 40 (catastrophic cancellation), which is why the ODE route is used.
//!
//! The propagation runs in the grid's mapping coordinate q. For the √r
//! mapping, u = √q·y turns the radial equation u'' = 2(V_eff - E)u into
//! y'' = G(q)y with G = -8 - 8Eq² + (4l(l+1) + 3/4)/q², so the three-point
//! Numerov recurrence applies on the equispaced q nodes directly.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridMapping, RadialGrid};

/// V_eff(r) = -1/r + l(l+1)/(2r²), in hartree.
pub fn effective_potential(r: f64, l: u32) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let ll = (l * (l + 1)) as f64;
    Ok(-1.0 / r + ll / (2.0 * r * r))
}

/// E_n = -1/(2n²), in hartree.
pub fn eigen_energy(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::BadQuantumNumbers { n, l: 0 });
    }
    let nf = n as f64;
    Ok(-0.5 / (nf * nf))
}

/// One normalized bound radial eigenstate on a shared grid, with a C¹
/// piecewise-cubic interpolant for off-node evaluation.
#[derive(Debug, Clone)]
pub struct Eigenstate {
    n: u32,
    l: u32,
    energy: f64,
    grid: Arc<RadialGrid>,
    samples: Vec<f64>,
    derivatives: Vec<f64>,
    matching_mismatch: f64,
}

/// Relative logarithmic-derivative mismatch beyond which the two Numerov
/// branches are considered incompatible (wrong energy or inadequate grid).
const MATCHING_TOLERANCE: f64 = 1e-5;

/// Cap on the WKB decay exponent used to seed the inward branch; the state is
/// identically zero beyond the node where the exponent reaches this value.
const TAIL_EXPONENT_CAP: f64 = 220.0;

pub fn compute_eigenstate(n: u32, l: u32, grid: &Arc<RadialGrid>) -> Result<Eigenstate> {
    if n < 1 || n < l + 1 {
        return Err(Error::BadQuantumNumbers { n, l });
    }
    let energy = eigen_energy(n)?;
    if n == 1 && l == 0 {
        return Ok(ground_state(grid));
    }

    let nodes = grid.nodes();
    let count = nodes.len();
    let r_tp = outer_turning_point(energy, l);
    // The grid must reach well past the classically allowed region.
    if grid.r_max() < 1.05 * r_tp || nodes[count.saturating_sub(12)] <= r_tp {
        return Err(Error::RmaxInsideAllowed {
            n,
            l,
            r_max: grid.r_max(),
            r_tp,
        });
    }

    let mapping = grid.mapping();
    let dq = match mapping {
        GridMapping::SqrtR => grid.r_max().sqrt() / count as f64,
        GridMapping::UniformR => grid.r_max() / count as f64,
    };
    let ll = (l * (l + 1)) as f64;
    let g_at = |i: usize| -> f64 {
        match mapping {
            GridMapping::SqrtR => {
                let q = (i as f64 + 1.0) * dq;
                -8.0 - 8.0 * energy * q * q + (4.0 * ll + 0.75) / (q * q)
            }
            GridMapping::UniformR => {
                let r = nodes[i];
                ll / (r * r) - 2.0 / r - 2.0 * energy
            }
        }
    };
    let transform = |i: usize| -> f64 {
        match mapping {
            GridMapping::SqrtR => ((i as f64 + 1.0) * dq).sqrt(),
            GridMapping::UniformR => 1.0,
        }
    };

    // Matching node: near the outer turning point, shifted to the largest
    // outward amplitude in a small window for a well-conditioned splice.
    let m_guess = grid
        .cell_of(r_tp)
        .unwrap_or(count - 12)
        .clamp(8, count - 12);

    // Outward branch. The first nodes are seeded from the power series
    // u = r^{l+1} Σ a_j r^j; Numerov takes over once |G|dq²/12 is small.
    let h2_12 = dq * dq / 12.0;
    let mut seed_end = 3usize;
    while seed_end < count / 4 && (h2_12 * g_at(seed_end - 3)).abs() >= 0.5 {
        seed_end += 1;
    }
    if m_guess <= seed_end + 8 {
        return Err(Error::RmaxInsideAllowed {
            n,
            l,
            r_max: grid.r_max(),
            r_tp,
        });
    }
    let out_end = (m_guess + 7).min(count - 1);
    let mut y_out = vec![0.0_f64; out_end + 1];
    for (i, y) in y_out.iter_mut().enumerate().take(seed_end + 1) {
        *y = series_u(nodes[i], l, energy) / transform(i);
    }
    numerov_forward(&mut y_out, seed_end, out_end, h2_12, &g_at);

    let m = (m_guess - 5..=m_guess + 5)
        .max_by(|&a, &b| y_out[a].abs().total_cmp(&y_out[b].abs()))
        .unwrap();

    // Inward branch, seeded from the WKB tail amplitude so both start values
    // already sit on the decaying solution.
    let kappa = |i: usize| -> f64 {
        let r = nodes[i];
        let v = -1.0 / r + ll / (2.0 * r * r);
        (2.0 * (v - energy)).max(0.0).sqrt()
    };
    let mut tail_exponent = vec![0.0_f64; count];
    for i in m + 1..count {
        tail_exponent[i] =
            tail_exponent[i - 1] + 0.5 * (kappa(i) + kappa(i - 1)) * (nodes[i] - nodes[i - 1]);
    }
    let tail_start = (m + 8..count)
        .find(|&i| tail_exponent[i] >= TAIL_EXPONENT_CAP)
        .unwrap_or(count - 1);

    let mut y_in = vec![0.0_f64; count];
    y_in[tail_start] =
        (-tail_exponent[tail_start].min(TAIL_EXPONENT_CAP)).exp() / transform(tail_start);
    y_in[tail_start - 1] =
        (-tail_exponent[tail_start - 1].min(TAIL_EXPONENT_CAP)).exp() / transform(tail_start - 1);
    numerov_backward(&mut y_in, tail_start - 1, m - 5, h2_12, &g_at);

    // Amplitude match at m, then compare the branch slopes.
    if y_in[m] == 0.0 || !y_in[m].is_finite() {
        return Err(Error::MatchingFailure {
            n,
            l,
            mismatch: f64::INFINITY,
            tolerance: MATCHING_TOLERANCE,
            points: count,
            r_max: grid.r_max(),
        });
    }
    let scale = y_out[m] / y_in[m];
    for y in y_in.iter_mut().take(tail_start + 1).skip(m - 5) {
        *y *= scale;
    }
    let slope5 = |y: &[f64], i: usize| -> f64 {
        (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * dq)
    };
    let d_out = slope5(&y_out, m);
    let d_in = slope5(&y_in, m);
    let mismatch = (d_out - d_in).abs() / d_out.abs().max(d_in.abs()).max(f64::MIN_POSITIVE);
    if !mismatch.is_finite() || mismatch > MATCHING_TOLERANCE {
        return Err(Error::MatchingFailure {
            n,
            l,
            mismatch,
            tolerance: MATCHING_TOLERANCE,
            points: count,
            r_max: grid.r_max(),
        });
    }

    // Splice, transform back to u, normalize, differentiate.
    let mut u = vec![0.0_f64; count];
    for i in 0..=m {
        u[i] = transform(i) * y_out[i];
    }
    for i in m + 1..=tail_start {
        u[i] = transform(i) * y_in[i];
    }
    let density: Vec<f64> = u.iter().map(|v| v * v).collect();
    let norm = grid.integrate(&density).sqrt();
    let sign = u[seed_end].signum();
    for v in u.iter_mut() {
        *v *= sign / norm;
    }
    let derivatives = grid.differentiate(&u);

    Ok(Eigenstate {
        n,
        l,
        energy,
        grid: Arc::clone(grid),
        samples: u,
        derivatives,
        matching_mismatch: mismatch,
    })
}

/// The analytic 1s state u = 2r·e^{-r}, sampled through the same interface.
fn ground_state(grid: &Arc<RadialGrid>) -> Eigenstate {
    let mut samples: Vec<f64> = grid.nodes().iter().map(|r| 2.0 * r * (-r).exp()).collect();
    let mut derivatives: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|r| 2.0 * (1.0 - r) * (-r).exp())
        .collect();
    let density: Vec<f64> = samples.iter().map(|v| v * v).collect();
    let norm = grid.integrate(&density).sqrt();
    for v in samples.iter_mut() {
        *v /= norm;
    }
    for v in derivatives.iter_mut() {
        *v /= norm;
    }
    Eigenstate {
        n: 1,
        l: 0,
        energy: -0.5,
        grid: Arc::clone(grid),
        samples,
        derivatives,
        matching_mismatch: 0.0,
    }
}

/// Largest root of E = V_eff, i.e. of E·r² + r - l(l+1)/2 = 0.
pub(crate) fn outer_turning_point(energy: f64, l: u32) -> f64 {
    let half_l2 = (l * (l + 1)) as f64 / 2.0;
    if half_l2 == 0.0 {
        return -1.0 / energy;
    }
    let disc = (1.0 + 4.0 * energy * half_l2).max(0.0).sqrt();
    (-1.0 - disc) / (2.0 * energy)
}

/// Power-series value of u near the origin, a_0 = 1 scale.
fn series_u(r: f64, l: u32, energy: f64) -> f64 {
    let mut a_prev2 = 0.0_f64;
    let mut a_prev1 = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut r_pow = 1.0_f64;
    for j in 1..=30u32 {
        let jf = j as f64;
        let a = (-2.0 * a_prev1 - 2.0 * energy * a_prev2) / (jf * (2.0 * l as f64 + 1.0 + jf));
        r_pow *= r;
        let term = a * r_pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        a_prev2 = a_prev1;
        a_prev1 = a;
    }
    sum * r.powi(l as i32 + 1)
}

fn numerov_forward<G: Fn(usize) -> f64>(
    y: &mut [f64],
    start: usize,
    end: usize,
    h2_12: f64,
    g: &G,
) {
    let mut c_prev = 1.0 - h2_12 * g(start - 1);
    let mut c_here = 1.0 - h2_12 * g(start);
    for i in start..end {
        let c_next = 1.0 - h2_12 * g(i + 1);
        // (1 - h²G/12) y'' form of the recurrence for y'' = G y.
        y[i + 1] = ((2.0 + 10.0 * h2_12 * g(i)) * y[i] - c_prev * y[i - 1]) / c_next;
        c_prev = c_here;
        c_here = c_next;
    }
}

fn numerov_backward<G: Fn(usize) -> f64>(
    y: &mut [f64],
    start: usize,
    end: usize,
    h2_12: f64,
    g: &G,
) {
    let mut c_prev = 1.0 - h2_12 * g(start + 1);
    let mut c_here = 1.0 - h2_12 * g(start);
    for i in (end + 1..=start).rev() {
        let c_next = 1.0 - h2_12 * g(i - 1);
        y[i - 1] = ((2.0 + 10.0 * h2_12 * g(i)) * y[i] - c_prev * y[i + 1]) / c_next;
        c_prev = c_here;
        c_here = c_next;
    }
}

impl Eigenstate {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn derivative_samples(&self) -> &[f64] {
        &self.derivatives
    }

    /// Log-derivative mismatch recorded at the two-branch splice.
    pub fn matching_mismatch(&self) -> f64 {
        self.matching_mismatch
    }

    /// Interpolated (u, du/dr) at r; exact at grid nodes.
    pub fn evaluate(&self, r: f64) -> Result<(f64, f64)> {
        let i = self.grid.cell_of(r)?;
        let nodes = self.grid.nodes();
        let (r0, r1) = (nodes[i], nodes[i + 1]);
        let h = r1 - r0;
        let s = (r - r0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let (u0, u1) = (self.samples[i], self.samples[i + 1]);
        let (d0, d1) = (self.derivatives[i], self.derivatives[i + 1]);
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * u0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * u1
            + (s3 - s2) * h * d1;
        let slope = (6.0 * s2 - 6.0 * s) * u0 / h
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * u1 / h
            + (3.0 * s2 - 2.0 * s) * d1;
        Ok((value, slope))
    }

    /// Number of interior sign changes of the sampled state.
    pub fn interior_node_count(&self) -> usize {
        let mut count = 0;
        let mut last_sign = 0i8;
        for &v in &self.samples {
            if v == 0.0 {
                continue;
            }
            let sign = if v > 0.0 { 1 } else { -1 };
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
        count
    }

    /// ⟨r⟩ = ∫ r u² dr by grid quadrature.
    pub fn expectation_r(&self) -> f64 {
        let integrand: Vec<f64> = self
            .samples
            .iter()
            .zip(self.grid.nodes().iter())
            .map(|(u, r)| r * u * u)
            .collect();
        self.grid.integrate(&integrand)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;

    fn test_grid() -> Arc<RadialGrid> {
        Arc::new(build_grid(8000.0, 24000, GridMapping::SqrtR).unwrap())
    }

    #[test]
    fn effective_potential_values() {
        assert_eq!(effective_potential(1.0, 1).unwrap(), 0.0);
        assert_eq!(effective_potential(2.0, 0).unwrap(), -0.5);
        // l = 1 minimum at r = 2 with value -1/4.
        assert_relative_eq!(effective_potential(2.0, 1).unwrap(), -0.25);
        let eps = 1e-6;
        let dv = (effective_potential(2.0 + eps, 1).unwrap()
            - effective_potential(2.0 - eps, 1).unwrap())
            / (2.0 * eps);
        assert!(dv.abs() < 1e-9);
        assert!(effective_potential(0.0, 1).is_err());
        assert!(effective_potential(-3.0, 0).is_err());
    }

    #[test]
    fn eigen_energy_closed_form() {
        assert_relative_eq!(eigen_energy(40).unwrap(), -3.125e-4);
        assert_relative_eq!(eigen_energy(1).unwrap(), -0.5);
        assert!(eigen_energy(0).is_err());
        // Level spacing from the closed form: 162/10758400 hartree.
        let de = eigen_energy(41).unwrap() - eigen_energy(40).unwrap();
        assert_relative_eq!(de, 162.0 / 10_758_400.0, max_relative = 1e-14);
        assert_relative_eq!(de, 1.50580e-5, max_relative = 1e-5);
    }

    #[test]
    fn high_n_state_nodes_and_mean_radius() {
        let grid = test_grid();
        let state = compute_eigenstate(40, 1, &grid).unwrap();
        assert_eq!(state.interior_node_count(), 38);
        // ⟨r⟩ = (3n² - l(l+1))/2 = 2399 au.
        assert_relative_eq!(state.expectation_r(), 2399.0, max_relative = 1e-3);
        // Normalization and boundary decay.
        let density: Vec<f64> = state.samples().iter().map(|u| u * u).collect();
        assert_relative_eq!(grid.integrate(&density), 1.0, epsilon = 1e-10);
        let peak = state
            .samples()
            .iter()
            .cloned()
            .fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(state.samples().last().unwrap().abs() <= 1e-10 * peak);
    }

    #[test]
    fn ground_state_mean_radius_is_three_halves() {
        let grid = test_grid();
        let s = compute_eigenstate(1, 0, &grid).unwrap();
        assert_relative_eq!(s.expectation_r(), 1.5, max_relative = 1e-10);
        let (_, du) = s.evaluate(1.0).unwrap();
        assert!(
            du.abs() < 1e-7,
            "1s derivative at r = 1 should vanish, got {du}"
        );
    }

    #[test]
    fn rejects_grid_that_ends_inside_the_allowed_region() {
        let grid = Arc::new(build_grid(2000.0, 8000, GridMapping::SqrtR).unwrap());
        assert!(matches!(
            compute_eigenstate(40, 1, &grid),
            Err(Error::RmaxInsideAllowed { .. })
        ));
    }

    #[test]
    fn rejects_bad_quantum_numbers() {
        let grid = test_grid();
        assert!(compute_eigenstate(1, 1, &grid).is_err());
        assert!(compute_eigenstate(0, 0, &grid).is_err());
    }

    #[test]
    fn evaluation_is_exact_at_nodes_and_consistent_off_nodes() {
        let grid = test_grid();
        let state = compute_eigenstate(38, 1, &grid).unwrap();
        let i = grid.len() / 3;
        let r = grid.nodes()[i];
        let (u, _) = state.evaluate(r).unwrap();
        assert_eq!(u, state.samples()[i]);
        assert!(state.evaluate(grid.r_max() * 1.01).is_err());
        assert!(state.evaluate(grid.first_node() * 0.5).is_err());
    }

    #[test]
    fn interpolation_agrees_with_a_denser_grid_at_midpoints() {
        let coarse = Arc::new(build_grid(1800.0, 6000, GridMapping::SqrtR).unwrap());
        let dense = Arc::new(build_grid(1800.0, 24000, GridMapping::SqrtR).unwrap());
        let a = compute_eigenstate(20, 1, &coarse).unwrap();
        let b = compute_eigenstate(20, 1, &dense).unwrap();
        let peak = a
            .samples()
            .iter()
            .cloned()
            .fold(0.0_f64, |x, y| x.max(y.abs()));
        let mut worst = 0.0_f64;
        for i in (1..coarse.len() - 1).step_by(37) {
            let r = 0.5 * (coarse.nodes()[i] + coarse.nodes()[i + 1]);
            let (ua, _) = a.evaluate(r).unwrap();
            let (ub, _) = b.evaluate(r).unwrap();
            worst = worst.max((ua - ub).abs() / peak);
        }
        assert!(worst < 1e-7, "midpoint disagreement {worst:.2e}");
    }

    #[test]
    fn uniform_mapping_produces_the_same_state() {
        let sq = Arc::new(build_grid(400.0, 8000, GridMapping::SqrtR).unwrap());
        let un = Arc::new(build_grid(400.0, 20000, GridMapping::UniformR).unwrap());
        let a = compute_eigenstate(10, 1, &sq).unwrap();
        let b = compute_eigenstate(10, 1, &un).unwrap();
        for &r in &[0.9, 5.0, 57.0, 120.0, 240.0] {
            let (ua, _) = a.evaluate(r).unwrap();
            let (ub, _) = b.evaluate(r).unwrap();
            assert_relative_eq!(ua, ub, epsilon = 1e-7, max_relative = 1e-6);
        }
        assert_eq!(a.interior_node_count(), 8);
        assert_eq!(b.interior_node_count(), 8);
    }
}
