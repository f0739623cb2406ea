//! Gaussian-coefficient radial wavepackets: the coefficient window, the
//! synthesized field ψ(r, t) and its radial derivative, snapshots, the
//! autocorrelation observable and the characteristic time scales.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::eigen::{eigen_energy, Eigenstate};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::units::au_to_picoseconds;
use crate::{par_map, par_map_range};

/// Relative size of the Gaussian factor at which the coefficient window is
/// truncated; the first sub-threshold state on each side is still included.
/// Dropped states contribute less than 1e-11 to any probability.
pub const WINDOW_TRUNCATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// c_n ∝ exp(-(n-n0)²/(2Δn²)).
    Uniform,
    /// c_n ∝ n^{-3/2} exp(-(n-n0)²/(2Δn²)), the hydrogenic dipole scaling.
    DipoleScaling,
}

/// Excitation amplitudes c_n over a truncated n-window, Σ c_n² = 1.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    n0: u32,
    delta_n: f64,
    l: u32,
    n_lo: u32,
    n_hi: u32,
    amplitudes: Vec<f64>,
    weight_mode: WeightMode,
}

/// Build the Gaussian coefficient distribution centered on n0 with width Δn.
/// The window spans every n whose Gaussian factor exceeds
/// [`WINDOW_TRUNCATION`], extended one state past the crossing on each side,
/// and never descends below l + 1.
pub fn gaussian_coefficients(
    n0: u32,
    delta_n: f64,
    weight_mode: WeightMode,
    l: u32,
) -> Result<CoefficientSet> {
    if n0 < 2 {
        return Err(Error::N0TooSmall(n0));
    }
    if !(delta_n > 0.0) {
        return Err(Error::NonPositiveDeltaN(delta_n));
    }
    let gauss = |k: f64| (-(k * k) / (2.0 * delta_n * delta_n)).exp();
    let mut k_cut = 1u32;
    while gauss(k_cut as f64) >= WINDOW_TRUNCATION {
        k_cut += 1;
    }
    let n_lo = n0.saturating_sub(k_cut).max(l + 1);
    let n_hi = n0 + k_cut;

    let mut amplitudes: Vec<f64> = (n_lo..=n_hi)
        .map(|n| {
            let w = match weight_mode {
                WeightMode::Uniform => 1.0,
                WeightMode::DipoleScaling => (n as f64).powf(-1.5),
            };
            w * gauss(n as f64 - n0 as f64)
        })
        .collect();
    let norm = amplitudes.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in amplitudes.iter_mut() {
        *c /= norm;
    }

    let peak = (n0 - n_lo) as usize;
    let unimodal = amplitudes.windows(2).enumerate().all(|(i, pair)| {
        if i < peak {
            pair[0] < pair[1]
        } else {
            pair[0] > pair[1]
        }
    });
    if !unimodal {
        return Err(Error::NonUnimodalCoefficients);
    }

    Ok(CoefficientSet {
        n0,
        delta_n,
        l,
        n_lo,
        n_hi,
        amplitudes,
        weight_mode,
    })
}

impl CoefficientSet {
    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn delta_n(&self) -> f64 {
        self.delta_n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    /// Inclusive window of principal quantum numbers.
    pub fn window(&self) -> (u32, u32) {
        (self.n_lo, self.n_hi)
    }

    pub fn ns(&self) -> impl Iterator<Item = u32> {
        self.n_lo..=self.n_hi
    }

    pub fn amplitude(&self, n: u32) -> f64 {
        if n < self.n_lo || n > self.n_hi {
            0.0
        } else {
            self.amplitudes[(n - self.n_lo) as usize]
        }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }
}

/// T_cl = 2π n0³, the radial Kepler period at the central energy, in atomic
/// units of time.
pub fn classical_period(n0: u32) -> f64 {
    assert!(n0 >= 1, "n0 must be at least 1");
    2.0 * PI * (n0 as f64).powi(3)
}

/// [`classical_period`] in picoseconds.
pub fn classical_period_ps(n0: u32) -> f64 {
    au_to_picoseconds(classical_period(n0))
}

#[derive(Debug, Clone, Copy)]
pub struct RevivalTimes {
    pub classical: f64,
    pub half_revival: f64,
    pub full_revival: f64,
}

/// Characteristic times from the quadratic expansion of E_n about n0:
/// full revival at (2n0/3)·T_cl, half revival at half that.
pub fn revival_time(n0: u32) -> RevivalTimes {
    assert!(n0 >= 2, "n0 must be at least 2");
    let t_cl = classical_period(n0);
    let full = 2.0 * n0 as f64 / 3.0 * t_cl;
    RevivalTimes {
        classical: t_cl,
        half_revival: 0.5 * full,
        full_revival: full,
    }
}

/// Excitation pulse model. Time is measured from the pulse maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseModel {
    /// The packet is fully formed: ψ = Σ c_n e^{-iE_n t} u_n.
    PostPulse,
    /// Two-term superposition with smooth population transfer of duration
    /// tau_p: ψ = χ(t) e^{-iE_1s t} u_1s + ζ(t) Σ c_n e^{-iE_n t} u_n.
    TurnOn { tau_p: f64 },
}

impl PulseModel {
    pub fn turn_on(tau_p: f64) -> Result<Self> {
        if !(tau_p > 0.0) {
            return Err(Error::NonPositiveTauP(tau_p));
        }
        Ok(PulseModel::TurnOn { tau_p })
    }

    /// (ζ, χ) at time t: excited-state and ground-state amplitudes.
    pub fn amplitudes(&self, t: f64) -> (f64, f64) {
        match self {
            PulseModel::PostPulse => (1.0, 0.0),
            PulseModel::TurnOn { tau_p } => turn_on_factor(t, *tau_p),
        }
    }
}

/// Smoothed turn-on profile ζ(t) = ½(1 + erf(t·√2/τ_P)) — the integral of a
/// Gaussian envelope — with χ = √(1 - ζ²) keeping the two-term state
/// normalized. ζ(-∞) = 0, ζ(0) = ½, ζ(+∞) = 1.
pub fn turn_on_factor(t: f64, tau_p: f64) -> (f64, f64) {
    let zeta = 0.5 * (1.0 + libm::erf(t * std::f64::consts::SQRT_2 / tau_p));
    let chi = (1.0 - zeta * zeta).max(0.0).sqrt();
    (zeta, chi)
}

/// Autocorrelation C(t) = Σ_n c_n² e^{-iE_n t}; |C| ≤ 1 with C(0) = 1.
pub fn autocorrelation(coeffs: &CoefficientSet, times: &[f64]) -> Vec<Complex64> {
    let terms: Vec<(f64, f64)> = coeffs
        .ns()
        .zip(coeffs.amplitudes().iter())
        .map(|(n, c)| (c * c, eigen_energy(n).expect("window ns are >= 1")))
        .collect();
    par_map(times, |&t| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(w, e) in &terms {
            let (s, c) = (-e * t).sin_cos();
            acc += Complex64::new(w * c, w * s);
        }
        acc
    })
}

/// The synthesized time-dependent field over a fixed eigenbasis.
#[derive(Debug, Clone)]
pub struct SuperposedField {
    coeffs: CoefficientSet,
    pulse: PulseModel,
    states: Vec<Arc<Eigenstate>>,
    energies: Vec<f64>,
    ground: Option<Arc<Eigenstate>>,
    grid: Arc<RadialGrid>,
}

/// Compute all eigenstates of a coefficient window on a shared grid,
/// independent states in parallel.
pub fn build_basis(
    coeffs: &CoefficientSet,
    grid: &Arc<RadialGrid>,
) -> Result<Vec<Arc<Eigenstate>>> {
    let ns: Vec<u32> = coeffs.ns().collect();
    par_map(&ns, |&n| {
        crate::eigen::compute_eigenstate(n, coeffs.l(), grid).map(Arc::new)
    })
    .into_iter()
    .collect()
}

impl SuperposedField {
    /// Assemble the field from a basis slice; every n in the coefficient
    /// window must be present with the window's l, on one shared grid. The
    /// turn-on mode additionally requires the (1, 0) ground state.
    pub fn new(
        coeffs: CoefficientSet,
        basis: &[Arc<Eigenstate>],
        pulse: PulseModel,
    ) -> Result<Self> {
        let grid = basis
            .first()
            .map(|s| Arc::clone(s.grid()))
            .ok_or(Error::MissingBasisState(coeffs.n_lo))?;
        for s in basis {
            if !Arc::ptr_eq(s.grid(), &grid) {
                return Err(Error::ForeignGrid { n: s.n(), l: s.l() });
            }
        }
        let mut states = Vec::with_capacity(coeffs.amplitudes().len());
        for n in coeffs.ns() {
            let state = basis
                .iter()
                .find(|s| s.n() == n && s.l() == coeffs.l())
                .ok_or(Error::MissingBasisState(n))?;
            states.push(Arc::clone(state));
        }
        let energies: Vec<f64> = states.iter().map(|s| s.energy()).collect();
        let ground = basis
            .iter()
            .find(|s| s.n() == 1 && s.l() == 0)
            .map(Arc::clone);
        if matches!(pulse, PulseModel::TurnOn { .. }) && ground.is_none() {
            return Err(Error::MissingGroundState);
        }
        Ok(SuperposedField {
            coeffs,
            pulse,
            states,
            energies,
            ground,
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn pulse(&self) -> PulseModel {
        self.pulse
    }

    /// ψ(r, t) and ∂ψ/∂r through the basis interpolants.
    pub fn synthesize(&self, r: f64, t: f64) -> Result<(Complex64, Complex64)> {
        if !self.grid.contains(r) {
            return Err(Error::OutsideGrid {
                r,
                lo: self.grid.first_node(),
                hi: self.grid.r_max(),
            });
        }
        Ok(self.eval_unchecked(r, t))
    }

    fn eval_unchecked(&self, r: f64, t: f64) -> (Complex64, Complex64) {
        // One shared Hermite basis for all states: they live on one grid.
        let i = self
            .grid
            .cell_of(r)
            .expect("caller guarantees r inside the grid");
        let nodes = self.grid.nodes();
        let h = nodes[i + 1] - nodes[i];
        let s = (r - nodes[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let b = [
            2.0 * s3 - 3.0 * s2 + 1.0,
            (s3 - 2.0 * s2 + s) * h,
            -2.0 * s3 + 3.0 * s2,
            (s3 - s2) * h,
        ];
        let db = [
            (6.0 * s2 - 6.0 * s) / h,
            3.0 * s2 - 4.0 * s + 1.0,
            (-6.0 * s2 + 6.0 * s) / h,
            3.0 * s2 - 2.0 * s,
        ];
        let (zeta, chi) = self.pulse.amplitudes(t);
        let mut psi = Complex64::new(0.0, 0.0);
        let mut dpsi = Complex64::new(0.0, 0.0);
        for ((state, &energy), &c) in self
            .states
            .iter()
            .zip(self.energies.iter())
            .zip(self.coeffs.amplitudes().iter())
        {
            let u = state.samples();
            let du = state.derivative_samples();
            let value = b[0] * u[i] + b[1] * du[i] + b[2] * u[i + 1] + b[3] * du[i + 1];
            let slope = db[0] * u[i] + db[1] * du[i] + db[2] * u[i + 1] + db[3] * du[i + 1];
            let (sin, cos) = (-energy * t).sin_cos();
            let phase = Complex64::new(cos, sin);
            psi += phase * (zeta * c * value);
            dpsi += phase * (zeta * c * slope);
        }
        if chi != 0.0 {
            let g = self
                .ground
                .as_ref()
                .expect("turn-on mode carries the ground state");
            let u = g.samples();
            let du = g.derivative_samples();
            let value = b[0] * u[i] + b[1] * du[i] + b[2] * u[i + 1] + b[3] * du[i + 1];
            let slope = db[0] * u[i] + db[1] * du[i] + db[2] * u[i + 1] + db[3] * du[i + 1];
            let (sin, cos) = (-g.energy() * t).sin_cos();
            let phase = Complex64::new(cos, sin);
            psi += phase * (chi * value);
            dpsi += phase * (chi * slope);
        }
        (psi, dpsi)
    }

    /// |ψ|² at grid node i from the stored samples (no interpolation).
    pub fn rho2_at_node(&self, i: usize, t: f64) -> f64 {
        let (zeta, chi) = self.pulse.amplitudes(t);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((state, &energy), &c) in self
            .states
            .iter()
            .zip(self.energies.iter())
            .zip(self.coeffs.amplitudes().iter())
        {
            let (sin, cos) = (-energy * t).sin_cos();
            acc += Complex64::new(cos, sin) * (zeta * c * state.samples()[i]);
        }
        if chi != 0.0 {
            let g = self
                .ground
                .as_ref()
                .expect("turn-on mode carries the ground state");
            let (sin, cos) = (-g.energy() * t).sin_cos();
            acc += Complex64::new(cos, sin) * (chi * g.samples()[i]);
        }
        acc.norm_sqr()
    }

    /// ψ on every grid node at time t (no interpolation).
    pub fn psi_on_grid(&self, t: f64) -> Vec<Complex64> {
        let (zeta, chi) = self.pulse.amplitudes(t);
        let mut phased: Vec<(Complex64, &[f64])> = Vec::with_capacity(self.states.len() + 1);
        for ((state, &energy), &c) in self
            .states
            .iter()
            .zip(self.energies.iter())
            .zip(self.coeffs.amplitudes().iter())
        {
            let (sin, cos) = (-energy * t).sin_cos();
            phased.push((Complex64::new(cos, sin) * (zeta * c), state.samples()));
        }
        if chi != 0.0 {
            let g = self
                .ground
                .as_ref()
                .expect("turn-on mode carries the ground state");
            let (sin, cos) = (-g.energy() * t).sin_cos();
            phased.push((Complex64::new(cos, sin) * chi, g.samples()));
        }
        let n = self.grid.len();
        par_map_range(n, |i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (coeff, samples) in &phased {
                acc += coeff * samples[i];
            }
            acc
        })
    }

    /// Grid-sampled snapshot with derived densities and integrals.
    pub fn snapshot(&self, t: f64) -> WavefieldSnapshot {
        let psi = self.psi_on_grid(t);
        WavefieldSnapshot::from_psi(Arc::clone(&self.grid), t, psi)
    }
}

/// Complex field samples at fixed t plus the derived probability density and
/// its integrals.
#[derive(Debug, Clone)]
pub struct WavefieldSnapshot {
    t: f64,
    grid: Arc<RadialGrid>,
    psi: Vec<Complex64>,
    rho2: Vec<f64>,
    total_norm: f64,
    expectation_r: f64,
    /// High-order cumulative of ρ², for partial-mass queries.
    cumulative: Vec<f64>,
    /// Trapezoid cumulative of ρ² (piecewise-linear density), for sampling.
    cdf: Vec<f64>,
}

impl WavefieldSnapshot {
    pub fn from_psi(grid: Arc<RadialGrid>, t: f64, psi: Vec<Complex64>) -> Self {
        let rho2: Vec<f64> = psi.iter().map(|p| p.norm_sqr()).collect();
        let total_norm = grid.integrate(&rho2);
        let weighted: Vec<f64> = rho2
            .iter()
            .zip(grid.nodes().iter())
            .map(|(d, r)| d * r)
            .collect();
        let expectation_r = grid.integrate(&weighted);
        let cumulative = grid.cumulative(&rho2);
        let nodes = grid.nodes();
        let mut cdf = vec![0.0_f64; rho2.len()];
        for i in 1..rho2.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (rho2[i] + rho2[i - 1]) * (nodes[i] - nodes[i - 1]);
        }
        WavefieldSnapshot {
            t,
            grid,
            psi,
            rho2,
            total_norm,
            expectation_r,
            cumulative,
            cdf,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn rho2(&self) -> &[f64] {
        &self.rho2
    }

    pub fn total_norm(&self) -> f64 {
        self.total_norm
    }

    pub fn expectation_r(&self) -> f64 {
        self.expectation_r
    }

    /// ∫ ρ² dr over [r_cut, r_max].
    pub fn mass_beyond(&self, r_cut: f64) -> f64 {
        if r_cut <= self.grid.first_node() {
            return self.total_norm;
        }
        if r_cut >= self.grid.r_max() {
            return 0.0;
        }
        let i = self.grid.cell_of(r_cut).expect("bounds checked above");
        let nodes = self.grid.nodes();
        let frac = (r_cut - nodes[i]) / (nodes[i + 1] - nodes[i]);
        let rho_cut = self.rho2[i] + frac * (self.rho2[i + 1] - self.rho2[i]);
        let partial = 0.5 * (self.rho2[i] + rho_cut) * (r_cut - nodes[i]);
        (self.total_norm - self.cumulative[i] - partial).max(0.0)
    }

    /// Inverse CDF of ρ² with linear interpolation inside cells; p in [0, 1].
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let total = *self.cdf.last().unwrap_or(&0.0);
        if !(total > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        let nodes = self.grid.nodes();
        let target = p.clamp(0.0, 1.0) * total;
        let j = self.cdf.partition_point(|&c| c < target);
        if j == 0 {
            return Ok(nodes[0]);
        }
        if j >= self.cdf.len() {
            return Ok(*nodes.last().unwrap());
        }
        let i = j - 1;
        let h = nodes[i + 1] - nodes[i];
        let dm = target - self.cdf[i];
        let b = self.rho2[i] * h;
        let a = 0.5 * h * (self.rho2[i + 1] - self.rho2[i]);
        let disc = (b * b + 4.0 * a * dm).max(0.0).sqrt();
        let alpha = if disc + b > 0.0 {
            (2.0 * dm / (b + disc)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(nodes[i] + alpha * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::compute_eigenstate;
    use crate::grid::{build_grid, GridMapping};
    use approx::assert_relative_eq;

    fn small_grid() -> Arc<RadialGrid> {
        Arc::new(build_grid(800.0, 6000, GridMapping::SqrtR).unwrap())
    }

    #[test]
    fn coefficient_ratio_and_normalization() {
        let c = gaussian_coefficients(40, 0.75, WeightMode::Uniform, 1).unwrap();
        let ratio = c.amplitude(41) / c.amplitude(40);
        assert_relative_eq!(ratio, (-1.0f64 / 1.125).exp(), max_relative = 1e-12);
        assert_relative_eq!(ratio, 0.4111, max_relative = 1e-4);
        let sum: f64 = c.amplitudes().iter().map(|a| a * a).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn window_matches_truncation_scan() {
        // Oracle: scan the Gaussian factor for the first k below threshold.
        let scan = |dn: f64| {
            (1u32..)
                .find(|&k| (-((k * k) as f64) / (2.0 * dn * dn)).exp() < WINDOW_TRUNCATION)
                .unwrap()
        };
        assert_eq!(scan(0.75), 4);
        let c = gaussian_coefficients(40, 0.75, WeightMode::Uniform, 1).unwrap();
        assert_eq!(c.window(), (36, 44));
        let c = gaussian_coefficients(40, 1.5, WeightMode::Uniform, 1).unwrap();
        assert_eq!(c.window(), (40 - scan(1.5), 40 + scan(1.5)));
        assert_eq!(c.window(), (32, 48));
        // The window never descends below l + 1.
        let c = gaussian_coefficients(3, 2.0, WeightMode::Uniform, 1).unwrap();
        assert!(c.window().0 >= 2);
    }

    #[test]
    fn coefficients_reject_bad_inputs() {
        assert!(gaussian_coefficients(1, 0.75, WeightMode::Uniform, 1).is_err());
        assert!(gaussian_coefficients(40, 0.0, WeightMode::Uniform, 1).is_err());
        assert!(gaussian_coefficients(40, -1.0, WeightMode::Uniform, 1).is_err());
    }

    #[test]
    fn dipole_mode_keeps_peak_at_center() {
        let c = gaussian_coefficients(40, 1.5, WeightMode::DipoleScaling, 1).unwrap();
        let peak_n = c
            .ns()
            .max_by(|a, b| c.amplitude(*a).total_cmp(&c.amplitude(*b)))
            .unwrap();
        assert_eq!(peak_n, 40);
    }

    #[test]
    fn classical_period_values() {
        assert_relative_eq!(classical_period(1), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(classical_period(40), 402_123.86, max_relative = 1e-7);
        assert_relative_eq!(classical_period_ps(40), 9.727, max_relative = 5e-4);
        assert_relative_eq!(
            classical_period(80),
            8.0 * classical_period(40),
            max_relative = 1e-14
        );
        // 2π n³ coincides with π·2^{-1/2}·(-E0)^{-3/2}.
        let e0 = eigen_energy(40).unwrap();
        assert_relative_eq!(
            classical_period(40),
            PI / 2.0f64.sqrt() * (-e0).powf(-1.5),
            max_relative = 1e-12
        );
    }

    #[test]
    fn revival_times_from_quadratic_expansion() {
        // Oracle: T_rev = 2π / (|d²E/dn²|/2) with d²E/dn² = -3/n⁴.
        let n0 = 40u32;
        let nf = n0 as f64;
        let oracle_full = 4.0 * PI * nf.powi(4) / 3.0;
        let r = revival_time(n0);
        assert_relative_eq!(r.full_revival, oracle_full, max_relative = 1e-12);
        assert_relative_eq!(
            r.half_revival / r.classical,
            40.0 / 3.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(r.half_revival, r.full_revival / 2.0);
        let r3 = revival_time(3);
        assert_relative_eq!(r3.full_revival, 2.0 * r3.classical, max_relative = 1e-12);
    }

    #[test]
    fn turn_on_profile_limits() {
        let (z, c) = turn_on_factor(-1e6, 100.0);
        assert!(z.abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
        let (z, c) = turn_on_factor(0.0, 100.0);
        assert_relative_eq!(z, 0.5);
        assert_relative_eq!(c, 0.75f64.sqrt());
        let (z, c) = turn_on_factor(1e6, 100.0);
        assert!((z - 1.0).abs() < 1e-12 && c.abs() < 1e-12);
        assert!(PulseModel::turn_on(0.0).is_err());
    }

    #[test]
    fn autocorrelation_closed_forms() {
        let c = gaussian_coefficients(40, 0.75, WeightMode::Uniform, 1).unwrap();
        let c0 = autocorrelation(&c, &[0.0])[0];
        assert_relative_eq!(c0.re, 1.0, epsilon = 1e-12);
        assert!(c0.im.abs() < 1e-12);

        // Two equal coefficients on adjacent n: |C|² = (1 + cos(ΔE t))/2.
        // Emulated with an explicit two-term sum sharing the same energies.
        let (e1, e2) = (eigen_energy(40).unwrap(), eigen_energy(41).unwrap());
        let de = e2 - e1;
        for &t in &[0.0, 1.0e4, 3.3e5, 1.0e6] {
            let c_t =
                0.5 * Complex64::new(0.0, -e1 * t).exp() + 0.5 * Complex64::new(0.0, -e2 * t).exp();
            let want = (1.0 + (de * t).cos()) / 2.0;
            assert_relative_eq!(c_t.norm_sqr(), want, epsilon = 1e-12);
        }

        // Symmetry: C(-t) is the conjugate of C(t) for real coefficients.
        let ts = [1.0e4, 2.5e5];
        let fwd = autocorrelation(&c, &ts);
        let bwd = autocorrelation(&c, &ts.map(|t| -t));
        for (f, b) in fwd.iter().zip(bwd.iter()) {
            assert_relative_eq!(f.re, b.re, epsilon = 1e-14);
            assert_relative_eq!(f.im, -b.im, epsilon = 1e-14);
            assert!(f.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn single_state_field_is_stationary() {
        let grid = small_grid();
        // A one-state "window" via a tiny delta_n: neighbor amplitudes come
        // out around 1e-48, so |psi| is time independent.
        let coeffs = gaussian_coefficients(12, 1e-3, WeightMode::Uniform, 1).unwrap();
        assert_eq!(coeffs.window(), (11, 13));
        let basis: Vec<Arc<Eigenstate>> = (11..=13)
            .map(|n| Arc::new(compute_eigenstate(n, 1, &grid).unwrap()))
            .collect();
        let field = SuperposedField::new(coeffs, &basis, PulseModel::PostPulse).unwrap();
        let r = 150.0;
        let (p0, _) = field.synthesize(r, 0.0).unwrap();
        let (p1, _) = field.synthesize(r, 8.0e5).unwrap();
        assert_relative_eq!(p0.norm(), p1.norm(), max_relative = 1e-10);
    }

    #[test]
    fn field_requires_every_window_state() {
        let grid = small_grid();
        let coeffs = gaussian_coefficients(12, 0.75, WeightMode::Uniform, 1).unwrap();
        let (lo, hi) = coeffs.window();
        let basis: Vec<Arc<Eigenstate>> =
            (lo..hi) // one short
                .map(|n| Arc::new(compute_eigenstate(n, 1, &grid).unwrap()))
                .collect();
        match SuperposedField::new(coeffs, &basis, PulseModel::PostPulse) {
            Err(Error::MissingBasisState(n)) => assert_eq!(n, hi),
            other => panic!("expected MissingBasisState, got {other:?}"),
        }
    }

    #[test]
    fn post_pulse_norm_is_conserved() {
        let grid = small_grid();
        let coeffs = gaussian_coefficients(12, 0.75, WeightMode::Uniform, 1).unwrap();
        let basis = build_basis(&coeffs, &grid).unwrap();
        let field = SuperposedField::new(coeffs, &basis, PulseModel::PostPulse).unwrap();
        let t_cl = classical_period(12);
        for &t in &[0.0, 0.37 * t_cl, 10.0 * t_cl] {
            let snap = field.snapshot(t);
            assert_relative_eq!(snap.total_norm(), 1.0, epsilon = 1e-8);
            assert!(snap.rho2().iter().all(|&d| d >= 0.0));
        }
    }

    #[test]
    fn snapshot_mass_and_quantiles_are_consistent() {
        let grid = small_grid();
        let coeffs = gaussian_coefficients(12, 0.75, WeightMode::Uniform, 1).unwrap();
        let basis = build_basis(&coeffs, &grid).unwrap();
        let field = SuperposedField::new(coeffs, &basis, PulseModel::PostPulse).unwrap();
        let snap = field.snapshot(0.0);
        assert_relative_eq!(
            snap.mass_beyond(snap.grid().first_node()),
            1.0,
            epsilon = 1e-8
        );
        assert!(snap.mass_beyond(800.0).abs() < 1e-12);
        let median = snap.quantile(0.5).unwrap();
        // Half the mass sits beyond the median.
        assert_relative_eq!(snap.mass_beyond(median), 0.5, epsilon = 1e-3);
        let q1 = snap.quantile(0.25).unwrap();
        assert!(q1 < median);
    }

    #[test]
    fn turn_on_field_approaches_post_pulse_form() {
        let grid = small_grid();
        let coeffs = gaussian_coefficients(12, 0.75, WeightMode::Uniform, 1).unwrap();
        let mut basis = build_basis(&coeffs, &grid).unwrap();
        basis.push(Arc::new(compute_eigenstate(1, 0, &grid).unwrap()));
        let pulse = PulseModel::turn_on(500.0).unwrap();
        let on = SuperposedField::new(coeffs.clone(), &basis, pulse).unwrap();
        let post = SuperposedField::new(coeffs, &basis, PulseModel::PostPulse).unwrap();
        let t = 5000.0; // many pulse widths after the maximum
        for &r in &[2.0, 40.0, 300.0] {
            let (a, _) = on.synthesize(r, t).unwrap();
            let (b, _) = post.synthesize(r, t).unwrap();
            assert!(
                (a - b).norm() < 1e-10,
                "turn-on has not converged at r = {r}"
            );
        }
        // Before the pulse the field is essentially the ground state.
        let snap = on.snapshot(-2500.0);
        let g = compute_eigenstate(1, 0, &grid).unwrap();
        let i = grid.cell_of(1.5).unwrap();
        assert_relative_eq!(
            snap.rho2()[i].sqrt(),
            g.samples()[i].abs(),
            max_relative = 1e-6
        );
    }
}
