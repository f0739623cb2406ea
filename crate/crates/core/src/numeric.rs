//! Shared numerical kernels: finite-difference weights on arbitrary nodes and
//! the embedded Dormand-Prince 5(4) step used by both trajectory integrators.

/// Finite-difference weights on arbitrarily spaced nodes (Fornberg's
/// recursion). Returns `c[k][j]`, the weight of `f(nodes[j])` in the
/// approximation of the k-th derivative at `x0`, for k = 0..=max_order.
pub fn fd_weights(nodes: &[f64], x0: f64, max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(n > max_order, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0_f64; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Dormand-Prince 5(4) Butcher tableau.
pub mod dopri5 {
    pub const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

    pub const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];

    /// Fifth-order solution weights (row seven of A; the last stage is FSAL).
    pub const B: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];

    /// Error weights (difference between the embedded orders).
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

/// Outcome of one attempted Dormand-Prince step on a scalar ODE.
#[derive(Debug, Clone, Copy)]
pub struct RkStep {
    pub y_new: f64,
    /// Raw (unscaled) embedded error estimate.
    pub error: f64,
    /// Derivative at (t + h, y_new); reusable as the next step's first stage.
    pub k_end: f64,
    /// True if any stage evaluation raised the right-hand side's guard flag.
    pub guarded: bool,
}

/// One Dormand-Prince 5(4) step of dy/dt = f(t, y). The right-hand side
/// returns `(value, guard)`; `k1` must be `f(t, y)` from the previous step
/// (FSAL) or a fresh evaluation.
pub fn dopri5_step<F>(rhs: F, t: f64, y: f64, h: f64, k1: f64) -> RkStep
where
    F: Fn(f64, f64) -> (f64, bool),
{
    use dopri5::{A, B, C, E};
    let mut k = [0.0_f64; 7];
    let mut guarded = false;
    k[0] = k1;
    for i in 1..6 {
        let mut acc = 0.0;
        for (j, kj) in k.iter().enumerate().take(i) {
            acc += A[i][j] * kj;
        }
        let (ki, gi) = rhs(t + C[i] * h, y + h * acc);
        k[i] = ki;
        guarded |= gi;
    }
    let mut acc = 0.0;
    for i in 0..6 {
        acc += B[i] * k[i];
    }
    let y_new = y + h * acc;
    let (k_end, g_end) = rhs(t + h, y_new);
    k[6] = k_end;
    guarded |= g_end;

    let mut err = 0.0;
    for i in 0..7 {
        err += E[i] * k[i];
    }
    RkStep {
        y_new,
        error: (h * err).abs(),
        k_end,
        guarded,
    }
}

/// Cubic Hermite interpolation of y(t) on [t0, t1] from endpoint values and
/// slopes.
pub fn hermite(t: f64, t0: f64, y0: f64, dy0: f64, t1: f64, y1: f64, dy1: f64) -> f64 {
    let h = t1 - t0;
    if h == 0.0 {
        return y0;
    }
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * dy0 + h01 * y1 + h11 * h * dy1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fd_weights_match_uniform_stencils() {
        let h = 0.1;
        let nodes: Vec<f64> = (-2..=2).map(|i| i as f64 * h).collect();
        let w = fd_weights(&nodes, 0.0, 2);
        let second: Vec<f64> = [-1.0, 16.0, -30.0, 16.0, -1.0]
            .iter()
            .map(|c| c / (12.0 * h * h))
            .collect();
        for (got, want) in w[2].iter().zip(second.iter()) {
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }

        let nodes7: Vec<f64> = (-3..=3).map(|i| i as f64 * h).collect();
        let w7 = fd_weights(&nodes7, 0.0, 1);
        let first = [
            -1.0 / 60.0,
            3.0 / 20.0,
            -3.0 / 4.0,
            0.0,
            3.0 / 4.0,
            -3.0 / 20.0,
            1.0 / 60.0,
        ];
        for (got, want) in w7[1].iter().zip(first.iter()) {
            assert_relative_eq!(got, &(want / h), max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn fd_weights_differentiate_polynomials_exactly_on_scattered_nodes() {
        let nodes = [0.0, 0.13, 0.21, 0.55, 0.89, 1.0, 1.7];
        let f = |x: f64| 3.0 - 2.0 * x + 0.5 * x.powi(3) + 0.1 * x.powi(5);
        let df = |x: f64| -2.0 + 1.5 * x * x + 0.5 * x.powi(4);
        let d2f = |x: f64| 3.0 * x + 2.0 * x.powi(3);
        let x0 = 0.4;
        let w = fd_weights(&nodes, x0, 2);
        let eval =
            |ws: &[f64]| -> f64 { ws.iter().zip(nodes.iter()).map(|(w, x)| w * f(*x)).sum() };
        assert_relative_eq!(eval(&w[0]), f(x0), max_relative = 1e-11);
        assert_relative_eq!(eval(&w[1]), df(x0), max_relative = 1e-10);
        assert_relative_eq!(eval(&w[2]), d2f(x0), max_relative = 1e-9);
    }

    #[test]
    fn dopri5_step_is_fifth_order_on_exponential() {
        // y' = y, y(0) = 1; a single step's error must scale like h^6.
        let rhs = |_t: f64, y: f64| (y, false);
        let mut errs = Vec::new();
        for &h in &[0.1_f64, 0.05] {
            let step = dopri5_step(rhs, 0.0, 1.0, h, 1.0);
            errs.push((step.y_new - h.exp()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 5.5, "observed order {order}");
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| 1.0 + t - 2.0 * t * t + 0.3 * t * t * t;
        let df = |t: f64| 1.0 - 4.0 * t + 0.9 * t * t;
        let (t0, t1) = (0.2, 1.4);
        for i in 0..=10 {
            let t = t0 + (t1 - t0) * i as f64 / 10.0;
            let y = hermite(t, t0, f(t0), df(t0), t1, f(t1), df(t1));
            assert_relative_eq!(y, f(t), max_relative = 1e-12);
        }
    }
}
