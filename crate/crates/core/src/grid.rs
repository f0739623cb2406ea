//! Radial grid on (0, r_max] plus the quadrature and differentiation
//! machinery every field in the crate shares.
//!
//! The default mapping places nodes uniformly in √r, which keeps the number
//! of grid points per Coulomb oscillation roughly constant from the core out
//! to the classically forbidden tail.

use crate::error::{Error, Result};
use crate::numeric::fd_weights;

/// Smallest admissible node count.
pub const MIN_POINT_COUNT: usize = 1000;

/// Width of the finite-difference stencil used for on-grid derivatives.
const DERIV_STENCIL: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMapping {
    /// Nodes equispaced in √r.
    SqrtR,
    /// Nodes equispaced in r.
    UniformR,
}

impl GridMapping {
    fn to_coord(self, r: f64) -> f64 {
        match self {
            GridMapping::SqrtR => r.sqrt(),
            GridMapping::UniformR => r,
        }
    }

    /// dr/dq at coordinate q.
    fn jacobian(self, q: f64) -> f64 {
        match self {
            GridMapping::SqrtR => 2.0 * q,
            GridMapping::UniformR => 1.0,
        }
    }
}

/// Discretization of r in (0, r_max]: strictly increasing nodes, the first
/// beyond zero and the last exactly at r_max.
#[derive(Debug)]
pub struct RadialGrid {
    r_max: f64,
    mapping: GridMapping,
    nodes: Vec<f64>,
    dq: f64,
    q_first: f64,
    /// Quadrature weights: ∫ f dr over [nodes[0], r_max] ≈ Σ w_i f(r_i).
    weights: Vec<f64>,
    /// Per-node 7-point first-derivative stencils (start index + weights).
    deriv_stencils: Vec<(usize, [f64; DERIV_STENCIL])>,
}

/// Build a grid. `point_count` nodes are placed at q_k = k·Δq for
/// k = 1..=point_count in the mapping coordinate q.
pub fn build_grid(r_max: f64, point_count: usize, mapping: GridMapping) -> Result<RadialGrid> {
    if !(r_max > 0.0) {
        return Err(Error::NonPositiveRmax(r_max));
    }
    if point_count < MIN_POINT_COUNT {
        return Err(Error::PointCountTooSmall {
            got: point_count,
            min: MIN_POINT_COUNT,
        });
    }
    let q_max = mapping.to_coord(r_max);
    let dq = q_max / point_count as f64;
    let mut nodes: Vec<f64> = (1..=point_count)
        .map(|k| {
            let q = k as f64 * dq;
            match mapping {
                GridMapping::SqrtR => q * q,
                GridMapping::UniformR => q,
            }
        })
        .collect();
    // Pin the endpoint; (√r_max)² can be off by an ulp.
    *nodes.last_mut().unwrap() = r_max;

    let weights = quadrature_weights(&nodes, dq, mapping);
    let deriv_stencils = derivative_stencils(&nodes);

    Ok(RadialGrid {
        r_max,
        mapping,
        q_first: dq,
        nodes,
        dq,
        weights,
        deriv_stencils,
    })
}

/// Grid extent comfortably beyond the outer classical turning point of the
/// largest state it has to carry, so bound tails decay below 1e-10 of the
/// state's maximum before the boundary.
pub fn recommended_r_max(n_max: u32) -> f64 {
    1.75 * 2.0 * (n_max as f64).powi(2)
}

/// Composite Simpson in the mapping coordinate with the Jacobian folded into
/// the per-node weights.
fn quadrature_weights(nodes: &[f64], dq: f64, mapping: GridMapping) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0_f64; n];
    let intervals = n - 1;
    let paired = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals - 1
    };
    let mut i = 0;
    while i < paired {
        w[i] += dq / 3.0;
        w[i + 1] += 4.0 * dq / 3.0;
        w[i + 2] += dq / 3.0;
        i += 2;
    }
    if paired < intervals {
        // Quadratic through the last three nodes, integrated over the final
        // interval only.
        w[n - 3] += -dq / 12.0;
        w[n - 2] += 8.0 * dq / 12.0;
        w[n - 1] += 5.0 * dq / 12.0;
    }
    for (wi, r) in w.iter_mut().zip(nodes.iter()) {
        *wi *= mapping.jacobian(mapping.to_coord(*r));
    }
    w
}

fn derivative_stencils(nodes: &[f64]) -> Vec<(usize, [f64; DERIV_STENCIL])> {
    let n = nodes.len();
    let half = DERIV_STENCIL / 2;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - DERIV_STENCIL);
            let window = &nodes[start..start + DERIV_STENCIL];
            let w = fd_weights(window, nodes[i], 1);
            let mut ws = [0.0; DERIV_STENCIL];
            ws.copy_from_slice(&w[1]);
            (start, ws)
        })
        .collect()
}

impl RadialGrid {
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn mapping(&self) -> GridMapping {
        self.mapping
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn first_node(&self) -> f64 {
        self.nodes[0]
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.nodes[0] && r <= self.r_max
    }

    /// Local node spacing dr near r.
    pub fn spacing_at(&self, r: f64) -> f64 {
        self.dq
            * self
                .mapping
                .jacobian(self.mapping.to_coord(r.max(self.nodes[0])))
    }

    /// Index i with nodes[i] <= r <= nodes[i+1].
    pub fn cell_of(&self, r: f64) -> Result<usize> {
        if !self.contains(r) {
            return Err(Error::OutsideGrid {
                r,
                lo: self.nodes[0],
                hi: self.r_max,
            });
        }
        let q = self.mapping.to_coord(r);
        let mut i = (((q - self.q_first) / self.dq) as usize).min(self.nodes.len() - 2);
        while i > 0 && r < self.nodes[i] {
            i -= 1;
        }
        while i + 2 < self.nodes.len() && r > self.nodes[i + 1] {
            i += 1;
        }
        Ok(i)
    }

    /// ∫ f dr over [first node, r_max] from samples on the nodes.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.nodes.len());
        self.weights.iter().zip(f.iter()).map(|(w, v)| w * v).sum()
    }

    /// Cumulative integral at every node: out[i] = ∫ f dr over
    /// [first node, nodes[i]], consistent with `integrate` at the endpoint.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.nodes.len());
        let n = self.nodes.len();
        let g: Vec<f64> = f
            .iter()
            .zip(self.nodes.iter())
            .map(|(v, r)| v * self.mapping.jacobian(self.mapping.to_coord(*r)))
            .collect();
        let mut out = vec![0.0_f64; n];
        let intervals = n - 1;
        let paired = if intervals.is_multiple_of(2) {
            intervals
        } else {
            intervals - 1
        };
        let dq = self.dq;
        let mut i = 0;
        while i < paired {
            let (a, b, c) = (g[i], g[i + 1], g[i + 2]);
            out[i + 1] = out[i] + dq / 12.0 * (5.0 * a + 8.0 * b - c);
            out[i + 2] = out[i] + dq / 3.0 * (a + 4.0 * b + c);
            i += 2;
        }
        if paired < intervals {
            let (a, b, c) = (g[n - 3], g[n - 2], g[n - 1]);
            out[n - 1] = out[n - 2] + dq / 12.0 * (-a + 8.0 * b + 5.0 * c);
        }
        out
    }

    /// d/dr of grid samples at every node (7-point stencils).
    pub fn differentiate(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.nodes.len());
        self.deriv_stencils
            .iter()
            .map(|(start, w)| {
                let mut acc = 0.0;
                for (k, wk) in w.iter().enumerate() {
                    acc += wk * f[start + k];
                }
                acc
            })
            .collect()
    }
}
