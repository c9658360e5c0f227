//! Reference-element machinery on [-1, 1]: Gauss-Lobatto-Legendre nodes and
//! weights, the nodal differentiation matrix, and an optional Gauss rule used
//! for over-integration.

use crate::error::BasisError;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Which quadrature rule is used for element integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMode {
    /// Quadrature at the GLL nodes themselves (mass matrix is diagonal).
    Collocation,
    /// An `points`-point Gauss-Legendre rule; nodal values are interpolated first.
    OverIntegration { points: usize },
}

impl QuadratureMode {
    /// Over-integration with enough Gauss points to integrate degree-3N products exactly.
    pub fn exact_for(order: usize) -> Self {
        QuadratureMode::OverIntegration { points: (3 * order) / 2 + 2 }
    }

    pub fn is_collocation(&self) -> bool {
        matches!(self, QuadratureMode::Collocation)
    }
}

/// Nodal Lagrange basis on the GLL points of one reference element.
#[derive(Debug, Clone)]
pub struct NodalBasis {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major (N+1)x(N+1) differentiation matrix.
    diff: Vec<f64>,
    mode: QuadratureMode,
    quad_points: Vec<f64>,
    quad_weights: Vec<f64>,
    /// Row-major (M)x(N+1) interpolation matrix from nodes to quadrature points.
    interp: Vec<f64>,
}

/// Legendre polynomial P_n and its derivative at x.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = if (x.abs() - 1.0).abs() < f64::EPSILON {
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// Gauss-Lobatto-Legendre nodes and weights for degree `order`.
///
/// Interior nodes are roots of P'_N, found by Newton iteration started from
/// the Chebyshev-Gauss-Lobatto points.
pub fn gll_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>), BasisError> {
    if order == 0 {
        return Err(BasisError::OrderZero);
    }
    let n = order;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for (i, node) in nodes.iter_mut().enumerate().take(n).skip(1) {
        let mut x = -(std::f64::consts::PI * i as f64 / n as f64).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            // Roots of P'_N: P''_N from the Legendre ODE.
            let (p, dp) = legendre(n, x);
            let d2p = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
            let step = dp / d2p;
            x -= step;
            if step.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(BasisError::NoConvergence { order });
        }
        *node = x;
    }
    // Symmetrize to remove round-off asymmetry.
    for i in 0..=n / 2 {
        let s = 0.5 * (nodes[n - i] - nodes[i]);
        nodes[i] = -s;
        nodes[n - i] = s;
    }
    let scale = 2.0 / (n * (n + 1)) as f64;
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(n, x);
            scale / (p * p)
        })
        .collect();
    Ok((nodes, weights))
}

/// Gauss-Legendre points and weights with `m` points.
pub fn gauss_rule(m: usize) -> Result<(Vec<f64>, Vec<f64>), BasisError> {
    if m == 0 {
        return Err(BasisError::TooFewQuadraturePoints { points: 0, order: 0 });
    }
    let mut points = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(m, x);
            let step = p / dp;
            x -= step;
            if step.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(BasisError::NoConvergence { order: m });
        }
        let (_, dp) = legendre(m, x);
        points[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Ok((points, weights))
}

/// Barycentric weights of a node set.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values of all Lagrange basis functions of `nodes` at `x`.
pub fn lagrange_values(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| (x - nodes[k]) / (nodes[j] - nodes[k]))
                .product()
        })
        .collect()
}

impl NodalBasis {
    /// Builds the basis of degree `order` with the given quadrature mode.
    pub fn new(order: usize, mode: QuadratureMode) -> Result<Self, BasisError> {
        let (nodes, weights) = gll_rule(order)?;
        let np = order + 1;
        let bw = barycentric_weights(&nodes);
        let mut diff = vec![0.0; np * np];
        for i in 0..np {
            let mut row_sum = 0.0;
            for j in 0..np {
                if i != j {
                    let d = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
                    diff[i * np + j] = d;
                    row_sum += d;
                }
            }
            diff[i * np + i] = -row_sum;
        }
        let (quad_points, quad_weights, interp) = match mode {
            QuadratureMode::Collocation => {
                let mut id = vec![0.0; np * np];
                for i in 0..np {
                    id[i * np + i] = 1.0;
                }
                (nodes.clone(), weights.clone(), id)
            }
            QuadratureMode::OverIntegration { points } => {
                if points < np {
                    return Err(BasisError::TooFewQuadraturePoints { points, order });
                }
                let (qp, qw) = gauss_rule(points)?;
                let mut interp = Vec::with_capacity(points * np);
                for &x in &qp {
                    interp.extend(lagrange_values(&nodes, x));
                }
                (qp, qw, interp)
            }
        };
        if quad_weights.iter().any(|&w| w <= 0.0) {
            return Err(BasisError::NonPositiveWeight);
        }
        Ok(Self {
            order,
            nodes,
            weights,
            diff,
            mode,
            quad_points,
            quad_weights,
            interp,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_nodes(&self) -> usize {
        self.order + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row-major differentiation matrix.
    pub fn diff_matrix(&self) -> &[f64] {
        &self.diff
    }

    pub fn mode(&self) -> QuadratureMode {
        self.mode
    }

    pub fn n_quad(&self) -> usize {
        self.quad_points.len()
    }

    pub fn quad_points(&self) -> &[f64] {
        &self.quad_points
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Row-major interpolation matrix from nodal values to quadrature points.
    pub fn interp_matrix(&self) -> &[f64] {
        &self.interp
    }

    /// Derivative on the reference element of the nodal interpolant.
    pub fn differentiate(&self, values: &[f64]) -> Result<Vec<f64>, BasisError> {
        let np = self.n_nodes();
        if values.len() != np {
            return Err(BasisError::LengthMismatch {
                expected: np,
                found: values.len(),
            });
        }
        let mut out = vec![0.0; np];
        self.diff_into(values, &mut out);
        Ok(out)
    }

    pub(crate) fn diff_into(&self, values: &[f64], out: &mut [f64]) {
        let np = self.n_nodes();
        for i in 0..np {
            out[i] = (0..np).map(|j| self.diff[i * np + j] * values[j]).sum();
        }
    }

    /// Applies D^T.
    pub(crate) fn diff_t_into(&self, values: &[f64], out: &mut [f64]) {
        let np = self.n_nodes();
        for j in 0..np {
            out[j] = (0..np).map(|i| self.diff[i * np + j] * values[i]).sum();
        }
    }

    /// Interpolates nodal values to the active quadrature points.
    pub fn to_quadrature(&self, nodal: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_quad()];
        self.to_quad_into(nodal, &mut out);
        out
    }

    pub(crate) fn to_quad_into(&self, nodal: &[f64], out: &mut [f64]) {
        let np = self.n_nodes();
        for (q, o) in out.iter_mut().enumerate() {
            *o = (0..np).map(|j| self.interp[q * np + j] * nodal[j]).sum();
        }
    }

    /// Applies V^T to quadrature-point values.
    pub(crate) fn from_quad_t_into(&self, quad: &[f64], out: &mut [f64]) {
        let np = self.n_nodes();
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..self.n_quad()).map(|q| self.interp[q * np + j] * quad[q]).sum();
        }
    }

    /// Weighted reference mass matrix V^T W diag(omega) V for quadrature-point weights omega.
    pub fn weighted_mass(&self, omega_quad: &[f64]) -> Vec<f64> {
        let np = self.n_nodes();
        let mut m = vec![0.0; np * np];
        for q in 0..self.n_quad() {
            let wq = self.quad_weights[q] * omega_quad[q];
            for i in 0..np {
                let vi = self.interp[q * np + i];
                if vi == 0.0 {
                    continue;
                }
                for j in 0..np {
                    m[i * np + j] += wq * vi * self.interp[q * np + j];
                }
            }
        }
        m
    }

    /// Reference mass matrix V^T W V.
    pub fn mass_matrix(&self) -> Vec<f64> {
        self.weighted_mass(&vec![1.0; self.n_quad()])
    }

    /// Quadrature of f·g·omega, where all three are given as nodal values and
    /// interpolated to the active quadrature points first.
    pub fn quadrature_inner_product(
        &self,
        f: &[f64],
        g: &[f64],
        omega: &[f64],
    ) -> Result<f64, BasisError> {
        let np = self.n_nodes();
        for s in [f, g, omega] {
            if s.len() != np {
                return Err(BasisError::LengthMismatch {
                    expected: np,
                    found: s.len(),
                });
            }
        }
        let (fq, gq, wq) = (self.to_quadrature(f), self.to_quadrature(g), self.to_quadrature(omega));
        Ok(self.quadrature_sum(&fq, &gq, &wq))
    }

    /// Quadrature of values already given at the active quadrature points.
    pub fn quadrature_sum(&self, f: &[f64], g: &[f64], omega: &[f64]) -> f64 {
        self.quad_weights
            .iter()
            .zip(f.iter().zip(g.iter().zip(omega)))
            .map(|(w, (a, (b, c)))| w * a * b * c)
            .sum()
    }
}
