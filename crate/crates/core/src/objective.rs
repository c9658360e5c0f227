//! Discrete cost functionals and assembly of the discretely exact gradient.
//!
//! The cost is
//!
//! ```text
//! J(c) = Σ_n ω_n [ j_Ω(q_n) + j_Γ(q_n) ] + j_T(q_N) + β r(c)
//! ```
//!
//! with composite trapezoid weights `ω_n` over step boundaries. The gradient
//! is the exact derivative of this fully discrete cost: kernels are evaluated
//! at every RK stage against the stage multipliers of the transposed step.

use crate::error::{CostError, GradientError, SolverError};
use crate::field::Discretization;
use crate::mesh::Side;
use crate::models::{
    continuous_dof, continuous_dof_coords, GradientParts, KernelForm, ModelKind, ParamLayout,
    SpatialOperator, StageData,
};
use crate::time::{AdjointTrajectory, TimeGrid, Trajectory, RK4_C};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{self, Write};
use std::sync::Arc;

/// Distributed part `j_Ω` of the cost.
#[derive(Debug, Clone, PartialEq)]
pub enum VolumeTerm {
    None,
    /// `Σ_c ∫ q_c² dx` over the selected components.
    Energy { components: Vec<usize> },
    /// `Σ_c ∫ (q_c - q_obs,c)² dx`; one observed state per step boundary.
    Tracking {
        components: Vec<usize>,
        observations: Arc<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub volume: VolumeTerm,
    /// Weight of `u(x_r, t)²` at the advection outflow boundary; 0 disables it.
    pub outflow_weight: f64,
    /// Components entering the terminal term `Σ_c ∫ q_c(T)² dx`.
    pub terminal: Vec<usize>,
    /// Regularization coefficient of `β ‖c‖²`.
    pub beta: f64,
}

impl CostSpec {
    /// `∫∫ q_c² dx dt` for one component, no other terms.
    pub fn energy(component: usize) -> Self {
        Self {
            volume: VolumeTerm::Energy {
                components: vec![component],
            },
            outflow_weight: 0.0,
            terminal: Vec::new(),
            beta: 0.0,
        }
    }

    /// Checks the specification against a model instance.
    pub fn validate(
        &self,
        model: ModelKind,
        n_components: usize,
        state_len: usize,
        n_steps: usize,
    ) -> Result<(), CostError> {
        if !(self.beta >= 0.0) {
            return Err(CostError::NegativeBeta(self.beta));
        }
        if self.outflow_weight != 0.0 && model != ModelKind::Advection {
            return Err(CostError::UnstableBoundaryCost);
        }
        let comps: &[usize] = match &self.volume {
            VolumeTerm::None => &[],
            VolumeTerm::Energy { components } => components,
            VolumeTerm::Tracking {
                components,
                observations,
            } => {
                let bad_len = observations.iter().find(|o| o.len() != state_len);
                if observations.len() != n_steps + 1 || bad_len.is_some() {
                    return Err(CostError::ObservationShape {
                        expected: n_steps + 1,
                        expected_len: state_len,
                        found: observations.len(),
                        len: bad_len.or(observations.first()).map_or(0, |o| o.len()),
                    });
                }
                components
            }
        };
        for &index in comps.iter().chain(&self.terminal) {
            if index >= n_components {
                return Err(CostError::BadComponent {
                    index,
                    count: n_components,
                });
            }
        }
        Ok(())
    }

    /// Fingerprint used to match adjoint trajectories to the cost they were built from.
    pub fn tag(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match &self.volume {
            VolumeTerm::None => 0u8.hash(&mut h),
            VolumeTerm::Energy { components } => {
                1u8.hash(&mut h);
                components.hash(&mut h);
            }
            VolumeTerm::Tracking {
                components,
                observations,
            } => {
                2u8.hash(&mut h);
                components.hash(&mut h);
                for v in observations.iter().flatten() {
                    v.to_bits().hash(&mut h);
                }
            }
        }
        self.outflow_weight.to_bits().hash(&mut h);
        self.terminal.hash(&mut h);
        self.beta.to_bits().hash(&mut h);
        h.finish()
    }
}

/// A cost specification bound to a discretization and time grid.
#[derive(Debug, Clone)]
pub struct Cost {
    pub spec: CostSpec,
    disc: Arc<Discretization>,
    grid: TimeGrid,
    mref: Vec<f64>,
}

impl Cost {
    pub fn new(spec: CostSpec, disc: Arc<Discretization>, grid: TimeGrid) -> Self {
        let mref = disc.basis.mass_matrix();
        Self {
            spec,
            disc,
            grid,
            mref,
        }
    }

    pub fn tag(&self) -> u64 {
        self.spec.tag()
    }

    fn block(&self, c: usize, e: usize) -> std::ops::Range<usize> {
        let np = self.disc.n_nodes();
        let s = (c * self.disc.n_elements() + e) * np;
        s..s + np
    }

    /// `Σ_c ∫ r_c² dx` and, if requested, its Euclidean derivative `2 M r`.
    fn quadratic(&self, r: &[f64], comps: &[usize], grad: Option<&mut [f64]>, scale: f64) -> f64 {
        let np = self.disc.n_nodes();
        let mut mr = vec![0.0; np];
        let mut total = 0.0;
        let mut grad = grad;
        for &c in comps {
            for e in 0..self.disc.n_elements() {
                let jac = self.disc.mesh.jacobian(e);
                let blk = self.block(c, e);
                crate::models::matvec(&self.mref, np, &r[blk.clone()], &mut mr);
                total += jac * mr.iter().zip(&r[blk.clone()]).map(|(a, b)| a * b).sum::<f64>();
                if let Some(g) = grad.as_deref_mut() {
                    for (gi, m) in g[blk].iter_mut().zip(&mr) {
                        *gi += scale * 2.0 * jac * m;
                    }
                }
            }
        }
        total
    }

    fn outflow_node(&self) -> usize {
        let (k, np) = (self.disc.n_elements(), self.disc.n_nodes());
        (k - 1) * np + np - 1
    }

    /// Contribution of step boundary `n` to `J` (without regularization), and
    /// optionally its Euclidean derivative with respect to `q_n`.
    pub fn step_term(&self, n: usize, q: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let w = self.grid.trapezoid_weight(n);
        let mut total = 0.0;
        match &self.spec.volume {
            VolumeTerm::None => {}
            VolumeTerm::Energy { components } => {
                total += w * self.quadratic(q, components, grad.as_deref_mut(), w);
            }
            VolumeTerm::Tracking {
                components,
                observations,
            } => {
                let r: Vec<f64> = q.iter().zip(&observations[n]).map(|(a, b)| a - b).collect();
                total += w * self.quadratic(&r, components, grad.as_deref_mut(), w);
            }
        }
        if self.spec.outflow_weight != 0.0 {
            let i = self.outflow_node();
            let cw = self.spec.outflow_weight;
            total += w * cw * q[i] * q[i];
            if let Some(g) = grad.as_deref_mut() {
                g[i] += 2.0 * w * cw * q[i];
            }
        }
        if n == self.grid.n_steps && !self.spec.terminal.is_empty() {
            total += self.quadratic(q, &self.spec.terminal, grad, 1.0);
        }
        total
    }

    /// Euclidean derivative of the step term, or `None` if it vanishes identically.
    pub fn step_derivative(&self, n: usize, q: &[f64]) -> Option<Vec<f64>> {
        let active = !matches!(self.spec.volume, VolumeTerm::None)
            || self.spec.outflow_weight != 0.0
            || (n == self.grid.n_steps && !self.spec.terminal.is_empty());
        if !active {
            return None;
        }
        let mut g = vec![0.0; q.len()];
        self.step_term(n, q, Some(&mut g));
        Some(g)
    }

    /// `β r(c)` for the parameter layout.
    pub fn regularization(&self, layout: &ParamLayout, params: &[f64]) -> f64 {
        if self.spec.beta == 0.0 {
            return 0.0;
        }
        let g = self.regularization_gradient(layout, params);
        0.5 * g.iter().zip(params).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Derivative of `β r(c)`: `2β M c` for continuous fields, `2β h_e c_e`
    /// for element constants, `2β ω_n J_n` for boundary time series.
    pub fn regularization_gradient(&self, layout: &ParamLayout, params: &[f64]) -> Vec<f64> {
        let beta = self.spec.beta;
        let mut g = vec![0.0; params.len()];
        if beta == 0.0 {
            return g;
        }
        match layout {
            ParamLayout::ContinuousNodal { .. } => {
                let disc = &self.disc;
                let np = disc.n_nodes();
                let mut local = vec![0.0; np];
                let mut ml = vec![0.0; np];
                for e in 0..disc.n_elements() {
                    for (i, l) in local.iter_mut().enumerate() {
                        *l = params[continuous_dof(disc, e, i)];
                    }
                    crate::models::matvec(&self.mref, np, &local, &mut ml);
                    let jac = disc.mesh.jacobian(e);
                    for (i, m) in ml.iter().enumerate() {
                        g[continuous_dof(disc, e, i)] += 2.0 * beta * jac * m;
                    }
                }
            }
            ParamLayout::ElementConstant { .. } => {
                for (e, (gi, c)) in g.iter_mut().zip(params).enumerate() {
                    *gi = 2.0 * beta * self.disc.mesh.width(e) * c;
                }
            }
            ParamLayout::BoundaryTimeSeries { n_times, .. } => {
                for (i, (gi, c)) in g.iter_mut().zip(params).enumerate() {
                    *gi = 2.0 * beta * self.grid.trapezoid_weight(i % n_times) * c;
                }
            }
        }
        g
    }

    /// Full cost from a forward trajectory (recomputing checkpointed snapshots).
    pub fn evaluate(
        &self,
        op: &dyn SpatialOperator,
        traj: &Trajectory,
        params: &[f64],
    ) -> Result<f64, SolverError> {
        let mut total = 0.0;
        traj.for_each_step(op, &mut |n, q, _| total += self.step_term(n, q, None))?;
        total += self.step_term(self.grid.n_steps, traj.final_state(), None);
        Ok(total + self.regularization(&op.param_layout(), params))
    }

    /// Weighted-variable adjoint injection `M^-1 ∂J/∂q_n`.
    pub fn injection(&self, op: &dyn SpatialOperator, n: usize, q: &[f64]) -> Option<Vec<f64>> {
        self.step_derivative(n, q).map(|g| {
            let mut out = vec![0.0; g.len()];
            op.mass_solve(&g, &mut out);
            out
        })
    }
}

/// Coefficient-space gradient with its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    /// `a`, `c`, or `J_s`.
    pub parameter: String,
    pub layout: ParamLayout,
    /// Location of each dof: node coordinate, element midpoint, or time.
    pub locations: Vec<f64>,
    pub volume: Vec<f64>,
    pub face: Vec<f64>,
    /// The jump-term part of `face`.
    pub face_jump: Vec<f64>,
    pub regularization: Vec<f64>,
}

impl GradientReport {
    pub fn len(&self) -> usize {
        self.volume.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volume.is_empty()
    }

    /// `volume + face + regularization`, entrywise.
    pub fn total(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.volume[i] + self.face[i] + self.regularization[i])
            .collect()
    }

    /// The continuous-style gradient: the total without face jump terms.
    pub fn comparator_total(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.volume[i] + (self.face[i] - self.face_jump[i]) + self.regularization[i])
            .collect()
    }

    /// `Σ_i g_i c̃_i`.
    pub fn directional_derivative(&self, direction: &[f64]) -> Result<f64, GradientError> {
        pair(&self.total(), direction)
    }

    /// Directional derivative of the comparator gradient.
    pub fn comparator_directional(&self, direction: &[f64]) -> Result<f64, GradientError> {
        pair(&self.comparator_total(), direction)
    }

    /// One row per dof; lines of `header` are written first as `#` comments.
    pub fn write_csv<W: Write>(&self, header: &[String], out: &mut W) -> io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "dof,location,volume,face,regularization,total,comparator_total")?;
        let (total, comp) = (self.total(), self.comparator_total());
        for i in 0..self.len() {
            writeln!(
                out,
                "{i},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                self.locations[i], self.volume[i], self.face[i], self.regularization[i], total[i], comp[i]
            )?;
        }
        Ok(())
    }
}

fn pair(g: &[f64], d: &[f64]) -> Result<f64, GradientError> {
    if g.len() != d.len() {
        return Err(GradientError::LayoutMismatch {
            expected: g.len(),
            found: d.len(),
        });
    }
    Ok(g.iter().zip(d).map(|(a, b)| a * b).sum())
}

/// Locations of the parameter dofs of a layout.
pub fn parameter_locations(disc: &Discretization, layout: &ParamLayout, grid: &TimeGrid) -> Vec<f64> {
    match layout {
        ParamLayout::ContinuousNodal { .. } => continuous_dof_coords(disc),
        ParamLayout::ElementConstant { n_elements } => (0..*n_elements)
            .map(|e| disc.mesh.map_point(e, 0.0))
            .collect(),
        ParamLayout::BoundaryTimeSeries { sides, n_times } => sides
            .iter()
            .flat_map(|_| (0..*n_times).map(|n| grid.time(n)))
            .collect(),
    }
}

fn parameter_name(layout: &ParamLayout) -> &'static str {
    match layout {
        ParamLayout::ContinuousNodal { .. } => "c",
        ParamLayout::ElementConstant { .. } => "c",
        ParamLayout::BoundaryTimeSeries { .. } => "J_s",
    }
}

/// Runs the adjoint sweep for `cost` over a forward trajectory.
pub fn solve_adjoint(
    op: &dyn SpatialOperator,
    traj: &Trajectory,
    cost: &Cost,
) -> Result<AdjointTrajectory, SolverError> {
    crate::time::run_adjoint(op, traj, cost.tag(), &mut |n, q| cost.injection(op, n, q))
}

/// Exact gradient of the fully discrete cost.
///
/// `parameter` names the reported parameter (e.g. `a` for advection).
pub fn assemble_gradient(
    op: &dyn SpatialOperator,
    traj: &Trajectory,
    adjoint: &AdjointTrajectory,
    cost: &Cost,
    params: &[f64],
    kernel: KernelForm,
) -> Result<GradientReport, crate::error::Error> {
    if adjoint.cost_tag != cost.tag() {
        return Err(GradientError::CostTagMismatch.into());
    }
    let layout = op.param_layout();
    if params.len() != layout.len() {
        return Err(GradientError::LayoutMismatch {
            expected: layout.len(),
            found: params.len(),
        }
        .into());
    }
    if adjoint.multipliers.len() != traj.n_steps() {
        return Err(GradientError::TrajectoryMismatch(format!(
            "{} forward steps, {} adjoint steps",
            traj.n_steps(),
            adjoint.multipliers.len()
        ))
        .into());
    }
    let dt = traj.dt();
    let mut acc = GradientParts::zeros(layout.len());
    let mut rate = vec![0.0; op.len()];
    let mut neg = vec![0.0; op.len()];
    traj.for_each_step(op, &mut |n, _q, stages| {
        let t_n = traj.grid.time(n);
        for (j, y) in stages.iter().enumerate() {
            let t = t_n + RK4_C[j] * dt;
            op.rate(y, Some(t), &mut rate);
            for (o, l) in neg.iter_mut().zip(&adjoint.multipliers[n][j]) {
                *o = -l;
            }
            let stage = StageData {
                state: y,
                rate: &rate,
                adjoint: &neg,
                t,
            };
            op.accumulate_gradient(&stage, kernel, &mut acc);
        }
    })?;
    let disc = op.disc();
    Ok(GradientReport {
        parameter: parameter_name(&layout).to_string(),
        locations: parameter_locations(disc, &layout, &traj.grid),
        regularization: cost.regularization_gradient(&layout, params),
        layout,
        volume: acc.volume,
        face: acc.face,
        face_jump: acc.face_jump,
    })
}

/// The comparator as its own report: face jump terms dropped.
pub fn continuous_style_gradient(report: &GradientReport) -> GradientReport {
    let face: Vec<f64> = report
        .face
        .iter()
        .zip(&report.face_jump)
        .map(|(f, j)| f - j)
        .collect();
    GradientReport {
        face,
        face_jump: vec![0.0; report.len()],
        ..report.clone()
    }
}

/// Boundary sides of a time-series layout, in dof order.
pub fn series_sides(layout: &ParamLayout) -> &[Side] {
    match layout {
        ParamLayout::BoundaryTimeSeries { sides, .. } => sides,
        _ => &[],
    }
}
