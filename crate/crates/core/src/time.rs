//! Classical RK4 stepping, its exact transpose, and trajectory storage.

use crate::error::SolverError;
use crate::models::SpatialOperator;

/// Butcher weights of classical RK4.
pub const RK4_B: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
/// Stage time offsets as fractions of dt.
pub const RK4_C: [f64; 4] = [0.0, 0.5, 0.5, 1.0];

/// A linear evolution operator `q' = L q + s(t)` with a transpose `L*`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `L q + s(t)`.
    fn apply(&self, q: &[f64], t: f64, out: &mut [f64]);
    /// `L q` without sources.
    fn apply_homogeneous(&self, q: &[f64], out: &mut [f64]);
    /// `L* p`.
    fn apply_transpose(&self, p: &[f64], out: &mut [f64]);
}

impl<T: SpatialOperator + ?Sized> LinearOperator for T {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, q: &[f64], t: f64, out: &mut [f64]) {
        self.rate(q, Some(t), out)
    }

    fn apply_homogeneous(&self, q: &[f64], out: &mut [f64]) {
        self.rate(q, None, out)
    }

    fn apply_transpose(&self, p: &[f64], out: &mut [f64]) {
        self.adjoint_rate(p, out)
    }
}

/// The four stage inputs of one step.
pub type Stages = [Vec<f64>; 4];

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + a * y;
    }
}

/// One RK4 step. Returns `q_{n+1}` and the stage inputs
/// `(q, q + dt/2 k1, q + dt/2 k2, q + dt k3)`.
pub fn rk4_step<O: LinearOperator + ?Sized>(
    op: &O,
    q: &[f64],
    t: f64,
    dt: f64,
) -> Result<(Vec<f64>, Stages), SolverError> {
    rk4_step_impl(op, q, Some(t), dt)
}

/// RK4 step of the homogeneous system (no sources).
pub fn rk4_step_homogeneous<O: LinearOperator + ?Sized>(
    op: &O,
    q: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, Stages), SolverError> {
    rk4_step_impl(op, q, None, dt)
}

fn rk4_step_impl<O: LinearOperator + ?Sized>(
    op: &O,
    q: &[f64],
    t: Option<f64>,
    dt: f64,
) -> Result<(Vec<f64>, Stages), SolverError> {
    if !(dt > 0.0) {
        return Err(SolverError::NonPositiveStep(dt));
    }
    let n = q.len();
    let eval = |y: &[f64], c: f64, out: &mut [f64]| match t {
        Some(t) => op.apply(y, t + c * dt, out),
        None => op.apply_homogeneous(y, out),
    };
    let mut ks = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut stages: Stages = [q.to_vec(), vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    eval(&stages[0], RK4_C[0], &mut ks[0]);
    axpy_into(&mut stages[1], q, 0.5 * dt, &ks[0]);
    eval(&stages[1], RK4_C[1], &mut ks[1]);
    axpy_into(&mut stages[2], q, 0.5 * dt, &ks[1]);
    eval(&stages[2], RK4_C[2], &mut ks[2]);
    axpy_into(&mut stages[3], q, dt, &ks[2]);
    eval(&stages[3], RK4_C[3], &mut ks[3]);
    let mut next = q.to_vec();
    for (i, v) in next.iter_mut().enumerate() {
        *v += dt * (RK4_B[0] * ks[0][i] + RK4_B[1] * ks[1][i] + RK4_B[2] * ks[2][i] + RK4_B[3] * ks[3][i]);
    }
    Ok((next, stages))
}

/// Transposed RK4 step. Given `p_{n+1}`, returns `p_n = S^T p_{n+1}` and the
/// stage multipliers `λ_i`, which are the sensitivities of the step output
/// to perturbations of the stage rates: `δq_{n+1} = Σ_i <λ_i, δ(L Y_i)>` in the
/// operator's inner product.
///
/// `stages` is only checked for presence; the linear step does not need it.
pub fn adjoint_rk4_step<O: LinearOperator + ?Sized>(
    op: &O,
    p_next: &[f64],
    stages: Option<&Stages>,
    dt: f64,
) -> Result<(Vec<f64>, Stages), SolverError> {
    if !(dt > 0.0) {
        return Err(SolverError::NonPositiveStep(dt));
    }
    if stages.is_none() {
        return Err(SolverError::MissingStages(0));
    }
    Ok(adjoint_step_core(op, p_next, dt))
}

fn adjoint_step_core<O: LinearOperator + ?Sized>(op: &O, p: &[f64], dt: f64) -> (Vec<f64>, Stages) {
    let n = p.len();
    let mut lam: Stages = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut mu: Stages = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let coupling = [0.5, 0.5, 1.0];
    for j in (0..4).rev() {
        for i in 0..n {
            lam[j][i] = dt * RK4_B[j] * p[i];
        }
        if j < 3 {
            let a = dt * coupling[j];
            for i in 0..n {
                lam[j][i] += a * mu[j + 1][i];
            }
        }
        op.apply_transpose(&lam[j], &mut mu[j]);
    }
    let mut out = p.to_vec();
    for m in &mu {
        for (o, v) in out.iter_mut().zip(m) {
            *o += v;
        }
    }
    (out, lam)
}

/// Time grid `t_n = n dt`, `n = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Self {
        Self { t_final, n_steps }
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Composite trapezoid weight of step boundary `n`.
    pub fn trapezoid_weight(&self, n: usize) -> f64 {
        if n == 0 || n == self.n_steps {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }

    /// Smallest step count satisfying `dt <= safety h / (speed N²)`.
    pub fn from_cfl(t_final: f64, h_min: f64, speed: f64, order: usize, safety: f64) -> Self {
        let dt_max = safety * h_min / (speed * (order * order) as f64);
        let n = (t_final / dt_max).ceil().max(1.0) as usize;
        Self::new(t_final, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoragePolicy {
    StoreAll,
    /// Keep snapshots every `interval` steps and recompute segments on demand.
    UniformCheckpoint { interval: usize },
}

/// Forward trajectory: snapshots at step boundaries and per-step stage inputs,
/// possibly thinned to checkpoints.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub policy: StoragePolicy,
    snapshots: Vec<Option<Vec<f64>>>,
    stages: Vec<Option<Stages>>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.grid.dt()
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    /// Stored snapshot at step boundary `n`, if kept.
    pub fn stored_snapshot(&self, n: usize) -> Option<&[f64]> {
        self.snapshots.get(n).and_then(|s| s.as_deref())
    }

    pub fn initial(&self) -> &[f64] {
        self.snapshots[0].as_deref().expect("initial snapshot is always stored")
    }

    pub fn final_state(&self) -> &[f64] {
        self.snapshots[self.grid.n_steps]
            .as_deref()
            .expect("final snapshot is always stored")
    }

    /// Snapshot and stages of step `n` (`q_n`, stages of the step `n -> n+1`),
    /// recomputing from the nearest earlier checkpoint when needed.
    pub fn step<O: LinearOperator + ?Sized>(&self, op: &O, n: usize) -> Result<(Vec<f64>, Stages), SolverError> {
        if let (Some(q), Some(st)) = (&self.snapshots[n], &self.stages[n]) {
            return Ok((q.clone(), st.clone()));
        }
        let seg = self.replay_segment(op, n)?;
        let (q, st) = seg.into_iter().find(|(m, _, _)| *m == n).map(|(_, q, s)| (q, s)).unwrap();
        Ok((q, st))
    }

    /// Calls `f(n, q_n, stages_n)` for every step in order, replaying each
    /// checkpoint segment once.
    pub fn for_each_step<O: LinearOperator + ?Sized>(
        &self,
        op: &O,
        f: &mut dyn FnMut(usize, &[f64], &Stages),
    ) -> Result<(), SolverError> {
        let mut n = 0;
        while n < self.grid.n_steps {
            if let (Some(q), Some(st)) = (&self.snapshots[n], &self.stages[n]) {
                f(n, q, st);
                n += 1;
                continue;
            }
            for (m, q, st) in self.replay_segment(op, n)? {
                f(m, &q, &st);
                n = m + 1;
            }
        }
        Ok(())
    }

    /// Recomputes the checkpoint segment containing step `n`, returning
    /// `(step index, q_m, stages_m)` for every step of the segment.
    pub fn replay_segment<O: LinearOperator + ?Sized>(
        &self,
        op: &O,
        n: usize,
    ) -> Result<Vec<(usize, Vec<f64>, Stages)>, SolverError> {
        let start = (0..=n).rev().find(|&m| self.snapshots[m].is_some()).unwrap_or(0);
        let end = ((n + 1)..=self.grid.n_steps)
            .find(|&m| self.snapshots[m].is_some())
            .unwrap_or(self.grid.n_steps);
        let mut q = self.snapshots[start].clone().ok_or(SolverError::MissingStages(n))?;
        let mut out = Vec::with_capacity(end - start);
        for m in start..end {
            let (next, st) = rk4_step(op, &q, self.grid.time(m), self.dt())?;
            check_finite(&next, "state", m + 1)?;
            out.push((m, q, st));
            q = next;
        }
        Ok(out)
    }
}

fn check_finite(q: &[f64], which: &'static str, step: usize) -> Result<(), SolverError> {
    if q.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolverError::NonFinite { which, step })
    }
}

/// Runs RK4 from `q0` over the grid. `observe(n, t_n, q_n)` is called at every
/// step boundary (including 0 and N), so cost integrands can be accumulated
/// without storing every snapshot.
pub fn run_forward<O: LinearOperator + ?Sized>(
    op: &O,
    q0: &[f64],
    grid: TimeGrid,
    policy: StoragePolicy,
    observe: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<Trajectory, SolverError> {
    let dt = grid.dt();
    if !(dt > 0.0) {
        return Err(SolverError::NonPositiveStep(dt));
    }
    let keep = |n: usize| match policy {
        StoragePolicy::StoreAll => Ok(true),
        StoragePolicy::UniformCheckpoint { interval: 0 } => Err(SolverError::ZeroInterval),
        StoragePolicy::UniformCheckpoint { interval } => Ok(n.is_multiple_of(interval) || n == grid.n_steps),
    };
    let store_stages = policy == StoragePolicy::StoreAll;
    check_finite(q0, "state", 0)?;
    let mut snapshots = vec![None; grid.n_steps + 1];
    let mut stages = vec![None; grid.n_steps + 1];
    let mut q = q0.to_vec();
    observe(0, 0.0, &q);
    for n in 0..grid.n_steps {
        let (next, st) = rk4_step(op, &q, grid.time(n), dt)?;
        check_finite(&next, "state", n + 1)?;
        if keep(n)? {
            snapshots[n] = Some(std::mem::take(&mut q));
        }
        if store_stages {
            stages[n] = Some(st);
        }
        q = next;
        observe(n + 1, grid.time(n + 1), &q);
    }
    snapshots[grid.n_steps] = Some(q);
    Ok(Trajectory {
        grid,
        policy,
        snapshots,
        stages,
    })
}

/// Dual trajectory in weighted variables, from `T` back to 0.
#[derive(Debug, Clone)]
pub struct AdjointTrajectory {
    /// `p̂_n` for every step boundary.
    pub snapshots: Vec<Vec<f64>>,
    /// Stage multipliers of step `n -> n+1`.
    pub multipliers: Vec<Stages>,
    /// Identifies the cost specification that produced the injections.
    pub cost_tag: u64,
}

/// Backward sweep with injections between steps:
/// `p̂_N = inject(N, q_N)`, `p̂_n = S^T p̂_{n+1} + inject(n, q_n)`.
///
/// `inject` returns the weighted-variable increment (already multiplied by
/// `M^-1`) or `None` for no injection at that step boundary.
pub fn run_adjoint<O: LinearOperator + ?Sized>(
    op: &O,
    traj: &Trajectory,
    cost_tag: u64,
    inject: &mut dyn FnMut(usize, &[f64]) -> Option<Vec<f64>>,
) -> Result<AdjointTrajectory, SolverError> {
    let n_steps = traj.n_steps();
    let dim = op.dim();
    let mut snapshots = vec![Vec::new(); n_steps + 1];
    let mut multipliers: Vec<Stages> = Vec::with_capacity(n_steps);
    let mut p = inject(n_steps, traj.final_state()).unwrap_or_else(|| vec![0.0; dim]);
    snapshots[n_steps] = p.clone();
    let mut n = n_steps;
    while n > 0 {
        // Snapshots of the segment ending at n, recomputed when checkpointed.
        let segment: Vec<(usize, Vec<f64>)> = match traj.stored_snapshot(n - 1) {
            Some(q) if traj.stages[n - 1].is_some() => vec![(n - 1, q.to_vec())],
            _ => traj
                .replay_segment(op, n - 1)?
                .into_iter()
                .map(|(m, q, _)| (m, q))
                .collect(),
        };
        for (m, q) in segment.into_iter().rev() {
            if m >= n {
                continue;
            }
            let (prev, lam) = adjoint_step_core(op, &p, traj.dt());
            check_finite(&prev, "adjoint", m)?;
            p = prev;
            if let Some(inc) = inject(m, &q) {
                p.iter_mut().zip(&inc).for_each(|(a, b)| *a += b);
            }
            snapshots[m] = p.clone();
            multipliers.push(lam);
            n = m;
        }
    }
    multipliers.reverse();
    Ok(AdjointTrajectory {
        snapshots,
        multipliers,
        cost_tag,
    })
}

/// Source-free backward sweep from terminal data `p̂_N`, returning `p̂_0`.
pub fn adjoint_sweep_homogeneous<O: LinearOperator + ?Sized>(
    op: &O,
    terminal: &[f64],
    grid: TimeGrid,
) -> Result<Vec<f64>, SolverError> {
    let dt = grid.dt();
    if !(dt > 0.0) {
        return Err(SolverError::NonPositiveStep(dt));
    }
    let mut p = terminal.to_vec();
    for n in (0..grid.n_steps).rev() {
        p = adjoint_step_core(op, &p, dt).0;
        check_finite(&p, "adjoint", n)?;
    }
    Ok(p)
}
