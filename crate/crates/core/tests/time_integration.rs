use adg_core::error::SolverError;
use adg_core::models::{continuous_dof_count, AdvectionOperator, Form, Profile, Signal, SpatialOperator};
use adg_core::time::{
    adjoint_rk4_step, adjoint_sweep_homogeneous, rk4_step, rk4_step_homogeneous, run_adjoint,
    run_forward, LinearOperator, StoragePolicy, TimeGrid, RK4_B,
};
use adg_core::verification::random_vector;
use adg_core::{BoundaryKind, Discretization, Mesh1D, NodalBasis, QuadratureMode};
use proptest::prelude::*;

/// Dense `q' = L q + s(t)` with Euclidean transpose.
struct Dense {
    n: usize,
    l: Vec<f64>,
    source: Option<Box<dyn Fn(f64, usize) -> f64>>,
}

impl Dense {
    fn new(n: usize, l: Vec<f64>) -> Self {
        Self { n, l, source: None }
    }
}

impl LinearOperator for Dense {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, q: &[f64], t: f64, out: &mut [f64]) {
        self.apply_homogeneous(q, out);
        if let Some(s) = &self.source {
            for (i, o) in out.iter_mut().enumerate() {
                *o += s(t, i);
            }
        }
    }

    fn apply_homogeneous(&self, q: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = (0..self.n).map(|j| self.l[i * self.n + j] * q[j]).sum();
        }
    }

    fn apply_transpose(&self, p: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = (0..self.n).map(|j| self.l[j * self.n + i] * p[j]).sum();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn zero_operator_with_constant_source() {
    let mut op = Dense::new(3, vec![0.0; 9]);
    op.source = Some(Box::new(|_, i| [1.0, -2.0, 0.5][i]));
    let (next, stages) = rk4_step(&op, &[1.0, 1.0, 1.0], 0.3, 0.1).unwrap();
    for (i, s) in [1.0, -2.0, 0.5].iter().enumerate() {
        assert!((next[i] - (1.0 + 0.1 * s)).abs() < 1e-15);
    }
    assert_eq!(stages[0], vec![1.0, 1.0, 1.0]);
}

#[test]
fn nonpositive_step_is_rejected() {
    let op = Dense::new(1, vec![0.0]);
    assert_eq!(rk4_step(&op, &[1.0], 0.0, 0.0).unwrap_err(), SolverError::NonPositiveStep(0.0));
    assert!(adjoint_rk4_step(&op, &[1.0], None, 0.1).is_err());
}

#[test]
fn zero_operator_adjoint_step() {
    let op = Dense::new(2, vec![0.0; 4]);
    let (_, stages) = rk4_step_homogeneous(&op, &[0.0, 0.0], 0.2).unwrap();
    let (p, lam) = adjoint_rk4_step(&op, &[3.0, -1.0], Some(&stages), 0.2).unwrap();
    assert_eq!(p, vec![3.0, -1.0]);
    for (j, l) in lam.iter().enumerate() {
        assert!((l[0] - 0.2 * RK4_B[j] * 3.0).abs() < 1e-15);
        assert!((l[1] + 0.2 * RK4_B[j]).abs() < 1e-15);
    }
}

#[test]
fn stability_polynomial() {
    for lambda in [-1.0, -2.5, 0.7, -0.1] {
        let op = Dense::new(1, vec![lambda]);
        let dt = 0.3;
        let z: f64 = lambda * dt;
        let (next, _) = rk4_step_homogeneous(&op, &[1.0], dt).unwrap();
        let r = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((next[0] - r).abs() < 1e-15);
    }
}

#[test]
fn global_error_is_fourth_order() {
    let op = Dense::new(2, vec![0.0, 1.0, -1.0, 0.0]);
    let t_final = 2.0f64;
    let exact = [t_final.cos(), -t_final.sin()];
    let errs: Vec<f64> = [20, 40, 80]
        .iter()
        .map(|&n| {
            let traj = run_forward(&op, &[1.0, 0.0], TimeGrid::new(t_final, n), StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap();
            let q = traj.final_state();
            ((q[0] - exact[0]).powi(2) + (q[1] - exact[1]).powi(2)).sqrt()
        })
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 4.0).abs() < 0.1, "rate {rate}");
    }
}

fn random_dense(n: usize, seed: u64) -> Dense {
    Dense::new(n, random_vector(n * n, seed))
}

#[test]
fn adjoint_step_is_dense_transpose() {
    let n = 6;
    let op = random_dense(n, 11);
    let dt = 0.15;
    let mut s = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let (col, _) = rk4_step_homogeneous(&op, &e, dt).unwrap();
        for i in 0..n {
            s[i * n + j] = col[i];
        }
    }
    let p_next = random_vector(n, 12);
    let (_, stages) = rk4_step_homogeneous(&op, &p_next, dt).unwrap();
    let (p, _) = adjoint_rk4_step(&op, &p_next, Some(&stages), dt).unwrap();
    for j in 0..n {
        let expect: f64 = (0..n).map(|i| s[i * n + j] * p_next[i]).sum();
        assert!((p[j] - expect).abs() < 1e-13, "{} vs {}", p[j], expect);
    }
}

#[test]
fn stage_multipliers_give_operator_sensitivity() {
    let n = 5;
    let op = random_dense(n, 21);
    let dl = random_vector(n * n, 22);
    let q = random_vector(n, 23);
    let p_next = random_vector(n, 24);
    let dt = 0.1;
    let (_, stages) = rk4_step_homogeneous(&op, &q, dt).unwrap();
    let (_, lam) = adjoint_rk4_step(&op, &p_next, Some(&stages), dt).unwrap();
    let predicted: f64 = (0..4)
        .map(|j| {
            let mut v = vec![0.0; n];
            Dense::new(n, dl.clone()).apply_homogeneous(&stages[j], &mut v);
            dot(&lam[j], &v)
        })
        .sum();
    let eps = 1e-5;
    let shifted = |s: f64| {
        let l: Vec<f64> = op.l.iter().zip(&dl).map(|(a, b)| a + s * b).collect();
        dot(&p_next, &rk4_step_homogeneous(&Dense::new(n, l), &q, dt).unwrap().0)
    };
    let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
    assert!((fd - predicted).abs() < 1e-9 * predicted.abs().max(1.0));
}

#[test]
fn duality_identity_over_trajectory() {
    let n = 4;
    let mut op = random_dense(n, 31);
    op.source = Some(Box::new(|t, i| (t * (i as f64 + 1.0)).sin()));
    let grid = TimeGrid::new(1.0, 25);
    let q0 = random_vector(n, 32);
    let pn = random_vector(n, 33);
    let traj = run_forward(&op, &q0, grid, StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap();
    let adj = run_adjoint(&op, &traj, 0, &mut |m, _| (m == grid.n_steps).then(|| pn.clone())).unwrap();
    let mut pairing = 0.0;
    for (step, lam) in adj.multipliers.iter().enumerate() {
        for (j, l) in lam.iter().enumerate() {
            let t = grid.time(step) + [0.0, 0.5, 0.5, 1.0][j] * grid.dt();
            let s: Vec<f64> = (0..n).map(|i| (t * (i as f64 + 1.0)).sin()).collect();
            pairing += dot(l, &s);
        }
    }
    let lhs = dot(traj.final_state(), &adj.snapshots[grid.n_steps]) - dot(&q0, &adj.snapshots[0]);
    assert!((lhs - pairing).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} vs {pairing}");
}

fn advection(k: usize, order: usize, inflow: Signal) -> AdvectionOperator {
    let disc = Discretization::new(
        Mesh1D::uniform(0.0, 1.0, k, [BoundaryKind::InflowDirichlet; 2]).unwrap(),
        NodalBasis::new(order, QuadratureMode::Collocation).unwrap(),
    );
    let n = continuous_dof_count(&disc);
    AdvectionOperator::new(disc, &vec![1.0; n], 0.0, Form::Strong, inflow, None).unwrap()
}

#[test]
fn zero_data_gives_zero_trajectories() {
    let op = advection(4, 2, Signal::Zero);
    let grid = TimeGrid::new(0.5, 20);
    let zero = vec![0.0; op.len()];
    let traj = run_forward(&op, &zero, grid, StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap();
    traj.for_each_step(&op, &mut |_, q, st| {
        assert!(q.iter().all(|&v| v == 0.0));
        assert!(st.iter().flatten().all(|&v| v == 0.0));
    })
    .unwrap();
    let adj = run_adjoint(&op, &traj, 0, &mut |_, _| None).unwrap();
    assert!(adj.snapshots.iter().flatten().all(|&v| v == 0.0));
    assert!(adj.multipliers.iter().flatten().flatten().all(|&v| v == 0.0));
}

#[test]
fn checkpointed_run_matches_store_all_bitwise() {
    let op = advection(5, 3, Signal::Pulse { amplitude: 0.5, duration: 0.4 });
    let q0 = op.disc().sample(|x| Profile::Gauss { amplitude: 1.0, center: 0.3, width: 0.1, offset: 0.0 }.eval(x));
    let grid = TimeGrid::new(0.6, 37);
    let full = run_forward(&op, &q0, grid, StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap();
    for interval in [1, 4, 10, 50] {
        let cp = run_forward(&op, &q0, grid, StoragePolicy::UniformCheckpoint { interval }, &mut |_, _, _| {}).unwrap();
        assert_eq!(cp.final_state(), full.final_state());
        let mut seen = 0;
        cp.for_each_step(&op, &mut |n, q, st| {
            let (qf, sf) = full.step(&op, n).unwrap();
            assert_eq!(q, &qf[..]);
            assert_eq!(st, &sf);
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, grid.n_steps);
        let inj = |m: usize, q: &[f64]| Some(q.iter().map(|v| v * (m as f64 + 1.0)).collect());
        let a = run_adjoint(&op, &full, 7, &mut |m, q| inj(m, q)).unwrap();
        let b = run_adjoint(&op, &cp, 7, &mut |m, q| inj(m, q)).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.multipliers, b.multipliers);
    }
    assert_eq!(
        run_forward(&op, &q0, grid, StoragePolicy::UniformCheckpoint { interval: 0 }, &mut |_, _, _| {}).unwrap_err(),
        SolverError::ZeroInterval
    );
}

#[test]
fn non_finite_state_is_reported() {
    let op = Dense::new(1, vec![1e200]);
    let err = run_forward(&op, &[1e200], TimeGrid::new(1.0, 4), StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap_err();
    assert_eq!(err, SolverError::NonFinite { which: "state", step: 1 });
}

#[test]
fn advection_adjoint_moves_left() {
    let op = advection(20, 3, Signal::Zero);
    let disc = op.disc().clone();
    let terminal = disc.sample(|x| (-((x - 0.7) / 0.08).powi(2)).exp());
    let center = |p: &[f64]| {
        let w: Vec<f64> = p.iter().map(|v| v * v).collect();
        dot(&w, disc.coords()) / w.iter().sum::<f64>()
    };
    let grid = TimeGrid::new(0.3, 120);
    let p0 = adjoint_sweep_homogeneous(&op, &terminal, grid).unwrap();
    let (c_t, c_0) = (center(&terminal), center(&p0));
    assert!((c_t - 0.7).abs() < 1e-3);
    assert!((c_0 - 0.4).abs() < 0.02, "center moved to {c_0}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn forward_map_is_linear(seed in 0u64..1000, k in 2usize..6, order in 1usize..4) {
        let op = advection(k, order, Signal::Zero);
        let grid = TimeGrid::new(0.2, 10);
        let a = random_vector(op.len(), seed);
        let b = random_vector(op.len(), seed + 1);
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let run = |q: &[f64]| run_forward(&op, q, grid, StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap().final_state().to_vec();
        let (qa, qb, qs) = (run(&a), run(&b), run(&sum));
        for i in 0..qs.len() {
            prop_assert!((qs[i] - qa[i] - qb[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_sweep_is_trajectory_transpose(seed in 0u64..1000, n_steps in 1usize..12) {
        let op = advection(3, 2, Signal::Zero);
        let grid = TimeGrid::new(0.1, n_steps);
        let q0 = random_vector(op.len(), seed);
        let pn = random_vector(op.len(), seed + 7);
        let traj = run_forward(&op, &q0, grid, StoragePolicy::StoreAll, &mut |_, _, _| {}).unwrap();
        let p0 = adjoint_sweep_homogeneous(&op, &pn, grid).unwrap();
        let lhs = op.weighted_inner(traj.final_state(), &pn);
        let rhs = op.weighted_inner(&q0, &p0);
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }
}
