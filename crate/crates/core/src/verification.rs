//! Verification harness: finite-difference sweeps, adjoint identity checks,
//! convergence studies, and weak/strong consistency measurements.
//!
//! Every check is deterministic given its seed and reports a [`CheckOutcome`]
//! with the measured value, the threshold, and a PASS/FAIL verdict.

use crate::basis::{gauss_rule, lagrange_values, NodalBasis, QuadratureMode};
use crate::error::{Error, ModelError};
use crate::field::Discretization;
use crate::mesh::{BoundaryKind, Mesh1D};
use crate::models::acoustic::AcousticBoundary;
use crate::models::{
    AcousticVariant, Form, ModelKind, Profile, Signal, SpatialOperator,
};
use crate::objective::CostSpec;
use crate::problem::{ModelSpec, Problem, StepCount};
use crate::time::{adjoint_sweep_homogeneous, StoragePolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

/// Default ε ladder: 1e-2 down to 1e-8 in decades.
pub const DEFAULT_EPSILONS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Result of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckOutcome {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }

    /// A boolean check; `value` records a supporting measurement.
    pub fn flag(name: impl Into<String>, pass: bool, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: f64::NAN,
            pass,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} value={:.3e}", self.name, self.value)?;
        if !self.threshold.is_nan() {
            write!(f, " threshold={:.3e}", self.threshold)?;
        }
        Ok(())
    }
}

/// Writes outcomes as CSV (`check,value,threshold,pass`).
pub fn write_outcomes_csv<W: Write>(outcomes: &[CheckOutcome], out: &mut W) -> io::Result<()> {
    writeln!(out, "check,value,threshold,pass")?;
    for o in outcomes {
        writeln!(out, "{},{:.6e},{:.6e},{}", o.name, o.value, o.threshold, o.pass)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    OneSided,
    Central,
}

fn perturbed(params: &[f64], direction: &[f64], eps: f64) -> Vec<f64> {
    params.iter().zip(direction).map(|(c, d)| c + eps * d).collect()
}

fn cost_at(problem: &Problem, params: &[f64]) -> Result<f64, Error> {
    problem.cost_value(params).map_err(|e| match e {
        Error::Model(err @ ModelError::NonPositive { .. }) => Error::Positivity(err.to_string()),
        other => other,
    })
}

/// Finite-difference directional derivative of the discrete cost.
pub fn fd_directional(
    problem: &Problem,
    params: &[f64],
    direction: &[f64],
    eps: f64,
    scheme: FdScheme,
) -> Result<f64, Error> {
    if !(eps > 0.0) {
        return Err(Error::Positivity(format!("step {eps} must be positive")));
    }
    let plus = cost_at(problem, &perturbed(params, direction, eps))?;
    Ok(match scheme {
        FdScheme::OneSided => (plus - cost_at(problem, params)?) / eps,
        FdScheme::Central => (plus - cost_at(problem, &perturbed(params, direction, -eps))?) / (2.0 * eps),
    })
}

/// `floor(-log10(|fd - ref| / |ref|))`, capped at 16 for exact agreement.
pub fn matched_digits(fd: f64, reference: f64) -> i32 {
    let rel = ((fd - reference) / reference).abs();
    if rel == 0.0 {
        16
    } else {
        (-rel.log10()).floor().min(16.0) as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSweepResult {
    pub epsilons: Vec<f64>,
    pub one_sided: Vec<f64>,
    pub central: Vec<f64>,
    /// `d_di` from one adjoint solve.
    pub reference: f64,
    /// Comparator `d_co`.
    pub comparator: f64,
    pub digits_one_sided: Vec<i32>,
    pub digits_central: Vec<i32>,
}

impl FdSweepResult {
    fn rel(&self, v: f64) -> f64 {
        ((v - self.reference) / self.reference).abs()
    }

    /// Smallest central relative error over the sweep and its ε.
    pub fn best_central(&self) -> (f64, f64) {
        self.central
            .iter()
            .zip(&self.epsilons)
            .map(|(&v, &e)| (self.rel(v), e))
            .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// One-sided matched digits never decrease as ε decreases, up to the
    /// ε with the smallest one-sided error (the roundoff floor).
    pub fn one_sided_monotone(&self) -> bool {
        let errs: Vec<f64> = self.one_sided.iter().map(|&v| self.rel(v)).collect();
        let floor = errs
            .iter()
            .enumerate()
            .fold(0, |best, (i, &e)| if e < errs[best] { i } else { best });
        self.digits_one_sided[..=floor].windows(2).all(|w| w[1] >= w[0])
    }

    pub fn write_csv<W: Write>(&self, header: &[String], out: &mut W) -> io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# d_di={:.15e} d_co={:.15e}", self.reference, self.comparator)?;
        writeln!(out, "epsilon,one_sided,central,digits_one_sided,digits_central")?;
        for i in 0..self.epsilons.len() {
            writeln!(
                out,
                "{:.1e},{:.15e},{:.15e},{},{}",
                self.epsilons[i], self.one_sided[i], self.central[i], self.digits_one_sided[i], self.digits_central[i]
            )?;
        }
        Ok(())
    }
}

/// FD sweep against the adjoint directional derivative.
pub fn fd_sweep(
    problem: &Problem,
    params: &[f64],
    direction: &[f64],
    epsilons: &[f64],
) -> Result<FdSweepResult, Error> {
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Positivity("epsilons must be strictly decreasing".into()));
    }
    let (base, report) = problem.gradient(params)?;
    let reference = report.directional_derivative(direction)?;
    let comparator = report.comparator_directional(direction)?;
    let mut one_sided = Vec::new();
    let mut central = Vec::new();
    for &eps in epsilons {
        let plus = cost_at(problem, &perturbed(params, direction, eps))?;
        let minus = cost_at(problem, &perturbed(params, direction, -eps))?;
        one_sided.push((plus - base) / eps);
        central.push((plus - minus) / (2.0 * eps));
    }
    Ok(FdSweepResult {
        epsilons: epsilons.to_vec(),
        digits_one_sided: one_sided.iter().map(|&v| matched_digits(v, reference)).collect(),
        digits_central: central.iter().map(|&v| matched_digits(v, reference)).collect(),
        one_sided,
        central,
        reference,
        comparator,
    })
}

/// Seeded uniform values in [-1, 1].
pub fn random_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Normalized defect `|<L q, p>_W - <q, L* p>_W| / (‖q‖_W ‖p‖_W)` with `L`
/// taken from `state` and `L*` from `adjoint`, for seeded random `q`, `p`.
pub fn adjoint_identity_defect(
    state: &dyn SpatialOperator,
    adjoint: &dyn SpatialOperator,
    seed: u64,
) -> f64 {
    let n = state.len();
    let q = random_vector(n, seed);
    let p = random_vector(n, seed.wrapping_mul(6364136223846793005).wrapping_add(1));
    let mut lq = vec![0.0; n];
    let mut lp = vec![0.0; n];
    state.rate(&q, None, &mut lq);
    adjoint.adjoint_rate(&p, &mut lp);
    let lhs = state.weighted_inner(&lq, &p);
    let rhs = state.weighted_inner(&q, &lp);
    let norm = (state.weighted_inner(&q, &q) * state.weighted_inner(&p, &p)).sqrt();
    (lhs - rhs).abs() / norm
}

/// Adjoint identity check of one operator against its own adjoint.
pub fn adjoint_identity_check(op: &dyn SpatialOperator, seed: u64) -> f64 {
    adjoint_identity_defect(op, op, seed)
}

/// Variable-coefficient operator instances used by the operator-level checks.
/// Boundaries are homogeneous; `periodic` selects a periodic mesh.
pub fn test_operator(
    kind: ModelKind,
    k: usize,
    order: usize,
    quadrature: QuadratureMode,
    form: Form,
    periodic: bool,
) -> Result<Box<dyn SpatialOperator>, Error> {
    test_operator_alpha(kind, k, order, quadrature, form, periodic, 0.0)
}

/// As [`test_operator`], with the advection flux blend `alpha`.
pub fn test_operator_alpha(
    kind: ModelKind,
    k: usize,
    order: usize,
    quadrature: QuadratureMode,
    form: Form,
    periodic: bool,
    alpha: f64,
) -> Result<Box<dyn SpatialOperator>, Error> {
    let bc = match (periodic, kind) {
        (true, _) => [BoundaryKind::Periodic; 2],
        (false, ModelKind::Advection) => [BoundaryKind::InflowDirichlet; 2],
        (false, ModelKind::Acoustic) => [BoundaryKind::TractionLike, BoundaryKind::InflowDirichlet],
        (false, ModelKind::Maxwell1d) => [BoundaryKind::TractionLike; 2],
    };
    let sine = |offset, amplitude, phase| Profile::Sine {
        offset,
        amplitude,
        k: 2.0,
        phase,
    };
    let model = match kind {
        ModelKind::Advection => ModelSpec::Advection {
            speed: sine(1.0, 0.4, 0.3),
            alpha,
            inflow: Signal::Zero,
            initial: Profile::Const(0.0),
            forcing: None,
        },
        ModelKind::Acoustic => ModelSpec::Acoustic {
            variant: AcousticVariant::Continuous,
            density: sine(1.5, 0.5, 0.7),
            speed: sine(1.0, 0.3, 0.1),
            initial_e: Profile::Const(0.0),
            initial_v: Profile::Const(0.0),
            boundary: [AcousticBoundary::default(); 2],
            forcing: None,
        },
        ModelKind::Maxwell1d => ModelSpec::Maxwell {
            permeability: sine(1.2, 0.4, 0.0),
            permittivity: Profile::Step {
                left: 1.0,
                right: 2.5,
                interface: 0.4,
            },
            currents: [Signal::Zero; 2],
            initial_h: Profile::Const(0.0),
            initial_e: Profile::Const(0.0),
        },
    };
    let problem = Problem::new(
        model,
        Mesh1D::uniform(0.0, 1.0, k, bc)?,
        NodalBasis::new(order, quadrature)?,
        form,
        1.0,
        StepCount::Fixed(1),
        CostSpec::energy(0),
        StoragePolicy::StoreAll,
    )?;
    problem.operator(&problem.default_params())
}

/// Dense matrix (row-major) of a linear map given by its action.
pub fn assemble_matrix(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..n {
        x[j] = 1.0;
        apply(&x, &mut y);
        for i in 0..n {
            m[i * n + j] = y[i];
        }
        x[j] = 0.0;
    }
    m
}

/// Max-norm of `a - b`, relative to the max-norm of `a`.
fn rel_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn residual_matrix(op: &dyn SpatialOperator) -> Vec<f64> {
    assemble_matrix(op.len(), |x, y| op.residual(x, None, y))
}

fn adjoint_matrix(op: &dyn SpatialOperator) -> Vec<f64> {
    assemble_matrix(op.len(), |x, y| op.adjoint_residual(x, y))
}

fn transpose(m: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = m[i * n + j];
        }
    }
    t
}

/// Relative max-norm differences between assembled operator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakStrongReport {
    /// `A_weak` vs `A_strong` under over-integration.
    pub weak_vs_strong_over: f64,
    /// `A_weak` vs `A_strong` under GLL collocation (measurement only).
    pub weak_vs_strong_collocation: f64,
    /// `A_strong^T` vs the weak-form adjoint assembly, per mode (collocation, over-integration).
    pub strong_transpose_vs_adjoint: [f64; 2],
    /// `A_weak^T` vs the strong-form adjoint assembly, per mode.
    pub weak_transpose_vs_adjoint: [f64; 2],
    /// Weak-form adjoint of the strong operator vs strong-form adjoint of the
    /// weak operator under over-integration.
    pub adjoint_forms_over: f64,
}

/// Weak/strong duality measurements for one model and discretization.
pub fn weak_strong_consistency(kind: ModelKind, k: usize, order: usize) -> Result<WeakStrongReport, Error> {
    let modes = [QuadratureMode::Collocation, QuadratureMode::exact_for(order)];
    let mut strong_t = [0.0; 2];
    let mut weak_t = [0.0; 2];
    let mut diffs = [0.0; 2];
    let mut adjoint_forms = 0.0;
    for (m, &mode) in modes.iter().enumerate() {
        let s = test_operator(kind, k, order, mode, Form::Strong, false)?;
        let w = test_operator(kind, k, order, mode, Form::Weak, false)?;
        let n = s.len();
        let (as_, aw) = (residual_matrix(s.as_ref()), residual_matrix(w.as_ref()));
        let (adj_s, adj_w) = (adjoint_matrix(s.as_ref()), adjoint_matrix(w.as_ref()));
        strong_t[m] = rel_max_diff(&transpose(&as_, n), &adj_s);
        weak_t[m] = rel_max_diff(&transpose(&aw, n), &adj_w);
        diffs[m] = rel_max_diff(&as_, &aw);
        if m == 1 {
            adjoint_forms = rel_max_diff(&adj_s, &adj_w);
        }
    }
    Ok(WeakStrongReport {
        weak_vs_strong_over: diffs[1],
        weak_vs_strong_collocation: diffs[0],
        strong_transpose_vs_adjoint: strong_t,
        weak_transpose_vs_adjoint: weak_t,
        adjoint_forms_over: adjoint_forms,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub k: usize,
    pub n_steps: usize,
    pub state_error: f64,
    pub adjoint_error: f64,
    /// Observed orders against the previous level (NaN on the first level).
    pub state_rate: f64,
    pub adjoint_rate: f64,
}

/// Periodic smooth-solution setup used by the convergence study.
///
/// Advection: `u = sin(2π(x - t))`, adjoint `p(x,0) = φ(x + T)`.
/// Acoustic: `e = v = sin(2π(x + t))`, adjoint `p(x,0) = φ(x - T)`.
/// Maxwell: `H = E = sin(2π(x - t))`, adjoint `p(x,0) = φ(x + T)`.
/// The adjoint terminal data `φ` is `cos(2πx)` in every component.
fn convergence_problem(
    kind: ModelKind,
    k: usize,
    order: usize,
    alpha: f64,
    t_final: f64,
    safety: f64,
) -> Result<Problem, Error> {
    let wave = |phase: f64| Profile::Sine {
        offset: 0.0,
        amplitude: 1.0,
        k: 2.0,
        phase,
    };
    let model = match kind {
        ModelKind::Advection => ModelSpec::Advection {
            speed: Profile::Const(1.0),
            alpha,
            inflow: Signal::Zero,
            initial: wave(0.0),
            forcing: None,
        },
        ModelKind::Acoustic => ModelSpec::Acoustic {
            variant: AcousticVariant::Continuous,
            density: Profile::Const(1.0),
            speed: Profile::Const(1.0),
            initial_e: wave(0.0),
            initial_v: wave(0.0),
            boundary: [AcousticBoundary::default(); 2],
            forcing: None,
        },
        ModelKind::Maxwell1d => ModelSpec::Maxwell {
            permeability: Profile::Const(1.0),
            permittivity: Profile::Const(1.0),
            currents: [Signal::Zero; 2],
            initial_h: wave(0.0),
            initial_e: wave(0.0),
        },
    };
    Problem::new(
        model,
        Mesh1D::uniform(0.0, 1.0, k, [BoundaryKind::Periodic; 2])?,
        NodalBasis::new(order, QuadratureMode::exact_for(order))?,
        Form::Strong,
        t_final,
        StepCount::Cfl(safety),
        CostSpec::energy(0),
        StoragePolicy::StoreAll,
    )
}

/// L2 error of a nodal dG field against `exact`, per component, summed in
/// quadrature with an `order + 4` point Gauss rule.
pub fn l2_error(disc: &Discretization, q: &[f64], exact: &[&dyn Fn(f64) -> f64]) -> f64 {
    let np = disc.n_nodes();
    let k = disc.n_elements();
    let (pts, wts) = gauss_rule(disc.basis.order() + 4).expect("Gauss rule");
    let interp: Vec<Vec<f64>> = pts.iter().map(|&x| lagrange_values(disc.basis.nodes(), x)).collect();
    let mut total = 0.0;
    for (c, f) in exact.iter().enumerate() {
        for e in 0..k {
            let blk = &q[(c * k + e) * np..(c * k + e + 1) * np];
            let jac = disc.mesh.jacobian(e);
            for ((xi, w), l) in pts.iter().zip(&wts).zip(&interp) {
                let uh: f64 = l.iter().zip(blk).map(|(a, b)| a * b).sum();
                let d = uh - f(disc.mesh.map_point(e, *xi));
                total += jac * w * d * d;
            }
        }
    }
    total.sqrt()
}

/// State and adjoint L2 errors at the end of a smooth periodic run.
pub fn convergence_level(
    kind: ModelKind,
    k: usize,
    order: usize,
    alpha: f64,
    t_final: f64,
    safety: f64,
) -> Result<(usize, f64, f64), Error> {
    let problem = convergence_problem(kind, k, order, alpha, t_final, safety)?;
    let run = problem.forward(&problem.default_params())?;
    let shift = match kind {
        ModelKind::Acoustic => t_final,
        _ => -t_final,
    };
    let state_exact = move |x: f64| (2.0 * PI * (x + shift)).sin();
    let n_comp = run.operator.n_components();
    let exact: Vec<&dyn Fn(f64) -> f64> = vec![&state_exact; n_comp];
    let state_error = l2_error(&problem.disc, run.trajectory.final_state(), &exact);

    let phi = |x: f64| (2.0 * PI * x).cos();
    let terminal: Vec<f64> = (0..n_comp).flat_map(|_| problem.disc.sample(phi)).collect();
    let p0 = adjoint_sweep_homogeneous(run.operator.as_ref(), &terminal, problem.grid)?;
    let adjoint_exact = move |x: f64| phi(x - shift);
    let exact: Vec<&dyn Fn(f64) -> f64> = vec![&adjoint_exact; n_comp];
    let adjoint_error = l2_error(&problem.disc, &p0, &exact);
    Ok((problem.grid.n_steps, state_error, adjoint_error))
}

/// Convergence table over `orders` × `levels` (element counts).
pub fn convergence_study(
    kind: ModelKind,
    orders: &[usize],
    levels: &[usize],
    alpha: f64,
) -> Result<Vec<ConvergenceRow>, Error> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &order in orders {
        for (l, &k) in levels.iter().enumerate() {
            let (n_steps, state_error, adjoint_error) = convergence_level(kind, k, order, alpha, 1.0, 0.25)?;
            let (state_rate, adjoint_rate) = if l == 0 {
                (f64::NAN, f64::NAN)
            } else {
                let prev = rows.last().expect("previous level");
                let ratio = (k as f64 / prev.k as f64).ln();
                (
                    (prev.state_error / state_error).ln() / ratio,
                    (prev.adjoint_error / adjoint_error).ln() / ratio,
                )
            };
            rows.push(ConvergenceRow {
                order,
                k,
                n_steps,
                state_error,
                adjoint_error,
                state_rate,
                adjoint_rate,
            });
        }
    }
    Ok(rows)
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], header: &[String], out: &mut W) -> io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "order,K,n_steps,state_error,state_rate,adjoint_error,adjoint_rate")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.6e},{:.3},{:.6e},{:.3}",
            r.order, r.k, r.n_steps, r.state_error, r.state_rate, r.adjoint_error, r.adjoint_rate
        )?;
    }
    Ok(())
}

/// Worst normalized adjoint-identity defect over `seeds` for one operator
/// configuration, as a check against `threshold`.
pub fn adjoint_identity_outcome(
    kind: ModelKind,
    k: usize,
    order: usize,
    quadrature: QuadratureMode,
    periodic: bool,
    seeds: std::ops::Range<u64>,
    threshold: f64,
) -> Result<CheckOutcome, Error> {
    let op = test_operator(kind, k, order, quadrature, Form::Strong, periodic)?;
    let worst = seeds
        .map(|s| adjoint_identity_check(op.as_ref(), s))
        .fold(0.0f64, f64::max);
    let mode = if quadrature.is_collocation() { "collocation" } else { "over" };
    let bc = if periodic { "periodic" } else { "bounded" };
    Ok(CheckOutcome::at_most(
        format!("adjoint_identity/{kind}/N={order}/K={k}/{mode}/{bc}"),
        worst,
        threshold,
    ))
}

/// FD sweep of `problem` along `direction` with the acceptance checks:
/// central relative error at the best ε, and monotone one-sided digits.
pub fn fd_outcomes(
    problem: &Problem,
    params: &[f64],
    direction: &[f64],
    epsilons: &[f64],
    label: &str,
) -> Result<(FdSweepResult, Vec<CheckOutcome>), Error> {
    let sweep = fd_sweep(problem, params, direction, epsilons)?;
    let (err, _) = sweep.best_central();
    let digits = sweep.digits_one_sided.iter().copied().max().unwrap_or(0);
    let outcomes = vec![
        CheckOutcome::at_most(format!("fd_central/{label}"), err, 1e-7),
        CheckOutcome::flag(format!("fd_one_sided_monotone/{label}"), sweep.one_sided_monotone(), digits as f64),
    ];
    Ok((sweep, outcomes))
}

/// Checks of a weak/strong report at tolerance `tol`.
pub fn weak_strong_outcomes(report: &WeakStrongReport, label: &str, tol: f64) -> Vec<CheckOutcome> {
    let mut out = vec![
        CheckOutcome::at_most(format!("weak_vs_strong_over/{label}"), report.weak_vs_strong_over, tol),
        CheckOutcome::at_most(format!("adjoint_forms_over/{label}"), report.adjoint_forms_over, tol),
    ];
    for (m, mode) in ["collocation", "over"].iter().enumerate() {
        out.push(CheckOutcome::at_most(
            format!("strong_transpose_vs_weak_adjoint/{label}/{mode}"),
            report.strong_transpose_vs_adjoint[m],
            tol,
        ));
        out.push(CheckOutcome::at_most(
            format!("weak_transpose_vs_strong_adjoint/{label}/{mode}"),
            report.weak_transpose_vs_adjoint[m],
            tol,
        ));
    }
    out
}

/// Relative comparator gap `|d_co - d_di| / |d_di|` along the smooth direction
/// for the canonical configuration at each element count.
pub fn comparator_gaps(
    kind: ModelKind,
    levels: &[usize],
    order: usize,
    quadrature: QuadratureMode,
) -> Result<Vec<f64>, Error> {
    levels
        .iter()
        .map(|&k| {
            let problem = Problem::canonical(kind, k, order, quadrature)?;
            let direction = problem.direction(crate::problem::Direction::Smooth, 0)?;
            let (_, report) = problem.gradient(&problem.default_params())?;
            let di = report.directional_derivative(&direction)?;
            let co = report.comparator_directional(&direction)?;
            Ok(((co - di) / di).abs())
        })
        .collect()
}

/// Observed-order checks (`>= order + 0.5`) for every refinement step.
pub fn convergence_outcomes(kind: ModelKind, rows: &[ConvergenceRow]) -> Vec<CheckOutcome> {
    rows.iter()
        .filter(|r| !r.state_rate.is_nan())
        .flat_map(|r| {
            let min = r.order as f64 + 0.5;
            [
                CheckOutcome::at_least(format!("state_rate/{kind}/N={}/K={}", r.order, r.k), r.state_rate, min),
                CheckOutcome::at_least(format!("adjoint_rate/{kind}/N={}/K={}", r.order, r.k), r.adjoint_rate, min),
            ]
        })
        .collect()
}
