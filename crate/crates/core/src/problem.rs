//! A complete experiment: model, discretization, time grid, cost, and the
//! forward / adjoint / gradient pipeline on top of them.

use crate::basis::{NodalBasis, QuadratureMode};
use crate::error::{Error, ModelError};
use crate::field::Discretization;
use crate::mesh::{BoundaryKind, Mesh1D};
use crate::models::acoustic::AcousticBoundary;
use crate::models::maxwell::current_sides;
use crate::models::{
    continuous_dof_coords, AcousticOperator, AcousticVariant, AdvectionOperator, Form, KernelForm,
    MaxwellOperator, ModelKind, ParamLayout, Profile, Signal, SpatialOperator,
};
use crate::objective::{
    assemble_gradient, parameter_locations, solve_adjoint, Cost, CostSpec, GradientReport,
};
use crate::time::{run_forward, StoragePolicy, TimeGrid, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Model kind with its coefficients, initial data, and boundary data.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Advection {
        speed: Profile,
        alpha: f64,
        inflow: Signal,
        initial: Profile,
        forcing: Option<(Profile, Signal)>,
    },
    Acoustic {
        variant: AcousticVariant,
        density: Profile,
        speed: Profile,
        initial_e: Profile,
        initial_v: Profile,
        boundary: [AcousticBoundary; 2],
        forcing: Option<(Profile, Signal)>,
    },
    Maxwell {
        permeability: Profile,
        permittivity: Profile,
        /// Surface currents on the left and right ends.
        currents: [Signal; 2],
        initial_h: Profile,
        initial_e: Profile,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Advection { .. } => ModelKind::Advection,
            ModelSpec::Acoustic { .. } => ModelKind::Acoustic,
            ModelSpec::Maxwell { .. } => ModelKind::Maxwell1d,
        }
    }
}

/// How the number of time steps is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepCount {
    Fixed(usize),
    /// `dt <= safety h_min / (max speed N²)`.
    Cfl(f64),
}

/// Direction presets for directional derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `sin(πs) cos(πs/2)` with `s` the location rescaled to [0, 1].
    Smooth,
    /// Unit coefficient at the middle dof.
    Pointwise,
    /// Seeded uniform values in [-1, 1].
    Random,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Smooth => "smooth",
            Direction::Pointwise => "pointwise",
            Direction::Random => "random",
        })
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "smooth" => Ok(Direction::Smooth),
            "pointwise" => Ok(Direction::Pointwise),
            "random" => Ok(Direction::Random),
            other => Err(format!("unknown direction preset '{other}'")),
        }
    }
}

/// Result of one forward solve.
pub struct ForwardRun {
    pub operator: Box<dyn SpatialOperator>,
    pub trajectory: Trajectory,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub model: ModelSpec,
    pub disc: Arc<Discretization>,
    pub grid: TimeGrid,
    pub form: Form,
    pub cost: CostSpec,
    pub storage: StoragePolicy,
}

impl Problem {
    /// Builds the problem and validates it against every module precondition.
    pub fn new(
        model: ModelSpec,
        mesh: Mesh1D,
        basis: NodalBasis,
        form: Form,
        t_final: f64,
        steps: StepCount,
        cost: CostSpec,
        storage: StoragePolicy,
    ) -> Result<Self, Error> {
        let disc = Discretization::new(mesh, basis);
        let mut problem = Self {
            model,
            disc,
            grid: TimeGrid::new(t_final, 1),
            form,
            cost,
            storage,
        };
        if !(t_final > 0.0) {
            return Err(crate::error::SolverError::NonPositiveStep(t_final).into());
        }
        problem.grid = match steps {
            StepCount::Fixed(0) => return Err(crate::error::SolverError::NonPositiveStep(0.0).into()),
            StepCount::Fixed(n) => TimeGrid::new(t_final, n),
            StepCount::Cfl(safety) => {
                let speed = problem.probe_speed()?;
                TimeGrid::from_cfl(
                    t_final,
                    problem.disc.mesh.min_width(),
                    speed,
                    problem.disc.basis.order(),
                    safety,
                )
            }
        };
        let op = problem.operator(&problem.default_params())?;
        problem
            .cost
            .validate(problem.kind(), op.n_components(), op.len(), problem.grid.n_steps)?;
        Ok(problem)
    }

    /// Canonical configuration of a model on `[0, 1]` with `k` elements, T = 1.
    pub fn canonical(kind: ModelKind, k: usize, order: usize, quadrature: QuadratureMode) -> Result<Self, Error> {
        let (model, bc, cost) = canonical_parts(kind);
        Self::new(
            model,
            Mesh1D::uniform(0.0, 1.0, k, bc)?,
            NodalBasis::new(order, quadrature)?,
            Form::Strong,
            1.0,
            StepCount::Cfl(0.25),
            cost,
            StoragePolicy::StoreAll,
        )
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    fn probe_speed(&self) -> Result<f64, Error> {
        Ok(self.operator(&self.default_params())?.max_wave_speed())
    }

    /// Kernel form that is exact for the active quadrature.
    pub fn kernel_form(&self) -> KernelForm {
        if self.disc.basis.mode().is_collocation() {
            KernelForm::Simplified
        } else {
            KernelForm::Full
        }
    }

    /// Name of the differentiated parameter.
    pub fn parameter_name(&self) -> &'static str {
        match self.kind() {
            ModelKind::Advection => "a",
            ModelKind::Acoustic => "c",
            ModelKind::Maxwell1d => "J_s",
        }
    }

    /// Parameter values implied by the model's profiles and signals.
    pub fn default_params(&self) -> Vec<f64> {
        let disc = &self.disc;
        match &self.model {
            ModelSpec::Advection { speed, .. } => continuous_dof_coords(disc)
                .iter()
                .map(|&x| speed.eval(x))
                .collect(),
            ModelSpec::Acoustic { variant, speed, .. } => match variant {
                AcousticVariant::Continuous => continuous_dof_coords(disc)
                    .iter()
                    .map(|&x| speed.eval(x))
                    .collect(),
                AcousticVariant::Discontinuous => (0..disc.n_elements())
                    .map(|e| speed.eval(disc.mesh.map_point(e, 0.0)))
                    .collect(),
            },
            ModelSpec::Maxwell { currents, .. } => {
                let sides = current_sides(disc).unwrap_or_default();
                sides
                    .iter()
                    .flat_map(|&s| {
                        let sig = currents[s as usize];
                        (0..=self.grid.n_steps).map(move |n| sig.eval(self.grid.time(n)))
                    })
                    .collect()
            }
        }
    }

    pub fn param_layout(&self) -> Result<ParamLayout, Error> {
        Ok(self.operator(&self.default_params())?.param_layout())
    }

    /// Operator for the given parameter values.
    pub fn operator(&self, params: &[f64]) -> Result<Box<dyn SpatialOperator>, Error> {
        let disc = self.disc.clone();
        Ok(match &self.model {
            ModelSpec::Advection {
                alpha,
                inflow,
                forcing,
                ..
            } => Box::new(AdvectionOperator::new(
                disc, params, *alpha, self.form, *inflow, *forcing,
            )?),
            ModelSpec::Acoustic {
                variant,
                density,
                boundary,
                forcing,
                ..
            } => Box::new(AcousticOperator::new(
                disc, *variant, self.form, *density, params, *boundary, *forcing,
            )?),
            ModelSpec::Maxwell {
                permeability,
                permittivity,
                ..
            } => Box::new(MaxwellOperator::new(
                disc,
                self.form,
                *permeability,
                *permittivity,
                params,
                self.grid.dt(),
                self.grid.n_steps + 1,
            )?),
        })
    }

    /// Initial state, component-major.
    pub fn initial_state(&self) -> Vec<f64> {
        let profiles: Vec<&Profile> = match &self.model {
            ModelSpec::Advection { initial, .. } => vec![initial],
            ModelSpec::Acoustic {
                initial_e,
                initial_v,
                ..
            } => vec![initial_e, initial_v],
            ModelSpec::Maxwell {
                initial_h,
                initial_e,
                ..
            } => vec![initial_h, initial_e],
        };
        profiles
            .into_iter()
            .flat_map(|p| self.disc.sample(|x| p.eval(x)))
            .collect()
    }

    pub fn cost_functional(&self) -> Cost {
        Cost::new(self.cost.clone(), self.disc.clone(), self.grid)
    }

    /// Forward solve and cost evaluation.
    pub fn forward(&self, params: &[f64]) -> Result<ForwardRun, Error> {
        self.forward_with(params, &mut |_, _, _| {})
    }

    /// Forward solve calling `observe(n, t_n, q_n)` at every step boundary.
    pub fn forward_with(
        &self,
        params: &[f64],
        observe: &mut dyn FnMut(usize, f64, &[f64]),
    ) -> Result<ForwardRun, Error> {
        let op = self.operator(params)?;
        let order = self.disc.basis.order();
        let dt_max = 0.5 * self.disc.mesh.min_width() / (op.max_wave_speed() * (order * order) as f64);
        if self.grid.dt() > dt_max {
            log::warn!(
                "time step {:.3e} exceeds the CFL estimate {:.3e}; the run may be unstable",
                self.grid.dt(),
                dt_max
            );
        }
        let cost = self.cost_functional();
        let mut total = 0.0;
        let trajectory = run_forward(
            op.as_ref(),
            &self.initial_state(),
            self.grid,
            self.storage,
            &mut |n, t, q| {
                total += cost.step_term(n, q, None);
                observe(n, t, q);
            },
        )?;
        total += cost.regularization(&op.param_layout(), params);
        Ok(ForwardRun {
            operator: op,
            trajectory,
            cost: total,
        })
    }

    /// Cost for the given parameters.
    pub fn cost_value(&self, params: &[f64]) -> Result<f64, Error> {
        Ok(self.forward(params)?.cost)
    }

    /// Checks the restrictions of the adjoint pipeline.
    pub fn check_gradient_support(&self) -> Result<(), Error> {
        if let ModelSpec::Advection { alpha, .. } = self.model {
            if alpha != 0.0 {
                return Err(ModelError::AdjointNeedsUpwind(alpha).into());
            }
        }
        if self.form != Form::Strong {
            return Err(ModelError::Unsupported(
                "gradients are implemented for the strong form only".into(),
            )
            .into());
        }
        if self.kind() == ModelKind::Advection
            && self.cost.outflow_weight != 0.0
            && self.disc.mesh.is_periodic()
        {
            return Err(crate::error::CostError::UnstableBoundaryCost.into());
        }
        Ok(())
    }

    /// Cost and discretely exact gradient at `params`.
    pub fn gradient(&self, params: &[f64]) -> Result<(f64, GradientReport), Error> {
        self.gradient_with_kernel(params, self.kernel_form())
    }

    /// As [`Problem::gradient`] with an explicit acoustic kernel form.
    pub fn gradient_with_kernel(
        &self,
        params: &[f64],
        kernel: KernelForm,
    ) -> Result<(f64, GradientReport), Error> {
        self.check_gradient_support()?;
        let run = self.forward(params)?;
        let cost = self.cost_functional();
        let op = run.operator.as_ref();
        let adjoint = solve_adjoint(op, &run.trajectory, &cost)?;
        let mut report = assemble_gradient(
            op,
            &run.trajectory,
            &adjoint,
            &cost,
            params,
            kernel,
        )?;
        report.parameter = self.parameter_name().to_string();
        Ok((run.cost, report))
    }

    /// Direction coefficients for a preset.
    pub fn direction(&self, preset: Direction, seed: u64) -> Result<Vec<f64>, Error> {
        let layout = self.param_layout()?;
        let n = layout.len();
        Ok(match preset {
            Direction::Smooth => {
                let locs = parameter_locations(&self.disc, &layout, &self.grid);
                let (lo, hi) = match layout {
                    ParamLayout::BoundaryTimeSeries { .. } => (0.0, self.grid.t_final),
                    _ => (self.disc.mesh.x_left(), self.disc.mesh.x_right()),
                };
                locs.iter()
                    .map(|&x| {
                        let s = (x - lo) / (hi - lo);
                        (PI * s).sin() * (0.5 * PI * s).cos()
                    })
                    .collect()
            }
            Direction::Pointwise => {
                let mut d = vec![0.0; n];
                if n > 0 {
                    d[n / 2] = 1.0;
                }
                d
            }
            Direction::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
            }
        })
    }

    /// Same problem on a mesh with every element bisected; the step count
    /// is recomputed when it was chosen by CFL, otherwise doubled.
    pub fn refined(&self, steps: StepCount) -> Result<Self, Error> {
        let steps = match steps {
            StepCount::Fixed(n) => StepCount::Fixed(2 * n),
            cfl => cfl,
        };
        Self::new(
            self.model.clone(),
            self.disc.mesh.refine(),
            self.disc.basis.clone(),
            self.form,
            self.grid.t_final,
            steps,
            self.cost.clone(),
            self.storage,
        )
    }
}

/// Model, boundary kinds, and cost of the canonical configurations.
pub fn canonical_parts(kind: ModelKind) -> (ModelSpec, [BoundaryKind; 2], CostSpec) {
    let gauss = Profile::Gauss {
        amplitude: 1.0,
        center: 0.3,
        width: 0.3,
        offset: 0.0,
    };
    match kind {
        ModelKind::Advection => (
            ModelSpec::Advection {
                speed: Profile::Sine {
                    offset: 1.0,
                    amplitude: 0.3,
                    k: 2.0,
                    phase: 0.0,
                },
                alpha: 0.0,
                inflow: Signal::Pulse {
                    amplitude: 0.5,
                    duration: 1.0,
                },
                initial: gauss,
                forcing: None,
            },
            [BoundaryKind::InflowDirichlet; 2],
            CostSpec::energy(0),
        ),
        ModelKind::Acoustic => (
            ModelSpec::Acoustic {
                variant: AcousticVariant::Continuous,
                density: Profile::Const(1.0),
                speed: Profile::Sine {
                    offset: 1.0,
                    amplitude: 0.2,
                    k: 2.0,
                    phase: 0.0,
                },
                initial_e: gauss,
                initial_v: Profile::Const(0.0),
                boundary: [AcousticBoundary::default(); 2],
                forcing: None,
            },
            [BoundaryKind::InflowDirichlet; 2],
            CostSpec::energy(1),
        ),
        ModelKind::Maxwell1d => (
            ModelSpec::Maxwell {
                permeability: Profile::Const(1.0),
                permittivity: Profile::Step {
                    left: 1.0,
                    right: 2.0,
                    interface: 0.5,
                },
                currents: [
                    Signal::Pulse {
                        amplitude: 1.0,
                        duration: 0.3,
                    },
                    Signal::Zero,
                ],
                initial_h: Profile::Const(0.0),
                initial_e: Profile::Const(0.0),
            },
            [BoundaryKind::TractionLike; 2],
            CostSpec::energy(1),
        ),
    }
}
