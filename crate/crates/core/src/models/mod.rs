//! The three hyperbolic systems: residual assembly in weak and strong form,
//! numerical and adjoint fluxes, boundary closures, and gradient kernels.
//!
//! Every model assembles a semi-discrete system `M(c) q_t = A(c) q + b(t, c)`.
//! The adjoint operator is assembled directly from the adjoint fluxes of the
//! dual form and equals `A^T` exactly, so `L* = M^-1 A^T` is the adjoint of
//! `L = M^-1 A` in the `M`-weighted inner product.

pub mod acoustic;
pub mod advection;
pub mod data;
pub mod maxwell;

use crate::field::Discretization;
use crate::mesh::Side;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use acoustic::{AcousticOperator, AcousticVariant};
pub use advection::AdvectionOperator;
pub use data::{Profile, Signal};
pub use maxwell::MaxwellOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Advection,
    Acoustic,
    Maxwell1d,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Advection => "advection",
            ModelKind::Acoustic => "acoustic",
            ModelKind::Maxwell1d => "maxwell1d",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "advection" => Ok(ModelKind::Advection),
            "acoustic" => Ok(ModelKind::Acoustic),
            "maxwell1d" | "maxwell" => Ok(ModelKind::Maxwell1d),
            other => Err(format!("unknown model kind '{other}'")),
        }
    }
}

/// Residual assembly form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Derivatives act on the trial function; face terms are flux penalties.
    Strong,
    /// Derivatives act on the test function; face terms are full fluxes.
    Weak,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Strong => "strong",
            Form::Weak => "weak",
        })
    }
}

impl FromStr for Form {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strong" => Ok(Form::Strong),
            "weak" => Ok(Form::Weak),
            other => Err(format!("unknown form '{other}'")),
        }
    }
}

/// Which acoustic gradient expression to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelForm {
    /// Exact for any quadrature; includes the dG residual term.
    Full,
    /// Drops the residual term; exact only under GLL collocation.
    Simplified,
}

/// How the parameter being differentiated is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamLayout {
    /// Globally continuous nodal field: one shared value per interior face node.
    ContinuousNodal { n_dofs: usize },
    /// One value per element.
    ElementConstant { n_elements: usize },
    /// Nodal values in time at every step boundary, per boundary face.
    BoundaryTimeSeries { sides: Vec<Side>, n_times: usize },
}

impl ParamLayout {
    pub fn len(&self) -> usize {
        match self {
            ParamLayout::ContinuousNodal { n_dofs } => *n_dofs,
            ParamLayout::ElementConstant { n_elements } => *n_elements,
            ParamLayout::BoundaryTimeSeries { sides, n_times } => sides.len() * n_times,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Number of globally continuous nodal dofs.
pub fn continuous_dof_count(disc: &Discretization) -> usize {
    let (k, n) = (disc.n_elements(), disc.basis.order());
    if disc.mesh.is_periodic() {
        k * n
    } else {
        k * n + 1
    }
}

/// Global continuous dof of local node `i` in element `e`.
pub fn continuous_dof(disc: &Discretization, e: usize, i: usize) -> usize {
    (e * disc.basis.order() + i) % continuous_dof_count(disc)
}

/// Coordinates of the continuous dofs.
pub fn continuous_dof_coords(disc: &Discretization) -> Vec<f64> {
    let mut x = vec![0.0; continuous_dof_count(disc)];
    for e in 0..disc.n_elements() {
        for (i, &xi) in disc.element_coords(e).iter().enumerate() {
            x[continuous_dof(disc, e, i)] = xi;
        }
    }
    // Periodic wrap leaves dof 0 at the left end.
    x[0] = disc.mesh.x_left();
    x
}

/// Expands continuous dofs to element-local nodal values.
pub fn expand_continuous(disc: &Discretization, dofs: &[f64]) -> Vec<f64> {
    let np = disc.n_nodes();
    let mut out = vec![0.0; disc.n_elements() * np];
    for e in 0..disc.n_elements() {
        for i in 0..np {
            out[e * np + i] = dofs[continuous_dof(disc, e, i)];
        }
    }
    out
}

/// Expands element constants to element-local nodal values.
pub fn expand_elementwise(disc: &Discretization, values: &[f64]) -> Vec<f64> {
    let np = disc.n_nodes();
    values
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, np))
        .collect()
}

/// Gradient contributions accumulated over stages, indexed by parameter dof.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientParts {
    pub volume: Vec<f64>,
    pub face: Vec<f64>,
    /// The part of `face` made of jump terms, which the comparator omits.
    pub face_jump: Vec<f64>,
}

impl GradientParts {
    pub fn zeros(n: usize) -> Self {
        Self {
            volume: vec![0.0; n],
            face: vec![0.0; n],
            face_jump: vec![0.0; n],
        }
    }

    pub(crate) fn add_face(&mut self, dof: usize, value: f64, jump_part: f64) {
        self.face[dof] += value;
        self.face_jump[dof] += jump_part;
    }
}

/// Data for one RK stage handed to the gradient kernels.
///
/// `adjoint` follows the sign convention of the continuous Lagrangian: it is
/// the negated stage multiplier, so the stage contribution to the gradient is
/// `adjoint^T (dM/dc F - dA/dc Y - db/dc)`.
#[derive(Debug, Clone, Copy)]
pub struct StageData<'a> {
    pub state: &'a [f64],
    pub rate: &'a [f64],
    pub adjoint: &'a [f64],
    pub t: f64,
}

/// Semi-discrete spatial operator of one model instance.
pub trait SpatialOperator: Send + Sync {
    fn disc(&self) -> &Arc<Discretization>;

    fn component_names(&self) -> &'static [&'static str];

    fn n_components(&self) -> usize {
        self.component_names().len()
    }

    fn len(&self) -> usize {
        self.n_components() * self.disc().n_elements() * self.disc().n_nodes()
    }

    fn form(&self) -> Form;

    /// `A q + b(t)` in test-function coefficients; `t = None` drops all sources.
    fn residual(&self, q: &[f64], t: Option<f64>, out: &mut [f64]);

    /// `A^T p`, assembled directly from the adjoint fluxes in the dual form.
    fn adjoint_residual(&self, p: &[f64], out: &mut [f64]);

    fn mass_apply(&self, x: &[f64], out: &mut [f64]);

    fn mass_solve(&self, x: &[f64], out: &mut [f64]);

    /// Largest characteristic speed, for the CFL check.
    fn max_wave_speed(&self) -> f64;

    /// Layout of the parameter this operator is differentiated against.
    fn param_layout(&self) -> ParamLayout;

    /// Adds the stage contribution of the gradient kernels to `acc`.
    fn accumulate_gradient(&self, stage: &StageData, form: KernelForm, acc: &mut GradientParts);

    /// `M^-1 (A q + b(t))`.
    fn rate(&self, q: &[f64], t: Option<f64>, out: &mut [f64]) {
        let mut r = vec![0.0; self.len()];
        self.residual(q, t, &mut r);
        self.mass_solve(&r, out);
    }

    /// `M^-1 A^T p`.
    fn adjoint_rate(&self, p: &[f64], out: &mut [f64]) {
        let mut r = vec![0.0; self.len()];
        self.adjoint_residual(p, &mut r);
        self.mass_solve(&r, out);
    }

    /// `<x, y>_M`.
    fn weighted_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut mx = vec![0.0; self.len()];
        self.mass_apply(x, &mut mx);
        mx.iter().zip(y).map(|(a, b)| a * b).sum()
    }
}

pub(crate) fn matvec(m: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate().take(n) {
        *o = m[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Element mass matrices `J_e V^T W diag(omega) V` and their inverses for one block.
#[derive(Debug, Clone)]
pub(crate) struct BlockMass {
    np: usize,
    mats: Vec<f64>,
    invs: Vec<f64>,
}

impl BlockMass {
    /// `omega(e)` returns the pointwise weight at the quadrature points of element `e`.
    pub fn new(disc: &Discretization, omega: impl Fn(usize) -> Vec<f64>) -> Self {
        let np = disc.n_nodes();
        let k = disc.n_elements();
        let mut mats = Vec::with_capacity(k * np * np);
        let mut invs = Vec::with_capacity(k * np * np);
        for e in 0..k {
            let jac = disc.mesh.jacobian(e);
            let m: Vec<f64> = disc
                .basis
                .weighted_mass(&omega(e))
                .into_iter()
                .map(|v| jac * v)
                .collect();
            let inv = nalgebra::DMatrix::from_row_slice(np, np, &m)
                .cholesky()
                .expect("element mass matrix is symmetric positive definite")
                .inverse();
            for i in 0..np {
                for j in 0..np {
                    invs.push(inv[(i, j)]);
                }
            }
            mats.extend(m);
        }
        Self { np, mats, invs }
    }

    pub fn apply(&self, e: usize, x: &[f64], out: &mut [f64]) {
        let n2 = self.np * self.np;
        matvec(&self.mats[e * n2..(e + 1) * n2], self.np, x, out);
    }

    pub fn solve(&self, e: usize, x: &[f64], out: &mut [f64]) {
        let n2 = self.np * self.np;
        matvec(&self.invs[e * n2..(e + 1) * n2], self.np, x, out);
    }
}

/// Applies a per-component, per-element block operation over a whole state vector.
pub(crate) fn blockwise(
    n_comp: usize,
    k: usize,
    np: usize,
    x: &[f64],
    out: &mut [f64],
    mut f: impl FnMut(usize, usize, &[f64], &mut [f64]),
) {
    for c in 0..n_comp {
        for e in 0..k {
            let s = (c * k + e) * np;
            f(c, e, &x[s..s + np], &mut out[s..s + np]);
        }
    }
}

/// Checks that all values are positive; reports the first offending location.
pub(crate) fn check_positive(
    name: &'static str,
    values: &[f64],
    coords: &[f64],
) -> Result<(), crate::error::ModelError> {
    match values.iter().position(|&v| !(v > 0.0)) {
        Some(i) => Err(crate::error::ModelError::NonPositive {
            name,
            value: values[i],
            location: coords.get(i).copied().unwrap_or(f64::NAN),
        }),
        None => Ok(()),
    }
}
