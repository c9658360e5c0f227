//! Linear advection `u_t + (a u)_x = f` with a continuous speed `a(x) > 0`.
//!
//! The left end is the inflow boundary (`u⁺ = u_l(t)`), the right end the
//! outflow boundary (`u⁺ = u⁻`), unless the mesh is periodic.

use super::{
    blockwise, check_positive, continuous_dof, continuous_dof_count, expand_continuous, matvec,
    BlockMass, Form, GradientParts, KernelForm, ParamLayout, Profile, Signal,
    SpatialOperator, StageData,
};
use crate::error::ModelError;
use crate::field::{jump, mean, Discretization, FaceState};
use crate::mesh::{BoundaryKind, Neighbor, Side};
use std::sync::Arc;

/// Blended numerical flux `(au)† = a {{u}} + ½ a (1 − α) ⟦u⟧`.
pub fn advection_flux(face: &FaceState, alpha: f64) -> Result<f64, ModelError> {
    check_face_speed(face)?;
    Ok(advection_flux_unchecked(face, alpha))
}

/// Adjoint flux `(ap)† = a {{p}} + ½ a (α − 1) ⟦p⟧`.
pub fn advection_adjoint_flux(face: &FaceState, alpha: f64) -> Result<f64, ModelError> {
    check_face_speed(face)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ModelError::AlphaOutOfRange(alpha));
    }
    Ok(advection_adjoint_flux_unchecked(face, alpha))
}

/// Adjoint ghost at the outflow boundary that makes the adjoint flux consistent
/// with the boundary cost derivative `j'_Γ`.
pub fn advection_adjoint_ghost(p_minus: f64, a: f64, alpha: f64, j_gamma_prime: f64) -> f64 {
    -j_gamma_prime / (a * (1.0 - 0.5 * alpha)) - alpha / (2.0 - alpha) * p_minus
}

fn check_face_speed(face: &FaceState) -> Result<(), ModelError> {
    let a = face.material_minus[0];
    if !(a > 0.0) {
        return Err(ModelError::NonPositive {
            name: "advection speed",
            value: a,
            location: f64::NAN,
        });
    }
    Ok(())
}

fn advection_flux_unchecked(face: &FaceState, alpha: f64) -> f64 {
    let a = face.material_minus[0];
    a * mean(face, 0) + 0.5 * a * (1.0 - alpha) * jump(face, 0)
}

fn advection_adjoint_flux_unchecked(face: &FaceState, alpha: f64) -> f64 {
    let a = face.material_minus[0];
    a * mean(face, 0) + 0.5 * a * (alpha - 1.0) * jump(face, 0)
}

/// Volume kernel: the coefficient of `ã_i` in `∫ p (ã u)_x dx` on one element.
pub fn advection_volume_kernel(
    disc: &Discretization,
    mref: &[f64],
    u: &[f64],
    p: &[f64],
) -> Vec<f64> {
    let np = disc.n_nodes();
    let mut mp = vec![0.0; np];
    let mut dtmp = vec![0.0; np];
    matvec(mref, np, p, &mut mp);
    disc.basis.diff_t_into(&mp, &mut dtmp);
    u.iter().zip(&dtmp).map(|(u, d)| u * d).collect()
}

/// Interior face kernel multiplying the shared face value `ã`.
pub fn advection_face_kernel(u: &FaceState, p: &FaceState, alpha: f64) -> f64 {
    let (ju, jp) = (jump(u, 0), jump(p, 0));
    -(0.5 * (alpha - 1.0) * ju * jp + ju * mean(p, 0))
}

/// Inflow-boundary kernel multiplying `ã` at the left end.
pub fn advection_inflow_kernel(u_minus: f64, u_l: f64, p_minus: f64, alpha: f64) -> f64 {
    (1.0 - 0.5 * alpha) * p_minus * (u_minus - u_l)
}

#[derive(Debug, Clone)]
pub struct AdvectionOperator {
    disc: Arc<Discretization>,
    a: Vec<f64>,
    alpha: f64,
    form: Form,
    inflow: Signal,
    forcing: Option<(Vec<f64>, Signal)>,
    mass: BlockMass,
    mref: Vec<f64>,
}

impl AdvectionOperator {
    /// `speed` holds the continuous nodal dofs of `a`.
    pub fn new(
        disc: Arc<Discretization>,
        speed: &[f64],
        alpha: f64,
        form: Form,
        inflow: Signal,
        forcing: Option<(Profile, Signal)>,
    ) -> Result<Self, ModelError> {
        let n = continuous_dof_count(&disc);
        if speed.len() != n {
            return Err(ModelError::ParameterLength {
                expected: n,
                found: speed.len(),
            });
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ModelError::AlphaOutOfRange(alpha));
        }
        for side in [Side::Left, Side::Right] {
            let kind = disc.mesh.boundary_kind(side);
            if kind == BoundaryKind::TractionLike {
                return Err(ModelError::UnsupportedBoundary {
                    model: "advection",
                    kind: kind.to_string(),
                });
            }
        }
        let a = expand_continuous(&disc, speed);
        check_positive("advection speed", &a, disc.coords())?;
        let mass = BlockMass::new(&disc, |_| vec![1.0; disc.basis.n_quad()]);
        let mref = disc.basis.mass_matrix();
        let forcing = forcing.map(|(p, s)| (disc.sample(|x| p.eval(x)), s));
        Ok(Self {
            disc,
            a,
            alpha,
            form,
            inflow,
            forcing,
            mass,
            mref,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Element-local nodal values of the speed.
    pub fn speed_nodal(&self) -> &[f64] {
        &self.a
    }

    /// Face state seen from element `e` on `side`, with the ghost state applied at boundaries.
    fn face_state(&self, u: &[f64], e: usize, side: Side, t: Option<f64>, adjoint: bool) -> FaceState {
        let np = self.disc.n_nodes();
        let (node, n) = match side {
            Side::Left => (0, -1.0),
            Side::Right => (np - 1, 1.0),
        };
        let um = u[e * np + node];
        let a = self.a[e * np + node];
        let up = match self.disc.mesh.neighbor(e, side) {
            Neighbor::Element(nb) => match side {
                Side::Left => u[nb * np + np - 1],
                Side::Right => u[nb * np],
            },
            Neighbor::Boundary(Side::Left) => {
                if adjoint {
                    0.0
                } else {
                    t.map_or(0.0, |t| self.inflow.eval(t))
                }
            }
            Neighbor::Boundary(Side::Right) => {
                if adjoint {
                    advection_adjoint_ghost(um, a, self.alpha, 0.0)
                } else {
                    um
                }
            }
        };
        FaceState::new([um, 0.0], [up, 0.0], n, [a, 0.0])
    }

    fn is_inflow_boundary(&self, e: usize, side: Side) -> bool {
        side == Side::Left && matches!(self.disc.mesh.neighbor(e, side), Neighbor::Boundary(_))
    }
}

impl SpatialOperator for AdvectionOperator {
    fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }

    fn form(&self) -> Form {
        self.form
    }

    fn residual(&self, q: &[f64], t: Option<f64>, out: &mut [f64]) {
        let disc = &self.disc;
        let np = disc.n_nodes();
        let mut au = vec![0.0; np];
        let mut tmp = vec![0.0; np];
        let mut tmp2 = vec![0.0; np];
        for e in 0..disc.n_elements() {
            let s = e * np;
            let (u, a) = (&q[s..s + np], &self.a[s..s + np]);
            for i in 0..np {
                au[i] = a[i] * u[i];
            }
            let r = &mut out[s..s + np];
            match self.form {
                Form::Strong => {
                    disc.basis.diff_into(&au, &mut tmp);
                    matvec(&self.mref, np, &tmp, r);
                    r.iter_mut().for_each(|v| *v = -*v);
                }
                Form::Weak => {
                    matvec(&self.mref, np, &au, &mut tmp);
                    disc.basis.diff_t_into(&tmp, r);
                }
            }
            if let (Some(t), Some((f, sig))) = (t, &self.forcing) {
                let amp = sig.eval(t) * disc.mesh.jacobian(e);
                matvec(&self.mref, np, &f[s..s + np], &mut tmp2);
                r.iter_mut().zip(&tmp2).for_each(|(v, m)| *v += amp * m);
            }
            for (side, node) in [(Side::Left, 0), (Side::Right, np - 1)] {
                let face = self.face_state(q, e, side, t, false);
                let flux = advection_flux_unchecked(&face, self.alpha);
                let n = face.n_minus;
                r[node] += match self.form {
                    Form::Strong => n * (face.material_minus[0] * face.u_minus[0] - flux),
                    Form::Weak => -n * flux,
                };
            }
        }
    }

    fn adjoint_residual(&self, p: &[f64], out: &mut [f64]) {
        let disc = &self.disc;
        let np = disc.n_nodes();
        let mut tmp = vec![0.0; np];
        for e in 0..disc.n_elements() {
            let s = e * np;
            let (pe, a) = (&p[s..s + np], &self.a[s..s + np]);
            let r = &mut out[s..s + np];
            match self.form {
                // Transpose of the strong state form: weak adjoint form.
                Form::Strong => {
                    matvec(&self.mref, np, pe, &mut tmp);
                    disc.basis.diff_t_into(&tmp, r);
                    r.iter_mut().zip(a).for_each(|(v, a)| *v *= -a);
                }
                // Transpose of the weak state form: strong adjoint form.
                Form::Weak => {
                    disc.basis.diff_into(pe, &mut tmp);
                    matvec(&self.mref, np, &tmp, r);
                    r.iter_mut().zip(a).for_each(|(v, a)| *v *= a);
                }
            }
            for (side, node) in [(Side::Left, 0), (Side::Right, np - 1)] {
                let face = self.face_state(p, e, side, None, true);
                let (n, am, pm) = (face.n_minus, face.material_minus[0], face.u_minus[0]);
                let inflow = self.is_inflow_boundary(e, side);
                r[node] += match (self.form, inflow) {
                    (Form::Strong, true) => n * am * (2.0 - self.alpha) / 2.0 * pm,
                    (Form::Strong, false) => n * advection_adjoint_flux_unchecked(&face, self.alpha),
                    (Form::Weak, true) => -n * am * self.alpha / 2.0 * pm,
                    (Form::Weak, false) => {
                        -n * (am * pm - advection_adjoint_flux_unchecked(&face, self.alpha))
                    }
                };
            }
        }
    }

    fn mass_apply(&self, x: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        blockwise(1, d.n_elements(), d.n_nodes(), x, out, |_, e, xe, oe| {
            self.mass.apply(e, xe, oe)
        });
    }

    fn mass_solve(&self, x: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        blockwise(1, d.n_elements(), d.n_nodes(), x, out, |_, e, xe, oe| {
            self.mass.solve(e, xe, oe)
        });
    }

    fn max_wave_speed(&self) -> f64 {
        self.a.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    fn param_layout(&self) -> ParamLayout {
        ParamLayout::ContinuousNodal {
            n_dofs: continuous_dof_count(&self.disc),
        }
    }

    fn accumulate_gradient(&self, stage: &StageData, _form: KernelForm, acc: &mut GradientParts) {
        let disc = &self.disc;
        let np = disc.n_nodes();
        let (y, p) = (stage.state, stage.adjoint);
        for e in 0..disc.n_elements() {
            let s = e * np;
            let vol = advection_volume_kernel(disc, &self.mref, &y[s..s + np], &p[s..s + np]);
            for (i, v) in vol.into_iter().enumerate() {
                acc.volume[continuous_dof(disc, e, i)] += v;
            }
        }
        for (_, face) in disc.mesh.unique_faces() {
            use crate::mesh::FaceSide::*;
            match (face.left, face.right) {
                (Element(el), Element(_)) => {
                    let fu = self.face_state(y, el, Side::Right, None, false);
                    let fp = self.face_state(p, el, Side::Right, None, false);
                    let g = advection_face_kernel(&fu, &fp, self.alpha);
                    acc.add_face(continuous_dof(disc, el, np - 1), g, g);
                }
                (Boundary(Side::Left), Element(er)) => {
                    let ul = self.inflow.eval(stage.t);
                    let g = advection_inflow_kernel(y[er * np], ul, p[er * np], self.alpha);
                    acc.add_face(continuous_dof(disc, er, 0), g, g);
                }
                _ => {}
            }
        }
    }
}
