//! 1D acoustics in velocity-dilatation form:
//! `λ e_t = λ v_x`, `ρ v_t = (λ e)_x + f`, with `λ = c² ρ`.
//!
//! The e-block is weighted by λ and the v-block by ρ, which makes the
//! semi-discrete operator an acoustic system again after transposition.
//! The wave speed is either a continuous nodal field or one value per element.

use super::{
    check_positive, continuous_dof, continuous_dof_coords, continuous_dof_count, expand_continuous,
    expand_elementwise, matvec, BlockMass, Form, GradientParts, KernelForm, ParamLayout, Profile,
    Signal, SpatialOperator, StageData,
};
use crate::error::ModelError;
use crate::field::{diff, jump, mean, Discretization, FaceState};
use crate::mesh::{BoundaryKind, Neighbor, Side};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcousticVariant {
    /// Continuous nodal wave speed; single-material fluxes.
    Continuous,
    /// Element-constant wave speed; interface fluxes with per-side materials.
    Discontinuous,
}

/// Boundary data for one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticBoundary {
    pub e: Signal,
    pub v: Signal,
    pub traction: Signal,
}

impl Default for AcousticBoundary {
    fn default() -> Self {
        Self {
            e: Signal::Zero,
            v: Signal::Zero,
            traction: Signal::Zero,
        }
    }
}

fn check_materials(face: &FaceState) -> Result<(), ModelError> {
    for (name, v) in [
        ("density", face.material_minus[0]),
        ("wave speed", face.material_minus[1]),
        ("density", face.material_plus[0]),
        ("wave speed", face.material_plus[1]),
    ] {
        if !(v > 0.0) {
            return Err(ModelError::NonPositive {
                name,
                value: v,
                location: f64::NAN,
            });
        }
    }
    Ok(())
}

/// Upwind flux for continuous materials: returns `(n·v†, (λe)†)` with
/// `n·v† = n{{v}} − (c/2)⟨⟨e⟩⟩` and `(λe)† = λ{{e}} − (ρc/2)⟦v⟧`.
pub fn acoustic_flux(face: &FaceState) -> Result<(f64, f64), ModelError> {
    check_materials(face)?;
    Ok(flux_continuous(face))
}

/// Adjoint (downwind) flux: returns `(n·w†, (λh)†)` with
/// `n·w† = n{{w}} + (c/2)⟨⟨h⟩⟩` and `(λh)† = λ{{h}} + (ρc/2)⟦w⟧`.
pub fn acoustic_adjoint_flux(face: &FaceState) -> Result<(f64, f64), ModelError> {
    check_materials(face)?;
    Ok(adjoint_flux_continuous(face))
}

/// Interface coefficient `k₀ = 1/(ρ⁻c⁻ + ρ⁺c⁺)`.
pub fn interface_coefficient(z_minus: f64, z_plus: f64) -> f64 {
    1.0 / (z_minus + z_plus)
}

/// Upwind flux with per-side materials: returns `(n·v†, (λe)†)`.
pub fn acoustic_flux_discontinuous(face: &FaceState) -> Result<(f64, f64), ModelError> {
    check_materials(face)?;
    Ok(flux_discontinuous(face))
}

/// Adjoint flux with per-side materials: returns `(n·w†, (λh)†)`.
pub fn acoustic_adjoint_flux_discontinuous(face: &FaceState) -> Result<(f64, f64), ModelError> {
    check_materials(face)?;
    Ok(adjoint_flux_discontinuous(face))
}

fn flux_continuous(face: &FaceState) -> (f64, f64) {
    let [rho, c] = face.material_minus;
    let lam = rho * c * c;
    (
        face.n_minus * mean(face, 1) - 0.5 * c * diff(face, 0),
        lam * mean(face, 0) - 0.5 * rho * c * jump(face, 1),
    )
}

fn adjoint_flux_continuous(face: &FaceState) -> (f64, f64) {
    let [rho, c] = face.material_minus;
    let lam = rho * c * c;
    (
        face.n_minus * mean(face, 1) + 0.5 * c * diff(face, 0),
        lam * mean(face, 0) + 0.5 * rho * c * jump(face, 1),
    )
}

struct Sides {
    lam: [f64; 2],
    z: [f64; 2],
    k0: f64,
}

fn sides(face: &FaceState) -> Sides {
    let [rm, cm] = face.material_minus;
    let [rp, cp] = face.material_plus;
    let z = [rm * cm, rp * cp];
    Sides {
        lam: [rm * cm * cm, rp * cp * cp],
        z,
        k0: interface_coefficient(z[0], z[1]),
    }
}

fn flux_discontinuous(face: &FaceState) -> (f64, f64) {
    let s = sides(face);
    let n = face.n_minus;
    let delta = s.lam[0] * face.u_minus[0] - s.lam[1] * face.u_plus[0] + s.z[1] * jump(face, 1);
    (
        n * face.u_minus[1] - s.k0 * delta,
        s.lam[0] * face.u_minus[0] - s.k0 * s.z[0] * delta,
    )
}

fn adjoint_flux_discontinuous(face: &FaceState) -> (f64, f64) {
    let s = sides(face);
    let n = face.n_minus;
    let pm = s.lam[0] * face.u_minus[0] + s.z[0] * n * face.u_minus[1];
    let pp = s.lam[1] * face.u_plus[0] - s.z[1] * n * face.u_plus[1];
    (s.k0 * (pm - pp), s.k0 * (s.z[1] * pm + s.z[0] * pp))
}

/// Simplified-form kernel at an interior face with continuous materials,
/// multiplying the shared face value `c̃`:
/// `½ρc²⟨⟨e⟩⟩⟨⟨h⟩⟩ + 2ρc⟦e⟧{{w}} + ½ρ⟦v⟧⟦w⟧`. The full form adds
/// `ρc²⟨⟨e⟩⟩⟨⟨h⟩⟩ + 2ρc⟦v⟧{{h}}`.
pub fn acoustic_face_kernel(u: &FaceState, p: &FaceState, form: KernelForm) -> f64 {
    let [rho, c] = u.material_minus;
    let simp = 0.5 * rho * c * c * diff(u, 0) * diff(p, 0)
        + 2.0 * rho * c * jump(u, 0) * mean(p, 1)
        + 0.5 * rho * jump(u, 1) * jump(p, 1);
    match form {
        KernelForm::Simplified => simp,
        KernelForm::Full => {
            simp + rho * c * c * diff(u, 0) * diff(p, 0) + 2.0 * rho * c * jump(u, 1) * mean(p, 0)
        }
    }
}

/// Per-side kernel at an interface between element-constant materials,
/// multiplying `c̃⁻`. Returns `(total, non_jump)` where `non_jump` is the
/// term `2ρ⁻c⁻e⁻w⁻n⁻` that survives for continuous traces.
pub fn acoustic_side_kernel_discontinuous(
    u: &FaceState,
    p: &FaceState,
    form: KernelForm,
) -> (f64, f64) {
    let s = sides(u);
    let [rho_m, c_m] = u.material_minus;
    let n = u.n_minus;
    let k0 = s.k0;
    let ej = s.lam[0] * u.u_minus[0] - s.lam[1] * u.u_plus[0];
    let hj = s.lam[0] * p.u_minus[0] - s.lam[1] * p.u_plus[0];
    let vj = jump(u, 1);
    let wj = jump(p, 1);
    let zp = s.z[1];
    let non_jump = 2.0 * rho_m * c_m * u.u_minus[0] * p.u_minus[1] * n;
    let mut g = -k0 * k0 * rho_m * ej * hj
        + k0 * k0 * rho_m * zp * zp * vj * wj
        + k0 * k0 * rho_m * zp * (ej * wj - vj * hj)
        + 2.0 * k0 * rho_m * c_m * u.u_minus[0] * (hj - zp * wj)
        + non_jump;
    if form == KernelForm::Full {
        let delta = ej + zp * vj;
        g += k0 * delta * 2.0 * rho_m * c_m * p.u_minus[0];
    }
    (g, non_jump)
}

/// One-sided kernel at a domain boundary (materials extended continuously),
/// multiplying `c̃` at the boundary node. `dsigma_plus` is the derivative of
/// the ghost value `(λe)⁺` with respect to `c`.
pub fn acoustic_boundary_kernel(
    u: &FaceState,
    p: &FaceState,
    dsigma_plus: f64,
    form: KernelForm,
) -> f64 {
    let [rho, c] = u.material_minus;
    let n = u.n_minus;
    let (z, lam, dlam) = (rho * c, rho * c * c, 2.0 * rho * c);
    let k0 = 0.5 / z;
    let dk0 = -k0 / c;
    let delta = lam * (u.u_minus[0] - u.u_plus[0]) + z * jump(u, 1);
    let ddelta = dlam * u.u_minus[0] - dsigma_plus + rho * jump(u, 1);
    let pp = lam * p.u_minus[0] + z * n * p.u_minus[1];
    let dpp = dlam * p.u_minus[0] + rho * n * p.u_minus[1];
    let full = dk0 * delta * pp + k0 * ddelta * pp + k0 * delta * dpp;
    match form {
        KernelForm::Full => full,
        KernelForm::Simplified => full - k0 * delta * dlam * p.u_minus[0],
    }
}

#[derive(Debug, Clone)]
pub struct AcousticOperator {
    disc: Arc<Discretization>,
    variant: AcousticVariant,
    form: Form,
    rho: Vec<f64>,
    c: Vec<f64>,
    lam: Vec<f64>,
    /// λ at quadrature points, per element.
    lam_q: Vec<Vec<f64>>,
    /// Reference derivative of the λ interpolant at quadrature points, per element.
    dlam_q: Vec<Vec<f64>>,
    mass_e: BlockMass,
    mass_v: BlockMass,
    mref: Vec<f64>,
    boundary: [AcousticBoundary; 2],
    forcing: Option<(Vec<f64>, Signal)>,
}

impl AcousticOperator {
    /// `speed` holds continuous nodal dofs (continuous variant) or one value
    /// per element (discontinuous variant). The density profile is sampled at
    /// the continuous dof coordinates or at element midpoints, respectively.
    pub fn new(
        disc: Arc<Discretization>,
        variant: AcousticVariant,
        form: Form,
        density: Profile,
        speed: &[f64],
        boundary: [AcousticBoundary; 2],
        forcing: Option<(Profile, Signal)>,
    ) -> Result<Self, ModelError> {
        let (rho, c) = match variant {
            AcousticVariant::Continuous => {
                let n = continuous_dof_count(&disc);
                if speed.len() != n {
                    return Err(ModelError::ParameterLength {
                        expected: n,
                        found: speed.len(),
                    });
                }
                let rho_dofs: Vec<f64> = continuous_dof_coords(&disc)
                    .iter()
                    .map(|&x| density.eval(x))
                    .collect();
                (
                    expand_continuous(&disc, &rho_dofs),
                    expand_continuous(&disc, speed),
                )
            }
            AcousticVariant::Discontinuous => {
                let k = disc.n_elements();
                if speed.len() != k {
                    return Err(ModelError::ParameterLength {
                        expected: k,
                        found: speed.len(),
                    });
                }
                let mid: Vec<f64> = (0..k)
                    .map(|e| density.eval(disc.mesh.map_point(e, 0.0)))
                    .collect();
                (expand_elementwise(&disc, &mid), expand_elementwise(&disc, speed))
            }
        };
        check_positive("density", &rho, disc.coords())?;
        check_positive("wave speed", &c, disc.coords())?;
        let lam: Vec<f64> = rho.iter().zip(&c).map(|(r, c)| r * c * c).collect();
        let np = disc.n_nodes();
        let mut lam_q = Vec::new();
        let mut dlam_q = Vec::new();
        let mut rho_q = Vec::new();
        let mut tmp = vec![0.0; np];
        for e in 0..disc.n_elements() {
            let le = &lam[e * np..(e + 1) * np];
            lam_q.push(disc.basis.to_quadrature(le));
            disc.basis.diff_into(le, &mut tmp);
            dlam_q.push(disc.basis.to_quadrature(&tmp));
            rho_q.push(disc.basis.to_quadrature(&rho[e * np..(e + 1) * np]));
        }
        let mass_e = BlockMass::new(&disc, |e| lam_q[e].clone());
        let mass_v = BlockMass::new(&disc, |e| rho_q[e].clone());
        let mref = disc.basis.mass_matrix();
        let forcing = forcing.map(|(p, s)| (disc.sample(|x| p.eval(x)), s));
        Ok(Self {
            disc,
            variant,
            form,
            rho,
            c,
            lam,
            lam_q,
            dlam_q,
            mass_e,
            mass_v,
            mref,
            boundary,
            forcing,
        })
    }

    pub fn variant(&self) -> AcousticVariant {
        self.variant
    }

    fn offset(&self, comp: usize, e: usize) -> usize {
        (comp * self.disc.n_elements() + e) * self.disc.n_nodes()
    }

    fn node_index(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.disc.n_nodes() - 1,
        }
    }

    fn boundary_data(&self, side: Side) -> &AcousticBoundary {
        match side {
            Side::Left => &self.boundary[0],
            Side::Right => &self.boundary[1],
        }
    }

    /// Face state from element `e` on `side`. `t` selects state ghosts with
    /// boundary data (`Some`) or homogeneous ones (`None`); `adjoint` selects
    /// the adjoint ghost closure.
    fn face_state(&self, q: &[f64], e: usize, side: Side, t: Option<f64>, adjoint: bool) -> FaceState {
        let np = self.disc.n_nodes();
        let i = self.node_index(side);
        let n = if side == Side::Left { -1.0 } else { 1.0 };
        let im = e * np + i;
        let um = [q[self.offset(0, e) + i], q[self.offset(1, e) + i]];
        let mat_m = [self.rho[im], self.c[im]];
        let (up, mat_p) = match self.disc.mesh.neighbor(e, side) {
            Neighbor::Element(nb) => {
                let j = np - 1 - i;
                (
                    [q[self.offset(0, nb) + j], q[self.offset(1, nb) + j]],
                    [self.rho[nb * np + j], self.c[nb * np + j]],
                )
            }
            Neighbor::Boundary(bs) => {
                let kind = self.disc.mesh.boundary_kind(bs);
                let ghost = match (kind, adjoint) {
                    (BoundaryKind::TractionLike, true) => [-um[0], um[1]],
                    (_, true) => [0.0, 0.0],
                    (BoundaryKind::TractionLike, false) => {
                        let tr = t.map_or(0.0, |t| self.boundary_data(bs).traction.eval(t));
                        [-um[0] + 2.0 * tr / self.lam[im], um[1]]
                    }
                    (_, false) => match t {
                        Some(t) => {
                            let b = self.boundary_data(bs);
                            [b.e.eval(t), b.v.eval(t)]
                        }
                        None => [0.0, 0.0],
                    },
                };
                (ghost, mat_m)
            }
        };
        FaceState {
            u_minus: um,
            u_plus: up,
            n_minus: n,
            material_minus: mat_m,
            material_plus: mat_p,
        }
    }

    fn state_flux(&self, face: &FaceState) -> (f64, f64) {
        match self.variant {
            AcousticVariant::Continuous => flux_continuous(face),
            AcousticVariant::Discontinuous => flux_discontinuous(face),
        }
    }

    fn adjoint_flux(&self, face: &FaceState) -> (f64, f64) {
        match self.variant {
            AcousticVariant::Continuous => adjoint_flux_continuous(face),
            AcousticVariant::Discontinuous => adjoint_flux_discontinuous(face),
        }
    }

    fn param_index(&self, e: usize, i: usize) -> usize {
        match self.variant {
            AcousticVariant::Continuous => continuous_dof(&self.disc, e, i),
            AcousticVariant::Discontinuous => e,
        }
    }
}

impl SpatialOperator for AcousticOperator {
    fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["e", "v"]
    }

    fn form(&self) -> Form {
        self.form
    }

    fn residual(&self, q: &[f64], t: Option<f64>, out: &mut [f64]) {
        let disc = &self.disc;
        let basis = &disc.basis;
        let np = disc.n_nodes();
        let nq = basis.n_quad();
        let mut t1 = vec![0.0; np];
        let mut t2 = vec![0.0; np];
        let mut t3 = vec![0.0; np];
        let mut quad = vec![0.0; nq];
        for e in 0..disc.n_elements() {
            let (oe, ov) = (self.offset(0, e), self.offset(1, e));
            let jac = disc.mesh.jacobian(e);
            let ee = &q[oe..oe + np];
            let ve = &q[ov..ov + np];
            let lam = &self.lam[e * np..(e + 1) * np];
            let le: Vec<f64> = lam.iter().zip(ee).map(|(l, x)| l * x).collect();
            let mut re = vec![0.0; np];
            let mut rv = vec![0.0; np];
            match self.form {
                Form::Strong => {
                    basis.diff_into(ve, &mut t1);
                    self.mass_e.apply(e, &t1, &mut re);
                    re.iter_mut().for_each(|x| *x /= jac);
                    basis.diff_into(&le, &mut t1);
                    matvec(&self.mref, np, &t1, &mut rv);
                }
                Form::Weak => {
                    let vq = basis.to_quadrature(ve);
                    for k in 0..nq {
                        quad[k] = basis.quad_weights()[k] * vq[k] * self.dlam_q[e][k];
                    }
                    basis.from_quad_t_into(&quad, &mut t1);
                    for k in 0..nq {
                        quad[k] = basis.quad_weights()[k] * vq[k] * self.lam_q[e][k];
                    }
                    basis.from_quad_t_into(&quad, &mut t2);
                    basis.diff_t_into(&t2, &mut t3);
                    for i in 0..np {
                        re[i] = -(t1[i] + t3[i]);
                    }
                    matvec(&self.mref, np, &le, &mut t1);
                    basis.diff_t_into(&t1, &mut rv);
                    rv.iter_mut().for_each(|x| *x = -*x);
                }
            }
            if let (Some(t), Some((f, sig))) = (t, &self.forcing) {
                let amp = sig.eval(t) * jac;
                matvec(&self.mref, np, &f[e * np..(e + 1) * np], &mut t1);
                rv.iter_mut().zip(&t1).for_each(|(r, m)| *r += amp * m);
            }
            for side in [Side::Left, Side::Right] {
                let i = self.node_index(side);
                let face = self.face_state(q, e, side, t, false);
                let (nv, sigma) = self.state_flux(&face);
                let n = face.n_minus;
                let lm = lam[i];
                match self.form {
                    Form::Strong => {
                        re[i] -= (n * face.u_minus[1] - nv) * lm;
                        rv[i] -= (lm * face.u_minus[0] - sigma) * n;
                    }
                    Form::Weak => {
                        re[i] += nv * lm;
                        rv[i] += sigma * n;
                    }
                }
            }
            out[oe..oe + np].copy_from_slice(&re);
            out[ov..ov + np].copy_from_slice(&rv);
        }
    }

    fn adjoint_residual(&self, p: &[f64], out: &mut [f64]) {
        let disc = &self.disc;
        let basis = &disc.basis;
        let np = disc.n_nodes();
        let nq = basis.n_quad();
        let mut t1 = vec![0.0; np];
        let mut t2 = vec![0.0; np];
        let mut quad = vec![0.0; nq];
        for e in 0..disc.n_elements() {
            let (oe, ov) = (self.offset(0, e), self.offset(1, e));
            let jac = disc.mesh.jacobian(e);
            let h = &p[oe..oe + np];
            let w = &p[ov..ov + np];
            let lam = &self.lam[e * np..(e + 1) * np];
            let mut re = vec![0.0; np];
            let mut rv = vec![0.0; np];
            match self.form {
                Form::Strong => {
                    matvec(&self.mref, np, w, &mut t1);
                    basis.diff_t_into(&t1, &mut re);
                    re.iter_mut().zip(lam).for_each(|(r, l)| *r *= l);
                    self.mass_e.apply(e, h, &mut t1);
                    basis.diff_t_into(&t1, &mut rv);
                    rv.iter_mut().for_each(|x| *x /= jac);
                }
                Form::Weak => {
                    basis.diff_into(w, &mut t1);
                    matvec(&self.mref, np, &t1, &mut re);
                    re.iter_mut().zip(lam).for_each(|(r, l)| *r *= -l);
                    let hq = basis.to_quadrature(h);
                    basis.diff_into(h, &mut t1);
                    let dhq = basis.to_quadrature(&t1);
                    for k in 0..nq {
                        quad[k] = basis.quad_weights()[k]
                            * (self.dlam_q[e][k] * hq[k] + self.lam_q[e][k] * dhq[k]);
                    }
                    basis.from_quad_t_into(&quad, &mut t2);
                    rv.iter_mut().zip(&t2).for_each(|(r, x)| *r = -x);
                }
            }
            for side in [Side::Left, Side::Right] {
                let i = self.node_index(side);
                let face = self.face_state(p, e, side, None, true);
                let (nw, lh) = self.adjoint_flux(&face);
                let n = face.n_minus;
                let lm = lam[i];
                match self.form {
                    Form::Strong => {
                        re[i] -= nw * lm;
                        rv[i] -= lh * n;
                    }
                    Form::Weak => {
                        re[i] += lm * (n * face.u_minus[1] - nw);
                        rv[i] += n * (lm * face.u_minus[0] - lh);
                    }
                }
            }
            out[oe..oe + np].copy_from_slice(&re);
            out[ov..ov + np].copy_from_slice(&rv);
        }
    }

    fn mass_apply(&self, x: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        super::blockwise(2, d.n_elements(), d.n_nodes(), x, out, |c, e, xe, oe| {
            if c == 0 {
                self.mass_e.apply(e, xe, oe)
            } else {
                self.mass_v.apply(e, xe, oe)
            }
        });
    }

    fn mass_solve(&self, x: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        super::blockwise(2, d.n_elements(), d.n_nodes(), x, out, |c, e, xe, oe| {
            if c == 0 {
                self.mass_e.solve(e, xe, oe)
            } else {
                self.mass_v.solve(e, xe, oe)
            }
        });
    }

    fn max_wave_speed(&self) -> f64 {
        self.c.iter().fold(0.0, |m, &v| m.max(v))
    }

    fn param_layout(&self) -> ParamLayout {
        match self.variant {
            AcousticVariant::Continuous => ParamLayout::ContinuousNodal {
                n_dofs: continuous_dof_count(&self.disc),
            },
            AcousticVariant::Discontinuous => ParamLayout::ElementConstant {
                n_elements: self.disc.n_elements(),
            },
        }
    }

    fn accumulate_gradient(&self, stage: &StageData, form: KernelForm, acc: &mut GradientParts) {
        let disc = &self.disc;
        let basis = &disc.basis;
        let np = disc.n_nodes();
        let nq = basis.n_quad();
        let (y, f, p) = (stage.state, stage.rate, stage.adjoint);
        let mut t1 = vec![0.0; np];
        let mut t2 = vec![0.0; np];
        for e in 0..disc.n_elements() {
            let (oe, ov) = (self.offset(0, e), self.offset(1, e));
            let jac = disc.mesh.jacobian(e);
            matvec(&self.mref, np, &p[ov..ov + np], &mut t1);
            basis.diff_t_into(&t1, &mut t2);
            let res_weights = if form == KernelForm::Full {
                // (J e_t − v_x) h at quadrature points, tested against each node's basis function.
                let ft = basis.to_quadrature(&f[oe..oe + np]);
                basis.diff_into(&y[ov..ov + np], &mut t1);
                let vx = basis.to_quadrature(&t1);
                let hq = basis.to_quadrature(&p[oe..oe + np]);
                let quad: Vec<f64> = (0..nq)
                    .map(|k| basis.quad_weights()[k] * (jac * ft[k] - vx[k]) * hq[k])
                    .collect();
                let mut r = vec![0.0; np];
                basis.from_quad_t_into(&quad, &mut r);
                Some(r)
            } else {
                None
            };
            for i in 0..np {
                let dlam = 2.0 * self.rho[e * np + i] * self.c[e * np + i];
                let mut g = -dlam * y[oe + i] * t2[i];
                if let Some(r) = &res_weights {
                    g += dlam * r[i];
                }
                acc.volume[self.param_index(e, i)] += g;
            }
        }
        match self.variant {
            AcousticVariant::Continuous => {
                for (_, face) in disc.mesh.unique_faces() {
                    if let (crate::mesh::FaceSide::Element(el), crate::mesh::FaceSide::Element(_)) =
                        (face.left, face.right)
                    {
                        let fu = self.face_state(y, el, Side::Right, None, false);
                        let fp = self.face_state(p, el, Side::Right, None, false);
                        let g = acoustic_face_kernel(&fu, &fp, form);
                        acc.add_face(self.param_index(el, np - 1), g, g);
                    }
                }
            }
            AcousticVariant::Discontinuous => {
                for e in 0..disc.n_elements() {
                    for side in [Side::Left, Side::Right] {
                        if let Neighbor::Element(_) = disc.mesh.neighbor(e, side) {
                            let fu = self.face_state(y, e, side, None, false);
                            let fp = self.face_state(p, e, side, None, false);
                            let (g, non_jump) = acoustic_side_kernel_discontinuous(&fu, &fp, form);
                            acc.add_face(e, g, g - non_jump);
                        }
                    }
                }
            }
        }
        if !disc.mesh.is_periodic() {
            for (side, e) in [(Side::Left, 0), (Side::Right, disc.n_elements() - 1)] {
                let i = self.node_index(side);
                let fu = self.face_state(y, e, side, Some(stage.t), false);
                let fp = self.face_state(p, e, side, None, false);
                let [rho, c] = fu.material_minus;
                let dsigma_plus = match disc.mesh.boundary_kind(side) {
                    BoundaryKind::TractionLike => -2.0 * rho * c * fu.u_minus[0],
                    _ => 2.0 * rho * c * fu.u_plus[0],
                };
                let g = acoustic_boundary_kernel(&fu, &fp, dsigma_plus, form);
                acc.add_face(self.param_index(e, i), g, g);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_matches_hand_values() {
        let face = FaceState::new([1.0, 0.0], [0.0, 0.0], 1.0, [1.0, 2.0]);
        let (nv, le) = acoustic_flux(&face).unwrap();
        assert!((nv + 1.0).abs() < 1e-15);
        assert!((le - 2.0).abs() < 1e-15);
    }

    #[test]
    fn interface_coefficient_example() {
        assert_eq!(interface_coefficient(1.0, 3.0), 0.25);
    }
}
