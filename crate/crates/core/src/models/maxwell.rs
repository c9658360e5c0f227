//! Maxwell's equations reduced to a 1D TEM wave: `μ H_t = −E_x`, `ε E_t = −H_x`,
//! with `H = H_z` and `E = E_y` for propagation along x.
//!
//! Non-periodic ends carry a surface current through the ghost state
//! `H⁺ = −H⁻ + 2 J_s(t)`, `E⁺ = E⁻`. The current is the optimization
//! parameter: nodal values at every step boundary, linear in between.

use super::{
    check_positive, expand_elementwise, matvec, BlockMass, Form, GradientParts, KernelForm,
    ParamLayout, Profile, SpatialOperator, StageData,
};
use crate::error::ModelError;
use crate::field::{diff, Discretization, FaceState};
use crate::mesh::{BoundaryKind, Neighbor, Side};
use std::sync::Arc;

fn impedances(material: [f64; 2]) -> (f64, f64) {
    let z = (material[0] / material[1]).sqrt();
    (z, 1.0 / z)
}

fn check_materials(face: &FaceState) -> Result<(), ModelError> {
    for (name, v) in [
        ("permeability", face.material_minus[0]),
        ("permittivity", face.material_minus[1]),
        ("permeability", face.material_plus[0]),
        ("permittivity", face.material_plus[1]),
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

/// Upwind penalties `(E† − E⁻, H† − H⁻)` on a face with traces `[H, E]`:
///
/// `E† − E⁻ = −(Y⁺⟨⟨E⟩⟩ − n⟨⟨H⟩⟩) / (2{{Y}})`,
/// `H† − H⁻ = −(Z⁺⟨⟨H⟩⟩ − n⟨⟨E⟩⟩) / (2{{Z}})`.
///
/// These are the scalar components of `n×(E†−E⁻)` (along z, divided by n)
/// and `n×(H†−H⁻)` (along y, divided by −n).
pub fn maxwell_flux(face: &FaceState) -> Result<(f64, f64), ModelError> {
    check_materials(face)?;
    Ok(flux(face))
}

/// Adjoint penalties `(F† − F⁻, G† − G⁻)` on a face with adjoint traces `[G, F]`:
///
/// `F† = {{YF}}/{{Y}} − n⟨⟨G⟩⟩/(2{{Y}})`, `G† = {{ZG}}/{{Z}} − n⟨⟨F⟩⟩/(2{{Z}})`.
pub fn maxwell_adjoint_flux(face: &FaceState) -> Result<(f64, f64), ModelError> {
    check_materials(face)?;
    Ok(adjoint_flux(face))
}

/// Adjoint ghost `(G⁺, F⁺) = (−G⁻, F⁻)`.
pub fn maxwell_adjoint_ghost(g_minus: f64, f_minus: f64) -> (f64, f64) {
    (-g_minus, f_minus)
}

/// Boundary-current kernel `g = n F − G / Y` from the adjoint traces.
pub fn gradient_kernel_maxwell_boundary(g_minus: f64, f_minus: f64, n: f64, y: f64) -> f64 {
    n * f_minus - g_minus / y
}

fn flux(face: &FaceState) -> (f64, f64) {
    let (zm, ym) = impedances(face.material_minus);
    let (zp, yp) = impedances(face.material_plus);
    let n = face.n_minus;
    let (dh, de) = (diff(face, 0), diff(face, 1));
    (
        -(yp * de - n * dh) / (ym + yp),
        -(zp * dh - n * de) / (zm + zp),
    )
}

fn adjoint_flux(face: &FaceState) -> (f64, f64) {
    let (zm, ym) = impedances(face.material_minus);
    let (zp, yp) = impedances(face.material_plus);
    let n = face.n_minus;
    let [gm, fm] = face.u_minus;
    let [gp, fp] = face.u_plus;
    let f_dag = (ym * fm + yp * fp - n * (gm - gp)) / (ym + yp);
    let g_dag = (zm * gm + zp * gp - n * (fm - fp)) / (zm + zp);
    (f_dag - fm, g_dag - gm)
}

/// Piecewise-linear time series on a uniform grid of step boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl CurrentSeries {
    /// Interpolation weights `(index, weight)` of the two nodes around `t`.
    pub fn weights(&self, t: f64) -> [(usize, f64); 2] {
        let last = self.values.len() - 1;
        let s = (t / self.dt).max(0.0);
        let i = (s.floor() as usize).min(last.saturating_sub(1));
        let theta = (s - i as f64).clamp(0.0, 1.0);
        if last == 0 {
            return [(0, 1.0), (0, 0.0)];
        }
        [(i, 1.0 - theta), (i + 1, theta)]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.weights(t)
            .iter()
            .map(|&(i, w)| w * self.values[i])
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct MaxwellOperator {
    disc: Arc<Discretization>,
    form: Form,
    mu: Vec<f64>,
    eps: Vec<f64>,
    mass_h: BlockMass,
    mass_e: BlockMass,
    mref: Vec<f64>,
    /// Sides that carry a current, in parameter order.
    sides: Vec<Side>,
    currents: Vec<CurrentSeries>,
}

impl MaxwellOperator {
    /// `currents` holds `n_times` values per non-periodic side (left first).
    /// Permeability and permittivity are sampled at element midpoints.
    pub fn new(
        disc: Arc<Discretization>,
        form: Form,
        permeability: Profile,
        permittivity: Profile,
        currents: &[f64],
        dt: f64,
        n_times: usize,
    ) -> Result<Self, ModelError> {
        let sides = current_sides(&disc)?;
        if currents.len() != sides.len() * n_times {
            return Err(ModelError::ParameterLength {
                expected: sides.len() * n_times,
                found: currents.len(),
            });
        }
        let k = disc.n_elements();
        let mid = |p: &Profile| -> Vec<f64> {
            (0..k).map(|e| p.eval(disc.mesh.map_point(e, 0.0))).collect()
        };
        let (mu_e, eps_e) = (mid(&permeability), mid(&permittivity));
        let mu = expand_elementwise(&disc, &mu_e);
        let eps = expand_elementwise(&disc, &eps_e);
        check_positive("permeability", &mu, disc.coords())?;
        check_positive("permittivity", &eps, disc.coords())?;
        let nq = disc.basis.n_quad();
        let mass_h = BlockMass::new(&disc, |e| vec![mu_e[e]; nq]);
        let mass_e = BlockMass::new(&disc, |e| vec![eps_e[e]; nq]);
        let mref = disc.basis.mass_matrix();
        let currents = currents
            .chunks(n_times.max(1))
            .map(|c| CurrentSeries {
                dt,
                values: c.to_vec(),
            })
            .collect();
        Ok(Self {
            disc,
            form,
            mu,
            eps,
            mass_h,
            mass_e,
            mref,
            sides,
            currents,
        })
    }

    fn offset(&self, comp: usize, e: usize) -> usize {
        (comp * self.disc.n_elements() + e) * self.disc.n_nodes()
    }

    fn current(&self, side: Side) -> Option<&CurrentSeries> {
        self.sides
            .iter()
            .position(|&s| s == side)
            .map(|i| &self.currents[i])
    }

    fn face_state(&self, q: &[f64], e: usize, side: Side, t: Option<f64>, adjoint: bool) -> FaceState {
        let np = self.disc.n_nodes();
        let i = if side == Side::Left { 0 } else { np - 1 };
        let n = if side == Side::Left { -1.0 } else { 1.0 };
        let um = [q[self.offset(0, e) + i], q[self.offset(1, e) + i]];
        let mat_m = [self.mu[e * np + i], self.eps[e * np + i]];
        let (up, mat_p) = match self.disc.mesh.neighbor(e, side) {
            Neighbor::Element(nb) => {
                let j = np - 1 - i;
                (
                    [q[self.offset(0, nb) + j], q[self.offset(1, nb) + j]],
                    [self.mu[nb * np + j], self.eps[nb * np + j]],
                )
            }
            Neighbor::Boundary(bs) => {
                let ghost = if adjoint {
                    let (g, f) = maxwell_adjoint_ghost(um[0], um[1]);
                    [g, f]
                } else {
                    let js = match (t, self.current(bs)) {
                        (Some(t), Some(c)) => c.eval(t),
                        _ => 0.0,
                    };
                    [-um[0] + 2.0 * js, um[1]]
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
}

/// Non-periodic sides, which must use the traction-like (current sheet) closure.
pub fn current_sides(disc: &Discretization) -> Result<Vec<Side>, ModelError> {
    if disc.mesh.is_periodic() {
        return Ok(Vec::new());
    }
    for side in [Side::Left, Side::Right] {
        let kind = disc.mesh.boundary_kind(side);
        if kind != BoundaryKind::TractionLike {
            return Err(ModelError::UnsupportedBoundary {
                model: "maxwell1d",
                kind: kind.to_string(),
            });
        }
    }
    Ok(vec![Side::Left, Side::Right])
}

impl SpatialOperator for MaxwellOperator {
    fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["H", "E"]
    }

    fn form(&self) -> Form {
        self.form
    }

    fn residual(&self, q: &[f64], t: Option<f64>, out: &mut [f64]) {
        let disc = &self.disc;
        let np = disc.n_nodes();
        let mut t1 = vec![0.0; np];
        for e in 0..disc.n_elements() {
            let (oh, oe) = (self.offset(0, e), self.offset(1, e));
            let mut rh = vec![0.0; np];
            let mut re = vec![0.0; np];
            match self.form {
                Form::Strong => {
                    disc.basis.diff_into(&q[oe..oe + np], &mut t1);
                    matvec(&self.mref, np, &t1, &mut rh);
                    disc.basis.diff_into(&q[oh..oh + np], &mut t1);
                    matvec(&self.mref, np, &t1, &mut re);
                    rh.iter_mut().chain(re.iter_mut()).for_each(|x| *x = -*x);
                }
                Form::Weak => {
                    matvec(&self.mref, np, &q[oe..oe + np], &mut t1);
                    disc.basis.diff_t_into(&t1, &mut rh);
                    matvec(&self.mref, np, &q[oh..oh + np], &mut t1);
                    disc.basis.diff_t_into(&t1, &mut re);
                }
            }
            for (side, i) in [(Side::Left, 0), (Side::Right, np - 1)] {
                let face = self.face_state(q, e, side, t, false);
                let (de, dh) = flux(&face);
                let n = face.n_minus;
                match self.form {
                    Form::Strong => {
                        rh[i] -= n * de;
                        re[i] -= n * dh;
                    }
                    Form::Weak => {
                        rh[i] -= n * (face.u_minus[1] + de);
                        re[i] -= n * (face.u_minus[0] + dh);
                    }
                }
            }
            out[oh..oh + np].copy_from_slice(&rh);
            out[oe..oe + np].copy_from_slice(&re);
        }
    }

    fn adjoint_residual(&self, p: &[f64], out: &mut [f64]) {
        let disc = &self.disc;
        let np = disc.n_nodes();
        let mut t1 = vec![0.0; np];
        for e in 0..disc.n_elements() {
            let (og, of) = (self.offset(0, e), self.offset(1, e));
            let mut rh = vec![0.0; np];
            let mut re = vec![0.0; np];
            match self.form {
                Form::Strong => {
                    matvec(&self.mref, np, &p[of..of + np], &mut t1);
                    disc.basis.diff_t_into(&t1, &mut rh);
                    matvec(&self.mref, np, &p[og..og + np], &mut t1);
                    disc.basis.diff_t_into(&t1, &mut re);
                    rh.iter_mut().chain(re.iter_mut()).for_each(|x| *x = -*x);
                }
                Form::Weak => {
                    disc.basis.diff_into(&p[of..of + np], &mut t1);
                    matvec(&self.mref, np, &t1, &mut rh);
                    disc.basis.diff_into(&p[og..og + np], &mut t1);
                    matvec(&self.mref, np, &t1, &mut re);
                }
            }
            for (side, i) in [(Side::Left, 0), (Side::Right, np - 1)] {
                let face = self.face_state(p, e, side, None, true);
                let (df, dg) = adjoint_flux(&face);
                let n = face.n_minus;
                match self.form {
                    Form::Strong => {
                        rh[i] += n * (face.u_minus[1] + df);
                        re[i] += n * (face.u_minus[0] + dg);
                    }
                    Form::Weak => {
                        rh[i] += n * df;
                        re[i] += n * dg;
                    }
                }
            }
            out[og..og + np].copy_from_slice(&rh);
            out[of..of + np].copy_from_slice(&re);
        }
    }

    fn mass_apply(&self, x: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        super::blockwise(2, d.n_elements(), d.n_nodes(), x, out, |c, e, xe, oe| {
            if c == 0 {
                self.mass_h.apply(e, xe, oe)
            } else {
                self.mass_e.apply(e, xe, oe)
            }
        });
    }

    fn mass_solve(&self, x: &[f64], out: &mut [f64]) {
        let d = &self.disc;
        super::blockwise(2, d.n_elements(), d.n_nodes(), x, out, |c, e, xe, oe| {
            if c == 0 {
                self.mass_h.solve(e, xe, oe)
            } else {
                self.mass_e.solve(e, xe, oe)
            }
        });
    }

    fn max_wave_speed(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.eps)
            .fold(0.0, |m, (mu, eps)| m.max(1.0 / (mu * eps).sqrt()))
    }

    fn param_layout(&self) -> ParamLayout {
        ParamLayout::BoundaryTimeSeries {
            sides: self.sides.clone(),
            n_times: self.currents.first().map_or(0, |c| c.values.len()),
        }
    }

    fn accumulate_gradient(&self, stage: &StageData, _form: KernelForm, acc: &mut GradientParts) {
        let np = self.disc.n_nodes();
        let k = self.disc.n_elements();
        for (s, &side) in self.sides.iter().enumerate() {
            let (e, i, n) = match side {
                Side::Left => (0, 0, -1.0),
                Side::Right => (k - 1, np - 1, 1.0),
            };
            let (_, y) = impedances([self.mu[e * np + i], self.eps[e * np + i]]);
            let g = gradient_kernel_maxwell_boundary(
                stage.adjoint[self.offset(0, e) + i],
                stage.adjoint[self.offset(1, e) + i],
                n,
                y,
            );
            let series = &self.currents[s];
            for (idx, w) in series.weights(stage.t) {
                if w != 0.0 {
                    acc.add_face(s * series.values.len() + idx, w * g, 0.0);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn current_series_is_linear_between_nodes() {
        let c = CurrentSeries {
            dt: 0.5,
            values: vec![0.0, 1.0, 3.0],
        };
        assert!((c.eval(0.25) - 0.5).abs() < 1e-15);
        assert!((c.eval(0.75) - 2.0).abs() < 1e-15);
        assert!((c.eval(1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn ghost_flips_g_only() {
        assert_eq!(maxwell_adjoint_ghost(1.0, 1.0), (-1.0, 1.0));
    }
}
