use adg_core::field::{diff, jump, mean, FaceState};
use adg_core::models::acoustic::{
    acoustic_adjoint_flux, acoustic_adjoint_flux_discontinuous, acoustic_boundary_kernel,
    acoustic_face_kernel, acoustic_flux, acoustic_flux_discontinuous,
    acoustic_side_kernel_discontinuous, interface_coefficient,
};
use adg_core::models::advection::{
    advection_adjoint_flux, advection_adjoint_ghost, advection_face_kernel, advection_flux,
    advection_inflow_kernel, advection_volume_kernel,
};
use adg_core::models::maxwell::{
    gradient_kernel_maxwell_boundary, maxwell_adjoint_flux, maxwell_adjoint_ghost, maxwell_flux,
};
use adg_core::models::{
    continuous_dof_count, AdvectionOperator, Form, KernelForm, Signal, SpatialOperator,
};
use adg_core::{BoundaryKind, Discretization, Mesh1D, NodalBasis, QuadratureMode};
use proptest::prelude::*;
use std::f64::consts::PI;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn face(um: f64, up: f64, n: f64, material: [f64; 2]) -> FaceState {
    FaceState::new([um, 0.0], [up, 0.0], n, material)
}

#[test]
fn jump_mean_diff_examples() {
    let f = face(3.0, 5.0, 1.0, [1.0, 1.0]);
    assert_eq!(jump(&f, 0), -2.0);
    assert_eq!(mean(&f, 0), 4.0);
    assert_eq!(diff(&f, 0), -2.0);
    assert_eq!(jump(&face(1.0, 0.0, -1.0, [1.0, 1.0]), 0), -1.0);
    let g = face(1.0, -1.0, 1.0, [1.0, 1.0]);
    assert_eq!((mean(&g, 0), diff(&g, 0)), (0.0, 2.0));
    let c = face(2.5, 2.5, -1.0, [1.0, 1.0]);
    assert_eq!((jump(&c, 0), mean(&c, 0), diff(&c, 0)), (0.0, 2.5, 0.0));
}

#[test]
fn advection_flux_examples() {
    let f = face(3.0, 5.0, 1.0, [2.0, 0.0]);
    assert!(close(advection_flux(&f, 0.0).unwrap(), 6.0, 1e-15));
    assert!(close(advection_flux(&f, 1.0).unwrap(), 8.0, 1e-15));
    assert!(close(advection_adjoint_flux(&f, 0.0).unwrap(), 10.0, 1e-15));
    for alpha in [0.0, 0.3, 1.0] {
        let c = face(1.7, 1.7, -1.0, [2.0, 0.0]);
        assert!(close(advection_flux(&c, alpha).unwrap(), 3.4, 1e-15));
        assert!(close(advection_adjoint_flux(&c, alpha).unwrap(), 3.4, 1e-15));
    }
}

#[test]
fn advection_flux_rejects_bad_inputs() {
    assert!(advection_flux(&face(1.0, 0.0, 1.0, [0.0, 0.0]), 0.0).is_err());
    assert!(advection_adjoint_flux(&face(1.0, 0.0, 1.0, [1.0, 0.0]), 1.5).is_err());
}

#[test]
fn advection_outflow_ghost_with_zero_boundary_cost() {
    let pm = 0.8;
    let pp = advection_adjoint_ghost(pm, 2.0, 0.0, 0.0);
    assert_eq!(pp, 0.0);
    let f = face(pm, pp, 1.0, [2.0, 0.0]);
    let flux = advection_adjoint_flux(&f, 0.0).unwrap();
    assert!(close(flux, 2.0 * mean(&f, 0) - jump(&f, 0), 1e-15));
    assert!(close(flux, 0.0, 1e-15));
}

#[test]
fn advection_kernels_vanish_for_zero_adjoint() {
    let disc = Discretization::new(
        Mesh1D::uniform(0.0, 1.0, 1, [BoundaryKind::Periodic; 2]).unwrap(),
        NodalBasis::new(3, QuadratureMode::Collocation).unwrap(),
    );
    let mref = disc.basis.mass_matrix();
    let u = disc.sample(|x| x.sin());
    let g = advection_volume_kernel(&disc, &mref, &u, &[0.0; 4]);
    assert!(g.iter().all(|&v| v == 0.0));
    let fu = face(1.0, 0.3, 1.0, [1.0, 0.0]);
    let fp = face(0.0, 0.0, 1.0, [1.0, 0.0]);
    assert_eq!(advection_face_kernel(&fu, &fp, 0.0), 0.0);
    assert_eq!(advection_inflow_kernel(1.0, 0.5, 0.0, 0.0), 0.0);
}

#[test]
fn advection_face_kernel_example() {
    // Sign confirmed against central differences of the discrete cost.
    let fu = face(1.0, 0.0, 1.0, [1.0, 0.0]);
    let fp = face(0.0, 1.0, 1.0, [1.0, 0.0]);
    assert!(close(advection_face_kernel(&fu, &fp, 0.0), -1.0, 1e-15));
}

#[test]
fn advection_inflow_kernel_values() {
    assert!(close(advection_inflow_kernel(1.0, 0.25, 2.0, 0.0), 1.5, 1e-15));
    assert!(close(advection_inflow_kernel(1.0, 0.25, 2.0, 1.0), 0.75, 1e-15));
    assert_eq!(advection_inflow_kernel(0.4, 0.4, 2.0, 0.0), 0.0);
}

fn advection_op(k: usize, order: usize, mode: QuadratureMode, speed: f64, boundary: BoundaryKind, inflow: Signal) -> AdvectionOperator {
    let disc = Discretization::new(
        Mesh1D::uniform(0.0, 1.0, k, [boundary; 2]).unwrap(),
        NodalBasis::new(order, mode).unwrap(),
    );
    let n = continuous_dof_count(&disc);
    AdvectionOperator::new(disc, &vec![speed; n], 0.0, Form::Strong, inflow, None).unwrap()
}

#[test]
fn advection_single_element_matches_hand_assembly() {
    let op = advection_op(1, 1, QuadratureMode::Collocation, 1.0, BoundaryKind::InflowDirichlet, Signal::Const(0.5));
    let mut r = [0.0; 2];
    op.residual(&[1.0, 3.0], Some(0.0), &mut r);
    // -M D u plus the inflow penalty -(u0 - u_l) on node 0.
    assert!(close(r[0], -1.5, 1e-14));
    assert!(close(r[1], -1.0, 1e-14));
    let mut rate = [0.0; 2];
    op.rate(&[1.0, 3.0], Some(0.0), &mut rate);
    assert!(close(rate[0], -3.0, 1e-14));
    assert!(close(rate[1], -2.0, 1e-14));
}

#[test]
fn advection_preserves_constants_on_periodic_mesh() {
    for mode in [QuadratureMode::Collocation, QuadratureMode::exact_for(3)] {
        let op = advection_op(5, 3, mode, 1.7, BoundaryKind::Periodic, Signal::Zero);
        let mut r = vec![0.0; op.len()];
        op.residual(&vec![2.0; op.len()], Some(0.0), &mut r);
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }
}

#[test]
fn advection_rate_approximates_exact_derivative() {
    for order in 1..=3 {
        let mut errs = Vec::new();
        for k in [8, 16, 32] {
            let op = advection_op(k, order, QuadratureMode::exact_for(order), 1.0, BoundaryKind::Periodic, Signal::Zero);
            let disc = op.disc().clone();
            let u = disc.sample(|x| (2.0 * PI * x).sin());
            let mut rate = vec![0.0; op.len()];
            op.rate(&u, None, &mut rate);
            let err = disc
                .coords()
                .iter()
                .zip(&rate)
                .map(|(&x, r)| (r + 2.0 * PI * (2.0 * PI * x).cos()).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > order as f64 - 0.2, "order {order}: rate {rate}");
        }
    }
}

#[test]
fn acoustic_flux_examples() {
    let f = FaceState::new([1.0, 0.0], [0.0, 0.0], 1.0, [1.0, 2.0]);
    let (nv, le) = acoustic_flux(&f).unwrap();
    assert!(close(nv, -1.0, 1e-15));
    assert!(close(le, 2.0, 1e-15));

    let g = FaceState::new([0.0, 1.0], [0.0, -1.0], 1.0, [1.0, 1.0]);
    assert_eq!(jump(&g, 1), 2.0);
    let (nv, le) = acoustic_flux(&g).unwrap();
    assert!(close(le, -1.0, 1e-15));
    assert!(close(nv, 0.0, 1e-15));
    let (nw, lh) = acoustic_adjoint_flux(&g).unwrap();
    assert!(close(lh, 1.0, 1e-15));
    assert!(close(nw, 0.0, 1e-15));

    let c = FaceState::new([0.4, -0.3], [0.4, -0.3], -1.0, [1.5, 2.0]);
    let lam = 1.5 * 4.0;
    for (nv, le) in [acoustic_flux(&c).unwrap(), acoustic_adjoint_flux(&c).unwrap()] {
        assert!(close(nv, 0.3, 1e-15));
        assert!(close(le, lam * 0.4, 1e-14));
    }
}

#[test]
fn acoustic_flux_matches_characteristic_solution() {
    // Riemann solution of e_t = v_x, v_t = c² e_x with z = ρc on both sides.
    let (rho, c) = (1.3_f64, 0.8_f64);
    let lam = rho * c * c;
    let z = rho * c;
    let (em, vm, ep, vp) = (0.7, -0.2, -0.4, 0.9);
    let f = FaceState::new([em, vm], [ep, vp], 1.0, [rho, c]);
    let sigma_star = 0.5 * (lam * em + lam * ep) - 0.5 * z * (vm - vp);
    let v_star = 0.5 * (vm + vp) - 0.5 * (lam * em - lam * ep) / z;
    let (nv, le) = acoustic_flux(&f).unwrap();
    assert!(close(nv, v_star, 1e-14));
    assert!(close(le, sigma_star, 1e-14));
}

#[test]
fn discontinuous_flux_examples() {
    assert_eq!(interface_coefficient(1.0, 3.0), 0.25);
    let mut f = FaceState::new([0.3, -0.1], [0.1, -0.1], 1.0, [1.0, 1.0]);
    f.material_plus = [3.0, 1.0];
    let (nv, le) = acoustic_flux_discontinuous(&f).unwrap();
    assert!(close(nv, -0.1, 1e-15));
    assert!(close(le, 0.3, 1e-15));
    assert!(acoustic_flux_discontinuous(&FaceState::new([0.0; 2], [0.0; 2], 1.0, [-1.0, 1.0])).is_err());
}

#[test]
fn maxwell_flux_examples() {
    let c = FaceState::new([0.4, 1.1], [0.4, 1.1], 1.0, [1.0, 2.0]);
    assert_eq!(maxwell_flux(&c).unwrap(), (0.0, 0.0));
    assert_eq!(maxwell_adjoint_flux(&c).unwrap(), (0.0, 0.0));

    // Reflecting boundary with zero current: H⁺ = −H⁻, E⁺ = E⁻ gives H† = 0.
    let (hm, em) = (0.6, -0.25);
    let b = FaceState::new([hm, em], [-hm, em], 1.0, [1.0, 1.0]);
    let (de, dh) = maxwell_flux(&b).unwrap();
    assert!(close(dh, -hm, 1e-15));
    assert!(close(de, hm, 1e-15));

    assert_eq!(maxwell_adjoint_ghost(1.0, 1.0), (-1.0, 1.0));
    assert_eq!(gradient_kernel_maxwell_boundary(0.0, 0.0, 1.0, 2.0), 0.0);
    assert!(maxwell_flux(&FaceState::new([0.0; 2], [0.0; 2], 1.0, [1.0, 0.0])).is_err());
}

#[test]
fn maxwell_flux_is_upwind_for_unit_impedance() {
    for n in [1.0, -1.0] {
        let [hm, em, hp, ep] = [0.3, -0.7, 1.2, 0.5];
        let f = FaceState::new([hm, em], [hp, ep], n, [1.0, 1.0]);
        let (de, dh) = maxwell_flux(&f).unwrap();
        // Riemann invariants E + nH leave through the face, E − nH enter.
        let out = em + n * hm;
        let inc = ep - n * hp;
        assert!(close(em + de, 0.5 * (out + inc), 1e-15));
        assert!(close(hm + dh, 0.5 * n * (out - inc), 1e-15));
    }
}

#[test]
fn acoustic_kernels_vanish_for_zero_adjoint() {
    let u = FaceState::new([0.4, -0.9], [1.2, 0.3], 1.0, [1.2, 0.9]);
    let p = FaceState::new([0.0; 2], [0.0; 2], 1.0, [1.2, 0.9]);
    for form in [KernelForm::Simplified, KernelForm::Full] {
        assert_eq!(acoustic_face_kernel(&u, &p, form), 0.0);
        assert_eq!(acoustic_side_kernel_discontinuous(&u, &p, form), (0.0, 0.0));
        assert_eq!(acoustic_boundary_kernel(&u, &p, 0.3, form), 0.0);
    }
}

fn trace() -> impl Strategy<Value = [f64; 2]> {
    [-2.0..2.0f64, -2.0..2.0f64]
}

fn material() -> impl Strategy<Value = [f64; 2]> {
    [0.2..3.0f64, 0.2..3.0f64]
}

fn sign() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(-1.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fluxes_are_consistent(u in trace(), m in material(), m2 in material(), n in sign(), alpha in 0.0..=1.0f64) {
        let mut f = FaceState::new(u, u, n, m);
        let a = m[0];
        prop_assert!(close(advection_flux(&f, alpha).unwrap(), a * u[0], 1e-13));
        prop_assert!(close(advection_adjoint_flux(&f, alpha).unwrap(), a * u[0], 1e-13));
        let lam = m[0] * m[1] * m[1];
        for (nv, le) in [acoustic_flux(&f).unwrap(), acoustic_adjoint_flux(&f).unwrap()] {
            prop_assert!(close(nv, n * u[1], 1e-13));
            prop_assert!(close(le, lam * u[0], 1e-12));
        }
        f.material_plus = m2;
        let (de, dh) = maxwell_flux(&f).unwrap();
        prop_assert!(de.abs() < 1e-13 && dh.abs() < 1e-13);
        let (df, dg) = maxwell_adjoint_flux(&f).unwrap();
        prop_assert!(df.abs() < 1e-13 && dg.abs() < 1e-13);
    }

    #[test]
    fn discontinuous_fluxes_reduce_for_equal_materials(um in trace(), up in trace(), m in material(), n in sign()) {
        let f = FaceState::new(um, up, n, m);
        let (a, b) = acoustic_flux(&f).unwrap();
        let (c, d) = acoustic_flux_discontinuous(&f).unwrap();
        prop_assert!(close(a, c, 1e-13 * (1.0 + a.abs())));
        prop_assert!(close(b, d, 1e-13 * (1.0 + b.abs())));
        let (a, b) = acoustic_adjoint_flux(&f).unwrap();
        let (c, d) = acoustic_adjoint_flux_discontinuous(&f).unwrap();
        prop_assert!(close(a, c, 1e-13 * (1.0 + a.abs())));
        prop_assert!(close(b, d, 1e-13 * (1.0 + b.abs())));
    }

    #[test]
    fn discontinuous_fluxes_conserve_across_interface(um in trace(), up in trace(), m in material(), m2 in material(), n in sign()) {
        let mut f = FaceState::new(um, up, n, m);
        f.material_plus = m2;
        let (nv, le) = acoustic_flux_discontinuous(&f).unwrap();
        let (nv2, le2) = acoustic_flux_discontinuous(&f.flipped()).unwrap();
        prop_assert!(close(nv, -nv2, 1e-12));
        prop_assert!(close(le, le2, 1e-12));
    }

    #[test]
    fn side_kernels_sum_to_face_kernel(u0 in trace(), u1 in trace(), p0 in trace(), p1 in trace(), m in material(), n in sign()) {
        let u = FaceState::new(u0, u1, n, m);
        let p = FaceState::new(p0, p1, n, m);
        for form in [KernelForm::Simplified, KernelForm::Full] {
            let (a, _) = acoustic_side_kernel_discontinuous(&u, &p, form);
            let (b, _) = acoustic_side_kernel_discontinuous(&u.flipped(), &p.flipped(), form);
            let g = acoustic_face_kernel(&u, &p, form);
            prop_assert!(close(a + b, g, 1e-12 * (1.0 + g.abs())));
        }
    }

    #[test]
    fn continuous_traces_leave_only_non_jump_terms(u in trace(), p in trace(), m in material(), n in sign()) {
        let fu = FaceState::new(u, u, n, m);
        let fp = FaceState::new(p, p, n, m);
        prop_assert!(advection_face_kernel(&fu, &fp, 0.0).abs() < 1e-14);
        for form in [KernelForm::Simplified, KernelForm::Full] {
            prop_assert!(acoustic_face_kernel(&fu, &fp, form).abs() < 1e-13);
            let (g, non_jump) = acoustic_side_kernel_discontinuous(&fu, &fp, form);
            prop_assert!(close(g, non_jump, 1e-12 * (1.0 + g.abs())));
        }
    }
}
