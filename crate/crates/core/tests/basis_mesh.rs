use adg_core::basis::{gauss_rule, gll_rule, legendre};
use adg_core::error::{BasisError, MeshError};
use adg_core::mesh::Neighbor;
use adg_core::{BoundaryKind, Mesh1D, NodalBasis, QuadratureMode, Side};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn gll_order_two_matches_closed_form() {
    let (x, w) = gll_rule(2).unwrap();
    let ex = [-1.0, 0.0, 1.0];
    let ew = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
    for i in 0..3 {
        assert!(close(x[i], ex[i], 1e-15));
        assert!(close(w[i], ew[i], 1e-15));
    }
}

#[test]
fn gll_order_three_interior_nodes() {
    let (x, w) = gll_rule(3).unwrap();
    let s = (1.0f64 / 5.0).sqrt();
    assert!(close(x[1], -s, 1e-15) && close(x[2], s, 1e-15));
    assert!(close(w[0], 1.0 / 6.0, 1e-15) && close(w[1], 5.0 / 6.0, 1e-15));
}

#[test]
fn zero_order_is_rejected() {
    assert_eq!(
        NodalBasis::new(0, QuadratureMode::Collocation).unwrap_err(),
        BasisError::OrderZero
    );
}

#[test]
fn too_few_quadrature_points_is_rejected() {
    let err = NodalBasis::new(3, QuadratureMode::OverIntegration { points: 2 }).unwrap_err();
    assert!(matches!(err, BasisError::TooFewQuadraturePoints { .. }));
}

#[test]
fn differentiate_checks_length() {
    let b = NodalBasis::new(2, QuadratureMode::Collocation).unwrap();
    assert!(b.differentiate(&[1.0, 2.0]).is_err());
}

#[test]
fn legendre_values_at_one() {
    for n in 0..8 {
        let (p, dp) = legendre(n, 1.0);
        assert!(close(p, 1.0, 1e-14));
        assert!(close(dp, (n * (n + 1)) as f64 / 2.0, 1e-12));
    }
}

#[test]
fn collocated_mass_is_diagonal_weights() {
    let b = NodalBasis::new(4, QuadratureMode::Collocation).unwrap();
    let m = b.mass_matrix();
    for i in 0..5 {
        for j in 0..5 {
            let e = if i == j { b.weights()[i] } else { 0.0 };
            assert!(close(m[i * 5 + j], e, 1e-14));
        }
    }
}

#[test]
fn over_integrated_mass_is_exact() {
    // ∫ x^2 over [-1, 1] for the degree-2 interpolant of x^2.
    let b = NodalBasis::new(2, QuadratureMode::exact_for(2)).unwrap();
    let f: Vec<f64> = b.nodes().iter().map(|x| x * x).collect();
    let one = vec![1.0; 3];
    let v = b.quadrature_inner_product(&f, &f, &one).unwrap();
    assert!(close(v, 2.0 / 5.0, 1e-14));
}

proptest! {
    #[test]
    fn differentiation_exact_for_polynomials(order in 1usize..9, coeffs in prop::collection::vec(-2.0f64..2.0, 9)) {
        let b = NodalBasis::new(order, QuadratureMode::Collocation).unwrap();
        let p = |x: f64| (0..=order).map(|k| coeffs[k] * x.powi(k as i32)).sum::<f64>();
        let dp = |x: f64| (1..=order).map(|k| k as f64 * coeffs[k] * x.powi(k as i32 - 1)).sum::<f64>();
        let vals: Vec<f64> = b.nodes().iter().map(|&x| p(x)).collect();
        let d = b.differentiate(&vals).unwrap();
        for (x, di) in b.nodes().iter().zip(d) {
            prop_assert!(close(di, dp(*x), 1e-10));
        }
    }

    #[test]
    fn diff_rows_sum_to_zero(order in 1usize..12) {
        let b = NodalBasis::new(order, QuadratureMode::Collocation).unwrap();
        let np = order + 1;
        for i in 0..np {
            let s: f64 = b.diff_matrix()[i * np..(i + 1) * np].iter().sum();
            prop_assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn gll_weights_integrate_degree_2n_minus_1(order in 1usize..10, k in 0usize..20) {
        let deg = k % (2 * order);
        let (x, w) = gll_rule(order).unwrap();
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
        let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
        prop_assert!(close(q, exact, 1e-13));
    }

    #[test]
    fn gauss_weights_integrate_degree_2m_minus_1(m in 1usize..10, k in 0usize..20) {
        let deg = k % (2 * m);
        let (x, w) = gauss_rule(m).unwrap();
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
        let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
        prop_assert!(close(q, exact, 1e-13));
    }

    #[test]
    fn summation_by_parts_holds_under_collocation(order in 1usize..9) {
        // M D + (M D)^T = diag(-1, 0, ..., 0, 1)
        let b = NodalBasis::new(order, QuadratureMode::Collocation).unwrap();
        let np = order + 1;
        let (d, w) = (b.diff_matrix(), b.weights());
        for i in 0..np {
            for j in 0..np {
                let q = w[i] * d[i * np + j] + w[j] * d[j * np + i];
                let e = if i == j && i == 0 { -1.0 } else if i == j && i == order { 1.0 } else { 0.0 };
                prop_assert!(close(q, e, 1e-12));
            }
        }
    }
}

#[test]
fn mesh_rejects_zero_elements_and_inverted_intervals() {
    let bc = [BoundaryKind::InflowDirichlet; 2];
    assert_eq!(Mesh1D::uniform(0.0, 1.0, 0, bc).unwrap_err(), MeshError::NoElements);
    assert!(matches!(
        Mesh1D::uniform(1.0, 0.0, 4, bc).unwrap_err(),
        MeshError::InvertedInterval { .. }
    ));
    assert!(matches!(
        Mesh1D::from_breaks(vec![0.0, 0.5, 0.5, 1.0], bc).unwrap_err(),
        MeshError::NonIncreasingBreaks { .. }
    ));
    assert_eq!(
        Mesh1D::uniform(0.0, 1.0, 2, [BoundaryKind::Periodic, BoundaryKind::TractionLike]).unwrap_err(),
        MeshError::MixedPeriodic
    );
}

#[test]
fn periodic_mesh_wraps_neighbors() {
    let m = Mesh1D::uniform(0.0, 1.0, 4, [BoundaryKind::Periodic; 2]).unwrap();
    assert_eq!(m.neighbor(0, Side::Left), Neighbor::Element(3));
    assert_eq!(m.neighbor(3, Side::Right), Neighbor::Element(0));
    assert_eq!(m.unique_faces().count(), 4);
}

#[test]
fn bounded_mesh_has_boundary_neighbors() {
    let m = Mesh1D::uniform(-1.0, 2.0, 3, [BoundaryKind::InflowDirichlet, BoundaryKind::TractionLike]).unwrap();
    assert_eq!(m.neighbor(0, Side::Left), Neighbor::Boundary(Side::Left));
    assert_eq!(m.neighbor(2, Side::Right), Neighbor::Boundary(Side::Right));
    assert_eq!(m.boundary_kind(Side::Right), BoundaryKind::TractionLike);
    assert_eq!(m.outward_normals(1).unwrap(), (-1.0, 1.0));
    assert!(m.outward_normals(3).is_err());
    assert!(close(m.jacobian(0), 0.5, 1e-15));
    assert!(close(m.map_point(1, 0.0), 0.5, 1e-15));
}

#[test]
fn refinement_bisects_every_element() {
    let m = Mesh1D::from_breaks(vec![0.0, 0.25, 1.0], [BoundaryKind::InflowDirichlet; 2]).unwrap();
    let r = m.refine();
    assert_eq!(r.breaks(), &[0.0, 0.125, 0.25, 0.625, 1.0]);
}

#[test]
fn boundary_kind_round_trips_through_strings() {
    for k in [BoundaryKind::InflowDirichlet, BoundaryKind::TractionLike, BoundaryKind::Periodic] {
        assert_eq!(k.to_string().parse::<BoundaryKind>().unwrap(), k);
    }
    assert_eq!("dirichlet".parse::<BoundaryKind>().unwrap(), BoundaryKind::InflowDirichlet);
    assert!("absorbing".parse::<BoundaryKind>().is_err());
}
