use adg_core::basis::lagrange_values;
use adg_core::error::FieldError;
use adg_core::{BoundaryKind, DgField, Discretization, Mesh1D, NodalBasis, QuadratureMode};
use std::f64::consts::PI;
use std::sync::Arc;

fn disc(k: usize, order: usize, mode: QuadratureMode) -> Arc<Discretization> {
    Discretization::new(
        Mesh1D::uniform(0.0, 1.0, k, [BoundaryKind::InflowDirichlet; 2]).unwrap(),
        NodalBasis::new(order, mode).unwrap(),
    )
}

#[test]
fn sample_examples() {
    let d = disc(3, 2, QuadratureMode::Collocation);
    assert!(DgField::sample(&d, "u", |_| 1.0).as_slice().iter().all(|&v| v == 1.0));
    let d = disc(1, 1, QuadratureMode::Collocation);
    assert_eq!(DgField::sample(&d, "u", |x| x).as_slice(), &[0.0, 1.0]);
}

#[test]
fn interpolation_error_converges_at_order_n_plus_one() {
    let probes = [-0.9, -0.37, 0.11, 0.63, 0.95];
    for order in 1..=3 {
        let mut errs = Vec::new();
        for k in [8, 16, 32] {
            let d = disc(k, order, QuadratureMode::Collocation);
            let f = DgField::sample(&d, "u", |x| (PI * x).sin());
            let mut err = 0.0f64;
            for e in 0..k {
                for &xi in &probes {
                    let l = lagrange_values(d.basis.nodes(), xi);
                    let val: f64 = l.iter().zip(f.element(0, e)).map(|(a, b)| a * b).sum();
                    err = err.max((val - (PI * d.mesh.map_point(e, xi)).sin()).abs());
                }
            }
            errs.push(err);
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > order as f64 + 0.8, "order {order}: rate {rate}");
        }
    }
}

#[test]
fn broken_inner_product_examples() {
    let d = disc(4, 2, QuadratureMode::Collocation);
    let one = DgField::sample(&d, "u", |_| 1.0);
    let zero = DgField::sample(&d, "u", |_| 0.0);
    assert!((one.broken_inner_product(&one, &one, &d).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(one.broken_inner_product(&zero, &one, &d).unwrap(), 0.0);

    let d = disc(1, 1, QuadratureMode::exact_for(1));
    let x = DgField::sample(&d, "u", |x| x);
    let w = DgField::sample(&d, "w", |_| 1.0);
    assert!((x.broken_inner_product(&x, &w, &d).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn broken_inner_product_rejects_shape_mismatch() {
    let d = disc(2, 1, QuadratureMode::Collocation);
    let a = DgField::zeros(&["e", "v"], 2, 2);
    let b = DgField::zeros(&["e"], 2, 2);
    assert!(matches!(
        a.broken_inner_product(&b, &a, &d),
        Err(FieldError::ShapeMismatch { .. })
    ));
    assert!(DgField::from_vec(&["e"], 2, 2, vec![0.0; 3]).is_err());
}

#[test]
fn components_and_traces() {
    let data: Vec<f64> = (0..12).map(f64::from).collect();
    let f = DgField::from_vec(&["e", "v"], 2, 3, data).unwrap();
    assert_eq!(f.n_components(), 2);
    assert_eq!(f.component(1), &[6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
    assert_eq!(f.element(1, 1), &[9.0, 10.0, 11.0]);
    assert_eq!(f.traces(0, 1), (3.0, 5.0));
}

#[test]
fn csv_layout() {
    let d = disc(2, 1, QuadratureMode::Collocation);
    let f = DgField::sample(&d, "u", |x| 2.0 * x);
    let mut out = Vec::new();
    f.write_csv(&d, Some(0.5), true, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,element,node,x,u");
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last, vec![0.5, 1.0, 1.0, 1.0, 2.0]);
}
