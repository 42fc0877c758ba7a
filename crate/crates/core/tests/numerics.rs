use proptest::prelude::*;
use regvort::kernels::bessel_k0;
use regvort::numerics::{integrate_1d, rk4_step, QuadratureSpec, RadialTable, SingularityHint};

#[test]
fn quadrature_examples() {
    let spec = QuadratureSpec::default();
    let log = integrate_1d(|k| -k.ln(), 0.0, 1.0, &spec.clone().with_hint(SingularityHint::LogAtZero)).unwrap();
    assert!((log - 1.0).abs() < 1e-10);
    let blob = integrate_1d(|k| 2.0 * k / (k * k + 1.0).powi(2), 0.0, f64::INFINITY, &spec).unwrap();
    assert!((blob - 1.0).abs() < 1e-10);
    let alpha = integrate_1d(
        |k| if k > 0.0 { k * bessel_k0(k).unwrap() } else { 0.0 },
        0.0,
        f64::INFINITY,
        &spec.with_hint(SingularityHint::LogAtZero),
    )
    .unwrap();
    assert!((alpha - 1.0).abs() < 1e-10, "{alpha}");
}

#[test]
fn rk4_examples() {
    assert_eq!(rk4_step(&[3.0, -1.0], 0.0, 0.5, |_, _, d| d.fill(0.0)), vec![3.0, -1.0]);
    let y = rk4_step(&[1.0], 0.0, 0.1, |_, y, d| d[0] = y[0]);
    assert!((y[0] - 1.105_170_833_333_333_3).abs() < 1e-15);

    let rotate = |_: f64, y: &[f64], d: &mut [f64]| {
        d[0] = -y[1];
        d[1] = y[0];
    };
    let revolve = |dt: f64| {
        let n = (2.0 * std::f64::consts::PI / dt).round() as usize;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut y = vec![1.0, 0.0];
        for i in 0..n {
            y = rk4_step(&y, i as f64 * h, h, rotate);
        }
        y
    };
    let y = revolve(1e-3);
    assert!(((y[0] * y[0] + y[1] * y[1]).sqrt() - 1.0).abs() < 1e-10);
    let err = |y: Vec<f64>| ((y[0] - 1.0).powi(2) + y[1].powi(2)).sqrt();
    assert!(err(revolve(0.1)) / err(revolve(0.05)) >= 15.0);
}

proptest! {
    #[test]
    fn table_interpolates_nodes_exactly(steps in proptest::collection::vec(0.01f64..1.0, 2..30),
                                        values in proptest::collection::vec(-5.0f64..5.0, 31)) {
        let mut x = 0.0;
        let nodes: Vec<f64> = std::iter::once(0.0).chain(steps.iter().map(|s| { x += s; x })).collect();
        let values = values[..nodes.len()].to_vec();
        let t = RadialTable::new(nodes.clone(), values.clone()).unwrap();
        for (n, v) in nodes.iter().zip(&values) {
            prop_assert!((t.eval(*n) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}
