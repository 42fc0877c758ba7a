use std::f64::consts::PI;

use regvort::dynamics::evolve;
use regvort::numerics::rk4_step;
use regvort::picard::{cauchy_report, picard_iterate};
use regvort::{build_shape, Error, GridSpec, KernelProfile, ShapeTable, Vec2, VortexSystem};

fn blob(eps: f64) -> ShapeTable {
    build_shape(&KernelProfile::blob(), &GridSpec::default(), eps).unwrap()
}

fn pair() -> VortexSystem {
    VortexSystem::new(vec![Vec2::new(0.5, 0.0), Vec2::new(-0.5, 0.0)], vec![2.0 * PI; 2], "pair").unwrap()
}

fn sup_gap(a: &[Vec<Vec2>], b: &[Vec<Vec2>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (*p - *q).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn single_vortex_converges_immediately() {
    let one = VortexSystem::new(vec![Vec2::new(1.0, 2.0)], vec![3.0], "one").unwrap();
    for shape in [ShapeTable::exact(), blob(0.3)] {
        let store = picard_iterate(&one, &shape, 1.0, 0.01, 10, 1e-12).unwrap();
        assert!(store.converged);
        assert_eq!(store.iterations(), 1);
        assert_eq!(store.rho, vec![0.0]);
        assert!(store.last().iter().all(|s| s[0] == Vec2::new(1.0, 2.0)));
    }
}

#[test]
fn first_iterate_is_the_flow_of_the_frozen_field() {
    let sys = pair();
    let shape = blob(0.5);
    let (t_end, dt) = (0.5, 0.01);
    let store = picard_iterate(&sys, &shape, t_end, dt, 1, 0.0).unwrap();
    assert_eq!(store.iterations(), 1);
    assert!(!store.converged);
    assert!(store.iterates[0].iter().all(|s| s == &sys.positions()));

    // Independent oracle: each particle carried by Σⱼ Γⱼ K_h(x − xⱼ(0)).
    let frozen = sys.positions();
    let circ = sys.circulations().to_vec();
    let field = |_t: f64, y: &[f64], out: &mut [f64]| {
        let x = Vec2::new(y[0], y[1]);
        let mut u = Vec2::ZERO;
        for (p, g) in frozen.iter().zip(&circ) {
            u += *g * shape.kernel(x - *p);
        }
        out[0] = u.x;
        out[1] = u.y;
    };
    for (i, start) in frozen.iter().enumerate() {
        let mut y = vec![start.x, start.y];
        let mut t = 0.0;
        for _ in 0..50 {
            y = rk4_step(&y, t, dt, field);
            t += dt;
        }
        let got = store.last().last().unwrap()[i];
        assert!((got - Vec2::new(y[0], y[1])).norm() < 1e-12, "{got:?} vs {y:?}");
    }
}

#[test]
fn pair_iteration_contracts_to_the_direct_solution() {
    let tol = 1e-10;
    let store = picard_iterate(&pair(), &blob(0.5), 0.5, 1e-3, 40, tol).unwrap();
    assert!(store.converged);
    assert_eq!(store.horizon, 0.5);
    assert!(store.rho.windows(2).skip(1).all(|w| w[1] < w[0]), "{:?}", store.rho);

    let direct = evolve(&pair(), &blob(0.5), 0.5, 1e-3, 1).unwrap();
    assert_eq!(direct.times.len(), store.times.len());
    let gap = sup_gap(&direct.states, store.last());
    assert!(gap <= 10.0 * tol, "gap {gap:e}");

    let report = cauchy_report(&store);
    assert_eq!(report.iterations.len(), store.iterations());
    assert!(report.iterations[0].ratio.is_none());
    assert!(report.iterations[1..].iter().all(|e| e.ratio.unwrap() < 1.0));
}

#[test]
fn short_horizon_contracts_fast() {
    let store = picard_iterate(&pair(), &blob(0.5), 0.01, 1e-3, 2, 0.0).unwrap();
    assert_eq!(store.rho.len(), 2);
    assert!(store.rho[1] / store.rho[0] < 0.1, "{:?}", store.rho);
}

#[test]
fn exact_kernel_pair_matches_direct_solver() {
    let store = picard_iterate(&pair(), &ShapeTable::exact(), 0.3, 1e-3, 40, 1e-11).unwrap();
    assert!(store.converged);
    let direct = evolve(&pair(), &ShapeTable::exact(), 0.3, 1e-3, 1).unwrap();
    assert!(sup_gap(&direct.states, store.last()) < 1e-9);
}

#[test]
fn long_horizon_divergence_is_reported() {
    // Several pair periods: the gaps grow for many iterates before the
    // factorial contraction wins, at T and again at T/2.
    let r = picard_iterate(&pair(), &ShapeTable::exact(), 40.0, 0.01, 30, 1e-10);
    assert!(matches!(r, Err(Error::PicardDivergence { horizon, .. }) if horizon == 20.0), "{r:?}");
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(matches!(
        picard_iterate(&pair(), &blob(0.5), 1.0, 0.1, 0, 1e-6),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(matches!(
        picard_iterate(&pair(), &blob(0.5), 1.0, 0.1, 5, f64::NAN),
        Err(Error::InvalidParameter { .. })
    ));
}
