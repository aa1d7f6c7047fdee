use std::sync::Arc;

use ppmhd::basis::DgSpace;
use ppmhd::field::{CellAverages, DgField};
use ppmhd::limiters::{pp_limit_cell, pp_limit_field, DEFAULT_FLOOR};
use ppmhd::mesh::{BoundaryKind, Mesh};
use ppmhd::physics::*;
use ppmhd::problems::conserved;
use ppmhd::scheme::{first_order_rhs, DgOperator, SchemeParams};
use ppmhd::timestep::{Solver, SolverOptions};
use ppmhd::diagnostics::max_cell_divergence;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng) -> [f64; NCOMP] {
    let rho = rng.gen_range(0.1..3.0);
    let v = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)];
    let b = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)];
    conserved(5.0 / 3.0, rho, v, rng.gen_range(0.05..3.0), b)
}

fn random_k0(seed: u64, nx: usize, ny: usize, bc: [BoundaryKind<f64>; 4]) -> (Mesh<f64>, DgField<f64>) {
    let mesh = Mesh::new(nx, ny, (0.0, 1.0), (0.0, 0.5), bc).unwrap();
    let space = Arc::new(DgSpace::new(0, mesh.dx(), mesh.dy()).unwrap());
    let mut field = DgField::zeros(space.clone(), nx, ny);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let u = random_state(&mut rng);
            space.constant(&u, field.cell_mut(i, j));
        }
    }
    mesh.fill_ghosts(&mut field);
    (mesh, field)
}

fn periodic() -> [BoundaryKind<f64>; 4] {
    [BoundaryKind::Periodic, BoundaryKind::Periodic, BoundaryKind::Periodic, BoundaryKind::Periodic]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k0_residual_matches_first_order_scheme(seed in any::<u64>(), source in any::<bool>(), a1 in 1.0f64..20.0, a2 in 1.0f64..20.0) {
        let (mesh, field) = random_k0(seed, 6, 5, periodic());
        let eos = EosIdeal::new(5.0 / 3.0).unwrap();
        let params = SchemeParams { alpha: [a1, a2], include_source: source };
        let mut op = DgOperator::new(field.space().clone(), 6, 5, eos);
        let mut out = field.clone();
        op.residual(&field, &params, &mut out).unwrap();
        let mut avgs = CellAverages::from_fn(&mesh, |i, j| field.average(i as isize, j as isize));
        mesh.fill_ghosts(&mut avgs);
        let fo = first_order_rhs(&avgs, &mesh, &params, &eos);
        // Size of the individual flux terms, against which rounding is measured.
        let umax = avgs.interior().flat_map(|(_, u)| u.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = (a1 / mesh.dx() + a2 / mesh.dy()) * umax;
        for j in 0..5 {
            for i in 0..6 {
                let r = out.average(i, j);
                let f = fo.get(i, j);
                for k in 0..NCOMP {
                    prop_assert!((r[k] - f[k]).abs() <= 1e-14 * scale,
                        "cell ({i},{j}) comp {k}: {} vs {}", r[k], f[k]);
                }
            }
        }
    }

    #[test]
    fn limiter_keeps_averages_and_is_idempotent(seed in any::<u64>(), amp in 0.0f64..5.0, k in 1usize..=2) {
        let space = DgSpace::<f64>::new(k, 0.1, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(&mut rng);
        let mut coef = vec![0.0; space.n_coef()];
        space.constant(&u, &mut coef);
        let ns = space.n_scalar();
        let o = space.vector_offset();
        for (n, c) in coef.iter_mut().enumerate() {
            let mean_slot = (n < o && n % ns == 0) || n == o || n == o + 1;
            if !mean_slot {
                *c += amp * rng.gen_range(-1.0..1.0);
            }
        }
        let before = space.average(&coef);
        pp_limit_cell(&space, &mut coef, DEFAULT_FLOOR, DEFAULT_FLOOR).unwrap();
        let after = space.average(&coef);
        for c in 0..NCOMP {
            prop_assert!((after[c] - before[c]).abs() <= 1e-14 * (1.0 + before[c].abs()));
        }
        let pts = space.pp_points();
        for p in 0..pts.len() {
            let v = space.eval_table(&coef, pts, p);
            prop_assert!(v[RHO] > 0.0);
            prop_assert!(internal_energy_raw(&v) > 0.0);
        }
        let once = coef.clone();
        let changed = pp_limit_cell(&space, &mut coef, DEFAULT_FLOOR, DEFAULT_FLOOR).unwrap();
        prop_assert!(!changed);
        prop_assert_eq!(once, coef);
    }

    #[test]
    fn ghost_fill_is_idempotent(seed in any::<u64>(), kind in 0usize..4) {
        let bc = match kind {
            0 => periodic(),
            1 => [BoundaryKind::Outflow, BoundaryKind::Outflow, BoundaryKind::Reflect, BoundaryKind::Reflect],
            2 => [BoundaryKind::Reflect, BoundaryKind::Outflow, BoundaryKind::ShiftedPeriodic { shift: 2 }, BoundaryKind::ShiftedPeriodic { shift: 2 }],
            _ => [
                BoundaryKind::Inflow { state: conserved(1.4, 1.0, [1.0, 0.0, 0.0], 1.0, [0.0; 3]), segment: Some((0.1, 0.3)) },
                BoundaryKind::Outflow,
                BoundaryKind::Outflow,
                BoundaryKind::Outflow,
            ],
        };
        let (mesh, mut field) = random_k0(seed, 5, 4, bc);
        let once = field.clone();
        mesh.fill_ghosts(&mut field);
        prop_assert_eq!(once.data(), field.data());
    }
}

#[test]
fn limited_field_reports_minima() {
    let mesh = Mesh::periodic(8, 8, (0.0, 1.0), (0.0, 1.0)).unwrap();
    let space = Arc::new(DgSpace::new(2, mesh.dx(), mesh.dy()).unwrap());
    // A steep density dip that overshoots below zero at some points.
    let mut field = DgField::project(space, &mesh, |x: f64, y: f64| {
        let rho = if (x - 0.5).abs() < 0.1 && (y - 0.5).abs() < 0.1 { 1e-6 } else { 1.0 };
        conserved(1.4, rho, [0.0; 3], 1.0, [0.5, 0.0, 0.0])
    });
    let before = field.averages();
    let stats = pp_limit_field(&mut field, DEFAULT_FLOOR, DEFAULT_FLOOR, &EosIdeal::new(1.4).unwrap()).unwrap();
    assert!(stats.limited > 0);
    assert!(stats.min_rho > 0.0 && stats.min_p > 0.0);
    let after = field.averages();
    for ((_, a), (_, b)) in before.interior().zip(after.interior()) {
        for k in 0..NCOMP {
            assert!((a[k] - b[k]).abs() <= 1e-14 * (1.0 + a[k].abs()));
        }
    }
}

#[test]
fn solver_fields_stay_divergence_free() {
    let mesh = Mesh::periodic(12, 12, (0.0, 1.0), (0.0, 1.0)).unwrap();
    let eos = EosIdeal::new(5.0 / 3.0).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    let init = |x: f64, y: f64| {
        conserved(5.0 / 3.0, 1.0 + 0.5 * (tau * x).sin(), [0.3, -0.2, 0.0], 1.0, [
            -(tau * y).sin() + 0.4 * (tau * x).cos(),
            (tau * 2.0 * x).sin() - 0.3 * (tau * y).cos(),
            0.1,
        ])
    };
    let mut solver = Solver::from_initial(mesh, eos, 2, init, SolverOptions { cfl: 0.9, ..Default::default() }).unwrap();
    let pts = [(0.0, 0.0), (0.5, 0.5), (-0.5, 0.2), (0.31, -0.44), (-0.13, 0.27)];
    for _ in 0..10 {
        solver.step(1.0).unwrap();
        assert!(max_cell_divergence(solver.field(), &pts) <= 1e-12);
    }
}

#[test]
fn constant_state_is_preserved() {
    let spec = ppmhd::problems::make_problem("constant", Default::default()).unwrap();
    let mesh = spec.build_mesh(6, 6).unwrap();
    let mut solver = Solver::from_initial(mesh, spec.eos(), 2, |x, y| spec.initial(x, y), SolverOptions::default()).unwrap();
    let u0 = spec.initial(0.0, 0.0);
    for _ in 0..100 {
        solver.step(1e9).unwrap();
    }
    for j in 0..6 {
        for i in 0..6 {
            let a = solver.field().average(i, j);
            for k in 0..NCOMP {
                assert!((a[k] - u0[k]).abs() <= 1e-12, "cell ({i},{j}) comp {k}");
            }
        }
    }
}
