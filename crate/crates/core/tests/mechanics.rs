//! Property checks on the forward mechanics: agreement between the local
//! model and the shooting reference, and the symmetries of the rod.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rodforce::force::{distribute_forces, ForceVector, PointForce};
use rodforce::rod::{
    integrate_curvature_backward, reconstruct_shape, solve_bvp_reference, solve_bvp_reference_with, BvpOptions,
    CurvatureField, NodeGrid, RodProperties, TipLoad,
};

fn random_forces(rng: &mut ChaCha8Rng, length: f64, max_mag: f64) -> ForceVector {
    let h = rng.random_range(1..=3);
    let mut s: Vec<f64> = (0..h).map(|_| rng.random_range(0.05 * length..=length)).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    ForceVector::new(
        s.into_iter()
            .map(|s| {
                let mag = rng.random_range(0.0..max_mag);
                let dir: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                PointForce::new(s, mag * dir.cos(), mag * dir.sin())
            })
            .collect(),
    )
    .unwrap()
}

fn fast(props: &RodProperties, fv: &ForceVector, q: usize) -> CurvatureField {
    let grid = NodeGrid::for_rod(props, q).unwrap();
    let loads = distribute_forces(fv, &grid).unwrap();
    integrate_curvature_backward(props, &loads.distributed, &loads.tip).unwrap()
}

fn max_diff(a: &CurvatureField, b: &CurvatureField) -> f64 {
    a.u_x
        .iter()
        .zip(&b.u_x)
        .chain(a.u_y.iter().zip(&b.u_y))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn fast_model_matches_shooting_reference_on_random_loads() {
    let props = RodProperties::nitinol_tube();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let fv = random_forces(&mut rng, props.length, 2.0);
        let grid = NodeGrid::for_rod(&props, 250).unwrap();
        let loads = distribute_forces(&fv, &grid).unwrap();
        let local = integrate_curvature_backward(&props, &loads.distributed, &loads.tip).unwrap();
        let sol = solve_bvp_reference_with(&props, &loads.distributed, &loads.tip, &BvpOptions::default()).unwrap();
        assert!(sol.residual_norm < 1e-10);
        let rel = max_diff(&local, &sol.curvature) / local.max_magnitude();
        assert!(rel <= 1e-6, "{fv:?}: {rel:.3e}");
        let torsion = sol.torsion.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(torsion < 1e-9, "{fv:?}: u_z {torsion:.3e}");
    }
}

#[test]
fn interior_force_matches_reference_node_by_node() {
    let props = RodProperties::nitinol_tube();
    let fv = ForceVector::single(0.2, 0.3, 0.0);
    let grid = NodeGrid::for_rod(&props, 250).unwrap();
    let loads = distribute_forces(&fv, &grid).unwrap();
    let local = integrate_curvature_backward(&props, &loads.distributed, &loads.tip).unwrap();
    let sol = solve_bvp_reference_with(&props, &loads.distributed, &loads.tip, &BvpOptions::default()).unwrap();
    for i in 0..grid.len() {
        let (a, b) = (
            local.u_x[i].hypot(local.u_y[i]),
            sol.curvature.u_x[i].hypot(sol.curvature.u_y[i]),
        );
        assert!((a - b).abs() <= 1e-6 * local.max_magnitude(), "node {i}: {a} vs {b}");
    }

    // same forces, shape by both routes
    let shape = reconstruct_shape(&local).unwrap();
    for (p, r) in shape.positions.iter().zip(&sol.state.positions) {
        assert!((p - r).norm() < 1e-6);
    }
}

#[test]
fn reconstructed_shape_matches_reference_positions_on_random_loads() {
    let props = RodProperties::nitinol_tube();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let fv = random_forces(&mut rng, props.length, 1.0);
        let grid = NodeGrid::for_rod(&props, 250).unwrap();
        let loads = distribute_forces(&fv, &grid).unwrap();
        let local = integrate_curvature_backward(&props, &loads.distributed, &loads.tip).unwrap();
        let shape = reconstruct_shape(&local).unwrap();
        let reference = solve_bvp_reference(&props, &loads.distributed, &loads.tip).unwrap();
        let worst = shape
            .positions
            .iter()
            .zip(&reference.positions)
            .map(|(p, r)| (p - r).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{fv:?}: {worst:.3e} m");
    }
}

#[test]
fn small_loads_are_linear() {
    let props = RodProperties::nitinol_tube();
    let fv = ForceVector::new(vec![
        PointForce::new(0.1, 0.004, -0.002),
        PointForce::new(0.25, -0.003, 0.003),
    ])
    .unwrap();
    let full = fast(&props, &fv, 250);
    assert!(full.max_magnitude() * props.length < 0.05);
    let half = fast(&props, &fv.scaled(0.5), 250);
    for i in 0..full.u_x.len() {
        assert!((half.u_x[i] - 0.5 * full.u_x[i]).abs() <= 0.01 * 0.5 * full.max_magnitude());
        assert!((half.u_y[i] - 0.5 * full.u_y[i]).abs() <= 0.01 * 0.5 * full.max_magnitude());
    }
}

#[test]
fn negating_forces_negates_curvature() {
    let props = RodProperties::nitinol_tube();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let fv = random_forces(&mut rng, props.length, 2.0);
        let a = fast(&props, &fv, 120);
        let b = fast(&props, &fv.scaled(-1.0), 120);
        for i in 0..a.u_x.len() {
            assert!((a.u_x[i] + b.u_x[i]).abs() <= 1e-12 * a.max_magnitude().max(1.0));
            assert!((a.u_y[i] + b.u_y[i]).abs() <= 1e-12 * a.max_magnitude().max(1.0));
        }
    }
}

#[test]
fn rotating_forces_rotates_curvature() {
    let props = RodProperties::nitinol_tube();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let fv = random_forces(&mut rng, props.length, 2.0);
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let a = fast(&props, &fv, 150);
        let b = fast(&props, &fv.rotated(theta), 150);
        let (sin, cos) = theta.sin_cos();
        for i in 0..a.u_x.len() {
            let mag_a = a.u_x[i].hypot(a.u_y[i]);
            let mag_b = b.u_x[i].hypot(b.u_y[i]);
            assert!((mag_a - mag_b).abs() < 1e-9, "{mag_a} vs {mag_b}");
            let rx = cos * a.u_x[i] - sin * a.u_y[i];
            let ry = sin * a.u_x[i] + cos * a.u_y[i];
            assert!((rx - b.u_x[i]).abs() < 1e-9 && (ry - b.u_y[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn refining_the_grid_converges_quadratically() {
    let props = RodProperties::nitinol_tube();
    // forces on nodes of every grid in the family, so each grid splits them
    // the same way
    let base = NodeGrid::for_rod(&props, 30).unwrap();
    let fv = ForceVector::new(vec![
        PointForce::new(base.location(12), 0.2, 0.1),
        PointForce::new(base.location(21), -0.1, 0.3),
    ])
    .unwrap();
    // Within one coarse segment of a force the nodal split itself differs
    // between the grids (an O(Δ) effect); compare everywhere else.
    let shared_diff = |q: usize| {
        let coarse = fast(&props, &fv, q);
        let fine = fast(&props, &fv, 2 * q - 1);
        let delta = coarse.grid.spacing();
        (0..q)
            .filter(|&i| fv.iter().all(|f| (coarse.grid.location(i) - f.s).abs() > 1.01 * delta))
            .map(|i| {
                (coarse.u_x[i] - fine.u_x[2 * i])
                    .abs()
                    .max((coarse.u_y[i] - fine.u_y[2 * i]).abs())
            })
            .fold(0.0, f64::max)
    };
    let e1 = shared_diff(59);
    let e2 = shared_diff(117);
    let e3 = shared_diff(233);
    assert!(e1 / e2 > 3.5 && e2 / e3 > 3.5, "{e1:.3e} {e2:.3e} {e3:.3e}");
}

#[test]
fn strongest_tip_force_converges_with_tight_residual() {
    let props = RodProperties::nitinol_tube();
    let grid = NodeGrid::for_rod(&props, 250).unwrap();
    let tip = TipLoad::force(Vector3::new(0.0, 1.96, 0.0));
    let loads = rodforce::rod::DistributedLoad::zeros(grid);
    let sol = solve_bvp_reference_with(&props, &loads, &tip, &BvpOptions::default()).unwrap();
    assert!(sol.residual_norm < 1e-10);
    let local = integrate_curvature_backward(&props, &loads, &tip).unwrap();
    assert!(max_diff(&local, &sol.curvature) <= 1e-6 * local.max_magnitude());
}
