//! Eigenmode expansion and squaring propagator against a Runge-Kutta
//! reference on small random arrays.

mod common;

use ndarray::Array1;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use wgloc::disorder::DisorderRealization;
use wgloc::dynamics::{dicke_state, evolve, propagate_stepping};
use wgloc::geometry::ArrayGeometry;
use wgloc::model::{build_dynamics_matrix, DynamicsMatrix};
use wgloc::spectral::decompose;

fn random_instance(rng: &mut ChaCha8Rng) -> (DynamicsMatrix, Array1<Complex64>) {
    let n = rng.random_range(1..=12);
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-0.3..0.3)).collect();
    let xi = rng.random_range(0.0..PI);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
    let d = DisorderRealization {
        phases: w,
        strength_wbar: 1.0,
        seed: 0,
        realization_index: 0,
    };
    let m = build_dynamics_matrix(&ArrayGeometry::new(xi, y).unwrap(), Some(&d)).unwrap();
    // random normalized initial state, not only the symmetric one
    let mut a: Array1<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    a.mapv_inplace(|z| z / norm);
    (m, a)
}

#[test]
fn spectral_matches_integrator() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..40 {
        let (m, a0) = random_instance(&mut rng);
        let ms = decompose(&m, &a0).unwrap();
        for t in [1.0, 10.0, 100.0] {
            let reference = common::integrate(m.entries(), &a0, t, 1e-12, 1e-14);
            let modal = ms.amplitudes_at(t);
            let gap = common::max_abs_diff(&reference, &modal);
            assert!(gap < 1e-7, "n={} t={t} gap={gap:e}", m.n());
        }
    }
}

#[test]
fn stepping_matches_spectral() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let (m, a0) = random_instance(&mut rng);
        let ms = decompose(&m, &a0).unwrap();
        for t in [1.0, 10.0, 100.0] {
            let stepped = propagate_stepping(&m, &a0, t).unwrap();
            let gap = common::max_abs_diff(&stepped, &ms.amplitudes_at(t));
            assert!(gap < 1e-7, "n={} t={t} gap={gap:e}", m.n());
        }
    }
}

#[test]
fn quarter_wave_pair_population() {
    let m =
        build_dynamics_matrix(&ArrayGeometry::new(PI / 2.0, vec![0.0; 2]).unwrap(), None).unwrap();
    let a0 = dicke_state(2).unwrap();
    let reference = common::integrate(m.entries(), &a0, 1.0, 1e-13, 1e-15);
    let p_ref: f64 = reference.iter().map(|z| z.norm_sqr()).sum();
    let p = evolve(&m, &a0, &[1.0]).unwrap().total_population[0];
    // exp(-1), the pair state decays at the single-emitter rate here
    assert!((p_ref - 0.367_879_441_171_442_3).abs() < 1e-10);
    assert!((p - p_ref).abs() < 1e-10);
}
