//! Test-only reference implementations, independent of the library's
//! eigenmode and propagator code paths.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Dormand-Prince 5(4) with adaptive steps for `da/dt = M a`, run from
/// `t = 0` to `t_end`.
pub fn integrate(
    m: &Array2<Complex64>,
    a0: &Array1<Complex64>,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Array1<Complex64> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut t = 0.0;
    let mut y = a0.clone();
    let mut h = 1e-3_f64.min(t_end);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k: Vec<Array1<Complex64>> = Vec::with_capacity(7);
        for row in &A {
            let mut ys = y.clone();
            for (a, kj) in row.iter().zip(&k) {
                if *a != 0.0 {
                    ys.scaled_add(Complex64::new(h * a, 0.0), kj);
                }
            }
            k.push(m.dot(&ys));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for ((b5, b4), ks) in B5.iter().zip(&B4).zip(&k) {
            y5.scaled_add(Complex64::new(h * b5, 0.0), ks);
            y4.scaled_add(Complex64::new(h * b4, 0.0), ks);
        }
        let err = y5
            .iter()
            .zip(y4.iter())
            .zip(y.iter())
            .map(|((a, b), c)| (a - b).norm() / (atol + rtol * a.norm().max(c.norm())))
            .fold(0.0, f64::max);
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    y
}

pub fn max_abs_diff(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
