//! Single-excitation dynamics generator.
//!
//! Amplitudes evolve as `da/dt = M a` with (rates in units of the reference
//! emitter-waveguide coupling)
//!
//! ```text
//! M[mu][nu] = -1/2 * exp(-(y_mu + y_nu)) * exp(i (theta_hi - theta_lo))
//! theta_mu  = mu * xi + W_mu
//! ```
//!
//! where `hi`/`lo` are the larger/smaller of the two site indices. This
//! makes `M` complex-symmetric (`M == M^T`) with or without disorder. The
//! diagonal reduces to the single-emitter decay `-exp(-2 y_mu) / 2`.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::disorder::DisorderRealization;
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

#[derive(Clone, Debug)]
pub struct DynamicsMatrix {
    entries: Array2<Complex64>,
    geometry: ArrayGeometry,
    disorder: Option<DisorderRealization>,
}

impl DynamicsMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn disorder(&self) -> Option<&DisorderRealization> {
        self.disorder.as_ref()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().sum()
    }

    /// `(M + M^dagger) / 2`, the decay part of the generator.
    pub fn hermitian_part(&self) -> Array2<Complex64> {
        let n = self.n();
        Array2::from_shape_fn((n, n), |(i, j)| {
            (self.entries[[i, j]] + self.entries[[j, i]].conj()) * 0.5
        })
    }

    pub fn apply(&self, a: &Array1<Complex64>) -> Array1<Complex64> {
        self.entries.dot(a)
    }
}

pub fn build_dynamics_matrix(
    geom: &ArrayGeometry,
    disorder: Option<&DisorderRealization>,
) -> Result<DynamicsMatrix> {
    let n = geom.n_emitters();
    if let Some(d) = disorder {
        if d.len() != n {
            return Err(Error::param(
                "disorder",
                format!(
                    "realization has {} phases but the array has {n} emitters",
                    d.len()
                ),
            ));
        }
    }
    let xi = geom.spacing_xi();
    let attenuation: Vec<f64> = geom.transverse_y().iter().map(|y| (-y).exp()).collect();
    let phase = |mu: usize| disorder.map_or(0.0, |d| d.phases[mu]);

    let mut m = Array2::<Complex64>::zeros((n, n));
    for mu in 0..n {
        m[[mu, mu]] = Complex64::new(-0.5 * attenuation[mu] * attenuation[mu], 0.0);
        for nu in mu + 1..n {
            let travel = ((nu - mu) as f64 * xi).rem_euclid(TAU);
            let angle = travel + (phase(nu) - phase(mu));
            let z = Complex64::from_polar(-0.5 * attenuation[mu] * attenuation[nu], angle);
            m[[mu, nu]] = z;
            m[[nu, mu]] = z;
        }
    }
    Ok(DynamicsMatrix {
        entries: m,
        geometry: geom.clone(),
        disorder: disorder.cloned(),
    })
}

/// `H_eff = i M`, the non-Hermitian Hamiltonian with `da/dt = -i H_eff a`.
pub fn effective_hamiltonian(m: &DynamicsMatrix) -> Array2<Complex64> {
    m.entries.mapv(|z| Complex64::i() * z)
}
