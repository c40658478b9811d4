//! Static on-site phase disorder.
//!
//! Each realization is drawn from its own ChaCha stream keyed on
//! `(seed, realization_index)`, so realization `k` is the same no matter how
//! many others are generated, or in which order, or on which thread.

use std::f64::consts::PI;

use rand::distr::{Distribution, Uniform};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    /// Phases `W_mu` in radians, each within `[-pi * wbar, pi * wbar]`.
    pub phases: Vec<f64>,
    pub strength_wbar: f64,
    pub seed: u64,
    pub realization_index: u64,
}

impl DisorderRealization {
    /// The disorder-free realization, handy when a caller needs a value
    /// rather than `None`.
    pub fn clean(n: usize) -> Self {
        DisorderRealization {
            phases: vec![0.0; n],
            strength_wbar: 0.0,
            seed: 0,
            realization_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn max_abs_phase(&self) -> f64 {
        self.phases.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}

fn check_strength(wbar: f64) -> Result<()> {
    if !wbar.is_finite() || wbar < 0.0 {
        return Err(Error::param(
            "wbar",
            format!("must be finite and >= 0, got {wbar}"),
        ));
    }
    Ok(())
}

pub fn sample_disorder(n: usize, wbar: f64, seed: u64, index: u64) -> Result<DisorderRealization> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    check_strength(wbar)?;
    let bound = PI * wbar;
    let phases = if bound == 0.0 {
        vec![0.0; n]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let dist = Uniform::new_inclusive(-bound, bound)
            .map_err(|e| Error::param("wbar", e.to_string()))?;
        dist.sample_iter(&mut rng)
            .take(n)
            .map(|w: f64| w.clamp(-bound, bound))
            .collect()
    };
    Ok(DisorderRealization {
        phases,
        strength_wbar: wbar,
        seed,
        realization_index: index,
    })
}

/// Realizations `0..count` for one `(n, wbar, seed)`.
pub fn ensemble(n: usize, wbar: f64, seed: u64, count: usize) -> Result<Vec<DisorderRealization>> {
    if count == 0 {
        return Err(Error::param("realizations", "must be >= 1"));
    }
    (0..count as u64)
        .map(|k| sample_disorder(n, wbar, seed, k))
        .collect()
}
