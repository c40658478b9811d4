//! Biorthogonal eigenmode analysis of the dynamics generator.
//!
//! Because `M` is complex-symmetric, its left eigenvectors are the
//! unconjugated transposes of the right ones, and the projection of an
//! initial state onto mode `i` is `c_i = (R_i^T a0) / (R_i^T R_i)`. No
//! separate left solve is needed.
//!
//! The single-mode formula relies on `R_i^T R_j = 0` for `i != j`, which
//! the eigensolver does not enforce inside (near-)degenerate clusters,
//! e.g. the tunnel-split pairs of a double-Gaussian array. Modes whose
//! eigenvalues lie within `CLUSTER_TOLERANCE * ||M||_F` of each other are
//! projected together through their `k x k` block `R_g^T R_g`. Grouping is
//! always valid: for distinct eigenvalues the block is diagonal in exact
//! arithmetic. Every decomposition is then checked by reconstructing `a0`.

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use ndarray_linalg::{Eig, Solve};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::DynamicsMatrix;

/// Reference time at which long-time mode weights are compared.
pub const DEFAULT_T_REF: f64 = 1e4;
/// Default weight a mode must keep at `t_ref` to count as long-lived.
pub const DEFAULT_LONG_LIVED_THRESHOLD: f64 = 1e-3;
/// At most this many long-lived modes are reported.
pub const MAX_LONG_LIVED: usize = 8;
/// Accepted reconstruction error, relative to `||a0||`.
pub const RECON_TOLERANCE: f64 = 1e-8;
/// Accepted `||M R - zeta R||`, relative to `||M||_F`.
pub const EIG_RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Eigenvalues closer than this (relative to `||M||_F`) are projected jointly.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;
/// `exp(x)` is flushed to zero below this exponent.
pub const UNDERFLOW_EXPONENT: f64 = -745.0;

#[derive(Clone, Debug)]
pub struct ModeSet {
    /// Eigenvalues of `M`, sorted by descending real part, then ascending
    /// imaginary part. `Re(zeta)` is the amplitude decay rate.
    pub zeta: Vec<Complex64>,
    /// Unit-norm right eigenvectors, one per column, in `zeta` order.
    pub right_vectors: Array2<Complex64>,
    /// Projection of the initial state onto each mode.
    pub coeffs: Vec<Complex64>,
    pub recon_residual: f64,
    pub eig_residual: f64,
    /// Size of the largest group of modes projected jointly.
    pub largest_cluster: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominantMode {
    pub index: usize,
    pub zeta: Complex64,
    pub weight: f64,
}

impl DominantMode {
    /// Decay rate of the mode amplitude, `Re(zeta)` (non-positive).
    pub fn decay(&self) -> f64 {
        self.zeta.re
    }
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn vector(&self, i: usize) -> ArrayView1<'_, Complex64> {
        self.right_vectors.column(i)
    }

    /// `sum_i c_i exp(zeta_i t) R_i`.
    pub fn amplitudes_at(&self, t: f64) -> Array1<Complex64> {
        let factors: Array1<Complex64> = self
            .zeta
            .iter()
            .zip(&self.coeffs)
            .map(|(&z, &c)| c * decay_factor(z, t))
            .collect();
        self.right_vectors.dot(&factors)
    }
}

/// `exp(zeta t)`, flushed to zero once `|exp(zeta t)|^2` would underflow.
pub fn decay_factor(zeta: Complex64, t: f64) -> Complex64 {
    if 2.0 * zeta.re * t < UNDERFLOW_EXPONENT {
        Complex64::new(0.0, 0.0)
    } else {
        (zeta * t).exp()
    }
}

fn reject(reason: impl Into<String>, recon_residual: f64, eig_residual: f64) -> Error {
    Error::Decomposition {
        reason: reason.into(),
        recon_residual,
        eig_residual,
    }
}

fn vec_norm<'a>(v: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    v.into_iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn order_modes(a: Complex64, b: Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im))
}

/// Groups of indices into the (sorted) spectrum whose eigenvalues are
/// chained within `tol` of each other.
fn clusters(zeta: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = zeta.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            // sorted by real part, so later entries only get further away
            if zeta[i].re - zeta[j].re > tol {
                break;
            }
            if (zeta[i] - zeta[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn bilinear(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn decompose(m: &DynamicsMatrix, initial: &Array1<Complex64>) -> Result<ModeSet> {
    let n = m.n();
    if initial.len() != n {
        return Err(Error::param(
            "initial",
            format!(
                "state has {} amplitudes but the array has {n} emitters",
                initial.len()
            ),
        ));
    }
    let a0_norm = vec_norm(initial);
    if !a0_norm.is_finite() || a0_norm <= 0.0 {
        return Err(Error::param(
            "initial",
            "state must have finite nonzero norm",
        ));
    }

    let (raw_vals, raw_vecs) = m
        .entries()
        .eig()
        .map_err(|e| reject(format!("eigensolver failed: {e}"), f64::NAN, f64::NAN))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| order_modes(raw_vals[a], raw_vals[b]));
    let zeta: Vec<Complex64> = order.iter().map(|&i| raw_vals[i]).collect();
    let mut right = raw_vecs.select(Axis(1), &order);
    for mut col in right.columns_mut() {
        let norm = vec_norm(col.iter());
        col.mapv_inplace(|z| z / norm);
    }

    let scale = m.frobenius_norm();
    let applied = m.entries().dot(&right);
    let eig_residual = (0..n)
        .map(|i| {
            let diff = &applied.column(i) - &right.column(i).mapv(|r| zeta[i] * r);
            vec_norm(diff.iter())
        })
        .fold(0.0, f64::max);

    let groups = clusters(&zeta, CLUSTER_TOLERANCE * scale);
    let largest_cluster = groups.iter().map(Vec::len).max().unwrap_or(0);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for group in &groups {
        if let [i] = group[..] {
            let r = right.column(i);
            coeffs[i] = bilinear(r, initial.view()) / bilinear(r, r);
            continue;
        }
        let block = right.select(Axis(1), group);
        let gram = block.t().dot(&block);
        let rhs = block.t().dot(initial);
        let c = gram.solve_into(rhs).map_err(|e| {
            reject(
                format!("singular projection block of {} modes: {e}", group.len()),
                f64::NAN,
                eig_residual,
            )
        })?;
        for (&i, &ci) in group.iter().zip(c.iter()) {
            coeffs[i] = ci;
        }
    }

    let recon = right.dot(&Array1::from(coeffs.clone())) - initial;
    let recon_residual = vec_norm(recon.iter());

    if !recon_residual.is_finite() || recon_residual >= RECON_TOLERANCE * a0_norm {
        return Err(reject(
            "eigenbasis does not reconstruct the initial state",
            recon_residual,
            eig_residual,
        ));
    }
    if !eig_residual.is_finite()
        || eig_residual >= EIG_RESIDUAL_TOLERANCE * scale.max(f64::MIN_POSITIVE)
    {
        return Err(reject(
            "eigenpair residual too large",
            recon_residual,
            eig_residual,
        ));
    }

    Ok(ModeSet {
        zeta,
        right_vectors: right,
        coeffs,
        recon_residual,
        eig_residual,
        largest_cluster,
    })
}

/// `|c exp(zeta t)|^2`, zero once the exponent underflows.
pub fn weight_at(c: Complex64, zeta: Complex64, t: f64) -> f64 {
    let exponent = 2.0 * zeta.re * t;
    if exponent < UNDERFLOW_EXPONENT {
        0.0
    } else {
        c.norm_sqr() * exponent.exp()
    }
}

/// `w_i(t) = |c_i|^2 exp(2 Re(zeta_i) t)`, unnormalized.
pub fn mode_weights(ms: &ModeSet, t: f64) -> Vec<f64> {
    ms.zeta
        .iter()
        .zip(&ms.coeffs)
        .map(|(&z, &c)| weight_at(c, z, t))
        .collect()
}

/// The mode with the largest weight at `t_ref`. Weights equal to within
/// `1e-12` relative go to the slower-decaying mode.
pub fn dominant_mode(ms: &ModeSet, t_ref: f64) -> DominantMode {
    let w = mode_weights(ms, t_ref);
    let mut best = 0;
    for i in 1..w.len() {
        let scale = w[i].max(w[best]);
        let heavier = w[i] > w[best] + 1e-12 * scale;
        let tied_but_slower =
            (w[i] - w[best]).abs() <= 1e-12 * scale && ms.zeta[i].re > ms.zeta[best].re;
        if heavier || tied_but_slower {
            best = i;
        }
    }
    DominantMode {
        index: best,
        zeta: ms.zeta[best],
        weight: w[best],
    }
}

/// Modes with `w_i(t_ref) >= threshold`, heaviest first, at most
/// [`MAX_LONG_LIVED`] of them.
pub fn long_lived_modes(ms: &ModeSet, t_ref: f64, threshold: f64) -> Vec<(usize, f64)> {
    let w = mode_weights(ms, t_ref);
    let mut picked: Vec<(usize, f64)> = w
        .into_iter()
        .enumerate()
        .filter(|&(_, wi)| wi >= threshold)
        .collect();
    picked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    picked.truncate(MAX_LONG_LIVED);
    picked
}
