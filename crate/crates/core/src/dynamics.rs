//! Long-time propagation of single-excitation amplitudes.
//!
//! The default route expands the initial state in the eigenmodes of `M`.
//! When the eigenbasis is rejected (near-defective spectra), amplitudes are
//! stepped with `exp(M dt)` built by Taylor expansion plus repeated
//! squaring. Each step is recomputed with one more squaring until two
//! levels agree on the population.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DynamicsMatrix;
use crate::spectral::{self, ModeSet};

/// Two successive refinement levels must agree on `P(t)` to this tolerance.
pub const STEPPING_TOLERANCE: f64 = 1e-9;
const TAYLOR_ORDER: usize = 12;
/// `||M dt||_1 / 2^k` is brought below this before the Taylor step.
const TAYLOR_RADIUS: f64 = 0.5;
const MAX_REFINEMENTS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMethod {
    Spectral,
    Stepping,
}

impl PropagationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            PropagationMethod::Spectral => "spectral",
            PropagationMethod::Stepping => "stepping",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// `|a_n(t)|^2` per site.
    pub profile: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeTrace {
    /// Position of the mode in the sorted spectrum.
    pub mode_index: usize,
    pub zeta: Complex64,
    /// `w_i(t)` on the result's time grid.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub total_population: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Only available on the spectral path.
    pub mode_weight_trace: Option<Vec<ModeTrace>>,
    pub method: PropagationMethod,
}

impl SimulationResult {
    pub fn snapshot(&self, time: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.time == time)
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub snapshot_times: Vec<f64>,
    /// Modes to trace are those long-lived at `t_ref` above `threshold`.
    pub trace_t_ref: f64,
    pub trace_threshold: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            snapshot_times: vec![spectral::DEFAULT_T_REF],
            trace_t_ref: spectral::DEFAULT_T_REF,
            trace_threshold: spectral::DEFAULT_LONG_LIVED_THRESHOLD,
        }
    }
}

/// Symmetric single-excitation state, `a_mu = 1/sqrt(N)`.
pub fn dicke_state(n: usize) -> Result<Array1<Complex64>> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    Ok(Array1::from_elem(
        n,
        Complex64::new(1.0 / (n as f64).sqrt(), 0.0),
    ))
}

pub fn population<'a>(amplitudes: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    amplitudes.into_iter().map(|a| a.norm_sqr()).sum()
}

pub fn spatial_profile<'a>(amplitudes: impl IntoIterator<Item = &'a Complex64>) -> Vec<f64> {
    amplitudes.into_iter().map(|a| a.norm_sqr()).collect()
}

/// `points` times spaced evenly in `log t` from `t_min` to `t_max` inclusive.
pub fn log_time_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min.is_finite()) {
        return Err(Error::param(
            "t-min",
            format!("must be finite and > 0, got {t_min}"),
        ));
    }
    if !(t_max > t_min && t_max.is_finite()) {
        return Err(Error::param(
            "t-max",
            format!("must be finite and > t-min, got {t_max}"),
        ));
    }
    if points < 2 {
        return Err(Error::param("t-points", "need at least 2 points"));
    }
    let (lo, hi) = (t_min.ln(), t_max.ln());
    let last = points - 1;
    Ok((0..points)
        .map(|k| match k {
            0 => t_min,
            k if k == last => t_max,
            k => (lo + (hi - lo) * k as f64 / last as f64).exp(),
        })
        .collect())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param("times", "need at least one time"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("times", "all times must be finite"));
    }
    if times[0] < 0.0 {
        return Err(Error::param("times", "times must be >= 0"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "times must be strictly increasing"));
    }
    Ok(())
}

fn one_norm(m: &Array2<Complex64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(X)` for small `||X||` by Horner evaluation of the Taylor series.
fn taylor_exp(x: &Array2<Complex64>) -> Array2<Complex64> {
    let n = x.nrows();
    let eye = Array2::<Complex64>::eye(n);
    let mut acc = eye.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = &eye + &(x.dot(&acc) / Complex64::new(k as f64, 0.0));
    }
    acc
}

/// `exp(M dt)` via `2^squarings` repeated squaring.
fn squared_propagator(m: &Array2<Complex64>, dt: f64, squarings: u32) -> Array2<Complex64> {
    let scale = dt / 2f64.powi(squarings as i32);
    let mut e = taylor_exp(&m.mapv(|z| z * scale));
    for _ in 0..squarings {
        e = e.dot(&e);
    }
    e
}

/// Advances `a` by `dt` with the refined squaring propagator.
pub fn propagate_stepping(
    m: &DynamicsMatrix,
    a: &Array1<Complex64>,
    dt: f64,
) -> Result<Array1<Complex64>> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::param(
            "dt",
            format!("must be finite and >= 0, got {dt}"),
        ));
    }
    if dt == 0.0 {
        return Ok(a.clone());
    }
    let gen = m.entries();
    let spread = one_norm(gen) * dt / TAYLOR_RADIUS;
    let base = if spread > 1.0 {
        spread.log2().ceil() as u32
    } else {
        0
    };
    let mut prev = squared_propagator(gen, dt, base).dot(a);
    for k in base + 1..=base + MAX_REFINEMENTS {
        let next = squared_propagator(gen, dt, k).dot(a);
        let gap = (population(&next) - population(&prev)).abs();
        if gap <= STEPPING_TOLERANCE && next.iter().all(|z| z.is_finite()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Propagation {
        time: dt,
        reason: format!("refinement did not settle after {MAX_REFINEMENTS} levels"),
    })
}

/// Sorted union of the requested grid and snapshot times.
fn merged_times(times: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = times.iter().chain(extra).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

fn assemble(
    times: &[f64],
    opts: &EvolveOptions,
    mut state_at: impl FnMut(f64) -> Result<Array1<Complex64>>,
) -> Result<(Vec<f64>, Vec<Snapshot>)> {
    let eval = merged_times(times, &opts.snapshot_times);
    let mut pops = Vec::with_capacity(times.len());
    let mut snaps = Vec::with_capacity(opts.snapshot_times.len());
    for &t in &eval {
        let a = state_at(t)?;
        if times.binary_search_by(|x| x.total_cmp(&t)).is_ok() {
            pops.push(population(&a));
        }
        if opts.snapshot_times.contains(&t) {
            snaps.push(Snapshot {
                time: t,
                profile: spatial_profile(&a),
            });
        }
    }
    // keep snapshots in the caller's order
    snaps.sort_by_key(|s| opts.snapshot_times.iter().position(|&t| t == s.time));
    Ok((pops, snaps))
}

/// Propagates with the spectral path when the eigenbasis is accepted and
/// falls back to stepping otherwise.
pub fn evolve(
    m: &DynamicsMatrix,
    initial: &Array1<Complex64>,
    times: &[f64],
) -> Result<SimulationResult> {
    evolve_with(m, initial, times, &EvolveOptions::default())
}

pub fn evolve_with(
    m: &DynamicsMatrix,
    initial: &Array1<Complex64>,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<SimulationResult> {
    check_times(times)?;
    if opts
        .snapshot_times
        .iter()
        .any(|t| !(t.is_finite() && *t >= 0.0))
    {
        return Err(Error::param(
            "snapshots",
            "snapshot times must be finite and >= 0",
        ));
    }
    match spectral::decompose(m, initial) {
        Ok(ms) => Ok(evolve_spectral(&ms, times, opts)),
        Err(Error::Decomposition { .. }) => evolve_stepping(m, initial, times, opts),
        Err(e) => Err(e),
    }
}

/// Evaluates the modal expansion on `times`.
pub fn evolve_spectral(ms: &ModeSet, times: &[f64], opts: &EvolveOptions) -> SimulationResult {
    let (total_population, snapshots) = assemble(times, opts, |t| Ok(ms.amplitudes_at(t)))
        .expect("spectral evaluation is infallible");
    let traced = spectral::long_lived_modes(ms, opts.trace_t_ref, opts.trace_threshold);
    let trace = traced
        .iter()
        .map(|&(i, _)| ModeTrace {
            mode_index: i,
            zeta: ms.zeta[i],
            weights: times
                .iter()
                .map(|&t| spectral::weight_at(ms.coeffs[i], ms.zeta[i], t))
                .collect(),
        })
        .collect();
    SimulationResult {
        times: times.to_vec(),
        total_population,
        snapshots,
        mode_weight_trace: Some(trace),
        method: PropagationMethod::Spectral,
    }
}

/// Steps from `t = 0` through every requested time.
pub fn evolve_stepping(
    m: &DynamicsMatrix,
    initial: &Array1<Complex64>,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<SimulationResult> {
    check_times(times)?;
    let mut clock = 0.0;
    let mut state = initial.clone();
    let (total_population, snapshots) = assemble(times, opts, |t| {
        state = propagate_stepping(m, &state, t - clock).map_err(|e| match e {
            Error::Propagation { reason, .. } => Error::Propagation { time: t, reason },
            other => other,
        })?;
        clock = t;
        Ok(state.clone())
    })?;
    Ok(SimulationResult {
        times: times.to_vec(),
        total_population,
        snapshots,
        mode_weight_trace: None,
        method: PropagationMethod::Stepping,
    })
}
