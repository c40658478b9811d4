//! Parameter studies over spacing, profile shape, disorder strength and
//! array size.
//!
//! A plan expands into tasks, one per (parameter tuple, realization). Tasks
//! are pure and run on the rayon pool; results come back in plan order, so
//! every table is independent of thread count and scheduling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::sample_disorder;
use crate::dynamics::{
    dicke_state, evolve_stepping, population, spatial_profile, EvolveOptions, PropagationMethod,
};
use crate::error::{Error, Result};
use crate::geometry::{make_profile_with, IndexConvention, ProfileKind, ProfileSpec};
use crate::model::build_dynamics_matrix;
use crate::spectral::{self, DEFAULT_LONG_LIVED_THRESHOLD, DEFAULT_T_REF, MAX_LONG_LIVED};

pub const DEFAULT_N: usize = 101;
pub const DEFAULT_XI: f64 = 0.15 * PI;

/// Evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| {
                    if k == count - 1 {
                        stop
                    } else {
                        start + k as f64 * step
                    }
                })
                .collect()
        }
    }
}

pub fn default_eta_grid() -> Vec<f64> {
    linspace(0.0, 0.1, 25)
}

pub fn default_sigma_grid() -> Vec<f64> {
    linspace(0.02, 0.4, 25)
}

pub fn default_wbar_grid() -> Vec<f64> {
    linspace(0.0, 1.0, 11)
}

pub fn default_n_grid() -> Vec<usize> {
    (51..=501).step_by(10).collect()
}

/// Full description of a sweep. Every axis holds at least one value; axes a
/// study does not vary hold a single value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub profile: ProfileSpec,
    pub convention: IndexConvention,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub n: Vec<usize>,
    pub wbar: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub t_ref: f64,
    pub threshold: f64,
    /// Record `P_n(t_ref)` for each task.
    pub keep_profiles: bool,
    /// Record `P(t)` on these times for each task.
    pub times: Option<Vec<f64>>,
}

impl SweepPlan {
    /// Single-point plan at the canonical array size and spacing.
    pub fn new(profile: ProfileSpec) -> Self {
        SweepPlan {
            profile,
            convention: IndexConvention::default(),
            xi: vec![DEFAULT_XI],
            eta: vec![profile.eta],
            sigma: vec![profile.sigma],
            n: vec![DEFAULT_N],
            wbar: vec![0.0],
            realizations: 1,
            seed: 0,
            t_ref: DEFAULT_T_REF,
            threshold: DEFAULT_LONG_LIVED_THRESHOLD,
            keep_profiles: false,
            times: None,
        }
    }

    pub fn task_count(&self) -> usize {
        self.xi.len()
            * self.eta.len()
            * self.sigma.len()
            * self.n.len()
            * self.wbar.len()
            * self.realizations
    }

    pub fn validate(&self) -> Result<()> {
        fn reals(name: &str, v: &[f64], ok: impl Fn(f64) -> bool, rule: &str) -> Result<()> {
            if v.is_empty() {
                return Err(Error::param(name, "grid is empty"));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite() || !ok(**x)) {
                return Err(Error::param(name, format!("{rule}, got {x}")));
            }
            Ok(())
        }
        reals("xi", &self.xi, |_| true, "must be finite")?;
        reals("eta", &self.eta, |x| x >= 0.0, "must be finite and >= 0")?;
        reals("sigma", &self.sigma, |x| x > 0.0, "must be finite and > 0")?;
        reals("wbar", &self.wbar, |x| x >= 0.0, "must be finite and >= 0")?;
        if self.n.is_empty() {
            return Err(Error::param("n", "grid is empty"));
        }
        if self.n.contains(&0) {
            return Err(Error::param("n", "every array size must be >= 1"));
        }
        if self.realizations == 0 {
            return Err(Error::param("realizations", "must be >= 1"));
        }
        if !(self.t_ref.is_finite() && self.t_ref >= 0.0) {
            return Err(Error::param(
                "t-ref",
                format!("must be finite and >= 0, got {}", self.t_ref),
            ));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::param(
                "threshold",
                format!("must be finite and >= 0, got {}", self.threshold),
            ));
        }
        if let Some(times) = &self.times {
            let mut last = f64::NEG_INFINITY;
            for &t in times {
                if !(t.is_finite() && t >= 0.0 && t > last) {
                    return Err(Error::param(
                        "times",
                        "must be finite, >= 0 and strictly increasing",
                    ));
                }
                last = t;
            }
        }
        let mut probe = self.profile;
        probe.eta = self.eta[0];
        probe.sigma = self.sigma[0];
        probe.validate()
    }

    /// Parameter tuples in output order: xi, eta, sigma, n, wbar, then
    /// realization, with the last varying fastest.
    pub fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::with_capacity(self.task_count());
        for &xi in &self.xi {
            for &eta in &self.eta {
                for &sigma in &self.sigma {
                    for &n in &self.n {
                        for &wbar in &self.wbar {
                            for r in 0..self.realizations as u64 {
                                out.push(Task {
                                    xi,
                                    eta,
                                    sigma,
                                    n,
                                    wbar,
                                    realization: r,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Task {
    pub xi: f64,
    pub eta: f64,
    pub sigma: f64,
    pub n: usize,
    pub wbar: f64,
    pub realization: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeWeight {
    pub index: usize,
    pub zeta: Complex64,
    pub coeff: Complex64,
    pub weight: f64,
}

/// One task's outcome, carrying its full parameter tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub xi: f64,
    pub eta: f64,
    pub sigma: f64,
    pub n: usize,
    pub wbar: f64,
    pub realization: u64,
    /// `P(t_ref)`.
    pub population: f64,
    /// Dominant mode at `t_ref`; NaN when the eigenbasis was rejected.
    pub dominant_zeta: Complex64,
    pub dominant_weight: f64,
    /// Modes with weight at or above the plan threshold. `None` when the
    /// eigenbasis was rejected.
    pub long_lived: Option<usize>,
    /// Up to eight heaviest modes at `t_ref`, heaviest first.
    pub top_modes: Vec<ModeWeight>,
    pub method: PropagationMethod,
    pub profile: Option<Vec<f64>>,
    pub curve: Option<Vec<f64>>,
}

impl SweepRecord {
    pub fn re_zeta_dom(&self) -> f64 {
        self.dominant_zeta.re
    }
}

pub fn run_task(plan: &SweepPlan, task: Task) -> Result<SweepRecord> {
    let spec = ProfileSpec {
        eta: task.eta,
        sigma: task.sigma,
        ..plan.profile
    };
    let geom = make_profile_with(spec, task.n, task.xi, plan.convention)?;
    let disorder = if task.wbar > 0.0 {
        Some(sample_disorder(
            task.n,
            task.wbar,
            plan.seed,
            task.realization,
        )?)
    } else {
        None
    };
    let m = build_dynamics_matrix(&geom, disorder.as_ref())?;
    let a0 = dicke_state(task.n)?;

    let mut rec = SweepRecord {
        xi: task.xi,
        eta: task.eta,
        sigma: task.sigma,
        n: task.n,
        wbar: task.wbar,
        realization: task.realization,
        population: f64::NAN,
        dominant_zeta: Complex64::new(f64::NAN, f64::NAN),
        dominant_weight: f64::NAN,
        long_lived: None,
        top_modes: Vec::new(),
        method: PropagationMethod::Spectral,
        profile: None,
        curve: None,
    };

    match spectral::decompose(&m, &a0) {
        Ok(ms) => {
            let a = ms.amplitudes_at(plan.t_ref);
            rec.population = population(&a);
            if plan.keep_profiles {
                rec.profile = Some(spatial_profile(&a));
            }
            if let Some(times) = &plan.times {
                rec.curve = Some(
                    times
                        .iter()
                        .map(|&t| population(&ms.amplitudes_at(t)))
                        .collect(),
                );
            }
            let dom = spectral::dominant_mode(&ms, plan.t_ref);
            rec.dominant_zeta = dom.zeta;
            rec.dominant_weight = dom.weight;
            let weights = spectral::mode_weights(&ms, plan.t_ref);
            rec.long_lived = Some(weights.iter().filter(|&&w| w >= plan.threshold).count());
            rec.top_modes = spectral::long_lived_modes(&ms, plan.t_ref, 0.0)
                .into_iter()
                .take(MAX_LONG_LIVED)
                .map(|(i, w)| ModeWeight {
                    index: i,
                    zeta: ms.zeta[i],
                    coeff: ms.coeffs[i],
                    weight: w,
                })
                .collect();
        }
        Err(Error::Decomposition { .. }) => {
            let mut times = plan.times.clone().unwrap_or_default();
            let opts = EvolveOptions {
                snapshot_times: vec![plan.t_ref],
                ..EvolveOptions::default()
            };
            if times.is_empty() {
                times.push(plan.t_ref);
            }
            let sim = evolve_stepping(&m, &a0, &times, &opts)?;
            let snap = sim.snapshot(plan.t_ref).expect("snapshot requested");
            rec.population = snap.profile.iter().sum();
            if plan.keep_profiles {
                rec.profile = Some(snap.profile.clone());
            }
            if plan.times.is_some() {
                rec.curve = Some(sim.total_population);
            }
            rec.method = PropagationMethod::Stepping;
        }
        Err(e) => return Err(e),
    }
    Ok(rec)
}

/// Runs every task of the plan on the rayon pool. Records come back in
/// [`SweepPlan::tasks`] order.
pub fn run_plan(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    if plan.task_count() == 0 {
        return Err(Error::param("plan", "no tasks"));
    }
    plan.tasks()
        .into_par_iter()
        .map(|t| run_task(plan, t))
        .collect()
}

/// Ensemble statistics over the realizations of one parameter tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub xi: f64,
    pub eta: f64,
    pub sigma: f64,
    pub n: usize,
    pub wbar: f64,
    pub count: usize,
    pub mean_population: f64,
    /// Standard error of the mean, zero for a single realization.
    pub stderr_population: f64,
    pub median_population: f64,
    pub mean_profile: Option<Vec<f64>>,
    pub mean_curve: Option<Vec<f64>>,
    pub stderr_curve: Option<Vec<f64>>,
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn columnwise(rows: &[&Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let width = rows[0].len();
    (0..width)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            mean_and_stderr(&col)
        })
        .unzip()
}

/// Groups consecutive records sharing a parameter tuple, which is how
/// [`run_plan`] lays them out, and reduces each group in realization order.
pub fn summarize(records: &[SweepRecord]) -> Vec<EnsembleSummary> {
    let same = |a: &SweepRecord, b: &SweepRecord| {
        a.xi == b.xi && a.eta == b.eta && a.sigma == b.sigma && a.n == b.n && a.wbar == b.wbar
    };
    records
        .chunk_by(|a, b| same(a, b))
        .map(|group| {
            let head = &group[0];
            let pops: Vec<f64> = group.iter().map(|r| r.population).collect();
            let (mean, se) = mean_and_stderr(&pops);
            let profiles: Option<Vec<&Vec<f64>>> =
                group.iter().map(|r| r.profile.as_ref()).collect();
            let curves: Option<Vec<&Vec<f64>>> = group.iter().map(|r| r.curve.as_ref()).collect();
            let (mean_curve, stderr_curve) = match curves {
                Some(c) => {
                    let (m, s) = columnwise(&c);
                    (Some(m), Some(s))
                }
                None => (None, None),
            };
            EnsembleSummary {
                xi: head.xi,
                eta: head.eta,
                sigma: head.sigma,
                n: head.n,
                wbar: head.wbar,
                count: group.len(),
                mean_population: mean,
                stderr_population: se,
                median_population: median(&pops),
                mean_profile: profiles.map(|p| columnwise(&p).0),
                mean_curve,
                stderr_curve,
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct EnsembleScan {
    pub records: Vec<SweepRecord>,
    pub summaries: Vec<EnsembleSummary>,
}

/// Runs the plan and reduces the realizations of each parameter tuple.
pub fn run_ensemble(plan: &SweepPlan) -> Result<EnsembleScan> {
    let records = run_plan(plan)?;
    let summaries = summarize(&records);
    Ok(EnsembleScan { records, summaries })
}

impl SweepPlan {
    /// Clean spacing study keeping `P(t)` on `times` and `P_n(t_ref)`.
    pub fn spacing(
        profile: ProfileSpec,
        xi_list: &[f64],
        n: usize,
        t_ref: f64,
        times: &[f64],
    ) -> Self {
        SweepPlan {
            xi: xi_list.to_vec(),
            n: vec![n],
            t_ref,
            keep_profiles: true,
            times: Some(times.to_vec()),
            ..SweepPlan::new(profile)
        }
    }

    /// Clean `eta` by `sigma` map, `sigma` varying fastest.
    pub fn geometry(
        kind: ProfileKind,
        eta_grid: &[f64],
        sigma_grid: &[f64],
        xi: f64,
        n: usize,
        t_ref: f64,
    ) -> Self {
        SweepPlan {
            xi: vec![xi],
            eta: eta_grid.to_vec(),
            sigma: sigma_grid.to_vec(),
            n: vec![n],
            t_ref,
            ..SweepPlan::new(ProfileSpec {
                kind,
                eta: 0.0,
                sigma: 1.0,
            })
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn disorder(
        profile: ProfileSpec,
        wbar_list: &[f64],
        n: usize,
        xi: f64,
        realizations: usize,
        seed: u64,
        t_ref: f64,
        times: &[f64],
    ) -> Self {
        SweepPlan {
            xi: vec![xi],
            n: vec![n],
            wbar: wbar_list.to_vec(),
            realizations,
            seed,
            t_ref,
            keep_profiles: true,
            times: Some(times.to_vec()),
            ..SweepPlan::new(profile)
        }
    }

    pub fn size(
        profile: ProfileSpec,
        n_list: &[usize],
        wbar_list: &[f64],
        xi: f64,
        realizations: usize,
        seed: u64,
        t_ref: f64,
    ) -> Self {
        SweepPlan {
            xi: vec![xi],
            n: n_list.to_vec(),
            wbar: wbar_list.to_vec(),
            realizations,
            seed,
            t_ref,
            ..SweepPlan::new(profile)
        }
    }
}

/// Spacing study on the clean array: `P(t)` on `times`, `P_n(t_ref)` and
/// the heaviest modes for each `xi`.
pub fn scan_spacing(
    profile: ProfileSpec,
    xi_list: &[f64],
    n: usize,
    t_ref: f64,
    times: &[f64],
) -> Result<Vec<SweepRecord>> {
    run_plan(&SweepPlan::spacing(profile, xi_list, n, t_ref, times))
}

/// Dominant-mode decay over an `eta` by `sigma` grid on the clean array.
pub fn scan_geometry(
    kind: ProfileKind,
    eta_grid: &[f64],
    sigma_grid: &[f64],
    xi: f64,
    n: usize,
    t_ref: f64,
) -> Result<Vec<SweepRecord>> {
    if kind == ProfileKind::Linear {
        return Err(Error::param(
            "profile",
            "a geometry map needs a Gaussian profile",
        ));
    }
    run_plan(&SweepPlan::geometry(
        kind, eta_grid, sigma_grid, xi, n, t_ref,
    ))
}

/// Disorder study: per-realization `P(t)` and `P_n(t_ref)` for each `wbar`,
/// plus ensemble statistics.
#[allow(clippy::too_many_arguments)]
pub fn scan_disorder(
    profile: ProfileSpec,
    wbar_list: &[f64],
    n: usize,
    xi: f64,
    realizations: usize,
    seed: u64,
    t_ref: f64,
    times: &[f64],
) -> Result<EnsembleScan> {
    run_ensemble(&SweepPlan::disorder(
        profile,
        wbar_list,
        n,
        xi,
        realizations,
        seed,
        t_ref,
        times,
    ))
}

/// Size study: `P(t_ref)` over `(n, wbar)`. Each record also carries its
/// heaviest modes.
pub fn scan_size(
    profile: ProfileSpec,
    n_list: &[usize],
    wbar_list: &[f64],
    xi: f64,
    realizations: usize,
    seed: u64,
    t_ref: f64,
) -> Result<EnsembleScan> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n", "sizes must be strictly increasing"));
    }
    run_ensemble(&SweepPlan::size(
        profile,
        n_list,
        wbar_list,
        xi,
        realizations,
        seed,
        t_ref,
    ))
}

/// Interior local maxima of a sequence with their topographic prominence:
/// the height above the higher of the two lowest points separating the
/// peak from taller terrain (or from the sequence ends).
pub fn peak_prominences(values: &[f64]) -> Vec<(usize, f64)> {
    let k = values.len();
    let mut out = Vec::new();
    for i in 1..k.saturating_sub(1) {
        let v = values[i];
        if !(v > values[i - 1] && v >= values[i + 1]) {
            continue;
        }
        let mut left_min = v;
        for &x in values[..i].iter().rev() {
            if x > v {
                break;
            }
            left_min = left_min.min(x);
        }
        let mut right_min = v;
        for &x in &values[i + 1..] {
            if x > v {
                break;
            }
            right_min = right_min.min(x);
        }
        out.push((i, v - left_min.max(right_min)));
    }
    out
}

/// Sums a profile into `bins` contiguous groups of nearly equal size.
pub fn coarse_grain(profile: &[f64], bins: usize) -> Vec<f64> {
    let k = profile.len();
    (0..bins)
        .map(|b| profile[b * k / bins..(b + 1) * k / bins].iter().sum())
        .collect()
}

/// Depth of each interior point below the lower of the maxima on either
/// side, relative to that maximum. Zero where the point is not below both
/// sides.
pub fn dip_contrast(values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|j| {
            if j == 0 || j + 1 == values.len() {
                return 0.0;
            }
            let left = values[..j]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let right = values[j + 1..]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let rim = left.min(right);
            if rim <= 0.0 || values[j] >= rim {
                0.0
            } else {
                1.0 - values[j] / rim
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sg() -> ProfileSpec {
        ProfileSpec::single_gaussian(0.05, 0.2)
    }

    #[test]
    fn linspace_endpoints() {
        let g = default_eta_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[24], 0.1);
        assert!((g[12] - 0.05).abs() < 1e-17);
        assert_eq!(default_sigma_grid()[24], 0.4);
        assert_eq!(default_wbar_grid().len(), 11);
        let ns = default_n_grid();
        assert_eq!((ns[0], *ns.last().unwrap(), ns.len()), (51, 501, 46));
        assert_eq!(linspace(3.0, 9.0, 1), vec![3.0]);
    }

    #[test]
    fn task_order_and_count() {
        let plan = SweepPlan {
            xi: vec![0.1, 0.2],
            wbar: vec![0.0, 0.5, 1.0],
            realizations: 2,
            ..SweepPlan::new(sg())
        };
        let tasks = plan.tasks();
        assert_eq!(tasks.len(), plan.task_count());
        assert_eq!(tasks.len(), 12);
        assert_eq!(
            (tasks[0].xi, tasks[0].wbar, tasks[0].realization),
            (0.1, 0.0, 0)
        );
        assert_eq!(
            (tasks[1].xi, tasks[1].wbar, tasks[1].realization),
            (0.1, 0.0, 1)
        );
        assert_eq!(
            (tasks[2].xi, tasks[2].wbar, tasks[2].realization),
            (0.1, 0.5, 0)
        );
        assert_eq!(tasks[11].xi, 0.2);
    }

    #[test]
    fn validation() {
        let base = SweepPlan::new(sg());
        assert!(base.validate().is_ok());
        let bad = [
            SweepPlan {
                xi: vec![],
                ..base.clone()
            },
            SweepPlan {
                eta: vec![-0.01],
                ..base.clone()
            },
            SweepPlan {
                sigma: vec![0.0],
                ..base.clone()
            },
            SweepPlan {
                wbar: vec![f64::NAN],
                ..base.clone()
            },
            SweepPlan {
                n: vec![0],
                ..base.clone()
            },
            SweepPlan {
                realizations: 0,
                ..base.clone()
            },
            SweepPlan {
                t_ref: f64::INFINITY,
                ..base.clone()
            },
            SweepPlan {
                times: Some(vec![1.0, 1.0]),
                ..base.clone()
            },
        ];
        for p in bad {
            assert!(
                matches!(run_plan(&p), Err(Error::Parameter { .. })),
                "{p:?}"
            );
        }
        assert!(scan_size(sg(), &[20, 10], &[0.0], 0.3, 1, 0, 1e4).is_err());
        assert!(scan_geometry(ProfileKind::Linear, &[0.05], &[0.2], 0.3, 10, 1e4).is_err());
    }

    #[test]
    fn statistics() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample std sqrt(5/3) over sqrt(4)
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[7.0]), (7.0, 0.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn prominence_of_ripples() {
        let v = [0.0, 1.0, 0.5, 2.0, 1.5, 1.8, 0.0];
        let p = peak_prominences(&v);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0], (1, 0.5));
        assert_eq!(p[1], (3, 2.0));
        assert!((p[2].1 - 0.3).abs() < 1e-15);
        assert!(peak_prominences(&[1.0, 2.0, 3.0]).is_empty());
    }

    #[test]
    fn binning_and_dips() {
        let p: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(coarse_grain(&p, 5), vec![1.0, 5.0, 9.0, 13.0, 17.0]);
        assert_eq!(coarse_grain(&p, 3).iter().sum::<f64>(), 45.0);
        let d = dip_contrast(&[1.0, 4.0, 1.0, 2.0, 0.5]);
        assert_eq!(d, vec![0.0, 0.0, 0.5, 0.0, 0.0]);
        assert!(dip_contrast(&[1.0, 2.0, 3.0]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn clean_disorder_scan_matches_spacing_scan() {
        let times = [1.0, 100.0, 1e4];
        let spacing = scan_spacing(sg(), &[DEFAULT_XI], 41, 1e4, &times).unwrap();
        let dis = scan_disorder(sg(), &[0.0], 41, DEFAULT_XI, 1, 7, 1e4, &times).unwrap();
        assert_eq!(dis.records.len(), 1);
        assert_eq!(spacing[0], dis.records[0]);
        assert_eq!(dis.summaries[0].mean_population, spacing[0].population);
        assert_eq!(
            dis.summaries[0].mean_curve.as_ref(),
            spacing[0].curve.as_ref()
        );
    }

    #[test]
    fn independent_of_thread_count() {
        let plan = SweepPlan {
            n: vec![30],
            wbar: vec![0.0, 0.4],
            realizations: 6,
            seed: 11,
            keep_profiles: true,
            times: Some(vec![1.0, 10.0]),
            ..SweepPlan::new(ProfileSpec::double_gaussian(0.05, 0.075))
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_plan(&plan).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run_plan(&plan).unwrap());
        let s = summarize(&one);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].count, 6);
        assert!(s[1].stderr_population > 0.0);
        assert_eq!(s[0].stderr_population, 0.0);
    }

    #[test]
    fn size_scan_records_modes() {
        let scan = scan_size(sg(), &[21, 31], &[0.0], DEFAULT_XI, 1, 0, 1e4).unwrap();
        assert_eq!(scan.records.len(), 2);
        for r in &scan.records {
            assert!(!r.top_modes.is_empty() && r.top_modes.len() <= MAX_LONG_LIVED);
            assert!(r.top_modes.windows(2).all(|w| w[0].weight >= w[1].weight));
            assert_eq!(r.top_modes[0].weight, r.dominant_weight);
        }
    }
}
