//! Executes a resolved [`Job`] and turns its results into tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::disorder::sample_disorder;
use crate::dynamics::{dicke_state, evolve_with, EvolveOptions, PropagationMethod};
use crate::error::{Error, Result};
use crate::geometry::{make_profile_with, IndexConvention};
use crate::model::{build_dynamics_matrix, DynamicsMatrix};
use crate::spectral::{self, weight_at};
use crate::sweep::{run_ensemble, run_plan, SweepPlan, SweepRecord};

use super::config::{DisorderJob, GeometryJob, Job, PointJob, SizeJob, SpacingJob};
use super::output::{
    complex_cells, format_real, read_manifest, write_tables, Cell, RunManifest, Table,
};

/// What a job produced, plus a short human-readable summary.
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
}

/// File name of the spatial profile table at time `t`, e.g. `profile_t1e4.csv`.
pub fn profile_table_name(t: f64) -> String {
    format!("profile_t{t:e}.csv")
}

pub fn execute(job: &Job) -> Result<Outcome> {
    match job {
        Job::Evolve(j) => evolve(j),
        Job::Modes(j) => modes(j),
        Job::ScanSpacing(j) => scan_spacing(j),
        Job::ScanGeometry(j) => scan_geometry(j),
        Job::ScanDisorder(j) => scan_disorder(j),
        Job::ScanSize(j) => scan_size(j),
    }
}

/// Runs the job and writes its tables and manifest into `out_dir`.
pub fn run(job: &Job, out_dir: &Path) -> Result<(RunManifest, Vec<String>)> {
    let started = chrono::Utc::now().to_rfc3339();
    let outcome = execute(job)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: job.clone(),
        seed: job.seed(),
        started: started.clone(),
        finished: started,
        files: BTreeMap::new(),
    };
    Ok((
        write_tables(out_dir, &outcome.tables, manifest)?,
        outcome.summary,
    ))
}

/// Repeats the run recorded in a manifest and checks every checksum.
pub fn rerun(manifest_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let recorded = read_manifest(manifest_path)?;
    let (fresh, _) = run(&recorded.config, out_dir)?;
    let mut bad: Vec<String> = recorded
        .files
        .iter()
        .filter(|(name, sum)| fresh.files.get(*name) != Some(sum))
        .map(|(name, _)| name.clone())
        .collect();
    bad.extend(
        fresh
            .files
            .keys()
            .filter(|k| !recorded.files.contains_key(*k))
            .cloned(),
    );
    if !bad.is_empty() {
        return Err(Error::Mismatch { files: bad });
    }
    Ok(fresh)
}

fn point_matrix(j: &PointJob) -> Result<DynamicsMatrix> {
    let geom = make_profile_with(j.profile, j.n, j.xi_pi * PI, j.index_convention)?;
    let disorder = if j.wbar > 0.0 {
        Some(sample_disorder(j.n, j.wbar, j.seed, j.realization)?)
    } else {
        None
    };
    build_dynamics_matrix(&geom, disorder.as_ref())
}

fn evolve(j: &PointJob) -> Result<Outcome> {
    let m = point_matrix(j)?;
    let a0 = dicke_state(j.n)?;
    let times = j.times.expect("evolve jobs carry a time grid").times()?;
    let opts = EvolveOptions {
        snapshot_times: vec![j.t_ref],
        trace_t_ref: j.t_ref,
        trace_threshold: j.threshold,
    };
    let sim = evolve_with(&m, &a0, &times, &opts)?;

    let mut pop = Table::new("population_vs_time.csv", &["t", "P"]);
    for (&t, &p) in sim.times.iter().zip(&sim.total_population) {
        pop.push(vec![t.into(), p.into()]);
    }
    let snap = sim.snapshot(j.t_ref).expect("snapshot requested");
    let mut prof = Table::new(profile_table_name(j.t_ref), &["site", "Pn"]);
    for (k, &p) in snap.profile.iter().enumerate() {
        prof.push(vec![(k + 1).into(), p.into()]);
    }
    let mut trace = Table::new(
        "mode_weights_vs_time.csv",
        &["rank", "index", "re_zeta", "im_zeta", "t", "weight"],
    );
    for (rank, mt) in sim.mode_weight_trace.iter().flatten().enumerate() {
        for (&t, &w) in sim.times.iter().zip(&mt.weights) {
            let [re, im] = complex_cells(mt.zeta);
            trace.push(vec![
                (rank + 1).into(),
                mt.mode_index.into(),
                re,
                im,
                t.into(),
                w.into(),
            ]);
        }
    }
    let p_ref: f64 = snap.profile.iter().sum();
    Ok(Outcome {
        tables: vec![pop, prof, trace],
        summary: vec![
            format!("propagation: {}", sim.method.as_str()),
            format!("P({}) = {}", format_real(j.t_ref), format_real(p_ref)),
        ],
    })
}

fn modes(j: &PointJob) -> Result<Outcome> {
    let m = point_matrix(j)?;
    let ms = spectral::decompose(&m, &dicke_state(j.n)?)?;
    let weights = spectral::mode_weights(&ms, j.t_ref);
    let mut all = Table::new(
        "modes.csv",
        &[
            "index", "re_zeta", "im_zeta", "re_coeff", "im_coeff", "weight",
        ],
    );
    for (i, ((&z, &c), &w)) in ms.zeta.iter().zip(&ms.coeffs).zip(&weights).enumerate() {
        let [zr, zi] = complex_cells(z);
        let [cr, ci] = complex_cells(c);
        all.push(vec![i.into(), zr, zi, cr, ci, w.into()]);
    }
    let mut long = Table::new(
        "long_lived.csv",
        &["rank", "index", "re_zeta", "im_zeta", "weight"],
    );
    for (rank, (i, w)) in spectral::long_lived_modes(&ms, j.t_ref, j.threshold)
        .into_iter()
        .enumerate()
    {
        let [zr, zi] = complex_cells(ms.zeta[i]);
        long.push(vec![(rank + 1).into(), i.into(), zr, zi, w.into()]);
    }
    let dom = spectral::dominant_mode(&ms, j.t_ref);
    Ok(Outcome {
        tables: vec![all, long],
        summary: vec![
            format!(
                "dominant mode {}: Re zeta = {}, weight = {}",
                dom.index,
                format_real(dom.zeta.re),
                format_real(dom.weight)
            ),
            format!(
                "reconstruction residual {:e}, eigen residual {:e}",
                ms.recon_residual, ms.eig_residual
            ),
        ],
    })
}

fn with_settings(mut plan: SweepPlan, convention: IndexConvention, threshold: f64) -> SweepPlan {
    plan.convention = convention;
    plan.threshold = threshold;
    plan
}

fn record_cells(r: &SweepRecord) -> Vec<Cell> {
    let [re, im] = complex_cells(r.dominant_zeta);
    vec![
        r.population.into(),
        re,
        im,
        r.dominant_weight.into(),
        r.long_lived.into(),
        r.method.as_str().into(),
    ]
}

const RECORD_COLUMNS: [&str; 6] = [
    "P",
    "re_zeta_dom",
    "im_zeta_dom",
    "weight_dom",
    "long_lived",
    "method",
];

fn columns(lead: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    [lead, tail].concat()
}

fn scan_spacing(j: &SpacingJob) -> Result<Outcome> {
    let times = j.times.times()?;
    let xi: Vec<f64> = j.xi_list.iter().map(|x| x * PI).collect();
    let plan = with_settings(
        SweepPlan::spacing(j.profile, &xi, j.n, j.t_ref, &times),
        j.index_convention,
        j.threshold,
    );
    let records = run_plan(&plan)?;

    let mut pop = Table::new("spacing_population.csv", &["xi_pi", "t", "P"]);
    let mut prof = Table::new("spacing_profiles.csv", &["xi_pi", "site", "Pn"]);
    let mut modes = Table::new(
        "spacing_modes.csv",
        &[
            "xi_pi", "rank", "index", "re_zeta", "im_zeta", "re_coeff", "im_coeff", "weight",
        ],
    );
    let mut traces = Table::new(
        "spacing_mode_weights.csv",
        &["xi_pi", "rank", "t", "weight"],
    );
    let mut summary = Table::new("spacing_summary.csv", &columns(&["xi_pi"], &RECORD_COLUMNS));
    let mut lines = Vec::new();
    for (r, &x) in records.iter().zip(&j.xi_list) {
        for (&t, &p) in times.iter().zip(r.curve.iter().flatten()) {
            pop.push(vec![x.into(), t.into(), p.into()]);
        }
        for (k, &p) in r.profile.iter().flatten().enumerate() {
            prof.push(vec![x.into(), (k + 1).into(), p.into()]);
        }
        for (rank, mw) in r.top_modes.iter().enumerate() {
            let [zr, zi] = complex_cells(mw.zeta);
            let [cr, ci] = complex_cells(mw.coeff);
            modes.push(vec![
                x.into(),
                (rank + 1).into(),
                mw.index.into(),
                zr,
                zi,
                cr,
                ci,
                mw.weight.into(),
            ]);
            if mw.weight >= j.threshold {
                for &t in &times {
                    traces.push(vec![
                        x.into(),
                        (rank + 1).into(),
                        t.into(),
                        weight_at(mw.coeff, mw.zeta, t).into(),
                    ]);
                }
            }
        }
        let mut row = vec![x.into()];
        row.extend(record_cells(r));
        summary.push(row);
        lines.push(format!(
            "xi = {x} pi: P({}) = {}, dominant Re zeta = {}, weight {}",
            format_real(j.t_ref),
            format_real(r.population),
            format_real(r.dominant_zeta.re),
            format_real(r.dominant_weight)
        ));
    }
    Ok(Outcome {
        tables: vec![summary, pop, prof, modes, traces],
        summary: lines,
    })
}

fn scan_geometry(j: &GeometryJob) -> Result<Outcome> {
    let plan = SweepPlan::geometry(
        j.profile,
        &j.eta_grid,
        &j.sigma_grid,
        j.xi_pi * PI,
        j.n,
        j.t_ref,
    );
    let plan = SweepPlan {
        convention: j.index_convention,
        ..plan
    };
    let records = run_plan(&plan)?;
    let mut map = Table::new(
        "decay_map.csv",
        &["eta", "sigma", "re_zeta_dom", "weight_dom"],
    );
    for r in &records {
        map.push(vec![
            r.eta.into(),
            r.sigma.into(),
            r.dominant_zeta.re.into(),
            r.dominant_weight.into(),
        ]);
    }
    let fallbacks = records
        .iter()
        .filter(|r| r.method == PropagationMethod::Stepping)
        .count();
    Ok(Outcome {
        tables: vec![map],
        summary: vec![format!(
            "{} grid points, {} without an accepted eigenbasis",
            records.len(),
            fallbacks
        )],
    })
}

fn scan_disorder(j: &DisorderJob) -> Result<Outcome> {
    let times = j.times.times()?;
    let plan = SweepPlan::disorder(
        j.profile,
        &j.wbar_list,
        j.n,
        j.xi_pi * PI,
        j.realizations,
        j.seed,
        j.t_ref,
        &times,
    );
    let scan = run_ensemble(&with_settings(plan, j.index_convention, j.threshold))?;

    let mut records = Table::new(
        "disorder_records.csv",
        &columns(&["wbar", "realization"], &RECORD_COLUMNS),
    );
    let mut curves = Table::new(
        "disorder_population_realizations.csv",
        &["wbar", "realization", "t", "P"],
    );
    let mut profiles = Table::new(
        "disorder_profiles_realizations.csv",
        &["wbar", "realization", "site", "Pn"],
    );
    for r in &scan.records {
        let mut row = vec![r.wbar.into(), r.realization.into()];
        row.extend(record_cells(r));
        records.push(row);
        for (&t, &p) in times.iter().zip(r.curve.iter().flatten()) {
            curves.push(vec![
                r.wbar.into(),
                r.realization.into(),
                t.into(),
                p.into(),
            ]);
        }
        for (k, &p) in r.profile.iter().flatten().enumerate() {
            profiles.push(vec![
                r.wbar.into(),
                r.realization.into(),
                (k + 1).into(),
                p.into(),
            ]);
        }
    }

    let mut summary = Table::new(
        "disorder_summary.csv",
        &["wbar", "count", "mean_P", "stderr_P", "median_P"],
    );
    let mut mean_curves = Table::new(
        "disorder_population.csv",
        &["wbar", "t", "mean_P", "stderr_P"],
    );
    let mut mean_profiles = Table::new("disorder_profiles.csv", &["wbar", "site", "mean_Pn"]);
    let mut lines = Vec::new();
    for s in &scan.summaries {
        summary.push(vec![
            s.wbar.into(),
            s.count.into(),
            s.mean_population.into(),
            s.stderr_population.into(),
            s.median_population.into(),
        ]);
        let curve = s
            .mean_curve
            .iter()
            .flatten()
            .zip(s.stderr_curve.iter().flatten());
        for (&t, (&m, &e)) in times.iter().zip(curve) {
            mean_curves.push(vec![s.wbar.into(), t.into(), m.into(), e.into()]);
        }
        for (k, &p) in s.mean_profile.iter().flatten().enumerate() {
            mean_profiles.push(vec![s.wbar.into(), (k + 1).into(), p.into()]);
        }
        lines.push(format!(
            "wbar = {}: mean P({}) = {} +- {}",
            s.wbar,
            format_real(j.t_ref),
            format_real(s.mean_population),
            format_real(s.stderr_population)
        ));
    }
    Ok(Outcome {
        tables: vec![
            summary,
            records,
            mean_curves,
            curves,
            mean_profiles,
            profiles,
        ],
        summary: lines,
    })
}

fn scan_size(j: &SizeJob) -> Result<Outcome> {
    let plan = SweepPlan::size(
        j.profile,
        &j.n_list,
        &j.wbar_list,
        j.xi_pi * PI,
        j.realizations,
        j.seed,
        j.t_ref,
    );
    let scan = run_ensemble(&with_settings(plan, j.index_convention, j.threshold))?;

    let mut records = Table::new(
        "size_records.csv",
        &columns(&["n", "wbar", "realization"], &RECORD_COLUMNS),
    );
    let mut modes = Table::new(
        "size_modes.csv",
        &["n", "rank", "index", "re_zeta", "im_zeta", "weight"],
    );
    for r in &scan.records {
        let mut row = vec![r.n.into(), r.wbar.into(), r.realization.into()];
        row.extend(record_cells(r));
        records.push(row);
        if r.wbar == 0.0 && r.realization == 0 {
            for (rank, mw) in r.top_modes.iter().enumerate() {
                let [zr, zi] = complex_cells(mw.zeta);
                modes.push(vec![
                    r.n.into(),
                    (rank + 1).into(),
                    mw.index.into(),
                    zr,
                    zi,
                    mw.weight.into(),
                ]);
            }
        }
    }
    let mut summary = Table::new(
        "size_summary.csv",
        &["n", "wbar", "count", "mean_P", "stderr_P", "median_P"],
    );
    for s in &scan.summaries {
        summary.push(vec![
            s.n.into(),
            s.wbar.into(),
            s.count.into(),
            s.mean_population.into(),
            s.stderr_population.into(),
            s.median_population.into(),
        ]);
    }
    let lines = vec![format!(
        "{} sizes x {} strengths x {} realizations",
        j.n_list.len(),
        j.wbar_list.len(),
        j.realizations
    )];
    Ok(Outcome {
        tables: vec![summary, records, modes],
        summary: lines,
    })
}
