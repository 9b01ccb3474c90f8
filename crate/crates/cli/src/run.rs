//! Executes a [`Plan`] and writes its artifacts.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Instant;

use kicked_duo::checkpoint;
use kicked_duo::classical::RNG_ALGORITHM;
use kicked_duo::observables::{
    classical_entropy, classical_moments, quantum_record, QuantumObservables, DEFAULT_EIGEN_CUTOFF,
};
use kicked_duo::{
    fit_diffusion, ClassicalEnsemble, Dynamics, Error, EvolveOptions, KickConvention, ModelParams,
    MomentumDistribution, Propagator, QuantumState, Record, Representation, SingleRotor, TimeSeries,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::compare;
use crate::config::Mode;
use crate::error::{HarnessError, Result};
use crate::spec::{Member, Plan, Scale};

pub const SERIES_FILE: &str = "series.csv";
pub const DISTRIBUTION_FILE: &str = "distribution.csv";
pub const STATE_FILE: &str = "state.kduo";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const ENSEMBLE_META_FILE: &str = "ensemble.meta.json";
pub const METADATA_FILE: &str = "metadata.json";

pub struct RunContext {
    pub out_dir: PathBuf,
    pub workers: usize,
    pub interrupt: Arc<AtomicBool>,
    pub resume: Option<PathBuf>,
    pub preset: Option<String>,
    pub scale: Option<Scale>,
}

impl RunContext {
    pub fn new(out_dir: impl Into<PathBuf>, workers: usize) -> Self {
        Self {
            out_dir: out_dir.into(),
            workers,
            interrupt: Arc::new(AtomicBool::new(false)),
            resume: None,
            preset: None,
            scale: None,
        }
    }
}

pub struct MemberOutput {
    pub label: String,
    pub series: TimeSeries,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(HarnessError::file(path))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(HarnessError::file(path))
}

/// Writes to a temporary sibling, then renames it into place.
fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    let mut out = create(&tmp)?;
    fill(&mut out).and_then(|_| out.flush()).map_err(HarnessError::file(&tmp))?;
    drop(out);
    fs::rename(&tmp, path).map_err(HarnessError::file(path))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    write_file(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)
    })
}

fn write_series(dir: &Path, series: &TimeSeries) -> Result<()> {
    write_file(&dir.join(SERIES_FILE), |out| series.write_csv(out))
}

fn write_state(dir: &Path, state: &QuantumState) -> Result<()> {
    let path = dir.join(STATE_FILE);
    let tmp = path.with_extension("partial");
    let mut out = create(&tmp)?;
    checkpoint::write_state(state, &mut out)?;
    out.flush().map_err(HarnessError::file(&tmp))?;
    drop(out);
    fs::rename(&tmp, &path).map_err(HarnessError::file(&path))
}

pub fn params_json(p: &ModelParams) -> Value {
    json!({
        "m": p.mass, "M": p.total_mass, "mu": p.reduced_mass,
        "k": p.particle_kick, "K": p.kick, "T": p.period,
        "hbar": p.hbar, "w": p.width,
        "N_R": p.n_com, "N_r": p.n_int, "n_kicks": p.n_kicks,
    })
}

/// Checkpoints may be resumed towards a different final kick, nothing else.
fn check_compatible(found: &ModelParams, wanted: &ModelParams) -> Result<()> {
    let (a, b) = (found.to_array(), wanted.to_array());
    let names = ["m", "M", "mu", "k", "K", "T", "hbar", "w", "N_R", "N_r"];
    for (i, name) in names.iter().enumerate() {
        if a[i].to_bits() != b[i].to_bits() {
            return Err(HarnessError::CheckpointMismatch(format!(
                "{name} is {} in the checkpoint but {} in the run",
                a[i], b[i]
            )));
        }
    }
    Ok(())
}

/// Rows recorded before `kick` next to the checkpoint, if any.
fn prior_series(checkpoint: &Path, kick: u64) -> Result<TimeSeries> {
    let path = checkpoint.parent().unwrap_or(Path::new(".")).join(SERIES_FILE);
    if !path.exists() {
        return Ok(TimeSeries::new());
    }
    let mut series = TimeSeries::read_csv(open(&path)?)?;
    series.records.retain(|r| r.n <= kick);
    Ok(series)
}

fn chunk(remaining: u64, kick: u64, every: u64) -> u64 {
    if every == 0 {
        remaining
    } else {
        remaining.min(every - kick % every)
    }
}

struct Finished {
    series: TimeSeries,
    kicks: u64,
    extra: Value,
}

fn run_quantum(m: &Member, dir: &Path, ctx: &RunContext) -> Result<Finished> {
    let s = &m.settings;
    let prop = Propagator::with_convention(&m.params, s.convention);
    let (mut state, mut series) = match &ctx.resume {
        Some(path) => {
            let state = checkpoint::read_state(open(path)?)?;
            check_compatible(&state.params, &m.params)?;
            let series = prior_series(path, state.kick_count)?;
            (QuantumState { params: m.params, ..state }, series)
        }
        None => (QuantumState::initial(&m.params), TimeSeries::new()),
    };
    if state.kick_count > m.params.n_kicks {
        return Err(HarnessError::CheckpointMismatch(format!(
            "checkpoint is at kick {} beyond n_kicks = {}",
            state.kick_count, m.params.n_kicks
        )));
    }
    let opts = EvolveOptions {
        record_every: s.record_every,
        guard: s.guard,
        interrupt: Some(ctx.interrupt.clone()),
    };
    let observe = |st: &mut QuantumState| {
        prop.basis().ensure(st, Representation::MomLevel)?;
        let n = st.kick_count;
        let what = QuantumObservables {
            linear_entropy: true,
            von_neumann: s.vn_every > 0 && n.is_multiple_of(s.vn_every),
            cutoff: DEFAULT_EIGEN_CUTOFF,
        };
        quantum_record(n, st, what)
    };
    let outcome = (|| {
        while state.kick_count < m.params.n_kicks {
            let n = chunk(m.params.n_kicks - state.kick_count, state.kick_count, s.checkpoint_every);
            prop.evolve_into(&mut state, n, &opts, &mut series, observe)?;
            if s.checkpoint_every > 0 {
                write_state(dir, &state)?;
            }
        }
        Ok::<_, HarnessError>(())
    })();
    write_series(dir, &series)?;
    if let Err(e) = outcome {
        if matches!(e, HarnessError::Model(Error::Interrupted { .. })) {
            write_state(dir, &state)?;
        }
        return Err(e);
    }
    write_state(dir, &state)?;
    prop.basis().ensure(&mut state, Representation::MomLevel)?;
    let dist = MomentumDistribution::quantum(&state)?;
    write_file(&dir.join(DISTRIBUTION_FILE), |out| dist.write_csv(out))?;
    let extra = json!({
        "vn_every": s.vn_every,
        "eigen_cutoff": DEFAULT_EIGEN_CUTOFF,
        "excess_kurtosis": dist.excess_kurtosis(),
    });
    Ok(Finished { series, kicks: state.kick_count, extra })
}

fn run_single_rotor(m: &Member, dir: &Path, ctx: &RunContext) -> Result<Finished> {
    let s = &m.settings;
    let params = m.params.with_grid(m.params.n_com, 1)?;
    let rotor = SingleRotor::with_convention(&params, s.convention);
    let (mut amps, mut kick, mut series) = match &ctx.resume {
        Some(path) => {
            let state = checkpoint::read_state(open(path)?)?;
            check_compatible(&state.params, &params)?;
            let series = prior_series(path, state.kick_count)?;
            (state.coeffs, state.kick_count, series)
        }
        None => (rotor.initial(), 0, TimeSeries::new()),
    };
    let wrap = |amps: &[kicked_duo::Complex64], kick: u64| QuantumState {
        coeffs: amps.to_vec(),
        rep: Representation::MomLevel,
        params,
        kick_count: kick,
    };
    let opts = EvolveOptions {
        record_every: s.record_every,
        guard: s.guard,
        interrupt: Some(ctx.interrupt.clone()),
    };
    let mut outcome = Ok(());
    while kick < params.n_kicks && outcome.is_ok() {
        let n = chunk(params.n_kicks - kick, kick, s.checkpoint_every);
        outcome = rotor.evolve_into(&mut amps, kick, n, &opts, &mut series);
        kick = match &outcome {
            Err(Error::Interrupted { kick }) | Err(Error::Aliasing { kick, .. }) => *kick,
            _ => kick + n,
        };
        if outcome.is_ok() && s.checkpoint_every > 0 {
            write_state(dir, &wrap(&amps, kick))?;
        }
    }
    write_series(dir, &series)?;
    match outcome {
        Err(e @ Error::Interrupted { .. }) => {
            write_state(dir, &wrap(&amps, kick))?;
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
        Ok(()) => {}
    }
    let state = wrap(&amps, kick);
    write_state(dir, &state)?;
    let dist = MomentumDistribution::quantum(&state)?;
    write_file(&dir.join(DISTRIBUTION_FILE), |out| dist.write_csv(out))?;
    let extra = json!({ "excess_kurtosis": dist.excess_kurtosis() });
    Ok(Finished { series, kicks: kick, extra })
}

fn dynamics_name(d: Dynamics) -> &'static str {
    match d {
        Dynamics::Coupled => "coupled",
        Dynamics::SingleRotor => "single-rotor",
    }
}

fn write_ensemble(dir: &Path, ens: &ClassicalEnsemble) -> Result<()> {
    write_file(&dir.join(ENSEMBLE_FILE), |out| ens.write_csv(out))?;
    write_json(
        &dir.join(ENSEMBLE_META_FILE),
        &json!({
            "seed": ens.seed,
            "kick_count": ens.kick_count,
            "dynamics": dynamics_name(ens.dynamics),
            "rng": RNG_ALGORITHM,
            "particles": ens.len(),
            "params": params_json(&ens.params),
            "params_raw": ens.params.to_array(),
        }),
    )
}

fn read_ensemble(path: &Path) -> Result<ClassicalEnsemble> {
    let meta_path = path.with_file_name(ENSEMBLE_META_FILE);
    let meta: Value = serde_json::from_reader(open(&meta_path)?).map_err(|e| {
        HarnessError::CheckpointMismatch(format!("{}: {e}", meta_path.display()))
    })?;
    let bad = |what: &str| HarnessError::CheckpointMismatch(format!("{}: bad `{what}`", meta_path.display()));
    let raw: Vec<f64> = meta["params_raw"]
        .as_array()
        .ok_or_else(|| bad("params_raw"))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| bad("params_raw")))
        .collect::<Result<_>>()?;
    let raw: [f64; 11] = raw.try_into().map_err(|_| bad("params_raw"))?;
    let dynamics = match meta["dynamics"].as_str() {
        Some("coupled") => Dynamics::Coupled,
        Some("single-rotor") => Dynamics::SingleRotor,
        _ => return Err(bad("dynamics")),
    };
    Ok(ClassicalEnsemble {
        particles: ClassicalEnsemble::read_particles(open(path)?)?,
        seed: meta["seed"].as_u64().ok_or_else(|| bad("seed"))?,
        params: ModelParams::from_array(&raw)?,
        dynamics,
        kick_count: meta["kick_count"].as_u64().ok_or_else(|| bad("kick_count"))?,
    })
}

fn run_classical(m: &Member, dir: &Path, ctx: &RunContext) -> Result<Finished> {
    let s = &m.settings;
    let dynamics = if m.mode == Mode::Classical { Dynamics::Coupled } else { Dynamics::SingleRotor };
    let (mut ens, mut series) = match &ctx.resume {
        Some(path) => {
            let ens = read_ensemble(path)?;
            check_compatible(&ens.params, &m.params)?;
            if ens.dynamics != dynamics {
                return Err(HarnessError::CheckpointMismatch(format!(
                    "snapshot holds {} dynamics",
                    dynamics_name(ens.dynamics)
                )));
            }
            let series = prior_series(path, ens.kick_count)?;
            (ClassicalEnsemble { params: m.params, ..ens }, series)
        }
        None if dynamics == Dynamics::Coupled => {
            (ClassicalEnsemble::sample(&m.params, s.particles, s.seed)?, TimeSeries::new())
        }
        None => (ClassicalEnsemble::single_rotor(&m.params, s.particles, s.seed)?, TimeSeries::new()),
    };
    let dp = s.entropy_dp(&m.params);
    let opts = EvolveOptions { record_every: s.record_every, guard: None, interrupt: Some(ctx.interrupt.clone()) };
    let mut outcome = Ok(());
    while ens.kick_count < m.params.n_kicks {
        ens.step();
        let n = ens.kick_count;
        if opts.records(n) {
            let mut rec = Record::from_moments(n, classical_moments(&ens)?, &ens.params);
            rec.classical_entropy = Some(classical_entropy(&ens, s.entropy_bins, dp)?);
            series.push(rec);
        }
        if s.checkpoint_every > 0 && n % s.checkpoint_every == 0 {
            write_ensemble(dir, &ens)?;
        }
        if opts.interrupted() {
            outcome = Err(Error::Interrupted { kick: n });
            break;
        }
    }
    write_series(dir, &series)?;
    write_ensemble(dir, &ens)?;
    outcome?;
    let dist = MomentumDistribution::classical(&ens, s.dist_bin)?;
    write_file(&dir.join(DISTRIBUTION_FILE), |out| dist.write_csv(out))?;
    let extra = json!({
        "seed": ens.seed,
        "rng": RNG_ALGORITHM,
        "particles": ens.len(),
        "dynamics": dynamics_name(ens.dynamics),
        "entropy_cells": { "R_bins": s.entropy_bins, "P_width": dp },
        "distribution_bin": s.dist_bin,
        "excess_kurtosis": dist.excess_kurtosis(),
    });
    Ok(Finished { series, kicks: ens.kick_count, extra })
}

fn run_member(m: &Member, ctx: &RunContext) -> Result<MemberOutput> {
    let dir = ctx.out_dir.join(&m.label);
    fs::create_dir_all(&dir).map_err(HarnessError::file(&dir))?;
    let start = Instant::now();
    let done = match m.mode {
        Mode::Quantum => run_quantum(m, &dir, ctx)?,
        Mode::SingleRotorQuantum => run_single_rotor(m, &dir, ctx)?,
        Mode::Classical | Mode::SingleRotorClassical => run_classical(m, &dir, ctx)?,
        Mode::Compare | Mode::Sweep => unreachable!("plans hold single runs only"),
    };
    let s = &m.settings;
    let (lo, hi) = s.fit_window;
    let diffusion = fit_diffusion(&done.series, lo, hi).ok().map(|f| {
        json!({ "D": f.coefficient, "slope": f.slope, "intercept": f.intercept,
                "residual_se": f.residual_se, "points": f.points })
    });
    let meta = json!({
        "label": m.label,
        "mode": m.mode.name(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "params": params_json(&m.params),
        "kicks_completed": done.kicks,
        "record_every": s.record_every,
        "recorded": "after each kick",
        "step_order": "free evolution, then kick",
        "kick_phase": match s.convention {
            KickConvention::ScaledByHbar => "(K/hbar) cos R cos(r/2)",
            KickConvention::Literal => "K cos R cos(r/2)",
        },
        "alias_guard": s.guard.map(|g| json!({ "edge_fraction": g.edge_fraction, "tolerance": g.tolerance })),
        "fit_window": [lo, hi],
        "diffusion": diffusion,
        "details": done.extra,
        "preset": ctx.preset,
        "scale": ctx.scale.map(Scale::name),
        "workers": ctx.workers,
        "resumed_from": ctx.resume.as_ref().map(|p| p.display().to_string()),
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    write_json(&dir.join(METADATA_FILE), &meta)?;
    Ok(MemberOutput { label: m.label.clone(), series: done.series })
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    Ok(TimeSeries::read_csv(open(path)?)?)
}

fn summary_json(rows: &[compare::DifferenceRow], window: Option<(u64, u64)>) -> Value {
    match compare::summarize(rows, window) {
        Some(s) => json!({
            "max_abs": s.max_abs, "n_at_max": s.n_at_max, "mean": s.mean,
            "window": [s.window.0, s.window.1], "points": s.points,
        }),
        None => Value::Null,
    }
}

/// Writes `compare_<label>.csv` and returns the summary.
pub fn compare_series(
    out_dir: &Path,
    label: &str,
    minuend: &TimeSeries,
    subtrahend: &TimeSeries,
    window: Option<(u64, u64)>,
) -> Result<Value> {
    let rows = compare::difference(minuend, subtrahend)?;
    write_file(&out_dir.join(format!("compare_{label}.csv")), |out| compare::write_csv(&rows, out))?;
    Ok(summary_json(&rows, window))
}

pub fn compare_files(out_dir: &Path, minuend: &Path, subtrahend: &Path, window: Option<(u64, u64)>) -> Result<Value> {
    fs::create_dir_all(out_dir).map_err(HarnessError::file(out_dir))?;
    let summary = compare_series(out_dir, "files", &read_series(minuend)?, &read_series(subtrahend)?, window)?;
    let report = json!({
        "minuend": minuend.display().to_string(),
        "subtrahend": subtrahend.display().to_string(),
        "summary": summary,
    });
    write_json(&out_dir.join("comparisons.json"), &json!({ "files": report }))?;
    Ok(report)
}

const PLOT_STUB: &str = r#"#!/usr/bin/env python3
"""Quick look at a kicked-duo output directory: python3 plot.py [DIR]"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

root = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent)
fig, axes = plt.subplots(2, 2, figsize=(10, 8))
for run in sorted(p for p in root.iterdir() if (p / "series.csv").exists()):
    s = pd.read_csv(run / "series.csv")
    axes[0, 0].plot(s.n, s.delta2, label=run.name)
    if s.s_l.notna().any():
        axes[0, 1].plot(s.n, s.s_l, label=run.name)
    for col in ("S_vn", "S_cl"):
        if s[col].notna().any():
            axes[1, 0].semilogx(s.n, s[col], label=f"{run.name} {col}")
    if (run / "distribution.csv").exists():
        f = pd.read_csv(run / "distribution.csv")
        axes[1, 1].semilogy(f.P, f.f, label=run.name)
for c in sorted(root.glob("compare_*.csv")):
    d = pd.read_csv(c)
    axes[0, 0].plot(d.n, d.difference, "--", label=c.stem)
for ax, title in zip(axes.flat, ["delta2", "s_l", "entropy", "f(P)"]):
    ax.set_title(title)
    ax.legend(fontsize=6)
fig.tight_layout()
fig.savefig(root / "overview.png", dpi=120)
"#;

pub fn execute(plan: &Plan, ctx: &RunContext) -> Result<Vec<MemberOutput>> {
    if ctx.resume.is_some() && plan.members.len() != 1 {
        return Err(HarnessError::Config(format!(
            "--resume needs a plan with exactly one run, this one has {}",
            plan.members.len()
        )));
    }
    fs::create_dir_all(&ctx.out_dir).map_err(HarnessError::file(&ctx.out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {} workers: {e}", ctx.workers)))?;
    let results: Vec<Result<MemberOutput>> =
        pool.install(|| plan.members.par_iter().map(|m| run_member(m, ctx)).collect());
    let outputs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let find = |label: &str| &outputs.iter().find(|o| o.label == label).expect("planned run").series;

    let mut comparisons = serde_json::Map::new();
    for d in &plan.differences {
        let summary = compare_series(&ctx.out_dir, &d.label, find(&d.minuend), find(&d.subtrahend), d.window)?;
        comparisons.insert(
            d.label.clone(),
            json!({ "minuend": d.minuend, "subtrahend": d.subtrahend, "summary": summary }),
        );
    }
    if let Some((a, b, window)) = &plan.file_compare {
        let summary = compare_series(&ctx.out_dir, "files", &read_series(a)?, &read_series(b)?, *window)?;
        comparisons.insert(
            "files".into(),
            json!({ "minuend": a.display().to_string(), "subtrahend": b.display().to_string(), "summary": summary }),
        );
    }
    if !comparisons.is_empty() {
        write_json(&ctx.out_dir.join("comparisons.json"), &Value::Object(comparisons))?;
    }

    for t in &plan.sweeps {
        let path = ctx.out_dir.join(format!("sweep_{}.csv", t.label));
        let mut lines = vec![format!("{},wK_over_hbar,D,residual_se,points", t.param.name())];
        for (value, label) in &t.rows {
            let m = plan.members.iter().find(|m| &m.label == label).expect("planned run");
            let x = m.params.width * m.params.kick / m.params.hbar;
            let (lo, hi) = t.fit_window;
            match fit_diffusion(find(label), lo, hi) {
                Ok(f) => lines.push(format!("{value:e},{x:e},{:e},{:e},{}", f.coefficient, f.residual_se, f.points)),
                Err(_) => lines.push(format!("{value:e},{x:e},,,0")),
            }
        }
        write_file(&path, |out| lines.iter().try_for_each(|l| writeln!(out, "{l}")))?;
    }

    write_file(&ctx.out_dir.join("plot.py"), |out| out.write_all(PLOT_STUB.as_bytes()))?;
    write_json(
        &ctx.out_dir.join("run.json"),
        &json!({
            "code_version": env!("CARGO_PKG_VERSION"),
            "preset": ctx.preset,
            "scale": ctx.scale.map(Scale::name),
            "workers": ctx.workers,
            "runs": plan.members.iter().map(|m| json!({ "label": m.label, "mode": m.mode.name() })).collect::<Vec<_>>(),
            "comparisons": plan.differences.iter().map(|d| d.label.clone()).collect::<Vec<_>>(),
            "sweeps": plan.sweeps.iter().map(|t| t.label.clone()).collect::<Vec<_>>(),
        }),
    )?;
    Ok(outputs)
}
