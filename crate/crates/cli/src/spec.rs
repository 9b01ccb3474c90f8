//! Experiment descriptions and the figure presets.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use kicked_duo::ModelParams;

use crate::config::{Config, Mode, Settings, SweepAxis, SweepParam};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        }
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            _ => Err(format!("unknown scale `{s}` (paper or desk)")),
        }
    }
}

/// Which pair of variance series a comparison subtracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareKind {
    /// classical minus quantum, coupled rotors
    ClassicalQuantum,
    /// classical minus quantum, single rotor
    SingleRotor,
    /// single rotor minus coupled rotors, both classical
    SingleTwo,
}

impl CompareKind {
    fn members(self) -> (Mode, Mode) {
        match self {
            CompareKind::ClassicalQuantum => (Mode::Classical, Mode::Quantum),
            CompareKind::SingleRotor => (Mode::SingleRotorClassical, Mode::SingleRotorQuantum),
            CompareKind::SingleTwo => (Mode::SingleRotorClassical, Mode::Classical),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub label: String,
    pub mode: Mode,
    pub params: ModelParams,
    pub settings: Settings,
    pub compare: CompareKind,
}

impl ExperimentSpec {
    pub fn from_config(config: &Config) -> Self {
        Self {
            label: config.settings.mode.name().to_string(),
            mode: config.settings.mode,
            params: config.params,
            settings: config.settings.clone(),
            compare: CompareKind::ClassicalQuantum,
        }
    }
}

/// One simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub mode: Mode,
    pub params: ModelParams,
    pub settings: Settings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    pub label: String,
    pub minuend: String,
    pub subtrahend: String,
    pub window: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub label: String,
    pub param: SweepParam,
    pub fit_window: (u64, u64),
    pub rows: Vec<(f64, String)>,
}

/// Classical and quantum series files plus an optional kick window.
pub type FileCompare = (PathBuf, PathBuf, Option<(u64, u64)>);

/// Deduplicated simulations plus what to derive from them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub members: Vec<Member>,
    pub differences: Vec<Difference>,
    pub sweeps: Vec<SweepTable>,
    pub file_compare: Option<FileCompare>,
}

fn short(v: f64) -> String {
    format!("{v}")
}

/// Directory-safe label that identifies a simulation by what it depends on.
pub fn member_label(mode: Mode, p: &ModelParams) -> String {
    let d = ModelParams::default();
    let mut s = mode.name().to_string();
    if matches!(mode, Mode::Quantum | Mode::Classical) {
        s += &format!("_w{}", short(p.width));
    }
    if mode.is_quantum() {
        s += &format!("_hbar{}", short(p.hbar));
    }
    if p.particle_kick != d.particle_kick {
        s += &format!("_k{}", short(p.particle_kick));
    }
    if p.period != d.period {
        s += &format!("_T{}", short(p.period));
    }
    if p.mass != d.mass {
        s += &format!("_m{}", short(p.mass));
    }
    s
}

impl Plan {
    pub fn build(specs: &[ExperimentSpec]) -> Result<Self> {
        let mut plan = Plan::default();
        let mut seen = BTreeMap::new();
        for spec in specs {
            match spec.mode {
                Mode::Compare => {
                    if let (Some(q), Some(c)) = (&spec.settings.quantum_csv, &spec.settings.classical_csv) {
                        plan.file_compare = Some((c.clone(), q.clone(), spec.settings.compare_window));
                        continue;
                    }
                    let (a, b) = spec.compare.members();
                    let minuend = plan.add(&mut seen, a, &spec.params, &spec.settings)?;
                    let subtrahend = plan.add(&mut seen, b, &spec.params, &spec.settings)?;
                    plan.differences.push(Difference {
                        label: spec.label.clone(),
                        minuend,
                        subtrahend,
                        window: spec.settings.compare_window,
                    });
                }
                Mode::Sweep => {
                    let SweepAxis { param, values } = spec
                        .settings
                        .sweep
                        .clone()
                        .ok_or_else(|| HarnessError::bad("sweep", "required when mode = sweep"))?;
                    let mut rows = Vec::new();
                    for v in values {
                        let p = param.apply(&spec.params, v)?;
                        rows.push((v, plan.add(&mut seen, spec.settings.sweep_mode, &p, &spec.settings)?));
                    }
                    plan.sweeps.push(SweepTable {
                        label: spec.label.clone(),
                        param,
                        fit_window: spec.settings.fit_window,
                        rows,
                    });
                }
                mode => {
                    plan.add(&mut seen, mode, &spec.params, &spec.settings)?;
                }
            }
        }
        Ok(plan)
    }

    fn add(
        &mut self,
        seen: &mut BTreeMap<String, usize>,
        mode: Mode,
        params: &ModelParams,
        settings: &Settings,
    ) -> Result<String> {
        let label = member_label(mode, params);
        let member = Member { label: label.clone(), mode, params: *params, settings: settings.clone() };
        let key = |m: &Member| {
            let mut m = m.clone();
            if matches!(m.mode, Mode::SingleRotorQuantum | Mode::SingleRotorClassical) {
                m.params = m.params.with_width(ModelParams::default().width).expect("default width is valid");
            }
            m
        };
        match seen.get(&label) {
            Some(&i) if key(&self.members[i]) != key(&member) => Err(HarnessError::Config(format!(
                "two runs share the label `{label}` with different settings"
            ))),
            Some(_) => Ok(label),
            None => {
                seen.insert(label.clone(), self.members.len());
                self.members.push(member);
                Ok(label)
            }
        }
    }
}

pub const PRESETS: &[&str] = &["fig1", "fig2", "fig3", "fig4", "fig5"];

struct Grid {
    hbar: f64,
    n_com: usize,
    n_int: usize,
    kicks: u64,
}

fn with(base: &Config, w: f64, g: &Grid) -> Result<ModelParams> {
    let p = base.params.with_grid(g.n_com, g.n_int)?.with_hbar(g.hbar)?.with_width(w)?;
    Ok(p.with_kicks(g.kicks))
}

fn spec(label: String, mode: Mode, params: ModelParams, settings: &Settings) -> ExperimentSpec {
    ExperimentSpec { label, mode, params, settings: settings.clone(), compare: CompareKind::ClassicalQuantum }
}

/// Parameter sets of the five figures. Physics constants other than `hbar`
/// and `w` come from `base`, as do the seed, ensemble size and output knobs.
pub fn fig_presets(name: &str, scale: Scale, base: &Config) -> Result<Vec<ExperimentSpec>> {
    let paper = scale == Scale::Paper;
    let s = &base.settings;
    let tenths = |lo: u32, hi: u32| (lo..=hi).map(|i| f64::from(i) / 10.0).collect::<Vec<_>>();
    let mut out = Vec::new();
    match name {
        "fig1" => {
            let g = if paper {
                Grid { hbar: 0.07, n_com: 16384, n_int: 256, kicks: 500 }
            } else {
                Grid { hbar: 0.25, n_com: 4096, n_int: 128, kicks: 300 }
            };
            let mut single = spec("fig1_w0".into(), Mode::Compare, with(base, base.params.width, &g)?, s);
            single.compare = CompareKind::SingleRotor;
            out.push(single);
            for w in tenths(1, 7) {
                out.push(spec(format!("fig1_w{w}"), Mode::Compare, with(base, w, &g)?, s));
            }
            for w in tenths(1, 8) {
                let mut inset = spec(format!("fig1_inset_w{w}"), Mode::Compare, with(base, w, &g)?, s);
                inset.compare = CompareKind::SingleTwo;
                out.push(inset);
            }
        }
        "fig2" => {
            let g = |hbar: f64| match (paper, hbar < 0.2) {
                (true, _) => Grid { hbar, n_com: 16384, n_int: 256, kicks: 500 },
                (false, false) => Grid { hbar, n_com: 8192, n_int: 128, kicks: 500 },
                (false, true) => Grid { hbar, n_com: 16384, n_int: 64, kicks: 500 },
            };
            for (hbar, w) in [(0.25, 0.2), (0.25, 1.0), (0.1, 0.2)] {
                out.push(spec(format!("fig2_hbar{hbar}_w{w}"), Mode::Quantum, with(base, w, &g(hbar))?, s));
            }
        }
        "fig3" => {
            let g = if paper {
                Grid { hbar: 0.07, n_com: 16384, n_int: 256, kicks: 500 }
            } else {
                Grid { hbar: 0.07, n_com: 4096, n_int: 128, kicks: 100 }
            };
            for w in tenths(1, 7) {
                out.push(spec(format!("fig3_w{w}"), Mode::Quantum, with(base, w, &g)?, s));
            }
        }
        "fig4" => {
            let g = if paper {
                Grid { hbar: 0.25, n_com: 16384, n_int: 256, kicks: 200 }
            } else {
                Grid { hbar: 0.25, n_com: 8192, n_int: 128, kicks: 200 }
            };
            let values = (0..5).map(|j| 0.1 * 10f64.powf(f64::from(j) / 4.0)).collect();
            let mut settings = s.clone();
            settings.sweep = Some(SweepAxis { param: SweepParam::W, values });
            settings.sweep_mode = Mode::Quantum;
            settings.fit_window = (20, 200);
            out.push(spec("fig4".into(), Mode::Sweep, with(base, base.params.width, &g)?, &settings));
        }
        "fig5" => {
            let g = if paper {
                Grid { hbar: 0.07, n_com: 4096, n_int: 256, kicks: 100 }
            } else {
                Grid { hbar: 0.07, n_com: 4096, n_int: 128, kicks: 100 }
            };
            let mut quantum = s.clone();
            quantum.vn_every = 1;
            let classical_kicks = Grid { kicks: 500, ..g };
            for w in [0.2, 0.4, 0.6, 0.8, 1.0] {
                out.push(spec(format!("fig5_w{w}"), Mode::Quantum, with(base, w, &g)?, &quantum));
                out.push(spec(
                    format!("fig5_classical_w{w}"),
                    Mode::Classical,
                    with(base, w, &classical_kicks)?,
                    s,
                ));
            }
        }
        other => {
            return Err(HarnessError::Config(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(out)
}
