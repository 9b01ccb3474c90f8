//! Plain-text `key = value` configuration. Blank lines and `#` comments are
//! ignored; any key not listed in [`KEYS`] is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kicked_duo::{AliasGuard, KickConvention, ModelParams};

use crate::error::{HarnessError, Result};

pub const KEYS: &[&str] = &[
    "m",
    "k",
    "T",
    "hbar",
    "w",
    "N_R",
    "N_r",
    "n_kicks",
    "seed",
    "output_dir",
    "mode",
    "record_every",
    "particles",
    "sweep",
    "sweep_mode",
    "fit_lo",
    "fit_hi",
    "vn_every",
    "checkpoint_every",
    "alias_guard",
    "alias_edge",
    "alias_tol",
    "kick_phase",
    "entropy_bins",
    "entropy_dp",
    "dist_bin",
    "quantum_csv",
    "classical_csv",
    "compare_lo",
    "compare_hi",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Quantum,
    Classical,
    SingleRotorQuantum,
    SingleRotorClassical,
    Compare,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Quantum => "quantum",
            Mode::Classical => "classical",
            Mode::SingleRotorQuantum => "single-rotor-quantum",
            Mode::SingleRotorClassical => "single-rotor-classical",
            Mode::Compare => "compare",
            Mode::Sweep => "sweep",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Mode::Quantum | Mode::SingleRotorQuantum)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            Mode::Quantum,
            Mode::Classical,
            Mode::SingleRotorQuantum,
            Mode::SingleRotorClassical,
            Mode::Compare,
            Mode::Sweep,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    W,
    Hbar,
    K,
    T,
    M,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::W => "w",
            SweepParam::Hbar => "hbar",
            SweepParam::K => "k",
            SweepParam::T => "T",
            SweepParam::M => "m",
        }
    }

    pub fn apply(self, p: &ModelParams, v: f64) -> kicked_duo::Result<ModelParams> {
        let (m, k, t, hbar, w) = (p.mass, p.particle_kick, p.period, p.hbar, p.width);
        let (m, k, t, hbar, w) = match self {
            SweepParam::W => (m, k, t, hbar, v),
            SweepParam::Hbar => (m, k, t, v, w),
            SweepParam::K => (m, v, t, hbar, w),
            SweepParam::T => (m, k, v, hbar, w),
            SweepParam::M => (v, k, t, hbar, w),
        };
        ModelParams::new(m, k, t, hbar, w, p.n_com, p.n_int, p.n_kicks)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for SweepAxis {
    type Err = String;

    /// `name: v1, v2, ...`
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, list) = s.split_once(':').ok_or("expected `param: v1, v2, ...`")?;
        let param = match name.trim() {
            "w" => SweepParam::W,
            "hbar" => SweepParam::Hbar,
            "k" => SweepParam::K,
            "T" => SweepParam::T,
            "m" => SweepParam::M,
            other => return Err(format!("cannot sweep `{other}`")),
        };
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", v.trim())))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("empty value list".into());
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(format!("sweep value {v} is not positive"));
        }
        Ok(SweepAxis { param, values })
    }
}

/// Everything a run needs besides the physics parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mode: Mode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub record_every: u64,
    pub particles: usize,
    pub sweep: Option<SweepAxis>,
    pub sweep_mode: Mode,
    pub fit_window: (u64, u64),
    pub vn_every: u64,
    pub checkpoint_every: u64,
    pub guard: Option<AliasGuard>,
    pub convention: KickConvention,
    pub entropy_bins: usize,
    pub entropy_dp: Option<f64>,
    pub dist_bin: f64,
    pub quantum_csv: Option<PathBuf>,
    pub classical_csv: Option<PathBuf>,
    pub compare_window: Option<(u64, u64)>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            mode: Mode::Quantum,
            seed: 1,
            output_dir: PathBuf::from("out"),
            record_every: 1,
            particles: 100_000,
            sweep: None,
            sweep_mode: Mode::Quantum,
            fit_window: (20, 200),
            vn_every: 0,
            checkpoint_every: 0,
            guard: Some(AliasGuard::default()),
            convention: KickConvention::ScaledByHbar,
            entropy_bins: 64,
            entropy_dp: None,
            dist_bin: 0.25,
            quantum_csv: None,
            classical_csv: None,
            compare_window: None,
        }
    }
}

impl Settings {
    /// Momentum cell width for the classical entropy, `K` unless overridden.
    pub fn entropy_dp(&self, params: &ModelParams) -> f64 {
        self.entropy_dp.unwrap_or(params.kick)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub params: ModelParams,
    pub settings: Settings,
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| HarnessError::bad(key, format!("`{raw}`: {e}")))
}

fn switch(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(HarnessError::bad(key, format!("`{raw}`: expected on or off"))),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::file(path))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or(HarnessError::Syntax { path: path.to_path_buf(), line: i + 1 })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(HarnessError::UnknownKey {
                    path: path.to_path_buf(),
                    line: i + 1,
                    key: key.to_string(),
                });
            }
            if entries.insert(key.to_string(), val.trim().to_string()).is_some() {
                return Err(HarnessError::Duplicate {
                    path: path.to_path_buf(),
                    line: i + 1,
                    key: key.to_string(),
                });
            }
        }
        Self::from_entries(&entries)
    }

    fn from_entries(e: &BTreeMap<String, String>) -> Result<Self> {
        let d = ModelParams::default();
        let get = |k: &str| e.get(k).map(String::as_str);
        let num = |k: &str, default: f64| get(k).map_or(Ok(default), |v| value::<f64>(k, v));
        let count = |k: &str, default: usize| get(k).map_or(Ok(default), |v| value::<usize>(k, v));
        let kicks = |k: &str, default: u64| get(k).map_or(Ok(default), |v| value::<u64>(k, v));

        let params = ModelParams::new(
            num("m", d.mass)?,
            num("k", d.particle_kick)?,
            num("T", d.period)?,
            num("hbar", d.hbar)?,
            num("w", d.width)?,
            count("N_R", d.n_com)?,
            count("N_r", d.n_int)?,
            kicks("n_kicks", d.n_kicks)?,
        )?;

        let mut s = Settings::default();
        if let Some(v) = get("mode") {
            s.mode = value("mode", v)?;
        }
        s.seed = kicks("seed", s.seed)?;
        if let Some(v) = get("output_dir") {
            s.output_dir = PathBuf::from(v);
        }
        s.record_every = kicks("record_every", s.record_every)?;
        if s.record_every == 0 {
            return Err(HarnessError::bad("record_every", "must be at least 1"));
        }
        s.particles = count("particles", s.particles)?;
        if s.particles == 0 {
            return Err(HarnessError::bad("particles", "must be at least 1"));
        }
        if let Some(v) = get("sweep") {
            s.sweep = Some(value("sweep", v)?);
        }
        if let Some(v) = get("sweep_mode") {
            s.sweep_mode = value("sweep_mode", v)?;
            if matches!(s.sweep_mode, Mode::Sweep | Mode::Compare) {
                return Err(HarnessError::bad("sweep_mode", "must be a single-run mode"));
            }
        }
        if s.mode == Mode::Sweep && s.sweep.is_none() {
            return Err(HarnessError::bad("sweep", "required when mode = sweep"));
        }
        s.fit_window = (kicks("fit_lo", s.fit_window.0)?, kicks("fit_hi", s.fit_window.1)?);
        if s.fit_window.0 >= s.fit_window.1 {
            return Err(HarnessError::bad("fit_hi", "must exceed fit_lo"));
        }
        s.vn_every = kicks("vn_every", s.vn_every)?;
        s.checkpoint_every = kicks("checkpoint_every", s.checkpoint_every)?;
        let mut guard = AliasGuard::default();
        guard.edge_fraction = num("alias_edge", guard.edge_fraction)?;
        guard.tolerance = num("alias_tol", guard.tolerance)?;
        if !(guard.edge_fraction > 0.0 && guard.edge_fraction <= 0.5) {
            return Err(HarnessError::bad("alias_edge", "must lie in (0, 0.5]"));
        }
        if guard.tolerance.is_nan() || guard.tolerance < 0.0 {
            return Err(HarnessError::bad("alias_tol", "must be non-negative"));
        }
        let on = get("alias_guard").map_or(Ok(true), |v| switch("alias_guard", v))?;
        s.guard = on.then_some(guard);
        if let Some(v) = get("kick_phase") {
            s.convention = match v {
                "scaled" => KickConvention::ScaledByHbar,
                "literal" => KickConvention::Literal,
                _ => return Err(HarnessError::bad("kick_phase", "expected scaled or literal")),
            };
        }
        s.entropy_bins = count("entropy_bins", s.entropy_bins)?;
        if s.entropy_bins == 0 {
            return Err(HarnessError::bad("entropy_bins", "must be at least 1"));
        }
        if let Some(v) = get("entropy_dp") {
            let dp: f64 = value("entropy_dp", v)?;
            if !(dp > 0.0 && dp.is_finite()) {
                return Err(HarnessError::bad("entropy_dp", "must be positive"));
            }
            s.entropy_dp = Some(dp);
        }
        s.dist_bin = num("dist_bin", s.dist_bin)?;
        if !(s.dist_bin > 0.0 && s.dist_bin.is_finite()) {
            return Err(HarnessError::bad("dist_bin", "must be positive"));
        }
        s.quantum_csv = get("quantum_csv").map(PathBuf::from);
        s.classical_csv = get("classical_csv").map(PathBuf::from);
        if s.quantum_csv.is_some() != s.classical_csv.is_some() {
            return Err(HarnessError::bad("classical_csv", "quantum_csv and classical_csv go together"));
        }
        match (get("compare_lo"), get("compare_hi")) {
            (None, None) => {}
            (Some(lo), Some(hi)) => {
                let (lo, hi): (u64, u64) = (value("compare_lo", lo)?, value("compare_hi", hi)?);
                if lo > hi {
                    return Err(HarnessError::bad("compare_hi", "must not be below compare_lo"));
                }
                s.compare_window = Some((lo, hi));
            }
            _ => return Err(HarnessError::bad("compare_hi", "compare_lo and compare_hi go together")),
        }
        Ok(Config { params, settings: s })
    }
}
