//! Sweeps over one scene parameter, paired across schemes, written as CSV.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use antijam_core::bsum::{run_scheme, BsumOptions, Scheme};
use antijam_core::scene::{draw_scene, SceneConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "sweep,value,scheme,trial,u_L,u_J,u_L_worst,P_S,P_J,gamma_sinr,iters,ms";

/// Jammer x-coordinates allowed by the `xj` sweep.
pub const ARENA_X: (f64, f64) = (0.0, 400.0);
/// Jammer y-coordinate used by the `xj` sweep.
pub const JAMMER_Y: f64 = 400.0;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Swept scene parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    Cj,
    Cs,
    N,
    Xj,
}

impl Sweep {
    pub const ALL: [Sweep; 4] = [Sweep::Cj, Sweep::Cs, Sweep::N, Sweep::Xj];

    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Cj => "cj",
            Sweep::Cs => "cs",
            Sweep::N => "n",
            Sweep::Xj => "xj",
        }
    }

    pub fn default_values(&self) -> Vec<f64> {
        match self {
            Sweep::Cj | Sweep::Cs => (1..=10).map(|k| 0.5 * k as f64).collect(),
            Sweep::N => (1..=10).map(|k| 4.0 * k as f64).collect(),
            Sweep::Xj => (0..=8).map(|k| 50.0 * k as f64).collect(),
        }
    }

    /// Scene configuration at one sweep point.
    pub fn apply(&self, base: &SceneConfig, value: f64) -> Result<SceneConfig, HarnessError> {
        let bad = |why: &str| HarnessError::Invalid(format!("{} value {value}: {why}", self.name()));
        if !value.is_finite() {
            return Err(bad("not finite"));
        }
        let mut cfg = base.clone();
        match self {
            Sweep::Cj | Sweep::Cs if value <= 0.0 => return Err(bad("price must be positive")),
            Sweep::Cj => cfg.c_j = value,
            Sweep::Cs => cfg.c_s = value,
            Sweep::N => {
                if value < 0.0 || value.fract() != 0.0 || value > 4096.0 {
                    return Err(bad("element count must be an integer in [0, 4096]"));
                }
                cfg.n = value as usize;
            }
            Sweep::Xj => {
                if value < ARENA_X.0 || value > ARENA_X.1 {
                    return Err(bad("jammer outside the arena"));
                }
                cfg.pos_j = [value, JAMMER_Y];
            }
        }
        cfg.validate().map_err(|e| bad(&e.to_string()))?;
        Ok(cfg)
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sweep {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Sweep::ALL
            .into_iter()
            .find(|w| w.name() == s.trim())
            .ok_or_else(|| HarnessError::Invalid(format!("unknown sweep '{s}' (expected cj, cs, n or xj)")))
    }
}

/// Parses a comma-separated list of finite numbers.
pub fn parse_values(s: &str) -> Result<Vec<f64>, HarnessError> {
    let out: Vec<f64> = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| HarnessError::Invalid(format!("bad sweep value '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(HarnessError::Invalid("empty value list".into()));
    }
    Ok(out)
}

/// Parses a comma-separated scheme list; duplicates are rejected.
pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>, HarnessError> {
    let mut out = Vec::new();
    for t in s.split(',') {
        let sc: Scheme = t.parse().map_err(HarnessError::Invalid)?;
        if out.contains(&sc) {
            return Err(HarnessError::Invalid(format!("scheme '{sc}' listed twice")));
        }
        out.push(sc);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub sweep: Sweep,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub base: SceneConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub solver: BsumOptions,
}

impl ExperimentSpec {
    pub fn new(sweep: Sweep) -> Self {
        Self {
            sweep,
            values: sweep.default_values(),
            schemes: Scheme::ALL.to_vec(),
            trials: 20,
            base: SceneConfig::default(),
            seed: 0,
            out: None,
            solver: BsumOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.values.is_empty() {
            return Err(HarnessError::Invalid("no sweep values".into()));
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::Invalid("no schemes".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be at least 1".into()));
        }
        self.base.validate().map_err(|e| HarnessError::Invalid(e.to_string()))?;
        for v in &self.values {
            self.sweep.apply(&self.base, *v)?;
        }
        Ok(())
    }

    /// Scene seed of a trial; shared by every sweep point and scheme.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(trial as u64))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// JSON form of an experiment; the scene part uses the scene file format.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub sweep: Option<Sweep>,
    pub values: Option<Vec<f64>>,
    pub schemes: Option<Vec<String>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub scene: Option<serde_json::Value>,
}

impl ExperimentFile {
    pub fn from_json_str(s: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Applies the file on top of `spec`.
    pub fn apply_to(&self, spec: &mut ExperimentSpec) -> Result<(), HarnessError> {
        if let Some(sw) = self.sweep {
            spec.sweep = sw;
            spec.values = sw.default_values();
        }
        if let Some(v) = &self.values {
            spec.values = v.clone();
        }
        if let Some(s) = &self.schemes {
            spec.schemes = parse_schemes(&s.join(","))?;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(o) = &self.out {
            spec.out = Some(o.clone());
        }
        if let Some(scene) = &self.scene {
            spec.base = SceneConfig::from_json_str(&scene.to_string()).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        }
        Ok(())
    }
}

/// One CSV row. Data rows carry the trial's scene seed, summary rows `mean`.
/// Failed solves have NaN in every model column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep: String,
    pub value: f64,
    pub scheme: String,
    pub trial: String,
    #[serde(rename = "u_L")]
    pub u_l: f64,
    #[serde(rename = "u_J")]
    pub u_j: f64,
    #[serde(rename = "u_L_worst")]
    pub u_l_worst: f64,
    #[serde(rename = "P_S")]
    pub p_s: f64,
    #[serde(rename = "P_J")]
    pub p_j: f64,
    pub gamma_sinr: f64,
    pub iters: f64,
    pub ms: f64,
}

impl ResultRow {
    pub fn is_mean(&self) -> bool {
        self.trial == "mean"
    }

    pub fn is_failure(&self) -> bool {
        self.u_l.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<String>,
}

impl ExperimentOutput {
    pub fn means(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_mean())
    }

    /// Mean row at `(value, scheme)`.
    pub fn mean(&self, value: f64, scheme: Scheme) -> Option<&ResultRow> {
        self.means().find(|r| r.value == value && r.scheme == scheme.name())
    }
}

/// Runs every (point, trial) pair on the worker pool; each pair draws one scene
/// and solves all schemes on it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, HarnessError> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..spec.values.len()).flat_map(|p| (0..spec.trials).map(move |t| (p, t))).collect();
    let mut results: Vec<(usize, usize, Vec<(ResultRow, Option<String>)>)> = jobs
        .par_iter()
        .map(|&(p, t)| (p, t, run_point(spec, spec.values[p], t)))
        .collect();
    results.sort_by_key(|r| (r.0, r.1));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (p, value) in spec.values.iter().enumerate() {
        for (si, scheme) in spec.schemes.iter().enumerate() {
            let group: Vec<&ResultRow> = results
                .iter()
                .filter(|r| r.0 == p)
                .map(|r| &r.2[si].0)
                .collect();
            for r in results.iter().filter(|r| r.0 == p) {
                if let Some(f) = &r.2[si].1 {
                    failures.push(f.clone());
                }
            }
            rows.extend(group.iter().map(|r| (*r).clone()));
            rows.push(mean_row(spec.sweep, *value, *scheme, &group));
        }
    }
    let out = ExperimentOutput { rows, failures };
    if let Some(path) = &spec.out {
        write_csv(path, &out.rows)?;
    }
    Ok(out)
}

fn run_point(spec: &ExperimentSpec, value: f64, trial: usize) -> Vec<(ResultRow, Option<String>)> {
    let seed = spec.trial_seed(trial);
    let blank = |scheme: Scheme, ms: f64| ResultRow {
        sweep: spec.sweep.name().into(),
        value,
        scheme: scheme.name().into(),
        trial: seed.to_string(),
        u_l: f64::NAN,
        u_j: f64::NAN,
        u_l_worst: f64::NAN,
        p_s: f64::NAN,
        p_j: f64::NAN,
        gamma_sinr: f64::NAN,
        iters: f64::NAN,
        ms,
    };
    let cfg = match spec.sweep.apply(&spec.base, value) {
        Ok(c) => SceneConfig { seed, ..c },
        Err(e) => return spec.schemes.iter().map(|s| (blank(*s, 0.0), Some(e.to_string()))).collect(),
    };
    let ch = match draw_scene(&cfg) {
        Ok(ch) => ch,
        Err(e) => {
            let msg = format!("{}={value} trial {seed}: {e}", spec.sweep);
            return spec.schemes.iter().map(|s| (blank(*s, 0.0), Some(msg.clone()))).collect();
        }
    };
    spec.schemes
        .iter()
        .map(|&scheme| {
            let t = Instant::now();
            let res = run_scheme(&ch, &cfg, scheme, &spec.solver);
            let ms = t.elapsed().as_secs_f64() * 1e3;
            match res {
                Ok((sol, eq)) => (
                    ResultRow {
                        u_l: eq.u_l,
                        u_j: eq.u_j,
                        u_l_worst: eq.u_l_worst,
                        p_s: eq.leader.p_s,
                        p_j: eq.jammer.p_j,
                        gamma_sinr: eq.sinr,
                        iters: sol.report.outer_iterations as f64,
                        ..blank(scheme, ms)
                    },
                    None,
                ),
                Err(e) => (blank(scheme, ms), Some(format!("{}={value} {scheme} trial {seed}: {e}", spec.sweep))),
            }
        })
        .collect()
}

fn mean_row(sweep: Sweep, value: f64, scheme: Scheme, group: &[&ResultRow]) -> ResultRow {
    let ok: Vec<&&ResultRow> = group.iter().filter(|r| !r.is_failure()).collect();
    let avg = |f: fn(&ResultRow) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
        }
    };
    ResultRow {
        sweep: sweep.name().into(),
        value,
        scheme: scheme.name().into(),
        trial: "mean".into(),
        u_l: avg(|r| r.u_l),
        u_j: avg(|r| r.u_j),
        u_l_worst: avg(|r| r.u_l_worst),
        p_s: avg(|r| r.p_s),
        p_j: avg(|r| r.p_j),
        gamma_sinr: avg(|r| r.gamma_sinr),
        iters: avg(|r| r.iters),
        ms: avg(|r| r.ms),
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    if rows.is_empty() {
        wr.write_record(CSV_HEADER.split(','))?;
    }
    wr.flush().map_err(|e| HarnessError::Io { path: PathBuf::from("<writer>"), source: e })?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let io = |e| HarnessError::Io { path: path.to_path_buf(), source: e };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let f = std::fs::File::create(path).map_err(io)?;
    write_rows(std::io::BufWriter::new(f), rows)
}

/// Reads rows back; the header must match [`CSV_HEADER`] exactly.
pub fn read_rows<R: Read>(r: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rd = csv::ReaderBuilder::new().from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Invalid(format!("unexpected CSV header '{}'", header.join(","))));
    }
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let f = std::fs::File::open(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })?;
    read_rows(std::io::BufReader::new(f))
}
