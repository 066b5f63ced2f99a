//! Reflection benchmark: sweeps over `(l_max, l_jump)` and profile dumps.
//!
//! For every configuration three simulations run to the final time on the
//! same time step `2^-l_max / λ`: the uniform finest mesh (reference), the
//! uniform coarsest mesh at `l_min = l_max - l_jump`, and the mesh that is
//! fine left of the interface and coarse right of it. Independent runs are
//! executed in parallel; rows come out ordered by `(l_jump, l_max)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{gaussian_u0, WaveProblem};
use crate::mesh::{cell_center, LeafField, MeshConfig, MultiLevelGrid};
use crate::metrics::{Comparison, ErrorReport};
use crate::scheme::SchemeSpec;
use crate::solver::FieldState;

pub const CSV_HEADER: &str = "l_max,l_jump,E_ref,E_coarse,D_coarse,E_jump,D_jump,D_jump_refl,\
rate_E_ref,rate_E_coarse,rate_D_coarse,rate_E_jump,rate_D_jump,rate_D_jump_refl";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lmax_min: u32,
    pub lmax_max: u32,
    pub ljumps: Vec<u32>,
    pub lattice_velocity: f64,
    pub relaxation: f64,
    pub wave_speed: f64,
    pub final_time: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub jump_x: f64,
    pub out_dir: PathBuf,
    pub table_file: String,
    pub snapshot_lmax: u32,
    pub snapshot_ljump: u32,
    pub snapshot_times: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lmax_min: 7,
            lmax_max: 13,
            ljumps: vec![1, 2, 3, 4, 5],
            lattice_velocity: 1.0,
            relaxation: 1.7,
            wave_speed: 0.5,
            final_time: 1.5625,
            x_lo: 0.0,
            x_hi: 3.0,
            jump_x: 2.0,
            out_dir: PathBuf::from("."),
            table_file: "table.csv".into(),
            snapshot_lmax: 10,
            snapshot_ljump: 3,
            snapshot_times: vec![0.0, 1.5625],
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

/// `a..b` or `a..=b`, both inclusive; a single number means `a..a`.
pub fn parse_level_range(value: &str) -> Result<(u32, u32)> {
    let v = value.trim();
    match v.split_once("..") {
        Some((a, b)) => {
            let lo = parse_one("lmax_range", a)?;
            let hi = parse_one("lmax_range", b.trim_start_matches('='))?;
            Ok((lo, hi))
        }
        None => {
            let l = parse_one("lmax_range", v)?;
            Ok((l, l))
        }
    }
}

impl ExperimentConfig {
    /// Parses flat `key = value` text on top of the defaults. `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lmax_range" => (self.lmax_min, self.lmax_max) = parse_level_range(value)?,
            "ljump" => self.ljumps = parse_list(key, value)?,
            "lambda" => self.lattice_velocity = parse_one(key, value)?,
            "p" => self.relaxation = parse_one(key, value)?,
            "c" => self.wave_speed = parse_one(key, value)?,
            "T" => self.final_time = parse_one(key, value)?,
            "x_lo" => self.x_lo = parse_one(key, value)?,
            "x_hi" => self.x_hi = parse_one(key, value)?,
            "jump_x" => self.jump_x = parse_one(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "table_file" => self.table_file = value.to_owned(),
            "snapshot_lmax" => self.snapshot_lmax = parse_one(key, value)?,
            "snapshot_ljump" => self.snapshot_ljump = parse_one(key, value)?,
            "snapshot_times" => self.snapshot_times = parse_list(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn scheme(&self) -> Result<SchemeSpec> {
        SchemeSpec::d1q3_wave(self.wave_speed, self.lattice_velocity, self.relaxation)
    }

    pub fn problem(&self) -> WaveProblem {
        WaveProblem::new(self.wave_speed, self.final_time, gaussian_u0)
    }

    pub fn mesh(&self, l_max: u32, l_jump: u32) -> Result<MeshConfig> {
        let l_min = l_max
            .checked_sub(l_jump)
            .filter(|&l| l >= 1)
            .ok_or_else(|| Error::Config(format!("l_max = {l_max}, l_jump = {l_jump} gives l_min < 1")))?;
        let cfg = MeshConfig {
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            jump_x: self.jump_x,
            l_min,
            l_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lmax_min > self.lmax_max {
            return Err(Error::Config(format!(
                "empty l_max range {}..{}",
                self.lmax_min, self.lmax_max
            )));
        }
        if self.ljumps.is_empty() {
            return Err(Error::Config("no l_jump values".into()));
        }
        if self.final_time.is_nan() || self.final_time < 0.0 {
            return Err(Error::Config(format!("T = {} must be >= 0", self.final_time)));
        }
        self.scheme()?;
        for &j in &self.ljumps {
            for l in self.lmax_min..=self.lmax_max {
                self.mesh(l, j)?;
            }
        }
        Ok(())
    }

    pub fn table_path(&self) -> PathBuf {
        self.out_dir.join(&self.table_file)
    }
}

/// One simulation to the final time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Run {
    /// Uniform mesh at `l_max`.
    Reference { l_max: u32 },
    /// Uniform mesh at `l_min`, time step from `l_max`.
    Coarse { l_max: u32, l_min: u32 },
    /// Fine left of the interface at `l_max`, coarse right at `l_min`.
    Jump { l_max: u32, l_min: u32 },
}

impl ExperimentConfig {
    pub fn grid(&self, run: Run) -> Result<MultiLevelGrid> {
        match run {
            Run::Reference { l_max } => MultiLevelGrid::uniform(&self.mesh(l_max, 0)?, l_max),
            Run::Coarse { l_max, l_min } => MultiLevelGrid::uniform(&self.mesh(l_max, l_max - l_min)?, l_min),
            Run::Jump { l_max, l_min } => MultiLevelGrid::jump(&self.mesh(l_max, l_max - l_min)?),
        }
    }

    /// Initial state: equilibrium of `(u0, 0)`.
    pub fn initial_state(&self, run: Run) -> Result<FieldState> {
        let problem = self.problem();
        FieldState::init_at_equilibrium(self.grid(run)?, self.scheme()?, move |x| vec![problem.u0(x), 0.0])
    }

    pub fn simulate(&self, run: Run) -> Result<FieldState> {
        let mut state = self.initial_state(run)?;
        state.run(self.final_time)?;
        Ok(state)
    }
}

fn runs_for(config: &ExperimentConfig) -> Vec<Run> {
    let mut runs = Vec::new();
    for l_max in config.lmax_min..=config.lmax_max {
        runs.push(Run::Reference { l_max });
        for &j in &config.ljumps {
            let l_min = l_max - j;
            runs.push(Run::Coarse { l_max, l_min });
            runs.push(Run::Jump { l_max, l_min });
        }
    }
    runs.sort();
    runs.dedup();
    runs
}

/// Runs every configuration of the sweep and computes the six quantities
/// with rates against the previous `l_max` of the same `l_jump`.
pub fn run_table(config: &ExperimentConfig) -> Result<Vec<ErrorReport>> {
    config.validate()?;
    let results: BTreeMap<Run, (MultiLevelGrid, LeafField)> = runs_for(config)
        .into_par_iter()
        .map(|run| {
            let state = config.simulate(run)?;
            let u = state.moment_field(0)?;
            Ok((run, (state.grid().clone(), u)))
        })
        .collect::<Result<_>>()?;

    let problem = config.problem();
    let mut rows = Vec::new();
    for &l_jump in &config.ljumps {
        let mut previous: Option<ErrorReport> = None;
        for l_max in config.lmax_min..=config.lmax_max {
            let l_min = l_max - l_jump;
            let cmp = Comparison::new(&problem, config.final_time, config.x_lo, config.x_hi, l_max)?;
            let (ref_grid, ref_u) = &results[&Run::Reference { l_max }];
            let (coarse_grid, coarse_u) = &results[&Run::Coarse { l_max, l_min }];
            let (jump_grid, jump_u) = &results[&Run::Jump { l_max, l_min }];
            let reference = cmp.finest(ref_grid, ref_u)?;
            let mut row = ErrorReport {
                l_max,
                l_jump,
                e_ref: cmp.error_vs_exact(ref_grid, ref_u)?,
                e_coarse: cmp.error_vs_exact(coarse_grid, coarse_u)?,
                d_coarse: cmp.diff_vs_ref(coarse_grid, coarse_u, &reference)?,
                e_jump: cmp.error_vs_exact(jump_grid, jump_u)?,
                d_jump: cmp.diff_vs_ref(jump_grid, jump_u, &reference)?,
                d_jump_refl: cmp.reflected_diff(jump_grid, jump_u, &reference)?,
                rates: [None; 6],
            };
            if let Some(prev) = &previous {
                row.set_rates_from(prev);
            }
            previous = Some(row.clone());
            rows.push(row);
        }
    }
    Ok(rows)
}

fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

/// CSV text with [`CSV_HEADER`]; numbers carry six significant digits and
/// undefined rates are empty fields.
pub fn table_csv(rows: &[ErrorReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.l_max, r.l_jump);
        for v in r.values() {
            let _ = write!(out, ",{}", sci(v));
        }
        for rate in r.rates {
            out.push(',');
            if let Some(rate) = rate {
                out.push_str(&sci(rate));
            }
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// [`run_table`] followed by writing the CSV to [`ExperimentConfig::table_path`].
pub fn run_table_to_file(config: &ExperimentConfig) -> Result<(Vec<ErrorReport>, PathBuf)> {
    let rows = run_table(config)?;
    let path = config.table_path();
    write_file(&path, &table_csv(&rows))?;
    Ok((rows, path))
}

/// `u` on every leaf at one time, left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub time: f64,
    /// `(x_center, u, level)`
    pub points: Vec<(f64, f64, u32)>,
}

fn profile_of(state: &FieldState) -> Result<Profile> {
    Ok(Profile {
        time: state.time(),
        points: state
            .moment_field(0)?
            .iter()
            .map(|(level, k, u)| (cell_center(level, k), u, level))
            .collect(),
    })
}

/// Profiles of `run` at each of `times` (sorted ascending).
pub fn profiles(config: &ExperimentConfig, run: Run, times: &[f64]) -> Result<Vec<Profile>> {
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut state = config.initial_state(run)?;
    let mut out = Vec::with_capacity(sorted.len());
    for t in sorted {
        state.run(t)?;
        out.push(profile_of(&state)?);
    }
    Ok(out)
}

/// Whitespace-separated `x u level` blocks, each under a `# t=<time>` line,
/// separated by blank lines.
pub fn profiles_text(profiles: &[Profile]) -> String {
    let mut out = String::new();
    for (i, p) in profiles.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# t={}", p.time);
        for (x, u, level) in &p.points {
            let _ = writeln!(out, "{x:.17e} {u:.17e} {level}");
        }
    }
    out
}

/// Writes jump-mesh and reference profiles for `(l_max, l_jump)` at `times`;
/// returns the two file paths.
pub fn run_snapshot(
    config: &ExperimentConfig,
    l_max: u32,
    l_jump: u32,
    times: &[f64],
) -> Result<[PathBuf; 2]> {
    let mesh = config.mesh(l_max, l_jump)?;
    let jump = Run::Jump {
        l_max,
        l_min: mesh.l_min,
    };
    let reference = Run::Reference { l_max };
    let (pj, pr) = rayon::join(|| profiles(config, jump, times), || profiles(config, reference, times));
    let jump_path = config.out_dir.join(format!("profile_jump_lmax{l_max}_ljump{l_jump}.dat"));
    let ref_path = config.out_dir.join(format!("profile_ref_lmax{l_max}.dat"));
    write_file(&jump_path, &profiles_text(&pj?))?;
    write_file(&ref_path, &profiles_text(&pr?))?;
    Ok([jump_path, ref_path])
}
