//! Batch front end.
//!
//! A run is described by flat `section.key = value` lines (`#` starts a
//! comment) and/or command-line overrides. Recognized keys:
//!
//! | key | values |
//! |---|---|
//! | `task.name` | `solve`, `scan-h`, `scan-n`, `observables`, `wavefunction`, `compare`, `table` |
//! | `task.table` | `1`, `2` or `3` (also accepted as `table 3` / `table:3` in `task.name`) |
//! | `kinetics.type` | `dimensionless` (default), `nonrelativistic`, `salpeter` |
//! | `kinetics.m1`, `kinetics.m2` | masses, default 1 |
//! | `potential.type` | `gaussian`, `yukawa` |
//! | `potential.a`, `potential.b` | strength and range parameter |
//! | `potential.g` | dimensionless coupling: shorthand for `a = g`, `b = 1` |
//! | `problem.l` | orbital angular momentum, default 0 |
//! | `mesh.n`, `mesh.h` | momentum mesh size and scale |
//! | `mesh.n_conf`, `mesh.h_conf` | configuration mesh for `compare` (size defaults to `mesh.n`) |
//! | `scan.h`, `scan.n` | grids: `start:stop:step` or a comma list |
//! | `scan.states` | number of lowest eigenvalues reported per scan point, default 1 |
//! | `wavefunction.space` | `momentum`, `position` or `both` (default) |
//! | `wavefunction.grid` | `mesh` (scaled mesh nodes) or a grid as above |
//! | `wavefunction.state` | radial excitation, default 0 |
//! | `output.path` | CSV destination, default `<task>.csv` |
//!
//! Flags `--N`, `--h`, `--l`, `--g`, `--potential`, `--kinetics`, `--task`
//! and `--out` override the matching keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use rayon::prelude::*;

use crate::config_oracle::{config_observables, solve_config, ConfigProblem};
use crate::error::{Error, Result};
use crate::kinetics::Kinetics;
use crate::observables::{reduced_wavefunction_momentum, reduced_wavefunction_position};
use crate::potentials::Potential;
use crate::solver::{assemble_hamiltonian, solve, solve_spectrum, BoundState, Problem};
use crate::tables::{report, table};

const MODULE: &str = "cli";

const KEYS: [&str; 21] = [
    "task.name",
    "task.table",
    "kinetics.type",
    "kinetics.m1",
    "kinetics.m2",
    "potential.type",
    "potential.a",
    "potential.b",
    "potential.g",
    "problem.l",
    "mesh.n",
    "mesh.h",
    "mesh.n_conf",
    "mesh.h_conf",
    "scan.h",
    "scan.n",
    "scan.states",
    "wavefunction.space",
    "wavefunction.grid",
    "wavefunction.state",
    "output.path",
];

#[derive(Debug, Parser)]
#[command(
    name = "lagmesh",
    version,
    about = "Momentum-space Lagrange-mesh bound states: solves, scans, observables and tables as CSV"
)]
pub struct Cli {
    /// Configuration file (`section.key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// solve | scan-h | scan-n | observables | wavefunction | compare | table {1|2|3}
    #[arg(long)]
    pub task: Option<String>,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Mesh size.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Mesh scale.
    #[arg(long = "h")]
    pub h: Option<f64>,
    /// Orbital angular momentum.
    #[arg(long = "l")]
    pub l: Option<usize>,
    /// Dimensionless coupling (sets a = g, b = 1).
    #[arg(long = "g")]
    pub g: Option<f64>,
    /// gaussian | yukawa
    #[arg(long)]
    pub potential: Option<String>,
    /// dimensionless | nonrelativistic | salpeter
    #[arg(long)]
    pub kinetics: Option<String>,
    /// Table number after `--task table`.
    #[arg(value_name = "TABLE")]
    pub table: Option<u8>,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    /// Source line in the config file; `None` for command-line overrides.
    line: Option<usize>,
}

/// Parsed key-value pairs, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct ConfigEntries {
    map: BTreeMap<String, Entry>,
}

impl ConfigEntries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                Error::config(
                    MODULE,
                    format!("config line {line}: expected `section.key = value`"),
                )
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::config(
                    MODULE,
                    format!("config line {line}: unknown key `{key}`"),
                ));
            }
            if value.is_empty() {
                return Err(Error::config(
                    MODULE,
                    format!("config line {line}: empty value for `{key}`"),
                ));
            }
            if map
                .insert(
                    key.clone(),
                    Entry {
                        value,
                        line: Some(line),
                    },
                )
                .is_some()
            {
                return Err(Error::config(
                    MODULE,
                    format!("config line {line}: duplicate key `{key}`"),
                ));
            }
        }
        Ok(Self { map })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.map.insert(
            key.to_string(),
            Entry {
                value: value.into(),
                line: None,
            },
        );
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn site(&self, key: &str) -> String {
        match self.map.get(key).and_then(|e| e.line) {
            Some(line) => format!("`{key}` (config line {line})"),
            None => format!("`{key}`"),
        }
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::config(MODULE, format!("{}: cannot parse `{v}`", self.site(key)))
            }),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        let v = self.parse_value::<f64>(key)?;
        if let Some(x) = v {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::config(
                    MODULE,
                    format!("{}: must be positive, got {x}", self.site(key)),
                ));
            }
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KineticsSpec {
    Dimensionless,
    Nonrelativistic { m1: f64, m2: f64 },
    Salpeter { m1: f64, m2: f64 },
}

impl KineticsSpec {
    pub fn build(&self) -> Result<Kinetics> {
        match *self {
            KineticsSpec::Dimensionless => Ok(Kinetics::dimensionless()),
            KineticsSpec::Nonrelativistic { m1, m2 } => Kinetics::nonrelativistic(m1, m2),
            KineticsSpec::Salpeter { m1, m2 } => Kinetics::salpeter(m1, m2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Gaussian { a: f64, b: f64 },
    Yukawa { a: f64, b: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match *self {
            PotentialSpec::Gaussian { a, b } => Potential::gaussian(a, b),
            PotentialSpec::Yukawa { a, b } => Potential::yukawa(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Solve,
    ScanH,
    ScanN,
    Observables,
    Wavefunction,
    Compare,
    Table(u8),
}

impl Task {
    fn name(&self) -> String {
        match self {
            Task::Solve => "solve".into(),
            Task::ScanH => "scan-h".into(),
            Task::ScanN => "scan-n".into(),
            Task::Observables => "observables".into(),
            Task::Wavefunction => "wavefunction".into(),
            Task::Compare => "compare".into(),
            Task::Table(k) => format!("table{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavefunctionSpace {
    Momentum,
    Position,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    /// The scaled nodes `h x_i` of the momentum mesh.
    MeshNodes,
    Points(Vec<f64>),
}

/// A fully interpreted run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub kinetics: KineticsSpec,
    pub potential: Option<PotentialSpec>,
    pub l: usize,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub n_conf: Option<usize>,
    pub h_conf: Option<f64>,
    pub scan_h: Option<Vec<f64>>,
    pub scan_n: Option<Vec<usize>>,
    pub scan_states: usize,
    pub wavefunction_space: WavefunctionSpace,
    pub wavefunction_grid: Option<SampleGrid>,
    pub wavefunction_state: usize,
    pub out: Option<PathBuf>,
}

fn parse_task(name: &str, table: Option<u8>) -> Result<Task> {
    let name = name.trim().to_ascii_lowercase();
    let task = match name.as_str() {
        "solve" => Task::Solve,
        "scan-h" => Task::ScanH,
        "scan-n" => Task::ScanN,
        "observables" => Task::Observables,
        "wavefunction" => Task::Wavefunction,
        "compare" => Task::Compare,
        _ if name.starts_with("table") => {
            let rest = name["table".len()..].trim_start_matches([' ', ':', '=']).trim();
            let which = if rest.is_empty() {
                table.ok_or_else(|| Error::config(MODULE, "task `table` needs a table number (1, 2 or 3)"))?
            } else {
                rest.parse::<u8>()
                    .map_err(|_| Error::config(MODULE, format!("`{name}`: table number must be 1, 2 or 3")))?
            };
            if !(1..=3).contains(&which) {
                return Err(Error::config(MODULE, format!("no table {which}; expected 1, 2 or 3")));
            }
            Task::Table(which)
        }
        other => {
            return Err(Error::config(
                MODULE,
                format!("unknown task `{other}`; expected solve, scan-h, scan-n, observables, wavefunction, compare or table"),
            ))
        }
    };
    if table.is_some() && !matches!(task, Task::Table(_)) {
        return Err(Error::config(
            MODULE,
            format!("a table number only applies to task `table`, not `{name}`"),
        ));
    }
    Ok(task)
}

/// `start:stop:step` (stop included when reached within rounding) or a
/// comma-separated list. Must be nonempty and strictly increasing.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("range `{text}` must be start:stop:step"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("cannot parse `{s}`"));
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(format!("range `{text}` needs start <= stop and step > 0"));
        }
        let count = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                // snap to 12 significant digits so 0.8:1.2:0.1 ends at 1.2
                let v = start + k as f64 * step;
                format!("{v:.11e}").parse().unwrap_or(v)
            })
            .collect()
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("cannot parse `{}`", s.trim()))
            })
            .collect::<std::result::Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(format!("grid `{text}` is not strictly increasing"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("grid `{text}` has non-finite values"));
    }
    Ok(values)
}

impl RunConfig {
    pub fn from_entries(e: &ConfigEntries) -> Result<Self> {
        let table = e.parse_value::<u8>("task.table")?;
        let task = parse_task(e.get("task.name").unwrap_or("solve"), table)?;

        let m1 = e.positive("kinetics.m1")?;
        let m2 = e.positive("kinetics.m2")?;
        let kinetics = match e
            .get("kinetics.type")
            .map(|s| s.to_ascii_lowercase())
            .as_deref()
        {
            None | Some("dimensionless") => {
                if m1.is_some() || m2.is_some() {
                    return Err(Error::config(
                        MODULE,
                        format!(
                            "{}: masses need kinetics.type = nonrelativistic or salpeter",
                            e.site("kinetics.m1")
                        ),
                    ));
                }
                KineticsSpec::Dimensionless
            }
            Some("nonrelativistic") => KineticsSpec::Nonrelativistic {
                m1: m1.unwrap_or(1.0),
                m2: m2.unwrap_or(1.0),
            },
            Some("salpeter") => KineticsSpec::Salpeter {
                m1: m1.unwrap_or(1.0),
                m2: m2.unwrap_or(1.0),
            },
            Some(other) => {
                return Err(Error::config(
                    MODULE,
                    format!("{}: unknown kinetics `{other}`", e.site("kinetics.type")),
                ))
            }
        };

        let g = e.positive("potential.g")?;
        let a = e.positive("potential.a")?;
        let b = e.positive("potential.b")?;
        let potential = match e.get("potential.type").map(|s| s.to_ascii_lowercase()) {
            None => {
                if g.is_some() || a.is_some() || b.is_some() {
                    return Err(Error::config(
                        MODULE,
                        "potential parameters given without potential.type",
                    ));
                }
                None
            }
            Some(kind) => {
                let (a, b) = match (g, a, b) {
                    (Some(g), None, None) => (g, 1.0),
                    (Some(_), _, _) => {
                        return Err(Error::config(
                            MODULE,
                            format!(
                                "{}: give either the coupling g or a and b, not both",
                                e.site("potential.g")
                            ),
                        ))
                    }
                    (None, Some(a), Some(b)) => (a, b),
                    (None, _, _) => {
                        return Err(Error::config(
                            MODULE,
                            "potential needs potential.g, or both potential.a and potential.b",
                        ))
                    }
                };
                Some(match kind.as_str() {
                    "gaussian" => PotentialSpec::Gaussian { a, b },
                    "yukawa" => PotentialSpec::Yukawa { a, b },
                    other => {
                        return Err(Error::config(
                            MODULE,
                            format!("{}: unknown potential `{other}`", e.site("potential.type")),
                        ))
                    }
                })
            }
        };

        let grid = |key: &str| -> Result<Option<Vec<f64>>> {
            match e.get(key) {
                None => Ok(None),
                Some(text) => parse_grid(text)
                    .map(Some)
                    .map_err(|msg| Error::config(MODULE, format!("{}: {msg}", e.site(key)))),
            }
        };
        let scan_h = grid("scan.h")?;
        if let Some(hs) = &scan_h {
            if hs[0] <= 0.0 {
                return Err(Error::config(
                    MODULE,
                    format!("{}: scales must be positive", e.site("scan.h")),
                ));
            }
        }
        let scan_n = match grid("scan.n")? {
            None => None,
            Some(ns) => {
                if ns.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                    return Err(Error::config(
                        MODULE,
                        format!("{}: mesh sizes must be positive integers", e.site("scan.n")),
                    ));
                }
                Some(ns.iter().map(|v| *v as usize).collect())
            }
        };

        let wavefunction_space = match e
            .get("wavefunction.space")
            .map(|s| s.to_ascii_lowercase())
            .as_deref()
        {
            None | Some("both") => WavefunctionSpace::Both,
            Some("momentum") => WavefunctionSpace::Momentum,
            Some("position") => WavefunctionSpace::Position,
            Some(other) => {
                return Err(Error::config(
                    MODULE,
                    format!(
                        "{}: expected momentum, position or both, got `{other}`",
                        e.site("wavefunction.space")
                    ),
                ))
            }
        };
        let wavefunction_grid = match e.get("wavefunction.grid") {
            None => None,
            Some(t) if t.eq_ignore_ascii_case("mesh") => Some(SampleGrid::MeshNodes),
            Some(t) => {
                let pts = parse_grid(t).map_err(|msg| {
                    Error::config(MODULE, format!("{}: {msg}", e.site("wavefunction.grid")))
                })?;
                if pts[0] < 0.0 {
                    return Err(Error::config(
                        MODULE,
                        format!(
                            "{}: sample points must be nonnegative",
                            e.site("wavefunction.grid")
                        ),
                    ));
                }
                Some(SampleGrid::Points(pts))
            }
        };

        let n = e.parse_value::<usize>("mesh.n")?;
        let n_conf = e.parse_value::<usize>("mesh.n_conf")?;
        for (key, v) in [("mesh.n", n), ("mesh.n_conf", n_conf)] {
            if v == Some(0) {
                return Err(Error::config(
                    MODULE,
                    format!("{}: mesh size must be at least 1", e.site(key)),
                ));
            }
        }
        let scan_states = e.parse_value::<usize>("scan.states")?.unwrap_or(1);
        if scan_states == 0 {
            return Err(Error::config(
                MODULE,
                format!("{}: must be at least 1", e.site("scan.states")),
            ));
        }

        Ok(Self {
            task,
            kinetics,
            potential,
            l: e.parse_value("problem.l")?.unwrap_or(0),
            n,
            h: e.positive("mesh.h")?,
            n_conf,
            h_conf: e.positive("mesh.h_conf")?,
            scan_h,
            scan_n,
            scan_states,
            wavefunction_space,
            wavefunction_grid,
            wavefunction_state: e.parse_value("wavefunction.state")?.unwrap_or(0),
            out: e.get("output.path").map(PathBuf::from),
        })
    }

    /// Config file (if any) with command-line overrides applied.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut entries = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|err| {
                    Error::config(
                        MODULE,
                        format!("cannot read config `{}`: {err}", path.display()),
                    )
                })?;
                ConfigEntries::parse(&text)?
            }
            None => ConfigEntries::default(),
        };
        if let Some(t) = &cli.task {
            entries.set("task.name", t);
        }
        if let Some(t) = cli.table {
            entries.set("task.table", t.to_string());
        }
        if let Some(p) = &cli.out {
            entries.set("output.path", p.to_string_lossy());
        }
        if let Some(n) = cli.n {
            entries.set("mesh.n", n.to_string());
        }
        if let Some(h) = cli.h {
            entries.set("mesh.h", format!("{h:e}"));
        }
        if let Some(l) = cli.l {
            entries.set("problem.l", l.to_string());
        }
        if let Some(g) = cli.g {
            entries.set("potential.g", format!("{g:e}"));
        }
        if let Some(p) = &cli.potential {
            entries.set("potential.type", p);
        }
        if let Some(k) = &cli.kinetics {
            entries.set("kinetics.type", k);
        }
        Self::from_entries(&entries)
    }

    /// Canonical `key = value` rendering of this run.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "task.name = {}", self.task.name());
        match self.kinetics {
            KineticsSpec::Dimensionless => {
                let _ = writeln!(s, "kinetics.type = dimensionless");
            }
            KineticsSpec::Nonrelativistic { m1, m2 } | KineticsSpec::Salpeter { m1, m2 } => {
                let kind = if matches!(self.kinetics, KineticsSpec::Salpeter { .. }) {
                    "salpeter"
                } else {
                    "nonrelativistic"
                };
                let _ = writeln!(
                    s,
                    "kinetics.type = {kind}\nkinetics.m1 = {m1}\nkinetics.m2 = {m2}"
                );
            }
        }
        if let Some(p) = self.potential {
            let (kind, a, b) = match p {
                PotentialSpec::Gaussian { a, b } => ("gaussian", a, b),
                PotentialSpec::Yukawa { a, b } => ("yukawa", a, b),
            };
            let _ = writeln!(
                s,
                "potential.type = {kind}\npotential.a = {a}\npotential.b = {b}"
            );
        }
        let _ = writeln!(s, "problem.l = {}", self.l);
        let opt = |s: &mut String, key: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{key} = {v}");
            }
        };
        opt(&mut s, "mesh.n", self.n.map(|v| v.to_string()));
        opt(&mut s, "mesh.h", self.h.map(|v| v.to_string()));
        opt(&mut s, "mesh.n_conf", self.n_conf.map(|v| v.to_string()));
        opt(&mut s, "mesh.h_conf", self.h_conf.map(|v| v.to_string()));
        let join = |v: &[String]| v.join(", ");
        opt(
            &mut s,
            "scan.h",
            self.scan_h
                .as_ref()
                .map(|g| join(&g.iter().map(|x| x.to_string()).collect::<Vec<_>>())),
        );
        opt(
            &mut s,
            "scan.n",
            self.scan_n
                .as_ref()
                .map(|g| join(&g.iter().map(|x| x.to_string()).collect::<Vec<_>>())),
        );
        let _ = writeln!(s, "scan.states = {}", self.scan_states);
        let _ = writeln!(s, "output.path = {}", self.output_path().display());
        s
    }

    pub fn output_path(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", self.task.name())))
    }

    fn require_potential(&self) -> Result<Potential> {
        self.potential
            .ok_or_else(|| {
                Error::config(
                    MODULE,
                    format!("task {} needs potential.type", self.task.name()),
                )
            })?
            .build()
    }

    fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| {
            Error::config(
                MODULE,
                format!("task {} needs mesh.n (--N)", self.task.name()),
            )
        })
    }

    fn require_h(&self) -> Result<f64> {
        self.h.ok_or_else(|| {
            Error::config(
                MODULE,
                format!("task {} needs mesh.h (--h)", self.task.name()),
            )
        })
    }

    fn problem(&self) -> Result<Problem> {
        Problem::new(
            self.kinetics.build()?,
            self.require_potential()?,
            self.l,
            self.require_n()?,
            self.require_h()?,
        )
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(usize),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Field {
    pub fn render(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(v) => format_float(*v),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
        }
    }
}

/// 17 significant digits, scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Result of a task: CSV table plus a human-readable summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub summary: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
    /// Text written next to the CSV as `<out>.meta` (scans only).
    pub metadata: Option<String>,
}

impl Report {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::config(MODULE, format!("CSV encoding failed: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::render)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::config(MODULE, format!("CSV encoding failed: {e}")))?;
        String::from_utf8(bytes)
            .map_err(|e| Error::config(MODULE, format!("CSV is not UTF-8: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        if let Some(meta) = &self.metadata {
            let mut p = path.as_os_str().to_owned();
            p.push(".meta");
            std::fs::write(PathBuf::from(p), meta)?;
        }
        Ok(())
    }
}

/// One scan point and state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub n: usize,
    pub h: f64,
    pub state: usize,
    pub energy: f64,
    /// Whether the eigenvalue lies in the bound-state window.
    pub bound: bool,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    /// Ordered by `(N, h, state)`.
    pub rows: Vec<ScanRow>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config_echo: String,
}

/// Lowest `states` eigenvalues at every `(N, h)` pair. Points are solved in
/// parallel and collected in grid order.
pub fn scan(config: &RunConfig, ns: &[usize], hs: &[f64]) -> Result<ScanResult> {
    let kinetics = config.kinetics.build()?;
    let potential = config.require_potential()?;
    let (lo, hi) = kinetics.bound_window()?;
    let points: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| hs.iter().map(move |&h| (n, h)))
        .collect();
    let rows: Vec<Vec<ScanRow>> = points
        .par_iter()
        .map(|&(n, h)| {
            let problem = Problem::new(kinetics.clone(), potential.clone(), config.l, n, h)?;
            let spectrum = solve_spectrum(&assemble_hamiltonian(&problem)?)?;
            spectrum
                .values
                .iter()
                .take(config.scan_states)
                .enumerate()
                .map(|(state, &energy)| {
                    if !energy.is_finite() {
                        return Err(Error::numerical(
                            MODULE,
                            format!("scan point N={n}, h={h}, state {state}"),
                            "eigenvalue is not finite",
                        ));
                    }
                    Ok(ScanRow {
                        n,
                        h,
                        state,
                        energy,
                        bound: energy > lo && energy < hi,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(ScanResult {
        rows: rows.into_iter().flatten().collect(),
        timestamp,
        config_echo: config.echo(),
    })
}

fn energy_label(config: &RunConfig) -> &'static str {
    if config.kinetics == KineticsSpec::Dimensionless {
        "epsilon"
    } else {
        "E"
    }
}

fn nth_state(states: Vec<BoundState>, k: usize, site: &str) -> Result<BoundState> {
    let count = states.len();
    states.into_iter().nth(k).ok_or_else(|| {
        Error::numerical(
            MODULE,
            site.to_string(),
            format!("state n={k} requested, {count} bound state(s) found"),
        )
    })
}

fn run_solve(config: &RunConfig) -> Result<Report> {
    let problem = config.problem()?;
    let states = solve(&problem)?;
    let (n, h) = (problem.mesh().len(), problem.mesh().scale());
    let mut summary = format!(
        "{} bound state(s), l = {}, N = {n}, h = {h}\n",
        states.len(),
        config.l
    );
    let rows = states
        .iter()
        .map(|s| {
            let _ = writeln!(
                summary,
                "  n = {}  {} = {:.13}",
                s.n,
                energy_label(config),
                s.energy
            );
            vec![
                Field::Int(s.n),
                Field::Int(s.l),
                Field::Int(n),
                Field::Float(h),
                Field::Float(s.energy),
            ]
        })
        .collect();
    Ok(Report {
        summary,
        header: vec!["n", "l", "N", "h", "energy"],
        rows,
        metadata: None,
    })
}

fn run_scan(config: &RunConfig, over_h: bool) -> Result<Report> {
    let (ns, hs) = if over_h {
        let hs = config
            .scan_h
            .clone()
            .ok_or_else(|| Error::config(MODULE, "task scan-h needs scan.h"))?;
        let ns = match &config.scan_n {
            Some(ns) => ns.clone(),
            None => vec![config.require_n()?],
        };
        (ns, hs)
    } else {
        let ns = config
            .scan_n
            .clone()
            .ok_or_else(|| Error::config(MODULE, "task scan-n needs scan.n"))?;
        let hs = match &config.scan_h {
            Some(hs) => hs.clone(),
            None => vec![config.require_h()?],
        };
        (ns, hs)
    };
    let result = scan(config, &ns, &hs)?;
    let mut summary = format!(
        "{} over {} point(s), lowest {} eigenvalue(s) per point\n",
        config.task.name(),
        ns.len() * hs.len(),
        config.scan_states
    );
    for r in result.rows.iter().filter(|r| r.state == 0) {
        let _ = writeln!(
            summary,
            "  N = {:4}  h = {:<10}  {} = {:.13}",
            r.n,
            r.h,
            energy_label(config),
            r.energy
        );
    }
    let rows = result
        .rows
        .iter()
        .map(|r| {
            vec![
                Field::Int(r.n),
                Field::Float(r.h),
                Field::Int(r.state),
                Field::Float(r.energy),
                Field::Bool(r.bound),
            ]
        })
        .collect();
    Ok(Report {
        summary,
        header: vec!["N", "h", "state", "energy", "bound"],
        rows,
        metadata: Some(format!(
            "timestamp = {}\n{}",
            result.timestamp, result.config_echo
        )),
    })
}

fn run_observables(config: &RunConfig) -> Result<Report> {
    let problem = config.problem()?;
    let states = solve(&problem)?;
    let (n, h) = (problem.mesh().len(), problem.mesh().scale());
    let mut summary = format!("observables, l = {}, N = {n}, h = {h}\n", config.l);
    let mut rows = Vec::new();
    for s in &states {
        let r = report(s, &problem)?;
        let _ = writeln!(
            summary,
            "  n = {}  {} = {:.13}  <p2> = {:.13}  <r> = {:.10}  <V> = {:.13}  <H> = {:.13}",
            s.n,
            energy_label(config),
            r.energy,
            r.mean_p2,
            r.mean_r,
            r.mean_potential,
            r.mean_hamiltonian()
        );
        rows.push(vec![
            Field::Int(s.n),
            Field::Int(s.l),
            Field::Int(n),
            Field::Float(h),
            Field::Float(r.energy),
            Field::Float(r.mean_p2),
            Field::Float(r.mean_p4),
            Field::Float(r.mean_r),
            Field::Float(r.mean_potential),
            Field::Float(r.mean_kinetic),
            Field::Float(r.mean_hamiltonian()),
            Field::Float((r.energy - r.mean_hamiltonian()).abs()),
        ]);
    }
    Ok(Report {
        summary,
        header: vec![
            "n",
            "l",
            "N",
            "h",
            "energy",
            "mean_p2",
            "mean_p4",
            "mean_r",
            "mean_potential",
            "mean_kinetic",
            "mean_hamiltonian",
            "consistency_residual",
        ],
        rows,
        metadata: None,
    })
}

fn run_wavefunction(config: &RunConfig) -> Result<Report> {
    let problem = config.problem()?;
    let k = config.wavefunction_state;
    let state = nth_state(solve(&problem)?, k, "wavefunction export")?;
    let grid: Vec<f64> = match config
        .wavefunction_grid
        .as_ref()
        .ok_or_else(|| Error::config(MODULE, "task wavefunction needs wavefunction.grid"))?
    {
        SampleGrid::MeshNodes => problem.mesh().scaled_nodes().collect(),
        SampleGrid::Points(p) => p.clone(),
    };
    let (header, rows): (Vec<&'static str>, Vec<Vec<Field>>) = match config.wavefunction_space {
        WavefunctionSpace::Momentum => (
            vec!["q", "u_q"],
            grid.iter()
                .map(|&q| {
                    vec![
                        Field::Float(q),
                        Field::Float(reduced_wavefunction_momentum(&state, q)),
                    ]
                })
                .collect(),
        ),
        WavefunctionSpace::Position => (
            vec!["r", "u_r"],
            grid.iter()
                .map(|&r| {
                    vec![
                        Field::Float(r),
                        Field::Float(reduced_wavefunction_position(&state, r)),
                    ]
                })
                .collect(),
        ),
        WavefunctionSpace::Both => (
            vec!["x", "u_q", "u_r"],
            grid.iter()
                .map(|&x| {
                    vec![
                        Field::Float(x),
                        Field::Float(reduced_wavefunction_momentum(&state, x)),
                        Field::Float(reduced_wavefunction_position(&state, x)),
                    ]
                })
                .collect(),
        ),
    };
    let summary = format!(
        "wavefunction of state n = {k}, l = {} ({} = {:.13}) at {} point(s)\n",
        config.l,
        energy_label(config),
        state.energy,
        grid.len()
    );
    Ok(Report {
        summary,
        header,
        rows,
        metadata: None,
    })
}

fn run_compare(config: &RunConfig) -> Result<Report> {
    let kinetics = config.kinetics.build()?;
    let mu = kinetics.reduced_mass().ok_or_else(|| {
        Error::unsupported(
            MODULE,
            "compare needs nonrelativistic kinetics: the configuration-space oracle has no Salpeter solver",
        )
    })?;
    let h_conf = config
        .h_conf
        .ok_or_else(|| Error::config(MODULE, "task compare needs mesh.h_conf"))?;
    let problem = config.problem()?;
    let n_conf = config.n_conf.unwrap_or(problem.mesh().len());
    let conf = ConfigProblem::new(problem.potential.clone(), config.l, mu, n_conf, h_conf)?;
    let mom_states = solve(&problem)?;
    let conf_states = solve_config(&conf)?.states;
    let count = mom_states.len().min(conf_states.len());
    let mut summary = format!(
        "momentum (N = {}, h = {}) vs configuration (N = {n_conf}, h_r = {h_conf}): {} / {} bound state(s)\n",
        problem.mesh().len(),
        problem.mesh().scale(),
        mom_states.len(),
        conf_states.len()
    );
    let mut rows = Vec::new();
    for (m, c) in mom_states.iter().zip(&conf_states).take(count) {
        let r = report(m, &problem)?;
        let co = config_observables(c, &conf)?;
        let pairs = [
            ("energy", r.energy, c.energy),
            ("mean_p2", r.mean_p2, co.mean_p2),
            ("mean_r", r.mean_r, co.mean_r),
            ("mean_potential", r.mean_potential, co.mean_potential),
            (
                "mean_hamiltonian",
                r.mean_hamiltonian(),
                co.mean_hamiltonian(mu),
            ),
        ];
        for (name, a, b) in pairs {
            let delta = (a - b).abs();
            let rel = if b != 0.0 { delta / b.abs() } else { delta };
            let _ = writeln!(
                summary,
                "  n = {}  {name:<17} {a:>22.15} {b:>22.15}  |d| = {delta:.2e}  rel = {rel:.2e}",
                m.n
            );
            rows.push(vec![
                Field::Int(m.n),
                Field::Text(name.to_string()),
                Field::Float(a),
                Field::Float(b),
                Field::Float(delta),
                Field::Float(rel),
            ]);
        }
    }
    Ok(Report {
        summary,
        header: vec![
            "n",
            "quantity",
            "momentum",
            "configuration",
            "abs_delta",
            "rel_delta",
        ],
        rows,
        metadata: None,
    })
}

fn run_table(which: u8) -> Result<Report> {
    let cells = table(which)?;
    let mut summary = format!("table {which}\n");
    for c in &cells {
        let _ = writeln!(
            summary,
            "  {:<12} {:<14} {:.15}",
            c.column, c.quantity, c.value
        );
    }
    let rows = cells
        .into_iter()
        .map(|c| {
            vec![
                Field::Text(c.quantity.to_string()),
                Field::Text(c.column),
                Field::Float(c.value),
            ]
        })
        .collect();
    Ok(Report {
        summary,
        header: vec!["quantity", "column", "value"],
        rows,
        metadata: None,
    })
}

/// Execute `config` without touching the filesystem.
pub fn run(config: &RunConfig) -> Result<Report> {
    match config.task {
        Task::Solve => run_solve(config),
        Task::ScanH => run_scan(config, true),
        Task::ScanN => run_scan(config, false),
        Task::Observables => run_observables(config),
        Task::Wavefunction => run_wavefunction(config),
        Task::Compare => run_compare(config),
        Task::Table(k) => run_table(k),
    }
}

/// Parse, run, write the CSV and print the summary. Returns the process exit
/// status: 0 on success, 1 for configuration errors, 2 for numerical failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let outcome = RunConfig::from_cli(&cli).and_then(|config| {
        let report = run(&config)?;
        let path = config.output_path();
        report.write(&path)?;
        Ok((report, path))
    });
    match outcome {
        Ok((report, path)) => {
            // a closed pipe (e.g. `| head`) is not a failure of the run
            let mut out = std::io::stdout().lock();
            let _ = write!(out, "{}", report.summary);
            let _ = writeln!(
                out,
                "wrote {} row(s) to {}",
                report.rows.len(),
                path.display()
            );
            0
        }
        Err(err) => {
            eprintln!("lagmesh: {err}");
            err.exit_code()
        }
    }
}
