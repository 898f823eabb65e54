//! Configuration files and the `chbs` command line.
//!
//! A run is described by a TOML file with the sections `[mesh]`, `[scheme]`,
//! `[graphs]`, `[init]`, `[forcing]` and `[output]`; unknown keys are
//! rejected. Example:
//!
//! ```toml
//! [mesh]
//! n = 17
//!
//! [scheme]
//! eps = 0.01
//! tau = 1e-3
//! t_end = 0.5
//!
//! [graphs]
//! bulk = "polynomial"
//! boundary = "polynomial"
//!
//! [init]
//! kind = "random"
//! mean = 0.1
//! amplitude = 0.1
//! seed = 42
//!
//! [forcing]
//! kind = "zero"
//!
//! [output]
//! dir = "out"
//! stride = 100
//! ```
//!
//! Relative paths (`init.path`, `forcing.path`, `output.dir`) are resolved
//! against the directory of the configuration file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::domain::DiscreteDomain;
use crate::error::{Error, Result};
use crate::forcing::{Forcing, ForcingTable};
use crate::monotone::{GraphKind, GraphPair, GraphSpec, Perturbation};
use crate::output;
use crate::rng::FieldRng;
use crate::scheme::{self, SchemeConfig, Splitting};
use crate::spaces::{mean, FieldPair};
use crate::verify::{self, CheckLine, DataSet, Report};

// ---------------------------------------------------------------------------
// Raw file layout

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mesh: RawMesh,
    scheme: RawScheme,
    #[serde(default)]
    graphs: RawGraphs,
    init: RawInit,
    #[serde(default)]
    forcing: RawForcing,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    n: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    eps: f64,
    tau: f64,
    t_end: f64,
    #[serde(default = "default_tol")]
    newton_tol: f64,
    #[serde(default = "default_newton_max")]
    newton_max: usize,
    #[serde(default = "default_splitting")]
    splitting: String,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_newton_max() -> usize {
    50
}

fn default_splitting() -> String {
    "convex-split".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraphs {
    #[serde(default = "default_graph")]
    bulk: String,
    #[serde(default = "default_graph")]
    boundary: String,
    #[serde(default = "one")]
    rho: f64,
    #[serde(default)]
    c0: f64,
    #[serde(default = "default_pi")]
    bulk_pi: String,
    #[serde(default = "minus_one")]
    bulk_pi_slope: f64,
    #[serde(default = "one")]
    bulk_pi_amplitude: f64,
    #[serde(default = "default_pi")]
    boundary_pi: String,
    #[serde(default = "minus_one")]
    boundary_pi_slope: f64,
    #[serde(default = "one")]
    boundary_pi_amplitude: f64,
}

impl Default for RawGraphs {
    fn default() -> Self {
        RawGraphs {
            bulk: default_graph(),
            boundary: default_graph(),
            rho: 1.0,
            c0: 0.0,
            bulk_pi: default_pi(),
            bulk_pi_slope: -1.0,
            bulk_pi_amplitude: 1.0,
            boundary_pi: default_pi(),
            boundary_pi_slope: -1.0,
            boundary_pi_amplitude: 1.0,
        }
    }
}

fn default_graph() -> String {
    "polynomial".into()
}

fn default_pi() -> String {
    "linear".into()
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    kind: String,
    value: Option<f64>,
    mean: Option<f64>,
    amplitude: Option<f64>,
    seed: Option<u64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    #[serde(default = "default_forcing")]
    kind: String,
    bulk: Option<f64>,
    boundary: Option<f64>,
    amplitude: Option<f64>,
    wavenumber: Option<f64>,
    frequency: Option<f64>,
    path: Option<PathBuf>,
}

impl Default for RawForcing {
    fn default() -> Self {
        RawForcing {
            kind: default_forcing(),
            bulk: None,
            boundary: None,
            amplitude: None,
            wavenumber: None,
            frequency: None,
            path: None,
        }
    }
}

fn default_forcing() -> String {
    "zero".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_dir")]
    dir: PathBuf,
    #[serde(default)]
    stride: usize,
}

impl Default for RawOutput {
    fn default() -> Self {
        RawOutput {
            dir: default_dir(),
            stride: 0,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("chbs-out")
}

// ---------------------------------------------------------------------------
// Validated specification

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Constant(f64),
    Random { mean: f64, amplitude: f64, seed: u64 },
    /// CSV `node,value` listing every bulk node once.
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    Zero,
    Constant { bulk: f64, boundary: f64 },
    Mode { amplitude: f64, wavenumber: f64, frequency: f64 },
    Table(PathBuf),
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mesh_n: usize,
    pub scheme: SchemeConfig,
    pub init: InitSpec,
    pub forcing: ForcingSpec,
    pub output_dir: PathBuf,
    /// Snapshot stride in steps; `0` writes none.
    pub stride: usize,
}

fn config_err(msg: String) -> Error {
    Error::Config(msg)
}

fn require(v: Option<f64>, key: &str, kind: &str) -> Result<f64> {
    let x = v.ok_or_else(|| config_err(format!("{key} is required when kind = \"{kind}\"")))?;
    if !x.is_finite() {
        return Err(config_err(format!("{key} must be finite, got {x}")));
    }
    Ok(x)
}

fn perturbation(kind: &str, slope: f64, amplitude: f64, key: &str) -> Result<Perturbation> {
    match kind {
        "linear" if slope.is_finite() => Ok(Perturbation::Linear { slope }),
        "sine" if amplitude.is_finite() => Ok(Perturbation::Sine { amplitude }),
        "linear" | "sine" => Err(config_err(format!("{key} parameters must be finite"))),
        other => Err(config_err(format!(
            "{key} must be \"linear\" or \"sine\", got \"{other}\""
        ))),
    }
}

fn graph_kind(name: &str, key: &str) -> Result<GraphKind> {
    GraphKind::parse(name).ok_or_else(|| {
        config_err(format!(
            "{key} must be \"polynomial\", \"logarithmic\" or \"obstacle\", got \"{name}\""
        ))
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunSpec {
    /// Parses and validates configuration text. `base_dir` anchors relative paths.
    pub fn parse(text: &str, source_name: &str, base_dir: &Path) -> Result<RunSpec> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse {
                source_name: source_name.to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        Self::from_raw(raw, base_dir)
    }

    pub fn load(path: &Path) -> Result<RunSpec> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<RunSpec> {
        if raw.mesh.n < 3 {
            return Err(config_err(format!("mesh.n must be >= 3, got {}", raw.mesh.n)));
        }
        let g = &raw.graphs;
        let bulk = GraphSpec::new(
            graph_kind(&g.bulk, "graphs.bulk")?,
            perturbation(&g.bulk_pi, g.bulk_pi_slope, g.bulk_pi_amplitude, "graphs.bulk_pi")?,
        );
        let boundary = GraphSpec::new(
            graph_kind(&g.boundary, "graphs.boundary")?,
            perturbation(
                &g.boundary_pi,
                g.boundary_pi_slope,
                g.boundary_pi_amplitude,
                "graphs.boundary_pi",
            )?,
        );
        let graphs = GraphPair::new(bulk, boundary, g.rho, g.c0)?;

        let s = &raw.scheme;
        let splitting = Splitting::parse(&s.splitting).ok_or_else(|| {
            config_err(format!(
                "scheme.splitting must be \"convex-split\" or \"fully-implicit\", got \"{}\"",
                s.splitting
            ))
        })?;
        let scheme = SchemeConfig::new(graphs, s.eps, s.tau, s.t_end)?
            .with_newton(s.newton_tol, s.newton_max)?
            .with_splitting(splitting)?;

        let i = &raw.init;
        let init = match i.kind.as_str() {
            "constant" => InitSpec::Constant(require(i.value, "init.value", "constant")?),
            "random" => {
                let seed = i
                    .seed
                    .ok_or_else(|| config_err("init.seed is required when kind = \"random\"".into()))?;
                let amplitude = require(i.amplitude, "init.amplitude", "random")?;
                if amplitude < 0.0 {
                    return Err(config_err(format!(
                        "init.amplitude must be nonnegative, got {amplitude}"
                    )));
                }
                InitSpec::Random {
                    mean: require(i.mean, "init.mean", "random")?,
                    amplitude,
                    seed,
                }
            }
            "table" => InitSpec::Table(resolve(
                base,
                i.path
                    .as_deref()
                    .ok_or_else(|| config_err("init.path is required when kind = \"table\"".into()))?,
            )),
            other => {
                return Err(config_err(format!(
                    "init.kind must be \"constant\", \"random\" or \"table\", got \"{other}\""
                )))
            }
        };

        let f = &raw.forcing;
        let forcing = match f.kind.as_str() {
            "zero" => ForcingSpec::Zero,
            "constant" => ForcingSpec::Constant {
                bulk: require(f.bulk, "forcing.bulk", "constant")?,
                boundary: require(f.boundary, "forcing.boundary", "constant")?,
            },
            "mode" => ForcingSpec::Mode {
                amplitude: require(f.amplitude, "forcing.amplitude", "mode")?,
                wavenumber: require(f.wavenumber, "forcing.wavenumber", "mode")?,
                frequency: f.frequency.unwrap_or(0.0),
            },
            "table" => ForcingSpec::Table(resolve(
                base,
                f.path
                    .as_deref()
                    .ok_or_else(|| config_err("forcing.path is required when kind = \"table\"".into()))?,
            )),
            other => {
                return Err(config_err(format!(
                    "forcing.kind must be \"zero\", \"constant\", \"mode\" or \"table\", got \"{other}\""
                )))
            }
        };

        Ok(RunSpec {
            mesh_n: raw.mesh.n,
            scheme,
            init,
            forcing,
            output_dir: resolve(base, &raw.output.dir),
            stride: raw.output.stride,
        })
    }

    pub fn domain(&self) -> Result<DiscreteDomain> {
        DiscreteDomain::build_unit_square(self.mesh_n)
    }

    pub fn initial_datum(&self, dom: &DiscreteDomain) -> Result<FieldPair> {
        match &self.init {
            InitSpec::Constant(c) => Ok(FieldPair::constant(dom, *c)),
            InitSpec::Random { mean, amplitude, seed } => {
                Ok(FieldRng::new(*seed).perturbed_constant(dom, *mean, *amplitude))
            }
            InitSpec::Table(path) => read_init_table(path, dom),
        }
    }

    pub fn forcing(&self, dom: &DiscreteDomain) -> Result<Forcing> {
        Ok(match &self.forcing {
            ForcingSpec::Zero => Forcing::Zero,
            ForcingSpec::Constant { bulk, boundary } => Forcing::Constant {
                bulk: *bulk,
                boundary: *boundary,
            },
            ForcingSpec::Mode {
                amplitude,
                wavenumber,
                frequency,
            } => Forcing::Mode {
                amplitude: *amplitude,
                wavenumber: *wavenumber,
                frequency: *frequency,
            },
            ForcingSpec::Table(path) => {
                let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
                Forcing::Table(ForcingTable::from_csv(file, &path.display().to_string(), dom)?)
            }
        })
    }

    pub fn data(&self, dom: &DiscreteDomain) -> Result<DataSet> {
        Ok(DataSet {
            u0: self.initial_datum(dom)?,
            forcing: self.forcing(dom)?,
        })
    }
}

#[derive(Deserialize)]
struct InitRow {
    node: usize,
    value: f64,
}

fn read_init_table(path: &Path, dom: &DiscreteDomain) -> Result<FieldPair> {
    let name = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut bulk: Vec<Option<f64>> = vec![None; dom.num_nodes()];
    for (k, row) in rdr.deserialize::<InitRow>().enumerate() {
        let line = k + 2;
        let perr = |message: String| Error::Parse {
            source_name: name.clone(),
            line,
            message,
        };
        let row = row.map_err(|e| perr(e.to_string()))?;
        if row.node >= bulk.len() {
            return Err(perr(format!("node id {} out of range 0..{}", row.node, bulk.len())));
        }
        if bulk[row.node].is_some() {
            return Err(perr(format!("node {} listed twice", row.node)));
        }
        if !row.value.is_finite() {
            return Err(perr("non-finite value".into()));
        }
        bulk[row.node] = Some(row.value);
    }
    let bulk = bulk
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| config_err(format!("{name}: node {i} has no initial value"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldPair::from_bulk(dom, bulk))
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "chbs", version, about = "Bulk-surface Cahn-Hilliard simulator with dynamic boundary conditions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Output directory (overrides [output].dir).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Suppress the summary on standard output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trajectory and write monitors, snapshots and a summary.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Repeat a run for decreasing regularization parameters.
    EpsStudy {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Comma-separated, non-increasing list of eps values.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125,0.0625")]
        eps_list: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare two runs that differ only in initial datum and forcing.
    ContDep {
        /// Exactly two configuration files.
        #[arg(long, value_name = "PATH", num_args = 1, required = true)]
        config: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Functional-analytic consistency checks on one mesh.
    Check {
        /// Take the mesh resolution from this configuration.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Mesh resolution when no configuration is given.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Failure with its exit code.
struct Failure {
    code: i32,
    error: Error,
}

fn setup<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|error| Failure {
        code: EXIT_CONFIG,
        error,
    })
}

fn runtime<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|error| Failure {
        code: EXIT_FAILED,
        error,
    })
}

/// Parses `args` and executes the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("chbs: {}", f.error);
            f.code
        }
    }
}

fn execute(cmd: &Command) -> std::result::Result<i32, Failure> {
    match cmd {
        Command::Run { config, common } => cmd_run(config, common),
        Command::EpsStudy {
            config,
            eps_list,
            common,
        } => cmd_eps_study(config, eps_list, common),
        Command::ContDep { config, common } => cmd_cont_dep(config, common),
        Command::Check {
            config,
            n,
            seed,
            common,
        } => cmd_check(config.as_deref(), *n, *seed, common),
    }
}

fn out_dir(spec_dir: Option<&Path>, common: &CommonArgs) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| spec_dir.map(Path::to_path_buf))
        .unwrap_or_else(default_dir)
}

fn finish(dir: &Path, report: &dyn Report, common: &CommonArgs) -> std::result::Result<i32, Failure> {
    runtime(output::ensure_dir(dir))?;
    runtime(output::write_report(dir, report))?;
    if !common.quiet {
        print!("{}", report.text());
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

/// Summary of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps: usize,
    pub lines: Vec<CheckLine>,
}

impl Report for RunReport {
    fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    fn text(&self) -> String {
        let mut s = format!("run ({} steps)\n", self.steps);
        for l in &self.lines {
            s.push_str(&l.render());
            s.push('\n');
        }
        s
    }

    fn csv(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = ["check", "passed", "detail"].map(String::from).to_vec();
        let rows = self
            .lines
            .iter()
            .map(|l| vec![l.name.clone(), l.passed.to_string(), l.detail.clone()])
            .collect();
        (header, rows)
    }
}

/// Pass/fail summary of a completed run. The energy line is included only
/// when the discrete energy law applies (convex splitting, linear
/// perturbations, no forcing).
pub fn summarize_run(spec: &RunSpec, out: &scheme::RunOutput) -> RunReport {
    let cfg = &spec.scheme;
    let mut lines = vec![CheckLine::new(
        "run completed",
        out.completed(),
        match &out.failure {
            None => format!("t = {}", out.final_state.t),
            Some(e) => e.to_string(),
        },
    )];
    let m0 = out.records[0].total_mass;
    let drift = out
        .records
        .iter()
        .map(|r| (r.total_mass - m0).abs())
        .fold(0.0, f64::max);
    lines.push(CheckLine::new(
        "mass conservation",
        drift <= 1e-9,
        format!("max drift {drift:.3e}"),
    ));
    let worst = out.steps.iter().map(|s| s.r1.max(s.r2)).fold(0.0, f64::max);
    lines.push(CheckLine::new(
        "weak residuals",
        worst <= 10.0 * cfg.newton_tol,
        format!("max {worst:.3e} (limit {:.1e})", 10.0 * cfg.newton_tol),
    ));
    let linear = |g: &GraphSpec| matches!(g.perturbation, Perturbation::Linear { .. });
    if cfg.splitting == Splitting::ConvexSplit
        && spec.forcing == ForcingSpec::Zero
        && linear(&cfg.graphs.bulk)
        && linear(&cfg.graphs.boundary)
    {
        let rise = out
            .records
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max);
        lines.push(CheckLine::new(
            "energy nonincreasing",
            out.records.len() < 2 || rise <= 1e-10,
            format!("max increase {:.3e}", rise.max(0.0)),
        ));
    }
    RunReport {
        steps: out.steps.len(),
        lines,
    }
}

fn cmd_run(config: &Path, common: &CommonArgs) -> std::result::Result<i32, Failure> {
    let spec = setup(RunSpec::load(config))?;
    let dom = setup(spec.domain())?;
    let data = setup(spec.data(&dom))?;
    // Surface incompatible initial data as configuration errors.
    setup(scheme::initialize(&dom, &spec.scheme, &data.u0, &data.forcing.sample(&dom, 0.0)))?;
    let dir = out_dir(Some(&spec.output_dir), common);
    runtime(output::ensure_dir(&dir))?;
    let out = runtime(scheme::run(&dom, &spec.scheme, &data.u0, &data.forcing, spec.stride))?;
    runtime(output::write_mesh(&dir.join("mesh.txt"), &dom))?;
    runtime(output::write_monitors(&dir.join("monitors.csv"), &out.records))?;
    for s in &out.snapshots {
        runtime(output::write_snapshot(&dir.join(output::snapshot_name(s.step_index)), &dom, s))?;
    }
    let report = summarize_run(&spec, &out);
    finish(&dir, &report, common)
}

fn cmd_eps_study(config: &Path, eps_list: &[f64], common: &CommonArgs) -> std::result::Result<i32, Failure> {
    let spec = setup(RunSpec::load(config))?;
    if eps_list.len() < 3 || eps_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Failure {
            code: EXIT_CONFIG,
            error: config_err("--eps-list must hold at least 3 non-increasing values".into()),
        });
    }
    for &e in eps_list {
        setup(spec.scheme.clone().with_eps(e))?;
    }
    let dom = setup(spec.domain())?;
    let data = setup(spec.data(&dom))?;
    setup(scheme::initialize(&dom, &spec.scheme, &data.u0, &data.forcing.sample(&dom, 0.0)))?;
    let report = runtime(verify::vanishing_eps_study(&dom, &spec.scheme, eps_list, &data))?;
    finish(&out_dir(Some(&spec.output_dir), common), &report, common)
}

fn cmd_cont_dep(configs: &[PathBuf], common: &CommonArgs) -> std::result::Result<i32, Failure> {
    if configs.len() != 2 {
        return Err(Failure {
            code: EXIT_CONFIG,
            error: config_err(format!("cont-dep needs exactly two --config files, got {}", configs.len())),
        });
    }
    let a = setup(RunSpec::load(&configs[0]))?;
    let b = setup(RunSpec::load(&configs[1]))?;
    if a.mesh_n != b.mesh_n || a.scheme != b.scheme {
        return Err(Failure {
            code: EXIT_CONFIG,
            error: config_err("cont-dep configurations may differ only in [init] and [forcing]".into()),
        });
    }
    let dom = setup(a.domain())?;
    let d1 = setup(a.data(&dom))?;
    let d2 = setup(b.data(&dom))?;
    for d in [&d1, &d2] {
        setup(scheme::initialize(&dom, &a.scheme, &d.u0, &d.forcing.sample(&dom, 0.0)))?;
    }
    let (m1, m2) = (setup(mean(&dom, &d1.u0))?, setup(mean(&dom, &d2.u0))?);
    if (m1 - m2).abs() > 1e-12 {
        return Err(Failure {
            code: EXIT_CONFIG,
            error: config_err(format!("initial data have different means ({m1} vs {m2})")),
        });
    }
    let report = runtime(verify::continuous_dependence_experiment(&dom, &a.scheme, &d1, &d2))?;
    finish(&out_dir(Some(&a.output_dir), common), &report, common)
}

fn cmd_check(config: Option<&Path>, n: usize, seed: u64, common: &CommonArgs) -> std::result::Result<i32, Failure> {
    let (n, spec_dir) = match config {
        Some(p) => {
            let spec = setup(RunSpec::load(p))?;
            (spec.mesh_n, Some(spec.output_dir))
        }
        None => (n, None),
    };
    let dom = setup(DiscreteDomain::build_unit_square(n))?;
    let report = runtime(verify::appendix_checks(&dom, seed))?;
    finish(&out_dir(spec_dir.as_deref(), common), &report, common)
}
