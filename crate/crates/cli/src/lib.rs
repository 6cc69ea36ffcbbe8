//! `szilard`: reproducible sweeps, games and collision runs emitting CSV and
//! JSON for external plotting.

pub mod error;
pub mod output;

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use szilard_core::collision::{
    run_thermalization, run_work_extraction, CouplingScheme, ThermalizationConfig, WorkCollisionConfig,
};
use szilard_core::engine::{
    classical_bound, entangled_state, quantum_work, violation_boundary_q, y_rotation, EngineParams,
};
use szilard_core::game::{run_game, Decomposition, DemonStrategy, GameConfig, GameMode};
use szilard_core::lhs::{search_max_classical_work, HiddenStateEnsemble, SearchConfig, DEFAULT_WORKERS};
use szilard_core::qubit::{apply_unitary, trace_distance, BlochVector, DensityMatrix};

pub use error::CliError;
use output::{emit, fmt_flag, fmt_float, to_json, CsvTable, Grid, Manifest};

#[derive(Debug, Parser)]
#[command(name = "szilard", version, about = "Steering-based quantum Szilard engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical work bound and the quantum optimum over η.
    Bound(BoundArgs),
    /// Violation region over an (η, q) grid, plus the boundary q*(η).
    Region(RegionArgs),
    /// Play the steering game and print its summary.
    Game(GameArgs),
    /// Search local-hidden-state ensembles for the best classical demon.
    LhsSearch(LhsSearchArgs),
    /// Collision-model trajectories.
    Collide(CollideArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("etas").required(true).args(["eta", "eta_grid"])))]
pub struct BoundArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// start:stop:steps, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub eta_grid: Option<Grid>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eta_grid: Grid,
    #[arg(long, default_value = "0:1:101")]
    pub q_grid: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Quantum,
    Classical,
    FixedD1,
    FixedD2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Sampled,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 100_000)]
    pub cells: usize,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "quantum")]
    pub strategy: StrategyArg,
    /// Ensemble JSON for `--strategy classical`.
    #[arg(long)]
    pub ensemble_file: Option<PathBuf>,
    /// Blue-to-red ratio; overriding it voids the verdict.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = szilard_core::game::DEFAULT_COLLISION_STEPS)]
    pub collision_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LhsSearchArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    pub workers: usize,
    /// Ratio to optimize for; the bound only applies at the default.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CollideMode {
    Work,
    Thermalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Joint,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Ground,
    FixedPoint,
    MaximallyMixed,
}

#[derive(Debug, Args)]
pub struct CollideArgs {
    #[arg(long, value_enum)]
    pub mode: CollideMode,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Work mode: total rotation angle.
    #[arg(long, default_value_t = PI, allow_hyphen_values = true)]
    pub phi: f64,
    /// Work mode: initial Bloch vector of the system.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub z: f64,
    /// Work mode: `H_A = scale · σ_z`.
    #[arg(long, default_value_t = WorkCollisionConfig::DEFAULT_SCALE)]
    pub scale: f64,
    /// Thermalize mode: polarization of the subenvironments.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta: f64,
    /// Thermalize mode: coupling angle per collision.
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    #[arg(long, value_enum, default_value = "joint")]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "ground")]
    pub init: InitArg,
    /// Thermalize mode: distance counted as converged.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn flag(key: &str, value: impl std::fmt::Display) -> String {
    format!("--{key}={value}")
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Bound(a) => cmd_bound(&a, stdout),
        Command::Region(a) => cmd_region(&a, stdout),
        Command::Game(a) => cmd_game(&a, stdout),
        Command::LhsSearch(a) => cmd_lhs_search(&a, stdout),
        Command::Collide(a) => cmd_collide(&a, stdout),
        Command::Replay(a) => cmd_replay(&a, stdout),
    }
}

fn manifest(subcommand: &str, args: Vec<String>, seed: Option<u64>, out: Option<&Path>, diagnostics: serde_json::Value) -> Manifest {
    Manifest {
        subcommand: subcommand.into(),
        version: env!("CARGO_PKG_VERSION"),
        args,
        seed,
        outputs: out.map(|p| p.display().to_string()).into_iter().collect(),
        diagnostics,
    }
}

fn check_eta(eta: f64) -> Result<(), CliError> {
    Ok(szilard_core::engine::check_eta(eta)?)
}

#[derive(Serialize)]
struct BoundRow {
    eta: f64,
    bound: f64,
    w_opt: f64,
    threshold_flag: bool,
    physical: bool,
}

pub fn cmd_bound(a: &BoundArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let grid = a.eta_grid.unwrap_or_else(|| Grid::single(a.eta.expect("clap group")));
    let mut rows = Vec::with_capacity(grid.steps);
    for eta in grid.values() {
        check_eta(eta)?;
        let bound = classical_bound(eta);
        let w_opt = quantum_work(eta, 1.0);
        rows.push(BoundRow { eta, bound, w_opt, threshold_flag: w_opt > bound, physical: eta <= 0.0 });
    }
    let body = match a.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut t = CsvTable::new(
                "szilard.bound.v1 (threshold_flag: w_opt > bound; physical: eta <= 0)",
                &["eta", "bound", "w_opt", "threshold_flag", "physical"],
            );
            for r in &rows {
                t.push(vec![fmt_float(r.eta), fmt_float(r.bound), fmt_float(r.w_opt), fmt_flag(r.threshold_flag), fmt_flag(r.physical)]);
            }
            t.render()
        }
    };
    let args = vec!["bound".into(), flag("eta-grid", grid), flag("format", name(&a.format))];
    emit(a.out.as_deref(), &body, manifest("bound", args, None, a.out.as_deref(), json!({})), stdout)
}

pub fn cmd_region(a: &RegionArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let etas = a.eta_grid.values();
    let qs = a.q_grid.values();
    let points = szilard_core::game::sweep_region(&etas, &qs)?;
    let mut t = CsvTable::new(
        "szilard.region.v1 (kind=grid: one (eta, q) point; kind=boundary: smallest violating q for eta)",
        &["kind", "eta", "q", "w_qu", "bound", "violation"],
    );
    for p in &points {
        t.push(vec!["grid".into(), fmt_float(p.eta), fmt_float(p.q), fmt_float(p.w_qu), fmt_float(p.bound), fmt_flag(p.violation)]);
    }
    let mut boundary_rows = 0;
    for &eta in &etas {
        if let Some(q) = violation_boundary_q(eta) {
            boundary_rows += 1;
            t.push(vec![
                "boundary".into(),
                fmt_float(eta),
                fmt_float(q),
                fmt_float(quantum_work(eta, q)),
                fmt_float(classical_bound(eta)),
                String::new(),
            ]);
        }
    }
    let args = vec!["region".into(), flag("eta-grid", a.eta_grid), flag("q-grid", a.q_grid)];
    let diag = json!({ "grid_rows": points.len(), "boundary_rows": boundary_rows });
    emit(a.out.as_deref(), &t.render(), manifest("region", args, None, a.out.as_deref(), diag), stdout)
}

fn read_ensemble(path: &Path) -> Result<HiddenStateEnsemble, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    HiddenStateEnsemble::from_json(&text).map_err(|e| CliError::Ensemble {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn cmd_game(a: &GameArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut params = EngineParams::new(a.eta, a.q)?;
    if let Some(c) = a.c {
        params = params.with_ratio(c)?;
    }
    let strategy = match a.strategy {
        StrategyArg::Quantum => DemonStrategy::Quantum { q: a.q },
        StrategyArg::Classical => {
            let path = a
                .ensemble_file
                .as_deref()
                .ok_or_else(|| CliError::Usage("--strategy classical needs --ensemble-file".into()))?;
            DemonStrategy::ClassicalLhs(read_ensemble(path)?)
        }
        StrategyArg::FixedD1 => DemonStrategy::FixedDecomposition(Decomposition::D1),
        StrategyArg::FixedD2 => DemonStrategy::FixedDecomposition(Decomposition::D2),
    };
    let mode = match a.mode {
        ModeArg::Analytic => GameMode::Analytic,
        ModeArg::Sampled => GameMode::Sampled,
    };
    let mut cfg = GameConfig::new(params, a.cells, strategy, mode, a.seed)?;
    cfg.collision_steps = a.collision_steps;
    let summary = run_game(&cfg)?;

    let mut args = vec![
        "game".into(),
        flag("eta", a.eta),
        flag("q", a.q),
        flag("cells", a.cells),
        flag("mode", name(&a.mode)),
        flag("seed", a.seed),
        flag("strategy", name(&a.strategy)),
        flag("collision-steps", a.collision_steps),
    ];
    if let Some(p) = &a.ensemble_file {
        args.push(flag("ensemble-file", p.display()));
    }
    if let Some(c) = a.c {
        args.push(flag("c", c));
    }
    emit(a.out.as_deref(), &to_json(&summary), manifest("game", args, Some(a.seed), a.out.as_deref(), json!({})), stdout)
}

pub fn cmd_lhs_search(a: &LhsSearchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    check_eta(a.eta)?;
    let mut cfg = SearchConfig::new(a.budget, a.seed);
    cfg.workers = a.workers;
    cfg.ratio = a.c;
    let res = search_max_classical_work(a.eta, &cfg)?;
    let bound = classical_bound(a.eta);
    let report = json!({
        "eta": a.eta,
        "budget": a.budget,
        "seed": a.seed,
        "workers": a.workers,
        "c": a.c.unwrap_or_else(|| szilard_core::engine::default_ratio(a.eta)),
        "bound_applies": a.c.is_none(),
        "max_found": res.value,
        "bound": bound,
        "margin": bound - res.value,
        "best": res.best,
    });
    let mut args = vec![
        "lhs-search".into(),
        flag("eta", a.eta),
        flag("budget", a.budget),
        flag("seed", a.seed),
        flag("workers", a.workers),
    ];
    if let Some(c) = a.c {
        args.push(flag("c", c));
    }
    emit(a.out.as_deref(), &to_json(&report), manifest("lhs-search", args, Some(a.seed), a.out.as_deref(), json!({})), stdout)
}

pub fn cmd_collide(a: &CollideArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut args = vec!["collide".into(), flag("mode", name(&a.mode)), flag("steps", a.steps)];
    let (body, diag) = match a.mode {
        CollideMode::Work => {
            let cfg = WorkCollisionConfig { phi: a.phi, steps: a.steps, ancilla_hamiltonian_scale: a.scale };
            let rho = BlochVector::new(a.x, a.y, a.z)?.to_density();
            let run = run_work_extraction(&rho, &cfg)?;
            let mut t = CsvTable::new(
                "szilard.collide-work.v1 (k: collision index from 1; energies in units of the system gap)",
                &["k", "mean_gain", "excitation_p", "cumulative_work"],
            );
            let mut cumulative = 0.0;
            for (k, r) in run.records.iter().enumerate() {
                cumulative += r.mean_energy_gain;
                t.push(vec![(k + 1).to_string(), fmt_float(r.mean_energy_gain), fmt_float(r.excitation_probability), fmt_float(cumulative)]);
            }
            let target = apply_unitary(&y_rotation(a.phi), &rho)?;
            let diag = json!({
                "total_mean_work": run.total_mean_work,
                "system_energy_drop": run.system_energy_drop,
                "conservation_residual": run.conservation_residual(),
                "trace_distance_to_rotation": trace_distance(&run.final_state, &target)?,
            });
            args.extend([flag("phi", a.phi), flag("x", a.x), flag("y", a.y), flag("z", a.z), flag("scale", a.scale)]);
            (t.render(), diag)
        }
        CollideMode::Thermalize => {
            let scheme = match a.scheme {
                SchemeArg::Joint => CouplingScheme::JointExchange,
                SchemeArg::Local => CouplingScheme::LocalSwaps,
            };
            let cfg = ThermalizationConfig { eta: a.eta, coupling: a.theta, steps: a.steps, scheme };
            cfg.validate()?;
            let rho0 = match a.init {
                InitArg::Ground => {
                    let g = BlochVector::GROUND.to_density();
                    g.tensor(&g)?
                }
                InitArg::FixedPoint => entangled_state(a.eta)?,
                InitArg::MaximallyMixed => DensityMatrix::maximally_mixed(4)?,
            };
            let run = run_thermalization(&rho0, &cfg, a.tol)?;
            let mut t = CsvTable::new(
                "szilard.collide-thermalize.v1 (trace_distance to the entangled fixed point; s_bloch: Bob's reduced state)",
                &["step", "trace_distance", "s_bloch_x", "s_bloch_z"],
            );
            for s in &run.trajectory {
                t.push(vec![s.step.to_string(), fmt_float(s.trace_distance), fmt_float(s.s_bloch.x), fmt_float(s.s_bloch.z)]);
            }
            let last = run.trajectory.last().expect("trajectory has the initial state");
            let diag = json!({
                "converged_at": run.converged_at,
                "final_trace_distance": last.trace_distance,
            });
            args.extend([
                flag("eta", a.eta),
                flag("theta", a.theta),
                flag("scheme", name(&a.scheme)),
                flag("init", name(&a.init)),
                flag("tol", a.tol),
            ]);
            (t.render(), diag)
        }
    };
    emit(a.out.as_deref(), &body, manifest("collide", args, None, a.out.as_deref(), diag), stdout)
}

pub fn cmd_replay(a: &ReplayArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let path = a.manifest.display().to_string();
    let text = std::fs::read_to_string(&a.manifest).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{path}: line {}, column {}: {e}", e.line(), e.column())))?;
    let args: Vec<String> = value
        .get("args")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| CliError::Usage(format!("{path}: manifest has no `args` list")))?;
    if args.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Usage(format!("{path}: refusing to replay a replay")));
    }
    let mut argv = vec!["szilard".to_string()];
    argv.extend(args);
    if let Some(out) = &a.out {
        argv.push(flag("out", out.display()));
    }
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli, stdout)
}
