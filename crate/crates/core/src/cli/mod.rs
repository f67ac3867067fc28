//! `prlab` command line: configuration, stage dispatch, artifacts and the
//! run manifest.

pub mod config;
pub mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

pub use config::{parse_config, parse_config_str, ConfigError, ExperimentConfig};
pub use manifest::{FileKind, RunManifest};

use crate::analysis_checks::estimate_sobolev_constant;
use crate::diophantine::{construct_lstar, rigidity_sequence, to_record, ContinuedFraction};
use crate::floer_solver::{
    choose_truncation, energy_report, export, solve_floer, CylinderGrid, NAlpha,
};
use crate::hamiltonian_disk::{hessian_bound, orbit_at_integer_times, DiskPoint};
use crate::rigidity_lab::{
    c0_distances, gronwall_sweep, mixing_probe, run_rigidity_experiment, Region,
};

pub const THREADS_ENV: &str = "PRLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "prlab",
    version,
    about = "Numerical laboratory for C0-rigidity of disk pseudo-rotations"
)]
pub struct Cli {
    /// Experiment configuration (TOML); built-in defaults otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Seed for Monte Carlo stages; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; overrides PRLAB_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rotation numbers: construction and rigidity sequences.
    #[command(subcommand)]
    Alpha(AlphaCmd),
    /// Orbit of one point at integer times.
    Flow(FlowArgs),
    /// Solve the Floer equation for one period.
    Floer(FloerArgs),
    #[command(subcommand)]
    Rigidity(RigidityCmd),
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Audit the manifest in the output directory and summarize the run.
    Report,
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug, Subcommand)]
pub enum AlphaCmd {
    /// Extend a seed expansion by the exponential rule.
    Construct {
        /// Comma-separated `a_0,a_1,…`.
        #[arg(long, value_delimiter = ',', required = true)]
        seed: Vec<String>,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = crate::diophantine::DEFAULT_BIT_BUDGET)]
        budget_bits: u64,
    },
    /// Rigidity sequence of the configured α.
    Sequence {
        #[arg(long)]
        count: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long)]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct FloerArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub ns: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum RigidityCmd {
    /// Distances, Floer solves and bounds along the rigidity sequence.
    Run,
    /// Two-set mixing probe along the rigidity sequence.
    Mixing,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Worst interpolation ratios of random half-cylinder probes.
    Sobolev {
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u32>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Nodewise Gronwall comparison on a Floer solution.
    Gronwall {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{stage}: {message}")]
    Stage { stage: String, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn stage(stage: &str, e: impl std::fmt::Display) -> Self {
        CliError::Stage {
            stage: stage.to_string(),
            message: e.to_string(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Stage { .. } => "stage",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: String,
    violations: Vec<String>,
}

/// Result of a successful dispatch: whether every stage invariant held.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

struct Ctx {
    cfg: ExperimentConfig,
    dir: PathBuf,
    manifest: RunManifest,
    written: Vec<PathBuf>,
}

impl Ctx {
    fn write(
        &mut self,
        name: &str,
        kind: FileKind,
        stage: &str,
        data: &[u8],
    ) -> Result<(), CliError> {
        fs::write(self.dir.join(name), data)?;
        self.manifest
            .record_file(&self.dir, Path::new(name), kind, stage)?;
        self.written.push(self.dir.join(name));
        Ok(())
    }

    fn write_with(
        &mut self,
        name: &str,
        kind: FileKind,
        stage: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, kind, stage, &buf)
    }

    fn json<T: Serialize>(&mut self, name: &str, stage: &str, v: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(v).map_err(|e| CliError::stage(stage, e))? + "\n";
        self.write(name, FileKind::Json, stage, text.as_bytes())
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = d.clone();
    }
    Ok(cfg)
}

/// Parses nothing; runs an already parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    configure_threads(cli.threads)?;
    let cfg = load_config(cli)?;
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(Outcome {
            passed: true,
            out_dir: cfg.output.dir.clone(),
            files: Vec::new(),
        });
    }
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)?;
    if let Command::Report = cli.command {
        return report(&dir);
    }
    let manifest = RunManifest::load_or_new(&dir, &cfg.hash());
    let mut ctx = Ctx {
        cfg,
        dir,
        manifest,
        written: Vec::new(),
    };
    let text = ctx.cfg.to_toml();
    ctx.write("config.toml", FileKind::Toml, "config", text.as_bytes())?;
    let start = Instant::now();
    let (stage, result) = match &cli.command {
        Command::Alpha(AlphaCmd::Construct {
            seed,
            depth,
            budget_bits,
        }) => (
            "alpha",
            alpha_construct(&mut ctx, seed, *depth, *budget_bits),
        ),
        Command::Alpha(AlphaCmd::Sequence { count }) => ("alpha", alpha_sequence(&mut ctx, *count)),
        Command::Flow(a) => ("flow", flow_cmd(&mut ctx, a)),
        Command::Floer(a) => ("floer", floer_cmd(&mut ctx, a)),
        Command::Rigidity(RigidityCmd::Run) => ("rigidity", rigidity_run(&mut ctx)),
        Command::Rigidity(RigidityCmd::Mixing) => ("mixing", mixing_cmd(&mut ctx)),
        Command::Verify(VerifyCmd::Sobolev { n, trials, seed }) => (
            "sobolev",
            verify_sobolev(&mut ctx, n.clone(), *trials, *seed),
        ),
        Command::Verify(VerifyCmd::Gronwall { n }) => ("gronwall", verify_gronwall(&mut ctx, *n)),
        Command::Report | Command::Config => unreachable!("handled above"),
    };
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(note) => {
            let passed = note.is_none();
            ctx.manifest
                .record_stage(stage, seconds, passed, note.clone());
            ctx.manifest.save(&ctx.dir)?;
            if let Some(n) = note {
                eprintln!("{stage}: invariant failed: {n}");
            }
            Ok(Outcome {
                passed,
                out_dir: ctx.dir,
                files: ctx.written,
            })
        }
        Err(e) => {
            ctx.manifest
                .record_stage(stage, seconds, false, Some(e.to_string()));
            ctx.manifest.save(&ctx.dir)?;
            Err(e)
        }
    }
}

fn write_error_record(dir: Option<&Path>, e: &CliError) {
    let violations = match e {
        CliError::Config(c) => c.violations(),
        _ => Vec::new(),
    };
    let rec = ErrorRecord {
        kind: e.kind(),
        message: e.to_string(),
        violations,
    };
    let text = serde_json::to_string(&rec).unwrap_or_default();
    eprintln!("{text}");
    if let Some(d) = dir {
        let _ = fs::create_dir_all(d).and_then(|_| fs::write(d.join("error.json"), text + "\n"));
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(3),
        Err(e) => {
            let dir = load_config(&cli).ok().map(|c| c.output.dir);
            write_error_record(dir.as_deref(), &e);
            ExitCode::from(e.exit_code())
        }
    }
}

type StageResult = Result<Option<String>, CliError>;

fn alpha_construct(ctx: &mut Ctx, seed: &[String], depth: usize, budget: u64) -> StageResult {
    let seed = seed
        .iter()
        .map(|s| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|_| CliError::Usage(format!("bad seed quotient {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cf = construct_lstar(depth, &seed, budget).map_err(|e| CliError::stage("alpha", e))?;
    print_cf(&cf);
    let text = to_record(&cf).map_err(|e| CliError::stage("alpha", e))?;
    ctx.write("alpha.toml", FileKind::Toml, "alpha", text.as_bytes())?;
    Ok(None)
}

fn print_cf(cf: &ContinuedFraction) {
    println!("a_0 = {}", cf.integer_part);
    for (i, a) in cf.partial_quotients.iter().enumerate() {
        println!("a_{} = {}", i + 1, a);
    }
    println!("alpha ~ {:.17}", cf.approx_f64());
}

fn alpha_sequence(ctx: &mut Ctx, count: Option<u64>) -> StageResult {
    let cf = ctx
        .cfg
        .alpha
        .build()
        .map_err(|e| CliError::stage("alpha", e))?;
    let count = count.unwrap_or(ctx.cfg.rigidity.count);
    let seq = rigidity_sequence(&cf, count).map_err(|e| CliError::stage("alpha", e))?;
    ctx.write_with("sequence.csv", FileKind::Csv, "alpha", |w| {
        use crate::diophantine::interval::format_sci;
        writeln!(w, "j,n,index,inverse,frac_lo,frac_hi,small_hi")?;
        for e in &seq.entries {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.j,
                e.n,
                e.index,
                e.inverse,
                format_sci(e.fractional_part.lo(), 6, false),
                format_sci(e.fractional_part.hi(), 6, true),
                format_sci(e.small.hi(), 6, true)
            )?;
        }
        Ok(())
    })?;
    Ok(seq.shortfall)
}

fn hamiltonian(
    ctx: &Ctx,
) -> Result<(ContinuedFraction, crate::hamiltonian_disk::Hamiltonian), CliError> {
    let cf = ctx
        .cfg
        .alpha
        .build()
        .map_err(|e| CliError::stage("alpha", e))?;
    let h = ctx
        .cfg
        .family
        .build(cf.approx_f64())
        .map_err(|e| CliError::stage("family", e))?;
    Ok((cf, h))
}

fn flow_cmd(ctx: &mut Ctx, a: &FlowArgs) -> StageResult {
    let (_, h) = hamiltonian(ctx)?;
    let orbit = orbit_at_integer_times(&h, DiskPoint::new(a.x, a.y), a.n, &ctx.cfg.flow)
        .map_err(|e| CliError::stage("flow", e))?;
    ctx.write_with("flow.csv", FileKind::Csv, "flow", |w| {
        writeln!(w, "k,x,y")?;
        for (k, p) in orbit.iter().enumerate() {
            writeln!(w, "{k},{:.17e},{:.17e}", p.x, p.y)?;
        }
        Ok(())
    })?;
    let worst = orbit.iter().map(|p| p.norm()).fold(0.0, f64::max);
    Ok((worst > 1.0 + ctx.cfg.flow.drift_tol)
        .then(|| format!("orbit left the disk: |p| = {worst}")))
}

fn solve_for(
    ctx: &Ctx,
    n: u32,
    ns: usize,
    nt: usize,
) -> Result<crate::floer_solver::FloerSolution, CliError> {
    let (cf, h) = hamiltonian(ctx)?;
    let alpha = cf.value_enclosure();
    let na = NAlpha::from_enclosure(&alpha, n).map_err(|e| CliError::stage("floer", e))?;
    let f = &ctx.cfg.floer;
    let trunc = choose_truncation(na.frac_hi, n, f.tail_tol, f.s_cap);
    if !trunc.feasible {
        return Err(CliError::stage(
            "floer",
            format!(
                "{{nα}} = {:e} needs S beyond floer.s_cap = {}",
                na.frac_hi, f.s_cap
            ),
        ));
    }
    let grid =
        CylinderGrid::new(n, trunc.s_max, ns, nt).map_err(|e| CliError::stage("floer", e))?;
    solve_floer(&h, n, &alpha, &grid, None, &f.solver).map_err(|e| CliError::stage("floer", e))
}

fn floer_cmd(ctx: &mut Ctx, a: &FloerArgs) -> StageResult {
    let ns = a.ns.unwrap_or(ctx.cfg.floer.ns);
    let nt = a.nt.unwrap_or(ctx.cfg.floer.nt);
    let sol = solve_for(ctx, a.n, ns, nt)?;
    let base = format!("floer_n{}", a.n);
    ctx.write_with(&format!("{base}.csv"), FileKind::Csv, "floer", |w| {
        export::write_csv(&sol, w)
    })?;
    ctx.write_with(&format!("{base}.bin"), FileKind::Binary, "floer", |w| {
        export::write_binary(&sol, w)
    })?;
    #[derive(Serialize)]
    struct Summary {
        n: u32,
        grid: CylinderGrid,
        converged: bool,
        iterations: usize,
        residual_norm: f64,
        residual_max: f64,
        winding: i64,
        degree: i64,
        history: Vec<f64>,
        energy: crate::floer_solver::EnergyReport,
    }
    let s = Summary {
        n: a.n,
        grid: sol.grid,
        converged: sol.converged,
        iterations: sol.iterations,
        residual_norm: sol.residual_norm,
        residual_max: sol.residual_max,
        winding: sol.measured_winding(),
        degree: sol.boundary_degree,
        history: sol.history.clone(),
        energy: energy_report(&sol),
    };
    ctx.json(&format!("{base}.json"), "floer", &s)?;
    let mut problems = Vec::new();
    if !sol.converged {
        problems.push(format!("not converged (residual {:e})", sol.residual_norm));
    }
    if s.winding != s.degree {
        problems.push(format!(
            "winding {} differs from degree {}",
            s.winding, s.degree
        ));
    }
    if s.energy.floer_energy < s.energy.l2_s_derivative {
        problems.push("Floer energy below the L² mass of ∂ₛz".into());
    }
    Ok((!problems.is_empty()).then(|| problems.join("; ")))
}

fn rigidity_run(ctx: &mut Ctx) -> StageResult {
    let rep = run_rigidity_experiment(&ctx.cfg.rigidity_config())
        .map_err(|e| CliError::stage("rigidity", e))?;
    ctx.write_with("rigidity.csv", FileKind::Csv, "rigidity", |w| {
        rep.write_csv(w)
    })?;
    ctx.write_with("rigidity_plot.csv", FileKind::Csv, "rigidity", |w| {
        rep.write_plot_data(w)
    })?;
    ctx.json("rigidity.json", "rigidity", &rep)?;
    let bad: Vec<String> = rep
        .rows
        .iter()
        .filter(|r| r.measured_d.is_some_and(|d| d > 2.0 + 1e-9))
        .map(|r| format!("n = {} measured {:?} > 2", r.n, r.measured_d))
        .collect();
    Ok((!bad.is_empty()).then(|| bad.join("; ")))
}

fn mixing_cmd(ctx: &mut Ctx) -> StageResult {
    let (cf, h) = hamiltonian(ctx)?;
    let m = &ctx.cfg.mixing;
    let ns: Vec<u64> = if m.n_values.is_empty() {
        let seq = rigidity_sequence(&cf, ctx.cfg.rigidity.count)
            .map_err(|e| CliError::stage("mixing", e))?;
        let mut v: Vec<u64> = seq
            .entries
            .iter()
            .filter_map(|e| e.n.to_u64())
            .filter(|n| *n <= ctx.cfg.rigidity.max_flow_n)
            .collect();
        v.dedup();
        v
    } else {
        m.n_values.clone()
    };
    let a = Region::new(m.a.clone()).map_err(|e| CliError::stage("mixing", e))?;
    let b = Region::new(m.b.clone()).map_err(|e| CliError::stage("mixing", e))?;
    let hess = hessian_bound(&h, ctx.cfg.hessian);
    let d = c0_distances(&h, &ns, &ctx.cfg.probe, hess.b, &ctx.cfg.flow)
        .map_err(|e| CliError::stage("mixing", e))?;
    let probe = mixing_probe(&h, &a, &b, &ns, m.samples, ctx.cfg.seed, &ctx.cfg.flow)
        .map_err(|e| CliError::stage("mixing", e))?;
    ctx.write_with("mixing.csv", FileKind::Csv, "mixing", |w| {
        writeln!(
            w,
            "n,d_c0,hits,samples,estimate,half_width,mu_a_mu_b,separation"
        )?;
        for (row, dist) in probe.rows.iter().zip(&d) {
            writeln!(
                w,
                "{},{:.6e},{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
                row.n,
                dist.measured,
                row.hits,
                row.samples,
                row.estimate,
                row.half_width,
                probe.product,
                probe.separation
            )?;
        }
        Ok(())
    })?;
    ctx.json("mixing.json", "mixing", &probe)?;
    let bad: Vec<String> = probe
        .rows
        .iter()
        .zip(&d)
        .filter(|(r, dist)| dist.measured < probe.separation && r.hits > 0)
        .map(|(r, dist)| {
            format!(
                "n = {}: d = {:e} below separation but {} hits",
                r.n, dist.measured, r.hits
            )
        })
        .collect();
    Ok((!bad.is_empty()).then(|| bad.join("; ")))
}

fn verify_sobolev(
    ctx: &mut Ctx,
    n: Option<Vec<u32>>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> StageResult {
    let n_list = n.unwrap_or_else(|| ctx.cfg.sobolev.n_list.clone());
    let trials = trials.unwrap_or(ctx.cfg.sobolev.trials);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(CliError::Usage("--n needs positive periods".into()));
    }
    let seed = seed.unwrap_or(ctx.cfg.seed);
    let table = estimate_sobolev_constant(true, &n_list, trials, seed)
        .map_err(|e| CliError::stage("sobolev", e))?;
    ctx.write_with("sobolev.csv", FileKind::Csv, "sobolev", |w| {
        table.write_csv(w)
    })?;
    for r in &table.rows {
        println!(
            "n = {:>3}  max ratio {:.4}  (bound {:.4})",
            r.n, r.max_ratio, table.bound
        );
    }
    let mut problems = Vec::new();
    if !table.all_below_bound {
        problems.push("a ratio exceeds 6√12".to_string());
    }
    if table.trend_up {
        problems.push("maxima trend upward in n".into());
    }
    Ok((!problems.is_empty()).then(|| problems.join("; ")))
}

fn verify_gronwall(ctx: &mut Ctx, n: u32) -> StageResult {
    let sol = solve_for(ctx, n, ctx.cfg.floer.ns, ctx.cfg.floer.nt)?;
    if !sol.converged {
        return Ok(Some(format!(
            "Floer solve did not converge (residual {:e})",
            sol.residual_norm
        )));
    }
    let b = hessian_bound(&sol.hamiltonian, ctx.cfg.hessian).b;
    let starts = ctx.cfg.floer.gronwall_starts.max(1);
    let sweep = gronwall_sweep(&sol, b, starts, &ctx.cfg.flow)
        .map_err(|e| CliError::stage("gronwall", e))?;
    ctx.write_with("gronwall.csv", FileKind::Csv, "gronwall", |w| {
        writeln!(w, "row,start_column,a,b,violations,min_slack")?;
        for g in &sweep {
            writeln!(
                w,
                "{},{},{:.6e},{:.6e},{},{:.6e}",
                g.row, g.start_column, g.a, g.b, g.violations, g.min_slack
            )?;
        }
        Ok(())
    })?;
    let count: usize = sweep.iter().map(|g| g.violations).sum();
    Ok((count > 0).then(|| format!("{count} nodewise violations")))
}

fn report(dir: &Path) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(dir.join(manifest::MANIFEST_NAME))
        .map_err(|e| CliError::stage("report", format!("no manifest in {}: {e}", dir.display())))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::stage("report", e))?;
    println!(
        "prlab {} config {}",
        m.tool_version,
        &m.config_hash[..12.min(m.config_hash.len())]
    );
    for s in &m.stages {
        println!(
            "  stage {:<10} {:>9.3} s  {}",
            s.name,
            s.seconds,
            if s.passed { "ok" } else { "FAILED" }
        );
        if let Some(n) = &s.note {
            println!("      {n}");
        }
    }
    for f in &m.files {
        println!("  file  {:<24} {:>10} bytes", f.path.display(), f.bytes);
    }
    let problems = m.audit(dir);
    for p in &problems {
        println!("  problem: {p}");
    }
    Ok(Outcome {
        passed: problems.is_empty() && m.stages.iter().all(|s| s.passed),
        out_dir: dir.to_path_buf(),
        files: Vec::new(),
    })
}
