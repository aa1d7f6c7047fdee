//! Command-line driver: configuration, run orchestration and output files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::basis::MAX_DEGREE;
use crate::diagnostics::{error_norms, tube_row_cut, RunReport};
use crate::error::MhdError;
use crate::field::DgField;
use crate::mesh::Mesh;
use crate::physics::{pressure_raw, Eos, NCOMP};
use crate::problems::{make_problem, Overrides, ProblemKind, ProblemSpec};
use crate::timestep::{Solver, SolverOptions};

/// Header of snapshot CSV files.
pub const SNAPSHOT_HEADER: &str = "x,y,rho,mx,my,mz,Bx,By,Bz,E,p";

/// Header of the rotated-tube row cut.
pub const CUT_HEADER: &str = "x,rho,p,v_par,v_perp,B_par,B_perp";

const CONFIG_KEYS: [&str; 12] = [
    "problem",
    "nx",
    "ny",
    "degree",
    "cfl",
    "tend",
    "pp_limiter",
    "tvb_m",
    "out",
    "dump_every",
    "seed",
    "threads",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("positivity failure: {0}")]
    Positivity(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Positivity(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// TVB limiter choice: the problem's recommendation, off, or an explicit constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TvbSetting {
    Default,
    Off,
    M(f64),
}

impl std::str::FromStr for TvbSetting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "default" => Ok(Self::Default),
            "off" | "none" => Ok(Self::Off),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|m| *m >= 0.0)
                .map(Self::M)
                .ok_or_else(|| format!("invalid TVB constant '{v}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub nx: usize,
    pub ny: usize,
    pub degree: usize,
    pub cfl: f64,
    /// End time; `None` uses the problem default.
    pub t_end: Option<f64>,
    pub pp_limiter: bool,
    pub tvb_m: TvbSetting,
    pub out: PathBuf,
    /// Snapshot every this many steps; 0 writes only the first and last.
    pub dump_every: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
}

#[derive(Parser, Debug)]
#[command(name = "ppmhd", about = "Positivity-preserving DG solver for 2D ideal MHD")]
struct Args {
    /// Flat key=value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    /// Fraction of the theoretical step size, in (0, 1].
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    no_pp_limiter: bool,
    /// TVB constant, "off", or "default".
    #[arg(long)]
    tvb_m: Option<TvbSetting>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_every: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", n + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<V: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<V>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<V>()
                .map_err(|_| CliError::Usage(format!("invalid value '{v}' for {key}")))
        })
        .transpose()
}

fn parse_bool(v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!("invalid boolean '{v}'"))),
    }
}

/// Builds a validated [`RunConfig`] from command-line arguments (program name first).
pub fn parse_config<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let file = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    let problem = args
        .problem
        .clone()
        .or_else(|| file.get("problem").cloned())
        .ok_or_else(|| CliError::Usage("no problem given (--problem)".into()))?;
    let spec = make_problem(&problem, Overrides::default()).map_err(|e| CliError::Usage(e.to_string()))?;
    let pp_file = file.get("pp_limiter").map(|v| parse_bool(v)).transpose()?;
    let tvb_file = file
        .get("tvb_m")
        .map(|v| v.parse::<TvbSetting>().map_err(CliError::Usage))
        .transpose()?;
    let cfg = RunConfig {
        problem,
        nx: args.nx.or(parse_value(&file, "nx")?).unwrap_or(spec.default_mesh.0),
        ny: args.ny.or(parse_value(&file, "ny")?).unwrap_or(spec.default_mesh.1),
        degree: args.degree.or(parse_value(&file, "degree")?).unwrap_or(2),
        cfl: args.cfl.or(parse_value(&file, "cfl")?).unwrap_or(0.15),
        t_end: args.tend.or(parse_value(&file, "tend")?),
        pp_limiter: if args.no_pp_limiter { false } else { pp_file.unwrap_or(true) },
        tvb_m: args.tvb_m.or(tvb_file).unwrap_or(TvbSetting::Default),
        out: args
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out")),
        dump_every: args.dump_every.or(parse_value(&file, "dump_every")?).unwrap_or(0),
        seed: args.seed.or(parse_value(&file, "seed")?).unwrap_or(0),
        threads: args.threads.or(parse_value(&file, "threads")?).unwrap_or(0),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.degree > MAX_DEGREE {
        return Err(CliError::Usage(format!("degree {} not in 0..={MAX_DEGREE}", cfg.degree)));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(CliError::Usage(format!("cfl {} not in (0, 1]", cfg.cfl)));
    }
    if cfg.nx < 4 || cfg.ny < 4 {
        // The rotated tube is the one problem run on two rows.
        if !(cfg.problem == "rotated_tube" && cfg.nx >= 4 && cfg.ny >= 1) {
            return Err(CliError::Usage(format!("mesh {}x{} below 4x4", cfg.nx, cfg.ny)));
        }
    }
    if let Some(t) = cfg.t_end {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("end time {t} must be positive")));
        }
    }
    Ok(())
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub t_final: f64,
    pub steps: usize,
    pub files: Vec<PathBuf>,
}

fn snapshot_rows<E: Eos<f64>>(field: &DgField<f64>, mesh: &Mesh<f64>, eos: &E) -> Vec<(f64, f64, [f64; NCOMP], f64)> {
    let mut rows = Vec::with_capacity(mesh.nx() * mesh.ny());
    for j in 0..mesh.ny() as isize {
        for i in 0..mesh.nx() as isize {
            let (x, y) = mesh.center(i, j);
            let u = field.average(i, j);
            rows.push((x, y, u, pressure_raw(&u, eos)));
        }
    }
    rows
}

/// Writes the cell averages as `snapshot_<step>.csv` and `snapshot_<step>.vtk` in `dir`.
pub fn write_snapshot<E: Eos<f64>>(
    field: &DgField<f64>,
    mesh: &Mesh<f64>,
    eos: &E,
    t: f64,
    step: usize,
    dir: &Path,
) -> io::Result<[PathBuf; 2]> {
    fs::create_dir_all(dir)?;
    let rows = snapshot_rows(field, mesh, eos);
    let csv = dir.join(format!("snapshot_{step:06}.csv"));
    let mut w = BufWriter::new(File::create(&csv)?);
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for (x, y, u, p) in &rows {
        write!(w, "{x},{y}")?;
        for v in u {
            write!(w, ",{v}")?;
        }
        writeln!(w, ",{p}")?;
    }
    w.flush()?;

    let vtk = dir.join(format!("snapshot_{step:06}.vtk"));
    let mut w = BufWriter::new(File::create(&vtk)?);
    let (x0, y0) = mesh.center(0, 0);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "ppmhd cell averages t={t}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} 1", mesh.nx(), mesh.ny())?;
    writeln!(w, "ORIGIN {x0} {y0} 0")?;
    writeln!(w, "SPACING {} {} 1", mesh.dx(), mesh.dy())?;
    writeln!(w, "POINT_DATA {}", rows.len())?;
    let names = ["rho", "mx", "my", "mz", "Bx", "By", "Bz", "E", "p"];
    for (k, name) in names.iter().enumerate() {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for (_, _, u, p) in &rows {
            writeln!(w, "{}", if k < NCOMP { u[k] } else { *p })?;
        }
    }
    w.flush()?;
    Ok([csv, vtk])
}

/// Writes the rotated-tube profile of row `j` (0-based) as `cut_j<j+1>.csv`.
pub fn write_tube_cut<E: Eos<f64>>(field: &DgField<f64>, mesh: &Mesh<f64>, eos: &E, j: usize, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("cut_j{}.csv", j + 1));
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "{CUT_HEADER}")?;
    for r in tube_row_cut(field, mesh, eos, j) {
        writeln!(w, "{},{},{},{},{},{},{}", r.x, r.rho, r.p, r.v_par, r.v_perp, r.b_par, r.b_perp)?;
    }
    w.flush()?;
    Ok(path)
}

fn map_run_error(e: MhdError) -> CliError {
    match e {
        MhdError::Io(e) => CliError::Io(e),
        MhdError::PositivityFailure(m) => CliError::Positivity(m),
        MhdError::CflViolation { dt, limit } => {
            CliError::Positivity(format!("step size {dt} exceeds limit {limit} after restarts"))
        }
        MhdError::Inadmissible(m) => CliError::Positivity(m),
        other => CliError::Usage(other.to_string()),
    }
}

fn write_summary(path: &Path, entries: &[(&str, String)]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()
}

/// Runs a configuration, writing snapshots, `report.csv` and `summary.txt` to `cfg.out`.
///
/// On a positivity failure the partial report and the summary are still written.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    validate(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let spec: ProblemSpec = make_problem(
        &cfg.problem,
        Overrides {
            t_end: cfg.t_end,
            ..Default::default()
        },
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mesh = spec.build_mesh(cfg.nx, cfg.ny).map_err(|e| CliError::Usage(e.to_string()))?;
    let eos = spec.eos();
    let opts = SolverOptions {
        cfl: cfg.cfl,
        pp_limiter: cfg.pp_limiter,
        tvb_m: match cfg.tvb_m {
            TvbSetting::Default => spec.tvb_m,
            TvbSetting::Off => None,
            TvbSetting::M(m) => Some(m),
        },
        ..SolverOptions::default()
    };
    fs::create_dir_all(&cfg.out)?;
    let mut files = Vec::new();
    let mut solver = Solver::from_initial(mesh.clone(), eos, cfg.degree, |x, y| spec.initial(x, y), opts).map_err(map_run_error)?;
    files.extend(write_snapshot(solver.field(), &mesh, &eos, 0.0, 0, &cfg.out)?);

    let mut report = RunReport::new();
    let mut failure = None;
    while solver.time() < spec.t_end {
        match solver.step(spec.t_end) {
            Ok(rec) => {
                report.push(&rec);
                if cfg.dump_every > 0 && solver.steps() % cfg.dump_every == 0 && solver.time() < spec.t_end {
                    files.extend(write_snapshot(solver.field(), &mesh, &eos, solver.time(), solver.steps(), &cfg.out)?);
                }
            }
            Err(e) => {
                failure = Some(map_run_error(e));
                break;
            }
        }
    }

    let mut summary: Vec<(&str, String)> = vec![
        ("problem", cfg.problem.clone()),
        ("nx", cfg.nx.to_string()),
        ("ny", cfg.ny.to_string()),
        ("degree", cfg.degree.to_string()),
        ("cfl", cfg.cfl.to_string()),
        ("pp_limiter", cfg.pp_limiter.to_string()),
        ("seed", cfg.seed.to_string()),
        ("t_end", spec.t_end.to_string()),
        ("t_final", solver.time().to_string()),
        ("steps", solver.steps().to_string()),
    ];
    if let Some(v) = report.min_theta() {
        summary.push(("min_theta", v.to_string()));
    }
    if let Some(v) = report.max_vartheta_ratio() {
        summary.push(("max_vartheta_ratio", v.to_string()));
    }
    if failure.is_none() {
        files.extend(write_snapshot(solver.field(), &mesh, &eos, solver.time(), solver.steps(), &cfg.out)?);
        if spec.has_exact() {
            let t = solver.time();
            let n = error_norms(solver.field(), &mesh, |x, y| spec.exact(x, y, t).expect("exact solution"), cfg.degree + 2)
                .map_err(map_run_error)?;
            summary.push(("l1_rho", n.l1[0].to_string()));
            summary.push(("l2_rho", n.l2[0].to_string()));
            summary.push(("linf_rho", n.linf[0].to_string()));
            report.norms = Some(n);
        }
        if matches!(spec.kind, ProblemKind::RotatedTube) {
            files.push(write_tube_cut(solver.field(), &mesh, &eos, 0, &cfg.out)?);
            let dev = crate::diagnostics::b_parallel_deviation(&tube_row_cut(solver.field(), &mesh, &eos, 0));
            summary.push(("b_par_max_deviation", dev.to_string()));
        }
    }
    summary.push((
        "status",
        match &failure {
            None => "completed".to_string(),
            Some(e) => e.to_string().replace('\n', " "),
        },
    ));
    let report_path = cfg.out.join("report.csv");
    report.write_csv(BufWriter::new(File::create(&report_path)?))?;
    files.push(report_path);
    let summary_path = cfg.out.join("summary.txt");
    write_summary(&summary_path, &summary)?;
    files.push(summary_path);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunOutcome {
        report,
        t_final: solver.time(),
        steps: solver.steps(),
        files,
    })
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Args::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            return 0;
        }
    }
    let result = parse_config(argv).and_then(|cfg| {
        let out = run(&cfg)?;
        println!(
            "completed {} to t={} in {} steps; outputs in {}",
            cfg.problem,
            out.t_final,
            out.steps,
            cfg.out.display()
        );
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ppmhd: {e}");
            e.exit_code()
        }
    }
}
