use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liectrl::analysis::{decomposition_identities, DecompositionIdentities, NumericEvidence};
use liectrl::simulation::{
    control_set_estimate, duality_check, integrate, semigroup_check, ControlPiece, DualityCheck,
    EstimateFlags, LogDynamics, OccupancyGrid, SemigroupCheck,
};
use liectrl::spectral::{verify_grading, DecompositionExport, GradingReport};
use liectrl::{classify, cross_check, decompose, load, ClassificationReport, CrossCheck, Error, LoadedSystem, Vector};
use log::info;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "liectrl", version, about = "Analyze and simulate linear control systems on nilpotent Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral decomposition and classification of the control set.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Also compute grids to supply the compactness evidence for boundedness.
        #[arg(long)]
        evidence: bool,
    },
    /// Integrate one trajectory from a control script.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// JSON list of `{"duration": t, "u": [..]}` segments.
        #[arg(long)]
        controls: PathBuf,
        /// Initial point in exponential coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
    },
    /// Reachable and controllable grids.
    Reach {
        #[command(flatten)]
        common: Common,
    },
    /// Control set estimate with the theory cross-check.
    Controlset {
        #[command(flatten)]
        common: Common,
        /// Also run the duality and semigroup checks at the configured horizons.
        #[arg(long)]
        checks: bool,
    },
}

#[derive(Args)]
struct Common {
    /// System definition (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Time horizon; overrides the config.
    #[arg(long)]
    horizon: Option<f64>,
    /// Cells per axis; overrides the config.
    #[arg(long)]
    cells: Option<usize>,
    /// Dwell time of the sampled controls; overrides the config.
    #[arg(long)]
    dwell: Option<f64>,
    /// Worker threads for grid computations.
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for output files; without it results go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of stdout output when no directory is given.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn load(&self) -> Result<LoadedSystem, Error> {
        if let Some(k) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| Error::invalid(format!("cannot configure threads: {e}")))?;
        }
        let mut sys = load(&self.config)?;
        let sim = &mut sys.simulation;
        if let Some(t) = self.horizon {
            sim.horizon = t;
        }
        if let Some(n) = self.cells {
            sim.cells = n;
        }
        if let Some(d) = self.dwell {
            sim.dwell = d;
        }
        sim.validate()?;
        sim.layout(sys.spec.dim())?;
        info!("loaded {} (dimension {})", self.config.display(), sys.spec.dim());
        Ok(sys)
    }
}

struct Output<'a> {
    dir: Option<&'a Path>,
    format: Format,
}

impl Output<'_> {
    fn new(common: &Common) -> Result<Output<'_>, Error> {
        if let Some(dir) = &common.out {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Output {
            dir: common.out.as_deref(),
            format: common.format,
        })
    }

    fn write(&self, file: &str, contents: &str) -> Result<(), Error> {
        if let Some(dir) = self.dir {
            let path = dir.join(file);
            std::fs::write(&path, contents)?;
            info!("wrote {}", path.display());
        }
        Ok(())
    }

    /// Writes `csv` and `json` files, or prints the one matching `--format`.
    fn emit(&self, stem: &str, csv: Option<&str>, json: &str, text: &str) -> Result<(), Error> {
        match (self.dir, self.format) {
            (Some(_), _) => {
                if let Some(csv) = csv {
                    self.write(&format!("{stem}.csv"), csv)?;
                }
                self.write(&format!("{stem}.json"), json)?;
                say(text)?;
            }
            (None, Format::Csv) => say(csv.unwrap_or(text))?,
            (None, Format::Json) => say(&format!("{json}\n"))?,
        }
        Ok(())
    }
}

/// Prints to stdout, treating a closed pipe as success.
fn say(text: &str) -> Result<(), Error> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[derive(Serialize)]
struct AnalysisReport<'a> {
    name: &'a str,
    dim: usize,
    nilpotency_class: Option<usize>,
    decomposition: DecompositionExport,
    grading: GradingReport,
    identities: DecompositionIdentities,
    #[serde(skip_serializing_if = "Option::is_none")]
    evidence: Option<NumericEvidence>,
    classification: &'a ClassificationReport,
}

fn analyze(common: &Common, evidence: bool) -> Result<(), Error> {
    let sys = common.load()?;
    let out = Output::new(common)?;
    let spec = &sys.spec;
    let dec = decompose(&spec.algebra, &spec.derivation, &sys.tolerances)?;
    let grading = verify_grading(&spec.algebra, &spec.derivation, &dec, &sys.tolerances);
    if !grading.passed {
        return Err(Error::inconsistent("eigenspace grading", grading.worst_residual));
    }
    let identities = decomposition_identities(&dec, spec, &sys.tolerances);
    if identities.applicable && !identities.passed() {
        return Err(Error::inconsistent("decomposition identities", 1.0));
    }
    let ev = if evidence {
        let problem = sys.simulation.problem(spec)?;
        Some(control_set_estimate(spec, &problem, sys.simulation.horizon)?.compactness_evidence(&dec))
    } else {
        None
    };
    let report = classify(spec, &dec, ev.as_ref())?;
    let (p, z, m) = dec.dims();
    let text = format!(
        "system: {}\ndimensions g+ / g0 / g-: {p} / {z} / {m}\ngrading residual: {:.2e}\n{}",
        sys.name,
        grading.worst_residual,
        report.to_text()
    );
    let json = to_json(&AnalysisReport {
        name: &sys.name,
        dim: spec.dim(),
        nilpotency_class: spec.nilpotency_class(),
        decomposition: dec.export(),
        grading,
        identities,
        evidence: ev,
        classification: &report,
    })?;
    match (out.dir, out.format) {
        (None, Format::Csv) => say(&text)?,
        _ => out.emit("analysis", None, &json, &text)?,
    }
    Ok(())
}

fn simulate(common: &Common, controls: &Path, x0: Option<&[f64]>) -> Result<(), Error> {
    let sys = common.load()?;
    let out = Output::new(common)?;
    let text = std::fs::read_to_string(controls)?;
    let mut schedule: Vec<ControlPiece> = serde_json::from_str(&text)?;
    if schedule.is_empty() {
        return Err(Error::invalid("control script is empty"));
    }
    if let Some(u) = schedule.iter().find(|p| !sys.spec.omega.contains(&p.u)) {
        return Err(Error::invalid(format!("control value {:?} lies outside the control range", u.u)));
    }
    if let Some(t) = common.horizon {
        schedule = clip_schedule(schedule, t);
    }
    let d = sys.spec.dim();
    let start = match x0 {
        Some(x) if x.len() != d => return Err(Error::DimensionMismatch { expected: d, found: x.len() }),
        Some(x) => Vector::from_column_slice(x),
        None => Vector::zeros(d),
    };
    let f = LogDynamics::new(&sys.spec)?;
    let traj = integrate(&f, &start, &schedule, sys.simulation.trajectory_dt, sys.simulation.safety_radius)?;
    let csv = traj.to_csv();
    let end: Vec<f64> = traj.last().iter().copied().collect();
    let json = to_json(&serde_json::json!({
        "name": sys.name,
        "duration": traj.duration(),
        "steps": traj.times.len() - 1,
        "final": end,
    }))?;
    let text = format!("final point at t = {}: {:?}\n", traj.duration(), end);
    match (out.dir, out.format) {
        (None, Format::Csv) => say(&csv)?,
        _ => out.emit("trajectory", Some(&csv), &json, &text)?,
    }
    Ok(())
}

/// Truncates the schedule at `t`, or holds the last control up to `t`.
fn clip_schedule(schedule: Vec<ControlPiece>, t: f64) -> Vec<ControlPiece> {
    let mut out = Vec::new();
    let mut left = t;
    for p in &schedule {
        if left <= 0.0 {
            break;
        }
        let duration = p.duration.min(left);
        out.push(ControlPiece { duration, u: p.u.clone() });
        left -= duration;
    }
    if left > 1e-12 {
        let u = schedule.last().map(|p| p.u.clone()).unwrap_or_default();
        out.push(ControlPiece { duration: left, u });
    }
    out
}

#[derive(Serialize)]
struct GridSummary {
    cells: usize,
    coverage: f64,
    boundary_hits: bool,
}

impl From<&OccupancyGrid> for GridSummary {
    fn from(g: &OccupancyGrid) -> Self {
        Self {
            cells: g.count(),
            coverage: g.coverage(),
            boundary_hits: g.has_boundary_hits(),
        }
    }
}

#[derive(Serialize)]
struct GridReport<'a> {
    name: &'a str,
    horizon: f64,
    cells_per_axis: usize,
    reachable: GridSummary,
    controllable: GridSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    control_set: Option<GridSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flags: Option<EstimateFlags>,
    cross_check: &'a CrossCheck,
    agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    duality: Option<DualityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    semigroup: Option<SemigroupCheck>,
}

fn grids(common: &Common, control_set: bool, checks: bool) -> Result<(), Error> {
    let sys = common.load()?;
    let out = Output::new(common)?;
    let spec = &sys.spec;
    let sim = &sys.simulation;
    let problem = sim.problem(spec)?;
    let est = control_set_estimate(spec, &problem, sim.horizon)?;
    let dec = decompose(&spec.algebra, &spec.derivation, &sys.tolerances)?;
    let report = classify(spec, &dec, Some(&est.compactness_evidence(&dec)))?;
    let cross = cross_check(&report, &est);
    let (duality, semigroup) = if checks {
        let [t1, t2] = sim.semigroup_horizons;
        (
            Some(duality_check(spec, &problem, sim.duality_horizon)?),
            Some(semigroup_check(spec, &problem, t1, t2)?),
        )
    } else {
        (None, None)
    };
    let summary = GridReport {
        name: &sys.name,
        horizon: sim.horizon,
        cells_per_axis: sim.cells,
        reachable: (&est.reach).into(),
        controllable: (&est.controllable).into(),
        control_set: control_set.then(|| (&est.estimate).into()),
        flags: control_set.then_some(est.flags),
        cross_check: &cross,
        agree: cross.all_agree(),
        duality,
        semigroup,
    };
    let json = to_json(&summary)?;
    let mut text = format!(
        "reachable: {} cells ({:.1}%), controllable: {} cells ({:.1}%)\n",
        est.reach.count(),
        100.0 * est.reach.coverage(),
        est.controllable.count(),
        100.0 * est.controllable.coverage()
    );
    if control_set {
        let f = &est.flags;
        text.push_str(&format!(
            "control set: {} cells, contains origin {}, bounded in box {}, components {}\n",
            est.estimate.count(),
            f.contains_origin,
            f.bounded_in_box,
            f.components
        ));
    }
    if let Some(d) = &duality {
        text.push_str(&format!("duality ratio at {}: {:.4}\n", d.horizon, d.ratio));
    }
    if let Some(s) = &semigroup {
        text.push_str(&format!("semigroup ratio at ({}, {}): {:.4}\n", s.t1, s.t2, s.ratio));
    }
    text.push_str(&cross.to_text());

    let (stem, main_grid) = if control_set {
        ("control_set", &est.estimate)
    } else {
        ("reach", &est.reach)
    };
    let csv = main_grid.to_csv();
    if !control_set {
        out.write("controllable.csv", &est.controllable.to_csv())?;
    }
    out.emit(stem, Some(&csv), &json, &text)?;
    if out.dir.is_none() && out.format == Format::Csv {
        eprint!("{}", cross.to_text());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Analyze { common, evidence } => analyze(common, *evidence),
        Command::Simulate { common, controls, x0 } => simulate(common, controls, x0.as_deref()),
        Command::Reach { common } => grids(common, false, false),
        Command::Controlset { common, checks } => grids(common, true, *checks),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LIECTRL_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
