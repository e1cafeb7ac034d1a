mod function;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hball_core::admissibility::{run_sweep, SweepConfig};
use hball_core::circle::{
    analyticity_defect, sup_norm, BoundaryGrid, BoundarySample, DEFAULT_OVERSAMPLE,
};
use hball_core::constraints::{fourier_constraints, random_constraints, ConstraintSet};
use hball_core::outer::{
    default_ladder, exposed_mass, extremality_test, inner_defect, make_outer, sublevel_set,
    DEFAULT_MARGIN,
};
use hball_core::report::{sample_records, ComplexRecord, Envelope};
use hball_core::witness::{
    extreme_violation_witness, strong_violation_witness, tn_corpus, ConstantMethod, StrongOptions,
    TnCorpusConfig, Witness, NAZAROV_C,
};
use hball_core::{Degeneracy, Error, Tolerances};
use serde::Serialize;

use function::FunctionSpec;

const DEFAULT_N_GRID: usize = 8192;

#[derive(Debug, Parser)]
#[command(
    name = "hball",
    version,
    about = "Geometry of the unit ball of constrained H-infinity spaces"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Global {
    /// Grid size (power of two, at least 64) [default: 8192]
    #[arg(long, global = true)]
    n_grid: Option<usize>,
    /// Oversampling factor used for sup norms [default: 4]
    #[arg(long, global = true)]
    oversample: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true)]
    tol_sup: Option<f64>,
    #[arg(long, global = true)]
    tol_kernel: Option<f64>,
    #[arg(long, global = true)]
    floor: Option<f64>,
}

impl Global {
    fn grid(&self) -> Result<BoundaryGrid, Error> {
        BoundaryGrid::new(
            self.n_grid.unwrap_or(DEFAULT_N_GRID),
            self.oversample.unwrap_or(DEFAULT_OVERSAMPLE),
        )
    }

    fn tolerances(&self, base: Tolerances) -> Result<Tolerances, Error> {
        let tol = Tolerances {
            tol_sup: self.tol_sup.unwrap_or(base.tol_sup),
            tol_kernel: self.tol_kernel.unwrap_or(base.tol_kernel),
            floor: self.floor.unwrap_or(base.floor),
            ..base
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Inner defect, extremality ladder, exposed mass and sublevel measures
    Classify {
        #[command(subcommand)]
        function: FunctionSpec,
    },
    /// Build a perturbation showing that a function is not (strongly) extreme
    Witness(WitnessArgs),
    /// Run the (N, eta, gamma) sweep and check the sandwich bounds
    Sweep(SweepArgs),
    /// Check the Turán–Nazarov inequality on a random corpus
    Tn(TnArgs),
    /// Outer function from a modulus file
    Outer {
        /// JSON array of nonnegative reals, one per grid point
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Extreme,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ConstantChoice {
    Nazarov,
    Empirical,
}

#[derive(Debug, Clone, Args, Serialize)]
struct WitnessArgs {
    #[arg(long, value_enum, default_value_t = Mode::Strong)]
    mode: Mode,
    /// Sublevel for strong witnesses
    #[arg(long)]
    eta: Option<f64>,
    /// Allowed growth `‖f ± g‖∞ ≤ 1 + delta` for strong witnesses
    #[arg(long)]
    delta: Option<f64>,
    /// `fourier:N` or `random:N:DEGREE:SEED`; defaults to the function's own
    /// constraints, else `fourier:1`
    #[arg(long)]
    phi: Option<String>,
    #[arg(long, value_enum, default_value_t = ConstantChoice::Nazarov)]
    constant: ConstantChoice,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: usize,
    #[command(subcommand)]
    function: FunctionSpec,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepArgs {
    /// JSON file mirroring the sweep configuration (defaults when absent)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the probe trials per cell
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct TnArgs {
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    max_terms: usize,
    #[arg(long, default_value_t = 32)]
    max_freq: i64,
    #[arg(long, default_value_t = 0.05)]
    min_measure: f64,
    /// Constant in the inequality
    #[arg(long, default_value_t = NAZAROV_C)]
    c: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// Why a command did not succeed.
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(Error::Degenerate(Degeneracy::EmptySublevel)) => 4,
            Failure::Core(Error::Degenerate(_)) => 3,
            Failure::Core(Error::Conditioning(_)) => 5,
            Failure::Core(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

/// Rendered output plus whether every check passed.
struct Outcome {
    json: String,
    csv: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => match write_outcome(&cli.global, &cli.command, &outcome) {
            Ok(()) if outcome.ok => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(f) => {
                eprintln!("error: {}", f.message());
                ExitCode::from(f.exit_code())
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_outcome(global: &Global, command: &Command, outcome: &Outcome) -> Result<(), Failure> {
    let selected = match global.format {
        Format::Json => &outcome.json,
        Format::Csv => &outcome.csv,
    };
    match (&global.out, command) {
        // Sweeps always produce both files next to each other.
        (Some(path), Command::Sweep(_)) => {
            write_file(&path.with_extension("json"), &outcome.json)?;
            write_file(&path.with_extension("csv"), &outcome.csv)
        }
        (Some(path), _) => write_file(path, selected),
        (None, _) => {
            let mut stdout = std::io::stdout().lock();
            let written = stdout
                .write_all(selected.as_bytes())
                .and_then(|_| stdout.flush());
            match written {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Usage(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

#[derive(Serialize)]
struct Echo<'a, C: Serialize> {
    global: &'a Global,
    command: &'a Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    resolved: Option<C>,
}

fn envelope<C: Serialize, R: Serialize>(
    cli: &Cli,
    resolved: Option<C>,
    results: R,
) -> Result<String, Failure> {
    let echo = Echo {
        global: &cli.global,
        command: &cli.command,
        resolved,
    };
    Ok(Envelope::new(echo, results).to_json()?)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Classify { function } => classify(cli, function),
        Command::Witness(args) => witness(cli, args),
        Command::Sweep(args) => sweep(cli, args),
        Command::Tn(args) => tn(cli, args),
        Command::Outer { file } => outer(cli, file),
    }
}

#[derive(Serialize)]
struct SublevelRow {
    eta: f64,
    measure: f64,
}

#[derive(Serialize)]
struct ClassifyResults {
    /// INNER, or the verdict of the floor ladder.
    classification: String,
    sup_norm: f64,
    inner_defect: f64,
    analyticity: f64,
    extremality: Option<hball_core::outer::ExtremalityReport>,
    extremality_error: Option<String>,
    exposed_mass: f64,
    sublevel: Vec<SublevelRow>,
}

fn classify(cli: &Cli, spec: &FunctionSpec) -> Result<Outcome, Failure> {
    let grid = cli.global.grid()?;
    let tol = cli.global.tolerances(Tolerances::default())?;
    let f = spec.build(grid, &tol)?.f;
    let defect = inner_defect(&f);
    let (extremality, extremality_error) =
        match extremality_test(&f, &default_ladder(), tol.tol_sup) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let classification = if defect <= tol.tol_sup {
        "INNER".to_string()
    } else if let Some(r) = &extremality {
        serde_json::to_value(r.verdict)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    } else {
        "UNDETERMINED".to_string()
    };
    let sublevel = (1..10)
        .map(|i| {
            let eta = i as f64 / 10.0;
            sublevel_set(&f, eta).map(|s| SublevelRow {
                eta,
                measure: s.measure,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results = ClassifyResults {
        classification,
        sup_norm: sup_norm(&f),
        inner_defect: defect,
        analyticity: analyticity_defect(&f),
        extremality,
        extremality_error,
        exposed_mass: exposed_mass(&f, tol.tol_sup),
        sublevel,
    };
    let mut rows = vec![
        vec![
            "sup_norm".into(),
            String::new(),
            results.sup_norm.to_string(),
        ],
        vec![
            "inner_defect".into(),
            String::new(),
            results.inner_defect.to_string(),
        ],
        vec![
            "analyticity".into(),
            String::new(),
            results.analyticity.to_string(),
        ],
        vec![
            "exposed_mass".into(),
            tol.tol_sup.to_string(),
            results.exposed_mass.to_string(),
        ],
    ];
    if let Some(r) = &results.extremality {
        rows.extend(
            r.floor_ladder
                .iter()
                .zip(&r.integrals)
                .map(|(t, i)| vec!["log_integral".into(), t.to_string(), i.to_string()]),
        );
    }
    rows.extend(results.sublevel.iter().map(|s| {
        vec![
            "sublevel_measure".into(),
            s.eta.to_string(),
            s.measure.to_string(),
        ]
    }));
    Ok(Outcome {
        csv: csv_text(&["quantity", "parameter", "value"], rows),
        json: envelope::<(), _>(cli, None, &results)?,
        ok: true,
    })
}

fn parse_phi(text: &str) -> Result<ConstraintSet, Failure> {
    let usage = || {
        Failure::Usage(format!(
            "--phi expects fourier:N or random:N:DEGREE:SEED, got {text:?}"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| usage());
    match parts.as_slice() {
        ["fourier", n] => Ok(fourier_constraints(num(n)? as usize)?),
        ["random", n, degree, seed] => Ok(random_constraints(
            num(n)? as usize,
            num(degree)? as usize,
            num(seed)?,
        )?),
        _ => Err(usage()),
    }
}

#[derive(Serialize)]
struct WitnessResults<'a> {
    witness: &'a Witness,
    violations: Vec<String>,
    valid: bool,
}

fn witness(cli: &Cli, args: &WitnessArgs) -> Result<Outcome, Failure> {
    let grid = cli.global.grid()?;
    let tol = cli.global.tolerances(Tolerances::default())?;
    let built = args.function.build(grid, &tol)?;
    let phi = match (&args.phi, built.constraints) {
        (Some(text), _) => parse_phi(text)?,
        (None, Some(c)) => c,
        (None, None) => fourier_constraints(1)?,
    };
    let f = built.f;
    let w = match args.mode {
        Mode::Extreme => extreme_violation_witness(&f, &phi, &tol)?,
        Mode::Strong => {
            let (Some(eta), Some(delta)) = (args.eta, args.delta) else {
                return Err(Failure::Usage(
                    "strong witnesses need --eta and --delta".into(),
                ));
            };
            let opts = StrongOptions {
                margin: args.margin,
                constant: match args.constant {
                    ConstantChoice::Nazarov => ConstantMethod::Nazarov,
                    ConstantChoice::Empirical => ConstantMethod::Empirical,
                },
                seed: cli.global.seed.unwrap_or(0),
            };
            strong_violation_witness(&f, &phi, eta, delta, &tol, &opts)?
        }
    };
    let mut violations = w.violations(&tol);
    if !w.target_met {
        violations.push(format!(
            "norm_g = {} is below the target {}",
            w.norm_g, w.target_bound
        ));
    }
    let plus = f.add(&w.g)?;
    let minus = f.sub(&w.g)?;
    let rows = (0..grid.n_grid()).map(|j| {
        let g = w.g.values()[j];
        vec![
            grid.angle(j).to_string(),
            g.re.to_string(),
            g.im.to_string(),
            plus.values()[j].norm().to_string(),
            minus.values()[j].norm().to_string(),
        ]
    });
    let csv = csv_text(
        &["theta", "g_re", "g_im", "abs_f_plus_g", "abs_f_minus_g"],
        rows,
    );
    let results = WitnessResults {
        witness: &w,
        valid: violations.is_empty(),
        violations,
    };
    Ok(Outcome {
        json: envelope::<(), _>(cli, None, &results)?,
        csv,
        ok: results.valid,
    })
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Result<Outcome, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<SweepConfig>(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => SweepConfig::default(),
    };
    let g = &cli.global;
    if let Some(n) = g.n_grid {
        config.n_grid = n;
    }
    if let Some(o) = g.oversample {
        config.oversample = o;
    }
    if let Some(s) = g.seed {
        config.seed = s;
    }
    if let Some(t) = args.trials {
        config.trials_per_cell = t;
    }
    config.tolerances = g.tolerances(config.tolerances)?;
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let report = run_sweep(&config)?;
    Ok(Outcome {
        json: envelope(cli, Some(&config), &report)?,
        csv: report.to_csv()?,
        ok: report.all_sandwich_ok && report.total_violations == 0,
    })
}

fn tn(cli: &Cli, args: &TnArgs) -> Result<Outcome, Failure> {
    let grid = cli.global.grid()?;
    let cfg = TnCorpusConfig {
        count: args.count,
        max_terms: args.max_terms,
        max_freq: args.max_freq,
        min_measure: args.min_measure,
        c: args.c,
        tol: args.tol,
        seed: cli.global.seed.unwrap_or(0),
    };
    let summary = tn_corpus(grid, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let csv = csv_text(
        &[
            "count",
            "violations",
            "max_ratio",
            "max_ratio_single_term",
            "min_measure_seen",
        ],
        [vec![
            summary.count.to_string(),
            summary.violations.to_string(),
            summary.max_ratio.to_string(),
            opt(summary.max_ratio_single_term),
            summary.min_measure_seen.to_string(),
        ]],
    );
    Ok(Outcome {
        json: envelope(cli, Some(&cfg), &summary)?,
        csv,
        ok: summary.violations == 0,
    })
}

#[derive(Serialize)]
struct OuterResults {
    n_grid: usize,
    modulus_error: f64,
    analyticity: f64,
    /// `G(0) = exp(∫ log w dm)`.
    value_at_origin: f64,
    boundary: Vec<ComplexRecord>,
}

fn outer(cli: &Cli, file: &Path) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", file.display())))?;
    let modulus: Vec<f64> = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    if let Some(n) = cli.global.n_grid {
        if n != modulus.len() {
            return Err(Failure::Usage(format!(
                "--n-grid {n} does not match the {} samples in {}",
                modulus.len(),
                file.display()
            )));
        }
    }
    let grid = BoundaryGrid::new(
        modulus.len(),
        cli.global.oversample.unwrap_or(DEFAULT_OVERSAMPLE),
    )?;
    let tol = cli.global.tolerances(Tolerances::default())?;
    let w = BoundarySample::from_real(grid, &modulus)?;
    let result = make_outer(&w, tol.floor)?;
    let log_mean =
        modulus.iter().map(|m| m.max(tol.floor).ln()).sum::<f64>() / modulus.len() as f64;
    let rows = (0..grid.n_grid()).map(|j| {
        let v = result.boundary.values()[j];
        vec![
            grid.angle(j).to_string(),
            v.re.to_string(),
            v.im.to_string(),
            v.norm().to_string(),
            modulus[j].to_string(),
        ]
    });
    let results = OuterResults {
        n_grid: grid.n_grid(),
        modulus_error: result.modulus_error,
        analyticity: result.analyticity,
        value_at_origin: log_mean.exp(),
        boundary: sample_records(&result.boundary),
    };
    Ok(Outcome {
        csv: csv_text(&["theta", "re", "im", "abs", "modulus"], rows),
        json: envelope::<(), _>(cli, None, &results)?,
        ok: true,
    })
}
