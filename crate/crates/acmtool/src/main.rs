//! Command-line front end.
//!
//! Subcommands: `gen` (canonical representations), `index` (topological
//! invariants), `solve` (commuting approximants), `lattice` (quantum Hall
//! sweep), `selftest` (quick built-in checks).
//!
//! Exit codes: 0 success, 2 usage, 3 index undefined, 4 solver failure, 5 io.

use almostcomm::indices::{self, IndexError, IndexResult};
use almostcomm::io::{read_cmat, write_cmat, CsvCell, CsvWriter};
use almostcomm::lattice::{self, LatticeConfig, LatticeModel};
use almostcomm::linalg::ComplexMatrix;
use almostcomm::repr::{self, SelfDualStructure, SurfaceKind, SurfaceRep};
use almostcomm::transforms::{self, SquareSolver};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "acmtool", version, about = "Almost commuting matrices toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a canonical representation and write one CMAT file per matrix
    Gen(GenArgs),
    /// Compute a topological index from CMAT inputs
    Index(IndexArgs),
    /// Produce an exactly commuting representation near the input
    Solve(SolveArgs),
    /// Build the spherical lattice model and sweep the Bott index
    Lattice(LatticeArgs),
    /// Run quick built-in consistency checks
    Selftest,
}

#[derive(Args)]
struct GenArgs {
    /// Representation family: sphere (spin triple), torus (clock/shift pair),
    /// selfdual (doubled spin triple)
    #[arg(long)]
    kind: String,
    /// Twice the spin, for sphere/selfdual kinds
    #[arg(long = "two-s")]
    two_s: Option<usize>,
    /// Dimension, for the torus kind
    #[arg(long)]
    n: Option<usize>,
    /// Output path prefix
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IndexArgs {
    /// Formula: bott-spec, bott-trace, winding-det, winding-log, kappa,
    /// kappa1, z2
    #[arg(long)]
    formula: String,
    /// Input CMAT files (3 for sphere formulas, 2 for torus formulas)
    #[arg(long = "in", num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    /// Sample count for winding-det (0 = adaptive from 1024)
    #[arg(long, default_value_t = 0)]
    steps: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Surface: square, disk, annulus, cylinder, sphere
    #[arg(long)]
    surface: String,
    /// Solver strategy
    #[arg(long, default_value = "spectral-cluster")]
    solver: String,
    /// Input CMAT files
    #[arg(long = "in", num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    /// Output path prefix for the solved matrices
    #[arg(long)]
    out: PathBuf,
    /// Stage report CSV path
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct LatticeArgs {
    /// Optional flat `key = value` config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 560)]
    sites: usize,
    #[arg(long, default_value_t = 29)]
    latitudes: usize,
    #[arg(long, default_value_t = 100)]
    monopole: i64,
    #[arg(long, default_value_t = 0.0)]
    disorder: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated Fermi levels
    #[arg(long, default_value = "-1,-2,-3,-4", allow_hyphen_values = true)]
    fermi: String,
    /// Sweep CSV output path
    #[arg(long)]
    out: PathBuf,
    /// Optional spectrum CSV output path
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error path with status 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => run_gen(&args),
        Command::Index(args) => run_index(&args),
        Command::Solve(args) => run_solve(&args),
        Command::Lattice(args) => run_lattice(&args),
        Command::Selftest => run_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn io(message: impl std::fmt::Display) -> Self {
        Self {
            code: 5,
            message: message.to_string(),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

impl From<transforms::SolveError> for CliError {
    fn from(e: transforms::SolveError) -> Self {
        let code = match &e {
            transforms::SolveError::Index(_) => 3,
            _ => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<repr::ReprError> for CliError {
    fn from(e: repr::ReprError) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
}

impl From<lattice::LatticeError> for CliError {
    fn from(e: lattice::LatticeError) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

impl From<almostcomm::io::IoFormatError> for CliError {
    fn from(e: almostcomm::io::IoFormatError) -> Self {
        Self {
            code: 5,
            message: e.to_string(),
        }
    }
}

fn load_inputs(paths: &[PathBuf]) -> Result<Vec<ComplexMatrix>, CliError> {
    paths.iter().map(|p| Ok(read_cmat(p)?)).collect()
}

fn write_mats(prefix: &Path, labels: &[&str], mats: &[ComplexMatrix]) -> Result<(), CliError> {
    for (label, m) in labels.iter().zip(mats.iter()) {
        let path = PathBuf::from(format!("{}_{}.cmat", prefix.display(), label));
        write_cmat(&path, m).map_err(CliError::io)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_gen(args: &GenArgs) -> Result<(), CliError> {
    let (rep, labels): (SurfaceRep, Vec<&str>) = match args.kind.as_str() {
        "sphere" => {
            let two_s = args
                .two_s
                .ok_or_else(|| CliError::usage("--two-s is required for --kind sphere"))?;
            (repr::spin_triple(two_s), vec!["H1", "H2", "H3"])
        }
        "torus" => {
            let n = args
                .n
                .ok_or_else(|| CliError::usage("--n is required for --kind torus"))?;
            if n < 2 {
                return Err(CliError::usage("--n must be at least 2"));
            }
            (repr::clock_shift(n), vec!["U", "V"])
        }
        "selfdual" => {
            let two_s = args
                .two_s
                .ok_or_else(|| CliError::usage("--two-s is required for --kind selfdual"))?;
            (repr::self_dual_doubled_triple(two_s).0, vec!["H1", "H2", "H3"])
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown --kind '{other}' (expected sphere|torus|selfdual)"
            )))
        }
    };
    println!(
        "# acmtool v{VERSION} gen kind={} two_s={:?} n={:?}",
        args.kind, args.two_s, args.n
    );
    write_mats(&args.out, &labels, &rep.mats)?;
    let report = format!(
        "kind={} dim={} defect={:.12e}",
        rep.kind.name(),
        rep.dim(),
        rep.delta
    );
    let report_path = PathBuf::from(format!("{}_defect.txt", args.out.display()));
    std::fs::write(&report_path, format!("{report}\n")).map_err(CliError::io)?;
    println!("{report}");
    println!("wrote {}", report_path.display());
    Ok(())
}

fn print_index(r: &IndexResult) {
    let raw = match r.raw {
        Some(v) => format!("{v:.12e}"),
        None => "null".to_string(),
    };
    println!(
        "{{\"value\": {}, \"gap\": {:.12e}, \"method\": \"{}\", \"raw\": {}}}",
        r.value,
        r.gap,
        r.method.name(),
        raw
    );
}

fn run_index(args: &IndexArgs) -> Result<(), CliError> {
    let mats = load_inputs(&args.inputs)?;
    let need = |count: usize| -> Result<(), CliError> {
        if mats.len() != count {
            Err(CliError::usage(format!(
                "formula '{}' needs {count} input matrices, got {}",
                args.formula,
                mats.len()
            )))
        } else {
            Ok(())
        }
    };
    let result = match args.formula.as_str() {
        "bott-spec" => {
            need(3)?;
            let rep = SurfaceRep::new(SurfaceKind::Sphere, mats)?;
            indices::bott_spectral(&rep)?
        }
        "bott-trace" => {
            need(3)?;
            let rep = SurfaceRep::new(SurfaceKind::Sphere, mats)?;
            indices::bott_trace(&rep)?
        }
        "winding-det" => {
            need(2)?;
            indices::winding_det(&mats[0], &mats[1], args.steps)?
        }
        "winding-log" => {
            need(2)?;
            indices::winding_tracelog(&mats[0], &mats[1])?
        }
        "kappa" => {
            need(2)?;
            indices::kappa(&mats[0], &mats[1])?
        }
        "kappa1" => {
            need(2)?;
            indices::kappa1(&mats[0], &mats[1])?
        }
        "z2" => {
            need(3)?;
            let dim = mats[0].nrows();
            if dim % 2 != 0 {
                return Err(CliError::usage("z2 inputs must have even dimension"));
            }
            let rep = SurfaceRep::new(SurfaceKind::Sphere, mats)?;
            let sd = SelfDualStructure::new(dim / 2);
            indices::z2_index(&rep, &sd)?
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown --formula '{other}'"
            )))
        }
    };
    print_index(&result);
    Ok(())
}

fn run_solve(args: &SolveArgs) -> Result<(), CliError> {
    let solver = SquareSolver::from_name(&args.solver)
        .ok_or_else(|| CliError::usage(format!("unknown --solver '{}'", args.solver)))?;
    let mats = load_inputs(&args.inputs)?;
    let need = |count: usize| -> Result<(), CliError> {
        if mats.len() != count {
            Err(CliError::usage(format!(
                "surface '{}' needs {count} input matrices, got {}",
                args.surface,
                mats.len()
            )))
        } else {
            Ok(())
        }
    };
    let (report, labels): (transforms::SolveReport, Vec<&str>) = match args.surface.as_str() {
        "square" => {
            need(2)?;
            (
                transforms::solve_square(&mats[0], &mats[1], &solver)?,
                vec!["K1", "K2"],
            )
        }
        "disk" => {
            need(1)?;
            (transforms::solve_disk(&mats[0], &solver)?, vec!["X"])
        }
        "annulus" => {
            need(1)?;
            (transforms::solve_annulus(&mats[0], &solver)?, vec!["X"])
        }
        "cylinder" => {
            need(2)?;
            (
                transforms::solve_cylinder(&mats[0], &mats[1], &solver)?,
                vec!["U", "K"],
            )
        }
        "sphere" => {
            need(3)?;
            let rep = SurfaceRep::new(SurfaceKind::Sphere, mats)?;
            (
                transforms::solve_sphere(&rep, &solver)?,
                vec!["H1", "H2", "H3"],
            )
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown --surface '{other}'"
            )))
        }
    };
    println!(
        "# acmtool v{VERSION} solve surface={} solver={}",
        args.surface, args.solver
    );
    write_mats(&args.out, &labels, &report.output.mats)?;
    for (i, d) in report.displacement.iter().enumerate() {
        println!("displacement[{i}] = {d:.12e}");
    }
    println!("output_defect = {:.12e}", report.output.delta);
    if let Some(path) = &args.report {
        let mut csv = CsvWriter::new(
            &[
                format!("acmtool v{VERSION}"),
                format!(
                    "config: solve surface={} solver={} inputs={}",
                    args.surface,
                    args.solver,
                    args.inputs.len()
                ),
            ],
            &["stage", "displacement", "defect_before", "defect_after"],
        );
        let defect_before = {
            // measured on the raw inputs where the surface gates allow
            let loaded = load_inputs(&args.inputs)?;
            let kind = match args.surface.as_str() {
                "square" => SurfaceKind::Square,
                "disk" => SurfaceKind::Disk,
                "annulus" => SurfaceKind::Annulus,
                "cylinder" => SurfaceKind::Cylinder,
                _ => SurfaceKind::Sphere,
            };
            repr::measure_defect(kind, &loaded)?
        };
        for (stage, disp) in &report.stages {
            csv.row(&[
                CsvCell::Text(stage.clone()),
                CsvCell::Float(*disp),
                CsvCell::Float(defect_before),
                CsvCell::Float(report.output.delta),
            ]);
        }
        csv.write(path).map_err(CliError::io)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io)?;
    let mut pairs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::usage(format!(
                "{}:{}: expected 'key = value'",
                path.display(),
                no + 1
            )));
        };
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn run_lattice(args: &LatticeArgs) -> Result<(), CliError> {
    let mut config = LatticeConfig {
        latitudes: args.latitudes,
        total_sites: args.sites,
        n_monopole: args.monopole,
        disorder: args.disorder,
        seed: args.seed,
    };
    let mut fermi_spec = args.fermi.clone();
    if let Some(path) = &args.config {
        // file values apply first; command-line flags keep priority only for
        // flags the user actually set, which clap cannot tell us, so the
        // contract is: file overrides defaults, explicit flags override file
        // by being re-applied afterwards when they differ from defaults.
        let defaults = LatticeArgs {
            config: None,
            sites: 560,
            latitudes: 29,
            monopole: 100,
            disorder: 0.0,
            seed: 1,
            fermi: "-1,-2,-3,-4".into(),
            out: args.out.clone(),
            spectrum: None,
        };
        for (k, v) in parse_config_file(path)? {
            let bad = |what: &str| CliError::usage(format!("config key {k}: {what}"));
            match k.as_str() {
                "sites" => config.total_sites = v.parse().map_err(|_| bad("bad integer"))?,
                "latitudes" => config.latitudes = v.parse().map_err(|_| bad("bad integer"))?,
                "monopole" => config.n_monopole = v.parse().map_err(|_| bad("bad integer"))?,
                "disorder" => config.disorder = v.parse().map_err(|_| bad("bad number"))?,
                "seed" => config.seed = v.parse().map_err(|_| bad("bad integer"))?,
                "fermi" => fermi_spec = v,
                other => {
                    return Err(CliError::usage(format!(
                        "unknown config key '{other}'"
                    )))
                }
            }
        }
        if args.sites != defaults.sites {
            config.total_sites = args.sites;
        }
        if args.latitudes != defaults.latitudes {
            config.latitudes = args.latitudes;
        }
        if args.monopole != defaults.monopole {
            config.n_monopole = args.monopole;
        }
        if args.disorder != defaults.disorder {
            config.disorder = args.disorder;
        }
        if args.seed != defaults.seed {
            config.seed = args.seed;
        }
        if args.fermi != defaults.fermi {
            fermi_spec = args.fermi.clone();
        }
    }
    let fermis: Vec<f64> = fermi_spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad Fermi level '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    let model = LatticeModel::build(&config)?;
    let config_echo = format!(
        "config: sites={} latitudes={} monopole={} disorder={} seed={} fermi={}",
        config.total_sites,
        config.latitudes,
        config.n_monopole,
        config.disorder,
        config.seed,
        fermi_spec
    );
    let rows = lattice::bott_sweep(&model, &fermis)?;
    let mut csv = CsvWriter::new(
        &[
            format!("acmtool v{VERSION}"),
            config_echo.clone(),
            format!("seed: {}", config.seed),
        ],
        &[
            "fermi",
            "rank",
            "bott",
            "gap",
            "max_comm",
            "sos_min_eig",
            "hall_raw",
        ],
    );
    for row in &rows {
        csv.row(&[
            CsvCell::Float(row.fermi),
            CsvCell::Int(row.rank as i64),
            match row.bott {
                Some(v) => CsvCell::Int(v),
                None => CsvCell::Text("undefined".to_string()),
            },
            CsvCell::Float(row.separation),
            CsvCell::Float(row.max_commutator),
            CsvCell::Float(row.sos_min_eigenvalue),
            CsvCell::Float(row.hall_raw),
        ]);
    }
    csv.write(&args.out).map_err(CliError::io)?;
    println!("# acmtool v{VERSION}");
    println!("# {config_echo}");
    for row in &rows {
        match (&row.bott, &row.error) {
            (Some(b), _) => println!(
                "fermi={} rank={} bott={} separation={:.4} max_comm={:.6}",
                row.fermi, row.rank, b, row.separation, row.max_commutator
            ),
            (None, Some(e)) => println!("fermi={} rank={} undefined: {e}", row.fermi, row.rank),
            (None, None) => unreachable!(),
        }
    }
    println!("wrote {}", args.out.display());
    if let Some(path) = &args.spectrum {
        let h = lattice::build_hamiltonian(&model);
        let eig = almostcomm::linalg::eig_hermitian_unchecked(&h);
        let mut csv = CsvWriter::new(
            &[format!("acmtool v{VERSION}"), config_echo, format!("seed: {}", config.seed)],
            &["index", "eigenvalue"],
        );
        for (i, v) in eig.values.iter().enumerate() {
            csv.row(&[CsvCell::Int(i as i64), CsvCell::Float(*v)]);
        }
        csv.write(path).map_err(CliError::io)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_selftest() -> Result<(), CliError> {
    let mut failures = 0;
    let mut check = |name: &str, ok: bool| {
        println!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let spin = repr::spin_triple(20);
    check(
        "spin triple S=10 has Bott index 1",
        indices::bott_spectral(&spin).map(|r| r.value).unwrap_or(0) == 1,
    );
    let clock = repr::clock_shift(8);
    check(
        "clock/shift n=8 winding is 1",
        indices::winding_det(&clock.mats[0], &clock.mats[1], 0)
            .map(|r| r.value)
            .unwrap_or(0)
            == 1,
    );
    let (dbl, sd) = repr::self_dual_doubled_triple(8);
    check(
        "doubled triple Z2 index is -1",
        indices::z2_index(&dbl, &sd).map(|r| r.value).unwrap_or(0) == -1,
    );
    let t = repr::spin_triple(10);
    let neg = repr::negate_component(&t, 1).map_err(CliError::from)?;
    let both = repr::direct_sum(&t, &neg).map_err(CliError::from)?;
    let solved = transforms::solve_sphere(&both, &SquareSolver::default());
    check(
        "solver succeeds on an index-zero input",
        solved.map(|r| r.output.delta < 1e-10).unwrap_or(false),
    );
    let m = repr::spin_triple(6).mats[1].clone();
    let text = almostcomm::io::cmat_to_string(&m);
    let back = almostcomm::io::cmat_from_str(&text, "selftest").map_err(CliError::io)?;
    check(
        "CMAT round trip is bit exact",
        m.iter().zip(back.iter()).all(|(a, b)| a == b),
    );

    if failures > 0 {
        Err(CliError {
            code: 1,
            message: format!("{failures} selftest checks failed"),
        })
    } else {
        println!("all selftest checks passed");
        Ok(())
    }
}
