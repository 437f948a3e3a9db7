//! `fc` — command-line front end for the factor-copula toolkit.
//!
//! Every randomized subcommand takes a mandatory `--seed`; runs that write
//! an output file also write a JSON manifest beside it (command line, seed,
//! crate versions, SHA-256 digests of the inputs) so results can be
//! replayed bit for bit.
//!
//! Exit codes: 0 success, 2 usage errors, 3 domain/parse/data errors,
//! 4 numeric failures.

use clap::{Args, Parser, Subcommand, ValueEnum};
use factor_copula::bicop::{Bicop, BicopFamily};
use factor_copula::citest::{
    ci_test, conjecture_scan, power_study, CITestConfig, ConjectureScanConfig, ConjectureSetup,
    PowerStudyConfig, TestSide,
};
use factor_copula::inference::{
    fisher_information, fit, FisherConfig, FisherMethod, FitConfig, Optimizer,
};
use factor_copula::innercop::{FactorLaw, FactorMapping, InnerCopula, InnerFamily};
use factor_copula::modelspec::{parse_model_spec, print_model_spec, ParsedSpec};
use factor_copula::sampling::{sample_neofc, RngHandle};
use factor_copula::stats::kendall_tau_matrix;
use factor_copula::FcError;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fc", version, about = "Factor-copula models: simulate, evaluate, fit, test")]
struct Cli {
    /// Cap the worker-thread count (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a model and write them as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the model density at a point.
    Density(DensityArgs),
    /// Fit a model template to data by maximum pseudo-likelihood.
    Fit(FitArgs),
    /// Bootstrap test of conditional independence given the factor.
    Citest(CitestArgs),
    /// Rejection rates of the test across sample sizes and inner strengths.
    PowerStudy(PowerStudyArgs),
    /// Monte Carlo scan comparing the outer and inner copulas.
    ConjectureScan(ConjectureScanArgs),
    /// Numerical Fisher information of a template's free parameters.
    Fisher(FisherArgs),
    /// Empirical Kendall-tau matrix of a data file.
    Tau(TauArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model-spec file.
    #[arg(long)]
    model: PathBuf,
    /// Number of rows to draw.
    #[arg(long)]
    n: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    /// Model-spec file.
    #[arg(long)]
    model: PathBuf,
    /// Evaluation point, comma-separated coordinates in (0,1).
    #[arg(long)]
    at: String,
    /// Monte Carlo seed for multi-layer models (single-layer models use
    /// deterministic quadrature).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional output CSV path (default: print to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Global,
    Local,
    Both,
}

#[derive(Args)]
struct FitArgs {
    /// Data CSV (raw observations; ranks are taken internally).
    #[arg(long)]
    data: PathBuf,
    /// Model-spec file containing `free` markers.
    #[arg(long)]
    model: PathBuf,
    /// Seed for the optimizer and the per-fit integration rule.
    #[arg(long)]
    seed: u64,
    /// Optimizer route.
    #[arg(long, value_enum, default_value_t = OptimizerArg::Both)]
    optimizer: OptimizerArg,
    /// Extra random simplex restarts.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    /// Write the fitted model spec here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Args)]
struct CitestArgs {
    /// Data CSV (raw observations; ranks are taken internally).
    #[arg(long)]
    data: PathBuf,
    /// Single-layer model-spec file; its linking row gives the known
    /// parametric families and starting values (the inner section is
    /// ignored: the null model fixes the product inner copula).
    #[arg(long)]
    linking: PathBuf,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 200)]
    n_bootstrap: usize,
    /// Risk level.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Rejection tail: `left` for positive inner dependence.
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    side: SideArg,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Optional output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerStudyArgs {
    /// Study configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConjectureScanArgs {
    /// Setup file with one `[setup.NAME]` section per scanned combination.
    #[arg(long)]
    config: PathBuf,
    /// Interior grid resolution per axis.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Monte Carlo points per grid point.
    #[arg(long, default_value_t = 200_000)]
    points: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FisherMethodArg {
    Sample,
    Quadrature,
}

#[derive(Args)]
struct FisherArgs {
    /// Model-spec file containing `free` markers for the parameters of
    /// interest.
    #[arg(long)]
    model: PathBuf,
    /// Native-scale parameter values, one per free parameter (default: the
    /// template's initial values).
    #[arg(long)]
    at: Option<String>,
    /// Estimator.
    #[arg(long, value_enum, default_value_t = FisherMethodArg::Sample)]
    method: FisherMethodArg,
    /// Simulated sample size for the sample-based estimator.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// RNG seed.
    #[arg(long)]
    seed: u64,
    /// Optional output CSV path for the information matrix.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TauArgs {
    /// Data CSV.
    #[arg(long)]
    data: PathBuf,
    /// Optional output CSV path (default: print to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Application-level error: a toolkit error or an I/O problem.
enum CliError {
    Fc(FcError),
    Io(String),
}

impl From<FcError> for CliError {
    fn from(e: FcError) -> Self {
        CliError::Fc(e)
    }
}

impl CliError {
    fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }

    fn report(&self) -> (String, u8) {
        match self {
            CliError::Fc(e) => {
                let exit = if e.code() == "numeric" { 4 } else { 3 };
                (format!("error[{}]: {e}", e.code()), exit)
            }
            CliError::Io(msg) => (format!("error[io]: {msg}"), 2),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let manifest = Manifest::new();
    let run = match &cli.command {
        Command::Simulate(args) => run_simulate(args, manifest),
        Command::Density(args) => run_density(args, manifest),
        Command::Fit(args) => run_fit(args, manifest),
        Command::Citest(args) => run_citest(args, manifest),
        Command::PowerStudy(args) => run_power_study(args, manifest),
        Command::ConjectureScan(args) => run_conjecture_scan(args, manifest),
        Command::Fisher(args) => run_fisher(args, manifest),
        Command::Tau(args) => run_tau(args, manifest),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (line, code) = e.report();
            eprintln!("{line}");
            ExitCode::from(code)
        }
    }
}

/// Reproducibility record written beside every output file.
struct Manifest {
    command: Vec<String>,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
}

impl Manifest {
    fn new() -> Self {
        Manifest {
            command: std::env::args().collect(),
            seed: None,
            inputs: BTreeMap::new(),
        }
    }

    fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    fn input(&mut self, path: &Path, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs
            .insert(path.display().to_string(), format!("sha256:{hex}"));
    }

    fn write_beside(&self, out: &Path) -> CliResult<()> {
        let body = serde_json::json!({
            "command": self.command,
            "seed": self.seed,
            "versions": {
                "fc": env!("CARGO_PKG_VERSION"),
                "factor-copula": factor_copula::VERSION,
            },
            "inputs": self.inputs,
        });
        let mut path = out.as_os_str().to_owned();
        path.push(".manifest.json");
        let path = PathBuf::from(path);
        let text = serde_json::to_string_pretty(&body)
            .map_err(|e| CliError::Io(format!("manifest encoding: {e}")))?;
        std::fs::write(&path, text)
            .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
    }
}

fn read_file(path: &Path, manifest: &mut Manifest) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
    manifest.input(path, &bytes);
    String::from_utf8(bytes)
        .map_err(|_| CliError::Io(format!("{} is not valid UTF-8", path.display())))
}

fn load_model(path: &Path, manifest: &mut Manifest) -> CliResult<ParsedSpec> {
    let text = read_file(path, manifest)?;
    Ok(parse_model_spec(&text)?)
}

/// Read a numeric CSV matrix; a header row is detected and skipped.
fn read_csv(path: &Path, manifest: &mut Manifest) -> CliResult<(Vec<Vec<f64>>, Vec<String>)> {
    let text = read_file(path, manifest)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut header: Vec<String> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::Fc(FcError::Parse { line: idx + 1, msg: format!("CSV: {e}") })
        })?;
        let parsed: Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => {
                header = record.iter().map(|f| f.to_string()).collect();
            }
            Err(_) => {
                return Err(CliError::Fc(FcError::Parse {
                    line: idx + 1,
                    msg: "non-numeric field in CSV data".into(),
                }));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Fc(FcError::Data(format!(
            "{} contains no data rows",
            path.display()
        ))));
    }
    Ok((rows, header))
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut writer = csv::WriterBuilder::new()
        .from_path(path)
        .map_err(|e| CliError::Io(format!("opening {}: {e}", path.display())))?;
    writer
        .write_record(header)
        .and_then(|()| {
            rows.iter().try_for_each(|row| writer.write_record(row))
        })
        .and_then(|()| writer.flush().map_err(csv::Error::from))
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn csv_to_stdout(header: &[String], rows: &[Vec<String>]) {
    println!("{}", header.join(","));
    for row in rows {
        println!("{}", row.join(","));
    }
}

fn emit_csv(
    out: Option<&Path>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    manifest: &Manifest,
) -> CliResult<()> {
    match out {
        Some(path) => {
            write_csv(path, &header, &rows)?;
            manifest.write_beside(path)
        }
        None => {
            csv_to_stdout(&header, &rows);
            Ok(())
        }
    }
}

fn parse_point(raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| {
                CliError::Fc(FcError::Domain(format!("invalid coordinate '{}'", f.trim())))
            })
        })
        .collect()
}

fn run_simulate(args: &SimulateArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let model = match load_model(&args.model, &mut manifest)? {
        ParsedSpec::Model(m) => m,
        ParsedSpec::Template(_) => {
            return Err(CliError::Fc(FcError::Domain(
                "simulate needs a fully specified model (no 'free' markers)".into(),
            )));
        }
    };
    if args.n == 0 {
        return Err(CliError::Fc(FcError::Domain("need at least one row".into())));
    }
    let rows = sample_neofc(&model, args.n, RngHandle::new(args.seed))?;
    let header: Vec<String> = (1..=model.d()).map(|i| format!("u{i}")).collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect();
    write_csv(&args.out, &header, &body)?;
    manifest.write_beside(&args.out)
}

fn run_density(args: &DensityArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let spec = load_model(&args.model, &mut manifest)?;
    let model = spec.model();
    let point = parse_point(&args.at)?;
    if let Some(bad) = point.iter().find(|x| !(0.0..1.0).contains(*x) || **x == 0.0) {
        return Err(CliError::Fc(FcError::Domain(format!(
            "density point coordinates must lie strictly inside (0, 1), got {bad}"
        ))));
    }
    let mut cfg =
        factor_copula::quadrature::IntegratorConfig::default_for_layers(model.w());
    cfg.seed = args.seed;
    let est = model.density(&point, &cfg)?;
    let header = vec!["density".to_string(), "error".to_string()];
    let rows = vec![vec![est.value.to_string(), est.error.to_string()]];
    emit_csv(args.out.as_deref(), header, rows, &manifest)
}

fn run_fit(args: &FitArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let template = match load_model(&args.model, &mut manifest)? {
        ParsedSpec::Template(t) => t,
        ParsedSpec::Model(_) => {
            return Err(CliError::Fc(FcError::Domain(
                "fit needs a template: mark the free parameters with 'free' in the model file"
                    .into(),
            )));
        }
    };
    let (data, _) = read_csv(&args.data, &mut manifest)?;
    let pseudo = factor_copula::inference::pseudo_observations(&data)?;
    let config = FitConfig {
        optimizer: match args.optimizer {
            OptimizerArg::Global => Optimizer::GlobalPopulation,
            OptimizerArg::Local => Optimizer::LocalSimplex,
            OptimizerArg::Both => Optimizer::Both,
        },
        restarts: args.restarts,
        seed: args.seed,
        ..FitConfig::default()
    };
    let res = fit(&template, &pseudo, &config)?;
    println!("loglik = {}", res.loglik);
    println!("converged = {}", res.converged);
    println!("evaluations = {}", res.n_evals);
    for (param, x) in template.free().iter().zip(&res.x) {
        println!("{} = {x}", param.name);
    }
    if let Some(out) = &args.out {
        let text = print_model_spec(&res.model)?;
        std::fs::write(out, text)
            .map_err(|e| CliError::io(&format!("writing {}", out.display()), e))?;
        manifest.write_beside(out)?;
    }
    Ok(())
}

fn run_citest(args: &CitestArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let spec = load_model(&args.linking, &mut manifest)?;
    let model = spec.model();
    if model.w() != 1 {
        return Err(CliError::Fc(FcError::Domain(
            "the conditional-independence test takes a single-layer linking spec".into(),
        )));
    }
    let linking: Vec<Bicop> = (0..model.d()).map(|i| model.linking()[i][0]).collect();
    let (data, _) = read_csv(&args.data, &mut manifest)?;
    let config = CITestConfig {
        n_bootstrap: args.n_bootstrap,
        alpha: args.alpha,
        side: match args.side {
            SideArg::Left => TestSide::Left,
            SideArg::Right => TestSide::Right,
        },
        seed: args.seed,
        ..CITestConfig::default()
    };
    let res = ci_test(&data, &linking, &config)?;
    let header = ["t_obs", "p_value", "alpha", "side", "n_bootstrap", "reject"]
        .map(String::from)
        .to_vec();
    let side = match res.side {
        TestSide::Left => "left",
        TestSide::Right => "right",
    };
    let rows = vec![vec![
        res.t_obs.to_string(),
        res.p_value.to_string(),
        res.alpha.to_string(),
        side.to_string(),
        res.bootstrap.len().to_string(),
        res.reject.to_string(),
    ]];
    emit_csv(args.out.as_deref(), header, rows, &manifest)
}

/// Parse flat `key = value` configuration text (comments with `#`).
fn parse_flat_config(text: &str) -> CliResult<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Fc(FcError::Parse {
                line: idx + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })
        })?;
        let key = key.trim().to_string();
        if map.contains_key(&key) {
            return Err(CliError::Fc(FcError::Parse {
                line: idx + 1,
                msg: format!("duplicate key '{key}'"),
            }));
        }
        map.insert(key, (idx + 1, value.trim().to_string()));
    }
    Ok(map)
}

fn parse_list<T: std::str::FromStr>(
    entry: Option<&(usize, String)>,
    what: &str,
    default: Vec<T>,
) -> CliResult<Vec<T>> {
    match entry {
        None => Ok(default),
        Some((line, value)) => value
            .split(',')
            .map(|f| {
                f.trim().parse::<T>().map_err(|_| {
                    CliError::Fc(FcError::Parse {
                        line: *line,
                        msg: format!("invalid {what} entry '{}'", f.trim()),
                    })
                })
            })
            .collect(),
    }
}

fn parse_scalar<T: std::str::FromStr>(
    entry: Option<&(usize, String)>,
    what: &str,
    default: T,
) -> CliResult<T> {
    match entry {
        None => Ok(default),
        Some((line, value)) => value.trim().parse::<T>().map_err(|_| {
            CliError::Fc(FcError::Parse {
                line: *line,
                msg: format!("invalid {what} '{value}'"),
            })
        }),
    }
}

fn run_power_study(args: &PowerStudyArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let text = read_file(&args.config, &mut manifest)?;
    let map = parse_flat_config(&text)?;
    for key in map.keys() {
        if !["ns", "betas", "replications", "bootstrap", "alpha", "linking_taus"]
            .contains(&key.as_str())
        {
            return Err(CliError::Fc(FcError::Parse {
                line: map[key].0,
                msg: format!("unknown key '{key}'"),
            }));
        }
    }
    let defaults = PowerStudyConfig::default();
    let config = PowerStudyConfig {
        ns: parse_list(map.get("ns"), "ns", defaults.ns)?,
        betas: parse_list(map.get("betas"), "betas", defaults.betas)?,
        replications: parse_scalar(map.get("replications"), "replications", defaults.replications)?,
        n_bootstrap: parse_scalar(map.get("bootstrap"), "bootstrap", defaults.n_bootstrap)?,
        alpha: parse_scalar(map.get("alpha"), "alpha", defaults.alpha)?,
        linking_taus: parse_list(map.get("linking_taus"), "linking_taus", defaults.linking_taus)?,
        seed: args.seed,
    };
    let rows = power_study(&config)?;
    let header = ["n", "beta", "power"].map(String::from).to_vec();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.beta.to_string(), r.power.to_string()])
        .collect();
    write_csv(&args.out, &header, &body)?;
    manifest.write_beside(&args.out)
}

fn parse_setup_sections(text: &str) -> CliResult<Vec<ConjectureSetup>> {
    let mut setups = Vec::new();
    let mut current: Option<(usize, BTreeMap<String, (usize, String)>)> = None;
    let mut flush = |section: Option<(usize, BTreeMap<String, (usize, String)>)>| -> CliResult<()> {
        let Some((line, map)) = section else { return Ok(()) };
        for key in map.keys() {
            if !["inner", "inner_param", "c1", "c1_param", "c2", "c2_param"]
                .contains(&key.as_str())
            {
                return Err(CliError::Fc(FcError::Parse {
                    line: map[key].0,
                    msg: format!("unknown key '{key}'"),
                }));
            }
        }
        let missing = |k: &str| {
            CliError::Fc(FcError::Parse { line, msg: format!("missing key '{k}'") })
        };
        let (_, inner_name) = map.get("inner").ok_or_else(|| missing("inner"))?;
        let inner_family = match inner_name.as_str() {
            "gaussian-ex" | "gaussian" => InnerFamily::GaussianExchangeable,
            "clayton" => InnerFamily::Clayton,
            "gumbel" => InnerFamily::GumbelHougaard,
            "frank" => InnerFamily::Frank,
            "indep" => InnerFamily::Independence,
            other => {
                return Err(CliError::Fc(FcError::Parse {
                    line,
                    msg: format!("unknown inner family '{other}'"),
                }));
            }
        };
        let mappings = if inner_family.n_params(2) == 1 {
            let value: f64 = parse_scalar(map.get("inner_param"), "inner_param", f64::NAN)?;
            if value.is_nan() {
                return Err(missing("inner_param"));
            }
            vec![FactorMapping::Constant(value)]
        } else {
            Vec::new()
        };
        let inner = InnerCopula::new(2, inner_family, mappings, FactorLaw::Uniform)?;
        let link = |name_key: &str, param_key: &str| -> CliResult<Bicop> {
            let (l, name) = map.get(name_key).ok_or_else(|| missing(name_key))?;
            let family = BicopFamily::parse(name).map_err(|e| {
                CliError::Fc(FcError::Parse { line: *l, msg: e.to_string() })
            })?;
            if family.has_parameter() {
                let theta: f64 = parse_scalar(map.get(param_key), param_key, f64::NAN)?;
                if theta.is_nan() {
                    return Err(missing(param_key));
                }
                Ok(Bicop::new(family, theta)?)
            } else {
                Ok(Bicop::new(family, 0.0)?)
            }
        };
        let c1 = link("c1", "c1_param")?;
        let c2 = link("c2", "c2_param")?;
        setups.push(ConjectureSetup::new(inner, c1, c2)?);
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                CliError::Fc(FcError::Parse {
                    line: line_no,
                    msg: format!("malformed section header '{line}'"),
                })
            })?;
            if name.strip_prefix("setup.").is_none() {
                return Err(CliError::Fc(FcError::Parse {
                    line: line_no,
                    msg: format!("unknown section '[{name}]' (expected [setup.NAME])"),
                }));
            }
            flush(current.take())?;
            current = Some((line_no, BTreeMap::new()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Fc(FcError::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })
        })?;
        let Some((_, map)) = current.as_mut() else {
            return Err(CliError::Fc(FcError::Parse {
                line: line_no,
                msg: "key-value line before any [setup.NAME] header".into(),
            }));
        };
        map.insert(key.trim().to_string(), (line_no, value.trim().to_string()));
    }
    flush(current.take())?;
    if setups.is_empty() {
        return Err(CliError::Fc(FcError::Data("no [setup.NAME] sections found".into())));
    }
    Ok(setups)
}

fn run_conjecture_scan(args: &ConjectureScanArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let text = read_file(&args.config, &mut manifest)?;
    let setups = parse_setup_sections(&text)?;
    let config = ConjectureScanConfig {
        grid: args.grid,
        mc_points: args.points,
        seed: args.seed,
    };
    let rows = conjecture_scan(&setups, &config)?;
    let header = ["setup", "avg_p", "evaluated", "skipped"].map(String::from).to_vec();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.setup.clone(),
                r.avg_p.to_string(),
                r.evaluated.to_string(),
                r.skipped.to_string(),
            ]
        })
        .collect();
    write_csv(&args.out, &header, &body)?;
    manifest.write_beside(&args.out)
}

fn run_fisher(args: &FisherArgs, mut manifest: Manifest) -> CliResult<()> {
    manifest.seed(args.seed);
    let template = match load_model(&args.model, &mut manifest)? {
        ParsedSpec::Template(t) => t,
        ParsedSpec::Model(_) => {
            return Err(CliError::Fc(FcError::Domain(
                "fisher needs a template: mark the parameters of interest with 'free'".into(),
            )));
        }
    };
    let theta = match &args.at {
        Some(raw) => parse_point(raw)?,
        None => template.native_point(&template.initial())?,
    };
    let config = FisherConfig {
        method: match args.method {
            FisherMethodArg::Sample => FisherMethod::SampleBased { n: args.n },
            FisherMethodArg::Quadrature => FisherMethod::QuadratureBased,
        },
        seed: args.seed,
        ..FisherConfig::default()
    };
    let res = fisher_information(&template, &theta, &config)?;
    println!("determinant = {}", res.determinant);
    let header: Vec<String> = template.free().iter().map(|p| p.name.clone()).collect();
    let body: Vec<Vec<String>> = res
        .matrix
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect();
    emit_csv(args.out.as_deref(), header, body, &manifest)
}

fn run_tau(args: &TauArgs, mut manifest: Manifest) -> CliResult<()> {
    let (data, header) = read_csv(&args.data, &mut manifest)?;
    let matrix = kendall_tau_matrix(&data)?;
    let names: Vec<String> = if header.len() == matrix.len() {
        header
    } else {
        (1..=matrix.len()).map(|i| format!("u{i}")).collect()
    };
    let body: Vec<Vec<String>> = matrix
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect())
        .collect();
    emit_csv(args.out.as_deref(), names, body, &manifest)
}
