//! Commands behind the `dirichlet-interp` binary.
//!
//! Each command is deterministic given its [`RunConfig`] and the cache
//! directory. Node tables are cached under keys that include `d`, `M`, the
//! digit count and (for approximants) the method, so tables computed at one
//! precision are never reused at another.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dirichlet_interp::characters::RealPrimitiveCharacter;
use dirichlet_interp::gramzero::{find_zeros, gram_table, GramTable, ZeroTable};
use dirichlet_interp::interp::{
    build_approximant, discover_zeros, error_table, error_table_csv, standard_points, Approximant,
    DiscoveredZero, IndexPolicy, Method, Search,
};
use dirichlet_interp::lasso::{constraint_recommendation, run_experiment, ConstraintVerdict};
use dirichlet_interp::mpnum::{to_decimal, BigComplex, MIN_DIGITS};
use dirichlet_interp::solve::{SolveMethod, SolveOptions, SolveReport};
use dirichlet_interp::{BigReal, Error, PrecisionContext};

pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "dirichlet-interp", version, about = "Finite Dirichlet series approximants of real primitive L-functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gram points g_0 .. g_{M-1}.
    Gram(RunConfig),
    /// The first M critical-line zeros.
    Zeros(RunConfig),
    /// Solve for an approximant; writes JSON, coefficient CSV and a solve report.
    Build(RunConfig),
    /// Error table |L(s) - F(s)| at labelled points.
    EvalTable {
        #[command(flatten)]
        config: RunConfig,
        /// CSV of `label,re,im` rows; defaults to the 20 standard points.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Newton-refine zeros of the approximant.
    Discover {
        #[command(flatten)]
        config: RunConfig,
        #[command(flatten)]
        discover: DiscoverArgs,
    },
    /// Lasso feature-selection experiment on indices 1..=features.
    Lasso {
        #[command(flatten)]
        config: RunConfig,
        #[arg(long, default_value_t = 60)]
        features: usize,
        /// Shuffle the response with this seed (negative control).
        #[arg(long)]
        shuffle_seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Zeros,
    Gram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Gmres,
    Lu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SearchArg {
    /// Seeds at reference zeros (validation mode).
    Reference,
    /// Seeds from sign changes between Gram points (discovery mode).
    Gram,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Fundamental discriminant, e.g. -4 or -3.
    #[arg(long, allow_hyphen_values = true)]
    pub d: i64,
    /// Number of nodes.
    #[arg(long = "M")]
    pub m: usize,
    /// Number of pinned coefficients a_n = χ(n).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Gram)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 120)]
    pub digits: u32,
    /// Direct LU, or unrestarted GMRES governed by `--tol` and `--max-iter`.
    #[arg(long, value_enum, default_value_t = SolverArg::Lu)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1e-20)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, default_value = ".dirichlet-cache")]
    pub cache_dir: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Let every natural carry a coefficient (demonstrates the failure mode).
    #[arg(long)]
    pub no_coprime_constraint: bool,
}

#[derive(Args, Clone, Debug)]
pub struct DiscoverArgs {
    #[arg(long, value_enum, default_value_t = SearchArg::Reference)]
    pub search: SearchArg,
    /// First reference zero to seed from (1-based).
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    /// Last reference zero to seed from; defaults to M.
    #[arg(long)]
    pub to: Option<usize>,
    /// Size of the reference zero table; defaults to `to`, or none in Gram mode.
    #[arg(long)]
    pub reference_count: Option<usize>,
    /// Gram points bounding the search in Gram mode; defaults to M.
    #[arg(long)]
    pub gram_count: Option<usize>,
}

impl RunConfig {
    pub fn method(&self) -> Method {
        match self.method {
            MethodArg::Zeros => Method::FullZeros,
            MethodArg::Gram => Method::GramImag,
        }
    }

    pub fn policy(&self) -> IndexPolicy {
        if self.no_coprime_constraint {
            IndexPolicy::AllNaturals
        } else {
            IndexPolicy::Coprime
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            method: match self.solver {
                SolverArg::Gmres => SolveMethod::Gmres,
                SolverArg::Lu => SolveMethod::Lu,
            },
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn validate(&self) -> dirichlet_interp::Result<()> {
        RealPrimitiveCharacter::from_discriminant(self.d)?;
        if self.m == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        if self.k < self.method().min_k() {
            return Err(Error::InvalidArgument(format!(
                "k = {} is below the minimum {} for method {}",
                self.k,
                self.method().min_k(),
                self.method()
            )));
        }
        if self.digits < MIN_DIGITS {
            return Err(Error::PrecisionTooLow(self.digits));
        }
        self.solve_options().validate()
    }

    fn character(&self) -> dirichlet_interp::Result<RealPrimitiveCharacter> {
        RealPrimitiveCharacter::from_discriminant(self.d)
    }

    fn ctx(&self) -> dirichlet_interp::Result<PrecisionContext> {
        PrecisionContext::new(self.digits)
    }

    fn approximant_stem(&self) -> String {
        let policy = match self.policy() {
            IndexPolicy::Coprime => "",
            IndexPolicy::AllNaturals => "-all",
        };
        format!(
            "approximant-d{}-{}-M{}-k{}-p{}{}",
            self.d,
            self.method(),
            self.m,
            self.k,
            self.digits,
            policy
        )
    }
}

pub fn gram_cache_name(d: i64, m: usize, digits: u32) -> String {
    format!("gram-d{d}-M{m}-p{digits}.json")
}

pub fn zeros_cache_name(d: i64, m: usize, digits: u32) -> String {
    format!("zeros-d{d}-M{m}-p{digits}.json")
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cached<T>(
    path: &Path,
    parse: impl Fn(&str) -> dirichlet_interp::Result<T>,
    compute: impl FnOnce() -> dirichlet_interp::Result<T>,
    render: impl Fn(&T) -> dirichlet_interp::Result<String>,
) -> anyhow::Result<T> {
    if let Ok(text) = fs::read_to_string(path) {
        if let Ok(value) = parse(&text) {
            return Ok(value);
        }
    }
    let value = compute()?;
    write_atomic(path, &render(&value)?)?;
    Ok(value)
}

pub fn load_gram(config: &RunConfig, count: usize) -> anyhow::Result<GramTable> {
    let chi = config.character()?;
    let ctx = config.ctx()?;
    let path = config.cache_dir.join(gram_cache_name(config.d, count, config.digits));
    cached(&path, GramTable::from_json, || gram_table(&chi, count, &ctx), GramTable::to_json)
}

pub fn load_zeros(config: &RunConfig, count: usize) -> anyhow::Result<ZeroTable> {
    let chi = config.character()?;
    let ctx = config.ctx()?;
    let path = config.cache_dir.join(zeros_cache_name(config.d, count, config.digits));
    cached(&path, ZeroTable::from_json, || find_zeros(&chi, count, &ctx), ZeroTable::to_json)
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn table_csv<I: std::fmt::Display>(values: impl Iterator<Item = (I, String)>, header: &str) -> String {
    let mut out = format!("{header}\n");
    for (m, v) in values {
        out.push_str(&format!("{m},{v}\n"));
    }
    out
}

/// Computes (or loads) the Gram table and writes it to the output directory.
pub fn cmd_gram(config: &RunConfig) -> anyhow::Result<PathBuf> {
    config.validate()?;
    let table = load_gram(config, config.m)?;
    let body = match config.format {
        Format::Json => table.to_json()?,
        Format::Csv => table_csv(
            table.entries.iter().map(|e| (e.m, to_decimal(&e.value, table.digits))),
            "m,g_m",
        ),
    };
    let path = config.out.join(format!("gram-d{}-M{}-p{}.{}", config.d, config.m, config.digits, ext(config.format)));
    write_atomic(&path, &body)?;
    Ok(path)
}

pub fn cmd_zeros(config: &RunConfig) -> anyhow::Result<PathBuf> {
    config.validate()?;
    let table = load_zeros(config, config.m)?;
    let body = match config.format {
        Format::Json => table.to_json()?,
        Format::Csv => table_csv(
            table.entries.iter().map(|e| (e.m, to_decimal(&e.value, table.digits))),
            "m,gamma_m",
        ),
    };
    let path = config.out.join(format!("zeros-d{}-M{}-p{}.{}", config.d, config.m, config.digits, ext(config.format)));
    write_atomic(&path, &body)?;
    Ok(path)
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    config: &'a RunConfig,
    solver: String,
    relative_residual: String,
    iterations: usize,
    converged: bool,
}

pub struct BuildOutput {
    pub approximant: Approximant,
    pub report: SolveReport<BigReal>,
    pub files: Vec<PathBuf>,
}

/// Nodes for the configured method: zeros or Gram points.
pub fn nodes(config: &RunConfig) -> anyhow::Result<Vec<BigReal>> {
    Ok(match config.method() {
        Method::FullZeros => load_zeros(config, config.m)?.values(),
        Method::GramImag => load_gram(config, config.m)?.values(),
    })
}

pub fn cmd_build(config: &RunConfig) -> anyhow::Result<BuildOutput> {
    config.validate()?;
    let chi = config.character()?;
    let ctx = config.ctx()?;
    let nodes = nodes(config)?;
    let (approximant, report) = build_approximant(
        &chi,
        config.method(),
        &nodes,
        config.k,
        config.policy(),
        &config.solve_options(),
        &ctx,
    )?;
    let stem = config.approximant_stem();
    let json = approximant.to_json()?;
    write_atomic(&config.cache_dir.join(format!("{stem}.json")), &json)?;
    let record = ReportRecord {
        config,
        solver: format!("{:?}", report.method).to_lowercase(),
        relative_residual: to_decimal(&report.relative_residual, 6),
        iterations: report.iterations,
        converged: report.converged,
    };
    let files = vec![
        config.out.join(format!("{stem}.json")),
        config.out.join(format!("{stem}-coefficients.csv")),
        config.out.join(format!("{stem}-solve.json")),
    ];
    write_atomic(&files[0], &json)?;
    write_atomic(&files[1], &approximant.coefficients_csv())?;
    write_atomic(&files[2], &serde_json::to_string_pretty(&record)?)?;
    Ok(BuildOutput {
        approximant,
        report,
        files,
    })
}

/// The cached approximant for `config`, building it when absent.
pub fn load_approximant(config: &RunConfig) -> anyhow::Result<Approximant> {
    let path = config.cache_dir.join(format!("{}.json", config.approximant_stem()));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(f) = Approximant::from_json(&text) {
            return Ok(f);
        }
    }
    let built = cmd_build(config)?;
    if !built.report.converged {
        return Err(SolverFailure.into());
    }
    Ok(built.approximant)
}

/// Marker error: the solver stopped short of its tolerance.
#[derive(Debug)]
pub struct SolverFailure;

impl std::fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("linear solver did not reach the requested tolerance")
    }
}

impl std::error::Error for SolverFailure {}

/// Parses `label,re,im` lines; blank lines and `#` comments are skipped.
pub fn parse_points(text: &str, ctx: &PrecisionContext) -> anyhow::Result<Vec<(String, BigComplex)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            bail!(Error::Parse(format!("line {}: expected label,re,im", i + 1)));
        }
        out.push((parts[0].to_string(), BigComplex::new(ctx.parse(parts[1])?, ctx.parse(parts[2])?)));
    }
    Ok(out)
}

pub fn cmd_eval_table(config: &RunConfig, points: Option<&Path>) -> anyhow::Result<PathBuf> {
    config.validate()?;
    let chi = config.character()?;
    let ctx = config.ctx()?;
    let points = match points {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_points(&text, &ctx)?
        }
        None => standard_points(&ctx),
    };
    let f = load_approximant(config)?;
    let rows = error_table(&f, &chi, &points, &ctx)?;
    let body = match config.format {
        Format::Csv => error_table_csv(&rows),
        Format::Json => {
            let records: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "s": r.label,
                        "re": to_decimal(&r.s.re, 12),
                        "im": to_decimal(&r.s.im, 12),
                        "abs_error": to_decimal(&r.error, 6),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&records)?
        }
    };
    let path = config.out.join(format!("{}-errors.{}", config.approximant_stem(), ext(config.format)));
    write_atomic(&path, &body)?;
    Ok(path)
}

fn zero_record(z: &DiscoveredZero) -> serde_json::Value {
    let dec = |x: &BigReal| to_decimal(x, 30);
    serde_json::json!({
        "label": z.label,
        "converged": z.converged,
        "iterations": z.iterations,
        "re": z.zero.as_ref().map(|v| dec(&v.re)),
        "im": z.zero.as_ref().map(|v| dec(&v.im)),
        "reference": z.reference.as_ref().map(|(m, g)| serde_json::json!({"m": m, "gamma": dec(g)})),
        "offset_re": z.offset.as_ref().map(|o| to_decimal(&o.re, 6)),
        "offset_im": z.offset.as_ref().map(|o| to_decimal(&o.im, 6)),
    })
}

pub struct DiscoverOutput {
    pub zeros: Vec<DiscoveredZero>,
    pub path: PathBuf,
}

pub fn cmd_discover(config: &RunConfig, args: &DiscoverArgs) -> anyhow::Result<DiscoverOutput> {
    config.validate()?;
    let chi = config.character()?;
    let ctx = config.ctx()?;
    let f = load_approximant(config)?;
    let zeros = match args.search {
        SearchArg::Reference => {
            let to = args.to.unwrap_or(config.m);
            if args.from == 0 || args.from > to {
                bail!(Error::InvalidArgument(format!("empty seed range {}..={}", args.from, to)));
            }
            let count = args.reference_count.unwrap_or(to).max(to);
            let mut table = load_zeros(config, count)?;
            table.entries = table.entries[args.from - 1..to].to_vec();
            discover_zeros(&f, &chi, Search::FromReference(&table), None, &ctx)?
        }
        SearchArg::Gram => {
            let gram = load_gram(config, args.gram_count.unwrap_or(config.m))?;
            let reference = args.reference_count.map(|n| load_zeros(config, n)).transpose()?;
            discover_zeros(&f, &chi, Search::GramIntervals(&gram), reference.as_ref(), &ctx)?
        }
    };
    let body = match config.format {
        Format::Json => serde_json::to_string_pretty(&zeros.iter().map(zero_record).collect::<Vec<_>>())?,
        Format::Csv => {
            let mut out = String::from("label,converged,iterations,re,im,offset_abs\n");
            for z in &zeros {
                let (re, im) = z
                    .zero
                    .as_ref()
                    .map_or((String::new(), String::new()), |v| (to_decimal(&v.re, 30), to_decimal(&v.im, 30)));
                let off = z.offset_abs().map_or(String::new(), |o| to_decimal(&o, 6));
                out.push_str(&format!("{},{},{},{re},{im},{off}\n", z.label, z.converged, z.iterations));
            }
            out
        }
    };
    let path = config.out.join(format!("{}-zeros.{}", config.approximant_stem(), ext(config.format)));
    write_atomic(&path, &body)?;
    Ok(DiscoverOutput { zeros, path })
}

pub struct LassoOutput {
    pub verdict: ConstraintVerdict,
    pub files: Vec<PathBuf>,
}

/// Samples span `[g_0, g_M]`.
pub fn cmd_lasso(config: &RunConfig, features: usize, shuffle_seed: Option<u64>) -> anyhow::Result<LassoOutput> {
    let chi = config.character()?;
    if features == 0 {
        bail!(Error::InvalidArgument("need at least one feature".into()));
    }
    let report = run_experiment(&chi, config.m, features, shuffle_seed)?;
    let verdict = constraint_recommendation(&report, chi.modulus());
    let stem = match shuffle_seed {
        Some(seed) => format!("lasso-d{}-M{}-n{}-shuffled{}", config.d, config.m, features, seed),
        None => format!("lasso-d{}-M{}-n{}", config.d, config.m, features),
    };
    let files = vec![config.out.join(format!("{stem}.json")), config.out.join(format!("{stem}.csv"))];
    write_atomic(&files[0], &report.to_json()?)?;
    write_atomic(&files[1], &report.to_csv())?;
    Ok(LassoOutput { verdict, files })
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<SolverFailure>().is_some() {
        return EXIT_SOLVER;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::PrecisionFault(_)) => EXIT_PRECISION,
        Some(Error::LassoNonConvergence { .. } | Error::Singular(_) | Error::ZeroRhs) => EXIT_SOLVER,
        Some(
            Error::InvalidArgument(_)
            | Error::NotFundamental(..)
            | Error::PrecisionTooLow(_)
            | Error::Parse(_)
            | Error::DimensionMismatch(_),
        ) => EXIT_CONFIG,
        _ => 1,
    }
}

/// Runs a parsed command, printing a summary; returns the exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Gram(c) => println!("{}", cmd_gram(&c)?.display()),
        Command::Zeros(c) => println!("{}", cmd_zeros(&c)?.display()),
        Command::Build(c) => {
            let out = cmd_build(&c)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            println!(
                "relative residual {} after {} iterations",
                to_decimal(&out.report.relative_residual, 6),
                out.report.iterations
            );
            if !out.report.converged {
                eprintln!("error: {SolverFailure}");
                return Ok(EXIT_SOLVER);
            }
        }
        Command::EvalTable { config, points } => println!("{}", cmd_eval_table(&config, points.as_deref())?.display()),
        Command::Discover { config, discover } => {
            let out = cmd_discover(&config, &discover)?;
            for z in &out.zeros {
                println!("{}", z.describe());
            }
            println!("{}", out.path.display());
        }
        Command::Lasso {
            config,
            features,
            shuffle_seed,
        } => {
            let out = cmd_lasso(&config, features, shuffle_seed)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            match out.verdict {
                ConstraintVerdict::Confirmed { q } => println!("confirmed: a_n = 0 for gcd(n, {q}) > 1"),
                ConstraintVerdict::Violated { noncoprime, coprime } => println!(
                    "violation: n = {} (gcd > 1) vanishes at λ = {:e}, not below n = {} at λ = {:e}",
                    noncoprime.0, noncoprime.1, coprime.0, coprime.1
                ),
            }
        }
    }
    Ok(0)
}
