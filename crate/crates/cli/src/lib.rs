//! Command-line front end for the `mggs` library: verify the structural
//! properties of a multi-GGS group at a finite level, inspect its defining
//! data, or tabulate per-level invariants.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on usage or validation
//! errors.

pub mod cache;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mggs::ggs::{BranchCase, BuildOptions, GgsError, DEFAULT_LEAF_CAP};
use mggs::verifier::{classify_csp, run_all, ClaimId, RunOptions};
use mggs::{GgsSpec, GroupHandle};
use serde::Serialize;
use thiserror::Error;

use cache::{Cache, Lookup};
use input::LoadedSpec;
use report::ReportFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid spec: {0}")]
    Invalid(#[from] GgsError),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Parser, Debug)]
#[command(name = "mggs", version, about = "Verify structural properties of multi-GGS groups on finite quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the structural checks on G_N and report a verdict for each.
    Verify(VerifyArgs),
    /// Show the defining data, its normal form and the classification.
    Info(InfoArgs),
    /// Tabulate order, abelianization, rank and stabilizer indices per level.
    Table(TableArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Odd prime p.
    #[arg(long, requires = "vectors", conflicts_with = "spec")]
    pub p: Option<u32>,
    /// Defining vectors: rows separated by `;`, entries by `,` (e.g. "1,2;0,1").
    #[arg(long, requires = "p", allow_hyphen_values = true)]
    pub vectors: Option<String>,
    /// TOML spec file with `format`, `p`, `vectors` and optional `label`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SpecArgs,
    /// Truncation depth N (default: r+4, lowered to stay fast unless --allow-slow).
    #[arg(long)]
    pub depth: Option<usize>,
    /// Comma-separated check ids to run (default: all).
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Permit long-running depths and degrees beyond the default leaf cap.
    #[arg(long)]
    pub allow_slow: bool,
    /// Neither read nor write the result cache.
    #[arg(long)]
    pub no_cache: bool,
    /// Cache directory (overrides $MGGS_CACHE_DIR).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InfoArgs {
    #[command(flatten)]
    pub source: SpecArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub source: SpecArgs,
    /// Largest level to tabulate.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the table to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub allow_slow: bool,
}

fn load(source: &SpecArgs) -> Result<LoadedSpec, CliError> {
    match (&source.p, &source.vectors, &source.spec) {
        (Some(p), Some(v), None) => input::from_flags(*p, v),
        (None, None, Some(path)) => input::from_file(path),
        _ => Err(CliError::Usage("give either --p with --vectors, or --spec <file>".into())),
    }
}

/// Largest `N` with `p^N` within the default leaf cap.
pub fn depth_cap(p: u32) -> usize {
    let mut n = 0;
    while (p as u64).pow(n as u32 + 1) <= DEFAULT_LEAF_CAP {
        n += 1;
    }
    n
}

/// Depths that take long enough to need `--allow-slow`.
pub fn is_slow(p: u32, r: usize, depth: usize) -> bool {
    if p == 3 {
        depth >= 6
    } else {
        depth > r + 3
    }
}

/// `r+4` (enough for every check to be non-vacuous), capped by the leaf
/// limit and, without `--allow-slow`, lowered to the largest fast depth.
pub fn default_depth(spec: &GgsSpec, allow_slow: bool) -> usize {
    let mut depth = (spec.r() + 4).min(depth_cap(spec.p()));
    while !allow_slow && depth > 2 && is_slow(spec.p(), spec.r(), depth) {
        depth -= 1;
    }
    depth.max(2)
}

fn check_depth(spec: &GgsSpec, depth: usize, allow_slow: bool) -> Result<(), CliError> {
    if !allow_slow && is_slow(spec.p(), spec.r(), depth) {
        return Err(CliError::Usage(format!(
            "depth {depth} is long-running for p = {} and r = {}; pass --allow-slow to run it",
            spec.p(),
            spec.r()
        )));
    }
    Ok(())
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = load(&args.source)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let spec = &loaded.spec;
    let depth = args.depth.unwrap_or_else(|| default_depth(spec, args.allow_slow));
    check_depth(spec, depth, args.allow_slow)?;
    let checks = match &args.checks {
        Some(ids) => Some(
            ids.iter()
                .map(|s| s.parse::<ClaimId>().map_err(CliError::Usage))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let selected: Vec<ClaimId> = match &checks {
        Some(list) => ClaimId::ALL.into_iter().filter(|c| list.contains(c)).collect(),
        None => ClaimId::ALL.to_vec(),
    };
    let options = RunOptions {
        checks,
        build: BuildOptions {
            allow_large: args.allow_slow,
        },
    };

    let cache = (!args.no_cache).then(|| Cache::new(args.cache_dir.clone().unwrap_or_else(cache::default_dir)));
    let key = Cache::key_for(spec, depth, &selected);
    let cached = match cache.as_ref().map(|c| c.load(&key)) {
        Some(Lookup::Hit(report)) => {
            let _ = writeln!(err, "using cached result");
            Some(report)
        }
        Some(Lookup::Corrupt(why)) => {
            let _ = writeln!(err, "warning: discarding corrupt cache entry ({why}); recomputing");
            None
        }
        _ => None,
    };
    let report = match cached {
        Some(r) => r,
        None => {
            let r = run_all(spec, depth, &options)?;
            if let Some(c) = &cache {
                if let Err(e) = c.store(&key, &r) {
                    let _ = writeln!(err, "warning: could not write cache in {}: {e}", c.dir().display());
                }
            }
            r
        }
    };

    let file = ReportFile::new(&report, loaded.label.clone());
    let rendered = match args.format {
        Format::Text => file.to_text(),
        Format::Csv => file.to_csv(),
        Format::Json => file.to_json(),
    };
    let _ = out.write_all(rendered.as_bytes());
    if let Some(path) = &args.out {
        write_file(path, &file.to_json())?;
    }
    Ok(if file.passed { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct InfoRecord {
    p: u32,
    r: usize,
    vectors: Vec<Vec<u32>>,
    constant: bool,
    symmetric_rows: Vec<bool>,
    normalized: Option<Vec<Vec<u32>>>,
    transform: Option<Vec<Vec<u32>>>,
    case: Option<String>,
    normalization_error: Option<String>,
    classification: String,
}

fn rows_text(rows: &[Vec<u32>]) -> String {
    rows.iter()
        .map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn info(args: &InfoArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = load(&args.source)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let spec = &loaded.spec;
    let normalized = spec.normalize();
    let record = InfoRecord {
        p: spec.p(),
        r: spec.r(),
        vectors: spec.vectors().to_vec(),
        constant: spec.is_constant(),
        symmetric_rows: spec.vectors().iter().map(|v| mggs::ggs::is_symmetric(v)).collect(),
        normalized: normalized.as_ref().ok().map(|n| n.spec.vectors().to_vec()),
        transform: normalized.as_ref().ok().map(|n| n.transform.clone()),
        case: normalized.as_ref().ok().map(|n| match n.case {
            BranchCase::NonSymmetric { m } => format!("non-symmetric first vector, last entry m = {m}"),
            BranchCase::Symmetric { column } => {
                format!("all rows symmetric; later rows have the form (0,*,...,*,0), pivot column {column}")
            }
            BranchCase::SingleSymmetric => "single symmetric vector".into(),
        }),
        normalization_error: normalized.as_ref().err().map(|e| e.to_string()),
        classification: classify_csp(spec).to_string(),
    };
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&record).expect("info serializes");
            s.push('\n');
            s
        }
        Format::Text | Format::Csv => {
            let mut pairs: Vec<(&str, String)> = vec![
                ("p", record.p.to_string()),
                ("r", record.r.to_string()),
                ("vectors", rows_text(&record.vectors)),
                ("constant", if record.constant { "yes" } else { "no" }.into()),
                (
                    "symmetric_rows",
                    record
                        .symmetric_rows
                        .iter()
                        .map(|&s| if s { "yes" } else { "no" })
                        .collect::<Vec<_>>()
                        .join(","),
                ),
            ];
            if let (Some(n), Some(t), Some(c)) = (&record.normalized, &record.transform, &record.case) {
                let unchanged = n == &record.vectors;
                pairs.push((
                    "normalized",
                    if unchanged {
                        format!("{} (already normalized)", rows_text(n))
                    } else {
                        rows_text(n)
                    },
                ));
                pairs.push(("transform", rows_text(t)));
                pairs.push(("case", c.clone()));
            }
            if let Some(e) = &record.normalization_error {
                pairs.push(("normalization", e.clone()));
            }
            pairs.push(("classification", record.classification.clone()));
            let sep = if args.format == Format::Csv { "," } else { ": " };
            let mut s = if args.format == Format::Csv {
                "field,value\n".to_string()
            } else {
                String::new()
            };
            for (k, v) in pairs {
                if args.format == Format::Csv && v.contains(',') {
                    s.push_str(&format!("{k}{sep}\"{v}\"\n"));
                } else {
                    s.push_str(&format!("{k}{sep}{v}\n"));
                }
            }
            s
        }
    };
    let _ = out.write_all(text.as_bytes());
    Ok(EXIT_OK)
}

/// Invariants of `G_n` for one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub order_exponent: usize,
    pub derived_index_exponent: usize,
    pub rank: usize,
    /// `log_p |G_n : st_{G_n}(m)|` for `m = 1..=n`.
    pub stabilizer_index_exponents: Vec<usize>,
}

pub fn table_rows(spec: &GgsSpec, max_depth: usize, allow_large: bool) -> Result<Vec<TableRow>, CliError> {
    let session = spec.build(max_depth.max(2), &BuildOptions { allow_large })?;
    let mut rows = Vec::new();
    for n in 1..=max_depth {
        let g: GroupHandle = session.group.level_image(n).map_err(GgsError::from)?;
        let stabilizers = (1..=n)
            .map(|m| g.level_stabilizer(m).map(|st| g.order_exponent() - st.order_exponent()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(GgsError::from)?;
        rows.push(TableRow {
            n,
            order_exponent: g.order_exponent(),
            derived_index_exponent: g.order_exponent() - g.derived().order_exponent(),
            rank: g.rank(),
            stabilizer_index_exponents: stabilizers,
        });
    }
    Ok(rows)
}

fn table(args: &TableArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = load(&args.source)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let spec = &loaded.spec;
    let depth = args.depth.unwrap_or_else(|| default_depth(spec, args.allow_slow));
    if depth == 0 {
        return Err(CliError::Usage("--depth must be at least 1".into()));
    }
    check_depth(spec, depth, args.allow_slow)?;
    let rows = table_rows(spec, depth, args.allow_slow)?;
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("n,order_exponent,derived_index_exponent,rank,stabilizer_index_exponents\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.n,
                    r.order_exponent,
                    r.derived_index_exponent,
                    r.rank,
                    join(&r.stabilizer_index_exponents)
                ));
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{:>3} {:>10} {:>14} {:>5}  {}\n",
                "n", "log|G_n|", "log|G_n:G_n'|", "rank", "log|G_n:st(m)|, m=1..n"
            );
            for r in &rows {
                s.push_str(&format!(
                    "{:>3} {:>10} {:>14} {:>5}  {}\n",
                    r.n,
                    r.order_exponent,
                    r.derived_index_exponent,
                    r.rank,
                    join(&r.stabilizer_index_exponents)
                ));
            }
            s
        }
    };
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => verify(a, out, err),
        Command::Info(a) => info(a, out, err),
        Command::Table(a) => table(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
