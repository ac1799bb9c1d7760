//! `scdkit` command-line interface.
//!
//! Stdout carries data only; logs and errors go to stderr. With
//! `--format json`, errors are a JSON object on stderr.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 budget or
//! limit error.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scdkit::{Error, Limits, PosetKind};

pub use output::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "scdkit",
    version,
    about = "Symmetric chain decompositions of Boolean lattices and hypergrids"
)]
pub struct Cli {
    /// Output format (default json; `bounds` defaults to csv).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Suppress log lines on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Cap on poset elements.
    #[arg(long, global = true)]
    pub max_elements: Option<u64>,

    /// Cap on reachable endpoint-map states per layer.
    #[arg(long, global = true)]
    pub max_states: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Level sizes of [t]^n.
    Levels(Shape),
    /// Build a reference decomposition.
    Construct(ConstructArgs),
    /// Check a decomposition file.
    Validate(ValidateArgs),
    /// Count decompositions exactly.
    Count(CountArgs),
    /// Build the matching gadget of a three-level slice.
    Gadget(GadgetArgs),
    /// Permanent of a dumped matrix.
    Perm(PermArgs),
    /// Evaluate a counting bound.
    Bounds(BoundsArgs),
    /// Scaled normalized matching flows.
    Snmf(SnmfArgs),
    /// Uniform random decompositions.
    Sample(SampleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Shape {
    #[arg(long)]
    pub t: u32,
    #[arg(long)]
    pub n: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PosetArg {
    Boolean,
    Hypergrid,
}

impl From<PosetArg> for PosetKind {
    fn from(p: PosetArg) -> Self {
        match p {
            PosetArg::Boolean => PosetKind::Boolean,
            PosetArg::Hypergrid => PosetKind::Hypergrid,
        }
    }
}

/// Poset selection shared by most subcommands. Without `--poset`, `t = 2`
/// means the Boolean lattice.
#[derive(Args, Debug, Clone)]
pub struct PosetSel {
    #[arg(long, default_value_t = 2)]
    pub t: u32,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum)]
    pub poset: Option<PosetArg>,
}

impl PosetSel {
    pub fn kind(&self) -> PosetKind {
        match self.poset {
            Some(p) => p.into(),
            None if self.t == 2 => PosetKind::Boolean,
            None => PosetKind::Hypergrid,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructMethod {
    Gk,
    Btk,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub sel: PosetSel,
    #[arg(long, value_enum)]
    pub method: ConstructMethod,
    /// Write the decomposition here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    Oracle,
    Layered,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct CacheArgs {
    /// Layer table cache (default: $SCDKIT_CACHE, else the user cache dir).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub sel: PosetSel,
    #[arg(long, value_enum, default_value = "layered")]
    pub method: CountMethod,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Args, Debug)]
pub struct GadgetArgs {
    #[command(flatten)]
    pub sel: PosetSel,
    /// Middle level of the slice L_{i-1}, L_i, L_{i+1} (default: the central level).
    #[arg(long)]
    pub slice: Option<usize>,
    /// Weight the gadget by a normalized matching flow instead of 1/r.
    #[arg(long)]
    pub snmf: bool,
    /// Write the weighted matrix here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PermMode {
    Rational,
    Float,
}

#[derive(Args, Debug)]
pub struct PermArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "rational")]
    pub mode: PermMode,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub formula: scdkit::Formula,
    /// Comma-separated `key=value` pairs; repeat for several rows. For
    /// `thm2`, `W` may be a colon-separated list or omitted (computed).
    #[arg(long, required = true)]
    pub params: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SnmfArgs {
    #[command(flatten)]
    pub sel: PosetSel,
    #[arg(long)]
    pub minimize_max: bool,
    /// Level pairs `a..b` (inclusive; pair i joins L_i and L_{i+1}).
    #[arg(long)]
    pub pairs: Option<String>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub sel: PosetSel,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    pub cache: CacheArgs,
}

/// Outcome of a subcommand that completed without an error.
pub(crate) enum Status {
    Ok,
    Invalid,
}

pub(crate) struct Ctx<'a> {
    pub format: Format,
    pub quiet: bool,
    pub limits: Limits,
    pub out: &'a mut (dyn Write + Send),
    pub err: &'a mut (dyn Write + Send),
}

impl Ctx<'_> {
    pub fn log(&mut self, msg: &str) {
        if !self.quiet {
            let _ = writeln!(self.err, "{msg}");
        }
    }
}

/// CLI-level failure: a library error or a usage problem found after parsing.
#[derive(Debug)]
pub(crate) enum Failure {
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Lib(e) if e.is_limit() => EXIT_LIMIT,
            Failure::Lib(
                Error::InvalidParameter(_)
                | Error::Malformed(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::IndexOutOfRange { .. }
                | Error::ForeignElement(_),
            ) => EXIT_USAGE,
            Failure::Lib(_) => EXIT_INVALID,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Lib(e) => match e {
                Error::InvalidParameter(_) => "invalid_parameter",
                Error::BudgetExceeded { .. } => "budget_exceeded",
                Error::IndexOutOfRange { .. } => "index_out_of_range",
                Error::ForeignElement(_) => "foreign_element",
                Error::NotRegular { .. } => "not_regular",
                Error::NotSnmf { .. } => "not_snmf",
                Error::NotPerfectMatching(_) => "not_perfect_matching",
                Error::InvalidScd(_) => "invalid_scd",
                Error::ZeroDegree(_) => "zero_degree",
                Error::NoScd => "no_scd",
                Error::Internal(_) => "internal",
                Error::Malformed(_) => "malformed",
                Error::Io(_) => "io",
                Error::Json(_) => "json",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

fn report(err: &mut dyn Write, format: Format, kind: &str, message: &str, code: i32) {
    let _ = match format {
        Format::Json => writeln!(
            err,
            "{}",
            serde_json::json!({ "error": { "kind": kind, "message": message, "exit_code": code } })
        ),
        Format::Csv => writeln!(err, "error ({kind}): {message}"),
    };
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let format = cli.format.unwrap_or(match cli.command {
        Command::Bounds(_) => Format::Csv,
        _ => Format::Json,
    });
    let mut limits = Limits::default();
    if let Some(m) = cli.max_elements {
        limits.max_elements = m;
    }
    if let Some(m) = cli.max_states {
        limits.max_states = m;
    }
    let mut ctx = Ctx {
        format,
        quiet: cli.quiet,
        limits,
        out,
        err,
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cli.command, &mut ctx)),
            Err(e) => Err(Failure::Usage(format!("cannot start {k} threads: {e}"))),
        },
        None => commands::dispatch(&cli.command, &mut ctx),
    };
    match result {
        Ok(Status::Ok) => EXIT_OK,
        Ok(Status::Invalid) => EXIT_INVALID,
        Err(f) => {
            let code = f.exit_code();
            report(ctx.err, format, f.kind(), &f.message(), code);
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("scdkit").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(Failure::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(Failure::Lib(Error::NoScd).exit_code(), EXIT_INVALID);
        assert_eq!(
            Failure::Lib(Error::InvalidParameter("x".into())).exit_code(),
            EXIT_USAGE
        );
    }

    #[test]
    fn runs_in_process() {
        let (code, out, _) = run_capture(&["levels", "--t", "2", "--n", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "[1,2,1]\n");
        let (code, _, err) = run_capture(&["levels", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
    }

    #[test]
    fn bounds_default_to_csv() {
        let (code, out, _) =
            run_capture(&["bounds", "--formula", "trivial", "--params", "t=2,n=3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("formula,"));
    }

    #[test]
    fn poset_kind_defaults_by_t() {
        let sel = |t| PosetSel {
            t,
            n: 2,
            poset: None,
        };
        assert_eq!(sel(2).kind(), PosetKind::Boolean);
        assert_eq!(sel(3).kind(), PosetKind::Hypergrid);
    }
}
