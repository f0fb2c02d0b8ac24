mod bench;

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seqrule::datagen::{self, GenParams};
use seqrule::io::{self as dio, InputFormat};
use seqrule::miner::{self, MiningConfig};
use seqrule::model::{Rule, SequenceDatabase, Threshold};
use seqrule::oracle::{self, OracleConfig};

/// Error carrying the process exit code it should map to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> anyhow::Error {
        Failure {
            code: 2,
            message: message.into(),
        }
        .into()
    }

    pub fn internal(message: impl Into<String>) -> anyhow::Error {
        Failure {
            code: 1,
            message: message.into(),
        }
        .into()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

#[derive(Parser, Debug)]
#[command(
    name = "seqrule",
    version,
    about = "High-utility sequential rule mining"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine rules from a sequence database.
    Mine(MineArgs),
    /// Mine rules with the brute-force reference miner.
    Oracle(OracleArgs),
    /// Run miner and reference miner and compare their rule sets.
    Verify(VerifyArgs),
    /// Generate a synthetic sequence database.
    Gen(GenArgs),
    /// Compare the pruning variants on one input.
    Bench(bench::BenchArgs),
    /// Print the shape of a sequence database.
    Stats(StatsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Native,
    Spmf,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted (.txt/.spmf are SPMF).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Keep only the highest-utility occurrence of each item per sequence.
    #[arg(long)]
    pub dedup: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    /// Utility threshold as a fraction of the total database utility.
    #[arg(long)]
    delta: Option<String>,
    /// Absolute utility threshold.
    #[arg(long)]
    minutil: Option<String>,
    #[arg(long, default_value = "0.6")]
    minconf: String,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Disable SEU item pruning.
    #[arg(long)]
    no_seu_prune: bool,
    /// Disable extension-bound pruning.
    #[arg(long)]
    no_rrs_prune: bool,
    /// Use RU instead of RRU in the bounds.
    #[arg(long)]
    use_ru: bool,
    /// Use the plain sequence utility for SEU instead of distinct-item maxima.
    #[arg(long)]
    seu_literal: bool,
    /// Do not gate the first extension of each item by its bound.
    #[arg(long)]
    no_top_gate: bool,
    #[arg(long)]
    max_prefix_len: Option<usize>,
    /// Sort rules by utility (descending) and labels instead of search order.
    #[arg(long)]
    sort: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Rule output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Statistics output file (default: stderr).
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Drop the miner's first rule before comparing (harness self-test).
    #[arg(long, hide = true)]
    corrupt_miner: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    sequences: usize,
    #[arg(long, default_value_t = 100)]
    alphabet: usize,
    #[arg(long, default_value_t = 10.0)]
    avg_length: f64,
    #[arg(long, default_value_t = 50)]
    max_length: usize,
    #[arg(long, default_value_t = 1)]
    utility_min: u64,
    #[arg(long, default_value_t = 10)]
    utility_max: u64,
    /// Zipf exponent of the item distribution.
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
}

impl InputArgs {
    pub fn load(&self) -> Result<SequenceDatabase> {
        let format = match self.format {
            Some(FormatArg::Native) => InputFormat::Native,
            Some(FormatArg::Spmf) => InputFormat::Spmf,
            None => InputFormat::from_path(&self.input),
        };
        let file = File::open(&self.input)
            .map_err(|e| Failure::usage(format!("cannot open {}: {e}", self.input.display())))?;
        dio::parse(BufReader::new(file), format)
            .map_err(|e| Failure::usage(format!("{}: {e}", self.input.display())))
    }

    pub fn format_name(&self) -> &'static str {
        match self.format {
            Some(FormatArg::Native) => "native",
            Some(FormatArg::Spmf) => "spmf",
            None => match InputFormat::from_path(&self.input) {
                InputFormat::Native => "native",
                InputFormat::Spmf => "spmf",
            },
        }
    }
}

fn parse_threshold(flag: &str, text: &str) -> Result<Threshold> {
    Threshold::parse_decimal(text).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

impl ThresholdArgs {
    /// Resolves minutil (δ is applied to u(D) of the database as loaded) and
    /// minconf.
    pub fn resolve(&self, db: &SequenceDatabase) -> Result<(Threshold, Threshold)> {
        let minutil = match (&self.delta, &self.minutil) {
            (Some(_), Some(_)) => {
                return Err(Failure::usage(
                    "mutually exclusive flags: --delta and --minutil",
                ))
            }
            (None, None) => return Err(Failure::usage("one of --delta or --minutil is required")),
            (Some(d), None) => parse_threshold("delta", d)?
                .scale(db.total_utility())
                .map_err(|e| Failure::usage(e.to_string()))?,
            (None, Some(m)) => parse_threshold("minutil", m)?,
        };
        let minconf = parse_threshold("minconf", &self.minconf)?;
        if !minconf.is_valid_confidence() {
            return Err(Failure::usage(format!(
                "--minconf must lie in (0, 1], got {}",
                self.minconf
            )));
        }
        Ok((minutil, minconf))
    }

    /// Checks the flag combination before any input is read.
    pub fn check(&self) -> Result<()> {
        if self.delta.is_some() && self.minutil.is_some() {
            return Err(Failure::usage(
                "mutually exclusive flags: --delta and --minutil",
            ));
        }
        Ok(())
    }
}

pub fn echo_config(pairs: &[(&str, String)]) {
    let stderr = io::stderr();
    let mut err = stderr.lock();
    for (k, v) in pairs {
        let _ = writeln!(err, "# {k}={v}");
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn cmd_mine(args: &MineArgs) -> Result<u8> {
    args.thresholds.check()?;
    let db = args.input.load()?;
    let (minutil, minconf) = args.thresholds.resolve(&db)?;
    let mut cfg = MiningConfig::new(minutil, minconf);
    cfg.use_seu_prune = !args.no_seu_prune;
    cfg.use_rrs_prune = !args.no_rrs_prune;
    cfg.use_rru = !args.use_ru;
    cfg.gate_top_level = !args.no_top_gate;
    cfg.seu_mode = if args.seu_literal {
        seqrule::bounds::SeuMode::SequenceUtility
    } else {
        seqrule::bounds::SeuMode::DistinctMax
    };
    cfg.dedup = args.input.dedup;
    cfg.max_prefix_len = args.max_prefix_len;
    cfg.threads = args.threads;
    echo_config(&[
        ("command", "mine".into()),
        ("input", args.input.input.display().to_string()),
        ("format", args.input.format_name().into()),
        ("minutil", minutil.to_string()),
        ("minconf", minconf.to_string()),
        ("dedup", cfg.dedup.to_string()),
        ("seu_prune", cfg.use_seu_prune.to_string()),
        ("rrs_prune", cfg.use_rrs_prune.to_string()),
        ("bound", if cfg.use_rru { "rru" } else { "ru" }.into()),
        (
            "seu_mode",
            if args.seu_literal {
                "sequence-utility"
            } else {
                "distinct-max"
            }
            .into(),
        ),
        ("top_gate", cfg.gate_top_level.to_string()),
        (
            "max_prefix_len",
            cfg.max_prefix_len.map_or("none".into(), |n| n.to_string()),
        ),
        ("sort", args.sort.to_string()),
        ("threads", cfg.threads.to_string()),
    ]);

    let (mut rules, stats) = miner::mine(&db, &cfg).map_err(|e| Failure::usage(e.to_string()))?;
    if args.sort {
        dio::sort_rules_for_display(&mut rules, db.vocabulary());
    }
    let mut out = open_out(args.out.as_deref())?;
    dio::write_rules(&rules, db.vocabulary(), &mut out)?;
    out.flush()?;

    match &args.stats {
        Some(p) => {
            let mut w = BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            );
            dio::write_stats(&stats, &mut w)?;
            w.flush()?;
        }
        None => dio::write_stats(&stats, io::stderr().lock())?,
    }
    Ok(0)
}

fn run_oracle(
    db: &SequenceDatabase,
    minutil: Threshold,
    minconf: Threshold,
    max_len: usize,
) -> Result<oracle::OracleOutput> {
    if max_len < 2 {
        return Err(Failure::usage("--max-len must be at least 2"));
    }
    Ok(oracle::oracle_mine(
        db,
        &OracleConfig {
            max_len,
            minutil,
            minconf,
        },
    ))
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8> {
    args.thresholds.check()?;
    let db = args.input.load()?;
    let db = if args.input.dedup {
        dio::dedup_max_utility(&db)
    } else {
        db
    };
    let (minutil, minconf) = args.thresholds.resolve(&db)?;
    echo_config(&[
        ("command", "oracle".into()),
        ("input", args.input.input.display().to_string()),
        ("minutil", minutil.to_string()),
        ("minconf", minconf.to_string()),
        ("max_len", args.max_len.to_string()),
    ]);
    let out = run_oracle(&db, minutil, minconf, args.max_len)?;
    let mut w = open_out(args.out.as_deref())?;
    dio::write_rules(&out.rules, db.vocabulary(), &mut w)?;
    w.flush()?;
    if out.truncated {
        eprintln!(
            "warning: patterns longer than --max-len {} exist; output is incomplete",
            args.max_len
        );
        return Ok(3);
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    args.thresholds.check()?;
    let loaded = args.input.load()?;
    let (minutil, minconf) = args.thresholds.resolve(&loaded)?;
    echo_config(&[
        ("command", "verify".into()),
        ("input", args.input.input.display().to_string()),
        ("minutil", minutil.to_string()),
        ("minconf", minconf.to_string()),
        ("dedup", args.input.dedup.to_string()),
        ("max_len", args.max_len.to_string()),
        ("threads", args.threads.to_string()),
    ]);
    let mut cfg = MiningConfig::new(minutil, minconf);
    cfg.dedup = args.input.dedup;
    cfg.threads = args.threads;
    let (mut mined, _) = miner::mine(&loaded, &cfg).map_err(|e| Failure::usage(e.to_string()))?;
    if args.corrupt_miner && !mined.is_empty() {
        mined.remove(0);
    }
    let oracle_db = if args.input.dedup {
        dio::dedup_max_utility(&loaded)
    } else {
        loaded.clone()
    };
    let reference = run_oracle(&oracle_db, minutil, minconf, args.max_len)?;
    if reference.truncated {
        eprintln!(
            "warning: oracle hit --max-len {}; cannot verify",
            args.max_len
        );
        return Ok(3);
    }

    let mined: BTreeSet<Rule> = mined.into_iter().collect();
    let expected: BTreeSet<Rule> = reference.rules.into_iter().collect();
    let vocab = loaded.vocabulary();
    let mut stdout = io::stdout().lock();
    if mined == expected {
        writeln!(stdout, "verify: ok ({} rules)", mined.len())?;
        return Ok(0);
    }
    writeln!(stdout, "verify: MISMATCH")?;
    for r in mined.difference(&expected) {
        writeln!(
            stdout,
            "+ miner only: {} #UTIL: {} #SUP: {}/{}",
            r.display(vocab),
            r.utility,
            r.support,
            r.antecedent_support
        )?;
    }
    for r in expected.difference(&mined) {
        writeln!(
            stdout,
            "- oracle only: {} #UTIL: {} #SUP: {}/{}",
            r.display(vocab),
            r.utility,
            r.support,
            r.antecedent_support
        )?;
    }
    Ok(1)
}

fn cmd_gen(args: &GenArgs) -> Result<u8> {
    let params = GenParams {
        num_sequences: args.sequences,
        alphabet_size: args.alphabet,
        avg_length: args.avg_length,
        max_length: args.max_length,
        utility_min: args.utility_min,
        utility_max: args.utility_max,
        item_skew: args.skew,
        seed: args.seed,
    };
    echo_config(&[
        ("command", "gen".into()),
        ("sequences", params.num_sequences.to_string()),
        ("alphabet", params.alphabet_size.to_string()),
        ("avg_length", params.avg_length.to_string()),
        ("max_length", params.max_length.to_string()),
        ("utility_min", params.utility_min.to_string()),
        ("utility_max", params.utility_max.to_string()),
        ("skew", params.item_skew.to_string()),
        ("seed", params.seed.to_string()),
    ]);
    let db = datagen::generate(&params).map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = open_out(args.out.as_deref())?;
    dio::write_native(&db, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn cmd_stats(args: &StatsArgs) -> Result<u8> {
    let db = args.input.load()?;
    let db = if args.input.dedup {
        dio::dedup_max_utility(&db)
    } else {
        db
    };
    let avg = if db.is_empty() {
        0.0
    } else {
        db.event_count() as f64 / db.len() as f64
    };
    let mut out = io::stdout().lock();
    writeln!(out, "sequences={}", db.len())?;
    writeln!(out, "distinct_items={}", db.distinct_items())?;
    writeln!(out, "avg_length={avg:.2}")?;
    writeln!(out, "max_length={}", db.max_length())?;
    writeln!(out, "total_utility={}", db.total_utility())?;
    writeln!(out, "has_duplicates={}", db.has_duplicates())?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Mine(a) => cmd_mine(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
        Command::Stats(a) => cmd_stats(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Failure>().map_or(2, |f| f.code);
            ExitCode::from(code)
        }
        Err(_) => {
            eprintln!("error: internal invariant failure");
            ExitCode::from(1)
        }
    }
}
