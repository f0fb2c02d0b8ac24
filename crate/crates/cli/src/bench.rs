use std::collections::BTreeSet;
use std::io::{self, Write};

use anyhow::Result;
use clap::Args;

use seqrule::miner::{self, MiningConfig, MiningStats, Variant};
use seqrule::model::Rule;

use crate::{echo_config, Failure, InputArgs, ThresholdArgs};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Comma-separated variants to run.
    #[arg(long, value_delimiter = ',', default_value = "rsc,rscn,rscp,rscr")]
    variants: Vec<Variant>,
    /// Runs per variant; the median runtime is reported.
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

struct Row {
    variant: Variant,
    stats: MiningStats,
    median_ms: u128,
}

/// Peak resident set size of this process in KiB, read from
/// `/proc/self/status`. Process-wide and cumulative over all variants run so
/// far, so only a rough indication; `None` off Linux.
fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn median(mut xs: Vec<u128>) -> u128 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

pub fn cmd_bench(args: &BenchArgs) -> Result<u8> {
    args.thresholds.check()?;
    if args.repeat == 0 {
        return Err(Failure::usage("--repeat must be at least 1"));
    }
    if args.variants.is_empty() {
        return Err(Failure::usage("--variants must name at least one variant"));
    }
    let db = args.input.load()?;
    let (minutil, minconf) = args.thresholds.resolve(&db)?;
    let names: Vec<&str> = args.variants.iter().map(|v| v.name()).collect();
    echo_config(&[
        ("command", "bench".into()),
        ("input", args.input.input.display().to_string()),
        ("minutil", minutil.to_string()),
        ("minconf", minconf.to_string()),
        ("dedup", args.input.dedup.to_string()),
        ("variants", names.join(",")),
        ("repeat", args.repeat.to_string()),
        ("threads", args.threads.to_string()),
    ]);

    let mut rows = Vec::new();
    let mut reference: Option<(Variant, BTreeSet<Rule>)> = None;
    for &variant in &args.variants {
        let mut cfg = MiningConfig::new(minutil, minconf).with_variant(variant);
        cfg.dedup = args.input.dedup;
        cfg.threads = args.threads;
        let mut times = Vec::with_capacity(args.repeat);
        let mut first = None;
        for _ in 0..args.repeat {
            let (rules, stats) =
                miner::mine(&db, &cfg).map_err(|e| Failure::usage(e.to_string()))?;
            times.push(stats.runtime_ms);
            first.get_or_insert((rules, stats));
        }
        let (rules, stats) = first.expect("repeat >= 1");
        let set: BTreeSet<Rule> = rules.into_iter().collect();
        match &reference {
            None => reference = Some((variant, set)),
            Some((base, base_set)) if *base_set != set => {
                return Err(Failure::internal(format!(
                    "rule sets differ: {base} found {} rules, {variant} found {}",
                    base_set.len(),
                    set.len()
                )));
            }
            Some(_) => {}
        }
        rows.push(Row {
            variant,
            stats,
            median_ms: median(times),
        });
    }

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<8} {:>12} {:>16} {:>12} {:>10} {:>10}",
        "variant", "candidates", "srtgrowth_calls", "rrs_prunes", "rules", "median_ms"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:<8} {:>12} {:>16} {:>12} {:>10} {:>10}",
            r.variant.name(),
            r.stats.candidates,
            r.stats.srt_growth_calls,
            r.stats.rrs_prunes,
            r.stats.rules,
            r.median_ms
        )?;
    }
    for r in &rows {
        writeln!(out)?;
        writeln!(out, "variant={}", r.variant.name())?;
        writeln!(out, "candidates={}", r.stats.candidates)?;
        writeln!(out, "srtgrowth_calls={}", r.stats.srt_growth_calls)?;
        writeln!(out, "rrs_prunes={}", r.stats.rrs_prunes)?;
        writeln!(out, "rules={}", r.stats.rules)?;
        writeln!(out, "median_runtime_ms={}", r.median_ms)?;
    }
    writeln!(out)?;
    match peak_rss_kib() {
        Some(kib) => writeln!(out, "process_peak_rss_kib={kib} # implementation-dependent")?,
        None => writeln!(out, "process_peak_rss_kib=unavailable")?,
    }
    Ok(0)
}
