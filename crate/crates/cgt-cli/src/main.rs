//! Command-line front end for the group testing toolkit.
//!
//! Subcommands: `construct` (build and save a pooling matrix), `decode`
//! (analyze an outcome file), `simulate` (run tests against chosen or
//! random defectives and decode), `two-stage` (the full rake-and-winnow
//! protocol against a simulated hidden set), `verify` (brute-force matrix
//! properties), and `compare` (test-count tables, optionally diffed
//! against stored fixtures).
//!
//! Exit codes: 0 success/PASS, 1 logical failure (decode mismatch,
//! property FAIL, fixture diff, overflow), 2 usage or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use cgt_core::bignum::parse_count;
use cgt_core::bounds::{
    check_fixture, comparison_table, render_csv, render_text, MethodTag,
};
use cgt_core::crs::{bound_report, build_crs_matrix, optimize_plan, select_prime_plan};
use cgt_core::fileio;
use cgt_core::rw::{build_rw_matrix, draw_hidden, two_stage_identify, RwParams};
use cgt_core::smalld::{
    build_d2_matrix, build_d3_matrix, decode_d2, decode_d3, D2Params, D3Params,
};
use cgt_core::verify::{
    find_disjunct_counterexample, find_resolvability_counterexample,
    find_separability_counterexample, VerifyOptions,
};
use cgt_core::{
    decode_disjunct, disjunct_survivors, run_tests, DecodeResult, DefectiveSet, Method,
    OutcomeVector, TestMatrix,
};

#[derive(Parser)]
#[command(name = "cgt", version, about = "Combinatorial group testing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pooling matrix and write it as a CGT1 file.
    Construct(ConstructArgs),
    /// Decode an outcome file against a matrix file.
    Decode(DecodeArgs),
    /// Run the matrix against chosen or random defectives, then decode.
    Simulate(SimulateArgs),
    /// Run the two-stage rake-and-winnow protocol on a simulated hidden set.
    TwoStage(TwoStageArgs),
    /// Brute-force a matrix property (PASS/FAIL with counterexample).
    Verify(VerifyArgs),
    /// Tabulate test counts across methods; optionally diff a fixture.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Crs,
    Rw,
    D2,
    D3,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Item count (d2/d3 may instead derive it from --q).
    #[arg(long)]
    n: Option<String>,
    /// Defect bound (crs and rw).
    #[arg(long)]
    d: Option<u32>,
    /// Optimize CRS exponents by backtracking search.
    #[arg(long)]
    backtrack: bool,
    /// Digit count override for d2/d3.
    #[arg(long)]
    q: Option<u32>,
    /// Resolvability slack for rw (default d).
    #[arg(long)]
    k: Option<u32>,
    /// Stage-1 row parameter override for rw (multiple of d).
    #[arg(long)]
    t: Option<u32>,
    /// PRNG seed for rw.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output matrix path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    outcomes: PathBuf,
    /// Defect bound override for elimination decoding (default: the file's d).
    #[arg(long)]
    d: Option<u32>,
    /// List surviving items when the decoder reports overflow.
    #[arg(long)]
    dump_survivors: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Explicit defective items, comma separated (empty string for none).
    #[arg(long, conflicts_with = "random")]
    defectives: Option<String>,
    /// Draw this many random defectives instead.
    #[arg(long)]
    random: Option<usize>,
    /// Seed for random draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeat with fresh draws (seed stream advances per trial); requires --random.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Write the outcome file (single trial only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TwoStageArgs {
    #[arg(long)]
    n: String,
    #[arg(long)]
    d: u32,
    /// Resolvability slack (default d).
    #[arg(long)]
    k: Option<u32>,
    /// Stage-1 row parameter override (multiple of d).
    #[arg(long)]
    t: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Explicit hidden defectives, comma separated.
    #[arg(long, conflicts_with = "random_hidden")]
    hidden: Option<String>,
    /// Draw this many hidden defectives (default d).
    #[arg(long)]
    random_hidden: Option<usize>,
    /// On stage-1 overflow, retry with seed+1 up to this many times.
    #[arg(long, default_value_t = 0)]
    retry: u32,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Check d-disjunctness for this d.
    #[arg(long, conflicts_with_all = ["separable", "resolvable"])]
    disjunct: Option<u32>,
    /// Check separability of all column sums up to this d.
    #[arg(long, conflicts_with = "resolvable")]
    separable: Option<u32>,
    /// Check (d,k)-resolvability; takes the two values d k.
    #[arg(long, num_args = 2, value_names = ["D", "K"])]
    resolvable: Option<Vec<u32>>,
    /// Bypass the brute-force size guard.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    d: u32,
    /// Comma-separated item counts; scientific (1e30) and power (3^63)
    /// notation accepted.
    #[arg(long)]
    n: String,
    /// Comma-separated method tags (default depends on d).
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: TableFormat,
    /// Diff the computed table against this fixture CSV.
    #[arg(long)]
    fixture: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("CGT_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Construct(args) => cmd_construct(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::TwoStage(args) => cmd_two_stage(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn parse_n_u64(token: &str) -> anyhow::Result<u64> {
    let big = parse_count(token)?;
    cgt_core::bignum::to_u64(&big)
        .ok_or_else(|| anyhow!("n={token} is too large to materialize as a matrix"))
}

fn parse_item_list(s: &str) -> anyhow::Result<Vec<u64>> {
    let mut items = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        items.push(token.parse::<u64>().context("bad item index")?);
    }
    Ok(items)
}

fn cmd_construct(args: ConstructArgs) -> anyhow::Result<ExitCode> {
    let matrix = match args.method {
        MethodArg::Crs => {
            let n = parse_n_u64(args.n.as_deref().context("--n is required for crs")?)?;
            let d = args.d.context("--d is required for crs")?;
            if args.q.is_some() || args.k.is_some() || args.t.is_some() {
                bail!("--q/--k/--t do not apply to crs");
            }
            let mut plan = select_prime_plan(&BigUint::from(n), d)?;
            if args.backtrack {
                plan = optimize_plan(&plan)?;
            }
            let powers: Vec<String> = plan
                .entries()
                .iter()
                .map(|e| {
                    if e.exponent == 1 {
                        e.prime.to_string()
                    } else {
                        format!("{}^{}", e.prime, e.exponent)
                    }
                })
                .collect();
            println!(
                "n = {n} d = {d} : {} total tests: {}",
                powers.join(" "),
                plan.cost()
            );
            let report = bound_report(&plan)?;
            println!("count bound: {:.1}", report.count_bound);
            build_crs_matrix(n, &plan)?
        }
        MethodArg::Rw => {
            let n = parse_n_u64(args.n.as_deref().context("--n is required for rw")?)?;
            let d = args.d.context("--d is required for rw")?;
            if args.backtrack || args.q.is_some() {
                bail!("--backtrack/--q do not apply to rw");
            }
            let k = args.k.unwrap_or(d);
            let params = match args.t {
                Some(t) => RwParams::new(n, d, k, t, args.seed)?,
                None => RwParams::sized(n, d, k, args.seed)?,
            };
            build_rw_matrix(&params)?
        }
        MethodArg::D2 => {
            if args.d.is_some() || args.k.is_some() || args.t.is_some() || args.backtrack {
                bail!("only --n/--q apply to d2");
            }
            let params = d2_params_from(args.n.as_deref(), args.q)?;
            build_d2_matrix(&params)?
        }
        MethodArg::D3 => {
            if args.d.is_some() || args.k.is_some() || args.t.is_some() || args.backtrack {
                bail!("only --n/--q apply to d3");
            }
            let params = d3_params_from(args.n.as_deref(), args.q)?;
            build_d3_matrix(&params)?
        }
    };
    fileio::write_matrix(&args.out, &matrix)?;
    println!(
        "t={} n={} d={} sampling_rate={}",
        matrix.t(),
        matrix.n(),
        matrix.d(),
        matrix.sampling_rate()
    );
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn d2_params_from(n: Option<&str>, q: Option<u32>) -> anyhow::Result<D2Params> {
    match (n, q) {
        (Some(n), Some(q)) => Ok(D2Params::new(q, parse_n_u64(n)?)?),
        (Some(n), None) => Ok(D2Params::for_n(parse_n_u64(n)?)?),
        (None, Some(q)) => Ok(D2Params::new(q, 3u64.pow(q))?),
        (None, None) => bail!("d2 needs --n or --q"),
    }
}

fn d3_params_from(n: Option<&str>, q: Option<u32>) -> anyhow::Result<D3Params> {
    match (n, q) {
        (Some(n), Some(q)) => Ok(D3Params::new(q, parse_n_u64(n)?)?),
        (Some(n), None) => Ok(D3Params::for_n(parse_n_u64(n)?)?),
        (None, Some(q)) => Ok(D3Params::new(q, 1u64 << q)?),
        (None, None) => bail!("d3 needs --n or --q"),
    }
}

/// Decode per the matrix's own method; rw matrices report stage-1
/// candidates awaiting individual confirmation.
fn decode_by_method(
    m: &TestMatrix,
    o: &OutcomeVector,
    d_override: Option<u32>,
) -> anyhow::Result<DecodeResult> {
    let result = match m.method() {
        Method::D2 => decode_d2(o, &D2Params::from_matrix(m)?)?,
        Method::D3 => decode_d3(o, &D3Params::from_matrix(m)?)?,
        Method::Rw => {
            let survivors = disjunct_survivors(m, o)?;
            DecodeResult::Candidates(DefectiveSet::new(survivors))
        }
        Method::Crs | Method::Custom => decode_disjunct(m, o, d_override.unwrap_or(m.d()))?,
    };
    Ok(result)
}

fn print_decode(result: &DecodeResult) {
    match result {
        DecodeResult::Identified(set) => println!("identified {set}"),
        DecodeResult::Candidates(set) => {
            println!("candidates {set} (stage-2 confirmation pending)")
        }
        DecodeResult::Overflow(count) => {
            println!("overflow: {count} survivors exceed the defect bound")
        }
    }
}

fn cmd_decode(args: DecodeArgs) -> anyhow::Result<ExitCode> {
    let matrix = fileio::read_matrix(&args.matrix)?;
    let outcomes = fileio::read_outcomes(&args.outcomes)?;
    let result = decode_by_method(&matrix, &outcomes, args.d)?;
    print_decode(&result);
    if let DecodeResult::Overflow(_) = result {
        if args.dump_survivors {
            let survivors = disjunct_survivors(&matrix, &outcomes)?;
            println!("survivors {}", DefectiveSet::new(survivors));
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let matrix = fileio::read_matrix(&args.matrix)?;
    if args.trials != 1 && args.random.is_none() {
        bail!("--trials needs --random");
    }
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if args.out.is_some() && args.trials != 1 {
        bail!("--out applies to a single trial");
    }

    let mut all_ok = true;
    for trial in 0..args.trials {
        let defectives = match (&args.defectives, args.random) {
            (Some(list), None) => DefectiveSet::new(parse_item_list(list)?),
            (None, Some(count)) => {
                if count as u64 > matrix.n() {
                    bail!("cannot draw {count} distinct items from {}", matrix.n());
                }
                draw_hidden(args.seed, trial as u64, matrix.n(), count)
            }
            _ => bail!("choose exactly one of --defectives or --random"),
        };
        if defectives.len() > matrix.d() as usize {
            eprintln!(
                "warning: {} defectives exceed the matrix's declared d={}",
                defectives.len(),
                matrix.d()
            );
        }
        let outcomes = run_tests(&matrix, &defectives)?;
        let result = decode_by_method(&matrix, &outcomes, None)?;
        let ok = matches!(
            &result,
            DecodeResult::Identified(set) | DecodeResult::Candidates(set) if *set == defectives
        );
        all_ok &= ok;
        if args.trials > 1 {
            print!("trial {trial}: ");
        }
        println!("defectives {defectives} outcomes {outcomes}");
        print_decode(&result);
        println!("match: {}", if ok { "yes" } else { "no" });
        if let Some(out) = &args.out {
            fileio::write_outcomes(out, &outcomes)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_two_stage(args: TwoStageArgs) -> anyhow::Result<ExitCode> {
    let n = parse_n_u64(&args.n)?;
    let k = args.k.unwrap_or(args.d);
    let hidden = match (&args.hidden, args.random_hidden) {
        (Some(list), None) => DefectiveSet::new(parse_item_list(list)?),
        (None, count) => {
            let count = count.unwrap_or(args.d as usize);
            if count as u64 > n {
                bail!("cannot draw {count} distinct items from {n}");
            }
            draw_hidden(args.seed, 0, n, count)
        }
        _ => unreachable!("clap conflicts_with"),
    };
    if let Some(&max) = hidden.items().last() {
        if max >= n {
            bail!("hidden item {max} is out of range for n={n}");
        }
    }
    if hidden.len() > args.d as usize {
        eprintln!(
            "warning: {} hidden defectives exceed d={}",
            hidden.len(),
            args.d
        );
    }

    let mut seed = args.seed;
    for attempt in 0..=args.retry {
        let params = match args.t {
            Some(t) => RwParams::new(n, args.d, k, t, seed)?,
            None => RwParams::sized(n, args.d, k, seed)?,
        };
        let transcript =
            two_stage_identify(&params, |pool| pool.iter().any(|j| hidden.contains(*j)))?;
        println!(
            "attempt {attempt}: seed={seed} stage1_tests={} candidates={} stage2_tests={} final={} failed={}",
            params.rows(),
            transcript.stage1_candidates.len(),
            transcript.stage2_tests,
            transcript.final_set,
            transcript.failed
        );
        if !transcript.failed {
            let ok = transcript.final_set == hidden;
            println!("hidden {hidden} match: {}", if ok { "yes" } else { "no" });
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        seed = seed.wrapping_add(1);
    }
    println!("stage 1 overflowed on every attempt; rerun with --retry or a new seed");
    Ok(ExitCode::from(1))
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let matrix = fileio::read_matrix(&args.matrix)?;
    let opts = VerifyOptions {
        force: args.force,
        ..Default::default()
    };
    let (label, failure) = if let Some(d) = args.disjunct {
        let witness = find_disjunct_counterexample(&matrix, d, opts)?;
        (
            format!("{d}-disjunct"),
            witness.map(|w| {
                format!(
                    "columns {} cover column {}",
                    DefectiveSet::new(w.defectives),
                    w.covered
                )
            }),
        )
    } else if let Some(d) = args.separable {
        let witness = find_separability_counterexample(&matrix, d, opts)?;
        (
            format!("{d}-separable"),
            witness.map(|w| {
                format!(
                    "subsets {} and {} share a union",
                    DefectiveSet::new(w.first),
                    DefectiveSet::new(w.second)
                )
            }),
        )
    } else if let Some(dk) = args.resolvable {
        let (d, k) = (dk[0], dk[1]);
        let witness = find_resolvability_counterexample(&matrix, d, k, opts)?;
        (
            format!("({d},{k})-resolvable"),
            witness.map(|w| {
                format!(
                    "defectives {} leave {} indistinguishable",
                    DefectiveSet::new(w.defectives),
                    DefectiveSet::new(w.indistinguishable)
                )
            }),
        )
    } else {
        bail!("choose one of --disjunct, --separable, --resolvable");
    };

    match failure {
        None => {
            println!("PASS {label}");
            Ok(ExitCode::SUCCESS)
        }
        Some(counterexample) => {
            println!("FAIL {label}: {counterexample}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<ExitCode> {
    let ns: Vec<BigUint> = args
        .n
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_count(t.trim()).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<_>>()?;
    if ns.is_empty() {
        bail!("--n lists no item counts");
    }
    let methods: Vec<MethodTag> = match &args.methods {
        Some(list) => list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse().map_err(anyhow::Error::from))
            .collect::<anyhow::Result<_>>()?,
        None => MethodTag::defaults(args.d),
    };
    let rows = comparison_table(args.d, &ns, &methods)?;
    match args.format {
        TableFormat::Text => print!("{}", render_text(args.d, &rows)),
        TableFormat::Csv => print!("{}", render_csv(&rows)),
    }
    if let Some(path) = &args.fixture {
        let fixture = std::fs::read_to_string(path)
            .with_context(|| format!("reading fixture {}", path.display()))?;
        let report = check_fixture(&rows, &fixture)?;
        if report.passed() {
            println!("fixture: {} cells match", report.checked);
        } else {
            for m in &report.mismatches {
                println!("fixture mismatch: {m}");
            }
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}
