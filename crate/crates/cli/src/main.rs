//! Command-line front end: curve classification, single-twist descents,
//! twist-class sweeps, model tables, and the verification suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation error,
//! 3 verification failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use twodescent::curves::CurveModel;
use twodescent::harness::{
    sweep, twist_record, write_report, SweepConfig, SweepResult, TwistClassSpec, CSV_HEADER,
};
use twodescent::randmodel::{
    p_alt_exact_f64, p_mat_exact_f64, p_mat_limit, p_v_exact_f64, sample_p_v_seeded,
    RankDistribution,
};

#[derive(Parser)]
#[command(
    name = "twodescent",
    about = "Descent by 2-isogeny on quadratic twist families",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify curves into the five cases and report their isogeny graphs.
    Classify(ClassifyArgs),
    /// Full descent record for a single twist.
    Descend(DescendArgs),
    /// Descent sweep over a twist class.
    Sweep(SweepArgs),
    /// Kernel-rank model tables.
    Model(ModelArgs),
    /// Run the module-lemma and moment-identity verification suite.
    Verify,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Curve as "A B" (model y^2 = x^3 + Ax^2 + Bx) or "roots: r s".
    #[arg(allow_hyphen_values = true)]
    curve: Option<String>,
    /// Batch file, one curve per line.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct DescendArgs {
    /// Curve as "A B" or "roots: r s".
    #[arg(long, allow_hyphen_values = true)]
    curve: String,
    /// Nonzero twist (reduced to its squarefree kernel).
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    curve: String,
    /// Class representative; ignored with --all-classes.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    d0: i64,
    #[arg(long)]
    height: i64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output directory for the CSV and JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Append-only store enabling resume.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Sweep every class at once, bucketing all squarefree twists.
    #[arg(long)]
    all_classes: bool,
    /// Carry Selmer bases (needed for moment estimation downstream).
    #[arg(long)]
    with_bases: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// One of: mat, alt, v, case4, case5.
    #[arg(long)]
    dist: String,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    u1: Option<i64>,
    #[arg(long)]
    u0: Option<u32>,
    #[arg(long, default_value_t = 40)]
    max_rank: u32,
    /// Monte-Carlo cross-check instead of the exact law (dist = v only).
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Required on Monte-Carlo paths; exact paths take no randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let run = match cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Descend(args) => cmd_descend(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Model(args) => cmd_model(args),
        Command::Verify => return cmd_verify(),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{{\"error\": {:?}}}", e.to_string());
            ExitCode::from(if e.downcast_ref::<UsageError>().is_some() {
                1
            } else {
                2
            })
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Parses "A B" or "roots: r s" (ASCII or typographic minus).
fn parse_curve(text: &str) -> anyhow::Result<CurveModel> {
    let text = text.replace('\u{2212}', "-");
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("roots:") {
        let parts: Vec<i64> = rest
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|e| usage(format!("bad roots line {text:?}: {e}")))?;
        if parts.len() != 2 {
            return Err(usage(format!("expected two roots in {text:?}")));
        }
        return CurveModel::from_roots(parts[0], parts[1]).map_err(|e| anyhow!(e));
    }
    let parts: Vec<i64> = text
        .split_whitespace()
        .map(|t| t.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("bad curve line {text:?}: {e}")))?;
    if parts.len() != 2 {
        return Err(usage(format!("expected \"A B\" in {text:?}")));
    }
    CurveModel::new(parts[0], parts[1]).map_err(|e| anyhow!(e))
}

fn cmd_classify(args: ClassifyArgs) -> anyhow::Result<()> {
    let lines: Vec<String> = match (&args.curve, &args.file) {
        (Some(c), None) => vec![c.clone()],
        (None, Some(path)) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {path:?}"))?
            .lines()
            .map(str::to_string)
            .filter(|l| !l.trim().is_empty())
            .collect(),
        _ => return Err(usage("pass exactly one of a curve argument or --file")),
    };
    for line in lines {
        let e = parse_curve(&line)?;
        let c = twodescent::curves::classify(&e)?;
        println!("{}", serde_json::to_string(&c)?);
    }
    Ok(())
}

fn cmd_descend(args: DescendArgs) -> anyhow::Result<()> {
    let e = parse_curve(&args.curve)?;
    if args.d == 0 {
        return Err(usage("--d must be nonzero"));
    }
    let d = twodescent::arith::squarefree_kernel(args.d)?
        .representative()
        .map_err(|e| anyhow!(e))?;
    let record = twist_record(&e, d, true);
    if !record.violations.is_empty() {
        bail!("descent violations: {:?}", record.violations);
    }
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let e = parse_curve(&args.curve)?;
    if args.height < 1 {
        return Err(usage("--height must be positive"));
    }
    std::fs::create_dir_all(&args.out)?;
    let config = SweepConfig {
        height: args.height,
        threads: args.threads.max(1),
        store: args.store.clone(),
        with_bases: args.with_bases,
    };
    let results: Vec<SweepResult> = if args.all_classes {
        let mut buckets: BTreeMap<String, Vec<i64>> = BTreeMap::new();
        for n in twodescent::harness::squarefree_integers(args.height) {
            for d in [n, -n] {
                let key = TwistClassSpec::class_key(&e, d)?;
                buckets.entry(key).or_default().push(d);
            }
        }
        buckets
            .into_values()
            .map(|ds| twodescent::harness::sweep_records(&e, ds[0], &ds, &config))
            .collect::<Result<_, _>>()?
    } else {
        let spec = TwistClassSpec::new(&e, args.d0)?;
        vec![sweep(&e, &spec, &config)?]
    };

    let tag = format!("{}_{}_H{}", e.a, e.b, args.height);
    let csv_path = args.out.join(format!("sweep_{tag}.csv"));
    let mut csv = std::fs::File::create(&csv_path)?;
    writeln!(csv, "{CSV_HEADER}")?;
    for r in &results {
        for rec in &r.records {
            writeln!(csv, "{}", rec.csv_row())?;
        }
    }
    let reports: Vec<_> = results
        .iter()
        .map(write_report)
        .collect::<Result<_, _>>()?;
    let report_path = args.out.join(format!("report_{tag}.json"));
    std::fs::write(&report_path, serde_json::to_string_pretty(&reports)?)?;
    let violations: usize = results.iter().map(|r| r.violations.len()).sum();
    eprintln!(
        "wrote {} and {} ({} twists, {} violations)",
        csv_path.display(),
        report_path.display(),
        results.iter().map(|r| r.records.len()).sum::<usize>(),
        violations
    );
    if violations > 0 {
        bail!("sweep recorded {violations} invariant violations");
    }
    Ok(())
}

fn cmd_model(args: ModelArgs) -> anyhow::Result<()> {
    if args.mc && args.seed.is_none() {
        return Err(usage(
            "--mc requires --seed: Monte-Carlo paths must be seeded",
        ));
    }
    let need = |v: Option<u32>, name: &str| v.ok_or_else(|| usage(format!("--{name} required")));
    let table: RankDistribution = match args.dist.as_str() {
        "mat" => match (args.m, args.n, args.u) {
            (Some(m), Some(n), None) => {
                let mut probs = BTreeMap::new();
                for j in 0..=n {
                    probs.insert(j, p_mat_exact_f64(j, m, n)?);
                }
                RankDistribution::from_probs(probs, 0.0, 0.0)
            }
            (None, None, Some(u)) => {
                let probs: BTreeMap<u32, f64> = (0..=args.max_rank)
                    .map(|j| (j, p_mat_limit(j, u, 1e-12)))
                    .collect();
                let mass: f64 = probs.values().sum();
                RankDistribution::from_probs(probs, (1.0 - mass).abs(), 1e-10)
            }
            _ => return Err(usage("mat needs --m and --n (exact) or --u (limit)")),
        },
        "alt" => {
            let n = need(args.n, "n")?;
            let probs: BTreeMap<u32, f64> =
                (0..=n).map(|j| (j, p_alt_exact_f64(j, n))).collect();
            RankDistribution::from_probs(probs, 0.0, 0.0)
        }
        "v" => {
            let n = need(args.n, "n")?;
            let m = need(args.m, "m")?;
            if args.mc {
                let seed = args.seed.expect("checked above");
                let probs: BTreeMap<u32, f64> = (0..=n)
                    .map(|j| (j, sample_p_v_seeded(j, n, m, args.samples, seed)))
                    .collect();
                RankDistribution::from_probs(probs, 0.0, 1.0 / (args.samples as f64).sqrt())
            } else {
                let mut probs = BTreeMap::new();
                for j in 0..=n {
                    probs.insert(j, p_v_exact_f64(j, n, m)?);
                }
                RankDistribution::from_probs(probs, 0.0, 0.0)
            }
        }
        "case4" => {
            let u = args.u.ok_or_else(|| usage("--u required"))?;
            twodescent::randmodel::case_iv_r2_model_capped(u, args.max_rank).marginal_r2()
        }
        "case5" => {
            let u1 = args.u1.ok_or_else(|| usage("--u1 required"))?;
            let u0 = need(args.u0, "u0")?;
            twodescent::randmodel::case_v_r2_model_capped(u1, u0, args.max_rank)?.marginal_r2()
        }
        other => return Err(usage(format!("unknown distribution {other:?}"))),
    };
    let csv = table.to_csv();
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_verify() -> ExitCode {
    let mut failures = 0usize;
    let check = |name: &str, ok: bool, failures: &mut usize| {
        println!("{}  {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            *failures += 1;
        }
    };

    match twodescent::galmod::verify_all_lemmas() {
        Ok(reports) => {
            for r in &reports {
                check(
                    &format!("{} {:?}", r.proposition, r.parameters),
                    r.verified,
                    &mut failures,
                );
            }
        }
        Err(e) => {
            println!("FAIL  module lemmas errored: {e}");
            failures += 1;
        }
    }

    for u in -2i64..=2 {
        for a in 0..=3u32 {
            for b in 0..=3u32 {
                let target =
                    ((a as i64 * u) as f64 + (a * b) as f64 + (b * (b + 1)) as f64 / 2.0).exp2();
                let got = twodescent::randmodel::moment_mu_iv(a, b, u);
                check(
                    &format!("pair-category moment a={a} b={b} u={u}"),
                    (got - target).abs() <= 1e-6 * target,
                    &mut failures,
                );
            }
        }
    }
    for l_dim in 0..=4u32 {
        for u in -2i64..=2 {
            for d in 0..=3u32 {
                let o = twodescent::randmodel::ObjD::new(
                    d,
                    twodescent::gf2::Subspace::zero(l_dim as usize),
                )
                .expect("valid object");
                let target = ((u * d as i64) as f64 - (l_dim as f64) * (d as f64)).exp2();
                match twodescent::randmodel::moment_mu_v(&o, u, l_dim) {
                    Ok(got) => check(
                        &format!("over-L moment d={d} u={u} L={l_dim}"),
                        (got - target).abs() <= 1e-6 * target,
                        &mut failures,
                    ),
                    Err(e) => check(
                        &format!("over-L moment d={d} u={u} L={l_dim}: {e}"),
                        false,
                        &mut failures,
                    ),
                }
            }
        }
    }
    if failures == 0 {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} checks failed");
        ExitCode::from(3)
    }
}
