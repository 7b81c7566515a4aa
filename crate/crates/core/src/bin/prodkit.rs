//! Command-line front end: sequence parsing, analysis dispatch, JSON/CSV
//! reporting.
//!
//! Exit codes: 0 = analysis completed (whatever the verdict), 1 = input
//! error, 2 = hypothesis failure under `--strict`.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use prodkit::accum::{self, AnalysisParams};
use prodkit::convtests;
use prodkit::error::Error;
use prodkit::matprod::{self, SummabilityMatrix};
use prodkit::numerics::Precision;
use prodkit::powerprod::{self, PowerProduct};
use prodkit::rearrange::{self, Target};
use prodkit::seq::{PosSeq, RealSeq};
use prodkit::unordered::{self, ChainRule, IndexedFamily, PartitionRule, Universe};

#[derive(Parser)]
#[command(
    name = "prodkit",
    version,
    about = "Convergence analysis for infinite products of positive reals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence verdict for prod a_n
    Analyze(AnalyzeArgs),
    /// Verdict for prod mmod(a_n) with the sandwich bounds
    #[command(name = "m-absolute")]
    MAbsolute(AnalyzeArgs),
    /// Cross-check the compensated accumulator against the double-double oracle
    Oracle(AnalyzeArgs),
    /// Greedy rearrangement with prescribed liminf/limsup
    Rearrange(RearrangeArgs),
    /// Rearrangement invariance under random permutations
    Invariance(InvarianceArgs),
    /// Uniform tail bound for exponent families and subproducts
    Tails(TailsArgs),
    /// Products over abstract index sets (nets over finite subsets)
    Unordered {
        #[command(subcommand)]
        op: UnorderedOp,
    },
    /// Convergence tests
    Test {
        #[command(subcommand)]
        op: TestOp,
    },
    /// The star action of matrices on positive vectors
    Matrix {
        #[command(subcommand)]
        op: MatrixOp,
    },
    /// Power products
    Power {
        #[command(subcommand)]
        op: PowerOp,
    },
}

#[derive(Args)]
struct SeqArg {
    /// Sequence expression in n, or a JSON array of positive values
    #[arg(long)]
    seq: String,
    /// Index origin (0 or 1)
    #[arg(long, default_value_t = 1)]
    origin: u64,
}

impl SeqArg {
    fn build(&self) -> Result<PosSeq, Error> {
        build_seq(&self.seq, self.origin)
    }
}

fn build_seq(text: &str, origin: u64) -> Result<PosSeq, Error> {
    let trimmed = text.trim();
    let seq = if trimmed.starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(trimmed)
            .map_err(|e| Error::InvalidInput(format!("bad JSON value list: {e}")))?;
        PosSeq::from_values(values)?
    } else {
        PosSeq::from_expr_str(trimmed)?
    };
    seq.with_origin(origin)
}

fn build_real_seq(text: &str, origin: u64) -> Result<RealSeq, Error> {
    let trimmed = text.trim();
    let seq = if trimmed.starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(trimmed)
            .map_err(|e| Error::InvalidInput(format!("bad JSON value list: {e}")))?;
        RealSeq::from_values(values)?
    } else {
        RealSeq::from_expr_str(trimmed)?
    };
    seq.with_origin(origin)
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    seq: SeqArg,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long = "n-max", default_value_t = 1_000_000)]
    n_max: u64,
    /// Trailing window length (default n-max / 2)
    #[arg(long)]
    window: Option<u64>,
    /// Emit the partial-product trace as CSV instead of a JSON report
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
    /// Decimation step for the CSV trace
    #[arg(long)]
    every: Option<u64>,
    #[arg(long)]
    strict: bool,
}

impl AnalyzeArgs {
    fn params(&self) -> Result<AnalysisParams, Error> {
        AnalysisParams::new(
            self.eps,
            self.n_max,
            self.window.unwrap_or((self.n_max / 2).max(1)),
            Precision::from_env(),
        )
    }
}

#[derive(Args)]
struct RearrangeArgs {
    #[command(flatten)]
    seq: SeqArg,
    /// liminf target: a positive number, 0, or "inf"
    #[arg(long)]
    alpha: String,
    /// limsup target: a positive number, 0, or "inf"
    #[arg(long)]
    beta: String,
    #[arg(long = "max-factors", default_value_t = 1_000_000)]
    max_factors: u64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Write the milestone trace as JSON lines to this file
    #[arg(long = "trace-file")]
    trace_file: Option<std::path::PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct InvarianceArgs {
    #[command(flatten)]
    seq: SeqArg,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long = "n-max", default_value_t = 100_000)]
    n_max: u64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TailsArgs {
    #[command(flatten)]
    seq: SeqArg,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    horizon: u64,
    /// Random exponent families to spot-check against the bound
    #[arg(long = "exponent-trials", default_value_t = 0)]
    exponent_trials: u32,
    /// Random subproduct masks to spot-check against the bound
    #[arg(long = "mask-trials", default_value_t = 0)]
    mask_trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FamilyArgs {
    /// Term rule as an expression in the (possibly negative) index n,
    /// or JSON pairs [[index, value], ...] for a finite family
    #[arg(long)]
    family: String,
    /// Index universe: nat | signed (ignored for JSON pairs)
    #[arg(long, default_value = "nat")]
    universe: String,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    horizon: u64,
}

impl FamilyArgs {
    fn build(&self) -> Result<IndexedFamily, Error> {
        let trimmed = self.family.trim();
        if trimmed.starts_with('[') {
            let pairs: Vec<(i64, f64)> = serde_json::from_str(trimmed)
                .map_err(|e| Error::InvalidInput(format!("bad JSON pair list: {e}")))?;
            return IndexedFamily::from_pairs(pairs);
        }
        let universe = match self.universe.as_str() {
            "nat" => Universe::Naturals,
            "signed" => Universe::NonzeroIntegers,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown universe `{other}` (expected nat or signed)"
                )))
            }
        };
        IndexedFamily::from_expr_str(universe, trimmed)
    }
}

#[derive(Subcommand)]
enum UnorderedOp {
    /// Net convergence via the complement-subset criterion
    Converges(FamilyArgs),
    /// Convergence over I1/I2 with the product identity
    Split(FamilyArgs),
    /// Sizes of the threshold sets G_n and H_n
    Support(FamilyArgs),
    /// Net limit along a cofinal chain
    Chain {
        #[command(flatten)]
        fam: FamilyArgs,
        /// prefix | evens-odds | mod:k, or JSON sets [[i,...],...]
        #[arg(long, default_value = "prefix")]
        rule: String,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
    },
    /// Iterated product over a partition into blocks
    Decompose {
        #[command(flatten)]
        fam: FamilyArgs,
        /// single | mod:k | isolate-odds, or JSON blocks [[i,...],...]
        #[arg(long, default_value = "mod:3")]
        rule: String,
    },
    /// All equivalence routes plus random enumerations
    Suite {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        enumerations: u32,
        /// Tolerance for value agreement across routes (scale it with the
        /// horizon: realized prefixes differ by their truncation tails)
        #[arg(long = "value-tol", default_value_t = 1e-6)]
        value_tol: f64,
    },
}

#[derive(Subcommand)]
enum TestOp {
    /// Root-type sufficiency test on a_n^(1/t_n)
    Root {
        #[command(flatten)]
        seq: SeqArg,
        /// Weight sequence t_n (expression or JSON array)
        #[arg(long)]
        weights: String,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long = "n-max", default_value_t = 100_000)]
        n_max: u64,
        #[arg(long)]
        strict: bool,
    },
    /// Cauchy condensation for non-increasing factors >= 1
    Condense {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, default_value_t = 40)]
        depth: u32,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long = "n-max", default_value_t = 1_000_000)]
        n_max: u64,
        #[arg(long)]
        strict: bool,
    },
    /// Alternating product a_1 a_2^-1 a_3 ...
    Alternating {
        #[command(flatten)]
        seq: SeqArg,
        /// Transform through n -> 1/(1 - a_n) first (corollary form)
        #[arg(long)]
        complement: bool,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long = "n-max", default_value_t = 1_000_000)]
        n_max: u64,
        #[arg(long)]
        strict: bool,
    },
    /// Cesaro product means sigma_n
    Cesaro {
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long, default_value = "1")]
        weights: String,
        #[arg(long = "n-max", default_value_t = 1_000_000)]
        n_max: u64,
        #[arg(long)]
        every: Option<u64>,
        #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
        format: String,
    },
    /// Bounded-partial-sums test for prod b_k^(a_k)
    Abel {
        #[command(flatten)]
        seq: SeqArg,
        /// Exponent sequence a_k (expression or JSON array)
        #[arg(long)]
        exponents: String,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long = "n-max", default_value_t = 1_000_000)]
        n_max: u64,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Subcommand)]
enum MatrixOp {
    /// Apply the star action of a matrix to a positive vector
    Apply {
        /// JSON {"rows": [[...], ...]} inline or a path to a JSON file
        #[arg(long)]
        matrix: String,
        /// JSON array of positive entries
        #[arg(long)]
        vector: String,
    },
    /// Randomized verification of the three homomorphism identities
    #[command(name = "check-identities")]
    CheckIdentities {
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Regular product-summability transform y_m = prod x_n^(a_(m,n))
    Regular {
        /// cesaro | euler:q | JSON {"kind":"explicit-rows","rows":...} or a file path
        #[arg(long, default_value = "cesaro")]
        kind: String,
        #[command(flatten)]
        seq: SeqArg,
        #[arg(long = "m-max", default_value_t = 1_000_000)]
        m_max: u64,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Known positive limit p of x_n (transforms through x_n / p)
        #[arg(long)]
        limit: Option<f64>,
        #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
        format: String,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Subcommand)]
enum PowerOp {
    /// Evaluate prod a_n^(x^n)
    Eval {
        /// Base sequence a_n (expression or JSON array)
        #[arg(long = "base-seq")]
        base_seq: String,
        #[arg(long, default_value_t = 0)]
        origin: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long = "n-max", default_value_t = 100_000)]
        n_max: u64,
    },
    /// Scan the convergence region over a grid of x
    Scan {
        #[arg(long = "base-seq")]
        base_seq: String,
        #[arg(long, default_value_t = 1)]
        origin: u64,
        /// "a:b:step" or a JSON array of x values
        #[arg(long = "x-grid", allow_hyphen_values = true)]
        x_grid: String,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long = "n-max", default_value_t = 100_000)]
        n_max: u64,
        #[arg(long)]
        strict: bool,
    },
    /// Cauchy-product geometric means
    Cauchy {
        /// First factor sequence (origin 0)
        #[arg(long = "seq-a")]
        seq_a: String,
        /// Second factor sequence (origin 0)
        #[arg(long = "seq-b")]
        seq_b: String,
        #[arg(long = "n-max", default_value_t = 100_000)]
        n_max: u64,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
    },
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    command: &'static str,
    result: T,
}

fn emit<T: Serialize>(command: &'static str, result: T) {
    let doc = Envelope { command, result };
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("reports serialize")
    );
}

/// Outcome of a handler: whether any hypothesis check failed (drives the
/// exit code under --strict).
struct Outcome {
    hypothesis_failed: bool,
    strict: bool,
}

impl Outcome {
    fn clean() -> Self {
        Outcome {
            hypothesis_failed: false,
            strict: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            if outcome.strict && outcome.hypothesis_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Analyze(args) => {
            let seq = args.seq.build()?;
            let params = args.params()?;
            if args.format == "csv" {
                let every = args.every.unwrap_or((args.n_max / 1000).max(1));
                println!("n,u_n");
                for item in accum::partial_products(&seq, args.n_max, params.precision) {
                    let (n, u) = item?;
                    if n % every == 0 || n == args.n_max {
                        println!("{n},{u}");
                    }
                }
                return Ok(Outcome::clean());
            }
            let verdict = accum::estimate_convergence(&seq, &params)?;
            emit("analyze", verdict);
            Ok(Outcome::clean())
        }
        Command::MAbsolute(args) => {
            let seq = args.seq.build()?;
            let report = accum::m_absolute_verdict(&seq, &args.params()?)?;
            let failed = !report.sandwich_ok || report.implies_convergence_ok == Some(false);
            emit("m-absolute", report);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict: args.strict,
            })
        }
        Command::Oracle(args) => {
            let seq = args.seq.build()?;
            let report = accum::oracle_compare(&seq, &args.params()?)?;
            let failed = !report.ok;
            emit("oracle", report);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict: args.strict,
            })
        }
        Command::Rearrange(args) => {
            let seq = args.seq.build()?;
            let alpha = parse_target(&args.alpha)?;
            let beta = parse_target(&args.beta)?;
            let params = AnalysisParams::new(
                args.eps,
                args.max_factors.max(2),
                (args.max_factors / 2).max(1),
                Precision::from_env(),
            )?;
            let (_, plan) =
                rearrange::riemann_rearrange(&seq, alpha, beta, args.max_factors, &params)?;
            if let Some(path) = &args.trace_file {
                std::fs::write(path, plan.trace_json_lines())
                    .map_err(|e| Error::InvalidInput(format!("cannot write trace: {e}")))?;
            }
            let verdict = rearrange::plan_verdict(&plan, args.eps);
            let failed = !plan.warnings.is_empty();
            emit(
                "rearrange",
                json!({
                    "verdict": verdict,
                    "final_u": plan.final_u,
                    "emitted": plan.emitted,
                    "cycles": plan.cycles_completed,
                    "exhausted": plan.exhausted,
                    "warnings": plan.warnings,
                    "milestones_recorded": plan.milestones.len(),
                }),
            );
            Ok(Outcome {
                hypothesis_failed: failed,
                strict: args.strict,
            })
        }
        Command::Invariance(args) => {
            let seq = args.seq.build()?;
            let report = rearrange::verify_rearrangement_invariance(
                &seq,
                args.trials,
                args.n_max,
                args.eps,
                args.seed,
                Precision::from_env(),
            )?;
            emit("invariance", report);
            Ok(Outcome::clean())
        }
        Command::Tails(args) => {
            let seq = args.seq.build()?;
            let report = rearrange::uniform_tail_bound(&seq, args.eps, args.horizon)?;
            let spot = match (report.n0, args.exponent_trials + args.mask_trials) {
                (Some(n0), t) if t > 0 => Some(rearrange::spot_check_uniform_bound(
                    &seq,
                    n0,
                    args.eps,
                    seq.origin() + args.horizon - 1,
                    args.exponent_trials,
                    args.mask_trials,
                    args.seed,
                )?),
                _ => None,
            };
            let failed = report.n0.is_none();
            emit("tails", json!({ "bound": report, "spot_check": spot }));
            Ok(Outcome {
                hypothesis_failed: failed,
                strict: false,
            })
        }
        Command::Unordered { op } => run_unordered(op),
        Command::Test { op } => run_test(op),
        Command::Matrix { op } => run_matrix(op),
        Command::Power { op } => run_power(op),
    }
}

fn parse_target(text: &str) -> Result<Target, Error> {
    match text {
        "inf" | "infinity" => Ok(Target::Infinity),
        "0" => Ok(Target::Zero),
        other => {
            let v: f64 = other
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad target `{other}`")))?;
            if v == 0.0 {
                Ok(Target::Zero)
            } else {
                Ok(Target::Finite(v))
            }
        }
    }
}

fn run_unordered(op: UnorderedOp) -> Result<Outcome, Error> {
    match op {
        UnorderedOp::Converges(args) => {
            let fam = args.build()?;
            let v = unordered::unordered_converges(&fam, args.eps, args.horizon)?;
            emit("unordered converges", v);
        }
        UnorderedOp::Split(args) => {
            let fam = args.build()?;
            let r = unordered::split_convergence(&fam, args.eps, args.horizon)?;
            emit("unordered split", r);
        }
        UnorderedOp::Support(args) => {
            let fam = args.build()?;
            let r = unordered::countable_support(&fam, args.horizon, &[1, 2, 3, 4, 5, 10, 100])?;
            emit("unordered support", r);
        }
        UnorderedOp::Chain { fam, rule, steps } => {
            let fam = fam.build()?;
            let rule = parse_chain_rule(&rule)?;
            let v = unordered::cofinal_chain_limit(&fam, &rule, steps, 1e-9)?;
            emit("unordered chain", v);
        }
        UnorderedOp::Decompose { fam, rule } => {
            let family = fam.build()?;
            let rule = parse_partition_rule(&rule)?;
            let r = unordered::decomposition_check(&family, &rule, fam.eps.max(1e-9), fam.horizon)?;
            emit("unordered decompose", r);
        }
        UnorderedOp::Suite {
            fam,
            seed,
            enumerations,
            value_tol,
        } => {
            let family = fam.build()?;
            let r = unordered::equivalence_suite(
                &family,
                fam.eps,
                fam.horizon,
                seed,
                enumerations,
                value_tol,
            )?;
            emit("unordered suite", r);
        }
    }
    Ok(Outcome::clean())
}

fn parse_chain_rule(text: &str) -> Result<ChainRule, Error> {
    if text.trim_start().starts_with('[') {
        let sets: Vec<Vec<i64>> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad JSON chain: {e}")))?;
        return Ok(ChainRule::Explicit(sets));
    }
    ChainRule::parse(text)
}

fn parse_partition_rule(text: &str) -> Result<PartitionRule, Error> {
    if text.trim_start().starts_with('[') {
        let sets: Vec<Vec<i64>> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad JSON partition: {e}")))?;
        return Ok(PartitionRule::Explicit(sets));
    }
    PartitionRule::parse(text)
}

fn run_test(op: TestOp) -> Result<Outcome, Error> {
    match op {
        TestOp::Root {
            seq,
            weights,
            eps,
            n_max,
            strict,
        } => {
            let a = seq.build()?;
            let t = build_real_seq(&weights, seq.origin)?;
            let params = AnalysisParams::new(eps, n_max, n_max / 2, Precision::from_env())?;
            let r = convtests::root_type_test(&a, &t, &params)?;
            let failed = !r.report.hypotheses_hold();
            emit("test root", r);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict,
            })
        }
        TestOp::Condense {
            seq,
            depth,
            eps,
            n_max,
            strict,
        } => {
            let a = seq.build()?;
            let params = AnalysisParams::new(eps, n_max, n_max / 2, Precision::from_env())?;
            let r = convtests::condensation_test(&a, &params, depth)?;
            let failed = !r.report.hypotheses_hold();
            emit("test condense", r);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict,
            })
        }
        TestOp::Alternating {
            seq,
            complement,
            eps,
            n_max,
            strict,
        } => {
            let base = seq.build()?;
            let a = if complement {
                base.complement_reciprocal()?
            } else {
                base
            };
            let params = AnalysisParams::new(eps, n_max, n_max / 2, Precision::from_env())?;
            let r = convtests::alternating_product(&a, &params)?;
            let failed = !r.report.hypotheses_hold() || !r.even_partials_below_a1;
            emit("test alternating", r);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict,
            })
        }
        TestOp::Cesaro {
            seq,
            weights,
            n_max,
            every,
            format,
        } => {
            let a = seq.build()?;
            let t = build_real_seq(&weights, seq.origin)?;
            let every = every.unwrap_or((n_max / 1000).max(1));
            let r = convtests::cesaro_product_mean(&a, &t, n_max, every, Precision::from_env())?;
            if format == "csv" {
                println!("n,sigma_n");
                for (n, sigma) in &r.points {
                    println!("{n},{sigma}");
                }
            } else {
                emit("test cesaro", r);
            }
            Ok(Outcome::clean())
        }
        TestOp::Abel {
            seq,
            exponents,
            eps,
            n_max,
            strict,
        } => {
            let b = seq.build()?;
            let a = build_real_seq(&exponents, seq.origin)?;
            let params = AnalysisParams::new(eps, n_max, n_max / 2, Precision::from_env())?;
            let r = convtests::abel_type_product(&b, &a, &params)?;
            let failed = !r.report.hypotheses_hold();
            emit("test abel", r);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict,
            })
        }
    }
}

fn read_inline_or_file(text: &str) -> Result<String, Error> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(trimmed.to_string())
    } else {
        std::fs::read_to_string(trimmed)
            .map_err(|e| Error::InvalidInput(format!("cannot read `{trimmed}`: {e}")))
    }
}

#[derive(serde::Deserialize)]
struct MatrixFile {
    rows: Vec<Vec<f64>>,
}

fn run_matrix(op: MatrixOp) -> Result<Outcome, Error> {
    match op {
        MatrixOp::Apply { matrix, vector } => {
            let text = read_inline_or_file(&matrix)?;
            let parsed: MatrixFile = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad matrix JSON: {e}")))?;
            let m = matprod::RealMatrix::new(parsed.rows)?;
            let entries: Vec<f64> = serde_json::from_str(vector.trim())
                .map_err(|e| Error::InvalidInput(format!("bad vector JSON: {e}")))?;
            let x = matprod::PosVector::new(entries)?;
            let y = matprod::star_apply(&m, &x)?;
            emit("matrix apply", json!({ "result": y.entries() }));
            Ok(Outcome::clean())
        }
        MatrixOp::CheckIdentities {
            size,
            trials,
            seed,
            tol,
        } => {
            let r = matprod::check_homomorphisms_random(size, trials, seed, tol)?;
            let failed = !r.ok;
            emit("matrix check-identities", r);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict: false,
            })
        }
        MatrixOp::Regular {
            kind,
            seq,
            m_max,
            eps,
            limit,
            format,
            strict,
        } => {
            let x = seq.build()?;
            let matrix = parse_summability(&kind)?;
            let grid = matprod::dyadic_grid(m_max);
            let r = matprod::regular_transform(&matrix, &x, &grid, eps, limit)?;
            let failed = !r.hypothesis_violations.is_empty() || !r.tends_to_one;
            if format == "csv" {
                println!("m,y_m");
                for (m, y) in &r.points {
                    println!("{m},{y}");
                }
            } else {
                emit("matrix regular", r);
            }
            Ok(Outcome {
                hypothesis_failed: failed,
                strict,
            })
        }
    }
}

fn parse_summability(kind: &str) -> Result<SummabilityMatrix, Error> {
    if kind == "cesaro" {
        return Ok(SummabilityMatrix::cesaro());
    }
    if let Some(q) = kind.strip_prefix("euler:") {
        let q: f64 = q
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad euler parameter `{q}`")))?;
        return SummabilityMatrix::euler(q);
    }
    // JSON {"kind": "cesaro"} | {"kind": "euler", "q": ...}
    //      | {"kind": "explicit-rows", "rows": [[...], ...]}
    let text = read_inline_or_file(kind)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("bad summability JSON: {e}")))?;
    match v.get("kind").and_then(|k| k.as_str()) {
        Some("cesaro") => Ok(SummabilityMatrix::cesaro()),
        Some("euler") => {
            let q = v
                .get("q")
                .and_then(|q| q.as_f64())
                .ok_or_else(|| Error::InvalidInput("euler kind needs a numeric q".into()))?;
            SummabilityMatrix::euler(q)
        }
        Some("explicit-rows") => {
            let rows: Vec<Vec<f64>> = serde_json::from_value(
                v.get("rows")
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput("explicit-rows needs rows".into()))?,
            )
            .map_err(|e| Error::InvalidInput(format!("bad rows: {e}")))?;
            let bound = v.get("bound").and_then(|b| b.as_f64()).unwrap_or_else(|| {
                rows.iter()
                    .map(|r| r.iter().sum::<f64>())
                    .fold(0.0, f64::max)
                    + 1e-12
            });
            SummabilityMatrix::explicit(rows, bound)
        }
        _ => Err(Error::InvalidInput(
            "summability kind must be cesaro, euler:q, or explicit-rows JSON".into(),
        )),
    }
}

fn run_power(op: PowerOp) -> Result<Outcome, Error> {
    match op {
        PowerOp::Eval {
            base_seq,
            origin,
            x,
            eps,
            n_max,
        } => {
            let base = build_seq(&base_seq, origin)?;
            let pp = PowerProduct::new(base, x)?;
            let params = AnalysisParams::new(eps, n_max, n_max / 2, Precision::from_env())?;
            let v = powerprod::eval_power_product(&pp, &params)?;
            emit("power eval", v);
            Ok(Outcome::clean())
        }
        PowerOp::Scan {
            base_seq,
            origin,
            x_grid,
            eps,
            n_max,
            strict,
        } => {
            let base = build_seq(&base_seq, origin)?;
            let grid = parse_grid(&x_grid)?;
            let params = AnalysisParams::new(eps, n_max, n_max / 2, Precision::from_env())?;
            let r = powerprod::power_region_scan(&base, &grid, &params)?;
            let failed = !r.hypotheses.iter().all(|h| h.holds);
            emit("power scan", r);
            Ok(Outcome {
                hypothesis_failed: failed,
                strict,
            })
        }
        PowerOp::Cauchy {
            seq_a,
            seq_b,
            n_max,
            eps,
        } => {
            let a = build_seq(&seq_a, 0)?;
            let b = build_seq(&seq_b, 0)?;
            let params = AnalysisParams::new(1e-9, n_max, n_max / 2, Precision::from_env())?;
            let r = powerprod::cauchy_product_means(&a, &b, &params, eps)?;
            emit("power cauchy", r);
            Ok(Outcome::clean())
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed)
            .map_err(|e| Error::InvalidInput(format!("bad JSON grid: {e}")));
    }
    // "a:b:step"
    let parts: Vec<&str> = trimmed.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(
            "grid must be `a:b:step` or a JSON array".into(),
        ));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad grid start `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad grid end `{}`", parts[1])))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad grid step `{}`", parts[2])))?;
    if !step.is_finite() || step <= 0.0 || b < a {
        return Err(Error::InvalidInput("grid needs b >= a and step > 0".into()));
    }
    let mut grid = Vec::new();
    let mut x = a;
    while x <= b + 1e-12 {
        grid.push(x);
        x += step;
    }
    Ok(grid)
}
