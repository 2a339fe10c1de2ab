use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kinkline::eupm::{random_unit_gaps, sample_sequence, worst_ratio_from, MINIMAL_SET};
use kinkline::harness::{
    bench_function, convergence_rate, format_rate, generate_bracket, sequence_experiment, trial_rng, write_bench_csv,
    write_sequence_csv, write_trace_csv, Algorithm, BenchConfig,
};
use kinkline::testfuncs::{self, Suite, TestFunction};
use kinkline::{ExtendedBracket7, RunConfig, Status, UpdateSequence};

#[derive(Parser)]
#[command(name = "kinkline", version, about = "Bracketing minimizers for piecewise-smooth functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize one test function from a single starting bracket.
    Minimize(MinimizeArgs),
    /// Mean convergence rates of every method over random starting brackets.
    Bench(BenchArgs),
    /// Mean rate of the closed-form step for every improving/worse pattern.
    Seqexp(SeqexpArgs),
    /// Check the contraction bounds of the update sequences.
    Verify(VerifyArgs),
    /// Print the id, family, domain and formula of each test function.
    ListFunctions,
}

#[derive(Args, Clone, Copy)]
struct RunArgs {
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    budget: usize,
}

impl RunArgs {
    fn config(self) -> RunConfig {
        RunConfig { eps: self.eps, budget: self.budget, ..Default::default() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Supm,
    Eupm,
    Dupm,
    Golden,
    Brent,
    Mifflin,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    function: String,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Curvature constant for `supm`.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, env = "KINKLINE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    run: RunArgs,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Seven ascending abscissae to start from instead of a random bracket.
    /// They may extend past the function's sampling domain.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bracket: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Su,
    Nu,
    Sm,
    All,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SkipArg {
    Mifflin,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, env = "KINKLINE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    run: RunArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    skip: Option<SkipArg>,
    /// Maximum number of worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Label rows like `$f^{SU}_1$` instead of `SU1`.
    #[arg(long)]
    latex_labels: bool,
}

#[derive(Args)]
struct SeqexpArgs {
    #[arg(long, default_value_t = 10)]
    bits: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, env = "KINKLINE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Ratio of each sequence in the minimal set over random gap vectors.
    #[arg(long)]
    sequences: bool,
    /// Worst ratio over all feasible five-step sequences.
    #[arg(long)]
    contraction: bool,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, env = "KINKLINE_SEED", default_value_t = 0)]
    seed: u64,
}

/// Failure that maps to an exit code.
enum Failure {
    Usage(String),
    Run(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Minimize(a) => minimize(a),
        Command::Bench(a) => bench(a),
        Command::Seqexp(a) => seqexp(a),
        Command::Verify(a) => verify(a),
        Command::ListFunctions => list_functions(),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn starting_bracket(func: &TestFunction, a: &MinimizeArgs) -> Result<ExtendedBracket7, Failure> {
    match &a.bracket {
        Some(xs) => {
            let x: [f64; 7] =
                xs.as_slice().try_into().map_err(|_| Failure::Usage("--bracket takes seven values".into()))?;
            ExtendedBracket7::new(x, x.map(|v| func.eval(v)))
                .map_err(|e| Failure::Usage(format!("invalid bracket: {e}")))
        }
        None => {
            let idx = testfuncs::all().iter().position(|f| f == func).unwrap_or(0);
            Ok(generate_bracket(func, &mut trial_rng(a.seed, idx, 0))?)
        }
    }
}

fn minimize(a: MinimizeArgs) -> Result<ExitCode, Failure> {
    let func = testfuncs::by_name(&a.function).map_err(|e| Failure::Usage(e.to_string()))?;
    let run = a.run.config();
    run.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let alg = match a.algorithm {
        AlgorithmArg::Supm => Algorithm::Supm(a.alpha),
        AlgorithmArg::Eupm => Algorithm::Eupm,
        AlgorithmArg::Dupm => Algorithm::Dupm,
        AlgorithmArg::Golden => Algorithm::Golden,
        AlgorithmArg::Brent => Algorithm::Brent,
        AlgorithmArg::Mifflin => Algorithm::Mifflin,
    };
    let start = starting_bracket(&func, &a)?;
    let mut oracle = if a.bracket.is_some() { func.oracle().unbounded() } else { func.oracle() };
    let res = alg.run(&mut oracle, start, &run)?;
    if let Some(path) = &a.trace {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(
            out,
            "# function={} algorithm={} seed={} eps={:e} budget={}",
            func.name(),
            alg.column(),
            a.seed,
            run.eps,
            run.budget
        )?;
        write_trace_csv(out, &res.trace)?;
    }
    let b = res.bracket;
    println!("function    {}", func.name());
    println!("algorithm   {}", alg.column());
    println!("status      {:?}", res.status);
    println!("iterations  {}", res.iterations);
    println!("evaluations {}", res.evaluations);
    println!("x           {:.12e}", b.mid());
    println!("f(x)        {:.12e}", b.f_mid());
    println!("bracket     [{:.12e}, {:.12e}]", b.left1(), b.right1());
    println!("rate        {}", format_rate(convergence_rate(&res)));
    Ok(if res.status == Status::Converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn bench(a: BenchArgs) -> Result<ExitCode, Failure> {
    set_jobs(a.jobs)?;
    let run = a.run.config();
    run.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let cfg = BenchConfig {
        trials: a.trials,
        seed: a.seed,
        run,
        algorithms: Algorithm::table_columns(a.skip == Some(SkipArg::Mifflin)),
    };
    let funcs: Vec<&TestFunction> = match a.suite {
        SuiteArg::Su => testfuncs::suite(Suite::SmoothUnimodal).collect(),
        SuiteArg::Nu => testfuncs::suite(Suite::NonsmoothUnimodal).collect(),
        SuiteArg::Sm => testfuncs::suite(Suite::SmoothMultimodal).collect(),
        SuiteArg::All => testfuncs::all().iter().collect(),
    };
    let rows = funcs.into_iter().map(|f| bench_function(f, &cfg)).collect::<Result<Vec<_>, _>>()?;
    write_bench_csv(output(&a.out)?, &rows, &cfg, a.latex_labels)?;
    for row in &rows {
        for (alg, &n) in cfg.algorithms.iter().zip(&row.failures) {
            if n > 0 {
                eprintln!("{} {}: {n} of {} trials did not converge", row.function.name(), alg.column(), row.trials);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn seqexp(a: SeqexpArgs) -> Result<ExitCode, Failure> {
    set_jobs(a.jobs)?;
    if a.bits == 0 || a.bits > 20 {
        return Err(Failure::Usage("--bits must be between 1 and 20".into()));
    }
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let rows = sequence_experiment(a.bits, a.samples, a.seed);
    let mut out = output(&a.out)?;
    writeln!(out, "# bits={} samples={} seed={}", a.bits, a.samples, a.seed)?;
    write_sequence_csv(out, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode, Failure> {
    let (seqs, contraction) = if a.sequences || a.contraction { (a.sequences, a.contraction) } else { (true, true) };
    let mut ok = true;
    if seqs {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        println!("{:<6} {:>8} {:>10}", "seq", "feasible", "max_ratio");
        for name in MINIMAL_SET {
            let s: UpdateSequence = name.parse()?;
            let stats = sample_sequence(&s, a.samples, &mut rng);
            let pass = stats.max_ratio < 0.5;
            ok &= pass;
            println!(
                "{:<6} {:>8} {:>10.6} {}",
                name,
                stats.feasible,
                stats.max_ratio,
                if pass { "ok" } else { "FAIL" }
            );
        }
    }
    if contraction {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed);
        let worst =
            (0..a.samples).map(|_| worst_ratio_from(&random_unit_gaps(&mut rng).abscissae(0.0), 5)).fold(0.0, f64::max);
        let pass = worst <= 0.5 + 1e-12;
        ok &= pass;
        println!("five-step worst ratio {:.12} {}", worst, if pass { "ok" } else { "FAIL" });
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn list_functions() -> Result<ExitCode, Failure> {
    let mut out = io::stdout().lock();
    for f in testfuncs::all() {
        let domain = format!("[{}, {}]", f.domain.0, f.domain.1);
        writeln!(out, "{:<4} {:<18} {:<12} {}", f.name(), f.suite.description(), domain, f.formula)?;
    }
    Ok(ExitCode::SUCCESS)
}
