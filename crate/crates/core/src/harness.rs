//! Random starting brackets, per-trial convergence rates, the benchmark
//! table and the update-sequence experiment, plus their CSV writers.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{brent, golden_section, mifflin_minimize, GOLDEN_RATIO};
use crate::brackets::ExtendedBracket7;
use crate::dupm::{dupm_minimize, DupmConfig};
use crate::eupm::{eupm_minimize, random_unit_gaps, sequence_from_flags};
use crate::solver::{Oracle, RunConfig, SolveError, SolverResult, Status, TraceEntry};
use crate::supm::{supm_minimize, SupmConfig};
use crate::testfuncs::{self, TestFunction};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no valid bracket for {function} after {attempts} attempts")]
    ResampleLimitExceeded { function: String, attempts: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const RESAMPLE_LIMIT: usize = 1000;

/// Starting bracket on which a fixed-curvature model solver stalls for `NU3`.
pub const STALL_BRACKET: [f64; 7] = [-2.23927, -2.171330, -1.811263, 1.820150, 2.102197, 2.293404, 2.334091];

/// Draws four points near the left end and four in the right half of the
/// domain, takes the best as center and its three nearest neighbours on each side.
pub fn generate_bracket<R: Rng + ?Sized>(func: &TestFunction, rng: &mut R) -> Result<ExtendedBracket7, HarnessError> {
    let (a, b) = func.domain;
    for _ in 0..RESAMPLE_LIMIT {
        let mut pts: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let x = if i < 4 { rng.gen_range(a..=a + (b - a) / 5.0) } else { rng.gen_range(b - (b - a) / 2.0..=b) };
                (x, func.eval(x))
            })
            .collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let c = (0..8).min_by(|&i, &j| pts[i].1.total_cmp(&pts[j].1)).expect("eight samples");
        if c < 3 || c + 3 >= 8 {
            continue;
        }
        let sel = &pts[c - 3..=c + 3];
        let x: [f64; 7] = std::array::from_fn(|i| sel[i].0);
        let f: [f64; 7] = std::array::from_fn(|i| sel[i].1);
        if let Ok(bracket) = ExtendedBracket7::new(x, f) {
            return Ok(bracket);
        }
    }
    Err(HarnessError::ResampleLimitExceeded { function: func.name(), attempts: RESAMPLE_LIMIT })
}

/// Random stream for one trial, independent of scheduling.
pub fn trial_rng(seed: u64, function_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((function_index as u64) << 32) | trial as u64);
    rng
}

/// Geometric mean inner-length reduction per iteration. Zero when the start
/// already meets the tolerance, infinite for runs that did not converge.
pub fn convergence_rate(result: &SolverResult) -> f64 {
    if result.status != Status::Converged {
        return f64::INFINITY;
    }
    let n = result.iterations;
    if n == 0 {
        return 0.0;
    }
    let first = result.trace.first().expect("trace holds the start state").width();
    let last = result.trace.last().expect("trace holds the start state").width();
    (last / first).powf(1.0 / n as f64)
}

/// Arithmetic mean, infinite if any entry is.
pub fn mean_rate(rates: &[f64]) -> f64 {
    if rates.iter().any(|r| r.is_infinite()) {
        return f64::INFINITY;
    }
    rates.iter().sum::<f64>() / rates.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Supm(f64),
    Eupm,
    Dupm,
    Golden,
    Brent,
    Mifflin,
}

impl Algorithm {
    /// Column heading in the benchmark table.
    pub fn column(&self) -> String {
        match self {
            Algorithm::Supm(a) => format!("{a}"),
            Algorithm::Eupm => "EUPM".into(),
            Algorithm::Dupm => "DUPM".into(),
            Algorithm::Golden => "Golden".into(),
            Algorithm::Brent => "Brent".into(),
            Algorithm::Mifflin => "Mifflin".into(),
        }
    }

    pub fn table_columns(skip_mifflin: bool) -> Vec<Algorithm> {
        let mut v = vec![
            Algorithm::Supm(0.0),
            Algorithm::Supm(0.1),
            Algorithm::Supm(1.0),
            Algorithm::Supm(10.0),
            Algorithm::Eupm,
            Algorithm::Dupm,
            Algorithm::Brent,
        ];
        if !skip_mifflin {
            v.push(Algorithm::Mifflin);
        }
        v
    }

    /// Runs from a seven-point start; methods needing fewer points use the inner ones.
    pub fn run<O: Oracle + ?Sized>(
        &self,
        oracle: &mut O,
        start: ExtendedBracket7,
        run: &RunConfig,
    ) -> Result<SolverResult, SolveError> {
        match *self {
            Algorithm::Supm(alpha) => supm_minimize(oracle, start, &SupmConfig { alpha, run: *run }),
            Algorithm::Eupm => eupm_minimize(oracle, start.inner_five(), run),
            Algorithm::Dupm => dupm_minimize(oracle, start, &DupmConfig { run: *run, ..Default::default() }),
            Algorithm::Golden => golden_section(oracle, start.inner(), run),
            Algorithm::Brent => brent(oracle, start.inner(), run),
            Algorithm::Mifflin => mifflin_minimize(oracle, start.inner_five(), run),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub function: TestFunction,
    /// Mean rate per algorithm, infinite if any trial failed.
    pub rates: Vec<f64>,
    /// Trials per algorithm that did not converge.
    pub failures: Vec<usize>,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub trials: usize,
    pub seed: u64,
    pub run: RunConfig,
    pub algorithms: Vec<Algorithm>,
}

fn catalogue_index(func: &TestFunction) -> usize {
    testfuncs::all().iter().position(|f| f.name() == func.name()).unwrap_or(usize::MAX >> 32)
}

/// Rates of every algorithm on one trial. Solver errors count as failures.
pub fn run_trial(func: &TestFunction, trial: usize, cfg: &BenchConfig) -> Result<Vec<f64>, HarnessError> {
    let mut rng = trial_rng(cfg.seed, catalogue_index(func), trial);
    let start = generate_bracket(func, &mut rng)?;
    Ok(cfg
        .algorithms
        .iter()
        .map(|alg| {
            let mut oracle = func.oracle();
            alg.run(&mut oracle, start, &cfg.run).map_or(f64::INFINITY, |r| convergence_rate(&r))
        })
        .collect())
}

/// Mean rate per algorithm over `cfg.trials` shared starting brackets.
/// Results do not depend on the number of worker threads.
pub fn bench_function(func: &TestFunction, cfg: &BenchConfig) -> Result<BenchRow, HarnessError> {
    let per_trial: Vec<Vec<f64>> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(func, t, cfg)).collect::<Result<_, _>>()?;
    let column = |k: usize| per_trial.iter().map(|r| r[k]).collect::<Vec<_>>();
    let rates = (0..cfg.algorithms.len()).map(|k| mean_rate(&column(k))).collect();
    let failures = (0..cfg.algorithms.len()).map(|k| column(k).iter().filter(|r| r.is_infinite()).count()).collect();
    Ok(BenchRow { function: *func, rates, failures, trials: cfg.trials })
}

pub fn format_rate(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        format!("{r:.6}")
    }
}

/// Writes the benchmark table preceded by a `#` line recording the run parameters.
pub fn write_bench_csv<W: Write>(
    mut out: W,
    rows: &[BenchRow],
    cfg: &BenchConfig,
    latex_labels: bool,
) -> Result<(), HarnessError> {
    writeln!(out, "# trials={} seed={} eps={:e} budget={}", cfg.trials, cfg.seed, cfg.run.eps, cfg.run.budget)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["Functions".to_string()];
    header.extend(cfg.algorithms.iter().map(Algorithm::column));
    w.write_record(&header)?;
    for row in rows {
        let label = if latex_labels { row.function.latex_label() } else { row.function.name() };
        let mut rec = vec![label];
        rec.extend(row.rates.iter().map(|&r| format_rate(r)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceEntry]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "xL1", "xM", "xR1", "d", "f(xM)"])?;
    for t in trace {
        w.write_record(&[
            t.iteration.to_string(),
            format!("{:e}", t.left),
            format!("{:e}", t.mid),
            format!("{:e}", t.right),
            format!("{:e}", t.width()),
            format!("{:e}", t.f_mid),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRow {
    pub id: usize,
    /// One flag per step; set means the trial improved on the center.
    pub bits: Vec<bool>,
    pub mean_rate: f64,
}

impl SequenceRow {
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// For every improving/non-improving pattern of length `n`, the mean
/// per-step reduction of the closed-form method over random unit gap vectors.
/// Rows are sorted from slowest to fastest.
pub fn sequence_experiment(n: usize, samples: usize, seed: u64) -> Vec<SequenceRow> {
    let mut rows: Vec<SequenceRow> = (0..1usize << n)
        .into_par_iter()
        .map(|id| {
            let bits: Vec<bool> = (0..n).map(|k| (id >> (n - 1 - k)) & 1 == 1).collect();
            let mut rng = trial_rng(seed, usize::MAX >> 32, id);
            let total: f64 = (0..samples)
                .map(|_| {
                    let x = random_unit_gaps(&mut rng).abscissae(0.0);
                    let (end, _) = sequence_from_flags(&x, &bits);
                    ((end[3] - end[1]) / (x[3] - x[1])).powf(1.0 / n as f64)
                })
                .sum();
            SequenceRow { id, bits, mean_rate: total / samples as f64 }
        })
        .collect();
    rows.sort_by(|a, b| b.mean_rate.total_cmp(&a.mean_rate).then(a.id.cmp(&b.id)));
    rows
}

pub fn write_sequence_csv<W: Write>(out: W, rows: &[SequenceRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sequence", "bits", "eupm_rate", "golden_rate"])?;
    for r in rows {
        w.write_record(&[
            r.id.to_string(),
            r.bit_string(),
            format!("{:.6}", r.mean_rate),
            format!("{GOLDEN_RATIO:.6}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
