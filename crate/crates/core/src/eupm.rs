//! The closed-form step obtained as the curvature constant grows without bound,
//! its solver on five-point brackets, and the oracle-free update-sequence algebra.

use rand::Rng;
use rand_distr::Exp1;

use crate::brackets::{ExtendedBracket5, GapVector};
use crate::solver::{
    run_bracket_solver, splice, Branch, Oracle, RunConfig, SolveError, SolverResult, Step, UpdateSequence,
};
use crate::supm::{safeguard, StepError};

/// Closed-form step on five abscissae `(L2, L1, M, R1, R2)`:
/// `(R1 R2 - L1 L2) / (R1 + R2 - L1 - L2)`, evaluated relative to `M`.
pub fn limit_step(x: &[f64; 5]) -> f64 {
    let m = x[2];
    let (l2, l1, r1, r2) = (x[0] - m, x[1] - m, x[3] - m, x[4] - m);
    m + (r1 * r2 - l1 * l2) / ((r1 + r2) - (l1 + l2))
}

pub fn eupm_step(bracket: &ExtendedBracket5) -> f64 {
    limit_step(bracket.abscissae())
}

/// Signed offset of the step from the center. Negative or zero means the
/// trial falls on the left.
pub fn step_offset(x: &[f64; 5]) -> f64 {
    limit_step(x) - x[2]
}

fn side_matches(x: &[f64; 5], branch: Branch) -> bool {
    branch.is_left() == (step_offset(x) <= 0.0)
}

/// Applies the updates in order without checking which side the step falls on.
pub fn apply_updates_unchecked(x: &[f64; 5], seq: &UpdateSequence) -> [f64; 5] {
    seq.branches().iter().fold(*x, |acc, &b| splice(&acc, b, limit_step(&acc)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOutcome {
    pub points: [f64; 5],
    /// Whether every update matched the side of its step.
    pub feasible: bool,
    /// Updates applied before stopping.
    pub applied: usize,
}

/// Applies the updates in order, stopping at the first one whose side
/// disagrees with where the step actually lands.
pub fn apply_sequence(x: &[f64; 5], seq: &UpdateSequence) -> SequenceOutcome {
    let mut pts = *x;
    for (k, &b) in seq.branches().iter().enumerate() {
        if !side_matches(&pts, b) {
            return SequenceOutcome { points: pts, feasible: false, applied: k };
        }
        pts = splice(&pts, b, limit_step(&pts));
    }
    SequenceOutcome { points: pts, feasible: true, applied: seq.len() }
}

fn inner_width(x: &[f64; 5]) -> f64 {
    x[3] - x[1]
}

/// Ratio of inner lengths after and before a feasible sequence.
pub fn contraction_ratio(x: &[f64; 5], seq: &UpdateSequence) -> Option<f64> {
    let out = apply_sequence(x, seq);
    out.feasible.then(|| inner_width(&out.points) / inner_width(x))
}

/// Same ratio, with the updates applied whether or not they are feasible.
pub fn formal_contraction_ratio(x: &[f64; 5], seq: &UpdateSequence) -> f64 {
    inner_width(&apply_updates_unchecked(x, seq)) / inner_width(x)
}

/// The realised sequence when the trial improves on the center exactly when
/// the corresponding flag is set.
pub fn sequence_from_flags(x: &[f64; 5], improving: &[bool]) -> ([f64; 5], UpdateSequence) {
    let mut pts = *x;
    let mut seq = Vec::with_capacity(improving.len());
    for &imp in improving {
        let b = Branch::from_parts(step_offset(&pts) <= 0.0, imp);
        pts = splice(&pts, b, limit_step(&pts));
        seq.push(b);
    }
    (pts, UpdateSequence::new(seq))
}

/// Gap vector drawn uniformly from the unit simplex.
pub fn random_unit_gaps<R: Rng + ?Sized>(rng: &mut R) -> GapVector {
    loop {
        let e: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(Exp1));
        let s: f64 = e.iter().sum();
        if let Ok(g) = GapVector::new(e.map(|v| v / s)) {
            return g;
        }
    }
}

/// Sequences whose contraction is checked directly rather than through the
/// five-step bound.
pub const MINIMAL_SET: [&str; 12] =
    ["44", "111", "143", "422", "414", "434", "1411", "1141", "1423", "4322", "4314", "4114"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SequenceStats {
    pub feasible: usize,
    pub max_ratio: f64,
}

/// Largest feasible ratio of `seq` over `samples` random unit gap vectors.
pub fn sample_sequence<R: Rng + ?Sized>(seq: &UpdateSequence, samples: usize, rng: &mut R) -> SequenceStats {
    let mut stats = SequenceStats::default();
    for _ in 0..samples {
        let x = random_unit_gaps(rng).abscissae(0.0);
        if let Some(r) = contraction_ratio(&x, seq) {
            stats.feasible += 1;
            stats.max_ratio = stats.max_ratio.max(r);
        }
    }
    stats
}

/// Largest ratio over every feasible length-`n` sequence started from `x`.
pub fn worst_ratio_from(x: &[f64; 5], n: usize) -> f64 {
    UpdateSequence::all_of_length(n).iter().filter_map(|s| contraction_ratio(x, s)).fold(0.0, f64::max)
}

pub fn eupm_minimize<O: Oracle + ?Sized>(
    oracle: &mut O,
    start: ExtendedBracket5,
    cfg: &RunConfig,
) -> Result<SolverResult, SolveError> {
    let run = *cfg;
    run_bracket_solver(oracle, start, &run, |b, _| {
        let delta = run.delta_for(b.left1(), b.right1());
        match safeguard(eupm_step(b), b.left1(), b.mid(), b.right1(), delta) {
            Ok(x) => Ok(Step::Trial { x, alpha: None }),
            Err(StepError::BracketTooSmall) => Ok(Step::Stall),
            Err(StepError::Model(e)) => Err(e.into()),
        }
    })
}
