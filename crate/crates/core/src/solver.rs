//! Types shared by every bracket-based solver: the objective trait, trial
//! classification, the insert-and-drop bracket update and run results.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::brackets::{Bracket, Bracket3, BracketError};
use crate::models::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("objective returned {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
}

/// A scalar objective. Plain closures qualify; non-finite values become errors.
pub trait Oracle {
    fn eval(&mut self, x: f64) -> Result<f64, OracleError>;
}

impl<F: FnMut(f64) -> f64> Oracle for F {
    fn eval(&mut self, x: f64) -> Result<f64, OracleError> {
        let value = self(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(OracleError::NonFinite { x, value })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum UpdateError {
    #[error("trial point coincides with the center")]
    TrialAtCenter,
    #[error("update produced an invalid bracket: {0}")]
    InvariantBroken(BracketError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

/// How a trial point relates to the center.
///
/// The numeric codes follow the usual labelling: 1 left and improving,
/// 2 right and improving, 3 right and not improving, 4 left and not improving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    LeftImproving = 1,
    RightImproving = 2,
    RightWorse = 3,
    LeftWorse = 4,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::LeftImproving, Branch::RightImproving, Branch::RightWorse, Branch::LeftWorse];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Branch::LeftImproving),
            2 => Some(Branch::RightImproving),
            3 => Some(Branch::RightWorse),
            4 => Some(Branch::LeftWorse),
            _ => None,
        }
    }

    pub fn is_left(self) -> bool {
        matches!(self, Branch::LeftImproving | Branch::LeftWorse)
    }

    pub fn is_improving(self) -> bool {
        matches!(self, Branch::LeftImproving | Branch::RightImproving)
    }

    pub fn from_parts(left: bool, improving: bool) -> Self {
        match (left, improving) {
            (true, true) => Branch::LeftImproving,
            (false, true) => Branch::RightImproving,
            (false, false) => Branch::RightWorse,
            (true, false) => Branch::LeftWorse,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Classifies a trial `(x, fx)` against the center `(mid, f_mid)`.
/// Equal values count as not improving.
pub fn classify_branch(mid: f64, f_mid: f64, x: f64, fx: f64) -> Result<Branch, UpdateError> {
    if x == mid {
        return Err(UpdateError::TrialAtCenter);
    }
    Ok(Branch::from_parts(x < mid, fx < f_mid))
}

/// Inserts `v` next to the center and drops one outermost entry, as dictated by `branch`.
pub(crate) fn splice<const N: usize>(a: &[f64; N], branch: Branch, v: f64) -> [f64; N] {
    let c = N / 2;
    let (skip, at) = match branch {
        Branch::LeftImproving => (None, c),
        Branch::RightImproving => (Some(0), c + 1),
        Branch::RightWorse => (None, c + 1),
        Branch::LeftWorse => (Some(0), c),
    };
    let mut out = [0.0; N];
    let mut k = 0;
    let mut push = |val: f64| {
        if k < N {
            out[k] = val;
            k += 1;
        }
    };
    for (i, &val) in a.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if i == at {
            push(v);
        }
        push(val);
    }
    out
}

/// Applies the branch update for a trial `(x, fx)` and validates the result.
pub fn apply_update<const N: usize>(
    bracket: &Bracket<N>,
    branch: Branch,
    x: f64,
    fx: f64,
) -> Result<Bracket<N>, UpdateError> {
    Bracket::ordered(splice(bracket.abscissae(), branch, x), splice(bracket.values(), branch, fx))
        .map_err(UpdateError::InvariantBroken)
}

/// Default trial safeguard distance for tolerance `eps` on `[l1, r1]`.
pub fn default_delta(eps: f64, l1: f64, r1: f64) -> f64 {
    (eps / 4.0).max(64.0 * f64::EPSILON * (l1.abs() + r1.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    BudgetExhausted,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub left: f64,
    pub mid: f64,
    pub right: f64,
    pub f_left: f64,
    pub f_mid: f64,
    pub f_right: f64,
    /// Curvature constant in force for the step that produced this entry.
    pub alpha: Option<f64>,
    /// Update that produced this entry.
    pub branch: Option<Branch>,
}

impl TraceEntry {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub(crate) fn from_inner(iteration: usize, b: &Bracket3, alpha: Option<f64>, branch: Option<Branch>) -> Self {
        let x = b.abscissae();
        let f = b.values();
        Self { iteration, left: x[0], mid: x[1], right: x[2], f_left: f[0], f_mid: f[1], f_right: f[2], alpha, branch }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: Status,
    /// Innermost three points of the final bracket.
    pub bracket: Bracket3,
    pub iterations: usize,
    pub evaluations: usize,
    /// Entry 0 is the starting state, entry `k` the state after iteration `k`.
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub eps: f64,
    pub budget: usize,
    /// Safeguard distance; `None` picks [`default_delta`] every iteration.
    pub delta: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { eps: 1e-8, budget: 500, delta: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(SolveError::Config("eps must be positive"));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(SolveError::Config("delta must be positive"));
            }
        }
        Ok(())
    }

    pub fn delta_for(&self, l1: f64, r1: f64) -> f64 {
        self.delta.unwrap_or_else(|| default_delta(self.eps, l1, r1))
    }
}

pub(crate) enum Step {
    Trial { x: f64, alpha: Option<f64> },
    Stall,
}

/// Drives the evaluate, classify and update cycle shared by the model-based solvers.
/// `step` receives the current bracket and the branch of the previous update.
pub(crate) fn run_bracket_solver<const N: usize, O, S>(
    oracle: &mut O,
    start: Bracket<N>,
    cfg: &RunConfig,
    mut step: S,
) -> Result<SolverResult, SolveError>
where
    O: Oracle + ?Sized,
    S: FnMut(&Bracket<N>, Option<Branch>) -> Result<Step, SolveError>,
{
    cfg.validate()?;
    let mut bracket = start;
    let mut trace = vec![TraceEntry::from_inner(0, &bracket.inner(), None, None)];
    let mut evaluations = 0;
    let mut last = None;
    let mut iterations = 0;
    let status = loop {
        if bracket.inner_length() <= 2.0 * cfg.eps {
            break Status::Converged;
        }
        if iterations >= cfg.budget {
            break Status::BudgetExhausted;
        }
        let (x, alpha) = match step(&bracket, last)? {
            Step::Trial { x, alpha } => (x, alpha),
            Step::Stall => break Status::Stalled,
        };
        let fx = oracle.eval(x)?;
        evaluations += 1;
        let branch = classify_branch(bracket.mid(), bracket.f_mid(), x, fx)?;
        bracket = apply_update(&bracket, branch, x, fx)?;
        iterations += 1;
        last = Some(branch);
        trace.push(TraceEntry::from_inner(iterations, &bracket.inner(), alpha, Some(branch)));
    };
    Ok(SolverResult { status, bracket: bracket.inner(), iterations, evaluations, trace })
}

/// A word over the four update labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpdateSequence(Vec<Branch>);

impl UpdateSequence {
    pub fn new(branches: Vec<Branch>) -> Self {
        Self(branches)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// After an improving step the next trial must fall on the side
    /// the center moved towards.
    pub fn respects_successor_rule(&self) -> bool {
        self.0.windows(2).all(|w| match w[0] {
            Branch::LeftImproving => w[1].is_left(),
            Branch::RightImproving => !w[1].is_left(),
            _ => true,
        })
    }

    /// Every word of length `n` over `{1, 2, 3, 4}`, in lexicographic order.
    pub fn all_of_length(n: usize) -> Vec<UpdateSequence> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w: Vec<Branch>| {
                    Branch::ALL.into_iter().map(move |b| {
                        let mut v = w.clone();
                        v.push(b);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(UpdateSequence).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid update label {0:?}; expected digits 1 to 4")]
pub struct ParseSequenceError(pub char);

impl FromStr for UpdateSequence {
    type Err = ParseSequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| c.to_digit(10).and_then(|d| Branch::from_code(d as u8)).ok_or(ParseSequenceError(c)))
            .collect::<Result<Vec<_>, _>>()
            .map(UpdateSequence)
    }
}

impl fmt::Display for UpdateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{ExtendedBracket5, ExtendedBracket7};
    use proptest::prelude::*;

    #[test]
    fn classification_examples() {
        assert_eq!(classify_branch(0.0, 0.0, -0.3, -1.0).unwrap(), Branch::LeftImproving);
        assert_eq!(classify_branch(0.0, 0.0, 0.3, -1.0).unwrap(), Branch::RightImproving);
        assert_eq!(classify_branch(0.0, 0.0, 0.3, 1.0).unwrap(), Branch::RightWorse);
        assert_eq!(classify_branch(0.0, 0.0, -0.3, 1.0).unwrap(), Branch::LeftWorse);
        assert_eq!(classify_branch(0.0, 0.0, 0.3, 0.0).unwrap(), Branch::RightWorse);
        assert_eq!(classify_branch(0.0, 0.0, 0.0, -1.0), Err(UpdateError::TrialAtCenter));
    }

    fn base7() -> ExtendedBracket7 {
        ExtendedBracket7::new([-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0], [9.0, 4.0, 1.0, 0.0, 1.0, 4.0, 9.0]).unwrap()
    }

    #[test]
    fn seven_point_updates() {
        let b = base7();
        let u = |br, x, fx| *apply_update(&b, br, x, fx).unwrap().abscissae();
        assert_eq!(u(Branch::LeftImproving, -0.5, -1.0), [-3.0, -2.0, -1.0, -0.5, 0.0, 1.0, 2.0]);
        assert_eq!(u(Branch::RightImproving, 0.5, -1.0), [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0]);
        assert_eq!(u(Branch::RightWorse, 0.5, 1.0), [-3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0]);
        assert_eq!(u(Branch::LeftWorse, -0.5, 1.0), [-2.0, -1.0, -0.5, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn five_point_updates() {
        let b = ExtendedBracket5::new([-2.0, -1.0, 0.0, 1.0, 2.0], [4.0, 1.0, 0.0, 1.0, 4.0]).unwrap();
        let u = |br, x, fx| *apply_update(&b, br, x, fx).unwrap().abscissae();
        assert_eq!(u(Branch::LeftImproving, -0.5, -1.0), [-2.0, -1.0, -0.5, 0.0, 1.0]);
        assert_eq!(u(Branch::RightImproving, 0.5, -1.0), [-1.0, 0.0, 0.5, 1.0, 2.0]);
        assert_eq!(u(Branch::RightWorse, 0.5, 1.0), [-2.0, -1.0, 0.0, 0.5, 1.0]);
        assert_eq!(u(Branch::LeftWorse, -0.5, 1.0), [-1.0, -0.5, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn misplaced_trial_breaks_invariant() {
        let b = base7();
        assert!(matches!(apply_update(&b, Branch::LeftImproving, 0.5, -1.0), Err(UpdateError::InvariantBroken(_))));
    }

    #[test]
    fn sequence_parsing_and_rule() {
        let s: UpdateSequence = "4322".parse().unwrap();
        assert_eq!(s.to_string(), "4322");
        assert!(s.respects_successor_rule());
        assert!(!"12".parse::<UpdateSequence>().unwrap().respects_successor_rule());
        assert!("1411".parse::<UpdateSequence>().unwrap().respects_successor_rule());
        assert_eq!("15".parse::<UpdateSequence>(), Err(ParseSequenceError('5')));
        assert_eq!(UpdateSequence::all_of_length(3).len(), 64);
    }

    #[test]
    fn closures_reject_nan() {
        let mut f = |_x: f64| f64::NAN;
        assert!(matches!(f.eval(1.0), Err(OracleError::NonFinite { .. })));
    }

    fn bracket_and_trial() -> impl Strategy<Value = (ExtendedBracket7, f64, f64)> {
        (
            prop::array::uniform7(0.05..1.0f64),
            prop::array::uniform7(0.0..5.0f64),
            0.02..0.98f64,
            -5.0..5.0f64,
            any::<bool>(),
        )
            .prop_map(|(gaps, mut f, t, fx, left)| {
                let mut x = [0.0; 7];
                let mut acc = 0.0;
                for i in 0..7 {
                    acc += gaps[i];
                    x[i] = acc;
                }
                f[3] = f[2].min(f[4]);
                let trial = if left { x[2] + t * (x[3] - x[2]) } else { x[3] + t * (x[4] - x[3]) };
                (ExtendedBracket7::new(x, f).unwrap(), trial, fx)
            })
    }

    proptest! {
        #[test]
        fn update_keeps_bracket_and_shrinks((b, x, fx) in bracket_and_trial()) {
            let br = classify_branch(b.mid(), b.f_mid(), x, fx).unwrap();
            let nb = apply_update(&b, br, x, fx).unwrap();
            prop_assert!(nb.inner_length() < b.inner_length());
            prop_assert!(nb.f_mid() <= b.f_mid());
            let old: Vec<f64> = b.abscissae().to_vec();
            for v in nb.abscissae() {
                prop_assert!(*v == x || old.contains(v));
            }
        }

        #[test]
        fn updates_commute_with_reflection((b, x, fx) in bracket_and_trial()) {
            let br = classify_branch(b.mid(), b.f_mid(), x, fx).unwrap();
            let rb = b.reflect();
            let rbr = classify_branch(rb.mid(), rb.f_mid(), -x, fx).unwrap();
            let expected = match br {
                Branch::LeftImproving => Branch::RightImproving,
                Branch::RightImproving => Branch::LeftImproving,
                Branch::RightWorse => Branch::LeftWorse,
                Branch::LeftWorse => Branch::RightWorse,
            };
            prop_assert_eq!(rbr, expected);
            let lhs = apply_update(&rb, rbr, -x, fx).unwrap();
            let rhs = apply_update(&b, br, x, fx).unwrap().reflect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
