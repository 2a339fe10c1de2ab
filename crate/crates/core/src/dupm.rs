//! Model steps with a curvature constant that is raised on the fly, falling
//! back to the closed-form limit step when one side keeps being updated.

use thiserror::Error;

use crate::brackets::ExtendedBracket7;
use crate::eupm::eupm_step;
use crate::models::{build_model, divided_diff2, side_curvature, ModelError, Side};
use crate::solver::{run_bracket_solver, Branch, Oracle, RunConfig, SolveError, SolverResult, Step};
use crate::supm::{safeguard, supm_choice, StepError, StepKind};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DupmError {
    #[error("intersection condition fails at the upper search limit {upper}")]
    ConditionFalseAtUpper { upper: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Smallest curvature constant for which both models stay below the data at
/// the center.
pub fn alpha_floor(bracket: &ExtendedBracket7) -> Result<f64, ModelError> {
    let m = (bracket.mid(), bracket.f_mid());
    let mut worst = f64::NEG_INFINITY;
    for side in [Side::Left, Side::Right] {
        let [i, j, _] = side.indices();
        let outer = side_curvature(side, bracket)?;
        let inner = divided_diff2(m, bracket.point(i), bracket.point(j))?;
        worst = worst.max(outer - inner);
    }
    Ok(worst / bracket.scaling_h())
}

/// Curvature constant above which both models are concave.
pub fn alpha_plus(bracket: &ExtendedBracket7) -> Result<f64, ModelError> {
    let l = side_curvature(Side::Left, bracket)?;
    let r = side_curvature(Side::Right, bracket)?;
    Ok(l.max(r) / bracket.scaling_h())
}

/// Whether the model step is attained where the two models cross.
pub fn intersection_condition(bracket: &ExtendedBracket7, alpha: f64) -> Result<bool, ModelError> {
    let choice = supm_choice(bracket, alpha)?;
    if choice.kind == StepKind::Intersection {
        return Ok(true);
    }
    let ql = build_model(Side::Left, bracket, alpha)?.eval(choice.x);
    let qr = build_model(Side::Right, bracket, alpha)?.eval(choice.x);
    Ok((ql - qr).abs() <= 1e-10 * (ql.abs() + qr.abs() + bracket.f_mid().abs()))
}

pub fn default_chi_tolerance(alpha_plus: f64) -> f64 {
    1e-3 * alpha_plus.max(1.0)
}

/// Bisects on `(alpha_lo, alpha_plus]` for the threshold above which the
/// intersection condition holds. Returns the upper end of the final interval.
pub fn chi(bracket: &ExtendedBracket7, alpha_lo: f64, tol: Option<f64>) -> Result<f64, DupmError> {
    if intersection_condition(bracket, alpha_lo)? {
        return Ok(alpha_lo);
    }
    let ap = alpha_plus(bracket)?;
    let tol = tol.unwrap_or_else(|| default_chi_tolerance(ap));
    let upper = ap.max(alpha_lo) + tol;
    if !intersection_condition(bracket, upper)? {
        return Err(DupmError::ConditionFalseAtUpper { upper });
    }
    bisect(bracket, alpha_lo, upper, tol)
}

fn bisect(bracket: &ExtendedBracket7, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64, DupmError> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if intersection_condition(bracket, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Like [`chi`], but when the condition still fails at the upper limit the
/// search interval is doubled until it holds.
pub fn escalate(bracket: &ExtendedBracket7, alpha_lo: f64, tol: Option<f64>) -> Result<f64, DupmError> {
    match chi(bracket, alpha_lo, tol) {
        Err(DupmError::ConditionFalseAtUpper { upper }) => {
            let tol = tol.unwrap_or_else(|| default_chi_tolerance(upper));
            let mut lo = upper;
            let mut hi = 2.0 * upper + 1.0;
            for _ in 0..200 {
                if intersection_condition(bracket, hi)? {
                    return bisect(bracket, lo, hi, tol);
                }
                lo = hi;
                hi = 2.0 * hi + 1.0;
            }
            Err(DupmError::ConditionFalseAtUpper { upper: hi })
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DupmConfig {
    pub run: RunConfig,
    pub alpha0: f64,
    /// Consecutive same-side updates that trigger the limit step.
    pub same_side_limit: usize,
    pub chi_tol: Option<f64>,
}

impl Default for DupmConfig {
    fn default() -> Self {
        Self { run: RunConfig::default(), alpha0: 0.0, same_side_limit: 3, chi_tol: None }
    }
}

/// Side whose inner neighbour was replaced by `branch`.
pub fn replaced_side(branch: Branch) -> Side {
    match branch {
        Branch::LeftImproving | Branch::RightWorse => Side::Right,
        Branch::RightImproving | Branch::LeftWorse => Side::Left,
    }
}

/// Initial history, newest first. Mixed, so the first steps use the models.
pub const INITIAL_HISTORY: [Side; 3] = [Side::Left, Side::Right, Side::Left];

/// Safeguarded trial point. `recent` holds the sides replaced by the latest
/// updates; when they all agree the closed-form limit step is used instead
/// of the models.
pub fn dupm_step(bracket: &ExtendedBracket7, alpha: f64, recent: &[Side], delta: f64) -> Result<f64, StepError> {
    let one_sided = recent.windows(2).all(|w| w[0] == w[1]);
    let raw = if one_sided { eupm_step(&bracket.inner_five()) } else { supm_choice(bracket, alpha)?.x };
    safeguard(raw, bracket.left1(), bracket.mid(), bracket.right1(), delta)
}

pub fn dupm_minimize<O: Oracle + ?Sized>(
    oracle: &mut O,
    start: ExtendedBracket7,
    cfg: &DupmConfig,
) -> Result<SolverResult, SolveError> {
    if !(cfg.alpha0 >= 0.0 && cfg.alpha0.is_finite()) {
        return Err(SolveError::Config("alpha0 must be finite and non-negative"));
    }
    if cfg.same_side_limit == 0 {
        return Err(SolveError::Config("same-side limit must be positive"));
    }
    let run = cfg.run;
    // newest first, seeded so that the limit step cannot fire before real history exists
    let mut history: Vec<Side> = INITIAL_HISTORY.into_iter().cycle().take(cfg.same_side_limit.max(3)).collect();
    let mut alpha = cfg.alpha0;
    run_bracket_solver(oracle, start, &run, |b, last| {
        if let Some(br) = last {
            history.pop();
            history.insert(0, replaced_side(br));
        }
        let floor = alpha_floor(b)?;
        alpha = alpha.max(floor);
        alpha = escalate(b, alpha, cfg.chi_tol).map_err(|e| match e {
            DupmError::Model(m) => SolveError::Model(m),
            DupmError::ConditionFalseAtUpper { .. } => SolveError::Config("curvature escalation diverged"),
        })?;
        let delta = run.delta_for(b.left1(), b.right1());
        match dupm_step(b, alpha, &history[..cfg.same_side_limit], delta) {
            Ok(x) => Ok(Step::Trial { x, alpha: Some(alpha) }),
            Err(StepError::BracketTooSmall) => Ok(Step::Stall),
            Err(StepError::Model(e)) => Err(e.into()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Status;

    fn sampled(f: impl Fn(f64) -> f64, x: [f64; 7]) -> ExtendedBracket7 {
        ExtendedBracket7::new(x, x.map(f)).unwrap()
    }

    #[test]
    fn floor_and_plus_on_quadratic() {
        let b = sampled(|x| x * x, [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(alpha_floor(&b).unwrap(), 0.0);
        assert_eq!(alpha_plus(&b).unwrap(), 0.25);
    }

    #[test]
    fn condition_holds_for_large_alpha() {
        let x = [-3.0, -2.2, -1.0, 0.1, 0.9, 2.0, 3.1];
        let b = sampled(|x: f64| x.abs() + 0.1 * x * x, x);
        let ap = alpha_plus(&b).unwrap();
        assert!(intersection_condition(&b, ap + 1.0).unwrap());
        let c = chi(&b, 0.0, None).unwrap();
        assert!(intersection_condition(&b, c).unwrap());
    }

    #[test]
    fn flags_follow_replaced_side() {
        assert_eq!(replaced_side(Branch::LeftImproving), Side::Right);
        assert_eq!(replaced_side(Branch::RightImproving), Side::Left);
        assert_eq!(replaced_side(Branch::RightWorse), Side::Right);
        assert_eq!(replaced_side(Branch::LeftWorse), Side::Left);
    }

    fn kinked() -> ExtendedBracket7 {
        sampled(|x: f64| (x - 0.2).abs() + 0.3 * x * x, [-2.0, -1.3, -0.7, 0.1, 0.9, 1.4, 2.2])
    }

    #[test]
    fn one_sided_history_takes_limit_step() {
        let b = kinked();
        let limit = eupm_step(&b.inner_five());
        let got = dupm_step(&b, 0.5, &[Side::Right; 3], 1e-9).unwrap();
        assert_eq!(got, safeguard(limit, b.left1(), b.mid(), b.right1(), 1e-9).unwrap());
        assert_eq!(dupm_step(&b, 0.5, &[Side::Left; 3], 1e-9).unwrap(), got);
    }

    #[test]
    fn mixed_history_takes_model_step() {
        let b = kinked();
        let alpha = 0.5;
        let expected = crate::supm::supm_step(&b, alpha, 1e-9).unwrap();
        assert_eq!(dupm_step(&b, alpha, &INITIAL_HISTORY, 1e-9).unwrap(), expected);
        assert_ne!(expected, dupm_step(&b, alpha, &[Side::Right; 3], 1e-9).unwrap());
    }

    #[test]
    fn three_right_worse_updates_make_history_one_sided() {
        let mut history = INITIAL_HISTORY.to_vec();
        for _ in 0..3 {
            history.pop();
            history.insert(0, replaced_side(Branch::RightWorse));
        }
        assert_eq!(history, vec![Side::Right; 3]);
        // two updates are not enough
        let mut partial = INITIAL_HISTORY.to_vec();
        for _ in 0..2 {
            partial.pop();
            partial.insert(0, replaced_side(Branch::RightWorse));
        }
        assert_ne!(partial, vec![Side::Right; 3]);
    }

    #[test]
    fn converges_on_v_shape() {
        let f = |x: f64| (x - 0.123).abs();
        let start = sampled(f, [-0.9, -0.6, -0.4, 0.05, 0.5, 0.7, 0.95]);
        let res = dupm_minimize(&mut { f }, start, &DupmConfig::default()).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!((res.bracket.mid() - 0.123).abs() < 1e-8);
        let alphas: Vec<f64> = res.trace.iter().filter_map(|t| t.alpha).collect();
        assert!(alphas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_zero_limit() {
        let start = sampled(|x| x * x, [-3.0, -2.0, -1.0, 0.5, 1.0, 2.0, 3.0]);
        let cfg = DupmConfig { same_side_limit: 0, ..Default::default() };
        assert!(matches!(dupm_minimize(&mut |x: f64| x * x, start, &cfg), Err(SolveError::Config(_))));
    }
}
