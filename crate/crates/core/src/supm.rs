//! Minimizing the pointwise maximum of the two side models, and the solver
//! built on that step with a fixed curvature constant.

use thiserror::Error;

use crate::brackets::ExtendedBracket7;
use crate::models::{build_model, ModelError, QuadModel, Side};
use crate::solver::{run_bracket_solver, Oracle, RunConfig, SolveError, SolverResult, Step};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StepError {
    #[error("bracket too small to place a safeguarded trial")]
    BracketTooSmall,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which candidate won the minimization of `max(qL, qR)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Intersection,
    Vertex(Side),
    Endpoint,
    /// The maximum is constant on a segment; its midpoint was taken.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepChoice {
    pub x: f64,
    pub kind: StepKind,
}

/// Real roots of `a u^2 + b u + c`, assuming `|u| <= width`.
fn quadratic_roots(a: f64, b: f64, c: f64, width: f64) -> Vec<f64> {
    let scale = a.abs() * width * width + b.abs() * width + c.abs();
    if a.abs() * width * width <= 4.0 * f64::EPSILON * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc >= -4.0 * f64::EPSILON * (b * b + (4.0 * a * c).abs()) {
            disc = 0.0;
        } else {
            return Vec::new();
        }
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = vec![q / a];
    if q != 0.0 {
        roots.push(c / q);
    }
    roots
}

/// Minimizer of `max(ql, qr)` over `[lo, hi]`. Ties go to an intersection,
/// then to the candidate nearest `mid`.
pub fn minimize_max(ql: &QuadModel, qr: &QuadModel, lo: f64, hi: f64, mid: f64) -> StepChoice {
    let value = |x: f64| ql.eval(x).max(qr.eval(x));
    let mut cands: Vec<(f64, StepKind)> = vec![(lo, StepKind::Endpoint), (hi, StepKind::Endpoint)];
    let (al, bl, cl) = ql.local_coefficients(mid);
    let (ar, br, cr) = qr.local_coefficients(mid);
    let width = (hi - mid).max(mid - lo);
    for u in quadratic_roots(al - ar, bl - br, cl - cr, width) {
        let x = mid + u;
        if x >= lo && x <= hi {
            cands.push((x, StepKind::Intersection));
        }
    }
    for (q, side) in [(ql, Side::Left), (qr, Side::Right)] {
        if let Some(v) = q.vertex() {
            if v > lo && v < hi {
                cands.push((v, StepKind::Vertex(side)));
            }
        }
    }
    let vals: Vec<f64> = cands.iter().map(|&(x, _)| value(x)).collect();
    let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mag = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 8.0 * f64::EPSILON * mag;
    let tied: Vec<(f64, StepKind)> =
        cands.iter().zip(&vals).filter(|(_, &v)| v <= best + tol).map(|(c, _)| *c).collect();
    let left = tied.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let right = tied.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    if right > left {
        let centre = 0.5 * (left + right);
        let flat = [0.25, 0.5, 0.75].iter().all(|t| value(left + t * (right - left)) <= best + tol);
        if flat {
            return StepChoice { x: centre, kind: StepKind::Flat };
        }
    }
    let pick = tied
        .iter()
        .min_by(|a, b| {
            let ka = a.1 != StepKind::Intersection;
            let kb = b.1 != StepKind::Intersection;
            ka.cmp(&kb).then((a.0 - mid).abs().total_cmp(&(b.0 - mid).abs()))
        })
        .copied()
        .expect("candidate set is never empty");
    StepChoice { x: pick.0, kind: pick.1 }
}

/// Unsafeguarded model step together with the kind of candidate selected.
pub fn supm_choice(bracket: &ExtendedBracket7, alpha: f64) -> Result<StepChoice, ModelError> {
    let ql = build_model(Side::Left, bracket, alpha)?;
    let qr = build_model(Side::Right, bracket, alpha)?;
    Ok(minimize_max(&ql, &qr, bracket.left1(), bracket.right1(), bracket.mid()))
}

/// Nearest point to `x` keeping distance `delta` from `l1`, `mid` and `r1`.
/// A trial exactly at `mid` moves to `mid - delta` when that is feasible.
// `from + dir * delta`, nudged outward until the rounded point is really `delta` away.
fn offset_at_least(from: f64, delta: f64, dir: f64) -> f64 {
    let mut p = from + dir * delta;
    while (p - from).abs() < delta {
        p = if dir < 0.0 { p.next_down() } else { p.next_up() };
    }
    p
}

pub fn safeguard(x: f64, l1: f64, mid: f64, r1: f64, delta: f64) -> Result<f64, StepError> {
    let pieces = [
        (offset_at_least(l1, delta, 1.0), offset_at_least(mid, delta, -1.0)),
        (offset_at_least(mid, delta, 1.0), offset_at_least(r1, delta, -1.0)),
    ];
    if x == mid && pieces[0].0 <= pieces[0].1 {
        return Ok(pieces[0].1);
    }
    let mut best: Option<(f64, f64)> = None;
    for (a, b) in pieces {
        if a > b {
            continue;
        }
        let p = x.clamp(a, b);
        let dist = (p - x).abs();
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some((p, dist));
        }
    }
    best.map(|(p, _)| p).ok_or(StepError::BracketTooSmall)
}

/// Safeguarded trial point for curvature constant `alpha`.
pub fn supm_step(bracket: &ExtendedBracket7, alpha: f64, delta: f64) -> Result<f64, StepError> {
    let choice = supm_choice(bracket, alpha)?;
    safeguard(choice.x, bracket.left1(), bracket.mid(), bracket.right1(), delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupmConfig {
    pub alpha: f64,
    pub run: RunConfig,
}

impl SupmConfig {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, run: RunConfig::default() }
    }
}

pub fn supm_minimize<O: Oracle + ?Sized>(
    oracle: &mut O,
    start: ExtendedBracket7,
    cfg: &SupmConfig,
) -> Result<SolverResult, SolveError> {
    if !(cfg.alpha >= 0.0 && cfg.alpha.is_finite()) {
        return Err(SolveError::Config("alpha must be finite and non-negative"));
    }
    let run = cfg.run;
    run_bracket_solver(oracle, start, &run, |b, _| {
        let delta = run.delta_for(b.left1(), b.right1());
        match supm_step(b, cfg.alpha, delta) {
            Ok(x) => Ok(Step::Trial { x, alpha: Some(cfg.alpha) }),
            Err(StepError::BracketTooSmall) => Ok(Step::Stall),
            Err(StepError::Model(e)) => Err(e.into()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Status;
    use proptest::prelude::*;

    fn sampled(f: impl Fn(f64) -> f64, x: [f64; 7]) -> ExtendedBracket7 {
        ExtendedBracket7::new(x, x.map(f)).unwrap()
    }

    #[test]
    fn stable_roots() {
        let r = quadratic_roots(1.0, -3.0, 2.0, 10.0);
        let mut r = r.clone();
        r.sort_by(f64::total_cmp);
        assert_eq!(r, vec![1.0, 2.0]);
        let r = quadratic_roots(1e-9, 1e8, -1e8, 2.0);
        assert!(r.iter().any(|&u| (u - 1.0).abs() < 1e-12));
        assert_eq!(quadratic_roots(0.0, 2.0, -1.0, 1.0), vec![0.5]);
        assert!(quadratic_roots(1.0, 0.0, 1.0, 1.0).is_empty());
    }

    #[test]
    fn symmetric_quadratic_steps_to_center_then_safeguards() {
        let b = sampled(|x| x * x, [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let c = supm_choice(&b, 0.0).unwrap();
        assert!(c.x.abs() < 1e-15);
        assert_eq!(supm_step(&b, 0.0, 1e-3).unwrap(), -1e-3);
    }

    #[test]
    fn shifted_quadratic_found_exactly() {
        let b = sampled(|x| (x - 0.3) * (x - 0.3), [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let x = supm_step(&b, 0.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn flat_data_takes_midpoint() {
        let b = ExtendedBracket7::new([-3.0, -2.0, -1.0, 0.5, 1.0, 2.0, 3.0], [1.0; 7]).unwrap();
        let c = supm_choice(&b, 0.0).unwrap();
        assert_eq!(c.kind, StepKind::Flat);
        assert_eq!(c.x, 0.0);
    }

    #[test]
    fn safeguard_cases() {
        assert_eq!(safeguard(0.5, 0.0, 0.5, 1.0, 0.125).unwrap(), 0.375);
        assert_eq!(safeguard(0.55, 0.0, 0.5, 1.0, 0.125).unwrap(), 0.625);
        assert_eq!(safeguard(0.0625, 0.0, 0.5, 1.0, 0.125).unwrap(), 0.125);
        assert_eq!(safeguard(0.25, 0.0, 0.5, 1.0, 0.125).unwrap(), 0.25);
        assert_eq!(safeguard(0.25, 0.0, 0.25, 1.0, 0.25).unwrap(), 0.5);
        assert_eq!(safeguard(0.5, 0.0, 0.5, 1.0, 0.375), Err(StepError::BracketTooSmall));
    }

    #[test]
    fn solver_converges_on_kink() {
        let x = [-0.9, -0.7, -0.45, 0.07, 0.5, 0.8, 0.95];
        let f = |x: f64| if x < 0.0 { -2.0 * x + x * x } else { x + 0.5 * x * x };
        let start = sampled(f, x);
        let mut cfg = SupmConfig::new(10.0);
        cfg.run.eps = 1e-10;
        let res = supm_minimize(&mut { f }, start, &cfg).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!(res.bracket.mid().abs() < 1e-9);
        assert_eq!(res.evaluations, res.iterations);
    }

    #[test]
    fn rejects_negative_alpha() {
        let start = sampled(|x| x * x, [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let err = supm_minimize(&mut |x: f64| x * x, start, &SupmConfig::new(-1.0));
        assert!(matches!(err, Err(SolveError::Config(_))));
    }

    fn random_bracket() -> impl Strategy<Value = ExtendedBracket7> {
        (prop::array::uniform7(0.05..1.0f64), prop::array::uniform7(0.0..3.0f64)).prop_map(|(g, mut f)| {
            let mut x = [0.0; 7];
            let mut acc = -2.0;
            for i in 0..7 {
                acc += g[i];
                x[i] = acc;
            }
            f[3] = f[2].min(f[4]) * 0.5;
            ExtendedBracket7::new(x, f).unwrap()
        })
    }

    proptest! {
        #[test]
        fn step_respects_safeguard(b in random_bracket(), alpha in 0.0..20.0f64) {
            let delta = 1e-3;
            let x = supm_step(&b, alpha, delta).unwrap();
            prop_assert!(x >= b.left1() + delta && x <= b.right1() - delta);
            prop_assert!((x - b.mid()).abs() >= delta);
        }

        #[test]
        fn step_is_translation_equivariant(b in random_bracket(), alpha in 0.0..20.0f64, s in -10.0..10.0f64) {
            let shifted = ExtendedBracket7::new(b.abscissae().map(|v| v + s), *b.values()).unwrap();
            let a = supm_choice(&b, alpha).unwrap().x;
            let c = supm_choice(&shifted, alpha).unwrap().x;
            prop_assert!((c - s - a).abs() <= 1e-8 * (1.0 + s.abs()) * b.outer_length());
        }

        #[test]
        fn step_minimizes_model_max(b in random_bracket(), alpha in 0.0..20.0f64) {
            let ql = build_model(Side::Left, &b, alpha).unwrap();
            let qr = build_model(Side::Right, &b, alpha).unwrap();
            let m = |x: f64| ql.eval(x).max(qr.eval(x));
            let c = supm_choice(&b, alpha).unwrap();
            let (lo, hi) = (b.left1(), b.right1());
            let scale = (0..=200).map(|k| m(lo + (hi - lo) * k as f64 / 200.0).abs()).fold(1.0f64, f64::max);
            for k in 0..=200 {
                let y = lo + (hi - lo) * k as f64 / 200.0;
                prop_assert!(m(c.x) <= m(y) + 1e-10 * scale);
            }
        }
    }
}
