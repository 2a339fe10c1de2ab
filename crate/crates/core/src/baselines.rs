//! Reference methods for comparison: golden section search, Brent's
//! parabolic/golden hybrid and a five-point polyhedral-quadratic method.

use crate::brackets::{Bracket3, ExtendedBracket5};
use crate::models::{divided_diff1, divided_diff2, QuadModel};
use crate::solver::{
    run_bracket_solver, Oracle, RunConfig, SolveError, SolverResult, Status, Step, TraceEntry, UpdateError,
};
use crate::supm::{minimize_max, safeguard, StepError};

/// `(3 - sqrt 5) / 2`, the fraction of a segment at which golden probes are placed.
pub const GOLDEN_SECTION: f64 = 0.381_966_011_250_105_2;
/// `(sqrt 5 - 1) / 2`, the interval reduction per golden iteration.
pub const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

fn triple(x: [f64; 3], f: [f64; 3]) -> Result<Bracket3, SolveError> {
    Bracket3::ordered(x, f).map_err(|e| UpdateError::InvariantBroken(e).into())
}

fn finish(status: Status, trace: Vec<TraceEntry>, evaluations: usize) -> Result<SolverResult, SolveError> {
    let last = trace.last().copied().expect("trace holds the start state");
    Ok(SolverResult {
        status,
        bracket: triple([last.left, last.mid, last.right], [last.f_left, last.f_mid, last.f_right])?,
        iterations: trace.len() - 1,
        evaluations,
        trace,
    })
}

/// Golden section search on the bracket `(L, M, R)`. The center serves as one
/// of the two probes; the other goes into the larger segment. Once the probes
/// sit at golden positions every iteration keeps exactly `GOLDEN_RATIO` of the interval.
pub fn golden_section<O: Oracle + ?Sized>(
    oracle: &mut O,
    start: Bracket3,
    cfg: &RunConfig,
) -> Result<SolverResult, SolveError> {
    cfg.validate()?;
    let [x0, m, x3] = *start.abscissae();
    let [f0, fm, f3] = *start.values();
    let (mut x, mut f) = ([x0, 0.0, 0.0, x3], [f0, 0.0, 0.0, f3]);
    if x3 - m > m - x0 {
        x[1] = m;
        f[1] = fm;
        x[2] = m + GOLDEN_SECTION * (x3 - m);
        f[2] = oracle.eval(x[2])?;
    } else {
        x[2] = m;
        f[2] = fm;
        x[1] = m - GOLDEN_SECTION * (m - x0);
        f[1] = oracle.eval(x[1])?;
    }
    let mut evaluations = 1;
    let mut trace = vec![TraceEntry::from_inner(0, &start, None, None)];
    let status = loop {
        if x[3] - x[0] <= 2.0 * cfg.eps {
            break Status::Converged;
        }
        if trace.len() > cfg.budget {
            break Status::BudgetExhausted;
        }
        if f[2] < f[1] {
            x = [x[1], x[2], x[2] + GOLDEN_SECTION * (x[3] - x[2]), x[3]];
            f = [f[1], f[2], 0.0, f[3]];
            if !(x[2] > x[1] && x[2] < x[3]) {
                break Status::Stalled;
            }
            f[2] = oracle.eval(x[2])?;
        } else {
            x = [x[0], x[1] - GOLDEN_SECTION * (x[1] - x[0]), x[1], x[2]];
            f = [f[0], 0.0, f[1], f[2]];
            if !(x[1] > x[0] && x[1] < x[2]) {
                break Status::Stalled;
            }
            f[1] = oracle.eval(x[1])?;
        }
        evaluations += 1;
        let b = if f[1] <= f[2] { 1 } else { 2 };
        let inner = triple([x[0], x[b], x[3]], [f[0], f[b], f[3]])?;
        trace.push(TraceEntry::from_inner(trace.len(), &inner, None, None));
    };
    finish(status, trace, evaluations)
}

/// Absolute part of Brent's step tolerance, as a fraction of `eps`. Kept well
/// below the stopping width so tolerance-sized steps never decide the final bracket.
pub const BRENT_ABS_TOL: f64 = 0.01;

/// Brent's method seeded with the bracket `(L, M, R)`: the center is the
/// initial best point and the endpoints are both the initial interval and
/// the interpolation history.
pub fn brent<O: Oracle + ?Sized>(oracle: &mut O, start: Bracket3, cfg: &RunConfig) -> Result<SolverResult, SolveError> {
    cfg.validate()?;
    let [mut a, mut x, mut b] = *start.abscissae();
    let [mut fa, mut fx, mut fb] = *start.values();
    // the endpoints double as the two previous iterates, so the first step can be parabolic
    let (mut w, mut fw, mut v, mut fv) = if fa <= fb { (a, fa, b, fb) } else { (b, fb, a, fa) };
    let (mut d, mut e) = (b - a, b - a);
    let mut evaluations = 0;
    let mut trace = vec![TraceEntry::from_inner(0, &start, None, None)];
    let status = loop {
        if b - a <= 2.0 * cfg.eps {
            break Status::Converged;
        }
        if trace.len() > cfg.budget {
            break Status::BudgetExhausted;
        }
        let xm = 0.5 * (a + b);
        let tol1 = 2.0 * f64::EPSILON * x.abs() + BRENT_ABS_TOL * cfg.eps;
        let tol2 = 2.0 * tol1;
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN_SECTION * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        if !(u > a && u < b) || u == x {
            break Status::Stalled;
        }
        let fu = oracle.eval(u)?;
        evaluations += 1;
        if fu <= fx {
            if u >= x {
                a = x;
                fa = fx;
            } else {
                b = x;
                fb = fx;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
                fa = fu;
            } else {
                b = u;
                fb = fu;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
        let inner = triple([a, x, b], [fa, fx, fb])?;
        trace.push(TraceEntry::from_inner(trace.len(), &inner, None, None));
    };
    finish(status, trace, evaluations)
}

/// Five-point method combining a secant line per side with a non-negative
/// curvature term estimated from that side's two points and the center.
/// The trial minimizes the larger of the two resulting models.
pub fn mifflin_step(bracket: &ExtendedBracket5) -> Result<f64, SolveError> {
    let m = (bracket.mid(), bracket.f_mid());
    let side = |i: usize, j: usize| -> Result<QuadModel, SolveError> {
        let p1 = bracket.point(i);
        let p2 = bracket.point(j);
        Ok(QuadModel {
            c0: p1.1,
            c1: divided_diff1(p1, p2)?,
            c2: divided_diff2(m, p1, p2)?.max(0.0),
            x1: p1.0,
            x2: p2.0,
        })
    };
    let ql = side(1, 0)?;
    let qr = side(3, 4)?;
    Ok(minimize_max(&ql, &qr, bracket.left1(), bracket.right1(), bracket.mid()).x)
}

/// Iterations allowed for the inner length to halve before a golden step is forced.
pub const MIFFLIN_SHRINK_WINDOW: usize = 3;

pub fn mifflin_minimize<O: Oracle + ?Sized>(
    oracle: &mut O,
    start: ExtendedBracket5,
    cfg: &RunConfig,
) -> Result<SolverResult, SolveError> {
    let run = *cfg;
    let mut widths: Vec<f64> = Vec::new();
    run_bracket_solver(oracle, start, &run, |b, _| {
        widths.push(b.inner_length());
        let n = widths.len();
        let slow = n > MIFFLIN_SHRINK_WINDOW && widths[n - 1] > 0.5 * widths[n - 1 - MIFFLIN_SHRINK_WINDOW];
        let raw = if slow {
            widths.clear();
            let (l1, m, r1) = (b.left1(), b.mid(), b.right1());
            if r1 - m > m - l1 {
                m + GOLDEN_SECTION * (r1 - m)
            } else {
                m - GOLDEN_SECTION * (m - l1)
            }
        } else {
            mifflin_step(b)?
        };
        let delta = run.delta_for(b.left1(), b.right1());
        match safeguard(raw, b.left1(), b.mid(), b.right1(), delta) {
            Ok(x) => Ok(Step::Trial { x, alpha: None }),
            Err(StepError::BracketTooSmall) => Ok(Step::Stall),
            Err(StepError::Model(e)) => Err(e.into()),
        }
    })
}
