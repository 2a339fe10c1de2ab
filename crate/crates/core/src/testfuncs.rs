//! Benchmark objectives in three families: smooth unimodal (`SU`),
//! non-smooth unimodal (`NU`) and smooth multimodal (`SM`).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::solver::{Oracle, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown test function {0:?}")]
pub struct UnknownFunction(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    SmoothUnimodal,
    NonsmoothUnimodal,
    SmoothMultimodal,
}

impl Suite {
    pub fn description(self) -> &'static str {
        match self {
            Suite::SmoothUnimodal => "smooth unimodal",
            Suite::NonsmoothUnimodal => "nonsmooth unimodal",
            Suite::SmoothMultimodal => "smooth multimodal",
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            Suite::SmoothUnimodal => "SU",
            Suite::NonsmoothUnimodal => "NU",
            Suite::SmoothMultimodal => "SM",
        }
    }
}

#[derive(Clone, Copy)]
pub struct TestFunction {
    pub suite: Suite,
    pub index: usize,
    pub domain: (f64, f64),
    f: fn(f64) -> f64,
    /// Plain-text formula, for listings.
    pub formula: &'static str,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.name())
    }
}

impl PartialEq for TestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.suite == other.suite && self.index == other.index && self.domain == other.domain
    }
}

impl TestFunction {
    pub fn name(&self) -> String {
        format!("{}{}", self.suite.prefix(), self.index)
    }

    /// Label in typeset form, e.g. `$f^{SU}_1$`.
    pub fn latex_label(&self) -> String {
        format!("$f^{{{}}}_{}$", self.suite.prefix(), self.index)
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn in_domain(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    pub fn oracle(&self) -> CountingOracle {
        CountingOracle::new(*self)
    }
}

fn su1(x: f64) -> f64 {
    -(-0.5f64).exp() * (-0.5 * x * x).exp()
}
fn su2(x: f64) -> f64 {
    x.powi(4) / 24.0
}
fn su3(x: f64) -> f64 {
    (-(2.0 * x - 0.5 * PI).sin() - 3.0 * x.cos() - 0.5 * x) / 11.0
}
fn su4(x: f64) -> f64 {
    let s = 5.0 * PI * x;
    (0.5 * x * x - s.cos() / (25.0 * PI * PI) - x * s.sin() / (5.0 * PI)) / 2500.0
}
fn su5(x: f64) -> f64 {
    -(x.powf(2.0 / 3.0) + (1.0 - x * x).cbrt()) / 250.0
}
fn su6(x: f64) -> f64 {
    (x.exp() + 1.0 / x.sqrt()) / 6000.0
}
fn su7(x: f64) -> f64 {
    -(16.0 * x * x - 24.0 * x + 5.0) * (-x).exp() / 13.0
}
fn nu1(x: f64) -> f64 {
    -60000.0 * (-x.abs() / 50.0).exp()
}
fn nu2(x: f64) -> f64 {
    // ln is NaN for negative x and f64::max ignores NaN, so the first branch wins there
    (1.0 / (x + 3.0)).max(x.ln()) / 6.0
}
fn nu3(x: f64) -> f64 {
    (1.0 / (x + 3.0)).max(1.0 / ((x - 3.0) * (x - 3.0))) / 24.0
}
fn nu4(x: f64) -> f64 {
    (1.0 / (x + 3.0)).max(x.exp()) / 160.0
}
fn nu5(x: f64) -> f64 {
    (-x).exp().max(x.exp()) / 150.0
}
fn sm1(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powi(6) / 300.0 * (2.0 + (1.0 / x).sin())
    }
}
fn sm2(x: f64) -> f64 {
    -(5.0 * PI * x).sin().powi(6) / 80000.0
}
fn sm3(x: f64) -> f64 {
    -(5.0 * PI * (x.powf(0.75) - 0.05)).sin().powi(6) / 250000.0
}
fn sm4(x: f64) -> f64 {
    let s = (16.0 * x / 15.0 - 1.0).sin();
    (s + s * s) / 5.0
}
fn sm5(x: f64) -> f64 {
    x * x / 4000.0 - x.cos() + 1.0
}
fn sm6(x: f64) -> f64 {
    ((x - 2.0).ln().powi(2) + (10.0 - x).ln().powi(2) - x.powf(0.2)) / 71.0
}
fn sm7(x: f64) -> f64 {
    (x.sin() + (10.0 * x / 3.0).sin() + x.ln() + 0.84 * x) / 40.0
}

const fn tf(suite: Suite, index: usize, domain: (f64, f64), f: fn(f64) -> f64, formula: &'static str) -> TestFunction {
    TestFunction { suite, index, domain, f, formula }
}

use Suite::{NonsmoothUnimodal as NU, SmoothMultimodal as SM, SmoothUnimodal as SU};

static CATALOGUE: [TestFunction; 19] = [
    tf(SU, 1, (-1.0, 1.0), su1, "-exp(-1/2) exp(-x^2/2)"),
    tf(SU, 2, (-1.0, 1.0), su2, "x^4/24"),
    tf(SU, 3, (-2.5, 3.0), su3, "(-sin(2x - pi/2) - 3 cos x - x/2)/11"),
    tf(SU, 4, (-10.0, 10.0), su4, "(x^2/2 - cos(5 pi x)/(25 pi^2) - x sin(5 pi x)/(5 pi))/2500"),
    tf(SU, 5, (0.1, 0.9), su5, "-(x^(2/3) + (1 - x^2)^(1/3))/250"),
    tf(SU, 6, (0.1, 3.0), su6, "(exp(x) + 1/sqrt(x))/6000"),
    tf(SU, 7, (1.3, 3.9), su7, "-(16x^2 - 24x + 5) exp(-x)/13"),
    tf(NU, 1, (-32.0, 32.0), nu1, "-60000 exp(-|x|/50)"),
    tf(NU, 2, (-2.0, 10.0), nu2, "max(1/(x+3), ln x)/6"),
    tf(NU, 3, (-2.0, 2.0), nu3, "max(1/(x+3), 1/(x-3)^2)/24"),
    tf(NU, 4, (-2.0, 5.0), nu4, "max(1/(x+3), exp(x))/160"),
    tf(NU, 5, (-5.0, 5.0), nu5, "max(exp(-x), exp(x))/150"),
    tf(SM, 1, (-1.0, 1.0), sm1, "x^6 (2 + sin(1/x))/300"),
    tf(SM, 2, (-1.0, 1.0), sm2, "-sin(5 pi x)^6/80000"),
    tf(SM, 3, (0.01, 1.0), sm3, "-sin(5 pi (x^(3/4) - 0.05))^6/250000"),
    tf(SM, 4, (-1.0, 1.0), sm4, "(sin(16x/15 - 1) + sin(16x/15 - 1)^2)/5"),
    tf(SM, 5, (-100.0, 100.0), sm5, "x^2/4000 - cos x + 1"),
    tf(SM, 6, (2.5, 9.5), sm6, "(ln(x-2)^2 + ln(10-x)^2 - x^(1/5))/71"),
    tf(SM, 7, (0.5, 10.0), sm7, "(sin x + sin(10x/3) + ln x + 0.84x)/40"),
];

pub fn all() -> &'static [TestFunction] {
    &CATALOGUE
}

pub fn suite(s: Suite) -> impl Iterator<Item = &'static TestFunction> {
    CATALOGUE.iter().filter(move |f| f.suite == s)
}

/// Looks a function up by name, e.g. `SU1` or `nu3`.
pub fn by_name(name: &str) -> Result<TestFunction, UnknownFunction> {
    CATALOGUE
        .iter()
        .find(|f| f.name().eq_ignore_ascii_case(name))
        .copied()
        .ok_or_else(|| UnknownFunction(name.to_string()))
}

/// Evaluates a test function, counting calls and rejecting points outside its domain.
#[derive(Debug, Clone)]
pub struct CountingOracle {
    func: TestFunction,
    calls: usize,
    memo: Option<HashMap<u64, f64>>,
    bounded: bool,
}

impl CountingOracle {
    pub fn new(func: TestFunction) -> Self {
        Self { func, calls: 0, memo: None, bounded: true }
    }

    /// Repeated abscissae are served from a cache and not counted again.
    pub fn with_memo(mut self) -> Self {
        self.memo = Some(HashMap::new());
        self
    }

    /// Accepts points outside the sampling domain, for starting brackets
    /// supplied by hand.
    pub fn unbounded(mut self) -> Self {
        self.bounded = false;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn function(&self) -> &TestFunction {
        &self.func
    }
}

impl Oracle for CountingOracle {
    fn eval(&mut self, x: f64) -> Result<f64, OracleError> {
        let (lo, hi) = self.func.domain;
        if self.bounded && !self.func.in_domain(x) {
            return Err(OracleError::OutOfDomain { x, lo, hi });
        }
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(&x.to_bits())) {
            return Ok(*v);
        }
        let value = self.func.eval(x);
        if !value.is_finite() {
            return Err(OracleError::NonFinite { x, value });
        }
        self.calls += 1;
        if let Some(m) = self.memo.as_mut() {
            m.insert(x.to_bits(), value);
        }
        Ok(value)
    }
}
