//! Ordered point sets with cached function values.
//!
//! A `Bracket<N>` holds `N` strictly ascending abscissae with the center at
//! index `N / 2`. The center value must not exceed its two neighbours.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BracketError {
    #[error("abscissa {0} is not strictly greater than its predecessor")]
    NotAscending(usize),
    #[error("center value exceeds one of its neighbours")]
    NotABracket,
    #[error("gap after abscissa {0} is below the degeneracy threshold")]
    Degenerate(usize),
    #[error("non-finite abscissa or value at index {0}")]
    NonFinite(usize),
    #[error("gap vector entries must be positive")]
    NonPositiveGap,
}

/// Relative gap threshold used by [`Bracket::new`], in units of machine epsilon
/// times the outer length.
pub const DEFAULT_GAP_FACTOR: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<const N: usize> {
    x: [f64; N],
    f: [f64; N],
}

pub type Bracket3 = Bracket<3>;
pub type ExtendedBracket5 = Bracket<5>;
pub type ExtendedBracket7 = Bracket<7>;

impl<const N: usize> Bracket<N> {
    pub const CENTER: usize = N / 2;

    pub fn new(x: [f64; N], f: [f64; N]) -> Result<Self, BracketError> {
        Self::with_gap_factor(x, f, DEFAULT_GAP_FACTOR)
    }

    /// Like [`Bracket::new`] but with a custom degeneracy threshold: adjacent
    /// gaps must be at least `factor * f64::EPSILON * outer_length`.
    pub fn with_gap_factor(x: [f64; N], f: [f64; N], factor: f64) -> Result<Self, BracketError> {
        assert!(N >= 3 && N % 2 == 1, "bracket size must be odd and at least 3");
        for i in 0..N {
            if !x[i].is_finite() || !f[i].is_finite() {
                return Err(BracketError::NonFinite(i));
            }
        }
        for i in 1..N {
            if x[i] <= x[i - 1] {
                return Err(BracketError::NotAscending(i));
            }
        }
        let min_gap = factor * f64::EPSILON * (x[N - 1] - x[0]);
        for i in 1..N {
            if x[i] - x[i - 1] < min_gap {
                return Err(BracketError::Degenerate(i - 1));
            }
        }
        let c = Self::CENTER;
        if f[c - 1] < f[c] || f[c + 1] < f[c] {
            return Err(BracketError::NotABracket);
        }
        Ok(Self { x, f })
    }

    /// Builds a bracket checking order and the center condition only.
    pub(crate) fn ordered(x: [f64; N], f: [f64; N]) -> Result<Self, BracketError> {
        Self::with_gap_factor(x, f, 0.0)
    }

    pub fn abscissae(&self) -> &[f64; N] {
        &self.x
    }

    pub fn values(&self) -> &[f64; N] {
        &self.f
    }

    pub fn point(&self, i: usize) -> (f64, f64) {
        (self.x[i], self.f[i])
    }

    pub fn mid(&self) -> f64 {
        self.x[Self::CENTER]
    }

    pub fn f_mid(&self) -> f64 {
        self.f[Self::CENTER]
    }

    pub fn left1(&self) -> f64 {
        self.x[Self::CENTER - 1]
    }

    pub fn right1(&self) -> f64 {
        self.x[Self::CENTER + 1]
    }

    /// Distance between the two neighbours of the center.
    pub fn inner_length(&self) -> f64 {
        self.right1() - self.left1()
    }

    pub fn outer_length(&self) -> f64 {
        self.x[N - 1] - self.x[0]
    }

    /// Mirror image under `x -> -x`: abscissae are negated and reversed,
    /// values are reversed.
    pub fn reflect(&self) -> Self {
        let mut x = self.x;
        let mut f = self.f;
        x.reverse();
        f.reverse();
        for v in &mut x {
            *v = -*v;
        }
        Self { x, f }
    }

    /// The innermost three points.
    pub fn inner(&self) -> Bracket3 {
        let c = Self::CENTER;
        Bracket3 { x: [self.x[c - 1], self.x[c], self.x[c + 1]], f: [self.f[c - 1], self.f[c], self.f[c + 1]] }
    }
}

impl ExtendedBracket7 {
    /// The largest distance from an inner neighbour of the center to the
    /// opposite outermost point.
    pub fn scaling_h(&self) -> f64 {
        let x = &self.x;
        (x[6] - x[2]).max(x[4] - x[0])
    }

    /// Drops the outermost pair.
    pub fn inner_five(&self) -> ExtendedBracket5 {
        let mut x = [0.0; 5];
        let mut f = [0.0; 5];
        x.copy_from_slice(&self.x[1..6]);
        f.copy_from_slice(&self.f[1..6]);
        ExtendedBracket5 { x, f }
    }
}

impl ExtendedBracket5 {
    pub fn to_gaps(&self) -> GapVector {
        GapVector(gaps_of(&self.x))
    }
}

pub(crate) fn gaps_of(x: &[f64; 5]) -> [f64; 4] {
    [x[1] - x[0], x[2] - x[1], x[3] - x[2], x[4] - x[3]]
}

/// Consecutive distances `(L1-L2, M-L1, R1-M, R2-R1)` of a five point bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapVector([f64; 4]);

impl GapVector {
    pub fn new(p: [f64; 4]) -> Result<Self, BracketError> {
        if p.iter().all(|&v| v > 0.0 && v.is_finite()) {
            Ok(Self(p))
        } else {
            Err(BracketError::NonPositiveGap)
        }
    }

    pub fn get(&self) -> [f64; 4] {
        self.0
    }

    /// Abscissae placing the center at `mid`.
    pub fn abscissae(&self, mid: f64) -> [f64; 5] {
        let [p1, p2, p3, p4] = self.0;
        let l1 = mid - p2;
        let r1 = mid + p3;
        [l1 - p1, l1, mid, r1, r1 + p4]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Inverse of [`ExtendedBracket5::to_gaps`] on abscissae.
pub fn from_gaps(p: &GapVector, mid: f64) -> [f64; 5] {
    p.abscissae(mid)
}
