//! Distance tuples on the unit circle and their discretisation to `Z_n`.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{parse_rational_list, ArithmeticError, ParseRationalError, Rational};

/// Largest `k` for which `2^k - 1` and its products stay comfortably in range.
pub const MAX_POWER_K: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleError {
    #[error("a distance tuple needs k >= 3 entries, got {0}")]
    TooShort(usize),
    #[error("distance {0} is not positive")]
    NonPositive(Rational),
    #[error("distances sum to {0}, expected 1")]
    BadSum(Rational),
    #[error("k = {0} is outside the supported range 3..={MAX_POWER_K}")]
    PowerOutOfRange(u32),
    #[error("gap list is empty")]
    NoGaps,
    #[error("gap {0} is not a positive integer")]
    BadGap(i128),
    #[error("gaps sum to {sum}, expected n = {n}")]
    GapSum { sum: u64, n: u64 },
    #[error("grid of {n} vertices is not a multiple of the common denominator {lcm}")]
    GridMismatch { n: u64, lcm: u64 },
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
}

/// A k-tuple of arc lengths on the circle of unit perimeter, sorted
/// non-increasingly and summing to exactly 1.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DistanceTuple {
    distances: Vec<Rational>,
}

impl DistanceTuple {
    /// Builds a tuple from distances given in any order.
    pub fn new(mut distances: Vec<Rational>) -> Result<Self, TupleError> {
        if distances.len() < 3 {
            return Err(TupleError::TooShort(distances.len()));
        }
        if let Some(bad) = distances.iter().find(|d| !d.is_positive()) {
            return Err(TupleError::NonPositive(*bad));
        }
        let sum = Rational::checked_sum(&distances)?;
        if sum != Rational::ONE {
            return Err(TupleError::BadSum(sum));
        }
        distances.sort_by(|a, b| b.cmp(a));
        Ok(DistanceTuple { distances })
    }

    pub fn k(&self) -> usize {
        self.distances.len()
    }

    pub fn distances(&self) -> &[Rational] {
        &self.distances
    }

    /// Least common multiple of the reduced denominators: the smallest grid
    /// on which every distance is a whole number of steps.
    pub fn common_denominator(&self) -> Result<u64, TupleError> {
        let mut l: i128 = 1;
        for d in &self.distances {
            l = checked_lcm(l, d.denom())?;
        }
        u64::try_from(l).map_err(|_| ArithmeticError::Overflow { op: "lcm" }.into())
    }

    /// True when this is the `(k,2)`-power.
    pub fn is_power(&self) -> bool {
        match power_tuple(self.k() as u32) {
            Ok(p) => p == *self,
            Err(_) => false,
        }
    }
}

impl std::str::FromStr for DistanceTuple {
    type Err = TupleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistanceTuple::new(parse_rational_list(s)?)
    }
}

impl fmt::Display for DistanceTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.distances.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for DistanceTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn checked_lcm(a: i128, b: i128) -> Result<i128, ArithmeticError> {
    let g = a.gcd(&b);
    (a / g)
        .checked_mul(b)
        .map(i128::abs)
        .ok_or(ArithmeticError::Overflow { op: "lcm" })
}

/// A tuple scaled to integer gaps on the regular n-gon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DiscreteInstance {
    n: u64,
    gaps: Vec<u64>,
}

impl DiscreteInstance {
    pub fn new(n: u64, gaps: Vec<u64>) -> Result<Self, TupleError> {
        if gaps.is_empty() {
            return Err(TupleError::NoGaps);
        }
        if gaps.contains(&0) {
            return Err(TupleError::BadGap(0));
        }
        let sum: u64 = gaps.iter().sum();
        if sum != n {
            return Err(TupleError::GapSum { sum, n });
        }
        Ok(DiscreteInstance { n, gaps })
    }

    /// Builds an instance from integer gaps; `n` is their sum.
    pub fn from_gaps(gaps: Vec<u64>) -> Result<Self, TupleError> {
        let n = gaps.iter().sum();
        DiscreteInstance::new(n, gaps)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> usize {
        self.gaps.len()
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn has_distinct_gaps(&self) -> bool {
        let mut sorted = self.gaps.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// The `(k,2)`-power: `d_i = 2^(k-i) / (2^k - 1)` for `i = 1..=k`.
pub fn power_tuple(k: u32) -> Result<DistanceTuple, TupleError> {
    if !(3..=MAX_POWER_K).contains(&k) {
        return Err(TupleError::PowerOutOfRange(k));
    }
    let n = (1i128 << k) - 1;
    let distances = (1..=k)
        .map(|i| Rational::new(1i128 << (k - i), n))
        .collect::<Result<Vec<_>, _>>()?;
    DistanceTuple::new(distances)
}

/// Gaps `(2^(k-1), ..., 2, 1)` of the power instance over `n = 2^k - 1`.
pub fn power_instance(k: u32) -> Result<DiscreteInstance, TupleError> {
    discretize(&power_tuple(k)?, 1)
}

/// Scales `d` to the grid `n = lcm(denominators) * multiplier`.
pub fn discretize(d: &DistanceTuple, multiplier: u64) -> Result<DiscreteInstance, TupleError> {
    if multiplier == 0 {
        return Err(TupleError::BadGap(0));
    }
    let lcm = d.common_denominator()?;
    let n = lcm
        .checked_mul(multiplier)
        .ok_or(ArithmeticError::Overflow { op: "grid size" })?;
    discretize_on(d, n)
}

/// Scales `d` onto an explicit grid of `n` vertices.
pub fn discretize_on(d: &DistanceTuple, n: u64) -> Result<DiscreteInstance, TupleError> {
    let lcm = d.common_denominator()?;
    if n == 0 || !n.is_multiple_of(lcm) {
        return Err(TupleError::GridMismatch { n, lcm });
    }
    let gaps = d
        .distances()
        .iter()
        .map(|x| {
            let scaled = x.checked_mul_int(n as i128)?;
            debug_assert!(scaled.is_integer());
            Ok(scaled.numer() as u64)
        })
        .collect::<Result<Vec<_>, ArithmeticError>>()?;
    DiscreteInstance::new(n, gaps)
}
