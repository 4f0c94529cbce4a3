//! Doubling orbits on `(-1, 1)` and the prefix-sum permutation search.
//!
//! The map sends `x` to `2x`, `2x - 2` or `2x + 2`, whichever lands back in
//! `(-1, 1)`; it is undefined when `2x = ±1`. A closed orbit of length `k`
//! always sums to zero, and the open question is whether its entries can
//! be ordered so every prefix sum stays in `[0, 1)`.

use serde::Serialize;
use thiserror::Error;

use crate::rational::{ArithmeticError, Rational};
use crate::tuple::checked_lcm;
use crate::uniform::{ResidueInstance, UniformError};

/// Largest list handled by the subset-memo search.
pub const MAX_PREFIX_LEN: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DoublingError {
    #[error("{0} is outside the open interval (-1, 1)")]
    OutOfRange(Rational),
    #[error("2 * {0} = ±1 exactly; the doubling map is undefined there")]
    Boundary(Rational),
    #[error("entries sum to {0}, expected 0")]
    NonZeroSum(Rational),
    #[error("entry {index} maps to {got}, expected {expected}")]
    NotAnOrbit {
        index: usize,
        got: Rational,
        expected: Rational,
    },
    #[error("orbit length must be at least 1")]
    Empty,
    #[error("{0} entries are too many for the subset search (max {MAX_PREFIX_LEN})")]
    TooLong(usize),
    #[error(transparent)]
    Uniform(#[from] UniformError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// One step of the doubling map on `(-1, 1)`.
pub fn doubling_step(x: Rational) -> Result<Rational, DoublingError> {
    let one = Rational::ONE;
    let minus_one = Rational::from_integer(-1);
    if x <= minus_one || x >= one {
        return Err(DoublingError::OutOfRange(x));
    }
    let doubled = x.checked_mul_int(2)?;
    if doubled == one || doubled == minus_one {
        return Err(DoublingError::Boundary(x));
    }
    let two = Rational::from_integer(2);
    Ok(if doubled > one {
        doubled.checked_sub(&two)?
    } else if doubled < minus_one {
        doubled.checked_add(&two)?
    } else {
        doubled
    })
}

/// A closed orbit `x_1, ..., x_k` with `x_{k+1} = x_1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DoublingOrbit {
    xs: Vec<Rational>,
}

impl DoublingOrbit {
    /// Validates the map relation cyclically and the zero sum.
    pub fn new(xs: Vec<Rational>) -> Result<Self, DoublingError> {
        if xs.is_empty() {
            return Err(DoublingError::Empty);
        }
        for i in 0..xs.len() {
            let expected = xs[(i + 1) % xs.len()];
            let got = doubling_step(xs[i])?;
            if got != expected {
                return Err(DoublingError::NotAnOrbit {
                    index: i,
                    got,
                    expected,
                });
            }
        }
        let sum = Rational::checked_sum(&xs)?;
        if !sum.is_zero() {
            return Err(DoublingError::NonZeroSum(sum));
        }
        Ok(DoublingOrbit { xs })
    }

    pub fn xs(&self) -> &[Rational] {
        &self.xs
    }

    pub fn k(&self) -> usize {
        self.xs.len()
    }
}

/// Iterates the map `k` times from `x1`; returns the orbit if it closes.
pub fn orbit_from_seed(x1: Rational, k: usize) -> Result<Option<DoublingOrbit>, DoublingError> {
    if k == 0 {
        return Err(DoublingError::Empty);
    }
    let mut xs = Vec::with_capacity(k);
    let mut x = x1;
    for _ in 0..k {
        xs.push(x);
        x = doubling_step(x)?;
    }
    if x != x1 {
        return Ok(None);
    }
    // closure forces a zero sum; a failure here would be a genuine surprise
    DoublingOrbit::new(xs).map(Some)
}

/// The orbit `v_i / (2^k - 1)` read off the signed jumps of `c_t`.
pub fn orbit_from_uniform(k: u32, t: u64) -> Result<DoublingOrbit, DoublingError> {
    let inst = ResidueInstance::new(k, t)?;
    let scale = inst.window() as i128;
    let xs = inst
        .signed_jumps()?
        .into_iter()
        .map(|v| Rational::new(v as i128, scale))
        .collect::<Result<Vec<_>, _>>()?;
    DoublingOrbit::new(xs)
}

/// A permutation (0-based indices) whose prefix sums all lie in `[0, 1)`,
/// or `None`. The first such permutation in lexicographic order is
/// returned.
pub fn prefix_permutation(xs: &[Rational]) -> Result<Option<Vec<usize>>, DoublingError> {
    let k = xs.len();
    if k > MAX_PREFIX_LEN {
        return Err(DoublingError::TooLong(k));
    }
    let sum = Rational::checked_sum(xs)?;
    if !sum.is_zero() {
        return Err(DoublingError::NonZeroSum(sum));
    }
    // scale to integers: prefix sums must stay in [0, scale)
    let mut scale: i128 = 1;
    for x in xs {
        scale = checked_lcm(scale, x.denom())?;
    }
    let values: Vec<i128> = xs
        .iter()
        .map(|x| x.numer().checked_mul(scale / x.denom()))
        .collect::<Option<_>>()
        .ok_or(ArithmeticError::Overflow { op: "scaling" })?;

    fn dfs(
        values: &[i128],
        scale: i128,
        mask: usize,
        prefix: i128,
        dead: &mut [u64],
        order: &mut Vec<usize>,
    ) -> bool {
        if order.len() == values.len() {
            return true;
        }
        if dead[mask / 64] >> (mask % 64) & 1 == 1 {
            return false;
        }
        for (i, &v) in values.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            let next = prefix + v;
            if !(0..scale).contains(&next) {
                continue;
            }
            order.push(i);
            if dfs(values, scale, mask | 1 << i, next, dead, order) {
                return true;
            }
            order.pop();
        }
        dead[mask / 64] |= 1 << (mask % 64);
        false
    }

    let mut dead = vec![0u64; (1usize << k).div_ceil(64)];
    let mut order = Vec::with_capacity(k);
    Ok(dfs(&values, scale, 0, 0, &mut dead, &mut order).then_some(order))
}
