//! A colouring with red strictly denser than blue that still avoids red
//! copies of the `(k,2)`-power for `k >= 6`.
//!
//! The circle is cut into ten intervals of lengths
//! `1/16-e, 1/8+e, 1/8-e, 1/16+e, 1/8-e, 1/16+e, 1/8-e, 1/16+e, 1/8-e, 1/8+e`
//! coloured red, blue, red, ... in that order. Each interval contains its
//! lower-index endpoint on the grid.

use serde::Serialize;
use thiserror::Error;

use crate::colouring::{Colour, Colouring};
use crate::detector::{detect_bruteforce_in, CopyWitness, DetectorError};
use crate::rational::{ArithmeticError, Rational};
use crate::tuple::{checked_lcm, discretize_on, power_tuple, TupleError};

/// Largest grid handed to the detector.
pub const MAX_MAJORITY_GRID: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MajorityError {
    #[error("k = {0} is too small; the construction needs k >= 6")]
    KTooSmall(u32),
    #[error("k = {0} is too large")]
    KTooLarge(u32),
    #[error("eps = {eps} is outside the open window ({low}, 1/80)")]
    EpsOutOfWindow { eps: Rational, low: Rational },
    #[error("grid {grid} does not place interval endpoint {endpoint} on a vertex")]
    GridNotMultiple { grid: u64, endpoint: Rational },
    #[error("grid of {0} vertices is too large; choose eps with a smaller denominator")]
    GridTooLarge(u128),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MajorityParams {
    pub k: u32,
    pub eps: Rational,
}

impl MajorityParams {
    /// Requires `2^(k-1)/(2^k-1) - 1/2 < eps < 1/80`.
    pub fn new(k: u32, eps: Rational) -> Result<Self, MajorityError> {
        if k < 6 {
            return Err(MajorityError::KTooSmall(k));
        }
        if k > 62 {
            return Err(MajorityError::KTooLarge(k));
        }
        let low = window_low(k)?;
        let high = Rational::new(1, 80)?;
        if eps <= low || eps >= high {
            return Err(MajorityError::EpsOutOfWindow { eps, low });
        }
        Ok(MajorityParams { k, eps })
    }
}

/// Lower end of the admissible window: `2^(k-1)/(2^k-1) - 1/2`.
pub fn window_low(k: u32) -> Result<Rational, ArithmeticError> {
    let m = (1i128 << k) - 1;
    Rational::new(1i128 << (k - 1), m)?.checked_sub(&Rational::new(1, 2)?)
}

/// The ten interval lengths in order; odd positions (0-based even) are red.
pub fn interval_lengths(eps: Rational) -> Result<[Rational; 10], ArithmeticError> {
    let sixteenth = Rational::new(1, 16)?;
    let eighth = Rational::new(1, 8)?;
    let s_minus = sixteenth.checked_sub(&eps)?;
    let s_plus = sixteenth.checked_add(&eps)?;
    let e_minus = eighth.checked_sub(&eps)?;
    let e_plus = eighth.checked_add(&eps)?;
    Ok([
        s_minus, e_plus, e_minus, s_plus, e_minus, s_plus, e_minus, s_plus, e_minus, e_plus,
    ])
}

/// Interval endpoints `0 = e_0 < e_1 < ... < e_10 = 1`.
fn endpoints(eps: Rational) -> Result<Vec<Rational>, ArithmeticError> {
    let mut out = vec![Rational::ZERO];
    for len in interval_lengths(eps)? {
        let next = out.last().unwrap().checked_add(&len)?;
        out.push(next);
    }
    Ok(out)
}

/// Builds the colouring on `Z_grid`; every endpoint must land on a vertex.
pub fn majority_colouring(params: &MajorityParams, grid: u64) -> Result<Colouring, MajorityError> {
    let mut cuts = Vec::with_capacity(11);
    for e in endpoints(params.eps)? {
        let scaled = e.checked_mul_int(grid as i128)?;
        if !scaled.is_integer() {
            return Err(MajorityError::GridNotMultiple { grid, endpoint: e });
        }
        cuts.push(scaled.numer() as usize);
    }
    let mut red = vec![false; grid as usize];
    for (j, w) in cuts.windows(2).enumerate() {
        if j % 2 == 0 {
            red[w[0]..w[1]].iter_mut().for_each(|r| *r = true);
        }
    }
    Colouring::new(red, None).map_err(|_| MajorityError::GridNotMultiple {
        grid,
        endpoint: Rational::ZERO,
    })
}

/// `lcm` of the endpoint denominators and `2^k - 1`.
pub fn majority_grid(params: &MajorityParams) -> Result<u64, MajorityError> {
    let mut l: i128 = (1i128 << params.k) - 1;
    for e in endpoints(params.eps)? {
        l = checked_lcm(l, e.denom())?;
    }
    if l as u128 > MAX_MAJORITY_GRID as u128 {
        return Err(MajorityError::GridTooLarge(l as u128));
    }
    Ok(l as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MajorityVerdict {
    NoRedCopy {
        grid: u64,
    },
    /// A red copy; this would contradict the construction.
    Witness {
        grid: u64,
        witness: CopyWitness,
    },
}

/// Searches the discretised colouring for a red copy of the power.
pub fn majority_verify(params: &MajorityParams) -> Result<MajorityVerdict, MajorityError> {
    let grid = majority_grid(params)?;
    let c = majority_colouring(params, grid)?;
    let inst = discretize_on(&power_tuple(params.k)?, grid)?;
    Ok(
        match detect_bruteforce_in(&c, &inst, None, &[Colour::Red])? {
            None => MajorityVerdict::NoRedCopy { grid },
            Some(witness) => MajorityVerdict::Witness { grid, witness },
        },
    )
}
