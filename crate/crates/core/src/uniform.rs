//! Uniform colourings `c_t`: `2t` equal arcs coloured alternately, each arc
//! containing its clockwise endpoint.
//!
//! Besides building `c_t` on a grid, this module carries the two
//! instance-level tools around it: the nearest-integer jump counts
//! `round(t * d_i)`, and the residue search deciding whether `c_t` contains
//! a red copy of the `(k,2)`-power using only residues modulo `2^(k+1) - 2`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::colouring::Colouring;
use crate::detector::{detect_bruteforce, CopyWitness, DetectorError};
use crate::rational::{ArithmeticError, Rational};
use crate::tuple::{checked_lcm, discretize_on, DistanceTuple, TupleError};

/// Largest `k` accepted by [`residue_check`]; the memo holds `2^k` bits.
pub const MAX_RESIDUE_K: u32 = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniformError {
    #[error("t must be positive")]
    ZeroT,
    #[error("grid {grid} is not a positive multiple of 2t = {two_t}")]
    GridNotMultiple { grid: u64, two_t: u64 },
    #[error("k = {0} is outside 3..={MAX_RESIDUE_K}")]
    KOutOfRange(u32),
    #[error("jump residue {residue} equals 2^k - 1 = {forbidden}")]
    ForbiddenResidue { residue: u64, forbidden: u64 },
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// `c_t` on `Z_grid`: vertex `v` is red iff `floor(v * 2t / grid)` is even.
pub fn uniform_colouring(t: u64, grid: u64) -> Result<Colouring, UniformError> {
    if t == 0 {
        return Err(UniformError::ZeroT);
    }
    let two_t = 2 * t;
    if grid == 0 || !grid.is_multiple_of(two_t) {
        return Err(UniformError::GridNotMultiple { grid, two_t });
    }
    let arc = grid / two_t;
    Ok(Colouring::from_fn(grid as usize, |v| {
        (v as u64 / arc).is_multiple_of(2)
    }))
}

/// Smallest grid carrying both `c_t` and the gaps of `d`: `lcm(2t, lcm q_i)`.
pub fn uniform_grid(d: &DistanceTuple, t: u64) -> Result<u64, UniformError> {
    if t == 0 {
        return Err(UniformError::ZeroT);
    }
    let l = checked_lcm(2 * t as i128, d.common_denominator()? as i128)?;
    Ok(u64::try_from(l).map_err(|_| ArithmeticError::Overflow { op: "grid size" })?)
}

/// Searches the discretised `c_t` for a monochromatic copy of `d`.
pub fn uniform_copy(d: &DistanceTuple, t: u64) -> Result<Option<CopyWitness>, UniformError> {
    let grid = uniform_grid(d, t)?;
    let c = uniform_colouring(t, grid)?;
    let inst = discretize_on(d, grid)?;
    Ok(detect_bruteforce(&c, &inst, None)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpResult {
    /// `counts[i] = round(t * d_i)`; `identity_holds` is `sum == t`.
    Counts {
        counts: Vec<i128>,
        identity_holds: bool,
    },
    /// `t * d_index` is a half-integer (0-based index), so no arc of that
    /// length has both endpoints in the same colour.
    Blocked { index: usize },
}

/// Number of blue arcs of `c_t` jumped over by each side of a red copy.
pub fn jump_counts(d: &DistanceTuple, t: u64) -> Result<JumpResult, ArithmeticError> {
    let mut counts = Vec::with_capacity(d.k());
    for (index, x) in d.distances().iter().enumerate() {
        let scaled = x.checked_mul_int(t as i128)?;
        if scaled.is_half_integer() {
            return Ok(JumpResult::Blocked { index });
        }
        counts.push(scaled.round_nearest()?);
    }
    let identity_holds = counts.iter().sum::<i128>() == t as i128;
    Ok(JumpResult::Counts {
        counts,
        identity_holds,
    })
}

/// Jumps of the `(k,2)`-power inside `c_t`, reduced modulo `2^(k+1) - 2`.
///
/// On the grid `2t(2^k - 1)` the power's gaps are `2t, 4t, ..., 2^k t`, and a
/// vertex is red iff its index modulo `2^(k+1) - 2` is at most `2^k - 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueInstance {
    pub k: u32,
    pub t: u64,
    /// `2^(k+1) - 2`.
    pub modulus: u64,
    /// `jumps[i] = 2^(i+1) t mod modulus`.
    pub jumps: Vec<u64>,
}

impl ResidueInstance {
    pub fn new(k: u32, t: u64) -> Result<Self, UniformError> {
        if !(3..=MAX_RESIDUE_K).contains(&k) {
            return Err(UniformError::KOutOfRange(k));
        }
        if t == 0 {
            return Err(UniformError::ZeroT);
        }
        let modulus = (1u64 << (k + 1)) - 2;
        let mut jumps = Vec::with_capacity(k as usize);
        let mut x = (t % modulus) as u128;
        for _ in 0..k {
            x = (2 * x) % modulus as u128;
            jumps.push(x as u64);
        }
        Ok(ResidueInstance {
            k,
            t,
            modulus,
            jumps,
        })
    }

    /// Size of the red window `{0, ..., 2^k - 2}`.
    pub fn window(&self) -> u64 {
        (1u64 << self.k) - 1
    }

    pub fn is_red(&self, residue: u64) -> bool {
        residue < self.window()
    }

    /// Signed movement inside the window: residues above `2^k - 1` become
    /// `residue - modulus`.
    pub fn signed_jumps(&self) -> Result<Vec<i64>, UniformError> {
        let half = self.window();
        self.jumps
            .iter()
            .map(|&j| match j.cmp(&half) {
                std::cmp::Ordering::Less => Ok(j as i64),
                std::cmp::Ordering::Greater => Ok(j as i64 - self.modulus as i64),
                std::cmp::Ordering::Equal => Err(UniformError::ForbiddenResidue {
                    residue: j,
                    forbidden: half,
                }),
            })
            .collect()
    }
}

/// A red copy found by [`residue_check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueChain {
    pub start: u64,
    /// Jump indices (0-based, jump `i` is `2^(i+1) t`) in the order taken.
    pub order: Vec<usize>,
    /// Residues visited, starting with `start` and ending back on it.
    pub positions: Vec<u64>,
}

/// Decides whether `c_t` contains a red copy of the `(k,2)`-power.
///
/// The residue after a prefix of jumps depends only on which jumps were
/// used, so the search runs over subsets, memoising dead subsets for each
/// start residue. Start residues and jumps are tried in increasing order,
/// so the reported chain is the first one in that order.
pub fn residue_check(k: u32, t: u64) -> Result<Option<ResidueChain>, UniformError> {
    let inst = ResidueInstance::new(k, t)?;
    Ok(residue_search(&inst))
}

fn residue_search(inst: &ResidueInstance) -> Option<ResidueChain> {
    let k = inst.k as usize;
    let full = (1usize << k) - 1;
    let mut dead = vec![0u64; (1usize << k).div_ceil(64)];
    let mut order = Vec::with_capacity(k);

    fn dfs(
        inst: &ResidueInstance,
        mask: usize,
        pos: u64,
        full: usize,
        dead: &mut [u64],
        order: &mut Vec<usize>,
    ) -> bool {
        if mask == full {
            return true;
        }
        if dead[mask / 64] >> (mask % 64) & 1 == 1 {
            return false;
        }
        for (i, &jump) in inst.jumps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            let next = (pos + jump) % inst.modulus;
            if !inst.is_red(next) {
                continue;
            }
            order.push(i);
            if dfs(inst, mask | 1 << i, next, full, dead, order) {
                return true;
            }
            order.pop();
        }
        dead[mask / 64] |= 1 << (mask % 64);
        false
    }

    for start in 0..inst.window() {
        dead.iter_mut().for_each(|w| *w = 0);
        order.clear();
        if dfs(inst, 0, start, full, &mut dead, &mut order) {
            let mut positions = vec![start];
            for &i in &order {
                let last = *positions.last().unwrap();
                positions.push((last + inst.jumps[i]) % inst.modulus);
            }
            return Some(ResidueChain {
                start,
                order,
                positions,
            });
        }
    }
    None
}

/// Runs [`residue_check`] for every `t` in `1..=max_t` and returns the
/// failing values of `t` in increasing order.
pub fn residue_sweep(k: u32, max_t: u64) -> Result<Vec<u64>, UniformError> {
    ResidueInstance::new(k, 1)?;
    let failures: Vec<u64> = (1..=max_t)
        .into_par_iter()
        .filter_map(|t| {
            let inst = ResidueInstance::new(k, t).expect("k validated above");
            residue_search(&inst).is_none().then_some(t)
        })
        .collect();
    Ok(failures)
}

/// Smallest `t <= max_t` whose uniform colouring `c_t` avoids every
/// monochromatic copy of `d`, or `None` if the bound is exhausted.
///
/// For the `(k,2)`-power a hit would contradict the conjecture that every
/// `c_t` contains a copy; callers should treat it as a refutation.
pub fn nonpower_witness(d: &DistanceTuple, max_t: u64) -> Result<Option<u64>, UniformError> {
    let results: Vec<Option<u64>> = (1..=max_t)
        .into_par_iter()
        .map(|t| uniform_copy(d, t).map(|w| w.is_none().then_some(t)))
        .collect::<Result<_, _>>()?;
    Ok(results.into_iter().flatten().next())
}

/// `2 * t * d_i` for each distance, used by the robustness parity test.
pub fn doubled_arcs(d: &DistanceTuple, t: u64) -> Result<Vec<Rational>, ArithmeticError> {
    d.distances()
        .iter()
        .map(|x| x.checked_mul_int(2 * t as i128))
        .collect()
}
