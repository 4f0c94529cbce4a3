//! Beatty sequences `floor(alpha n + beta)`, partition checks on finite
//! prefixes of the naturals (which include 0), and balanced periodic words.
//!
//! Sequence and letter indices are 1-based throughout this module, matching
//! the alphabet `{1, ..., k}` of the words.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{ArithmeticError, Rational};
use crate::tuple::{checked_lcm, power_tuple, TupleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeattyError {
    #[error("a Beatty pair needs at least one sequence")]
    Empty,
    #[error("{alphas} alphas but {betas} betas")]
    LengthMismatch { alphas: usize, betas: usize },
    #[error("alpha {0} is not positive")]
    NonPositiveAlpha(Rational),
    #[error("the pair does not partition the prefix: {0}")]
    Partition(PartitionVerdict),
    #[error("beta_{index} is not alpha_{index} / 2")]
    NotHalfShift { index: usize },
    #[error("prefix limit {limit} is shorter than the period {period}")]
    PrefixTooShort { limit: u64, period: u64 },
    #[error("invalid word: {0}")]
    BadWord(String),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// `floor(alpha n + beta)`, computed exactly.
pub fn beatty_term(alpha: Rational, beta: Rational, n: u64) -> Result<i128, ArithmeticError> {
    Ok(alpha
        .checked_mul_int(n as i128)?
        .checked_add(&beta)?
        .floor())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BeattyPair {
    alphas: Vec<Rational>,
    betas: Vec<Rational>,
}

impl BeattyPair {
    /// Only positivity is required of the alphas; ties are allowed.
    pub fn new(alphas: Vec<Rational>, betas: Vec<Rational>) -> Result<Self, BeattyError> {
        if alphas.is_empty() {
            return Err(BeattyError::Empty);
        }
        if alphas.len() != betas.len() {
            return Err(BeattyError::LengthMismatch {
                alphas: alphas.len(),
                betas: betas.len(),
            });
        }
        if let Some(a) = alphas.iter().find(|a| !a.is_positive()) {
            return Err(BeattyError::NonPositiveAlpha(*a));
        }
        Ok(BeattyPair { alphas, betas })
    }

    /// The pair with `beta_i = alpha_i / 2`.
    pub fn with_half_shift(alphas: Vec<Rational>) -> Result<Self, BeattyError> {
        let two = Rational::from_integer(2);
        let betas = alphas
            .iter()
            .map(|a| a.checked_div(&two))
            .collect::<Result<Vec<_>, _>>()?;
        BeattyPair::new(alphas, betas)
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[Rational] {
        &self.alphas
    }

    pub fn betas(&self) -> &[Rational] {
        &self.betas
    }

    pub fn is_half_shift(&self) -> bool {
        self.alphas
            .iter()
            .zip(&self.betas)
            .all(|(a, b)| b.checked_mul_int(2) == Ok(*a))
    }

    /// Period of the induced word: the lcm of the alpha numerators.
    pub fn period(&self) -> Result<u64, BeattyError> {
        let mut p: i128 = 1;
        for a in &self.alphas {
            p = checked_lcm(p, a.numer())?;
        }
        u64::try_from(p).map_err(|_| ArithmeticError::Overflow { op: "period" }.into())
    }
}

/// The pair `alpha_i = (2^k - 1) / 2^(k-i)`, `beta_i = alpha_i / 2`.
pub fn power_pair(k: u32) -> Result<BeattyPair, BeattyError> {
    let d = power_tuple(k)?;
    let alphas = d
        .distances()
        .iter()
        .map(Rational::recip)
        .collect::<Result<Vec<_>, _>>()?;
    BeattyPair::with_half_shift(alphas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionVerdict {
    Ok,
    /// `value` is hit by sequences `first <= second` (equal when one
    /// sequence repeats a value).
    Collision {
        value: u64,
        first: usize,
        second: usize,
    },
    Gap {
        value: u64,
    },
    /// Sequence `sequence` produces a negative term at index `n`.
    OutOfRange {
        sequence: usize,
        n: u64,
        value: i128,
    },
}

impl fmt::Display for PartitionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PartitionVerdict::Ok => f.write_str("ok"),
            PartitionVerdict::Collision {
                value,
                first,
                second,
            } => {
                write!(f, "collision at {value} (sequences {first} and {second})")
            }
            PartitionVerdict::Gap { value } => write!(f, "gap at {value}"),
            PartitionVerdict::OutOfRange { sequence, n, value } => {
                write!(
                    f,
                    "sequence {sequence} has negative term {value} at n = {n}"
                )
            }
        }
    }
}

/// Owner of each value in `[0, limit)`: `0` for uncovered.
fn coverage(pair: &BeattyPair, limit: u64) -> Result<(Vec<usize>, PartitionVerdict), BeattyError> {
    let mut owner = vec![0usize; limit as usize];
    let mut collision: Option<(u64, usize, usize)> = None;
    for (i, (&a, &b)) in pair.alphas.iter().zip(&pair.betas).enumerate() {
        let seq = i + 1;
        let mut n = 0u64;
        loop {
            let v = beatty_term(a, b, n)?;
            if v < 0 {
                return Ok((
                    owner,
                    PartitionVerdict::OutOfRange {
                        sequence: seq,
                        n,
                        value: v,
                    },
                ));
            }
            if v >= limit as i128 {
                break;
            }
            let v = v as u64;
            let slot = &mut owner[v as usize];
            if *slot != 0 {
                if collision.is_none_or(|(cv, _, _)| v < cv) {
                    collision = Some((v, *slot, seq));
                }
            } else {
                *slot = seq;
            }
            n += 1;
        }
    }
    let verdict = match collision {
        Some((value, first, second)) => PartitionVerdict::Collision {
            value,
            first,
            second,
        },
        None => match owner.iter().position(|&o| o == 0) {
            Some(v) => PartitionVerdict::Gap { value: v as u64 },
            None => PartitionVerdict::Ok,
        },
    };
    Ok((owner, verdict))
}

/// Whether every integer in `[0, limit)` is hit by exactly one sequence.
///
/// A negative term is reported first, then the smallest collision, then
/// the smallest uncovered value.
pub fn partition_check(pair: &BeattyPair, limit: u64) -> Result<PartitionVerdict, BeattyError> {
    Ok(coverage(pair, limit)?.1)
}

/// `s_0 ... s_{limit-1}` where `s_j` is the sequence containing `j`.
pub fn word_from_pair(pair: &BeattyPair, limit: u64) -> Result<Vec<usize>, BeattyError> {
    match coverage(pair, limit)? {
        (owner, PartitionVerdict::Ok) => Ok(owner),
        (_, verdict) => Err(BeattyError::Partition(verdict)),
    }
}

/// One period of a periodic word over `{1, ..., k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct BalancedWord {
    letters: Vec<usize>,
}

impl BalancedWord {
    /// Letters must be non-empty and use exactly `1..=k` for some `k`.
    pub fn new(letters: Vec<usize>) -> Result<Self, BeattyError> {
        if letters.is_empty() {
            return Err(BeattyError::BadWord("empty period".into()));
        }
        let k = *letters.iter().max().unwrap();
        let mut seen = vec![false; k + 1];
        for &l in &letters {
            if l == 0 {
                return Err(BeattyError::BadWord("letters start at 1".into()));
            }
            seen[l] = true;
        }
        if let Some(missing) = (1..=k).find(|&l| !seen[l]) {
            return Err(BeattyError::BadWord(format!(
                "letter {missing} is missing; letters must be contiguous from 1"
            )));
        }
        Ok(BalancedWord { letters })
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn period(&self) -> usize {
        self.letters.len()
    }

    pub fn alphabet_size(&self) -> usize {
        *self.letters.iter().max().unwrap()
    }

    pub fn is_symmetric(&self) -> bool {
        self.letters.iter().eq(self.letters.iter().rev())
    }
}

/// Accepts `abacaba` (a = 1) or a comma-separated list such as `1,2,1`.
impl FromStr for BalancedWord {
    type Err = BeattyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let letters = if s.contains(',') || s.chars().all(|c| c.is_ascii_digit()) {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| BeattyError::BadWord(format!("invalid letter `{}`", t.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            s.chars()
                .map(|c| match c {
                    'a'..='z' => Ok(c as usize - 'a' as usize + 1),
                    _ => Err(BeattyError::BadWord(format!("invalid letter `{c}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        BalancedWord::new(letters)
    }
}

impl fmt::Display for BalancedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet_size() <= 26 {
            for &l in &self.letters {
                write!(f, "{}", (b'a' + l as u8 - 1) as char)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(usize::to_string).collect();
            f.write_str(&parts.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BalanceVerdict {
    Balanced,
    /// Windows of `length` starting at `max_position` and `min_position`
    /// hold counts of `letter` differing by more than one.
    Violation {
        letter: usize,
        length: usize,
        max_position: usize,
        min_position: usize,
    },
}

/// Per-letter prefix counts over two periods, so every cyclic window
/// starting in `[0, p)` is a difference of two entries.
fn prefix_counts(w: &BalancedWord) -> Vec<Vec<u32>> {
    let p = w.period();
    let mut counts = vec![vec![0u32; 2 * p + 1]; w.alphabet_size() + 1];
    for j in 0..2 * p {
        let l = w.letters[j % p];
        for (letter, row) in counts.iter_mut().enumerate() {
            row[j + 1] = row[j] + u32::from(letter == l);
        }
    }
    counts
}

fn check_length(w: &BalancedWord, counts: &[Vec<u32>], length: usize) -> Option<BalanceVerdict> {
    let p = w.period();
    for (letter, row) in counts.iter().enumerate().skip(1) {
        let mut max = (0u32, 0usize);
        let mut min = (u32::MAX, 0usize);
        for s in 0..p {
            let c = row[s + length] - row[s];
            if c > max.0 {
                max = (c, s);
            }
            if c < min.0 {
                min = (c, s);
            }
        }
        if max.0 > min.0 + 1 {
            return Some(BalanceVerdict::Violation {
                letter,
                length,
                max_position: max.1,
                min_position: min.1,
            });
        }
    }
    None
}

/// Compares all cyclic windows of each length `1..=p` starting in
/// `[0, p)`; reports the shortest violating length, then smallest letter.
pub fn balanced_check(w: &BalancedWord) -> BalanceVerdict {
    let counts = prefix_counts(w);
    (1..=w.period())
        .find_map(|len| check_length(w, &counts, len))
        .unwrap_or(BalanceVerdict::Balanced)
}

/// Balance verdict restricted to windows of a single length.
pub fn balanced_at_length(w: &BalancedWord, length: usize) -> bool {
    let counts = prefix_counts(w);
    check_length(w, &counts, length).is_none()
}

/// Frequency of each letter over one period.
pub fn densities(w: &BalancedWord) -> Vec<Rational> {
    let p = w.period() as i128;
    let mut counts = vec![0i128; w.alphabet_size()];
    for &l in &w.letters {
        counts[l - 1] += 1;
    }
    counts
        .into_iter()
        .map(|c| Rational::new(c, p).expect("period is positive"))
        .collect()
}

/// For each letter, whether two cyclically consecutive occurrences have
/// no larger letter between them.
pub fn consecutive_condition(w: &BalancedWord) -> Vec<bool> {
    let p = w.period();
    (1..=w.alphabet_size())
        .map(|a| {
            let positions: Vec<usize> = (0..p).filter(|&j| w.letters[j] == a).collect();
            positions.iter().enumerate().any(|(idx, &start)| {
                let end = if idx + 1 < positions.len() {
                    positions[idx + 1]
                } else {
                    positions[0] + p
                };
                (start + 1..end).all(|j| w.letters[j % p] <= a)
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FraenkelReport {
    pub period: u64,
    pub limit: u64,
    /// True when the prefix covers two full periods, so the partition
    /// verdict holds for all of the naturals.
    pub exact: bool,
    pub word: BalancedWord,
    pub balanced: BalanceVerdict,
    pub symmetric: bool,
    pub consecutive_condition: Vec<bool>,
    pub densities: Vec<Rational>,
    /// Each letter `i` has density `1 / alpha_i`.
    pub densities_match_alphas: bool,
    /// Densities equal those of the `(k,2)`-power.
    pub power: bool,
}

/// Structural report on a half-shift pair that partitions `[0, limit)`.
pub fn fraenkel_diagnostics(pair: &BeattyPair, limit: u64) -> Result<FraenkelReport, BeattyError> {
    if let Some(i) = (0..pair.k()).find(|&i| {
        pair.betas[i]
            .checked_mul_int(2)
            .map_or(true, |b2| b2 != pair.alphas[i])
    }) {
        return Err(BeattyError::NotHalfShift { index: i + 1 });
    }
    let period = pair.period()?;
    if limit < period {
        return Err(BeattyError::PrefixTooShort { limit, period });
    }
    let owner = word_from_pair(pair, limit)?;
    let word = BalancedWord::new(owner[..period as usize].to_vec())?;
    let dens = densities(&word);
    let densities_match_alphas = dens.len() == pair.k()
        && dens
            .iter()
            .zip(&pair.alphas)
            .all(|(d, a)| a.recip() == Ok(*d));
    let power = pair.k() >= 3
        && power_tuple(pair.k() as u32).is_ok_and(|d| d.distances() == dens.as_slice());
    Ok(FraenkelReport {
        period,
        limit,
        exact: limit >= period.saturating_mul(2),
        balanced: balanced_check(&word),
        symmetric: word.is_symmetric(),
        consecutive_condition: consecutive_condition(&word),
        densities: dens,
        densities_match_alphas,
        power,
        word,
    })
}

fn rationals_in(lo: Rational, hi: Rational, max_den: i128) -> Vec<Rational> {
    // lo < x <= hi with denominator at most max_den, sorted and deduplicated
    let mut out = Vec::new();
    for q in 1..=max_den {
        let start = lo.checked_mul_int(q).expect("small bounds").floor() + 1;
        let end = hi.checked_mul_int(q).expect("small bounds").floor();
        for p in start..=end {
            out.push(Rational::new(p, q).unwrap());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Every half-shift triple `alpha_1 <= alpha_2 <= alpha_3` with
/// `alpha_1, alpha_2` of denominator at most `max_den` and
/// `1/alpha_1 + 1/alpha_2 + 1/alpha_3 = 1` that partitions the naturals.
///
/// The density condition forces `alpha_1 <= 3` and
/// `alpha_2 <= 2 alpha_1 / (alpha_1 - 1)`, so the search is finite.
/// Candidates are screened on `[0, screen)` and confirmed on two periods.
pub fn partitioning_triples(max_den: i128, screen: u64) -> Result<Vec<BeattyPair>, BeattyError> {
    let one = Rational::ONE;
    let firsts = rationals_in(one, Rational::from_integer(3), max_den);
    let mut candidates = Vec::new();
    for &a1 in &firsts {
        let rest = one.checked_sub(&a1.recip()?)?;
        let a2_max = Rational::from_integer(2).checked_div(&rest)?;
        for a2 in rationals_in(one, a2_max, max_den) {
            if a2 < a1 {
                continue;
            }
            let left = rest.checked_sub(&a2.recip()?)?;
            if !left.is_positive() {
                continue;
            }
            let a3 = left.recip()?;
            if a3 >= a2 {
                candidates.push(vec![a1, a2, a3]);
            }
        }
    }
    let found: Vec<Option<BeattyPair>> = candidates
        .into_par_iter()
        .map(|alphas| {
            let pair = BeattyPair::with_half_shift(alphas)?;
            if partition_check(&pair, screen)? != PartitionVerdict::Ok {
                return Ok(None);
            }
            let full = pair.period()?.saturating_mul(2).max(screen);
            Ok((partition_check(&pair, full)? == PartitionVerdict::Ok).then_some(pair))
        })
        .collect::<Result<_, BeattyError>>()?;
    Ok(found.into_iter().flatten().collect())
}
