//! Suitable values of `t` for triples, and the finite forcing check with a
//! black (wildcard) vertex.
//!
//! `t` is suitable for `d` when `c_t` has no monochromatic copy of `d`; it
//! is strongly suitable when additionally no `2t d_i` is an odd integer.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::colouring::Colouring;
use crate::detector::{copy_masks, DetectorError};
use crate::rational::{ArithmeticError, Rational};
use crate::tuple::{discretize_on, DistanceTuple, TupleError};
use crate::uniform::{uniform_copy, UniformError};

/// Largest grid for the exhaustive black-vertex check (`2^(n-1)` colourings).
pub const MAX_FORCING_N: u64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RobustError {
    #[error("expected a triple, got k = {0}")]
    NotTriple(usize),
    #[error("t must be positive")]
    ZeroT,
    #[error("grid of {0} vertices is too large for the exhaustive check (max {MAX_FORCING_N})")]
    GridTooLarge(u64),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Uniform(#[from] UniformError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// A triple with its reduced denominators `q_1, q_2, q_3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleAnalysis {
    pub d: DistanceTuple,
    pub denominators: [u64; 3],
}

impl TripleAnalysis {
    pub fn new(d: &DistanceTuple) -> Result<Self, RobustError> {
        let [a, b, c] = d.distances() else {
            return Err(RobustError::NotTriple(d.k()));
        };
        Ok(TripleAnalysis {
            d: d.clone(),
            denominators: [a.denom() as u64, b.denom() as u64, c.denom() as u64],
        })
    }

    /// Membership in `T = { t : no q_i divides 2t }`.
    pub fn in_t(&self, t: u64) -> bool {
        self.denominators
            .iter()
            .all(|&q| !(2 * t).is_multiple_of(q))
    }

    /// `T` is empty exactly when some `q_i` divides 2.
    pub fn t_is_empty(&self) -> bool {
        self.denominators.iter().any(|&q| 2 % q == 0)
    }
}

/// Whether `c_t` avoids every monochromatic copy of `d`.
pub fn is_suitable(d: &DistanceTuple, t: u64) -> Result<bool, RobustError> {
    if t == 0 {
        return Err(RobustError::ZeroT);
    }
    Ok(uniform_copy(d, t)?.is_none())
}

/// True when no `2t d_i` is an odd integer.
pub fn parity_condition(d: &DistanceTuple, t: u64) -> Result<bool, RobustError> {
    for x in d.distances() {
        let y = x.checked_mul_int(2 * t as i128)?;
        if y.is_integer() && y.numer() % 2 != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_strongly_suitable(d: &DistanceTuple, t: u64) -> Result<bool, RobustError> {
    TripleAnalysis::new(d)?;
    Ok(parity_condition(d, t)? && is_suitable(d, t)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuitableSearch {
    /// Some `q_i` divides 2, so no `t` lies in `T`.
    EmptyT {
        denominators: [u64; 3],
    },
    Found {
        t: u64,
    },
    None {
        max_t: u64,
    },
}

/// Smallest strongly-suitable `t <= max_t` lying in `T`.
pub fn strongly_suitable_search(
    d: &DistanceTuple,
    max_t: u64,
) -> Result<SuitableSearch, RobustError> {
    let analysis = TripleAnalysis::new(d)?;
    if analysis.t_is_empty() {
        return Ok(SuitableSearch::EmptyT {
            denominators: analysis.denominators,
        });
    }
    let candidates: Vec<u64> = (1..=max_t).filter(|&t| analysis.in_t(t)).collect();
    let hits = candidates
        .par_iter()
        .map(|&t| Ok(is_strongly_suitable(d, t)?.then_some(t)))
        .collect::<Result<Vec<_>, RobustError>>()?;
    Ok(match hits.into_iter().flatten().min() {
        Some(t) => SuitableSearch::Found { t },
        None => SuitableSearch::None { max_t },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingVerdict {
    /// Every colouring with vertex 0 black has a red-or-black or
    /// blue-or-black copy.
    Verified { colourings: u64 },
    /// The first colouring (by red-mask order) with no such copy.
    Counterexample {
        #[serde(serialize_with = "serialize_colouring")]
        colouring: Colouring,
    },
}

fn serialize_colouring<S: serde::Serializer>(c: &Colouring, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.serialize())
}

/// Exhausts all colourings of `Z_n` with vertex 0 black.
pub fn nearly_ramsey_finite_check(
    d: &DistanceTuple,
    n: u64,
) -> Result<ForcingVerdict, RobustError> {
    TripleAnalysis::new(d)?;
    if n > MAX_FORCING_N {
        return Err(RobustError::GridTooLarge(n));
    }
    let inst = discretize_on(d, n)?;
    let masks = copy_masks(&inst)?;
    let full = (1u64 << n) - 1;
    let total = 1u64 << (n - 1);
    let forced = |m: u64| {
        // bit 0 is the wildcard and belongs to both classes
        let red = (m << 1) | 1;
        let blue = (!(m << 1) & full) | 1;
        masks.iter().any(|&c| c & !red == 0 || c & !blue == 0)
    };
    let failure = (0..total).into_par_iter().find_first(|&m| !forced(m));
    Ok(match failure {
        None => ForcingVerdict::Verified { colourings: total },
        Some(m) => ForcingVerdict::Counterexample {
            colouring: Colouring::from_mask(n as usize, m << 1)
                .with_black(Some(0))
                .expect("n >= 1"),
        },
    })
}

/// The triples proved nearly-Ramsey: `d_1 = 1/2`, the `(3,2)`-power, and
/// three sporadic ones. A strongly-suitable `t` for any of them would
/// contradict that proof.
pub fn listed_nearly_ramsey(d: &DistanceTuple) -> bool {
    const LISTED: [[(i128, i128); 3]; 4] = [
        [(4, 7), (2, 7), (1, 7)],
        [(5, 8), (1, 4), (1, 8)],
        [(3, 4), (1, 6), (1, 12)],
        [(7, 12), (1, 4), (1, 6)],
    ];
    let ds = d.distances();
    if ds.len() != 3 {
        return false;
    }
    ds[0] == Rational::new(1, 2).unwrap()
        || LISTED.iter().any(|t| {
            t.iter()
                .zip(ds)
                .all(|(&(p, q), x)| x.numer() == p && x.denom() == q)
        })
}

/// Smallest grid carrying the triple: the lcm of its denominators.
pub fn minimal_grid(d: &DistanceTuple) -> Result<u64, RobustError> {
    Ok(d.common_denominator()?)
}

/// `2t d_i` for each entry, as shown in reports.
pub fn doubled_lengths(d: &DistanceTuple, t: u64) -> Result<Vec<Rational>, RobustError> {
    d.distances()
        .iter()
        .map(|x| Ok(x.checked_mul_int(2 * t as i128)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::Colour;
    use crate::tuple::power_tuple;

    fn triple(s: &str) -> DistanceTuple {
        s.parse().unwrap()
    }

    #[test]
    fn suitable_examples() {
        assert!(is_suitable(&triple("1/2,1/3,1/6"), 1).unwrap());
        assert!(!is_suitable(&triple("4/7,2/7,1/7"), 1).unwrap());
        assert!(is_suitable(&triple("1/3,1/3,1/3"), 1).unwrap());
    }

    #[test]
    fn strongly_suitable_examples() {
        assert!(is_strongly_suitable(&triple("1/3,1/3,1/3"), 1).unwrap());
        // 2 * 1 * 1/2 = 1 is odd
        assert!(!parity_condition(&triple("1/2,1/4,1/4"), 1).unwrap());
        assert!(!is_strongly_suitable(&triple("1/2,1/4,1/4"), 1).unwrap());
        assert!(matches!(
            is_strongly_suitable(&power_tuple(4).unwrap(), 1),
            Err(RobustError::NotTriple(4))
        ));
    }

    #[test]
    fn empty_t_when_a_denominator_is_two() {
        let d = triple("1/2,1/3,1/6");
        assert_eq!(
            strongly_suitable_search(&d, 100).unwrap(),
            SuitableSearch::EmptyT {
                denominators: [2, 3, 6]
            }
        );
        let a = TripleAnalysis::new(&triple("2/5,2/5,1/5")).unwrap();
        assert!(!a.t_is_empty());
        assert!(a.in_t(1) && !a.in_t(5));
    }

    #[test]
    fn search_agrees_with_per_t_oracle() {
        let d = triple("2/5,2/5,1/5");
        let a = TripleAnalysis::new(&d).unwrap();
        let expected = (1..=100u64)
            .filter(|&t| a.in_t(t))
            .find(|&t| is_suitable(&d, t).unwrap() && parity_condition(&d, t).unwrap());
        let got = strongly_suitable_search(&d, 100).unwrap();
        match expected {
            Some(t) => assert_eq!(got, SuitableSearch::Found { t }),
            None => assert_eq!(got, SuitableSearch::None { max_t: 100 }),
        }
    }

    #[test]
    fn parity_condition_independently() {
        // a hand-written check of "2 t p / q is an odd integer"
        let odd_integer =
            |p: i128, q: i128, t: i128| (2 * t * p) % q == 0 && (2 * t * p / q) % 2 != 0;
        for s in [
            "1/2,1/4,1/4",
            "2/5,2/5,1/5",
            "5/8,1/4,1/8",
            "3/4,1/6,1/12",
            "1/3,1/3,1/3",
        ] {
            let d = triple(s);
            for t in 1..=100u64 {
                let expect = !d
                    .distances()
                    .iter()
                    .any(|x| odd_integer(x.numer(), x.denom(), t as i128));
                assert_eq!(parity_condition(&d, t).unwrap(), expect, "{s} t={t}");
            }
        }
    }

    #[test]
    fn forcing_examples() {
        for (s, n) in [
            ("5/8,1/4,1/8", 8),
            ("3/4,1/6,1/12", 12),
            ("7/12,1/4,1/6", 12),
        ] {
            let v = nearly_ramsey_finite_check(&triple(s), n).unwrap();
            assert_eq!(
                v,
                ForcingVerdict::Verified {
                    colourings: 1 << (n - 1)
                },
                "{s}"
            );
        }
    }

    #[test]
    fn forcing_fails_without_enough_room() {
        // the equilateral triangle is not forced: colour the hexagon RBRBRB
        // around a black 0 and both triangles stay bichromatic
        let v = nearly_ramsey_finite_check(&triple("1/3,1/3,1/3"), 6).unwrap();
        let ForcingVerdict::Counterexample { colouring } = v else {
            panic!("expected a counterexample");
        };
        assert_eq!(colouring.black(), Some(0));
        let inst = discretize_on(&triple("1/3,1/3,1/3"), 6).unwrap();
        for m in copy_masks(&inst).unwrap() {
            let verts: Vec<usize> = (0..6).filter(|v| m >> v & 1 == 1).collect();
            for class in [Colour::Red, Colour::Blue] {
                assert!(!verts.iter().all(|&v| colouring.matches(v, class)));
            }
        }
    }

    #[test]
    fn listed_triples() {
        for s in [
            "4/7,2/7,1/7",
            "5/8,1/4,1/8",
            "3/4,1/6,1/12",
            "7/12,1/4,1/6",
            "1/2,2/5,1/10",
        ] {
            assert!(listed_nearly_ramsey(&triple(s)), "{s}");
        }
        assert!(!listed_nearly_ramsey(&triple("2/5,2/5,1/5")));
        assert!(!listed_nearly_ramsey(&power_tuple(4).unwrap()));
    }

    #[test]
    fn half_family_is_forced() {
        for s in [
            "1/2,1/4,1/4",
            "1/2,1/3,1/6",
            "1/2,3/8,1/8",
            "1/2,2/5,1/10",
            "1/2,5/12,1/12",
            "1/2,2/7,3/14",
        ] {
            let d = triple(s);
            let n = minimal_grid(&d).unwrap();
            assert!(
                matches!(
                    nearly_ramsey_finite_check(&d, n).unwrap(),
                    ForcingVerdict::Verified { .. }
                ),
                "{s}"
            );
        }
    }
}
