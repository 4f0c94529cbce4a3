//! Exact rational numbers over `i128` with checked arithmetic.
//!
//! Every arithmetic operation reports overflow as an [`ArithmeticError`]
//! instead of wrapping. Values are always stored in lowest terms with a
//! positive denominator, so structural equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithmeticError {
    #[error("integer overflow in rational {op}")]
    Overflow { op: &'static str },
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("`{0}` is not a finite rational (irrational distances are never Ramsey: colour the circle so that no two points at that distance share a colour)")]
    NotRational(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` does not fit in 128-bit arithmetic")]
    TooLarge(String),
}

/// A reduced fraction `num / den` with `den > 0`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Result<Self, ArithmeticError> {
        if den == 0 {
            return Err(ArithmeticError::DivisionByZero);
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = num
                .checked_neg()
                .ok_or(ArithmeticError::Overflow { op: "normalise" })?;
            den = den
                .checked_neg()
                .ok_or(ArithmeticError::Overflow { op: "normalise" })?;
        }
        Ok(Rational { num, den })
    }

    pub const fn from_integer(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    /// `floor(self)`.
    pub fn floor(&self) -> i128 {
        Integer::div_floor(&self.num, &self.den)
    }

    /// True when `self = m + 1/2` for some integer `m`.
    pub fn is_half_integer(&self) -> bool {
        self.den == 2
    }

    /// Nearest integer. Half-integers round up; callers that care about
    /// ties check [`Rational::is_half_integer`] first.
    pub fn round_nearest(&self) -> Result<i128, ArithmeticError> {
        Ok(self.checked_add(&Rational::new(1, 2)?)?.floor())
    }

    pub fn checked_add(&self, rhs: &Rational) -> Result<Rational, ArithmeticError> {
        const OP: ArithmeticError = ArithmeticError::Overflow { op: "addition" };
        let g = self.den.gcd(&rhs.den);
        let left = self.num.checked_mul(rhs.den / g).ok_or(OP)?;
        let right = rhs.num.checked_mul(self.den / g).ok_or(OP)?;
        let num = left.checked_add(right).ok_or(OP)?;
        let den = self.den.checked_mul(rhs.den / g).ok_or(OP)?;
        Rational::new(num, den)
    }

    pub fn checked_sub(&self, rhs: &Rational) -> Result<Rational, ArithmeticError> {
        self.checked_add(&rhs.checked_neg()?)
    }

    pub fn checked_neg(&self) -> Result<Rational, ArithmeticError> {
        Ok(Rational {
            num: self
                .num
                .checked_neg()
                .ok_or(ArithmeticError::Overflow { op: "negation" })?,
            den: self.den,
        })
    }

    pub fn checked_mul(&self, rhs: &Rational) -> Result<Rational, ArithmeticError> {
        const OP: ArithmeticError = ArithmeticError::Overflow {
            op: "multiplication",
        };
        // cross-reduce first so that in-range products never overflow
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let (g1, g2) = (g1.max(1), g2.max(1));
        let num = (self.num / g1).checked_mul(rhs.num / g2).ok_or(OP)?;
        let den = (self.den / g2).checked_mul(rhs.den / g1).ok_or(OP)?;
        Rational::new(num, den)
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, ArithmeticError> {
        if rhs.num == 0 {
            return Err(ArithmeticError::DivisionByZero);
        }
        self.checked_mul(&rhs.recip()?)
    }

    pub fn checked_mul_int(&self, k: i128) -> Result<Rational, ArithmeticError> {
        self.checked_mul(&Rational::from_integer(k))
    }

    pub fn recip(&self) -> Result<Rational, ArithmeticError> {
        Rational::new(self.den, self.num)
    }

    pub fn abs(&self) -> Result<Rational, ArithmeticError> {
        if self.num < 0 {
            self.checked_neg()
        } else {
            Ok(*self)
        }
    }

    /// Sum of a sequence, failing on the first overflow.
    pub fn checked_sum<'a, I>(iter: I) -> Result<Rational, ArithmeticError>
    where
        I: IntoIterator<Item = &'a Rational>,
    {
        iter.into_iter()
            .try_fold(Rational::ZERO, |acc, x| acc.checked_add(x))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n as i128)
    }
}

/// Compares `a/b` with `c/d` (positive denominators) without forming
/// cross products, using the continued-fraction expansion.
fn cmp_fractions(mut a: i128, mut b: i128, mut c: i128, mut d: i128) -> Ordering {
    let mut flipped = false;
    loop {
        let (qa, ra) = a.div_mod_floor(&b);
        let (qc, rc) = c.div_mod_floor(&d);
        let ord = qa.cmp(&qc);
        if ord != Ordering::Equal {
            return if flipped { ord.reverse() } else { ord };
        }
        // equal integer parts; compare ra/b against rc/d, both in [0, 1)
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if flipped {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                return if flipped {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (false, false) => {}
        }
        // ra/b < rc/d  <=>  b/ra > d/rc
        (a, b, c, d) = (b, ra, d, rc);
        flipped = !flipped;
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_fractions(self.num, self.den, other.num, other.den)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_int(s: &str, whole: &str) -> Result<i128, ParseRationalError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::NotRational(whole.to_string()));
    }
    s.parse::<i128>()
        .map_err(|_| ParseRationalError::TooLarge(whole.to_string()))
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p/q`, plain integers and finite decimals such as `0.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let too_large = |_| ParseRationalError::TooLarge(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p = parse_int(p.trim(), s)?;
            let q = parse_int(q.trim(), s)?;
            if q == 0 {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            return Rational::new(p, q).map_err(too_large);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseRationalError::NotRational(s.to_string()));
            }
            let negative = int.starts_with('-');
            let int_part = match int.trim_start_matches(['+', '-']) {
                "" => 0,
                digits => parse_int(digits, s)?,
            };
            let scale = 10i128
                .checked_pow(frac.len() as u32)
                .ok_or_else(|| ParseRationalError::TooLarge(s.to_string()))?;
            let frac_part = parse_int(frac, s)?;
            let magnitude = int_part
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac_part))
                .ok_or_else(|| ParseRationalError::TooLarge(s.to_string()))?;
            let num = if negative { -magnitude } else { magnitude };
            return Rational::new(num, scale).map_err(too_large);
        }
        Ok(Rational::from_integer(parse_int(s, s)?))
    }
}

/// Parses a comma-separated list of rationals, e.g. `4/7,2/7,1/7`.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, ParseRationalError> {
    s.split(',').map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn normalises_sign_and_gcd() {
        let x = r(6, -8);
        assert_eq!((x.numer(), x.denom()), (-3, 4));
        assert_eq!(r(0, -5), Rational::ZERO);
    }

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!("4/7".parse::<Rational>().unwrap(), r(4, 7));
        assert_eq!("9/18".parse::<Rational>().unwrap(), r(1, 2));
        assert_eq!("-9/10".parse::<Rational>().unwrap(), r(-9, 10));
        assert_eq!("0.6".parse::<Rational>().unwrap(), r(3, 5));
        assert_eq!("-0.9".parse::<Rational>().unwrap(), r(-9, 10));
        assert_eq!("3".parse::<Rational>().unwrap(), r(3, 1));
        assert!(matches!(
            "sqrt2".parse::<Rational>(),
            Err(ParseRationalError::NotRational(_))
        ));
        assert!(matches!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert_eq!(
            parse_rational_list("4/7,2/7,1/7").unwrap(),
            vec![r(4, 7), r(2, 7), r(1, 7)]
        );
    }

    #[test]
    fn overflow_is_reported() {
        let big = Rational::from_integer(i128::MAX);
        assert_eq!(
            big.checked_add(&Rational::ONE),
            Err(ArithmeticError::Overflow { op: "addition" })
        );
        assert!(big.checked_mul_int(2).is_err());
        let tiny = r(1, i128::MAX);
        assert!(tiny.checked_mul(&tiny).is_err());
    }

    #[test]
    fn ordering_survives_huge_operands() {
        let a = r(i128::MAX - 1, i128::MAX);
        let b = r(i128::MAX - 2, i128::MAX - 1);
        assert!(b < a);
        assert!(r(-1, 3) < r(-1, 4));
        assert_eq!(r(2, 4).cmp(&r(1, 2)), Ordering::Equal);
    }

    #[test]
    fn floor_and_rounding() {
        assert_eq!(r(12, 7).floor(), 1);
        assert_eq!(r(-1, 2).floor(), -1);
        assert_eq!(r(12, 7).round_nearest().unwrap(), 2);
        assert_eq!(r(3, 7).round_nearest().unwrap(), 0);
        assert!(r(5, 2).is_half_integer());
        assert!(!r(5, 3).is_half_integer());
    }

    proptest::proptest! {
        #[test]
        fn ordering_matches_cross_multiplication(
            a in -1000i128..1000, b in 1i128..1000,
            c in -1000i128..1000, d in 1i128..1000,
        ) {
            proptest::prop_assert_eq!(r(a, b).cmp(&r(c, d)), (a * d).cmp(&(c * b)));
        }

        #[test]
        fn field_operations_are_exact(
            a in -1000i128..1000, b in 1i128..1000,
            c in -1000i128..1000, d in 1i128..1000,
        ) {
            let (x, y) = (r(a, b), r(c, d));
            proptest::prop_assert_eq!(x.checked_add(&y).unwrap(), r(a * d + c * b, b * d));
            proptest::prop_assert_eq!(x.checked_mul(&y).unwrap(), r(a * c, b * d));
            proptest::prop_assert_eq!(x.checked_sub(&y).unwrap().checked_add(&y).unwrap(), x);
        }
    }
}
