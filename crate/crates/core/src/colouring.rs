//! Two-colourings of `Z_n`, with an optional black (wildcard) vertex.
//!
//! File format (UTF-8, LF newlines):
//!
//! ```text
//! 7
//! RRRRBBB
//! black 0
//! ```
//!
//! Line 1 is `n`, line 2 holds exactly `n` characters from `{R, B}`, and
//! the optional third line names the black vertex. Vertex 0 sits at angle
//! 0 and indices increase counterclockwise.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Red,
    Blue,
}

impl Colour {
    pub fn swap(self) -> Colour {
        match self {
            Colour::Red => Colour::Blue,
            Colour::Blue => Colour::Red,
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colour::Red => "red",
            Colour::Blue => "blue",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColouringError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("black vertex {black} is outside 0..{n}")]
    BlackOutOfRange { black: usize, n: usize },
    #[error("a colouring needs at least one vertex")]
    Empty,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> ColouringError {
    ColouringError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// A red/blue colouring of the vertices `0..n` of a regular n-gon.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Colouring {
    red: Vec<bool>,
    black: Option<usize>,
}

impl Colouring {
    /// `red[v]` is true when vertex `v` is red.
    pub fn new(red: Vec<bool>, black: Option<usize>) -> Result<Self, ColouringError> {
        if red.is_empty() {
            return Err(ColouringError::Empty);
        }
        if let Some(b) = black {
            if b >= red.len() {
                return Err(ColouringError::BlackOutOfRange {
                    black: b,
                    n: red.len(),
                });
            }
        }
        Ok(Colouring { red, black })
    }

    pub fn from_fn(n: usize, mut is_red: impl FnMut(usize) -> bool) -> Self {
        Colouring {
            red: (0..n).map(&mut is_red).collect(),
            black: None,
        }
    }

    pub fn monochromatic(n: usize, colour: Colour) -> Self {
        Colouring::from_fn(n, |_| colour == Colour::Red)
    }

    /// Colouring whose vertex `v` is red iff bit `v` of `mask` is set.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        Colouring::from_fn(n, |v| mask >> v & 1 == 1)
    }

    pub fn n(&self) -> usize {
        self.red.len()
    }

    pub fn black(&self) -> Option<usize> {
        self.black
    }

    pub fn with_black(mut self, black: Option<usize>) -> Result<Self, ColouringError> {
        if let Some(b) = black {
            if b >= self.n() {
                return Err(ColouringError::BlackOutOfRange {
                    black: b,
                    n: self.n(),
                });
            }
        }
        self.black = black;
        Ok(self)
    }

    pub fn colour(&self, v: usize) -> Colour {
        if self.red[v] {
            Colour::Red
        } else {
            Colour::Blue
        }
    }

    pub fn is_red(&self, v: usize) -> bool {
        self.red[v]
    }

    pub fn is_black(&self, v: usize) -> bool {
        self.black == Some(v)
    }

    /// Whether vertex `v` may stand in a copy of colour class `colour`:
    /// its own colour matches, or it is the wildcard.
    pub fn matches(&self, v: usize, colour: Colour) -> bool {
        self.is_black(v) || self.colour(v) == colour
    }

    pub fn count(&self, colour: Colour) -> usize {
        self.red
            .iter()
            .filter(|&&r| r == (colour == Colour::Red))
            .count()
    }

    /// Rotation by `r` steps counterclockwise: vertex `v` moves to `v + r`.
    pub fn rotate(&self, r: usize) -> Colouring {
        let n = self.n();
        let r = r % n;
        let mut red = vec![false; n];
        for (v, &c) in self.red.iter().enumerate() {
            red[(v + r) % n] = c;
        }
        Colouring {
            red,
            black: self.black.map(|b| (b + r) % n),
        }
    }

    pub fn swap_colours(&self) -> Colouring {
        Colouring {
            red: self.red.iter().map(|&c| !c).collect(),
            black: self.black,
        }
    }

    /// `R`/`B` string of the colours.
    pub fn letters(&self) -> String {
        self.red
            .iter()
            .map(|&c| if c { 'R' } else { 'B' })
            .collect()
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("{}\n{}\n", self.n(), self.letters());
        if let Some(b) = self.black {
            out.push_str(&format!("black {b}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Colouring, ColouringError> {
        let mut lines = text.split('\n').enumerate();
        let (_, first) = lines.next().unwrap_or((0, ""));
        let first = first.strip_suffix('\r').unwrap_or(first);
        let n: usize = first
            .trim()
            .parse()
            .map_err(|_| parse_err(1, 1, format!("expected vertex count, found `{first}`")))?;
        if n == 0 {
            return Err(parse_err(1, 1, "vertex count must be positive"));
        }
        let (_, second) = lines
            .next()
            .ok_or_else(|| parse_err(2, 1, "missing colour line"))?;
        let second = second.strip_suffix('\r').unwrap_or(second);
        let mut red = Vec::with_capacity(n);
        for (col, ch) in second.chars().enumerate() {
            match ch {
                'R' => red.push(true),
                'B' => red.push(false),
                other => return Err(parse_err(2, col + 1, format!("invalid colour `{other}`"))),
            }
        }
        if red.len() != n {
            return Err(parse_err(
                2,
                red.len() + 1,
                format!("length {} != {n}", red.len()),
            ));
        }
        let mut black = None;
        for (idx, line) in lines {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if black.is_some() {
                return Err(parse_err(lineno, 1, "unexpected trailing content"));
            }
            let rest = line
                .strip_prefix("black ")
                .ok_or_else(|| parse_err(lineno, 1, "expected `black <index>`"))?;
            let b: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(lineno, 7, format!("invalid vertex `{}`", rest.trim())))?;
            if b >= n {
                return Err(parse_err(lineno, 7, format!("black vertex {b} >= {n}")));
            }
            black = Some(b);
        }
        Ok(Colouring { red, black })
    }
}

impl fmt::Debug for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.black {
            Some(b) => write!(f, "Colouring({}, black {b})", self.letters()),
            None => write!(f, "Colouring({})", self.letters()),
        }
    }
}

impl std::str::FromStr for Colouring {
    type Err = ColouringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Colouring::parse(s)
    }
}
