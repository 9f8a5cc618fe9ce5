//! Generalised Fibonacci tilings generated by `A -> A^m B^l`, `B -> A`,
//! starting from `F_0 = B`.
//!
//! Words list elements left to right in physical space. The transfer matrix of
//! a word is the ordered product of its element matrices applied right to left,
//! so the state at index 0 is carried to index `F_n`. With this convention the
//! cell matrices obey `T_{n+1} = T_{n-1}^l T_n^m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on explicitly generated words.
pub const DEFAULT_WORD_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "A",
            Letter::B => "B",
        })
    }
}

/// Substitution parameters `(m, l)`, both at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TilingRule {
    m: u32,
    l: u32,
}

impl TilingRule {
    pub fn new(m: u32, l: u32) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::InvalidParameter(format!(
                "tiling rule needs m >= 1 and l >= 1, got m = {m}, l = {l}"
            )));
        }
        Ok(TilingRule { m, l })
    }

    pub const fn golden() -> Self {
        TilingRule { m: 1, l: 1 }
    }

    pub const fn silver() -> Self {
        TilingRule { m: 2, l: 1 }
    }

    pub const fn bronze() -> Self {
        TilingRule { m: 3, l: 1 }
    }

    pub const fn copper() -> Self {
        TilingRule { m: 1, l: 2 }
    }

    pub const fn nickel() -> Self {
        TilingRule { m: 1, l: 3 }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// `F_n` with `F_0 = F_1 = 1` and `F_n = m F_{n-1} + l F_{n-2}`.
    pub fn fib_number(&self, n: usize) -> Result<u64> {
        let (m, l) = (u64::from(self.m), u64::from(self.l));
        let (mut prev, mut cur) = (1u64, 1u64);
        for _ in 1..n {
            let next = m
                .checked_mul(cur)
                .and_then(|a| l.checked_mul(prev).and_then(|b| a.checked_add(b)))
                .filter(|&v| v <= i64::MAX as u64)
                .ok_or(Error::Overflow { n })?;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Number of `A` and `B` letters in `F_n`.
    pub fn letter_counts(&self, n: usize) -> Result<(u64, u64)> {
        // counts obey the same recurrence as F_n with seeds F_0 = B, F_1 = A
        let (m, l) = (u64::from(self.m), u64::from(self.l));
        let step = |prev: u64, cur: u64| {
            m.checked_mul(cur)
                .and_then(|a| l.checked_mul(prev).and_then(|b| a.checked_add(b)))
                .ok_or(Error::Overflow { n })
        };
        let (mut a_prev, mut a_cur) = (0u64, 1u64);
        let (mut b_prev, mut b_cur) = (1u64, 0u64);
        if n == 0 {
            return Ok((0, 1));
        }
        for _ in 1..n {
            let a_next = step(a_prev, a_cur)?;
            let b_next = step(b_prev, b_cur)?;
            (a_prev, a_cur) = (a_cur, a_next);
            (b_prev, b_cur) = (b_cur, b_next);
        }
        Ok((a_cur, b_cur))
    }

    /// `σ(m, l) = (m + sqrt(m² + 4l)) / 2`, the limit of `F_{n+1} / F_n`.
    pub fn limit_ratio(&self) -> f64 {
        let m = f64::from(self.m);
        let l = f64::from(self.l);
        (m + (m * m + 4.0 * l).sqrt()) / 2.0
    }

    pub fn word(&self, n: usize) -> Result<TilingWord> {
        self.word_with_cap(n, DEFAULT_WORD_CAP)
    }

    pub fn word_with_cap(&self, n: usize, cap: u64) -> Result<TilingWord> {
        let len = self.fib_number(n)?;
        if len > cap {
            return Err(Error::WordCapExceeded { len, cap });
        }
        if n == 0 {
            return Ok(TilingWord {
                letters: vec![Letter::B],
                order: 0,
            });
        }
        let mut prev = vec![Letter::B];
        let mut cur = vec![Letter::A];
        for _ in 1..n {
            let mut next = Vec::with_capacity(self.m as usize * cur.len() + self.l as usize * prev.len());
            for _ in 0..self.m {
                next.extend_from_slice(&cur);
            }
            for _ in 0..self.l {
                next.extend_from_slice(&prev);
            }
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(TilingWord { letters: cur, order: n })
    }

    /// Human name of the rule when it has one.
    pub fn name(&self) -> Option<&'static str> {
        match (self.m, self.l) {
            (1, 1) => Some("golden"),
            (2, 1) => Some("silver"),
            (3, 1) => Some("bronze"),
            (1, 2) => Some("copper"),
            (1, 3) => Some("nickel"),
            _ => None,
        }
    }
}

impl fmt::Display for TilingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, l={})", self.m, self.l)
    }
}

/// The letter sequence of the cell `F_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingWord {
    pub letters: Vec<Letter>,
    pub order: usize,
}

impl TilingWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.letters.iter().filter(|&&c| c == letter).count()
    }
}

impl fmt::Display for TilingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for TilingWord {
    type Err = Error;

    /// Parses an `A`/`B` string; the order is unknown and set to zero.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'A' => Ok(Letter::A),
                'B' => Ok(Letter::B),
                other => Err(Error::InvalidParameter(format!("'{other}' is not a tiling letter"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidParameter("empty tiling word".into()));
        }
        Ok(TilingWord { letters, order: 0 })
    }
}
