//! Transmission through finite stacks of tiling cells.
//!
//! The global transfer matrix is the ordered product of the segment matrices,
//! leftmost segment applied first. The transmission coefficient is the
//! reciprocal of its lower-right entry, kept as a signed real number.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Mat2;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::systems::SystemSpec;
use crate::tiling::{Letter, TilingRule, TilingWord, DEFAULT_WORD_CAP};
use crate::tracemap::word_matrix;

/// `|T_G22|` below this is treated as a zero of the entry.
pub const DEGENERATE_ENTRY: f64 = 1e-300;
/// Cap on `|log10 |T_c||` in reported profiles.
pub const LOG10_CAP: f64 = 308.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Segment {
    Cell { rule: TilingRule, order: usize },
    Word(TilingWord),
}

impl Segment {
    fn word(&self) -> Result<TilingWord> {
        match self {
            Segment::Cell { rule, order } => rule.word(*order),
            Segment::Word(w) => Ok(w.clone()),
        }
    }

    pub fn element_count(&self) -> Result<u64> {
        match self {
            Segment::Cell { rule, order } => rule.fib_number(*order),
            Segment::Word(w) => Ok(w.len() as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stack {
    pub segments: Vec<Segment>,
    pub spec: SystemSpec,
}

impl Stack {
    pub fn new(segments: Vec<Segment>, spec: SystemSpec) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidStack("a stack needs at least one segment".into()));
        }
        let stack = Stack { segments, spec };
        let len = stack.element_count()?;
        if len > DEFAULT_WORD_CAP {
            return Err(Error::WordCapExceeded {
                len,
                cap: DEFAULT_WORD_CAP,
            });
        }
        Ok(stack)
    }

    /// Cells `F_lo, F_{lo+1}, ..., F_hi` laid left to right.
    pub fn quasicrystal(rule: TilingRule, lo: usize, hi: usize, spec: SystemSpec) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidStack(format!("empty order range {lo}..{hi}")));
        }
        Stack::new((lo..=hi).map(|order| Segment::Cell { rule, order }).collect(), spec)
    }

    pub fn element_count(&self) -> Result<u64> {
        self.segments.iter().try_fold(0u64, |acc, s| {
            let n = s.element_count()?;
            acc.checked_add(n).ok_or(Error::WordCapExceeded {
                len: u64::MAX,
                cap: DEFAULT_WORD_CAP,
            })
        })
    }

    /// All elements of the stack as one word.
    pub fn word(&self) -> Result<TilingWord> {
        let mut letters = Vec::new();
        for s in &self.segments {
            letters.extend(s.word()?.letters);
        }
        Ok(TilingWord { letters, order: 0 })
    }

    /// The same elements in the opposite physical order.
    pub fn reversed(&self) -> Result<Self> {
        let mut word = self.word()?;
        word.letters.reverse();
        Stack::new(vec![Segment::Word(word)], self.spec)
    }
}

/// `repeats` copies of the cell `F_n`.
pub fn periodic_sample(rule: TilingRule, n: usize, repeats: usize, spec: SystemSpec) -> Result<Stack> {
    if repeats == 0 {
        return Err(Error::InvalidStack("repeats must be at least 1".into()));
    }
    Stack::new(vec![Segment::Cell { rule, order: n }; repeats], spec)
}

/// Textual stack description: `quasicrystal:LO..HI` or `periodic:n=N,repeats=R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StackSpec {
    Quasicrystal { lo: usize, hi: usize },
    Periodic { n: usize, repeats: usize },
}

impl StackSpec {
    pub fn build(&self, rule: TilingRule, spec: SystemSpec) -> Result<Stack> {
        match *self {
            StackSpec::Quasicrystal { lo, hi } => Stack::quasicrystal(rule, lo, hi, spec),
            StackSpec::Periodic { n, repeats } => periodic_sample(rule, n, repeats, spec),
        }
    }
}

impl fmt::Display for StackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackSpec::Quasicrystal { lo, hi } => write!(f, "quasicrystal:{lo}..{hi}"),
            StackSpec::Periodic { n, repeats } => write!(f, "periodic:n={n},repeats={repeats}"),
        }
    }
}

impl FromStr for StackSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidStack(format!("cannot parse stack '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "quasicrystal" => {
                let (lo, hi) = rest.split_once("..").ok_or_else(bad)?;
                let hi = hi.strip_prefix('=').unwrap_or(hi);
                let lo = lo.trim().parse().map_err(|_| bad())?;
                let hi = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                Ok(StackSpec::Quasicrystal { lo, hi })
            }
            "periodic" => {
                let (mut n, mut repeats) = (None, None);
                for part in rest.split(',') {
                    let (key, value) = part.split_once('=').ok_or_else(bad)?;
                    let value: usize = value.trim().parse().map_err(|_| bad())?;
                    match key.trim() {
                        "n" => n = Some(value),
                        "repeats" => repeats = Some(value),
                        _ => return Err(bad()),
                    }
                }
                match (n, repeats) {
                    (Some(n), Some(repeats)) if repeats > 0 => Ok(StackSpec::Periodic { n, repeats }),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

pub fn global_transfer(stack: &Stack, omega: f64) -> Result<Mat2> {
    let (t_a, t_b) = stack.spec.element_pair(omega)?;
    let mut total = Mat2::IDENTITY;
    for seg in &stack.segments {
        total = word_matrix(&seg.word()?, t_a, t_b) * total;
    }
    Ok(total)
}

/// `T_c = 1 / T_G22`.
pub fn transmission_coefficient(stack: &Stack, omega: f64) -> Result<f64> {
    let tg = global_transfer(stack, omega)?;
    if tg.a22.abs() < DEGENERATE_ENTRY {
        return Err(Error::DegenerateEntry { omega });
    }
    Ok(1.0 / tg.a22)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFlag {
    Ok,
    /// A beam element is singular here.
    Pole,
    /// `|T_G22| < 1e-300`; the coefficient is reported as +inf.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionSample {
    pub omega: f64,
    pub t_c: f64,
    pub log10_abs_tc: f64,
    pub flag: SampleFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionProfile {
    pub grid: FrequencyGrid,
    pub values: Vec<TransmissionSample>,
}

fn capped_log10(v: f64) -> f64 {
    v.abs().log10().clamp(-LOG10_CAP, LOG10_CAP)
}

pub fn transmission_sample(stack: &Stack, omega: f64) -> Result<TransmissionSample> {
    match transmission_coefficient(stack, omega) {
        Ok(t_c) => Ok(TransmissionSample {
            omega,
            t_c,
            log10_abs_tc: capped_log10(t_c),
            flag: SampleFlag::Ok,
        }),
        Err(Error::DegenerateEntry { .. }) => Ok(TransmissionSample {
            omega,
            t_c: f64::INFINITY,
            log10_abs_tc: LOG10_CAP,
            flag: SampleFlag::Degenerate,
        }),
        Err(Error::BeamPole { .. }) => Ok(TransmissionSample {
            omega,
            t_c: f64::NAN,
            log10_abs_tc: f64::NAN,
            flag: SampleFlag::Pole,
        }),
        Err(e) => Err(e),
    }
}

pub fn transmission_profile(stack: &Stack, grid: &FrequencyGrid) -> Result<TransmissionProfile> {
    grid.validate()?;
    // expand the word once rather than per grid point
    let flat = Stack {
        segments: vec![Segment::Word(stack.word()?)],
        spec: stack.spec,
    };
    let values = grid
        .omegas()
        .into_par_iter()
        .map(|w| transmission_sample(&flat, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmissionProfile { grid: *grid, values })
}

/// Number of elements of each kind in the stack.
pub fn letter_totals(stack: &Stack) -> Result<(u64, u64)> {
    let word = stack.word()?;
    Ok((word.count(Letter::A) as u64, word.count(Letter::B) as u64))
}
