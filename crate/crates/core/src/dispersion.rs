//! Bloch dispersion of the periodic structure whose unit cell is `F_n`.
//!
//! A frequency propagates when `|x_n| <= 2`; the Bloch phase is then
//! `κ L = arccos(x_n / 2)` with `L` the physical length of the cell.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{bisect_edge, runs, FrequencyGrid};
use crate::systems::SystemSpec;
use crate::tiling::{Letter, TilingRule};
use crate::tracemap::trace_sequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochPoint {
    pub omega: f64,
    /// `x_n / 2`; frozen at the escape value when the recursion escaped.
    pub trace_half: f64,
    /// Real part of `κ L` in `[0, π]`.
    pub k_l: f64,
    /// Imaginary part of `κ L`, `arccosh(|x_n| / 2)`; infinite after escape.
    pub attenuation: f64,
    pub propagating: bool,
    /// True in gaps where `x_n < -2`, whose Bloch phase sits at the zone edge.
    pub negative_trace: bool,
}

pub fn bloch_from_trace(omega: f64, x: f64, escaped: bool) -> BlochPoint {
    let half = 0.5 * x;
    let propagating = !escaped && half.abs() <= 1.0;
    let (k_l, attenuation) = if propagating {
        (half.acos(), 0.0)
    } else if escaped {
        (if half < 0.0 { std::f64::consts::PI } else { 0.0 }, f64::INFINITY)
    } else {
        (if half < 0.0 { std::f64::consts::PI } else { 0.0 }, half.abs().acosh())
    };
    BlochPoint {
        omega,
        trace_half: half,
        k_l,
        attenuation,
        propagating,
        negative_trace: half < -1.0,
    }
}

pub fn bloch_point(spec: &SystemSpec, rule: TilingRule, n: usize, omega: f64) -> Result<BlochPoint> {
    let seq = trace_sequence(spec, rule, omega, n)?;
    Ok(bloch_from_trace(omega, seq.xs[n], seq.is_escaped(n)))
}

/// Physical length of the cell `F_n`. Mass-spring elements count as unit length.
pub fn cell_length(spec: &SystemSpec, rule: TilingRule, n: usize) -> Result<f64> {
    let (a, b) = rule.letter_counts(n)?;
    Ok(a as f64 * spec.element_length(Letter::A) + b as f64 * spec.element_length(Letter::B))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSample {
    pub omega: f64,
    /// `None` at a beam pole.
    pub point: Option<BlochPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandDiagram {
    pub rule: TilingRule,
    pub order: usize,
    pub cell_length: f64,
    pub samples: Vec<BandSample>,
}

pub fn band_diagram(spec: &SystemSpec, rule: TilingRule, n: usize, grid: &FrequencyGrid) -> Result<BandDiagram> {
    grid.validate()?;
    let samples = grid
        .omegas()
        .into_par_iter()
        .map(|w| match bloch_point(spec, rule, n, w) {
            Ok(p) => Ok(BandSample {
                omega: w,
                point: Some(p),
            }),
            Err(Error::BeamPole { .. }) => Ok(BandSample { omega: w, point: None }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandDiagram {
        rule,
        order: n,
        cell_length: cell_length(spec, rule, n)?,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassBand {
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl PassBand {
    pub fn contains(&self, omega: f64) -> bool {
        self.omega_lo <= omega && omega <= self.omega_hi
    }

    pub fn width(&self) -> f64 {
        self.omega_hi - self.omega_lo
    }
}

/// Pass bands of the `F_n` periodic structure seen on `grid`. Edges inside the
/// grid are bisected to machine precision; each returned endpoint is itself
/// in band. Bands narrower than the grid spacing may be missed.
pub fn passbands(spec: &SystemSpec, rule: TilingRule, n: usize, grid: &FrequencyGrid) -> Result<Vec<PassBand>> {
    grid.validate()?;
    let in_band = |w: f64| -> Result<bool> {
        match trace_sequence(spec, rule, w, n) {
            Ok(seq) => Ok(!seq.is_escaped(n) && seq.xs[n].abs() <= 2.0),
            Err(Error::BeamPole { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let omegas = grid.omegas();
    let mask = omegas.par_iter().map(|&w| in_band(w)).collect::<Result<Vec<_>>>()?;
    let pred = |w: f64| in_band(w).unwrap_or(false);
    Ok(runs(&mask)
        .into_iter()
        .map(|(i, j)| {
            let omega_lo = if i == 0 {
                omegas[0]
            } else {
                bisect_edge(omegas[i - 1], omegas[i], 0.0, pred)
            };
            let omega_hi = if j + 1 == omegas.len() {
                omegas[j]
            } else {
                bisect_edge(omegas[j + 1], omegas[j], 0.0, pred)
            };
            PassBand { omega_lo, omega_hi }
        })
        .collect())
}
