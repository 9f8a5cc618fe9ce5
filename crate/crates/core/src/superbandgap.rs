//! Super band gap detection.
//!
//! A frequency lies in the super band gap `S_N` when `|x_n| > 2` for every
//! `n >= N`. Each detector below checks a growth condition on three
//! consecutive traces which guarantees that for its family of tilings:
//!
//! * golden and silver means: `|x_N| > 2`, `|x_{N+1}| >= |x_N|`, `|x_{N+2}| >= |x_{N+1}|`;
//! * precious means (`l = 1`, `m >= 3`): `|x_N| > 2` and `|x_{k+1}| >= |d_{m-1}(x_k) x_k|` for `k = N, N+1`;
//! * metal means (`m = 1`, `l >= 2`): `|x_N| > 2`, `|x_{N+1}| >= 5/2`,
//!   `|x_{N+2}| >= max(|x_{N+1}|, |d_{l+1}(x_N)|)`.
//!
//! No condition is known when both `m >= 2` and `l >= 2`; such rules are rejected.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{cheb_eval, SATURATION};
use crate::error::{Error, Result};
use crate::grid::{bisect_edge, runs, FrequencyGrid};
use crate::systems::{sigma_classify, BeamParams, MassSpringParams, SigmaClass, SystemSpec};
use crate::tiling::{Letter, TilingRule, DEFAULT_WORD_CAP};
use crate::tracemap::{cell_matrix_with_cap, trace_sequence, TraceSequence};

/// Relative tolerance on ω for refined interval endpoints.
pub const SBG_EDGE_REL_TOL: f64 = 1e-6;

/// How far past the requested order a growth condition is looked for. Orders
/// skipped this way are covered by checking `|x_n| > 2` directly.
pub const MEMBERSHIP_LOOKAHEAD: usize = 4;

pub fn check_golden(x_n: f64, x_n1: f64, x_n2: f64) -> bool {
    x_n.abs() > 2.0 && x_n1.abs() >= x_n.abs() && x_n2.abs() >= x_n1.abs()
}

/// Same hypotheses as [`check_golden`]; only the governing recursion differs.
pub fn check_silver(x_n: f64, x_n1: f64, x_n2: f64) -> bool {
    check_golden(x_n, x_n1, x_n2)
}

pub fn check_precious(m: u32, x_n: f64, x_n1: f64, x_n2: f64) -> bool {
    let k = m as usize - 1;
    x_n.abs() > 2.0 && x_n1.abs() >= (cheb_eval(k, x_n) * x_n).abs() && x_n2.abs() >= (cheb_eval(k, x_n1) * x_n1).abs()
}

pub fn check_metal(l: u32, x_n: f64, x_n1: f64, x_n2: f64) -> bool {
    if l == 1 {
        return check_golden(x_n, x_n1, x_n2);
    }
    x_n.abs() > 2.0 && x_n1.abs() >= 2.5 && x_n2.abs() >= x_n1.abs().max(cheb_eval(l as usize + 1, x_n).abs())
}

/// The growth condition matched to a tiling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthCondition {
    Golden,
    Silver,
    Precious(u32),
    Metal(u32),
}

impl GrowthCondition {
    pub fn for_rule(rule: TilingRule) -> Result<Self> {
        match (rule.m(), rule.l()) {
            (1, 1) => Ok(GrowthCondition::Golden),
            (2, 1) => Ok(GrowthCondition::Silver),
            (m, 1) => Ok(GrowthCondition::Precious(m)),
            (1, l) => Ok(GrowthCondition::Metal(l)),
            (m, l) => Err(Error::UnsupportedRule { m, l }),
        }
    }

    pub fn check(&self, x: [f64; 3]) -> bool {
        match *self {
            GrowthCondition::Golden => check_golden(x[0], x[1], x[2]),
            GrowthCondition::Silver => check_silver(x[0], x[1], x[2]),
            GrowthCondition::Precious(m) => check_precious(m, x[0], x[1], x[2]),
            GrowthCondition::Metal(l) => check_metal(l, x[0], x[1], x[2]),
        }
    }
}

/// Evidence that a frequency lies in `S_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbgCertificate {
    pub rule: TilingRule,
    /// Order at which the growth condition holds.
    pub order: usize,
    /// Order of the super band gap being certified.
    pub requested_order: usize,
    pub condition: GrowthCondition,
    /// `(x_order, x_{order+1}, x_{order+2})`.
    pub seed_values: [f64; 3],
}

/// Searches a trace sequence for evidence of membership in `S_n`. The growth
/// condition is tried at `n` first, then at lower orders, then up to
/// [`MEMBERSHIP_LOOKAHEAD`] orders higher (with `|x_k| > 2` checked directly
/// between `n` and the certifying order).
pub fn certify_sequence(seq: &TraceSequence, condition: GrowthCondition, n: usize) -> Option<SbgCertificate> {
    let try_at = |k: usize| -> Option<SbgCertificate> {
        if k + 2 > seq.n_max() || seq.is_escaped(k + 2) {
            return None;
        }
        let x = [seq.xs[k], seq.xs[k + 1], seq.xs[k + 2]];
        condition.check(x).then_some(SbgCertificate {
            rule: seq.rule,
            order: k,
            requested_order: n,
            condition,
            seed_values: x,
        })
    };
    if let Some(c) = (0..=n).rev().find_map(try_at) {
        return Some(c);
    }
    for k in n + 1..=n + MEMBERSHIP_LOOKAHEAD {
        if !(seq.is_escaped(k - 1) || seq.xs[k - 1].abs() > 2.0) {
            return None;
        }
        if let Some(c) = try_at(k) {
            return Some(c);
        }
    }
    None
}

pub fn membership(spec: &SystemSpec, rule: TilingRule, omega: f64, n: usize) -> Result<Option<SbgCertificate>> {
    let condition = GrowthCondition::for_rule(rule)?;
    let seq = trace_sequence(spec, rule, omega, n + MEMBERSHIP_LOOKAHEAD + 2)?;
    Ok(certify_sequence(&seq, condition, n))
}

/// `H_n(ω) = |x_n x_{n+1}|`; infinite once the traces escape.
pub fn estimator_h(spec: &SystemSpec, rule: TilingRule, omega: f64, n: usize) -> Result<f64> {
    let seq = trace_sequence(spec, rule, omega, n + 1)?;
    if seq.is_escaped(n + 1) {
        return Ok(f64::INFINITY);
    }
    Ok((seq.xs[n] * seq.xs[n + 1]).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Certified,
    Uncertified,
    /// The grid point and its half-step nudge both hit a beam pole.
    Pole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSample {
    /// Frequency actually evaluated (nudged by half a step near beam poles).
    pub omega: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapInterval {
    pub omega_lo: f64,
    pub omega_hi: f64,
    /// Certificate at the midpoint, or at the first certified grid point of
    /// the run when the midpoint itself is not certified.
    pub certificate: SbgCertificate,
    pub certificate_omega: f64,
}

impl GapInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.omega_lo + self.omega_hi)
    }

    pub fn contains(&self, omega: f64) -> bool {
        self.omega_lo <= omega && omega <= self.omega_hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub rule: TilingRule,
    pub order: usize,
    pub grid: FrequencyGrid,
    pub intervals: Vec<GapInterval>,
    pub samples: Vec<GridSample>,
}

impl GapReport {
    pub fn pole_count(&self) -> usize {
        self.samples.iter().filter(|s| s.status == PointStatus::Pole).count()
    }

    pub fn contains(&self, omega: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(omega))
    }
}

/// Evaluates `f` at a grid point, retrying half a step higher at a beam pole.
pub(crate) fn eval_with_nudge<T>(omega: f64, step: f64, f: impl Fn(f64) -> Result<T>) -> Result<Option<(f64, T)>> {
    match f(omega) {
        Ok(v) => Ok(Some((omega, v))),
        Err(Error::BeamPole { .. }) => match f(omega + 0.5 * step) {
            Ok(v) => Ok(Some((omega + 0.5 * step, v))),
            Err(Error::BeamPole { .. }) => Ok(None),
            Err(e) => Err(e),
        },
        Err(e) => Err(e),
    }
}

pub fn sweep(spec: &SystemSpec, rule: TilingRule, grid: &FrequencyGrid, n: usize) -> Result<GapReport> {
    grid.validate()?;
    GrowthCondition::for_rule(rule)?;
    let step = grid.step();
    let evaluated: Vec<(GridSample, Option<SbgCertificate>)> = grid
        .omegas()
        .into_par_iter()
        .map(|w| {
            Ok(match eval_with_nudge(w, step, |w| membership(spec, rule, w, n))? {
                Some((w, Some(c))) => (
                    GridSample {
                        omega: w,
                        status: PointStatus::Certified,
                    },
                    Some(c),
                ),
                Some((w, None)) => (
                    GridSample {
                        omega: w,
                        status: PointStatus::Uncertified,
                    },
                    None,
                ),
                None => (
                    GridSample {
                        omega: w,
                        status: PointStatus::Pole,
                    },
                    None,
                ),
            })
        })
        .collect::<Result<_>>()?;

    let certified = |w: f64| matches!(membership(spec, rule, w, n), Ok(Some(_)));
    let mask: Vec<bool> = evaluated
        .iter()
        .map(|(s, _)| s.status == PointStatus::Certified)
        .collect();
    let mut intervals = Vec::new();
    for (i, j) in runs(&mask) {
        let lo_grid = evaluated[i].0.omega;
        let hi_grid = evaluated[j].0.omega;
        let omega_lo = if i == 0 {
            lo_grid
        } else {
            bisect_edge(evaluated[i - 1].0.omega, lo_grid, SBG_EDGE_REL_TOL, certified)
        };
        let omega_hi = if j + 1 == evaluated.len() {
            hi_grid
        } else {
            bisect_edge(evaluated[j + 1].0.omega, hi_grid, SBG_EDGE_REL_TOL, certified)
        };
        let mid = 0.5 * (omega_lo + omega_hi);
        let (certificate, certificate_omega) = match membership(spec, rule, mid, n) {
            Ok(Some(c)) => (c, mid),
            _ => (
                evaluated[i]
                    .1
                    .clone()
                    .expect("certified grid point carries a certificate"),
                lo_grid,
            ),
        };
        intervals.push(GapInterval {
            omega_lo,
            omega_hi,
            certificate,
            certificate_omega,
        });
    }
    Ok(GapReport {
        rule,
        order: n,
        grid: *grid,
        intervals,
        samples: evaluated.into_iter().map(|(s, _)| s).collect(),
    })
}

/// Located onset of the high-frequency super band gap of a mass-spring chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighFreqThreshold {
    /// Numerically located ω* above which sampled frequencies are certified in `S_0`.
    pub omega_star: f64,
    /// Where the upward search started: `2 max(2 sqrt(k_X / m_X))`.
    pub search_start: f64,
    /// Upper end of the first window in which every sample certified.
    pub certified_window_end: f64,
    /// Largest single-element cutoff `max(2 sqrt(k_X / m_X))`.
    pub max_cutoff: f64,
    /// Smallest single-element cutoff.
    pub min_cutoff: f64,
    /// Leading-order scale from the high-frequency asymptotics:
    /// `min(m) ω² / max(k) > 2`.
    pub asymptotic_bound: f64,
}

const WINDOW_SAMPLES: usize = 50;
const MAX_DOUBLINGS: usize = 60;
const DENSE_SCAN: usize = 4000;

pub fn highfreq_threshold_mass_spring(params: &MassSpringParams, rule: TilingRule) -> Result<HighFreqThreshold> {
    GrowthCondition::for_rule(rule)?;
    let spec = SystemSpec::MassSpring(*params);
    let certified = |w: f64| matches!(membership(&spec, rule, w, 0), Ok(Some(_)));
    let (ca, cb) = (params.cutoff(Letter::A), params.cutoff(Letter::B));
    let max_cutoff = ca.max(cb);
    let min_cutoff = ca.min(cb);
    let search_start = 2.0 * max_cutoff;

    let mut window = search_start;
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        let all = (0..WINDOW_SAMPLES).all(|j| certified(window * (1.0 + j as f64 / (WINDOW_SAMPLES - 1) as f64)));
        if all {
            found = true;
            break;
        }
        window *= 2.0;
    }
    if !found {
        return Err(Error::InvalidParameter(format!(
            "no certified high-frequency window found up to {window} rad/s for rule {rule}"
        )));
    }

    // nothing at or below the larger cutoff can be certified, so the onset lies in (max_cutoff, window]
    let step = (window - max_cutoff) / DENSE_SCAN as f64;
    let samples: Vec<f64> = (0..=DENSE_SCAN).map(|i| max_cutoff + i as f64 * step).collect();
    let flags: Vec<bool> = samples.par_iter().map(|&w| certified(w)).collect();
    let last_fail = flags.iter().rposition(|&ok| !ok).unwrap_or(0);
    let omega_star = if last_fail + 1 >= samples.len() {
        window
    } else {
        bisect_edge(samples[last_fail], samples[last_fail + 1], 1e-12, certified)
    };

    let min_mass = params.mass_a.min(params.mass_b);
    let max_k = params.stiffness_a.max(params.stiffness_b);
    Ok(HighFreqThreshold {
        omega_star,
        search_start,
        certified_window_end: 2.0 * window,
        max_cutoff,
        min_cutoff,
        asymptotic_bound: (2.0 * max_k / min_mass).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowFreqRow {
    pub n: usize,
    pub fib: u64,
    pub class: SigmaClass,
    pub expected: SigmaClass,
    pub trace: f64,
    /// `2^(F_n + 1)`, capped at the saturation level.
    pub bound: f64,
    pub saturated: bool,
    pub parity_ok: bool,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowFreqCheck {
    pub omega: f64,
    pub passed: bool,
    pub rows: Vec<LowFreqRow>,
    pub diagnostic: Option<String>,
}

/// Checks the small-frequency structure of a supported beam: the cell matrix
/// `T_n` must lie in Σ- when `F_n` is odd and in Σ+ when it is even, with
/// `|tr T_n| >= 2^(F_n + 1)` until the entries saturate.
pub fn lowfreq_beam_check(params: &BeamParams, rule: TilingRule, omega: f64, n_max: usize) -> Result<LowFreqCheck> {
    if omega.is_nan() || omega <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    let spec = SystemSpec::Beam(*params);
    let (t_a, t_b) = spec.element_pair(omega)?;
    if sigma_classify(&t_a) != SigmaClass::SigmaMinus || sigma_classify(&t_b) != SigmaClass::SigmaMinus {
        return Ok(LowFreqCheck {
            omega,
            passed: false,
            rows: Vec::new(),
            diagnostic: Some("outside small-omega regime: element matrices are not both in Sigma-".into()),
        });
    }

    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let fib = rule.fib_number(n)?;
        let t_n = cell_matrix_with_cap(&spec, rule, omega, n, DEFAULT_WORD_CAP)?;
        let expected = if fib % 2 == 1 {
            SigmaClass::SigmaMinus
        } else {
            SigmaClass::SigmaPlus
        };
        let saturated = t_n.is_escaped();
        let class = sigma_classify(&t_n);
        let exponent = fib.saturating_add(1).min(2000) as i32;
        let bound = 2f64.powi(exponent).min(SATURATION);
        let trace = t_n.trace();
        rows.push(LowFreqRow {
            n,
            fib,
            class,
            expected,
            trace,
            bound,
            saturated,
            parity_ok: saturated || class == expected,
            bound_ok: saturated || trace.abs() >= bound,
        });
    }
    let passed = rows.iter().all(|r| r.parity_ok && r.bound_ok);
    let diagnostic = rows.iter().find(|r| !(r.parity_ok && r.bound_ok)).map(|r| {
        if !r.parity_ok {
            format!("n = {}: class {:?}, expected {:?}", r.n, r.class, r.expected)
        } else {
            format!(
                "n = {}: |tr T_n| = {} below 2^(F_n+1) = {}",
                r.n,
                r.trace.abs(),
                r.bound
            )
        }
    });
    Ok(LowFreqCheck {
        omega,
        passed,
        rows,
        diagnostic,
    })
}
