//! Self-checks runnable from the command line. Each suite samples with a
//! seeded generator and reports counts rather than panicking.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{cheb_closed_form, cheb_eval, Mat2};
use crate::dispersion::{bloch_point, passbands};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::superbandgap::membership;
use crate::systems::{presets, RodParams, SystemSpec};
use crate::tiling::TilingRule;
use crate::tracemap::{cell_matrix, trace_sequence};
use crate::transmission::{global_transfer, periodic_sample, transmission_coefficient, Stack};

pub const RULES: [TilingRule; 5] = [
    TilingRule::golden(),
    TilingRule::silver(),
    TilingRule::bronze(),
    TilingRule::copper(),
    TilingRule::nickel(),
];

/// The three reference systems with the upper end of their natural frequency range.
pub fn reference_systems() -> [(SystemSpec, f64); 3] {
    [
        (presets::mass_spring(), 35.0),
        (presets::canonical_rod(), 7.6e4),
        (presets::beam(), 60.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Chebyshev,
    RecursionOracle,
    Soundness,
    Dispersion,
    Transmission,
    All,
}

impl Suite {
    const EACH: [Suite; 5] = [
        Suite::Chebyshev,
        Suite::RecursionOracle,
        Suite::Soundness,
        Suite::Dispersion,
        Suite::Transmission,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Chebyshev => "chebyshev",
            Suite::RecursionOracle => "recursion-oracle",
            Suite::Soundness => "soundness",
            Suite::Dispersion => "dispersion",
            Suite::Transmission => "transmission",
            Suite::All => "all",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chebyshev" => Ok(Suite::Chebyshev),
            "recursion-oracle" => Ok(Suite::RecursionOracle),
            "soundness" => Ok(Suite::Soundness),
            "dispersion" => Ok(Suite::Dispersion),
            "transmission" => Ok(Suite::Transmission),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub checked: u64,
    pub failures: u64,
    /// Largest error seen, for checks with a numeric tolerance.
    pub max_error: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, tolerance: Option<f64>) -> Self {
        Check {
            name: name.into(),
            checked: 0,
            failures: 0,
            max_error: None,
            tolerance,
            passed: true,
        }
    }

    fn record(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn record_error(&mut self, err: f64) {
        self.max_error = Some(self.max_error.map_or(err, |e: f64| e.max(err)));
        let ok = self.tolerance.is_none_or(|t| err < t);
        self.record(ok);
    }

    fn finish(mut self) -> Self {
        self.passed = self.failures == 0 && self.checked > 0;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub all_passed: bool,
}

pub fn validate(suite: Suite, seed: u64) -> Result<ValidationReport> {
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    let mut reports = Vec::new();
    for (i, s) in suites.into_iter().enumerate() {
        // every suite draws from its own stream so results do not depend on which others ran
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let checks = match s {
            Suite::Chebyshev => chebyshev_suite(&mut rng),
            Suite::RecursionOracle => recursion_suite(&mut rng)?,
            Suite::Soundness => soundness_suite(&mut rng)?,
            Suite::Dispersion => dispersion_suite(&mut rng)?,
            Suite::Transmission => transmission_suite(&mut rng)?,
            Suite::All => unreachable!(),
        };
        let checks: Vec<Check> = checks.into_iter().map(Check::finish).collect();
        let passed = checks.iter().all(|c| c.passed);
        reports.push(SuiteReport {
            suite: s,
            checks,
            passed,
        });
    }
    let all_passed = reports.iter().all(|r| r.passed);
    Ok(ValidationReport {
        seed,
        suites: reports,
        all_passed,
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn random_omega(spec: &SystemSpec, w_max: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    loop {
        let w = rng.gen_range(1e-3 * w_max..w_max);
        match spec.element_pair(w) {
            Ok(_) => return Ok(w),
            Err(Error::BeamPole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

fn chebyshev_suite(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut at_two = Check::new("d_k(2) = k", None);
    for k in 0..=50 {
        at_two.record(cheb_eval(k, 2.0) == k as f64);
    }

    let mut closed = Check::new("closed form vs recursion", Some(1e-10));
    for _ in 0..2000 {
        let k = rng.gen_range(0..=30);
        let x = rng.gen_range(2.0001..=10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        if let Some(c) = cheb_closed_form(k, x) {
            let r = cheb_eval(k, x);
            closed.record_error((c - r).abs() / r.abs().max(f64::MIN_POSITIVE));
        }
    }

    let mut sandwich = Check::new("|d_(k+1)| <= |x d_k| <= 2 |d_(k+1)|", None);
    for _ in 0..10_000 {
        let k = rng.gen_range(1..=40);
        let x = rng.gen_range(2.0..=10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (dk, dk1) = (cheb_eval(k, x), cheb_eval(k + 1, x));
        sandwich.record(dk1.abs() <= (x * dk).abs() && (x * dk).abs() <= 2.0 * dk1.abs());
    }

    let mut parity = Check::new("d_k(-x) = (-1)^(k+1) d_k(x)", None);
    for _ in 0..2000 {
        let k = rng.gen_range(0..=40);
        let x = rng.gen_range(-10.0..=10.0);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        parity.record(cheb_eval(k, -x) == sign * cheb_eval(k, x));
    }
    vec![at_two, closed, sandwich, parity]
}

fn recursion_suite(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut traces = Check::new("trace recursion vs explicit product", Some(1e-8));
    let mut det = Check::new("det of cell matrices", Some(1e-8));
    for (spec, w_max) in reference_systems() {
        for rule in RULES {
            for _ in 0..40 {
                let w = random_omega(&spec, w_max, rng)?;
                let seq = trace_sequence(&spec, rule, w, 10)?;
                for n in 0..=10 {
                    if seq.is_escaped(n) {
                        break;
                    }
                    let t = cell_matrix(&spec, rule, w, n)?;
                    if t.is_escaped() {
                        break;
                    }
                    traces.record_error(rel_err(seq.xs[n], t.trace()));
                    det.record_error(t.unimodularity_error());
                }
            }
        }
    }
    Ok(vec![traces, det])
}

fn soundness_suite(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut sound = Check::new("certified S_N: |x_n| > 2 for N <= n <= N + 20", None);
    let mut nested = Check::new("certified S_N implies certified S_(N+1)", None);
    for (spec, w_max) in reference_systems() {
        for rule in RULES {
            for _ in 0..150 {
                let w = random_omega(&spec, w_max, rng)?;
                let n = rng.gen_range(0..=8);
                if membership(&spec, rule, w, n)?.is_none() {
                    continue;
                }
                let seq = trace_sequence(&spec, rule, w, n + 20)?;
                sound.record((n..=n + 20).all(|k| seq.is_escaped(k) || seq.xs[k].abs() > 2.0));
                nested.record(membership(&spec, rule, w, n + 1)?.is_some());
            }
        }
    }
    Ok(vec![sound, nested])
}

fn dispersion_suite(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut edges = Check::new("pass-band edges satisfy |x_n| = 2", Some(1e-5));
    let mut bloch = Check::new("cos(k L) = x_n / 2 inside bands", Some(1e-12));
    for (spec, w_max) in reference_systems() {
        let grid = FrequencyGrid::new(0.0, w_max, 600)?;
        for rule in [TilingRule::golden(), TilingRule::silver(), TilingRule::copper()] {
            let n = rng.gen_range(2..=6);
            for band in passbands(&spec, rule, n, &grid)? {
                for w in [band.omega_lo, band.omega_hi] {
                    if w == grid.omega_min || w == grid.omega_max {
                        continue;
                    }
                    let x = trace_sequence(&spec, rule, w, n)?.xs[n];
                    edges.record_error((x.abs() - 2.0).abs());
                }
                let mid = 0.5 * (band.omega_lo + band.omega_hi);
                if let Ok(p) = bloch_point(&spec, rule, n, mid) {
                    if p.propagating {
                        bloch.record_error((p.k_l.cos() - p.trace_half).abs());
                    }
                }
            }
        }
    }
    Ok(vec![edges, bloch])
}

fn transmission_suite(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut det = Check::new("det of global transfer", Some(1e-8));
    let mut power = Check::new("[F_n, F_n] equals T_n^2", Some(1e-9));
    let mut reversal = Check::new("reversed stack swaps diagonal entries", Some(1e-9));
    let mut homogeneous = Check::new("homogeneous rod has |T_c| >= 1", None);
    for (spec, w_max) in reference_systems() {
        let qc = Stack::quasicrystal(TilingRule::golden(), 0, 6, spec)?;
        let rev = qc.reversed()?;
        for _ in 0..100 {
            let w = random_omega(&spec, w_max, rng)?;
            let tg = global_transfer(&qc, w)?;
            det.record_error(tg.unimodularity_error());
            // needs equal diagonal entries in the element matrices
            if !matches!(spec, SystemSpec::MassSpring(_)) {
                let tr = global_transfer(&rev, w)?;
                let scale = tg.a11.abs().max(tg.a22.abs()).max(1.0);
                reversal.record_error(((tr.a22 - tg.a11).abs()).max((tr.a11 - tg.a22).abs()) / scale);
            }

            let rule = RULES[rng.gen_range(0..RULES.len())];
            let n = rng.gen_range(0..=5);
            let pair = global_transfer(&periodic_sample(rule, n, 2, spec)?, w)?;
            let t: Mat2 = cell_matrix(&spec, rule, w, n)?;
            power.record_error(pair.max_rel_diff(&t.pow(2)));
        }
    }
    let SystemSpec::Rod(p) = presets::canonical_rod() else {
        unreachable!()
    };
    let uniform = SystemSpec::Rod(RodParams { area_a: p.area_b, ..p });
    let stack = Stack::quasicrystal(TilingRule::golden(), 0, 6, uniform)?;
    for _ in 0..200 {
        let w = rng.gen_range(1.0..2e5);
        match transmission_coefficient(&stack, w) {
            Ok(tc) => homogeneous.record(tc.abs() >= 1.0 - 1e-9),
            Err(Error::DegenerateEntry { .. }) => homogeneous.record(false),
            Err(e) => return Err(e),
        }
    }
    Ok(vec![det, power, reversal, homogeneous])
}
