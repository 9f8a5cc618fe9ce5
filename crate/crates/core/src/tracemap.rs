//! Trace maps: the sequences `x_n = tr(T_n)` and `t_n = tr(T_{n-2} T_{n-1})`
//! evolved without forming matrix products, plus the explicit-product oracle.

use serde::Serialize;

use crate::algebra::{cheb_eval, Mat2};
use crate::error::Result;
use crate::systems::SystemSpec;
use crate::tiling::{Letter, TilingRule, TilingWord};

/// Once `|x_n|` exceeds this, the sequence is frozen and marked escaped.
pub const ESCAPE_THRESHOLD: f64 = 1e100;

/// Word length limit for the explicit-product oracle.
pub const DIRECT_PRODUCT_CAP: u64 = 100_000;

/// Initial values `x_0 = tr T^B`, `x_1 = tr T^A`, `x_2 = tr T_2`, `t_2 = tr(T_0 T_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSeed {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub t2: f64,
}

impl TraceSeed {
    pub fn from_matrices(rule: TilingRule, t_a: Mat2, t_b: Mat2) -> Self {
        let t2_cell = t_b.pow(u64::from(rule.l())) * t_a.pow(u64::from(rule.m()));
        TraceSeed {
            x0: t_b.trace(),
            x1: t_a.trace(),
            x2: t2_cell.trace(),
            t2: (t_b * t_a).trace(),
        }
    }
}

pub fn seed_from_system(spec: &SystemSpec, rule: TilingRule, omega: f64) -> Result<TraceSeed> {
    let (t_a, t_b) = spec.element_pair(omega)?;
    Ok(TraceSeed::from_matrices(rule, t_a, t_b))
}

/// Golden mean map: `x_{n+1} = x_n x_{n-1} - x_{n-2}`.
pub fn step_golden(x_prev2: f64, x_prev1: f64, x_cur: f64) -> f64 {
    x_cur * x_prev1 - x_prev2
}

/// Silver mean map. Returns `(x_{n+1}, t_{n+1})`; `t` is updated first.
pub fn step_silver(x_prev1: f64, x_cur: f64, t_cur: f64) -> (f64, f64) {
    let t_next = x_cur * x_prev1 - t_cur;
    let x_next = x_cur * t_next - x_prev1;
    (x_next, t_next)
}

/// Precious mean map (`l = 1`, `m >= 2`). Returns `(x_{n+1}, t_{n+1})`.
pub fn step_precious(m: u32, x_prev1: f64, x_cur: f64, t_cur: f64, x_prev2: f64) -> (f64, f64) {
    let m = m as usize;
    let t_next = cheb_eval(m + 1, x_prev1) * t_cur - cheb_eval(m, x_prev1) * x_prev2;
    let x_next = cheb_eval(m, x_cur) * t_next - cheb_eval(m - 1, x_cur) * x_prev1;
    (x_next, t_next)
}

/// Metal mean map (`m = 1`, any `l`), with `t` eliminated.
pub fn step_metal(l: u32, x_prev2: f64, x_prev1: f64, x_cur: f64) -> f64 {
    let l = l as usize;
    let bracket = x_cur * x_prev1 - cheb_eval(l + 1, x_prev2) + cheb_eval(l - 1, x_prev2);
    cheb_eval(l, x_prev1) * bracket - x_cur * cheb_eval(l - 1, x_prev1)
}

/// The coupled map for arbitrary `(m, l)`. Returns `(x_{n+1}, t_{n+1})`.
pub fn step_general(rule: TilingRule, x_prev2: f64, x_prev1: f64, x_cur: f64, t_cur: f64) -> (f64, f64) {
    let (m, l) = (rule.m() as usize, rule.l() as usize);
    let d = cheb_eval;
    let t_next = d(m + 1, x_prev1) * (d(l, x_prev2) * t_cur - d(l - 1, x_prev2) * x_prev1)
        - d(m, x_prev1) * (d(l + 1, x_prev2) - d(l - 1, x_prev2));
    let x_next = d(m, x_cur) * (d(l, x_prev1) * t_next - d(l - 1, x_prev1) * x_cur)
        - d(m - 1, x_cur) * (d(l + 1, x_prev1) - d(l - 1, x_prev1));
    (x_next, t_next)
}

/// Magnitude of the largest product formed inside [`step_general`]; rounding
/// error of any trace-map step is proportional to it.
pub fn step_general_scale(rule: TilingRule, x_prev2: f64, x_prev1: f64, x_cur: f64, t_cur: f64) -> f64 {
    let (m, l) = (rule.m() as usize, rule.l() as usize);
    let d = cheb_eval;
    let (_, t_next) = step_general(rule, x_prev2, x_prev1, x_cur, t_cur);
    [
        d(m + 1, x_prev1) * d(l, x_prev2) * t_cur,
        d(m + 1, x_prev1) * d(l - 1, x_prev2) * x_prev1,
        d(m, x_prev1) * d(l + 1, x_prev2),
        d(m, x_prev1) * d(l - 1, x_prev2),
        d(m, x_cur) * d(l, x_prev1) * t_next,
        d(m, x_cur) * d(l - 1, x_prev1) * x_cur,
        d(m - 1, x_cur) * d(l + 1, x_prev1),
        d(m - 1, x_cur) * d(l - 1, x_prev1),
    ]
    .iter()
    .fold(1.0, |acc: f64, v| acc.max(v.abs()))
}

/// Which closed recursion evolves the traces of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceRecursion {
    Golden,
    Silver,
    Precious(u32),
    Metal(u32),
    General(TilingRule),
}

impl TraceRecursion {
    pub fn for_rule(rule: TilingRule) -> Self {
        match (rule.m(), rule.l()) {
            (1, 1) => TraceRecursion::Golden,
            (2, 1) => TraceRecursion::Silver,
            (m, 1) => TraceRecursion::Precious(m),
            (1, l) => TraceRecursion::Metal(l),
            _ => TraceRecursion::General(rule),
        }
    }

    /// Whether the auxiliary `t_n` has to be carried.
    pub fn carries_t(&self) -> bool {
        !matches!(self, TraceRecursion::Golden | TraceRecursion::Metal(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSequence {
    pub rule: TilingRule,
    /// `x_0 ..= x_{n_max}`; entries from `escaped_at` on are frozen.
    pub xs: Vec<f64>,
    /// `t_2 ..= t_{n_max}` when the recursion carries `t`, otherwise empty.
    pub ts: Vec<f64>,
    pub escaped_at: Option<usize>,
}

impl TraceSequence {
    /// Runs the rule's recursion from a seed up to `n_max`.
    pub fn from_seed(rule: TilingRule, seed: TraceSeed, n_max: usize) -> Self {
        let recursion = TraceRecursion::for_rule(rule);
        let mut xs = vec![seed.x0, seed.x1, seed.x2];
        let mut ts = if recursion.carries_t() {
            vec![seed.t2]
        } else {
            Vec::new()
        };
        let mut escaped_at = xs.iter().position(|&x| escaped(x));

        if escaped_at.is_none() {
            let mut t = seed.t2;
            for n in 2..n_max {
                let (a, b, c) = (xs[n - 2], xs[n - 1], xs[n]);
                let x_next = match recursion {
                    TraceRecursion::Golden => step_golden(a, b, c),
                    TraceRecursion::Metal(l) => step_metal(l, a, b, c),
                    TraceRecursion::Silver => {
                        let (x, t_next) = step_silver(b, c, t);
                        t = t_next;
                        x
                    }
                    TraceRecursion::Precious(m) => {
                        let (x, t_next) = step_precious(m, b, c, t, a);
                        t = t_next;
                        x
                    }
                    TraceRecursion::General(r) => {
                        let (x, t_next) = step_general(r, a, b, c, t);
                        t = t_next;
                        x
                    }
                };
                xs.push(x_next);
                if recursion.carries_t() {
                    ts.push(t);
                }
                if escaped(x_next) {
                    escaped_at = Some(n + 1);
                    break;
                }
            }
        }

        // freeze whatever is left
        let target = n_max.max(2) + 1;
        if let Some(&last) = xs.last() {
            xs.resize(target, last);
        }
        if recursion.carries_t() {
            if let Some(&last) = ts.last() {
                ts.resize(target - 2, last);
            }
        }
        xs.truncate(n_max + 1);
        ts.truncate((n_max + 1).saturating_sub(2));
        TraceSequence {
            rule,
            xs,
            ts,
            escaped_at,
        }
    }

    pub fn n_max(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn x(&self, n: usize) -> Option<f64> {
        self.xs.get(n).copied()
    }

    /// `t_n` for `n >= 2` when carried.
    pub fn t(&self, n: usize) -> Option<f64> {
        n.checked_sub(2).and_then(|i| self.ts.get(i)).copied()
    }

    /// True when `x_n` is a frozen (escaped) value rather than a computed one.
    pub fn is_escaped(&self, n: usize) -> bool {
        self.escaped_at.is_some_and(|e| n >= e)
    }
}

fn escaped(x: f64) -> bool {
    !x.is_finite() || x.abs() > ESCAPE_THRESHOLD
}

pub fn trace_sequence(spec: &SystemSpec, rule: TilingRule, omega: f64, n_max: usize) -> Result<TraceSequence> {
    let seed = seed_from_system(spec, rule, omega)?;
    Ok(TraceSequence::from_seed(rule, seed, n_max))
}

/// Ordered product of element matrices along a word (rightmost letter applied last).
pub fn word_matrix(word: &TilingWord, t_a: Mat2, t_b: Mat2) -> Mat2 {
    word.letters.iter().fold(Mat2::IDENTITY, |acc, c| match c {
        Letter::A => t_a * acc,
        Letter::B => t_b * acc,
    })
}

/// Explicit transfer matrix of `F_n`, limited to words of at most `cap` letters.
pub fn cell_matrix_with_cap(spec: &SystemSpec, rule: TilingRule, omega: f64, n: usize, cap: u64) -> Result<Mat2> {
    let word = rule.word_with_cap(n, cap)?;
    let (t_a, t_b) = spec.element_pair(omega)?;
    Ok(word_matrix(&word, t_a, t_b))
}

pub fn cell_matrix(spec: &SystemSpec, rule: TilingRule, omega: f64, n: usize) -> Result<Mat2> {
    cell_matrix_with_cap(spec, rule, omega, n, DIRECT_PRODUCT_CAP)
}

/// Oracle: trace of the explicit product over `word(rule, n)`.
pub fn direct_trace(spec: &SystemSpec, rule: TilingRule, omega: f64, n: usize) -> Result<f64> {
    Ok(cell_matrix(spec, rule, omega, n)?.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::presets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RULES: [TilingRule; 5] = [
        TilingRule::golden(),
        TilingRule::silver(),
        TilingRule::bronze(),
        TilingRule::copper(),
        TilingRule::nickel(),
    ];

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    /// A random point on the trace-map manifold: `x_n` is made consistent with
    /// `(x_{n-2}, x_{n-1}, t_n)` through the rule's own x-equation.
    fn consistent_state(rule: TilingRule, rng: &mut impl Rng) -> (f64, f64, f64, f64) {
        let a = rng.gen_range(-10.0..10.0);
        let b = rng.gen_range(-10.0..10.0);
        let t = rng.gen_range(-10.0..10.0);
        let (m, l) = (rule.m() as usize, rule.l() as usize);
        let d = cheb_eval;
        let x = d(m, b) * (d(l, a) * t - d(l - 1, a) * b) - d(m - 1, b) * (d(l + 1, a) - d(l - 1, a));
        (a, b, x, t)
    }

    #[test]
    fn golden_step_examples() {
        assert_eq!(step_golden(3.0, 3.0, 3.0), 6.0);
        assert_eq!(step_golden(2.0, 2.0, 2.0), 2.0);
        assert_eq!(step_golden(0.0, 0.0, 5.5), 0.0);
    }

    #[test]
    fn silver_step_examples() {
        assert_eq!(step_silver(2.0, 2.0, 2.0), (2.0, 2.0));
        let (x, t) = step_silver(0.0, 3.0, 1.5);
        assert_eq!(t, -1.5);
        assert_eq!(x, 3.0 * -1.5);
    }

    #[test]
    fn precious_step_zero_inputs() {
        for m in [2, 4, 6] {
            assert_eq!(step_precious(m, 0.0, 0.0, 0.0, 0.0).0, 0.0);
        }
    }

    #[test]
    fn metal_band_edge_fixed_point() {
        for l in 1..8 {
            assert!((step_metal(l, 2.0, 2.0, 2.0) - 2.0).abs() < 1e-12);
        }
        assert_eq!(step_metal(1, 1.5, -0.5, 3.0), step_golden(1.5, -0.5, 3.0));
    }

    #[test]
    fn general_reduces_to_specialised_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let close = |rule, (a, b, c, t): (f64, f64, f64, f64), x: f64, y: f64| {
            (x - y).abs() <= 1e-12 * step_general_scale(rule, a, b, c, t)
        };
        for _ in 0..1000 {
            let g = TilingRule::golden();
            let s = consistent_state(g, &mut rng);
            let (x, _) = step_general(g, s.0, s.1, s.2, s.3);
            assert!(close(g, s, x, step_golden(s.0, s.1, s.2)));

            let sv = TilingRule::silver();
            let s = consistent_state(sv, &mut rng);
            let gen = step_general(sv, s.0, s.1, s.2, s.3);
            assert_eq!(gen, step_precious(2, s.1, s.2, s.3, s.0));
            let (x, t) = step_silver(s.1, s.2, s.3);
            assert!(close(sv, s, gen.0, x));
            assert!(close(sv, s, gen.1, t));

            for l in [2, 3] {
                let rule = TilingRule::new(1, l).unwrap();
                let s = consistent_state(rule, &mut rng);
                let (x, _) = step_general(rule, s.0, s.1, s.2, s.3);
                assert!(close(rule, s, x, step_metal(l, s.0, s.1, s.2)));
            }
        }
    }

    #[test]
    fn static_mass_spring_is_fixed_point() {
        let spec = presets::mass_spring();
        for rule in RULES {
            let seed = seed_from_system(&spec, rule, 0.0).unwrap();
            assert_eq!((seed.x0, seed.x1, seed.x2), (2.0, 2.0, 2.0));
            let seq = trace_sequence(&spec, rule, 0.0, 12).unwrap();
            assert!(seq.xs.iter().all(|&x| (x - 2.0).abs() < 1e-9), "{rule}: {:?}", seq.xs);
            assert_eq!(seq.escaped_at, None);
        }
    }

    #[test]
    fn canonical_rod_seeds() {
        let spec = presets::canonical_rod();
        let SystemSpec::Rod(p) = spec else { unreachable!() };
        for &w in &[1e3, 2.5e4, 6.1e4] {
            let seed = seed_from_system(&spec, TilingRule::golden(), w).unwrap();
            let th = p.phase(Letter::A, w);
            let ratio = p.area_a / p.area_b + p.area_b / p.area_a;
            assert!((seed.x0 - 2.0 * th.cos()).abs() < 1e-12);
            assert!((seed.x1 - 2.0 * th.cos()).abs() < 1e-12);
            // the cross terms of tr(T^B T^A) enter with a minus sign
            let x2 = 2.0 * th.cos().powi(2) - ratio * th.sin().powi(2);
            assert!((seed.x2 - x2).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_trace_base_cells() {
        let spec = presets::mass_spring();
        let w = 13.0;
        let (t_a, t_b) = spec.element_pair(w).unwrap();
        let g = TilingRule::golden();
        assert_eq!(direct_trace(&spec, g, w, 0).unwrap(), t_b.trace());
        assert_eq!(direct_trace(&spec, g, w, 1).unwrap(), t_a.trace());
        assert_eq!(direct_trace(&spec, g, w, 2).unwrap(), (t_b * t_a).trace());
        let seed = seed_from_system(&spec, g, w).unwrap();
        assert_eq!(seed.t2, direct_trace(&spec, g, w, 2).unwrap());
    }

    #[test]
    fn cell_matrices_obey_substitution() {
        let spec = presets::beam();
        let w = 7.7;
        for rule in RULES {
            let (m, l) = (u64::from(rule.m()), u64::from(rule.l()));
            for n in 1..6 {
                let next = cell_matrix(&spec, rule, w, n + 1).unwrap();
                let prev = cell_matrix(&spec, rule, w, n - 1).unwrap();
                let cur = cell_matrix(&spec, rule, w, n).unwrap();
                let expected = prev.pow(l) * cur.pow(m);
                assert!(next.max_rel_diff(&expected) < 1e-9);
            }
        }
    }

    #[test]
    fn recursion_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let systems = [
            (presets::mass_spring(), 35.0),
            (presets::canonical_rod(), 7.6e4),
            (presets::beam(), 60.0),
        ];
        for (spec, w_max) in systems {
            for rule in RULES {
                for _ in 0..20 {
                    let w = rng.gen_range(0.01 * w_max..w_max);
                    let Ok(seq) = trace_sequence(&spec, rule, w, 8) else {
                        continue;
                    };
                    for n in 0..=8 {
                        if seq.is_escaped(n) {
                            break;
                        }
                        let d = direct_trace(&spec, rule, w, n).unwrap();
                        assert!(
                            rel_err(seq.xs[n], d) < 1e-8,
                            "{} {rule} w={w} n={n}: {} vs {d}",
                            spec.kind_name(),
                            seq.xs[n]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn general_rule_runs_for_unsupported_detectors() {
        let spec = presets::mass_spring();
        let rule = TilingRule::new(2, 2).unwrap();
        let seq = trace_sequence(&spec, rule, 9.0, 6).unwrap();
        for n in 0..=6 {
            let d = direct_trace(&spec, rule, 9.0, n).unwrap();
            assert!(rel_err(seq.xs[n], d) < 1e-8);
        }
        assert_eq!(seq.ts.len(), 5);
    }

    #[test]
    fn escape_is_recorded_and_frozen() {
        let spec = presets::mass_spring();
        let seq = trace_sequence(&spec, TilingRule::golden(), 40.0, 40).unwrap();
        let e = seq.escaped_at.expect("deep gap escapes");
        assert!(e < 40);
        assert_eq!(seq.xs.len(), 41);
        for n in e..=40 {
            assert_eq!(seq.xs[n], seq.xs[e]);
        }
        // monotone growth before escape
        for n in 3..e {
            assert!(seq.xs[n].abs() >= seq.xs[n - 1].abs());
        }
    }

    #[test]
    fn similarity_invariance() {
        let spec = presets::mass_spring();
        let (t_a, t_b) = spec.element_pair(11.0).unwrap();
        let s = Mat2::new(1.3, 0.4, -0.7, (1.0 + 0.4 * -0.7) / 1.3);
        let s_inv = s.unimodular_inverse();
        for rule in RULES {
            let a = TraceSequence::from_seed(rule, TraceSeed::from_matrices(rule, t_a, t_b), 8);
            let b = TraceSequence::from_seed(
                rule,
                TraceSeed::from_matrices(rule, s * t_a * s_inv, s * t_b * s_inv),
                8,
            );
            for n in 0..=8 {
                assert!(rel_err(a.xs[n], b.xs[n]) < 1e-8);
            }
        }
    }

    #[test]
    fn canonical_rod_reflection() {
        let spec = presets::canonical_rod();
        let SystemSpec::Rod(p) = spec else { unreachable!() };
        let shift = std::f64::consts::PI / (p.q(Letter::A).sqrt() * p.length_a);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w = rng.gen_range(100.0..shift);
            for rule in RULES {
                let a = trace_sequence(&spec, rule, w, 8).unwrap();
                let b = trace_sequence(&spec, rule, w + shift, 8).unwrap();
                for n in 0..=8 {
                    if a.is_escaped(n) || b.is_escaped(n) {
                        break;
                    }
                    let scale = a.xs[n].abs().max(1.0);
                    assert!((a.xs[n].abs() - b.xs[n].abs()).abs() < 1e-6 * scale);
                }
            }
        }
    }

    #[test]
    fn short_sequences() {
        let seq = trace_sequence(&presets::mass_spring(), TilingRule::silver(), 3.0, 1).unwrap();
        assert_eq!(seq.xs.len(), 2);
        assert!(seq.ts.is_empty());
    }
}
