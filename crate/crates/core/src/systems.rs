//! Element transfer matrices `T^A(ω)`, `T^B(ω)` for the three physical models:
//! a discrete mass-spring chain, axially vibrating rods and a beam on
//! periodically spaced simple supports.
//!
//! All inputs are SI. Beam matrices are evaluated with the real identities
//! `k₃ cot(k₃ l) = κ coth(κ l)` and `k₃ csc(k₃ l) = κ csch(κ l)` (with `κ = |k₃| = k₁`),
//! so no complex arithmetic is involved and every entry is real by construction.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::Mat2;
use crate::error::{Error, Result};
use crate::tiling::Letter;

/// `|sin(k₁ l)|` below this marks a pole of the beam matrix.
pub const BEAM_SIN_TOL: f64 = 1e-10;
/// `|Ψ_ab|` below this multiple of `max(|Ψ_aa|, 1)` marks a pole.
pub const BEAM_PSI_AB_TOL: f64 = 1e-12;
/// Below this phase `z = k₁ l` the beam functions come from their Taylor series.
const BEAM_SERIES_PHASE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassSpringParams {
    #[serde(rename = "mass_A")]
    pub mass_a: f64,
    #[serde(rename = "mass_B")]
    pub mass_b: f64,
    #[serde(rename = "stiffness_A")]
    pub stiffness_a: f64,
    #[serde(rename = "stiffness_B")]
    pub stiffness_b: f64,
}

impl MassSpringParams {
    pub fn mass(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.mass_a,
            Letter::B => self.mass_b,
        }
    }

    pub fn stiffness(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.stiffness_a,
            Letter::B => self.stiffness_b,
        }
    }

    /// Frequency above which a chain of identical `label` elements stops
    /// propagating: `2 sqrt(k/m)`.
    pub fn cutoff(&self, label: Letter) -> f64 {
        2.0 * (self.stiffness(label) / self.mass(label)).sqrt()
    }

    pub fn element_matrix(&self, label: Letter, omega: f64) -> Mat2 {
        let (m, k) = (self.mass(label), self.stiffness(label));
        let mw2 = m * omega * omega;
        Mat2::new(1.0, -1.0 / k, mw2, 1.0 - mw2 / k)
    }

    fn validate(&self) -> Result<()> {
        positive(&[
            ("mass_A", self.mass_a),
            ("mass_B", self.mass_b),
            ("stiffness_A", self.stiffness_a),
            ("stiffness_B", self.stiffness_b),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodParams {
    #[serde(rename = "length_A")]
    pub length_a: f64,
    #[serde(rename = "length_B")]
    pub length_b: f64,
    #[serde(rename = "area_A")]
    pub area_a: f64,
    #[serde(rename = "area_B")]
    pub area_b: f64,
    #[serde(rename = "young_A")]
    pub young_a: f64,
    #[serde(rename = "young_B")]
    pub young_b: f64,
    #[serde(rename = "density_A")]
    pub density_a: f64,
    #[serde(rename = "density_B")]
    pub density_b: f64,
}

impl RodParams {
    pub fn length(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.length_a,
            Letter::B => self.length_b,
        }
    }

    pub fn area(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.area_a,
            Letter::B => self.area_b,
        }
    }

    pub fn young(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.young_a,
            Letter::B => self.young_b,
        }
    }

    pub fn density(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.density_a,
            Letter::B => self.density_b,
        }
    }

    /// `Q = ρ / E`, the inverse squared wave speed.
    pub fn q(&self, label: Letter) -> f64 {
        self.density(label) / self.young(label)
    }

    /// Phase `sqrt(Q) ω l` accumulated across one element.
    pub fn phase(&self, label: Letter, omega: f64) -> f64 {
        self.q(label).sqrt() * omega * self.length(label)
    }

    pub fn element_matrix(&self, label: Letter, omega: f64) -> Mat2 {
        let ea = self.young(label) * self.area(label);
        if omega == 0.0 {
            return Mat2::new(1.0, self.length(label) / ea, 0.0, 1.0);
        }
        let sq = self.q(label).sqrt();
        let (s, c) = self.phase(label, omega).sin_cos();
        let imp = ea * sq * omega;
        Mat2::new(c, s / imp, -imp * s, c)
    }

    fn validate(&self) -> Result<()> {
        positive(&[
            ("length_A", self.length_a),
            ("length_B", self.length_b),
            ("area_A", self.area_a),
            ("area_B", self.area_b),
            ("young_A", self.young_a),
            ("young_B", self.young_b),
            ("density_A", self.density_a),
            ("density_B", self.density_b),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    #[serde(rename = "span_A")]
    pub span_a: f64,
    #[serde(rename = "span_B")]
    pub span_b: f64,
    pub radius_of_inertia: f64,
    /// `ρ r⁴ / (EI)` in s².
    #[serde(rename = "P", alias = "p")]
    pub p: f64,
}

/// Distance of a beam element from the singularities of its transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleDistance {
    /// Distance from `k₁ l` to the nearest positive multiple of π.
    pub phase_distance: f64,
    /// `|Ψ_ab|`; the matrix divides by it.
    pub psi_ab: f64,
}

impl BeamParams {
    pub fn span(&self, label: Letter) -> f64 {
        match label {
            Letter::A => self.span_a,
            Letter::B => self.span_b,
        }
    }

    /// `k₁(ω) = sqrt(ω sqrt(P)) / r`.
    pub fn wavenumber(&self, omega: f64) -> f64 {
        (omega * self.p.sqrt()).sqrt() / self.radius_of_inertia
    }

    pub fn phase(&self, label: Letter, omega: f64) -> f64 {
        self.wavenumber(omega) * self.span(label)
    }

    /// `(Ψ_aa, Ψ_ab)` of one span.
    pub fn psi(&self, label: Letter, omega: f64) -> (f64, f64) {
        let l = self.span(label);
        let (gaa, gab) = beam_shape_functions(self.phase(label, omega));
        (l * gaa, l * gab)
    }

    pub fn pole_distance(&self, label: Letter, omega: f64) -> PoleDistance {
        let z = self.phase(label, omega);
        PoleDistance {
            phase_distance: phase_pole_distance(z),
            psi_ab: self.psi(label, omega).1.abs(),
        }
    }

    pub fn element_matrix(&self, label: Letter, omega: f64) -> Result<Mat2> {
        if omega == 0.0 {
            return Ok(self.small_omega_limit(label));
        }
        let l = self.span(label);
        let z = self.phase(label, omega);
        if z >= BEAM_SERIES_PHASE && z.sin().abs() < BEAM_SIN_TOL {
            return Err(Error::BeamPole { label, omega });
        }
        let (gaa, gab) = beam_shape_functions(z);
        if !gaa.is_finite() || !gab.is_finite() || gab.abs() < BEAM_PSI_AB_TOL * gaa.abs().max(1.0 / l) {
            return Err(Error::BeamPole { label, omega });
        }
        let diag = -gaa / gab;
        Ok(Mat2::new(
            diag,
            l * (gaa * gaa - gab * gab) / gab,
            1.0 / (l * gab),
            diag,
        ))
    }

    /// Leading-order matrix as `ω -> 0`: `[[-2, l/2], [6/l, -2]]`.
    pub fn small_omega_limit(&self, label: Letter) -> Mat2 {
        let l = self.span(label);
        Mat2::new(-2.0, l / 2.0, 6.0 / l, -2.0)
    }

    fn validate(&self) -> Result<()> {
        positive(&[
            ("span_A", self.span_a),
            ("span_B", self.span_b),
            ("radius_of_inertia", self.radius_of_inertia),
            ("P", self.p),
        ])
    }
}

/// Dimensionless beam functions `g_aa(z) = Ψ_aa / l` and `g_ab(z) = Ψ_ab / l`
/// of the phase `z = k₁ l`:
///
/// `g_aa = (z cot z - z coth z) / (-2 z²)`, `g_ab = (z csc z - z csch z) / (2 z²)`.
pub fn beam_shape_functions(z: f64) -> (f64, f64) {
    if z < BEAM_SERIES_PHASE {
        // even terms cancel between the trigonometric and hyperbolic parts
        let z4 = z.powi(4);
        let gaa = 1.0 / 3.0 + z4 * (2.0 / 945.0 + z4 * (2.0 / 93555.0));
        let gab = 1.0 / 6.0 + z4 * (31.0 / 15120.0 + z4 * (73.0 / 3_421_440.0));
        return (gaa, gab);
    }
    let z2 = z * z;
    let (s, c) = z.sin_cos();
    let t = z.tanh();
    let sh = z.sinh();
    let gaa = (z * c / s - z / t) / (-2.0 * z2);
    let gab = (z / s - z / sh) / (2.0 * z2);
    (gaa, gab)
}

/// Distance from `z` to the nearest positive multiple of π.
pub fn phase_pole_distance(z: f64) -> f64 {
    let j = (z / PI).round().max(1.0);
    (z - j * PI).abs()
}

/// Membership of a unimodular matrix in the sign-pattern classes Σ+ / Σ-.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SigmaClass {
    /// Positive diagonal, negative off-diagonal.
    SigmaPlus,
    /// Negation of a Σ+ matrix.
    SigmaMinus,
    Neither,
}

pub fn sigma_classify(mat: &Mat2) -> SigmaClass {
    fn plus(m: &Mat2) -> bool {
        m.a11 > 0.0 && m.a22 > 0.0 && m.a12 < 0.0 && m.a21 < 0.0
    }
    if !mat.is_unimodular(1e-9) {
        return SigmaClass::Neither;
    }
    if plus(mat) {
        SigmaClass::SigmaPlus
    } else if plus(&-*mat) {
        SigmaClass::SigmaMinus
    } else {
        SigmaClass::Neither
    }
}

/// A physical model together with its material parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemSpec {
    MassSpring(MassSpringParams),
    Rod(RodParams),
    Beam(BeamParams),
}

impl SystemSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SystemSpec::MassSpring(_) => "mass-spring",
            SystemSpec::Rod(_) => "rod",
            SystemSpec::Beam(_) => "beam",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::MassSpring(p) => p.validate(),
            SystemSpec::Rod(p) => p.validate(),
            SystemSpec::Beam(p) => p.validate(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn element_matrix(&self, label: Letter, omega: f64) -> Result<Mat2> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "frequency must be finite and non-negative, got {omega}"
            )));
        }
        match self {
            SystemSpec::MassSpring(p) => Ok(p.element_matrix(label, omega)),
            SystemSpec::Rod(p) => Ok(p.element_matrix(label, omega)),
            SystemSpec::Beam(p) => p.element_matrix(label, omega),
        }
    }

    /// `(T^A, T^B)` at one frequency.
    pub fn element_pair(&self, omega: f64) -> Result<(Mat2, Mat2)> {
        Ok((
            self.element_matrix(Letter::A, omega)?,
            self.element_matrix(Letter::B, omega)?,
        ))
    }

    /// Factor turning ω into the normalised frequency reported by the CLI:
    /// `sqrt(m_A)`, `sqrt(Q_A)` or `sqrt(P)`.
    pub fn normalisation(&self) -> f64 {
        match self {
            SystemSpec::MassSpring(p) => p.mass_a.sqrt(),
            SystemSpec::Rod(p) => p.q(Letter::A).sqrt(),
            SystemSpec::Beam(p) => p.p.sqrt(),
        }
    }

    pub fn normalised_frequency(&self, omega: f64) -> f64 {
        omega * self.normalisation()
    }

    /// Physical length of one element. The discrete chain has no length, so
    /// each element counts as one unit.
    pub fn element_length(&self, label: Letter) -> f64 {
        match self {
            SystemSpec::MassSpring(_) => 1.0,
            SystemSpec::Rod(p) => p.length(label),
            SystemSpec::Beam(p) => p.span(label),
        }
    }
}

fn positive(fields: &[(&str, f64)]) -> Result<()> {
    for (name, v) in fields {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be strictly positive, got {v}"
            )));
        }
    }
    Ok(())
}

/// Parameter sets used throughout the examples and tests.
pub mod presets {
    use super::*;

    /// Equal unit masses with `k_A = 2 k_B = 200 N/m`.
    pub fn mass_spring() -> SystemSpec {
        SystemSpec::MassSpring(MassSpringParams {
            mass_a: 1.0,
            mass_b: 1.0,
            stiffness_a: 200.0,
            stiffness_b: 100.0,
        })
    }

    /// Canonical rod: equal moduli, densities and lengths, `2 A_A = A_B`.
    pub fn canonical_rod() -> SystemSpec {
        SystemSpec::Rod(RodParams {
            length_a: 0.07,
            length_b: 0.07,
            area_a: 1.963e-3 / 2.0,
            area_b: 1.963e-3,
            young_a: 3.3e9,
            young_b: 3.3e9,
            density_a: 1140.0,
            density_b: 1140.0,
        })
    }

    /// Rod used for the finite-sample transmission study: `4 A_A = A_B`, `l_A = 2 l_B = 0.07 m`.
    pub fn rod_stack() -> SystemSpec {
        SystemSpec::Rod(RodParams {
            length_a: 0.07,
            length_b: 0.035,
            area_a: 1.963e-3 / 4.0,
            area_b: 1.963e-3,
            young_a: 3.3e9,
            young_b: 3.3e9,
            density_a: 1140.0,
            density_b: 1140.0,
        })
    }

    /// Beam with support spacings `4 l_A = l_B = 0.1 m`, `r = 0.05 m`, `P = 1 s²`.
    pub fn beam() -> SystemSpec {
        SystemSpec::Beam(BeamParams {
            span_a: 0.025,
            span_b: 0.1,
            radius_of_inertia: 0.05,
            p: 1.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn beam_params() -> BeamParams {
        match presets::beam() {
            SystemSpec::Beam(p) => p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn mass_spring_static_limit() {
        let spec = presets::mass_spring();
        let t = spec.element_matrix(Letter::A, 0.0).unwrap();
        assert_eq!(t, Mat2::new(1.0, -1.0 / 200.0, 0.0, 1.0));
        assert_eq!(t.trace(), 2.0);
    }

    #[test]
    fn mass_spring_cutoff_trace() {
        let SystemSpec::MassSpring(p) = presets::mass_spring() else {
            unreachable!()
        };
        for label in [Letter::A, Letter::B] {
            let t = p.element_matrix(label, p.cutoff(label));
            assert!((t.trace() + 2.0).abs() < 1e-12);
        }
        let w: f64 = 7.3;
        let t = p.element_matrix(Letter::B, w);
        assert_eq!(t.trace(), 2.0 - p.mass_b * w * w / p.stiffness_b);
    }

    #[test]
    fn rod_trace_is_cosine() {
        let SystemSpec::Rod(p) = presets::rod_stack() else {
            unreachable!()
        };
        for &w in &[1.0, 1234.5, 5e4, 2e5] {
            for label in [Letter::A, Letter::B] {
                let t = p.element_matrix(label, w);
                let expected = 2.0 * (p.q(label).sqrt() * w * p.length(label)).cos();
                assert!((t.trace() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rod_small_omega_limit() {
        let SystemSpec::Rod(p) = presets::rod_stack() else {
            unreachable!()
        };
        for label in [Letter::A, Letter::B] {
            let ea = p.young(label) * p.area(label);
            let limit = Mat2::new(1.0, p.length(label) / ea, 0.0, 1.0);
            assert_eq!(p.element_matrix(label, 0.0), limit);
            let w = 1e-3;
            let near = p.element_matrix(label, w);
            assert!((near.a11 - 1.0).abs() < 1e-12 && (near.a22 - 1.0).abs() < 1e-12);
            assert!((near.a12 - limit.a12).abs() / limit.a12 < 1e-9);
            // a21 vanishes only at second order
            let a21 = -ea * p.q(label) * w * w * p.length(label);
            assert!((near.a21 - a21).abs() < 1e-9 * a21.abs());
        }
    }

    #[test]
    fn beam_limit_matrix() {
        let p = beam_params();
        assert_eq!(p.small_omega_limit(Letter::B), Mat2::new(-2.0, 0.05, 60.0, -2.0));
        let unit = BeamParams { span_a: 1.0, ..p };
        assert_eq!(unit.small_omega_limit(Letter::A), Mat2::new(-2.0, 0.5, 6.0, -2.0));
        for label in [Letter::A, Letter::B] {
            assert_eq!(p.small_omega_limit(label).det(), 1.0);
        }
    }

    #[test]
    fn beam_matrix_approaches_limit() {
        let p = beam_params();
        // reference frequency: unit normalised frequency sqrt(P) ω = 1
        let omega_ref = 1.0 / p.p.sqrt();
        for label in [Letter::A, Letter::B] {
            let t = p.element_matrix(label, 1e-4 * omega_ref).unwrap();
            let lim = p.small_omega_limit(label);
            for (a, b) in t.to_rows().iter().flatten().zip(lim.to_rows().iter().flatten()) {
                assert!((a - b).abs() <= 1e-2 * b.abs());
            }
        }
    }

    #[test]
    fn beam_series_matches_direct_formula() {
        // direct formula evaluated on both sides of the switch
        let direct = |z: f64| {
            let gaa = (z / z.tan() - z / z.tanh()) / (-2.0 * z * z);
            let gab = (z / z.sin() - z / z.sinh()) / (2.0 * z * z);
            (gaa, gab)
        };
        for &z in &[0.0999, 0.1, 0.12, 0.3] {
            let (a, b) = beam_shape_functions(z);
            let (da, db) = direct(z);
            assert!((a - da).abs() < 1e-12, "z={z}: {a} vs {da}");
            assert!((b - db).abs() < 1e-12, "z={z}: {b} vs {db}");
        }
        // leading order: Ψ_aa = l/3, Ψ_ab = l/6
        let (a, b) = beam_shape_functions(1e-6);
        assert_eq!((a, b), (1.0 / 3.0, 1.0 / 6.0));
    }

    #[test]
    fn beam_pole_detection() {
        let p = beam_params();
        // k₁ l_B = π  <=>  ω = (π r / l_B)² / sqrt(P)
        let omega = (PI * p.radius_of_inertia / p.span_b).powi(2) / p.p.sqrt();
        assert!(matches!(
            p.element_matrix(Letter::B, omega),
            Err(Error::BeamPole { label: Letter::B, .. })
        ));
        assert!(p.pole_distance(Letter::B, omega).phase_distance < 1e-12);
        assert!(p.element_matrix(Letter::B, omega * 1.01).is_ok());
    }

    #[test]
    fn pole_distance_examples() {
        assert_eq!(phase_pole_distance(PI), 0.0);
        assert_eq!(phase_pole_distance(PI / 2.0), PI / 2.0);
        assert!((phase_pole_distance(3.0) - 0.141_592_653_589_793).abs() < 1e-12);
        assert!((phase_pole_distance(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-12);
        assert!((phase_pole_distance(0.5) - (PI - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn sigma_classes() {
        let lim = Mat2::new(-2.0, 0.05, 60.0, -2.0);
        assert_eq!(sigma_classify(&lim), SigmaClass::SigmaMinus);
        assert_eq!(sigma_classify(&Mat2::IDENTITY), SigmaClass::Neither);
        let other = Mat2::new(-2.0, 0.5, 6.0, -2.0);
        assert_eq!(sigma_classify(&(lim * other)), SigmaClass::SigmaPlus);
        assert_eq!(sigma_classify(&(lim * other * lim)), SigmaClass::SigmaMinus);
        // sign pattern right but not unimodular
        assert_eq!(sigma_classify(&Mat2::new(2.0, -1.0, -1.0, 2.0)), SigmaClass::Neither);
    }

    #[test]
    fn beam_is_sigma_minus_at_small_omega() {
        let p = beam_params();
        for label in [Letter::A, Letter::B] {
            for &w in &[1e-6, 1e-3, 0.05] {
                let t = p.element_matrix(label, w).unwrap();
                assert_eq!(sigma_classify(&t), SigmaClass::SigmaMinus, "{label} at {w}");
            }
        }
    }

    #[test]
    fn unimodular_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let specs = [
            (presets::mass_spring(), 40.0),
            (presets::canonical_rod(), 2e5),
            (presets::rod_stack(), 2e5),
            (presets::beam(), 200.0),
        ];
        for (spec, w_max) in specs {
            let mut checked = 0;
            while checked < 10_000 {
                let w = rng.gen_range(0.0..w_max);
                let label = if rng.gen_bool(0.5) { Letter::A } else { Letter::B };
                if let SystemSpec::Beam(p) = spec {
                    if p.pole_distance(label, w).phase_distance < 1e-6 {
                        continue;
                    }
                }
                let t = spec.element_matrix(label, w).unwrap();
                assert!(t.is_unimodular(1e-9), "{} {label} {w}: {t:?}", spec.kind_name());
                checked += 1;
            }
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"kind":"mass-spring","mass_A":1.0,"mass_B":2.0,"stiffness_A":200,"stiffness_B":100}"#;
        let spec = SystemSpec::from_json_str(text).unwrap();
        assert_eq!(spec.kind_name(), "mass-spring");
        let back = SystemSpec::from_json_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        let beam = r#"{"kind":"beam","span_A":0.025,"span_B":0.1,"radius_of_inertia":0.05,"P":1.0}"#;
        assert_eq!(SystemSpec::from_json_str(beam).unwrap(), presets::beam());
        let bad = r#"{"kind":"mass-spring","mass_A":-1.0,"mass_B":2.0,"stiffness_A":200,"stiffness_B":100}"#;
        assert!(matches!(
            SystemSpec::from_json_str(bad),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            SystemSpec::from_json_str(r#"{"kind":"plate"}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn negative_frequency_rejected() {
        assert!(presets::mass_spring().element_matrix(Letter::A, -1.0).is_err());
    }
}
