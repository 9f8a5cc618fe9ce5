//! Real 2×2 transfer-matrix arithmetic and the polynomial family `d_k`.
//!
//! The polynomials satisfy `d_0 = 0`, `d_1 = 1`, `d_k(x) = x d_{k-1}(x) - d_{k-2}(x)`
//! and are Chebyshev polynomials of the second kind evaluated at `x / 2`.

use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

/// Magnitude at which matrix entries and traces are clamped.
pub const SATURATION: f64 = 1e300;

/// Closed-form evaluation of `d_k` is only trusted this far away from `|x| = 2`.
pub const CLOSED_FORM_GAP: f64 = 1e-4;

/// A real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn to_rows(self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    /// `|det - 1|` scaled by the magnitude of the two products forming the
    /// determinant, so that large cell matrices are judged on relative error.
    pub fn unimodularity_error(&self) -> f64 {
        let p = (self.a11 * self.a22).abs();
        let q = (self.a12 * self.a21).abs();
        (self.det() - 1.0).abs() / p.max(q).max(1.0)
    }

    pub fn is_unimodular(&self, rel_tol: f64) -> bool {
        !self.is_escaped() && self.unimodularity_error() <= rel_tol
    }

    /// True once any entry has saturated or stopped being finite.
    pub fn is_escaped(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .any(|v| !v.is_finite() || v.abs() >= SATURATION)
    }

    /// Inverse of a unimodular matrix (adjugate).
    pub fn unimodular_inverse(&self) -> Mat2 {
        Mat2::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    /// `self^p` by repeated squaring. `p = 0` gives the identity.
    pub fn pow(self, p: u64) -> Mat2 {
        let mut result = Mat2::IDENTITY;
        let mut base = self;
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        result
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Mat2 {
        Mat2::new(f(self.a11), f(self.a12), f(self.a21), f(self.a22))
    }

    /// Largest entrywise relative difference, measured against `max(1, |entry|)`.
    pub fn max_rel_diff(&self, other: &Mat2) -> f64 {
        let a = self.to_rows();
        let b = other.to_rows();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let scale = a[i][j].abs().max(b[i][j].abs()).max(1.0);
                worst = worst.max((a[i][j] - b[i][j]).abs() / scale);
            }
        }
        worst
    }
}

pub fn saturate(v: f64) -> f64 {
    if v.is_nan() {
        v
    } else {
        v.clamp(-SATURATION, SATURATION)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, b: Mat2) -> Mat2 {
        let a = self;
        Mat2::new(
            a.a11 * b.a11 + a.a12 * b.a21,
            a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21,
            a.a21 * b.a12 + a.a22 * b.a22,
        )
        .map(saturate)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.map(|v| -v)
    }
}

/// `d_k(x)` by the three-term recursion. Exact at `|x| = 2`, where the closed
/// form has a removable singularity.
pub fn cheb_eval(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 1..k {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[d_0(x), ..., d_{k_max}(x)]` in a single pass.
pub fn cheb_seq(k_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(0.0);
    if k_max == 0 {
        return out;
    }
    out.push(1.0);
    for k in 2..=k_max {
        out.push(x * out[k - 1] - out[k - 2]);
    }
    out
}

/// Closed-form `d_k(x)` for `|x| > 2 + CLOSED_FORM_GAP`; `None` closer to the
/// singular points. Used only to cross-check [`cheb_eval`].
pub fn cheb_closed_form(k: usize, x: f64) -> Option<f64> {
    if x.abs() <= 2.0 + CLOSED_FORM_GAP {
        return None;
    }
    let s = (x * x - 4.0).sqrt();
    let k = i32::try_from(k).ok()?;
    let plus = ((x + s) / 2.0).powi(k);
    let minus = ((x - s) / 2.0).powi(k);
    Some((plus - minus) / s)
}
