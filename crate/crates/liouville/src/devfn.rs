//! Developing functions and the exact Liouville solutions they induce.
//!
//! A meromorphic `f` with only simple poles and nonvanishing `f'` represents
//! a solution of `Δu + e^{2u} = 0` through
//! `u = ln( 2|f'(z)| / (1 + |f(z)|²) )`. The variants here cover the
//! built-in families used throughout the crate: Möbius transforms (bubbles),
//! `t + e^z`, `e^{e^z}`, and the one-dimensional family
//! `(p e^{cz} - q̄) / (q e^{cz} + p)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Switch to the reciprocal form `g = 1/f` once `|f|` exceeds this, so the
/// conformal factor never forms an ∞/∞ quotient near poles.
const POLE_HANDOFF: f64 = 1e4;

/// Stop forming `e^{e^z}` once `Re(e^z)` exceeds this; the conformal factor
/// is evaluated in log form instead.
const EXP_SATURATION: f64 = 300.0;

/// Outer similarity applied to the argument of a developing function:
/// `w(z) = scale · e^{i·rotate} · (z - translate)`.
///
/// Composing on the argument side reproduces the translation/rotation/scaling
/// law for solutions; the additive `ln scale` term appears in the conformal
/// factor through the chain rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub translate: Complex64,
    pub rotate: f64,
    pub scale: f64,
}

impl Default for Similarity {
    fn default() -> Self {
        Similarity {
            translate: Complex64::new(0.0, 0.0),
            rotate: 0.0,
            scale: 1.0,
        }
    }
}

impl Similarity {
    pub fn is_identity(&self) -> bool {
        self.translate == Complex64::new(0.0, 0.0) && self.rotate == 0.0 && self.scale == 1.0
    }

    /// Pulled-back argument `w(z)`.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(self.scale, self.rotate) * (z - self.translate)
    }

    /// Derivative of `w(z)` with respect to `z` (a constant).
    pub fn jacobian(&self) -> Complex64 {
        Complex64::from_polar(self.scale, self.rotate)
    }
}

/// The built-in meromorphic families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    /// `f(z) = (az + b) / (cz + d)`; `f(z) = λz` is the standard bubble.
    Mobius {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    /// `f(z) = t + e^z`, `t ≥ 0`. `t = 0` gives a one-dimensional solution.
    AffineExp { t: f64 },
    /// `f(z) = e^{e^z}`.
    ExpExp,
    /// `f(z) = (p e^{cz} - q̄) / (q e^{cz} + p)` with `|p|² + |q|² = 1`.
    OneDim { p: Complex64, q: Complex64, c: f64 },
}

/// A developing function: one of the built-in variants composed with an
/// outer similarity on the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevelopingFunction {
    pub variant: Variant,
    #[serde(default)]
    pub similarity: Similarity,
}

/// Value of a developing function at a point: finite, an exact pole, or a
/// magnitude beyond the floating range (saturated, with the direction of
/// approach retained as a unit complex number).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FnValue {
    Finite(Complex64),
    Pole,
    Saturated { direction: Complex64 },
}

impl FnValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, FnValue::Finite(_))
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            FnValue::Finite(w) => Some(*w),
            _ => None,
        }
    }
}

impl DevelopingFunction {
    pub fn mobius(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        DevelopingFunction {
            variant: Variant::Mobius { a, b, c, d },
            similarity: Similarity::default(),
        }
    }

    /// The standard bubble `f(z) = λz`.
    pub fn bubble(lambda: f64) -> Self {
        Self::mobius(
            Complex64::new(lambda, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn affine_exp(t: f64) -> Self {
        DevelopingFunction {
            variant: Variant::AffineExp { t },
            similarity: Similarity::default(),
        }
    }

    pub fn exp_exp() -> Self {
        DevelopingFunction {
            variant: Variant::ExpExp,
            similarity: Similarity::default(),
        }
    }

    pub fn one_dim(p: Complex64, q: Complex64, c: f64) -> Self {
        DevelopingFunction {
            variant: Variant::OneDim { p, q, c },
            similarity: Similarity::default(),
        }
    }

    pub fn with_similarity(mut self, similarity: Similarity) -> Self {
        self.similarity = similarity;
        self
    }

    /// Evaluate `f(z)`. Returns the infinity flag exactly at poles and a
    /// saturating flag when the magnitude leaves the floating range
    /// (only possible for the exponential variants).
    pub fn eval(&self, z: Complex64) -> FnValue {
        let w = self.similarity.apply(z);
        match self.variant {
            Variant::Mobius { a, b, c, d } => {
                let den = c * w + d;
                if den.norm() == 0.0 {
                    FnValue::Pole
                } else {
                    FnValue::Finite((a * w + b) / den)
                }
            }
            Variant::AffineExp { t } => {
                if w.re > 709.0 {
                    FnValue::Saturated {
                        direction: Complex64::from_polar(1.0, w.im),
                    }
                } else {
                    FnValue::Finite(Complex64::new(t, 0.0) + w.exp())
                }
            }
            Variant::ExpExp => {
                let inner = w.exp();
                if inner.re > 709.0 {
                    FnValue::Saturated {
                        direction: Complex64::from_polar(1.0, inner.im),
                    }
                } else {
                    FnValue::Finite(inner.exp())
                }
            }
            Variant::OneDim { p, q, c } => {
                let cw = c * w;
                if cw.re > EXP_SATURATION {
                    // f -> p/q as Re(cz) -> +inf; a pole only if q = 0.
                    if q.norm() == 0.0 {
                        return FnValue::Saturated {
                            direction: Complex64::from_polar(1.0, cw.im),
                        };
                    }
                    let e_unit = Complex64::from_polar(1.0, cw.im);
                    let small = (-cw.re).exp();
                    return FnValue::Finite(
                        (p * e_unit - q.conj() * small) / (q * e_unit + p * small),
                    );
                }
                let e = cw.exp();
                let den = q * e + p;
                if den.norm() == 0.0 {
                    FnValue::Pole
                } else {
                    FnValue::Finite((p * e - q.conj()) / den)
                }
            }
        }
    }

    /// Analytic derivative `f'(z)`, with the similarity chain rule applied.
    ///
    /// Errors exactly at poles; saturation beyond the floating range follows
    /// IEEE semantics (infinite components) rather than erroring.
    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        let w = self.similarity.apply(z);
        let jac = self.similarity.jacobian();
        let base = match self.variant {
            Variant::Mobius { a, b, c, d } => {
                let den = c * w + d;
                if den.norm() == 0.0 {
                    return Err(Error::DerivativeAtPole { re: z.re, im: z.im });
                }
                (a * d - b * c) / (den * den)
            }
            Variant::AffineExp { .. } => w.exp(),
            Variant::ExpExp => {
                // f' = e^z · e^{e^z}
                let inner = w.exp();
                (w + inner).exp()
            }
            Variant::OneDim { p, q, c } => {
                let e = (Complex64::new(c, 0.0) * w).exp();
                let den = q * e + p;
                if den.norm() == 0.0 {
                    return Err(Error::DerivativeAtPole { re: z.re, im: z.im });
                }
                let pq_term = p * p + Complex64::new(q.norm_sqr(), 0.0);
                Complex64::new(c, 0.0) * e * pq_term / (den * den)
            }
        };
        Ok(base * jac)
    }

    /// `ln(2|f'|/(1+|f|²))` for the base variant at the pulled-back argument,
    /// computed stably (reciprocal handoff near poles, log form for the
    /// exponential variants).
    fn u_base(&self, w: Complex64) -> f64 {
        match self.variant {
            Variant::Mobius { a, b, c, d } => {
                let det = (a * d - b * c).norm();
                let num = a * w + b;
                let den = c * w + d;
                let f_big = den.norm() * POLE_HANDOFF <= num.norm();
                if f_big {
                    // reciprocal form: g = 1/f = (cw+d)/(aw+b), g' = -det/(aw+b)^2
                    let g = den / num;
                    (2.0 * det).ln() - 2.0 * num.norm().ln() - g.norm_sqr().ln_1p()
                } else {
                    let f = num / den;
                    (2.0 * det).ln() - 2.0 * den.norm().ln() - f.norm_sqr().ln_1p()
                }
            }
            Variant::AffineExp { t } => {
                let (x, y) = (w.re, w.im);
                // ln(1 + |t + e^w|²) = ln(1 + t² + 2 t e^x cos y + e^{2x})
                let lden = if x <= 0.0 {
                    (1.0 + t * t + 2.0 * t * x.exp() * y.cos() + (2.0 * x).exp()).ln()
                } else {
                    2.0 * x
                        + (1.0 + 2.0 * t * (-x).exp() * y.cos() + (1.0 + t * t) * (-2.0 * x).exp())
                            .ln()
                };
                2f64.ln() + x - lden
            }
            Variant::ExpExp => {
                let (x, y) = (w.re, w.im);
                let cy = y.cos();
                let s = if cy == 0.0 { 0.0 } else { x.exp() * cy };
                // u = ln 2 + x + s - lse(0, 2s); exact for all magnitudes.
                let lse = if 2.0 * s > 0.0 {
                    2.0 * s + (-2.0 * s).exp().ln_1p()
                } else {
                    (2.0 * s).exp().ln_1p()
                };
                2f64.ln() + x + s - lse
            }
            Variant::OneDim { p, q, c } => {
                // u = ln 2 + ln|c| + Re(cw) + ln|p² + |q|²| - ln(|N|² + |D|²)
                // with N = p e^{cw} - q̄, D = q e^{cw} + p and
                // |N|² + |D|² = (|p|²+|q|²)(1 + |E|²) + 4 Im(p) Im(qE).
                let cw = Complex64::new(c, 0.0) * w;
                let xc = cw.re;
                let nsq = p.norm_sqr() + q.norm_sqr();
                let pq_term = (p * p + Complex64::new(q.norm_sqr(), 0.0)).norm();
                let unit = Complex64::from_polar(1.0, cw.im);
                let lsum = if xc > EXP_SATURATION {
                    2.0 * xc
                        + (nsq
                            + 4.0 * p.im * (q * unit).im * (-xc).exp()
                            + nsq * (-2.0 * xc).exp())
                        .ln()
                } else if xc < -EXP_SATURATION {
                    (nsq + 4.0 * p.im * (q * unit).im * xc.exp() + nsq * (2.0 * xc).exp()).ln()
                } else {
                    let e = cw.exp();
                    (nsq * (1.0 + e.norm_sqr()) + 4.0 * p.im * (q * e).im).ln()
                };
                2f64.ln() + c.abs().ln() + xc + pq_term.ln() - lsum
            }
        }
    }
}

/// An evaluable exact solution `u(x, y)` built from a developing function.
#[derive(Debug, Clone, Copy)]
pub struct SolutionField {
    pub source: DevelopingFunction,
}

impl SolutionField {
    pub fn new(source: DevelopingFunction) -> Self {
        SolutionField { source }
    }

    /// `u(x, y)`, total on the plane (finite and smooth across simple poles).
    pub fn u(&self, x: f64, y: f64) -> f64 {
        let z = Complex64::new(x, y);
        let w = self.source.similarity.apply(z);
        self.source.u_base(w) + self.source.similarity.scale.ln()
    }

    /// Conformal factor `e^{u(x, y)}`.
    pub fn factor(&self, x: f64, y: f64) -> f64 {
        self.u(x, y).exp()
    }

    /// Five-point finite-difference residual of `Δu + e^{2u}` at `(x, y)`.
    /// O(h²) for exact solutions.
    pub fn pde_residual(&self, x: f64, y: f64, h: f64) -> f64 {
        assert!(h > 0.0, "step must be positive");
        let lap = (self.u(x + h, y) + self.u(x - h, y) + self.u(x, y + h) + self.u(x, y - h)
            - 4.0 * self.u(x, y))
            / (h * h);
        lap + (2.0 * self.u(x, y)).exp()
    }
}

/// Outcome of sampling `|f'|` over a box.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub min_deriv_magnitude: f64,
    pub min_location: (f64, f64),
    /// True when some sampled `|f'|` fell below 1e-12.
    pub flagged: bool,
    pub samples: usize,
}

/// Check the structural constraints of `f` and sample `|f'|` on an `n × n`
/// inclusive grid over `[x0, x1] × [y0, y1]`, excluding pole neighborhoods.
pub fn validate(
    f: &DevelopingFunction,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    n: usize,
) -> Result<ValidationReport> {
    assert!(n >= 1);
    match f.variant {
        Variant::Mobius { a, b, c, d } => {
            let det = (a * d - b * c).norm();
            let scale = a.norm() * d.norm() + b.norm() * c.norm();
            if det <= 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidFunction(
                    "Möbius determinant ad - bc vanishes".into(),
                ));
            }
        }
        Variant::OneDim { p, q, .. } => {
            let nsq = p.norm_sqr() + q.norm_sqr();
            if (nsq - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidFunction(format!(
                    "|p|² + |q|² = {nsq} must equal 1"
                )));
            }
        }
        Variant::AffineExp { t } => {
            if t < 0.0 {
                return Err(Error::InvalidFunction("t must be nonnegative".into()));
            }
        }
        Variant::ExpExp => {}
    }
    if !(f.similarity.scale > 0.0) {
        return Err(Error::InvalidFunction("similarity scale must be > 0".into()));
    }

    let mut min_mag = f64::INFINITY;
    let mut min_loc = (x0, y0);
    let mut samples = 0usize;
    for i in 0..n {
        for j in 0..n {
            let x = if n == 1 {
                x0
            } else {
                x0 + (x1 - x0) * i as f64 / (n - 1) as f64
            };
            let y = if n == 1 {
                y0
            } else {
                y0 + (y1 - y0) * j as f64 / (n - 1) as f64
            };
            let z = Complex64::new(x, y);
            if near_pole(f, z) {
                continue;
            }
            if let Ok(d) = f.deriv(z) {
                samples += 1;
                let m = d.norm();
                if m < min_mag {
                    min_mag = m;
                    min_loc = (x, y);
                }
            }
        }
    }
    Ok(ValidationReport {
        min_deriv_magnitude: min_mag,
        min_location: min_loc,
        flagged: min_mag < 1e-12,
        samples,
    })
}

fn near_pole(f: &DevelopingFunction, z: Complex64) -> bool {
    let w = f.similarity.apply(z);
    match f.variant {
        Variant::Mobius { c, d, .. } => {
            if c.norm() == 0.0 {
                false
            } else {
                (w + d / c).norm() < 1e-6
            }
        }
        Variant::OneDim { p, q, c } => {
            if q.norm() == 0.0 {
                false
            } else {
                let cw = Complex64::new(c, 0.0) * w;
                cw.re.abs() < EXP_SATURATION && (q * cw.exp() + p).norm() < 1e-6
            }
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {b}, got {a} (|diff| = {})",
            (a - b).abs()
        );
    }

    fn builtin_functions() -> Vec<DevelopingFunction> {
        vec![
            DevelopingFunction::bubble(1.0),
            DevelopingFunction::bubble(2.5),
            DevelopingFunction::mobius(
                Complex64::new(2.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 1.0),
            ),
            DevelopingFunction::affine_exp(0.0),
            DevelopingFunction::affine_exp(1.0),
            DevelopingFunction::affine_exp(2.0),
            DevelopingFunction::exp_exp(),
            DevelopingFunction::one_dim(
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                1.0,
            ),
            DevelopingFunction::one_dim(
                Complex64::new(0.6, 0.0),
                Complex64::new(0.0, 0.8),
                1.5,
            ),
        ]
    }

    #[test]
    fn eval_identity_mobius() {
        let f = DevelopingFunction::mobius(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let z = Complex64::new(2.0, 3.0);
        assert_eq!(f.eval(z).finite().unwrap(), z);
    }

    #[test]
    fn eval_affine_exp_at_origin() {
        let f = DevelopingFunction::affine_exp(1.0);
        let v = f.eval(Complex64::new(0.0, 0.0)).finite().unwrap();
        assert_close(v.re, 2.0, 1e-15);
        assert_close(v.im, 0.0, 1e-15);
    }

    #[test]
    fn eval_exp_exp_hits_minus_one() {
        // e^z = iπ at z = ln π + iπ/2, so f(z) = e^{iπ} = -1.
        let f = DevelopingFunction::exp_exp();
        let v = f
            .eval(Complex64::new(PI.ln(), PI / 2.0))
            .finite()
            .unwrap();
        assert_close(v.re, -1.0, 1e-12);
        assert_close(v.im, 0.0, 1e-12);
    }

    #[test]
    fn eval_mobius_pole_is_flagged() {
        let f = DevelopingFunction::mobius(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        assert_eq!(f.eval(Complex64::new(0.0, 0.0)), FnValue::Pole);
    }

    #[test]
    fn eval_exp_exp_saturates_with_direction() {
        let f = DevelopingFunction::exp_exp();
        match f.eval(Complex64::new(8.0, 0.0)) {
            FnValue::Saturated { direction } => {
                assert_close(direction.norm(), 1.0, 1e-12);
            }
            other => panic!("expected saturation, got {other:?}"),
        }
    }

    #[test]
    fn deriv_identity_and_affine() {
        let id = DevelopingFunction::bubble(1.0);
        let d = id.deriv(Complex64::new(0.3, -2.0)).unwrap();
        assert_close(d.re, 1.0, 1e-15);
        assert_close(d.im, 0.0, 1e-15);

        for t in [0.0, 1.0, 3.5] {
            let f = DevelopingFunction::affine_exp(t);
            let d = f.deriv(Complex64::new(0.0, 0.0)).unwrap();
            assert_close(d.re, 1.0, 1e-15);
            assert_close(d.im, 0.0, 1e-15);
        }
    }

    #[test]
    fn deriv_exp_exp_matches_finite_differences() {
        let f = DevelopingFunction::exp_exp();
        let z = Complex64::new(0.0, 0.0);
        let d = f.deriv(z).unwrap();
        assert_close(d.re, E, E * 1e-6);
        // finite-difference oracle at step 1e-6, relative tolerance 1e-6
        let h = 1e-6;
        let fd = (f.eval(z + Complex64::new(h, 0.0)).finite().unwrap()
            - f.eval(z - Complex64::new(h, 0.0)).finite().unwrap())
            / Complex64::new(2.0 * h, 0.0);
        assert!((d - fd).norm() <= 1e-6 * d.norm());
    }

    #[test]
    fn deriv_finite_difference_oracle_all_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in builtin_functions() {
            for _ in 0..25 {
                let z = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                if near_pole(&f, z) {
                    continue;
                }
                let d = match f.deriv(z) {
                    Ok(d) => d,
                    Err(_) => continue,
                };
                let h = 1e-6;
                let fp = f.eval(z + Complex64::new(h, 0.0)).finite();
                let fm = f.eval(z - Complex64::new(h, 0.0)).finite();
                let (fp, fm) = match (fp, fm) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let fd = (fp - fm) / Complex64::new(2.0 * h, 0.0);
                assert!(
                    (d - fd).norm() <= 1e-5 * d.norm().max(1.0),
                    "derivative mismatch for {:?} at {z}",
                    f.variant
                );
            }
        }
    }

    #[test]
    fn solution_u_bubble_at_origin() {
        let s = SolutionField::new(DevelopingFunction::bubble(1.0));
        assert_close(s.u(0.0, 0.0), 2f64.ln(), 1e-15);
    }

    #[test]
    fn solution_u_affine_exp_closed_form() {
        // u(x, y) = ln( 2e^x / (2 + 2e^x cos y + e^{2x}) ) for t = 1
        let s = SolutionField::new(DevelopingFunction::affine_exp(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: f64 = rng.gen_range(-3.0..3.0);
            let y: f64 = rng.gen_range(-7.0..7.0);
            let expected =
                (2.0 * x.exp() / (2.0 + 2.0 * x.exp() * y.cos() + (2.0 * x).exp())).ln();
            assert_close(s.u(x, y), expected, 1e-12);
        }
        // and the t-general point value at (0, π/2): ln(2/(2+t²))
        for t in [0.0, 1.0, 2.0, 5.0] {
            let s = SolutionField::new(DevelopingFunction::affine_exp(t));
            assert_close(s.u(0.0, PI / 2.0), (2.0 / (2.0 + t * t)).ln(), 1e-12);
        }
    }

    #[test]
    fn solution_u_one_dim_is_log_sech() {
        let f = DevelopingFunction::one_dim(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            1.0,
        );
        let s = SolutionField::new(f);
        for x in [-3.0, -0.7, 0.0, 0.4, 2.2] {
            let expected = (1.0 / (x as f64).cosh()).ln();
            assert_close(s.u(x, 0.3), expected, 1e-12);
            assert_close(s.u(x, -1.9), expected, 1e-12);
        }
    }

    #[test]
    fn solution_u_finite_across_mobius_pole() {
        // f = 1/z has a pole at the origin; u must stay finite on a dense
        // grid crossing it.
        let f = DevelopingFunction::mobius(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let s = SolutionField::new(f);
        for i in -100..=100 {
            for j in -3..=3 {
                let x = i as f64 * 1e-3;
                let y = j as f64 * 1e-3;
                let u = s.u(x, y);
                assert!(u.is_finite(), "u not finite at ({x}, {y}): {u}");
            }
        }
        // at the pole itself, the reciprocal form gives u = ln(2|g'|/(1+|g|²))
        // with g = z, g' = 1: u(0) = ln 2.
        assert_close(s.u(0.0, 0.0), 2f64.ln(), 1e-14);
    }

    #[test]
    fn reciprocal_handoff_agrees_in_overlap_band() {
        // Both branches of the Möbius conformal factor agree with the
        // symmetric closed form 2|ad-bc| / (|az+b|² + |cz+d|²).
        let (a, b, c, d) = (
            Complex64::new(2.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
        );
        let f = DevelopingFunction::mobius(a, b, c, d);
        let s = SolutionField::new(f);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let det = (a * d - b * c).norm();
            let expected =
                (2.0 * det / ((a * z + b).norm_sqr() + (c * z + d).norm_sqr())).ln();
            assert_close(s.u(z.re, z.im), expected, 1e-11);
        }
    }

    #[test]
    fn pde_residual_is_small_for_exact_solutions() {
        let s = SolutionField::new(DevelopingFunction::bubble(1.0));
        assert!(s.pde_residual(0.0, 0.0, 1e-3).abs() < 1e-5);

        let s = SolutionField::new(DevelopingFunction::affine_exp(2.0));
        assert!(s.pde_residual(0.3, -1.1, 1e-3).abs() < 1e-4);

        let s = SolutionField::new(DevelopingFunction::one_dim(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            1.0,
        ));
        assert!(s.pde_residual(0.0, 0.0, 1e-3).abs() < 1e-5);
    }

    #[test]
    fn pde_residual_second_order_convergence() {
        // |residual| ≤ C h² with observed order ≥ 1.9 when halving h twice.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for f in builtin_functions() {
            let s = SolutionField::new(f);
            let mut orders = Vec::new();
            for _ in 0..100 {
                let x = rng.gen_range(-1.5..1.5);
                let y = rng.gen_range(-1.5..1.5);
                if near_pole(&f, Complex64::new(x, y)) {
                    continue;
                }
                let r1 = s.pde_residual(x, y, 1e-2).abs();
                let r2 = s.pde_residual(x, y, 5e-3).abs();
                let r4 = s.pde_residual(x, y, 2.5e-3).abs();
                // skip points sitting on the roundoff floor or with a
                // vanishing fourth-derivative combination
                if r4 < 1e-10 || r1 < 1e-9 {
                    continue;
                }
                orders.push((r1 / r2).log2());
                orders.push((r2 / r4).log2());
            }
            assert!(orders.len() > 50, "too few usable samples for {:?}", f.variant);
            orders.sort_by(f64::total_cmp);
            let median = orders[orders.len() / 2];
            assert!(
                median >= 1.9,
                "observed order {median} < 1.9 for {:?}",
                f.variant
            );
        }
    }

    #[test]
    fn similarity_reproduces_u_plus_log_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for base in builtin_functions() {
            let sim = Similarity {
                translate: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rotate: rng.gen_range(-PI..PI),
                scale: rng.gen_range(0.3..3.0),
            };
            let moved = base.with_similarity(sim);
            let s_base = SolutionField::new(base);
            let s_moved = SolutionField::new(moved);
            for _ in 0..30 {
                let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let w = sim.apply(z);
                if near_pole(&moved, z) {
                    continue;
                }
                let lhs = s_moved.u(z.re, z.im);
                let rhs = s_base.u(w.re, w.im) + sim.scale.ln();
                assert_close(lhs, rhs, 1e-12);
            }
        }
    }

    #[test]
    fn affine_exp_zero_is_one_dimensional() {
        let s = SolutionField::new(DevelopingFunction::affine_exp(0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut max_gap: f64 = 0.0;
        for _ in 0..200 {
            let x = rng.gen_range(-3.0..3.0);
            let y1 = rng.gen_range(-10.0..10.0);
            let y2 = rng.gen_range(-10.0..10.0);
            max_gap = max_gap.max((s.u(x, y1) - s.u(x, y2)).abs());
        }
        assert!(max_gap <= 1e-12, "u depends on y: gap {max_gap}");
    }

    #[test]
    fn validate_flags_degenerate_mobius() {
        let f = DevelopingFunction::mobius(
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(6.0, 0.0),
        );
        assert!(matches!(
            validate(&f, -1.0, 1.0, -1.0, 1.0, 10),
            Err(Error::InvalidFunction(_))
        ));
    }

    #[test]
    fn validate_affine_exp_min_on_box() {
        let f = DevelopingFunction::affine_exp(0.0);
        let report = validate(&f, -5.0, 5.0, -5.0, 5.0, 50).unwrap();
        assert!(!report.flagged);
        assert_close(report.min_deriv_magnitude, (-5f64).exp(), 1e-12);
    }

    #[test]
    fn validate_rejects_unnormalized_one_dim() {
        let f = DevelopingFunction::one_dim(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.5),
            1.0,
        );
        assert!(matches!(
            validate(&f, -1.0, 1.0, -1.0, 1.0, 5),
            Err(Error::InvalidFunction(_))
        ));
    }
}
