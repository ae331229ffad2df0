//! Conformal-factor abstraction plus round-sphere geometry and
//! stereographic projection.
//!
//! The sphere side exists for pullback certificates: pushing a planar curve
//! through `Π⁻¹ ∘ f` gives a spherical curve whose length never exceeds the
//! conformal length of the original, which turns sphere distances into
//! rigorous lower bounds for conformal distances.

use num_complex::Complex64;

use crate::devfn::{DevelopingFunction, FnValue, SolutionField};
use crate::radial::RadialProfile;

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// A point of the unit sphere in R³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let p = SpherePoint { x, y, z };
        debug_assert!(
            (p.norm_sqr() - 1.0).abs() <= 1e-12,
            "sphere point not unit: |p|² = {}",
            p.norm_sqr()
        );
        p
    }

    pub const NORTH_POLE: SpherePoint = SpherePoint {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// Named closed-form conformal factors, kept as an independent evaluation
/// route for cross-checks against the developing-function path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinFormula {
    /// `u(x, y) = ln( 2 e^x / (1 + t² + 2 t e^x cos y + e^{2x}) )`,
    /// the solution family of `f = t + e^z`.
    AffineExpFormula { t: f64 },
    /// `u(x, y) = ln sech x`, the one-dimensional solution.
    LogSech,
}

impl BuiltinFormula {
    pub fn u(&self, x: f64, y: f64) -> f64 {
        match *self {
            BuiltinFormula::AffineExpFormula { t } => {
                let lden = if x <= 0.0 {
                    (1.0 + t * t + 2.0 * t * x.exp() * y.cos() + (2.0 * x).exp()).ln()
                } else {
                    2.0 * x
                        + (1.0 + 2.0 * t * (-x).exp() * y.cos() + (1.0 + t * t) * (-2.0 * x).exp())
                            .ln()
                };
                2f64.ln() + x - lden
            }
            BuiltinFormula::LogSech => -x.abs() + 2f64.ln() - (-2.0 * x.abs()).exp().ln_1p(),
        }
    }
}

/// Evaluable conformal factor `e^{u}` on the plane.
#[derive(Debug, Clone)]
pub enum ConformalMetric {
    /// Exact solution from a developing function.
    FromDeveloping(SolutionField),
    /// Isotropic metric from a radial profile `u(|p|)`.
    Radial(RadialProfile),
    /// Named explicit formula.
    Builtin(BuiltinFormula),
}

impl ConformalMetric {
    pub fn from_function(f: DevelopingFunction) -> Self {
        ConformalMetric::FromDeveloping(SolutionField::new(f))
    }

    pub fn u(&self, p: Point2) -> f64 {
        match self {
            ConformalMetric::FromDeveloping(s) => s.u(p.x, p.y),
            ConformalMetric::Radial(profile) => profile.u(p.norm()),
            ConformalMetric::Builtin(formula) => formula.u(p.x, p.y),
        }
    }

    /// Conformal factor `e^{u(p)}`, positive everywhere.
    pub fn factor(&self, p: Point2) -> f64 {
        self.u(p).exp()
    }

    pub fn radial_profile(&self) -> Option<&RadialProfile> {
        match self {
            ConformalMetric::Radial(p) => Some(p),
            _ => None,
        }
    }

    pub fn developing(&self) -> Option<&DevelopingFunction> {
        match self {
            ConformalMetric::FromDeveloping(s) => Some(&s.source),
            _ => None,
        }
    }
}

/// Inverse stereographic projection from the north pole:
/// `w ↦ (2 Re w, 2 Im w, |w|² - 1) / (|w|² + 1)`, with ∞ ↦ north pole.
pub fn stereo_inv(w: FnValue) -> SpherePoint {
    match w {
        FnValue::Finite(w) => stereo_inv_finite(w),
        FnValue::Pole | FnValue::Saturated { .. } => SpherePoint::NORTH_POLE,
    }
}

pub fn stereo_inv_finite(w: Complex64) -> SpherePoint {
    let n2 = w.norm_sqr();
    if n2 > 1e16 {
        // divide through by |w|² so the quotient stays well-conditioned
        let inv = 1.0 / n2;
        let denom = 1.0 + inv;
        SpherePoint::new(
            2.0 * w.re * inv / denom,
            2.0 * w.im * inv / denom,
            (1.0 - inv) / denom,
        )
    } else {
        let denom = n2 + 1.0;
        SpherePoint::new(2.0 * w.re / denom, 2.0 * w.im / denom, (n2 - 1.0) / denom)
    }
}

/// Stereographic projection from the north pole; the north pole itself maps
/// to the infinity flag.
///
/// Uses `(X + iY)/(1 - Z)` on the southern hemisphere and the equivalent
/// `(1 + Z)/(X - iY)` on the northern one, so large `|w|` round-trips keep
/// full relative precision.
pub fn stereo_fwd(p: SpherePoint) -> FnValue {
    if p.z <= 0.0 {
        FnValue::Finite(Complex64::new(p.x / (1.0 - p.z), p.y / (1.0 - p.z)))
    } else if p.x == 0.0 && p.y == 0.0 {
        FnValue::Pole
    } else {
        FnValue::Finite(Complex64::new(1.0 + p.z, 0.0) / Complex64::new(p.x, -p.y))
    }
}

/// Great-circle distance on the unit sphere, in `[0, π]`.
///
/// The dot product is clamped to `[-1, 1]` before `acos` so antipodal
/// rounding cannot produce NaN.
pub fn sphere_distance(a: SpherePoint, b: SpherePoint) -> f64 {
    a.dot(&b).clamp(-1.0, 1.0).acos()
}

/// `Π⁻¹(f(p))`: push a planar point to the sphere through the developing
/// function. Exact poles and saturated overflow both land on the north pole.
pub fn pushforward(f: &DevelopingFunction, p: Point2) -> SpherePoint {
    stereo_inv(f.eval(p.to_complex()))
}

/// As [`pushforward`], also reporting whether the evaluation saturated
/// (overflowed) rather than hitting an exact pole.
pub fn pushforward_flagged(f: &DevelopingFunction, p: Point2) -> (SpherePoint, bool) {
    let v = f.eval(p.to_complex());
    let saturated = matches!(v, FnValue::Saturated { .. });
    (stereo_inv(v), saturated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devfn::DevelopingFunction;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a}");
    }

    #[test]
    fn stereo_inv_south_pole() {
        let p = stereo_inv_finite(Complex64::new(0.0, 0.0));
        assert_eq!((p.x, p.y, p.z), (0.0, 0.0, -1.0));
    }

    #[test]
    fn stereo_inv_octant_point() {
        // w = -tan(π/8) lands at (-√2/2, 0, -√2/2)
        let w = Complex64::new(-(PI / 8.0).tan(), 0.0);
        let p = stereo_inv_finite(w);
        assert_close(p.x, -SQRT_2 / 2.0, 1e-14);
        assert_close(p.y, 0.0, 1e-14);
        assert_close(p.z, -SQRT_2 / 2.0, 1e-14);
    }

    #[test]
    fn stereo_inv_minus_one() {
        let p = stereo_inv_finite(Complex64::new(-1.0, 0.0));
        assert_close(p.x, -1.0, 1e-15);
        assert_close(p.y, 0.0, 1e-15);
        assert_close(p.z, 0.0, 1e-15);
    }

    #[test]
    fn stereo_inv_infinity_is_north_pole() {
        assert_eq!(stereo_inv(FnValue::Pole), SpherePoint::NORTH_POLE);
    }

    #[test]
    fn sphere_distance_endpoints() {
        let a = SpherePoint::new(1.0, 0.0, 0.0);
        assert_eq!(sphere_distance(a, a), 0.0);
        let b = SpherePoint::new(-1.0, 0.0, 0.0);
        assert_close(sphere_distance(a, b), PI, 1e-15);
    }

    #[test]
    fn sphere_distance_octant_to_north_pole() {
        let a = SpherePoint::new(-SQRT_2 / 2.0, 0.0, -SQRT_2 / 2.0);
        // arccos(-√2/2) = 3π/4
        assert_close(
            sphere_distance(a, SpherePoint::NORTH_POLE),
            3.0 * PI / 4.0,
            1e-14,
        );
    }

    #[test]
    fn pushforward_affine_exp_midline_point() {
        // With e^a - 1 = tan(π/8) and y = π, f(a + iπ) = -tan(π/8).
        let a = (1.0 + (PI / 8.0).tan()).ln();
        let f = DevelopingFunction::affine_exp(1.0);
        let p = pushforward(&f, Point2::new(a, PI));
        assert_close(p.x, -SQRT_2 / 2.0, 1e-12);
        assert_close(p.y, 0.0, 1e-12);
        assert_close(p.z, -SQRT_2 / 2.0, 1e-12);
    }

    #[test]
    fn pushforward_exp_exp_example_point() {
        let f = DevelopingFunction::exp_exp();
        let p = pushforward(&f, Point2::new(PI.ln(), FRAC_PI_2));
        assert_close(p.x, -1.0, 1e-12);
        assert_close(p.y, 0.0, 1e-12);
        assert_close(p.z, 0.0, 1e-12);
    }

    #[test]
    fn pushforward_affine_exp_family_angle() {
        // a solves e^a - t = tan(π/4 - arctan(t)/2); the image is
        // (-cos α, 0, -sin α) with α = arctan t.
        for t in [0.0_f64, 0.5, 1.0, 2.0, 5.0] {
            let alpha = t.atan();
            let a = (t + (PI / 4.0 - alpha / 2.0).tan()).ln();
            let f = DevelopingFunction::affine_exp(t);
            let p = pushforward(&f, Point2::new(a, PI));
            assert_close(p.x, -alpha.cos(), 1e-12);
            assert_close(p.y, 0.0, 1e-12);
            assert_close(p.z, -alpha.sin(), 1e-12);
        }
    }

    #[test]
    fn builtin_affine_exp_formula_matches_developing_route() {
        let formula = BuiltinFormula::AffineExpFormula { t: 1.0 };
        let s = SolutionField::new(DevelopingFunction::affine_exp(1.0));
        for x in [-20.0, -1.0, 0.0, 0.5, 3.0, 25.0] {
            for y in [-PI, -0.4, 0.0, 1.0, PI] {
                assert_close(formula.u(x, y), s.u(x, y), 1e-12);
            }
        }
    }

    #[test]
    fn builtin_log_sech_matches_one_dim_route() {
        let formula = BuiltinFormula::LogSech;
        let s = SolutionField::new(DevelopingFunction::one_dim(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            1.0,
        ));
        for x in [-5.0, -0.3, 0.0, 1.0, 4.0] {
            assert_close(formula.u(x, 0.7), s.u(x, 0.7), 1e-12);
        }
    }

    proptest! {
        #[test]
        fn stereo_round_trip(re in -1e6_f64..1e6, im in -1e6_f64..1e6) {
            let w = Complex64::new(re, im);
            let back = stereo_fwd(stereo_inv_finite(w)).finite().unwrap();
            let tol = 1e-10 * w.norm().max(1.0);
            prop_assert!((back - w).norm() <= tol);
        }

        #[test]
        fn sphere_triangle_inequality(
            a in (-1.0_f64..1.0, -1.0_f64..1.0, -1.0_f64..1.0),
            b in (-1.0_f64..1.0, -1.0_f64..1.0, -1.0_f64..1.0),
            c in (-1.0_f64..1.0, -1.0_f64..1.0, -1.0_f64..1.0),
        ) {
            let normalize = |(x, y, z): (f64, f64, f64)| {
                let n = (x * x + y * y + z * z).sqrt();
                prop_assume!(n > 1e-3);
                Ok(SpherePoint::new(x / n, y / n, z / n))
            };
            let (a, b, c) = (normalize(a)?, normalize(b)?, normalize(c)?);
            prop_assert!(
                sphere_distance(a, c) <= sphere_distance(a, b) + sphere_distance(b, c) + 1e-12
            );
        }
    }
}
