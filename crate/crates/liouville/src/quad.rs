//! Adaptive quadrature for conformal lengths, areas and improper integrals.
//!
//! Integrands like the half-ellipse length density have moving near-singular
//! ridges, so the engine is adaptive Simpson with interval bisection rather
//! than fixed-order Gauss. Improper integrals use geometric truncation
//! doubling with an increment-based stop criterion; every integrand handled
//! here decays exponentially or faster along the relevant ends, and growth of
//! the increments is reported as divergence.

use crate::error::{Error, Result};
use crate::metric::{ConformalMetric, Point2};

/// Tolerances and caps for the quadrature engine.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: u32,
    /// Growth factor for improper truncation expansion.
    pub improper_cutoff_growth: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_subdivisions: 60,
            improper_cutoff_growth: 2.0,
        }
    }
}

impl QuadratureConfig {
    /// A copy with tolerances tightened by `factor` (used by cumulative
    /// builds that sum many intervals).
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureConfig {
            rel_tol: (self.rel_tol / factor).max(1e-15),
            abs_tol: (self.abs_tol / factor).max(1e-300),
            ..*self
        }
    }
}

/// Integral value with a conservative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

impl QuadResult {
    pub const ZERO: QuadResult = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
    };

    fn add(&mut self, other: QuadResult) {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
    }
}

fn simpson_rule(h: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    rel_tol: f64,
    depth_left: u32,
    failed: &mut bool,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    // interval no longer representable: accept what we have
    if !(a < lm && lm < m && m < rm && rm < b) {
        return (whole, f64::EPSILON * whole.abs());
    }
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(m - a, fa, flm, fm);
    let right = simpson_rule(b - m, fm, frm, fb);
    let s2 = left + right;
    let diff = s2 - whole;
    let tol = abs_tol.max(rel_tol * s2.abs());
    if diff.abs() <= 15.0 * tol {
        return (
            s2 + diff / 15.0,
            diff.abs().max(f64::EPSILON * s2.abs()),
        );
    }
    if depth_left == 0 {
        *failed = true;
        return (s2 + diff / 15.0, diff.abs());
    }
    let (lv, le) = adapt(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        0.5 * abs_tol,
        rel_tol,
        depth_left - 1,
        failed,
    );
    let (rv, re) = adapt(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        0.5 * abs_tol,
        rel_tol,
        depth_left - 1,
        failed,
    );
    (lv + rv, le + re)
}

/// Adaptive Simpson integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult::ZERO);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_rule(b - a, fa, fm, fb);
    let mut failed = false;
    let (value, error_estimate) = adapt(
        &f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
        &mut failed,
    );
    if failed {
        Err(Error::ToleranceNotMet {
            best: value,
            estimate: error_estimate,
        })
    } else {
        Ok(QuadResult {
            value,
            error_estimate,
        })
    }
}

/// `∫_a^∞ f` by geometric truncation expansion; stops when the last
/// increment drops below `abs_tol`, errors if increments keep growing.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let mut x = if a.abs() < 1.0 { a + 1.0 } else { 2.0 * a.abs() };
    let mut total = integrate(&f, a, x, cfg)?;
    let growth = cfg.improper_cutoff_growth.max(1.25);
    let mut prev_inc = f64::INFINITY;
    let mut growing = 0u32;
    loop {
        let x_next = x * growth;
        let inc = integrate(&f, x, x_next, cfg)?;
        total.add(inc);
        let inc_mag = inc.value.abs();
        if inc_mag < cfg.abs_tol {
            total.error_estimate += inc_mag;
            return Ok(total);
        }
        growing = if inc_mag > prev_inc { growing + 1 } else { 0 };
        if growing >= 3 {
            return Err(Error::DivergentIntegral(format!(
                "tail increments growing past x = {x_next:.3e}"
            )));
        }
        if x_next > 1e154 {
            return Err(Error::DivergentIntegral(
                "truncation expansion exhausted the floating range".into(),
            ));
        }
        prev_inc = inc_mag;
        x = x_next;
    }
}

/// `∫_{-∞}^{∞} f` by symmetric truncation `[-X, X]` with `X` doubled until
/// the last two-sided increment drops below `abs_tol`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, cfg: &QuadratureConfig) -> Result<QuadResult> {
    let mut x = 1.0;
    let mut total = integrate(&f, -x, x, cfg)?;
    let growth = cfg.improper_cutoff_growth.max(1.25);
    let mut prev_inc = f64::INFINITY;
    let mut growing = 0u32;
    loop {
        let x_next = x * growth;
        let mut inc = integrate(&f, x, x_next, cfg)?;
        inc.add(integrate(&f, -x_next, -x, cfg)?);
        total.add(inc);
        let inc_mag = inc.value.abs();
        if inc_mag < cfg.abs_tol {
            total.error_estimate += inc_mag;
            return Ok(total);
        }
        growing = if inc_mag > prev_inc { growing + 1 } else { 0 };
        if growing >= 3 {
            return Err(Error::DivergentIntegral(format!(
                "tail increments growing past |x| = {x_next:.3e}"
            )));
        }
        if x_next > 1e154 {
            return Err(Error::DivergentIntegral(
                "truncation expansion exhausted the floating range".into(),
            ));
        }
        prev_inc = inc_mag;
        x = x_next;
    }
}

/// Parametric path for length quadrature. Each variant provides a position
/// and parameter speed; lengths integrate `e^{u(position)} · speed`.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Segment {
        from: Point2,
        to: Point2,
    },
    Polyline {
        points: Vec<Point2>,
    },
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Right half-ellipse `x = a + sπ cos θ, y = π sin θ, θ ∈ [-π/2, π/2]`,
    /// connecting `(a, -π)` to `(a, π)`.
    HalfEllipse {
        a: f64,
        s: f64,
    },
    HorizontalLine {
        y: f64,
        x_min: f64,
        x_max: f64,
    },
    Ray {
        origin: Point2,
        direction: (f64, f64),
        r_max: f64,
    },
}

struct Piece<'c> {
    t0: f64,
    t1: f64,
    curve: &'c Curve,
    segment: Option<(Point2, Point2)>,
}

impl Curve {
    fn pieces(&self) -> Vec<Piece<'_>> {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            Curve::Segment { .. } | Curve::Ray { .. } => vec![Piece {
                t0: 0.0,
                t1: match self {
                    Curve::Segment { .. } => 1.0,
                    Curve::Ray { r_max, .. } => *r_max,
                    _ => unreachable!(),
                },
                curve: self,
                segment: None,
            }],
            Curve::Polyline { points } => points
                .windows(2)
                .map(|w| Piece {
                    t0: 0.0,
                    t1: 1.0,
                    curve: self,
                    segment: Some((w[0], w[1])),
                })
                .collect(),
            Curve::Circle { .. } => vec![Piece {
                t0: 0.0,
                t1: 2.0 * PI,
                curve: self,
                segment: None,
            }],
            Curve::HalfEllipse { .. } => vec![Piece {
                t0: -FRAC_PI_2,
                t1: FRAC_PI_2,
                curve: self,
                segment: None,
            }],
            Curve::HorizontalLine { x_min, x_max, .. } => vec![Piece {
                t0: *x_min,
                t1: *x_max,
                curve: self,
                segment: None,
            }],
        }
    }
}

impl Piece<'_> {
    fn position(&self, t: f64) -> Point2 {
        use std::f64::consts::PI;
        if let Some((p, q)) = self.segment {
            return Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
        }
        match self.curve {
            Curve::Segment { from, to } => {
                Point2::new(from.x + t * (to.x - from.x), from.y + t * (to.y - from.y))
            }
            Curve::Circle { center, radius } => {
                Point2::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            }
            Curve::HalfEllipse { a, s } => {
                Point2::new(a + s * PI * t.cos(), PI * t.sin())
            }
            Curve::HorizontalLine { y, .. } => Point2::new(t, *y),
            Curve::Ray {
                origin, direction, ..
            } => {
                let n = direction.0.hypot(direction.1);
                Point2::new(
                    origin.x + t * direction.0 / n,
                    origin.y + t * direction.1 / n,
                )
            }
            Curve::Polyline { .. } => unreachable!("polyline pieces carry segments"),
        }
    }

    fn speed(&self, t: f64) -> f64 {
        use std::f64::consts::PI;
        if let Some((p, q)) = self.segment {
            return (q.x - p.x).hypot(q.y - p.y);
        }
        match self.curve {
            Curve::Segment { from, to } => (to.x - from.x).hypot(to.y - from.y),
            Curve::Circle { radius, .. } => radius.abs(),
            Curve::HalfEllipse { s, .. } => {
                let (sin, cos) = t.sin_cos();
                PI * (s * s * sin * sin + cos * cos).sqrt()
            }
            Curve::HorizontalLine { .. } | Curve::Ray { .. } => 1.0,
            Curve::Polyline { .. } => unreachable!(),
        }
    }
}

/// Conformal length of `c` under `m`: adaptive Simpson of
/// `e^{u(pos(θ))} · |pos'(θ)|` piece by piece.
pub fn curve_length(m: &ConformalMetric, c: &Curve, cfg: &QuadratureConfig) -> Result<QuadResult> {
    let mut total = QuadResult::ZERO;
    let mut tolerance_missed = false;
    for piece in c.pieces() {
        let integrand = |t: f64| m.factor(piece.position(t)) * piece.speed(t);
        match integrate(integrand, piece.t0, piece.t1, cfg) {
            Ok(r) => total.add(r),
            Err(Error::ToleranceNotMet { best, estimate }) => {
                tolerance_missed = true;
                total.add(QuadResult {
                    value: best,
                    error_estimate: estimate,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if tolerance_missed {
        Err(Error::ToleranceNotMet {
            best: total.value,
            estimate: total.error_estimate,
        })
    } else {
        Ok(total)
    }
}

/// `∫_{-∞}^{∞} e^{u(x, y)} dx` along a horizontal line, with a tail-decay
/// precheck so non-decaying metrics fail fast instead of expanding forever.
pub fn horizontal_mass(m: &ConformalMetric, y: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    for sign in [-1.0, 1.0] {
        let samples = [16.0, 32.0, 64.0].map(|x| m.factor(Point2::new(sign * x, y)));
        let decaying = samples[2] <= samples[1] && samples[1] <= samples[0];
        if !decaying && samples[2] > cfg.abs_tol {
            return Err(Error::DivergentIntegral(format!(
                "factor not decaying along y = {y} (x sign {sign})"
            )));
        }
    }
    integrate_real_line(|x| m.factor(Point2::new(x, y)), cfg)
}

/// `∫_{y_min}^{y_max} e^{u(x, y)} dy` along a vertical segment.
pub fn vertical_mass(
    m: &ConformalMetric,
    x: f64,
    y_min: f64,
    y_max: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    integrate(|y| m.factor(Point2::new(x, y)), y_min, y_max, cfg)
}

/// Conformal area of the disk `B_r`: `∫_{B_r} e^{2u} dx`.
///
/// Radial metrics use one-dimensional quadrature of `2πρ e^{2u(ρ)}`; general
/// metrics use polar tensor quadrature.
pub fn disk_area(m: &ConformalMetric, r: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    assert!(r >= 0.0);
    use std::f64::consts::PI;
    if let Some(profile) = m.radial_profile() {
        return integrate(
            |rho| 2.0 * PI * rho * (2.0 * profile.u(rho)).exp(),
            0.0,
            r,
            cfg,
        );
    }
    let ring = |rho: f64| -> f64 {
        let inner = integrate(
            |phi| (2.0 * m.u(Point2::new(rho * phi.cos(), rho * phi.sin()))).exp(),
            0.0,
            2.0 * PI,
            cfg,
        );
        match inner {
            Ok(q) => rho * q.value,
            Err(Error::ToleranceNotMet { best, .. }) => rho * best,
            Err(_) => f64::NAN,
        }
    };
    integrate(ring, 0.0, r, cfg)
}

/// Total conformal area `∫_{R²} e^{2u} dx`, with divergence detection.
pub fn total_area(m: &ConformalMetric, cfg: &QuadratureConfig) -> Result<QuadResult> {
    use std::f64::consts::PI;
    if let Some(profile) = m.radial_profile() {
        return integrate_to_infinity(
            |rho| 2.0 * PI * rho * (2.0 * profile.u(rho)).exp(),
            0.0,
            cfg,
        );
    }
    let ring = |rho: f64| -> f64 {
        match integrate(
            |phi| (2.0 * m.u(Point2::new(rho * phi.cos(), rho * phi.sin()))).exp(),
            0.0,
            2.0 * PI,
            cfg,
        ) {
            Ok(q) => rho * q.value,
            Err(Error::ToleranceNotMet { best, .. }) => rho * best,
            Err(_) => f64::NAN,
        }
    };
    integrate_to_infinity(ring, 0.0, cfg)
}

/// Closed-form horizontal mass of the `t + e^z` family:
/// `∫ e^{u_t(x, y)} dx = (2/√(1+t² sin²y)) (π/2 - arctan(t cos y / √(1+t² sin²y)))`.
/// Used as an independent oracle for the improper quadrature route.
pub fn affine_exp_horizontal_mass_closed_form(t: f64, y: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let root = (1.0 + t * t * y.sin() * y.sin()).sqrt();
    2.0 / root * (FRAC_PI_2 - (t * y.cos() / root).atan())
}
