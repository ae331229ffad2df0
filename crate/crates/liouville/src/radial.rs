//! Radial supersolution analysis: circle length `l(r)`, disk area `A(r)`,
//! radial geodesic length `R(r)`, the critical radius `r₀`, and the full
//! inequality suite they satisfy, plus the n-dimensional radial system.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadratureConfig};

/// Tail behaviour of a profile, fixing how far the report grids reach.
///
/// The far cutoff must push the circle length below the `1e-6` vanishing
/// surrogate and keep the escape diameter bound within `1e-9` of its limit;
/// rational tails (`l ~ 4π/(λr)`) need a much larger cutoff than Gaussian
/// ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecayClass {
    Rational,
    Gaussian,
    Tabulated,
}

/// Relative reach of the report grid for rational tails (times `r₀`).
const RATIONAL_REACH: f64 = 1e10;
/// Absolute reach for Gaussian tails.
const GAUSSIAN_REACH: f64 = 10.0;
/// Smallest grid factor relative to `r₀`.
const GRID_FLOOR: f64 = 1e-3;
/// Log-spaced points in the report grid.
const GRID_POINTS: usize = 400;

/// Clamped/natural cubic spline with evaluable first and second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// second derivatives at the knots
    ms: Vec<f64>,
    end_derivs: Option<(f64, f64)>,
}

impl CubicSpline {
    /// Fit a cubic spline through `knots`; `end_derivs` clamps the first
    /// derivative at both ends (natural boundary otherwise).
    pub fn new(knots: &[(f64, f64)], end_derivs: Option<(f64, f64)>) -> Result<Self> {
        let n = knots.len();
        if n < 4 {
            return Err(Error::NeedsSmoothing(format!(
                "spline needs at least 4 knots, got {n}"
            )));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::NeedsSmoothing(
                    "spline knots must be strictly increasing".into(),
                ));
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();

        // tridiagonal system for the knot second derivatives
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            lower[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            upper[i] = h[i] / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        }
        match end_derivs {
            Some((d0, dn)) => {
                diag[0] = h[0] / 3.0;
                upper[0] = h[0] / 6.0;
                rhs[0] = (ys[1] - ys[0]) / h[0] - d0;
                lower[n - 1] = h[n - 2] / 6.0;
                diag[n - 1] = h[n - 2] / 3.0;
                rhs[n - 1] = dn - (ys[n - 1] - ys[n - 2]) / h[n - 2];
            }
            None => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
        }
        // Thomas algorithm
        let mut ms = vec![0.0; n];
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = upper[0] / diag[0];
        dp[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - lower[i] * cp[i - 1];
            cp[i] = upper[i] / m;
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m;
        }
        ms[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            ms[i] = dp[i] - cp[i] * ms[i + 1];
        }
        Ok(CubicSpline {
            xs,
            ys,
            ms,
            end_derivs,
        })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) if i >= self.xs.len() => self.xs.len() - 2,
            Err(i) => i - 1,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.deriv(self.xs[0]) * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.deriv(self.xs[n - 1]) * (x - self.xs[n - 1]);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.ms[i] + (b * b * b - b) * self.ms[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let xc = x.clamp(self.xs[0], self.xs[n - 1]);
        let i = self.segment(xc);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - xc) / h;
        let b = (xc - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.ms[i + 1] - (3.0 * a * a - 1.0) * self.ms[i]) * h / 6.0
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ms[i] + b * self.ms[i + 1]
    }
}

/// A radial profile `u(r)` with closed-form or spline derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `u = ln(2λ / (1 + λ²r²))`, the exact radial solution.
    Bubble { lambda: f64 },
    /// The bubble shifted by a constant: `u = ln(2λ/(1+λ²r²)) - c`.
    /// A strict supersolution for `c > 0`, a subsolution for `c < 0`.
    BubbleShifted { lambda: f64, c: f64 },
    /// `u = -r²` (curvature `4e^{2r²} ≥ 1`).
    GaussianNeg,
    /// Tabulated `u(r)` as a cubic spline.
    TabulatedSpline(CubicSpline),
}

impl RadialProfile {
    pub fn bubble(lambda: f64) -> Self {
        RadialProfile::Bubble { lambda }
    }

    pub fn bubble_shifted(lambda: f64, c: f64) -> Self {
        RadialProfile::BubbleShifted { lambda, c }
    }

    pub fn gaussian_neg() -> Self {
        RadialProfile::GaussianNeg
    }

    pub fn u(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bubble { lambda } => {
                (2.0 * lambda).ln() - (lambda * lambda * r * r).ln_1p()
            }
            RadialProfile::BubbleShifted { lambda, c } => {
                (2.0 * lambda).ln() - (lambda * lambda * r * r).ln_1p() - c
            }
            RadialProfile::GaussianNeg => -r * r,
            RadialProfile::TabulatedSpline(s) => s.value(r),
        }
    }

    pub fn du(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bubble { lambda } | RadialProfile::BubbleShifted { lambda, .. } => {
                let l2 = lambda * lambda;
                -2.0 * l2 * r / (1.0 + l2 * r * r)
            }
            RadialProfile::GaussianNeg => -2.0 * r,
            RadialProfile::TabulatedSpline(s) => s.deriv(r),
        }
    }

    pub fn ddu(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bubble { lambda } | RadialProfile::BubbleShifted { lambda, .. } => {
                let l2 = lambda * lambda;
                let d = 1.0 + l2 * r * r;
                -2.0 * l2 * (1.0 - l2 * r * r) / (d * d)
            }
            RadialProfile::GaussianNeg => -2.0,
            RadialProfile::TabulatedSpline(s) => s.second_deriv(r),
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            RadialProfile::Bubble { .. } | RadialProfile::BubbleShifted { .. } => {
                DecayClass::Rational
            }
            RadialProfile::GaussianNeg => DecayClass::Gaussian,
            RadialProfile::TabulatedSpline(_) => DecayClass::Tabulated,
        }
    }

    /// Conformal circle length `l(r) = 2πr e^{u(r)}`.
    pub fn circle_length(&self, r: f64) -> f64 {
        2.0 * PI * r * self.u(r).exp()
    }

    /// Margin of the radial supersolution inequality,
    /// `-(u'' + u'/r + e^{2u})`; nonnegative for supersolutions.
    /// At `r = 0` the `u'/r` term is replaced by its limit `u''(0)`.
    pub fn supersolution_margin(&self, r: f64) -> f64 {
        let lap = if r < 1e-12 {
            2.0 * self.ddu(0.0)
        } else {
            self.ddu(r) + self.du(r) / r
        };
        -(lap + (2.0 * self.u(r)).exp())
    }
}

/// Pointwise supersolution verdict over a grid.
#[derive(Debug, Clone)]
pub struct SupersolutionCheck {
    pub pass: bool,
    pub min_margin: f64,
    pub min_location: f64,
    /// `(r, margin)` pairs over the grid.
    pub margins: Vec<(f64, f64)>,
}

/// Check `u'' + u'/r + e^{2u} ≤ 0` pointwise on `r_grid`
/// (pass tolerance `-1e-10`).
pub fn supersolution_check(p: &RadialProfile, r_grid: &[f64]) -> Result<SupersolutionCheck> {
    if let RadialProfile::TabulatedSpline(s) = p {
        if s.xs.len() < 4 {
            return Err(Error::NeedsSmoothing("too few spline knots".into()));
        }
    }
    let mut min_margin = f64::INFINITY;
    let mut min_location = 0.0;
    let mut margins = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let m = p.supersolution_margin(r);
        margins.push((r, m));
        if m < min_margin {
            min_margin = m;
            min_location = r;
        }
    }
    Ok(SupersolutionCheck {
        pass: min_margin >= -1e-10,
        min_margin,
        min_location,
        margins,
    })
}

/// Locate the critical radius `r₀` where `1 + r u'(r)` changes sign
/// (the maximizer of `l`), by bracketing scan plus bisection.
///
/// On a plateau the scan brackets the first crossing, so the infimum of the
/// zero set is returned.
pub fn critical_radius(p: &RadialProfile, r_max: f64) -> Result<f64> {
    let phi = |r: f64| 1.0 + r * p.du(r);
    let lo0 = 1e-8;
    if phi(lo0) <= 0.0 {
        return Err(Error::NoCriticalRadius { lo: lo0, hi: r_max });
    }
    let steps = 600;
    let ratio = (r_max / lo0).powf(1.0 / steps as f64);
    let mut lo = lo0;
    let mut hi = lo0;
    let mut found = false;
    for _ in 0..steps {
        let next = hi * ratio;
        if phi(next) <= 0.0 {
            lo = hi;
            hi = next;
            found = true;
            break;
        }
        hi = next;
    }
    if !found {
        return Err(Error::NoCriticalRadius { lo: lo0, hi: r_max });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Geometry of a radial profile on a log grid: `l`, `A`, `R`, `η`,
/// the improper totals, and the critical radius.
#[derive(Debug, Clone)]
pub struct RadialReport {
    pub r: Vec<f64>,
    pub l: Vec<f64>,
    pub area: Vec<f64>,
    pub radial_length: Vec<f64>,
    pub eta: Vec<f64>,
    pub area_total: f64,
    pub radial_length_total: f64,
    pub r0: f64,
    pub r0_index: usize,
    pub supersolution_ok: bool,
}

impl RadialReport {
    pub fn l_at_r0(&self) -> f64 {
        self.l[self.r0_index]
    }

    pub fn area_at_r0(&self) -> f64 {
        self.area[self.r0_index]
    }

    pub fn radial_length_at_r0(&self) -> f64 {
        self.radial_length[self.r0_index]
    }
}

fn grid_reach(p: &RadialProfile, r0: f64) -> f64 {
    match p.decay_class() {
        DecayClass::Rational => r0 * RATIONAL_REACH,
        DecayClass::Gaussian => GAUSSIAN_REACH,
        DecayClass::Tabulated => match p {
            RadialProfile::TabulatedSpline(s) => s.x_max(),
            _ => unreachable!(),
        },
    }
}

/// The default report grid: log-spaced from `r₀·1e-3` to the decay-class
/// reach, with `r₀` inserted exactly. Scaling a profile rescales the grid
/// with it, which keeps suite margins scale-invariant.
pub fn default_r_grid(p: &RadialProfile, r0: f64) -> Vec<f64> {
    let reach = grid_reach(p, r0);
    let lo = r0 * GRID_FLOOR;
    let ratio = (reach / lo).powf(1.0 / (GRID_POINTS - 1) as f64);
    let mut grid = Vec::with_capacity(GRID_POINTS + 1);
    let mut x = lo;
    for _ in 0..GRID_POINTS {
        grid.push(x);
        x *= ratio;
    }
    *grid.last_mut().unwrap() = reach;
    let pos = grid.partition_point(|&v| v < r0);
    if pos == grid.len() || (grid[pos] - r0).abs() > 1e-12 * r0 {
        grid.insert(pos, r0);
    } else {
        grid[pos] = r0;
    }
    grid
}

/// Build the cumulative report: `l` by closed form, `A` and `R` by
/// cumulative quadrature, totals by improper quadrature, `r₀` by bisection.
pub fn compute_report(p: &RadialProfile, cfg: &QuadratureConfig) -> Result<RadialReport> {
    let scan_reach = match p.decay_class() {
        DecayClass::Rational => 1e8,
        DecayClass::Gaussian => GAUSSIAN_REACH,
        DecayClass::Tabulated => grid_reach(p, 1.0),
    };
    let r0 = critical_radius(p, scan_reach)?;
    let grid = default_r_grid(p, r0);
    let supersolution_ok = supersolution_check(p, &grid)?.pass;

    // tightened so that ~400 summed intervals still hit 1e-9 totals
    let tight = cfg.tightened(1e3);
    let area_density = |rho: f64| 2.0 * PI * rho * (2.0 * p.u(rho)).exp();
    let length_density = |rho: f64| p.u(rho).exp();

    let n = grid.len();
    let mut area = Vec::with_capacity(n);
    let mut radial_length = Vec::with_capacity(n);
    let mut a_acc = 0.0;
    let mut r_acc = 0.0;
    let mut prev = 0.0;
    for &r in &grid {
        a_acc += integrate(area_density, prev, r, &tight)?.value;
        r_acc += integrate(length_density, prev, r, &tight)?.value;
        area.push(a_acc);
        radial_length.push(r_acc);
        prev = r;
    }
    let area_total = a_acc + integrate_to_infinity(area_density, prev, &tight)?.value;
    let radial_length_total = r_acc + integrate_to_infinity(length_density, prev, &tight)?.value;

    let l: Vec<f64> = grid.iter().map(|&r| p.circle_length(r)).collect();
    let eta: Vec<f64> = grid
        .iter()
        .map(|&r| (-p.u(r)).exp() * (p.du(r) + 1.0 / r))
        .collect();
    let r0_index = grid
        .iter()
        .position(|&r| (r - r0).abs() <= 1e-12 * r0)
        .expect("r0 was inserted into the grid");

    Ok(RadialReport {
        r: grid,
        l,
        area,
        radial_length,
        eta,
        area_total,
        radial_length_total,
        r0,
        r0_index,
        supersolution_ok,
    })
}

/// Tail length `R_∞ - R(r)` of the radial ray from radius `r`;
/// rays from the origin are geodesics, so this bounds the conformal
/// distance from radius `r` to infinity.
pub fn ray_tail_length(p: &RadialProfile, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    assert!(r >= 0.0);
    Ok(integrate_to_infinity(|rho| p.u(rho).exp(), r, cfg)?.value)
}

/// Escape-construction diameter upper bound for a radial metric.
///
/// Any pair of points either connects through the origin
/// (cost `R(s₁) + R(s₂)`) or escapes outward to a circle of radius `r` and
/// travels along it (cost `2(R(r) - R(s)) + l(r)`). The bound is the
/// supremum over the worst symmetric pair of the better route; for radial
/// supersolutions it lands at `R_∞ + min l / 2 ≤ π`.
pub fn diameter_upper_bound(
    p: &RadialProfile,
    report: &RadialReport,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let n = report.r.len();
    let l_r0 = report.l_at_r0();
    let l_end = report.l[n - 1];
    if !(l_end <= 1e-3 * l_r0) {
        // circle lengths did not decay in the sampled range
        let best = report
            .l
            .iter()
            .zip(&report.radial_length)
            .map(|(&l, &rr)| 2.0 * (report.radial_length_total - rr) + l)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::Inconclusive { best });
    }

    // Q(r) = 2R(r) + l(r); escape(s) = min_{r ≥ s} Q(r) - 2R(s).
    // The candidate set is extended past the grid by the pure-tail route
    // 2R_∞ (circle length → 0 there).
    let q: Vec<f64> = (0..n)
        .map(|i| 2.0 * report.radial_length[i] + report.l[i])
        .collect();
    let mut suffix = vec![0.0; n + 1];
    suffix[n] = 2.0 * report.radial_length_total;
    for i in (0..n).rev() {
        suffix[i] = q[i].min(suffix[i + 1]);
    }

    // Majorant per grid interval: 2R is increasing, escape is decreasing,
    // so min(2R(s), escape(s)) ≤ min(2R(s_{i+1}), suffix_i - 2R(s_i)).
    let mut best_interval = 0;
    let mut bound = 0.0f64;
    for i in 0..n - 1 {
        let m = (2.0 * report.radial_length[i + 1]).min(suffix[i] - 2.0 * report.radial_length[i]);
        if m > bound {
            bound = m;
            best_interval = i;
        }
    }
    // below the grid and beyond it
    bound = bound.max(2.0 * report.radial_length[0]);
    bound = bound.max(2.0 * (report.radial_length_total - report.radial_length[n - 1]) + l_end);

    // Refine the winning interval by bisection on 4R(s) = suffix.
    let i = best_interval;
    let target = suffix[i];
    let mut lo = report.r[i];
    let mut hi = report.r[i + 1];
    let mut r_lo = report.radial_length[i];
    let mut r_hi = report.radial_length[i + 1];
    let tight = cfg.tightened(1e2);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let r_mid = r_lo + integrate(|rho| p.u(rho).exp(), lo, mid, &tight)?.value;
        if 4.0 * r_mid < target {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
            r_hi = r_mid;
        }
        if (r_hi - r_lo) < 1e-13 {
            break;
        }
    }
    let refined = (2.0 * r_hi).min(target - 2.0 * r_lo);
    Ok(bound.max(refined))
}

/// One row of the inequality suite.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub id: &'static str,
    pub description: &'static str,
    /// Minimum margin over the applicable grid (≥ 0 means the inequality
    /// holds with room; small negatives up to tolerance still pass).
    pub margin: f64,
    /// Grid location of the minimum margin, when applicable.
    pub location: Option<f64>,
    /// Magnitude of the competing sides at the minimum, for tolerance scaling.
    pub scale: f64,
    pub pass: bool,
    /// True when the applicable domain was empty.
    pub vacuous: bool,
}

/// Suite outcome over all inequality rows.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    pub pass: bool,
}

impl InequalityReport {
    pub fn check(&self, id: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

const SUITE_TOL: f64 = 1e-9;

fn make_check(
    id: &'static str,
    description: &'static str,
    points: impl Iterator<Item = (f64, f64, f64)>,
) -> InequalityCheck {
    let mut margin = f64::INFINITY;
    let mut location = None;
    let mut scale = 0.0;
    for (r, m, s) in points {
        if m < margin {
            margin = m;
            location = Some(r);
            scale = s;
        }
    }
    if margin == f64::INFINITY {
        return InequalityCheck {
            id,
            description,
            margin: f64::INFINITY,
            location: None,
            scale: 0.0,
            pass: true,
            vacuous: true,
        };
    }
    let pass = margin >= -SUITE_TOL * scale.max(1.0);
    InequalityCheck {
        id,
        description,
        margin,
        location,
        scale,
        pass,
        vacuous: false,
    }
}

/// Evaluate the full radial inequality suite on the report grid.
///
/// Domain restrictions: the `A/l ≤ sin R` and `A ≤ l` rows apply on
/// `r ≤ r₀` only; the half-volume row applies where `R ≥ π/2`; the
/// monotonicity-ratio row uses the product form `A sin R ≥ l (1 - cos R)`
/// so no grid point needs `sin R` in a denominator.
pub fn theorem14_suite(p: &RadialProfile, cfg: &QuadratureConfig) -> Result<InequalityReport> {
    let report = compute_report(p, cfg)?;
    Ok(theorem14_suite_from_report(p, &report, cfg))
}

pub fn theorem14_suite_from_report(
    p: &RadialProfile,
    report: &RadialReport,
    cfg: &QuadratureConfig,
) -> InequalityReport {
    let n = report.r.len();
    let a_inf = report.area_total;
    let grid = |i: usize| {
        (
            report.r[i],
            report.l[i],
            report.area[i],
            report.radial_length[i],
        )
    };

    let mut checks = Vec::new();

    checks.push(make_check(
        "volume_bound",
        "total conformal area at most 4π",
        std::iter::once((f64::INFINITY, 4.0 * PI - a_inf, 4.0 * PI)),
    ));

    let diam = diameter_upper_bound(p, report, cfg);
    checks.push(match diam {
        Ok(d) => make_check(
            "diameter_bound",
            "conformal diameter at most π",
            std::iter::once((f64::INFINITY, PI - d, PI)),
        ),
        Err(_) => InequalityCheck {
            id: "diameter_bound",
            description: "conformal diameter at most π",
            margin: f64::NEG_INFINITY,
            location: None,
            scale: PI,
            pass: false,
            vacuous: false,
        },
    });

    checks.push(make_check(
        "max_circle_length",
        "peak circle length l(r₀) at most 2π",
        std::iter::once((report.r0, 2.0 * PI - report.l_at_r0(), 2.0 * PI)),
    ));

    checks.push(make_check(
        "circle_length_vanishes",
        "circle length below 1e-6 at the far cutoff",
        std::iter::once((report.r[n - 1], 1e-6 - report.l[n - 1], 1.0)),
    ));

    checks.push(make_check(
        "isoperimetric_lower",
        "A (A_inf - A) at most l²",
        (0..n).map(|i| {
            let (r, l, a, _) = grid(i);
            let lhs = a * (a_inf - a);
            (r, l * l - lhs, (l * l).abs() + lhs.abs())
        }),
    ));

    checks.push(make_check(
        "isoperimetric_upper",
        "l² at most 4πA - A²",
        (0..n).map(|i| {
            let (r, l, a, _) = grid(i);
            let rhs = 4.0 * PI * a - a * a;
            (r, rhs - l * l, (l * l).abs() + rhs.abs())
        }),
    ));

    checks.push(make_check(
        "critical_geodesic_radius",
        "R(r₀) at most π/2",
        std::iter::once((
            report.r0,
            PI / 2.0 - report.radial_length_at_r0(),
            PI / 2.0,
        )),
    ));

    checks.push(make_check(
        "cap_area_lower",
        "A_inf (1 - cos R) at most 2A",
        (0..n).map(|i| {
            let (r, _, a, big_r) = grid(i);
            let lhs = a_inf * (1.0 - big_r.cos());
            (r, 2.0 * a - lhs, lhs.abs() + 2.0 * a.abs())
        }),
    ));

    checks.push(make_check(
        "area_length_ratio_lower",
        "A sin R at least l (1 - cos R)",
        (0..n).map(|i| {
            let (r, l, a, big_r) = grid(i);
            let lhs = a * big_r.sin();
            let rhs = l * (1.0 - big_r.cos());
            (r, lhs - rhs, lhs.abs() + rhs.abs())
        }),
    ));

    checks.push(make_check(
        "area_length_ratio_upper",
        "A/l at most sin R up to the critical radius",
        (0..=report.r0_index).map(|i| {
            let (r, l, a, big_r) = grid(i);
            let rhs = l * big_r.sin();
            (r, rhs - a, a.abs() + rhs.abs())
        }),
    ));

    checks.push(make_check(
        "area_below_length",
        "A at most l up to the critical radius",
        (0..=report.r0_index).map(|i| {
            let (r, l, a, _) = grid(i);
            (r, l - a, l.abs() + a.abs())
        }),
    ));

    // The domain cut carries a 1e-9 guard so grid points whose R sits within
    // quadrature error of π/2 (the bubble equality point) do not flip in and
    // out of the domain between runs.
    checks.push(make_check(
        "half_volume",
        "A at least A_inf/2 wherever R at least π/2",
        (0..n).filter_map(|i| {
            let (r, _, a, big_r) = grid(i);
            if big_r >= PI / 2.0 + 1e-9 {
                Some((r, a - 0.5 * a_inf, a.abs() + 0.5 * a_inf))
            } else {
                None
            }
        }),
    ));

    checks.push(make_check(
        "ray_length_bound",
        "total radial ray length R_inf at most π",
        std::iter::once((f64::INFINITY, PI - report.radial_length_total, PI)),
    ));

    checks.push(make_check(
        "circle_length_unimodal",
        "1 + r u' changes sign once at r₀",
        (0..n).map(|i| {
            let r = report.r[i];
            let phi = 1.0 + r * p.du(r);
            let m = if i <= report.r0_index { phi } else { -phi };
            (r, m, 1.0)
        }),
    ));

    let pass = checks.iter().all(|c| c.pass);
    InequalityReport { checks, pass }
}

/// Γ(k/2) for positive integer `k`, by exact recurrence.
fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    let mut value;
    let mut t;
    if k % 2 == 0 {
        value = 1.0; // Γ(1)
        t = 1.0;
    } else {
        value = PI.sqrt(); // Γ(1/2)
        t = 0.5;
    }
    let x = k as f64 / 2.0;
    while t < x - 0.25 {
        value *= t;
        t += 1.0;
    }
    value
}

/// Surface area of the unit sphere S^{m} in R^{m+1}.
pub fn unit_sphere_area(m: u32) -> f64 {
    2.0 * PI.powf((m + 1) as f64 / 2.0) / gamma_half(m + 1)
}

/// Volume of the round unit n-sphere.
pub fn sphere_volume(n: u32) -> f64 {
    unit_sphere_area(n)
}

/// Outcome of the n-dimensional radial system check.
#[derive(Debug, Clone, Serialize)]
pub struct NdReport {
    pub n: u32,
    /// Margin of `u'' + u'/r + e^{2u} ≤ 0` (min over grid, location).
    pub radial_margin: f64,
    pub radial_margin_location: f64,
    /// Margin of `u'' + (2n-3)u'/r + (n-2)(u')² + (n-1)e^{2u} ≤ 0`.
    pub tangential_margin: f64,
    pub tangential_margin_location: f64,
    pub radial_length_total: f64,
    pub volume: f64,
    pub sphere_volume: f64,
    pub pass: bool,
}

/// Check the radial n-dimensional system pointwise on `r_grid` and the two
/// conclusions: `R_∞ ≤ π` and conformal volume at most `vol(S^n)`.
pub fn nd_system_check(
    p: &RadialProfile,
    n: u32,
    r_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<NdReport> {
    assert!(n >= 3, "the n-dimensional system needs n ≥ 3");
    let nf = n as f64;
    let mut radial_margin = f64::INFINITY;
    let mut radial_loc = 0.0;
    let mut tangential_margin = f64::INFINITY;
    let mut tangential_loc = 0.0;
    for &r in r_grid {
        let (ddu, du_over_r) = if r < 1e-12 {
            (p.ddu(0.0), p.ddu(0.0))
        } else {
            (p.ddu(r), p.du(r) / r)
        };
        let du = p.du(r);
        let e2u = (2.0 * p.u(r)).exp();
        let m1 = -(ddu + du_over_r + e2u);
        let m2 = -(ddu + (2.0 * nf - 3.0) * du_over_r + (nf - 2.0) * du * du + (nf - 1.0) * e2u);
        if m1 < radial_margin {
            radial_margin = m1;
            radial_loc = r;
        }
        if m2 < tangential_margin {
            tangential_margin = m2;
            tangential_loc = r;
        }
    }

    let tight = cfg.tightened(1e2);
    let radial_length_total = integrate_to_infinity(|rho| p.u(rho).exp(), 0.0, &tight)?.value;
    let volume = unit_sphere_area(n - 1)
        * integrate_to_infinity(
            |rho| (nf * p.u(rho)).exp() * rho.powi(n as i32 - 1),
            0.0,
            &tight,
        )?
        .value;
    let vol_sn = sphere_volume(n);

    let tol = 1e-9;
    let pass = radial_margin >= -tol
        && tangential_margin >= -tol
        && radial_length_total <= PI + tol
        && volume <= vol_sn * (1.0 + 1e-9);
    Ok(NdReport {
        n,
        radial_margin,
        radial_margin_location: radial_loc,
        tangential_margin,
        tangential_margin_location: tangential_loc,
        radial_length_total,
        volume,
        sphere_volume: vol_sn,
        pass,
    })
}
