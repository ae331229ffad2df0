//! Sphere covering inequality for nested radial pairs, the radial
//! isoperimetric inequality for symmetric domains, level-set functionals,
//! and the subsolution volume bound.
//!
//! The covering statement: if `u₁` is a radial supersolution, `u₂ > u₁`
//! inside `B_r` with equality on the boundary, and
//! `Δu₂ + e^{2u₂} ≥ Δu₁ + e^{2u₁}` there, then the two conformal areas of
//! `B_r` sum to at least the whole-plane area of `u₁`. Equality holds
//! exactly for complementary spherical caps (bubble pairs `λ`, `1/λ` on the
//! unit disk).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metric::{ConformalMetric, Point2};
use crate::quad::{integrate, total_area, QuadratureConfig};
use crate::radial::{supersolution_check, CubicSpline, RadialProfile};

/// A nested pair of radial profiles on the disk of radius `r`.
#[derive(Debug, Clone)]
pub struct RadialPair {
    pub u1: RadialProfile,
    pub u2: RadialProfile,
    pub r: f64,
}

impl RadialPair {
    pub fn new(u1: RadialProfile, u2: RadialProfile, r: f64) -> Self {
        assert!(r > 0.0);
        RadialPair { u1, u2, r }
    }

    /// Default check grid: interior points of `(0, r)`.
    pub fn interior_grid(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.r * k as f64 / (n + 1) as f64).collect()
    }
}

/// One verified hypothesis flag.
#[derive(Debug, Clone, Copy)]
pub struct Flag {
    pub pass: bool,
    /// The extremal value behind the flag (minimum gap, boundary gap, or
    /// minimum differential margin).
    pub value: f64,
}

/// The three covering hypotheses, checked pointwise.
#[derive(Debug, Clone, Copy)]
pub struct HypothesesReport {
    /// `u₂ > u₁` strictly inside (minimum gap reported).
    pub ordering: Flag,
    /// `u₂ = u₁` on the boundary circle (gap at `r` reported).
    pub boundary: Flag,
    /// `(Δu₂ + e^{2u₂}) - (Δu₁ + e^{2u₁}) ≥ 0` (minimum margin reported).
    pub differential: Flag,
}

impl HypothesesReport {
    pub fn pass(&self) -> bool {
        self.ordering.pass && self.boundary.pass && self.differential.pass
    }
}

fn defect(p: &RadialProfile, rho: f64) -> f64 {
    // Δu + e^{2u}, the quantity the covering hypotheses compare
    -p.supersolution_margin(rho)
}

/// Check the covering hypotheses for `u₂ ≥ u₁` on `grid ⊂ (0, r)`.
pub fn hypotheses_check(pair: &RadialPair, grid: &[f64]) -> HypothesesReport {
    let mut min_gap = f64::INFINITY;
    let mut min_diff = f64::INFINITY;
    for &rho in grid {
        min_gap = min_gap.min(pair.u2.u(rho) - pair.u1.u(rho));
        min_diff = min_diff.min(defect(&pair.u2, rho) - defect(&pair.u1, rho));
    }
    let boundary_gap = (pair.u2.u(pair.r) - pair.u1.u(pair.r)).abs();
    HypothesesReport {
        ordering: Flag {
            pass: min_gap > 0.0,
            value: min_gap,
        },
        boundary: Flag {
            pass: boundary_gap <= 1e-9,
            value: boundary_gap,
        },
        differential: Flag {
            pass: min_diff >= -1e-10,
            value: min_diff,
        },
    }
}

/// Reversed hypotheses for the dual covering inequality
/// (`u₂ < u₁` inside, reversed differential ordering).
pub fn hypotheses_check_dual(pair: &RadialPair, grid: &[f64]) -> HypothesesReport {
    let mut min_gap = f64::INFINITY;
    let mut min_diff = f64::INFINITY;
    for &rho in grid {
        min_gap = min_gap.min(pair.u1.u(rho) - pair.u2.u(rho));
        min_diff = min_diff.min(defect(&pair.u1, rho) - defect(&pair.u2, rho));
    }
    let boundary_gap = (pair.u2.u(pair.r) - pair.u1.u(pair.r)).abs();
    HypothesesReport {
        ordering: Flag {
            pass: min_gap > 0.0,
            value: min_gap,
        },
        boundary: Flag {
            pass: boundary_gap <= 1e-9,
            value: boundary_gap,
        },
        differential: Flag {
            pass: min_diff >= -1e-10,
            value: min_diff,
        },
    }
}

/// Outcome of a covering-sum evaluation.
#[derive(Debug, Clone, Copy)]
pub struct CoveringSum {
    /// `∫_{B_r} e^{2u₁} + ∫_{B_r} e^{2u₂}`
    pub lhs: f64,
    /// `∫_{R²} e^{2u₁}`
    pub rhs: f64,
    pub margin: f64,
}

fn radial_disk_area(p: &RadialProfile, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(integrate(|rho| 2.0 * PI * rho * (2.0 * p.u(rho)).exp(), 0.0, r, cfg)?.value)
}

fn radial_total_area(p: &RadialProfile, cfg: &QuadratureConfig) -> Result<f64> {
    let m = ConformalMetric::Radial(p.clone());
    Ok(total_area(&m, cfg)?.value)
}

fn covering_sum_inner(pair: &RadialPair, cfg: &QuadratureConfig) -> Result<CoveringSum> {
    let lhs = radial_disk_area(&pair.u1, pair.r, cfg)? + radial_disk_area(&pair.u2, pair.r, cfg)?;
    let rhs = radial_total_area(&pair.u1, cfg)?;
    Ok(CoveringSum {
        lhs,
        rhs,
        margin: lhs - rhs,
    })
}

fn require_supersolution(p: &RadialProfile, r: f64) -> Result<()> {
    let grid: Vec<f64> = (0..400).map(|k| 1e-6 + (8.0 * r) * k as f64 / 399.0).collect();
    if !supersolution_check(p, &grid)?.pass {
        return Err(Error::PreconditionFailed(
            "u1 is not a radial supersolution".into(),
        ));
    }
    Ok(())
}

/// The covering sum `∫_{B_r} e^{2u₁} + ∫_{B_r} e^{2u₂} ≥ ∫_{R²} e^{2u₁}`
/// for a pair passing [`hypotheses_check`].
pub fn covering_sum(pair: &RadialPair, cfg: &QuadratureConfig) -> Result<CoveringSum> {
    require_supersolution(&pair.u1, pair.r)?;
    let hyp = hypotheses_check(pair, &pair.interior_grid(800));
    if !hyp.pass() {
        return Err(Error::PreconditionFailed(format!(
            "covering hypotheses failed: {hyp:?}"
        )));
    }
    covering_sum_inner(pair, cfg)
}

/// The dual covering sum, for pairs passing [`hypotheses_check_dual`].
pub fn dual_covering_sum(pair: &RadialPair, cfg: &QuadratureConfig) -> Result<CoveringSum> {
    require_supersolution(&pair.u1, pair.r)?;
    let hyp = hypotheses_check_dual(pair, &pair.interior_grid(800));
    if !hyp.pass() {
        return Err(Error::PreconditionFailed(format!(
            "dual covering hypotheses failed: {hyp:?}"
        )));
    }
    covering_sum_inner(pair, cfg)
}

/// A radially symmetric domain: a finite union of disjoint annuli
/// (a disk is the annulus with inner radius 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDomain {
    /// sorted disjoint `(inner, outer)` pairs
    pieces: Vec<(f64, f64)>,
}

impl RadialDomain {
    pub fn empty() -> Self {
        RadialDomain { pieces: Vec::new() }
    }

    pub fn disk(r: f64) -> Self {
        RadialDomain {
            pieces: vec![(0.0, r)],
        }
    }

    pub fn annulus(inner: f64, outer: f64) -> Self {
        RadialDomain {
            pieces: vec![(inner, outer)],
        }
    }

    /// Build a union, validating that the pieces are sorted and disjoint.
    pub fn union(pieces: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &pieces {
            if !(a >= 0.0 && b > a) {
                return Err(Error::InvalidDomain(format!(
                    "annulus ({a}, {b}) is not a valid interval"
                )));
            }
        }
        for w in pieces.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::InvalidDomain(format!(
                    "annuli ({}, {}) and ({}, {}) overlap or are unsorted",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(RadialDomain { pieces })
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }
}

/// Outcome of the radial isoperimetric comparison
/// `P²(ω) ≥ A(ω)(A_∞ - A(ω))`.
#[derive(Debug, Clone, Copy)]
pub struct IsoperimetricComparison {
    pub perimeter_sq: f64,
    pub area_product: f64,
    pub margin: f64,
}

/// Conformal perimeter and area comparison for a radially symmetric domain
/// under a radial supersolution metric.
pub fn radial_isoperimetric(
    u1: &RadialProfile,
    domain: &RadialDomain,
    cfg: &QuadratureConfig,
) -> Result<IsoperimetricComparison> {
    let far = domain.pieces.last().map(|&(_, b)| b).unwrap_or(1.0);
    require_supersolution(u1, far)?;
    let mut perimeter = 0.0;
    let mut area = 0.0;
    for &(a, b) in &domain.pieces {
        if a > 0.0 {
            perimeter += u1.circle_length(a);
        }
        perimeter += u1.circle_length(b);
        area += integrate(|rho| 2.0 * PI * rho * (2.0 * u1.u(rho)).exp(), a, b, cfg)?.value;
    }
    let a_inf = radial_total_area(u1, cfg)?;
    let perimeter_sq = perimeter * perimeter;
    let area_product = area * (a_inf - area);
    Ok(IsoperimetricComparison {
        perimeter_sq,
        area_product,
        margin: perimeter_sq - area_product,
    })
}

/// Level-set functionals of `u = u₂ - u₁` on `B_r` against the measure
/// `dμ = e^{2u₁} dx`:
/// `β(t) = μ({u > t})` and `α(t) = ∫_{u>t} λ e^{2u} dμ`.
#[derive(Debug, Clone)]
pub struct LevelSetProfile {
    pub t: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: f64,
}

impl LevelSetProfile {
    /// Residuals of the discrete transport relation
    /// `Δα ≈ λ e^{2t} Δβ` between adjacent levels (diagnostic).
    pub fn discrete_relation_residuals(&self) -> Vec<f64> {
        self.t
            .windows(2)
            .zip(self.alpha.windows(2))
            .zip(self.beta.windows(2))
            .map(|((tw, aw), bw)| {
                let t_mid = 0.5 * (tw[0] + tw[1]);
                let dalpha = aw[1] - aw[0];
                let dbeta = bw[1] - bw[0];
                let expected = self.lambda * (2.0 * t_mid).exp() * dbeta;
                let scale = dalpha.abs().max(expected.abs()).max(1e-12);
                (dalpha - expected).abs() / scale
            })
            .collect()
    }
}

/// Locate the superlevel set `{ρ ∈ (0, r): u₂(ρ) - u₁(ρ) > t}` as a union
/// of intervals, by dense sampling plus bisection of each crossing.
fn superlevel_intervals(pair: &RadialPair, t: f64) -> Result<Vec<(f64, f64)>> {
    let gap = |rho: f64| pair.u2.u(rho) - pair.u1.u(rho) - t;
    let n = 4096;
    let xs: Vec<f64> = (0..=n).map(|k| pair.r * k as f64 / n as f64).collect();
    let mut crossings = Vec::new();
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (gap(a) > 0.0) != (gap(b) > 0.0) {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (gap(lo) > 0.0) != (gap(mid) > 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            crossings.push(0.5 * (lo + hi));
            if crossings.len() > 64 {
                return Err(Error::ResolutionExceeded(format!(
                    "more than 64 level crossings at t = {t}"
                )));
            }
        }
    }
    let mut intervals = Vec::new();
    let mut start = if gap(0.0) > 0.0 { Some(0.0) } else { None };
    for &c in &crossings {
        match start {
            Some(s) => {
                intervals.push((s, c));
                start = None;
            }
            None => start = Some(c),
        }
    }
    if let Some(s) = start {
        intervals.push((s, pair.r));
    }
    Ok(intervals)
}

/// Compute the level-set profile on `t_grid` with `h(u) = λ e^{2u}`.
pub fn level_set_profile(
    pair: &RadialPair,
    lambda: f64,
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<LevelSetProfile> {
    let mut alpha = Vec::with_capacity(t_grid.len());
    let mut beta = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let intervals = superlevel_intervals(pair, t)?;
        let mut b = 0.0;
        let mut a = 0.0;
        for &(lo, hi) in &intervals {
            b += integrate(
                |rho| 2.0 * PI * rho * (2.0 * pair.u1.u(rho)).exp(),
                lo,
                hi,
                cfg,
            )?
            .value;
            // λ e^{2u} dμ = λ e^{2u₂} dx
            a += lambda
                * integrate(
                    |rho| 2.0 * PI * rho * (2.0 * pair.u2.u(rho)).exp(),
                    lo,
                    hi,
                    cfg,
                )?
                .value;
        }
        alpha.push(a);
        beta.push(b);
    }
    Ok(LevelSetProfile {
        t: t_grid.to_vec(),
        alpha,
        beta,
        lambda,
    })
}

/// Subsolution volume verdict: a pointwise-verified subsolution has total
/// conformal area at least `4π` (divergent volume satisfies the bound
/// vacuously).
#[derive(Debug, Clone, Copy)]
pub struct SubsolutionVolume {
    pub volume: Option<f64>,
    /// `volume - 4π` when the volume converged.
    pub margin: Option<f64>,
    pub divergent: bool,
    pub pass: bool,
}

/// Verify `Δu + e^{2u} ≥ 0` on a sample grid, then compare the total
/// conformal area against `4π`.
pub fn subsolution_volume_check(
    m: &ConformalMetric,
    cfg: &QuadratureConfig,
) -> Result<SubsolutionVolume> {
    match m {
        ConformalMetric::Radial(p) => {
            let grid: Vec<f64> = (0..500).map(|k| 1e-6 + 12.0 * k as f64 / 499.0).collect();
            let worst = grid
                .iter()
                .map(|&r| -p.supersolution_margin(r))
                .fold(f64::INFINITY, f64::min);
            if worst < -1e-10 {
                return Err(Error::PreconditionFailed(format!(
                    "not a subsolution: Δu + e^{{2u}} dips to {worst:.3e}"
                )));
            }
        }
        ConformalMetric::FromDeveloping(s) => {
            // exact solutions satisfy the subsolution inequality with
            // equality; verified here through the finite-difference residual
            for (x, y) in [(0.0, 0.0), (0.8, -0.4), (-1.1, 1.3), (2.0, 2.0)] {
                let r = s.pde_residual(x, y, 1e-3);
                if r < -1e-4 {
                    return Err(Error::PreconditionFailed(format!(
                        "residual {r:.3e} at ({x}, {y}) violates the subsolution sign"
                    )));
                }
            }
        }
        ConformalMetric::Builtin(_) => {
            return Err(Error::PreconditionFailed(
                "subsolution check needs a radial or developing-function metric".into(),
            ))
        }
    }
    match total_area(m, cfg) {
        Ok(v) => {
            let margin = v.value - 4.0 * PI;
            Ok(SubsolutionVolume {
                volume: Some(v.value),
                margin: Some(margin),
                divergent: false,
                pass: margin >= -1e-8,
            })
        }
        Err(Error::DivergentIntegral(_)) => Ok(SubsolutionVolume {
            volume: None,
            margin: None,
            divergent: true,
            pass: true,
        }),
        Err(e) => Err(e),
    }
}

/// Principal Dirichlet eigenpair of `Δ + V` on `B_r` for a radial
/// potential, by shooting with bisection on the eigenvalue.
///
/// Returns `(μ₁, ψ)` with `ψ > 0` inside, `ψ(0) = 1`, `ψ(r) ≈ 0`, sampled
/// on a uniform grid of `steps + 1` points.
fn principal_eigenpair(
    v: impl Fn(f64) -> f64,
    r: f64,
    steps: usize,
) -> (f64, Vec<f64>) {
    // ψ'' + ψ'/ρ + V ψ = μ ψ, started from the regular series at ρ ≈ 0
    let shoot = |mu: f64, record: Option<&mut Vec<f64>>| -> bool {
        let h = r / steps as f64;
        let rho0 = 1e-9 * r;
        let mut psi = 1.0 + (mu - v(0.0)) * rho0 * rho0 / 4.0;
        let mut dpsi = (mu - v(0.0)) * rho0 / 2.0;
        let mut crossed = false;
        let mut trace = record;
        if let Some(tr) = trace.as_deref_mut() {
            tr.clear();
            tr.push(1.0);
        }
        let f = |rho: f64, y: f64, dy: f64| (mu - v(rho)) * y - dy / rho;
        let mut rho = rho0;
        for k in 0..steps {
            let target = (k + 1) as f64 * h;
            let step = target - rho;
            // one RK4 step per grid interval
            let k1y = dpsi;
            let k1d = f(rho, psi, dpsi);
            let k2y = dpsi + 0.5 * step * k1d;
            let k2d = f(rho + 0.5 * step, psi + 0.5 * step * k1y, dpsi + 0.5 * step * k1d);
            let k3y = dpsi + 0.5 * step * k2d;
            let k3d = f(rho + 0.5 * step, psi + 0.5 * step * k2y, dpsi + 0.5 * step * k2d);
            let k4y = dpsi + step * k3d;
            let k4d = f(rho + step, psi + step * k3y, dpsi + step * k3d);
            psi += step / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            dpsi += step / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            rho = target;
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(psi);
            }
            if psi <= 0.0 {
                crossed = true;
                if trace.is_none() {
                    break;
                }
            }
        }
        crossed
    };

    // crossing before r means μ < μ₁
    let mut lo = -60.0;
    let mut hi = 60.0;
    debug_assert!(shoot(lo, None) && !shoot(hi, None));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid, None) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = hi;
    let mut trace = Vec::with_capacity(steps + 1);
    shoot(mu, Some(&mut trace));
    (0.5 * (lo + hi), trace)
}

/// Which side of the covering inequality a constructed pair exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// `u₂ = u₁ + εψ` with all hypotheses strict.
    Primal,
    /// `u₂ = u₁ - εψ` with the reversed hypotheses strict.
    Dual,
}

/// A deterministically constructed strict covering pair.
#[derive(Debug, Clone)]
pub struct StrictPair {
    pub pair: RadialPair,
    pub kind: PairKind,
    /// Principal eigenvalue of `Δ + 2e^{2u₁}` on the disk used.
    pub eigenvalue: f64,
    /// Bump amplitude `ε`.
    pub amplitude: f64,
}

/// Construct a strict covering pair deterministically.
///
/// The bump direction is the principal Dirichlet eigenfunction `ψ₁` of the
/// linearized operator `Δ + 2e^{2u₁}` on `B_r`, with `r` chosen so the
/// eigenvalue `μ₁` is positive. For the primal pair, convexity of the
/// exponential makes `u₁ + εψ₁` satisfy the strict hypotheses for any
/// `ε > 0`; for the dual pair a small `ε` is required and is scanned
/// downward until the hypotheses verify.
pub fn construct_strict_pair(kind: PairKind) -> Result<StrictPair> {
    let (u1, radii): (RadialProfile, &[f64]) = match kind {
        PairKind::Primal => (RadialProfile::bubble_shifted(1.0, 0.2), &[3.0, 4.0, 6.0]),
        PairKind::Dual => (RadialProfile::bubble(2.0), &[2.0, 3.0]),
    };
    let steps = 4000;
    for &r in radii {
        let potential = {
            let u1 = u1.clone();
            move |rho: f64| 2.0 * (2.0 * u1.u(rho)).exp()
        };
        let (mu, psi) = principal_eigenpair(potential, r, steps);
        if mu <= 1e-3 {
            continue;
        }
        let amplitudes: &[f64] = match kind {
            PairKind::Primal => &[0.5],
            PairKind::Dual => &[0.05, 0.025, 0.0125, 0.00625],
        };
        for &eps in amplitudes {
            // force the boundary knot to exact equality; ψ(r) from the
            // shooting residual is already ~1e-9
            let psi_r = *psi.last().unwrap();
            let h = r / steps as f64;
            let sign = match kind {
                PairKind::Primal => 1.0,
                PairKind::Dual => -1.0,
            };
            let knots: Vec<(f64, f64)> = (0..=steps)
                .map(|k| {
                    let rho = k as f64 * h;
                    let bump = psi[k] - psi_r * (rho / r) * (rho / r);
                    (rho, u1.u(rho) + sign * eps * bump)
                })
                .collect();
            let dpsi_end = (psi[steps] - psi[steps - 1]) / h - 2.0 * psi_r / r;
            let spline = CubicSpline::new(
                &knots,
                Some((0.0, u1.du(r) + sign * eps * dpsi_end)),
            )?;
            let pair = RadialPair::new(u1.clone(), RadialProfile::TabulatedSpline(spline), r);
            let grid = pair.interior_grid(800);
            let ok = match kind {
                PairKind::Primal => hypotheses_check(&pair, &grid).pass(),
                PairKind::Dual => hypotheses_check_dual(&pair, &grid).pass(),
            };
            if ok {
                return Ok(StrictPair {
                    pair,
                    kind,
                    eigenvalue: mu,
                    amplitude: eps,
                });
            }
        }
    }
    Err(Error::CertificateFailed(
        "no strict pair construction passed the hypotheses".into(),
    ))
}
