//! Two-sided estimation of conformal distances and diameters.
//!
//! Lower bounds are certified: pushing both endpoints to the unit sphere
//! through `Π⁻¹ ∘ f` turns the image distance into a bound the conformal
//! length of every connecting curve must respect. Upper bounds are
//! numerical: shortest paths on a weighted grid graph (an upper bound by
//! definition of the infimum) plus local path refinement. The diameter is
//! never claimed exact; the module only reports certified lower / numerical
//! upper pairs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{pushforward, sphere_distance, ConformalMetric, Point2, SpherePoint};
use crate::quad::{
    curve_length, horizontal_mass, integrate, vertical_mass, Curve, QuadResult, QuadratureConfig,
};
use crate::radial;

/// How a reported lower bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundKind {
    SpherePullback,
    TopologicalCertificate,
    Trivial,
}

/// A two-sided distance estimate with its witness path.
#[derive(Debug, Clone)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<Point2>,
    pub lower_kind: LowerBoundKind,
}

/// Grid graph parameters for the shortest-path upper bound.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub stencil: StencilOrder,
}

/// Neighbor stencil: 8 axis/diagonal moves, or 16 with knight moves, which
/// cuts the worst-case metrication overestimate from ~8% to ~2.8%.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Eight,
    Sixteen,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Self {
        assert!(nx >= 2 && ny >= 2, "grid needs at least 2 nodes per axis");
        assert!(x_max > x_min && y_max > y_min);
        GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
            stencil: StencilOrder::Sixteen,
        }
    }

    pub fn with_stencil(mut self, stencil: StencilOrder) -> Self {
        self.stencil = stencil;
        self
    }

    fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    fn node(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.x_min + i as f64 * self.dx(),
            self.y_min + j as f64 * self.dy(),
        )
    }

    fn contains(&self, p: Point2) -> bool {
        let eps_x = 1e-9 * self.dx();
        let eps_y = 1e-9 * self.dy();
        p.x >= self.x_min - eps_x
            && p.x <= self.x_max + eps_x
            && p.y >= self.y_min - eps_y
            && p.y <= self.y_max + eps_y
    }

    fn offsets(&self) -> &'static [(i64, i64)] {
        const EIGHT: &[(i64, i64)] = &[(1, 0), (0, 1), (1, 1), (1, -1)];
        const SIXTEEN: &[(i64, i64)] = &[
            (1, 0),
            (0, 1),
            (1, 1),
            (1, -1),
            (2, 1),
            (1, 2),
            (2, -1),
            (1, -2),
        ];
        match self.stencil {
            StencilOrder::Eight => EIGHT,
            StencilOrder::Sixteen => SIXTEEN,
        }
    }
}

/// Certified conformal-distance lower bound from the sphere pullback:
/// `d_g(P, Q) ≥ d_{S²}(Π⁻¹ f(P), Π⁻¹ f(Q))`, since the image of any
/// connecting curve covers each of its points with multiplicity at least 1.
pub fn sphere_lower_bound(m: &ConformalMetric, p: Point2, q: Point2) -> Result<f64> {
    let f = m.developing().ok_or_else(|| {
        Error::PreconditionFailed("sphere pullback needs a developing-function metric".into())
    })?;
    Ok(sphere_distance(pushforward(f, p), pushforward(f, q)))
}

struct HeapEntry {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // reversed so the BinaryHeap pops the smallest distance; ties broken by
    // node index for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

fn segment_length(
    m: &ConformalMetric,
    a: Point2,
    b: Point2,
    cfg: &QuadratureConfig,
) -> f64 {
    let len = (b.x - a.x).hypot(b.y - a.y);
    if len == 0.0 {
        return 0.0;
    }
    let integrand =
        |t: f64| m.factor(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))) * len;
    match integrate(integrand, 0.0, 1.0, cfg) {
        Ok(r) => r.value,
        Err(Error::ToleranceNotMet { best, .. }) => best,
        Err(_) => f64::INFINITY,
    }
}

/// Result of the grid shortest-path search.
#[derive(Debug, Clone)]
pub struct GridPath {
    /// Conformal length of the witness, re-integrated at full tolerance.
    pub upper: QuadResult,
    pub witness: Vec<Point2>,
}

/// Numerical distance upper bound: Dijkstra over grid nodes with conformal
/// segment lengths as edge weights, endpoints attached as extra nodes.
/// The returned length is the quadrature length of the witness polyline.
pub fn grid_distance_upper(
    m: &ConformalMetric,
    p: Point2,
    q: Point2,
    grid: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<GridPath> {
    for pt in [p, q] {
        if !grid.contains(pt) {
            return Err(Error::OutsideGrid { x: pt.x, y: pt.y });
        }
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let n_grid = nx * ny;
    let offsets = grid.offsets();

    // edge weights never need more precision than the path selection they
    // steer; the witness is re-integrated at full tolerance afterwards
    let edge_cfg = QuadratureConfig {
        rel_tol: cfg.rel_tol.max(1e-7),
        abs_tol: cfg.abs_tol.max(1e-10),
        max_subdivisions: 12,
        ..*cfg
    };

    // per-offset weight planes, computed in parallel over source nodes
    let planes: Vec<Vec<f64>> = offsets
        .iter()
        .map(|&(di, dj)| {
            (0..n_grid)
                .into_par_iter()
                .map(|idx| {
                    let i = idx % nx;
                    let j = idx / nx;
                    let i2 = i as i64 + di;
                    let j2 = j as i64 + dj;
                    if i2 < 0 || i2 >= nx as i64 || j2 < 0 || j2 >= ny as i64 {
                        f64::INFINITY
                    } else {
                        segment_length(
                            m,
                            grid.node(i, j),
                            grid.node(i2 as usize, j2 as usize),
                            &edge_cfg,
                        )
                    }
                })
                .collect()
        })
        .collect();

    // endpoint attachment: each virtual node connects to the grid nodes in a
    // 5x5 block around its cell
    let attach = |pt: Point2| -> Vec<(u32, f64)> {
        let ci = ((pt.x - grid.x_min) / grid.dx()).floor() as i64;
        let cj = ((pt.y - grid.y_min) / grid.dy()).floor() as i64;
        let mut links = Vec::new();
        for i in ci - 2..=ci + 2 {
            for j in cj - 2..=cj + 2 {
                if i < 0 || i >= nx as i64 || j < 0 || j >= ny as i64 {
                    continue;
                }
                let node = (j as usize * nx + i as usize) as u32;
                let w = segment_length(m, pt, grid.node(i as usize, j as usize), &edge_cfg);
                links.push((node, w));
            }
        }
        links
    };
    let p_links = attach(p);
    let q_links = attach(q);
    let source = n_grid as u32;
    let target = source + 1;
    let n_total = n_grid + 2;

    let mut dist = vec![f64::INFINITY; n_total];
    let mut pred = vec![u32::MAX; n_total];
    let mut settled = vec![false; n_total];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        node: source,
    });

    let mut relax = |heap: &mut BinaryHeap<HeapEntry>,
                     dist: &mut [f64],
                     pred: &mut [u32],
                     from: u32,
                     to: u32,
                     w: f64| {
        let nd = dist[from as usize] + w;
        if nd < dist[to as usize] {
            dist[to as usize] = nd;
            pred[to as usize] = from;
            heap.push(HeapEntry { dist: nd, node: to });
        }
    };

    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if settled[node as usize] || d > dist[node as usize] {
            continue;
        }
        settled[node as usize] = true;
        if node == target {
            break;
        }
        if node == source {
            for &(to, w) in &p_links {
                relax(&mut heap, &mut dist, &mut pred, node, to, w);
            }
            continue;
        }
        let idx = node as usize;
        let i = (idx % nx) as i64;
        let j = (idx / nx) as i64;
        for (k, &(di, dj)) in offsets.iter().enumerate() {
            // forward edge
            let (i2, j2) = (i + di, j + dj);
            if i2 >= 0 && i2 < nx as i64 && j2 >= 0 && j2 < ny as i64 {
                let to = (j2 as usize * nx + i2 as usize) as u32;
                relax(&mut heap, &mut dist, &mut pred, node, to, planes[k][idx]);
            }
            // reverse edge, weight stored at the other endpoint
            let (i0, j0) = (i - di, j - dj);
            if i0 >= 0 && i0 < nx as i64 && j0 >= 0 && j0 < ny as i64 {
                let from_idx = j0 as usize * nx + i0 as usize;
                relax(
                    &mut heap,
                    &mut dist,
                    &mut pred,
                    node,
                    from_idx as u32,
                    planes[k][from_idx],
                );
            }
        }
        // virtual target links (sparse, so scanned rather than indexed)
        for &(gnode, w) in &q_links {
            if gnode == node {
                relax(&mut heap, &mut dist, &mut pred, node, target, w);
            }
        }
    }

    if !dist[target as usize].is_finite() {
        return Err(Error::BoundNotApplicable(
            "no grid path connected the endpoints".into(),
        ));
    }

    let mut nodes = Vec::new();
    let mut cur = target;
    while cur != source {
        nodes.push(cur);
        cur = pred[cur as usize];
    }
    nodes.push(source);
    nodes.reverse();
    let witness: Vec<Point2> = nodes
        .iter()
        .map(|&n| {
            if n == source {
                p
            } else if n == target {
                q
            } else {
                grid.node(n as usize % nx, n as usize / nx)
            }
        })
        .collect();

    let upper = curve_length(
        m,
        &Curve::Polyline {
            points: witness.clone(),
        },
        cfg,
    )?;
    Ok(GridPath { upper, witness })
}

/// Iterated local vertex optimization: each interior vertex is moved by a
/// derivative-free pattern search minimizing the two adjacent segment
/// lengths, until the relative length decrease per sweep drops below 1e-8.
/// The returned path is never longer than the input.
pub fn refine_path(m: &ConformalMetric, path: &[Point2], cfg: &QuadratureConfig) -> Vec<Point2> {
    assert!(path.len() >= 3, "refinement needs at least 3 vertices");
    let mut pts = path.to_vec();
    let pair_cost = |a: Point2, v: Point2, b: Point2| {
        segment_length(m, a, v, cfg) + segment_length(m, v, b, cfg)
    };
    let total = |pts: &[Point2]| {
        pts.windows(2)
            .map(|w| segment_length(m, w[0], w[1], cfg))
            .sum::<f64>()
    };
    let mut length = total(&pts);
    for _sweep in 0..100 {
        let mut max_move = 0.0f64;
        for i in 1..pts.len() - 1 {
            let (a, b) = (pts[i - 1], pts[i + 1]);
            let mut v = pts[i];
            let mut cost = pair_cost(a, v, b);
            let scale = ((b.x - a.x).hypot(b.y - a.y)).max(1e-12);
            // step floor 1e-6·scale keeps the vertex within O(h²) ~ 1e-12
            // of the local optimum in length terms
            let mut h = 0.25 * scale;
            while h > 1e-6 * scale {
                let mut improved = false;
                for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                    let cand = Point2::new(v.x + dx, v.y + dy);
                    let c = pair_cost(a, cand, b);
                    if c < cost {
                        v = cand;
                        cost = c;
                        improved = true;
                    }
                }
                if !improved {
                    h *= 0.5;
                }
            }
            max_move = max_move.max((v.x - pts[i].x).hypot(v.y - pts[i].y) / scale);
            pts[i] = v;
        }
        let new_length = total(&pts);
        let decrease = (length - new_length) / length.max(1e-300);
        length = new_length;
        if decrease < 1e-8 || max_move < 1e-5 {
            break;
        }
    }
    pts
}

/// Diameter upper bound for strip-type metrics by the rectangle
/// construction: any two points connect through two horizontal lines plus
/// vanishing vertical connectors, so the diameter is at most the supremum
/// over `y` of the horizontal mass.
///
/// Preconditions verified numerically: the conformal factor is `2π`-periodic
/// in `y` and the vertical connectors vanish as `|x| → ∞`.
pub fn strip_diameter_upper(m: &ConformalMetric, cfg: &QuadratureConfig) -> Result<f64> {
    // periodicity check, so one period of y covers the supremum
    for (x, y) in [(0.0, 0.4), (-1.3, -2.0), (2.0, 1.1)] {
        let gap = (m.u(Point2::new(x, y)) - m.u(Point2::new(x, y + 2.0 * PI))).abs();
        if gap > 1e-9 {
            return Err(Error::BoundNotApplicable(format!(
                "factor not 2π-periodic in y (gap {gap:.2e})"
            )));
        }
    }
    // vanishing vertical connectors
    let mut prev = f64::INFINITY;
    for x_abs in [10.0, 20.0, 40.0] {
        let mut worst = 0.0f64;
        for x in [-x_abs, x_abs] {
            let v = vertical_mass(m, x, -PI, PI, cfg)?.value;
            worst = worst.max(v);
        }
        if worst > prev {
            return Err(Error::BoundNotApplicable(
                "vertical connectors are not vanishing".into(),
            ));
        }
        prev = worst;
    }
    if prev > 1e-6 {
        return Err(Error::BoundNotApplicable(format!(
            "vertical connector still {prev:.2e} at |x| = 40"
        )));
    }

    // sample one period, then polish around the best sample
    let n = 512;
    let masses: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let y = -PI + 2.0 * PI * k as f64 / n as f64;
            horizontal_mass(m, y, cfg).map(|r| r.value).unwrap_or(f64::NAN)
        })
        .collect();
    if masses.iter().any(|v| v.is_nan()) {
        return Err(Error::BoundNotApplicable(
            "horizontal mass failed inside the sampled period".into(),
        ));
    }
    let best = (0..n)
        .max_by(|&a, &b| masses[a].total_cmp(&masses[b]))
        .unwrap();
    let step = 2.0 * PI / n as f64;
    let y_best = -PI + step * best as f64;
    let eval = |y: f64| horizontal_mass(m, y, cfg).map(|r| r.value);

    // golden-section maximization on [y_best - step, y_best + step]
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (y_best - step, y_best + step);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1)?;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(masses[best].max(f1).max(f2))
}

/// Diameter certificate for the `t + e^z` family.
#[derive(Debug, Clone, Copy)]
pub struct DiameterCertificate {
    pub t: f64,
    /// Abscissa of the witness pair `(a, ±π)`.
    pub a: f64,
    /// Certified lower bound `π + 2 arctan t` (re-verified numerically).
    pub lower: f64,
    /// Strip-construction upper bound.
    pub upper: f64,
}

/// Certify `diam = π + 2 arctan t` for the metric of `f = t + e^z`.
///
/// The witness pair is `(a, ±π)` with `e^a - t = tan(π/4 - arctan(t)/2)`.
/// The lower bound follows from the sphere pullback: every connecting curve
/// crosses the x-axis, and for each crossing angle `β ∈ (arctan t, π/2)` the
/// sphere separation is at least `π/2 + arctan t`; this inequality is
/// re-verified on a sampled β grid before the bound is returned.
pub fn affine_exp_diameter_certificate(
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<DiameterCertificate> {
    assert!(t >= 0.0);
    let alpha = t.atan();
    let a = (t + (PI / 4.0 - alpha / 2.0).tan()).ln();

    // angle verification: θ(β) = angle between (-cos α, 0, -sin α) and
    // (sin 2β, 0, -cos 2β) must be at least π/2 + α
    let samples = 256;
    for k in 1..=samples {
        let beta = alpha + (FRAC_PI_2 - alpha) * k as f64 / (samples + 1) as f64;
        let a_pt = SpherePoint::new(-alpha.cos(), 0.0, -alpha.sin());
        let b_pt = SpherePoint::new((2.0 * beta).sin(), 0.0, -(2.0 * beta).cos());
        let theta = sphere_distance(a_pt, b_pt);
        if theta < FRAC_PI_2 + alpha - 1e-12 {
            return Err(Error::CertificateFailed(format!(
                "crossing angle θ = {theta} below π/2 + α at β = {beta}"
            )));
        }
    }
    let lower = PI + 2.0 * alpha;
    let metric = ConformalMetric::from_function(crate::devfn::DevelopingFunction::affine_exp(t));
    let upper = strip_diameter_upper(&metric, cfg)?;
    Ok(DiameterCertificate { t, a, lower, upper })
}

/// The witness pair for [`affine_exp_diameter_certificate`].
pub fn affine_exp_witness_pair(t: f64) -> (Point2, Point2) {
    let alpha = t.atan();
    let a = (t + (PI / 4.0 - alpha / 2.0).tan()).ln();
    (Point2::new(a, PI), Point2::new(a, -PI))
}

/// Certified `2π` lower bound for the `e^{e^z}` metric between
/// `P = (ln π, π/2)` and `Q = (ln π, -3π/2)`.
///
/// Any connecting curve crosses `y = 0` at some `(b, 0)` and `y = -π` at
/// some `(c, -π)`. The images sit on the meridian `Y = 0`: `P` maps to
/// `(-1, 0, 0)`, the `y = 0` crossing to the open arc with `Z > 0`, the
/// `y = -π` crossing to the open arc with `Z < 0`, and the three legs of
/// the image curve always sum to `2π`. All three placements and the sum are
/// verified for crossing abscissae sampled in `[-10, 10]`.
pub fn expexp_certificate() -> Result<f64> {
    let f = crate::devfn::DevelopingFunction::exp_exp();
    let p_img = pushforward(&f, Point2::new(PI.ln(), FRAC_PI_2));
    let q_img = pushforward(&f, Point2::new(PI.ln(), -1.5 * PI));
    for (name, img) in [("P", p_img), ("Q", q_img)] {
        let err = (img.x + 1.0).abs() + img.y.abs() + img.z.abs();
        if err > 1e-9 {
            return Err(Error::CertificateFailed(format!(
                "{name} does not map to (-1, 0, 0): off by {err:.2e}"
            )));
        }
    }
    // For large |b| the image magnitude e^{±e^b} leaves the floating range
    // and the sphere point rounds to the exact arc endpoint; analytically f
    // stays on the open arc (x > 0), so the placement check admits x = 0
    // only at those rounded endpoints.
    let n = 41;
    let abscissa = |k: usize| -10.0 + 20.0 * k as f64 / (n - 1) as f64;
    let mut upper_arc = Vec::with_capacity(n);
    let mut lower_arc = Vec::with_capacity(n);
    for k in 0..n {
        let b = abscissa(k);
        let img = pushforward(&f, Point2::new(b, 0.0));
        let at_endpoint = img.x == 0.0 && img.z == 1.0;
        if !(img.y.abs() <= 1e-12 && img.z > 0.0 && (img.x > 0.0 || at_endpoint)) {
            return Err(Error::CertificateFailed(format!(
                "y = 0 crossing at b = {b} not on the upper open arc: {img:?}"
            )));
        }
        upper_arc.push(img);
        let c = abscissa(k);
        let img = pushforward(&f, Point2::new(c, -PI));
        let at_endpoint = img.x == 0.0 && img.z == -1.0;
        if !(img.y.abs() <= 1e-12 && img.z < 0.0 && (img.x > 0.0 || at_endpoint)) {
            return Err(Error::CertificateFailed(format!(
                "y = -π crossing at c = {c} not on the lower open arc: {img:?}"
            )));
        }
        lower_arc.push(img);
    }
    // The middle leg can be nearly antipodal, where the arccos form loses
    // half the mantissa; the sum check uses the atan2 form instead.
    let stable_distance = |a: SpherePoint, b: SpherePoint| {
        let cross = (
            a.y * b.z - a.z * b.y,
            a.z * b.x - a.x * b.z,
            a.x * b.y - a.y * b.x,
        );
        let sin = (cross.0 * cross.0 + cross.1 * cross.1 + cross.2 * cross.2).sqrt();
        sin.atan2(a.dot(&b))
    };
    for p1 in &upper_arc {
        for p2 in &lower_arc {
            let total = stable_distance(p_img, *p1)
                + stable_distance(*p1, *p2)
                + stable_distance(*p2, p_img);
            if (total - 2.0 * PI).abs() > 1e-12 {
                return Err(Error::CertificateFailed(format!(
                    "leg sum {total} differs from 2π"
                )));
            }
        }
    }
    Ok(2.0 * PI)
}

/// Diameter upper bound for a radial finite-volume metric via the escape
/// construction (radial rays out to a circle of vanishing length).
/// For radial supersolutions the result is at most `π` up to tolerance.
pub fn escape_diameter_upper(m: &ConformalMetric, cfg: &QuadratureConfig) -> Result<f64> {
    let profile = m.radial_profile().ok_or_else(|| {
        Error::PreconditionFailed("escape bound needs a radial metric".into())
    })?;
    let report = radial::compute_report(profile, cfg)?;
    radial::diameter_upper_bound(profile, &report, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devfn::DevelopingFunction;
    use crate::radial::RadialProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a}");
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn bubble_metric() -> ConformalMetric {
        ConformalMetric::from_function(DevelopingFunction::bubble(1.0))
    }

    #[test]
    fn sphere_lower_bound_coincident_points() {
        let m = bubble_metric();
        let p = Point2::new(0.3, -0.2);
        assert_eq!(sphere_lower_bound(&m, p, p).unwrap(), 0.0);
    }

    #[test]
    fn sphere_lower_bound_affine_exp_pair() {
        // P = (a, π) maps to (-√2/2, 0, -√2/2), Q = (0, 0) maps to
        // Π⁻¹(2) = (4/5, 0, 3/5); the oracle is the arccos of their dot
        // product, which also dominates the 3π/4 angle bound.
        let m = ConformalMetric::from_function(DevelopingFunction::affine_exp(1.0));
        let a = (1.0 + (PI / 8.0).tan()).ln();
        let lower = sphere_lower_bound(&m, Point2::new(a, PI), Point2::new(0.0, 0.0)).unwrap();
        let dot: f64 = -(2f64.sqrt()) / 2.0 * (4.0 / 5.0) + -(2f64.sqrt()) / 2.0 * (3.0 / 5.0);
        assert_close(lower, dot.acos(), 1e-12);
        assert!(lower >= 3.0 * PI / 4.0);
    }

    #[test]
    fn sphere_lower_bound_vanishes_for_coinciding_images() {
        // the e^{e^z} metric maps both points to -1, so this bound alone
        // cannot separate them; the topological certificate is needed
        let m = ConformalMetric::from_function(DevelopingFunction::exp_exp());
        let lower = sphere_lower_bound(
            &m,
            Point2::new(PI.ln(), FRAC_PI_2),
            Point2::new(PI.ln(), -1.5 * PI),
        )
        .unwrap();
        assert!(lower <= 1e-7, "images should coincide, got {lower}");
    }

    #[test]
    fn grid_distance_upper_bubble_radial_geodesic() {
        // d((0,0), (1,0)) = ∫₀¹ 2/(1+ρ²) dρ = π/2 on the unit bubble
        let m = bubble_metric();
        let grid = GridSpec::new(-0.3, 1.3, -0.6, 0.6, 121, 91);
        let path = grid_distance_upper(&m, Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), &grid, &cfg())
            .unwrap();
        let exact = FRAC_PI_2;
        assert!(path.upper.value >= exact - 1e-9, "upper bound below the true distance");
        assert!(
            path.upper.value <= exact * 1.02,
            "grid bound {} more than 2% above π/2",
            path.upper.value
        );
    }

    #[test]
    fn grid_distance_upper_coincident_points() {
        let m = bubble_metric();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 21, 21);
        let p = Point2::new(0.1, 0.2);
        let path = grid_distance_upper(&m, p, p, &grid, &cfg()).unwrap();
        assert!(path.upper.value <= 1e-9);
    }

    #[test]
    fn grid_distance_rejects_outside_points() {
        let m = bubble_metric();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 21, 21);
        assert!(matches!(
            grid_distance_upper(&m, Point2::new(3.0, 0.0), Point2::new(0.0, 0.0), &grid, &cfg()),
            Err(Error::OutsideGrid { .. })
        ));
    }

    #[test]
    fn grid_refinement_is_monotone() {
        // nested refinement (2n-1 nodes) can only shorten the best path
        let m = bubble_metric();
        let p = Point2::new(-0.8, -0.5);
        let q = Point2::new(0.9, 0.7);
        let coarse = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 41, 41);
        let fine = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 81, 81);
        let lc = grid_distance_upper(&m, p, q, &coarse, &cfg()).unwrap();
        let lf = grid_distance_upper(&m, p, q, &fine, &cfg()).unwrap();
        assert!(
            lf.upper.value
                <= lc.upper.value + lc.upper.error_estimate + lf.upper.error_estimate + 1e-9
        );
    }

    #[test]
    fn refine_path_keeps_geodesic_fixed() {
        // a straight radial segment is a geodesic of the bubble; refinement
        // must not move its length by more than the stop tolerance
        let m = bubble_metric();
        let path: Vec<Point2> = (0..=10)
            .map(|k| Point2::new(k as f64 / 10.0, 0.0))
            .collect();
        let before = curve_length(&m, &Curve::Polyline { points: path.clone() }, &cfg())
            .unwrap()
            .value;
        let refined = refine_path(&m, &path, &cfg());
        let after = curve_length(&m, &Curve::Polyline { points: refined }, &cfg())
            .unwrap()
            .value;
        assert!(after <= before + 1e-12);
        assert!((before - after) / before <= 1e-6);
    }

    #[test]
    fn refine_path_recovers_zigzag() {
        let m = bubble_metric();
        let exact = FRAC_PI_2;
        let search_cfg = QuadratureConfig {
            rel_tol: 1e-7,
            abs_tol: 1e-9,
            ..cfg()
        };
        let zigzag: Vec<Point2> = (0..=16)
            .map(|k| {
                let x = k as f64 / 16.0;
                let y = if k % 2 == 0 { 0.08 } else { -0.08 };
                Point2::new(x, if k == 0 || k == 16 { 0.0 } else { y })
            })
            .collect();
        let before = curve_length(&m, &Curve::Polyline { points: zigzag.clone() }, &cfg())
            .unwrap()
            .value;
        let refined = refine_path(&m, &zigzag, &search_cfg);
        let after = curve_length(&m, &Curve::Polyline { points: refined }, &cfg())
            .unwrap()
            .value;
        let gap_before = before - exact;
        let gap_after = after - exact;
        assert!(gap_after >= -1e-9, "refined path beat the geodesic");
        assert!(
            gap_after <= gap_before / 10.0,
            "gap only improved {gap_before} -> {gap_after}"
        );
    }

    #[test]
    fn refine_path_never_lengthens() {
        let m = bubble_metric();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let loose = QuadratureConfig {
            rel_tol: 1e-5,
            abs_tol: 1e-7,
            ..cfg()
        };
        for _ in 0..100 {
            let pts: Vec<Point2> = (0..4)
                .map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let before = curve_length(&m, &Curve::Polyline { points: pts.clone() }, &loose)
                .unwrap()
                .value;
            let refined = refine_path(&m, &pts, &loose);
            let after = curve_length(&m, &Curve::Polyline { points: refined }, &loose)
                .unwrap()
                .value;
            assert!(after <= before + 1e-6 * before.max(1.0));
        }
    }

    #[test]
    fn strip_diameter_upper_values() {
        for (t, expected) in [(0.0, PI), (1.0, 1.5 * PI), (5.0, PI + 2.0 * 5f64.atan())] {
            let m = ConformalMetric::from_function(DevelopingFunction::affine_exp(t));
            let got = strip_diameter_upper(&m, &cfg()).unwrap();
            assert_close(got, expected, 1e-6);
        }
    }

    #[test]
    fn strip_bound_rejects_nonperiodic_metric() {
        assert!(matches!(
            strip_diameter_upper(&bubble_metric(), &cfg()),
            Err(Error::BoundNotApplicable(_))
        ));
    }

    #[test]
    fn diameter_certificate_examples() {
        let c0 = affine_exp_diameter_certificate(0.0, &cfg()).unwrap();
        assert_close(c0.a, 0.0, 1e-15);
        assert_close(c0.lower, PI, 1e-15);
        assert_close(c0.upper, PI, 1e-6);

        let c1 = affine_exp_diameter_certificate(1.0, &cfg()).unwrap();
        assert_close(c1.a, (1.0 + (PI / 8.0).tan()).ln(), 1e-15);
        assert_close(c1.lower, 1.5 * PI, 1e-15);
        assert_close(c1.upper, 1.5 * PI, 1e-6);

        let c5 = affine_exp_diameter_certificate(5.0, &cfg()).unwrap();
        assert_close(c5.lower, PI + 2.0 * 5f64.atan(), 1e-15);
        assert!((c5.upper - c5.lower).abs() <= 1e-3);
    }

    #[test]
    fn certificate_sandwich_tightness() {
        for t in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let c = affine_exp_diameter_certificate(t, &cfg()).unwrap();
            assert!(c.lower <= c.upper + 1e-9, "sandwich violated at t = {t}");
            assert!((c.upper - c.lower).abs() <= 1e-3);
        }
    }

    #[test]
    fn expexp_certificate_returns_two_pi() {
        assert_eq!(expexp_certificate().unwrap(), 2.0 * PI);
    }

    #[test]
    fn expexp_crossing_images_by_hand() {
        // b = 0: Π⁻¹(e) has Y = 0, X > 0, Z > 0; c = 0: Π⁻¹(1/e) has Z < 0.
        let f = DevelopingFunction::exp_exp();
        let b_img = pushforward(&f, Point2::new(0.0, 0.0));
        assert!(b_img.y.abs() < 1e-15 && b_img.x > 0.0 && b_img.z > 0.0);
        let c_img = pushforward(&f, Point2::new(0.0, -PI));
        assert!(c_img.y.abs() < 1e-15 && c_img.x > 0.0 && c_img.z < 0.0);
    }

    #[test]
    fn escape_bound_examples() {
        let bubble = ConformalMetric::Radial(RadialProfile::bubble(1.0));
        let d = escape_diameter_upper(&bubble, &cfg()).unwrap();
        assert!(d <= PI + 1e-6, "bubble escape bound {d}");

        for profile in [
            RadialProfile::bubble_shifted(1.0, 0.5),
            RadialProfile::gaussian_neg(),
        ] {
            let m = ConformalMetric::Radial(profile);
            let d = escape_diameter_upper(&m, &cfg()).unwrap();
            assert!(d <= PI, "escape bound {d}");
        }
    }

    #[test]
    fn estimate_sandwich_holds() {
        // lower ≤ upper + 1e-9 across the estimate kinds exercised above
        let m = bubble_metric();
        let p = Point2::new(0.0, 0.0);
        let q = Point2::new(1.0, 0.0);
        let lower = sphere_lower_bound(&m, p, q).unwrap();
        let grid = GridSpec::new(-0.3, 1.3, -0.6, 0.6, 121, 91);
        let upper = grid_distance_upper(&m, p, q, &grid, &cfg()).unwrap();
        assert!(lower <= upper.upper.value + 1e-9);
    }
}
