//! Geometry and measure of the upper half-plane viewed as the affine group.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `x + is` of the upper half-plane, `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct UHPoint {
    x: f64,
    s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    x: f64,
    s: f64,
}

impl TryFrom<RawPoint> for UHPoint {
    type Error = Error;
    fn try_from(r: RawPoint) -> Result<Self> {
        UHPoint::new(r.x, r.s)
    }
}

impl From<UHPoint> for RawPoint {
    fn from(p: UHPoint) -> Self {
        RawPoint { x: p.x, s: p.s }
    }
}

impl UHPoint {
    /// The neutral element `i`.
    pub const I: UHPoint = UHPoint { x: 0.0, s: 1.0 };

    pub fn new(x: f64, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() || !x.is_finite() {
            return Err(Error::NotInUpperHalfPlane(s));
        }
        Ok(Self { x, s })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.s)
    }

    /// Group product `(x, s)·(x', s') = (x + s x', s s')`.
    pub fn mul(&self, other: &UHPoint) -> UHPoint {
        UHPoint {
            x: self.x + self.s * other.x,
            s: self.s * other.s,
        }
    }

    pub fn inv(&self) -> UHPoint {
        UHPoint {
            x: -self.x / self.s,
            s: 1.0 / self.s,
        }
    }
}

pub fn group_mul(z: UHPoint, w: UHPoint) -> UHPoint {
    z.mul(&w)
}

pub fn group_inv(z: UHPoint) -> UHPoint {
    z.inv()
}

/// `|z − w|² / |z − w̄|²`.
pub fn pseudo_dist_sq(z: UHPoint, w: UHPoint) -> f64 {
    let dx = z.x - w.x;
    let num = dx * dx + (z.s - w.s) * (z.s - w.s);
    let den = dx * dx + (z.s + w.s) * (z.s + w.s);
    num / den
}

/// Pseudohyperbolic distance `|z − w| / |z − w̄|`.
pub fn pseudo_dist(z: UHPoint, w: UHPoint) -> f64 {
    pseudo_dist_sq(z, w).sqrt()
}

/// Cayley map `u ↦ i(1 + u)/(1 − u)` from the unit disk.
pub fn cayley(u: Complex64) -> Result<UHPoint> {
    if !(u.norm_sqr() < 1.0) {
        return Err(Error::invalid(format!("|u| must be < 1, got {}", u.norm())));
    }
    let z = Complex64::i() * (1.0 + u) / (1.0 - u);
    // Imaginary part computed directly to keep it positive near the boundary.
    let s = (1.0 - u.norm_sqr()) / (1.0 - u).norm_sqr();
    UHPoint::new(z.re, s)
}

/// Inverse Cayley map `z ↦ (z − i)/(z + i)`.
pub fn cayley_inv(z: UHPoint) -> Complex64 {
    let zc = z.to_complex();
    (zc - Complex64::i()) / (zc + Complex64::i())
}

/// Hyperbolic area of a pseudohyperbolic disk of radius `r`.
pub fn disk_measure_h(r: f64) -> f64 {
    4.0 * PI * r * r / (1.0 - r * r)
}

/// Jacobian of the pullback of `s^β dA` to the disk.
pub fn change_of_variable_weight(u: Complex64, beta: f64) -> f64 {
    4.0 * (1.0 - u.norm_sqr()).powf(beta) / (1.0 - u).norm().powf(2.0 * beta + 4.0)
}

/// Axis-aligned rectangle `[x_min, x_max] × [s_min, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl Rect {
    fn contains(&self, x: f64, s: f64) -> bool {
        x >= self.x_min && x <= self.x_max && s >= self.s_min && s <= self.s_max
    }

    fn intersects(&self, o: &Rect) -> bool {
        self.x_min < o.x_max && o.x_min < self.x_max && self.s_min < o.s_max && o.s_min < self.s_max
    }

    fn inside(&self, o: &Rect) -> bool {
        self.x_min >= o.x_min && self.x_max <= o.x_max && self.s_min >= o.s_min && self.s_max <= o.s_max
    }
}

/// Pseudohyperbolic disk `{w : ϱ(w, center) < radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDisk", into = "RawDisk")]
pub struct DiskSpec {
    center: UHPoint,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisk {
    center: UHPoint,
    radius: f64,
}

impl TryFrom<RawDisk> for DiskSpec {
    type Error = Error;
    fn try_from(r: RawDisk) -> Result<Self> {
        DiskSpec::new(r.center, r.radius)
    }
}

impl From<DiskSpec> for RawDisk {
    fn from(d: DiskSpec) -> Self {
        RawDisk {
            center: d.center,
            radius: d.radius,
        }
    }
}

/// A disk as a Euclidean circle: center `(x, s)` and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub x: f64,
    pub s: f64,
    pub r: f64,
}

impl Circle {
    pub fn contains(&self, x: f64, s: f64) -> bool {
        let dx = x - self.x;
        let ds = s - self.s;
        dx * dx + ds * ds < self.r * self.r
    }

    /// Half-width of the chord at height `s`, or `None` if the line misses the circle.
    pub fn half_chord(&self, s: f64) -> Option<f64> {
        let ds = s - self.s;
        let h2 = self.r * self.r - ds * ds;
        (h2 > 0.0).then(|| h2.sqrt())
    }
}

impl DiskSpec {
    pub fn new(center: UHPoint, radius: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&radius) {
            return Err(Error::invalid(format!("disk radius must lie in [0, 1), got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> UHPoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, z: UHPoint) -> bool {
        pseudo_dist_sq(z, self.center) < self.radius * self.radius
    }

    pub fn measure(&self) -> f64 {
        disk_measure_h(self.radius)
    }

    pub fn circle(&self) -> Circle {
        let r2 = self.radius * self.radius;
        let s0 = self.center.s;
        Circle {
            x: self.center.x,
            s: s0 * (1.0 + r2) / (1.0 - r2),
            r: s0 * 2.0 * self.radius / (1.0 - r2),
        }
    }

    pub fn bounding_box(&self) -> Rect {
        let c = self.circle();
        Rect {
            x_min: c.x - c.r,
            x_max: c.x + c.r,
            s_min: c.s - c.r,
            s_max: c.s + c.r,
        }
    }
}

/// Pseudohyperbolic annulus `{w : inner ≤ ϱ(w, center) < outer}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnulus", into = "RawAnnulus")]
pub struct AnnulusSpec {
    center: UHPoint,
    inner: f64,
    outer: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnulus {
    center: UHPoint,
    inner: f64,
    outer: f64,
}

impl TryFrom<RawAnnulus> for AnnulusSpec {
    type Error = Error;
    fn try_from(r: RawAnnulus) -> Result<Self> {
        AnnulusSpec::new(r.center, r.inner, r.outer)
    }
}

impl From<AnnulusSpec> for RawAnnulus {
    fn from(a: AnnulusSpec) -> Self {
        RawAnnulus {
            center: a.center,
            inner: a.inner,
            outer: a.outer,
        }
    }
}

impl AnnulusSpec {
    pub fn new(center: UHPoint, inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 <= inner && inner < outer && outer < 1.0) {
            return Err(Error::invalid(format!(
                "annulus radii must satisfy 0 <= inner < outer < 1, got {inner}, {outer}"
            )));
        }
        Ok(Self { center, inner, outer })
    }

    pub fn center(&self) -> UHPoint {
        self.center
    }

    pub fn inner(&self) -> DiskSpec {
        DiskSpec {
            center: self.center,
            radius: self.inner,
        }
    }

    pub fn outer(&self) -> DiskSpec {
        DiskSpec {
            center: self.center,
            radius: self.outer,
        }
    }

    pub fn measure(&self) -> f64 {
        disk_measure_h(self.outer) - disk_measure_h(self.inner)
    }
}

fn circle_touches(c: &Circle, cell: &Rect) -> bool {
    let cx = c.x.clamp(cell.x_min, cell.x_max);
    let cs = c.s.clamp(cell.s_min, cell.s_max);
    c.contains(cx, cs)
}

fn circle_covers(c: &Circle, cell: &Rect) -> bool {
    [cell.x_min, cell.x_max]
        .iter()
        .all(|&x| [cell.s_min, cell.s_max].iter().all(|&s| c.contains(x, s)))
}

/// Geometric building block of a region mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Disk(DiskSpec),
    Rect(Rect),
    Annulus(AnnulusSpec),
}

impl Primitive {
    pub fn contains(&self, x: f64, s: f64) -> bool {
        match self {
            Primitive::Disk(d) => d.circle().contains(x, s),
            Primitive::Rect(r) => r.contains(x, s),
            Primitive::Annulus(a) => a.outer().circle().contains(x, s) && !a.inner().circle().contains(x, s),
        }
    }

    pub fn center(&self) -> Option<UHPoint> {
        match self {
            Primitive::Disk(d) => Some(d.center),
            Primitive::Rect(r) => UHPoint::new(0.5 * (r.x_min + r.x_max), (r.s_min * r.s_max).sqrt()).ok(),
            Primitive::Annulus(a) => Some(a.center),
        }
    }

    fn touches(&self, cell: &Rect) -> bool {
        match self {
            Primitive::Disk(d) => circle_touches(&d.circle(), cell),
            Primitive::Rect(r) => r.intersects(cell),
            Primitive::Annulus(a) => circle_touches(&a.outer().circle(), cell) && !circle_covers(&a.inner().circle(), cell),
        }
    }

    fn covers(&self, cell: &Rect) -> bool {
        match self {
            Primitive::Disk(d) => circle_covers(&d.circle(), cell),
            Primitive::Rect(r) => cell.inside(r),
            Primitive::Annulus(a) => circle_covers(&a.outer().circle(), cell) && !circle_touches(&a.inner().circle(), cell),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Primitive::Disk(_) | Primitive::Annulus(_) => Ok(()),
            Primitive::Rect(r) => {
                if r.x_min < r.x_max && 0.0 < r.s_min && r.s_min < r.s_max {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("degenerate rectangle {r:?}")))
                }
            }
        }
    }
}

/// Bounds and resolution of a hyperbolic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub ns: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -64.0,
            x_max: 64.0,
            nx: 4096,
            s_min: 1.0 / 512.0,
            s_max: 512.0,
            ns: 640,
        }
    }
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, nx: usize, s_min: f64, s_max: f64, ns: usize) -> Self {
        Self {
            x_min,
            x_max,
            nx,
            s_min,
            s_max,
            ns,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ns < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 cells per axis, got {} x {}",
                self.nx, self.ns
            )));
        }
        if !(self.s_min > 0.0) {
            return Err(Error::invalid(format!("s_min must be positive, got {}", self.s_min)));
        }
        if !(self.x_min < self.x_max) || !(self.s_min < self.s_max) || !self.x_max.is_finite() || !self.s_max.is_finite() {
            return Err(Error::invalid("grid bounds must be finite and increasing"));
        }
        Ok(())
    }
}

/// Rectangle of `ℂ⁺` split into `nx` uniform columns and `ns` geometric rows.
///
/// Cells are indexed row-major with rows ordered by increasing `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicGrid {
    spec: GridSpec,
    dx: f64,
    s_edges: Vec<f64>,
    s_centers: Vec<f64>,
    row_weights: Vec<f64>,
}

impl HyperbolicGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let dx = (spec.x_max - spec.x_min) / spec.nx as f64;
        let ratio = (spec.s_max / spec.s_min).ln() / spec.ns as f64;
        let mut s_edges: Vec<f64> = (0..=spec.ns).map(|i| spec.s_min * (ratio * i as f64).exp()).collect();
        s_edges[0] = spec.s_min;
        s_edges[spec.ns] = spec.s_max;
        let s_centers = s_edges.windows(2).map(|e| (e[0] * e[1]).sqrt()).collect();
        let row_weights = s_edges.windows(2).map(|e| dx * (1.0 / e[0] - 1.0 / e[1])).collect();
        Ok(Self {
            spec,
            dx,
            s_edges,
            s_centers,
            row_weights,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ns(&self) -> usize {
        self.spec.ns
    }

    pub fn len(&self) -> usize {
        self.spec.nx * self.spec.ns
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn s_edges(&self) -> &[f64] {
        &self.s_edges
    }

    pub fn s_centers(&self) -> &[f64] {
        &self.s_centers
    }

    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    pub fn x_center(&self, col: usize) -> f64 {
        self.spec.x_min + (col as f64 + 0.5) * self.dx
    }

    pub fn x_edge(&self, col: usize) -> f64 {
        self.spec.x_min + col as f64 * self.dx
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.spec.nx + col
    }

    pub fn row_col(&self, idx: usize) -> (usize, usize) {
        (idx / self.spec.nx, idx % self.spec.nx)
    }

    pub fn center(&self, idx: usize) -> UHPoint {
        let (row, col) = self.row_col(idx);
        UHPoint {
            x: self.x_center(col),
            s: self.s_centers[row],
        }
    }

    /// Hyperbolic measure of a cell, exact for the rectangle.
    pub fn weight(&self, idx: usize) -> f64 {
        self.row_weights[idx / self.spec.nx]
    }

    /// Right Haar measure `dx ds / s` of a cell in the given row.
    pub fn right_haar_weight(&self, row: usize) -> f64 {
        self.dx * (self.s_edges[row + 1] / self.s_edges[row]).ln()
    }

    pub fn cell_rect(&self, idx: usize) -> Rect {
        let (row, col) = self.row_col(idx);
        Rect {
            x_min: self.x_edge(col),
            x_max: self.x_edge(col + 1),
            s_min: self.s_edges[row],
            s_max: self.s_edges[row + 1],
        }
    }

    pub fn window(&self) -> Rect {
        Rect {
            x_min: self.spec.x_min,
            x_max: self.spec.x_max,
            s_min: self.spec.s_min,
            s_max: self.spec.s_max,
        }
    }

    pub fn total_measure(&self) -> f64 {
        (self.spec.x_max - self.spec.x_min) * (1.0 / self.spec.s_min - 1.0 / self.spec.s_max)
    }

    /// Row containing height `s`, clamped to the grid.
    pub fn row_of(&self, s: f64) -> usize {
        self.s_edges[1..self.spec.ns].partition_point(|&e| e <= s)
    }

    /// Column containing abscissa `x`, clamped to the grid.
    pub fn col_of(&self, x: f64) -> usize {
        (((x - self.spec.x_min) / self.dx).floor().max(0.0) as usize).min(self.spec.nx - 1)
    }

    /// Centers and weights of every cell in index order.
    pub fn cells(&self) -> impl Iterator<Item = (UHPoint, f64)> + '_ {
        (0..self.len()).map(move |i| (self.center(i), self.weight(i)))
    }

    /// Fraction of the cell's measure lying in the union of `prims`, from a 4×4 sub-cell rule.
    pub fn coverage_fraction(&self, idx: usize, prims: &[Primitive]) -> f64 {
        let rect = self.cell_rect(idx);
        subcell_coverage(&rect, |x, s| prims.iter().any(|p| p.contains(x, s)))
    }
}

/// Measure fraction of `rect` where `inside` holds, using 4×4 sub-cells with exact sub-row measures.
pub(crate) fn subcell_coverage(rect: &Rect, inside: impl Fn(f64, f64) -> bool) -> f64 {
    const K: usize = 4;
    let ratio = (rect.s_max / rect.s_min).ln() / K as f64;
    let total = 1.0 / rect.s_min - 1.0 / rect.s_max;
    let hx = (rect.x_max - rect.x_min) / K as f64;
    let mut acc = 0.0;
    for b in 0..K {
        let lo = rect.s_min * (ratio * b as f64).exp();
        let hi = rect.s_min * (ratio * (b + 1) as f64).exp();
        let s = (lo * hi).sqrt();
        let w = (1.0 / lo - 1.0 / hi) / total / K as f64;
        for a in 0..K {
            let x = rect.x_min + (a as f64 + 0.5) * hx;
            if inside(x, s) {
                acc += w;
            }
        }
    }
    acc
}

pub fn make_grid(spec: GridSpec) -> Result<Arc<HyperbolicGrid>> {
    HyperbolicGrid::new(spec).map(Arc::new)
}

/// Rasterized region `Δ` over a grid.
///
/// `indicator` uses the cell-center rule, `dilated` marks every cell touching a
/// primitive, and `coverage` holds the measure fraction of each cell inside `Δ`.
#[derive(Debug, Clone)]
pub struct RegionMask {
    grid: Arc<HyperbolicGrid>,
    indicator: Vec<bool>,
    dilated: Vec<bool>,
    coverage: Vec<f32>,
    primitives: Vec<Primitive>,
    measure_h: f64,
}

impl RegionMask {
    pub fn grid(&self) -> &Arc<HyperbolicGrid> {
        &self.grid
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn dilated(&self) -> &[bool] {
        &self.dilated
    }

    pub fn coverage(&self) -> &[f32] {
        &self.coverage
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    /// Sum of cell measures over the indicator.
    pub fn measure_h(&self) -> f64 {
        self.measure_h
    }

    /// Sum of cell measures over the dilated mask.
    pub fn dilated_measure(&self) -> f64 {
        weighted_sum(&self.grid, &self.dilated)
    }

    pub fn is_empty(&self) -> bool {
        !self.dilated.iter().any(|&b| b)
    }

    /// Number of cells outside the indicator.
    pub fn complement_len(&self) -> usize {
        self.indicator.iter().filter(|&&b| !b).count()
    }
}

fn weighted_sum(grid: &HyperbolicGrid, flags: &[bool]) -> f64 {
    flags
        .chunks(grid.nx())
        .zip(grid.row_weights())
        .map(|(row, &w)| row.iter().filter(|&&b| b).count() as f64 * w)
        .sum()
}

pub fn mask_from_primitives(grid: &Arc<HyperbolicGrid>, primitives: &[Primitive]) -> Result<RegionMask> {
    for p in primitives {
        p.validate()?;
    }
    let n = grid.len();
    let mut indicator = vec![false; n];
    let mut dilated = vec![false; n];
    let mut coverage = vec![0.0f32; n];
    for p in primitives {
        let bbox = match p {
            Primitive::Disk(d) => d.bounding_box(),
            Primitive::Rect(r) => *r,
            Primitive::Annulus(a) => a.outer().bounding_box(),
        };
        let window = grid.window();
        if !bbox.intersects(&window) {
            continue;
        }
        let r0 = grid.row_of(bbox.s_min);
        let r1 = grid.row_of(bbox.s_max);
        let c0 = grid.col_of(bbox.x_min);
        let c1 = grid.col_of(bbox.x_max);
        for row in r0..=r1 {
            for col in c0..=c1 {
                let idx = grid.index(row, col);
                let rect = grid.cell_rect(idx);
                if !p.touches(&rect) {
                    continue;
                }
                dilated[idx] = true;
                let c = grid.center(idx);
                if p.contains(c.x, c.s) {
                    indicator[idx] = true;
                }
                if p.covers(&rect) {
                    coverage[idx] = 1.0;
                }
            }
        }
    }
    for idx in 0..n {
        if dilated[idx] && coverage[idx] < 1.0 {
            coverage[idx] = grid.coverage_fraction(idx, primitives) as f32;
        }
    }
    let measure_h = weighted_sum(grid, &indicator);
    Ok(RegionMask {
        grid: Arc::clone(grid),
        indicator,
        dilated,
        coverage,
        primitives: primitives.to_vec(),
        measure_h,
    })
}

/// Measure of the indicator, recomputed from the raster.
pub fn mask_measure(mask: &RegionMask) -> f64 {
    weighted_sum(&mask.grid, &mask.indicator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Adaptive;
    use proptest::prelude::*;

    fn pt(x: f64, s: f64) -> UHPoint {
        UHPoint::new(x, s).unwrap()
    }

    #[test]
    fn annulus_mask_measure() {
        let g = make_grid(GridSpec::new(-2.0, 2.0, 512, 0.25, 4.0, 384)).unwrap();
        let a = AnnulusSpec::new(UHPoint::I, 0.3, 0.5).unwrap();
        let mask = mask_from_primitives(&g, &[Primitive::Annulus(a)]).unwrap();
        assert!((mask.measure_h() - a.measure()).abs() <= 0.01 * a.measure());
        assert!(mask.dilated_measure() >= mask.measure_h());
        assert!(AnnulusSpec::new(UHPoint::I, 0.5, 0.3).is_err());
        let bad = r#"{"kind":"annulus","center":{"x":0,"s":1},"inner":0.6,"outer":0.2}"#;
        assert!(serde_json::from_str::<Primitive>(bad).is_err());
        let good = r#"{"kind":"annulus","center":{"x":0,"s":1},"inner":0.2,"outer":0.6}"#;
        assert!(matches!(serde_json::from_str::<Primitive>(good).unwrap(), Primitive::Annulus(_)));
    }

    fn point() -> impl Strategy<Value = UHPoint> {
        (-5.0..5.0f64, -3.0..3.0f64).prop_map(|(x, l)| pt(x, l.exp()))
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(UHPoint::new(0.0, 0.0).is_err());
        assert!(UHPoint::new(0.0, -1.0).is_err());
    }

    #[test]
    fn group_examples() {
        let z = pt(1.0, 2.0);
        assert_eq!(group_mul(z, UHPoint::I), z);
        assert_eq!(group_mul(z, pt(3.0, 4.0)), pt(7.0, 8.0));
        assert_eq!(group_inv(pt(2.0, 4.0)), pt(-0.5, 0.25));
        let e = group_mul(group_inv(z), z);
        assert!((e.x()).abs() < 1e-15 && (e.s() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(pseudo_dist(pt(0.3, 2.0), pt(0.3, 2.0)), 0.0);
        assert!((pseudo_dist(UHPoint::I, pt(0.0, 2.0)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cayley_round_trip() {
        assert_eq!(cayley(Complex64::new(0.0, 0.0)).unwrap(), UHPoint::I);
        let u = Complex64::new(0.3, 0.2);
        assert!((cayley_inv(cayley(u).unwrap()) - u).norm() < 1e-14);
        assert!(cayley(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn disk_measure_examples() {
        assert_eq!(disk_measure_h(0.0), 0.0);
        assert!((disk_measure_h(0.5) - 4.0 * PI / 3.0).abs() < 1e-14);
        // Pullback quadrature of the hyperbolic area in polar disk coordinates.
        let r = 0.5;
        let q = Adaptive::default()
            .integrate(
                |t: f64| {
                    let n = 64;
                    (0..n)
                        .map(|k| {
                            let phi = 2.0 * PI * k as f64 / n as f64;
                            let u = Complex64::from_polar(t, phi);
                            change_of_variable_weight(u, -2.0) * t
                        })
                        .sum::<f64>()
                        * 2.0
                        * PI
                        / n as f64
                },
                0.0,
                r,
            )
            .unwrap();
        assert!((q.value - disk_measure_h(r)).abs() < 1e-10);
    }

    #[test]
    fn change_of_variable_examples() {
        assert_eq!(change_of_variable_weight(Complex64::new(0.0, 0.0), 1.7), 4.0);
        let u = Complex64::new(0.2, -0.4);
        assert!((change_of_variable_weight(u, 0.0) - 4.0 / (1.0 - u).norm().powi(4)).abs() < 1e-14);
    }

    #[test]
    fn change_of_variable_two_grid() {
        // ∫ s^{-2} over a rectangle, directly and via the disk pullback of its indicator.
        let rect = Rect {
            x_min: -0.5,
            x_max: 0.7,
            s_min: 0.6,
            s_max: 1.9,
        };
        let exact = (rect.x_max - rect.x_min) * (1.0 / rect.s_min - 1.0 / rect.s_max);
        let n = 1200;
        let mut acc = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) / n as f64 * 0.8;
            for k in 0..2 * n {
                let phi = 2.0 * PI * (k as f64 + 0.5) / (2 * n) as f64;
                let u = Complex64::from_polar(r, phi);
                let z = cayley(u).unwrap();
                if rect.contains(z.x(), z.s()) {
                    acc += change_of_variable_weight(u, -2.0) * r;
                }
            }
        }
        acc *= 0.8 / n as f64 * 2.0 * PI / (2 * n) as f64;
        assert!((acc - exact).abs() / exact < 5e-3, "{acc} vs {exact}");
    }

    #[test]
    fn grid_measure_is_exact() {
        let g = HyperbolicGrid::new(GridSpec::new(-3.0, 5.0, 37, 0.01, 40.0, 91)).unwrap();
        let sum: f64 = g.cells().map(|(_, w)| w).sum();
        assert!((sum - g.total_measure()).abs() <= 1e-12 * g.total_measure());
    }

    #[test]
    fn grid_rejects_bad_specs() {
        assert!(HyperbolicGrid::new(GridSpec::new(0.0, 1.0, 1, 0.1, 1.0, 4)).is_err());
        assert!(HyperbolicGrid::new(GridSpec::new(0.0, 1.0, 4, 0.0, 1.0, 4)).is_err());
        assert!(HyperbolicGrid::new(GridSpec::new(1.0, 0.0, 4, 0.1, 1.0, 4)).is_err());
    }

    #[test]
    fn rectangle_and_empty_masks() {
        let g = make_grid(GridSpec::new(-2.0, 2.0, 40, 0.25, 4.0, 30)).unwrap();
        let full = Primitive::Rect(g.window());
        let m = mask_from_primitives(&g, &[full]).unwrap();
        assert!((m.measure_h() - g.total_measure()).abs() < 1e-12 * g.total_measure());
        let e = mask_from_primitives(&g, &[]).unwrap();
        assert_eq!(e.measure_h(), 0.0);
        assert_eq!(mask_measure(&m), m.measure_h());
    }

    #[test]
    fn disk_mask_measure_converges() {
        let d = DiskSpec::new(UHPoint::I, 0.6).unwrap();
        let exact = disk_measure_h(0.6);
        let mut errs = Vec::new();
        for &n in &[25usize, 50, 100, 200, 400] {
            let g = make_grid(GridSpec::new(-4.0, 4.0, n, 0.2, 5.0, n)).unwrap();
            let m = mask_from_primitives(&g, &[Primitive::Disk(d)]).unwrap();
            errs.push((m.measure_h() - exact).abs() / exact);
        }
        assert!(errs[4] <= 0.02);
        // Covered fraction converges faster than the center rule.
        let g = make_grid(GridSpec::new(-4.0, 4.0, 200, 0.2, 5.0, 200)).unwrap();
        let m = mask_from_primitives(&g, &[Primitive::Disk(d)]).unwrap();
        let covered: f64 = m.coverage().iter().enumerate().map(|(i, &c)| c as f64 * g.weight(i)).sum();
        assert!((covered - exact).abs() / exact < 2e-3);
        assert!(errs[0] >= errs[4] * 16.0, "{errs:?}");
    }

    #[test]
    fn left_invariance_of_grid_quadrature() {
        let g = HyperbolicGrid::new(GridSpec::new(-6.0, 6.0, 600, 0.05, 20.0, 600)).unwrap();
        let bump = |z: UHPoint| {
            let r2 = pseudo_dist_sq(z, pt(0.2, 1.3)) / 0.36;
            if r2 < 1.0 {
                (1.0 - r2).powi(3)
            } else {
                0.0
            }
        };
        let a = pt(0.4, 0.8);
        let direct: f64 = g.cells().map(|(z, w)| bump(z) * w).sum();
        let shifted: f64 = g.cells().map(|(z, w)| bump(a.inv().mul(&z)) * w).sum();
        assert!((direct - shifted).abs() < 1e-4 * direct.abs().max(1.0));
    }

    #[test]
    fn serde_rejects_invalid() {
        assert!(serde_json::from_str::<UHPoint>(r#"{"x":0,"s":-1}"#).is_err());
        assert!(serde_json::from_str::<UHPoint>(r#"{"x":0,"s":1,"y":2}"#).is_err());
        let p: Primitive = serde_json::from_str(r#"{"kind":"disk","center":{"x":0,"s":1},"radius":0.3}"#).unwrap();
        assert!(matches!(p, Primitive::Disk(_)));
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_invariant(z in point(), w in point(), a in point()) {
            let d = pseudo_dist(z, w);
            prop_assert!(d < 1.0);
            prop_assert!((d - pseudo_dist(w, z)).abs() <= 1e-12);
            prop_assert!((d - pseudo_dist(a.mul(&z), a.mul(&w))).abs() <= 1e-12);
        }

        #[test]
        fn distance_identities(z in point(), w in point(), u in point()) {
            prop_assert!((pseudo_dist(z, w) - pseudo_dist(z.inv().mul(&w), UHPoint::I)).abs() <= 1e-12);
            prop_assert!((pseudo_dist(u, z.mul(&w)) - pseudo_dist(z.inv().mul(&u), w)).abs() <= 1e-12);
        }

        #[test]
        fn inverse_is_involution(z in point()) {
            let back = z.inv().inv();
            prop_assert!((back.x() - z.x()).abs() <= 1e-12 * z.x().abs().max(1.0));
            prop_assert!((back.s() - z.s()).abs() <= 1e-12 * z.s());
        }

        #[test]
        fn cayley_preserves_distance(r1 in 0.0..0.95f64, p1 in 0.0..6.28f64, r2 in 0.0..0.95f64, p2 in 0.0..6.28f64) {
            let u = Complex64::from_polar(r1, p1);
            let v = Complex64::from_polar(r2, p2);
            let disk = (u - v).norm() / (1.0 - u.conj() * v).norm();
            let d = pseudo_dist(cayley(u).unwrap(), cayley(v).unwrap());
            prop_assert!((d - disk).abs() <= 1e-12);
        }

        #[test]
        fn disk_membership_matches_circle(z in point(), c in point(), r in 0.05..0.95f64) {
            let d = DiskSpec::new(c, r).unwrap();
            let by_dist = pseudo_dist(z, c) < r;
            let circ = d.circle();
            let margin = (pseudo_dist(z, c) - r).abs();
            if margin > 1e-9 {
                prop_assert_eq!(by_dist, circ.contains(z.x(), z.s()));
            }
        }
    }
}
