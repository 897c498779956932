//! Discretized wavelet transform on hyperbolic grids.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::hyperbolic::{subcell_coverage, DiskSpec, HyperbolicGrid, RegionMask, UHPoint};
use crate::sieve::c_n;
use crate::wavelet::{effective_support, kernel, psi_hat, WaveletIndex};

/// Default frequency step.
pub const DEFAULT_DXI: f64 = 1.0 / 2048.0;
/// Default number of frequency samples, covering `(0, 64]`.
pub const DEFAULT_XI_COUNT: usize = 131_072;

/// Samples of the Fourier transform of a Hardy-space signal on a uniform positive grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSignal {
    xi_min: f64,
    dxi: f64,
    values: Vec<Complex64>,
}

impl FreqSignal {
    pub fn new(xi_min: f64, dxi: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(xi_min >= 0.0) || !(dxi > 0.0) || !xi_min.is_finite() || !dxi.is_finite() {
            return Err(Error::invalid(format!(
                "frequency grid needs xi_min >= 0 and dxi > 0, got {xi_min}, {dxi}"
            )));
        }
        if values.is_empty() {
            return Err(Error::invalid("frequency signal has no samples"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("frequency signal has non-finite samples"));
        }
        Ok(Self { xi_min, dxi, values })
    }

    pub fn from_fn(xi_min: f64, dxi: f64, count: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..count).map(|k| f(xi_min + k as f64 * dxi)).collect();
        Self::new(xi_min, dxi, values)
    }

    /// Samples of `π(at)ψₘᵅ` on the grid `ξ = xi_min + k·dxi`.
    pub fn atom(m: u32, alpha: f64, at: UHPoint, xi_min: f64, dxi: f64, count: usize) -> Result<Self> {
        let w = WaveletIndex::new(m, alpha)?;
        let (x, s) = (at.x(), at.s());
        Self::from_fn(xi_min, dxi, count, |xi| {
            Complex64::from_polar(s.sqrt() * psi_hat(w, s * xi), -x * xi)
        })
    }

    /// [`FreqSignal::atom`] on the default frequency grid.
    pub fn default_atom(m: u32, alpha: f64, at: UHPoint) -> Result<Self> {
        Self::atom(m, alpha, at, DEFAULT_DXI, DEFAULT_DXI, DEFAULT_XI_COUNT)
    }

    pub fn xi_min(&self) -> f64 {
        self.xi_min
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_min + (self.values.len() - 1) as f64 * self.dxi
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖f‖² = (1/2π) Σ |values|² Δξ`.
    pub fn hardy_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dxi / (2.0 * PI)
    }

    fn same_grid(&self, other: &FreqSignal) -> Result<()> {
        if self.xi_min != other.xi_min || self.dxi != other.dxi || self.len() != other.len() {
            return Err(Error::invalid("frequency signals live on different grids"));
        }
        Ok(())
    }

    /// `self + c·other` on a shared grid.
    pub fn axpy(&self, c: Complex64, other: &FreqSignal) -> Result<FreqSignal> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(FreqSignal { values, ..*self })
    }

    pub fn scaled(&self, c: Complex64) -> FreqSignal {
        FreqSignal {
            values: self.values.iter().map(|v| v * c).collect(),
            ..*self
        }
    }

    /// Hardy inner product `(1/2π) Σ f·conj(g) Δξ`.
    pub fn inner(&self, other: &FreqSignal) -> Result<Complex64> {
        self.same_grid(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * (self.dxi / (2.0 * PI)))
    }
}

/// Values of a transform on every cell of a grid.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    grid: Arc<HyperbolicGrid>,
    values: Vec<Complex64>,
    wavelet: WaveletIndex,
    tail_mass: f64,
}

impl CoefficientField {
    pub fn from_values(grid: Arc<HyperbolicGrid>, wavelet: WaveletIndex, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Consistency("coefficient field has non-finite values".into()));
        }
        let tail_mass = boundary_fraction(&grid, &values);
        Ok(Self {
            grid,
            values,
            wavelet,
            tail_mass,
        })
    }

    /// Evaluates `f` at every cell center, rows in parallel.
    pub fn from_fn(
        grid: &Arc<HyperbolicGrid>,
        wavelet: WaveletIndex,
        f: impl Fn(UHPoint) -> Complex64 + Sync,
    ) -> Result<Self> {
        let nx = grid.nx();
        let values: Vec<Complex64> = (0..grid.ns())
            .into_par_iter()
            .flat_map_iter(|row| {
                let f = &f;
                (0..nx).map(move |col| f(grid.center(grid.index(row, col))))
            })
            .collect();
        Self::from_values(Arc::clone(grid), wavelet, values)
    }

    pub fn grid(&self) -> &Arc<HyperbolicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn wavelet(&self) -> WaveletIndex {
        self.wavelet
    }

    /// Fraction of `Σ|value|² w` carried by the outermost rows and columns.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

fn boundary_fraction(grid: &HyperbolicGrid, values: &[Complex64]) -> f64 {
    let (nx, ns) = (grid.nx(), grid.ns());
    let mut total = 0.0;
    let mut edge = 0.0;
    for row in 0..ns {
        let w = grid.row_weights()[row];
        let line = &values[row * nx..(row + 1) * nx];
        let row_sum: f64 = line.iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
        total += row_sum;
        if row == 0 || row + 1 == ns {
            edge += row_sum;
        } else {
            edge += (line[0].norm_sqr() + line[nx - 1].norm_sqr()) * w;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Resolution controls for [`forward_cwt_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwtOptions {
    /// Largest step in the wavelet's own frequency variable `sξ`.
    pub t_step: f64,
    /// Period of the implied x-periodization, as a multiple of the grid width.
    pub alias_factor: f64,
    /// Minimum number of samples across the wavelet's effective support.
    pub min_support_points: usize,
}

impl Default for CwtOptions {
    fn default() -> Self {
        Self {
            t_step: 1.0 / 16.0,
            alias_factor: 4.0,
            min_support_points: 16,
        }
    }
}

struct RowPlan {
    start: usize,
    stride: usize,
    count: usize,
}

pub fn forward_cwt(f: &FreqSignal, w: WaveletIndex, grid: &Arc<HyperbolicGrid>) -> Result<CoefficientField> {
    forward_cwt_with(f, w, grid, CwtOptions::default())
}

/// Wavelet transform of `f`, one chirp-z evaluation over `x` per scale row.
pub fn forward_cwt_with(
    f: &FreqSignal,
    w: WaveletIndex,
    grid: &Arc<HyperbolicGrid>,
    opts: CwtOptions,
) -> Result<CoefficientField> {
    let support = effective_support(w);
    let spec = grid.spec();
    let width = spec.x_max - spec.x_min;
    let alias_step = 2.0 * PI / (opts.alias_factor * width);
    let offset = f.xi_min / f.dxi;
    let aligned = (offset - offset.round()).abs() < 1e-9;

    let plans: Vec<RowPlan> = grid
        .s_centers()
        .iter()
        .map(|&s| {
            let step = (opts.t_step / s).min(alias_step);
            let stride = ((step / f.dxi).floor() as usize).max(1);
            let start = if aligned {
                let r = offset.round() as usize % stride;
                (stride - r) % stride
            } else {
                0
            };
            let hi = (support / s).min(f.xi_max());
            let count = if start < f.len() && f.xi_min + start as f64 * f.dxi <= hi {
                ((hi - f.xi_min - start as f64 * f.dxi) / (stride as f64 * f.dxi)).floor() as usize + 1
            } else {
                0
            };
            let in_support = ((support / s).min(f.xi_max()) / (stride as f64 * f.dxi)).floor() as usize;
            if in_support < opts.min_support_points || count == 0 {
                return Err(Error::UnderResolved {
                    scale: s,
                    detail: format!(
                        "{in_support} frequency samples across the wavelet support, need {}",
                        opts.min_support_points
                    ),
                });
            }
            Ok(RowPlan {
                start,
                stride,
                count: count.min((f.len() - start).div_ceil(stride)),
            })
        })
        .collect::<Result<_>>()?;

    let nx = grid.nx();
    let mut planner = FftPlanner::<f64>::new();
    let mut ffts: HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)> = HashMap::new();
    for p in &plans {
        let len = (nx + p.count - 1).next_power_of_two();
        ffts.entry(len)
            .or_insert_with(|| (planner.plan_fft_forward(len), planner.plan_fft_inverse(len)));
    }

    let x0 = grid.x_center(0);
    let dx = grid.dx();
    let rows: Vec<Vec<Complex64>> = plans
        .par_iter()
        .zip(grid.s_centers().par_iter())
        .map(|(p, &s)| {
            let delta = p.stride as f64 * f.dxi;
            let xi0 = f.xi_min + p.start as f64 * f.dxi;
            let len = (nx + p.count - 1).next_power_of_two();
            let (fwd, inv) = &ffts[&len];
            let c = dx * delta;

            let mut a = vec![Complex64::new(0.0, 0.0); len];
            for (k, slot) in a.iter_mut().enumerate().take(p.count) {
                let xi = xi0 + k as f64 * delta;
                let g = f.values[p.start + k * p.stride] * psi_hat(w, s * xi);
                let kf = k as f64;
                *slot = g * Complex64::from_polar(1.0, x0 * xi + 0.5 * c * kf * kf);
            }
            let mut h = vec![Complex64::new(0.0, 0.0); len];
            for (l, slot) in h.iter_mut().enumerate().take(nx) {
                let lf = l as f64;
                *slot = Complex64::from_polar(1.0, -0.5 * c * lf * lf);
            }
            for l in 1..p.count {
                let lf = l as f64;
                h[len - l] = Complex64::from_polar(1.0, -0.5 * c * lf * lf);
            }
            fwd.process(&mut a);
            fwd.process(&mut h);
            for (x, y) in a.iter_mut().zip(&h) {
                *x *= y;
            }
            inv.process(&mut a);
            let scale = s.sqrt() / (2.0 * PI) * delta / len as f64;
            (0..nx)
                .map(|j| {
                    let jf = j as f64;
                    a[j] * Complex64::from_polar(scale, jf * dx * xi0 + 0.5 * c * jf * jf)
                })
                .collect()
        })
        .collect();
    CoefficientField::from_values(Arc::clone(grid), w, rows.concat())
}

fn check_mask(field: &CoefficientField, mask: Option<&RegionMask>) -> Result<()> {
    match mask {
        Some(m) if m.grid().spec() != field.grid.spec() => Err(Error::GridMismatch),
        _ => Ok(()),
    }
}

/// Weighted sum `Σ g(value)·w·coverage` over rows, in a fixed order.
fn masked_sum(field: &CoefficientField, mask: Option<&RegionMask>, g: impl Fn(usize, Complex64) -> f64 + Sync) -> f64 {
    let grid = &field.grid;
    let nx = grid.nx();
    let rows: Vec<f64> = (0..grid.ns())
        .into_par_iter()
        .map(|row| {
            let base = row * nx;
            let sum: f64 = match mask {
                None => (0..nx).map(|c| g(base + c, field.values[base + c])).sum(),
                Some(m) => (0..nx)
                    .filter(|&c| m.coverage()[base + c] > 0.0)
                    .map(|c| g(base + c, field.values[base + c]) * m.coverage()[base + c] as f64)
                    .sum(),
            };
            sum * grid.row_weights()[row]
        })
        .collect();
    rows.iter().sum()
}

/// `∫ |F|ᵖ dμ⁺` over the grid, or over the mask when one is given.
///
/// Returns the p-th power of the norm.
pub fn lp_norm(field: &CoefficientField, p: f64, mask: Option<&RegionMask>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    check_mask(field, mask)?;
    Ok(masked_sum(field, mask, |_, v| v.norm().powf(p)))
}

/// `∫ F·conj(G) dμ⁺` over the grid or the mask.
pub fn inner_product(a: &CoefficientField, b: &CoefficientField, mask: Option<&RegionMask>) -> Result<Complex64> {
    if a.grid.spec() != b.grid.spec() {
        return Err(Error::GridMismatch);
    }
    check_mask(a, mask)?;
    let re = masked_sum(a, mask, |i, v| (v * b.values[i].conj()).re);
    let im = masked_sum(a, mask, |i, v| (v * b.values[i].conj()).im);
    Ok(Complex64::new(re, im))
}

/// Reconstructs `F(z)` from the values of `F` on the disk `D_R(z)`.
pub fn local_reproduce(field: &CoefficientField, w: WaveletIndex, r: f64, z: UHPoint) -> Result<Complex64> {
    w.require_integrable()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("radius must lie in (0, 1), got {r}")));
    }
    let disk = DiskSpec::new(z, r)?;
    let grid = &field.grid;
    let bbox = disk.bounding_box();
    let win = grid.window();
    if bbox.x_min < win.x_min || bbox.x_max > win.x_max || bbox.s_min < win.s_min || bbox.s_max > win.s_max {
        return Err(Error::DiskNotCovered {
            x: z.x(),
            s: z.s(),
            radius: r,
        });
    }
    let circle = disk.circle();
    let (r0, r1) = (grid.row_of(bbox.s_min), grid.row_of(bbox.s_max));
    let (c0, c1) = (grid.col_of(bbox.x_min), grid.col_of(bbox.x_max));
    let rows: Vec<Complex64> = (r0..=r1)
        .into_par_iter()
        .map(|row| {
            let mut acc = Complex64::new(0.0, 0.0);
            for col in c0..=c1 {
                let idx = grid.index(row, col);
                let rect = grid.cell_rect(idx);
                let corners = [rect.x_min, rect.x_max]
                    .iter()
                    .flat_map(|&x| [rect.s_min, rect.s_max].map(|s| circle.contains(x, s)))
                    .filter(|&b| b)
                    .count();
                let frac = match corners {
                    4 => 1.0,
                    _ => {
                        let cx = circle.x.clamp(rect.x_min, rect.x_max);
                        let cs = circle.s.clamp(rect.s_min, rect.s_max);
                        if circle.contains(cx, cs) {
                            subcell_coverage(&rect, |x, s| circle.contains(x, s))
                        } else {
                            0.0
                        }
                    }
                };
                if frac > 0.0 {
                    acc += field.values[idx] * kernel(w, z, grid.center(idx)) * frac;
                }
            }
            acc * grid.row_weights()[row]
        })
        .collect();
    let integral: Complex64 = rows.iter().sum();
    let cr = c_n(w.n(), w.alpha(), r)?;
    Ok(integral * (4.0 * PI / (w.alpha() * cr)))
}

/// `∫ F(w') K(z, w') dμ⁺(w')` over the whole grid.
pub fn global_reproduce(field: &CoefficientField, w: WaveletIndex, z: UHPoint) -> Result<Complex64> {
    w.require_integrable()?;
    let grid = &field.grid;
    let nx = grid.nx();
    let rows: Vec<Complex64> = (0..grid.ns())
        .into_par_iter()
        .map(|row| {
            let base = row * nx;
            let acc: Complex64 = (0..nx)
                .map(|c| field.values[base + c] * kernel(w, z, grid.center(base + c)))
                .sum();
            acc * grid.row_weights()[row]
        })
        .collect();
    Ok(rows.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{make_grid, mask_from_primitives, GridSpec, Primitive};
    use crate::wavelet::basis_coeff;

    fn pt(x: f64, s: f64) -> UHPoint {
        UHPoint::new(x, s).unwrap()
    }

    fn small_grid() -> Arc<HyperbolicGrid> {
        make_grid(GridSpec::new(-16.0, 16.0, 512, 1.0 / 16.0, 16.0, 96)).unwrap()
    }

    #[test]
    fn cwt_of_atom_matches_closed_form() {
        let grid = small_grid();
        let (n, m, a) = (1, 2, 3.0);
        let w = WaveletIndex::new(n, a).unwrap();
        let at = pt(0.5, 1.3);
        let f = FreqSignal::default_atom(m, a, at).unwrap();
        let field = forward_cwt(&f, w, &grid).unwrap();
        let (mut worst, mut peak) = (0.0f64, 0.0f64);
        for (idx, v) in field.values().iter().enumerate() {
            let want = basis_coeff(n, m, a, at.inv().mul(&grid.center(idx)));
            worst = worst.max((v - want).norm());
            peak = peak.max(want.norm());
        }
        assert!(worst <= 1e-5 * peak, "worst error {worst:e} against peak {peak:e}");
    }

    #[test]
    fn cwt_is_linear() {
        let grid = make_grid(GridSpec::new(-8.0, 8.0, 128, 0.125, 8.0, 24)).unwrap();
        let w = WaveletIndex::new(0, 2.0).unwrap();
        let f = FreqSignal::default_atom(0, 2.0, pt(0.0, 1.0)).unwrap();
        let g = FreqSignal::default_atom(1, 2.0, pt(1.0, 0.5)).unwrap();
        let (ca, cb) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let combo = f.scaled(ca).axpy(cb, &g).unwrap();
        let lhs = forward_cwt(&combo, w, &grid).unwrap();
        let wf = forward_cwt(&f, w, &grid).unwrap();
        let wg = forward_cwt(&g, w, &grid).unwrap();
        for i in 0..grid.len() {
            let rhs = ca * wf.values()[i] + cb * wg.values()[i];
            assert!((lhs.values()[i] - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn under_resolved_scale_is_named() {
        let grid = make_grid(GridSpec::new(-8.0, 8.0, 64, 0.125, 8.0, 16)).unwrap();
        let w = WaveletIndex::new(0, 2.0).unwrap();
        let f = FreqSignal::atom(0, 2.0, UHPoint::I, 0.5, 0.5, 64).unwrap();
        match forward_cwt(&f, w, &grid) {
            Err(Error::UnderResolved { scale, .. }) => assert!(scale > 1.0),
            other => panic!("expected under-resolved error, got {other:?}"),
        }
    }

    #[test]
    fn constant_field_norm_is_total_measure() {
        let grid = small_grid();
        let w = WaveletIndex::new(0, 2.0).unwrap();
        let field = CoefficientField::from_fn(&grid, w, |_| Complex64::new(1.0, 0.0)).unwrap();
        let v = lp_norm(&field, 1.0, None).unwrap();
        assert!((v - grid.total_measure()).abs() < 1e-10 * v);
    }

    #[test]
    fn lp_norm_rejects_foreign_mask() {
        let grid = small_grid();
        let other = make_grid(GridSpec::new(-1.0, 1.0, 8, 0.5, 2.0, 8)).unwrap();
        let mask = mask_from_primitives(&other, &[]).unwrap();
        let w = WaveletIndex::new(0, 2.0).unwrap();
        let field = CoefficientField::from_fn(&grid, w, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(lp_norm(&field, 2.0, Some(&mask)), Err(Error::GridMismatch)));
    }

    #[test]
    fn cauchy_atom_norms() {
        let grid = make_grid(GridSpec::default()).unwrap();
        for &a in &[2.0, 3.0] {
            let w = WaveletIndex::new(0, a).unwrap();
            let field = CoefficientField::from_fn(&grid, w, |z| basis_coeff(0, 0, a, z)).unwrap();
            let two = lp_norm(&field, 2.0, None).unwrap();
            assert!((two - 4.0 * PI / a).abs() <= 1e-3 * 4.0 * PI / a);
            let four = lp_norm(&field, 4.0, None).unwrap();
            let want = 8.0 * PI / ((a + 1.0) * 4.0 - 2.0);
            assert!((four - want).abs() <= 1e-3 * want);
        }
    }

    #[test]
    fn local_reproduction_and_zero_field() {
        let grid = make_grid(GridSpec::new(-8.0, 8.0, 1024, 1.0 / 16.0, 16.0, 512)).unwrap();
        for n in 0..=2 {
            let w = WaveletIndex::new(n, 2.5).unwrap();
            let field = CoefficientField::from_fn(&grid, w, |z| basis_coeff(n, n, 2.5, z)).unwrap();
            let v = local_reproduce(&field, w, 0.6, UHPoint::I).unwrap();
            assert!((v - 1.0).norm() <= 1e-3, "n={n}: {v}");
        }
        let w = WaveletIndex::new(0, 2.5).unwrap();
        let zero = CoefficientField::from_fn(&grid, w, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(local_reproduce(&zero, w, 0.5, UHPoint::I).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(
            local_reproduce(&zero, w, 0.99, UHPoint::I),
            Err(Error::DiskNotCovered { .. })
        ));
    }

    #[test]
    fn global_reproduction_of_superposition() {
        let grid = make_grid(GridSpec::new(-24.0, 24.0, 1536, 1.0 / 48.0, 48.0, 384)).unwrap();
        let a = 3.0;
        let w = WaveletIndex::new(0, a).unwrap();
        let (p1, p2) = (pt(-0.5, 0.8), pt(1.0, 1.5));
        let (c1, c2) = (Complex64::new(1.0, 0.5), Complex64::new(-0.7, 0.2));
        let f = |z: UHPoint| c1 * basis_coeff(0, 1, a, p1.inv().mul(&z)) + c2 * basis_coeff(0, 0, a, p2.inv().mul(&z));
        let field = CoefficientField::from_fn(&grid, w, f).unwrap();
        for z in [pt(0.0, 1.0), pt(0.7, 0.6), pt(-1.0, 2.0)] {
            let v = global_reproduce(&field, w, z).unwrap();
            assert!((v - f(z)).norm() <= 1e-3 * f(z).norm().max(1.0), "{v} vs {}", f(z));
        }
    }

    #[test]
    fn disk_restricted_norm_uses_coverage() {
        let grid = make_grid(GridSpec::new(-8.0, 8.0, 512, 1.0 / 16.0, 16.0, 256)).unwrap();
        let disk = DiskSpec::new(UHPoint::I, 0.5).unwrap();
        let mask = mask_from_primitives(&grid, &[Primitive::Disk(disk)]).unwrap();
        let w = WaveletIndex::new(0, 2.0).unwrap();
        let one = CoefficientField::from_fn(&grid, w, |_| Complex64::new(1.0, 0.0)).unwrap();
        let v = lp_norm(&one, 1.0, Some(&mask)).unwrap();
        assert!((v - disk.measure()).abs() < 2e-3 * disk.measure());
    }
}
