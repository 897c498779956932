//! Local orthogonality constants, Nyquist densities, concentration certificates and bounds.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{cayley, pseudo_dist_sq, Circle, DiskSpec, GridSpec, HyperbolicGrid, Primitive, RegionMask, UHPoint};
use crate::quad::{Adaptive, GaussLegendre};
use crate::special::zernike_radial_sq;
use crate::wavelet::{basis_coeff, basis_coeff_halfplane, mixed_cauchy_coeff, overlap_modulus, WaveletIndex};

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("radius must lie in (0, 1), got {r}")))
    }
}

/// Local orthogonality constant `4π ∫₀^{R²} r^{n+m} (1−r)^{α−1} Z_{n,m}^α(r)² dr`.
pub fn c_nm(n: u32, m: u32, alpha: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let q = Adaptive::with_rel_tol(1e-10).integrate(
        |t: f64| zernike_radial_sq(n, m, alpha, t) * (1.0 - t).powf(alpha - 1.0),
        0.0,
        r * r,
    )?;
    Ok(4.0 * PI * q.value)
}

/// `C_nm` on the diagonal.
pub fn c_n(n: u32, alpha: f64, r: f64) -> Result<f64> {
    c_nm(n, n, alpha, r)
}

/// Closed form of `C_0` : `(4π/α)(1 − (1 − R²)^α)`.
pub fn c0_closed_form(alpha: f64, r: f64) -> f64 {
    4.0 * PI / alpha * (1.0 - (1.0 - r * r).powf(alpha))
}

/// `∫_{D_R(i)} W_{ψₙ}ψₘ · conj(W_{ψₙ}ψₖ) dμ⁺` by polar quadrature in disk coordinates.
///
/// The integrand is evaluated through the half-plane closed form.
pub fn double_orthogonality_integral(n: u32, m: u32, k: u32, alpha: f64, r: f64) -> Result<Complex64> {
    check_radius(r)?;
    let n_phi = 2 * (n + m + k) as usize + 16;
    let radial = |t: f64| -> Complex64 {
        let sum: Complex64 = (0..n_phi)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let z = cayley(Complex64::from_polar(t, phi)).expect("inside the unit disk");
                basis_coeff_halfplane(n, m, alpha, z) * basis_coeff_halfplane(n, k, alpha, z).conj()
            })
            .sum();
        sum * (2.0 * PI / n_phi as f64 * 4.0 * t / ((1.0 - t * t) * (1.0 - t * t)))
    };
    let q = Adaptive {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Adaptive::default()
    }
    .integrate(radial, 0.0, r)?;
    Ok(q.value)
}

/// `|∫_{D_R} W_{ψₙ}ψₘ conj(W_{ψₙ}ψₖ) dμ⁺ − δ_{m,k} C_nm(R)|`.
pub fn double_orthogonality_residual(n: u32, m: u32, k: u32, alpha: f64, r: f64) -> Result<f64> {
    let lhs = double_orthogonality_integral(n, m, k, alpha, r)?;
    let rhs = if m == k { c_nm(n, m, alpha, r)? } else { 0.0 };
    Ok((lhs - rhs).norm())
}

/// A padded density supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    /// Supremum over candidate centers using every cell that touches both the disk and the dilated mask.
    pub value: f64,
    /// Center-rule value at the maximizing center.
    pub estimate: f64,
    /// `value − estimate` at the maximizing center.
    pub padding: f64,
    pub argmax: UHPoint,
}

impl DensityEstimate {
    fn empty() -> Self {
        Self {
            value: 0.0,
            estimate: 0.0,
            padding: 0.0,
            argmax: UHPoint::I,
        }
    }

    pub fn padding_fraction(&self) -> f64 {
        if self.value > 0.0 {
            self.padding / self.value
        } else {
            0.0
        }
    }
}

/// Per-row prefix counts of a mask, for O(rows) disk sums.
struct MaskIndex<'a> {
    grid: &'a HyperbolicGrid,
    dil_prefix: Vec<u32>,
    ind_prefix: Vec<u32>,
    rows: (usize, usize),
    cols: (usize, usize),
    /// Dilated column span `[lo, hi)` of each row.
    spans: Vec<(usize, usize)>,
}

impl<'a> MaskIndex<'a> {
    fn new(mask: &'a RegionMask) -> Option<Self> {
        let grid = mask.grid().as_ref();
        let (nx, ns) = (grid.nx(), grid.ns());
        let mut dil_prefix = vec![0u32; ns * (nx + 1)];
        let mut ind_prefix = vec![0u32; ns * (nx + 1)];
        let (mut rmin, mut rmax, mut cmin, mut cmax) = (usize::MAX, 0, usize::MAX, 0);
        let mut spans = vec![(0, 0); ns];
        for row in 0..ns {
            let base = row * (nx + 1);
            for col in 0..nx {
                let idx = row * nx + col;
                let d = mask.dilated()[idx];
                dil_prefix[base + col + 1] = dil_prefix[base + col] + d as u32;
                ind_prefix[base + col + 1] = ind_prefix[base + col] + mask.indicator()[idx] as u32;
                if d {
                    if spans[row].1 == 0 {
                        spans[row].0 = col;
                    }
                    spans[row].1 = col + 1;
                    rmin = rmin.min(row);
                    rmax = rmax.max(row);
                    cmin = cmin.min(col);
                    cmax = cmax.max(col);
                }
            }
        }
        (rmin != usize::MAX).then_some(Self {
            grid,
            dil_prefix,
            ind_prefix,
            rows: (rmin, rmax),
            cols: (cmin, cmax),
            spans,
        })
    }

    fn count(prefix: &[u32], nx: usize, row: usize, lo: usize, hi: usize) -> u32 {
        if hi <= lo {
            return 0;
        }
        let base = row * (nx + 1);
        prefix[base + hi] - prefix[base + lo]
    }

    /// Row range and, per row, the touching and center-rule column ranges of a circle.
    fn for_each_row(&self, c: &Circle, mut f: impl FnMut(usize, (usize, usize), (usize, usize))) {
        let g = self.grid;
        let nx = g.nx();
        let x_min = g.spec().x_min;
        let dx = g.dx();
        let r_lo = g.row_of(c.s - c.r).max(self.rows.0);
        let r_hi = g.row_of(c.s + c.r).min(self.rows.1);
        let clamp = |v: f64| v.max(0.0).min(nx as f64) as usize;
        for row in r_lo..=r_hi {
            let (lo, hi) = (g.s_edges()[row], g.s_edges()[row + 1]);
            let near = if c.s < lo {
                lo - c.s
            } else if c.s > hi {
                c.s - hi
            } else {
                0.0
            };
            if near >= c.r {
                continue;
            }
            let h = (c.r * c.r - near * near).sqrt();
            let touch = (
                clamp(((c.x - h - x_min) / dx).floor()),
                clamp(((c.x + h - x_min) / dx).ceil()),
            );
            let center = match c.half_chord(g.s_centers()[row]) {
                Some(hc) => (
                    clamp(((c.x - hc - x_min) / dx - 0.5).floor() + 1.0),
                    clamp(((c.x + hc - x_min) / dx - 0.5).ceil()),
                ),
                None => (0, 0),
            };
            f(row, touch, center);
        }
    }

    fn disk_measure(&self, c: &Circle) -> (f64, f64) {
        let nx = self.grid.nx();
        let mut sound = 0.0;
        let mut est = 0.0;
        self.for_each_row(c, |row, touch, center| {
            let w = self.grid.row_weights()[row];
            sound += Self::count(&self.dil_prefix, nx, row, touch.0, touch.1) as f64 * w;
            est += Self::count(&self.ind_prefix, nx, row, center.0, center.1) as f64 * w;
        });
        (sound, est)
    }

    /// Cells whose centers can see the dilated mask within radius `r`.
    fn candidate_cells(&self, r: f64) -> Vec<(usize, usize)> {
        let g = self.grid;
        let (x_lo, x_hi) = (g.x_edge(self.cols.0), g.x_edge(self.cols.1 + 1));
        let (s_lo, s_hi) = (g.s_edges()[self.rows.0], g.s_edges()[self.rows.1 + 1]);
        // A disk of radius r around height s spans heights s(1−r)/(1+r) .. s(1+r)/(1−r).
        let grow = (1.0 + r) / (1.0 - r);
        let mut out = Vec::new();
        for row in 0..g.ns() {
            let s = g.s_centers()[row];
            if s * grow < s_lo || s / grow > s_hi {
                continue;
            }
            let half = 2.0 * r * s / (1.0 - r * r);
            out.extend(
                (0..g.nx())
                    .filter(|&col| {
                        let x = g.x_center(col);
                        x + half >= x_lo && x - half <= x_hi
                    })
                    .map(|col| (row, col)),
            );
        }
        out
    }
}

fn disk_circle(z: UHPoint, r: f64) -> Circle {
    DiskSpec::new(z, r).expect("radius checked").circle()
}

fn better(a: &DensityEstimate, b: &DensityEstimate) -> bool {
    a.value > b.value || (a.value == b.value && (a.argmax.s(), a.argmax.x()) < (b.argmax.s(), b.argmax.x()))
}

fn check_padding(d: DensityEstimate) -> Result<DensityEstimate> {
    if d.padding_fraction() > 0.1 {
        return Err(Error::UnderResolved {
            scale: d.argmax.s(),
            detail: format!(
                "density padding is {:.1}% of the value at ({}, {})",
                100.0 * d.padding_fraction(),
                d.argmax.x(),
                d.argmax.s()
            ),
        });
    }
    Ok(d)
}

/// Maximum Nyquist density `sup_z |Δ ∩ D_R(z)|_h`, padded so it bounds the grid supremum from above.
pub fn max_nyquist_density(mask: &RegionMask, r: f64) -> Result<DensityEstimate> {
    check_radius(r)?;
    let Some(index) = MaskIndex::new(mask) else {
        return Ok(DensityEstimate::empty());
    };
    let g = index.grid;
    let nx = g.nx();
    let total: f64 = (0..g.ns())
        .map(|row| MaskIndex::count(&index.dil_prefix, nx, row, 0, nx) as f64 * g.row_weights()[row])
        .sum();
    // Primitive centers and mask cells first, so the early exit at the full mask measure triggers soon.
    let mut cands: Vec<UHPoint> = mask.primitives().iter().filter_map(|p| p.center()).collect();
    let cells = index.candidate_cells(r);
    let (inside, outside): (Vec<_>, Vec<_>) = cells.into_iter().partition(|&(row, col)| mask.dilated()[row * nx + col]);
    cands.extend(inside.into_iter().chain(outside).map(|(row, col)| g.center(g.index(row, col))));
    let mut best = DensityEstimate::empty();
    for chunk in cands.chunks(NYQUIST_CHUNK) {
        let local = chunk
            .par_iter()
            .map(|&z| {
                let (value, estimate) = index.disk_measure(&disk_circle(z, r));
                DensityEstimate {
                    value,
                    estimate,
                    padding: value - estimate,
                    argmax: z,
                }
            })
            .reduce(DensityEstimate::empty, |a, b| if better(&b, &a) { b } else { a });
        if better(&local, &best) {
            best = local;
        }
        if best.value >= total * (1.0 - 1e-12) {
            break;
        }
    }
    check_padding(best)
}

const NYQUIST_CHUNK: usize = 4096;
const KERNEL_COARSE_CANDIDATES: f64 = 1024.0;
const KERNEL_SEEDS: usize = 4;

/// Kernel-weighted density `sup_z ∫_{Δ∩D_R(z)} |⟨π(w')ψ, π(z)ψ⟩| dμ⁺(w')`.
///
/// The supremum is located by a decimated sweep followed by pattern search, so it is an estimate.
pub fn kernel_density(mask: &RegionMask, w: WaveletIndex, r: f64) -> Result<DensityEstimate> {
    check_radius(r)?;
    let Some(index) = MaskIndex::new(mask) else {
        return Ok(DensityEstimate::empty());
    };
    let grid = index.grid;
    let nx = grid.nx();
    let evaluate = |z: UHPoint| {
        let c = disk_circle(z, r);
        let mut sound = 0.0;
        let mut est = 0.0;
        index.for_each_row(&c, |row, touch, _| {
            let span = index.spans[row];
            let mut srow = 0.0;
            let mut erow = 0.0;
            for col in touch.0.max(span.0)..touch.1.min(span.1) {
                let idx = row * nx + col;
                if !mask.dilated()[idx] {
                    continue;
                }
                let center = grid.center(idx);
                let g = overlap_modulus(w, pseudo_dist_sq(z, center));
                srow += g;
                if mask.indicator()[idx] && c.contains(center.x(), center.s()) {
                    erow += g;
                }
            }
            let wr = grid.row_weights()[row];
            sound += srow * wr;
            est += erow * wr;
        });
        DensityEstimate {
            value: sound,
            estimate: est,
            padding: sound - est,
            argmax: z,
        }
    };
    let pick = |a: DensityEstimate, b: DensityEstimate| if better(&b, &a) { b } else { a };

    // Coarse sweep over a decimated set of candidate cells, then pattern search around the best seeds.
    let cells = index.candidate_cells(r);
    let stride = ((cells.len() as f64 / KERNEL_COARSE_CANDIDATES).sqrt().ceil() as usize).max(1);
    let mut seeds: Vec<(DensityEstimate, Option<(usize, usize)>)> = cells
        .par_iter()
        .filter(|(row, col)| row % stride == 0 && col % stride == 0)
        .map(|&(row, col)| (evaluate(grid.center(grid.index(row, col))), Some((row, col))))
        .collect();
    seeds.extend(
        mask.primitives()
            .iter()
            .filter_map(|p| p.center())
            .map(|z| (evaluate(z), None)),
    );
    seeds.sort_by(|a, b| b.0.value.total_cmp(&a.0.value));
    let mut best = seeds.iter().map(|s| s.0).fold(DensityEstimate::empty(), pick);
    let (ns, nxi) = (grid.ns() as i64, nx as i64);
    let climbed = seeds
        .iter()
        .filter_map(|s| s.1.map(|cell| (s.0, cell)))
        .take(KERNEL_SEEDS)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(mut cur, (mut row, mut col))| {
            let mut step = stride as i64;
            while step > 0 {
                let mut moved = false;
                for (dr, dc) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                    let (nr, nc) = (row as i64 + dr * step, col as i64 + dc * step);
                    if nr < 0 || nc < 0 || nr >= ns || nc >= nxi {
                        continue;
                    }
                    let cand = evaluate(grid.center(grid.index(nr as usize, nc as usize)));
                    if cand.value > cur.value {
                        cur = cand;
                        row = nr as usize;
                        col = nc as usize;
                        moved = true;
                    }
                }
                if !moved {
                    step /= 2;
                }
            }
            cur
        })
        .reduce(DensityEstimate::empty, pick);
    best = pick(best, climbed);
    check_padding(best)
}

/// 20 geometric radii in `[0.2, 0.98]`.
pub fn default_r_scan() -> Vec<f64> {
    let (lo, hi) = (0.2f64, 0.98f64);
    (0..20).map(|i| lo * (hi / lo).powf(i as f64 / 19.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundnessStatus {
    Sound,
    Advisory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Soundness {
    pub padding_applied: bool,
    pub max_padding_fraction: f64,
    pub status: SoundnessStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanEntry {
    pub r: f64,
    pub rho: f64,
    pub rho_estimate: f64,
    pub padding: f64,
    pub kernel_density: f64,
    pub c_r: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryCheck {
    pub inf_ratio: f64,
    pub measure_h: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionDescriptor {
    pub grid: GridSpec,
    pub primitives: Vec<Primitive>,
    pub measure_h: f64,
}

/// Concentration certificate for a region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveCertificate {
    pub region: RegionDescriptor,
    pub wavelet: WaveletIndex,
    pub p: f64,
    pub r_star: f64,
    pub rho: f64,
    pub c_r: f64,
    pub bound: f64,
    pub d_refined: Option<f64>,
    pub sound: Soundness,
    pub recovery_ok: bool,
    pub corollary: CorollaryCheck,
    pub scan: Vec<ScanEntry>,
}

fn scan_entry(mask: &RegionMask, w: WaveletIndex, r: f64) -> Result<ScanEntry> {
    let rho = max_nyquist_density(mask, r)?;
    let kd = kernel_density(mask, w, r)?;
    let c_r = c_n(w.n(), w.alpha(), r)?;
    Ok(ScanEntry {
        r,
        rho: rho.value,
        rho_estimate: rho.estimate,
        padding: rho.padding,
        kernel_density: kd.value,
        c_r,
        ratio: rho.value / c_r,
    })
}

/// Minimizes `ρ(Δ,R)/C_n(R)` over the scan, refined by three bisection rounds around the minimizer.
pub fn certificate(mask: &RegionMask, w: WaveletIndex, p: f64, r_scan: &[f64]) -> Result<SieveCertificate> {
    w.require_integrable()?;
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    if r_scan.is_empty() {
        return Err(Error::invalid("empty radius scan"));
    }
    let mut radii = r_scan.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    for &r in &radii {
        check_radius(r)?;
    }
    let mut scan: Vec<ScanEntry> = radii.iter().map(|&r| scan_entry(mask, w, r)).collect::<Result<_>>()?;

    let argmin = |s: &[ScanEntry]| {
        (0..s.len())
            .min_by(|&a, &b| s[a].ratio.total_cmp(&s[b].ratio))
            .expect("non-empty scan")
    };
    if scan.len() >= 2 {
        let i = argmin(&scan);
        let mut lo = scan[i.saturating_sub(1)].r;
        let mut hi = scan[(i + 1).min(scan.len() - 1)].r;
        let mut best = scan[i];
        for _ in 0..3 {
            let left = scan_entry(mask, w, 0.5 * (lo + best.r))?;
            let right = scan_entry(mask, w, 0.5 * (best.r + hi))?;
            scan.push(left);
            scan.push(right);
            let prev = best;
            if left.ratio < best.ratio {
                best = left;
            }
            if right.ratio < best.ratio {
                best = right;
            }
            if best.r == prev.r {
                lo = left.r;
                hi = right.r;
            } else if best.r == left.r {
                hi = prev.r;
            } else {
                lo = prev.r;
            }
        }
        scan.sort_by(|a, b| a.r.total_cmp(&b.r));
    }
    let best = scan[argmin(&scan)];
    let d_refined = scan
        .iter()
        .map(|e| e.kernel_density / e.c_r)
        .min_by(f64::total_cmp);
    let max_padding_fraction = scan
        .iter()
        .map(|e| if e.rho > 0.0 { e.padding / e.rho } else { 0.0 })
        .fold(0.0, f64::max);
    let measure = mask.measure_h();
    let recovery_ok = d_refined.unwrap_or(best.ratio) < 0.5;
    Ok(SieveCertificate {
        region: RegionDescriptor {
            grid: *mask.grid().spec(),
            primitives: mask.primitives().to_vec(),
            measure_h: measure,
        },
        wavelet: w,
        p,
        r_star: best.r,
        rho: best.rho,
        c_r: best.c_r,
        bound: best.ratio,
        d_refined,
        sound: Soundness {
            padding_applied: true,
            max_padding_fraction,
            status: if max_padding_fraction > 0.01 {
                SoundnessStatus::Advisory
            } else {
                SoundnessStatus::Sound
            },
        },
        recovery_ok,
        corollary: CorollaryCheck {
            inf_ratio: best.ratio,
            measure_h: measure,
            holds: best.ratio <= measure.max(mask.dilated_measure()),
        },
        scan,
    })
}

fn check_alpha_p(alpha: f64, p: f64, p_min: f64) -> Result<()> {
    if !(alpha > 1.0) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(p >= p_min) {
        return Err(Error::invalid(format!("p must be at least {p_min}, got {p}")));
    }
    Ok(())
}

/// Sharp concentration bound `1 − (1 + |Δ|_h/4π)^{1 − (α+1)p/2}`.
pub fn ramos_tilli_bound(measure_h: f64, alpha: f64, p: f64) -> Result<f64> {
    check_alpha_p(alpha, p, 1.0)?;
    if !(measure_h >= 0.0) {
        return Err(Error::invalid(format!("measure must be non-negative, got {measure_h}")));
    }
    Ok(1.0 - (1.0 + measure_h / (4.0 * PI)).powf(1.0 - 0.5 * (alpha + 1.0) * p))
}

/// Sharp Lieb constant `8π/((α+1)p − 2)`.
pub fn lieb_constant(alpha: f64, p: f64) -> Result<f64> {
    check_alpha_p(alpha, p, 2.0)?;
    Ok(8.0 * PI / ((alpha + 1.0) * p - 2.0))
}

/// Product of [`lieb_constant`] and [`ramos_tilli_bound`].
pub fn local_lieb_bound(measure_h: f64, alpha: f64, p: f64) -> Result<f64> {
    Ok(lieb_constant(alpha, p)? * ramos_tilli_bound(measure_h, alpha, p)?)
}

/// Smallest measure on which a function can be `ε`-concentrated: `4π(ε^{2/(2−(α+1)p)} − 1)`.
pub fn uncertainty_min_measure(epsilon: f64, alpha: f64, p: f64) -> Result<f64> {
    check_alpha_p(alpha, p, 1.0)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(4.0 * PI * (epsilon.powf(2.0 / (2.0 - (alpha + 1.0) * p)) - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralLiebReport {
    pub bound: f64,
    /// `∫ |W_ψ ψ₀| dμ⁺` (left Haar measure).
    pub l1_left: f64,
    /// `∫ |W_{ψ₀} ψ| dμ⁺`, computed as the right-Haar integral of `|W_ψ ψ₀|`.
    pub l1_right: f64,
    pub log_scale_range: (f64, f64),
}

/// Lieb-type bound for ψₙᵅ built from a Cauchy reference wavelet ψ₀^β.
pub fn general_lieb_bound(w: WaveletIndex, ref_alpha: f64, p: f64) -> Result<GeneralLiebReport> {
    check_alpha_p(ref_alpha, p, 2.0)?;
    let gl = GaussLegendre::new(12);
    let x_integral = |sigma: f64| -> Result<f64> {
        let s = sigma.exp();
        let q = Adaptive::with_rel_tol(1e-8).integrate(
            |theta: f64| {
                let sec = 1.0 / theta.cos();
                let x = (1.0 + s) * theta.tan();
                let z = UHPoint::new(x, s).expect("positive scale");
                mixed_cauchy_coeff(w.n(), w.alpha(), ref_alpha, z).norm() * (1.0 + s) * sec * sec
            },
            -0.5 * PI,
            0.5 * PI,
        )?;
        Ok(q.value)
    };
    let panel = |a: f64| -> Result<(f64, f64)> {
        let mut left = 0.0;
        let mut right = 0.0;
        for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
            let sigma = a + 0.5 * (1.0 + t);
            let j = x_integral(sigma)?;
            left += 0.5 * wt * j * (-sigma).exp();
            right += 0.5 * wt * j;
        }
        Ok((left, right))
    };
    let cap = 40;
    let mut l1_left = 0.0;
    let mut l1_right = 0.0;
    let mut range = (0.0, 0.0);
    for dir in [1.0f64, -1.0] {
        let mut k = 0;
        loop {
            let a = if dir > 0.0 { k as f64 } else { -(k as f64) - 1.0 };
            let (pl, pr) = panel(a)?;
            l1_left += pl;
            l1_right += pr;
            if dir > 0.0 {
                range.1 = a + 1.0;
            } else {
                range.0 = a;
            }
            k += 1;
            if pl <= 1e-5 * l1_left && pr <= 1e-5 * l1_right && k >= 2 {
                break;
            }
            if k >= cap {
                return Err(Error::Inconclusive(format!(
                    "L1 integrals still growing at log-scale {a}; transform is too heavy-tailed"
                )));
            }
        }
    }
    let l1 = l1_left.max(l1_right);
    let bound = 8.0 * PI / ((ref_alpha + 1.0) * p - 2.0) * (ref_alpha / (4.0 * PI) * l1).powf(p);
    Ok(GeneralLiebReport {
        bound,
        l1_left,
        l1_right,
        log_scale_range: range,
    })
}

/// Closed-form fields usable as convolution operands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `W_{ψₙᵅ}(π(at)ψₘᵅ)`.
    Coefficient { n: u32, m: u32, alpha: f64, at: UHPoint },
    /// `(1 − ϱ²/R²)²` inside the disk, zero outside.
    Bump { center: UHPoint, radius: f64 },
    Zero,
}

impl FieldSpec {
    pub fn eval(&self, z: UHPoint) -> Complex64 {
        match *self {
            FieldSpec::Coefficient { n, m, alpha, at } => basis_coeff(n, m, alpha, at.inv().mul(&z)),
            FieldSpec::Bump { center, radius } => {
                let t = pseudo_dist_sq(z, center) / (radius * radius);
                if t < 1.0 {
                    Complex64::new((1.0 - t) * (1.0 - t), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            FieldSpec::Zero => Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YoungReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub norm_reflected_g: f64,
    pub tail_mass: f64,
}

fn edge_fraction(grid: &HyperbolicGrid, vals: &[f64]) -> f64 {
    let (nx, ns) = (grid.nx(), grid.ns());
    let total: f64 = vals.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let edge: f64 = (0..grid.len())
        .filter(|&i| {
            let (r, c) = grid.row_col(i);
            r == 0 || r + 1 == ns || c == 0 || c + 1 == nx
        })
        .map(|i| vals[i])
        .sum();
    edge / total
}

/// Evaluates `‖F∗G‖_r − ‖F‖_p·max(‖G‖_q, ‖𝓡G‖_q)` by group quadrature on a grid.
pub fn young_convolution_check(
    f: &FieldSpec,
    g: &FieldSpec,
    p: f64,
    q: f64,
    r: f64,
    grid: &Arc<HyperbolicGrid>,
) -> Result<YoungReport> {
    for v in [p, q, r] {
        if !(v >= 1.0) {
            return Err(Error::invalid(format!("exponents must be >= 1, got {v}")));
        }
    }
    if (1.0 + 1.0 / r - 1.0 / p - 1.0 / q).abs() > 1e-12 {
        return Err(Error::invalid("exponents must satisfy 1 + 1/r = 1/p + 1/q"));
    }
    let n = grid.len();
    let fv: Vec<Complex64> = (0..n).map(|i| f.eval(grid.center(i))).collect();
    let weights: Vec<f64> = (0..n).map(|i| grid.weight(i)).collect();
    let conv: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let z = grid.center(i);
            (0..n)
                .filter(|&j| fv[j] != Complex64::new(0.0, 0.0))
                .map(|j| fv[j] * g.eval(grid.center(j).inv().mul(&z)) * weights[j])
                .sum()
        })
        .collect();
    let fp: Vec<f64> = (0..n).map(|i| fv[i].norm().powf(p) * weights[i]).collect();
    let gq: Vec<f64> = (0..n).map(|i| g.eval(grid.center(i)).norm().powf(q)).collect();
    let norm_f = fp.iter().sum::<f64>().powf(1.0 / p);
    let gl: Vec<f64> = (0..n).map(|i| gq[i] * weights[i]).collect();
    let norm_g = gl.iter().sum::<f64>().powf(1.0 / q);
    let norm_reflected_g = (0..n)
        .map(|i| gq[i] * grid.right_haar_weight(grid.row_col(i).0))
        .sum::<f64>()
        .powf(1.0 / q);
    let lhs = (0..n)
        .map(|i| conv[i].norm().powf(r) * weights[i])
        .sum::<f64>()
        .powf(1.0 / r);
    let tail_mass = edge_fraction(grid, &fp).max(edge_fraction(grid, &gl));
    if tail_mass > 1e-2 {
        return Err(Error::Inconclusive(format!(
            "operands carry {tail_mass:.2e} of their mass on the grid boundary"
        )));
    }
    let rhs = norm_f * norm_g.max(norm_reflected_g);
    Ok(YoungReport {
        lhs,
        rhs,
        residual: lhs - rhs,
        norm_f,
        norm_g,
        norm_reflected_g,
        tail_mass,
    })
}
