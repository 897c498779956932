//! The wavelet family ψₙᵅ: frequency profile, reproducing kernel and cross coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{cayley_inv, pseudo_dist_sq, UHPoint};
use crate::quad::Adaptive;
use crate::special::{jacobi, laguerre, ln_gamma, zernike_norm, zernike_weighted, PolyDegreePair};

/// Index `(n, α)` of the mother wavelet ψₙᵅ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIndex", into = "RawIndex")]
pub struct WaveletIndex {
    n: u32,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndex {
    n: u32,
    alpha: f64,
}

impl TryFrom<RawIndex> for WaveletIndex {
    type Error = Error;
    fn try_from(r: RawIndex) -> Result<Self> {
        WaveletIndex::new(r.n, r.alpha)
    }
}

impl From<WaveletIndex> for RawIndex {
    fn from(w: WaveletIndex) -> Self {
        RawIndex { n: w.n, alpha: w.alpha }
    }
}

impl WaveletIndex {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { n, alpha })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Fails unless `α > 1`, the range where the transform is integrable.
    pub fn require_integrable(&self) -> Result<()> {
        if self.alpha > 1.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!("this operation needs alpha > 1, got {}", self.alpha)))
        }
    }

    fn log_norm(&self) -> f64 {
        let a = self.alpha;
        0.5 * ((a + 2.0) * std::f64::consts::LN_2 + PI.ln() + ln_gamma(self.n as f64 + 1.0).0
            - ln_gamma(self.n as f64 + a + 1.0).0)
    }
}

/// Fourier transform of ψₙᵅ at frequency `t`; zero for `t ≤ 0`.
pub fn psi_hat(w: WaveletIndex, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let mag = (w.log_norm() + 0.5 * w.alpha * t.ln() - t).exp();
    mag * laguerre(w.n, w.alpha, 2.0 * t)
}

/// Frequency beyond which `|ψ̂ₙᵅ|` stays below `1e-16` of its peak.
pub fn effective_support(w: WaveletIndex) -> f64 {
    let last_zero = 0.5 * (4.0 * w.n as f64 + 2.0 * w.alpha + 2.0);
    let step = 0.125;
    let mut peak = 0.0f64;
    let mut t = step;
    while t <= last_zero + step {
        peak = peak.max(psi_hat(w, t).abs());
        t += step;
    }
    loop {
        let v = psi_hat(w, t).abs();
        peak = peak.max(v);
        if v < 1e-16 * peak {
            return t;
        }
        t += step;
    }
}

/// Admissibility constant `4π/α`.
pub fn admissibility(w: WaveletIndex) -> f64 {
    4.0 * PI / w.alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureCheck {
    pub closed_form: f64,
    pub quadrature: f64,
    pub residual: f64,
}

fn checked(closed_form: f64, quadrature: f64) -> Result<QuadratureCheck> {
    let residual = (quadrature - closed_form).abs() / closed_form.abs();
    if residual > 1e-6 {
        return Err(Error::Consistency(format!(
            "quadrature {quadrature} disagrees with closed form {closed_form} (relative {residual:e})"
        )));
    }
    Ok(QuadratureCheck {
        closed_form,
        quadrature,
        residual,
    })
}

/// `∫ |ψ̂|² t⁻¹ dt` by quadrature, compared with [`admissibility`].
pub fn admissibility_checked(w: WaveletIndex) -> Result<QuadratureCheck> {
    // t = v² keeps the integrand smooth at the origin.
    let q = Adaptive::with_rel_tol(1e-12).integrate_to_infinity(
        |v: f64| {
            let p = psi_hat(w, v * v);
            2.0 * p * p / v
        },
        0.0,
    )?;
    checked(admissibility(w), q.value)
}

/// `(1/2π) ∫ |ψ̂|² dt` by quadrature, compared with 1.
pub fn norm_squared_checked(w: WaveletIndex) -> Result<QuadratureCheck> {
    let q = Adaptive::with_rel_tol(1e-12).integrate_to_infinity(
        |v: f64| {
            let p = psi_hat(w, v * v);
            2.0 * p * p * v
        },
        0.0,
    )?;
    checked(1.0, q.value / (2.0 * PI))
}

/// A kernel value together with the pair of points it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub at: (UHPoint, UHPoint),
}

fn principal_pow(base: Complex64, exponent: f64) -> Complex64 {
    debug_assert!(base.re > 0.0, "power base {base} left the right half-plane");
    (base.ln() * exponent).exp()
}

/// Reproducing kernel `K(z, zw)` of the range of the transform.
pub fn kernel(w: WaveletIndex, z: UHPoint, zw: UHPoint) -> Complex64 {
    let a = w.alpha;
    let zc = z.to_complex();
    let wc = zw.to_complex();
    let rot = ((wc - zc.conj()) / (zc - wc.conj())).powu(w.n);
    let base = Complex64::i() * (wc.conj() - zc);
    let scale = (2.0 * (z.s() * zw.s()).sqrt()).powf(a + 1.0);
    let p = jacobi(w.n, 0.0, a, 1.0 - 2.0 * pseudo_dist_sq(z, zw));
    rot * principal_pow(base, -(a + 1.0)) * (scale * p * a / (4.0 * PI))
}

pub fn kernel_value(w: WaveletIndex, z: UHPoint, zw: UHPoint) -> KernelValue {
    KernelValue {
        value: kernel(w, z, zw),
        at: (z, zw),
    }
}

/// `|⟨π(w)ψ, π(z)ψ⟩|` as a function of `ϱ(z, w)²`.
pub fn overlap_modulus(w: WaveletIndex, rho_sq: f64) -> f64 {
    let a = w.alpha;
    (1.0 - rho_sq).powf(0.5 * (a + 1.0)) * jacobi(w.n, 0.0, a, 1.0 - 2.0 * rho_sq).abs()
}

/// Cross coefficient `W_{ψₙᵅ} ψₘᵅ(z)`.
///
/// Uses disk coordinates for `|u| < 0.99` and the half-plane form beyond.
pub fn basis_coeff(n: u32, m: u32, alpha: f64, z: UHPoint) -> Complex64 {
    let u = cayley_inv(z);
    if u.norm() < 0.99 {
        basis_coeff_disk(n, m, alpha, z)
    } else {
        basis_coeff_halfplane(n, m, alpha, z)
    }
}

/// Disk-coordinate evaluation of [`basis_coeff`].
pub fn basis_coeff_disk(n: u32, m: u32, alpha: f64, z: UHPoint) -> Complex64 {
    let u = cayley_inv(z);
    let one_minus = Complex64::new(1.0, 0.0) - u;
    let phase = Complex64::from_polar(1.0, (2.0 * n as f64 + alpha + 1.0) * one_minus.arg());
    let radial = (1.0 - u.norm_sqr()).powf(0.5 * (alpha + 1.0));
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    zernike_weighted(n, m, alpha, u) * phase * (sign * radial)
}

/// Half-plane evaluation of [`basis_coeff`].
pub fn basis_coeff_halfplane(n: u32, m: u32, alpha: f64, z: UHPoint) -> Complex64 {
    let deg = PolyDegreePair::new(n, m);
    let k = deg.min();
    let zc = z.to_complex();
    let i = Complex64::i();
    let zpi = zc + i;
    let u = (zc - i) / zpi;
    let v = (zc.conj() + i) / zpi;
    let q = -(zc.conj() - i) / zpi;
    let base = (Complex64::new(1.0, 0.0) - i * zc) / (2.0 * z.s().sqrt());
    let p = jacobi(k, deg.diff() as f64, alpha, 1.0 - 2.0 * u.norm_sqr());
    u.powu(m - k) * v.powu(n - k) * q.powu(k) * principal_pow(base, -(alpha + 1.0)) * (zernike_norm(n, m, alpha) * p)
}

/// Group element `w⁻¹·z` at which a translated atom's coefficient is read off.
pub fn coeff_covariance(field_point: UHPoint, atom_location: UHPoint) -> UHPoint {
    atom_location.inv().mul(&field_point)
}

/// `W_{ψₙᵃ} ψ₀ᵇ(z)` for possibly different parameters `a` and `b`.
pub fn mixed_cauchy_coeff(n: u32, a: f64, b: f64, z: UHPoint) -> Complex64 {
    let s = z.s();
    let gamma = 0.5 * (a + b);
    let big = Complex64::new(1.0 + s, -z.x());
    let ln_big = big.ln();
    let log_pref = WaveletIndex { n, alpha: a }.log_norm()
        + WaveletIndex { n: 0, alpha: b }.log_norm()
        + 0.5 * a * s.ln()
        + 0.5 * s.ln()
        - (2.0 * PI).ln();
    let lg_na = ln_gamma(n as f64 + a + 1.0).0;
    (0..=n)
        .map(|j| {
            let jf = j as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let log_l = lg_na - ln_gamma(jf + 1.0).0 - ln_gamma(n as f64 - jf + 1.0).0 - ln_gamma(a + jf + 1.0).0;
            let e = gamma + jf + 1.0;
            let log_mag = log_pref + log_l + jf * (2.0 * s).ln() + ln_gamma(e).0;
            (Complex64::new(log_mag, 0.0) - ln_big * e).exp() * sign
        })
        .sum()
}

/// Result of [`cross_level_orthogonality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossLevelReport {
    /// `⟨W_{ψₙ^{2B−2n−1}} ψₖ^β, W_{ψₘ^{2B−2m−1}} ψₗ^β⟩` by grid quadrature.
    pub value: Complex64,
    pub tail_mass: f64,
    pub expected_zero: bool,
    /// `4π/(2B−2n−1)`, the value for unit-norm signals under the isometry.
    pub candidate_isometry: f64,
    /// `2/(2B−2n−1)`.
    pub candidate_alternative: f64,
}

impl CrossLevelReport {
    /// Relative distances of the value to the two candidate constants.
    pub fn candidate_errors(&self) -> (f64, f64) {
        (
            (self.value - self.candidate_isometry).norm() / self.candidate_isometry,
            (self.value - self.candidate_alternative).norm() / self.candidate_alternative,
        )
    }
}

type Grid = std::sync::Arc<crate::hyperbolic::HyperbolicGrid>;

fn landau_alpha(b: f64, n: u32) -> Result<f64> {
    if !(b > 0.5) {
        return Err(Error::invalid(format!("B must exceed 1/2, got {b}")));
    }
    let a = 2.0 * b - 2.0 * n as f64 - 1.0;
    if !(a > 0.0) {
        return Err(Error::invalid(format!("level {n} needs 2B − 2n − 1 > 0 for B = {b}")));
    }
    Ok(a)
}

fn level_field(b: f64, n: u32, k: u32, signal_alpha: f64, grid: &Grid) -> Result<crate::transform::CoefficientField> {
    use crate::transform::{forward_cwt, FreqSignal};
    let top = (b - 0.5).floor() as u32;
    if k > top {
        return Err(Error::invalid(format!("signal index {k} exceeds {top}")));
    }
    let w = WaveletIndex::new(n, landau_alpha(b, n)?)?;
    let field = forward_cwt(&FreqSignal::default_atom(k, signal_alpha, UHPoint::I)?, w, grid)?;
    if field.tail_mass() > 1e-4 {
        return Err(Error::Inconclusive(format!(
            "level {n} field of signal {k} carries {:.2e} of its mass on the grid boundary",
            field.tail_mass()
        )));
    }
    Ok(field)
}

/// One entry of [`cross_level_table`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossLevelEntry {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub l: u32,
    pub report: CrossLevelReport,
}

/// [`cross_level_orthogonality_check`] for every combination of the given levels and signals,
/// transforming each signal once per level.
pub fn cross_level_table(b: f64, levels: &[u32], signals: &[u32], signal_alpha: f64, grid: &Grid) -> Result<Vec<CrossLevelEntry>> {
    use crate::transform::inner_product;
    let mut fields = Vec::new();
    for &n in levels {
        for &k in signals {
            fields.push(((n, k), level_field(b, n, k, signal_alpha, grid)?));
        }
    }
    let mut out = Vec::new();
    for ((n, k), left) in &fields {
        for ((m, l), right) in &fields {
            let a_n = landau_alpha(b, *n)?;
            out.push(CrossLevelEntry {
                n: *n,
                m: *m,
                k: *k,
                l: *l,
                report: CrossLevelReport {
                    value: inner_product(left, right, None)?,
                    tail_mass: left.tail_mass().max(right.tail_mass()),
                    expected_zero: n != m || k != l,
                    candidate_isometry: 4.0 * PI / a_n,
                    candidate_alternative: 2.0 / a_n,
                },
            });
        }
    }
    Ok(out)
}

/// Inner product of transforms across Landau levels `n`, `m` of a field strength `B`.
///
/// The signals are ψₖ^β and ψₗ^β at `i`, analysed with ψₙ^{2B−2n−1} and ψₘ^{2B−2m−1}.
/// Fails as inconclusive when either field carries more than `1e−4` of its mass on the grid boundary.
pub fn cross_level_orthogonality_check(
    b: f64,
    n: u32,
    m: u32,
    k: u32,
    l: u32,
    signal_alpha: f64,
    grid: &Grid,
) -> Result<CrossLevelReport> {
    let top = (b - 0.5).floor() as u32;
    if n.max(m) > top {
        return Err(Error::invalid(format!("levels must not exceed {top}")));
    }
    let left = level_field(b, n, k, signal_alpha, grid)?;
    let right = level_field(b, m, l, signal_alpha, grid)?;
    let a_n = landau_alpha(b, n)?;
    Ok(CrossLevelReport {
        value: crate::transform::inner_product(&left, &right, None)?,
        tail_mass: left.tail_mass().max(right.tail_mass()),
        expected_zero: n != m || k != l,
        candidate_isometry: 4.0 * PI / a_n,
        candidate_alternative: 2.0 / a_n,
    })
}
