//! The acceptance criteria as runnable checks with their own closed-form oracles.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hyperbolic::{make_grid, mask_from_primitives, AnnulusSpec, DiskSpec, GridSpec, HyperbolicGrid, Primitive, UHPoint};
use crate::recovery::{concentration_of, field_error, l1_recover, synthesize, AtomDictionary, RecoveryProblem, SolverParams};
use crate::sieve::{c_n, c_nm, certificate, default_r_scan, double_orthogonality_integral, max_nyquist_density};
use crate::special::hyp2f1_terminating;
use crate::transform::{forward_cwt, local_reproduce, lp_norm, CoefficientField, FreqSignal};
use crate::wavelet::{admissibility_checked, basis_coeff, cross_level_table, norm_squared_checked, WaveletIndex};

/// Identifier and title of every criterion.
pub const CRITERIA: [(u8, &str); 15] = [
    (1, "admissibility constant"),
    (2, "norm normalization"),
    (3, "double orthogonality"),
    (4, "closed form of C_0"),
    (5, "limit of C_n at R = 0.999"),
    (6, "local reproducing formula"),
    (7, "isometry"),
    (8, "Lp mass of the analytic atom"),
    (9, "Lieb sharpness"),
    (10, "Ramos-Tilli extremal pair"),
    (11, "certificate soundness"),
    (12, "Nyquist density examples"),
    (13, "exact L1 recovery"),
    (14, "hypergeometric reduction"),
    (15, "cross-level orthogonality"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestOptions {
    pub criteria: Vec<u8>,
    /// Multiplies every numerical tolerance.
    pub tolerance_scale: f64,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            criteria: CRITERIA.iter().map(|c| c.0).collect(),
            tolerance_scale: 1.0,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    /// Largest observed error, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub seconds: f64,
    pub detail: String,
}

impl CriterionReport {
    /// One summary line such as `PASS  3 double orthogonality ...`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<30} worst {:.3e} tol {:.1e} ({:.1} s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.worst,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    worst: f64,
    tolerance: f64,
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(worst: f64, tolerance: f64, detail: String) -> Self {
        Self {
            worst,
            tolerance,
            passed: worst <= tolerance,
            detail,
        }
    }

    fn within(mut self, seconds: f64, budget: f64) -> Self {
        if seconds >= budget {
            self.passed = false;
            self.detail.push_str(&format!("; runtime {seconds:.1} s exceeds {budget} s"));
        }
        self
    }
}

/// Runs one criterion. Library errors are reported as failures.
pub fn run_criterion(id: u8, opts: &SelftestOptions) -> CriterionReport {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown criterion", |c| c.1)
        .to_string();
    let start = Instant::now();
    let ts = opts.tolerance_scale;
    let out = match id {
        1 => c01(ts),
        2 => c02(ts),
        3 => c03(ts),
        4 => c04(ts),
        5 => c05(ts),
        6 => c06(ts),
        7 => c07(ts, opts.seed),
        8 => c08(ts),
        9 => c09(ts, opts.seed),
        10 => c10(ts, opts.seed),
        11 => c11(ts, opts.seed),
        12 => c12(ts),
        13 => c13(ts, opts.seed),
        14 => c14(ts, opts.seed),
        15 => c15(ts),
        _ => Err(crate::error::Error::invalid(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Ok(o) => CriterionReport {
            id,
            title,
            passed: o.passed,
            worst: o.worst,
            tolerance: o.tolerance,
            seconds,
            detail: o.detail,
        },
        Err(e) => CriterionReport {
            id,
            title,
            passed: false,
            worst: f64::NAN,
            tolerance: f64::NAN,
            seconds,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs the selected criteria in order.
pub fn run(opts: &SelftestOptions) -> Vec<CriterionReport> {
    opts.criteria.iter().map(|&id| run_criterion(id, opts)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn lieb(alpha: f64, p: f64) -> f64 {
    8.0 * PI / ((alpha + 1.0) * p - 2.0)
}

fn c01(ts: f64) -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 0..=4 {
        for &a in &[1.5, 2.0, 3.0, 5.0] {
            let q = admissibility_checked(WaveletIndex::new(n, a)?)?.quadrature;
            worst = worst.max(rel(q, 4.0 * PI / a));
        }
    }
    Ok(Outcome::new(worst, 1e-8 * ts, "n 0..4, alpha {1.5, 2, 3, 5}".into()).within(start.elapsed().as_secs_f64(), 1.0))
}

fn c02(ts: f64) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in 0..=4 {
        for &a in &[1.5, 2.0, 3.0, 5.0] {
            let q = norm_squared_checked(WaveletIndex::new(n, a)?)?.quadrature;
            worst = worst.max((q - 1.0).abs());
        }
    }
    Ok(Outcome::new(worst, 1e-8 * ts, "n 0..4, alpha {1.5, 2, 3, 5}".into()))
}

fn c03(ts: f64) -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 0..=2 {
        for &a in &[1.5, 2.5] {
            for &r in &[0.3, 0.6, 0.9] {
                let c: Vec<f64> = (0..=4).map(|m| c_nm(n, m, a, r)).collect::<Result<_>>()?;
                for m in 0..=4u32 {
                    for k in 0..=4u32 {
                        let lhs = double_orthogonality_integral(n, m, k, a, r)?;
                        let want = if m == k { c[m as usize] } else { 0.0 };
                        let scale = (c[m as usize] * c[k as usize]).sqrt();
                        worst = worst.max((lhs - want).norm() / scale);
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(Outcome::new(worst, 1e-7 * ts, format!("{count} integrals, error relative to sqrt(C_nm C_nk)"))
        .within(start.elapsed().as_secs_f64(), 30.0))
}

fn c04(ts: f64) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &a in &[0.5f64, 1.5, 2.5, 3.5, 4.5] {
        for &r in &[0.2f64, 0.4, 0.6, 0.8] {
            let closed = 4.0 * PI / a * (1.0 - (1.0 - r * r).powf(a));
            worst = worst.max(rel(c_n(0, a, r)?, closed));
        }
    }
    Ok(Outcome::new(worst, 1e-10 * ts, "20 (alpha, R) pairs".into()))
}

fn c05(ts: f64) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &a in &[3.0, 5.0] {
        for n in 0..=4 {
            worst = worst.max((c_n(n, a, 0.999)? - 4.0 * PI / a).abs());
        }
    }
    let low: Vec<String> = (0..=4)
        .map(|n| c_n(n, 2.0, 0.999).map(|c| format!("{:.1e}", 4.0 * PI / 2.0 - c)))
        .collect::<Result<_>>()?;
    Ok(Outcome::new(
        worst,
        1e-4 * ts,
        format!("alpha {{3, 5}}, n 0..4; deficits at alpha 2 for reference: {}", low.join(" ")),
    ))
}

fn c06(ts: f64) -> Result<Outcome> {
    let grid = make_grid(GridSpec::new(-8.0, 8.0, 1024, 1.0 / 16.0, 16.0, 512))?;
    let a = 2.0;
    let mut worst = 0.0f64;
    for n in 0..=2 {
        let w = WaveletIndex::new(n, a)?;
        let field = CoefficientField::from_fn(&grid, w, |z| basis_coeff(n, n, a, z))?;
        for &r in &[0.5, 0.8] {
            worst = worst.max((local_reproduce(&field, w, r, UHPoint::I)? - 1.0).norm());
        }
    }
    Ok(Outcome::new(worst, 1e-3 * ts, "alpha 2, n 0..2, R {0.5, 0.8}, prefactor 4pi/(alpha C_n(R))".into()))
}

/// Random combination of translated basis signals.
struct AtomSum {
    terms: Vec<(UHPoint, u32, Complex64)>,
    alpha: f64,
}

impl AtomSum {
    fn random(rng: &mut ChaCha8Rng, alpha: f64, m_max: u32, near: &[UHPoint], spread: f64) -> Result<Self> {
        let count = rng.random_range(1..=3usize);
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let base = near[rng.random_range(0..near.len())];
            let at = UHPoint::new(
                base.x() + spread * base.s() * rng.random_range(-1.0..1.0),
                base.s() * (0.5 * spread * rng.random_range(-1.0..1.0)).exp(),
            )?;
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            terms.push((at, rng.random_range(0..=m_max), c));
        }
        Ok(Self { terms, alpha })
    }

    fn signal(&self) -> Result<FreqSignal> {
        let mut acc: Option<FreqSignal> = None;
        for &(at, m, c) in &self.terms {
            let atom = FreqSignal::default_atom(m, self.alpha, at)?;
            acc = Some(match acc {
                None => atom.scaled(c),
                Some(f) => f.axpy(c, &atom)?,
            });
        }
        Ok(acc.expect("at least one term"))
    }

    /// `‖f‖²` from pairwise closed-form inner products.
    fn norm_sq(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(wj, mj, cj) in &self.terms {
            for &(wk, mk, ck) in &self.terms {
                acc += cj * ck.conj() * basis_coeff(mk, mj, self.alpha, wj.inv().mul(&wk));
            }
        }
        acc.re
    }
}

fn default_grid() -> Result<Arc<HyperbolicGrid>> {
    make_grid(GridSpec::default())
}

fn c07(ts: f64, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let grid = default_grid()?;
    let w = WaveletIndex::new(1, 2.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f = AtomSum::random(&mut rng, w.alpha(), 3, &[UHPoint::I], 1.5)?;
        let field = forward_cwt(&f.signal()?, w, &grid)?;
        worst = worst.max(rel(lp_norm(&field, 2.0, None)?, 4.0 * PI / w.alpha() * f.norm_sq()));
    }
    Ok(Outcome::new(worst, 5e-3 * ts, "10 random combinations, n 1, alpha 2.5, default grid".into())
        .within(start.elapsed().as_secs_f64(), 20.0))
}

fn c08(ts: f64) -> Result<Outcome> {
    let grid = default_grid()?;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &a in &[2.0, 3.0] {
        let w = WaveletIndex::new(0, a)?;
        let field = forward_cwt(&FreqSignal::default_atom(0, a, UHPoint::I)?, w, &grid)?;
        for &p in &[2.0, 3.0, 4.0] {
            let e = rel(lp_norm(&field, p, None)?, lieb(a, p));
            parts.push(format!("a{a}p{p}:{e:.1e}"));
            worst = worst.max(e);
        }
    }
    Ok(Outcome::new(worst, 1e-3 * ts, format!("relative errors {}", parts.join(" "))))
}

fn c09(ts: f64, seed: u64) -> Result<Outcome> {
    let grid = default_grid()?;
    let a = 2.0;
    let w = WaveletIndex::new(0, a)?;
    let ps = [3.0, 4.0];
    let ext = forward_cwt(&FreqSignal::default_atom(0, a, UHPoint::I)?, w, &grid)?;
    let mut eq_err = 0.0f64;
    for &p in &ps {
        eq_err = eq_err.max((lp_norm(&ext, p, None)? - lieb(a, p)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 9);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..20 {
        let f = AtomSum::random(&mut rng, a, 3, &[UHPoint::I], 1.5)?;
        let field = forward_cwt(&f.signal()?, w, &grid)?;
        let norm = f.norm_sq().sqrt();
        for &p in &ps {
            excess = excess.max(lp_norm(&field, p, None)? / norm.powf(p) - lieb(a, p));
        }
    }
    Ok(Outcome::new(
        eq_err.max(excess),
        1e-3 * ts,
        format!("alpha 2, p {{3, 4}}: equality error {eq_err:.2e}, largest excess over the constant {excess:.2e}"),
    ))
}

fn c10(ts: f64, seed: u64) -> Result<Outcome> {
    let grid = default_grid()?;
    let z0 = UHPoint::new(0.3, 1.5)?;
    let bound = |a: f64, p: f64, r: f64| {
        let m = 4.0 * PI * r * r / (1.0 - r * r);
        1.0 - (1.0 + m / (4.0 * PI)).powf(1.0 - 0.5 * (a + 1.0) * p)
    };
    let masks = [0.4, 0.7]
        .iter()
        .map(|&r| Ok((r, mask_from_primitives(&grid, &[Primitive::Disk(DiskSpec::new(z0, r)?)])?)))
        .collect::<Result<Vec<_>>>()?;
    let mut eq_err = 0.0f64;
    let mut gap = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 10);
    for &a in &[2.0, 3.0] {
        let w = WaveletIndex::new(0, a)?;
        let ext = forward_cwt(&FreqSignal::default_atom(0, a, z0)?, w, &grid)?;
        for &p in &[2.0, 4.0] {
            for (r, mask) in &masks {
                eq_err = eq_err.max((concentration_of(&ext, mask, p)? - bound(a, p, *r)).abs());
            }
        }
        for _ in 0..5 {
            let f = AtomSum::random(&mut rng, a, 2, &[z0], 1.0)?;
            let field = forward_cwt(&f.signal()?, w, &grid)?;
            for &p in &[2.0, 4.0] {
                for (r, mask) in &masks {
                    gap = gap.min(bound(a, p, *r) - concentration_of(&field, mask, p)?);
                }
            }
        }
    }
    let mut out = Outcome::new(
        eq_err,
        1e-3 * ts,
        format!("extremal error {eq_err:.2e}; smallest gap below the bound over 10 random signals {gap:.2e}"),
    );
    if !(gap > 0.0) {
        out.passed = false;
    }
    Ok(out)
}

fn c11(ts: f64, seed: u64) -> Result<Outcome> {
    let grid = make_grid(GridSpec::new(-4.0, 4.0, 1024, 0.125, 8.0, 512))?;
    let centers = [UHPoint::new(-1.2, 0.8)?, UHPoint::new(0.9, 0.6)?, UHPoint::new(0.2, 1.8)?];
    let prims = centers
        .iter()
        .map(|&c| Ok(Primitive::Disk(DiskSpec::new(c, 0.15)?)))
        .collect::<Result<Vec<_>>>()?;
    let mask = mask_from_primitives(&grid, &prims)?;
    let w = WaveletIndex::new(1, 2.0)?;
    let p = 2.0;
    let cert = certificate(&mask, w, p, &default_r_scan())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 11);
    let mut worst = f64::NEG_INFINITY;
    let mut most = 0.0f64;
    for _ in 0..20 {
        let f = AtomSum::random(&mut rng, w.alpha(), 2, &centers, 0.3)?;
        let field = forward_cwt(&f.signal()?, w, &grid)?;
        let measured = concentration_of(&field, &mask, p)?;
        most = most.max(measured);
        for e in &cert.scan {
            worst = worst.max(measured - e.ratio);
        }
    }
    Ok(Outcome::new(
        worst,
        1e-4 * ts,
        format!(
            "largest measured concentration {most:.4}, bound {:.4} at R* {:.3}, {} radii, padding up to {:.2}% ({:?})",
            cert.bound,
            cert.r_star,
            cert.scan.len(),
            100.0 * cert.sound.max_padding_fraction,
            cert.sound.status
        ),
    ))
}

fn c12(ts: f64) -> Result<Outcome> {
    let grid = make_grid(GridSpec::new(-1.5, 1.5, 512, 0.3, 3.3, 256))?;
    let (r, delta) = (0.4, 0.05);
    let exact = 4.0 * PI * r * r / (1.0 - r * r);
    let disk = Primitive::Disk(DiskSpec::new(UHPoint::I, r)?);
    let one = max_nyquist_density(&mask_from_primitives(&grid, &[disk])?, r)?;
    let ring = Primitive::Annulus(AnnulusSpec::new(UHPoint::I, r + delta, r + 2.0 * delta)?);
    let two = max_nyquist_density(&mask_from_primitives(&grid, &[disk, ring])?, r + delta)?;
    let e1 = rel(one.value, exact);
    let e2 = rel(two.value, exact);
    Ok(Outcome::new(
        e1.max(e2),
        0.02 * ts,
        format!(
            "|D_R|_h {exact:.5}; single disk {:.5} (padding {:.2}%), two-set R {r} delta {delta}: {:.5} (center rule {:.5}, padding {:.2}%) at ({:.3}, {:.3})",
            one.value,
            100.0 * one.padding_fraction(),
            two.value,
            two.estimate,
            100.0 * two.padding_fraction(),
            two.argmax.x(),
            two.argmax.s()
        ),
    ))
}

fn c13(ts: f64, seed: u64) -> Result<Outcome> {
    let grid = make_grid(GridSpec::new(-2.0, 2.0, 512, 0.25, 4.0, 256))?;
    let w = WaveletIndex::new(0, 3.0)?;
    let dict = AtomDictionary::lattice(&grid, w, 1, 0.4, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 13);
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let (mut solved, mut skipped) = (0, 0);
    while solved < 10 && skipped < 20 {
        let start = Instant::now();
        let center = UHPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-0.4f64..0.4).exp())?;
        let hole = Primitive::Disk(DiskSpec::new(center, rng.random_range(0.15..0.3))?);
        let mask = mask_from_primitives(&grid, &[hole])?;
        let cert = certificate(&mask, w, 1.0, &default_r_scan())?;
        if cert.bound >= 0.5 {
            skipped += 1;
            continue;
        }
        let mut truth = vec![Complex64::new(0.0, 0.0); dict.len()];
        for _ in 0..rng.random_range(1..=3usize) {
            let k = rng.random_range(0..dict.len());
            truth[k] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let problem = RecoveryProblem::from_truth(dict.clone(), mask, &truth, SolverParams::default())?;
        let result = l1_recover(&problem)?;
        let err = field_error(&synthesize(&result.coeffs, &problem)?, &synthesize(&truth, &problem)?)?;
        worst = worst.max(err);
        slowest = slowest.max(start.elapsed().as_secs_f64());
        solved += 1;
    }
    let mut out = Outcome::new(
        worst,
        1e-4 * ts,
        format!(
            "{solved} certified instances ({skipped} uncertified draws skipped), {} atoms, slowest {slowest:.1} s",
            dict.len()
        ),
    )
    .within(slowest, 60.0);
    if solved < 10 {
        out.passed = false;
    }
    Ok(out)
}

fn c14(ts: f64, seed: u64) -> Result<Outcome> {
    let series = |m: u32, n: u32, a: f64, z: f64| {
        let c = -(m as f64) - n as f64 - a;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 0..m.min(n) {
            let k = k as f64;
            term *= (k - m as f64) * (k - n as f64) / ((c + k) * (k + 1.0)) * z;
            sum += term;
        }
        sum
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 14);
    let mut worst = 0.0f64;
    for m in 0..=5 {
        for n in 0..=5 {
            for _ in 0..20 {
                let a = rng.random_range(0.05..5.0);
                let z = rng.random_range(1.5..10.0);
                let s = series(m, n, a, z);
                worst = worst.max((hyp2f1_terminating(m, n, a, z)? - s).abs() / s.abs().max(1.0));
            }
        }
    }
    Ok(Outcome::new(worst, 1e-10 * ts, "m, n 0..5, alpha in (0, 5), z in [1.5, 10]".into()))
}

fn c15(ts: f64) -> Result<Outcome> {
    let grid = make_grid(GridSpec::new(-256.0, 256.0, 8192, 1.0 / 512.0, 512.0, 640))?;
    let b = 4.0;
    let table = cross_level_table(b, &[0, 1, 2], &[0, 1], 2.0, &grid)?;
    let mut off = 0.0f64;
    let mut diag = Vec::new();
    let (mut iso, mut alt) = (0.0f64, 0.0f64);
    for e in &table {
        if e.report.expected_zero {
            off = off.max(e.report.value.norm());
        } else {
            let (ei, ea) = e.report.candidate_errors();
            iso = iso.max(ei);
            alt = alt.max(ea);
            if e.k == 0 {
                diag.push(format!(
                    "n{}: {:.6} (4pi/(2B-2n-1) {:.6}, 2/(2B-2n-1) {:.6})",
                    e.n, e.report.value.re, e.report.candidate_isometry, e.report.candidate_alternative
                ));
            }
        }
    }
    let matched = if iso <= 1e-3 * ts {
        "4pi/(2B-2n-1)"
    } else if alt <= 1e-3 * ts {
        "2/(2B-2n-1)"
    } else {
        "neither"
    };
    let mut out = Outcome::new(
        off,
        1e-4 * ts,
        format!(
            "B {b}, window [-256, 256] x [1/512, 512]: off-diagonal max {off:.2e}; diagonal matches {matched} (relative errors {iso:.1e} vs {alt:.1e}); {}",
            diag.join("; ")
        ),
    );
    if matched == "neither" {
        out.passed = false;
    }
    Ok(out)
}
