//! Orthogonal polynomials and gamma ratios.
//!
//! Polynomials are evaluated by their ascending three-term recurrences.
//! Gamma ratios are carried in log space with an explicit sign.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A pair of polynomial degrees `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolyDegreePair {
    pub n: u32,
    pub m: u32,
}

impl PolyDegreePair {
    pub fn new(n: u32, m: u32) -> Self {
        Self { n, m }
    }

    pub fn min(&self) -> u32 {
        self.n.min(self.m)
    }

    pub fn max(&self) -> u32 {
        self.n.max(self.m)
    }

    pub fn diff(&self) -> u32 {
        self.n.abs_diff(self.m)
    }
}

/// `Γ(a) / Γ(b)` stored as `sign · exp(log_value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatio {
    pub log_value: f64,
    pub sign: f64,
}

impl GammaRatio {
    pub fn new(a: f64, b: f64) -> Self {
        let (la, sa) = ln_gamma(a);
        let (lb, sb) = ln_gamma(b);
        Self {
            log_value: la - lb,
            sign: sa * sb,
        }
    }

    pub fn value(&self) -> f64 {
        self.sign * self.log_value.exp()
    }
}

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

/// Generalized Laguerre polynomial `L_n^α(t)`.
pub fn laguerre(n: u32, alpha: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - t;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - t) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Jacobi polynomial `P_n^{(a,b)}(x)`.
pub fn jacobi(n: u32, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 0.5 * ((a + b + 2.0) * x + a - b);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Terminating hypergeometric value `F(−m, −n; −m−n−α; z)`.
///
/// Always evaluated through its Jacobi form, which stays finite for integer `α`
/// where the raw series would divide by zero.
pub fn hyp2f1_terminating(m: u32, n: u32, alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let deg = PolyDegreePair::new(n, m);
    let k = deg.min();
    if k == 0 {
        return Ok(1.0);
    }
    if z == 0.0 {
        return Err(Error::ZeroArgument(k));
    }
    let kf = k as f64;
    let big = deg.max() as f64;
    let log_pref = ln_gamma(kf + 1.0).0 + ln_gamma(big + alpha + 1.0).0
        - ln_gamma((n + m) as f64 + alpha + 1.0).0;
    let p = jacobi(k, deg.diff() as f64, alpha, 1.0 - 2.0 / z);
    Ok(log_pref.exp() * (-z).powi(k as i32) * p)
}

/// Normalization `sqrt(Γ(max+α+1)·min! / (Γ(min+α+1)·max!))` shared by the Zernike-type family.
pub fn zernike_norm(n: u32, m: u32, alpha: f64) -> f64 {
    let deg = PolyDegreePair::new(n, m);
    let k = deg.min() as f64;
    let big = deg.max() as f64;
    let log_sq = ln_gamma(big + alpha + 1.0).0 + ln_gamma(k + 1.0).0
        - ln_gamma(k + alpha + 1.0).0
        - ln_gamma(big + 1.0).0;
    (0.5 * log_sq).exp()
}

/// `t^{n+m} Z_{n,m}^α(t)^2`, the radial weight of the local orthogonality constants.
pub fn zernike_radial_sq(n: u32, m: u32, alpha: f64, t: f64) -> f64 {
    let deg = PolyDegreePair::new(n, m);
    let norm = zernike_norm(n, m, alpha);
    let p = jacobi(deg.min(), deg.diff() as f64, alpha, 1.0 - 2.0 * t);
    norm * norm * t.powi(deg.diff() as i32) * p * p
}

/// `u^m ū^n Z_{n,m}^α(|u|²)` with the `|u|^{-2 min(n,m)}` factor cancelled analytically.
pub fn zernike_weighted(n: u32, m: u32, alpha: f64, u: Complex64) -> Complex64 {
    let deg = PolyDegreePair::new(n, m);
    let k = deg.min();
    let p = jacobi(k, deg.diff() as f64, alpha, 1.0 - 2.0 * u.norm_sqr());
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mono = u.powu(m - k) * u.conj().powu(n - k);
    mono * (sign * zernike_norm(n, m, alpha) * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(a: f64, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (a - j as f64) / (j as f64 + 1.0))
    }

    /// Double-double number used to evaluate the alternating oracle sums without cancellation loss.
    #[derive(Clone, Copy)]
    struct Dd(f64, f64);

    impl Dd {
        fn from(x: f64) -> Self {
            Dd(x, 0.0)
        }

        fn add(self, o: Dd) -> Dd {
            let s = self.0 + o.0;
            let bb = s - self.0;
            let err = (self.0 - (s - bb)) + (o.0 - bb);
            let lo = err + self.1 + o.1;
            let hi = s + lo;
            Dd(hi, lo - (hi - s))
        }

        fn mul(self, o: Dd) -> Dd {
            let p = self.0 * o.0;
            let err = self.0.mul_add(o.0, -p);
            let lo = err + self.0 * o.1 + self.1 * o.0;
            let hi = p + lo;
            Dd(hi, lo - (hi - p))
        }

        fn div(self, o: Dd) -> Dd {
            let q = self.0 / o.0;
            let r = self.add(o.mul(Dd::from(-q)));
            let q2 = r.0 / o.0;
            Dd::from(q).add(Dd::from(q2))
        }
    }

    fn binom_dd(a: f64, k: u32) -> Dd {
        (0..k).fold(Dd::from(1.0), |acc, j| {
            acc.mul(Dd::from(a).add(Dd::from(-(j as f64)))).div(Dd::from(j as f64 + 1.0))
        })
    }

    fn laguerre_sum(n: u32, alpha: f64, t: f64) -> f64 {
        let mut acc = Dd::from(0.0);
        let mut pow = Dd::from(1.0);
        let mut fact = Dd::from(1.0);
        for k in 0..=n {
            if k > 0 {
                pow = pow.mul(Dd::from(t));
                fact = fact.mul(Dd::from(k as f64));
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = binom_dd(n as f64 + alpha, n - k).mul(pow).div(fact).mul(Dd::from(sign));
            acc = acc.add(term);
        }
        acc.0
    }

    fn jacobi_sum(n: u32, a: f64, b: f64, x: f64) -> f64 {
        (0..=n)
            .map(|k| {
                binom(n as f64 + a, n - k)
                    * binom(n as f64 + b, k)
                    * ((x - 1.0) / 2.0).powi(k as i32)
                    * ((x + 1.0) / 2.0).powi((n - k) as i32)
            })
            .sum()
    }

    fn hyp_series(m: u32, n: u32, alpha: f64, z: f64) -> f64 {
        let c = -(m as f64) - n as f64 - alpha;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..m.min(n) {
            let k = k as f64;
            term *= (-(m as f64) + k) * (-(n as f64) + k) / ((c + k) * (k + 1.0)) * z;
            sum += term;
        }
        sum
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre(0, 1.3, 7.0), 1.0);
        assert!(laguerre(1, 2.0, 3.0).abs() < 1e-15);
        assert!((laguerre(2, 0.0, 2.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for n in 0..=10 {
            for &alpha in &[0.5, 1.5, 3.0] {
                for i in 0..100 {
                    let t = 20.0 * i as f64 / 99.0;
                    let r = laguerre(n, alpha, t);
                    let s = laguerre_sum(n, alpha, t);
                    assert!(rel(r, s) <= 1e-11, "n={n} a={alpha} t={t}: {r} vs {s}");
                }
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(0, 0.3, 0.4, 0.1), 1.0);
        assert!((jacobi(1, 0.0, 2.5, 0.2) + 0.8).abs() < 1e-15);
        for n in 0..8 {
            let a = 1.7;
            assert!(rel(jacobi(n, a, 0.4, 1.0), binom(n as f64 + a, n)) < 1e-13);
        }
    }

    #[test]
    fn jacobi_matches_explicit_sum() {
        for n in 0..=10 {
            for &a in &[0.5, 1.5, 3.0] {
                for &b in &[0.5, 1.5, 3.0] {
                    for i in 0..100 {
                        let x = -1.0 + 2.0 * i as f64 / 99.0;
                        let r = jacobi(n, a, b, x);
                        let s = jacobi_sum(n, a, b, x);
                        assert!(rel(r, s) <= 1e-11, "n={n} a={a} b={b} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_ratio_matches_direct() {
        for &(a, b) in &[(3.5, 1.2), (0.3, 7.0), (29.0, 30.0), (12.25, 2.5)] {
            let direct = libm::tgamma(a) / libm::tgamma(b);
            assert!((GammaRatio::new(a, b).value() - direct).abs() <= 1e-12 * direct.abs());
        }
        let big = GammaRatio::new(110.0, 50.0);
        assert!(big.log_value.is_finite() && big.sign == 1.0);
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1_terminating(0, 3, 1.2, 5.0).unwrap(), 1.0);
        let v = hyp2f1_terminating(1, 1, 2.0, 3.0).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
        assert!((v - hyp_series(1, 1, 2.0, 3.0)).abs() < 1e-14);
        assert!(matches!(
            hyp2f1_terminating(2, 1, 2.0, 0.0),
            Err(Error::ZeroArgument(1))
        ));
        assert_eq!(hyp2f1_terminating(0, 1, 2.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn hyp2f1_matches_series() {
        for m in 0..=5 {
            for n in 0..=5 {
                for &alpha in &[0.7, 2.0, 4.0] {
                    for i in 0..40 {
                        let z = 1.2 + (20.0 - 1.2) * i as f64 / 39.0;
                        let j = hyp2f1_terminating(m, n, alpha, z).unwrap();
                        let s = hyp_series(m, n, alpha, z);
                        assert!((j - s).abs() <= 1e-10 * s.abs().max(1.0), "{m} {n} {alpha} {z}");
                    }
                }
            }
        }
    }

    #[test]
    fn hyp2f1_integer_alpha_is_finite() {
        let v = hyp2f1_terminating(3, 4, 2.0, 2.5).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn zernike_continuous_at_origin() {
        for n in 0..4 {
            for m in 0..4 {
                let a = zernike_weighted(n, m, 2.5, Complex64::new(1e-6, 0.0));
                let b = zernike_weighted(n, m, 2.5, Complex64::new(1e-8, 0.0));
                let k = n.min(m);
                let scale = zernike_norm(n, m, 2.5) * jacobi(k, n.abs_diff(m) as f64, 2.5, 1.0);
                assert!((a - b).norm() <= 1e-6 * scale);
            }
        }
        for n in 1..5 {
            let v = zernike_weighted(n, n, 1.7, Complex64::new(0.0, 0.0));
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v.re - want).abs() < 1e-14 && v.im == 0.0);
        }
    }

    #[test]
    fn zernike_matches_direct_definition() {
        let (n, m, alpha) = (1, 2, 2.0);
        let u = Complex64::new(0.3, 0.1);
        let t = u.norm_sqr();
        let z = zernike_norm(n, m, alpha) * (-t).powi(-1) * jacobi(1, 1.0, alpha, 1.0 - 2.0 * t);
        let direct = u.powu(m) * u.conj().powu(n) * z;
        assert!((zernike_weighted(n, m, alpha, u) - direct).norm() < 1e-14);
    }
}
