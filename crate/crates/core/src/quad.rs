//! Gauss–Legendre rules and adaptive panel-doubling integration.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Fixed-rule integral of `f` over `[a, b]`.
    pub fn integrate<T: QuadValue>(&self, f: &impl Fn(f64) -> T, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + f(mid + half * x) * (w * half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The 16-point rule used by every adaptive integral.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_depth: 48,
            max_panels: 200_000,
        }
    }
}

impl Adaptive {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]` by bisecting panels until each panel's
    /// 16-point value agrees with the sum over its halves.
    pub fn integrate<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64, b: f64) -> Result<QuadResult<T>> {
        let rule = gl16();
        let seed = 8;
        let h = (b - a) / seed as f64;
        let mut stack: Vec<(f64, f64, T, u32)> = (0..seed)
            .map(|i| {
                let lo = a + h * i as f64;
                let hi = if i + 1 == seed { b } else { lo + h };
                (lo, hi, rule.integrate(&f, lo, hi), 0)
            })
            .collect();
        let scale = stack.iter().fold(T::zero(), |acc, p| acc + p.2).magnitude();
        let abs_scale = stack.iter().map(|p| p.2.magnitude()).sum::<f64>().max(scale);
        let target = (self.rel_tol * abs_scale).max(self.abs_tol);
        let width = (b - a).abs();

        let mut total = T::zero();
        let mut err = 0.0;
        let mut panels = 0usize;
        let mut failed = false;
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = rule.integrate(&f, lo, mid);
            let right = rule.integrate(&f, mid, hi);
            let halves = left + right;
            let diff = (halves - whole).magnitude();
            let share = target * (hi - lo).abs() / width;
            if diff <= share || depth >= self.max_depth || panels + stack.len() >= self.max_panels {
                if diff > share {
                    failed = true;
                }
                total = total + halves;
                err += diff;
                panels += 1;
            } else {
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            }
        }
        let requested = target;
        if failed && err > requested {
            return Err(Error::QuadratureNonConvergence {
                achieved: err / abs_scale.max(f64::MIN_POSITIVE),
                requested: self.rel_tol,
                estimate: total.magnitude(),
            });
        }
        Ok(QuadResult {
            value: total,
            error_estimate: err,
            panels,
        })
    }

    /// Integrates over `[a, ∞)` through the map `t = a + v/(1 − v)`.
    pub fn integrate_to_infinity<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64) -> Result<QuadResult<T>> {
        self.integrate(
            |v| {
                let one_minus = 1.0 - v;
                let t = a + v / one_minus;
                let jac = 1.0 / (one_minus * one_minus);
                if t.is_finite() {
                    f(t) * jac
                } else {
                    T::zero()
                }
            },
            0.0,
            1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(16);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v = rule.integrate(&|x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = Adaptive::default().integrate(|x: f64| x.sqrt(), 0.0, 1.0).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        let r = Adaptive::default()
            .integrate_to_infinity(|t: f64| t.powf(2.5) * (-t).exp(), 0.0)
            .unwrap();
        let want = libm::tgamma(3.5);
        assert!((r.value - want).abs() < 1e-10 * want);
    }

    #[test]
    fn complex_integrand() {
        let r = Adaptive::default()
            .integrate(|t: f64| Complex64::new(0.0, t).exp(), 0.0, std::f64::consts::PI)
            .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let q = Adaptive {
            max_depth: 2,
            ..Adaptive::default()
        };
        let r = q.integrate(|x: f64| (1.0 / x.abs().max(1e-300)).sqrt(), -1.0, 1.0);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
