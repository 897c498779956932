//! Weighted L1 reconstruction of coefficient fields from observations outside a region.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{pseudo_dist_sq, HyperbolicGrid, RegionMask, UHPoint};
use crate::transform::{lp_norm, CoefficientField};
use crate::wavelet::{basis_coeff, WaveletIndex};

/// Largest supported dictionary.
pub const MAX_ATOMS: usize = 512;

/// `π(location)ψₘᵅ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub location: UHPoint,
    pub m: u32,
}

/// Finite family of atoms analysed with a fixed wavelet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDictionary {
    atoms: Vec<Atom>,
    wavelet: WaveletIndex,
}

impl AtomDictionary {
    pub fn new(atoms: Vec<Atom>, wavelet: WaveletIndex) -> Result<Self> {
        if atoms.is_empty() || atoms.len() > MAX_ATOMS {
            return Err(Error::invalid(format!(
                "dictionary needs 1..={MAX_ATOMS} atoms, got {}",
                atoms.len()
            )));
        }
        Ok(Self { atoms, wavelet })
    }

    /// Atoms with indices `0..=m_max` on a lattice of pseudohyperbolic spacing `spacing`
    /// covering the part of the grid window at hyperbolic distance `margin` from its edge.
    pub fn lattice(grid: &HyperbolicGrid, wavelet: WaveletIndex, m_max: u32, spacing: f64, margin: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing < 1.0) {
            return Err(Error::invalid(format!("spacing must lie in (0, 1), got {spacing}")));
        }
        let win = grid.window();
        let step = 2.0 * spacing.atanh();
        let dx_unit = 2.0 * spacing / (1.0 - spacing * spacing).sqrt();
        let (s_lo, s_hi) = (win.s_min * margin.exp(), win.s_max * (-margin).exp());
        let mut atoms = Vec::new();
        let mut s = (win.s_min * win.s_max).sqrt();
        while s / step.exp() >= s_lo {
            s /= step.exp();
        }
        while s <= s_hi {
            let dx = dx_unit * s;
            let pad = s * margin.sinh();
            let (x_lo, x_hi) = (win.x_min + pad, win.x_max - pad);
            if x_hi >= x_lo {
                let half = ((x_hi - x_lo) / (2.0 * dx)).floor() as i64;
                let mid = 0.5 * (x_lo + x_hi);
                for j in -half..=half {
                    let location = UHPoint::new(mid + j as f64 * dx, s)?;
                    atoms.extend((0..=m_max).map(|m| Atom { location, m }));
                }
            }
            s *= step.exp();
        }
        Self::new(atoms, wavelet)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn wavelet(&self) -> WaveletIndex {
        self.wavelet
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `W_{ψₙᵅ}(π(w_k)ψₘᵅ)(z)`.
    pub fn column_value(&self, k: usize, z: UHPoint) -> Complex64 {
        let a = self.atoms[k];
        basis_coeff(self.wavelet.n(), a.m, self.wavelet.alpha(), a.location.inv().mul(&z))
    }

    /// Dense `cells × atoms` synthesis matrix.
    pub fn matrix(&self, grid: &HyperbolicGrid) -> DMatrix<Complex64> {
        let n = grid.len();
        let data: Vec<Complex64> = (0..self.len())
            .into_par_iter()
            .flat_map_iter(|k| (0..n).map(move |i| self.column_value(k, grid.center(i))))
            .collect();
        DMatrix::from_vec(n, self.len(), data)
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Singular values below this fraction of the largest are treated as zero.
    pub rank_tolerance: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 50_000,
            rank_tolerance: 1e-9,
        }
    }
}

/// Observations of a field on the complement of a mask.
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    dictionary: AtomDictionary,
    mask: RegionMask,
    observations: Vec<Complex64>,
    params: SolverParams,
}

impl RecoveryProblem {
    /// `observations` lists the field on every cell outside the mask, in cell order.
    pub fn new(dictionary: AtomDictionary, mask: RegionMask, observations: Vec<Complex64>, params: SolverParams) -> Result<Self> {
        if observations.len() != mask.complement_len() {
            return Err(Error::SizeMismatch {
                expected: mask.complement_len(),
                got: observations.len(),
            });
        }
        Ok(Self {
            dictionary,
            mask,
            observations,
            params,
        })
    }

    /// Problem whose observations come from the dictionary combination `truth`.
    pub fn from_truth(dictionary: AtomDictionary, mask: RegionMask, truth: &[Complex64], params: SolverParams) -> Result<Self> {
        let field = synthesize_on(&dictionary, mask.grid(), truth)?;
        let observations = observed_cells(&mask).map(|i| field.values()[i]).collect();
        Self::new(dictionary, mask, observations, params)
    }

    pub fn dictionary(&self) -> &AtomDictionary {
        &self.dictionary
    }

    pub fn mask(&self) -> &RegionMask {
        &self.mask
    }

    pub fn grid(&self) -> &Arc<HyperbolicGrid> {
        self.mask.grid()
    }

    pub fn observations(&self) -> &[Complex64] {
        &self.observations
    }

    pub fn params(&self) -> SolverParams {
        self.params
    }
}

fn observed_cells(mask: &RegionMask) -> impl Iterator<Item = usize> + '_ {
    mask.indicator().iter().enumerate().filter(|(_, &m)| !m).map(|(i, _)| i)
}

fn synthesize_on(dict: &AtomDictionary, grid: &Arc<HyperbolicGrid>, coeffs: &[Complex64]) -> Result<CoefficientField> {
    if coeffs.len() != dict.len() {
        return Err(Error::SizeMismatch {
            expected: dict.len(),
            got: coeffs.len(),
        });
    }
    CoefficientField::from_fn(grid, dict.wavelet(), |z| {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| c * dict.column_value(k, z))
            .sum()
    })
}

/// Field of the dictionary combination with the given coefficients.
pub fn synthesize(coeffs: &[Complex64], problem: &RecoveryProblem) -> Result<CoefficientField> {
    synthesize_on(&problem.dictionary, problem.grid(), coeffs)
}

/// Weighted L1 objective `Σ |F(z)| w_cell`.
pub fn weighted_l1(field: &CoefficientField) -> f64 {
    lp_norm(field, 1.0, None).expect("p = 1 is valid")
}

/// `‖F·χ_Δ‖ₚᵖ / ‖F‖ₚᵖ`.
pub fn concentration_of(field: &CoefficientField, mask: &RegionMask, p: f64) -> Result<f64> {
    let total = lp_norm(field, p, None)?;
    if !(total > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(lp_norm(field, p, Some(mask))? / total)
}

/// Relative weighted L2 distance `‖F − G‖₂ / ‖G‖₂`.
pub fn field_error(field: &CoefficientField, reference: &CoefficientField) -> Result<f64> {
    if field.grid().spec() != reference.grid().spec() {
        return Err(Error::GridMismatch);
    }
    let grid = field.grid();
    let (num, den) = field
        .values()
        .iter()
        .zip(reference.values())
        .enumerate()
        .fold((0.0, 0.0), |(n, d), (i, (a, b))| {
            let w = grid.weight(i);
            (n + (a - b).norm_sqr() * w, d + b.norm_sqr() * w)
        });
    if !(den > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok((num / den).sqrt())
}

/// Outcome of [`l1_recover`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub coeffs: Vec<Complex64>,
    pub objective: f64,
    /// `‖(Ac)|_{Δᶜ} − b‖ / ‖b‖` in the weighted L2 norm.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dimension of the set of coefficient vectors matching the observations.
    pub nullity: usize,
}

/// Outcome of [`pdhg_weighted_l1`].
#[derive(Debug, Clone, PartialEq)]
pub struct PdhgResult {
    pub y: DVector<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

fn project_dual(p: &mut DVector<Complex64>, w: &[f64]) {
    for (v, &wi) in p.iter_mut().zip(w) {
        let r = v.norm();
        if r > wi {
            *v *= wi / r;
        }
    }
}

/// Minimizes `Σ wᵢ |u0ᵢ + (K y)ᵢ|` over complex `y` by diagonally preconditioned primal-dual splitting.
pub fn pdhg_weighted_l1(
    k: &DMatrix<Complex64>,
    u0: &DVector<Complex64>,
    w: &[f64],
    params: SolverParams,
) -> Result<PdhgResult> {
    let (rows, cols) = k.shape();
    if u0.len() != rows || w.len() != rows {
        return Err(Error::SizeMismatch {
            expected: rows,
            got: u0.len().min(w.len()),
        });
    }
    let mut y = DVector::<Complex64>::zeros(cols);
    if cols == 0 {
        return Ok(PdhgResult {
            y,
            iterations: 0,
            converged: true,
        });
    }
    let tau: Vec<f64> = k
        .column_iter()
        .map(|c| 1.0 / c.iter().map(|v| v.norm()).sum::<f64>().max(f64::MIN_POSITIVE))
        .collect();
    let sigma: Vec<f64> = k
        .row_iter()
        .map(|r| 1.0 / r.iter().map(|v| v.norm()).sum::<f64>().max(f64::MIN_POSITIVE))
        .collect();
    let mut p = DVector::from_iterator(
        rows,
        u0.iter().zip(w).map(|(u, &wi)| {
            let r = u.norm();
            if r > 0.0 {
                u * (wi / r)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    );
    let mut kty = k.ad_mul(&p);
    let scale = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let mut ky = DVector::<Complex64>::zeros(rows);
    for it in 1..=params.max_iterations {
        let y_new = DVector::from_iterator(cols, (0..cols).map(|j| y[j] - kty[j] * tau[j]));
        let ky_new = k * &y_new;
        let mut p_new = DVector::from_iterator(
            rows,
            (0..rows).map(|i| p[i] + (ky_new[i] * 2.0 - ky[i] + u0[i]) * sigma[i]),
        );
        project_dual(&mut p_new, w);
        let kty_new = k.ad_mul(&p_new);
        let primal: f64 = (0..cols)
            .map(|j| ((y[j] - y_new[j]) / tau[j] - (kty[j] - kty_new[j])).norm())
            .sum();
        let dual: f64 = (0..rows)
            .map(|i| ((p[i] - p_new[i]) / sigma[i] - (ky[i] - ky_new[i])).norm())
            .sum();
        y = y_new;
        ky = ky_new;
        p = p_new;
        kty = kty_new;
        if primal + dual / scale.max(1.0) < params.tolerance * scale.max(1.0) {
            return Ok(PdhgResult {
                y,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(PdhgResult {
        y,
        iterations: params.max_iterations,
        converged: false,
    })
}

/// Weighted L1 minimization over the dictionary span subject to matching the observations.
pub fn l1_recover(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    let grid = problem.grid();
    let dict = &problem.dictionary;
    let a = dict.matrix(grid);
    let weights: Vec<f64> = (0..grid.len()).map(|i| grid.weight(i)).collect();
    let obs: Vec<usize> = observed_cells(&problem.mask).collect();
    let k = dict.len();

    let sqrt_w: Vec<f64> = obs.iter().map(|&i| weights[i].sqrt()).collect();
    let a_obs = DMatrix::from_fn(obs.len(), k, |r, c| a[(obs[r], c)] * sqrt_w[r]);
    let b_obs = DVector::from_iterator(obs.len(), problem.observations.iter().zip(&sqrt_w).map(|(b, w)| b * *w));
    let b_norm = b_obs.norm();

    let (c_ls, null) = if obs.is_empty() {
        (DVector::zeros(k), DMatrix::identity(k, k))
    } else {
        let tall = obs.len() >= k;
        let r = if tall { a_obs.clone().qr().r() } else { a_obs.clone() };
        let rhs = if tall {
            a_obs.clone().qr().q().ad_mul(&b_obs)
        } else {
            b_obs.clone()
        };
        let svd = r.svd(true, true);
        let u = svd.u.expect("requested");
        let v_t = svd.v_t.expect("requested");
        let s_max = svd.singular_values.max();
        let cut = s_max * problem.params.rank_tolerance;
        let utb = u.ad_mul(&rhs);
        let mut c = DVector::<Complex64>::zeros(k);
        let mut null_cols = Vec::new();
        let ranked = svd.singular_values.len();
        for j in 0..ranked {
            let sv = svd.singular_values[j];
            let vj = v_t.row(j).adjoint();
            if sv > cut && sv > 0.0 {
                c += vj * (utb[j] / sv);
            } else {
                null_cols.push(vj);
            }
        }
        // Directions beyond the row count of a wide system are always null.
        if ranked < k {
            let basis = DMatrix::from_columns(
                &(0..ranked).map(|j| v_t.row(j).adjoint()).collect::<Vec<_>>(),
            );
            let complement = (DMatrix::identity(k, k) - &basis * basis.adjoint()).svd(true, false);
            let cu = complement.u.expect("requested");
            for j in 0..k {
                if complement.singular_values[j] > 0.5 {
                    null_cols.push(cu.column(j).into_owned());
                }
            }
        }
        let null = if null_cols.is_empty() {
            DMatrix::zeros(k, 0)
        } else {
            DMatrix::from_columns(&null_cols)
        };
        (c, null)
    };

    let residual_of = |c: &DVector<Complex64>| {
        if b_norm > 0.0 {
            (&a_obs * c - &b_obs).norm() / b_norm
        } else {
            (&a_obs * c).norm()
        }
    };
    let ls_residual = residual_of(&c_ls);
    if ls_residual > 1e-8 {
        return Err(Error::Infeasible { residual: ls_residual });
    }

    let (coeffs, iterations, converged) = if null.ncols() == 0 {
        (c_ls, 0, true)
    } else {
        let kmat = &a * &null;
        let u0 = &a * &c_ls;
        let res = pdhg_weighted_l1(&kmat, &u0, &weights, problem.params)?;
        (c_ls + &null * &res.y, res.iterations, res.converged)
    };
    let constraint_residual = residual_of(&coeffs);
    let field = &a * &coeffs;
    let objective = field.iter().zip(&weights).map(|(v, w)| v.norm() * w).sum();
    Ok(RecoveryResult {
        coeffs: coeffs.iter().copied().collect(),
        objective,
        constraint_residual,
        iterations,
        converged,
        nullity: null.ncols(),
    })
}

/// Smallest pseudohyperbolic distance between distinct dictionary locations.
pub fn min_separation(dict: &AtomDictionary) -> f64 {
    let atoms = dict.atoms();
    let mut best = 1.0f64;
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            if a.location != b.location {
                best = best.min(pseudo_dist_sq(a.location, b.location).sqrt());
            }
        }
    }
    best
}
