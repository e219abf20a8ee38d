//! The whitened constraint operator and its least-norm affine projection.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_part, identity, real_inner, trace, CMat};
use crate::overlaps::DissipatorOverlaps;

use super::{FeasibilityProblem, SolverOptions};

/// Problem expressed in an orthonormal basis of the ansatz span.
///
/// Unknowns are Hermitian `r × r` matrices `X` with `β = W X W†`. The
/// constraint operator is `C(X) = (G̃(X), Tr X, Tr(X Ñ_k))` with target
/// `(0, 1, n_k)`.
#[derive(Clone, Debug)]
pub struct WhitenedProblem {
    /// `W = V_r Λ_r^{-1/2}`, of shape `L × r`.
    pub transform: CMat,
    pub hamiltonian: CMat,
    pub dissipators: Vec<DissipatorOverlaps>,
    pub constraints: Vec<(CMat, f64)>,
    /// Largest Gram eigenvalue; bounds how whitened residuals grow when
    /// mapped back.
    pub gram_max: f64,
}

/// Value of the constraint operator: a Hermitian Galerkin residual plus the
/// scalar rows (trace first, then extras).
#[derive(Clone, Debug)]
pub struct ConstraintValue {
    pub matrix: CMat,
    pub scalars: DVector<f64>,
}

impl ConstraintValue {
    pub fn norm_squared(&self) -> f64 {
        self.matrix.norm_squared() + self.scalars.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    fn axpy(&mut self, a: f64, other: &ConstraintValue) {
        self.matrix += other.matrix.scale(a);
        self.scalars.axpy(a, &other.scalars, 1.0);
    }
}

pub fn whiten(problem: &FeasibilityProblem) -> Result<WhitenedProblem> {
    let set = &problem.overlaps;
    let (values, vectors) = eigh(&set.gram);
    let gram_max = values.iter().copied().fold(0.0, f64::max);
    if !(gram_max > f64::MIN_POSITIVE) {
        return Err(Error::DegenerateAnsatz);
    }
    let cutoff = problem.options.gram_cutoff * gram_max;
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > cutoff).collect();
    let mut transform = CMat::zeros(set.dim(), kept.len());
    // descending order so the leading direction comes first
    for (dst, &src) in kept.iter().rev().enumerate() {
        transform.set_column(dst, &vectors.column(src).unscale(values[src].sqrt()));
    }
    let map = |m: &CMat| transform.adjoint() * m * &transform;
    let map_h = |m: &CMat| hermitian_part(&map(m));
    Ok(WhitenedProblem {
        hamiltonian: map_h(&set.hamiltonian),
        dissipators: set
            .dissipators
            .iter()
            .map(|d| DissipatorOverlaps {
                rate: d.rate,
                jump: map(&d.jump),
                jump_product: map_h(&d.jump_product),
            })
            .collect(),
        constraints: problem
            .constraints
            .iter()
            .map(|c| (map_h(&c.observable.matrix), c.target))
            .collect(),
        transform,
        gram_max,
    })
}

impl WhitenedProblem {
    pub fn dim(&self) -> usize {
        self.transform.ncols()
    }

    pub fn back_transform(&self, x: &CMat) -> CMat {
        hermitian_part(&(&self.transform * x * self.transform.adjoint()))
    }

    /// Galerkin generator with identity Gram.
    fn galerkin(&self, x: &CMat) -> CMat {
        let d = &self.hamiltonian;
        let mut out = (d * x - x * d) * -crate::linalg::I;
        for n in &self.dissipators {
            let f = &n.jump_product;
            out += (&n.jump * x * n.jump.adjoint() - (f * x + x * f).scale(0.5)).scale(n.rate);
        }
        out
    }

    fn galerkin_adjoint(&self, y: &CMat) -> CMat {
        let d = &self.hamiltonian;
        let mut out = (d * y - y * d) * crate::linalg::I;
        for n in &self.dissipators {
            let f = &n.jump_product;
            out += (n.jump.adjoint() * y * &n.jump - (f * y + y * f).scale(0.5)).scale(n.rate);
        }
        out
    }

    pub fn apply(&self, x: &CMat) -> ConstraintValue {
        let mut scalars = DVector::zeros(1 + self.constraints.len());
        scalars[0] = trace(x).re;
        for (k, (n, _)) in self.constraints.iter().enumerate() {
            scalars[k + 1] = real_inner(n, x);
        }
        ConstraintValue {
            matrix: hermitian_part(&self.galerkin(x)),
            scalars,
        }
    }

    /// Adjoint of [`apply`](Self::apply) under the real inner products.
    pub fn adjoint(&self, v: &ConstraintValue) -> CMat {
        let mut out = hermitian_part(&self.galerkin_adjoint(&v.matrix));
        out += identity(self.dim()).scale(v.scalars[0]);
        for (k, (n, _)) in self.constraints.iter().enumerate() {
            out += n.scale(v.scalars[k + 1]);
        }
        out
    }

    pub fn target(&self) -> ConstraintValue {
        let mut scalars = DVector::zeros(1 + self.constraints.len());
        scalars[0] = 1.0;
        for (k, (_, t)) in self.constraints.iter().enumerate() {
            scalars[k + 1] = *t;
        }
        ConstraintValue {
            matrix: CMat::zeros(self.dim(), self.dim()),
            scalars,
        }
    }

    /// `C(X) - b`
    pub fn residual(&self, x: &CMat) -> ConstraintValue {
        let mut r = self.apply(x);
        r.axpy(-1.0, &self.target());
        r
    }

    /// Least-norm correction: `X + Δ` with `Δ` the minimum-norm minimiser
    /// of `‖C(X + Δ) - b‖`, by CGLS. Returns the corrected point and the
    /// remaining residual norm, which is positive when the affine set is
    /// empty.
    pub fn project_affine(&self, x: &CMat, options: &SolverOptions) -> Result<(CMat, f64)> {
        let mut rhs = self.residual(x);
        rhs.matrix.neg_mut();
        rhs.scalars.neg_mut();
        let (delta, res) = self.cgls(&rhs, options)?;
        Ok((x + delta, res))
    }

    fn cgls(&self, rhs: &ConstraintValue, options: &SolverOptions) -> Result<(CMat, f64)> {
        let r = self.dim();
        let mut x = CMat::zeros(r, r);
        let mut s = rhs.clone();
        let rhs_norm = rhs.norm();
        let abs_tol = options.inner_tol * rhs_norm.max(1.0);
        if rhs_norm <= abs_tol {
            return Ok((x, rhs_norm));
        }
        let mut g = self.adjoint(&s);
        let mut p = g.clone();
        let mut gamma = g.norm_squared();
        let g0 = gamma.sqrt();
        for it in 0..options.inner_max_iter {
            let q = self.apply(&p);
            let qq = q.norm_squared();
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            x += p.scale(alpha);
            s.axpy(-alpha, &q);
            g = self.adjoint(&s);
            let gamma_next = g.norm_squared();
            let s_norm = s.norm();
            // consistent system solved, or stationary for an inconsistent one
            if s_norm <= abs_tol || gamma_next.sqrt() <= options.inner_tol * g0 {
                log::trace!("cgls converged in {} iterations, residual {:.3e}", it + 1, s_norm);
                return Ok((x, s_norm));
            }
            p = &g + p.scale(gamma_next / gamma);
            gamma = gamma_next;
        }
        let s_norm = s.norm();
        Err(Error::NotConverged {
            what: "affine projection",
            residual: s_norm,
            iterations: options.inner_max_iter,
        })
    }

    /// Largest singular value squared of `C`, by power iteration.
    pub fn operator_norm_squared(&self, seed_matrix: &CMat) -> f64 {
        let mut x = seed_matrix.clone();
        let mut est = 0.0;
        for _ in 0..50 {
            let n = x.norm();
            if n == 0.0 {
                return 0.0;
            }
            x.unscale_mut(n);
            let y = self.adjoint(&self.apply(&x));
            let next = real_inner(&x, &y);
            let done = (next - est).abs() <= 1e-6 * next.abs();
            est = next;
            x = y;
            if done {
                break;
            }
        }
        est
    }
}
