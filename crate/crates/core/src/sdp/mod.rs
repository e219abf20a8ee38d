//! Feasibility over the Hermitian PSD cone.
//!
//! Find `β ⪰ 0` with `G(β) = 0`, `Tr(βE) = 1` and optional extra rows
//! `Tr(βÑ_k) = n_k`. The problem is whitened so the Gram matrix becomes the
//! identity, then solved by Dykstra alternating projections between the
//! affine set and the cone. A projected-gradient least-squares mode handles
//! data for which no exactly feasible point exists.

mod affine;
mod least_squares;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_error, hermitian_fn, identity, real_inner, CMat, MatrixRecord};
use crate::overlaps::{ObservableMatrix, OverlapSet};

pub use affine::{whiten, ConstraintValue, WhitenedProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartPoint {
    /// Identity scaled to unit trace in the whitened basis.
    Identity,
    /// Random full-rank PSD matrix of unit trace.
    RandomPsd { rng_seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub psd_tol: f64,
    pub max_iter: usize,
    /// Gram eigenvalues below `gram_cutoff · λ_max` are discarded.
    pub gram_cutoff: f64,
    /// Relative tolerance of the inner CGLS solve.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Infeasibility is declared when the projection gap shrinks by less than
    /// a factor `stall_ratio` over `stall_window` iterations.
    pub stall_window: usize,
    pub stall_ratio: f64,
    pub start: StartPoint,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            psd_tol: 1e-9,
            max_iter: 10_000,
            gram_cutoff: 1e-10,
            inner_tol: 1e-13,
            inner_max_iter: 20_000,
            stall_window: 100,
            stall_ratio: 0.999,
            start: StartPoint::Identity,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("feas_tol", self.feas_tol),
            ("psd_tol", self.psd_tol),
            ("gram_cutoff", self.gram_cutoff),
            ("inner_tol", self.inner_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 || self.inner_max_iter == 0 || self.stall_window == 0 {
            return Err(Error::InvalidParameter("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Extra row `Tr(βÑ) = target`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub observable: ObservableMatrix,
    pub target: f64,
}

#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    pub overlaps: OverlapSet,
    pub constraints: Vec<LinearConstraint>,
    pub options: SolverOptions,
}

impl FeasibilityProblem {
    pub fn new(overlaps: OverlapSet) -> Self {
        Self {
            overlaps,
            constraints: Vec::new(),
            options: SolverOptions::default(),
        }
    }

    pub fn with_constraint(mut self, constraint: LinearConstraint) -> Self {
        self.constraints.push(constraint);
        self
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    fn validate(&self) -> Result<()> {
        self.options.validate()?;
        let l = self.overlaps.dim();
        let square = |m: &CMat| m.nrows() == l && m.ncols() == l;
        let ok = square(&self.overlaps.hamiltonian)
            && self.overlaps.dissipators.iter().all(|d| square(&d.jump) && square(&d.jump_product))
            && self.constraints.iter().all(|c| square(&c.observable.matrix));
        if !ok {
            return Err(Error::Shape(format!("all problem matrices must be {l}x{l}")));
        }
        Ok(())
    }

    /// Diagnostics of `β` measured in the original (unwhitened) basis.
    pub fn diagnostics(&self, beta: &CMat, iterations: usize) -> Diagnostics {
        let (values, _) = eigh(beta);
        let min_eig = values.iter().copied().fold(f64::INFINITY, f64::min);
        let constraint_error = self
            .constraints
            .iter()
            .map(|c| (real_inner(&c.observable.matrix, beta) - c.target).abs())
            .fold(0.0, f64::max);
        Diagnostics {
            subspace_residual: self.overlaps.galerkin(beta).norm(),
            psd_violation: min_eig.min(0.0),
            trace_error: (self.overlaps.trace_of(beta) - 1.0).abs(),
            constraint_error,
            hermitian_error: hermitian_error(beta),
            iterations,
            whitened_dim: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖G(β)‖_F`
    pub subspace_residual: f64,
    /// Most negative eigenvalue of `β`, or zero.
    pub psd_violation: f64,
    /// `|Tr(βE) - 1|`
    pub trace_error: f64,
    /// Largest `|Tr(βÑ_k) - n_k|`.
    pub constraint_error: f64,
    pub hermitian_error: f64,
    pub iterations: usize,
    pub whitened_dim: usize,
}

impl Diagnostics {
    pub fn is_feasible(&self, options: &SolverOptions) -> bool {
        self.subspace_residual <= options.feas_tol
            && self.trace_error <= options.feas_tol
            && self.constraint_error <= options.feas_tol
            && self.psd_violation >= -options.psd_tol
            && self.hermitian_error <= 1e-12
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Feasible,
    LeastSquares,
    Infeasible,
    IterationBudget,
}

/// Coefficients `β` of `ρ = Σ β_ij |χ_i⟩⟨χ_j|` with how they were obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaMatrix {
    pub beta: CMat,
    pub diagnostics: Diagnostics,
    pub status: SolveStatus,
}

/// Serialisable outcome of a solve, successful or not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<MatrixRecord>,
}

impl SolveReport {
    pub fn from_outcome(outcome: &Result<BetaMatrix>) -> Option<Self> {
        match outcome {
            Ok(b) => Some(Self {
                status: b.status,
                diagnostics: b.diagnostics.clone(),
                beta: Some((&b.beta).into()),
            }),
            Err(Error::Infeasible(d)) => Some(Self {
                status: SolveStatus::Infeasible,
                diagnostics: (**d).clone(),
                beta: None,
            }),
            Err(Error::IterationBudget(d)) => Some(Self {
                status: SolveStatus::IterationBudget,
                diagnostics: (**d).clone(),
                beta: None,
            }),
            Err(_) => None,
        }
    }
}

/// Nearest PSD matrix in Frobenius norm.
pub fn project_psd(x: &CMat) -> CMat {
    let (values, vectors) = eigh(x);
    hermitian_fn(&values, &vectors, |v| v.max(0.0))
}

/// Random unit-trace PSD matrix `AA†/Tr(AA†)` with Gaussian `A`.
pub fn random_psd(dim: usize, rng_seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let a = CMat::from_fn(dim, dim, |_, _| {
        num_complex::Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let p = &a * a.adjoint();
    let t = crate::linalg::trace(&p).re;
    p.unscale(t)
}

fn start_point(dim: usize, start: &StartPoint) -> CMat {
    match start {
        StartPoint::Identity => identity(dim).unscale(dim as f64),
        StartPoint::RandomPsd { rng_seed } => random_psd(dim, *rng_seed),
    }
}

fn finish(problem: &FeasibilityProblem, w: &WhitenedProblem, x: &CMat, iterations: usize, status: SolveStatus) -> BetaMatrix {
    let beta = w.back_transform(x);
    let mut diagnostics = problem.diagnostics(&beta, iterations);
    diagnostics.whitened_dim = w.dim();
    BetaMatrix {
        beta,
        diagnostics,
        status,
    }
}

/// Dykstra alternating projections. Returns a feasible `β` or an
/// `Infeasible`/`IterationBudget` error carrying the best diagnostics seen.
pub fn solve_feasibility(problem: &FeasibilityProblem) -> Result<BetaMatrix> {
    problem.validate()?;
    let opts = &problem.options;
    let w = whiten(problem)?;
    let r = w.dim();
    // whitened residuals grow by at most λ_max(E) when mapped back
    let mut tol = opts.feas_tol / w.gram_max.max(1.0) * 0.1;
    let inner = opts.clone();

    let start = start_point(r, &opts.start);
    let (mut x, mut x_residual) = w.project_affine(&start, &inner)?;
    if x_residual > tol.max(opts.inner_tol * 1e3) {
        log::debug!("affine set is empty: least-squares residual {x_residual:.3e}");
        let d = finish(problem, &w, &x, 0, SolveStatus::Infeasible).diagnostics;
        return Err(Error::Infeasible(Box::new(d)));
    }

    let mut increment = CMat::zeros(r, r);
    let mut best = (f64::INFINITY, x.clone(), 0usize);
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iter);
    for it in 1..=opts.max_iter {
        let shifted = &x + &increment;
        let y = project_psd(&shifted);
        increment = shifted - &y;
        let gap = (&x - &y).norm();
        history.push(gap);

        // x is affine to the inner tolerance, y is PSD exactly
        let x_ok = x_residual <= tol && crate::linalg::min_eigenvalue(&x) >= -opts.psd_tol * 0.1;
        let y_ok = x_ok || w.residual(&y).norm() <= tol;
        for (point, ok) in [(&x, x_ok), (&y, y_ok)] {
            if !ok {
                continue;
            }
            let out = finish(problem, &w, point, it, SolveStatus::Feasible);
            if out.diagnostics.is_feasible(opts) {
                log::debug!("feasible after {it} iterations (whitened dim {r})");
                return Ok(out);
            }
        }
        if x_ok || y_ok {
            // passed in the whitened basis only
            tol = (tol * 0.1).max(1e-16);
        }
        if gap < best.0 {
            best = (gap, y.clone(), it);
        }

        let window = opts.stall_window;
        if it > 2 * window && gap > tol && gap > opts.stall_ratio * history[it - 1 - window] {
            log::debug!("projection gap stalled at {gap:.3e} after {it} iterations");
            let d = finish(problem, &w, &best.1, it, SolveStatus::Infeasible).diagnostics;
            return Err(Error::Infeasible(Box::new(d)));
        }

        (x, x_residual) = w.project_affine(&y, &inner)?;
    }
    let d = finish(problem, &w, &best.1, opts.max_iter, SolveStatus::IterationBudget).diagnostics;
    Err(Error::IterationBudget(Box::new(d)))
}

/// Minimise `‖C(X) - b‖²` over unit-trace PSD matrices. Always returns a
/// valid density; its residuals are reported, not enforced.
pub fn solve_least_squares(problem: &FeasibilityProblem) -> Result<BetaMatrix> {
    problem.validate()?;
    let w = whiten(problem)?;
    let start = start_point(w.dim(), &problem.options.start);
    let (x, iterations) = least_squares::fista(&w, &start, &problem.options);
    Ok(finish(problem, &w, &x, iterations, SolveStatus::LeastSquares))
}

/// Projection of a Hermitian matrix onto `{X ⪰ 0, Tr X = 1}`.
pub fn project_density(x: &CMat) -> CMat {
    let (values, vectors) = eigh(x);
    let weights = project_simplex(&values);
    let mut scaled = vectors.clone();
    for (k, &w) in weights.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w);
    }
    scaled * vectors.adjoint()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}
