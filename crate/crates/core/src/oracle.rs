//! Brute-force ground truth: the dense Liouvillian, its null space, exact
//! steady states and fidelities.
//!
//! Vectorisation is column stacking, `vec(BρC) = (Cᵀ ⊗ B) vec(ρ)`, so
//!
//! ```text
//! 𝓛 = -i(I⊗H - Hᵀ⊗I) + Σ_n γ_n (A_n*⊗A_n - ½ I⊗A_n†A_n - ½ (A_n†A_n)ᵀ⊗I)
//! ```

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, hermitian_part, hs_inner, identity, psd_sqrt, trace, unvec_col, vec_col, CMat, MatrixRecord, I, ONE, ZERO,
};
use crate::model::OpenSystemModel;
use crate::pauli::{PauliAction, PauliSum};
use crate::statevector::StateVector;

/// Largest qubit count for the dense superoperator. Seven qubits is allowed
/// through [`build_liouvillian_with_limit`] at a cost of about 4 GiB.
pub const DENSE_ORACLE_LIMIT: usize = 6;
/// Largest qubit count for the matrix-free solver.
pub const SPARSE_ORACLE_LIMIT: usize = 10;
/// Singular values below this fraction of the largest are null.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LiouvillianDense {
    pub dim: usize,
    pub matrix: CMat,
}

/// Dense operators of a model.
struct DenseModel {
    hamiltonian: CMat,
    jumps: Vec<(f64, CMat, CMat)>,
}

fn dense_model(model: &OpenSystemModel, limit: usize) -> Result<DenseModel> {
    let hamiltonian = model.hamiltonian.to_dense_with_limit(limit)?;
    let jumps = model
        .dissipators
        .iter()
        .map(|d| {
            let a = d.jump.to_dense_with_limit(limit)?;
            let ada = a.adjoint() * &a;
            Ok((d.rate, a, ada))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseModel { hamiltonian, jumps })
}

/// `target += scale · (a ⊗ b)`, skipping zero entries of `a`.
fn add_kron(target: &mut CMat, scale: Complex64, a: &CMat, b: &CMat) {
    let (br, bc) = b.shape();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let s = a[(i, j)] * scale;
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    target[(i * br + p, j * bc + q)] += s * b[(p, q)];
                }
            }
        }
    }
}

pub fn build_liouvillian(model: &OpenSystemModel) -> Result<LiouvillianDense> {
    build_liouvillian_with_limit(model, DENSE_ORACLE_LIMIT)
}

pub fn build_liouvillian_with_limit(model: &OpenSystemModel, limit: usize) -> Result<LiouvillianDense> {
    if model.n_qubits > limit {
        return Err(Error::SizeLimit {
            n_qubits: model.n_qubits,
            limit,
        });
    }
    if model.n_qubits > DENSE_ORACLE_LIMIT {
        let gib = (1u64 << (4 * model.n_qubits)) as f64 * 16.0 / (1u64 << 30) as f64;
        log::warn!("dense Liouvillian for {} qubits needs about {gib:.1} GiB", model.n_qubits);
    }
    let dm = dense_model(model, limit)?;
    let d = 1usize << model.n_qubits;
    let id = identity(d);
    let mut l = CMat::zeros(d * d, d * d);
    add_kron(&mut l, -I, &id, &dm.hamiltonian);
    add_kron(&mut l, I, &dm.hamiltonian.transpose(), &id);
    for (rate, a, ada) in &dm.jumps {
        let g = Complex64::new(*rate, 0.0);
        add_kron(&mut l, g, &a.conjugate(), a);
        add_kron(&mut l, g * -0.5, &id, ada);
        add_kron(&mut l, g * -0.5, &ada.transpose(), &id);
    }
    Ok(LiouvillianDense { dim: d, matrix: l })
}

impl LiouvillianDense {
    pub fn apply(&self, rho: &CMat) -> CMat {
        unvec_col(&(&self.matrix * vec_col(rho)), self.dim)
    }
}

/// `L[ρ]` evaluated directly from dense operators.
pub fn lindblad_action(model: &OpenSystemModel, rho: &CMat) -> Result<CMat> {
    let dm = dense_model(model, crate::pauli::DENSE_LIMIT)?;
    check_dim(model, rho)?;
    Ok(apply_dense(&dm, rho))
}

fn apply_dense(dm: &DenseModel, rho: &CMat) -> CMat {
    let h = &dm.hamiltonian;
    let mut out = (h * rho - rho * h) * -I;
    for (rate, a, ada) in &dm.jumps {
        out += (a * rho * a.adjoint() - (ada * rho + rho * ada).scale(0.5)).scale(*rate);
    }
    out
}

fn check_dim(model: &OpenSystemModel, rho: &CMat) -> Result<()> {
    let d = 1usize << model.n_qubits;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Shape(format!("density is {}x{}, expected {d}x{d}", rho.nrows(), rho.ncols())));
    }
    Ok(())
}

/// `‖L[ρ]‖_F`
pub fn true_residual(rho: &CMat, model: &OpenSystemModel) -> Result<f64> {
    Ok(lindblad_action(model, rho)?.norm())
}

/// Null space of the Liouvillian as Hermitian matrices.
#[derive(Clone, Debug)]
pub struct NessBasis {
    /// Physical elements come first, each unit trace and PSD; the rest are
    /// traceless-or-indefinite Hermitian completions with unit Frobenius norm.
    pub elements: Vec<CMat>,
    pub physical: Vec<bool>,
}

impl NessBasis {
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    pub fn physical_states(&self) -> impl Iterator<Item = &CMat> {
        self.elements.iter().zip(&self.physical).filter(|(_, &p)| p).map(|(e, _)| e)
    }

    pub fn physical_count(&self) -> usize {
        self.physical.iter().filter(|&&p| p).count()
    }

    pub fn to_record(&self) -> NessBasisRecord {
        NessBasisRecord {
            elements: self.elements.iter().map(MatrixRecord::from).collect(),
            physical: self.physical.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NessBasisRecord {
    pub elements: Vec<MatrixRecord>,
    pub physical: Vec<bool>,
}

/// Orthonormalise Hermitian matrices under `Re Tr(A†B)`, dropping
/// directions whose Gram eigenvalue is below `tol` relative.
fn orthonormalise(items: &[CMat], tol: f64) -> Vec<CMat> {
    if items.is_empty() {
        return Vec::new();
    }
    let k = items.len();
    let gram = CMat::from_fn(k, k, |i, j| Complex64::new(hs_inner(&items[i], &items[j]).re, 0.0));
    let (values, vectors) = eigh(&gram);
    let top = values[k - 1];
    let mut out = Vec::new();
    for c in (0..k).rev() {
        if values[c] <= tol * top {
            break;
        }
        let mut m = CMat::zeros(items[0].nrows(), items[0].ncols());
        for (i, item) in items.iter().enumerate() {
            m += item.scale(vectors[(i, c)].re);
        }
        out.push(hermitian_part(&m.unscale(values[c].sqrt())));
    }
    out
}

/// Greedy selection of linearly independent matrices, in order.
fn independent(items: Vec<CMat>, tol: f64) -> Vec<CMat> {
    let mut kept: Vec<CMat> = Vec::new();
    let mut ortho: Vec<CMat> = Vec::new();
    for m in items {
        let mut r = m.clone();
        for q in &ortho {
            let c = hs_inner(q, &r);
            r -= q * c;
        }
        let n = r.norm();
        if n > tol * m.norm() {
            ortho.push(r.unscale(n));
            kept.push(m);
        }
    }
    kept
}

fn random_real_combination(items: &[CMat], rng: &mut ChaCha8Rng) -> CMat {
    let mut m = CMat::zeros(items[0].nrows(), items[0].ncols());
    for item in items {
        let c: f64 = StandardNormal.sample(rng);
        m += item.scale(c);
    }
    m
}

/// Group eigenvectors of a Hermitian matrix by (numerically) equal
/// eigenvalue and return the eigenprojections.
fn eigenprojections(m: &CMat, tol: f64) -> Vec<CMat> {
    let (values, vectors) = eigh(m);
    let scale = values.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol * scale {
            let block = vectors.columns(start, k - start);
            out.push(&block * block.adjoint());
            start = k;
        }
    }
    out
}

/// Steady-state basis from the SVD of `𝓛`.
///
/// Stationary states are produced as `P₀(Π_μ / Tr Π_μ)`, where `P₀` is the
/// spectral projector onto the null space and `Π_μ` are eigenprojections of
/// a random conserved quantity. `P₀` is the long-time average of a CPTP
/// evolution, so these are genuine density matrices.
pub fn steady_states(model: &OpenSystemModel, tol: f64) -> Result<NessBasis> {
    steady_states_with_limit(model, tol, DENSE_ORACLE_LIMIT)
}

pub fn steady_states_with_limit(model: &OpenSystemModel, tol: f64, limit: usize) -> Result<NessBasis> {
    steady_states_of(&build_liouvillian_with_limit(model, limit)?, tol)
}

/// Spectral projector `P₀ = R (L†R)⁻¹ L†` onto the null space of `𝓛`,
/// together with Hermitian bases of stationary and conserved operators.
#[derive(Clone, Debug)]
pub struct StationaryProjector {
    dim: usize,
    right: CMat,
    left_adjoint: CMat,
    inverse: CMat,
    pub hermitian_null: Vec<CMat>,
    pub conserved: Vec<CMat>,
}

impl StationaryProjector {
    pub fn new(l: &LiouvillianDense, tol: f64) -> Result<Self> {
        let d = l.dim;
        let svd = SVD::new(l.matrix.clone(), true, true);
        let u = svd.u.as_ref().expect("left vectors requested");
        let v_t = svd.v_t.as_ref().expect("right vectors requested");
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let null: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] <= tol * top)
            .collect();
        if null.is_empty() {
            return Err(Error::NotConverged {
                what: "null space extraction",
                residual: svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min) / top,
                iterations: 0,
            });
        }
        let k = null.len();
        let right = DMatrix::from_fn(d * d, k, |i, j| v_t[(null[j], i)].conj());
        let left = DMatrix::from_fn(d * d, k, |i, j| u[(i, null[j])]);

        let hermitian_split = |cols: &CMat| -> Vec<CMat> {
            let mut out = Vec::with_capacity(2 * k);
            for c in 0..k {
                let m = unvec_col(&cols.column(c).into_owned(), d);
                out.push(hermitian_part(&m));
                out.push(hermitian_part(&(&m * -I)));
            }
            orthonormalise(&out, 1e-8)
        };
        let inverse = (left.adjoint() * &right)
            .try_inverse()
            .ok_or(Error::DegenerateSteadySpace(k))?;
        Ok(Self {
            dim: d,
            hermitian_null: hermitian_split(&right),
            conserved: hermitian_split(&left),
            left_adjoint: left.adjoint(),
            right,
            inverse,
        })
    }

    pub fn null_dimension(&self) -> usize {
        self.right.ncols()
    }

    /// Long-time limit of the evolution started from `rho`.
    pub fn project(&self, rho: &CMat) -> CMat {
        let coeffs = &self.inverse * (&self.left_adjoint * vec_col(rho));
        hermitian_part(&unvec_col(&(&self.right * coeffs), self.dim))
    }

    /// `P₀(Π / Tr Π)`, normalised to unit trace, or `None` if the
    /// projection carries no weight.
    pub fn stationary_state_from(&self, pi: &CMat) -> Option<CMat> {
        let rho = self.project(&pi.unscale(trace(pi).re));
        let t = trace(&rho).re;
        (t > 1e-8).then(|| rho.unscale(t))
    }
}

pub fn stationary_projector(model: &OpenSystemModel, tol: f64) -> Result<StationaryProjector> {
    StationaryProjector::new(&build_liouvillian(model)?, tol)
}

pub fn steady_states_of(l: &LiouvillianDense, tol: f64) -> Result<NessBasis> {
    let p0 = StationaryProjector::new(l, tol)?;
    let k = p0.null_dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probe = random_real_combination(&p0.conserved, &mut rng);
    let states: Vec<CMat> = eigenprojections(&probe, 1e-8)
        .iter()
        .filter_map(|pi| p0.stationary_state_from(pi))
        .collect();
    let states = independent(states, 1e-6);

    let mut elements = states.clone();
    let mut physical = vec![true; states.len()];
    // complete with Hermitian null elements orthogonal to the physical span
    let mut ortho: Vec<CMat> = orthonormalise(&states, 1e-12);
    for m in &p0.hermitian_null {
        let mut r = m.clone();
        for q in &ortho {
            let c = hs_inner(q, &r).re;
            r -= q.scale(c);
        }
        let n = r.norm();
        if n > 1e-6 && elements.len() < k {
            let r = r.unscale(n);
            ortho.push(r.clone());
            elements.push(r);
            physical.push(false);
        }
    }
    Ok(NessBasis { elements, physical })
}

/// The unique steady state as a unit-trace density matrix.
pub fn exact_ness(model: &OpenSystemModel) -> Result<CMat> {
    exact_ness_with_limit(model, DENSE_ORACLE_LIMIT)
}

pub fn exact_ness_with_limit(model: &OpenSystemModel, limit: usize) -> Result<CMat> {
    let basis = steady_states_with_limit(model, NULL_TOL, limit)?;
    if basis.dimension() != 1 {
        return Err(Error::DegenerateSteadySpace(basis.dimension()));
    }
    let rho = &basis.elements[0];
    Ok(rho.unscale(trace(rho).re))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> f64 {
    let s = psd_sqrt(rho);
    let (values, _) = eigh(&(&s * sigma * &s));
    let root: f64 = values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    (root * root).clamp(0.0, 1.0)
}

/// Largest eigenvalue of `ρ` and its eigenvector.
pub fn top_eigenvector(rho: &CMat, n_qubits: usize) -> Result<(f64, StateVector)> {
    let (values, vectors) = eigh(rho);
    let last = values.len() - 1;
    let v = vectors.column(last).into_owned();
    Ok((values[last], StateVector::from_amplitudes(n_qubits, v)?.with_canonical_phase()))
}

// ---------------------------------------------------------------------------
// Matrix-free path

struct SparseOp {
    terms: Vec<(Complex64, PauliAction)>,
}

impl SparseOp {
    fn new(p: &PauliSum) -> Self {
        Self {
            terms: p.terms().iter().map(|(c, s)| (*c, s.action())).collect(),
        }
    }

    /// `out += scale · P ρ`
    fn left_into(&self, rho: &CMat, scale: Complex64, out: &mut CMat) {
        let d = rho.nrows();
        let mut map = Vec::with_capacity(d);
        for (c, act) in &self.terms {
            map.clear();
            map.extend((0..d).map(|k| {
                let (row, ph) = act.apply(k);
                (row, scale * c * ph)
            }));
            for col in 0..d {
                let src = rho.column(col);
                let mut dst = out.column_mut(col);
                for (k, &(row, f)) in map.iter().enumerate() {
                    dst[row] += f * src[k];
                }
            }
        }
    }

    /// `out += scale · ρ P`
    fn right_into(&self, rho: &CMat, scale: Complex64, out: &mut CMat) {
        let d = rho.nrows();
        for (c, act) in &self.terms {
            for col in 0..d {
                // P|col⟩ = ph|k⟩ so (ρP)[:, col] = ph ρ[:, k]
                let (k, ph) = act.apply(col);
                let f = scale * c * ph;
                for row in 0..d {
                    out[(row, col)] += f * rho[(row, k)];
                }
            }
        }
    }

    fn left(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        self.left_into(rho, ONE, &mut out);
        out
    }
}

struct SparseModel {
    hamiltonian: SparseOp,
    jumps: Vec<(f64, SparseOp, SparseOp, SparseOp)>,
}

impl SparseModel {
    fn new(model: &OpenSystemModel) -> Result<Self> {
        let jumps = model
            .dissipators
            .iter()
            .map(|d| {
                let ada = d.jump.dagger().mul(&d.jump)?;
                Ok((d.rate, SparseOp::new(&d.jump), SparseOp::new(&d.jump.dagger()), SparseOp::new(&ada)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hamiltonian: SparseOp::new(&model.hamiltonian),
            jumps,
        })
    }

    /// `L[ρ]`
    fn forward(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        self.hamiltonian.left_into(rho, -I, &mut out);
        self.hamiltonian.right_into(rho, I, &mut out);
        for (rate, a, a_dag, ada) in &self.jumps {
            let g = Complex64::new(*rate, 0.0);
            a_dag.right_into(&a.left(rho), g, &mut out);
            ada.left_into(rho, g * -0.5, &mut out);
            ada.right_into(rho, g * -0.5, &mut out);
        }
        out
    }

    /// `L†[Y] = i[H, Y] + Σ γ (A†YA - ½{A†A, Y})`
    fn adjoint(&self, y: &CMat) -> CMat {
        let mut out = CMat::zeros(y.nrows(), y.ncols());
        self.hamiltonian.left_into(y, I, &mut out);
        self.hamiltonian.right_into(y, -I, &mut out);
        for (rate, a, a_dag, ada) in &self.jumps {
            let g = Complex64::new(*rate, 0.0);
            a.right_into(&a_dag.left(y), g, &mut out);
            ada.left_into(y, g * -0.5, &mut out);
            ada.right_into(y, g * -0.5, &mut out);
        }
        out
    }
}

/// Options for [`sparse_steady_state`].
#[derive(Clone, Debug)]
pub struct SparseOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub refinements: usize,
}

impl Default for SparseOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20_000,
            refinements: 4,
        }
    }
}

/// Unique steady state without forming `𝓛`: least squares on the bordered
/// system `[𝓛; w·vec(I)†] x = [0; w]` by CGLS, followed by residual
/// correction.
pub fn sparse_steady_state(model: &OpenSystemModel, options: &SparseOptions) -> Result<CMat> {
    if model.n_qubits > SPARSE_ORACLE_LIMIT {
        return Err(Error::SizeLimit {
            n_qubits: model.n_qubits,
            limit: SPARSE_ORACLE_LIMIT,
        });
    }
    let op = SparseModel::new(model)?;
    let d = 1usize << model.n_qubits;
    let weight = 1.0;
    // bordered operator: x ↦ (L[x], w·Tr x); adjoint (Y, t) ↦ L†[Y] + w·t·I
    let forward = |x: &CMat| (op.forward(x), trace(x) * weight);
    let adjoint = |y: &CMat, t: Complex64| {
        let mut out = op.adjoint(y);
        for k in 0..d {
            out[(k, k)] += t * weight;
        }
        out
    };

    let mut x = CMat::zeros(d, d);
    let mut total_iters = 0;
    for _ in 0..=options.refinements {
        let (lx, tx) = forward(&x);
        let r_mat = -lx;
        let r_tr = Complex64::new(weight, 0.0) - tx;
        let r_norm = (r_mat.norm_squared() + r_tr.norm_sqr()).sqrt();
        let rho = hermitian_part(&x);
        let t = trace(&rho).re;
        if t.abs() > 0.0 && op.forward(&rho.unscale(t)).norm() <= options.tol * 1e-2 {
            break;
        }
        if r_norm == 0.0 {
            break;
        }
        // CGLS on the correction
        let mut dx = CMat::zeros(d, d);
        let mut s_mat = r_mat;
        let mut s_tr = r_tr;
        let mut g = adjoint(&s_mat, s_tr);
        let mut p = g.clone();
        let mut gamma = g.norm_squared();
        let g0 = gamma.sqrt();
        for _ in 0..options.max_iter {
            total_iters += 1;
            let (q_mat, q_tr) = forward(&p);
            let qq = q_mat.norm_squared() + q_tr.norm_sqr();
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            dx += p.scale(alpha);
            s_mat -= q_mat.scale(alpha);
            s_tr -= q_tr * alpha;
            g = adjoint(&s_mat, s_tr);
            let gamma_next = g.norm_squared();
            if gamma_next.sqrt() <= 1e-13 * g0 {
                break;
            }
            p = &g + p.scale(gamma_next / gamma);
            gamma = gamma_next;
        }
        x += dx;
    }
    let rho = hermitian_part(&x);
    let rho = rho.unscale(trace(&rho).re);
    let residual = op.forward(&rho).norm();
    log::debug!("sparse oracle: residual {residual:.3e} after {total_iters} CGLS iterations");
    if residual > options.tol {
        return Err(Error::NotConverged {
            what: "sparse steady state",
            residual,
            iterations: total_iters,
        });
    }
    Ok(rho)
}

/// `L[ρ]` by the matrix-free path.
pub fn sparse_lindblad_action(model: &OpenSystemModel, rho: &CMat) -> Result<CMat> {
    check_dim(model, rho)?;
    Ok(SparseModel::new(model)?.forward(rho))
}

#[cfg(test)]
mod tests;
