//! Separating degenerate steady states with a strong symmetry `U`.
//!
//! A steady state `ρ` found by the solver decomposes into blocks
//! `Π_α ρ Π_β` over the eigenspaces of `U`. Off-diagonal blocks are removed
//! one pair at a time by the twirl
//! `ρ ← ρ - (ρ - UρU†) / (1 - u_α ū_β)`, which leaves diagonal blocks
//! untouched. The surviving block-diagonal state is split into sectors by
//! inverting the Vandermonde system `U^k ρ = Σ_α u_α^k ρ_α`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSet;
use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_part, identity, max_abs, trace, CMat, ONE, ZERO};
use crate::model::{OpenSystemModel, SymmetryRecord};
use crate::oracle::true_residual;
use crate::overlaps::{assemble, observable_matrix};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::sdp::{solve_feasibility, BetaMatrix, FeasibilityProblem, LinearConstraint, SolverOptions, StartPoint};

/// Sector components with `|Tr| ≤ TRACE_FLOOR` are treated as absent.
pub const TRACE_FLOOR: f64 = 1e-8;
/// Eigenvalues of `U` closer than this are the same sector.
const EIGEN_CLUSTER_TOL: f64 = 1e-8;
/// Tolerance of the unitarity and commutation checks.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Largest qubit count for which a Pauli expansion is computed from the
/// dense operator.
const DECOMPOSE_LIMIT: usize = 6;

#[derive(Clone, Debug)]
pub struct SymmetrySpec {
    pub name: String,
    pub unitary: CMat,
    /// `U = Σ_i c_i P_i`
    pub expansion: Option<PauliSum>,
    /// Distinct eigenvalues `u_α = e^{iλ_α}`, sorted by phase.
    pub eigenvalues: Vec<Complex64>,
    pub generator: Option<PauliSum>,
}

/// `Σ_P Tr(P·M)/d · P` over all `4^n` Pauli strings.
pub fn pauli_decompose(m: &CMat, n_qubits: usize) -> Result<PauliSum> {
    if n_qubits > DECOMPOSE_LIMIT {
        return Err(Error::SizeLimit {
            n_qubits,
            limit: DECOMPOSE_LIMIT,
        });
    }
    let d = 1usize << n_qubits;
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut terms = Vec::new();
    for code in 0..(1usize << (2 * n_qubits)) {
        let word: Vec<Pauli> = (0..n_qubits)
            .map(|site| letters[(code >> (2 * (n_qubits - 1 - site))) & 3])
            .collect();
        let s = PauliString::new(word);
        let act = s.action();
        // Tr(P M) = Σ_j ⟨j|P M|j⟩ with P|k⟩ = ph|j⟩
        let mut tr = ZERO;
        for k in 0..d {
            let (j, ph) = act.apply(k);
            tr += ph * m[(k, j)];
        }
        terms.push((tr / d as f64, s));
    }
    PauliSum::from_terms(n_qubits, terms)
}

/// Distinct eigenvalues of a unitary, clustered and sorted by phase.
///
/// `U` is normal, so `C = (U+U†)/2` and `S = (U-U†)/2i` commute. Each
/// eigenspace of `C` is split by `S` restricted to it.
fn distinct_eigenvalues(u: &CMat) -> Vec<Complex64> {
    let c = (u + u.adjoint()).scale(0.5);
    let s = (u - u.adjoint()) * Complex64::new(0.0, -0.5);
    let (cos, vectors) = eigh(&c);
    let mut values: Vec<Complex64> = Vec::new();
    let mut start = 0;
    for k in 1..=cos.len() {
        if k < cos.len() && cos[k] - cos[k - 1] <= EIGEN_CLUSTER_TOL {
            continue;
        }
        let block = vectors.columns(start, k - start);
        let (sin, _) = eigh(&hermitian_part(&(block.adjoint() * &s * block)));
        for &sn in sin.iter() {
            values.push(Complex64::new(cos.rows(start, k - start).mean(), sn));
        }
        start = k;
    }
    values.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let mut out: Vec<Complex64> = Vec::new();
    for v in values {
        if out.iter().all(|w| (w - v).norm() > EIGEN_CLUSTER_TOL.sqrt()) {
            out.push(v / v.norm());
        }
    }
    out
}

impl SymmetrySpec {
    pub fn from_unitary(name: &str, unitary: CMat, expansion: Option<PauliSum>) -> Result<Self> {
        let d = unitary.nrows();
        let err = max_abs(&(unitary.adjoint() * &unitary - identity(d)));
        if err > SYMMETRY_TOL {
            return Err(Error::Symmetry(format!("{name} is not unitary (deviation {err:.3e})")));
        }
        Ok(Self {
            name: name.to_string(),
            eigenvalues: distinct_eigenvalues(&unitary),
            unitary,
            expansion,
            generator: None,
        })
    }

    pub fn from_pauli(name: &str, op: &PauliSum) -> Result<Self> {
        Self::from_unitary(name, op.to_dense()?, Some(op.clone()))
    }

    /// `U = e^{iφM}` with `φ = 2π/(2n+2)`, so the `n+1` sectors of
    /// `M = Σ Z_j` get distinct phases.
    pub fn magnetization(name: &str, generator: &PauliSum) -> Result<Self> {
        if !generator.is_hermitian() {
            return Err(Error::Symmetry("generator must be Hermitian".into()));
        }
        let n = generator.n_qubits();
        let phi = 2.0 * std::f64::consts::PI / (2 * n + 2) as f64;
        let (values, vectors) = eigh(&generator.to_dense()?);
        let mut scaled = vectors.clone();
        for (k, &m) in values.iter().enumerate() {
            let z = Complex64::from_polar(1.0, phi * m);
            for x in scaled.column_mut(k).iter_mut() {
                *x *= z;
            }
        }
        let unitary = scaled * vectors.adjoint();
        let expansion = pauli_decompose(&unitary, n).ok();
        let mut spec = Self::from_unitary(name, unitary, expansion)?;
        spec.generator = Some(generator.clone());
        Ok(spec)
    }

    pub fn from_record(record: &SymmetryRecord, n_qubits: usize) -> Result<Self> {
        match record {
            SymmetryRecord::Magnetization { generator } => {
                Self::magnetization("magnetization", &PauliSum::from_records(n_qubits, generator)?)
            }
            SymmetryRecord::Unitary { name, operator } => {
                Self::from_pauli(name, &PauliSum::from_records(n_qubits, operator)?)
            }
        }
    }

    pub fn sector_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Π_α = Π_{β≠α} (U - u_β)/(u_α - u_β)`
    pub fn projector(&self, alpha: usize) -> CMat {
        let d = self.unitary.nrows();
        let id = identity(d);
        let mut p = id.clone();
        let ua = self.eigenvalues[alpha];
        for (beta, &ub) in self.eigenvalues.iter().enumerate() {
            if beta != alpha {
                p = p * (&self.unitary - &id * ub) / (ua - ub);
            }
        }
        p
    }

    /// `U` commutes with `H` and every jump.
    pub fn check_strong(&self, model: &OpenSystemModel) -> Result<()> {
        let u = &self.unitary;
        let mut ops = vec![("hamiltonian".to_string(), model.hamiltonian.to_dense()?)];
        for (k, d) in model.dissipators.iter().enumerate() {
            ops.push((format!("jump {k}"), d.jump.to_dense()?));
        }
        for (what, a) in ops {
            let c = max_abs(&(u * &a - &a * u));
            if c > SYMMETRY_TOL {
                return Err(Error::Symmetry(format!("{} does not commute with {what} ({c:.3e})", self.name)));
            }
        }
        Ok(())
    }

    fn power(&self, k: u32) -> CMat {
        let mut p = identity(self.unitary.nrows());
        for _ in 0..k {
            p = &self.unitary * p;
        }
        p
    }
}

/// `Σ c_{k,k'} U^k ρ⁽¹⁾ (U†)^{k'}`, kept both as a word expansion and as a
/// dense matrix.
#[derive(Clone, Debug)]
pub struct RhoCombination {
    pub base: CMat,
    pub terms: BTreeMap<(u32, u32), Complex64>,
    pub dense: CMat,
}

impl RhoCombination {
    pub fn new(base: CMat) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), ONE);
        Self {
            dense: base.clone(),
            base,
            terms,
        }
    }

    /// Evaluate the word expansion explicitly.
    pub fn realize(&self, spec: &SymmetrySpec) -> CMat {
        let mut out = CMat::zeros(self.base.nrows(), self.base.ncols());
        for (&(k, kp), &c) in &self.terms {
            out += spec.power(k) * &self.base * spec.power(kp).adjoint() * c;
        }
        out
    }

    /// `U^j · self`
    fn left_power(&self, spec: &SymmetrySpec, j: u32) -> Self {
        Self {
            base: self.base.clone(),
            terms: self.terms.iter().map(|(&(k, kp), &c)| ((k + j, kp), c)).collect(),
            dense: spec.power(j) * &self.dense,
        }
    }

    fn combine(parts: &[(Complex64, &RhoCombination)]) -> Self {
        let base = parts[0].1.base.clone();
        let mut terms: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        let mut dense = CMat::zeros(base.nrows(), base.ncols());
        for (w, rc) in parts {
            for (&key, &c) in &rc.terms {
                *terms.entry(key).or_insert(ZERO) += w * c;
            }
            dense += &rc.dense * *w;
        }
        terms.retain(|_, c| *c != ZERO);
        Self { base, terms, dense }
    }
}

/// Remove the `(m, n)` block: `ρ ← ρ - (ρ - UρU†)/(1 - u_m ū_n)`.
pub fn twirl_eliminate(rc: &RhoCombination, spec: &SymmetrySpec, pair: (usize, usize)) -> Result<RhoCombination> {
    let (m, n) = pair;
    if m >= spec.sector_count() || n >= spec.sector_count() {
        return Err(Error::InvalidParameter(format!("sector pair ({m}, {n}) out of range")));
    }
    let z = spec.eigenvalues[m] * spec.eigenvalues[n].conj();
    let divisor = ONE - z;
    if m == n || divisor.norm() <= EIGEN_CLUSTER_TOL {
        return Err(Error::DegenerateDivisor { m, n });
    }
    let rotated = RhoCombination {
        base: rc.base.clone(),
        terms: rc.terms.iter().map(|(&(k, kp), &c)| ((k + 1, kp + 1), c)).collect(),
        dense: &spec.unitary * &rc.dense * spec.unitary.adjoint(),
    };
    let w = ONE / divisor;
    Ok(RhoCombination::combine(&[(ONE - w, rc), (w, &rotated)]))
}

/// Eliminate every ordered off-diagonal pair, lexicographically.
pub fn twirl_all(rc: &RhoCombination, spec: &SymmetrySpec) -> Result<RhoCombination> {
    twirl_in_order(rc, spec, &off_diagonal_pairs(spec.sector_count()))
}

pub fn off_diagonal_pairs(count: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for m in 0..count {
        for n in 0..count {
            if m != n {
                pairs.push((m, n));
            }
        }
    }
    pairs
}

pub fn twirl_in_order(rc: &RhoCombination, spec: &SymmetrySpec, pairs: &[(usize, usize)]) -> Result<RhoCombination> {
    let mut out = rc.clone();
    for &pair in pairs {
        out = twirl_eliminate(&out, spec, pair)?;
    }
    Ok(out)
}

/// One sector's share `c_α ρ_α` of a block-diagonal state.
#[derive(Clone, Debug)]
pub struct SectorComponent {
    pub sector: usize,
    pub eigenvalue: Complex64,
    /// `Tr(c_α ρ_α) = c_α`
    pub weight: f64,
    /// Unit-trace state, or `None` when the weight is below the floor.
    pub state: Option<CMat>,
    pub combination: RhoCombination,
}

/// `V_{kα} = u_α^k` for `k = 0..n_U`.
pub fn vandermonde(eigenvalues: &[Complex64]) -> CMat {
    let n = eigenvalues.len();
    CMat::from_fn(n, n, |k, a| eigenvalues[a].powu(k as u32))
}

/// Split a block-diagonal combination into per-sector components.
pub fn vandermonde_extract(rho_phys: &RhoCombination, spec: &SymmetrySpec, trace_floor: f64) -> Result<Vec<SectorComponent>> {
    let n = spec.sector_count();
    let inverse = vandermonde(&spec.eigenvalues)
        .try_inverse()
        .ok_or_else(|| Error::Symmetry("Vandermonde matrix is singular".into()))?;
    let powers: Vec<RhoCombination> = (0..n as u32).map(|k| rho_phys.left_power(spec, k)).collect();
    let mut out = Vec::with_capacity(n);
    for alpha in 0..n {
        let parts: Vec<(Complex64, &RhoCombination)> = (0..n).map(|k| (inverse[(alpha, k)], &powers[k])).collect();
        let combination = RhoCombination::combine(&parts);
        let component = hermitian_part(&combination.dense);
        let weight = trace(&component).re;
        let state = (weight.abs() > trace_floor).then(|| component.unscale(weight));
        out.push(SectorComponent {
            sector: alpha,
            eigenvalue: spec.eigenvalues[alpha],
            weight,
            state,
            combination,
        });
    }
    Ok(out)
}

/// `Ñ_ij = ⟨χ_i|M|χ_j⟩` paired with the target `m`.
pub fn sector_constraint(generator: &PauliSum, value: f64, ansatz: &AnsatzSet) -> Result<LinearConstraint> {
    if !generator.is_hermitian() {
        return Err(Error::Symmetry("sector generator must be Hermitian".into()));
    }
    Ok(LinearConstraint {
        observable: observable_matrix("sector", generator, ansatz)?,
        target: value,
    })
}

/// `Tr(ρM) = m` together with `Tr(ρM²) = m²`. The pair forces zero
/// variance, so the state lies in the `m` eigenspace; the first row alone is
/// also met by mixtures of sectors whose mean is `m`.
pub fn sector_pin(generator: &PauliSum, value: f64, ansatz: &AnsatzSet) -> Result<Vec<LinearConstraint>> {
    let square = generator.mul(generator)?;
    Ok(vec![
        sector_constraint(generator, value, ansatz)?,
        sector_constraint(&square, value * value, ansatz)?,
    ])
}

/// `Tr(L ρ R O)` from `β` and per-string overlap matrices
/// `Q_m = [⟨χ_i|P_m|χ_j⟩]`, without forming `ρ`. `L` and `R` are powers of
/// the symmetry given by their Pauli expansions.
pub fn qm_expectation(
    beta: &CMat,
    ansatz: &AnsatzSet,
    left: Option<&PauliSum>,
    right: Option<&PauliSum>,
    observable: &PauliSum,
) -> Result<Complex64> {
    // Tr(L ρ R O) = Tr(ρ · R O L)
    let n = ansatz.n_qubits();
    let id = PauliSum::identity(n);
    let product = right.unwrap_or(&id).mul(observable)?.mul(left.unwrap_or(&id))?;
    let mut total = ZERO;
    for (c, s) in product.terms() {
        let q = observable_matrix("term", &PauliSum::from_string(ONE, s.clone()), ansatz)?;
        total += c * q.expectation(beta);
    }
    Ok(total)
}

/// `U^k` as a Pauli sum.
pub fn symmetry_power(spec: &SymmetrySpec, k: u32) -> Result<PauliSum> {
    spec.expansion.as_ref().map(|u| u.pow(k)).ok_or(Error::MissingPauliExpansion)
}

/// Restrict the solve to the eigenspace `value` of a Hermitian generator.
#[derive(Clone, Debug)]
pub struct SectorSelection {
    pub generator: PauliSum,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct ExtractionOptions {
    pub solver: SolverOptions,
    pub sector: Option<SectorSelection>,
    pub trace_floor: f64,
    /// Extra solves from random starts when a sector is missing.
    pub retries: usize,
    pub retry_seed: u64,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            sector: None,
            trace_floor: TRACE_FLOOR,
            retries: 0,
            retry_seed: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtractedState {
    pub sector: usize,
    pub eigenvalue: [f64; 2],
    pub weight: f64,
    pub true_residual: f64,
    pub min_eigenvalue: f64,
    #[serde(skip)]
    pub state: CMat,
}

#[derive(Clone, Debug)]
pub struct ExtractionReport {
    pub solutions: Vec<BetaMatrix>,
    pub states: Vec<ExtractedState>,
    /// Sectors with no weight in any solve.
    pub missing: Vec<usize>,
}

impl ExtractionReport {
    /// `Tr(ρ_a† ρ_b)` for every pair of extracted states.
    pub fn pairwise_overlaps(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, a) in self.states.iter().enumerate() {
            for b in &self.states[i + 1..] {
                out.push((a.sector, b.sector, crate::linalg::hs_inner(&a.state, &b.state).norm()));
            }
        }
        out
    }
}

/// Solve, twirl over all sector pairs, then split by sector.
pub fn extract_all_ness(
    model: &OpenSystemModel,
    spec: &SymmetrySpec,
    ansatz: &AnsatzSet,
    options: &ExtractionOptions,
) -> Result<ExtractionReport> {
    spec.check_strong(model)?;
    let overlaps = assemble(model, ansatz)?;
    let mut constraints = Vec::new();
    if let Some(sel) = &options.sector {
        constraints = sector_pin(&sel.generator, sel.value, ansatz)?;
    }
    let mut found: BTreeMap<usize, ExtractedState> = BTreeMap::new();
    let mut solutions = Vec::new();
    for attempt in 0..=options.retries {
        let mut solver = options.solver.clone();
        if attempt > 0 {
            solver.start = StartPoint::RandomPsd {
                rng_seed: options.retry_seed + attempt as u64,
            };
            log::info!("retrying from a random start for missing sectors");
        }
        let problem = FeasibilityProblem {
            overlaps: overlaps.clone(),
            constraints: constraints.clone(),
            options: solver,
        };
        let beta = solve_feasibility(&problem)?;
        let rho = ansatz.density(&beta.beta)?;
        solutions.push(beta);
        let phys = twirl_all(&RhoCombination::new(rho), spec)?;
        for comp in vandermonde_extract(&phys, spec, options.trace_floor)? {
            let Some(state) = comp.state else { continue };
            if found.contains_key(&comp.sector) {
                continue;
            }
            let (values, _) = eigh(&state);
            found.insert(
                comp.sector,
                ExtractedState {
                    sector: comp.sector,
                    eigenvalue: [comp.eigenvalue.re, comp.eigenvalue.im],
                    weight: comp.weight,
                    true_residual: true_residual(&state, model)?,
                    min_eigenvalue: values.iter().copied().fold(f64::INFINITY, f64::min),
                    state,
                },
            );
        }
        if found.len() == spec.sector_count() {
            break;
        }
    }
    let missing = (0..spec.sector_count()).filter(|s| !found.contains_key(s)).collect();
    Ok(ExtractionReport {
        solutions,
        states: found.into_values().collect(),
        missing,
    })
}
