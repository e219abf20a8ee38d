//! Galerkin matrices of a model on an ansatz.
//!
//! With `ρ = Σ β_ij |χ_i⟩⟨χ_j|` the projected generator is
//!
//! ```text
//! G(β) = -i(DβE - EβD) + Σ_n γ_n (R_n β R_n† - ½ F_n β E - ½ E β F_n)
//! ```
//!
//! and `G(β)_ij = ⟨χ_i|L[ρ]|χ_j⟩`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSet;
use crate::error::{Error, Result};
use crate::linalg::{trace, CMat, MatrixRecord, I};
use crate::model::OpenSystemModel;
use crate::pauli::PauliSum;
use crate::statevector::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct DissipatorOverlaps {
    pub rate: f64,
    /// `⟨χ_i|A|χ_j⟩`
    pub jump: CMat,
    /// `⟨χ_i|A†A|χ_j⟩`
    pub jump_product: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapMeta {
    pub ansatz_fingerprint: String,
    pub model_label: String,
    /// `None` for exact assembly.
    pub shots: Option<u64>,
    pub noise_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapSet {
    pub gram: CMat,
    pub hamiltonian: CMat,
    pub dissipators: Vec<DissipatorOverlaps>,
    pub meta: OverlapMeta,
}

/// `Õ_ij = ⟨χ_i|O|χ_j⟩` for a named observable.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableMatrix {
    pub name: String,
    pub matrix: CMat,
}

impl ObservableMatrix {
    /// `Tr(βÕ) = Tr(ρO)`
    pub fn expectation(&self, beta: &CMat) -> num_complex::Complex64 {
        trace(&(beta * &self.matrix))
    }
}

/// Columns `op|χ_j⟩`, evaluated in parallel over states.
fn applied(op: &PauliSum, states: &[StateVector]) -> Result<CMat> {
    let cols = states
        .par_iter()
        .map(|s| s.apply_pauli_sum(op))
        .collect::<Result<Vec<_>>>()?;
    let d = states.first().map_or(0, StateVector::dim);
    let mut m = CMat::zeros(d, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c.amplitudes());
    }
    Ok(m)
}

/// Copy the upper triangle onto the lower one so the result is exactly
/// Hermitian.
fn mirror_upper(m: &mut CMat) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in 0..j {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}

fn check_qubits(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::QubitMismatch { expected, found })
    }
}

/// `[⟨χ_i|op|χ_j⟩]`, mirrored to exact Hermiticity when `hermitian`.
fn overlap(chi: &CMat, op: &PauliSum, ansatz: &AnsatzSet, hermitian: bool) -> Result<CMat> {
    check_qubits(ansatz.n_qubits(), op.n_qubits())?;
    let mut m = chi.adjoint() * applied(op, ansatz.states())?;
    if hermitian {
        mirror_upper(&mut m);
    }
    Ok(m)
}

pub fn observable_matrix(name: &str, op: &PauliSum, ansatz: &AnsatzSet) -> Result<ObservableMatrix> {
    let chi = ansatz.state_matrix();
    Ok(ObservableMatrix {
        name: name.to_string(),
        matrix: overlap(&chi, op, ansatz, op.is_hermitian())?,
    })
}

pub fn assemble(model: &OpenSystemModel, ansatz: &AnsatzSet) -> Result<OverlapSet> {
    check_qubits(model.n_qubits, ansatz.n_qubits())?;
    let chi = ansatz.state_matrix();
    let mut gram = chi.adjoint() * &chi;
    mirror_upper(&mut gram);
    let hamiltonian = overlap(&chi, &model.hamiltonian, ansatz, true)?;
    let products = model.jump_products()?;
    let dissipators = model
        .dissipators
        .iter()
        .zip(&products)
        .map(|(d, prod)| {
            Ok(DissipatorOverlaps {
                rate: d.rate,
                jump: overlap(&chi, &d.jump, ansatz, false)?,
                jump_product: overlap(&chi, prod, ansatz, true)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapSet {
        gram,
        hamiltonian,
        dissipators,
        meta: OverlapMeta {
            ansatz_fingerprint: ansatz.fingerprint(),
            model_label: model.label.clone(),
            shots: None,
            noise_seed: None,
        },
    })
}

impl OverlapSet {
    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// Projected Lindbladian `G(β)`.
    pub fn galerkin(&self, beta: &CMat) -> CMat {
        let e = &self.gram;
        let d = &self.hamiltonian;
        let be = beta * e;
        let bd = beta * d;
        let mut out = (d * &be - e * &bd) * (-I);
        for n in &self.dissipators {
            let rb = &n.jump * beta;
            let fbe = &n.jump_product * &be;
            let ebf = e * beta * &n.jump_product;
            out += (rb * n.jump.adjoint() - (fbe + ebf).scale(0.5)).scale(n.rate);
        }
        out
    }

    /// Adjoint of [`galerkin`](Self::galerkin) under `Re Tr(X†Y)`.
    pub fn galerkin_adjoint(&self, y: &CMat) -> CMat {
        let e = &self.gram;
        let d = &self.hamiltonian;
        let ye = y * e;
        let yd = y * d;
        let mut out = (d * &ye - e * &yd) * I;
        for n in &self.dissipators {
            let ry = n.jump.adjoint() * y * &n.jump;
            let fye = &n.jump_product * &ye;
            let eyf = e * y * &n.jump_product;
            out += (ry - (fye + eyf).scale(0.5)).scale(n.rate);
        }
        out
    }

    /// `Tr(βE) = Tr(ρ)`
    pub fn trace_of(&self, beta: &CMat) -> f64 {
        trace(&(beta * &self.gram)).re
    }

    /// Gaussian perturbation of standard deviation `1/√shots` on each
    /// quadrature of every estimated entry. Hermitian matrices are perturbed
    /// on the upper triangle and mirrored; jump overlaps on every entry.
    pub fn with_shot_noise(&self, shots: u64, rng_seed: u64) -> Result<OverlapSet> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let sigma = 1.0 / (shots as f64).sqrt();
        let normal = Normal::new(0.0, sigma).expect("positive standard deviation");
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let hermitian = |m: &CMat, rng: &mut ChaCha8Rng| {
            let mut out = m.clone();
            let n = out.nrows();
            for j in 0..n {
                for i in 0..=j {
                    out[(i, j)].re += normal.sample(rng);
                    if i != j {
                        out[(i, j)].im += normal.sample(rng);
                    }
                }
            }
            mirror_upper(&mut out);
            out
        };
        let gram = hermitian(&self.gram, &mut rng);
        let hamiltonian = hermitian(&self.hamiltonian, &mut rng);
        let mut dissipators = Vec::with_capacity(self.dissipators.len());
        for d in &self.dissipators {
            let jump_product = hermitian(&d.jump_product, &mut rng);
            let mut jump = d.jump.clone();
            for z in jump.iter_mut() {
                z.re += normal.sample(&mut rng);
                z.im += normal.sample(&mut rng);
            }
            dissipators.push(DissipatorOverlaps {
                rate: d.rate,
                jump,
                jump_product,
            });
        }
        Ok(OverlapSet {
            gram,
            hamiltonian,
            dissipators,
            meta: OverlapMeta {
                shots: Some(shots),
                noise_seed: Some(rng_seed),
                ..self.meta.clone()
            },
        })
    }

    pub fn to_record(&self) -> OverlapRecord {
        OverlapRecord {
            meta: self.meta.clone(),
            gram: (&self.gram).into(),
            hamiltonian: (&self.hamiltonian).into(),
            dissipators: self
                .dissipators
                .iter()
                .map(|d| DissipatorRecord {
                    rate: d.rate,
                    jump: (&d.jump).into(),
                    jump_product: (&d.jump_product).into(),
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &OverlapRecord) -> Result<OverlapSet> {
        let l = rec.gram.rows;
        let load = |m: &MatrixRecord, what: &str| {
            m.to_matrix()
                .filter(|x| x.nrows() == l && x.ncols() == l)
                .ok_or_else(|| Error::Shape(format!("{what} is not {l}x{l}")))
        };
        Ok(OverlapSet {
            gram: load(&rec.gram, "gram")?,
            hamiltonian: load(&rec.hamiltonian, "hamiltonian")?,
            dissipators: rec
                .dissipators
                .iter()
                .map(|d| {
                    Ok(DissipatorOverlaps {
                        rate: d.rate,
                        jump: load(&d.jump, "jump")?,
                        jump_product: load(&d.jump_product, "jump product")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            meta: rec.meta.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub meta: OverlapMeta,
    pub gram: MatrixRecord,
    pub hamiltonian: MatrixRecord,
    pub dissipators: Vec<DissipatorRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipatorRecord {
    pub rate: f64,
    pub jump: MatrixRecord,
    pub jump_product: MatrixRecord,
}
