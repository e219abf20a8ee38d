//! Open-system models and the benchmark families.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{ops, Pauli, PauliSum, TermRecord};

/// One jump operator `A_n` with its rate `γ_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissipator {
    pub rate: f64,
    pub jump: PauliSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpenSystemModel {
    pub n_qubits: usize,
    pub hamiltonian: PauliSum,
    pub dissipators: Vec<Dissipator>,
    pub label: String,
    pub symmetries: Vec<SymmetryRecord>,
}

/// Something wrong with a model, as reported by [`OpenSystemModel::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonHermitianHamiltonian { max_imag: f64 },
    NegativeRate { index: usize, rate: f64 },
    NonFiniteRate { index: usize },
    QubitCount { what: String, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonHermitianHamiltonian { max_imag } => {
                write!(f, "hamiltonian is not Hermitian (largest imaginary coefficient {max_imag:.3e})")
            }
            Violation::NegativeRate { index, rate } => write!(f, "dissipator {index} has negative rate {rate}"),
            Violation::NonFiniteRate { index } => write!(f, "dissipator {index} has a non-finite rate"),
            Violation::QubitCount { what, found } => write!(f, "{what} acts on {found} qubits"),
        }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn sum_all(n: usize, parts: impl IntoIterator<Item = PauliSum>) -> PauliSum {
    parts
        .into_iter()
        .fold(PauliSum::zero(n), |acc, p| acc.add(&p).expect("same qubit count"))
}

fn need_chain(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("chain needs at least 2 qubits, got {n}")));
    }
    Ok(())
}

fn need_rate(name: &str, rate: f64) -> Result<()> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be a finite nonnegative rate, got {rate}")));
    }
    Ok(())
}

/// `Σ_j X_jX_{j+1} + Y_jY_{j+1} + Δ Z_jZ_{j+1}` on an open chain.
pub fn xxz_hamiltonian(n: usize, anisotropy: f64) -> PauliSum {
    sum_all(
        n,
        (0..n - 1).flat_map(|j| {
            [
                ops::pair(n, (j, Pauli::X), (j + 1, Pauli::X)),
                ops::pair(n, (j, Pauli::Y), (j + 1, Pauli::Y)),
                ops::pair(n, (j, Pauli::Z), (j + 1, Pauli::Z)).scale(real(anisotropy)),
            ]
        }),
    )
}

/// Transverse-field Ising chain `½ Σ Z_jZ_{j+1} + g Σ X_j` with `Z_j` and
/// `σ₋_j` jumps on every site, all at rate `rate`.
pub fn tfim_chain(n: usize, field: f64, rate: f64) -> Result<OpenSystemModel> {
    need_chain(n)?;
    need_rate("rate", rate)?;
    let bonds = (0..n - 1).map(|j| ops::pair(n, (j, Pauli::Z), (j + 1, Pauli::Z)).scale(real(0.5)));
    let fields = (0..n).map(|j| ops::single(n, j, Pauli::X).scale(real(field)));
    let hamiltonian = sum_all(n, bonds.chain(fields));
    let mut dissipators = Vec::with_capacity(2 * n);
    for j in 0..n {
        dissipators.push(Dissipator {
            rate,
            jump: ops::single(n, j, Pauli::Z),
        });
        dissipators.push(Dissipator {
            rate,
            jump: ops::lowering(n, j),
        });
    }
    Ok(OpenSystemModel {
        n_qubits: n,
        hamiltonian,
        dissipators,
        label: format!("tfim-chain n={n} g={field} gamma={rate}"),
        symmetries: Vec::new(),
    })
}

/// XXZ chain with `Z_j` dephasing on every site. Conserves `M = Σ Z_j`.
pub fn xxz_dephasing(n: usize, anisotropy: f64, rate: f64) -> Result<OpenSystemModel> {
    need_chain(n)?;
    need_rate("rate", rate)?;
    let dissipators = (0..n)
        .map(|j| Dissipator {
            rate,
            jump: ops::single(n, j, Pauli::Z),
        })
        .collect();
    Ok(OpenSystemModel {
        n_qubits: n,
        hamiltonian: xxz_hamiltonian(n, anisotropy),
        dissipators,
        label: format!("xxz-dephasing n={n} delta={anisotropy} gamma={rate}"),
        symmetries: vec![SymmetryRecord::Magnetization { generator: ops::magnetization(n).to_records() }],
    })
}

/// XXZ chain driven at its ends by `√(Γ(1−μ)) σ₊¹σ₋ⁿ` and
/// `√(Γ(1+μ)) σ₋¹σ₊ⁿ`, each carried with unit rate.
pub fn xxz_boundary_driven(n: usize, anisotropy: f64, coupling: f64, bias: f64) -> Result<OpenSystemModel> {
    need_chain(n)?;
    if !(coupling > 0.0 && coupling.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling must be positive, got {coupling}")));
    }
    if !(0.0..=1.0).contains(&bias) {
        return Err(Error::InvalidParameter(format!("bias must lie in [0, 1], got {bias}")));
    }
    let last = n - 1;
    let forward = ops::raising(n, 0)
        .mul(&ops::lowering(n, last))?
        .scale(real((coupling * (1.0 - bias)).sqrt()));
    let backward = ops::lowering(n, 0)
        .mul(&ops::raising(n, last))?
        .scale(real((coupling * (1.0 + bias)).sqrt()));
    Ok(OpenSystemModel {
        n_qubits: n,
        hamiltonian: xxz_hamiltonian(n, anisotropy),
        dissipators: vec![
            Dissipator { rate: 1.0, jump: forward },
            Dissipator { rate: 1.0, jump: backward },
        ],
        label: format!("xxz-boundary n={n} delta={anisotropy} coupling={coupling} bias={bias}"),
        symmetries: vec![
            SymmetryRecord::Magnetization { generator: ops::magnetization(n).to_records() },
            SymmetryRecord::Unitary {
                name: "reflection-flip".into(),
                operator: reflection_flip(n).to_records(),
            },
        ],
    })
}

/// Chain reflection composed with a global spin flip, `P ∏_j X_j` where `P`
/// exchanges site `j` with site `n+1-j`.
pub fn reflection_flip(n: usize) -> PauliSum {
    let flip = crate::pauli::PauliString::new(vec![Pauli::X; n]);
    let mut op = PauliSum::from_string(real(1.0), flip);
    for j in 0..n / 2 {
        op = ops::swap(n, j, n - 1 - j).mul(&op).expect("same qubit count");
    }
    op
}

impl OpenSystemModel {
    /// Structural problems; empty for a usable model.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.hamiltonian.n_qubits() != self.n_qubits {
            out.push(Violation::QubitCount {
                what: "hamiltonian".into(),
                found: self.hamiltonian.n_qubits(),
            });
        }
        if !self.hamiltonian.is_hermitian() {
            let max_imag = self.hamiltonian.terms().iter().map(|(c, _)| c.im.abs()).fold(0.0, f64::max);
            out.push(Violation::NonHermitianHamiltonian { max_imag });
        }
        for (index, d) in self.dissipators.iter().enumerate() {
            if !d.rate.is_finite() {
                out.push(Violation::NonFiniteRate { index });
            } else if d.rate < 0.0 {
                out.push(Violation::NegativeRate { index, rate: d.rate });
            }
            if d.jump.n_qubits() != self.n_qubits {
                out.push(Violation::QubitCount {
                    what: format!("dissipator {index}"),
                    found: d.jump.n_qubits(),
                });
            }
        }
        out
    }

    /// Like [`validate`](Self::validate) but fails on the first violation.
    pub fn check(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidParameter(v.to_string())),
        }
    }

    /// `A_n†A_n` for every jump.
    pub fn jump_products(&self) -> Result<Vec<PauliSum>> {
        self.dissipators.iter().map(|d| d.jump.dagger().mul(&d.jump)).collect()
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            n_qubits: self.n_qubits,
            label: Some(self.label.clone()),
            hamiltonian: self.hamiltonian.to_records(),
            dissipators: self
                .dissipators
                .iter()
                .map(|d| DissipatorRecord {
                    rate: d.rate,
                    operator: d.jump.to_records(),
                })
                .collect(),
            symmetries: self.symmetries.clone(),
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let n = file.n_qubits;
        let dissipators = file
            .dissipators
            .iter()
            .map(|d| {
                Ok(Dissipator {
                    rate: d.rate,
                    jump: PauliSum::from_records(n, &d.operator)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits: n,
            hamiltonian: PauliSum::from_records(n, &file.hamiltonian)?,
            dissipators,
            label: file.label.clone().unwrap_or_else(|| "model".into()),
            symmetries: file.symmetries.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// JSON model file. Pauli words are uppercase, leftmost character is site 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub hamiltonian: Vec<TermRecord>,
    #[serde(default)]
    pub dissipators: Vec<DissipatorRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symmetries: Vec<SymmetryRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipatorRecord {
    pub rate: f64,
    pub operator: Vec<TermRecord>,
}

/// Strong symmetry declared alongside a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetryRecord {
    /// `U = e^{iφM}` for an integer-spectrum generator `M`.
    Magnetization { generator: Vec<TermRecord> },
    /// `U` given directly by its Pauli expansion; eigenvalues are computed.
    Unitary {
        name: String,
        operator: Vec<TermRecord>,
    },
}
