//! Cumulative K-moment ansatz states.
//!
//! Level `j` holds the states `U_{i_j} ⋯ U_{i_1}|ψ⟩` obtained by applying
//! words of `j` Hamiltonian Pauli strings to the seed. States that coincide
//! with an already retained state up to a global phase are dropped, and every
//! retained state is rescaled so its leading amplitude is real positive.

use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::pauli::{PauliString, PauliSum};
use crate::statevector::StateVector;

/// Two states are duplicates when `|⟨a|b⟩| > 1 - DEDUP_TOL`.
pub const DEDUP_TOL: f64 = 1e-10;

/// How the seed `|ψ⟩` was chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedDescriptor {
    /// Computational basis state, site 1 first.
    Bitstring { bits: String },
    /// `|+⟩^{⊗n}`
    Uniform,
    /// Haar-random state drawn from `rng_seed`.
    Random { rng_seed: u64 },
    /// Dominant eigenvector of the exact steady state. Consults the oracle,
    /// so it is for benchmarking only; amplitudes are stored verbatim.
    OracleTop { amplitudes: Vec<[f64; 2]> },
}

impl SeedDescriptor {
    pub fn prepare(&self, n_qubits: usize) -> Result<StateVector> {
        match self {
            SeedDescriptor::Bitstring { bits } => StateVector::basis_state(n_qubits, bits),
            SeedDescriptor::Uniform => Ok(StateVector::uniform(n_qubits)),
            SeedDescriptor::Random { rng_seed } => Ok(StateVector::random(n_qubits, *rng_seed)),
            SeedDescriptor::OracleTop { amplitudes } => {
                let amps = CVec::from_iterator(
                    amplitudes.len(),
                    amplitudes.iter().map(|a| Complex64::new(a[0], a[1])),
                );
                Ok(StateVector::from_amplitudes(n_qubits, amps)?.normalized())
            }
        }
    }

    pub fn from_state(state: &StateVector) -> Self {
        SeedDescriptor::OracleTop {
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SeedDescriptor::Bitstring { bits } => format!("bits:{bits}"),
            SeedDescriptor::Uniform => "uniform".into(),
            SeedDescriptor::Random { rng_seed } => format!("random:{rng_seed}"),
            SeedDescriptor::OracleTop { .. } => "oracle-top".into(),
        }
    }
}

/// Ordered ansatz states with provenance.
#[derive(Clone, Debug)]
pub struct AnsatzSet {
    n_qubits: usize,
    states: Vec<StateVector>,
    /// Generator indices applied to the seed, first applied first.
    words: Vec<Vec<usize>>,
    generators: Vec<PauliString>,
    seed: SeedDescriptor,
    order: usize,
    subset: Option<(usize, u64)>,
}

impl AnsatzSet {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn seed(&self) -> &SeedDescriptor {
        &self.seed
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `(q, rng_seed)` for the random-subset variant.
    pub fn subset(&self) -> Option<(usize, u64)> {
        self.subset
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `d × L` matrix whose columns are the ansatz states.
    pub fn state_matrix(&self) -> CMat {
        let mut m = CMat::zeros(1 << self.n_qubits, self.states.len());
        for (j, s) in self.states.iter().enumerate() {
            m.set_column(j, s.amplitudes());
        }
        m
    }

    /// `ρ = Σ_ij β_ij |χ_i⟩⟨χ_j|`
    pub fn density(&self, beta: &CMat) -> Result<CMat> {
        if beta.nrows() != self.len() || beta.ncols() != self.len() {
            return Err(Error::Shape(format!(
                "β is {}x{} but the ansatz has {} states",
                beta.nrows(),
                beta.ncols(),
                self.len()
            )));
        }
        let chi = self.state_matrix();
        Ok(&chi * beta * chi.adjoint())
    }

    /// Number of states per moment level.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.order + 1];
        for w in &self.words {
            sizes[w.len()] += 1;
        }
        sizes
    }

    /// Build from an explicit list of states. There is no word provenance,
    /// so the record of such a set does not regenerate it.
    pub fn from_states(states: Vec<StateVector>) -> Result<Self> {
        let n_qubits = states.first().map(StateVector::n_qubits).ok_or(Error::DegenerateAnsatz)?;
        for s in &states {
            if s.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch {
                    expected: n_qubits,
                    found: s.n_qubits(),
                });
            }
        }
        let seed = SeedDescriptor::from_state(&states[0]);
        Ok(Self {
            n_qubits,
            words: vec![Vec::new(); states.len()],
            states,
            generators: Vec::new(),
            seed,
            order: 0,
            subset: None,
        })
    }

    /// FNV-1a over the amplitude bit patterns; identifies an ansatz in
    /// overlap metadata.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for s in &self.states {
            for a in s.amplitudes().iter() {
                for bits in [a.re.to_bits(), a.im.to_bits()] {
                    for byte in bits.to_le_bytes() {
                        h ^= byte as u64;
                        h = h.wrapping_mul(0x100000001b3);
                    }
                }
            }
        }
        format!("{h:016x}")
    }

    pub fn record(&self) -> AnsatzRecord {
        AnsatzRecord {
            n_qubits: self.n_qubits,
            seed: self.seed.clone(),
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            order: self.order,
            q: self.subset.map(|s| s.0),
            rng_seed: self.subset.map(|s| s.1),
            words: self.words.clone(),
        }
    }

    /// Rebuild the states by replaying every recorded word on the seed.
    pub fn from_record(record: &AnsatzRecord) -> Result<Self> {
        let generators = record
            .generators
            .iter()
            .map(|g| g.parse::<PauliString>())
            .collect::<Result<Vec<_>>>()?;
        let seed_state = record.seed.prepare(record.n_qubits)?.normalized().with_canonical_phase();
        let mut states = Vec::with_capacity(record.words.len());
        for word in &record.words {
            let mut s = seed_state.clone();
            for &k in word {
                let g = generators.get(k).ok_or_else(|| {
                    Error::InvalidParameter(format!("word refers to generator {k}"))
                })?;
                s = s.apply_pauli_string(g)?.with_canonical_phase();
            }
            states.push(s);
        }
        Ok(Self {
            n_qubits: record.n_qubits,
            states,
            words: record.words.clone(),
            generators,
            seed: record.seed.clone(),
            order: record.order,
            subset: record.q.zip(record.rng_seed),
        })
    }
}

/// On-disk description of an ansatz, sufficient to regenerate it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRecord {
    pub n_qubits: usize,
    pub seed: SeedDescriptor,
    pub generators: Vec<String>,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    pub words: Vec<Vec<usize>>,
}

struct Builder {
    states: Vec<StateVector>,
    words: Vec<Vec<usize>>,
}

impl Builder {
    fn is_new(&self, candidate: &StateVector) -> bool {
        self.states
            .iter()
            .all(|s| s.amplitudes().dotc(candidate.amplitudes()).norm() <= 1.0 - DEDUP_TOL)
    }

    /// One-step extensions of `frontier`, deduplicated against the retained
    /// states and each other, in frontier-major, generator-minor order.
    fn extensions(
        &self,
        frontier: &[usize],
        generators: &[PauliString],
    ) -> Result<Vec<(StateVector, Vec<usize>)>> {
        let mut pool: Vec<(StateVector, Vec<usize>)> = Vec::new();
        for &parent in frontier {
            for (k, g) in generators.iter().enumerate() {
                let s = self.states[parent].apply_pauli_string(g)?.with_canonical_phase();
                let fresh = self.is_new(&s)
                    && pool
                        .iter()
                        .all(|(p, _)| p.amplitudes().dotc(s.amplitudes()).norm() <= 1.0 - DEDUP_TOL);
                if fresh {
                    let mut w = self.words[parent].clone();
                    w.push(k);
                    pool.push((s, w));
                }
            }
        }
        Ok(pool)
    }

    fn push(&mut self, s: StateVector, w: Vec<usize>) -> usize {
        self.states.push(s);
        self.words.push(w);
        self.states.len() - 1
    }
}

fn start(hamiltonian: &PauliSum, seed: &SeedDescriptor) -> Result<(Builder, Vec<PauliString>)> {
    let seed_state = seed.prepare(hamiltonian.n_qubits())?.normalized().with_canonical_phase();
    let generators: Vec<PauliString> = hamiltonian.strings().cloned().collect();
    Ok((
        Builder {
            states: vec![seed_state],
            words: vec![Vec::new()],
        },
        generators,
    ))
}

/// Exact cumulative K-moment states `∪_{j≤K} S_j`.
pub fn moment_states(hamiltonian: &PauliSum, seed: &SeedDescriptor, order: usize) -> Result<AnsatzSet> {
    let (mut b, generators) = start(hamiltonian, seed)?;
    let mut frontier = vec![0usize];
    for _ in 0..order {
        if frontier.is_empty() {
            break;
        }
        let pool = b.extensions(&frontier, &generators)?;
        frontier = pool.into_iter().map(|(s, w)| b.push(s, w)).collect();
    }
    Ok(AnsatzSet {
        n_qubits: hamiltonian.n_qubits(),
        states: b.states,
        words: b.words,
        generators,
        seed: seed.clone(),
        order,
        subset: None,
    })
}

/// Random-subset variant: at each level at most `q` new states are drawn
/// uniformly without replacement from the one-step extensions of the
/// previous level's draw.
pub fn moment_states_random(
    hamiltonian: &PauliSum,
    seed: &SeedDescriptor,
    order: usize,
    q: usize,
    rng_seed: u64,
) -> Result<AnsatzSet> {
    if q == 0 {
        return Err(Error::InvalidParameter("subset cardinality q must be at least 1".into()));
    }
    let (mut b, generators) = start(hamiltonian, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut frontier = vec![0usize];
    for _ in 0..order {
        if frontier.is_empty() {
            break;
        }
        let mut pool = b.extensions(&frontier, &generators)?;
        let mut picks = index::sample(&mut rng, pool.len(), q.min(pool.len())).into_vec();
        picks.sort_unstable();
        let mut chosen = Vec::with_capacity(picks.len());
        // drain in descending order so indices stay valid, then restore order
        for &k in picks.iter().rev() {
            chosen.push(pool.swap_remove(k));
        }
        chosen.reverse();
        frontier = chosen.into_iter().map(|(s, w)| b.push(s, w)).collect();
    }
    Ok(AnsatzSet {
        n_qubits: hamiltonian.n_qubits(),
        states: b.states,
        words: b.words,
        generators,
        seed: seed.clone(),
        order,
        subset: Some((q, rng_seed)),
    })
}
