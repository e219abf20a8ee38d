//! Dense statevector engine.
//!
//! This stands in for the quantum processor: every overlap the algorithm
//! needs is an inner product `⟨χ_i|P|χ_j⟩` evaluated here exactly.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CVec, ONE, ZERO};
use crate::pauli::{PauliString, PauliSum};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: CVec,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amps: CVec) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Shape(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                n_qubits
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state; `bits[0]` is site 1.
    pub fn basis_state(n_qubits: usize, bits: &str) -> Result<Self> {
        if bits.chars().count() != n_qubits {
            return Err(Error::Shape(format!(
                "bitstring {bits:?} has length {}, expected {n_qubits}",
                bits.chars().count()
            )));
        }
        let mut index = 0usize;
        for ch in bits.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                _ => return Err(Error::InvalidParameter(format!("bad bit {ch:?} in {bits:?}"))),
            }
        }
        let mut amps = CVec::zeros(1 << n_qubits);
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// `|+⟩^{⊗n}`
    pub fn uniform(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self {
            n_qubits,
            amps: CVec::from_element(d, a),
        }
    }

    /// Haar-random state from complex Gaussian amplitudes.
    pub fn random(n_qubits: usize, rng_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let d = 1usize << n_qubits;
        let amps = CVec::from_fn(d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        Self { n_qubits, amps }.normalized()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.unscale_mut(n);
        }
        self
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check(other.n_qubits)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Rescale so the first amplitude with magnitude above 1e-12 is real
    /// and positive.
    pub fn with_canonical_phase(mut self) -> Self {
        if let Some(a) = self.amps.iter().find(|a| a.norm() > 1e-12).copied() {
            let phase = a / a.norm();
            for x in self.amps.iter_mut() {
                *x /= phase;
            }
        }
        self
    }

    pub fn apply_pauli_string(&self, p: &PauliString) -> Result<StateVector> {
        self.check(p.n_qubits())?;
        let act = p.action();
        let mut out = CVec::zeros(self.dim());
        for (k, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let (j, ph) = act.apply(k);
            out[j] = ph * a;
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `op|self⟩`, not normalised.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<StateVector> {
        self.check(op.n_qubits())?;
        let mut out = CVec::zeros(self.dim());
        for (c, s) in op.terms() {
            let act = s.action();
            for (k, &a) in self.amps.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let (j, ph) = act.apply(k);
                out[j] += c * ph * a;
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == self.n_qubits {
            Ok(())
        } else {
            Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: n,
            })
        }
    }
}

/// `⟨bra|op|ket⟩`
pub fn matrix_element(bra: &StateVector, op: &PauliSum, ket: &StateVector) -> Result<Complex64> {
    bra.inner(&ket.apply_pauli_sum(op)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{ops, Pauli};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tfim2(g: f64) -> PauliSum {
        PauliSum::parse(2, &[(c(0.5, 0.0), "ZZ"), (c(g, 0.0), "XI"), (c(g, 0.0), "IX")]).unwrap()
    }

    #[test]
    fn basis_state_indexing() {
        let s = StateVector::basis_state(2, "00").unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        let s = StateVector::basis_state(2, "10").unwrap();
        assert_eq!(s.amplitudes()[2], ONE);
        let s = StateVector::basis_state(5, "11111").unwrap();
        assert_eq!(s.amplitudes()[31], ONE);
        assert!(StateVector::basis_state(3, "10").is_err());
        assert!(StateVector::basis_state(2, "1a").is_err());
    }

    #[test]
    fn x_flips_zero_to_one() {
        let s = StateVector::basis_state(1, "0").unwrap();
        let out = s.apply_pauli_sum(&ops::single(1, 0, Pauli::X)).unwrap();
        assert_eq!(out, StateVector::basis_state(1, "1").unwrap());
    }

    #[test]
    fn tfim_action_on_all_zeros() {
        let s = StateVector::basis_state(2, "00").unwrap();
        let out = s.apply_pauli_sum(&tfim2(1.0)).unwrap();
        let expected = [c(0.5, 0.0), ONE, ONE, ZERO];
        for (a, b) in out.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn lowering_annihilates_one() {
        let s = StateVector::basis_state(1, "1").unwrap();
        let out = s.apply_pauli_sum(&ops::lowering(1, 0)).unwrap();
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn matrix_elements() {
        let zero = StateVector::basis_state(1, "0").unwrap();
        let z = ops::single(1, 0, Pauli::Z);
        assert_eq!(matrix_element(&zero, &z, &zero).unwrap(), ONE);
        let s = StateVector::basis_state(2, "00").unwrap();
        for g in [0.0, 0.7, 3.0] {
            assert!((matrix_element(&s, &tfim2(g), &s).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        }
        let r = StateVector::random(3, 11);
        let one = matrix_element(&r, &PauliSum::identity(3), &r).unwrap();
        assert!((one - ONE).norm() < 1e-12);
    }

    #[test]
    fn apply_matches_dense() {
        let h = PauliSum::parse(
            3,
            &[(c(0.3, 0.0), "XYZ"), (c(-1.2, 0.4), "ZZI"), (c(0.0, 0.7), "IYX")],
        )
        .unwrap();
        let s = StateVector::random(3, 5);
        let via_engine = s.apply_pauli_sum(&h).unwrap();
        let via_dense = h.to_dense().unwrap() * s.amplitudes();
        assert!((via_engine.amplitudes() - via_dense).norm() < 1e-12);
    }

    #[test]
    fn canonical_phase_makes_leading_amplitude_positive() {
        let s = StateVector::random(2, 3);
        let s = StateVector::from_amplitudes(2, s.amplitudes() * c(0.0, -1.0)).unwrap();
        let canon = s.with_canonical_phase();
        let lead = canon.amplitudes().iter().find(|a| a.norm() > 1e-12).unwrap();
        assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        assert!((canon.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_qubits() {
        let s = StateVector::basis_state(2, "00").unwrap();
        assert!(s.apply_pauli_sum(&PauliSum::identity(3)).is_err());
    }
}
