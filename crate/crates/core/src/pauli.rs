//! Tensored Pauli operators and complex linear combinations of them.
//!
//! Site 1 is the leftmost character of a word and the most significant bit
//! of a computational-basis index. `Z|0⟩ = +|0⟩`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE, ZERO};

/// Coefficients below this magnitude are dropped during canonicalisation.
pub const PRUNE_TOL: f64 = 1e-14;

/// Default qubit limit for dense expansion.
pub const DENSE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-site product `self · other = phase · result`.
    pub fn mul(self, other: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, X) => (Phase::MINUS_I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, Y) => (Phase::MINUS_I, X),
            (Z, X) => (Phase::I, Y),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn signs(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

/// A power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    codes: Vec<Pauli>,
}

impl PauliString {
    pub fn new(codes: Vec<Pauli>) -> Self {
        Self { codes }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            codes: vec![Pauli::I; n_qubits],
        }
    }

    /// Word with the given Paulis on 0-based sites and identity elsewhere.
    pub fn from_sites(n_qubits: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut codes = vec![Pauli::I; n_qubits];
        for &(site, p) in sites {
            if site >= n_qubits {
                return Err(Error::InvalidParameter(format!(
                    "site {site} out of range for {n_qubits} qubits"
                )));
            }
            codes[site] = p;
        }
        Ok(Self { codes })
    }

    pub fn n_qubits(&self) -> usize {
        self.codes.len()
    }

    pub fn codes(&self) -> &[Pauli] {
        &self.codes
    }

    pub fn is_identity(&self) -> bool {
        self.codes.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.codes.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn mul(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        check_qubits(self.n_qubits(), other.n_qubits())?;
        let mut phase = Phase::ONE;
        let codes = self
            .codes
            .iter()
            .zip(&other.codes)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase = phase * ph;
                p
            })
            .collect();
        Ok((phase, PauliString { codes }))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .codes
            .iter()
            .zip(&other.codes)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Bit masks describing the action on basis indices.
    pub fn action(&self) -> PauliAction {
        let n = self.n_qubits();
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut n_y = 0u8;
        for (site, &p) in self.codes.iter().enumerate() {
            let bit = 1usize << (n - 1 - site);
            if p.flips() {
                flip |= bit;
            }
            if p.signs() {
                sign |= bit;
            }
            if p == Pauli::Y {
                n_y += 1;
            }
        }
        PauliAction {
            flip,
            sign,
            base: Phase(n_y % 4),
        }
    }
}

/// `P|k⟩ = phase(k) |k ⊕ flip⟩`.
#[derive(Clone, Copy, Debug)]
pub struct PauliAction {
    pub flip: usize,
    pub sign: usize,
    base: Phase,
}

impl PauliAction {
    #[inline]
    pub fn apply(&self, k: usize) -> (usize, Complex64) {
        let mut phase = self.base;
        if (k & self.sign).count_ones() % 2 == 1 {
            phase = phase * Phase::MINUS_ONE;
        }
        (k ^ self.flip, phase.to_complex())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.codes {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::PauliParse(s.to_string()));
        }
        s.chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .map(PauliString::new)
            .ok_or_else(|| Error::PauliParse(s.to_string()))
    }
}

fn check_qubits(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::QubitMismatch { expected, found })
    }
}

/// Canonical complex linear combination of Pauli strings.
///
/// Terms are kept sorted by word with duplicates merged and coefficients
/// below [`PRUNE_TOL`] removed, so structural equality is operator equality.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_string(ONE, PauliString::identity(n_qubits))
    }

    pub fn from_string(coeff: Complex64, string: PauliString) -> Self {
        let n = string.n_qubits();
        Self::canonical(n, std::iter::once((coeff, string)))
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (Complex64, PauliString)>,
    ) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().collect();
        for (_, s) in &terms {
            check_qubits(n_qubits, s.n_qubits())?;
        }
        Ok(Self::canonical(n_qubits, terms))
    }

    /// Parse `(coeff, word)` pairs.
    pub fn parse(n_qubits: usize, terms: &[(Complex64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(c, w)| Ok((c, w.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n_qubits, parsed)
    }

    fn canonical(n_qubits: usize, terms: impl IntoIterator<Item = (Complex64, PauliString)>) -> Self {
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (c, s) in terms {
            *acc.entry(s).or_insert(ZERO) += c;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .map(|(s, c)| (c, s))
            .collect();
        Self { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.iter().map(|(_, s)| s)
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms
            .binary_search_by(|(_, s)| s.cmp(string))
            .map(|k| self.terms[k].0)
            .unwrap_or(ZERO)
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        Ok(Self::canonical(
            self.n_qubits,
            self.terms.iter().chain(&other.terms).cloned(),
        ))
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        Self::canonical(
            self.n_qubits,
            self.terms.iter().map(|(c, s)| (c * factor, s.clone())),
        )
    }

    /// Canonicalised product; each output coefficient is the sum over
    /// contributing pairs of `a_k b_l phase_kl`.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (ca, sa) in &self.terms {
            for (cb, sb) in &other.terms {
                let (phase, s) = sa.mul(sb)?;
                out.push((ca * cb * phase.to_complex(), s));
            }
        }
        Ok(Self::canonical(self.n_qubits, out))
    }

    pub fn pow(&self, k: u32) -> PauliSum {
        let mut acc = PauliSum::identity(self.n_qubits);
        for _ in 0..k {
            acc = acc.mul(self).expect("same qubit count");
        }
        acc
    }

    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn dagger(&self) -> PauliSum {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c.conj(), s.clone())).collect(),
        }
    }

    /// All canonical coefficients real (to 1e-12).
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() <= 1e-12)
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    pub fn to_dense(&self) -> Result<CMat> {
        self.to_dense_with_limit(DENSE_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<CMat> {
        if self.n_qubits > limit {
            return Err(Error::SizeLimit {
                n_qubits: self.n_qubits,
                limit,
            });
        }
        let d = 1usize << self.n_qubits;
        let mut m = CMat::zeros(d, d);
        for (c, s) in &self.terms {
            let act = s.action();
            for k in 0..d {
                let (row, ph) = act.apply(k);
                m[(row, k)] += c * ph;
            }
        }
        Ok(m)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(c, s)| TermRecord {
                coeff: [c.re, c.im],
                pauli: s.to_string(),
            })
            .collect()
    }

    pub fn from_records(n_qubits: usize, records: &[TermRecord]) -> Result<PauliSum> {
        let terms = records
            .iter()
            .map(|r| {
                Ok((
                    Complex64::new(r.coeff[0], r.coeff[1]),
                    r.pauli.parse::<PauliString>()?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n_qubits, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, s)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}·{}", c.re, s)?;
            } else {
                write!(f, "({}{:+}i)·{}", c.re, c.im, s)?;
            }
        }
        Ok(())
    }
}

/// Serialised form of one term: `{"coeff": [re, im], "pauli": "XZI"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: [f64; 2],
    pub pauli: String,
}

/// Single-site operator helpers used by the model builders.
pub mod ops {
    use super::*;

    pub fn single(n: usize, site: usize, p: Pauli) -> PauliSum {
        PauliSum::from_string(ONE, PauliString::from_sites(n, &[(site, p)]).expect("site in range"))
    }

    pub fn pair(n: usize, a: (usize, Pauli), b: (usize, Pauli)) -> PauliSum {
        PauliSum::from_string(ONE, PauliString::from_sites(n, &[a, b]).expect("sites in range"))
    }

    /// `σ₋ = (X − iY)/2`, maps `|0⟩` to `|1⟩`.
    pub fn lowering(n: usize, site: usize) -> PauliSum {
        let x = single(n, site, Pauli::X).scale(Complex64::new(0.5, 0.0));
        let y = single(n, site, Pauli::Y).scale(Complex64::new(0.0, -0.5));
        x.add(&y).expect("same qubit count")
    }

    /// `σ₊ = (X + iY)/2`
    pub fn raising(n: usize, site: usize) -> PauliSum {
        lowering(n, site).dagger()
    }

    /// Total magnetisation `Σ_j Z_j`.
    pub fn magnetization(n: usize) -> PauliSum {
        (0..n).fold(PauliSum::zero(n), |acc, j| {
            acc.add(&single(n, j, Pauli::Z)).expect("same qubit count")
        })
    }

    /// `SWAP_{ab} = (I + XX + YY + ZZ)/2`
    pub fn swap(n: usize, a: usize, b: usize) -> PauliSum {
        let half = Complex64::new(0.5, 0.0);
        let mut terms = vec![(half, PauliString::identity(n))];
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push((half, PauliString::from_sites(n, &[(a, p), (b, p)]).expect("sites in range")));
        }
        PauliSum::from_terms(n, terms).expect("same qubit count")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs_diff};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_single(p: Pauli) -> CMat {
        match p {
            Pauli::I => CMat::identity(2, 2),
            Pauli::X => CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
            Pauli::Z => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)]),
        }
    }

    // Independent Kronecker-product oracle.
    fn kron_dense(s: &PauliString) -> CMat {
        s.codes()
            .iter()
            .fold(CMat::identity(1, 1), |acc, &p| kron(&acc, &dense_single(p)))
    }

    #[test]
    fn single_site_products() {
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let (ph, s) = x.mul(&y).unwrap();
        assert_eq!(ph, Phase::I);
        assert_eq!(s.to_string(), "Z");
    }

    #[test]
    fn identity_is_neutral() {
        for w in ["XYZ", "IIZ", "YYY"] {
            let p: PauliString = w.parse().unwrap();
            let (ph, s) = PauliString::identity(3).mul(&p).unwrap();
            assert_eq!(ph, Phase::ONE);
            assert_eq!(s, p);
        }
    }

    #[test]
    fn two_site_product_matches_kronecker_oracle() {
        let a: PauliString = "XZ".parse().unwrap();
        let b: PauliString = "ZZ".parse().unwrap();
        let (ph, s) = a.mul(&b).unwrap();
        assert_eq!(ph, Phase::MINUS_I);
        assert_eq!(s.to_string(), "YI");
        let lhs = kron_dense(&a) * kron_dense(&b);
        let rhs = kron_dense(&s) * ph.to_complex();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-15);
    }

    #[test]
    fn mismatched_qubits_is_an_error() {
        let a: PauliString = "XZ".parse().unwrap();
        let b: PauliString = "Z".parse().unwrap();
        assert!(matches!(a.mul(&b), Err(Error::QubitMismatch { .. })));
        let sa = PauliSum::from_string(ONE, a);
        let sb = PauliSum::from_string(ONE, b);
        assert!(sa.mul(&sb).is_err());
    }

    #[test]
    fn parse_rejects_lowercase_and_empty() {
        assert!("xz".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn x_plus_z_squared_is_two_identity() {
        let s = PauliSum::parse(1, &[(ONE, "X"), (ONE, "Z")]).unwrap();
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq, PauliSum::identity(1).scale(c(2.0, 0.0)));
        let dense = s.to_dense().unwrap();
        assert!(max_abs_diff(&(&dense * &dense), &sq.to_dense().unwrap()) < 1e-15);
    }

    #[test]
    fn multiplying_by_identity_is_noop() {
        let s = PauliSum::parse(2, &[(c(0.3, 0.1), "XY"), (c(-1.0, 0.0), "ZI")]).unwrap();
        assert_eq!(s.mul(&PauliSum::identity(2)).unwrap(), s);
    }

    #[test]
    fn lowering_number_operator() {
        let sm = ops::lowering(1, 0);
        // σ₋ annihilates |1⟩, so σ₋†σ₋ projects onto |0⟩
        let n = sm.dagger().mul(&sm).unwrap();
        let expected = PauliSum::parse(1, &[(c(0.5, 0.0), "I"), (c(0.5, 0.0), "Z")]).unwrap();
        assert_eq!(n, expected);
        let hole = sm.mul(&sm.dagger()).unwrap();
        let expected = PauliSum::parse(1, &[(c(0.5, 0.0), "I"), (c(-0.5, 0.0), "Z")]).unwrap();
        assert_eq!(hole, expected);
        let dense = sm.to_dense().unwrap();
        assert!(max_abs_diff(&(dense.adjoint() * &dense), &n.to_dense().unwrap()) < 1e-15);
    }

    #[test]
    fn dagger_conjugates_coefficients() {
        let iz = PauliSum::parse(1, &[(c(0.0, 1.0), "Z")]).unwrap();
        assert_eq!(iz.dagger(), PauliSum::parse(1, &[(c(0.0, -1.0), "Z")]).unwrap());
        let sp = ops::raising(1, 0);
        assert_eq!(sp.coefficient(&"Y".parse().unwrap()), c(0.0, 0.5));
        assert_eq!(sp.coefficient(&"X".parse().unwrap()), c(0.5, 0.0));
        let h = PauliSum::parse(2, &[(c(0.5, 0.0), "ZZ"), (ONE, "XI")]).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(h.dagger(), h);
    }

    #[test]
    fn dense_conventions() {
        let z = ops::single(1, 0, Pauli::Z).to_dense().unwrap();
        assert_eq!(z, CMat::from_diagonal(&nalgebra::dvector![ONE, c(-1.0, 0.0)]));
        let zz = PauliSum::parse(2, &[(ONE, "ZZ")]).unwrap().to_dense().unwrap();
        let diag: Vec<f64> = zz.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        let sm = ops::lowering(1, 0).to_dense().unwrap();
        // single nonzero entry taking |0⟩ to |1⟩
        assert!((sm[(1, 0)] - ONE).norm() < 1e-15);
        assert!(sm[(0, 0)].norm() + sm[(0, 1)].norm() + sm[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn dense_limit_enforced() {
        let s = PauliSum::identity(5);
        assert!(matches!(s.to_dense_with_limit(4), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn pruning_removes_cancelled_terms() {
        let s = PauliSum::parse(1, &[(ONE, "X"), (c(-1.0, 0.0), "X"), (c(1e-15, 0.0), "Z")]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn swap_exchanges_sites() {
        let sw = ops::swap(2, 0, 1).to_dense().unwrap();
        // |01⟩ (index 1) <-> |10⟩ (index 2)
        assert!((sw[(2, 1)] - ONE).norm() < 1e-15);
        assert!((sw[(1, 2)] - ONE).norm() < 1e-15);
        assert!((sw[(0, 0)] - ONE).norm() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pauli() -> impl Strategy<Value = Pauli> {
            prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
        }

        fn string(n: usize) -> impl Strategy<Value = PauliString> {
            proptest::collection::vec(pauli(), n).prop_map(PauliString::new)
        }

        fn sum(n: usize) -> impl Strategy<Value = PauliSum> {
            proptest::collection::vec(((-1.0f64..1.0), (-1.0f64..1.0), string(n)), 1..5).prop_map(
                move |ts| {
                    PauliSum::from_terms(n, ts.into_iter().map(|(re, im, s)| (c(re, im), s))).unwrap()
                },
            )
        }

        proptest! {
            #[test]
            fn product_matches_kronecker(a in string(3), b in string(3)) {
                let (ph, s) = a.mul(&b).unwrap();
                prop_assert!([Phase::ONE, Phase::I, Phase::MINUS_ONE, Phase::MINUS_I].contains(&ph));
                let lhs = kron_dense(&a) * kron_dense(&b);
                let rhs = kron_dense(&s) * ph.to_complex();
                prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
            }

            #[test]
            fn to_dense_is_multiplicative((a, b) in (1usize..=4).prop_flat_map(|n| (sum(n), sum(n)))) {
                let prod = a.mul(&b).unwrap().to_dense().unwrap();
                let dense = a.to_dense().unwrap() * b.to_dense().unwrap();
                prop_assert!(max_abs_diff(&prod, &dense) < 1e-12);
            }

            #[test]
            fn multiplication_is_associative(a in sum(2), b in sum(2), c3 in sum(2)) {
                let left = a.mul(&b).unwrap().mul(&c3).unwrap();
                let right = a.mul(&b.mul(&c3).unwrap()).unwrap();
                prop_assert!(max_abs_diff(&left.to_dense().unwrap(), &right.to_dense().unwrap()) < 1e-12);
            }

            #[test]
            fn canonicalize_is_idempotent(a in sum(3)) {
                let again = PauliSum::from_terms(3, a.terms().iter().cloned()).unwrap();
                prop_assert_eq!(again, a.clone());
                prop_assert_eq!(a.dagger().dagger(), a);
            }
        }
    }
}
