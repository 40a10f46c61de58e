//! Weighted Pauli-string algebra and dense-matrix realization.
//!
//! Letter-words are little-endian: index 0 of a word is qubit 0. Operators
//! keep their terms in a map keyed by word, so term order is always
//! lexicographic and duplicate words merge on insertion.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default magnitude below which simplification drops a coefficient.
pub const DEFAULT_SIMPLIFY_TOL: f64 = 1e-12;

/// Largest qubit count for which dense matrices are materialized.
pub const MATRIX_QUBIT_LIMIT: usize = 12;

/// Single-qubit Pauli letter. Declaration order gives I < X < Y < Z,
/// matching lexicographic order of the letters themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Product of two letters: returns (letter, k) with the phase i^k.
    fn mul(self, other: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (self, other) {
            (I, p) => (p, 0),
            (p, I) => (p, 0),
            (X, X) | (Y, Y) | (Z, Z) => (I, 0),
            (X, Y) => (Z, 1),
            (Y, X) => (Z, 3),
            (Y, Z) => (X, 1),
            (Z, Y) => (X, 3),
            (Z, X) => (Y, 1),
            (X, Z) => (Y, 3),
        }
    }
}

fn phase_factor(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Fixed-length word of Pauli letters, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Self {
        PauliWord(alloc::vec![Pauli::I; n_qubits])
    }

    pub fn from_letters(letters: Vec<Pauli>) -> Self {
        PauliWord(letters)
    }

    /// Parse a word like "XZI". Little-endian: first character is qubit 0.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars().map(Pauli::from_char).collect::<Option<Vec<_>>>().map(PauliWord)
    }

    /// Single non-identity letter at `qubit` in a word of `n_qubits`.
    pub fn single(n_qubits: usize, qubit: usize, letter: Pauli) -> Self {
        let mut w = alloc::vec![Pauli::I; n_qubits];
        w[qubit] = letter;
        PauliWord(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.0[qubit]
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    /// Bit masks used when applying the word to basis states:
    /// `flip` has a bit set where the letter is X or Y, `z_like` where Z or Y.
    pub(crate) fn masks(&self) -> (usize, usize) {
        let mut flip = 0usize;
        let mut z_like = 0usize;
        for (q, &p) in self.0.iter().enumerate() {
            match p {
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    z_like |= 1 << q;
                }
                Pauli::Z => z_like |= 1 << q,
                Pauli::I => {}
            }
        }
        (flip, z_like)
    }

    /// Count of Y letters, needed for the global phase of basis-state action.
    pub(crate) fn y_count(&self) -> usize {
        self.0.iter().filter(|&&p| p == Pauli::Y).count()
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.0 {
            f.write_char(p.as_char())?;
        }
        Ok(())
    }
}

/// A single weighted Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: Complex64,
    pub word: PauliWord,
}

impl PauliTerm {
    pub fn new(coefficient: Complex64, word: PauliWord) -> Self {
        PauliTerm { coefficient, word }
    }
}

/// Letter-wise product of two terms, phases included.
pub fn pauli_mul(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.word.len() != b.word.len() {
        return Err(Error::WordLengthMismatch { left: a.word.len(), right: b.word.len() });
    }
    let mut letters = Vec::with_capacity(a.word.len());
    let mut phase = 0u8;
    for (&pa, &pb) in a.word.letters().iter().zip(b.word.letters()) {
        let (p, k) = pa.mul(pb);
        letters.push(p);
        phase = (phase + k) % 4;
    }
    Ok(PauliTerm::new(
        a.coefficient * b.coefficient * phase_factor(phase),
        PauliWord::from_letters(letters),
    ))
}

/// Weighted sum of Pauli strings on a fixed qubit count.
///
/// Terms with equal words merge on insertion; iteration is lexicographic by
/// word. Values are immutable once built by the higher-level constructors,
/// so sharing across threads needs no synchronization.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl QubitOperator {
    pub fn zero(n_qubits: usize) -> Self {
        QubitOperator { n_qubits, terms: BTreeMap::new() }
    }

    /// c * identity word.
    pub fn scalar(n_qubits: usize, c: Complex64) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add(PauliWord::identity(n_qubits), c);
        op
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::scalar(n_qubits, Complex64::new(1.0, 0.0))
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = PauliTerm>,
    {
        let mut op = Self::zero(n_qubits);
        for t in terms {
            op.add_term(t)?;
        }
        Ok(op)
    }

    pub fn add_term(&mut self, term: PauliTerm) -> Result<()> {
        if term.word.len() != self.n_qubits {
            return Err(Error::WordLengthMismatch { left: self.n_qubits, right: term.word.len() });
        }
        self.add(term.word, term.coefficient);
        Ok(())
    }

    fn add(&mut self, word: PauliWord, c: Complex64) {
        let entry = self.terms.entry(word).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic word order.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliWord, Complex64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn coefficient(&self, word: &PauliWord) -> Complex64 {
        self.terms.get(word).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Drop terms with |coefficient| <= tol. Like terms are already merged.
    pub fn simplify(&self, tol: f64) -> Self {
        debug_assert!(tol >= 0.0);
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(w, c)| (w.clone(), *c))
            .collect();
        QubitOperator { n_qubits: self.n_qubits, terms }
    }

    /// Largest coefficient magnitude.
    pub fn max_coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), c * factor)).collect();
        QubitOperator { n_qubits: self.n_qubits, terms }
    }

    pub fn plus(&self, other: &QubitOperator) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitCountMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add(w.clone(), c);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &QubitOperator) -> Result<Self> {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Operator product, expanded term by term and merged.
    pub fn mul(&self, other: &QubitOperator) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitCountMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        let mut out = Self::zero(self.n_qubits);
        for (wa, ca) in self.terms() {
            let ta = PauliTerm::new(ca, wa.clone());
            for (wb, cb) in other.terms() {
                let tb = PauliTerm::new(cb, wb.clone());
                let t = pauli_mul(&ta, &tb)?;
                out.add(t.word, t.coefficient);
            }
        }
        Ok(out)
    }

    /// Max-magnitude coefficient of simplify(ab - ba); 0 iff the operators
    /// commute exactly.
    pub fn commutator_norm(&self, other: &QubitOperator) -> Result<f64> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        Ok(ab.minus(&ba)?.simplify(0.0).max_coefficient_norm())
    }

    /// Dense 2^n x 2^n matrix of the operator.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_with_limit(MATRIX_QUBIT_LIMIT)
    }

    pub fn to_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > limit {
            return Err(Error::CapacityExceeded { n_qubits: self.n_qubits, limit });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (word, coeff) in self.terms() {
            let (flip, z_like) = word.masks();
            // Y|b> = i(-1)^b |1-b>: a global i^(#Y) times (-1)^(z-like bits set).
            let y_phase = phase_factor((word.y_count() % 4) as u8);
            for col in 0..dim {
                let row = col ^ flip;
                let sign = if ((col & z_like).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
                m[(row, col)] += coeff * y_phase * sign;
            }
        }
        Ok(m)
    }

    /// One term per line: `<re> <im> <letters>`, lexicographic by word.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (w, c) in self.terms() {
            let _ = writeln_term(&mut s, c, w);
        }
        s
    }
}

fn writeln_term(s: &mut String, c: Complex64, w: &PauliWord) -> fmt::Result {
    writeln_f64(s, c.re)?;
    s.push(' ');
    writeln_f64(s, c.im)?;
    s.push(' ');
    write!(s, "{w}")?;
    s.push('\n');
    Ok(())
}

fn writeln_f64(s: &mut String, v: f64) -> fmt::Result {
    write!(s, "{v:.12e}")
}

impl fmt::Display for QubitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)*{}", c.re, c.im, w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn term(c: Complex64, s: &str) -> PauliTerm {
        PauliTerm::new(c, PauliWord::parse(s).unwrap())
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_letter_products() {
        let xx = pauli_mul(&term(re(1.0), "X"), &term(re(1.0), "X")).unwrap();
        assert_eq!(xx.word, PauliWord::parse("I").unwrap());
        assert_eq!(xx.coefficient, re(1.0));

        let xy = pauli_mul(&term(re(1.0), "X"), &term(re(1.0), "Y")).unwrap();
        assert_eq!(xy.word, PauliWord::parse("Z").unwrap());
        assert_eq!(xy.coefficient, Complex64::new(0.0, 1.0));
    }

    #[test]
    fn two_qubit_product_accumulates_phase() {
        // (0.5 XZ)(2 YI) = i ZZ
        let p = pauli_mul(&term(re(0.5), "XZ"), &term(re(2.0), "YI")).unwrap();
        assert_eq!(p.word, PauliWord::parse("ZZ").unwrap());
        assert!((p.coefficient - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(pauli_mul(&term(re(1.0), "X"), &term(re(1.0), "XZ")).is_err());
    }

    #[test]
    fn simplify_merges_and_drops() {
        let op = QubitOperator::from_terms(
            1,
            vec![term(re(1.0), "X"), term(re(-1.0), "X"), term(re(1.0), "Z"), term(re(2.0), "Z")],
        )
        .unwrap();
        let s = op.simplify(0.0);
        assert_eq!(s.n_terms(), 1);
        assert_eq!(s.coefficient(&PauliWord::parse("Z").unwrap()), re(3.0));

        let tiny = QubitOperator::from_terms(1, vec![term(re(1e-14), "Y")]).unwrap();
        assert!(tiny.simplify(1e-12).is_zero());
    }

    #[test]
    fn z_matrix_is_diag_plus_minus() {
        let op = QubitOperator::from_terms(1, vec![term(re(1.0), "Z")]).unwrap();
        let m = op.to_matrix().unwrap();
        assert_eq!(m[(0, 0)], re(1.0));
        assert_eq!(m[(1, 1)], re(-1.0));
        assert_eq!(m[(0, 1)], re(0.0));
        assert_eq!(m[(1, 0)], re(0.0));
    }

    #[test]
    fn identity_matrix_two_qubits() {
        let op = QubitOperator::identity(2);
        let m = op.to_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(m[(i, j)], re(want));
            }
        }
    }

    #[test]
    fn xx_plus_yy_swap_block() {
        // 0.5 XX + 0.5 YY has ones exactly on (01,10) and (10,01).
        let op = QubitOperator::from_terms(2, vec![term(re(0.5), "XX"), term(re(0.5), "YY")])
            .unwrap();
        let m = op.to_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (1, 2) || (i, j) == (2, 1) { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - re(want)).norm() < 1e-15, "entry ({i},{j}) = {}", m[(i, j)]);
            }
        }
    }

    #[test]
    fn commutator_norms() {
        let z = QubitOperator::from_terms(1, vec![term(re(1.0), "Z")]).unwrap();
        assert_eq!(z.commutator_norm(&z).unwrap(), 0.0);

        let x = QubitOperator::from_terms(1, vec![term(re(1.0), "X")]).unwrap();
        // [X, Z] = -2iY
        assert!((x.commutator_norm(&z).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_error_above_limit() {
        let op = QubitOperator::identity(3);
        assert!(op.to_matrix_with_limit(2).is_err());
    }

    #[test]
    fn dump_is_sorted_and_stable() {
        let op = QubitOperator::from_terms(
            2,
            vec![term(re(0.5), "ZI"), term(re(1.5), "IX"), term(Complex64::new(0.0, 2.0), "XY")],
        )
        .unwrap();
        let d = op.dump();
        let lines: Vec<&str> = d.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with(" IX"));
        assert!(lines[1].ends_with(" XY"));
        assert!(lines[2].ends_with(" ZI"));
    }
}
