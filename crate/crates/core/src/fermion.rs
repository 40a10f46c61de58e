//! Second-quantized molecular operators and fermion-to-qubit mappings.
//!
//! Spin orbitals use block ordering: alpha modes 0..m-1, beta modes m..2m-1
//! for m spatial orbitals. The parity transform then stores the alpha-block
//! parity on qubit m-1 and the total parity on qubit 2m-1, which is what the
//! two-qubit reduction removes.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliWord, QubitOperator, DEFAULT_SIMPLIFY_TOL};

/// One-/two-electron integrals and sector metadata read from FCIDUMP.
///
/// `h` and `g` are stored over spatial orbitals in chemists' index order,
/// expanded to full (redundant) symmetric storage. Energies in Hartree.
#[derive(Debug, Clone)]
pub struct FermionIntegrals {
    n_spatial: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    h: Vec<f64>,
    g: Vec<f64>,
    pub e0: f64,
}

impl FermionIntegrals {
    pub fn new(n_spatial: usize, n_electrons: usize, ms2: i32, e0: f64) -> Self {
        FermionIntegrals {
            n_spatial,
            n_electrons,
            ms2,
            h: vec![0.0; n_spatial * n_spatial],
            g: vec![0.0; n_spatial.pow(4)],
            e0,
        }
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.n_spatial + j]
    }

    pub fn g(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let m = self.n_spatial;
        self.g[((i * m + j) * m + k) * m + l]
    }

    /// Store h_ij = h_ji.
    pub fn set_one_body(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        let m = self.n_spatial;
        self.h[i * m + j] = v;
        self.h[j * m + i] = v;
        Ok(())
    }

    /// Store (ij|kl) under the full 8-fold real-integral symmetry.
    pub fn set_two_body(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) -> Result<()> {
        for idx in [i, j, k, l] {
            self.check_index(idx)?;
        }
        let m = self.n_spatial;
        let perms = [
            (i, j, k, l),
            (j, i, k, l),
            (i, j, l, k),
            (j, i, l, k),
            (k, l, i, j),
            (l, k, i, j),
            (k, l, j, i),
            (l, k, j, i),
        ];
        for (a, b, c, d) in perms {
            self.g[((a * m + b) * m + c) * m + d] = v;
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n_spatial {
            Err(Error::OrbitalIndexOutOfRange { index: i, n_spatial: self.n_spatial })
        } else {
            Ok(())
        }
    }

    /// Check h symmetry and the 8-fold g symmetry within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = self.n_spatial;
        for i in 0..m {
            for j in 0..m {
                if (self.h(i, j) - self.h(j, i)).abs() > tol {
                    return Err(Error::IntegralSymmetry {
                        message: format!("h[{i},{j}] != h[{j},{i}]"),
                    });
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = self.g(i, j, k, l);
                        for (a, b, c, d) in
                            [(j, i, k, l), (i, j, l, k), (k, l, i, j), (l, k, j, i)]
                        {
                            if (v - self.g(a, b, c, d)).abs() > tol {
                                return Err(Error::IntegralSymmetry {
                                    message: format!(
                                        "g[{i},{j},{k},{l}] breaks 8-fold symmetry"
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A creation (`dagger`) or annihilation operator on one spin-orbital mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

pub fn create(mode: usize) -> Ladder {
    Ladder { mode, dagger: true }
}

pub fn annihilate(mode: usize) -> Ladder {
    Ladder { mode, dagger: false }
}

/// Weighted sum of normal-ordered ladder-operator products.
///
/// Canonical term form: creation operators first with ascending modes, then
/// annihilation operators with descending modes. `add_term` and `mul` rewrite
/// arbitrary products into this form via the anticommutation relations, so
/// like terms always merge.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        FermionOperator { n_modes, terms: BTreeMap::new() }
    }

    pub fn scalar(n_modes: usize, c: Complex64) -> Self {
        let mut op = Self::zero(n_modes);
        op.accumulate(Vec::new(), c);
        op
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> {
        self.terms.iter().map(|(ops, &c)| (ops.as_slice(), c))
    }

    /// Add `coefficient * ops[0] ops[1] ...` (leftmost acts last on a ket),
    /// normal ordering as needed.
    pub fn add_term(&mut self, coefficient: Complex64, ops: &[Ladder]) -> Result<()> {
        for op in ops {
            if op.mode >= self.n_modes {
                return Err(Error::OrbitalIndexOutOfRange {
                    index: op.mode,
                    n_spatial: self.n_modes,
                });
            }
        }
        for (ops, c) in normal_order(ops.to_vec(), coefficient) {
            self.accumulate(ops, c);
        }
        Ok(())
    }

    fn accumulate(&mut self, ops: Vec<Ladder>, c: Complex64) {
        let entry = self.terms.entry(ops).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    pub fn plus(&self, other: &FermionOperator) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::QubitCountMismatch { left: self.n_modes, right: other.n_modes });
        }
        let mut out = self.clone();
        for (ops, c) in other.terms() {
            out.accumulate(ops.to_vec(), c);
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let terms = self.terms.iter().map(|(ops, c)| (ops.clone(), c * factor)).collect();
        FermionOperator { n_modes: self.n_modes, terms }
    }

    /// Operator product; the result is normal ordered.
    pub fn mul(&self, other: &FermionOperator) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::QubitCountMismatch { left: self.n_modes, right: other.n_modes });
        }
        let mut out = Self::zero(self.n_modes);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                let mut ops = a.to_vec();
                ops.extend_from_slice(b);
                for (ops, c) in normal_order(ops, ca * cb) {
                    out.accumulate(ops, c);
                }
            }
        }
        Ok(out)
    }

    /// Drop terms with |coefficient| <= tol.
    pub fn simplify(&self, tol: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(ops, c)| (ops.clone(), *c))
            .collect();
        FermionOperator { n_modes: self.n_modes, terms }
    }
}

/// Rewrite a ladder product into canonical normal-ordered terms.
///
/// Uses a_i a+_j = delta_ij - a+_j a_i, plus in-block anticommutation
/// (equal modes inside a block annihilate the term).
fn normal_order(ops: Vec<Ladder>, coefficient: Complex64) -> Vec<(Vec<Ladder>, Complex64)> {
    let mut done: Vec<(Vec<Ladder>, Complex64)> = Vec::new();
    let mut work: Vec<(Vec<Ladder>, Complex64)> = vec![(ops, coefficient)];

    'items: while let Some((ops, c)) = work.pop() {
        for i in 0..ops.len().saturating_sub(1) {
            let (a, b) = (ops[i], ops[i + 1]);
            // annihilator before creator: contract and swap
            if !a.dagger && b.dagger {
                if a.mode == b.mode {
                    let mut contracted = ops.clone();
                    contracted.drain(i..=i + 1);
                    work.push((contracted, c));
                }
                let mut swapped = ops;
                swapped.swap(i, i + 1);
                work.push((swapped, -c));
                continue 'items;
            }
            // within a block: creators ascending, annihilators descending
            let out_of_order = (a.dagger && b.dagger && a.mode > b.mode)
                || (!a.dagger && !b.dagger && a.mode < b.mode);
            let duplicate = a.dagger == b.dagger && a.mode == b.mode;
            if duplicate {
                continue 'items; // a a or a+ a+ on the same mode is zero
            }
            if out_of_order {
                let mut swapped = ops;
                swapped.swap(i, i + 1);
                work.push((swapped, -c));
                continue 'items;
            }
        }
        done.push((ops, c));
    }
    done
}

/// Molecular Hamiltonian over spin orbitals:
/// sum_ij h_ij a+_i a_j + 1/2 sum_ijkl g_ijkl a+_i a+_k a_l a_j + E0,
/// with each spatial coefficient replicated over same-spin combinations.
pub fn build_hamiltonian(ints: &FermionIntegrals) -> Result<FermionOperator> {
    let m = ints.n_spatial();
    let n_modes = 2 * m;
    let mut op = FermionOperator::zero(n_modes);
    op = op.plus(&FermionOperator::scalar(n_modes, Complex64::new(ints.e0, 0.0)))?;

    // spin sigma in {0 (alpha), 1 (beta)}: spatial p maps to mode p + sigma*m
    let mode = |p: usize, sigma: usize| p + sigma * m;

    for i in 0..m {
        for j in 0..m {
            let v = ints.h(i, j);
            if v == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                op.add_term(
                    Complex64::new(v, 0.0),
                    &[create(mode(i, sigma)), annihilate(mode(j, sigma))],
                )?;
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = 0.5 * ints.g(i, j, k, l);
                    if v == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            op.add_term(
                                Complex64::new(v, 0.0),
                                &[
                                    create(mode(i, sigma)),
                                    create(mode(k, tau)),
                                    annihilate(mode(l, tau)),
                                    annihilate(mode(j, sigma)),
                                ],
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(op.simplify(0.0))
}

/// Particle-number operator: sum_i a+_i a_i.
pub fn number_operator(n_modes: usize) -> FermionOperator {
    let mut op = FermionOperator::zero(n_modes);
    for i in 0..n_modes {
        op.add_term(Complex64::new(1.0, 0.0), &[create(i), annihilate(i)])
            .expect("modes in range");
    }
    op
}

/// Total-spin-squared operator, S^2 = S- S+ + Sz (Sz + 1), over 2*n_spatial
/// block-ordered modes.
pub fn total_spin_operator(n_spatial: usize) -> FermionOperator {
    let m = n_spatial;
    let n_modes = 2 * m;
    let one = Complex64::new(1.0, 0.0);

    let mut s_plus = FermionOperator::zero(n_modes);
    let mut s_minus = FermionOperator::zero(n_modes);
    let mut s_z = FermionOperator::zero(n_modes);
    for p in 0..m {
        s_plus.add_term(one, &[create(p), annihilate(p + m)]).expect("in range");
        s_minus.add_term(one, &[create(p + m), annihilate(p)]).expect("in range");
        s_z.add_term(Complex64::new(0.5, 0.0), &[create(p), annihilate(p)]).expect("in range");
        s_z.add_term(Complex64::new(-0.5, 0.0), &[create(p + m), annihilate(p + m)])
            .expect("in range");
    }

    let lowering_raising = s_minus.mul(&s_plus).expect("same mode count");
    let sz_sq = s_z.mul(&s_z).expect("same mode count");
    lowering_raising
        .plus(&sz_sq)
        .and_then(|op| op.plus(&s_z))
        .expect("same mode count")
        .simplify(0.0)
}

enum Encoding {
    JordanWigner,
    Parity,
}

/// Pauli image of a single ladder operator under the chosen encoding.
fn ladder_image(op: Ladder, n_modes: usize, enc: &Encoding) -> QubitOperator {
    let j = op.mode;
    // a+ = (x_part - i y_part)/2, a = (x_part + i y_part)/2
    let y_sign = if op.dagger { -0.5 } else { 0.5 };

    let (x_word, y_word) = match enc {
        Encoding::JordanWigner => {
            // Z on 0..j, X or Y on j
            let mut xw = vec![Pauli::I; n_modes];
            let mut yw = vec![Pauli::I; n_modes];
            for q in 0..j {
                xw[q] = Pauli::Z;
                yw[q] = Pauli::Z;
            }
            xw[j] = Pauli::X;
            yw[j] = Pauli::Y;
            (xw, yw)
        }
        Encoding::Parity => {
            // X on j+1..n-1 in both parts; X_j Z_{j-1} or Y_j
            let mut xw = vec![Pauli::I; n_modes];
            let mut yw = vec![Pauli::I; n_modes];
            for q in j + 1..n_modes {
                xw[q] = Pauli::X;
                yw[q] = Pauli::X;
            }
            xw[j] = Pauli::X;
            if j > 0 {
                xw[j - 1] = Pauli::Z;
            }
            yw[j] = Pauli::Y;
            (xw, yw)
        }
    };

    let mut img = QubitOperator::zero(n_modes);
    img.add_term(crate::pauli::PauliTerm::new(
        Complex64::new(0.5, 0.0),
        PauliWord::from_letters(x_word),
    ))
    .expect("length matches");
    img.add_term(crate::pauli::PauliTerm::new(
        Complex64::new(0.0, y_sign),
        PauliWord::from_letters(y_word),
    ))
    .expect("length matches");
    img
}

fn map_with(fop: &FermionOperator, enc: Encoding) -> QubitOperator {
    let n = fop.n_modes();
    let mut acc = QubitOperator::zero(n);
    for (ops, c) in fop.terms() {
        let mut prod = QubitOperator::scalar(n, c);
        for &op in ops {
            prod = prod.mul(&ladder_image(op, n, &enc)).expect("equal qubit counts");
        }
        acc = acc.plus(&prod).expect("equal qubit counts");
    }
    acc.simplify(DEFAULT_SIMPLIFY_TOL)
}

/// Jordan-Wigner transform: a+_j -> (X_j - iY_j)/2 * Z_{j-1}..Z_0.
pub fn jordan_wigner(fop: &FermionOperator) -> QubitOperator {
    map_with(fop, Encoding::JordanWigner)
}

/// Parity transform: qubit j stores the occupation parity of modes 0..j.
/// Isospectral to the Jordan-Wigner image.
pub fn parity_map(fop: &FermionOperator) -> QubitOperator {
    map_with(fop, Encoding::Parity)
}

/// Eigenvalue of a conserved Z2 parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn of_count(count: usize) -> Parity {
        if count % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Symmetry sector substituted by the two-qubit reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionSector {
    pub alpha: Parity,
    pub beta: Parity,
}

impl ReductionSector {
    pub fn from_counts(n_alpha: usize, n_beta: usize) -> Self {
        ReductionSector { alpha: Parity::of_count(n_alpha), beta: Parity::of_count(n_beta) }
    }

    /// Sector of the (N, 2Sz) target: N_alpha = (N + ms2)/2, N_beta = (N - ms2)/2.
    pub fn from_target(n_electrons: usize, ms2: i32) -> Result<Self> {
        let n = n_electrons as i64;
        let m = ms2 as i64;
        if (n + m) % 2 != 0 || n + m < 0 || n - m < 0 {
            return Err(Error::InvalidConfig(format!(
                "no (N_alpha, N_beta) split for N={n_electrons}, MS2={ms2}"
            )));
        }
        Ok(Self::from_counts(((n + m) / 2) as usize, ((n - m) / 2) as usize))
    }
}

/// Remove the alpha-parity qubit (n/2 - 1) and total-parity qubit (n - 1)
/// from a parity-mapped operator by substituting their conserved Z
/// eigenvalues. The result acts on n - 2 qubits.
pub fn two_qubit_reduction(qop: &QubitOperator, sector: ReductionSector) -> Result<QubitOperator> {
    let n = qop.n_qubits();
    if n < 2 || n % 2 != 0 {
        return Err(Error::ReductionShape { n_qubits: n });
    }
    let alpha_qubit = n / 2 - 1;
    let total_qubit = n - 1;
    let alpha_value = sector.alpha.sign();
    let total_value = sector.alpha.sign() * sector.beta.sign();

    let mut out = QubitOperator::zero(n - 2);
    for (word, coeff) in qop.terms() {
        let mut factor = 1.0;
        for (qubit, value) in [(alpha_qubit, alpha_value), (total_qubit, total_value)] {
            match word.letter(qubit) {
                Pauli::I => {}
                Pauli::Z => factor *= value,
                p => {
                    return Err(Error::SymmetryViolation { qubit, letter: p.as_char() });
                }
            }
        }
        let letters: Vec<Pauli> = word
            .letters()
            .iter()
            .enumerate()
            .filter(|(q, _)| *q != alpha_qubit && *q != total_qubit)
            .map(|(_, &p)| p)
            .collect();
        out.add_term(crate::pauli::PauliTerm::new(
            coeff * factor,
            PauliWord::from_letters(letters),
        ))?;
    }
    Ok(out.simplify(DEFAULT_SIMPLIFY_TOL))
}

/// Parse FCIDUMP text: a `&FCI ... &END` namelist header followed by
/// `value i j k l` records with 1-based indices in chemists' order.
/// Zero indices mark one-body (k=l=0) and scalar-shift (all zero) records;
/// orbital-energy records (j=k=l=0) are ignored.
pub fn parse_fcidump(text: &str) -> Result<FermionIntegrals> {
    let mut lines = text.lines().enumerate();

    // header: everything from &FCI up to &END or a bare "/"
    let mut header = String::new();
    let mut found_end = false;
    for (lineno, line) in lines.by_ref() {
        let trimmed = line.trim();
        if header.is_empty() && trimmed.is_empty() {
            continue;
        }
        if header.is_empty() && !trimmed.to_ascii_uppercase().starts_with("&FCI") {
            return Err(Error::FcidumpParse {
                line: lineno + 1,
                message: "expected &FCI namelist header".to_string(),
            });
        }
        header.push(' ');
        header.push_str(trimmed);
        let upper = trimmed.to_ascii_uppercase();
        if upper.contains("&END") || upper.ends_with('/') || upper == "/" {
            found_end = true;
            break;
        }
    }
    if !found_end {
        return Err(Error::FcidumpParse {
            line: 0,
            message: "unterminated namelist header (no &END or /)".to_string(),
        });
    }

    let header = header.to_ascii_uppercase();
    let header = header.replace("&FCI", " ").replace("&END", " ").replace('/', " ");
    let mut norb: Option<usize> = None;
    let mut nelec: usize = 0;
    let mut ms2: i32 = 0;
    for token in header.split(|c: char| c.is_whitespace() || c == ',') {
        if let Some((key, value)) = token.split_once('=') {
            match key.trim() {
                "NORB" => {
                    norb = Some(value.trim().parse().map_err(|_| Error::FcidumpParse {
                        line: 1,
                        message: format!("bad NORB value '{value}'"),
                    })?)
                }
                "NELEC" => {
                    nelec = value.trim().parse().map_err(|_| Error::FcidumpParse {
                        line: 1,
                        message: format!("bad NELEC value '{value}'"),
                    })?
                }
                "MS2" => {
                    ms2 = value.trim().parse().map_err(|_| Error::FcidumpParse {
                        line: 1,
                        message: format!("bad MS2 value '{value}'"),
                    })?
                }
                _ => {}
            }
        }
    }
    let norb = norb.ok_or(Error::FcidumpParse {
        line: 1,
        message: "header is missing NORB".to_string(),
    })?;

    let mut ints = FermionIntegrals::new(norb, nelec, ms2, 0.0);

    for (lineno, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::FcidumpParse {
                line: lineno + 1,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let value: f64 = fields[0].parse().map_err(|_| Error::FcidumpParse {
            line: lineno + 1,
            message: format!("bad value '{}'", fields[0]),
        })?;
        let mut idx = [0usize; 4];
        for (slot, field) in idx.iter_mut().zip(&fields[1..]) {
            *slot = field.parse().map_err(|_| Error::FcidumpParse {
                line: lineno + 1,
                message: format!("bad index '{field}'"),
            })?;
        }
        let [i, j, k, l] = idx;
        let bounds = |v: usize| -> Result<usize> {
            if v == 0 || v > norb {
                Err(Error::FcidumpParse {
                    line: lineno + 1,
                    message: format!("index {v} out of range 1..={norb}"),
                })
            } else {
                Ok(v - 1)
            }
        };
        match (i, j, k, l) {
            (0, 0, 0, 0) => ints.e0 = value,
            (_, 0, 0, 0) => {
                // orbital-energy record; not used
                bounds(i)?;
            }
            (_, _, 0, 0) => {
                ints.set_one_body(bounds(i)?, bounds(j)?, value)?;
            }
            (_, _, _, 0) | (_, 0, _, _) | (0, _, _, _) | (_, _, 0, _) => {
                return Err(Error::FcidumpParse {
                    line: lineno + 1,
                    message: "mixed zero and nonzero indices".to_string(),
                });
            }
            _ => {
                ints.set_two_body(bounds(i)?, bounds(j)?, bounds(k)?, bounds(l)?, value)?;
            }
        }
    }
    Ok(ints)
}
