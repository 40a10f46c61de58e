//! Shared oracles for integration tests.
//!
//! `fock` builds operator matrices directly in the occupation-number basis
//! by acting on kets with fermionic sign rules. It never touches the Pauli
//! or normal-ordering machinery, so it is an independent route against which
//! the mapped operators can be compared entrywise.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use spvqe_core::FermionIntegrals;

pub fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"))
}

pub mod fock {
    use super::*;

    /// Apply a+_p (create = true) or a_p to basis ket `state`.
    /// Returns (sign, new_state) or None when the action annihilates.
    fn ladder(state: usize, p: usize, create: bool) -> Option<(f64, usize)> {
        let occupied = (state >> p) & 1 == 1;
        if create == occupied {
            return None;
        }
        let below = state & ((1usize << p) - 1);
        let sign = if below.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        Some((sign, state ^ (1 << p)))
    }

    /// Dense matrix of sum_t c_t * prod_k ladder_{t,k} over 2^n_modes kets.
    /// Ladder products are listed leftmost-first, i.e. the rightmost acts
    /// first on the ket.
    pub fn ladder_matrix(
        n_modes: usize,
        terms: &[(f64, Vec<(usize, bool)>)],
    ) -> DMatrix<Complex64> {
        let dim = 1usize << n_modes;
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (coeff, ops) in terms {
            for ket in 0..dim {
                let mut sign = 1.0;
                let mut state = ket;
                let mut alive = true;
                for &(mode, create) in ops.iter().rev() {
                    match ladder(state, mode, create) {
                        Some((s, next)) => {
                            sign *= s;
                            state = next;
                        }
                        None => {
                            alive = false;
                            break;
                        }
                    }
                }
                if alive {
                    m[(state, ket)] += Complex64::new(coeff * sign, 0.0);
                }
            }
        }
        m
    }

    /// Molecular Hamiltonian matrix straight from the integrals.
    pub fn hamiltonian_matrix(ints: &FermionIntegrals) -> DMatrix<Complex64> {
        let m = ints.n_spatial();
        let n_modes = 2 * m;
        let mode = |p: usize, sigma: usize| p + sigma * m;
        let mut terms: Vec<(f64, Vec<(usize, bool)>)> = vec![(ints.e0, vec![])];
        for i in 0..m {
            for j in 0..m {
                let v = ints.h(i, j);
                if v == 0.0 {
                    continue;
                }
                for sigma in 0..2 {
                    terms.push((v, vec![(mode(i, sigma), true), (mode(j, sigma), false)]));
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
                                terms.push((
                                    v,
                                    vec![
                                        (mode(i, sigma), true),
                                        (mode(k, tau), true),
                                        (mode(l, tau), false),
                                        (mode(j, sigma), false),
                                    ],
                                ));
                            }
                        }
                    }
                }
            }
        }
        ladder_matrix(n_modes, &terms)
    }

    pub fn number_matrix(n_modes: usize) -> DMatrix<Complex64> {
        let terms: Vec<_> =
            (0..n_modes).map(|p| (1.0, vec![(p, true), (p, false)])).collect();
        ladder_matrix(n_modes, &terms)
    }

    /// S^2 as matrix products: S- S+ + Sz Sz + Sz, with the one-body pieces
    /// built ket-by-ket.
    pub fn spin_squared_matrix(n_spatial: usize) -> DMatrix<Complex64> {
        let m = n_spatial;
        let n_modes = 2 * m;
        let raise: Vec<_> = (0..m).map(|p| (1.0, vec![(p, true), (p + m, false)])).collect();
        let s_plus = ladder_matrix(n_modes, &raise);
        let s_minus = s_plus.adjoint();
        let mut sz_terms = Vec::new();
        for p in 0..m {
            sz_terms.push((0.5, vec![(p, true), (p, false)]));
            sz_terms.push((-0.5, vec![(p + m, true), (p + m, false)]));
        }
        let s_z = ladder_matrix(n_modes, &sz_terms);
        &s_minus * &s_plus + &s_z * &s_z + s_z
    }
}

pub fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Multiset comparison of two eigenvalue lists.
pub fn spectra_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
