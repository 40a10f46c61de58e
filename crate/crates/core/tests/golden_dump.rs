//! Golden-file checks of the textual operator dump:
//! one term per line, `<re> <im> <letters>`, lexicographic by word.

mod common;

use common::read_fixture;
use spvqe_core::{
    build_hamiltonian, jordan_wigner, number_operator, parity_map, parse_fcidump,
    total_spin_operator,
};

#[test]
fn number_operator_dump_is_stable() {
    let op = jordan_wigner(&number_operator(4));
    assert_eq!(op.dump(), include_str!("golden/number_4modes_jw.txt"));
}

#[test]
fn toy_hamiltonian_dump_is_stable() {
    let ints = parse_fcidump(&read_fixture("toy_he.fcidump")).unwrap();
    let op = parity_map(&build_hamiltonian(&ints).unwrap());
    assert_eq!(op.dump(), include_str!("golden/toy_he_parity.txt"));
}

#[test]
fn spin_squared_dump_is_stable() {
    let op = jordan_wigner(&total_spin_operator(1));
    assert_eq!(op.dump(), include_str!("golden/spin_squared_1orbital_jw.txt"));
}
