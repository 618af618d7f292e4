use std::path::PathBuf;

use num_complex::Complex64;
use qvqe::encodings::{FermionQubitMapping, MappingScheme};
use qvqe::fermion::total_number_operator;
use qvqe::hamio::{hf_reference, parse_fcidump, to_fermion_hamiltonian, MolecularIntegrals};
use qvqe::pauli::PauliSum;
use qvqe::simulator::StateVector;
use qvqe::vqe::{exact_ground_energy, Sector};

const E_RHF_074: f64 = -1.1167593073964255;
const E_FCI: [(&str, f64); 3] = [
    ("0.64", -1.1278421329637456),
    ("0.74", -1.1372838344885023),
    ("0.84", -1.1297025558704243),
];

fn load(bond: &str) -> MolecularIntegrals {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("h2_sto3g_{bond}.fcidump"));
    parse_fcidump(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn qubit_hamiltonian(ints: &MolecularIntegrals, scheme: MappingScheme) -> (FermionQubitMapping, PauliSum) {
    let mapping = FermionQubitMapping::new(scheme, ints.modes()).unwrap();
    let h = mapping.map_sum(&to_fermion_hamiltonian(ints)).unwrap();
    (mapping, h)
}

/// Slater–Condon energy of the closed-shell determinant straight from the
/// spatial integrals.
fn closed_shell_energy(ints: &MolecularIntegrals) -> f64 {
    let occ = ints.nelec / 2;
    let mut e = ints.e_core;
    for i in 0..occ {
        e += 2.0 * ints.h1(i, i);
        for j in 0..occ {
            e += 2.0 * ints.eri(i, i, j, j) - ints.eri(i, j, j, i);
        }
    }
    e
}

#[test]
fn fixture_header_and_symmetry() {
    let ints = load("0.74");
    assert_eq!((ints.norb, ints.nelec, ints.ms2), (2, 2, 0));
    assert_eq!(ints.modes(), 4);
    assert!(ints.e_core > 0.0);
    assert_eq!(ints.eri(0, 1, 0, 1), ints.eri(1, 0, 1, 0));
    assert_eq!(ints.h1(0, 1), ints.h1(1, 0));
}

#[test]
fn hamiltonians_are_hermitian() {
    for (bond, _) in E_FCI {
        for scheme in MappingScheme::ALL {
            let (_, h) = qubit_hamiltonian(&load(bond), scheme);
            assert!(h.is_hermitian(), "{bond} {scheme}");
            assert!(h.iter().all(|(_, c)| c.im.abs() < 1e-12));
        }
    }
}

#[test]
fn hf_energy_cross_checks() {
    for (bond, _) in E_FCI {
        let ints = load(bond);
        let oracle = closed_shell_energy(&ints);
        let occ = hf_reference(ints.nelec, ints.modes()).unwrap();
        let fermionic = to_fermion_hamiltonian(&ints).basis_expectation(&occ).unwrap();
        assert!((fermionic.re - oracle).abs() < 1e-12 && fermionic.im.abs() < 1e-12);
        for scheme in MappingScheme::ALL {
            let (mapping, h) = qubit_hamiltonian(&ints, scheme);
            let state = StateVector::init_basis(4, &mapping.encode(&occ).unwrap()).unwrap();
            let e = state.expectation(&h).unwrap();
            assert!((e - oracle).abs() < 1e-12, "{bond} {scheme}: {e} vs {oracle}");
        }
    }
    assert!((closed_shell_energy(&load("0.74")) - E_RHF_074).abs() < 1e-9);
}

#[test]
fn spectrum_is_mapping_invariant() {
    for (bond, fci) in E_FCI {
        let ints = load(bond);
        let energies: Vec<f64> = MappingScheme::ALL
            .iter()
            .map(|&s| exact_ground_energy(&qubit_hamiltonian(&ints, s).1, 4, None).unwrap())
            .collect();
        for e in &energies {
            assert!((e - energies[0]).abs() < 1e-10);
        }
        assert!((energies[0] - fci).abs() < 1e-9, "{bond}: {} vs {fci}", energies[0]);

        let full = {
            let m = qubit_hamiltonian(&ints, MappingScheme::JordanWigner).1.to_matrix(4).unwrap();
            let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        };
        for scheme in MappingScheme::ALL {
            let m = qubit_hamiltonian(&ints, scheme).1.to_matrix(4).unwrap();
            let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(&full) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn hamiltonian_conserves_particle_number() {
    let ints = load("0.74");
    for scheme in MappingScheme::ALL {
        let (mapping, h) = qubit_hamiltonian(&ints, scheme);
        let n = mapping.map_sum(&total_number_operator(4)).unwrap();
        let c = h.commutator(&n);
        assert!(c.iter().all(|(_, v)| v.norm() < 1e-12), "{scheme}");
    }
}

#[test]
fn sectors_bound_from_above() {
    let ints = load("0.74");
    for scheme in MappingScheme::ALL {
        let (mapping, h) = qubit_hamiltonian(&ints, scheme);
        let full = exact_ground_energy(&h, 4, None).unwrap();
        for nelec in 0..=4 {
            let s = exact_ground_energy(&h, 4, Some(Sector { mapping: &mapping, nelec })).unwrap();
            assert!(s >= full - 1e-12);
        }
        let two = exact_ground_energy(&h, 4, Some(Sector { mapping: &mapping, nelec: 2 })).unwrap();
        assert!((two - full).abs() < 1e-10);
    }
}

#[test]
fn core_energy_only() {
    let ints = MolecularIntegrals::new(2, 2, 0).map(|mut i| {
        i.e_core = 0.75;
        i
    });
    let ints = ints.unwrap();
    let (_, h) = qubit_hamiltonian(&ints, MappingScheme::BravyiKitaev);
    assert_eq!(h.len(), 1);
    assert_eq!(h.coefficient(&"I".parse().unwrap()), Complex64::new(0.75, 0.0));
    assert!((exact_ground_energy(&h, 4, None).unwrap() - 0.75).abs() < 1e-15);
}
