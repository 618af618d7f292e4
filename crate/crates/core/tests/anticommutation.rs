use num_complex::Complex64;
use qvqe::encodings::{FermionQubitMapping, MappingScheme};
use qvqe::pauli::PauliSum;

fn max_residual(s: &PauliSum) -> f64 {
    s.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

fn check(scheme: MappingScheme, modes: usize) {
    let m = FermionQubitMapping::new(scheme, modes).unwrap();
    let one = PauliSum::identity(Complex64::new(1.0, 0.0));
    for i in 0..modes {
        let a_i = m.ladder(i, false).unwrap();
        let ad_i = m.ladder(i, true).unwrap();
        assert_eq!(&a_i.adjoint(), ad_i);
        for j in 0..modes {
            let a_j = m.ladder(j, false).unwrap();
            let ad_j = m.ladder(j, true).unwrap();
            let mut mixed = a_i.anticommutator(ad_j);
            if i == j {
                mixed = mixed.sub(&one);
            }
            for (what, r) in [
                ("{a_i, a_j†} − δ", mixed),
                ("{a_i, a_j}", a_i.anticommutator(a_j)),
                ("{a_i†, a_j†}", ad_i.anticommutator(ad_j)),
            ] {
                assert!(max_residual(&r) < 1e-12, "{scheme} M={modes} i={i} j={j}: {what} = {r}");
            }
        }
    }
}

#[test]
fn every_mapping_obeys_car() {
    for modes in 1..=17 {
        for scheme in [
            MappingScheme::JordanWigner,
            MappingScheme::Parity,
            MappingScheme::BravyiKitaevTree,
        ] {
            check(scheme, modes);
        }
    }
    for modes in [1, 2, 4, 8, 16] {
        check(MappingScheme::BravyiKitaev, modes);
    }
}

#[test]
fn bk_rejects_non_powers_of_two() {
    for modes in [3, 5, 6, 12] {
        assert!(FermionQubitMapping::new(MappingScheme::BravyiKitaev, modes).is_err());
        assert!(FermionQubitMapping::new(MappingScheme::BravyiKitaevTree, modes).is_ok());
    }
}
