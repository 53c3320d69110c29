use std::collections::BTreeMap;

use cdglab::algebra::{CdgAlgebra, StrictMorphism};
use cdglab::descriptor::ModuleDesc;
use cdglab::fixtures;
use cdglab::homotopy::{
    barcode_decompose, homotopy_forget_agreement, is_contractible, strict_iso_check, z2_decompose, Barcode, HomComplex,
};
use cdglab::linalg::{Field, Matrix};
use cdglab::module::{check_module_axioms, reduce_mod_epsilon, restrict_scalars, CdgModule};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Rationals), Just(Field::Prime(5)), Just(Field::Prime(3))]
}

/// Interval multiplicities from ranks of powers of d.
fn rank_count(p: &CdgModule) -> Barcode {
    let mut out = Barcode::default();
    let Some((lo, hi)) = p.space().support() else { return out };
    let f = p.field();
    let r = |a: i64, j: i64| -> i64 {
        if j < 0 {
            return 0;
        }
        let mut m = Matrix::identity(f, p.space().dim(a));
        for t in 0..j {
            m = p.d().block(a + t).mul(&m).unwrap();
        }
        m.rank() as i64
    };
    for a in lo..=hi {
        for n in 1..=(hi - a + 1) {
            let mult = r(a, n - 1) - r(a, n) - r(a - 1, n) + r(a - 1, n + 1);
            if mult > 0 {
                out.bars.insert((a, n as usize), mult as usize);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn barcode_matches_rank_count(seed in any::<u64>(), f in field_strategy()) {
        let kc = CdgAlgebra::initial_poly(f);
        let p = fixtures::random_precomplex(&kc, &mut fixtures::rng(seed), 5, 8).unwrap();
        let b = barcode_decompose(&p).unwrap();
        prop_assert_eq!(&b.barcode, &rank_count(&p));
        prop_assert_eq!(b.barcode.weighted_length(), p.space().total_dim());
        prop_assert!(strict_iso_check(&b.canonical, &p, &b.witness));
    }

    #[test]
    fn z2_strings_count_ranks(seed in any::<u64>(), f in field_strategy()) {
        let (m, strings) = fixtures::random_z2_complex(f, &mut fixtures::rng(seed), 6).unwrap();
        let z = z2_decompose(&m).unwrap();
        prop_assert_eq!(z.strings(), strings);
        prop_assert_eq!(z.strings(), m.d().block(0).rank() + m.d().block(1).rank());
        prop_assert!(strict_iso_check(&z.canonical, &m, &z.witness));
    }

    #[test]
    fn hom_differential_squares_to_zero(seed in any::<u64>()) {
        let kc = CdgAlgebra::initial_poly(Field::Rationals);
        let mut r = fixtures::rng(seed);
        let m = fixtures::random_precomplex(&kc, &mut r, 3, 4).unwrap();
        let n = fixtures::random_precomplex(&kc, &mut r, 3, 4).unwrap();
        let mut hc = HomComplex::new(&m, &n).unwrap();
        for j in hc.shift_range() {
            for g in hc.piece_basis(j) {
                prop_assert!(hc.differential(&hc.differential(&g)).is_zero());
            }
        }
    }

    #[test]
    fn descriptors_roundtrip(seed in any::<u64>(), f in field_strategy()) {
        let kc2 = CdgAlgebra::initial_trunc(f, 2).unwrap();
        let p = fixtures::random_precomplex(&kc2, &mut fixtures::rng(seed), 4, 6).unwrap();
        let json = serde_json::to_string(&ModuleDesc::from_module(&p)).unwrap();
        let back: ModuleDesc = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.to_module(f).unwrap(), p);
    }
}

#[test]
fn intervals_contractible_iff_even_over_small_fields() {
    for f in [Field::Rationals, Field::Prime(2), Field::Prime(5)] {
        let kc = CdgAlgebra::initial_poly(f);
        for n in 1..=6 {
            let x = fixtures::interval(&kc, 2, n).unwrap();
            assert_eq!(is_contractible(&x).homotopy.is_some(), n % 2 == 0, "{f:?} n={n}");
        }
    }
}

#[test]
fn forget_agreement_on_seeded_precomplexes() {
    let kc2 = CdgAlgebra::initial_trunc(Field::Rationals, 2).unwrap();
    let mut r = fixtures::rng(5);
    for _ in 0..10 {
        let p = fixtures::random_precomplex(&kc2, &mut r, 4, 6).unwrap();
        let (a, k) = homotopy_forget_agreement(&p);
        assert_eq!(a, k);
    }
}

#[test]
fn liftgoed_hom_dimensions_agree() {
    let f = Field::Rationals;
    let mut r = fixtures::rng(2);
    for _ in 0..3 {
        let (m, n) = fixtures::liftgoed_pair(f, &mut r).unwrap();
        let nb = restrict_scalars(&StrictMorphism::epsilon_quotient(m.algebra()).unwrap(), &n).unwrap();
        let red = reduce_mod_epsilon(&m).unwrap().module;
        assert!(check_module_axioms(&red).passed());
        let mut over_b = HomComplex::new(&m, &nb).unwrap();
        let mut over_a = HomComplex::new(&red, &n).unwrap();
        let mut js: Vec<i64> = over_b.shift_range();
        js.extend(over_a.shift_range());
        js.sort();
        js.dedup();
        let dims: BTreeMap<i64, (usize, usize)> =
            js.iter().map(|&j| (j, (over_b.cohomology(j).dim, over_a.cohomology(j).dim))).collect();
        assert!(dims.values().all(|(a, b)| a == b), "{dims:?}");
    }
}
