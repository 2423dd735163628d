use std::collections::BTreeSet;

use proptest::prelude::*;

use dlseries::charsheaf::{frobenius_act, little_groups, SheafParam};
use dlseries::endoscopy::stable_parameters;
use dlseries::oracle::{census, MatrixFamily, MatrixGroupSpec};
use dlseries::root_datum::{BasedAutomorphism, Family, FrobeniusTwist, Isogeny, RootDatum};
use dlseries::sweep::params_with_denominator;
use dlseries::weyl::{ActingGroup, ComponentAction, ExtendedWeylGroup, WeylGroup, DEFAULT_CAP};
use dlseries::Exec;

const TYPES: [(Family, usize); 8] = [
    (Family::A, 1),
    (Family::A, 2),
    (Family::A, 3),
    (Family::B, 2),
    (Family::B, 3),
    (Family::C, 3),
    (Family::D, 4),
    (Family::G, 2),
];

fn datum_strategy() -> impl Strategy<Value = RootDatum> {
    (0..TYPES.len(), prop_oneof![Just(Isogeny::SimplyConnected), Just(Isogeny::Adjoint)])
        .prop_map(|(k, iso)| RootDatum::named(TYPES[k].0, TYPES[k].1, iso).unwrap())
}

fn small_datum_strategy() -> impl Strategy<Value = RootDatum> {
    prop_oneof![
        (0..5usize, prop_oneof![Just(Isogeny::SimplyConnected), Just(Isogeny::Adjoint)]).prop_map(|(k, iso)| {
            let (f, r) = [(Family::A, 1), (Family::A, 2), (Family::A, 3), (Family::B, 2), (Family::G, 2)][k];
            RootDatum::named(f, r, iso).unwrap()
        }),
        (2..4usize).prop_map(|n| RootDatum::gl(n).unwrap()),
    ]
}

/// A random parameter of the given rank with denominator dividing `d`.
fn param_strategy(rank: usize) -> impl Strategy<Value = SheafParam> {
    (1i64..13).prop_flat_map(move |d| proptest::collection::vec(0..d, rank).prop_map(move |num| SheafParam::from_parts(num, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn named_data_validate_and_dualize(d in datum_strategy()) {
        prop_assert!(d.validate().is_empty());
        prop_assert_eq!(d.dual().dual(), d.clone());
        prop_assert!(d.dual().validate().is_empty());
    }

    #[test]
    fn regular_embeddings_have_connected_center(d in datum_strategy()) {
        let emb = d.regular_embedding().unwrap();
        prop_assert!(emb.check().is_ok());
        prop_assert!(emb.big.has_connected_center());
        prop_assert!(emb.big.validate().is_empty());
    }

    #[test]
    fn length_is_inverse_invariant(d in datum_strategy(), seed in any::<u64>()) {
        let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
        let a = (seed % w.order() as u64) as usize;
        prop_assert_eq!(w.length(a), w.length(w.inv(a)));
        prop_assert_eq!(w.length(a) == 0, a == w.identity());
        prop_assert_eq!(w.reduced_word(a).len(), w.length(a));
    }

    #[test]
    fn little_group_factorization(d in small_datum_strategy(), seed in any::<u64>()) {
        let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
        let l = {
            let den = (seed % 12 + 1) as i64;
            let num = (0..d.rank()).map(|i| ((seed >> (8 * i + 4)) as i64).rem_euclid(den)).collect();
            SheafParam::from_parts(num, den)
        };
        let lg = little_groups(&w, &l).unwrap();
        // Φ_L closed under negation and its own reflections
        let phi: BTreeSet<usize> = lg.phi_l.iter().copied().collect();
        for &a in &phi {
            prop_assert!(phi.contains(&d.negative(a)));
            for &b in &phi {
                let image = d.reflection_matrix(a).mul_vec(d.root(b));
                prop_assert!(d.index_of_root(&image).is_some_and(|j| phi.contains(&j)));
            }
        }
        // W_L = W_L°·Ω_L uniquely
        let products: BTreeSet<usize> = lg.w_l0.group.iter()
            .flat_map(|u| lg.omega.iter().map(move |o| (u, o)))
            .map(|(u, o)| w.mul(u, o))
            .collect();
        prop_assert_eq!(products.len(), lg.w_l0.group.len() * lg.omega.len());
        prop_assert_eq!(products.into_iter().collect::<Vec<_>>(), lg.w_l.elements.clone());
        // orbit-stabilizer
        let orbit: BTreeSet<SheafParam> = (0..w.order()).map(|a| l.act(w.matrix(a))).collect();
        prop_assert_eq!(orbit.len() * lg.w_l.len(), w.order());
        if d.has_connected_center() {
            prop_assert_eq!(lg.omega.len(), 1);
        }
    }

    #[test]
    fn split_stability_is_divisibility(rank in 1usize..4, q in prop_oneof![Just(2u64), Just(3), Just(4), Just(5), Just(7)], l in param_strategy(3)) {
        let d = RootDatum::gl(rank).unwrap();
        let l = SheafParam::from_parts(l.numerators()[..rank].to_vec(), l.denominator());
        let eps = FrobeniusTwist::split(&d, q).unwrap();
        prop_assert_eq!(frobenius_act(&eps, &l) == l, (q as i64 - 1) % l.denominator() == 0);
    }

    #[test]
    fn weyl_action_preserves_denominator(d in small_datum_strategy(), l in param_strategy(4), seed in any::<u64>()) {
        let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
        let l = SheafParam::from_parts(l.numerators()[..d.rank()].to_vec(), l.denominator());
        let a = (seed % w.order() as u64) as usize;
        let m = l.act(w.matrix(a));
        prop_assert_eq!(m.denominator(), l.denominator());
        prop_assert_eq!(m.act(w.matrix(w.inv(a))), l);
    }
}

#[test]
fn extended_splitting_is_exact() {
    for iso in [Isogeny::SimplyConnected, Isogeny::Adjoint] {
        let d = RootDatum::named(Family::A, 2, iso).unwrap();
        let flip = BasedAutomorphism::from_simple_permutation(&d, &[1, 0]).unwrap();
        let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
        let ext = ExtendedWeylGroup::extend(w, ComponentAction::order_two(&d, flip).unwrap()).unwrap();
        let table = ext.components().table.clone();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(ext.mul(ext.section(a), ext.section(b)), ext.section(table[a][b]));
            }
        }
        assert_eq!(ext.order(), 12);
    }
}

#[test]
fn census_sizes_are_consistent() {
    for family in [MatrixFamily::Gl, MatrixFamily::Sl, MatrixFamily::Pgl] {
        for (n, q) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3)] {
            let c = census(MatrixGroupSpec { family, n, q }, Exec::default()).unwrap();
            let total: u64 = c.classes.iter().map(|k| k.size).sum();
            assert_eq!(total, c.semisimple_elements, "{family} {n} {q}");
            for k in &c.classes {
                assert_eq!(c.group_order % k.size, 0);
            }
            let bundled: usize = c.bundles.iter().map(|b| b.classes.len()).sum();
            assert_eq!(bundled, c.classes.len());
        }
    }
}

#[test]
fn stable_parameters_modes_agree() {
    let d = RootDatum::named(Family::B, 2, Isogeny::Adjoint).unwrap();
    let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
    let eps = FrobeniusTwist::split(&d, 5).unwrap();
    let a = stable_parameters(&w, &eps, 12, Exec::Sequential);
    let b = stable_parameters(&w, &eps, 12, Exec::Parallel);
    assert_eq!(a.representatives, b.representatives);
    assert_eq!(a.orbit_sizes, b.orbit_sizes);
}

#[test]
fn orbit_sizes_cover_primitive_parameters() {
    // every ε-stable orbit of denominator d is counted once with its full size
    let d = RootDatum::named(Family::A, 1, Isogeny::SimplyConnected).unwrap();
    let w = WeylGroup::generate(&d, DEFAULT_CAP).unwrap();
    let eps = FrobeniusTwist::split(&d, 5).unwrap();
    let s = stable_parameters(&w, &eps, 12, Exec::default());
    for den in [1, 2, 3, 4, 6] {
        let direct = params_with_denominator(1, den)
            .into_iter()
            .filter(|l| (0..w.order()).any(|a| frobenius_act(&eps, l).act(w.matrix(a)) == *l))
            .count();
        let counted: usize = s
            .representatives
            .iter()
            .zip(&s.orbit_sizes)
            .filter(|(l, _)| l.denominator() == den)
            .map(|(_, n)| n)
            .sum();
        assert_eq!(direct, counted, "denominator {den}");
    }
}
