use num_rational::Ratio;
use proptest::prelude::*;

use prodset_core::group::{enumerate_ball, GroupDescriptor, GroupElement};
use prodset_core::setcalc::{
    difference_set, interval_sum, is_right_thick, periodic_product, product_set, syndeticity_index, FiniteWindowSet,
    PeriodicIntSet, Verdict,
};

fn periodic() -> impl Strategy<Value = PeriodicIntSet> {
    (1u64..=24).prop_flat_map(|m| {
        proptest::collection::btree_set(0..m, 0..=m as usize)
            .prop_map(move |r| PeriodicIntSet::new(m, r).unwrap())
    })
}

fn nonempty_periodic() -> impl Strategy<Value = PeriodicIntSet> {
    periodic().prop_filter("nonempty", |p| !p.is_empty())
}

/// Sumset membership by brute force on one common period.
fn brute_sum_contains(a: &PeriodicIntSet, b: &PeriodicIntSet, n: i64) -> bool {
    let m = (a.modulus() * b.modulus()) as i64;
    (0..m).any(|x| a.contains(x) && b.contains(n - x))
}

proptest! {
    #[test]
    fn sumset_matches_brute_force(a in periodic(), b in periodic()) {
        let s = periodic_product(&a, &b);
        for n in 0..(a.modulus() * b.modulus()) as i64 {
            prop_assert_eq!(s.contains(n), brute_sum_contains(&a, &b, n), "n = {}", n);
        }
        prop_assert_eq!(s, periodic_product(&b, &a));
    }

    #[test]
    fn pigeonhole_sums_cover_everything(a in nonempty_periodic(), b in nonempty_periodic()) {
        if a.density() + b.density() > Ratio::from_integer(1) {
            prop_assert!(periodic_product(&a, &b).is_everything());
        }
    }

    #[test]
    fn interval_sums_reach_full_density(a in nonempty_periodic()) {
        let m = a.modulus();
        let j = (0..=m).find(|&j| interval_sum(&a, j).is_everything());
        prop_assert!(j.is_some());
        // the longest gap between residues bounds the required j
        let res: Vec<u64> = a.residues().collect();
        let gap = (0..res.len())
            .map(|i| (res[(i + 1) % res.len()] + m - res[i] - 1) % m)
            .max()
            .unwrap_or(0);
        prop_assert_eq!(j.unwrap(), gap);
        // densities along the way never decrease
        let d: Vec<_> = (0..=m).map(|j| interval_sum(&a, j).density()).collect();
        prop_assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn syndetic_iff_complement_not_thick(a in periodic()) {
        let index = syndeticity_index(&a, &[], &[], a.modulus() as usize).index();
        let thick = is_right_thick(&a.complement(), &[], &[]).verdict == Verdict::Witnessed;
        prop_assert_eq!(index.is_some(), !thick);
    }

    #[test]
    fn difference_sums_dominate_density(a in nonempty_periodic(), c in nonempty_periodic()) {
        // nonempty periodic sets are syndetic
        let s = periodic_product(&a.negate(), &c);
        prop_assert!(s.density() >= a.density());
        prop_assert!(s.density() >= c.density());
    }
}

#[test]
fn three_generator_intersection_is_trivial() {
    let f3 = GroupDescriptor::free(3).unwrap();
    // u·v⁻¹ with |u·v⁻¹| ≤ 3 and u, v starting with the same letter reduces
    // after cancelling a common prefix that can be shortened to one letter,
    // so data words of length 4 already give every such element
    let data = enumerate_ball(&f3, 4).unwrap();
    let out = enumerate_ball(&f3, 3).unwrap();
    let diffs: Vec<FiniteWindowSet> = [1, 2, 3]
        .iter()
        .map(|&l| difference_set(&FiniteWindowSet::first_letter(&data, &[l]), &out).unwrap().set)
        .collect();
    let meet = diffs[0].intersection(&diffs[1]).intersection(&diffs[2]);
    assert_eq!(meet.elements(), [f3.identity()]);
    // a wider data window changes nothing
    let wide = enumerate_ball(&f3, 5).unwrap();
    let a5 = difference_set(&FiniteWindowSet::first_letter(&wide, &[1]), &out).unwrap().set;
    assert_eq!(a5.elements(), diffs[0].elements());
    // each difference set is closed under inversion and contains e
    for d in &diffs {
        assert!(d.contains(&f3.identity()));
        assert!(d.elements().iter().all(|g| d.contains(&f3.inv(g))));
    }
}

#[test]
fn paradoxical_cover_and_disjoint_translates() {
    let f2 = GroupDescriptor::free(2).unwrap();
    let w = |s: &str| GroupElement::word(s).unwrap();
    for r in 1..=6 {
        let window = enumerate_ball(&f2, r + 1).unwrap();
        let a = FiniteWindowSet::first_letter(&window, &[1, -1]);
        let f = FiniteWindowSet::new(&window, [w("e"), w("a"), w("A")]).unwrap();
        let target = enumerate_ball(&f2, r).unwrap();
        let fa = product_set(&f, &a, &target).unwrap().set;
        assert_eq!(fa.len(), target.len(), "r = {r}");
    }
    let ball6 = enumerate_ball(&f2, 6).unwrap();
    let big = enumerate_ball(&f2, 11).unwrap();
    let a = FiniteWindowSet::first_letter(&big, &[1, -1]);
    let translates: Vec<FiniteWindowSet> = (1..=5)
        .map(|m| {
            let bm = FiniteWindowSet::new(&big, [w(&"b".repeat(m))]).unwrap();
            product_set(&bm, &a, &ball6).unwrap().set
        })
        .collect();
    for i in 0..5 {
        assert!(!translates[i].is_empty());
        for j in i + 1..5 {
            assert!(translates[i].intersection(&translates[j]).is_empty(), "b^{} and b^{}", i + 1, j + 1);
        }
    }
}
