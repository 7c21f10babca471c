mod common;

use std::collections::HashSet;

use sixsquare::design::ResolvableDesign;
use sixsquare::efficiency::{a_value, square_lattice_bound};
use sixsquare::families::{
    catalog, delta, delta_from_squares, galaxy_replicate, gamma, published_latin_squares, Variant,
};
use sixsquare::iso::{are_isomorphic, automorphism_order, is_sylvester_design, same_spectrum};
use sixsquare::sylvester::{common_factor, enumerate_one_factorizations, sylvester_graph};

#[test]
fn dropping_columns_from_rc_gives_r() {
    for r in 2..=8 {
        let rc = gamma(r, Variant::RC).unwrap();
        assert_eq!(rc.without_replicate(0).replicates(), gamma(r - 1, Variant::R).unwrap().replicates());
        let rc = delta(r, Variant::RC).unwrap();
        assert_eq!(rc.without_replicate(0).replicates(), delta(r - 1, Variant::R).unwrap().replicates());
    }
}

#[test]
fn first_replicates_of_rc_match_c() {
    for r in 3..=8 {
        let rc = gamma(r, Variant::RC).unwrap();
        let c = gamma(r - 1, Variant::C).unwrap();
        let mut keep = vec![0];
        keep.extend(2..r);
        assert_eq!(rc.select_replicates(&keep).replicates(), c.replicates());
    }
}

#[test]
fn rows_and_columns_variants_share_spectrum() {
    for r in 3..=6 {
        let (a, b) = (gamma(r, Variant::R).unwrap(), gamma(r, Variant::C).unwrap());
        assert!(same_spectrum(&a, &b).unwrap(), "gamma r={r}");
    }
}

#[test]
fn rc_beats_c_beats_plain() {
    for r in 3..=6 {
        for build in [gamma, delta] {
            let rc = a_value(&build(r, Variant::RC).unwrap()).unwrap();
            let c = a_value(&build(r, Variant::C).unwrap()).unwrap();
            let plain = a_value(&build(r, Variant::Plain).unwrap()).unwrap();
            assert!(rc >= c && c >= plain, "r={r}: {rc} {c} {plain}");
        }
    }
}

#[test]
fn lattice_bound_dominates_catalog() {
    for entry in catalog() {
        let r = entry.design.r();
        let Ok(bound) = square_lattice_bound(6, r) else { continue };
        let a = a_value(&entry.design).unwrap();
        assert!(bound >= a, "{}: {a} above bound {bound}", entry.name);
    }
}

#[test]
fn deletion_from_gamma_rc_stays_in_family() {
    for r in 3..=8 {
        let d = gamma(r, Variant::RC).unwrap();
        let mut targets = vec![a_value(&gamma(r - 1, Variant::RC).unwrap()).unwrap()];
        for v in [Variant::R, Variant::C] {
            if let Ok(g) = gamma(r - 1, v) {
                targets.push(a_value(&g).unwrap());
            }
        }
        for i in 0..r {
            let a = a_value(&d.without_replicate(i)).unwrap();
            assert!(targets.contains(&a), "r={r}, replicate {i}: {a}");
        }
    }
}

#[test]
fn galaxy_pairs_concur_at_most_twice() {
    let g = sylvester_graph();
    for a in 1..=6u8 {
        for b in a + 1..=6 {
            let d = ResolvableDesign::from_parts(36, 6, vec![galaxy_replicate(a), galaxy_replicate(b)], "pair");
            let c = d.concurrence_matrix().unwrap();
            let mut twos = 0;
            for x in 0..36 {
                for y in x + 1..36 {
                    assert!(c.get(x, y) <= 2);
                    if c.get(x, y) == 2 {
                        assert!(g.has_edge(x, y), "columns {a},{b}: pair {x},{y} is not an edge");
                        twos += 1;
                    }
                }
            }
            assert!(twos > 0, "columns {a},{b}");
        }
    }
}

#[test]
fn common_factor_is_a_bijection() {
    let all = enumerate_one_factorizations();
    let mut seen = HashSet::new();
    for i in 0..6 {
        for j in i + 1..6 {
            assert!(seen.insert(common_factor(&all[i], &all[j]).unwrap()));
        }
    }
    assert_eq!(seen.len(), 15);
    assert!(common_factor(&all[0], &all[0]).is_err());
}

#[test]
fn repeated_galaxy_is_not_sylvester() {
    let base = gamma(7, Variant::RC).unwrap();
    let extra = ResolvableDesign::from_parts(36, 6, vec![galaxy_replicate(1)], "extra");
    let d = base.concat(&extra);
    assert_eq!(d.r(), 8);
    assert!(!is_sylvester_design(&d).unwrap().is_sylvester());
}

#[test]
fn latin_subsets_agree_with_oracle() {
    let squares = published_latin_squares();
    for r in [2, 3] {
        for (subset, a) in sixsquare::families::latin_subset_a_values(r) {
            let chosen: Vec<_> = subset.iter().map(|&i| squares[i]).collect();
            let d = delta_from_squares(&chosen, Variant::Plain, "subset");
            assert_eq!(common::a_oracle(&d), Some(a), "{subset:?}");
        }
    }
}

#[test]
fn isomorphism_is_an_equivalence_on_samples() {
    let designs = [
        gamma(4, Variant::R).unwrap(),
        gamma(4, Variant::C).unwrap(),
        delta(4, Variant::R).unwrap(),
        delta(4, Variant::C).unwrap(),
        gamma(2, Variant::R).unwrap(),
        gamma(2, Variant::C).unwrap(),
    ];
    for a in &designs {
        assert!(are_isomorphic(a, a));
        for b in &designs {
            assert_eq!(are_isomorphic(a, b), are_isomorphic(b, a), "{} {}", a.label(), b.label());
            if are_isomorphic(a, b) {
                assert_eq!(automorphism_order(a), automorphism_order(b));
                for c in &designs {
                    if are_isomorphic(b, c) {
                        assert!(are_isomorphic(a, c));
                    }
                }
            }
        }
    }
}

#[test]
fn same_spectrum_does_not_imply_isomorphic() {
    let (g, d) = (gamma(6, Variant::Plain).unwrap(), delta(6, Variant::Plain).unwrap());
    assert!(same_spectrum(&g, &d).unwrap());
    assert!(!are_isomorphic(&g, &d));
}

#[test]
fn eight_replicate_designs_sit_below_reported_bound() {
    for entry in catalog().iter().filter(|e| e.design.r() == 8) {
        let a = sixsquare::exact::to_f64(&a_value(&entry.design).unwrap());
        assert!(a < sixsquare::efficiency::REPORTED_UPPER_BOUND_R8, "{}: {a}", entry.name);
    }
}
