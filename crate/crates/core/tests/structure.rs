use fitgadget::catalog::{builtin, SMALL_CATALOG};
use fitgadget::group::{FiniteGroup, PermSpec};
use fitgadget::structure::*;
use fitgadget::Elem;
use proptest::prelude::*;

fn embed(set: &ElemSet, map: &[Elem], universe: usize) -> ElemSet {
    ElemSet::from_elems(universe, set.iter().map(|x| map[x.index()]))
}

/// `U_i(N) = U_i(G) ∩ N` for every normal `N`, `FitL(N) ≤ i ⇔ N ≤ U_i`, and
/// the level of `g` is the Fitting length of its normal closure.
fn check_compatibility(g: &FiniteGroup) {
    let series = upper_fitting_series(g).unwrap();
    let d = series.fitting_length;
    let lattice = all_normal_subgroups(g, DEFAULT_LATTICE_CAP).unwrap();
    for n in &lattice {
        let (sub, map) = g.subgroup(n.set()).unwrap();
        let own = upper_fitting_series(&sub).unwrap();
        for i in 0..=d {
            let ui = series.term(i.min(d)).set();
            let own_i = embed(own.term(i.min(own.fitting_length)).set(), &map, g.order());
            assert_eq!(own_i, ui.intersection(n.set()), "U_{i} of a normal subgroup");
            assert_eq!(own.fitting_length <= i, n.set().is_subset(ui));
        }
    }
    for x in g.elements() {
        let closure = normal_closure(g, &ElemSet::from_elems(g.order(), [x]));
        let level = fitting_length_of(g, closure.set()).unwrap();
        assert_eq!(level, series.level_of(&ElemSet::from_elems(g.order(), [x])), "element {x}");
    }
}

#[test]
fn baer_matches_lattice_on_catalog() {
    for name in SMALL_CATALOG {
        let g = builtin(name).unwrap();
        let lattice = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        let omega = compute_omega_with_lattice(&g, &lattice).unwrap();
        let baer = fitting_subgroup(&g, &omega).unwrap();
        assert_eq!(baer.set(), &fitting_by_lattice(&g, &lattice), "{name}");
        verify_omega(&g, &lattice, omega.omega).unwrap();
    }
}

#[test]
fn series_is_compatible_with_normal_subgroups() {
    for name in ["S3", "S4", "A4", "D4", "D15", "C2xS4", "S3xS3", "remark72"] {
        check_compatibility(&builtin(name).unwrap());
    }
}

#[test]
fn fitting_lengths_of_catalog() {
    let expect = [("C1", 0), ("C6", 1), ("D4", 1), ("S3", 2), ("D15", 2), ("A4", 2), ("S4", 3), ("C3xS4", 3), ("remark72", 2)];
    for (name, d) in expect {
        let s = upper_fitting_series(&builtin(name).unwrap()).unwrap();
        assert_eq!(s.fitting_length, d, "{name}");
    }
}

#[test]
fn quotient_omega_is_local() {
    // each step uses the ω of its own quotient, which still satisfies the
    // defining conditions there
    let g = builtin("S4").unwrap();
    let series = upper_fitting_series(&g).unwrap();
    for i in 0..series.fitting_length {
        let (q, _) = g.quotient(series.term(i)).unwrap();
        let lattice = all_normal_subgroups(&q, DEFAULT_LATTICE_CAP).unwrap();
        let w = compute_omega_with_lattice(&q, &lattice).unwrap();
        verify_omega(&q, &lattice, w.omega).unwrap();
    }
}

fn random_perm_group(degree: usize, gens: Vec<Vec<usize>>) -> FiniteGroup {
    let to_cycles = |img: &[usize]| -> Vec<Vec<usize>> {
        let mut seen = vec![false; img.len()];
        let mut cycles = Vec::new();
        for s in 0..img.len() {
            if seen[s] || img[s] == s {
                continue;
            }
            let mut c = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                c.push(x + 1);
                x = img[x];
            }
            cycles.push(c);
        }
        cycles
    };
    let spec = PermSpec { degree, generators: gens.iter().map(|g| to_cycles(g)).collect() };
    FiniteGroup::from_permutations(&spec, 1000).unwrap()
}

fn perm(degree: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..degree).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_permutation_groups(gens in prop::collection::vec(perm(5), 1..3)) {
        let g = random_perm_group(5, gens);
        let lattice = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        let omega = compute_omega_with_lattice(&g, &lattice).unwrap();
        let baer = fitting_subgroup(&g, &omega).unwrap();
        let oracle = fitting_by_lattice(&g, &lattice);
        // Baer's set is a subgroup in every finite group
        prop_assert_eq!(baer.set(), &oracle);
        if upper_fitting_series(&g).is_ok() {
            check_compatibility(&g);
        }
    }
}
