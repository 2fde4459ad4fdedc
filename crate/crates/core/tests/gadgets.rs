use fitgadget::catalog::{builtin, SMALL_CATALOG};
use fitgadget::gadget::*;
use fitgadget::structure::upper_fitting_series;
use proptest::prelude::*;
use std::sync::OnceLock;

fn s4() -> &'static GadgetContext {
    static CTX: OnceLock<GadgetContext> = OnceLock::new();
    CTX.get_or_init(|| GadgetContext::prepare(&builtin("S4").unwrap()).unwrap())
}

#[test]
fn contexts_on_catalog() {
    for name in SMALL_CATALOG.iter().copied().chain(["asl23"]) {
        let g = builtin(name).unwrap();
        let d = upper_fitting_series(&g).unwrap().fitting_length;
        match GadgetContext::prepare(&g) {
            Ok(ctx) => {
                assert!(d >= 3, "{name}");
                assert_eq!(ctx.d, d, "{name}");
                ctx.check_invariants().unwrap();
                assert!(ctx.verify_normal_closures().passed, "{name}");
                assert!(ctx.verify_phi_bijective().passed, "{name}");
                assert!(ctx.verify_qstar1_cosets().passed, "{name}");
                // h_α ∈ U_α ∖ U_{α−1}
                for alpha in 1..=ctx.d {
                    let h = ctx.h_elem(alpha);
                    assert!(ctx.u(alpha).set().contains(h) && !ctx.u(alpha - 1).set().contains(h));
                }
            }
            Err(GadgetError::FittingLengthTooSmall { d: got }) => assert_eq!((got, d < 3), (d, true), "{name}"),
            Err(e) => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn fingerprint_is_stable() {
    let a = GadgetContext::prepare(&builtin("C2xS4").unwrap()).unwrap();
    let b = GadgetContext::prepare(&builtin("C2xS4").unwrap()).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_ne!(a.fingerprint(), s4().fingerprint());
}

#[test]
fn larger_catalog_gadgets() {
    for name in ["C2xS4", "C3xS4"] {
        let ctx = GadgetContext::prepare(&builtin(name).unwrap()).unwrap();
        for alpha in 1..ctx.d {
            for (kind, m) in [(GadgetKind::And, 1), (GadgetKind::And, 3), (GadgetKind::Sat, 1)] {
                let f = ctx.build(kind, alpha, m).unwrap();
                let mode = VerifyMode::Auto { budget: 200_000, seed: DEFAULT_SEED, trials_per_class: 200 };
                let r = ctx.verify_gadget(&f, &mode).unwrap();
                assert!(r.passed, "{name} {kind:?} α={alpha} m={m}: {r:?}");
            }
        }
    }
}

#[test]
fn sat_gadget_with_many_clauses_is_sampled() {
    let ctx = s4();
    let f = ctx.build(GadgetKind::Sat, 1, 4).unwrap();
    assert_eq!(f.polynomial.var_arity(), 12);
    let r = ctx.verify_gadget(&f, &VerifyMode::default()).unwrap();
    assert!(r.passed && r.mode == "sampled", "{r:?}");
    assert_eq!(r.classes, Some(5));
}

#[test]
fn empty_arity_is_refused() {
    for kind in [GadgetKind::And, GadgetKind::Sat] {
        assert!(matches!(s4().build(kind, 1, 0), Err(GadgetError::EmptyArity)));
    }
    assert!(matches!(s4().build(GadgetKind::And, 3, 1), Err(GadgetError::LevelOutOfRange { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn declared_length_matches_dag(m in 1usize..40, alpha in 1usize..3, sat in any::<bool>()) {
        let kind = if sat { GadgetKind::Sat } else { GadgetKind::And };
        let f = s4().build(kind, alpha, m).unwrap();
        prop_assert_eq!(f.polynomial.flat_length(), f.declared_flat_length.clone());
        prop_assert_eq!(f.polynomial.var_arity(), if sat { 3 * m } else { m });
    }

    #[test]
    fn split_arity_covers(m in 1usize..5000, e in 1usize..4) {
        let (k, l) = split_arity(m, e);
        prop_assert!(k * l >= m);
        prop_assert!(k.pow(e as u32) >= m);
        prop_assert!(k == 1 || (k - 1).pow(e as u32) < m);
    }

    #[test]
    fn gadget_contract_on_random_assignments(seed in any::<u64>(), m in 1usize..6) {
        let ctx = s4();
        let f = ctx.build(GadgetKind::And, 1, m).unwrap();
        let r = ctx.verify_gadget(&f, &VerifyMode::Sampled { seed, trials_per_class: 20 }).unwrap();
        prop_assert!(r.passed);
    }
}
