use fitgadget::catalog::builtin;
use fitgadget::identities::IdentityContext;
use fitgadget::structure::{all_normal_subgroups, DEFAULT_LATTICE_CAP};
use proptest::prelude::*;

#[test]
fn exhaustive_on_small_groups() {
    for name in ["S3", "D4", "A4", "C2xS3"] {
        let g = builtin(name).unwrap();
        let lattice = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        let ctx = IdentityContext::new(&g, &lattice, 4);
        for t in ctx.exhaustive(2) {
            assert!(t.passed(), "{name}: {t:?}");
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    let g = builtin("S4").unwrap();
    let lattice = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
    let ctx = IdentityContext::new(&g, &lattice, 3);
    assert_eq!(ctx.sampled(5, 2000), ctx.sampled(5, 2000));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_on_catalog(seed in any::<u64>(), which in 0usize..5) {
        let name = ["S4", "C2xS4", "S3xS3", "remark72", "D15"][which];
        let g = builtin(name).unwrap();
        let lattice = all_normal_subgroups(&g, DEFAULT_LATTICE_CAP).unwrap();
        let ctx = IdentityContext::new(&g, &lattice, 3);
        for t in ctx.sampled(seed, 500) {
            prop_assert!(t.passed(), "{}: {:?}", name, t);
        }
    }
}
