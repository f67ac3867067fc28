#[path = "support/props.rs"]
mod props;

use proptest::prelude::*;

use props::*;

proptest! {
    #[test]
    fn convergents_have_unit_determinant((a0, qs) in quotients()) {
        convergent_determinant(a0, &qs)?;
    }

    #[test]
    fn sobolev_ratio_is_scale_invariant(
        k in any::<u8>(), n in 1u32..20, seed in any::<u64>(), lambda in 1e-3f64..1e3,
    ) {
        sobolev_scale_invariance(domain_from(k, n), seed, lambda)?;
    }

    #[test]
    fn floer_energy_dominates_l2(
        alpha in 0.05f64..0.95, n in 1u32..6, amp in 0.0f64..0.3, seed in any::<u64>(),
    ) {
        energy_monotonicity(alpha, n, amp, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn time_one_map_preserves_area(alpha in 0.05f64..0.95, eps in 0.0f64..0.05) {
        area_preservation(alpha, eps)?;
    }

    #[test]
    fn solver_keeps_boundary_winding(
        alpha in 0.05f64..0.95, eps in 0.0f64..0.01, n in 1u32..5, seed in any::<u64>(),
    ) {
        winding_conservation(alpha, eps, n, seed)?;
    }

    #[test]
    fn csv_outputs_are_deterministic(
        seed in any::<u64>(), r in 0.0f64..0.95, t in 0.0f64..6.28,
    ) {
        csv_determinism(seed, r * t.cos(), r * t.sin())?;
    }
}
