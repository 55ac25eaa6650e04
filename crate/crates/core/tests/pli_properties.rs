use proptest::prelude::*;
use votespan_core::{
    pli_enumeration_oracle, pli_exact, pli_uniform, solve_inc, solve_sinc, DependenceProfile,
    EnsembleSize, SizingRequest,
};

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn profile_strategy(max_m: usize) -> impl Strategy<Value = DependenceProfile> {
    (2..=max_m).prop_flat_map(|m| {
        prop::collection::vec(0.0..=1.0f64, m - 1)
            .prop_map(move |p| DependenceProfile::new(m, p).unwrap())
    })
}

proptest! {
    #[test]
    fn dp_matches_enumeration(profile in profile_strategy(5), extra in 0usize..=18) {
        let m = profile.m();
        let n = (m + extra).min(20);
        let e = pli_enumeration_oracle(&profile, n).unwrap();
        prop_assert!((pli_exact(&profile, n) - e.probability).abs() <= 1e-12);
        prop_assert_eq!(e.term_count, binomial(n as u128 - 1, m as u128 - 1));
    }

    #[test]
    fn pli_is_a_probability_and_non_decreasing(profile in profile_strategy(8), n in 0usize..60) {
        let a = pli_exact(&profile, n);
        let b = pli_exact(&profile, n + 1);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn below_m_is_zero(profile in profile_strategy(8)) {
        for n in 0..profile.m() {
            prop_assert_eq!(pli_exact(&profile, n), 0.0);
        }
    }

    #[test]
    fn impassable_dimension_is_zero(profile in profile_strategy(6), l in 0usize..5, n in 0usize..200) {
        let m = profile.m();
        let mut p = profile.as_slice().to_vec();
        p[l % (m - 1)] = 1.0;
        let blocked = DependenceProfile::new(m, p).unwrap();
        prop_assert_eq!(pli_exact(&blocked, n), 0.0);
        prop_assert_eq!(solve_inc(&blocked, &SizingRequest::default()), EnsembleSize::Unreachable);
    }

    #[test]
    fn uniform_series_matches_dp(m in 2usize..=8, p in 0.0..1.0f64, n in 0usize..80) {
        let exact = pli_exact(&DependenceProfile::uniform(m, p).unwrap(), n);
        prop_assert!((pli_uniform(p, m, n).unwrap() - exact).abs() <= 1e-12);
    }

    #[test]
    fn binary_closed_form(p in 0.0..1.0f64, n in 1usize..200) {
        let expected = 1.0 - p.powi(n as i32 - 1);
        prop_assert!((pli_uniform(p, 2, n).unwrap() - expected).abs() <= 1e-15);
    }

    #[test]
    fn inc_is_the_first_crossing(profile in profile_strategy(6), t in 0.5..0.9999f64) {
        let req = SizingRequest::with_threshold(t).unwrap();
        if let EnsembleSize::Size(n) = solve_inc(&profile, &req) {
            prop_assert!(pli_exact(&profile, n) >= t);
            if n > profile.m() {
                prop_assert!(pli_exact(&profile, n - 1) < t);
            }
        }
    }

    #[test]
    fn sinc_agrees_with_inc_on_uniform_profiles(m in 2usize..=6, p in 0.0..0.95f64, t in 0.5..0.9999f64) {
        let req = SizingRequest::with_threshold(t).unwrap();
        let profile = DependenceProfile::uniform(m, p).unwrap();
        prop_assert_eq!(solve_sinc(p, m, &req).unwrap(), solve_inc(&profile, &req));
    }

    #[test]
    fn raising_any_p_never_raises_pli(profile in profile_strategy(6), l in 0usize..5, bump in 0.0..1.0f64, n in 0usize..40) {
        let m = profile.m();
        let mut p = profile.as_slice().to_vec();
        let i = l % (m - 1);
        p[i] = (p[i] + bump).min(1.0);
        let worse = DependenceProfile::new(m, p).unwrap();
        prop_assert!(pli_exact(&worse, n) <= pli_exact(&profile, n) + 1e-12);
    }
}

#[test]
fn enumeration_refuses_oversized_sums() {
    let profile = DependenceProfile::uniform(20, 0.5).unwrap();
    let err = pli_enumeration_oracle(&profile, 200).unwrap_err();
    assert!(matches!(err, votespan_core::Error::Resource(_)));
    assert!(err.to_string().contains("C(199, 19)"), "{err}");
}
