use proptest::prelude::*;
use solitonscope::{classify_history, Verdict};

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * 0.05).collect()
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::AlwaysIncoming => 0,
        Verdict::IncomingThenOutgoing => 1,
        Verdict::Mixed => 2,
    }
}

proptest! {
    #[test]
    fn sign_definite_incoming_is_always_incoming(flux in prop::collection::vec(-5.0f64..=0.0, 2..60)) {
        let t = grid(flux.len());
        prop_assert_eq!(classify_history(&t, &flux, 0.0), Verdict::AlwaysIncoming);
    }

    #[test]
    fn one_sign_change_is_incoming_then_outgoing(
        a in prop::collection::vec(-5.0f64..-1e-3, 1..30),
        b in prop::collection::vec(1e-3f64..5.0, 1..30),
    ) {
        let flux: Vec<f64> = a.iter().chain(&b).copied().collect();
        let t = grid(flux.len());
        prop_assert_eq!(classify_history(&t, &flux, 0.0), Verdict::IncomingThenOutgoing);
    }

    #[test]
    fn larger_budget_never_makes_the_verdict_worse(
        flux in prop::collection::vec(-2.0f64..2.0, 2..60),
        tol in 0.0f64..0.5,
        extra in 0.0f64..0.5,
    ) {
        let t = grid(flux.len());
        let tight = classify_history(&t, &flux, tol);
        let loose = classify_history(&t, &flux, tol + extra);
        prop_assert!(rank(loose) <= rank(tight), "{:?} then {:?}", tight, loose);
    }

    #[test]
    fn budget_above_total_variation_is_always_incoming(flux in prop::collection::vec(-2.0f64..2.0, 2..60)) {
        let t = grid(flux.len());
        let l1: f64 = flux.iter().map(|f| f.abs()).sum::<f64>() * 0.05;
        prop_assert_eq!(classify_history(&t, &flux, l1 + 1e-12), Verdict::AlwaysIncoming);
    }
}
