use proptest::prelude::*;

use stratcheck_core::corpus::{corpus_item, CorpusParams};
use stratcheck_core::spec_lang::{BoolExpr, Objective};
use stratcheck_core::verify::{
    certificate, fixpoint_lower, fixpoint_upper, verify_approx, verify_bruteforce, verify_dfs, Limits, Truth,
};
use stratcheck_core::{build_global_model, Formula};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn engines_sandwich_and_certificates(seed in any::<u64>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let m = build_global_model(item.amas.clone()).unwrap();
        for f in item.formulas() {
            let name = item.amas.display_formula(f);
            let b = verify_bruteforce(&m, f, Limits::default()).unwrap();
            let d = verify_dfs(&m, f, Limits::default()).unwrap();
            let a = verify_approx(&m, f, Limits::default()).unwrap();
            prop_assert_eq!(b.truth, d.truth, "{}\n{}", name, item.text);
            prop_assert!(a.truth == Truth::Inconclusive || a.truth == b.truth, "{}", name);
            if fixpoint_lower(&m, f) {
                prop_assert_eq!(b.truth, Truth::True, "{}", name);
            }
            if b.truth == Truth::True {
                prop_assert!(fixpoint_upper(&m, f), "{}", name);
            }
            prop_assert_eq!(b.truth == Truth::True, b.strategy.is_some());
            prop_assert_eq!(d.truth == Truth::True, d.strategy.is_some());
            prop_assert_eq!(a.truth == Truth::True, a.strategy.is_some());
            for r in [&b, &d, &a] {
                if let Some(s) = &r.strategy {
                    prop_assert!(certificate::check(&m, f, s), "{} via {}", name, r.method);
                }
            }
        }
    }

    /// Weakening the goal of an `F` objective never turns true into false.
    #[test]
    fn eventually_is_monotone(seed in any::<u64>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let m = build_global_model(item.amas.clone()).unwrap();
        let f = &item.eventually;
        let Objective::Eventually(phi) = &f.objective else { unreachable!() };
        let weaker = Formula {
            coalition: f.coalition.clone(),
            objective: Objective::Eventually(BoolExpr::or(phi.clone(), BoolExpr::Prop(stratcheck_core::PropId(0)))),
        };
        let strong = verify_bruteforce(&m, f, Limits::default()).unwrap().truth;
        let weak = verify_bruteforce(&m, &weaker, Limits::default()).unwrap().truth;
        prop_assert!(strong == Truth::False || weak == Truth::True);
    }
}
