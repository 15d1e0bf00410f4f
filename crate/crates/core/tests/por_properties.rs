use std::sync::Arc;

use proptest::prelude::*;

use stratcheck_core::corpus::{corpus_item, CorpusParams};
use stratcheck_core::model::enabled_actions;
use stratcheck_core::por::{build_reduced_model, invisible, C3Mode, ReductionParams};
use stratcheck_core::verify::{verify_bruteforce, Limits};
use stratcheck_core::{build_global_model, AgentId, PropId};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reduction_preserves_truth(seed in any::<u64>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let full = build_global_model(item.amas.clone()).unwrap();
        for f in [&item.eventually, &item.always] {
            let params = ReductionParams::for_formula(&item.amas, f, C3Mode::Safe);
            let reduced = build_reduced_model(Arc::clone(&item.amas), &params).unwrap().model;
            let a = verify_bruteforce(&full, f, Limits::default()).unwrap().truth;
            let b = verify_bruteforce(&reduced, f, Limits::default()).unwrap().truth;
            prop_assert_eq!(a, b, "{}\n{}", item.amas.display_formula(f), item.text);
        }
    }

    #[test]
    fn reduced_is_a_submodel(seed in any::<u64>(), aggressive in any::<bool>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let amas = item.amas.clone();
        let full = build_global_model(amas.clone()).unwrap();
        let c3 = if aggressive { C3Mode::Aggressive } else { C3Mode::Safe };
        let params = ReductionParams::for_formula(&amas, &item.eventually, c3);
        let red = build_reduced_model(amas.clone(), &params).unwrap();
        prop_assert_eq!(full.find(red.model.state(red.model.initial())), Some(full.initial()));
        for e in red.model.edges() {
            let src = full.find(red.model.state(e.src));
            let dst = full.find(red.model.state(e.dst));
            prop_assert!(src.is_some() && dst.is_some());
            prop_assert!(full.successors(src.unwrap()).any(|f| f.label == e.label && Some(f.dst) == dst));
        }
        // A partial ample set belongs to one agent outside the coalition whose
        // enabled actions are all private and invisible.
        for s in red.model.states() {
            let info = &red.ample[s.0];
            let enabled = enabled_actions(&amas, red.model.state(s));
            if info.fully_expanded {
                prop_assert_eq!(&info.ample, &enabled);
                continue;
            }
            let owner = amas.owners(info.ample[0])[0];
            prop_assert!(!params.coalition.contains(&owner));
            let mine: Vec<_> = enabled.iter().copied().filter(|&a| amas.owners(a).contains(&owner)).collect();
            prop_assert_eq!(&info.ample, &mine);
            for &a in &info.ample {
                prop_assert!(amas.is_private_to(a, owner));
                prop_assert!(invisible(&amas, a, &params.visible));
            }
        }
    }

    #[test]
    fn everything_visible_and_coalition_means_no_reduction(seed in any::<u64>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let amas = item.amas.clone();
        let full = build_global_model(amas.clone()).unwrap();
        let params = ReductionParams::new(
            &amas,
            (0..amas.agents.len()).map(AgentId).collect(),
            (0..amas.propositions.len()).map(PropId).collect(),
            C3Mode::Aggressive,
        );
        let red = build_reduced_model(amas, &params).unwrap().model;
        prop_assert_eq!(red.num_states(), full.num_states());
        prop_assert_eq!(red.num_edges(), full.num_edges());
    }
}
