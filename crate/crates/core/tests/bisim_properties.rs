use std::collections::HashMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stratcheck_core::bisim::{check_a_bisimulation, BisimOptions, CandidateRelation};
use stratcheck_core::corpus::{corpus_item, CorpusParams};
use stratcheck_core::spec_lang::{parse_formula, parse_spec, TransitionDecl};
use stratcheck_core::verify::{verify_bruteforce, Limits};
use stratcheck_core::{build_global_model, AgentId, Amas, GlobalModel, StateId};

/// Copies local state `local` of agent `agent` into a twin with the same
/// outgoing transitions and sends a random subset of the incoming ones to the
/// twin. Returns the new text and the twin's name.
fn split_local(text: &str, agent: usize, local: usize, rng: &mut ChaCha8Rng) -> (String, String) {
    let mut doc = parse_spec(text).unwrap();
    let a = &mut doc.agents[agent];
    let name = a.locals[local].clone();
    let twin = format!("{name}x");
    a.locals.push(twin.clone());
    let mut copies: Vec<TransitionDecl> = Vec::new();
    for t in &mut a.transitions {
        if t.src == name {
            copies.push(TransitionDecl {
                src: twin.clone(),
                ..t.clone()
            });
        }
    }
    for t in a.transitions.iter_mut().chain(copies.iter_mut()) {
        if t.dst == name && rng.gen_bool(0.5) {
            t.dst = twin.clone();
        }
    }
    a.transitions.extend(copies);
    (doc.to_string(), twin)
}

fn formula_on(amas: &Amas, text: &str) -> stratcheck_core::Formula {
    amas.resolve_formula(&parse_formula(text).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn identity_passes_and_verdicts_are_symmetric(seed in any::<u64>(), drop in any::<prop::sample::Index>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let m = build_global_model(item.amas.clone()).unwrap();
        for mask in 0u32..(1 << item.amas.agents.len()) {
            let coalition: Vec<AgentId> = (0..item.amas.agents.len()).filter(|i| mask >> i & 1 == 1).map(AgentId).collect();
            let id = CandidateRelation::identity(&m, &coalition);
            prop_assert!(check_a_bisimulation(&m, &m, &id, BisimOptions::default()).ok());
            let strict = check_a_bisimulation(&m, &m, &id, BisimOptions { strict: true });
            prop_assert!(strict.ok());
            let mut partial = id.clone();
            partial.pairs.remove(drop.index(partial.pairs.len()));
            let fwd = check_a_bisimulation(&m, &m, &partial, BisimOptions::default());
            let bwd = check_a_bisimulation(&m, &m, &partial.inverted(), BisimOptions::default());
            prop_assert_eq!(fwd.ok(), bwd.ok());
        }
    }

    /// Splitting an environment local state yields an A-bisimilar model, which
    /// the checker accepts and on which F and G formulas keep their truth.
    #[test]
    fn split_models_are_bisimilar_and_agree(seed in any::<u64>(), pick in any::<u64>()) {
        let item = corpus_item(seed, &CorpusParams::default());
        let coalition = &item.eventually.coalition;
        let outside: Vec<usize> = (0..item.amas.agents.len()).filter(|&i| !coalition.contains(&AgentId(i))).collect();
        prop_assume!(!outside.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let agent = outside[rng.gen_range(0..outside.len())];
        let local = rng.gen_range(0..item.amas.agents[agent].locals.len());
        let (split, twin) = split_local(&item.text, agent, local, &mut rng);

        let left: GlobalModel = build_global_model(item.amas.clone()).unwrap();
        let right_amas = Arc::new(Amas::parse(&split).unwrap());
        let right = build_global_model(right_amas.clone()).unwrap();
        let twin_idx = right_amas.agents[agent].local_index(&twin).unwrap() as u32;

        let index: HashMap<_, StateId> = left.states().map(|s| (left.state(s).clone(), s)).collect();
        let mut pairs = Vec::new();
        for r in right.states() {
            let mut merged = right.state(r).clone();
            if merged.locals[agent] == twin_idx {
                merged.locals[agent] = local as u32;
            }
            let l = index.get(&merged).copied();
            prop_assert!(l.is_some(), "merged state unreachable on the left");
            pairs.push((l.unwrap(), r));
        }
        let relation = CandidateRelation {
            pairs,
            coalition: coalition.iter().map(|a| a.0).collect(),
        };
        let verdict = check_a_bisimulation(&left, &right, &relation, BisimOptions::default());
        prop_assert!(verdict.ok(), "{:?}\n{}\n---\n{}", verdict.to_json(&left, &right), item.text, split);
        let strict = check_a_bisimulation(&left, &right, &relation, BisimOptions { strict: true });
        prop_assert!(strict.ok());

        for f in [&item.eventually, &item.always] {
            let text = item.amas.display_formula(f);
            let on_right = formula_on(&right_amas, &text);
            let a = verify_bruteforce(&left, f, Limits::default()).unwrap().truth;
            let b = verify_bruteforce(&right, &on_right, Limits::default()).unwrap().truth;
            prop_assert_eq!(a, b, "{}", text);
        }
    }
}
