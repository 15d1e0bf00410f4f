use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stratcheck_core::corpus::{corpus_item, CorpusParams};
use stratcheck_core::spec_lang::{parse_spec, validate, SpecDocument};
use stratcheck_core::Amas;

fn owner_names(amas: &Amas) -> BTreeMap<String, BTreeSet<String>> {
    amas.actions
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let owners = amas.owners[i].iter().map(|a| amas.agents[a.0].name.clone()).collect();
            (name.clone(), owners)
        })
        .collect()
}

fn with_formula(seed: u64) -> String {
    let item = corpus_item(seed, &CorpusParams::default());
    format!("{}FORMULA: {}\n", item.text, item.amas.display_formula(&item.always))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pretty_print_round_trips(seed in any::<u64>()) {
        let text = with_formula(seed);
        let doc = parse_spec(&text).unwrap();
        let printed = doc.to_string();
        let again = parse_spec(&printed).unwrap();
        prop_assert!(doc.same_structure(&again), "{}\n---\n{}", text, printed);
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn owners_ignore_agent_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let text = with_formula(seed);
        let doc = parse_spec(&text).unwrap();
        let mut permuted: SpecDocument = doc.clone();
        permuted.agents.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = validate(&doc).unwrap();
        let b = validate(&parse_spec(&permuted.to_string()).unwrap()).unwrap();
        prop_assert_eq!(owner_names(&a), owner_names(&b));
    }

    #[test]
    fn parse_errors_point_into_the_text(seed in any::<u64>(), cut in any::<prop::sample::Index>(), junk in "[ -~\n]{0,6}") {
        let text = with_formula(seed);
        let at = cut.index(text.len());
        let mutated = format!("{}{}{}", &text[..at], junk, &text[at..]);
        if let Err(e) = Amas::parse(&mutated) {
            let pos = e.pos();
            let lines: Vec<&str> = mutated.split('\n').collect();
            prop_assert!(pos.line >= 1 && pos.line <= lines.len().max(1), "{e} in\n{mutated}");
            prop_assert!(pos.column >= 1 && pos.column <= lines[pos.line - 1].chars().count() + 1, "{e}");
        }
    }
}
