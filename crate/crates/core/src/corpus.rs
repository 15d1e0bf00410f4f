//! Seeded random models and formulas for property tests and the acceptance
//! suite.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amas::{Amas, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusParams {
    pub max_agents: usize,
    pub max_locals: usize,
    pub max_props: usize,
    pub max_outgoing: usize,
    pub max_formula_props: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            max_agents: 3,
            max_locals: 4,
            max_props: 3,
            max_outgoing: 2,
            max_formula_props: 2,
        }
    }
}

const PROPS: [&str; 3] = ["p", "q", "r"];
const SHARED: [&str; 3] = ["s0", "s1", "s2"];

/// One generated model with formulas over it: an `F` and a `G` objective with
/// the same coalition and proposition set, plus an `X` and a `U` objective.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub seed: u64,
    pub text: String,
    pub amas: Arc<Amas>,
    pub eventually: Formula,
    pub always: Formula,
    pub next: Formula,
    pub until: Formula,
}

impl CorpusItem {
    pub fn formulas(&self) -> [&Formula; 4] {
        [&self.eventually, &self.always, &self.next, &self.until]
    }
}

fn bool_expr(rng: &mut ChaCha8Rng, props: &[&str]) -> String {
    match props {
        [p] => {
            if rng.gen_bool(0.5) {
                p.to_string()
            } else {
                format!("!{p}")
            }
        }
        [p, q, ..] => match rng.gen_range(0..4) {
            0 => format!("{p} & {q}"),
            1 => format!("{p} | {q}"),
            2 => format!("!({p} & {q})"),
            _ => format!("{p} & !{q}"),
        },
        [] => "true".into(),
    }
}

/// Model text without a formula. Agents are `A0..`, locals `l0..`, private
/// actions `a<agent>_<k>`, shared actions `s0..s2`.
pub fn random_model_text(rng: &mut ChaCha8Rng, params: &CorpusParams) -> (String, usize, usize) {
    let agents = rng.gen_range(1..=params.max_agents);
    let props = rng.gen_range(1..=params.max_props);
    let mut s = String::new();
    for a in 0..agents {
        let locals = rng.gen_range(1..=params.max_locals);
        let _ = writeln!(s, "AGENT A{a}:");
        let _ = writeln!(s, "  LOCAL: {}", (0..locals).map(|l| format!("l{l}")).collect::<Vec<_>>().join(", "));
        let _ = writeln!(s, "  INIT: l0");
        let mut private = 0;
        for l in 0..locals {
            let out = rng.gen_range(0..=params.max_outgoing);
            let mut used: Vec<String> = Vec::new();
            for _ in 0..out {
                let action = if rng.gen_bool(0.5) {
                    SHARED.choose(rng).unwrap().to_string()
                } else {
                    private += 1;
                    format!("a{a}_{private}")
                };
                if used.contains(&action) {
                    continue;
                }
                used.push(action.clone());
                let dst = rng.gen_range(0..locals);
                let _ = write!(s, "  l{l} -> l{dst} : {action}");
                let mut effects: Vec<String> = Vec::new();
                for p in &PROPS[..props] {
                    if rng.gen_bool(0.3) {
                        effects.push(format!("{p}={}", rng.gen_bool(0.5)));
                    }
                }
                if !effects.is_empty() {
                    let _ = write!(s, " SET {}", effects.join(", "));
                }
                s.push('\n');
            }
        }
    }
    let _ = writeln!(s, "PROPOSITIONS: {}", PROPS[..props].join(", "));
    (s, agents, props)
}

/// Generates one corpus item from `seed`.
pub fn corpus_item(seed: u64, params: &CorpusParams) -> CorpusItem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (text, agents, props) = random_model_text(&mut rng, params);
    // Mostly a strict subset of the agents; the full set now and then.
    let mut coalition: Vec<usize> = (0..agents).filter(|_| rng.gen_bool(0.5)).collect();
    if coalition.is_empty() {
        coalition.push(rng.gen_range(0..agents));
    }
    if coalition.len() == agents && agents > 1 && rng.gen_bool(0.7) {
        coalition.remove(rng.gen_range(0..agents));
    }
    let k = rng.gen_range(1..=params.max_formula_props.min(props));
    let mut chosen: Vec<&str> = PROPS[..props].to_vec();
    chosen.shuffle(&mut rng);
    chosen.truncate(k);
    let body = bool_expr(&mut rng, &chosen);
    let other = bool_expr(&mut rng, &chosen[..1]);
    let who = coalition.iter().map(|a| format!("A{a}")).collect::<Vec<_>>().join(", ");
    let amas = Arc::new(Amas::parse(&text).expect("generated model is valid"));
    let formula = |t: String| {
        amas.resolve_formula(&crate::spec_lang::parse_formula(&t).expect("generated formula parses"))
            .expect("generated formula resolves")
    };
    CorpusItem {
        seed,
        eventually: formula(format!("<<{who}>> F ({body})")),
        always: formula(format!("<<{who}>> G ({body})")),
        next: formula(format!("<<{who}>> X ({body})")),
        until: formula(format!("<<{who}>> ({other}) U ({body})")),
        text,
        amas,
    }
}

/// `count` items with seeds `first_seed..first_seed + count`.
pub fn corpus(first_seed: u64, count: usize, params: &CorpusParams) -> Vec<CorpusItem> {
    (first_seed..first_seed + count as u64).map(|s| corpus_item(s, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_within_bounds() {
        let p = CorpusParams::default();
        let a = corpus(7, 50, &p);
        let b = corpus(7, 50, &p);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.text, y.text);
            assert_eq!(x.eventually, y.eventually);
            assert!(x.amas.agents.len() <= 3);
            assert!(x.amas.propositions.len() <= 3);
            assert!(x.amas.agents.iter().all(|ag| ag.locals.len() <= 4));
            for f in x.formulas() {
                assert!(f.props().len() <= 2);
                assert!(!f.coalition.is_empty());
            }
        }
    }
}
