use std::time::Instant;

use crate::amas::{ActionId, AgentId, Formula};
use crate::model::GlobalModel;

use super::outcome::{eval_objective, prune_model};
use super::{normalized_coalition, Budget, Limits, Method, Statistics, Strategy, Truth, VerificationResult, VerifyError};

/// One decision point: a member's reachable local state and its options.
pub(crate) struct Slot {
    pub member: usize,
    pub local: usize,
    pub options: Vec<ActionId>,
}

/// Decision points in (agent, local state) declaration order. Locals that no
/// state of the model visits are left out; their entry never matters.
pub(crate) fn slots(model: &GlobalModel, coalition: &[AgentId]) -> Vec<Slot> {
    let amas = model.amas();
    let mut out = Vec::new();
    for (member, &a) in coalition.iter().enumerate() {
        for local in model.reachable_locals(a) {
            let options: Vec<ActionId> = amas.agent(a).choices(local).collect();
            if !options.is_empty() {
                out.push(Slot { member, local, options });
            }
        }
    }
    out
}

/// Number of strategies the enumerator visits, saturating.
pub fn strategy_space(model: &GlobalModel, formula: &Formula) -> u128 {
    let coalition = normalized_coalition(formula);
    slots(model, &coalition)
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.options.len() as u128))
}

/// Exhaustive search in lexicographic order; returns the first winner.
pub fn verify_bruteforce(
    model: &GlobalModel,
    formula: &Formula,
    limits: Limits,
) -> Result<VerificationResult, VerifyError> {
    let started = Instant::now();
    let mut budget = Budget::new(limits);
    let coalition = normalized_coalition(formula);
    let space = strategy_space(model, formula);
    if space > budget.cap() as u128 {
        return Err(VerifyError::StrategySpaceExceeded {
            size: space.to_string(),
            cap: budget.cap(),
        });
    }
    let slots = slots(model, &coalition);
    let mut strategy = Strategy::first(model.amas(), &coalition);
    let mut digits = vec![0usize; slots.len()];
    let mut examined = 0u64;
    let start = model.coalition_neighborhood(&coalition, model.initial());
    loop {
        budget.tick()?;
        for (slot, &d) in slots.iter().zip(&digits) {
            strategy.table[slot.member][slot.local] = Some(slot.options[d]);
        }
        examined += 1;
        let sub = prune_model(model, &coalition, &strategy);
        if eval_objective(&sub, &start, &formula.objective) {
            return Ok(VerificationResult {
                truth: Truth::True,
                strategy: Some(strategy),
                method: Method::Bruteforce,
                statistics: Statistics {
                    states: model.num_states(),
                    strategies_examined: examined,
                    nodes: examined,
                    elapsed: started.elapsed(),
                },
            });
        }
        // Odometer step, last slot fastest.
        let mut i = slots.len();
        loop {
            if i == 0 {
                return Ok(VerificationResult {
                    truth: Truth::False,
                    strategy: None,
                    method: Method::Bruteforce,
                    statistics: Statistics {
                        states: model.num_states(),
                        strategies_examined: examined,
                        nodes: examined,
                        elapsed: started.elapsed(),
                    },
                });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < slots[i].options.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}
