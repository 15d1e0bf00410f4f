//! Fixpoint approximation. The upper bound lets the coalition see the global
//! state; the lower bound requires one joint choice per local state that works
//! for a whole knowledge block at once.

use std::time::Instant;

use crate::amas::{ActionId, AgentId, Formula, PropId};
use crate::joint::{choice_successors, consistent_successors, joint_choices};
use crate::model::{GlobalModel, StateId};
use crate::spec_lang::{BoolExpr, Objective};

use super::{
    normalized_coalition, Budget, Limits, Method, Statistics, Strategy, Truth, VerificationResult, VerifyError,
};

fn sat(model: &GlobalModel, e: &BoolExpr<PropId>) -> Vec<bool> {
    model.states().map(|s| e.eval(&|p: &PropId| model.holds(s, *p))).collect()
}

#[derive(Default)]
struct Counters {
    iterations: u64,
    pre_evaluations: u64,
}

/// Controllable pre-image of a state set; the flag marks least fixpoints.
type PreImage<'a> = dyn FnMut(&[bool], bool) -> Result<Vec<bool>, VerifyError> + 'a;

/// Evaluates the objective with `pre` as the controllable pre-image and checks
/// the start set. `pre` receives the current set and whether the caller runs a
/// least fixpoint.
fn solve(
    model: &GlobalModel,
    objective: &Objective<PropId>,
    start: &[StateId],
    counters: &mut Counters,
    pre: &mut PreImage<'_>,
) -> Result<bool, VerifyError> {
    let z = match objective {
        Objective::Next(phi) => {
            counters.iterations += 1;
            pre(&sat(model, phi), true)?
        }
        Objective::Always(phi) => {
            let phi = sat(model, phi);
            let mut z = phi.clone();
            loop {
                counters.iterations += 1;
                let p = pre(&z, false)?;
                let next: Vec<bool> = phi.iter().zip(&p).map(|(&a, &b)| a && b).collect();
                if next == z {
                    break z;
                }
                z = next;
            }
        }
        Objective::Eventually(phi) => lfp(&vec![true; model.num_states()], &sat(model, phi), counters, pre)?,
        Objective::Until(a, b) => lfp(&sat(model, a), &sat(model, b), counters, pre)?,
    };
    Ok(start.iter().all(|s| z[s.0]))
}

/// Least `Z = goal ∪ (keep ∩ Pre(Z))`.
fn lfp(
    keep: &[bool],
    goal: &[bool],
    counters: &mut Counters,
    pre: &mut PreImage<'_>,
) -> Result<Vec<bool>, VerifyError> {
    let mut z = goal.to_vec();
    loop {
        counters.iterations += 1;
        let p = pre(&z, true)?;
        let next: Vec<bool> = (0..z.len()).map(|i| goal[i] || (keep[i] && p[i])).collect();
        if next == z {
            return Ok(z);
        }
        z = next;
    }
}

fn upper(model: &GlobalModel, formula: &Formula, budget: &mut Budget, counters: &mut Counters) -> Result<bool, VerifyError> {
    let coalition = normalized_coalition(formula);
    let start = model.coalition_neighborhood(&coalition, model.initial());
    let mut evals = 0u64;
    let mut pre = |z: &[bool], _: bool| -> Result<Vec<bool>, VerifyError> {
        let mut out = vec![false; z.len()];
        for q in model.states() {
            budget.tick()?;
            evals += 1;
            out[q.0] = joint_choices(model, &coalition, q)
                .iter()
                .any(|chi| choice_successors(model, &coalition, q, chi).iter().all(|t| z[t.0]));
        }
        Ok(out)
    };
    let r = solve(model, &formula.objective, &start, counters, &mut pre);
    counters.pre_evaluations += evals;
    r
}

/// Perfect-information upper bound: exact truth implies this returns true.
pub fn fixpoint_upper(model: &GlobalModel, formula: &Formula) -> bool {
    upper(model, formula, &mut Budget::new(Limits::default()), &mut Counters::default())
        .expect("no deadline set")
}

/// Closure of the members' indistinguishability relations: blocks of states
/// connected through any chain of members' epistemic classes.
fn knowledge_blocks(model: &GlobalModel, coalition: &[AgentId]) -> Vec<Vec<StateId>> {
    let n = model.num_states();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &a in coalition {
        for class in model.epistemic_partition(a) {
            let root = find(&mut parent, class[0].0);
            for s in &class[1..] {
                let r = find(&mut parent, s.0);
                if r != root {
                    parent[r] = root;
                }
            }
        }
    }
    let mut by_root: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in model.states() {
        let r = find(&mut parent, s.0);
        by_root[r].push(s);
    }
    let mut blocks: Vec<Vec<StateId>> = by_root.into_iter().filter(|b| !b.is_empty()).collect();
    blocks.sort_by_key(|b| b[0]);
    blocks
}

struct BlockSlots {
    states: Vec<StateId>,
    /// (member index, local, options)
    slots: Vec<(usize, usize, Vec<ActionId>)>,
}

fn block_slots(model: &GlobalModel, coalition: &[AgentId], states: Vec<StateId>) -> BlockSlots {
    let amas = model.amas();
    let mut slots: Vec<(usize, usize, Vec<ActionId>)> = Vec::new();
    for (i, &a) in coalition.iter().enumerate() {
        let mut locals: Vec<usize> = states.iter().map(|&s| model.local(s, a)).collect();
        locals.sort();
        locals.dedup();
        for l in locals {
            let options: Vec<ActionId> = amas.agent(a).choices(l).collect();
            if !options.is_empty() {
                slots.push((i, l, options));
            }
        }
    }
    BlockSlots { states, slots }
}

/// Uniform lower bound; on success also yields a strategy assembled from the
/// per-block choices.
fn lower(
    model: &GlobalModel,
    formula: &Formula,
    budget: &mut Budget,
    counters: &mut Counters,
) -> Result<Option<Strategy>, VerifyError> {
    let coalition = normalized_coalition(formula);
    let start = model.coalition_neighborhood(&coalition, model.initial());
    let blocks: Vec<BlockSlots> = knowledge_blocks(model, &coalition)
        .into_iter()
        .map(|b| block_slots(model, &coalition, b))
        .collect();
    let mut witness: Vec<Option<Vec<usize>>> = vec![None; blocks.len()];
    let mut scratch = Strategy::first(model.amas(), &coalition);
    let cap = budget.cap();
    let mut evals = 0u64;
    let mut pre = |z: &[bool], sticky: bool| -> Result<Vec<bool>, VerifyError> {
        let mut out = vec![false; z.len()];
        for (bi, block) in blocks.iter().enumerate() {
            if sticky && witness[bi].is_some() {
                block.states.iter().for_each(|s| out[s.0] = true);
                continue;
            }
            witness[bi] = None;
            let space = block
                .slots
                .iter()
                .fold(1u128, |acc, s| acc.saturating_mul(s.2.len() as u128));
            if space > cap as u128 {
                // Too many uniform choices to try: stay sound and leave it out.
                continue;
            }
            let mut digits = vec![0usize; block.slots.len()];
            'assign: loop {
                budget.tick()?;
                evals += 1;
                for (&(i, l, ref opts), &d) in block.slots.iter().zip(&digits) {
                    scratch.table[i][l] = Some(opts[d]);
                }
                let works = block.states.iter().all(|&q| {
                    consistent_successors(model, &coalition, q, |i, l| scratch.table[i][l])
                        .iter()
                        .all(|t| z[t.0])
                });
                if works {
                    witness[bi] = Some(digits.clone());
                    block.states.iter().for_each(|s| out[s.0] = true);
                    break;
                }
                let mut k = digits.len();
                loop {
                    if k == 0 {
                        break 'assign;
                    }
                    k -= 1;
                    digits[k] += 1;
                    if digits[k] < block.slots[k].2.len() {
                        break;
                    }
                    digits[k] = 0;
                }
            }
        }
        Ok(out)
    };
    let holds = solve(model, &formula.objective, &start, counters, &mut pre);
    counters.pre_evaluations += evals;
    if !holds? {
        return Ok(None);
    }
    let mut strategy = Strategy::first(model.amas(), &coalition);
    for (block, w) in blocks.iter().zip(&witness) {
        if let Some(digits) = w {
            for (&(i, l, ref opts), &d) in block.slots.iter().zip(digits) {
                strategy.table[i][l] = Some(opts[d]);
            }
        }
    }
    Ok(Some(strategy))
}

/// Uniform lower bound: a true result implies the exact answer is true.
pub fn fixpoint_lower(model: &GlobalModel, formula: &Formula) -> bool {
    lower(model, formula, &mut Budget::new(Limits::default()), &mut Counters::default())
        .expect("no deadline set")
        .is_some()
}

/// Lower-true gives true with a strategy, upper-false gives false, anything
/// else is inconclusive.
pub fn verify_approx(model: &GlobalModel, formula: &Formula, limits: Limits) -> Result<VerificationResult, VerifyError> {
    let started = Instant::now();
    let mut budget = Budget::new(limits);
    let mut counters = Counters::default();
    let (truth, strategy) = match lower(model, formula, &mut budget, &mut counters)? {
        Some(s) => (Truth::True, Some(s)),
        None if !upper(model, formula, &mut budget, &mut counters)? => (Truth::False, None),
        None => (Truth::Inconclusive, None),
    };
    Ok(VerificationResult {
        truth,
        strategy,
        method: Method::Fixpoint,
        statistics: Statistics {
            states: model.num_states(),
            strategies_examined: counters.iterations,
            nodes: counters.pre_evaluations,
            elapsed: started.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{formula, model, tgc};
    use super::super::{certificate, verify_bruteforce};
    use super::*;

    const GUESS: &str = include_str!("../../../../fixtures/guess.stv");

    #[test]
    fn tgc_safety_decided_by_lower() {
        let m = tgc();
        let f = formula(&m, "<<Controller>> G !(in1 & in2)");
        assert!(fixpoint_lower(&m, &f));
        assert!(fixpoint_upper(&m, &f));
        let r = verify_approx(&m, &f, Limits::default()).unwrap();
        assert_eq!(r.truth, Truth::True);
        assert!(certificate::check(&m, &f, r.strategy.as_ref().unwrap()));
    }

    #[test]
    fn trivial_objectives() {
        let m = tgc();
        assert!(fixpoint_upper(&m, &formula(&m, "<<Train1>> G true")));
        assert!(fixpoint_lower(&m, &formula(&m, "<<Train1>> G true")));
        assert!(!fixpoint_lower(&m, &formula(&m, "<<Train1>> F false")));
        assert!(!fixpoint_upper(&m, &formula(&m, "<<Train1>> F false")));
        // The initial neighborhood of Train1 is all states with Train1 at W,
        // and none of them has in1.
        let f = formula(&m, "<<Train1>> F !in1");
        assert!(fixpoint_lower(&m, &f));
        let r = verify_approx(&m, &f, Limits::default()).unwrap();
        assert_eq!(r.truth, Truth::True);
    }

    /// Hand-computed perfect-information fixpoint for `<<Train1>> F in1`:
    /// the seed is {(R,T,W),(R,T,A)}; (G,W,W) cannot enter because b1 is not
    /// Train1's to refuse, and the cycle (G,W,W)→(R,W,T)→(G,W,A)→(G,W,W)
    /// avoids in1, so the initial neighborhood is never covered.
    #[test]
    fn train1_eventually_in1_upper_is_false() {
        let m = tgc();
        let f = formula(&m, "<<Train1>> F in1");
        assert!(!fixpoint_upper(&m, &f));
        let r = verify_approx(&m, &f, Limits::default()).unwrap();
        assert_eq!(r.truth, Truth::False);
    }

    #[test]
    fn guessing_game_is_inconclusive() {
        let m = model(GUESS);
        let f = m.amas().formula.clone().unwrap();
        assert!(!fixpoint_lower(&m, &f));
        assert!(fixpoint_upper(&m, &f));
        assert_eq!(verify_approx(&m, &f, Limits::default()).unwrap().truth, Truth::Inconclusive);
        assert_eq!(verify_bruteforce(&m, &f, Limits::default()).unwrap().truth, Truth::False);
    }

    #[test]
    fn blocks_close_over_members() {
        let m = tgc();
        let amas = m.amas();
        let both = [amas.agent_id("Train1").unwrap(), amas.agent_id("Train2").unwrap()];
        // Any two states are linked through a chain of Train1/Train2 classes.
        assert_eq!(knowledge_blocks(&m, &both).len(), 1);
        assert_eq!(knowledge_blocks(&m, &[]).len(), 8);
        assert_eq!(knowledge_blocks(&m, &both[..1]).len(), 3);
    }
}
