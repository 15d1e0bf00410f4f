//! Outcome construction: the part of the model a strategy leaves open to the
//! scheduler, and universal path evaluation on it.

use std::collections::VecDeque;

use crate::amas::{AgentId, PropId};
use crate::joint;
use crate::model::{GlobalModel, Label, StateId};
use crate::spec_lang::{BoolExpr, Objective};

use super::Strategy;

/// States reachable from the start set under a strategy, with their kept
/// steps. A state whose real steps are all blocked carries an `ε` self-loop.
#[derive(Debug, Clone)]
pub struct Submodel<'m> {
    model: &'m GlobalModel,
    start: Vec<StateId>,
    order: Vec<StateId>,
    succ: Vec<Option<Vec<(Label, StateId)>>>,
}

impl<'m> Submodel<'m> {
    pub fn model(&self) -> &'m GlobalModel {
        self.model
    }

    pub fn start(&self) -> &[StateId] {
        &self.start
    }

    /// Reachable states in discovery order.
    pub fn states(&self) -> &[StateId] {
        &self.order
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.succ[s.0].is_some()
    }

    pub fn steps(&self, s: StateId) -> &[(Label, StateId)] {
        self.succ[s.0].as_deref().unwrap_or(&[])
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().flatten().map(Vec::len).sum()
    }
}

/// Prunes `model` by `strategy` from the coalition neighborhood of the
/// initial state.
pub fn prune_model<'m>(model: &'m GlobalModel, coalition: &[AgentId], strategy: &Strategy) -> Submodel<'m> {
    let start = model.coalition_neighborhood(coalition, model.initial());
    prune_from(model, coalition, strategy, start)
}

pub fn prune_from<'m>(
    model: &'m GlobalModel,
    coalition: &[AgentId],
    strategy: &Strategy,
    start: Vec<StateId>,
) -> Submodel<'m> {
    debug_assert_eq!(coalition, strategy.coalition.as_slice());
    let mut succ: Vec<Option<Vec<(Label, StateId)>>> = vec![None; model.num_states()];
    let mut order = Vec::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();
    for &s in &start {
        if succ[s.0].is_none() {
            succ[s.0] = Some(Vec::new());
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        order.push(s);
        let mut kept: Vec<(Label, StateId)> = model
            .successors(s)
            .filter(|e| joint::consistent(model, coalition, s, e.label, |i, l| strategy.choice(i, l)))
            .map(|e| (e.label, e.dst))
            .collect();
        if kept.is_empty() {
            kept.push((Label::Stutter, s));
        }
        for &(_, t) in &kept {
            if succ[t.0].is_none() {
                succ[t.0] = Some(Vec::new());
                queue.push_back(t);
            }
        }
        succ[s.0] = Some(kept);
    }
    Submodel {
        model,
        start,
        order,
        succ,
    }
}

fn holds(model: &GlobalModel, s: StateId, e: &BoolExpr<PropId>) -> bool {
    e.eval(&|p: &PropId| model.holds(s, *p))
}

/// Whether every path of `sub` from every state of `start` satisfies the
/// objective. Start states must belong to `sub`.
pub fn eval_objective(sub: &Submodel<'_>, start: &[StateId], objective: &Objective<PropId>) -> bool {
    let m = sub.model;
    match objective {
        Objective::Next(phi) => start
            .iter()
            .all(|&s| sub.steps(s).iter().all(|&(_, t)| holds(m, t, phi))),
        Objective::Always(phi) => {
            let mut seen = vec![false; m.num_states()];
            let mut stack: Vec<StateId> = Vec::new();
            for &s in start {
                if !seen[s.0] {
                    seen[s.0] = true;
                    stack.push(s);
                }
            }
            while let Some(s) = stack.pop() {
                if !holds(m, s, phi) {
                    return false;
                }
                for &(_, t) in sub.steps(s) {
                    if !seen[t.0] {
                        seen[t.0] = true;
                        stack.push(t);
                    }
                }
            }
            true
        }
        Objective::Eventually(phi) => until(sub, start, |_| true, |s| holds(m, s, phi)),
        Objective::Until(a, b) => until(sub, start, |s| holds(m, s, a), |s| holds(m, s, b)),
    }
}

/// `keep U goal` on all paths: explores the region of states satisfying
/// `keep ∧ ¬goal`, fails on reaching `¬keep ∧ ¬goal` or on a cycle inside the
/// region. Every state has a successor, so there are no sinks to consider.
fn until(
    sub: &Submodel<'_>,
    start: &[StateId],
    keep: impl Fn(StateId) -> bool,
    goal: impl Fn(StateId) -> bool,
) -> bool {
    let n = sub.model.num_states();
    let mut in_region = vec![false; n];
    let mut region = Vec::new();
    let mut stack = Vec::new();
    let admit = |t: StateId, in_region: &mut Vec<bool>, stack: &mut Vec<StateId>| -> bool {
        if goal(t) || in_region[t.0] {
            return true;
        }
        if !keep(t) {
            return false;
        }
        in_region[t.0] = true;
        stack.push(t);
        true
    };
    for &s in start {
        if !admit(s, &mut in_region, &mut stack) {
            return false;
        }
    }
    while let Some(s) = stack.pop() {
        region.push(s);
        for &(_, t) in sub.steps(s) {
            if !admit(t, &mut in_region, &mut stack) {
                return false;
            }
        }
    }
    // Kahn's algorithm on the region-induced subgraph; leftovers lie on a cycle.
    let mut indeg = vec![0usize; n];
    for &s in &region {
        for &(_, t) in sub.steps(s) {
            if in_region[t.0] {
                indeg[t.0] += 1;
            }
        }
    }
    let mut ready: Vec<StateId> = region.iter().copied().filter(|s| indeg[s.0] == 0).collect();
    let mut removed = 0;
    while let Some(s) = ready.pop() {
        removed += 1;
        for &(_, t) in sub.steps(s) {
            if in_region[t.0] {
                indeg[t.0] -= 1;
                if indeg[t.0] == 0 {
                    ready.push(t);
                }
            }
        }
    }
    removed == region.len()
}
