//! Joint choices of a coalition at a global state and the steps consistent
//! with them.

use crate::amas::{ActionId, AgentId};
use crate::model::{GlobalModel, Label, StateId};

/// One action per coalition member, aligned with the coalition slice; `None`
/// stands for `ε` at a local state without outgoing transitions.
pub type JointChoice = Vec<Option<ActionId>>;

/// Cartesian product of the members' available actions at `s`, in
/// declaration order with the first member varying slowest.
pub fn joint_choices(model: &GlobalModel, coalition: &[AgentId], s: StateId) -> Vec<JointChoice> {
    let amas = model.amas();
    let options: Vec<Vec<Option<ActionId>>> = coalition
        .iter()
        .map(|&a| {
            let acts: Vec<Option<ActionId>> = amas.agent(a).choices(model.local(s, a)).map(Some).collect();
            if acts.is_empty() {
                vec![None]
            } else {
                acts
            }
        })
        .collect();
    let mut out: Vec<JointChoice> = vec![Vec::with_capacity(coalition.len())];
    for opts in options {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&o| {
                    let mut c = prefix.clone();
                    c.push(o);
                    c
                })
            })
            .collect();
    }
    out
}

/// Whether the step labeled `label` from `s` agrees with the members'
/// choices: every coalition owner of the action must have chosen it.
pub fn consistent(
    model: &GlobalModel,
    coalition: &[AgentId],
    s: StateId,
    label: Label,
    choice_of: impl Fn(usize, usize) -> Option<ActionId>,
) -> bool {
    let Label::Action(action) = label else {
        return true;
    };
    let owners = model.amas().owners(action);
    coalition
        .iter()
        .enumerate()
        .filter(|(_, a)| owners.contains(a))
        .all(|(i, &a)| choice_of(i, model.local(s, a)) == Some(action))
}

/// Successors of `s` through steps consistent with the choice; `s` itself when
/// no step is consistent (the stutter rule).
pub fn consistent_successors(
    model: &GlobalModel,
    coalition: &[AgentId],
    s: StateId,
    choice_of: impl Fn(usize, usize) -> Option<ActionId>,
) -> Vec<StateId> {
    let mut out: Vec<StateId> = model
        .successors(s)
        .filter(|e| consistent(model, coalition, s, e.label, &choice_of))
        .map(|e| e.dst)
        .collect();
    if out.is_empty() {
        out.push(s);
    }
    out.sort();
    out.dedup();
    out
}

/// `consistent_successors` for a concrete joint choice.
pub fn choice_successors(
    model: &GlobalModel,
    coalition: &[AgentId],
    s: StateId,
    choice: &[Option<ActionId>],
) -> Vec<StateId> {
    consistent_successors(model, coalition, s, |i, _| choice[i])
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::amas::Amas;
    use crate::model::build_global_model;

    #[test]
    fn tgc_controller_choices_at_initial() {
        let amas = Arc::new(Amas::parse(include_str!("../../../fixtures/tgc.stv")).unwrap());
        let m = build_global_model(amas.clone()).unwrap();
        let ctrl = amas.agent_id("Controller").unwrap();
        let a1 = amas.action_id("a1").unwrap();
        let b1 = amas.action_id("b1").unwrap();
        let choices = joint_choices(&m, &[ctrl], StateId(0));
        assert_eq!(choices, vec![vec![Some(a1)], vec![Some(b1)]]);
        // b1 is owned by the controller, so choosing a1 excludes it.
        assert_eq!(choice_successors(&m, &[ctrl], StateId(0), &[Some(a1)]), vec![StateId(1)]);
    }

    #[test]
    fn unconstrained_actions_are_consistent() {
        let amas = Arc::new(Amas::parse(include_str!("../../../fixtures/tgc.stv")).unwrap());
        let m = build_global_model(amas.clone()).unwrap();
        let ctrl = amas.agent_id("Controller").unwrap();
        let b1 = amas.action_id("b1").unwrap();
        // (G,A,W): a3 has no coalition owner and stays consistent with any choice.
        let s = StateId(3);
        assert_eq!(m.describe(s), "(G,A,W)");
        let succ = choice_successors(&m, &[ctrl], s, &[Some(amas.action_id("a1").unwrap())]);
        assert_eq!(succ, vec![StateId(0)]);
        let succ = choice_successors(&m, &[ctrl], s, &[Some(b1)]);
        assert_eq!(succ, vec![StateId(0), StateId(5)]);
        // An empty coalition constrains nothing.
        assert_eq!(joint_choices(&m, &[], s), vec![Vec::<Option<ActionId>>::new()]);
        assert_eq!(choice_successors(&m, &[], s, &[]), vec![StateId(0), StateId(5)]);
    }

    #[test]
    fn stutter_when_nothing_consistent() {
        let amas = Arc::new(Amas::parse(include_str!("../../../fixtures/tgc.stv")).unwrap());
        let m = build_global_model(amas.clone()).unwrap();
        let ctrl = amas.agent_id("Controller").unwrap();
        // (R,T,W) only enables a2; choosing b2 blocks it.
        let b2 = amas.action_id("b2").unwrap();
        assert_eq!(choice_successors(&m, &[ctrl], StateId(1), &[Some(b2)]), vec![StateId(1)]);
    }
}
