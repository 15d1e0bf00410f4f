//! Independent re-check of a winning strategy. Deliberately shares no code
//! with the engines: the start set, the pruning and the path semantics are
//! recomputed here from the raw model, the latter with fixpoints instead of
//! graph search.

use crate::amas::{Formula, PropId};
use crate::model::{GlobalModel, Label, StateId};
use crate::spec_lang::{BoolExpr, Objective};

use super::Strategy;

/// Whether `strategy` wins `formula` on `model`.
pub fn check(model: &GlobalModel, formula: &Formula, strategy: &Strategy) -> bool {
    let amas = model.amas();
    if !strategy.is_well_formed(amas) {
        return false;
    }
    let n = model.num_states();
    let init = model.initial();
    let members: Vec<_> = formula.coalition.clone();
    if members.iter().any(|a| strategy.action_for(*a, 0).is_none()) {
        return false;
    }

    let start: Vec<StateId> = if members.is_empty() {
        vec![init]
    } else {
        model
            .states()
            .filter(|&s| members.iter().any(|&a| model.state(s).local(a) == model.state(init).local(a)))
            .collect()
    };

    let mut succ: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for e in model.edges() {
        let allowed = match e.label {
            Label::Stutter => true,
            Label::Action(act) => amas.owners(act).iter().all(|&o| match strategy.action_for(o, model.state(e.src).local(o)) {
                None => true,
                Some(choice) => choice == Some(act),
            }),
        };
        if allowed {
            succ[e.src.0].push(e.dst);
        }
    }
    for (s, out) in succ.iter_mut().enumerate() {
        if out.is_empty() {
            out.push(StateId(s));
        }
    }

    let val = |e: &BoolExpr<PropId>| -> Vec<bool> {
        (0..n)
            .map(|s| e.eval(&|p: &PropId| model.state(StateId(s)).holds(*p)))
            .collect()
    };
    let all_succ_in = |z: &[bool], s: usize| succ[s].iter().all(|t| z[t.0]);

    let win: Vec<bool> = match &formula.objective {
        Objective::Next(phi) => {
            let p = val(phi);
            (0..n).map(|s| all_succ_in(&p, s)).collect()
        }
        Objective::Always(phi) => {
            // Greatest Z ⊆ φ closed under all pruned successors.
            let p = val(phi);
            let mut z = p.clone();
            loop {
                let next: Vec<bool> = (0..n).map(|s| p[s] && all_succ_in(&z, s)).collect();
                if next == z {
                    break z;
                }
                z = next;
            }
        }
        Objective::Eventually(phi) => least(&vec![true; n], &val(phi), &all_succ_in),
        Objective::Until(a, b) => least(&val(a), &val(b), &all_succ_in),
    };
    start.iter().all(|s| win[s.0])
}

fn least(keep: &[bool], goal: &[bool], all_succ_in: &dyn Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut z = goal.to_vec();
    loop {
        let next: Vec<bool> = (0..z.len()).map(|s| goal[s] || (keep[s] && all_succ_in(&z, s))).collect();
        if next == z {
            return z;
        }
        z = next;
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{formula, tgc};
    use super::*;

    #[test]
    fn accepts_and_rejects_hand_strategies() {
        let m = tgc();
        let amas = m.amas().clone();
        let ctrl = amas.agent_id("Controller").unwrap();
        let mut s = Strategy::first(&amas, &[ctrl]);
        s.table[0][1] = amas.action_id("a2");
        assert!(check(&m, &formula(&m, "<<Controller>> G !(in1 & in2)"), &s));
        assert!(check(&m, &formula(&m, "<<Controller>> F in1"), &s));
        assert!(!check(&m, &formula(&m, "<<Controller>> F in2"), &s));
        // A strategy for a different coalition is rejected outright.
        assert!(!check(&m, &formula(&m, "<<Train1>> G true"), &s));
    }
}
