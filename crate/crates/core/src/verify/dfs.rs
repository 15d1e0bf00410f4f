//! Depth-first search over partial strategies.
//!
//! A node fixes the choices of some (member, local state) slots. Steps whose
//! coalition owners are all fixed to the step's action are kept in every
//! completion; a state whose every step is excluded stutters in every
//! completion. If that definite fragment already refutes the objective, the
//! node is closed and the slots responsible for the refutation are learned as
//! a nogood. Branching picks the first undecided slot met while exploring the
//! outcome from the start set, so slots never reached are never enumerated.

use std::collections::VecDeque;
use std::time::Instant;

use crate::amas::{ActionId, Formula, PropId};
use crate::model::{GlobalModel, StateId};
use crate::spec_lang::{BoolExpr, Objective};

use super::bruteforce::{slots, Slot};
use super::outcome::{eval_objective, prune_model};
use super::{normalized_coalition, Budget, Limits, Method, Statistics, Strategy, Truth, VerificationResult, VerifyError};

/// Slot index and chosen option index.
type Lit = (usize, usize);
type Core = Vec<Lit>;

enum Status {
    Kept,
    Excluded(usize),
    Open,
}

struct Search<'a> {
    model: &'a GlobalModel,
    formula: &'a Formula,
    coalition: Vec<crate::amas::AgentId>,
    slots: Vec<Slot>,
    /// Per model edge: slots that must pick the edge's action.
    constraints: Vec<Vec<(usize, ActionId)>>,
    start: Vec<StateId>,
    assignment: Vec<Option<usize>>,
    nogoods: Vec<Core>,
    budget: Budget,
    nodes: u64,
    leaves: u64,
}

const MAX_NOGOODS: usize = 4096;

enum Outcome {
    Win(Strategy),
    Refuted(Core),
}

fn holds(model: &GlobalModel, s: StateId, e: &BoolExpr<PropId>) -> bool {
    e.eval(&|p: &PropId| model.holds(s, *p))
}

/// A definite step and the literals forcing it.
struct Step {
    dst: StateId,
    reason: Core,
}

impl<'a> Search<'a> {
    fn new(model: &'a GlobalModel, formula: &'a Formula, limits: Limits) -> Self {
        let coalition = normalized_coalition(formula);
        let slots = slots(model, &coalition);
        let amas = model.amas();
        let mut slot_of: Vec<Vec<Option<usize>>> = coalition
            .iter()
            .map(|&a| vec![None; amas.agent(a).locals.len()])
            .collect();
        for (i, s) in slots.iter().enumerate() {
            slot_of[s.member][s.local] = Some(i);
        }
        let constraints = model
            .edges()
            .iter()
            .map(|e| match e.label {
                crate::model::Label::Stutter => Vec::new(),
                crate::model::Label::Action(act) => coalition
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| amas.owners(act).contains(a))
                    .filter_map(|(m, &a)| slot_of[m][model.local(e.src, a)].map(|slot| (slot, act)))
                    .collect(),
            })
            .collect();
        let start = model.coalition_neighborhood(&coalition, model.initial());
        let n = slots.len();
        Search {
            model,
            formula,
            coalition,
            slots,
            constraints,
            start,
            assignment: vec![None; n],
            nogoods: Vec::new(),
            budget: Budget::new(limits),
            nodes: 0,
            leaves: 0,
        }
    }

    fn status(&self, edge: usize) -> Status {
        let mut open = false;
        for &(slot, act) in &self.constraints[edge] {
            match self.assignment[slot] {
                Some(v) if self.slots[slot].options[v] != act => return Status::Excluded(slot),
                Some(_) => {}
                None => open = true,
            }
        }
        if open {
            Status::Open
        } else {
            Status::Kept
        }
    }

    fn lit(&self, slot: usize) -> Lit {
        (slot, self.assignment[slot].expect("assigned"))
    }

    /// Steps present in every completion of the current assignment.
    fn definite_steps(&self, s: StateId) -> Vec<Step> {
        let mut kept = Vec::new();
        let mut excluded = Vec::new();
        let mut open = false;
        for &i in self.model.out_edges(s) {
            let e = &self.model.edges()[i];
            match self.status(i) {
                Status::Kept => kept.push(Step {
                    dst: e.dst,
                    reason: self.constraints[i].iter().map(|&(slot, _)| self.lit(slot)).collect(),
                }),
                Status::Excluded(slot) => excluded.push(self.lit(slot)),
                Status::Open => open = true,
            }
        }
        if kept.is_empty() && !open {
            kept.push(Step { dst: s, reason: excluded });
        }
        kept
    }

    /// Looks for a refutation in the definite fragment.
    fn refute(&self) -> Option<Core> {
        let m = self.model;
        match &self.formula.objective {
            Objective::Next(phi) => {
                for &s in &self.start {
                    for step in self.definite_steps(s) {
                        if !holds(m, step.dst, phi) {
                            return Some(step.reason);
                        }
                    }
                }
                None
            }
            Objective::Always(phi) => self.refute_until(&|s| holds(m, s, phi), &|_| false, false),
            Objective::Eventually(phi) => self.refute_until(&|_| true, &|s| holds(m, s, phi), true),
            Objective::Until(a, b) => self.refute_until(&|s| holds(m, s, a), &|s| holds(m, s, b), true),
        }
    }

    /// Explores `keep ∧ ¬goal` states through definite steps. Reaching a
    /// `¬keep ∧ ¬goal` state refutes; with `cycles`, so does a definite cycle
    /// inside the region.
    fn refute_until(&self, keep: &dyn Fn(StateId) -> bool, goal: &dyn Fn(StateId) -> bool, cycles: bool) -> Option<Core> {
        let n = self.model.num_states();
        // parent[s] = (predecessor, reason index)
        let mut parent: Vec<Option<(StateId, usize)>> = vec![None; n];
        let mut in_region = vec![false; n];
        let mut reasons: Vec<Core> = Vec::new();
        let mut steps: Vec<Vec<(StateId, usize)>> = vec![Vec::new(); n];
        let mut region = Vec::new();
        let mut queue = VecDeque::new();
        let chain = |parent: &Vec<Option<(StateId, usize)>>, reasons: &Vec<Core>, mut s: StateId, core: &mut Core| {
            while let Some((p, r)) = parent[s.0] {
                core.extend(reasons[r].iter().copied());
                s = p;
            }
        };
        for &s in &self.start {
            if goal(s) || in_region[s.0] {
                continue;
            }
            if !keep(s) {
                return Some(Vec::new());
            }
            in_region[s.0] = true;
            queue.push_back(s);
        }
        while let Some(s) = queue.pop_front() {
            region.push(s);
            for step in self.definite_steps(s) {
                let t = step.dst;
                reasons.push(step.reason);
                let r = reasons.len() - 1;
                if goal(t) {
                    continue;
                }
                steps[s.0].push((t, r));
                if in_region[t.0] {
                    continue;
                }
                parent[t.0] = Some((s, r));
                if !keep(t) {
                    let mut core = Vec::new();
                    chain(&parent, &reasons, t, &mut core);
                    return Some(core);
                }
                in_region[t.0] = true;
                queue.push_back(t);
            }
        }
        if !cycles {
            return None;
        }
        let mut indeg = vec![0usize; n];
        for &s in &region {
            for &(t, _) in &steps[s.0] {
                indeg[t.0] += 1;
            }
        }
        let mut ready: Vec<StateId> = region.iter().copied().filter(|s| indeg[s.0] == 0).collect();
        let mut alive = in_region.clone();
        while let Some(s) = ready.pop() {
            alive[s.0] = false;
            for &(t, _) in &steps[s.0] {
                indeg[t.0] -= 1;
                if indeg[t.0] == 0 {
                    ready.push(t);
                }
            }
        }
        let first = *region.iter().find(|s| alive[s.0])?;
        // Every surviving state has a surviving predecessor; walk backwards
        // until a state repeats to extract one cycle.
        let mut pred: Vec<Option<(StateId, usize)>> = vec![None; n];
        for &s in region.iter().filter(|s| alive[s.0]) {
            for &(t, r) in &steps[s.0] {
                if alive[t.0] && pred[t.0].is_none() {
                    pred[t.0] = Some((s, r));
                }
            }
        }
        let mut seen = vec![false; n];
        let mut x = first;
        while !seen[x.0] {
            seen[x.0] = true;
            x = pred[x.0].expect("surviving state has a predecessor").0;
        }
        let mut core = Vec::new();
        let entry = x;
        loop {
            let (p, r) = pred[x.0].expect("on cycle");
            core.extend(reasons[r].iter().copied());
            x = p;
            if x == entry {
                break;
            }
        }
        chain(&parent, &reasons, entry, &mut core);
        Some(core)
    }

    /// First undecided slot on an open step reachable from the start set, or
    /// `None` when the outcome is fully determined.
    fn branch_slot(&self) -> Option<usize> {
        let n = self.model.num_states();
        let mut seen = vec![false; n];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for &s in &self.start {
            if !seen[s.0] {
                seen[s.0] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &i in self.model.out_edges(s) {
            let e = &self.model.edges()[i];
                match self.status(i) {
                    Status::Excluded(_) => continue,
                    Status::Open => {
                        return self.constraints[i]
                            .iter()
                            .map(|&(slot, _)| slot)
                            .find(|&slot| self.assignment[slot].is_none());
                    }
                    Status::Kept => {}
                }
                if !seen[e.dst.0] {
                    seen[e.dst.0] = true;
                    queue.push_back(e.dst);
                }
            }
        }
        None
    }

    fn strategy(&self) -> Strategy {
        let mut s = Strategy::first(self.model.amas(), &self.coalition);
        for (slot, v) in self.slots.iter().zip(&self.assignment) {
            if let Some(v) = v {
                s.table[slot.member][slot.local] = Some(slot.options[*v]);
            }
        }
        s
    }

    fn dominated(&self) -> Option<Core> {
        self.nogoods
            .iter()
            .find(|ng| ng.iter().all(|&(slot, v)| self.assignment[slot] == Some(v)))
            .cloned()
    }

    fn learn(&mut self, core: &Core) {
        if self.nogoods.len() < MAX_NOGOODS {
            self.nogoods.push(core.clone());
        }
    }

    fn search(&mut self) -> Result<Outcome, VerifyError> {
        self.budget.tick()?;
        self.nodes += 1;
        if self.nodes > self.budget.cap() {
            return Err(VerifyError::StrategySpaceExceeded {
                size: format!(">{}", self.budget.cap()),
                cap: self.budget.cap(),
            });
        }
        if let Some(core) = self.dominated() {
            return Ok(Outcome::Refuted(core));
        }
        if let Some(mut core) = self.refute() {
            core.sort();
            core.dedup();
            self.learn(&core);
            return Ok(Outcome::Refuted(core));
        }
        let Some(slot) = self.branch_slot() else {
            self.leaves += 1;
            let strategy = self.strategy();
            let sub = prune_model(self.model, &self.coalition, &strategy);
            if eval_objective(&sub, &self.start, &self.formula.objective) {
                return Ok(Outcome::Win(strategy));
            }
            debug_assert!(false, "determined outcome escaped refutation");
            let core = (0..self.slots.len())
                .filter(|&s| self.assignment[s].is_some())
                .map(|s| self.lit(s))
                .collect();
            return Ok(Outcome::Refuted(core));
        };
        let mut combined: Core = Vec::new();
        for v in 0..self.slots[slot].options.len() {
            self.assignment[slot] = Some(v);
            let r = self.search();
            self.assignment[slot] = None;
            match r? {
                Outcome::Win(s) => return Ok(Outcome::Win(s)),
                Outcome::Refuted(core) => {
                    if !core.iter().any(|&(s, _)| s == slot) {
                        // The refutation does not depend on this slot, so the
                        // remaining options fail the same way.
                        return Ok(Outcome::Refuted(core));
                    }
                    combined.extend(core.into_iter().filter(|&(s, _)| s != slot));
                }
            }
        }
        combined.sort();
        combined.dedup();
        self.learn(&combined);
        Ok(Outcome::Refuted(combined))
    }
}

/// Exact search with pruning; agrees with brute force on the truth value.
pub fn verify_dfs(model: &GlobalModel, formula: &Formula, limits: Limits) -> Result<VerificationResult, VerifyError> {
    let started = Instant::now();
    let mut search = Search::new(model, formula, limits);
    let outcome = search.search()?;
    let (truth, strategy) = match outcome {
        Outcome::Win(s) => (Truth::True, Some(s)),
        Outcome::Refuted(_) => (Truth::False, None),
    };
    Ok(VerificationResult {
        truth,
        strategy,
        method: Method::Dfs,
        statistics: Statistics {
            states: model.num_states(),
            strategies_examined: search.leaves,
            nodes: search.nodes,
            elapsed: started.elapsed(),
        },
    })
}
