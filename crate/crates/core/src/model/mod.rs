//! Explicit global model of an AMAS.
//!
//! Global states are tuples of local states plus a proposition valuation.
//! An action fires when every owner has a transition with that label from its
//! current local state; all owners move together and everybody else stays put.
//! States without any enabled action get a single stutter loop labeled `ε`, so
//! every maximal path is infinite.

mod export;

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::amas::{ActionId, AgentId, Amas, PropId};

pub use export::{export_graph, EdgeExport, ExportFormat, GraphExport, StateExport};

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// Printed name of the stutter action.
pub const EPSILON: &str = "ε";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("action `{action}` is not enabled in {state}")]
    NotEnabled { action: String, state: String },
    #[error("state limit of {limit} exceeded")]
    StateLimitExceeded { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Action(ActionId),
    /// The reserved `ε` stutter step.
    Stutter,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState {
    pub locals: Box<[u32]>,
    /// Bit `p` is the value of proposition `p`.
    pub store: u64,
}

impl GlobalState {
    pub fn initial(amas: &Amas) -> Self {
        GlobalState {
            locals: amas.agents.iter().map(|a| a.init as u32).collect(),
            store: 0,
        }
    }

    #[inline]
    pub fn local(&self, agent: AgentId) -> usize {
        self.locals[agent.0] as usize
    }

    #[inline]
    pub fn holds(&self, prop: PropId) -> bool {
        self.store >> prop.0 & 1 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: StateId,
    pub label: Label,
    pub dst: StateId,
}

fn owners_ready(amas: &Amas, state: &GlobalState, action: ActionId) -> bool {
    let owners = amas.owners(action);
    !owners.is_empty()
        && owners
            .iter()
            .all(|&a| amas.agent(a).step(state.local(a), action).is_some())
}

/// Actions enabled at `state`, in action order; empty at a deadlock.
pub fn enabled_actions(amas: &Amas, state: &GlobalState) -> Vec<ActionId> {
    (0..amas.actions.len())
        .map(ActionId)
        .filter(|&a| owners_ready(amas, state, a))
        .collect()
}

/// Enabled actions as labels; `{ε}` exactly when no action is enabled.
pub fn enabled_global_actions(amas: &Amas, state: &GlobalState) -> Vec<Label> {
    let acts = enabled_actions(amas, state);
    if acts.is_empty() {
        vec![Label::Stutter]
    } else {
        acts.into_iter().map(Label::Action).collect()
    }
}

/// Fires `label` at `state`. Effects of all owners' transitions are applied in
/// agent order.
pub fn apply_action(amas: &Amas, state: &GlobalState, label: Label) -> Result<GlobalState, ModelError> {
    let action = match label {
        Label::Stutter => {
            if enabled_actions(amas, state).is_empty() {
                return Ok(state.clone());
            }
            return Err(ModelError::NotEnabled {
                action: EPSILON.into(),
                state: describe_state(amas, state),
            });
        }
        Label::Action(a) => a,
    };
    if !owners_ready(amas, state, action) {
        return Err(ModelError::NotEnabled {
            action: amas.actions[action.0].clone(),
            state: describe_state(amas, state),
        });
    }
    Ok(fire(amas, state, action))
}

/// `apply_action` without the enabledness check.
pub(crate) fn fire(amas: &Amas, state: &GlobalState, action: ActionId) -> GlobalState {
    let mut next = state.clone();
    for &owner in amas.owners(action) {
        let t = amas
            .agent(owner)
            .step(state.local(owner), action)
            .expect("owner enabled");
        next.locals[owner.0] = t.dst as u32;
        for &(p, v) in &t.effects {
            if v {
                next.store |= 1 << p.0;
            } else {
                next.store &= !(1 << p.0);
            }
        }
    }
    next
}

pub fn describe_state(amas: &Amas, state: &GlobalState) -> String {
    let names: Vec<&str> = amas
        .agents
        .iter()
        .zip(state.locals.iter())
        .map(|(a, &l)| a.locals[l as usize].as_str())
        .collect();
    format!("({})", names.join(","))
}

/// Explicit state graph; state 0 is the initial state.
#[derive(Debug, Clone)]
pub struct GlobalModel {
    amas: Arc<Amas>,
    states: Vec<GlobalState>,
    index: HashMap<GlobalState, StateId>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    /// agent -> local state -> sorted states with that local state.
    partitions: Vec<Vec<Vec<StateId>>>,
    state_reduced: Vec<bool>,
    edge_reduced: Vec<bool>,
}

/// Incremental construction shared by the BFS builder and the POR explorer.
pub(crate) struct ModelBuilder {
    amas: Arc<Amas>,
    states: Vec<GlobalState>,
    index: HashMap<GlobalState, StateId>,
    edges: Vec<Edge>,
    limit: usize,
}

impl ModelBuilder {
    pub(crate) fn new(amas: Arc<Amas>, limit: usize) -> Self {
        ModelBuilder {
            amas,
            states: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            limit,
        }
    }

    /// Returns the id of `state` and whether it was newly inserted.
    pub(crate) fn intern(&mut self, state: GlobalState) -> Result<(StateId, bool), ModelError> {
        if let Some(&id) = self.index.get(&state) {
            return Ok((id, false));
        }
        if self.states.len() >= self.limit {
            return Err(ModelError::StateLimitExceeded { limit: self.limit });
        }
        let id = StateId(self.states.len());
        self.index.insert(state.clone(), id);
        self.states.push(state);
        Ok((id, true))
    }

    pub(crate) fn state(&self, id: StateId) -> &GlobalState {
        &self.states[id.0]
    }

    pub(crate) fn find(&self, state: &GlobalState) -> Option<StateId> {
        self.index.get(state).copied()
    }

    pub(crate) fn push_edge(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    pub(crate) fn finish(self) -> GlobalModel {
        let n = self.states.len();
        let mut out = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.src.0].push(i);
        }
        let partitions = self
            .amas
            .agents
            .iter()
            .enumerate()
            .map(|(a, agent)| {
                let mut blocks = vec![Vec::new(); agent.locals.len()];
                for (s, st) in self.states.iter().enumerate() {
                    blocks[st.locals[a] as usize].push(StateId(s));
                }
                blocks
            })
            .collect();
        let m = self.edges.len();
        GlobalModel {
            amas: self.amas,
            states: self.states,
            index: self.index,
            edges: self.edges,
            out,
            partitions,
            state_reduced: vec![false; n],
            edge_reduced: vec![false; m],
        }
    }
}

/// Breadth-first closure from the initial state with the default state cap.
pub fn build_global_model(amas: Arc<Amas>) -> Result<GlobalModel, ModelError> {
    build_global_model_with_limit(amas, DEFAULT_STATE_LIMIT)
}

pub fn build_global_model_with_limit(amas: Arc<Amas>, limit: usize) -> Result<GlobalModel, ModelError> {
    let mut b = ModelBuilder::new(amas.clone(), limit);
    let (init, _) = b.intern(GlobalState::initial(&amas))?;
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        let state = b.state(s).clone();
        let enabled = enabled_actions(&amas, &state);
        if enabled.is_empty() {
            b.push_edge(Edge {
                src: s,
                label: Label::Stutter,
                dst: s,
            });
            continue;
        }
        for action in enabled {
            let (t, fresh) = b.intern(fire(&amas, &state, action))?;
            if fresh {
                queue.push_back(t);
            }
            b.push_edge(Edge {
                src: s,
                label: Label::Action(action),
                dst: t,
            });
        }
    }
    Ok(b.finish())
}

impl GlobalModel {
    pub fn amas(&self) -> &Arc<Amas> {
        &self.amas
    }

    pub fn initial(&self) -> StateId {
        StateId(0)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn state(&self, id: StateId) -> &GlobalState {
        &self.states[id.0]
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn find(&self, state: &GlobalState) -> Option<StateId> {
        self.index.get(state).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing edges of `s` in insertion order.
    pub fn successors(&self, s: StateId) -> impl Iterator<Item = &Edge> + '_ {
        self.out[s.0].iter().map(move |&e| &self.edges[e])
    }

    /// Indices into [`GlobalModel::edges`] of the outgoing edges of `s`.
    pub fn out_edges(&self, s: StateId) -> &[usize] {
        &self.out[s.0]
    }

    pub fn holds(&self, s: StateId, p: PropId) -> bool {
        self.states[s.0].holds(p)
    }

    pub fn local(&self, s: StateId, agent: AgentId) -> usize {
        self.states[s.0].local(agent)
    }

    pub fn describe(&self, s: StateId) -> String {
        describe_state(&self.amas, &self.states[s.0])
    }

    pub fn label_name(&self, label: Label) -> &str {
        match label {
            Label::Action(a) => &self.amas.actions[a.0],
            Label::Stutter => EPSILON,
        }
    }

    /// States whose local component for `agent` equals that of `s` (includes `s`).
    pub fn epistemic_class(&self, agent: AgentId, s: StateId) -> &[StateId] {
        &self.partitions[agent.0][self.local(s, agent)]
    }

    /// Blocks of the partition induced by `agent`'s local state; empty blocks
    /// (unreachable local states) are skipped.
    pub fn epistemic_partition(&self, agent: AgentId) -> impl Iterator<Item = &[StateId]> + '_ {
        self.partitions[agent.0]
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| b.as_slice())
    }

    /// Union of the members' epistemic classes of `s`, sorted.
    pub fn coalition_neighborhood(&self, coalition: &[AgentId], s: StateId) -> Vec<StateId> {
        let mut out: Vec<StateId> = coalition
            .iter()
            .flat_map(|&a| self.epistemic_class(a, s).iter().copied())
            .collect();
        if coalition.is_empty() {
            out.push(s);
        }
        out.sort();
        out.dedup();
        out
    }

    /// Local states of `agent` occurring in some state of the model, ascending.
    pub fn reachable_locals(&self, agent: AgentId) -> Vec<usize> {
        self.partitions[agent.0]
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_empty())
            .map(|(l, _)| l)
            .collect()
    }

    pub fn is_state_reduced(&self, s: StateId) -> bool {
        self.state_reduced[s.0]
    }

    pub fn is_edge_reduced(&self, edge: usize) -> bool {
        self.edge_reduced[edge]
    }

    /// Flags every state and edge of `sub` (a model over the same AMAS) in this
    /// model. Elements of `sub` missing here are ignored.
    pub fn mark_reduced(&mut self, sub: &GlobalModel) {
        self.state_reduced.iter_mut().for_each(|f| *f = false);
        self.edge_reduced.iter_mut().for_each(|f| *f = false);
        let mut wanted = HashSet::new();
        for e in sub.edges() {
            let (Some(src), Some(dst)) = (self.find(sub.state(e.src)), self.find(sub.state(e.dst))) else {
                continue;
            };
            wanted.insert((src, e.label, dst));
        }
        for s in sub.states() {
            if let Some(id) = self.find(sub.state(s)) {
                self.state_reduced[id.0] = true;
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if wanted.contains(&(e.src, e.label, e.dst)) {
                self.edge_reduced[i] = true;
            }
        }
    }

    pub fn clear_reduced(&mut self) {
        self.state_reduced.iter_mut().for_each(|f| *f = false);
        self.edge_reduced.iter_mut().for_each(|f| *f = false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TGC: &str = include_str!("../../../../fixtures/tgc.stv");

    fn tgc() -> Arc<Amas> {
        Arc::new(Amas::parse(TGC).unwrap())
    }

    fn st(amas: &Amas, names: [&str; 3], props: &[&str]) -> GlobalState {
        let locals = amas
            .agents
            .iter()
            .zip(names)
            .map(|(a, n)| a.local_index(n).unwrap() as u32)
            .collect();
        let store = props
            .iter()
            .map(|p| 1u64 << amas.prop_id(p).unwrap().0)
            .fold(0, |a, b| a | b);
        GlobalState { locals, store }
    }

    fn names(amas: &Amas, labels: &[Label]) -> Vec<String> {
        labels
            .iter()
            .map(|l| match l {
                Label::Action(a) => amas.actions[a.0].clone(),
                Label::Stutter => EPSILON.to_string(),
            })
            .collect()
    }

    #[test]
    fn enabled_at_initial() {
        let amas = tgc();
        let s = st(&amas, ["G", "W", "W"], &[]);
        assert_eq!(names(&amas, &enabled_global_actions(&amas, &s)), ["a1", "b1"]);
    }

    #[test]
    fn enabled_blocks_unsynchronised_action() {
        let amas = tgc();
        let s = st(&amas, ["R", "T", "W"], &["in1"]);
        assert_eq!(names(&amas, &enabled_global_actions(&amas, &s)), ["a2"]);
    }

    #[test]
    fn deadlock_has_only_stutter() {
        let amas = Amas::parse("AGENT A:\n INIT: x\n").unwrap();
        let s = GlobalState::initial(&amas);
        assert_eq!(enabled_global_actions(&amas, &s), vec![Label::Stutter]);
        assert_eq!(apply_action(&amas, &s, Label::Stutter).unwrap(), s);
    }

    #[test]
    fn apply_shared_action() {
        let amas = tgc();
        let s = st(&amas, ["G", "W", "W"], &[]);
        let a1 = Label::Action(amas.action_id("a1").unwrap());
        assert_eq!(
            apply_action(&amas, &s, a1).unwrap(),
            st(&amas, ["R", "T", "W"], &["in1"])
        );
    }

    #[test]
    fn apply_disabled_action() {
        let amas = tgc();
        let s = st(&amas, ["R", "T", "W"], &["in1"]);
        let b1 = Label::Action(amas.action_id("b1").unwrap());
        assert!(matches!(
            apply_action(&amas, &s, b1),
            Err(ModelError::NotEnabled { .. })
        ));
        assert!(apply_action(&amas, &s, Label::Stutter).is_err());
    }

    #[test]
    fn tgc_global_model() {
        let m = build_global_model(tgc()).unwrap();
        assert_eq!(m.num_states(), 8);
        assert_eq!(m.num_edges(), 14);
        let order: Vec<String> = m.states().map(|s| m.describe(s)).collect();
        assert_eq!(
            order,
            [
                "(G,W,W)", "(R,T,W)", "(R,W,T)", "(G,A,W)", "(G,W,A)", "(R,A,T)", "(R,T,A)",
                "(G,A,A)"
            ]
        );
    }

    #[test]
    fn two_locals_one_transition() {
        let amas = Arc::new(Amas::parse("AGENT A:\n INIT: x\n x -> y : go\n").unwrap());
        let m = build_global_model(amas).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.num_edges(), 2);
        let sink: Vec<_> = m.successors(StateId(1)).collect();
        assert_eq!(sink.len(), 1);
        assert_eq!(sink[0].label, Label::Stutter);
        assert_eq!(sink[0].dst, StateId(1));
    }

    #[test]
    fn single_state_model() {
        let amas = Arc::new(Amas::parse("AGENT A:\n INIT: x\n").unwrap());
        let m = build_global_model(amas).unwrap();
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.edges(), &[Edge { src: StateId(0), label: Label::Stutter, dst: StateId(0) }]);
    }

    #[test]
    fn state_limit() {
        assert_eq!(
            build_global_model_with_limit(tgc(), 5).unwrap_err(),
            ModelError::StateLimitExceeded { limit: 5 }
        );
    }

    #[test]
    fn epistemic_classes() {
        let amas = tgc();
        let m = build_global_model(amas.clone()).unwrap();
        let ctrl = amas.agent_id("Controller").unwrap();
        let train1 = amas.agent_id("Train1").unwrap();
        let desc = |v: &[StateId]| v.iter().map(|&s| m.describe(s)).collect::<Vec<_>>();
        assert_eq!(
            desc(m.epistemic_class(ctrl, StateId(0))),
            ["(G,W,W)", "(G,A,W)", "(G,W,A)", "(G,A,A)"]
        );
        assert_eq!(desc(m.epistemic_class(train1, StateId(1))), ["(R,T,W)", "(R,T,A)"]);
        let both = m.coalition_neighborhood(&[ctrl, train1], StateId(0));
        let mut union: Vec<StateId> = m
            .epistemic_class(ctrl, StateId(0))
            .iter()
            .chain(m.epistemic_class(train1, StateId(0)))
            .copied()
            .collect();
        union.sort();
        union.dedup();
        assert_eq!(both, union);
        assert_eq!(m.coalition_neighborhood(&[ctrl], StateId(0)), m.epistemic_class(ctrl, StateId(0)));
    }

    #[test]
    fn edges_agree_with_apply_action() {
        let amas = tgc();
        let m = build_global_model(amas.clone()).unwrap();
        for e in m.edges() {
            assert!(enabled_global_actions(&amas, m.state(e.src)).contains(&e.label));
            assert_eq!(&apply_action(&amas, m.state(e.src), e.label).unwrap(), m.state(e.dst));
        }
    }
}
