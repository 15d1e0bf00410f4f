//! Partial-order reduction with single-agent ample sets.
//!
//! At each state the explorer tries to defer everything except the enabled
//! actions of one agent `j` outside the coalition. This is allowed when every
//! transition leaving `j`'s current local state is private to `j`, none of them
//! writes a visible proposition, and none writes a proposition that another
//! agent also writes. Such actions commute with every other action of the
//! network and cannot be disabled by them. The cycle proviso (C3) is enforced
//! on the DFS stack, either conservatively or in the weaker variant that
//! accepts a cycle as soon as some state on it is fully expanded.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::amas::{ActionId, AgentId, Amas, Formula, PropId};
use crate::model::{
    enabled_actions, fire, Edge, GlobalModel, GlobalState, Label, ModelBuilder, ModelError, StateId,
    DEFAULT_STATE_LIMIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C3Mode {
    /// Any ample successor on the DFS stack forces full expansion.
    #[default]
    Safe,
    /// Full expansion only when the closed stack segment has no fully expanded state.
    Aggressive,
}

impl fmt::Display for C3Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            C3Mode::Safe => "safe",
            C3Mode::Aggressive => "aggressive",
        })
    }
}

impl FromStr for C3Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "safe" => Ok(C3Mode::Safe),
            "aggressive" => Ok(C3Mode::Aggressive),
            other => Err(format!("unknown C3 mode `{other}` (expected safe or aggressive)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionParams {
    pub coalition: Vec<AgentId>,
    /// Sorted; always includes the persistent propositions.
    pub visible: Vec<PropId>,
    pub c3: C3Mode,
}

impl ReductionParams {
    pub fn new(amas: &Amas, coalition: Vec<AgentId>, visible: Vec<PropId>, c3: C3Mode) -> Self {
        let mut visible = visible;
        visible.extend(amas.persistent_ids());
        visible.sort();
        visible.dedup();
        let mut coalition = coalition;
        coalition.sort();
        coalition.dedup();
        ReductionParams {
            coalition,
            visible,
            c3,
        }
    }

    /// Coalition of the formula, visible set = its propositions plus persistent ones.
    pub fn for_formula(amas: &Amas, formula: &Formula, c3: C3Mode) -> Self {
        ReductionParams::new(amas, formula.coalition.clone(), formula.props(), c3)
    }
}

/// Ample set chosen at one explored state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmpleInfo {
    pub ample: Vec<ActionId>,
    pub fully_expanded: bool,
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    /// Explored states and edges, numbered in DFS discovery order.
    pub model: GlobalModel,
    /// Indexed by state of `model`.
    pub ample: Vec<AmpleInfo>,
}

/// True iff no transition labeled `action` writes a proposition in `visible`.
pub fn invisible(amas: &Amas, action: ActionId, visible: &[PropId]) -> bool {
    amas.owners(action).iter().all(|&owner| {
        amas.agent(owner)
            .transitions
            .iter()
            .filter(|t| t.action == action)
            .all(|t| t.effects.iter().all(|(p, _)| !visible.contains(p)))
    })
}

fn writes(amas: &Amas, agent: AgentId, action: ActionId) -> impl Iterator<Item = PropId> + '_ {
    amas.agent(agent)
        .transitions
        .iter()
        .filter(move |t| t.action == action)
        .flat_map(|t| t.effects.iter().map(|(p, _)| *p))
}

/// Propositions written by some transition of an agent other than `agent`.
fn written_by_others(amas: &Amas, agent: AgentId) -> HashSet<PropId> {
    amas.agents
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != agent.0)
        .flat_map(|(_, a)| a.transitions.iter().flat_map(|t| t.effects.iter().map(|(p, _)| *p)))
        .collect()
}

struct AmpleOracle<'a> {
    amas: &'a Amas,
    params: &'a ReductionParams,
    others_write: Vec<HashSet<PropId>>,
}

impl<'a> AmpleOracle<'a> {
    fn new(amas: &'a Amas, params: &'a ReductionParams) -> Self {
        let others_write = (0..amas.agents.len())
            .map(|a| written_by_others(amas, AgentId(a)))
            .collect();
        AmpleOracle {
            amas,
            params,
            others_write,
        }
    }

    fn agent_qualifies(&self, j: AgentId, state: &GlobalState) -> bool {
        let agent = self.amas.agent(j);
        let local = state.local(j);
        agent.has_choices(local)
            && agent.choices(local).all(|a| {
                self.amas.is_private_to(a, j)
                    && invisible(self.amas, a, &self.params.visible)
                    && writes(self.amas, j, a).all(|p| !self.others_write[j.0].contains(&p))
            })
    }

    fn candidate(&self, state: &GlobalState, enabled: &[ActionId]) -> AmpleInfo {
        let full = AmpleInfo {
            ample: enabled.to_vec(),
            fully_expanded: true,
        };
        if enabled.is_empty() {
            return full;
        }
        for j in (0..self.amas.agents.len()).map(AgentId) {
            if self.params.coalition.contains(&j) || !self.agent_qualifies(j, state) {
                continue;
            }
            let ample: Vec<ActionId> = enabled
                .iter()
                .copied()
                .filter(|&a| self.amas.owners(a).contains(&j))
                .collect();
            let fully_expanded = ample.len() == enabled.len();
            return AmpleInfo {
                ample,
                fully_expanded,
            };
        }
        full
    }
}

/// Ample set for `state` before the cycle proviso is applied.
///
/// Picks, in declaration order, the first agent outside the coalition whose
/// transitions from its current local state are all private, invisible and
/// free of write conflicts; falls back to every enabled action.
pub fn ample_candidate(amas: &Amas, state: &GlobalState, params: &ReductionParams) -> AmpleInfo {
    let enabled = enabled_actions(amas, state);
    AmpleOracle::new(amas, params).candidate(state, &enabled)
}

pub fn build_reduced_model(amas: Arc<Amas>, params: &ReductionParams) -> Result<ReducedModel, ModelError> {
    build_reduced_model_with_limit(amas, params, DEFAULT_STATE_LIMIT)
}

struct Frame {
    state: StateId,
    succ: Vec<(Label, GlobalState)>,
    next: usize,
}

pub fn build_reduced_model_with_limit(
    amas: Arc<Amas>,
    params: &ReductionParams,
    limit: usize,
) -> Result<ReducedModel, ModelError> {
    let oracle = AmpleOracle::new(&amas, params);
    let mut b = ModelBuilder::new(amas.clone(), limit);
    let mut ample: Vec<AmpleInfo> = Vec::new();
    // Position on the DFS stack, if currently on it.
    let mut stack_pos: Vec<Option<usize>> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();

    let (init, _) = b.intern(GlobalState::initial(&amas))?;
    let mut pending = Some(init);

    loop {
        if let Some(s) = pending.take() {
            let state = b.state(s).clone();
            let enabled = enabled_actions(&amas, &state);
            let mut info = oracle.candidate(&state, &enabled);
            let mut succ: Vec<(Label, GlobalState)> = info
                .ample
                .iter()
                .map(|&a| (Label::Action(a), fire(&amas, &state, a)))
                .collect();
            if !info.fully_expanded {
                let top = stack.len();
                let closes_bad_cycle = succ.iter().any(|(_, t)| {
                    // A self-loop closes a cycle made of `s` alone, which is
                    // not fully expanded.
                    if b.find(t) == Some(s) {
                        return true;
                    }
                    let Some(pos) = b.find(t).and_then(|id| stack_pos.get(id.0).copied().flatten()) else {
                        return false;
                    };
                    match params.c3 {
                        C3Mode::Safe => true,
                        C3Mode::Aggressive => !stack[pos..top]
                            .iter()
                            .any(|f| ample[f.state.0].fully_expanded),
                    }
                });
                if closes_bad_cycle {
                    info = AmpleInfo {
                        ample: enabled.clone(),
                        fully_expanded: true,
                    };
                    succ = enabled
                        .iter()
                        .map(|&a| (Label::Action(a), fire(&amas, &state, a)))
                        .collect();
                }
            }
            if enabled.is_empty() {
                succ.push((Label::Stutter, state));
            }
            if ample.len() <= s.0 {
                ample.resize(s.0 + 1, AmpleInfo { ample: Vec::new(), fully_expanded: true });
                stack_pos.resize(s.0 + 1, None);
            }
            ample[s.0] = info;
            stack_pos[s.0] = Some(stack.len());
            stack.push(Frame { state: s, succ, next: 0 });
        }

        let Some(frame) = stack.last_mut() else { break };
        if frame.next == frame.succ.len() {
            stack_pos[frame.state.0] = None;
            stack.pop();
            continue;
        }
        let (label, target) = frame.succ[frame.next].clone();
        frame.next += 1;
        let src = frame.state;
        let (t, fresh) = b.intern(target)?;
        b.push_edge(Edge { src, label, dst: t });
        if fresh {
            pending = Some(t);
        }
    }

    Ok(ReducedModel {
        model: b.finish(),
        ample,
    })
}
