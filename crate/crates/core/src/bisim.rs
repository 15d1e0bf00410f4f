//! Checking a user-supplied relation between two global models for being an
//! A-bisimulation.
//!
//! The coalition is given by position: agent `i` of the left model stands for
//! agent `i` of the right model. Each direction is checked as a simulation,
//! scanning pairs in input order and conditions in the order valuation,
//! epistemic, strategic; the first failure is reported.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::joint::{joint_choices, JointChoice};

use crate::amas::{AgentId, Amas};
use crate::joint::choice_successors;
use crate::model::{GlobalModel, StateId, EPSILON};
use crate::spec_lang::{Descriptor, RelationSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("descriptor {descriptor} matches no reachable state of the {side} model")]
    UnmatchedDescriptor { descriptor: String, side: Side },
    #[error("unknown agent `{0}` in the coalition")]
    UnknownAgent(String),
    #[error("coalition position {position} has no counterpart: the right model has {agents} agents")]
    MissingCounterpart { position: usize, agents: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Candidate relation over state indices plus the positional coalition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRelation {
    pub pairs: Vec<(StateId, StateId)>,
    pub coalition: Vec<usize>,
}

impl CandidateRelation {
    /// Expands every descriptor to all states with that local tuple. The
    /// coalition comes from `coalition` when given, else from the relation
    /// file's `COALITION:` line.
    pub fn resolve(
        left: &GlobalModel,
        right: &GlobalModel,
        spec: &RelationSpec,
        coalition: Option<&[String]>,
    ) -> Result<Self, BisimError> {
        let names = coalition.unwrap_or(&spec.coalition);
        let mut positions = Vec::new();
        for name in names {
            let a = left
                .amas()
                .agent_id(name)
                .ok_or_else(|| BisimError::UnknownAgent(name.clone()))?;
            if a.0 >= right.amas().agents.len() {
                return Err(BisimError::MissingCounterpart {
                    position: a.0,
                    agents: right.amas().agents.len(),
                });
            }
            positions.push(a.0);
        }
        positions.sort();
        positions.dedup();
        let li = index_by_locals(left);
        let ri = index_by_locals(right);
        let mut pairs = Vec::new();
        let mut seen = HashSet::new();
        for (l, r) in &spec.pairs {
            let ls = expand(left.amas(), &li, l, Side::Left)?;
            let rs = expand(right.amas(), &ri, r, Side::Right)?;
            for &a in ls {
                for &b in rs {
                    if seen.insert((a, b)) {
                        pairs.push((a, b));
                    }
                }
            }
        }
        Ok(CandidateRelation {
            pairs,
            coalition: positions,
        })
    }

    /// Identity on all states of `model`.
    pub fn identity(model: &GlobalModel, coalition: &[AgentId]) -> Self {
        CandidateRelation {
            pairs: model.states().map(|s| (s, s)).collect(),
            coalition: coalition.iter().map(|a| a.0).collect(),
        }
    }

    pub fn inverted(&self) -> Self {
        CandidateRelation {
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
            coalition: self.coalition.clone(),
        }
    }
}

fn index_by_locals(model: &GlobalModel) -> HashMap<Vec<u32>, Vec<StateId>> {
    let mut m: HashMap<Vec<u32>, Vec<StateId>> = HashMap::new();
    for s in model.states() {
        m.entry(model.state(s).locals.to_vec()).or_default().push(s);
    }
    m
}

fn expand<'a>(
    amas: &Amas,
    index: &'a HashMap<Vec<u32>, Vec<StateId>>,
    d: &Descriptor,
    side: Side,
) -> Result<&'a [StateId], BisimError> {
    let unmatched = || BisimError::UnmatchedDescriptor {
        descriptor: d.to_string(),
        side,
    };
    if d.0.len() != amas.agents.len() {
        return Err(unmatched());
    }
    let key: Option<Vec<u32>> = amas
        .agents
        .iter()
        .zip(&d.0)
        .map(|(a, name)| a.local_index(name).map(|l| l as u32))
        .collect();
    key.and_then(|k| index.get(&k))
        .map(|v| v.as_slice())
        .ok_or_else(unmatched)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Initial,
    Valuation,
    Epistemic,
    Strategic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    L2R,
    R2L,
}

/// Failed condition with its witness. `pair` is always in (left, right)
/// orientation, whatever the direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    pub direction: Direction,
    pub pair: (StateId, StateId),
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimVerdict {
    pub violation: Option<Violation>,
}

impl BisimVerdict {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }

    /// `{"ok":true}` or `{"ok":false,"condition":..,"direction":..,"pair":[..],"detail":..}`.
    pub fn to_json(&self, left: &GlobalModel, right: &GlobalModel) -> serde_json::Value {
        match &self.violation {
            None => serde_json::json!({ "ok": true }),
            Some(v) => serde_json::json!({
                "ok": false,
                "condition": v.condition,
                "direction": v.direction,
                "pair": [left.describe(v.pair.0), right.describe(v.pair.1)],
                "detail": v.detail,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BisimOptions {
    /// Additionally require one response per (member locals, joint choice).
    pub strict: bool,
}

fn choice_name(amas: &Amas, chi: &[Option<crate::amas::ActionId>]) -> String {
    chi.iter()
        .map(|c| c.map_or(EPSILON, |a| amas.actions[a.0].as_str()))
        .collect::<Vec<_>>()
        .join(",")
}

/// Successor sets of a state under each of its joint choices.
fn responses(model: &GlobalModel, coalition: &[AgentId], s: StateId) -> Vec<(JointChoice, Vec<StateId>)> {
    joint_choices(model, coalition, s)
        .into_iter()
        .map(|chi| {
            let succ = choice_successors(model, coalition, s, &chi);
            (chi, succ)
        })
        .collect()
}

/// For each left choice at `q`, the right choices at `q2` that match it.
fn matching(
    left: &GlobalModel,
    right: &GlobalModel,
    lc: &[AgentId],
    rc: &[AgentId],
    related: &HashSet<(StateId, StateId)>,
    q: StateId,
    q2: StateId,
) -> Vec<(JointChoice, Vec<JointChoice>)> {
    let rres = responses(right, rc, q2);
    responses(left, lc, q)
        .into_iter()
        .map(|(chi, lsucc)| {
            let ok: Vec<JointChoice> = rres
                .iter()
                .filter(|(_, rsucc)| rsucc.iter().all(|&t2| lsucc.iter().any(|&t| related.contains(&(t, t2)))))
                .map(|(chi2, _)| chi2.clone())
                .collect();
            (chi, ok)
        })
        .collect()
}

/// Checks the three conditions for every pair, left simulated by right.
pub fn check_simulation(
    left: &GlobalModel,
    right: &GlobalModel,
    pairs: &[(StateId, StateId)],
    coalition: &[usize],
    options: BisimOptions,
) -> Option<Violation> {
    simulate(left, right, pairs, coalition, options, Direction::L2R)
}

fn simulate(
    left: &GlobalModel,
    right: &GlobalModel,
    pairs: &[(StateId, StateId)],
    coalition: &[usize],
    options: BisimOptions,
    direction: Direction,
) -> Option<Violation> {
    let lc: Vec<AgentId> = coalition.iter().map(|&i| AgentId(i)).collect();
    let rc = lc.clone();
    let related: HashSet<(StateId, StateId)> = pairs.iter().copied().collect();
    let common: Vec<(usize, usize, &str)> = left
        .amas()
        .propositions
        .iter()
        .enumerate()
        .filter_map(|(i, p)| right.amas().prop_id(p).map(|j| (i, j.0, p.as_str())))
        .collect();
    let orient = |q: StateId, q2: StateId| match direction {
        Direction::L2R => (q, q2),
        Direction::R2L => (q2, q),
    };
    let violation = |condition, q, q2, detail: String| Violation {
        condition,
        direction,
        pair: orient(q, q2),
        detail,
    };

    let per_pair: Vec<Option<Violation>> = pairs
        .par_iter()
        .map(|&(q, q2)| {
            let (ls, rs) = (left.state(q), right.state(q2));
            for &(i, j, name) in &common {
                if (ls.store >> i & 1) != (rs.store >> j & 1) {
                    return Some(violation(Condition::Valuation, q, q2, name.to_string()));
                }
            }
            for &a in &lc {
                for &r2 in right.epistemic_class(a, q2) {
                    if !left.epistemic_class(a, q).iter().any(|&r| related.contains(&(r, r2))) {
                        return Some(violation(Condition::Epistemic, q, q2, right.describe(r2)));
                    }
                }
            }
            for (chi, ok) in matching(left, right, &lc, &rc, &related, q, q2) {
                if ok.is_empty() {
                    return Some(violation(Condition::Strategic, q, q2, choice_name(left.amas(), &chi)));
                }
            }
            None
        })
        .collect();
    if let Some(v) = per_pair.into_iter().flatten().next() {
        return Some(v);
    }
    if !options.strict {
        return None;
    }
    // One response per left (member locals, choice), shared by all pairs.
    let mut uniform: HashMap<(Vec<usize>, JointChoice), Vec<JointChoice>> = HashMap::new();
    for &(q, q2) in pairs {
        let key: Vec<usize> = lc.iter().map(|&a| left.local(q, a)).collect();
        for (chi, ok) in matching(left, right, &lc, &rc, &related, q, q2) {
            let entry = uniform.entry((key.clone(), chi.clone())).or_insert_with(|| ok.clone());
            entry.retain(|c| ok.contains(c));
            if entry.is_empty() {
                return Some(violation(
                    Condition::Strategic,
                    q,
                    q2,
                    format!("no uniform response to {}", choice_name(left.amas(), &chi)),
                ));
            }
        }
    }
    None
}

/// Initial pair, then left-to-right, then right-to-left on the inverted pairs.
pub fn check_a_bisimulation(
    left: &GlobalModel,
    right: &GlobalModel,
    relation: &CandidateRelation,
    options: BisimOptions,
) -> BisimVerdict {
    let init = (left.initial(), right.initial());
    if !relation.pairs.contains(&init) {
        return BisimVerdict {
            violation: Some(Violation {
                condition: Condition::Initial,
                direction: Direction::L2R,
                pair: init,
                detail: "initial pair missing".into(),
            }),
        };
    }
    let violation = simulate(left, right, &relation.pairs, &relation.coalition, options, Direction::L2R)
        .or_else(|| {
            simulate(
                right,
                left,
                &relation.inverted().pairs,
                &relation.coalition,
                options,
                Direction::R2L,
            )
        });
    BisimVerdict { violation }
}
