//! Validated asynchronous multi-agent system: local automata with resolved
//! identifiers, action owner sets and proposition metadata.

use std::fmt;

use crate::spec_lang::{self, FormulaAst, Objective, Pos, SpecError};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(
    /// Position of an agent in declaration order.
    AgentId
);
id_type!(
    /// Position of an action in order of first appearance.
    ActionId
);
id_type!(
    /// Position of a proposition in the `PROPOSITIONS` list.
    PropId
);

/// Maximum number of propositions; the valuation is stored as a bit mask.
pub const MAX_PROPOSITIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTransition {
    pub src: usize,
    pub dst: usize,
    pub action: ActionId,
    pub effects: Vec<(PropId, bool)>,
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub name: String,
    pub locals: Vec<String>,
    pub init: usize,
    pub transitions: Vec<LocalTransition>,
    /// Transition indices leaving each local state, in declaration order.
    outgoing: Vec<Vec<usize>>,
    /// `locals.len() * num_actions` table of transition indices.
    step_table: Vec<Option<u32>>,
    num_actions: usize,
}

impl Agent {
    /// The unique transition labeled `action` leaving `local`, if any.
    #[inline]
    pub fn step(&self, local: usize, action: ActionId) -> Option<&LocalTransition> {
        self.step_table[local * self.num_actions + action.0].map(|t| &self.transitions[t as usize])
    }

    /// Actions labeling transitions out of `local`, in declaration order.
    pub fn choices(&self, local: usize) -> impl Iterator<Item = ActionId> + '_ {
        self.outgoing[local]
            .iter()
            .map(move |&t| self.transitions[t].action)
    }

    pub fn has_choices(&self, local: usize) -> bool {
        !self.outgoing[local].is_empty()
    }

    pub fn local_index(&self, name: &str) -> Option<usize> {
        self.locals.iter().position(|l| l == name)
    }
}

/// Formula with agents and propositions resolved against one [`Amas`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    pub coalition: Vec<AgentId>,
    pub objective: Objective<PropId>,
}

impl Formula {
    pub fn props(&self) -> Vec<PropId> {
        let mut v: Vec<PropId> = self.objective.props().into_iter().copied().collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone)]
pub struct Amas {
    pub agents: Vec<Agent>,
    pub actions: Vec<String>,
    /// Sorted owner set of every action.
    pub owners: Vec<Vec<AgentId>>,
    pub propositions: Vec<String>,
    pub persistent: Vec<bool>,
    /// `COALITION` line or the formula's coalition; may be empty.
    pub coalition: Vec<AgentId>,
    pub formula: Option<Formula>,
}

impl Amas {
    /// Parses and validates model text in one step.
    pub fn parse(text: &str) -> Result<Amas, SpecError> {
        spec_lang::validate(&spec_lang::parse_spec(text)?)
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a.name == name).map(AgentId)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(ActionId)
    }

    pub fn prop_id(&self, name: &str) -> Option<PropId> {
        self.propositions.iter().position(|p| p == name).map(PropId)
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.0]
    }

    pub fn owners(&self, action: ActionId) -> &[AgentId] {
        &self.owners[action.0]
    }

    pub fn is_private_to(&self, action: ActionId, agent: AgentId) -> bool {
        self.owners[action.0] == [agent]
    }

    pub fn persistent_ids(&self) -> Vec<PropId> {
        (0..self.propositions.len())
            .filter(|&p| self.persistent[p])
            .map(PropId)
            .collect()
    }

    pub fn resolve_agents(&self, names: &[String]) -> Result<Vec<AgentId>, SpecError> {
        names
            .iter()
            .map(|n| {
                self.agent_id(n).ok_or_else(|| SpecError::UnknownReference {
                    pos: Pos::new(1, 1),
                    what: format!("agent `{n}`"),
                })
            })
            .collect()
    }

    pub fn resolve_props(&self, names: &[String]) -> Result<Vec<PropId>, SpecError> {
        names
            .iter()
            .map(|n| {
                self.prop_id(n).ok_or_else(|| SpecError::UnknownReference {
                    pos: Pos::new(1, 1),
                    what: format!("proposition `{n}`"),
                })
            })
            .collect()
    }

    pub fn resolve_formula(&self, ast: &FormulaAst) -> Result<Formula, SpecError> {
        let coalition = self.resolve_agents(&ast.coalition)?;
        let objective = ast.objective.try_map(&mut |p: &String| {
            self.prop_id(p).ok_or_else(|| SpecError::UnknownReference {
                pos: Pos::new(1, 1),
                what: format!("proposition `{p}`"),
            })
        })?;
        Ok(Formula {
            coalition,
            objective,
        })
    }

    pub(crate) fn build(
        agents: Vec<(String, Vec<String>, usize, Vec<LocalTransition>)>,
        actions: Vec<String>,
        propositions: Vec<String>,
        persistent: Vec<bool>,
    ) -> Amas {
        let num_actions = actions.len();
        let mut owners = vec![Vec::new(); num_actions];
        let agents: Vec<Agent> = agents
            .into_iter()
            .enumerate()
            .map(|(i, (name, locals, init, transitions))| {
                let mut outgoing = vec![Vec::new(); locals.len()];
                let mut step_table = vec![None; locals.len() * num_actions];
                for (t_idx, t) in transitions.iter().enumerate() {
                    outgoing[t.src].push(t_idx);
                    step_table[t.src * num_actions + t.action.0] = Some(t_idx as u32);
                    if !owners[t.action.0].contains(&AgentId(i)) {
                        owners[t.action.0].push(AgentId(i));
                    }
                }
                Agent {
                    name,
                    locals,
                    init,
                    transitions,
                    outgoing,
                    step_table,
                    num_actions,
                }
            })
            .collect();
        for o in &mut owners {
            o.sort();
        }
        Amas {
            agents,
            actions,
            owners,
            propositions,
            persistent,
            coalition: Vec::new(),
            formula: None,
        }
    }
}

impl Amas {
    /// Renders a resolved formula with this model's agent and proposition names.
    pub fn display_formula(&self, formula: &Formula) -> String {
        let names: Vec<&str> = formula
            .coalition
            .iter()
            .map(|a| self.agents[a.0].name.as_str())
            .collect();
        let objective = formula
            .objective
            .try_map(&mut |p: &PropId| Ok::<_, fmt::Error>(self.propositions[p.0].clone()))
            .expect("infallible");
        format!("<<{}>> {}", names.join(","), objective)
    }
}
