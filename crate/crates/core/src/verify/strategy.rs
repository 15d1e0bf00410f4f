use serde_json::{Map, Value};

use crate::amas::{ActionId, AgentId, Amas};
use crate::model::EPSILON;

/// Memoryless uniform strategy: for each coalition member, one choice per
/// local state. `None` is `ε` and only occurs at locals without outgoing
/// transitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub coalition: Vec<AgentId>,
    pub table: Vec<Vec<Option<ActionId>>>,
}

impl Strategy {
    /// The strategy picking the first declared action everywhere.
    pub fn first(amas: &Amas, coalition: &[AgentId]) -> Self {
        let table = coalition
            .iter()
            .map(|&a| {
                let agent = amas.agent(a);
                (0..agent.locals.len()).map(|l| agent.choices(l).next()).collect()
            })
            .collect();
        Strategy {
            coalition: coalition.to_vec(),
            table,
        }
    }

    /// Choice of the `member`-th coalition agent at local state `local`.
    pub fn choice(&self, member: usize, local: usize) -> Option<ActionId> {
        self.table[member][local]
    }

    /// Choice of `agent` at `local`; `None` when `agent` is not a member.
    pub fn action_for(&self, agent: AgentId, local: usize) -> Option<Option<ActionId>> {
        let i = self.coalition.iter().position(|&a| a == agent)?;
        Some(self.table[i][local])
    }

    /// Every entry labels an outgoing transition of its local state, or is `ε`
    /// exactly where there is none.
    pub fn is_well_formed(&self, amas: &Amas) -> bool {
        self.coalition.len() == self.table.len()
            && self.coalition.iter().zip(&self.table).all(|(&a, row)| {
                let agent = amas.agent(a);
                row.len() == agent.locals.len()
                    && row.iter().enumerate().all(|(l, c)| match c {
                        Some(act) => agent.step(l, *act).is_some(),
                        None => !agent.has_choices(l),
                    })
            })
    }

    /// `{"Agent":{"local":"action",...},...}` in declaration order.
    pub fn to_json(&self, amas: &Amas) -> Value {
        let mut out = Map::new();
        for (&a, row) in self.coalition.iter().zip(&self.table) {
            let agent = amas.agent(a);
            let mut m = Map::new();
            for (l, c) in row.iter().enumerate() {
                let name = c.map_or(EPSILON, |act| amas.actions[act.0].as_str());
                m.insert(agent.locals[l].clone(), Value::String(name.to_string()));
            }
            out.insert(agent.name.clone(), Value::Object(m));
        }
        Value::Object(out)
    }

    /// Inverse of [`Strategy::to_json`]. Locals absent from the object get the
    /// first declared action.
    pub fn from_json(amas: &Amas, coalition: &[AgentId], value: &Value) -> Result<Self, String> {
        let obj = value.as_object().ok_or("strategy must be an object")?;
        let mut s = Strategy::first(amas, coalition);
        for (name, row) in obj {
            let a = amas.agent_id(name).ok_or_else(|| format!("unknown agent {name}"))?;
            let i = coalition
                .iter()
                .position(|&c| c == a)
                .ok_or_else(|| format!("{name} is not in the coalition"))?;
            let row = row.as_object().ok_or("strategy rows must be objects")?;
            let agent = amas.agent(a);
            for (local, act) in row {
                let l = agent
                    .local_index(local)
                    .ok_or_else(|| format!("unknown local state {name}.{local}"))?;
                let act = act.as_str().ok_or("actions must be strings")?;
                s.table[i][l] = if act == EPSILON {
                    None
                } else {
                    Some(amas.action_id(act).ok_or_else(|| format!("unknown action {act}"))?)
                };
            }
        }
        if !s.is_well_formed(amas) {
            return Err("strategy picks an action unavailable at its local state".into());
        }
        Ok(s)
    }
}
