use crate::amas::{ActionId, Amas, LocalTransition, PropId, MAX_PROPOSITIONS};

use super::{DeclKey, SpecDocument, SpecError};

/// Turns a parsed document into an immutable [`Amas`].
pub fn validate(doc: &SpecDocument) -> Result<Amas, SpecError> {
    if doc.propositions.len() > MAX_PROPOSITIONS {
        let pos = doc
            .spans
            .get(&DeclKey::Proposition(doc.propositions[MAX_PROPOSITIONS].clone()));
        return Err(SpecError::TooManyPropositions {
            pos,
            max: MAX_PROPOSITIONS,
        });
    }
    let persistent: Vec<bool> = doc
        .propositions
        .iter()
        .map(|p| doc.persistent.contains(p))
        .collect();
    let prop_id = |name: &str| {
        PropId(
            doc.propositions
                .iter()
                .position(|p| p == name)
                .expect("parser resolved propositions"),
        )
    };

    let mut actions: Vec<String> = Vec::new();
    let mut agents = Vec::with_capacity(doc.agents.len());
    for agent in &doc.agents {
        let Some(init) = &agent.init else {
            return Err(SpecError::EmptyAgent {
                pos: doc.spans.get(&DeclKey::Agent(agent.name.clone())),
                agent: agent.name.clone(),
            });
        };
        let local = |name: &str| {
            agent
                .locals
                .iter()
                .position(|l| l == name)
                .expect("parser resolved local states")
        };
        let mut transitions = Vec::with_capacity(agent.transitions.len());
        for (idx, t) in agent.transitions.iter().enumerate() {
            let action = match actions.iter().position(|a| a == &t.action) {
                Some(i) => ActionId(i),
                None => {
                    actions.push(t.action.clone());
                    ActionId(actions.len() - 1)
                }
            };
            let mut effects = Vec::with_capacity(t.effects.len());
            for (prop, value) in &t.effects {
                let id = prop_id(prop);
                if persistent[id.0] && !value {
                    return Err(SpecError::PersistentCleared {
                        pos: doc.spans.get(&DeclKey::Transition(agent.name.clone(), idx)),
                        prop: prop.clone(),
                    });
                }
                effects.push((id, *value));
            }
            transitions.push(LocalTransition {
                src: local(&t.src),
                dst: local(&t.dst),
                action,
                effects,
            });
        }
        agents.push((agent.name.clone(), agent.locals.clone(), local(init), transitions));
    }

    let mut amas = Amas::build(agents, actions, doc.propositions.clone(), persistent);
    amas.coalition = amas.resolve_agents(&doc.effective_coalition())?;
    amas.formula = doc
        .formula
        .as_ref()
        .map(|f| amas.resolve_formula(f))
        .transpose()?;
    Ok(amas)
}
