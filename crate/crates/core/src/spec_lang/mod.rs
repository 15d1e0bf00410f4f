//! Text specification language: model files, formulas and relation files.
//!
//! A model file declares one local automaton per agent, the propositions the
//! automata write, and optionally the coalition and the formula to verify:
//!
//! ```text
//! AGENT Train1:
//!   INIT: W
//!   W -> T : a1 SET in1=true
//! PROPOSITIONS: in1
//! FORMULA: <<Train1>> F in1
//! ```
//!
//! Actions are shared by name: every agent mentioning an action takes part in it.

mod formula;
mod lexer;
mod parser;
mod relation;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use formula::{parse_formula, BoolExpr, FormulaAst, Objective, RESERVED};
pub use parser::parse_spec;
pub use relation::{parse_relation, Descriptor, RelationSpec};
pub use validate::validate;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub fn new(line: usize, column: usize) -> Self {
        Pos { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: duplicate declaration of {what}")]
    DuplicateDeclaration { pos: Pos, what: String },
    #[error("{pos}: unknown {what}")]
    UnknownReference { pos: Pos, what: String },
    #[error("{pos}: strategic operator nested inside an objective")]
    NestedModality { pos: Pos },
    #[error("{pos}: descriptor has {found} components, the model has {expected} agents")]
    ArityMismatch {
        pos: Pos,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: agent {agent} has no local state `{local}`")]
    UnknownLocalState {
        pos: Pos,
        agent: String,
        local: String,
    },
    #[error("{pos}: transition sets persistent proposition `{prop}` to false")]
    PersistentCleared { pos: Pos, prop: String },
    #[error("{pos}: agent {agent} has no local states")]
    EmptyAgent { pos: Pos, agent: String },
    #[error("{pos}: at most {max} propositions are supported")]
    TooManyPropositions { pos: Pos, max: usize },
}

impl SpecError {
    pub fn pos(&self) -> Pos {
        match self {
            SpecError::Syntax { pos, .. }
            | SpecError::DuplicateDeclaration { pos, .. }
            | SpecError::UnknownReference { pos, .. }
            | SpecError::NestedModality { pos }
            | SpecError::ArityMismatch { pos, .. }
            | SpecError::UnknownLocalState { pos, .. }
            | SpecError::PersistentCleared { pos, .. }
            | SpecError::EmptyAgent { pos, .. }
            | SpecError::TooManyPropositions { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDecl {
    pub src: String,
    pub dst: String,
    pub action: String,
    pub effects: Vec<(String, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentDecl {
    pub name: String,
    /// Declaration order; either an explicit `LOCAL:` list or the initial state
    /// followed by transition endpoints in order of appearance.
    pub locals: Vec<String>,
    /// `None` only for an agent with no locals at all.
    pub init: Option<String>,
    pub transitions: Vec<TransitionDecl>,
}

impl AgentDecl {
    fn implicit_locals(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |s: &String| {
            if !out.contains(s) {
                out.push(s.clone());
            }
        };
        if let Some(init) = &self.init {
            push(init);
        }
        for t in &self.transitions {
            push(&t.src);
            push(&t.dst);
        }
        out
    }
}

/// Key of a declaration in [`SourceSpans`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeclKey {
    Agent(String),
    Init(String),
    Local(String, String),
    Transition(String, usize),
    Proposition(String),
    Persistent(String),
    Coalition,
    Formula,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceSpans(pub BTreeMap<DeclKey, Pos>);

impl SourceSpans {
    pub fn get(&self, key: &DeclKey) -> Pos {
        self.0.get(key).copied().unwrap_or(Pos::new(1, 1))
    }
}

/// Parsed model file.
#[derive(Debug, Clone)]
pub struct SpecDocument {
    pub agents: Vec<AgentDecl>,
    pub propositions: Vec<String>,
    pub persistent: Vec<String>,
    pub coalition: Option<Vec<String>>,
    pub formula: Option<FormulaAst>,
    pub spans: SourceSpans,
}

impl SpecDocument {
    /// Explicit `COALITION:` line, falling back to the formula's coalition.
    pub fn effective_coalition(&self) -> Vec<String> {
        match (&self.coalition, &self.formula) {
            (Some(c), _) => c.clone(),
            (None, Some(f)) => f.coalition.clone(),
            (None, None) => Vec::new(),
        }
    }

    pub fn agent(&self, name: &str) -> Option<&AgentDecl> {
        self.agents.iter().find(|a| a.name == name)
    }

    /// Equality ignoring source positions.
    pub fn same_structure(&self, other: &SpecDocument) -> bool {
        self.agents == other.agents
            && self.propositions == other.propositions
            && self.persistent == other.persistent
            && self.coalition == other.coalition
            && self.formula == other.formula
    }
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for agent in &self.agents {
            writeln!(f, "AGENT {}:", agent.name)?;
            if agent.locals != agent.implicit_locals() {
                writeln!(f, "  LOCAL: {}", agent.locals.join(", "))?;
            }
            if let Some(init) = &agent.init {
                writeln!(f, "  INIT: {init}")?;
            }
            for t in &agent.transitions {
                write!(f, "  {} -> {} : {}", t.src, t.dst, t.action)?;
                if !t.effects.is_empty() {
                    let effects: Vec<String> =
                        t.effects.iter().map(|(p, v)| format!("{p}={v}")).collect();
                    write!(f, " SET {}", effects.join(", "))?;
                }
                writeln!(f)?;
            }
        }
        if !self.propositions.is_empty() {
            writeln!(f, "PROPOSITIONS: {}", self.propositions.join(", "))?;
        }
        if !self.persistent.is_empty() {
            writeln!(f, "PERSISTENT: {}", self.persistent.join(", "))?;
        }
        if let Some(c) = &self.coalition {
            writeln!(f, "COALITION: {}", c.join(", "))?;
        }
        if let Some(formula) = &self.formula {
            writeln!(f, "FORMULA: {formula}")?;
        }
        Ok(())
    }
}
