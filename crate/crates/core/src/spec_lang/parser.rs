use std::collections::{BTreeMap, HashSet};

use super::formula::{parse_formula_tokens, RESERVED};
use super::lexer::{lex_lines, Cursor, Line, Tok};
use super::{AgentDecl, DeclKey, FormulaAst, Pos, SourceSpans, SpecDocument, SpecError, TransitionDecl};

struct AgentBuilder {
    decl: AgentDecl,
    pos: Pos,
    explicit_locals: bool,
    /// (src, action) pairs seen so far.
    keys: HashSet<(String, String)>,
    local_refs: Vec<(String, Pos)>,
    effect_refs: Vec<(String, Pos)>,
}

#[derive(Default)]
struct DocBuilder {
    agents: Vec<AgentBuilder>,
    propositions: Option<Vec<(String, Pos)>>,
    persistent: Option<Vec<(String, Pos)>>,
    coalition: Option<Vec<(String, Pos)>>,
    formula: Option<(FormulaAst, Vec<(String, Pos)>, Pos)>,
    spans: BTreeMap<DeclKey, Pos>,
    /// Whether the last section header was an agent (agent-body lines allowed).
    in_agent: bool,
}

fn keyword(line: &Line) -> Option<&str> {
    match (line.tokens.first().map(|t| &t.tok), line.tokens.get(1).map(|t| &t.tok)) {
        (Some(Tok::Ident(k)), Some(Tok::Ident(_))) if k == "AGENT" => Some("AGENT"),
        (Some(Tok::Ident(k)), Some(Tok::Colon)) => match k.as_str() {
            "INIT" | "LOCAL" | "PROPOSITIONS" | "PERSISTENT" | "COALITION" | "FORMULA" => {
                Some(k.as_str())
            }
            _ => None,
        },
        _ => None,
    }
}

/// Parses a model file into a [`SpecDocument`], resolving every name reference.
pub fn parse_spec(text: &str) -> Result<SpecDocument, SpecError> {
    let lines = lex_lines(text)?;
    let mut b = DocBuilder::default();
    for line in &lines {
        let mut cur = Cursor::new(&line.tokens, line.end);
        match keyword(line) {
            Some("AGENT") => b.agent_header(&mut cur)?,
            Some("INIT") => b.init(&mut cur)?,
            Some("LOCAL") => b.locals(&mut cur)?,
            Some(section) => {
                b.in_agent = false;
                let pos = cur.pos();
                cur.bump();
                cur.bump();
                match section {
                    "PROPOSITIONS" => {
                        let list = optional_list(&mut cur, "proposition name")?;
                        set_once(&mut b.propositions, list, pos, "PROPOSITIONS")?;
                    }
                    "PERSISTENT" => {
                        let list = optional_list(&mut cur, "proposition name")?;
                        set_once(&mut b.persistent, list, pos, "PERSISTENT")?;
                    }
                    "COALITION" => {
                        let list = cur.ident_list("agent name")?;
                        set_once(&mut b.coalition, list, pos, "COALITION")?;
                        b.spans.insert(DeclKey::Coalition, pos);
                    }
                    _ => {
                        if b.formula.is_some() {
                            return Err(SpecError::DuplicateDeclaration {
                                pos,
                                what: "FORMULA section".into(),
                            });
                        }
                        let (ast, refs) = parse_formula_tokens(&mut cur)?;
                        b.formula = Some((ast, refs, pos));
                        b.spans.insert(DeclKey::Formula, pos);
                    }
                }
                cur.finish()?;
            }
            None => b.transition(&mut cur)?,
        }
    }
    b.finish(lines.first().map(|l| l.tokens[0].pos).unwrap_or(Pos::new(1, 1)))
}

fn optional_list(cur: &mut Cursor<'_>, what: &str) -> Result<Vec<(String, Pos)>, SpecError> {
    if cur.at_end() {
        Ok(Vec::new())
    } else {
        cur.ident_list(what)
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, pos: Pos, what: &str) -> Result<(), SpecError> {
    if slot.is_some() {
        return Err(SpecError::DuplicateDeclaration {
            pos,
            what: format!("{what} section"),
        });
    }
    *slot = Some(value);
    Ok(())
}

fn distinct(list: &[(String, Pos)], what: &str) -> Result<(), SpecError> {
    let mut seen = HashSet::new();
    for (name, pos) in list {
        if !seen.insert(name) {
            return Err(SpecError::DuplicateDeclaration {
                pos: *pos,
                what: format!("{what} `{name}`"),
            });
        }
    }
    Ok(())
}

impl DocBuilder {
    fn current(&mut self, cur: &Cursor<'_>) -> Result<&mut AgentBuilder, SpecError> {
        if !self.in_agent {
            return Err(cur.error("AGENT"));
        }
        Ok(self.agents.last_mut().expect("in_agent implies an agent"))
    }

    fn agent_header(&mut self, cur: &mut Cursor<'_>) -> Result<(), SpecError> {
        cur.bump();
        let (name, pos) = cur.ident("agent name")?;
        cur.expect(Tok::Colon, "`:`")?;
        cur.finish()?;
        if self.agents.iter().any(|a| a.decl.name == name) {
            return Err(SpecError::DuplicateDeclaration {
                pos,
                what: format!("agent `{name}`"),
            });
        }
        self.spans.insert(DeclKey::Agent(name.clone()), pos);
        self.agents.push(AgentBuilder {
            decl: AgentDecl {
                name,
                locals: Vec::new(),
                init: None,
                transitions: Vec::new(),
            },
            pos,
            explicit_locals: false,
            keys: HashSet::new(),
            local_refs: Vec::new(),
            effect_refs: Vec::new(),
        });
        self.in_agent = true;
        Ok(())
    }

    fn init(&mut self, cur: &mut Cursor<'_>) -> Result<(), SpecError> {
        let pos = cur.pos();
        let agent = self.current(cur)?;
        cur.bump();
        cur.bump();
        let (local, lpos) = cur.ident("local state name")?;
        cur.finish()?;
        if agent.decl.init.is_some() {
            return Err(SpecError::DuplicateDeclaration {
                pos,
                what: format!("INIT of agent `{}`", agent.decl.name),
            });
        }
        agent.decl.init = Some(local.clone());
        agent.local_refs.push((local, lpos));
        let key = DeclKey::Init(agent.decl.name.clone());
        self.spans.insert(key, pos);
        Ok(())
    }

    fn locals(&mut self, cur: &mut Cursor<'_>) -> Result<(), SpecError> {
        let pos = cur.pos();
        let agent = self.current(cur)?;
        cur.bump();
        cur.bump();
        let list = cur.ident_list("local state name")?;
        cur.finish()?;
        if agent.explicit_locals {
            return Err(SpecError::DuplicateDeclaration {
                pos,
                what: format!("LOCAL list of agent `{}`", agent.decl.name),
            });
        }
        distinct(&list, "local state")?;
        agent.explicit_locals = true;
        let name = agent.decl.name.clone();
        for (l, p) in &list {
            self.spans.insert(DeclKey::Local(name.clone(), l.clone()), *p);
        }
        let agent = self.agents.last_mut().expect("current agent");
        agent.decl.locals = list.into_iter().map(|(l, _)| l).collect();
        Ok(())
    }

    fn transition(&mut self, cur: &mut Cursor<'_>) -> Result<(), SpecError> {
        let pos = cur.pos();
        let agent = self.current(cur)?;
        let (src, spos) = cur.ident("local state name")?;
        cur.expect(Tok::Arrow, "`->`")?;
        let (dst, dpos) = cur.ident("local state name")?;
        cur.expect(Tok::Colon, "`:`")?;
        let (action, apos) = cur.ident("action name")?;
        let mut effects = Vec::new();
        if let Some(Tok::Ident(k)) = cur.peek_tok() {
            if k == "SET" {
                cur.bump();
                loop {
                    let (prop, ppos) = cur.ident("proposition name")?;
                    cur.expect(Tok::Eq, "`=`")?;
                    let (value, vpos) = cur.ident("`true` or `false`")?;
                    let value = match value.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => {
                            return Err(SpecError::Syntax {
                                pos: vpos,
                                message: format!("expected `true` or `false`, found `{value}`"),
                            })
                        }
                    };
                    if effects.iter().any(|(p, _)| p == &prop) {
                        return Err(SpecError::DuplicateDeclaration {
                            pos: ppos,
                            what: format!("assignment to `{prop}`"),
                        });
                    }
                    agent.effect_refs.push((prop.clone(), ppos));
                    effects.push((prop, value));
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
        }
        cur.finish()?;
        if !agent.keys.insert((src.clone(), action.clone())) {
            return Err(SpecError::DuplicateDeclaration {
                pos: apos,
                what: format!(
                    "transition `{src} -> {dst} : {action}` (agent `{}` already has `{action}` from `{src}`)",
                    agent.decl.name
                ),
            });
        }
        agent.local_refs.push((src.clone(), spos));
        agent.local_refs.push((dst.clone(), dpos));
        let idx = agent.decl.transitions.len();
        agent.decl.transitions.push(TransitionDecl {
            src,
            dst,
            action,
            effects,
        });
        let key = DeclKey::Transition(agent.decl.name.clone(), idx);
        self.spans.insert(key, pos);
        Ok(())
    }

    fn finish(mut self, first: Pos) -> Result<SpecDocument, SpecError> {
        if self.agents.is_empty() {
            return Err(SpecError::Syntax {
                pos: first,
                message: "expected AGENT".into(),
            });
        }
        let propositions = self.propositions.take().unwrap_or_default();
        distinct(&propositions, "proposition")?;
        for (p, pos) in &propositions {
            if RESERVED.contains(&p.as_str()) || p == "SET" {
                return Err(SpecError::Syntax {
                    pos: *pos,
                    message: format!("`{p}` is a reserved word"),
                });
            }
            self.spans.insert(DeclKey::Proposition(p.clone()), *pos);
        }
        let declared: HashSet<&str> = propositions.iter().map(|(p, _)| p.as_str()).collect();
        let check_prop = |name: &str, pos: Pos| {
            if declared.contains(name) {
                Ok(())
            } else {
                Err(SpecError::UnknownReference {
                    pos,
                    what: format!("proposition `{name}`"),
                })
            }
        };

        let persistent = self.persistent.take().unwrap_or_default();
        distinct(&persistent, "persistent proposition")?;
        for (p, pos) in &persistent {
            check_prop(p, *pos)?;
            self.spans.insert(DeclKey::Persistent(p.clone()), *pos);
        }

        let mut agents = Vec::with_capacity(self.agents.len());
        for mut ab in std::mem::take(&mut self.agents) {
            for (p, pos) in &ab.effect_refs {
                check_prop(p, *pos)?;
            }
            if ab.explicit_locals {
                for (l, pos) in &ab.local_refs {
                    if !ab.decl.locals.contains(l) {
                        return Err(SpecError::UnknownReference {
                            pos: *pos,
                            what: format!("local state `{l}` of agent `{}`", ab.decl.name),
                        });
                    }
                }
            } else {
                ab.decl.locals = ab.decl.implicit_locals();
                for (l, pos) in &ab.local_refs {
                    self.spans
                        .entry(DeclKey::Local(ab.decl.name.clone(), l.clone()))
                        .or_insert(*pos);
                }
            }
            if ab.decl.init.is_none() && !ab.decl.locals.is_empty() {
                return Err(SpecError::Syntax {
                    pos: ab.pos,
                    message: format!("expected INIT for agent `{}`", ab.decl.name),
                });
            }
            agents.push(ab.decl);
        }

        let agent_names: HashSet<&str> = agents.iter().map(|a| a.name.as_str()).collect();
        let check_agent = |name: &str, pos: Pos| {
            if agent_names.contains(name) {
                Ok(())
            } else {
                Err(SpecError::UnknownReference {
                    pos,
                    what: format!("agent `{name}`"),
                })
            }
        };
        if let Some(c) = &self.coalition {
            distinct(c, "coalition member")?;
            for (a, pos) in c {
                check_agent(a, *pos)?;
            }
        }
        if let Some((ast, refs, pos)) = &self.formula {
            let mut seen = HashSet::new();
            for a in &ast.coalition {
                check_agent(a, *pos)?;
                if !seen.insert(a) {
                    return Err(SpecError::DuplicateDeclaration {
                        pos: *pos,
                        what: format!("coalition member `{a}`"),
                    });
                }
            }
            for (p, ppos) in refs {
                check_prop(p, *ppos)?;
            }
        }

        Ok(SpecDocument {
            agents,
            propositions: propositions.into_iter().map(|(p, _)| p).collect(),
            persistent: persistent.into_iter().map(|(p, _)| p).collect(),
            coalition: self
                .coalition
                .map(|c| c.into_iter().map(|(a, _)| a).collect()),
            formula: self.formula.map(|(f, _, _)| f),
            spans: SourceSpans(self.spans),
        })
    }
}
