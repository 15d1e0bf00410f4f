//! Relation files: candidate pairs of global states written as local-state tuples.
//!
//! ```text
//! (G,W,W) ~ (G,W,W)
//! COALITION: Controller     % optional
//! ```

use std::fmt;

use super::lexer::{lex_lines, Cursor, Tok};
use super::{Pos, SpecDocument, SpecError};

/// Local-state names in the agents' declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Descriptor(pub Vec<String>);

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationSpec {
    pub pairs: Vec<(Descriptor, Descriptor)>,
    /// Agent names of the left model; empty unless the file has a `COALITION:` line.
    pub coalition: Vec<String>,
}

/// Parses a relation file and checks every descriptor against its model.
pub fn parse_relation(
    text: &str,
    left: &SpecDocument,
    right: &SpecDocument,
) -> Result<RelationSpec, SpecError> {
    let mut rel = RelationSpec::default();
    let mut seen_coalition = false;
    for line in lex_lines(text)? {
        let mut cur = Cursor::new(&line.tokens, line.end);
        if matches!(cur.peek_tok(), Some(Tok::Ident(k)) if k == "COALITION") {
            let pos = cur.pos();
            cur.bump();
            cur.expect(Tok::Colon, "`:`")?;
            if seen_coalition {
                return Err(SpecError::DuplicateDeclaration {
                    pos,
                    what: "COALITION line".into(),
                });
            }
            seen_coalition = true;
            for (name, pos) in cur.ident_list("agent name")? {
                if left.agent(&name).is_none() {
                    return Err(SpecError::UnknownReference {
                        pos,
                        what: format!("agent `{name}`"),
                    });
                }
                rel.coalition.push(name);
            }
            cur.finish()?;
            continue;
        }
        let l = descriptor(&mut cur, left)?;
        cur.expect(Tok::Tilde, "`~`")?;
        let r = descriptor(&mut cur, right)?;
        cur.finish()?;
        rel.pairs.push((l, r));
    }
    Ok(rel)
}

fn descriptor(cur: &mut Cursor<'_>, doc: &SpecDocument) -> Result<Descriptor, SpecError> {
    let open = cur.expect(Tok::LParen, "`(`")?;
    let items: Vec<(String, Pos)> = cur.ident_list("local state name")?;
    cur.expect(Tok::RParen, "`)`")?;
    if items.len() != doc.agents.len() {
        return Err(SpecError::ArityMismatch {
            pos: open,
            expected: doc.agents.len(),
            found: items.len(),
        });
    }
    for ((name, pos), agent) in items.iter().zip(&doc.agents) {
        if !agent.locals.contains(name) {
            return Err(SpecError::UnknownLocalState {
                pos: *pos,
                agent: agent.name.clone(),
                local: name.clone(),
            });
        }
    }
    Ok(Descriptor(items.into_iter().map(|(n, _)| n).collect()))
}
