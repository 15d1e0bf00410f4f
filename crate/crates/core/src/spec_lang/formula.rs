//! Strategic formulas: a single `<<A>>` modality over a temporal objective.

use std::fmt;

use super::lexer::{lex_lines, Cursor, Tok, Token};
use super::{Pos, SpecError};

/// Words that cannot be used as proposition names inside formulas.
pub const RESERVED: &[&str] = &["X", "F", "G", "U", "true", "false"];

/// Boolean state expression, generic over how propositions are named.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr<P> {
    True,
    False,
    Prop(P),
    Not(Box<BoolExpr<P>>),
    And(Box<BoolExpr<P>>, Box<BoolExpr<P>>),
    Or(Box<BoolExpr<P>>, Box<BoolExpr<P>>),
}

impl<P> BoolExpr<P> {
    pub fn not(e: BoolExpr<P>) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr<P>, b: BoolExpr<P>) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr<P>, b: BoolExpr<P>) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, holds: &impl Fn(&P) -> bool) -> bool {
        match self {
            BoolExpr::True => true,
            BoolExpr::False => false,
            BoolExpr::Prop(p) => holds(p),
            BoolExpr::Not(e) => !e.eval(holds),
            BoolExpr::And(a, b) => a.eval(holds) && b.eval(holds),
            BoolExpr::Or(a, b) => a.eval(holds) || b.eval(holds),
        }
    }

    pub fn try_map<Q, E>(&self, f: &mut impl FnMut(&P) -> Result<Q, E>) -> Result<BoolExpr<Q>, E> {
        Ok(match self {
            BoolExpr::True => BoolExpr::True,
            BoolExpr::False => BoolExpr::False,
            BoolExpr::Prop(p) => BoolExpr::Prop(f(p)?),
            BoolExpr::Not(e) => BoolExpr::not(e.try_map(f)?),
            BoolExpr::And(a, b) => BoolExpr::and(a.try_map(f)?, b.try_map(f)?),
            BoolExpr::Or(a, b) => BoolExpr::or(a.try_map(f)?, b.try_map(f)?),
        })
    }

    /// Propositions mentioned, in first-occurrence order (duplicates kept).
    pub fn props(&self) -> Vec<&P> {
        let mut out = Vec::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props<'a>(&'a self, out: &mut Vec<&'a P>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Prop(p) => out.push(p),
            BoolExpr::Not(e) => e.collect_props(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            BoolExpr::Not(..) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result
    where
        P: fmt::Display,
    {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            BoolExpr::True => write!(f, "true")?,
            BoolExpr::False => write!(f, "false")?,
            BoolExpr::Prop(p) => write!(f, "{p}")?,
            BoolExpr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 3)?;
            }
            BoolExpr::And(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 3)?;
            }
            BoolExpr::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 2)?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl<P: fmt::Display> fmt::Display for BoolExpr<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Temporal objective under the strategic modality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Objective<P> {
    Next(BoolExpr<P>),
    Eventually(BoolExpr<P>),
    Always(BoolExpr<P>),
    Until(BoolExpr<P>, BoolExpr<P>),
}

impl<P> Objective<P> {
    pub fn try_map<Q, E>(&self, f: &mut impl FnMut(&P) -> Result<Q, E>) -> Result<Objective<Q>, E> {
        Ok(match self {
            Objective::Next(e) => Objective::Next(e.try_map(f)?),
            Objective::Eventually(e) => Objective::Eventually(e.try_map(f)?),
            Objective::Always(e) => Objective::Always(e.try_map(f)?),
            Objective::Until(a, b) => Objective::Until(a.try_map(f)?, b.try_map(f)?),
        })
    }

    pub fn props(&self) -> Vec<&P> {
        match self {
            Objective::Next(e) | Objective::Eventually(e) | Objective::Always(e) => e.props(),
            Objective::Until(a, b) => {
                let mut v = a.props();
                v.extend(b.props());
                v
            }
        }
    }
}

impl<P: fmt::Display> fmt::Display for Objective<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Next(e) => write!(f, "X {e}"),
            Objective::Eventually(e) => write!(f, "F {e}"),
            Objective::Always(e) => write!(f, "G {e}"),
            Objective::Until(a, b) => write!(f, "{a} U {b}"),
        }
    }
}

/// `<<coalition>> objective`, with agents and propositions still named.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaAst {
    pub coalition: Vec<String>,
    pub objective: Objective<String>,
}

impl fmt::Display for FormulaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<<{}>> {}", self.coalition.join(","), self.objective)
    }
}

/// Parses a stand-alone formula such as `<<Controller>> G !(in1 & in2)`.
pub fn parse_formula(text: &str) -> Result<FormulaAst, SpecError> {
    let lines = lex_lines(text)?;
    let tokens: Vec<Token> = lines.iter().flat_map(|l| l.tokens.iter().cloned()).collect();
    let end = lines.last().map(|l| l.end).unwrap_or(Pos::new(1, 1));
    let mut cur = Cursor::new(&tokens, end);
    let (ast, _) = parse_formula_tokens(&mut cur)?;
    cur.finish()?;
    Ok(ast)
}

/// Formula parser entry over an existing cursor. Returns the AST and the
/// position of every proposition reference, for later resolution errors.
pub(crate) fn parse_formula_tokens(
    cur: &mut Cursor<'_>,
) -> Result<(FormulaAst, Vec<(String, Pos)>), SpecError> {
    cur.expect(Tok::LCoop, "`<<`")?;
    if cur.peek_tok() == Some(&Tok::RCoop) {
        return Err(SpecError::Syntax {
            pos: cur.pos(),
            message: "coalition must name at least one agent".into(),
        });
    }
    let coalition = cur
        .ident_list("agent name")?
        .into_iter()
        .map(|(name, _)| name)
        .collect();
    cur.expect(Tok::RCoop, "`>>`")?;

    let mut refs = Vec::new();
    let objective = match cur.peek_tok() {
        Some(Tok::Ident(k)) if k == "X" || k == "F" || k == "G" => {
            let k = k.clone();
            cur.bump();
            let e = parse_or(cur, &mut refs)?;
            match k.as_str() {
                "X" => Objective::Next(e),
                "F" => Objective::Eventually(e),
                _ => Objective::Always(e),
            }
        }
        Some(Tok::LCoop) => return Err(SpecError::NestedModality { pos: cur.pos() }),
        _ => {
            let lhs = parse_or(cur, &mut refs)?;
            match cur.peek_tok() {
                Some(Tok::Ident(k)) if k == "U" => {
                    cur.bump();
                    let rhs = parse_or(cur, &mut refs)?;
                    Objective::Until(lhs, rhs)
                }
                _ => return Err(cur.error("temporal operator X, F, G or U")),
            }
        }
    };
    if cur.peek_tok() == Some(&Tok::LCoop) {
        return Err(SpecError::NestedModality { pos: cur.pos() });
    }
    Ok((FormulaAst { coalition, objective }, refs))
}

type Refs = Vec<(String, Pos)>;

fn parse_or(cur: &mut Cursor<'_>, refs: &mut Refs) -> Result<BoolExpr<String>, SpecError> {
    let mut lhs = parse_and(cur, refs)?;
    while cur.eat(&Tok::Pipe) {
        let rhs = parse_and(cur, refs)?;
        lhs = BoolExpr::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor<'_>, refs: &mut Refs) -> Result<BoolExpr<String>, SpecError> {
    let mut lhs = parse_unary(cur, refs)?;
    while cur.eat(&Tok::Amp) {
        let rhs = parse_unary(cur, refs)?;
        lhs = BoolExpr::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor<'_>, refs: &mut Refs) -> Result<BoolExpr<String>, SpecError> {
    if cur.eat(&Tok::Bang) {
        return Ok(BoolExpr::not(parse_unary(cur, refs)?));
    }
    match cur.peek().cloned() {
        Some(Token { tok: Tok::LParen, .. }) => {
            cur.bump();
            let e = parse_or(cur, refs)?;
            cur.expect(Tok::RParen, "`)`")?;
            Ok(e)
        }
        Some(Token { tok: Tok::LCoop, pos }) => Err(SpecError::NestedModality { pos }),
        Some(Token {
            tok: Tok::Ident(name),
            pos,
        }) => match name.as_str() {
            "true" => {
                cur.bump();
                Ok(BoolExpr::True)
            }
            "false" => {
                cur.bump();
                Ok(BoolExpr::False)
            }
            "X" | "F" | "G" | "U" => Err(SpecError::Syntax {
                pos,
                message: format!("temporal operator `{name}` is not allowed inside a state expression"),
            }),
            _ => {
                cur.bump();
                refs.push((name.clone(), pos));
                Ok(BoolExpr::Prop(name))
            }
        },
        _ => Err(cur.error("proposition, `true`, `false`, `!` or `(`")),
    }
}
