//! The compact `<GOAL> / <INIT> / <ACTION> / <PRE> / <EFFECT>` problem format.
//!
//! ```text
//! <GOAL> on d1 peg2, clear d1, on d2 peg1, clear d2, clear peg3
//! <INIT> smaller peg1 d1, smaller peg1 d2, on d1 d2, clear d1, ...
//! <ACTION> move disc from to
//! <PRE> smaller to disc, on disc from, clear disc, clear to
//! <EFFECT> clear from, on disc to, not on disc from, not clear to
//! ```
//!
//! Predicates are comma separated and may wrap across lines. `;` starts a
//! comment running to the end of the line. `not` negates a literal in `PRE`
//! (a negative precondition) or `EFFECT` (a delete effect). The parameter
//! list after the action name is optional.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::PlanIoError;
use crate::strips::{GroundAction, Predicate, StripsOperator};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub predicate: Predicate,
}

impl Literal {
    pub fn pos(predicate: Predicate) -> Self {
        Self {
            positive: true,
            predicate,
        }
    }

    pub fn neg(predicate: Predicate) -> Self {
        Self {
            positive: false,
            predicate,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.predicate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<String>,
    pub pre: Vec<Literal>,
    pub effect: Vec<Literal>,
}

impl ActionSchema {
    pub fn to_operator(&self) -> Result<StripsOperator, PlanIoError> {
        let split = |lits: &[Literal], positive: bool| -> Vec<Predicate> {
            lits.iter()
                .filter(|l| l.positive == positive)
                .map(|l| l.predicate.clone())
                .collect()
        };
        let params: Vec<&str> = self.parameters.iter().map(String::as_str).collect();
        Ok(StripsOperator::new(
            &self.name,
            &params,
            split(&self.pre, true),
            split(&self.pre, false),
            split(&self.effect, true),
            split(&self.effect, false),
        )?)
    }

    /// Literals follow the operator's set order.
    pub fn from_operator(op: &StripsOperator) -> Self {
        let lits = |pos: &BTreeSet<Predicate>, neg: &BTreeSet<Predicate>| -> Vec<Literal> {
            pos.iter()
                .cloned()
                .map(Literal::pos)
                .chain(neg.iter().cloned().map(Literal::neg))
                .collect()
        };
        Self {
            name: op.name.clone(),
            parameters: op.parameters.clone(),
            pre: lits(&op.alpha, &op.beta),
            effect: lits(&op.gamma_fx, &op.delta_fx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDocument {
    pub goal: Vec<Predicate>,
    pub init: Vec<Predicate>,
    pub actions: Vec<ActionSchema>,
}

impl ProblemDocument {
    /// Every object named in `GOAL` or `INIT`, sorted.
    pub fn objects(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.goal.iter().chain(&self.init).flat_map(|p| &p.args).collect();
        set.into_iter().cloned().collect()
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }
}

impl FromStr for ProblemDocument {
    type Err = PlanIoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_problem(s)
    }
}

impl fmt::Display for ProblemDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_problem(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlanDocument {
    pub steps: Vec<GroundAction>,
}

impl PlanDocument {
    /// One token per action name and per argument.
    pub fn tokens(&self) -> Vec<String> {
        self.steps
            .iter()
            .flat_map(|s| std::iter::once(s.name.clone()).chain(s.args.iter().cloned()))
            .collect()
    }
}

impl fmt::Display for PlanDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

impl FromStr for PlanDocument {
    type Err = PlanIoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_plan(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Goal,
    Init,
    Action,
    Pre,
    Effect,
}

impl Section {
    fn tag(self) -> &'static str {
        match self {
            Section::Goal => "<GOAL>",
            Section::Init => "<INIT>",
            Section::Action => "<ACTION>",
            Section::Pre => "<PRE>",
            Section::Effect => "<EFFECT>",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Section(Section),
    Comma,
    Word(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> PlanIoError {
    PlanIoError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, PlanIoError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line_no = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == ';' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == ',' {
                out.push(Spanned {
                    tok: Tok::Comma,
                    line: line_no,
                    col,
                });
                i += 1;
            } else if c == '<' {
                let close = chars[i..]
                    .iter()
                    .position(|&c| c == '>')
                    .ok_or_else(|| err(line_no, col, "unterminated section tag"))?;
                let name: String = chars[i + 1..i + close].iter().collect();
                let section = match name.as_str() {
                    "GOAL" => Section::Goal,
                    "INIT" => Section::Init,
                    "ACTION" => Section::Action,
                    "PRE" => Section::Pre,
                    "EFFECT" => Section::Effect,
                    _ => return Err(err(line_no, col, format!("unknown section <{name}>"))),
                };
                out.push(Spanned {
                    tok: Tok::Section(section),
                    line: line_no,
                    col,
                });
                i += close + 1;
            } else if c.is_alphanumeric() || c == '_' || c == '-' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    line: line_no,
                    col,
                });
            } else {
                return Err(err(line_no, col, format!("unexpected character {c:?}")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Position reported for errors at end of input.
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn expect_section(&mut self, want: Section) -> Result<(), PlanIoError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Section(s), ..
            }) if *s == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(err(
                t.line,
                t.col,
                format!("expected {} section, found {}", want.tag(), describe(&t.tok)),
            )),
            None => {
                let (l, c) = self.end;
                Err(err(l, c, format!("missing {} section", want.tag())))
            }
        }
    }

    /// Words up to the next section tag.
    fn words_until_section(&mut self) -> Result<Vec<String>, PlanIoError> {
        let mut words = Vec::new();
        while let Some(t) = self.peek() {
            match &t.tok {
                Tok::Word(w) => {
                    words.push(w.clone());
                    self.pos += 1;
                }
                Tok::Comma => return Err(err(t.line, t.col, "unexpected ',' in action header")),
                Tok::Section(_) => break,
            }
        }
        Ok(words)
    }

    /// Comma-separated literals up to the next section tag or end of input.
    fn literal_list(&mut self, signed: bool) -> Result<Vec<Literal>, PlanIoError> {
        let mut out = Vec::new();
        loop {
            let (line, col) = self.here();
            let mut words = Vec::new();
            while let Some(Spanned { tok: Tok::Word(w), .. }) = self.peek() {
                words.push(w.clone());
                self.pos += 1;
            }
            let empty = words.is_empty();
            if !empty {
                out.push(literal_from_words(words, signed, line, col)?);
            }
            match self.peek() {
                Some(Spanned { tok: Tok::Comma, line, col }) => {
                    if empty {
                        return Err(err(*line, *col, "empty predicate before ','"));
                    }
                    self.pos += 1;
                }
                _ => return Ok(out),
            }
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Section(s) => s.tag().into(),
        Tok::Comma => "','".into(),
        Tok::Word(w) => format!("`{w}`"),
    }
}

fn literal_from_words(mut words: Vec<String>, signed: bool, line: usize, col: usize) -> Result<Literal, PlanIoError> {
    let positive = if words[0] == "not" {
        if !signed {
            return Err(err(line, col, "`not` is only allowed in <PRE> and <EFFECT>"));
        }
        words.remove(0);
        false
    } else {
        true
    };
    let Some(name) = words.first().cloned() else {
        return Err(err(line, col, "`not` must be followed by a predicate"));
    };
    let predicate = Predicate::new(&name, words.into_iter().skip(1)).map_err(|e| err(line, col, e.to_string()))?;
    Ok(Literal { positive, predicate })
}

fn unsigned(lits: Vec<Literal>) -> Vec<Predicate> {
    lits.into_iter().map(|l| l.predicate).collect()
}

/// Variables ordered for an action whose header lists no parameters:
/// `disc`, `from`, `to` first in that order, then any other variable in order
/// of first appearance in `PRE` then `EFFECT`.
fn infer_parameters(pre: &[Literal], effect: &[Literal], objects: &BTreeSet<String>) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for lit in pre.iter().chain(effect) {
        for a in &lit.predicate.args {
            if !objects.contains(a) && !seen.contains(a) {
                seen.push(a.clone());
            }
        }
    }
    let mut params: Vec<String> = ["disc", "from", "to"]
        .iter()
        .filter(|r| seen.iter().any(|s| s == *r))
        .map(|r| r.to_string())
        .collect();
    let rest: Vec<String> = seen.into_iter().filter(|s| !params.contains(s)).collect();
    params.extend(rest);
    params
}

pub fn parse_problem(text: &str) -> Result<ProblemDocument, PlanIoError> {
    let toks = lex(text)?;
    let end = (text.lines().count().max(1), text.lines().last().map_or(0, |l| l.chars().count()) + 1);
    let mut p = Parser { toks, pos: 0, end };

    p.expect_section(Section::Goal)?;
    let goal = unsigned(p.literal_list(false)?);
    p.expect_section(Section::Init)?;
    let init = unsigned(p.literal_list(false)?);
    let objects: BTreeSet<String> = goal.iter().chain(&init).flat_map(|q| q.args.iter().cloned()).collect();

    let mut actions = Vec::new();
    loop {
        if actions.is_empty() || p.peek().is_some() {
            p.expect_section(Section::Action)?;
        } else {
            break;
        }
        let (line, col) = p.here();
        let mut header = p.words_until_section()?;
        if header.is_empty() {
            return Err(err(line, col, "<ACTION> needs a name"));
        }
        let name = header.remove(0);
        p.expect_section(Section::Pre)?;
        let pre = p.literal_list(true)?;
        p.expect_section(Section::Effect)?;
        let effect = p.literal_list(true)?;
        let parameters = if header.is_empty() {
            infer_parameters(&pre, &effect, &objects)
        } else {
            header
        };
        let schema = ActionSchema {
            name,
            parameters,
            pre,
            effect,
        };
        schema.to_operator().map_err(|e| err(line, col, e.to_string()))?;
        actions.push(schema);
    }
    Ok(ProblemDocument { goal, init, actions })
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical text: one line per section, predicates in document order,
/// parameter lists always written out.
pub fn emit_problem(doc: &ProblemDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<GOAL> {}", join(&doc.goal));
    let _ = writeln!(out, "<INIT> {}", join(&doc.init));
    for a in &doc.actions {
        let mut header = a.name.clone();
        for p in &a.parameters {
            header.push(' ');
            header.push_str(p);
        }
        let _ = writeln!(out, "<ACTION> {header}");
        let _ = writeln!(out, "<PRE> {}", join(&a.pre));
        let _ = writeln!(out, "<EFFECT> {}", join(&a.effect));
    }
    out
}

/// One grounded action per line; blank lines and `;` comments are skipped.
pub fn parse_plan(text: &str) -> Result<PlanDocument, PlanIoError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if let Some(bad) = words
            .iter()
            .find(|w| !w.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-'))
        {
            let col = raw.find(bad).map_or(1, |c| c + 1);
            return Err(err(i + 1, col, format!("malformed token `{bad}`")));
        }
        steps.push(GroundAction::new(words[0], &words[1..]));
    }
    Ok(PlanDocument { steps })
}

pub fn emit_plan(plan: &PlanDocument) -> String {
    plan.to_string()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const FIGURE: &str = "\
<GOAL> on d1 peg2, clear d1, on d2 peg1, clear d2, clear peg3
<INIT> smaller peg1 d1, smaller peg1 d2, smaller peg2 d1, smaller peg2 d2,
smaller peg3 d1, smaller peg3 d2, smaller d2 d1, on d1 d2, clear d1,
on d2 peg3, clear peg1, clear peg2
<ACTION> move
<PRE> smaller to disc, on disc from, clear disc, clear to
<EFFECT> clear from, on disc to, not on disc from, not clear to
";

    #[test]
    fn parses_figure_text() {
        let doc = parse_problem(FIGURE).unwrap();
        assert_eq!(doc.goal.len(), 5);
        assert_eq!(doc.init.len(), 12);
        assert!(doc.init.contains(&Predicate::smaller("peg1", "d1")));
        assert!(doc.init.contains(&Predicate::on("d1", "d2")));
        assert_eq!(doc.init[0], Predicate::smaller("peg1", "d1"));
        let a = &doc.actions[0];
        assert_eq!(a.name, "move");
        assert_eq!(a.parameters, vec!["disc", "from", "to"]);
        assert_eq!(a.pre.len(), 4);
        assert_eq!(a.effect[2], Literal::neg(Predicate::on("disc", "from")));
        assert_eq!(doc.objects(), vec!["d1", "d2", "peg1", "peg2", "peg3"]);
    }

    #[test]
    fn emit_is_idempotent_on_figure() {
        let doc = parse_problem(FIGURE).unwrap();
        let text = emit_problem(&doc);
        assert!(text.starts_with("<GOAL> on d1 peg2, clear d1,"));
        assert!(text.contains("<ACTION> move disc from to\n"));
        let again = parse_problem(&text).unwrap();
        assert_eq!(again, doc);
        assert_eq!(emit_problem(&again), text);
    }

    #[test]
    fn single_predicate_document() {
        let text = "<GOAL> clear d1\n<INIT> clear d1\n<ACTION> noop x\n<PRE> clear x\n<EFFECT> clear x\n";
        let doc = parse_problem(text).unwrap();
        assert_eq!(emit_problem(&doc), text);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_problem("") {
            Err(PlanIoError::Parse { line: 1, msg, .. }) => assert!(msg.contains("<GOAL>")),
            other => panic!("{other:?}"),
        }
        match parse_problem("<GOAL> on d1\n<INIT> clear d1\n") {
            Err(PlanIoError::Parse { line: 1, col: 8, msg }) => assert!(msg.contains("arguments"), "{msg}"),
            other => panic!("{other:?}"),
        }
        match parse_problem("<GOAL> clear d1\n<INIT>  above d1 d2\n<ACTION> m\n<PRE>\n<EFFECT>\n") {
            Err(PlanIoError::Parse { line: 2, col: 9, msg }) => assert!(msg.contains("above")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_problem("<GOAL> clear d1\n<INIT> clear d1\n"),
            Err(PlanIoError::Parse { msg, .. }) if msg.contains("<ACTION>")
        ));
        assert!(matches!(
            parse_problem("<GOAL> clear d1\n<INIT> clear d1\n<ACTION> m x\n<EFFECT> clear x\n"),
            Err(PlanIoError::Parse { line: 4, col: 1, .. })
        ));
        assert!(parse_problem("<GOAL> not clear d1\n<INIT>\n<ACTION> m\n<PRE>\n<EFFECT>\n").is_err());
        assert!(parse_problem("<GOAL> clear d1,, clear d2\n<INIT>\n<ACTION> m\n<PRE>\n<EFFECT>\n").is_err());
        assert!(parse_problem("<GOAL> clear d1 <FOO>").is_err());
        // effect literal naming an unknown parameter
        assert!(parse_problem("<GOAL> clear d1\n<INIT>\n<ACTION> m x\n<PRE> clear x\n<EFFECT> clear y\n").is_err());
    }

    #[test]
    fn comments_and_wrapping() {
        let text = "; header\n<GOAL> clear d1 ; trailing\n,clear d2\n<INIT>\n<ACTION> m x\n<PRE>\n<EFFECT> clear x\n";
        let doc = parse_problem(text).unwrap();
        assert_eq!(doc.goal, vec![Predicate::clear("d1"), Predicate::clear("d2")]);
    }

    #[test]
    fn plan_round_trip() {
        let text = "move d1 d2 peg3\n\n; comment\nmove d2 peg1 peg2  \n";
        let plan = parse_plan(text).unwrap();
        assert_eq!(plan.steps.len(), 2);
        assert_eq!(plan.steps[1], GroundAction::new("move", &["d2", "peg1", "peg2"]));
        assert_eq!(emit_plan(&plan), "move d1 d2 peg3\nmove d2 peg1 peg2\n");
        assert_eq!(plan.tokens().len(), 8);
        assert!(matches!(parse_plan("move d1 (peg3)"), Err(PlanIoError::Parse { line: 1, col: 9, .. })));
    }

    #[test]
    fn operator_conversion_keeps_sets() {
        let op = crate::strips::reference_move_operator();
        let schema = ActionSchema::from_operator(&op);
        assert_eq!(schema.to_operator().unwrap(), op);
    }
}
