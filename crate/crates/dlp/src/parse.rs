//! Surface syntax for knowledge bases.
//!
//! Everything is an s-expression. A document is a sequence of theory
//! forms; each form holds assert, rule, implies, plan, and prob clauses:
//!
//! ```text
//! (theory Boston
//!   (rule ((Observe WeekdayAt5PM)) (TrafficJam))
//!   (assert (not (TrafficJam))))
//! ```
//!
//! Propositions are `(not p)`, `(and p q)`, `(or p q)`, `(implies p q)`,
//! or an atom: a bare name, or `(pred term...)`. Variables start with `?`;
//! every other bare symbol is a constant. Comments run from `;` to end of
//! line.
//!
//! Plan triggers are `(when-assert p)` / `(when-goal p)`; steps are
//! `(assert p)`, `(goal p)`, `(thnot p)`, `(thnot p assert)`, `(fail)`,
//! and `(bind t1 t2)`. Probability clauses are
//! `(prob (conditional event given value))` and
//! `(prob (marginal event value))`.
//!
//! Printing a parsed document and reparsing it yields a structurally
//! identical document; no recovery is attempted after the first error.

use std::fmt;

use crate::planner::{PlanStep, Trigger};
use crate::prob::ProbConstraint;
use crate::prop::Prop;
use crate::symbol::Symbol;
use crate::term::Term;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: expected {}",
            self.line, self.column, self.expected
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, PartialEq, Debug)]
pub enum Clause {
    Assert(Prop),
    Rule { premises: Vec<Prop>, conclusion: Prop },
    Implies(Prop, Prop),
    Plan { trigger: Trigger, steps: Vec<PlanStep> },
    Prob(ProbConstraint),
}

#[derive(Clone, PartialEq, Debug)]
pub struct TheoryForm {
    pub name: Symbol,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct KbDocument {
    pub theories: Vec<TheoryForm>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    LParen,
    RParen,
    Word(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    column: u32,
}

fn tokenize(text: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut column = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line, column });
                chars.next();
                column += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line, column });
                chars.next();
                column += 1;
            }
            _ => {
                let (start_line, start_col) = (line, column);
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    column += 1;
                }
                out.push(Spanned { tok: Tok::Word(word), line: start_line, column: start_col });
            }
        }
    }
    out
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: u32,
    end_column: u32,
}

impl Parser {
    fn new(text: &str) -> Parser {
        let toks = tokenize(text);
        let lines: Vec<&str> = text.split('\n').collect();
        let end_line = lines.len() as u32;
        let end_column = lines.last().map_or(1, |l| l.chars().count() as u32 + 1);
        Parser { toks, pos: 0, end_line, end_column }
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (line, column) = match self.toks.get(self.pos) {
            Some(s) => (s.line, s.column),
            None => (self.end_line, self.end_column),
        };
        Err(ParseError { line, column, expected: expected.to_string() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn expect_lparen(&mut self, ctx: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(ctx),
        }
    }

    fn expect_rparen(&mut self, ctx: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(ctx),
        }
    }

    fn word(&mut self, ctx: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err(ctx),
        }
    }

    /// A plain name: no leading `?`.
    fn name(&mut self, ctx: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if !w.starts_with('?') => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err(ctx),
        }
    }

    fn document(&mut self) -> Result<KbDocument, ParseError> {
        let mut theories = Vec::new();
        while self.peek().is_some() {
            theories.push(self.theory_form()?);
        }
        Ok(KbDocument { theories })
    }

    fn theory_form(&mut self) -> Result<TheoryForm, ParseError> {
        self.expect_lparen("`(theory ...)`")?;
        let kw = self.name("`theory`")?;
        if kw != "theory" {
            self.pos -= 1;
            return self.err("`theory`");
        }
        let name = Symbol::from(self.name("theory name")?.as_str());
        let mut clauses = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(TheoryForm { name, clauses });
                }
                Some(Tok::LParen) => clauses.push(self.clause()?),
                _ => return self.err("a clause or `)`"),
            }
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        self.expect_lparen("`(`")?;
        let kw = self.name("`assert`, `rule`, `implies`, `plan`, or `prob`")?;
        let clause = match kw.as_str() {
            "assert" => Clause::Assert(self.prop()?),
            "rule" => {
                self.expect_lparen("`(` opening the premise list")?;
                let mut premises = vec![self.prop()?];
                while !matches!(self.peek(), Some(Tok::RParen)) {
                    premises.push(self.prop()?);
                }
                self.pos += 1;
                let conclusion = self.prop()?;
                Clause::Rule { premises, conclusion }
            }
            "implies" => {
                let p = self.prop()?;
                let q = self.prop()?;
                Clause::Implies(p, q)
            }
            "plan" => {
                let trigger = self.trigger()?;
                self.expect_lparen("`(` opening the step list")?;
                let mut steps = Vec::new();
                while !matches!(self.peek(), Some(Tok::RParen)) {
                    steps.push(self.step()?);
                }
                self.pos += 1;
                Clause::Plan { trigger, steps }
            }
            "prob" => Clause::Prob(self.prob_clause()?),
            _ => {
                self.pos -= 1;
                return self.err("`assert`, `rule`, `implies`, `plan`, or `prob`");
            }
        };
        self.expect_rparen("`)` closing the clause")?;
        Ok(clause)
    }

    fn trigger(&mut self) -> Result<Trigger, ParseError> {
        self.expect_lparen("`(when-assert ...)` or `(when-goal ...)`")?;
        let kw = self.name("`when-assert` or `when-goal`")?;
        let pattern = self.prop()?;
        let trigger = match kw.as_str() {
            "when-assert" => Trigger::WhenAssert(pattern),
            "when-goal" => Trigger::WhenGoal(pattern),
            _ => {
                self.pos -= 2;
                return self.err("`when-assert` or `when-goal`");
            }
        };
        self.expect_rparen("`)` closing the trigger")?;
        Ok(trigger)
    }

    fn step(&mut self) -> Result<PlanStep, ParseError> {
        self.expect_lparen("a plan step")?;
        let kw = self.name("`assert`, `goal`, `thnot`, `fail`, or `bind`")?;
        let step = match kw.as_str() {
            "assert" => PlanStep::DoAssert(self.prop()?),
            "goal" => PlanStep::DoGoal(self.prop()?),
            "thnot" => {
                let goal = self.prop()?;
                let assert_negation = match self.peek() {
                    Some(Tok::Word(w)) if w == "assert" => {
                        self.pos += 1;
                        true
                    }
                    _ => false,
                };
                PlanStep::DoThnot { goal, assert_negation }
            }
            "fail" => PlanStep::Fail,
            "bind" => {
                let a = self.term()?;
                let b = self.term()?;
                PlanStep::Bind(a, b)
            }
            _ => {
                self.pos -= 1;
                return self.err("`assert`, `goal`, `thnot`, `fail`, or `bind`");
            }
        };
        self.expect_rparen("`)` closing the step")?;
        Ok(step)
    }

    fn prob_clause(&mut self) -> Result<ProbConstraint, ParseError> {
        self.expect_lparen("`(conditional ...)` or `(marginal ...)`")?;
        let kw = self.name("`conditional` or `marginal`")?;
        let constraint = match kw.as_str() {
            "conditional" => {
                let event = Symbol::from(self.name("event name")?.as_str());
                let given = Symbol::from(self.name("condition name")?.as_str());
                let value = self.probability()?;
                ProbConstraint::Conditional { event, given, value }
            }
            "marginal" => {
                let event = Symbol::from(self.name("event name")?.as_str());
                let value = self.probability()?;
                ProbConstraint::Marginal { event, value }
            }
            _ => {
                self.pos -= 1;
                return self.err("`conditional` or `marginal`");
            }
        };
        self.expect_rparen("`)` closing the probability clause")?;
        Ok(constraint)
    }

    fn probability(&mut self) -> Result<f64, ParseError> {
        let at = self.pos;
        let w = self.word("a probability in [0, 1]")?;
        match w.parse::<f64>() {
            Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
            _ => {
                self.pos = at;
                self.err("a probability in [0, 1]")
            }
        }
    }

    fn prop(&mut self) -> Result<Prop, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if !w.starts_with('?') => {
                let name = w.clone();
                self.pos += 1;
                Ok(Prop::atom0(name.as_str()))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let head = self.name("a connective or predicate name")?;
                let prop = match head.as_str() {
                    "not" => Prop::not(self.prop()?),
                    "and" => {
                        let a = self.prop()?;
                        let b = self.prop()?;
                        Prop::and(a, b)
                    }
                    "or" => {
                        let a = self.prop()?;
                        let b = self.prop()?;
                        Prop::or(a, b)
                    }
                    "implies" => {
                        let a = self.prop()?;
                        let b = self.prop()?;
                        Prop::implies(a, b)
                    }
                    pred => {
                        let mut args = Vec::new();
                        while !matches!(self.peek(), Some(Tok::RParen)) {
                            args.push(self.term()?);
                        }
                        Prop::atom(pred, args)
                    }
                };
                self.expect_rparen("`)` closing the proposition")?;
                Ok(prop)
            }
            _ => self.err("a proposition"),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                if let Some(var_name) = w.strip_prefix('?') {
                    if var_name.is_empty() {
                        self.pos -= 1;
                        return self.err("a variable name after `?`");
                    }
                    Ok(Term::var(var_name, 0))
                } else {
                    Ok(Term::constant(w.as_str()))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let functor = self.name("a functor name")?;
                let mut args = Vec::new();
                while !matches!(self.peek(), Some(Tok::RParen)) {
                    args.push(self.term()?);
                }
                if args.is_empty() {
                    self.pos -= 1;
                    return self.err("at least one argument in a compound term");
                }
                self.pos += 1;
                Ok(Term::compound(functor.as_str(), args))
            }
            _ => self.err("a term"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Parse a whole document. Empty input is an empty document.
pub fn parse_document(text: &str) -> Result<KbDocument, ParseError> {
    let mut p = Parser::new(text);
    p.document()
}

/// Parse exactly one proposition, rejecting trailing input.
pub fn parse_prop(text: &str) -> Result<Prop, ParseError> {
    let mut p = Parser::new(text);
    let prop = p.prop()?;
    if !p.at_end() {
        return p.err("end of input");
    }
    Ok(prop)
}

/// Parse a sequence of clauses (as they would appear inside a theory form).
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, ParseError> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.clause()?);
    }
    Ok(out)
}

/// Split input into its top-level forms: balanced paren groups and bare
/// words, re-rendered canonically. The REPL uses this to carve a command
/// tail into arguments before parsing each piece.
pub fn split_forms(text: &str) -> Result<Vec<String>, ParseError> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    while p.peek().is_some() {
        let start = p.pos;
        let mut depth = 0usize;
        loop {
            match p.peek() {
                Some(Tok::LParen) => depth += 1,
                Some(Tok::RParen) => {
                    if depth == 0 {
                        return p.err("a form, not `)`");
                    }
                    depth -= 1;
                }
                Some(Tok::Word(_)) => {}
                None => return p.err("`)` closing the form"),
            }
            p.pos += 1;
            if depth == 0 {
                break;
            }
        }
        out.push(render_tokens(&p.toks[start..p.pos]));
    }
    Ok(out)
}

fn render_tokens(toks: &[Spanned]) -> String {
    let mut out = String::new();
    let mut gap = false;
    for s in toks {
        match &s.tok {
            Tok::LParen => {
                if gap {
                    out.push(' ');
                }
                out.push('(');
                gap = false;
            }
            Tok::RParen => {
                out.push(')');
                gap = true;
            }
            Tok::Word(w) => {
                if gap {
                    out.push(' ');
                }
                out.push_str(w);
                gap = true;
            }
        }
    }
    out
}

impl fmt::Display for KbDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.theories.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Display for TheoryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(theory {}", self.name)?;
        for clause in &self.clauses {
            write!(f, "\n  {clause}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Assert(p) => write!(f, "(assert {p})"),
            Clause::Rule { premises, conclusion } => {
                write!(f, "(rule (")?;
                for (i, p) in premises.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ") {conclusion})")
            }
            Clause::Implies(p, q) => write!(f, "(implies {p} {q})"),
            Clause::Plan { trigger, steps } => {
                write!(f, "(plan {} (", fmt_trigger(trigger))?;
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", fmt_step(s))?;
                }
                write!(f, "))")
            }
            Clause::Prob(c) => match c {
                ProbConstraint::Conditional { event, given, value } => {
                    write!(f, "(prob (conditional {event} {given} {value}))")
                }
                ProbConstraint::Marginal { event, value } => {
                    write!(f, "(prob (marginal {event} {value}))")
                }
            },
        }
    }
}

pub fn fmt_trigger(t: &Trigger) -> String {
    match t {
        Trigger::WhenAssert(p) => format!("(when-assert {p})"),
        Trigger::WhenGoal(p) => format!("(when-goal {p})"),
    }
}

pub fn fmt_step(s: &PlanStep) -> String {
    match s {
        PlanStep::DoAssert(p) => format!("(assert {p})"),
        PlanStep::DoGoal(p) => format!("(goal {p})"),
        PlanStep::DoThnot { goal, assert_negation: true } => format!("(thnot {goal} assert)"),
        PlanStep::DoThnot { goal, assert_negation: false } => format!("(thnot {goal})"),
        PlanStep::Fail => "(fail)".to_string(),
        PlanStep::Bind(a, b) => format!("(bind {a} {b})"),
    }
}
