//! Propositions: atoms over terms, closed under not/and/or/implies.
//!
//! The connective set is deliberately small. Implication here is the strong
//! connective that carries its contrapositive with it; entailment rules live
//! in [`crate::theory`] and are a different thing.

use std::collections::BTreeMap;
use std::fmt;

use crate::symbol::Symbol;
use crate::term::{freshen_term, unify_into, Substitution, Term, UnifyFailure, Var};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Prop {
    /// Predicate applied to zero or more terms. A bare name is a
    /// zero-argument atom.
    Atom { pred: Symbol, args: Vec<Term> },
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
}

impl Prop {
    pub fn atom(pred: impl Into<Symbol>, args: Vec<Term>) -> Prop {
        Prop::Atom { pred: pred.into(), args }
    }

    pub fn atom0(pred: impl Into<Symbol>) -> Prop {
        Prop::Atom { pred: pred.into(), args: Vec::new() }
    }

    pub fn not(p: Prop) -> Prop {
        Prop::Not(Box::new(p))
    }

    pub fn and(a: Prop, b: Prop) -> Prop {
        Prop::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Prop, b: Prop) -> Prop {
        Prop::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Prop, b: Prop) -> Prop {
        Prop::Implies(Box::new(a), Box::new(b))
    }

    /// The negation of `self`, collapsing a leading Not instead of stacking
    /// a new one.
    pub fn negated(&self) -> Prop {
        match self {
            Prop::Not(inner) => (**inner).clone(),
            other => Prop::not(other.clone()),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Prop::Atom { args, .. } => args.iter().all(Term::is_ground),
            Prop::Not(p) => p.is_ground(),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                a.is_ground() && b.is_ground()
            }
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Prop::Atom { args, .. } => {
                for t in args {
                    t.collect_vars(out);
                }
            }
            Prop::Not(p) => p.collect_vars(out),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn apply(&self, s: &Substitution) -> Prop {
        match self {
            Prop::Atom { pred, args } => Prop::Atom {
                pred: pred.clone(),
                args: args.iter().map(|t| s.apply(t)).collect(),
            },
            Prop::Not(p) => Prop::not(p.apply(s)),
            Prop::And(a, b) => Prop::and(a.apply(s), b.apply(s)),
            Prop::Or(a, b) => Prop::or(a.apply(s), b.apply(s)),
            Prop::Implies(a, b) => Prop::implies(a.apply(s), b.apply(s)),
        }
    }

    pub fn freshen(&self, scope: u32, map: &mut BTreeMap<Var, Var>) -> Prop {
        match self {
            Prop::Atom { pred, args } => Prop::Atom {
                pred: pred.clone(),
                args: args.iter().map(|t| freshen_term(t, scope, map)).collect(),
            },
            Prop::Not(p) => Prop::not(p.freshen(scope, map)),
            Prop::And(a, b) => Prop::and(a.freshen(scope, map), b.freshen(scope, map)),
            Prop::Or(a, b) => Prop::or(a.freshen(scope, map), b.freshen(scope, map)),
            Prop::Implies(a, b) => Prop::implies(a.freshen(scope, map), b.freshen(scope, map)),
        }
    }

    /// Strip pairs of leading negations. `¬¬¬P` keys the same contradiction
    /// as `¬P`; used to report each inconsistency once.
    pub fn strip_double_negations(&self) -> &Prop {
        match self {
            Prop::Not(inner) => match &**inner {
                Prop::Not(core) => core.strip_double_negations(),
                _ => self,
            },
            _ => self,
        }
    }

    /// Every subformula including `self`, pre-order, duplicates removed.
    pub fn subformulas(&self) -> Vec<Prop> {
        let mut out = Vec::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut Vec<Prop>) {
        if !out.contains(self) {
            out.push(self.clone());
        }
        match self {
            Prop::Atom { .. } => {}
            Prop::Not(p) => p.collect_subformulas(out),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
        }
    }

    /// Count of atom and connective occurrences; the size measure for
    /// budget accounting.
    pub fn size(&self) -> usize {
        match self {
            Prop::Atom { .. } => 1,
            Prop::Not(p) => 1 + p.size(),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::Atom { pred, args } => {
                if args.is_empty() {
                    write!(f, "{pred}")
                } else {
                    write!(f, "({pred}")?;
                    for t in args {
                        write!(f, " {t}")?;
                    }
                    write!(f, ")")
                }
            }
            Prop::Not(p) => write!(f, "(not {p})"),
            Prop::And(a, b) => write!(f, "(and {a} {b})"),
            Prop::Or(a, b) => write!(f, "(or {a} {b})"),
            Prop::Implies(a, b) => write!(f, "(implies {a} {b})"),
        }
    }
}

/// Unify two propositions, extending `s`. Connectives must match exactly;
/// only atoms bind variables.
pub fn unify_props(a: &Prop, b: &Prop, s: &Substitution) -> Result<Substitution, UnifyFailure> {
    let mut out = s.clone();
    unify_props_into(a, b, &mut out)?;
    Ok(out)
}

fn unify_props_into(a: &Prop, b: &Prop, s: &mut Substitution) -> Result<(), UnifyFailure> {
    match (a, b) {
        (Prop::Atom { pred: p1, args: a1 }, Prop::Atom { pred: p2, args: a2 }) => {
            if p1 != p2 {
                return Err(UnifyFailure::FunctorMismatch(p1.clone(), p2.clone()));
            }
            if a1.len() != a2.len() {
                return Err(UnifyFailure::ArityMismatch(p1.clone(), a1.len(), a2.len()));
            }
            for (x, y) in a1.iter().zip(a2.iter()) {
                unify_into(x, y, s)?;
            }
            Ok(())
        }
        (Prop::Not(x), Prop::Not(y)) => unify_props_into(x, y, s),
        (Prop::And(x1, y1), Prop::And(x2, y2))
        | (Prop::Or(x1, y1), Prop::Or(x2, y2))
        | (Prop::Implies(x1, y1), Prop::Implies(x2, y2)) => {
            unify_props_into(x1, x2, s)?;
            unify_props_into(y1, y2, s)
        }
        _ => Err(UnifyFailure::ShapeMismatch),
    }
}
