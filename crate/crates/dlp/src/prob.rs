//! Contraposition leakage in probabilistic constraints.
//!
//! The symbolic engine refuses to run an entailment rule backwards, but
//! probability has no such discipline: P(T|W) and P(T) together bound P(W)
//! from above, because P(T) >= P(T and W) = P(T|W) * P(W). Feed it
//! P(T|W) = 1 and P(T) = 0 and the conditioning event is forced to
//! probability zero, a contrapositive conclusion in all but name. This
//! module computes that bound and flags where a theory's rule set lines up
//! with constraint pairs that leak this way.

use std::collections::BTreeSet;

use num_traits::Float;

use crate::prop::Prop;
use crate::symbol::Symbol;
use crate::term::Term;
use crate::theory::{EntailmentRule, RuleId};

/// Concrete scalar used wherever constraints are stored or printed.
pub type Prob = f64;

#[derive(Clone, PartialEq, Debug)]
pub enum ProbError {
    /// A probability outside [0,1] (or NaN).
    InvalidProbability(f64),
}

impl std::fmt::Display for ProbError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbError::InvalidProbability(v) => write!(f, "invalid probability {v}"),
        }
    }
}

impl std::error::Error for ProbError {}

/// A stored constraint: P(event | given) = value, or P(event) = value.
#[derive(Clone, PartialEq, Debug)]
pub enum ProbConstraint {
    Conditional { event: Symbol, given: Symbol, value: Prob },
    Marginal { event: Symbol, value: Prob },
}

impl ProbConstraint {
    pub fn validate(&self) -> Result<(), ProbError> {
        let v = match self {
            ProbConstraint::Conditional { value, .. } => *value,
            ProbConstraint::Marginal { value, .. } => *value,
        };
        check_unit(v).map(|_| ())
    }
}

impl std::fmt::Display for ProbConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbConstraint::Conditional { event, given, value } => {
                write!(f, "P({event} | {given}) = {value:.6}")
            }
            ProbConstraint::Marginal { event, value } => write!(f, "P({event}) = {value:.6}"),
        }
    }
}

/// Upper bound on the conditioning event, with a flag for the vacuous case.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Bound<F> {
    pub value: F,
    /// True when pCond = 0: division is undefined and no constraint
    /// follows, so `value` is the trivial 1.
    pub vacuous: bool,
}

fn check_unit<F: Float>(v: F) -> Result<F, ProbError> {
    if v >= F::zero() && v <= F::one() {
        Ok(v)
    } else {
        Err(ProbError::InvalidProbability(v.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Given P(T|W) = `p_cond` and P(T) = `p_marginal`, the largest value
/// P(W) can take is min(1, p_marginal / p_cond).
pub fn upper_bound_from_conditional<F: Float>(
    p_cond: F,
    p_marginal: F,
) -> Result<Bound<F>, ProbError> {
    let p_cond = check_unit(p_cond)?;
    let p_marginal = check_unit(p_marginal)?;
    if p_cond == F::zero() {
        return Ok(Bound { value: F::one(), vacuous: true });
    }
    let raw = p_marginal / p_cond;
    Ok(Bound { value: raw.min(F::one()), vacuous: false })
}

/// One leak: the constraints force P(event) <= bound even though no rule
/// runs toward `event`.
#[derive(Clone, PartialEq, Debug)]
pub struct LeakageDiagnostic {
    /// The conditioning event whose probability got squeezed.
    pub event: Symbol,
    pub bound: Prob,
    pub provenance: LeakageProvenance,
}

/// Which constraints produced the bound, and which of the theory's rules
/// mention the same symbols (the forward inference whose reversal the
/// constraints smuggle in).
#[derive(Clone, PartialEq, Debug)]
pub struct LeakageProvenance {
    pub conditional_event: Symbol,
    pub conditional_given: Symbol,
    pub p_cond: Prob,
    pub p_marginal: Prob,
    pub rules: Vec<RuleId>,
}

/// Pair every conditional with every marginal over the same event and
/// report the pairs whose bound actually bites (p > 0 and q/p < 1).
pub fn audit_contraposition(
    rules: &[EntailmentRule],
    constraints: &[ProbConstraint],
) -> Vec<LeakageDiagnostic> {
    let mut out = Vec::new();
    for c in constraints {
        let (event, given, p) = match c {
            ProbConstraint::Conditional { event, given, value } => (event, given, *value),
            ProbConstraint::Marginal { .. } => continue,
        };
        if p <= 0.0 {
            continue;
        }
        for m in constraints {
            let q = match m {
                ProbConstraint::Marginal { event: e, value } if e == event => *value,
                _ => continue,
            };
            let bound = q / p;
            if bound >= 1.0 {
                continue;
            }
            let matching = rules
                .iter()
                .filter(|r| rule_mentions(r, event, given))
                .map(|r| r.id)
                .collect();
            out.push(LeakageDiagnostic {
                event: given.clone(),
                bound,
                provenance: LeakageProvenance {
                    conditional_event: event.clone(),
                    conditional_given: given.clone(),
                    p_cond: p,
                    p_marginal: q,
                    rules: matching,
                },
            });
        }
    }
    out
}

/// A rule lines up with a constraint pair when its conclusion mentions the
/// conditioned event and some premise mentions the conditioning one.
fn rule_mentions(rule: &EntailmentRule, event: &Symbol, given: &Symbol) -> bool {
    let mut conclusion_syms = BTreeSet::new();
    prop_symbols(&rule.conclusion, &mut conclusion_syms);
    if !conclusion_syms.contains(event) {
        return false;
    }
    let mut premise_syms = BTreeSet::new();
    for p in &rule.premises {
        prop_symbols(p, &mut premise_syms);
    }
    premise_syms.contains(given)
}

fn prop_symbols(p: &Prop, out: &mut BTreeSet<Symbol>) {
    match p {
        Prop::Atom { pred, args } => {
            out.insert(pred.clone());
            for t in args {
                term_symbols(t, out);
            }
        }
        Prop::Not(q) => prop_symbols(q, out),
        Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
            prop_symbols(a, out);
            prop_symbols(b, out);
        }
    }
}

fn term_symbols(t: &Term, out: &mut BTreeSet<Symbol>) {
    match t {
        Term::Constant(c) => {
            out.insert(c.clone());
        }
        Term::Variable(_) => {}
        Term::Compound { functor, args } => {
            out.insert(functor.clone());
            for a in args {
                term_symbols(a, out);
            }
        }
    }
}
