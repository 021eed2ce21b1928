//! First-order terms, substitutions, and unification.
//!
//! Unification implements Robinson's algorithm with the occurs check always
//! on, and treats distinct constant names as distinct objects (the
//! unique-name assumption), so `peking` never unifies with `beijing`.
//! Unification failure is a value, not a fault.

use std::collections::BTreeMap;
use std::fmt;

use crate::symbol::Symbol;

/// A scoped variable. Scope ids keep plan and rule instantiations apart:
/// freshening into a never-before-used scope yields variables disjoint
/// from every earlier scope without gensym names.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub name: Symbol,
    pub scope: u32,
}

impl Var {
    pub fn new(name: impl Into<Symbol>, scope: u32) -> Var {
        Var { name: name.into(), scope }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scope == 0 {
            write!(f, "?{}", self.name)
        } else {
            write!(f, "?{}@{}", self.name, self.scope)
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Constant(Symbol),
    Variable(Var),
    /// Compound term; arity is fixed per occurrence and args are never empty
    /// (a zero-argument compound is just a constant).
    Compound { functor: Symbol, args: Vec<Term> },
}

impl Term {
    pub fn constant(name: impl Into<Symbol>) -> Term {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<Symbol>, scope: u32) -> Term {
        Term::Variable(Var::new(name, scope))
    }

    pub fn compound(functor: impl Into<Symbol>, args: Vec<Term>) -> Term {
        debug_assert!(!args.is_empty(), "zero-argument compound; use a constant");
        Term::Compound { functor: functor.into(), args }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant(_) => true,
            Term::Variable(_) => false,
            Term::Compound { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Does `v` occur anywhere in this term?
    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Constant(_) => false,
            Term::Variable(w) => w == v,
            Term::Compound { args, .. } => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Constant(_) => {}
            Term::Variable(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound { args, .. } => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => write!(f, "{c}"),
            Term::Variable(v) => write!(f, "{v}"),
            Term::Compound { functor, args } => {
                write!(f, "({functor}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A finite map from variables to terms, kept in resolved form: no bound
/// variable occurs in any binding's range, so applying twice equals
/// applying once.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

/// Unification failure. Carries enough to say why, nothing more.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UnifyFailure {
    /// Distinct constant names denote distinct objects.
    ConstantClash(Symbol, Symbol),
    FunctorMismatch(Symbol, Symbol),
    ArityMismatch(Symbol, usize, usize),
    /// Binding would build an infinite term.
    OccursCheck(Var),
    /// Structurally incompatible shapes (constant vs compound).
    ShapeMismatch,
}

impl fmt::Display for UnifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnifyFailure::ConstantClash(a, b) => write!(f, "constants {a} and {b} are distinct"),
            UnifyFailure::FunctorMismatch(a, b) => write!(f, "functors {a} and {b} differ"),
            UnifyFailure::ArityMismatch(s, a, b) => write!(f, "{s} used with arity {a} and {b}"),
            UnifyFailure::OccursCheck(v) => write!(f, "occurs check: {v} inside its own binding"),
            UnifyFailure::ShapeMismatch => write!(f, "term shapes do not match"),
        }
    }
}

impl std::error::Error for UnifyFailure {}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Constant(_) => t.clone(),
            Term::Variable(v) => match self.bindings.get(v) {
                // Ranges are fully resolved, no chasing needed.
                Some(bound) => bound.clone(),
                None => t.clone(),
            },
            Term::Compound { functor, args } => Term::Compound {
                functor: functor.clone(),
                args: args.iter().map(|a| self.apply(a)).collect(),
            },
        }
    }

    /// Bind `v` to `t`, keeping the substitution resolved and occurs-check
    /// clean. `t` must already be resolved under `self`.
    fn bind(&mut self, v: Var, t: Term) -> Result<(), UnifyFailure> {
        if let Term::Variable(w) = &t {
            if *w == v {
                return Ok(());
            }
        }
        if t.contains_var(&v) {
            return Err(UnifyFailure::OccursCheck(v));
        }
        let single = Substitution {
            bindings: BTreeMap::from([(v.clone(), t.clone())]),
        };
        for range in self.bindings.values_mut() {
            *range = single.apply(range);
        }
        self.bindings.insert(v, t);
        Ok(())
    }
}

/// Most general unifier of `a` and `b` extending `s`. On success, applying
/// the result to `a` and `b` yields identical terms.
pub fn unify(a: &Term, b: &Term, s: &Substitution) -> Result<Substitution, UnifyFailure> {
    let mut out = s.clone();
    unify_into(a, b, &mut out)?;
    Ok(out)
}

pub(crate) fn unify_into(a: &Term, b: &Term, s: &mut Substitution) -> Result<(), UnifyFailure> {
    let a = s.apply(a);
    let b = s.apply(b);
    match (&a, &b) {
        (Term::Constant(x), Term::Constant(y)) => {
            if x == y {
                Ok(())
            } else {
                Err(UnifyFailure::ConstantClash(x.clone(), y.clone()))
            }
        }
        (Term::Variable(v), _) => s.bind(v.clone(), b),
        (_, Term::Variable(v)) => s.bind(v.clone(), a),
        (
            Term::Compound { functor: f1, args: a1 },
            Term::Compound { functor: f2, args: a2 },
        ) => {
            if f1 != f2 {
                return Err(UnifyFailure::FunctorMismatch(f1.clone(), f2.clone()));
            }
            if a1.len() != a2.len() {
                return Err(UnifyFailure::ArityMismatch(f1.clone(), a1.len(), a2.len()));
            }
            for (x, y) in a1.iter().zip(a2.iter()) {
                unify_into(x, y, s)?;
            }
            Ok(())
        }
        _ => Err(UnifyFailure::ShapeMismatch),
    }
}

/// Renames every variable into `scope`, preserving sharing. Distinct input
/// variables stay distinct: when two variables differ only by scope, the
/// later one gets its old scope folded into the name.
pub fn freshen_term(t: &Term, scope: u32, map: &mut BTreeMap<Var, Var>) -> Term {
    match t {
        Term::Constant(_) => t.clone(),
        Term::Variable(v) => Term::Variable(freshen_var(v, scope, map)),
        Term::Compound { functor, args } => Term::Compound {
            functor: functor.clone(),
            args: args.iter().map(|a| freshen_term(a, scope, map)).collect(),
        },
    }
}

pub(crate) fn freshen_var(v: &Var, scope: u32, map: &mut BTreeMap<Var, Var>) -> Var {
    if let Some(renamed) = map.get(v) {
        return renamed.clone();
    }
    let mut candidate = Var::new(v.name.clone(), scope);
    if map.values().any(|w| *w == candidate) {
        candidate = Var::new(
            Symbol::new(&format!("{}~{}", v.name, v.scope)),
            scope,
        );
    }
    map.insert(v.clone(), candidate.clone());
    candidate
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    fn v(name: &str) -> Term {
        Term::var(name, 0)
    }

    fn f(args: Vec<Term>) -> Term {
        Term::compound("f", args)
    }

    #[test]
    fn variable_binds_to_constant() {
        let s = unify(&v("X"), &c("peking"), &Substitution::new()).unwrap();
        assert_eq!(s.apply(&v("X")), c("peking"));
    }

    #[test]
    fn distinct_constants_clash() {
        let r = unify(&c("peking"), &c("beijing"), &Substitution::new());
        assert_eq!(
            r,
            Err(UnifyFailure::ConstantClash(Symbol::new("peking"), Symbol::new("beijing")))
        );
    }

    #[test]
    fn shared_variable_forces_equal_args() {
        let a = Term::compound("f", vec![v("X"), v("X")]);
        let b = Term::compound("f", vec![c("a"), c("b")]);
        assert!(unify(&a, &b, &Substitution::new()).is_err());
    }

    #[test]
    fn occurs_check_rejects_cyclic_binding() {
        let r = unify(&v("X"), &f(vec![v("X")]), &Substitution::new());
        assert!(matches!(r, Err(UnifyFailure::OccursCheck(_))));
    }

    #[test]
    fn arity_is_fixed_per_occurrence() {
        let r = unify(&f(vec![c("a")]), &f(vec![c("a"), c("b")]), &Substitution::new());
        assert!(matches!(r, Err(UnifyFailure::ArityMismatch(_, 1, 2))));
    }

    #[test]
    fn apply_replaces_bound_and_leaves_unbound() {
        let s = unify(&v("X"), &c("a"), &Substitution::new()).unwrap();
        assert_eq!(s.apply(&f(vec![v("X")])), f(vec![c("a")]));
        assert_eq!(s.apply(&f(vec![v("Y")])), f(vec![v("Y")]));
    }

    #[test]
    fn apply_nested_expansion() {
        // f(X, g(X)) under {X -> h(Z)} expands everywhere.
        let s = unify(&v("X"), &Term::compound("h", vec![v("Z")]), &Substitution::new()).unwrap();
        let t = Term::compound("f", vec![v("X"), Term::compound("g", vec![v("X")])]);
        let expect = Term::compound(
            "f",
            vec![
                Term::compound("h", vec![v("Z")]),
                Term::compound("g", vec![Term::compound("h", vec![v("Z")])]),
            ],
        );
        assert_eq!(s.apply(&t), expect);
    }

    #[test]
    fn substitution_is_idempotent() {
        // Chained bindings resolve: X -> Y then Y -> a leaves X -> a.
        let s = unify(&v("X"), &v("Y"), &Substitution::new()).unwrap();
        let s = unify(&v("Y"), &c("a"), &s).unwrap();
        let t = f(vec![v("X"), v("Y")]);
        let once = s.apply(&t);
        assert_eq!(once, s.apply(&once));
        assert_eq!(once, f(vec![c("a"), c("a")]));
    }

    #[test]
    fn unify_applies_existing_bindings_first() {
        let s = unify(&v("X"), &c("a"), &Substitution::new()).unwrap();
        assert!(unify(&v("X"), &c("b"), &s).is_err());
        assert!(unify(&v("X"), &c("a"), &s).is_ok());
    }

    #[test]
    fn freshen_preserves_sharing_and_constants() {
        let mut map = BTreeMap::new();
        let t = Term::compound("f", vec![v("X"), v("X")]);
        let out = freshen_term(&t, 7, &mut map);
        assert_eq!(out, Term::compound("f", vec![Term::var("X", 7), Term::var("X", 7)]));
        let mut map = BTreeMap::new();
        assert_eq!(freshen_term(&c("a"), 7, &mut map), c("a"));
    }

    #[test]
    fn freshen_keeps_distinct_vars_distinct() {
        let mut map = BTreeMap::new();
        let t = Term::compound("f", vec![Term::var("X", 1), Term::var("X", 2)]);
        let out = freshen_term(&t, 9, &mut map);
        if let Term::Compound { args, .. } = out {
            assert_ne!(args[0], args[1]);
            let mut vars = Vec::new();
            args[0].collect_vars(&mut vars);
            args[1].collect_vars(&mut vars);
            assert!(vars.iter().all(|w| w.scope == 9));
        } else {
            panic!("expected compound");
        }
    }
}
