//! Named theories with provenance ledgers.
//!
//! A theory is an append-only context: assertions, rules, and plans are
//! added and never deleted in place. Retraction is expressed by deriving a
//! new theory that omits items from its parent's view; the parent is
//! snapshotted at derivation time, so later parent growth never leaks into
//! the child. Every derived conclusion lands in a per-theory derivation
//! ledger, and pro/con arguments (including arguments about arguments) go
//! in a separate ledger that never affects derivability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::planner::{Plan, PlanOrigin, PlanStep, Trigger};
use crate::prob::ProbConstraint;
use crate::prop::Prop;
use crate::symbol::Symbol;

macro_rules! ids {
    ($($name:ident, $prefix:literal;)*) => {$(
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    )*};
}

ids! {
    TheoryId, "t";
    AssertionId, "a";
    RuleId, "r";
    PlanId, "p";
    DerivationId, "d";
    ArgumentId, "arg";
}

/// Anything a derived theory can omit from its parent's view.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ItemId {
    Assertion(AssertionId),
    Rule(RuleId),
    Plan(PlanId),
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemId::Assertion(id) => write!(f, "{id}"),
            ItemId::Rule(id) => write!(f, "{id}"),
            ItemId::Plan(id) => write!(f, "{id}"),
        }
    }
}

impl ItemId {
    /// Parse the printed form: `a3`, `r1`, `p0`.
    pub fn parse(s: &str) -> Option<ItemId> {
        let (kind, digits) = s.split_at(1);
        let n: u64 = digits.parse().ok()?;
        match kind {
            "a" => Some(ItemId::Assertion(AssertionId(n))),
            "r" => Some(ItemId::Rule(RuleId(n))),
            "p" => Some(ItemId::Plan(PlanId(n))),
            _ => None,
        }
    }
}

/// Inference rules the engine is allowed to use. Derivation ledgers carry
/// these tags; nothing else ever appears there.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RuleTag {
    Reiteration,
    RuleApplication,
    AndIntro,
    AndElimLeft,
    AndElimRight,
    DisjunctiveSyllogism,
    DoubleNegationIntro,
    DoubleNegationElim,
    DeMorganNotAnd,
    DeMorganNotOr,
    DeMorganOrNot,
    DeMorganAndNot,
    ImpliesElim,
    ImpliesContraElim,
    ImpliesIntro,
    OrElim,
}

impl RuleTag {
    pub const ALL: [RuleTag; 16] = [
        RuleTag::Reiteration,
        RuleTag::RuleApplication,
        RuleTag::AndIntro,
        RuleTag::AndElimLeft,
        RuleTag::AndElimRight,
        RuleTag::DisjunctiveSyllogism,
        RuleTag::DoubleNegationIntro,
        RuleTag::DoubleNegationElim,
        RuleTag::DeMorganNotAnd,
        RuleTag::DeMorganNotOr,
        RuleTag::DeMorganOrNot,
        RuleTag::DeMorganAndNot,
        RuleTag::ImpliesElim,
        RuleTag::ImpliesContraElim,
        RuleTag::ImpliesIntro,
        RuleTag::OrElim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleTag::Reiteration => "reiteration",
            RuleTag::RuleApplication => "rule-application",
            RuleTag::AndIntro => "and-intro",
            RuleTag::AndElimLeft => "and-elim-left",
            RuleTag::AndElimRight => "and-elim-right",
            RuleTag::DisjunctiveSyllogism => "disjunctive-syllogism",
            RuleTag::DoubleNegationIntro => "double-negation-intro",
            RuleTag::DoubleNegationElim => "double-negation-elim",
            RuleTag::DeMorganNotAnd => "de-morgan-not-and",
            RuleTag::DeMorganNotOr => "de-morgan-not-or",
            RuleTag::DeMorganOrNot => "de-morgan-or-not",
            RuleTag::DeMorganAndNot => "de-morgan-and-not",
            RuleTag::ImpliesElim => "implies-elim",
            RuleTag::ImpliesContraElim => "implies-contra-elim",
            RuleTag::ImpliesIntro => "implies-intro",
            RuleTag::OrElim => "or-elim",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleTag> {
        RuleTag::ALL.iter().copied().find(|t| t.name() == s)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rules the engine refuses by construction. These never tag a derivation;
/// they exist only to name what a blocked-inference diagnostic would have
/// used.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExcludedRule {
    ContrapositionOfEntailmentRule,
    ExFalso,
    Reductio,
    OrIntro,
}

impl ExcludedRule {
    pub fn name(self) -> &'static str {
        match self {
            ExcludedRule::ContrapositionOfEntailmentRule => "contraposition-of-entailment-rule",
            ExcludedRule::ExFalso => "ex-falso",
            ExcludedRule::Reductio => "reductio",
            ExcludedRule::OrIntro => "or-intro",
        }
    }
}

impl fmt::Display for ExcludedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Assertion {
    pub id: AssertionId,
    pub prop: Prop,
    /// Free-form origin marker: `user`, `kb`, `closed-world`,
    /// `plan-triggered`, whatever the caller wants recorded.
    pub source: String,
}

/// Directional rule premises ⊢ conclusion, local to one theory. Applied
/// only premises-to-conclusion; no contrapositive variant ever exists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EntailmentRule {
    pub id: RuleId,
    pub premises: Vec<Prop>,
    pub conclusion: Prop,
    pub theory: TheoryId,
}

/// One node of a proof tree. Premise ids strictly precede `id`, depth is
/// 1 + max premise depth, and a leaf (reiteration, no premises) names
/// either a live assertion or one of its own hypotheses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub id: DerivationId,
    pub conclusion: Prop,
    pub rule: RuleTag,
    pub premises: Vec<DerivationId>,
    pub theory: TheoryId,
    pub depth: u32,
    /// Hypotheses in force where this node was derived; nonempty only
    /// inside implies-intro / or-elim subderivations.
    pub hypotheses: Vec<Prop>,
    /// The entailment rule instantiated, when `rule` is rule-application.
    pub via: Option<RuleId>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Polarity {
    Pro,
    Con,
}

impl Polarity {
    pub fn name(self) -> &'static str {
        match self {
            Polarity::Pro => "pro",
            Polarity::Con => "con",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ArgTarget {
    Prop(Prop),
    Argument(ArgumentId),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Support {
    Derivation(DerivationId),
    Text(String),
}

/// A pro/con ledger entry about a proposition or about another argument.
/// Arguments never change what is derivable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Argument {
    pub id: ArgumentId,
    pub target: ArgTarget,
    pub polarity: Polarity,
    pub support: Support,
    pub author: String,
}

/// Where a derived theory came from: parent, the items hidden from its
/// view, and how long each parent ledger was at derivation time.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Basis {
    pub parent: TheoryId,
    pub omitted: BTreeSet<ItemId>,
    assert_mark: usize,
    rule_mark: usize,
    plan_mark: usize,
}

#[derive(Clone, Debug)]
pub struct Theory {
    pub id: TheoryId,
    pub name: Symbol,
    pub assertions: Vec<Assertion>,
    pub rules: Vec<EntailmentRule>,
    pub plans: Vec<Plan>,
    pub basis: Option<Basis>,
    pub derivations: Vec<Derivation>,
    pub arguments: Vec<Argument>,
    pub constraints: Vec<ProbConstraint>,
    /// assertion id -> (plan that fired, assertion that triggered it)
    pub trigger_links: BTreeMap<AssertionId, (PlanId, AssertionId)>,
}

impl Theory {
    fn new(id: TheoryId, name: Symbol) -> Theory {
        Theory {
            id,
            name,
            assertions: Vec::new(),
            rules: Vec::new(),
            plans: Vec::new(),
            basis: None,
            derivations: Vec::new(),
            arguments: Vec::new(),
            constraints: Vec::new(),
            trigger_links: BTreeMap::new(),
        }
    }

    pub fn derivation(&self, id: DerivationId) -> Option<&Derivation> {
        self.derivations
            .binary_search_by_key(&id, |d| d.id)
            .ok()
            .map(|i| &self.derivations[i])
    }

    pub fn argument(&self, id: ArgumentId) -> Option<&Argument> {
        self.arguments.iter().find(|a| a.id == id)
    }
}

/// What a theory can see: its ancestry's surviving items plus its own,
/// ancestor-first in ledger order.
#[derive(Clone, Default, Debug)]
pub struct VisibleContent {
    pub assertions: Vec<Assertion>,
    pub rules: Vec<EntailmentRule>,
    pub plans: Vec<Plan>,
}

impl VisibleContent {
    pub fn find_assertion(&self, p: &Prop) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.prop == *p)
    }

    pub fn rule(&self, id: RuleId) -> Option<&EntailmentRule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

/// Immutable view handed to engine runs. Engines allocate variable scopes
/// at or above `scope_base`, so nothing they rename can collide with a
/// variable already stored anywhere.
#[derive(Clone, Debug)]
pub struct TheorySnapshot {
    pub theory: TheoryId,
    pub name: Symbol,
    pub content: VisibleContent,
    pub scope_base: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StoreError {
    DuplicateName(Symbol),
    UnknownTheory(String),
    UnknownId(String),
    EmptyPremises,
    CycleDetected(ArgumentId),
    LedgerViolation(String),
}

impl fmt::Display for StoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreError::DuplicateName(n) => write!(f, "theory {n} already exists"),
            StoreError::UnknownTheory(n) => write!(f, "unknown theory {n}"),
            StoreError::UnknownId(id) => write!(f, "unknown id {id}"),
            StoreError::EmptyPremises => write!(f, "a rule needs at least one premise"),
            StoreError::CycleDetected(id) => write!(f, "argument {id} would close a cycle"),
            StoreError::LedgerViolation(msg) => write!(f, "ledger violation: {msg}"),
        }
    }
}

impl std::error::Error for StoreError {}

/// Content to install while deriving a theory.
#[derive(Clone, Debug)]
pub enum Addition {
    Assert { prop: Prop, source: String },
    Rule { premises: Vec<Prop>, conclusion: Prop },
}

#[derive(Default, Debug)]
pub struct TheoryStore {
    theories: Vec<Theory>,
    by_name: BTreeMap<Symbol, TheoryId>,
    next_assertion: u64,
    next_rule: u64,
    next_plan: u64,
    next_derivation: u64,
    next_argument: u64,
    next_scope: u32,
}

impl TheoryStore {
    pub fn new() -> TheoryStore {
        TheoryStore { next_scope: 1, ..TheoryStore::default() }
    }

    pub fn create_theory(&mut self, name: impl Into<Symbol>) -> Result<TheoryId, StoreError> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(StoreError::DuplicateName(name));
        }
        let id = TheoryId(self.theories.len() as u64);
        self.theories.push(Theory::new(id, name.clone()));
        self.by_name.insert(name, id);
        Ok(id)
    }

    pub fn theory_id(&self, name: &str) -> Option<TheoryId> {
        self.by_name.get(&Symbol::new(name)).copied()
    }

    pub fn theory_names(&self) -> impl Iterator<Item = &Symbol> {
        self.theories.iter().map(|t| &t.name)
    }

    pub fn theory(&self, t: TheoryId) -> Result<&Theory, StoreError> {
        self.theories
            .get(t.0 as usize)
            .ok_or_else(|| StoreError::UnknownTheory(t.to_string()))
    }

    fn theory_mut(&mut self, t: TheoryId) -> Result<&mut Theory, StoreError> {
        self.theories
            .get_mut(t.0 as usize)
            .ok_or_else(|| StoreError::UnknownTheory(t.to_string()))
    }

    /// Append a proposition to the theory's ledger. This is the bare store
    /// primitive; plan triggering lives in the planner layer.
    pub fn assert_prop(
        &mut self,
        t: TheoryId,
        prop: Prop,
        source: &str,
    ) -> Result<AssertionId, StoreError> {
        let id = AssertionId(self.next_assertion);
        let theory = self.theory_mut(t)?;
        theory.assertions.push(Assertion { id, prop, source: source.to_string() });
        self.next_assertion += 1;
        Ok(id)
    }

    pub fn add_rule(
        &mut self,
        t: TheoryId,
        premises: Vec<Prop>,
        conclusion: Prop,
    ) -> Result<RuleId, StoreError> {
        if premises.is_empty() {
            return Err(StoreError::EmptyPremises);
        }
        let id = RuleId(self.next_rule);
        let theory = self.theory_mut(t)?;
        theory.rules.push(EntailmentRule { id, premises, conclusion, theory: t });
        self.next_rule += 1;
        Ok(id)
    }

    pub fn add_plan(
        &mut self,
        t: TheoryId,
        trigger: Trigger,
        body: Vec<PlanStep>,
        origin: PlanOrigin,
    ) -> Result<PlanId, StoreError> {
        let id = PlanId(self.next_plan);
        let theory = self.theory_mut(t)?;
        theory.plans.push(Plan { id, trigger, body, origin });
        self.next_plan += 1;
        Ok(id)
    }

    pub fn add_constraint(&mut self, t: TheoryId, c: ProbConstraint) -> Result<(), StoreError> {
        self.theory_mut(t)?.constraints.push(c);
        Ok(())
    }

    pub fn record_trigger(
        &mut self,
        t: TheoryId,
        caused: AssertionId,
        plan: PlanId,
        cause: AssertionId,
    ) -> Result<(), StoreError> {
        self.theory_mut(t)?.trigger_links.insert(caused, (plan, cause));
        Ok(())
    }

    /// Derive a new theory from `base`, hiding `omit` from the inherited
    /// view and installing `additions` locally. The parent's ledgers are
    /// marked at their current lengths: nothing added to the parent later
    /// is visible from the child.
    pub fn derive_theory(
        &mut self,
        base: TheoryId,
        name: impl Into<Symbol>,
        omit: BTreeSet<ItemId>,
        additions: Vec<Addition>,
    ) -> Result<TheoryId, StoreError> {
        let visible = self.visible(base)?;
        for item in &omit {
            let found = match item {
                ItemId::Assertion(id) => visible.assertions.iter().any(|a| a.id == *id),
                ItemId::Rule(id) => visible.rules.iter().any(|r| r.id == *id),
                ItemId::Plan(id) => visible.plans.iter().any(|p| p.id == *id),
            };
            if !found {
                return Err(StoreError::UnknownId(item.to_string()));
            }
        }
        let parent = self.theory(base)?;
        let basis = Basis {
            parent: base,
            omitted: omit,
            assert_mark: parent.assertions.len(),
            rule_mark: parent.rules.len(),
            plan_mark: parent.plans.len(),
        };
        let id = self.create_theory(name)?;
        self.theory_mut(id)?.basis = Some(basis);
        for add in additions {
            match add {
                Addition::Assert { prop, source } => {
                    self.assert_prop(id, prop, &source)?;
                }
                Addition::Rule { premises, conclusion } => {
                    self.add_rule(id, premises, conclusion)?;
                }
            }
        }
        Ok(id)
    }

    /// The theory's view: ancestry first (minus omissions, bounded by the
    /// derivation-time marks), then local items, all in ledger order.
    pub fn visible(&self, t: TheoryId) -> Result<VisibleContent, StoreError> {
        let theory = self.theory(t)?;
        self.visible_bounded(
            theory,
            theory.assertions.len(),
            theory.rules.len(),
            theory.plans.len(),
        )
    }

    fn visible_bounded(
        &self,
        theory: &Theory,
        assert_mark: usize,
        rule_mark: usize,
        plan_mark: usize,
    ) -> Result<VisibleContent, StoreError> {
        let mut out = match &theory.basis {
            Some(basis) => {
                let parent = self.theory(basis.parent)?;
                let mut inherited = self.visible_bounded(
                    parent,
                    basis.assert_mark,
                    basis.rule_mark,
                    basis.plan_mark,
                )?;
                inherited
                    .assertions
                    .retain(|a| !basis.omitted.contains(&ItemId::Assertion(a.id)));
                inherited.rules.retain(|r| !basis.omitted.contains(&ItemId::Rule(r.id)));
                inherited.plans.retain(|p| !basis.omitted.contains(&ItemId::Plan(p.id)));
                inherited
            }
            None => VisibleContent::default(),
        };
        out.assertions.extend_from_slice(&theory.assertions[..assert_mark]);
        out.rules.extend_from_slice(&theory.rules[..rule_mark]);
        out.plans.extend_from_slice(&theory.plans[..plan_mark]);
        Ok(out)
    }

    pub fn snapshot(&self, t: TheoryId) -> Result<TheorySnapshot, StoreError> {
        let theory = self.theory(t)?;
        Ok(TheorySnapshot {
            theory: t,
            name: theory.name.clone(),
            content: self.visible(t)?,
            scope_base: self.next_scope,
        })
    }

    pub fn fresh_scope(&mut self) -> u32 {
        let s = self.next_scope;
        self.next_scope += 1;
        s
    }

    /// Mark every scope below `floor` as used; engines that allocated
    /// scopes locally report back through this.
    pub fn bump_scope_to(&mut self, floor: u32) {
        self.next_scope = self.next_scope.max(floor);
    }

    /// Commit an engine run's derivations. The run uses dense local ids
    /// starting at 0; committing shifts them past everything already in
    /// the store and returns the shift, so local id k becomes global
    /// id (k + shift).
    pub fn commit_run(&mut self, t: TheoryId, run: Vec<Derivation>) -> Result<u64, StoreError> {
        let base = self.next_derivation;
        self.next_derivation += run.len() as u64;
        let theory = self.theory_mut(t)?;
        for mut d in run {
            d.id = DerivationId(d.id.0 + base);
            d.theory = t;
            for p in &mut d.premises {
                *p = DerivationId(p.0 + base);
            }
            theory.derivations.push(d);
        }
        Ok(base)
    }

    pub fn find_derivation(&self, id: DerivationId) -> Option<&Derivation> {
        self.theories.iter().find_map(|t| t.derivation(id))
    }

    pub fn argue(
        &mut self,
        t: TheoryId,
        target: ArgTarget,
        polarity: Polarity,
        support: Support,
        author: &str,
    ) -> Result<ArgumentId, StoreError> {
        {
            let theory = self.theory(t)?;
            if let ArgTarget::Argument(aid) = &target {
                if theory.argument(*aid).is_none() {
                    return Err(StoreError::UnknownId(aid.to_string()));
                }
            }
            if let Support::Derivation(did) = &support {
                if theory.derivation(*did).is_none() {
                    return Err(StoreError::UnknownId(did.to_string()));
                }
            }
        }
        let id = ArgumentId(self.next_argument);
        let arg = Argument { id, target, polarity, support, author: author.to_string() };
        self.check_argument_acyclic(self.theory(t)?, &arg)?;
        self.next_argument += 1;
        self.theory_mut(t)?.arguments.push(arg);
        Ok(id)
    }

    /// Insert an argument keeping its id; the import path. Unlike `argue`,
    /// explicit ids can close a target cycle, so the walk here is the real
    /// guard.
    pub fn insert_argument_raw(&mut self, t: TheoryId, arg: Argument) -> Result<(), StoreError> {
        let theory = self.theory(t)?;
        if theory.argument(arg.id).is_some() {
            return Err(StoreError::LedgerViolation(format!("argument {} repeated", arg.id)));
        }
        // Check against the ledger as it will be once arg is in.
        let mut trial = theory.clone();
        trial.arguments.push(arg.clone());
        self.check_argument_acyclic(&trial, &arg)?;
        self.next_argument = self.next_argument.max(arg.id.0 + 1);
        self.theory_mut(t)?.arguments.push(arg);
        Ok(())
    }

    fn check_argument_acyclic(&self, theory: &Theory, arg: &Argument) -> Result<(), StoreError> {
        let mut seen = BTreeSet::new();
        seen.insert(arg.id);
        let mut cursor = &arg.target;
        while let ArgTarget::Argument(next) = cursor {
            if !seen.insert(*next) {
                return Err(StoreError::CycleDetected(arg.id));
            }
            match theory.argument(*next) {
                Some(a) => cursor = &a.target,
                None => break,
            }
        }
        Ok(())
    }

    /// Insert an assertion keeping its id; the import path.
    pub fn insert_assertion_raw(
        &mut self,
        t: TheoryId,
        a: Assertion,
    ) -> Result<(), StoreError> {
        self.next_assertion = self.next_assertion.max(a.id.0 + 1);
        self.theory_mut(t)?.assertions.push(a);
        Ok(())
    }

    /// Insert a rule keeping its id; the import path.
    pub fn insert_rule_raw(&mut self, t: TheoryId, mut r: EntailmentRule) -> Result<(), StoreError> {
        if r.premises.is_empty() {
            return Err(StoreError::EmptyPremises);
        }
        self.next_rule = self.next_rule.max(r.id.0 + 1);
        r.theory = t;
        self.theory_mut(t)?.rules.push(r);
        Ok(())
    }

    /// Insert a derivation keeping its id, re-validating it against the
    /// ledger built so far: premises must already be present with smaller
    /// ids, depth must recompute, and a leaf must name a visible assertion
    /// or one of its own hypotheses.
    pub fn insert_derivation_raw(
        &mut self,
        t: TheoryId,
        mut d: Derivation,
    ) -> Result<(), StoreError> {
        let visible = self.visible(t)?;
        let theory = self.theory(t)?;
        if theory.derivation(d.id).is_some() {
            return Err(StoreError::LedgerViolation(format!("derivation {} repeated", d.id)));
        }
        if d.premises.is_empty() {
            if d.rule != RuleTag::Reiteration {
                return Err(StoreError::LedgerViolation(format!(
                    "derivation {} has no premises but rule {}",
                    d.id, d.rule
                )));
            }
            if d.depth != 0 {
                return Err(StoreError::LedgerViolation(format!(
                    "leaf derivation {} has depth {}",
                    d.id, d.depth
                )));
            }
            let reiterable = visible.find_assertion(&d.conclusion).is_some()
                || d.hypotheses.contains(&d.conclusion);
            if !reiterable {
                return Err(StoreError::LedgerViolation(format!(
                    "leaf derivation {} reiterates nothing visible",
                    d.id
                )));
            }
        } else {
            let mut max_depth = 0;
            for p in &d.premises {
                if *p >= d.id {
                    return Err(StoreError::LedgerViolation(format!(
                        "derivation {} cites a premise {} not before it",
                        d.id, p
                    )));
                }
                match theory.derivation(*p) {
                    Some(prem) => max_depth = max_depth.max(prem.depth),
                    None => {
                        return Err(StoreError::LedgerViolation(format!(
                            "derivation {} cites missing premise {}",
                            d.id, p
                        )))
                    }
                }
            }
            if d.depth != max_depth + 1 {
                return Err(StoreError::LedgerViolation(format!(
                    "derivation {} depth {} should be {}",
                    d.id,
                    d.depth,
                    max_depth + 1
                )));
            }
        }
        d.theory = t;
        self.next_derivation = self.next_derivation.max(d.id.0 + 1);
        self.theory_mut(t)?.derivations.push(d);
        Ok(())
    }
}
