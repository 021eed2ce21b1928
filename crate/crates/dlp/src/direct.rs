//! Direct inference: natural deduction that stays calm inside an
//! inconsistent theory.
//!
//! The rule ledger keeps reiteration, forward application of entailment
//! rules, the and/or/not Boolean moves (Disjunctive Syllogism, double
//! negation, the four directed De Morgan forms), modus ponens and modus
//! tollens for the `implies` connective, and the two hypothetical rules
//! (implies-intro in its two-way form, or-elim as proof by cases).
//!
//! Four classical rules are excluded by construction and never appear in a
//! derivation:
//!
//! - contraposition of an entailment rule (rules run forward only);
//! - ex falso quodlibet (a contradiction proves nothing else);
//! - reductio ad absurdum (refuting a hypothesis is not a proof of its
//!   negation when the theory itself may be inconsistent);
//! - unrestricted or-introduction (with Disjunctive Syllogism retained,
//!   or-intro would rebuild explosion: from P and not-P, P-or-Q, then Q).
//!
//! Saturation is bounded by a closure set (subformulas of the visible
//! content and goal, their single negations, and De Morgan duals), which
//! makes the ground fragment a decision procedure. Hypothetical reasoning
//! nests to a configurable depth.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::prop::{unify_props, Prop};
use crate::term::Substitution;
use crate::theory::{
    Derivation, DerivationId, EntailmentRule, ExcludedRule, RuleId, RuleTag, StoreError,
    TheoryId, TheorySnapshot, TheoryStore, VisibleContent,
};

/// Caps on one reasoning run. Steps meter worklist pops and hypothetical
/// launches; depth is how far hypotheses may nest.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ProofBudget {
    pub max_steps: u64,
    pub max_hyp_depth: u32,
}

impl Default for ProofBudget {
    fn default() -> ProofBudget {
        ProofBudget { max_steps: 10_000, max_hyp_depth: 3 }
    }
}

/// The finite formula universe a saturation run may touch: subformulas of
/// the seeds, a single outer negation of each, and De Morgan duals.
#[derive(Clone, Debug, Default)]
pub struct ClosureSet {
    formulas: BTreeSet<Prop>,
}

impl ClosureSet {
    pub fn build<'a>(seeds: impl Iterator<Item = &'a Prop>) -> ClosureSet {
        let mut cs = ClosureSet::default();
        for s in seeds {
            cs.extend_with(s);
        }
        cs
    }

    /// Add one formula's contribution: its subformulas, De Morgan duals of
    /// those (and of their negations), and one negation of everything.
    pub fn extend_with(&mut self, seed: &Prop) {
        let base = seed.subformulas();
        let mut core: BTreeSet<Prop> = base.iter().cloned().collect();
        for s in &base {
            for candidate in [s.clone(), Prop::not(s.clone())] {
                if let Some(dual) = de_morgan_dual(&candidate) {
                    for sub in dual.subformulas() {
                        core.insert(sub);
                    }
                }
            }
        }
        for f in core {
            self.formulas.insert(Prop::not(f.clone()));
            self.formulas.insert(f);
        }
    }

    pub fn contains(&self, p: &Prop) -> bool {
        self.formulas.contains(p)
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Prop> {
        self.formulas.iter()
    }
}

/// The mate a De Morgan step rewrites to, when the shape has one.
fn de_morgan_dual(p: &Prop) -> Option<Prop> {
    match p {
        Prop::Not(inner) => match &**inner {
            Prop::And(a, b) => Some(Prop::or(a.negated_literal(), b.negated_literal())),
            Prop::Or(a, b) => Some(Prop::and(a.negated_literal(), b.negated_literal())),
            _ => None,
        },
        Prop::Or(a, b) => match (a.as_not(), b.as_not()) {
            (Some(x), Some(y)) => Some(Prop::not(Prop::and(x.clone(), y.clone()))),
            _ => None,
        },
        Prop::And(a, b) => match (a.as_not(), b.as_not()) {
            (Some(x), Some(y)) => Some(Prop::not(Prop::or(x.clone(), y.clone()))),
            _ => None,
        },
        _ => None,
    }
}

impl Prop {
    fn negated_literal(&self) -> Prop {
        Prop::not(self.clone())
    }

    fn as_not(&self) -> Option<&Prop> {
        match self {
            Prop::Not(inner) => Some(inner),
            _ => None,
        }
    }
}

/// Everything a saturation run produced. Node ids are dense and local to
/// `arena`; committing to a store shifts them.
#[derive(Clone, Debug)]
pub struct Saturation {
    /// Outer-layer conclusions in derivation order.
    pub facts: Vec<(Prop, u64)>,
    /// True when the fixpoint was reached inside the step budget.
    pub complete: bool,
    /// One entry per contradicted proposition: (proposition, node for it,
    /// node for its negation).
    pub contradictions: Vec<(Prop, u64, u64)>,
    pub arena: Vec<Derivation>,
}

impl Saturation {
    pub fn lookup(&self, goal: &Prop) -> Option<u64> {
        self.facts.iter().find(|(p, _)| p == goal).map(|(_, id)| *id)
    }
}

/// Result of one proof attempt.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProveOutcome {
    Provable(DerivationId),
    /// `definitive` is true only when the theory and goal sit in the
    /// ground decidable fragment and the fixpoint was fully explored.
    NotDerivable { definitive: bool },
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct TwoWayReport {
    pub forward: ProveOutcome,
    pub backward: ProveOutcome,
    pub established: bool,
    /// The implies-intro derivation, when established.
    pub derivation: Option<DerivationId>,
}

#[derive(Clone, Debug)]
pub struct SaturationReport {
    pub derived: Vec<(Prop, DerivationId)>,
    pub complete: bool,
    pub contradictions: Vec<(Prop, DerivationId, DerivationId)>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BlockVia {
    Rule(RuleId),
    Premises(Vec<Prop>),
}

/// What a refused classical rule would have concluded, and from what.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockDiagnostic {
    pub would_derive_by: ExcludedRule,
    pub via: BlockVia,
}

impl fmt::Display for BlockDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.via {
            BlockVia::Rule(id) => write!(f, "{} of rule {id}", self.would_derive_by),
            BlockVia::Premises(ps) => {
                write!(f, "{} from", self.would_derive_by)?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum DirectError {
    Store(StoreError),
    /// decideBoolean needs variable-free content and goal.
    NotGroundBoolean,
}

impl fmt::Display for DirectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectError::Store(e) => e.fmt(f),
            DirectError::NotGroundBoolean => {
                write!(f, "decision procedure needs a ground theory and goal")
            }
        }
    }
}

impl std::error::Error for DirectError {}

impl From<StoreError> for DirectError {
    fn from(e: StoreError) -> DirectError {
        DirectError::Store(e)
    }
}

pub fn content_is_ground(content: &VisibleContent) -> bool {
    content.assertions.iter().all(|a| a.prop.is_ground())
        && content
            .rules
            .iter()
            .all(|r| r.conclusion.is_ground() && r.premises.iter().all(Prop::is_ground))
}

/// One hypothesis context. Children see their ancestors' facts; nothing
/// flows back down except through an or-elim or implies-intro conclusion.
struct Layer<'p> {
    parent: Option<&'p Layer<'p>>,
    facts: BTreeMap<Prop, u64>,
    order: Vec<(Prop, u64)>,
    hyps: Vec<Prop>,
    queue: VecDeque<Prop>,
}

impl<'p> Layer<'p> {
    fn root() -> Layer<'static> {
        Layer {
            parent: None,
            facts: BTreeMap::new(),
            order: Vec::new(),
            hyps: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn child(parent: &'p Layer<'p>, hyp: Prop) -> Layer<'p> {
        let mut hyps = parent.hyps.clone();
        hyps.push(hyp);
        Layer {
            parent: Some(parent),
            facts: BTreeMap::new(),
            order: Vec::new(),
            hyps,
            queue: VecDeque::new(),
        }
    }

    fn lookup(&self, p: &Prop) -> Option<u64> {
        match self.facts.get(p) {
            Some(id) => Some(*id),
            None => self.parent.and_then(|parent| parent.lookup(p)),
        }
    }

    /// Ancestors first, each layer in sorted formula order. Deterministic
    /// regardless of how the layer was fed.
    fn chain_facts(&self) -> Vec<(Prop, u64)> {
        let mut out = match self.parent {
            Some(parent) => parent.chain_facts(),
            None => Vec::new(),
        };
        out.extend(self.facts.iter().map(|(p, id)| (p.clone(), *id)));
        out
    }
}

struct Engine<'s> {
    snap: &'s TheorySnapshot,
    cs: ClosureSet,
    arena: Vec<Derivation>,
    steps: u64,
    max_steps: u64,
    budget_hit: bool,
    next_scope: u32,
}

impl<'s> Engine<'s> {
    fn new(snap: &'s TheorySnapshot, extra_seeds: &[Prop], budget: &ProofBudget) -> Engine<'s> {
        let content = &snap.content;
        let seeds = content
            .assertions
            .iter()
            .map(|a| &a.prop)
            .chain(content.rules.iter().flat_map(|r| {
                r.premises.iter().chain(std::iter::once(&r.conclusion))
            }))
            .chain(extra_seeds.iter());
        Engine {
            snap,
            cs: ClosureSet::build(seeds),
            arena: Vec::new(),
            steps: 0,
            max_steps: budget.max_steps,
            budget_hit: false,
            next_scope: snap.scope_base,
        }
    }

    fn consume(&mut self) -> bool {
        if self.steps >= self.max_steps {
            self.budget_hit = true;
            false
        } else {
            self.steps += 1;
            true
        }
    }

    fn fresh_scope(&mut self) -> u32 {
        let s = self.next_scope;
        self.next_scope += 1;
        s
    }

    /// Record a conclusion unless this layer (or an ancestor) already has
    /// it. Returns the node id when new.
    fn add_node(
        &mut self,
        layer: &mut Layer<'_>,
        conclusion: Prop,
        rule: RuleTag,
        premises: Vec<u64>,
        via: Option<RuleId>,
    ) -> Option<u64> {
        if layer.lookup(&conclusion).is_some() {
            return None;
        }
        let depth = premises
            .iter()
            .map(|p| self.arena[*p as usize].depth + 1)
            .max()
            .unwrap_or(0);
        let id = self.arena.len() as u64;
        self.arena.push(Derivation {
            id: DerivationId(id),
            conclusion: conclusion.clone(),
            rule,
            premises: premises.into_iter().map(DerivationId).collect(),
            theory: self.snap.theory,
            depth,
            hypotheses: layer.hyps.clone(),
            via,
        });
        layer.facts.insert(conclusion.clone(), id);
        layer.order.push((conclusion.clone(), id));
        layer.queue.push_back(conclusion);
        Some(id)
    }

    fn init_assertions(&mut self, layer: &mut Layer<'_>) {
        let props: Vec<Prop> =
            self.snap.content.assertions.iter().map(|a| a.prop.clone()).collect();
        for p in props {
            self.add_node(layer, p, RuleTag::Reiteration, vec![], None);
        }
    }

    /// Run to fixpoint: the non-hypothetical rules first, then rounds of
    /// or-elim and implies-intro while anything changes and depth remains.
    fn saturate_layer(&mut self, layer: &mut Layer<'_>, hyp_depth: u32) {
        loop {
            while let Some(f) = layer.queue.pop_front() {
                if !self.consume() {
                    return;
                }
                self.apply_unary(layer, &f);
                self.apply_binary(layer, &f);
                self.apply_entailment_rules(layer, &f);
            }
            if hyp_depth == 0 || self.budget_hit {
                return;
            }
            let mut changed = self.or_elim_round(layer, hyp_depth);
            changed |= self.implies_intro_round(layer, hyp_depth);
            if !changed {
                return;
            }
        }
    }

    fn apply_unary(&mut self, layer: &mut Layer<'_>, f: &Prop) {
        let (f_id, f) = (layer.lookup(f).expect("queued fact"), f.clone());
        let nn = Prop::not(Prop::not(f.clone()));
        if self.cs.contains(&nn) {
            self.add_node(layer, nn, RuleTag::DoubleNegationIntro, vec![f_id], None);
        }
        if let Prop::Not(inner) = &f {
            if let Prop::Not(core) = &**inner {
                let core = (**core).clone();
                if self.cs.contains(&core) {
                    self.add_node(layer, core, RuleTag::DoubleNegationElim, vec![f_id], None);
                }
            }
        }
        if let Prop::And(a, b) = &f {
            let (a, b) = ((**a).clone(), (**b).clone());
            self.add_node(layer, a, RuleTag::AndElimLeft, vec![f_id], None);
            self.add_node(layer, b, RuleTag::AndElimRight, vec![f_id], None);
        }
        if let Some(dual) = de_morgan_dual(&f) {
            if self.cs.contains(&dual) {
                let tag = match &f {
                    Prop::Not(inner) => match &**inner {
                        Prop::And(..) => RuleTag::DeMorganNotAnd,
                        Prop::Or(..) => RuleTag::DeMorganNotOr,
                        _ => unreachable!("dual exists"),
                    },
                    Prop::Or(..) => RuleTag::DeMorganOrNot,
                    Prop::And(..) => RuleTag::DeMorganAndNot,
                    _ => unreachable!("dual exists"),
                };
                self.add_node(layer, dual, tag, vec![f_id], None);
            }
        }
    }

    fn apply_binary(&mut self, layer: &mut Layer<'_>, f: &Prop) {
        let f_id = layer.lookup(f).expect("queued fact");
        let facts = layer.chain_facts();

        // Disjunctive Syllogism, both orientations of the disjunct.
        if let Prop::Or(a, b) = f {
            let (a, b) = ((**a).clone(), (**b).clone());
            if let Some(na_id) = layer.lookup(&Prop::not(a.clone())) {
                self.add_node(layer, b.clone(), RuleTag::DisjunctiveSyllogism, vec![f_id, na_id], None);
            }
            if let Some(nb_id) = layer.lookup(&Prop::not(b.clone())) {
                self.add_node(layer, a, RuleTag::DisjunctiveSyllogism, vec![f_id, nb_id], None);
            }
        }
        if let Prop::Not(neg) = f {
            for (g, g_id) in &facts {
                if let Prop::Or(a, b) = g {
                    if **a == **neg {
                        self.add_node(
                            layer,
                            (**b).clone(),
                            RuleTag::DisjunctiveSyllogism,
                            vec![*g_id, f_id],
                            None,
                        );
                    }
                    if **b == **neg {
                        self.add_node(
                            layer,
                            (**a).clone(),
                            RuleTag::DisjunctiveSyllogism,
                            vec![*g_id, f_id],
                            None,
                        );
                    }
                }
            }
        }

        // and-intro, driven by which conjunctions the closure set allows.
        let candidates: Vec<Prop> = self
            .cs
            .iter()
            .filter(|p| {
                if let Prop::And(a, b) = p {
                    **a == *f || **b == *f
                } else {
                    false
                }
            })
            .cloned()
            .collect();
        for cand in candidates {
            if let Prop::And(a, b) = &cand {
                if let (Some(a_id), Some(b_id)) = (layer.lookup(a), layer.lookup(b)) {
                    self.add_node(layer, cand.clone(), RuleTag::AndIntro, vec![a_id, b_id], None);
                }
            }
        }

        // Modus ponens and modus tollens on the implies connective.
        if let Prop::Implies(a, b) = f {
            let (a, b) = ((**a).clone(), (**b).clone());
            if let Some(a_id) = layer.lookup(&a) {
                self.add_node(layer, b.clone(), RuleTag::ImpliesElim, vec![f_id, a_id], None);
            }
            if let Some(nb_id) = layer.lookup(&Prop::not(b)) {
                let na = Prop::not(a);
                if self.cs.contains(&na) {
                    self.add_node(layer, na, RuleTag::ImpliesContraElim, vec![f_id, nb_id], None);
                }
            }
        }
        for (g, g_id) in &facts {
            if let Prop::Implies(a, b) = g {
                if **a == *f {
                    self.add_node(
                        layer,
                        (**b).clone(),
                        RuleTag::ImpliesElim,
                        vec![*g_id, f_id],
                        None,
                    );
                }
                if let Prop::Not(neg) = f {
                    if **b == **neg {
                        let na = Prop::not((**a).clone());
                        if self.cs.contains(&na) {
                            self.add_node(
                                layer,
                                na,
                                RuleTag::ImpliesContraElim,
                                vec![*g_id, f_id],
                                None,
                            );
                        }
                    }
                }
            }
        }
    }

    /// Forward application of entailment rules: join every premise against
    /// the derived facts with `f` pinned to one position. Conclusions must
    /// come out ground; new ground instances grow the closure set so the
    /// Boolean rules can keep working on them.
    fn apply_entailment_rules(&mut self, layer: &mut Layer<'_>, f: &Prop) {
        let f_id = layer.lookup(f).expect("queued fact");
        let rules: Vec<EntailmentRule> = self.snap.content.rules.clone();
        let facts = layer.chain_facts();
        for rule in &rules {
            let scope = self.fresh_scope();
            let mut map = BTreeMap::new();
            let premises: Vec<Prop> =
                rule.premises.iter().map(|p| p.freshen(scope, &mut map)).collect();
            let conclusion = rule.conclusion.freshen(scope, &mut map);
            for pin in 0..premises.len() {
                let mut matches = Vec::new();
                join_premises(
                    &premises,
                    0,
                    pin,
                    (f, f_id),
                    &facts,
                    Substitution::new(),
                    &mut Vec::new(),
                    &mut matches,
                );
                for (subst, premise_ids) in matches {
                    let instance = conclusion.apply(&subst);
                    if !instance.is_ground() {
                        continue;
                    }
                    if layer.lookup(&instance).is_some() {
                        continue;
                    }
                    if !self.cs.contains(&instance) {
                        self.cs.extend_with(&instance);
                    }
                    self.add_node(
                        layer,
                        instance,
                        RuleTag::RuleApplication,
                        premise_ids,
                        Some(rule.id),
                    );
                }
            }
        }
    }

    /// Saturate a child layer under one extra hypothesis. Returns lookups
    /// for the requested goals (visible through the whole chain) and the
    /// facts the child derived itself.
    fn run_under_hypothesis(
        &mut self,
        parent: &Layer<'_>,
        hyp: Prop,
        hyp_depth: u32,
        goals: &[Prop],
    ) -> (Vec<Option<u64>>, Vec<(Prop, u64)>) {
        if !self.consume() {
            return (goals.iter().map(|_| None).collect(), Vec::new());
        }
        let mut child = Layer::child(parent, hyp.clone());
        self.add_node(&mut child, hyp, RuleTag::Reiteration, vec![], None);
        self.saturate_layer(&mut child, hyp_depth);
        let lookups = goals.iter().map(|g| child.lookup(g)).collect();
        (lookups, child.order.clone())
    }

    /// Proof by cases over every derived disjunction: conclusions common to
    /// both hypothetical branches land in this layer.
    fn or_elim_round(&mut self, layer: &mut Layer<'_>, hyp_depth: u32) -> bool {
        let disjunctions: Vec<(Prop, u64)> = layer
            .chain_facts()
            .into_iter()
            .filter(|(p, _)| matches!(p, Prop::Or(..)))
            .collect();
        let mut changed = false;
        for (disj, disj_id) in disjunctions {
            let Prop::Or(a, b) = &disj else { unreachable!("filtered") };
            let (a, b) = ((**a).clone(), (**b).clone());
            let (_, under_a) = self.run_under_hypothesis(layer, a, hyp_depth - 1, &[]);
            if self.budget_hit {
                return changed;
            }
            let (_, under_b) = self.run_under_hypothesis(layer, b, hyp_depth - 1, &[]);
            if self.budget_hit {
                return changed;
            }
            let b_map: BTreeMap<&Prop, u64> =
                under_b.iter().map(|(p, id)| (p, *id)).collect();
            for (candidate, a_id) in &under_a {
                if let Some(b_id) = b_map.get(candidate) {
                    if self
                        .add_node(
                            layer,
                            candidate.clone(),
                            RuleTag::OrElim,
                            vec![disj_id, *a_id, *b_id],
                            None,
                        )
                        .is_some()
                    {
                        changed = true;
                    }
                }
            }
        }
        changed
    }

    /// Two-way introduction for every implies-formula the closure set
    /// allows: the antecedent must yield the consequent, and the negated
    /// consequent must yield the negated antecedent.
    fn implies_intro_round(&mut self, layer: &mut Layer<'_>, hyp_depth: u32) -> bool {
        let candidates: Vec<(Prop, Prop, Prop)> = self
            .cs
            .iter()
            .filter_map(|p| match p {
                Prop::Implies(a, b) => Some((p.clone(), (**a).clone(), (**b).clone())),
                _ => None,
            })
            .collect();
        let mut changed = false;
        for (formula, psi, phi) in candidates {
            if layer.lookup(&formula).is_some() {
                continue;
            }
            let (fw, _) =
                self.run_under_hypothesis(layer, psi.clone(), hyp_depth - 1, &[phi.clone()]);
            if self.budget_hit {
                return changed;
            }
            let Some(fw_id) = fw[0] else { continue };
            let (bw, _) = self.run_under_hypothesis(
                layer,
                Prop::not(phi.clone()),
                hyp_depth - 1,
                &[Prop::not(psi.clone())],
            );
            if self.budget_hit {
                return changed;
            }
            let Some(bw_id) = bw[0] else { continue };
            if self
                .add_node(layer, formula, RuleTag::ImpliesIntro, vec![fw_id, bw_id], None)
                .is_some()
            {
                changed = true;
            }
        }
        changed
    }

    fn collect_contradictions(&self, layer: &Layer<'_>) -> Vec<(Prop, u64, u64)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (p, not_id) in &layer.order {
            let Prop::Not(inner) = p else { continue };
            let Some(pos_id) = layer.lookup(inner) else { continue };
            let key = contradiction_key(inner);
            if seen.insert(key) {
                out.push(((**inner).clone(), pos_id, *not_id));
            }
        }
        out
    }
}

/// Normalize a contradicted proposition for once-per-pair reporting:
/// strip doubled negations, then one remaining outer negation, so P, not-P,
/// and not-not-P all key the same conflict.
fn contradiction_key(p: &Prop) -> Prop {
    let stripped = p.strip_double_negations();
    match stripped {
        Prop::Not(inner) => inner.strip_double_negations().clone(),
        other => other.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn join_premises(
    premises: &[Prop],
    idx: usize,
    pin: usize,
    pinned: (&Prop, u64),
    facts: &[(Prop, u64)],
    subst: Substitution,
    ids: &mut Vec<u64>,
    out: &mut Vec<(Substitution, Vec<u64>)>,
) {
    if idx == premises.len() {
        out.push((subst, ids.clone()));
        return;
    }
    let premise = &premises[idx];
    if idx == pin {
        if let Ok(s) = unify_props(premise, pinned.0, &subst) {
            ids.push(pinned.1);
            join_premises(premises, idx + 1, pin, pinned, facts, s, ids, out);
            ids.pop();
        }
        return;
    }
    for (fact, fact_id) in facts {
        if let Ok(s) = unify_props(premise, fact, &subst) {
            ids.push(*fact_id);
            join_premises(premises, idx + 1, pin, pinned, facts, s, ids, out);
            ids.pop();
        }
    }
}

/// Saturate a snapshot. Pure: runs never touch the store, so any number
/// may run in parallel over clones of the same snapshot.
pub fn saturate_snapshot(
    snap: &TheorySnapshot,
    goal_seed: Option<&Prop>,
    budget: &ProofBudget,
) -> Saturation {
    let seeds: Vec<Prop> = goal_seed.cloned().into_iter().collect();
    let mut engine = Engine::new(snap, &seeds, budget);
    let mut layer = Layer::root();
    engine.init_assertions(&mut layer);
    engine.saturate_layer(&mut layer, budget.max_hyp_depth);
    let contradictions = engine.collect_contradictions(&layer);
    Saturation {
        facts: layer.order.clone(),
        complete: !engine.budget_hit,
        contradictions,
        arena: engine.arena,
    }
}

/// Outcome of both hypothetical legs of an implication, plus the
/// saturation that hosted them.
pub struct TwoWayRun {
    pub forward: Option<u64>,
    pub backward: Option<u64>,
    pub established: bool,
    pub intro: Option<u64>,
    pub sat: Saturation,
}

pub fn two_way_snapshot(
    snap: &TheorySnapshot,
    psi: &Prop,
    phi: &Prop,
    budget: &ProofBudget,
) -> TwoWayRun {
    let formula = Prop::implies(psi.clone(), phi.clone());
    let seeds = vec![formula.clone()];
    let mut engine = Engine::new(snap, &seeds, budget);
    let mut layer = Layer::root();
    engine.init_assertions(&mut layer);
    engine.saturate_layer(&mut layer, budget.max_hyp_depth);
    let leg_depth = budget.max_hyp_depth.saturating_sub(1);
    let (fw, _) = engine.run_under_hypothesis(&layer, psi.clone(), leg_depth, &[phi.clone()]);
    let (bw, _) = engine.run_under_hypothesis(
        &layer,
        Prop::not(phi.clone()),
        leg_depth,
        &[Prop::not(psi.clone())],
    );
    let (forward, backward) = (fw[0], bw[0]);
    let established = forward.is_some() && backward.is_some();
    let intro = if let (Some(f), Some(b)) = (forward, backward) {
        match layer.lookup(&formula) {
            Some(existing) => Some(existing),
            None => engine.add_node(&mut layer, formula, RuleTag::ImpliesIntro, vec![f, b], None),
        }
    } else {
        None
    };
    let contradictions = engine.collect_contradictions(&layer);
    TwoWayRun {
        forward,
        backward,
        established,
        intro,
        sat: Saturation {
            facts: layer.order.clone(),
            complete: !engine.budget_hit,
            contradictions,
            arena: engine.arena,
        },
    }
}

impl TheoryStore {
    fn commit_saturation(
        &mut self,
        t: TheoryId,
        sat: Saturation,
    ) -> Result<(SaturationReport, u64), StoreError> {
        let base = self.commit_run(t, sat.arena)?;
        Ok((
            SaturationReport {
                derived: sat
                    .facts
                    .into_iter()
                    .map(|(p, id)| (p, DerivationId(id + base)))
                    .collect(),
                complete: sat.complete,
                contradictions: sat
                    .contradictions
                    .into_iter()
                    .map(|(p, a, b)| (p, DerivationId(a + base), DerivationId(b + base)))
                    .collect(),
            },
            base,
        ))
    }

    /// Saturate and commit the derivation ledger.
    pub fn saturate(
        &mut self,
        t: TheoryId,
        goal_seed: Option<&Prop>,
        budget: &ProofBudget,
    ) -> Result<SaturationReport, StoreError> {
        let snap = self.snapshot(t)?;
        let sat = saturate_snapshot(&snap, goal_seed, budget);
        Ok(self.commit_saturation(t, sat)?.0)
    }

    /// Goal-directed proof; the run's derivations are committed either way.
    pub fn prove(
        &mut self,
        t: TheoryId,
        goal: &Prop,
        budget: &ProofBudget,
    ) -> Result<ProveOutcome, StoreError> {
        let snap = self.snapshot(t)?;
        let ground = content_is_ground(&snap.content) && goal.is_ground();
        let sat = saturate_snapshot(&snap, Some(goal), budget);
        let found = sat.lookup(goal);
        let complete = sat.complete;
        let (_, base) = self.commit_saturation(t, sat)?;
        Ok(match found {
            Some(local) => ProveOutcome::Provable(DerivationId(local + base)),
            None if !complete => ProveOutcome::BudgetExhausted,
            None => ProveOutcome::NotDerivable { definitive: ground },
        })
    }

    /// Decision procedure for the ground fragment: no step budget, so the
    /// closure-set bound is what terminates it.
    pub fn decide_boolean(
        &mut self,
        t: TheoryId,
        goal: &Prop,
        max_hyp_depth: u32,
    ) -> Result<ProveOutcome, DirectError> {
        let snap = self.snapshot(t)?;
        if !content_is_ground(&snap.content) || !goal.is_ground() {
            return Err(DirectError::NotGroundBoolean);
        }
        let budget = ProofBudget { max_steps: u64::MAX, max_hyp_depth };
        let sat = saturate_snapshot(&snap, Some(goal), &budget);
        let found = sat.lookup(goal);
        let (_, base) = self.commit_saturation(t, sat)?;
        Ok(match found {
            Some(local) => ProveOutcome::Provable(DerivationId(local + base)),
            None => ProveOutcome::NotDerivable { definitive: true },
        })
    }

    /// Try both legs of the deduction theorem for psi implies phi. The
    /// hypotheses live and die inside the run; nothing is asserted.
    pub fn prove_implication(
        &mut self,
        t: TheoryId,
        psi: &Prop,
        phi: &Prop,
        budget: &ProofBudget,
    ) -> Result<TwoWayReport, StoreError> {
        let snap = self.snapshot(t)?;
        let ground = content_is_ground(&snap.content) && psi.is_ground() && phi.is_ground();
        let run = two_way_snapshot(&snap, psi, phi, budget);
        let complete = run.sat.complete;
        let (forward_local, backward_local, intro_local) = (run.forward, run.backward, run.intro);
        let established = run.established;
        let (_, base) = self.commit_saturation(t, run.sat)?;
        let leg = |local: Option<u64>| match local {
            Some(id) => ProveOutcome::Provable(DerivationId(id + base)),
            None if !complete => ProveOutcome::BudgetExhausted,
            None => ProveOutcome::NotDerivable { definitive: ground },
        };
        Ok(TwoWayReport {
            forward: leg(forward_local),
            backward: leg(backward_local),
            established,
            derivation: intro_local.map(|id| DerivationId(id + base)),
        })
    }

    /// Contradiction pairs derivable within budget. Finding none is never
    /// a consistency certificate; `complete` only says the budget held.
    pub fn list_inconsistencies(
        &mut self,
        t: TheoryId,
        budget: &ProofBudget,
    ) -> Result<(Vec<(Prop, DerivationId, DerivationId)>, bool), StoreError> {
        let report = self.saturate(t, None, budget)?;
        Ok((report.contradictions, report.complete))
    }

    /// Name the classical rules that would reach `goal` in one step from
    /// the current derived facts, and why each is refused.
    pub fn explain_blocked(
        &self,
        t: TheoryId,
        goal: &Prop,
        budget: &ProofBudget,
    ) -> Result<Vec<BlockDiagnostic>, StoreError> {
        let snap = self.snapshot(t)?;
        let seeds = vec![goal.clone()];
        let mut engine = Engine::new(&snap, &seeds, budget);
        let mut layer = Layer::root();
        engine.init_assertions(&mut layer);
        engine.saturate_layer(&mut layer, budget.max_hyp_depth);

        let mut out = Vec::new();

        // Contraposition of an entailment rule: the goal negates one
        // premise, the conclusion is refuted, and the other premises hold.
        for rule in &snap.content.rules {
            let refuted = layer.lookup(&Prop::not(rule.conclusion.clone())).is_some();
            if !refuted {
                continue;
            }
            for (i, premise) in rule.premises.iter().enumerate() {
                if *goal != Prop::not(premise.clone()) {
                    continue;
                }
                let others_hold = rule
                    .premises
                    .iter()
                    .enumerate()
                    .all(|(j, p)| j == i || layer.lookup(p).is_some());
                if others_hold {
                    out.push(BlockDiagnostic {
                        would_derive_by: ExcludedRule::ContrapositionOfEntailmentRule,
                        via: BlockVia::Rule(rule.id),
                    });
                    break;
                }
            }
        }

        let contradictions = engine.collect_contradictions(&layer);
        if let Some((p, _, _)) = contradictions.first() {
            out.push(BlockDiagnostic {
                would_derive_by: ExcludedRule::ExFalso,
                via: BlockVia::Premises(vec![p.clone(), Prop::not(p.clone())]),
            });
        }

        if let Prop::Or(a, b) = goal {
            let witness = [a, b].into_iter().find(|d| layer.lookup(d).is_some());
            if let Some(w) = witness {
                out.push(BlockDiagnostic {
                    would_derive_by: ExcludedRule::OrIntro,
                    via: BlockVia::Premises(vec![(**w).clone()]),
                });
            }
        }

        // Reductio: only when refuting the goal creates a contradiction
        // that was not already there.
        if contradictions.is_empty() && layer.lookup(goal).is_none() {
            let hyp = Prop::not(goal.clone());
            let depth = budget.max_hyp_depth.max(1) - 1;
            let (_, under) = engine.run_under_hypothesis(&layer, hyp.clone(), depth, &[]);
            let mut fresh_pair = None;
            for (p, _) in &under {
                let neg = Prop::not(p.clone());
                let chain_has = |q: &Prop| {
                    layer.lookup(q).is_some() || under.iter().any(|(x, _)| x == q)
                };
                if chain_has(&neg) {
                    fresh_pair = Some((p.clone(), neg));
                    break;
                }
                if let Prop::Not(inner) = p {
                    if chain_has(inner) {
                        fresh_pair = Some(((**inner).clone(), p.clone()));
                        break;
                    }
                }
            }
            if let Some((pos, neg)) = fresh_pair {
                out.push(BlockDiagnostic {
                    would_derive_by: ExcludedRule::Reductio,
                    via: BlockVia::Premises(vec![hyp, pos, neg]),
                });
            }
        }

        Ok(out)
    }
}
