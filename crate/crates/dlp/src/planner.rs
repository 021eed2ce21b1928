//! Pattern-directed plans: forward chaining from assertions, backward
//! chaining from goals, chronological backtracking, and negation as
//! failure.
//!
//! The search keeps one possibility live at a time. Every goal is a choice
//! point over database matches (ledger order) followed by when-goal plans
//! (installation order); failure pops the most recent choice point and
//! restores both the substitution and the database watermark, so assertions
//! made inside a failed branch vanish. Assertions made on the successful
//! path are committed to the theory ledger when the search returns.
//!
//! An implication compiles into four plans. Two of them are the
//! contrapositive readings: this layer runs them happily, which is exactly
//! the behavior the direct engine refuses. The contrast is the point.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::prop::{unify_props, Prop};
use crate::term::{freshen_term, unify, Substitution, Term, Var};
use crate::theory::{
    Assertion, AssertionId, ItemId, PlanId, StoreError, TheoryId, TheoryStore,
};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Trigger {
    WhenAssert(Prop),
    WhenGoal(Prop),
}

impl Trigger {
    pub fn pattern(&self) -> &Prop {
        match self {
            Trigger::WhenAssert(p) | Trigger::WhenGoal(p) => p,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PlanStep {
    DoAssert(Prop),
    DoGoal(Prop),
    DoThnot { goal: Prop, assert_negation: bool },
    Fail,
    /// Unify two terms under the current substitution; fails the branch
    /// when they do not unify.
    Bind(Term, Term),
}

impl PlanStep {
    fn freshen(&self, scope: u32, map: &mut BTreeMap<Var, Var>) -> PlanStep {
        match self {
            PlanStep::DoAssert(p) => PlanStep::DoAssert(p.freshen(scope, map)),
            PlanStep::DoGoal(p) => PlanStep::DoGoal(p.freshen(scope, map)),
            PlanStep::DoThnot { goal, assert_negation } => PlanStep::DoThnot {
                goal: goal.freshen(scope, map),
                assert_negation: *assert_negation,
            },
            PlanStep::Fail => PlanStep::Fail,
            PlanStep::Bind(a, b) => {
                PlanStep::Bind(freshen_term(a, scope, map), freshen_term(b, scope, map))
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PlanOrigin {
    User,
    CompiledFrom(ItemId),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Plan {
    pub id: PlanId,
    pub trigger: Trigger,
    pub body: Vec<PlanStep>,
    pub origin: PlanOrigin,
}

/// The four procedural readings of P implies Q, in fixed order: assert P
/// forward, goal Q backward, then the two contrapositive forms.
pub fn compile_implication(p: &Prop, q: &Prop) -> [(Trigger, Vec<PlanStep>); 4] {
    [
        (Trigger::WhenAssert(p.clone()), vec![PlanStep::DoAssert(q.clone())]),
        (Trigger::WhenGoal(q.clone()), vec![PlanStep::DoGoal(p.clone())]),
        (
            Trigger::WhenAssert(Prop::not(q.clone())),
            vec![PlanStep::DoAssert(Prop::not(p.clone()))],
        ),
        (
            Trigger::WhenGoal(Prop::not(p.clone())),
            vec![PlanStep::DoGoal(Prop::not(q.clone()))],
        ),
    ]
}

#[derive(Clone, Copy, Debug)]
struct Budget {
    remaining: u64,
    hit: bool,
}

impl Budget {
    fn new(steps: u64) -> Budget {
        Budget { remaining: steps, hit: false }
    }

    fn consume(&mut self) -> bool {
        if self.remaining == 0 {
            self.hit = true;
            false
        } else {
            self.remaining -= 1;
            true
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Goal { goal: String, alternatives: usize },
    TryMatch { fact: String },
    TryPlan { plan: String },
    Assert { prop: String, source: String },
    Thnot { goal: String, succeeded: bool },
    Bind { left: String, right: String, ok: bool },
    Backtrack { watermark: usize },
    BudgetExhausted,
}

#[derive(Clone, Default, Debug, Serialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub steps_used: u64,
    pub budget_exhausted: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Cause {
    Committed(AssertionId),
    Working(usize),
}

#[derive(Clone, Debug)]
struct WorkingAssert {
    prop: Prop,
    source: String,
    trigger: Option<(PlanId, Cause)>,
}

struct SearchCtx {
    base: Vec<Assertion>,
    plans: Vec<Plan>,
    working: Vec<WorkingAssert>,
    budget: Budget,
    trace: Trace,
    next_scope: u32,
}

impl SearchCtx {
    fn fresh_scope(&mut self) -> u32 {
        let s = self.next_scope;
        self.next_scope += 1;
        s
    }

    fn view_len(&self) -> usize {
        self.base.len() + self.working.len()
    }

    fn view_prop(&self, i: usize) -> &Prop {
        if i < self.base.len() {
            &self.base[i].prop
        } else {
            &self.working[i - self.base.len()].prop
        }
    }

    fn contains(&self, p: &Prop) -> bool {
        self.base.iter().any(|a| a.prop == *p) || self.working.iter().any(|w| w.prop == *p)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum RunEnd {
    Success,
    Exhausted,
    OutOfBudget,
}

#[derive(Clone, Debug)]
enum WorkItem {
    Solve(Prop),
    Step { step: PlanStep, plan: PlanId },
}

#[derive(Clone, Copy, Debug)]
enum Alt {
    Fact(usize),
    Plan(usize),
}

struct Choice {
    goal: Prop,
    alts: Vec<Alt>,
    next: usize,
    saved_stack: Vec<WorkItem>,
    saved_subst: Substitution,
    watermark: usize,
}

/// One depth-first search: a work stack, the current substitution, and a
/// chronological choice stack. Nested searches (triggered plan bodies,
/// thnot probes) get their own machine over the shared context.
struct Machine<'a> {
    ctx: &'a mut SearchCtx,
    choices: Vec<Choice>,
    stack: Vec<WorkItem>,
    subst: Substitution,
    /// Set while running a body fired by an assertion; DoAssert steps
    /// record (plan, cause) provenance from it.
    assert_cause: Option<Cause>,
}

impl<'a> Machine<'a> {
    fn new(
        ctx: &'a mut SearchCtx,
        stack: Vec<WorkItem>,
        subst: Substitution,
        assert_cause: Option<Cause>,
    ) -> Machine<'a> {
        Machine { ctx, choices: Vec::new(), stack, subst, assert_cause }
    }

    fn run(&mut self) -> RunEnd {
        loop {
            let Some(item) = self.stack.pop() else { return RunEnd::Success };
            if !self.ctx.budget.consume() {
                self.ctx.trace.events.push(TraceEvent::BudgetExhausted);
                return RunEnd::OutOfBudget;
            }
            let failed = match item {
                WorkItem::Solve(goal) => {
                    self.open_choice(goal);
                    true
                }
                WorkItem::Step { step, plan } => match step {
                    PlanStep::DoAssert(p) => {
                        let p = p.apply(&self.subst);
                        if let Err(end) = self.do_assert(p, "plan-triggered", plan) {
                            return end;
                        }
                        false
                    }
                    PlanStep::DoGoal(p) => {
                        self.stack.push(WorkItem::Solve(p));
                        false
                    }
                    PlanStep::DoThnot { goal, assert_negation } => {
                        let probe = goal.apply(&self.subst);
                        let pre = self.ctx.working.len();
                        let end = Machine::new(
                            self.ctx,
                            vec![WorkItem::Solve(probe.clone())],
                            Substitution::new(),
                            None,
                        )
                        .run();
                        self.ctx.working.truncate(pre);
                        match end {
                            RunEnd::Success => {
                                self.ctx.trace.events.push(TraceEvent::Thnot {
                                    goal: probe.to_string(),
                                    succeeded: false,
                                });
                                true
                            }
                            RunEnd::Exhausted => {
                                self.ctx.trace.events.push(TraceEvent::Thnot {
                                    goal: probe.to_string(),
                                    succeeded: true,
                                });
                                if assert_negation {
                                    if let Err(end) = self.do_assert(
                                        Prop::not(probe),
                                        "closed-world",
                                        plan,
                                    ) {
                                        return end;
                                    }
                                }
                                false
                            }
                            RunEnd::OutOfBudget => return RunEnd::OutOfBudget,
                        }
                    }
                    PlanStep::Fail => true,
                    PlanStep::Bind(a, b) => {
                        let ok = match unify(&a, &b, &self.subst) {
                            Ok(s) => {
                                self.subst = s;
                                true
                            }
                            Err(_) => false,
                        };
                        self.ctx.trace.events.push(TraceEvent::Bind {
                            left: self.subst.apply(&a).to_string(),
                            right: self.subst.apply(&b).to_string(),
                            ok,
                        });
                        !ok
                    }
                },
            };
            if failed {
                if let Some(end) = self.next_alternative() {
                    return end;
                }
            }
        }
    }

    /// Record a choice point for `goal`: database matches in ledger order,
    /// then when-goal plans in installation order. The caller immediately
    /// backtracks into it to activate the first workable alternative.
    fn open_choice(&mut self, goal: Prop) {
        let mut alts = Vec::new();
        for i in 0..self.ctx.view_len() {
            alts.push(Alt::Fact(i));
        }
        for (j, plan) in self.ctx.plans.iter().enumerate() {
            if matches!(plan.trigger, Trigger::WhenGoal(_)) {
                alts.push(Alt::Plan(j));
            }
        }
        self.ctx.trace.events.push(TraceEvent::Goal {
            goal: goal.apply(&self.subst).to_string(),
            alternatives: alts.len(),
        });
        self.choices.push(Choice {
            goal,
            alts,
            next: 0,
            saved_stack: self.stack.clone(),
            saved_subst: self.subst.clone(),
            watermark: self.ctx.working.len(),
        });
    }

    /// Resume at the most recent choice point, restoring the substitution
    /// and rolling the database back to its watermark. Returns the final
    /// outcome when every choice point is spent.
    fn next_alternative(&mut self) -> Option<RunEnd> {
        loop {
            let picked = {
                let Some(choice) = self.choices.last_mut() else {
                    return Some(if self.ctx.budget.hit {
                        RunEnd::OutOfBudget
                    } else {
                        RunEnd::Exhausted
                    });
                };
                if choice.next >= choice.alts.len() {
                    let spent = self.choices.pop().expect("nonempty");
                    self.ctx.trace.events.push(TraceEvent::Backtrack {
                        watermark: spent.watermark,
                    });
                    continue;
                }
                let alt = choice.alts[choice.next];
                choice.next += 1;
                (
                    choice.goal.clone(),
                    alt,
                    choice.watermark,
                    choice.saved_stack.clone(),
                    choice.saved_subst.clone(),
                )
            };
            let (goal, alt, watermark, saved_stack, saved_subst) = picked;
            if !self.ctx.budget.consume() {
                self.ctx.trace.events.push(TraceEvent::BudgetExhausted);
                return Some(RunEnd::OutOfBudget);
            }
            self.stack = saved_stack;
            self.subst = saved_subst;
            self.ctx.working.truncate(watermark);
            match alt {
                Alt::Fact(i) => {
                    let mut fact = self.ctx.view_prop(i).clone();
                    if !fact.is_ground() {
                        let scope = self.ctx.fresh_scope();
                        fact = fact.freshen(scope, &mut BTreeMap::new());
                    }
                    if let Ok(s) = unify_props(&goal, &fact, &self.subst) {
                        self.ctx.trace.events.push(TraceEvent::TryMatch {
                            fact: fact.to_string(),
                        });
                        self.subst = s;
                        return None;
                    }
                }
                Alt::Plan(j) => {
                    let plan = self.ctx.plans[j].clone();
                    let scope = self.ctx.fresh_scope();
                    let mut map = BTreeMap::new();
                    let pattern = plan.trigger.pattern().freshen(scope, &mut map);
                    if let Ok(s) = unify_props(&goal, &pattern, &self.subst) {
                        self.ctx.trace.events.push(TraceEvent::TryPlan {
                            plan: plan.id.to_string(),
                        });
                        self.subst = s;
                        for step in plan.body.iter().rev() {
                            self.stack.push(WorkItem::Step {
                                step: step.freshen(scope, &mut map),
                                plan: plan.id,
                            });
                        }
                        return None;
                    }
                }
            }
        }
    }

    /// Add to the working database and fire when-assert plans depth-first.
    /// Each fired body is all-or-nothing: a failing body rolls back its own
    /// additions without failing this step. A proposition already present
    /// is not re-added and fires nothing, which is what terminates cyclic
    /// plan chains.
    fn do_assert(&mut self, p: Prop, source: &str, plan: PlanId) -> Result<(), RunEnd> {
        if self.ctx.contains(&p) {
            return Ok(());
        }
        let idx = self.ctx.working.len();
        self.ctx.trace.events.push(TraceEvent::Assert {
            prop: p.to_string(),
            source: source.to_string(),
        });
        self.ctx.working.push(WorkingAssert {
            prop: p.clone(),
            source: source.to_string(),
            trigger: self.assert_cause.map(|cause| (plan, cause)),
        });
        fire_assert_triggers(self.ctx, Cause::Working(idx), &p)
    }
}

/// Run every when-assert plan whose pattern unifies with `prop`, in
/// installation order, each as its own sub-search. Only a budget failure
/// propagates; an exhausted body just rolls back.
fn fire_assert_triggers(ctx: &mut SearchCtx, cause: Cause, prop: &Prop) -> Result<(), RunEnd> {
    for j in 0..ctx.plans.len() {
        let plan = ctx.plans[j].clone();
        let Trigger::WhenAssert(_) = plan.trigger else { continue };
        let scope = ctx.fresh_scope();
        let mut map = BTreeMap::new();
        let pattern = plan.trigger.pattern().freshen(scope, &mut map);
        let Ok(s) = unify_props(&pattern, prop, &Substitution::new()) else { continue };
        ctx.trace.events.push(TraceEvent::TryPlan { plan: plan.id.to_string() });
        let stack: Vec<WorkItem> = plan
            .body
            .iter()
            .rev()
            .map(|step| WorkItem::Step { step: step.freshen(scope, &mut map), plan: plan.id })
            .collect();
        let pre = ctx.working.len();
        let end = Machine::new(ctx, stack, s, Some(cause)).run();
        match end {
            RunEnd::Success => {}
            RunEnd::Exhausted => ctx.working.truncate(pre),
            RunEnd::OutOfBudget => {
                ctx.working.truncate(pre);
                return Err(RunEnd::OutOfBudget);
            }
        }
    }
    Ok(())
}

#[derive(Debug)]
pub enum AchieveResult {
    Success {
        substitution: Substitution,
        committed: Vec<AssertionId>,
        trace: Trace,
    },
    Failure {
        exhausted: bool,
        trace: Trace,
    },
}

#[derive(Debug)]
pub struct TriggerOutcome {
    pub root: AssertionId,
    pub consequents: Vec<AssertionId>,
    pub budget_exhausted: bool,
    pub trace: Trace,
}

#[derive(Debug)]
pub enum ThnotResult {
    Success { asserted: Option<AssertionId>, trace: Trace },
    Failure { budget_exhausted: bool, trace: Trace },
}

/// Bindings of the goal's own variables under a success substitution.
pub fn goal_bindings(goal: &Prop, subst: &Substitution) -> Vec<(Var, Term)> {
    let mut vars = Vec::new();
    goal.collect_vars(&mut vars);
    vars.into_iter()
        .map(|v| {
            let t = subst.apply(&Term::Variable(v.clone()));
            (v, t)
        })
        .collect()
}

impl TheoryStore {
    fn search_ctx(&mut self, t: TheoryId, steps: u64) -> Result<SearchCtx, StoreError> {
        let content = self.visible(t)?;
        Ok(SearchCtx {
            base: content.assertions,
            plans: content.plans,
            working: Vec::new(),
            budget: Budget::new(steps),
            trace: Trace::default(),
            next_scope: self.fresh_scope(),
        })
    }

    fn absorb_ctx(&mut self, ctx: &SearchCtx, steps: u64) -> Trace {
        self.bump_scope_to(ctx.next_scope);
        let mut trace = ctx.trace.clone();
        trace.steps_used = steps - ctx.budget.remaining;
        trace.budget_exhausted = ctx.budget.hit;
        trace
    }

    fn commit_working(
        &mut self,
        t: TheoryId,
        working: &[WorkingAssert],
    ) -> Result<Vec<AssertionId>, StoreError> {
        let mut ids = Vec::with_capacity(working.len());
        for w in working {
            let id = self.assert_prop(t, w.prop.clone(), &w.source)?;
            if let Some((plan, cause)) = &w.trigger {
                let cause_id = match cause {
                    Cause::Committed(a) => *a,
                    Cause::Working(i) => ids[*i],
                };
                self.record_trigger(t, id, *plan, cause_id)?;
            }
            ids.push(id);
        }
        Ok(ids)
    }

    /// Depth-first search for `goal`. On success the branch's assertions
    /// are committed; on failure the theory is untouched and `exhausted`
    /// tells a spent search space apart from a spent budget.
    pub fn achieve(
        &mut self,
        t: TheoryId,
        goal: &Prop,
        steps: u64,
    ) -> Result<AchieveResult, StoreError> {
        let mut ctx = self.search_ctx(t, steps)?;
        let mut machine = Machine::new(
            &mut ctx,
            vec![WorkItem::Solve(goal.clone())],
            Substitution::new(),
            None,
        );
        let end = machine.run();
        let subst = machine.subst.clone();
        let trace = self.absorb_ctx(&ctx, steps);
        match end {
            RunEnd::Success => {
                let committed = self.commit_working(t, &ctx.working)?;
                Ok(AchieveResult::Success { substitution: subst, committed, trace })
            }
            RunEnd::Exhausted => Ok(AchieveResult::Failure { exhausted: true, trace }),
            RunEnd::OutOfBudget => Ok(AchieveResult::Failure { exhausted: false, trace }),
        }
    }

    /// Assert `p` and run the forward cascade: every when-assert plan whose
    /// pattern matches fires, and assertions made by fired bodies trigger
    /// in turn. The root assertion and completed cascade work persist even
    /// when the budget dies mid-cascade.
    pub fn assert_with_triggers(
        &mut self,
        t: TheoryId,
        p: Prop,
        source: &str,
        steps: u64,
    ) -> Result<TriggerOutcome, StoreError> {
        let root = self.assert_prop(t, p.clone(), source)?;
        let mut ctx = self.search_ctx(t, steps)?;
        let aborted = fire_assert_triggers(&mut ctx, Cause::Committed(root), &p).is_err();
        let trace = self.absorb_ctx(&ctx, steps);
        let consequents = self.commit_working(t, &ctx.working)?;
        Ok(TriggerOutcome {
            root,
            consequents,
            budget_exhausted: aborted || trace.budget_exhausted,
            trace,
        })
    }

    /// Negation as failure: succeeds only when the goal fails after an
    /// exhaustive search, in which case `(not goal)` may be recorded under
    /// the closed-world source tag. A spent budget is not failure and never
    /// produces a closed-world assertion.
    pub fn thnot(
        &mut self,
        t: TheoryId,
        goal: &Prop,
        assert_negation: bool,
        steps: u64,
    ) -> Result<ThnotResult, StoreError> {
        let mut ctx = self.search_ctx(t, steps)?;
        let end = Machine::new(
            &mut ctx,
            vec![WorkItem::Solve(goal.clone())],
            Substitution::new(),
            None,
        )
        .run();
        ctx.working.clear();
        let remaining = ctx.budget.remaining;
        let trace = self.absorb_ctx(&ctx, steps);
        match end {
            RunEnd::Success => Ok(ThnotResult::Failure { budget_exhausted: false, trace }),
            RunEnd::OutOfBudget => Ok(ThnotResult::Failure { budget_exhausted: true, trace }),
            RunEnd::Exhausted => {
                let asserted = if assert_negation {
                    let outcome = self.assert_with_triggers(
                        t,
                        Prop::not(goal.clone()),
                        "closed-world",
                        remaining,
                    )?;
                    Some(outcome.root)
                } else {
                    None
                };
                Ok(ThnotResult::Success { asserted, trace })
            }
        }
    }

    /// Install an implication: the proposition itself (with forward
    /// triggering) plus, unless suppressed, the four compiled plans.
    pub fn install_implication(
        &mut self,
        t: TheoryId,
        p: &Prop,
        q: &Prop,
        with_plans: bool,
        source: &str,
        steps: u64,
    ) -> Result<(AssertionId, Vec<PlanId>), StoreError> {
        let outcome =
            self.assert_with_triggers(t, Prop::implies(p.clone(), q.clone()), source, steps)?;
        let mut plan_ids = Vec::new();
        if with_plans {
            for (trigger, body) in compile_implication(p, q) {
                let id = self.add_plan(
                    t,
                    trigger,
                    body,
                    PlanOrigin::CompiledFrom(ItemId::Assertion(outcome.root)),
                )?;
                plan_ids.push(id);
            }
        }
        Ok((outcome.root, plan_ids))
    }
}
