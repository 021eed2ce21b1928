//! The interactive shell and the batch front ends behind the `dlp` binary.
//!
//! Every command maps onto one store operation; no reasoning happens here.
//! Output is deterministic: the same command stream against the same store
//! produces byte-identical transcripts, which the test suite relies on.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use crate::direct::{BlockDiagnostic, BlockVia, DirectError, ProofBudget, ProveOutcome};
use crate::export::export_provenance;
use crate::parse::{
    parse_clauses, parse_document, parse_prop, split_forms, Clause, KbDocument,
};
use crate::planner::{goal_bindings, AchieveResult, PlanOrigin, ThnotResult};
use crate::prob::{audit_contraposition, LeakageDiagnostic};
use crate::prop::Prop;
use crate::theory::{
    Addition, ArgTarget, ArgumentId, Derivation, DerivationId, ItemId, Polarity, RuleTag,
    Support, TheoryId, TheoryStore,
};

pub struct Session {
    pub store: TheoryStore,
    pub current: Option<TheoryId>,
    /// Step budget shared by proofs and plan searches.
    pub budget: u64,
    pub hyp_depth: u32,
    /// When false, `implies` clauses install only the proposition.
    pub with_plans: bool,
}

impl Default for Session {
    fn default() -> Session {
        Session {
            store: TheoryStore::new(),
            current: None,
            budget: 10_000,
            hyp_depth: 3,
            with_plans: true,
        }
    }
}

enum Effect {
    Text(String),
    Quit,
}

impl Session {
    /// Evaluate one command line. `Ok(None)` means `quit`; `Ok(Some(text))`
    /// is the (possibly empty) result text; `Err` is a recoverable error.
    pub fn eval(&mut self, line: &str) -> Result<Option<String>, String> {
        match self.dispatch(line)? {
            Effect::Quit => Ok(None),
            Effect::Text(t) => Ok(Some(t)),
        }
    }

    pub fn proof_budget(&self) -> ProofBudget {
        ProofBudget { max_steps: self.budget, max_hyp_depth: self.hyp_depth }
    }

    fn require_current(&self) -> Result<TheoryId, String> {
        self.current.ok_or_else(|| "no current theory (use `theory <name>`)".to_string())
    }

    /// `prove`/`decide` accept an optional leading theory name, as in
    /// `prove Boston (not (TrafficJam))`; otherwise the current theory.
    fn theory_and_prop(&self, tail: &str) -> Result<(TheoryId, Prop), String> {
        let forms = split_forms(tail).map_err(|e| e.to_string())?;
        if forms.len() == 2 {
            if let Some(t) = self.store.theory_id(&forms[0]) {
                let p = parse_prop(&forms[1]).map_err(|e| e.to_string())?;
                return Ok((t, p));
            }
        }
        let t = self.require_current()?;
        let p = parse_prop(tail).map_err(|e| e.to_string())?;
        Ok((t, p))
    }

    fn assertion_prop(&self, t: TheoryId, id: crate::theory::AssertionId) -> String {
        self.store
            .theory(t)
            .ok()
            .and_then(|th| th.assertions.iter().find(|a| a.id == id))
            .map(|a| a.prop.to_string())
            .unwrap_or_default()
    }

    fn dispatch(&mut self, line: &str) -> Result<Effect, String> {
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            return Ok(Effect::Text(String::new()));
        }
        let (cmd, tail) = match line.split_once(char::is_whitespace) {
            Some((c, t)) => (c, t.trim()),
            None => (line, ""),
        };
        let text = match cmd {
            "quit" => return Ok(Effect::Quit),
            "theory" => self.cmd_theory(tail)?,
            "load" => self.cmd_load(tail)?,
            "assert" => self.cmd_assert(tail)?,
            "rule" => self.cmd_rule(tail)?,
            "goal" => self.cmd_goal(tail)?,
            "prove" => self.cmd_prove(tail)?,
            "decide" => self.cmd_decide(tail)?,
            "implies?" => self.cmd_implies(tail)?,
            "thnot" => self.cmd_thnot(tail)?,
            "derive" => self.cmd_derive(tail)?,
            "why" => self.cmd_why(tail)?,
            "inconsistencies" => self.cmd_inconsistencies()?,
            "audit" => self.cmd_audit()?,
            "args" => self.cmd_args(tail)?,
            "argue" => self.cmd_argue(tail)?,
            "export" => self.cmd_export(tail)?,
            "help" => HELP.to_string(),
            other => return Err(format!("unknown command `{other}` (try `help`)")),
        };
        Ok(Effect::Text(text))
    }

    fn cmd_theory(&mut self, tail: &str) -> Result<String, String> {
        let name = tail.trim();
        if name.is_empty() || name.contains(|c: char| c.is_whitespace()) {
            return Err("usage: theory <name>".to_string());
        }
        match self.store.theory_id(name) {
            Some(t) => {
                self.current = Some(t);
                Ok(format!("switched to theory {t} {name}"))
            }
            None => {
                let t = self.store.create_theory(name).map_err(|e| e.to_string())?;
                self.current = Some(t);
                Ok(format!("created theory {t} {name}"))
            }
        }
    }

    fn cmd_load(&mut self, tail: &str) -> Result<String, String> {
        let path = tail.trim();
        if path.is_empty() {
            return Err("usage: load <path>".to_string());
        }
        let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
        let doc = parse_document(&text).map_err(|e| format!("{path}: {e}"))?;
        let loaded = load_document(self, &doc)?;
        let mut out = String::new();
        for (t, clauses) in &loaded {
            let name = self.store.theory(*t).map_err(|e| e.to_string())?.name.clone();
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("loaded theory {t} {name} ({clauses} clauses)"));
        }
        if let Some((t, _)) = loaded.last() {
            self.current = Some(*t);
        }
        if loaded.is_empty() {
            out.push_str("loaded nothing (empty document)");
        }
        Ok(out)
    }

    fn cmd_assert(&mut self, tail: &str) -> Result<String, String> {
        let t = self.require_current()?;
        let p = parse_prop(tail).map_err(|e| e.to_string())?;
        let outcome = self
            .store
            .assert_with_triggers(t, p, "user", self.budget)
            .map_err(|e| e.to_string())?;
        let mut out = format!("asserted {} {}", outcome.root, self.assertion_prop(t, outcome.root));
        for c in &outcome.consequents {
            out.push_str(&format!("\n  triggered {c} {}", self.assertion_prop(t, *c)));
        }
        if outcome.budget_exhausted {
            out.push_str("\n  cascade stopped (budget exhausted)");
        }
        Ok(out)
    }

    fn cmd_rule(&mut self, tail: &str) -> Result<String, String> {
        let forms = split_forms(tail).map_err(|e| e.to_string())?;
        if forms.len() != 2 || !forms[0].starts_with('(') {
            return Err("usage: rule (<premise>+) <conclusion>".to_string());
        }
        let inner = &forms[0][1..forms[0].len() - 1];
        let premise_forms = split_forms(inner).map_err(|e| e.to_string())?;
        if premise_forms.is_empty() {
            return Err("a rule needs at least one premise".to_string());
        }
        let premises = premise_forms
            .iter()
            .map(|f| parse_prop(f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let conclusion = parse_prop(&forms[1]).map_err(|e| e.to_string())?;
        let t = self.require_current()?;
        let shown: Vec<String> = premises.iter().map(Prop::to_string).collect();
        let id = self
            .store
            .add_rule(t, premises, conclusion.clone())
            .map_err(|e| e.to_string())?;
        Ok(format!("added rule {id}: {} => {conclusion}", shown.join(", ")))
    }

    fn cmd_goal(&mut self, tail: &str) -> Result<String, String> {
        let t = self.require_current()?;
        let goal = parse_prop(tail).map_err(|e| e.to_string())?;
        let result = self.store.achieve(t, &goal, self.budget).map_err(|e| e.to_string())?;
        Ok(match result {
            AchieveResult::Success { substitution, .. } => {
                let bindings = goal_bindings(&goal, &substitution);
                if bindings.is_empty() {
                    "achieved; no bindings".to_string()
                } else {
                    let shown: Vec<String> =
                        bindings.iter().map(|(v, t)| format!("{v} = {t}")).collect();
                    format!("achieved; {}", shown.join(", "))
                }
            }
            AchieveResult::Failure { exhausted: true, .. } => {
                "not achievable (search space exhausted)".to_string()
            }
            AchieveResult::Failure { exhausted: false, .. } => {
                "not achieved (budget exhausted)".to_string()
            }
        })
    }

    fn cmd_prove(&mut self, tail: &str) -> Result<String, String> {
        let (t, goal) = self.theory_and_prop(tail)?;
        let budget = self.proof_budget();
        let outcome = self.store.prove(t, &goal, &budget).map_err(|e| e.to_string())?;
        let mut out = prove_text(outcome);
        if let ProveOutcome::NotDerivable { .. } = outcome {
            let diags =
                self.store.explain_blocked(t, &goal, &budget).map_err(|e| e.to_string())?;
            if !diags.is_empty() {
                let shown: Vec<String> = diags.iter().map(diag_text).collect();
                out.push_str(&format!("; blocked: {}", shown.join(", ")));
            }
        }
        Ok(out)
    }

    fn cmd_decide(&mut self, tail: &str) -> Result<String, String> {
        let (t, goal) = self.theory_and_prop(tail)?;
        match self.store.decide_boolean(t, &goal, self.hyp_depth) {
            Ok(ProveOutcome::Provable(id)) => Ok(format!("provable; derivation {id}")),
            Ok(_) => Ok("not provable (definitive)".to_string()),
            Err(DirectError::NotGroundBoolean) => {
                Err("decide needs a ground theory and goal (use prove)".to_string())
            }
            Err(e) => Err(e.to_string()),
        }
    }

    fn cmd_implies(&mut self, tail: &str) -> Result<String, String> {
        let forms = split_forms(tail).map_err(|e| e.to_string())?;
        if forms.len() != 2 {
            return Err("usage: implies? <psi> <phi>".to_string());
        }
        let psi = parse_prop(&forms[0]).map_err(|e| e.to_string())?;
        let phi = parse_prop(&forms[1]).map_err(|e| e.to_string())?;
        let t = self.require_current()?;
        let report = self
            .store
            .prove_implication(t, &psi, &phi, &self.proof_budget())
            .map_err(|e| e.to_string())?;
        Ok(if report.established {
            match report.derivation {
                Some(id) => format!("established (both directions); derivation {id}"),
                None => "established (both directions)".to_string(),
            }
        } else {
            format!(
                "not established; forward: {}; backward: {}",
                leg_text(report.forward),
                leg_text(report.backward)
            )
        })
    }

    fn cmd_thnot(&mut self, tail: &str) -> Result<String, String> {
        let mut forms = split_forms(tail).map_err(|e| e.to_string())?;
        let assert_negation = forms.last().is_some_and(|f| f == "assert");
        if assert_negation {
            forms.pop();
        }
        if forms.len() != 1 {
            return Err("usage: thnot <goal> [assert]".to_string());
        }
        let goal = parse_prop(&forms[0]).map_err(|e| e.to_string())?;
        let t = self.require_current()?;
        let result = self
            .store
            .thnot(t, &goal, assert_negation, self.budget)
            .map_err(|e| e.to_string())?;
        Ok(match result {
            ThnotResult::Success { asserted: Some(id), .. } => {
                format!(
                    "thnot holds (exhaustive failure); asserted {id} {}",
                    self.assertion_prop(t, id)
                )
            }
            ThnotResult::Success { asserted: None, .. } => {
                "thnot holds (exhaustive failure)".to_string()
            }
            ThnotResult::Failure { budget_exhausted: false, .. } => {
                "thnot fails (goal achievable)".to_string()
            }
            ThnotResult::Failure { budget_exhausted: true, .. } => {
                "thnot undecided (budget exhausted); nothing asserted".to_string()
            }
        })
    }

    fn cmd_derive(&mut self, tail: &str) -> Result<String, String> {
        let forms = split_forms(tail).map_err(|e| e.to_string())?;
        if forms.len() < 2 || !forms[1].starts_with('(') {
            return Err("usage: derive <name> (<item-id>*) <clause>*".to_string());
        }
        let base = self.require_current()?;
        let name = forms[0].clone();
        let mut omit = BTreeSet::new();
        for word in forms[1][1..forms[1].len() - 1].split_whitespace() {
            let id = ItemId::parse(word).ok_or_else(|| format!("bad item id `{word}`"))?;
            omit.insert(id);
        }
        let clauses = parse_clauses(&forms[2..].join(" ")).map_err(|e| e.to_string())?;
        let mut additions = Vec::new();
        for c in clauses {
            match c {
                Clause::Assert(prop) => {
                    additions.push(Addition::Assert { prop, source: "user".to_string() })
                }
                Clause::Rule { premises, conclusion } => {
                    additions.push(Addition::Rule { premises, conclusion })
                }
                _ => {
                    return Err(
                        "derive additions must be assert or rule clauses".to_string()
                    )
                }
            }
        }
        let omitted: Vec<String> = omit.iter().map(ItemId::to_string).collect();
        let t = self
            .store
            .derive_theory(base, name.as_str(), omit, additions)
            .map_err(|e| e.to_string())?;
        self.current = Some(t);
        Ok(if omitted.is_empty() {
            format!("derived theory {t} {name} from {base}")
        } else {
            format!("derived theory {t} {name} from {base} (omitting {})", omitted.join(", "))
        })
    }

    fn cmd_why(&mut self, tail: &str) -> Result<String, String> {
        let id = parse_derivation_id(tail.trim())
            .ok_or_else(|| format!("usage: why d<N> (got `{tail}`)"))?;
        if self.store.find_derivation(id).is_none() {
            return Err(format!("unknown derivation {id}"));
        }
        let mut out = String::new();
        why_tree(&self.store, id, 0, &mut out);
        Ok(out.trim_end().to_string())
    }

    fn cmd_inconsistencies(&mut self) -> Result<String, String> {
        let t = self.require_current()?;
        let (pairs, complete) = self
            .store
            .list_inconsistencies(t, &self.proof_budget())
            .map_err(|e| e.to_string())?;
        let coverage = if complete { "complete" } else { "budget exhausted" };
        if pairs.is_empty() {
            return Ok(format!("no contradictions derived ({coverage})"));
        }
        let mut out = format!("{} contradiction(s) derived ({coverage})", pairs.len());
        for (p, pos, neg) in &pairs {
            out.push_str(&format!("\n  {p}: {pos} vs {neg}"));
        }
        Ok(out)
    }

    fn cmd_audit(&mut self) -> Result<String, String> {
        let t = self.require_current()?;
        let rules = self.store.visible(t).map_err(|e| e.to_string())?.rules;
        let constraints = self.store.theory(t).map_err(|e| e.to_string())?.constraints.clone();
        let diags = audit_contraposition(&rules, &constraints);
        if diags.is_empty() {
            return Ok("no contraposition leakage detected".to_string());
        }
        Ok(diags.iter().map(leak_text).collect::<Vec<_>>().join("\n"))
    }

    fn cmd_args(&mut self, tail: &str) -> Result<String, String> {
        let t = self.require_current()?;
        let target = parse_arg_target(tail)?;
        let theory = self.store.theory(t).map_err(|e| e.to_string())?;
        let matching: Vec<String> = theory
            .arguments
            .iter()
            .filter(|a| a.target == target)
            .map(|a| {
                let support = match &a.support {
                    Support::Derivation(d) => format!("derivation {d}"),
                    Support::Text(s) => format!("\"{s}\""),
                };
                format!("{} {}: {} (author {})", a.id, a.polarity.name(), support, a.author)
            })
            .collect();
        if matching.is_empty() {
            return Ok("no arguments recorded".to_string());
        }
        Ok(matching.join("\n"))
    }

    fn cmd_argue(&mut self, tail: &str) -> Result<String, String> {
        let forms = split_forms(tail).map_err(|e| e.to_string())?;
        if forms.len() < 2 {
            return Err("usage: argue pro|con <target> <support text or d<N>>".to_string());
        }
        let polarity = match forms[0].as_str() {
            "pro" => Polarity::Pro,
            "con" => Polarity::Con,
            other => return Err(format!("polarity must be pro or con, not `{other}`")),
        };
        let target = parse_arg_target(&forms[1])?;
        let support = if forms.len() == 3 {
            match parse_derivation_id(&forms[2]) {
                Some(d) if self.store.find_derivation(d).is_some() => Support::Derivation(d),
                _ => Support::Text(forms[2..].join(" ")),
            }
        } else {
            Support::Text(forms[2..].join(" "))
        };
        let t = self.require_current()?;
        let shown = match &target {
            ArgTarget::Prop(p) => p.to_string(),
            ArgTarget::Argument(id) => id.to_string(),
        };
        let id = self
            .store
            .argue(t, target, polarity, support, "repl")
            .map_err(|e| e.to_string())?;
        Ok(format!("recorded {id} ({} {shown})", polarity.name()))
    }

    fn cmd_export(&mut self, tail: &str) -> Result<String, String> {
        let mut words = tail.split_whitespace();
        let path = words.next().ok_or("usage: export <path> [json]")?;
        if let Some(fmt) = words.next() {
            if fmt != "json" {
                return Err(format!("unsupported format `{fmt}` (only json)"));
            }
        }
        let t = self.require_current()?;
        let mut file = std::fs::File::create(path).map_err(|e| format!("{path}: {e}"))?;
        let bytes = export_provenance(&self.store, t, &mut file)
            .map_err(|e| format!("{path}: {e}"))?;
        Ok(format!("wrote {bytes} bytes to {path}"))
    }
}

fn parse_derivation_id(s: &str) -> Option<DerivationId> {
    s.strip_prefix('d').and_then(|d| d.parse::<u64>().ok()).map(DerivationId)
}

fn parse_arg_target(s: &str) -> Result<ArgTarget, String> {
    let s = s.trim();
    if let Some(digits) = s.strip_prefix("arg") {
        if let Ok(n) = digits.parse::<u64>() {
            return Ok(ArgTarget::Argument(ArgumentId(n)));
        }
    }
    parse_prop(s).map(ArgTarget::Prop).map_err(|e| e.to_string())
}

fn prove_text(outcome: ProveOutcome) -> String {
    match outcome {
        ProveOutcome::Provable(id) => format!("provable; derivation {id}"),
        ProveOutcome::NotDerivable { definitive: true } => "not derivable (definitive)".to_string(),
        ProveOutcome::NotDerivable { definitive: false } => {
            "not derivable (within budget)".to_string()
        }
        ProveOutcome::BudgetExhausted => "budget exhausted; undecided".to_string(),
    }
}

fn leg_text(outcome: ProveOutcome) -> String {
    match outcome {
        ProveOutcome::Provable(id) => format!("provable ({id})"),
        other => prove_text(other),
    }
}

fn diag_text(d: &BlockDiagnostic) -> String {
    use crate::theory::ExcludedRule::*;
    match (&d.would_derive_by, &d.via) {
        (ContrapositionOfEntailmentRule, BlockVia::Rule(id)) => {
            format!("contraposition of rule {id}")
        }
        (ExFalso, BlockVia::Premises(ps)) if ps.len() == 2 => {
            format!("ex-falso from {} and {}", ps[0], ps[1])
        }
        (OrIntro, BlockVia::Premises(ps)) if !ps.is_empty() => {
            format!("or-intro from {}", ps[0])
        }
        (Reductio, BlockVia::Premises(ps)) if !ps.is_empty() => {
            format!("reductio via hypothesis {}", ps[0])
        }
        _ => d.to_string(),
    }
}

fn leak_text(d: &LeakageDiagnostic) -> String {
    let p = &d.provenance;
    let rules = if p.rules.is_empty() {
        "no matching rules".to_string()
    } else {
        format!(
            "rules: {}",
            p.rules.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
        )
    };
    format!(
        "P({}) <= {:.6} [P({} | {}) = {:.6}, P({}) = {:.6}; {rules}]",
        d.event, d.bound, p.conditional_event, p.conditional_given, p.p_cond,
        p.conditional_event, p.p_marginal,
    )
}

/// Indented proof tree. Leaves name the assertion (or hypothesis) they
/// reiterate; the layer label says which machinery produced the premise:
/// `direct` derivations, `planner` assertions, or `closed-world` records.
fn why_tree(store: &TheoryStore, id: DerivationId, indent: usize, out: &mut String) {
    let Some(d) = store.find_derivation(id) else {
        out.push_str(&format!("{}{} (missing)\n", "  ".repeat(indent), id));
        return;
    };
    out.push_str(&"  ".repeat(indent));
    out.push_str(&node_line(store, d));
    out.push('\n');
    for p in &d.premises {
        why_tree(store, *p, indent + 1, out);
    }
}

fn node_line(store: &TheoryStore, d: &Derivation) -> String {
    let mut label = d.rule.name().to_string();
    if let Some(via) = d.via {
        label.push_str(&format!(" via {via}"));
    }
    let mut layer = "direct";
    if d.rule == RuleTag::Reiteration && d.premises.is_empty() {
        let assertion = store
            .visible(d.theory)
            .ok()
            .and_then(|v| v.find_assertion(&d.conclusion).cloned());
        match assertion {
            Some(a) => {
                label.push_str(&format!(" <- {}", a.id));
                layer = match a.source.as_str() {
                    "closed-world" => "closed-world",
                    "plan-triggered" => "planner",
                    _ => "direct",
                };
            }
            None if d.hypotheses.contains(&d.conclusion) => {
                label.push_str(" <- hypothesis");
            }
            None => label.push_str(" <- retracted view"),
        }
    }
    let under = if d.hypotheses.is_empty() {
        String::new()
    } else {
        let hs: Vec<String> = d.hypotheses.iter().map(Prop::to_string).collect();
        format!(" (under {})", hs.join(", "))
    };
    format!("{} {} [{label}]{under} {layer}", d.id, d.conclusion)
}

/// Install a parsed document: theories in order, clauses in order, plan
/// triggers firing as asserts land. Returns (theory, clause count) pairs.
pub fn load_document(
    session: &mut Session,
    doc: &KbDocument,
) -> Result<Vec<(TheoryId, usize)>, String> {
    let mut out = Vec::new();
    for form in &doc.theories {
        let t = session
            .store
            .create_theory(form.name.clone())
            .map_err(|e| e.to_string())?;
        for clause in &form.clauses {
            match clause {
                Clause::Assert(p) => {
                    session
                        .store
                        .assert_with_triggers(t, p.clone(), "kb", session.budget)
                        .map_err(|e| e.to_string())?;
                }
                Clause::Rule { premises, conclusion } => {
                    session
                        .store
                        .add_rule(t, premises.clone(), conclusion.clone())
                        .map_err(|e| e.to_string())?;
                }
                Clause::Implies(p, q) => {
                    session
                        .store
                        .install_implication(t, p, q, session.with_plans, "kb", session.budget)
                        .map_err(|e| e.to_string())?;
                }
                Clause::Plan { trigger, steps } => {
                    session
                        .store
                        .add_plan(t, trigger.clone(), steps.clone(), PlanOrigin::User)
                        .map_err(|e| e.to_string())?;
                }
                Clause::Prob(c) => {
                    session.store.add_constraint(t, c.clone()).map_err(|e| e.to_string())?;
                }
            }
        }
        out.push((t, form.clauses.len()));
    }
    Ok(out)
}

const HELP: &str = "commands:
  theory <name>                switch to (or create) a theory
  load <path>                  load a .kb document
  assert <prop>                assert; when-assert plans fire
  rule (<prop>+) <prop>        add an entailment rule
  goal <prop>                  run the plan interpreter at a goal
  prove [<theory>] <prop>      direct proof search
  decide [<theory>] <prop>     ground decision procedure
  implies? <psi> <phi>         try both legs of the deduction theorem
  thnot <goal> [assert]        negation as failure
  derive <name> (<id>*) <clause>*   derived theory omitting items
  why d<N>                     print a derivation tree
  inconsistencies              contradiction pairs in the current theory
  audit                        probabilistic contraposition-leak audit
  args <prop|argN>             list recorded arguments
  argue pro|con <target> <support>  record an argument
  export <path> [json]         write provenance JSON
  quit";

/// Drive a session from `input`, writing results to `out`. Interactive
/// mode prints prompts; batch mode echoes each command for a readable,
/// reproducible transcript. Returns the process exit code.
pub fn run_repl(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    interactive: bool,
) -> i32 {
    let mut line = String::new();
    loop {
        if interactive {
            if write!(out, "dlp> ").and_then(|_| out.flush()).is_err() {
                return 1;
            }
        }
        line.clear();
        match input.read_line(&mut line) {
            Ok(0) => return 0,
            Ok(_) => {}
            Err(_) => return 1,
        }
        let trimmed = line.trim().to_string();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        if !interactive && writeln!(out, "dlp> {trimmed}").is_err() {
            return 1;
        }
        match session.dispatch(&trimmed) {
            Ok(Effect::Quit) => return 0,
            Ok(Effect::Text(t)) => {
                if !t.is_empty() && writeln!(out, "{t}").is_err() {
                    return 1;
                }
            }
            Err(msg) => {
                if writeln!(out, "error: {msg}").is_err() {
                    return 1;
                }
            }
        }
    }
}

/// Batch mode: load a document, then report each theory's shape, its
/// contradictions, and any probability-audit findings.
pub fn run_kb(session: &mut Session, text: &str, out: &mut dyn Write) -> i32 {
    let doc = match parse_document(text) {
        Ok(doc) => doc,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return 2;
        }
    };
    let loaded = match load_document(session, &doc) {
        Ok(loaded) => loaded,
        Err(msg) => {
            let _ = writeln!(out, "error: {msg}");
            return 2;
        }
    };
    for (t, _) in loaded {
        if report_theory(session, t, out).is_err() {
            return 1;
        }
    }
    0
}

fn report_theory(
    session: &mut Session,
    t: TheoryId,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let (name, content) = match (session.store.theory(t), session.store.visible(t)) {
        (Ok(theory), Ok(content)) => (theory.name.clone(), content),
        _ => return Ok(()),
    };
    writeln!(
        out,
        "theory {} {}: {} assertions, {} rules, {} plans",
        t,
        name,
        content.assertions.len(),
        content.rules.len(),
        content.plans.len()
    )?;
    match session.store.list_inconsistencies(t, &session.proof_budget()) {
        Ok((pairs, complete)) => {
            let coverage = if complete { "complete" } else { "budget exhausted" };
            if pairs.is_empty() {
                writeln!(out, "  contradictions: none ({coverage})")?;
            } else {
                for (p, pos, neg) in &pairs {
                    writeln!(out, "  contradiction ({coverage}): {p}: {pos} vs {neg}")?;
                }
            }
        }
        Err(e) => writeln!(out, "  error: {e}")?,
    }
    let constraints = session
        .store
        .theory(t)
        .map(|th| th.constraints.clone())
        .unwrap_or_default();
    if !constraints.is_empty() {
        let rules = session.store.visible(t).map(|v| v.rules).unwrap_or_default();
        for diag in audit_contraposition(&rules, &constraints) {
            writeln!(out, "  leak: {}", leak_text(&diag))?;
        }
    }
    Ok(())
}
