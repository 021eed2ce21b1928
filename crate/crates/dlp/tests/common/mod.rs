//! Generators and independent oracles shared by the integration suites.
//!
//! The oracles recompute expected answers from scratch with set-based
//! fixpoints instead of the engine's worklist, layers, and arenas, so an
//! agreement failure points at a real semantic bug rather than a shared
//! mistake.

use std::collections::BTreeSet;

use dlp::prop::Prop;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force saturation over a closure-set-bounded fact set.
pub mod oracle {
    use super::*;

    fn collect(p: &Prop, out: &mut BTreeSet<Prop>) {
        out.insert(p.clone());
        match p {
            Prop::Not(a) => collect(a, out),
            Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => {
                collect(a, out);
                collect(b, out);
            }
            Prop::Atom { .. } => {}
        }
    }

    fn dual(p: &Prop) -> Option<Prop> {
        match p {
            Prop::Not(inner) => match &**inner {
                Prop::And(a, b) => {
                    Some(Prop::or(Prop::not((**a).clone()), Prop::not((**b).clone())))
                }
                Prop::Or(a, b) => {
                    Some(Prop::and(Prop::not((**a).clone()), Prop::not((**b).clone())))
                }
                _ => None,
            },
            Prop::Or(a, b) => match (&**a, &**b) {
                (Prop::Not(x), Prop::Not(y)) => {
                    Some(Prop::not(Prop::and((**x).clone(), (**y).clone())))
                }
                _ => None,
            },
            Prop::And(a, b) => match (&**a, &**b) {
                (Prop::Not(x), Prop::Not(y)) => {
                    Some(Prop::not(Prop::or((**x).clone(), (**y).clone())))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Bound for the search: subformulas of every seed, De Morgan mates of
    /// those and of their negations, and one negation over everything.
    pub fn closure_set(seeds: &[Prop]) -> BTreeSet<Prop> {
        let mut cs = BTreeSet::new();
        for seed in seeds {
            let mut base = BTreeSet::new();
            collect(seed, &mut base);
            let mut contribution = base.clone();
            for s in &base {
                for candidate in [s.clone(), Prop::not(s.clone())] {
                    if let Some(d) = dual(&candidate) {
                        collect(&d, &mut contribution);
                    }
                }
            }
            for f in contribution {
                cs.insert(Prop::not(f.clone()));
                cs.insert(f);
            }
        }
        cs
    }

    fn base_fixpoint(
        facts: &mut BTreeSet<Prop>,
        rules: &[(Vec<Prop>, Prop)],
        cs: &BTreeSet<Prop>,
    ) {
        loop {
            let mut add = BTreeSet::new();
            for p in facts.iter() {
                let nn = Prop::not(Prop::not(p.clone()));
                if cs.contains(&nn) {
                    add.insert(nn);
                }
                if let Prop::Not(inner) = p {
                    if let Prop::Not(core) = &**inner {
                        if cs.contains(core) {
                            add.insert((**core).clone());
                        }
                    }
                }
                if let Prop::And(a, b) = p {
                    add.insert((**a).clone());
                    add.insert((**b).clone());
                }
                if let Some(d) = dual(p) {
                    if cs.contains(&d) {
                        add.insert(d);
                    }
                }
                if let Prop::Or(a, b) = p {
                    if facts.contains(&Prop::not((**a).clone())) {
                        add.insert((**b).clone());
                    }
                    if facts.contains(&Prop::not((**b).clone())) {
                        add.insert((**a).clone());
                    }
                }
                if let Prop::Implies(a, b) = p {
                    if facts.contains(a) {
                        add.insert((**b).clone());
                    }
                    let na = Prop::not((**a).clone());
                    if facts.contains(&Prop::not((**b).clone())) && cs.contains(&na) {
                        add.insert(na);
                    }
                }
            }
            for candidate in cs.iter() {
                if let Prop::And(a, b) = candidate {
                    if facts.contains(a) && facts.contains(b) {
                        add.insert(candidate.clone());
                    }
                }
            }
            for (premises, conclusion) in rules {
                if premises.iter().all(|p| facts.contains(p)) {
                    add.insert(conclusion.clone());
                }
            }
            let before = facts.len();
            facts.extend(add);
            if facts.len() == before {
                return;
            }
        }
    }

    /// Saturate `facts` under the direct rules; `depth` counts how many
    /// hypothetical layers (proof by cases, two-way introduction) may nest.
    pub fn saturate(
        facts: &BTreeSet<Prop>,
        rules: &[(Vec<Prop>, Prop)],
        cs: &BTreeSet<Prop>,
        depth: u32,
    ) -> BTreeSet<Prop> {
        let mut f = facts.clone();
        loop {
            let before = f.len();
            base_fixpoint(&mut f, rules, cs);
            if depth > 0 {
                let disjunctions: Vec<Prop> =
                    f.iter().filter(|p| matches!(p, Prop::Or(..))).cloned().collect();
                for d in disjunctions {
                    let Prop::Or(a, b) = &d else { unreachable!() };
                    let mut fa = f.clone();
                    fa.insert((**a).clone());
                    let mut fb = f.clone();
                    fb.insert((**b).clone());
                    let sa = saturate(&fa, rules, cs, depth - 1);
                    let sb = saturate(&fb, rules, cs, depth - 1);
                    let both: Vec<Prop> = sa.intersection(&sb).cloned().collect();
                    f.extend(both);
                }
                let candidates: Vec<(Prop, Prop, Prop)> = cs
                    .iter()
                    .filter_map(|p| match p {
                        Prop::Implies(a, b) => {
                            Some((p.clone(), (**a).clone(), (**b).clone()))
                        }
                        _ => None,
                    })
                    .collect();
                for (formula, psi, phi) in candidates {
                    if f.contains(&formula) {
                        continue;
                    }
                    let mut fw = f.clone();
                    fw.insert(psi.clone());
                    if !saturate(&fw, rules, cs, depth - 1).contains(&phi) {
                        continue;
                    }
                    let mut bw = f.clone();
                    bw.insert(Prop::not(phi.clone()));
                    if saturate(&bw, rules, cs, depth - 1).contains(&Prop::not(psi)) {
                        f.insert(formula);
                    }
                }
            }
            if f.len() == before {
                return f;
            }
        }
    }

    /// Does the ground theory prove `goal` within `depth` hypothetical
    /// layers? Seeds the bound the same way the engine does.
    pub fn provable(
        assertions: &[Prop],
        rules: &[(Vec<Prop>, Prop)],
        goal: &Prop,
        depth: u32,
    ) -> bool {
        let mut seeds: Vec<Prop> = assertions.to_vec();
        for (premises, conclusion) in rules {
            seeds.extend(premises.iter().cloned());
            seeds.push(conclusion.clone());
        }
        seeds.push(goal.clone());
        let cs = closure_set(&seeds);
        let f0: BTreeSet<Prop> = assertions.iter().cloned().collect();
        saturate(&f0, rules, &cs, depth).contains(goal)
    }
}

/// Random backward-chaining plan spaces with a reachability oracle.
pub mod plans {
    use super::*;
    use dlp::planner::{PlanOrigin, PlanStep, Trigger};
    use dlp::theory::{TheoryId, TheoryStore};

    pub struct PlanSpace {
        pub atom_count: usize,
        pub db: BTreeSet<usize>,
        /// (goal atom, subgoal atoms all strictly deeper, assert the goal
        /// at the end of the body?)
        pub plans: Vec<(usize, Vec<usize>, bool)>,
    }

    pub fn atom(i: usize) -> Prop {
        Prop::atom0(format!("g{i}").as_str())
    }

    /// Acyclic space: plans for atom `i` only subgoal atoms above `i`, so
    /// an exhaustive search always terminates.
    pub fn generate(rng: &mut ChaCha8Rng) -> PlanSpace {
        let atom_count: usize = rng.gen_range(6..=10);
        let mut db = BTreeSet::new();
        for i in 0..atom_count {
            if rng.gen_bool(0.35) {
                db.insert(i);
            }
        }
        let mut plans = Vec::new();
        for goal in 0..atom_count.saturating_sub(1) {
            for _ in 0..rng.gen_range(0..=2) {
                let n_subs = rng.gen_range(1..=3.min(atom_count - goal - 1));
                let mut subs = Vec::new();
                for _ in 0..n_subs {
                    subs.push(rng.gen_range(goal + 1..atom_count));
                }
                plans.push((goal, subs, rng.gen_bool(0.5)));
            }
        }
        PlanSpace { atom_count, db, plans }
    }

    pub fn install(space: &PlanSpace, store: &mut TheoryStore) -> TheoryId {
        let t = store.create_theory("space").unwrap();
        for &i in &space.db {
            store.assert_prop(t, atom(i), "kb").unwrap();
        }
        for (goal, subs, assert_goal) in &space.plans {
            let mut body: Vec<PlanStep> =
                subs.iter().map(|s| PlanStep::DoGoal(atom(*s))).collect();
            if *assert_goal {
                body.push(PlanStep::DoAssert(atom(*goal)));
            }
            store
                .add_plan(t, Trigger::WhenGoal(atom(*goal)), body, PlanOrigin::User)
                .unwrap();
        }
        t
    }

    /// Least fixpoint of "in the database, or some plan whose subgoals are
    /// all achievable".
    pub fn achievable_set(space: &PlanSpace) -> BTreeSet<usize> {
        let mut ok = space.db.clone();
        loop {
            let before = ok.len();
            for (goal, subs, _) in &space.plans {
                if subs.iter().all(|s| ok.contains(s)) {
                    ok.insert(*goal);
                }
            }
            if ok.len() == before {
                return ok;
            }
        }
    }
}

/// Grid search for the largest admissible marginal given the two
/// probability constraints, used to check the bound's tightness.
pub mod grid {
    /// Largest `w` for which a joint distribution exists with
    /// P(T|W) = p_cond, P(T) = p_marg, P(W) = w.
    pub fn max_marginal(p_cond: f64, p_marg: f64, resolution: usize) -> f64 {
        let mut best = 0.0_f64;
        for i in 0..=resolution {
            let w = i as f64 / resolution as f64;
            let t_and_w = p_cond * w;
            let t_not_w = p_marg - t_and_w;
            let not_t_w = (1.0 - p_cond) * w;
            let not_t_not_w = 1.0 - w - p_marg + t_and_w;
            if t_not_w >= -1e-12 && not_t_w >= -1e-12 && not_t_not_w >= -1e-12 {
                best = best.max(w);
            }
        }
        best
    }
}

/// Random ground formulas, theories, and whole documents.
pub mod gen {
    use super::*;
    use dlp::parse::{Clause, KbDocument, TheoryForm};
    use dlp::planner::{PlanStep, Trigger};
    use dlp::prob::ProbConstraint;
    use dlp::symbol::Symbol;
    use dlp::term::{Term, Var};

    pub fn ground_prop(rng: &mut ChaCha8Rng, atoms: &[&str], depth: u32) -> Prop {
        if depth == 0 || rng.gen_bool(0.4) {
            return Prop::atom0(*atoms.choose(rng).unwrap());
        }
        match rng.gen_range(0..4) {
            0 => Prop::not(ground_prop(rng, atoms, depth - 1)),
            1 => Prop::and(
                ground_prop(rng, atoms, depth - 1),
                ground_prop(rng, atoms, depth - 1),
            ),
            2 => Prop::or(
                ground_prop(rng, atoms, depth - 1),
                ground_prop(rng, atoms, depth - 1),
            ),
            _ => Prop::implies(
                ground_prop(rng, atoms, depth - 1),
                ground_prop(rng, atoms, depth - 1),
            ),
        }
    }

    fn literal(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Prop {
        let a = Prop::atom0(*atoms.choose(rng).unwrap());
        if rng.gen_bool(0.5) {
            Prop::not(a)
        } else {
            a
        }
    }

    fn clause(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Clause {
        match rng.gen_range(0..10) {
            0..=3 => Clause::Assert(ground_prop(rng, atoms, 2)),
            4 | 5 => {
                let n = rng.gen_range(1..=2);
                let premises = (0..n).map(|_| literal(rng, atoms)).collect();
                Clause::Rule { premises, conclusion: literal(rng, atoms) }
            }
            6 | 7 => Clause::Implies(literal(rng, atoms), literal(rng, atoms)),
            8 => {
                let trigger = if rng.gen_bool(0.5) {
                    Trigger::WhenAssert(literal(rng, atoms))
                } else if rng.gen_bool(0.3) {
                    let var = Term::Variable(Var { name: Symbol::new("x"), scope: 0 });
                    Trigger::WhenGoal(Prop::atom("holds", vec![var]))
                } else {
                    Trigger::WhenGoal(literal(rng, atoms))
                };
                let mut steps = Vec::new();
                for _ in 0..rng.gen_range(1..=3) {
                    steps.push(match rng.gen_range(0..5) {
                        0 | 1 => PlanStep::DoAssert(literal(rng, atoms)),
                        2 => PlanStep::DoGoal(literal(rng, atoms)),
                        3 => PlanStep::DoThnot {
                            goal: literal(rng, atoms),
                            assert_negation: rng.gen_bool(0.5),
                        },
                        _ => PlanStep::Bind(
                            Term::Variable(Var { name: Symbol::new("x"), scope: 0 }),
                            Term::constant(*atoms.choose(rng).unwrap()),
                        ),
                    });
                }
                if rng.gen_bool(0.15) {
                    steps.push(PlanStep::Fail);
                }
                Clause::Plan { trigger, steps }
            }
            _ => {
                let value = rng.gen_range(0..=64) as f64 / 64.0;
                Clause::Prob(if rng.gen_bool(0.5) {
                    ProbConstraint::Conditional {
                        event: Symbol::new(*atoms.choose(rng).unwrap()),
                        given: Symbol::new(*atoms.choose(rng).unwrap()),
                        value,
                    }
                } else {
                    ProbConstraint::Marginal {
                        event: Symbol::new(*atoms.choose(rng).unwrap()),
                        value,
                    }
                })
            }
        }
    }

    pub fn document(rng: &mut ChaCha8Rng, index: usize) -> KbDocument {
        let atoms = ["alpha", "beta", "gamma", "delta"];
        let n_theories = rng.gen_range(1..=3);
        let mut theories = Vec::new();
        for i in 0..n_theories {
            let n_clauses = rng.gen_range(1..=6);
            let clauses = (0..n_clauses).map(|_| clause(rng, &atoms)).collect();
            theories.push(TheoryForm {
                name: Symbol::new(format!("doc{index}-t{i}").as_str()),
                clauses,
            });
        }
        KbDocument { theories }
    }
}
