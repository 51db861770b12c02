//! Guarded atomic transitions over a microworld, with closure rebuild and
//! conflict probing after every commit.

pub mod probe;
pub mod schedule;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fact::{Fact, Ground};
use crate::ontology::KnowledgeBase;
use crate::rules::{detect_conflicts, infer_closure, Closure, ClosureOptions, Rule, RuleError, SkolemRegistry, DEFAULT_MAX_ROUNDS};
use crate::sym::Sym;
use crate::world::{Microworld, Snapshot, WorldError};

pub use probe::{ConflictReport, Probe, ProbeKind};
pub use schedule::{schedule, Activity, HaltReason, Poll, RunOptions, ScheduleError, ScriptActivity, ScriptStep, Trace, TraceEntry, Wait};

/// Named read-only check over the world.
#[derive(Clone)]
pub struct NamedCheck {
    pub name: String,
    check: Arc<dyn Fn(&Microworld) -> bool + Send + Sync>,
}

impl NamedCheck {
    pub fn new(name: &str, check: impl Fn(&Microworld) -> bool + Send + Sync + 'static) -> Self {
        NamedCheck {
            name: name.to_string(),
            check: Arc::new(check),
        }
    }

    pub fn eval(&self, world: &Microworld) -> bool {
        (self.check)(world)
    }
}

impl fmt::Debug for NamedCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NamedCheck({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum Guard {
    TriplePresent(Fact),
    TripleAbsent(Fact),
    ResourceAtLeast(Sym, u64),
    Predicate(NamedCheck),
}

impl Guard {
    pub fn present(pred: &str, subj: &str, obj: impl Into<Ground>) -> Self {
        Guard::TriplePresent(Fact::triple(pred, subj, obj))
    }

    pub fn absent(pred: &str, subj: &str, obj: impl Into<Ground>) -> Self {
        Guard::TripleAbsent(Fact::triple(pred, subj, obj))
    }

    pub fn check(name: &str, f: impl Fn(&Microworld) -> bool + Send + Sync + 'static) -> Self {
        Guard::Predicate(NamedCheck::new(name, f))
    }

    pub fn eval(&self, world: &Microworld) -> bool {
        match self {
            Guard::TriplePresent(f) => world.has(f),
            Guard::TripleAbsent(f) => !world.has(f),
            Guard::ResourceAtLeast(r, n) => world.resource(r.as_str()) >= *n,
            Guard::Predicate(c) => c.eval(world),
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::TriplePresent(fact) => write!(f, "present {fact}"),
            Guard::TripleAbsent(fact) => write!(f, "absent {fact}"),
            Guard::ResourceAtLeast(r, n) => write!(f, "{r} >= {n}"),
            Guard::Predicate(c) => f.write_str(&c.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardResult {
    pub guard: String,
    pub passed: bool,
}

/// The SUMO process a transition realizes, e.g. `TurningOnDevice` with the
/// engine as patient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSpec {
    pub class: Sym,
    pub patient: Sym,
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub name: Sym,
    pub process: Option<ProcessSpec>,
    pub guards: Vec<Guard>,
    pub disconnects: Vec<Fact>,
    pub connects: Vec<Fact>,
    pub consumes: Vec<(Sym, u64)>,
    pub produces: Vec<(Sym, u64)>,
    /// Attributes holding at the start of the process interval.
    pub begin_attributes: Vec<(Sym, Sym)>,
    /// Attributes holding at its end.
    pub end_attributes: Vec<(Sym, Sym)>,
}

impl Transition {
    pub fn new(name: &str) -> Self {
        Transition {
            name: Sym::new(name),
            process: None,
            guards: Vec::new(),
            disconnects: Vec::new(),
            connects: Vec::new(),
            consumes: Vec::new(),
            produces: Vec::new(),
            begin_attributes: Vec::new(),
            end_attributes: Vec::new(),
        }
    }

    pub fn process(mut self, class: &str, patient: &str) -> Self {
        self.process = Some(ProcessSpec {
            class: Sym::new(class),
            patient: Sym::new(patient),
        });
        self
    }

    pub fn guard(mut self, g: Guard) -> Self {
        self.guards.push(g);
        self
    }

    pub fn disconnect(mut self, f: Fact) -> Self {
        self.disconnects.push(f);
        self
    }

    pub fn connect(mut self, f: Fact) -> Self {
        self.connects.push(f);
        self
    }

    /// Replace `(pred subj from)` with `(pred subj to)`.
    pub fn replace(self, pred: &str, subj: &str, from: impl Into<Ground>, to: impl Into<Ground>) -> Self {
        self.disconnect(Fact::triple(pred, subj, from))
            .connect(Fact::triple(pred, subj, to))
    }

    pub fn consume(mut self, resource: &str, amount: u64) -> Self {
        self.consumes.push((Sym::new(resource), amount));
        self
    }

    pub fn produce(mut self, resource: &str, amount: u64) -> Self {
        self.produces.push((Sym::new(resource), amount));
        self
    }

    pub fn begin(mut self, entity: &str, attribute: &str) -> Self {
        self.begin_attributes.push((Sym::new(entity), Sym::new(attribute)));
        self
    }

    pub fn end(mut self, entity: &str, attribute: &str) -> Self {
        self.end_attributes.push((Sym::new(entity), Sym::new(attribute)));
        self
    }

    pub fn check_guards(&self, world: &Microworld) -> Result<Vec<GuardResult>, Vec<GuardResult>> {
        check_guards(self, world)
    }
}

/// Evaluate every guard; `Err` carries all results when any failed.
pub fn check_guards(t: &Transition, world: &Microworld) -> Result<Vec<GuardResult>, Vec<GuardResult>> {
    let results: Vec<GuardResult> = t
        .guards
        .iter()
        .map(|g| GuardResult {
            guard: g.to_string(),
            passed: g.eval(world),
        })
        .collect();
    if results.iter().all(|r| r.passed) {
        Ok(results)
    } else {
        Err(results)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Committed,
    RejectedGuards,
    CommittedWithConflictsHalt,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Committed => "Committed",
            Outcome::RejectedGuards => "RejectedGuards",
            Outcome::CommittedWithConflictsHalt => "CommittedWithConflicts-Halt",
        })
    }
}

/// Explicit facts removed and added by one commit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Delta {
    pub removed: BTreeSet<Fact>,
    pub added: BTreeSet<Fact>,
}

#[derive(Debug, Clone)]
pub struct TransitionRecord {
    pub transition: Sym,
    pub activity: Sym,
    pub tick_before: u64,
    pub tick_after: u64,
    pub guard_results: Vec<GuardResult>,
    pub closure_rounds: usize,
    /// False when the policy skipped closure and probes.
    pub validated: bool,
    pub conflicts: Vec<ConflictReport>,
    pub outcome: Outcome,
    pub delta: Delta,
    /// World before the fire, kept when the run halts on conflicts.
    pub pre_fire: Option<Box<Snapshot>>,
}

impl TransitionRecord {
    pub fn committed(&self) -> bool {
        self.outcome != Outcome::RejectedGuards
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationPolicy {
    #[default]
    Always,
    /// Skip closure and probes when the transition repeats its last commit
    /// with the same explicit delta and no other activity committed since.
    SkipIfRepeatUnchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("transition {0} both connects and disconnects {1}")]
    Overlap(Sym, Fact),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

struct Commit {
    activity: Sym,
    transition: Sym,
    delta: Delta,
}

/// Fires transitions against a knowledge base, maintaining the skolem
/// registry and commit history that validation needs.
pub struct Engine<'kb> {
    kb: &'kb KnowledgeBase,
    rules: Vec<Rule>,
    probes: Vec<Probe>,
    policy: ValidationPolicy,
    registry: SkolemRegistry,
    max_rounds: usize,
    background: BTreeSet<Fact>,
    commits: Vec<Commit>,
}

impl<'kb> Engine<'kb> {
    /// Engine using the knowledge base's rules; its ground facts join every
    /// closure as background.
    pub fn new(kb: &'kb KnowledgeBase, probes: Vec<Probe>, policy: ValidationPolicy) -> Self {
        Engine {
            kb,
            rules: kb.rules().to_vec(),
            probes,
            policy,
            registry: SkolemRegistry::new(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            background: kb.ground_facts(),
            commits: Vec::new(),
        }
    }

    pub fn with_rules(mut self, rules: Vec<Rule>) -> Self {
        self.rules = rules;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds;
        self
    }

    pub fn kb(&self) -> &'kb KnowledgeBase {
        self.kb
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn policy(&self) -> ValidationPolicy {
        self.policy
    }

    fn may_skip(&self, activity: &Sym, t: &Sym, delta: &Delta) -> bool {
        if self.policy != ValidationPolicy::SkipIfRepeatUnchanged {
            return false;
        }
        for c in self.commits.iter().rev() {
            if c.activity != *activity {
                return false;
            }
            if c.transition == *t {
                return c.delta == *delta;
            }
        }
        false
    }

    fn close(&mut self, world: &Microworld) -> Result<(Closure, Vec<ConflictReport>), RuleError> {
        let mut input = world.closure_input();
        input.extend(self.background.iter().cloned());
        let options = ClosureOptions {
            max_rounds: self.max_rounds,
            intervals: world.intervals(),
        };
        let closure = infer_closure(&input, &self.rules, self.kb, &mut self.registry, &options)?;
        let conflicts = detect_conflicts(&closure.store(), &self.probes, self.kb, world.tick());
        Ok((closure, conflicts))
    }

    /// Full closure and probe pass over `world` with a fresh skolem registry,
    /// independent of any commit history.
    pub fn validate(&self, world: &Microworld) -> Result<(Closure, Vec<ConflictReport>), RuleError> {
        let mut fresh = Engine {
            kb: self.kb,
            rules: self.rules.clone(),
            probes: self.probes.clone(),
            policy: ValidationPolicy::Always,
            registry: SkolemRegistry::new(),
            max_rounds: self.max_rounds,
            background: self.background.clone(),
            commits: Vec::new(),
        };
        fresh.close(world)
    }

    /// Rebuild the closure of a world under construction and store its
    /// inferred facts.
    pub fn refresh(&mut self, world: &mut Microworld) -> Result<Vec<ConflictReport>, RuleError> {
        let (closure, conflicts) = self.close(world)?;
        world.set_inferred(closure.inferred().cloned().collect());
        Ok(conflicts)
    }

    /// Atomically fire `t` on behalf of `activity`.
    pub fn fire(&mut self, t: &Transition, world: &mut Microworld, activity: &str) -> Result<TransitionRecord, TransitionError> {
        if let Some(f) = t.connects.iter().find(|f| t.disconnects.contains(f)) {
            return Err(TransitionError::Overlap(t.name.clone(), f.clone()));
        }
        let activity = Sym::new(activity);
        let tick_before = world.tick();
        let mut record = TransitionRecord {
            transition: t.name.clone(),
            activity: activity.clone(),
            tick_before,
            tick_after: tick_before,
            guard_results: Vec::new(),
            closure_rounds: 0,
            validated: false,
            conflicts: Vec::new(),
            outcome: Outcome::RejectedGuards,
            delta: Delta::default(),
            pre_fire: None,
        };
        match check_guards(t, world) {
            Ok(results) => record.guard_results = results,
            Err(results) => {
                record.guard_results = results;
                return Ok(record);
            }
        }

        let pre = world.snapshot();
        if let Err(e) = self.apply(t, world) {
            *world = pre.world;
            return Err(e.into());
        }
        record.delta = Delta {
            removed: pre.world.explicit().difference(world.explicit()).cloned().collect(),
            added: world.explicit().difference(pre.world.explicit()).cloned().collect(),
        };
        let tick_after = world.advance_tick();
        record.tick_after = tick_after;
        emit_events(t, world, tick_before, tick_after);

        if !self.may_skip(&activity, &t.name, &record.delta) {
            let (closure, conflicts) = match self.close(world) {
                Ok(found) => found,
                Err(e) => {
                    *world = pre.world;
                    return Err(e.into());
                }
            };
            world.set_inferred(closure.inferred().cloned().collect());
            record.validated = true;
            record.closure_rounds = closure.rounds;
            record.conflicts = conflicts;
        }

        record.outcome = if record.conflicts.is_empty() {
            Outcome::Committed
        } else {
            record.pre_fire = Some(Box::new(pre));
            Outcome::CommittedWithConflictsHalt
        };
        self.commits.push(Commit {
            activity,
            transition: t.name.clone(),
            delta: record.delta.clone(),
        });
        Ok(record)
    }

    fn apply(&self, t: &Transition, world: &mut Microworld) -> Result<(), WorldError> {
        for f in &t.disconnects {
            world.disconnect_fact(f)?;
        }
        for f in &t.connects {
            world.connect_fact(f.clone(), self.kb)?;
        }
        for (r, n) in &t.consumes {
            world.consume(r.as_str(), *n)?;
        }
        for (r, n) in &t.produces {
            world.produce(r.as_str(), *n);
        }
        Ok(())
    }
}

/// Process id for a transition's process instance, e.g. `turningOnDevice_3`.
pub fn process_id(class: &Sym, tick_after: u64) -> Sym {
    let mut chars = class.as_str().chars();
    let lowered: String = match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    };
    Sym::from(format!("{lowered}_{tick_after}"))
}

fn emit_events(t: &Transition, world: &mut Microworld, before: u64, after: u64) {
    let mut events = BTreeSet::new();
    let mut process = None;
    if let Some(spec) = &t.process {
        let p = process_id(&spec.class, after);
        events.insert(Fact::triple("instance", &p, &spec.class));
        events.insert(Fact::triple("patient", &p, &spec.patient));
        process = Some((p, (before, after)));
    }
    let holds = |tick: u64, e: &Sym, a: &Sym| {
        Fact::new(
            "holdsDuring",
            vec![
                Ground::Sym(crate::rules::interval_atom(tick)),
                Fact::triple("attribute", e, a).to_ground(),
            ],
        )
    };
    for (e, a) in &t.begin_attributes {
        events.insert(holds(before, e, a));
    }
    for (e, a) in &t.end_attributes {
        events.insert(holds(after, e, a));
    }
    world.set_events(events, process);
}
