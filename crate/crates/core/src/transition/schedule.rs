//! Seeded interleaving of concurrent activities at whole-transition
//! granularity.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Engine, Outcome, Transition, TransitionError, TransitionRecord};
use crate::sym::Sym;
use crate::world::{Microworld, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltReason {
    FuelExhausted,
    SwitchOff,
    ConflictDetected,
    MaxSteps,
    ScheduleComplete,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HaltReason::FuelExhausted => "FuelExhausted",
            HaltReason::SwitchOff => "SwitchOff",
            HaltReason::ConflictDetected => "ConflictDetected",
            HaltReason::MaxSteps => "MaxSteps",
            HaltReason::ScheduleComplete => "ScheduleComplete",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wait {
    /// Ready again once the scheduler reaches this step.
    UntilStep(u64),
    /// Blocked on world state; re-polled after every commit.
    Condition,
}

#[derive(Debug, Clone)]
pub enum Poll {
    Ready(Transition),
    Blocked(Wait),
    Halt(HaltReason),
    Finished,
}

/// A logically concurrent participant requesting transitions.
///
/// `poll` must not change the activity's state: it may be asked repeatedly
/// without being chosen. State advances in `on_record`, which sees every
/// record in commit order (`own` marks the activity's own requests).
pub trait Activity {
    fn name(&self) -> &str;
    fn poll(&self, world: &Microworld, step: u64) -> Poll;
    fn on_record(&mut self, record: &TransitionRecord, own: bool);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    pub max_steps: u64,
    /// Keep a world snapshot after every record.
    pub capture_states: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            max_steps: 10_000,
            capture_states: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub step: u64,
    pub record: TransitionRecord,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub halt: HaltReason,
    pub states: Vec<Snapshot>,
}

impl Trace {
    /// One line per record in the fixed trace format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let r = &e.record;
            out.push_str(&format!(
                "step={} tick={} activity={} transition={} outcome={} conflicts={}\n",
                e.step,
                r.tick_after,
                r.activity,
                r.transition,
                r.outcome,
                r.conflicts.len()
            ));
        }
        out
    }

    pub fn records(&self) -> impl Iterator<Item = &TransitionRecord> {
        self.entries.iter().map(|e| &e.record)
    }

    /// Names of committed transitions in commit order.
    pub fn committed(&self) -> Vec<Sym> {
        self.records()
            .filter(|r| r.committed())
            .map(|r| r.transition.clone())
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("deadlock at step {step}: every activity is blocked")]
    Deadlock { step: u64 },
    #[error("no activities to schedule")]
    NoActivities,
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// Run `activities` against `world` until one halts, all finish, or
/// `max_steps` transition requests have been made. Whenever several
/// activities are ready, the seeded generator picks which one fires.
pub fn schedule(
    activities: &mut [Box<dyn Activity + '_>],
    world: &mut Microworld,
    engine: &mut Engine<'_>,
    options: &RunOptions,
) -> Result<Trace, ScheduleError> {
    if activities.is_empty() {
        return Err(ScheduleError::NoActivities);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut trace = Trace {
        entries: Vec::new(),
        halt: HaltReason::MaxSteps,
        states: Vec::new(),
    };
    let mut step = 0u64;

    let halt = loop {
        if step >= options.max_steps {
            break HaltReason::MaxSteps;
        }
        let polls: Vec<Poll> = activities.iter().map(|a| a.poll(world, step)).collect();
        if let Some(reason) = polls.iter().find_map(|p| match p {
            Poll::Halt(r) => Some(*r),
            _ => None,
        }) {
            break reason;
        }

        let ready: Vec<usize> = polls
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Poll::Ready(_)))
            .map(|(i, _)| i)
            .collect();
        if ready.is_empty() {
            if polls.iter().all(|p| matches!(p, Poll::Finished)) {
                break HaltReason::ScheduleComplete;
            }
            let timer = polls
                .iter()
                .filter_map(|p| match p {
                    Poll::Blocked(Wait::UntilStep(s)) if *s > step => Some(*s),
                    _ => None,
                })
                .min();
            match timer {
                Some(s) => {
                    step = s;
                    continue;
                }
                None => return Err(ScheduleError::Deadlock { step }),
            }
        }

        let chosen = if ready.len() == 1 {
            ready[0]
        } else {
            ready[rng.gen_range(0..ready.len())]
        };
        let Poll::Ready(t) = &polls[chosen] else {
            unreachable!("chosen from ready polls")
        };
        let record = engine.fire(t, world, activities[chosen].name())?;
        for (i, a) in activities.iter_mut().enumerate() {
            a.on_record(&record, i == chosen);
        }
        let halted = record.outcome == Outcome::CommittedWithConflictsHalt;
        trace.entries.push(TraceEntry { step, record });
        if options.capture_states {
            trace.states.push(world.snapshot());
        }
        step += 1;
        if halted {
            break HaltReason::ConflictDetected;
        }
    };
    trace.halt = halt;
    Ok(trace)
}

/// One scripted request, optionally held until a given step.
#[derive(Debug, Clone)]
pub struct ScriptStep {
    pub at: Option<u64>,
    pub transition: Transition,
}

/// Activity that requests a fixed sequence of transitions, advancing after
/// each of its own records whatever the outcome.
#[derive(Debug, Clone)]
pub struct ScriptActivity {
    name: String,
    steps: Vec<ScriptStep>,
    next: usize,
}

impl ScriptActivity {
    pub fn new(name: &str, steps: Vec<ScriptStep>) -> Self {
        ScriptActivity {
            name: name.to_string(),
            steps,
            next: 0,
        }
    }

    pub fn done(&self) -> bool {
        self.next >= self.steps.len()
    }
}

impl Activity for ScriptActivity {
    fn name(&self) -> &str {
        &self.name
    }

    fn poll(&self, _world: &Microworld, step: u64) -> Poll {
        match self.steps.get(self.next) {
            None => Poll::Finished,
            Some(ScriptStep { at: Some(at), .. }) if *at > step => Poll::Blocked(Wait::UntilStep(*at)),
            Some(s) => Poll::Ready(s.transition.clone()),
        }
    }

    fn on_record(&mut self, _record: &TransitionRecord, own: bool) {
        if own {
            self.next += 1;
        }
    }
}
