use crate::fact::{Fact, Ground};
use crate::ontology::KnowledgeBase;
use crate::sym::Sym;
use crate::transition::probe::PARTICIPATION_PREDICATE;
use crate::transition::{
    schedule, Activity, Engine, Guard, Probe, RunOptions, ScriptActivity, ScriptStep, Trace, Transition,
    ValidationPolicy,
};
use crate::world::{Microworld, WorldError};

use super::ScenarioError;

pub const ENGINE: &str = "thisGasEngine";
pub const REGION: &str = "bay1";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IgnitionScenario {
    /// Steps at which the switch flips; strictly increasing. The engine
    /// starts off.
    pub toggle_schedule: Vec<u64>,
    /// After the last toggle, connect the opposite state without removing
    /// the current one.
    pub sabotage: bool,
}

impl IgnitionScenario {
    /// `n` toggles on consecutive steps.
    pub fn toggles(n: u64) -> Self {
        IgnitionScenario {
            toggle_schedule: (0..n).collect(),
            sabotage: false,
        }
    }

    pub fn with_sabotage(mut self) -> Self {
        self.sabotage = true;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.toggle_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::Invalid("toggle schedule must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// One gasoline engine, switched off, declared to bear an EngineState.
pub fn build_ignition_world(kb: &KnowledgeBase) -> Result<Microworld, WorldError> {
    let mut w = Microworld::new("ignition");
    w.add_region(REGION);
    w.instantiate("GasolineEngine", ENGINE, REGION, kb)?;
    w.connect("attribute", ENGINE, "EngineOff", kb)?;
    w.connect(PARTICIPATION_PREDICATE, ENGINE, "EngineState", kb)?;
    Ok(w)
}

pub fn turn_on(device: &str, off: &str, on: &str) -> Transition {
    Transition::new("TurningOnDevice")
        .process("TurningOnDevice", device)
        .guard(Guard::present("attribute", device, off))
        .replace("attribute", device, off, on)
        .begin(device, off)
        .end(device, on)
}

pub fn turn_off(device: &str, on: &str, off: &str) -> Transition {
    Transition::new("TurningOffDevice")
        .process("TurningOffDevice", device)
        .guard(Guard::present("attribute", device, on))
        .replace("attribute", device, on, off)
        .begin(device, on)
        .end(device, off)
}

/// Connect `extra` while `current` stays connected.
pub fn sabotage(current: &str, extra: &str) -> Transition {
    Transition::new("SabotageDoubleConnect")
        .guard(Guard::present("attribute", ENGINE, current))
        .connect(Fact::attribute(ENGINE, extra))
}

pub fn ignition_probes(kb: &KnowledgeBase) -> Result<Vec<Probe>, ScenarioError> {
    Ok(vec![
        Probe::partition(kb, "EngineState", Some("Engine"))?,
        Probe::DomainConformance,
    ])
}

/// Current EngineState members connected to the engine.
pub fn engine_state(world: &Microworld) -> Vec<Sym> {
    world
        .objects("attribute", ENGINE)
        .into_iter()
        .filter_map(Ground::as_sym)
        .filter(|a| *a == "EngineOn" || *a == "EngineOff")
        .cloned()
        .collect()
}

#[derive(Debug, Clone)]
pub struct IgnitionRun {
    pub trace: Trace,
    pub world: Microworld,
}

impl IgnitionRun {
    pub fn summary(&self) -> String {
        let state: Vec<String> = engine_state(&self.world).iter().map(Sym::to_string).collect();
        format!(
            "halt={} transitions={} state={}",
            self.trace.halt,
            self.trace.committed().len(),
            state.join(",")
        )
    }
}

pub fn run_ignition(
    kb: &KnowledgeBase,
    scenario: &IgnitionScenario,
    seed: u64,
    policy: ValidationPolicy,
) -> Result<IgnitionRun, ScenarioError> {
    scenario.validate()?;
    let mut world = build_ignition_world(kb)?;
    let mut engine = Engine::new(kb, ignition_probes(kb)?, policy);

    let steps = scenario
        .toggle_schedule
        .iter()
        .enumerate()
        .map(|(i, &at)| ScriptStep {
            at: Some(at),
            transition: if i % 2 == 0 {
                turn_on(ENGINE, "EngineOff", "EngineOn")
            } else {
                turn_off(ENGINE, "EngineOn", "EngineOff")
            },
        })
        .collect();
    let mut activities: Vec<Box<dyn Activity>> = vec![Box::new(ScriptActivity::new("ignition", steps))];
    if scenario.sabotage {
        let on = scenario.toggle_schedule.len() % 2 == 1;
        let (current, extra) = if on { ("EngineOn", "EngineOff") } else { ("EngineOff", "EngineOn") };
        let at = scenario.toggle_schedule.last().map_or(0, |s| s + 1);
        activities.push(Box::new(ScriptActivity::new(
            "saboteur",
            vec![ScriptStep {
                at: Some(at),
                transition: sabotage(current, extra),
            }],
        )));
    }
    let options = RunOptions {
        seed,
        ..RunOptions::default()
    };
    let trace = schedule(&mut activities, &mut world, &mut engine, &options)?;
    Ok(IgnitionRun { trace, world })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragments::shipped_kb;
    use crate::transition::{HaltReason, Outcome, ProbeKind};

    #[test]
    fn fresh_world_is_off_and_consistent() {
        let kb = shipped_kb().unwrap();
        let w = build_ignition_world(&kb).unwrap();
        assert_eq!(engine_state(&w), vec![Sym::new("EngineOff")]);
        let engine = Engine::new(&kb, ignition_probes(&kb).unwrap(), ValidationPolicy::Always);
        assert!(engine.validate(&w).unwrap().1.is_empty());
    }

    #[test]
    fn four_toggles_return_to_off() {
        let kb = shipped_kb().unwrap();
        let run = run_ignition(&kb, &IgnitionScenario::toggles(4), 0, ValidationPolicy::Always).unwrap();
        assert_eq!(run.trace.halt, HaltReason::ScheduleComplete);
        let names: Vec<String> = run.trace.committed().iter().map(Sym::to_string).collect();
        assert_eq!(names, ["TurningOnDevice", "TurningOffDevice", "TurningOnDevice", "TurningOffDevice"]);
        assert!(run.trace.records().all(|r| r.outcome == Outcome::Committed));
        assert_eq!(run.summary(), "halt=ScheduleComplete transitions=4 state=EngineOff");
    }

    #[test]
    fn zero_toggles() {
        let kb = shipped_kb().unwrap();
        let run = run_ignition(&kb, &IgnitionScenario::toggles(0), 0, ValidationPolicy::Always).unwrap();
        assert!(run.trace.entries.is_empty());
        assert_eq!(run.summary(), "halt=ScheduleComplete transitions=0 state=EngineOff");
    }

    #[test]
    fn sabotage_is_caught() {
        let kb = shipped_kb().unwrap();
        for n in [0, 1, 4] {
            let run = run_ignition(&kb, &IgnitionScenario::toggles(n).with_sabotage(), 0, ValidationPolicy::Always)
                .unwrap();
            assert_eq!(run.trace.halt, HaltReason::ConflictDetected);
            let last = &run.trace.entries.last().unwrap().record;
            assert_eq!(last.outcome, Outcome::CommittedWithConflictsHalt);
            assert_eq!(last.conflicts.len(), 1, "{:?}", last.conflicts);
            assert_eq!(last.conflicts[0].probe, ProbeKind::PartitionExclusivity);
        }
    }

    #[test]
    fn unordered_schedule_rejected() {
        let kb = shipped_kb().unwrap();
        let s = IgnitionScenario {
            toggle_schedule: vec![2, 2],
            sabotage: false,
        };
        assert!(matches!(
            run_ignition(&kb, &s, 0, ValidationPolicy::Always),
            Err(ScenarioError::Invalid(_))
        ));
    }
}
