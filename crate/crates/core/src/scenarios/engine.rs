use std::fmt;

use crate::fact::{Fact, FactPattern, Ground, Pattern};
use crate::ontology::KnowledgeBase;
use crate::transition::probe::PARTICIPATION_PREDICATE;
use crate::transition::{
    schedule, Activity, Engine, Guard, HaltReason, Outcome, Poll, Probe, RunOptions, ScriptActivity, ScriptStep,
    Trace, Transition, TransitionRecord, ValidationPolicy, Wait,
};
use crate::world::{Microworld, WorldError};

use super::ignition::{turn_off, turn_on};
use super::ScenarioError;

pub const ENGINE: &str = "thisGasEngine";
pub const PISTON: &str = "piston";
pub const SWITCH: &str = "ignitionSwitch";
pub const INTAKE_VALVE: &str = "intakeValve";
pub const EXHAUST_VALVE: &str = "exhaustValve";
pub const CRANKSHAFT: &str = "crankshaft";
pub const FUEL: &str = "Gasoline";
pub const EXHAUST: &str = "Exhaust";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stroke {
    Intake,
    Compression,
    Combustion,
    Exhaust,
}

impl Stroke {
    pub const CYCLE: [Stroke; 4] = [Stroke::Intake, Stroke::Compression, Stroke::Combustion, Stroke::Exhaust];

    pub fn next(self) -> Stroke {
        match self {
            Stroke::Intake => Stroke::Compression,
            Stroke::Compression => Stroke::Combustion,
            Stroke::Combustion => Stroke::Exhaust,
            Stroke::Exhaust => Stroke::Intake,
        }
    }

    pub fn previous(self) -> Stroke {
        match self {
            Stroke::Intake => Stroke::Exhaust,
            Stroke::Compression => Stroke::Intake,
            Stroke::Combustion => Stroke::Compression,
            Stroke::Exhaust => Stroke::Combustion,
        }
    }

    /// Piston phase attribute reached by this stroke.
    pub fn phase(self) -> &'static str {
        match self {
            Stroke::Intake => "StrokeIntake",
            Stroke::Compression => "StrokeCompression",
            Stroke::Combustion => "StrokeCombustion",
            Stroke::Exhaust => "StrokeExhaust",
        }
    }

    pub fn transition_name(self) -> &'static str {
        match self {
            Stroke::Intake => "IntakeStroke",
            Stroke::Compression => "CompressionStroke",
            Stroke::Combustion => "SparkAndCombustion",
            Stroke::Exhaust => "ExhaustStroke",
        }
    }

    pub fn from_transition(name: &str) -> Option<Stroke> {
        Stroke::CYCLE.into_iter().find(|s| s.transition_name() == name)
    }
}

impl fmt::Display for Stroke {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.transition_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineScenario {
    pub initial_fuel: u64,
    pub switch_off_at_step: Option<u64>,
    pub seed: u64,
    pub max_steps: u64,
    pub policy: ValidationPolicy,
    /// Strokes the piston requests, repeated; one pass is one cycle.
    pub plan: Vec<Stroke>,
    pub capture_states: bool,
}

impl EngineScenario {
    pub fn new(initial_fuel: u64, seed: u64) -> Self {
        EngineScenario {
            initial_fuel,
            switch_off_at_step: None,
            seed,
            max_steps: 10_000,
            policy: ValidationPolicy::Always,
            plan: Stroke::CYCLE.to_vec(),
            capture_states: false,
        }
    }

    pub fn switch_off_at(mut self, step: u64) -> Self {
        self.switch_off_at_step = Some(step);
        self
    }

    pub fn policy(mut self, policy: ValidationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.max_steps < 1 {
            return Err(ScenarioError::Invalid("max steps must be at least 1".into()));
        }
        if self.plan.is_empty() {
            return Err(ScenarioError::Invalid("stroke plan is empty".into()));
        }
        Ok(())
    }
}

/// Engine with its piston assembly, valves, spark plug, crankshaft and an
/// ignition switch that starts off.
pub fn build_engine_world(kb: &KnowledgeBase, fuel: u64) -> Result<Microworld, WorldError> {
    let mut w = Microworld::new("fourStrokeEngine");
    w.add_region("engineBay");
    w.add_region("workshop");
    for (class, id) in [
        ("GasolineEngine", ENGINE),
        ("Piston", PISTON),
        ("PistonHead", "pistonHead"),
        ("PistonRod", "pistonRod"),
        ("IntakeValve", INTAKE_VALVE),
        ("ExhaustValve", EXHAUST_VALVE),
        ("SparkPlug", "sparkPlug"),
        ("Crankshaft", CRANKSHAFT),
        ("IgnitionSwitch", SWITCH),
    ] {
        w.instantiate(class, id, "engineBay", kb)?;
    }
    w.add_assembly(PISTON, &["pistonHead", "pistonRod"])?;
    w.add_assembly(ENGINE, &[PISTON, INTAKE_VALVE, EXHAUST_VALVE, "sparkPlug", CRANKSHAFT])?;
    w.add_system(ENGINE, &[FUEL], &[EXHAUST])?;
    w.set_resource(FUEL, fuel);
    w.set_resource(EXHAUST, 0);

    w.connect("attribute", SWITCH, "DeviceOff", kb)?;
    w.connect(PARTICIPATION_PREDICATE, SWITCH, "DeviceStateAttribute", kb)?;
    w.connect("attribute", PISTON, Stroke::Exhaust.phase(), kb)?;
    w.connect(PARTICIPATION_PREDICATE, PISTON, "PistonPhase", kb)?;
    w.connect("attribute", INTAKE_VALVE, "Closed", kb)?;
    w.connect("attribute", EXHAUST_VALVE, "Open", kb)?;
    for v in [INTAKE_VALVE, EXHAUST_VALVE] {
        w.connect(PARTICIPATION_PREDICATE, v, "ValvePosition", kb)?;
    }
    w.connect("rotations", CRANKSHAFT, Ground::int(0), kb)?;
    Ok(w)
}

pub fn engine_probes(kb: &KnowledgeBase) -> Result<Vec<Probe>, ScenarioError> {
    Ok(vec![
        Probe::partition(kb, "DeviceStateAttribute", Some("Switch"))?,
        Probe::partition(kb, "PistonPhase", Some("Piston"))?,
        Probe::partition(kb, "ValvePosition", Some("Valve"))?,
        Probe::MutualExclusion {
            first: FactPattern::new("attribute", vec![Pattern::var("P"), Pattern::sym("StrokeCombustion")]),
            second: FactPattern::new("attribute", vec![Pattern::sym(EXHAUST_VALVE), Pattern::sym("Open")]),
        },
        Probe::DomainConformance,
    ])
}

pub fn rotations(world: &Microworld) -> i64 {
    world
        .objects("rotations", CRANKSHAFT)
        .into_iter()
        .find_map(|g| match g {
            Ground::Num(d) => d.as_i64(),
            _ => None,
        })
        .unwrap_or(0)
}

pub fn piston_at(world: &Microworld, phase: &str) -> bool {
    world.has(&Fact::attribute(PISTON, phase))
}

/// The transition for `stroke` against the current world.
pub fn stroke_transition(stroke: Stroke, world: &Microworld) -> Transition {
    let from = stroke.previous().phase();
    let to = stroke.phase();
    let t = Transition::new(stroke.transition_name());
    let t = match stroke {
        Stroke::Combustion => t.guard(Guard::check("pistonAt StrokeCompression", |w| {
            piston_at(w, "StrokeCompression")
        })),
        _ => t.guard(Guard::present("attribute", PISTON, from)),
    };
    let t = t
        .replace("attribute", PISTON, from, to)
        .begin(PISTON, from)
        .end(PISTON, to);
    match stroke {
        Stroke::Intake => t
            .guard(Guard::ResourceAtLeast(FUEL.into(), 1))
            .replace("attribute", INTAKE_VALVE, "Closed", "Open")
            .replace("attribute", EXHAUST_VALVE, "Open", "Closed")
            .consume(FUEL, 1),
        Stroke::Compression => t.replace("attribute", INTAKE_VALVE, "Open", "Closed"),
        Stroke::Combustion => {
            let n = rotations(world);
            t.replace("rotations", CRANKSHAFT, Ground::int(n), Ground::int(n + 1))
        }
        Stroke::Exhaust => t
            .replace("attribute", EXHAUST_VALVE, "Closed", "Open")
            .produce(EXHAUST, 1),
    }
}

/// Runs the stroke plan once ignition is on, checking fuel and the switch
/// at the start of every cycle.
#[derive(Debug, Clone)]
pub struct PistonActivity {
    plan: Vec<Stroke>,
    next: usize,
    started: bool,
}

impl PistonActivity {
    pub fn new(plan: Vec<Stroke>) -> Self {
        PistonActivity {
            plan,
            next: 0,
            started: false,
        }
    }
}

impl Activity for PistonActivity {
    fn name(&self) -> &str {
        "piston"
    }

    fn poll(&self, world: &Microworld, _step: u64) -> Poll {
        if !self.started {
            return Poll::Blocked(Wait::Condition);
        }
        let i = self.next % self.plan.len();
        if i == 0 {
            if world.resource(FUEL) < 1 {
                return Poll::Halt(HaltReason::FuelExhausted);
            }
            if !world.has(&Fact::attribute(SWITCH, "DeviceOn")) {
                return Poll::Halt(HaltReason::SwitchOff);
            }
        }
        Poll::Ready(stroke_transition(self.plan[i], world))
    }

    fn on_record(&mut self, record: &TransitionRecord, own: bool) {
        if own {
            self.next += 1;
        } else if record.transition == "TurningOnDevice" && record.outcome == Outcome::Committed {
            self.started = true;
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineRun {
    pub trace: Trace,
    pub world: Microworld,
}

impl EngineRun {
    /// Completed cycles: committed exhaust strokes.
    pub fn cycles(&self) -> usize {
        self.strokes().iter().filter(|s| **s == Stroke::Exhaust).count()
    }

    /// Committed strokes in commit order.
    pub fn strokes(&self) -> Vec<Stroke> {
        self.trace
            .records()
            .filter(|r| r.committed())
            .filter_map(|r| Stroke::from_transition(r.transition.as_str()))
            .collect()
    }

    pub fn fuel_remaining(&self) -> u64 {
        self.world.resource(FUEL)
    }

    pub fn summary(&self) -> String {
        format!(
            "halt={} cycles={} fuel_remaining={}",
            self.trace.halt,
            self.cycles(),
            self.fuel_remaining()
        )
    }
}

pub fn run_engine(kb: &KnowledgeBase, s: &EngineScenario) -> Result<EngineRun, ScenarioError> {
    s.validate()?;
    let mut world = build_engine_world(kb, s.initial_fuel)?;
    let mut engine = Engine::new(kb, engine_probes(kb)?, s.policy);

    let mut ignition = vec![ScriptStep {
        at: None,
        transition: turn_on(SWITCH, "DeviceOff", "DeviceOn"),
    }];
    if let Some(at) = s.switch_off_at_step {
        ignition.push(ScriptStep {
            at: Some(at),
            transition: turn_off(SWITCH, "DeviceOn", "DeviceOff"),
        });
    }
    let mut activities: Vec<Box<dyn Activity>> = vec![
        Box::new(ScriptActivity::new("ignition", ignition)),
        Box::new(PistonActivity::new(s.plan.clone())),
    ];
    let options = RunOptions {
        seed: s.seed,
        max_steps: s.max_steps,
        capture_states: s.capture_states,
    };
    let trace = schedule(&mut activities, &mut world, &mut engine, &options)?;
    Ok(EngineRun { trace, world })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragments::shipped_kb;

    #[test]
    fn world_layout() {
        let kb = shipped_kb().unwrap();
        let mut w = build_engine_world(&kb, 3).unwrap();
        assert_eq!(w.resource(FUEL), 3);
        let sys = w.system(ENGINE).unwrap();
        assert!(sys.inputs.contains(FUEL) && sys.outputs.contains(EXHAUST));
        w.move_entity(ENGINE, "workshop").unwrap();
        for e in [ENGINE, PISTON, "pistonHead", "pistonRod", INTAKE_VALVE, CRANKSHAFT] {
            assert_eq!(w.region_of(e).unwrap(), "workshop");
        }
        assert_eq!(w.region_of(SWITCH).unwrap(), "engineBay");
        let engine = Engine::new(&kb, engine_probes(&kb).unwrap(), ValidationPolicy::Always);
        assert_eq!(engine.validate(&w).unwrap().1, vec![]);
    }

    #[test]
    fn three_units_of_fuel_make_three_cycles() {
        let kb = shipped_kb().unwrap();
        let run = run_engine(&kb, &EngineScenario::new(3, 7)).unwrap();
        assert_eq!(run.summary(), "halt=FuelExhausted cycles=3 fuel_remaining=0");
        assert_eq!(run.strokes(), Stroke::CYCLE.repeat(3));
        assert_eq!(rotations(&run.world), 3);
        assert_eq!(run.world.resource(EXHAUST), 3);
    }

    #[test]
    fn no_fuel_no_strokes() {
        let kb = shipped_kb().unwrap();
        let run = run_engine(&kb, &EngineScenario::new(0, 0)).unwrap();
        assert_eq!(run.summary(), "halt=FuelExhausted cycles=0 fuel_remaining=0");
        assert!(run.strokes().is_empty());
    }

    #[test]
    fn switch_off_stops_at_cycle_start() {
        let kb = shipped_kb().unwrap();
        let run = run_engine(&kb, &EngineScenario::new(10, 1).switch_off_at(9)).unwrap();
        assert_eq!(run.trace.halt, HaltReason::SwitchOff);
        assert_eq!(run.strokes().len() % 4, 0);
        assert!(run.cycles() < 10);
    }

    #[test]
    fn spark_only_from_compression() {
        let kb = shipped_kb().unwrap();
        for phase in Stroke::CYCLE {
            let mut w = build_engine_world(&kb, 1).unwrap();
            w.disconnect("attribute", PISTON, Stroke::Exhaust.phase()).unwrap();
            w.connect("attribute", PISTON, phase.phase(), &kb).unwrap();
            let mut e = Engine::new(&kb, vec![], ValidationPolicy::Always);
            let t = stroke_transition(Stroke::Combustion, &w);
            let r = e.fire(&t, &mut w, "piston").unwrap();
            let expect = if phase == Stroke::Compression {
                Outcome::Committed
            } else {
                Outcome::RejectedGuards
            };
            assert_eq!(r.outcome, expect, "{phase:?}");
        }
    }
}
