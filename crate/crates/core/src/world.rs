//! The simulation frame: registered entities, regions, the explicit
//! relationship store, assemblies, system boundaries and resources.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fact::{Fact, Ground};
use crate::ontology::{DomainCheck, DomainViolation, KnowledgeBase};
use crate::rules::IntervalTable;
use crate::sym::Sym;

/// Reserved entity carrying microworld-wide properties.
pub const WORLD_ENTITY: &str = "theMicroworld";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("entity {0} already exists")]
    DuplicateEntity(Sym),
    #[error("unknown class {0}")]
    UnknownClass(Sym),
    #[error("unknown entity {0}")]
    UnknownEntity(Sym),
    #[error("unknown region {0}")]
    UnknownRegion(Sym),
    #[error("domain violation in {fact}: argument {} expected {}", violation.position, violation.expected)]
    DomainViolation { fact: Fact, violation: DomainViolation },
    #[error("no explicit triple {0}")]
    MissingTriple(Fact),
    #[error("{0} is inferred and cannot be removed directly")]
    CannotRemoveInferred(Fact),
    #[error("insufficient {resource}: have {have}, want {want}")]
    InsufficientResource { resource: Sym, have: u64, want: u64 },
    #[error("invalid assembly {whole}: {reason}")]
    InvalidAssembly { whole: Sym, reason: String },
    #[error("invalid system boundary {system}: {reason}")]
    InvalidSystem { system: Sym, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemBoundary {
    pub system: Sym,
    pub inputs: BTreeSet<Sym>,
    pub outputs: BTreeSet<Sym>,
}

#[derive(Debug, Clone)]
pub struct Microworld {
    pub id: Sym,
    tick: u64,
    regions: BTreeSet<Sym>,
    entity_region: BTreeMap<Sym, Sym>,
    entities: BTreeMap<Sym, BTreeSet<Sym>>,
    explicit: BTreeSet<Fact>,
    inferred: BTreeSet<Fact>,
    /// Facts describing the most recent transition (its process instance
    /// and interval attributes); replaced on every commit.
    events: BTreeSet<Fact>,
    intervals: IntervalTable,
    assemblies: BTreeMap<Sym, BTreeSet<Sym>>,
    whole_of: BTreeMap<Sym, Sym>,
    systems: BTreeMap<Sym, SystemBoundary>,
    resources: BTreeMap<Sym, u64>,
    snapshot_seq: u64,
}

/// Structural equality; snapshot labels are ignored.
impl PartialEq for Microworld {
    fn eq(&self, o: &Self) -> bool {
        self.id == o.id
            && self.tick == o.tick
            && self.regions == o.regions
            && self.entity_region == o.entity_region
            && self.entities == o.entities
            && self.explicit == o.explicit
            && self.inferred == o.inferred
            && self.events == o.events
            && self.intervals == o.intervals
            && self.assemblies == o.assemblies
            && self.systems == o.systems
            && self.resources == o.resources
    }
}

impl Eq for Microworld {}

/// Immutable world copy labelled with the tick and a sequence number.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub tick: u64,
    pub seq: u64,
    pub world: Microworld,
}

impl PartialEq for Snapshot {
    fn eq(&self, o: &Self) -> bool {
        self.world == o.world
    }
}

impl Eq for Snapshot {}

impl Microworld {
    pub fn new(id: &str) -> Self {
        Microworld {
            id: Sym::new(id),
            tick: 0,
            regions: BTreeSet::new(),
            entity_region: BTreeMap::new(),
            entities: BTreeMap::new(),
            explicit: BTreeSet::new(),
            inferred: BTreeSet::new(),
            events: BTreeSet::new(),
            intervals: IntervalTable::new(),
            assemblies: BTreeMap::new(),
            whole_of: BTreeMap::new(),
            systems: BTreeMap::new(),
            resources: BTreeMap::new(),
            snapshot_seq: 0,
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn add_region(&mut self, region: &str) {
        self.regions.insert(Sym::new(region));
    }

    pub fn regions(&self) -> &BTreeSet<Sym> {
        &self.regions
    }

    pub fn region_of(&self, entity: &str) -> Option<&Sym> {
        self.entity_region.get(entity)
    }

    pub fn is_registered(&self, entity: &str) -> bool {
        self.entities.contains_key(entity)
    }

    pub fn entities(&self) -> impl Iterator<Item = (&Sym, &BTreeSet<Sym>)> {
        self.entities.iter()
    }

    pub fn classes_of(&self, entity: &str) -> Option<&BTreeSet<Sym>> {
        self.entities.get(entity)
    }

    /// Asserted classes of a fact argument: world registrations first, then
    /// the knowledge base's own instance assertions.
    pub fn arg_classes(&self, g: &Ground, kb: &KnowledgeBase) -> Vec<Ground> {
        let mut out = Vec::new();
        if let Ground::Sym(s) = g {
            if let Some(cs) = self.entities.get(s) {
                out.extend(cs.iter().cloned().map(Ground::Sym));
            }
            if let Some(cs) = kb.asserted_classes(s) {
                out.extend(cs.iter().cloned());
            }
        }
        out
    }

    fn check(&self, fact: &Fact, kb: &KnowledgeBase) -> Result<(), WorldError> {
        match kb.check_domains_with(fact, |g| self.arg_classes(g, kb)) {
            DomainCheck::Violation(violation) => Err(WorldError::DomainViolation {
                fact: fact.clone(),
                violation,
            }),
            _ => Ok(()),
        }
    }

    /// Register `id` as an instance of `class` located in `region`.
    pub fn instantiate(&mut self, class: &str, id: &str, region: &str, kb: &KnowledgeBase) -> Result<(), WorldError> {
        let class = Sym::new(class);
        if self.entities.contains_key(id) {
            return Err(WorldError::DuplicateEntity(Sym::new(id)));
        }
        if !kb.is_class(&class) {
            return Err(WorldError::UnknownClass(class));
        }
        if !self.regions.contains(region) {
            return Err(WorldError::UnknownRegion(Sym::new(region)));
        }
        let fact = Fact::instance(id, class.as_str());
        self.check(&fact, kb)?;
        let id = Sym::new(id);
        self.entities.entry(id.clone()).or_default().insert(class);
        self.entity_region.insert(id, Sym::new(region));
        self.explicit.insert(fact);
        Ok(())
    }

    /// Add the explicit triple `(pred subj obj)`.
    pub fn connect(&mut self, pred: &str, subj: &str, obj: impl Into<Ground>, kb: &KnowledgeBase) -> Result<(), WorldError> {
        self.connect_fact(Fact::triple(pred, subj, obj), kb)
    }

    /// Add an explicit fact. The subject must be a registered entity; symbol
    /// arguments must be registered or known to the knowledge base.
    pub fn connect_fact(&mut self, fact: Fact, kb: &KnowledgeBase) -> Result<(), WorldError> {
        if self.explicit.contains(&fact) {
            return Ok(());
        }
        match fact.subject() {
            Some(Ground::Sym(s)) if self.entities.contains_key(s) => {}
            Some(Ground::Sym(s)) => return Err(WorldError::UnknownEntity(s.clone())),
            Some(other) => return Err(WorldError::UnknownEntity(Sym::from(other.to_string()))),
            None => return Err(WorldError::UnknownEntity(fact.pred.clone())),
        }
        for arg in &fact.args[1..] {
            if let Ground::Sym(s) = arg {
                if !self.entities.contains_key(s) && !kb.knows(s) {
                    return Err(WorldError::UnknownEntity(s.clone()));
                }
            }
        }
        self.check(&fact, kb)?;
        self.explicit.insert(fact);
        Ok(())
    }

    pub fn disconnect(&mut self, pred: &str, subj: &str, obj: impl Into<Ground>) -> Result<(), WorldError> {
        self.disconnect_fact(&Fact::triple(pred, subj, obj))
    }

    pub fn disconnect_fact(&mut self, fact: &Fact) -> Result<(), WorldError> {
        if self.explicit.remove(fact) {
            return Ok(());
        }
        if self.inferred.contains(fact) {
            return Err(WorldError::CannotRemoveInferred(fact.clone()));
        }
        Err(WorldError::MissingTriple(fact.clone()))
    }

    pub fn has(&self, fact: &Fact) -> bool {
        self.explicit.contains(fact) || self.inferred.contains(fact)
    }

    pub fn explicit(&self) -> &BTreeSet<Fact> {
        &self.explicit
    }

    pub fn inferred(&self) -> &BTreeSet<Fact> {
        &self.inferred
    }

    pub fn events(&self) -> &BTreeSet<Fact> {
        &self.events
    }

    pub fn intervals(&self) -> &IntervalTable {
        &self.intervals
    }

    /// Explicit facts plus the current transition's event facts.
    pub fn closure_input(&self) -> BTreeSet<Fact> {
        self.explicit.union(&self.events).cloned().collect()
    }

    /// Objects of explicit `(pred subj _)` facts.
    pub fn objects(&self, pred: &str, subj: &str) -> Vec<&Ground> {
        self.explicit
            .iter()
            .filter(|f| f.pred == pred && f.args.len() == 2 && f.args[0] == Ground::sym(subj))
            .map(|f| &f.args[1])
            .collect()
    }

    /// Group `parts` under `whole`; parts relocate to the whole's region.
    pub fn add_assembly(&mut self, whole: &str, parts: &[&str]) -> Result<(), WorldError> {
        let w = Sym::new(whole);
        let invalid = |reason: String| WorldError::InvalidAssembly {
            whole: w.clone(),
            reason,
        };
        if !self.entities.contains_key(whole) {
            return Err(WorldError::UnknownEntity(w.clone()));
        }
        if parts.is_empty() {
            return Err(invalid("no parts".into()));
        }
        for p in parts {
            if !self.entities.contains_key(*p) {
                return Err(WorldError::UnknownEntity(Sym::new(p)));
            }
            if *p == whole {
                return Err(invalid(format!("{whole} cannot be its own part")));
            }
            if let Some(other) = self.whole_of.get(*p) {
                if other != whole {
                    return Err(invalid(format!("{p} is already part of {other}")));
                }
            }
            if self.transitive_parts(p).contains(whole) {
                return Err(invalid(format!("{p} contains {whole}")));
            }
        }
        for p in parts {
            self.whole_of.insert(Sym::new(p), w.clone());
            self.assemblies.entry(w.clone()).or_default().insert(Sym::new(p));
        }
        if let Some(r) = self.entity_region.get(whole).cloned() {
            for p in self.transitive_parts(whole) {
                self.entity_region.insert(p, r.clone());
            }
        }
        Ok(())
    }

    pub fn assemblies(&self) -> &BTreeMap<Sym, BTreeSet<Sym>> {
        &self.assemblies
    }

    /// Every direct and nested part of `whole`.
    pub fn transitive_parts(&self, whole: &str) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        let mut stack = vec![Sym::new(whole)];
        while let Some(w) = stack.pop() {
            for p in self.assemblies.get(&w).into_iter().flatten() {
                if out.insert(p.clone()) {
                    stack.push(p.clone());
                }
            }
        }
        out
    }

    /// Outermost whole that `entity` belongs to, or `entity` itself.
    pub fn root_of(&self, entity: &str) -> Sym {
        let mut at = Sym::new(entity);
        while let Some(w) = self.whole_of.get(&at) {
            at = w.clone();
        }
        at
    }

    /// Relocate `entity` together with all of its parts. A part cannot
    /// leave its whole, so moving a part moves the outermost assembly
    /// containing it.
    pub fn move_entity(&mut self, entity: &str, region: &str) -> Result<(), WorldError> {
        if !self.entities.contains_key(entity) {
            return Err(WorldError::UnknownEntity(Sym::new(entity)));
        }
        let Some(r) = self.regions.get(region).cloned() else {
            return Err(WorldError::UnknownRegion(Sym::new(region)));
        };
        let root = self.root_of(entity);
        for p in self.transitive_parts(root.as_str()) {
            self.entity_region.insert(p, r.clone());
        }
        self.entity_region.insert(root, r);
        Ok(())
    }

    pub fn add_system(&mut self, system: &str, inputs: &[&str], outputs: &[&str]) -> Result<(), WorldError> {
        let s = Sym::new(system);
        if !self.entities.contains_key(system) {
            return Err(WorldError::UnknownEntity(s));
        }
        let inputs: BTreeSet<Sym> = inputs.iter().map(|i| Sym::new(i)).collect();
        let outputs: BTreeSet<Sym> = outputs.iter().map(|o| Sym::new(o)).collect();
        if let Some(both) = inputs.intersection(&outputs).next() {
            return Err(WorldError::InvalidSystem {
                system: s,
                reason: format!("{both} is both input and output"),
            });
        }
        self.systems.insert(s.clone(), SystemBoundary { system: s, inputs, outputs });
        Ok(())
    }

    pub fn system(&self, system: &str) -> Option<&SystemBoundary> {
        self.systems.get(system)
    }

    pub fn set_resource(&mut self, resource: &str, amount: u64) {
        self.resources.insert(Sym::new(resource), amount);
    }

    pub fn resource(&self, resource: &str) -> u64 {
        self.resources.get(resource).copied().unwrap_or(0)
    }

    pub fn resources(&self) -> &BTreeMap<Sym, u64> {
        &self.resources
    }

    pub fn consume(&mut self, resource: &str, amount: u64) -> Result<(), WorldError> {
        let have = self.resource(resource);
        if have < amount {
            return Err(WorldError::InsufficientResource {
                resource: Sym::new(resource),
                have,
                want: amount,
            });
        }
        if amount > 0 {
            self.resources.insert(Sym::new(resource), have - amount);
        }
        Ok(())
    }

    pub fn produce(&mut self, resource: &str, amount: u64) {
        *self.resources.entry(Sym::new(resource)).or_insert(0) += amount;
    }

    /// Record a microworld-wide property as a fact on the reserved world entity.
    pub fn set_world_property(&mut self, pred: &str, value: impl Into<Ground>) {
        self.explicit.insert(Fact::triple(pred, WORLD_ENTITY, value));
    }

    pub fn snapshot(&mut self) -> Snapshot {
        self.snapshot_seq += 1;
        Snapshot {
            tick: self.tick,
            seq: self.snapshot_seq,
            world: self.clone(),
        }
    }

    pub(crate) fn advance_tick(&mut self) -> u64 {
        self.tick += 1;
        self.tick
    }

    pub(crate) fn set_events(&mut self, events: BTreeSet<Fact>, process: Option<(Sym, (u64, u64))>) {
        self.events = events;
        if let Some((p, span)) = process {
            self.intervals.insert(p, span);
        }
    }

    pub(crate) fn set_inferred(&mut self, inferred: BTreeSet<Fact>) {
        self.inferred = inferred;
    }
}
