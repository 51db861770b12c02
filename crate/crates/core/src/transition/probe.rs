//! Conflict probes run over an inferred-relationship closure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::fact::{Fact, FactPattern, Ground};
use crate::ontology::{DomainCheck, KbError, KnowledgeBase, Partition};
use crate::rules::match_patterns;
use crate::sym::Sym;

/// `(bearsAttributeOf e C)` declares that entity `e` must carry exactly one
/// member of the partition over `C`.
pub const PARTICIPATION_PREDICATE: &str = "bearsAttributeOf";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Probe {
    /// Each entity bears at most one member of the partition, and exactly one
    /// if it declares participation. `applicable` limits the check to
    /// instances of a class.
    PartitionExclusivity { partition: Sym, applicable: Option<Sym> },
    /// Every fact with a declared predicate respects its argument domains.
    DomainConformance,
    /// The two patterns must never hold together under one binding.
    MutualExclusion { first: FactPattern, second: FactPattern },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbeKind {
    PartitionExclusivity,
    DomainConformance,
    MutualExclusion,
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeKind::PartitionExclusivity => "PartitionExclusivity",
            ProbeKind::DomainConformance => "DomainConformance",
            ProbeKind::MutualExclusion => "MutualExclusion",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictReport {
    pub probe: ProbeKind,
    /// Never empty.
    pub offending_facts: Vec<Fact>,
    pub entity: Option<Sym>,
    pub tick: u64,
    pub message: String,
}

impl fmt::Display for ConflictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conflict tick={} probe={}", self.tick, self.probe)?;
        if let Some(e) = &self.entity {
            write!(f, " entity={e}")?;
        }
        write!(f, " facts=")?;
        for (i, fact) in self.offending_facts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{fact}")?;
        }
        write!(f, " message={}", self.message)
    }
}

impl Probe {
    /// Partition probe for a declared partition.
    pub fn partition(kb: &KnowledgeBase, class: &str, applicable: Option<&str>) -> Result<Probe, KbError> {
        let partition = Sym::new(class);
        kb.partition_members(&partition)?;
        Ok(Probe::PartitionExclusivity {
            partition,
            applicable: applicable.map(Sym::new),
        })
    }

    pub fn kind(&self) -> ProbeKind {
        match self {
            Probe::PartitionExclusivity { .. } => ProbeKind::PartitionExclusivity,
            Probe::DomainConformance => ProbeKind::DomainConformance,
            Probe::MutualExclusion { .. } => ProbeKind::MutualExclusion,
        }
    }

    pub fn run(&self, store: &BTreeSet<Fact>, kb: &KnowledgeBase, tick: u64) -> Vec<ConflictReport> {
        match self {
            Probe::PartitionExclusivity { partition, applicable } => match kb.partition(partition) {
                Some(p) => run_probe_partition(p, applicable.as_ref(), store, kb, tick),
                None => Vec::new(),
            },
            Probe::DomainConformance => run_probe_domains(store, kb, tick),
            Probe::MutualExclusion { first, second } => run_probe_exclusion(first, second, store, kb, tick),
        }
    }
}

/// Asserted classes per entity: `(instance e C)` facts in the store plus the
/// knowledge base's own instance assertions.
pub fn store_classes(store: &BTreeSet<Fact>) -> BTreeMap<Ground, Vec<Ground>> {
    let mut classes: BTreeMap<Ground, Vec<Ground>> = BTreeMap::new();
    for f in store.iter().filter(|f| f.pred == "instance" && f.args.len() == 2) {
        classes.entry(f.args[0].clone()).or_default().push(f.args[1].clone());
    }
    classes
}

fn classes_lookup<'a>(
    from_store: &'a BTreeMap<Ground, Vec<Ground>>,
    kb: &'a KnowledgeBase,
) -> impl Fn(&Ground) -> Vec<Ground> + 'a {
    move |g| {
        let mut out = from_store.get(g).cloned().unwrap_or_default();
        if let Ground::Sym(s) = g {
            if let Some(k) = kb.asserted_classes(s) {
                out.extend(k.iter().filter(|c| !out.contains(c)).cloned().collect::<Vec<_>>());
            }
        }
        out
    }
}

/// Exactly-one check for a single attribute partition.
pub fn run_probe_partition(
    partition: &Partition,
    applicable: Option<&Sym>,
    store: &BTreeSet<Fact>,
    kb: &KnowledgeBase,
    tick: u64,
) -> Vec<ConflictReport> {
    let mut bearing: BTreeMap<Ground, Vec<Fact>> = BTreeMap::new();
    let mut participants: BTreeSet<Ground> = BTreeSet::new();
    for f in store {
        match (f.pred.as_str(), f.args.as_slice()) {
            ("attribute", [e, Ground::Sym(a)]) if partition.contains(a) => {
                bearing.entry(e.clone()).or_default().push(f.clone());
            }
            (PARTICIPATION_PREDICATE, [e, Ground::Sym(c)]) if *c == partition.parent => {
                participants.insert(e.clone());
            }
            _ => {}
        }
    }

    let from_store = store_classes(store);
    let classes_of = classes_lookup(&from_store, kb);
    let in_scope = |e: &Ground| match applicable {
        None => true,
        Some(c) => {
            let target = Ground::Sym(c.clone());
            classes_of(e).iter().any(|k| kb.subsumes(k, &target))
        }
    };

    let entities: BTreeSet<Ground> = bearing.keys().cloned().chain(participants.iter().cloned()).collect();
    let mut reports = Vec::new();
    for e in entities.into_iter().filter(|e| in_scope(e)) {
        let facts = bearing.get(&e).cloned().unwrap_or_default();
        let declared = participants.contains(&e);
        let message = match facts.len() {
            1 => continue,
            0 if declared && partition.exhaustive => format!(
                "{e} must bear one of {} but bears none",
                partition.parent
            ),
            0 => continue,
            n => format!("{e} bears {n} mutually exclusive members of {}", partition.parent),
        };
        let offending = if facts.is_empty() {
            vec![Fact::new(
                PARTICIPATION_PREDICATE,
                vec![e.clone(), Ground::Sym(partition.parent.clone())],
            )]
        } else {
            facts
        };
        reports.push(ConflictReport {
            probe: ProbeKind::PartitionExclusivity,
            offending_facts: offending,
            entity: e.as_sym().cloned(),
            tick,
            message,
        });
    }
    reports
}

fn run_probe_domains(store: &BTreeSet<Fact>, kb: &KnowledgeBase, tick: u64) -> Vec<ConflictReport> {
    let from_store = store_classes(store);
    let classes_of = classes_lookup(&from_store, kb);
    store
        .iter()
        .filter_map(|f| match kb.check_domains_with(f, &classes_of) {
            DomainCheck::Violation(v) => {
                let actual: Vec<String> = v.actual.iter().map(Ground::to_string).collect();
                Some(ConflictReport {
                    probe: ProbeKind::DomainConformance,
                    offending_facts: vec![f.clone()],
                    entity: f.args.get(v.position - 1).and_then(Ground::as_sym).cloned(),
                    tick,
                    message: format!(
                        "DomainViolation position {} of {}: expected {}, actual [{}]",
                        v.position,
                        f.pred,
                        v.expected,
                        actual.join(" ")
                    ),
                })
            }
            _ => None,
        })
        .collect()
}

fn run_probe_exclusion(
    first: &FactPattern,
    second: &FactPattern,
    store: &BTreeSet<Fact>,
    kb: &KnowledgeBase,
    tick: u64,
) -> Vec<ConflictReport> {
    let both = [first.clone(), second.clone()];
    match_patterns(&both, store, kb)
        .into_iter()
        .map(|b| {
            let a = first.instantiate(&b).expect("matched pattern is ground");
            let c = second.instantiate(&b).expect("matched pattern is ground");
            ConflictReport {
                probe: ProbeKind::MutualExclusion,
                message: format!("{a} excludes {c}"),
                entity: a.args.first().and_then(Ground::as_sym).cloned(),
                offending_facts: vec![a, c],
                tick,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kif::parse;

    fn kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.load_str(
            "(subclass Physical Entity) (subclass Object Physical) (subclass Abstract Entity)
             (subclass Attribute Abstract) (subclass Device Object) (subclass Engine Device)
             (subclass EngineState Attribute)
             (instance EngineOn EngineState) (instance EngineOff EngineState)
             (partition EngineState EngineOn EngineOff)
             (domain attribute 1 Object) (domain attribute 2 Attribute)",
        )
        .unwrap();
        kb
    }

    fn facts(text: &str) -> BTreeSet<Fact> {
        parse(text).unwrap().iter().map(|t| Fact::from_term(t).unwrap()).collect()
    }

    fn probe() -> Probe {
        Probe::partition(&kb(), "EngineState", None).unwrap()
    }

    #[test]
    fn exactly_one_is_clean() {
        assert!(probe().run(&facts("(attribute e EngineOn)"), &kb(), 0).is_empty());
    }

    #[test]
    fn both_members_reported_once() {
        let r = probe().run(&facts("(attribute e EngineOn) (attribute e EngineOff)"), &kb(), 4);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].offending_facts.len(), 2);
        assert_eq!(r[0].entity, Some(Sym::new("e")));
        assert_eq!(r[0].tick, 4);
    }

    #[test]
    fn exhaustiveness_over_all_subsets() {
        // Oracle: a participating entity is consistent iff it bears exactly one member.
        let members = ["EngineOn", "EngineOff"];
        for mask in 0u8..4 {
            let mut store = facts("(bearsAttributeOf e EngineState)");
            let mut count = 0;
            for (i, m) in members.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    store.insert(Fact::attribute("e", m));
                    count += 1;
                }
            }
            let expected = usize::from(count != 1);
            assert_eq!(probe().run(&store, &kb(), 0).len(), expected, "mask {mask}");
        }
        // without declared participation, zero members is fine
        assert!(probe().run(&BTreeSet::new(), &kb(), 0).is_empty());
    }

    #[test]
    fn applicable_class_scopes_the_probe() {
        let kb = kb();
        let p = Probe::partition(&kb, "EngineState", Some("Engine")).unwrap();
        let store = facts("(attribute e EngineOn) (attribute e EngineOff)");
        assert!(p.run(&store, &kb, 0).is_empty());
        let mut store = store;
        store.insert(Fact::instance("e", "Engine"));
        assert_eq!(p.run(&store, &kb, 0).len(), 1);
        assert!(Probe::partition(&kb, "Nope", None).is_err());
    }

    #[test]
    fn domain_probe_uses_store_instances() {
        let kb = kb();
        let ok = facts("(instance e Engine) (attribute e EngineOn)");
        assert!(Probe::DomainConformance.run(&ok, &kb, 0).is_empty());
        let bad = facts("(instance e Engine) (attribute EngineOn e)");
        let r = Probe::DomainConformance.run(&bad, &kb, 0);
        assert_eq!(r.len(), 1);
        assert!(r[0].message.starts_with("DomainViolation position 1"));
    }

    #[test]
    fn mutual_exclusion() {
        let kb = kb();
        let p = Probe::MutualExclusion {
            first: FactPattern::from_term(&parse("(attribute ?P StrokeCombustion)").unwrap()[0]).unwrap(),
            second: FactPattern::from_term(&parse("(status exhaustValve Open)").unwrap()[0]).unwrap(),
        };
        let bad = facts("(attribute p StrokeCombustion) (status exhaustValve Open)");
        assert_eq!(p.run(&bad, &kb, 0).len(), 1);
        let ok = facts("(attribute p StrokeCombustion) (status exhaustValve Closed)");
        assert!(p.run(&ok, &kb, 0).is_empty());
    }
}
