use std::collections::{BTreeMap, BTreeSet};

use kifsim::fact::{Binding, Fact, FactPattern, Ground, Pattern};
use kifsim::fragments::shipped_kb;
use kifsim::rules::{match_patterns, ClosureOptions};
use kifsim::{infer_closure, KnowledgeBase, Rule, SkolemRegistry, Sym};
use proptest::prelude::*;

const ENTITIES: [&str; 4] = ["a", "b", "c", "d"];
const CLASSES: [&str; 9] = [
    "Bakery",
    "Baking",
    "TurningOnDevice",
    "TurningOffDevice",
    "GasolineEngine",
    "Oven",
    "Switch",
    "Business",
    "Process",
];
const ATTRIBUTES: [&str; 6] = ["EngineOn", "EngineOff", "DeviceOn", "DeviceOff", "Open", "Closed"];

fn fact() -> impl Strategy<Value = Fact> {
    let e = || prop::sample::select(&ENTITIES[..]);
    let attr = || prop::sample::select(&ATTRIBUTES[..]);
    prop_oneof![
        3 => (e(), prop::sample::select(&CLASSES[..])).prop_map(|(x, c)| Fact::instance(x, c)),
        2 => (e(), e()).prop_map(|(p, d)| Fact::triple("patient", p, Ground::sym(d))),
        1 => (e(), e()).prop_map(|(p, d)| Fact::triple("agent", p, Ground::sym(d))),
        2 => (e(), attr()).prop_map(|(x, a)| Fact::attribute(x, a)),
        1 => (attr(), attr()).prop_map(|(a, b)| Fact::triple("subAttribute", a, Ground::sym(b))),
    ]
}

fn store() -> impl Strategy<Value = BTreeSet<Fact>> {
    prop::collection::btree_set(fact(), 0..=20)
}

/// Subclass test by walking every subclass path, independent of the store.
struct Taxonomy {
    up: BTreeMap<Sym, BTreeSet<Sym>>,
    ranges: BTreeMap<Sym, Sym>,
}

impl Taxonomy {
    fn new(kb: &KnowledgeBase) -> Self {
        let mut edges: BTreeMap<Sym, BTreeSet<Sym>> = BTreeMap::new();
        for (c, p) in kb.subclass_edges() {
            edges.entry(c.clone()).or_default().insert(p.clone());
        }
        let mut up = BTreeMap::new();
        for c in kb.classes() {
            let mut seen = BTreeSet::new();
            let mut stack = vec![c.clone()];
            while let Some(x) = stack.pop() {
                if seen.insert(x.clone()) {
                    stack.extend(edges.get(&x).into_iter().flatten().cloned());
                }
            }
            up.insert(c.clone(), seen);
        }
        let ranges = BTreeMap::from([(Sym::new("FoodForFn"), Sym::new("Food"))]);
        Taxonomy { up, ranges }
    }

    fn subsumes(&self, sub: &Ground, sup: &Ground) -> bool {
        if sub == sup {
            return true;
        }
        let class = match sub {
            Ground::Sym(s) if self.up.contains_key(s) => s.clone(),
            Ground::App(items) => match items.first().and_then(Ground::as_sym).and_then(|f| self.ranges.get(f)) {
                Some(r) => r.clone(),
                None => return false,
            },
            _ => return false,
        };
        match sup {
            Ground::Sym(s) => self.up[&class].contains(s),
            _ => false,
        }
    }
}

fn pattern_holds(p: &FactPattern, binding: &Binding, store: &BTreeSet<Fact>, tax: &Taxonomy) -> bool {
    let Some(fact) = p.instantiate(binding) else {
        return false;
    };
    let class_is_constant = matches!(p.args.get(1), Some(Pattern::Const(_)));
    if fact.pred == "instance" && fact.args.len() == 2 && class_is_constant {
        store.iter().any(|f| {
            f.pred == "instance" && f.args.len() == 2 && f.args[0] == fact.args[0] && tax.subsumes(&f.args[1], &fact.args[1])
        })
    } else {
        store.contains(&fact)
    }
}

/// Every assignment of the rule's variables to terms in the store that
/// satisfies the whole antecedent. Variables are assigned one at a time
/// over the full domain; a pattern is tested once all its variables are set.
fn enumerate(rule: &Rule, store: &BTreeSet<Fact>, tax: &Taxonomy) -> BTreeSet<Binding> {
    let domain: BTreeSet<Ground> = store.iter().flat_map(|f| f.args.iter().cloned()).collect();
    let domain: Vec<Ground> = domain.into_iter().collect();
    let mut vars: Vec<Sym> = Vec::new();
    for p in &rule.antecedent {
        for v in p.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    // patterns grouped by the position of their last variable
    let mut due: Vec<Vec<&FactPattern>> = vec![Vec::new(); vars.len() + 1];
    for p in &rule.antecedent {
        let last = p.vars().iter().map(|v| vars.iter().position(|x| x == v).unwrap() + 1).max().unwrap_or(0);
        due[last].push(p);
    }
    let mut out = BTreeSet::new();
    if due[0].iter().all(|p| pattern_holds(p, &Binding::new(), store, tax)) {
        assign(&vars, &due, &domain, store, tax, Binding::new(), &mut out);
    }
    out
}

fn assign(
    vars: &[Sym],
    due: &[Vec<&FactPattern>],
    domain: &[Ground],
    store: &BTreeSet<Fact>,
    tax: &Taxonomy,
    binding: Binding,
    out: &mut BTreeSet<Binding>,
) {
    let i = binding.len();
    if i == vars.len() {
        out.insert(binding);
        return;
    }
    for value in domain {
        let mut b = binding.clone();
        b.insert(vars[i].clone(), value.clone());
        if due[i + 1].iter().all(|p| pattern_holds(p, &b, store, tax)) {
            assign(vars, due, domain, store, tax, b, out);
        }
    }
}

/// Naive fixpoint over enumerated matches, naming witnesses from the
/// registry the engine filled. `None` if a match has no recorded witness.
fn oracle_closure(
    start: &BTreeSet<Fact>,
    rules: &[Rule],
    tax: &Taxonomy,
    registry: &SkolemRegistry,
) -> Option<BTreeSet<Fact>> {
    let mut current = start.clone();
    loop {
        let mut next = current.clone();
        for rule in rules {
            for binding in enumerate(rule, &current, tax) {
                let mut full = binding.clone();
                if !rule.existentials.is_empty() {
                    for (v, id) in registry.lookup(&rule.name, &binding)? {
                        full.insert(v.clone(), Ground::Sym(id.clone()));
                    }
                }
                for p in &rule.consequent {
                    next.insert(p.instantiate(&full)?);
                }
            }
        }
        if next == current {
            return Some(current);
        }
        current = next;
    }
}

fn close(store: &BTreeSet<Fact>, kb: &KnowledgeBase, registry: &mut SkolemRegistry) -> BTreeSet<Fact> {
    infer_closure(store, kb.rules(), kb, registry, &ClosureOptions::default())
        .unwrap()
        .store()
}

#[test]
fn vocabulary_is_known() {
    let kb = shipped_kb().unwrap();
    for c in CLASSES {
        assert!(kb.is_class(&Sym::new(c)), "{c}");
    }
    for a in ATTRIBUTES {
        assert!(kb.knows(&Sym::new(a)), "{a}");
    }
    assert_eq!(kb.range_subclass(&Sym::new("FoodForFn")), Some(&Sym::new("Food")));
}

#[test]
fn bakery_closure_by_hand() {
    let kb = shipped_kb().unwrap();
    let mut reg = SkolemRegistry::new();
    let closed = close(&BTreeSet::from([Fact::instance("b", "Bakery")]), &kb, &mut reg);
    // 8 facts from the bakery rule, 2 from the oven rule on the new baking
    assert_eq!(closed.len(), 1 + 8 + 2);
    let ovens = closed
        .iter()
        .filter(|f| f.pred == "instance" && f.args[1] == Ground::sym("Oven"))
        .count();
    assert_eq!(ovens, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closure_agrees_with_enumeration(s in store()) {
        let kb = shipped_kb().unwrap();
        let tax = Taxonomy::new(&kb);
        let mut reg = SkolemRegistry::new();
        let closed = close(&s, &kb, &mut reg);

        prop_assert!(closed.is_superset(&s));
        let oracle = oracle_closure(&s, kb.rules(), &tax, &reg);
        prop_assert_eq!(oracle.as_ref(), Some(&closed));
        for rule in kb.rules() {
            let engine: BTreeSet<Binding> = match_patterns(&rule.antecedent, &closed, &kb).into_iter().collect();
            prop_assert_eq!(engine, enumerate(rule, &closed, &tax), "rule {}", rule.name);
        }
    }

    #[test]
    fn closure_is_idempotent(s in store()) {
        let kb = shipped_kb().unwrap();
        let mut reg = SkolemRegistry::new();
        let once = close(&s, &kb, &mut reg);
        let before = reg.clone();
        let twice = close(&once, &kb, &mut reg);
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(reg, before);
    }

    #[test]
    fn closure_is_monotone(s in store(), extra in store()) {
        let kb = shipped_kb().unwrap();
        let mut reg = SkolemRegistry::new();
        let small = close(&s, &kb, &mut reg);
        let big_input: BTreeSet<Fact> = s.union(&extra).cloned().collect();
        let big = close(&big_input, &kb, &mut reg);
        prop_assert!(big.is_superset(&small));
    }

    #[test]
    fn rule_order_does_not_matter(s in store(), rotate in 0usize..8) {
        let kb = shipped_kb().unwrap();
        let mut rules = kb.rules().to_vec();
        let n = rules.len();
        rules.rotate_left(rotate % n);
        rules.reverse();
        let a = close(&s, &kb, &mut SkolemRegistry::new());
        let b = infer_closure(&s, &rules, &kb, &mut SkolemRegistry::new(), &ClosureOptions::default())
            .unwrap()
            .store();
        prop_assert_eq!(a, b);
    }
}
