use std::collections::{BTreeMap, BTreeSet};

use kifsim::fragments::shipped_kb;
use kifsim::{KbError, KnowledgeBase, LoadError, Sym};
use proptest::prelude::*;

/// Every simple path from `from`, by depth-first enumeration of edges.
fn reachable_by_paths(edges: &BTreeMap<Sym, BTreeSet<Sym>>, from: &Sym) -> BTreeSet<Sym> {
    fn walk(edges: &BTreeMap<Sym, BTreeSet<Sym>>, at: &Sym, path: &mut Vec<Sym>, out: &mut BTreeSet<Sym>) {
        out.insert(at.clone());
        for next in edges.get(at).into_iter().flatten() {
            if !path.contains(next) {
                path.push(next.clone());
                walk(edges, next, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(edges, from, &mut vec![from.clone()], &mut out);
    out
}

fn edge_map(kb: &KnowledgeBase) -> BTreeMap<Sym, BTreeSet<Sym>> {
    let mut edges: BTreeMap<Sym, BTreeSet<Sym>> = BTreeMap::new();
    for (child, parent) in kb.subclass_edges() {
        edges.entry(child.clone()).or_default().insert(parent.clone());
    }
    edges
}

#[test]
fn is_subclass_matches_path_enumeration() {
    let kb = shipped_kb().unwrap();
    let edges = edge_map(&kb);
    let classes: Vec<Sym> = kb.classes().cloned().collect();
    assert!(classes.len() > 40);
    for a in &classes {
        let up = reachable_by_paths(&edges, a);
        for b in &classes {
            assert_eq!(kb.is_subclass(a, b).unwrap(), up.contains(b), "{a} <= {b}");
        }
    }
}

#[test]
fn every_class_reaches_entity() {
    let kb = shipped_kb().unwrap();
    let edges = edge_map(&kb);
    let entity = Sym::new("Entity");
    for c in kb.classes() {
        assert!(reachable_by_paths(&edges, c).contains(&entity), "{c}");
    }
}

#[test]
fn two_cycle_is_rejected() {
    let mut kb = KnowledgeBase::new();
    let err = kb.load_str("(subclass A B)(subclass B A)").unwrap_err();
    assert!(matches!(err, KbError::Load(LoadError::SubclassCycle { .. })), "{err}");
}

#[test]
fn unknown_classes_are_errors() {
    let kb = shipped_kb().unwrap();
    assert!(matches!(
        kb.is_subclass(&Sym::new("Nowhere"), &Sym::new("Entity")),
        Err(KbError::UnknownTerm(_))
    ));
}

fn random_dag() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((1usize..12, 0usize..12), 0..30)
        .prop_map(|pairs| pairs.into_iter().filter(|(c, p)| p < c).collect())
}

proptest! {
    #[test]
    fn random_dags_agree_with_path_enumeration(dag in random_dag()) {
        let mut text = String::from("(subclass C0 Entity)\n");
        for i in 1..12 {
            text.push_str(&format!("(subclass C{i} C{})\n", i - 1));
        }
        for (c, p) in &dag {
            text.push_str(&format!("(subclass C{c} C{p})\n"));
        }
        let mut kb = KnowledgeBase::new();
        kb.load_str(&text).unwrap();
        let edges = edge_map(&kb);
        let classes: Vec<Sym> = kb.classes().cloned().collect();
        for a in &classes {
            let up = reachable_by_paths(&edges, a);
            for b in &classes {
                prop_assert_eq!(kb.is_subclass(a, b).unwrap(), up.contains(b));
            }
        }
    }

    #[test]
    fn back_edges_create_cycles(dag in random_dag(), lo in 0usize..11) {
        let mut text = String::from("(subclass C0 Entity)\n");
        for i in 1..12 {
            text.push_str(&format!("(subclass C{i} C{})\n", i - 1));
        }
        for (c, p) in &dag {
            text.push_str(&format!("(subclass C{c} C{p})\n"));
        }
        text.push_str(&format!("(subclass C{lo} C11)\n"));
        let mut kb = KnowledgeBase::new();
        let is_cycle = matches!(kb.load_str(&text), Err(KbError::Load(LoadError::SubclassCycle { .. })));
        prop_assert!(is_cycle);
    }
}
