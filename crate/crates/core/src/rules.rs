//! Implication rules over ground fact stores: antecedent matching,
//! consequent materialization with skolemized existentials, and the
//! inferred-relationship closure.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fact::{Binding, Fact, FactPattern, Ground, Pattern};
use crate::kif::{classify, FormulaKind, SourceSpan, Term};
use crate::ontology::KnowledgeBase;
use crate::sym::Sym;
use crate::transition::probe::{ConflictReport, Probe};

pub const DEFAULT_MAX_ROUNDS: usize = 32;
pub const SKOLEM_PREFIX: &str = "sk_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unsupported rule form: {0}")]
    UnsupportedRuleForm(String),
    #[error("rule has an empty antecedent")]
    EmptyAntecedent,
    #[error("consequent variable ?{0} is bound by neither the antecedent nor an existential")]
    UnboundVariable(Sym),
    #[error("closure did not reach a fixpoint within {0} rounds")]
    ClosureBudgetExceeded(usize),
}

/// `antecedent => exists existentials . consequent`, every pattern atomic.
#[derive(Debug, Clone, Eq)]
pub struct Rule {
    pub name: Sym,
    pub antecedent: Vec<FactPattern>,
    pub existentials: Vec<Sym>,
    pub consequent: Vec<FactPattern>,
    pub origin: SourceSpan,
}

/// Equality ignores the source span.
impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.same_body(other)
    }
}

fn atomic(t: &Term) -> Result<FactPattern, RuleError> {
    if classify(t) == FormulaKind::AtomicSentence {
        if let Some(p) = FactPattern::from_term(t) {
            return Ok(p);
        }
    }
    Err(RuleError::UnsupportedRuleForm(format!("expected an atomic sentence, found {t}")))
}

fn conjuncts(t: &Term, out: &mut Vec<FactPattern>) -> Result<(), RuleError> {
    if classify(t) == FormulaKind::Conjunction {
        for c in &t.as_list().unwrap()[1..] {
            conjuncts(c, out)?;
        }
        Ok(())
    } else {
        out.push(atomic(t)?);
        Ok(())
    }
}

fn consequent_side(t: &Term) -> Result<(Vec<Sym>, Vec<FactPattern>), RuleError> {
    let mut patterns = Vec::new();
    if classify(t) == FormulaKind::Existential {
        let items = t.as_list().unwrap();
        let vars = items[1]
            .as_list()
            .unwrap()
            .iter()
            .map(|v| match &v.kind {
                crate::kif::TermKind::Variable(name) => name.clone(),
                _ => unreachable!("classified as a variable list"),
            })
            .collect();
        conjuncts(&items[2], &mut patterns)?;
        Ok((vars, patterns))
    } else {
        conjuncts(t, &mut patterns)?;
        Ok((Vec::new(), patterns))
    }
}

impl Rule {
    /// Build a rule, enforcing a nonempty antecedent and fully bound consequent.
    pub fn new(
        name: &str,
        antecedent: Vec<FactPattern>,
        existentials: Vec<Sym>,
        consequent: Vec<FactPattern>,
        origin: SourceSpan,
    ) -> Result<Rule, RuleError> {
        if antecedent.is_empty() {
            return Err(RuleError::EmptyAntecedent);
        }
        let bound: BTreeSet<Sym> = antecedent
            .iter()
            .flat_map(FactPattern::vars)
            .chain(existentials.iter().cloned())
            .collect();
        for p in &consequent {
            if let Some(v) = p.vars().into_iter().find(|v| !bound.contains(v)) {
                return Err(RuleError::UnboundVariable(v));
            }
        }
        Ok(Rule {
            name: Sym::new(name),
            antecedent,
            existentials,
            consequent,
            origin,
        })
    }

    /// Convert an `=>`/`<=>` formula (optionally under `forall`) into rules.
    /// Names are left empty for the knowledge base to assign.
    pub fn from_formula(t: &Term) -> Result<Vec<Rule>, RuleError> {
        let items = t
            .as_list()
            .ok_or_else(|| RuleError::UnsupportedRuleForm(t.to_string()))?;
        match classify(t) {
            FormulaKind::Universal => Rule::from_formula(&items[2]),
            FormulaKind::Implication => {
                let mut antecedent = Vec::new();
                conjuncts(&items[1], &mut antecedent)?;
                let (existentials, consequent) = consequent_side(&items[2])?;
                Ok(vec![Rule::new("", antecedent, existentials, consequent, t.span)?])
            }
            FormulaKind::Biconditional => {
                let mut rules = Vec::new();
                for (lhs, rhs) in [(&items[1], &items[2]), (&items[2], &items[1])] {
                    let mut antecedent = Vec::new();
                    conjuncts(lhs, &mut antecedent)?;
                    let (existentials, consequent) = consequent_side(rhs)?;
                    rules.push(Rule::new("", antecedent, existentials, consequent, t.span)?);
                }
                Ok(rules)
            }
            _ => Err(RuleError::UnsupportedRuleForm(t.to_string())),
        }
    }

    pub fn same_body(&self, other: &Rule) -> bool {
        self.antecedent == other.antecedent
            && self.existentials == other.existentials
            && self.consequent == other.consequent
    }

    /// Class of the first `(instance ?v C)` antecedent, else its predicate.
    pub fn name_hint(&self) -> String {
        for p in &self.antecedent {
            if p.pred == "instance" {
                if let Some(Pattern::Const(Ground::Sym(c))) = p.args.get(1) {
                    return c.to_string();
                }
            }
        }
        self.antecedent[0].pred.to_string()
    }

    pub fn antecedent_vars(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        for p in &self.antecedent {
            for a in &p.args {
                a.collect_vars(&mut out);
            }
        }
        out
    }

    pub fn to_term(&self) -> Term {
        fn conj(ps: &[FactPattern]) -> Term {
            if ps.len() == 1 {
                ps[0].to_term()
            } else {
                let mut items = vec![Term::atom("and")];
                items.extend(ps.iter().map(FactPattern::to_term));
                Term::list(items)
            }
        }
        let mut rhs = conj(&self.consequent);
        if !self.existentials.is_empty() {
            let vars = Term::list(self.existentials.iter().map(|v| Term::var(v.as_str())).collect());
            rhs = Term::list(vec![Term::atom("exists"), vars, rhs]);
        }
        Term::list(vec![Term::atom("=>"), conj(&self.antecedent), rhs])
    }
}

/// Deterministic existential witnesses keyed by (rule, trigger binding).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SkolemRegistry {
    assigned: BTreeMap<(Sym, Binding), BTreeMap<Sym, Sym>>,
    counters: BTreeMap<Sym, u64>,
}

impl SkolemRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Witnesses for `rule` under `binding`, created on first use as
    /// `sk_<VAR>_<n>` with a per-variable counter.
    pub fn resolve(&mut self, rule: &Rule, binding: &Binding) -> BTreeMap<Sym, Sym> {
        if rule.existentials.is_empty() {
            return BTreeMap::new();
        }
        let key = (rule.name.clone(), binding.clone());
        if let Some(found) = self.assigned.get(&key) {
            return found.clone();
        }
        let mut witnesses = BTreeMap::new();
        for v in &rule.existentials {
            let n = self.counters.entry(v.clone()).or_insert(0);
            *n += 1;
            witnesses.insert(v.clone(), Sym::from(format!("{SKOLEM_PREFIX}{v}_{n}")));
        }
        self.assigned.insert(key, witnesses.clone());
        witnesses
    }

    pub fn lookup(&self, rule: &Sym, binding: &Binding) -> Option<&BTreeMap<Sym, Sym>> {
        self.assigned.get(&(rule.clone(), binding.clone()))
    }

    pub fn len(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }
}

/// Facts grouped by predicate, for matching.
pub struct StoreIndex<'a> {
    by_pred: BTreeMap<&'a Sym, Vec<&'a Fact>>,
}

impl<'a> StoreIndex<'a> {
    pub fn new(store: impl IntoIterator<Item = &'a Fact>) -> Self {
        let mut by_pred: BTreeMap<&'a Sym, Vec<&'a Fact>> = BTreeMap::new();
        for f in store {
            by_pred.entry(&f.pred).or_default().push(f);
        }
        StoreIndex { by_pred }
    }

    fn with_pred(&self, p: &Sym) -> &[&'a Fact] {
        self.by_pred.get(p).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn extend(
    patterns: &[FactPattern],
    index: &StoreIndex<'_>,
    kb: &KnowledgeBase,
    binding: Binding,
    out: &mut BTreeSet<Binding>,
) {
    let Some((first, rest)) = patterns.split_first() else {
        out.insert(binding);
        return;
    };
    // instance patterns with a ground class match through the taxonomy
    if first.pred == "instance" && first.args.len() == 2 {
        if let Pattern::Const(class) = first.args[1].substitute(&binding) {
            for fact in index.with_pred(&first.pred) {
                if fact.args.len() != 2 || !kb.subsumes(&fact.args[1], &class) {
                    continue;
                }
                let mut b = binding.clone();
                if first.args[0].unify(&fact.args[0], &mut b) {
                    extend(rest, index, kb, b, out);
                }
            }
            return;
        }
    }
    for fact in index.with_pred(&first.pred) {
        let mut b = binding.clone();
        if first.unify(fact, &mut b) {
            extend(rest, index, kb, b, out);
        }
    }
}

/// All bindings satisfying every antecedent pattern at once, in canonical
/// order.
pub fn match_patterns(antecedent: &[FactPattern], store: &BTreeSet<Fact>, kb: &KnowledgeBase) -> Vec<Binding> {
    match_indexed(antecedent, &StoreIndex::new(store), kb)
}

pub fn match_indexed(antecedent: &[FactPattern], index: &StoreIndex<'_>, kb: &KnowledgeBase) -> Vec<Binding> {
    let mut out = BTreeSet::new();
    extend(antecedent, index, kb, Binding::new(), &mut out);
    out.into_iter().collect()
}

/// Process id → (tick at begin, tick at end), used to flatten
/// `(BeginFn (WhenFn ?P))` / `(EndFn (WhenFn ?P))` into interval atoms.
pub type IntervalTable = BTreeMap<Sym, (u64, u64)>;

pub fn interval_atom(tick: u64) -> Sym {
    Sym::from(format!("interval-{tick}"))
}

fn flatten_intervals(g: &Ground, intervals: &IntervalTable) -> Ground {
    if let Ground::App(items) = g {
        if let [Ground::Sym(f), Ground::App(inner)] = items.as_slice() {
            if let [Ground::Sym(when), Ground::Sym(process)] = inner.as_slice() {
                if when == "WhenFn" {
                    if let Some(&(begin, end)) = intervals.get(process) {
                        match f.as_str() {
                            "BeginFn" => return Ground::Sym(interval_atom(begin)),
                            "EndFn" => return Ground::Sym(interval_atom(end)),
                            _ => {}
                        }
                    }
                }
            }
        }
        return Ground::App(items.iter().map(|i| flatten_intervals(i, intervals)).collect());
    }
    g.clone()
}

fn instantiate_consequents(
    rule: &Rule,
    binding: &Binding,
    registry: &mut SkolemRegistry,
    intervals: &IntervalTable,
) -> Result<Vec<Fact>, RuleError> {
    let mut full = binding.clone();
    for (v, id) in registry.resolve(rule, binding) {
        full.insert(v, Ground::Sym(id));
    }
    rule.consequent
        .iter()
        .map(|p| {
            let fact = p.instantiate(&full).ok_or_else(|| {
                let missing = p.vars().into_iter().find(|v| !full.contains_key(v)).unwrap();
                RuleError::UnboundVariable(missing)
            })?;
            Ok(Fact {
                pred: fact.pred,
                args: fact.args.iter().map(|a| flatten_intervals(a, intervals)).collect(),
            })
        })
        .collect()
}

/// Facts the rule adds to `store` (those already present are omitted).
pub fn apply_rule(
    rule: &Rule,
    store: &BTreeSet<Fact>,
    registry: &mut SkolemRegistry,
    kb: &KnowledgeBase,
) -> Result<BTreeSet<Fact>, RuleError> {
    apply_indexed(rule, store, &StoreIndex::new(store), registry, kb, &IntervalTable::new())
}

fn apply_indexed(
    rule: &Rule,
    store: &BTreeSet<Fact>,
    index: &StoreIndex<'_>,
    registry: &mut SkolemRegistry,
    kb: &KnowledgeBase,
    intervals: &IntervalTable,
) -> Result<BTreeSet<Fact>, RuleError> {
    let mut added = BTreeSet::new();
    for binding in match_indexed(&rule.antecedent, index, kb) {
        for fact in instantiate_consequents(rule, &binding, registry, intervals)? {
            if !store.contains(&fact) {
                added.insert(fact);
            }
        }
    }
    Ok(added)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Explicit,
    Inferred,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub facts: BTreeMap<Fact, Provenance>,
    /// Rounds that added at least one fact.
    pub rounds: usize,
}

impl Closure {
    pub fn store(&self) -> BTreeSet<Fact> {
        self.facts.keys().cloned().collect()
    }

    pub fn inferred(&self) -> impl Iterator<Item = &Fact> {
        self.facts
            .iter()
            .filter(|(_, p)| **p == Provenance::Inferred)
            .map(|(f, _)| f)
    }
}

#[derive(Debug, Clone)]
pub struct ClosureOptions<'a> {
    pub max_rounds: usize,
    pub intervals: &'a IntervalTable,
}

impl Default for ClosureOptions<'static> {
    fn default() -> Self {
        static EMPTY: IntervalTable = IntervalTable::new();
        ClosureOptions {
            max_rounds: DEFAULT_MAX_ROUNDS,
            intervals: &EMPTY,
        }
    }
}

/// Apply all rules round by round until nothing new appears. Rules run in
/// canonical (printed) order against the store as it stood at the start of
/// the round, so the result does not depend on the order `rules` is given in.
pub fn infer_closure(
    store: &BTreeSet<Fact>,
    rules: &[Rule],
    kb: &KnowledgeBase,
    registry: &mut SkolemRegistry,
    options: &ClosureOptions<'_>,
) -> Result<Closure, RuleError> {
    let mut ordered: Vec<&Rule> = rules.iter().collect();
    ordered.sort_by_cached_key(|r| (r.to_term().to_string(), r.name.clone()));

    let mut facts: BTreeMap<Fact, Provenance> =
        store.iter().map(|f| (f.clone(), Provenance::Explicit)).collect();
    let mut current = store.clone();

    for rounds in 0..options.max_rounds.max(1) {
        let index = StoreIndex::new(&current);
        let mut added = BTreeSet::new();
        for rule in &ordered {
            added.extend(apply_indexed(rule, &current, &index, registry, kb, options.intervals)?);
        }
        drop(index);
        if added.is_empty() {
            return Ok(Closure { facts, rounds });
        }
        for f in added {
            facts.entry(f.clone()).or_insert(Provenance::Inferred);
            current.insert(f);
        }
    }
    Err(RuleError::ClosureBudgetExceeded(options.max_rounds))
}

/// Run every probe over a closure store and concatenate the findings.
pub fn detect_conflicts(store: &BTreeSet<Fact>, probes: &[Probe], kb: &KnowledgeBase, tick: u64) -> Vec<ConflictReport> {
    probes.iter().flat_map(|p| p.run(store, kb, tick)).collect()
}
