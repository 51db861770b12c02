//! Knowledge base built from parsed axioms: class taxonomy, instance
//! assertions, predicate domains, attribute partitions, documentation and the
//! separated rule set.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::fact::{Fact, Ground};
use crate::kif::{classify, parse, FormulaKind, ParseError, SourceSpan, Term, TermKind};
use crate::rules::{Rule, RuleError};
use crate::sym::Sym;

pub const ENTITY: &str = "Entity";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("subclass cycle: {}", path.iter().map(Sym::as_str).collect::<Vec<_>>().join(" -> "))]
    SubclassCycle { path: Vec<Sym> },
    #[error("{span}: predicate {predicate} takes {expected} arguments, found {found}")]
    ArityMismatch {
        predicate: Sym,
        span: SourceSpan,
        expected: usize,
        found: usize,
    },
    #[error("class {class} already has a different partition")]
    DuplicatePartition { class: Sym },
    #[error("{span}: {message}")]
    Malformed { span: SourceSpan, message: String },
    #[error("{span}: {source}")]
    Rule { span: SourceSpan, source: RuleError },
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("unknown term {0}")]
    UnknownTerm(Sym),
    #[error("no partition declared for {0}")]
    NoPartition(Sym),
    #[error("parse error at {}: {source}", source.span())]
    Parse {
        #[from]
        source: ParseError,
    },
    #[error(transparent)]
    Load(#[from] LoadError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: Sym,
    pub arity: usize,
    /// Expected class per argument position; `None` until declared.
    pub domains: Vec<Option<Sym>>,
}

impl PredicateDecl {
    pub fn is_complete(&self) -> bool {
        self.domains.iter().all(Option::is_some)
    }
}

/// Mutually exclusive attribute instances under one parent class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub parent: Sym,
    pub members: Vec<Sym>,
    pub disjoint: bool,
    pub exhaustive: bool,
}

impl Partition {
    pub fn contains(&self, attr: &Sym) -> bool {
        self.members.contains(attr)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainViolation {
    /// 1-based argument position.
    pub position: usize,
    pub expected: Sym,
    pub actual: Vec<Ground>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainCheck {
    Ok,
    /// The predicate has no domain declaration; nothing was checked.
    Undeclared,
    Violation(DomainViolation),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    /// child -> direct parents
    subclass_edges: BTreeMap<Sym, BTreeSet<Sym>>,
    classes: BTreeSet<Sym>,
    instance_of: BTreeMap<Sym, BTreeSet<Ground>>,
    predicates: BTreeMap<Sym, PredicateDecl>,
    partitions: BTreeMap<Sym, Partition>,
    range_subclass: BTreeMap<Sym, Sym>,
    subrelations: BTreeMap<Sym, BTreeSet<Sym>>,
    rules: Vec<Rule>,
    documentation: BTreeMap<Sym, String>,
    facts: BTreeSet<Fact>,
    fact_spans: BTreeMap<Fact, SourceSpan>,
    warnings: Vec<String>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        let mut kb = KnowledgeBase::default();
        kb.classes.insert(Sym::new(ENTITY));
        kb
    }

    /// Parse and load KIF text.
    pub fn load_str(&mut self, text: &str) -> Result<(), KbError> {
        let forms = parse(text)?;
        self.load(&forms)?;
        Ok(())
    }

    /// Interpret top-level forms. Either every form loads or the knowledge
    /// base is left untouched.
    pub fn load(&mut self, forms: &[Term]) -> Result<(), LoadError> {
        let mut next = self.clone();
        for form in forms {
            next.load_form(form)?;
        }
        next.check_arities()?;
        *self = next;
        Ok(())
    }

    fn load_form(&mut self, form: &Term) -> Result<(), LoadError> {
        match classify(form) {
            FormulaKind::Implication | FormulaKind::Biconditional | FormulaKind::Universal => {
                let rules = Rule::from_formula(form).map_err(|source| LoadError::Rule {
                    span: form.span,
                    source,
                })?;
                for rule in rules {
                    self.add_rule(rule);
                }
                Ok(())
            }
            FormulaKind::Conjunction => {
                for conjunct in &form.as_list().unwrap()[1..] {
                    self.load_form(conjunct)?;
                }
                Ok(())
            }
            FormulaKind::AtomicSentence if form.as_list().is_some() => self.load_atomic(form),
            _ => {
                self.warnings
                    .push(format!("{}: skipped unsupported top-level form {}", form.span, form));
                Ok(())
            }
        }
    }

    fn load_atomic(&mut self, form: &Term) -> Result<(), LoadError> {
        let items = form.as_list().unwrap();
        let head = items[0].as_atom().unwrap().as_str();
        let args = &items[1..];
        let malformed = |message: &str| LoadError::Malformed {
            span: form.span,
            message: format!("{message}: {form}"),
        };

        if !form.is_ground() {
            self.warnings
                .push(format!("{}: skipped non-ground sentence {form}", form.span));
            return Ok(());
        }

        match head {
            "subclass" => {
                let [a, b] = args else { return Err(malformed("subclass takes 2 arguments")) };
                let (Some(a), Some(b)) = (a.as_atom(), b.as_atom()) else {
                    return Err(malformed("subclass arguments must be atoms"));
                };
                self.add_subclass(a.clone(), b.clone())
            }
            "instance" => {
                let [e, c] = args else { return Err(malformed("instance takes 2 arguments")) };
                let Some(e) = e.as_atom() else {
                    return Err(malformed("instance subject must be an atom"));
                };
                let class = Ground::from_term(c).unwrap();
                if let Ground::Sym(c) = &class {
                    self.classes.insert(c.clone());
                }
                self.instance_of.entry(e.clone()).or_default().insert(class);
                Ok(())
            }
            "domain" => {
                let [p, n, c] = args else { return Err(malformed("domain takes 3 arguments")) };
                let (Some(p), Some(c)) = (p.as_atom(), c.as_atom()) else {
                    return Err(malformed("domain predicate and class must be atoms"));
                };
                let position = match &n.kind {
                    TermKind::Number(d) => d.as_i64().filter(|&v| v >= 1),
                    _ => None,
                };
                let Some(position) = position else {
                    return Err(malformed("domain position must be a positive integer"));
                };
                let position = position as usize;
                let decl = self.predicates.entry(p.clone()).or_insert_with(|| PredicateDecl {
                    name: p.clone(),
                    arity: 0,
                    domains: Vec::new(),
                });
                if decl.domains.len() < position {
                    decl.domains.resize(position, None);
                    decl.arity = position;
                }
                match &decl.domains[position - 1] {
                    Some(existing) if existing != c => {
                        return Err(malformed("conflicting domain declaration"));
                    }
                    _ => decl.domains[position - 1] = Some(c.clone()),
                }
                self.classes.insert(c.clone());
                Ok(())
            }
            "partition" | "disjointDecomposition" => {
                let Some((parent, members)) = args.split_first() else {
                    return Err(malformed("partition needs a class"));
                };
                let Some(parent) = parent.as_atom() else {
                    return Err(malformed("partition class must be an atom"));
                };
                let members: Vec<Sym> = members
                    .iter()
                    .map(|m| m.as_atom().cloned())
                    .collect::<Option<_>>()
                    .ok_or_else(|| malformed("partition members must be atoms"))?;
                let distinct: BTreeSet<&Sym> = members.iter().collect();
                if members.len() < 2 || distinct.len() != members.len() {
                    return Err(malformed("partition needs at least two distinct members"));
                }
                let partition = Partition {
                    parent: parent.clone(),
                    members,
                    disjoint: true,
                    exhaustive: head == "partition",
                };
                match self.partitions.get(parent) {
                    Some(existing) if *existing != partition => {
                        Err(LoadError::DuplicatePartition { class: parent.clone() })
                    }
                    _ => {
                        self.classes.insert(parent.clone());
                        self.partitions.insert(parent.clone(), partition);
                        Ok(())
                    }
                }
            }
            "documentation" => {
                let (term, text) = match args {
                    [t, s] | [t, _, s] => (t, s),
                    _ => return Err(malformed("documentation takes a term and a string")),
                };
                let (Some(term), TermKind::Str(text)) = (term.as_atom(), &text.kind) else {
                    return Err(malformed("documentation takes a term and a string"));
                };
                self.documentation.insert(term.clone(), text.clone());
                Ok(())
            }
            "rangeSubclass" => {
                let [f, c] = args else { return Err(malformed("rangeSubclass takes 2 arguments")) };
                let (Some(f), Some(c)) = (f.as_atom(), c.as_atom()) else {
                    return Err(malformed("rangeSubclass arguments must be atoms"));
                };
                self.range_subclass.insert(f.clone(), c.clone());
                Ok(())
            }
            "subrelation" => {
                let [p, q] = args else { return Err(malformed("subrelation takes 2 arguments")) };
                let (Some(p), Some(q)) = (p.as_atom(), q.as_atom()) else {
                    return Err(malformed("subrelation arguments must be atoms"));
                };
                self.subrelations.entry(p.clone()).or_default().insert(q.clone());
                Ok(())
            }
            _ => {
                let fact = Fact::from_term(form).unwrap();
                if !self.facts.contains(&fact) {
                    if !self.predicates.contains_key(&fact.pred) {
                        self.warnings.push(format!(
                            "{}: predicate {} has no domain declaration; stored {fact} as an opaque fact",
                            form.span, fact.pred
                        ));
                    }
                    self.fact_spans.insert(fact.clone(), form.span);
                    self.facts.insert(fact);
                }
                Ok(())
            }
        }
    }

    fn add_subclass(&mut self, child: Sym, parent: Sym) -> Result<(), LoadError> {
        if child == parent || self.reaches(&parent, &child) {
            let mut path = self.path(&parent, &child).unwrap_or_else(|| vec![parent.clone()]);
            path.insert(0, child.clone());
            return Err(LoadError::SubclassCycle { path });
        }
        self.classes.insert(child.clone());
        self.classes.insert(parent.clone());
        self.subclass_edges.entry(child).or_default().insert(parent);
        Ok(())
    }

    fn add_rule(&mut self, mut rule: Rule) {
        if self.rules.iter().any(|r| r.same_body(&rule)) {
            return;
        }
        let base = rule.name_hint();
        let mut name = base.clone();
        let mut n = 2;
        while self.rules.iter().any(|r| r.name.as_str() == name) {
            name = format!("{base}-{n}");
            n += 1;
        }
        rule.name = Sym::from(name);
        self.rules.push(rule);
    }

    fn check_arities(&self) -> Result<(), LoadError> {
        for fact in &self.facts {
            if let Some(decl) = self.predicates.get(&fact.pred) {
                if decl.is_complete() && decl.arity != fact.args.len() {
                    return Err(LoadError::ArityMismatch {
                        predicate: fact.pred.clone(),
                        span: self.fact_spans.get(fact).copied().unwrap_or_default(),
                        expected: decl.arity,
                        found: fact.args.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Directed reachability over subclass edges (reflexive).
    fn reaches(&self, from: &Sym, to: &Sym) -> bool {
        self.path(from, to).is_some()
    }

    fn path(&self, from: &Sym, to: &Sym) -> Option<Vec<Sym>> {
        let mut prev: BTreeMap<Sym, Sym> = BTreeMap::new();
        let mut queue = VecDeque::from([from.clone()]);
        let mut seen = BTreeSet::from([from.clone()]);
        while let Some(node) = queue.pop_front() {
            if &node == to {
                let mut path = vec![node.clone()];
                let mut cur = node;
                while let Some(p) = prev.get(&cur) {
                    path.push(p.clone());
                    cur = p.clone();
                }
                path.reverse();
                return Some(path);
            }
            for parent in self.subclass_edges.get(&node).into_iter().flatten() {
                if seen.insert(parent.clone()) {
                    prev.insert(parent.clone(), node.clone());
                    queue.push_back(parent.clone());
                }
            }
        }
        None
    }

    pub fn is_class(&self, s: &Sym) -> bool {
        self.classes.contains(s)
    }

    /// Any term the knowledge base has seen: classes, instances, predicates.
    pub fn knows(&self, s: &Sym) -> bool {
        self.classes.contains(s)
            || self.instance_of.contains_key(s)
            || self.predicates.contains_key(s)
            || self.range_subclass.contains_key(s)
    }

    fn known_class_term(&self, g: &Ground) -> Option<Sym> {
        match g {
            Ground::Sym(s) if self.classes.contains(s) => Some(s.clone()),
            Ground::App(items) => items
                .first()
                .and_then(Ground::as_sym)
                .and_then(|f| self.range_subclass.get(f))
                .cloned(),
            _ => None,
        }
    }

    /// Reflexive-transitive subclass test.
    pub fn is_subclass(&self, a: &Sym, b: &Sym) -> Result<bool, KbError> {
        for t in [a, b] {
            if !self.classes.contains(t) {
                return Err(KbError::UnknownTerm(t.clone()));
            }
        }
        Ok(self.reaches(a, b))
    }

    /// Subclass test over class terms that may be function terms such as
    /// `(FoodForFn Human)`, which stand under their declared range class.
    pub fn is_subclass_term(&self, a: &Ground, b: &Ground) -> Result<bool, KbError> {
        if a == b {
            return Ok(true);
        }
        let unknown = |g: &Ground| KbError::UnknownTerm(Sym::from(g.to_string()));
        let a_class = self.known_class_term(a).ok_or_else(|| unknown(a))?;
        let b_class = match b {
            Ground::Sym(s) if self.classes.contains(s) => s.clone(),
            _ => return Err(unknown(b)),
        };
        Ok(self.reaches(&a_class, &b_class))
    }

    /// `is_subclass_term`, falling back to literal equality for unknown terms.
    pub fn subsumes(&self, sub: &Ground, sup: &Ground) -> bool {
        self.is_subclass_term(sub, sup).unwrap_or(sub == sup)
    }

    pub fn asserted_classes(&self, e: &Sym) -> Option<&BTreeSet<Ground>> {
        self.instance_of.get(e)
    }

    pub fn is_instance_of(&self, e: &Sym, c: &Sym) -> Result<bool, KbError> {
        let classes = self
            .instance_of
            .get(e)
            .ok_or_else(|| KbError::UnknownTerm(e.clone()))?;
        if !self.classes.contains(c) {
            return Err(KbError::UnknownTerm(c.clone()));
        }
        let target = Ground::Sym(c.clone());
        Ok(classes.iter().any(|k| self.subsumes(k, &target)))
    }

    pub fn predicate(&self, p: &Sym) -> Option<&PredicateDecl> {
        self.predicates.get(p)
    }

    /// Domain check using only this knowledge base's instance assertions.
    pub fn check_domains(&self, fact: &Fact) -> DomainCheck {
        self.check_domains_with(fact, |g| match g {
            Ground::Sym(s) => self.instance_of.get(s).map(|c| c.iter().cloned().collect()).unwrap_or_default(),
            _ => Vec::new(),
        })
    }

    /// Domain check where `classes_of` supplies the asserted classes of each
    /// argument (microworld entities, closure-generated entities, ...).
    pub fn check_domains_with(&self, fact: &Fact, classes_of: impl Fn(&Ground) -> Vec<Ground>) -> DomainCheck {
        let Some(decl) = self.predicates.get(&fact.pred) else {
            return DomainCheck::Undeclared;
        };
        for (i, (arg, domain)) in fact.args.iter().zip(&decl.domains).enumerate() {
            let Some(expected) = domain else { continue };
            let actual = classes_of(arg);
            let target = Ground::Sym(expected.clone());
            if !actual.iter().any(|c| self.subsumes(c, &target)) {
                return DomainCheck::Violation(DomainViolation {
                    position: i + 1,
                    expected: expected.clone(),
                    actual,
                });
            }
        }
        DomainCheck::Ok
    }

    pub fn partition(&self, c: &Sym) -> Option<&Partition> {
        self.partitions.get(c)
    }

    pub fn partition_members(&self, c: &Sym) -> Result<BTreeSet<Sym>, KbError> {
        self.partitions
            .get(c)
            .map(|p| p.members.iter().cloned().collect())
            .ok_or_else(|| KbError::NoPartition(c.clone()))
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.partitions.values()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn documentation(&self, t: &Sym) -> Option<&str> {
        self.documentation.get(t).map(String::as_str)
    }

    pub fn classes(&self) -> impl Iterator<Item = &Sym> {
        self.classes.iter()
    }

    pub fn subclass_edges(&self) -> impl Iterator<Item = (&Sym, &Sym)> {
        self.subclass_edges
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c, p)))
    }

    pub fn direct_subclasses(&self, parent: &Sym) -> BTreeSet<Sym> {
        self.subclass_edges
            .iter()
            .filter(|(_, ps)| ps.contains(parent))
            .map(|(c, _)| c.clone())
            .collect()
    }

    pub fn range_subclass(&self, f: &Sym) -> Option<&Sym> {
        self.range_subclass.get(f)
    }

    pub fn subrelations(&self, p: &Sym) -> Option<&BTreeSet<Sym>> {
        self.subrelations.get(p)
    }

    /// Opaque ground facts (predicates without special load handling).
    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    /// All ground facts: instance assertions plus opaque facts.
    pub fn ground_facts(&self) -> BTreeSet<Fact> {
        let mut out = self.facts.clone();
        for (e, classes) in &self.instance_of {
            for c in classes {
                out.insert(Fact::new("instance", vec![Ground::Sym(e.clone()), c.clone()]));
            }
        }
        out
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Functional form of [`KnowledgeBase::load`].
pub fn load_axioms(forms: &[Term], kb: &KnowledgeBase) -> Result<KnowledgeBase, LoadError> {
    let mut next = kb.clone();
    next.load(forms)?;
    Ok(next)
}
