//! Generative-lexicon entries: argument and event structure, the four
//! qualia, validation against a knowledge base, compilation into rules, and
//! partonomy narrowing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::fact::{FactPattern, Pattern};
use crate::kif::{parse, ParseError, SourceSpan, Term};
use crate::ontology::KnowledgeBase;
use crate::rules::Rule;
use crate::sym::Sym;

pub const LEXENTRY: &str = "lexentry";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{span}: {message}")]
    Malformed { span: SourceSpan, message: String },
    #[error("duplicate entry for {0}")]
    DuplicateEntry(Sym),
    #[error("entry {0} has no formal quale")]
    MissingQualia(Sym),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventSort {
    State,
    Process,
    Transition,
}

impl EventSort {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "STATE" => Some(EventSort::State),
            "PROCESS" => Some(EventSort::Process),
            "TRANSITION" => Some(EventSort::Transition),
            _ => None,
        }
    }
}

impl fmt::Display for EventSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventSort::State => "STATE",
            EventSort::Process => "PROCESS",
            EventSort::Transition => "TRANSITION",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStructure {
    pub sort: EventSort,
    /// Headwords of subevent entries.
    pub subevents: Vec<Sym>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TelicMode {
    /// The entity itself performs the purpose (it is the agent).
    Direct,
    /// The entity is used to achieve it (it is the instrument).
    Indirect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Telic {
    pub process: Sym,
    pub mode: TelicMode,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qualia {
    pub formal: Option<Sym>,
    pub telic: Option<Telic>,
    pub constitutive: Vec<Sym>,
    pub agentive: Option<Sym>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEntry {
    pub headword: Sym,
    /// `(role, class)` pairs, roles named by case-role predicates.
    pub args: Vec<(Sym, Sym)>,
    pub event: EventStructure,
    pub qualia: Qualia,
    pub inherits: Vec<Sym>,
    pub span: SourceSpan,
}

fn atoms(items: &[Term], span: SourceSpan, what: &str) -> Result<Vec<Sym>, LexiconError> {
    items
        .iter()
        .map(|t| {
            t.as_atom().cloned().ok_or_else(|| LexiconError::Malformed {
                span,
                message: format!("{what} expects atoms, found {t}"),
            })
        })
        .collect()
}

impl LexicalEntry {
    /// Read one `(lexentry Head (formal ..) ...)` form.
    pub fn from_term(t: &Term) -> Result<LexicalEntry, LexiconError> {
        let span = t.span;
        let malformed = |message: String| LexiconError::Malformed { span, message };
        let items = t
            .as_list()
            .filter(|items| items[0].as_atom().is_some_and(|h| h == LEXENTRY))
            .ok_or_else(|| malformed(format!("expected a ({LEXENTRY} ...) form, found {t}")))?;
        let headword = items
            .get(1)
            .and_then(Term::as_atom)
            .cloned()
            .ok_or_else(|| malformed("lexentry needs a headword".into()))?;

        let mut qualia = Qualia::default();
        let mut args = Vec::new();
        let mut event = None;
        let mut inherits = Vec::new();
        let mut seen = BTreeSet::new();
        for section in &items[2..] {
            let Some(parts) = section.as_list() else {
                return Err(malformed(format!("expected a sublist, found {section}")));
            };
            let Some(head) = parts[0].as_atom() else {
                return Err(malformed(format!("sublist needs an atom head: {section}")));
            };
            if !seen.insert(head.clone()) {
                return Err(malformed(format!("repeated ({head} ...) in {headword}")));
            }
            let rest = &parts[1..];
            let single = |what: &str| -> Result<Sym, LexiconError> {
                match atoms(rest, span, what)?.as_slice() {
                    [one] => Ok(one.clone()),
                    _ => Err(malformed(format!("({what} ...) takes exactly one term"))),
                }
            };
            match head.as_str() {
                "formal" => qualia.formal = Some(single("formal")?),
                "agentive" => qualia.agentive = Some(single("agentive")?),
                "constitutive" => qualia.constitutive = atoms(rest, span, "constitutive")?,
                "inherits" => inherits = atoms(rest, span, "inherits")?,
                "telic" => {
                    let names = atoms(rest, span, "telic")?;
                    let (process, mode) = match names.as_slice() {
                        [p] => (p.clone(), TelicMode::Direct),
                        [p, m] if m == "direct" => (p.clone(), TelicMode::Direct),
                        [p, m] if m == "indirect" => (p.clone(), TelicMode::Indirect),
                        _ => return Err(malformed(format!("(telic Process direct|indirect) expected, found {section}"))),
                    };
                    qualia.telic = Some(Telic { process, mode });
                }
                "event" => {
                    let names = atoms(rest, span, "event")?;
                    let Some((sort, subevents)) = names.split_first() else {
                        return Err(malformed("(event ...) needs a sort".into()));
                    };
                    let sort = EventSort::parse(sort.as_str())
                        .ok_or_else(|| malformed(format!("event sort must be STATE, PROCESS or TRANSITION, found {sort}")))?;
                    event = Some(EventStructure {
                        sort,
                        subevents: subevents.to_vec(),
                    });
                }
                "args" => {
                    for a in rest {
                        match a.as_list().map(|l| atoms(l, span, "args")) {
                            Some(Ok(pair)) if pair.len() == 2 => args.push((pair[0].clone(), pair[1].clone())),
                            _ => return Err(malformed(format!("(args (role Class) ...) expected, found {a}"))),
                        }
                    }
                }
                other => return Err(malformed(format!("unknown lexentry section {other}"))),
            }
        }
        let event = event.ok_or_else(|| malformed(format!("{headword} has no (event ...) section")))?;
        Ok(LexicalEntry {
            headword,
            args,
            event,
            qualia,
            inherits,
            span,
        })
    }

    pub fn to_term(&self) -> Term {
        let atom = |s: &Sym| Term::atom(s.as_str());
        let section = |head: &str, rest: Vec<Term>| {
            let mut items = vec![Term::atom(head)];
            items.extend(rest);
            Term::list(items)
        };
        let mut items = vec![Term::atom(LEXENTRY), atom(&self.headword)];
        if let Some(f) = &self.qualia.formal {
            items.push(section("formal", vec![atom(f)]));
        }
        if let Some(t) = &self.qualia.telic {
            let mode = match t.mode {
                TelicMode::Direct => "direct",
                TelicMode::Indirect => "indirect",
            };
            items.push(section("telic", vec![atom(&t.process), Term::atom(mode)]));
        }
        if !self.qualia.constitutive.is_empty() {
            items.push(section("constitutive", self.qualia.constitutive.iter().map(atom).collect()));
        }
        if let Some(a) = &self.qualia.agentive {
            items.push(section("agentive", vec![atom(a)]));
        }
        let mut ev = vec![Term::atom(&self.event.sort.to_string())];
        ev.extend(self.event.subevents.iter().map(atom));
        items.push(section("event", ev));
        if !self.args.is_empty() {
            items.push(section(
                "args",
                self.args
                    .iter()
                    .map(|(r, c)| Term::list(vec![atom(r), atom(c)]))
                    .collect(),
            ));
        }
        if !self.inherits.is_empty() {
            items.push(section("inherits", self.inherits.iter().map(atom).collect()));
        }
        Term::list(items)
    }
}

/// Entries by headword, in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<LexicalEntry>,
    index: BTreeMap<Sym, usize>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for form in parse(text)? {
            lex.insert(LexicalEntry::from_term(&form)?)?;
        }
        Ok(lex)
    }

    pub fn insert(&mut self, e: LexicalEntry) -> Result<(), LexiconError> {
        if self.index.contains_key(&e.headword) {
            return Err(LexiconError::DuplicateEntry(e.headword));
        }
        self.index.insert(e.headword.clone(), self.entries.len());
        self.entries.push(e);
        Ok(())
    }

    pub fn get(&self, headword: &str) -> Option<&LexicalEntry> {
        self.index.get(headword).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    /// Violations per entry; entries that validate clean are omitted.
    pub fn validate(&self, kb: &KnowledgeBase) -> Vec<(Sym, Vec<LexiconViolation>)> {
        self.entries
            .iter()
            .map(|e| (e.headword.clone(), validate_entry(e, kb, self)))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconViolation {
    UnknownTerm { term: Sym, section: &'static str },
    NotAClass { term: Sym, section: &'static str },
    TelicNotProcess(Sym),
    ConstitutiveWithoutObject { formal: Option<Sym> },
    MissingParent(Sym),
    MissingSubevent(Sym),
}

impl fmt::Display for LexiconViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconViolation::UnknownTerm { term, section } => write!(f, "unknown term {term} in {section}"),
            LexiconViolation::NotAClass { term, section } => write!(f, "{term} in {section} is not a class"),
            LexiconViolation::TelicNotProcess(t) => write!(f, "telic {t} is not a Process"),
            LexiconViolation::ConstitutiveWithoutObject { formal: Some(c) } => {
                write!(f, "constitutive parts require a physical object, but formal {c} is not an Object")
            }
            LexiconViolation::ConstitutiveWithoutObject { formal: None } => {
                write!(f, "constitutive parts require a formal quale")
            }
            LexiconViolation::MissingParent(p) => write!(f, "inherited entry {p} does not exist"),
            LexiconViolation::MissingSubevent(s) => write!(f, "subevent entry {s} does not exist"),
        }
    }
}

fn subclass_of(kb: &KnowledgeBase, c: &Sym, root: &str) -> bool {
    kb.is_subclass(c, &Sym::new(root)).unwrap_or(false)
}

/// Check an entry's references against the knowledge base and lexicon.
pub fn validate_entry(e: &LexicalEntry, kb: &KnowledgeBase, lexicon: &Lexicon) -> Vec<LexiconViolation> {
    let mut out = Vec::new();
    // Some(true) when the term is a known class
    let class = |term: &Sym, section: &'static str, out: &mut Vec<LexiconViolation>| -> Option<bool> {
        if !kb.knows(term) {
            out.push(LexiconViolation::UnknownTerm {
                term: term.clone(),
                section,
            });
            return None;
        }
        if !kb.is_class(term) {
            out.push(LexiconViolation::NotAClass {
                term: term.clone(),
                section,
            });
            return Some(false);
        }
        Some(true)
    };

    class(&e.headword, "headword", &mut out);
    let formal_ok = match &e.qualia.formal {
        Some(f) => class(f, "formal", &mut out),
        None => Some(false),
    };
    if let Some(t) = &e.qualia.telic {
        if class(&t.process, "telic", &mut out) == Some(true) && !subclass_of(kb, &t.process, "Process") {
            out.push(LexiconViolation::TelicNotProcess(t.process.clone()));
        }
    }
    for p in &e.qualia.constitutive {
        class(p, "constitutive", &mut out);
    }
    if !e.qualia.constitutive.is_empty() && formal_ok.is_some() {
        let physical = e
            .qualia
            .formal
            .as_ref()
            .is_some_and(|f| subclass_of(kb, f, "Object"));
        if !physical {
            out.push(LexiconViolation::ConstitutiveWithoutObject {
                formal: e.qualia.formal.clone(),
            });
        }
    }
    if let Some(a) = &e.qualia.agentive {
        class(a, "agentive", &mut out);
    }
    for (role, c) in &e.args {
        if !kb.knows(role) {
            out.push(LexiconViolation::UnknownTerm {
                term: role.clone(),
                section: "args",
            });
        }
        class(c, "args", &mut out);
    }
    for p in &e.inherits {
        if lexicon.get(p.as_str()).is_none() {
            out.push(LexiconViolation::MissingParent(p.clone()));
        }
    }
    for s in &e.event.subevents {
        if lexicon.get(s.as_str()).is_none() {
            out.push(LexiconViolation::MissingSubevent(s.clone()));
        }
    }
    out
}

/// Compile an entry's qualia into a rule triggered by `(instance ?X Head)`.
pub fn entry_to_rule(e: &LexicalEntry) -> Result<Rule, LexiconError> {
    let formal = e
        .qualia
        .formal
        .as_ref()
        .ok_or_else(|| LexiconError::MissingQualia(e.headword.clone()))?;
    let x = || Pattern::var("X");
    let c = |s: &Sym| Pattern::Const(s.into());
    let mut existentials = Vec::new();
    let mut consequent = vec![FactPattern::new("instance", vec![x(), c(formal)])];

    if let Some(t) = &e.qualia.telic {
        existentials.push(Sym::new("TELIC"));
        consequent.push(FactPattern::new("instance", vec![Pattern::var("TELIC"), c(&t.process)]));
        let role = match t.mode {
            TelicMode::Direct => "agent",
            TelicMode::Indirect => "instrument",
        };
        consequent.push(FactPattern::new(role, vec![Pattern::var("TELIC"), x()]));
    }
    for (i, part) in e.qualia.constitutive.iter().enumerate() {
        let v = format!("PART{}", i + 1);
        existentials.push(Sym::from(v.clone()));
        consequent.push(FactPattern::new("instance", vec![Pattern::var(&v), c(part)]));
        consequent.push(FactPattern::new("part", vec![Pattern::var(&v), x()]));
    }
    if let Some(a) = &e.qualia.agentive {
        existentials.push(Sym::new("ORIGIN"));
        consequent.push(FactPattern::new("instance", vec![Pattern::var("ORIGIN"), c(a)]));
        consequent.push(FactPattern::new("result", vec![Pattern::var("ORIGIN"), x()]));
    }

    let antecedent = vec![FactPattern::new("instance", vec![x(), c(&e.headword)])];
    Rule::new(
        &format!("lex-{}", e.headword),
        antecedent,
        existentials,
        consequent,
        e.span,
    )
    .map_err(|err| LexiconError::Malformed {
        span: e.span,
        message: err.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartonomyError {
    #[error("unknown class {0}")]
    UnknownClass(Sym),
    #[error("{0} appears under more than one parent")]
    SharedChild(Sym),
    #[error("no class lists {0} as a distinguishing part")]
    UnknownPart(Sym),
}

pub const DISTINGUISHING_PART: &str = "distinguishingPart";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartonomyNode {
    pub class: Sym,
    pub distinguishing_parts: BTreeSet<Sym>,
    pub children: Vec<PartonomyNode>,
}

/// Taxonomy tree annotated with the parts that distinguish each class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partonomy {
    pub root: PartonomyNode,
    /// class -> parts listed on it or any ancestor within the tree
    inherited: BTreeMap<Sym, BTreeSet<Sym>>,
}

impl Partonomy {
    /// Tree of `root` and its subclasses, with parts taken from
    /// `(distinguishingPart Class Part)` facts.
    pub fn from_kb(kb: &KnowledgeBase, root: &str) -> Result<Partonomy, PartonomyError> {
        let root = Sym::new(root);
        if !kb.is_class(&root) {
            return Err(PartonomyError::UnknownClass(root));
        }
        let mut parts: BTreeMap<Sym, BTreeSet<Sym>> = BTreeMap::new();
        for f in kb.facts().iter().filter(|f| f.pred == DISTINGUISHING_PART) {
            if let [c, p] = f.args.as_slice() {
                if let (Some(c), Some(p)) = (c.as_sym(), p.as_sym()) {
                    parts.entry(c.clone()).or_default().insert(p.clone());
                }
            }
        }
        let mut seen = BTreeSet::new();
        let root = build(kb, &root, &parts, &mut seen)?;
        Ok(Partonomy::new(root))
    }

    pub fn new(root: PartonomyNode) -> Partonomy {
        let mut inherited = BTreeMap::new();
        fn walk(n: &PartonomyNode, above: &BTreeSet<Sym>, out: &mut BTreeMap<Sym, BTreeSet<Sym>>) {
            let mut here = above.clone();
            here.extend(n.distinguishing_parts.iter().cloned());
            for c in &n.children {
                walk(c, &here, out);
            }
            out.insert(n.class.clone(), here);
        }
        walk(&root, &BTreeSet::new(), &mut inherited);
        Partonomy { root, inherited }
    }

    pub fn classes(&self) -> BTreeSet<Sym> {
        self.inherited.keys().cloned().collect()
    }

    /// Parts listed on `class` or any of its ancestors.
    pub fn inherited_parts(&self, class: &str) -> Option<&BTreeSet<Sym>> {
        self.inherited.get(class)
    }

    pub fn knows_part(&self, part: &str) -> bool {
        self.inherited.values().any(|ps| ps.contains(part))
    }

    /// Classes in the subtree rooted at `class`, itself included.
    pub fn descendants(&self, class: &str) -> BTreeSet<Sym> {
        fn find<'a>(n: &'a PartonomyNode, class: &str) -> Option<&'a PartonomyNode> {
            if n.class == class {
                return Some(n);
            }
            n.children.iter().find_map(|c| find(c, class))
        }
        fn collect(n: &PartonomyNode, out: &mut BTreeSet<Sym>) {
            out.insert(n.class.clone());
            n.children.iter().for_each(|c| collect(c, out));
        }
        let mut out = BTreeSet::new();
        if let Some(n) = find(&self.root, class) {
            collect(n, &mut out);
        }
        out
    }
}

fn build(
    kb: &KnowledgeBase,
    class: &Sym,
    parts: &BTreeMap<Sym, BTreeSet<Sym>>,
    seen: &mut BTreeSet<Sym>,
) -> Result<PartonomyNode, PartonomyError> {
    if !seen.insert(class.clone()) {
        return Err(PartonomyError::SharedChild(class.clone()));
    }
    let children = kb
        .direct_subclasses(class)
        .iter()
        .map(|c| build(kb, c, parts, seen))
        .collect::<Result<_, _>>()?;
    Ok(PartonomyNode {
        class: class.clone(),
        distinguishing_parts: parts.get(class).cloned().unwrap_or_default(),
        children,
    })
}

/// Keep the candidates that carry `part` themselves or through an ancestor.
pub fn narrow(candidates: &BTreeSet<Sym>, part: &str, partonomy: &Partonomy) -> Result<BTreeSet<Sym>, PartonomyError> {
    if !partonomy.knows_part(part) {
        return Err(PartonomyError::UnknownPart(Sym::new(part)));
    }
    Ok(candidates
        .iter()
        .filter(|c| {
            partonomy
                .inherited_parts(c.as_str())
                .is_some_and(|ps| ps.contains(part))
        })
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const KB: &str = "
        (subclass Physical Entity) (subclass Object Physical) (subclass Process Physical)
        (subclass Abstract Entity) (subclass Attribute Abstract)
        (subclass Agent Object) (subclass Organization Agent) (subclass Business Organization)
        (subclass Bakery Business) (subclass Device Object) (subclass Oven Device)
        (subclass Selling Process) (subclass Constructing Process)
        (instance Red Attribute)
        (domain agent 1 Process) (domain agent 2 Agent)";

    fn kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        kb.load_str(KB).unwrap();
        kb
    }

    const BAKERY: &str = "(lexentry Bakery (formal Business) (telic Selling direct) (constitutive Oven) (agentive Constructing) (event PROCESS) (args (agent Organization)))";

    fn entry(text: &str) -> LexicalEntry {
        LexicalEntry::from_term(&parse(text).unwrap()[0]).unwrap()
    }

    fn violations(text: &str) -> Vec<LexiconViolation> {
        let e = entry(text);
        let mut lex = Lexicon::default();
        lex.insert(e.clone()).unwrap();
        validate_entry(&e, &kb(), &lex)
    }

    #[test]
    fn parses_all_sections() {
        let e = entry(BAKERY);
        assert_eq!(e.headword, "Bakery");
        assert_eq!(e.qualia.formal.as_ref().unwrap(), "Business");
        assert_eq!(e.qualia.telic.as_ref().unwrap().mode, TelicMode::Direct);
        assert_eq!(e.qualia.constitutive, vec![Sym::new("Oven")]);
        assert_eq!(e.event.sort, EventSort::Process);
        assert_eq!(e.args, vec![(Sym::new("agent"), Sym::new("Organization"))]);
        let mut back = LexicalEntry::from_term(&e.to_term()).unwrap();
        back.span = e.span;
        assert_eq!(back, e);
    }

    #[test]
    fn rejects_bad_forms() {
        for bad in [
            "(lexentry Bakery (formal Business))",
            "(lexentry Bakery (event EVENTUALLY))",
            "(lexentry Bakery (event STATE) (event STATE))",
            "(lexentry Bakery (event STATE) (colour Red))",
            "(lexentry Bakery (event STATE) (telic Selling sideways))",
            "(entry Bakery)",
        ] {
            assert!(LexicalEntry::from_term(&parse(bad).unwrap()[0]).is_err(), "{bad}");
        }
    }

    #[test]
    fn bakery_validates_clean() {
        assert_eq!(violations(BAKERY), vec![]);
    }

    #[test]
    fn one_violation_per_fault() {
        let unknown = violations("(lexentry Bakery (formal Business) (telic Pastry direct) (event PROCESS))");
        assert_eq!(unknown.len(), 1, "{unknown:?}");
        let not_process = violations("(lexentry Bakery (formal Business) (telic Oven direct) (event PROCESS))");
        assert_eq!(not_process, vec![LexiconViolation::TelicNotProcess(Sym::new("Oven"))]);
        let attr_parts = violations("(lexentry Bakery (formal Attribute) (constitutive Oven) (event STATE))");
        assert_eq!(attr_parts.len(), 1);
        let not_class = violations("(lexentry Bakery (formal Red) (event STATE))");
        assert!(matches!(not_class[..], [LexiconViolation::NotAClass { .. }]));
        let orphan = violations("(lexentry Bakery (formal Business) (inherits Shop) (event PROCESS Open))");
        assert_eq!(orphan.len(), 2);
    }

    #[test]
    fn bakery_rule_shape() {
        let r = entry_to_rule(&entry(BAKERY)).unwrap();
        let printed = r.to_term().to_string();
        assert!(printed.contains("(instance ?TELIC Selling)"), "{printed}");
        assert!(printed.contains("(agent ?TELIC ?X)"), "{printed}");
        assert!(printed.contains("(part ?PART1 ?X)"), "{printed}");
        assert_eq!(r.existentials.len(), 3);

        let bare = entry_to_rule(&entry("(lexentry Oven (formal Device) (event STATE))")).unwrap();
        assert_eq!(bare.consequent.len(), 1);
        assert!(bare.existentials.is_empty());
        assert_eq!(
            entry_to_rule(&entry("(lexentry Oven (event STATE))")),
            Err(LexiconError::MissingQualia(Sym::new("Oven")))
        );
    }

    fn vehicles() -> Partonomy {
        let mut kb = KnowledgeBase::new();
        kb.load_str(
            "(subclass Vehicle Entity) (subclass Motor Vehicle) (subclass Gas Motor) (subclass Electric Motor)
             (subclass Bike Vehicle) (distinguishingPart Motor Wheel) (distinguishingPart Gas Plug)
             (distinguishingPart Electric Battery) (distinguishingPart Bike Pedal)",
        )
        .unwrap();
        Partonomy::from_kb(&kb, "Vehicle").unwrap()
    }

    #[test]
    fn narrowing_chain() {
        let p = vehicles();
        let all = p.classes();
        let motors = narrow(&all, "Wheel", &p).unwrap();
        assert_eq!(motors, p.descendants("Motor"));
        let gas = narrow(&motors, "Plug", &p).unwrap();
        assert_eq!(gas, BTreeSet::from([Sym::new("Gas")]));
        assert_eq!(narrow(&gas, "Wheel", &p).unwrap(), gas);
        assert_eq!(narrow(&all, "Sail", &p), Err(PartonomyError::UnknownPart(Sym::new("Sail"))));
    }

    #[test]
    fn shared_children_rejected() {
        let mut kb = KnowledgeBase::new();
        kb.load_str("(subclass A Entity) (subclass B A) (subclass C A) (subclass D B) (subclass D C)")
            .unwrap();
        assert_eq!(Partonomy::from_kb(&kb, "A"), Err(PartonomyError::SharedChild(Sym::new("D"))));
    }
}
