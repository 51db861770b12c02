//! Ground facts and fact patterns: the variable-free and variable-bearing
//! forms that the knowledge base, rule engine and microworld exchange.

use std::collections::BTreeMap;
use std::fmt;

use crate::kif::{Decimal, Term, TermKind};
use crate::sym::Sym;

/// A variable-free term appearing as a fact argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ground {
    Sym(Sym),
    Num(Decimal),
    Str(String),
    /// Function term such as `(FoodForFn Human)`; never empty.
    App(Vec<Ground>),
}

impl Ground {
    pub fn sym(name: &str) -> Self {
        Ground::Sym(Sym::new(name))
    }

    pub fn int(v: i64) -> Self {
        Ground::Num(Decimal::from_int(v))
    }

    pub fn as_sym(&self) -> Option<&Sym> {
        match self {
            Ground::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn from_term(t: &Term) -> Option<Ground> {
        Some(match &t.kind {
            TermKind::Atom(s) => Ground::Sym(s.clone()),
            TermKind::Variable(_) => return None,
            TermKind::Number(d) => Ground::Num(*d),
            TermKind::Str(s) => Ground::Str(s.clone()),
            TermKind::Compound(items) => {
                Ground::App(items.iter().map(Ground::from_term).collect::<Option<_>>()?)
            }
        })
    }

    pub fn to_term(&self) -> Term {
        match self {
            Ground::Sym(s) => Term::atom(s.as_str()),
            Ground::Num(d) => Term::number(*d),
            Ground::Str(s) => Term::string(s),
            Ground::App(items) => Term::list(items.iter().map(Ground::to_term).collect()),
        }
    }

    /// Visit this term and every nested subterm.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Ground)) {
        visit(self);
        if let Ground::App(items) = self {
            for i in items {
                i.walk(visit);
            }
        }
    }
}

impl From<Sym> for Ground {
    fn from(s: Sym) -> Self {
        Ground::Sym(s)
    }
}

impl From<&Sym> for Ground {
    fn from(s: &Sym) -> Self {
        Ground::Sym(s.clone())
    }
}

impl From<&str> for Ground {
    fn from(s: &str) -> Self {
        Ground::sym(s)
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// A ground atomic sentence `(pred arg...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: Sym,
    pub args: Vec<Ground>,
}

impl Fact {
    pub fn new(pred: impl Into<Sym>, args: Vec<Ground>) -> Self {
        Fact {
            pred: pred.into(),
            args,
        }
    }

    /// Binary relationship `(pred subj obj)`.
    pub fn triple(pred: &str, subj: impl Into<Ground>, obj: impl Into<Ground>) -> Self {
        Fact::new(pred, vec![subj.into(), obj.into()])
    }

    pub fn instance(entity: &str, class: &str) -> Self {
        Fact::triple("instance", entity, class)
    }

    pub fn attribute(entity: &str, attr: &str) -> Self {
        Fact::triple("attribute", entity, attr)
    }

    pub fn from_term(t: &Term) -> Option<Fact> {
        let items = t.as_list()?;
        let pred = items[0].as_atom()?.clone();
        let args = items[1..].iter().map(Ground::from_term).collect::<Option<_>>()?;
        Some(Fact { pred, args })
    }

    pub fn to_term(&self) -> Term {
        let mut items = vec![Term::atom(self.pred.as_str())];
        items.extend(self.args.iter().map(Ground::to_term));
        Term::list(items)
    }

    /// The fact viewed as a single ground term, for nesting inside another fact.
    pub fn to_ground(&self) -> Ground {
        let mut items = vec![Ground::Sym(self.pred.clone())];
        items.extend(self.args.iter().cloned());
        Ground::App(items)
    }

    pub fn subject(&self) -> Option<&Ground> {
        self.args.first()
    }

    pub fn object(&self) -> Option<&Ground> {
        self.args.get(1)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// A term that may contain variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Var(Sym),
    Const(Ground),
    App(Vec<Pattern>),
}

/// Variable name → ground value.
pub type Binding = BTreeMap<Sym, Ground>;

impl Pattern {
    pub fn var(name: &str) -> Self {
        Pattern::Var(Sym::new(name))
    }

    pub fn sym(name: &str) -> Self {
        Pattern::Const(Ground::sym(name))
    }

    pub fn from_term(t: &Term) -> Pattern {
        match &t.kind {
            TermKind::Variable(v) => Pattern::Var(v.clone()),
            TermKind::Compound(items) => {
                let parts: Vec<Pattern> = items.iter().map(Pattern::from_term).collect();
                if parts.iter().all(|p| matches!(p, Pattern::Const(_))) {
                    Pattern::Const(Ground::from_term(t).expect("all parts ground"))
                } else {
                    Pattern::App(parts)
                }
            }
            _ => Pattern::Const(Ground::from_term(t).expect("non-compound, non-variable")),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Pattern::Var(v) => Term::var(v.as_str()),
            Pattern::Const(g) => g.to_term(),
            Pattern::App(items) => Term::list(items.iter().map(Pattern::to_term).collect()),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Sym>) {
        match self {
            Pattern::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Pattern::Const(_) => {}
            Pattern::App(items) => items.iter().for_each(|i| i.collect_vars(out)),
        }
    }

    /// Substitute bound variables; `None` if any variable is unbound.
    pub fn instantiate(&self, binding: &Binding) -> Option<Ground> {
        match self {
            Pattern::Var(v) => binding.get(v).cloned(),
            Pattern::Const(g) => Some(g.clone()),
            Pattern::App(items) => Some(Ground::App(
                items
                    .iter()
                    .map(|i| i.instantiate(binding))
                    .collect::<Option<_>>()?,
            )),
        }
    }

    /// Substitute whatever is bound, leaving other variables in place.
    pub fn substitute(&self, binding: &Binding) -> Pattern {
        match self {
            Pattern::Var(v) => match binding.get(v) {
                Some(g) => Pattern::Const(g.clone()),
                None => self.clone(),
            },
            Pattern::Const(_) => self.clone(),
            Pattern::App(items) => {
                let parts: Vec<Pattern> = items.iter().map(|i| i.substitute(binding)).collect();
                if parts.iter().all(|p| matches!(p, Pattern::Const(_))) {
                    Pattern::Const(Ground::App(
                        parts
                            .into_iter()
                            .map(|p| match p {
                                Pattern::Const(g) => g,
                                _ => unreachable!(),
                            })
                            .collect(),
                    ))
                } else {
                    Pattern::App(parts)
                }
            }
        }
    }

    /// One-way unification of this pattern against a ground term, extending
    /// `binding` in place. On failure `binding` may hold partial extensions;
    /// callers clone before trying.
    pub fn unify(&self, value: &Ground, binding: &mut Binding) -> bool {
        match self {
            Pattern::Var(v) => match binding.get(v) {
                Some(bound) => bound == value,
                None => {
                    binding.insert(v.clone(), value.clone());
                    true
                }
            },
            Pattern::Const(g) => g == value,
            Pattern::App(items) => match value {
                Ground::App(values) if values.len() == items.len() => items
                    .iter()
                    .zip(values)
                    .all(|(p, v)| p.unify(v, binding)),
                _ => false,
            },
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// An atomic sentence with possible variables in argument positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactPattern {
    pub pred: Sym,
    pub args: Vec<Pattern>,
}

impl FactPattern {
    pub fn new(pred: &str, args: Vec<Pattern>) -> Self {
        FactPattern {
            pred: Sym::new(pred),
            args,
        }
    }

    /// `None` when the term is not an atomic sentence with an atom head.
    pub fn from_term(t: &Term) -> Option<FactPattern> {
        let items = t.as_list()?;
        let pred = items[0].as_atom()?.clone();
        Some(FactPattern {
            pred,
            args: items[1..].iter().map(Pattern::from_term).collect(),
        })
    }

    pub fn to_term(&self) -> Term {
        let mut items = vec![Term::atom(self.pred.as_str())];
        items.extend(self.args.iter().map(Pattern::to_term));
        Term::list(items)
    }

    pub fn vars(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn instantiate(&self, binding: &Binding) -> Option<Fact> {
        Some(Fact {
            pred: self.pred.clone(),
            args: self
                .args
                .iter()
                .map(|a| a.instantiate(binding))
                .collect::<Option<_>>()?,
        })
    }

    pub fn unify(&self, fact: &Fact, binding: &mut Binding) -> bool {
        self.pred == fact.pred
            && self.args.len() == fact.args.len()
            && self.args.iter().zip(&fact.args).all(|(p, g)| p.unify(g, binding))
    }
}

impl fmt::Display for FactPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kif::parse;

    #[test]
    fn fact_term_roundtrip() {
        let t = &parse("(instance sk (FoodForFn Human))").unwrap()[0];
        let f = Fact::from_term(t).unwrap();
        assert_eq!(f.args[1], Ground::App(vec![Ground::sym("FoodForFn"), Ground::sym("Human")]));
        assert_eq!(&f.to_term(), t);
        assert!(Fact::from_term(&parse("(instance ?X C)").unwrap()[0]).is_none());
    }

    #[test]
    fn unify_nested_with_shared_vars() {
        let p = FactPattern::from_term(&parse("(holdsDuring ?T (attribute ?X ?X))").unwrap()[0]).unwrap();
        let ok = Fact::from_term(&parse("(holdsDuring t1 (attribute a a))").unwrap()[0]).unwrap();
        let bad = Fact::from_term(&parse("(holdsDuring t1 (attribute a b))").unwrap()[0]).unwrap();
        let mut b = Binding::new();
        assert!(p.unify(&ok, &mut b));
        assert_eq!(b.len(), 2);
        assert!(!p.unify(&bad, &mut Binding::new()));
    }

    #[test]
    fn ground_subterms_fold_into_constants() {
        let p = Pattern::from_term(&parse("(FoodForFn Human)").unwrap()[0]);
        assert!(matches!(p, Pattern::Const(Ground::App(_))));
    }
}
