use std::fmt;

use crate::sym::Sym;

/// 1-based position of a token in its source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1 && length >= 1);
        SourceSpan {
            line,
            column,
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Exact decimal `mantissa * 10^-scale`, kept normalized (no trailing
/// fractional zeros) so structural equality is value equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

impl Decimal {
    pub fn from_int(v: i64) -> Self {
        Decimal {
            mantissa: v as i128,
            scale: 0,
        }
    }

    /// Accepts `-?[0-9]+(\.[0-9]+)?`; anything else (exponents, leading `+`,
    /// bare `.5`) is not a number.
    pub fn parse(text: &str) -> Option<Self> {
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if let Some(f) = frac_part {
            if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
        }
        let frac = frac_part.unwrap_or("").trim_end_matches('0');
        let digits = format!("{int_part}{frac}");
        let mut mantissa: i128 = digits.parse().ok()?;
        if negative {
            mantissa = -mantissa;
        }
        Some(Decimal {
            mantissa,
            scale: frac.len() as u32,
        })
    }

    pub fn as_i64(&self) -> Option<i64> {
        if self.scale == 0 {
            i64::try_from(self.mantissa).ok()
        } else {
            None
        }
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale - digits.len() + 1), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int_part}.{frac_part}")
    }
}

#[derive(Debug, Clone)]
pub enum TermKind {
    Atom(Sym),
    /// Name without the `?` sigil.
    Variable(Sym),
    Number(Decimal),
    Str(String),
    /// Never empty.
    Compound(Vec<Term>),
}

/// A parsed KIF expression. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Term {
    pub kind: TermKind,
    pub span: SourceSpan,
}

impl PartialEq for TermKind {
    fn eq(&self, other: &Self) -> bool {
        use TermKind::*;
        match (self, other) {
            (Atom(a), Atom(b)) | (Variable(a), Variable(b)) => a == b,
            (Number(a), Number(b)) => a == b,
            (Str(a), Str(b)) => a == b,
            (Compound(a), Compound(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for TermKind {}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Term {}

impl Term {
    pub fn new(kind: TermKind, span: SourceSpan) -> Self {
        Term { kind, span }
    }

    /// Span-less constructors, mostly for building terms in code and tests.
    pub fn atom(name: &str) -> Self {
        Term::new(TermKind::Atom(Sym::new(name)), SourceSpan::default())
    }

    pub fn var(name: &str) -> Self {
        Term::new(TermKind::Variable(Sym::new(name)), SourceSpan::default())
    }

    pub fn string(value: &str) -> Self {
        Term::new(TermKind::Str(value.to_string()), SourceSpan::default())
    }

    pub fn number(value: Decimal) -> Self {
        Term::new(TermKind::Number(value), SourceSpan::default())
    }

    pub fn list(items: Vec<Term>) -> Self {
        assert!(!items.is_empty(), "compound terms are nonempty");
        Term::new(TermKind::Compound(items), SourceSpan::default())
    }

    pub fn as_atom(&self) -> Option<&Sym> {
        match &self.kind {
            TermKind::Atom(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Term]> {
        match &self.kind {
            TermKind::Compound(items) => Some(items),
            _ => None,
        }
    }

    /// Head atom of a compound, if it has one.
    pub fn head(&self) -> Option<&Sym> {
        self.as_list().and_then(|items| items[0].as_atom())
    }

    pub fn is_ground(&self) -> bool {
        match &self.kind {
            TermKind::Variable(_) => false,
            TermKind::Compound(items) => items.iter().all(Term::is_ground),
            _ => true,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TermKind::Atom(s) => write!(f, "{s}"),
            TermKind::Variable(s) => write!(f, "?{s}"),
            TermKind::Number(d) => write!(f, "{d}"),
            TermKind::Str(s) => write_quoted(f, s),
            TermKind::Compound(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('"')
}

/// Canonical single-line rendering; re-parses to a structurally equal term.
pub fn print_term(t: &Term) -> String {
    t.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    AtomicSentence,
    Implication,
    Biconditional,
    Conjunction,
    Disjunction,
    Negation,
    Existential,
    Universal,
    Other,
}

fn is_variable_list(t: &Term) -> bool {
    match &t.kind {
        TermKind::Compound(items) => items
            .iter()
            .all(|i| matches!(i.kind, TermKind::Variable(_))),
        _ => false,
    }
}

pub fn classify(t: &Term) -> FormulaKind {
    let items = match &t.kind {
        TermKind::Atom(_) => return FormulaKind::AtomicSentence,
        TermKind::Compound(items) => items,
        _ => return FormulaKind::Other,
    };
    let Some(head) = items[0].as_atom() else {
        return FormulaKind::Other;
    };
    let args = &items[1..];
    match head.as_str() {
        "=>" if args.len() == 2 => FormulaKind::Implication,
        "<=>" if args.len() == 2 => FormulaKind::Biconditional,
        "and" if !args.is_empty() => FormulaKind::Conjunction,
        "or" if !args.is_empty() => FormulaKind::Disjunction,
        "not" if args.len() == 1 => FormulaKind::Negation,
        "exists" if args.len() == 2 && is_variable_list(&args[0]) => FormulaKind::Existential,
        "forall" if args.len() == 2 && is_variable_list(&args[0]) => FormulaKind::Universal,
        "=>" | "<=>" | "and" | "or" | "not" | "exists" | "forall" => FormulaKind::Other,
        _ => FormulaKind::AtomicSentence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_forms() {
        assert_eq!(Decimal::parse("42").unwrap().to_string(), "42");
        assert_eq!(Decimal::parse("-3").unwrap().to_string(), "-3");
        assert_eq!(Decimal::parse("2.50").unwrap().to_string(), "2.5");
        assert_eq!(Decimal::parse("0.05").unwrap().to_string(), "0.05");
        assert_eq!(Decimal::parse("-0.5").unwrap().to_string(), "-0.5");
        assert_eq!(Decimal::parse("3.0").unwrap(), Decimal::from_int(3));
        for bad in ["", "-", "1e5", "+1", ".5", "1.", "1.2.3", "x1"] {
            assert!(Decimal::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn print_atoms_and_lists() {
        assert_eq!(print_term(&Term::atom("Entity")), "Entity");
        let t = Term::list(vec![
            Term::atom("subclass"),
            Term::atom("Bakery"),
            Term::atom("Business"),
        ]);
        assert_eq!(print_term(&t), "(subclass Bakery Business)");
        assert_eq!(print_term(&Term::string("a \"b\"")), r#""a \"b\"""#);
    }

    #[test]
    fn classify_operators() {
        let v = |n| Term::var(n);
        let a = |n| Term::atom(n);
        assert_eq!(classify(&a("x")), FormulaKind::AtomicSentence);
        assert_eq!(
            classify(&Term::list(vec![a("instance"), a("x"), a("C")])),
            FormulaKind::AtomicSentence
        );
        assert_eq!(classify(&Term::list(vec![a("=>"), a("a")])), FormulaKind::Other);
        assert_eq!(
            classify(&Term::list(vec![a("=>"), a("a"), a("b")])),
            FormulaKind::Implication
        );
        assert_eq!(
            classify(&Term::list(vec![a("<=>"), a("a"), a("b")])),
            FormulaKind::Biconditional
        );
        assert_eq!(classify(&Term::list(vec![a("not"), a("a")])), FormulaKind::Negation);
        assert_eq!(classify(&Term::list(vec![a("or"), a("a"), a("b")])), FormulaKind::Disjunction);
        assert_eq!(classify(&Term::list(vec![a("and"), a("a")])), FormulaKind::Conjunction);
        assert_eq!(
            classify(&Term::list(vec![a("exists"), Term::list(vec![v("X")]), a("b")])),
            FormulaKind::Existential
        );
        assert_eq!(
            classify(&Term::list(vec![a("forall"), a("X"), a("b")])),
            FormulaKind::Other
        );
        assert_eq!(classify(&Term::list(vec![v("R"), a("b")])), FormulaKind::Other);
        assert_eq!(classify(&Term::string("s")), FormulaKind::Other);
    }
}
