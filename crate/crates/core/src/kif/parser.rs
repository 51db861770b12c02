use super::lexer::{tokenize, Token, TokenKind};
use super::{Decimal, ParseError, SourceSpan, Term, TermKind};
use crate::sym::Sym;

/// Parse KIF text into one term per top-level form.
pub fn parse(text: &str) -> Result<Vec<Term>, ParseError> {
    let tokens = tokenize(text)?;
    let mut forms = Vec::new();
    // open lists: (span of "(", items so far)
    let mut stack: Vec<(SourceSpan, Vec<Term>)> = Vec::new();

    for Token { kind, span } in tokens {
        let finished = match kind {
            TokenKind::LParen => {
                stack.push((span, Vec::new()));
                continue;
            }
            TokenKind::RParen => {
                let Some((open, items)) = stack.pop() else {
                    return Err(ParseError::UnbalancedParenthesis(span));
                };
                if items.is_empty() {
                    return Err(ParseError::EmptyCompound(open));
                }
                Term::new(TermKind::Compound(items), open)
            }
            TokenKind::Str(s) => Term::new(TermKind::Str(s), span),
            TokenKind::Word(w) => word_term(&w, span)?,
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(finished),
            None => forms.push(finished),
        }
    }

    if let Some((open, _)) = stack.pop() {
        return Err(ParseError::UnbalancedParenthesis(open));
    }
    Ok(forms)
}

fn word_term(word: &str, span: SourceSpan) -> Result<Term, ParseError> {
    if let Some(name) = word.strip_prefix('?') {
        if name.is_empty() {
            return Err(ParseError::EmptyVariable(span));
        }
        if name.starts_with('?') || name.starts_with('@') {
            return Err(ParseError::UnsupportedSyntax {
                span,
                text: word.to_string(),
            });
        }
        return Ok(Term::new(TermKind::Variable(Sym::new(name)), span));
    }
    if word.starts_with('@') || word.starts_with('\'') || word.starts_with('`') || word.starts_with(',') {
        return Err(ParseError::UnsupportedSyntax {
            span,
            text: word.to_string(),
        });
    }
    if let Some(d) = Decimal::parse(word) {
        return Ok(Term::new(TermKind::Number(d), span));
    }
    Ok(Term::new(TermKind::Atom(Sym::new(word)), span))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kif::print_term;

    #[test]
    fn instance_axiom() {
        let forms = parse("(instance thisGasEngine GasolineEngine)").unwrap();
        assert_eq!(
            forms,
            vec![Term::list(vec![
                Term::atom("instance"),
                Term::atom("thisGasEngine"),
                Term::atom("GasolineEngine"),
            ])]
        );
    }

    #[test]
    fn variables_drop_sigil() {
        let forms = parse("(instance ?P TurningOffDevice)").unwrap();
        let items = forms[0].as_list().unwrap();
        assert_eq!(items[1].kind, TermKind::Variable(Sym::new("P")));
    }

    #[test]
    fn literals() {
        let forms = parse(r#"(f -3 2.5 "doc" x)"#).unwrap();
        let items = forms[0].as_list().unwrap();
        assert_eq!(items[1].kind, TermKind::Number(Decimal::from_int(-3)));
        assert_eq!(items[2].kind, TermKind::Number(Decimal::parse("2.5").unwrap()));
        assert_eq!(items[3].kind, TermKind::Str("doc".into()));
        assert_eq!(items[4].kind, TermKind::Atom(Sym::new("x")));
    }

    #[test]
    fn unbalanced() {
        assert!(matches!(parse("((a)"), Err(ParseError::UnbalancedParenthesis(s)) if s == SourceSpan::new(1, 1, 1)));
        assert!(matches!(parse("(a))"), Err(ParseError::UnbalancedParenthesis(s)) if s == SourceSpan::new(1, 4, 1)));
    }

    #[test]
    fn empty_compound() {
        assert!(matches!(parse("(a ())"), Err(ParseError::EmptyCompound(_))));
    }

    #[test]
    fn row_variables_and_quotes_unsupported() {
        assert!(matches!(parse("(f @ROW)"), Err(ParseError::UnsupportedSyntax { .. })));
        assert!(matches!(parse("(f ?@ROW)"), Err(ParseError::UnsupportedSyntax { .. })));
        assert!(matches!(parse("(f 'x)"), Err(ParseError::UnsupportedSyntax { .. })));
        assert!(matches!(parse("(f ?)"), Err(ParseError::EmptyVariable(_))));
    }

    #[test]
    fn multiple_forms_with_comments() {
        let text = "; header\n(subclass A B) ; trailing\n(subclass B C)\nbare\n";
        let forms = parse(text).unwrap();
        assert_eq!(forms.len(), 3);
        assert_eq!(forms[1].span, SourceSpan::new(3, 1, 1));
        assert_eq!(print_term(&forms[2]), "bare");
    }

    #[test]
    fn nested_roundtrip() {
        let text = "(=> (and (instance ?P TurningOffDevice) (patient ?P ?D)) (and (holdsDuring (BeginFn (WhenFn ?P)) (attribute ?D DeviceOn)) (holdsDuring (EndFn (WhenFn ?P)) (attribute ?D DeviceOff))))";
        let forms = parse(text).unwrap();
        assert_eq!(print_term(&forms[0]), text);
    }
}
