use std::collections::BTreeSet;
use std::fmt;

use super::{CompareOp, Conclusion, Condition, DirectiveKind, DirectiveTemplate, Guard, Rule, RuleBase};
use crate::facts::syntax::{parse_number, scan_text_literal};
use crate::facts::{is_ident, is_ident_char, Ident, Term, TriplePattern, Value};
use crate::profile::{is_name_token, Modality, PresentationOrder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("line {line}, column {column}: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: usize, column: usize, expected: Vec<String>, found: String },
    #[error("line {line}, column {column}: {message}")]
    Lexical { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: rule {rule} uses unbound variable ?{var}")]
    UnboundVariable { rule: String, var: String, line: usize, column: usize },
    #[error("line {line}, column {column}: rule {name} is defined twice")]
    DuplicateRule { name: String, line: usize, column: usize },
    #[error("line {line}, column {column}: rule {rule}: {reason}")]
    InvalidDirective { rule: String, reason: String, line: usize, column: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Var(String),
    Word(String),
    Number(Value),
    Text(String),
    Op(CompareOp),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Var(v) => write!(f, "`?{v}`"),
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Number(n) => write!(f, "`{n}`"),
            Tok::Text(_) => f.write_str("text literal"),
            Tok::Op(op) => write!(f, "`{}`", op.symbol()),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, RuleError> {
    let chars: Vec<char> = text.chars().collect();
    // (line, column) of every char index, plus one past the end.
    let mut pos = Vec::with_capacity(chars.len() + 1);
    let (mut line, mut col) = (1, 1);
    for c in &chars {
        pos.push((line, col));
        if *c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    pos.push((line, col));
    let lexical = |i: usize, message: String| RuleError::Lexical { line: pos[i].0, column: pos[i].1, message };

    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '<' | '>' | '!' | '=' => {
                let next_eq = chars.get(i + 1) == Some(&'=');
                let (op, len) = match (c, next_eq) {
                    ('<', true) => (CompareOp::Le, 2),
                    ('<', false) => (CompareOp::Lt, 1),
                    ('>', true) => (CompareOp::Ge, 2),
                    ('>', false) => (CompareOp::Gt, 1),
                    ('!', true) => (CompareOp::Ne, 2),
                    ('=', _) => (CompareOp::Eq, 1),
                    _ => return Err(lexical(i, "expected `!=`".into())),
                };
                i += len;
                Tok::Op(op)
            }
            '?' => {
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i == start + 1 {
                    return Err(lexical(start, "variable name expected after `?`".into()));
                }
                Tok::Var(chars[start + 1..i].iter().collect())
            }
            '"' => {
                let (text, end) = scan_text_literal(&chars, i).map_err(|(p, m)| lexical(p, m))?;
                i = end;
                Tok::Text(text)
            }
            c if is_ident_char(c) => {
                while i < chars.len() && (is_ident_char(chars[i]) || chars[i] == '/') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match parse_number(&word) {
                    Some(Ok(v)) => Tok::Number(v),
                    Some(Err(m)) => return Err(lexical(start, m)),
                    None if is_ident(&word) => Tok::Word(word),
                    None => return Err(lexical(start, format!("invalid token {word:?}"))),
                }
            }
            c => return Err(lexical(i, format!("unexpected character {c:?}"))),
        };
        out.push(Token { tok, line: pos[start].0, column: pos[start].1 });
    }
    out.push(Token { tok: Tok::Eof, line: pos[chars.len()].0, column: pos[chars.len()].1 });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

const TERM: &str = "term";

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> RuleError {
        let t = self.peek();
        RuleError::Syntax {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn expect_word(&mut self, w: &str) -> Result<Token, RuleError> {
        if self.is_word(w) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[&format!("`{w}`")]))
        }
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<Token, RuleError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[label]))
        }
    }

    fn term(&mut self) -> Result<(Term, Token), RuleError> {
        let t = self.peek().clone();
        let term = match &t.tok {
            Tok::Var(v) => Term::Var(v.clone()),
            Tok::Word(w) => Term::Const(Value::Ident(Ident::new(w.clone()).expect("lexer yields identifiers"))),
            Tok::Number(n) => Term::Const(n.clone()),
            Tok::Text(s) => Term::Const(Value::Text(s.clone())),
            _ => return Err(self.unexpected(&[TERM])),
        };
        self.bump();
        Ok((term, t))
    }

    fn constant(&mut self) -> Result<Value, RuleError> {
        match self.term()? {
            (Term::Const(v), _) => Ok(v),
            (Term::Var(_), t) => {
                Err(RuleError::Syntax { line: t.line, column: t.column, expected: vec!["constant".into()], found: t.tok.to_string() })
            }
        }
    }

    /// `(term, term, term)` plus the tokens of its three terms.
    fn pattern(&mut self) -> Result<(TriplePattern, [Token; 3]), RuleError> {
        self.expect(Tok::LParen, "`(`")?;
        let (s, ts) = self.term()?;
        self.expect(Tok::Comma, "`,`")?;
        let (p, tp) = self.term()?;
        self.expect(Tok::Comma, "`,`")?;
        let (o, to) = self.term()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok((TriplePattern::new(s, p, o), [ts, tp, to]))
    }

    fn rule(&mut self, priority: usize) -> Result<(Rule, Token), RuleError> {
        self.expect_word("RULE")?;
        let name_tok = self.peek().clone();
        let name = match &name_tok.tok {
            Tok::Word(w) if is_name_token(w) && !KEYWORDS.contains(&w.as_str()) => w.clone(),
            _ => return Err(self.unexpected(&["rule name"])),
        };
        self.bump();
        self.expect_word("WHEN")?;

        let unbound = |name: &str, var: &str, t: &Token| RuleError::UnboundVariable {
            rule: name.to_string(),
            var: var.to_string(),
            line: t.line,
            column: t.column,
        };

        let mut bound: BTreeSet<String> = BTreeSet::new();
        let mut conditions = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::LParen => {
                    let (p, _) = self.pattern()?;
                    for term in [&p.subject, &p.predicate, &p.object] {
                        if let Term::Var(v) = term {
                            bound.insert(v.clone());
                        }
                    }
                    conditions.push(Condition::Match(p));
                }
                Tok::Var(v) if !conditions.is_empty() => {
                    let var = v.clone();
                    let var_tok = self.bump();
                    if !bound.contains(&var) {
                        return Err(unbound(&name, &var, &var_tok));
                    }
                    let op = match self.peek().tok {
                        Tok::Op(op) => op,
                        _ => return Err(self.unexpected(&["comparison operator"])),
                    };
                    self.bump();
                    let value = self.constant()?;
                    conditions.push(Condition::Guard(Guard { var, op, value }));
                }
                _ if conditions.is_empty() => return Err(self.unexpected(&["`(`"])),
                _ => return Err(self.unexpected(&["`(`", "guard"])),
            }
            if self.is_word("AND") {
                self.bump();
            } else if self.is_word("THEN") {
                self.bump();
                break;
            } else {
                return Err(self.unexpected(&["`AND`", "`THEN`"]));
            }
        }

        let mut conclusions = Vec::new();
        loop {
            if self.is_word("assert") {
                self.bump();
                let (p, toks) = self.pattern()?;
                for (term, t) in [&p.subject, &p.predicate, &p.object].into_iter().zip(&toks) {
                    match term {
                        Term::Var(v) if !bound.contains(v) => return Err(unbound(&name, v, t)),
                        Term::Const(c) if !std::ptr::eq(term, &p.object) && c.as_ident().is_none() => {
                            return Err(RuleError::Syntax {
                                line: t.line,
                                column: t.column,
                                expected: vec!["identifier".into()],
                                found: t.tok.to_string(),
                            })
                        }
                        _ => {}
                    }
                }
                conclusions.push(Conclusion::Assert(p));
            } else if self.is_word("directive") {
                self.bump();
                let kind_tok = self.peek().clone();
                let kind: DirectiveKind = match &kind_tok.tok {
                    Tok::Word(w) => w.parse().map_err(|_| self.unexpected(&DIRECTIVE_KINDS))?,
                    _ => return Err(self.unexpected(&DIRECTIVE_KINDS)),
                };
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let mut args = Vec::new();
                if self.peek().tok != Tok::RParen {
                    loop {
                        let (term, t) = self.term()?;
                        if let Term::Var(v) = &term {
                            if !bound.contains(v) {
                                return Err(unbound(&name, v, &t));
                            }
                        }
                        args.push((term, t));
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                check_directive(&name, kind, &kind_tok, &args)?;
                conclusions.push(Conclusion::Directive(DirectiveTemplate {
                    kind,
                    args: args.into_iter().map(|(t, _)| t).collect(),
                }));
            } else {
                return Err(self.unexpected(&["`assert`", "`directive`"]));
            }
            if self.is_word("AND") {
                self.bump();
            } else if self.is_word("END") {
                self.bump();
                break;
            } else {
                return Err(self.unexpected(&["`AND`", "`END`"]));
            }
        }
        Ok((Rule { name, conditions, conclusions, priority }, name_tok))
    }
}

const KEYWORDS: [&str; 7] = ["RULE", "WHEN", "AND", "THEN", "END", "assert", "directive"];
const DIRECTIVE_KINDS: [&str; 4] = ["`present`", "`skip`", "`embed_tool`", "`link_blogs`"];

fn check_directive(rule: &str, kind: DirectiveKind, kind_tok: &Token, args: &[(Term, Token)]) -> Result<(), RuleError> {
    let invalid = |t: &Token, reason: String| RuleError::InvalidDirective {
        rule: rule.to_string(),
        reason,
        line: t.line,
        column: t.column,
    };
    if args.len() != kind.arity() {
        return Err(invalid(kind_tok, format!("{kind} takes {} arguments, got {}", kind.arity(), args.len())));
    }
    for (i, (term, t)) in args.iter().enumerate() {
        let Term::Const(value) = term else { continue };
        let Some(name) = value.as_ident() else {
            return Err(invalid(t, format!("argument {value} of {kind} is not an identifier")));
        };
        let ok = match (kind, i) {
            (DirectiveKind::Present, 1) => name.as_str().parse::<Modality>().is_ok(),
            (DirectiveKind::Present, 2) => name.as_str().parse::<PresentationOrder>().is_ok(),
            _ => true,
        };
        if !ok {
            return Err(invalid(t, format!("{name} is not a valid {kind} argument {}", i + 1)));
        }
    }
    Ok(())
}

/// Parses a rule file. Rules get their file position as priority.
pub fn parse_rules(text: &str) -> Result<RuleBase, RuleError> {
    let mut parser = Parser { tokens: lex(text)?, at: 0 };
    let mut rules: Vec<Rule> = Vec::new();
    while parser.peek().tok != Tok::Eof {
        let (rule, name_tok) = parser.rule(rules.len())?;
        if rules.iter().any(|r| r.name == rule.name) {
            return Err(RuleError::DuplicateRule { name: rule.name, line: name_tok.line, column: name_tok.column });
        }
        rules.push(rule);
    }
    Ok(RuleBase { rules, source: text.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "RULE r1 WHEN (?t, knows_level_maetic, ?l) AND ?l <= little AND (?t, inputs, verbal) \
                           THEN directive present(maetic, audio, deductive) END";

    #[test]
    fn example_rule_parse_tree() {
        let rb = parse_rules(EXAMPLE).unwrap();
        let expected = Rule {
            name: "r1".into(),
            conditions: vec![
                Condition::Match(TriplePattern::new(Term::var("t"), Term::ident("knows_level_maetic"), Term::var("l"))),
                Condition::Guard(Guard { var: "l".into(), op: CompareOp::Le, value: Value::ident("little") }),
                Condition::Match(TriplePattern::new(Term::var("t"), Term::ident("inputs"), Term::ident("verbal"))),
            ],
            conclusions: vec![Conclusion::Directive(DirectiveTemplate {
                kind: DirectiveKind::Present,
                args: vec![Term::ident("maetic"), Term::ident("audio"), Term::ident("deductive")],
            })],
            priority: 0,
        };
        assert_eq!(rb.rules, vec![expected]);
        assert_eq!(rb.rules[0].patterns().count(), 2);
        assert_eq!(rb.rules[0].guards().count(), 1);
    }

    #[test]
    fn empty_text_and_comments() {
        assert!(parse_rules("").unwrap().is_empty());
        assert!(parse_rules("# nothing here\n   \n").unwrap().is_empty());
    }

    #[test]
    fn unbound_conclusion_variable() {
        let err = parse_rules("RULE r2 WHEN (?t, a, b) THEN assert (?t, c, ?x) END").unwrap_err();
        assert_eq!(err, RuleError::UnboundVariable { rule: "r2".into(), var: "x".into(), line: 1, column: 45 });
        assert!(err.to_string().contains("r2") && err.to_string().contains("?x"));
        let err = parse_rules("RULE r3 WHEN (?t, a, b) THEN directive skip(?y) END").unwrap_err();
        assert!(matches!(err, RuleError::UnboundVariable { var, .. } if var == "y"));
    }

    #[test]
    fn guard_must_follow_binding() {
        let err = parse_rules("RULE g WHEN (?t, a, b) AND ?l < little AND (?t, k, ?l) THEN directive link_blogs() END")
            .unwrap_err();
        assert!(matches!(err, RuleError::UnboundVariable { var, column: 28, .. } if var == "l"));
    }

    #[test]
    fn duplicate_names() {
        let text = "RULE a WHEN (?t, p, o) THEN directive link_blogs() END\n\
                    RULE a WHEN (?t, p, o) THEN directive link_blogs() END";
        assert_eq!(parse_rules(text).unwrap_err(), RuleError::DuplicateRule { name: "a".into(), line: 2, column: 6 });
    }

    #[test]
    fn syntax_errors_carry_position_and_expectations() {
        let err = parse_rules("RULE a WHEN (?t, p, o)\n  THEN directive link_blogs()").unwrap_err();
        match err {
            RuleError::Syntax { line, column, expected, found } => {
                assert_eq!((line, column), (2, 30));
                assert_eq!(expected, ["`AND`", "`END`"]);
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_rules("RULE a WHEN (?t p, o) THEN directive link_blogs() END").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { column: 17, ref expected, .. } if expected == &["`,`"]));
        let err = parse_rules("RULE a WHEN ?x = 1 THEN directive link_blogs() END").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { column: 13, .. }));
        let err = parse_rules("RULE a WHEN (?t, p, o) THEN directive shout(?t) END").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { ref expected, .. } if expected.len() == 4));
        let err = parse_rules("RULE a WHEN (?t, p, o) AND ?t @ 3 THEN directive link_blogs() END").unwrap_err();
        assert!(matches!(err, RuleError::Lexical { column: 31, .. }));
    }

    #[test]
    fn directive_arguments_are_checked() {
        let err = parse_rules("RULE a WHEN (?t, p, o) THEN directive present(maetic, loud, deductive) END").unwrap_err();
        assert!(matches!(err, RuleError::InvalidDirective { column: 55, .. }));
        let err = parse_rules("RULE a WHEN (?t, p, o) THEN directive skip(a, b) END").unwrap_err();
        assert!(matches!(err, RuleError::InvalidDirective { .. }));
        let err = parse_rules("RULE a WHEN (?t, p, o) THEN assert (\"s\", p, o) END").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { .. }));
    }

    #[test]
    fn literals_and_comments_inside_rules() {
        let rb = parse_rules(
            "RULE n # trailing comment\n WHEN (?t, hours, ?h) AND ?h >= 13/2 AND ?h != -1 \
             THEN assert (?t, note, \"long # unit\") END",
        )
        .unwrap();
        let r = &rb.rules[0];
        assert_eq!(r.guards().count(), 2);
        assert_eq!(
            r.conclusions[0],
            Conclusion::Assert(TriplePattern::new(Term::var("t"), Term::ident("note"), Term::Const(Value::text("long # unit"))))
        );
    }

    #[test]
    fn shipped_rulebase_round_trips_through_display() {
        let rb = super::super::RuleBase::shipped();
        assert!(rb.len() >= 10);
        assert_eq!(parse_rules(&rb.to_string()).unwrap(), rb);
        assert_eq!(parse_rules(&parse_rules(EXAMPLE).unwrap().to_string()).unwrap(), parse_rules(EXAMPLE).unwrap());
    }
}
