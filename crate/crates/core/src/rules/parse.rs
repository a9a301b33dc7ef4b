use std::collections::BTreeSet;

use thiserror::Error;

use super::{Domain, Formula, Function, Predicate, Rel, RuleAst, Term};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Rel(Rel),
    Colon,
    Dot,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(v) => format!("number {v}"),
            Tok::Rel(r) => format!("`{}`", r.symbol()),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, message: String| ParseError { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.')) || c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            match s.parse::<f64>() {
                Ok(v) => Tok::Num(v),
                Err(_) => return Err(err(l0, c0, format!("malformed number `{s}`"))),
            }
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('<', Some('=')) => (Tok::Rel(Rel::Le), 2),
                ('>', Some('=')) => (Tok::Rel(Rel::Ge), 2),
                ('=', Some('=')) => (Tok::Rel(Rel::Eq), 2),
                ('!', Some('=')) => (Tok::Rel(Rel::Ne), 2),
                ('<', _) => (Tok::Rel(Rel::Lt), 1),
                ('>', _) => (Tok::Rel(Rel::Gt), 1),
                (':', _) => (Tok::Colon, 1),
                ('.', _) => (Tok::Dot, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                _ => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
            };
            i += len;
            tok
        };
        col += i - start;
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 8] = ["rule", "forall", "in", "lanelets", "not", "and", "or", "implies"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    var: String,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, at: &Spanned, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: at.line, col: at.col, message: message.into() })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            other => self.fail(&t, format!("expected `{kw}`, found {}", other.describe())),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == want {
            Ok(())
        } else {
            self.fail(&t, format!("expected {}, found {}", want.describe(), t.tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Spanned), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok((s.clone(), t.clone())),
            other => self.fail(&t, format!("expected {what}, found {}", other.describe())),
        }
    }

    fn rule(&mut self) -> Result<RuleAst, ParseError> {
        self.keyword("rule")?;
        let (id, _) = self.ident("rule id")?;
        self.expect(Tok::Colon)?;
        self.keyword("forall")?;
        let (var, _) = self.ident("variable name")?;
        self.keyword("in")?;
        self.keyword("lanelets")?;
        self.expect(Tok::Dot)?;
        self.var = var.clone();
        let body = self.formula()?;
        Ok(RuleAst { id, var, domain: Domain::Lanelets, body })
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disj()?;
        if self.is_kw("implies") {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while self.is_kw("or") {
            self.bump();
            f = Formula::Or(Box::new(f), Box::new(self.conj()?));
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.is_kw("and") {
            self.bump();
            f = Formula::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.is_kw("not") {
            self.bump();
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.peek().tok == Tok::LParen {
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        self.atom()
    }

    fn argument(&mut self) -> Result<String, ParseError> {
        self.expect(Tok::LParen)?;
        let (v, at) = self.ident("variable name")?;
        if v != self.var {
            return self.fail(&at, format!("unbound variable `{v}`, the quantified variable is `{}`", self.var));
        }
        self.expect(Tok::RParen)?;
        Ok(v)
    }

    fn call(&mut self) -> Result<Term, ParseError> {
        let (name, at) = self.ident("function name")?;
        if Predicate::from_name(&name).is_some() {
            return self.fail(&at, format!("`{name}` is a predicate and cannot be compared"));
        }
        let Some(f) = Function::from_name(&name) else {
            return self.fail(&at, format!("unknown function `{name}`"));
        };
        Ok(Term::Call(f, self.argument()?))
    }

    fn rel(&mut self) -> Result<Rel, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Rel(r) => Ok(*r),
            other => self.fail(&t, format!("expected a comparison operator, found {}", other.describe())),
        }
    }

    fn number(&mut self) -> Result<Term, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(v) => Ok(Term::Num(*v)),
            other => self.fail(&t, format!("expected a number, found {}", other.describe())),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Num(_) => {
                let lhs = self.number()?;
                let rel = self.rel()?;
                Ok(Formula::Compare(lhs, rel, self.call()?))
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if let Some(p) = Predicate::from_name(name) {
                    self.bump();
                    return Ok(Formula::Pred(p, self.argument()?));
                }
                if Function::from_name(name).is_none() {
                    return self.fail(&t, format!("unknown predicate or function `{name}`"));
                }
                let lhs = self.call()?;
                let rel = self.rel()?;
                Ok(Formula::Compare(lhs, rel, self.number()?))
            }
            other => self.fail(&t, format!("expected a predicate, comparison or `(`, found {}", other.describe())),
        }
    }
}

/// Parses a rule file. Rule ids must be unique.
pub fn parse_rules(text: &str) -> Result<Vec<RuleAst>, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, var: String::new() };
    let mut rules = Vec::new();
    let mut ids = BTreeSet::new();
    while p.peek().tok != Tok::Eof {
        let at = p.toks[p.pos + 1].clone();
        let r = p.rule()?;
        if !ids.insert(r.id.clone()) {
            return p.fail(&at, format!("duplicate rule id `{}`", r.id));
        }
        rules.push(r);
    }
    if rules.is_empty() {
        return p.fail(p.peek(), "no rules");
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn err(src: &str) -> ParseError {
        parse_rules(src).unwrap_err()
    }

    #[test]
    fn simple_rules() {
        let r = parse_rules("rule r1: forall l in lanelets. finite_elevation(l)").unwrap();
        assert_eq!(r[0].id, "r1");
        assert_eq!(r[0].var, "l");
        assert_eq!(r[0].body, Formula::Pred(Predicate::FiniteElevation, "l".into()));
        let r = parse_rules("rule r2: forall l in lanelets. 10 <= min_turning_radius(l)").unwrap();
        assert_eq!(r[0].body, Formula::Compare(Term::Num(10.0), Rel::Le, Term::Call(Function::MinTurningRadius, "l".into())));
    }

    #[test]
    fn precedence() {
        let p = |s: &str| parse_rules(&format!("rule r: forall l in lanelets. {s}")).unwrap().remove(0).body;
        let (a, b, c) = (
            || Box::new(Formula::Pred(Predicate::FiniteElevation, "l".into())),
            || Box::new(Formula::Pred(Predicate::SelfSuccessor, "l".into())),
            || Box::new(Formula::Pred(Predicate::ValidPolyline, "l".into())),
        );
        assert_eq!(
            p("not finite_elevation(l) and self_successor(l) or valid_polyline(l)"),
            Formula::Or(Box::new(Formula::And(Box::new(Formula::Not(a())), b())), c())
        );
        assert_eq!(
            p("finite_elevation(l) implies self_successor(l) implies valid_polyline(l)"),
            Formula::Implies(a(), Box::new(Formula::Implies(b(), c())))
        );
        assert_eq!(
            p("finite_elevation(l) or self_successor(l) and valid_polyline(l)"),
            Formula::Or(a(), Box::new(Formula::And(b(), c())))
        );
        assert_eq!(
            p("finite_elevation(l) and self_successor(l) and valid_polyline(l)"),
            Formula::And(Box::new(Formula::And(a(), b())), c())
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = err("rule bad: forall l in lanelets. frobnicate(l)");
        assert_eq!((e.line, e.col), (1, 33));
        assert!(e.message.contains("frobnicate"));

        let e = err("# header\nrule a: forall l in lanelets. finite_elevation(l)\nrule b: forall l in lanelets.\n  min_width(q) > 2");
        assert_eq!((e.line, e.col), (4, 13));
        assert!(e.message.contains("unbound variable `q`"));

        let e = err("rule a: forall l in lanelets. finite_elevation(l)\nrule a: forall l in lanelets. valid_polyline(l)");
        assert_eq!((e.line, e.col, e.message.as_str()), (2, 6, "duplicate rule id `a`"));

        assert!(err("rule a: forall l in lanelets. min_width(l)").message.contains("comparison operator"));
        assert!(err("rule a: forall l in lanelets. finite_elevation(l) > 3").message.contains("expected `rule`"));
        assert!(err("rule a: forall l in lanelets. 3 > valid_polyline(l)").message.contains("predicate"));
        assert!(err("rule a: forall l in roads. valid_polyline(l)").message.contains("`lanelets`"));
        assert!(err("rule a: forall l in lanelets. (valid_polyline(l)").message.contains("`)`"));
        assert_eq!(err("rule a: forall l in lanelets. min_width(l) > 2 $").col, 48);
        assert!(err("").message.contains("no rules"));
    }

    #[test]
    fn numbers() {
        let body = |s: &str| parse_rules(&format!("rule r: forall l in lanelets. min_width(l) > {s}")).unwrap().remove(0).body;
        for (s, v) in [("2", 2.0), ("2.5", 2.5), ("-1.5", -1.5), ("1e3", 1000.0), ("2.5E-1", 0.25), (".5", 0.5)] {
            assert_eq!(body(s), Formula::Compare(Term::Call(Function::MinWidth, "l".into()), Rel::Gt, Term::Num(v)));
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            prop::sample::select(Predicate::ALL.to_vec()).prop_map(|p| Formula::Pred(p, "v".into())),
            (
                prop::sample::select(Function::ALL.to_vec()),
                prop::sample::select(vec![Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge, Rel::Eq, Rel::Ne]),
                -1e6..1e6f64,
                any::<bool>()
            )
                .prop_map(|(f, r, v, flip)| {
                    let (call, num) = (Term::Call(f, "v".into()), Term::Num(v));
                    if flip { Formula::Compare(num, r, call) } else { Formula::Compare(call, r, num) }
                }),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(bodies in prop::collection::vec(arb_formula(), 1..4)) {
            let rules: Vec<RuleAst> = bodies
                .into_iter()
                .enumerate()
                .map(|(i, body)| RuleAst { id: format!("r{i}"), var: "v".into(), domain: Domain::Lanelets, body })
                .collect();
            let text = super::super::print_rules(&rules);
            prop_assert_eq!(parse_rules(&text).unwrap(), rules);
        }
    }
}
