use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::encoding::parse_date;

const KEYWORDS: [&str; 21] = [
    "krao", "dot", "filter", "tr", "lift", "sum", "bool", "diag", "having", "and", "or", "not", "between", "in",
    "like", "case", "when", "then", "else", "end", "date",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    bound: BTreeSet<String>,
}

pub fn parse(src: &str) -> Result<Script, ParseError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, bound: BTreeSet::new() };
    let mut bindings = Vec::new();
    loop {
        while p.peek() == &Tok::Newline {
            p.pos += 1;
        }
        if p.peek() == &Tok::Eof {
            break;
        }
        let b = p.binding()?;
        if !p.bound.insert(b.name.clone()) {
            return Err(ParseError::DuplicateBinding { name: b.name, line: b.line });
        }
        bindings.push(b);
    }
    if bindings.is_empty() {
        return Err(ParseError::Syntax { line: 1, col: 1, message: "empty script".into() });
    }
    // an attribute-looking name that is bound later is a use before binding
    for (i, b) in bindings.iter().enumerate() {
        let mut attrs = BTreeSet::new();
        b.expr.collect_attributes(&mut attrs);
        if let Some(late) = bindings[i..].iter().find(|later| attrs.contains(&later.name)) {
            return Err(ParseError::UnboundVariable { name: late.name.clone(), line: b.line, col: 1 });
        }
    }
    Ok(Script { bindings })
}

impl Parser {
    fn current(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.current().tok
    }

    fn here(&self) -> (usize, usize) {
        let t = self.current();
        (t.line, t.col)
    }

    fn next(&mut self) -> Tok {
        let t = self.current().tok.clone();
        self.pos += 1;
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", describe(self.peek())))
        }
    }

    fn binding(&mut self) -> Result<Binding, ParseError> {
        let (line, _) = self.here();
        let name = match self.next() {
            Tok::Ident(s) if !is_keyword(&s) && !s.contains('.') => s,
            other => {
                self.pos -= 1;
                return self.error(format!("expected a variable name, found {}", describe(&other)));
            }
        };
        self.expect(Tok::Assign, "`=`")?;
        let expr = self.expr()?;
        match self.peek() {
            Tok::Newline | Tok::Eof => {}
            other => return self.error(format!("expected end of line, found {}", describe(other))),
        }
        Ok(Binding { name, expr, line })
    }

    fn resolve(&self, name: String, line: usize, col: usize) -> Result<NameRef, ParseError> {
        if self.bound.contains(&name) {
            Ok(NameRef::Var(name))
        } else if name.contains('_') || name.contains('.') {
            Ok(NameRef::Attr(name))
        } else {
            Err(ParseError::UnboundVariable { name, line, col })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        let name = match self.next() {
            Tok::Ident(s) => s,
            other => {
                self.pos -= 1;
                return self.error(format!("expected an expression, found {}", describe(&other)));
            }
        };
        let lower = name.to_ascii_lowercase();
        if !is_keyword(&lower) {
            return Ok(match self.resolve(name, line, col)? {
                NameRef::Var(v) => Expr::Var(v),
                NameRef::Attr(a) => Expr::Attr(a),
            });
        }
        self.expect(Tok::LParen, "`(`")?;
        let e = match lower.as_str() {
            "krao" | "dot" => {
                let a = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.expr()?;
                if lower == "krao" {
                    Expr::Krao(Box::new(a), Box::new(b))
                } else {
                    Expr::Dot(Box::new(a), Box::new(b))
                }
            }
            "tr" => Expr::Tr(Box::new(self.expr()?)),
            "sum" => Expr::Sum(Box::new(self.expr()?)),
            "bool" => Expr::Bool(Box::new(self.expr()?)),
            "diag" => Expr::Diag(Box::new(self.expr()?)),
            "filter" => Expr::Filter(self.predicate()?),
            "lift" => Expr::Lift(self.scalar()?),
            "having" => {
                let m = self.expr()?;
                let op = self.cmp_op()?;
                let e = self.scalar()?;
                Expr::Having(Box::new(m), op, e)
            }
            _ => {
                self.pos -= 2;
                return self.error(format!("`{name}` is not an operation"));
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn cmp_op(&mut self) -> Result<CmpOp, ParseError> {
        match self.peek().clone() {
            Tok::Assign => {
                self.next();
                Ok(CmpOp::Eq)
            }
            Tok::Cmp(op) => {
                self.next();
                Ok(op)
            }
            other => self.error(format!("expected a comparison, found {}", describe(&other))),
        }
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let mut p = self.and_predicate()?;
        while self.eat_keyword("or") {
            p = Predicate::Or(Box::new(p), Box::new(self.and_predicate()?));
        }
        Ok(p)
    }

    fn and_predicate(&mut self) -> Result<Predicate, ParseError> {
        let mut p = self.not_predicate()?;
        while self.eat_keyword("and") {
            p = Predicate::And(Box::new(p), Box::new(self.not_predicate()?));
        }
        Ok(p)
    }

    fn not_predicate(&mut self) -> Result<Predicate, ParseError> {
        if self.eat_keyword("not") {
            return Ok(Predicate::Not(Box::new(self.not_predicate()?)));
        }
        if *self.peek() == Tok::LParen {
            self.next();
            let p = self.predicate()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(p);
        }
        self.atom()
    }

    fn attr_name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected an attribute, found {}", describe(&other))),
        }
    }

    fn atom(&mut self) -> Result<Predicate, ParseError> {
        let attr = self.attr_name()?;
        if self.eat_keyword("between") {
            let low = self.literal()?;
            self.expect_keyword("and")?;
            let high = self.literal()?;
            return Ok(Predicate::Between { attr, low, high });
        }
        let negated = self.eat_keyword("not");
        if self.eat_keyword("in") {
            self.expect(Tok::LParen, "`(`")?;
            let mut values = vec![self.literal()?];
            while *self.peek() == Tok::Comma {
                self.next();
                values.push(self.literal()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Predicate::In { attr, values, negated });
        }
        if self.eat_keyword("like") {
            return match self.next() {
                Tok::Str(pattern) => Ok(Predicate::Like { attr, pattern, negated }),
                other => {
                    self.pos -= 1;
                    self.error(format!("expected a pattern string, found {}", describe(&other)))
                }
            };
        }
        if negated {
            return self.error("expected `in` or `like` after `not`");
        }
        let op = self.cmp_op()?;
        if let Tok::Ident(s) = self.peek().clone() {
            if !is_keyword(&s) {
                self.next();
                return Ok(Predicate::CmpAttr { left: attr, op, right: s });
            }
        }
        let value = self.literal()?;
        Ok(Predicate::Cmp { attr, op, value })
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(Literal::Str(s))
            }
            Tok::Num(n) => {
                self.next();
                Ok(Literal::Num(n))
            }
            Tok::Minus => {
                self.next();
                match self.next() {
                    Tok::Num(n) => Ok(Literal::Num(-n)),
                    other => {
                        self.pos -= 1;
                        self.error(format!("expected a number, found {}", describe(&other)))
                    }
                }
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("date") => {
                self.next();
                match self.next() {
                    Tok::Str(d) => match parse_date(&d) {
                        Some(d) => Ok(Literal::Date(d)),
                        None => {
                            self.pos -= 1;
                            self.error(format!("`{d}` is not a YYYY-MM-DD date"))
                        }
                    },
                    other => {
                        self.pos -= 1;
                        self.error(format!("expected a date string, found {}", describe(&other)))
                    }
                }
            }
            other => self.error(format!("expected a literal, found {}", describe(&other))),
        }
    }

    fn scalar(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(e),
            };
            self.next();
            e = ScalarExpr::Bin(op, Box::new(e), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut e = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(e),
            };
            self.next();
            e = ScalarExpr::Bin(op, Box::new(e), Box::new(self.factor()?));
        }
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        let (line, col) = self.here();
        match self.next() {
            Tok::Minus => Ok(ScalarExpr::Neg(Box::new(self.factor()?))),
            Tok::Num(n) => Ok(ScalarExpr::Num(n)),
            Tok::LParen => {
                let e = self.scalar()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("case") => {
                self.expect_keyword("when")?;
                let when = self.predicate()?;
                self.expect_keyword("then")?;
                let then = self.scalar()?;
                self.expect_keyword("else")?;
                let otherwise = self.scalar()?;
                self.expect_keyword("end")?;
                Ok(ScalarExpr::Case { when, then: Box::new(then), otherwise: Box::new(otherwise) })
            }
            Tok::Ident(s) if !is_keyword(&s) => Ok(match self.resolve(s, line, col)? {
                NameRef::Var(v) => ScalarExpr::Var(v),
                NameRef::Attr(a) => ScalarExpr::Attr(a),
            }),
            other => {
                self.pos -= 1;
                self.error(format!("expected a value, found {}", describe(&other)))
            }
        }
    }
}

enum NameRef {
    Var(String),
    Attr(String),
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("number {n}"),
        Tok::Str(s) => format!("string '{s}'"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Cmp(op) => format!("`{}`", op.symbol()),
        Tok::Assign => "`=`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}
