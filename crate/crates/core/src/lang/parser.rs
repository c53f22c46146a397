use super::lexer::{lex, Token};
use super::{Diagnostic, Location};
use crate::rational::{self, Rational};
use crate::semantics::{Constraint, Relation};
use crate::term::{is_nonce_name, is_variable_name, Fact, Term};

#[derive(Debug, Clone)]
pub(crate) struct RawPattern {
    pub fact: Fact,
    pub time: String,
    pub loc: Location,
}

#[derive(Debug, Clone)]
pub(crate) enum RawPost {
    Kept(RawPattern),
    Created { fact: Fact, var: String, delay: u64, loc: Location },
}

#[derive(Debug, Clone)]
pub(crate) struct RawRule {
    pub name: String,
    pub loc: Location,
    pub pre: Vec<RawPattern>,
    pub guard: Vec<Constraint>,
    pub existentials: Vec<String>,
    pub post: Vec<RawPost>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawPair {
    pub loc: Location,
    pub patterns: Vec<RawPattern>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub(crate) enum Decl {
    Dmax(Option<u64>, Location),
    Init(Vec<(Fact, Rational)>, Location),
    Rule(RawRule),
    Critical(RawPair),
    Goal(RawPair),
}

pub(crate) struct Parser {
    tokens: Vec<(Token, Location)>,
    pos: usize,
    end: Location,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Self> {
        let tokens = lex(text)?;
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().unwrap_or("");
        let end = Location { line: lines.max(1), column: last.chars().count() + 1 };
        Ok(Parser { tokens, pos: 0, end })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn loc(&self) -> Location {
        self.tokens.get(self.pos).map(|(_, l)| *l).unwrap_or(self.end)
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        let found = self.peek().map(Token::describe).unwrap_or_else(|| "end of input".into());
        Err(Diagnostic::error(self.loc(), format!("expected {wanted}, found {found}")))
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Token) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn ident(&mut self, wanted: &str) -> PResult<String> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(s)) if s == kw)
    }

    fn natural(&mut self) -> PResult<u64> {
        let loc = self.loc();
        match self.peek() {
            Some(Token::Number(s)) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let n = s.parse().map_err(|_| Diagnostic::error(loc, format!("number `{s}` is too large")))?;
                self.pos += 1;
                Ok(n)
            }
            _ => self.unexpected("a natural number"),
        }
    }

    fn rational(&mut self) -> PResult<Rational> {
        let loc = self.loc();
        match self.peek() {
            Some(Token::Number(s)) => {
                let r = rational::parse(s).map_err(|e| Diagnostic::error(loc, e.to_string()))?;
                self.pos += 1;
                Ok(r)
            }
            _ => self.unexpected("a timestamp"),
        }
    }

    fn time_var(&mut self) -> PResult<String> {
        let loc = self.loc();
        let v = self.ident("a time variable")?;
        if !is_variable_name(&v) {
            return Err(Diagnostic::error(loc, format!("time variable `{v}` must start with an uppercase letter")));
        }
        Ok(v)
    }

    pub(crate) fn problem(&mut self) -> PResult<Vec<Decl>> {
        let mut decls = Vec::new();
        while self.peek().is_some() {
            decls.push(self.decl()?);
        }
        Ok(decls)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let loc = self.loc();
        let kw = self.ident("a declaration (`dmax`, `init`, `rule`, `critical` or `goal`)")?;
        match kw.as_str() {
            "dmax" => {
                if self.keyword("auto") {
                    self.pos += 1;
                    Ok(Decl::Dmax(None, loc))
                } else {
                    Ok(Decl::Dmax(Some(self.natural()?), loc))
                }
            }
            "init" => Ok(Decl::Init(self.configuration()?, loc)),
            "rule" => self.rule(loc).map(Decl::Rule),
            "critical" => self.pair(loc).map(Decl::Critical),
            "goal" => self.pair(loc).map(Decl::Goal),
            _ => {
                self.pos -= 1;
                self.unexpected("a declaration (`dmax`, `init`, `rule`, `critical` or `goal`)")
            }
        }
    }

    pub(crate) fn configuration(&mut self) -> PResult<Vec<(Fact, Rational)>> {
        self.expect(&Token::LBrace)?;
        let mut facts = Vec::new();
        if self.eat(&Token::RBrace) {
            return Ok(facts);
        }
        loop {
            let loc = self.loc();
            let fact = self.fact()?;
            if let Some(v) = fact.variables().next() {
                return Err(Diagnostic::error(loc, format!("configuration fact `{fact}` contains variable `{v}`")));
            }
            self.expect(&Token::At)?;
            facts.push((fact, self.rational()?));
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        self.expect(&Token::RBrace)?;
        Ok(facts)
    }

    pub(crate) fn at_end(&self) -> PResult<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => self.unexpected("end of input"),
        }
    }

    pub(crate) fn fact(&mut self) -> PResult<Fact> {
        let loc = self.loc();
        let name = self.ident("a fact")?;
        if is_nonce_name(&name) {
            return Err(Diagnostic::error(loc, format!("`{name}` is reserved for nonces")));
        }
        Ok(Fact::new(name, self.arguments()?))
    }

    fn arguments(&mut self) -> PResult<Vec<Term>> {
        let mut args = Vec::new();
        if self.eat(&Token::LParen) {
            loop {
                args.push(self.term()?);
                if !self.eat(&Token::Comma) {
                    break;
                }
            }
            self.expect(&Token::RParen)?;
        }
        Ok(args)
    }

    fn term(&mut self) -> PResult<Term> {
        let loc = self.loc();
        let name = self.ident("a term")?;
        if self.peek() == Some(&Token::LParen) {
            if is_variable_name(&name) || is_nonce_name(&name) {
                return Err(Diagnostic::error(loc, format!("`{name}` cannot be applied to arguments")));
            }
            return Ok(Term::app(name, self.arguments()?));
        }
        Ok(if is_variable_name(&name) {
            Term::var(name)
        } else if is_nonce_name(&name) {
            Term::nonce(name)
        } else {
            Term::constant(name)
        })
    }

    fn pattern(&mut self) -> PResult<RawPattern> {
        let loc = self.loc();
        let fact = self.fact()?;
        self.expect(&Token::At)?;
        Ok(RawPattern { fact, time: self.time_var()?, loc })
    }

    fn patterns(&mut self) -> PResult<Vec<RawPattern>> {
        let mut out = vec![self.pattern()?];
        while self.eat(&Token::Comma) {
            out.push(self.pattern()?);
        }
        Ok(out)
    }

    fn guard(&mut self) -> PResult<Vec<Constraint>> {
        let mut out = Vec::new();
        if !self.eat(&Token::Bar) {
            return Ok(out);
        }
        loop {
            let left = self.time_var()?;
            let relation = match self.peek() {
                Some(Token::Gt) => Relation::Gt,
                Some(Token::Ge) => Relation::Ge,
                Some(Token::Eq) => Relation::Eq,
                _ => return self.unexpected("`>`, `>=` or `=`"),
            };
            self.pos += 1;
            let right = self.time_var()?;
            let offset = if self.eat(&Token::Plus) {
                self.offset()?
            } else if self.eat(&Token::Minus) {
                -self.offset()?
            } else {
                0
            };
            out.push(Constraint::new(left, relation, right, offset));
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn offset(&mut self) -> PResult<i64> {
        let loc = self.loc();
        let n = self.natural()?;
        i64::try_from(n).map_err(|_| Diagnostic::error(loc, format!("offset {n} is too large")))
    }

    fn rule(&mut self, loc: Location) -> PResult<RawRule> {
        let name = self.ident("a rule name")?;
        self.expect(&Token::Colon)?;
        let pre = self.patterns()?;
        let guard = self.guard()?;
        self.expect(&Token::Lolli)?;
        let mut existentials = Vec::new();
        if self.keyword("exists") {
            self.pos += 1;
            while let Some(Token::Ident(_)) = self.peek() {
                let vloc = self.loc();
                let v = self.ident("a variable")?;
                if !is_variable_name(&v) {
                    return Err(Diagnostic::error(vloc, format!("existential `{v}` must start with an uppercase letter")));
                }
                existentials.push(v);
            }
            if existentials.is_empty() {
                return self.unexpected("an existential variable");
            }
            self.expect(&Token::Dot)?;
        }
        let mut post = vec![self.post_pattern()?];
        while self.eat(&Token::Comma) {
            post.push(self.post_pattern()?);
        }
        Ok(RawRule { name, loc, pre, guard, existentials, post })
    }

    fn post_pattern(&mut self) -> PResult<RawPost> {
        let loc = self.loc();
        let fact = self.fact()?;
        self.expect(&Token::At)?;
        if self.eat(&Token::LParen) {
            let var = self.time_var()?;
            self.expect(&Token::Plus)?;
            let delay = self.natural()?;
            self.expect(&Token::RParen)?;
            Ok(RawPost::Created { fact, var, delay, loc })
        } else {
            Ok(RawPost::Kept(RawPattern { fact, time: self.time_var()?, loc }))
        }
    }

    fn pair(&mut self, loc: Location) -> PResult<RawPair> {
        self.expect(&Token::LBrace)?;
        let patterns = self.patterns()?;
        let constraints = self.guard()?;
        self.expect(&Token::RBrace)?;
        Ok(RawPair { loc, patterns, constraints })
    }
}
