//! The `.tmsr` problem language: parser, validator and canonical serializer.

mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeSet;
use std::fmt;

use parser::{Decl, Parser, RawPair, RawPost, RawRule};
pub use serialize::serialize;

use crate::semantics::{
    Configuration, CreatedFact, PairSpec, Problem, Rule, SemanticsError, SpecPair, TimestampedFact,
};
use crate::term::{Alphabet, Fact, TimedPattern, TIME};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub const START: Location = Location { line: 1, column: 1 };
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, location, message: message.into() }
    }

    pub fn warning(location: Location, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, location, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {kind}: {}", self.location, self.message)
    }
}

/// One or more error diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", render(.0))]
pub struct ParseError(pub Vec<Diagnostic>);

fn render(ds: &[Diagnostic]) -> String {
    ds.iter().map(Diagnostic::to_string).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Downgrade unbalanced rules from an error to a warning.
    pub allow_unbalanced: bool,
}

/// Declaration locations, indexed like the corresponding problem parts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub dmax: Option<Location>,
    pub init: Option<Location>,
    pub rules: Vec<Location>,
    pub critical: Vec<Location>,
    pub goal: Vec<Location>,
}

impl SourceMap {
    fn rule(&self, i: usize) -> Location {
        self.rules.get(i).copied().unwrap_or(Location::START)
    }

    fn pair(&self, critical: bool, i: usize) -> Location {
        let v = if critical { &self.critical } else { &self.goal };
        v.get(i).copied().unwrap_or(Location::START)
    }
}

/// A parsed source text. Holds a problem only if no error was reported.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub problem: Option<Problem>,
    pub diagnostics: Vec<Diagnostic>,
    pub source_map: SourceMap,
}

impl SourceSpec {
    pub fn parse(text: &str, options: &ParseOptions) -> Self {
        let mut spec = SourceSpec { problem: None, diagnostics: Vec::new(), source_map: SourceMap::default() };
        let decls = match Parser::new(text).and_then(|mut p| p.problem()) {
            Ok(d) => d,
            Err(d) => {
                spec.diagnostics.push(d);
                return spec;
            }
        };
        let built = build(decls, &mut spec.source_map, &mut spec.diagnostics);
        if let Some(p) = built {
            spec.diagnostics.extend(validate_with(&p, &spec.source_map, options));
            if !spec.diagnostics.iter().any(Diagnostic::is_error) {
                spec.problem = Some(p);
            }
        }
        spec.diagnostics.sort_by_key(|d| (d.location, d.severity));
        spec
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.is_error())
    }
}

/// Parses and validates with default options.
pub fn parse(text: &str) -> Result<Problem, ParseError> {
    parse_with(text, &ParseOptions::default()).map(|(p, _)| p)
}

/// Parses and validates; on success also returns the warnings.
pub fn parse_with(text: &str, options: &ParseOptions) -> Result<(Problem, Vec<Diagnostic>), ParseError> {
    let spec = SourceSpec::parse(text, options);
    match spec.problem {
        Some(p) => Ok((p, spec.diagnostics)),
        None => Err(ParseError(spec.diagnostics.into_iter().filter(Diagnostic::is_error).collect())),
    }
}

/// Parses a configuration literal such as `{Time@2, F(a)@0.4}`.
pub fn parse_configuration(text: &str) -> Result<Configuration, ParseError> {
    let one = |d: Diagnostic| ParseError(vec![d]);
    let mut p = Parser::new(text).map_err(one)?;
    let facts = p.configuration().map_err(one)?;
    p.at_end().map_err(one)?;
    let facts = facts.into_iter().map(|(f, t)| TimestampedFact::new(f, t)).collect();
    Configuration::new(facts).map_err(|e| one(Diagnostic::error(Location::START, e.to_string())))
}

pub(crate) fn parse_fact(text: &str) -> Result<Fact, ParseError> {
    let one = |d: Diagnostic| ParseError(vec![d]);
    let mut p = Parser::new(text).map_err(one)?;
    let f = p.fact().map_err(one)?;
    p.at_end().map_err(one)?;
    Ok(f)
}

fn build(decls: Vec<Decl>, map: &mut SourceMap, diags: &mut Vec<Diagnostic>) -> Option<Problem> {
    let mut dmax = None;
    let mut init = None;
    let mut rules = Vec::new();
    let mut critical = PairSpec::default();
    let mut goal = PairSpec::default();
    let mut ok = true;
    for d in decls {
        match d {
            Decl::Dmax(v, loc) => {
                if map.dmax.is_some() {
                    diags.push(Diagnostic::error(loc, "duplicate `dmax` declaration"));
                    ok = false;
                }
                map.dmax = Some(loc);
                dmax = v;
            }
            Decl::Init(facts, loc) => {
                if map.init.is_some() {
                    diags.push(Diagnostic::error(loc, "duplicate `init` declaration"));
                    ok = false;
                }
                map.init = Some(loc);
                let facts = facts.into_iter().map(|(f, t)| TimestampedFact::new(f, t)).collect();
                match Configuration::new(facts) {
                    Ok(c) => init = Some(c),
                    Err(e) => {
                        let msg = match e {
                            SemanticsError::MissingTime => "initial configuration has no Time fact".to_string(),
                            e => format!("initial configuration: {e}"),
                        };
                        diags.push(Diagnostic::error(loc, msg));
                        ok = false;
                    }
                }
            }
            Decl::Rule(raw) => {
                map.rules.push(raw.loc);
                match build_rule(raw) {
                    Ok(r) => rules.push(r),
                    Err(d) => {
                        diags.extend(d);
                        ok = false;
                    }
                }
            }
            Decl::Critical(raw) => {
                map.critical.push(raw.loc);
                critical.pairs.push(build_pair(raw));
            }
            Decl::Goal(raw) => {
                map.goal.push(raw.loc);
                goal.pairs.push(build_pair(raw));
            }
        }
    }
    let Some(initial) = init else {
        if ok {
            diags.push(Diagnostic::error(Location::START, "missing `init` declaration"));
        }
        return None;
    };
    if !ok {
        return None;
    }
    let mut p = Problem { alphabet: Alphabet::new(), rules, initial, critical, goal, k: 0, dmax: 0 };
    let mut alphabet = Alphabet::new();
    let facts: Vec<Fact> = p.all_facts().cloned().collect();
    for f in &facts {
        if let Err(e) = alphabet.declare_fact(f) {
            diags.push(Diagnostic::error(Location::START, e.to_string()));
            return None;
        }
    }
    p.alphabet = alphabet;
    p.k = facts.iter().map(Fact::size).max().unwrap_or(1);
    p.dmax = dmax.unwrap_or_else(|| p.auto_dmax());
    Some(p)
}

fn build_rule(raw: RawRule) -> Result<Rule, Vec<Diagnostic>> {
    let name = &raw.name;
    let mut errs = Vec::new();
    let times: Vec<&str> = raw.pre.iter().filter(|p| p.fact.is_time()).map(|p| p.time.as_str()).collect();
    let time_var = match times.as_slice() {
        [t] => Some(t.to_string()),
        [] => {
            errs.push(Diagnostic::error(raw.loc, format!("rule `{name}` has no Time fact in its pre-condition")));
            None
        }
        _ => {
            errs.push(Diagnostic::error(raw.loc, format!("rule `{name}` has several Time facts in its pre-condition")));
            None
        }
    };
    let mut kept = vec![false; raw.pre.len()];
    let mut created = Vec::new();
    let mut post_times = 0;
    for post in &raw.post {
        match post {
            RawPost::Kept(p) => {
                if p.fact.is_time() {
                    post_times += 1;
                }
                let hit = raw
                    .pre
                    .iter()
                    .enumerate()
                    .position(|(i, q)| !kept[i] && q.fact == p.fact && q.time == p.time);
                match hit {
                    Some(i) => kept[i] = true,
                    None => errs.push(Diagnostic::error(
                        p.loc,
                        format!(
                            "`{}@{}` in the post-condition of rule `{name}` is not in its pre-condition; \
                             created facts are written `F@(T + D)`",
                            p.fact, p.time
                        ),
                    )),
                }
            }
            RawPost::Created { fact, var, delay, loc } => {
                if fact.is_time() {
                    errs.push(Diagnostic::error(*loc, format!("rule `{name}` must keep Time as `Time@T`")));
                    post_times += 1;
                    continue;
                }
                if let Some(t) = &time_var {
                    if var != t {
                        errs.push(Diagnostic::error(
                            *loc,
                            format!("created fact `{fact}` must be timed relative to `{t}`, not `{var}`"),
                        ));
                    }
                }
                created.push(CreatedFact { fact: fact.clone(), delay: *delay });
            }
        }
    }
    if time_var.is_some() && post_times != 1 {
        errs.push(Diagnostic::error(
            raw.loc,
            format!("rule `{name}` must have exactly one `Time@T` in its post-condition"),
        ));
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    let consumed = (0..raw.pre.len()).filter(|&i| !kept[i]).collect();
    Ok(Rule {
        name: raw.name,
        pre: raw.pre.into_iter().map(|p| TimedPattern::new(p.fact, p.time)).collect(),
        guard: raw.guard,
        existentials: raw.existentials,
        created,
        consumed,
    })
}

fn build_pair(raw: RawPair) -> SpecPair {
    SpecPair {
        patterns: raw.patterns.into_iter().map(|p| TimedPattern::new(p.fact, p.time)).collect(),
        constraints: raw.constraints,
    }
}

/// Semantic checks on a problem with no source attached.
pub fn validate(p: &Problem) -> Vec<Diagnostic> {
    validate_with(p, &SourceMap::default(), &ParseOptions::default())
}

pub fn validate_with(p: &Problem, map: &SourceMap, options: &ParseOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut alphabet = Alphabet::new();
    for f in p.all_facts() {
        if f.predicate == TIME && !f.args.is_empty() {
            out.push(Diagnostic::error(Location::START, format!("Time takes no arguments, found `{f}`")));
        }
        if let Err(e) = alphabet.declare_fact(f) {
            out.push(Diagnostic::error(Location::START, e.to_string()));
        }
    }
    let mut names = BTreeSet::new();
    for (i, r) in p.rules.iter().enumerate() {
        let loc = map.rule(i);
        if !names.insert(&r.name) {
            out.push(Diagnostic::error(loc, format!("duplicate rule name `{}`", r.name)));
        }
        check_rule(r, loc, options, &mut out);
    }
    for (critical, spec) in [(true, &p.critical), (false, &p.goal)] {
        for (i, pair) in spec.pairs.iter().enumerate() {
            check_pair(pair, map.pair(critical, i), &mut out);
        }
    }
    let auto = p.auto_dmax();
    if p.dmax < auto {
        out.push(Diagnostic::error(
            map.dmax.unwrap_or(Location::START),
            format!("dmax {} is below the required bound {auto}", p.dmax),
        ));
    }
    if let Some(f) = p.all_facts().find(|f| f.size() > p.k) {
        out.push(Diagnostic::error(Location::START, format!("fact `{f}` exceeds the size bound {}", p.k)));
    }
    out
}

fn check_rule(r: &Rule, loc: Location, options: &ParseOptions, out: &mut Vec<Diagnostic>) {
    let name = &r.name;
    let mut err = |msg: String| out.push(Diagnostic::error(loc, msg));
    let time_idx: Vec<usize> = r.pre.iter().enumerate().filter(|(_, p)| p.fact.is_time()).map(|(i, _)| i).collect();
    if time_idx.len() != 1 {
        err(format!("rule `{name}` must have exactly one Time fact in its pre-condition"));
    } else if r.consumed.contains(&time_idx[0]) {
        err(format!("rule `{name}` must keep Time as `Time@T`"));
    }
    if r.consumed.iter().any(|&i| i >= r.pre.len()) {
        err(format!("rule `{name}` consumes a fact outside its pre-condition"));
    }
    let time_vars: BTreeSet<&str> = r.pre.iter().map(|p| p.time.as_str()).collect();
    let term_vars: BTreeSet<&str> = r.pre.iter().flat_map(|p| p.fact.variables()).collect();
    for c in &r.guard {
        for v in [&c.left, &c.right] {
            if !time_vars.contains(v.as_str()) {
                err(format!("guard variable `{v}` of rule `{name}` does not occur in its pre-condition"));
            }
        }
    }
    if let Some(v) = time_vars.intersection(&term_vars).next() {
        err(format!("`{v}` is used both as a time variable and a term variable in rule `{name}`"));
    }
    let mut seen = BTreeSet::new();
    for x in &r.existentials {
        if !seen.insert(x) {
            err(format!("existential `{x}` of rule `{name}` is declared twice"));
        }
        if term_vars.contains(x.as_str()) || time_vars.contains(x.as_str()) {
            err(format!("existential `{x}` of rule `{name}` occurs in its pre-condition"));
        }
        if !r.created.iter().any(|c| c.fact.variables().any(|v| v == x)) {
            err(format!("existential `{x}` of rule `{name}` is not used by any created fact"));
        }
    }
    for c in &r.created {
        for v in c.fact.variables() {
            if !term_vars.contains(v) && !r.existentials.iter().any(|x| x == v) {
                err(format!("variable `{v}` in created fact `{}` of rule `{name}` is not bound", c.fact));
            }
        }
    }
    let nonce = r.pre.iter().map(|p| &p.fact).chain(r.created.iter().map(|c| &c.fact)).find_map(|f| f.nonces().next());
    if let Some(n) = nonce {
        err(format!("rule `{name}` mentions nonce `{n}`; use an existential instead"));
    }
    if !r.is_balanced() {
        let msg = format!(
            "rule `{name}` is not balanced: consumes {}, creates {}",
            r.consumed.len(),
            r.created.len()
        );
        if options.allow_unbalanced {
            out.push(Diagnostic::warning(loc, format!("{msg}; completeness not guaranteed")));
        } else {
            out.push(Diagnostic::error(loc, msg));
        }
    }
}

fn check_pair(pair: &SpecPair, loc: Location, out: &mut Vec<Diagnostic>) {
    let time_vars: BTreeSet<&str> = pair.patterns.iter().map(|p| p.time.as_str()).collect();
    let term_vars: BTreeSet<&str> = pair.patterns.iter().flat_map(|p| p.fact.variables()).collect();
    for c in &pair.constraints {
        for v in [&c.left, &c.right] {
            if !time_vars.contains(v.as_str()) {
                out.push(Diagnostic::error(loc, format!("constraint variable `{v}` does not occur in the patterns")));
            }
        }
    }
    if let Some(v) = time_vars.intersection(&term_vars).next() {
        out.push(Diagnostic::error(loc, format!("`{v}` is used both as a time variable and a term variable")));
    }
}
