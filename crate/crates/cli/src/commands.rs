use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tempora::circle::canonicalize;
use tempora::gen::{random_problem, ProblemShape};
use tempora::lang::{parse_configuration, parse_with, ParseError, ParseOptions};
use tempora::reach::json::{concrete_from_json, concrete_json, verdict_json, ConcreteTraceJson, VERSION};
use tempora::reach::{
    concrete_search, concretize_trace, problem_bound, solve, state_bound, validate_concrete_trace, ConcreteOptions,
    ConcreteStep, ConcreteTrace, Mode, SolveOptions, SymbolicStepKind, ValidationReport, ViolationKind,
};
use tempora::{abstract_config, compute_dmax, Problem};

use crate::{AbstractArgs, BoundArgs, CheckArgs, CliError, FuzzArgs, ModeArg, Outcome, ValidateArgs};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn diagnostics(origin: &str, e: ParseError) -> CliError {
    CliError::Diagnostics(e.0.iter().map(|d| format!("{origin}:{d}")).collect())
}

fn load(path: &Path, allow_unbalanced: bool) -> Result<Problem, CliError> {
    let text = read(path)?;
    let origin = path.display().to_string();
    let (p, warnings) = parse_with(&text, &ParseOptions { allow_unbalanced }).map_err(|e| diagnostics(&origin, e))?;
    for w in warnings {
        eprintln!("{origin}:{w}");
    }
    Ok(p)
}

fn exit(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

fn render_concrete(t: &ConcreteTrace, out: &mut String) {
    for step in &t.steps {
        match step {
            ConcreteStep::Tick { epsilon } => writeln!(out, "  tick {epsilon}"),
            ConcreteStep::Rule { rule, .. } => writeln!(out, "  rule {rule}"),
        }
        .unwrap();
    }
}

fn violation_json(r: &ValidationReport) -> Value {
    let Some(v) = &r.violation else { return Value::Null };
    let (kind, detail) = match &v.kind {
        ViolationKind::Critical { configuration, class } => {
            return json!({
                "step": v.step,
                "kind": "critical",
                "configuration": configuration.to_string(),
                "class": class.to_string(),
                "state": canonicalize(class).0,
            })
        }
        ViolationKind::UnknownRule { rule } => ("unknown-rule", rule.clone()),
        ViolationKind::NotApplicable { rule } => ("not-applicable", rule.clone()),
        ViolationKind::NegativeTick { epsilon } => ("negative-tick", epsilon.to_string()),
        ViolationKind::SizeBoundExceeded { fact } => ("size-bound", fact.clone()),
    };
    json!({ "step": v.step, "kind": kind, "detail": detail })
}

fn violation_text(r: &ValidationReport) -> String {
    let Some(v) = &r.violation else { return "no violation".into() };
    let at = v.step.map_or("start".to_string(), |s| format!("step {s}"));
    let what = match &v.kind {
        ViolationKind::Critical { configuration, class } => format!("critical configuration {configuration} in class {class}"),
        ViolationKind::UnknownRule { rule } => format!("unknown rule `{rule}`"),
        ViolationKind::NotApplicable { rule } => format!("rule `{rule}` is not applicable"),
        ViolationKind::NegativeTick { epsilon } => format!("negative tick {epsilon}"),
        ViolationKind::SizeBoundExceeded { fact } => format!("{fact} exceeds the fact size bound"),
    };
    format!("{at}: {what}")
}

pub fn check(a: &CheckArgs) -> Result<Outcome, CliError> {
    let mut p = load(&a.spec, a.allow_unbalanced)?;
    if let Some(d) = a.dmax {
        let need = p.auto_dmax();
        if d < need {
            return Err(CliError::Usage(format!("--dmax {d} is below the required bound {need}")));
        }
        p.dmax = d;
    }
    if let Some(depth) = a.concrete_depth {
        return check_concrete(&p, depth, a.max_states);
    }
    let options = SolveOptions {
        mode: if a.mode == ModeArg::Depth { Mode::Depth } else { Mode::Visited },
        workers: a.workers.max(1),
        max_states: a.max_states,
        ..SolveOptions::default()
    };
    let v = solve(&p, &options).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut payload = serde_json::to_value(verdict_json(&v)).expect("verdict serializes");
    let mut text = format!(
        "{}\nstates visited: {}\nbound: {}\n",
        if v.reachable { "reachable" } else { "unreachable" },
        v.states_visited,
        v.bound
    );
    if let Some(t) = &v.trace {
        writeln!(text, "trace:\n  start {}", t.start).unwrap();
        for s in &t.steps {
            let label = match &s.kind {
                SymbolicStepKind::Next => "next".to_string(),
                SymbolicStepKind::Rule { rule, .. } => format!("rule {rule}"),
            };
            writeln!(text, "  {label} -> {}", s.result).unwrap();
        }
        if a.witness {
            let ct = concretize_trace(t, &p).map_err(|e| CliError::Usage(format!("witness: {e}")))?;
            let report = validate_concrete_trace(&ct, &p, true).map_err(|e| CliError::Usage(format!("witness: {e}")))?;
            if !report.is_valid() {
                return Err(CliError::Usage(format!("witness failed validation: {}", violation_text(&report))));
            }
            writeln!(text, "witness (validated):\n  start {}", ct.start).unwrap();
            render_concrete(&ct, &mut text);
            payload["witness"] = serde_json::to_value(concrete_json(&ct, p.dmax)).expect("trace serializes");
        }
    }
    Ok(Outcome { code: exit(v.reachable), text, payload })
}

fn check_concrete(p: &Problem, depth: usize, max_states: Option<u64>) -> Result<Outcome, CliError> {
    let options = ConcreteOptions { max_depth: Some(depth), max_states: max_states.map(|n| n as usize) };
    let v = concrete_search(p, &options).map_err(|e| CliError::Usage(e.to_string()))?;
    let verdict = match (v.reachable, v.complete) {
        (true, _) => "reachable".to_string(),
        (false, true) => "unreachable".to_string(),
        (false, false) => format!("unreachable within depth {depth} (incomplete)"),
    };
    let mut text = format!("{verdict}\nstates visited: {}\n", v.states_visited);
    let trace = v.trace.as_ref().map(|t| {
        writeln!(text, "trace:\n  start {}", t.start).unwrap();
        render_concrete(t, &mut text);
        concrete_json(t, p.dmax)
    });
    let payload = json!({
        "version": VERSION,
        "reachable": v.reachable,
        "complete": v.complete,
        "statesVisited": v.states_visited,
        "trace": trace.map_or(Value::Array(Vec::new()), |t| serde_json::to_value(t.trace).unwrap()),
    });
    Ok(Outcome { code: exit(v.reachable), text, payload })
}

pub fn abstract_cmd(a: &AbstractArgs) -> Result<Outcome, CliError> {
    let literal = a.input.trim_start().starts_with('{');
    let (origin, text) = if literal {
        ("<argument>".to_string(), a.input.clone())
    } else {
        (a.input.clone(), read(Path::new(&a.input))?)
    };
    let (s, declared) = if text.trim_start().starts_with('{') {
        (parse_configuration(&text).map_err(|e| diagnostics(&origin, e))?, None)
    } else {
        let (p, _) = parse_with(&text, &ParseOptions { allow_unbalanced: true }).map_err(|e| diagnostics(&origin, e))?;
        (p.initial, Some(p.dmax))
    };
    let times: Vec<_> = s.facts().iter().map(|f| f.time.clone()).collect();
    let dmax = a.dmax.or(declared).unwrap_or_else(|| compute_dmax(&times));
    let c = abstract_config(&s, dmax);
    let payload = json!({ "dmax": dmax, "circle": c.to_string(), "state": canonicalize(&c).0 });
    Ok(Outcome { code: 0, text: format!("{c}\n"), payload })
}

pub fn bound(a: &BoundArgs) -> Result<Outcome, CliError> {
    let from_spec = match &a.spec {
        Some(path) => {
            let p = load(path, true)?;
            Some([p.alphabet.j() as u64, p.alphabet.e() as u64, p.m() as u64, p.k as u64, p.dmax])
        }
        None => None,
    };
    let flags = [a.j, a.e, a.m, a.k, a.dmax];
    let names = ["--preds", "--symbols", "--m", "--k", "--dmax"];
    let mut values = [0u64; 5];
    let mut missing = Vec::new();
    for i in 0..5 {
        match flags[i].or(from_spec.map(|v| v[i])) {
            Some(v) => values[i] = v,
            None => missing.push(names[i]),
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Usage(format!("give a spec or all of {}", missing.join(", "))));
    }
    let [j, e, m, k, dmax] = values;
    let l = state_bound(j, e, m, k, dmax);
    let text = format!("J={j} E={e} m={m} k={k} dmax={dmax}\nL={l}\n");
    let payload = json!({ "j": j, "e": e, "m": m, "k": k, "dmax": dmax, "bound": l.to_string() });
    Ok(Outcome { code: 0, text, payload })
}

pub fn validate(a: &ValidateArgs) -> Result<Outcome, CliError> {
    let p = load(&a.spec, true)?;
    let raw = read(&a.trace)?;
    let origin = a.trace.display().to_string();
    let j: ConcreteTraceJson =
        serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("{origin}: schema violation: {e}")))?;
    let t = concrete_from_json(&j, &p.initial).map_err(|e| CliError::Usage(format!("{origin}: schema violation: {e}")))?;
    let report = validate_concrete_trace(&t, &p, !a.no_goal).map_err(|e| CliError::Usage(e.to_string()))?;
    let valid = report.is_valid();
    let mut text = if valid { "valid\n".to_string() } else { "invalid\n".to_string() };
    if report.violation.is_some() {
        writeln!(text, "violation at {}", violation_text(&report)).unwrap();
    } else if report.goal_reached == Some(false) {
        writeln!(text, "the trace does not end in a goal configuration").unwrap();
    }
    writeln!(text, "final: {}", report.final_configuration).unwrap();
    let payload = json!({
        "valid": valid,
        "goalReached": report.goal_reached,
        "violation": violation_json(&report),
        "final": report.final_configuration.to_string(),
    });
    Ok(Outcome { code: exit(valid), text, payload })
}

/// Seed for the fuzz subcommand; the only environment input of the CLI.
fn seed() -> Result<u64, CliError> {
    match std::env::var("TEMPORA_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("TEMPORA_SEED `{s}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn fuzz(a: &FuzzArgs) -> Result<Outcome, CliError> {
    let seed = seed()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut reachable = 0;
    for i in 0..a.count {
        let (text, p) = random_problem(&mut rng, ProblemShape::default())
            .map_err(|e| CliError::Usage(format!("generator produced an invalid problem: {e}")))?;
        let v = solve(&p, &SolveOptions::default()).map_err(|e| CliError::Usage(e.to_string()))?;
        let c = concrete_search(&p, &ConcreteOptions::default()).map_err(|e| CliError::Usage(e.to_string()))?;
        let witness_ok = v.trace.as_ref().is_none_or(|t| {
            concretize_trace(t, &p).ok().and_then(|ct| validate_concrete_trace(&ct, &p, true).ok()).is_some_and(|r| r.is_valid())
        });
        let over = num_bigint::BigUint::from(v.states_visited) > problem_bound(&p);
        reachable += usize::from(v.reachable);
        if v.reachable != c.reachable || !witness_ok || over {
            failures.push(json!({ "index": i, "symbolic": v.reachable, "concrete": c.reachable, "witnessValid": witness_ok, "spec": text }));
        }
    }
    let mut text = format!("seed {seed}: {} problems, {reachable} reachable, {} failures\n", a.count, failures.len());
    for f in &failures {
        writeln!(text, "--- problem {}\n{}", f["index"], f["spec"].as_str().unwrap_or_default()).unwrap();
    }
    let ok = failures.is_empty();
    let payload = json!({ "seed": seed, "count": a.count, "reachable": reachable, "failures": failures });
    Ok(Outcome { code: exit(ok), text, payload })
}
