//! SyGuS problem files: commands, grammar and PBE constraints.

use std::collections::BTreeSet;

use super::sexp::{read, Document, Pos, Sexp, SexpError};
use crate::ast::{Example, Op, Sort, Value};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Sexp(#[from] SexpError),
    #[error("{pos}: malformed `{command}`: {msg}")]
    Malformed {
        pos: Pos,
        command: String,
        msg: String,
    },
    #[error("{pos}: unknown sort `{name}`")]
    UnknownSort { pos: Pos, name: String },
    #[error("no synth-fun command")]
    NoSynthFun,
    #[error("{pos}: a second synth-fun is not supported")]
    SecondSynthFun { pos: Pos },
    #[error("{pos}: unsupported constraint `{form}` (only (= (f literal...) literal) is accepted)")]
    UnsupportedConstraint { pos: Pos, form: String },
    #[error("{pos}: example `{form}` does not match the signature of `{fun}`")]
    ExampleSort { pos: Pos, form: String, fun: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonTerminal {
    pub name: String,
    pub sort: Sort,
    pub productions: Vec<Sexp>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthFun {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    /// `None` when the file gives no grammar.
    pub grammar: Option<Vec<NonTerminal>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SygusFile {
    pub logic: Option<String>,
    pub synth_fun: SynthFun,
    pub declared_vars: Vec<(String, Sort)>,
    pub constraints: Vec<Sexp>,
    /// Examples read from the constraints, in file order.
    pub examples: Vec<Example>,
    /// `;; @key value` comment directives.
    pub directives: Vec<(String, String)>,
}

/// A recoverable oddity in the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub pos: Option<Pos>,
    pub msg: String,
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

fn malformed(pos: Pos, command: &str, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        pos,
        command: command.to_string(),
        msg: msg.into(),
    }
}

fn sort(pos: Pos, s: &Sexp) -> Result<Sort, ParseError> {
    let name = s.as_symbol().unwrap_or("");
    Sort::from_name(name).ok_or_else(|| ParseError::UnknownSort {
        pos,
        name: s.to_string(),
    })
}

fn typed_list(pos: Pos, command: &str, s: &Sexp) -> Result<Vec<(String, Sort)>, ParseError> {
    let items = s
        .as_list()
        .ok_or_else(|| malformed(pos, command, "expected a parameter list"))?;
    items
        .iter()
        .map(|p| match p.as_list() {
            Some([Sexp::Symbol(n), s]) => Ok((n.clone(), sort(pos, s)?)),
            _ => Err(malformed(pos, command, format!("bad parameter `{p}`"))),
        })
        .collect()
}

/// A literal value, accepting `(- n)` for negative integers.
pub fn literal(s: &Sexp) -> Option<Value> {
    match s {
        Sexp::Str(x) => Some(Value::Str(x.clone())),
        Sexp::Int(n) => Some(Value::Int(*n)),
        Sexp::Symbol(b) if b == "true" => Some(Value::Bool(true)),
        Sexp::Symbol(b) if b == "false" => Some(Value::Bool(false)),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Symbol(m), Sexp::Int(n)] if m == "-" => Some(Value::Int(-n)),
            _ => None,
        },
        _ => None,
    }
}

fn grammar_rule(pos: Pos, r: &Sexp) -> Result<NonTerminal, ParseError> {
    match r.as_list() {
        Some([Sexp::Symbol(name), s, Sexp::List(prods)]) => Ok(NonTerminal {
            name: name.clone(),
            sort: sort(pos, s)?,
            productions: prods.clone(),
        }),
        _ => Err(malformed(pos, "synth-fun", format!("bad grammar rule `{r}`"))),
    }
}

fn synth_fun(pos: Pos, xs: &[Sexp]) -> Result<SynthFun, ParseError> {
    let cmd = "synth-fun";
    let (name, params, ret, rest) = match xs {
        [_, Sexp::Symbol(n), ps, r, rest @ ..] => (n.clone(), ps, r, rest),
        _ => return Err(malformed(pos, cmd, "expected name, parameters and sort")),
    };
    let params = typed_list(pos, cmd, params)?;
    let ret = sort(pos, ret)?;
    let grammar = match rest {
        [] => None,
        // Version 1: rules only.
        [Sexp::List(rules)] => Some(
            rules
                .iter()
                .map(|r| grammar_rule(pos, r))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        // Version 2: declarations, then rules.
        [Sexp::List(decls), Sexp::List(rules)] => {
            let declared = typed_list(pos, cmd, &Sexp::List(decls.clone()))?;
            let rules = rules
                .iter()
                .map(|r| grammar_rule(pos, r))
                .collect::<Result<Vec<_>, _>>()?;
            for nt in &rules {
                if !declared.iter().any(|(n, s)| *n == nt.name && *s == nt.sort) {
                    return Err(malformed(
                        pos,
                        cmd,
                        format!("rule for undeclared nonterminal `{}`", nt.name),
                    ));
                }
            }
            Some(rules)
        }
        _ => return Err(malformed(pos, cmd, "unexpected trailing forms")),
    };
    Ok(SynthFun {
        name,
        params,
        ret,
        grammar,
    })
}

fn example(pos: Pos, c: &Sexp, f: &SynthFun) -> Result<Example, ParseError> {
    let unsupported = || ParseError::UnsupportedConstraint {
        pos,
        form: c.to_string(),
    };
    let (call, out) = match c.as_list() {
        Some([Sexp::Symbol(eq), a, b]) if eq == "=" => {
            if a.head() == Some(f.name.as_str()) {
                (a, b)
            } else if b.head() == Some(f.name.as_str()) {
                (b, a)
            } else {
                return Err(unsupported());
            }
        }
        _ => return Err(unsupported()),
    };
    let args = &call.as_list().ok_or_else(unsupported)?[1..];
    let inputs = args.iter().map(literal).collect::<Option<Vec<_>>>();
    let (Some(inputs), Some(output)) = (inputs, literal(out)) else {
        return Err(unsupported());
    };
    let sorts_ok = inputs.len() == f.params.len()
        && inputs.iter().zip(&f.params).all(|(v, (_, s))| v.sort() == *s)
        && output.sort() == f.ret;
    if !sorts_ok {
        return Err(ParseError::ExampleSort {
            pos,
            form: c.to_string(),
            fun: f.name.clone(),
        });
    }
    Ok(Example { inputs, output })
}

/// Parses a SyGuS file in either language version.
pub fn parse(text: &str) -> Result<SygusFile, ParseError> {
    parse_with_warnings(text).map(|(f, _)| f)
}

/// Like [`parse`], also returning warnings about ignored commands.
pub fn parse_with_warnings(text: &str) -> Result<(SygusFile, Vec<Warning>), ParseError> {
    let Document { forms, directives } = read(text)?;
    let mut warnings = Vec::new();
    let mut logic = None;
    let mut fun: Option<SynthFun> = None;
    let mut declared_vars = Vec::new();
    let mut constraints: Vec<(Pos, Sexp)> = Vec::new();
    for (pos, form) in forms {
        let Some(xs) = form.as_list() else {
            warnings.push(Warning {
                pos: Some(pos),
                msg: format!("ignoring stray atom `{form}`"),
            });
            continue;
        };
        match form.head() {
            Some("set-logic") => match xs {
                [_, Sexp::Symbol(l)] => logic = Some(l.clone()),
                _ => return Err(malformed(pos, "set-logic", "expected a logic name")),
            },
            Some("synth-fun") => {
                if fun.is_some() {
                    return Err(ParseError::SecondSynthFun { pos });
                }
                fun = Some(synth_fun(pos, xs)?);
            }
            Some("declare-var") => match xs {
                [_, Sexp::Symbol(n), s] => declared_vars.push((n.clone(), sort(pos, s)?)),
                _ => return Err(malformed(pos, "declare-var", "expected name and sort")),
            },
            Some("constraint") => match xs {
                [_, c] => constraints.push((pos, c.clone())),
                _ => return Err(malformed(pos, "constraint", "expected one term")),
            },
            Some("check-synth") => {}
            other => warnings.push(Warning {
                pos: Some(pos),
                msg: format!("ignoring command `{}`", other.unwrap_or("?")),
            }),
        }
    }
    let synth_fun = fun.ok_or(ParseError::NoSynthFun)?;
    let examples = constraints
        .iter()
        .map(|(pos, c)| example(*pos, c, &synth_fun))
        .collect::<Result<Vec<_>, _>>()?;
    let file = SygusFile {
        logic,
        synth_fun,
        declared_vars,
        constraints: constraints.into_iter().map(|(_, c)| c).collect(),
        examples,
        directives: directives.into_iter().map(|d| (d.key, d.value)).collect(),
    };
    Ok((file, warnings))
}

/// Literal pools mined from a file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstantPool {
    /// Literal terminals of the grammar, in order of appearance.
    pub grammar: Vec<Value>,
    /// Literals appearing in the examples, in order of appearance.
    pub examples: Vec<Value>,
}

impl ConstantPool {
    /// Every mined literal, grammar terminals first, without duplicates.
    pub fn union(&self) -> Vec<Value> {
        dedup(self.grammar.iter().chain(&self.examples).cloned())
    }

    /// The constants the search proposes: grammar terminals, plus example
    /// literals for sorts the grammar gives no terminal for.
    pub fn search_pool(&self) -> Vec<Value> {
        let covered: BTreeSet<Sort> = self.grammar.iter().map(Value::sort).collect();
        dedup(
            self.grammar
                .iter()
                .chain(self.examples.iter().filter(|v| !covered.contains(&v.sort())))
                .cloned(),
        )
    }

    pub fn of_sort(&self, sort: Sort) -> Vec<Value> {
        self.union().into_iter().filter(|v| v.sort() == sort).collect()
    }
}

fn dedup(it: impl Iterator<Item = Value>) -> Vec<Value> {
    let mut out: Vec<Value> = Vec::new();
    for v in it {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

pub fn mine_constants(file: &SygusFile) -> ConstantPool {
    let mut grammar = Vec::new();
    for nt in file.synth_fun.grammar.iter().flatten() {
        for p in &nt.productions {
            if let Some(v) = literal(p) {
                grammar.push(v);
            }
        }
    }
    let examples = file
        .examples
        .iter()
        .flat_map(|e| e.inputs.iter().chain([&e.output]))
        .cloned();
    ConstantPool {
        grammar: dedup(grammar.into_iter()),
        examples: dedup(examples),
    }
}

/// What the grammar lets the search build. Nonterminals of the same sort
/// are treated as interchangeable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarSummary {
    pub ops: Vec<Op>,
    /// Indices of parameters usable as leaves.
    pub params: Vec<usize>,
    /// Sorts with a `(Constant S)` production.
    pub any_constant: Vec<Sort>,
}

pub fn summarize_grammar(f: &SynthFun) -> (GrammarSummary, Vec<Warning>) {
    let mut warnings = Vec::new();
    let Some(rules) = &f.grammar else {
        let ops = Op::ALL
            .iter()
            .copied()
            .filter(|o| o.ret() != Sort::Bool)
            .collect();
        return (
            GrammarSummary {
                ops,
                params: (0..f.params.len()).collect(),
                any_constant: vec![Sort::String, Sort::Int],
            },
            warnings,
        );
    };
    let nonterminals: Vec<&str> = rules.iter().map(|r| r.name.as_str()).collect();
    let mut ops = BTreeSet::new();
    let mut params = BTreeSet::new();
    let mut any_constant = BTreeSet::new();
    for nt in rules {
        for p in &nt.productions {
            if literal(p).is_some() {
                continue;
            }
            match p {
                Sexp::Symbol(s) => {
                    if let Some(i) = f.params.iter().position(|(n, _)| n == s) {
                        params.insert(i);
                    } else if !nonterminals.contains(&s.as_str()) {
                        warnings.push(Warning {
                            pos: None,
                            msg: format!("ignoring unknown symbol `{s}` in rule `{}`", nt.name),
                        });
                    }
                }
                Sexp::List(xs) => match (p.head(), xs.get(1)) {
                    (Some("Constant"), Some(s)) => {
                        if let Some(s) = s.as_symbol().and_then(Sort::from_name) {
                            any_constant.insert(s);
                        }
                    }
                    (Some("Variable"), Some(s)) => {
                        if let Some(s) = s.as_symbol().and_then(Sort::from_name) {
                            for (i, (_, ps)) in f.params.iter().enumerate() {
                                if *ps == s {
                                    params.insert(i);
                                }
                            }
                        }
                    }
                    (Some(h), _) => match Op::from_name(h) {
                        Some(op) => {
                            ops.insert(op);
                        }
                        None => warnings.push(Warning {
                            pos: None,
                            msg: format!("ignoring production `{p}` (unsupported operator `{h}`)"),
                        }),
                    },
                    (None, _) => warnings.push(Warning {
                        pos: None,
                        msg: format!("ignoring production `{p}`"),
                    }),
                },
                _ => {}
            }
        }
    }
    let summary = GrammarSummary {
        ops: Op::ALL.iter().copied().filter(|o| ops.contains(o)).collect(),
        params: params.into_iter().collect(),
        any_constant: any_constant.into_iter().collect(),
    };
    (summary, warnings)
}
