use std::fmt::Write;

use super::parse::SygusFile;
use super::sexp::Sexp;
use crate::ast::Sort;

fn typed(xs: &[(String, Sort)]) -> String {
    let items: Vec<String> = xs.iter().map(|(n, s)| format!("({n} {s})")).collect();
    format!("({})", items.join(" "))
}

/// Writes `file` back as version 1 SyGuS text. Reparsing the output gives
/// an equal [`SygusFile`].
pub fn print(file: &SygusFile) -> String {
    let mut out = String::new();
    for (k, v) in &file.directives {
        if v.is_empty() {
            let _ = writeln!(out, ";; @{k}");
        } else {
            let _ = writeln!(out, ";; @{k} {v}");
        }
    }
    if let Some(l) = &file.logic {
        let _ = writeln!(out, "(set-logic {l})");
    }
    let f = &file.synth_fun;
    let _ = write!(out, "(synth-fun {} {} {}", f.name, typed(&f.params), f.ret);
    if let Some(rules) = &f.grammar {
        out.push_str("\n  (");
        for (i, nt) in rules.iter().enumerate() {
            if i > 0 {
                out.push_str("\n   ");
            }
            let prods = Sexp::List(nt.productions.clone());
            let _ = write!(out, "({} {} {prods})", nt.name, nt.sort);
        }
        out.push(')');
    }
    out.push_str(")\n");
    for (n, s) in &file.declared_vars {
        let _ = writeln!(out, "(declare-var {n} {s})");
    }
    for c in &file.constraints {
        let _ = writeln!(out, "(constraint {c})");
    }
    out.push_str("(check-synth)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn round_trip_with_grammar_and_quotes() {
        let text = r#";; @abs-out prefix:"Dr. "
(set-logic SLIA)
(synth-fun f ((a String) (b Int)) String
  ((S String (a "say ""hi""" (str.++ S S) (str.at S I)))
   (I Int (b 0 (- 2) (+ I I)))))
(constraint (= (f "x" (- 3)) "say ""hi"""))
(check-synth)
"#;
        let f = parse(text).unwrap();
        let printed = print(&f);
        assert_eq!(parse(&printed).unwrap(), f);
        assert_eq!(print(&parse(&printed).unwrap()), printed);
    }

    #[test]
    fn round_trip_without_grammar() {
        let f = parse(r#"(synth-fun f ((x String)) String) (constraint (= (f "a") "a"))"#).unwrap();
        assert_eq!(parse(&print(&f)).unwrap(), f);
    }
}
