//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod support;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strsynth::absint::{abs_eval, satisfies_goal};
use strsynth::ast::{Example, HoleId, Op, Sort, Term, Value};
use strsynth::domains::{default_domains, len_elem};
use strsynth::interp::eval;
use strsynth::lattice::{AbsEnv, Abstraction, BoundsEnv, DomainId, Payload, ProductAbs, VarId};
use strsynth::solver::{LinExpr, SatResult};
use strsynth::sygus::{cli, solve_file, RunConfig};
use strsynth::synth::{synthesize, AbsSpec, Problem, SynthConfig};
use support::{
    brute_force, build_system, eval_with_hole, projection, random_string, random_term, reachable_values, value_ops,
    Enumerator, RawConstraint,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn corpus(task: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(format!("{task}.sl"))
}

fn top_config() -> RunConfig {
    RunConfig {
        use_directives: false,
        ..RunConfig::default()
    }
}

/// Reference solution sizes; a solution may be up to two nodes larger.
const SIZES: &[(&str, usize)] = &[
    ("firstname", 7),
    ("lastname", 10),
    ("phone", 4),
    ("phone-1", 6),
    ("phone-2", 7),
    ("phone-4", 4),
    ("phone-5", 7),
    ("name-combine", 5),
    ("reverse-name", 5),
    ("bikes", 7),
];

fn criterion_1() -> Check {
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    for &(task, reference) in SIZES {
        let r = solve_file(&corpus(task), &top_config()).map_err(|e| e.to_string())?;
        let secs = r.stats.elapsed.as_secs_f64();
        match r.solution() {
            Some(p) if p.body.size() <= reference + 2 && r.stats.elapsed <= Duration::from_secs(60) => {
                notes.push(format!("{task}={}/{:.2}s", p.body.size(), secs));
            }
            Some(p) => bad.push(format!("{task}: size {} in {secs:.2}s", p.body.size())),
            None => bad.push(format!("{task}: {:?}", r.outcome)),
        }
    }
    if bad.is_empty() {
        Ok(format!("10/10 solved at Top->Top: {}", notes.join(" ")))
    } else {
        Err(bad.join("; "))
    }
}

fn criterion_2() -> Check {
    let budget = RunConfig {
        abs_out: vec!["prefix:\"Dr. \"".into()],
        ..top_config()
    };
    let spec = solve_file(&corpus("dr-name"), &budget).map_err(|e| e.to_string())?;
    let top = solve_file(&corpus("dr-name"), &top_config()).map_err(|e| e.to_string())?;
    let line = format!(
        "dr-name prefix \"Dr. \": solved={} eliminated={} tested={} vs Top->Top tested={}",
        spec.solution().is_some(),
        spec.stats.eliminated,
        spec.stats.tested,
        top.stats.tested
    );
    if spec.solution().is_some() && spec.stats.eliminated > 0 && spec.stats.tested < top.stats.tested {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_3() -> Check {
    let path = corpus("lastname");
    let base = solve_file(&path, &top_config()).map_err(|e| e.to_string())?;
    let mut no_templates = top_config();
    no_templates.synth.use_templates = false;
    let nt = solve_file(&path, &no_templates).map_err(|e| e.to_string())?;
    let mut no_cache = top_config();
    no_cache.synth.use_cache = false;
    let nc = solve_file(&path, &no_cache).map_err(|e| e.to_string())?;
    let line = format!(
        "lastname: tested {} (no templates) vs {}; generated {} (no cache) vs {}",
        nt.stats.tested, base.stats.tested, nc.stats.generated, base.stats.generated
    );
    if nt.stats.tested >= base.stats.tested && nc.stats.generated >= base.stats.generated {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_4() -> Check {
    let domains = default_domains();
    let ops = value_ops();
    let params = [("x", Sort::String), ("y", Sort::String), ("n", Sort::Int)];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut elems) = (0u64, 0u64);
    while checked < 10_000 {
        let sort = if rng.gen_bool(0.7) { Sort::String } else { Sort::Int };
        let t = random_term(&mut rng, sort, 9, &params, &ops);
        let x = random_string(&mut rng, 6);
        let y = random_string(&mut rng, 6);
        let n = rng.gen_range(-2..=8);
        let inputs = [
            ("x", Value::Str(x)),
            ("y", Value::Str(y)),
            ("n", Value::Int(n)),
        ];
        let cenv = inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        let Ok(concrete) = eval(&t, &cenv) else {
            continue;
        };
        let mut aenv = AbsEnv::new();
        for (k, v) in &inputs {
            aenv.bind(*k, ProductAbs::new(domains.iter().map(|d| d.alpha(v)).collect()));
        }
        let r = abs_eval(&domains, &aenv, BoundsEnv::new(64), &t).map_err(|e| e.to_string())?;
        for (d, a) in domains.iter().zip(&r.value.0) {
            if let Abstraction::Elem(e) = a {
                elems += 1;
                if !d.member(&concrete, e) {
                    return Err(format!("{t} on {inputs:?}: {concrete} not in {e}"));
                }
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} random terms of size <= 9, {elems} element results, 0 violations"))
}

fn criterion_5() -> Check {
    let domains = default_domains();
    let ops = value_ops();
    let pool = [Value::Str(" ".into()), Value::Int(1)];
    let pre = |s: &str| Abstraction::elem(DomainId::Prefix, Payload::Str(s.into()));
    let suf = |s: &str| Abstraction::elem(DomainId::Suffix, Payload::Str(s.into()));
    let len = |n: i64| len_elem(LinExpr::constant(n));
    let top = || Abstraction::Top;
    let goals = [
        ProductAbs::new(vec![pre("Dr. "), top(), top()]),
        ProductAbs::new(vec![top(), suf("."), top()]),
        ProductAbs::new(vec![top(), top(), len(3)]),
        ProductAbs::new(vec![pre("a"), top(), len(1)]),
        ProductAbs::new(vec![pre(" "), suf(" "), top()]),
        ProductAbs::new(vec![top(), top(), len(0)]),
    ];
    let inputs = ["Dr. Who", "ab", "", "a b.", " x "];

    let mut benv = BoundsEnv::new(16);
    let vars: Vec<Abstraction> = (0..domains.len())
        .map(|i| {
            benv.introduce(VarId(i as u32));
            Abstraction::Var(VarId(i as u32))
        })
        .collect();
    let labels = [ProductAbs::new(vars), ProductAbs::top(domains.len())];
    let mut leaves: Vec<(Term, Sort)> = pool.iter().map(|v| (Term::Const(v.clone()), v.sort())).collect();
    leaves.push((Term::var("x"), Sort::String));
    let mut partials = Vec::new();
    for label in &labels {
        let mut ls = leaves.clone();
        for s in [Sort::String, Sort::Int] {
            ls.push((Term::hole(HoleId(0), s, label.clone()), s));
        }
        let en = Enumerator::new(&ls, &ops, 5);
        partials.extend(
            en.all_of(Sort::String)
                .filter(|t| t.holes().len() == 1)
                .cloned(),
        );
    }

    let mut aenv = AbsEnv::new();
    aenv.bind("x", ProductAbs::top(domains.len()));
    let fillings: Vec<_> = inputs
        .iter()
        .map(|x| {
            let mut ls = pool.to_vec();
            ls.push(Value::Str(x.to_string()));
            reachable_values(&ls, &ops, 3)
        })
        .collect();

    let (mut refuted, mut checked) = (0u64, 0u64);
    for t in &partials {
        let hole_sort = t.holes()[0].1.sort;
        for g in &goals {
            let (ok, _) = satisfies_goal(&domains, &aenv, benv.clone(), t, g).map_err(|e| e.to_string())?;
            if ok {
                continue;
            }
            refuted += 1;
            for (x, vals) in inputs.iter().zip(&fillings) {
                let env = [("x", Value::Str(x.to_string()))];
                for v in vals.get(&hole_sort).into_iter().flatten() {
                    checked += 1;
                    let Some(out) = eval_with_hole(t, &env, Some(v)) else {
                        continue;
                    };
                    let inside = domains.iter().zip(&g.0).all(|(d, a)| match a {
                        Abstraction::Elem(e) => d.member(&out, e),
                        _ => true,
                    });
                    if inside {
                        return Err(format!("{t} refuted for {g} but hole := {v} on x = {x:?} gives {out}"));
                    }
                }
            }
        }
    }
    if refuted == 0 {
        return Err("no partial term was refuted; the check is vacuous".into());
    }
    Ok(format!(
        "{} one-hole partial terms x {} goals: {refuted} refuted, {checked} fillings checked, 0 violations",
        partials.len(),
        goals.len()
    ))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut sat, mut unsat) = (0, 0);
    for round in 0..1000 {
        let n = rng.gen_range(1..=4);
        let bounds: Vec<(i64, i64)> = (0..n)
            .map(|_| {
                let a = rng.gen_range(0..=30);
                let b = rng.gen_range(0..=30);
                if rng.gen_bool(0.5) {
                    (0, 30)
                } else {
                    (a.min(b), a.max(b))
                }
            })
            .collect();
        let m = rng.gen_range(0..=6);
        let raw: Vec<RawConstraint> = (0..m)
            .map(|_| RawConstraint {
                coeffs: (0..n).map(|_| rng.gen_range(-3..=3)).collect(),
                constant: rng.gen_range(-40..=40),
                eq: rng.gen_bool(0.3),
            })
            .collect();
        let (ctx, vars) = build_system(&bounds, &raw);
        let models = brute_force(&bounds, &raw);
        let expect = if models.is_empty() {
            SatResult::Unsat
        } else {
            SatResult::Sat
        };
        let got = ctx.check_sat();
        if got != expect {
            return Err(format!("round {round}: check_sat {got:?}, brute force {expect:?}"));
        }
        if models.is_empty() {
            unsat += 1;
        } else {
            sat += 1;
        }
        for (i, &v) in vars.iter().enumerate() {
            let want = projection(&models, i);
            let got = ctx.solve_for(v, 64);
            if !got.complete || got.values != want {
                return Err(format!(
                    "round {round}: solve_for x{i} = {:?} (complete {}), brute force {want:?}",
                    got.values, got.complete
                ));
            }
        }
    }
    Ok(format!("1000 random systems ({sat} sat, {unsat} unsat): check_sat and solve_for agree with brute force"))
}

fn criterion_7() -> Check {
    let pool = vec![Value::Str(" ".into()), Value::Int(1)];
    let examples = vec![Example {
        inputs: vec![Value::Str("ab".into())],
        output: Value::Str("no such output".into()),
    }];
    let problem = Problem::new("f", vec![("x".into(), Sort::String)], Sort::String, examples, pool.clone());
    let config = SynthConfig {
        max_size: 5,
        trace: true,
        ..SynthConfig::default()
    };
    let r = synthesize(&problem, &AbsSpec::default_for(&problem), &config).map_err(|e| e.to_string())?;
    let tested: Vec<String> = r.tested_terms.iter().map(|t| t.to_string()).collect();
    let tested_set: BTreeSet<&String> = tested.iter().collect();
    let mut leaves: Vec<(Term, Sort)> = pool.iter().map(|v| (Term::Const(v.clone()), v.sort())).collect();
    leaves.push((Term::var("x"), Sort::String));
    let ops: Vec<Op> = value_ops();
    let en = Enumerator::new(&leaves, &ops, 5);
    let expected: BTreeSet<String> = en.all_of(Sort::String).map(|t| t.to_string()).collect();
    let missing = expected.iter().filter(|t| !tested_set.contains(t)).count();
    let extra = tested_set.iter().filter(|t| !expected.contains(**t)).count();
    let line = format!(
        "{} tested (distinct {}), enumerator {}: missing {missing}, extra {extra}",
        tested.len(),
        tested_set.len(),
        expected.len()
    );
    if missing == 0 && extra == 0 && tested.len() == tested_set.len() {
        Ok(line)
    } else {
        Err(line)
    }
}

fn bench_once(stats: &Path) -> Result<(i32, String, serde_json::Value), String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run_with(
        [
            "strsynth".as_ref(),
            "bench".as_ref(),
            dir.as_os_str(),
            "--stats".as_ref(),
            stats.as_os_str(),
        ],
        &mut out,
        &mut err,
    );
    let mut json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(stats).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    for row in json.as_array_mut().into_iter().flatten() {
        row.as_object_mut().map(|o| o.remove("time_ms"));
    }
    let out = String::from_utf8(out).map_err(|e| e.to_string())?;
    let solutions = out.split_once("\n\n").map(|(_, s)| s.to_string()).unwrap_or_default();
    Ok((code, solutions, json))
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = bench_once(&dir.path().join("a.json"))?;
    let b = bench_once(&dir.path().join("b.json"))?;
    let rows = a.2.as_array().map_or(0, Vec::len);
    if a == b && rows > 0 {
        Ok(format!("two bench runs over {rows} tasks: identical solutions and counts"))
    } else {
        Err(format!("runs differ:\n{}\n---\n{}", a.1, b.1))
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("benchmarks at Top->Top", criterion_1),
        ("pruning efficacy", criterion_2),
        ("optimization ablations", criterion_3),
        ("transfer soundness", criterion_4),
        ("pruning soundness", criterion_5),
        ("solver oracle", criterion_6),
        ("enumeration completeness", criterion_7),
        ("determinism", criterion_8),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        match check() {
            Ok(msg) => println!("criterion {n} PASS ({name}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} FAIL ({name}): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
