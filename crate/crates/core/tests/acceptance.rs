//! End-to-end acceptance checks. Each criterion prints one `[PASS]` or
//! `[FAIL]` line with its wall time and fails the test when a check or a
//! time limit is missed.

mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write as _;
use std::time::{Duration, Instant};

use easpec_core::gen::{bta_program, kappa_program, replace_subterm, subterm_count, Gen, Palette};
use easpec_core::interp::run;
use easpec_core::opt::{alias_elimination, merge_compatible, remove_redundant_ifs, RewriteSet};
use easpec_core::{
    analyze, build_dependency_graph, check_equivalence, eval_term, optimize, parse_residual,
    preprocess, run_pipeline, specialize, Classification, DeclKind, HaltReason, InputMode, KRule,
    Mode, PipelineConfig, PipelineOutput, Polarity, Program, ReducedState, ResidualProgram, Rule,
    State, Term, Value,
};

use common::{program, state, CORPUS};

const ALIAS_LIMIT: Duration = Duration::from_secs(1);
const MERGE_LIMIT: Duration = Duration::from_secs(1);
const IFS_LIMIT: Duration = Duration::from_secs(1);
const CONS_LIMIT: Duration = Duration::from_secs(1);
const STRCPY_LIMIT: Duration = Duration::from_secs(10);
const SELFINT_LIMIT: Duration = Duration::from_secs(60);
const PREPROCESS_LIMIT: Duration = Duration::from_secs(30);
const MASTER_LIMIT: Duration = Duration::from_secs(60);
const CLOSURE_LIMIT: Duration = Duration::from_secs(30);
const BTA_LIMIT: Duration = Duration::from_secs(10);

const MAX_STEPS: usize = 200;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion(n: usize, title: &str, limit: Duration, body: impl FnOnce() -> Check) {
    let t0 = Instant::now();
    let result = body();
    let took = t0.elapsed();
    let result = result.and_then(|()| {
        if took <= limit {
            Ok(())
        } else {
            Err(format!("took {took:?}, limit {limit:?}"))
        }
    });
    let line = match &result {
        Ok(()) => format!("[PASS] {n:>2} {title} ({took:.2?} / {limit:?})\n"),
        Err(e) => format!("[FAIL] {n:>2} {title} ({took:.2?} / {limit:?}): {e}\n"),
    };
    // Written to the raw handle so the line shows even when output is captured.
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(e) = result {
        panic!("criterion {n} failed: {e}");
    }
}

fn residual(text: &str) -> ResidualProgram {
    let p = parse_residual(text).expect("residual parses");
    ResidualProgram::from_program(&p, &[]).expect("well-formed residual")
}

fn observed(cls: &Classification) -> BTreeSet<String> {
    cls.with(Polarity::Negative).into_iter().collect()
}

fn negative_part(s: &State, cls: &Classification) -> State {
    s.restrict(|n| cls.is_negative(n))
}

#[test]
fn c01_alias_elimination() {
    criterion(1, "alias elimination of b := c", ALIAS_LIMIT, || {
        let before = residual(
            "if =(K, \"κ1\") then do b := c K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do a := b K := \"κ3\" enddo endif",
        );
        let expected = residual(
            "if =(K, \"κ1\") then do K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do a := c K := \"κ3\" enddo endif",
        );
        let after = alias_elimination(&before);
        ensure!(
            after == expected,
            "got\n{}",
            easpec_core::emit_program(&after.to_program())
        );
        Ok(())
    });
}

#[test]
fn c02_compatible_merge() {
    criterion(2, "compatible rules merge into one", MERGE_LIMIT, || {
        let before = residual(
            "if =(K, \"κ1\") then do a := b K := \"κ2\" enddo endif
             if =(K, \"κ2\") then do c := d K := \"κ3\" enddo endif",
        );
        let expected = residual("if =(K, \"κ1\") then do a := b c := d K := \"κ3\" enddo endif");
        let after = merge_compatible(&before);
        ensure!(
            after == expected,
            "got\n{}",
            easpec_core::emit_program(&after.to_program())
        );
        Ok(())
    });
}

/// True when some conditional in `r` has every branch equal to its else
/// part, i.e. would itself be collapsed.
fn has_redundant_if(r: &Rule) -> bool {
    match r {
        Rule::Update(_) => false,
        Rule::Block(rs) => rs.iter().any(has_redundant_if),
        Rule::Cond(c) => {
            let else_body = c.else_body.as_deref().cloned().unwrap_or_else(Rule::skip);
            c.branches.iter().all(|(_, b)| *b == else_body)
                || c.branches.iter().any(|(_, b)| has_redundant_if(b))
                || has_redundant_if(&else_body)
        }
    }
}

#[test]
fn c03_redundant_ifs() {
    criterion(3, "if g then R else R is R (50 rules)", IFS_LIMIT, || {
        let pal = Palette::nullary("v", 4, Palette::small_pool());
        let mut g = Gen::new(0x1f5);
        let mut done = 0;
        while done < 50 {
            let r = g.rule(&pal, 12);
            if has_redundant_if(&r) {
                continue;
            }
            let guard = g.guard(&pal, 2);
            let rp = ResidualProgram {
                decls: Vec::new(),
                krules: vec![KRule {
                    label: "κ0".into(),
                    kappa: ReducedState::project(&State::new(), &Classification::new()),
                    body: Rule::if_else(guard, r.clone(), r.clone()),
                }],
                initial: "κ0".into(),
            };
            let out = remove_redundant_ifs(&rp);
            ensure!(
                out.krules[0].body == r,
                "case {done}: {} became {}",
                r,
                out.krules[0].body
            );
            done += 1;
        }
        Ok(())
    });
}

#[test]
fn c04_car_cdr_cons() {
    criterion(4, "Car/Cdr of Cons in 50 contexts", CONS_LIMIT, || {
        let mut pal = Palette::nullary("v", 4, Vec::new());
        pal.literals = false;
        let set = RewriteSet::standard();
        let mut g = Gen::new(0xca7);
        for case in 0..50 {
            let ctx = g.rule(&pal, 14);
            let a = g.term(&pal, 2);
            let b = g.term(&pal, 2);
            let at = g.below(subterm_count(&ctx));
            let pair = Term::app("Cons", vec![a.clone(), b.clone()]);
            for (proj, want) in [("Car", &a), ("Cdr", &b)] {
                let input = replace_subterm(&ctx, at, &Term::app(proj, vec![pair.clone()]));
                let expected = replace_subterm(&ctx, at, want);
                let got = set.rewrite_rule(&input);
                ensure!(
                    got == expected,
                    "case {case} {proj}: {input} gave {got}, want {expected}"
                );
            }
        }
        Ok(())
    });
}

/// Code plus a memory image holding `text` at `t` and zeros at the target.
fn strcpy_state(base: &State, text: &[i64], s: i64, t: i64) -> State {
    let mut st = base.restrict(|n| n != "Memory" && n != "s" && n != "t");
    st.set("s", vec![], Value::Int(s));
    st.set("t", vec![], Value::Int(t));
    for (i, c) in text.iter().chain([0].iter()).enumerate() {
        st.set("Memory", vec![Value::Int(t + i as i64)], Value::Int(*c));
    }
    st
}

fn is_copy_arm(r: &Rule) -> Result<String, String> {
    let Rule::Block(rs) = r else {
        return Err(format!("arm is not a block: {r}"));
    };
    let mut data = BTreeSet::new();
    let mut target = None;
    for m in rs {
        let Rule::Update(u) = m else {
            return Err(format!("arm member is not an update: {m}"));
        };
        match u.control_target() {
            Some(t) => target = Some(t.to_string()),
            None => {
                data.insert(u.to_string());
            }
        }
    }
    let want: BTreeSet<String> = [
        "Memory(To) := Memory(From)",
        "To := +(To, 1)",
        "From := +(From, 1)",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    if data != want || rs.len() != 4 {
        return Err(format!("arm updates {data:?}"));
    }
    target.ok_or_else(|| "arm has no K update".to_string())
}

#[test]
fn c05_strcpy() {
    criterion(
        5,
        "strcpy mini-interpreter end to end",
        STRCPY_LIMIT,
        || {
            let p = program("strcpy");
            let base = state("strcpy", &p);
            let out =
                run_pipeline(&p, &base, &PipelineConfig::default()).map_err(|e| e.to_string())?;
            let opt = &out.optimized;
            ensure!(opt.krules.len() <= 4, "{} κ values", opt.krules.len());

            let guard = Term::app(
                "=",
                vec![Term::app("Memory", vec![Term::name("From")]), Term::int(0)],
            );
            let loops: Vec<&KRule> = opt
            .krules
            .iter()
            .filter(|k| matches!(&k.body, Rule::Cond(c) if c.branches.len() == 1 && c.branches[0].0 == guard))
            .collect();
            ensure!(
                loops.len() == 1,
                "expected one loop rule, found {}",
                loops.len()
            );
            let Rule::Cond(c) = &loops[0].body else {
                unreachable!()
            };
            let then_target = is_copy_arm(&c.branches[0].1)?;
            let else_body = c.else_body.as_deref().ok_or("loop rule has no else")?;
            let else_target = is_copy_arm(else_body)?;
            ensure!(
                (then_target == loops[0].label) != (else_target == loops[0].label),
                "exactly one arm should loop: {then_target} / {else_target}"
            );

            let obs: BTreeSet<String> = ["Memory".to_string()].into();
            let src = out.source.clone();
            let raw = out.residual.to_program();
            let small = out.optimized.to_program();
            let mut g = Gen::new(5);
            for len in 0..=8 {
                for _ in 0..4 {
                    let text: Vec<i64> = (0..len).map(|_| 1 + g.below(126) as i64).collect();
                    let s = 10 * g.below(5) as i64;
                    let t = 100 + g.below(20) as i64;
                    let s0 = strcpy_state(&base, &text, s, t);
                    let r0 = out
                        .residual
                        .initial_state(&negative_part(&s0, &out.classification));
                    let trace = run(&src, &s0, MAX_STEPS);
                    ensure!(
                        trace.halt == HaltReason::Fixpoint,
                        "source run {:?}",
                        trace.halt
                    );
                    for (i, c) in text.iter().chain([0].iter()).enumerate() {
                        let got = trace.last().get("Memory", &[Value::Int(s + i as i64)]);
                        ensure!(got == Value::Int(*c), "source did not copy {text:?}");
                    }
                    check_equivalence(&src, &s0, &raw, &r0, &obs, MAX_STEPS, Mode::Lockstep)
                        .map_err(|d| format!("residual on {text:?}: {d}"))?;
                    let a = check_equivalence(
                        &src,
                        &s0,
                        &small,
                        &r0,
                        &obs,
                        MAX_STEPS,
                        Mode::Observational,
                    )
                    .map_err(|d| format!("optimized on {text:?}: {d}"))?;
                    ensure!(
                        a.candidate_halt == HaltReason::Fixpoint,
                        "optimized run {:?}",
                        a.candidate_halt
                    );
                }
            }
            Ok(())
        },
    );
}

/// A state for a three-slot target: the listed variables drawn from
/// `lo..=hi`.
fn var_state(g: &mut Gen, vars: &[&str], lo: i64, hi: i64) -> State {
    let mut s = State::new();
    for v in vars {
        let x = lo + g.below((hi - lo + 1) as usize) as i64;
        s.set("Var", vec![Value::str(*v)], Value::Int(x));
    }
    s
}

#[test]
fn c06_self_interpreter() {
    criterion(
        6,
        "self-interpreter yields its targets",
        SELFINT_LIMIT,
        || {
            let interp = program("selfint");
            let targets: [(&str, &[&str], i64, i64); 3] = [
                ("swap_sum", &["x", "y", "z"], -20, 20),
                ("count", &["i", "n", "acc"], 0, 12),
                ("gcd", &["a", "b", "steps"], 1, 40),
            ];
            let mut g = Gen::new(6);
            for (name, vars, lo, hi) in targets {
                let target = program(name);
                let code = state(&format!("selfint_{name}"), &interp);
                let out = run_pipeline(&interp, &code, &PipelineConfig::default())
                    .map_err(|e| format!("{name}: {e}"))?;
                ensure!(
                    out.residual.krules.len() == 1,
                    "{name}: {} κ",
                    out.residual.krules.len()
                );
                let obs: BTreeSet<String> = ["Var".to_string()].into();
                for round in 0..20 {
                    let mut s0 = var_state(&mut g, vars, lo, hi);
                    if name == "gcd" {
                        s0.set("Var", vec![Value::str("steps")], Value::Int(0));
                    }
                    let r0 = out.residual.initial_state(&s0);
                    for (label, rp) in [("residual", &out.residual), ("optimized", &out.optimized)]
                    {
                        check_equivalence(
                            &target,
                            &s0,
                            &rp.to_program(),
                            &r0,
                            &obs,
                            MAX_STEPS,
                            Mode::Lockstep,
                        )
                        .map_err(|d| format!("{name} {label} state {round}: {d}"))?;
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn c07_preprocess_preserves_runs() {
    criterion(
        7,
        "preprocessing preserves runs (200 programs x 10 states)",
        PREPROCESS_LIMIT,
        || {
            let pal = Palette::nullary("v", 3, Palette::small_pool());
            let all: BTreeSet<String> = pal.names.iter().cloned().collect();
            let mut g = Gen::new(7);
            for case in 0..200 {
                let p = g.program(&pal, 30);
                ensure!(p.body().size() <= 30, "generator exceeded 30 nodes");
                let q = preprocess(&p, 10_000).map_err(|e| format!("case {case}: {e}"))?;
                for round in 0..10 {
                    let s0 = g.state(&pal);
                    check_equivalence(&p, &s0, &q, &s0, &all, 20, Mode::Lockstep)
                        .map_err(|d| format!("case {case} state {round}: {d}\n{}", p.body()))?;
                }
            }
            Ok(())
        },
    );
}

/// Draws fresh values for the negative inputs of a corpus program.
fn random_negatives(g: &mut Gen, name: &str, base: &State, cls: &Classification) -> State {
    if name == "strcpy" {
        let len = g.below(9);
        let text: Vec<i64> = (0..len).map(|_| 1 + g.below(126) as i64).collect();
        return strcpy_state(
            base,
            &text,
            10 * g.below(5) as i64,
            100 + g.below(20) as i64,
        );
    }
    let mut s = base.clone();
    for (n, args, v) in base.entries() {
        if cls.is_negative(n) && matches!(v, Value::Int(_)) {
            s.set(n, args.to_vec(), Value::Int(g.below(21) as i64 - 5));
        }
    }
    s
}

fn corpus_outputs() -> Result<Vec<(&'static str, &'static str, PipelineOutput)>, String> {
    CORPUS
        .iter()
        .map(|&(p, s)| {
            let prog = program(p);
            let s0 = state(s, &prog);
            run_pipeline(&prog, &s0, &PipelineConfig::default())
                .map(|out| (p, s, out))
                .map_err(|e| format!("{s}: {e}"))
        })
        .collect()
}

#[test]
fn c08_master_property() {
    criterion(
        8,
        "original, residual and optimized agree on the corpus",
        MASTER_LIMIT,
        || {
            let mut g = Gen::new(8);
            for (_, sname, out) in corpus_outputs()? {
                let base = state(sname, &out.source);
                let obs = observed(&out.classification);
                let src = &out.preprocessed;
                let raw = out.residual.to_program();
                let small = out.optimized.to_program();
                let kept = out.observed();
                for round in 0..10 {
                    let mut s0 = random_negatives(&mut g, sname, &base, &out.classification);
                    // The positive part is what was specialized on.
                    for (n, args, v) in base.entries() {
                        if out.classification.is_positive(n) {
                            s0.set(n, args.to_vec(), v.clone());
                        }
                    }
                    let r0 = out
                        .residual
                        .initial_state(&negative_part(&s0, &out.classification));
                    check_equivalence(&out.source, &s0, &raw, &r0, &obs, MAX_STEPS, Mode::Lockstep)
                        .map_err(|d| format!("{sname} residual state {round}: {d}"))?;
                    check_equivalence(src, &s0, &raw, &r0, &obs, MAX_STEPS, Mode::Lockstep)
                        .map_err(|d| {
                            format!("{sname} preprocessed vs residual state {round}: {d}")
                        })?;
                    check_equivalence(
                        &out.source,
                        &s0,
                        &small,
                        &r0,
                        &kept,
                        MAX_STEPS,
                        Mode::Observational,
                    )
                    .map_err(|d| format!("{sname} optimized state {round}: {d}"))?;
                }
            }
            Ok(())
        },
    );
}

/// Positive updates along one path through `r` in the reduced state `k`.
/// Guards that mention negative names fork; positive guards are decided.
fn paths(r: &Rule, k: &State, cls: &Classification) -> Vec<Vec<(String, Vec<Value>, Value)>> {
    let positive = |t: &Term| t.user_names().iter().all(|n| cls.is_positive(n));
    match r {
        Rule::Update(u) => {
            if cls.is_positive(&u.head) {
                let args = u.args.iter().map(|a| eval_term(a, k)).collect();
                vec![vec![(u.head.clone(), args, eval_term(&u.rhs, k))]]
            } else {
                vec![Vec::new()]
            }
        }
        Rule::Block(rs) => {
            let mut acc = vec![Vec::new()];
            for m in rs {
                let mine = paths(m, k, cls);
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        mine.iter().map(move |b| {
                            let mut c: Vec<_> = a.clone();
                            c.extend(b.iter().cloned());
                            c
                        })
                    })
                    .collect();
            }
            acc
        }
        Rule::Cond(c) => {
            let mut out = Vec::new();
            for (gd, body) in &c.branches {
                if positive(gd) {
                    if eval_term(gd, k) == Value::Bool(true) {
                        out.extend(paths(body, k, cls));
                        return out;
                    }
                } else {
                    out.extend(paths(body, k, cls));
                }
            }
            match &c.else_body {
                Some(e) => out.extend(paths(e, k, cls)),
                None => out.push(Vec::new()),
            }
            out
        }
    }
}

/// Every reduced state reachable from `k0` when each negative guard may go
/// either way, by breadth-first search over the unprocessed program.
fn enumerate_kappas(p: &Program, k0: &State, cls: &Classification) -> BTreeSet<State> {
    let body = p.body();
    let mut seen = BTreeSet::from([k0.clone()]);
    let mut queue = VecDeque::from([k0.clone()]);
    while let Some(k) = queue.pop_front() {
        for path in paths(&body, &k, cls) {
            let mut next = k.clone();
            for (n, args, v) in path {
                next.set(&n, args, v);
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

#[test]
fn c09_closure_and_enumeration() {
    criterion(
        9,
        "κ closure and brute-force κ enumeration",
        CLOSURE_LIMIT,
        || {
            for (_, sname, out) in corpus_outputs()? {
                out.residual
                    .check_closure()
                    .map_err(|e| format!("{sname}: {e}"))?;
                out.optimized
                    .check_closure()
                    .map_err(|e| format!("{sname} optimized: {e}"))?;
            }

            let mut cases: Vec<(Program, State)> = Vec::new();
            let mut g = Gen::new(9);
            for i in 0..120 {
                cases.push(kappa_program(&mut g, 1 + i % 3));
            }
            let p = program("mode_flip");
            let s = state("mode_flip", &p);
            cases.push((p, s));

            for (case, (p, s0)) in cases.iter().enumerate() {
                let cls = analyze(&preprocess(p, 10_000).map_err(|e| e.to_string())?);
                let pos: Vec<String> = cls.with(Polarity::Positive);
                ensure!(pos.len() <= 3, "case {case}: {} positive names", pos.len());
                let k0 = s0.restrict(|n| cls.is_positive(n));
                let oracle = enumerate_kappas(p, &k0, &cls);
                let rp = specialize(&preprocess(p, 10_000).unwrap(), s0, &cls, 10_000)
                    .map_err(|e| format!("case {case}: {e}"))?;
                rp.check_closure()
                    .map_err(|e| format!("case {case}: {e}"))?;
                let got: BTreeSet<State> = rp.krules.iter().map(|k| k.kappa.to_state()).collect();
                ensure!(got.len() == rp.krules.len(), "case {case}: duplicate κ");
                ensure!(
                    got == oracle,
                    "case {case}: worklist {got:?} vs enumeration {oracle:?}\n{}",
                    p.body()
                );
                for round in 0..5 {
                    let mut start = s0.clone();
                    for n in ["n0", "n1"] {
                        if p.vocab().contains(n) {
                            start.set(n, vec![], Value::Int(round as i64 - 1));
                        }
                    }
                    for st in run(p, &start, 30).states {
                        let k = st.restrict(|n| cls.is_positive(n));
                        ensure!(
                            oracle.contains(&k),
                            "case {case}: concrete run left the κ set"
                        );
                    }
                }
            }
            Ok(())
        },
    );
}

/// Expected polarity by closed form over the transitive closure of the
/// dependency relation, computed independently of the marking algorithm.
#[allow(clippy::needless_range_loop)]
fn bta_oracle(p: &Program) -> BTreeMap<String, Polarity> {
    let names: Vec<String> = p.vocab().names().map(String::from).collect();
    let idx: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = names.len();
    let mut reach = vec![vec![false; n]; n];
    let body = p.body();
    let updates = body.updates();
    for u in &updates {
        let f = idx[u.head.as_str()];
        for t in u.args.iter().chain([&u.rhs]) {
            for g in t.user_names() {
                reach[f][idx[g.as_str()]] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let has = |kind: DeclKind, name: &str| p.decls.iter().any(|d| d.kind == kind && d.name == name);
    let neg_input = |i: usize| has(DeclKind::InputNegative, &names[i]);
    let scc = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| j == i || (reach[i][j] && reach[j][i]))
            .collect()
    };
    let descent = |i: usize, comp: &[usize]| {
        updates
            .iter()
            .filter(|u| u.head == names[i])
            .all(|u| match &u.rhs {
                Term::App { head, args } if head == "Cdr" => {
                    fn path(t: &Term, ok: &dyn Fn(&str) -> bool) -> bool {
                        match t {
                            Term::App { head, args } if args.is_empty() => ok(head),
                            Term::App { head, args } if head == "Car" || head == "Cdr" => {
                                path(&args[0], ok)
                            }
                            _ => false,
                        }
                    }
                    path(&args[0], &|h| idx.get(h).is_some_and(|j| comp.contains(j)))
                }
                _ => false,
            })
    };
    let bounded = |i: usize| {
        if !reach[i][i] {
            return true;
        }
        let comp = scc(i);
        comp.iter()
            .all(|&j| has(DeclKind::Finite, &names[j]) || descent(j, &comp))
    };
    let mut out = BTreeMap::new();
    for i in 0..n {
        let closure: Vec<usize> = (0..n).filter(|&j| j == i || reach[i][j]).collect();
        let ok = closure.iter().all(|&j| !neg_input(j) && bounded(j));
        out.insert(
            names[i].clone(),
            if ok {
                Polarity::Positive
            } else {
                Polarity::Negative
            },
        );
    }
    out
}

#[test]
fn c10_bta_soundness() {
    criterion(
        10,
        "binding-time analysis against closure oracle (100 programs)",
        BTA_LIMIT,
        || {
            let mut g = Gen::new(10);
            for case in 0..100 {
                let p = bta_program(&mut g, 3 + case % 6);
                let cls = analyze(&p);
                let graph = build_dependency_graph(&p);
                // Forward data flow from every input-negative name.
                let mut flow: BTreeSet<String> =
                    p.input_names(InputMode::Negative).into_iter().collect();
                loop {
                    let more: Vec<String> = graph
                        .edges()
                        .filter(|(_, to)| flow.contains(*to))
                        .map(|(from, _)| from.to_string())
                        .filter(|f| !flow.contains(f))
                        .collect();
                    if more.is_empty() {
                        break;
                    }
                    flow.extend(more);
                }
                for f in &flow {
                    ensure!(
                        !cls.is_positive(f),
                        "case {case}: {f} is positive but reachable from a negative input"
                    );
                }
                let oracle = bta_oracle(&p);
                for (name, want) in &oracle {
                    let got = cls.get(name);
                    ensure!(
                        got == Some(*want),
                        "case {case}: {name} is {got:?}, oracle says {want:?}\n{}",
                        p.body()
                    );
                }
                ensure!(
                    cls.len() == oracle.len(),
                    "case {case}: classified {} of {}",
                    cls.len(),
                    oracle.len()
                );
            }
            Ok(())
        },
    );
}

#[test]
fn corpus_optimization_does_not_grow() {
    for (_, sname, out) in corpus_outputs().unwrap() {
        assert!(out.optimized.size() <= out.residual.size(), "{sname}");
        let again = optimize(&out.optimized);
        assert_eq!(again, out.optimized, "{sname}: optimizer not at a fixpoint");
    }
}
