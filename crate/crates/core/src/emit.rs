//! Pretty-printer. Output re-parses to the same syntax tree.

use std::fmt::{self, Write as _};

use crate::kappa::ReducedState;
use crate::state::fmt_location;
use crate::term::{Rule, Term, Update};
use crate::vocab::Program;

const INDENT: &str = "  ";

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Lit(v) => write!(f, "{v}"),
            Term::App { head, args } => {
                f.write_str(head)?;
                if !args.is_empty() {
                    f.write_char('(')?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_char(')')?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} := {}", self.location(), self.rhs)
    }
}

fn write_rule(out: &mut String, r: &Rule, depth: usize) {
    let pad = INDENT.repeat(depth);
    match r {
        Rule::Update(u) => {
            let _ = writeln!(out, "{pad}{u}");
        }
        Rule::Block(rs) if rs.is_empty() => {
            let _ = writeln!(out, "{pad}do enddo");
        }
        Rule::Block(rs) => {
            let _ = writeln!(out, "{pad}do");
            for r in rs {
                write_rule(out, r, depth + 1);
            }
            let _ = writeln!(out, "{pad}enddo");
        }
        Rule::Cond(c) => {
            for (i, (g, body)) in c.branches.iter().enumerate() {
                let kw = if i == 0 { "if" } else { "elseif" };
                let _ = writeln!(out, "{pad}{kw} {g} then");
                write_rule(out, body, depth + 1);
            }
            if let Some(e) = &c.else_body {
                let _ = writeln!(out, "{pad}else");
                write_rule(out, e, depth + 1);
            }
            let _ = writeln!(out, "{pad}endif");
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_rule(&mut s, self, 0);
        f.write_str(s.trim_end())
    }
}

/// Declarations one per line, a blank line, then the top-level rules.
pub fn emit_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        let _ = writeln!(out, "{d}");
    }
    if !p.decls.is_empty() && !p.rules.is_empty() {
        out.push('\n');
    }
    for r in &p.rules {
        write_rule(&mut out, r, 0);
    }
    out
}

/// `"label": { name(args) = value ; ... }`, one line per reduced state.
pub fn emit_kmap<'a>(entries: impl IntoIterator<Item = (&'a str, &'a ReducedState)>) -> String {
    let mut out = String::new();
    for (label, k) in entries {
        let _ = crate::value::write_quoted(&mut out, label);
        out.push_str(": {");
        let mut first = true;
        for (n, g) in k.entries() {
            for (a, v) in g {
                out.push_str(if first { " " } else { " ; " });
                first = false;
                let _ = fmt_location(&mut out, n, a);
                let _ = write!(out, " = {v}");
            }
        }
        out.push_str(" }\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kappa::{canonicalize_kappa, Classification, Polarity, Reason};
    use crate::parser::{parse_kmap, parse_program, parse_residual};
    use crate::value::Value;

    #[test]
    fn block_prints_members_inside_do_enddo() {
        let r = Rule::Block(vec![
            Rule::assign("a", Term::int(1)),
            Rule::assign("b", Term::int(2)),
        ]);
        assert_eq!(r.to_string(), "do\n  a := 1\n  b := 2\nenddo");
    }

    #[test]
    fn nested_conditional_golden() {
        let text = "static c/0\n\
                    if =(c, 1) then if g then a := 1 else do enddo endif \
                    elseif h then do b := Cons(1, nil) c2 := \"x\" enddo else Memory(a) := b endif";
        let p = parse_program(text).unwrap();
        let golden = "\
static c/0

if =(c, 1) then
  if g then
    a := 1
  else
    do enddo
  endif
elseif h then
  do
    b := Cons(1, nil)
    c2 := \"x\"
  enddo
else
  Memory(a) := b
endif
";
        assert_eq!(emit_program(&p), golden);
        assert_eq!(parse_program(golden).unwrap(), p);
    }

    #[test]
    fn residual_programs_reparse() {
        let text = "if =(K, \"κ0\") then\n  do\n    a := 1\n    K := \"κ1\"\n  enddo\nendif\n";
        let p = parse_residual(text).unwrap();
        assert_eq!(emit_program(&p), text);
    }

    #[test]
    fn kmap_round_trip() {
        let mut cls = Classification::new();
        cls.set("c", Polarity::Positive, Reason::DependsOnlyOnPositive);
        cls.set("Op", Polarity::Positive, Reason::InputPositiveStatic);
        let k = canonicalize_kappa(
            [
                ("c", vec![], Value::Int(3)),
                ("Op", vec![Value::Int(0)], Value::str("mov")),
            ],
            &cls,
        )
        .unwrap();
        let empty = canonicalize_kappa(Vec::new(), &cls).unwrap();
        let text = emit_kmap([("κ0", &k), ("κ1", &empty)]);
        assert_eq!(text, "\"κ0\": { Op(0) = \"mov\" ; c = 3 }\n\"κ1\": { }\n");
        let parsed = parse_kmap(&text).unwrap();
        let again = canonicalize_kappa(
            parsed[0]
                .1
                .iter()
                .map(|(n, a, v)| (n.as_str(), a.clone(), v.clone())),
            &cls,
        )
        .unwrap();
        assert_eq!(again, k);
    }
}
