//! Seeded random programs and states for property and acceptance tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::state::State;
use crate::term::{Cond, Rule, Term};
use crate::value::Value;
use crate::vocab::{Decl, DeclKind, Dialect, Program};

/// Shapes available to the generator.
#[derive(Clone, Debug)]
pub struct Palette {
    /// Nullary function names.
    pub names: Vec<String>,
    /// Literal values.
    pub pool: Vec<Value>,
    /// Built-ins usable in terms, with their arities.
    pub builtins: Vec<(&'static str, usize)>,
    /// Whether literals may appear in terms.
    pub literals: bool,
}

impl Palette {
    /// Nullary names `prefix0..prefixN` over the given pool, with arithmetic,
    /// comparison and Boolean built-ins.
    pub fn nullary(prefix: &str, count: usize, pool: Vec<Value>) -> Self {
        Palette {
            names: (0..count).map(|i| format!("{prefix}{i}")).collect(),
            pool,
            builtins: vec![
                ("+", 2),
                ("-", 2),
                ("=", 2),
                ("!=", 2),
                ("<", 2),
                ("and", 2),
                ("or", 2),
                ("not", 1),
            ],
            literals: true,
        }
    }

    /// The four-value pool used for preprocessing checks.
    pub fn small_pool() -> Vec<Value> {
        vec![
            Value::Int(0),
            Value::Int(1),
            Value::Bool(true),
            Value::Bool(false),
        ]
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("non-empty choice").clone()
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn term(&mut self, pal: &Palette, depth: usize) -> Term {
        if depth == 0 || pal.builtins.is_empty() || self.chance(0.5) {
            if !pal.literals || self.chance(0.6) {
                return Term::name(self.pick(&pal.names));
            }
            return Term::Lit(self.pick(&pal.pool));
        }
        let (head, arity) = self.pick(&pal.builtins);
        let args = (0..arity).map(|_| self.term(pal, depth - 1)).collect();
        Term::app(head, args)
    }

    /// A term whose head, when an application, is a comparison or Boolean
    /// built-in if the palette has one.
    pub fn guard(&mut self, pal: &Palette, depth: usize) -> Term {
        let boolean: Vec<_> = pal
            .builtins
            .iter()
            .copied()
            .filter(|(h, _)| matches!(*h, "=" | "!=" | "<" | "<=" | "and" | "or" | "not"))
            .collect();
        if depth == 0 || boolean.is_empty() || self.chance(0.2) {
            return self.term(pal, 0);
        }
        let (head, arity) = self.pick(&boolean);
        let args = (0..arity)
            .map(|_| {
                if matches!(head, "and" | "or" | "not") {
                    self.guard(pal, depth - 1)
                } else {
                    self.term(pal, depth - 1)
                }
            })
            .collect();
        Term::app(head, args)
    }

    /// A random rule of roughly `budget` nodes.
    pub fn rule(&mut self, pal: &Palette, budget: usize) -> Rule {
        let roll = self.below(10);
        if budget < 6 || roll < 4 {
            let rhs = self.term(pal, if budget < 6 { 1 } else { 2 });
            return Rule::assign(self.pick(&pal.names), rhs);
        }
        if roll < 6 {
            let n = 1 + self.below(3);
            return Rule::Block((0..n).map(|_| self.rule(pal, budget / (n + 1))).collect());
        }
        let n = 1 + usize::from(self.chance(0.3));
        let branches = (0..n)
            .map(|_| (self.guard(pal, 2), self.rule(pal, budget / (n + 2))))
            .collect();
        let else_body = self
            .chance(0.5)
            .then(|| Box::new(self.rule(pal, budget / (n + 2))));
        Rule::Cond(Cond {
            branches,
            else_body,
        })
    }

    /// A source program over the palette whose body has at most `max_size`
    /// nodes.
    pub fn program(&mut self, pal: &Palette, max_size: usize) -> Program {
        loop {
            let n = 1 + self.below(3);
            let rules: Vec<Rule> = (0..n).map(|_| self.rule(pal, max_size / n)).collect();
            if Rule::Block(rules.clone()).size() <= max_size {
                return Program::new(Vec::new(), rules, Dialect::Source)
                    .expect("generated names are plain identifiers");
            }
        }
    }

    /// Every palette name set to a pool value, some left undef.
    pub fn state(&mut self, pal: &Palette) -> State {
        let mut s = State::new();
        for n in &pal.names {
            if self.chance(0.9) {
                let v = self.pick(&pal.pool);
                s.set(n, vec![], v);
            }
        }
        s
    }
}

/// Replaces the `n`-th subterm of `r` (pre-order over every term position,
/// counting from zero) by `by`. Returns the rule unchanged if `n` is out of
/// range.
pub fn replace_subterm(r: &Rule, n: usize, by: &Term) -> Rule {
    fn go(t: &Term, n: &mut isize, by: &Term) -> Term {
        if *n == 0 {
            *n -= 1;
            return by.clone();
        }
        *n -= 1;
        match t {
            Term::Lit(_) => t.clone(),
            Term::App { head, args } => Term::App {
                head: head.clone(),
                args: args.iter().map(|a| go(a, n, by)).collect(),
            },
        }
    }
    let mut left = n as isize;
    r.map_terms(&mut |t, _| go(t, &mut left, by))
}

/// Number of subterm positions in `r`.
pub fn subterm_count(r: &Rule) -> usize {
    let mut n = 0;
    r.map_terms(&mut |t, _| {
        n += t.size();
        t.clone()
    });
    n
}

/// A program for binding-time checks: `names` nullary functions, some
/// declared input negative, input positive, static or finite, with updates
/// whose right-hand sides mix names, arithmetic and Cdr descents.
pub fn bta_program(g: &mut Gen, names: usize) -> Program {
    let name = |i: usize| format!("f{i}");
    let mut decls = Vec::new();
    let mut statics = Vec::new();
    for i in 0..names {
        match g.below(8) {
            0 | 1 => decls.push(Decl::new(DeclKind::InputNegative, name(i), 0)),
            2 => decls.push(Decl::new(DeclKind::InputPositive, name(i), 0)),
            3 => {
                decls.push(Decl::new(DeclKind::Static, name(i), 0));
                decls.push(Decl::new(DeclKind::InputPositive, name(i), 0));
                statics.push(i);
            }
            _ => {}
        }
        if !statics.contains(&i) && g.chance(0.25) {
            decls.push(Decl::new(DeclKind::Finite, name(i), 0));
        }
    }
    let dynamic: Vec<usize> = (0..names).filter(|i| !statics.contains(i)).collect();
    let mut rules = Vec::new();
    if !dynamic.is_empty() {
        for _ in 0..1 + g.below(2 * names) {
            let f = g.pick(&dynamic);
            let rhs = match g.below(4) {
                0 => Term::app("Cdr", vec![Term::name(name(g.below(names)))]),
                1 => Term::int(g.below(3) as i64),
                2 => Term::name(name(g.below(names))),
                _ => Term::app(
                    "+",
                    vec![
                        Term::name(name(g.below(names))),
                        Term::name(name(g.below(names))),
                    ],
                ),
            };
            let u = Rule::assign(name(f), rhs);
            rules.push(if g.chance(0.3) {
                Rule::if_then(
                    Term::app("=", vec![Term::name(name(g.below(names))), Term::int(0)]),
                    u,
                )
            } else {
                u
            });
        }
    }
    Program::new(decls, rules, Dialect::Source).expect("well-formed by construction")
}

/// A program with up to three positive nullary functions `p0..` over the
/// values 0..=2 and two negative ones `n0`, `n1`, together with an initial
/// state. Positive updates only ever assign literals in range or other
/// positive names, so every reduced state stays within the value box.
pub fn kappa_program(g: &mut Gen, positives: usize) -> (Program, State) {
    let pos: Vec<String> = (0..positives).map(|i| format!("p{i}")).collect();
    let neg = ["n0".to_string(), "n1".to_string()];
    let mut decls = Vec::new();
    for p in &pos {
        decls.push(Decl::new(DeclKind::Finite, p.clone(), 0));
        decls.push(Decl::new(DeclKind::InputPositive, p.clone(), 0));
    }
    for n in &neg {
        decls.push(Decl::new(DeclKind::InputNegative, n.clone(), 0));
    }
    let lit = |g: &mut Gen| Term::int(g.below(3) as i64);
    fn leaf(g: &mut Gen, pos: &[String], neg: &[String], lit: &dyn Fn(&mut Gen) -> Term) -> Rule {
        let mut rs = Vec::new();
        let count = g.below(pos.len() + 1);
        let targets: Vec<String> = pos.choose_multiple(g.rng(), count).cloned().collect();
        for f in targets {
            let rhs = if g.chance(0.5) {
                lit(g)
            } else {
                Term::name(g.pick(pos))
            };
            rs.push(Rule::assign(f, rhs));
        }
        if g.chance(0.7) {
            let n = g.pick(neg);
            let rhs = Term::app("+", vec![Term::name(n.clone()), Term::name(g.pick(pos))]);
            rs.push(Rule::assign(n, rhs));
        }
        Rule::Block(rs)
    }
    fn body(
        g: &mut Gen,
        pos: &[String],
        neg: &[String],
        lit: &dyn Fn(&mut Gen) -> Term,
        depth: usize,
    ) -> Rule {
        if depth == 0 || g.chance(0.3) {
            return leaf(g, pos, neg, lit);
        }
        let guard = if g.chance(0.5) {
            Term::app("=", vec![Term::name(g.pick(pos)), lit(g)])
        } else {
            Term::app("<", vec![Term::name(g.pick(neg)), lit(g)])
        };
        let then = body(g, pos, neg, lit, depth - 1);
        let otherwise = body(g, pos, neg, lit, depth - 1);
        Rule::if_else(guard, then, otherwise)
    }
    let rules = vec![body(g, &pos, &neg, &lit, 3)];
    let p = Program::new(decls, rules, Dialect::Source).expect("well-formed by construction");
    let mut s = State::new();
    for name in &pos {
        s.set(name, vec![], Value::Int(g.below(3) as i64));
    }
    for name in &neg {
        s.set(name, vec![], Value::Int(g.below(4) as i64));
    }
    (p, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let pal = Palette::nullary("v", 3, Palette::small_pool());
        let a = Gen::new(7).program(&pal, 30);
        let b = Gen::new(7).program(&pal, 30);
        assert_eq!(a, b);
        assert!(a.body().size() <= 30);
    }

    #[test]
    fn subterm_replacement_hits_every_position() {
        let r = Rule::assign("a", Term::app("+", vec![Term::name("b"), Term::int(1)]));
        assert_eq!(subterm_count(&r), 3);
        let x = Term::name("x");
        assert_eq!(replace_subterm(&r, 0, &x), Rule::assign("a", x.clone()));
        assert_eq!(
            replace_subterm(&r, 2, &x),
            Rule::assign("a", Term::app("+", vec![Term::name("b"), x.clone()]))
        );
        assert_eq!(replace_subterm(&r, 3, &x), r);
    }

    #[test]
    fn kappa_programs_are_well_formed() {
        let mut g = Gen::new(1);
        for k in 1..=3 {
            let (p, s) = kappa_program(&mut g, k);
            assert_eq!(p.input_names(crate::vocab::InputMode::Positive).len(), k);
            assert_eq!(s.len(), k + 2);
        }
    }
}
