//! Reference big-step evaluator. Strict, deterministic, fuel-bounded; the
//! ground truth every analysis result is tested against.
//!
//! The only way a program crashes is a pattern-match failure: the scrutinee's
//! head constructor has no branch. Constructor arguments evaluate strictly
//! (left to right by default) and errors propagate. Function bodies evaluate
//! in a singleton environment binding only the parameter.

use std::collections::HashMap;

use crate::frontend::{CoreDef, CoreExpr, CoreProgram, Span};
use crate::term::Term;

/// Environment mapping variables to ground constructor values.
#[derive(Debug, Clone, Default)]
pub struct Env {
    bindings: HashMap<String, Term>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn bind(mut self, name: impl Into<String>, value: Term) -> Env {
        debug_assert!(value.is_ground());
        self.bindings.insert(name.into(), value);
        self
    }
}

/// Result of an evaluation: a ground value, the error value, or the fuel
/// budget ran out before a derivation completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Term),
    Err,
    FuelExhausted,
}

impl Outcome {
    pub fn is_value(&self) -> bool {
        matches!(self, Outcome::Value(_))
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Value(v) => write!(f, "{v}"),
            Outcome::Err => write!(f, "err"),
            Outcome::FuelExhausted => write!(f, "fuel-exhausted"),
        }
    }
}

/// Location of the case expression whose match failure produced an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrashSite {
    pub function: String,
    pub span: Span,
}

/// Argument evaluation order for constructor nodes. The observable outcome
/// is order-independent; the right-to-left mode exists so tests can assert
/// that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalOrder {
    #[default]
    LeftToRight,
    RightToLeft,
}

pub const DEFAULT_FUEL: u64 = 1_000_000;

struct Evaluator<'p> {
    program: &'p CoreProgram,
    fuel: u64,
    order: EvalOrder,
    crash_site: Option<CrashSite>,
    current_fn: String,
}

enum Step {
    Value(Term),
    Err,
    Fuel,
}

impl<'p> Evaluator<'p> {
    fn tick(&mut self) -> bool {
        if self.fuel == 0 {
            return false;
        }
        self.fuel -= 1;
        true
    }

    fn eval_expr(&mut self, env: &mut HashMap<String, Term>, expr: &CoreExpr) -> Step {
        match expr {
            CoreExpr::Leaf { term, .. } => self.eval_term(env, term),
            CoreExpr::Match {
                scrutinee,
                branches,
                span,
            } => {
                if !self.tick() {
                    return Step::Fuel;
                }
                let value = env
                    .get(scrutinee)
                    .unwrap_or_else(|| panic!("unbound variable {scrutinee} at runtime"))
                    .clone();
                let (head, args) = match &value {
                    Term::Sym(name, args) => (name.clone(), args.clone()),
                    other => panic!("environment holds non-constructor value {other}"),
                };
                match branches.iter().find(|b| b.ctor == head) {
                    Some(branch) => {
                        for (binder, arg) in branch.binders.iter().zip(args) {
                            env.insert(binder.clone(), arg);
                        }
                        self.eval_expr(env, &branch.body)
                    }
                    None => {
                        if self.crash_site.is_none() {
                            self.crash_site = Some(CrashSite {
                                function: self.current_fn.clone(),
                                span: *span,
                            });
                        }
                        Step::Err
                    }
                }
            }
        }
    }

    fn eval_term(&mut self, env: &mut HashMap<String, Term>, term: &Term) -> Step {
        if !self.tick() {
            return Step::Fuel;
        }
        match term {
            Term::Var(name) => Step::Value(
                env.get(name)
                    .unwrap_or_else(|| panic!("unbound variable {name} at runtime"))
                    .clone(),
            ),
            Term::Wildcard => panic!("wildcard is not a runtime term"),
            Term::Sym(name, children) => {
                let mut values = vec![Term::Wildcard; children.len()];
                let indices: Vec<usize> = match self.order {
                    EvalOrder::LeftToRight => (0..children.len()).collect(),
                    EvalOrder::RightToLeft => (0..children.len()).rev().collect(),
                };
                for i in indices {
                    match self.eval_term(env, &children[i]) {
                        Step::Value(v) => values[i] = v,
                        Step::Err => return Step::Err,
                        Step::Fuel => return Step::Fuel,
                    }
                }
                Step::Value(Term::Sym(name.clone(), values))
            }
            Term::Nonterminal(name, args) => {
                let def = self
                    .program
                    .def(name)
                    .unwrap_or_else(|| panic!("call to undefined function {name}"));
                let arg = match self.eval_term(env, &args[0]) {
                    Step::Value(v) => v,
                    Step::Err => return Step::Err,
                    Step::Fuel => return Step::Fuel,
                };
                let saved_fn = std::mem::replace(&mut self.current_fn, def.name.clone());
                let mut callee_env = HashMap::from([(def.param.clone(), arg)]);
                let result = self.eval_expr(&mut callee_env, &def.body);
                self.current_fn = saved_fn;
                result
            }
        }
    }
}

fn finish(step: Step) -> Outcome {
    match step {
        Step::Value(v) => Outcome::Value(v),
        Step::Err => Outcome::Err,
        Step::Fuel => Outcome::FuelExhausted,
    }
}

/// Evaluates `expr` under `env` with the given fuel budget (one unit per
/// rule application of the big-step derivation).
pub fn eval(program: &CoreProgram, env: &Env, expr: &CoreExpr, fuel: u64) -> Outcome {
    eval_traced(program, env, expr, fuel, EvalOrder::LeftToRight).0
}

/// Like [`eval`] but also reports the case site that originated an error.
pub fn eval_traced(
    program: &CoreProgram,
    env: &Env,
    expr: &CoreExpr,
    fuel: u64,
    order: EvalOrder,
) -> (Outcome, Option<CrashSite>) {
    let mut evaluator = Evaluator {
        program,
        fuel,
        order,
        crash_site: None,
        current_fn: String::new(),
    };
    let mut env = env.bindings.clone();
    let outcome = finish(evaluator.eval_expr(&mut env, expr));
    if let Outcome::Err = outcome {
        debug_assert!(
            evaluator.crash_site.is_some(),
            "every error originates at a case site"
        );
    }
    (outcome, evaluator.crash_site)
}

/// Evaluates `Main(v)` for a ground argument `v`.
pub fn run_main(program: &CoreProgram, v: &Term, fuel: u64) -> Outcome {
    let main = program.main().expect("program has a Main function");
    apply(program, main, v, fuel)
}

/// Evaluates `F(v)` for a ground argument, entering `F`'s body directly.
pub fn apply(program: &CoreProgram, def: &CoreDef, v: &Term, fuel: u64) -> Outcome {
    assert!(v.is_ground(), "input must be a ground constructor term");
    let env = Env::new().bind(def.param.clone(), v.clone());
    let mut evaluator = Evaluator {
        program,
        fuel,
        order: EvalOrder::LeftToRight,
        crash_site: None,
        current_fn: def.name.clone(),
    };
    let mut env = env.bindings;
    finish(evaluator.eval_expr(&mut env, &def.body))
}

/// True when `F`'s own pattern matching crashes on `v`, treating every call
/// result as opaque (calls are not entered). This is the shallow-match
/// oracle the first-stage automaton is tested against.
pub fn shallow_match_crashes(program: &CoreProgram, fname: &str, v: &Term) -> bool {
    fn walk(expr: &CoreExpr, env: &mut HashMap<String, Term>) -> bool {
        match expr {
            CoreExpr::Leaf { .. } => false,
            CoreExpr::Match {
                scrutinee,
                branches,
                ..
            } => {
                let value = env
                    .get(scrutinee)
                    .unwrap_or_else(|| panic!("unbound variable {scrutinee}"))
                    .clone();
                let (head, args) = match &value {
                    Term::Sym(name, args) => (name.clone(), args.clone()),
                    other => panic!("non-constructor value {other}"),
                };
                match branches.iter().find(|b| b.ctor == head) {
                    Some(branch) => {
                        for (binder, arg) in branch.binders.iter().zip(args) {
                            env.insert(binder.clone(), arg);
                        }
                        walk(&branch.body, env)
                    }
                    None => true,
                }
            }
        }
    }
    let def = program.def(fname).expect("function exists");
    let mut env = HashMap::from([(def.param.clone(), v.clone())]);
    walk(&def.body, &mut env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, preprocess};
    use crate::term::parse_ground_term;

    pub(crate) const LENGTH_SRC: &str = "
def Main(t) = Length(t)
def Length(l) = case l of { nil -> zero | cons(x, xs) -> succ(Length(xs)) }
";

    fn program(src: &str) -> CoreProgram {
        let (cp, diags) = preprocess(&parse(src).unwrap());
        assert!(
            diags.iter().all(|d| d.severity != crate::frontend::Severity::Error),
            "{diags:?}"
        );
        cp
    }

    fn t(s: &str) -> Term {
        parse_ground_term(s).unwrap()
    }

    #[test]
    fn length_of_singleton_list() {
        let p = program(LENGTH_SRC);
        assert_eq!(
            run_main(&p, &t("cons(zero, nil)"), 1000),
            Outcome::Value(t("succ(zero)"))
        );
    }

    #[test]
    fn length_of_nil_is_zero() {
        let p = program(LENGTH_SRC);
        assert_eq!(run_main(&p, &t("nil"), 1000), Outcome::Value(t("zero")));
    }

    #[test]
    fn length_crashes_on_non_list() {
        let p = program(LENGTH_SRC);
        assert_eq!(run_main(&p, &t("zero"), 1000), Outcome::Err);
        assert_eq!(run_main(&p, &t("succ(zero)"), 1000), Outcome::Err);
    }

    #[test]
    fn error_has_an_originating_case_site() {
        let p = program(LENGTH_SRC);
        let main = p.main().unwrap();
        let env = Env::new().bind(main.param.clone(), t("zero"));
        let (outcome, site) = eval_traced(&p, &env, &main.body, 1000, EvalOrder::LeftToRight);
        assert_eq!(outcome, Outcome::Err);
        let site = site.unwrap();
        assert_eq!(site.function, "Length");
    }

    #[test]
    fn fuel_exhaustion_on_divergence() {
        let p = program("def Main(x) = Main(x)");
        assert_eq!(run_main(&p, &t("zero"), 1000), Outcome::FuelExhausted);
    }

    #[test]
    fn fuel_monotonicity() {
        let p = program(LENGTH_SRC);
        let input = t("cons(zero, cons(zero, nil))");
        let mut settled = None;
        for fuel in 1..60 {
            let outcome = run_main(&p, &input, fuel);
            match (&settled, &outcome) {
                (None, Outcome::FuelExhausted) => {}
                (None, other) => settled = Some(other.clone()),
                (Some(prev), other) => assert_eq!(prev, other, "flip at fuel {fuel}"),
            }
        }
        assert_eq!(settled, Some(Outcome::Value(t("succ(succ(zero))"))));
    }

    #[test]
    fn evaluation_order_does_not_change_outcomes() {
        let p = program(
            "def Main(x) = pair(Crash(x), Length(x))
             def Crash(c) = case c of { }
             def Length(l) = case l of { nil -> zero | cons(x, xs) -> succ(Length(xs)) }",
        );
        let main = p.main().unwrap();
        for input in ["nil", "zero", "cons(zero, nil)"] {
            let env = Env::new().bind(main.param.clone(), t(input));
            let (l, _) = eval_traced(&p, &env, &main.body, 1000, EvalOrder::LeftToRight);
            let (r, _) = eval_traced(&p, &env, &main.body, 1000, EvalOrder::RightToLeft);
            assert_eq!(l, r, "input {input}");
        }
    }

    #[test]
    fn shallow_match_ignores_callee_crashes() {
        let p = program(
            "def Main(l) = case l of { cons(x, xs) -> Crash(x) }
             def Crash(c) = case c of { }",
        );
        // Main's own matching succeeds on any cons; the callee crash is
        // invisible to the shallow oracle.
        assert!(!shallow_match_crashes(&p, "Main", &t("cons(zero, nil)")));
        assert!(shallow_match_crashes(&p, "Main", &t("zero")));
        assert!(shallow_match_crashes(&p, "Crash", &t("zero")));
    }
}
