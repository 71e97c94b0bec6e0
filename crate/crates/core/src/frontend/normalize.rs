//! Preprocessing: binder renaming, scope resolution, constructor arity
//! inference, and lifting of nested or non-variable `case` expressions into
//! fresh helper functions so the result satisfies the flat core form.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    CoreBranch, CoreDef, CoreExpr, CoreProgram, Diagnostic, Severity, Span, SurfaceExpr,
    SurfaceProgram,
};
use crate::term::{RankedAlphabet, Term};

/// Resolved expression: binders unique, every identifier classified.
#[derive(Debug, Clone)]
enum HExpr {
    Var(String, Span),
    Ctor(String, Vec<HExpr>, Span),
    Call(String, Box<HExpr>, Span),
    Case {
        scrutinee: Box<HExpr>,
        branches: Vec<HBranch>,
        span: Span,
    },
}

#[derive(Debug, Clone)]
struct HBranch {
    ctor: String,
    binders: Vec<String>,
    body: HExpr,
    span: Span,
}

/// Term annotated with call-site spans, flattened at the end.
#[derive(Debug, Clone)]
enum STerm {
    Var(String),
    Sym(String, Vec<STerm>),
    Call(String, Box<STerm>, Span),
}

struct Normalizer {
    diags: Vec<Diagnostic>,
    arities: BTreeMap<String, (usize, Span)>,
    used_names: BTreeSet<String>,
    fn_names: BTreeSet<String>,
    lifted: Vec<CoreDef>,
    case_counter: usize,
    env_counter: usize,
    current_fn: String,
}

impl Normalizer {
    fn error(&mut self, span: Span, message: impl Into<String>) {
        self.diags
            .push(Diagnostic::error(&self.current_fn, span, message));
    }

    fn fresh(&mut self, base: &str) -> String {
        if self.used_names.insert(base.to_string()) {
            return base.to_string();
        }
        let mut k = 1;
        loop {
            let candidate = format!("{base}${k}");
            if self.used_names.insert(candidate.clone()) {
                return candidate;
            }
            k += 1;
        }
    }

    fn register_arity(&mut self, name: &str, arity: usize, span: Span) {
        match self.arities.get(name) {
            Some(&(known, first)) if known != arity => {
                self.error(
                    span,
                    format!(
                        "constructor {name} used with arity {arity}, but first used with arity {known} at {first}"
                    ),
                );
            }
            Some(_) => {}
            None => {
                self.arities.insert(name.to_string(), (arity, span));
            }
        }
    }

    // -- resolution -------------------------------------------------------

    fn resolve(&mut self, expr: &SurfaceExpr, env: &BTreeMap<String, String>) -> HExpr {
        match expr {
            SurfaceExpr::Ident(name, span) => match env.get(name) {
                Some(renamed) => HExpr::Var(renamed.clone(), *span),
                None => {
                    self.register_arity(name, 0, *span);
                    HExpr::Ctor(name.clone(), Vec::new(), *span)
                }
            },
            SurfaceExpr::Ctor(name, args, span) => {
                if env.contains_key(name) {
                    self.error(
                        *span,
                        format!("{name} is a variable in scope and cannot be applied"),
                    );
                }
                self.register_arity(name, args.len(), *span);
                HExpr::Ctor(
                    name.clone(),
                    args.iter().map(|a| self.resolve(a, env)).collect(),
                    *span,
                )
            }
            SurfaceExpr::Call(name, arg, span) => {
                HExpr::Call(name.clone(), Box::new(self.resolve(arg, env)), *span)
            }
            SurfaceExpr::Case {
                scrutinee,
                branches,
                span,
            } => {
                let scrutinee = self.resolve(scrutinee, env);
                let branches = branches
                    .iter()
                    .map(|b| {
                        self.register_arity(&b.ctor, b.binders.len(), b.span);
                        let mut seen = BTreeSet::new();
                        let mut env = env.clone();
                        let mut binders = Vec::new();
                        for binder in &b.binders {
                            if !seen.insert(binder.clone()) {
                                self.error(
                                    b.span,
                                    format!("variable {binder} is bound twice in the same pattern"),
                                );
                            }
                            let renamed = self.fresh(binder);
                            env.insert(binder.clone(), renamed.clone());
                            binders.push(renamed);
                        }
                        HBranch {
                            ctor: b.ctor.clone(),
                            binders,
                            body: self.resolve(&b.body, &env),
                            span: b.span,
                        }
                    })
                    .collect();
                HExpr::Case {
                    scrutinee: Box::new(scrutinee),
                    branches,
                    span: *span,
                }
            }
        }
    }

    // -- normalization ----------------------------------------------------

    fn norm_tail(&mut self, expr: HExpr) -> CoreExpr {
        match expr {
            HExpr::Case {
                scrutinee,
                branches,
                span,
            } => {
                let scrutinee = self.norm_term(*scrutinee);
                if let STerm::Var(v) = &scrutinee {
                    if branches.is_empty() {
                        self.diags.push(Diagnostic {
                            severity: Severity::DefiniteCrash,
                            function: self.current_fn.clone(),
                            span,
                            message: format!("case on {v} has no branches and always crashes"),
                        });
                    }
                    let branches = branches
                        .into_iter()
                        .map(|b| CoreBranch {
                            ctor: b.ctor,
                            binders: b.binders,
                            body: self.norm_tail(b.body),
                            span: b.span,
                        })
                        .collect();
                    CoreExpr::Match {
                        scrutinee: v.clone(),
                        branches,
                        span,
                    }
                } else {
                    let call = self.lift_case(scrutinee, branches, span);
                    self.leaf(call, span)
                }
            }
            other => {
                let span = other.span();
                let term = self.norm_term(other);
                self.leaf(term, span)
            }
        }
    }

    fn norm_term(&mut self, expr: HExpr) -> STerm {
        match expr {
            HExpr::Var(name, _) => STerm::Var(name),
            HExpr::Ctor(name, args, _) => STerm::Sym(
                name,
                args.into_iter().map(|a| self.norm_term(a)).collect(),
            ),
            HExpr::Call(name, arg, span) => {
                STerm::Call(name, Box::new(self.norm_term(*arg)), span)
            }
            HExpr::Case {
                scrutinee,
                branches,
                span,
            } => {
                let scrutinee = self.norm_term(*scrutinee);
                self.lift_case(scrutinee, branches, span)
            }
        }
    }

    /// Moves a case into a fresh helper function, passing the scrutinee and
    /// any captured variables through a wrapper constructor when needed.
    /// Returns the replacement call.
    fn lift_case(&mut self, scrutinee: STerm, branches: Vec<HBranch>, span: Span) -> STerm {
        self.case_counter += 1;
        let fn_name = format!("$case{}", self.case_counter);

        let mut captured = BTreeSet::new();
        for b in &branches {
            let mut fv = BTreeSet::new();
            free_vars(&b.body, &mut fv);
            for binder in &b.binders {
                fv.remove(binder);
            }
            captured.extend(fv);
        }
        let captured: Vec<String> = captured.into_iter().collect();

        let (param, body) = if captured.is_empty() {
            let param = self.fresh("$s");
            let inner = HExpr::Case {
                scrutinee: Box::new(HExpr::Var(param.clone(), span)),
                branches,
                span,
            };
            (param, self.norm_tail(inner))
        } else {
            // Pack scrutinee and captured variables through $envK(s, v1..vm).
            self.env_counter += 1;
            let env_ctor = format!("$env{}", self.env_counter);
            self.register_arity(&env_ctor, 1 + captured.len(), span);

            let param = self.fresh("$s");
            let slot = self.fresh("$v");
            let mut rebinds = BTreeMap::new();
            let mut env_binders = vec![slot.clone()];
            for v in &captured {
                let renamed = self.fresh(v);
                rebinds.insert(v.clone(), renamed.clone());
                env_binders.push(renamed);
            }
            let branches = branches
                .into_iter()
                .map(|b| HBranch {
                    body: rename_vars(b.body, &rebinds),
                    ..b
                })
                .collect();
            let inner = HExpr::Case {
                scrutinee: Box::new(HExpr::Var(slot, span)),
                branches,
                span,
            };
            let body = CoreExpr::Match {
                scrutinee: param.clone(),
                branches: vec![CoreBranch {
                    ctor: env_ctor.clone(),
                    binders: env_binders,
                    body: self.norm_tail(inner),
                    span,
                }],
                span,
            };
            (param, body)
        };

        self.fn_names.insert(fn_name.clone());
        self.lifted.push(CoreDef {
            name: fn_name.clone(),
            param,
            body,
            span,
        });

        let arg = if captured.is_empty() {
            scrutinee
        } else {
            let env_ctor = format!("$env{}", self.env_counter);
            let mut children = vec![scrutinee];
            children.extend(captured.into_iter().map(STerm::Var));
            STerm::Sym(env_ctor, children)
        };
        STerm::Call(fn_name, Box::new(arg), span)
    }

    fn leaf(&mut self, term: STerm, span: Span) -> CoreExpr {
        let mut app_spans = Vec::new();
        let term = flatten(&term, &mut Vec::new(), &mut app_spans);
        CoreExpr::Leaf {
            term,
            span,
            app_spans,
        }
    }
}

impl HExpr {
    fn span(&self) -> Span {
        match self {
            HExpr::Var(_, s) | HExpr::Ctor(_, _, s) | HExpr::Call(_, _, s) => *s,
            HExpr::Case { span, .. } => *span,
        }
    }
}

fn free_vars(expr: &HExpr, out: &mut BTreeSet<String>) {
    match expr {
        HExpr::Var(name, _) => {
            out.insert(name.clone());
        }
        HExpr::Ctor(_, args, _) => args.iter().for_each(|a| free_vars(a, out)),
        HExpr::Call(_, arg, _) => free_vars(arg, out),
        HExpr::Case {
            scrutinee,
            branches,
            ..
        } => {
            free_vars(scrutinee, out);
            for b in branches {
                let mut inner = BTreeSet::new();
                free_vars(&b.body, &mut inner);
                for binder in &b.binders {
                    inner.remove(binder);
                }
                out.extend(inner);
            }
        }
    }
}

fn rename_vars(expr: HExpr, map: &BTreeMap<String, String>) -> HExpr {
    match expr {
        HExpr::Var(name, s) => match map.get(&name) {
            Some(renamed) => HExpr::Var(renamed.clone(), s),
            None => HExpr::Var(name, s),
        },
        HExpr::Ctor(name, args, s) => HExpr::Ctor(
            name,
            args.into_iter().map(|a| rename_vars(a, map)).collect(),
            s,
        ),
        HExpr::Call(name, arg, s) => HExpr::Call(name, Box::new(rename_vars(*arg, map)), s),
        HExpr::Case {
            scrutinee,
            branches,
            span,
        } => HExpr::Case {
            scrutinee: Box::new(rename_vars(*scrutinee, map)),
            branches: branches
                .into_iter()
                .map(|b| HBranch {
                    body: rename_vars(b.body, map),
                    ..b
                })
                .collect(),
            span,
        },
    }
}

fn flatten(term: &STerm, path: &mut Vec<usize>, apps: &mut Vec<(Vec<usize>, Span)>) -> Term {
    match term {
        STerm::Var(name) => Term::Var(name.clone()),
        STerm::Sym(name, children) => {
            let children = children
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    path.push(i + 1);
                    let t = flatten(c, path, apps);
                    path.pop();
                    t
                })
                .collect();
            Term::Sym(name.clone(), children)
        }
        STerm::Call(name, arg, span) => {
            apps.push((path.clone(), *span));
            path.push(1);
            let arg = flatten(arg, path, apps);
            path.pop();
            Term::Nonterminal(name.clone(), vec![arg])
        }
    }
}

/// Preprocesses a surface program into the flat core form, reporting
/// scope, arity and trivial-crash diagnostics along the way.
pub fn preprocess(sp: &SurfaceProgram) -> (CoreProgram, Vec<Diagnostic>) {
    let mut n = Normalizer {
        diags: Vec::new(),
        arities: BTreeMap::new(),
        used_names: BTreeSet::new(),
        fn_names: sp.defs.iter().map(|d| d.name.clone()).collect(),
        lifted: Vec::new(),
        case_counter: 0,
        env_counter: 0,
        current_fn: String::new(),
    };

    let mut defs = Vec::new();
    for def in &sp.defs {
        n.current_fn = def.name.clone();
        let param = n.fresh(&def.param);
        let env = BTreeMap::from([(def.param.clone(), param.clone())]);
        let resolved = n.resolve(&def.body, &env);
        let body = n.norm_tail(resolved);
        defs.push(CoreDef {
            name: def.name.clone(),
            param,
            body,
            span: def.span,
        });
    }
    defs.append(&mut n.lifted);

    let mut alphabet = RankedAlphabet::new();
    for (name, (arity, span)) in &n.arities {
        if n.fn_names.contains(name) {
            // Cannot happen through the parser (case split), only via embed.
            n.diags.push(Diagnostic::error(
                name,
                *span,
                format!("{name} is used both as a function and a constructor"),
            ));
        }
        alphabet
            .insert_first_order(name.clone(), *arity)
            .expect("arity table is consistent by construction");
    }

    (CoreProgram { defs, alphabet }, n.diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{alpha_eq, embed, parse, validate};

    fn core_of(src: &str) -> (CoreProgram, Vec<Diagnostic>) {
        preprocess(&parse(src).unwrap())
    }

    #[test]
    fn already_core_program_is_kept() {
        let (cp, diags) = core_of(
            "def Main(l) = case l of { nil -> zero | cons(x, xs) -> succ(Main(xs)) }",
        );
        assert!(diags.is_empty());
        assert_eq!(cp.defs.len(), 1);
        assert!(matches!(cp.defs[0].body, CoreExpr::Match { .. }));
        assert_eq!(cp.alphabet.arity("cons"), Some(2));
        assert!(validate(&cp).is_empty());
    }

    #[test]
    fn case_on_call_is_lifted() {
        let (cp, diags) = core_of(
            "def Main(x) = case F(x) of { zero -> zero }\ndef F(y) = y",
        );
        assert!(diags.is_empty());
        assert_eq!(cp.defs.len(), 3);
        let main = cp.def("Main").unwrap();
        match &main.body {
            CoreExpr::Leaf { term, .. } => {
                let s = term.to_string();
                assert!(s.starts_with("$case1("), "expected helper call, got {s}");
                assert!(s.contains("F(x)"));
            }
            other => panic!("expected leaf, got {other:?}"),
        }
        assert!(validate(&cp).is_empty());
    }

    #[test]
    fn captured_variables_are_packed() {
        // The branch body uses the outer binder `k`, so it travels through
        // the wrapper constructor.
        let (cp, diags) = core_of(
            "def Main(p) = case p of { wrap(k) -> case F(k) of { zero -> k } }\ndef F(y) = y",
        );
        assert!(diags.is_empty(), "{diags:?}");
        let helper = cp.def("$case1").unwrap();
        match &helper.body {
            CoreExpr::Match { branches, .. } => {
                assert_eq!(branches.len(), 1);
                assert!(branches[0].ctor.starts_with("$env"));
                assert_eq!(branches[0].binders.len(), 2);
            }
            other => panic!("expected env match, got {other:?}"),
        }
        assert!(validate(&cp).is_empty(), "{:?}", validate(&cp));
    }

    #[test]
    fn empty_case_reports_definite_crash() {
        let (cp, diags) = core_of("def Main(x) = case x of { c -> case x of {} }");
        // The inner empty match survives as an AST node for the transforms.
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::DefiniteCrash && d.message.contains("no branches")));
        let main = cp.def("Main").unwrap();
        match &main.body {
            CoreExpr::Match { branches, .. } => match &branches[0].body {
                CoreExpr::Match { branches, .. } => assert!(branches.is_empty()),
                other => panic!("expected empty match, got {other:?}"),
            },
            other => panic!("expected match, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_binders_collide_into_fresh_names() {
        let (cp, diags) = core_of("def Main(a) = F(a)\ndef F(a) = a");
        assert!(diags.is_empty());
        assert_ne!(cp.defs[0].param, cp.defs[1].param);
        assert!(validate(&cp).is_empty());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let (_, diags) = core_of("def Main(x) = pair(x, pair(x))");
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("arity")));
    }

    #[test]
    fn unbound_lowercase_is_a_constructor() {
        let (cp, diags) = core_of("def Main(x) = zero");
        assert!(diags.is_empty());
        assert_eq!(cp.alphabet.arity("zero"), Some(0));
    }

    #[test]
    fn preprocess_is_idempotent_up_to_alpha() {
        let src = "
def Main(l) = Check(Length(l))
def Length(l) = case l of { nil -> zero | cons(x, xs) -> succ(Length(xs)) }
def Check(s) = case F(s) of { zero -> yes }
def F(y) = y
";
        let (cp1, d1) = core_of(src);
        assert!(d1.iter().all(|d| d.severity != Severity::Error), "{d1:?}");
        let (cp2, d2) = preprocess(&embed(&cp1));
        assert!(d2.iter().all(|d| d.severity != Severity::Error), "{d2:?}");
        assert!(alpha_eq(&cp1, &cp2));
    }

    #[test]
    fn missing_main_flagged_by_validate() {
        let (cp, _) = core_of("def F(x) = x");
        let diags = validate(&cp);
        assert!(diags.iter().any(|d| d.message.contains("Main")));
    }

    #[test]
    fn duplicate_branch_constructor_flagged() {
        let (cp, _) = core_of("def Main(x) = case x of { zero -> a | zero -> b }");
        let diags = validate(&cp);
        assert!(diags
            .iter()
            .any(|d| d.message.contains("more than one branch")));
    }

    #[test]
    fn rematch_along_path_flagged() {
        let (cp, _) = core_of("def Main(x) = case x of { c -> case x of { c -> x } }");
        let diags = validate(&cp);
        assert!(diags
            .iter()
            .any(|d| d.message.contains("matched more than once")));
    }
}
