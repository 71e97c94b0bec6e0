//! Concrete syntax, preprocessing into the flat core form, and
//! well-formedness validation.
//!
//! Surface programs may match on arbitrary expressions and nest `case` inside
//! constructor and call arguments. Preprocessing lifts those into fresh
//! helper functions (names drawn from a reserved `$` namespace), renames all
//! binders apart, and infers one global constructor alphabet, so that core
//! programs match only on variables and keep call arguments case-free.

mod normalize;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use crate::term::{RankedAlphabet, Term};

pub use normalize::preprocess;
pub use parser::{parse, ParseError};

/// Source location, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    DefiniteCrash,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::DefiniteCrash => write!(f, "definite-crash"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub function: String,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(function: &str, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            function: function.to_string(),
            span,
            message: message.into(),
        }
    }

    /// Renders as `file:line:col: severity: message`.
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            file, self.span.line, self.span.col, self.severity, self.message
        )
    }
}

// ---------------------------------------------------------------------------
// Surface syntax
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceExpr {
    /// Bare lowercase identifier: a variable when bound in scope, otherwise a
    /// nullary constructor. Resolved during preprocessing.
    Ident(String, Span),
    Ctor(String, Vec<SurfaceExpr>, Span),
    Call(String, Box<SurfaceExpr>, Span),
    Case {
        scrutinee: Box<SurfaceExpr>,
        branches: Vec<SurfaceBranch>,
        span: Span,
    },
}

impl SurfaceExpr {
    pub fn span(&self) -> Span {
        match self {
            SurfaceExpr::Ident(_, s)
            | SurfaceExpr::Ctor(_, _, s)
            | SurfaceExpr::Call(_, _, s)
            | SurfaceExpr::Case { span: s, .. } => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceBranch {
    pub ctor: String,
    pub binders: Vec<String>,
    pub body: SurfaceExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceDef {
    pub name: String,
    pub param: String,
    pub body: SurfaceExpr,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub defs: Vec<SurfaceDef>,
}

// ---------------------------------------------------------------------------
// Core (preprocessed) syntax
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreBranch {
    pub ctor: String,
    pub binders: Vec<String>,
    pub body: CoreExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreExpr {
    /// Flat pattern matching on a variable, at most one branch per
    /// constructor. An empty branch list is the canonical crash marker.
    Match {
        scrutinee: String,
        branches: Vec<CoreBranch>,
        span: Span,
    },
    /// A case-free r-expression over constructors, variables and calls.
    /// `app_spans` locates each application node by its integer path.
    Leaf {
        term: Term,
        span: Span,
        app_spans: Vec<(Vec<usize>, Span)>,
    },
}

impl CoreExpr {
    pub fn span(&self) -> Span {
        match self {
            CoreExpr::Match { span, .. } | CoreExpr::Leaf { span, .. } => *span,
        }
    }

    pub fn leaf(term: Term, span: Span) -> CoreExpr {
        CoreExpr::Leaf {
            term,
            span,
            app_spans: Vec::new(),
        }
    }

    /// Span of the application node at `path` within this leaf, falling back
    /// to the leaf's own span.
    pub fn app_span(&self, path: &[usize]) -> Span {
        match self {
            CoreExpr::Leaf { span, app_spans, .. } => app_spans
                .iter()
                .find(|(p, _)| p == path)
                .map(|(_, s)| *s)
                .unwrap_or(*span),
            CoreExpr::Match { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreDef {
    pub name: String,
    pub param: String,
    pub body: CoreExpr,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoreProgram {
    pub defs: Vec<CoreDef>,
    pub alphabet: RankedAlphabet,
}

pub const MAIN: &str = "Main";

impl CoreProgram {
    pub fn def(&self, name: &str) -> Option<&CoreDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn main(&self) -> Option<&CoreDef> {
        self.def(MAIN)
    }

    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks every core invariant; an empty list means the program is
/// well-formed.
pub fn validate(cp: &CoreProgram) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if cp.main().is_none() {
        diags.push(Diagnostic::error(
            MAIN,
            Span::default(),
            "program defines no function named Main",
        ));
    }

    let mut fn_names = BTreeSet::new();
    for def in &cp.defs {
        if !fn_names.insert(def.name.clone()) {
            diags.push(Diagnostic::error(
                &def.name,
                def.span,
                format!("function {} is defined more than once", def.name),
            ));
        }
    }

    let mut all_binders: BTreeSet<String> = BTreeSet::new();
    for def in &cp.defs {
        if !all_binders.insert(def.param.clone()) {
            diags.push(Diagnostic::error(
                &def.name,
                def.span,
                format!("variable {} is bound more than once", def.param),
            ));
        }
        let mut scope = BTreeSet::from([def.param.clone()]);
        let mut matched = BTreeSet::new();
        check_expr(
            cp,
            def,
            &def.body,
            &mut scope,
            &mut matched,
            &mut all_binders,
            &mut diags,
        );
    }

    diags
}

fn check_expr(
    cp: &CoreProgram,
    def: &CoreDef,
    expr: &CoreExpr,
    scope: &mut BTreeSet<String>,
    matched: &mut BTreeSet<String>,
    all_binders: &mut BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    match expr {
        CoreExpr::Leaf { term, span, .. } => {
            check_leaf_term(cp, def, term, *span, scope, diags);
        }
        CoreExpr::Match {
            scrutinee,
            branches,
            span,
        } => {
            if !scope.contains(scrutinee) {
                diags.push(Diagnostic::error(
                    &def.name,
                    *span,
                    format!("match on {scrutinee}, which is not in scope"),
                ));
            } else if !matched.insert(scrutinee.clone()) {
                // A second match on the same variable would duplicate grammar
                // rules with identical patterns downstream.
                diags.push(Diagnostic::error(
                    &def.name,
                    *span,
                    format!("variable {scrutinee} is matched more than once along a control path"),
                ));
            }
            let mut seen_ctors = BTreeSet::new();
            for branch in branches {
                if !seen_ctors.insert(branch.ctor.clone()) {
                    diags.push(Diagnostic::error(
                        &def.name,
                        branch.span,
                        format!(
                            "constructor {} appears in more than one branch of the same case",
                            branch.ctor
                        ),
                    ));
                }
                match cp.alphabet.arity(&branch.ctor) {
                    Some(n) if n == branch.binders.len() => {}
                    Some(n) => diags.push(Diagnostic::error(
                        &def.name,
                        branch.span,
                        format!(
                            "pattern {} binds {} variables but the constructor has arity {}",
                            branch.ctor,
                            branch.binders.len(),
                            n
                        ),
                    )),
                    None => diags.push(Diagnostic::error(
                        &def.name,
                        branch.span,
                        format!("unknown constructor {} in pattern", branch.ctor),
                    )),
                }
                let mut branch_binders = BTreeSet::new();
                for b in &branch.binders {
                    if !branch_binders.insert(b.clone()) {
                        diags.push(Diagnostic::error(
                            &def.name,
                            branch.span,
                            format!("variable {b} is bound twice in the same pattern"),
                        ));
                    }
                    if !all_binders.insert(b.clone()) {
                        diags.push(Diagnostic::error(
                            &def.name,
                            branch.span,
                            format!("variable {b} is bound more than once"),
                        ));
                    }
                    scope.insert(b.clone());
                }
                check_expr(cp, def, &branch.body, scope, matched, all_binders, diags);
                for b in &branch.binders {
                    scope.remove(b);
                }
            }
            matched.remove(scrutinee);
        }
    }
}

fn check_leaf_term(
    cp: &CoreProgram,
    def: &CoreDef,
    term: &Term,
    span: Span,
    scope: &BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    match term {
        Term::Var(name) => {
            if !scope.contains(name) {
                diags.push(Diagnostic::error(
                    &def.name,
                    span,
                    format!("variable {name} is not in scope"),
                ));
            }
        }
        Term::Wildcard => diags.push(Diagnostic::error(
            &def.name,
            span,
            "the wildcard '?' cannot appear in a program",
        )),
        Term::Sym(name, children) => {
            match cp.alphabet.arity(name) {
                Some(n) if n == children.len() => {}
                Some(n) => diags.push(Diagnostic::error(
                    &def.name,
                    span,
                    format!(
                        "constructor {name} applied to {} arguments, expected {n}",
                        children.len()
                    ),
                )),
                None => diags.push(Diagnostic::error(
                    &def.name,
                    span,
                    format!("unknown constructor {name}"),
                )),
            }
            for child in children {
                check_leaf_term(cp, def, child, span, scope, diags);
            }
        }
        Term::Nonterminal(name, args) => {
            if cp.def(name).is_none() {
                diags.push(Diagnostic::error(
                    &def.name,
                    span,
                    format!("call to undefined function {name}"),
                ));
            }
            if args.len() != 1 {
                diags.push(Diagnostic::error(
                    &def.name,
                    span,
                    format!("functions are unary, {name} called with {} arguments", args.len()),
                ));
            }
            for arg in args {
                check_leaf_term(cp, def, arg, span, scope, diags);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Embedding back into surface syntax (used by the idempotence tests)
// ---------------------------------------------------------------------------

/// Injects a core program back into the surface language.
pub fn embed(cp: &CoreProgram) -> SurfaceProgram {
    fn embed_term(t: &Term, span: Span) -> SurfaceExpr {
        match t {
            Term::Var(name) => SurfaceExpr::Ident(name.clone(), span),
            Term::Wildcard => SurfaceExpr::Ident("?".to_string(), span),
            Term::Sym(name, children) => {
                if children.is_empty() {
                    SurfaceExpr::Ident(name.clone(), span)
                } else {
                    SurfaceExpr::Ctor(
                        name.clone(),
                        children.iter().map(|c| embed_term(c, span)).collect(),
                        span,
                    )
                }
            }
            Term::Nonterminal(name, args) => SurfaceExpr::Call(
                name.clone(),
                Box::new(embed_term(&args[0], span)),
                span,
            ),
        }
    }

    fn embed_expr(e: &CoreExpr) -> SurfaceExpr {
        match e {
            CoreExpr::Leaf { term, span, .. } => embed_term(term, *span),
            CoreExpr::Match {
                scrutinee,
                branches,
                span,
            } => SurfaceExpr::Case {
                scrutinee: Box::new(SurfaceExpr::Ident(scrutinee.clone(), *span)),
                branches: branches
                    .iter()
                    .map(|b| SurfaceBranch {
                        ctor: b.ctor.clone(),
                        binders: b.binders.clone(),
                        body: embed_expr(&b.body),
                        span: b.span,
                    })
                    .collect(),
                span: *span,
            },
        }
    }

    SurfaceProgram {
        defs: cp
            .defs
            .iter()
            .map(|d| SurfaceDef {
                name: d.name.clone(),
                param: d.param.clone(),
                body: embed_expr(&d.body),
                span: d.span,
            })
            .collect(),
    }
}

/// Structural equality of two core programs modulo a bijective renaming of
/// binders. Spans are ignored.
pub fn alpha_eq(a: &CoreProgram, b: &CoreProgram) -> bool {
    use std::collections::BTreeMap;

    fn term_eq(a: &Term, b: &Term, map: &BTreeMap<String, String>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => map.get(x).is_some_and(|m| m == y),
            (Term::Wildcard, Term::Wildcard) => true,
            (Term::Sym(f, fa), Term::Sym(g, ga)) | (Term::Nonterminal(f, fa), Term::Nonterminal(g, ga)) => {
                f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| term_eq(x, y, map))
            }
            _ => false,
        }
    }

    fn expr_eq(a: &CoreExpr, b: &CoreExpr, map: &mut BTreeMap<String, String>) -> bool {
        match (a, b) {
            (CoreExpr::Leaf { term: ta, .. }, CoreExpr::Leaf { term: tb, .. }) => {
                term_eq(ta, tb, map)
            }
            (
                CoreExpr::Match {
                    scrutinee: sa,
                    branches: ba,
                    ..
                },
                CoreExpr::Match {
                    scrutinee: sb,
                    branches: bb,
                    ..
                },
            ) => {
                if map.get(sa) != Some(sb) || ba.len() != bb.len() {
                    return false;
                }
                ba.iter().zip(bb).all(|(x, y)| {
                    if x.ctor != y.ctor || x.binders.len() != y.binders.len() {
                        return false;
                    }
                    for (bx, by) in x.binders.iter().zip(&y.binders) {
                        map.insert(bx.clone(), by.clone());
                    }
                    expr_eq(&x.body, &y.body, map)
                })
            }
            _ => false,
        }
    }

    if a.defs.len() != b.defs.len() || a.alphabet != b.alphabet {
        return false;
    }
    a.defs.iter().zip(&b.defs).all(|(da, db)| {
        if da.name != db.name {
            return false;
        }
        let mut map = BTreeMap::from([(da.param.clone(), db.param.clone())]);
        expr_eq(&da.body, &db.body, &mut map)
    })
}
