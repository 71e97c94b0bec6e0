//! Pattern-matching recursion schemes: the output model of a program.
//!
//! A scheme rewrites `Start input` outermost; pattern rules match their last
//! argument one constructor deep (patterns may be bare variables, so plain
//! parameter-passing rules are the degenerate case). Programs in flat core
//! form translate rule-per-branch, threading the pattern context through
//! nested matches, so program and scheme produce the same output trees.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::frontend::{CoreExpr, CoreProgram, MAIN};
use crate::term::{display_applicative, RankedAlphabet, Term};

/// A rewriting rule `F x1..xn p -> rhs`. `pattern` is `None` for plain
/// rules; a bare-variable pattern matches anything and just binds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: String,
    pub params: Vec<String>,
    pub pattern: Option<Term>,
    pub rhs: Term,
}

impl Rule {
    pub fn arity(&self) -> usize {
        self.params.len() + usize::from(self.pattern.is_some())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        if let Some(p) = &self.pattern {
            let rendered = display_applicative(p);
            if matches!(p, Term::Sym(_, children) if !children.is_empty()) {
                write!(f, " ({rendered})")?;
            } else {
                write!(f, " {rendered}")?;
            }
        }
        write!(f, " -> {}", display_applicative(&self.rhs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmrs {
    pub terminals: RankedAlphabet,
    pub nonterminals: RankedAlphabet,
    pub rules: Vec<Rule>,
    pub start: String,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PmrsError {
    #[error("{0} is not a nonterminal of the scheme")]
    UnknownNonterminal(String),
    #[error("{0} has type {1}, a start symbol needs type o -> o")]
    WrongStartType(String, String),
}

/// A well-formedness violation; an empty list means the scheme is usable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(i) => write!(f, "rule {}: {}", i, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl Pmrs {
    /// The scheme with its start symbol replaced.
    pub fn restart(&self, f: &str) -> Result<Pmrs, PmrsError> {
        match self.nonterminals.ty(f) {
            None => Err(PmrsError::UnknownNonterminal(f.to_string())),
            Some(ty) if ty.arity() != 1 || ty.order() != 1 => Err(PmrsError::WrongStartType(
                f.to_string(),
                ty.to_string(),
            )),
            Some(_) => Ok(Pmrs {
                start: f.to_string(),
                ..self.clone()
            }),
        }
    }

    pub fn rules_of<'a>(&'a self, head: &'a str) -> impl Iterator<Item = &'a Rule> {
        self.rules.iter().filter(move |r| r.head == head)
    }

    /// One rule per line in the `F p -> rhs` form.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&rule.to_string());
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Transformation from core programs
// ---------------------------------------------------------------------------

/// Translates a validated core program into its output scheme: terminals are
/// the program constructors, nonterminals the functions (all `o -> o`), the
/// start symbol is Main, and each function contributes one rule per control
/// path, its pattern being the accumulated match context.
pub fn to_pmrs(cp: &CoreProgram) -> Pmrs {
    fn translate(fname: &str, context: &Term, expr: &CoreExpr, rules: &mut Vec<Rule>) {
        match expr {
            CoreExpr::Leaf { term, .. } => rules.push(Rule {
                head: fname.to_string(),
                params: Vec::new(),
                pattern: Some(context.clone()),
                rhs: term.clone(),
            }),
            CoreExpr::Match { scrutinee, branches, .. } => {
                for branch in branches {
                    let refined = Term::Sym(
                        branch.ctor.clone(),
                        branch.binders.iter().map(Term::var).collect(),
                    );
                    let context = context.substitute(scrutinee, &refined);
                    translate(fname, &context, &branch.body, rules);
                }
            }
        }
    }

    let mut nonterminals = RankedAlphabet::new();
    for def in &cp.defs {
        nonterminals
            .insert_first_order(def.name.clone(), 1)
            .expect("function names are distinct");
    }

    let mut rules = Vec::new();
    for def in &cp.defs {
        translate(&def.name, &Term::var(def.param.clone()), &def.body, &mut rules);
    }

    Pmrs {
        terminals: cp.alphabet.clone(),
        nonterminals,
        rules,
        start: MAIN.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

/// Checks typing, arities and determinism.
pub fn well_formed(g: &Pmrs) -> Vec<Violation> {
    let mut out = Vec::new();
    let violation = |rule, message: String| Violation { rule, message };

    if !g.terminals.is_first_order() {
        out.push(violation(
            None,
            "terminal alphabet contains a higher-order symbol".to_string(),
        ));
    }
    match g.nonterminals.ty(&g.start) {
        None => out.push(violation(
            None,
            format!("start symbol {} is not a nonterminal", g.start),
        )),
        Some(ty) if ty.arity() != 1 || ty.order() != 1 => out.push(violation(
            None,
            format!("start symbol {} must have type o -> o", g.start),
        )),
        Some(_) => {}
    }

    for (i, rule) in g.rules.iter().enumerate() {
        let head_arity = match g.nonterminals.ty(&rule.head) {
            Some(ty) => ty.arity(),
            None => {
                out.push(violation(Some(i), format!("unknown nonterminal {}", rule.head)));
                continue;
            }
        };
        if rule.arity() != head_arity {
            out.push(violation(
                Some(i),
                format!(
                    "{} takes {} arguments but the rule binds {}",
                    rule.head,
                    head_arity,
                    rule.arity()
                ),
            ));
        }

        let mut bound: BTreeSet<String> = rule.params.iter().cloned().collect();
        if bound.len() != rule.params.len() {
            out.push(violation(Some(i), "duplicate parameter names".to_string()));
        }
        if let Some(p) = &rule.pattern {
            if !p.is_pattern() {
                out.push(violation(
                    Some(i),
                    "pattern contains a nonterminal or wildcard".to_string(),
                ));
            } else if let Err(e) = p.check_arities(&g.terminals) {
                out.push(violation(Some(i), e.to_string()));
            }
            let vars = p.free_vars();
            let mut count = 0usize;
            count_var_occurrences(p, &mut count);
            if count != vars.len() {
                out.push(violation(Some(i), "pattern is not linear".to_string()));
            }
            for v in vars {
                if !bound.insert(v.clone()) {
                    out.push(violation(
                        Some(i),
                        format!("pattern variable {v} shadows a parameter"),
                    ));
                }
            }
        }

        check_rhs(g, i, &rule.rhs, &bound, &mut out);
    }

    // Determinism: no two rules of one nonterminal may overlap.
    for i in 0..g.rules.len() {
        for j in i + 1..g.rules.len() {
            let (a, b) = (&g.rules[i], &g.rules[j]);
            if a.head != b.head {
                continue;
            }
            let overlap = match (&a.pattern, &b.pattern) {
                (Some(p), Some(q)) => crate::term::unifiable(p, q),
                // A plain rule matches everything of its arity.
                _ => a.arity() == b.arity(),
            };
            if overlap {
                out.push(violation(
                    Some(j),
                    format!("rules {i} and {j} for {} have unifiable patterns", a.head),
                ));
            }
        }
    }

    out
}

fn count_var_occurrences(t: &Term, count: &mut usize) {
    match t {
        Term::Var(_) => *count += 1,
        Term::Sym(_, children) => children.iter().for_each(|c| count_var_occurrences(c, count)),
        _ => {}
    }
}

fn check_rhs(g: &Pmrs, rule: usize, t: &Term, bound: &BTreeSet<String>, out: &mut Vec<Violation>) {
    match t {
        Term::Var(name) => {
            if !bound.contains(name) {
                out.push(Violation {
                    rule: Some(rule),
                    message: format!("unbound variable {name} in right-hand side"),
                });
            }
        }
        Term::Wildcard => {}
        Term::Sym(name, children) => {
            match g.terminals.arity(name) {
                Some(n) if n == children.len() => {}
                Some(n) => out.push(Violation {
                    rule: Some(rule),
                    message: format!(
                        "terminal {name} has arity {n} but is applied to {} arguments",
                        children.len()
                    ),
                }),
                None => out.push(Violation {
                    rule: Some(rule),
                    message: format!("unknown terminal {name}"),
                }),
            }
            children.iter().for_each(|c| check_rhs(g, rule, c, bound, out));
        }
        Term::Nonterminal(name, args) => {
            match g.nonterminals.ty(name) {
                Some(ty) if ty.arity() == args.len() => {}
                Some(ty) => out.push(Violation {
                    rule: Some(rule),
                    message: format!(
                        "nonterminal {name} has arity {} but is applied to {} arguments",
                        ty.arity(),
                        args.len()
                    ),
                }),
                None => out.push(Violation {
                    rule: Some(rule),
                    message: format!("unknown nonterminal {name}"),
                }),
            }
            args.iter().for_each(|a| check_rhs(g, rule, a, bound, out));
        }
    }
}

// ---------------------------------------------------------------------------
// Productivity
// ---------------------------------------------------------------------------

/// Sound guardedness approximation: true only if the root-call graph (an
/// edge `F -> G` whenever some rule of `F` rewrites to `G` applied at the
/// root, emitting no constructor) is acyclic. `true` implies the value tree
/// of every input has no unproduced positions, given enough budget.
pub fn is_productive(g: &Pmrs) -> bool {
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for rule in &g.rules {
        if let Term::Nonterminal(callee, _) = &rule.rhs {
            edges.entry(&rule.head).or_default().insert(callee);
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }
    fn dfs<'a>(
        node: &'a str,
        edges: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
    ) -> bool {
        match marks.get(node) {
            Some(Mark::Visiting) => return false,
            Some(Mark::Done) => return true,
            None => {}
        }
        marks.insert(node, Mark::Visiting);
        if let Some(next) = edges.get(node) {
            for n in next {
                if !dfs(n, edges, marks) {
                    return false;
                }
            }
        }
        marks.insert(node, Mark::Done);
        true
    }

    let mut marks = HashMap::new();
    let nodes: Vec<&str> = edges.keys().copied().collect();
    nodes.iter().all(|n| dfs(n, &edges, &mut marks))
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Constructor tree with leaves for unexpanded positions (budget ran out),
/// unknown subtrees (`?`), and in-scheme match failures.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PartialTree {
    Node(String, Vec<PartialTree>),
    Wildcard,
    Unexpanded,
    Stuck,
}

impl PartialTree {
    pub fn from_term(t: &Term) -> PartialTree {
        match t {
            Term::Sym(name, children) => PartialTree::Node(
                name.clone(),
                children.iter().map(PartialTree::from_term).collect(),
            ),
            Term::Wildcard => PartialTree::Wildcard,
            Term::Var(_) | Term::Nonterminal(..) => PartialTree::Unexpanded,
        }
    }

    pub fn contains_stuck(&self) -> bool {
        match self {
            PartialTree::Stuck => true,
            PartialTree::Node(_, children) => children.iter().any(PartialTree::contains_stuck),
            _ => false,
        }
    }

    pub fn contains_unexpanded(&self) -> bool {
        match self {
            PartialTree::Unexpanded => true,
            PartialTree::Node(_, children) => {
                children.iter().any(PartialTree::contains_unexpanded)
            }
            _ => false,
        }
    }

    /// True when `self` could still expand into `complete` (unexpanded and
    /// wildcard leaves match anything).
    pub fn covers(&self, complete: &PartialTree) -> bool {
        match (self, complete) {
            (PartialTree::Unexpanded | PartialTree::Wildcard, _) => true,
            (PartialTree::Node(a, ca), PartialTree::Node(b, cb)) => {
                a == b && ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| x.covers(y))
            }
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for PartialTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialTree::Wildcard => write!(f, "?"),
            PartialTree::Unexpanded => write!(f, "\u{22a5}"),
            PartialTree::Stuck => write!(f, "!"),
            PartialTree::Node(name, children) => {
                write!(f, "{name}")?;
                if !children.is_empty() {
                    write!(f, "(")?;
                    for (i, c) in children.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{c}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Rewrite budget. `total` counts head-rewrite steps across the whole
/// (possibly nondeterministic) exploration; `per_chain` caps consecutive
/// head rewrites of a single position so one unproductive spine cannot
/// starve its siblings.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub total: u64,
    pub per_chain: u64,
}

impl Budget {
    pub fn steps(total: u64) -> Budget {
        Budget {
            total,
            per_chain: total,
        }
    }
}

pub(crate) enum Head {
    Ctor(String, Vec<Term>),
    Wild,
    Bot,
    Stuck,
}

enum MatchOutcome {
    Match(BTreeMap<String, Term>),
    NoMatch,
    /// The pattern demands a constructor where the argument still has a
    /// nonterminal application, at this integer path.
    Need(Vec<usize>),
}

pub(crate) struct Expander<'g> {
    rules_by_head: HashMap<&'g str, Vec<&'g Rule>>,
    pub total: u64,
    per_chain: u64,
}

impl<'g> Expander<'g> {
    pub fn new(g: &'g Pmrs, budget: Budget) -> Expander<'g> {
        let mut rules_by_head: HashMap<&str, Vec<&Rule>> = HashMap::new();
        for rule in &g.rules {
            rules_by_head.entry(&rule.head).or_default().push(rule);
        }
        Expander {
            rules_by_head,
            total: budget.total,
            per_chain: budget.per_chain,
        }
    }

    fn match_pattern(pattern: &Term, arg: &Term, path: &mut Vec<usize>) -> MatchOutcome {
        match pattern {
            Term::Var(x) => {
                MatchOutcome::Match(BTreeMap::from([(x.clone(), arg.clone())]))
            }
            Term::Sym(c, ps) => match arg {
                Term::Sym(c2, args) => {
                    if c != c2 || ps.len() != args.len() {
                        return MatchOutcome::NoMatch;
                    }
                    let mut bindings = BTreeMap::new();
                    let mut need: Option<Vec<usize>> = None;
                    for (i, (p, a)) in ps.iter().zip(args).enumerate() {
                        path.push(i + 1);
                        match Self::match_pattern(p, a, path) {
                            MatchOutcome::NoMatch => {
                                path.pop();
                                return MatchOutcome::NoMatch;
                            }
                            MatchOutcome::Need(n) => {
                                if need.is_none() {
                                    need = Some(n);
                                }
                            }
                            MatchOutcome::Match(b) => bindings.extend(b),
                        }
                        path.pop();
                    }
                    match need {
                        Some(n) => MatchOutcome::Need(n),
                        None => MatchOutcome::Match(bindings),
                    }
                }
                // `?` matches every pattern, binding pattern variables to `?`.
                Term::Wildcard => {
                    let bindings = pattern
                        .free_vars()
                        .into_iter()
                        .map(|v| (v, Term::Wildcard))
                        .collect();
                    MatchOutcome::Match(bindings)
                }
                Term::Nonterminal(..) => MatchOutcome::Need(path.clone()),
                Term::Var(v) => panic!("open configuration: variable {v}"),
            },
            Term::Wildcard | Term::Nonterminal(..) => {
                panic!("patterns contain neither wildcards nor nonterminals")
            }
        }
    }

    /// Rewrites `config` until a head constructor (or leaf) emerges. One
    /// entry of the result vector per nondeterministic alternative.
    pub fn head_normalize(&mut self, config: Term) -> Vec<Head> {
        self.head_normalize_chain(config, self.per_chain)
    }

    fn head_normalize_chain(&mut self, mut config: Term, mut chain: u64) -> Vec<Head> {
        loop {
            match config {
                Term::Sym(name, children) => return vec![Head::Ctor(name, children)],
                Term::Wildcard => return vec![Head::Wild],
                Term::Var(v) => panic!("open configuration: variable {v}"),
                Term::Nonterminal(ref head, ref args) => {
                    if self.total == 0 || chain == 0 {
                        return vec![Head::Bot];
                    }
                    let rules = match self.rules_by_head.get(head.as_str()) {
                        Some(rules) => rules.clone(),
                        None => return vec![Head::Stuck],
                    };

                    let mut fired: Vec<Term> = Vec::new();
                    let mut need: Option<Vec<usize>> = None;
                    for rule in &rules {
                        if rule.arity() != args.len() {
                            continue;
                        }
                        let mut bindings: BTreeMap<String, Term> = rule
                            .params
                            .iter()
                            .cloned()
                            .zip(args.iter().cloned())
                            .collect();
                        let matched = match &rule.pattern {
                            None => Some(bindings),
                            Some(p) => {
                                let scrutinee = args.last().expect("pattern rule has an argument");
                                match Self::match_pattern(p, scrutinee, &mut Vec::new()) {
                                    MatchOutcome::Match(b) => {
                                        bindings.extend(b);
                                        Some(bindings)
                                    }
                                    MatchOutcome::NoMatch => None,
                                    MatchOutcome::Need(n) => {
                                        if need.is_none() {
                                            need = Some(n);
                                        }
                                        None
                                    }
                                }
                            }
                        };
                        if let Some(bindings) = matched {
                            fired.push(rule.rhs.substitute_all(&bindings));
                        }
                    }

                    // Resolve a demanded argument position before deciding.
                    if fired.is_empty() {
                        if let Some(path) = need {
                            let scrutinee = args.last().unwrap().clone();
                            let sub = subterm_by_ints(&scrutinee, &path).clone();
                            let heads = self.head_normalize_chain(sub, self.per_chain);
                            let mut out = Vec::new();
                            for h in heads {
                                let replacement = match h {
                                    Head::Ctor(name, children) => Term::Sym(name, children),
                                    Head::Wild => Term::Wildcard,
                                    // A stuck or unexpanded argument keeps the
                                    // whole application from ever matching.
                                    Head::Bot => {
                                        out.push(Head::Bot);
                                        continue;
                                    }
                                    Head::Stuck => {
                                        out.push(Head::Stuck);
                                        continue;
                                    }
                                };
                                let new_scrut =
                                    replace_by_ints(&scrutinee, &path, &replacement);
                                let mut new_args = args.clone();
                                *new_args.last_mut().unwrap() = new_scrut;
                                let retry = Term::Nonterminal(head.clone(), new_args);
                                out.extend(self.head_normalize_chain(retry, chain));
                            }
                            return out;
                        }
                        return vec![Head::Stuck];
                    }

                    self.total = self.total.saturating_sub(1);
                    chain = chain.saturating_sub(1);
                    if fired.len() == 1 {
                        config = fired.pop().unwrap();
                        continue;
                    }
                    // Wildcard-driven fork: explore every matching rule.
                    let mut out = Vec::new();
                    for next in fired {
                        out.extend(self.head_normalize_chain(next, chain));
                    }
                    return out;
                }
            }
        }
    }

    fn expand(&mut self, config: Term) -> Vec<PartialTree> {
        let heads = self.head_normalize(config);
        let mut out = Vec::new();
        for head in heads {
            match head {
                Head::Wild => out.push(PartialTree::Wildcard),
                Head::Bot => out.push(PartialTree::Unexpanded),
                Head::Stuck => out.push(PartialTree::Stuck),
                Head::Ctor(name, children) => {
                    // Cartesian combination of the children's alternatives.
                    let mut combos: Vec<Vec<PartialTree>> = vec![Vec::new()];
                    for child in children {
                        let alts = self.expand(child);
                        let mut next = Vec::new();
                        for combo in &combos {
                            for alt in &alts {
                                let mut c = combo.clone();
                                c.push(alt.clone());
                                next.push(c);
                            }
                        }
                        combos = next;
                    }
                    for combo in combos {
                        out.push(PartialTree::Node(name.clone(), combo));
                    }
                }
            }
        }
        out
    }
}

fn subterm_by_ints<'t>(t: &'t Term, path: &[usize]) -> &'t Term {
    let mut current = t;
    for &i in path {
        match current {
            Term::Sym(_, children) | Term::Nonterminal(_, children) => {
                current = &children[i - 1];
            }
            _ => panic!("path leads outside the term"),
        }
    }
    current
}

fn replace_by_ints(t: &Term, path: &[usize], replacement: &Term) -> Term {
    if path.is_empty() {
        return replacement.clone();
    }
    match t {
        Term::Sym(name, children) => {
            let mut children = children.clone();
            children[path[0] - 1] = replace_by_ints(&children[path[0] - 1], &path[1..], replacement);
            Term::Sym(name.clone(), children)
        }
        Term::Nonterminal(name, children) => {
            let mut children = children.clone();
            children[path[0] - 1] = replace_by_ints(&children[path[0] - 1], &path[1..], replacement);
            Term::Nonterminal(name.clone(), children)
        }
        _ => panic!("path leads outside the term"),
    }
}

/// Expands `Start input` to the set of budget-bounded output trees. Ground
/// inputs yield a single tree; `?` inputs explore every match alternative.
pub fn evaluate(g: &Pmrs, input: &Term, budget: Budget) -> BTreeSet<PartialTree> {
    let mut expander = Expander::new(g, budget);
    let config = Term::Nonterminal(g.start.clone(), vec![input.clone()]);
    expander.expand(config).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, preprocess};
    use crate::term::parse_ground_term;

    const LENGTH_SRC: &str = "
def Main(t) = Length(t)
def Length(l) = case l of { nil -> zero | cons(x, xs) -> succ(Length(xs)) }
";

    const ACKERMANN_SRC: &str = "
def Main(a) = Ack(a)
def Ack(a) = case a of {
  pair(m, n) -> case m of {
    zero -> succ(n)
  | succ(x) -> case n of {
      zero -> Ack(pair(x, succ(zero)))
    | succ(y) -> Ack(pair(x, Ack(pair(succ(x), y))))
    }
  }
}
";

    fn scheme(src: &str) -> Pmrs {
        let (cp, diags) = preprocess(&parse(src).unwrap());
        assert!(diags.is_empty(), "{diags:?}");
        to_pmrs(&cp)
    }

    fn t(s: &str) -> Term {
        parse_ground_term(s).unwrap()
    }

    #[test]
    fn length_rules() {
        let g = scheme(LENGTH_SRC);
        assert_eq!(
            g.dump(),
            "Main t -> Length t\n\
             Length nil -> zero\n\
             Length (cons x xs) -> succ (Length xs)\n"
        );
        assert!(well_formed(&g).is_empty());
    }

    #[test]
    fn ackermann_rules() {
        let g = scheme(ACKERMANN_SRC);
        assert_eq!(
            g.dump(),
            "Main a -> Ack a\n\
             Ack (pair zero n) -> succ n\n\
             Ack (pair (succ x) zero) -> Ack (pair x (succ zero))\n\
             Ack (pair (succ x) (succ y)) -> Ack (pair x (Ack (pair (succ x) y)))\n"
        );
        assert!(well_formed(&g).is_empty());
    }

    #[test]
    fn identity_program_rule() {
        let g = scheme("def Main(x) = x");
        assert_eq!(g.dump(), "Main x -> x\n");
    }

    #[test]
    fn overlapping_rules_flagged() {
        let mut g = scheme("def Main(x) = x");
        g.nonterminals.insert_first_order("F", 1).unwrap();
        g.terminals.insert_first_order("zero", 0).unwrap();
        g.terminals.insert_first_order("a", 0).unwrap();
        g.terminals.insert_first_order("b", 0).unwrap();
        g.rules.push(Rule {
            head: "F".into(),
            params: vec![],
            pattern: Some(t("zero")),
            rhs: t("a"),
        });
        g.rules.push(Rule {
            head: "F".into(),
            params: vec![],
            pattern: Some(Term::var("x")),
            rhs: t("b"),
        });
        let violations = well_formed(&g);
        assert!(violations.iter().any(|v| v.message.contains("unifiable")));
    }

    #[test]
    fn rhs_arity_violation_flagged() {
        let mut g = scheme("def Main(x) = x");
        g.terminals.insert_first_order("zero", 0).unwrap();
        g.rules[0].rhs = Term::sym("zero", vec![Term::var("x")]);
        let violations = well_formed(&g);
        assert!(violations.iter().any(|v| v.message.contains("arity")));
    }

    #[test]
    fn evaluate_length_of_four() {
        let g = scheme(LENGTH_SRC);
        let input = t("cons(zero, cons(zero, cons(zero, cons(zero, nil))))");
        let out = evaluate(&g, &input, Budget::steps(1000));
        assert_eq!(out.len(), 1);
        assert_eq!(
            out.into_iter().next().unwrap(),
            PartialTree::from_term(&t("succ(succ(succ(succ(zero))))"))
        );
    }

    #[test]
    fn evaluate_length_nil() {
        let g = scheme(LENGTH_SRC);
        let out = evaluate(&g, &t("nil"), Budget::steps(2));
        assert_eq!(
            out,
            BTreeSet::from([PartialTree::from_term(&t("zero"))])
        );
    }

    #[test]
    fn evaluate_wildcard_explores_both_rules() {
        let g = scheme(LENGTH_SRC);
        let out = evaluate(&g, &Term::Wildcard, Budget::steps(16));
        assert!(out.contains(&PartialTree::from_term(&t("zero"))));
        assert!(out
            .iter()
            .any(|p| matches!(p, PartialTree::Node(name, _) if name == "succ")));
        // Every ground evaluation is covered by some wildcard alternative.
        for input in ["nil", "cons(zero, nil)", "cons(zero, cons(zero, nil))"] {
            let ground = evaluate(&g, &t(input), Budget::steps(1000));
            let v = ground.into_iter().next().unwrap();
            assert!(
                out.iter().any(|w| w.covers(&v)),
                "no alternative covers {v}"
            );
        }
    }

    #[test]
    fn evaluate_stuck_on_non_list() {
        let g = scheme(LENGTH_SRC);
        let out = evaluate(&g, &t("zero"), Budget::steps(100));
        assert_eq!(out, BTreeSet::from([PartialTree::Stuck]));
    }

    #[test]
    fn ackermann_small_value() {
        let g = scheme(ACKERMANN_SRC);
        let input = t("pair(succ(zero), succ(zero))");
        let out = evaluate(&g, &input, Budget::steps(10_000));
        assert_eq!(
            out,
            BTreeSet::from([PartialTree::from_term(&t("succ(succ(succ(zero)))"))])
        );
    }

    #[test]
    fn budget_monotonicity_refines_bottoms() {
        let g = scheme(ACKERMANN_SRC);
        let input = t("pair(succ(succ(zero)), succ(succ(zero)))");
        let small = evaluate(&g, &input, Budget::steps(5));
        let big = evaluate(&g, &input, Budget::steps(100_000));
        assert_eq!(small.len(), 1);
        assert_eq!(big.len(), 1);
        let s = small.into_iter().next().unwrap();
        let b = big.into_iter().next().unwrap();
        assert!(s.covers(&b), "{s} does not cover {b}");
    }

    #[test]
    fn productivity_of_corpus_schemes() {
        assert!(is_productive(&scheme(LENGTH_SRC)));
        // The recursive rules rewrite to Ack at the root, so the
        // approximation conservatively reports non-productive.
        assert!(!is_productive(&scheme(ACKERMANN_SRC)));
    }

    #[test]
    fn root_self_loop_is_unproductive() {
        let mut g = scheme("def Main(x) = A(x)\ndef A(x) = A(x)");
        assert!(!is_productive(&g));
        // Replacing the looping rule with constructor emission fixes it.
        g.terminals.insert_first_order("zero", 0).unwrap();
        g.rules[1].rhs = t("zero");
        assert!(is_productive(&g));
    }

    #[test]
    fn restart_changes_start_symbol() {
        let g = scheme(ACKERMANN_SRC);
        let r = g.restart("Ack").unwrap();
        assert_eq!(r.start, "Ack");
        assert_eq!(r.rules, g.rules);
        assert_eq!(g.restart(&g.start).unwrap(), g);
        assert_eq!(
            g.restart("cons"),
            Err(PmrsError::UnknownNonterminal("cons".to_string()))
        );
    }
}
