//! Ranked alphabets, simple types, terms, positions, substitution and
//! unifiability. Everything downstream (frontend, interpreter, grammar and
//! automaton engines) is built on these types.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Simple types over the tree base type: `o` or `t -> s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Base,
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    /// Builds the first-order type `o -> ... -> o` with `arity` arguments.
    pub fn first_order(arity: usize) -> SimpleType {
        let mut ty = SimpleType::Base;
        for _ in 0..arity {
            ty = SimpleType::Arrow(Box::new(SimpleType::Base), Box::new(ty));
        }
        ty
    }

    /// Nestedness of arrows to the left.
    pub fn order(&self) -> usize {
        match self {
            SimpleType::Base => 0,
            SimpleType::Arrow(dom, cod) => (dom.order() + 1).max(cod.order()),
        }
    }

    /// Number of top-level arguments.
    pub fn arity(&self) -> usize {
        match self {
            SimpleType::Base => 0,
            SimpleType::Arrow(_, cod) => cod.arity() + 1,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base => write!(f, "o"),
            SimpleType::Arrow(dom, cod) => match **dom {
                SimpleType::Base => write!(f, "o -> {cod}"),
                _ => write!(f, "({dom}) -> {cod}"),
            },
        }
    }
}

/// A finite set of symbols, each with a fixed simple type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankedAlphabet {
    symbols: BTreeMap<String, SimpleType>,
}

impl RankedAlphabet {
    pub fn new() -> RankedAlphabet {
        RankedAlphabet::default()
    }

    /// Inserts a symbol; re-inserting with a different type is an error
    /// (no overloading by arity).
    pub fn insert(&mut self, name: impl Into<String>, ty: SimpleType) -> Result<(), TermError> {
        let name = name.into();
        match self.symbols.get(&name) {
            Some(existing) if *existing != ty => Err(TermError::ArityMismatch {
                symbol: name,
                expected: existing.arity(),
                found: ty.arity(),
            }),
            _ => {
                self.symbols.insert(name, ty);
                Ok(())
            }
        }
    }

    /// Inserts a first-order symbol of the given arity.
    pub fn insert_first_order(
        &mut self,
        name: impl Into<String>,
        arity: usize,
    ) -> Result<(), TermError> {
        self.insert(name, SimpleType::first_order(arity))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).map(SimpleType::arity)
    }

    pub fn ty(&self, name: &str) -> Option<&SimpleType> {
        self.symbols.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SimpleType)> {
        self.symbols.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// True when every symbol is first-order (a terminal alphabet).
    pub fn is_first_order(&self) -> bool {
        self.symbols.values().all(|t| t.order() <= 1)
    }
}

/// One step of a position: constructor name plus 1-based child index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosStep {
    pub ctor: String,
    pub index: usize,
}

/// A path into a term, written `c.i.d.j...` in the named form; the empty
/// position is the root. The integer-string projection is obtained by
/// [`Position::erase`], never stored separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    steps: Vec<PosStep>,
}

impl Position {
    pub fn root() -> Position {
        Position::default()
    }

    pub fn from_steps(steps: Vec<PosStep>) -> Position {
        Position { steps }
    }

    pub fn is_root(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[PosStep] {
        &self.steps
    }

    pub fn child(&self, ctor: &str, index: usize) -> Position {
        let mut steps = self.steps.clone();
        steps.push(PosStep {
            ctor: ctor.to_string(),
            index,
        });
        Position { steps }
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Position { steps }
    }

    /// Drops constructor names, e.g. `c.1.d.2` becomes `[1, 2]`.
    pub fn erase(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }

    /// The prefix order: `p <= q` iff some `p'` satisfies `p.p' = q`.
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.steps.len() >= self.steps.len() && other.steps[..self.steps.len()] == self.steps[..]
    }

    /// Remainder after stripping `prefix`, when it is one.
    pub fn strip_prefix(&self, prefix: &Position) -> Option<Position> {
        if prefix.is_prefix_of(self) {
            Some(Position {
                steps: self.steps[prefix.steps.len()..].to_vec(),
            })
        } else {
            None
        }
    }

    /// Renders the position the way the figures name automaton states:
    /// the index of a non-final unary constructor is elided, so
    /// `succ.1.succ.1` prints as `succ.succ.1` while `pair.1.succ.1`
    /// keeps the index of the binary `pair`.
    pub fn display_compact(&self, alphabet: &RankedAlphabet) -> String {
        if self.steps.is_empty() {
            return "\u{3b5}".to_string();
        }
        let mut parts = Vec::with_capacity(self.steps.len());
        let last = self.steps.len() - 1;
        for (i, step) in self.steps.iter().enumerate() {
            let unary = alphabet.arity(&step.ctor) == Some(1);
            if i < last && unary {
                parts.push(step.ctor.clone());
            } else {
                parts.push(format!("{}.{}", step.ctor, step.index));
            }
        }
        parts.join(".")
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "\u{3b5}");
        }
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("{}.{}", s.ctor, s.index))
            .collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Errors raised by term-level operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("position {position} does not exist in term {term}")]
    PositionNotInTerm { term: String, position: String },
    #[error("term contains a nonterminal application and is not a pattern or constructor term")]
    NotFirstOrderTerm,
    #[error("symbol {symbol} used with arity {found}, expected {expected}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Parse(String),
}

/// Trees over a ranked alphabet, extended with variables, the `?` wildcard
/// and nonterminal applications. Patterns contain neither nonterminals nor
/// wildcards; constructor terms additionally contain no variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Sym(String, Vec<Term>),
    Wildcard,
    Nonterminal(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn sym(name: impl Into<String>, children: Vec<Term>) -> Term {
        Term::Sym(name.into(), children)
    }

    pub fn nullary(name: impl Into<String>) -> Term {
        Term::Sym(name.into(), Vec::new())
    }

    pub fn apply(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Nonterminal(name.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) | Term::Wildcard | Term::Nonterminal(..) => false,
            Term::Sym(_, children) => children.iter().all(Term::is_ground),
        }
    }

    /// A pattern is built from constructors and variables only.
    pub fn is_pattern(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Sym(_, children) => children.iter().all(Term::is_pattern),
            Term::Wildcard | Term::Nonterminal(..) => false,
        }
    }

    pub fn contains_nonterminal(&self) -> bool {
        match self {
            Term::Nonterminal(..) => true,
            Term::Sym(_, children) => children.iter().any(Term::contains_nonterminal),
            Term::Var(_) | Term::Wildcard => false,
        }
    }

    pub fn contains_wildcard(&self) -> bool {
        match self {
            Term::Wildcard => true,
            Term::Sym(_, children) => children.iter().any(Term::contains_wildcard),
            Term::Nonterminal(_, args) => args.iter().any(Term::contains_wildcard),
            Term::Var(_) => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Wildcard => 1,
            Term::Sym(_, children) | Term::Nonterminal(_, children) => {
                1 + children.iter().map(Term::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Wildcard => 1,
            Term::Sym(_, children) | Term::Nonterminal(_, children) => {
                1 + children.iter().map(Term::size).sum::<usize>()
            }
        }
    }

    /// The set of positions of a pattern or constructor term, inductively:
    /// variables and wildcards occupy the root, `c(t_1..t_n)` adds `c.i.p`
    /// for every position `p` of `t_i`. Rejects nonterminal applications.
    pub fn positions(&self) -> Result<BTreeSet<Position>, TermError> {
        fn go(t: &Term, here: &Position, out: &mut BTreeSet<Position>) -> Result<(), TermError> {
            out.insert(here.clone());
            match t {
                Term::Var(_) | Term::Wildcard => Ok(()),
                Term::Nonterminal(..) => Err(TermError::NotFirstOrderTerm),
                Term::Sym(name, children) => {
                    for (i, child) in children.iter().enumerate() {
                        go(child, &here.child(name, i + 1), out)?;
                    }
                    Ok(())
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &Position::root(), &mut out)?;
        Ok(out)
    }

    /// The subterm at `p`, defined by `t|_eps = t` and
    /// `c(t_1..t_n)|_{c.i.p} = t_i|_p`.
    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut current = self;
        for step in p.steps() {
            match current {
                Term::Sym(name, children)
                    if *name == step.ctor && step.index >= 1 && step.index <= children.len() =>
                {
                    current = &children[step.index - 1];
                }
                _ => {
                    return Err(TermError::PositionNotInTerm {
                        term: self.to_string(),
                        position: p.to_string(),
                    })
                }
            }
        }
        Ok(current)
    }

    /// All positions where the variable `x` occurs.
    pub fn paths_to(&self, x: &str) -> BTreeSet<Position> {
        fn go(t: &Term, here: &Position, x: &str, out: &mut BTreeSet<Position>) {
            match t {
                Term::Var(name) if name == x => {
                    out.insert(here.clone());
                }
                Term::Sym(name, children) => {
                    for (i, child) in children.iter().enumerate() {
                        go(child, &here.child(name, i + 1), x, out);
                    }
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &Position::root(), x, &mut out);
        out
    }

    /// Replaces every occurrence of the variable `x` by `t`.
    pub fn substitute(&self, x: &str, t: &Term) -> Term {
        match self {
            Term::Var(name) if name == x => t.clone(),
            Term::Var(_) | Term::Wildcard => self.clone(),
            Term::Sym(name, children) => Term::Sym(
                name.clone(),
                children.iter().map(|c| c.substitute(x, t)).collect(),
            ),
            Term::Nonterminal(name, args) => Term::Nonterminal(
                name.clone(),
                args.iter().map(|a| a.substitute(x, t)).collect(),
            ),
        }
    }

    /// Applies a simultaneous substitution.
    pub fn substitute_all(&self, subst: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(name) => subst.get(name).cloned().unwrap_or_else(|| self.clone()),
            Term::Wildcard => Term::Wildcard,
            Term::Sym(name, children) => Term::Sym(
                name.clone(),
                children.iter().map(|c| c.substitute_all(subst)).collect(),
            ),
            Term::Nonterminal(name, args) => Term::Nonterminal(
                name.clone(),
                args.iter().map(|a| a.substitute_all(subst)).collect(),
            ),
        }
    }

    /// Replaces the subterm at position `p` (which must exist).
    pub fn replace_at(&self, p: &Position, replacement: &Term) -> Result<Term, TermError> {
        if p.is_root() {
            return Ok(replacement.clone());
        }
        let step = &p.steps()[0];
        match self {
            Term::Sym(name, children)
                if *name == step.ctor && step.index >= 1 && step.index <= children.len() =>
            {
                let rest = Position::from_steps(p.steps()[1..].to_vec());
                let mut children = children.clone();
                children[step.index - 1] = children[step.index - 1].replace_at(&rest, replacement)?;
                Ok(Term::Sym(name.clone(), children))
            }
            _ => Err(TermError::PositionNotInTerm {
                term: self.to_string(),
                position: p.to_string(),
            }),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Var(name) => {
                    out.insert(name.clone());
                }
                Term::Sym(_, children) | Term::Nonterminal(_, children) => {
                    for child in children {
                        go(child, out);
                    }
                }
                Term::Wildcard => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Validates that every constructor node agrees with the alphabet.
    pub fn check_arities(&self, alphabet: &RankedAlphabet) -> Result<(), TermError> {
        match self {
            Term::Var(_) | Term::Wildcard => Ok(()),
            Term::Nonterminal(_, args) => {
                for a in args {
                    a.check_arities(alphabet)?;
                }
                Ok(())
            }
            Term::Sym(name, children) => {
                match alphabet.arity(name) {
                    Some(n) if n == children.len() => {}
                    Some(n) => {
                        return Err(TermError::ArityMismatch {
                            symbol: name.clone(),
                            expected: n,
                            found: children.len(),
                        })
                    }
                    None => {
                        return Err(TermError::ArityMismatch {
                            symbol: name.clone(),
                            expected: 0,
                            found: children.len(),
                        })
                    }
                }
                for child in children {
                    child.check_arities(alphabet)?;
                }
                Ok(())
            }
        }
    }
}

/// First-order unifiability of two patterns. Wildcards unify with anything
/// without binding; variables are solved by Robinson-style elimination with
/// an occurs check.
pub fn unifiable(t1: &Term, t2: &Term) -> bool {
    fn occurs(x: &str, t: &Term, subst: &BTreeMap<String, Term>) -> bool {
        match t {
            Term::Var(y) if y == x => true,
            Term::Var(y) => subst.get(y).is_some_and(|b| occurs(x, b, subst)),
            Term::Sym(_, children) => children.iter().any(|c| occurs(x, c, subst)),
            _ => false,
        }
    }

    fn resolve<'a>(mut t: &'a Term, subst: &'a BTreeMap<String, Term>) -> &'a Term {
        while let Term::Var(x) = t {
            match subst.get(x) {
                Some(bound) => t = bound,
                None => break,
            }
        }
        t
    }

    fn unify(a: &Term, b: &Term, subst: &mut BTreeMap<String, Term>) -> bool {
        let a = resolve(a, subst).clone();
        let b = resolve(b, subst).clone();
        match (&a, &b) {
            (Term::Wildcard, _) | (_, Term::Wildcard) => true,
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if occurs(x, other, subst) {
                    false
                } else {
                    subst.insert(x.clone(), other.clone());
                    true
                }
            }
            (Term::Sym(f, fa), Term::Sym(g, ga)) => {
                f == g && fa.len() == ga.len() && fa.iter().zip(ga).all(|(x, y)| unify(x, y, subst))
            }
            _ => false,
        }
    }

    let mut subst = BTreeMap::new();
    unify(t1, t2, &mut subst)
}

impl fmt::Display for Term {
    /// Canonical textual form: `name(child, ...)` with nullary parentheses
    /// omitted and `?` for the wildcard.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(name) => write!(f, "{name}"),
            Term::Wildcard => write!(f, "?"),
            Term::Sym(name, children) | Term::Nonterminal(name, children) => {
                write!(f, "{name}")?;
                if !children.is_empty() {
                    write!(f, "(")?;
                    for (i, child) in children.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{child}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Renders a term applicatively (`succ (Length xs)`), the way grammar rules
/// are written.
pub fn display_applicative(t: &Term) -> String {
    fn atom(t: &Term, out: &mut String) {
        match t {
            Term::Var(name) => out.push_str(name),
            Term::Wildcard => out.push('?'),
            Term::Sym(name, children) | Term::Nonterminal(name, children) => {
                if children.is_empty() {
                    out.push_str(name);
                } else {
                    out.push('(');
                    app(t, out);
                    out.push(')');
                }
            }
        }
    }
    fn app(t: &Term, out: &mut String) {
        match t {
            Term::Sym(name, children) | Term::Nonterminal(name, children) => {
                out.push_str(name);
                for child in children {
                    out.push(' ');
                    atom(child, out);
                }
            }
            _ => atom(t, out),
        }
    }
    let mut out = String::new();
    app(t, &mut out);
    out
}

/// Parses the canonical term syntax. All identifiers become constructors;
/// `?` becomes the wildcard. Used for CLI inputs and golden files.
pub fn parse_ground_term(input: &str) -> Result<Term, TermError> {
    struct P<'a> {
        chars: std::iter::Peekable<std::str::CharIndices<'a>>,
        src: &'a str,
    }

    impl<'a> P<'a> {
        fn skip_ws(&mut self) {
            while let Some(&(_, c)) = self.chars.peek() {
                if c.is_whitespace() {
                    self.chars.next();
                } else {
                    break;
                }
            }
        }

        fn term(&mut self) -> Result<Term, TermError> {
            self.skip_ws();
            match self.chars.peek() {
                Some(&(_, '?')) => {
                    self.chars.next();
                    Ok(Term::Wildcard)
                }
                Some(&(start, c)) if c.is_alphanumeric() || c == '_' || c == '$' => {
                    let mut end = start;
                    while let Some(&(i, c)) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' || c == '$' || c == '\'' {
                            end = i + c.len_utf8();
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    let name = &self.src[start..end];
                    self.skip_ws();
                    let mut children = Vec::new();
                    if let Some(&(_, '(')) = self.chars.peek() {
                        self.chars.next();
                        loop {
                            children.push(self.term()?);
                            self.skip_ws();
                            match self.chars.next() {
                                Some((_, ',')) => continue,
                                Some((_, ')')) => break,
                                _ => {
                                    return Err(TermError::Parse(format!(
                                        "expected ',' or ')' in arguments of {name}"
                                    )))
                                }
                            }
                        }
                    }
                    Ok(Term::Sym(name.to_string(), children))
                }
                Some(&(_, c)) => Err(TermError::Parse(format!("unexpected character '{c}'"))),
                None => Err(TermError::Parse("unexpected end of input".to_string())),
            }
        }
    }

    let mut p = P {
        chars: input.char_indices().peekable(),
        src: input,
    };
    let t = p.term()?;
    p.skip_ws();
    if let Some((i, c)) = p.chars.next() {
        return Err(TermError::Parse(format!(
            "trailing input at byte {i}: '{c}'"
        )));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(steps: &[(&str, usize)]) -> Position {
        Position::from_steps(
            steps
                .iter()
                .map(|(c, i)| PosStep {
                    ctor: c.to_string(),
                    index: *i,
                })
                .collect(),
        )
    }

    fn pair_succ_x_zero() -> Term {
        Term::sym(
            "pair",
            vec![Term::sym("succ", vec![Term::var("x")]), Term::nullary("zero")],
        )
    }

    // Independent enumerator for positions, used as the oracle for the
    // frozen expectations below.
    fn enumerate_positions(t: &Term) -> BTreeSet<Position> {
        fn walk(t: &Term, here: Position, out: &mut BTreeSet<Position>) {
            out.insert(here.clone());
            if let Term::Sym(name, children) = t {
                for (i, c) in children.iter().enumerate() {
                    walk(c, here.child(name, i + 1), out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(t, Position::root(), &mut out);
        out
    }

    #[test]
    fn positions_of_variable_is_root() {
        assert_eq!(
            Term::var("x").positions().unwrap(),
            BTreeSet::from([Position::root()])
        );
    }

    #[test]
    fn positions_of_nullary_constructor_is_root() {
        assert_eq!(
            Term::nullary("zero").positions().unwrap(),
            BTreeSet::from([Position::root()])
        );
    }

    #[test]
    fn positions_of_nested_pair() {
        let t = pair_succ_x_zero();
        let expected = BTreeSet::from([
            Position::root(),
            pos(&[("pair", 1)]),
            pos(&[("pair", 1), ("succ", 1)]),
            pos(&[("pair", 2)]),
        ]);
        assert_eq!(t.positions().unwrap(), expected);
        assert_eq!(t.positions().unwrap(), enumerate_positions(&t));
    }

    #[test]
    fn positions_reject_nonterminals() {
        let t = Term::apply("F", vec![Term::nullary("zero")]);
        assert_eq!(t.positions(), Err(TermError::NotFirstOrderTerm));
    }

    #[test]
    fn subterm_at_root_is_identity() {
        let t = pair_succ_x_zero();
        assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
    }

    #[test]
    fn subterm_at_first_child() {
        let t = pair_succ_x_zero();
        assert_eq!(
            t.subterm_at(&pos(&[("pair", 1)])).unwrap(),
            &Term::sym("succ", vec![Term::var("x")])
        );
    }

    #[test]
    fn subterm_at_missing_position_errors() {
        let t = pair_succ_x_zero();
        let bad = pos(&[("pair", 2), ("succ", 1)]);
        assert!(matches!(
            t.subterm_at(&bad),
            Err(TermError::PositionNotInTerm { .. })
        ));
    }

    #[test]
    fn paths_to_finds_single_occurrence() {
        let t = Term::sym("pair", vec![Term::var("m"), Term::var("n")]);
        assert_eq!(t.paths_to("m"), BTreeSet::from([pos(&[("pair", 1)])]));
    }

    #[test]
    fn paths_to_variable_itself() {
        assert_eq!(
            Term::var("x").paths_to("x"),
            BTreeSet::from([Position::root()])
        );
    }

    #[test]
    fn paths_to_repeated_occurrences() {
        let t = Term::sym("cons", vec![Term::var("x"), Term::var("x")]);
        assert_eq!(
            t.paths_to("x"),
            BTreeSet::from([pos(&[("cons", 1)]), pos(&[("cons", 2)])])
        );
    }

    #[test]
    fn substitute_single_occurrence() {
        let t = Term::apply("F", vec![Term::var("x")]);
        assert_eq!(
            t.substitute("x", &Term::nullary("zero")),
            Term::apply("F", vec![Term::nullary("zero")])
        );
    }

    #[test]
    fn substitute_absent_variable_is_identity() {
        let t = Term::sym("succ", vec![Term::var("y")]);
        assert_eq!(t.substitute("x", &Term::nullary("zero")), t);
    }

    #[test]
    fn substitute_all_occurrences() {
        let t = Term::sym(
            "pair",
            vec![Term::var("x"), Term::sym("succ", vec![Term::var("x")])],
        );
        let nil = Term::nullary("nil");
        assert_eq!(
            t.substitute("x", &nil),
            Term::sym(
                "pair",
                vec![nil.clone(), Term::sym("succ", vec![nil.clone()])]
            )
        );
    }

    #[test]
    fn free_vars_examples() {
        assert!(Term::nullary("zero").free_vars().is_empty());
        assert_eq!(
            Term::sym(
                "pair",
                vec![Term::var("x"), Term::sym("succ", vec![Term::var("y")])]
            )
            .free_vars(),
            BTreeSet::from(["x".to_string(), "y".to_string()])
        );
        assert_eq!(
            Term::var("x").free_vars(),
            BTreeSet::from(["x".to_string()])
        );
    }

    #[test]
    fn unifiable_bindings_both_directions() {
        // pair(zero, x) ~ pair(y, succ(z)) via x := succ(z), y := zero.
        let a = Term::sym("pair", vec![Term::nullary("zero"), Term::var("x")]);
        let b = Term::sym(
            "pair",
            vec![Term::var("y"), Term::sym("succ", vec![Term::var("z")])],
        );
        assert!(unifiable(&a, &b));
    }

    #[test]
    fn unifiable_constructor_clash() {
        assert!(!unifiable(
            &Term::nullary("zero"),
            &Term::sym("succ", vec![Term::var("x")])
        ));
    }

    #[test]
    fn wildcard_unifies_with_everything() {
        let t = Term::sym("pair", vec![Term::nullary("zero"), Term::nullary("zero")]);
        assert!(unifiable(&Term::Wildcard, &t));
    }

    #[test]
    fn unifiable_occurs_check() {
        let x = Term::var("x");
        let succ_x = Term::sym("succ", vec![Term::var("x")]);
        assert!(!unifiable(&x, &succ_x));
    }

    #[test]
    fn unifiable_repeated_variable_consistency() {
        // f(x, x) does not unify with f(zero, succ(zero)).
        let lhs = Term::sym("f", vec![Term::var("x"), Term::var("x")]);
        let rhs = Term::sym(
            "f",
            vec![
                Term::nullary("zero"),
                Term::sym("succ", vec![Term::nullary("zero")]),
            ],
        );
        assert!(!unifiable(&lhs, &rhs));
    }

    #[test]
    fn type_order_and_arity() {
        assert_eq!(SimpleType::Base.order(), 0);
        assert_eq!(SimpleType::Base.arity(), 0);
        let binary = SimpleType::first_order(2);
        assert_eq!(binary.order(), 1);
        assert_eq!(binary.arity(), 2);
        let second = SimpleType::Arrow(
            Box::new(SimpleType::first_order(1)),
            Box::new(SimpleType::Base),
        );
        assert_eq!(second.order(), 2);
        assert_eq!(second.arity(), 1);
    }

    #[test]
    fn compact_position_display_elides_unary_indices() {
        let mut alpha = RankedAlphabet::new();
        alpha.insert_first_order("pair", 2).unwrap();
        alpha.insert_first_order("succ", 1).unwrap();
        let p = pos(&[("pair", 1), ("succ", 1)]);
        assert_eq!(p.display_compact(&alpha), "pair.1.succ.1");
        let q = pos(&[("succ", 1), ("succ", 1), ("succ", 1)]);
        assert_eq!(q.display_compact(&alpha), "succ.succ.succ.1");
        assert_eq!(Position::root().display_compact(&alpha), "\u{3b5}");
    }

    #[test]
    fn erase_projection() {
        let p = pos(&[("c", 1), ("d", 2)]);
        assert_eq!(p.erase(), vec![1, 2]);
    }

    #[test]
    fn parse_display_roundtrip() {
        for src in ["zero", "succ(zero)", "pair(succ(zero), ?)", "cons(zero, nil)"] {
            let t = parse_ground_term(src).unwrap();
            assert_eq!(t.to_string(), src);
        }
    }

    #[test]
    fn applicative_display() {
        let t = Term::sym(
            "succ",
            vec![Term::apply("Length", vec![Term::var("xs")])],
        );
        assert_eq!(display_applicative(&t), "succ (Length xs)");
    }
}
