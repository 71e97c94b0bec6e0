//! Context-aware ranked tree automata: the crash model of a program.
//!
//! A transition fires at a node when its context term unifies with the
//! actual tree fragment around the node: the transition's path locates the
//! node inside the context, so the context can constrain ancestors, siblings
//! and their descendants. The distinguished drain state `q*` accepts any
//! term, and the input wildcard `?` is accepted in every state.

mod build;
mod merge;
mod minimize;
mod relation;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{unifiable, Position, RankedAlphabet, Term};

pub use build::{build_step1, state_name, Step1};
pub use merge::{merge, MergeOutcome, MergeWarning};
pub use minimize::minimize;
pub use relation::{call_equivalence, StateRelation};

/// States are named after the paths that create them (`q_Ack.pair.1`), so
/// dumps can be compared against hand-written automata textually.
pub type State = String;

/// The drain state: accepts any term.
pub const DRAIN: &str = "q*";

/// Successor assignment of a transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Successors {
    /// One state per child of the constructor read at the target position.
    States(Vec<State>),
    /// Every child goes to the drain state, whatever the constructor is
    /// (written `q*..`). The target position holds a wildcard.
    Drain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub state: State,
    /// Context term over constructors, variables and `*` wildcards.
    pub context: Term,
    /// Position of the current node within the context.
    pub path: Position,
    pub successors: Successors,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Carta {
    pub alphabet: RankedAlphabet,
    pub states: BTreeSet<State>,
    pub transitions: Vec<Transition>,
    pub initial: State,
    /// Names of states that were unified away by minimization, mapped to
    /// their surviving representative. Restarting resolves through this.
    pub aliases: BTreeMap<State, State>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CartaError {
    #[error("{0} is not a state of the automaton")]
    UnknownState(String),
}

impl Carta {
    pub fn resolve<'a>(&'a self, state: &'a str) -> &'a str {
        self.aliases.get(state).map(String::as_str).unwrap_or(state)
    }

    /// The automaton with its initial state replaced.
    pub fn restart(&self, state: &str) -> Result<Carta, CartaError> {
        let resolved = self.resolve(state);
        if !self.states.contains(resolved) {
            return Err(CartaError::UnknownState(state.to_string()));
        }
        Ok(Carta {
            initial: resolved.to_string(),
            ..self.clone()
        })
    }

    pub fn transitions_from<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a Transition> {
        self.transitions.iter().filter(move |t| t.state == state)
    }

    /// One transition per line:
    /// `delta(q, context, path) = successors`, with the path's target
    /// bracketed inside the context and `*` for wildcards.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in &self.transitions {
            out.push_str(&self.render_transition(t));
            out.push('\n');
        }
        out
    }

    pub fn render_transition(&self, t: &Transition) -> String {
        let succ = match &t.successors {
            Successors::Drain => "q*..".to_string(),
            Successors::States(list) if list.is_empty() => "\u{3b5}".to_string(),
            Successors::States(list) => list.join(" "),
        };
        format!(
            "delta({}, {}, {}) = {}",
            t.state,
            render_context(&t.context, &t.path),
            t.path.display_compact(&self.alphabet),
            succ
        )
    }
}

fn render_context(ctx: &Term, target: &Position) -> String {
    fn go(t: &Term, here: &mut Vec<(String, usize)>, target: &[(String, usize)], out: &mut String) {
        let is_target = here.len() == target.len()
            && here.iter().zip(target).all(|(a, b)| a == b);
        if is_target {
            out.push('[');
        }
        match t {
            Term::Var(name) => out.push_str(name),
            Term::Wildcard => out.push('*'),
            Term::Nonterminal(name, _) => out.push_str(name),
            Term::Sym(name, children) => {
                out.push_str(name);
                if !children.is_empty() {
                    out.push('(');
                    for (i, c) in children.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        here.push((name.clone(), i + 1));
                        go(c, here, target, out);
                        here.pop();
                    }
                    out.push(')');
                }
            }
        }
        if is_target {
            out.push(']');
        }
    }
    let target: Vec<(String, usize)> = target
        .steps()
        .iter()
        .map(|s| (s.ctor.clone(), s.index))
        .collect();
    let mut out = String::new();
    go(ctx, &mut Vec::new(), &target, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Acceptance
// ---------------------------------------------------------------------------

/// Whether the automaton accepts `t` (a constructor term possibly containing
/// `?`). A run labels every node with a state; the node's transition must
/// anchor at the ancestor its path points through, with the full context
/// unifiable against the actual fragment there. `?` is accepted in any
/// state; the drain state accepts any subtree.
pub fn accepts(a: &Carta, t: &Term) -> bool {
    let mut by_state: HashMap<&str, Vec<&Transition>> = HashMap::new();
    for tr in &a.transitions {
        by_state.entry(tr.state.as_str()).or_default().push(tr);
    }
    let mut memo: HashMap<(Vec<usize>, String), bool> = HashMap::new();
    let initial = a.resolve(&a.initial).to_string();
    run(a, &by_state, t, &mut Vec::new(), &initial, &mut memo)
}

fn subtree_by_ints<'t>(t: &'t Term, path: &[usize]) -> &'t Term {
    let mut current = t;
    for &i in path {
        match current {
            Term::Sym(_, children) if i >= 1 && i <= children.len() => {
                current = &children[i - 1];
            }
            _ => panic!("node path leads outside the tree"),
        }
    }
    current
}

fn run(
    a: &Carta,
    by_state: &HashMap<&str, Vec<&Transition>>,
    root: &Term,
    node: &mut Vec<usize>,
    state: &str,
    memo: &mut HashMap<(Vec<usize>, String), bool>,
) -> bool {
    if state == DRAIN {
        return true;
    }
    let here = subtree_by_ints(root, node);
    if matches!(here, Term::Wildcard) {
        return true;
    }
    let key = (node.clone(), state.to_string());
    if let Some(&cached) = memo.get(&key) {
        return cached;
    }

    let (ctor, children_len) = match here {
        Term::Sym(name, children) => (name.as_str(), children.len()),
        _ => {
            memo.insert(key, false);
            return false;
        }
    };

    let mut accepted = false;
    for tr in by_state.get(state).map(Vec::as_slice).unwrap_or(&[]) {
        let depth = tr.path.len();
        if node.len() < depth {
            continue;
        }
        // The path must spell out the route from the anchor down to here.
        if tr.path.erase() != node[node.len() - depth..] {
            continue;
        }
        let anchor = subtree_by_ints(root, &node[..node.len() - depth]);
        if !unifiable(&tr.context, anchor) {
            continue;
        }
        match &tr.successors {
            Successors::Drain => {
                accepted = true;
            }
            Successors::States(succs) => {
                let target = match tr.context.subterm_at(&tr.path) {
                    Ok(t) => t,
                    Err(_) => continue,
                };
                let target_matches = match target {
                    Term::Sym(name, _) => name == ctor,
                    _ => false,
                };
                if !target_matches || succs.len() != children_len {
                    continue;
                }
                let mut all = true;
                for (i, succ) in succs.iter().enumerate() {
                    node.push(i + 1);
                    let ok = run(a, by_state, root, node, a.resolve(succ), memo);
                    node.pop();
                    if !ok {
                        all = false;
                        break;
                    }
                }
                accepted = all;
            }
        }
        if accepted {
            break;
        }
    }
    memo.insert(key, accepted);
    accepted
}

// ---------------------------------------------------------------------------
// Conflicting transitions
// ---------------------------------------------------------------------------

/// A pair of transitions of the same state that could fire at the same node:
/// the shorter path is a suffix of the longer one and the shorter context
/// unifies with the longer context's fragment above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub first: usize,
    pub second: usize,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "transitions {} and {} conflict", self.first, self.second)
    }
}

/// Lists all conflicting transition pairs; empty means deterministic.
pub fn check_no_conflicts(a: &Carta) -> Vec<Conflict> {
    let mut out = Vec::new();
    for i in 0..a.transitions.len() {
        for j in i + 1..a.transitions.len() {
            let (ti, tj) = (&a.transitions[i], &a.transitions[j]);
            if ti.state != tj.state {
                continue;
            }
            if conflicting(ti, tj) || conflicting(tj, ti) {
                out.push(Conflict { first: i, second: j });
            }
        }
    }
    out
}

/// `short` conflicts with `long` when `long.path = prefix . short.path` and
/// `short.context` unifies with `long.context` at that prefix.
fn conflicting(short: &Transition, long: &Transition) -> bool {
    let (sp, lp) = (short.path.steps(), long.path.steps());
    if lp.len() < sp.len() || lp[lp.len() - sp.len()..] != sp[..] {
        return false;
    }
    let prefix = Position::from_steps(lp[..lp.len() - sp.len()].to_vec());
    match long.context.subterm_at(&prefix) {
        Ok(fragment) => unifiable(&short.context, fragment),
        Err(_) => false,
    }
}
