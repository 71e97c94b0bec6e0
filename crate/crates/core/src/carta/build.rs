//! First construction step: the nested pattern-matching structure of a
//! program becomes automaton transitions, with contexts tracking the
//! control flow.
//!
//! Every variable is represented by a state named after its path in the
//! current context (`q_Ack.pair.1.succ.1`). Matching a variable adds one
//! transition per branch, carrying the branch-refined context. A variable
//! that is never matched below some point gets a single drain transition
//! there, its position wildcarded in the context.

use std::collections::{BTreeMap, BTreeSet};

use super::{Carta, State, Successors, Transition, DRAIN};
use crate::frontend::{CoreExpr, CoreProgram, MAIN};
use crate::term::{Position, RankedAlphabet, Term};

/// Result of the first step: the automaton plus the program-wide mapping
/// from variables to their states.
#[derive(Debug, Clone)]
pub struct Step1 {
    pub carta: Carta,
    pub var_states: BTreeMap<String, State>,
}

/// Path-based state naming: `q_F` for the root, `q_F.<path>` below.
pub fn state_name(function: &str, path: &Position, alphabet: &RankedAlphabet) -> State {
    if path.is_root() {
        format!("q_{function}")
    } else {
        format!("q_{function}.{}", path.display_compact(alphabet))
    }
}

struct Builder<'p> {
    alphabet: &'p RankedAlphabet,
    transitions: Vec<Transition>,
    var_states: BTreeMap<String, State>,
    states: BTreeSet<State>,
}

/// Variables scrutinized anywhere within the expression.
fn scrutinized(expr: &CoreExpr, out: &mut BTreeSet<String>) {
    if let CoreExpr::Match {
        scrutinee,
        branches,
        ..
    } = expr
    {
        out.insert(scrutinee.clone());
        for b in branches {
            scrutinized(&b.body, out);
        }
    }
}

impl<'p> Builder<'p> {
    fn drain(&mut self, context: &Term, var: &str) {
        let state = self.var_states[var].clone();
        for path in context.paths_to(var) {
            let blurred = context
                .replace_at(&path, &Term::Wildcard)
                .expect("path comes from the context itself");
            self.transitions.push(Transition {
                state: state.clone(),
                context: blurred,
                path,
                successors: Successors::Drain,
            });
        }
    }

    fn walk(&mut self, function: &str, unmatched: Vec<String>, context: Term, expr: &CoreExpr) {
        match expr {
            CoreExpr::Leaf { .. } => {
                for v in &unmatched {
                    self.drain(&context, v);
                }
            }
            CoreExpr::Match {
                scrutinee,
                branches,
                ..
            } => {
                // Hoist drains for variables no deeper match will touch, so
                // one generalized transition covers all branches below.
                let mut matched_below = BTreeSet::new();
                scrutinized(expr, &mut matched_below);
                let mut remaining = Vec::new();
                for v in unmatched {
                    if v != *scrutinee && !matched_below.contains(&v) {
                        self.drain(&context, &v);
                    } else {
                        remaining.push(v);
                    }
                }

                let scrutinee_state = self.var_states[scrutinee].clone();
                let scrutinee_pos = context
                    .paths_to(scrutinee)
                    .into_iter()
                    .next()
                    .expect("scrutinee occurs in the context");

                for branch in branches {
                    let refined = Term::Sym(
                        branch.ctor.clone(),
                        branch.binders.iter().map(Term::var).collect(),
                    );
                    let branch_context = context.substitute(scrutinee, &refined);
                    let mut successors = Vec::with_capacity(branch.binders.len());
                    for binder in &branch.binders {
                        let path = branch_context
                            .paths_to(binder)
                            .into_iter()
                            .next()
                            .expect("binder occurs in the refined context");
                        let state = state_name(function, &path, self.alphabet);
                        self.var_states.insert(binder.clone(), state.clone());
                        self.states.insert(state.clone());
                        successors.push(state);
                    }
                    self.transitions.push(Transition {
                        state: scrutinee_state.clone(),
                        context: branch_context.clone(),
                        path: scrutinee_pos.clone(),
                        successors: Successors::States(successors),
                    });

                    let mut v = Vec::with_capacity(remaining.len() + branch.binders.len());
                    v.extend(remaining.iter().filter(|w| *w != scrutinee).cloned());
                    v.extend(branch.binders.iter().cloned());
                    self.walk(function, v, branch_context, &branch.body);
                }
            }
        }
    }
}

/// Builds the first-step automaton for a validated core program.
pub fn build_step1(cp: &CoreProgram) -> Step1 {
    let mut b = Builder {
        alphabet: &cp.alphabet,
        transitions: Vec::new(),
        var_states: BTreeMap::new(),
        states: BTreeSet::from([DRAIN.to_string()]),
    };

    for def in &cp.defs {
        let root = state_name(&def.name, &Position::root(), &cp.alphabet);
        b.states.insert(root.clone());
        b.var_states.insert(def.param.clone(), root);
        b.walk(
            &def.name,
            vec![def.param.clone()],
            Term::var(def.param.clone()),
            &def.body,
        );
    }

    for t in &b.transitions {
        b.states.insert(t.state.clone());
        if let Successors::States(succs) = &t.successors {
            b.states.extend(succs.iter().cloned());
        }
    }

    let initial = state_name(MAIN, &Position::root(), &cp.alphabet);
    Step1 {
        carta: Carta {
            alphabet: cp.alphabet.clone(),
            states: b.states,
            transitions: b.transitions,
            initial,
            aliases: BTreeMap::new(),
        },
        var_states: b.var_states,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::carta::{accepts, check_no_conflicts};
    use crate::frontend::{parse, preprocess};
    use crate::term::parse_ground_term;

    pub(crate) const ACKERMANN_SRC: &str = "
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

    pub(crate) const CHECK_SRC: &str = "
def Main(x) = Check(x)
def Check(s) = case s of {
  succ(s1) -> case s1 of {
    succ(s2) -> case s2 of {
      succ(s3) -> case s3 of { foo -> yes }
    }
  }
}
";

    fn step1_of(src: &str) -> Step1 {
        let (cp, diags) = preprocess(&parse(src).unwrap());
        assert!(diags.is_empty(), "{diags:?}");
        build_step1(&cp)
    }

    #[test]
    fn ackermann_step1_matches_the_nine_transitions() {
        let s = step1_of(ACKERMANN_SRC);
        let expected = "\
delta(q_Main, [*], \u{3b5}) = q*..
delta(q_Ack, [pair(m, n)], \u{3b5}) = q_Ack.pair.1 q_Ack.pair.2
delta(q_Ack.pair.1, pair([zero], n), pair.1) = \u{3b5}
delta(q_Ack.pair.2, pair(zero, [*]), pair.2) = q*..
delta(q_Ack.pair.1, pair([succ(x)], n), pair.1) = q_Ack.pair.1.succ.1
delta(q_Ack.pair.1.succ.1, pair(succ([*]), n), pair.1.succ.1) = q*..
delta(q_Ack.pair.2, pair(succ(x), [zero]), pair.2) = \u{3b5}
delta(q_Ack.pair.2, pair(succ(x), [succ(y)]), pair.2) = q_Ack.pair.2.succ.1
delta(q_Ack.pair.2.succ.1, pair(succ(x), succ([*])), pair.2.succ.1) = q*..
";
        assert_eq!(s.carta.dump(), expected);
        assert!(check_no_conflicts(&s.carta).is_empty());
        assert_eq!(
            s.carta.states,
            BTreeSet::from(
                [
                    "q_Main",
                    "q_Ack",
                    "q_Ack.pair.1",
                    "q_Ack.pair.2",
                    "q_Ack.pair.1.succ.1",
                    "q_Ack.pair.2.succ.1",
                    DRAIN,
                ]
                .map(str::to_string)
            )
        );
    }

    #[test]
    fn check_chain_has_four_transitions_ending_in_foo() {
        let s = step1_of(CHECK_SRC);
        let lines: Vec<&str> = s.carta.dump().lines().map(str::trim).collect();
        // One drain for Main plus the four-transition chain.
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[1],
            "delta(q_Check, [succ(s1)], \u{3b5}) = q_Check.succ.1"
        );
        assert_eq!(
            lines[2],
            "delta(q_Check.succ.1, succ([succ(s2)]), succ.1) = q_Check.succ.succ.1"
        );
        assert_eq!(
            lines[3],
            "delta(q_Check.succ.succ.1, succ(succ([succ(s3)])), succ.succ.1) = q_Check.succ.succ.succ.1"
        );
        assert_eq!(
            lines[4],
            "delta(q_Check.succ.succ.succ.1, succ(succ(succ([foo]))), succ.succ.succ.1) = \u{3b5}"
        );
    }

    #[test]
    fn check_automaton_accepts_exactly_the_matched_tree() {
        let s = step1_of(CHECK_SRC);
        let a = s.carta.restart("q_Check").unwrap();
        let t = |s: &str| parse_ground_term(s).unwrap();
        assert!(accepts(&a, &t("succ(succ(succ(foo)))")));
        assert!(!accepts(&a, &t("zero")));
        assert!(!accepts(&a, &t("succ(succ(foo))")));
        assert!(!accepts(&a, &t("succ(succ(succ(zero)))")));
        assert!(!accepts(&a, &t("succ(succ(succ(succ(foo))))")));
    }

    #[test]
    fn identity_program_gets_one_drain() {
        let s = step1_of("def Main(x) = x");
        assert_eq!(s.carta.dump(), "delta(q_Main, [*], \u{3b5}) = q*..\n");
    }

    #[test]
    fn var_state_map_covers_all_binders() {
        let s = step1_of(ACKERMANN_SRC);
        let states: Vec<&State> = ["m", "n", "x", "y"]
            .iter()
            .map(|v| s.var_states.get(*v).expect("binder has a state"))
            .collect();
        assert_eq!(
            states,
            vec![
                "q_Ack.pair.1",
                "q_Ack.pair.2",
                "q_Ack.pair.1.succ.1",
                "q_Ack.pair.2.succ.1"
            ]
        );
    }
}
