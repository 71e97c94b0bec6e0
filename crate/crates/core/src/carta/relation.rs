//! Second construction step: analyzing function calls.
//!
//! Every variable used inside a call argument links its own state to the
//! callee state named by the variable's path in that argument. The closure
//! of these pairs drives the final merge. Alongside the raw pairs we record
//! the argument shapes (for pruning control paths no call can reach) and,
//! per never-matched variable, which callee states its value flows into at
//! each leaf of its scope (so the merge only strengthens variables whose
//! value reaches a matching callee on every path).

use std::collections::{BTreeMap, BTreeSet};

use super::build::state_name;
use super::State;
use crate::frontend::{CoreExpr, CoreProgram};
use crate::term::Term;

/// One generator of the equivalence: variable state, callee position state,
/// and the shape of the call argument (nested calls opaque).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairInfo {
    pub var_state: State,
    pub callee_state: State,
    pub arg_shape: Term,
}

/// The call-derived state equivalence, before and after closure.
#[derive(Debug, Clone, Default)]
pub struct StateRelation {
    pub generators: BTreeSet<(State, State)>,
    pub(crate) infos: Vec<PairInfo>,
    /// For each never-matched variable's state: one entry per leaf
    /// expression in its scope, holding the callee states the variable
    /// flows into there.
    pub(crate) leaf_flows: BTreeMap<State, Vec<BTreeSet<State>>>,
}

impl StateRelation {
    /// Equivalence classes of size two or more, after the
    /// reflexive-symmetric-transitive closure, ordered by smallest member.
    pub fn classes(&self) -> Vec<BTreeSet<State>> {
        let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
        fn find<'a>(parent: &BTreeMap<&'a str, &'a str>, mut s: &'a str) -> &'a str {
            while let Some(&p) = parent.get(s) {
                if p == s {
                    break;
                }
                s = p;
            }
            s
        }
        for (a, b) in &self.generators {
            for s in [a.as_str(), b.as_str()] {
                parent.entry(s).or_insert(s);
            }
            let (ra, rb) = (find(&parent, a), find(&parent, b));
            if ra != rb {
                let keep = ra.min(rb);
                let drop = ra.max(rb);
                parent.insert(drop, keep);
            }
        }
        let mut classes: BTreeMap<&str, BTreeSet<State>> = BTreeMap::new();
        let keys: Vec<&str> = parent.keys().copied().collect();
        for s in keys {
            classes
                .entry(find(&parent, s))
                .or_default()
                .insert(s.to_string());
        }
        classes.into_values().filter(|c| c.len() >= 2).collect()
    }

    /// Argument shapes of all calls whose position states land in `class`.
    pub fn arg_shapes_of(&self, class: &BTreeSet<State>) -> BTreeSet<Term> {
        self.infos
            .iter()
            .filter(|i| class.contains(&i.callee_state))
            .map(|i| i.arg_shape.clone())
            .collect()
    }

    pub fn leaf_flows_of(&self, state: &str) -> Option<&[BTreeSet<State>]> {
        self.leaf_flows.get(state).map(Vec::as_slice)
    }
}

/// Replaces nested call results by `?`: the shape the caller guarantees.
fn opaque(t: &Term) -> Term {
    match t {
        Term::Nonterminal(..) => Term::Wildcard,
        Term::Sym(name, children) => {
            Term::Sym(name.clone(), children.iter().map(opaque).collect())
        }
        other => other.clone(),
    }
}

fn collect_apps<'t>(t: &'t Term, out: &mut Vec<(&'t str, &'t Term)>) {
    match t {
        Term::Nonterminal(name, args) => {
            out.push((name, &args[0]));
            args.iter().for_each(|a| collect_apps(a, out));
        }
        Term::Sym(_, children) => children.iter().for_each(|c| collect_apps(c, out)),
        _ => {}
    }
}

fn all_scrutinees(expr: &CoreExpr, out: &mut BTreeSet<String>) {
    if let CoreExpr::Match {
        scrutinee,
        branches,
        ..
    } = expr
    {
        out.insert(scrutinee.clone());
        for b in branches {
            all_scrutinees(&b.body, out);
        }
    }
}

/// Builds the call equivalence from all applications in the program:
/// for each call `F(e)`, each variable `x` free in `e` (outside nested
/// calls), and each path `s` to `x` in `e`, the pair
/// `(state(x), q_{F.s})` is generated.
pub fn call_equivalence(cp: &CoreProgram, var_states: &BTreeMap<String, State>) -> StateRelation {
    let mut rel = StateRelation::default();

    let mut matched = BTreeSet::new();
    for def in &cp.defs {
        all_scrutinees(&def.body, &mut matched);
    }

    for def in &cp.defs {
        let mut scope = vec![def.param.clone()];
        walk(cp, var_states, &matched, &def.body, &mut scope, &mut rel);
    }
    rel
}

fn walk(
    cp: &CoreProgram,
    var_states: &BTreeMap<String, State>,
    matched: &BTreeSet<String>,
    expr: &CoreExpr,
    scope: &mut Vec<String>,
    rel: &mut StateRelation,
) {
    match expr {
        CoreExpr::Leaf { term, .. } => {
            let mut apps = Vec::new();
            collect_apps(term, &mut apps);

            let mut flows: BTreeMap<String, BTreeSet<State>> = BTreeMap::new();
            for (callee, arg) in &apps {
                let shape = opaque(arg);
                for x in shape.free_vars() {
                    let var_state = match var_states.get(&x) {
                        Some(s) => s.clone(),
                        None => continue,
                    };
                    for path in shape.paths_to(&x) {
                        let callee_state = state_name(callee, &path, &cp.alphabet);
                        rel.generators
                            .insert((var_state.clone(), callee_state.clone()));
                        rel.infos.push(PairInfo {
                            var_state: var_state.clone(),
                            callee_state: callee_state.clone(),
                            arg_shape: shape.clone(),
                        });
                        flows.entry(x.clone()).or_default().insert(callee_state);
                    }
                }
            }

            for v in scope.iter() {
                if matched.contains(v) {
                    continue;
                }
                let state = match var_states.get(v) {
                    Some(s) => s.clone(),
                    None => continue,
                };
                let flow = flows.get(v).cloned().unwrap_or_default();
                rel.leaf_flows.entry(state).or_default().push(flow);
            }
        }
        CoreExpr::Match { branches, .. } => {
            for b in branches {
                let before = scope.len();
                scope.extend(b.binders.iter().cloned());
                walk(cp, var_states, matched, &b.body, scope, rel);
                scope.truncate(before);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carta::build::build_step1;
    use crate::frontend::{parse, preprocess};

    fn relation(src: &str) -> StateRelation {
        let (cp, diags) = preprocess(&parse(src).unwrap());
        assert!(diags.is_empty(), "{diags:?}");
        let step1 = build_step1(&cp);
        call_equivalence(&cp, &step1.var_states)
    }

    const ACKERMANN_SRC: &str = super::super::build::tests::ACKERMANN_SRC;

    #[test]
    fn ackermann_generators_are_the_three_pairs_plus_main() {
        let rel = relation(ACKERMANN_SRC);
        let pairs: BTreeSet<(String, String)> = rel
            .generators
            .iter()
            .filter(|(a, b)| !(a == "q_Main" || b == "q_Main"))
            .cloned()
            .collect();
        assert_eq!(
            pairs,
            BTreeSet::from([
                (
                    "q_Ack.pair.1.succ.1".to_string(),
                    "q_Ack.pair.1.succ.1".to_string()
                ),
                ("q_Ack.pair.1.succ.1".to_string(), "q_Ack.pair.1".to_string()),
                ("q_Ack.pair.2.succ.1".to_string(), "q_Ack.pair.2".to_string()),
            ])
        );
        // The Main wrapper contributes its own pair.
        assert!(rel
            .generators
            .contains(&("q_Main".to_string(), "q_Ack".to_string())));
    }

    #[test]
    fn no_applications_means_no_generators() {
        let rel = relation("def Main(x) = pair(x, x)");
        assert!(rel.generators.is_empty());
        assert!(rel.classes().is_empty());
    }

    #[test]
    fn repeated_argument_variable_merges_three_states() {
        let rel = relation("def Main(x) = F(pair(x, x))\ndef F(p) = p");
        assert!(rel
            .generators
            .contains(&("q_Main".to_string(), "q_F.pair.1".to_string())));
        assert!(rel
            .generators
            .contains(&("q_Main".to_string(), "q_F.pair.2".to_string())));
        let classes = rel.classes();
        assert_eq!(classes.len(), 1);
        assert!(classes[0].contains("q_Main"));
        assert!(classes[0].contains("q_F.pair.1"));
        assert!(classes[0].contains("q_F.pair.2"));
    }

    #[test]
    fn variables_inside_nested_calls_belong_to_the_inner_call() {
        let rel = relation(
            "def Main(x) = F(pair(zero, G(x)))\ndef F(p) = p\ndef G(y) = y",
        );
        // x flows into G at the root, not into F at pair.2.g...
        assert!(rel
            .generators
            .contains(&("q_Main".to_string(), "q_G".to_string())));
        assert!(!rel
            .generators
            .iter()
            .any(|(_, b)| b.starts_with("q_F.pair.2")));
    }

    #[test]
    fn leaf_flows_track_call_free_leaves() {
        // In one branch x flows into G, in the other it is returned bare.
        let rel = relation(
            "def Main(w) = case w of { c1(x) -> G(x) | c2(y) -> y }\ndef G(z) = case z of { zero -> zero }",
        );
        let flows = rel.leaf_flows_of("q_Main.c1.1").unwrap();
        assert_eq!(flows.len(), 1);
        assert!(flows[0].contains("q_G"));
        let flows_y = rel.leaf_flows_of("q_Main.c2.1").unwrap();
        assert_eq!(flows_y.len(), 1);
        assert!(flows_y[0].is_empty());
    }

    #[test]
    fn ackermann_closure_has_three_classes() {
        let rel = relation(ACKERMANN_SRC);
        let classes = rel.classes();
        assert_eq!(classes.len(), 3);
        assert!(classes
            .iter()
            .any(|c| c.contains("q_Main") && c.contains("q_Ack")));
        assert!(classes
            .iter()
            .any(|c| c.contains("q_Ack.pair.1") && c.contains("q_Ack.pair.1.succ.1")));
        assert!(classes
            .iter()
            .any(|c| c.contains("q_Ack.pair.2") && c.contains("q_Ack.pair.2.succ.1")));
    }
}
