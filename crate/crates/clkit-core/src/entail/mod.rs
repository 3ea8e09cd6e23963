//! Entailment between predicates.
//!
//! The decidable fragment is described by three syntactic rule classes
//! computed here. For it, configurations of bounded degree are encoded
//! as Gaifman heaps ([`gaifman`]) and the SID is translated into an
//! annotated SL SID ([`sl`]) whose models are those encodings. The SL
//! entailment itself is left to an external solver; this module only
//! offers a bounded semantic check.

pub mod gaifman;
pub mod sl;

use crate::norm::{NRule, NSid, VarId};
use crate::semantics::{check_model, check_model_prefix, enumerate_models, Model, ModelBudget, OracleError};
use crate::syntax::{Sid, SidError};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntailError {
    Sid(SidError),
    UnknownPredicate(String),
    Oracle(OracleError),
}

impl fmt::Display for EntailError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntailError::Sid(e) => write!(f, "{e}"),
            EntailError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
            EntailError::Oracle(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EntailError {}

impl From<SidError> for EntailError {
    fn from(e: SidError) -> Self {
        EntailError::Sid(e)
    }
}

impl From<OracleError> for EntailError {
    fn from(e: OracleError) -> Self {
        EntailError::Oracle(e)
    }
}

/// Predicate name to the 1-based indices of its profile.
pub type Profile = BTreeMap<String, BTreeSet<usize>>;

/// The profile with 0-based indices, per predicate index.
pub(crate) fn profile_of(n: &NSid) -> Vec<BTreeSet<usize>> {
    let mut prof: Vec<BTreeSet<usize>> = n.preds.iter().map(|p| (0..p.arity()).collect()).collect();
    loop {
        let mut changed = false;
        for r in &n.rules {
            for c in &r.calls {
                for (i, &y) in c.args.iter().enumerate() {
                    let ok = (y as usize) < r.arity && prof[r.pred].contains(&(y as usize));
                    if !ok && prof[c.pred].remove(&i) {
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return prof;
        }
    }
}

/// The pointwise greatest profile.
pub fn compute_profile(sid: &Sid) -> Result<Profile, SidError> {
    let n = NSid::from_sid(sid)?;
    Ok(n.preds
        .iter()
        .zip(profile_of(&n))
        .map(|(p, s)| (p.name.clone(), s.into_iter().map(|i| i + 1).collect()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleClass {
    pub pred: String,
    /// Global rule index.
    pub rule: usize,
    pub progressing: bool,
    pub connected: bool,
    pub e_restricted: bool,
}

/// Variable classes of a rule under its equalities.
pub(crate) fn rule_classes(r: &NRule) -> Vec<VarId> {
    let mut parent: Vec<VarId> = (0..r.nvars() as VarId).collect();
    fn find(p: &mut [VarId], mut x: VarId) -> VarId {
        while p[x as usize] != x {
            p[x as usize] = p[p[x as usize] as usize];
            x = p[x as usize];
        }
        x
    }
    for &(a, b) in &r.eqs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
    (0..r.nvars() as VarId).map(|v| find(&mut parent, v)).collect()
}

fn classify(r: &NRule, prof: &[BTreeSet<usize>]) -> (bool, bool, bool) {
    let cl = rule_classes(r);
    let c = |v: VarId| cl[v as usize];
    let progressing = r.arity >= 1 && {
        let x1 = c(0);
        let comps_ok = r.comps.len() == 1 && c(r.comps[0]) == x1;
        let states_ok = r.states.iter().all(|&(v, _)| c(v) == x1);
        let inters_ok = r.inters.iter().all(|it| it.vars.iter().any(|&v| c(v) == x1));
        let mut covered: BTreeSet<VarId> = r.calls.iter().flat_map(|k| k.args.iter().map(|&a| c(a))).collect();
        covered.insert(x1);
        let all: BTreeSet<VarId> = (0..r.nvars() as VarId).map(c).collect();
        comps_ok && states_ok && inters_ok && covered == all
    };
    let anchors: BTreeSet<VarId> = core::iter::once(0)
        .chain(prof[r.pred].iter().map(|&i| i as VarId))
        .filter(|&v| (v as usize) < r.arity)
        .map(c)
        .collect();
    let connected = r.calls.iter().all(|k| {
        k.args.first().is_some_and(|&z| {
            r.inters.iter().any(|it| {
                it.vars.iter().any(|&v| c(v) == c(z)) && it.vars.iter().any(|&v| anchors.contains(&c(v)))
            })
        })
    });
    let profile_classes: BTreeSet<VarId> = prof[r.pred].iter().map(|&i| c(i as VarId)).collect();
    let e_restricted = r
        .neqs
        .iter()
        .all(|&(a, b)| profile_classes.contains(&c(a)) || profile_classes.contains(&c(b)));
    (progressing, connected, e_restricted)
}

/// The three rule classes, per rule. Variables are compared up to the
/// equalities of the rule.
pub fn classify_rules(sid: &Sid) -> Result<Vec<RuleClass>, SidError> {
    let n = NSid::from_sid(sid)?;
    Ok(classify_nsid(&n))
}

pub(crate) fn classify_nsid(n: &NSid) -> Vec<RuleClass> {
    let prof = profile_of(n);
    n.rules
        .iter()
        .map(|r| {
            let (progressing, connected, e_restricted) = classify(r, &prof);
            RuleClass {
                pred: n.preds[r.pred].name.clone(),
                rule: r.id,
                progressing,
                connected,
                e_restricted,
            }
        })
        .collect()
}

/// SID-level flags: `(progressing, connected, e_restricted)`.
pub fn sid_flags(classes: &[RuleClass]) -> (bool, bool, bool) {
    (
        classes.iter().all(|c| c.progressing),
        classes.iter().all(|c| c.connected),
        classes.iter().all(|c| c.e_restricted),
    )
}

/// How the parameters of the two sides are matched. The shared prefix is
/// always identified; the trailing parameters of the longer side are
/// existentially quantified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArityRelation {
    Equal,
    /// The right-hand side has more parameters.
    RightLonger,
    /// The left-hand side has more parameters.
    LeftLonger,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntailVerdict {
    /// Every enumerated model of the left side is a model of the right.
    HoldsUpToBound,
    Counterexample(Model),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntailReport {
    pub verdict: EntailVerdict,
    pub relation: ArityRelation,
    /// Number of left-hand models checked.
    pub models: usize,
}

/// Checks `A(x1..) |= B(x1..)` on every model of `A` within the budget.
/// A counterexample is definitive; a positive answer only covers the
/// budget.
pub fn decide_entail_bounded(sid: &Sid, a: &str, b: &str, budget: &ModelBudget) -> Result<EntailReport, EntailError> {
    let n = NSid::from_sid(sid)?;
    let pa = n.pred_index(a).ok_or_else(|| EntailError::UnknownPredicate(a.into()))?;
    let pb = n.pred_index(b).ok_or_else(|| EntailError::UnknownPredicate(b.into()))?;
    let (la, lb) = (n.preds[pa].arity(), n.preds[pb].arity());
    let relation = match la.cmp(&lb) {
        core::cmp::Ordering::Equal => ArityRelation::Equal,
        core::cmp::Ordering::Less => ArityRelation::RightLonger,
        core::cmp::Ordering::Greater => ArityRelation::LeftLonger,
    };
    let models = enumerate_models(&n, a, budget)?;
    for m in &models {
        let ok = match relation {
            ArityRelation::RightLonger => check_model_prefix(&n, b, &m.config, &m.store, None)?,
            _ => check_model(&n, b, &m.config, &m.store[..lb], None)?,
        };
        if !ok {
            return Ok(EntailReport {
                verdict: EntailVerdict::Counterexample(m.clone()),
                relation,
                models: models.len(),
            });
        }
    }
    Ok(EntailReport {
        verdict: EntailVerdict::HoldsUpToBound,
        relation,
        models: models.len(),
    })
}

/// Budget used for entailment checks: states of unconstrained nodes are
/// enumerated, since the right-hand side may constrain them.
pub fn entail_budget(depth: usize, universe: usize) -> ModelBudget {
    let mut b = ModelBudget::new(depth, universe);
    b.states_enumerated = true;
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{generate_family, parse_sid, ring_entailment_sid, Family};

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn profiles() {
        let p = compute_profile(&parse_sid("pred A(x1){ rule B(x1); } pred B(x1){ rule comp(x1); }").unwrap()).unwrap();
        assert_eq!((p["A"].clone(), p["B"].clone()), (set(&[1]), set(&[1])));
        let p = compute_profile(&generate_family(Family::Ring { h_cap: 1, t_cap: 1 }).unwrap()).unwrap();
        assert_eq!(p["ring_1_1"], set(&[1]));
        assert_eq!(p["chain_0_0"], set(&[]));
        assert_eq!(p["chain_0_1"], set(&[]));
        let p = compute_profile(&parse_sid("pred A(x1){ rule comp(x1); }").unwrap()).unwrap();
        assert_eq!(p["A"], set(&[1]));
    }

    #[test]
    fn profile_is_maximal() {
        // adding any missing index breaks the defining condition
        let sid = ring_entailment_sid(2, 1, false).unwrap();
        let n = NSid::from_sid(&sid).unwrap();
        let prof = profile_of(&n);
        let holds = |prof: &[BTreeSet<usize>]| {
            n.rules.iter().all(|r| {
                r.calls.iter().all(|c| {
                    prof[c.pred]
                        .iter()
                        .all(|&i| (c.args[i] as usize) < r.arity && prof[r.pred].contains(&(c.args[i] as usize)))
                })
            })
        };
        assert!(holds(&prof));
        for p in 0..n.preds.len() {
            for i in 0..n.preds[p].arity() {
                if !prof[p].contains(&i) {
                    let mut bigger = prof.clone();
                    bigger[p].insert(i);
                    assert!(!holds(&bigger), "{} {i}", n.preds[p].name);
                }
            }
        }
    }

    #[test]
    fn ring_rules_are_in_the_fragment() {
        let sid = ring_entailment_sid(2, 2, false).unwrap();
        let classes = classify_rules(&sid).unwrap();
        assert_eq!(sid_flags(&classes), (true, true, true));
    }

    #[test]
    fn class_violations() {
        let behavior = "behavior { ports { in, out } states { s } }";
        let no_comp = parse_sid(&alloc::format!("{behavior} pred A(x){{ rule exists y . inter(x.out, y.in) * B(y); }} pred B(x){{ rule comp(x); }}")).unwrap();
        assert!(!classify_rules(&no_comp).unwrap()[0].progressing);
        let neq = parse_sid(&alloc::format!(
            "{behavior} pred A(x){{ rule exists y z . comp(x) * inter(x.out, y.in) * inter(x.out, z.in) * y != z * B(y) * B(z); }} pred B(x){{ rule comp(x); }}"
        ))
        .unwrap();
        let c = &classify_rules(&neq).unwrap()[0];
        assert!(c.progressing && c.connected && !c.e_restricted);
        let unconnected = parse_sid(&alloc::format!("{behavior} pred A(x){{ rule exists y . comp(x) * B(y); }} pred B(x){{ rule comp(x); }}")).unwrap();
        let c = &classify_rules(&unconnected).unwrap()[0];
        assert!(c.progressing && !c.connected);
    }

    #[test]
    fn bounded_entailment() {
        let sid = ring_entailment_sid(1, 1, false).unwrap();
        let r = decide_entail_bounded(&sid, "ring_1_1", "ring_1_1", &entail_budget(4, 4)).unwrap();
        assert_eq!(r.verdict, EntailVerdict::HoldsUpToBound);
        assert!(r.models > 0);
        let r = decide_entail_bounded(&sid, "A2_1_1", "ring_1_1", &entail_budget(4, 4)).unwrap();
        assert_eq!((r.verdict, r.relation), (EntailVerdict::HoldsUpToBound, ArityRelation::LeftLonger));
        let r = decide_entail_bounded(&sid, "ring_1_1", "A2_1_1", &entail_budget(4, 4)).unwrap();
        assert_eq!(r.relation, ArityRelation::RightLonger);
        let swapped = ring_entailment_sid(1, 1, true).unwrap();
        let r = decide_entail_bounded(&swapped, "A2_1_1", "ring_1_1", &entail_budget(4, 4)).unwrap();
        assert!(matches!(r.verdict, EntailVerdict::Counterexample(_)));
    }
}
