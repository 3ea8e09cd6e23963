//! Degree boundedness.
//!
//! The primed SID threads one extra parameter `x'` through every call. A
//! rule either keeps `x'` apart from all its interaction variables or, in
//! one copy per interaction variable `ξ`, sets `x' = ξ`. The number of
//! bound rules in a derivation of `A'` counts, up to the number of
//! interaction atoms per rule, the interactions of the component `x'`.
//!
//! Degrees are unbounded exactly when a derivation can pump such rules:
//! some hyperedge of the tuple dependency graph, reachable from an `A'`
//! vertex, lies on a cycle and either uses a bound rule itself or has a
//! side child below which a bound rule occurs.

use crate::fresh::fresh_name;
use crate::norm::NSid;
use crate::sat::{least_solution, render_tuple, SatError, SatOptions, Solution};
use crate::syntax::{Formula, PredDef, Sid, SidError};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundError {
    Sid(SidError),
    UnknownPredicate(String),
    Sat(SatError),
    /// A cut-off was requested for an unbounded predicate.
    Unbounded(String),
}

impl fmt::Display for BoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundError::Sid(e) => write!(f, "{e}"),
            BoundError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
            BoundError::Sat(e) => write!(f, "{e}"),
            BoundError::Unbounded(p) => write!(f, "`{p}` has models of unbounded degree"),
        }
    }
}

impl core::error::Error for BoundError {}

impl From<SidError> for BoundError {
    fn from(e: SidError) -> Self {
        BoundError::Sid(e)
    }
}

impl From<SatError> for BoundError {
    fn from(e: SatError) -> Self {
        match e {
            SatError::Sid(e) => BoundError::Sid(e),
            e => BoundError::Sat(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleTag {
    NotBound,
    /// `x' = ξ` for the named interaction variable.
    Bound(String),
}

#[derive(Clone, Debug)]
pub struct PrimedSid {
    /// Only the primed predicates.
    pub sid: Sid,
    /// One tag per rule, in rule order.
    pub tags: Vec<RuleTag>,
    /// Original predicate to its primed copy.
    pub primed: BTreeMap<String, String>,
}

pub fn build_primed_sid(sid: &Sid) -> Result<PrimedSid, BoundError> {
    let n = NSid::from_sid(sid)?;
    let mut taken = sid.pred_names();
    let names: Vec<String> = n
        .preds
        .iter()
        .map(|p| fresh_name(&format!("{}__prime", p.name), &mut taken))
        .collect();
    let mut out = Sid {
        behavior: sid.behavior.clone(),
        preds: Vec::new(),
    };
    let mut tags = Vec::new();
    for (pi, p) in n.preds.iter().enumerate() {
        let mut vars = n.names_of(pi);
        let extra = fresh_name("x_last", &mut vars);
        let mut params = p.params.clone();
        params.push(extra.clone());
        let mut def = PredDef {
            name: names[pi].clone(),
            params,
            rules: Vec::new(),
        };
        for &ri in &p.rules {
            let r = &n.rules[ri];
            let local = n.local_atoms(r);
            let calls: Vec<Formula> = r
                .calls
                .iter()
                .map(|c| {
                    let mut args: Vec<String> = c.args.iter().map(|&a| r.var_names[a as usize].clone()).collect();
                    args.push(extra.clone());
                    Formula::Pred(names[c.pred].clone(), args)
                })
                .collect();
            let ex = || r.var_names[r.arity..].iter().cloned();
            let ivars: Vec<&String> = r.interaction_vars().iter().map(|&v| &r.var_names[v as usize]).collect();
            let mut atoms = local.clone();
            atoms.extend(ivars.iter().map(|xi| Formula::neq(&extra, xi)));
            atoms.extend(calls.iter().cloned());
            def.rules.push(Formula::exists(ex(), Formula::sep(atoms)));
            tags.push(RuleTag::NotBound);
            for xi in ivars {
                let mut atoms = local.clone();
                atoms.push(Formula::eq(&extra, xi));
                atoms.extend(calls.iter().cloned());
                def.rules.push(Formula::exists(ex(), Formula::sep(atoms)));
                tags.push(RuleTag::Bound(xi.clone()));
            }
        }
        out.preds.push(def);
    }
    let primed = n
        .preds
        .iter()
        .zip(names)
        .map(|(p, q)| (p.name.clone(), q))
        .collect();
    Ok(PrimedSid { sid: out, tags, primed })
}

/// Vertices are `(predicate, tuple)` pairs of the least solution; every
/// successful rule application gives an edge to each of its children.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    pub nsid: NSid,
    pub solution: Solution,
    /// Rules that bind the extra parameter, when built from a primed SID.
    pub bound_rules: Vec<bool>,
    offsets: Vec<usize>,
}

/// `(predicate, tuple index)`.
pub type Vertex = (usize, u32);

impl DependencyGraph {
    fn new(nsid: NSid, solution: Solution, bound_rules: Vec<bool>) -> Self {
        let mut offsets = vec![0];
        for ts in &solution.tuples {
            offsets.push(offsets.last().unwrap() + ts.len());
        }
        DependencyGraph {
            nsid,
            solution,
            bound_rules,
            offsets,
        }
    }

    pub fn vertex_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn id(&self, v: Vertex) -> usize {
        self.offsets[v.0] + v.1 as usize
    }

    /// Labelled edges `(src, rule, position, dst)` with 1-based positions.
    pub fn edges(&self) -> Vec<(Vertex, usize, usize, Vertex)> {
        let mut out = Vec::new();
        for h in &self.solution.hyperedges {
            let r = &self.nsid.rules[h.rule];
            for (i, (c, &t)) in r.calls.iter().zip(&h.children).enumerate() {
                out.push(((r.pred, h.tuple), h.rule, i + 1, (c.pred, t)));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// DOT text. Edges are labelled `r#i`; edges of bound rules are bold.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph dependencies {\n");
        for (p, ts) in self.solution.tuples.iter().enumerate() {
            for (i, t) in ts.iter().enumerate() {
                s.push_str(&format!(
                    "  v{} [label=\"{} {}\"];\n",
                    self.id((p, i as u32)),
                    self.nsid.preds[p].name,
                    render_tuple(&self.nsid, p, t)
                ));
            }
        }
        for (src, r, i, dst) in self.edges() {
            let mark = if self.bound_rules.get(r).copied().unwrap_or(false) {
                ", style=bold, color=red"
            } else {
                ""
            };
            s.push_str(&format!(
                "  v{} -> v{} [label=\"r{r}#{i}\"{mark}];\n",
                self.id(src),
                self.id(dst)
            ));
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_dependency_graph(sid: &Sid, cap: usize) -> Result<DependencyGraph, BoundError> {
    let n = NSid::from_sid(sid)?;
    let sol = least_solution(
        &n,
        SatOptions {
            cap,
            record_hyperedges: true,
        },
    )?;
    let k = n.rules.len();
    Ok(DependencyGraph::new(n, sol, vec![false; k]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub bounded: bool,
    /// Largest accumulated count of bound interactions over derivations.
    pub graph_bound: Option<u64>,
    /// `2^{B*} * L * I`, `None` when it does not fit.
    pub formula_bound: Option<u128>,
    pub cutoff: Option<u128>,
    pub vertices: usize,
    pub edges: usize,
}

/// The full analysis on the primed SID, returning its graph as well.
pub fn analyze_bounded(sid: &Sid, pred: &str, cap: usize) -> Result<(BoundReport, DependencyGraph), BoundError> {
    if sid.pred(pred).is_none() {
        sid.validate()?;
        return Err(BoundError::UnknownPredicate(pred.into()));
    }
    let primed = build_primed_sid(sid)?;
    let n = NSid::from_sid(&primed.sid)?;
    let sol = least_solution(
        &n,
        SatOptions {
            cap,
            record_hyperedges: true,
        },
    )?;
    let bound_rules: Vec<bool> = primed.tags.iter().map(|t| matches!(t, RuleTag::Bound(_))).collect();
    let g = DependencyGraph::new(n, sol, bound_rules);
    let start = g.nsid.pred_index(&primed.primed[pred]).unwrap();
    let nv = g.vertex_count();

    let hyper: Vec<(usize, usize, Vec<usize>)> = g
        .solution
        .hyperedges
        .iter()
        .map(|h| {
            let r = &g.nsid.rules[h.rule];
            let kids = r
                .calls
                .iter()
                .zip(&h.children)
                .map(|(c, &t)| g.id((c.pred, t)))
                .collect();
            (g.id((r.pred, h.tuple)), h.rule, kids)
        })
        .collect();
    let weight = |rule: usize| -> u64 {
        if g.bound_rules[rule] {
            g.nsid.rules[rule].inters.len() as u64
        } else {
            0
        }
    };

    let mut pg: DiGraph<(), ()> = DiGraph::with_capacity(nv, hyper.len());
    for _ in 0..nv {
        pg.add_node(());
    }
    for (p, _, kids) in &hyper {
        for &c in kids {
            pg.add_edge(NodeIndex::new(*p), NodeIndex::new(c), ());
        }
    }
    // sinks first
    let sccs = tarjan_scc(&pg);
    let mut scc_of = vec![0usize; nv];
    for (k, comp) in sccs.iter().enumerate() {
        for v in comp {
            scc_of[v.index()] = k;
        }
    }

    let mut reach = vec![false; nv];
    let mut stack: Vec<usize> = (0..g.solution.tuples[start].len()).map(|i| g.id((start, i as u32))).collect();
    for &v in &stack {
        reach[v] = true;
    }
    while let Some(v) = stack.pop() {
        for w in pg.neighbors(NodeIndex::new(v)) {
            if !reach[w.index()] {
                reach[w.index()] = true;
                stack.push(w.index());
            }
        }
    }

    // F(v): largest weight of a derivation below v, with pumping excluded.
    let mut by_scc: Vec<Vec<usize>> = vec![Vec::new(); sccs.len()];
    for (e, (p, _, _)) in hyper.iter().enumerate() {
        by_scc[scc_of[*p]].push(e);
    }
    let mut f = vec![0u64; nv];
    for (k, comp) in sccs.iter().enumerate() {
        let mut best = 0u64;
        for &e in &by_scc[k] {
            let (_, rule, kids) = &hyper[e];
            let v = kids
                .iter()
                .filter(|&&c| scc_of[c] != k)
                .fold(weight(*rule), |acc, &c| acc.saturating_add(f[c]));
            best = best.max(v);
        }
        for v in comp {
            f[v.index()] = best;
        }
    }
    let pos = |v: usize| f[v] > 0;

    let unbounded = hyper.iter().any(|(p, rule, kids)| {
        reach[*p]
            && kids.iter().enumerate().any(|(i, &c)| {
                scc_of[c] == scc_of[*p]
                    && (weight(*rule) > 0 || kids.iter().enumerate().any(|(j, &d)| j != i && pos(d)))
            })
    });

    let graph_bound = if unbounded {
        None
    } else {
        Some(
            (0..g.solution.tuples[start].len())
                .map(|i| f[g.id((start, i as u32))])
                .max()
                .unwrap_or(0),
        )
    };
    let formula_bound = formula_bound(&g.nsid);
    let cutoff = graph_bound.map(|gb| match formula_bound {
        Some(fb) => fb.min(gb as u128),
        None => gb as u128,
    });
    let report = BoundReport {
        bounded: !unbounded,
        graph_bound,
        formula_bound,
        cutoff,
        vertices: nv,
        edges: g.edges().len(),
    };
    Ok((report, g))
}

/// `2^{B*} * L * I` with `B* = 2α + 2α² + p^m α^m`, `m = min(α, β)`, for
/// the maximal arity α, maximal interaction size β, port count `p`,
/// predicate count `L` and maximal number `I` of interaction atoms in a
/// rule.
pub fn formula_bound(n: &NSid) -> Option<u128> {
    let alpha = n.max_arity() as u128;
    let beta = n.max_inter_size() as u128;
    let p = n.behavior.ports.len() as u128;
    let m = alpha.min(beta) as u32;
    let b = (2 * alpha)
        .checked_add(2 * alpha * alpha)?
        .checked_add(p.checked_pow(m)?.checked_mul(alpha.checked_pow(m)?)?)?;
    let l = n.preds.len() as u128;
    let i = n.rules.iter().map(|r| r.inters.len()).max().unwrap_or(0) as u128;
    if b >= 128 {
        return if l * i == 0 { Some(0) } else { None };
    }
    (1u128 << b).checked_mul(l)?.checked_mul(i)
}

pub fn decide_bounded(sid: &Sid, pred: &str) -> Result<bool, BoundError> {
    Ok(analyze_bounded(sid, pred, crate::DEFAULT_TUPLE_CAP)?.0.bounded)
}

/// An upper bound on the degree of every model of `pred`.
pub fn degree_cutoff(sid: &Sid, pred: &str) -> Result<u128, BoundError> {
    analyze_bounded(sid, pred, crate::DEFAULT_TUPLE_CAP)?
        .0
        .cutoff
        .ok_or_else(|| BoundError::Unbounded(pred.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::base_of_formula;
    use crate::sat::Tuple;
    use crate::semantics::{enumerate_models, ModelBudget};
    use crate::syntax::{generate_family, parse_sid, Family};

    const CHAIN: &str = "behavior { ports { in, out } states { s } }
        pred chain(x, y){ rule comp(x) * x = y; rule exists z . comp(x) * inter(x.out, z.in) * chain(z, y); }";

    fn max_degree(sid: &Sid, pred: &str, depth: usize, universe: usize) -> usize {
        let n = NSid::from_sid(sid).unwrap();
        enumerate_models(&n, pred, &ModelBudget::new(depth, universe))
            .unwrap()
            .iter()
            .map(|m| m.config.degree())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn primed_rules() {
        let star = generate_family(Family::Star).unwrap();
        let p = build_primed_sid(&star).unwrap();
        let w = p.sid.pred("Worker__prime").unwrap();
        // emp gives one rule, the recursive rule 1 not_bound + 2 bound
        assert_eq!(w.rules.len(), 1 + 3);
        let star_tags = &p.tags[1..];
        assert_eq!(star_tags[1..].iter().filter(|t| matches!(t, RuleTag::Bound(_))).count(), 2);
        assert_eq!(w.arity(), star.arity("Worker").unwrap() + 1);
        let n = NSid::from_sid(&p.sid).unwrap();
        for r in &n.rules {
            for c in &r.calls {
                assert!(n.preds[c.pred].name.ends_with("__prime"));
                assert_eq!(*c.args.last().unwrap() as usize, r.arity - 1);
            }
        }
        let comp = parse_sid("pred A(x){ rule comp(x); }").unwrap();
        let p = build_primed_sid(&comp).unwrap();
        assert_eq!(p.tags, [RuleTag::NotBound]);
    }

    #[test]
    fn graph_shapes() {
        let g = build_dependency_graph(&parse_sid("pred A(x){ rule comp(x); }").unwrap(), 1000).unwrap();
        assert_eq!((g.vertex_count(), g.edges().len()), (1, 0));
        let sid = parse_sid(CHAIN).unwrap();
        let g = build_dependency_graph(&sid, 1000).unwrap();
        assert!(g.edges().iter().any(|(s, r, i, d)| s.0 == 0 && d.0 == 0 && *r == 1 && *i == 1));
        let n = NSid::from_sid(&sid).unwrap();
        assert_eq!(g.vertex_count(), least_solution(&n, SatOptions::default()).unwrap().total());
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph") && dot.contains("label=\"r1#1\""));
    }

    #[test]
    fn verdicts() {
        let star = generate_family(Family::Star).unwrap();
        assert!(!decide_bounded(&star, "Star").unwrap());
        assert!(matches!(degree_cutoff(&star, "Star"), Err(BoundError::Unbounded(_))));
        let ring = generate_family(Family::Ring { h_cap: 1, t_cap: 1 }).unwrap();
        assert!(decide_bounded(&ring, "ring_1_1").unwrap());
        let c = degree_cutoff(&ring, "ring_1_1").unwrap();
        assert!(c >= 2);
        assert!(c >= max_degree(&ring, "ring_1_1", 6, 6) as u128);
        let chain = parse_sid(CHAIN).unwrap();
        assert!(decide_bounded(&chain, "chain").unwrap());
        let comp = parse_sid("pred A(x){ rule comp(x); }").unwrap();
        let (rep, _) = analyze_bounded(&comp, "A", 1000).unwrap();
        assert_eq!((rep.bounded, rep.graph_bound, rep.cutoff), (true, Some(0), Some(0)));
    }

    #[test]
    fn pumping_through_a_side_child() {
        // The recursive call never binds the hub, but a side child does.
        let sid = parse_sid(
            "behavior { ports { p, q } states { s } }
             pred A(h){ rule comp(h); rule exists y . A(h) * B(h, y); }
             pred B(h, y){ rule comp(y) * inter(h.p, y.q); }",
        )
        .unwrap();
        assert!(!decide_bounded(&sid, "A").unwrap());
        assert!(max_degree(&sid, "A", 4, 6) >= 3);
    }

    #[test]
    fn formula_bound_values() {
        let ring = generate_family(Family::Ring { h_cap: 1, t_cap: 1 }).unwrap();
        let p = build_primed_sid(&ring).unwrap();
        let n = NSid::from_sid(&p.sid).unwrap();
        // α = 3, β = 2, p = 2: B* = 6 + 18 + 4 * 9 = 60
        let l = n.preds.len() as u128;
        let i = n.rules.iter().map(|r| r.inters.len()).max().unwrap() as u128;
        assert_eq!(n.max_arity(), 3);
        assert_eq!(formula_bound(&n), Some((1u128 << 60) * l * i));
    }

    /// Replays a path of the graph as an unfolding: the labelled rules are
    /// expanded along the path, the other predicate atoms and the last one
    /// are replaced by the tuples chosen for them, and the result must
    /// have a satisfiable base tuple.
    fn replay(g: &DependencyGraph, path: &[(Vertex, usize, usize, Vertex)], hyper: &BTreeMap<(usize, u32, usize), Vec<u32>>) -> bool {
        fn tuple_formula(n: &NSid, t: &Tuple, args: &[String]) -> Formula {
            let a = |v: &u32| args[*v as usize].as_str();
            let mut atoms: Vec<Formula> = t.comps.iter().map(|c| Formula::comp(a(c))).collect();
            for (ty, vs) in t.tuples() {
                atoms.push(Formula::Inter(
                    vs.iter()
                        .zip(&n.types[ty])
                        .map(|(v, &p)| (a(v).into(), n.behavior.ports[p].clone()))
                        .collect(),
                ));
            }
            atoms.extend(t.pure.eqs().map(|(x, y)| Formula::eq(a(x), a(y))));
            atoms.extend(t.pure.neqs().map(|(x, y)| Formula::neq(a(x), a(y))));
            atoms.extend(t.pure.states().map(|(x, q)| Formula::state(a(x), &n.behavior.states[*q])));
            Formula::sep(atoms)
        }
        let n = &g.nsid;
        let top = path[0].0;
        let params: Vec<String> = n.preds[top.0].params.clone();
        let mut atoms = Vec::new();
        let mut cur_args = params.clone();
        for (step, &(src, rule, i, dst)) in path.iter().enumerate() {
            let r = &n.rules[rule];
            let name = |v: u32| -> String {
                if (v as usize) < r.arity {
                    cur_args[v as usize].clone()
                } else {
                    format!("{}_d{step}", r.var_names[v as usize])
                }
            };
            let mut body = n.local_atoms(r);
            body.iter_mut().for_each(|f| *f = rename(f, &|x: &str| {
                let v = r.var_names.iter().position(|y| y == x).unwrap() as u32;
                name(v)
            }));
            atoms.extend(body);
            let kids = &hyper[&(rule, src.1, step)];
            let mut next = Vec::new();
            for (j, c) in r.calls.iter().enumerate() {
                let args: Vec<String> = c.args.iter().map(|&v| name(v)).collect();
                if j + 1 == i {
                    assert_eq!(kids[j], dst.1);
                    next = args;
                } else {
                    atoms.push(tuple_formula(n, &g.solution.tuples[c.pred][kids[j] as usize], &args));
                }
            }
            cur_args = next;
        }
        let last = path.last().unwrap().3;
        atoms.push(tuple_formula(n, &g.solution.tuples[last.0][last.1 as usize], &cur_args));
        let mut tys: Vec<Vec<usize>> = n.types.clone();
        matches!(base_of_formula(&Formula::sep(atoms), &params, &n.behavior, &mut tys), Ok(Some(_)))
    }

    fn rename(f: &Formula, m: &dyn Fn(&str) -> String) -> Formula {
        match f {
            Formula::Comp(x) => Formula::Comp(m(x)),
            Formula::State(x, q) => Formula::State(m(x), q.clone()),
            Formula::Eq(x, y) => Formula::Eq(m(x), m(y)),
            Formula::Neq(x, y) => Formula::Neq(m(x), m(y)),
            Formula::Inter(ps) => Formula::Inter(ps.iter().map(|(x, p)| (m(x), p.clone())).collect()),
            other => other.clone(),
        }
    }

    #[test]
    fn paths_replay_as_satisfiable_unfoldings() {
        let sid = generate_family(Family::Ring { h_cap: 1, t_cap: 1 }).unwrap();
        let g = build_dependency_graph(&sid, 10_000).unwrap();
        // children per (rule, parent tuple, step) following the first
        // hyperedge that matches the path
        let mut checked = 0;
        for h0 in g.solution.hyperedges.iter().take(20) {
            let r0 = &g.nsid.rules[h0.rule];
            for (i0, c0) in r0.calls.iter().enumerate() {
                let e0 = ((r0.pred, h0.tuple), h0.rule, i0 + 1, (c0.pred, h0.children[i0]));
                let mut paths = vec![(vec![e0], vec![h0.children.clone()])];
                for h1 in &g.solution.hyperedges {
                    let r1 = &g.nsid.rules[h1.rule];
                    if (r1.pred, h1.tuple) == e0.3 {
                        for (i1, c1) in r1.calls.iter().enumerate() {
                            let e1 = (e0.3, h1.rule, i1 + 1, (c1.pred, h1.children[i1]));
                            paths.push((vec![e0, e1], vec![h0.children.clone(), h1.children.clone()]));
                        }
                    }
                }
                for (path, kids) in paths.into_iter().take(8) {
                    let mut hyper = BTreeMap::new();
                    for (step, (e, k)) in path.iter().zip(kids).enumerate() {
                        hyper.insert((e.1, e.0 .1, step), k);
                    }
                    assert!(replay(&g, &path, &hyper));
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }
}
