//! Least solution of the base-tuple constraint system.
//!
//! For every rule `A(x1..xa) <- exists y. phi * B1(z1) * ... * Bk(zk)`
//! the solution must satisfy
//! `mu(A) ⊇ project(base(phi) ⊗ mu(B1)[z1] ⊗ ... ⊗ mu(Bk)[zk], x1..xa)`.
//! Tuples of a predicate are over its parameter indices `0..a`.
//!
//! Evaluation is semi-naive: a round only combines child tuples of which
//! at least one was added in the previous round. Within a round rules are
//! visited in declaration order, so traces are reproducible.

use crate::base::BaseTuple;
use crate::norm::{NRule, NSid, VarId};
use crate::pure::PureFormula;
use crate::semantics::{check_model, Comp, Configuration, Model, MAXU};
use crate::syntax::{Sid, SidError};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub type Tuple = BaseTuple<VarId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatError {
    Sid(SidError),
    UnknownPredicate(String),
    /// More than this many tuples were produced.
    CapExceeded(usize),
}

impl fmt::Display for SatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatError::Sid(e) => write!(f, "{e}"),
            SatError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
            SatError::CapExceeded(n) => write!(f, "tuple cap of {n} exceeded"),
        }
    }
}

impl core::error::Error for SatError {}

impl From<SidError> for SatError {
    fn from(e: SidError) -> Self {
        SatError::Sid(e)
    }
}

/// How a tuple was first obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub rule: usize,
    /// Index of the child tuple per predicate atom of the rule.
    pub children: Vec<u32>,
    /// Height of the derivation tree.
    pub height: usize,
}

/// One successful combination: rule `rule` applied to `children` gives
/// tuple `tuple` of the rule's head predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperedge {
    pub rule: usize,
    pub tuple: u32,
    pub children: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Per predicate, tuples in insertion order.
    pub tuples: Vec<Vec<Tuple>>,
    pub provenance: Vec<Vec<Provenance>>,
    /// Every combination, when requested.
    pub hyperedges: Vec<Hyperedge>,
    /// Number of rounds until the fixpoint.
    pub iterations: usize,
    index: Vec<BTreeMap<Tuple, u32>>,
}

impl Solution {
    pub fn total(&self) -> usize {
        self.tuples.iter().map(Vec::len).sum()
    }

    pub fn find(&self, pred: usize, t: &Tuple) -> Option<u32> {
        self.index[pred].get(t).copied()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SatOptions {
    pub cap: usize,
    pub record_hyperedges: bool,
}

impl Default for SatOptions {
    fn default() -> Self {
        SatOptions {
            cap: crate::DEFAULT_TUPLE_CAP,
            record_hyperedges: false,
        }
    }
}

struct Uf {
    parent: Vec<u32>,
}

impl Uf {
    fn new(n: usize) -> Self {
        Uf {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        match ra.cmp(&rb) {
            Ordering::Less => self.parent[rb as usize] = ra,
            Ordering::Greater => self.parent[ra as usize] = rb,
            Ordering::Equal => {}
        }
    }
}

/// Equality classes of a rule's variables given the chosen child tuples:
/// `roots[v]` is the least variable equal to `v`.
fn rule_classes(r: &NRule, children: &[&Tuple]) -> Vec<u32> {
    let mut uf = Uf::new(r.nvars());
    for &(a, b) in &r.eqs {
        uf.union(a, b);
    }
    for (call, t) in r.calls.iter().zip(children) {
        for (a, b) in t.pure.eqs() {
            uf.union(call.args[*a as usize], call.args[*b as usize]);
        }
    }
    (0..r.nvars() as u32).map(|v| uf.find(v)).collect()
}

/// `project(base(phi) ⊗ children, params)` for one rule, or `None` when
/// the composition is unsatisfiable.
pub fn combine(r: &NRule, children: &[&Tuple]) -> Option<Tuple> {
    let root = rule_classes(r, children);
    let nv = r.nvars();
    let map = |k: usize, v: VarId| root[r.calls[k].args[v as usize] as usize];
    // states per class
    let mut state: Vec<Option<usize>> = vec![None; nv];
    let mut set_state = |c: u32, q: usize| match state[c as usize] {
        Some(p) if p != q => false,
        _ => {
            state[c as usize] = Some(q);
            true
        }
    };
    for &(x, q) in &r.states {
        if !set_state(root[x as usize], q) {
            return None;
        }
    }
    for (k, t) in children.iter().enumerate() {
        for &(x, q) in t.pure.states() {
            if !set_state(map(k, x), q) {
                return None;
            }
        }
    }
    // disequalities between classes, constr included
    let mut neqs: Vec<(u32, u32)> = Vec::new();
    let mut add_neq = |a: u32, b: u32| {
        if a == b {
            return false;
        }
        neqs.push(if a < b { (a, b) } else { (b, a) });
        true
    };
    for &(a, b) in &r.neqs {
        if !add_neq(root[a as usize], root[b as usize]) {
            return None;
        }
    }
    for (k, t) in children.iter().enumerate() {
        for &(a, b) in t.pure.neqs() {
            if !add_neq(map(k, a), map(k, b)) {
                return None;
            }
        }
    }
    // components
    let mut comps: Vec<u32> = r.comps.iter().map(|&c| root[c as usize]).collect();
    for (k, t) in children.iter().enumerate() {
        comps.extend(t.comps.iter().map(|&c| map(k, c)));
    }
    comps.sort_unstable();
    if comps.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    // interaction tuples
    let mut tuples: Vec<(usize, Vec<u32>)> = r
        .inters
        .iter()
        .map(|it| (it.ty, it.vars.iter().map(|&v| root[v as usize]).collect()))
        .collect();
    for (k, t) in children.iter().enumerate() {
        for (ty, vs) in t.tuples() {
            tuples.push((ty, vs.iter().map(|&v| map(k, v)).collect()));
        }
    }
    for (_, vs) in &tuples {
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                if !add_neq(a, b) {
                    return None;
                }
            }
        }
    }
    tuples.sort_unstable();
    if tuples.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    // projection onto the parameters
    let a = r.arity as u32;
    let mut params_of: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for p in 0..a {
        params_of.entry(root[p as usize]).or_default().push(p);
    }
    let rep = |c: u32| params_of.get(&c).map(|ps| ps[0]);
    let mut out = Tuple::empty();
    for &c in &comps {
        if let Some(p) = rep(c) {
            out.add_comp(p);
        }
    }
    for (ty, vs) in &tuples {
        let rs: Option<Vec<u32>> = vs.iter().map(|&v| rep(v)).collect();
        if let Some(rs) = rs {
            out.add_inter(*ty, rs);
        }
    }
    let mut pure = PureFormula::new();
    for ps in params_of.values() {
        for (i, &p) in ps.iter().enumerate() {
            for &q in &ps[i + 1..] {
                pure.add_eq(p, q);
            }
        }
    }
    for &(c1, c2) in &neqs {
        if let (Some(p1), Some(p2)) = (params_of.get(&c1), params_of.get(&c2)) {
            for &p in p1 {
                for &q in p2 {
                    pure.add_neq(p, q);
                }
            }
        }
    }
    for (c, ps) in &params_of {
        if let Some(q) = state[*c as usize] {
            for &p in ps {
                pure.add_state(p, q);
            }
        }
    }
    out.pure = pure;
    Some(out)
}

/// Renders a tuple with the predicate's parameter names.
pub fn render_tuple(n: &NSid, pred: usize, t: &Tuple) -> String {
    let params = &n.preds[pred].params;
    t.render(|ty| n.type_name(ty), |v| params[*v as usize].clone())
}

#[derive(Clone, Copy)]
struct Window {
    lo: usize,
    hi: usize,
}

struct Engine<'a, 't> {
    n: &'a NSid,
    opts: SatOptions,
    sol: Solution,
    trace: Option<&'t mut dyn FnMut(&str)>,
}

impl Engine<'_, '_> {
    fn run(&mut self) -> Result<(), SatError> {
        let n = self.n;
        let np = n.preds.len();
        let mut done = vec![0usize; np];
        let mut round = 0usize;
        loop {
            round += 1;
            let cur: Vec<usize> = self.sol.tuples.iter().map(Vec::len).collect();
            if round > 1 && cur == done {
                self.sol.iterations = round - 1;
                return Ok(());
            }
            for r in &n.rules {
                if r.calls.is_empty() {
                    if round == 1 {
                        self.eval(r, &[], round)?;
                    }
                    continue;
                }
                for pivot in 0..r.calls.len() {
                    let windows: Vec<Window> = r
                        .calls
                        .iter()
                        .enumerate()
                        .map(|(i, c)| match i.cmp(&pivot) {
                            Ordering::Less => Window { lo: 0, hi: done[c.pred] },
                            Ordering::Equal => Window { lo: done[c.pred], hi: cur[c.pred] },
                            Ordering::Greater => Window { lo: 0, hi: cur[c.pred] },
                        })
                        .collect();
                    if windows.iter().any(|w| w.lo >= w.hi) {
                        continue;
                    }
                    self.eval(r, &windows, round)?;
                }
            }
            done = cur;
        }
    }

    fn eval(&mut self, r: &NRule, windows: &[Window], round: usize) -> Result<(), SatError> {
        let mut pick = vec![0usize; r.calls.len()];
        for (k, w) in windows.iter().enumerate() {
            pick[k] = w.lo;
        }
        loop {
            let children: Vec<&Tuple> = r
                .calls
                .iter()
                .zip(&pick)
                .map(|(c, &i)| &self.sol.tuples[c.pred][i])
                .collect();
            if let Some(t) = combine(r, &children) {
                let idx: Vec<u32> = pick.iter().map(|&i| i as u32).collect();
                self.add(r, t, idx, round)?;
            }
            // odometer over the windows
            let mut k = 0;
            loop {
                if k == pick.len() {
                    return Ok(());
                }
                pick[k] += 1;
                if pick[k] < windows[k].hi {
                    break;
                }
                pick[k] = windows[k].lo;
                k += 1;
            }
        }
    }

    fn add(&mut self, r: &NRule, t: Tuple, children: Vec<u32>, round: usize) -> Result<(), SatError> {
        let p = r.pred;
        let idx = match self.sol.index[p].get(&t) {
            Some(&i) => i,
            None => {
                if self.sol.total() >= self.opts.cap {
                    return Err(SatError::CapExceeded(self.opts.cap));
                }
                let height = 1 + r
                    .calls
                    .iter()
                    .zip(&children)
                    .map(|(c, &i)| self.sol.provenance[c.pred][i as usize].height)
                    .max()
                    .unwrap_or(0);
                if let Some(tr) = self.trace.as_mut() {
                    let line = format!(
                        "iter={round} pred={} tuple={} rule={}",
                        self.n.preds[p].name,
                        render_tuple(self.n, p, &t),
                        r.id
                    );
                    tr(&line);
                }
                let i = self.sol.tuples[p].len() as u32;
                self.sol.index[p].insert(t.clone(), i);
                self.sol.tuples[p].push(t);
                self.sol.provenance[p].push(Provenance {
                    rule: r.id,
                    children: children.clone(),
                    height,
                });
                i
            }
        };
        if self.opts.record_hyperedges {
            self.sol.hyperedges.push(Hyperedge {
                rule: r.id,
                tuple: idx,
                children,
            });
        }
        Ok(())
    }
}

/// Least solution, with an optional sink for trace lines.
pub fn least_solution_traced(
    n: &NSid,
    opts: SatOptions,
    trace: Option<&mut dyn FnMut(&str)>,
) -> Result<Solution, SatError> {
    let np = n.preds.len();
    let mut e = Engine {
        n,
        opts,
        sol: Solution {
            tuples: vec![Vec::new(); np],
            provenance: vec![Vec::new(); np],
            hyperedges: Vec::new(),
            iterations: 0,
            index: vec![BTreeMap::new(); np],
        },
        trace,
    };
    e.run()?;
    Ok(e.sol)
}

pub fn least_solution(n: &NSid, opts: SatOptions) -> Result<Solution, SatError> {
    least_solution_traced(n, opts, None)
}

/// `mu(pred) != ∅`.
pub fn decide_sat(sid: &Sid, pred: &str) -> Result<bool, SatError> {
    let n = NSid::from_sid(sid)?;
    let p = n
        .pred_index(pred)
        .ok_or_else(|| SatError::UnknownPredicate(pred.into()))?;
    Ok(!least_solution(&n, SatOptions::default())?.tuples[p].is_empty())
}

/// A model rebuilt from the provenance of the first tuple of a predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub model: Model,
    /// Height of the derivation it follows.
    pub height: usize,
    /// Whether the model was accepted by the membership oracle. Models
    /// too large for the oracle's slice are not checked.
    pub validated: bool,
}

struct Builder<'a> {
    n: &'a NSid,
    sol: &'a Solution,
    fresh: Comp,
    g: Configuration,
}

impl Builder<'_> {
    fn fresh(&mut self) -> Comp {
        let c = self.fresh;
        self.fresh += 1;
        c
    }

    fn build(&mut self, pred: usize, idx: u32, args: &[Comp]) {
        let prov = &self.sol.provenance[pred][idx as usize];
        let r = &self.n.rules[prov.rule];
        let children: Vec<&Tuple> = r
            .calls
            .iter()
            .zip(&prov.children)
            .map(|(c, &i)| &self.sol.tuples[c.pred][i as usize])
            .collect();
        let root = rule_classes(r, &children);
        let mut value: BTreeMap<u32, Comp> = BTreeMap::new();
        for (p, &c) in args.iter().enumerate() {
            value.entry(root[p]).or_insert(c);
        }
        let mut val = |v: VarId, b: &mut Self| -> Comp {
            let cls = root[v as usize];
            match value.get(&cls) {
                Some(&c) => c,
                None => {
                    let c = b.fresh();
                    value.insert(cls, c);
                    c
                }
            }
        };
        for v in 0..r.nvars() as VarId {
            val(v, self);
        }
        let vals: Vec<Comp> = (0..r.nvars() as VarId).map(|v| val(v, self)).collect();
        for &c in &r.comps {
            self.g.present.insert(vals[c as usize]);
        }
        for it in &r.inters {
            self.g.interactions.insert(
                it.vars
                    .iter()
                    .zip(&self.n.types[it.ty])
                    .map(|(&v, &p)| (vals[v as usize], p))
                    .collect(),
            );
        }
        for &(x, q) in &r.states {
            self.g.set_state(vals[x as usize], q);
        }
        let calls: Vec<(usize, u32, Vec<Comp>)> = r
            .calls
            .iter()
            .zip(&prov.children)
            .map(|(c, &i)| (c.pred, i, c.args.iter().map(|&a| vals[a as usize]).collect()))
            .collect();
        for (p, i, cargs) in calls {
            self.build(p, i, &cargs);
        }
    }
}

/// A model of `pred` rebuilt from the fixpoint, or `None` when `pred`
/// is unsatisfiable. Parameters that the tuple equates share a
/// component; every other variable class gets a fresh component, in
/// ascending order.
pub fn witness_model(n: &NSid, sol: &Solution, pred: usize) -> Result<Option<Witness>, crate::semantics::OracleError> {
    let Some(t) = sol.tuples[pred].first() else {
        return Ok(None);
    };
    let mut b = Builder {
        n,
        sol,
        fresh: 0,
        g: Configuration::new(),
    };
    let arity = n.preds[pred].arity();
    let mut store = Vec::with_capacity(arity);
    for p in 0..arity as VarId {
        let same = (0..p).find(|&q| t.pure.has_eq(&q, &p));
        let c = match same {
            Some(q) => store[q as usize],
            None => b.fresh(),
        };
        store.push(c);
    }
    b.build(pred, 0, &store);
    let height = sol.provenance[pred][0].height;
    let model = Model { config: b.g, store };
    let spares = n.rules.iter().map(NRule::nvars).max().unwrap_or(1).max(1);
    let mut slice = model.config.nodes();
    slice.extend(model.store.iter().copied());
    slice.extend(model.config.explicit_states().map(|(c, _)| c));
    let validated = if slice.len() + spares <= MAXU {
        check_model(n, &n.preds[pred].name, &model.config, &model.store, Some(height))?
    } else {
        false
    };
    Ok(Some(Witness {
        model,
        height,
        validated,
    }))
}

/// True when `t` is realised by `m`: the components and interactions the
/// tuple names exist and its pure part holds.
pub fn tuple_covers(n: &NSid, t: &Tuple, m: &Model) -> bool {
    let v = |x: &VarId| m.store[*x as usize];
    let g = &m.config;
    t.comps.iter().all(|c| g.present.contains(&v(c)))
        && t.tuples().all(|(ty, vs)| {
            let i: Vec<(Comp, usize)> = vs.iter().map(v).zip(n.types[ty].iter().copied()).collect();
            g.interactions.contains(&i)
        })
        && t.pure.eqs().all(|(a, b)| v(a) == v(b))
        && t.pure.neqs().all(|(a, b)| v(a) != v(b))
        && t.pure.states().all(|(x, q)| g.state(v(x)) == *q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{enumerate_models, ModelBudget};
    use crate::syntax::{generate_family, parse_sid, Family};
    use proptest::prelude::*;

    fn nsid(text: &str) -> NSid {
        NSid::from_sid(&parse_sid(text).unwrap()).unwrap()
    }

    fn solve(n: &NSid) -> Solution {
        least_solution(n, SatOptions::default()).unwrap()
    }

    #[test]
    fn comp_only() {
        let n = nsid("pred A(x){ rule comp(x); }");
        let s = solve(&n);
        assert_eq!(s.tuples[0].len(), 1);
        let mut want = Tuple::empty();
        want.add_comp(0);
        assert_eq!(s.tuples[0][0], want);
        assert_eq!(render_tuple(&n, 0, &s.tuples[0][0]), "⟨{x} | - | emp⟩");
    }

    #[test]
    fn worst_case_counts() {
        for (k, want) in [(1, 2), (2, 4), (3, 64)] {
            let n = NSid::from_sid(&generate_family(Family::WorstCase { n: k }).unwrap()).unwrap();
            assert_eq!(solve(&n).tuples[0].len(), want, "n={k}");
        }
    }

    #[test]
    fn no_base_case() {
        let n = nsid("pred A(x){ rule exists y . A(y); }");
        assert!(solve(&n).tuples[0].is_empty());
        assert!(!decide_sat(&parse_sid("pred A(x){ rule x != x; }").unwrap(), "A").unwrap());
    }

    #[test]
    fn ring_and_star_are_sat() {
        let sid = generate_family(Family::Ring { h_cap: 2, t_cap: 2 }).unwrap();
        assert!(decide_sat(&sid, "ring_2_2").unwrap());
        assert!(decide_sat(&generate_family(Family::Star).unwrap(), "Star").unwrap());
    }

    #[test]
    fn cap_aborts() {
        let n = NSid::from_sid(&generate_family(Family::WorstCase { n: 3 }).unwrap()).unwrap();
        let r = least_solution(&n, SatOptions { cap: 10, record_hyperedges: false });
        assert_eq!(r.unwrap_err(), SatError::CapExceeded(10));
    }

    #[test]
    fn trace_lines() {
        let n = nsid("behavior { ports { in, out } states { s } } pred A(x){ rule exists y . comp(x) * inter(x.out, y.in); }");
        let mut lines = Vec::new();
        let mut sink = |l: &str| lines.push(String::from(l));
        least_solution_traced(&n, SatOptions::default(), Some(&mut sink)).unwrap();
        assert_eq!(lines, ["iter=1 pred=A tuple=⟨{x} | - | emp⟩ rule=0"]);
    }

    #[test]
    fn witnesses_validate() {
        let sid = generate_family(Family::Ring { h_cap: 2, t_cap: 1 }).unwrap();
        let n = NSid::from_sid(&sid).unwrap();
        let s = solve(&n);
        for p in 0..n.preds.len() {
            let w = witness_model(&n, &s, p).unwrap().unwrap();
            assert!(w.validated, "{}", n.preds[p].name);
        }
        let n = nsid("pred A(x){ rule comp(x); }");
        let w = witness_model(&n, &solve(&n), 0).unwrap().unwrap();
        assert_eq!(w.model.store, [0]);
        assert_eq!(w.model.config.present.len(), 1);
        let n = nsid("pred A(x){ rule x != x; }");
        assert!(witness_model(&n, &solve(&n), 0).unwrap().is_none());
    }

    #[test]
    fn sat_completeness_on_small_sids() {
        for text in [
            "behavior { ports { in, out } states { a, b } }
             pred A(x, y){ rule comp(x) * state(x, a) * inter(x.out, y.in); rule exists z . comp(x) * inter(x.out, z.in) * A(z, y); }",
            "behavior { ports { p } states { s } } pred L(x){ rule exists y . comp(x) * inter(x.p, y.p) * y != x; }",
        ] {
            let n = nsid(text);
            let s = solve(&n);
            for p in 0..n.preds.len() {
                for m in enumerate_models(&n, &n.preds[p].name, &ModelBudget::new(4, 5)).unwrap() {
                    assert!(s.tuples[p].iter().any(|t| tuple_covers(&n, t, &m)));
                }
            }
        }
    }

    /// The same composition through the generic tuple operations.
    fn combine_generic(r: &NRule, children: &[&Tuple]) -> Option<Tuple> {
        let mut local = Tuple::empty();
        for &c in &r.comps {
            local.add_comp(c);
        }
        for it in &r.inters {
            local.add_inter(it.ty, it.vars.clone());
        }
        for &(a, b) in &r.eqs {
            local.pure.add_eq(a, b);
        }
        for &(a, b) in &r.neqs {
            local.pure.add_neq(a, b);
        }
        for &(x, q) in &r.states {
            local.pure.add_state(x, q);
        }
        if !local.is_sat() {
            return None;
        }
        let mut acc = local;
        for (call, t) in r.calls.iter().zip(children) {
            acc = acc.compose(&t.subst(|v| call.args[*v as usize]))?;
        }
        let xs: Vec<VarId> = (0..r.arity as VarId).collect();
        Some(acc.project(&xs))
    }

    fn arb_child(arity: u32) -> impl Strategy<Value = Tuple> {
        let comps = proptest::collection::vec(0..arity, 0..2);
        let inters = proptest::collection::vec((0..arity, 0..arity), 0..2);
        let atoms = proptest::collection::vec((0u8..3, 0..arity, 0..arity, 0usize..2), 0..3);
        (comps, inters, atoms).prop_map(|(cs, is, atoms)| {
            let mut t = Tuple::empty();
            cs.into_iter().for_each(|c| t.add_comp(c));
            for (a, b) in is {
                t.add_inter(0, vec![a, b]);
            }
            for (k, a, b, q) in atoms {
                match k {
                    0 => t.pure.add_eq(a, b),
                    1 => t.pure.add_neq(a, b),
                    _ => t.pure.add_state(a, q),
                }
            }
            t
        })
    }

    proptest! {
        #[test]
        fn combine_matches_generic_operations(
            c1 in arb_child(2), c2 in arb_child(2),
            args in proptest::collection::vec(0u32..4, 4),
            local in proptest::collection::vec((0u8..5, 0u32..4, 0u32..4, 0usize..2), 0..5),
        ) {
            let mut text = String::from("behavior { ports { in, out } states { a, b } } pred B(u, v){ rule emp; }\n pred A(x, y){ rule exists z w . ");
            let names = ["x", "y", "z", "w"];
            let mut atoms: Vec<String> = Vec::new();
            for (k, a, b, q) in &local {
                let (a, b) = (names[*a as usize], names[*b as usize]);
                atoms.push(match k {
                    0 => format!("{a} = {b}"),
                    1 => format!("{a} != {b}"),
                    2 => format!("state({a}, {})", ["a", "b"][*q]),
                    3 => format!("comp({a})"),
                    _ => format!("inter({a}.out, {b}.in)"),
                });
            }
            atoms.push(format!("B({}, {})", names[args[0] as usize], names[args[1] as usize]));
            atoms.push(format!("B({}, {})", names[args[2] as usize], names[args[3] as usize]));
            text.push_str(&atoms.join(" * "));
            text.push_str("; }");
            let n = nsid(&text);
            let r = &n.rules[1];
            // arb_child uses type 0; make sure the rule's own interactions agree.
            prop_assume!(n.types.len() <= 1);
            prop_assume!(c1.is_sat() && c2.is_sat());
            let kids = [&c1, &c2];
            prop_assert_eq!(combine(r, &kids), combine_generic(r, &kids));
        }
    }

    #[test]
    fn solution_is_schedule_independent() {
        // Naive Kleene iteration with the rules visited in reverse order.
        let sid = generate_family(Family::Ring { h_cap: 2, t_cap: 2 }).unwrap();
        let n = NSid::from_sid(&sid).unwrap();
        let s = solve(&n);
        let mut naive: Vec<alloc::collections::BTreeSet<Tuple>> = vec![Default::default(); n.preds.len()];
        loop {
            let mut changed = false;
            for r in n.rules.iter().rev() {
                let pools: Vec<Vec<Tuple>> = r.calls.iter().map(|c| naive[c.pred].iter().cloned().collect()).collect();
                if pools.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut pick = vec![0usize; pools.len()];
                loop {
                    let kids: Vec<&Tuple> = pools.iter().zip(&pick).map(|(p, &i)| &p[i]).collect();
                    if let Some(t) = combine_generic(r, &kids) {
                        changed |= naive[r.pred].insert(t);
                    }
                    let mut k = 0;
                    while k < pick.len() {
                        pick[k] += 1;
                        if pick[k] < pools[k].len() {
                            break;
                        }
                        pick[k] = 0;
                        k += 1;
                    }
                    if k == pick.len() {
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (p, want) in naive.iter().enumerate() {
            let got: alloc::collections::BTreeSet<Tuple> = s.tuples[p].iter().cloned().collect();
            assert_eq!(&got, want, "{}", n.preds[p].name);
        }
    }
}
