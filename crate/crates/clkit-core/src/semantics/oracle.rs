//! Brute-force bounded model enumeration.
//!
//! Models are derived bottom-up by height: level `d` holds every partial
//! model obtained by a derivation tree of height at most `d`, over a fixed
//! finite slice of components. A partial model records the present
//! components, the interactions, the state constraints collected so far
//! and the values of the predicate's parameters. Level `d` only combines
//! children of which at least one is new at level `d - 1`.
//!
//! The membership variant restricts the search to sub-configurations of a
//! target configuration and checks state atoms against its state map.

use super::{Comp, Configuration, Model, MAXU};
use crate::norm::{NRule, NSid, VarId};
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Bounds for the model enumerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelBudget {
    /// Maximal derivation height.
    pub depth: usize,
    /// Components `0..universe`.
    pub universe: usize,
    /// Enumerate the states of unconstrained nodes instead of fixing
    /// them to the first state.
    pub states_enumerated: bool,
    /// Abort once this many partial models exist.
    pub max_models: usize,
}

impl ModelBudget {
    pub fn new(depth: usize, universe: usize) -> Self {
        ModelBudget {
            depth,
            universe,
            states_enumerated: false,
            max_models: 4_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    UnknownPredicate(String),
    UniverseTooLarge(usize),
    InvalidBudget,
    CapExceeded(usize),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
            OracleError::UniverseTooLarge(n) => write!(f, "universe of {n} components exceeds {MAXU}"),
            OracleError::InvalidBudget => f.write_str("depth and universe must be at least 1"),
            OracleError::CapExceeded(n) => write!(f, "more than {n} partial models"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Index into the universe slice.
type Local = u8;

/// Interactions are identified arithmetically: type offset plus the
/// components read as digits in base `u`.
type InterId = u64;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Pm {
    present: u32,
    inters: Vec<InterId>,
    /// Sorted `(component, state)` constraints. Always empty in
    /// membership mode, where constraints are checked on the spot.
    states: Vec<(Local, u8)>,
    args: Vec<Local>,
}

struct Target {
    present: u32,
    inters: BTreeSet<InterId>,
    /// State of every local component.
    states: Vec<u8>,
}

/// Ranges of result indices a call may draw from.
#[derive(Clone, Copy)]
struct Window {
    lo: usize,
    hi: usize,
}

struct Acc {
    present: u32,
    inters: Vec<InterId>,
    states: Vec<(Local, u8)>,
}

fn merge_states(a: &[(Local, u8)], b: &[(Local, u8)]) -> Option<Vec<(Local, u8)>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                if a[i].1 != b[j].1 {
                    return None;
                }
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some(out)
}

fn disjoint_sorted(a: &[InterId], b: &[InterId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => return false,
        }
    }
    true
}

fn merge_sorted(a: &[InterId], b: &[InterId]) -> Vec<InterId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

struct Engine<'a> {
    n: &'a NSid,
    u: usize,
    /// Start of each type's id range.
    offsets: Vec<InterId>,
    target: Option<Target>,
    results: Vec<Vec<Pm>>,
    seen: Vec<BTreeSet<Pm>>,
    /// Per predicate and first argument value, indices into `results`.
    by_first: Vec<Vec<Vec<u32>>>,
    cap: usize,
    total: usize,
}

impl<'a> Engine<'a> {
    fn new(n: &'a NSid, u: usize, target: Option<Target>, cap: usize) -> Self {
        let mut offsets = Vec::new();
        let mut next: InterId = 0;
        for ty in &n.types {
            offsets.push(next);
            next += (u as InterId).pow(ty.len() as u32);
        }
        Engine {
            n,
            u,
            offsets,
            target,
            results: vec![Vec::new(); n.preds.len()],
            seen: vec![BTreeSet::new(); n.preds.len()],
            by_first: n
                .preds
                .iter()
                .map(|p| vec![Vec::new(); if p.arity() > 0 { u } else { 0 }])
                .collect(),
            cap,
            total: 0,
        }
    }

    fn inter_id(&self, ty: usize, comps: impl Iterator<Item = Local>) -> InterId {
        let mut id = 0;
        let mut base = 1;
        for c in comps {
            id += c as InterId * base;
            base *= self.u as InterId;
        }
        self.offsets[ty] + id
    }

    fn decode_inter(&self, id: InterId) -> (usize, Vec<Local>) {
        let ty = self.offsets.partition_point(|&o| o <= id) - 1;
        let mut rest = id - self.offsets[ty];
        let mut comps = Vec::new();
        for _ in 0..self.n.types[ty].len() {
            comps.push((rest % self.u as InterId) as Local);
            rest /= self.u as InterId;
        }
        (ty, comps)
    }

    /// Runs levels `1..=depth` (until a fixpoint when `depth` is `None`).
    /// `stop` is polled after every level.
    fn run(&mut self, depth: Option<usize>, mut stop: impl FnMut(&Self) -> bool) -> Result<(), OracleError> {
        let n = self.n;
        let mut done = vec![0usize; n.preds.len()];
        let mut level = 0usize;
        loop {
            level += 1;
            if depth.is_some_and(|d| level > d) {
                return Ok(());
            }
            let cur: Vec<usize> = self.results.iter().map(Vec::len).collect();
            if level > 1 && done == cur {
                return Ok(());
            }
            for r in &n.rules {
                if r.calls.is_empty() {
                    if level == 1 {
                        self.eval_rule(r, &[])?;
                    }
                    continue;
                }
                for pivot in 0..r.calls.len() {
                    let windows: Vec<Window> = r
                        .calls
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let p = c.pred;
                            match i.cmp(&pivot) {
                                Ordering::Less => Window { lo: 0, hi: done[p] },
                                Ordering::Equal => Window { lo: done[p], hi: cur[p] },
                                Ordering::Greater => Window { lo: 0, hi: cur[p] },
                            }
                        })
                        .collect();
                    if windows.iter().any(|w| w.lo >= w.hi) {
                        continue;
                    }
                    self.eval_rule(r, &windows)?;
                }
            }
            done = cur;
            if stop(self) {
                return Ok(());
            }
        }
    }

    fn eval_rule(&mut self, r: &NRule, windows: &[Window]) -> Result<(), OracleError> {
        let mut binding: Vec<Option<Local>> = vec![None; r.nvars()];
        let mut acc = Acc {
            present: 0,
            inters: Vec::new(),
            states: Vec::new(),
        };
        let mut out = Vec::new();
        self.calls(r, 0, windows, &mut binding, &mut acc, &mut out);
        for pm in out {
            self.insert(r.pred, pm)?;
        }
        Ok(())
    }

    fn insert(&mut self, pred: usize, pm: Pm) -> Result<(), OracleError> {
        if self.seen[pred].contains(&pm) {
            return Ok(());
        }
        self.total += 1;
        if self.total > self.cap {
            return Err(OracleError::CapExceeded(self.cap));
        }
        let idx = self.results[pred].len() as u32;
        if let Some(&a) = pm.args.first() {
            self.by_first[pred][a as usize].push(idx);
        }
        self.seen[pred].insert(pm.clone());
        self.results[pred].push(pm);
        Ok(())
    }

    fn calls(
        &self,
        r: &NRule,
        k: usize,
        windows: &[Window],
        binding: &mut Vec<Option<Local>>,
        acc: &mut Acc,
        out: &mut Vec<Pm>,
    ) {
        if k == r.calls.len() {
            let free: Vec<VarId> = (0..r.nvars() as VarId)
                .filter(|v| binding[*v as usize].is_none())
                .collect();
            self.locals(r, &free, 0, binding, acc, out);
            return;
        }
        let call = &r.calls[k];
        let w = windows[k];
        let rs = &self.results[call.pred];
        let visit = |idx: usize, binding: &mut Vec<Option<Local>>, acc: &mut Acc, out: &mut Vec<Pm>| {
            let child = &rs[idx];
            if child.present & acc.present != 0 || !disjoint_sorted(&child.inters, &acc.inters) {
                return;
            }
            let mut newly = Vec::new();
            let mut ok = true;
            for (j, &a) in call.args.iter().enumerate() {
                let v = a as usize;
                match binding[v] {
                    Some(b) if b != child.args[j] => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding[v] = Some(child.args[j]);
                        newly.push(v);
                    }
                }
            }
            if ok {
                if let Some(states) = merge_states(&acc.states, &child.states) {
                    let old_present = acc.present;
                    let merged = merge_sorted(&acc.inters, &child.inters);
                    let old_inters = core::mem::replace(&mut acc.inters, merged);
                    let old_states = core::mem::replace(&mut acc.states, states);
                    acc.present |= child.present;
                    self.calls(r, k + 1, windows, binding, acc, out);
                    acc.present = old_present;
                    acc.inters = old_inters;
                    acc.states = old_states;
                }
            }
            for &x in &newly {
                binding[x] = None;
            }
        };
        match call.args.first().and_then(|a| binding[*a as usize]) {
            Some(b) => {
                let bucket = &self.by_first[call.pred][b as usize];
                let from = bucket.partition_point(|&i| (i as usize) < w.lo);
                let to = bucket.partition_point(|&i| (i as usize) < w.hi);
                for &i in &bucket[from..to] {
                    visit(i as usize, binding, acc, out);
                }
            }
            None => {
                for i in w.lo..w.hi {
                    visit(i, binding, acc, out);
                }
            }
        }
    }

    /// Binds the remaining variables over the slice, then checks the
    /// rule's own atoms.
    fn locals(&self, r: &NRule, free: &[VarId], k: usize, binding: &mut Vec<Option<Local>>, acc: &Acc, out: &mut Vec<Pm>) {
        if k == free.len() {
            if let Some(pm) = self.finish(r, binding, acc) {
                out.push(pm);
            }
            return;
        }
        let v = free[k];
        // An equality with an already bound variable fixes the value.
        let forced = r.eqs.iter().find_map(|&(a, b)| {
            if a == v {
                binding[b as usize]
            } else if b == v {
                binding[a as usize]
            } else {
                None
            }
        });
        let range = match forced {
            Some(c) => c..c + 1,
            None => 0..self.u as Local,
        };
        for c in range {
            binding[v as usize] = Some(c);
            self.locals(r, free, k + 1, binding, acc, out);
        }
        binding[v as usize] = None;
    }

    fn finish(&self, r: &NRule, binding: &[Option<Local>], acc: &Acc) -> Option<Pm> {
        let val = |v: VarId| binding[v as usize].unwrap();
        if r.eqs.iter().any(|&(a, b)| val(a) != val(b)) || r.neqs.iter().any(|&(a, b)| val(a) == val(b)) {
            return None;
        }
        let mut present = acc.present;
        for &c in &r.comps {
            let bit = 1u32 << val(c);
            if present & bit != 0 {
                return None;
            }
            present |= bit;
        }
        let mut ids = Vec::with_capacity(r.inters.len());
        for it in &r.inters {
            let cs: Vec<Local> = it.vars.iter().map(|&x| val(x)).collect();
            if cs.iter().enumerate().any(|(i, c)| cs[i + 1..].contains(c)) {
                return None;
            }
            ids.push(self.inter_id(it.ty, cs.into_iter()));
        }
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) || !disjoint_sorted(&ids, &acc.inters) {
            return None;
        }
        let mut states = acc.states.clone();
        match &self.target {
            Some(t) => {
                if present & !t.present != 0 || ids.iter().any(|i| !t.inters.contains(i)) {
                    return None;
                }
                if r.states.iter().any(|&(x, q)| t.states[val(x) as usize] as usize != q) {
                    return None;
                }
            }
            None => {
                for &(x, q) in &r.states {
                    states = merge_states(&states, &[(val(x), q as u8)])?;
                }
            }
        }
        Some(Pm {
            present,
            inters: merge_sorted(&acc.inters, &ids),
            states,
            args: (0..r.arity as VarId).map(val).collect(),
        })
    }
}

fn validate_budget(u: usize, depth: usize) -> Result<(), OracleError> {
    if u == 0 || depth == 0 {
        return Err(OracleError::InvalidBudget);
    }
    if u > MAXU {
        return Err(OracleError::UniverseTooLarge(u));
    }
    Ok(())
}

fn pred_index(n: &NSid, pred: &str) -> Result<usize, OracleError> {
    n.pred_index(pred)
        .ok_or_else(|| OracleError::UnknownPredicate(pred.into()))
}

/// All models `(g, store)` of `pred` with a derivation tree of height at
/// most `budget.depth` whose components lie in `0..budget.universe`.
/// The result is sorted and duplicate-free.
pub fn enumerate_models(n: &NSid, pred: &str, budget: &ModelBudget) -> Result<Vec<Model>, OracleError> {
    let p = pred_index(n, pred)?;
    validate_budget(budget.universe, budget.depth)?;
    let mut e = Engine::new(n, budget.universe, None, budget.max_models);
    e.run(Some(budget.depth), |_| false)?;
    let nstates = n.behavior.state_count();
    let mut out = BTreeSet::new();
    for pm in &e.results[p] {
        let mut g = Configuration::new();
        for c in 0..budget.universe {
            if pm.present >> c & 1 == 1 {
                g.present.insert(c as Comp);
            }
        }
        for &id in &pm.inters {
            let (ty, cs) = e.decode_inter(id);
            g.interactions.insert(
                cs.iter()
                    .zip(&n.types[ty])
                    .map(|(&c, &port)| (c as Comp, port))
                    .collect(),
            );
        }
        for &(c, q) in &pm.states {
            g.set_state(c as Comp, q as usize);
        }
        let store: Vec<Comp> = pm.args.iter().map(|&c| c as Comp).collect();
        if !budget.states_enumerated || nstates == 1 {
            out.insert(Model { config: g, store });
            continue;
        }
        let mut free: BTreeSet<Comp> = g.nodes();
        free.extend(store.iter().copied());
        let free: Vec<Comp> = free
            .into_iter()
            .filter(|c| !pm.states.iter().any(|(d, _)| *d as Comp == *c))
            .collect();
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut h = g.clone();
            for (c, q) in free.iter().zip(&digits) {
                h.set_state(*c, *q);
            }
            out.insert(Model {
                config: h,
                store: store.clone(),
            });
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < nstates {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Membership: `g, store |= pred` by a derivation of height at most
/// `depth`, or of any height when `depth` is `None`.
///
/// Existential witnesses range over the nodes of `g`, the stored and
/// explicitly stated components and as many spare components as the
/// widest rule has variables. Spare components are in the first state.
pub fn check_model(n: &NSid, pred: &str, g: &Configuration, store: &[Comp], depth: Option<usize>) -> Result<bool, OracleError> {
    let p = pred_index(n, pred)?;
    if store.len() != n.preds[p].arity() {
        return Ok(false);
    }
    check_model_prefix(n, pred, g, store, depth)
}

/// Like [`check_model`], but only the first `prefix.len()` parameters
/// are given; the remaining ones are existentially quantified.
pub fn check_model_prefix(
    n: &NSid,
    pred: &str,
    g: &Configuration,
    prefix: &[Comp],
    depth: Option<usize>,
) -> Result<bool, OracleError> {
    let p = pred_index(n, pred)?;
    if prefix.len() > n.preds[p].arity() {
        return Ok(false);
    }
    let mut universe: BTreeSet<Comp> = g.nodes();
    universe.extend(prefix.iter().copied());
    universe.extend(g.explicit_states().map(|(c, _)| c));
    let spares = n.rules.iter().map(NRule::nvars).max().unwrap_or(0).max(1);
    let mut next = 0 as Comp;
    let mut added = 0;
    while added < spares {
        if universe.insert(next) {
            added += 1;
        }
        next += 1;
    }
    let universe: Vec<Comp> = universe.into_iter().collect();
    validate_budget(universe.len(), depth.unwrap_or(1))?;
    let local = |c: Comp| universe.binary_search(&c).unwrap() as Local;
    let mut present = 0u32;
    for &c in &g.present {
        present |= 1 << local(c);
    }
    let states = universe.iter().map(|&c| g.state(c) as u8).collect();
    let mut e = Engine::new(n, universe.len(), None, 4_000_000);
    let mut inters = BTreeSet::new();
    for i in &g.interactions {
        let ports: Vec<usize> = i.iter().map(|(_, p)| *p).collect();
        match n.types.iter().position(|t| *t == ports) {
            Some(ty) => {
                inters.insert(e.inter_id(ty, i.iter().map(|(c, _)| local(*c))));
            }
            // An interaction of a type the SID never builds.
            None => return Ok(false),
        }
    }
    if g.interactions.iter().any(|i| !super::interaction_is_valid(i)) {
        return Ok(false);
    }
    let want_inters: Vec<InterId> = inters.iter().copied().collect();
    e.target = Some(Target {
        present,
        inters,
        states,
    });
    let want_prefix: Vec<Local> = prefix.iter().map(|&c| local(c)).collect();
    let matches = |e: &Engine<'_>| {
        e.results[p].iter().any(|pm| {
            pm.present == present && pm.inters == want_inters && pm.args[..want_prefix.len()] == want_prefix[..]
        })
    };
    e.run(depth, |e| matches(e))?;
    Ok(matches(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{generate_family, parse_sid, Family};

    fn nsid(text: &str) -> NSid {
        NSid::from_sid(&parse_sid(text).unwrap()).unwrap()
    }

    fn ring() -> NSid {
        NSid::from_sid(&generate_family(Family::Ring { h_cap: 1, t_cap: 1 }).unwrap()).unwrap()
    }

    #[test]
    fn comp_only_models() {
        let n = nsid("pred A(x){ rule comp(x); }");
        let ms = enumerate_models(&n, "A", &ModelBudget::new(1, 2)).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].store, [0]);
    }

    #[test]
    fn contradiction_has_no_models() {
        let n = nsid("pred A(x){ rule x != x; }");
        assert!(enumerate_models(&n, "A", &ModelBudget::new(3, 3)).unwrap().is_empty());
    }

    #[test]
    fn small_rings_are_found() {
        let n = ring();
        let ms = enumerate_models(&n, "ring_1_1", &ModelBudget::new(4, 4)).unwrap();
        let sizes: BTreeSet<usize> = ms.iter().map(|m| m.config.present.len()).collect();
        assert!(sizes.contains(&2) && sizes.contains(&3));
        for m in &ms {
            assert_eq!(m.config.degree(), 2);
            assert!(!m.config.is_loose());
            assert!(check_model(&n, "ring_1_1", &m.config, &m.store, Some(4)).unwrap());
            assert!(check_model(&n, "ring_1_1", &m.config, &m.store, Some(5)).unwrap());
            assert!(check_model(&n, "ring_1_1", &m.config, &m.store, None).unwrap());
        }
    }

    #[test]
    fn membership_rejects() {
        let n = nsid("behavior { ports { in, out } states { s } } pred A(x){ rule comp(x); }");
        let mut g = Configuration::new();
        g.present.insert(0);
        g.interactions.insert(vec![(0, 1), (1, 0)]);
        assert!(!check_model(&n, "A", &g, &[0], None).unwrap());
        g.interactions.clear();
        assert!(check_model(&n, "A", &g, &[0], Some(1)).unwrap());
        assert!(!check_model(&n, "A", &g, &[1], Some(1)).unwrap());
    }

    #[test]
    fn membership_depth_is_respected() {
        let n = ring();
        let ms = enumerate_models(&n, "ring_0_0", &ModelBudget::new(4, 4)).unwrap();
        let big = ms.iter().find(|m| m.config.present.len() == 4).unwrap();
        assert!(!check_model(&n, "ring_0_0", &big.config, &big.store, Some(3)).unwrap());
        assert!(check_model(&n, "ring_0_0", &big.config, &big.store, Some(4)).unwrap());
    }

    #[test]
    fn states_can_be_enumerated() {
        let n = nsid("behavior { ports { p } states { a, b } } pred A(x){ rule comp(x); }");
        let mut budget = ModelBudget::new(1, 2);
        budget.states_enumerated = true;
        assert_eq!(enumerate_models(&n, "A", &budget).unwrap().len(), 4);
    }

    #[test]
    fn trailing_parameters_are_existential() {
        let n = nsid("behavior { ports { in, out } states { s } } pred E(x, y){ rule comp(x) * inter(x.out, y.in); }");
        let mut g = Configuration::new();
        g.present.insert(3);
        g.interactions.insert(vec![(3, 1), (5, 0)]);
        assert!(check_model_prefix(&n, "E", &g, &[3], None).unwrap());
        assert!(!check_model_prefix(&n, "E", &g, &[5], None).unwrap());
    }
}
