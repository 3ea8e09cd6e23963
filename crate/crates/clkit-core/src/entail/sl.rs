//! The annotated SL SID.
//!
//! Every variable `x` of a rule gets a record `x̄ = (x__1, ..., x__K)`
//! standing for the Gaifman record of its value. An annotated predicate
//! `A__sN` pairs `A` with a map `ι` from (parameter, interaction type) to
//! the slots its interactions occupy; its arguments are the parameters
//! followed by their records. A rule for it allocates `x1 |-> x̄1`,
//! writes the component, state and interaction atoms of the stem rule
//! into the records, keeps the (dis)equalities and calls annotated
//! callees. Slots of a parameter are split between its own interaction
//! atoms and those used below each callee; the latter must be disjoint.
//!
//! Entries the rules do not constrain are free. The checks at the end
//! of this module therefore compare SL models with CL models on
//! canonical completions of those entries.

use super::gaifman::{decode_gaifman, encode_gaifman, filler, make_layout, GaifmanError, GaifmanHeap, Layout};
use super::{classify_nsid, rule_classes, sid_flags};
use crate::norm::{NRule, NSid, VarId};
use crate::semantics::{check_model, enumerate_models, Comp, ModelBudget, OracleError, SINK};
use crate::syntax::{Sid, SidError};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// `ι[param][type]` as a bit set over the slots `0..B`.
pub type Iota = Vec<Vec<u64>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlError {
    Sid(SidError),
    Layout(GaifmanError),
    /// The SID is not progressing, connected and e-restricted.
    OutsideFragment(String),
    /// More slots than the bit sets hold.
    BoundTooLarge(usize),
    CapExceeded(usize),
    UnknownPredicate(String),
    Oracle(OracleError),
}

impl fmt::Display for SlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlError::Sid(e) => write!(f, "{e}"),
            SlError::Layout(e) => write!(f, "{e}"),
            SlError::OutsideFragment(why) => write!(f, "not progressing, connected and e-restricted: {why}"),
            SlError::BoundTooLarge(b) => write!(f, "degree bound {b} is too large for the annotation"),
            SlError::CapExceeded(n) => write!(f, "more than {n} annotated rules"),
            SlError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
            SlError::Oracle(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SlError {}

impl From<SidError> for SlError {
    fn from(e: SidError) -> Self {
        SlError::Sid(e)
    }
}

impl From<GaifmanError> for SlError {
    fn from(e: GaifmanError) -> Self {
        SlError::Layout(e)
    }
}

impl From<OracleError> for SlError {
    fn from(e: OracleError) -> Self {
        SlError::Oracle(e)
    }
}

/// Variables of a rule: principal variables `0..nv` keep their CL ids,
/// entry `e` (1-based) of the record of `v` is `nv + v * K + e - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlRule {
    /// The CL rule it is built from.
    pub stem: usize,
    pub nvars: u32,
    /// Head arguments: the parameters, then their records.
    pub params: Vec<u32>,
    pub pto: (u32, Vec<u32>),
    pub eqs: Vec<(u32, u32)>,
    pub neqs: Vec<(u32, u32)>,
    pub calls: Vec<(usize, Vec<u32>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlPred {
    pub name: String,
    /// Index of the CL predicate.
    pub base: usize,
    pub iota: Iota,
    pub rules: Vec<SlRule>,
}

#[derive(Clone, Debug)]
pub struct SlSid {
    pub layout: Layout,
    pub preds: Vec<SlPred>,
    /// Principal variables per CL rule, for naming.
    pub nvars: Vec<usize>,
}

impl SlSid {
    pub fn rule_count(&self) -> usize {
        self.preds.iter().map(|p| p.rules.len()).sum()
    }

    /// Annotated predicates of a CL predicate.
    pub fn annotations(&self, base: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.preds.len()).filter(move |&i| self.preds[i].base == base)
    }

    pub fn arity(&self, pred: usize, n: &NSid) -> usize {
        (self.layout.k + 1) * n.preds[self.preds[pred].base].arity()
    }
}

fn record(nv: usize, k: usize, v: VarId, e: usize) -> u32 {
    (nv + v as usize * k + e - 1) as u32
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// All `r`-subsets of the set bits of `avail`.
fn subsets(avail: u64, r: usize) -> Vec<u64> {
    let slots: Vec<usize> = bits(avail).collect();
    let mut out = Vec::new();
    fn go(slots: &[usize], r: usize, acc: u64, out: &mut Vec<u64>) {
        if r == 0 {
            out.push(acc);
            return;
        }
        for (i, &s) in slots.iter().enumerate() {
            go(&slots[i + 1..], r - 1, acc | 1 << s, out);
        }
    }
    go(&slots, r, 0, &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Per rule, the data that does not depend on `ι`.
struct Stem<'a> {
    r: &'a NRule,
    classes: Vec<VarId>,
    /// `atoms[i][j]`: interaction atoms of type `j` containing a variable
    /// equal to parameter `i`.
    atoms: Vec<Vec<Vec<usize>>>,
}

/// Stem rule, callees, own slots and atom order of a generated rule.
type RuleKey = (usize, Vec<usize>, Vec<Vec<u64>>, Vec<Vec<usize>>);

struct Annotator<'a> {
    n: &'a NSid,
    layout: Layout,
    cap: usize,
    preds: Vec<SlPred>,
    index: BTreeMap<(usize, Iota), usize>,
    by_base: Vec<Vec<usize>>,
    seen: BTreeSet<RuleKey>,
    rules: usize,
}

impl Annotator<'_> {
    fn head(&mut self, base: usize, iota: Iota) -> usize {
        if let Some(&i) = self.index.get(&(base, iota.clone())) {
            return i;
        }
        let i = self.preds.len();
        let name = format!("{}__s{}", self.n.preds[base].name, self.by_base[base].len());
        self.preds.push(SlPred {
            name,
            base,
            iota: iota.clone(),
            rules: Vec::new(),
        });
        self.index.insert((base, iota), i);
        self.by_base[base].push(i);
        i
    }

    /// One pass over all rules with the annotated predicates known so far.
    fn pass(&mut self, stems: &[Stem]) -> Result<bool, SlError> {
        let mut grew = false;
        for st in stems {
            let r = st.r;
            let choices: Vec<Vec<usize>> = r.calls.iter().map(|c| self.by_base[c.pred].clone()).collect();
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let mut pick = vec![0usize; choices.len()];
            loop {
                let callees: Vec<usize> = choices.iter().zip(&pick).map(|(c, &i)| c[i]).collect();
                grew |= self.expand(st, &callees)?;
                let mut k = 0;
                while k < pick.len() {
                    pick[k] += 1;
                    if pick[k] < choices[k].len() {
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
        Ok(grew)
    }

    fn expand(&mut self, st: &Stem, callees: &[usize]) -> Result<bool, SlError> {
        let r = st.r;
        let m = self.layout.types.len();
        let b = self.layout.b;
        let full: u64 = if b == 64 { u64::MAX } else { (1u64 << b) - 1 };
        // slots used below the callees, per variable class and type
        let mut xi: BTreeMap<(VarId, usize), u64> = BTreeMap::new();
        for (c, &sp) in r.calls.iter().zip(callees) {
            let iota = &self.preds[sp].iota;
            for (k, &z) in c.args.iter().enumerate() {
                for (j, &mask) in iota[k].iter().enumerate() {
                    let e = xi.entry((st.classes[z as usize], j)).or_insert(0);
                    if *e & mask != 0 {
                        return Ok(false);
                    }
                    *e |= mask;
                }
            }
        }
        // own slots, chosen once per class of parameters
        let a = r.arity;
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..a {
            if !reps.iter().any(|&p| st.classes[p] == st.classes[i]) {
                reps.push(i);
            }
        }
        let mut options: Vec<(usize, usize, Vec<u64>)> = Vec::new();
        for &i in &reps {
            for j in 0..m {
                let used = xi.get(&(st.classes[i], j)).copied().unwrap_or(0);
                let rr = st.atoms[i][j].len();
                if rr > b {
                    return Ok(false);
                }
                options.push((i, j, subsets(full & !used, rr)));
            }
        }
        if options.iter().any(|o| o.2.is_empty()) {
            return Ok(false);
        }
        let mut grew = false;
        let mut pick = vec![0usize; options.len()];
        loop {
            let mut ys = vec![vec![0u64; m]; a];
            for (o, &p) in options.iter().zip(&pick) {
                ys[o.0][o.1] = o.2[p];
            }
            for i in 0..a {
                if let Some(&rep) = reps.iter().find(|&&p| st.classes[p] == st.classes[i]) {
                    ys[i] = ys[rep].clone();
                }
            }
            let iota: Iota = (0..a)
                .map(|i| {
                    (0..m)
                        .map(|j| ys[i][j] | xi.get(&(st.classes[i], j)).copied().unwrap_or(0))
                        .collect()
                })
                .collect();
            grew |= self.emit_variants(st, callees, &iota, &ys)?;
            let mut k = 0;
            while k < pick.len() {
                pick[k] += 1;
                if pick[k] < options[k].2.len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
        Ok(grew)
    }

    /// One rule per assignment of each parameter's atoms to its own slots.
    fn emit_variants(&mut self, st: &Stem, callees: &[usize], iota: &Iota, ys: &[Vec<u64>]) -> Result<bool, SlError> {
        let r = st.r;
        let (a, m) = (r.arity, self.layout.types.len());
        // per (i, j), the orders of atoms over the slots of ys[i][j]
        let mut orders: Vec<Vec<Vec<usize>>> = Vec::new();
        for i in 0..a {
            for j in 0..m {
                let atoms = &st.atoms[i][j];
                orders.push(permutations(atoms.len()).into_iter().map(|p| p.iter().map(|&q| atoms[q]).collect()).collect());
            }
        }
        let mut grew = false;
        let head = self.head(r.pred, iota.clone());
        let mut pick = vec![0usize; orders.len()];
        loop {
            let chosen: Vec<Vec<usize>> = orders.iter().zip(&pick).map(|(o, &p)| o[p].clone()).collect();
            let key = (r.id, callees.to_vec(), ys.to_vec(), chosen.clone());
            if self.seen.insert(key) {
                if self.rules >= self.cap {
                    return Err(SlError::CapExceeded(self.cap));
                }
                let rule = self.build(st, callees, ys, &chosen);
                self.preds[head].rules.push(rule);
                self.rules += 1;
                grew = true;
            }
            let mut k = 0;
            while k < pick.len() {
                pick[k] += 1;
                if pick[k] < orders[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
        Ok(grew)
    }

    fn build(&self, st: &Stem, callees: &[usize], ys: &[Vec<u64>], chosen: &[Vec<usize>]) -> SlRule {
        let r = st.r;
        let l = &self.layout;
        let (nv, k) = (r.nvars(), l.k);
        let rec = |v: VarId, e: usize| record(nv, k, v, e);
        let mut eqs: Vec<(u32, u32)> = r.eqs.clone();
        for &c in &r.comps {
            eqs.push((rec(c, Layout::PRESENCE), c));
        }
        for &(x, q) in &r.states {
            eqs.push((rec(x, l.state_entry(q)), x));
        }
        let m = l.types.len();
        for i in 0..r.arity {
            for j in 0..m {
                let slots: Vec<usize> = bits(ys[i][j]).collect();
                for (&slot, &atom) in slots.iter().zip(&chosen[i * m + j]) {
                    for (t, e) in l.slot(slot, j).enumerate() {
                        eqs.push((rec(i as VarId, e), r.inters[atom].vars[t]));
                    }
                }
            }
        }
        let mut params: Vec<u32> = (0..r.arity as u32).collect();
        for i in 0..r.arity as VarId {
            params.extend((1..=k).map(|e| rec(i, e)));
        }
        let calls = r
            .calls
            .iter()
            .zip(callees)
            .map(|(c, &sp)| {
                let mut args = c.args.clone();
                for &z in &c.args {
                    args.extend((1..=k).map(|e| rec(z, e)));
                }
                (sp, args)
            })
            .collect();
        SlRule {
            stem: r.id,
            nvars: (nv * (k + 1)) as u32,
            params,
            pto: (0, (1..=k).map(|e| rec(0, e)).collect()),
            eqs,
            neqs: r.neqs.clone(),
            calls,
        }
    }
}

/// The annotated SID for degree bound `b`, generated bottom-up from the
/// annotated predicates that have at least one rule.
pub fn annotate_sid(sid: &Sid, b: usize, cap: usize) -> Result<SlSid, SlError> {
    let n = NSid::from_sid(sid)?;
    annotate_nsid(&n, b, cap)
}

pub fn annotate_nsid(n: &NSid, b: usize, cap: usize) -> Result<SlSid, SlError> {
    if b > 64 {
        return Err(SlError::BoundTooLarge(b));
    }
    let classes = classify_nsid(n);
    if sid_flags(&classes) != (true, true, true) {
        let bad = classes
            .iter()
            .find(|c| !(c.progressing && c.connected && c.e_restricted))
            .unwrap();
        return Err(SlError::OutsideFragment(format!("rule {} of `{}`", bad.rule, bad.pred)));
    }
    let layout = make_layout(b, n.types.clone(), n.behavior.state_count())?;
    let stems: Vec<Stem> = n
        .rules
        .iter()
        .map(|r| {
            let classes = rule_classes(r);
            let atoms = (0..r.arity)
                .map(|i| {
                    (0..n.types.len())
                        .map(|j| {
                            (0..r.inters.len())
                                .filter(|&t| {
                                    r.inters[t].ty == j
                                        && r.inters[t].vars.iter().any(|&v| classes[v as usize] == classes[i])
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            Stem { r, classes, atoms }
        })
        .collect();
    let mut an = Annotator {
        n,
        layout,
        cap,
        preds: Vec::new(),
        index: BTreeMap::new(),
        by_base: vec![Vec::new(); n.preds.len()],
        seen: BTreeSet::new(),
        rules: 0,
    };
    while an.pass(&stems)? {}
    Ok(SlSid {
        layout: an.layout,
        preds: an.preds,
        nvars: n.rules.iter().map(NRule::nvars).collect(),
    })
}

fn var_name(n: &NSid, sl: &SlSid, stem: usize, v: u32) -> String {
    let r = &n.rules[stem];
    let nv = r.nvars() as u32;
    if v < nv {
        r.var_names[v as usize].clone()
    } else {
        let k = sl.layout.k as u32;
        let (x, e) = ((v - nv) / k, (v - nv) % k + 1);
        format!("{}__{e}", r.var_names[x as usize])
    }
}

fn iota_text(n: &NSid, base: usize, iota: &Iota) -> String {
    let params = &n.preds[base].params;
    let parts: Vec<String> = iota
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, &mask)| {
                    let s: Vec<String> = bits(mask).map(|b| format!("{b}")).collect();
                    format!("{}:{{{}}}", n.type_name(j), s.join(","))
                })
                .collect();
            format!("{}:{{{}}}", params[i], cells.join(" "))
        })
        .collect();
    format!("{{{}}}", parts.join(" "))
}

/// The SL SID as text. The header records the layout and the annotation
/// of every generated predicate.
pub fn emit_sl(sl: &SlSid, n: &NSid) -> String {
    let l = &sl.layout;
    let mut s = String::new();
    s.push_str(&format!(
        "// B={} K={} M={} N={}\n",
        l.b,
        l.k,
        l.types.len(),
        l.n_states
    ));
    let mut table = vec![format!("presence={}", Layout::PRESENCE)];
    for j in 0..l.types.len() {
        for i in 0..l.b {
            let r = l.slot(i, j);
            table.push(format!("slot({i},{})={}..{}", n.type_name(j), r.start, r.end - 1));
        }
    }
    for q in 0..l.n_states {
        table.push(format!("state({})={}", n.behavior.state_name(q), l.state_entry(q)));
    }
    s.push_str(&format!("// layout: {}\n", table.join(" ")));
    for p in &sl.preds {
        s.push_str(&format!(
            "// {} = {} iota={}\n",
            p.name,
            n.preds[p.base].name,
            iota_text(n, p.base, &p.iota)
        ));
    }
    for p in &sl.preds {
        let Some(first) = p.rules.first() else { continue };
        let names: Vec<String> = first.params.iter().map(|&v| var_name(n, sl, first.stem, v)).collect();
        s.push_str(&format!("pred {}({}) {{\n", p.name, names.join(", ")));
        for r in &p.rules {
            let v = |x: u32| var_name(n, sl, r.stem, x);
            let params: BTreeSet<u32> = r.params.iter().copied().collect();
            // head parameter names come from the first rule; rename
            let rename: BTreeMap<u32, String> = r
                .params
                .iter()
                .zip(&names)
                .map(|(&x, nm)| (x, nm.clone()))
                .collect();
            let nm = |x: u32| rename.get(&x).cloned().unwrap_or_else(|| v(x));
            let mut used: BTreeSet<u32> = BTreeSet::new();
            used.insert(r.pto.0);
            used.extend(r.pto.1.iter().copied());
            for &(a, b) in r.eqs.iter().chain(&r.neqs) {
                used.insert(a);
                used.insert(b);
            }
            for (_, args) in &r.calls {
                used.extend(args.iter().copied());
            }
            let ex: Vec<String> = used.iter().filter(|x| !params.contains(x)).map(|&x| nm(x)).collect();
            let mut atoms = vec![format!(
                "pto({}; {})",
                nm(r.pto.0),
                r.pto.1.iter().map(|&x| nm(x)).collect::<Vec<_>>().join(", ")
            )];
            atoms.extend(r.eqs.iter().map(|&(a, b)| format!("{} = {}", nm(a), nm(b))));
            atoms.extend(r.neqs.iter().map(|&(a, b)| format!("{} != {}", nm(a), nm(b))));
            for (q, args) in &r.calls {
                let a: Vec<String> = args.iter().map(|&x| nm(x)).collect();
                atoms.push(format!("{}({})", sl.preds[*q].name, a.join(", ")));
            }
            let prefix = if ex.is_empty() {
                String::new()
            } else {
                format!("exists {} . ", ex.join(" "))
            };
            s.push_str(&format!("  rule {prefix}{};\n", atoms.join(" * ")));
        }
        s.push_str("}\n");
    }
    s
}

fn sl_classes(r: &SlRule) -> Vec<u32> {
    let mut parent: Vec<u32> = (0..r.nvars).collect();
    fn find(p: &mut [u32], mut x: u32) -> u32 {
        while p[x as usize] != x {
            p[x as usize] = p[p[x as usize] as usize];
            x = p[x as usize];
        }
        x
    }
    for &(a, b) in &r.eqs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb) as usize] = ra.min(rb);
    }
    (0..r.nvars).map(|v| find(&mut parent, v)).collect()
}

/// Greatest profile of the SL SID, 0-based.
fn sl_profile(sl: &SlSid) -> Vec<BTreeSet<usize>> {
    let mut prof: Vec<BTreeSet<usize>> = sl
        .preds
        .iter()
        .map(|p| (0..p.rules.first().map_or(0, |r| r.params.len())).collect())
        .collect();
    loop {
        let mut changed = false;
        for (pi, p) in sl.preds.iter().enumerate() {
            for r in &p.rules {
                for (q, args) in &r.calls {
                    for (i, y) in args.iter().enumerate() {
                        let ok = r.params.iter().enumerate().any(|(j, x)| x == y && prof[pi].contains(&j));
                        if !ok && prof[*q].remove(&i) {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return prof;
        }
    }
}

/// `(progressing, connected, e_restricted)` for every SL rule, comparing
/// variables up to the equalities of the rule.
pub fn check_sl_fragment(sl: &SlSid) -> Vec<(usize, bool, bool, bool)> {
    let prof = sl_profile(sl);
    let mut out = Vec::new();
    for (pi, p) in sl.preds.iter().enumerate() {
        for r in &p.rules {
            let cl = sl_classes(r);
            let progressing = r.params.first() == Some(&r.pto.0) && r.pto.1.len() == sl.layout.k;
            let mut anchors: BTreeSet<u32> = r.pto.1.iter().map(|&v| cl[v as usize]).collect();
            anchors.extend(prof[pi].iter().map(|&i| cl[r.params[i] as usize]));
            let connected = r
                .calls
                .iter()
                .all(|(_, args)| args.first().is_some_and(|&z| anchors.contains(&cl[z as usize])));
            let pclasses: BTreeSet<u32> = prof[pi].iter().map(|&i| cl[r.params[i] as usize]).collect();
            let e_restricted = r
                .neqs
                .iter()
                .all(|&(a, b)| pclasses.contains(&cl[a as usize]) || pclasses.contains(&cl[b as usize]));
            out.push((pi, progressing, connected, e_restricted));
        }
    }
    out
}

/// What a variable of an unfolding stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Principal,
    /// Entry `e` of the record of the given variable.
    Record(u32, usize),
}

/// A predicate-free SL formula obtained by unfolding.
#[derive(Clone, Debug)]
pub struct FlatSl {
    kinds: Vec<Kind>,
    pub params: Vec<u32>,
    pub ptos: Vec<(u32, Vec<u32>)>,
    pub eqs: Vec<(u32, u32)>,
    pub neqs: Vec<(u32, u32)>,
}

/// All complete unfoldings of `pred` of derivation height at most `depth`.
pub fn unfold_sl(sl: &SlSid, pred: usize, depth: usize, cap: usize) -> Result<Vec<FlatSl>, SlError> {
    let Some(first) = sl.preds[pred].rules.first() else {
        return Ok(Vec::new());
    };
    let k = sl.layout.k;
    let a = first.params.len() / (k + 1);
    let mut kinds: Vec<Kind> = vec![Kind::Principal; a];
    for i in 0..a as u32 {
        kinds.extend((1..=k).map(|e| Kind::Record(i, e)));
    }
    let start = FlatSl {
        params: (0..kinds.len() as u32).collect(),
        kinds,
        ptos: Vec::new(),
        eqs: Vec::new(),
        neqs: Vec::new(),
    };
    let mut out = Vec::new();
    let mut stack = vec![(start, vec![(pred, (0..first.params.len() as u32).collect::<Vec<_>>(), depth)])];
    while let Some((flat, mut pending)) = stack.pop() {
        let Some((p, args, d)) = pending.pop() else {
            out.push(flat);
            if out.len() > cap {
                return Err(SlError::CapExceeded(cap));
            }
            continue;
        };
        if d == 0 {
            continue;
        }
        for r in &sl.preds[p].rules {
            let mut f = flat.clone();
            let off = f.kinds.len() as u32;
            let nv = sl.nvars[r.stem] as u32;
            for v in 0..r.nvars {
                f.kinds.push(if v < nv {
                    Kind::Principal
                } else {
                    let x = (v - nv) / k as u32;
                    Kind::Record(off + x, ((v - nv) % k as u32) as usize + 1)
                });
            }
            for (&x, &y) in r.params.iter().zip(&args) {
                f.eqs.push((off + x, y));
            }
            f.ptos.push((off + r.pto.0, r.pto.1.iter().map(|&v| off + v).collect()));
            f.eqs.extend(r.eqs.iter().map(|&(x, y)| (off + x, off + y)));
            f.neqs.extend(r.neqs.iter().map(|&(x, y)| (off + x, off + y)));
            let mut pend = pending.clone();
            for (q, cargs) in &r.calls {
                pend.push((*q, cargs.iter().map(|&v| off + v).collect(), d - 1));
            }
            stack.push((f, pend));
        }
    }
    Ok(out)
}

struct Classes {
    parent: Vec<u32>,
}

impl Classes {
    fn new(f: &FlatSl) -> Self {
        let mut c = Classes {
            parent: (0..f.kinds.len() as u32).collect(),
        };
        for &(a, b) in &f.eqs {
            let (ra, rb) = (c.find(a), c.find(b));
            c.parent[ra.max(rb) as usize] = ra.min(rb);
        }
        c
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }
}

/// `h` with the store `args` (one value per head argument, `None` for a
/// value left to choose) satisfies the unfolding: the points-to atoms
/// cover the heap exactly.
pub fn sl_satisfies(f: &FlatSl, h: &GaifmanHeap, args: &[Option<Comp>]) -> bool {
    let mut cl = Classes::new(f);
    let n = f.kinds.len();
    let root: Vec<u32> = (0..n as u32).map(|v| cl.find(v)).collect();
    let mut val: Vec<Option<Comp>> = vec![None; n];
    for (&p, &c) in f.params.iter().zip(args) {
        let Some(c) = c else { continue };
        let r = root[p as usize] as usize;
        match val[r] {
            Some(d) if d != c => return false,
            _ => val[r] = Some(c),
        }
    }
    if f.ptos.len() != h.len() {
        return false;
    }
    fn search(f: &FlatSl, h: &GaifmanHeap, root: &[u32], mut val: Vec<Option<Comp>>, mut done: Vec<bool>, mut used: BTreeSet<Comp>) -> bool {
        loop {
            let mut progress = false;
            for (i, (src, entries)) in f.ptos.iter().enumerate() {
                if done[i] {
                    continue;
                }
                let Some(c) = val[root[*src as usize] as usize] else { continue };
                let Some(rec) = h.get(&c) else { return false };
                if !used.insert(c) {
                    return false;
                }
                for (e, &v) in entries.iter().enumerate() {
                    let r = root[v as usize] as usize;
                    match val[r] {
                        Some(d) if d != rec[e] => return false,
                        _ => val[r] = Some(rec[e]),
                    }
                }
                done[i] = true;
                progress = true;
            }
            if !progress {
                break;
            }
        }
        if let Some(i) = done.iter().position(|d| !d) {
            let src = root[f.ptos[i].0 as usize] as usize;
            let free: Vec<Comp> = h.keys().copied().filter(|c| !used.contains(c)).collect();
            return free.into_iter().any(|c| {
                let mut v2 = val.clone();
                v2[src] = Some(c);
                search(f, h, root, v2, done.clone(), used.clone())
            });
        }
        f.neqs.iter().all(|&(a, b)| {
            let (ra, rb) = (root[a as usize] as usize, root[b as usize] as usize);
            ra != rb && !matches!((val[ra], val[rb]), (Some(x), Some(y)) if x == y)
        })
    }
    search(f, h, &root, val, vec![false; f.ptos.len()], BTreeSet::new())
}

/// The canonical SL model of an unfolding: distinct fresh components for
/// the principal variables, fillers for record entries nothing
/// constrains, and state 0 for records that encode no state. Returns the
/// heap and the head arguments, or `None` when the unfolding is
/// unsatisfiable.
pub fn canonical_model(f: &FlatSl, layout: &Layout) -> Option<(GaifmanHeap, Vec<Comp>)> {
    let mut cl = Classes::new(f);
    let n = f.kinds.len();
    let root: Vec<u32> = (0..n as u32).map(|v| cl.find(v)).collect();
    let mut val: Vec<Option<Comp>> = vec![None; n];
    let mut next: Comp = 0;
    for v in 0..n {
        if f.kinds[v] == Kind::Principal && val[root[v] as usize].is_none() {
            val[root[v] as usize] = Some(next);
            next += 1;
        }
    }
    let entry_filler = |owner: Comp, e: usize| -> Comp {
        for j in 0..layout.types.len() {
            for i in 0..layout.b {
                if layout.slot(i, j).contains(&e) {
                    return filler(owner, layout.types[j].len());
                }
            }
        }
        SINK
    };
    for v in 0..n {
        if let Kind::Record(x, e) = f.kinds[v] {
            let r = root[v] as usize;
            if val[r].is_none() {
                let owner = val[root[x as usize] as usize].unwrap();
                val[r] = Some(entry_filler(owner, e));
            }
        }
    }
    let value = |v: u32| val[root[v as usize] as usize].unwrap();
    if f.neqs.iter().any(|&(a, b)| value(a) == value(b)) {
        return None;
    }
    let mut h = GaifmanHeap::new();
    for (src, entries) in &f.ptos {
        let c = value(*src);
        let mut rec: Vec<Comp> = entries.iter().map(|&v| value(v)).collect();
        if (0..layout.n_states).all(|q| rec[layout.state_entry(q) - 1] != c) {
            rec[layout.state_entry(0) - 1] = c;
        }
        if h.insert(c, rec).is_some() {
            return None;
        }
    }
    // record arguments read the patched records
    let args = f
        .params
        .iter()
        .map(|&p| match f.kinds[p as usize] {
            Kind::Record(x, e) => h.get(&value(x)).map_or(value(p), |rec| rec[e - 1]),
            Kind::Principal => value(p),
        })
        .collect();
    Some((h, args))
}

/// Outcome of the desk-scale comparison of CL and SL models.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GaifmanCheck {
    pub cl_models: usize,
    /// CL models whose encoding satisfies no annotated predicate.
    pub unsound: usize,
    pub sl_models: usize,
    /// Canonical SL models whose decoding is not a CL model.
    pub incomplete: usize,
    /// Canonical completions that fail their own unfolding.
    pub invalid_canonical: usize,
}

/// Compares the models of `pred` with those of its annotations, up to
/// derivation height `depth`, over the universe `0..universe`.
pub fn check_gaifman_correspondence(
    n: &NSid,
    sl: &SlSid,
    pred: &str,
    depth: usize,
    universe: usize,
) -> Result<GaifmanCheck, SlError> {
    let p = n.pred_index(pred).ok_or_else(|| SlError::UnknownPredicate(pred.into()))?;
    let a = n.preds[p].arity();
    let cap = 1_000_000;
    let mut unfoldings = Vec::new();
    for q in sl.annotations(p) {
        unfoldings.extend(unfold_sl(sl, q, depth, cap)?);
    }
    let mut out = GaifmanCheck::default();
    let mut budget = ModelBudget::new(depth, universe);
    budget.states_enumerated = true;
    for m in enumerate_models(n, pred, &budget)? {
        out.cl_models += 1;
        let h = encode_gaifman(&m.config, &sl.layout)?;
        // records of stored components that are not nodes are free
        let mut args: Vec<Option<Comp>> = m.store.iter().map(|&c| Some(c)).collect();
        for c in &m.store {
            match h.get(c) {
                Some(rec) => args.extend(rec.iter().map(|&v| Some(v))),
                None => args.extend(core::iter::repeat_n(None, sl.layout.k)),
            }
        }
        if !unfoldings.iter().any(|f| sl_satisfies(f, &h, &args)) {
            out.unsound += 1;
        }
    }
    for f in &unfoldings {
        let Some((h, args)) = canonical_model(f, &sl.layout) else { continue };
        out.sl_models += 1;
        let given: Vec<Option<Comp>> = args.iter().map(|&c| Some(c)).collect();
        if !sl_satisfies(f, &h, &given) {
            out.invalid_canonical += 1;
        }
        let good = match decode_gaifman(&h, &sl.layout) {
            Ok(g) => check_model(n, pred, &g, &args[..a], Some(depth))?,
            Err(_) => false,
        };
        if !good {
            out.incomplete += 1;
        }
    }
    Ok(out)
}
