//! Pure formulae: equalities, disequalities and state atoms.
//!
//! Equalities are unordered pairs and reflexive pairs `x = x` are never
//! stored, so a closed formula describes an equivalence relation whose
//! classes are read off by [`PureFormula::classes`]. Disequalities are
//! unordered too but `x != x` is kept, since it is what makes a formula
//! unsatisfiable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PureFormula<V: Ord> {
    eqs: BTreeSet<(V, V)>,
    neqs: BTreeSet<(V, V)>,
    states: BTreeSet<(V, usize)>,
}

impl<V: Ord> Default for PureFormula<V> {
    fn default() -> Self {
        PureFormula {
            eqs: BTreeSet::new(),
            neqs: BTreeSet::new(),
            states: BTreeSet::new(),
        }
    }
}

fn ordered<V: Ord>(a: V, b: V) -> (V, V) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<V: Ord + Clone> PureFormula<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_emp(&self) -> bool {
        self.eqs.is_empty() && self.neqs.is_empty() && self.states.is_empty()
    }

    pub fn add_eq(&mut self, a: V, b: V) {
        if a != b {
            self.eqs.insert(ordered(a, b));
        }
    }

    pub fn add_neq(&mut self, a: V, b: V) {
        self.neqs.insert(ordered(a, b));
    }

    pub fn add_state(&mut self, x: V, q: usize) {
        self.states.insert((x, q));
    }

    pub fn eqs(&self) -> impl Iterator<Item = &(V, V)> {
        self.eqs.iter()
    }

    pub fn neqs(&self) -> impl Iterator<Item = &(V, V)> {
        self.neqs.iter()
    }

    pub fn states(&self) -> impl Iterator<Item = &(V, usize)> {
        self.states.iter()
    }

    pub fn has_eq(&self, a: &V, b: &V) -> bool {
        a == b || self.eqs.contains(&ordered(a.clone(), b.clone()))
    }

    pub fn has_neq(&self, a: &V, b: &V) -> bool {
        self.neqs.contains(&ordered(a.clone(), b.clone()))
    }

    pub fn has_state(&self, x: &V, q: usize) -> bool {
        self.states.contains(&(x.clone(), q))
    }

    /// Variables occurring in some atom.
    pub fn support(&self) -> BTreeSet<V> {
        let mut out = BTreeSet::new();
        for (a, b) in self.eqs.iter().chain(&self.neqs) {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        for (x, _) in &self.states {
            out.insert(x.clone());
        }
        out
    }

    /// Separating conjunction of two pure formulae.
    pub fn conj(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.eqs.extend(other.eqs.iter().cloned());
        out.neqs.extend(other.neqs.iter().cloned());
        out.states.extend(other.states.iter().cloned());
        out
    }

    /// The equivalence classes of the equalities, as a map from every
    /// variable of the support to the least member of its class.
    fn leaders(&self) -> BTreeMap<V, V> {
        let vars: Vec<V> = self.support().into_iter().collect();
        let idx = |v: &V| vars.binary_search(v).unwrap();
        let mut parent: Vec<usize> = (0..vars.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for (a, b) in &self.eqs {
            let (ra, rb) = (find(&mut parent, idx(a)), find(&mut parent, idx(b)));
            // Keep the smaller index as root so the leader is the least variable.
            if ra < rb {
                parent[rb] = ra;
            } else if rb < ra {
                parent[ra] = rb;
            }
        }
        let mut out = BTreeMap::new();
        for i in 0..vars.len() {
            let r = find(&mut parent, i);
            out.insert(vars[i].clone(), vars[r].clone());
        }
        out
    }

    /// Equivalence classes of the support (singletons included).
    pub fn classes(&self) -> Vec<BTreeSet<V>> {
        let mut by_leader: BTreeMap<V, BTreeSet<V>> = BTreeMap::new();
        for (v, l) in self.leaders() {
            by_leader.entry(l).or_default().insert(v);
        }
        by_leader.into_values().collect()
    }

    /// Least fixpoint of transitivity, propagation of `!=` along `=` and
    /// propagation of states along `=`. Symmetry is built into storage.
    pub fn closure(&self) -> Self {
        let leaders = self.leaders();
        let mut members: BTreeMap<&V, Vec<&V>> = BTreeMap::new();
        for (v, l) in &leaders {
            members.entry(l).or_default().push(v);
        }
        let class = |v: &V| &members[&leaders[v]];
        let mut out = Self::new();
        for ms in members.values() {
            for (i, a) in ms.iter().enumerate() {
                for b in &ms[i + 1..] {
                    out.add_eq((*a).clone(), (*b).clone());
                }
            }
        }
        for (a, b) in &self.neqs {
            for a2 in class(a) {
                for b2 in class(b) {
                    out.add_neq((*a2).clone(), (*b2).clone());
                }
            }
        }
        for (x, q) in &self.states {
            for y in class(x) {
                out.add_state((*y).clone(), *q);
            }
        }
        out
    }

    /// Satisfiability: no class carries a disequality and no class has two
    /// different states. Works on unclosed input too.
    pub fn is_sat(&self) -> bool {
        let leaders = self.leaders();
        if self.neqs.iter().any(|(a, b)| leaders[a] == leaders[b]) {
            return false;
        }
        let mut seen: BTreeMap<&V, usize> = BTreeMap::new();
        for (x, q) in &self.states {
            match seen.insert(&leaders[x], *q) {
                Some(r) if r != *q => return false,
                _ => {}
            }
        }
        true
    }

    /// True when `a` and `b` are equal in every model.
    pub fn equiv(&self, a: &V, b: &V) -> bool {
        if a == b {
            return true;
        }
        let l = self.leaders();
        matches!((l.get(a), l.get(b)), (Some(x), Some(y)) if x == y)
    }

    /// The first element of `xs` equal to `y`, or `y` itself.
    pub fn repr(&self, y: &V, xs: &[V]) -> V {
        let l = self.leaders();
        let ly = l.get(y);
        xs.iter()
            .find(|x| *x == y || (ly.is_some() && l.get(*x) == ly))
            .unwrap_or(y)
            .clone()
    }

    /// Atoms whose variables all satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(&V) -> bool) -> Self {
        PureFormula {
            eqs: self.eqs.iter().filter(|(a, b)| keep(a) && keep(b)).cloned().collect(),
            neqs: self.neqs.iter().filter(|(a, b)| keep(a) && keep(b)).cloned().collect(),
            states: self.states.iter().filter(|(x, _)| keep(x)).cloned().collect(),
        }
    }

    /// Simultaneous renaming.
    pub fn rename<W: Ord + Clone>(&self, f: impl Fn(&V) -> W) -> PureFormula<W> {
        let mut out = PureFormula::new();
        for (a, b) in &self.eqs {
            out.add_eq(f(a), f(b));
        }
        for (a, b) in &self.neqs {
            out.add_neq(f(a), f(b));
        }
        for (x, q) in &self.states {
            out.add_state(f(x), *q);
        }
        out
    }

    /// Number of stored atoms.
    pub fn len(&self) -> usize {
        self.eqs.len() + self.neqs.len() + self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_emp()
    }

    /// True when every atom of `self` is in `other`.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.eqs.is_subset(&other.eqs) && self.neqs.is_subset(&other.neqs) && self.states.is_subset(&other.states)
    }
}

/// Closure as a free function.
pub fn closure<V: Ord + Clone>(p: &PureFormula<V>) -> PureFormula<V> {
    p.closure()
}

/// Satisfiability of a pure formula.
pub fn pure_sat<V: Ord + Clone>(p: &PureFormula<V>) -> bool {
    p.is_sat()
}

/// Least-index representative of `y` among `xs`.
pub fn repr<V: Ord + Clone>(y: &V, xs: &[V], p: &PureFormula<V>) -> V {
    p.repr(y, xs)
}

impl<V: Ord + fmt::Debug> fmt::Debug for PureFormula<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if first {
                first = false;
                Ok(())
            } else {
                f.write_str(" * ")
            }
        };
        for (a, b) in &self.eqs {
            sep(f)?;
            write!(f, "{a:?}={b:?}")?;
        }
        for (a, b) in &self.neqs {
            sep(f)?;
            write!(f, "{a:?}!={b:?}")?;
        }
        for (x, q) in &self.states {
            sep(f)?;
            write!(f, "{x:?}@{q}")?;
        }
        if first {
            f.write_str("emp")?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = PureFormula<u8>;

    /// The three closure rules applied literally until nothing changes.
    fn naive_closure(p: &P) -> P {
        let mut cur = p.clone();
        loop {
            let mut next = cur.clone();
            let eqs: Vec<(u8, u8)> = cur.eqs().cloned().collect();
            // symmetric view of the equalities
            let sym: Vec<(u8, u8)> = eqs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
            for &(x, y) in &sym {
                for &(y2, z) in &sym {
                    if y == y2 {
                        next.add_eq(x, z);
                    }
                }
                for &(a, b) in cur.neqs() {
                    if a == y {
                        next.add_neq(x, b);
                    }
                    if b == y {
                        next.add_neq(x, a);
                    }
                }
                for &(s, q) in cur.states() {
                    if s == x {
                        next.add_state(y, q);
                    }
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    pub(crate) fn arb_pure(nvars: u8) -> impl Strategy<Value = P> {
        let atom = (0u8..3, 0..nvars, 0..nvars, 0usize..2);
        proptest::collection::vec(atom, 0..8).prop_map(|atoms| {
            let mut p = P::new();
            for (k, a, b, q) in atoms {
                match k {
                    0 => p.add_eq(a, b),
                    1 => p.add_neq(a, b),
                    _ => p.add_state(a, q),
                }
            }
            p
        })
    }

    #[test]
    fn closure_rules() {
        let mut p = P::new();
        p.add_eq(0, 1);
        p.add_eq(1, 2);
        assert!(p.closure().has_eq(&0, &2));
        let mut p = P::new();
        p.add_eq(0, 1);
        p.add_neq(1, 2);
        assert!(p.closure().has_neq(&0, &2));
        let mut p = P::new();
        p.add_eq(0, 1);
        p.add_state(0, 1);
        assert!(p.closure().has_state(&1, 1));
    }

    #[test]
    fn sat_examples() {
        let mut p = P::new();
        p.add_eq(0, 1);
        p.add_neq(0, 1);
        assert!(!pure_sat(&p));
        let mut p = P::new();
        p.add_state(0, 0);
        p.add_state(0, 1);
        assert!(!pure_sat(&p));
        let mut p = P::new();
        p.add_eq(0, 1);
        p.add_eq(1, 2);
        assert!(pure_sat(&p));
        let mut p = P::new();
        p.add_neq(3, 3);
        assert!(!pure_sat(&p));
    }

    #[test]
    fn repr_examples() {
        // variables: x1 = 1, x2 = 2, y = 9
        let mut p = P::new();
        p.add_eq(9, 2);
        assert_eq!(repr(&9, &[1, 2], &p), 2);
        assert_eq!(repr(&9, &[1, 2], &P::new()), 9);
        p.add_eq(9, 1);
        assert_eq!(repr(&9, &[1, 2], &p), 1);
        // order of the list decides, not the variable order
        assert_eq!(repr(&9, &[2, 1], &p), 2);
    }

    proptest! {
        #[test]
        fn closure_matches_naive_fixpoint(p in arb_pure(5)) {
            prop_assert_eq!(p.closure(), naive_closure(&p));
        }

        #[test]
        fn closure_is_idempotent_and_extensive(p in arb_pure(6)) {
            let c = p.closure();
            prop_assert_eq!(c.closure(), c.clone());
            prop_assert!(p.is_subset(&c));
        }

        #[test]
        fn closure_is_monotone(p in arb_pure(6), q in arb_pure(6)) {
            let pq = p.conj(&q);
            prop_assert!(p.closure().is_subset(&pq.closure()));
        }

        #[test]
        fn sat_is_invariant_under_closure(p in arb_pure(6)) {
            prop_assert_eq!(p.is_sat(), p.closure().is_sat());
        }
    }
}
