//! Base tuples, the abstract domain of the satisfiability analysis.
//!
//! A base tuple `(C, I, pi)` keeps the components and interactions that
//! a formula allocates on its visible variables, plus a pure formula.
//! Multisets are stored as sorted vectors so that structural equality and
//! ordering work as set membership inside the fixpoint engines.

use crate::pure::PureFormula;
use crate::syntax::{Behavior, Formula};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Interaction types are referred to by index into a type table.
pub type TypeId = usize;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseTuple<V: Ord> {
    /// Sorted multiset of component variables.
    pub comps: Vec<V>,
    /// Per type, a sorted multiset of variable tuples of the type's length.
    pub inters: BTreeMap<TypeId, Vec<Vec<V>>>,
    pub pure: PureFormula<V>,
}

impl<V: Ord> Default for BaseTuple<V> {
    fn default() -> Self {
        BaseTuple {
            comps: Vec::new(),
            inters: BTreeMap::new(),
            pure: PureFormula::default(),
        }
    }
}

impl<V: Ord + Clone> BaseTuple<V> {
    /// `(∅, ∅, emp)`.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn add_comp(&mut self, x: V) {
        let at = self.comps.partition_point(|c| *c <= x);
        self.comps.insert(at, x);
    }

    pub fn add_inter(&mut self, ty: TypeId, vars: Vec<V>) {
        let list = self.inters.entry(ty).or_default();
        let at = list.partition_point(|t| *t <= vars);
        list.insert(at, vars);
    }

    /// All `(type, tuple)` entries.
    pub fn tuples(&self) -> impl Iterator<Item = (TypeId, &Vec<V>)> {
        self.inters
            .iter()
            .flat_map(|(ty, ts)| ts.iter().map(move |t| (*ty, t)))
    }

    pub fn tuple_count(&self) -> usize {
        self.inters.values().map(Vec::len).sum()
    }

    /// Satisfiability: the pure part is satisfiable, no two component
    /// entries are equal, no two tuples of one type are equal position-wise
    /// and no tuple repeats a component.
    pub fn is_sat(&self) -> bool {
        let p = &self.pure;
        if !p.is_sat() {
            return false;
        }
        for (i, a) in self.comps.iter().enumerate() {
            if self.comps[i + 1..].iter().any(|b| p.equiv(a, b)) {
                return false;
            }
        }
        for ts in self.inters.values() {
            for (i, t) in ts.iter().enumerate() {
                for (k, a) in t.iter().enumerate() {
                    if t[k + 1..].iter().any(|b| p.equiv(a, b)) {
                        return false;
                    }
                }
                for u in &ts[i + 1..] {
                    if t.iter().zip(u).all(|(a, b)| p.equiv(a, b)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Multiset union with pure conjunction; `None` when the result is
    /// unsatisfiable.
    pub fn compose(&self, other: &Self) -> Option<Self> {
        let mut out = self.clone();
        for c in &other.comps {
            out.add_comp(c.clone());
        }
        for (ty, t) in other.tuples() {
            out.add_inter(ty, t.clone());
        }
        out.pure = self.pure.conj(&other.pure);
        out.is_sat().then_some(out)
    }

    /// The pure part together with pairwise disequalities inside every
    /// stored tuple.
    pub fn constr(&self) -> PureFormula<V> {
        let mut p = self.pure.clone();
        for (_, t) in self.tuples() {
            for (k, a) in t.iter().enumerate() {
                for b in &t[k + 1..] {
                    p.add_neq(a.clone(), b.clone());
                }
            }
        }
        p
    }

    /// Projection onto `xs`: every variable is replaced by its least-index
    /// equal in `xs` (when there is one), and whatever still mentions a
    /// variable outside `xs` is dropped. The pure part becomes the
    /// restriction of the closure of `constr(I) * pi`.
    pub fn project(&self, xs: &[V]) -> Self {
        let closed = self.constr().closure();
        let keep = |v: &V| xs.contains(v);
        let mut out = Self::empty();
        for c in &self.comps {
            let r = closed.repr(c, xs);
            if keep(&r) {
                out.add_comp(r);
            }
        }
        for (ty, t) in self.tuples() {
            let r: Vec<V> = t.iter().map(|v| closed.repr(v, xs)).collect();
            if r.iter().all(keep) {
                out.add_inter(ty, r);
            }
        }
        out.pure = closed.restrict(keep);
        out
    }

    /// Simultaneous renaming of all three parts.
    pub fn subst<W: Ord + Clone>(&self, f: impl Fn(&V) -> W) -> BaseTuple<W> {
        let mut out = BaseTuple::empty();
        for c in &self.comps {
            out.add_comp(f(c));
        }
        for (ty, t) in self.tuples() {
            out.add_inter(ty, t.iter().map(&f).collect());
        }
        out.pure = self.pure.rename(&f);
        out
    }

    /// Renders the tuple as `⟨comps | type:{tuples} | pure⟩`.
    pub fn render(&self, type_name: impl Fn(TypeId) -> String, var: impl Fn(&V) -> String) -> String {
        let comps: Vec<String> = self.comps.iter().map(&var).collect();
        let mut inters = Vec::new();
        for (ty, ts) in &self.inters {
            let ts: Vec<String> = ts
                .iter()
                .map(|t| {
                    let vs: Vec<String> = t.iter().map(&var).collect();
                    format!("({})", vs.join(","))
                })
                .collect();
            inters.push(format!("{}:{{{}}}", type_name(*ty), ts.join(",")));
        }
        let inters = if inters.is_empty() {
            String::from("-")
        } else {
            inters.join(" ")
        };
        let mut pure = Vec::new();
        for (a, b) in self.pure.eqs() {
            pure.push(format!("{}={}", var(a), var(b)));
        }
        for (a, b) in self.pure.neqs() {
            pure.push(format!("{}!={}", var(a), var(b)));
        }
        for (x, q) in self.pure.states() {
            pure.push(format!("{}@{q}", var(x)));
        }
        let pure = if pure.is_empty() {
            String::from("emp")
        } else {
            pure.join(" * ")
        };
        format!("⟨{{{}}} | {} | {}⟩", comps.join(","), inters, pure)
    }
}

impl<V: Ord + Clone + fmt::Debug> fmt::Debug for BaseTuple<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.render(|ty| format!("t{ty}"), |v| format!("{v:?}"));
        f.write_str(&s)
    }
}

/// Error for [`base_of_formula`] inputs that are not flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseError {
    NotFlat,
    UnknownPort(String),
    UnknownState(String),
}

impl fmt::Display for BaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseError::NotFlat => f.write_str("formula contains a quantifier or a predicate atom"),
            BaseError::UnknownPort(p) => write!(f, "unknown port `{p}`"),
            BaseError::UnknownState(q) => write!(f, "unknown state `{q}`"),
        }
    }
}

impl core::error::Error for BaseError {}

/// The base tuple of a quantifier- and predicate-free formula relative
/// to the variable list `xs`. Interaction types are looked up in (and
/// appended to) `types`, port sequences given by index. Returns `Ok(None)`
/// when the formula is unsatisfiable.
pub fn base_of_formula(
    f: &Formula,
    xs: &[String],
    behavior: &Behavior,
    types: &mut Vec<Vec<usize>>,
) -> Result<Option<BaseTuple<String>>, BaseError> {
    let mut comps = Vec::new();
    let mut inters = Vec::new();
    let mut pure = PureFormula::new();
    fn walk(
        f: &Formula,
        b: &Behavior,
        types: &mut Vec<Vec<usize>>,
        comps: &mut Vec<String>,
        inters: &mut Vec<(TypeId, Vec<String>)>,
        pure: &mut PureFormula<String>,
    ) -> Result<(), BaseError> {
        match f {
            Formula::Emp => {}
            Formula::Comp(x) => comps.push(x.clone()),
            Formula::Inter(ps) => {
                let mut ty = Vec::new();
                for (_, p) in ps {
                    ty.push(b.port_index(p).ok_or_else(|| BaseError::UnknownPort(p.clone()))?);
                }
                let id = match types.iter().position(|t| *t == ty) {
                    Some(i) => i,
                    None => {
                        types.push(ty);
                        types.len() - 1
                    }
                };
                inters.push((id, ps.iter().map(|(x, _)| x.clone()).collect()));
            }
            Formula::State(x, q) => {
                let k = b.state_index(q).ok_or_else(|| BaseError::UnknownState(q.clone()))?;
                pure.add_state(x.clone(), k);
            }
            Formula::Eq(x, y) => pure.add_eq(x.clone(), y.clone()),
            Formula::Neq(x, y) => pure.add_neq(x.clone(), y.clone()),
            Formula::Sep(fs) => {
                for g in fs {
                    walk(g, b, types, comps, inters, pure)?;
                }
            }
            Formula::Pred(..) | Formula::Exists(..) => return Err(BaseError::NotFlat),
        }
        Ok(())
    }
    walk(f, behavior, types, &mut comps, &mut inters, &mut pure)?;
    let mut t = BaseTuple::empty();
    for c in comps {
        t.add_comp(pure.repr(&c, xs));
    }
    for (ty, vs) in inters {
        t.add_inter(ty, vs.iter().map(|v| pure.repr(v, xs)).collect());
    }
    t.pure = pure;
    Ok(t.is_sat().then_some(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;
    use alloc::vec;
    use proptest::prelude::*;

    type T = BaseTuple<u8>;

    fn comps(cs: &[u8]) -> T {
        let mut t = T::empty();
        cs.iter().for_each(|&c| t.add_comp(c));
        t
    }

    fn ring_behavior() -> Behavior {
        crate::syntax::generate_family(crate::syntax::Family::Ring { h_cap: 0, t_cap: 0 })
            .unwrap()
            .behavior
    }

    #[test]
    fn sat_conditions() {
        assert!(comps(&[1]).is_sat());
        assert!(!comps(&[1, 1]).is_sat());
        let mut t = T::empty();
        t.add_inter(0, vec![1, 1]);
        assert!(!t.is_sat());
        let mut t = comps(&[1, 2]);
        t.pure.add_eq(1, 2);
        assert!(!t.is_sat());
        let mut t = T::empty();
        t.add_inter(0, vec![1, 2]);
        t.add_inter(0, vec![3, 4]);
        assert!(t.is_sat());
        t.pure.add_eq(1, 3);
        t.pure.add_eq(2, 4);
        assert!(!t.is_sat());
    }

    #[test]
    fn compose_examples() {
        let t = comps(&[1]);
        assert_eq!(t.compose(&T::empty()), Some(t.clone()));
        assert_eq!(t.compose(&comps(&[1])), None);
        let mut a = T::empty();
        a.pure.add_eq(1, 2);
        let mut b = T::empty();
        b.pure.add_neq(1, 2);
        assert_eq!(a.compose(&b), None);
    }

    #[test]
    fn project_examples() {
        // full support keeps all entries, pure gets closed
        let mut t = comps(&[1]);
        t.add_inter(0, vec![1, 2]);
        t.pure.add_eq(2, 3);
        t.pure.add_neq(3, 1);
        let p = t.project(&[1, 2, 3]);
        assert_eq!(p.comps, [1]);
        assert_eq!(p.inters[&0], [vec![1, 2]]);
        assert_eq!(p.pure, t.constr().closure());
        // dropped existential
        let mut t = T::empty();
        t.add_inter(0, vec![1, 9]);
        t.pure.add_state(9, 1);
        let p = t.project(&[1]);
        assert_eq!(p.tuple_count(), 0);
        assert!(p.pure.is_emp());
        // constr contribution
        let mut t = T::empty();
        t.add_inter(0, vec![1, 2]);
        assert!(t.project(&[1, 2]).pure.has_neq(&1, &2));
        // state of a dropped variable survives through an equality
        let mut t = T::empty();
        t.pure.add_eq(9, 2);
        t.pure.add_state(9, 1);
        assert!(t.project(&[1, 2]).pure.has_state(&2, 1));
        // an existential equal to a kept variable is renamed, not dropped
        let mut t = comps(&[9]);
        t.add_inter(0, vec![1, 9]);
        t.pure.add_eq(9, 2);
        let p = t.project(&[1, 2]);
        assert_eq!(p.comps, [2]);
        assert_eq!(p.inters[&0], [vec![1, 2]]);
    }

    #[test]
    fn subst_examples() {
        let t = comps(&[1]);
        assert_eq!(t.subst(|v| *v), t);
        assert_eq!(t.subst(|_| 7u8), comps(&[7]));
        let merged = comps(&[1, 2]).subst(|_| 5u8);
        assert_eq!(merged.comps, [5, 5]);
        assert!(!merged.is_sat());
    }

    #[test]
    fn base_of_formula_examples() {
        let b = ring_behavior();
        let xs: Vec<String> = vec!["x1".into(), "x2".into()];
        let mut types = Vec::new();
        let t = base_of_formula(&Formula::Emp, &xs, &b, &mut types).unwrap().unwrap();
        assert_eq!(t, BaseTuple::empty());
        let f = parse_formula("comp(x1) * inter(x1.out, x2.in)").unwrap();
        let t = base_of_formula(&f, &xs, &b, &mut types).unwrap().unwrap();
        assert_eq!(t.comps, ["x1"]);
        assert_eq!(types, [vec![1, 0]]);
        assert_eq!(t.render(|_| "out.in".into(), |v| v.clone()), "⟨{x1} | out.in:{(x1,x2)} | emp⟩");
        let f = parse_formula("comp(x) * comp(y) * x = y").unwrap();
        assert_eq!(base_of_formula(&f, &xs, &b, &mut types).unwrap(), None);
        let f = parse_formula("exists y . comp(y)").unwrap();
        assert_eq!(base_of_formula(&f, &xs, &b, &mut types), Err(BaseError::NotFlat));
    }

    #[test]
    fn render_empty() {
        assert_eq!(format!("{:?}", T::empty()), "⟨{} | - | emp⟩");
    }

    fn arb_tuple(nvars: u8) -> impl Strategy<Value = T> {
        let comps = proptest::collection::vec(0..nvars, 0..3);
        let inters = proptest::collection::vec((0usize..2, 0..nvars, 0..nvars), 0..3);
        let pure = crate::pure::tests::arb_pure(nvars);
        (comps, inters, pure).prop_map(|(cs, is, pure)| {
            let mut t = T::empty();
            cs.into_iter().for_each(|c| t.add_comp(c));
            for (ty, a, b) in is {
                t.add_inter(ty, vec![a, b]);
            }
            t.pure = pure;
            t
        })
    }

    proptest! {
        #[test]
        fn compose_commutes(a in arb_tuple(5), b in arb_tuple(5)) {
            prop_assert_eq!(a.compose(&b), b.compose(&a));
        }

        #[test]
        fn compose_associates(a in arb_tuple(4), b in arb_tuple(4), c in arb_tuple(4)) {
            let l = a.compose(&b).and_then(|ab| ab.compose(&c));
            let r = b.compose(&c).and_then(|bc| a.compose(&bc));
            prop_assert_eq!(l, r);
        }

        #[test]
        fn unsat_persists(a in arb_tuple(4), b in arb_tuple(4)) {
            if !a.is_sat() {
                prop_assert!(a.compose(&b).is_none());
            }
        }

        #[test]
        fn projection_keeps_sat(t in arb_tuple(5), k in 1u8..5) {
            let xs: Vec<u8> = (0..k).collect();
            if t.is_sat() {
                prop_assert!(t.project(&xs).is_sat());
            }
        }
    }
}
