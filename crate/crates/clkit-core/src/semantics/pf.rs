use super::{interaction_is_valid, Comp, Configuration};
use crate::syntax::{Behavior, Formula};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A free variable of the formula has no value in the store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnboundVariable(pub String);

impl fmt::Display for UnboundVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "variable `{}` is not bound by the store", self.0)
    }
}

impl core::error::Error for UnboundVariable {}

/// `g, store |= f` for a predicate-free formula. Existential witnesses
/// range over `universe`. Predicate atoms are false.
pub fn satisfies_pf(
    g: &Configuration,
    store: &BTreeMap<String, Comp>,
    f: &Formula,
    behavior: &Behavior,
    universe: &[Comp],
) -> Result<bool, UnboundVariable> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !store.contains_key(v)) {
        return Err(UnboundVariable(v));
    }
    let mut store = store.clone();
    let present: Vec<Comp> = g.present.iter().copied().collect();
    let inters: Vec<&Vec<(Comp, usize)>> = g.interactions.iter().collect();
    let part = Part {
        present: present.iter().copied().collect(),
        inters: inters.iter().map(|i| (*i).clone()).collect(),
    };
    Ok(Eval { g, behavior, universe }.sat(&part, &mut store, f))
}

#[derive(Clone)]
struct Part {
    present: BTreeSet<Comp>,
    inters: BTreeSet<Vec<(Comp, usize)>>,
}

impl Part {
    fn is_empty(&self) -> bool {
        self.present.is_empty() && self.inters.is_empty()
    }
}

struct Eval<'a> {
    g: &'a Configuration,
    behavior: &'a Behavior,
    universe: &'a [Comp],
}

impl Eval<'_> {
    fn sat(&self, part: &Part, store: &mut BTreeMap<String, Comp>, f: &Formula) -> bool {
        let v = |x: &String| store[x];
        match f {
            Formula::Emp => part.is_empty(),
            Formula::Comp(x) => part.inters.is_empty() && part.present.len() == 1 && part.present.contains(&v(x)),
            Formula::Inter(ps) => {
                let mut i = Vec::new();
                for (x, p) in ps {
                    match self.behavior.port_index(p) {
                        Some(k) => i.push((v(x), k)),
                        None => return false,
                    }
                }
                interaction_is_valid(&i) && part.present.is_empty() && part.inters.len() == 1 && part.inters.contains(&i)
            }
            Formula::State(x, q) => {
                part.is_empty() && self.behavior.state_index(q) == Some(self.g.state(v(x)))
            }
            Formula::Eq(x, y) => part.is_empty() && v(x) == v(y),
            Formula::Neq(x, y) => part.is_empty() && v(x) != v(y),
            Formula::Pred(..) => false,
            Formula::Sep(fs) => self.split(part, store, fs),
            Formula::Exists(x, body) => {
                let old = store.get(x).copied();
                let mut found = false;
                for &c in self.universe {
                    store.insert(x.clone(), c);
                    if self.sat(part, store, body) {
                        found = true;
                        break;
                    }
                }
                match old {
                    Some(c) => store.insert(x.clone(), c),
                    None => store.remove(x),
                };
                found
            }
        }
    }

    /// Tries every split of `part` between the first operand and the rest.
    fn split(&self, part: &Part, store: &mut BTreeMap<String, Comp>, fs: &[Formula]) -> bool {
        match fs {
            [] => part.is_empty(),
            [f] => self.sat(part, store, f),
            [f, rest @ ..] => {
                let cs: Vec<Comp> = part.present.iter().copied().collect();
                let is: Vec<&Vec<(Comp, usize)>> = part.inters.iter().collect();
                let n = cs.len() + is.len();
                for mask in 0u64..(1u64 << n) {
                    let mut left = Part {
                        present: BTreeSet::new(),
                        inters: BTreeSet::new(),
                    };
                    let mut right = left.clone();
                    for (k, c) in cs.iter().enumerate() {
                        if mask >> k & 1 == 1 { &mut left } else { &mut right }.present.insert(*c);
                    }
                    for (k, i) in is.iter().enumerate() {
                        let side = if mask >> (cs.len() + k) & 1 == 1 { &mut left } else { &mut right };
                        side.inters.insert((*i).clone());
                    }
                    if self.sat(&left, store, f) && self.split(&right, store, rest) {
                        return true;
                    }
                }
                false
            }
        }
    }
}
