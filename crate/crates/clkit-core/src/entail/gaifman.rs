//! Gaifman heaps: one record of `K` components per node.
//!
//! Entries are numbered from 1. Entry 1 tells whether the owner is
//! present, then come `B` slots per interaction type holding the tuples
//! of the owner's interactions of that type, then one entry per state.
//! An entry "holds" a fact when it equals the owner. Unused slots hold
//! the all-owner tuple, which is never a valid interaction (for unary
//! types, `SINK` instead), and unused presence and state entries hold
//! [`SINK`].

use crate::semantics::{Comp, Configuration, SINK};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    /// Degree bound: slots per interaction type.
    pub b: usize,
    /// Interaction types as port index sequences.
    pub types: Vec<Vec<usize>>,
    pub n_states: usize,
    /// Record length.
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GaifmanError {
    ZeroBound,
    /// A component has more interactions of one type than slots.
    DegreeExceeded { comp: Comp, ty: usize, count: usize },
    UnknownType(Vec<usize>),
    UnknownState { comp: Comp, state: usize },
    RecordLength { comp: Comp, len: usize },
    NoState(Comp),
    AmbiguousState(Comp),
    InvalidSlot { comp: Comp, ty: usize, slot: usize },
}

impl fmt::Display for GaifmanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaifmanError::ZeroBound => f.write_str("the degree bound must be at least 1"),
            GaifmanError::DegreeExceeded { comp, ty, count } => {
                write!(f, "component {comp} has {count} interactions of type {ty}, more than the bound")
            }
            GaifmanError::UnknownType(t) => write!(f, "interaction type {t:?} is not in the layout"),
            GaifmanError::UnknownState { comp, state } => write!(f, "component {comp} has unknown state {state}"),
            GaifmanError::RecordLength { comp, len } => write!(f, "record of {comp} has length {len}"),
            GaifmanError::NoState(c) => write!(f, "record of {c} encodes no state"),
            GaifmanError::AmbiguousState(c) => write!(f, "record of {c} encodes several states"),
            GaifmanError::InvalidSlot { comp, ty, slot } => {
                write!(f, "record of {comp} has an invalid tuple in slot {slot} of type {ty}")
            }
        }
    }
}

impl core::error::Error for GaifmanError {}

/// `pos(i, j, k) = 1 + B * sum_{l<j} |τ_l| + i * |τ_j| + k` for slot `i`
/// in `0..B`, type `j` (0-based here) and `k` in `1..=|τ_j|`; state `q_k`
/// (1-based) is entry `1 + B * sum_l |τ_l| + k`, and
/// `K = 1 + B * sum_l |τ_l| + N`.
pub fn make_layout(b: usize, types: Vec<Vec<usize>>, n_states: usize) -> Result<Layout, GaifmanError> {
    if b == 0 {
        return Err(GaifmanError::ZeroBound);
    }
    let total: usize = types.iter().map(Vec::len).sum();
    Ok(Layout {
        b,
        k: 1 + b * total + n_states,
        types,
        n_states,
    })
}

pub type GaifmanHeap = BTreeMap<Comp, Vec<Comp>>;

impl Layout {
    pub const PRESENCE: usize = 1;

    pub fn pos(&self, i: usize, j: usize, k: usize) -> usize {
        let before: usize = self.types[..j].iter().map(Vec::len).sum();
        1 + self.b * before + i * self.types[j].len() + k
    }

    /// The 1-based entries of slot `i` of type `j`.
    pub fn slot(&self, i: usize, j: usize) -> Range<usize> {
        self.pos(i, j, 1)..self.pos(i, j, 1) + self.types[j].len()
    }

    /// The entry of state `q` (0-based).
    pub fn state_entry(&self, q: usize) -> usize {
        self.k - self.n_states + q + 1
    }

    pub fn type_index(&self, ports: &[usize]) -> Option<usize> {
        self.types.iter().position(|t| t == ports)
    }
}

/// Entry `k` of the filler of an unused slot of arity `len`.
pub fn filler(owner: Comp, len: usize) -> Comp {
    if len == 1 {
        SINK
    } else {
        owner
    }
}

fn is_filler(owner: Comp, t: &[Comp]) -> bool {
    t.iter().all(|&d| d == filler(owner, t.len()))
}

fn read(rec: &[Comp], e: usize) -> Comp {
    rec[e - 1]
}

/// For component `c` and every type, the sorted component tuples of the
/// interactions of that type containing `c`.
fn xi_tuples(g: &Configuration, layout: &Layout, c: Comp) -> Result<Vec<Vec<Vec<Comp>>>, GaifmanError> {
    let mut out = vec![Vec::new(); layout.types.len()];
    for i in &g.interactions {
        if i.iter().any(|(d, _)| *d == c) {
            let ports: Vec<usize> = i.iter().map(|(_, p)| *p).collect();
            let j = layout.type_index(&ports).ok_or(GaifmanError::UnknownType(ports))?;
            out[j].push(i.iter().map(|(d, _)| *d).collect());
        }
    }
    for ts in &mut out {
        ts.sort();
    }
    Ok(out)
}

/// The canonical heap: tuples in ascending slots, in lexicographic order.
pub fn encode_gaifman(g: &Configuration, layout: &Layout) -> Result<GaifmanHeap, GaifmanError> {
    let mut h = GaifmanHeap::new();
    for c in g.nodes() {
        let mut rec = vec![SINK; layout.k];
        if g.present.contains(&c) {
            rec[Layout::PRESENCE - 1] = c;
        }
        for (j, ts) in xi_tuples(g, layout, c)?.into_iter().enumerate() {
            if ts.len() > layout.b {
                return Err(GaifmanError::DegreeExceeded {
                    comp: c,
                    ty: j,
                    count: ts.len(),
                });
            }
            for i in 0..layout.b {
                for (k, e) in layout.slot(i, j).enumerate() {
                    rec[e - 1] = ts.get(i).map_or(filler(c, layout.types[j].len()), |t| t[k]);
                }
            }
        }
        let q = g.state(c);
        if q >= layout.n_states {
            return Err(GaifmanError::UnknownState { comp: c, state: q });
        }
        rec[layout.state_entry(q) - 1] = c;
        h.insert(c, rec);
    }
    Ok(h)
}

/// A slot tuple is an interaction of its owner when its components are
/// pairwise distinct and include the owner.
fn slot_interaction(owner: Comp, t: &[Comp]) -> bool {
    t.contains(&owner) && t.iter().enumerate().all(|(k, a)| !t[k + 1..].contains(a))
}

/// Inverse of [`encode_gaifman`] on heaps that pass [`is_gaifman_heap`].
/// Interactions are collected from every record.
pub fn decode_gaifman(h: &GaifmanHeap, layout: &Layout) -> Result<Configuration, GaifmanError> {
    let mut g = Configuration::new();
    for (&c, rec) in h {
        if rec.len() != layout.k {
            return Err(GaifmanError::RecordLength { comp: c, len: rec.len() });
        }
        if read(rec, Layout::PRESENCE) == c {
            g.present.insert(c);
        }
        for (j, ty) in layout.types.iter().enumerate() {
            for i in 0..layout.b {
                let t: Vec<Comp> = layout.slot(i, j).map(|e| read(rec, e)).collect();
                if slot_interaction(c, &t) {
                    g.interactions.insert(t.into_iter().zip(ty.iter().copied()).collect());
                } else if !is_filler(c, &t) {
                    return Err(GaifmanError::InvalidSlot { comp: c, ty: j, slot: i });
                }
            }
        }
        let states: Vec<usize> = (0..layout.n_states)
            .filter(|&q| read(rec, layout.state_entry(q)) == c)
            .collect();
        match states.as_slice() {
            [q] => g.set_state(c, *q),
            [] => return Err(GaifmanError::NoState(c)),
            _ => return Err(GaifmanError::AmbiguousState(c)),
        }
    }
    Ok(g)
}

/// The defining conditions of a Gaifman heap for `g`, with unused slots
/// required to hold the all-owner filler. Slot order is free.
pub fn is_gaifman_heap(h: &GaifmanHeap, g: &Configuration, layout: &Layout) -> bool {
    let keys: BTreeSet<Comp> = h.keys().copied().collect();
    if keys != g.nodes() {
        return false;
    }
    h.iter().all(|(&c, rec)| {
        if rec.len() != layout.k || (read(rec, Layout::PRESENCE) == c) != g.present.contains(&c) {
            return false;
        }
        let Ok(xi) = xi_tuples(g, layout, c) else {
            return false;
        };
        let types_ok = layout.types.iter().enumerate().all(|(j, _)| {
            let mut found = Vec::new();
            for i in 0..layout.b {
                let t: Vec<Comp> = layout.slot(i, j).map(|e| read(rec, e)).collect();
                if slot_interaction(c, &t) {
                    found.push(t);
                } else if !is_filler(c, &t) {
                    return false;
                }
            }
            let n = found.len();
            found.sort();
            found.dedup();
            found.len() == n && found == xi[j]
        });
        types_ok && (0..layout.n_states).all(|q| (read(rec, layout.state_entry(q)) == c) == (g.state(c) == q))
    })
}
