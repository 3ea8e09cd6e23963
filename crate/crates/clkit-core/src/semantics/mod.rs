//! Concrete configurations and the reference semantics.
//!
//! Components are small integers. A configuration keeps its present
//! components, its interactions and a state map; the state map is total,
//! with every component not listed explicitly in state 0 (the first
//! declared state).

mod oracle;
mod pf;

pub use oracle::{check_model, check_model_prefix, enumerate_models, ModelBudget, OracleError};
pub use pf::{satisfies_pf, UnboundVariable};

use crate::syntax::Behavior;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Comp = u32;

/// Largest universe slice the oracle works with.
pub const MAXU: usize = 32;

/// A component outside every universe slice. Used as filler in heap
/// encodings.
pub const SINK: Comp = Comp::MAX;

/// `(component, port index)` pairs.
pub type Interaction = Vec<(Comp, usize)>;

/// True when the components of an interaction are pairwise distinct.
pub fn interaction_is_valid(i: &[(Comp, usize)]) -> bool {
    !i.is_empty() && i.iter().enumerate().all(|(k, (c, _))| i[k + 1..].iter().all(|(d, _)| c != d))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub present: BTreeSet<Comp>,
    pub interactions: BTreeSet<Interaction>,
    /// Non-default entries only.
    statemap: BTreeMap<Comp, usize>,
}

/// `compose` was given configurations with different state maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StatemapMismatch;

impl fmt::Display for StatemapMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("configurations have different state maps")
    }
}

impl core::error::Error for StatemapMismatch {}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_statemap(states: impl IntoIterator<Item = (Comp, usize)>) -> Self {
        let mut g = Self::new();
        for (c, q) in states {
            g.set_state(c, q);
        }
        g
    }

    pub fn state(&self, c: Comp) -> usize {
        self.statemap.get(&c).copied().unwrap_or(0)
    }

    pub fn set_state(&mut self, c: Comp, q: usize) {
        if q == 0 {
            self.statemap.remove(&c);
        } else {
            self.statemap.insert(c, q);
        }
    }

    /// Components whose state differs from the default.
    pub fn explicit_states(&self) -> impl Iterator<Item = (Comp, usize)> + '_ {
        self.statemap.iter().map(|(c, q)| (*c, *q))
    }

    pub fn same_statemap(&self, other: &Self) -> bool {
        self.statemap == other.statemap
    }

    /// A configuration with the same state map and nothing else.
    pub fn pure_part(&self) -> Self {
        Configuration {
            present: BTreeSet::new(),
            interactions: BTreeSet::new(),
            statemap: self.statemap.clone(),
        }
    }

    pub fn is_spatially_empty(&self) -> bool {
        self.present.is_empty() && self.interactions.is_empty()
    }

    /// Present components together with those occurring in interactions.
    pub fn nodes(&self) -> BTreeSet<Comp> {
        let mut out = self.present.clone();
        for i in &self.interactions {
            out.extend(i.iter().map(|(c, _)| *c));
        }
        out
    }

    pub fn degree_of(&self, c: Comp) -> usize {
        self.interactions
            .iter()
            .filter(|i| i.iter().any(|(d, _)| *d == c))
            .count()
    }

    pub fn degree(&self) -> usize {
        let mut count: BTreeMap<Comp, usize> = BTreeMap::new();
        for i in &self.interactions {
            let cs: BTreeSet<Comp> = i.iter().map(|(c, _)| *c).collect();
            for c in cs {
                *count.entry(c).or_default() += 1;
            }
        }
        count.values().copied().max().unwrap_or(0)
    }

    /// Some interaction mentions an absent component.
    pub fn is_loose(&self) -> bool {
        self.interactions
            .iter()
            .any(|i| i.iter().any(|(c, _)| !self.present.contains(c)))
    }

    /// Sub-configuration check with the same state map.
    pub fn contains(&self, other: &Self) -> bool {
        self.statemap == other.statemap
            && other.present.is_subset(&self.present)
            && other.interactions.is_subset(&self.interactions)
    }
}

/// Composition: disjoint union of components and of interactions.
/// `Ok(None)` when the operands overlap.
pub fn compose(g1: &Configuration, g2: &Configuration) -> Result<Option<Configuration>, StatemapMismatch> {
    if g1.statemap != g2.statemap {
        return Err(StatemapMismatch);
    }
    if !g1.present.is_disjoint(&g2.present) || !g1.interactions.is_disjoint(&g2.interactions) {
        return Ok(None);
    }
    let mut out = g1.clone();
    out.present.extend(g2.present.iter().copied());
    out.interactions.extend(g2.interactions.iter().cloned());
    Ok(Some(out))
}

/// A configuration together with the values of a predicate's parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Model {
    pub config: Configuration,
    pub store: Vec<Comp>,
}

fn comp_name(c: Comp) -> String {
    if c == SINK {
        String::from("_")
    } else {
        format!("c{c}")
    }
}

/// One-line dump:
/// `model { comps=[…] inter=[(a.out,b.in),…] state={a:H,…} store={x:a,…} }`.
/// States are listed for the nodes and the stored components.
pub fn render_model(m: &Model, behavior: &Behavior, params: &[String]) -> String {
    let g = &m.config;
    let comps: Vec<String> = g.present.iter().map(|c| comp_name(*c)).collect();
    let inters: Vec<String> = g
        .interactions
        .iter()
        .map(|i| {
            let ps: Vec<String> = i
                .iter()
                .map(|(c, p)| format!("{}.{}", comp_name(*c), behavior.ports.get(*p).map(String::as_str).unwrap_or("?")))
                .collect();
            format!("({})", ps.join(","))
        })
        .collect();
    let mut shown = g.nodes();
    shown.extend(m.store.iter().copied());
    shown.extend(g.statemap.keys().copied());
    let states: Vec<String> = shown
        .iter()
        .map(|c| format!("{}:{}", comp_name(*c), behavior.state_name(g.state(*c))))
        .collect();
    let store: Vec<String> = params
        .iter()
        .zip(&m.store)
        .map(|(x, c)| format!("{x}:{}", comp_name(*c)))
        .collect();
    format!(
        "model {{ comps=[{}] inter=[{}] state={{{}}} store={{{}}} }}",
        comps.join(","),
        inters.join(","),
        states.join(","),
        store.join(",")
    )
}
