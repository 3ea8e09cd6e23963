//! Decision procedures for Configuration Logic (CL).
//!
//! CL describes snapshots of distributed systems as configurations: a set
//! of present components, a set of interactions (hyperedges between
//! component ports) and a state map. Inductive predicate definitions (SIDs)
//! describe whole architecture families. This crate decides satisfiability,
//! tightness and degree boundedness of SID predicates, computes degree
//! cut-offs, checks the syntactic conditions needed for entailment, and
//! encodes configurations as heaps for a separation-logic reduction. A
//! brute-force bounded model enumerator serves as the reference oracle.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod base;
pub mod bound;
pub mod entail;
pub mod norm;
pub mod pure;
pub mod sat;
pub mod semantics;
pub mod syntax;
pub mod tight;

mod fresh;

/// Default limit on the number of base tuples (and graph vertices) kept
/// by the fixpoint engines before they abort.
pub const DEFAULT_TUPLE_CAP: usize = 1_000_000;

/// Default limit on the number of annotated rules generated for the
/// separation-logic encoding.
pub const DEFAULT_SL_RULE_CAP: usize = 100_000;
