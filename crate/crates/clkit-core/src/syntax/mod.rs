//! Abstract syntax of CL formulae and SIDs, with parser, printer,
//! size metrics and the generators for the standard SID families.

mod family;
mod metrics;
mod parse;
mod print;

pub use family::{generate_family, ring_entailment_sid, Family, FamilyError};
pub use metrics::{formula_size, sid_metrics, SidMetrics};
pub use parse::{parse_formula, parse_sid, ParseError};
pub use print::{print_formula, print_sid};

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// The finite-state machine shared by all components.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Behavior {
    pub ports: Vec<String>,
    pub states: Vec<String>,
    /// `(from, port, to)` triples.
    pub transitions: Vec<(String, String, String)>,
}

impl Behavior {
    pub fn port_index(&self, p: &str) -> Option<usize> {
        self.ports.iter().position(|x| x == p)
    }

    pub fn state_index(&self, q: &str) -> Option<usize> {
        self.states.iter().position(|x| x == q)
    }

    /// Number of states seen by the semantics. A behavior without declared
    /// states still has one anonymous state, so that state maps are total.
    pub fn state_count(&self) -> usize {
        self.states.len().max(1)
    }

    /// Display name of state `k`.
    pub fn state_name(&self, k: usize) -> &str {
        self.states.get(k).map(String::as_str).unwrap_or("_")
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty() && self.states.is_empty() && self.transitions.is_empty()
    }
}

/// A CL formula. `Sep` is kept flat: it never holds another `Sep` and has
/// at least two operands (use [`Formula::sep`] to build one).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Emp,
    Comp(String),
    /// `(variable, port)` pairs.
    Inter(Vec<(String, String)>),
    State(String, String),
    Eq(String, String),
    Neq(String, String),
    Pred(String, Vec<String>),
    Sep(Vec<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    /// Separating conjunction in normal form: nested conjunctions are
    /// flattened, a single operand is returned as is, no operand gives `emp`.
    pub fn sep(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::Sep(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::Emp,
            1 => out.pop().unwrap(),
            _ => Formula::Sep(out),
        }
    }

    /// `exists v1 ... vn . body`, innermost binder last.
    pub fn exists<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Formula {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        vars.into_iter()
            .rev()
            .fold(body, |acc, v| Formula::Exists(v, Box::new(acc)))
    }

    pub fn comp(x: &str) -> Formula {
        Formula::Comp(x.into())
    }

    pub fn state(x: &str, q: &str) -> Formula {
        Formula::State(x.into(), q.into())
    }

    /// `comp(x) * state(x, q)`.
    pub fn compstate(x: &str, q: &str) -> Formula {
        Formula::Sep(alloc::vec![Formula::comp(x), Formula::state(x, q)])
    }

    pub fn inter(pairs: &[(&str, &str)]) -> Formula {
        Formula::Inter(pairs.iter().map(|(x, p)| ((*x).into(), (*p).into())).collect())
    }

    pub fn eq(x: &str, y: &str) -> Formula {
        Formula::Eq(x.into(), y.into())
    }

    pub fn neq(x: &str, y: &str) -> Formula {
        Formula::Neq(x.into(), y.into())
    }

    pub fn pred(name: &str, args: &[&str]) -> Formula {
        Formula::Pred(name.into(), args.iter().map(|a| (*a).into()).collect())
    }

    /// Free variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Emp => {}
            Formula::Comp(x) | Formula::State(x, _) => add(x, bound),
            Formula::Inter(ps) => ps.iter().for_each(|(x, _)| add(x, bound)),
            Formula::Eq(x, y) | Formula::Neq(x, y) => {
                add(x, bound);
                add(y, bound);
            }
            Formula::Pred(_, args) => args.iter().for_each(|x| add(x, bound)),
            Formula::Sep(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// True when the formula contains no predicate atom.
    pub fn is_predicate_free(&self) -> bool {
        match self {
            Formula::Pred(..) => false,
            Formula::Sep(fs) => fs.iter().all(Formula::is_predicate_free),
            Formula::Exists(_, b) => b.is_predicate_free(),
            _ => true,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

/// A predicate with its parameters and the bodies of its rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDef {
    pub name: String,
    pub params: Vec<String>,
    pub rules: Vec<Formula>,
}

impl PredDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A single rule `head(params) <- body`, borrowed from a [`Sid`].
#[derive(Clone, Copy, Debug)]
pub struct Rule<'a> {
    /// Position in the global rule order (predicates in declaration
    /// order, rules in textual order).
    pub id: usize,
    pub head: &'a str,
    pub params: &'a [String],
    pub body: &'a Formula,
}

/// A set of inductive definitions together with its behavior.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sid {
    pub behavior: Behavior,
    pub preds: Vec<PredDef>,
}

impl Sid {
    pub fn pred(&self, name: &str) -> Option<&PredDef> {
        self.preds.iter().find(|p| p.name == name)
    }

    pub fn pred_mut(&mut self, name: &str) -> Option<&mut PredDef> {
        self.preds.iter_mut().find(|p| p.name == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.pred(name).map(PredDef::arity)
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule<'_>> {
        self.preds
            .iter()
            .flat_map(|p| p.rules.iter().map(move |b| (p, b)))
            .enumerate()
            .map(|(id, (p, body))| Rule {
                id,
                head: &p.name,
                params: &p.params,
                body,
            })
    }

    pub fn rule_count(&self) -> usize {
        self.preds.iter().map(|p| p.rules.len()).sum()
    }

    pub fn pred_names(&self) -> BTreeSet<String> {
        self.preds.iter().map(|p| p.name.clone()).collect()
    }

    /// Adds a rule, declaring the predicate if needed.
    pub fn add_rule(&mut self, name: &str, params: &[String], body: Formula) {
        if let Some(p) = self.pred_mut(name) {
            p.rules.push(body);
        } else {
            self.preds.push(PredDef {
                name: name.into(),
                params: params.to_vec(),
                rules: alloc::vec![body],
            });
        }
    }

    /// Interaction types (port sequences) in order of first occurrence.
    pub fn interaction_types(&self) -> Vec<Vec<String>> {
        fn walk(f: &Formula, out: &mut Vec<Vec<String>>) {
            match f {
                Formula::Inter(ps) => {
                    let ty: Vec<String> = ps.iter().map(|(_, p)| p.clone()).collect();
                    if !out.contains(&ty) {
                        out.push(ty);
                    }
                }
                Formula::Sep(fs) => fs.iter().for_each(|g| walk(g, out)),
                Formula::Exists(_, b) => walk(b, out),
                _ => {}
            }
        }
        let mut out = Vec::new();
        for r in self.rules() {
            walk(r.body, &mut out);
        }
        out
    }

    /// Checks the well-formedness conditions of a SID.
    pub fn validate(&self) -> Result<(), SidError> {
        let b = &self.behavior;
        for (i, p) in b.ports.iter().enumerate() {
            if b.ports[..i].contains(p) {
                return Err(SidError::DuplicateName(p.clone()));
            }
        }
        for (i, q) in b.states.iter().enumerate() {
            if b.states[..i].contains(q) || b.ports.contains(q) {
                return Err(SidError::DuplicateName(q.clone()));
            }
        }
        for (s, p, t) in &b.transitions {
            for q in [s, t] {
                if b.state_index(q).is_none() {
                    return Err(SidError::UndeclaredState(q.clone()));
                }
            }
            if b.port_index(p).is_none() {
                return Err(SidError::UndeclaredPort(p.clone()));
            }
        }
        for (i, p) in self.preds.iter().enumerate() {
            if self.preds[..i].iter().any(|q| q.name == p.name) {
                return Err(SidError::DuplicatePredicate(p.name.clone()));
            }
            for (k, x) in p.params.iter().enumerate() {
                if p.params[..k].contains(x) {
                    return Err(SidError::RepeatedParameter {
                        pred: p.name.clone(),
                        param: x.clone(),
                    });
                }
            }
            for body in &p.rules {
                self.check_atoms(&p.name, body)?;
                if let Some(v) = body.free_vars().into_iter().find(|v| !p.params.contains(v)) {
                    return Err(SidError::FreeVariable {
                        pred: p.name.clone(),
                        var: v,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_atoms(&self, head: &str, f: &Formula) -> Result<(), SidError> {
        let b = &self.behavior;
        match f {
            Formula::Inter(ps) => {
                if ps.is_empty() {
                    return Err(SidError::EmptyInteraction(head.into()));
                }
                for (_, p) in ps {
                    if b.port_index(p).is_none() {
                        return Err(SidError::UndeclaredPort(p.clone()));
                    }
                }
            }
            Formula::State(_, q) => {
                if b.state_index(q).is_none() {
                    return Err(SidError::UndeclaredState(q.clone()));
                }
            }
            Formula::Pred(name, args) => match self.pred(name) {
                None => return Err(SidError::UndeclaredPredicate(name.clone())),
                Some(p) if p.arity() != args.len() => {
                    return Err(SidError::ArityMismatch {
                        pred: name.clone(),
                        expected: p.arity(),
                        found: args.len(),
                    })
                }
                Some(_) => {}
            },
            Formula::Sep(fs) => {
                for g in fs {
                    self.check_atoms(head, g)?;
                }
            }
            Formula::Exists(_, body) => self.check_atoms(head, body)?,
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for Sid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_sid(self))
    }
}

/// Violations of SID well-formedness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SidError {
    DuplicateName(String),
    DuplicatePredicate(String),
    RepeatedParameter { pred: String, param: String },
    UndeclaredPort(String),
    UndeclaredState(String),
    UndeclaredPredicate(String),
    ArityMismatch { pred: String, expected: usize, found: usize },
    FreeVariable { pred: String, var: String },
    EmptyInteraction(String),
}

impl fmt::Display for SidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SidError::DuplicateName(n) => write!(f, "name `{n}` declared twice in behavior"),
            SidError::DuplicatePredicate(n) => write!(f, "predicate `{n}` declared twice"),
            SidError::RepeatedParameter { pred, param } => {
                write!(f, "predicate `{pred}`: repeated parameter `{param}`")
            }
            SidError::UndeclaredPort(p) => write!(f, "undeclared port `{p}`"),
            SidError::UndeclaredState(q) => write!(f, "undeclared state `{q}`"),
            SidError::UndeclaredPredicate(a) => write!(f, "undeclared predicate `{a}`"),
            SidError::ArityMismatch {
                pred,
                expected,
                found,
            } => write!(f, "predicate `{pred}` expects {expected} arguments, got {found}"),
            SidError::FreeVariable { pred, var } => {
                write!(f, "rule of `{pred}`: variable `{var}` is neither a parameter nor bound")
            }
            SidError::EmptyInteraction(p) => write!(f, "rule of `{p}`: empty interaction atom"),
        }
    }
}

impl core::error::Error for SidError {}
