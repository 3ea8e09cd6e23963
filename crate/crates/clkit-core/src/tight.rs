//! Tightness through satisfiability, and back.
//!
//! `build_loose_sid` adds, for every predicate `B`, a predicate `B__loose`
//! with one extra parameter that ends up bound to a component occurring
//! in some interaction atom. `Loose__A(x) <- exists y . A__loose(x, y) * comp(y)`
//! is then satisfiable exactly when some model of `A` has an interaction
//! with an absent component.

use crate::fresh::fresh_name;
use crate::norm::NSid;
use crate::sat::{decide_sat, SatError};
use crate::syntax::{Formula, Sid, SidError};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TightError {
    Sid(SidError),
    UnknownPredicate(String),
    /// The behavior declares no port, so no interaction can be written.
    NoPorts,
    UnknownPort(String),
    Sat(SatError),
}

impl fmt::Display for TightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TightError::Sid(e) => write!(f, "{e}"),
            TightError::UnknownPredicate(p) => write!(f, "unknown predicate `{p}`"),
            TightError::NoPorts => f.write_str("the behavior declares no ports"),
            TightError::UnknownPort(p) => write!(f, "unknown port `{p}`"),
            TightError::Sat(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TightError {}

impl From<SidError> for TightError {
    fn from(e: SidError) -> Self {
        TightError::Sid(e)
    }
}

impl From<SatError> for TightError {
    fn from(e: SatError) -> Self {
        match e {
            SatError::Sid(e) => TightError::Sid(e),
            e => TightError::Sat(e),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LooseReduction {
    pub sid: Sid,
    /// Name of the entry predicate `Loose__A`.
    pub entry: String,
    /// Original predicate to its primed copy.
    pub primed: BTreeMap<String, String>,
}

fn check_pred(n: &NSid, pred: &str) -> Result<usize, TightError> {
    n.pred_index(pred)
        .ok_or_else(|| TightError::UnknownPredicate(pred.into()))
}

pub fn build_loose_sid(sid: &Sid, pred: &str) -> Result<LooseReduction, TightError> {
    let n = NSid::from_sid(sid)?;
    let a = check_pred(&n, pred)?;
    let mut taken = sid.pred_names();
    let primed: Vec<String> = n
        .preds
        .iter()
        .map(|p| fresh_name(&alloc::format!("{}__loose", p.name), &mut taken))
        .collect();
    let entry = fresh_name(&alloc::format!("Loose__{pred}"), &mut taken);
    let mut out = sid.clone();
    for (pi, p) in n.preds.iter().enumerate() {
        let mut names = n.names_of(pi);
        let extra = fresh_name("x_last", &mut names);
        let mut params = p.params.clone();
        params.push(extra.clone());
        for &ri in &p.rules {
            let r = &n.rules[ri];
            let local = n.local_atoms(r);
            let calls = n.call_atoms(r);
            let ex = || r.var_names[r.arity..].iter().cloned();
            let unprimed = || calls.iter().map(|(q, args)| Formula::Pred(q.clone(), args.clone()));
            // extra parameter equal to an interaction variable of this rule
            for z in r.interaction_vars() {
                let mut atoms = local.clone();
                atoms.push(Formula::eq(&extra, &r.var_names[z as usize]));
                atoms.extend(unprimed());
                out.add_rule(&primed[pi], &params, Formula::exists(ex(), Formula::sep(atoms)));
            }
            // or passed down to one callee
            for (i, c) in r.calls.iter().enumerate() {
                let mut atoms = local.clone();
                for (j, (q, args)) in calls.iter().enumerate() {
                    if i == j {
                        let mut args = args.clone();
                        args.push(extra.clone());
                        atoms.push(Formula::Pred(primed[c.pred].clone(), args));
                    } else {
                        atoms.push(Formula::Pred(q.clone(), args.clone()));
                    }
                }
                out.add_rule(&primed[pi], &params, Formula::exists(ex(), Formula::sep(atoms)));
            }
            if r.calls.is_empty() {
                let mut atoms = local.clone();
                atoms.push(Formula::comp(&extra));
                out.add_rule(&primed[pi], &params, Formula::exists(ex(), Formula::sep(atoms)));
            }
        }
        if p.rules.is_empty() && out.pred(&primed[pi]).is_none() {
            // keep the predicate declared even without rules
            out.preds.push(crate::syntax::PredDef {
                name: primed[pi].clone(),
                params,
                rules: Vec::new(),
            });
        }
    }
    let params = n.preds[a].params.clone();
    let mut reserved: BTreeSet<String> = params.iter().cloned().collect();
    let y = fresh_name("y", &mut reserved);
    let mut args = params.clone();
    args.push(y.clone());
    out.add_rule(
        &entry,
        &params,
        Formula::exists([y.clone()], Formula::sep([Formula::Pred(primed[a].clone(), args), Formula::comp(&y)])),
    );
    let primed = n
        .preds
        .iter()
        .zip(primed)
        .map(|(p, q)| (p.name.clone(), q))
        .collect();
    Ok(LooseReduction {
        sid: out,
        entry,
        primed,
    })
}

/// Some model of `pred` is loose.
pub fn decide_loose(sid: &Sid, pred: &str) -> Result<bool, TightError> {
    let red = build_loose_sid(sid, pred)?;
    Ok(decide_sat(&red.sid, &red.entry)?)
}

/// Every model of `pred` is tight.
pub fn decide_tight(sid: &Sid, pred: &str) -> Result<bool, TightError> {
    Ok(!decide_loose(sid, pred)?)
}

/// Adds `SatLoose__A(x) <- exists y1 y2 . A(x) * inter(y1.p1, y2.p2)`. The
/// new predicate has a loose model exactly when `A` is satisfiable.
/// Ports default to the first declared one.
pub fn build_sat_to_loose(
    sid: &Sid,
    pred: &str,
    p1: Option<&str>,
    p2: Option<&str>,
) -> Result<(Sid, String), TightError> {
    sid.validate()?;
    let a = sid
        .pred(pred)
        .ok_or_else(|| TightError::UnknownPredicate(pred.into()))?;
    let first = sid.behavior.ports.first().ok_or(TightError::NoPorts)?;
    let port = |p: Option<&str>| -> Result<String, TightError> {
        match p {
            None => Ok(first.clone()),
            Some(p) if sid.behavior.port_index(p).is_some() => Ok(p.into()),
            Some(p) => Err(TightError::UnknownPort(p.into())),
        }
    };
    let (p1, p2) = (port(p1)?, port(p2)?);
    let mut taken = sid.pred_names();
    let name = fresh_name(&alloc::format!("SatLoose__{pred}"), &mut taken);
    let params = a.params.clone();
    let mut reserved: BTreeSet<String> = params.iter().cloned().collect();
    let y1 = fresh_name("y1", &mut reserved);
    let y2 = fresh_name("y2", &mut reserved);
    let body = Formula::exists(
        [y1.clone(), y2.clone()],
        Formula::sep([
            Formula::Pred(pred.into(), params.clone()),
            Formula::inter(&[(&y1, &p1), (&y2, &p2)]),
        ]),
    );
    let mut out = sid.clone();
    out.add_rule(&name, &params, body);
    Ok((out, name))
}
