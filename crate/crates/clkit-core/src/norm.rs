//! Rules in prenex, flattened form with integer variables.
//!
//! Every rule `A(x1..xa) <- phi` becomes a list of atoms over variables
//! `0..nvars`, where `0..a` are the parameters and the remaining ones are
//! the (alpha-renamed) existentials. All analyses work on this form.

use crate::syntax::{Behavior, Formula, Sid, SidError};
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub type VarId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NInter {
    /// Index into [`NSid::types`].
    pub ty: usize,
    pub vars: Vec<VarId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCall {
    pub pred: usize,
    pub args: Vec<VarId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NRule {
    pub id: usize,
    pub pred: usize,
    pub arity: usize,
    /// Display names, parameters first; pairwise distinct.
    pub var_names: Vec<String>,
    pub comps: Vec<VarId>,
    pub inters: Vec<NInter>,
    /// `(variable, state index)`.
    pub states: Vec<(VarId, usize)>,
    pub eqs: Vec<(VarId, VarId)>,
    pub neqs: Vec<(VarId, VarId)>,
    pub calls: Vec<NCall>,
}

impl NRule {
    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn is_param(&self, v: VarId) -> bool {
        (v as usize) < self.arity
    }

    /// Distinct variables occurring in interaction atoms, in order of
    /// first occurrence.
    pub fn interaction_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for it in &self.inters {
            for &v in &it.vars {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Number of comp, interaction and pure atoms.
    pub fn local_atom_count(&self) -> usize {
        self.comps.len() + self.inters.len() + self.states.len() + self.eqs.len() + self.neqs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NPred {
    pub name: String,
    pub params: Vec<String>,
    pub rules: Vec<usize>,
}

impl NPred {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A normalized SID.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NSid {
    pub behavior: Behavior,
    pub preds: Vec<NPred>,
    pub rules: Vec<NRule>,
    /// Interaction types as port-index sequences, in order of first occurrence.
    pub types: Vec<Vec<usize>>,
}

impl NSid {
    pub fn from_sid(sid: &Sid) -> Result<NSid, SidError> {
        sid.validate()?;
        let b = &sid.behavior;
        let types: Vec<Vec<usize>> = sid
            .interaction_types()
            .iter()
            .map(|ty| ty.iter().map(|p| b.port_index(p).unwrap()).collect())
            .collect();
        let mut preds = Vec::new();
        let mut rules = Vec::new();
        for (pi, p) in sid.preds.iter().enumerate() {
            let mut ids = Vec::new();
            for body in &p.rules {
                let id = rules.len();
                let mut n = Normalizer {
                    sid,
                    types: &types,
                    rule: NRule {
                        id,
                        pred: pi,
                        arity: p.arity(),
                        var_names: p.params.clone(),
                        comps: Vec::new(),
                        inters: Vec::new(),
                        states: Vec::new(),
                        eqs: Vec::new(),
                        neqs: Vec::new(),
                        calls: Vec::new(),
                    },
                };
                let mut env: Vec<(String, VarId)> =
                    p.params.iter().enumerate().map(|(i, x)| (x.clone(), i as VarId)).collect();
                n.walk(body, &mut env);
                rules.push(n.rule);
                ids.push(id);
            }
            preds.push(NPred {
                name: p.name.clone(),
                params: p.params.clone(),
                rules: ids,
            });
        }
        Ok(NSid {
            behavior: sid.behavior.clone(),
            preds,
            rules,
            types,
        })
    }

    pub fn pred_index(&self, name: &str) -> Option<usize> {
        self.preds.iter().position(|p| p.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.preds.iter().map(NPred::arity).max().unwrap_or(0)
    }

    pub fn max_inter_size(&self) -> usize {
        self.types.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Ports of a type joined with `.`, e.g. `out.in`.
    pub fn type_name(&self, ty: usize) -> String {
        let names: Vec<&str> = self.types[ty]
            .iter()
            .map(|&p| self.behavior.ports[p].as_str())
            .collect();
        names.join(".")
    }

    /// The predicate-free atoms of a rule, in a fixed order.
    pub fn local_atoms(&self, r: &NRule) -> Vec<Formula> {
        let v = |x: VarId| r.var_names[x as usize].clone();
        let b = &self.behavior;
        let mut atoms = Vec::new();
        for &c in &r.comps {
            atoms.push(Formula::Comp(v(c)));
        }
        for &(x, q) in &r.states {
            atoms.push(Formula::State(v(x), b.states[q].clone()));
        }
        for it in &r.inters {
            atoms.push(Formula::Inter(
                it.vars
                    .iter()
                    .zip(&self.types[it.ty])
                    .map(|(&x, &p)| (v(x), b.ports[p].clone()))
                    .collect(),
            ));
        }
        for &(x, y) in &r.eqs {
            atoms.push(Formula::Eq(v(x), v(y)));
        }
        for &(x, y) in &r.neqs {
            atoms.push(Formula::Neq(v(x), v(y)));
        }
        atoms
    }

    /// Predicate atoms of a rule as `(name, argument names)`.
    pub fn call_atoms(&self, r: &NRule) -> Vec<(String, Vec<String>)> {
        r.calls
            .iter()
            .map(|c| {
                (
                    self.preds[c.pred].name.clone(),
                    c.args.iter().map(|&a| r.var_names[a as usize].clone()).collect(),
                )
            })
            .collect()
    }

    /// The rule as a prenex formula `exists y1..ym . atoms`.
    pub fn rule_formula(&self, r: &NRule) -> Formula {
        let mut atoms = self.local_atoms(r);
        for (p, args) in self.call_atoms(r) {
            atoms.push(Formula::Pred(p, args));
        }
        Formula::exists(r.var_names[r.arity..].iter().cloned(), Formula::sep(atoms))
    }

    /// Every variable name used by the rules of a predicate.
    pub fn names_of(&self, pred: usize) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.preds[pred].params.iter().cloned().collect();
        for &r in &self.preds[pred].rules {
            out.extend(self.rules[r].var_names.iter().cloned());
        }
        out
    }
}

struct Normalizer<'a> {
    sid: &'a Sid,
    types: &'a [Vec<usize>],
    rule: NRule,
}

impl Normalizer<'_> {
    fn lookup(env: &[(String, VarId)], x: &str) -> VarId {
        env.iter().rev().find(|(n, _)| n == x).map(|(_, v)| *v).unwrap()
    }

    fn walk(&mut self, f: &Formula, env: &mut Vec<(String, VarId)>) {
        let b = &self.sid.behavior;
        match f {
            Formula::Emp => {}
            Formula::Comp(x) => self.rule.comps.push(Self::lookup(env, x)),
            Formula::State(x, q) => {
                let v = Self::lookup(env, x);
                self.rule.states.push((v, b.state_index(q).unwrap()));
            }
            Formula::Inter(ps) => {
                let ty: Vec<usize> = ps.iter().map(|(_, p)| b.port_index(p).unwrap()).collect();
                let ty = self.types.iter().position(|t| *t == ty).unwrap();
                let vars = ps.iter().map(|(x, _)| Self::lookup(env, x)).collect();
                self.rule.inters.push(NInter { ty, vars });
            }
            Formula::Eq(x, y) => {
                let e = (Self::lookup(env, x), Self::lookup(env, y));
                self.rule.eqs.push(e);
            }
            Formula::Neq(x, y) => {
                let e = (Self::lookup(env, x), Self::lookup(env, y));
                self.rule.neqs.push(e);
            }
            Formula::Pred(a, args) => {
                let pred = self.sid.preds.iter().position(|p| &p.name == a).unwrap();
                let args = args.iter().map(|x| Self::lookup(env, x)).collect();
                self.rule.calls.push(NCall { pred, args });
            }
            Formula::Sep(fs) => fs.iter().for_each(|g| self.walk(g, env)),
            Formula::Exists(x, body) => {
                let id = self.rule.var_names.len() as VarId;
                let taken: BTreeSet<&str> = self.rule.var_names.iter().map(String::as_str).collect();
                let mut name = x.clone();
                let mut k = 1;
                while taken.contains(name.as_str()) {
                    name = format!("{x}_{k}");
                    k += 1;
                }
                self.rule.var_names.push(name);
                env.push((x.clone(), id));
                self.walk(body, env);
                env.pop();
            }
        }
    }
}
