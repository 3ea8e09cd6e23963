use super::{Behavior, Formula, PredDef, Sid};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// The SID families the toolkit can generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Token rings `ring_h_t` / chains `chain_h_t` for all `h <= h_cap`,
    /// `t <= t_cap`: rings with at least `h` components in state `H` and
    /// at least `t` in state `T`.
    Ring { h_cap: usize, t_cap: usize },
    /// A controller connected to any number of workers.
    Star,
    /// The rotation family whose least solution has `2^(n!)` base tuples
    /// for `A1`.
    WorstCase { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyError(pub String);

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unsupported family parameters: {}", self.0)
    }
}

impl core::error::Error for FamilyError {}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| String::from(*s)).collect()
}

fn ring_behavior() -> Behavior {
    Behavior {
        ports: names(&["in", "out"]),
        states: names(&["H", "T"]),
        transitions: vec![
            ("H".into(), "in".into(), "T".into()),
            ("T".into(), "out".into(), "H".into()),
        ],
    }
}

pub(crate) fn ring_name(h: usize, t: usize) -> String {
    format!("ring_{h}_{t}")
}

pub(crate) fn chain_name(h: usize, t: usize) -> String {
    format!("chain_{h}_{t}")
}

/// Counter update after consuming one component in state `q`.
fn step(h: usize, t: usize, q: &str) -> (usize, usize) {
    if q == "H" {
        (h.saturating_sub(1), t)
    } else {
        (h, t.saturating_sub(1))
    }
}

fn ring_sid(h_cap: usize, t_cap: usize) -> Sid {
    let mut preds = Vec::new();
    for h in 0..=h_cap {
        for t in 0..=t_cap {
            let rules = ["H", "T"]
                .iter()
                .map(|q| {
                    let (h2, t2) = step(h, t, q);
                    Formula::exists(
                        ["y", "z"],
                        Formula::sep([
                            Formula::compstate("x", q),
                            Formula::inter(&[("x", "out"), ("z", "in")]),
                            Formula::pred(&chain_name(h2, t2), &["z", "y"]),
                            Formula::inter(&[("y", "out"), ("x", "in")]),
                        ]),
                    )
                })
                .collect();
            preds.push(PredDef {
                name: ring_name(h, t),
                params: names(&["x"]),
                rules,
            });
        }
    }
    for h in 0..=h_cap {
        for t in 0..=t_cap {
            let mut rules: Vec<Formula> = ["H", "T"]
                .iter()
                .map(|q| {
                    let (h2, t2) = step(h, t, q);
                    Formula::exists(
                        ["z"],
                        Formula::sep([
                            Formula::compstate("x", q),
                            Formula::inter(&[("x", "out"), ("z", "in")]),
                            Formula::pred(&chain_name(h2, t2), &["z", "y"]),
                        ]),
                    )
                })
                .collect();
            match (h, t) {
                (0, 1) => rules.push(Formula::sep([Formula::compstate("x", "T"), Formula::eq("x", "y")])),
                (1, 0) => rules.push(Formula::sep([Formula::compstate("x", "H"), Formula::eq("x", "y")])),
                (0, 0) => rules.push(Formula::sep([Formula::comp("x"), Formula::eq("x", "y")])),
                _ => {}
            }
            preds.push(PredDef {
                name: chain_name(h, t),
                params: names(&["x", "y"]),
                rules,
            });
        }
    }
    Sid {
        behavior: ring_behavior(),
        preds,
    }
}

fn star_sid() -> Sid {
    Sid {
        behavior: Behavior {
            ports: names(&["in", "out"]),
            states: names(&["idle"]),
            transitions: vec![],
        },
        preds: vec![
            PredDef {
                name: "Star".into(),
                params: names(&["x"]),
                rules: vec![Formula::sep([Formula::comp("x"), Formula::pred("Worker", &["x"])])],
            },
            PredDef {
                name: "Worker".into(),
                params: names(&["x"]),
                rules: vec![
                    Formula::Emp,
                    Formula::exists(
                        ["y"],
                        Formula::sep([
                            Formula::inter(&[("x", "out"), ("y", "in")]),
                            Formula::comp("y"),
                            Formula::pred("Worker", &["x"]),
                        ]),
                    ),
                ],
            },
        ],
    }
}

fn worst_case_sid(n: usize) -> Sid {
    let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut preds = Vec::new();
    for i in 1..n {
        let mut atoms = Vec::new();
        for j in 0..=(n - i) {
            let mut args: Vec<String> = xs[..i - 1].to_vec();
            let mut tail: Vec<String> = xs[i - 1..].to_vec();
            tail.rotate_left(j);
            args.extend(tail);
            atoms.push(Formula::Pred(format!("A{}", i + 1), args));
        }
        preds.push(PredDef {
            name: format!("A{i}"),
            params: xs.clone(),
            rules: vec![Formula::sep(atoms)],
        });
    }
    preds.push(PredDef {
        name: format!("A{n}"),
        params: xs.clone(),
        rules: vec![
            Formula::Inter(xs.iter().map(|x| (x.clone(), String::from("p"))).collect()),
            Formula::Emp,
        ],
    });
    Sid {
        behavior: Behavior {
            ports: names(&["p"]),
            states: names(&["s"]),
            transitions: vec![],
        },
        preds,
    }
}

/// Builds one of the standard SID families.
pub fn generate_family(kind: Family) -> Result<Sid, FamilyError> {
    match kind {
        Family::Ring { h_cap, t_cap } => {
            if h_cap > 8 || t_cap > 8 {
                return Err(FamilyError(format!("ring caps {h_cap},{t_cap} exceed 8")));
            }
            Ok(ring_sid(h_cap, t_cap))
        }
        Family::Star => Ok(star_sid()),
        Family::WorstCase { n } => {
            if n == 0 || n > 6 {
                return Err(FamilyError(format!("worst-case n={n} outside 1..=6")));
            }
            Ok(worst_case_sid(n))
        }
    }
}

/// The ring family extended with the two entailment helpers
/// `A1_h_t(x1)` and `A2_h_t(x1, x2)` for `1 <= h <= h_cap`, `t <= t_cap`:
/// a ring (resp. an open ring segment) whose root is in state `H`,
/// followed by a chain counted with `h - 1` and `t`.
///
/// With `swap_ports`, the ring rules connect `in` to `out` instead of
/// `out` to `in`; the helpers are unchanged.
pub fn ring_entailment_sid(h_cap: usize, t_cap: usize, swap_ports: bool) -> Result<Sid, FamilyError> {
    let mut sid = generate_family(Family::Ring { h_cap, t_cap })?;
    if swap_ports {
        for p in sid.preds.iter_mut().filter(|p| p.name.starts_with("ring_")) {
            for r in p.rules.iter_mut() {
                swap_in_out(r);
            }
        }
    }
    for h in 1..=h_cap {
        for t in 0..=t_cap {
            let chain = chain_name(h - 1, t);
            sid.preds.push(PredDef {
                name: format!("A1_{h}_{t}"),
                params: names(&["x1"]),
                rules: vec![Formula::exists(
                    ["y", "z"],
                    Formula::sep([
                        Formula::compstate("x1", "H"),
                        Formula::inter(&[("x1", "out"), ("z", "in")]),
                        Formula::pred(&chain, &["z", "y"]),
                        Formula::inter(&[("y", "out"), ("x1", "in")]),
                    ]),
                )],
            });
            sid.preds.push(PredDef {
                name: format!("A2_{h}_{t}"),
                params: names(&["x1", "x2"]),
                rules: vec![Formula::exists(
                    ["z"],
                    Formula::sep([
                        Formula::compstate("x1", "H"),
                        Formula::inter(&[("x1", "out"), ("z", "in")]),
                        Formula::pred(&chain, &["z", "x2"]),
                        Formula::inter(&[("x2", "out"), ("x1", "in")]),
                    ]),
                )],
            });
        }
    }
    Ok(sid)
}

fn swap_in_out(f: &mut Formula) {
    match f {
        Formula::Inter(ps) => {
            for (_, p) in ps.iter_mut() {
                *p = match p.as_str() {
                    "in" => "out".into(),
                    "out" => "in".into(),
                    other => other.into(),
                };
            }
        }
        Formula::Sep(fs) => fs.iter_mut().for_each(swap_in_out),
        Formula::Exists(_, b) => swap_in_out(b),
        _ => {}
    }
}
