use super::{Formula, Sid};

/// Size measures of a SID.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SidMetrics {
    /// Sum over all rules of `|body| + arity + 1`.
    pub size: usize,
    pub max_arity: usize,
    /// Largest body size.
    pub width: usize,
    /// Longest interaction atom, 0 when there is none.
    pub max_inter_size: usize,
}

/// Symbol count of a formula: every constructor and every leaf (variable,
/// port, state or predicate name) counts one. A flat conjunction of `k`
/// operands counts as the `k - 1` binary constructors it stands for.
pub fn formula_size(f: &Formula) -> usize {
    match f {
        Formula::Emp => 1,
        Formula::Comp(_) => 2,
        Formula::State(..) | Formula::Eq(..) | Formula::Neq(..) => 3,
        Formula::Inter(ps) => 1 + 2 * ps.len(),
        Formula::Pred(_, args) => 2 + args.len(),
        Formula::Sep(fs) => fs.len() - 1 + fs.iter().map(formula_size).sum::<usize>(),
        Formula::Exists(_, b) => 2 + formula_size(b),
    }
}

fn max_inter(f: &Formula) -> usize {
    match f {
        Formula::Inter(ps) => ps.len(),
        Formula::Sep(fs) => fs.iter().map(max_inter).max().unwrap_or(0),
        Formula::Exists(_, b) => max_inter(b),
        _ => 0,
    }
}

pub fn sid_metrics(sid: &Sid) -> SidMetrics {
    let mut m = SidMetrics::default();
    for p in &sid.preds {
        m.max_arity = m.max_arity.max(p.arity());
        for r in &p.rules {
            let s = formula_size(r);
            m.size += s + p.arity() + 1;
            m.width = m.width.max(s);
            m.max_inter_size = m.max_inter_size.max(max_inter(r));
        }
    }
    m
}
