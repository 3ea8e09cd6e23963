use super::{Formula, Sid};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

/// Prints a formula in the concrete grammar.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Exists(..) => {
            let mut vars = Vec::new();
            let mut body = f;
            while let Formula::Exists(v, b) = body {
                vars.push(v.as_str());
                body = b;
            }
            let _ = write!(out, "exists {} . ", vars.join(" "));
            write_formula(body, out);
        }
        Formula::Sep(items) => {
            for (i, g) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" * ");
                }
                if matches!(g, Formula::Exists(..) | Formula::Sep(_)) {
                    out.push('(');
                    write_formula(g, out);
                    out.push(')');
                } else {
                    write_formula(g, out);
                }
            }
        }
        Formula::Emp => out.push_str("emp"),
        Formula::Comp(x) => {
            let _ = write!(out, "comp({x})");
        }
        Formula::State(x, q) => {
            let _ = write!(out, "state({x}, {q})");
        }
        Formula::Inter(ps) => {
            let args: Vec<String> = ps.iter().map(|(x, p)| format!("{x}.{p}")).collect();
            let _ = write!(out, "inter({})", args.join(", "));
        }
        Formula::Eq(x, y) => {
            let _ = write!(out, "{x} = {y}");
        }
        Formula::Neq(x, y) => {
            let _ = write!(out, "{x} != {y}");
        }
        Formula::Pred(a, args) => {
            let _ = write!(out, "{a}({})", args.join(", "));
        }
    }
}

/// Prints a SID in the file grammar accepted by [`super::parse_sid`].
pub fn print_sid(sid: &Sid) -> String {
    let mut out = String::new();
    let b = &sid.behavior;
    if !b.is_empty() {
        out.push_str("behavior {\n");
        let _ = writeln!(out, "  ports {{ {} }}", b.ports.join(", "));
        let _ = writeln!(out, "  states {{ {} }}", b.states.join(", "));
        if !b.transitions.is_empty() {
            out.push_str("  trans {");
            for (s, p, t) in &b.transitions {
                let _ = write!(out, " {s} - {p} -> {t};");
            }
            out.push_str(" }\n");
        }
        out.push_str("}\n");
    }
    for p in &sid.preds {
        let _ = writeln!(out, "pred {}({}) {{", p.name, p.params.join(", "));
        for r in &p.rules {
            let _ = writeln!(out, "  rule {};", print_formula(r));
        }
        out.push_str("}\n");
    }
    out
}
