//! `clkit`: command-line front end for the CL decision procedures.
//!
//! Every subcommand prints a `key=value` report on standard output.
//! Exit codes: 0 positive verdict, 1 negative verdict, 2 usage or parse
//! error, 3 resource cap exceeded.

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use clkit_core::bound::{analyze_bounded, BoundError};
use clkit_core::entail::sl::{annotate_nsid, check_sl_fragment, emit_sl, SlError};
use clkit_core::entail::{
    classify_rules, compute_profile, decide_entail_bounded, entail_budget, sid_flags, ArityRelation, EntailError,
    EntailVerdict,
};
use clkit_core::norm::NSid;
use clkit_core::sat::{least_solution_traced, witness_model, SatError, SatOptions, Solution};
use clkit_core::semantics::{enumerate_models, render_model, ModelBudget, OracleError};
use clkit_core::syntax::{
    generate_family, parse_sid, print_sid, ring_entailment_sid, sid_metrics, Family, Sid,
};
use clkit_core::tight::{build_loose_sid, TightError};
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "clkit", version, about = "Decision procedures for Configuration Logic")]
struct Cli {
    /// Overrides the resource caps (also settable through CLKIT_CAP).
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Adds the wall time to the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Is the predicate satisfiable?
    Sat {
        file: String,
        pred: String,
        /// One line per new base tuple.
        #[arg(long)]
        trace_fixpoint: bool,
    },
    /// Are all models of the predicate tight?
    Tight {
        file: String,
        pred: String,
        /// Writes the looseness reduction to this file.
        #[arg(long, value_name = "OUT.sid")]
        emit_reduction: Option<String>,
    },
    /// Is the degree of the models of the predicate bounded?
    Bounded {
        file: String,
        pred: String,
        /// Also reports the degree cut-off.
        #[arg(long)]
        cutoff: bool,
        /// Writes the dependency graph in DOT form.
        #[arg(long, value_name = "OUT.dot")]
        emit_graph: Option<String>,
    },
    /// Bounded check of `A |= B`.
    Entail {
        file: String,
        a: String,
        b: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        universe: usize,
        /// Writes the annotated SL SID of the left side's SID.
        #[arg(long, value_name = "OUT.sl")]
        emit_sl: Option<String>,
    },
    /// Enumerates the models of the predicate.
    Models {
        file: String,
        pred: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        universe: usize,
        /// Enumerates the states of unconstrained components.
        #[arg(long)]
        all_states: bool,
    },
    /// Prints metrics, profile and rule classification.
    Check { file: String },
    /// Prints a generated SID family.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        /// `h_cap t_cap` for rings, `n` for the worst case.
        params: Vec<usize>,
        /// Ring entailment family only: swap the ports of the ring rules.
        #[arg(long)]
        swap_ports: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Ring,
    Star,
    Worstcase,
    RingEntail,
}

enum Fail {
    Usage(anyhow::Error),
    Cap(String),
}

impl<E: Into<anyhow::Error>> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail::Usage(e.into())
    }
}

fn sat_fail(e: SatError) -> Fail {
    match e {
        SatError::CapExceeded(_) => Fail::Cap(e.to_string()),
        e => Fail::Usage(e.into()),
    }
}

fn oracle_fail(e: OracleError) -> Fail {
    match e {
        OracleError::CapExceeded(_) => Fail::Cap(e.to_string()),
        e => Fail::Usage(e.into()),
    }
}

fn tight_fail(e: TightError) -> Fail {
    match e {
        TightError::Sat(e) => sat_fail(e),
        e => Fail::Usage(e.into()),
    }
}

fn bound_fail(e: BoundError) -> Fail {
    match e {
        BoundError::Sat(e) => sat_fail(e),
        e => Fail::Usage(e.into()),
    }
}

fn entail_fail(e: EntailError) -> Fail {
    match e {
        EntailError::Oracle(e) => oracle_fail(e),
        e => Fail::Usage(e.into()),
    }
}

fn sl_fail(e: SlError) -> Fail {
    match e {
        SlError::CapExceeded(_) => Fail::Cap(e.to_string()),
        SlError::Oracle(e) => oracle_fail(e),
        e => Fail::Usage(e.into()),
    }
}

struct Caps {
    tuples: usize,
    sl_rules: usize,
    models: usize,
}

fn caps(flag: Option<usize>) -> Result<Caps, Fail> {
    let over = match flag {
        Some(n) => Some(n),
        None => match std::env::var("CLKIT_CAP") {
            Ok(v) => Some(v.trim().parse().with_context(|| format!("CLKIT_CAP={v} is not a number"))?),
            Err(_) => None,
        },
    };
    Ok(Caps {
        tuples: over.unwrap_or(clkit_core::DEFAULT_TUPLE_CAP),
        sl_rules: over.unwrap_or(clkit_core::DEFAULT_SL_RULE_CAP),
        models: over.unwrap_or(ModelBudget::new(1, 1).max_models),
    })
}

fn load(file: &str) -> Result<Sid, Fail> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {file}"))?;
    Ok(parse_sid(&text).with_context(|| format!("cannot parse {file}"))?)
}

fn write_file(path: &str, text: &str) -> Result<(), Fail> {
    Ok(std::fs::write(path, text).with_context(|| format!("cannot write {path}"))?)
}

/// The report: ordered `key=value` lines.
#[derive(Default)]
struct Report {
    lines: Vec<String>,
}

impl Report {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key}={value}"));
    }

    fn raw(&mut self, line: String) {
        self.lines.push(line);
    }

    fn metrics(&mut self, sid: &Sid) {
        let m = sid_metrics(sid);
        self.put("preds", sid.preds.len());
        self.put("rules", sid.rule_count());
        self.put("size", m.size);
        self.put("max_arity", m.max_arity);
        self.put("width", m.width);
        self.put("max_inter_size", m.max_inter_size);
    }

    fn solution(&mut self, sol: &Solution) {
        self.put("iterations", sol.iterations);
        self.put("tuples", sol.total());
    }
}

fn check_pred(n: &NSid, pred: &str) -> Result<usize, Fail> {
    n.pred_index(pred)
        .ok_or_else(|| Fail::Usage(anyhow::anyhow!("unknown predicate `{pred}`")))
}

fn yes(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Runs one command; `Ok(true)` is a positive verdict.
fn run(cli: &Cli, out: &mut Report, trace: &mut Vec<String>) -> Result<bool, Fail> {
    let caps = caps(cli.cap)?;
    match &cli.cmd {
        Cmd::Sat {
            file,
            pred,
            trace_fixpoint,
        } => {
            let sid = load(file)?;
            out.metrics(&sid);
            let n = NSid::from_sid(&sid)?;
            let p = check_pred(&n, pred)?;
            let opts = SatOptions {
                cap: caps.tuples,
                record_hyperedges: false,
            };
            let mut sink = |line: &str| trace.push(line.to_string());
            let hook: Option<&mut dyn FnMut(&str)> = if *trace_fixpoint { Some(&mut sink) } else { None };
            let sol = least_solution_traced(&n, opts, hook).map_err(sat_fail)?;
            let sat = !sol.tuples[p].is_empty();
            out.put("verdict", if sat { "SAT" } else { "UNSAT" });
            out.solution(&sol);
            if sat {
                if let Some(w) = witness_model(&n, &sol, p).map_err(oracle_fail)? {
                    out.put("witness_height", w.height);
                    out.put("witness_validated", yes(w.validated));
                    out.put("witness", render_model(&w.model, &sid.behavior, &n.preds[p].params));
                }
            }
            Ok(sat)
        }
        Cmd::Tight {
            file,
            pred,
            emit_reduction,
        } => {
            let sid = load(file)?;
            out.metrics(&sid);
            let red = build_loose_sid(&sid, pred).map_err(tight_fail)?;
            let n = NSid::from_sid(&red.sid)?;
            let e = check_pred(&n, &red.entry)?;
            let opts = SatOptions {
                cap: caps.tuples,
                record_hyperedges: false,
            };
            let sol = clkit_core::sat::least_solution(&n, opts).map_err(sat_fail)?;
            let loose = !sol.tuples[e].is_empty();
            out.put("verdict", if loose { "LOOSE" } else { "TIGHT" });
            out.put("reduction_entry", &red.entry);
            out.put("reduction_rules", red.sid.rule_count());
            out.solution(&sol);
            if let Some(path) = emit_reduction {
                write_file(path, &print_sid(&red.sid))?;
                out.put("reduction", path);
            }
            Ok(!loose)
        }
        Cmd::Bounded {
            file,
            pred,
            cutoff,
            emit_graph,
        } => {
            let sid = load(file)?;
            out.metrics(&sid);
            let (rep, graph) = analyze_bounded(&sid, pred, caps.tuples).map_err(bound_fail)?;
            let verdict = match (rep.bounded, cutoff, rep.cutoff) {
                (false, _, _) => "UNBOUNDED".to_string(),
                (true, true, Some(c)) => format!("BOUNDED(cutoff={c})"),
                (true, true, None) => "BOUNDED(cutoff=overflow)".to_string(),
                (true, false, _) => "BOUNDED".to_string(),
            };
            out.put("verdict", verdict);
            let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
            if *cutoff {
                out.put("graph_bound", opt(rep.graph_bound.map(|v| v.to_string())));
                out.put("formula_bound", opt(rep.formula_bound.map(|v| v.to_string())));
                out.put("cutoff", opt(rep.cutoff.map(|v| v.to_string())));
            }
            out.put("vertices", rep.vertices);
            out.put("edges", rep.edges);
            out.solution(&graph.solution);
            if let Some(path) = emit_graph {
                write_file(path, &graph.to_dot())?;
                out.put("graph", path);
            }
            Ok(rep.bounded)
        }
        Cmd::Entail {
            file,
            a,
            b,
            depth,
            universe,
            emit_sl: sl_path,
        } => {
            let sid = load(file)?;
            out.metrics(&sid);
            let classes = classify_rules(&sid)?;
            let (p, c, e) = sid_flags(&classes);
            out.put("progressing", yes(p));
            out.put("connected", yes(c));
            out.put("e_restricted", yes(e));
            let mut budget = entail_budget(*depth, *universe);
            budget.max_models = caps.models;
            let rep = decide_entail_bounded(&sid, a, b, &budget).map_err(entail_fail)?;
            let rel = match rep.relation {
                ArityRelation::Equal => "equal",
                ArityRelation::RightLonger => "right-longer",
                ArityRelation::LeftLonger => "left-longer",
            };
            out.put("arity_relation", rel);
            out.put("depth", depth);
            out.put("universe", universe);
            out.put("models_checked", rep.models);
            let holds = match &rep.verdict {
                EntailVerdict::HoldsUpToBound => {
                    out.put("verdict", format!("ENTAILS-UP-TO-BOUND(depth={depth},universe={universe})"));
                    true
                }
                EntailVerdict::Counterexample(m) => {
                    out.put("verdict", "COUNTEREXAMPLE");
                    let n = NSid::from_sid(&sid)?;
                    let pa = check_pred(&n, a)?;
                    out.put("counterexample", render_model(m, &sid.behavior, &n.preds[pa].params));
                    false
                }
            };
            if let Some(path) = sl_path {
                let n = NSid::from_sid(&sid)?;
                let (rep, _) = analyze_bounded(&sid, a, caps.tuples).map_err(bound_fail)?;
                let bound = rep
                    .cutoff
                    .ok_or_else(|| Fail::Usage(anyhow::anyhow!("`{a}` is not degree-bounded, no SL SID")))?;
                let bound = usize::try_from(bound).unwrap_or(usize::MAX);
                let sl = annotate_nsid(&n, bound, caps.sl_rules).map_err(sl_fail)?;
                let ok = check_sl_fragment(&sl).iter().all(|&(_, p, c, e)| p && c && e);
                write_file(path, &emit_sl(&sl, &n))?;
                out.put("sl_bound", bound);
                out.put("sl_preds", sl.preds.len());
                out.put("sl_rules", sl.rule_count());
                out.put("sl_fragment", yes(ok));
                out.put("sl", path);
            }
            Ok(holds)
        }
        Cmd::Models {
            file,
            pred,
            depth,
            universe,
            all_states,
        } => {
            let sid = load(file)?;
            let n = NSid::from_sid(&sid)?;
            let p = check_pred(&n, pred)?;
            let mut budget = ModelBudget::new(*depth, *universe);
            budget.states_enumerated = *all_states;
            budget.max_models = caps.models;
            let models = enumerate_models(&n, pred, &budget).map_err(oracle_fail)?;
            for m in &models {
                out.raw(render_model(m, &sid.behavior, &n.preds[p].params));
            }
            out.put("models", models.len());
            Ok(!models.is_empty())
        }
        Cmd::Check { file } => {
            let sid = load(file)?;
            out.metrics(&sid);
            for (pred, pos) in compute_profile(&sid)? {
                let s: Vec<String> = pos.iter().map(usize::to_string).collect();
                out.put(&format!("profile.{pred}"), format!("{{{}}}", s.join(",")));
            }
            let classes = classify_rules(&sid)?;
            for c in &classes {
                out.raw(format!(
                    "rule={}#{} progressing={} connected={} e_restricted={}",
                    c.pred,
                    c.rule,
                    yes(c.progressing),
                    yes(c.connected),
                    yes(c.e_restricted)
                ));
            }
            let (p, c, e) = sid_flags(&classes);
            out.put("progressing", yes(p));
            out.put("connected", yes(c));
            out.put("e_restricted", yes(e));
            Ok(true)
        }
        Cmd::Gen {
            family,
            params,
            swap_ports,
        } => {
            let want = |k: usize| -> Result<(), Fail> {
                if params.len() == k {
                    Ok(())
                } else {
                    Err(Fail::Usage(anyhow::anyhow!("{family:?} takes {k} numeric parameter(s)")))
                }
            };
            let sid = match family {
                FamilyArg::Ring => {
                    want(2)?;
                    generate_family(Family::Ring {
                        h_cap: params[0],
                        t_cap: params[1],
                    })?
                }
                FamilyArg::Star => {
                    want(0)?;
                    generate_family(Family::Star)?
                }
                FamilyArg::Worstcase => {
                    want(1)?;
                    generate_family(Family::WorstCase { n: params[0] })?
                }
                FamilyArg::RingEntail => {
                    want(2)?;
                    ring_entailment_sid(params[0], params[1], *swap_ports)?
                }
            };
            out.raw(print_sid(&sid).trim_end().to_string());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = Report::default();
    let mut trace = Vec::new();
    let result = run(&cli, &mut report, &mut trace);
    let mut text = String::new();
    if !matches!(cli.cmd, Cmd::Gen { .. }) {
        let echo: Vec<String> = std::env::args().skip(1).collect();
        let _ = writeln!(text, "command={}", echo.join(" "));
    }
    for line in &trace {
        let _ = writeln!(text, "{line}");
    }
    for line in &report.lines {
        let _ = writeln!(text, "{line}");
    }
    let code = match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Fail::Usage(e)) => {
            let _ = writeln!(text, "error={e:#}");
            2
        }
        Err(Fail::Cap(e)) => {
            let _ = writeln!(text, "error={e}");
            let _ = writeln!(text, "verdict=CAP-EXCEEDED");
            3
        }
    };
    if cli.timing {
        let _ = writeln!(text, "time_ms={}", start.elapsed().as_millis());
    }
    print!("{text}");
    ExitCode::from(code)
}
