//! Acceptance run: one PASS/FAIL line per criterion, then a single
//! assertion over all of them.
//!
//! Reference answers come from the brute-force model enumerator, from
//! exhaustive partition search (pure formulae) and from direct structural
//! comparison (heap encodings), never from the procedures under test.

use clkit_core::bound::{analyze_bounded, degree_cutoff};
use clkit_core::entail::gaifman::{decode_gaifman, encode_gaifman, is_gaifman_heap, make_layout, Layout};
use clkit_core::entail::sl::{annotate_nsid, check_gaifman_correspondence, check_sl_fragment};
use clkit_core::entail::{classify_rules, decide_entail_bounded, entail_budget, sid_flags, EntailVerdict};
use clkit_core::norm::NSid;
use clkit_core::pure::{closure, pure_sat, PureFormula};
use clkit_core::sat::{decide_sat, least_solution, tuple_covers, SatOptions};
use clkit_core::semantics::{enumerate_models, interaction_is_valid, render_model, Comp, Configuration, Model, ModelBudget};
use clkit_core::syntax::{generate_family, parse_sid, ring_entailment_sid, Family, Sid};
use clkit_core::tight::{build_loose_sid, build_sat_to_loose, decide_loose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Instance {
    name: &'static str,
    sid: Sid,
    pred: &'static str,
}

fn text(name: &'static str, pred: &'static str, src: &str) -> Instance {
    Instance {
        name,
        sid: parse_sid(src).unwrap(),
        pred,
    }
}

fn family(name: &'static str, pred: &'static str, f: Family) -> Instance {
    Instance {
        name,
        sid: generate_family(f).unwrap(),
        pred,
    }
}

const RING_PORTS: &str = "behavior { ports { in, out } states { H, T } }";

fn suite() -> Vec<Instance> {
    let mut swapped = ring_entailment_sid(1, 1, true).unwrap();
    swapped.preds.retain(|p| !p.name.starts_with('A'));
    vec![
        family("ring", "ring_1_1", Family::Ring { h_cap: 1, t_cap: 1 }),
        family("ring-2-1", "ring_2_1", Family::Ring { h_cap: 2, t_cap: 1 }),
        text(
            "chain",
            "Chain",
            &format!(
                "{RING_PORTS}
                 pred Chain(x, y){{
                   rule compstate(x, H) * inter(x.out, y.in) * compstate(y, T);
                   rule exists z . compstate(x, H) * inter(x.out, z.in) * Chain(z, y);
                 }}"
            ),
        ),
        family("star", "Star", Family::Star),
        text("comp-only", "A", "pred A(x){ rule comp(x); }"),
        text(
            "pure-contradiction",
            "A",
            &format!("{RING_PORTS} pred A(x){{ rule exists y . comp(x) * x = y * y != x; rule compstate(x, H) * state(x, T); }}"),
        ),
        text("no-base-case", "A", "pred A(x){ rule exists y . comp(x) * A(y); }"),
        text(
            "dangling-interaction",
            "L",
            &format!("{RING_PORTS} pred L(x){{ rule exists y . comp(x) * inter(x.out, y.in); }}"),
        ),
        family("worstcase-2", "A1", Family::WorstCase { n: 2 }),
        Instance {
            name: "mutant-swapped-ring",
            sid: swapped,
            pred: "ring_1_1",
        },
        text(
            "mutant-chain-without-base",
            "Chain",
            &format!(
                "{RING_PORTS}
                 pred Chain(x, y){{
                   rule exists z . compstate(x, H) * inter(x.out, z.in) * Chain(z, y);
                 }}"
            ),
        ),
    ]
}

fn nsid(sid: &Sid) -> NSid {
    NSid::from_sid(sid).unwrap()
}

/// Does the enumerator find a model within depth 6 and universe 8?
/// Small budgets first, the full one only when they come back empty.
fn oracle_sat(n: &NSid, pred: &str) -> bool {
    for (d, u) in [(3, 4), (4, 6), (6, 8)] {
        if !enumerate_models(n, pred, &ModelBudget::new(d, u)).unwrap().is_empty() {
            return true;
        }
    }
    false
}

fn oracle_loose(n: &NSid, pred: &str, depth: usize, universe: usize) -> bool {
    enumerate_models(n, pred, &ModelBudget::new(depth, universe))
        .unwrap()
        .iter()
        .any(|m| m.config.is_loose())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for k in [2, 3] {
        let n = nsid(&generate_family(Family::WorstCase { n: k }).unwrap());
        let sol = least_solution(&n, SatOptions::default()).unwrap();
        counts.push(sol.tuples[n.pred_index("A1").unwrap()].len());
    }
    let took = start.elapsed();
    outcome(
        counts == [4, 64] && took < Duration::from_secs(60),
        format!("|mu(A1)| = {counts:?} for n = 2, 3 in {:.2}s", took.as_secs_f64()),
    )
}

fn criterion_2(suite: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for i in suite {
        let n = nsid(&i.sid);
        let got = decide_sat(&i.sid, i.pred).unwrap();
        if got != oracle_sat(&n, i.pred) {
            bad.push(i.name);
        }
    }
    let took = start.elapsed();
    outcome(
        bad.is_empty() && suite.len() >= 10 && took < Duration::from_secs(120),
        format!("{} SIDs, disagreements {bad:?}, {:.2}s", suite.len(), took.as_secs_f64()),
    )
}

fn criterion_3(suite: &[Instance]) -> Outcome {
    let (mut models, mut bad) = (0, 0);
    for i in suite {
        let n = nsid(&i.sid);
        let sol = least_solution(&n, SatOptions::default()).unwrap();
        for (p, pd) in n.preds.iter().enumerate() {
            for m in enumerate_models(&n, &pd.name, &ModelBudget::new(4, 5)).unwrap() {
                models += 1;
                if !sol.tuples[p].iter().any(|t| tuple_covers(&n, t, &m)) {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        bad == 0 && models > 0,
        format!("{models} oracle models (depth 4, universe 5), {bad} uncovered"),
    )
}

fn criterion_4(suite: &[Instance]) -> Outcome {
    let mut bad = Vec::new();
    for i in suite {
        let n = nsid(&i.sid);
        let red = build_loose_sid(&i.sid, i.pred).unwrap();
        let loose = decide_loose(&i.sid, i.pred).unwrap();
        let via_sat = decide_sat(&red.sid, &red.entry).unwrap();
        let oracle = oracle_loose(&n, i.pred, 4, 5);
        if loose != via_sat || loose != oracle {
            bad.push(format!("{}: loose={loose} sat(reduction)={via_sat} oracle={oracle}", i.name));
        }
        if i.sid.behavior.ports.is_empty() {
            continue;
        }
        let (s2, entry) = build_sat_to_loose(&i.sid, i.pred, None, None).unwrap();
        let sat = decide_sat(&i.sid, i.pred).unwrap();
        if sat != decide_loose(&s2, &entry).unwrap() {
            bad.push(format!("{}: sat-to-loose", i.name));
        }
    }
    let ring = &suite[0];
    let dangling = suite.iter().find(|i| i.name == "dangling-interaction").unwrap();
    let ring_tight = !decide_loose(&ring.sid, ring.pred).unwrap() && !oracle_loose(&nsid(&ring.sid), ring.pred, 6, 6);
    let dangling_loose = decide_loose(&dangling.sid, dangling.pred).unwrap() && oracle_loose(&nsid(&dangling.sid), dangling.pred, 3, 4);
    outcome(
        bad.is_empty() && ring_tight && dangling_loose,
        format!("disagreements {bad:?}; ring TIGHT={ring_tight}, dangling LOOSE={dangling_loose}"),
    )
}

fn max_degree(models: &[Model]) -> usize {
    models.iter().map(|m| m.config.degree()).max().unwrap_or(0)
}

fn criterion_5(suite: &[Instance]) -> Outcome {
    let star = suite.iter().find(|i| i.name == "star").unwrap();
    let sn = nsid(&star.sid);
    let star_unbounded = !analyze_bounded(&star.sid, star.pred, 1_000_000).unwrap().0.bounded;
    let degrees: Vec<usize> = (3..=7)
        .map(|d| max_degree(&enumerate_models(&sn, star.pred, &ModelBudget::new(d, 8)).unwrap()))
        .collect();
    let increasing = degrees.windows(2).all(|w| w[0] < w[1]);

    let ring = &suite[0];
    let rn = nsid(&ring.sid);
    let (rep, _) = analyze_bounded(&ring.sid, ring.pred, 1_000_000).unwrap();
    let ring_degree = max_degree(&enumerate_models(&rn, ring.pred, &ModelBudget::new(6, 6)).unwrap());
    let ring_cutoff = degree_cutoff(&ring.sid, ring.pred).unwrap();
    let ring_ok = rep.bounded && ring_degree == 2 && ring_cutoff >= 2;

    let mut unsound = Vec::new();
    let mut bounded = 0;
    for i in suite {
        let (rep, _) = analyze_bounded(&i.sid, i.pred, 1_000_000).unwrap();
        if !rep.bounded {
            continue;
        }
        bounded += 1;
        let n = nsid(&i.sid);
        let deg = max_degree(&enumerate_models(&n, i.pred, &ModelBudget::new(6, 6)).unwrap());
        match rep.cutoff {
            Some(c) if c >= deg as u128 => {}
            c => unsound.push(format!("{}: cutoff {c:?} < degree {deg}", i.name)),
        }
    }
    outcome(
        star_unbounded && increasing && ring_ok && unsound.is_empty(),
        format!(
            "star UNBOUNDED={star_unbounded} degrees at depth 3..7 {degrees:?}; ring BOUNDED={} degree={ring_degree} cutoff={ring_cutoff}; \
             {bounded} bounded SIDs, unsound cutoffs {unsound:?}",
            rep.bounded
        ),
    )
}

fn random_pure(rng: &mut ChaCha8Rng, vars: u8) -> PureFormula<u8> {
    let mut p = PureFormula::new();
    for _ in 0..rng.random_range(0..=6) {
        let (a, b) = (rng.random_range(0..vars), rng.random_range(0..vars));
        match rng.random_range(0..3) {
            0 => p.add_eq(a, b),
            1 => p.add_neq(a, b),
            _ => p.add_state(a, rng.random_range(0..2)),
        }
    }
    p
}

/// Satisfiability by trying every partition of the variables into
/// equality classes.
fn brute_sat(p: &PureFormula<u8>, vars: u8) -> bool {
    fn go(p: &PureFormula<u8>, block: &mut Vec<u8>, vars: u8) -> bool {
        if block.len() == vars as usize {
            let b = |v: &u8| block[*v as usize];
            let eqs = p.eqs().all(|(x, y)| b(x) == b(y));
            let neqs = p.neqs().all(|(x, y)| b(x) != b(y));
            let states = p.states().all(|(x, q)| p.states().all(|(y, r)| b(x) != b(y) || q == r));
            return eqs && neqs && states;
        }
        let next = block.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            block.push(c);
            if go(p, block, vars) {
                return true;
            }
            block.pop();
        }
        false
    }
    go(p, &mut Vec::new(), vars)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for _ in 0..1000 {
        let vars = rng.random_range(1..=6);
        let p = random_pure(&mut rng, vars);
        let q = p.conj(&random_pure(&mut rng, vars));
        let c = closure(&p);
        let idempotent = closure(&c) == c;
        let extensive = p.is_subset(&c);
        let monotone = c.is_subset(&closure(&q));
        let sat = pure_sat(&p) == brute_sat(&p, vars) && pure_sat(&q) == brute_sat(&q, vars);
        if !(idempotent && extensive && monotone && sat) {
            bad += 1;
        }
    }
    let took = start.elapsed();
    outcome(
        bad == 0 && took < Duration::from_secs(10),
        format!("1000 formulae, {bad} disagreements, {:.2}s", took.as_secs_f64()),
    )
}

fn random_configuration(rng: &mut ChaCha8Rng, layout: &Layout) -> Configuration {
    let size = rng.random_range(1..=7);
    let mut g = Configuration::new();
    for c in 0..size {
        if rng.random_bool(0.6) {
            g.present.insert(c);
        }
    }
    for _ in 0..rng.random_range(0..=2 * size) {
        let ty = &layout.types[rng.random_range(0..layout.types.len())];
        let i: Vec<(Comp, usize)> = ty.iter().map(|&p| (rng.random_range(0..size), p)).collect();
        if !interaction_is_valid(&i) || g.interactions.contains(&i) {
            continue;
        }
        let mut h = g.clone();
        h.interactions.insert(i);
        if h.degree() <= layout.b {
            g = h;
        }
    }
    for c in g.nodes() {
        g.set_state(c, rng.random_range(0..layout.n_states));
    }
    g
}

fn criterion_7() -> Outcome {
    let types = vec![vec![1, 0], vec![0], vec![0, 1, 2]];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut bad, mut edges) = (0, 0);
    for k in 0..1000 {
        let layout = make_layout(1 + k % 2, types.clone(), 3).unwrap();
        let g = random_configuration(&mut rng, &layout);
        edges += g.interactions.len();
        let h = encode_gaifman(&g, &layout).unwrap();
        let ok = is_gaifman_heap(&h, &g, &layout) && decode_gaifman(&h, &layout).as_ref() == Ok(&g);
        if !ok {
            bad += 1;
        }
    }
    outcome(
        bad == 0 && edges > 0,
        format!("1000 configurations (B = 1, 2; {edges} interactions), {bad} failures"),
    )
}

fn criterion_8() -> Outcome {
    let (hc, tc) = (2, 2);
    let sid = ring_entailment_sid(hc, tc, false).unwrap();
    let swapped = ring_entailment_sid(hc, tc, true).unwrap();
    let n = nsid(&sid);
    let budget = entail_budget(6, 6);
    let (p, c, e) = sid_flags(&classify_rules(&sid).unwrap());
    let mut a2_fail = Vec::new();
    let mut a1_fail = Vec::new();
    let mut mutant_missed = Vec::new();
    for h in 1..=hc {
        for t in 0..=tc {
            let (ring, a1, a2) = (format!("ring_{h}_{t}"), format!("A1_{h}_{t}"), format!("A2_{h}_{t}"));
            if decide_entail_bounded(&sid, &a2, &ring, &budget).unwrap().verdict != EntailVerdict::HoldsUpToBound {
                a2_fail.push(format!("{a2} |= {ring}"));
            }
            if let EntailVerdict::Counterexample(m) = decide_entail_bounded(&sid, &ring, &a1, &budget).unwrap().verdict {
                a1_fail.push(format!("{ring} |= {a1}: {}", render_model(&m, &sid.behavior, &n.preds[n.pred_index(&ring).unwrap()].params)));
            }
            if decide_entail_bounded(&swapped, &a2, &ring, &budget).unwrap().verdict == EntailVerdict::HoldsUpToBound {
                mutant_missed.push(format!("{a2} |= {ring}"));
            }
        }
    }
    // The ring rule lets the root take any state while A1 puts x1 in
    // state H, so a ring rooted at a T component refutes ring |= A1.
    outcome(
        a2_fail.is_empty() && a1_fail.is_empty() && mutant_missed.is_empty() && p && c && e,
        format!(
            "flags progressing={p} connected={c} e_restricted={e}; A2 |= ring failures {a2_fail:?}; \
             mutant not refuted {mutant_missed:?}; ring |= A1 refuted ({} of 6) {:?}",
            a1_fail.len(),
            a1_fail.first()
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let tiny = [
        ("states", "A", "behavior { ports { in, out } states { a, b } } pred A(x){ rule compstate(x, a); rule compstate(x, b); }"),
        (
            "pair",
            "P",
            "behavior { ports { in, out } states { a, b } }
             pred P(x){ rule exists y . comp(x) * inter(x.out, y.in) * Q(y); }
             pred Q(x){ rule compstate(x, a); rule compstate(x, b); }",
        ),
        (
            "binary",
            "T",
            "behavior { ports { in, out } states { a, b } }
             pred T(x1, x2){ rule compstate(x1, a) * inter(x1.out, x2.in) * x1 != x2 * V(x2); }
             pred V(x){ rule compstate(x, b); }",
        ),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, pred, src) in tiny {
        let n = nsid(&parse_sid(src).unwrap());
        let sl = annotate_nsid(&n, 1, 100_000).unwrap();
        let fragment = check_sl_fragment(&sl).iter().all(|&(_, p, c, e)| p && c && e);
        let r = check_gaifman_correspondence(&n, &sl, pred, 3, 4).unwrap();
        ok &= fragment && r.cl_models > 0 && r.sl_models > 0 && r.unsound == 0 && r.incomplete == 0 && r.invalid_canonical == 0;
        lines.push(format!(
            "{name}: {} CL / {} SL models, unsound {}, incomplete {}, invalid {}",
            r.cl_models, r.sl_models, r.unsound, r.incomplete, r.invalid_canonical
        ));
    }
    let took = start.elapsed();
    outcome(
        ok && took < Duration::from_secs(120),
        format!("{}; {:.2}s", lines.join("; "), took.as_secs_f64()),
    )
}

#[test]
fn acceptance() {
    let suite = suite();
    let results = [
        ("worst-case fixpoint count", criterion_1()),
        ("sat agrees with the oracle", criterion_2(&suite)),
        ("sat completeness", criterion_3(&suite)),
        ("tightness reductions", criterion_4(&suite)),
        ("boundedness and cut-off", criterion_5(&suite)),
        ("pure logic", criterion_6()),
        ("Gaifman roundtrip", criterion_7()),
        ("bounded entailment", criterion_8()),
        ("Gaifman soundness and completeness", criterion_9()),
    ];
    for (k, (name, o)) in results.iter().enumerate() {
        println!("criterion {}: {} {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<usize> = (0..results.len()).filter(|&k| !results[k].1.pass).map(|k| k + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
