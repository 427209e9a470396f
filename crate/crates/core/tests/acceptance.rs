//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit when any
//! criterion fails. Built without the libtest harness so every criterion
//! runs and prints, whatever the others do.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemaforge::bench::{run_benchmark, BenchConfig, BenchRecord};
use schemaforge::budget::Deadline;
use schemaforge::cli;
use schemaforge::consequence::{
    basic_consequence, existential_schema_consequence_within, Algorithm, ConsequenceOptions,
    ViolationWitness,
};
use schemaforge::engine::{chase_existentials, closure, naive_closure, InferenceRule};
use schemaforge::eval::evaluate_bgp;
use schemaforge::format::{parse_schema, read_rules, read_schema, read_turtle};
use schemaforge::generator::{generate, weakly_acyclic, GeneratorConfig};
use schemaforge::rdf::{pattern, triple, Graph, GraphPattern};
use schemaforge::schema::{
    is_instance, schema_equivalent, violations, ExistentialRule, TriplestoreSchema,
};
use schemaforge::shacl::{schema_to_shacl, shacl_to_schema};

const DESK_BUDGET: Duration = Duration::from_secs(60);

/// A violated existential rule with the schema and rules it was found for.
struct Witnessed {
    source: String,
    schema: TriplestoreSchema,
    rules: Vec<InferenceRule>,
    witness: ViolationWitness,
}

#[derive(Default)]
struct Shared {
    witnesses: Vec<Witnessed>,
}

type Verdict = Result<String, String>;
type Criterion = (u8, &'static str, fn(&mut Shared) -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

const MINE_CONSEQUENCE: &str = "
@prefix sn: <http://www.w3.org/ns/ssn/> .
@prefix : <http://example.org/mine#> .
GRAPH {
  ?a :carriedBy ?b .
  ?c sn:hasFeatureOfInterest ?d .
  ?e sn:hasResult ?f .
  ?g sn:observedProperty :COLevel .
  ?h sn:observedProperty :TagID .
  ?i :isLocatedIn ?j .
  ?k :isTrespassingIn ?l .
  ?m rdf:type :OffLimitArea .
  ?n rdf:type :PersonnelTag .
  ?o rdf:type sn:Observation .
}
NOLIT { ?d ?j ?l }
";

fn running_example(shared: &mut Shared) -> Verdict {
    let start = Instant::now();
    let expected_graph = ok(read_schema(&fixture("mine.schema")), "schema fixture")?;
    let shapes = ok(read_turtle(&fixture("mine_shapes.ttl")), "shapes fixture")?;
    let s = ok(shacl_to_schema(&shapes.graph), "shape translation")?;
    ensure(s.graph().len() == 7, || {
        format!("{} patterns read from shapes", s.graph().len())
    })?;
    ensure(schema_equivalent(&s, &expected_graph), || {
        "shapes differ from the schema fixture".into()
    })?;
    let e1 = ok(
        ExistentialRule::new(
            pattern("?v1", "rdf:type", ":PersonnelTag"),
            pattern("?v1", ":carriedBy", "?v2"),
        ),
        "e1",
    )?;
    let ex: BTreeSet<_> = s.existentials().iter().map(|e| e.canonical()).collect();
    ensure(ex == BTreeSet::from([e1.canonical()]), || {
        format!("existentials {ex:?}")
    })?;

    let rules = ok(read_rules(&fixture("mine.rules")), "rules fixture")?;
    let i1 = ok(read_turtle(&fixture("mine_graph.ttl")), "graph fixture")?.graph;
    ensure(is_instance(&i1, &s), || "instance fixture rejected".into())?;
    let inferred = closure(&i1, &rules).difference(&i1);
    let five: Graph = [
        (":WID2", "rdf:type", ":PersonnelTag"),
        (":WID2", ":isLocatedIn", ":room2"),
        (":WID1", ":isLocatedIn", ":room1"),
        (":room2", "rdf:type", ":OffLimitArea"),
        (":WID2", ":isTrespassingIn", ":room2"),
    ]
    .iter()
    .map(|(a, b, c)| triple(a, b, c))
    .collect();
    ensure(inferred == five, || {
        format!("closure inferred {inferred:?}")
    })?;

    let mut out = Vec::new();
    let mut err = Vec::new();
    let shapes_path = fixture("mine_shapes.ttl");
    let rules_path = fixture("mine.rules");
    let code = cli::run(
        [
            "schemaforge",
            "consequence",
            "--existential",
            "-s",
            shapes_path.to_str().unwrap(),
            "-r",
            rules_path.to_str().unwrap(),
        ],
        &mut out,
        &mut err,
    );
    let out = String::from_utf8_lossy(&out).into_owned();
    ensure(code == 0, || {
        format!("exit {code}: {}", String::from_utf8_lossy(&err))
    })?;
    ensure(out.contains(&format!("# violated: {e1}")), || {
        format!("no violation reported:\n{out}")
    })?;
    let got = ok(
        parse_schema(&out, Path::new("stdout")),
        "consequence output",
    )?;
    let golden = ok(
        parse_schema(MINE_CONSEQUENCE, Path::new("golden")),
        "golden",
    )?;
    ensure(got.existentials().is_empty(), || {
        "existentials retained".into()
    })?;
    ensure(schema_equivalent(&got, &golden), || {
        format!("consequence differs from golden:\n{out}")
    })?;

    let (_, _, outcome) = ok(
        existential_schema_consequence_within(
            &s,
            &rules,
            &ConsequenceOptions::default(),
            &Deadline::none(),
        ),
        "consequence",
    )?;
    for w in outcome.violated {
        shared.witnesses.push(Witnessed {
            source: "mine".into(),
            schema: s.clone(),
            rules: rules.clone(),
            witness: w,
        });
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "golden match in {:.0} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

fn score_matches_critical(_: &mut Shared) -> Verdict {
    let mut outputs = 0;
    let mut cases = 0;
    let mut seed = 0u64;
    for n_a in [1, 2, 3] {
        for pi_c in [0.0, 0.1, 0.5] {
            for k in 0..24usize {
                seed += 1;
                let cfg = GeneratorConfig {
                    pi_c,
                    p_count: 4 + k % 5,
                    u_count: 3 + k % 4,
                    l_count: 1 + k % 3,
                    schema_size: 1 + k % 12,
                    rule_count: 3,
                    existential_count: 0,
                    antecedent_len: n_a,
                    seed,
                };
                let g = ok(generate(&cfg), "generator")?;
                outputs += 1;
                for r in &g.rules {
                    let score = ok(
                        basic_consequence(
                            &g.schema,
                            r,
                            &ConsequenceOptions::with_algorithm(Algorithm::Score),
                        ),
                        "score",
                    )?;
                    let critical = ok(
                        basic_consequence(
                            &g.schema,
                            r,
                            &ConsequenceOptions::with_algorithm(Algorithm::Critical),
                        ),
                        "critical",
                    )?;
                    ensure(schema_equivalent(&score.schema, &critical.schema), || {
                        format!("seed {seed} rule {}: score and critical differ", r.name)
                    })?;
                    cases += 1;
                }
            }
        }
    }
    ensure(outputs >= 200, || {
        format!("only {outputs} generator outputs")
    })?;
    Ok(format!(
        "{outputs} generated schemas, {cases} rules, all equivalent"
    ))
}

fn one_rule_inclusions(_: &mut Shared) -> Verdict {
    let mut cases = 0;
    let mut instances = 0;
    let mut cross_checked = 0;
    for seed in 0..120u64 {
        let cfg = GeneratorConfig {
            pi_c: [0.0, 0.1, 0.5][(seed % 3) as usize],
            p_count: 2 + (seed % 2) as usize,
            u_count: 1 + (seed % 2) as usize,
            l_count: 1,
            schema_size: 1 + (seed % 4) as usize,
            rule_count: 1,
            existential_count: 0,
            antecedent_len: 1 + (seed % 3) as usize,
            seed: 1000 + seed,
        };
        let g = ok(generate(&cfg), "generator")?;
        let r = &g.rules[0];
        let out = ok(
            basic_consequence(&g.schema, r, &ConsequenceOptions::default()),
            "score",
        )?;
        let report = check_one_rule_consequence(&g.schema, r, &out.schema);
        ensure(report.unsound.is_empty(), || {
            format!(
                "seed {seed}: inferred triples outside the consequence: {:?}",
                report.unsound
            )
        })?;
        ensure(report.unrealized.is_empty(), || {
            format!(
                "seed {seed}: patterns never realized: {:?}",
                report.unrealized
            )
        })?;
        // listing the small instances themselves gives the same inferences
        if let Some(direct) = inferred_by_subsets(&g.schema, r, 3, 40) {
            ensure(direct == report.realized, || {
                format!("seed {seed}: instance listing disagrees")
            })?;
            cross_checked += 1;
        }
        cases += 1;
        instances += report.instances;
    }
    ensure(cases >= 100, || format!("only {cases} cases"))?;
    ensure(cross_checked >= 10, || {
        format!("only {cross_checked} cases listed instance by instance")
    })?;
    Ok(format!(
        "{cases} (S, r) pairs, {instances} matched instances, {cross_checked} also by listing every instance of at most 3 triples"
    ))
}

fn sweep(algorithm: &str, max_size: usize) -> Result<Vec<BenchRecord>, String> {
    let mut cfg = ok(
        BenchConfig::read(&fixture("sweep_schema_size.toml")),
        "sweep config",
    )?;
    cfg.algorithms = vec![algorithm.into()];
    cfg.schema_sizes.retain(|&n| n <= max_size);
    cfg.budget_secs = DESK_BUDGET.as_secs_f64();
    ok(run_benchmark(&cfg, |_| {}), "benchmark")
}

fn schema_size_trend(_: &mut Shared) -> Verdict {
    let score = sweep("score", 100)?;
    let critical = sweep("critical", 60)?;
    let at = |rs: &[BenchRecord], n: usize| rs.iter().find(|r| r.schema_size == n).cloned();
    let fmt = |rs: &[BenchRecord]| {
        rs.iter()
            .map(|r| {
                if r.timed_out {
                    format!("{}:timeout", r.schema_size)
                } else {
                    format!("{}:{:.0}ms", r.schema_size, r.time_ms)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let detail = format!("score [{}] critical [{}]", fmt(&score), fmt(&critical));

    let mut failures = Vec::new();
    match at(&score, 100) {
        Some(r) if !r.timed_out && r.time_ms < DESK_BUDGET.as_secs_f64() * 1e3 => {}
        _ => failures.push("score did not finish |S^G|=100 within 60 s".to_string()),
    }
    match (at(&score, 30), at(&critical, 30)) {
        (Some(s), Some(c)) if c.timed_out || s.time_ms * 10.0 <= c.time_ms => {}
        (Some(s), Some(c)) => failures.push(format!(
            "at |S^G|=30 score takes {:.1} ms against critical {:.1} ms",
            s.time_ms, c.time_ms
        )),
        _ => failures.push("no |S^G|=30 measurements".into()),
    }
    if !critical.iter().any(|r| r.timed_out && r.schema_size <= 60) {
        failures.push("critical never exceeded the 60 s budget up to |S^G|=60".into());
    }
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn existential_scaling(shared: &mut Shared) -> Verdict {
    let cfg = ok(
        BenchConfig::read(&fixture("sweep_existentials.toml")),
        "sweep config",
    )?;
    let point = cfg
        .points()
        .into_iter()
        .find(|p| p.existential_count == 50 && p.schema_size == 100)
        .ok_or("no |S^E|=50 point in the sweep config")?;
    ensure(
        point.p_count == 110 && point.rule_count == 20 && point.antecedent_len == 2,
        || "sweep config parameters changed".into(),
    )?;
    let mut times = Vec::new();
    let mut violated = Vec::new();
    for rep in 0..cfg.repetitions as u64 {
        let run = GeneratorConfig {
            seed: point.seed + rep,
            ..point.clone()
        };
        let g = ok(generate(&run), "generator")?;
        ensure(g.schema.existentials().len() == 50, || {
            format!(
                "generated {} existential rules",
                g.schema.existentials().len()
            )
        })?;
        let start = Instant::now();
        let (_, _, outcome) = ok(
            existential_schema_consequence_within(
                &g.schema,
                &g.rules,
                &ConsequenceOptions::default(),
                &Deadline::after(DESK_BUDGET),
            ),
            "existential consequence",
        )?;
        times.push(start.elapsed());
        violated.push(outcome.violated.len());
        for w in outcome.violated {
            shared.witnesses.push(Witnessed {
                source: format!("seed {}", run.seed),
                schema: g.schema.clone(),
                rules: g.rules.clone(),
                witness: w,
            });
        }
    }
    let worst = times.iter().max().copied().unwrap_or_default();
    ensure(worst < DESK_BUDGET, || {
        format!("slowest run took {worst:?}")
    })?;
    Ok(format!(
        "{} runs, slowest {:.0} ms, violated per run {:?}",
        times.len(),
        worst.as_secs_f64() * 1e3,
        violated
    ))
}

fn witnesses_are_sound(shared: &mut Shared) -> Verdict {
    ensure(!shared.witnesses.is_empty(), || {
        "no witnesses were collected".into()
    })?;
    for w in &shared.witnesses {
        let i = &w.witness.instance;
        let e = &w.witness.rule;
        let fail = |what: &str| format!("{} {e}: {what}", w.source);
        ensure(is_instance(i, &w.schema), || {
            fail("witness is not an instance")
        })?;
        ensure(i.iter().all(|t| oracle_admits(&w.schema, t)), || {
            fail("oracle rejects a witness triple")
        })?;
        ensure(
            w.schema
                .existentials()
                .iter()
                .all(|x| oracle_satisfied(x, i)),
            || fail("witness violates an existential rule of the schema"),
        )?;
        ensure(violations([e], i).is_empty(), || {
            fail("already violated before closure")
        })?;
        let closed = closure(i, &w.rules);
        ensure(closed == oracle_closure(i, &w.rules), || {
            fail("closure disagrees with the oracle")
        })?;
        ensure(!violations([e], &closed).is_empty(), || {
            fail("closure does not violate it")
        })?;
        ensure(!oracle_satisfied(e, &closed), || {
            fail("oracle finds it satisfied after closure")
        })?;
    }
    let sources: BTreeSet<&str> = shared.witnesses.iter().map(|w| w.source.as_str()).collect();
    Ok(format!(
        "{} witnesses from {} runs, all sound",
        shared.witnesses.len(),
        sources.len()
    ))
}

fn hand_written_schemas() -> Result<Vec<TriplestoreSchema>, String> {
    let mut out = vec![ok(read_schema(&fixture("mine.schema")), "schema fixture")?];
    let texts = [
        "GRAPH { ?a :p ?b . }",
        "GRAPH { ?a :p ?b . ?c :q \"1\" . ?d :r :k . }\nNOLIT { ?a ?c ?d }",
        "GRAPH { :x :p ?b . ?c :p :y . }\nNOLIT { ?b }",
        "GRAPH { :x :p :y . :x :q \"lit\" . }",
        "GRAPH { ?a rdf:type :C . ?b rdf:type :D . ?a2 :p ?o . }\nNOLIT { ?o }",
        "GRAPH { ?a :p ?b . ?c :q ?d . }\nNOLIT { ?b }\nEXISTS { ?a :p ?b => ?a :q ?d ; }",
        "GRAPH { ?a :p ?b . ?c :q ?d . }\nNOLIT { ?b ?d }\nEXISTS { ?x :q ?y => ?y :p ?z ; ?x :p ?y => ?x :q ?z ; }",
        "GRAPH { ?a rdf:type :C . ?b :p ?c . }\nNOLIT { ?c }\nEXISTS { ?x rdf:type :C => ?x :p ?y ; }",
        "GRAPH { }",
    ];
    for t in texts {
        let src = format!("@prefix : <http://example.org/> .\n{t}\n");
        out.push(ok(parse_schema(&src, Path::new("inline")), t)?);
    }
    Ok(out)
}

fn shacl_round_trip(_: &mut Shared) -> Verdict {
    let mut corpus = hand_written_schemas()?;
    let hand = corpus.len();
    for seed in 0..40u64 {
        let cfg = GeneratorConfig {
            pi_c: [0.0, 0.1, 0.5, 0.9][(seed % 4) as usize],
            p_count: 3 + (seed % 6) as usize,
            u_count: 3,
            l_count: 2,
            schema_size: 1 + (seed % 15) as usize,
            rule_count: 3,
            existential_count: (seed % 4) as usize,
            antecedent_len: 2,
            seed: 5000 + seed,
        };
        corpus.push(ok(generate(&cfg), "generator")?.schema);
    }
    for (k, s) in corpus.iter().enumerate() {
        ensure(s.graph().iter().all(|p| !p.p.is_var()), || {
            format!("schema {k} has a variable predicate")
        })?;
        let shapes = ok(schema_to_shacl(s), "to shapes")?;
        let back = ok(shacl_to_schema(&shapes), "from shapes")?;
        ensure(schema_equivalent(&back, s), || {
            format!("schema {k} changed in the round trip")
        })?;
        let before: BTreeSet<_> = s.existentials().iter().map(|e| e.canonical()).collect();
        let after: BTreeSet<_> = back.existentials().iter().map(|e| e.canonical()).collect();
        ensure(before == after, || {
            format!("schema {k}: existential rules changed")
        })?;
    }
    ensure(corpus.len() >= 30, || format!("corpus of {}", corpus.len()))?;
    Ok(format!(
        "{} schemas ({hand} hand-written) round trip",
        corpus.len()
    ))
}

fn iri_graph(rng: &mut ChaCha8Rng, max: usize) -> Graph {
    random_graph(rng, max)
        .iter()
        .filter(|t| t.o().is_iri())
        .cloned()
        .collect()
}

fn engine_properties(_: &mut Shared) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..100 {
        let g = random_graph(&mut rng, 6);
        let rules = random_rules(&mut rng, 4);
        let c = closure(&g, &rules);
        ensure(closure(&c, &rules) == c, || {
            format!("case {case}: closure not idempotent")
        })?;
        ensure(naive_closure(&g, &rules) == c, || {
            format!("case {case}: naive and semi-naive differ")
        })?;
        ensure(oracle_closure(&g, &rules) == c, || {
            format!("case {case}: oracle closure differs")
        })?;
    }
    let mut chased = 0;
    for case in 0..200 {
        let g = iri_graph(&mut rng, 6);
        let n = rng.gen_range(1..=3);
        let e: Vec<ExistentialRule> = (0..n).map(|_| random_existential(&mut rng)).collect();
        if !weakly_acyclic(&e) {
            continue;
        }
        let out = ok(chase_existentials(&g, &e), "chase")?;
        ensure(g.is_subset(&out), || {
            format!("chase case {case} lost triples")
        })?;
        ensure(e.iter().all(|x| oracle_satisfied(x, &out)), || {
            format!("chase case {case}: fixpoint leaves a rule violated")
        })?;
        chased += 1;
    }
    ensure(chased >= 100, || {
        format!("only {chased} weakly acyclic chase cases")
    })?;
    let mut bgps = 0;
    for case in 0..500 {
        let g = random_graph(&mut rng, 6);
        let n = rng.gen_range(1..=3);
        let p: GraphPattern = (0..n)
            .map(|_| random_pattern(&mut rng, 3, case % 2 == 0))
            .collect();
        let got: BTreeSet<Assignment> = evaluate_bgp(&p, &g)
            .into_iter()
            .map(|m| m.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .collect();
        ensure(got == oracle_bgp(&p, &g), || {
            format!("bgp case {case}: evaluation differs from enumeration")
        })?;
        bgps += 1;
    }
    Ok(format!(
        "100 closures, {chased} chases, {bgps} pattern evaluations"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "running example end to end", running_example),
        (
            2,
            "score equals critical on generated schemas",
            score_matches_critical,
        ),
        (
            3,
            "one-rule consequence against instance enumeration",
            one_rule_inclusions,
        ),
        (4, "schema-size sweep trend", schema_size_trend),
        (5, "existential rules at scale", existential_scaling),
        (6, "violation witnesses are sound", witnesses_are_sound),
        (7, "SHACL round trip", shacl_round_trip),
        (8, "engine properties", engine_properties),
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for (n, name, check) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(|| check(&mut shared))).unwrap_or_else(|p| {
            Err(format!(
                "panicked: {:?}",
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            ))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {n}: PASS {name} ({secs:.1} s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL {name} ({secs:.1} s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
