mod common;

use std::fs;
use std::path::Path;

use common::fixture;
use schemaforge::cli::{
    run, EXIT_BUDGET, EXIT_INVALID, EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_USAGE,
};
use schemaforge::format::{parse_schema, read_schema, read_turtle};
use schemaforge::rdf::triple;
use schemaforge::schema::schema_equivalent;
use tempfile::TempDir;

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("schemaforge").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn f(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_the_instance() {
    let o = cli(&[
        "validate",
        "-s",
        &f("mine.schema"),
        "-g",
        &f("mine_graph.ttl"),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out.trim(), "valid");
    let o = cli(&[
        "validate",
        "-s",
        &f("mine_shapes.ttl"),
        "-g",
        &f("mine_graph.ttl"),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
}

#[test]
fn validate_reports_stray_triples_and_violations() {
    let dir = TempDir::new().unwrap();
    let g = write(
        &dir,
        "bad.ttl",
        "@prefix : <http://example.org/mine#> .\n\
         @prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
         :t rdf:type :PersonnelTag .\n:t :unknown :x .\n",
    );
    let o = cli(&["validate", "-s", &f("mine.schema"), "-g", &g]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.out.starts_with("invalid"));
    assert!(o.out.contains("# no pattern admits"), "{}", o.out);
    assert!(o.out.contains("violated at"), "{}", o.out);
}

#[test]
fn closure_derives_trespassing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("closed.ttl");
    let o = cli(&[
        "closure",
        "-g",
        &f("mine_graph.ttl"),
        "-r",
        &f("mine.rules"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let closed = read_turtle(&out).unwrap().graph;
    assert!(closed.contains(&triple(":WID2", ":isTrespassingIn", ":room2")));
    assert_eq!(
        closed.len(),
        read_turtle(&fixture("mine_graph.ttl")).unwrap().graph.len() + 5
    );
}

#[test]
fn existential_consequence_names_the_violated_rule() {
    let o = cli(&[
        "consequence",
        "--existential",
        "-s",
        &f("mine.schema"),
        "-r",
        &f("mine.rules"),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(
        o.out.contains("# applicable rules: r1, r2, r3"),
        "{}",
        o.out
    );
    assert!(o.out.contains("# violated: "), "{}", o.out);
    assert!(o.out.contains("(via r1)"));
    assert!(o.out.contains("#   witness instance:"));
    assert!(!o.out.contains("# retained:"));
    // the report is comments, so the output reads back as a schema
    let s = parse_schema(&o.out, Path::new("stdout")).unwrap();
    assert!(s.existentials().is_empty());
    assert_eq!(s.graph().len(), 10);
}

#[test]
fn simple_consequence_agrees_across_algorithms_and_inputs() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for (schema, algo) in [
        ("mine.schema", "score"),
        ("mine.schema", "critical"),
        ("mine_shapes.ttl", "score"),
    ] {
        let out = dir.path().join(format!("{algo}-{schema}.schema"));
        let o = cli(&[
            "consequence",
            "--simple",
            "--algo",
            algo,
            "-s",
            &f(schema),
            "-r",
            &f("mine.rules"),
            "-o",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.code, EXIT_OK, "{}", o.err);
        outputs.push(read_schema(&out).unwrap());
    }
    assert!(schema_equivalent(&outputs[0], &outputs[1]));
    assert!(schema_equivalent(&outputs[0], &outputs[2]));
}

#[test]
fn applicable_lists_rule_names() {
    let o = cli(&[
        "applicable",
        "-s",
        &f("mine.schema"),
        "-r",
        &f("mine.rules"),
    ]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.out.lines().collect::<Vec<_>>(), ["r1", "r2", "r3"]);
}

#[test]
fn shacl_translation_round_trips() {
    let dir = TempDir::new().unwrap();
    let schema = dir.path().join("s.schema");
    let shapes = dir.path().join("s.ttl");
    let o = cli(&[
        "shacl2schema",
        &f("mine_shapes.ttl"),
        "-o",
        schema.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let o = cli(&[
        "schema2shacl",
        schema.to_str().unwrap(),
        "-o",
        shapes.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let back = cli(&["shacl2schema", shapes.to_str().unwrap()]);
    assert_eq!(back.code, EXIT_OK);
    let a = read_schema(&schema).unwrap();
    let b = parse_schema(&back.out, Path::new("stdout")).unwrap();
    assert!(schema_equivalent(&a, &b));
    assert!(schema_equivalent(
        &a,
        &read_schema(&fixture("mine.schema")).unwrap()
    ));
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&[]).code, EXIT_USAGE);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_USAGE);
    let both = cli(&[
        "consequence",
        "--simple",
        "--existential",
        "-s",
        "a",
        "-r",
        "b",
    ]);
    assert_eq!(both.code, EXIT_USAGE);
    let neither = cli(&["consequence", "-s", "a", "-r", "b"]);
    assert_eq!(neither.code, EXIT_USAGE);
    let algo = cli(&[
        "consequence",
        "--simple",
        "--algo",
        "magic",
        "-s",
        "a",
        "-r",
        "b",
    ]);
    assert_eq!(algo.code, EXIT_USAGE);
    let timeout = cli(&[
        "consequence",
        "--simple",
        "--timeout",
        "0",
        "-s",
        &f("mine.schema"),
        "-r",
        &f("mine.rules"),
    ]);
    assert_eq!(timeout.code, EXIT_USAGE, "{}", timeout.err);
    assert_eq!(cli(&["--help"]).code, EXIT_OK);
}

#[test]
fn parse_errors_carry_location() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.schema", "GRAPH {\n  ?x :p ?y .\n  ?x ?y\n}\n");
    let o = cli(&["validate", "-s", &bad, "-g", &f("mine_graph.ttl")]);
    assert_eq!(o.code, EXIT_PARSE);
    assert!(o.err.contains("bad.schema:4: expected a term"), "{}", o.err);

    let missing = dir.path().join("nope.schema");
    let o = cli(&[
        "validate",
        "-s",
        missing.to_str().unwrap(),
        "-g",
        &f("mine_graph.ttl"),
    ]);
    assert_eq!(o.code, EXIT_PARSE);

    let rules = write(
        &dir,
        "bad.rules",
        "CONSTRUCT { ?x :p ?z } WHERE { ?x :p ?y }\n",
    );
    let o = cli(&[
        "consequence",
        "--simple",
        "-s",
        &f("mine.schema"),
        "-r",
        &rules,
    ]);
    assert_eq!(o.code, EXIT_PARSE, "{}", o.err);
}

#[test]
fn unsupported_shacl_is_named() {
    let dir = TempDir::new().unwrap();
    let shapes = write(
        &dir,
        "shapes.ttl",
        "@prefix sh: <http://www.w3.org/ns/shacl#> .\n\
         @prefix : <http://example.org/> .\n\
         :s a sh:NodeShape ; sh:targetClass :C ; sh:property [ sh:path :p ; sh:maxCount 2 ] .\n",
    );
    let o = cli(&["shacl2schema", &shapes]);
    assert_eq!(o.code, EXIT_UNSUPPORTED);
    assert!(o.err.contains("maxCount"), "{}", o.err);
}

#[test]
fn budget_exhaustion() {
    let dir = TempDir::new().unwrap();
    // mutually recursive rules: rewriting cannot converge
    let rules = write(
        &dir,
        "loop.rules",
        "@prefix : <http://example.org/> .\n\
         CONSTRUCT { ?x :q ?z } WHERE { ?x :p ?y . ?y :p ?z }\n\
         CONSTRUCT { ?x :p ?z } WHERE { ?x :p ?y . ?y :q ?z }\n",
    );
    let schema = write(
        &dir,
        "loop.schema",
        "@prefix : <http://example.org/> .\n\
         GRAPH { ?a :p ?b . ?c :q ?d . }\n\
         NOLIT { ?b ?d }\n\
         EXISTS { ?a :q ?d => ?a :p ?b ; }\n",
    );
    let o = cli(&["consequence", "--existential", "-s", &schema, "-r", &rules]);
    assert_eq!(o.code, EXIT_BUDGET, "{} {}", o.out, o.err);
    assert!(o.err.contains("did not converge"), "{}", o.err);
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "bench.toml",
        "seed = 3\nmode = \"simple\"\nalgorithms = [\"score\", \"critical\"]\n\
         schema_sizes = [4, 6]\nexistential_counts = [0]\npi_c = 0.1\n\
         p_count = 4\nu_count = { per_schema = 1.0 }\nl_count = 2\n\
         rule_count = 2\nantecedent_len = 2\nbudget_secs = 60\n",
    );
    let csv = dir.path().join("out.csv");
    let o = cli(&["bench", "--config", &config, "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("seed,schema_size,"), "{}", lines[0]);
    assert_eq!(
        o.err.lines().filter(|l| l.starts_with("# simple")).count(),
        4
    );

    let bad = write(&dir, "bad.toml", "seed = 1\nmode = \"sideways\"\n");
    let o = cli(&["bench", "--config", &bad, "--csv", csv.to_str().unwrap()]);
    assert_ne!(o.code, EXIT_OK);
}
