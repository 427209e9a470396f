//! Every shipped fixture parses and survives a write/read cycle.

mod common;

use std::path::Path;

use common::fixture;
use schemaforge::bench::{BenchConfig, Mode};
use schemaforge::format::{
    parse_rules, parse_schema, parse_turtle, read_rules, read_schema, read_turtle, write_rules,
    write_schema, write_turtle,
};
use schemaforge::shacl::shacl_to_schema;

#[test]
fn turtle_fixtures_round_trip() {
    for name in ["mine_graph.ttl", "mine_shapes.ttl"] {
        let doc = read_turtle(&fixture(name)).unwrap();
        assert!(!doc.graph.is_empty(), "{name}");
        let again = parse_turtle(&write_turtle(&doc), Path::new(name)).unwrap();
        assert_eq!(again.graph, doc.graph, "{name}");
    }
}

#[test]
fn schema_fixture_round_trips() {
    let s = read_schema(&fixture("mine.schema")).unwrap();
    s.validate().unwrap();
    let again = parse_schema(&write_schema(&s), Path::new("mine.schema")).unwrap();
    assert_eq!(again, s);
    let from_shapes =
        shacl_to_schema(&read_turtle(&fixture("mine_shapes.ttl")).unwrap().graph).unwrap();
    assert_eq!(from_shapes.existentials().len(), s.existentials().len());
}

#[test]
fn rules_fixture_round_trips() {
    let rules = read_rules(&fixture("mine.rules")).unwrap();
    assert_eq!(
        rules.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(),
        ["r1", "r2", "r3"]
    );
    let again = parse_rules(&write_rules(&rules), Path::new("mine.rules")).unwrap();
    assert_eq!(again, rules);
}

#[test]
fn bench_configs_parse() {
    let a = BenchConfig::read(&fixture("sweep_schema_size.toml")).unwrap();
    assert_eq!(a.mode, Mode::Simple);
    assert_eq!(a.schema_sizes, (1..=10).map(|i| i * 10).collect::<Vec<_>>());
    assert_eq!(a.points().len(), 10);

    let b = BenchConfig::read(&fixture("sweep_existentials.toml")).unwrap();
    assert_eq!(b.mode, Mode::Existential);
    assert_eq!(
        b.existential_counts,
        (0..=10).map(|i| i * 10).collect::<Vec<_>>()
    );
    assert_eq!(b.rule_count, 20);
}
