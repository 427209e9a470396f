//! Benchmark sweeps over generated schemas, written as CSV.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::consequence::{
    existential_schema_consequence_within, simple_schema_consequence_within, Algorithm,
    ConsequenceOptions,
};
use crate::error::{Error, Result};
use crate::format::read_file;
use crate::generator::{generate, GeneratorConfig};

pub const SEED_ENV: &str = "SCHEMAFORGE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simple,
    Existential,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Simple => "simple",
            Mode::Existential => "existential",
        }
    }
}

/// A count that is either fixed or proportional to the schema size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Fixed(usize),
    Scaled { per_schema: f64 },
}

impl Count {
    fn at(self, schema_size: usize) -> usize {
        match self {
            Count::Fixed(n) => n,
            Count::Scaled { per_schema } => {
                ((per_schema * schema_size as f64).round() as usize).max(1)
            }
        }
    }
}

fn default_repetitions() -> usize {
    1
}

fn default_budget() -> f64 {
    600.0
}

fn default_algorithms() -> Vec<String> {
    vec!["score".into(), "critical".into()]
}

fn default_skip() -> bool {
    true
}

/// A sweep: every combination of `schema_sizes` and `existential_counts`
/// is one point, run once per algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: u64,
    pub mode: Mode,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Wall-clock budget of one run, in seconds.
    #[serde(default = "default_budget")]
    pub budget_secs: f64,
    /// Stop running an algorithm at larger points once it timed out.
    #[serde(default = "default_skip")]
    pub skip_after_timeout: bool,
    pub schema_sizes: Vec<usize>,
    pub existential_counts: Vec<usize>,
    pub pi_c: f64,
    pub p_count: Count,
    pub u_count: Count,
    pub l_count: Count,
    pub rule_count: usize,
    pub antecedent_len: usize,
}

impl BenchConfig {
    pub fn parse(src: &str, file: &Path) -> Result<Self> {
        toml::from_str(src).map_err(|e| {
            let line = e
                .span()
                .map(|s| src[..s.start].matches('\n').count() + 1)
                .unwrap_or(1);
            Error::parse(file, line, e.message().to_string())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_file(path)?, path)
    }

    /// The seed, or the value of `SCHEMAFORGE_SEED` when it is set.
    pub fn apply_seed_override(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("{SEED_ENV}={v} is not an unsigned integer"))
            })?;
        }
        Ok(())
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        self.algorithms
            .iter()
            .map(|a| a.parse().map_err(Error::InvalidConfig))
            .collect()
    }

    /// Generator configurations of each sweep point, in run order.
    pub fn points(&self) -> Vec<GeneratorConfig> {
        let mut out = Vec::new();
        for &existential_count in &self.existential_counts {
            for &schema_size in &self.schema_sizes {
                out.push(GeneratorConfig {
                    pi_c: self.pi_c,
                    p_count: self.p_count.at(schema_size),
                    u_count: self.u_count.at(schema_size),
                    l_count: self.l_count.at(schema_size),
                    schema_size,
                    rule_count: self.rule_count,
                    existential_count,
                    antecedent_len: self.antecedent_len,
                    seed: self.seed,
                });
            }
        }
        out
    }
}

/// One CSV row: a sweep point, an algorithm and the mean over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub seed: u64,
    pub schema_size: usize,
    pub p_count: usize,
    pub pi_c: f64,
    pub u_count: usize,
    pub l_count: usize,
    pub rule_count: usize,
    pub antecedent_len: usize,
    pub existential_count: usize,
    pub algo: String,
    pub mode: String,
    pub time_ms: f64,
    pub timed_out: bool,
    pub out_patterns: usize,
    pub violated_count: usize,
}

/// Result of a single measured run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunResult {
    pub elapsed: Duration,
    pub timed_out: bool,
    pub out_patterns: usize,
    pub violated_count: usize,
}

/// Generates the instance for `cfg` and times one consequence computation.
/// Running out of time or of critical-instance budget counts as a timeout.
pub fn run_once(
    cfg: &GeneratorConfig,
    algo: Algorithm,
    mode: Mode,
    budget: Duration,
) -> Result<RunResult> {
    let g = generate(cfg)?;
    let opts = ConsequenceOptions::with_algorithm(algo);
    let start = Instant::now();
    let deadline = Deadline::after(budget);
    let outcome = match mode {
        Mode::Simple => simple_schema_consequence_within(&g.schema, &g.rules, &opts, &deadline)
            .map(|o| (o.schema.graph().len(), 0)),
        Mode::Existential => {
            existential_schema_consequence_within(&g.schema, &g.rules, &opts, &deadline)
                .map(|(s, _, ex)| (s.graph().len(), ex.violated.len()))
        }
    };
    let elapsed = start.elapsed();
    match outcome {
        Ok((out_patterns, violated_count)) => Ok(RunResult {
            elapsed,
            timed_out: false,
            out_patterns,
            violated_count,
        }),
        Err(e) if e.is_budget() => Ok(RunResult {
            elapsed: elapsed.max(budget),
            timed_out: true,
            out_patterns: 0,
            violated_count: 0,
        }),
        Err(e) => Err(e),
    }
}

/// Runs the sweep. `progress` is called after each record. A timed out
/// record carries the budget as its time; its counts are zero.
pub fn run_benchmark(
    cfg: &BenchConfig,
    mut progress: impl FnMut(&BenchRecord),
) -> Result<Vec<BenchRecord>> {
    let algorithms = cfg.algorithms()?;
    if cfg.repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be positive".into()));
    }
    if cfg.budget_secs.is_nan() || cfg.budget_secs <= 0.0 {
        return Err(Error::InvalidConfig("budget_secs must be positive".into()));
    }
    let budget = Duration::from_secs_f64(cfg.budget_secs);
    let points = cfg.points();
    for p in &points {
        p.validate()?;
    }
    let mut out = Vec::new();
    for &algo in &algorithms {
        let mut stopped_at: Option<usize> = None;
        for point in &points {
            if cfg.skip_after_timeout && stopped_at == Some(point.existential_count) {
                continue;
            }
            let mut total = Duration::ZERO;
            let mut first = None;
            let mut timed_out = false;
            for rep in 0..cfg.repetitions {
                let run_cfg = GeneratorConfig {
                    seed: point.seed.wrapping_add(rep as u64),
                    ..point.clone()
                };
                let r = run_once(&run_cfg, algo, cfg.mode, budget)?;
                first.get_or_insert(r);
                if r.timed_out {
                    timed_out = true;
                    break;
                }
                total += r.elapsed;
            }
            let first = first.expect("at least one repetition");
            let time_ms = if timed_out {
                budget.as_secs_f64() * 1000.0
            } else {
                total.as_secs_f64() * 1000.0 / cfg.repetitions as f64
            };
            let record = BenchRecord {
                seed: point.seed,
                schema_size: point.schema_size,
                p_count: point.p_count,
                pi_c: point.pi_c,
                u_count: point.u_count,
                l_count: point.l_count,
                rule_count: point.rule_count,
                antecedent_len: point.antecedent_len,
                existential_count: point.existential_count,
                algo: algo.to_string(),
                mode: cfg.mode.name().to_string(),
                time_ms,
                timed_out,
                out_patterns: if timed_out { 0 } else { first.out_patterns },
                violated_count: if timed_out { 0 } else { first.violated_count },
            };
            progress(&record);
            if timed_out {
                stopped_at = Some(point.existential_count);
            }
            out.push(record);
        }
    }
    Ok(out)
}

/// CSV with a header line, also when `records` is empty.
pub fn write_csv(records: &[BenchRecord], out: impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        context: "cannot write CSV".into(),
        source: e.into(),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record([
        "seed",
        "schema_size",
        "p_count",
        "pi_c",
        "u_count",
        "l_count",
        "rule_count",
        "antecedent_len",
        "existential_count",
        "algo",
        "mode",
        "time_ms",
        "timed_out",
        "out_patterns",
        "violated_count",
    ])
    .map_err(io)?;
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        context: "cannot write CSV".into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
seed = 5
mode = "simple"
repetitions = 2
budget_secs = 30
schema_sizes = [4, 6]
existential_counts = [0]
pi_c = 0.1
p_count = { per_schema = 1.5 }
u_count = { per_schema = 1.0 }
l_count = 6
rule_count = 2
antecedent_len = 2
"#;

    fn config() -> BenchConfig {
        BenchConfig::parse(CONFIG, Path::new("bench.toml")).unwrap()
    }

    #[test]
    fn points_scale_with_schema_size() {
        let pts = config().points();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].p_count, pts[0].u_count, pts[0].l_count), (6, 4, 6));
        assert_eq!((pts[1].p_count, pts[1].u_count), (9, 6));
    }

    #[test]
    fn records_are_reproducible_except_timings() {
        let strip = |rs: Vec<BenchRecord>| {
            rs.into_iter()
                .map(|r| BenchRecord { time_ms: 0.0, ..r })
                .collect::<Vec<_>>()
        };
        let a = strip(run_benchmark(&config(), |_| {}).unwrap());
        let b = strip(run_benchmark(&config(), |_| {}).unwrap());
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);
        assert!(a.iter().all(|r| !r.timed_out && r.out_patterns > 0));
    }

    #[test]
    fn empty_sweep_writes_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "seed,schema_size,p_count,pi_c,u_count,l_count,rule_count,antecedent_len,existential_count,algo,mode,time_ms,timed_out,out_patterns,violated_count\n"
        );
        let mut c = config();
        c.schema_sizes.clear();
        assert!(run_benchmark(&c, |_| {}).unwrap().is_empty());
    }

    #[test]
    fn config_errors_have_lines() {
        let e = BenchConfig::parse("seed = 1\nmode = \"fast\"\n", Path::new("b.toml")).unwrap_err();
        assert!(e.to_string().starts_with("b.toml:2:"), "{e}");
        let mut c = config();
        c.algorithms = vec!["quick".into()];
        assert!(matches!(
            run_benchmark(&c, |_| {}),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn tiny_budget_is_recorded_as_timeout() {
        let cfg = GeneratorConfig {
            pi_c: 0.1,
            p_count: 90,
            u_count: 60,
            l_count: 60,
            schema_size: 60,
            rule_count: 4,
            existential_count: 0,
            antecedent_len: 2,
            seed: 1,
        };
        let r = run_once(
            &cfg,
            Algorithm::Critical,
            Mode::Simple,
            Duration::from_nanos(1),
        )
        .unwrap();
        assert!(r.timed_out);
        assert!(r.elapsed >= Duration::from_nanos(1));
    }
}
