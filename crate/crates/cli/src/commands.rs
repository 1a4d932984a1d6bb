use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use astarccg::certify::certify;
use astarccg::io::{
    load_engine_config, read_json_records, read_sentences, Diagnostic, IoError, JsonRecord,
};
use astarccg::oracle::DEFAULT_BOUND;
use astarccg::random::{random_instance, InstanceSpec};
use astarccg::{
    emit, extract_dependencies, load_score_file, validate, HeadScheme, OutputFormat, ParseConfig,
    ParseError, PruneConfig, ScoreTable, TagDictionary,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::{CheckArgs, ConvertArgs, EngineArgs, ParseArgs, StatsArgs};

/// Exit status when at least one sentence has no parse.
const EXIT_NO_PARSE: u8 = 2;
/// Exit status when the engine and the oracle disagree.
const EXIT_VIOLATION: u8 = 3;

fn check_pruning(beta: f64, max_tags: usize) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&beta) {
        return Err(CliError::Config(format!("beta {beta} outside [0, 1)")));
    }
    if max_tags == 0 {
        return Err(CliError::Config("max-tags must be at least 1".into()));
    }
    Ok(())
}

fn engine_config(args: &EngineArgs) -> Result<ParseConfig, CliError> {
    let mut cfg = ParseConfig::default();
    if let Some(path) = &args.config {
        cfg = load_engine_config(path, cfg)?;
    }
    if let Some(scheme) = args.scheme {
        cfg.scheme = scheme.into();
    }
    if let Some(nf) = args.nf {
        cfg.rules.normal_form = nf.into();
    }
    if let Some(beta) = args.beta {
        cfg.pruning.beta = beta;
    }
    if let Some(k) = args.max_tags {
        cfg.pruning.max_k = k;
    }
    check_pruning(cfg.pruning.beta, cfg.pruning.max_k)?;
    if args.no_dep {
        cfg.use_dep = false;
    }
    if let Some(path) = &args.tag_dict {
        let dict = TagDictionary::load(path).map_err(|source| CliError::Scores {
            path: path.clone(),
            source,
        })?;
        cfg.pruning.tag_dictionary = Some(Arc::new(dict));
    }
    cfg.corrupt_heuristic = args.corrupt_heuristic;
    Ok(cfg)
}

fn load_tables(path: &std::path::Path) -> Result<Vec<ScoreTable>, CliError> {
    let tables = load_score_file(path).map_err(|source| CliError::Scores {
        path: path.to_path_buf(),
        source,
    })?;
    if tables.is_empty() {
        return Err(IoError::EmptyInput.into());
    }
    Ok(tables)
}

fn failure_code(e: &ParseError) -> &'static str {
    match e {
        ParseError::NoParse => "noparse",
        ParseError::Budget(_) => "budget",
    }
}

pub fn parse(args: &ParseArgs) -> Result<ExitCode, CliError> {
    let mut cfg = engine_config(&args.engine)?;
    cfg.trace = args.trace;
    let mut tables = load_tables(&args.scores)?;
    if let Some(path) = &args.sentences {
        let sentences = read_sentences(path)?;
        if sentences.len() != tables.len() {
            return Err(CliError::Mismatch(format!(
                "{} sentences but {} score records",
                sentences.len(),
                tables.len()
            )));
        }
        tables = tables
            .into_iter()
            .zip(sentences)
            .enumerate()
            .map(|(i, (t, s))| {
                t.with_tokens(s)
                    .map_err(|e| CliError::Mismatch(format!("sentence {}: {e}", i + 1)))
            })
            .collect::<Result<_, _>>()?;
    }
    if args.jobs == 0 {
        return Err(CliError::Config("jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let results: Vec<_> = pool.install(|| {
        tables
            .par_iter()
            .enumerate()
            .map(|(i, table)| {
                let result = astarccg::parse(table, &cfg);
                if let Ok(p) = &result {
                    if cfg.trace {
                        let mut err = io::stderr().lock();
                        let _ = writeln!(err, "# sentence {}", i + 1);
                        for pop in &p.trace {
                            let _ = writeln!(err, "{pop}");
                        }
                    }
                }
                result
            })
            .collect()
    });

    let format: OutputFormat = args.format.into();
    let mut out = BufWriter::new(io::stdout().lock());
    let mut failures = 0;
    for (i, (table, result)) in tables.iter().zip(&results).enumerate() {
        match result {
            Ok(p) => {
                let tree = extract_dependencies(&p.derivation, cfg.scheme);
                if format == OutputFormat::Json {
                    let record = JsonRecord {
                        scheme: Some(cfg.scheme),
                        score: Some(p.score),
                        ..JsonRecord::new(&p.derivation, &tree)
                    };
                    writeln!(out, "{}", record.to_line())?;
                } else {
                    out.write_all(emit(&p.derivation, &tree, format).as_bytes())?;
                }
            }
            Err(e) => {
                failures += 1;
                let code = failure_code(e);
                eprintln!("error:{code}: sentence {}: {e}", i + 1);
                match format {
                    OutputFormat::Json => {
                        let diag = Diagnostic {
                            tokens: table.tokens().to_vec(),
                            error: code.into(),
                        };
                        writeln!(out, "{}", diag.to_line())?;
                    }
                    OutputFormat::Conll => {
                        writeln!(out, "# error:{code}: {}\n", table.tokens().join(" "))?
                    }
                    _ => writeln!(out, "# error:{code}: {}", table.tokens().join(" "))?,
                }
            }
        }
    }
    out.flush()?;
    Ok(if failures > 0 {
        ExitCode::from(EXIT_NO_PARSE)
    } else {
        ExitCode::SUCCESS
    })
}

pub fn check(args: &CheckArgs) -> Result<ExitCode, CliError> {
    check_pruning(args.beta, args.max_tags)?;
    let tables = match &args.scores {
        Some(path) => load_tables(path)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let spec = InstanceSpec::default();
            (0..args.n)
                .map(|_| random_instance(&mut rng, &spec))
                .collect()
        }
    };
    let base = ParseConfig {
        pruning: PruneConfig {
            beta: args.beta,
            max_k: args.max_tags,
            tag_dictionary: None,
        },
        corrupt_heuristic: args.corrupt_heuristic,
        ..ParseConfig::default()
    };
    let started = Instant::now();
    let report = certify(&tables, &base, DEFAULT_BOUND)?;
    let elapsed = started.elapsed();

    let mut out = io::stdout().lock();
    writeln!(out, "instances: {}", report.instances)?;
    writeln!(out, "runs: {}", report.runs)?;
    writeln!(out, "no_parse: {}", report.no_parse)?;
    writeln!(out, "max_gap: {:e}", report.max_gap)?;
    writeln!(out, "elapsed: {:.3}s", elapsed.as_secs_f64())?;
    if report.passed() {
        writeln!(out, "result: ok")?;
        return Ok(ExitCode::SUCCESS);
    }
    for v in &report.violations {
        let show = |r: Result<f64, String>| match r {
            Ok(s) => s.to_string(),
            Err(e) => e,
        };
        writeln!(
            out,
            "violation: instance={} {} astar={} oracle={} gap={:e}",
            v.instance,
            v.variant,
            show(v.astar.clone().map_err(|e| e.to_string())),
            show(v.oracle.clone().map_err(|e| e.to_string())),
            v.gap()
        )?;
    }
    writeln!(
        out,
        "record: {}",
        report.violations[0].table.to_record_line()
    )?;
    writeln!(out, "result: fail")?;
    Ok(ExitCode::from(EXIT_VIOLATION))
}

pub fn convert(args: &ConvertArgs) -> Result<ExitCode, CliError> {
    let scheme: HeadScheme = args.scheme.into();
    let format: OutputFormat = args.format.into();
    let (records, _) = read_json_records(&args.deriv)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for (i, record) in records.iter().enumerate() {
        let d = record.derivation.reheaded(scheme);
        if d.words() != record.tokens {
            return Err(CliError::Mismatch(format!(
                "record {}: tokens differ from the derivation leaves",
                i + 1
            )));
        }
        let tree = extract_dependencies(&d, scheme);
        if format == OutputFormat::Json {
            let record = JsonRecord {
                scheme: Some(scheme),
                ..JsonRecord::new(&d, &tree)
            };
            writeln!(out, "{}", record.to_line())?;
        } else {
            out.write_all(emit(&d, &tree, format).as_bytes())?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn stats(args: &StatsArgs) -> Result<ExitCode, CliError> {
    let (records, failed) = read_json_records(&args.deriv)?;
    let mut nf_violations = 0;
    let (mut rightward, mut arcs) = (0, 0);
    for (i, record) in records.iter().enumerate() {
        let tree = record.tree();
        if tree.len() != record.tokens.len() {
            return Err(CliError::Mismatch(format!(
                "record {}: {} heads for {} tokens",
                i + 1,
                tree.len(),
                record.tokens.len()
            )));
        }
        validate(&tree).map_err(|e| CliError::Mismatch(format!("record {}: {e}", i + 1)))?;
        nf_violations += record.derivation.nf_violations();
        let (r, t) = tree.direction_counts();
        rightward += r;
        arcs += t;
    }
    let fraction = if arcs == 0 {
        0.0
    } else {
        rightward as f64 / arcs as f64
    };
    let mut out = io::stdout().lock();
    writeln!(out, "parses: {}", records.len())?;
    writeln!(out, "failed: {failed}")?;
    writeln!(out, "nf_violations: {nf_violations}")?;
    writeln!(out, "rightward_arcs: {rightward}")?;
    writeln!(out, "arcs: {arcs}")?;
    writeln!(out, "rightward_fraction: {fraction:.6}")?;
    Ok(ExitCode::SUCCESS)
}
