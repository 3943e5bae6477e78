//! Command-line interface behind the `gsgp-red` binary.
//!
//! Commands: `run`, `bench`, `analyze-growth`, `verify-equivalence`,
//! `expected-size`. Options may come from an optional `key=value` config file
//! given as the first positional argument; explicit flags override file
//! entries. Exit codes: 0 success, 1 run failure, 2 configuration or usage
//! error, 3 dataset error.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::bench::{
    render_tables, run_suite, verify_equivalence, DatasetSpec, SuiteConfig,
};
use crate::data::{load_csv, Dataset, TargetColumn};
use crate::engine::gp::run_gp;
use crate::engine::gsgp::{reconstruct, run_gsgp};
use crate::engine::red::{run_gsgp_red, to_expression};
use crate::engine::{EngineKind, GpConfig, GsgpConfig, RunReport};
use crate::expr;
use crate::growth::{
    self, expected_size_gsm, expected_size_gsm_exact, expected_size_gsx_e,
    expected_size_gsx_e_exact, expected_size_gsx_e_log10, expected_size_gsx_m,
    expected_size_gsx_m_exact, expected_size_gsx_m_log10, GrowthParams,
};

const EXIT_OK: i32 = 0;
const EXIT_RUN_FAILURE: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_DATASET: i32 = 3;

const DEFAULT_NODE_BUDGET: usize = 10_000;
const EXPRESSION_PREVIEW_CHARS: usize = 2000;

const USAGE: &str = "usage: gsgp-red <command> [config-file] [--flags]

commands:
  run                 one evolutionary run; writes a JSON run report
  bench               cross-validated suite from a config file; writes JSON + text tables
  analyze-growth      gsgp-red run + initial-tree frequency histogram (JSON + CSV)
  verify-equivalence  paired gsgp / gsgp-red run under one seed
  expected-size       closed-form expected solution size (gsm | gsx-e | gsx-m)

common flags:
  --engine {gp|gsgp|gsgp-red}   --data PATH          --target-col N|last
  --pop N       --gens N        --tournament N       --p-xover F   --p-mut F
  --max-depth N --erc-lo F      --erc-hi F           --ms-fraction F
  --seed N      --out PATH      --folds N            --repeats N
  --workers N   --node-budget N --print-expr         --exact
";

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn dataset(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_DATASET,
            message: message.into(),
        }
    }

    fn run(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_RUN_FAILURE,
            message: message.into(),
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    match execute(args) {
        Ok(()) => EXIT_OK,
        Err(error) => {
            eprintln!("error: {}", error.message);
            if error.code == EXIT_CONFIG {
                eprintln!("{USAGE}");
            }
            error.code
        }
    }
}

fn execute(args: &[String]) -> Result<(), CliError> {
    let command = args
        .first()
        .ok_or_else(|| CliError::config("missing command"))?;
    let rest = &args[1..];
    match command.as_str() {
        "run" => cmd_run(rest),
        "bench" => cmd_bench(rest),
        "analyze-growth" => cmd_analyze_growth(rest),
        "verify-equivalence" => cmd_verify_equivalence(rest),
        "expected-size" => cmd_expected_size(rest),
        other => Err(CliError::config(format!("unknown command {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// flag parsing and config files

const RUN_FLAGS: &[&str] = &[
    "engine",
    "data",
    "target-col",
    "pop",
    "gens",
    "tournament",
    "p-xover",
    "p-mut",
    "max-depth",
    "erc-lo",
    "erc-hi",
    "ms-fraction",
    "seed",
    "out",
    "node-budget",
];
const RUN_SWITCHES: &[&str] = &["print-expr"];

const BENCH_FLAGS: &[&str] = &[
    "datasets",
    "engines",
    "folds",
    "repeats",
    "workers",
    "seed",
    "out",
    "target-col",
    "pop",
    "gens",
    "tournament",
    "p-xover",
    "p-mut",
    "max-depth",
    "erc-lo",
    "erc-hi",
    "ms-fraction",
    "gp-tournament",
    "gp-p-xover",
    "gp-p-mut",
    "gsgp-tournament",
    "gsgp-p-xover",
    "gsgp-p-mut",
];

const PAIRED_FLAGS: &[&str] = &[
    "data",
    "target-col",
    "pop",
    "gens",
    "tournament",
    "p-xover",
    "p-mut",
    "max-depth",
    "erc-lo",
    "erc-hi",
    "ms-fraction",
    "seed",
    "out",
];

const EXPECTED_SIZE_FLAGS: &[&str] = &["g", "ep0", "er", "a", "b", "c"];
const EXPECTED_SIZE_SWITCHES: &[&str] = &["exact"];

/// Option values merged from an optional config file and the command line;
/// flags always override file entries.
#[derive(Debug)]
struct Options {
    values: HashMap<String, String>,
}

impl Options {
    fn parse(
        args: &[String],
        flags: &[&str],
        switches: &[&str],
        positionals_allowed: usize,
    ) -> Result<(Options, Vec<String>), CliError> {
        let mut file_values: HashMap<String, String> = HashMap::new();
        let mut flag_values: HashMap<String, String> = HashMap::new();
        let mut positionals = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            if let Some(name) = arg.strip_prefix("--") {
                if switches.contains(&name) {
                    flag_values.insert(name.to_string(), "true".to_string());
                } else if flags.contains(&name) {
                    i += 1;
                    let value = args.get(i).ok_or_else(|| {
                        CliError::config(format!("flag --{name} expects a value"))
                    })?;
                    flag_values.insert(name.to_string(), value.clone());
                } else {
                    return Err(CliError::config(format!("unknown flag --{name}")));
                }
            } else {
                positionals.push(arg.clone());
                if positionals.len() > positionals_allowed {
                    return Err(CliError::config(format!(
                        "unexpected positional argument {arg:?}"
                    )));
                }
            }
            i += 1;
        }

        // first positional, when present, is a key=value config file
        if let Some(path) = positionals.first() {
            for (key, value) in read_config_file(path)? {
                if !flags.contains(&key.as_str()) && !switches.contains(&key.as_str()) {
                    return Err(CliError::config(format!(
                        "{path}: unknown key {key:?}"
                    )));
                }
                file_values.insert(key, value);
            }
        }

        // flags override the file
        file_values.extend(flag_values);
        Ok((
            Options {
                values: file_values,
            },
            positionals,
        ))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::config(format!("cannot parse {key} value {raw:?}"))
            }),
        }
    }

    fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn require_str(&self, key: &str) -> Result<&str, CliError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::config(format!("missing required option --{key}")))
    }

    fn switch(&self, key: &str) -> bool {
        matches!(self.values.get(key).map(String::as_str), Some("true") | Some("1"))
    }

    fn target_column(&self) -> Result<TargetColumn, CliError> {
        match self.values.get("target-col").map(String::as_str) {
            None | Some("last") => Ok(TargetColumn::Last),
            Some(raw) => raw
                .parse::<usize>()
                .map(TargetColumn::Index)
                .map_err(|_| CliError::config(format!("bad --target-col value {raw:?}"))),
        }
    }
}

fn read_config_file(path: &str) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config file {path}: {e}")))?;
    let mut entries = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!("{path}:{}: expected key=value", line_no + 1))
        })?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn load_dataset(options: &Options) -> Result<Dataset, CliError> {
    let path = options.require_str("data")?;
    let target = options.target_column()?;
    load_csv(path, target).map_err(|e| CliError::dataset(e.to_string()))
}

fn gsgp_config_from(options: &Options) -> Result<GsgpConfig, CliError> {
    let defaults = GsgpConfig::default();
    let config = GsgpConfig {
        pop_size: options.get_or("pop", defaults.pop_size)?,
        generations: options.get_or("gens", defaults.generations)?,
        tournament_size: options.get_or("tournament", defaults.tournament_size)?,
        p_crossover: options.get_or("p-xover", defaults.p_crossover)?,
        p_mutation: match options.get::<f64>("p-mut")? {
            Some(v) => v,
            None => match options.get::<f64>("p-xover")? {
                Some(px) => 1.0 - px,
                None => defaults.p_mutation,
            },
        },
        max_depth: options.get_or("max-depth", defaults.max_depth)?,
        erc_range: (
            options.get_or("erc-lo", defaults.erc_range.0)?,
            options.get_or("erc-hi", defaults.erc_range.1)?,
        ),
        ms_fraction: options.get_or("ms-fraction", defaults.ms_fraction)?,
        seed: options.get_or("seed", defaults.seed)?,
    };
    config
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(config)
}

fn gp_config_from(options: &Options) -> Result<GpConfig, CliError> {
    let defaults = GpConfig::default();
    let config = GpConfig {
        pop_size: options.get_or("pop", defaults.pop_size)?,
        generations: options.get_or("gens", defaults.generations)?,
        tournament_size: options.get_or("tournament", defaults.tournament_size)?,
        p_crossover: options.get_or("p-xover", defaults.p_crossover)?,
        p_mutation: match options.get::<f64>("p-mut")? {
            Some(v) => v,
            None => match options.get::<f64>("p-xover")? {
                Some(px) => 1.0 - px,
                None => defaults.p_mutation,
            },
        },
        max_depth: options.get_or("max-depth", defaults.max_depth)?,
        erc_range: (
            options.get_or("erc-lo", defaults.erc_range.0)?,
            options.get_or("erc-hi", defaults.erc_range.1)?,
        ),
        seed: options.get_or("seed", defaults.seed)?,
    };
    config
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(config)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::run(format!("cannot serialize report: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// run

fn cmd_run(args: &[String]) -> Result<(), CliError> {
    let (options, _) = Options::parse(args, RUN_FLAGS, RUN_SWITCHES, 1)?;
    let engine_name = options.require_str("engine")?;
    let engine = EngineKind::parse(engine_name)
        .ok_or_else(|| CliError::config(format!("unknown engine {engine_name:?}")))?;
    let dataset = load_dataset(&options)?;
    let out: PathBuf = options
        .get::<PathBuf>("out")?
        .unwrap_or_else(|| PathBuf::from("run_report.json"));
    let node_budget: usize = options.get_or("node-budget", DEFAULT_NODE_BUDGET)?;
    let want_expression = options.switch("print-expr");

    // a single run trains and evaluates on the full dataset; use `bench`
    // for the cross-validated protocol
    // --print-expr lifts the character cap applied to the default preview
    let char_cap = if want_expression {
        usize::MAX
    } else {
        EXPRESSION_PREVIEW_CHARS
    };

    let report = match engine {
        EngineKind::Gp => {
            let config = gp_config_from(&options)?;
            let run = run_gp(&config, &dataset, &dataset)
                .map_err(|e| CliError::run(e.to_string()))?;
            print_tree_expression(&run.population[run.best], char_cap);
            run.report
        }
        EngineKind::Gsgp => {
            let config = gsgp_config_from(&options)?;
            let run = run_gsgp(&config, &dataset, &dataset)
                .map_err(|e| CliError::run(e.to_string()))?;
            match reconstruct(&run.population[run.best], node_budget) {
                Ok(tree) => print_tree_expression(&tree, char_cap),
                Err(refusal) => println!("expression withheld: {refusal}"),
            }
            run.report
        }
        EngineKind::GsgpRed => {
            let config = gsgp_config_from(&options)?;
            let run = run_gsgp_red(&config, &dataset, &dataset)
                .map_err(|e| CliError::run(e.to_string()))?;
            let best = &run.population[run.best];
            let size = crate::engine::red::red_node_count(best);
            if size <= node_budget {
                print_tree_expression(&to_expression(best), char_cap);
            } else {
                println!(
                    "expression withheld: {size} nodes exceeds the node budget {node_budget}"
                );
            }
            run.report
        }
    };

    print_run_summary(&report);
    write_json(&out, &report)?;
    println!("report written to {}", out.display());
    Ok(())
}

fn print_run_summary(report: &RunReport) {
    println!(
        "{} on {}: seed {}, {} generations",
        report.engine,
        report.dataset,
        report.seed,
        report.generations.len().saturating_sub(1),
    );
    println!(
        "best train RMSE {:.6}, test RMSE {:.6}, size {} nodes{}, wall time {:.3}s",
        report.best.train_rmse,
        report.best.test_rmse,
        report.best.size,
        report
            .best
            .term_count
            .map(|s| format!(" ({s} terms)"))
            .unwrap_or_default(),
        report.wall_time_secs,
    );
}

fn print_tree_expression(tree: &std::sync::Arc<crate::expr::Expr>, char_cap: usize) {
    let prefix = expr::canonical_key(tree);
    let readable = expr::infix(tree);
    println!("prefix: {}", clip(&prefix, char_cap));
    println!("infix:  {}", clip(&readable, char_cap));
}

fn clip(text: &str, cap: usize) -> String {
    if text.len() <= cap {
        text.to_string()
    } else {
        format!("{}... (truncated, {} chars total)", &text[..cap], text.len())
    }
}

// ---------------------------------------------------------------------------
// bench

fn cmd_bench(args: &[String]) -> Result<(), CliError> {
    let (options, positionals) = Options::parse(args, BENCH_FLAGS, &[], 1)?;
    if positionals.is_empty() {
        return Err(CliError::config("bench expects a suite config file"));
    }

    let datasets_raw = options.require_str("datasets")?;
    let target = options.target_column()?;
    let datasets: Vec<DatasetSpec> = datasets_raw
        .split(',')
        .map(|p| DatasetSpec {
            path: PathBuf::from(p.trim()),
            target,
        })
        .collect();

    let engines: Vec<EngineKind> = match options.values.get("engines") {
        None => vec![EngineKind::Gp, EngineKind::Gsgp, EngineKind::GsgpRed],
        Some(raw) => raw
            .split(',')
            .map(|name| {
                EngineKind::parse(name.trim())
                    .ok_or_else(|| CliError::config(format!("unknown engine {name:?}")))
            })
            .collect::<Result<_, _>>()?,
    };

    let gp_defaults = GpConfig::default();
    let gsgp_defaults = GsgpConfig::default();
    let pop = options.get_or("pop", 1000usize)?;
    let gens = options.get_or("gens", 250usize)?;
    let max_depth = options.get_or("max-depth", 6usize)?;
    let erc_range = (
        options.get_or("erc-lo", -1.0f64)?,
        options.get_or("erc-hi", 1.0f64)?,
    );

    // shared operator flags apply to both engines; engine-prefixed keys win
    let shared_tournament: Option<usize> = options.get("tournament")?;
    let shared_p_xover: Option<f64> = options.get("p-xover")?;
    let shared_p_mut: Option<f64> = options.get("p-mut")?;
    let gp = GpConfig {
        pop_size: pop,
        generations: gens,
        tournament_size: options.get_or(
            "gp-tournament",
            shared_tournament.unwrap_or(gp_defaults.tournament_size),
        )?,
        p_crossover: options.get_or(
            "gp-p-xover",
            shared_p_xover.unwrap_or(gp_defaults.p_crossover),
        )?,
        p_mutation: options.get_or(
            "gp-p-mut",
            shared_p_mut.unwrap_or(gp_defaults.p_mutation),
        )?,
        max_depth,
        erc_range,
        seed: 0,
    };
    let gsgp = GsgpConfig {
        pop_size: pop,
        generations: gens,
        tournament_size: options.get_or(
            "gsgp-tournament",
            shared_tournament.unwrap_or(gsgp_defaults.tournament_size),
        )?,
        p_crossover: options.get_or(
            "gsgp-p-xover",
            shared_p_xover.unwrap_or(gsgp_defaults.p_crossover),
        )?,
        p_mutation: options.get_or(
            "gsgp-p-mut",
            shared_p_mut.unwrap_or(gsgp_defaults.p_mutation),
        )?,
        max_depth,
        erc_range,
        ms_fraction: options.get_or("ms-fraction", gsgp_defaults.ms_fraction)?,
        seed: 0,
    };

    let config = SuiteConfig {
        datasets,
        engines,
        folds: options.get_or("folds", 5usize)?,
        repeats_per_fold: options.get_or("repeats", 6usize)?,
        base_seed: options.get_or("seed", 0u64)?,
        gp,
        gsgp,
        workers: options.get_or("workers", 1usize)?,
    };
    config
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;

    let report = run_suite(&config).map_err(|e| CliError::run(e.to_string()))?;

    let out: PathBuf = options
        .get::<PathBuf>("out")?
        .unwrap_or_else(|| PathBuf::from("suite_report.json"));
    write_json(&out, &report)?;
    let tables = render_tables(&report);
    let text_path = out.with_extension("txt");
    std::fs::write(&text_path, &tables)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", text_path.display())))?;

    print!("{tables}");
    println!(
        "reports written to {} and {}",
        out.display(),
        text_path.display()
    );

    if report.aborted_datasets.is_empty() {
        Ok(())
    } else {
        Err(CliError::run(format!(
            "{} dataset(s) aborted",
            report.aborted_datasets.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// analyze-growth

fn cmd_analyze_growth(args: &[String]) -> Result<(), CliError> {
    let (options, _) = Options::parse(args, PAIRED_FLAGS, &[], 1)?;
    let dataset = load_dataset(&options)?;
    let config = gsgp_config_from(&options)?;
    let run = run_gsgp_red(&config, &dataset, &dataset)
        .map_err(|e| CliError::run(e.to_string()))?;

    let histogram = growth::initial_tree_frequency(&run.population);
    println!(
        "{} of {} initial trees survive in the final population (store holds {} distinct trees)",
        histogram.distinct_survivors,
        config.pop_size,
        run.store.len(),
    );
    for (key, count) in histogram.counts.iter().take(10) {
        println!("{count:>6}  {key}");
    }
    if histogram.counts.len() > 10 {
        println!("        ... and {} more", histogram.counts.len() - 10);
    }

    let out: PathBuf = options
        .get::<PathBuf>("out")?
        .unwrap_or_else(|| PathBuf::from("growth_report.json"));
    write_json(&out, &histogram)?;
    let csv_path = out.with_extension("csv");
    std::fs::write(&csv_path, histogram.to_csv())
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", csv_path.display())))?;
    println!(
        "histogram written to {} and {}",
        out.display(),
        csv_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// verify-equivalence

fn cmd_verify_equivalence(args: &[String]) -> Result<(), CliError> {
    let (options, _) = Options::parse(args, PAIRED_FLAGS, &[], 1)?;
    let dataset = load_dataset(&options)?;
    let config = gsgp_config_from(&options)?;
    let report = verify_equivalence(config.seed, &config, &dataset, &dataset)
        .map_err(|e| CliError::run(e.to_string()))?;

    println!(
        "paired run over {} generations (pop {}, seed {})",
        report.generations, report.pop_size, report.seed
    );
    println!(
        "max relative RMSE deviation {:.3e}{}",
        report.max_rmse_rel_deviation,
        if report.warning { " (warning)" } else { "" },
    );
    println!(
        "max relative semantics deviation {:.3e}",
        report.max_semantics_rel_deviation
    );
    println!(
        "best individual: gsgp {} nodes vs gsgp-red {} nodes ({} terms); {:.1} orders of magnitude smaller",
        report.gsgp_exact_size, report.red_node_count, report.red_term_count,
        report.size_magnitude_gap,
    );

    let out: PathBuf = options
        .get::<PathBuf>("out")?
        .unwrap_or_else(|| PathBuf::from("equivalence_report.json"));
    write_json(&out, &report)?;
    println!("report written to {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// expected-size

fn cmd_expected_size(args: &[String]) -> Result<(), CliError> {
    // the positional here is the operator name, not a config file
    let operator = args
        .first()
        .filter(|a| !a.starts_with("--"))
        .ok_or_else(|| CliError::config("expected-size needs an operator (gsm|gsx-e|gsx-m)"))?
        .clone();
    let (options, _) = Options::parse(&args[1..], EXPECTED_SIZE_FLAGS, EXPECTED_SIZE_SWITCHES, 0)?;

    let g: u32 = options.get_or("g", 0)?;
    let e_p0: f64 = options
        .get::<f64>("ep0")?
        .ok_or_else(|| CliError::config("missing required option --ep0"))?;
    let e_r: Option<f64> = options.get("er")?;
    let a: u32 = options.get_or("a", 4)?;
    let b: u32 = options.get_or("b", 5)?;
    let c: u32 = options.get_or("c", 4)?;
    let exact = options.switch("exact");

    let require_er = || {
        e_r.ok_or_else(|| CliError::config(format!("operator {operator} needs --er")))
    };

    if exact {
        let to_int = |v: f64, name: &str| -> Result<u64, CliError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(CliError::config(format!(
                    "--exact needs a non-negative integer for --{name}, got {v}"
                )))
            }
        };
        let value = match operator.as_str() {
            "gsm" => expected_size_gsm_exact(
                to_int(e_p0, "ep0")?,
                to_int(require_er()?, "er")?,
                a as u64,
                g as u64,
            ),
            "gsx-e" => expected_size_gsx_e_exact(to_int(e_p0, "ep0")?, b as u64, g),
            "gsx-m" => expected_size_gsx_m_exact(
                to_int(e_p0, "ep0")?,
                to_int(require_er()?, "er")?,
                c as u64,
                g,
            ),
            other => return Err(CliError::config(format!("unknown operator {other:?}"))),
        };
        println!("{value}");
        return Ok(());
    }

    let params = |e_r: f64| GrowthParams {
        e_p0,
        e_r,
        a,
        b,
        c,
        g,
    };
    let (value, log10) = match operator.as_str() {
        "gsm" => {
            let p = params(require_er()?);
            (expected_size_gsm(&p), None)
        }
        "gsx-e" => {
            let p = params(0.0);
            (expected_size_gsx_e(&p), Some(expected_size_gsx_e_log10(&p)))
        }
        "gsx-m" => {
            let p = params(require_er()?);
            (expected_size_gsx_m(&p), Some(expected_size_gsx_m_log10(&p)))
        }
        other => return Err(CliError::config(format!("unknown operator {other:?}"))),
    };

    if value.is_finite() {
        println!("{}", format_expected(value));
    } else {
        let log10 = log10.expect("only the 2^g forms can overflow");
        println!("overflow: ~1e{log10:.3} (use --exact for the exact integer)");
    }
    Ok(())
}

fn format_expected(value: f64) -> String {
    if value.abs() < 1e15 && value.fract() == 0.0 {
        format!("{}", value as i64)
    } else if value.abs() < 1e15 {
        format!("{value}")
    } else {
        format!("{value:.6e}")
    }
}
