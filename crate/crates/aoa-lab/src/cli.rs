//! Command-line front end. Parses arguments, layers parameter sources,
//! runs the requested experiment on a dedicated thread pool, and writes the
//! CSV (and optional SVG) output.
//!
//! Parameter precedence, lowest to highest: experiment defaults, the
//! `AOA_LAB_SEED` environment variable, `--config` file entries,
//! `--set key=value` / `--M` overrides, and finally `--seed`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;

use crate::config::{Experiment, Params};
use crate::montecarlo::{run_experiment, RunError};
use crate::plot::{render_svg, Series};
use crate::table::Table;

pub const SEED_ENV: &str = "AOA_LAB_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "aoa-lab",
    version,
    about = "Angle-of-arrival estimation lab: bounds, antenna selection, energy, estimators",
    after_help = "Experiments: crlb-convergence, ml-variance, le-sweep, music-le, \
                  lemma-diagnostics, subset-oracle"
)]
pub struct Cli {
    /// Experiment to run (alternative to -e)
    pub experiment: Option<String>,

    /// Experiment to run
    #[arg(short = 'e', long = "experiment", value_name = "NAME")]
    pub experiment_flag: Option<String>,

    /// Config file with `key = value` lines
    #[arg(short = 'c', long = "config", value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output CSV path (default: <experiment>.csv)
    #[arg(short = 'o', long = "out", value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Master seed (highest-precedence override)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub threads: Option<usize>,

    /// Also write an SVG plot next to the CSV
    #[arg(long)]
    pub plot: bool,

    /// Parameter override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Shorthand for --set M=<N>
    #[arg(long = "M", value_name = "N")]
    pub m: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    /// Bad invocation or bad configuration: exit code 2.
    Usage(String),
    /// Failure while running or writing output: exit code 1.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

fn resolve_experiment(cli: &Cli) -> Result<Experiment, CliError> {
    let name = match (&cli.experiment, &cli.experiment_flag) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!(
                "conflicting experiment names: `{a}` and `{b}`"
            )))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(CliError::Usage(
                "no experiment given; pass a name or -e NAME (see --help)".into(),
            ))
        }
    };
    Experiment::from_str(name).map_err(|e| CliError::Usage(e.to_string()))
}

fn build_params(cli: &Cli, experiment: Experiment) -> Result<Params, CliError> {
    let mut params = Params::defaults_for(experiment);
    if let Ok(raw) = std::env::var(SEED_ENV) {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an integer, got `{raw}`")))?;
        params.seed = seed;
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        let entries =
            crate::config::parse_config_text(&text).map_err(|e| CliError::Usage(e.to_string()))?;
        for (key, value) in entries {
            params
                .apply(&key, &value)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    for pair in &cli.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("--set expects KEY=VALUE, got `{pair}`"))
        })?;
        params
            .apply(key.trim(), value.trim())
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(m) = cli.m {
        params
            .apply("M", &m.to_string())
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(seed) = cli.seed {
        params.seed = seed;
    }
    if let Some(threads) = cli.threads {
        params.threads = threads;
    }
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(params)
}

fn column_f64(table: &Table, row: usize, col: &str) -> f64 {
    table.float(row, col)
}

fn grouped_series<FK, FX, FY>(table: &Table, key: FK, x: FX, y: FY) -> Vec<Series>
where
    FK: Fn(usize) -> String,
    FX: Fn(usize) -> f64,
    FY: Fn(usize) -> f64,
{
    let mut series: Vec<Series> = Vec::new();
    for row in 0..table.rows.len() {
        let name = key(row);
        let point = (x(row), y(row));
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                name,
                points: vec![point],
            }),
        }
    }
    series
}

fn text_cell(table: &Table, row: usize, col: &str) -> String {
    table
        .cell(row, col)
        .as_text()
        .map(str::to_string)
        .unwrap_or_else(|| table.cell(row, col).to_string())
}

fn plot_table(experiment: Experiment, table: &Table) -> String {
    match experiment {
        Experiment::CrlbConvergence => {
            let series = grouped_series(
                table,
                |r| text_cell(table, r, "selection"),
                |r| {
                    if text_cell(table, r, "selection") == "all" {
                        column_f64(table, r, "m")
                    } else {
                        column_f64(table, r, "f")
                    }
                },
                |r| column_f64(table, r, "median_rel_gap"),
            );
            render_svg(
                "Exact bound vs deterministic limit",
                "M (all) or F (subsets)",
                "median relative gap",
                &series,
            )
        }
        Experiment::MlVariance => {
            let series = vec![
                Series {
                    name: "furthest".into(),
                    points: (0..table.rows.len())
                        .map(|r| {
                            (
                                column_f64(table, r, "trial"),
                                column_f64(table, r, "theta_hat_furthest"),
                            )
                        })
                        .collect(),
                },
                Series {
                    name: "first".into(),
                    points: (0..table.rows.len())
                        .map(|r| {
                            (
                                column_f64(table, r, "trial"),
                                column_f64(table, r, "theta_hat_first"),
                            )
                        })
                        .collect(),
                },
            ];
            render_svg(
                "Grid-search estimates per trial",
                "trial",
                "estimated angle (rad)",
                &series,
            )
        }
        Experiment::LeSweep => {
            let series = grouped_series(
                table,
                |r| text_cell(table, r, "selection"),
                |r| column_f64(table, r, "k"),
                |r| column_f64(table, r, "log_le"),
            );
            render_svg(
                "Localization efficiency vs user count",
                "K users",
                "ln LE",
                &series,
            )
        }
        Experiment::MusicLe => {
            let series = grouped_series(
                table,
                |r| {
                    format!(
                        "{} k={}",
                        text_cell(table, r, "selection"),
                        column_f64(table, r, "k") as u64
                    )
                },
                |r| column_f64(table, r, "f"),
                |r| column_f64(table, r, "log_le"),
            );
            render_svg(
                "Measured efficiency vs subset size",
                "F antennas used",
                "ln LE",
                &series,
            )
        }
        Experiment::LemmaDiagnostics => {
            let series = grouped_series(
                table,
                |r| {
                    let q = text_cell(table, r, "quantity");
                    if q == "cosine_weight" {
                        format!("cosine gamma={}", column_f64(table, r, "gamma"))
                    } else {
                        q
                    }
                },
                |r| column_f64(table, r, "m").log2(),
                |r| (column_f64(table, r, "value").abs() + 1e-300).log10(),
            );
            render_svg(
                "Concentration diagnostics",
                "log2 M",
                "log10 |value|",
                &series,
            )
        }
        Experiment::SubsetOracle => {
            let series = vec![
                Series {
                    name: "exhaustive best".into(),
                    points: (0..table.rows.len())
                        .map(|r| {
                            (
                                column_f64(table, r, "f"),
                                column_f64(table, r, "best_objective"),
                            )
                        })
                        .collect(),
                },
                Series {
                    name: "furthest rule".into(),
                    points: (0..table.rows.len())
                        .map(|r| {
                            (
                                column_f64(table, r, "f"),
                                column_f64(table, r, "furthest_objective"),
                            )
                        })
                        .collect(),
                },
            ];
            render_svg(
                "Subset objective: exhaustive vs rule",
                "F antennas",
                "normalized index power",
                &series,
            )
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let experiment = resolve_experiment(cli)?;
    let params = build_params(cli, experiment)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}")))?;
    let table = pool
        .install(|| run_experiment(experiment, &params))
        .map_err(|e| match e {
            RunError::Config(c) => CliError::Usage(c.to_string()),
            other => CliError::Runtime(other.to_string()),
        })?;

    let out_path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name())));
    write_file(&out_path, &table.to_csv())?;
    println!("wrote {} ({} rows)", out_path.display(), table.rows.len());

    if cli.plot {
        let svg_path = out_path.with_extension("svg");
        write_file(&svg_path, &plot_table(experiment, &table))?;
        println!("wrote {}", svg_path.display());
    }

    if experiment == Experiment::SubsetOracle {
        let all_match = table.meta_value("all_match") == Some("true");
        if all_match {
            println!("PASS: furthest rule matches the exhaustive optimum for every size");
        } else {
            println!("FAIL: furthest rule differs from the exhaustive optimum");
            return Ok(1);
        }
    }
    Ok(0)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Run the parsed CLI and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cli(experiment: &str) -> Cli {
        Cli {
            experiment: Some(experiment.into()),
            experiment_flag: None,
            config: None,
            out: None,
            seed: None,
            threads: None,
            plot: false,
            set: vec![],
            m: None,
        }
    }

    #[test]
    fn resolves_positional_and_flag_names() {
        let cli = base_cli("le-sweep");
        assert_eq!(resolve_experiment(&cli).ok(), Some(Experiment::LeSweep));
        let mut both = base_cli("le-sweep");
        both.experiment_flag = Some("music-le".into());
        assert!(matches!(resolve_experiment(&both), Err(CliError::Usage(_))));
        let mut agree = base_cli("le-sweep");
        agree.experiment_flag = Some("le-sweep".into());
        assert_eq!(resolve_experiment(&agree).ok(), Some(Experiment::LeSweep));
        let none = Cli {
            experiment: None,
            ..base_cli("x")
        };
        assert!(matches!(resolve_experiment(&none), Err(CliError::Usage(_))));
    }

    #[test]
    fn set_overrides_beat_defaults_and_seed_beats_set() {
        let mut cli = base_cli("ml-variance");
        cli.set = vec!["seed=7".into(), "Q=500".into()];
        cli.seed = Some(99);
        let params = build_params(&cli, Experiment::MlVariance).unwrap();
        assert_eq!(params.seed, 99);
        assert_eq!(params.grid_size, 500);
    }

    #[test]
    fn bad_set_pair_is_usage_error() {
        let mut cli = base_cli("ml-variance");
        cli.set = vec!["Q500".into()];
        assert!(matches!(
            build_params(&cli, Experiment::MlVariance),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn m_flag_marks_override() {
        let mut cli = base_cli("music-le");
        cli.m = Some(14);
        let params = build_params(&cli, Experiment::MusicLe).unwrap();
        assert_eq!(params.num_antennas, 14);
        assert!(params.m_overridden);
    }

    #[test]
    fn invalid_combination_is_usage_error() {
        let mut cli = base_cli("ml-variance");
        cli.set = vec!["K=20".into(), "M=10".into()];
        assert!(matches!(
            build_params(&cli, Experiment::MlVariance),
            Err(CliError::Usage(_))
        ));
    }
}
