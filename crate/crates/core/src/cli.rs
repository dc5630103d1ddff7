//! Command-line front end. Every subcommand parses its arguments, calls the
//! library and renders the result; exit codes are 0 for success, 1 for a
//! negative verdict and 2 for usage or I/O errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::forest::{incoming_forests, path_forests};
use crate::indist::{decide, Decision, DEFAULT_SEARCH_BOUND};
use crate::ioeq::ioeq_forests;
use crate::model::{Model, ParamLabel};
use crate::numeric::{simulate, InputSignal};
use crate::symbolic::ParamValues;
use crate::verify::verify_theorems;

#[derive(Debug, Parser)]
#[command(name = "compartmental", version, about = "Input-output equations and indistinguishability of linear compartmental models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file against the model invariants.
    Validate { model: PathBuf },
    /// List the k-edge incoming forests of the augmented graph.
    Forests {
        model: PathBuf,
        #[arg(long)]
        k: usize,
        /// Use G~* (edges out of the output removed) instead of G~.
        #[arg(long)]
        star: bool,
        /// Keep only forests containing a path from this vertex...
        #[arg(long, requires = "to")]
        from: Option<usize>,
        /// ...to this vertex.
        #[arg(long, requires = "from")]
        to: Option<usize>,
    },
    /// Print the input-output equation.
    Ioeq {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decide permutation indistinguishability of two models.
    Indist {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Refuse to search when the models have more parameters than this.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        max_params: usize,
    },
    /// Integrate the model ODEs with fixed-step RK4 and print `t,y` samples.
    Simulate {
        model: PathBuf,
        /// Comma-separated assignments such as `a_{21}=1.5,a_{03}=0.7`.
        #[arg(long)]
        params: String,
        #[arg(long, default_value = "impulse")]
        signal: InputSignal,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        dt: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Regenerate the leaky-path and back-edge family results.
    VerifyTheorems {
        #[arg(long = "n", default_value_t = 4)]
        n_max: usize,
    },
}

/// Captured result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(stdout: String) -> Self {
        CliOutput { code: 0, stdout, stderr: String::new() }
    }

    fn negative(stdout: String) -> Self {
        CliOutput { code: 1, stdout, stderr: String::new() }
    }

    fn usage(stderr: String) -> Self {
        CliOutput { code: 2, stdout: String::new(), stderr }
    }
}

fn load(path: &Path) -> Result<Model, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Model::from_json(&text).map_err(|e| format!("malformed model {}: {e}", path.display()))
}

fn load_valid(path: &Path) -> Result<Model, String> {
    let model = load(path)?;
    model.ensure_valid().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(model)
}

fn parse_params(text: &str) -> Result<ParamValues, String> {
    let mut out = ParamValues::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected label=value, got `{item}`"))?;
        let label: ParamLabel = k.parse().map_err(|e| format!("{e}"))?;
        let value: f64 = v.trim().parse().map_err(|_| format!("bad value for {label}: `{v}`"))?;
        if out.insert(label, value).is_some() {
            return Err(format!("{label} assigned twice"));
        }
    }
    Ok(out)
}

fn execute(command: Command) -> Result<CliOutput, String> {
    match command {
        Command::Validate { model } => {
            let model = load(&model)?;
            let violations = model.validate();
            if violations.is_empty() {
                Ok(CliOutput::ok("valid\n".into()))
            } else {
                Ok(CliOutput::negative(violations.iter().map(|v| format!("{v}\n")).collect()))
            }
        }
        Command::Forests { model, k, star, from, to } => {
            let model = load_valid(&model)?;
            let g = if star { model.build_gtilde_star() } else { model.build_gtilde() }.map_err(|e| e.to_string())?;
            let forests = match (from, to) {
                (Some(i), Some(j)) => {
                    if i > g.n() || j > g.n() {
                        return Err(format!("path endpoints must lie in 0..={}", g.n()));
                    }
                    path_forests(&g, k, i, j)
                }
                _ => incoming_forests(&g, k),
            };
            Ok(CliOutput::ok(forests.iter().map(|f| format!("{}\n", f.render())).collect()))
        }
        Command::Ioeq { model, format } => {
            let eq = ioeq_forests(&load_valid(&model)?).map_err(|e| e.to_string())?;
            Ok(CliOutput::ok(match format {
                Format::Text => format!("{}\n", eq.render()),
                Format::Json => format!("{}\n", eq.to_json()),
            }))
        }
        Command::Indist { first, second, format, max_params } => {
            let a = ioeq_forests(&load_valid(&first)?).map_err(|e| e.to_string())?;
            let b = ioeq_forests(&load_valid(&second)?).map_err(|e| e.to_string())?;
            let decision = decide(&a, &b, max_params).map_err(|e| e.to_string())?;
            Ok(match (decision, format) {
                (Decision::Indistinguishable(cert), Format::Text) => CliOutput::ok(cert.bijection.render()),
                (Decision::Indistinguishable(cert), Format::Json) => {
                    let map: Vec<[String; 2]> = cert
                        .bijection
                        .pairs()
                        .map(|(x, y)| [x.to_string(), y.to_string()])
                        .collect();
                    CliOutput::ok(format!("{}\n", serde_json::json!({ "indistinguishable": true, "map": map })))
                }
                (Decision::Distinguishable { witness }, Format::Text) => {
                    CliOutput::negative(format!("DISTINGUISHABLE\nwitness: {witness}\n"))
                }
                (Decision::Distinguishable { witness }, Format::Json) => CliOutput::negative(format!(
                    "{}\n",
                    serde_json::json!({ "indistinguishable": false, "witness": witness.to_string() })
                )),
            })
        }
        Command::Simulate { model, params, signal, tmax, dt, csv } => {
            let model = load_valid(&model)?;
            let values = parse_params(&params)?;
            let trajectory = simulate(&model, &values, signal, tmax, dt).map_err(|e| e.to_string())?;
            let text = trajectory.to_csv();
            match csv {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                    Ok(CliOutput::ok(format!(
                        "wrote {} samples to {}\n",
                        trajectory.times.len(),
                        path.display()
                    )))
                }
                None => Ok(CliOutput::ok(text)),
            }
        }
        Command::VerifyTheorems { n_max } => {
            let report = verify_theorems(n_max)?;
            let text = report.to_string();
            Ok(if report.all_passed() {
                CliOutput::ok(text)
            } else {
                CliOutput::negative(text)
            })
        }
    }
}

/// Runs the tool on `argv` (including the program name) and captures output.
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                CliOutput::usage(rendered)
            } else {
                CliOutput::ok(rendered)
            };
        }
    };
    match execute(cli.command) {
        Ok(out) => out,
        Err(msg) => CliOutput::usage(format!("error: {msg}\n")),
    }
}
