use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use entangle_core::circuits::CircuitSpec;
use entangle_core::dynamics::{evolve, Tolerances};
use entangle_core::harness::persist::{line_plot_svg, sweep_csv, trajectory_csv, RunManifest, Series};
use entangle_core::harness::validate::{bell_state, format_table, run_suite};
use entangle_core::harness::{optimize_knob, run_sweep, stationary_measures, Base, SweepSpec};
use entangle_core::measures::concurrence;
use entangle_core::{DensityMatrix, Error};

#[derive(Parser)]
#[command(name = "entangle", version, about = "Stationary entanglement of two driven dissipative qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Initial {
    Ground,
    Mixed,
    Bell,
}

#[derive(clap::Args)]
struct Common {
    /// Input JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv for evolve and sweep, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write an SVG line plot (needs --out).
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation from an initial state.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, value_enum, default_value = "ground")]
        initial: Initial,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-10)]
        atol: f64,
    },
    /// Exact stationary state with its concurrence and fidelity.
    Stationary {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one knob over a grid.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Maximise the stationary concurrence over one knob.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        knob: String,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Map a circuit design onto the model.
    Circuit {
        #[command(flatten)]
        common: Common,
        /// Set the design's knob to its optimal-condition value.
        #[arg(long)]
        optimal: bool,
    },
    /// Run the built-in invariant suite.
    Validate,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::InvalidSpec(_) | Error::UnknownKnob(_) | Error::MissingParameter(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn emit(common: &Common, name: &str, body: &str) -> CliResult<()> {
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), body)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn emit_svg(common: &Common, title: &str, x_label: &str, series: &[Series]) -> CliResult<()> {
    if !common.svg {
        return Ok(());
    }
    let dir = common.out.as_ref().ok_or_else(|| Failure::Usage("--svg needs --out".into()))?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("plot.svg"), line_plot_svg(title, x_label, series))?;
    Ok(())
}

fn manifest(common: &Common, command: &str, input: &Value, tol: Option<Tolerances>, methods: Vec<String>, outputs: Vec<String>) -> CliResult<()> {
    if let Some(dir) = &common.out {
        RunManifest::new(command, input, tol, methods, outputs).write(dir)?;
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn method_name(m: entangle_core::dynamics::StationaryMethod) -> String {
    json!(m).as_str().unwrap_or_default().to_string()
}

fn cmd_evolve(common: &Common, t_end: f64, samples: usize, initial: Initial, tol: Tolerances) -> CliResult<()> {
    let input = read_json(&common.spec)?;
    let spec = Base::from_json(&input)?.to_model()?;
    let rho0 = match initial {
        Initial::Ground => DensityMatrix::ground(),
        Initial::Mixed => DensityMatrix::maximally_mixed(),
        Initial::Bell => bell_state(),
    };
    let traj = evolve(&spec, &rho0, t_end, samples, &tol)?;
    let name = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(common, "trajectory.csv", &trajectory_csv(&spec, &traj)?)?;
            "trajectory.csv"
        }
        Format::Json => {
            emit(common, "trajectory.json", &pretty(&serde_json::to_value(&traj)?))?;
            "trajectory.json"
        }
    };
    let c: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, r)| (*t, concurrence(r).unwrap_or(f64::NAN)))
        .collect();
    emit_svg(common, "concurrence", "t", &[Series { name: "C", points: c }])?;
    let mut record = input.clone();
    record["t_end"] = json!(t_end);
    record["samples"] = json!(samples);
    record["initial"] = json!(match initial {
        Initial::Ground => "ground",
        Initial::Mixed => "mixed",
        Initial::Bell => "bell",
    });
    manifest(common, "evolve", &record, Some(tol), vec!["dopri5".into()], vec![name.into()])
}

fn cmd_stationary(common: &Common) -> CliResult<()> {
    let input = read_json(&common.spec)?;
    let spec = Base::from_json(&input)?.to_model()?;
    let (st, c, f) = stationary_measures(&spec)?;
    let method = method_name(st.method);
    let (name, body) = match common.format.unwrap_or(Format::Json) {
        Format::Json => (
            "stationary.json",
            pretty(&json!({
                "rho_inf": st.rho_inf,
                "C": c,
                "F": f,
                "method": st.method,
                "residual": st.residual,
                "approximate": st.approximate,
                "frame": st.frame,
            })),
        ),
        Format::Csv => {
            use entangle_core::harness::persist::fmt_f64;
            let mut head = vec!["C".to_string(), "F".into(), "method".into(), "residual".into(), "approximate".into()];
            let mut row = vec![fmt_f64(c), fmt_f64(f), method.clone(), fmt_f64(st.residual), st.approximate.to_string()];
            for r in 0..4 {
                for k in 0..4 {
                    head.push(format!("re_{r}{k}"));
                    head.push(format!("im_{r}{k}"));
                    row.push(fmt_f64(st.rho_inf.get(r, k).re));
                    row.push(fmt_f64(st.rho_inf.get(r, k).im));
                }
            }
            ("stationary.csv", format!("{}\n{}\n", head.join(","), row.join(",")))
        }
    };
    emit(common, name, &body)?;
    manifest(common, "stationary", &input, None, vec![method], vec![name.into()])
}

fn cmd_sweep(common: &Common) -> CliResult<()> {
    let input = read_json(&common.spec)?;
    let spec: SweepSpec = serde_json::from_value(input.clone())?;
    let table = run_sweep(&spec)?;
    let name = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(common, "sweep.csv", &sweep_csv(&table))?;
            "sweep.csv"
        }
        Format::Json => {
            emit(common, "sweep.json", &pretty(&serde_json::to_value(&table)?))?;
            "sweep.json"
        }
    };
    let series: Vec<Series> = table
        .outputs
        .iter()
        .map(|&o| Series {
            name: o.name(),
            points: table.rows.iter().map(|r| r.value).zip(table.column(o).unwrap_or_default()).collect(),
        })
        .collect();
    emit_svg(common, "sweep", &table.knob, &series)?;
    let methods = table.rows.iter().map(|r| r.method.map(|m| method_name(m)).unwrap_or_else(|| "failed".into())).collect();
    for row in table.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: {} = {}: {}", table.knob, row.value, row.error.as_deref().unwrap_or(""));
    }
    manifest(common, "sweep", &input, None, methods, vec![name.into()])
}

fn cmd_optimize(common: &Common, knob: &str, lo: f64, hi: f64) -> CliResult<()> {
    let input = read_json(&common.spec)?;
    let base = Base::from_json(&input)?;
    let report = optimize_knob(&base, knob, (lo, hi))?;
    if report.at_boundary {
        eprintln!("warning: optimum at a bound; the maximum may lie outside [{lo}, {hi}]");
    }
    emit(common, "optimize.json", &pretty(&serde_json::to_value(&report)?))?;
    let mut record = input.clone();
    record["knob"] = json!(knob);
    record["bounds"] = json!([lo, hi]);
    manifest(common, "optimize", &record, None, vec!["golden_section".into()], vec!["optimize.json".into()])
}

fn cmd_circuit(common: &Common, optimal: bool) -> CliResult<()> {
    let input = read_json(&common.spec)?;
    let circuit: CircuitSpec = serde_json::from_value(input.clone())?;
    let body = if optimal {
        let opt = circuit.optimal()?;
        let (st, c, f) = stationary_measures(&opt.mapped.model)?;
        json!({
            "kind": circuit.kind(),
            "knob": opt.knob,
            "value": opt.value,
            "model": opt.mapped.model,
            "derived": opt.mapped.derived,
            "conditions": opt.mapped.conditions,
            "warnings": opt.mapped.warnings,
            "predicted": opt.predicted,
            "numeric": { "C": c, "F": f, "method": st.method, "approximate": st.approximate },
        })
    } else {
        let mapped = circuit.to_model()?;
        json!({
            "kind": circuit.kind(),
            "model": mapped.model,
            "derived": mapped.derived,
            "conditions": mapped.conditions,
            "warnings": mapped.warnings,
            "at_degeneracy": mapped.at_degeneracy,
        })
    };
    if let Some(ws) = body["warnings"].as_array() {
        for w in ws {
            eprintln!("warning: {}", w.as_str().unwrap_or_default());
        }
    }
    emit(common, "circuit.json", &pretty(&body))?;
    manifest(common, "circuit", &input, None, vec![], vec!["circuit.json".into()])
}

fn cmd_validate() -> CliResult<()> {
    let checks = run_suite();
    print!("{}", format_table(&checks));
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure::Numeric(format!("{failed} of {} checks failed", checks.len())));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Evolve { common, t_end, samples, initial, rtol, atol } => {
            cmd_evolve(common, *t_end, *samples, *initial, Tolerances { rtol: *rtol, atol: *atol })
        }
        Command::Stationary { common } => cmd_stationary(common),
        Command::Sweep { common } => cmd_sweep(common),
        Command::Optimize { common, knob, lo, hi } => cmd_optimize(common, knob, *lo, *hi),
        Command::Circuit { common, optimal } => cmd_circuit(common, *optimal),
        Command::Validate => cmd_validate(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
