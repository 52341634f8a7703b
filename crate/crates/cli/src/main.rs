use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use setopt::bench::{self, ExperimentConfig, Metric, MetricsTable};
use setopt::problem::{list_ids, registry};
use setopt::{partition, solvers, subproblem, Algorithm, Cone, Problem, SolverConfig};

/// Trust-region solvers and benchmarks for set optimization problems.
///
/// The worker count of `run` comes from the SETOPT_THREADS environment
/// variable (all cores when unset).
#[derive(Parser)]
#[command(name = "setopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered problem instances.
    ListProblems {
        /// Print one JSON object per problem instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Minimal-value structure of F at a point.
    Inspect {
        #[arg(long)]
        problem: String,
        /// Comma-separated coordinates.
        #[arg(long)]
        point: String,
        #[arg(long)]
        cone: Option<String>,
    },
    /// Criticality measure t* with its partition element a* and step s*.
    Criticality {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        cone: Option<String>,
        /// Trust-region radius of the subproblem.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Run one solver from one start.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        x0: String,
        /// Solver parameters as JSON; missing fields take the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        cone: Option<String>,
        /// Print every iteration as a JSON line before the result.
        #[arg(long)]
        trace: bool,
    },
    /// Run an experiment matrix into a JSON-lines store (resumable).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metric table of a store.
    Table {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        /// Comma-separated algorithms (default: all in the store).
        #[arg(long)]
        algos: Option<String>,
    },
    /// Performance profile of one metric.
    Profile {
        #[arg(long)]
        store: PathBuf,
        /// nonconv, iterations, cpu_time or inv_step_size.
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        algos: Option<String>,
        /// Also write the ratios and curves as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run Max and Avg under several cones from one start and dump the value clouds.
    ConeExperiment {
        #[arg(long, default_value = "ex53_n2_m2")]
        problem: String,
        #[arg(long, default_value = "-16.355461,-2.454201")]
        x0: String,
        /// Cone preset or JSON; repeat for several cones.
        #[arg(long = "cone", default_values_t = ["orthant:2".to_string(), "k2prime".to_string()])]
        cones: Vec<String>,
        #[arg(long, default_value = "max,avg")]
        algos: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad coordinate `{t}` in `{s}`"))
        })
        .collect()
}

fn parse_algos(s: &str) -> Result<Vec<Algorithm>> {
    s.split(',').map(|a| Ok(a.trim().parse::<Algorithm>()?)).collect()
}

fn cone_for(spec: Option<&str>, problem: &Problem) -> Result<Cone> {
    let cone = match spec {
        Some(s) => Cone::from_preset(s)?,
        None => Cone::orthant(problem.m()),
    };
    if cone.dim() != problem.m() {
        bail!("cone has dimension {}, {} has m = {}", cone.dim(), problem.name(), problem.m());
    }
    Ok(cone)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn solver_config(path: Option<&Path>) -> Result<SolverConfig> {
    let c = match path {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    c.validate()?;
    Ok(c)
}

fn point_for(problem: &Problem, raw: &str) -> Result<Vec<f64>> {
    let x = parse_point(raw)?;
    if x.len() != problem.n() {
        bail!("{} expects {} coordinates, got {}", problem.name(), problem.n(), x.len());
    }
    if !problem.bounds().contains(&x) {
        bail!("point {x:?} lies outside the box of {}", problem.name());
    }
    Ok(x)
}

fn table_for(store: &Path, algos: Option<&str>) -> Result<MetricsTable> {
    let records = bench::read_store(store)?;
    if records.is_empty() {
        bail!("{} holds no records", store.display());
    }
    let algos = algos.map(parse_algos).transpose()?;
    Ok(MetricsTable::build(&records, algos.as_deref()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        // A closed downstream pipe (e.g. `| head`) is not an error.
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        other => other,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::ListProblems { json } => {
            for id in list_ids() {
                let info = registry(id)?.info();
                if json {
                    writeln!(out, "{}", serde_json::to_string(&info)?)?;
                } else {
                    writeln!(
                        out,
                        "{:<22} n={:<3} m={:<2} p={:<4} box=[{}]",
                        info.name,
                        info.n,
                        info.m,
                        info.p,
                        info.lower
                            .iter()
                            .zip(&info.upper)
                            .map(|(l, u)| format!("{l},{u}"))
                            .collect::<Vec<_>>()
                            .join(" x ")
                    )?;
                }
            }
        }
        Command::Inspect { problem, point, cone } => {
            let p = registry(&problem)?;
            let x = point_for(&p, &point)?;
            let cone = cone_for(cone.as_deref(), &p)?;
            let s = partition::minimal_structure(&p, &cone, &x, partition::DEFAULT_VALUE_TOL)?;
            let report = json!({
                "problem": p.name(),
                "x": x,
                "omega": s.omega,
                "groups": s.groups,
                "partition_size": s.partition_size(),
                "values": s.values,
                "min_idx": s.min_idx,
                "wmin_idx": s.wmin_idx,
                "is_regular_hint": s.is_regular_hint,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Criticality {
            problem,
            point,
            cone,
            radius,
        } => {
            let p = registry(&problem)?;
            let x = point_for(&p, &point)?;
            let cone = cone_for(cone.as_deref(), &p)?;
            let sol = subproblem::theta_and_step(&p, &cone, &x, radius)?;
            let report = json!({
                "problem": p.name(),
                "x": x,
                "radius": radius,
                "t_star": sol.t_star,
                "a_star": sol.a_star,
                "s_star": sol.s_star,
                "feasible": sol.feasible,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Solve {
            problem,
            algo,
            x0,
            config,
            cone,
            trace,
        } => {
            let p = registry(&problem)?;
            let x = point_for(&p, &x0)?;
            let cone = cone_for(cone.as_deref(), &p)?;
            let cfg = solver_config(config.as_deref())?;
            let mut result = solvers::run(algo, &p, &cone, &x, &cfg, trace)?;
            for rec in result.trace.drain(..) {
                writeln!(out, "{}", serde_json::to_string(&rec)?)?;
            }
            writeln!(out, "{}", serde_json::to_string(&result)?)?;
        }
        Command::Run { config, out: store } => {
            let cfg: ExperimentConfig = read_json(&config)?;
            let summary = bench::run_matrix(&cfg, &store)?;
            writeln!(out, "{}", serde_json::to_string(&summary)?)?;
        }
        Command::Table { store, csv, algos } => {
            let table = table_for(&store, algos.as_deref())?;
            table.write_csv(&csv)?;
            writeln!(out, "wrote {} rows to {}", table.rows.len(), csv.display())?;
        }
        Command::Profile {
            store,
            metric,
            svg,
            algos,
            json,
        } => {
            let table = table_for(&store, algos.as_deref())?;
            let profile = bench::profile_from_table(&table, metric)?;
            bench::write_svg(&svg, &profile)?;
            if let Some(path) = json {
                fs::write(&path, serde_json::to_string_pretty(&profile)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            writeln!(
                out,
                "profiled {} problems for {} solvers into {}",
                profile.problems.len(),
                profile.solvers.len(),
                svg.display()
            )?;
        }
        Command::ConeExperiment {
            problem,
            x0,
            cones,
            algos,
            config,
            out: path,
        } => {
            let p = registry(&problem)?;
            let x = point_for(&p, &x0)?;
            let named = cones
                .iter()
                .map(|c| Ok((c.clone(), cone_for(Some(c), &p)?)))
                .collect::<Result<Vec<_>>>()?;
            let cfg = solver_config(config.as_deref())?;
            let runs = bench::cone_experiment(&p, &x, &named, &parse_algos(&algos)?, &cfg)?;
            fs::write(&path, serde_json::to_string_pretty(&runs)?)
                .with_context(|| format!("writing {}", path.display()))?;
            for r in &runs {
                writeln!(
                    out,
                    "{} {}: converged={} iterations={}",
                    r.cone, r.result.algorithm, r.result.converged, r.result.iterations
                )?;
            }
        }
    }
    Ok(())
}
