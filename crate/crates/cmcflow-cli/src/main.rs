//! Command-line front end: model ingestion, command dispatch, deterministic
//! CSV/JSON outputs, and a run record per invocation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cmcflow::causal::{self, Orientation};
use cmcflow::comparison;
use cmcflow::error::CmcError;
use cmcflow::estimates;
use cmcflow::flow::{self, FlowConfig, FlowVerdict};
use cmcflow::grid::PeriodicGrid;
use cmcflow::hypersurface::GraphSurface;
use cmcflow::io::{self, InitialSurface};
use cmcflow::spacetime::MultiWarpedSpacetime;
use cmcflow::stability;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_MODEL: u8 = 2;
const EXIT_BARRIER: u8 = 3;
const EXIT_SPACELIKE: u8 = 4;
const EXIT_MAX_STEPS: u8 = 5;
const EXIT_VERIFY: u8 = 6;

#[derive(Parser)]
#[command(
    name = "cmcflow",
    version,
    about = "Mean curvature flow laboratory for warped cosmologies"
)]
struct Cli {
    /// Output directory for result files and the run record.
    #[arg(long, global = true, default_value = "./out", env = "CMCFLOW_OUT")]
    out: PathBuf,
    /// Seed echoed into the run record (commands are deterministic).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for geodesic fans.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArg {
    /// Model JSON file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the diagonal Ricci eigenvalues at sample times.
    Ricci {
        #[command(flatten)]
        model: ModelArg,
        /// Times: comma list `0.5,1,2` or range `a:b:n`.
        #[arg(long)]
        t: String,
    },
    /// Check the energy condition Ric(X,X) >= -n*lambda over timelike X.
    CheckEnergy {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Times: comma list or range `a:b:n`.
        #[arg(long)]
        t: String,
    },
    /// Run the forced mean curvature flow to a CMC surface.
    Flow {
        #[command(flatten)]
        model: ModelArg,
        /// Forcing constant (the target mean curvature).
        #[arg(long)]
        c: f64,
        /// Initial surface: `const:T`, `sine:T,A,k`, or `file:PATH`.
        #[arg(long)]
        u0: String,
        /// Grid resolution per axis, e.g. `256` or `16,16,16`. Fewer axes
        /// than the model has means the surface is constant along the rest.
        #[arg(long)]
        n: Option<String>,
        /// Select barriers automatically from the initial surface.
        #[arg(long, default_value_t = false)]
        auto_barriers: bool,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        t2: Option<f64>,
        #[arg(long, default_value_t = 0.4)]
        cfl: f64,
        #[arg(long, default_value_t = 0.05)]
        ds_max: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol_h: f64,
        #[arg(long, default_value_t = 2_000_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 10)]
        series_every: usize,
        /// Record consecutive snapshot pairs at this cadence (enables
        /// verify-estimates on the run).
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// Select a barrier pair for a forcing level.
    Barrier {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        t_ref: f64,
    },
    /// Integrate a null geodesic and emit its trajectory.
    Geodesics {
        #[command(flatten)]
        model: ModelArg,
        /// Start event `t0,x1[,x2,x3]`.
        #[arg(long)]
        start: String,
        /// Conserved momenta `p1[,p2,p3]`.
        #[arg(long)]
        momenta: String,
        #[arg(long)]
        t_stop: f64,
        #[arg(long, default_value = "past")]
        orientation: String,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Probe observer horizons with fans of past null geodesics.
    Horizon {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        t1: f64,
        #[arg(long, default_value_t = 8)]
        fan: usize,
        #[arg(long, default_value_t = 1e6)]
        t_cap: f64,
        /// Base point of the observer t-line (defaults to the origin).
        #[arg(long)]
        xi: Option<String>,
    },
    /// Classify the future causal boundary.
    Boundary {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Principal eigenpair of the stability operator on a surface.
    Eigen {
        #[command(flatten)]
        model: ModelArg,
        /// Surface CSV file.
        #[arg(long)]
        surface: PathBuf,
    },
    /// Verify the estimate chain along a recorded flow run.
    VerifyEstimates {
        /// Flow record JSON (written by `flow --snapshot-every`).
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long)]
        c: f64,
    },
}

#[derive(Serialize)]
struct RunRecord {
    command: String,
    argv: Vec<String>,
    seed: u64,
    jobs: usize,
    version: String,
    model: Option<serde_json::Value>,
    outputs: Vec<String>,
    notes: Vec<String>,
    /// Wall time is informational; result files are byte-deterministic,
    /// this record is not compared across runs.
    wall_ms: u128,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &CmcError) -> u8 {
    match e {
        CmcError::Geometry { .. } => EXIT_SPACELIKE,
        CmcError::Parse(_)
        | CmcError::Domain(_)
        | CmcError::Argument(_)
        | CmcError::NoBarrier(_)
        | CmcError::NotApplicable(_)
        | CmcError::Numeric(_)
        | CmcError::Io(_) => EXIT_MODEL,
    }
}

fn load_model(path: &Path) -> Result<MultiWarpedSpacetime, CmcError> {
    let text = std::fs::read_to_string(path)?;
    io::parse_model_json(&text)
}

/// `a:b:n` linspace (inclusive) or comma list.
fn parse_times(spec: &str) -> Result<Vec<f64>, CmcError> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CmcError::Parse(format!(
                "time range '{spec}' must be start:end:count"
            )));
        }
        let a: f64 = parts[0]
            .parse()
            .map_err(|e| CmcError::Parse(format!("range start: {e}")))?;
        let b: f64 = parts[1]
            .parse()
            .map_err(|e| CmcError::Parse(format!("range end: {e}")))?;
        let n: usize = parts[2]
            .parse()
            .map_err(|e| CmcError::Parse(format!("range count: {e}")))?;
        if n < 2 || !(a < b) {
            return Err(CmcError::Parse(format!(
                "time range '{spec}' needs start < end and count >= 2"
            )));
        }
        Ok((0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect())
    } else {
        spec.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| CmcError::Parse(format!("time '{tok}': {e}")))
            })
            .collect()
    }
}

fn parse_floats(spec: &str, what: &str) -> Result<Vec<f64>, CmcError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CmcError::Parse(format!("{what} '{tok}': {e}")))
        })
        .collect()
}

fn write_output(
    dir: &Path,
    name: &str,
    content: &str,
    outputs: &mut Vec<String>,
) -> Result<(), CmcError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    outputs.push(path.display().to_string());
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("report serialization");
    s.push('\n');
    s
}

fn default_grid(
    m: &MultiWarpedSpacetime,
    n_arg: &Option<String>,
) -> Result<PeriodicGrid, CmcError> {
    let dims: Vec<usize> = match n_arg {
        Some(spec) => spec
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|e| CmcError::Parse(format!("grid size '{tok}': {e}")))
            })
            .collect::<Result<_, _>>()?,
        None => {
            let d = m.spatial_dim();
            if d == 1 {
                vec![256]
            } else {
                vec![8; d]
            }
        }
    };
    let periods: Vec<f64> = (0..dims.len()).map(|k| m.period_of_axis(k)).collect();
    PeriodicGrid::new(dims, periods)
}

fn run(cli: Cli) -> Result<u8, CmcError> {
    let started = Instant::now();
    let out_dir = cli.out.clone();
    let mut outputs = Vec::new();
    let mut notes = Vec::new();
    let model_echo: Option<MultiWarpedSpacetime>;

    let (name, code) = match &cli.command {
        Command::Ricci { model, t } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let times = parse_times(t)?;
            let mut csv = String::from("t,r0");
            for i in 0..m.fibers.len() {
                csv.push_str(&format!(",r{}", i + 1));
            }
            csv.push('\n');
            for &t in &times {
                let ric = m.ricci_diagonal(t)?;
                csv.push_str(&t.to_string());
                csv.push(',');
                csv.push_str(&ric.r0.to_string());
                for r in &ric.fiber {
                    csv.push(',');
                    csv.push_str(&r.to_string());
                }
                csv.push('\n');
            }
            write_output(&out_dir, "ricci.csv", &csv, &mut outputs)?;
            println!(
                "ricci: {} samples -> {}",
                times.len(),
                out_dir.join("ricci.csv").display()
            );
            ("ricci", EXIT_OK)
        }

        Command::CheckEnergy { model, lambda, t } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let times = parse_times(t)?;
            let report = m.check_energy_condition(*lambda, &times)?;
            write_output(&out_dir, "energy.json", &json_line(&report), &mut outputs)?;
            println!(
                "check-energy: {} (worst margin {:.6e} at t = {})",
                if report.passed { "pass" } else { "FAIL" },
                report.worst_margin,
                report.worst_t
            );
            (
                "check-energy",
                if report.passed { EXIT_OK } else { EXIT_VERIFY },
            )
        }

        Command::Flow {
            model,
            c,
            u0,
            n,
            auto_barriers,
            t1,
            t2,
            cfl,
            ds_max,
            tol_h,
            max_steps,
            series_every,
            snapshot_every,
        } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let grid = default_grid(&m, n)?;
            let surface = match io::parse_initial_surface(u0)? {
                InitialSurface::File(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    io::parse_surface_csv(&text)?
                }
                other => other.build(grid)?,
            };

            let mut cfg = FlowConfig::new(*c);
            cfg.cfl = *cfl;
            cfg.ds_max = *ds_max;
            cfg.tol_h = *tol_h;
            cfg.max_steps = *max_steps;
            cfg.series_every = *series_every;
            cfg.snapshot_every = *snapshot_every;
            if *auto_barriers {
                let lo = surface.min_u();
                let t_ref = lo - (1e-3 * lo.abs()).max(1e-3);
                let (b1, cert) = comparison::barrier_pair_select(&m, *c, t_ref)?;
                cfg.barrier_lower = Some(b1);
                cfg.barrier_upper = Some(cert.t_slice);
                notes.push(format!(
                    "auto barriers: t1 = {b1}, t2 = {} (tau = {}, bound = {})",
                    cert.t_slice, cert.tau, cert.bound
                ));
            } else {
                cfg.barrier_lower = *t1;
                cfg.barrier_upper = *t2;
            }
            notes.push(
                "parabolicity: max over grid of (1/min_j a_j^2 + v^2 |w|^2) * max(1, v^2)"
                    .to_string(),
            );

            let result = flow::flow_run(&m, surface, &cfg)?;

            let mut series = String::from("step,s,ds,minH,maxH,maxv,minu,maxu,residual\n");
            for row in &result.series {
                series.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    row.step,
                    row.s,
                    row.ds,
                    row.min_h,
                    row.max_h,
                    row.max_tilt,
                    row.min_u,
                    row.max_u,
                    row.residual
                ));
            }
            write_output(&out_dir, "series.csv", &series, &mut outputs)?;
            write_output(
                &out_dir,
                "surface.csv",
                &io::surface_to_csv(&result.final_state.surface),
                &mut outputs,
            )?;
            if snapshot_every.is_some() {
                let record = io::flow_record_to_json(
                    &m,
                    &result.final_state.surface.grid,
                    *c,
                    &result.snapshots,
                );
                write_output(&out_dir, "flow_record.json", &record, &mut outputs)?;
            }
            if let Some(v) = &result.violation {
                notes.push(format!("barrier violation: {v:?}"));
            }
            println!(
                "flow: {:?} after {} steps (s = {:.6}, residual {:.3e}, u in [{:.6}, {:.6}])",
                result.verdict,
                result.final_state.step,
                result.final_state.s,
                result.final_state.diagnostics.residual,
                result.final_state.diagnostics.min_u,
                result.final_state.diagnostics.max_u
            );
            let code = match result.verdict {
                FlowVerdict::Converged => EXIT_OK,
                FlowVerdict::BarrierViolation => EXIT_BARRIER,
                FlowVerdict::SpacelikenessLost => EXIT_SPACELIKE,
                FlowVerdict::MaxSteps => EXIT_MAX_STEPS,
            };
            ("flow", code)
        }

        Command::Barrier { model, c, t_ref } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let (t1, cert) = comparison::barrier_pair_select(&m, *c, *t_ref)?;
            #[derive(Serialize)]
            struct BarrierOut {
                t1: f64,
                t2: f64,
                tau: f64,
                bound: f64,
            }
            let out = BarrierOut {
                t1,
                t2: cert.t_slice,
                tau: cert.tau,
                bound: cert.bound,
            };
            let line = json_line(&out);
            print!("{line}");
            write_output(&out_dir, "barrier.json", &line, &mut outputs)?;
            ("barrier", EXIT_OK)
        }

        Command::Geodesics {
            model,
            start,
            momenta,
            t_stop,
            orientation,
            samples,
        } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let start_vals = parse_floats(start, "start")?;
            if start_vals.len() != m.spatial_dim() + 1 {
                return Err(CmcError::Argument(format!(
                    "start needs t0 plus {} coordinates",
                    m.spatial_dim()
                )));
            }
            let momenta = parse_floats(momenta, "momenta")?;
            let orient = match orientation.as_str() {
                "past" => Orientation::Past,
                "future" => Orientation::Future,
                other => {
                    return Err(CmcError::Argument(format!(
                        "orientation must be past or future, got '{other}'"
                    )))
                }
            };
            let geo = causal::null_geodesic(
                &m,
                start_vals[0],
                &start_vals[1..],
                &momenta,
                *t_stop,
                orient,
                *samples,
            )?;
            let d = geo.dim();
            let mut csv = String::from("t");
            for k in 0..d {
                csv.push_str(&format!(",x{}", k + 1));
            }
            csv.push('\n');
            for (i, t) in geo.ts.iter().enumerate() {
                csv.push_str(&t.to_string());
                for x in geo.x(i) {
                    csv.push(',');
                    csv.push_str(&x.to_string());
                }
                csv.push('\n');
            }
            write_output(&out_dir, "trajectory.csv", &csv, &mut outputs)?;
            if geo.truncated {
                notes.push("trajectory truncated at the model boundary".to_string());
            }
            println!(
                "geodesics: {} samples to t = {} (null residual {:.2e}, momentum residual {:.2e}{})",
                geo.ts.len(),
                geo.ts.last().unwrap(),
                geo.null_residual,
                geo.momentum_residual,
                if geo.truncated { ", truncated" } else { "" }
            );
            ("geodesics", EXIT_OK)
        }

        Command::Horizon {
            model,
            t1,
            fan,
            t_cap,
            xi,
        } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let base = match xi {
                Some(spec) => parse_floats(spec, "xi")?,
                None => vec![0.0; m.spatial_dim()],
            };
            let report = causal::observer_horizon_test(&m, &base, *t1, *fan, *t_cap, cli.jobs)?;
            write_output(&out_dir, "horizon.json", &json_line(&report), &mut outputs)?;
            println!(
                "horizon: covers_slice = {} ({} axes probed)",
                report.covers_slice,
                report.axes.len()
            );
            ("horizon", EXIT_OK)
        }

        Command::Boundary { model } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let report = causal::classify_boundary(&m)?;
            write_output(&out_dir, "boundary.json", &json_line(&report), &mut outputs)?;
            println!("boundary: shape = {}", report.boundary_shape);
            ("boundary", EXIT_OK)
        }

        Command::Eigen { model, surface } => {
            let m = load_model(&model.model)?;
            model_echo = Some(m.clone());
            let text = std::fs::read_to_string(surface)?;
            let s = io::parse_surface_csv(&text)?;
            let eig = stability::principal_eigen(&m, &s)?;
            #[derive(Serialize)]
            struct EigenOut {
                lambda1: f64,
                residual: f64,
                iters: usize,
            }
            let line = json_line(&EigenOut {
                lambda1: eig.lambda1,
                residual: eig.residual,
                iters: eig.iterations,
            });
            print!("{line}");
            write_output(&out_dir, "eigen.json", &line, &mut outputs)?;
            let phi_surface = GraphSurface::new(s.grid.clone(), eig.phi1)?;
            write_output(
                &out_dir,
                "phi1.csv",
                &io::surface_to_csv(&phi_surface),
                &mut outputs,
            )?;
            ("eigen", EXIT_OK)
        }

        Command::VerifyEstimates { run, lambda, c } => {
            let text = std::fs::read_to_string(run)?;
            let record = io::parse_flow_record(&text)?;
            model_echo = Some(record.model.clone());
            if (record.c - c).abs() > 1e-12 {
                notes.push(format!(
                    "record was produced with c = {}, verifying against c = {c}",
                    record.c
                ));
            }
            let eps = estimates::select_epsilons(record.model.spatial_dim(), *lambda);
            let report = estimates::flow_inequality_monitor(
                &record.model,
                &record.grid,
                &record.snapshots,
                &eps,
                *c,
            )?;
            write_output(&out_dir, "estimates.json", &json_line(&report), &mut outputs)?;
            println!(
                "verify-estimates: {} violations, identity residual {:.3e}, margin min {:.3e}",
                report.violations, report.identity_residual, report.inequality_margin_min
            );
            (
                "verify-estimates",
                if report.violations == 0 {
                    EXIT_OK
                } else {
                    EXIT_VERIFY
                },
            )
        }
    };

    let record = RunRecord {
        command: name.to_string(),
        argv: std::env::args().collect(),
        seed: cli.seed,
        jobs: cli.jobs,
        version: env!("CARGO_PKG_VERSION").to_string(),
        model: model_echo
            .map(|m| serde_json::from_str(&io::model_to_json(&m)).expect("model echo")),
        outputs: outputs.clone(),
        notes,
        wall_ms: started.elapsed().as_millis(),
    };
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(
        out_dir.join("run_record.json"),
        serde_json::to_string_pretty(&record).expect("run record"),
    )?;
    Ok(code)
}
