use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;
use splinefield::baselines::{
    gradient_instability_study, run_encoding_benchmark, run_timing_benchmark, BasisKind, BenchReport,
    GradientStudyConfig, TimingConfig,
};
use splinefield::distance::DistanceField;
use splinefield::dynamics::{DynamicalSystem, DynamicsConfig, Integrator};
use splinefield::io::{
    export_field_grid, grid_to_csv, grid_to_json, load_field, load_model, load_trajectory, parse_trajectory_csv,
    save_model, save_union, write_atomic, GridSpec,
};
use splinefield::service::{ServeOptions, Server, Transport};
use splinefield::synthetic::{fit_for_dynamics, random_smooth_curves, s_shape};
use splinefield::{fit as fit_spline, Error, FitConfig, Trajectory};

use crate::{
    CliResult, EncodingArgs, Failure, FitArgs, GridArgs, GridFormat, GradientStudyArgs, QueryArgs, RolloutArgs,
    ServeArgs, TimingArgs, TransportArg,
};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_floats(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("--{flag}: expected comma-separated numbers, got {s:?}")))
}

fn parse_counts(flag: &str, s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("--{flag}: expected comma-separated integers, got {s:?}")))
}

fn is_json(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes to `out` atomically, or to stdout.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn fit(a: FitArgs) -> CliResult {
    let cfg = FitConfig::new(a.segments)
        .with_ridge(a.ridge)
        .with_terminal_zero_velocity(a.terminal);
    let mut members = Vec::with_capacity(a.input.len());
    for path in &a.input {
        let traj = load_trajectory(path, None)?;
        let res = fit_spline(&traj, &cfg)?;
        let rms = res.rms_error();
        println!(
            "{}: {} samples, {} segments, residual {:e} (rms {:e})",
            path.display(),
            traj.len(),
            a.segments,
            res.residual_sq,
            rms
        );
        let mut meta = BTreeMap::new();
        meta.insert("source".into(), json!(path.display().to_string()));
        meta.insert("samples".into(), json!(traj.len()));
        meta.insert("residual_sq".into(), json!(res.residual_sq));
        meta.insert("rms_error".into(), json!(rms));
        meta.insert("ridge".into(), json!(a.ridge));
        members.push((res.spline, meta));
    }
    if members.len() == 1 {
        let (spline, meta) = members.pop().expect("one member");
        save_model(&spline, meta, &a.output)?;
    } else {
        save_union(&members, &a.output)?;
    }
    Ok(())
}

pub fn query(a: QueryArgs) -> CliResult {
    let field = load_field(&a.model)?.field;
    let mut points = Vec::new();
    for p in &a.point {
        points.push(parse_floats("point", p)?);
    }
    if let Some(path) = &a.points {
        let text = std::fs::read_to_string(path)?;
        let traj = parse_trajectory_csv(&text).map_err(|e| e.with_path(path))?;
        points.extend((0..traj.len()).map(|j| traj.point(j)));
    }
    if points.is_empty() {
        return Err(usage("give at least one --point or a --points file"));
    }
    let d = field.dim();
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(Failure::Run(Error::Domain(format!(
            "query point has {} coordinates, model has {d}",
            bad.len()
        ))));
    }
    let results = splinefield::batch_query(&field, &points);
    let mut out = String::from("distance,phase,segment,t_local");
    for k in 1..=d {
        let _ = write!(out, ",grad{k}");
    }
    for k in 1..=d {
        let _ = write!(out, ",proj{k}");
    }
    out.push('\n');
    for q in &results {
        let _ = write!(out, "{},{},{},{}", q.distance, q.phase, q.segment_index, q.t_local);
        for v in q.gradient.iter().chain(&q.projection) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

pub fn grid(a: GridArgs) -> CliResult {
    let field = load_field(&a.model)?.field;
    let b = parse_floats("bounds", &a.bounds)?;
    let bounds: [f64; 4] = b
        .try_into()
        .map_err(|_| usage("--bounds takes four numbers: xmin,xmax,ymin,ymax"))?;
    let (nx, ny) = a
        .resolution
        .split_once(['x', 'X', ','])
        .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)))
        .ok_or_else(|| usage(format!("--resolution: expected NXxNY, got {:?}", a.resolution)))?;
    let mut spec = GridSpec::new(bounds, nx, ny);
    match (&a.slice_axes, &a.slice_fixed) {
        (Some(axes), fixed) => {
            let ax = parse_counts("slice-axes", axes)?;
            let [i, j] = ax[..] else {
                return Err(usage("--slice-axes takes two axis indices"));
            };
            let fixed = match fixed {
                Some(f) => parse_floats("slice-fixed", f)?,
                None => Vec::new(),
            };
            spec = spec.with_slice((i, j), fixed);
        }
        (None, Some(_)) => return Err(usage("--slice-fixed needs --slice-axes")),
        (None, None) => {}
    }
    let rows = export_field_grid(&field, &spec)?;
    let json = match a.format {
        Some(GridFormat::Json) => true,
        Some(GridFormat::Csv) => false,
        None => a.out.as_deref().is_some_and(is_json),
    };
    let text = if json { grid_to_json(&spec, &rows) } else { grid_to_csv(&rows) };
    emit(a.out.as_deref(), &text)
}

pub fn rollout(a: RolloutArgs) -> CliResult {
    let field = load_field(&a.model)?.field;
    let x0 = parse_floats("start", &a.start)?;
    let integrator: Integrator = a.integrator.parse().map_err(|e: Error| usage(e.to_string()))?;
    let mut cfg = DynamicsConfig::for_field(&field, a.lambda);
    cfg.max_steps = a.steps;
    cfg.integrator = integrator;
    if let Some(h) = a.step_size {
        cfg.step_size = h;
    }
    let system = DynamicalSystem::new(&field, cfg)?;
    let trace = system.rollout(&x0)?;
    println!(
        "steps {}, converged {}, final distance {:e}",
        trace.steps_taken,
        trace.converged,
        trace.final_distance().unwrap_or(f64::NAN)
    );
    let Some(out) = a.out.as_deref() else {
        return Ok(());
    };
    let text = if is_json(out) {
        let mut s = serde_json::to_string(&trace).map_err(Error::from)?;
        s.push('\n');
        s
    } else {
        let d = field.dim();
        let mut s = String::from("step");
        for k in 1..=d {
            let _ = write!(s, ",x{k}");
        }
        s.push_str(",distance,lyapunov,phase,converged\n");
        let last = trace.states.len() - 1;
        for (k, x) in trace.states.iter().enumerate() {
            let _ = write!(s, "{k}");
            for v in x {
                let _ = write!(s, ",{v}");
            }
            let converged = k == last && trace.converged;
            let _ = writeln!(
                s,
                ",{},{},{},{}",
                trace.distances[k], trace.lyapunov[k], trace.phases[k], u8::from(converged)
            );
        }
        s
    };
    write_atomic(out, text.as_bytes())?;
    Ok(())
}

fn load_dataset(dir: &Path) -> CliResult<Vec<Trajectory>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("json"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Run(Error::Domain(format!(
            "no .csv or .json trajectories in {}",
            dir.display()
        ))));
    }
    files
        .iter()
        .map(|p| load_trajectory(p, None).map_err(Failure::from))
        .collect()
}

fn print_report(report: &BenchReport) {
    println!("{:<20} {:>4} {:>14} {:>14} {:>7}", "method", "K", "mean", "std", "failed");
    for r in &report.rows {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "{:<20} {:>4} {:>14} {:>14} {:>7}",
            r.method.name(),
            r.n_params,
            fmt(r.mean),
            fmt(r.std),
            r.failures.len()
        );
    }
}

pub fn bench_encoding(a: EncodingArgs) -> CliResult {
    let dataset = match (&a.data_dir, a.synthetic) {
        (Some(dir), _) => load_dataset(dir)?,
        (None, Some(n)) if n > 0 => random_smooth_curves(n, 1000, a.seed),
        (None, Some(_)) => return Err(usage("--synthetic needs a positive count")),
        (None, None) => return Err(usage("give --data-dir or --synthetic N")),
    };
    let params = parse_counts("params", &a.params)?;
    let methods = match &a.methods {
        Some(m) => m
            .split(',')
            .map(|s| s.trim().parse::<BasisKind>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(e.to_string()))?,
        None => BasisKind::ALL.to_vec(),
    };
    let report = run_encoding_benchmark(&dataset, &methods, &params)?;
    print_report(&report);
    if let Some(out) = a.out.as_deref() {
        let text = if is_json(out) {
            report.to_json()? + "\n"
        } else {
            report.encoding_csv()
        };
        write_atomic(out, text.as_bytes())?;
    }
    Ok(())
}

pub fn bench_timing(a: TimingArgs) -> CliResult {
    let cfg = TimingConfig {
        segment_counts: parse_counts("segments", &a.segments)?,
        dims: parse_counts("dims", &a.dims)?,
        n_points: a.points,
        repetitions: a.repetitions,
        seed: a.seed,
    };
    let rows = run_timing_benchmark(&cfg)?;
    let report = BenchReport {
        rows: Vec::new(),
        timing: rows,
        notes: Vec::new(),
    };
    let csv = report.timing_csv();
    print!("{csv}");
    if let Some(out) = a.out.as_deref() {
        let text = if is_json(out) { report.to_json()? + "\n" } else { csv };
        write_atomic(out, text.as_bytes())?;
    }
    Ok(())
}

pub fn gradient_study(a: GradientStudyArgs) -> CliResult {
    let spline = match &a.model {
        Some(p) => load_model(p)?,
        None => fit_for_dynamics(&s_shape(400), 8),
    };
    let mid: Vec<f64> = {
        let (s, e) = (spline.start(), spline.end());
        s.iter().zip(e).map(|(p, q)| 0.5 * (p + q)).collect()
    };
    let default_end = |sign: f64| {
        let mut p = mid.clone();
        p[0] += sign * spline.scale();
        p
    };
    let start = match &a.from {
        Some(s) => parse_floats("from", s)?,
        None => default_end(-1.0),
    };
    let end = match &a.to {
        Some(s) => parse_floats("to", s)?,
        None => default_end(1.0),
    };
    let study = gradient_instability_study(
        &spline,
        &GradientStudyConfig {
            start,
            end,
            n_probe: a.probes,
            k_numerical: a.samples,
        },
    )?;
    println!(
        "analytic max jump {:.4} deg, nearest-sample (K={}) max jump {:.4} deg, max disagreement {:.4} deg",
        study.analytic_max_jump_deg, study.k_numerical, study.numerical_max_jump_deg, study.max_disagreement_deg
    );
    if let Some(out) = a.out.as_deref() {
        let mut s = serde_json::to_string_pretty(&study).map_err(Error::from)?;
        s.push('\n');
        write_atomic(out, s.as_bytes())?;
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> CliResult {
    let field = match &a.model {
        Some(p) => Some(Arc::new(load_field(p)?.field)),
        None => None,
    };
    if let Some(dir) = &a.record {
        std::fs::create_dir_all(dir)?;
    }
    let options = ServeOptions {
        host: a.host,
        port: a.port,
        rate: a.rate,
        transport: match a.transport {
            TransportArg::Tcp => Transport::Tcp,
            TransportArg::Ws => Transport::WebSocket,
        },
        record: a.record,
    };
    let server = Server::bind(field, options)?;
    eprintln!("listening on {}", server.local_addr()?);
    server.run()?;
    Ok(())
}
