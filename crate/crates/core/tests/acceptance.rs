//! Acceptance gate. Every check prints one PASS/FAIL line; the process exits
//! non-zero if any check fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splinefield::baselines::{
    build_basis, fit_basis, gradient_instability_study, reconstruction_error, run_encoding_benchmark, BasisFamily,
    BasisKind, GradientStudyConfig,
};
use splinefield::distance::{batch_query_sequential, cubic_coefficients, DistanceField, UnionField};
use splinefield::dynamics::{peak_tangent_speed, DynamicalSystem, DynamicsConfig, FieldMode, Integrator};
use splinefield::io::{load_trajectory, FieldModel};
use splinefield::roots::solve_cubic_in_unit_interval;
use splinefield::service::{replay, ClientMessage, ScriptEntry, ServerMessage, Session};
use splinefield::spline::{build_constraint_map, cubic_constraint_map, global_parameterize};
use splinefield::synthetic::{
    fit_for_dynamics, l_shape, random_points_around, random_smooth_curves, random_spline, s_shape,
};
use splinefield::{fit, FitConfig, QuadraticSpline, Trajectory};

type Outcome = Result<String, String>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn orthogonality() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut roots_checked = 0usize;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=20);
        let d = rng.gen_range(1..=10);
        let terminal = rng.gen_bool(0.5);
        let spline = random_spline(&mut rng, n, d, terminal);
        let x = random_points_around(&mut rng, &spline, 1, 0.5).pop().unwrap();
        let s2 = spline.scale() * spline.scale();
        for seg in spline.segments() {
            for t in solve_cubic_in_unit_interval(cubic_coefficients(seg, &x)) {
                if t <= 0.0 || t >= 1.0 {
                    continue;
                }
                let r: Vec<f64> = seg.point_at(t).iter().zip(&x).map(|(p, q)| p - q).collect();
                worst = worst.max(dot(&r, &seg.tangent_at(t)).abs() / s2);
                roots_checked += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        worst < 1e-7 && secs < 10.0,
        format!("{roots_checked} interior roots, max residual {worst:.2e}·scale² (< 1e-7), {secs:.2}s (< 10s)"),
    )
}

/// Dense-sampling distance oracle: exact distance to the sample set.
fn brute_force(spline: &QuadraticSpline, x: &[f64], per_segment: usize) -> f64 {
    let mut best = f64::INFINITY;
    let d = x.len();
    let mut p = vec![0.0; d];
    for seg in spline.segments() {
        for j in 0..=per_segment {
            let t = j as f64 / per_segment as f64;
            let (b0, b1, b2) = ((1.0 - t) * (1.0 - t), 2.0 * (1.0 - t) * t, t * t);
            for k in 0..d {
                p[k] = b0 * seg.w1[k] + b1 * seg.w2[k] + b2 * seg.w3[k];
            }
            best = best.min(dist(&p, x));
        }
    }
    best
}

struct OracleSet {
    splines: Vec<QuadraticSpline>,
    /// (spline index, query)
    queries: Vec<(usize, Vec<f64>)>,
}

fn oracle_set() -> OracleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let splines: Vec<QuadraticSpline> = (0..5)
        .map(|i| random_spline(&mut rng, 2 + i, 2 + i % 3, i % 2 == 0))
        .collect();
    let mut queries = Vec::new();
    for (i, s) in splines.iter().enumerate() {
        for x in random_points_around(&mut rng, s, 500, 0.5) {
            queries.push((i, x));
        }
    }
    OracleSet { splines, queries }
}

fn brute_force_oracle(set: &OracleSet) -> Outcome {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let mut below = 0usize;
    for (i, x) in &set.queries {
        let s = &set.splines[*i];
        let exact = s.query(x).distance;
        let sampled = brute_force(s, x, 100_000);
        worst = worst.max((exact - sampled).abs() / s.scale());
        if exact > sampled + 1e-12 * s.scale() {
            below += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        worst < 1e-4 && below == 0 && secs < 60.0,
        format!(
            "{} queries, max |d - oracle| {worst:.2e}·scale (< 1e-4), {below} above the sampled minimum, {secs:.1}s (< 60s)",
            set.queries.len()
        ),
    )
}

fn gradient_checks(set: &OracleSet) -> Outcome {
    let h = 1e-5;
    let mut worst_norm: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let (mut tested, mut excluded) = (0usize, 0usize);
    for (i, x) in &set.queries {
        let s = &set.splines[*i];
        let q = s.query(x);
        if q.distance < 1e-9 * s.scale() {
            continue;
        }
        worst_norm = worst_norm.max((dot(&q.gradient, &q.gradient).sqrt() - 1.0).abs());
        let mut per_seg: Vec<f64> = s.segment_distances(x).iter().map(|(d, _)| *d).collect();
        per_seg.sort_by(|a, b| a.total_cmp(b));
        let near_medial = per_seg.len() > 1 && per_seg[1] - per_seg[0] <= 10.0 * h;
        // the stencil must not straddle the curve itself
        if near_medial || q.distance <= 10.0 * h {
            excluded += 1;
            continue;
        }
        tested += 1;
        for k in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let fd = (s.distance(&xp) - s.distance(&xm)) / (2.0 * h);
            worst_fd = worst_fd.max((fd - q.gradient[k]).abs());
        }
    }
    check(
        worst_norm < 1e-9 && worst_fd < 1e-4,
        format!(
            "max |‖∇d‖-1| {worst_norm:.2e} (< 1e-9); finite differences on {tested} points ({excluded} excluded) max error {worst_fd:.2e} (< 1e-4)"
        ),
    )
}

fn projection_identity(set: &OracleSet) -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, x) in &set.queries {
        let q = set.splines[*i].query(x);
        let rebuilt: Vec<f64> = x.iter().zip(&q.gradient).map(|(a, g)| a - q.distance * g).collect();
        worst = worst.max(dist(&rebuilt, &q.projection));
    }
    check(worst < 1e-9, format!("max ‖x - d∇d - proj‖ {worst:.2e} (< 1e-9)"))
}

fn fit_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_res: f64 = 0.0;
    let mut worst_ctrl: f64 = 0.0;
    for trial in 0..40 {
        let n = rng.gen_range(1..=12);
        let d = rng.gen_range(1..=5);
        let terminal = trial % 2 == 1;
        let truth = random_spline(&mut rng, n, d, terminal);
        let m = 10 * (n + 2);
        let params = global_parameterize(None, m, n).map_err(|e| e.to_string())?;
        let pts: Vec<Vec<f64>> = params.iter().map(|s| truth.evaluate(*s).unwrap()).collect();
        let traj = Trajectory::new(pts, None).map_err(|e| e.to_string())?;
        let res = fit(&traj, &FitConfig::new(n).with_terminal_zero_velocity(terminal)).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(res.residual_sq.sqrt() / truth.scale());
        for (a, b) in res.spline.segments().iter().zip(truth.segments()) {
            for (p, q) in [(&a.w1, &b.w1), (&a.w2, &b.w2), (&a.w3, &b.w3)] {
                worst_ctrl = worst_ctrl.max(dist(p, q) / truth.scale());
            }
        }
    }
    let mut counts_ok = true;
    for n in 1..=30 {
        let open = build_constraint_map(n, false).map_err(|e| e.to_string())?;
        let closed = build_constraint_map(n, true).map_err(|e| e.to_string())?;
        counts_ok &= open.n_free() == n + 2 && open.constraint_map().shape() == (3 * n, n + 2);
        counts_ok &= closed.n_free() == n + 1;
        counts_ok &= open.constraint_map().rank(1e-9) == n + 2;
        let cubic = cubic_constraint_map(n).map_err(|e| e.to_string())?;
        counts_ok &= cubic.shape() == (4 * n, 2 * n + 2) && cubic.rank(1e-9) == 2 * n + 2;
    }
    check(
        worst_res < 1e-8 && worst_ctrl < 1e-8 && counts_ok,
        format!(
            "40 in-class fits: residual {worst_res:.2e}·scale, control points {worst_ctrl:.2e}·scale (< 1e-8); parameter counts N+2 / 2N+2 for N ≤ 30: {}",
            if counts_ok { "ok" } else { "MISMATCH" }
        ),
    )
}

fn shape_errors(kind: BasisKind, k: usize, data: &[Trajectory]) -> Result<Vec<f64>, String> {
    let fam = BasisFamily::new(kind, k).map_err(|e| e.to_string())?;
    data.iter()
        .map(|t| {
            let times = global_parameterize(t.timestamps(), t.len(), 1)?;
            let phi = build_basis(&fam, &times)?;
            let w = fit_basis(&phi, t.points())?;
            reconstruction_error(&phi, &w, t.points())
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())
}

fn table_coincidence() -> Outcome {
    let mut data = random_smooth_curves(10, 500, 404);
    data.push(s_shape(300));
    data.push(l_shape(300));
    let qs = shape_errors(BasisKind::QuadraticSpline, 3, &data)?;
    let bp = shape_errors(BasisKind::BernsteinPoly, 3, &data)?;
    let worst = qs.iter().zip(&bp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(worst <= 1e-12, format!("{} shapes, max |QS(3) - BP(3)| {worst:.2e} (≤ 1e-12)", data.len()))
}

fn table_reproduction() -> Outcome {
    let counts = [7, 12, 17, 22];
    if let Some(dir) = std::env::var_os("SPLINEFIELD_LASA_DIR") {
        let dir = PathBuf::from(dir);
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| format!("{}: {e}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json"))
            .collect();
        files.sort();
        let data = files
            .iter()
            .map(|p| load_trajectory(p, None))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let report = run_encoding_benchmark(&data, &[BasisKind::QuadraticSpline], &counts).map_err(|e| e.to_string())?;
        let targets = [0.88, 0.23, 0.11, 0.06];
        let mut ok = true;
        let mut parts = Vec::new();
        for (k, want) in counts.iter().zip(targets) {
            let got = report.row(BasisKind::QuadraticSpline, *k).and_then(|r| r.mean).unwrap_or(f64::NAN);
            ok &= (got - want).abs() <= 0.5 * want;
            parts.push(format!("K={k}: {got:.3} vs {want}"));
        }
        return check(ok, format!("{} files, {} (±50%)", data.len(), parts.join(", ")));
    }
    let data = random_smooth_curves(10, 1000, 505);
    let mut all = vec![3];
    all.extend(counts);
    let per_k: Vec<Vec<f64>> = all
        .iter()
        .map(|&k| shape_errors(BasisKind::QuadraticSpline, k, &data))
        .collect::<Result<_, _>>()?;
    let mut violations = 0;
    for shape in 0..data.len() {
        for w in per_k.windows(2) {
            if !(w[1][shape] < w[0][shape]) {
                violations += 1;
            }
        }
    }
    check(
        violations == 0,
        format!(
            "no dataset (SPLINEFIELD_LASA_DIR unset); substitute: QS error strictly decreasing over K {all:?} on 10 synthetic shapes, {violations} violations"
        ),
    )
}

fn corners(spline: &QuadraticSpline) -> Vec<Vec<f64>> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for s in spline.segments() {
        for p in [&s.w1, &s.w2, &s.w3] {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let r = [hi[0] - lo[0], hi[1] - lo[1]];
    [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)]
        .iter()
        .map(|(sx, sy)| vec![c[0] + sx * r[0], c[1] + sy * r[1]])
        .collect()
}

fn dynamics_convergence() -> Outcome {
    let t0 = Instant::now();
    let lambdas = [0.5, 1.0, 3.0];
    let mut failures = Vec::new();
    let mut worst_steps = 0;
    for (name, traj) in [("S", s_shape(400)), ("L", l_shape(400))] {
        let spline = fit_for_dynamics(&traj, 8);
        let threshold = 1e-3 * spline.scale();
        for x0 in corners(&spline) {
            let mut means = Vec::new();
            for &lambda in &lambdas {
                let cfg = DynamicsConfig::for_field(&spline, lambda);
                let ds = DynamicalSystem::new(&spline, cfg).map_err(|e| e.to_string())?;
                let trace = ds.rollout(&x0).map_err(|e| e.to_string())?;
                match trace.distances.iter().position(|d| *d < threshold) {
                    Some(k) if k <= 10_000 => worst_steps = worst_steps.max(k),
                    _ => failures.push(format!("{name} from {x0:?} λ={lambda}: min distance not below threshold")),
                }
                means.push(trace.mean_distance_over(cfg.max_steps + 1));
            }
            for (w, l) in means.windows(2).zip(lambdas.windows(2)) {
                if w[1] > w[0] {
                    failures.push(format!("{name} from {x0:?}: mean distance rises from λ={} to λ={}", l[0], l[1]));
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 30.0 {
        failures.push(format!("runtime {secs:.1}s"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("24 rollouts below 1e-3·scale within {worst_steps} steps (≤ 1e4), mean distance non-increasing in λ, {secs:.1}s (< 30s)")
        } else {
            failures.join("; ")
        },
    )
}

/// Largest curvature over a spline, by dense sampling.
fn max_curvature(spline: &QuadraticSpline) -> f64 {
    let mut kappa: f64 = 0.0;
    for seg in spline.segments() {
        let acc: Vec<f64> = (0..seg.w1.len())
            .map(|k| 2.0 * (seg.w1[k] - 2.0 * seg.w2[k] + seg.w3[k]))
            .collect();
        for j in 0..=1000 {
            let v = seg.tangent_at(j as f64 / 1000.0);
            let vv = dot(&v, &v);
            if vv < 1e-24 {
                continue;
            }
            let cross2 = (vv * dot(&acc, &acc) - dot(&v, &acc).powi(2)).max(0.0);
            kappa = kappa.max(cross2.sqrt() / vv.powf(1.5));
        }
    }
    kappa
}

fn discrete_lyapunov() -> Outcome {
    let spline = fit_for_dynamics(&s_shape(400), 8);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let starts = random_points_around(&mut rng, &spline, 100, 0.5);

    let mut attract = DynamicsConfig::for_field(&spline, 1.0);
    attract.mode = FieldMode::AttractionOnly;
    let ds = DynamicalSystem::new(&spline, attract).map_err(|e| e.to_string())?;
    let mut increases = 0;
    let mut unconverged = 0;
    for x0 in &starts {
        let trace = ds.rollout(x0).map_err(|e| e.to_string())?;
        if !trace.converged {
            unconverged += 1;
        }
        let stop = trace
            .distances
            .iter()
            .position(|d| *d < attract.convergence_distance)
            .unwrap_or(trace.distances.len() - 1);
        increases += trace.distances[..=stop].windows(2).filter(|w| !(w[1] < w[0])).count();
    }

    let full = DynamicsConfig::for_field(&spline, 1.0);
    let h = full.step_size;
    let speed = peak_tangent_speed(&spline) + 1.0;
    let c = 2.0 * max_curvature(&spline) * speed * speed;
    let ds = DynamicalSystem::new(&spline, full).map_err(|e| e.to_string())?;
    let mut worst_excess = f64::NEG_INFINITY;
    for x0 in &starts {
        let trace = ds.rollout(x0).map_err(|e| e.to_string())?;
        for w in trace.distances.windows(2) {
            worst_excess = worst_excess.max((w[1] - w[0]) / (h * h));
        }
    }
    check(
        increases == 0 && unconverged == 0 && worst_excess <= c,
        format!(
            "attraction-only: {increases} non-decreasing steps over 100 starts ({unconverged} unconverged); full system: max (d[k+1]-d[k])/h² = {worst_excess:.3} ≤ C = 2·κmax·(vmax+1)² = {c:.3}"
        ),
    )
}

fn terminal_equilibrium() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut splines: Vec<QuadraticSpline> = (0..20)
        .map(|i| random_spline(&mut rng, 1 + i % 7, 1 + i % 5, true))
        .collect();
    splines.push(fit_for_dynamics(&s_shape(300), 6));
    splines.push(fit_for_dynamics(&l_shape(300), 6));
    let mut moved = 0;
    for s in &splines {
        for integrator in [Integrator::Euler, Integrator::Rk4] {
            for lambda in [0.5, 1.0, 3.0] {
                let mut cfg = DynamicsConfig::for_field(s, lambda);
                cfg.integrator = integrator;
                let ds = DynamicalSystem::new(s, cfg).map_err(|e| e.to_string())?;
                let next = ds.step(s.end()).map_err(|e| e.to_string())?;
                if next.as_slice() != s.end() {
                    moved += 1;
                }
            }
        }
    }
    check(
        moved == 0,
        format!("{} splines × 2 integrators × 3 λ: {moved} steps moved the endpoint", splines.len()),
    )
}

fn union_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let members: Vec<QuadraticSpline> = (0..3).map(|i| random_spline(&mut rng, 3 + i, 2, i == 0)).collect();
    let union = UnionField::new(members.clone()).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    for _ in 0..1000 {
        let host = &members[rng.gen_range(0..3)];
        let x = random_points_around(&mut rng, host, 1, 1.0).pop().unwrap();
        let (q, idx) = union.query(&x);
        let ds: Vec<f64> = members.iter().map(|m| m.query(&x).distance).collect();
        let min = ds.iter().copied().fold(f64::INFINITY, f64::min);
        let first = ds.iter().position(|d| *d == min).unwrap();
        if q.distance != min || idx != first {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("M=3, 1000 queries, {mismatches} not bit-equal to the member minimum"))
}

fn timing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let spline = random_spline(&mut rng, 20, 10, false);
    let points = random_points_around(&mut rng, &spline, 2500, 0.5);
    batch_query_sequential(&spline, &points);
    let mut ms: Vec<f64> = (0..7)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(batch_query_sequential(&spline, std::hint::black_box(&points)));
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    ms.sort_by(|a, b| a.total_cmp(b));
    let median = ms[ms.len() / 2];
    check(
        median <= 100.0,
        format!("2500 queries, N=20, D=10, single thread: median {median:.2} ms, min {:.2} ms (≤ 100 ms)", ms[0]),
    )
}

fn gradient_study() -> Outcome {
    let spline = fit_for_dynamics(&s_shape(400), 8);
    // convex side of the upper bulge: no medial axis between the probes
    let cfg = |k| GradientStudyConfig {
        start: vec![0.55, 0.55],
        end: vec![0.55, 0.95],
        n_probe: 200,
        k_numerical: k,
    };
    let coarse = gradient_instability_study(&spline, &cfg(50)).map_err(|e| e.to_string())?;
    let fine = gradient_instability_study(&spline, &cfg(100_000)).map_err(|e| e.to_string())?;
    let ratio = coarse.numerical_max_jump_deg / coarse.analytic_max_jump_deg;
    check(
        ratio >= 2.0 && fine.max_disagreement_deg <= 1.0,
        format!(
            "K=50: numerical max jump {:.3}° vs analytic {:.4}° (ratio {ratio:.1} ≥ 2); K=1e5: max deviation from analytic {:.4}° (≤ 1°)",
            coarse.numerical_max_jump_deg, coarse.analytic_max_jump_deg, fine.max_disagreement_deg
        ),
    )
}

fn replay_determinism() -> Outcome {
    let spline = fit_for_dynamics(&s_shape(400), 8);
    let field = Arc::new(FieldModel::Single(spline.clone()));
    let corner = corners(&spline)[3].clone();

    // Live session: messages delivered between ticks and recorded as they arrive.
    let mut live = Session::new(Some(field.clone()));
    let mut recorded = String::new();
    let mut stream = Vec::new();
    let send = |session: &mut Session, msg: ClientMessage, out: &mut Vec<ServerMessage>, rec: &mut String| {
        let entry = ScriptEntry { at: session.clock(), message: msg };
        rec.push_str(&serde_json::to_string(&entry).unwrap());
        rec.push('\n');
        out.extend(session.handle(&entry.message));
    };
    let total = 2000;
    for clock in 0..total {
        match clock {
            0 => send(
                &mut live,
                ClientMessage::Start {
                    x0: corner.clone(),
                    lambda: Some(3.0),
                    step_size: None,
                },
                &mut stream,
                &mut recorded,
            ),
            100 => {
                let x = live.state().unwrap().to_vec();
                let q = spline.query(&x);
                let delta = q.gradient.iter().map(|g| 0.2 * g).collect();
                send(&mut live, ClientMessage::Perturb { delta }, &mut stream, &mut recorded);
            }
            900 => send(&mut live, ClientMessage::SetLambda { lambda: 1.0 }, &mut stream, &mut recorded),
            _ => {}
        }
        stream.extend(live.tick());
    }

    let script: Vec<ScriptEntry> = recorded.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let again = replay(Some(field.clone()), &script, total);
    let identical = again == stream;
    let bits_equal = identical
        && again
            .iter()
            .zip(&stream)
            .all(|(a, b)| serde_json::to_string(a).unwrap() == serde_json::to_string(b).unwrap());
    let final_distance = stream
        .iter()
        .rev()
        .find_map(|m| match m {
            ServerMessage::State { distance, .. } => Some(*distance),
            _ => None,
        })
        .unwrap_or(f64::NAN);
    let threshold = 1e-3 * field.scale();
    let states = stream.iter().filter(|m| m.is_state()).count();
    check(
        bits_equal && final_distance < threshold,
        format!(
            "{states} states, replay identical: {bits_equal}; final distance {final_distance:.2e} (< {threshold:.2e})"
        ),
    )
}

fn main() -> ExitCode {
    // libtest-style flags (e.g. --nocapture) are accepted and ignored.
    let t0 = Instant::now();
    let set = oracle_set();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("orthogonality", Box::new(orthogonality)),
        ("brute-force distance oracle", Box::new(|| brute_force_oracle(&set))),
        ("gradient checks", Box::new(|| gradient_checks(&set))),
        ("projection identity", Box::new(|| projection_identity(&set))),
        ("fit exactness", Box::new(fit_exactness)),
        ("quadratic spline K=3 equals Bernstein K=3", Box::new(table_coincidence)),
        ("encoding error reproduction", Box::new(table_reproduction)),
        ("dynamics convergence", Box::new(dynamics_convergence)),
        ("discrete Lyapunov decrease", Box::new(discrete_lyapunov)),
        ("terminal equilibrium", Box::new(terminal_equilibrium)),
        ("union exactness", Box::new(union_exactness)),
        ("batch query timing", Box::new(timing)),
        ("gradient instability study", Box::new(gradient_study)),
        ("replay determinism", Box::new(replay_determinism)),
    ];
    let mut failed = 0;
    for (name, run) in &checks {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        checks.len() - failed,
        t0.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
