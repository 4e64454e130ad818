use std::path::Path;

use contactkit::flows::{integrate, Clamped, ContactField, TrajectoryStatus, VectorField};
use contactkit::integrability::{
    angle_solve, coisotropy_check, darboux_verify, involution_check, rank_check, ray_project, tangency_check,
    verify_section, AngleSolveConfig, Samples, Sign, RAY_MEMBERSHIP_TOL,
};
use contactkit::symplectic::project_vector;
use contactkit::{Expr, Region, SympChart, SympSystem};
use serde_json::json;

use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult, EXIT_NUMERICAL};
use crate::report::{Check, Comparison, Outcome, Report};

/// Seed used when neither the command line, the config nor the environment
/// supplies one.
pub const DEFAULT_SEED: u64 = 0;
pub const SEED_ENV: &str = "CONTACT_SEED";

/// `--seed` beats the config's `seed`, which beats `$CONTACT_SEED`.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Complete integrability of the configured system: contact condition,
/// involution of the integrals and rank of their differential.
pub fn cmd_check(loaded: &LoadedConfig, seed: u64) -> CliResult<Outcome> {
    let system = &loaded.system;
    let tol = &loaded.config.tolerances;
    let samples = Samples::from_region(system.region(), loaded.config.samples, seed);

    let contact = system.chart().contact_condition_check(&samples.points);
    let mut checks = vec![Check {
        name: "contact_condition".into(),
        pass: contact.pass,
        residual: contact.min_abs_det.is_finite().then_some(contact.min_abs_det),
        tolerance: contact.threshold,
        comparison: Comparison::Above,
        samples: contact.samples,
        seed: Some(seed),
        worst_point: Some(contact.worst_point.clone()),
        note: None,
        detail: Some(json!({ "failed_evaluations": contact.failed_evaluations })),
    }];
    if contact.pass {
        checks.push(involution_check(system, &samples, tol.involution)?.into());
    } else {
        checks.push(Check::skipped(
            "involution",
            tol.involution,
            Comparison::Below,
            "the bracket is undefined where the contact condition fails",
        ));
    }
    checks.push(rank_check(system, &samples, tol.rank)?.into());
    Ok(Outcome::from_report(Report::new("check", loaded, Some(seed), checks)))
}

fn parse_lambda(loaded: &LoadedConfig, lambda: &[f64]) -> CliResult<()> {
    let k = loaded.config.n + 1;
    if lambda.len() != k {
        return Err(CliError::Input(format!("--lambda needs {k} values, got {}", lambda.len())));
    }
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(CliError::Input("--lambda values must be finite".into()));
    }
    if lambda.iter().all(|&l| l == 0.0) {
        return Err(CliError::Input("--lambda must be nonzero".into()));
    }
    Ok(())
}

/// Projects seeds from the region onto `F^{-1}(R+ lambda)` and compares the
/// coisotropy and tangency characterizations there.
pub fn cmd_coisotropy(loaded: &LoadedConfig, lambda: &[f64], count: usize, seed: u64) -> CliResult<Outcome> {
    parse_lambda(loaded, lambda)?;
    if count == 0 {
        return Err(CliError::Input("--points must be positive".into()));
    }
    let system = &loaded.system;
    let tol = &loaded.config.tolerances;
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, s) in system.region().sample_points(count, seed).iter().enumerate() {
        match ray_project(system, lambda, s) {
            Ok(p) => {
                worst = worst.max(p.residual);
                points.push(p.x);
            }
            Err(e) => failures.push(json!({ "seed_index": i, "error": e.to_string() })),
        }
    }
    if points.is_empty() {
        return Err(CliError::Numerical(format!(
            "none of the {count} seeds could be projected onto the ray preimage"
        )));
    }
    let samples = Samples {
        seed: Some(seed),
        points,
    };
    let projection = Check::below("ray_projection", worst, RAY_MEMBERSHIP_TOL, samples.points.len(), Some(seed))
        .with_detail(json!({ "seeds": count, "failed": failures }));
    let coisotropy = coisotropy_check(system, lambda, &samples, tol.coisotropy)?;
    let tangency = tangency_check(system, lambda, &samples, tol.coisotropy)?;
    let agree = coisotropy.pass == tangency.pass;
    let rank = rank_check(system, &samples, tol.rank)?;
    let checks = vec![projection, coisotropy.into(), tangency.into(), rank.into()];
    let report = Report::new("coisotropy", loaded, Some(seed), checks)
        .with_details(json!({ "lambda": lambda, "characterizations_agree": agree }));
    Ok(Outcome::from_report(report))
}

pub struct IntegrateArgs<'a> {
    pub index: usize,
    pub x0: &'a [f64],
    pub t: f64,
    pub out: Option<&'a Path>,
    pub clamp_to_region: bool,
}

/// `max |f_a(x) f_b(x0) - f_b(x) f_a(x0)|`, relative to the sizes involved:
/// integrals in involution all dissipate at the same rate, so their ratios
/// are constant along every Hamiltonian flow of the system.
fn ratio_drift(values: &[Vec<f64>]) -> f64 {
    let v0 = &values[0];
    let mut worst: f64 = 0.0;
    for v in values {
        let scale = 1.0 + v.iter().map(|x| x.abs()).fold(0.0, f64::max) * v0.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                worst = worst.max((v[a] * v0[b] - v[b] * v0[a]).abs() / scale);
            }
        }
    }
    worst
}

fn write_csv(path: &Path, header: &[String], times: &[f64], points: &[Vec<f64>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(io)?;
    for (t, x) in times.iter().zip(points) {
        w.write_record(std::iter::once(t).chain(x).map(|v| v.to_string())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Integrates `X_{f_index}` and writes the trajectory as CSV.
pub fn cmd_integrate(loaded: &LoadedConfig, args: &IntegrateArgs) -> CliResult<Outcome> {
    let system = &loaded.system;
    let chart = system.chart();
    let k = system.integrals().len();
    if args.index >= k {
        return Err(CliError::Input(format!("--f must be below {k}, got {}", args.index)));
    }
    if args.x0.len() != chart.dim() {
        return Err(CliError::Input(format!(
            "--x0 needs {} values, got {}",
            chart.dim(),
            args.x0.len()
        )));
    }
    if !args.t.is_finite() {
        return Err(CliError::Input("--t must be finite".into()));
    }
    let field = ContactField {
        chart,
        f: &system.integrals()[args.index],
    };
    let clamped;
    let field: &dyn VectorField = if args.clamp_to_region {
        if !system.region().contains(args.x0) {
            return Err(CliError::Input("--x0 lies outside the region".into()));
        }
        clamped = Clamped {
            field,
            region: system.region(),
        };
        &clamped
    } else {
        &field
    };
    let integrator = loaded.config.integrator;
    let traj = integrate(field, args.x0, args.t, &integrator)?;
    if let Some(path) = args.out {
        let mut header = vec!["t".to_string()];
        header.extend(chart.coords().iter().cloned());
        write_csv(path, &header, &traj.times, &traj.points)?;
    }

    let values = traj
        .points
        .iter()
        .map(|x| system.values_at(x))
        .collect::<contactkit::Result<Vec<_>>>()?;
    let drift = ratio_drift(&values);
    let checks = vec![Check::below(
        "ratio_invariance",
        drift,
        loaded.config.tolerances.invariance,
        traj.len(),
        None,
    )];
    let completed = traj.status == TrajectoryStatus::Completed;
    let rejected: usize = traj.diagnostics.iter().map(|d| d.rejected).sum();
    let mut report = Report::new("integrate", loaded, None, checks).with_details(json!({
        "integral": args.index,
        "hamiltonian": system.integrals()[args.index].to_string(),
        "x0": args.x0,
        "t": args.t,
        "status": traj.status,
        "final_time": traj.final_time(),
        "final_point": traj.last(),
        "steps": traj.len() - 1,
        "rejected_steps": rejected,
        "integrator": integrator,
        "csv": args.out.map(|p| p.display().to_string()),
    }));
    if !completed {
        report.pass = false;
        return Ok(Outcome {
            report,
            exit_code: EXIT_NUMERICAL,
        });
    }
    Ok(Outcome::from_report(report))
}

/// `-r^k f`; `k = 1` is the lift.
fn lift(chart: &SympChart, f: &Expr, exponent: i32) -> CliResult<Expr> {
    if exponent == 1 {
        return Ok(chart.lift_function(f));
    }
    let fiber = &chart.coords()[chart.fiber_index()];
    Expr::parse(&format!("-({fiber}^{exponent})*({f})"), chart.coords()).map_err(|e| CliError::Input(e.to_string()))
}

/// Checks the correspondence between the contact system and its
/// symplectization on samples of `region x fiber_range`.
pub fn cmd_symplectize_verify(loaded: &LoadedConfig, count: usize, seed: u64, lift_exponent: i32) -> CliResult<Outcome> {
    if count == 0 {
        return Err(CliError::Input("--samples must be positive".into()));
    }
    let system = &loaded.system;
    let tol = &loaded.config.tolerances;
    let base = system.chart();
    let chart = SympChart::new(base.clone())?;
    let d = base.dim();
    let [r_lo, r_hi] = loaded.config.fiber_range;
    let bounds: Vec<(f64, f64)> = (0..d).map(|i| system.region().bounds(i)).chain([(r_lo, r_hi)]).collect();
    let points = Region::new(bounds)?.sample_points(count, seed);
    let fs = system.integrals();
    let lifted = fs.iter().map(|f| lift(&chart, f, lift_exponent)).collect::<CliResult<Vec<_>>>()?;

    let mut worst = [0.0_f64; 4];
    let mut worst_at: [Option<Vec<f64>>; 4] = Default::default();
    let mut bump = |i: usize, v: f64, y: &[f64]| {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if worst_at[i].is_none() || v > worst[i] {
            worst[i] = v;
            worst_at[i] = Some(y.to_vec());
        }
    };
    for y in &points {
        let (x, r) = (&y[..d], y[d]);
        let mut bracket: f64 = 0.0;
        for a in 0..fs.len() {
            for b in a + 1..fs.len() {
                let lhs = chart.poisson_bracket_at(&lifted[a], &lifted[b], y)?;
                let rhs = r * base.jacobi_bracket_at(&fs[a], &fs[b], x)?;
                bracket = bracket.max((lhs - rhs).abs());
            }
        }
        bump(0, bracket, y);
        let mut projection: f64 = 0.0;
        let mut homogeneity: f64 = 0.0;
        let mut commutator: f64 = 0.0;
        for (f, lf) in fs.iter().zip(&lifted) {
            let up = project_vector(&chart.hamiltonian_field_at(lf, y)?);
            let down = base.hamiltonian_field_at(f, x)?;
            for (u, v) in up.iter().zip(down.iter()) {
                projection = projection.max((u - v).abs());
            }
            homogeneity = homogeneity.max(chart.homogeneity_residual(lf, y, 1)?);
            for c in chart.liouville_commutator_at(lf, y)?.iter() {
                commutator = commutator.max(c.abs());
            }
        }
        bump(1, projection, y);
        bump(2, homogeneity, y);
        bump(3, commutator, y);
    }
    let names = ["bracket_correspondence", "field_projection", "homogeneity", "liouville_commutator"];
    let tols = [tol.bracket, tol.projection, tol.homogeneity, tol.liouville];
    let checks = (0..4)
        .map(|i| Check::below(names[i], worst[i], tols[i], points.len(), Some(seed)).with_worst(worst_at[i].take()))
        .collect();
    let mut details = json!({
        "identity": "{f^S, g^S} = r {f, g} with f^S = -r f",
        "fiber_range": loaded.config.fiber_range,
    });
    if lift_exponent != 1 {
        details["lift_exponent"] = json!(lift_exponent);
    }
    let report = Report::new("symplectize-verify", loaded, Some(seed), checks).with_details(details);
    Ok(Outcome::from_report(report))
}

/// Query points: a JSON array of base points (fiber `r = 1` appended) or
/// full points `(x, r)`.
pub fn load_points(path: &Path, dim: usize) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let raw: Vec<Vec<f64>> = serde_path_to_error::deserialize(de)
        .map_err(|e| {
            let at = e.path().to_string();
            CliError::Input(format!("{}: {at}: {}", path.display(), e.into_inner()))
        })?;
    raw.into_iter()
        .enumerate()
        .map(|(i, mut p)| {
            if p.len() == dim {
                p.push(1.0);
            }
            if p.len() != dim + 1 {
                return Err(CliError::Input(format!(
                    "{}: /{i}: expected {dim} or {} coordinates, found {}",
                    path.display(),
                    dim + 1,
                    p.len()
                )));
            }
            Ok(p)
        })
        .collect()
}

pub struct ActionAngleArgs<'a> {
    pub section: &'a str,
    pub points: &'a [Vec<f64>],
    pub darboux: bool,
}

/// Verifies the section, then solves for angles and actions at each point.
/// Per-point failures are recorded and make the command a numerical failure.
pub fn cmd_action_angle(loaded: &LoadedConfig, args: &ActionAngleArgs, seed: u64) -> CliResult<Outcome> {
    let (section, declared) = loaded.section(args.section)?;
    let tol = &loaded.config.tolerances;
    let system = SympSystem::new(loaded.system.clone())?;
    let param_samples = Samples::from_region(&section.domain, loaded.config.samples, seed);
    let sr = verify_section(&system, section, &param_samples, tol.section)?;
    let convention = match declared {
        Some(s) => (sr.convention == Some(s)).then_some(s),
        None => sr.convention,
    };
    let residual = match convention.or(declared) {
        Some(Sign::Plus) => sr.residual_plus,
        Some(Sign::Minus) => sr.residual_minus,
        None => sr.residual_plus.min(sr.residual_minus),
    }
    .max(sr.horizontality);
    let section_check = Check {
        pass: convention.is_some(),
        ..Check::below("section", residual, tol.section, sr.samples, sr.seed)
    }
    .with_detail(json!({
        "section": sr.section,
        "residual_plus": sr.residual_plus,
        "residual_minus": sr.residual_minus,
        "horizontality": sr.horizontality,
        "declared": declared,
        "convention": sr.convention,
    }));
    let mut checks = vec![section_check];
    let Some(convention) = convention else {
        checks.push(Check::skipped(
            "angle_solve",
            tol.angle,
            Comparison::Below,
            "the section property fails under the required sign",
        ));
        return Ok(Outcome::from_report(Report::new("action-angle", loaded, Some(seed), checks)));
    };

    let config = AngleSolveConfig {
        integrator: loaded.config.integrator,
        tol: tol.angle,
        ..AngleSolveConfig::default()
    };
    let mut results = Vec::with_capacity(args.points.len());
    let mut solved = Vec::new();
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    for (i, p) in args.points.iter().enumerate() {
        match angle_solve(&system, section, convention, p, &config) {
            Ok(r) => {
                worst = worst.max(r.residual);
                solved.push(p.clone());
                results.push(json!({ "index": i, "result": r }));
            }
            Err(e) => {
                failed += 1;
                results.push(json!({ "index": i, "point": p, "error": e.to_string() }));
            }
        }
    }
    let mut solve = Check::below("angle_solve", worst, tol.angle, args.points.len(), None)
        .with_detail(json!({ "solved": solved.len(), "failed": failed }));
    solve.pass &= failed == 0;
    checks.push(solve);
    if args.darboux && !solved.is_empty() {
        let dr = darboux_verify(&system, section, convention, &Samples::given(solved), &config, tol.darboux)?;
        checks.push(dr.contact.into());
        checks.push(dr.symplectic.into());
    }
    let report = Report::new("action-angle", loaded, Some(seed), checks).with_details(json!({
        "section": section.name,
        "convention": convention,
        "results": results,
    }));
    let mut outcome = Outcome::from_report(report);
    if failed > 0 {
        outcome.exit_code = EXIT_NUMERICAL;
    }
    Ok(outcome)
}
