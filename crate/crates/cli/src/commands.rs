use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use scallop_core::dynamics::net_displacement;
use scallop_core::planner::{self, SweepRow};
use scallop_core::profiles::{ControlProfile, CostSpec};
use scallop_core::simulator::{simulate, verify, Trajectory, VerifyReport};
use scallop_core::{lq, mintime, FluidRegime, SwimmerParams};

use crate::svg;
use crate::{Common, Format, SimulateArgs, SolveArgs, SweepArgs};

pub enum Outcome {
    Verified,
    VerificationFailed(String),
}

const PARAM_KEYS: [&str; 7] = ["a", "b", "xi", "eta", "m", "m11", "m22"];

impl Common {
    fn angle(&self, v: f64) -> f64 {
        if self.degrees {
            v.to_radians()
        } else {
            v
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }

    /// Built-in defaults (or the params file), then, then `--param` overrides.
    fn swimmer(&self) -> Result<SwimmerParams> {
        let mut text = match &self.params {
            Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            None => "a = 10\nb = 0.1\nxi = 1\neta = 2\nm = 1\n".to_string(),
        };
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        for o in &self.param_overrides {
            let (k, v) = o
                .split_once('=')
                .with_context(|| format!("--param expects KEY=VALUE, got `{o}`"))?;
            let k = k.trim();
            if !PARAM_KEYS.contains(&k) {
                bail!("unknown swimmer parameter `{k}` (expected one of {})", PARAM_KEYS.join(", "));
            }
            lines.retain(|l| l.split(['=', ':']).next().map(str::trim) != Some(k));
            lines.push(format!("{k} = {}", v.trim()));
        }
        text = lines.join("\n");
        Ok(text.parse()?)
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn check_finite(pairs: &[(&str, f64)]) -> Result<()> {
    for (name, v) in pairs {
        if !v.is_finite() {
            bail!("--{name} must be a finite number, got {v}");
        }
    }
    Ok(())
}

/// Switching angle and the displacement the cycle is expected to produce.
fn resolve_target(args: &SolveArgs, p: &SwimmerParams) -> Result<(f64, f64)> {
    let theta0 = args.common.angle(args.common.theta0);
    match (args.theta1, args.dx) {
        (Some(t1), None) => {
            let theta1 = args.common.angle(t1);
            let dx = if theta1 == theta0 { 0.0 } else { net_displacement(theta0, theta1, p)? };
            Ok((theta1, dx))
        }
        (None, Some(dx)) => Ok((planner::solve_switch_angle(dx, theta0, p)?, dx)),
        _ => bail!("exactly one of --theta1 and --dx is required"),
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    #[serde(flatten)]
    solution: &'a T,
    expected_dx: f64,
    verification: VerifyReport,
}

fn simulate_and_write(common: &Common, profile: &ControlProfile, theta0: f64, p: &SwimmerParams) -> Result<Trajectory> {
    let traj = simulate(profile, p, 0.0, theta0, FluidRegime::Ideal, common.h)?;
    if common.wants(Format::Csv) {
        let dir = common.out_dir()?;
        traj.write_csv(create(dir, "trajectory.csv")?)?;
        traj.write_events_csv(create(dir, "events.csv")?)?;
    }
    Ok(traj)
}

fn outcome(rep: &VerifyReport) -> Outcome {
    if rep.pass {
        println!(
            "verified: simulated dx = {} (expected {}, |error| = {:e} <= {:e})",
            rep.achieved_dx, rep.expected_dx, rep.error, rep.tol
        );
        Outcome::Verified
    } else {
        Outcome::VerificationFailed(format!(
            "simulated dx = {}, expected {}, |error| = {:e} > {:e}",
            rep.achieved_dx, rep.expected_dx, rep.error, rep.tol
        ))
    }
}

fn validate_common(c: &Common) -> Result<()> {
    check_finite(&[("theta0", c.theta0), ("eps", c.eps), ("h", c.h), ("tol", c.tol)])?;
    if c.h <= 0.0 {
        bail!("--h must be positive");
    }
    if c.tol <= 0.0 {
        bail!("--tol must be positive");
    }
    Ok(())
}

pub fn run_min_time(args: SolveArgs) -> Result<Outcome> {
    let c = &args.common;
    validate_common(c)?;
    check_finite(&[("u0", args.u0)])?;
    let p = c.swimmer()?;
    let theta0 = c.angle(c.theta0);
    let (theta1, expected) = resolve_target(&args, &p)?;
    let sol = mintime::synthesize(theta0, theta1, c.eps)?;
    println!("theta1 = {theta1}, t1 = {}, t2 = {}, t_f = {}", sol.t1, sol.t2, sol.t_f);

    let approx = match args.k {
        Some(k) if theta0 != theta1 => {
            let a = mintime::approximate(theta0, theta1, c.eps, args.u0, k)?;
            let ks: Vec<u32> = (0..5).map(|i| k.saturating_mul(1 << i)).collect();
            let rows = mintime::convergence_report(theta0, theta1, c.eps, args.u0, &ks)?;
            Some((a, rows))
        }
        _ => None,
    };

    let traj = simulate_and_write(c, &sol.profile, theta0, &p)?;
    let rep = verify(&traj, expected, c.tol);
    if c.wants(Format::Json) {
        let dir = c.out_dir()?;
        write_json(dir, "solution.json", &Report { solution: &sol, expected_dx: expected, verification: rep })?;
        write_json(dir, "profile.json", &sol.profile)?;
        if let Some((a, _)) = &approx {
            write_json(dir, "approximation.json", a)?;
        }
    }
    if let (true, Some((_, rows))) = (c.wants(Format::Csv), &approx) {
        mintime::write_convergence_csv(rows, create(c.out_dir()?, "convergence.csv")?)?;
    }
    Ok(outcome(&rep))
}

#[derive(Serialize)]
struct Equivalence {
    identical_profile: bool,
    cost_matches_time: bool,
}

#[derive(Serialize)]
struct LqReport<'a> {
    #[serde(flatten)]
    solution: &'a lq::LqSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_zero_equivalence: Option<Equivalence>,
    expected_dx: f64,
    verification: VerifyReport,
}

pub fn run_lq(args: SolveArgs) -> Result<Outcome> {
    let c = &args.common;
    validate_common(c)?;
    check_finite(&[("u0", args.u0), ("A", args.a), ("B", args.b)])?;
    if args.a <= 0.0 || args.b < 0.0 {
        bail!("need A > 0 and B >= 0, got A = {}, B = {}", args.a, args.b);
    }
    let p = c.swimmer()?;
    let theta0 = c.angle(c.theta0);
    let (theta1, expected) = resolve_target(&args, &p)?;

    let (sol, equivalence) = if args.b == 0.0 {
        let s = lq::b_zero_synthesize(theta0, theta1, c.eps, args.a)?;
        let m = mintime::synthesize(theta0, theta1, c.eps)?;
        let j = args.a * c.eps * c.eps * m.t_f;
        let eq = Equivalence {
            identical_profile: s.profile == m.profile,
            cost_matches_time: (s.cost - j).abs() <= 1e-12 * j.abs().max(1.0),
        };
        (s, Some(eq))
    } else {
        (lq::synthesize_lq(theta0, theta1, c.eps, args.a, args.b)?, None)
    };
    println!("theta1 = {theta1}, t_f = {}, J = {}", sol.t_f, sol.cost);

    let approx = match args.k {
        Some(k) if theta0 != theta1 => Some(lq::approximate_lq(&sol, args.u0, k)?),
        _ => None,
    };

    let traj = simulate_and_write(c, &sol.profile, theta0, &p)?;
    let rep = verify(&traj, expected, c.tol);
    if c.wants(Format::Json) {
        let dir = c.out_dir()?;
        let report = LqReport {
            solution: &sol,
            b_zero_equivalence: equivalence,
            expected_dx: expected,
            verification: rep,
        };
        write_json(dir, "solution.json", &report)?;
        write_json(dir, "profile.json", &sol.profile)?;
        if let Some(a) = &approx {
            write_json(dir, "approximation.json", a)?;
        }
    }
    Ok(outcome(&rep))
}

#[derive(Serialize)]
struct SweepSummary {
    dx: f64,
    theta0: f64,
    eps: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    n_max: u32,
    min_j_n: f64,
    argmin_n: u32,
    j1_plus_one: f64,
    bound_holds: bool,
    total_time_increasing: bool,
    j_n_increasing: bool,
    max_verification_error: f64,
}

fn strictly_increasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] > w[0])
}

pub fn run_sweep(args: SweepArgs) -> Result<Outcome> {
    let c = &args.common;
    validate_common(c)?;
    check_finite(&[("dx", args.dx), ("A", args.a), ("B", args.b)])?;
    let p = c.swimmer()?;
    let theta0 = c.angle(c.theta0);
    let spec = CostSpec::quadratic(args.a, args.b)?;
    let rows = planner::sweep(args.dx, theta0, &p, c.eps, &spec, args.n_max)?;

    let mut worst: Option<VerifyReport> = None;
    for r in &rows {
        let profile = planner::cycle_profile(theta0, r.theta1, c.eps, &spec)?;
        let traj = simulate(&profile, &p, 0.0, theta0, FluidRegime::Ideal, c.h)?;
        let rep = verify(&traj, args.dx / f64::from(r.n), c.tol);
        if worst.is_none_or(|w| rep.error > w.error) {
            worst = Some(rep);
        }
    }
    let worst = worst.expect("sweep returns at least one row");

    let (argmin_n, min_j_n) = rows
        .iter()
        .map(|r| (r.n, r.j_n))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let j1_plus_one = rows[0].j_n + 1.0;
    let summary = SweepSummary {
        dx: args.dx,
        theta0,
        eps: c.eps,
        a: args.a,
        b: args.b,
        n_max: args.n_max,
        min_j_n,
        argmin_n,
        j1_plus_one,
        bound_holds: min_j_n <= j1_plus_one,
        total_time_increasing: strictly_increasing(rows.iter().map(|r| r.total_time)),
        j_n_increasing: strictly_increasing(rows.iter().map(|r| r.j_n)),
        max_verification_error: worst.error,
    };
    println!(
        "{} rows; min J^n = {min_j_n} at n = {argmin_n} (bound J^1 + 1 = {j1_plus_one})",
        rows.len()
    );

    let dir = c.out_dir()?;
    if c.wants(Format::Csv) {
        planner::write_sweep_csv(&rows, create(dir, "sweep.csv")?)?;
    }
    if c.wants(Format::Json) {
        write_json(dir, "sweep_summary.json", &summary)?;
    }
    if c.wants(Format::Svg) {
        let pts = |f: fn(&SweepRow) -> f64| rows.iter().map(|r| (f64::from(r.n), f(r))).collect::<Vec<_>>();
        fs::write(dir.join("time.svg"), svg::line_plot("Total time", "n", "time", &pts(|r| r.total_time)))?;
        fs::write(dir.join("cost.svg"), svg::line_plot("Cost J^n", "n", "J^n", &pts(|r| r.j_n)))?;
    }
    Ok(outcome(&worst))
}

pub fn run_simulate(args: SimulateArgs) -> Result<Outcome> {
    let c = &args.common;
    validate_common(c)?;
    check_finite(&[("x0", args.x0)])?;
    let p = c.swimmer()?;
    let theta0 = c.angle(c.theta0);
    let w0 = FluidRegime::try_from(args.w0)?;
    let text = fs::read_to_string(&args.profile).with_context(|| format!("reading {}", args.profile.display()))?;
    let profile: ControlProfile =
        serde_json::from_str(&text).with_context(|| format!("invalid profile {}", args.profile.display()))?;
    let traj = simulate(&profile, &p, args.x0, theta0, w0, c.h)?;
    if c.wants(Format::Csv) {
        let dir = c.out_dir()?;
        traj.write_csv(create(dir, "trajectory.csv")?)?;
        traj.write_events_csv(create(dir, "events.csv")?)?;
    }
    let rep = verify(&traj, args.dx.unwrap_or(traj.displacement()), c.tol);
    println!("{}", serde_json::to_string_pretty(&rep)?);
    Ok(if args.dx.is_some() { outcome(&rep) } else { Outcome::Verified })
}
