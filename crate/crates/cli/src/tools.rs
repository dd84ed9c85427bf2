use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use cargeom::car::{
    execute_maneuver, integral_curve_x4, plan_parallel_park, CarConfig, CarError, CarParams, Control, Maneuver,
    Segment, Trajectory,
};
use cargeom::lie_sphere::{circle_to_quadric, incident, polar_form, OrientedCircle};
use cargeom::ode::{chern_invariant, wunschmann, JetPoint, ThirdOrderOde};
use cargeom::sample::{SampleRng, JET_BOX};
use clap::ValueEnum;
use serde::Serialize;

use crate::report::{Check, Tolerances};
use crate::CliError;

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    pub mean: f64,
}

impl Stats {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            max_abs: values.iter().fold(0.0, |m, v| m.max(v.abs())),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InvariantStats {
    pub ode: String,
    pub points: usize,
    /// Points where either invariant could not be evaluated.
    pub evaluation_errors: usize,
    pub wunschmann: Stats,
    pub chern: Stats,
}

/// `W` and `C` at random jet points; the checks ask whether each vanishes.
pub fn invariants(
    text: &str,
    points: usize,
    rng: &mut SampleRng,
    tol: &Tolerances,
) -> Result<(Vec<Check>, InvariantStats), CliError> {
    let ode = ThirdOrderOde::parse(text).map_err(|e| CliError::Usage(format!("--ode {text:?}: {e}")))?;
    let (mut w, mut c, mut errors) = (Vec::new(), Vec::new(), 0);
    for p in JET_BOX.sample_n(rng, points) {
        let pt = JetPoint::from_array(p);
        match (wunschmann(&ode, &pt), chern_invariant(&ode, &pt)) {
            (Ok(a), Ok(b)) => {
                w.push(a);
                c.push(b);
            }
            _ => errors += 1,
        }
    }
    let t = tol.get("invariant");
    let stats = InvariantStats {
        ode: ode.rhs().to_string(),
        points,
        evaluation_errors: errors,
        wunschmann: Stats::of(&w),
        chern: Stats::of(&c),
    };
    let check = |name: &str, s: &Stats| {
        if errors > 0 {
            Check::error(name, t)
        } else {
            Check::within(name, s.max_abs, t)
        }
    };
    let checks = vec![
        check("wunschmann_vanishes", &stats.wunschmann),
        check("chern_vanishes", &stats.chern),
    ];
    Ok((checks, stats))
}

fn write_trajectory(traj: &Trajectory, out: &Path) -> Result<(), CliError> {
    let file = File::create(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    traj.write_csv(BufWriter::new(file))
        .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

#[derive(Debug, Serialize)]
pub struct SegmentSummary {
    pub control: &'static str,
    pub duration: f64,
}

fn control_name(c: Control) -> &'static str {
    match c {
        Control::Steer => "steer",
        Control::Gas => "gas",
    }
}

#[derive(Debug, Serialize)]
pub struct ParkSummary {
    pub offset: f64,
    pub length: f64,
    pub beta0: f64,
    pub note: Option<&'static str>,
    pub segments: Vec<SegmentSummary>,
    pub predicted: [f64; 4],
    pub endpoint: [f64; 4],
    pub endpoint_error: f64,
    pub constraint_residuals: [f64; 2],
    #[serde(skip)]
    pub checks: Vec<Check>,
}

pub struct ParkArgs<'a> {
    pub offset: f64,
    pub length: f64,
    pub beta0: f64,
    pub steps: usize,
    pub out: &'a Path,
}

pub fn park(args: &ParkArgs, tol: &Tolerances) -> Result<ParkSummary, CliError> {
    let params = CarParams::new(args.length).map_err(|e| CliError::Usage(e.to_string()))?;
    let q0 = CarConfig::default();
    let plan = plan_parallel_park(&q0, args.offset, &params, args.beta0, None).map_err(|e| match e {
        CarError::OffsetTooLarge { .. } | CarError::SteeringOutOfRange(_) => CliError::Usage(e.to_string()),
        other => CliError::Compute(other.to_string()),
    })?;
    let traj =
        execute_maneuver(&q0, &plan.maneuver, &params, args.steps).map_err(|e| CliError::Compute(e.to_string()))?;
    write_trajectory(&traj, args.out)?;
    let end = traj.last();
    let error = end.distance(&plan.predicted);
    let residuals = traj.max_constraint_residual(&params);
    let ctol = tol.get("constraint");
    Ok(ParkSummary {
        offset: args.offset,
        length: args.length,
        beta0: args.beta0,
        note: plan
            .maneuver
            .is_empty()
            .then_some("no-op: zero offset needs no maneuver"),
        segments: plan
            .maneuver
            .segments
            .iter()
            .map(|s| SegmentSummary {
                control: control_name(s.control),
                duration: s.duration,
            })
            .collect(),
        predicted: plan.predicted.to_array(),
        endpoint: end.to_array(),
        endpoint_error: error,
        constraint_residuals: residuals,
        checks: vec![
            Check::within("endpoint", error, tol.get("endpoint")),
            Check::within("front_constraint", residuals[1], ctol),
            Check::within("rear_constraint", residuals[0], ctol),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Field {
    Gas,
    Steer,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub field: &'static str,
    pub time: f64,
    pub steps: usize,
    pub initial: [f64; 4],
    pub final_state: [f64; 4],
    /// Endpoint of the closed-form integral curve.
    pub closed_form: [f64; 4],
    pub deviation: f64,
}

pub struct SimulateArgs<'a> {
    pub init: [f64; 4],
    pub field: Field,
    pub time: f64,
    pub steps: usize,
    pub length: f64,
    pub out: &'a Path,
}

pub fn simulate(args: &SimulateArgs) -> Result<SimulateSummary, CliError> {
    let params = CarParams::new(args.length).map_err(|e| CliError::Usage(e.to_string()))?;
    let q0 = CarConfig::from_array(args.init);
    let control = match args.field {
        Field::Gas => Control::Gas,
        Field::Steer => Control::Steer,
    };
    let m = Maneuver {
        segments: vec![Segment {
            control,
            duration: args.time,
        }],
    };
    let traj = execute_maneuver(&q0, &m, &params, args.steps).map_err(|e| CliError::Compute(e.to_string()))?;
    write_trajectory(&traj, args.out)?;
    let closed = match args.field {
        Field::Gas => integral_curve_x4(&q0, args.time, &params),
        Field::Steer => CarConfig::new(q0.x, q0.y, q0.alpha, q0.beta + args.time),
    };
    let end = traj.last();
    Ok(SimulateSummary {
        field: control_name(control),
        time: args.time,
        steps: args.steps,
        initial: args.init,
        final_state: end.to_array(),
        closed_form: closed.to_array(),
        deviation: end.distance(&closed),
    })
}

#[derive(Debug, Serialize)]
pub struct CirclesSummary {
    pub circles: Vec<[f64; 3]>,
    pub quadric: Vec<[f64; 5]>,
    pub polar: Vec<Vec<f64>>,
    pub incidence: Vec<Vec<bool>>,
    pub tol: f64,
}

/// Parse `a,b,R`.
pub fn parse_circle(text: &str) -> Result<OrientedCircle, String> {
    let v = parse_floats::<3>(text)?;
    Ok(OrientedCircle::new(v[0], v[1], v[2]))
}

/// Parse `N` comma-separated finite numbers.
pub fn parse_floats<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {:?}", text));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
        if !o.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

pub fn circles(cs: &[OrientedCircle], tol: &Tolerances) -> CirclesSummary {
    let t = tol.get("incidence");
    let qs: Vec<_> = cs.iter().map(circle_to_quadric).collect();
    CirclesSummary {
        circles: cs.iter().map(|c| [c.a, c.b, c.r]).collect(),
        quadric: qs.iter().map(|q| q.0).collect(),
        polar: qs
            .iter()
            .map(|a| qs.iter().map(|b| polar_form(a, b)).collect())
            .collect(),
        incidence: qs
            .iter()
            .map(|a| qs.iter().map(|b| incident(a, b, t).unwrap_or(false)).collect())
            .collect(),
        tol: t,
    }
}
