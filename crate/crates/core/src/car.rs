//! The kinematic car: configuration space `(x, y, α, β)`, its frame
//! `X1..X4`, the dual coframe, closed-form integral curves of the gas field
//! and a parallel-parking planner built from steering and gas segments.

use std::f64::consts::FRAC_PI_2;
use std::io;

use crate::distribution::{flow, Point, SplitDistribution, VectorField};
use crate::integrate::StepError;
use crate::jet::{Chart, EvalError};

/// Tolerance below which `β` counts as zero for the closed-form curves.
pub const STRAIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CarError {
    #[error("car length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("steering angle must be zero at the start of a maneuver, got {0}")]
    SteeringNotZero(f64),
    #[error("steering amplitude {0} outside (0, pi/2)")]
    SteeringOutOfRange(f64),
    #[error("offset {offset} exceeds the reachable maximum {max}")]
    OffsetTooLarge { offset: f64, max: f64 },
    #[error("straight-line motion has no finite helix axis")]
    Straight,
    #[error(transparent)]
    Flow(#[from] StepError<EvalError>),
}

/// Position `(x, y)`, chassis heading `α` and front-wheel angle `β`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CarConfig {
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl CarConfig {
    pub const fn new(x: f64, y: f64, alpha: f64, beta: f64) -> Self {
        Self { x, y, alpha, beta }
    }

    pub fn to_array(self) -> Point {
        [self.x, self.y, self.alpha, self.beta]
    }

    pub fn from_array(p: Point) -> Self {
        Self::new(p[0], p[1], p[2], p[3])
    }

    /// Largest coordinate difference, with angles compared mod 2π.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max(angle_diff(self.alpha, other.alpha).abs())
            .max(angle_diff(self.beta, other.beta).abs())
    }
}

/// `a - b` reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    if d > std::f64::consts::PI {
        d - tau
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarParams {
    ell: f64,
}

impl CarParams {
    pub fn new(ell: f64) -> Result<Self, CarError> {
        if ell.is_finite() && ell > 0.0 {
            Ok(Self { ell })
        } else {
            Err(CarError::InvalidLength(ell))
        }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }
}

impl Default for CarParams {
    fn default() -> Self {
        Self { ell: 1.0 }
    }
}

/// The car frame `(X1, X2, X3, X4)`; `X3 = ∂β` steers, `X4` drives.
pub fn car_fields(params: &CarParams) -> [VectorField; 4] {
    let c = Chart::car();
    let l = params.ell;
    let f = |comps: [String; 4]| VectorField::parse(&c, comps.each_ref().map(String::as_str)).expect("car field");
    [
        f([
            format!("-{l:?}*sin(alpha)"),
            format!("{l:?}*cos(alpha)"),
            "0".into(),
            "0".into(),
        ]),
        f([
            format!("-{l:?}*sin(beta)*cos(alpha)"),
            format!("-{l:?}*sin(beta)*sin(alpha)"),
            "-cos(beta)".into(),
            "0".into(),
        ]),
        VectorField::coordinate(&c, 3),
        f([
            format!("{l:?}*cos(beta)*cos(alpha)"),
            format!("{l:?}*cos(beta)*sin(alpha)"),
            "-sin(beta)".into(),
            "0".into(),
        ]),
    ]
}

/// Steering-wheel space `Dw = span(X3)` and gas space `Dg = span(X4)`.
pub fn car_split(params: &CarParams) -> SplitDistribution {
    let [_, _, x3, x4] = car_fields(params);
    SplitDistribution::new(x3, x4)
}

/// Rows `ω¹..ω⁴` in the cobasis `(dx, dy, dα, dβ)`, dual to `X1..X4`.
pub fn car_coframe(q: &CarConfig, params: &CarParams) -> [[f64; 4]; 4] {
    let l = params.ell;
    let (sa, ca) = q.alpha.sin_cos();
    let (sb, cb) = q.beta.sin_cos();
    [
        [-sa / l, ca / l, 0.0, 0.0],
        [-sb * ca / l, -sb * sa / l, -cb, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [cb * ca / l, cb * sa / l, -sb, 0.0],
    ]
}

/// Point reached after time `t` along the unit-speed flow of `X4`.
///
/// `β` is constant; `α` decreases at rate `sin β₀` and `(x, y)` runs along
/// a circle of radius `ℓ cot β₀`, or a straight line when `β₀ = 0`.
pub fn integral_curve_x4(q0: &CarConfig, t: f64, params: &CarParams) -> CarConfig {
    let l = params.ell;
    let (sb, cb) = q0.beta.sin_cos();
    if sb.abs() < STRAIGHT_TOL {
        let v = l * cb;
        return CarConfig::new(
            q0.x + t * v * q0.alpha.cos(),
            q0.y + t * v * q0.alpha.sin(),
            q0.alpha,
            q0.beta,
        );
    }
    let r = l * cb / sb;
    let alpha = q0.alpha - t * sb;
    CarConfig::new(
        q0.x - r * (alpha.sin() - q0.alpha.sin()),
        q0.y + r * (alpha.cos() - q0.alpha.cos()),
        alpha,
        q0.beta,
    )
}

/// Center of the circle traced by `(x, y)` under `X4`, and the signed
/// radius `ℓ cot β₀`.
pub fn helix_axis_and_radius(q0: &CarConfig, params: &CarParams) -> Result<([f64; 2], f64), CarError> {
    let (sb, cb) = q0.beta.sin_cos();
    if sb.abs() < STRAIGHT_TOL {
        return Err(CarError::Straight);
    }
    let r = params.ell * cb / sb;
    Ok(([q0.x + r * q0.alpha.sin(), q0.y - r * q0.alpha.cos()], r))
}

/// Residuals of the rear-wheel and front-wheel rolling constraints for a
/// velocity `v = (ẋ, ẏ, α̇, β̇)` at `q`.
pub fn constraint_residuals(q: &CarConfig, v: &Point, params: &CarParams) -> [f64; 2] {
    let l = params.ell;
    let (sa, ca) = q.alpha.sin_cos();
    let (sd, cd) = (q.alpha - q.beta).sin_cos();
    let rear = v[0] * sa - v[1] * ca;
    let front = (v[0] - l * v[2] * sa) * sd - (v[1] + l * v[2] * ca) * cd;
    [rear, front]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    /// Flow of `X3`: `β̇ = 1`.
    Steer,
    /// Flow of `X4`; negative durations drive backwards.
    Gas,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub control: Control,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Maneuver {
    pub segments: Vec<Segment>,
}

impl Maneuver {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Output of the parallel-parking planner.
#[derive(Debug, Clone, PartialEq)]
pub struct ParkingPlan {
    pub maneuver: Maneuver,
    /// Endpoint predicted in closed form.
    pub predicted: CarConfig,
    /// Net displacement along the initial heading.
    pub drift: f64,
    /// Sweep angle of each of the two arcs.
    pub phi: f64,
    /// Turning radius `ℓ cot β₀`.
    pub radius: f64,
}

/// Shift the car sideways by `offset` (positive moves it to its right) with
/// two backward arcs of equal sweep.
///
/// The arcs use steering `±β₀` and sweep `φ = arccos(1 - |s|/(2R))` each,
/// which leaves the car displaced `-2R sin φ` along its heading. With
/// `advance = Some(d)` a final straight segment makes the net longitudinal
/// motion exactly `d`; with `None` the drift is reported instead.
pub fn plan_parallel_park(
    q_init: &CarConfig,
    offset: f64,
    params: &CarParams,
    beta0: f64,
    advance: Option<f64>,
) -> Result<ParkingPlan, CarError> {
    if q_init.beta.abs() > STRAIGHT_TOL {
        return Err(CarError::SteeringNotZero(q_init.beta));
    }
    if !(beta0 > 0.0 && beta0 < FRAC_PI_2) {
        return Err(CarError::SteeringOutOfRange(beta0));
    }
    let l = params.ell;
    let radius = l / beta0.tan();
    let max = 2.0 * radius;
    if !offset.is_finite() || offset.abs() > max {
        return Err(CarError::OffsetTooLarge { offset, max });
    }
    let (sa, ca) = q_init.alpha.sin_cos();
    let endpoint = |along: f64| {
        CarConfig::new(
            q_init.x + along * ca + offset * sa,
            q_init.y + along * sa - offset * ca,
            q_init.alpha,
            0.0,
        )
    };
    let mut segments = Vec::new();
    if offset == 0.0 {
        let drift = advance.unwrap_or(0.0);
        if drift != 0.0 {
            segments.push(Segment {
                control: Control::Gas,
                duration: drift / l,
            });
        }
        return Ok(ParkingPlan {
            maneuver: Maneuver { segments },
            predicted: endpoint(drift),
            drift,
            phi: 0.0,
            radius,
        });
    }
    let phi = (1.0 - offset.abs() / (2.0 * radius)).acos();
    let sigma = offset.signum();
    let back = -phi / beta0.sin();
    let steer = |d: f64| Segment {
        control: Control::Steer,
        duration: d,
    };
    let gas = |d: f64| Segment {
        control: Control::Gas,
        duration: d,
    };
    segments.extend([
        steer(sigma * beta0),
        gas(back),
        steer(-2.0 * sigma * beta0),
        gas(back),
        steer(sigma * beta0),
    ]);
    let arc_drift = -2.0 * radius * phi.sin();
    let drift = match advance {
        Some(d) => {
            segments.push(gas((d - arc_drift) / l));
            d
        }
        None => arc_drift,
    };
    Ok(ParkingPlan {
        maneuver: Maneuver { segments },
        predicted: endpoint(drift),
        drift,
        phi,
        radius,
    })
}

/// Sampled path: `times[k]` is the elapsed time (sum of absolute segment
/// durations) at `states[k]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    /// Index ranges `[start, end]` (inclusive) of each executed segment.
    pub segments: Vec<(Control, f64, usize, usize)>,
}

impl Trajectory {
    pub fn last(&self) -> CarConfig {
        CarConfig::from_array(*self.states.last().expect("non-empty trajectory"))
    }

    /// Write `t,x,y,alpha,beta` rows with 17 significant digits.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y", "alpha", "beta"])?;
        for (t, q) in self.times.iter().zip(&self.states) {
            let row = [*t, q[0], q[1], q[2], q[3]].map(|v| format!("{v:.16e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Largest absolute value of either rolling constraint, with velocities
    /// taken by five-point central differences inside each segment.
    pub fn max_constraint_residual(&self, params: &CarParams) -> [f64; 2] {
        let mut worst = [0.0f64; 2];
        for &(_, duration, start, end) in &self.segments {
            if end - start < 4 {
                continue;
            }
            let h = duration / (end - start) as f64;
            let s = &self.states;
            for k in start + 2..=end - 2 {
                let v: Point = std::array::from_fn(|i| {
                    (-s[k + 2][i] + 8.0 * s[k + 1][i] - 8.0 * s[k - 1][i] + s[k - 2][i]) / (12.0 * h)
                });
                let r = constraint_residuals(&CarConfig::from_array(s[k]), &v, params);
                worst[0] = worst[0].max(r[0].abs());
                worst[1] = worst[1].max(r[1].abs());
            }
        }
        worst
    }
}

/// Run each segment with `steps` RK4 steps of its field.
pub fn execute_maneuver(
    q0: &CarConfig,
    maneuver: &Maneuver,
    params: &CarParams,
    steps: usize,
) -> Result<Trajectory, CarError> {
    assert!(steps >= 1, "need at least one step per segment");
    let [_, _, x3, x4] = car_fields(params);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![q0.to_array()],
        segments: Vec::new(),
    };
    for seg in &maneuver.segments {
        let field = match seg.control {
            Control::Steer => &x3,
            Control::Gas => &x4,
        };
        let start = traj.states.len() - 1;
        let t0 = *traj.times.last().expect("non-empty");
        let path = flow(field, traj.states[start], seg.duration, steps)?;
        let dt = seg.duration.abs() / steps as f64;
        for (k, q) in path.into_iter().enumerate().skip(1) {
            traj.times.push(t0 + k as f64 * dt);
            traj.states.push(q);
        }
        traj.segments
            .push((seg.control, seg.duration, start, traj.states.len() - 1));
    }
    Ok(traj)
}
