//! Third-order ODEs `y''' = F(x, y, y', y'')` on the second jet space with
//! coordinates `(x, y, p, q)`: contact invariants, the change of chart from
//! the car, numerical solutions, cycle fitting and the contact projective
//! connection of equations cubic in `q`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, Matrix4};

use crate::car::{car_coframe, CarConfig, CarParams};
use crate::distribution::VectorField;
use crate::integrate::{rk4, StepError};
use crate::jet::{Chart, EvalError, Expr, Jet, ParseError, ScalarField};

/// `F(x, y, p, q)` of the equation `y''' = F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrderOde {
    f: ScalarField,
}

/// Right-hand side `3pq²/(1+p²)` of the car's equation.
pub const CAR_ODE: &str = "3*p*q^2/(1+p^2)";

impl ThirdOrderOde {
    /// Panics if `f` is not over the chart `(x, y, p, q)`.
    pub fn new(f: ScalarField) -> Self {
        assert_eq!(f.chart(), &Chart::jet(), "F must be a function of (x, y, p, q)");
        Self { f }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::new(ScalarField::parse(text, &Chart::jet())?))
    }

    pub fn car() -> Self {
        Self::parse(CAR_ODE).expect("car equation parses")
    }

    pub fn rhs(&self) -> &ScalarField {
        &self.f
    }

    pub fn eval(&self, pt: &JetPoint) -> Result<f64, EvalError> {
        self.f.eval(&pt.to_array())
    }

    pub fn jet(&self, pt: &JetPoint, order: usize) -> Result<Jet, EvalError> {
        self.f.eval_jet(&pt.to_array(), order)
    }
}

/// A point `(x, y, p = y', q = y'')` of the second jet space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetPoint {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
}

impl JetPoint {
    pub const fn new(x: f64, y: f64, p: f64, q: f64) -> Self {
        Self { x, y, p, q }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.p, self.q]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("configuration outside the principal branch |alpha|, |beta| < pi/2")]
    OutOfBranch,
    #[error("chart is singular at this configuration")]
    SingularChart,
    #[error("F is not a polynomial of degree at most 3 in q (fourth q-derivative {chern:e})")]
    NotPolynomial { chern: f64 },
    #[error(transparent)]
    Flow(#[from] StepError<EvalError>),
}

/// `X3 = ∂q` and the total derivative `X4 = ∂x + p∂y + q∂p + F∂q`.
pub fn ode_fields(ode: &ThirdOrderOde) -> (VectorField, VectorField) {
    let c = Chart::jet();
    let x3 = VectorField::coordinate(&c, 3);
    let x4 = VectorField::new(c, [Expr::Const(1.0), Expr::Var(2), Expr::Var(3), ode.f.expr().clone()]);
    (x3, x4)
}

/// `Σ v^j ∂_j g` as a jet one order below the lower input.
fn directional(v: &[Jet; 4], g: &Jet) -> Jet {
    let n = g.order().min(v[0].order());
    let mut acc = &v[0].truncate(n - 1) * &g.derivative(0);
    for j in 1..4 {
        acc = acc + &v[j].truncate(n - 1) * &g.derivative(j);
    }
    acc
}

/// `W[F] = 9 X4(X4(X3F)) - 27 X4(F_p) - 18 X3F X4(X3F) + 18 X3F F_p
/// + 4 (X3F)³ + 54 F_y`.
pub fn wunschmann(ode: &ThirdOrderOde, pt: &JetPoint) -> Result<f64, EvalError> {
    let base = pt.to_array();
    let f = ode.jet(pt, 3)?;
    let x4 = [
        Jet::constant(base, 3, 1.0),
        Jet::variable(base, 3, 2),
        Jet::variable(base, 3, 3),
        f.clone(),
    ];
    let fq = f.derivative(3);
    let fp = f.derivative(2);
    let x4_fq = directional(&x4, &fq);
    let x4_x4_fq = directional(&x4, &x4_fq).value();
    let x4_fp = directional(&x4, &fp).value();
    let (fq, fp, x4_fq) = (fq.value(), fp.value(), x4_fq.value());
    let fy = f.partial(&[0, 1, 0, 0]);
    Ok(9.0 * x4_x4_fq - 27.0 * x4_fp - 18.0 * fq * x4_fq + 18.0 * fq * fp + 4.0 * fq.powi(3) + 54.0 * fy)
}

/// `C[F] = ∂⁴F/∂q⁴`.
pub fn chern_invariant(ode: &ThirdOrderOde, pt: &JetPoint) -> Result<f64, EvalError> {
    Ok(ode.jet(pt, 4)?.partial(&[0, 0, 0, 4]))
}

fn in_branch(q: &CarConfig) -> bool {
    q.alpha.abs() < FRAC_PI_2 && q.beta.abs() < FRAC_PI_2
}

/// `p = tan α`, `q = -ℓ⁻¹ tan β sec³ α`.
pub fn chart_car_to_jet(q: &CarConfig, params: &CarParams) -> Result<JetPoint, OdeError> {
    if !in_branch(q) {
        return Err(OdeError::OutOfBranch);
    }
    let sec = 1.0 / q.alpha.cos();
    Ok(JetPoint::new(
        q.x,
        q.y,
        q.alpha.tan(),
        -q.beta.tan() * sec.powi(3) / params.ell(),
    ))
}

/// Inverse of [`chart_car_to_jet`] on the principal branch.
pub fn chart_jet_to_car(pt: &JetPoint, params: &CarParams) -> CarConfig {
    let alpha = pt.p.atan();
    let beta = (-params.ell() * pt.q / (1.0 + pt.p * pt.p).powf(1.5)).atan();
    CarConfig::new(pt.x, pt.y, alpha, beta)
}

/// `A = A4 A3 A2 A1`, the coframe change taking the car coframe to the
/// contact coframe.
pub fn normalization_matrix(q: &CarConfig, params: &CarParams) -> Matrix4<f64> {
    let l = params.ell();
    let (sa, ca) = q.alpha.sin_cos();
    let (sb, cb) = q.beta.sin_cos();
    let (ta, tb) = (sa / ca, sb / cb);
    let (seca, secb) = (1.0 / ca, 1.0 / cb);
    let a1 = Matrix4::from_diagonal(&nalgebra::Vector4::new(l * seca, 1.0, 1.0, 1.0));
    #[rustfmt::skip]
    let a2 = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        -tb * ta * seca / l, -secb * seca * seca, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    #[rustfmt::skip]
    let a3 = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, -3.0 * seca * ta * tb / l, -seca.powi(3) * secb * secb / l, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    #[rustfmt::skip]
    let a4 = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        -0.5 * cb * cb * (2.0 * q.alpha).sin(), 0.5 * l * ca.powi(3) * (2.0 * q.beta).sin(), 0.0, l * ca * cb,
    );
    a4 * a3 * a2 * a1
}

/// The normalized car coframe in the cobasis `(dx, dy, dp, dq)`.
///
/// Rows are `ω¹..ω⁴`; for the car these are `dy - p dx`, `dp - q dx`,
/// `dq - F dx` and `dx`.
pub fn normalize_car_coframe(q: &CarConfig, params: &CarParams) -> Result<[[f64; 4]; 4], OdeError> {
    if !in_branch(q) {
        return Err(OdeError::SingularChart);
    }
    let l = params.ell();
    let (sa, ca) = q.alpha.sin_cos();
    let (sb, cb) = q.beta.sin_cos();
    let w = Matrix4::from_fn(|i, j| car_coframe(q, params)[i][j]);
    let normalized = normalization_matrix(q, params) * w;
    // Jacobian of (x, y, p, q) with respect to (x, y, α, β).
    let sec = 1.0 / ca;
    let mut jac = Matrix4::identity();
    jac[(2, 2)] = sec * sec;
    jac[(3, 2)] = -3.0 * (sb / cb) * sec.powi(3) * (sa / ca) / l;
    jac[(3, 3)] = -sec.powi(3) / (cb * cb * l);
    let inv = jac.try_inverse().ok_or(OdeError::SingularChart)?;
    let rows = normalized * inv;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| rows[(i, j)])))
}

/// The contact coframe `(dy - p dx, dp - q dx, dq - F dx, dx)`.
pub fn contact_coframe(ode: &ThirdOrderOde, pt: &JetPoint) -> Result<[[f64; 4]; 4], EvalError> {
    let f = ode.eval(pt)?;
    Ok([
        [-pt.p, 1.0, 0.0, 0.0],
        [-pt.q, 0.0, 1.0, 0.0],
        [-f, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0],
    ])
}

/// RK4 solution of `(x, y, p, q)' = (1, p, q, F)` over `x_span`.
pub fn solve_ode(
    ode: &ThirdOrderOde,
    initial: &JetPoint,
    x_span: f64,
    steps: usize,
) -> Result<Vec<JetPoint>, StepError<EvalError>> {
    assert!(steps >= 1, "need at least one step");
    let traj = rk4(
        |_, s: &[f64; 4]| Ok([1.0, s[2], s[3], ode.f.eval(s)?]),
        initial.to_array(),
        0.0,
        x_span / steps as f64,
        steps,
    )?;
    Ok(traj.into_iter().map(JetPoint::from_array).collect())
}

/// Best cycle `ν(x²+y²) - 2ξx - 2ηy + μ = 0` through planar points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleFit {
    pub nu: f64,
    pub xi: f64,
    pub eta: f64,
    pub mu: f64,
    /// Largest `|row · v|` with `v = (ν, -2ξ, -2η, μ)` of unit length.
    pub residual: f64,
}

/// Total least squares on rows `(x²+y², x, y, 1)`.
pub fn fit_cycle(points: &[[f64; 2]]) -> CycleFit {
    assert!(points.len() >= 4, "need at least four points");
    let m = DMatrix::from_fn(points.len(), 4, |r, c| {
        let [x, y] = points[r];
        match c {
            0 => x * x + y * y,
            1 => x,
            2 => y,
            _ => 1.0,
        }
    });
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four singular values");
    let v = vt.row(k).transpose();
    let residual = (&m * &v).amax();
    CycleFit {
        nu: v[0],
        xi: -0.5 * v[1],
        eta: -0.5 * v[2],
        mu: v[3],
        residual,
    }
}

/// Sample offsets in `q` at which the fourth q-derivative must vanish.
const Q_SAMPLE: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Threshold on `|C[F]|` for treating `F` as cubic in `q`.
pub const CHERN_TOL: f64 = 1e-9;

fn ensure_cubic(ode: &ThirdOrderOde, base: [f64; 3]) -> Result<(), OdeError> {
    for q in Q_SAMPLE {
        let c = chern_invariant(ode, &JetPoint::new(base[0], base[1], base[2], q))?;
        if c.abs() > CHERN_TOL {
            return Err(OdeError::NotPolynomial { chern: c });
        }
    }
    Ok(())
}

fn q_coefficients(ode: &ThirdOrderOde, base: [f64; 3]) -> Result<[f64; 4], EvalError> {
    let j = ode.jet(&JetPoint::new(base[0], base[1], base[2], 0.0), 3)?;
    Ok(std::array::from_fn(|k| j.coefficient(&[0, 0, 0, k as u8])))
}

/// `(A0, A1, A2, A3)` with `F = A3 q³ + A2 q² + A1 q + A0` at `(x, y, p)`.
pub fn extract_q_polynomial(ode: &ThirdOrderOde, base: [f64; 3]) -> Result<[f64; 4], OdeError> {
    ensure_cubic(ode, base)?;
    Ok(q_coefficients(ode, base)?)
}

/// Connection coefficients in the frame `(∂y, ∂x + ∂y, ∂p)`; the pair of
/// lower indices `(2,3)` stands for the symmetric `Γ^i_23 = Γ^i_32`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConnectionCoeffs {
    pub g2_22: f64,
    pub g2_23: f64,
    pub g2_33: f64,
    pub g3_22: f64,
    pub g3_23: f64,
    pub g3_33: f64,
}

impl ConnectionCoeffs {
    /// `Γ²₃₃q³ + (2Γ²₂₃ - Γ³₃₃)q² + (Γ²₂₂ - 2Γ³₂₃)q - Γ³₂₂`.
    pub fn reconstruct(&self, q: f64) -> f64 {
        ((self.g2_33 * q + (2.0 * self.g2_23 - self.g3_33)) * q + (self.g2_22 - 2.0 * self.g3_23)) * q - self.g3_22
    }

    /// Geodesic accelerations `(ẍ, p̈)` for velocity `(ẋ, ṗ)`.
    pub fn acceleration(&self, xd: f64, pd: f64) -> [f64; 2] {
        [
            -(self.g2_22 * xd * xd + 2.0 * self.g2_23 * xd * pd + self.g2_33 * pd * pd),
            -(self.g3_22 * xd * xd + 2.0 * self.g3_23 * xd * pd + self.g3_33 * pd * pd),
        ]
    }
}

/// Torsion-free connection on `(x, y, p)` whose contact geodesics project
/// the solutions of an equation cubic in `q`, in the gauge
/// `Γ³₃₃ = Γ³₂₃ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveConnection {
    ode: ThirdOrderOde,
}

/// Build the connection after checking `C[F] = 0` along `q` at each base.
pub fn contact_projective_connection(
    ode: &ThirdOrderOde,
    bases: &[[f64; 3]],
) -> Result<ProjectiveConnection, OdeError> {
    for b in bases {
        ensure_cubic(ode, *b)?;
    }
    Ok(ProjectiveConnection { ode: ode.clone() })
}

impl ProjectiveConnection {
    pub fn coeffs(&self, base: [f64; 3]) -> Result<ConnectionCoeffs, EvalError> {
        let [a0, a1, a2, a3] = q_coefficients(&self.ode, base)?;
        Ok(ConnectionCoeffs {
            g2_22: a1,
            g2_23: 0.5 * a2,
            g2_33: a3,
            g3_22: -a0,
            g3_23: 0.0,
            g3_33: 0.0,
        })
    }

    /// RK4 geodesic with state `(x, y, p, ẋ, ṗ)` and `ẏ = p ẋ`.
    pub fn geodesic(
        &self,
        start: [f64; 3],
        velocity: [f64; 2],
        t: f64,
        steps: usize,
    ) -> Result<Vec<[f64; 5]>, StepError<EvalError>> {
        assert!(steps >= 1, "need at least one step");
        rk4(
            |_, s: &[f64; 5]| {
                let g = self.coeffs([s[0], s[1], s[2]])?;
                let [xdd, pdd] = g.acceleration(s[3], s[4]);
                Ok([s[3], s[2] * s[3], s[4], xdd, pdd])
            },
            [start[0], start[1], start[2], velocity[0], velocity[1]],
            0.0,
            t / steps as f64,
            steps,
        )
    }
}
