//! Oriented circles, lines and points of the plane as points of the
//! projective quadric `ξ² + η² - ζ² - μν = 0`, with oriented tangency as
//! vanishing of the polar form.

/// Relative threshold for quadric membership and stratum tests.
pub const QUADRIC_TOL: f64 = 1e-10;

/// `ξ² + η² - ζ² - μν`.
pub fn quadratic_form(v: &[f64; 5]) -> f64 {
    let [xi, eta, zeta, mu, nu] = *v;
    xi * xi + eta * eta - zeta * zeta - mu * nu
}

/// Homogeneous coordinates `[ξ : η : ζ : μ : ν]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricPoint(pub [f64; 5]);

/// Circle with center `(a, b)` and signed radius `r`; positive radii run
/// counterclockwise and `r = 0` is a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedCircle {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    Circle,
    Line,
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LieSphereError {
    #[error("point is not on the quadric (normalized Q = {q:e})")]
    NotOnQuadric { q: f64 },
    #[error("all homogeneous coordinates vanish")]
    Zero,
    #[error("cycle is imaginary (xi^2 + eta^2 - mu nu = {disc:e})")]
    Imaginary { disc: f64 },
}

impl OrientedCircle {
    pub const fn new(a: f64, b: f64, r: f64) -> Self {
        Self { a, b, r }
    }
}

impl QuadricPoint {
    /// Scaled so the largest component has absolute value one.
    pub fn normalized(&self) -> Result<[f64; 5], LieSphereError> {
        let m = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if m == 0.0 {
            return Err(LieSphereError::Zero);
        }
        Ok(self.0.map(|c| c / m))
    }

    pub fn q(&self) -> f64 {
        quadratic_form(&self.0)
    }

    /// The circle of a point with `ν ≠ 0`.
    pub fn to_circle(&self) -> Option<OrientedCircle> {
        let [xi, eta, zeta, _, nu] = self.0;
        (nu != 0.0).then(|| OrientedCircle::new(xi / nu, eta / nu, zeta / nu))
    }
}

/// `(a, b, R, a² + b² - R², 1)`.
pub fn circle_to_quadric(c: &OrientedCircle) -> QuadricPoint {
    QuadricPoint([c.a, c.b, c.r, c.a * c.a + c.b * c.b - c.r * c.r, 1.0])
}

/// Stratum of a quadric point: lines have `ν = 0`, points `ζ = 0`.
pub fn classify(qp: &QuadricPoint) -> Result<CycleKind, LieSphereError> {
    let v = qp.normalized()?;
    let q = quadratic_form(&v);
    if q.abs() > QUADRIC_TOL {
        return Err(LieSphereError::NotOnQuadric { q });
    }
    Ok(if v[4].abs() <= QUADRIC_TOL {
        CycleKind::Line
    } else if v[2].abs() <= QUADRIC_TOL {
        CycleKind::Point
    } else {
        CycleKind::Circle
    })
}

/// Polarization `ξ₁ξ₂ + η₁η₂ - ζ₁ζ₂ - ½(μ₁ν₂ + μ₂ν₁)` of the quadratic form.
pub fn polar_form(q1: &QuadricPoint, q2: &QuadricPoint) -> f64 {
    let [x1, e1, z1, m1, n1] = q1.0;
    let [x2, e2, z2, m2, n2] = q2.0;
    x1 * x2 + e1 * e2 - z1 * z2 - 0.5 * (m1 * n2 + m2 * n1)
}

/// Oriented tangency: `|B| ≤ tol` on max-abs normalized representatives.
pub fn incident(q1: &QuadricPoint, q2: &QuadricPoint, tol: f64) -> Result<bool, LieSphereError> {
    let a = QuadricPoint(q1.normalized()?);
    let b = QuadricPoint(q2.normalized()?);
    Ok(polar_form(&a, &b).abs() <= tol)
}

/// `(Δa)² + (Δb)² - (ΔR)²`.
pub fn minkowski_interval(c1: &OrientedCircle, c2: &OrientedCircle) -> f64 {
    let (da, db, dr) = (c1.a - c2.a, c1.b - c2.b, c1.r - c2.r);
    da * da + db * db - dr * dr
}

/// Complete the cycle `ν(x²+y²) - 2ξx - 2ηy + μ = 0` to a quadric point,
/// with `ζ = ±√(ξ² + η² - μν)` according to `orientation`.
pub fn solution_to_cycle(
    xi: f64,
    eta: f64,
    mu: f64,
    nu: f64,
    orientation: Orientation,
) -> Result<QuadricPoint, LieSphereError> {
    let scale = [xi, eta, mu, nu].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Err(LieSphereError::Zero);
    }
    let disc = xi * xi + eta * eta - mu * nu;
    if disc < -QUADRIC_TOL * scale * scale {
        return Err(LieSphereError::Imaginary { disc });
    }
    let zeta = disc.max(0.0).sqrt();
    let zeta = match orientation {
        Orientation::Positive => zeta,
        Orientation::Negative => -zeta,
    };
    Ok(QuadricPoint([xi, eta, zeta, mu, nu]))
}
