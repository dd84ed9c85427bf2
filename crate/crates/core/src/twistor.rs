//! Bivectors of the symplectic 4-space `(V, ω)` with `ω = e¹∧e⁴ + e²∧e³`:
//! the embedding of the quadric in `ω⊥`, Lagrangian planes, incidence of
//! lines and planes, the induced action of `Sp(2,R)` on the quadric and
//! stabilizer dimensions.

use nalgebra::{DMatrix, Matrix4, Matrix5, Vector4};
use num_traits::{Num, ToPrimitive, Zero};
use rand::Rng;

use crate::linalg::{numerical_rank, RANK_REL_TOL};
use crate::sp2r::{self, Q};

/// Tolerance for `AᵀΩA = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// `Ω` as a float matrix.
pub fn omega_matrix() -> Matrix4<f64> {
    let w = sp2r::omega();
    Matrix4::from_fn(|i, j| w[i][j] as f64)
}

/// Antisymmetric components `Y^{μν}` with 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bivector(pub [[f64; 4]; 4]);

/// Components of the element of `ω⊥` with parameters `(ξ, η, ζ, μ, ν)`:
///
/// `(η+ζ) e₁∧e₂ + μ e₁∧e₃ + ν e₄∧e₂ + (η-ζ) e₄∧e₃ + ξ (e₁∧e₄ - e₂∧e₃)`.
pub fn embed_components<T>(v: [T; 5]) -> [[T; 4]; 4]
where
    T: Copy + Num + std::ops::Neg<Output = T>,
{
    let [xi, eta, zeta, mu, nu] = v;
    let mut y = [[T::zero(); 4]; 4];
    let mut set = |i: usize, j: usize, c: T| {
        y[i][j] = c;
        y[j][i] = -c;
    };
    set(0, 1, eta + zeta);
    set(0, 2, mu);
    set(3, 1, nu);
    set(3, 2, eta - zeta);
    set(0, 3, xi);
    set(1, 2, -xi);
    y
}

/// Coefficient of `e₁∧e₂∧e₃∧e₄` in `Y∧Y`: `2(Y¹²Y³⁴ - Y¹³Y²⁴ + Y¹⁴Y²³)`.
pub fn wedge_square_components<T>(y: &[[T; 4]; 4]) -> T
where
    T: Copy + Num + std::ops::Neg<Output = T>,
{
    let pf = y[0][1] * y[2][3] - y[0][2] * y[1][3] + y[0][3] * y[1][2];
    pf + pf
}

/// `ξ² + η² - ζ² - μν` over any ring.
pub fn quadratic_form_generic<T>(v: [T; 5]) -> T
where
    T: Copy + Num + std::ops::Neg<Output = T>,
{
    let [xi, eta, zeta, mu, nu] = v;
    xi * xi + eta * eta - zeta * zeta - mu * nu
}

/// Exact check of `Y∧Y = -2Q` for the embedded rational 5-tuple.
pub fn wedge_square_identity_exact(v: [Q; 5]) -> bool {
    let y = embed_components(v);
    wedge_square_components(&y) == -(quadratic_form_generic(v) + quadratic_form_generic(v))
}

impl Bivector {
    pub fn wedge(a: &[f64; 4], b: &[f64; 4]) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i] * b[j] - a[j] * b[i])
        }))
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.0[i][j])
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
    }

    /// `ω_{μν} Y^{μν}`.
    pub fn omega_contraction(&self) -> f64 {
        let w = sp2r::omega();
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += w[i][j] as f64 * self.0[i][j];
            }
        }
        s
    }

    pub fn wedge_square_coeff(&self) -> f64 {
        wedge_square_components(&self.0)
    }

    /// Parameters `(ξ, η, ζ, μ, ν)` of an element of `ω⊥`.
    pub fn quadric_coords(&self) -> [f64; 5] {
        let y = &self.0;
        [
            y[0][3],
            0.5 * (y[0][1] - y[2][3]),
            0.5 * (y[0][1] + y[2][3]),
            y[0][2],
            -y[1][3],
        ]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub fn omega_perp_embed(v: [f64; 5]) -> Bivector {
    Bivector(embed_components(v))
}

/// `ω(a, b) = aᵀ Ω b`.
pub fn symplectic_pairing(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (Vector4::from(*a).transpose() * omega_matrix() * Vector4::from(*b))[(0, 0)]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TwistorError {
    #[error("spanning vectors are linearly dependent")]
    Degenerate,
    #[error("plane is not Lagrangian (omega = {0:e})")]
    NotLagrangian(f64),
    #[error("matrix is not symplectic (residual {0:e})")]
    NotSymplectic(f64),
    #[error("line does not lie in the plane")]
    NotIncident,
}

/// Relative threshold for degeneracy and the Lagrangian condition.
pub const PLANE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianPlane {
    pub y1: [f64; 4],
    pub y2: [f64; 4],
}

fn norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl LagrangianPlane {
    pub fn new(y1: [f64; 4], y2: [f64; 4]) -> Result<Self, TwistorError> {
        let scale = norm(&y1) * norm(&y2);
        let w = Bivector::wedge(&y1, &y2).norm();
        if scale == 0.0 || w <= PLANE_TOL * scale {
            return Err(TwistorError::Degenerate);
        }
        let om = symplectic_pairing(&y1, &y2);
        if om.abs() > PLANE_TOL * scale {
            return Err(TwistorError::NotLagrangian(om));
        }
        Ok(Self { y1, y2 })
    }

    pub fn bivector(&self) -> Bivector {
        Bivector::wedge(&self.y1, &self.y2)
    }
}

/// `Y1 = (η+ζ) e₁ + ξ e₃ + e₄`, `Y2 = -ξ e₁ + e₂ + (η-ζ) e₃`.
pub fn plane_from_params(xi: f64, eta: f64, zeta: f64) -> LagrangianPlane {
    LagrangianPlane {
        y1: [eta + zeta, 0.0, xi, 1.0],
        y2: [-xi, 1.0, eta - zeta, 0.0],
    }
}

fn det4(cols: [&[f64; 4]; 4]) -> f64 {
    Matrix4::from_fn(|i, j| cols[j][i]).determinant()
}

/// `P₁ ∩ P₂` is at least a line iff `(Y1∧Y2)∧(Y1'∧Y2') = 0`, measured
/// relative to the norms of the two plane bivectors.
pub fn planes_intersect_in_line(p1: &LagrangianPlane, p2: &LagrangianPlane, tol: f64) -> bool {
    let d = det4([&p1.y1, &p1.y2, &p2.y1, &p2.y2]);
    d.abs() <= tol * p1.bivector().norm() * p2.bivector().norm()
}

/// Components of `v∧Y1∧Y2`, one per omitted basis index.
pub fn trivector_components(v: &[f64; 4], p: &LagrangianPlane) -> [f64; 4] {
    std::array::from_fn(|omit| {
        let rows: Vec<usize> = (0..4).filter(|&r| r != omit).collect();
        let m = nalgebra::Matrix3::from_fn(|i, j| [v, &p.y1, &p.y2][j][rows[i]]);
        m.determinant()
    })
}

/// `v∧Y1∧Y2 = 0`, relative to `|v| · |Y1∧Y2|`.
pub fn line_in_plane(v: &[f64; 4], p: &LagrangianPlane, tol: f64) -> bool {
    let scale = norm(v) * p.bivector().norm();
    trivector_components(v, p).iter().all(|c| c.abs() <= tol * scale)
}

/// Matrix of `v ↦ v∧Y1∧Y2`; its kernel is the plane.
pub fn line_incidence_map(p: &LagrangianPlane) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for (r, c) in trivector_components(&e, p).into_iter().enumerate() {
            m[(r, k)] = c;
        }
    }
    m
}

/// A 4×4 matrix with `AᵀΩA = Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticMatrix(Matrix4<f64>);

impl SymplecticMatrix {
    pub fn new(a: Matrix4<f64>) -> Result<Self, TwistorError> {
        let w = omega_matrix();
        let r = (a.transpose() * w * a - w).amax();
        if r > SYMPLECTIC_TOL * a.amax().powi(2).max(1.0) {
            return Err(TwistorError::NotSymplectic(r));
        }
        Ok(Self(a))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `exp(E)` for `E` in the algebra with coefficients `a` in the basis.
    pub fn exp_of(a: &[f64; sp2r::DIM]) -> Result<Self, TwistorError> {
        let mut e = Matrix4::zeros();
        for (k, c) in a.iter().enumerate() {
            e += basis_matrix(k + 1) * *c;
        }
        Self::new(e.exp())
    }

    /// Exponential of an algebra element with coefficients uniform in
    /// `[-scale, scale]`.
    pub fn random(rng: &mut impl Rng, scale: f64) -> Self {
        let a: [f64; sp2r::DIM] = std::array::from_fn(|_| rng.random_range(-scale..=scale));
        Self::exp_of(&a).expect("exponential of an algebra element is symplectic")
    }
}

fn to_f64(m: &sp2r::Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j].to_f64().expect("small rational"))
}

/// Basis element `E_i` (1-based) of the algebra as a float matrix.
pub fn basis_matrix(i: usize) -> Matrix4<f64> {
    to_f64(&sp2r::basis_element(i))
}

/// Matrix of `Q` in the coordinates `(ξ, η, ζ, μ, ν)`.
pub fn quadric_gram() -> Matrix5<f64> {
    let mut g = Matrix5::zeros();
    g[(0, 0)] = 1.0;
    g[(1, 1)] = 1.0;
    g[(2, 2)] = -1.0;
    g[(3, 4)] = -0.5;
    g[(4, 3)] = -0.5;
    g
}

/// Action `Y ↦ A Y Aᵀ` on `ω⊥` in the coordinates `(ξ, η, ζ, μ, ν)`.
pub fn induced_quadric_action(a: &SymplecticMatrix) -> Matrix5<f64> {
    let a = a.matrix();
    let mut m = Matrix5::zeros();
    for k in 0..5 {
        let mut v = [0.0; 5];
        v[k] = 1.0;
        let y = omega_perp_embed(v).matrix();
        let image = Bivector::from_matrix(&(a * y * a.transpose())).quadric_coords();
        for (r, c) in image.into_iter().enumerate() {
            m[(r, k)] = c;
        }
    }
    m
}

/// `MᵀGM - G` in max norm.
pub fn quadric_preservation_residual(m: &Matrix5<f64>) -> f64 {
    let g = quadric_gram();
    (m.transpose() * g * m - g).amax()
}

/// `ω_{[μν} ω_{ρσ]} - ⅓ ε_{μνρσ}` vanishes for every index quadruple.
pub fn omega_antisymmetrization_identity() -> bool {
    let w = sp2r::omega();
    let perms = permutations4();
    let third = Q::new(1, 3);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let idx = [a, b, c, d];
                    let mut s = Q::zero();
                    for (p, sign) in &perms {
                        let i = |k: usize| idx[p[k]];
                        s += Q::from_integer(sign * w[i(0)][i(1)] * w[i(2)][i(3)]);
                    }
                    let lhs = s / Q::from_integer(24);
                    let rhs = third * Q::from_integer(levi_civita(idx));
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn levi_civita(idx: [usize; 4]) -> i64 {
    let mut sign = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            match idx[i].cmp(&idx[j]) {
                std::cmp::Ordering::Equal => return 0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

fn permutations4() -> Vec<([usize; 4], i64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let s = levi_civita(p);
                    if s != 0 {
                        out.push((p, s));
                    }
                }
            }
        }
    }
    out
}

/// Objects whose projective stabilizer in the algebra is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flag {
    Plane(LagrangianPlane),
    Line([f64; 4]),
    Pair { line: [f64; 4], plane: LagrangianPlane },
}

/// Rows `E(c) Y + Y E(c)ᵀ - λ Y = 0` in the unknowns `(c_1..c_10, λ)`,
/// with `λ` in column `scale_col`.
fn plane_rows(p: &LagrangianPlane, scale_col: usize, ncols: usize) -> Vec<Vec<f64>> {
    let y = p.bivector().matrix();
    let y = y / y.amax();
    let mut rows = vec![vec![0.0; ncols]; 16];
    for k in 0..sp2r::DIM {
        let e = basis_matrix(k + 1);
        let img = e * y + y * e.transpose();
        for r in 0..16 {
            rows[r][k] = img[(r / 4, r % 4)];
        }
    }
    for r in 0..16 {
        rows[r][scale_col] = -y[(r / 4, r % 4)];
    }
    rows
}

/// Rows `E(c) v - λ v = 0`.
fn line_rows(v: &[f64; 4], scale_col: usize, ncols: usize) -> Vec<Vec<f64>> {
    let n = norm(v);
    let v = Vector4::from(*v) / n;
    let mut rows = vec![vec![0.0; ncols]; 4];
    for k in 0..sp2r::DIM {
        let img = basis_matrix(k + 1) * v;
        for r in 0..4 {
            rows[r][k] = img[r];
        }
    }
    for r in 0..4 {
        rows[r][scale_col] = -v[r];
    }
    rows
}

/// Dimension of `{E ∈ sp(2,R) : E preserves the object up to scale}`, read
/// off the numeric kernel of the linear system with one scale unknown per
/// defining tensor.
pub fn stabilizer_dimension(object: &Flag) -> Result<usize, TwistorError> {
    let d = sp2r::DIM;
    let rows = match object {
        Flag::Plane(p) => {
            LagrangianPlane::new(p.y1, p.y2)?;
            plane_rows(p, d, d + 1)
        }
        Flag::Line(v) => {
            if norm(v) == 0.0 {
                return Err(TwistorError::Degenerate);
            }
            line_rows(v, d, d + 1)
        }
        Flag::Pair { line, plane } => {
            LagrangianPlane::new(plane.y1, plane.y2)?;
            if norm(line) == 0.0 {
                return Err(TwistorError::Degenerate);
            }
            if !line_in_plane(line, plane, PLANE_TOL) {
                return Err(TwistorError::NotIncident);
            }
            let mut r = plane_rows(plane, d, d + 2);
            r.extend(line_rows(line, d + 1, d + 2));
            r
        }
    };
    let ncols = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    Ok(ncols - numerical_rank(&m, RANK_REL_TOL))
}

/// Standard representatives: the plane `span(e₄, e₂)` and the line `e₄`.
pub fn standard_flag() -> ([f64; 4], LagrangianPlane) {
    let plane = LagrangianPlane::new([0.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 0.0]).expect("Lagrangian");
    ([0.0, 0.0, 0.0, 1.0], plane)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_examples() {
        let y = omega_perp_embed([0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(y, Bivector::wedge(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]));
        let y = omega_perp_embed([1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(y.0[0][3], 1.0);
        assert_eq!(y.0[1][2], -1.0);
        assert_eq!(y.omega_contraction(), 0.0);
        assert_eq!(y.wedge_square_coeff(), -2.0);
        assert_eq!(omega_perp_embed([0.0, 0.0, 0.0, 1.0, 0.0]).wedge_square_coeff(), 0.0);
        let v = [0.3, -1.2, 0.7, 2.0, -0.4];
        let back = omega_perp_embed(v).quadric_coords();
        for i in 0..5 {
            assert!((back[i] - v[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn plane_examples() {
        let p = plane_from_params(0.0, 0.0, 0.0);
        assert_eq!(p.y1, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.y2, [0.0, 1.0, 0.0, 0.0]);
        let p = plane_from_params(1.0, 0.0, 1.0);
        assert_eq!(p.y1, [1.0, 0.0, 1.0, 1.0]);
        assert_eq!(symplectic_pairing(&p.y1, &p.y2), 0.0);
        assert!(planes_intersect_in_line(&plane_from_params(0.0, 0.0, 0.0), &p, 1e-12));
        assert!(!planes_intersect_in_line(
            &plane_from_params(0.0, 0.0, 0.0),
            &plane_from_params(1.0, 0.0, 0.0),
            1e-12
        ));
        assert!(planes_intersect_in_line(&p, &p, 1e-12));
        assert_eq!(
            LagrangianPlane::new([1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]),
            Err(TwistorError::NotLagrangian(1.0))
        );
        assert_eq!(
            LagrangianPlane::new([1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0]),
            Err(TwistorError::Degenerate)
        );
    }

    #[test]
    fn lines_in_planes() {
        let p = plane_from_params(0.4, -0.3, 0.9);
        let v: [f64; 4] = std::array::from_fn(|i| p.y1[i] + 3.0 * p.y2[i]);
        assert!(line_in_plane(&v, &p, 1e-12));
        let (_, std_plane) = standard_flag();
        assert!(!line_in_plane(&[1.0, 0.0, 0.0, 0.0], &std_plane, 1e-12));
        let m = line_incidence_map(&p);
        assert_eq!(4 - numerical_rank(&m, RANK_REL_TOL), 2);
    }

    #[test]
    fn induced_action_examples() {
        let id = SymplecticMatrix::new(Matrix4::identity()).unwrap();
        assert_eq!(induced_quadric_action(&id), Matrix5::identity());
        let neg = SymplecticMatrix::new(-Matrix4::identity()).unwrap();
        assert_eq!(induced_quadric_action(&neg), Matrix5::identity());
        let d = SymplecticMatrix::new(Matrix4::from_diagonal(&Vector4::new(2.0, 3.0, 1.0 / 3.0, 0.5))).unwrap();
        assert!(quadric_preservation_residual(&induced_quadric_action(&d)) < 1e-12);
        assert!(matches!(
            SymplecticMatrix::new(Matrix4::from_diagonal(&Vector4::new(2.0, 1.0, 1.0, 1.0))),
            Err(TwistorError::NotSymplectic(_))
        ));
    }

    #[test]
    fn stabilizers() {
        let (line, plane) = standard_flag();
        assert_eq!(stabilizer_dimension(&Flag::Plane(plane)), Ok(7));
        assert_eq!(stabilizer_dimension(&Flag::Line(line)), Ok(7));
        assert_eq!(stabilizer_dimension(&Flag::Pair { line, plane }), Ok(6));
        assert_eq!(
            stabilizer_dimension(&Flag::Pair {
                line: [1.0, 0.0, 0.0, 0.0],
                plane
            }),
            Err(TwistorError::NotIncident)
        );
    }

    #[test]
    fn antisymmetrized_omega() {
        assert!(omega_antisymmetrization_identity());
        assert!(wedge_square_identity_exact([
            Q::new(1, 2),
            Q::new(-3, 1),
            Q::new(2, 7),
            Q::new(5, 3),
            Q::new(-1, 4)
        ]));
    }
}
