//! Exact matrix model of `sp(2,R)`: the basis `E_1..E_10`, its commutator
//! table, grading, Killing form and the parabolic and nilpotent subalgebras
//! attached to the car.
//!
//! All arithmetic is over `Rational64`. Indices in the public API are
//! 1-based to match the usual labelling `E_1..E_10`.

use std::fmt;
use std::sync::LazyLock;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::symmetry::{signature, Signature, StructureConstants};

pub type Q = Rational64;
pub type Mat4 = [[Q; 4]; 4];
pub type Vec10 = [Q; DIM];

pub const DIM: usize = 10;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// The symplectic form: `Ω₁₄ = Ω₂₃ = 1`, antisymmetric.
pub fn omega() -> [[i64; 4]; 4] {
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]
}

/// Generic element with parameters `a_1..a_10` (`a[0]` is `a_1`).
///
/// ```text
///  a5    a7   a9   2a10
/// -a4    a6   a8   a9
///  a2    a3  -a6  -a7
/// -2a1   a2   a4  -a5
/// ```
pub fn generic_element(a: &Vec10) -> Mat4 {
    let a = |i: usize| a[i - 1];
    [
        [a(5), a(7), a(9), q(2) * a(10)],
        [-a(4), a(6), a(8), a(9)],
        [a(2), a(3), -a(6), -a(7)],
        [q(-2) * a(1), a(2), a(4), -a(5)],
    ]
}

/// `E_i = ∂E/∂a_i`, 1-based.
pub fn basis_element(i: usize) -> Mat4 {
    assert!((1..=DIM).contains(&i), "basis index {i} out of range");
    let mut a = [Q::zero(); DIM];
    a[i - 1] = Q::one();
    generic_element(&a)
}

pub fn basis() -> [Mat4; DIM] {
    std::array::from_fn(|i| basis_element(i + 1))
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).fold(Q::zero(), |s, k| s + a[i][k] * b[k][j])))
}

pub fn mat_commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    std::array::from_fn(|i| std::array::from_fn(|j| ab[i][j] - ba[i][j]))
}

/// Whether `EᵀΩ + ΩE = 0` exactly.
pub fn is_symplectic_algebra_element(e: &Mat4) -> bool {
    let w = omega();
    (0..4).all(|i| {
        (0..4).all(|j| {
            let s = (0..4).fold(Q::zero(), |s, k| s + e[k][i] * q(w[k][j]) + q(w[i][k]) * e[k][j]);
            s.is_zero()
        })
    })
}

/// Solve `a x = b` exactly. Returns `None` if inconsistent; free variables
/// are set to zero.
fn solve_exact(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(r, &v)| {
            let mut r = r.clone();
            r.push(v);
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for k in c..=cols {
                    let t = m[r][k];
                    m[i][k] -= f * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

/// Reduced row echelon form; returns the nonzero rows.
fn rref(mut m: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for k in c..cols {
                    let t = m[r][k];
                    m[i][k] -= f * t;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    m.truncate(r);
    m
}

/// Exact basis of `{x : a x = 0}`.
fn nullspace(a: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let red = rref(a.to_vec());
    let pivots: Vec<usize> = red
        .iter()
        .map(|row| row.iter().position(|v| !v.is_zero()).expect("nonzero row"))
        .collect();
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![Q::zero(); cols];
            x[free] = Q::one();
            for (row, &p) in red.iter().zip(&pivots) {
                x[p] = -row[free];
            }
            x
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpError {
    #[error("matrix is not in the span of the basis")]
    ExpansionFailure,
    #[error("subspace is not closed under the bracket")]
    NotSubalgebra,
}

/// Coordinates of a matrix in the basis `E_1..E_10`.
pub fn expand(m: &Mat4) -> Result<Vec10, SpError> {
    let b = basis();
    let a: Vec<Vec<Q>> = (0..16)
        .map(|r| (0..DIM).map(|i| b[i][r / 4][r % 4]).collect())
        .collect();
    let rhs: Vec<Q> = (0..16).map(|r| m[r / 4][r % 4]).collect();
    let x = solve_exact(&a, &rhs).ok_or(SpError::ExpansionFailure)?;
    Ok(std::array::from_fn(|i| x[i]))
}

/// Coefficients of `[E_i, E_j]`, 1-based.
pub fn commutator(i: usize, j: usize) -> Vec10 {
    TABLE.c[i - 1][j - 1]
}

/// Exact commutator table, `c[i][j][k]` = coefficient of `E_{k+1}` in
/// `[E_{i+1}, E_{j+1}]`.
pub struct CommutatorTable {
    pub c: [[Vec10; DIM]; DIM],
}

static TABLE: LazyLock<CommutatorTable> = LazyLock::new(|| {
    let b = basis();
    let c = std::array::from_fn(|i| {
        std::array::from_fn(|j| expand(&mat_commutator(&b[i], &b[j])).expect("sp(2,R) is closed under the commutator"))
    });
    CommutatorTable { c }
});

pub fn table() -> &'static CommutatorTable {
    &TABLE
}

/// Bracket of two elements in coordinates.
pub fn bracket(x: &Vec10, y: &Vec10) -> Vec10 {
    let mut out = [Q::zero(); DIM];
    for i in 0..DIM {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..DIM {
            if y[j].is_zero() {
                continue;
            }
            let f = x[i] * y[j];
            for (o, c) in out.iter_mut().zip(&TABLE.c[i][j]) {
                *o += f * c;
            }
        }
    }
    out
}

/// The table as floating-point structure constants.
pub fn structure_constants() -> StructureConstants {
    let mut sc = StructureConstants::zeros(DIM);
    for i in 0..DIM {
        for j in i + 1..DIM {
            for k in 0..DIM {
                let v = TABLE.c[i][j][k];
                sc.set(k, i, j, *v.numer() as f64 / *v.denom() as f64);
            }
        }
    }
    sc
}

/// Basis triples on which the Jacobi identity fails.
pub fn jacobi_violations() -> Vec<(usize, usize, usize)> {
    let e = |i: usize| -> Vec10 { std::array::from_fn(|k| if k == i { Q::one() } else { Q::zero() }) };
    let mut out = Vec::new();
    for i in 0..DIM {
        for j in i + 1..DIM {
            for k in j + 1..DIM {
                let a = bracket(&e(i), &bracket(&e(j), &e(k)));
                let b = bracket(&e(j), &bracket(&e(k), &e(i)));
                let c = bracket(&e(k), &bracket(&e(i), &e(j)));
                if (0..DIM).any(|m| !(a[m] + b[m] + c[m]).is_zero()) {
                    out.push((i + 1, j + 1, k + 1));
                }
            }
        }
    }
    out
}

/// Grade of `E_i` (1-based).
pub fn grade(i: usize) -> i32 {
    [-3, -2, -1, -1, 0, 0, 1, 1, 2, 3][i - 1]
}

/// Grade label including the split of `g_{±1}` into `w` and `g` parts.
pub fn grade_label(i: usize) -> &'static str {
    ["g-3", "g-2", "g-1w", "g-1g", "g0", "g0", "g1g", "g1w", "g2", "g3"][i - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradationReport {
    pub pairs_checked: usize,
    pub dimensions: [usize; 7],
    /// Basis pairs `(i, j)` whose bracket leaves `g_{grade i + grade j}`.
    pub violations: Vec<(usize, usize)>,
}

pub fn verify_gradation() -> GradationReport {
    let mut dimensions = [0; 7];
    for i in 1..=DIM {
        dimensions[(grade(i) + 3) as usize] += 1;
    }
    let mut violations = Vec::new();
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..=DIM {
        for j in 1..=DIM {
            let target = grade(i) + grade(j);
            pairs.insert((grade(i), grade(j)));
            let c = commutator(i, j);
            let ok = (1..=DIM).all(|k| c[k - 1].is_zero() || (target.abs() <= 3 && grade(k) == target));
            if !ok {
                violations.push((i, j));
            }
        }
    }
    GradationReport {
        pairs_checked: pairs.len(),
        dimensions,
        violations,
    }
}

/// `K_ij = c^k_il c^l_jk`, exact and integer-valued.
pub fn killing_matrix() -> [[i64; DIM]; DIM] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = Q::zero();
            for k in 0..DIM {
                for l in 0..DIM {
                    s += TABLE.c[i][l][k] * TABLE.c[j][k][l];
                }
            }
            assert!(s.is_integer(), "Killing form entry {s} is not an integer");
            s.to_integer()
        })
    })
}

/// Coefficients of the quadratic form `K(E, E) = Σ K_ij a_i a_j` on the
/// monomials `a_i a_j` with `i ≤ j`: `K_ii` on the diagonal and `2 K_ij`
/// off it.
pub fn killing_quadratic_coefficients() -> Vec<((usize, usize), i64)> {
    let k = killing_matrix();
    let mut out = Vec::new();
    for i in 0..DIM {
        for j in i..DIM {
            let v = if i == j { k[i][i] } else { 2 * k[i][j] };
            if v != 0 {
                out.push(((i + 1, j + 1), v));
            }
        }
    }
    out
}

pub fn killing_signature() -> Signature {
    let k = killing_matrix();
    let m = nalgebra::DMatrix::from_fn(DIM, DIM, |i, j| k[i][j] as f64);
    signature(&m, 1e-8)
}

/// Exact linear subspace of the algebra, stored in reduced row echelon form.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    rows: Vec<Vec10>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coordinate_indices() {
            Some(idx) => write!(f, "span{idx:?}"),
            None => write!(f, "Subspace(dim {})", self.dim()),
        }
    }
}

impl Subspace {
    pub fn span(vectors: &[Vec10]) -> Self {
        let rows = rref(vectors.iter().map(|v| v.to_vec()).collect());
        Self {
            rows: rows.into_iter().map(|r| std::array::from_fn(|i| r[i])).collect(),
        }
    }

    pub fn zero() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn whole() -> Self {
        Self::from_indices(&(1..=DIM).collect::<Vec<_>>())
    }

    /// Span of the basis elements `E_i`, `i` 1-based.
    pub fn from_indices(indices: &[usize]) -> Self {
        let v: Vec<Vec10> = indices
            .iter()
            .map(|&i| std::array::from_fn(|k| if k + 1 == i { Q::one() } else { Q::zero() }))
            .collect();
        Self::span(&v)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec10] {
        &self.rows
    }

    pub fn contains(&self, v: &Vec10) -> bool {
        let mut all = self.rows.clone();
        all.push(*v);
        Self::span(&all).dim() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    /// The basis indices spanning this subspace, if it is a coordinate
    /// subspace.
    pub fn coordinate_indices(&self) -> Option<Vec<usize>> {
        let mut idx = Vec::new();
        for r in &self.rows {
            let nz: Vec<usize> = (0..DIM).filter(|&k| !r[k].is_zero()).collect();
            if nz.len() != 1 {
                return None;
            }
            idx.push(nz[0] + 1);
        }
        Some(idx)
    }

    /// `[A, B]` as a subspace.
    pub fn bracket(&self, other: &Subspace) -> Subspace {
        let mut v = Vec::new();
        for a in &self.rows {
            for b in &other.rows {
                v.push(bracket(a, b));
            }
        }
        Subspace::span(&v)
    }

    pub fn is_subalgebra(&self) -> bool {
        self.contains_subspace(&self.bracket(self))
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // x in both iff x = Σ s_i a_i = Σ t_j b_j.
        let n = self.dim() + other.dim();
        let a: Vec<Vec<Q>> = (0..DIM)
            .map(|k| {
                self.rows
                    .iter()
                    .map(|r| r[k])
                    .chain(other.rows.iter().map(|r| -r[k]))
                    .collect()
            })
            .collect();
        let vecs: Vec<Vec10> = nullspace(&a, n)
            .iter()
            .map(|s| std::array::from_fn(|k| self.rows.iter().zip(s).fold(Q::zero(), |acc, (r, c)| acc + r[k] * c)))
            .collect();
        Subspace::span(&vecs)
    }
}

/// `h⊥ = { E : K(H, E) = 0 for all H in h }`.
pub fn killing_orthogonal(sub: &Subspace) -> Subspace {
    let k = killing_matrix();
    let a: Vec<Vec<Q>> = sub
        .basis()
        .iter()
        .map(|h| {
            (0..DIM)
                .map(|j| (0..DIM).fold(Q::zero(), |s, i| s + h[i] * q(k[i][j])))
                .collect()
        })
        .collect();
    if a.is_empty() {
        return Subspace::whole();
    }
    let vecs: Vec<Vec10> = nullspace(&a, DIM)
        .iter()
        .map(|v| std::array::from_fn(|i| v[i]))
        .collect();
    Subspace::span(&vecs)
}

/// Nilpotency step of a subalgebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nilpotency {
    /// Lower central series `h, [h,h], [h,[h,h]], ...` has exactly this many
    /// nonzero terms (zero for the zero subalgebra).
    Steps(usize),
    NotNilpotent,
}

impl Nilpotency {
    pub fn is_nilpotent(self) -> bool {
        matches!(self, Nilpotency::Steps(_))
    }
}

pub fn nilpotency_degree(sub: &Subspace) -> Result<Nilpotency, SpError> {
    if !sub.is_subalgebra() {
        return Err(SpError::NotSubalgebra);
    }
    let mut term = sub.clone();
    let mut steps = 0;
    while term.dim() > 0 {
        steps += 1;
        let next = sub.bracket(&term);
        if next.dim() == term.dim() {
            return Ok(Nilpotency::NotNilpotent);
        }
        term = next;
    }
    Ok(Nilpotency::Steps(steps))
}

/// True iff `sub⊥` is a nilpotent subalgebra.
pub fn is_parabolic(sub: &Subspace) -> Result<bool, SpError> {
    if !sub.is_subalgebra() {
        return Err(SpError::NotSubalgebra);
    }
    let perp = killing_orthogonal(sub);
    Ok(perp.is_subalgebra() && nilpotency_degree(&perp)?.is_nilpotent())
}

/// The subalgebras attached to the car's grading, by name.
pub fn named_subalgebra(name: &str) -> Option<Subspace> {
    let idx: &[usize] = match name {
        "p1" => &[3, 5, 6, 7, 8, 9, 10],
        "p2" => &[4, 5, 6, 7, 8, 9, 10],
        "p12" => &[5, 6, 7, 8, 9, 10],
        "n12" => &[7, 8, 9, 10],
        "n1" => &[7, 9, 10],
        "n2" => &[8, 9, 10],
        "m" => &[1, 2, 3, 4],
        "q" => &[1, 2, 4],
        "p" => &[1, 2, 3],
        "g0" => &[5, 6],
        "sp" => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        _ => return None,
    };
    Some(Subspace::from_indices(idx))
}

pub const SUBALGEBRA_NAMES: [&str; 11] = ["p1", "p2", "p12", "n12", "n1", "n2", "m", "q", "p", "g0", "sp"];

/// Dimensions of the named subalgebras.
pub fn subalgebra_dimensions() -> Vec<(&'static str, usize)> {
    SUBALGEBRA_NAMES
        .iter()
        .map(|&n| (n, named_subalgebra(n).expect("known name").dim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_entries() {
        let e5 = basis_element(5);
        for i in 0..4 {
            for j in 0..4 {
                let expect = match (i, j) {
                    (0, 0) => 1,
                    (3, 3) => -1,
                    _ => 0,
                };
                assert_eq!(e5[i][j], q(expect));
            }
        }
        let e1 = basis_element(1);
        let nz: Vec<_> = (0..16).filter(|&r| !e1[r / 4][r % 4].is_zero()).collect();
        assert_eq!(nz, vec![12]);
        assert_eq!(e1[3][0], q(-2));
        assert!(basis().iter().all(is_symplectic_algebra_element));
    }

    #[test]
    fn sample_commutators() {
        let unit = |k: usize, v: i64| -> Vec10 { std::array::from_fn(|i| if i + 1 == k { q(v) } else { Q::zero() }) };
        assert_eq!(commutator(1, 5), unit(1, 2));
        assert_eq!(commutator(7, 9), unit(10, 1));
        assert_eq!(commutator(1, 2), [Q::zero(); DIM]);
        assert_eq!(commutator(3, 4), unit(2, -1));
    }

    #[test]
    fn non_member_fails_expansion() {
        let mut m = [[Q::zero(); 4]; 4];
        m[0][0] = Q::one();
        assert_eq!(expand(&m), Err(SpError::ExpansionFailure));
    }

    #[test]
    fn g0_is_abelian() {
        assert_eq!(
            nilpotency_degree(&named_subalgebra("g0").unwrap()),
            Ok(Nilpotency::Steps(1))
        );
        assert_eq!(nilpotency_degree(&Subspace::zero()), Ok(Nilpotency::Steps(0)));
    }

    #[test]
    fn orthogonal_of_whole_algebra_is_zero() {
        assert_eq!(killing_orthogonal(&Subspace::whole()).dim(), 0);
        assert_eq!(is_parabolic(&Subspace::whole()), Ok(true));
    }

    #[test]
    fn non_subalgebra_is_rejected() {
        let s = Subspace::from_indices(&[3, 4]);
        assert_eq!(nilpotency_degree(&s), Err(SpError::NotSubalgebra));
        assert_eq!(is_parabolic(&s), Err(SpError::NotSubalgebra));
    }

    #[test]
    fn intersection_of_parabolics() {
        let p1 = named_subalgebra("p1").unwrap();
        let p2 = named_subalgebra("p2").unwrap();
        assert_eq!(p1.intersection(&p2), named_subalgebra("p12").unwrap());
    }
}
