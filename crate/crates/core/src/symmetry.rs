//! The ten symmetry generators of the car split, numerical structure
//! constants and the Killing form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::car::{car_split, CarParams};
use crate::distribution::{
    is_infinitesimal_symmetry, lie_bracket, Point, SplitDistribution, SymmetryCheck, VectorField,
};
use crate::jet::{Chart, EvalError};
use crate::linalg::{lstsq, numerical_rank, RANK_REL_TOL};

/// `S1..S10`, infinitesimal symmetries of `Dw ⊕ Dg`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub params: CarParams,
    pub fields: Vec<VectorField>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// 1-based access.
    pub fn get(&self, i: usize) -> &VectorField {
        &self.fields[i - 1]
    }

    /// Copy with `S_i` (1-based) replaced.
    pub fn with_replaced(&self, i: usize, field: VectorField) -> Self {
        let mut out = self.clone();
        out.fields[i - 1] = field;
        out
    }
}

pub fn generators(params: &CarParams) -> GeneratorSet {
    let c = Chart::car();
    let l = format!("{:?}", params.ell());
    let table: [[String; 4]; 10] = [
        ["1".into(), "0".into(), "0".into(), "0".into()],
        ["0".into(), "1".into(), "0".into(), "0".into()],
        ["-y".into(), "x".into(), "1".into(), "0".into()],
        [
            format!("{l}*sin(alpha)"),
            format!("-{l}*cos(alpha)"),
            "0".into(),
            "sin(beta)^2".into(),
        ],
        ["x".into(), "y".into(), "0".into(), "-sin(beta)*cos(beta)".into()],
        [
            "x^2 - y^2".into(),
            "2*x*y".into(),
            "2*y".into(),
            format!("-2*cos(beta)*({l}*cos(beta)*sin(alpha) + x*sin(beta))"),
        ],
        [
            format!("{l}*x*sin(alpha)"),
            format!("-{l}*x*cos(alpha)"),
            format!("-{l}*cos(alpha)"),
            format!("sin(beta)*({l}*cos(beta)*sin(alpha) + x*sin(beta))"),
        ],
        [
            format!("{l}*y*sin(alpha)"),
            format!("-{l}*y*cos(alpha)"),
            format!("-{l}*sin(alpha)"),
            format!("-sin(beta)*({l}*cos(beta)*cos(alpha) - y*sin(beta))"),
        ],
        [
            "2*x*y".into(),
            "y^2 - x^2".into(),
            "-2*x".into(),
            format!("2*cos(beta)*({l}*cos(beta)*cos(alpha) - y*sin(beta))"),
        ],
        [
            format!("{l}*(x^2 + y^2)*sin(alpha)"),
            format!("-{l}*(x^2 + y^2)*cos(alpha)"),
            format!("-2*{l}*(x*cos(alpha) + y*sin(alpha))"),
            format!(
                "2*{l}*sin(beta)*cos(beta)*(x*sin(alpha) - y*cos(alpha)) \
                 + sin(beta)^2*(x^2 + y^2) + 2*{l}^2*cos(beta)^2"
            ),
        ],
    ];
    let fields = table
        .iter()
        .map(|row| VectorField::parse(&c, row.each_ref().map(String::as_str)).expect("generator"))
        .collect();
    GeneratorSet {
        params: *params,
        fields,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    /// Per generator, in order `S1..Sn`.
    pub checks: Vec<Result<SymmetryCheck, EvalError>>,
}

impl SymmetryReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| matches!(c, Ok(c) if c.holds))
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.as_ref().map_or(f64::INFINITY, |c| c.max_residual))
            .fold(0.0, f64::max)
    }
}

pub fn verify_all_symmetries(gen: &GeneratorSet, samples: &[Point], tol: f64) -> SymmetryReport {
    let split: SplitDistribution = car_split(&gen.params);
    SymmetryReport {
        checks: gen
            .fields
            .iter()
            .map(|s| is_infinitesimal_symmetry(s, &split, samples, tol))
            .collect(),
    }
}

/// Antisymmetric table `c^k_ij` with `[e_i, e_j] = Σ_k c^k_ij e_k`
/// (0-based storage).
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>,
    /// Largest held-out fit residual (zero for exact tables).
    pub residual: f64,
}

impl StructureConstants {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            c: vec![0.0; dim * dim * dim],
            residual: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    /// `c^k_ij`, 0-based.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[self.idx(k, i, j)]
    }

    /// Sets `c^k_ij` and `c^k_ji = -c^k_ij`.
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let a = self.idx(k, i, j);
        let b = self.idx(k, j, i);
        self.c[a] = v;
        self.c[b] = -v;
    }

    /// Coefficients of `[e_i, e_j]`.
    pub fn bracket_coeffs(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.get(k, i, j)).collect()
    }

    /// Bracket of two elements given by coordinates.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += x[i] * y[j] * self.get(k, i, j);
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r = r.max((self.get(k, i, j) + self.get(k, j, i)).abs());
                }
            }
        }
        r
    }

    /// Largest coefficient of `[e_i,[e_j,e_k]] + cyclic` over all triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut r = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for m in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += self.get(l, j, k) * self.get(m, i, l)
                                + self.get(l, k, i) * self.get(m, j, l)
                                + self.get(l, i, j) * self.get(m, k, l);
                        }
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r
    }

    /// Dimension of `[g, g]`, the span of all bracket coefficient vectors.
    pub fn derived_dimension(&self) -> usize {
        let n = self.dim;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        if pairs.is_empty() {
            return 0;
        }
        let m = DMatrix::from_fn(n, pairs.len(), |k, p| self.get(k, pairs[p].0, pairs[p].1));
        numerical_rank(&m, RANK_REL_TOL)
    }

    pub fn is_perfect(&self) -> bool {
        self.derived_dimension() == self.dim
    }

    /// `K_ij = c^k_il c^l_jk = tr(ad e_i ∘ ad e_j)`.
    pub fn killing_form(&self) -> KillingForm {
        let n = self.dim;
        let k = DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += self.get(a, i, b) * self.get(b, j, a);
                }
            }
            s
        });
        KillingForm::from_matrix(k)
    }
}

/// Eigenvalue counts `(positive, negative, zero)`.
pub type Signature = (usize, usize, usize);

/// Signature of a symmetric matrix with zero threshold `rel_tol · max|λ|`.
pub fn signature(m: &DMatrix<f64>, rel_tol: f64) -> Signature {
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let top = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let thr = rel_tol * top;
    let pos = eig.iter().filter(|&&v| v > thr).count();
    let neg = eig.iter().filter(|&&v| v < -thr).count();
    (pos, neg, eig.len() - pos - neg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KillingForm {
    pub matrix: DMatrix<f64>,
    pub signature: Signature,
}

impl KillingForm {
    pub const SIGNATURE_REL_TOL: f64 = 1e-8;

    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let signature = signature(&matrix, Self::SIGNATURE_REL_TOL);
        Self { matrix, signature }
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.signature.2 == 0
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Largest `|K([x,y],z) + K(y,[x,z])|` over basis triples.
    pub fn ad_invariance_residual(&self, c: &StructureConstants) -> f64 {
        let n = c.dim();
        let mut r = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += c.get(k, x, y) * self.matrix[(k, z)] + c.get(k, x, z) * self.matrix[(y, k)];
                    }
                    r = r.max(s.abs());
                }
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("need at least {needed} fit samples and one held-out sample, got {fit} and {held_out}")]
    TooFewSamples { needed: usize, fit: usize, held_out: usize },
    #[error("generator values at the samples have rank {rank} < {dim}")]
    RankDeficient { rank: usize, dim: usize },
    #[error("bracket [S{i},S{j}] leaves the span: held-out residual {residual:e} > {tol:e}")]
    NonClosure {
        i: usize,
        j: usize,
        residual: f64,
        tol: f64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Minimum number of fit samples.
pub const MIN_FIT_SAMPLES: usize = 20;

/// Fit `[S_i, S_j] = Σ_k c^k_ij S_k` with constant coefficients by least
/// squares over `fit`, then check the fit on `held_out`.
pub fn extract_structure_constants(
    gen: &GeneratorSet,
    fit: &[Point],
    held_out: &[Point],
    tol: f64,
) -> Result<StructureConstants, StructureError> {
    let n = gen.len();
    if fit.len() < MIN_FIT_SAMPLES || held_out.is_empty() {
        return Err(StructureError::TooFewSamples {
            needed: MIN_FIT_SAMPLES,
            fit: fit.len(),
            held_out: held_out.len(),
        });
    }
    let values = |pts: &[Point]| -> Result<DMatrix<f64>, EvalError> {
        let mut a = DMatrix::zeros(4 * pts.len(), n);
        for (p, pt) in pts.iter().enumerate() {
            for (k, s) in gen.fields.iter().enumerate() {
                let v = s.eval(pt)?;
                for i in 0..4 {
                    a[(4 * p + i, k)] = v[i];
                }
            }
        }
        Ok(a)
    };
    let a_fit = values(fit)?;
    let a_out = values(held_out)?;
    let rank = numerical_rank(&a_fit, RANK_REL_TOL);
    if rank < n {
        return Err(StructureError::RankDeficient { rank, dim: n });
    }
    let brackets = |pts: &[Point], i: usize, j: usize| -> Result<DVector<f64>, EvalError> {
        let mut b = DVector::zeros(4 * pts.len());
        for (p, pt) in pts.iter().enumerate() {
            let v = lie_bracket(&gen.fields[i], &gen.fields[j], pt)?;
            for r in 0..4 {
                b[4 * p + r] = v[r];
            }
        }
        Ok(b)
    };
    let mut sc = StructureConstants::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let coeffs = lstsq(&a_fit, &brackets(fit, i, j)?);
            let check = &a_out * &coeffs - brackets(held_out, i, j)?;
            let residual = check.amax();
            if !(residual <= tol) {
                return Err(StructureError::NonClosure {
                    i: i + 1,
                    j: j + 1,
                    residual,
                    tol,
                });
            }
            sc.residual = sc.residual.max(residual);
            for k in 0..n {
                sc.set(k, i, j, coeffs[k]);
            }
        }
    }
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_values() {
        let g = generators(&CarParams::default());
        assert_eq!(g.len(), 10);
        assert_eq!(g.get(1).eval(&[0.3, 0.2, 0.1, 0.4]).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.get(3).eval(&[1.0, 0.0, 0.0, 0.0]).unwrap(), [0.0, 1.0, 1.0, 0.0]);
        assert_eq!(g.get(10).eval(&[0.0; 4]).unwrap(), [0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn abelian_killing_form_vanishes() {
        let k = StructureConstants::zeros(10).killing_form();
        assert_eq!(k.matrix, DMatrix::zeros(10, 10));
        assert_eq!(k.signature, (0, 0, 10));
    }

    #[test]
    fn so3_is_compact() {
        let mut c = StructureConstants::zeros(3);
        c.set(2, 0, 1, 1.0);
        c.set(0, 1, 2, 1.0);
        c.set(1, 2, 0, 1.0);
        assert_eq!(c.jacobi_residual(), 0.0);
        assert!(c.is_perfect());
        let k = c.killing_form();
        assert_eq!(k.signature, (0, 3, 0));
        assert_eq!(k.matrix[(0, 0)], -2.0);
        assert_eq!(k.ad_invariance_residual(&c), 0.0);
    }

    #[test]
    fn too_few_samples() {
        let g = generators(&CarParams::default());
        let pts = vec![[0.0; 4]; 5];
        assert!(matches!(
            extract_structure_constants(&g, &pts, &pts, 1e-8),
            Err(StructureError::TooFewSamples { .. })
        ));
    }
}
