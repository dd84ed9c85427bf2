//! Vector fields on a four-coordinate chart, Lie brackets through jets,
//! derived flags, flows and split-preserving symmetries.

use nalgebra::DMatrix;

use crate::integrate::{rk4, StepError};
use crate::jet::{Chart, EvalError, Expr, Jet, ParseError, ScalarField, NVARS};
use crate::linalg::{norm4, numerical_rank, wedge_norm};

pub type Point = [f64; NVARS];

/// A vector field `Σ V^i ∂_i` whose components are scalar expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    components: [Expr; NVARS],
}

impl VectorField {
    pub fn new(chart: Chart, components: [Expr; NVARS]) -> Self {
        Self { chart, components }
    }

    pub fn parse(chart: &Chart, components: [&str; NVARS]) -> Result<Self, ParseError> {
        let mut exprs = Vec::with_capacity(NVARS);
        for c in components {
            exprs.push(ScalarField::parse(c, chart)?.expr().clone());
        }
        let components: [Expr; NVARS] = exprs.try_into().expect("four components");
        Ok(Self::new(chart.clone(), components))
    }

    pub fn zero(chart: &Chart) -> Self {
        Self::new(chart.clone(), std::array::from_fn(|_| Expr::Const(0.0)))
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        Self::new(
            chart.clone(),
            std::array::from_fn(|k| Expr::Const(if k == i { 1.0 } else { 0.0 })),
        )
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn component(&self, i: usize) -> ScalarField {
        ScalarField::new(self.chart.clone(), self.components[i].clone())
    }

    /// Componentwise sum. Panics if the charts differ.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.chart, other.chart, "fields live on different charts");
        Self::new(
            self.chart.clone(),
            std::array::from_fn(|i| {
                Expr::Add(
                    Box::new(self.components[i].clone()),
                    Box::new(other.components[i].clone()),
                )
            }),
        )
    }

    pub fn eval(&self, point: &Point) -> Result<Point, EvalError> {
        let mut out = [0.0; NVARS];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(point)?;
        }
        Ok(out)
    }

    pub fn jet(&self, point: &Point, order: usize) -> Result<FieldJet, EvalError> {
        assert!(order <= crate::jet::MAX_ORDER);
        let mut comps = Vec::with_capacity(NVARS);
        for c in &self.components {
            comps.push(c.eval_jet(point, order)?);
        }
        Ok(FieldJet(comps.try_into().expect("four components")))
    }
}

/// Taylor jet of a vector field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet(pub [Jet; NVARS]);

impl FieldJet {
    pub fn order(&self) -> usize {
        self.0[0].order()
    }

    pub fn value(&self) -> Point {
        std::array::from_fn(|i| self.0[i].value())
    }

    /// `[X, Y]^i = X^j ∂_j Y^i - Y^j ∂_j X^i`, one order lower than the
    /// lower of the two inputs.
    pub fn bracket(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        assert!(n >= 1, "bracket needs first-order jets");
        let out = std::array::from_fn(|i| {
            let dy: Vec<Jet> = (0..NVARS).map(|j| other.0[i].derivative(j)).collect();
            let dx: Vec<Jet> = (0..NVARS).map(|j| self.0[i].derivative(j)).collect();
            let mut acc = &self.0[0].truncate(n - 1) * &dy[0] - &other.0[0].truncate(n - 1) * &dx[0];
            for j in 1..NVARS {
                acc = acc + &self.0[j].truncate(n - 1) * &dy[j] - &other.0[j].truncate(n - 1) * &dx[j];
            }
            acc
        });
        FieldJet(out)
    }
}

/// `[X, Y]` evaluated at `point` from first-order jets.
pub fn lie_bracket(x: &VectorField, y: &VectorField, point: &Point) -> Result<Point, EvalError> {
    Ok(x.jet(point, 1)?.bracket(&y.jet(point, 1)?).value())
}

/// A rank-2 distribution presented as the sum of two line fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDistribution {
    pub dw: VectorField,
    pub dg: VectorField,
}

impl SplitDistribution {
    /// Panics if the two fields live on different charts.
    pub fn new(dw: VectorField, dg: VectorField) -> Self {
        assert_eq!(dw.chart, dg.chart, "fields live on different charts");
        Self { dw, dg }
    }

    pub fn chart(&self) -> &Chart {
        &self.dw.chart
    }
}

fn rank_of(vectors: &[Point], rel_tol: f64) -> usize {
    let m = DMatrix::from_fn(NVARS, vectors.len(), |i, j| vectors[j][i]);
    numerical_rank(&m, rel_tol)
}

/// Ranks of `D`, `D + [D,D]` and `D + [D,D] + [D,[D,D]]` at `point`.
pub fn derived_flag_ranks(
    d: &SplitDistribution,
    point: &Point,
    rel_tol: f64,
) -> Result<(usize, usize, usize), EvalError> {
    let w = d.dw.jet(point, 2)?;
    let g = d.dg.jet(point, 2)?;
    let wg = w.bracket(&g);
    let w_wg = w.bracket(&wg).value();
    let g_wg = g.bracket(&wg).value();
    let mut v = vec![w.value(), g.value()];
    let r1 = rank_of(&v, rel_tol);
    v.push(wg.value());
    let r2 = rank_of(&v, rel_tol);
    v.push(w_wg);
    v.push(g_wg);
    let r3 = rank_of(&v, rel_tol);
    Ok((r1, r2, r3))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngelReport {
    pub engel: bool,
    pub samples: Vec<Result<(usize, usize, usize), EvalError>>,
}

impl EngelReport {
    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| !matches!(s, Ok((2, 3, 4)))).count()
    }
}

/// Growth vector `(2,3,4)` at every sample. Pole errors make the sample fail.
pub fn is_engel(d: &SplitDistribution, samples: &[Point], rel_tol: f64) -> EngelReport {
    assert!(!samples.is_empty(), "need at least one sample");
    let samples: Vec<_> = samples.iter().map(|p| derived_flag_ranks(d, p, rel_tol)).collect();
    let engel = samples.iter().all(|s| matches!(s, Ok((2, 3, 4))));
    EngelReport { engel, samples }
}

/// RK4 flow of `x` for total time `t` in `steps` equal steps.
pub fn flow(x: &VectorField, q0: Point, t: f64, steps: usize) -> Result<Vec<Point>, StepError<EvalError>> {
    assert!(steps >= 1, "need at least one step");
    rk4(|_, q| x.eval(q), q0, 0.0, t / steps as f64, steps)
}

/// Non-parallelism of `b` against `a`: `|a ∧ b| / (|a| · max(|b|, 1))`.
///
/// The `max` keeps brackets that vanish up to rounding from producing an
/// order-one residual.
pub fn parallel_residual(a: &Point, b: &Point) -> f64 {
    let na = norm4(a);
    assert!(na > 0.0, "reference vector vanishes");
    wedge_norm(a, b) / (na * norm4(b).max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub max_residual: f64,
}

/// Whether `[s, Dw] ∥ Dw` and `[s, Dg] ∥ Dg` at every sample.
pub fn is_infinitesimal_symmetry(
    s: &VectorField,
    d: &SplitDistribution,
    samples: &[Point],
    tol: f64,
) -> Result<SymmetryCheck, EvalError> {
    assert!(!samples.is_empty(), "need at least one sample");
    let mut max_residual = 0.0f64;
    for p in samples {
        let sj = s.jet(p, 1)?;
        for v in [&d.dw, &d.dg] {
            let vj = v.jet(p, 1)?;
            let b = sj.bracket(&vj).value();
            max_residual = max_residual.max(parallel_residual(&vj.value(), &b));
        }
    }
    Ok(SymmetryCheck {
        holds: max_residual <= tol,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RANK_REL_TOL;

    fn engel_normal_form() -> SplitDistribution {
        let c = Chart::jet();
        SplitDistribution::new(
            VectorField::coordinate(&c, 3),
            VectorField::parse(&c, ["1", "p", "q", "0"]).unwrap(),
        )
    }

    #[test]
    fn bracket_with_self_vanishes() {
        let c = Chart::car();
        let x = VectorField::parse(&c, ["cos(alpha)*x", "y^2", "sin(beta)", "1"]).unwrap();
        assert_eq!(lie_bracket(&x, &x, &[0.3, -0.2, 1.0, 0.1]).unwrap(), [0.0; 4]);
    }

    #[test]
    fn engel_normal_form_growth() {
        let d = engel_normal_form();
        let r = derived_flag_ranks(&d, &[0.1, 0.2, 0.3, 0.4], RANK_REL_TOL).unwrap();
        assert_eq!(r, (2, 3, 4));
    }

    #[test]
    fn coordinate_plane_is_integrable() {
        let c = Chart::car();
        let d = SplitDistribution::new(VectorField::coordinate(&c, 0), VectorField::coordinate(&c, 1));
        let rep = is_engel(&d, &[[0.0; 4], [1.0, 2.0, 3.0, 0.5]], RANK_REL_TOL);
        assert!(!rep.engel);
        assert_eq!(rep.samples[0], Ok((2, 2, 2)));
        assert_eq!(rep.failures(), 2);
    }

    #[test]
    fn zero_field_flow_is_constant() {
        let traj = flow(&VectorField::zero(&Chart::car()), [1.0, 2.0, 3.0, 0.4], 5.0, 10).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.iter().all(|q| *q == [1.0, 2.0, 3.0, 0.4]));
    }

    #[test]
    fn flow_reports_pole_step() {
        // dx/dt = 1 leaves the domain of sqrt(0.55 - x) during step 5.
        let c = Chart::car();
        let x = VectorField::parse(&c, ["1", "0", "0", "sqrt(0.55 - x)"]).unwrap();
        let err = flow(&x, [0.0; 4], 1.0, 10).unwrap_err();
        assert_eq!(err.step, 5);
    }

    #[test]
    fn second_order_bracket_matches_nested_first_order() {
        // [X, [Y, Z]] from order-2 jets equals the bracket of X with the
        // field [Y, Z] written out by hand.
        let c = Chart::car();
        let x = VectorField::parse(&c, ["y", "x*alpha", "0", "1"]).unwrap();
        let y = VectorField::coordinate(&c, 0);
        let z = VectorField::parse(&c, ["0", "x^2", "0", "0"]).unwrap();
        let yz = VectorField::parse(&c, ["0", "2*x", "0", "0"]).unwrap();
        let p = [0.4, -0.7, 1.1, 0.2];
        let nested = x
            .jet(&p, 2)
            .unwrap()
            .bracket(&y.jet(&p, 2).unwrap().bracket(&z.jet(&p, 2).unwrap()));
        let direct = lie_bracket(&x, &yz, &p).unwrap();
        for i in 0..4 {
            assert!((nested.value()[i] - direct[i]).abs() < 1e-14);
        }
    }
}
