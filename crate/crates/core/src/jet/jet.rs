//! Dense truncated Taylor expansions in four variables.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::LazyLock;

use super::EvalError;

/// Number of chart coordinates every jet is expanded in.
pub const NVARS: usize = 4;
/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Multi-index of a monomial `x0^e0 x1^e1 x2^e2 x3^e3`.
pub type Exponents = [u8; NVARS];

struct MonomialTable {
    /// All monomials of total degree `<= MAX_ORDER`, graded (degree-major).
    exps: Vec<Exponents>,
    /// `len[n]` = number of monomials of degree `<= n`.
    len: [usize; MAX_ORDER + 1],
    /// Dense lookup `(e0, e1, e2, e3) -> position`.
    lookup: Vec<usize>,
    /// Product triples `(i, j, k)` with `m_i * m_j = m_k`, sorted by `deg(m_k)`.
    products: Vec<(u8, u8, u8)>,
    /// `prod_len[n]` = number of triples whose product has degree `<= n`.
    prod_len: [usize; MAX_ORDER + 1],
}

const SIDE: usize = MAX_ORDER + 1;

fn lookup_slot(e: &Exponents) -> usize {
    e.iter().fold(0, |acc, &x| acc * SIDE + x as usize)
}

fn degree(e: &Exponents) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

static TABLE: LazyLock<MonomialTable> = LazyLock::new(|| {
    let mut exps = Vec::new();
    for deg in 0..=MAX_ORDER {
        // lexicographically descending within a degree: x0 first
        let mut block = Vec::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                for c in 0..=deg - a - b {
                    let d = deg - a - b - c;
                    block.push([a as u8, b as u8, c as u8, d as u8]);
                }
            }
        }
        block.sort_by(|x, y| y.cmp(x));
        exps.extend(block);
    }
    let mut len = [0; MAX_ORDER + 1];
    for (n, slot) in len.iter_mut().enumerate() {
        *slot = exps.iter().filter(|e| degree(e) <= n).count();
    }
    let mut lookup = vec![usize::MAX; SIDE.pow(NVARS as u32)];
    for (i, e) in exps.iter().enumerate() {
        lookup[lookup_slot(e)] = i;
    }
    let mut products = Vec::new();
    for (i, ei) in exps.iter().enumerate() {
        for (j, ej) in exps.iter().enumerate() {
            if degree(ei) + degree(ej) > MAX_ORDER {
                continue;
            }
            let sum = [ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2], ei[3] + ej[3]];
            products.push((i as u8, j as u8, lookup[lookup_slot(&sum)] as u8));
        }
    }
    products.sort_by_key(|&(_, _, k)| degree(&exps[k as usize]));
    let mut prod_len = [0; MAX_ORDER + 1];
    for (n, slot) in prod_len.iter_mut().enumerate() {
        *slot = products
            .iter()
            .filter(|&&(_, _, k)| degree(&exps[k as usize]) <= n)
            .count();
    }
    MonomialTable {
        exps,
        len,
        lookup,
        products,
        prod_len,
    }
});

/// Number of coefficients of a jet of the given order.
pub fn coefficient_count(order: usize) -> usize {
    TABLE.len[order]
}

/// Position of a monomial in the graded coefficient layout, if its degree is
/// within `MAX_ORDER`.
pub fn monomial_index(e: &Exponents) -> Option<usize> {
    if degree(e) > MAX_ORDER {
        return None;
    }
    Some(TABLE.lookup[lookup_slot(e)])
}

/// Exponents of the monomial stored at `index`.
pub fn monomial(index: usize) -> Exponents {
    TABLE.exps[index]
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// Truncated Taylor expansion of a scalar field at a base point.
///
/// Coefficients are Taylor coefficients, `∂^e f / e!`, stored in graded order so
/// that lowering the order is a prefix truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    base: [f64; NVARS],
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(base: [f64; NVARS], order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coeffs = vec![0.0; coefficient_count(order)];
        coeffs[0] = value;
        Self { base, order, coeffs }
    }

    /// The coordinate function `x_var` expanded at `base`.
    pub fn variable(base: [f64; NVARS], order: usize, var: usize) -> Self {
        let mut jet = Self::constant(base, order, base[var]);
        if order >= 1 {
            let mut e = [0u8; NVARS];
            e[var] = 1;
            jet.coeffs[TABLE.lookup[lookup_slot(&e)]] = 1.0;
        }
        jet
    }

    pub fn from_coefficients(base: [f64; NVARS], order: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), coefficient_count(order));
        Self { base, order, coeffs }
    }

    pub fn base(&self) -> [f64; NVARS] {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of the monomial with exponents `e` (zero above the order).
    pub fn coefficient(&self, e: &Exponents) -> f64 {
        match monomial_index(e) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// The partial derivative `∂^e f` at the base point.
    pub fn partial(&self, e: &Exponents) -> f64 {
        self.coefficient(e) * e.iter().map(|&k| factorial(k)).product::<f64>()
    }

    /// Gradient at the base point (requires order >= 1).
    pub fn gradient(&self) -> [f64; NVARS] {
        let mut g = [0.0; NVARS];
        for (v, slot) in g.iter_mut().enumerate() {
            let mut e = [0u8; NVARS];
            e[v] = 1;
            *slot = self.coefficient(&e);
        }
        g
    }

    /// Drop all terms above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            base: self.base,
            order,
            coeffs: self.coeffs[..coefficient_count(order)].to_vec(),
        }
    }

    /// Jet of `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let n = coefficient_count(order);
        let mut coeffs = vec![0.0; n];
        for (i, slot) in coeffs.iter_mut().enumerate() {
            let mut e = TABLE.exps[i];
            e[var] += 1;
            let src = TABLE.lookup[lookup_slot(&e)];
            *slot = f64::from(e[var]) * self.coeffs[src];
        }
        Self {
            base: self.base,
            order,
            coeffs,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            base: self.base,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.base, other.base, "jets expanded at different points");
        let order = self.order.min(other.order);
        let n = coefficient_count(order);
        Self {
            base: self.base,
            order,
            coeffs: (0..n).map(|i| f(self.coeffs[i], other.coeffs[i])).collect(),
        }
    }

    fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.base, other.base, "jets expanded at different points");
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; coefficient_count(order)];
        for &(i, j, k) in &TABLE.products[..TABLE.prod_len[order]] {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Self {
            base: self.base,
            order,
            coeffs,
        }
    }

    /// Compose with a univariate function given its Taylor coefficients
    /// `f^(k)(v)/k!` at `v = self.value()`, for `k = 0..=order`.
    pub fn compose(&self, series: &[f64]) -> Self {
        debug_assert!(series.len() > self.order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Self::constant(self.base, self.order, series[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.product(&h);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Self, EvalError> {
        let v = self.value();
        if v.abs() < f64::EPSILON {
            return Err(EvalError::Pole {
                function: "division",
                value: v,
            });
        }
        let series: Vec<f64> = (0..=self.order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / v.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Self) -> Result<Self, EvalError> {
        Ok(self.product(&other.recip()?))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        self.compose(&taylor_from_derivatives(self.order, |k| cycle[k % 4]))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        self.compose(&taylor_from_derivatives(self.order, |k| cycle[k % 4]))
    }

    pub fn sec(&self) -> Result<Self, EvalError> {
        let c = self.value().cos();
        if c.abs() < TRIG_POLE_GUARD {
            return Err(EvalError::Pole {
                function: "sec",
                value: self.value(),
            });
        }
        self.cos().recip()
    }

    pub fn tan(&self) -> Result<Self, EvalError> {
        let c = self.value().cos();
        if c.abs() < TRIG_POLE_GUARD {
            return Err(EvalError::Pole {
                function: "tan",
                value: self.value(),
            });
        }
        Ok(self.sin().product(&self.cos().recip()?))
    }

    pub fn sqrt(&self) -> Result<Self, EvalError> {
        let v = self.value();
        if v < 0.0 || (v == 0.0 && self.order > 0) {
            return Err(EvalError::Domain {
                function: "sqrt",
                value: v,
            });
        }
        let root = v.sqrt();
        // generalized binomial coefficients C(1/2, k) * v^(1/2 - k)
        let mut series = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            }
            series.push(binom * root / v.powi(k as i32));
        }
        Ok(self.compose(&series))
    }

    pub fn powi(&self, n: i32) -> Result<Self, EvalError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Self::constant(self.base, self.order, 1.0);
        let mut square = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = result.product(&square);
            }
            k >>= 1;
            if k > 0 {
                square = square.product(&square);
            }
        }
        Ok(result)
    }
}

/// `|cos| < TRIG_POLE_GUARD` is treated as a pole of `tan` and `sec`.
pub const TRIG_POLE_GUARD: f64 = 1e-12;

fn taylor_from_derivatives(order: usize, deriv: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            deriv(k) / fact
        })
        .collect()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { (&self).$m(&rhs) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: [f64; 4] = [0.3, -0.7, 1.1, 0.4];

    #[test]
    fn layout_sizes() {
        assert_eq!(
            (0..=4).map(coefficient_count).collect::<Vec<_>>(),
            vec![1, 5, 15, 35, 70]
        );
        for i in 0..coefficient_count(4) {
            assert_eq!(monomial_index(&monomial(i)), Some(i));
        }
    }

    #[test]
    fn fourth_power_has_fourth_derivative_24() {
        let q = Jet::variable([0.0, 0.0, 0.0, 1.0], 4, 3);
        let f = q.powi(4).unwrap();
        assert_eq!(f.partial(&[0, 0, 0, 4]), 24.0);
        assert_eq!(f.value(), 1.0);
        assert_eq!(f.partial(&[0, 0, 0, 1]), 4.0);
    }

    #[test]
    fn sin_at_zero() {
        let a = Jet::variable([0.0; 4], 3, 2);
        let s = a.sin();
        assert_eq!(s.value(), 0.0);
        assert_eq!(s.partial(&[0, 0, 1, 0]), 1.0);
        assert_eq!(s.partial(&[0, 0, 3, 0]), -1.0);
    }

    #[test]
    fn product_rule_matches_truncated_polynomial_product() {
        let x = Jet::variable(P, 4, 0);
        let y = Jet::variable(P, 4, 1);
        let f = &(&x * &y) + &x.powi(2).unwrap();
        let g = &y.powi(3).unwrap() - &x;
        let fg = &f * &g;
        // d/dx d/dy of (xy + x^2)(y^3 - x) at P computed by hand
        let (x0, y0) = (P[0], P[1]);
        // f_xy g + f_x g_y + f_y g_x + f g_xy, with
        // f_x = y + 2x, f_y = x, f_xy = 1, g_x = -1, g_y = 3y^2, g_xy = 0
        let fx = y0 + 2.0 * x0;
        let fy = x0;
        let g0 = y0.powi(3) - x0;
        let direct = g0 + fx * 3.0 * y0 * y0 - fy;
        assert!((fg.partial(&[1, 1, 0, 0]) - direct).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_roundtrip() {
        let z = Jet::variable(P, 4, 2);
        let f = (&z.sin() + &Jet::constant(P, 4, 2.0)).recip().unwrap();
        let g = &(&z.sin() + &Jet::constant(P, 4, 2.0)) * &f;
        assert!((g.value() - 1.0).abs() < 1e-15);
        for c in &g.coefficients()[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn tan_identity() {
        let a = Jet::variable(P, 4, 2);
        let t = a.tan().unwrap();
        let s = a.sec().unwrap();
        // sec^2 - tan^2 = 1
        let one = &(&s * &s) - &(&t * &t);
        assert!((one.value() - 1.0).abs() < 1e-13);
        for c in &one.coefficients()[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let y = Jet::variable(P, 4, 1);
        let u = &(&y * &y) + &Jet::constant(P, 4, 1.5);
        let r = u.sqrt().unwrap();
        let back = &r * &r;
        for (a, b) in back.coefficients().iter().zip(u.coefficients()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn poles_are_reported() {
        let z = Jet::variable([0.0; 4], 2, 0);
        assert!(matches!(z.recip(), Err(EvalError::Pole { .. })));
        let a = Jet::variable([0.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0], 2, 2);
        assert!(a.sec().is_err());
        assert!(a.tan().is_err());
        assert!(Jet::variable([-1.0, 0.0, 0.0, 0.0], 1, 0).sqrt().is_err());
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Jet::variable(P, 3, 0);
        let f = x.powi(3).unwrap();
        let d = f.derivative(0);
        assert_eq!(d.order(), 2);
        assert!((d.value() - 3.0 * P[0] * P[0]).abs() < 1e-15);
        assert!((d.partial(&[1, 0, 0, 0]) - 6.0 * P[0]).abs() < 1e-15);
    }
}
