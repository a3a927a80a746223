//! Second-order jets and scalar fields on a real chart.
//!
//! A `Jet2` carries a complex value together with its gradient and Hessian
//! with respect to the chart coordinates. Arithmetic on jets propagates
//! derivatives exactly (to machine precision), so every residual downstream
//! is free of finite-difference truncation error. Finite differences appear
//! only in tests, as an independent oracle.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::CoreError;
use crate::C64;

/// Arguments smaller than this in modulus poison a division or square root.
pub const SINGULAR_EPS: f64 = 1e-13;

/// A point of the (real) coordinate chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x:.6}")?;
        }
        write!(f, ")")
    }
}

/// Value and gradient only. Used where a first derivative of an already
/// derived quantity is needed (frame curvature, d after d).
#[derive(Clone, Debug)]
pub struct Jet1 {
    pub value: C64,
    pub grad: Vec<C64>,
}

impl Jet1 {
    pub fn constant(n: usize, value: C64) -> Self {
        Jet1 {
            value,
            grad: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }
}

/// Value, gradient and symmetric Hessian of a scalar at a chart point.
///
/// The Hessian is stored dense in row-major order; both triangles are kept
/// and stay bitwise equal because every recurrence below is symmetric in
/// the two derivative indices.
#[derive(Clone, Debug)]
pub struct Jet2 {
    pub value: C64,
    pub grad: Vec<C64>,
    pub hess: Vec<C64>,
    /// True once any op divided by, or took a root of, a near-zero argument.
    pub singular: bool,
}

impl Jet2 {
    pub fn constant(n: usize, value: C64) -> Self {
        Jet2 {
            value,
            grad: vec![C64::new(0.0, 0.0); n],
            hess: vec![C64::new(0.0, 0.0); n * n],
            singular: false,
        }
    }

    pub fn real_constant(n: usize, value: f64) -> Self {
        Self::constant(n, C64::new(value, 0.0))
    }

    /// The k-th coordinate function evaluated at `x`: value x_k, gradient e_k.
    pub fn coordinate(n: usize, k: usize, x: f64) -> Self {
        let mut j = Self::real_constant(n, x);
        j.grad[k] = C64::new(1.0, 0.0);
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> C64 {
        self.hess[i * self.dim() + j]
    }

    /// First-order part of the k-th partial derivative: the value is
    /// grad[k] and the gradient is the k-th Hessian row. This is what makes
    /// first derivatives of derived quantities available without third-order
    /// jets.
    pub fn partial(&self, k: usize) -> Jet1 {
        let n = self.dim();
        Jet1 {
            value: self.grad[k],
            grad: self.hess[k * n..(k + 1) * n].to_vec(),
        }
    }

    pub fn truncate(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            grad: self.grad.clone(),
        }
    }

    fn binary_dims(&self, rhs: &Jet2) -> usize {
        debug_assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        self.dim()
    }

    /// Multiplicative inverse. Poisons the result when |value| < SINGULAR_EPS.
    pub fn recip(&self) -> Jet2 {
        let n = self.dim();
        let singular = self.singular || self.value.norm() < SINGULAR_EPS;
        let w = C64::new(1.0, 0.0) / self.value;
        let w2 = w * w;
        let w3 = w2 * w;
        let two = C64::new(2.0, 0.0);
        let mut grad = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            grad[i] = -w2 * self.grad[i];
        }
        let mut hess = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] =
                    -w2 * self.hess[i * n + j] + two * w3 * (self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: w,
            grad,
            hess,
            singular,
        }
    }

    /// Principal square root. Poisons the result near the branch point.
    pub fn sqrt(&self) -> Jet2 {
        let n = self.dim();
        let singular = self.singular || self.value.norm() < SINGULAR_EPS;
        let s = self.value.sqrt();
        let half_inv = C64::new(0.5, 0.0) / s;
        // d²√f = f''/(2√f) - f'f'/(4 f √f)
        let quarter_inv3 = C64::new(0.25, 0.0) / (s * self.value);
        let mut grad = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            grad[i] = half_inv * self.grad[i];
        }
        let mut hess = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = half_inv * self.hess[i * n + j]
                    - quarter_inv3 * (self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: s,
            grad,
            hess,
            singular,
        }
    }

    pub fn sin(&self) -> Jet2 {
        self.compose(self.value.sin(), self.value.cos(), -self.value.sin())
    }

    pub fn cos(&self) -> Jet2 {
        self.compose(self.value.cos(), -self.value.sin(), -self.value.cos())
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    /// Chain rule for a scalar function with value `f0`, derivative `f1` and
    /// second derivative `f2` at self.value.
    fn compose(&self, f0: C64, f1: C64, f2: C64) -> Jet2 {
        let n = self.dim();
        let mut grad = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            grad[i] = f1 * self.grad[i];
        }
        let mut hess = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] =
                    f1 * self.hess[i * n + j] + f2 * (self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
            singular: self.singular,
        }
    }

    /// Integer power by repeated multiplication; negative exponents go
    /// through `recip`.
    pub fn powi(&self, k: i32) -> Jet2 {
        let n = self.dim();
        if k == 0 {
            return Jet2::real_constant(n, 1.0);
        }
        let base = if k < 0 { self.recip() } else { self.clone() };
        let mut acc = base.clone();
        for _ in 1..k.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn scale(&self, c: C64) -> Jet2 {
        let n = self.dim();
        let mut out = self.clone();
        out.value = c * out.value;
        for i in 0..n {
            out.grad[i] = c * out.grad[i];
        }
        for e in out.hess.iter_mut() {
            *e = c * *e;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        let ok = |z: &C64| z.re.is_finite() && z.im.is_finite();
        ok(&self.value) && self.grad.iter().all(ok) && self.hess.iter().all(ok)
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        let n = self.binary_dims(rhs);
        let mut out = Jet2::constant(n, self.value + rhs.value);
        for i in 0..n {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        for k in 0..n * n {
            out.hess[k] = self.hess[k] + rhs.hess[k];
        }
        out.singular = self.singular || rhs.singular;
        out
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        let n = self.binary_dims(rhs);
        let mut out = Jet2::constant(n, self.value - rhs.value);
        for i in 0..n {
            out.grad[i] = self.grad[i] - rhs.grad[i];
        }
        for k in 0..n * n {
            out.hess[k] = self.hess[k] - rhs.hess[k];
        }
        out.singular = self.singular || rhs.singular;
        out
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let n = self.binary_dims(rhs);
        let mut out = Jet2::constant(n, self.value * rhs.value);
        for i in 0..n {
            out.grad[i] = self.grad[i] * rhs.value + self.value * rhs.grad[i];
        }
        // (fg)'' = f''g + f'g' + g'f' + fg''; the middle pair keeps the
        // expression symmetric in i and j term by term.
        for i in 0..n {
            for j in 0..n {
                out.hess[i * n + j] = self.hess[i * n + j] * rhs.value
                    + (self.grad[i] * rhs.grad[j] + self.grad[j] * rhs.grad[i])
                    + self.value * rhs.hess[i * n + j];
            }
        }
        out.singular = self.singular || rhs.singular;
        out
    }
}

impl Div for &Jet2 {
    type Output = Jet2;
    fn div(self, rhs: &Jet2) -> Jet2 {
        self * &rhs.recip()
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

macro_rules! jet2_owned_ops {
    ($($trait:ident :: $method:ident),*) => {$(
        impl $trait for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 { (&self).$method(&rhs) }
        }
        impl $trait<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 { (&self).$method(rhs) }
        }
        impl $trait<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 { self.$method(&rhs) }
        }
    )*};
}
jet2_owned_ops!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        -&self
    }
}

impl Mul<C64> for &Jet2 {
    type Output = Jet2;
    fn mul(self, c: C64) -> Jet2 {
        self.scale(c)
    }
}

impl Mul<C64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: C64) -> Jet2 {
        self.scale(c)
    }
}

impl Mul<f64> for &Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(C64::new(c, 0.0))
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(C64::new(c, 0.0))
    }
}

impl Add<C64> for &Jet2 {
    type Output = Jet2;
    fn add(self, c: C64) -> Jet2 {
        let mut out = self.clone();
        out.value += c;
        out
    }
}

impl Add<f64> for &Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        self + C64::new(c, 0.0)
    }
}

impl Sub<f64> for &Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        self + C64::new(-c, 0.0)
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        &self - c
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        &self + c
    }
}

// Jet1 arithmetic is the first-order restriction of the rules above.

impl Add for &Jet1 {
    type Output = Jet1;
    fn add(self, rhs: &Jet1) -> Jet1 {
        debug_assert_eq!(self.dim(), rhs.dim());
        Jet1 {
            value: self.value + rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: &Jet1) -> Jet1 {
        debug_assert_eq!(self.dim(), rhs.dim());
        Jet1 {
            value: self.value - rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: &Jet1) -> Jet1 {
        debug_assert_eq!(self.dim(), rhs.dim());
        Jet1 {
            value: self.value * rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a * rhs.value + self.value * b)
                .collect(),
        }
    }
}

impl Neg for &Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            value: -self.value,
            grad: self.grad.iter().map(|a| -a).collect(),
        }
    }
}

macro_rules! jet1_owned_ops {
    ($($trait:ident :: $method:ident),*) => {$(
        impl $trait for Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: Jet1) -> Jet1 { (&self).$method(&rhs) }
        }
        impl $trait<&Jet1> for Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: &Jet1) -> Jet1 { (&self).$method(rhs) }
        }
        impl $trait<Jet1> for &Jet1 {
            type Output = Jet1;
            fn $method(self, rhs: Jet1) -> Jet1 { self.$method(&rhs) }
        }
    )*};
}
jet1_owned_ops!(Add::add, Sub::sub, Mul::mul);

impl Mul<C64> for &Jet1 {
    type Output = Jet1;
    fn mul(self, c: C64) -> Jet1 {
        Jet1 {
            value: c * self.value,
            grad: self.grad.iter().map(|a| c * a).collect(),
        }
    }
}

impl Mul<C64> for Jet1 {
    type Output = Jet1;
    fn mul(self, c: C64) -> Jet1 {
        (&self).mul(c)
    }
}

/// A complex scalar field over an n-dimensional real chart, evaluated
/// through second-order jets. Cloning is cheap (shared closure).
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    f: Arc<dyn Fn(&Point) -> Jet2 + Send + Sync>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.dim).finish()
    }
}

impl ScalarField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate, rejecting poisoned or non-finite results.
    pub fn eval(&self, p: &Point) -> Result<Jet2, CoreError> {
        if p.dim() != self.dim {
            return Err(CoreError::DimensionMismatch(format!(
                "field over {} coordinates evaluated at a {}-dimensional point",
                self.dim,
                p.dim()
            )));
        }
        let jet = (self.f)(p);
        if jet.singular {
            return Err(CoreError::SingularEvaluation {
                what: "guarded denominator or root".into(),
                point: p.coords.clone(),
            });
        }
        if !jet.is_finite() {
            return Err(CoreError::NonFinite {
                point: p.coords.clone(),
            });
        }
        Ok(jet)
    }

    /// Value without derivative checks; still rejects poisoned evaluations.
    pub fn value(&self, p: &Point) -> Result<C64, CoreError> {
        Ok(self.eval(p)?.value)
    }

    pub fn coordinate(dim: usize, k: usize) -> Self {
        assert!(k < dim, "coordinate index out of range");
        ScalarField {
            dim,
            f: Arc::new(move |p: &Point| Jet2::coordinate(dim, k, p.coords[k])),
        }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        ScalarField {
            dim,
            f: Arc::new(move |_p: &Point| Jet2::constant(dim, c)),
        }
    }

    pub fn real_constant(dim: usize, c: f64) -> Self {
        Self::constant(dim, C64::new(c, 0.0))
    }

    pub fn zero(dim: usize) -> Self {
        Self::real_constant(dim, 0.0)
    }

    /// Build a field from a closure over the lifted coordinate jets. This is
    /// the workhorse constructor: write the formula once in jet arithmetic
    /// and evaluation at any point provides exact derivatives.
    pub fn from_jets<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet2]) -> Jet2 + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            f: Arc::new(move |p: &Point| {
                let coords: Vec<Jet2> = (0..dim)
                    .map(|k| Jet2::coordinate(dim, k, p.coords[k]))
                    .collect();
                f(&coords)
            }),
        }
    }

    /// Raw constructor for fields assembled from other fields.
    pub fn from_raw<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Point) -> Jet2 + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            f: Arc::new(f),
        }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.dim, rhs.dim);
        let (a, b) = (self.f.clone(), rhs.f.clone());
        ScalarField::from_raw(self.dim, move |p| &a(p) + &b(p))
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.dim, rhs.dim);
        let (a, b) = (self.f.clone(), rhs.f.clone());
        ScalarField::from_raw(self.dim, move |p| &a(p) - &b(p))
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        assert_eq!(self.dim, rhs.dim);
        let (a, b) = (self.f.clone(), rhs.f.clone());
        ScalarField::from_raw(self.dim, move |p| &a(p) * &b(p))
    }
}

impl Mul<C64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, c: C64) -> ScalarField {
        let a = self.f.clone();
        ScalarField::from_raw(self.dim, move |p| a(p).scale(c))
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self * C64::new(-1.0, 0.0)
    }
}
