//! Exterior algebra over a chart: antisymmetric forms stored by increasing
//! multi-index, wedge and interior products, Hodge duality, musical
//! isomorphisms, and pointwise frames.
//!
//! Components are kept in lexicographic order of the increasing multi-index,
//! so a p-form on an n-dimensional chart holds C(n, p) entries. Degrees
//! above n are legal and have no components. The same combinatorial kernels
//! run over plain complex numbers and over jets, which keeps the derivative
//! path and the value path structurally identical.

use ndarray::{Array1, Array2};

use crate::error::CoreError;
use crate::jet::{Jet1, Jet2, Point, ScalarField};
use crate::linalg;
use crate::C64;

// ---------------------------------------------------------------------------
// multi-index combinatorics

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All increasing p-element multi-indices over {0, .., n-1}, lexicographic.
pub fn multi_indices(n: usize, p: usize) -> Vec<Vec<usize>> {
    if p > n {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n, p));
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination in lex order
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - p {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..p {
            cur[j] = cur[j - 1] + 1;
        }
        if p == 0 {
            return out;
        }
    }
}

/// Lexicographic rank of an increasing multi-index.
pub fn index_rank(n: usize, idx: &[usize]) -> usize {
    let p = idx.len();
    let mut rank = 0;
    let mut prev: isize = -1;
    for (i, &c) in idx.iter().enumerate() {
        for j in (prev + 1) as usize..c {
            rank += binomial(n - 1 - j, p - 1 - i);
        }
        prev = c as isize;
    }
    rank
}

/// Sort an index tuple in place, returning the permutation sign, or None if
/// an index repeats.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    let len = idx.len();
    for i in 0..len {
        for j in 0..len - 1 - i {
            match idx[j].cmp(&idx[j + 1]) {
                std::cmp::Ordering::Greater => {
                    idx.swap(j, j + 1);
                    sign = -sign;
                }
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(sign)
}

/// Sign of the shuffle that merges two disjoint increasing index lists into
/// one increasing list.
pub fn merge_sign(a: &[usize], b: &[usize]) -> i32 {
    let mut inversions = 0;
    for &x in b {
        inversions += a.iter().filter(|&&y| y > x).count();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of the permutation taking (0, .., n-1) to the concatenation of the
/// given increasing lists. Used for the orientation factor in Hodge duality.
pub fn permutation_sign(parts: &[&[usize]]) -> i32 {
    let mut seq: Vec<usize> = parts.iter().flat_map(|s| s.iter().copied()).collect();
    sort_with_sign(&mut seq).expect("permutation with repeats")
}

// ---------------------------------------------------------------------------
// scalar abstraction shared by numeric and jet-valued forms

/// Minimal ring interface the form kernels need.
pub trait FormScalar: Clone {
    fn fs_add(&self, o: &Self) -> Self;
    fn fs_sub(&self, o: &Self) -> Self;
    fn fs_mul(&self, o: &Self) -> Self;
    fn fs_neg(&self) -> Self;
}

impl FormScalar for C64 {
    fn fs_add(&self, o: &Self) -> Self {
        self + o
    }
    fn fs_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn fs_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn fs_neg(&self) -> Self {
        -self
    }
}

impl FormScalar for Jet2 {
    fn fs_add(&self, o: &Self) -> Self {
        self + o
    }
    fn fs_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn fs_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn fs_neg(&self) -> Self {
        -self
    }
}

impl FormScalar for Jet1 {
    fn fs_add(&self, o: &Self) -> Self {
        self + o
    }
    fn fs_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn fs_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn fs_neg(&self) -> Self {
        -self
    }
}

/// Antisymmetric p-form with coefficients in any ring.
#[derive(Clone, Debug)]
pub struct GenForm<T> {
    n: usize,
    p: usize,
    comps: Vec<T>,
}

/// Numeric form: the common pointwise case.
pub type PForm = GenForm<C64>;
/// Form whose coefficients carry value, gradient and Hessian.
pub type JetForm = GenForm<Jet2>;
/// Form whose coefficients carry value and gradient.
pub type Jet1Form = GenForm<Jet1>;

impl<T: FormScalar> GenForm<T> {
    pub fn new(n: usize, p: usize, comps: Vec<T>) -> Result<Self, CoreError> {
        let want = binomial(n, p);
        if comps.len() != want {
            return Err(CoreError::DimensionMismatch(format!(
                "degree-{p} form on {n} coordinates needs {want} components, got {}",
                comps.len()
            )));
        }
        Ok(GenForm { n, p, comps })
    }

    pub fn filled(n: usize, p: usize, value: T) -> Self {
        GenForm {
            n,
            p,
            comps: vec![value; binomial(n, p)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn comps(&self) -> &[T] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [T] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<T> {
        self.comps
    }

    /// Component at an increasing multi-index.
    pub fn comp(&self, idx: &[usize]) -> &T {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        &self.comps[index_rank(self.n, idx)]
    }

    /// Component at an arbitrary index tuple: the sign of the sorting
    /// permutation together with the stored component, or None when an
    /// index repeats (the component is then zero).
    pub fn comp_signed(&self, idx: &[usize]) -> Option<(i32, &T)> {
        let mut sorted = idx.to_vec();
        let sign = sort_with_sign(&mut sorted)?;
        Some((sign, &self.comps[index_rank(self.n, &sorted)]))
    }

    pub fn map<U: FormScalar>(&self, f: impl Fn(&T) -> U) -> GenForm<U> {
        GenForm {
            n: self.n,
            p: self.p,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.n, self.p), (o.n, o.p), "form shape mismatch");
        GenForm {
            n: self.n,
            p: self.p,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.fs_add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.n, self.p), (o.n, o.p), "form shape mismatch");
        GenForm {
            n: self.n,
            p: self.p,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.fs_sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.fs_mul(c))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.fs_neg())
    }

    /// Wedge product via the shuffle expansion over increasing indices.
    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n, "form chart mismatch");
        let n = self.n;
        let (p, q) = (self.p, o.p);
        let out_indices = multi_indices(n, p + q);
        let mut comps: Vec<Option<T>> = vec![None; out_indices.len()];
        let left = multi_indices(n, p);
        for (li, lidx) in left.iter().enumerate() {
            for (ri, ridx) in multi_indices(n, q).iter().enumerate() {
                if lidx.iter().any(|i| ridx.contains(i)) {
                    continue;
                }
                let sign = merge_sign(lidx, ridx);
                let mut merged: Vec<usize> = lidx.iter().chain(ridx.iter()).copied().collect();
                merged.sort_unstable();
                let slot = index_rank(n, &merged);
                let mut term = self.comps[li].fs_mul(&o.comps[ri]);
                if sign < 0 {
                    term = term.fs_neg();
                }
                comps[slot] = Some(match comps[slot].take() {
                    Some(acc) => acc.fs_add(&term),
                    None => term,
                });
            }
        }
        GenForm {
            n,
            p: p + q,
            comps: comps
                .into_iter()
                .map(|c| c.expect("every output index receives a shuffle term"))
                .collect(),
        }
    }

    /// Interior product with a vector given by its chart components.
    /// The contraction fills the first slot of the form.
    pub fn interior(&self, v: &[T]) -> Result<Self, CoreError> {
        if self.p == 0 {
            return Err(CoreError::InconsistentInput(
                "interior product of a degree-0 form".into(),
            ));
        }
        assert_eq!(v.len(), self.n, "vector length mismatch");
        let n = self.n;
        let q = self.p - 1;
        let out_indices = multi_indices(n, q);
        let mut comps: Vec<Option<T>> = vec![None; out_indices.len()];
        for (slot, jdx) in out_indices.iter().enumerate() {
            for i in 0..n {
                if jdx.contains(&i) {
                    continue;
                }
                // position of i within the sorted tuple determines the sign
                let pos = jdx.iter().filter(|&&j| j < i).count();
                let mut full: Vec<usize> = jdx.clone();
                full.insert(pos, i);
                let mut term = v[i].fs_mul(&self.comps[index_rank(n, &full)]);
                if pos % 2 == 1 {
                    term = term.fs_neg();
                }
                comps[slot] = Some(match comps[slot].take() {
                    Some(acc) => acc.fs_add(&term),
                    None => term,
                });
            }
        }
        Ok(GenForm {
            n,
            p: q,
            comps: comps
                .into_iter()
                .map(|c| c.expect("contraction always receives terms"))
                .collect(),
        })
    }
}

impl GenForm<C64> {
    pub fn zero(n: usize, p: usize) -> Self {
        Self::filled(n, p, C64::new(0.0, 0.0))
    }

    /// A 1-form from covector components.
    pub fn from_covector(v: &Array1<C64>) -> Self {
        GenForm {
            n: v.len(),
            p: 1,
            comps: v.to_vec(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs_slice(&self.comps)
    }

    /// Evaluate on vectors: sum over increasing indices of component times
    /// the minor determinant of the vector components.
    pub fn apply(&self, vectors: &[&Array1<C64>]) -> C64 {
        assert_eq!(vectors.len(), self.p, "arity mismatch");
        let mut acc = C64::new(0.0, 0.0);
        for (slot, idx) in multi_indices(self.n, self.p).iter().enumerate() {
            if self.comps[slot].norm() == 0.0 {
                continue;
            }
            acc += self.comps[slot] * minor_det(vectors, idx);
        }
        acc
    }

    /// Raise all indices with the inverse metric: the increasing-index
    /// coefficients of the fully contravariant form.
    pub fn raise_all(&self, g_inv: &Array2<C64>) -> Self {
        let indices = multi_indices(self.n, self.p);
        let mut out = Vec::with_capacity(indices.len());
        for idx in &indices {
            let mut acc = C64::new(0.0, 0.0);
            for (kslot, kdx) in indices.iter().enumerate() {
                acc += minor_det_matrix(g_inv, idx, kdx) * self.comps[kslot];
            }
            out.push(acc);
        }
        GenForm {
            n: self.n,
            p: self.p,
            comps: out,
        }
    }

    /// Metric pairing of two p-forms over increasing indices, complex
    /// bilinear in both arguments.
    pub fn pairing(&self, o: &Self, g_inv: &Array2<C64>) -> C64 {
        assert_eq!((self.n, self.p), (o.n, o.p), "form shape mismatch");
        let raised = self.raise_all(g_inv);
        raised
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Hodge dual with respect to a metric. The volume factor uses the
    /// modulus of det g, which is the standard choice for real metrics of
    /// any signature.
    pub fn hodge(&self, g: &Array2<C64>, g_inv: &Array2<C64>) -> Result<Self, CoreError> {
        let n = self.n;
        let detg = linalg::det(g)?;
        let vol = detg.norm().sqrt();
        let raised = self.raise_all(g_inv);
        let full: Vec<usize> = (0..n).collect();
        let out_indices = multi_indices(n, n - self.p);
        let mut comps = vec![C64::new(0.0, 0.0); out_indices.len()];
        for (slot, idx) in multi_indices(n, self.p).iter().enumerate() {
            let comp: Vec<usize> = full.iter().copied().filter(|i| !idx.contains(i)).collect();
            let sign = permutation_sign(&[idx, &comp]);
            let out_slot = index_rank(n, &comp);
            comps[out_slot] += raised.comps[slot] * (sign as f64) * vol;
        }
        GenForm::new(n, n - self.p, comps)
    }
}

/// Determinant of the p x p matrix with rows picked by `idx` from the given
/// vectors (columns). Expansion over permutations; degrees stay small.
fn minor_det(vectors: &[&Array1<C64>], idx: &[usize]) -> C64 {
    let p = idx.len();
    match p {
        0 => C64::new(1.0, 0.0),
        1 => vectors[0][idx[0]],
        2 => {
            vectors[0][idx[0]] * vectors[1][idx[1]] - vectors[0][idx[1]] * vectors[1][idx[0]]
        }
        _ => {
            // Laplace expansion along the first column.
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..p {
                let sub_rows: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != r)
                    .map(|(_, &i)| i)
                    .collect();
                let sub = minor_det(&vectors[1..], &sub_rows);
                let term = vectors[0][idx[r]] * sub;
                if r % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

/// Determinant of the minor of `m` with the given rows and columns.
fn minor_det_matrix(m: &Array2<C64>, rows: &[usize], cols: &[usize]) -> C64 {
    let p = rows.len();
    debug_assert_eq!(p, cols.len());
    match p {
        0 => C64::new(1.0, 0.0),
        1 => m[[rows[0], cols[0]]],
        2 => {
            m[[rows[0], cols[0]]] * m[[rows[1], cols[1]]]
                - m[[rows[0], cols[1]]] * m[[rows[1], cols[0]]]
        }
        _ => {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..p {
                let sub_cols: Vec<usize> = cols
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != c)
                    .map(|(_, &j)| j)
                    .collect();
                let sub = minor_det_matrix(m, &rows[1..], &sub_cols);
                let term = m[[rows[0], cols[c]]] * sub;
                if c % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

/// Lower an index: covector components of g(v, .).
pub fn flat(g: &Array2<C64>, v: &Array1<C64>) -> Array1<C64> {
    g.dot(v)
}

/// Raise an index: vector components of the metric dual of a covector.
pub fn sharp(g_inv: &Array2<C64>, xi: &Array1<C64>) -> Array1<C64> {
    g_inv.dot(xi)
}

// ---------------------------------------------------------------------------
// exterior derivative on jet-valued forms

impl GenForm<Jet2> {
    pub fn values(&self) -> PForm {
        self.map(|j| j.value)
    }

    /// Exterior derivative, keeping one more derivative order in the output
    /// so d can be applied once more.
    pub fn d(&self) -> Jet1Form {
        let n = self.n;
        let out_indices = multi_indices(n, self.p + 1);
        let mut comps = Vec::with_capacity(out_indices.len());
        for kdx in &out_indices {
            let mut acc: Option<Jet1> = None;
            for (a, &k) in kdx.iter().enumerate() {
                let rest: Vec<usize> = kdx
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .map(|(_, &i)| i)
                    .collect();
                let mut term = self.comps[index_rank(n, &rest)].partial(k);
                if a % 2 == 1 {
                    term = -&term;
                }
                acc = Some(match acc {
                    Some(s) => &s + &term,
                    None => term,
                });
            }
            comps.push(acc.expect("degree above zero"));
        }
        GenForm {
            n,
            p: self.p + 1,
            comps,
        }
    }
}

impl GenForm<Jet1> {
    pub fn values(&self) -> PForm {
        self.map(|j| j.value)
    }

    /// Exterior derivative of a first-order form; only values survive.
    pub fn d(&self) -> PForm {
        let n = self.n;
        let out_indices = multi_indices(n, self.p + 1);
        let mut comps = Vec::with_capacity(out_indices.len());
        for kdx in &out_indices {
            let mut acc = C64::new(0.0, 0.0);
            for (a, &k) in kdx.iter().enumerate() {
                let rest: Vec<usize> = kdx
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .map(|(_, &i)| i)
                    .collect();
                let term = self.comps[index_rank(n, &rest)].grad[k];
                if a % 2 == 1 {
                    acc -= term;
                } else {
                    acc += term;
                }
            }
            comps.push(acc);
        }
        GenForm {
            n,
            p: self.p + 1,
            comps,
        }
    }
}

// ---------------------------------------------------------------------------
// field-level forms

/// A p-form field: one scalar field per increasing multi-index.
#[derive(Clone, Debug)]
pub struct FormField {
    n: usize,
    p: usize,
    comps: Vec<ScalarField>,
}

impl FormField {
    pub fn new(n: usize, p: usize, comps: Vec<ScalarField>) -> Result<Self, CoreError> {
        let want = binomial(n, p);
        if comps.len() != want {
            return Err(CoreError::DimensionMismatch(format!(
                "degree-{p} form field on {n} coordinates needs {want} components, got {}",
                comps.len()
            )));
        }
        if comps.iter().any(|c| c.dim() != n) {
            return Err(CoreError::DimensionMismatch(
                "component field over a different chart".into(),
            ));
        }
        Ok(FormField { n, p, comps })
    }

    pub fn zero(n: usize, p: usize) -> Self {
        FormField {
            n,
            p,
            comps: vec![ScalarField::zero(n); binomial(n, p)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn eval(&self, pt: &Point) -> Result<JetForm, CoreError> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.eval(pt))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GenForm {
            n: self.n,
            p: self.p,
            comps,
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.n, self.p), (o.n, o.p));
        FormField {
            n: self.n,
            p: self.p,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.n, self.p), (o.n, o.p));
        FormField {
            n: self.n,
            p: self.p,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Multiply every component by a scalar field.
    pub fn scale_field(&self, s: &ScalarField) -> Self {
        FormField {
            n: self.n,
            p: self.p,
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        FormField {
            n: self.n,
            p: self.p,
            comps: self.comps.iter().map(|f| f * c).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// pointwise frames

/// Label for one frame leg. `Down(k)` and `Up(k)` are metric-dual partners;
/// `Zero` is the extra unit leg present in odd dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Leg {
    Down(usize),
    Up(usize),
    Zero,
}

impl Leg {
    /// The leg whose metric pairing with this one is 1.
    pub fn dual(self) -> Leg {
        match self {
            Leg::Down(k) => Leg::Up(k),
            Leg::Up(k) => Leg::Down(k),
            Leg::Zero => Leg::Zero,
        }
    }
}

impl std::fmt::Display for Leg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Leg::Down(k) => write!(f, "V_{}", k + 1),
            Leg::Up(k) => write!(f, "V^{}", k + 1),
            Leg::Zero => write!(f, "V_0"),
        }
    }
}

/// A frame at a single point: coframe covectors, the dual frame vectors,
/// and the metric pairing between frame legs.
///
/// Leg order: a < m is `Down(a)`, m <= a < 2m is `Up(a - m)`, and leg 2m
/// (odd dimensions only) is `Zero`.
#[derive(Clone, Debug)]
pub struct FrameAtPoint {
    pub m: usize,
    pub odd: bool,
    pub coframe: Vec<Array1<C64>>,
    pub vectors: Vec<Array1<C64>>,
    gram: Array2<C64>,
}

impl FrameAtPoint {
    pub fn n(&self) -> usize {
        2 * self.m + usize::from(self.odd)
    }

    pub fn legs(&self) -> Vec<Leg> {
        let mut out: Vec<Leg> = (0..self.m)
            .map(Leg::Down)
            .chain((0..self.m).map(Leg::Up))
            .collect();
        if self.odd {
            out.push(Leg::Zero);
        }
        out
    }

    pub fn leg(&self, a: usize) -> Leg {
        if a < self.m {
            Leg::Down(a)
        } else if a < 2 * self.m {
            Leg::Up(a - self.m)
        } else {
            Leg::Zero
        }
    }

    pub fn leg_index(&self, l: Leg) -> usize {
        match l {
            Leg::Down(k) => k,
            Leg::Up(k) => self.m + k,
            Leg::Zero => 2 * self.m,
        }
    }

    /// Build from coframe covectors; the frame vectors come from inverting
    /// the coframe matrix, so duality holds to machine precision by
    /// construction.
    pub fn from_coframe(
        m: usize,
        odd: bool,
        coframe: Vec<Array1<C64>>,
        g: &Array2<C64>,
    ) -> Result<Self, CoreError> {
        let n = 2 * m + usize::from(odd);
        if coframe.len() != n || coframe.iter().any(|c| c.len() != n) {
            return Err(CoreError::DimensionMismatch(
                "coframe must hold n covectors of length n".into(),
            ));
        }
        let mut t = Array2::<C64>::zeros((n, n));
        for (a, theta) in coframe.iter().enumerate() {
            for i in 0..n {
                t[[a, i]] = theta[i];
            }
        }
        let u = linalg::inv(&t)?;
        let vectors: Vec<Array1<C64>> = (0..n).map(|b| u.column(b).to_owned()).collect();
        let mut gram = Array2::<C64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += vectors[a][i] * g[[i, j]] * vectors[b][j];
                    }
                }
                gram[[a, b]] = acc;
            }
        }
        Ok(FrameAtPoint {
            m,
            odd,
            coframe,
            vectors,
            gram,
        })
    }

    pub fn pairing(&self) -> &Array2<C64> {
        &self.gram
    }

    pub fn vector(&self, l: Leg) -> &Array1<C64> {
        &self.vectors[self.leg_index(l)]
    }

    pub fn covector(&self, l: Leg) -> &Array1<C64> {
        &self.coframe[self.leg_index(l)]
    }

    /// The pairing matrix a canonical frame must reproduce: dual legs pair
    /// to 1, the odd leg is unit, everything else vanishes.
    pub fn canonical_pairing(m: usize, odd: bool) -> Array2<C64> {
        let n = 2 * m + usize::from(odd);
        let mut gram = Array2::<C64>::zeros((n, n));
        for k in 0..m {
            gram[[k, m + k]] = C64::new(1.0, 0.0);
            gram[[m + k, k]] = C64::new(1.0, 0.0);
        }
        if odd {
            gram[[2 * m, 2 * m]] = C64::new(1.0, 0.0);
        }
        gram
    }

    /// Largest deviation of the frame pairing from the canonical one.
    pub fn pairing_residual(&self) -> f64 {
        let want = Self::canonical_pairing(self.m, self.odd);
        linalg::max_abs(&(&self.gram - &want))
    }
}
