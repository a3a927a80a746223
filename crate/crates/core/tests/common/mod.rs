//! Shared test helpers: a dense antisymmetric tensor type used as an
//! independent oracle for the increasing-index form algebra.
//!
//! Everything here stores all n^p entries and works through full index
//! loops, deliberately avoiding the combinatorial shortcuts of the library
//! code so that agreement between the two is meaningful.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use yano_core::exterior::{multi_indices, sort_with_sign, PForm};
use yano_core::C64;

#[derive(Clone, Debug)]
pub struct DenseAlt {
    pub n: usize,
    pub p: usize,
    pub entries: Vec<C64>,
}

fn pow(n: usize, p: usize) -> usize {
    n.pow(p as u32)
}

/// Every index tuple of length p over {0, .., n-1}.
pub fn all_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..p {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut t2 = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

impl DenseAlt {
    pub fn zeros(n: usize, p: usize) -> Self {
        DenseAlt {
            n,
            p,
            entries: vec![C64::new(0.0, 0.0); pow(n, p)],
        }
    }

    pub fn offset(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, tuple: &[usize]) -> C64 {
        self.entries[self.offset(tuple)]
    }

    pub fn set(&mut self, tuple: &[usize], v: C64) {
        let k = self.offset(tuple);
        self.entries[k] = v;
    }

    /// Expand an increasing-index form into the full antisymmetric array.
    pub fn from_pform(f: &PForm) -> Self {
        let mut out = Self::zeros(f.n(), f.degree());
        for tuple in all_tuples(f.n(), f.degree()) {
            if let Some((sign, comp)) = f.comp_signed(&tuple) {
                out.set(&tuple, comp * (sign as f64));
            }
        }
        out
    }

    /// Read the increasing entries back off.
    pub fn to_pform(&self) -> PForm {
        let comps = multi_indices(self.n, self.p)
            .iter()
            .map(|idx| self.get(idx))
            .collect();
        PForm::new(self.n, self.p, comps).unwrap()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        assert_eq!((self.n, self.p), (o.n, o.p));
        self.entries
            .iter()
            .zip(&o.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Wedge by summing over position shuffles of the output tuple.
    pub fn wedge(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let (p, q) = (self.p, o.p);
        let mut out = Self::zeros(self.n, p + q);
        let position_subsets = multi_indices(p + q, p);
        for tuple in all_tuples(self.n, p + q) {
            let mut acc = C64::new(0.0, 0.0);
            for s in &position_subsets {
                let comp: Vec<usize> = (0..p + q).filter(|k| !s.contains(k)).collect();
                let mut inversions = 0usize;
                for &a in s {
                    inversions += comp.iter().filter(|&&b| b < a).count();
                }
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                let left: Vec<usize> = s.iter().map(|&k| tuple[k]).collect();
                let right: Vec<usize> = comp.iter().map(|&k| tuple[k]).collect();
                acc += self.get(&left) * o.get(&right) * sign;
            }
            let off = out.offset(&tuple);
            out.entries[off] = acc;
        }
        out
    }

    /// Interior product: contract the first slot against the vector.
    pub fn interior(&self, v: &[C64]) -> Self {
        assert!(self.p >= 1);
        let mut out = Self::zeros(self.n, self.p - 1);
        for tuple in all_tuples(self.n, self.p - 1) {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..self.n {
                let mut full = vec![i];
                full.extend_from_slice(&tuple);
                acc += v[i] * self.get(&full);
            }
            let off = out.offset(&tuple);
            out.entries[off] = acc;
        }
        out
    }

    /// Raise every index with the inverse metric by full contraction.
    pub fn raise(&self, g_inv: &Array2<C64>) -> Self {
        let mut out = Self::zeros(self.n, self.p);
        for itup in all_tuples(self.n, self.p) {
            let mut acc = C64::new(0.0, 0.0);
            for ktup in all_tuples(self.n, self.p) {
                let mut w = self.get(&ktup);
                for (&i, &k) in itup.iter().zip(&ktup) {
                    w *= g_inv[[i, k]];
                }
                acc += w;
            }
            let off = out.offset(&itup);
            out.entries[off] = acc;
        }
        out
    }

    /// Hodge dual through the total Levi-Civita symbol, with the volume
    /// factor sqrt(|det g|).
    pub fn hodge(&self, g: &Array2<C64>, g_inv: &Array2<C64>) -> Self {
        let n = self.n;
        let p = self.p;
        let raised = self.raise(g_inv);
        let det = dense_det(g);
        let vol = det.norm().sqrt();
        let fact: f64 = (1..=p).map(|k| k as f64).product::<f64>().max(1.0);
        let mut out = Self::zeros(n, n - p);
        for jtup in all_tuples(n, n - p) {
            let mut acc = C64::new(0.0, 0.0);
            for itup in all_tuples(n, p) {
                let mut full: Vec<usize> = itup.clone();
                full.extend_from_slice(&jtup);
                // repeated indices contribute nothing
                if let Some(sign) = sort_with_sign(&mut full) {
                    acc += raised.get(&itup) * (sign as f64);
                }
            }
            let off = out.offset(&jtup);
            out.entries[off] = acc * vol / fact;
        }
        out
    }

    /// Full contraction against vectors, one per slot.
    pub fn apply(&self, vectors: &[&Array1<C64>]) -> C64 {
        assert_eq!(vectors.len(), self.p);
        let mut acc = C64::new(0.0, 0.0);
        for tuple in all_tuples(self.n, self.p) {
            let mut w = self.get(&tuple);
            for (c, &i) in tuple.iter().enumerate() {
                w *= vectors[c][i];
            }
            acc += w;
        }
        acc
    }
}

/// Determinant by Laplace expansion, independent of LAPACK.
pub fn dense_det(m: &Array2<C64>) -> C64 {
    let n = m.nrows();
    if n == 1 {
        return m[[0, 0]];
    }
    let mut acc = C64::new(0.0, 0.0);
    for c in 0..n {
        let mut minor = Array2::<C64>::zeros((n - 1, n - 1));
        for r in 1..n {
            let mut cc = 0;
            for k in 0..n {
                if k == c {
                    continue;
                }
                minor[[r - 1, cc]] = m[[r, k]];
                cc += 1;
            }
        }
        let term = m[[0, c]] * dense_det(&minor);
        if c % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Deterministic complex entries for oracle comparisons.
pub fn random_c64<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_pform<R: Rng>(rng: &mut R, n: usize, p: usize) -> PForm {
    let comps = (0..yano_core::exterior::binomial(n, p))
        .map(|_| random_c64(rng))
        .collect();
    PForm::new(n, p, comps).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Array1<C64> {
    (0..n).map(|_| random_c64(rng)).collect()
}

/// Random real symmetric positive definite metric, kept well conditioned.
pub fn random_spd_metric<R: Rng>(rng: &mut R, n: usize) -> Array2<C64> {
    let mut a = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = rng.gen_range(-0.5..0.5);
        }
    }
    let mut g = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = if i == j { 1.0 } else { 0.0 };
            for k in 0..n {
                acc += a[[k, i]] * a[[k, j]];
            }
            g[[i, j]] = C64::new(acc, 0.0);
        }
    }
    g
}
