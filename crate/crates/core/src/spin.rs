//! Spinor calculus over the exterior-algebra model of spin space. Spinors
//! carry 2^m coefficients indexed by generator subsets; Clifford
//! multiplication acts by wedge and contraction, a vector's action using the
//! frame leg dictionary: down legs contract, up legs wedge, the unit leg of
//! odd dimensions acts by a degree-graded phase.

use ndarray::{Array1, Array2, Array4};

use crate::error::CoreError;
use crate::exterior::{multi_indices, permutation_sign, FrameAtPoint, PForm};
use crate::linalg;
use crate::C64;

/// One spinor: coefficients over generator subsets in bitmask order.
pub type Spinor = Array1<C64>;

/// Clifford algebra layout for m planes plus an optional unit leg.
#[derive(Clone, Copy, Debug)]
pub struct SpinAlgebra {
    pub m: usize,
    pub odd: bool,
}

impl SpinAlgebra {
    pub fn new(m: usize, odd: bool) -> Self {
        SpinAlgebra { m, odd }
    }

    /// Spinor space dimension.
    pub fn dim(&self) -> usize {
        1 << self.m
    }

    /// Number of frame legs.
    pub fn legs(&self) -> usize {
        2 * self.m + usize::from(self.odd)
    }

    pub fn zero_spinor(&self) -> Spinor {
        Array1::zeros(self.dim())
    }

    /// Basis spinor for a generator subset.
    pub fn basis_spinor(&self, subset: u32) -> Spinor {
        let mut z = self.zero_spinor();
        z[subset as usize] = C64::new(1.0, 0.0);
        z
    }

    /// Wedge by the mu-th generator.
    fn wedge_gen(&self, mu: usize, z: &Spinor) -> Spinor {
        let bit = 1usize << mu;
        let below = bit - 1;
        let mut out = self.zero_spinor();
        for (s, &v) in z.iter().enumerate() {
            if s & bit != 0 {
                continue;
            }
            let sign = if ((s & below).count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out[s | bit] += v * sign;
        }
        out
    }

    /// Contraction with the mu-th dual generator.
    fn interior_gen(&self, mu: usize, z: &Spinor) -> Spinor {
        let bit = 1usize << mu;
        let below = bit - 1;
        let mut out = self.zero_spinor();
        for (s, &v) in z.iter().enumerate() {
            if s & bit == 0 {
                continue;
            }
            let sign = if ((s & below).count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out[s & !bit] += v * sign;
        }
        out
    }

    /// Unit leg action: (i/sqrt(2)) times the degree parity.
    fn unit_gen(&self, z: &Spinor) -> Spinor {
        let f = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let mut out = z.clone();
        for (s, v) in out.iter_mut().enumerate() {
            let parity = if (s as u32).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            *v = *v * f * parity;
        }
        out
    }

    /// Clifford action of the frame leg with the given index.
    pub fn gamma_leg(&self, leg: usize, z: &Spinor) -> Spinor {
        if leg < self.m {
            // down leg: minus contraction
            let mut out = self.interior_gen(leg, z);
            for v in out.iter_mut() {
                *v = -*v;
            }
            out
        } else if leg < 2 * self.m {
            self.wedge_gen(leg - self.m, z)
        } else {
            self.unit_gen(z)
        }
    }

    /// Index of the metric-dual leg.
    pub fn dual_leg(&self, leg: usize) -> usize {
        if leg < self.m {
            leg + self.m
        } else if leg < 2 * self.m {
            leg - self.m
        } else {
            leg
        }
    }

    /// Raised-index action: the canonical pairing swaps dual legs.
    pub fn gamma_raised(&self, leg: usize, z: &Spinor) -> Spinor {
        self.gamma_leg(self.dual_leg(leg), z)
    }

    /// Action of a vector given by frame leg coefficients.
    pub fn gamma_vector(&self, coeffs: &[C64], z: &Spinor) -> Spinor {
        let mut out = self.zero_spinor();
        for (leg, &c) in coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            out = out + self.gamma_leg(leg, z).map(|v| v * c);
        }
        out
    }

    /// Clifford product of a p-form in frame components with a spinor:
    /// phi_{a1..ap} gamma^{ap} ... gamma^{a1} zeta, summed over all tuples.
    pub fn form_action(&self, phi: &PForm, z: &Spinor) -> Spinor {
        let n = self.legs();
        assert_eq!(phi.n(), n, "form must live on the frame legs");
        let p = phi.degree();
        if p == 0 {
            return z.map(|v| v * *phi.comp(&[]));
        }
        let mut out = self.zero_spinor();
        for idx in multi_indices(n, p) {
            let coeff = *phi.comp(&idx);
            if coeff.norm() == 0.0 {
                continue;
            }
            // sum over permutations of the increasing tuple with signs
            let mut perm = idx.clone();
            permute_with_signs(&mut perm, 0, &mut |tuple, sign| {
                let mut cur = z.clone();
                // gamma^{ap} ... gamma^{a1}: apply a1 first
                for &leg in tuple {
                    cur = self.gamma_raised(leg, &cur);
                }
                out = &out + &cur.map(|v| v * coeff * (sign as f64));
            });
        }
        out
    }

    /// Spin representation of the endomorphism carried by a 2-form: half
    /// its Clifford product. Satisfies the derivation identity
    /// [so_action(phi), gamma_X] = gamma_{F X} with F = g^{-1} phi.
    pub fn so_action(&self, phi: &PForm, z: &Spinor) -> Spinor {
        assert_eq!(phi.degree(), 2, "so action expects a 2-form");
        self.form_action(phi, z).map(|v| v * 0.5)
    }

    /// Weight-one antisymmetrized product of lowered leg actions over an
    /// increasing tuple.
    pub fn gamma_tuple(&self, legs: &[usize], z: &Spinor) -> Spinor {
        let mut out = self.zero_spinor();
        let mut count = 0usize;
        let mut perm = legs.to_vec();
        permute_with_signs(&mut perm, 0, &mut |tuple, sign| {
            count += 1;
            let mut cur = z.clone();
            // gamma_{a1 ... ap}: rightmost factor acts first
            for &leg in tuple.iter().rev() {
                cur = self.gamma_leg(leg, &cur);
            }
            out = &out + &cur.map(|v| v * (sign as f64));
        });
        out.map(|v| v / (count as f64))
    }

    /// Degree reversal: multiply the degree-p part by (-1)^{p(p-1)/2}.
    pub fn reversal(&self, z: &Spinor) -> Spinor {
        let mut out = z.clone();
        for (s, v) in out.iter_mut().enumerate() {
            let p = (s as u32).count_ones() as usize;
            if (p * (p.max(1) - 1) / 2) % 2 == 1 {
                *v = -*v;
            }
        }
        out
    }

    /// Exterior product of two spinors in the polyform model.
    pub fn model_wedge(&self, a: &Spinor, b: &Spinor) -> Spinor {
        let mut out = self.zero_spinor();
        for (s, &va) in a.iter().enumerate() {
            if va.norm() == 0.0 {
                continue;
            }
            for (t, &vb) in b.iter().enumerate() {
                if vb.norm() == 0.0 || s & t != 0 {
                    continue;
                }
                out[s | t] += va * vb * merge_parity(s, t);
            }
        }
        out
    }

    /// Spin inner product: top-degree coefficient of rev(eta) wedge zeta.
    pub fn inner(&self, eta: &Spinor, zeta: &Spinor) -> C64 {
        let rev = self.reversal(eta);
        let w = self.model_wedge(&rev, zeta);
        w[self.dim() - 1]
    }

    /// p-form with frame components <eta, gamma_{a1..ap} zeta>.
    pub fn bilinear_form(&self, eta: &Spinor, zeta: &Spinor, p: usize) -> PForm {
        let n = self.legs();
        let comps: Vec<C64> = multi_indices(n, p)
            .into_iter()
            .map(|idx| self.inner(eta, &self.gamma_tuple(&idx, zeta)))
            .collect();
        PForm::new(n, p, comps).expect("component count matches")
    }

    /// Element of the isotropy algebra built from two spinors: leg
    /// coefficients <eta, gamma^a zeta>.
    pub fn null_element(&self, eta: &Spinor, zeta: &Spinor) -> Vec<C64> {
        (0..self.legs())
            .map(|a| self.inner(eta, &self.gamma_raised(a, zeta)))
            .collect()
    }

    /// Annihilator of a spinor inside the plane legs (the unit leg is not
    /// part of the isotropy space): basis vectors of leg coefficients and
    /// the annihilator dimension.
    pub fn annihilator_kernel(&self, z: &Spinor) -> Result<(Vec<Array1<C64>>, usize), CoreError> {
        let cols = 2 * self.m;
        let mut a = Array2::<C64>::zeros((self.dim(), cols));
        for leg in 0..cols {
            let img = self.gamma_leg(leg, z);
            for (r, &v) in img.iter().enumerate() {
                a[[r, leg]] = v;
            }
        }
        let kernel = linalg::kernel(&a, 1e-10)?;
        let dim = kernel.len();
        Ok((kernel, dim))
    }

    /// A spinor is pure exactly when its annihilator is maximal.
    pub fn is_pure(&self, z: &Spinor) -> Result<bool, CoreError> {
        Ok(self.annihilator_kernel(z)?.1 == self.m)
    }

    /// Eigenvalue of the so-action of sum_mu lambda_mu theta^mu wedge
    /// theta_mu on the basis spinor of a subset: half the selected sum
    /// minus half the complementary sum.
    pub fn clifford_eigenvalue(&self, lams: &[C64], subset: u32) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (mu, &l) in lams.iter().enumerate() {
            if subset & (1 << mu) != 0 {
                acc += l;
            } else {
                acc -= l;
            }
        }
        acc * 0.5
    }

    /// Build the matrix of an operator from its action on basis spinors.
    pub fn operator_matrix(&self, f: impl Fn(&Spinor) -> Spinor) -> Array2<C64> {
        let d = self.dim();
        let mut out = Array2::<C64>::zeros((d, d));
        for col in 0..d {
            let img = f(&self.basis_spinor(col as u32));
            for (row, &v) in img.iter().enumerate() {
                out[[row, col]] = v;
            }
        }
        out
    }
}

/// Sign of interleaving subset s before subset t, both ascending.
fn merge_parity(s: usize, t: usize) -> f64 {
    // count transpositions: for each generator in t, generators of s above it
    let mut swaps = 0u32;
    let mut tt = t;
    while tt != 0 {
        let mu = tt.trailing_zeros();
        let above = s >> (mu + 1);
        swaps += (above as u32).count_ones();
        tt &= tt - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Visit all permutations of the slice with their signs.
fn permute_with_signs(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize], i32)) {
    let len = items.len();
    if k == len {
        // sign from sortedness of the full permutation
        let perm: Vec<&[usize]> = items.iter().map(std::slice::from_ref).collect();
        let sign = permutation_sign(&perm);
        visit(items, sign);
        return;
    }
    for i in k..len {
        items.swap(k, i);
        permute_with_signs(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Connection 2-forms of a frame: for each direction leg c, the 2-form with
/// components g(E_a, nabla_c E_b), whose so-action is the spin connection
/// term. `gf` holds theta^d(nabla_{E_c} E_b) as gf[c][b][d].
pub fn connection_two_forms(
    frame: &FrameAtPoint,
    gf: &ndarray::Array3<C64>,
) -> Vec<PForm> {
    let n = frame.n();
    let gram = frame.pairing();
    let mut out = Vec::with_capacity(n);
    for c in 0..n {
        let mut w = Array2::<C64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for d in 0..n {
                    acc += gram[[a, d]] * gf[[c, b, d]];
                }
                w[[a, b]] = acc;
            }
        }
        let comps: Vec<C64> = multi_indices(n, 2)
            .into_iter()
            .map(|idx| {
                // antisymmetrize defensively; metricity makes this exact
                (w[[idx[0], idx[1]]] - w[[idx[1], idx[0]]]) * 0.5
            })
            .collect();
        out.push(PForm::new(n, 2, comps).expect("component count matches"));
    }
    out
}

/// Integrability residual of the basis spinor attached to a selector: the
/// spinor derivative along each isotropy leg must stay proportional to the
/// spinor itself. Basis spinors have constant coefficients, so the
/// derivative reduces to the spin connection action.
pub fn spinor_integrability_residual(
    algebra: &SpinAlgebra,
    connection: &[PForm],
    selector: u32,
) -> f64 {
    let zeta = algebra.basis_spinor(selector);
    let znorm: f64 = zeta.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut worst = 0.0_f64;
    for mu in 0..algebra.m {
        // the isotropy space of theta^S holds V^mu for mu in S, V_mu outside
        let leg = if selector & (1 << mu) != 0 {
            algebra.m + mu
        } else {
            mu
        };
        let deriv = algebra.so_action(&connection[leg], &zeta);
        let dnorm: f64 = deriv.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        // least squares projection onto the spinor line
        let overlap: C64 = zeta
            .iter()
            .zip(deriv.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let f = overlap / C64::new(znorm * znorm, 0.0);
        let mut res = 0.0_f64;
        for (zv, dv) in zeta.iter().zip(deriv.iter()) {
            res = res.max((dv - f * zv).norm());
        }
        worst = worst.max(res / (dnorm + znorm));
    }
    worst
}

/// Alignment residual of the curvature action on one basis spinor: the
/// tensor sum C_abcd (gamma^a gamma^b zeta) (x) (gamma^c gamma^d zeta) must
/// be proportional to zeta (x) zeta, so every column and row has to lie on
/// the spinor line. Returns the largest 2x2 minor of a column or row paired
/// against zeta, relative to the tensor scale.
pub fn weyl_spin_residual(
    algebra: &SpinAlgebra,
    frame_weyl: &Array4<C64>,
    selector: u32,
) -> f64 {
    let n = algebra.legs();
    let d = algebra.dim();
    let zeta = algebra.basis_spinor(selector);
    // pair images gamma^a gamma^b zeta
    let mut images: Vec<Vec<Spinor>> = Vec::with_capacity(n);
    for a in 0..n {
        let mut row = Vec::with_capacity(n);
        for b in 0..n {
            // rightmost factor acts first
            row.push(algebra.gamma_raised(a, &algebra.gamma_raised(b, &zeta)));
        }
        images.push(row);
    }
    let mut tensor = Array2::<C64>::zeros((d, d));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    let w = frame_weyl[[a, b, c, e]];
                    if w.norm() == 0.0 {
                        continue;
                    }
                    let left = &images[a][b];
                    let right = &images[c][e];
                    for (i, &lv) in left.iter().enumerate() {
                        if lv.norm() == 0.0 {
                            continue;
                        }
                        for (j, &rv) in right.iter().enumerate() {
                            tensor[[i, j]] += w * lv * rv;
                        }
                    }
                }
            }
        }
    }
    let scale = linalg::max_abs(&tensor);
    if scale < 1e-30 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for k in 0..d {
        let col: Spinor = tensor.column(k).to_owned();
        let row: Spinor = tensor.row(k).to_owned();
        for slice in [col, row] {
            for i in 0..d {
                for j in (i + 1)..d {
                    let minor = slice[i] * zeta[j] - slice[j] * zeta[i];
                    worst = worst.max(minor.norm());
                }
            }
        }
    }
    worst / scale
}
