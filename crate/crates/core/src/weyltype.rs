//! Curvature classification through operators on 2-forms: the action of a
//! 2-form's endomorphism and of the Weyl tensor on the space of 2-forms,
//! spectrum predictions, alignment of frame legs, and the component pattern
//! that pins down the type-D class in a canonical frame.

use ndarray::{Array2, Array4};

use crate::exterior::{index_rank, multi_indices, FrameAtPoint, Leg, PForm};
use crate::linalg;
use crate::C64;

/// Matrix of the operator alpha_ab -> -F^c_a alpha_cb - F^c_b alpha_ac on
/// the increasing-pair basis of 2-forms, with F = g^{-1} phi.
pub fn phi_hat_matrix(g_inv: &Array2<C64>, phi: &PForm) -> Array2<C64> {
    let n = g_inv.nrows();
    let pairs = multi_indices(n, 2);
    let dim = pairs.len();
    let mut fmat = Array2::<C64>::zeros((n, n));
    for c in 0..n {
        for b in 0..n {
            if let Some((sign, v)) = phi.comp_signed(&[c, b]) {
                fmat[[c, b]] = v * (sign as f64);
            }
        }
    }
    let f = g_inv.dot(&fmat);
    let ft = f.t().to_owned();
    let mut out = Array2::<C64>::zeros((dim, dim));
    for (col, pair) in pairs.iter().enumerate() {
        let mut a = Array2::<C64>::zeros((n, n));
        a[[pair[0], pair[1]]] = C64::new(1.0, 0.0);
        a[[pair[1], pair[0]]] = C64::new(-1.0, 0.0);
        let image = ft.dot(&a) + a.dot(&f);
        for (row, rp) in pairs.iter().enumerate() {
            out[[row, col]] = -image[[rp[0], rp[1]]];
        }
    }
    out
}

/// Matrix of the Weyl action (C alpha)_ab = sum_{c<d} C_ab^cd alpha_cd on
/// the increasing-pair basis, indices raised with the inverse metric.
pub fn weyl_hat_matrix(g_inv: &Array2<C64>, weyl: &Array4<C64>) -> Array2<C64> {
    let n = g_inv.nrows();
    let pairs = multi_indices(n, 2);
    let dim = pairs.len();
    // raise the last two slots
    let mut half = Array4::<C64>::zeros((n, n, n, n));
    for a in 0..n {
        for b in 0..n {
            for e in 0..n {
                for c in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for f in 0..n {
                        acc += weyl[[a, b, e, f]] * g_inv[[f, c]];
                    }
                    half[[a, b, e, c]] = acc;
                }
            }
        }
    }
    let mut raised = Array4::<C64>::zeros((n, n, n, n));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for e in 0..n {
                        acc += half[[a, b, e, d]] * g_inv[[e, c]];
                    }
                    raised[[a, b, c, d]] = acc;
                }
            }
        }
    }
    let mut out = Array2::<C64>::zeros((dim, dim));
    for (row, rp) in pairs.iter().enumerate() {
        for (col, cp) in pairs.iter().enumerate() {
            out[[row, col]] = raised[[rp[0], rp[1], cp[0], cp[1]]];
        }
    }
    out
}

/// Induced metric on 2-forms over the increasing-pair basis:
/// G[(ab),(cd)] = g_ac g_bd - g_ad g_bc.
pub fn lambda2_metric(g: &Array2<C64>) -> Array2<C64> {
    let n = g.nrows();
    let pairs = multi_indices(n, 2);
    let dim = pairs.len();
    let mut out = Array2::<C64>::zeros((dim, dim));
    for (row, rp) in pairs.iter().enumerate() {
        for (col, cp) in pairs.iter().enumerate() {
            let (a, b) = (rp[0], rp[1]);
            let (c, d) = (cp[0], cp[1]);
            out[[row, col]] = g[[a, c]] * g[[b, d]] - g[[a, d]] * g[[b, c]];
        }
    }
    out
}

/// Expected spectrum of the 2-form action for a normal form with plane
/// eigenvalues `lams`: plus and minus pairwise sums, ordered pairwise
/// differences, one zero per plane, and plus or minus each eigenvalue once
/// more in odd dimensions.
pub fn phi_hat_spectrum_closed_form(lams: &[C64], odd: bool) -> Vec<C64> {
    let m = lams.len();
    let mut out = Vec::with_capacity(m * (2 * m - 1) + if odd { 2 * m } else { 0 });
    for mu in 0..m {
        for nu in mu + 1..m {
            out.push(lams[mu] + lams[nu]);
            out.push(-(lams[mu] + lams[nu]));
        }
    }
    for mu in 0..m {
        for nu in 0..m {
            if mu != nu {
                out.push(lams[mu] - lams[nu]);
            }
        }
    }
    out.extend(std::iter::repeat(C64::new(0.0, 0.0)).take(m));
    if odd {
        for &l in lams {
            out.push(l);
            out.push(-l);
        }
    }
    out
}

/// Greedy nearest matching between two equal-length spectra; returns the
/// largest matched distance relative to the spectral radius of `expected`.
pub fn spectrum_match_residual(computed: &[C64], expected: &[C64]) -> f64 {
    assert_eq!(
        computed.len(),
        expected.len(),
        "spectra must have equal length"
    );
    let scale = expected
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-30);
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&i, &j| expected[j].norm().total_cmp(&expected[i].norm()));
    let mut used = vec![false; computed.len()];
    let mut worst = 0.0_f64;
    for &i in &order {
        let mut best: Option<(usize, f64)> = None;
        for (j, &u) in used.iter().enumerate() {
            if u {
                continue;
            }
            let d = (computed[j] - expected[i]).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("lengths match");
        used[j] = true;
        worst = worst.max(d);
    }
    worst / scale
}

/// Project a coordinate 4-tensor onto frame legs, one slot at a time.
pub fn frame_components(t: &Array4<C64>, frame: &FrameAtPoint) -> Array4<C64> {
    let n = frame.n();
    let contract = |src: &Array4<C64>| -> Array4<C64> {
        // rotate: out[j,k,l,a] = sum_i src[i,j,k,l] E_a^i
        let mut out = Array4::<C64>::zeros((n, n, n, n));
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    for (a, e) in frame.vectors.iter().enumerate() {
                        let mut acc = C64::new(0.0, 0.0);
                        for i in 0..n {
                            acc += src[[i, j, k, l]] * e[i];
                        }
                        out[[j, k, l, a]] = acc;
                    }
                }
            }
        }
        out
    };
    let mut cur = t.clone();
    for _ in 0..4 {
        cur = contract(&cur);
    }
    cur
}

/// Signed symbol of a leg: the up leg of plane mu counts +1 there, the down
/// leg -1, the unit leg nothing.
fn leg_symbol(leg: Leg, m: usize) -> Vec<i32> {
    let mut v = vec![0; m];
    match leg {
        Leg::Down(i) => v[i] = -1,
        Leg::Up(i) => v[i] = 1,
        Leg::Zero => {}
    }
    v
}

/// Type-D component pattern residual: a frame component of the curvature is
/// allowed only when the four leg symbols cancel. Returns the largest
/// disallowed component over the largest component overall.
pub fn type_d_residual(frame_weyl: &Array4<C64>, frame: &FrameAtPoint) -> f64 {
    let n = frame.n();
    let m = frame.m;
    let symbols: Vec<Vec<i32>> = (0..n).map(|a| leg_symbol(frame.leg(a), m)).collect();
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = frame_weyl[[a, b, c, d]].norm();
                    scale = scale.max(v);
                    let cancels = (0..m).all(|k| {
                        symbols[a][k] + symbols[b][k] + symbols[c][k] + symbols[d][k] == 0
                    });
                    if !cancels {
                        worst = worst.max(v);
                    }
                }
            }
        }
    }
    if scale < 1e-30 {
        0.0
    } else {
        worst / scale
    }
}

/// Alignment residual of one frame leg: the largest component C(k, X, k, Y)
/// with X, Y ranging over all legs except k's dual partner, relative to the
/// largest frame component of the curvature.
pub fn wand_residual(frame_weyl: &Array4<C64>, frame: &FrameAtPoint, leg: usize) -> f64 {
    let n = frame.n();
    let dual = frame.leg(leg).dual();
    let dual_idx = frame.leg_index(dual);
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for v in frame_weyl.iter() {
        scale = scale.max(v.norm());
    }
    for x in 0..n {
        if x == dual_idx {
            continue;
        }
        for y in 0..n {
            if y == dual_idx {
                continue;
            }
            worst = worst.max(frame_weyl[[leg, x, leg, y]].norm());
        }
    }
    if scale < 1e-30 {
        0.0
    } else {
        worst / scale
    }
}

/// Relative Frobenius norm of the commutator of the two operators. The flag
/// reports a vacuously zero curvature operator, where commuting carries no
/// information.
pub fn commutator_residual(chat: &Array2<C64>, phat: &Array2<C64>) -> (f64, bool) {
    let c_norm = linalg::fro_norm(chat);
    let p_norm = linalg::fro_norm(phat);
    if c_norm < 1e-13 {
        return (0.0, true);
    }
    let comm = chat.dot(phat) - phat.dot(chat);
    (linalg::fro_norm(&comm) / (c_norm * p_norm), false)
}

/// Convenience: eigenvalues of an operator matrix.
pub fn operator_spectrum(mat: &Array2<C64>) -> Result<Vec<C64>, crate::error::CoreError> {
    let (vals, _) = linalg::eig(mat)?;
    Ok(vals)
}

/// Rank of a basis 2-form inside the increasing-pair ordering; exposed for
/// callers assembling operator matrices by hand.
pub fn pair_rank(n: usize, a: usize, b: usize) -> usize {
    index_rank(n, &[a.min(b), a.max(b)])
}
