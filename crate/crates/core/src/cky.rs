//! Conformal Killing-Yano machinery: the defining residual for 2-forms,
//! eigenstructure normal forms with their canonical frames, the isotropy
//! pattern of the torsion 3-form, connection identities tying eigenvalue
//! gradients to frame connection coefficients, and Hamiltonian 2-forms on
//! Kaehler charts.

use ndarray::{Array1, Array2, Array3};

use crate::error::CoreError;
use crate::exterior::{flat, multi_indices, FrameAtPoint, JetForm, Leg, PForm};
use crate::geometry::{FrameBundle, MetricAtPoint};
use crate::jet::Jet2;
use crate::linalg;
use crate::C64;

/// Derivative data of a candidate conformal Killing-Yano 2-form at a point.
#[derive(Clone, Debug)]
pub struct CkyData {
    /// nabla[c] holds the 2-form (nabla_c phi).
    pub nabla: Vec<PForm>,
    /// Torsion 3-form, tau = d phi.
    pub tau: PForm,
    /// Divergence 1-form K_b = nabla^a phi_ab.
    pub kv: PForm,
    /// Largest violation of the defining equation over max |nabla phi|.
    pub residual: f64,
    /// Largest component of d phi over max |nabla phi|.
    pub dphi_rel: f64,
}

/// Evaluate the conformal Killing-Yano residual of a 2-form:
/// nabla_c phi_ab - (1/3)(d phi)_cab - (g_ca K_b - g_cb K_a)/(n-1).
///
/// The combination is trace free and kills its own total antisymmetrization,
/// so it measures exactly the part of nabla phi the equation forbids.
pub fn cky_data(ma: &MetricAtPoint, phi: &JetForm) -> Result<CkyData, CoreError> {
    if phi.degree() != 2 {
        return Err(CoreError::InconsistentInput(
            "conformal Killing-Yano residual expects a 2-form".into(),
        ));
    }
    let n = ma.n;
    let nabla = ma.covariant_derivative(phi);
    let tau = phi.d().values();
    // K_b = g^{ca} (nabla_c phi)_{ab}
    let mut kv_comps = vec![C64::new(0.0, 0.0); n];
    for (b, slot) in kv_comps.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..n {
            for a in 0..n {
                if a == b {
                    continue;
                }
                if let Some((sign, v)) = nabla[c].comp_signed(&[a, b]) {
                    acc += ma.g_inv[[c, a]] * v * (sign as f64);
                }
            }
        }
        *slot = acc;
    }
    let kv = PForm::new(n, 1, kv_comps)?;

    let scale = nabla
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0_f64, f64::max)
        .max(1e-30);
    let third = 1.0 / 3.0;
    let weight = 1.0 / (n as f64 - 1.0);
    let mut worst = 0.0_f64;
    let mut dphi_max = 0.0_f64;
    for c in 0..n {
        for pair in multi_indices(n, 2) {
            let (a, b) = (pair[0], pair[1]);
            let grad = *nabla[c].comp(&pair);
            let t = tau
                .comp_signed(&[c, a, b])
                .map(|(s, v)| v * (s as f64))
                .unwrap_or_else(|| C64::new(0.0, 0.0));
            let kpart = (ma.g[[c, a]] * kv.comps()[b] - ma.g[[c, b]] * kv.comps()[a]) * weight;
            let res = grad - t * third - kpart;
            worst = worst.max(res.norm());
        }
    }
    for v in tau.comps() {
        dphi_max = dphi_max.max(v.norm());
    }
    Ok(CkyData {
        nabla,
        tau,
        kv,
        residual: worst / scale,
        dphi_rel: dphi_max / scale,
    })
}

/// Eigenstructure normal form of a nondegenerate 2-form at a point.
#[derive(Clone, Debug)]
pub struct NormalForm {
    /// One representative eigenvalue per plane, sorted by descending
    /// (imaginary, real) part.
    pub eigenvalues: Vec<C64>,
    /// Canonical frame: eigenvector legs with unit metric pairing.
    pub frame: FrameAtPoint,
    /// Relative error of rebuilding phi as sum of eigenvalue times
    /// up-wedge-down coframe planes.
    pub reconstruction_residual: f64,
}

/// Relative tolerance for eigenvalue pairing and degeneracy detection.
const SPECTRUM_TOL: f64 = 1e-8;

fn phase_fix(v: &mut Array1<C64>) {
    let maxmod = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pick = 0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() >= maxmod * (1.0 - 1e-12) {
            pick = k;
            break;
        }
    }
    let z = v[pick];
    if z.norm() > 0.0 {
        let phase = z / z.norm();
        for e in v.iter_mut() {
            *e /= phase;
        }
    }
}

/// Sign-only fix: flip so the dominant component leans positive.
fn sign_fix(v: &mut Array1<C64>) {
    let maxmod = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pick = 0;
    for (k, z) in v.iter().enumerate() {
        if z.norm() >= maxmod * (1.0 - 1e-12) {
            pick = k;
            break;
        }
    }
    let z = v[pick];
    let flip = if z.re.abs() > 1e-12 * z.norm() {
        z.re < 0.0
    } else {
        z.im < 0.0
    };
    if flip {
        for e in v.iter_mut() {
            *e = -*e;
        }
    }
}

fn bilinear(g: &Array2<C64>, a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.len() {
        for j in 0..b.len() {
            acc += a[i] * g[[i, j]] * b[j];
        }
    }
    acc
}

/// Compute the normal form of a 2-form with respect to the metric at one
/// point. The endomorphism g^{-1} phi is diagonalized; eigenvalues must come
/// in plus/minus pairs separated from zero (even dimension) or leave exactly
/// a one-dimensional kernel (odd dimension).
pub fn normal_form(
    g: &Array2<C64>,
    g_inv: &Array2<C64>,
    phi: &PForm,
    m: usize,
    odd: bool,
) -> Result<NormalForm, CoreError> {
    let n = 2 * m + usize::from(odd);
    if phi.degree() != 2 || phi.n() != n || g.nrows() != n {
        return Err(CoreError::DimensionMismatch(
            "normal form expects a 2-form matching the metric dimension".into(),
        ));
    }
    // F^a_b = g^{ac} phi_cb
    let mut phimat = Array2::<C64>::zeros((n, n));
    for c in 0..n {
        for b in 0..n {
            if let Some((sign, v)) = phi.comp_signed(&[c, b]) {
                phimat[[c, b]] = v * (sign as f64);
            }
        }
    }
    let f = g_inv.dot(&phimat);
    let (vals, vecs) = linalg::eig(&f)?;
    let specrad = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if specrad < 1e-14 {
        return Err(CoreError::DegenerateSpectrum(
            "2-form vanishes at this point".into(),
        ));
    }
    let tol = SPECTRUM_TOL * specrad;

    // Greedy pairing by descending modulus.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].norm().total_cmp(&vals[i].norm()));
    let mut used = vec![false; n];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut kernel_index: Option<usize> = None;
    for &i in &order {
        if used[i] {
            continue;
        }
        if vals[i].norm() < tol {
            // remaining eigenvalues are all near zero
            let zero_count = order.iter().filter(|&&k| !used[k]).count();
            if odd && zero_count == 1 {
                kernel_index = Some(i);
                used[i] = true;
                break;
            }
            return Err(CoreError::DegenerateSpectrum(format!(
                "{zero_count} near-zero eigenvalues where {} expected",
                if odd { "one" } else { "none" }
            )));
        }
        used[i] = true;
        let mut best: Option<(usize, f64)> = None;
        for &j in &order {
            if used[j] {
                continue;
            }
            let gap = (vals[i] + vals[j]).norm();
            if best.map_or(true, |(_, b)| gap < b) {
                best = Some((j, gap));
            }
        }
        match best {
            Some((j, gap)) if gap <= tol => {
                used[j] = true;
                pairs.push((i, j));
            }
            _ => {
                return Err(CoreError::DegenerateSpectrum(format!(
                    "eigenvalue {} has no negative partner",
                    vals[i]
                )))
            }
        }
    }
    if pairs.len() != m {
        return Err(CoreError::DegenerateSpectrum(format!(
            "found {} eigenvalue pairs, expected {m}",
            pairs.len()
        )));
    }

    // Representative per pair: larger (im, re) lexicographically among the
    // two signed values. Components below noise level are snapped to zero so
    // real eigenvalues with imaginary rounding dust sort deterministically.
    let snap = |x: f64| if x.abs() < 1e-12 * specrad { 0.0 } else { x };
    let sort_key = |lam: C64| (snap(lam.im), snap(lam.re));
    let rep_of = |lam: C64| -> C64 {
        if sort_key(lam) >= sort_key(-lam) {
            lam
        } else {
            -lam
        }
    };
    let mut labeled: Vec<(C64, usize, usize)> = pairs
        .iter()
        .map(|&(i, j)| {
            let rep = rep_of(vals[i]);
            // column index carrying +rep and the one carrying -rep
            if (vals[i] - rep).norm() <= (vals[j] - rep).norm() {
                (rep, i, j)
            } else {
                (rep, j, i)
            }
        })
        .collect();
    labeled.sort_by(|a, b| sort_key(b.0).partial_cmp(&sort_key(a.0)).unwrap());

    // Distinct representatives keep eigenvectors trustworthy.
    for w in labeled.windows(2) {
        if (w[0].0 - w[1].0).norm() < tol {
            return Err(CoreError::DegenerateSpectrum(format!(
                "repeated eigenvalue {}",
                w[0].0
            )));
        }
    }

    let mut eigenvalues = Vec::with_capacity(m);
    let mut down_vectors = Vec::with_capacity(m);
    let mut up_vectors = Vec::with_capacity(m);
    for &(rep, plus_col, minus_col) in &labeled {
        eigenvalues.push(rep);
        // F(V_mu) = -lambda V_mu: the down leg comes from the minus column.
        let mut vdown = vecs.column(minus_col).to_owned();
        let norm2 = vdown.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for e in vdown.iter_mut() {
            *e /= C64::new(norm2, 0.0);
        }
        phase_fix(&mut vdown);
        let vup_raw = vecs.column(plus_col).to_owned();
        let pair = bilinear(g, &vdown, &vup_raw);
        if pair.norm() < 1e-12 {
            return Err(CoreError::DegenerateSpectrum(
                "eigenvector pair fails to couple through the metric".into(),
            ));
        }
        let vup = vup_raw.map(|z| z / pair);
        down_vectors.push(vdown);
        up_vectors.push(vup);
    }

    // Coframe in leg order: duals of the down legs first, then of the up
    // legs, then the kernel covector.
    let mut coframe: Vec<Array1<C64>> = Vec::with_capacity(n);
    for v in &up_vectors {
        coframe.push(flat(g, v));
    }
    for v in &down_vectors {
        coframe.push(flat(g, v));
    }
    if odd {
        let k = kernel_index.expect("odd case pairing leaves a kernel");
        let mut v0 = vecs.column(k).to_owned();
        let q = bilinear(g, &v0, &v0);
        if q.norm() < 1e-12 {
            return Err(CoreError::DegenerateSpectrum(
                "kernel vector is null".into(),
            ));
        }
        let root = q.sqrt();
        for e in v0.iter_mut() {
            *e /= root;
        }
        sign_fix(&mut v0);
        coframe.push(flat(g, &v0));
    }
    let frame = FrameAtPoint::from_coframe(m, odd, coframe, g)?;

    // phi must equal sum of lambda_mu theta^mu wedge theta_mu.
    let mut rebuilt = PForm::zero(n, 2);
    for (mu, lam) in eigenvalues.iter().enumerate() {
        let up = PForm::from_covector(frame.covector(Leg::Down(mu)));
        let down = PForm::from_covector(frame.covector(Leg::Up(mu)));
        rebuilt = rebuilt.add(&up.wedge(&down).scale(lam));
    }
    let reconstruction_residual = rebuilt.sub(phi).max_abs() / phi.max_abs().max(1e-30);

    Ok(NormalForm {
        eigenvalues,
        frame,
        reconstruction_residual,
    })
}

/// Isotropy pattern of the torsion 3-form in a canonical frame: components
/// on leg triples that contain no dual pair must vanish. Returns the largest
/// such component over the largest component overall (zero when the frame
/// admits no pair-free triple, as happens for m = 2 in even dimensions).
pub fn tau_condition_residual(frame: &FrameAtPoint, tau: &PForm) -> f64 {
    let n = frame.n();
    assert_eq!(tau.degree(), 3, "torsion must be a 3-form");
    let mut worst_forbidden = 0.0_f64;
    let mut worst_all = 0.0_f64;
    for triple in multi_indices(n, 3) {
        let legs: Vec<Leg> = triple.iter().map(|&a| frame.leg(a)).collect();
        let vecs: Vec<&Array1<C64>> = triple.iter().map(|&a| &frame.vectors[a]).collect();
        let val = tau.apply(&vecs).norm();
        worst_all = worst_all.max(val);
        let has_dual_pair = legs.iter().enumerate().any(|(i, &l)| {
            l != Leg::Zero && legs[i + 1..].contains(&l.dual())
        });
        if !has_dual_pair {
            worst_forbidden = worst_forbidden.max(val);
        }
    }
    if worst_all < 1e-30 {
        return 0.0;
    }
    worst_forbidden / worst_all
}

/// Residuals of the identities linking frame connection coefficients to
/// eigenvalue gradients on conformal Killing-Yano backgrounds. All residuals
/// are normalized by the largest participating term (floored at one).
#[derive(Clone, Debug, Default)]
pub struct ConnectionIdentities {
    /// K(V_mu) + (n-1) V_mu(lambda_mu).
    pub comp_kv: f64,
    /// (lambda_mu - lambda_nu) Gf + directional derivative, difference legs.
    pub lc_minus: f64,
    /// (lambda_mu + lambda_nu) Gf + directional derivative, sum legs.
    pub lc_plus: f64,
    /// Odd-dimensional extra condition through the unit leg.
    pub odd_cond: f64,
    /// Same patterns with the derivative taken along the other leg; kept
    /// for diagnostics.
    pub lc_minus_alt: f64,
    pub lc_plus_alt: f64,
}

/// Evaluate the connection identities. `gf` holds the frame connection
/// values, `lambda_jets` the analytic eigenvalue fields evaluated at the
/// point (in frame order), `kv` the divergence 1-form of phi.
pub fn connection_identities(
    fb: &FrameBundle,
    gf: &Array3<C64>,
    lambda_jets: &[Jet2],
    kv: &PForm,
) -> ConnectionIdentities {
    let frame = &fb.frame;
    let m = frame.m;
    let n = frame.n();
    let nm1 = n as f64 - 1.0;

    // directional derivative of a scalar along a frame leg
    let dir = |leg: usize, grad: &[C64]| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, v) in frame.vectors[leg].iter().enumerate() {
            acc += v * grad[i];
        }
        acc
    };
    let rel = |x: C64, a: C64, b: C64| -> f64 {
        x.norm() / a.norm().max(b.norm()).max(1.0)
    };

    let mut out = ConnectionIdentities::default();
    for mu in 0..m {
        let dmu = frame.leg_index(Leg::Down(mu));
        let lam_mu = lambda_jets[mu].value;
        // K(V_mu)
        let kmu = kv.apply(&[&frame.vectors[dmu]]);
        let grad_term = dir(dmu, &lambda_jets[mu].grad) * nm1;
        out.comp_kv = out.comp_kv.max(rel(kmu + grad_term, kmu, grad_term));

        if frame.odd {
            let z = frame.leg_index(Leg::Zero);
            let umu = frame.leg_index(Leg::Up(mu));
            let conn = gf[[z, z, umu]] * lam_mu;
            let grad = dir(dmu, &lambda_jets[mu].grad);
            out.odd_cond = out.odd_cond.max(rel(conn + grad, conn, grad));
        }

        for nu in 0..m {
            if nu == mu {
                continue;
            }
            let dnu = frame.leg_index(Leg::Down(nu));
            let unu = frame.leg_index(Leg::Up(nu));
            let lam_nu = lambda_jets[nu].value;
            let diff_jet = &lambda_jets[mu] - &lambda_jets[nu];
            let sum_jet = &lambda_jets[mu] + &lambda_jets[nu];

            let t_minus = (lam_mu - lam_nu) * gf[[dnu, dmu, dnu]];
            let d_minus = dir(dmu, &diff_jet.grad);
            out.lc_minus = out
                .lc_minus
                .max(rel(t_minus - d_minus, t_minus, d_minus));
            let d_minus_alt = dir(dnu, &diff_jet.grad);
            out.lc_minus_alt = out
                .lc_minus_alt
                .max(rel(t_minus - d_minus_alt, t_minus, d_minus_alt));

            let t_plus = (lam_mu + lam_nu) * gf[[unu, dmu, unu]];
            let d_plus = dir(dmu, &sum_jet.grad);
            out.lc_plus = out.lc_plus.max(rel(t_plus - d_plus, t_plus, d_plus));
            let d_plus_alt = dir(dnu, &sum_jet.grad);
            out.lc_plus_alt = out
                .lc_plus_alt
                .max(rel(t_plus - d_plus_alt, t_plus, d_plus_alt));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Hamiltonian 2-forms on Kaehler charts

/// Pointwise data of a Hamiltonian 2-form candidate.
#[derive(Clone, Debug)]
pub struct HamiltonianData {
    /// Trace against the Kaehler form, sigma = (1/2) psi_ab omega^{ab}.
    pub sigma: C64,
    /// Coordinate gradient of sigma.
    pub dsigma: Array1<C64>,
    /// Complex structure J^a_b = -g^{ac} omega_{cb}.
    pub j: Array2<C64>,
    /// Largest entry of J^2 + I.
    pub j_squared_residual: f64,
    /// Largest violation of the defining derivative condition, relative to
    /// max |nabla psi|.
    pub residual: f64,
}

/// Trace of a 2-form against the inverse of the Kaehler form convention:
/// (1/2) a_ab omega^{ab} with indices raised by the metric.
pub fn omega_trace(ma: &MetricAtPoint, omega: &PForm, a: &PForm) -> C64 {
    a.pairing(omega, &ma.g_inv)
}

/// Complex structure associated to a metric and Kaehler form.
pub fn complex_structure(g_inv: &Array2<C64>, omega: &PForm) -> Array2<C64> {
    let n = g_inv.nrows();
    let mut om = Array2::<C64>::zeros((n, n));
    for c in 0..n {
        for b in 0..n {
            if let Some((sign, v)) = omega.comp_signed(&[c, b]) {
                om[[c, b]] = v * (sign as f64);
            }
        }
    }
    let mut j = g_inv.dot(&om);
    for e in j.iter_mut() {
        *e = -*e;
    }
    j
}

/// Evaluate the Hamiltonian 2-form residual:
/// nabla_c psi_ab
///   + (1/2)( omega_ca d_b sigma - omega_cb d_a sigma )
///   + (1/2)( g_ca (J d sigma)_b - g_cb (J d sigma)_a )
/// with sigma the omega-trace of psi and (J d sigma)_b = J^d_b d_d sigma.
pub fn hamiltonian_data(
    ma: &MetricAtPoint,
    omega: &JetForm,
    psi: &JetForm,
) -> Result<HamiltonianData, CoreError> {
    if omega.degree() != 2 || psi.degree() != 2 {
        return Err(CoreError::InconsistentInput(
            "hamiltonian data expects 2-forms".into(),
        ));
    }
    let n = ma.n;
    let om_vals = omega.values();
    let psi_vals = psi.values();
    let j = complex_structure(&ma.g_inv, &om_vals);
    let mut j2 = j.dot(&j);
    for i in 0..n {
        j2[[i, i]] += C64::new(1.0, 0.0);
    }
    let j_squared_residual = linalg::max_abs(&j2);

    // sigma and its gradient: differentiate psi_ab omega^{ab}/2 through the
    // product rule, with d(g^{-1}) supplied by the metric jets.
    let sigma = psi_vals.pairing(&om_vals, &ma.g_inv);
    let mut dsigma = Array1::<C64>::zeros(n);
    for k in 0..n {
        // build d_k of the raised omega matrix contracted against psi
        let mut acc = C64::new(0.0, 0.0);
        for pair_a in multi_indices(n, 2) {
            let (a, b) = (pair_a[0], pair_a[1]);
            let psi_j = &psi.comps()[crate::exterior::index_rank(n, &pair_a)];
            for pair_c in multi_indices(n, 2) {
                let (c, d) = (pair_c[0], pair_c[1]);
                let om_j = &omega.comps()[crate::exterior::index_rank(n, &pair_c)];
                // minor determinant of g^{-1} rows (a,b), cols (c,d)
                let det = ma.g_inv[[a, c]] * ma.g_inv[[b, d]]
                    - ma.g_inv[[a, d]] * ma.g_inv[[b, c]];
                let ddet = ma.dg_inv[[k, a, c]] * ma.g_inv[[b, d]]
                    + ma.g_inv[[a, c]] * ma.dg_inv[[k, b, d]]
                    - ma.dg_inv[[k, a, d]] * ma.g_inv[[b, c]]
                    - ma.g_inv[[a, d]] * ma.dg_inv[[k, b, c]];
                acc += psi_j.grad[k] * det * om_j.value
                    + psi_j.value * ddet * om_j.value
                    + psi_j.value * det * om_j.grad[k];
            }
        }
        dsigma[k] = acc;
    }

    // (J d sigma)_b
    let mut jds = Array1::<C64>::zeros(n);
    for b in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for d in 0..n {
            acc += j[[d, b]] * dsigma[d];
        }
        jds[b] = acc;
    }

    let nabla = ma.covariant_derivative(psi);
    let scale = nabla
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0_f64, f64::max)
        .max(1e-30);
    let om_at = |c: usize, b: usize| -> C64 {
        om_vals
            .comp_signed(&[c, b])
            .map(|(s, v)| v * (s as f64))
            .unwrap_or_else(|| C64::new(0.0, 0.0))
    };
    let mut worst = 0.0_f64;
    for c in 0..n {
        for pair in multi_indices(n, 2) {
            let (a, b) = (pair[0], pair[1]);
            let grad = *nabla[c].comp(&pair);
            let omega_part = (om_at(c, a) * dsigma[b] - om_at(c, b) * dsigma[a]) * 0.5;
            let metric_part = (ma.g[[c, a]] * jds[b] - ma.g[[c, b]] * jds[a]) * 0.5;
            let res = grad + omega_part + metric_part;
            worst = worst.max(res.norm());
        }
    }
    Ok(HamiltonianData {
        sigma,
        dsigma,
        j,
        j_squared_residual,
        residual: worst / scale,
    })
}

/// Residual of the closed-plus-coclosed combination for a 2-form on a
/// Kaehler chart: d phi - (3/(n-1)) omega wedge J(delta phi), where delta is
/// the codifferential (delta a)_J = -g^{cb}(nabla_c a)_{bJ} and J acts on
/// the 1-form by (J xi)_b = J^d_b xi_d.
pub fn closure_coclosure_residual(
    ma: &MetricAtPoint,
    omega: &PForm,
    phi: &JetForm,
) -> Result<f64, CoreError> {
    let n = ma.n;
    let j = complex_structure(&ma.g_inv, omega);
    let dphi = phi.d().values();
    let delta = ma.codifferential(phi)?;
    let mut jdelta = vec![C64::new(0.0, 0.0); n];
    for (b, slot) in jdelta.iter_mut().enumerate() {
        for d in 0..n {
            *slot += j[[d, b]] * delta.comps()[d];
        }
    }
    let jdform = PForm::new(n, 1, jdelta)?;
    let correction = omega.wedge(&jdform).scale(&C64::new(3.0 / (n as f64 - 1.0), 0.0));
    let total = dphi.sub(&correction);
    let scale = dphi
        .max_abs()
        .max(correction.max_abs())
        .max(1e-30);
    Ok(total.max_abs() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::FormField;
    use crate::geometry::MetricField;
    use crate::jet::{Point, ScalarField};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ci(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn flat4() -> MetricField {
        MetricField::constant_diagonal(&[1.0, 1.0, 1.0, 1.0])
    }

    fn eval_form(f: &FormField, pt: &Point) -> JetForm {
        f.eval(pt).unwrap()
    }

    #[test]
    fn parallel_form_is_conformal_killing_yano() {
        let g = flat4();
        let pt = Point::new(vec![0.3, -0.2, 0.8, 0.5]);
        let ma = g.eval(&pt).unwrap();
        let mut comps = vec![ScalarField::zero(4); 6];
        comps[0] = ScalarField::real_constant(4, 1.0); // dx0^dx1
        comps[5] = ScalarField::real_constant(4, 2.0); // dx2^dx3
        let phi = FormField::new(4, 2, comps).unwrap();
        let data = cky_data(&ma, &eval_form(&phi, &pt)).unwrap();
        // nabla phi = 0, so the relative residual floor kicks in
        assert!(data.residual < 1e-15);
        assert!(data.kv.max_abs() < 1e-15);
    }

    #[test]
    fn divergence_part_solves_the_equation() {
        // phi = x_flat ^ K with constant K: a pure divergence solution.
        let g = flat4();
        let pt = Point::new(vec![0.4, 0.1, -0.6, 0.9]);
        let ma = g.eval(&pt).unwrap();
        let kconst = [0.7, -0.3, 0.2, 1.1];
        let comps: Vec<ScalarField> = multi_indices(4, 2)
            .into_iter()
            .map(|pair| {
                let (a, b) = (pair[0], pair[1]);
                ScalarField::from_jets(4, move |q| {
                    &q[a].scale(c(kconst[b])) - &q[b].scale(c(kconst[a]))
                })
            })
            .collect();
        let phi = FormField::new(4, 2, comps).unwrap();
        let data = cky_data(&ma, &eval_form(&phi, &pt)).unwrap();
        assert!(data.residual < 1e-14, "residual {}", data.residual);
        assert!(data.dphi_rel < 1e-14);
        // K_b = (n-1) kconst_b
        for b in 0..4 {
            assert!((data.kv.comps()[b] - c(3.0 * kconst[b])).norm() < 1e-13);
        }
    }

    #[test]
    fn torsion_part_solves_the_equation() {
        // phi = x . tau0 with constant 3-form tau0.
        let g = flat4();
        let pt = Point::new(vec![0.2, 0.5, -0.3, 0.7]);
        let ma = g.eval(&pt).unwrap();
        let tau0: Vec<C64> = vec![
            c(1.0),
            c(-0.4),
            c(0.6),
            ci(0.2, 0.9),
        ];
        let triples = multi_indices(4, 3);
        let comps: Vec<ScalarField> = multi_indices(4, 2)
            .into_iter()
            .map(|pair| {
                let tau0 = tau0.clone();
                let triples = triples.clone();
                let (a, b) = (pair[0], pair[1]);
                ScalarField::from_jets(4, move |q| {
                    // (x . tau)_ab = x^c tau_cab
                    let mut acc = Jet2::constant(4, c(0.0));
                    for cc in 0..4 {
                        if cc == a || cc == b {
                            continue;
                        }
                        let mut idx = vec![cc, a, b];
                        let sign = crate::exterior::sort_with_sign(&mut idx).unwrap();
                        let rank = triples.iter().position(|t| *t == idx).unwrap();
                        acc = &acc + &q[cc].scale(tau0[rank] * (sign as f64));
                    }
                    acc
                })
            })
            .collect();
        let phi = FormField::new(4, 2, comps).unwrap();
        let data = cky_data(&ma, &eval_form(&phi, &pt)).unwrap();
        assert!(data.residual < 1e-13, "residual {}", data.residual);
        assert!(data.kv.max_abs() < 1e-13);
    }

    #[test]
    fn generic_quadratic_form_fails() {
        let g = flat4();
        let pt = Point::new(vec![0.4, 0.3, 0.2, 0.6]);
        let ma = g.eval(&pt).unwrap();
        let mut comps = vec![ScalarField::zero(4); 6];
        comps[3] = ScalarField::from_jets(4, |q| &q[0] * &q[0]); // x0^2 dx1^dx2
        let phi = FormField::new(4, 2, comps).unwrap();
        let data = cky_data(&ma, &eval_form(&phi, &pt)).unwrap();
        assert!(data.residual > 1e-2, "residual {}", data.residual);
    }

    #[test]
    fn normal_form_of_symplectic_pair() {
        // phi = 2 dx0^dx1 + 3 dx2^dx3 on Euclidean 4-space.
        let g = Array2::<C64>::eye(4);
        let mut comps = vec![c(0.0); 6];
        comps[0] = c(2.0);
        comps[5] = c(3.0);
        let phi = PForm::new(4, 2, comps).unwrap();
        let nf = normal_form(&g, &g, &phi, 2, false).unwrap();
        // eigenvalues 3i then 2i after sorting
        assert!((nf.eigenvalues[0] - ci(0.0, 3.0)).norm() < 1e-12);
        assert!((nf.eigenvalues[1] - ci(0.0, 2.0)).norm() < 1e-12);
        assert!(nf.reconstruction_residual < 1e-12);
        assert!(nf.frame.pairing_residual() < 1e-12);
    }

    #[test]
    fn normal_form_handles_real_eigenvalues() {
        // Lorentzian boost block pairs real eigenvalues.
        let mut g = Array2::<C64>::eye(4);
        g[[0, 0]] = c(-1.0);
        let gi = g.clone();
        let mut comps = vec![c(0.0); 6];
        comps[0] = c(2.0);
        comps[5] = c(3.0);
        let phi = PForm::new(4, 2, comps).unwrap();
        let nf = normal_form(&g, &gi, &phi, 2, false).unwrap();
        assert!((nf.eigenvalues[0] - ci(0.0, 3.0)).norm() < 1e-12);
        assert!((nf.eigenvalues[1] - c(2.0)).norm() < 1e-12);
        assert!(nf.reconstruction_residual < 1e-12);
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let g = Array2::<C64>::eye(4);
        let mut comps = vec![c(0.0); 6];
        comps[0] = c(1.0);
        let phi = PForm::new(4, 2, comps).unwrap();
        let err = normal_form(&g, &g, &phi, 2, false).unwrap_err();
        assert!(matches!(err, CoreError::DegenerateSpectrum(_)));
    }

    #[test]
    fn odd_dimension_normalizes_kernel_leg() {
        // 5d: symplectic pairs plus a kernel direction along x4.
        let g = Array2::<C64>::eye(5);
        let mut phi = PForm::zero(5, 2);
        // dx0^dx1 (rank position 0) and dx2^dx3
        let idxs = multi_indices(5, 2);
        for (k, idx) in idxs.iter().enumerate() {
            if idx == &vec![0, 1] {
                phi.comps_mut()[k] = c(2.0);
            }
            if idx == &vec![2, 3] {
                phi.comps_mut()[k] = c(0.7);
            }
        }
        let nf = normal_form(&g, &g, &phi, 2, true).unwrap();
        assert!(nf.reconstruction_residual < 1e-12);
        assert!(nf.frame.pairing_residual() < 1e-12);
        // kernel leg is the last one and points along x4 up to sign
        let v0 = nf.frame.vector(Leg::Zero);
        assert!((v0[4].norm() - 1.0).abs() < 1e-12);
        assert!(v0[4].re > 0.0);
    }

    #[test]
    fn tau_components_on_paired_triples_are_allowed() {
        let g = Array2::<C64>::eye(6);
        let mut comps = vec![c(0.0); 15];
        comps[0] = c(2.0); // dx0^dx1
        let idxs = multi_indices(6, 2);
        for (k, idx) in idxs.iter().enumerate() {
            if idx == &vec![2, 3] {
                comps[k] = c(3.0);
            }
            if idx == &vec![4, 5] {
                comps[k] = c(5.0);
            }
        }
        let phi = PForm::new(6, 2, comps).unwrap();
        let nf = normal_form(&g, &g, &phi, 3, false).unwrap();
        let frame = &nf.frame;
        // tau built on a dual pair: theta^1 ^ theta_1 ^ theta^2
        let t_up1 = PForm::from_covector(frame.covector(Leg::Down(0)));
        let t_dn1 = PForm::from_covector(frame.covector(Leg::Up(0)));
        let t_up2 = PForm::from_covector(frame.covector(Leg::Down(1)));
        let allowed = t_up1.wedge(&t_dn1).wedge(&t_up2);
        assert!(tau_condition_residual(frame, &allowed) < 1e-12);
        // tau on three distinct planes, no dual pair: forbidden
        let t_up3 = PForm::from_covector(frame.covector(Leg::Down(2)));
        let forbidden = t_up1.wedge(&t_up2).wedge(&t_up3);
        let r = tau_condition_residual(frame, &forbidden);
        assert!(r > 0.9, "forbidden pattern residual {r}");
    }

    #[test]
    fn four_dimensional_torsion_always_passes() {
        let g = Array2::<C64>::eye(4);
        let mut comps = vec![c(0.0); 6];
        comps[0] = c(2.0);
        comps[5] = c(3.0);
        let phi = PForm::new(4, 2, comps).unwrap();
        let nf = normal_form(&g, &g, &phi, 2, false).unwrap();
        let mut rng_comps = vec![c(0.0); 4];
        for (k, slot) in rng_comps.iter_mut().enumerate() {
            *slot = ci(0.3 + k as f64, 1.0 - k as f64);
        }
        let tau = PForm::new(4, 3, rng_comps).unwrap();
        assert_eq!(tau_condition_residual(&nf.frame, &tau), 0.0);
    }

    #[test]
    fn complex_structure_squares_to_minus_identity() {
        let g = Array2::<C64>::eye(2);
        let omega = PForm::new(2, 2, vec![c(1.0)]).unwrap();
        let j = complex_structure(&g, &omega);
        let j2 = j.dot(&j);
        assert!((j2[[0, 0]] + c(1.0)).norm() < 1e-14);
        assert!((j2[[0, 1]]).norm() < 1e-14);
    }

    #[test]
    fn omega_trace_of_kaehler_form_counts_planes() {
        let g = flat4();
        let pt = Point::new(vec![0.0; 4]);
        let ma = g.eval(&pt).unwrap();
        let mut comps = vec![c(0.0); 6];
        comps[0] = c(1.0);
        comps[5] = c(1.0);
        let omega = PForm::new(4, 2, comps).unwrap();
        let tr = omega_trace(&ma, &omega, &omega);
        assert!((tr - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn parallel_psi_is_hamiltonian() {
        let g = flat4();
        let pt = Point::new(vec![0.1, 0.2, 0.3, 0.4]);
        let ma = g.eval(&pt).unwrap();
        let mut om_comps = vec![ScalarField::zero(4); 6];
        om_comps[0] = ScalarField::real_constant(4, 1.0);
        om_comps[5] = ScalarField::real_constant(4, 1.0);
        let omega = FormField::new(4, 2, om_comps).unwrap();
        let psi = omega.scale(c(2.5));
        let data = hamiltonian_data(
            &ma,
            &omega.eval(&pt).unwrap(),
            &psi.eval(&pt).unwrap(),
        )
        .unwrap();
        assert!(data.j_squared_residual < 1e-14);
        assert!((data.sigma - c(5.0)).norm() < 1e-13);
        assert!(data.residual < 1e-14);
    }
}
