//! End-to-end acceptance battery. Every test covers one headline guarantee
//! of the engine and prints a single `ACCEPTANCE <name>: PASS|FAIL (...)`
//! verdict line before asserting, so
//! `cargo test --test acceptance -- --nocapture` reads as a checklist.

mod common;

use common::{random_pform, random_spd_metric, DenseAlt};
use ndarray::Array3;
use yano_core::catalog::{build, sample_points, MetricModel, ParameterRecord};
use yano_core::cky::{
    cky_data, closure_coclosure_residual, connection_identities, hamiltonian_data,
};
use yano_core::exterior::{multi_indices, FrameAtPoint, PForm};
use yano_core::foliation::{
    distribution_legs, frobenius_residual, frobenius_residual_legs, totally_geodesic_residual,
};
use yano_core::geometry::{
    frame_connection_values, frame_curvature_residual, frame_metricity_residual,
};
use yano_core::jet::{Point, ScalarField};
use yano_core::linalg;
use yano_core::spin::{
    connection_two_forms, spinor_integrability_residual, weyl_spin_residual, SpinAlgebra,
};
use yano_core::weyltype::{
    commutator_residual, frame_components, operator_spectrum, phi_hat_matrix,
    phi_hat_spectrum_closed_form, spectrum_match_residual, type_d_residual, wand_residual,
    weyl_hat_matrix,
};
use yano_core::C64;

/// Headline relative tolerance for geometric residuals.
const TAU: f64 = 1e-8;

fn verdict(name: &str, detail: &str, pass: bool) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {name}: {tag} ({detail})");
    assert!(pass, "{name}: {detail}");
}

fn below(name: &str, worst: f64, bound: f64) {
    let detail = format!("worst {worst:.3e}, bound {bound:.1e}");
    verdict(name, &detail, worst < bound);
}

fn model_for(id: &str, m: usize, odd: bool) -> MetricModel {
    build(id, &ParameterRecord::defaults(id, m, odd)).unwrap()
}

/// Fifty independent draws of the flat-space family across two even
/// dimensions, each probed at twenty points: the candidate built from the
/// constant blocks solves the conformal equation to near rounding.
#[test]
fn flat_family_solves_the_conformal_equation() {
    let mut worst = 0.0_f64;
    for (m, seeds) in [(2_usize, 0..25_u64), (3, 25..50)] {
        for seed in seeds {
            let mut params = ParameterRecord::defaults("flat", m, false);
            params.flat_seed = seed;
            let model = build("flat", &params).unwrap();
            for pt in sample_points(&model, 20, 400 + seed).unwrap() {
                let (ma, _) = model.at_point(&pt).unwrap();
                let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
                worst = worst.max(cky_data(&ma, &phi).unwrap().residual);
            }
        }
    }
    below("flat family", worst, 1e-10);
}

/// The rotating family's principal candidate is conformal Killing and closed
/// for every supported dimension and parity, with random generic masses.
#[test]
fn rotating_candidates_are_closed_conformal_killing() {
    let mut worst = 0.0_f64;
    let cases = [(2, false), (3, false), (4, false), (2, true), (3, true)];
    for (i, (m, odd)) in cases.into_iter().enumerate() {
        let params = ParameterRecord::kna_random(m, odd, 900 + i as u64);
        let model = build("kerr_nut_ads", &params).unwrap();
        for pt in sample_points(&model, 20, 41 + i as u64).unwrap() {
            let (ma, _) = model.at_point(&pt).unwrap();
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let data = cky_data(&ma, &phi).unwrap();
            worst = worst.max(data.residual).max(data.dphi_rel);
        }
    }
    below("rotating family closed candidate", worst, TAU);
}

/// Every maximal isotropic distribution selected from the eigenplanes is
/// involutive with totally geodesic leaves, on every catalog family.
#[test]
fn eigenplane_distributions_integrate_with_geodesic_leaves() {
    let models = [
        model_for("kerr_nut_ads", 2, false),
        model_for("kerr_nut_ads", 3, false),
        model_for("kerr_nut_ads", 2, true),
        model_for("kerr_nut_ads", 3, true),
        model_for("lmp5", 2, true),
        model_for("orthotoric", 2, false),
        model_for("orthotoric", 3, false),
        model_for("flat", 2, false),
        model_for("flat", 3, false),
    ];
    let mut worst = 0.0_f64;
    for (k, model) in models.iter().enumerate() {
        for pt in sample_points(model, 5, 70 + k as u64).unwrap() {
            let (ma, fb) = model.at_point(&pt).unwrap();
            let gf = frame_connection_values(&ma, &fb);
            let w = fb.structure_functions();
            for selector in 0..(1_u32 << model.m) {
                worst = worst.max(frobenius_residual(&fb.frame, &w, selector));
                worst = worst.max(totally_geodesic_residual(&fb.frame, &gf, selector));
            }
        }
    }
    below("isotropic distribution integrability", worst, TAU);
}

/// The multiplied-through connection identities (divergence components,
/// connection difference and sum, and the unit-leg relation in odd
/// dimensions) hold on the rotating family in both parities.
#[test]
fn connection_identities_hold_on_the_rotating_family() {
    let mut worst = 0.0_f64;
    let cases = [(2, false), (3, false), (2, true), (3, true)];
    for (k, (m, odd)) in cases.into_iter().enumerate() {
        let model = model_for("kerr_nut_ads", m, odd);
        for pt in sample_points(&model, 5, 110 + k as u64).unwrap() {
            let (ma, fb) = model.at_point(&pt).unwrap();
            let gf = frame_connection_values(&ma, &fb);
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let data = cky_data(&ma, &phi).unwrap();
            let lams = model.eigenvalue_jets(&pt).unwrap();
            let ids = connection_identities(&fb, &gf, &lams, &data.kv);
            worst = worst.max(ids.comp_kv).max(ids.lc_minus).max(ids.lc_plus);
            if model.odd {
                worst = worst.max(ids.odd_cond);
            }
        }
    }
    below("connection identities", worst, TAU);
}

/// With nonzero masses the curvature is type D: the canonical frame
/// diagonalises the Weyl operator, every null frame leg spans a degenerate
/// aligned direction, and the Weyl and candidate operators commute.
#[test]
fn curvature_is_type_d_with_aligned_null_planes() {
    let mut worst = 0.0_f64;
    let cases = [(2, false), (3, false), (3, true)];
    for (k, (m, odd)) in cases.into_iter().enumerate() {
        let model = model_for("kerr_nut_ads", m, odd);
        assert!(
            model.params.mass.iter().any(|&v| v.abs() > 0.0),
            "the check needs curvature, so a mass must be nonzero"
        );
        for pt in sample_points(&model, 3, 130 + k as u64).unwrap() {
            let (ma, fb) = model.at_point(&pt).unwrap();
            let weyl = ma.weyl_lowered().unwrap();
            let fw = frame_components(&weyl, &fb.frame);
            worst = worst.max(type_d_residual(&fw, &fb.frame));
            for leg in 0..(2 * model.m) {
                worst = worst.max(wand_residual(&fw, &fb.frame, leg));
            }
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let phat = phi_hat_matrix(&ma.g_inv, &phi.values());
            let chat = weyl_hat_matrix(&ma.g_inv, &weyl);
            let (comm, vacuous) = commutator_residual(&chat, &phat);
            worst = worst.max(if vacuous { 1.0 } else { comm });
        }
    }
    below("type D alignment", worst, TAU);
}

/// A dense eigensolve of the raised candidate matches the closed-form
/// spectrum built from the model eigenvalue functions: the pair sums and
/// differences, and a kernel of the predicted dimension.
#[test]
fn operator_spectrum_matches_the_closed_form() {
    let mut worst = 0.0_f64;
    let cases = [(2, false), (3, false), (2, true)];
    for (k, (m, odd)) in cases.into_iter().enumerate() {
        let model = model_for("kerr_nut_ads", m, odd);
        for pt in sample_points(&model, 3, 150 + k as u64).unwrap() {
            let (ma, _) = model.at_point(&pt).unwrap();
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let phat = phi_hat_matrix(&ma.g_inv, &phi.values());
            let lams: Vec<C64> = model
                .eigenvalue_jets(&pt)
                .unwrap()
                .iter()
                .map(|j| j.value)
                .collect();
            let spec = operator_spectrum(&phat).unwrap();
            let expect = phi_hat_spectrum_closed_form(&lams, model.odd);
            worst = worst.max(spectrum_match_residual(&spec, &expect));
        }
    }
    below("operator spectrum closed form", worst, 1e-9);
}

/// The five-dimensional black hole model reproduces its closed-form frame
/// brackets, keeps the rank-two planes and their unit-leg extensions
/// involutive, and its non-candidate stays clear of the negative floor.
#[test]
fn five_dimensional_model_matches_its_closed_forms() {
    let model = model_for("lmp5", 2, true);
    let expected = model.commutators.as_ref().unwrap();
    let n = model.n;
    let mut brackets = 0.0_f64;
    let mut planes = 0.0_f64;
    let mut floor = f64::INFINITY;
    for pt in sample_points(&model, 20, 170).unwrap() {
        let (ma, fb) = model.at_point(&pt).unwrap();
        let w = fb.structure_functions();
        let mut want = Array3::<C64>::zeros((n, n, n));
        for ec in expected(&pt).unwrap() {
            for (c, &v) in ec.coeffs.iter().enumerate() {
                want[[ec.a, ec.b, c]] = v;
                want[[ec.b, ec.a, c]] = -v;
            }
        }
        let scale = want
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let gap = w
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max);
        brackets = brackets.max(gap / scale);
        for selector in 0..(1_u32 << model.m) {
            planes = planes.max(frobenius_residual(&fb.frame, &w, selector));
            let mut legs = distribution_legs(&fb.frame, selector);
            legs.push(n - 1);
            planes = planes.max(frobenius_residual_legs(&w, &legs));
        }
        let neg = model.negative_cky.as_ref().unwrap().eval(&pt).unwrap();
        floor = floor.min(cky_data(&ma, &neg).unwrap().residual);
    }
    let pass = brackets < TAU && planes < TAU && floor >= 1e-3;
    let detail = format!(
        "brackets {brackets:.3e}, distributions {planes:.3e}, negative floor {floor:.3e}"
    );
    verdict("five dimensional closed forms", &detail, pass);
}

/// On the toric Kaehler family the fundamental form is closed, the candidate
/// satisfies the structured equation, and subtracting half the moment-map
/// trace times the fundamental form leaves a conformal Killing form that is
/// closed-coclosed compatible; the eigenplane splittings stay involutive.
#[test]
fn kaehler_candidate_decomposes_through_the_moment_map() {
    let mut worst = 0.0_f64;
    for (k, m) in [2_usize, 3].into_iter().enumerate() {
        let model = model_for("orthotoric", m, false);
        for pt in sample_points(&model, 5, 190 + k as u64).unwrap() {
            let (ma, fb) = model.at_point(&pt).unwrap();
            let omega = model.kahler.as_ref().unwrap().eval(&pt).unwrap();
            let psi = model.hamiltonian.as_ref().unwrap().eval(&pt).unwrap();
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let hd = hamiltonian_data(&ma, &omega, &psi).unwrap();
            let omega_vals = omega.values();
            let scale = omega_vals.max_abs().max(1.0);
            worst = worst.max(omega.d().values().max_abs() / scale);
            worst = worst.max(hd.residual).max(hd.j_squared_residual);
            let shifted = psi.values().sub(&omega_vals.scale(&(hd.sigma * 0.5)));
            let phi_vals = phi.values();
            let gap = phi_vals.sub(&shifted).max_abs() / phi_vals.max_abs().max(1.0);
            worst = worst.max(gap);
            worst = worst.max(cky_data(&ma, &phi).unwrap().residual);
            worst = worst.max(closure_coclosure_residual(&ma, &omega_vals, &phi).unwrap());
            let w = fb.structure_functions();
            for selector in 0..(1_u32 << model.m) {
                worst = worst.max(frobenius_residual(&fb.frame, &w, selector));
            }
        }
    }
    below("moment map decomposition", worst, TAU);
}

/// The spinor calculus is exact where it should be exact: Clifford
/// relations to rounding, predicted eigenvalues on basis spinors for both
/// the half-weight and full-weight actions, purity verdicts on the basis
/// catalog with a non-pure witness, and covariantly constant pure spinors
/// on the rotating family.
#[test]
fn spin_calculus_is_exact_and_covariantly_parallel() {
    let mut cliff = 0.0_f64;
    let parities = [
        (1, false),
        (1, true),
        (2, false),
        (2, true),
        (3, false),
        (3, true),
        (4, false),
        (4, true),
    ];
    for (m, odd) in parities {
        let alg = SpinAlgebra::new(m, odd);
        let gram = FrameAtPoint::canonical_pairing(m, odd);
        for a in 0..alg.legs() {
            for b in 0..alg.legs() {
                for col in 0..alg.dim() {
                    let z = alg.basis_spinor(col as u32);
                    let ab = alg.gamma_leg(a, &alg.gamma_leg(b, &z));
                    let ba = alg.gamma_leg(b, &alg.gamma_leg(a, &z));
                    // model metric is half the canonical pairing
                    let expect = z.map(|v| -v * gram[[a, b]]);
                    for i in 0..alg.dim() {
                        cliff = cliff.max((ab[i] + ba[i] - expect[i]).norm());
                    }
                }
            }
        }
    }

    let mut eig = 0.0_f64;
    for (m, odd) in [(2, false), (2, true), (3, false)] {
        let alg = SpinAlgebra::new(m, odd);
        let n = alg.legs();
        let lams: Vec<C64> = (0..m)
            .map(|k| C64::new(0.3 * k as f64 - 0.2, 1.1 + 0.7 * k as f64))
            .collect();
        let mut comps = vec![C64::new(0.0, 0.0); multi_indices(n, 2).len()];
        for (rank, idx) in multi_indices(n, 2).iter().enumerate() {
            if idx[0] < m && idx[1] == idx[0] + m {
                comps[rank] = lams[idx[0]];
            }
        }
        let phi = PForm::new(n, 2, comps).unwrap();
        for subset in 0..(1_u32 << m) {
            let z = alg.basis_spinor(subset);
            let half = alg.so_action(&phi, &z);
            let full = alg.form_action(&phi, &z);
            let expect = alg.clifford_eigenvalue(&lams, subset);
            for (i, &v) in half.iter().enumerate() {
                let want = if i == subset as usize {
                    expect
                } else {
                    C64::new(0.0, 0.0)
                };
                eig = eig.max((v - want).norm());
                // the full Clifford action weighs the same eigenvalue twice
                eig = eig.max((full[i] - 2.0 * want).norm());
            }
        }
    }

    let mut purity_ok = true;
    for (m, odd) in [(2, false), (3, false), (3, true), (4, false)] {
        let alg = SpinAlgebra::new(m, odd);
        for subset in 0..(1_u32 << m) {
            purity_ok &= alg.is_pure(&alg.basis_spinor(subset)).unwrap();
            let (_, dim) = alg.annihilator_kernel(&alg.basis_spinor(subset)).unwrap();
            purity_ok &= dim == m;
        }
    }
    let alg = SpinAlgebra::new(4, false);
    let mut witness = alg.basis_spinor(0);
    witness[0b1111] = C64::new(1.0, 0.0);
    purity_ok &= !alg.is_pure(&witness).unwrap();

    let mut par = 0.0_f64;
    for (k, (m, odd)) in [(2, false), (3, false)].into_iter().enumerate() {
        let model = model_for("kerr_nut_ads", m, odd);
        let alg = SpinAlgebra::new(m, odd);
        for pt in sample_points(&model, 3, 210 + k as u64).unwrap() {
            let (ma, fb) = model.at_point(&pt).unwrap();
            let gf = frame_connection_values(&ma, &fb);
            let conn = connection_two_forms(&fb.frame, &gf);
            let weyl = ma.weyl_lowered().unwrap();
            let fw = frame_components(&weyl, &fb.frame);
            for selector in 0..(1_u32 << m) {
                par = par.max(spinor_integrability_residual(&alg, &conn, selector));
                par = par.max(weyl_spin_residual(&alg, &fw, selector));
            }
        }
    }

    let pass = cliff < 1e-14 && eig < 1e-13 && purity_ok && par < TAU;
    let detail = format!(
        "clifford {cliff:.1e}, eigenvalues {eig:.1e}, purity {}, parallel {par:.3e}",
        if purity_ok { "ok" } else { "wrong" }
    );
    verdict("spin calculus", &detail, pass);
}

/// Independent oracles agree with the engine: jets against central finite
/// differences with the quadratic error decay, the increasing-index form
/// algebra against a dense antisymmetric expansion, and the frame-side
/// curvature and metricity against the coordinate-side tensors.
#[test]
fn independent_oracles_agree_with_the_engine() {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let field = ScalarField::from_jets(3, |q| {
        let a = (&q[0].sin() * &q[1]).exp();
        let b = &q[2].powi(2) * &q[1].cos();
        &a + &b
    });
    let base = [0.4, -0.7, 1.1];
    let jet = field.eval(&Point::new(base.to_vec())).unwrap();
    let value = |coords: Vec<f64>| field.value(&Point::new(coords)).unwrap();
    let grad_err = |h: f64| -> f64 {
        let mut err = 0.0_f64;
        for k in 0..3 {
            let mut up = base.to_vec();
            let mut dn = base.to_vec();
            up[k] += h;
            dn[k] -= h;
            let fd = (value(up) - value(dn)) / (2.0 * h);
            err = err.max((fd - jet.grad[k]).norm());
        }
        err
    };
    let coarse = grad_err(1e-3);
    let fine = grad_err(1e-4);
    let ratio = coarse / fine;
    let mut hess_gap = 0.0_f64;
    let h = 1e-3;
    for i in 0..3 {
        for j in 0..3 {
            let probe = |si: f64, sj: f64| {
                let mut q = base.to_vec();
                q[i] += si * h;
                q[j] += sj * h;
                value(q)
            };
            let fd = (probe(1.0, 1.0) - probe(1.0, -1.0) - probe(-1.0, 1.0)
                + probe(-1.0, -1.0))
                / (4.0 * h * h);
            hess_gap = hess_gap.max((fd - jet.hess_at(i, j)).norm());
        }
    }
    let jets_ok = (60.0..160.0).contains(&ratio) && fine < 1e-6 && hess_gap < 1e-4;

    let mut rng = ChaCha8Rng::seed_from_u64(230);
    let mut forms = 0.0_f64;
    for (n, p, q) in [(6, 2, 2), (5, 2, 3), (4, 1, 3)] {
        let a = random_pform(&mut rng, n, p);
        let b = random_pform(&mut rng, n, q);
        let fast = DenseAlt::from_pform(&a.wedge(&b));
        let dense = DenseAlt::from_pform(&a).wedge(&DenseAlt::from_pform(&b));
        forms = forms.max(fast.max_abs_diff(&dense));
    }
    let mut duals = 0.0_f64;
    for n in [4, 5] {
        let g = random_spd_metric(&mut rng, n);
        let gi = linalg::inv(&g).unwrap();
        for p in 0..=n {
            let a = random_pform(&mut rng, n, p);
            let fast = DenseAlt::from_pform(&a.hodge(&g, &gi).unwrap());
            let dense = DenseAlt::from_pform(&a).hodge(&g, &gi);
            duals = duals.max(fast.max_abs_diff(&dense));
        }
    }
    let exterior_ok = forms < 1e-12 && duals < 1e-10;

    let mut frame = 0.0_f64;
    let models = [model_for("kerr_nut_ads", 2, false), model_for("orthotoric", 2, false)];
    for (k, model) in models.iter().enumerate() {
        for pt in sample_points(model, 3, 250 + k as u64).unwrap() {
            let (ma, fb) = model.at_point(&pt).unwrap();
            frame = frame.max(frame_curvature_residual(&ma, &fb));
            frame = frame.max(frame_metricity_residual(&ma, &fb));
        }
    }
    let frame_ok = frame < TAU;

    let pass = jets_ok && exterior_ok && frame_ok;
    let detail = format!(
        "fd ratio {ratio:.1}, hessian gap {hess_gap:.1e}, wedge {forms:.1e}, \
         dual {duals:.1e}, frame curvature {frame:.3e}"
    );
    verdict("independent oracles", &detail, pass);
}
