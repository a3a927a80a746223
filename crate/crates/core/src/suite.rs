//! Verification suites: run named batteries of residual checks on one
//! catalog model over seeded sample points and assemble a serializable
//! report.
//!
//! Check identifiers are stable strings:
//!
//! - `cky`: `cky_residual`, `cky_closed` (closed candidates),
//!   `normal_form_reconstruction` and `normal_form_eigenvalues` (models
//!   with eigenvalue functions), `cky_negative_floor` (candidates that
//!   must fail), `info_<name>` (ungated extras).
//! - `foliation`: `frobenius_<bits>` and `geodesic_<bits>` for every plane
//!   selector, `connection_pattern` on normal-form models.
//! - `weyl`: `weyl_type_d`, `weyl_degenerate_<leg>` for every null leg,
//!   `weyl_commutator`, `weyl_operator_spectrum`.
//! - `spin`: `spinor_parallel_<bits>`, and `spinor_curvature_<bits>` on
//!   models with a normal-form candidate.
//! - `hamiltonian`: `kahler_closed`, `hamiltonian_residual`,
//!   `complex_structure_square`, `hamiltonian_eigenvalues`,
//!   `closure_coclosure`.
//! - `identities`: `divergence_eigenvalue`, `connection_difference`,
//!   `connection_sum`, `connection_unit_leg` (odd dimensions only).
//!
//! Selector bitstrings are printed most significant plane first; a set bit
//! for plane `mu` picks its conjugate (up) leg.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{build, sample_points, MetricModel, ParameterRecord};
use crate::cky::{
    cky_data, closure_coclosure_residual, connection_identities, hamiltonian_data, normal_form,
};
use crate::error::CoreError;
use crate::foliation::{
    connection_pattern_residual, frobenius_residual, totally_geodesic_residual,
};
use crate::geometry::frame_connection_values;
use crate::jet::Point;
use crate::spin::{
    connection_two_forms, spinor_integrability_residual, weyl_spin_residual, SpinAlgebra,
};
use crate::weyltype::{
    commutator_residual, frame_components, operator_spectrum, phi_hat_matrix,
    phi_hat_spectrum_closed_form, spectrum_match_residual, type_d_residual, wand_residual,
    weyl_hat_matrix,
};
use crate::C64;

/// Named battery of checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cky,
    Foliation,
    Weyl,
    Spin,
    Hamiltonian,
    Identities,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Cky,
        Suite::Foliation,
        Suite::Weyl,
        Suite::Spin,
        Suite::Hamiltonian,
        Suite::Identities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cky => "cky",
            Suite::Foliation => "foliation",
            Suite::Weyl => "weyl",
            Suite::Spin => "spin",
            Suite::Hamiltonian => "hamiltonian",
            Suite::Identities => "identities",
        }
    }

    /// Whether the model carries the data this suite checks.
    pub fn applicable(self, model: &MetricModel) -> bool {
        match self {
            Suite::Cky => model.cky.is_some() || model.negative_cky.is_some(),
            Suite::Foliation | Suite::Spin => true,
            Suite::Weyl | Suite::Identities => {
                model.cky.is_some() && model.eigenvalues.is_some()
            }
            Suite::Hamiltonian => model.kahler.is_some() && model.hamiltonian.is_some(),
        }
    }

    /// Human-readable statement of the data requirement behind
    /// [`Suite::applicable`].
    pub fn requirement(self) -> &'static str {
        match self {
            Suite::Cky => "needs a candidate 2-form, positive or negative",
            Suite::Foliation | Suite::Spin => "applies to every model",
            Suite::Weyl | Suite::Identities => {
                "needs a candidate 2-form with eigenvalue functions"
            }
            Suite::Hamiltonian => "needs a Kaehler form and a Hamiltonian candidate",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cky" => Ok(Suite::Cky),
            "foliation" => Ok(Suite::Foliation),
            "weyl" => Ok(Suite::Weyl),
            "spin" => Ok(Suite::Spin),
            "hamiltonian" => Ok(Suite::Hamiltonian),
            "identities" => Ok(Suite::Identities),
            other => Err(CoreError::Config(format!(
                "unknown suite '{other}', expected one of cky, foliation, weyl, spin, hamiltonian, identities"
            ))),
        }
    }
}

/// Suites whose data requirements the model satisfies, in canonical order.
pub fn applicable_suites(model: &MetricModel) -> Vec<Suite> {
    Suite::ALL
        .into_iter()
        .filter(|s| s.applicable(model))
        .collect()
}

/// One verification run: the model, the checks, and the sampling plan.
///
/// Deserializes from a TOML or JSON document with the same field names;
/// omitted fields take the documented defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Catalog id of the metric to verify.
    pub metric: String,
    /// Family parameters; empty vectors select the documented defaults.
    pub params: ParameterRecord,
    /// Suites to run, in order. Must be nonempty.
    pub suites: Vec<Suite>,
    /// Number of sample points.
    pub points: usize,
    /// Seed for the rejection sampler.
    pub seed: u64,
    /// Upper bound for every gated residual unless overridden.
    pub tolerance: f64,
    /// Lower bound a negative check must exceed.
    pub negative_floor: f64,
    /// Per-check bounds replacing the defaults, keyed by check id.
    pub tolerance_overrides: BTreeMap<String, f64>,
    /// Report destination; the JSON report is written here by [`run`].
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: String::new(),
            params: ParameterRecord::default(),
            suites: Vec::new(),
            points: 20,
            seed: 42,
            tolerance: 1e-8,
            negative_floor: 1e-3,
            tolerance_overrides: BTreeMap::new(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.suites.is_empty() {
            return Err(CoreError::Config("suite list is empty".into()));
        }
        if self.points == 0 {
            return Err(CoreError::Config("sample count must be positive".into()));
        }
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("negative_floor", self.negative_floor),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(CoreError::Config(format!(
                    "{name} must be a positive number, got {v}"
                )));
            }
        }
        for (check, v) in &self.tolerance_overrides {
            if !v.is_finite() || *v <= 0.0 {
                return Err(CoreError::Config(format!(
                    "override for {check} must be a positive number, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn bound_for(&self, check: &str, fallback: f64) -> f64 {
        self.tolerance_overrides
            .get(check)
            .copied()
            .unwrap_or(fallback)
    }
}

/// Direction of a check's gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    /// Residual must stay below the bound.
    Below,
    /// Negative check: residual must stay above the bound.
    Above,
    /// Informational, no bound.
    Ungated,
}

/// One residual measured at one sample point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Stable check id, listed in the module docs.
    pub check: String,
    /// Index into the sampled point list.
    pub point: usize,
    /// Chart coordinates of the point.
    pub coords: Vec<f64>,
    pub residual: f64,
    pub gate: Gate,
    /// Bound the gate compares against; absent for ungated checks.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

/// Per-check maxima and the combined verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    /// Largest residual seen for each check id.
    pub max_residual: BTreeMap<String, f64>,
    /// True exactly when every record passed.
    pub overall_pass: bool,
}

/// Full result of a verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Echo of the configuration that produced the report.
    pub config: RunConfig,
    /// All records, ordered by point index, then by suite order.
    pub records: Vec<CheckRecord>,
    pub summary: ReportSummary,
    /// Sign and ordering conventions the residuals assume.
    pub convention_notes: Vec<String>,
}

impl VerificationReport {
    pub fn overall_pass(&self) -> bool {
        self.summary.overall_pass
    }

    pub fn to_json(&self) -> Result<String, CoreError> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CoreError::Config(format!("cannot serialize report: {e}")))
    }
}

/// Run every requested suite over seeded sample points of the model.
///
/// The report depends only on the configuration: points come from the
/// model's seeded rejection sampler and records are assembled in point
/// order. When `config.out` is set the JSON report is also written there.
pub fn run(config: &RunConfig) -> Result<VerificationReport, CoreError> {
    config.validate()?;
    let model = build(&config.metric, &config.params)?;
    let mut suites: Vec<Suite> = Vec::new();
    for &s in &config.suites {
        if !suites.contains(&s) {
            suites.push(s);
        }
    }
    for &s in &suites {
        if !s.applicable(&model) {
            return Err(CoreError::Unsupported(format!(
                "suite {s} does not apply to model {}: {}",
                model.id,
                s.requirement()
            )));
        }
    }
    let points = sample_points(&model, config.points, config.seed)?;
    let results: Vec<Result<Vec<CheckRecord>, CoreError>> = points
        .par_iter()
        .enumerate()
        .map(|(idx, pt)| point_records(&model, config, &suites, idx, pt))
        .collect();
    let mut records = Vec::new();
    for point_result in results {
        records.extend(point_result?);
    }
    let summary = summarize(&records);
    let mut convention_notes = engine_notes();
    convention_notes.extend(model.notes.iter().cloned());
    let report = VerificationReport {
        config: config.clone(),
        records,
        summary,
        convention_notes,
    };
    if let Some(path) = &config.out {
        std::fs::write(path, report.to_json()?)
            .map_err(|e| CoreError::Config(format!("cannot write report to {path}: {e}")))?;
    }
    Ok(report)
}

/// Record accumulator for one sample point.
struct Recorder<'a> {
    config: &'a RunConfig,
    point: usize,
    coords: Vec<f64>,
    records: Vec<CheckRecord>,
}

impl Recorder<'_> {
    fn emit(&mut self, check: &str, residual: f64, gate: Gate, tolerance: Option<f64>, pass: bool) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            point: self.point,
            coords: self.coords.clone(),
            residual,
            gate,
            tolerance,
            pass,
        });
    }

    fn below(&mut self, check: &str, residual: f64) {
        let bound = self.config.bound_for(check, self.config.tolerance);
        self.emit(check, residual, Gate::Below, Some(bound), residual <= bound);
    }

    fn above(&mut self, check: &str, residual: f64) {
        let bound = self.config.bound_for(check, self.config.negative_floor);
        self.emit(check, residual, Gate::Above, Some(bound), residual >= bound);
    }

    fn info(&mut self, check: &str, residual: f64) {
        self.emit(check, residual, Gate::Ungated, None, true);
    }
}

fn point_records(
    model: &MetricModel,
    config: &RunConfig,
    suites: &[Suite],
    idx: usize,
    pt: &Point,
) -> Result<Vec<CheckRecord>, CoreError> {
    let (ma, fb) = model.at_point(pt)?;
    let gf = frame_connection_values(&ma, &fb);
    let weyl = if suites
        .iter()
        .any(|s| matches!(s, Suite::Weyl | Suite::Spin))
    {
        Some(ma.weyl_lowered()?)
    } else {
        None
    };
    let mut rec = Recorder {
        config,
        point: idx,
        coords: pt.coords.clone(),
        records: Vec::new(),
    };

    for &suite in suites {
        match suite {
            Suite::Cky => {
                if let Some(field) = &model.cky {
                    let phi = field.eval(pt)?;
                    let data = cky_data(&ma, &phi)?;
                    rec.below("cky_residual", data.residual);
                    if model.closed_cky {
                        rec.below("cky_closed", data.dphi_rel);
                    }
                    if model.eigenvalues.is_some() {
                        let want = analytic_representatives(model, pt)?;
                        // the normal form needs a simple spectrum; models like
                        // the two-plane Kaehler candidate are degenerate
                        // everywhere and skip these records
                        if spectrum_is_simple(&want) {
                            let nf =
                                normal_form(&ma.g, &ma.g_inv, &phi.values(), model.m, model.odd)?;
                            rec.below("normal_form_reconstruction", nf.reconstruction_residual);
                            rec.below(
                                "normal_form_eigenvalues",
                                eigenvalue_mismatch(&nf.eigenvalues, &want),
                            );
                        }
                    }
                }
                if let Some(field) = &model.negative_cky {
                    let phi = field.eval(pt)?;
                    let data = cky_data(&ma, &phi)?;
                    rec.above("cky_negative_floor", data.residual);
                }
                for (name, field) in &model.informational {
                    let phi = field.eval(pt)?;
                    let data = cky_data(&ma, &phi)?;
                    rec.info(&format!("info_{name}"), data.residual);
                }
            }
            Suite::Foliation => {
                let w = fb.structure_functions();
                for selector in 0..(1u32 << model.m) {
                    let bits = bitstring(selector, model.m);
                    rec.below(
                        &format!("frobenius_{bits}"),
                        frobenius_residual(&fb.frame, &w, selector),
                    );
                    rec.below(
                        &format!("geodesic_{bits}"),
                        totally_geodesic_residual(&fb.frame, &gf, selector),
                    );
                }
                if model.eigenvalues.is_some() {
                    rec.below(
                        "connection_pattern",
                        connection_pattern_residual(&fb.frame, &gf),
                    );
                }
            }
            Suite::Weyl => {
                let weyl = weyl.as_ref().expect("precomputed for the weyl suite");
                let fw = frame_components(weyl, &fb.frame);
                rec.below("weyl_type_d", type_d_residual(&fw, &fb.frame));
                // aligned directions are null by definition, so the unit leg
                // of odd dimensions is not a candidate
                for leg in 0..(2 * model.m) {
                    rec.below(
                        &format!("weyl_degenerate_{leg}"),
                        wand_residual(&fw, &fb.frame, leg),
                    );
                }
                let phi = model
                    .cky
                    .as_ref()
                    .expect("applicability guarantees a candidate")
                    .eval(pt)?
                    .values();
                let phat = phi_hat_matrix(&ma.g_inv, &phi);
                let chat = weyl_hat_matrix(&ma.g_inv, weyl);
                let (comm, _vacuous) = commutator_residual(&chat, &phat);
                rec.below("weyl_commutator", comm);
                let lams: Vec<C64> = model
                    .eigenvalue_jets(pt)?
                    .iter()
                    .map(|j| j.value)
                    .collect();
                let spec = operator_spectrum(&phat)?;
                let expect = phi_hat_spectrum_closed_form(&lams, model.odd);
                rec.below(
                    "weyl_operator_spectrum",
                    spectrum_match_residual(&spec, &expect),
                );
            }
            Suite::Spin => {
                let algebra = SpinAlgebra {
                    m: model.m,
                    odd: model.odd,
                };
                let conn = connection_two_forms(&fb.frame, &gf);
                // the curvature alignment is a consequence of the normal-form
                // candidate, so it is only gated where one exists
                let aligned = model.cky.is_some() && model.eigenvalues.is_some();
                let fw = aligned.then(|| {
                    let weyl = weyl.as_ref().expect("precomputed for the spin suite");
                    frame_components(weyl, &fb.frame)
                });
                for selector in 0..(1u32 << model.m) {
                    let bits = bitstring(selector, model.m);
                    rec.below(
                        &format!("spinor_parallel_{bits}"),
                        spinor_integrability_residual(&algebra, &conn, selector),
                    );
                    if let Some(fw) = &fw {
                        rec.below(
                            &format!("spinor_curvature_{bits}"),
                            weyl_spin_residual(&algebra, fw, selector),
                        );
                    }
                }
            }
            Suite::Hamiltonian => {
                let omega = model
                    .kahler
                    .as_ref()
                    .expect("applicability guarantees a Kaehler form")
                    .eval(pt)?;
                let psi = model
                    .hamiltonian
                    .as_ref()
                    .expect("applicability guarantees a candidate")
                    .eval(pt)?;
                let hd = hamiltonian_data(&ma, &omega, &psi)?;
                let omega_vals = omega.values();
                let scale = omega_vals.max_abs().max(1.0);
                rec.below("kahler_closed", omega.d().values().max_abs() / scale);
                rec.below("hamiltonian_residual", hd.residual);
                rec.below("complex_structure_square", hd.j_squared_residual);
                if let Some(fields) = &model.hamiltonian_eigenvalues {
                    let nf = normal_form(&ma.g, &ma.g_inv, &psi.values(), model.m, model.odd)?;
                    let vals = fields
                        .iter()
                        .map(|f| f.eval(pt).map(|j| j.value))
                        .collect::<Result<Vec<C64>, CoreError>>()?;
                    let want = sorted_representatives(vals);
                    rec.below(
                        "hamiltonian_eigenvalues",
                        eigenvalue_mismatch(&nf.eigenvalues, &want),
                    );
                }
                if let Some(field) = &model.cky {
                    let phi = field.eval(pt)?;
                    rec.below(
                        "closure_coclosure",
                        closure_coclosure_residual(&ma, &omega_vals, &phi)?,
                    );
                }
            }
            Suite::Identities => {
                let phi = model
                    .cky
                    .as_ref()
                    .expect("applicability guarantees a candidate")
                    .eval(pt)?;
                let data = cky_data(&ma, &phi)?;
                let lams = model.eigenvalue_jets(pt)?;
                let ids = connection_identities(&fb, &gf, &lams, &data.kv);
                rec.below("divergence_eigenvalue", ids.comp_kv);
                rec.below("connection_difference", ids.lc_minus);
                rec.below("connection_sum", ids.lc_plus);
                if model.odd {
                    rec.below("connection_unit_leg", ids.odd_cond);
                }
            }
        }
    }
    Ok(rec.records)
}

fn bitstring(selector: u32, m: usize) -> String {
    format!("{selector:0width$b}", width = m)
}

/// Representative of the pair {z, -z} with the larger (im, re) key, matching
/// the choice made by the normal form.
fn representative(z: C64) -> C64 {
    if (z.im, z.re) >= (-z.im, -z.re) {
        z
    } else {
        -z
    }
}

fn sorted_representatives(vals: Vec<C64>) -> Vec<C64> {
    let mut reps: Vec<C64> = vals.into_iter().map(representative).collect();
    reps.sort_by(|a, b| {
        (b.im, b.re)
            .partial_cmp(&(a.im, a.re))
            .expect("eigenvalues are finite")
    });
    reps
}

/// Expected normal-form representatives from the model's eigenvalue fields.
fn analytic_representatives(model: &MetricModel, pt: &Point) -> Result<Vec<C64>, CoreError> {
    let vals = model
        .eigenvalue_jets(pt)?
        .iter()
        .map(|j| j.value)
        .collect();
    Ok(sorted_representatives(vals))
}

/// Whether the representatives are pairwise separated and nonzero, so the
/// eigenplanes of the normal form are determined.
fn spectrum_is_simple(reps: &[C64]) -> bool {
    let scale = reps.iter().map(|z| z.norm()).fold(1e-30_f64, f64::max);
    for (i, a) in reps.iter().enumerate() {
        if a.norm() <= 1e-6 * scale {
            return false;
        }
        for b in reps.iter().skip(i + 1) {
            if (a - b).norm() <= 1e-6 * scale {
                return false;
            }
        }
    }
    true
}

/// Largest elementwise gap between two sorted spectra, relative to the
/// expected scale.
fn eigenvalue_mismatch(got: &[C64], want: &[C64]) -> f64 {
    if got.len() != want.len() {
        return f64::MAX;
    }
    let scale = want.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0_f64, f64::max)
        / scale
}

fn summarize(records: &[CheckRecord]) -> ReportSummary {
    let mut max_residual: BTreeMap<String, f64> = BTreeMap::new();
    let mut overall_pass = true;
    for r in records {
        let entry = max_residual.entry(r.check.clone()).or_insert(r.residual);
        if r.residual > *entry {
            *entry = r.residual;
        }
        overall_pass &= r.pass;
    }
    ReportSummary {
        max_residual,
        overall_pass,
    }
}

fn engine_notes() -> Vec<String> {
    [
        "frame legs are ordered as m plane rows, m conjugate rows, then the unit row in odd dimensions",
        "plane selectors are bitmasks printed most significant plane first; a set bit picks the conjugate leg",
        "the codifferential convention is (delta a)_J = -g^{cb} (nabla_c a)_{bJ}",
        "negative checks pass when the residual stays above the floor at every point",
        "informational checks carry no gate and never affect the verdict",
        "normal-form eigenvalue records are skipped at points with a degenerate analytic spectrum",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_config(suites: Vec<Suite>) -> RunConfig {
        RunConfig {
            metric: "flat".into(),
            params: ParameterRecord::defaults("flat", 2, false),
            suites,
            points: 3,
            seed: 11,
            ..RunConfig::default()
        }
    }

    #[test]
    fn empty_suite_list_is_rejected() {
        let err = run(&flat_config(vec![])).unwrap_err();
        assert!(err.is_config_like(), "{err}");
    }

    #[test]
    fn unknown_metric_is_rejected() {
        let mut config = flat_config(vec![Suite::Cky]);
        config.metric = "torus".into();
        let err = run(&config).unwrap_err();
        assert!(err.is_config_like(), "{err}");
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let mut config = flat_config(vec![Suite::Cky]);
        config.tolerance = 0.0;
        assert!(run(&config).unwrap_err().is_config_like());
        config.tolerance = f64::NAN;
        assert!(run(&config).unwrap_err().is_config_like());
    }

    #[test]
    fn inapplicable_suite_is_a_config_error() {
        let mut config = flat_config(vec![Suite::Hamiltonian]);
        config.metric = "kerr_nut_ads".into();
        config.params = ParameterRecord::defaults("kerr_nut_ads", 2, false);
        let err = run(&config).unwrap_err();
        assert!(err.is_config_like(), "{err}");
        assert!(err.to_string().contains("hamiltonian"), "{err}");
    }

    #[test]
    fn flat_family_passes_and_reports_are_byte_identical() {
        let config = flat_config(vec![Suite::Cky, Suite::Foliation, Suite::Spin]);
        let first = run(&config).unwrap();
        assert!(first.overall_pass(), "{:#?}", first.summary);
        // per point: one candidate residual, two checks per plane selector,
        // and the parallel check per selector (no curvature records without
        // eigenvalue functions)
        assert_eq!(first.records.len(), 3 * (1 + 2 * 4 + 4));
        let second = run(&config).unwrap();
        assert_eq!(first.to_json().unwrap(), second.to_json().unwrap());
    }

    #[test]
    fn records_stay_ordered_by_point_index() {
        let config = flat_config(vec![Suite::Cky, Suite::Foliation]);
        let report = run(&config).unwrap();
        let order: Vec<usize> = report.records.iter().map(|r| r.point).collect();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(order, sorted);
    }

    #[test]
    fn summary_maxima_agree_with_the_records() {
        let config = flat_config(vec![Suite::Cky, Suite::Foliation, Suite::Spin]);
        let report = run(&config).unwrap();
        for (check, max) in &report.summary.max_residual {
            let recomputed = report
                .records
                .iter()
                .filter(|r| &r.check == check)
                .map(|r| r.residual)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(*max, recomputed, "{check}");
        }
        assert_eq!(
            report.summary.overall_pass,
            report.records.iter().all(|r| r.pass)
        );
    }

    #[test]
    fn tolerance_override_flips_a_passing_check() {
        let mut config = flat_config(vec![Suite::Cky]);
        config
            .tolerance_overrides
            .insert("cky_residual".into(), 1e-300);
        let report = run(&config).unwrap();
        assert!(!report.overall_pass());
        let rec = report
            .records
            .iter()
            .find(|r| r.check == "cky_residual")
            .unwrap();
        assert_eq!(rec.tolerance, Some(1e-300));
        assert!(!rec.pass);
    }

    #[test]
    fn negative_candidate_passes_by_staying_above_the_floor() {
        let config = RunConfig {
            metric: "lmp5".into(),
            params: ParameterRecord::defaults("lmp5", 2, true),
            suites: vec![Suite::Cky],
            points: 2,
            seed: 5,
            ..RunConfig::default()
        };
        let report = run(&config).unwrap();
        assert!(report.overall_pass(), "{:#?}", report.summary);
        let floor_checks: Vec<&CheckRecord> = report
            .records
            .iter()
            .filter(|r| r.check == "cky_negative_floor")
            .collect();
        assert_eq!(floor_checks.len(), 2);
        for rec in floor_checks {
            assert_eq!(rec.gate, Gate::Above);
            assert!(rec.residual >= 1e-3);
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("curvature".parse::<Suite>().is_err());
        let json = serde_json::to_string(&Suite::Hamiltonian).unwrap();
        assert_eq!(json, "\"hamiltonian\"");
    }

    #[test]
    fn config_serializes_with_flat_field_names() {
        let config = flat_config(vec![Suite::Cky]);
        let json = serde_json::to_string(&config).unwrap();
        for key in [
            "\"metric\"",
            "\"params\"",
            "\"suites\"",
            "\"points\"",
            "\"seed\"",
            "\"tolerance\"",
            "\"negative_floor\"",
            "\"tolerance_overrides\"",
            "\"out\"",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }
}
