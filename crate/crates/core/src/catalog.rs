//! Catalog of concrete metrics with their null frames, candidate 2-forms,
//! parameter records and sampling boxes. Every model carries enough data
//! for the verification suites: the metric field, the pinned-order null
//! coframe, optional candidate forms with their expected eigenvalue
//! functions, guard functions protecting coordinate singularities, and
//! closed-form commutator references where the source supplies them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::exterior::{index_rank, multi_indices, FormField, PForm};
use crate::geometry::{FrameBundle, FrameField, MetricAtPoint, MetricField};
use crate::jet::{Jet2, Point, ScalarField};
use crate::C64;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
const I: C64 = C64::new(0.0, 1.0);

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Uniform sampling box, one closed interval per coordinate.
#[derive(Clone, Debug)]
pub struct SamplingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        SamplingBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Named margin function: sampling rejects points where the margin drops
/// below the floor.
pub struct Guard {
    pub name: String,
    pub margin: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Guard {
    fn new(name: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Guard {
            name: name.into(),
            margin: Box::new(f),
        }
    }
}

/// Expected frame bracket: [E_a, E_b] = sum_c coeffs[c] E_c.
#[derive(Clone, Debug)]
pub struct ExpectedCommutator {
    pub a: usize,
    pub b: usize,
    pub coeffs: Vec<C64>,
}

/// Closed-form commutator coefficients evaluated per point.
pub type CommutatorRef =
    Box<dyn Fn(&Point) -> Result<Vec<ExpectedCommutator>, CoreError> + Send + Sync>;

/// One catalog entry: everything the suites need to verify a metric.
pub struct MetricModel {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub odd: bool,
    pub metric: MetricField,
    /// Null coframe in the pinned leg order: m down rows, m up rows, then
    /// the unit row in odd dimensions.
    pub frame: FrameField,
    /// Candidate conformal Killing-Yano 2-form in coordinate components.
    pub cky: Option<FormField>,
    /// True when the candidate is closed, so d phi = 0 is also gated.
    pub closed_cky: bool,
    /// Expected eigenvalue functions of the candidate, one per plane.
    pub eigenvalues: Option<Vec<ScalarField>>,
    /// Hamiltonian 2-form candidate with its eigenvalue functions.
    pub hamiltonian: Option<FormField>,
    pub hamiltonian_eigenvalues: Option<Vec<ScalarField>>,
    /// Symplectic form of a Kaehler model.
    pub kahler: Option<FormField>,
    /// Candidate that must FAIL the residual test, with its eigenvalues.
    pub negative_cky: Option<FormField>,
    pub negative_eigenvalues: Option<Vec<ScalarField>>,
    /// Extra forms reported informationally, never gated.
    pub informational: Vec<(String, FormField)>,
    pub sampling: SamplingBox,
    pub guards: Vec<Guard>,
    pub commutators: Option<CommutatorRef>,
    /// Convention notes echoed into reports.
    pub notes: Vec<String>,
    pub params: ParameterRecord,
}

impl MetricModel {
    /// Metric and frame data at one point.
    pub fn at_point(&self, pt: &Point) -> Result<(MetricAtPoint, FrameBundle), CoreError> {
        let ma = self.metric.eval(pt)?;
        let fb = self.frame.eval(&ma.g, pt)?;
        Ok((ma, fb))
    }

    /// Candidate eigenvalue jets at one point.
    pub fn eigenvalue_jets(&self, pt: &Point) -> Result<Vec<Jet2>, CoreError> {
        match &self.eigenvalues {
            Some(fields) => fields.iter().map(|f| f.eval(pt)).collect(),
            None => Err(CoreError::Unsupported(format!(
                "model {} has no eigenvalue functions",
                self.id
            ))),
        }
    }

    /// Construction self-check: how far the frame is from null duality and
    /// how well the coframe reconstructs the metric.
    pub fn self_check(&self, pt: &Point) -> Result<SelfCheck, CoreError> {
        let (ma, fb) = self.at_point(pt)?;
        let frame = &fb.frame;
        let gram = crate::exterior::FrameAtPoint::canonical_pairing(self.m, self.odd);
        let n = self.n;
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        if gram[[a, b]].norm() == 0.0 {
                            continue;
                        }
                        acc += gram[[a, b]]
                            * frame.coframe[a][i]
                            * frame.coframe[b][j];
                    }
                }
                worst = worst.max((acc - ma.g[[i, j]]).norm());
                scale = scale.max(ma.g[[i, j]].norm());
            }
        }
        Ok(SelfCheck {
            pairing: frame.pairing_residual(),
            reconstruction: worst / scale.max(1e-30),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SelfCheck {
    pub pairing: f64,
    pub reconstruction: f64,
}

/// Serializable parameter record shared by every family. Empty vectors
/// mean "use the documented defaults".
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ParameterRecord {
    pub m: usize,
    pub odd: bool,
    /// Rotation constants a_k.
    pub rotation: Vec<f64>,
    /// Mass and NUT parameters, real and imaginary parts.
    pub mass: Vec<f64>,
    pub mass_im: Vec<f64>,
    /// Curvature-scale constant whose square sets the cosmological term.
    pub cosmological: f64,
    /// Overall constant of the five-dimensional model.
    pub lmp_a0: f64,
    /// Quartic coefficients, ascending degree.
    pub lmp_x: Vec<f64>,
    pub lmp_y: Vec<f64>,
    /// Orthotoric polynomial coefficients, ascending, one row per plane.
    pub theta: Vec<Vec<f64>>,
    /// Flat-space signature diagonal.
    pub signature: Vec<f64>,
    /// Seed for the flat family constants.
    pub flat_seed: u64,
}

impl Default for ParameterRecord {
    fn default() -> Self {
        ParameterRecord {
            m: 2,
            odd: false,
            rotation: vec![],
            mass: vec![],
            mass_im: vec![],
            cosmological: 2.0,
            lmp_a0: 1.3,
            lmp_x: vec![],
            lmp_y: vec![],
            theta: vec![],
            signature: vec![],
            flat_seed: 7,
        }
    }
}

impl ParameterRecord {
    /// Documented defaults for a family at a given size.
    pub fn defaults(id: &str, m: usize, odd: bool) -> Self {
        let mut p = ParameterRecord {
            m,
            odd,
            ..Default::default()
        };
        match id {
            "kerr_nut_ads" => {
                let eps = usize::from(odd);
                p.rotation = (0..m - 1 + eps).map(|k| 0.925 + 0.45 * k as f64).collect();
                p.mass = (0..m)
                    .map(|mu| 0.05 + 0.10 * mu as f64 / (m.max(2) - 1) as f64)
                    .collect();
            }
            "lmp5" => {
                p.m = 2;
                p.odd = true;
                p.lmp_x = default_quartic();
                p.lmp_y = default_quartic();
            }
            "orthotoric" => {
                p.theta = default_theta(m);
            }
            "flat" => {
                p.signature = vec![1.0; 2 * m + usize::from(odd)];
            }
            _ => {}
        }
        p
    }

    /// Defaults with masses drawn uniformly from the generic window.
    pub fn kna_random(m: usize, odd: bool, seed: u64) -> Self {
        let mut p = Self::defaults("kerr_nut_ads", m, odd);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        p.mass = (0..m).map(|_| rng.gen_range(0.05..0.15)).collect();
        p
    }

    fn masses(&self) -> Vec<C64> {
        (0..self.m)
            .map(|mu| {
                C64::new(
                    self.mass.get(mu).copied().unwrap_or(0.0),
                    self.mass_im.get(mu).copied().unwrap_or(0.0),
                )
            })
            .collect()
    }
}

/// The sign-changing quartic used by default: one root below the sampling
/// window of x and above the window of y, so X stays positive and Y stays
/// negative on the box while the real coframe stays real.
fn default_quartic() -> Vec<f64> {
    // (t - 0.45)(1 + 0.3 t + 0.2 t^2 + 0.1 t^3) expanded, ascending
    vec![
        -0.45,
        1.0 - 0.45 * 0.3,
        0.3 - 0.45 * 0.2,
        0.2 - 0.45 * 0.1,
        0.1,
    ]
}

fn default_theta(m: usize) -> Vec<Vec<f64>> {
    let bank: Vec<Vec<f64>> = vec![
        vec![1.1, 0.4, 0.3, 0.12],
        vec![-0.9, 0.2, -0.25, -0.08],
        vec![1.3, 0.1, -0.15, 0.05, 0.02],
        vec![0.7, 0.15, 0.1, 0.03],
    ];
    (0..m).map(|mu| bank[mu % bank.len()].clone()).collect()
}

/// Dispatch a family id to its builder, filling defaults for empty fields.
pub fn build(id: &str, params: &ParameterRecord) -> Result<MetricModel, CoreError> {
    match id {
        "kerr_nut_ads" => build_kerr_nut_ads(params),
        "lmp5" => build_lmp5(params),
        "orthotoric" => build_orthotoric(params),
        "flat" => build_flat(params),
        other => Err(CoreError::Config(format!("unknown metric id '{other}'"))),
    }
}

pub fn known_ids() -> &'static [&'static str] {
    &["kerr_nut_ads", "lmp5", "orthotoric", "flat"]
}

/// Elementary symmetric polynomial of the given jets.
fn esym(vals: &[Jet2], k: usize, dim: usize) -> Jet2 {
    let one = Jet2::constant(dim, re(1.0));
    let zero = Jet2::constant(dim, re(0.0));
    let mut e: Vec<Jet2> = (0..=k)
        .map(|j| if j == 0 { one.clone() } else { zero.clone() })
        .collect();
    for v in vals {
        for j in (1..=k.min(vals.len())).rev() {
            e[j] = &e[j] + &(&e[j - 1] * v);
        }
    }
    e.swap_remove(k)
}

/// Polynomial with ascending real coefficients on a jet.
fn poly_jet(x: &Jet2, coeffs: &[f64], dim: usize) -> Jet2 {
    let mut acc = Jet2::constant(dim, re(0.0));
    for &c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

fn poly_val(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

// ---------------------------------------------------------------------------
// Kerr-NUT-(A)dS family
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct KnaCtx {
    n: usize,
    m: usize,
    eps: usize,
    a: Vec<f64>,
    mass: Vec<C64>,
    gg: f64,
}

impl KnaCtx {
    /// X_mu(x_mu): the radial polynomial of one plane.
    fn x_poly(&self, coords: &[Jet2], mu: usize) -> Jet2 {
        let x = &coords[mu];
        let x2 = x * x;
        let mut prod = Jet2::constant(self.n, re(1.0));
        for k in 0..(self.m - 1 + self.eps) {
            prod = &prod * &(-(&(&x2 - self.a[k] * self.a[k])));
        }
        let lead = &(&x2 * (self.gg * self.gg) - 1.0) * &prod;
        if self.eps == 0 {
            // (g^2 x^2 - 1) prod - 2 M x
            &lead + &x.scale(self.mass[mu] * re(-2.0))
        } else {
            // -(g^2 x^2 - 1) prod / x^2 + 2 M
            &(-(&(&lead / &x2))) + &Jet2::constant(self.n, self.mass[mu] * re(2.0))
        }
    }

    /// U_mu: the Vandermonde-type separation factor.
    fn u_poly(&self, coords: &[Jet2], mu: usize) -> Jet2 {
        let x2mu = &coords[mu] * &coords[mu];
        let mut prod = Jet2::constant(self.n, re(1.0));
        for nu in 0..self.m {
            if nu == mu {
                continue;
            }
            prod = &prod * &(&(&coords[nu] * &coords[nu]) - &x2mu);
        }
        prod
    }

    /// Elementary symmetric function of the squares, omitting one plane.
    fn a_mu(&self, coords: &[Jet2], mu: usize, k: usize) -> Jet2 {
        let sq: Vec<Jet2> = (0..self.m)
            .filter(|&nu| nu != mu)
            .map(|nu| &coords[nu] * &coords[nu])
            .collect();
        esym(&sq, k, self.n)
    }

    /// Elementary symmetric function of all squares.
    fn a_all(&self, coords: &[Jet2], k: usize) -> Jet2 {
        let sq: Vec<Jet2> = (0..self.m).map(|nu| &coords[nu] * &coords[nu]).collect();
        esym(&sq, k, self.n)
    }

    fn c_const(&self) -> f64 {
        self.a.iter().map(|a| a * a).product()
    }
}

/// Kerr-NUT-(A)dS in 2m (+1) dimensions. Coordinates are the m radial
/// variables followed by the m (+1) angular variables.
pub fn build_kerr_nut_ads(params: &ParameterRecord) -> Result<MetricModel, CoreError> {
    let m = params.m;
    let eps = usize::from(params.odd);
    if m < 2 || m > 5 {
        return Err(CoreError::Config(format!(
            "kerr_nut_ads supports 2 <= m <= 5, got {m}"
        )));
    }
    let mut params = params.clone();
    let defaults = ParameterRecord::defaults("kerr_nut_ads", m, params.odd);
    if params.rotation.is_empty() {
        params.rotation = defaults.rotation.clone();
    }
    if params.mass.is_empty() {
        params.mass = defaults.mass.clone();
    }
    if params.rotation.len() != m - 1 + eps {
        return Err(CoreError::Config(format!(
            "kerr_nut_ads with m={m}, odd={} needs {} rotation constants, got {}",
            params.odd,
            m - 1 + eps,
            params.rotation.len()
        )));
    }
    if params.mass.len() != m {
        return Err(CoreError::Config(format!(
            "kerr_nut_ads needs {m} mass parameters, got {}",
            params.mass.len()
        )));
    }
    let n = 2 * m + eps;
    let ctx = KnaCtx {
        n,
        m,
        eps,
        a: params.rotation.clone(),
        mass: params.masses(),
        gg: params.cosmological,
    };

    // metric grid
    let mut grid = vec![vec![ScalarField::zero(n); n]; n];
    for mu in 0..m {
        let c = ctx.clone();
        grid[mu][mu] = ScalarField::from_jets(n, move |q| {
            &c.u_poly(q, mu) / &c.x_poly(q, mu)
        });
    }
    for k in 0..(m + eps) {
        for l in k..(m + eps) {
            let c = ctx.clone();
            let f = ScalarField::from_jets(n, move |q| {
                let mut acc = Jet2::constant(c.n, re(0.0));
                for mu in 0..c.m {
                    let term = &(&c.x_poly(q, mu) / &c.u_poly(q, mu))
                        * &(&c.a_mu(q, mu, k) * &c.a_mu(q, mu, l));
                    acc = &acc + &term;
                }
                if c.eps == 1 {
                    let odd = &(&c.a_all(q, k) * &c.a_all(q, l)).scale(re(-c.c_const()))
                        / &c.a_all(q, c.m);
                    acc = &acc + &odd;
                }
                acc
            });
            grid[m + k][m + l] = f.clone();
            if l != k {
                grid[m + l][m + k] = f;
            }
        }
    }
    let metric = MetricField::new(n, grid)?;

    // null coframe rows in pinned order
    let mut rows: Vec<Vec<ScalarField>> = Vec::with_capacity(n);
    for up in [false, true] {
        for mu in 0..m {
            let mut row = vec![ScalarField::zero(n); n];
            let c = ctx.clone();
            row[mu] = ScalarField::from_jets(n, move |q| {
                (&c.u_poly(q, mu) / &c.x_poly(q, mu)).sqrt().scale(re(SQRT_HALF))
            });
            for k in 0..m {
                let c = ctx.clone();
                let phase = if up { -I } else { I } * re(SQRT_HALF);
                // the reciprocal of the same root keeps the plane oriented
                // with the rational candidate; an independent sqrt of the
                // inverted ratio can land on the opposite branch when the
                // ratio is negative
                row[m + k] = ScalarField::from_jets(n, move |q| {
                    let root = (&c.u_poly(q, mu) / &c.x_poly(q, mu)).sqrt();
                    (&(&c.a_mu(q, mu, k) / &root)).scale(phase)
                });
            }
            rows.push(row);
        }
    }
    if eps == 1 {
        let mut row = vec![ScalarField::zero(n); n];
        for k in 0..=m {
            let c = ctx.clone();
            row[m + k] = ScalarField::from_jets(n, move |q| {
                let factor = (&Jet2::constant(c.n, re(-c.c_const())) / &c.a_all(q, c.m)).sqrt();
                &factor * &c.a_all(q, k)
            });
        }
        rows.push(row);
    }
    let frame = FrameField::new(m, eps == 1, rows)?;

    // closed candidate phi = sum x_mu e^mu ^ e^{m+mu}, rational components
    let mut comps = vec![ScalarField::zero(n); multi_indices(n, 2).len()];
    for mu in 0..m {
        for k in 0..m {
            let c = ctx.clone();
            comps[index_rank(n, &[mu, m + k])] =
                ScalarField::from_jets(n, move |q| &q[mu] * &c.a_mu(q, mu, k));
        }
    }
    let cky = FormField::new(n, 2, comps)?;
    let eigenvalues: Vec<ScalarField> = (0..m)
        .map(|mu| ScalarField::from_jets(n, move |q| q[mu].scale(I)))
        .collect();

    // guards: radial separation, radial polynomial, coordinate origin
    let mut guards = vec![];
    {
        let mm = m;
        guards.push(Guard::new("radial_separation", move |c| {
            let mut worst = f64::INFINITY;
            for mu in 0..mm {
                for nu in (mu + 1)..mm {
                    worst = worst.min((c[mu] * c[mu] - c[nu] * c[nu]).abs());
                }
            }
            worst
        }));
    }
    {
        let c = ctx.clone();
        guards.push(Guard::new("radial_polynomial", move |coords| {
            let jets: Vec<Jet2> = coords
                .iter()
                .map(|&v| Jet2::constant(c.n, re(v)))
                .collect();
            (0..c.m)
                .map(|mu| c.x_poly(&jets, mu).value.norm())
                .fold(f64::INFINITY, f64::min)
        }));
    }
    if eps == 1 {
        let mm = m;
        guards.push(Guard::new("radial_origin", move |c| {
            (0..mm).map(|mu| c[mu].abs()).fold(f64::INFINITY, f64::min)
        }));
    }

    let mut lo: Vec<f64> = (0..m).map(|mu| 0.55 + 0.45 * mu as f64).collect();
    let mut hi: Vec<f64> = (0..m).map(|mu| 0.85 + 0.45 * mu as f64).collect();
    lo.extend(std::iter::repeat(0.0).take(m + eps));
    hi.extend(std::iter::repeat(1.0).take(m + eps));

    let commutators = if eps == 0 {
        let c = ctx.clone();
        let f = move |pt: &Point| -> Result<Vec<ExpectedCommutator>, CoreError> {
            kna_commutators(&c, pt)
        };
        Some(Box::new(f) as CommutatorRef)
    } else {
        None
    };

    Ok(MetricModel {
        id: "kerr_nut_ads".into(),
        n,
        m,
        odd: eps == 1,
        metric,
        frame,
        cky: Some(cky),
        closed_cky: true,
        eigenvalues: Some(eigenvalues),
        hamiltonian: None,
        hamiltonian_eigenvalues: None,
        kahler: None,
        negative_cky: None,
        negative_eigenvalues: None,
        informational: vec![],
        sampling: SamplingBox::new(lo, hi),
        guards,
        commutators,
        notes: vec![
            "square roots take the principal branch; frames are complex where the radial polynomial is negative".into(),
            "frame legs: m plane rows, m conjugate-plane rows, then the unit row in odd dimensions".into(),
        ],
        params,
    })
}

/// Closed-form bracket coefficients of the even family: every pair of
/// frame legs, coefficients expanded from the four displayed cases.
fn kna_commutators(ctx: &KnaCtx, pt: &Point) -> Result<Vec<ExpectedCommutator>, CoreError> {
    let n = ctx.n;
    let m = ctx.m;
    let coords: Vec<Jet2> = (0..n)
        .map(|k| Jet2::coordinate(n, k, pt.coords[k]))
        .collect();
    // sqrt(Q_mu) jets carry the derivative needed by the diagonal case
    let mut sq = Vec::with_capacity(m);
    for mu in 0..m {
        let q = &ctx.x_poly(&coords, mu) / &ctx.u_poly(&coords, mu);
        let s = q.sqrt();
        if s.singular || !s.is_finite() {
            return Err(CoreError::SingularEvaluation {
                what: "frame factor in bracket reference".into(),
                point: pt.coords.clone(),
            });
        }
        sq.push(s);
    }
    let x = |mu: usize| coords[mu].value;
    let s = re(SQRT_HALF);
    // off-diagonal coefficient: s * x_q sqrt(Q_q) / (x_q^2 - x_p^2)
    let off = |q: usize, p: usize| s * x(q) * sq[q].value / (x(q) * x(q) - x(p) * x(p));
    let mut out = Vec::new();
    for p in 0..m {
        for q in (p + 1)..m {
            let mut coeffs = vec![C64::new(0.0, 0.0); n];
            coeffs[p] = off(q, p);
            coeffs[q] = -off(p, q);
            out.push(ExpectedCommutator { a: p, b: q, coeffs: coeffs.clone() });
            let mut up = vec![C64::new(0.0, 0.0); n];
            up[m + p] = coeffs[p];
            up[m + q] = coeffs[q];
            out.push(ExpectedCommutator { a: m + p, b: m + q, coeffs: up });
            // mixed pairs with distinct planes
            let mut pm = vec![C64::new(0.0, 0.0); n];
            pm[p] = off(q, p);
            pm[m + q] = -off(p, q);
            out.push(ExpectedCommutator { a: p, b: m + q, coeffs: pm });
            let mut mp = vec![C64::new(0.0, 0.0); n];
            mp[q] = off(p, q);
            mp[m + p] = -off(q, p);
            out.push(ExpectedCommutator { a: q, b: m + p, coeffs: mp });
        }
        // dual pair of one plane
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        let dsq = sq[p].grad[p];
        coeffs[p] = s * dsq;
        coeffs[m + p] = -s * dsq;
        for q in 0..m {
            if q == p {
                continue;
            }
            let v = re(2.0) * s * x(p) * sq[q].value / (x(q) * x(q) - x(p) * x(p));
            coeffs[q] = v;
            coeffs[m + q] = -v;
        }
        out.push(ExpectedCommutator { a: p, b: m + p, coeffs });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The five-dimensional black hole of Lu, Mei and Pope
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct LmpCtx {
    a0: f64,
    qx: Vec<f64>,
    qy: Vec<f64>,
}

const LMP_N: usize = 5;

impl LmpCtx {
    /// Real orthonormal coframe rows as jets, one row per frame index.
    fn real_coframe(&self, q: &[Jet2]) -> [Vec<Jet2>; 5] {
        let n = LMP_N;
        let zero = || Jet2::constant(n, re(0.0));
        let x = &q[0];
        let y = &q[1];
        let xy = x * y;
        let one_m = -(&(&xy - 1.0)); // 1 - xy
        let xmy = x - y;
        let bigx = poly_jet(x, &self.qx, n);
        let bigy = poly_jet(y, &self.qy, n);
        // e^0 coefficients on phi, psi, t
        let s0 = (&Jet2::constant(n, re(self.a0)) / &xy).sqrt();
        let e0 = vec![
            zero(),
            zero(),
            s0.clone(),
            &s0 * &(x + y),
            &s0 * &xy,
        ];
        // e^1 along dx, e^2 along dy
        let e1c = &(&xmy / &bigx).sqrt() / &(&one_m * 2.0);
        let e1 = vec![e1c, zero(), zero(), zero(), zero()];
        let e2c = &(&(-(&xmy)) / &bigy).sqrt() / &(&one_m * 2.0);
        let e2 = vec![zero(), e2c, zero(), zero(), zero()];
        // e^3 and e^4 mix phi and psi
        let w3 = &(&bigx / &(x * &xmy)).sqrt() / &one_m;
        let e3 = vec![zero(), zero(), w3.clone(), &w3 * y, zero()];
        let w4 = &(&bigy / &(y * &(-(&xmy)))).sqrt() / &one_m;
        let e4 = vec![zero(), zero(), w4.clone(), &w4 * x, zero()];
        [e0, e1, e2, e3, e4]
    }
}

/// Five-dimensional black hole metric with coordinates (x, y, phi, psi, t).
pub fn build_lmp5(params: &ParameterRecord) -> Result<MetricModel, CoreError> {
    let mut params = params.clone();
    params.m = 2;
    params.odd = true;
    if params.lmp_x.is_empty() {
        params.lmp_x = default_quartic();
    }
    if params.lmp_y.is_empty() {
        params.lmp_y = default_quartic();
    }
    if params.lmp_x.len() != 5 || params.lmp_y.len() != 5 {
        return Err(CoreError::Config(
            "lmp5 quartics need 5 ascending coefficients each".into(),
        ));
    }
    if params.lmp_a0 <= 0.0 {
        return Err(CoreError::Config("lmp5 constant a0 must be positive".into()));
    }
    let n = LMP_N;
    let ctx = LmpCtx {
        a0: params.lmp_a0,
        qx: params.lmp_x.clone(),
        qy: params.lmp_y.clone(),
    };

    // metric from the orthonormal rows
    let mut grid = vec![vec![ScalarField::zero(n); n]; n];
    for i in 0..n {
        for j in i..n {
            let c = ctx.clone();
            let f = ScalarField::from_jets(n, move |q| {
                let rows = c.real_coframe(q);
                let mut acc = Jet2::constant(LMP_N, re(0.0));
                for row in &rows {
                    acc = &acc + &(&row[i] * &row[j]);
                }
                acc
            });
            grid[i][j] = f.clone();
            if j != i {
                grid[j][i] = f;
            }
        }
    }
    let metric = MetricField::new(n, grid)?;

    // null rows: plane 1 pairs e^1 with e^3, plane 2 pairs e^2 with e^4
    let row_field = |plane: usize, up: bool| -> Vec<ScalarField> {
        (0..n)
            .map(|slot| {
                let c = ctx.clone();
                ScalarField::from_jets(n, move |q| {
                    let rows = c.real_coframe(q);
                    let (re_row, im_row) = if plane == 0 { (1, 3) } else { (2, 4) };
                    let phase = if up { -I } else { I } * re(SQRT_HALF);
                    &rows[re_row][slot].scale(re(SQRT_HALF)) + &rows[im_row][slot].scale(phase)
                })
            })
            .collect()
    };
    let mut rows = vec![
        row_field(0, false),
        row_field(1, false),
        row_field(0, true),
        row_field(1, true),
    ];
    rows.push(
        (0..n)
            .map(|slot| {
                let c = ctx.clone();
                ScalarField::from_jets(n, move |q| c.real_coframe(q)[0][slot].clone())
            })
            .collect(),
    );
    let frame = FrameField::new(2, true, rows)?;

    // the candidate that must fail: eigenvalues sqrt(x), sqrt(y)
    let mut neg = vec![ScalarField::zero(n); multi_indices(n, 2).len()];
    let cfac = |q: &[Jet2]| {
        let one_m = -(&(&(&q[0] * &q[1]) - 1.0));
        (&Jet2::constant(LMP_N, re(1.0)) / &(&(&one_m * &one_m) * 2.0)).scale(-I)
    };
    neg[index_rank(n, &[0, 2])] = ScalarField::from_jets(n, move |q| cfac(q));
    neg[index_rank(n, &[0, 3])] = ScalarField::from_jets(n, move |q| &cfac(q) * &q[1]);
    neg[index_rank(n, &[1, 2])] = ScalarField::from_jets(n, move |q| cfac(q));
    neg[index_rank(n, &[1, 3])] = ScalarField::from_jets(n, move |q| &cfac(q) * &q[0]);
    let negative_cky = FormField::new(n, 2, neg)?;
    let negative_eigenvalues = vec![
        ScalarField::from_jets(n, |q| q[0].sqrt()),
        ScalarField::from_jets(n, |q| q[1].sqrt()),
    ];

    // informational: the four-dimensional sub-block candidate
    let mut info = vec![ScalarField::zero(n); multi_indices(n, 2).len()];
    let wfac = |q: &[Jet2]| {
        let one_m = -(&(&(&q[0] * &q[1]) - 1.0));
        &Jet2::constant(LMP_N, re(0.5)) / &(&(&one_m * &one_m) * &one_m)
    };
    info[index_rank(n, &[0, 2])] = ScalarField::from_jets(n, move |q| wfac(q));
    info[index_rank(n, &[0, 3])] = ScalarField::from_jets(n, move |q| &wfac(q) * &q[1]);
    info[index_rank(n, &[1, 2])] = ScalarField::from_jets(n, move |q| wfac(q));
    info[index_rank(n, &[1, 3])] = ScalarField::from_jets(n, move |q| &wfac(q) * &q[0]);
    let informational = vec![(
        "four_dimensional_subblock_candidate".to_string(),
        FormField::new(n, 2, info)?,
    )];

    let guards = vec![
        Guard::new("coordinate_separation", |c| (c[0] - c[1]).abs()),
        Guard::new("conformal_factor", |c| (1.0 - c[0] * c[1]).abs()),
        Guard::new("coordinate_origin", |c| c[0].abs().min(c[1].abs())),
        {
            let qx = ctx.qx.clone();
            let qy = ctx.qy.clone();
            Guard::new("quartic_zero", move |c| {
                poly_val(c[0], &qx).abs().min(poly_val(c[1], &qy).abs())
            })
        },
    ];

    let cref = {
        let c = ctx.clone();
        Some(Box::new(move |pt: &Point| lmp_commutators(&c, pt)) as CommutatorRef)
    };

    Ok(MetricModel {
        id: "lmp5".into(),
        n,
        m: 2,
        odd: true,
        metric,
        frame,
        cky: None,
        closed_cky: false,
        eigenvalues: None,
        hamiltonian: None,
        hamiltonian_eigenvalues: None,
        kahler: None,
        negative_cky: Some(negative_cky),
        negative_eigenvalues: Some(negative_eigenvalues),
        informational,
        sampling: SamplingBox::new(
            vec![0.55, 0.2, 0.0, 0.0, 0.0],
            vec![0.7, 0.35, 1.0, 1.0, 1.0],
        ),
        guards,
        commutators: cref,
        notes: vec![
            "the default quartic changes sign between the two coordinate windows, keeping the orthonormal rows real".into(),
            "the normal-form candidate with eigenvalues sqrt(x), sqrt(y) is attached as a negative check".into(),
        ],
        params,
    })
}

/// All ten bracket references of the five-dimensional model, expanded from
/// the four displayed cases by conjugation and the plane swap.
fn lmp_commutators(ctx: &LmpCtx, pt: &Point) -> Result<Vec<ExpectedCommutator>, CoreError> {
    let n = LMP_N;
    let q: Vec<Jet2> = (0..n)
        .map(|k| Jet2::coordinate(n, k, pt.coords[k]))
        .collect();
    let x = &q[0];
    let y = &q[1];
    let xy = x * y;
    let one_m = -(&(&xy - 1.0));
    let xmy = x - y;
    let bigx = poly_jet(x, &ctx.qx, n);
    let bigy = poly_jet(y, &ctx.qy, n);
    let rx = (&bigx / &xmy).sqrt();
    let ry = (&bigy / &(-(&xmy))).sqrt();
    for j in [&rx, &ry] {
        if j.singular || !j.is_finite() {
            return Err(CoreError::SingularEvaluation {
                what: "frame factor in bracket reference".into(),
                point: pt.coords.clone(),
            });
        }
    }
    let s = re(SQRT_HALF);
    let xv = x.value;
    let yv = y.value;
    let omv = one_m.value;
    // ca on the first plane, cb on the second; the swap exchanges them
    let ca = s * ry.value * (-2.0 * xv * xv + xv * yv + 1.0) / (xv - yv);
    let cb = s * rx.value * (-2.0 * yv * yv + xv * yv + 1.0) / (yv - xv);
    // diagonal data of plane 1
    let h1 = &one_m * &rx;
    let beta1 = s * (2.0 * h1.grad[0] - rx.value * (1.0 - 5.0 * xv * yv) / xv);
    let gamma1 = s * ry.value * (xv / yv).sqrt() * 2.0 * omv / (xv - yv);
    let delta1 = 2.0 * (ctx.a0 / (xv * yv)).sqrt() * omv * omv / xv.sqrt();
    // swapped data of plane 2
    let h2 = &one_m * &ry;
    let beta2 = s * (2.0 * h2.grad[1] - ry.value * (1.0 - 5.0 * xv * yv) / yv);
    let gamma2 = s * rx.value * (yv / xv).sqrt() * 2.0 * omv / (yv - xv);
    let delta2 = 2.0 * (ctx.a0 / (xv * yv)).sqrt() * omv * omv / yv.sqrt();
    // unit-leg coefficients
    let k1 = s * (omv / xv) * rx.value;
    let k2 = s * (omv / yv) * ry.value;

    let zero = || vec![C64::new(0.0, 0.0); n];
    let mut out = Vec::new();
    let mut push = |a: usize, b: usize, coeffs: Vec<C64>| {
        out.push(ExpectedCommutator { a, b, coeffs });
    };
    // plane-plane pairs
    let mut c01 = zero();
    c01[0] = -ca;
    c01[1] = cb;
    push(0, 1, c01);
    let mut c03 = zero();
    c03[0] = -ca;
    c03[3] = cb;
    push(0, 3, c03);
    let mut c12 = zero();
    c12[1] = -cb;
    c12[2] = ca;
    push(1, 2, c12);
    let mut c23 = zero();
    c23[2] = -ca;
    c23[3] = cb;
    push(2, 3, c23);
    // dual pairs
    let mut c02 = zero();
    c02[0] = beta1;
    c02[2] = -beta1;
    c02[1] = -gamma1;
    c02[3] = gamma1;
    c02[4] = I * delta1;
    push(0, 2, c02);
    let mut c13 = zero();
    c13[1] = beta2;
    c13[3] = -beta2;
    c13[0] = -gamma2;
    c13[2] = gamma2;
    c13[4] = I * delta2;
    push(1, 3, c13);
    // unit-leg pairs
    let mut c04 = zero();
    c04[4] = -k1;
    push(0, 4, c04);
    let mut c14 = zero();
    c14[4] = -k2;
    push(1, 4, c14);
    let mut c24 = zero();
    c24[4] = -k1;
    push(2, 4, c24);
    let mut c34 = zero();
    c34[4] = -k2;
    push(3, 4, c34);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Orthotoric Kaehler family
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct OrthoCtx {
    n: usize,
    m: usize,
    theta: Vec<Vec<f64>>,
}

impl OrthoCtx {
    fn delta(&self, q: &[Jet2], mu: usize) -> Jet2 {
        let mut prod = Jet2::constant(self.n, re(1.0));
        for nu in 0..self.m {
            if nu == mu {
                continue;
            }
            prod = &prod * &(&q[nu] - &q[mu]);
        }
        prod
    }

    fn theta_jet(&self, q: &[Jet2], mu: usize) -> Jet2 {
        poly_jet(&q[mu], &self.theta[mu], self.n)
    }

    /// Elementary symmetric function of the coordinates, omitting one.
    fn sig_mu(&self, q: &[Jet2], mu: usize, k: usize) -> Jet2 {
        let vals: Vec<Jet2> = (0..self.m)
            .filter(|&nu| nu != mu)
            .map(|nu| q[nu].clone())
            .collect();
        esym(&vals, k, self.n)
    }
}

/// Orthotoric Kaehler metric in 2m dimensions with coordinates
/// (xi_1..xi_m, t_1..t_m).
pub fn build_orthotoric(params: &ParameterRecord) -> Result<MetricModel, CoreError> {
    let m = params.m;
    if m < 2 || m > 4 {
        return Err(CoreError::Config(format!(
            "orthotoric supports 2 <= m <= 4, got {m}"
        )));
    }
    let mut params = params.clone();
    params.odd = false;
    if params.theta.is_empty() {
        params.theta = default_theta(m);
    }
    if params.theta.len() != m {
        return Err(CoreError::Config(format!(
            "orthotoric needs {m} polynomial rows, got {}",
            params.theta.len()
        )));
    }
    let n = 2 * m;
    let ctx = OrthoCtx {
        n,
        m,
        theta: params.theta.clone(),
    };

    let mut grid = vec![vec![ScalarField::zero(n); n]; n];
    for mu in 0..m {
        let c = ctx.clone();
        grid[mu][mu] =
            ScalarField::from_jets(n, move |q| &c.delta(q, mu) / &c.theta_jet(q, mu));
    }
    for k in 0..m {
        for l in k..m {
            let c = ctx.clone();
            let f = ScalarField::from_jets(n, move |q| {
                let mut acc = Jet2::constant(c.n, re(0.0));
                for mu in 0..c.m {
                    let term = &(&c.theta_jet(q, mu) / &c.delta(q, mu))
                        * &(&c.sig_mu(q, mu, k) * &c.sig_mu(q, mu, l));
                    acc = &acc + &term;
                }
                acc
            });
            grid[m + k][m + l] = f.clone();
            if l != k {
                grid[m + l][m + k] = f;
            }
        }
    }
    let metric = MetricField::new(n, grid)?;

    let mut rows: Vec<Vec<ScalarField>> = Vec::with_capacity(n);
    for up in [false, true] {
        for mu in 0..m {
            let mut row = vec![ScalarField::zero(n); n];
            let c = ctx.clone();
            row[mu] = ScalarField::from_jets(n, move |q| {
                (&c.delta(q, mu) / &c.theta_jet(q, mu)).sqrt().scale(re(SQRT_HALF))
            });
            for k in 0..m {
                let c = ctx.clone();
                let phase = if up { -I } else { I } * re(SQRT_HALF);
                row[m + k] = ScalarField::from_jets(n, move |q| {
                    (&(&c.theta_jet(q, mu) / &c.delta(q, mu)).sqrt() * &c.sig_mu(q, mu, k))
                        .scale(phase)
                });
            }
            rows.push(row);
        }
    }
    let frame = FrameField::new(m, false, rows)?;

    // Kaehler form, Hamiltonian candidate and the induced conformal
    // Killing candidate phi = psi - (sigma/2) omega, all rational
    let ranks = multi_indices(n, 2).len();
    let mut omega_c = vec![ScalarField::zero(n); ranks];
    let mut psi_c = vec![ScalarField::zero(n); ranks];
    let mut phi_c = vec![ScalarField::zero(n); ranks];
    for mu in 0..m {
        for k in 0..m {
            let rank = index_rank(n, &[mu, m + k]);
            let c = ctx.clone();
            omega_c[rank] = ScalarField::from_jets(n, move |q| c.sig_mu(q, mu, k));
            let c = ctx.clone();
            psi_c[rank] = ScalarField::from_jets(n, move |q| &q[mu] * &c.sig_mu(q, mu, k));
            let c = ctx.clone();
            phi_c[rank] = ScalarField::from_jets(n, move |q| {
                let mut half_trace = Jet2::constant(c.n, re(0.0));
                for nu in 0..c.m {
                    half_trace = &half_trace + &q[nu];
                }
                &(&q[mu] - &half_trace.scale(re(0.5))) * &c.sig_mu(q, mu, k)
            });
        }
    }
    let kahler = FormField::new(n, 2, omega_c)?;
    let hamiltonian = FormField::new(n, 2, psi_c)?;
    let cky = FormField::new(n, 2, phi_c)?;
    let ham_eigenvalues: Vec<ScalarField> = (0..m)
        .map(|mu| ScalarField::from_jets(n, move |q| q[mu].scale(I)))
        .collect();
    let eigenvalues: Vec<ScalarField> = (0..m)
        .map(move |mu| {
            ScalarField::from_jets(n, move |q| {
                let mut half_trace = Jet2::constant(q[0].grad.len(), re(0.0));
                for nu in 0..q.len() / 2 {
                    half_trace = &half_trace + &q[nu];
                }
                (&q[mu] - &half_trace.scale(re(0.5))).scale(I)
            })
        })
        .collect();

    let mut guards = vec![];
    {
        let mm = m;
        guards.push(Guard::new("coordinate_separation", move |c| {
            let mut worst = f64::INFINITY;
            for mu in 0..mm {
                for nu in (mu + 1)..mm {
                    worst = worst.min((c[mu] - c[nu]).abs());
                }
            }
            worst
        }));
    }
    {
        let theta = ctx.theta.clone();
        guards.push(Guard::new("polynomial_zero", move |c| {
            theta
                .iter()
                .enumerate()
                .map(|(mu, row)| poly_val(c[mu], row).abs())
                .fold(f64::INFINITY, f64::min)
        }));
    }

    let mut lo: Vec<f64> = (0..m).map(|mu| 0.3 + 0.5 * mu as f64).collect();
    let mut hi: Vec<f64> = (0..m).map(|mu| 0.5 + 0.5 * mu as f64).collect();
    lo.extend(std::iter::repeat(0.0).take(m));
    hi.extend(std::iter::repeat(1.0).take(m));

    Ok(MetricModel {
        id: "orthotoric".into(),
        n,
        m,
        odd: false,
        metric,
        frame,
        cky: Some(cky),
        closed_cky: false,
        eigenvalues: Some(eigenvalues),
        hamiltonian: Some(hamiltonian),
        hamiltonian_eigenvalues: Some(ham_eigenvalues),
        kahler: Some(kahler),
        negative_cky: None,
        negative_eigenvalues: None,
        informational: vec![],
        sampling: SamplingBox::new(lo, hi),
        guards,
        commutators: None,
        notes: vec![
            "the angular coframe rows use the elementary symmetric functions of the other coordinates with degrees 0..m-1; the literal degree range 1..m is degenerate".into(),
            "one polynomial is negative on its window by default, so one plane of the coframe is imaginary".into(),
        ],
        params,
    })
}

// ---------------------------------------------------------------------------
// Flat space and its full conformal Killing family
// ---------------------------------------------------------------------------

/// Constants of the flat conformal Killing family.
#[derive(Clone, Debug)]
pub struct FlatCKYConstants {
    /// Conformal part, a constant 2-form.
    pub chi: PForm,
    /// Divergence part, a constant 1-form.
    pub kv: PForm,
    /// Torsion part, a constant 3-form.
    pub tau: PForm,
    /// Parallel part, a constant 2-form.
    pub base: PForm,
}

impl FlatCKYConstants {
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let draw = |p: usize, rng: &mut dyn rand::RngCore| {
            let comps: Vec<C64> = (0..multi_indices(n, p).len())
                .map(|_| {
                    C64::new(
                        rng.gen_range(-1.0..1.0_f64),
                        rng.gen_range(-1.0..1.0_f64),
                    )
                })
                .collect();
            PForm::new(n, p, comps).expect("component count matches")
        };
        FlatCKYConstants {
            chi: draw(2, rng),
            kv: draw(1, rng),
            tau: draw(3, rng),
            base: draw(2, rng),
        }
    }

    /// The quadratic solution field determined by the constants:
    /// half-norm times the conformal part, minus the position covector
    /// wedged with its contraction, plus covector wedge divergence part,
    /// plus position contraction of the torsion part, plus the constant.
    pub fn field(&self, signature: &[f64]) -> FormField {
        let n = signature.len();
        assert_eq!(self.chi.n(), n);
        let sig = signature.to_vec();
        let chi = self.chi.clone();
        let kv = self.kv.clone();
        let tau = self.tau.clone();
        let base = self.base.clone();
        let comps: Vec<ScalarField> = multi_indices(n, 2)
            .into_iter()
            .map(|idx| {
                let (i, j) = (idx[0], idx[1]);
                let sig = sig.clone();
                let chi = chi.clone();
                let kv = kv.clone();
                let tau = tau.clone();
                let base = base.clone();
                ScalarField::from_jets(n, move |q| {
                    let dim = q.len();
                    let at2 = |f: &PForm, a: usize, b: usize| -> C64 {
                        f.comp_signed(&[a, b]).map(|(s, v)| *v * s as f64).unwrap_or(re(0.0))
                    };
                    let at3 = |f: &PForm, a: usize, b: usize, c: usize| -> C64 {
                        f.comp_signed(&[a, b, c])
                            .map(|(s, v)| *v * s as f64)
                            .unwrap_or(re(0.0))
                    };
                    // half the squared norm of the position vector
                    let mut halfnorm = Jet2::constant(dim, re(0.0));
                    for (a, &s) in sig.iter().enumerate() {
                        halfnorm = &halfnorm + &(&q[a] * &q[a]).scale(re(0.5 * s));
                    }
                    let mut acc = halfnorm.scale(at2(&chi, i, j));
                    // x-flat wedge (x contracted into chi), then wedge with
                    // the divergence constant
                    let xb = |a: usize| q[a].scale(re(sig[a]));
                    let contraction = |slot: usize| {
                        let mut acc = Jet2::constant(dim, re(0.0));
                        for a in 0..dim {
                            acc = &acc + &q[a].scale(at2(&chi, a, slot));
                        }
                        acc
                    };
                    acc = &acc - &(&xb(i) * &contraction(j));
                    acc = &acc + &(&xb(j) * &contraction(i));
                    acc = &acc + &xb(i).scale(*kv.comp(&[j]));
                    acc = &acc - &xb(j).scale(*kv.comp(&[i]));
                    for a in 0..dim {
                        acc = &acc + &q[a].scale(at3(&tau, a, i, j));
                    }
                    &acc + &Jet2::constant(dim, at2(&base, i, j))
                })
            })
            .collect();
        FormField::new(n, 2, comps).expect("component count matches")
    }
}

/// Flat metric with the stated signature diagonal and a null frame built
/// from coordinate pairs. Planes with matched signs become complex,
/// mixed-sign planes stay real; in odd dimensions the last coordinate
/// carries the unit leg.
pub fn build_flat(params: &ParameterRecord) -> Result<MetricModel, CoreError> {
    let m = params.m;
    let odd = params.odd;
    let n = 2 * m + usize::from(odd);
    if m < 1 {
        return Err(CoreError::Config("flat needs m >= 1".into()));
    }
    let mut params = params.clone();
    if params.signature.is_empty() {
        params.signature = vec![1.0; n];
    }
    let sig = params.signature.clone();
    if sig.len() != n || sig.iter().any(|s| s.abs() != 1.0) {
        return Err(CoreError::Config(format!(
            "flat signature needs {n} entries of +1 or -1"
        )));
    }
    let metric = MetricField::constant_diagonal(&sig);

    // two coframe rows per plane, chosen by the sign pattern
    let mut down_rows: Vec<Vec<ScalarField>> = Vec::with_capacity(m);
    let mut up_rows: Vec<Vec<ScalarField>> = Vec::with_capacity(m);
    for mu in 0..m {
        let (s1, s2) = (sig[2 * mu], sig[2 * mu + 1]);
        let mut down = vec![ScalarField::zero(n); n];
        let mut up = vec![ScalarField::zero(n); n];
        let (first, second) = (2 * mu, 2 * mu + 1);
        let set = |row: &mut Vec<ScalarField>, slot: usize, v: C64| {
            row[slot] = ScalarField::constant(n, v);
        };
        match (s1 > 0.0, s2 > 0.0) {
            (true, true) => {
                set(&mut down, first, re(SQRT_HALF));
                set(&mut down, second, I * re(SQRT_HALF));
                set(&mut up, first, re(SQRT_HALF));
                set(&mut up, second, -I * re(SQRT_HALF));
            }
            (false, false) => {
                set(&mut down, first, I * re(SQRT_HALF));
                set(&mut down, second, -re(SQRT_HALF));
                set(&mut up, first, I * re(SQRT_HALF));
                set(&mut up, second, re(SQRT_HALF));
            }
            (true, false) => {
                set(&mut down, first, re(SQRT_HALF));
                set(&mut down, second, re(SQRT_HALF));
                set(&mut up, first, re(SQRT_HALF));
                set(&mut up, second, -re(SQRT_HALF));
            }
            (false, true) => {
                set(&mut down, second, re(SQRT_HALF));
                set(&mut down, first, re(SQRT_HALF));
                set(&mut up, second, re(SQRT_HALF));
                set(&mut up, first, -re(SQRT_HALF));
            }
        }
        down_rows.push(down);
        up_rows.push(up);
    }
    let mut rows = down_rows;
    rows.extend(up_rows);
    if odd {
        let mut row = vec![ScalarField::zero(n); n];
        row[n - 1] = ScalarField::constant(
            n,
            if sig[n - 1] > 0.0 { re(1.0) } else { I },
        );
        rows.push(row);
    }
    let frame = FrameField::new(m, odd, rows)?;

    // seeded constants give a concrete candidate on the model itself
    let mut rng = ChaCha8Rng::seed_from_u64(params.flat_seed);
    let constants = FlatCKYConstants::random(n, &mut rng);
    let cky = constants.field(&sig);

    Ok(MetricModel {
        id: "flat".into(),
        n,
        m,
        odd,
        metric,
        frame,
        cky: Some(cky),
        closed_cky: false,
        eigenvalues: None,
        hamiltonian: None,
        hamiltonian_eigenvalues: None,
        kahler: None,
        negative_cky: None,
        negative_eigenvalues: None,
        informational: vec![],
        sampling: SamplingBox::new(vec![-1.0; n], vec![1.0; n]),
        guards: vec![],
        commutators: None,
        notes: vec![
            "candidate built from seeded constants of the quadratic family".into(),
        ],
        params,
    })
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Minimum margin a point must clear on every guard.
pub const GUARD_FLOOR: f64 = 1e-4;

/// Draw `count` points uniformly from the model's box, rejecting guarded
/// regions. Deterministic for a fixed seed.
pub fn sample_points(
    model: &MetricModel,
    count: usize,
    seed: u64,
) -> Result<Vec<Point>, CoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let dim = model.sampling.dim();
    let max_attempts = 1000 * count.max(1);
    for _ in 0..max_attempts {
        if out.len() == count {
            break;
        }
        let coords: Vec<f64> = (0..dim)
            .map(|k| {
                let (lo, hi) = (model.sampling.lo[k], model.sampling.hi[k]);
                if lo == hi {
                    lo
                } else {
                    rng.gen_range(lo..hi)
                }
            })
            .collect();
        if model
            .guards
            .iter()
            .all(|g| (g.margin)(&coords) >= GUARD_FLOOR)
        {
            out.push(Point::new(coords));
        }
    }
    if out.len() < count {
        return Err(CoreError::GuardSaturated {
            model: model.id.clone(),
            attempts: max_attempts,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cky::{cky_data, normal_form};
    use crate::linalg;

    fn sample_one(model: &MetricModel, seed: u64) -> Point {
        sample_points(model, 1, seed).unwrap().into_iter().next().unwrap()
    }

    #[test]
    fn kna_even_passes_self_checks_and_kills_the_residual() {
        let params = ParameterRecord::defaults("kerr_nut_ads", 2, false);
        let model = build_kerr_nut_ads(&params).unwrap();
        for seed in [42, 43] {
            let pt = sample_one(&model, seed);
            let sc = model.self_check(&pt).unwrap();
            assert!(sc.pairing < 1e-10, "pairing {}", sc.pairing);
            assert!(sc.reconstruction < 1e-10, "reconstruction {}", sc.reconstruction);
            let ma = model.metric.eval(&pt).unwrap();
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let data = cky_data(&ma, &phi).unwrap();
            assert!(data.residual < 1e-10, "cky residual {}", data.residual);
            // the candidate is closed
            let dphi = phi.d().values();
            let scale = linalg::max_abs_slice(phi.values().comps());
            let worst = linalg::max_abs_slice(dphi.comps());
            assert!(worst / scale.max(1.0) < 1e-11, "dphi {worst}");
        }
    }

    #[test]
    fn kna_normal_form_recovers_the_radial_eigenvalues() {
        let params = ParameterRecord::defaults("kerr_nut_ads", 3, false);
        let model = build_kerr_nut_ads(&params).unwrap();
        let pt = sample_one(&model, 5);
        let ma = model.metric.eval(&pt).unwrap();
        let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
        let nf = normal_form(&ma.g, &ma.g_inv, &phi.values(), 3, false).unwrap();
        // eigenvalues i x_mu, sorted descending by imaginary part
        let mut expect: Vec<f64> = (0..3).map(|mu| pt.coords[mu]).collect();
        expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in nf.eigenvalues.iter().zip(expect.iter()) {
            assert!(
                (got - I * re(*want)).norm() < 1e-9,
                "eigenvalue {got} vs i{want}"
            );
        }
        assert!(nf.reconstruction_residual < 1e-9);
    }

    #[test]
    fn kna_odd_passes_self_checks_and_kills_the_residual() {
        let params = ParameterRecord::defaults("kerr_nut_ads", 2, true);
        let model = build_kerr_nut_ads(&params).unwrap();
        let pt = sample_one(&model, 44);
        let sc = model.self_check(&pt).unwrap();
        assert!(sc.pairing < 1e-10, "pairing {}", sc.pairing);
        assert!(sc.reconstruction < 1e-10, "reconstruction {}", sc.reconstruction);
        let ma = model.metric.eval(&pt).unwrap();
        let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
        let data = cky_data(&ma, &phi).unwrap();
        assert!(data.residual < 1e-10, "cky residual {}", data.residual);
    }

    #[test]
    fn kna_bracket_reference_matches_the_frame() {
        let params = ParameterRecord::defaults("kerr_nut_ads", 2, false);
        let model = build_kerr_nut_ads(&params).unwrap();
        let pt = sample_one(&model, 7);
        let (_, fb) = model.at_point(&pt).unwrap();
        let w = fb.structure_functions();
        let expected = (model.commutators.as_ref().unwrap())(&pt).unwrap();
        assert_eq!(expected.len(), 6);
        let mut scale = 0.0_f64;
        for v in w.iter() {
            scale = scale.max(v.norm());
        }
        for ex in &expected {
            for c in 0..model.n {
                let got = w[[ex.a, ex.b, c]];
                let diff = (got - ex.coeffs[c]).norm();
                assert!(
                    diff / scale.max(1.0) < 1e-9,
                    "bracket [{},{}] leg {c}: got {got}, want {}",
                    ex.a,
                    ex.b,
                    ex.coeffs[c]
                );
            }
        }
    }

    #[test]
    fn kna_vacuum_limit_is_flat() {
        let mut params = ParameterRecord::defaults("kerr_nut_ads", 2, false);
        params.mass = vec![0.0, 0.0];
        params.cosmological = 0.0;
        let model = build_kerr_nut_ads(&params).unwrap();
        let pt = sample_one(&model, 42);
        let ma = model.metric.eval(&pt).unwrap();
        let riem = ma.riemann_lowered();
        let mut worst = 0.0_f64;
        for v in riem.iter() {
            worst = worst.max(v.norm());
        }
        assert!(worst < 1e-9, "curvature {worst}");
    }

    #[test]
    fn lmp_self_checks_and_bracket_reference() {
        let params = ParameterRecord::defaults("lmp5", 2, true);
        let model = build_lmp5(&params).unwrap();
        let pt = sample_one(&model, 42);
        let sc = model.self_check(&pt).unwrap();
        assert!(sc.pairing < 1e-10, "pairing {}", sc.pairing);
        assert!(sc.reconstruction < 1e-10, "reconstruction {}", sc.reconstruction);
        let (_, fb) = model.at_point(&pt).unwrap();
        let w = fb.structure_functions();
        let mut scale = 0.0_f64;
        for v in w.iter() {
            scale = scale.max(v.norm());
        }
        let expected = (model.commutators.as_ref().unwrap())(&pt).unwrap();
        assert_eq!(expected.len(), 10);
        for ex in &expected {
            for c in 0..model.n {
                let got = w[[ex.a, ex.b, c]];
                let diff = (got - ex.coeffs[c]).norm();
                assert!(
                    diff / scale.max(1.0) < 1e-9,
                    "bracket [{},{}] leg {c}: got {got}, want {}",
                    ex.a,
                    ex.b,
                    ex.coeffs[c]
                );
            }
        }
    }

    #[test]
    fn lmp_negative_candidate_fails_loudly() {
        let params = ParameterRecord::defaults("lmp5", 2, true);
        let model = build_lmp5(&params).unwrap();
        let pt = sample_one(&model, 9);
        let ma = model.metric.eval(&pt).unwrap();
        let phi = model.negative_cky.as_ref().unwrap().eval(&pt).unwrap();
        let data = cky_data(&ma, &phi).unwrap();
        assert!(data.residual > 1e-3, "negative residual {}", data.residual);
    }

    #[test]
    fn orthotoric_kaehler_form_is_closed_and_residuals_vanish() {
        let params = ParameterRecord::defaults("orthotoric", 2, false);
        let model = build_orthotoric(&params).unwrap();
        let pt = sample_one(&model, 42);
        let sc = model.self_check(&pt).unwrap();
        assert!(sc.pairing < 1e-10, "pairing {}", sc.pairing);
        assert!(sc.reconstruction < 1e-10, "reconstruction {}", sc.reconstruction);
        let omega = model.kahler.as_ref().unwrap().eval(&pt).unwrap();
        let domega = omega.d().values();
        let worst = linalg::max_abs_slice(domega.comps());
        assert!(worst < 1e-12, "domega {worst}");
        // the induced candidate is conformal Killing
        let ma = model.metric.eval(&pt).unwrap();
        let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
        let data = cky_data(&ma, &phi).unwrap();
        assert!(data.residual < 1e-10, "cky residual {}", data.residual);
    }

    #[test]
    fn flat_family_solves_the_equation_in_all_signatures() {
        for sig in [vec![1.0, 1.0, 1.0, 1.0], vec![1.0, -1.0, 1.0, -1.0]] {
            let mut params = ParameterRecord::defaults("flat", 2, false);
            params.signature = sig;
            let model = build_flat(&params).unwrap();
            let pt = sample_one(&model, 11);
            let sc = model.self_check(&pt).unwrap();
            assert!(sc.pairing < 1e-12);
            assert!(sc.reconstruction < 1e-12);
            let ma = model.metric.eval(&pt).unwrap();
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap();
            let data = cky_data(&ma, &phi).unwrap();
            assert!(data.residual < 1e-12, "flat residual {}", data.residual);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_guards_saturate() {
        let params = ParameterRecord::defaults("kerr_nut_ads", 2, false);
        let mut model = build_kerr_nut_ads(&params).unwrap();
        let a = sample_points(&model, 5, 42).unwrap();
        let b = sample_points(&model, 5, 42).unwrap();
        for (p, q) in a.iter().zip(b.iter()) {
            assert_eq!(p.coords, q.coords);
        }
        model.guards.push(Guard::new("impossible", |_| 0.0));
        match sample_points(&model, 3, 42) {
            Err(CoreError::GuardSaturated { .. }) => {}
            other => panic!("expected guard saturation, got {other:?}"),
        }
    }

    #[test]
    fn unknown_id_is_a_config_error() {
        let params = ParameterRecord::default();
        match build("unknown", &params) {
            Err(CoreError::Config(_)) => {}
            other => panic!("expected config error, got {:?}", other.map(|m| m.id)),
        }
    }

    /// The signed candidate component on each plane must equal the analytic
    /// eigenvalue, not just match it up to sign: the sign-blind gates
    /// (normal form, spectrum, self-checks) cannot see an orientation flip,
    /// so this pins every supported dimension and parity directly.
    #[test]
    fn plane_orientation_matches_the_analytic_eigenvalues() {
        use crate::exterior::Leg;
        for odd in [false, true] {
            for m in 2..=5 {
                let params = ParameterRecord::defaults("kerr_nut_ads", m, odd);
                let model = build("kerr_nut_ads", &params).unwrap();
                let pt = sample_one(&model, 19);
                let (_, fb) = model.at_point(&pt).unwrap();
                let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap().values();
                let lams = model.eigenvalue_jets(&pt).unwrap();
                for mu in 0..m {
                    let d = fb.frame.leg_index(Leg::Down(mu));
                    let u = fb.frame.leg_index(Leg::Up(mu));
                    let applied = phi.apply(&[&fb.frame.vectors[d], &fb.frame.vectors[u]]);
                    let gap = (applied / lams[mu].value - 1.0).norm();
                    assert!(gap < 1e-12, "m={m} odd={odd} mu={mu}: gap {gap}");
                }
            }
        }
        for m in [2_usize, 3] {
            let params = ParameterRecord::defaults("orthotoric", m, false);
            let model = build("orthotoric", &params).unwrap();
            let pt = sample_one(&model, 19);
            let (_, fb) = model.at_point(&pt).unwrap();
            let phi = model.cky.as_ref().unwrap().eval(&pt).unwrap().values();
            let lams = model.eigenvalue_jets(&pt).unwrap();
            for mu in 0..m {
                let d = fb.frame.leg_index(Leg::Down(mu));
                let u = fb.frame.leg_index(Leg::Up(mu));
                let applied = phi.apply(&[&fb.frame.vectors[d], &fb.frame.vectors[u]]);
                let gap = (applied / lams[mu].value - 1.0).norm();
                assert!(gap < 1e-12, "orthotoric m={m} mu={mu}: gap {gap}");
            }
        }
    }
}
