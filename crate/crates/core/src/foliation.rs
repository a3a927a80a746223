//! Maximal isotropic distributions attached to a canonical frame. A selector
//! bitmask over the m planes picks, for each plane, either the down leg or
//! the up leg; the resulting half-dimensional distribution is tested for
//! integrability (Frobenius), total geodesy, and real intersection rank.
//! The unit leg of odd dimensions is never adjoined.

use ndarray::{Array2, Array3};

use crate::error::CoreError;
use crate::exterior::{FrameAtPoint, Leg};
use crate::linalg;
use crate::C64;

/// Leg indices spanning the distribution for a selector. Bit mu set picks
/// the up leg of plane mu, clear picks the down leg.
pub fn distribution_legs(frame: &FrameAtPoint, selector: u32) -> Vec<usize> {
    (0..frame.m)
        .map(|mu| {
            if selector & (1 << mu) != 0 {
                frame.leg_index(Leg::Up(mu))
            } else {
                frame.leg_index(Leg::Down(mu))
            }
        })
        .collect()
}

/// Leg indices whose coframe covectors annihilate the distribution: the
/// complementary plane legs plus the unit leg when present.
pub fn annihilator_legs(frame: &FrameAtPoint, selector: u32) -> Vec<usize> {
    let mut legs: Vec<usize> = (0..frame.m)
        .map(|mu| {
            if selector & (1 << mu) != 0 {
                frame.leg_index(Leg::Down(mu))
            } else {
                frame.leg_index(Leg::Up(mu))
            }
        })
        .collect();
    if frame.odd {
        legs.push(frame.leg_index(Leg::Zero));
    }
    legs
}

/// Frobenius integrability residual of one selector: the largest commutator
/// coefficient escaping the distribution, relative to the largest commutator
/// coefficient among its legs. `omega` holds the structure functions
/// omega[a][b][c] = theta^c([E_a, E_b]).
pub fn frobenius_residual(frame: &FrameAtPoint, omega: &Array3<C64>, selector: u32) -> f64 {
    frobenius_residual_legs(omega, &distribution_legs(frame, selector))
}

/// Frobenius residual of an explicit leg set: the largest commutator
/// coefficient escaping the span, relative to the largest coefficient over
/// the same leg pairs. Covers enlarged distributions such as a selector's
/// legs joined with the unit leg.
pub fn frobenius_residual_legs(omega: &Array3<C64>, legs: &[usize]) -> f64 {
    let n = omega.dim().0;
    let mut escaped = 0.0_f64;
    let mut scale = 0.0_f64;
    for (i, &a) in legs.iter().enumerate() {
        for &b in legs.iter().skip(i + 1) {
            for c in 0..n {
                let v = omega[[a, b, c]].norm();
                scale = scale.max(v);
                if !legs.contains(&c) {
                    escaped = escaped.max(v);
                }
            }
        }
    }
    if scale < 1e-30 {
        0.0
    } else {
        escaped / scale
    }
}

/// Total geodesy residual of one selector: the largest coefficient of
/// nabla_u w escaping the distribution for u, w among its legs, relative to
/// the largest coefficient present. `gf` holds the frame connection values
/// gf[a][b][c] = theta^c(nabla_{E_a} E_b).
pub fn totally_geodesic_residual(frame: &FrameAtPoint, gf: &Array3<C64>, selector: u32) -> f64 {
    let dlegs = distribution_legs(frame, selector);
    let alegs = annihilator_legs(frame, selector);
    let n = frame.n();
    let mut escaped = 0.0_f64;
    let mut scale = 0.0_f64;
    for &a in &dlegs {
        for &b in &dlegs {
            for c in 0..n {
                let v = gf[[a, b, c]].norm();
                scale = scale.max(v);
                if alegs.contains(&c) {
                    escaped = escaped.max(v);
                }
            }
        }
    }
    if scale < 1e-30 {
        0.0
    } else {
        escaped / scale
    }
}

/// Largest frame connection component that simultaneous total geodesy of
/// every selector forbids, relative to the largest component overall.
///
/// A component theta^c(nabla_{E_a} E_b) is forbidden exactly when some
/// selector puts both E_a and E_b inside the distribution while the output
/// direction of leg c falls outside. Unit-leg output coefficients are always
/// forbidden; unit-leg inputs are never constrained.
pub fn connection_pattern_residual(frame: &FrameAtPoint, gf: &Array3<C64>) -> f64 {
    let n = frame.n();
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for v in gf.iter() {
        scale = scale.max(v.norm());
    }
    // plane index and whether the up leg is the in-distribution choice
    let in_leg = |leg: Leg| -> Option<(usize, bool)> {
        match leg {
            Leg::Down(i) => Some((i, false)),
            Leg::Up(i) => Some((i, true)),
            Leg::Zero => None,
        }
    };
    for a in 0..n {
        let Some((ia, ta)) = in_leg(frame.leg(a)) else {
            continue;
        };
        for b in 0..n {
            let Some((ib, tb)) = in_leg(frame.leg(b)) else {
                continue;
            };
            if ia == ib && ta != tb {
                continue; // no selector holds both legs of one plane
            }
            for c in 0..n {
                let consistent = match frame.leg(c) {
                    Leg::Zero => true,
                    // output along V_k escapes when the selector picked the
                    // up leg of plane k, and vice versa
                    Leg::Down(k) => {
                        (k != ia || ta) && (k != ib || tb)
                    }
                    Leg::Up(k) => {
                        (k != ia || !ta) && (k != ib || !tb)
                    }
                };
                if consistent {
                    worst = worst.max(gf[[a, b, c]].norm());
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

/// Dimension of the intersection of the distribution with its complex
/// conjugate, computed from the stacked annihilators of both. Component
/// conjugation stands in for the conjugate distribution, which is valid on
/// charts with real coordinates and a real metric.
pub fn real_intersection_rank(
    frame: &FrameAtPoint,
    selector: u32,
) -> Result<usize, CoreError> {
    let n = frame.n();
    let alegs = annihilator_legs(frame, selector);
    let rows = alegs.len() * 2;
    let mut a = Array2::<C64>::zeros((rows, n));
    for (r, &leg) in alegs.iter().enumerate() {
        let cov = &frame.coframe[leg];
        for i in 0..n {
            a[[r, i]] = cov[i];
            a[[r + alegs.len(), i]] = cov[i].conj();
        }
    }
    let rank = linalg::rank(&a, 1e-9)?;
    Ok(n - rank)
}
