//! Horofunctions: closed-form Busemann functions per space, interior
//! functions Phi(x) = d(x,.) - d(x,x0), monotone-limit approximants, the
//! isometry action g.h(z) = h(g^{-1}z) - h(g^{-1}x0), and the cocycle
//! F(g, h) = -h(g^{-1}x0) with its max formula.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::spaces::{
    act, compose, distance, halfplane, inverse, spd::SpdPoint, word, IsometryElement,
    PointedSpace, SpaceKind, SpacePoint,
};

/// Evaluation tolerance for the numeric Pos_N Busemann limit. Tighter than
/// the generic 1e-9 so that two independent evaluations stay within the
/// 1e-9 slack of the horofunction inequalities.
pub const POS_BUSEMANN_TOL: f64 = 1e-10;

/// Cap on limit evaluations (the ray parameter doubles each evaluation).
pub const LIMIT_EVAL_BUDGET: usize = 1 << 20;

/// An infinite reduced word, eventually periodic: head then cycle repeated.
#[derive(Clone, Debug, PartialEq)]
pub struct EventuallyPeriodicWord {
    head: Vec<i32>,
    cycle: Vec<i32>,
}

impl EventuallyPeriodicWord {
    pub fn new(head: Vec<i32>, cycle: Vec<i32>, rank: usize) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::validation("boundary word needs a nonempty cycle"));
        }
        // reduced at every prefix: head, head->cycle seam, cycle->cycle seam
        let mut probe = head.clone();
        for _ in 0..2 {
            probe.extend_from_slice(&cycle);
        }
        if !word::is_reduced(&probe, rank) {
            return Err(Error::validation(format!(
                "boundary word (head {head:?}, cycle {cycle:?}) is not reduced at every prefix"
            )));
        }
        Ok(EventuallyPeriodicWord { head, cycle })
    }

    /// Direction along the powers of one generator, e.g. a^infinity.
    pub fn generator_power(letter: i32, rank: usize) -> Result<Self> {
        EventuallyPeriodicWord::new(Vec::new(), vec![letter], rank)
    }

    /// Direction extending a finite word by repeating its last letter.
    pub fn from_word(w: &[i32], rank: usize) -> Result<Self> {
        let last = *w
            .last()
            .ok_or_else(|| Error::validation("cannot extend the empty word to the boundary"))?;
        EventuallyPeriodicWord::new(w.to_vec(), vec![last], rank)
    }

    pub fn head(&self) -> &[i32] {
        &self.head
    }

    pub fn cycle(&self) -> &[i32] {
        &self.cycle
    }

    pub fn letter(&self, k: usize) -> i32 {
        if k < self.head.len() {
            self.head[k]
        } else {
            self.cycle[(k - self.head.len()) % self.cycle.len()]
        }
    }

    pub fn prefix(&self, k: usize) -> Vec<i32> {
        (0..k).map(|i| self.letter(i)).collect()
    }

    /// Number of leading letters of `w` that agree with this infinite word.
    pub fn common_prefix_len(&self, w: &[i32]) -> usize {
        w.iter().enumerate().take_while(|(i, &l)| self.letter(*i) == l).count()
    }

    /// Left action of a group word on the boundary: cancel into the head and
    /// re-split into head + cycle.
    pub fn acted_on_by(&self, g: &[i32], rank: usize) -> Result<Self> {
        let take = self.head.len() + self.cycle.len() * (g.len() / self.cycle.len() + 2);
        let w = word::concat(g, &self.prefix(take));
        // at most |g| letters cancelled, so w ends with >= 2 untouched cycles
        let cut = w.len() - self.cycle.len();
        EventuallyPeriodicWord::new(w[..cut].to_vec(), w[cut..].to_vec(), rank)
    }
}

/// A direction to infinity, per space.
#[derive(Clone, Debug)]
pub enum BoundaryDirection {
    /// Drift signature s in {-1,0,+1}^N, not all zero.
    LatticeSignature(Vec<i8>),
    /// Infinite reduced word.
    TreeWord(EventuallyPeriodicWord),
    /// Point of R union {infinity} (None = infinity).
    HalfPlaneBoundary(Option<f64>),
    /// Unit-Frobenius symmetric matrix in eigenform; the ray is exp(t X).
    SpdDirection { basis: Mat, eigs: Vec<f64> },
}

impl BoundaryDirection {
    pub fn lattice(signature: Vec<i8>) -> Result<Self> {
        if signature.iter().all(|&s| s == 0) {
            return Err(Error::validation("lattice signature must not be all zero"));
        }
        if signature.iter().any(|&s| !(-1..=1).contains(&s)) {
            return Err(Error::validation("lattice signature entries must be in {-1,0,1}"));
        }
        Ok(BoundaryDirection::LatticeSignature(signature))
    }

    /// Unit-Frobenius symmetric direction from a dense matrix.
    pub fn spd_from_dense(x: &Mat) -> Result<Self> {
        if x.asymmetry() > 1e-12 {
            return Err(Error::validation("SPD direction must be symmetric"));
        }
        let (eigs, basis) = crate::linalg::jacobi_eigen(x, crate::linalg::JACOBI_TOL)?;
        let norm = eigs.iter().map(|e| e * e).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "SPD direction must have unit Frobenius norm, got {norm}"
            )));
        }
        Ok(BoundaryDirection::SpdDirection { basis, eigs })
    }

    pub fn spd_from_eigenform(basis: Mat, mut eigs: Vec<f64>) -> Result<Self> {
        let norm = eigs.iter().map(|e| e * e).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::validation("SPD direction must be nonzero"));
        }
        if (norm - 1.0).abs() > 1e-12 {
            for e in &mut eigs {
                *e /= norm;
            }
        }
        Ok(BoundaryDirection::SpdDirection { basis, eigs })
    }

    pub fn validate(&self, space: &PointedSpace) -> Result<()> {
        match (space.kind(), self) {
            (SpaceKind::ZdWord { dim }, BoundaryDirection::LatticeSignature(s)) => {
                if s.len() != *dim {
                    return Err(Error::validation("signature dimension mismatch"));
                }
                if s.iter().all(|&x| x == 0) {
                    return Err(Error::validation("lattice signature must not be all zero"));
                }
                Ok(())
            }
            (SpaceKind::FreeGroup { rank }, BoundaryDirection::TreeWord(w)) => {
                // revalidate against this rank
                EventuallyPeriodicWord::new(w.head.clone(), w.cycle.clone(), *rank).map(|_| ())
            }
            (SpaceKind::HyperbolicPlane, BoundaryDirection::HalfPlaneBoundary(x)) => {
                if let Some(v) = x {
                    if !v.is_finite() {
                        return Err(Error::validation("boundary point must be finite or infinity"));
                    }
                }
                Ok(())
            }
            (SpaceKind::PosMatrices { size }, BoundaryDirection::SpdDirection { basis, eigs }) => {
                if basis.n_rows != *size || eigs.len() != *size {
                    return Err(Error::validation("SPD direction dimension mismatch"));
                }
                Ok(())
            }
            (kind, _) => Err(Error::KindMismatch {
                expected: kind.name(),
                got: "boundary direction of another kind".to_string(),
            }),
        }
    }
}

/// Truncation rule for approximant horofunctions.
#[derive(Clone, Copy, Debug)]
pub struct TruncationRule {
    pub tol: f64,
    pub budget: usize,
}

impl Default for TruncationRule {
    fn default() -> Self {
        TruncationRule { tol: 1e-9, budget: LIMIT_EVAL_BUDGET }
    }
}

/// An evaluable horofunction (or interior function Phi(x)).
#[derive(Clone, Debug)]
pub enum Horofunction {
    /// Busemann function of a geodesic ray toward the given direction,
    /// normalized to vanish at the basepoint.
    Busemann { space: PointedSpace, direction: BoundaryDirection },
    /// Phi(x) = d(x, .) - d(x, x0).
    Interior { space: PointedSpace, point: SpacePoint },
    /// Limit along an explicit sequence, evaluated at the truncation index.
    Approximant { space: PointedSpace, points: Vec<SpacePoint>, rule: TruncationRule },
    /// g.h for a base horofunction h without a closed-form pullback:
    /// evaluates h(g^{-1} z) - h(g^{-1} x0).
    Translated {
        space: PointedSpace,
        g_inverse: IsometryElement,
        offset: f64,
        inner: Box<Horofunction>,
    },
}

impl Horofunction {
    pub fn space(&self) -> &PointedSpace {
        match self {
            Horofunction::Busemann { space, .. }
            | Horofunction::Interior { space, .. }
            | Horofunction::Approximant { space, .. }
            | Horofunction::Translated { space, .. } => space,
        }
    }

    pub fn busemann(space: &PointedSpace, direction: BoundaryDirection) -> Result<Horofunction> {
        direction.validate(space)?;
        Ok(Horofunction::Busemann { space: space.clone(), direction })
    }

    pub fn approximant(
        space: &PointedSpace,
        points: Vec<SpacePoint>,
        rule: TruncationRule,
    ) -> Result<Horofunction> {
        if points.is_empty() {
            return Err(Error::validation("approximant needs at least one point"));
        }
        for p in &points {
            space.validate_point(p)?;
        }
        Ok(Horofunction::Approximant { space: space.clone(), points, rule })
    }

    pub fn describe(&self) -> String {
        match self {
            Horofunction::Busemann { direction, .. } => match direction {
                BoundaryDirection::LatticeSignature(s) => format!("busemann signature {s:?}"),
                BoundaryDirection::TreeWord(w) => format!(
                    "busemann tree word (head {} letters, cycle {:?})",
                    w.head.len(),
                    w.cycle
                ),
                BoundaryDirection::HalfPlaneBoundary(x) => match x {
                    Some(v) => format!("busemann at xi = {v}"),
                    None => "busemann at infinity".to_string(),
                },
                BoundaryDirection::SpdDirection { eigs, .. } => {
                    format!("busemann SPD direction, eigs {eigs:?}")
                }
            },
            Horofunction::Interior { .. } => "interior Phi(x)".to_string(),
            Horofunction::Approximant { points, .. } => {
                format!("approximant over {} points", points.len())
            }
            Horofunction::Translated { inner, .. } => format!("translated [{}]", inner.describe()),
        }
    }
}

/// The embedding Phi: x -> d(x, .) - d(x, x0).
pub fn phi_embed(space: &PointedSpace, x: &SpacePoint) -> Result<Horofunction> {
    space.validate_point(x)?;
    Ok(Horofunction::Interior { space: space.clone(), point: x.clone() })
}

/// Evaluate h(z).
pub fn eval(h: &Horofunction, z: &SpacePoint) -> Result<f64> {
    let space = h.space();
    space.validate_point(z)?;
    match h {
        Horofunction::Busemann { direction, .. } => match (direction, z) {
            (BoundaryDirection::TreeWord(xi), SpacePoint::Word(w)) => {
                Ok(w.len() as f64 - 2.0 * xi.common_prefix_len(w) as f64)
            }
            (BoundaryDirection::LatticeSignature(s), SpacePoint::Lattice(v)) => {
                let mut acc = 0.0;
                for (si, zi) in s.iter().zip(v) {
                    acc += match si {
                        0 => zi.abs() as f64,
                        _ => -(*si as f64) * (*zi as f64),
                    };
                }
                Ok(acc)
            }
            (BoundaryDirection::HalfPlaneBoundary(xi), SpacePoint::HalfPlane { re, im }) => {
                match xi {
                    None => Ok(-im.ln()),
                    Some(x) => {
                        let num = (re - x) * (re - x) + im * im;
                        Ok(num.ln() - im.ln() - (1.0 + x * x).ln())
                    }
                }
            }
            (BoundaryDirection::SpdDirection { .. }, SpacePoint::Spd(_)) => {
                let lim = busemann_limit(space, direction, z, LIMIT_EVAL_BUDGET, POS_BUSEMANN_TOL)?;
                Ok(lim.value)
            }
            _ => unreachable!("validated direction/point kinds"),
        },
        Horofunction::Interior { point, .. } => {
            let d1 = distance(space, point, z)?;
            let d0 = distance(space, point, &space.basepoint())?;
            Ok(d1 - d0)
        }
        Horofunction::Approximant { points, rule, .. } => {
            let x0 = space.basepoint();
            let value_at = |k: usize| -> Result<f64> {
                Ok(distance(space, &points[k], z)? - distance(space, &points[k], &x0)?)
            };
            let discrete = space.kind().is_discrete();
            let last = points.len() - 1;
            let mut k = 0usize;
            let mut prev = value_at(0)?;
            let mut evals = 1usize;
            let mut agreements = 0usize;
            loop {
                let next_k = if k == 0 { 1 } else { k * 2 };
                let next_k = next_k.min(last);
                if next_k == k || evals >= rule.budget {
                    return Err(Error::NonConvergence { steps: evals, prev, last: prev });
                }
                let cur = value_at(next_k)?;
                evals += 1;
                if if discrete { cur == prev } else { (prev - cur).abs() <= rule.tol } {
                    agreements += 1;
                } else {
                    agreements = 0;
                }
                // discrete sequences may plateau for one doubling before a
                // later drop; require two agreements in a row there
                if agreements >= if discrete { 2 } else { 1 } {
                    return Ok(cur);
                }
                if next_k == last {
                    return Err(Error::NonConvergence { steps: evals, prev, last: cur });
                }
                prev = cur;
                k = next_k;
            }
        }
        Horofunction::Translated { g_inverse, offset, inner, .. } => {
            let moved = act(space, g_inverse, z)?;
            Ok(eval(inner, &moved)? - offset)
        }
    }
}

/// The action g.h(z) = h(g^{-1} z) - h(g^{-1} x0). Closed under the
/// representation where possible: Interior maps to Interior(g x), tree and
/// half-plane Busemann functions map to the Busemann function of the moved
/// boundary point; everything else is wrapped.
pub fn act_on_h(space: &PointedSpace, g: &IsometryElement, h: &Horofunction) -> Result<Horofunction> {
    space.validate_isometry(g)?;
    if space != h.space() {
        return Err(Error::validation("horofunction belongs to another space"));
    }
    match h {
        Horofunction::Interior { point, .. } => {
            Ok(Horofunction::Interior { space: space.clone(), point: act(space, g, point)? })
        }
        // Moving the approximant's points is pointwise exact in the limit but
        // makes the truncation rule unreliable (translated rays plateau
        // arbitrarily long); the wrapper evaluates the original truncation.
        Horofunction::Approximant { .. } => wrap_translated(space, g, h),
        Horofunction::Busemann { direction, .. } => match (direction, g) {
            (BoundaryDirection::TreeWord(xi), IsometryElement::Word(gw)) => {
                let rank = match space.kind() {
                    SpaceKind::FreeGroup { rank } => *rank,
                    _ => unreachable!(),
                };
                Ok(Horofunction::Busemann {
                    space: space.clone(),
                    direction: BoundaryDirection::TreeWord(xi.acted_on_by(gw, rank)?),
                })
            }
            (BoundaryDirection::HalfPlaneBoundary(xi), IsometryElement::Moebius(m)) => {
                Ok(Horofunction::Busemann {
                    space: space.clone(),
                    direction: BoundaryDirection::HalfPlaneBoundary(m.apply_boundary(*xi)),
                })
            }
            (BoundaryDirection::LatticeSignature(s), IsometryElement::Translation(t)) => {
                // the product form is preserved exactly when the translation
                // vanishes on every zero-signature coordinate
                if s.iter().zip(t).all(|(&si, &ti)| si != 0 || ti == 0) {
                    Ok(h.clone())
                } else {
                    wrap_translated(space, g, h)
                }
            }
            (BoundaryDirection::SpdDirection { .. }, _) => wrap_translated(space, g, h),
            _ => wrap_translated(space, g, h),
        },
        Horofunction::Translated { g_inverse, inner, .. } => {
            // (g g').h: stored inverse becomes g'^{-1} g^{-1}
            let gi = inverse(space, g)?;
            let combined = compose(space, g_inverse, &gi)?;
            let x0 = space.basepoint();
            let at = act(space, &combined, &x0)?;
            let offset = eval(inner, &at)?;
            Ok(Horofunction::Translated {
                space: space.clone(),
                g_inverse: combined,
                offset,
                inner: inner.clone(),
            })
        }
    }
}

fn wrap_translated(
    space: &PointedSpace,
    g: &IsometryElement,
    h: &Horofunction,
) -> Result<Horofunction> {
    let gi = inverse(space, g)?;
    let x0 = space.basepoint();
    let at = act(space, &gi, &x0)?;
    let offset = eval(h, &at)?;
    Ok(Horofunction::Translated {
        space: space.clone(),
        g_inverse: gi,
        offset,
        inner: Box::new(h.clone()),
    })
}

/// F(g, h) = -h(g^{-1} x0).
pub fn f_cocycle(space: &PointedSpace, g: &IsometryElement, h: &Horofunction) -> Result<f64> {
    let gi = inverse(space, g)?;
    let at = act(space, &gi, &space.basepoint())?;
    Ok(-eval(h, &at)?)
}

/// Point at parameter t along the unit-speed ray from the basepoint toward
/// the direction. Discrete rays take the integer part of t.
pub fn ray_point(space: &PointedSpace, direction: &BoundaryDirection, t: f64) -> Result<SpacePoint> {
    direction.validate(space)?;
    match direction {
        BoundaryDirection::LatticeSignature(s) => {
            let k = t.round().max(0.0) as usize;
            let support: Vec<usize> =
                s.iter().enumerate().filter(|(_, &si)| si != 0).map(|(i, _)| i).collect();
            let m = support.len();
            let mut coords = vec![0i64; s.len()];
            for (j, &i) in support.iter().enumerate() {
                let count = k / m + usize::from(j < k % m);
                coords[i] = s[i] as i64 * count as i64;
            }
            Ok(SpacePoint::Lattice(coords))
        }
        BoundaryDirection::TreeWord(xi) => {
            let k = t.round().max(0.0) as usize;
            Ok(SpacePoint::Word(xi.prefix(k)))
        }
        BoundaryDirection::HalfPlaneBoundary(xi) => {
            let (re, im) = halfplane::ray_point(*xi, t)?;
            Ok(SpacePoint::HalfPlane { re, im })
        }
        BoundaryDirection::SpdDirection { basis, eigs } => {
            Ok(SpacePoint::Spd(SpdPoint::from_eigenform(
                basis.clone(),
                eigs.iter().map(|e| t * e).collect(),
            )))
        }
    }
}

/// Result of the monotone Busemann limit b_t = d(gamma(t), z) - t along
/// doubling t.
#[derive(Clone, Debug)]
pub struct BusemannLimit {
    pub value: f64,
    pub t_final: f64,
    pub last_decrement: f64,
    pub evaluations: usize,
}

/// Evaluate the Busemann limit by doubling the ray parameter until the
/// decrement falls below tol (continuous) or two consecutive doublings agree
/// exactly (discrete). The sequence must be non-increasing within 1e-9; a
/// violation is a numerical error.
pub fn busemann_limit(
    space: &PointedSpace,
    direction: &BoundaryDirection,
    z: &SpacePoint,
    budget: usize,
    tol: f64,
) -> Result<BusemannLimit> {
    direction.validate(space)?;
    space.validate_point(z)?;
    if tol <= 0.0 {
        return Err(Error::validation("tolerance must be positive"));
    }
    let discrete = space.kind().is_discrete();
    let b_at = |t: f64| -> Result<f64> {
        let p = ray_point(space, direction, t)?;
        Ok(distance(space, &p, z)? - t)
    };
    let hyperbolic = matches!(space.kind(), SpaceKind::HyperbolicPlane);
    let mut t = 1.0;
    let mut prev = b_at(t)?;
    let mut evals = 1usize;
    let mut agreements = 0usize;
    loop {
        let t2 = 2.0 * t;
        if hyperbolic && t2 > 700.0 {
            // exp(t) leaves f64 range; convergence there is exponential, so
            // reaching this cap without settling is a genuine failure
            return Err(Error::NonConvergence { steps: evals, prev, last: prev });
        }
        let cur = b_at(t2)?;
        evals += 1;
        // monotonicity from the triangle inequality, with slack for the
        // log-scale rounding of very long rays
        let slack = 1e-9_f64.max(64.0 * f64::EPSILON * t2.abs());
        if cur > prev + slack {
            return Err(Error::numerical(format!(
                "busemann sequence increased by {:.3e} at t = {}",
                cur - prev,
                t2
            )));
        }
        if if discrete { cur == prev } else { prev - cur < tol } {
            agreements += 1;
        } else {
            agreements = 0;
        }
        // discrete rays can plateau across a single doubling before a later
        // drop (coordinates still short of their targets); ask for two
        // agreements in a row there
        if agreements >= if discrete { 2 } else { 1 } {
            return Ok(BusemannLimit {
                value: cur,
                t_final: t2,
                last_decrement: prev - cur,
                evaluations: evals,
            });
        }
        if evals >= budget {
            return Err(Error::NonConvergence { steps: evals, prev, last: cur });
        }
        prev = cur;
        t = t2;
    }
}
