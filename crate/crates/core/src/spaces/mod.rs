//! Four concrete pointed metric spaces with isometric group actions behind
//! one interface: the lattice Z^N with the word (L1) metric, the free group
//! F_N as a 2N-regular tree, the hyperbolic plane in the upper half-plane
//! model, and Pos_N with the affine-invariant metric.

pub mod halfplane;
pub mod spd;
pub mod word;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::WalkRng;
use rand::Rng;

pub use halfplane::Moebius;
pub use spd::SpdPoint;

/// Which concrete space is in play.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// Z^N with the standard generators and the L1 word metric.
    ZdWord { dim: usize },
    /// Free group F_N acting on its Cayley tree.
    FreeGroup { rank: usize },
    /// Upper half-plane model of the hyperbolic plane.
    HyperbolicPlane,
    /// Symmetric positive definite N x N matrices, affine-invariant metric.
    PosMatrices { size: usize },
}

impl SpaceKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceKind::ZdWord { dim } if *dim >= 1 => Ok(()),
            SpaceKind::ZdWord { dim } => {
                Err(Error::validation(format!("lattice dimension must be >= 1, got {dim}")))
            }
            SpaceKind::FreeGroup { rank } if *rank >= 2 => Ok(()),
            SpaceKind::FreeGroup { rank } => {
                Err(Error::validation(format!("free group rank must be >= 2, got {rank}")))
            }
            SpaceKind::HyperbolicPlane => Ok(()),
            SpaceKind::PosMatrices { size } if *size >= 2 => Ok(()),
            SpaceKind::PosMatrices { size } => {
                Err(Error::validation(format!("matrix size must be >= 2, got {size}")))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            SpaceKind::ZdWord { dim } => format!("z:{dim}"),
            SpaceKind::FreeGroup { rank } => format!("f:{rank}"),
            SpaceKind::HyperbolicPlane => "h2".to_string(),
            SpaceKind::PosMatrices { size } => format!("pos:{size}"),
        }
    }

    /// Distances are exact integers in the two graph cases.
    pub fn is_discrete(&self) -> bool {
        matches!(self, SpaceKind::ZdWord { .. } | SpaceKind::FreeGroup { .. })
    }
}

/// A point of one of the four spaces.
#[derive(Clone, Debug)]
pub enum SpacePoint {
    Lattice(Vec<i64>),
    Word(Vec<i32>),
    HalfPlane { re: f64, im: f64 },
    Spd(SpdPoint),
}

impl SpacePoint {
    fn kind_name(&self) -> &'static str {
        match self {
            SpacePoint::Lattice(_) => "lattice point",
            SpacePoint::Word(_) => "word",
            SpacePoint::HalfPlane { .. } => "half-plane point",
            SpacePoint::Spd(_) => "SPD matrix",
        }
    }
}

/// An isometry of one of the four spaces.
#[derive(Clone, Debug)]
pub enum IsometryElement {
    Translation(Vec<i64>),
    Word(Vec<i32>),
    Moebius(Moebius),
    Linear(Mat),
}

impl IsometryElement {
    fn kind_name(&self) -> &'static str {
        match self {
            IsometryElement::Translation(_) => "translation",
            IsometryElement::Word(_) => "word",
            IsometryElement::Moebius(_) => "moebius",
            IsometryElement::Linear(_) => "linear",
        }
    }
}

/// A space together with its canonical basepoint (origin, empty word, i, or
/// the identity matrix; never user-supplied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedSpace {
    kind: SpaceKind,
}

impl PointedSpace {
    pub fn new(kind: SpaceKind) -> Result<Self> {
        kind.validate()?;
        Ok(PointedSpace { kind })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn basepoint(&self) -> SpacePoint {
        match &self.kind {
            SpaceKind::ZdWord { dim } => SpacePoint::Lattice(vec![0; *dim]),
            SpaceKind::FreeGroup { .. } => SpacePoint::Word(Vec::new()),
            SpaceKind::HyperbolicPlane => SpacePoint::HalfPlane { re: 0.0, im: 1.0 },
            SpaceKind::PosMatrices { size } => SpacePoint::Spd(SpdPoint::identity(*size)),
        }
    }

    pub fn identity_isometry(&self) -> IsometryElement {
        match &self.kind {
            SpaceKind::ZdWord { dim } => IsometryElement::Translation(vec![0; *dim]),
            SpaceKind::FreeGroup { .. } => IsometryElement::Word(Vec::new()),
            SpaceKind::HyperbolicPlane => IsometryElement::Moebius(Moebius::IDENTITY),
            SpaceKind::PosMatrices { size } => IsometryElement::Linear(Mat::identity(*size)),
        }
    }

    pub fn validate_point(&self, p: &SpacePoint) -> Result<()> {
        match (&self.kind, p) {
            (SpaceKind::ZdWord { dim }, SpacePoint::Lattice(v)) => {
                if v.len() != *dim {
                    return Err(Error::validation(format!(
                        "lattice point has dimension {}, space has {}",
                        v.len(),
                        dim
                    )));
                }
                Ok(())
            }
            (SpaceKind::FreeGroup { rank }, SpacePoint::Word(w)) => {
                if !word::is_reduced(w, *rank) {
                    return Err(Error::validation(format!("word {w:?} is not reduced for rank {rank}")));
                }
                Ok(())
            }
            (SpaceKind::HyperbolicPlane, SpacePoint::HalfPlane { re, im }) => {
                if !re.is_finite() || !im.is_finite() || *im <= 0.0 {
                    return Err(Error::validation(format!(
                        "half-plane point needs Im z > 0, got {re} + {im}i"
                    )));
                }
                Ok(())
            }
            (SpaceKind::PosMatrices { size }, SpacePoint::Spd(m)) => {
                if m.dim != *size {
                    return Err(Error::validation(format!(
                        "SPD point has size {}, space has {}",
                        m.dim, size
                    )));
                }
                Ok(())
            }
            (kind, p) => Err(Error::KindMismatch {
                expected: kind.name(),
                got: p.kind_name().to_string(),
            }),
        }
    }

    pub fn validate_isometry(&self, g: &IsometryElement) -> Result<()> {
        match (&self.kind, g) {
            (SpaceKind::ZdWord { dim }, IsometryElement::Translation(v)) => {
                if v.len() != *dim {
                    return Err(Error::validation(format!(
                        "translation has dimension {}, space has {}",
                        v.len(),
                        dim
                    )));
                }
                Ok(())
            }
            (SpaceKind::FreeGroup { rank }, IsometryElement::Word(w)) => {
                if !word::is_reduced(w, *rank) {
                    return Err(Error::validation(format!("isometry word {w:?} is not reduced")));
                }
                Ok(())
            }
            (SpaceKind::HyperbolicPlane, IsometryElement::Moebius(_)) => Ok(()),
            (SpaceKind::PosMatrices { size }, IsometryElement::Linear(m)) => {
                if m.n_rows != *size || m.n_cols != *size {
                    return Err(Error::validation(format!(
                        "linear isometry is {}x{}, space needs {size}x{size}",
                        m.n_rows, m.n_cols
                    )));
                }
                if !m.is_finite() || m.det() == 0.0 {
                    return Err(Error::validation("linear isometry must be invertible"));
                }
                Ok(())
            }
            (kind, g) => Err(Error::KindMismatch {
                expected: kind.name(),
                got: g.kind_name().to_string(),
            }),
        }
    }
}

/// Distance between two points of the space.
pub fn distance(space: &PointedSpace, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
    space.validate_point(p)?;
    space.validate_point(q)?;
    match (p, q) {
        (SpacePoint::Lattice(a), SpacePoint::Lattice(b)) => {
            Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() as f64)
        }
        (SpacePoint::Word(a), SpacePoint::Word(b)) => Ok(word::distance(a, b) as f64),
        (
            SpacePoint::HalfPlane { re: r1, im: i1 },
            SpacePoint::HalfPlane { re: r2, im: i2 },
        ) => Ok(halfplane::distance(*r1, *i1, *r2, *i2)),
        (SpacePoint::Spd(a), SpacePoint::Spd(b)) => spd::distance(a, b),
        _ => unreachable!("validated above"),
    }
}

/// Apply an isometry to a point.
pub fn act(space: &PointedSpace, g: &IsometryElement, p: &SpacePoint) -> Result<SpacePoint> {
    space.validate_isometry(g)?;
    space.validate_point(p)?;
    match (g, p) {
        (IsometryElement::Translation(t), SpacePoint::Lattice(v)) => {
            Ok(SpacePoint::Lattice(t.iter().zip(v).map(|(a, b)| a + b).collect()))
        }
        (IsometryElement::Word(gw), SpacePoint::Word(w)) => {
            Ok(SpacePoint::Word(word::concat(gw, w)))
        }
        (IsometryElement::Moebius(m), SpacePoint::HalfPlane { re, im }) => {
            let (r, i) = m.apply(*re, *im)?;
            Ok(SpacePoint::HalfPlane { re: r, im: i })
        }
        (IsometryElement::Linear(m), SpacePoint::Spd(p)) => Ok(SpacePoint::Spd(spd::act(m, p)?)),
        _ => unreachable!("validated above"),
    }
}

/// Group product g1 * g2, normalized per kind.
pub fn compose(
    space: &PointedSpace,
    g1: &IsometryElement,
    g2: &IsometryElement,
) -> Result<IsometryElement> {
    space.validate_isometry(g1)?;
    space.validate_isometry(g2)?;
    match (g1, g2) {
        (IsometryElement::Translation(a), IsometryElement::Translation(b)) => {
            Ok(IsometryElement::Translation(a.iter().zip(b).map(|(x, y)| x + y).collect()))
        }
        (IsometryElement::Word(a), IsometryElement::Word(b)) => {
            Ok(IsometryElement::Word(word::concat(a, b)))
        }
        (IsometryElement::Moebius(a), IsometryElement::Moebius(b)) => {
            Ok(IsometryElement::Moebius(a.compose(b)?))
        }
        (IsometryElement::Linear(a), IsometryElement::Linear(b)) => {
            let prod = a.mul(b);
            if !prod.is_finite() {
                return Err(Error::numerical("overflow in matrix composition"));
            }
            Ok(IsometryElement::Linear(prod))
        }
        _ => unreachable!("validated above"),
    }
}

/// Group inverse.
pub fn inverse(space: &PointedSpace, g: &IsometryElement) -> Result<IsometryElement> {
    space.validate_isometry(g)?;
    match g {
        IsometryElement::Translation(v) => {
            Ok(IsometryElement::Translation(v.iter().map(|x| -x).collect()))
        }
        IsometryElement::Word(w) => Ok(IsometryElement::Word(word::invert(w))),
        IsometryElement::Moebius(m) => Ok(IsometryElement::Moebius(m.inverse())),
        IsometryElement::Linear(m) => Ok(IsometryElement::Linear(m.inverse()?)),
    }
}

/// Closeness test used by property checks: exact in the graph cases,
/// distance below tol otherwise.
pub fn points_close(space: &PointedSpace, p: &SpacePoint, q: &SpacePoint, tol: f64) -> Result<bool> {
    match (p, q) {
        (SpacePoint::Lattice(a), SpacePoint::Lattice(b)) => Ok(a == b),
        (SpacePoint::Word(a), SpacePoint::Word(b)) => Ok(a == b),
        _ => Ok(distance(space, p, q)? <= tol),
    }
}

/// Geodesic midpoint where the space provides one (the two CAT(0) model
/// spaces). The graph spaces are rejected.
pub fn geodesic_midpoint(space: &PointedSpace, x: &SpacePoint, y: &SpacePoint) -> Result<SpacePoint> {
    space.validate_point(x)?;
    space.validate_point(y)?;
    match (x, y) {
        (
            SpacePoint::HalfPlane { re: r1, im: i1 },
            SpacePoint::HalfPlane { re: r2, im: i2 },
        ) => {
            let (r, i) = halfplane::midpoint(*r1, *i1, *r2, *i2)?;
            Ok(SpacePoint::HalfPlane { re: r, im: i })
        }
        (SpacePoint::Spd(a), SpacePoint::Spd(b)) => Ok(SpacePoint::Spd(spd::midpoint(a, b)?)),
        _ => Err(Error::validation(format!(
            "no midpoint construction for {}",
            space.kind().name()
        ))),
    }
}

/// Outcome of a semiparallelogram-law check on one pair (x, y) against a set
/// of witness points.
#[derive(Clone, Debug)]
pub struct SemiparallelogramReport {
    /// True when a single midpoint candidate satisfied the inequality for
    /// every witness.
    pub holds: bool,
    /// Worst slack rhs - lhs observed for the reported candidate (negative
    /// when the law fails).
    pub worst_slack: f64,
    /// The midpoint candidate achieving the reported slack.
    pub midpoint: Option<SpacePoint>,
}

/// Check d(x,y)^2 + 4 d(z,w)^2 <= 2 d(x,w)^2 + 2 d(y,w)^2 + tol for a
/// midpoint candidate z and all witnesses w. On the CAT(0) model spaces z is
/// the constructed geodesic midpoint; on Z^N every z in a radius-3 L1 ball
/// around the basepoint and around the rounded midpoint is tried, and the
/// best candidate is reported.
pub fn semiparallelogram_check(
    space: &PointedSpace,
    x: &SpacePoint,
    y: &SpacePoint,
    witnesses: &[SpacePoint],
    tol: f64,
) -> Result<SemiparallelogramReport> {
    let dxy = distance(space, x, y)?;
    let slack_for = |z: &SpacePoint| -> Result<f64> {
        let mut worst = f64::INFINITY;
        for w in witnesses {
            let dzw = distance(space, z, w)?;
            let dxw = distance(space, x, w)?;
            let dyw = distance(space, y, w)?;
            let slack = 2.0 * dxw * dxw + 2.0 * dyw * dyw - dxy * dxy - 4.0 * dzw * dzw;
            worst = worst.min(slack);
        }
        Ok(worst)
    };
    match space.kind() {
        SpaceKind::HyperbolicPlane | SpaceKind::PosMatrices { .. } => {
            let z = geodesic_midpoint(space, x, y)?;
            let worst = slack_for(&z)?;
            Ok(SemiparallelogramReport { holds: worst >= -tol, worst_slack: worst, midpoint: Some(z) })
        }
        SpaceKind::ZdWord { dim } => {
            let center: Vec<i64> = match (x, y) {
                (SpacePoint::Lattice(a), SpacePoint::Lattice(b)) => {
                    a.iter().zip(b).map(|(p, q)| (p + q) / 2).collect()
                }
                _ => unreachable!(),
            };
            let mut best: Option<(f64, SpacePoint)> = None;
            for z in lattice_ball(&vec![0; *dim], 3)
                .into_iter()
                .chain(lattice_ball(&center, 3))
            {
                let zp = SpacePoint::Lattice(z);
                let s = slack_for(&zp)?;
                if best.as_ref().map_or(true, |(bs, _)| s > *bs) {
                    best = Some((s, zp));
                }
            }
            let (worst, z) = best.expect("ball is nonempty");
            Ok(SemiparallelogramReport { holds: worst >= -tol, worst_slack: worst, midpoint: Some(z) })
        }
        SpaceKind::FreeGroup { .. } => Err(Error::validation(
            "semiparallelogram checker covers z:N, h2 and pos:N",
        )),
    }
}

/// All lattice points within L1 radius r of the center.
pub fn lattice_ball(center: &[i64], r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![0i64; center.len()];
    fn rec(center: &[i64], r: i64, pos: usize, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos == center.len() {
            out.push(current.iter().zip(center).map(|(d, c)| c + d).collect());
            return;
        }
        let used: i64 = current[..pos].iter().map(|d| d.abs()).sum();
        for d in -(r - used)..=(r - used) {
            current[pos] = d;
            rec(center, r, pos + 1, current, out);
        }
        current[pos] = 0;
    }
    rec(center, r, 0, &mut current, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Seeded samplers for property tests, acceptance runs and the CLI
// ---------------------------------------------------------------------------

pub mod sampling {
    use super::*;
    use crate::linalg::mgs_qr;
    use crate::rng::unit;

    pub fn sample_point(space: &PointedSpace, rng: &mut WalkRng) -> SpacePoint {
        match space.kind() {
            SpaceKind::ZdWord { dim } => {
                SpacePoint::Lattice((0..*dim).map(|_| rng.gen_range(-9..=9)).collect())
            }
            SpaceKind::FreeGroup { rank } => {
                let len = rng.gen_range(0..=12);
                SpacePoint::Word(sample_reduced_word(*rank, len, rng))
            }
            SpaceKind::HyperbolicPlane => SpacePoint::HalfPlane {
                re: -3.0 + 6.0 * unit(rng),
                im: ((0.2_f64).ln() + ((5.0_f64).ln() - (0.2_f64).ln()) * unit(rng)).exp(),
            },
            SpaceKind::PosMatrices { size } => {
                let basis = random_orthogonal(*size, rng);
                let log_eigs = (0..*size).map(|_| -2.0 + 4.0 * unit(rng)).collect();
                SpacePoint::Spd(SpdPoint::from_eigenform(basis, log_eigs))
            }
        }
    }

    pub fn sample_isometry(space: &PointedSpace, rng: &mut WalkRng) -> IsometryElement {
        match space.kind() {
            SpaceKind::ZdWord { dim } => {
                IsometryElement::Translation((0..*dim).map(|_| rng.gen_range(-9..=9)).collect())
            }
            SpaceKind::FreeGroup { rank } => {
                let len = rng.gen_range(0..=8);
                IsometryElement::Word(sample_reduced_word(*rank, len, rng))
            }
            SpaceKind::HyperbolicPlane => {
                // Iwasawa product: horizontal translation, dilation, rotation.
                let x = -2.0 + 4.0 * unit(rng);
                let s = (-1.5 + 3.0 * unit(rng)).exp();
                let th = std::f64::consts::PI * unit(rng);
                let t = Moebius::new(1.0, x, 0.0, 1.0).unwrap();
                let d = Moebius::new(s.sqrt(), 0.0, 0.0, 1.0 / s.sqrt()).unwrap();
                let k = Moebius::new(th.cos(), th.sin(), -th.sin(), th.cos()).unwrap();
                IsometryElement::Moebius(t.compose(&d).unwrap().compose(&k).unwrap())
            }
            SpaceKind::PosMatrices { size } => loop {
                let mut m = Mat::zeros(*size, *size);
                for i in 0..*size {
                    for j in 0..*size {
                        m.set(i, j, -1.0 + 2.0 * unit(rng));
                    }
                }
                if m.det().abs() > 0.05 {
                    if let Ok(cond) = spd::condition_estimate(&m) {
                        if cond < 100.0 {
                            return IsometryElement::Linear(m);
                        }
                    }
                }
            },
        }
    }

    pub fn sample_reduced_word(rank: usize, len: usize, rng: &mut WalkRng) -> Vec<i32> {
        let mut w: Vec<i32> = Vec::with_capacity(len);
        for _ in 0..len {
            loop {
                let mag = rng.gen_range(1..=rank as i32);
                let letter = if rng.gen::<bool>() { mag } else { -mag };
                if w.last() != Some(&-letter) {
                    w.push(letter);
                    break;
                }
            }
        }
        w
    }

    pub fn random_orthogonal(n: usize, rng: &mut WalkRng) -> Mat {
        loop {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, -1.0 + 2.0 * unit(rng));
                }
            }
            if m.det().abs() > 0.05 {
                if let Ok((q, _)) = mgs_qr(&m) {
                    return q;
                }
            }
        }
    }
}
