//! Laws of large numbers for the cocycle: drift estimation (the Kingman
//! limit A), construction of limit horofunctions per space, the convergence
//! check -h(Z_n x0)/n -> A, the good-time selection of the subadditive
//! ergodic lemma, and the ray-approximation criterion.

use crate::error::{Error, Result};
use crate::horo::{
    eval, BoundaryDirection, EventuallyPeriodicWord, Horofunction,
};
use crate::matrixcocycle::log_spaced;
use crate::spaces::{halfplane, IsometryElement, PointedSpace, SpaceKind, SpacePoint};
use crate::walks::{sample_walk_stream, CocycleDriver, Trajectory};

/// Drift below this threshold is treated as zero: directional constructions
/// refuse rather than fabricate a direction.
pub const BALLISTIC_THRESHOLD: f64 = 1e-3;

/// Estimate of A = lim d(Z_n x0, x0)/n.
#[derive(Clone, Debug)]
pub struct DriftEstimate {
    pub a_hat: f64,
    pub len: usize,
    pub per_seed: Vec<f64>,
    /// Standard error across seeds.
    pub ci_half_width: f64,
    pub method: String,
    pub window_start_frac: f64,
}

/// Tail-average drift estimator over the window [frac*T, T]. The tail
/// average converges to the same a.s. limit as the subadditive infimum but
/// without the small-n upward bias.
pub fn estimate_drift_window(
    space: &PointedSpace,
    driver: &CocycleDriver,
    len: usize,
    seeds: &[u64],
    window_start_frac: f64,
) -> Result<DriftEstimate> {
    if len < 1_000 {
        return Err(Error::validation("drift estimation needs T >= 1000"));
    }
    if seeds.is_empty() {
        return Err(Error::validation("drift estimation needs at least one seed"));
    }
    if !(0.0..1.0).contains(&window_start_frac) {
        return Err(Error::validation("window start fraction must be in [0, 1)"));
    }
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let traj = sample_walk_stream(space, driver, len, seed, 0)?;
        per_seed.push(tail_mean(&traj, window_start_frac)?);
    }
    Ok(aggregate_drift(per_seed, len, window_start_frac))
}

/// Combine per-seed tail means into the estimate (mean, standard error).
pub fn aggregate_drift(per_seed: Vec<f64>, len: usize, window_start_frac: f64) -> DriftEstimate {
    let a_hat = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    let ci_half_width = if per_seed.len() > 1 {
        let var = per_seed.iter().map(|x| (x - a_hat).powi(2)).sum::<f64>()
            / (per_seed.len() - 1) as f64;
        (var / per_seed.len() as f64).sqrt()
    } else {
        0.0
    };
    DriftEstimate {
        a_hat,
        len,
        per_seed,
        ci_half_width,
        method: format!("tail mean of a(n)/n over [{window_start_frac}T, T]"),
        window_start_frac,
    }
}

pub fn estimate_drift(
    space: &PointedSpace,
    driver: &CocycleDriver,
    len: usize,
    seeds: &[u64],
) -> Result<DriftEstimate> {
    estimate_drift_window(space, driver, len, seeds, 0.5)
}

/// Same estimator on an already sampled trajectory.
pub fn tail_mean(traj: &Trajectory, window_start_frac: f64) -> Result<f64> {
    let len = traj.len();
    let start = ((len as f64 * window_start_frac) as usize).max(1);
    let stride = ((len - start) / 512).max(1);
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut n = start;
    while n <= len {
        sum += traj.radial(n)? / n as f64;
        count += 1;
        n += stride;
    }
    Ok(sum / count as f64)
}

/// A constructed limit direction together with construction notes that
/// reports carry along.
#[derive(Clone, Debug)]
pub struct LimitDirection {
    pub horofunction: Horofunction,
    pub notes: Vec<String>,
}

/// Per-space construction of the candidate limit horofunction of a ballistic
/// trajectory. Refuses below the ballisticity threshold.
pub fn limit_horofunction(traj: &Trajectory, a_hat: f64) -> Result<LimitDirection> {
    if a_hat <= BALLISTIC_THRESHOLD {
        return Err(Error::NotBallistic { a_hat, threshold: BALLISTIC_THRESHOLD });
    }
    let space = traj.space();
    let len = traj.len();
    match space.kind() {
        SpaceKind::ZdWord { dim } => {
            let terminal = match traj.orbit_point(len)? {
                SpacePoint::Lattice(v) => v,
                _ => unreachable!(),
            };
            // per-coordinate increment noise, for the signature threshold
            let mut mean = vec![0.0; *dim];
            let mut sq = vec![0.0; *dim];
            for k in 1..=len {
                if let IsometryElement::Translation(t) = traj.increment(k)? {
                    for i in 0..*dim {
                        mean[i] += t[i] as f64;
                        sq[i] += (t[i] * t[i]) as f64;
                    }
                }
            }
            let mut signature = vec![0i8; *dim];
            let mut notes = Vec::new();
            for i in 0..*dim {
                mean[i] /= len as f64;
                let var = (sq[i] / len as f64 - mean[i] * mean[i]).max(0.0);
                let stderr = (var / len as f64).sqrt();
                let v = terminal[i] as f64 / len as f64;
                let threshold = (0.05 * a_hat).max(3.0 * stderr);
                if v.abs() > threshold {
                    signature[i] = if v > 0.0 { 1 } else { -1 };
                } else {
                    notes.push(format!(
                        "coordinate {i} below signature threshold (|{v:.4}| <= {threshold:.4})"
                    ));
                }
            }
            if signature.iter().all(|&s| s == 0) {
                return Err(Error::NotBallistic { a_hat, threshold: BALLISTIC_THRESHOLD });
            }
            Ok(LimitDirection {
                horofunction: Horofunction::busemann(
                    space,
                    BoundaryDirection::lattice(signature)?,
                )?,
                notes,
            })
        }
        SpaceKind::FreeGroup { rank } => {
            // stabilized prefix over the final quarter, then the terminal
            // word extends it to the boundary
            let window_start = (3 * len) / 4;
            let mut prefix = match traj.orbit_point(window_start.max(1))? {
                SpacePoint::Word(w) => w,
                _ => unreachable!(),
            };
            let probe = log_spaced(len, 64);
            for &m in probe.iter().filter(|&&m| m > window_start) {
                if let SpacePoint::Word(w) = traj.orbit_point(m)? {
                    let l = crate::spaces::word::common_prefix_len(&prefix, &w);
                    prefix.truncate(l);
                }
            }
            let terminal = match traj.orbit_point(len)? {
                SpacePoint::Word(w) => w,
                _ => unreachable!(),
            };
            if terminal.is_empty() {
                return Err(Error::NotBallistic { a_hat, threshold: BALLISTIC_THRESHOLD });
            }
            let xi = EventuallyPeriodicWord::from_word(&terminal, *rank)?;
            Ok(LimitDirection {
                horofunction: Horofunction::busemann(space, BoundaryDirection::TreeWord(xi))?,
                notes: vec![format!(
                    "stabilized prefix over final quarter has length {} (terminal word {})",
                    prefix.len(),
                    terminal.len()
                )],
            })
        }
        SpaceKind::HyperbolicPlane => {
            let window_start = (3 * len) / 4;
            let mut finite = Vec::new();
            let mut infinite = 0usize;
            let probe = log_spaced(len, 128);
            for &m in probe.iter().filter(|&&m| m > window_start) {
                if let SpacePoint::HalfPlane { re, im } = traj.orbit_point(m)? {
                    match halfplane::boundary_projection(re, im) {
                        Some(x) => finite.push(x),
                        None => infinite += 1,
                    }
                }
            }
            let direction = if finite.len() >= infinite {
                if finite.is_empty() {
                    return Err(Error::NotBallistic { a_hat, threshold: BALLISTIC_THRESHOLD });
                }
                let xi = finite.iter().sum::<f64>() / finite.len() as f64;
                BoundaryDirection::HalfPlaneBoundary(Some(xi))
            } else {
                BoundaryDirection::HalfPlaneBoundary(None)
            };
            Ok(LimitDirection {
                horofunction: Horofunction::busemann(space, direction)?,
                notes: vec![format!(
                    "boundary projections over final quarter: {} finite, {} at infinity",
                    finite.len(),
                    infinite
                )],
            })
        }
        SpaceKind::PosMatrices { .. } => {
            let p = match traj.orbit_point(len)? {
                SpacePoint::Spd(p) => p,
                _ => unreachable!(),
            };
            // X = (1/2T) log(Z_T Z_T^T), normalized to unit Frobenius norm
            let eigs: Vec<f64> = p.log_eigs.iter().map(|l| l / (2.0 * len as f64)).collect();
            let norm = eigs.iter().map(|e| e * e).sum::<f64>().sqrt();
            if norm <= BALLISTIC_THRESHOLD / 2.0 {
                return Err(Error::NotBallistic { a_hat, threshold: BALLISTIC_THRESHOLD });
            }
            Ok(LimitDirection {
                horofunction: Horofunction::busemann(
                    space,
                    BoundaryDirection::spd_from_eigenform(p.basis.clone(), eigs)?,
                )?,
                notes: vec![format!("direction from log(Z_T Z_T^T)/(2T), norm {norm:.5}")],
            })
        }
    }
}

/// Convergence record of -h(Z_n x0)/n toward A.
#[derive(Clone, Debug)]
pub struct LlnReport {
    /// (n, -h(Z_n x0)/n) at logarithmically spaced n.
    pub series: Vec<(usize, f64)>,
    pub terminal_deviation: f64,
    pub a_used: f64,
    pub horofunction: String,
    /// max over the series of -h(Z_n x0)/n - a(n)/n; |h| <= d forces this
    /// to be at most ~0 up to evaluation tolerance.
    pub max_bound_violation: f64,
}

pub fn check_lln(traj: &Trajectory, h: &Horofunction, a: f64) -> Result<LlnReport> {
    if traj.space() != h.space() {
        return Err(Error::validation("horofunction and trajectory spaces differ"));
    }
    let grid = log_spaced(traj.len(), 24);
    let mut series = Vec::with_capacity(grid.len());
    let mut max_violation = f64::NEG_INFINITY;
    for &n in &grid {
        let z = traj.orbit_point(n)?;
        let value = -eval(h, &z)? / n as f64;
        max_violation = max_violation.max(value - traj.radial(n)? / n as f64);
        series.push((n, value));
    }
    let terminal = series.last().expect("grid nonempty").1;
    Ok(LlnReport {
        series,
        terminal_deviation: (terminal - a).abs(),
        a_used: a,
        horofunction: h.describe(),
        max_bound_violation: max_violation,
    })
}

/// How the good-time scan walks the k range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GoodTimeScanMode {
    /// Every k in [K, n]; O(T^2) with early exit.
    Exact,
    /// k on a geometric grid (plus n itself); approximate, for T > 1e5.
    SubsampledGeometric { ratio: f64 },
}

/// Good times of the subadditive ergodic lemma: n is good when
/// a(n) - d(Z_k x0, Z_n x0) >= (A - eps) k for every K <= k <= n.
#[derive(Clone, Debug)]
pub struct GoodTimeReport {
    pub eps: f64,
    pub a_used: f64,
    pub k_min: usize,
    pub good_times: Vec<usize>,
    pub density: f64,
    /// Per good time, the minimal margin over k.
    pub min_margins: Vec<f64>,
    pub mode: GoodTimeScanMode,
}

pub fn find_good_times(
    traj: &Trajectory,
    eps: f64,
    a: f64,
    k_min: usize,
    mode: GoodTimeScanMode,
) -> Result<GoodTimeReport> {
    if eps <= 0.0 {
        return Err(Error::validation("eps must be positive"));
    }
    if k_min < 1 {
        return Err(Error::validation("K must be >= 1"));
    }
    let len = traj.len();
    let mut good_times = Vec::new();
    let mut min_margins = Vec::new();
    let rate = a - eps;
    let mut pair_buffer: Vec<f64> = Vec::new();
    for n in k_min..=len {
        let a_n = traj.radial(n)?;
        let margin = match mode {
            GoodTimeScanMode::Exact => {
                scan_exact(traj, n, k_min, a_n, rate, &mut pair_buffer)?
            }
            GoodTimeScanMode::SubsampledGeometric { ratio } => {
                scan_subsampled(traj, n, k_min, a_n, rate, ratio)?
            }
        };
        if let Some(m) = margin {
            good_times.push(n);
            min_margins.push(m);
        }
    }
    Ok(GoodTimeReport {
        eps,
        a_used: a,
        k_min,
        density: good_times.len() as f64 / len as f64,
        good_times,
        min_margins,
        mode,
    })
}

/// Minimal good-time margin of a single time n, or None when violated;
/// shares the exact scan with `find_good_times`.
pub fn good_time_margin(
    traj: &Trajectory,
    n: usize,
    eps: f64,
    a: f64,
    k_min: usize,
) -> Result<Option<f64>> {
    let mut buffer = Vec::new();
    scan_exact(traj, n, k_min, traj.radial(n)?, a - eps, &mut buffer)
}

/// Exact scan over k with early exit on the first violation. For tree
/// trajectories the pair distances d(Z_k, Z_n) for k = n-1 .. K are built
/// incrementally first (reduced suffix products, O(1) amortized per k).
fn scan_exact(
    traj: &Trajectory,
    n: usize,
    k_min: usize,
    a_n: f64,
    rate: f64,
    buffer: &mut Vec<f64>,
) -> Result<Option<f64>> {
    let is_tree = matches!(traj.space().kind(), SpaceKind::FreeGroup { .. });
    if is_tree {
        // buffer[j] = d(Z_{k} x0, Z_n x0) for k = n - 1 - j
        buffer.clear();
        let mut suffix: Vec<i32> = Vec::new(); // reduced word of g_{k+1}..g_n, stored reversed
        for k in (k_min..n).rev() {
            let inc = traj.word_increment(k + 1)?;
            for &l in inc.iter().rev() {
                if suffix.last() == Some(&-l) {
                    suffix.pop();
                } else {
                    suffix.push(l);
                }
            }
            buffer.push(suffix.len() as f64);
        }
    }
    let mut min_margin = f64::INFINITY;
    for k in k_min..=n {
        let d = if k == n {
            0.0
        } else if is_tree {
            buffer[n - 1 - k]
        } else {
            traj.pair_distance(k, n)?
        };
        let margin = a_n - d - rate * k as f64;
        if margin < 0.0 {
            return Ok(None);
        }
        min_margin = min_margin.min(margin);
    }
    Ok(Some(min_margin))
}

fn scan_subsampled(
    traj: &Trajectory,
    n: usize,
    k_min: usize,
    a_n: f64,
    rate: f64,
    ratio: f64,
) -> Result<Option<f64>> {
    if ratio <= 1.0 {
        return Err(Error::validation("subsample ratio must exceed 1"));
    }
    let mut min_margin = f64::INFINITY;
    let mut k = k_min as f64;
    let mut last = 0usize;
    loop {
        let ki = (k as usize).clamp(k_min, n);
        if ki != last {
            let d = traj.pair_distance(ki, n)?;
            let margin = a_n - d - rate * ki as f64;
            if margin < 0.0 {
                return Ok(None);
            }
            min_margin = min_margin.min(margin);
            last = ki;
        }
        if ki == n {
            break;
        }
        k *= ratio;
        if k as usize >= n {
            k = n as f64;
        }
    }
    Ok(Some(min_margin))
}

/// Independent re-verification of one reported good time: replays the
/// increments into suffix products through the group operations instead of
/// reading cached orbit data (graph spaces), or recomputes every pair
/// distance afresh (continuous spaces). Returns the minimal margin.
pub fn verify_good_time(
    traj: &Trajectory,
    n: usize,
    eps: f64,
    a: f64,
    k_min: usize,
) -> Result<f64> {
    let rate = a - eps;
    let a_n = traj.radial(n)?;
    let mut min_margin = a_n - rate * n as f64;
    match traj.space().kind() {
        SpaceKind::ZdWord { dim } => {
            let mut suffix = vec![0i64; *dim];
            for k in (k_min..n).rev() {
                if let IsometryElement::Translation(t) = traj.increment(k + 1)? {
                    for i in 0..*dim {
                        suffix[i] += t[i];
                    }
                }
                let d = suffix.iter().map(|x| x.abs()).sum::<i64>() as f64;
                min_margin = min_margin.min(a_n - d - rate * k as f64);
            }
        }
        SpaceKind::FreeGroup { .. } => {
            let mut suffix: Vec<i32> = Vec::new();
            for k in (k_min..n).rev() {
                let inc = traj.word_increment(k + 1)?;
                for &l in inc.iter().rev() {
                    if suffix.last() == Some(&-l) {
                        suffix.pop();
                    } else {
                        suffix.push(l);
                    }
                }
                min_margin = min_margin.min(a_n - suffix.len() as f64 - rate * k as f64);
            }
        }
        _ => {
            for k in k_min..n {
                let d = traj.pair_distance(k, n)?;
                min_margin = min_margin.min(a_n - d - rate * k as f64);
            }
        }
    }
    Ok(min_margin)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayApproxVerdict {
    /// Premise tail exceeded the allowed bound; no claim on the conclusion.
    PremiseFails,
    ConclusionHolds,
    ConclusionFails,
}

/// Check of the ray-approximation implication: if d(x_n, gamma(A n))/n stays
/// below delta on the tail, then -h_gamma(x_n)/n must be within delta + tol
/// of A there.
#[derive(Clone, Debug)]
pub struct RayApproxReport {
    pub premise: Vec<(usize, f64)>,
    pub conclusion: Vec<(usize, f64)>,
    pub verdict: RayApproxVerdict,
    /// Observed premise bound on the tail.
    pub delta: f64,
    pub tail_start: usize,
}

pub fn ray_approx_check(
    space: &PointedSpace,
    points: &[SpacePoint],
    ray: &BoundaryDirection,
    a: f64,
    premise_bound: f64,
    tol: f64,
) -> Result<RayApproxReport> {
    if points.is_empty() {
        return Err(Error::validation("ray approximation needs at least one point"));
    }
    ray.validate(space)?;
    let h = Horofunction::busemann(space, ray.clone())?;
    let mut premise = Vec::with_capacity(points.len());
    let mut conclusion = Vec::with_capacity(points.len());
    for (idx, x) in points.iter().enumerate() {
        let n = idx + 1;
        let gamma = crate::horo::ray_point(space, ray, a * n as f64)?;
        premise.push((n, crate::spaces::distance(space, x, &gamma)? / n as f64));
        conclusion.push((n, -eval(&h, x)? / n as f64));
    }
    let tail_start = (3 * points.len()) / 4;
    let delta = premise[tail_start..]
        .iter()
        .map(|(_, v)| *v)
        .fold(0.0_f64, f64::max);
    let verdict = if delta > premise_bound {
        RayApproxVerdict::PremiseFails
    } else if conclusion[tail_start..].iter().all(|(_, c)| (c - a).abs() <= delta + tol) {
        RayApproxVerdict::ConclusionHolds
    } else {
        RayApproxVerdict::ConclusionFails
    };
    Ok(RayApproxReport { premise, conclusion, verdict, delta, tail_start: tail_start + 1 })
}

/// Boundary-point estimates xi_n of a half-plane trajectory at log-spaced n;
/// successive differences must vanish for a ballistic walk (the shadow
/// corollary's convergence, checked without building a boundary topology).
pub fn halfplane_boundary_estimates(traj: &Trajectory) -> Result<Vec<(usize, f64)>> {
    if !matches!(traj.space().kind(), SpaceKind::HyperbolicPlane) {
        return Err(Error::validation("boundary estimates apply to h2 trajectories"));
    }
    let mut out = Vec::new();
    for &n in &log_spaced(traj.len(), 32) {
        if let SpacePoint::HalfPlane { re, im } = traj.orbit_point(n)? {
            if let Some(x) = halfplane::boundary_projection(re, im) {
                out.push((n, x));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::{sample_walk, IncrementLaw};

    fn z1() -> PointedSpace {
        PointedSpace::new(SpaceKind::ZdWord { dim: 1 }).unwrap()
    }

    fn z2() -> PointedSpace {
        PointedSpace::new(SpaceKind::ZdWord { dim: 2 }).unwrap()
    }

    fn det_plus_e1(dim: usize) -> CocycleDriver {
        let mut v = vec![0i64; dim];
        v[0] = 1;
        CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![IsometryElement::Translation(v)],
            probabilities: vec![1.0],
        })
    }

    fn biased_z1(p: f64) -> CocycleDriver {
        CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![
                IsometryElement::Translation(vec![1]),
                IsometryElement::Translation(vec![-1]),
            ],
            probabilities: vec![p, 1.0 - p],
        })
    }

    #[test]
    fn deterministic_drift_is_exact() {
        let est = estimate_drift(&z2(), &det_plus_e1(2), 1000, &[0]).unwrap();
        assert_eq!(est.a_hat, 1.0);
        assert_eq!(est.ci_half_width, 0.0);
    }

    #[test]
    fn biased_walk_drift() {
        let seeds: Vec<u64> = (0..8).collect();
        let est = estimate_drift(&z1(), &biased_z1(0.7), 20_000, &seeds).unwrap();
        assert!((est.a_hat - 0.4).abs() < 0.02, "a_hat {}", est.a_hat);
        // window consistency: [T/2,T] vs [3T/4,T] within 3 CI
        let tight = estimate_drift_window(&z1(), &biased_z1(0.7), 20_000, &seeds, 0.75).unwrap();
        assert!(
            (est.a_hat - tight.a_hat).abs() < 3.0 * est.ci_half_width.max(1e-4),
            "windows {} vs {} (ci {})",
            est.a_hat,
            tight.a_hat,
            est.ci_half_width
        );
    }

    #[test]
    fn limit_horofunction_biased_z() {
        let traj = sample_walk(&z1(), &biased_z1(0.7), 20_000, 1).unwrap();
        let dir = limit_horofunction(&traj, 0.4).unwrap();
        // signature (+1): h(z) = -z
        let v = eval(&dir.horofunction, &SpacePoint::Lattice(vec![5])).unwrap();
        assert_eq!(v, -5.0);
    }

    #[test]
    fn limit_horofunction_deterministic_e1() {
        let traj = sample_walk(&z2(), &det_plus_e1(2), 2000, 0).unwrap();
        let dir = limit_horofunction(&traj, 1.0).unwrap();
        // signature (+1, 0): h((3,-2)) = -3 + 2 = -1
        let v = eval(&dir.horofunction, &SpacePoint::Lattice(vec![3, -2])).unwrap();
        assert_eq!(v, -1.0);
    }

    #[test]
    fn not_ballistic_refusal() {
        let traj = sample_walk(&z1(), &biased_z1(0.5), 5000, 2).unwrap();
        assert!(matches!(
            limit_horofunction(&traj, 1e-4),
            Err(Error::NotBallistic { .. })
        ));
    }

    #[test]
    fn check_lln_deterministic() {
        let traj = sample_walk(&z2(), &det_plus_e1(2), 2000, 0).unwrap();
        let h = Horofunction::busemann(&z2(), BoundaryDirection::lattice(vec![1, 0]).unwrap())
            .unwrap();
        let report = check_lln(&traj, &h, 1.0).unwrap();
        for (_, v) in &report.series {
            assert_eq!(*v, 1.0);
        }
        assert_eq!(report.terminal_deviation, 0.0);
        assert!(report.max_bound_violation <= 1e-9);
    }

    #[test]
    fn good_times_deterministic_density_one() {
        let traj = sample_walk(&z2(), &det_plus_e1(2), 1000, 0).unwrap();
        let report = find_good_times(&traj, 0.1, 1.0, 1, GoodTimeScanMode::Exact).unwrap();
        assert_eq!(report.good_times.len(), 1000);
        assert!((report.density - 1.0).abs() < 1e-12);
        assert!(report.min_margins.iter().all(|m| *m >= 0.0));
    }

    #[test]
    fn good_times_biased_walk_sound() {
        let traj = sample_walk(&z1(), &biased_z1(0.7), 2000, 3).unwrap();
        let report = find_good_times(&traj, 0.05, 0.4, 50, GoodTimeScanMode::Exact).unwrap();
        assert!(!report.good_times.is_empty());
        for (&n, &m) in report.good_times.iter().zip(&report.min_margins).take(50) {
            assert!(m >= 0.0);
            let re = verify_good_time(&traj, n, 0.05, 0.4, 50).unwrap();
            assert!(re >= -1e-9, "re-verification margin {re} at n={n}");
            assert!((re - m).abs() <= 1e-9, "margins disagree: {m} vs {re}");
        }
    }

    #[test]
    fn good_times_degenerate_drift_reports_without_asserting() {
        // symmetric walk, A = 0: the bound a(n) - d >= -eps k is weak by
        // construction; the scan must simply report whatever density occurs
        let traj = sample_walk(&z1(), &biased_z1(0.5), 2000, 7).unwrap();
        let report = find_good_times(&traj, 0.1, 0.0, 1, GoodTimeScanMode::Exact).unwrap();
        assert!(report.density >= 0.0 && report.density <= 1.0);
        for (&n, &m) in report.good_times.iter().zip(&report.min_margins).take(20) {
            let re = verify_good_time(&traj, n, 0.1, 0.0, 1).unwrap();
            assert!((re - m).abs() <= 1e-9);
        }
    }

    #[test]
    fn good_times_tree_scan_matches_generic() {
        let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
        let law = IncrementLaw::uniform_generators(&f2).unwrap();
        let traj = sample_walk(&f2, &CocycleDriver::iid(law), 400, 9).unwrap();
        let report = find_good_times(&traj, 0.1, 0.5, 10, GoodTimeScanMode::Exact).unwrap();
        for (&n, &m) in report.good_times.iter().zip(&report.min_margins) {
            let re = verify_good_time(&traj, n, 0.1, 0.5, 10).unwrap();
            assert!((re - m).abs() <= 1e-9, "n={n}: {m} vs {re}");
        }
    }

    #[test]
    fn ray_approx_sqrt_perturbation() {
        // x_n = n e1 + floor(sqrt n) e2 against the e1-axis ray, A = 1
        let space = z2();
        let n_max = 10_000usize;
        let points: Vec<SpacePoint> = (1..=n_max)
            .map(|n| SpacePoint::Lattice(vec![n as i64, (n as f64).sqrt().floor() as i64]))
            .collect();
        let ray = BoundaryDirection::lattice(vec![1, 0]).unwrap();
        let report = ray_approx_check(&space, &points, &ray, 1.0, 0.1, 1e-9).unwrap();
        assert_eq!(report.verdict, RayApproxVerdict::ConclusionHolds);
        let (_, last_premise) = *report.premise.last().unwrap();
        assert!(last_premise < 0.02, "premise tail {last_premise}");
        let (_, last_conclusion) = *report.conclusion.last().unwrap();
        assert!((last_conclusion - 1.0).abs() < 0.02);
    }

    #[test]
    fn ray_approx_exact_ray() {
        let space = z1();
        let points: Vec<SpacePoint> =
            (1..=100).map(|n| SpacePoint::Lattice(vec![n as i64])).collect();
        let ray = BoundaryDirection::lattice(vec![1]).unwrap();
        let report = ray_approx_check(&space, &points, &ray, 1.0, 0.1, 1e-9).unwrap();
        assert_eq!(report.verdict, RayApproxVerdict::ConclusionHolds);
        assert!(report.premise.iter().all(|(_, v)| *v == 0.0));
        assert!(report.conclusion.iter().all(|(_, v)| *v == 1.0));
    }

    #[test]
    fn ray_approx_adversarial_premise_fails() {
        let space = z2();
        let points: Vec<SpacePoint> =
            (1..=100).map(|n| SpacePoint::Lattice(vec![0, n as i64])).collect();
        let ray = BoundaryDirection::lattice(vec![1, 0]).unwrap();
        let report = ray_approx_check(&space, &points, &ray, 1.0, 0.5, 1e-9).unwrap();
        assert_eq!(report.verdict, RayApproxVerdict::PremiseFails);
        assert!(report.delta >= 1.0);
    }
}
