//! Epsilon-shadows U_eps(y) = { z : d(x0,y) + d(y,z) <= d(x0,z) + eps d(x0,y) },
//! the equivalent horofunction inequality Phi(z)(y) <= (eps - 1) d(x0, y),
//! and the intersection-witness machinery: a ballistic trajectory eventually
//! has a point inside every shadow U_eps(Z_k x0), N <= k <= M.

use crate::error::{Error, Result};
use crate::horo::{eval, phi_embed};
use crate::lln::BALLISTIC_THRESHOLD;
use crate::spaces::{distance, PointedSpace, SpaceKind, SpacePoint};
use crate::walks::Trajectory;

/// Validate the shadow parameter: eps = 0 gives degenerate, possibly empty
/// shadows and the intersection statement fails there; eps >= 1 makes the
/// shadow trivial.
fn validate_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation(format!("shadow parameter must be in (0, 1), got {eps}")));
    }
    Ok(())
}

/// A shadow membership query.
#[derive(Clone, Debug)]
pub struct ShadowQuery {
    pub y: SpacePoint,
    pub eps: f64,
}

/// Membership of z in U_eps(y) straight from the defining inequality.
/// Returns the verdict and the slack margin
/// d(x0,z) + eps d(x0,y) - d(x0,y) - d(y,z).
pub fn in_shadow(
    space: &PointedSpace,
    y: &SpacePoint,
    z: &SpacePoint,
    eps: f64,
) -> Result<(bool, f64)> {
    validate_eps(eps)?;
    let x0 = space.basepoint();
    let dy = distance(space, &x0, y)?;
    let dz = distance(space, &x0, z)?;
    let dyz = distance(space, y, z)?;
    let margin = dz + eps * dy - dy - dyz;
    Ok((margin >= 0.0, margin))
}

/// The same membership through the embedded horofunction:
/// z in U_eps(y) iff Phi(z)(y) <= (eps - 1) d(x0, y).
pub fn shadow_via_horofunction(
    space: &PointedSpace,
    y: &SpacePoint,
    z: &SpacePoint,
    eps: f64,
) -> Result<bool> {
    validate_eps(eps)?;
    let x0 = space.basepoint();
    let phi = phi_embed(space, z)?;
    let value = eval(&phi, y)?;
    Ok(value <= (eps - 1.0) * distance(space, &x0, y)?)
}

/// Parameters chosen by the constructive intersection proof: delta from
/// 2 delta / (A + delta) < eps, the good-time cutoff K for "eps" = delta,
/// and N past both K and the last violation of a(k) < (A + delta) k.
#[derive(Clone, Copy, Debug)]
pub struct StartTimeSuggestion {
    pub start_n: usize,
    pub k_cutoff: usize,
    pub delta: f64,
}

pub fn suggest_start_time(
    traj: &Trajectory,
    eps: f64,
    a_hat: f64,
) -> Result<StartTimeSuggestion> {
    validate_eps(eps)?;
    if a_hat <= BALLISTIC_THRESHOLD {
        return Err(Error::NotBallistic { a_hat, threshold: BALLISTIC_THRESHOLD });
    }
    // largest admissible delta is eps A / (2 - eps); back off by 0.9
    let delta = 0.9 * eps * a_hat / (2.0 - eps);
    debug_assert!(2.0 * delta / (a_hat + delta) < eps);
    let len = traj.len();
    // cutoff estimate: probe times in the tail and take the largest k whose
    // good-time margin fails there; good times before an early dip of the
    // walk must not certify a too-small K, hence tail probes only
    let mut candidate = 1usize;
    for i in 0..8usize {
        let n = len / 2 + i * (len - len / 2 - 1) / 7;
        if let Some(k) = max_failing_k(traj, n, delta, a_hat)? {
            candidate = candidate.max(k + 1);
        }
    }
    // verify that good times actually occur in the tail at this cutoff
    let mut k_cutoff = None;
    let mut k = candidate;
    while k <= len / 2 {
        let start = (len / 2).max(k);
        let window_end = (start + 512).min(len);
        if first_good_time(traj, delta, a_hat, k, start, window_end)?.is_some() {
            k_cutoff = Some(k);
            break;
        }
        k *= 2;
    }
    let k_cutoff = k_cutoff.ok_or_else(|| {
        Error::numerical("no good times observed at any cutoff; trajectory too short for delta")
    })?;
    // last violation of a(k) < (A + delta) k
    let rate = a_hat + delta;
    let mut last_violation = 0usize;
    for k in 1..=len {
        if traj.radial(k)? >= rate * k as f64 {
            last_violation = k;
        }
    }
    if last_violation >= len {
        return Err(Error::numerical(
            "a(k) < (A + delta) k never stabilized within the trajectory",
        ));
    }
    Ok(StartTimeSuggestion {
        start_n: k_cutoff.max(last_violation + 1),
        k_cutoff,
        delta,
    })
}

/// Largest k in [1, n] violating the good-time inequality at n, or None when
/// n is a good time down to k = 1. Tree trajectories build the reduced
/// suffix products once (O(n) total); other spaces read cached orbit data.
fn max_failing_k(traj: &Trajectory, n: usize, eps: f64, a: f64) -> Result<Option<usize>> {
    let rate = a - eps;
    let a_n = traj.radial(n)?;
    let mut worst: Option<usize> = None;
    let mut check = |k: usize, d: f64| {
        if a_n - d - rate * (k as f64) < 0.0 && worst.map_or(true, |w| k > w) {
            worst = Some(k);
        }
    };
    check(n, 0.0);
    if matches!(traj.space().kind(), SpaceKind::FreeGroup { .. }) {
        let mut suffix: Vec<i32> = Vec::new();
        for k in (1..n).rev() {
            for &l in traj.word_increment(k + 1)?.iter().rev() {
                if suffix.last() == Some(&-l) {
                    suffix.pop();
                } else {
                    suffix.push(l);
                }
            }
            check(k, suffix.len() as f64);
        }
    } else {
        for k in 1..n {
            check(k, traj.pair_distance(k, n)?);
        }
    }
    Ok(worst)
}

/// First good time in [start, window_end] for cutoff k_min, or None.
fn first_good_time(
    traj: &Trajectory,
    eps: f64,
    a: f64,
    k_min: usize,
    start: usize,
    window_end: usize,
) -> Result<Option<usize>> {
    for n in start.max(k_min)..=window_end {
        if crate::lln::good_time_margin(traj, n, eps, a, k_min)?.is_some() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// A time n > M whose orbit point lies in every shadow U_eps(Z_k x0) for
/// k in [N, M], with the per-k membership margins.
#[derive(Clone, Debug)]
pub struct IntersectionWitness {
    pub eps: f64,
    pub start_n: usize,
    pub end_m: usize,
    pub witness: usize,
    pub margins: Vec<f64>,
    pub horizon: usize,
}

/// Search outcome: the proof guarantees a witness asymptotically, the search
/// is bounded by the horizon and reports near-misses instead of looping.
#[derive(Clone, Debug)]
pub enum WitnessSearch {
    Found(IntersectionWitness),
    NotFound {
        /// max over scanned n of the minimal margin observed for that n
        /// (margins past the first violated k are not examined).
        best_n: usize,
        best_min_margin: f64,
        near_misses: Vec<(usize, f64)>,
    },
}

/// Exhaustive scan of n in (M, horizon] with early exit on the first
/// violated k.
pub fn find_intersection_witness(
    traj: &Trajectory,
    eps: f64,
    start_n: usize,
    end_m: usize,
    horizon: usize,
) -> Result<WitnessSearch> {
    validate_eps(eps)?;
    if start_n < 1 || start_n > end_m || end_m > horizon || horizon > traj.len() {
        return Err(Error::IndexOutOfRange(format!(
            "need 1 <= N({start_n}) <= M({end_m}) <= horizon({horizon}) <= T({})",
            traj.len()
        )));
    }
    let a_k: Vec<f64> = (start_n..=end_m)
        .map(|k| traj.radial(k))
        .collect::<Result<_>>()?;
    let mut pair = PairDistances::prepare(traj, start_n, end_m)?;
    let mut best: Option<(usize, f64)> = None;
    let mut near_misses = Vec::new();
    for n in (end_m + 1)..=horizon {
        pair.advance(traj, n)?;
        let a_n = traj.radial(n)?;
        let mut min_margin = f64::INFINITY;
        let mut margins = Vec::with_capacity(end_m - start_n + 1);
        let mut violated = false;
        for (idx, k) in (start_n..=end_m).enumerate() {
            let margin = a_n + eps * a_k[idx] - a_k[idx] - pair.distance(traj, idx, k, n)?;
            min_margin = min_margin.min(margin);
            margins.push(margin);
            if margin < 0.0 {
                violated = true;
                break;
            }
        }
        if !violated {
            return Ok(WitnessSearch::Found(IntersectionWitness {
                eps,
                start_n,
                end_m,
                witness: n,
                margins,
                horizon,
            }));
        }
        near_misses.push((n, min_margin));
        if best.map_or(true, |(_, b)| min_margin > b) {
            best = Some((n, min_margin));
        }
    }
    let (best_n, best_min_margin) = best.expect("horizon > M leaves at least one n");
    Ok(WitnessSearch::NotFound { best_n, best_min_margin, near_misses })
}

/// Incremental pair distances d(Z_k x0, Z_n x0) for the fixed band
/// k in [N, M] as n advances. Tree trajectories keep the reduced words
/// Z_k^{-1} Z_n and extend them by one increment per step; other spaces read
/// their cached orbit points.
enum PairDistances {
    TreeSuffixes(Vec<Vec<i32>>),
    Direct,
}

impl PairDistances {
    fn prepare(traj: &Trajectory, start_n: usize, end_m: usize) -> Result<PairDistances> {
        match traj.space().kind() {
            SpaceKind::FreeGroup { .. } => {
                // w_k = Z_k^{-1} Z_M, built backward with front insertions
                let mut words: Vec<Vec<i32>> = vec![Vec::new(); end_m - start_n + 1];
                let mut suffix: std::collections::VecDeque<i32> = std::collections::VecDeque::new();
                for k in (start_n..end_m).rev() {
                    for &l in traj.word_increment(k + 1)?.iter().rev() {
                        if suffix.front() == Some(&-l) {
                            suffix.pop_front();
                        } else {
                            suffix.push_front(l);
                        }
                    }
                    words[k - start_n] = suffix.iter().copied().collect();
                }
                Ok(PairDistances::TreeSuffixes(words))
            }
            _ => Ok(PairDistances::Direct),
        }
    }

    fn advance(&mut self, traj: &Trajectory, n: usize) -> Result<()> {
        if let PairDistances::TreeSuffixes(words) = self {
            let inc = traj.word_increment(n)?;
            for w in words.iter_mut() {
                for &l in &inc {
                    if w.last() == Some(&-l) {
                        w.pop();
                    } else {
                        w.push(l);
                    }
                }
            }
        }
        Ok(())
    }

    fn distance(&self, traj: &Trajectory, idx: usize, k: usize, n: usize) -> Result<f64> {
        match self {
            PairDistances::TreeSuffixes(words) => Ok(words[idx].len() as f64),
            PairDistances::Direct => traj.pair_distance(k, n),
        }
    }
}
