//! Ergodic cocycles Z_n = g_1 g_2 ... g_n over the four spaces: i.i.d.
//! increments (random walks) and Markov-modulated increments (strictly
//! ergodic, non-i.i.d.), with reproducible seeding and cached orbit data.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::matrixcocycle::QrCocycleState;
use crate::rng::{sample_index, stream_rng, unit, WalkRng};
use crate::spaces::{
    self, halfplane::Moebius, spd::SpdPoint, word, IsometryElement, PointedSpace, SpaceKind,
    SpacePoint,
};

/// Checkpoint stride for partial products; full values are recomputed from
/// the nearest checkpoint plus replayed increments.
pub const DEFAULT_STRIDE: usize = 64;

/// Distribution of one increment.
#[derive(Clone, Debug)]
pub enum IncrementLaw {
    /// Finitely supported law.
    Finite { support: Vec<IsometryElement>, probabilities: Vec<f64> },
    /// 2x2 rotation by an angle uniform on [0, 2pi).
    UniformRotation2,
    /// R(theta) * diag(e^r, e^-r) with theta uniform on [0, 2pi).
    RotationTimesDiag2 { log_ratio: f64 },
}

impl IncrementLaw {
    /// Uniform law on the standard generators and their inverses.
    pub fn uniform_generators(space: &PointedSpace) -> Result<IncrementLaw> {
        let support: Vec<IsometryElement> = match space.kind() {
            SpaceKind::ZdWord { dim } => (0..*dim)
                .flat_map(|i| {
                    let mut plus = vec![0i64; *dim];
                    plus[i] = 1;
                    let mut minus = vec![0i64; *dim];
                    minus[i] = -1;
                    [IsometryElement::Translation(plus), IsometryElement::Translation(minus)]
                })
                .collect(),
            SpaceKind::FreeGroup { rank } => (1..=*rank as i32)
                .flat_map(|i| [IsometryElement::Word(vec![i]), IsometryElement::Word(vec![-i])])
                .collect(),
            other => {
                return Err(Error::validation(format!(
                    "no canonical generating set for {}",
                    other.name()
                )))
            }
        };
        let n = support.len();
        Ok(IncrementLaw::Finite { support, probabilities: vec![1.0 / n as f64; n] })
    }

    pub fn validate(&self, space: &PointedSpace) -> Result<()> {
        match self {
            IncrementLaw::Finite { support, probabilities } => {
                if support.is_empty() {
                    return Err(Error::validation("law support is empty"));
                }
                if support.len() != probabilities.len() {
                    return Err(Error::validation("support and probabilities differ in length"));
                }
                let mut sum = 0.0;
                for &p in probabilities {
                    if !(p >= 0.0) {
                        return Err(Error::validation(format!("negative probability {p}")));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::validation(format!(
                        "probabilities sum to {sum}, expected 1 within 1e-12"
                    )));
                }
                for g in support {
                    space.validate_isometry(g)?;
                }
                Ok(())
            }
            IncrementLaw::UniformRotation2 | IncrementLaw::RotationTimesDiag2 { .. } => {
                match space.kind() {
                    SpaceKind::PosMatrices { size: 2 } => Ok(()),
                    other => Err(Error::validation(format!(
                        "parametric matrix law needs pos:2, got {}",
                        other.name()
                    ))),
                }
            }
        }
    }

    fn draw(&self, rng: &mut WalkRng) -> IncrementRecord {
        match self {
            IncrementLaw::Finite { probabilities, .. } => {
                IncrementRecord::Index(sample_index(probabilities, rng) as u32)
            }
            IncrementLaw::UniformRotation2 | IncrementLaw::RotationTimesDiag2 { .. } => {
                IncrementRecord::Angle(2.0 * std::f64::consts::PI * unit(rng))
            }
        }
    }

    fn materialize(&self, record: &IncrementRecord) -> Result<IsometryElement> {
        match (self, record) {
            (IncrementLaw::Finite { support, .. }, IncrementRecord::Index(i)) => support
                .get(*i as usize)
                .cloned()
                .ok_or_else(|| Error::validation("increment index outside support")),
            (IncrementLaw::UniformRotation2, IncrementRecord::Angle(t)) => {
                Ok(IsometryElement::Linear(rotation2(*t)))
            }
            (IncrementLaw::RotationTimesDiag2 { log_ratio }, IncrementRecord::Angle(t)) => {
                Ok(IsometryElement::Linear(
                    rotation2(*t).mul(&Mat::diag(&[log_ratio.exp(), (-log_ratio).exp()])),
                ))
            }
            _ => Err(Error::validation("increment record does not match the law")),
        }
    }
}

fn rotation2(theta: f64) -> Mat {
    Mat::from_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]])
}

/// How the increment sequence is generated.
#[derive(Clone, Debug)]
pub enum CocycleDriver {
    /// Independent identically distributed increments: a random walk.
    Iid { law: IncrementLaw },
    /// Markov-modulated increments: the chain state advances first, then that
    /// state's law is sampled. Realizes a strictly ergodic non-i.i.d. system.
    Markov {
        transition: Vec<Vec<f64>>,
        state_laws: Vec<IncrementLaw>,
        initial: Vec<f64>,
    },
}

impl CocycleDriver {
    pub fn iid(law: IncrementLaw) -> CocycleDriver {
        CocycleDriver::Iid { law }
    }

    pub fn validate(&self, space: &PointedSpace) -> Result<()> {
        match self {
            CocycleDriver::Iid { law } => law.validate(space),
            CocycleDriver::Markov { transition, state_laws, initial } => {
                let k = transition.len();
                if k == 0 {
                    return Err(Error::validation("markov driver needs at least one state"));
                }
                if state_laws.len() != k || initial.len() != k {
                    return Err(Error::validation(
                        "markov driver: states, laws and initial distribution disagree in size",
                    ));
                }
                for row in transition {
                    if row.len() != k {
                        return Err(Error::validation("transition matrix is not square"));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 || row.iter().any(|p| !(*p >= 0.0)) {
                        return Err(Error::validation(format!(
                            "transition row sums to {sum}; rows must be stochastic within 1e-12"
                        )));
                    }
                }
                let init_sum: f64 = initial.iter().sum();
                if (init_sum - 1.0).abs() > 1e-12 || initial.iter().any(|p| !(*p >= 0.0)) {
                    return Err(Error::validation("initial distribution is not stochastic"));
                }
                if !strongly_connected(transition) {
                    return Err(Error::validation(
                        "markov chain is not irreducible (reachability closure incomplete)",
                    ));
                }
                for law in state_laws {
                    law.validate(space)?;
                }
                Ok(())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CocycleDriver::Iid { law } => match law {
                IncrementLaw::Finite { support, .. } => {
                    format!("iid finite support of size {}", support.len())
                }
                IncrementLaw::UniformRotation2 => "iid uniform rotations".to_string(),
                IncrementLaw::RotationTimesDiag2 { log_ratio } => {
                    format!("iid rotation x diag (log ratio {log_ratio})")
                }
            },
            CocycleDriver::Markov { transition, .. } => {
                format!("markov with {} states", transition.len())
            }
        }
    }
}

fn strongly_connected(transition: &[Vec<f64>]) -> bool {
    let k = transition.len();
    let reach = |forward: bool| -> Vec<bool> {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..k {
                let edge = if forward { transition[u][v] } else { transition[v][u] };
                if edge > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    reach(true).into_iter().all(|b| b) && reach(false).into_iter().all(|b| b)
}

/// Stationary distribution of an irreducible chain by power iteration.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Vec<f64> {
    let k = transition.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..100_000 {
        let mut next = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                next[j] += pi[i] * transition[i][j];
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-14 {
            break;
        }
    }
    pi
}

/// Reproducible record of one sampled increment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IncrementRecord {
    Index(u32),
    Angle(f64),
}

/// Streams increments from a driver with the seeded generator. Draw order is
/// fixed: Markov drivers draw the next state first, then the increment.
pub struct IncrementSampler<'a> {
    driver: &'a CocycleDriver,
    rng: WalkRng,
    state: Option<usize>,
}

impl<'a> IncrementSampler<'a> {
    pub fn new(driver: &'a CocycleDriver, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, stream);
        let state = match driver {
            CocycleDriver::Iid { .. } => None,
            CocycleDriver::Markov { initial, .. } => Some(sample_index(initial, &mut rng)),
        };
        Ok(IncrementSampler { driver, rng, state })
    }

    /// Advance one step; returns the record, the state it was drawn in (for
    /// Markov drivers), and the materialized isometry.
    pub fn next_increment(&mut self) -> Result<(IncrementRecord, Option<u16>, IsometryElement)> {
        match self.driver {
            CocycleDriver::Iid { law } => {
                let rec = law.draw(&mut self.rng);
                let g = law.materialize(&rec)?;
                Ok((rec, None, g))
            }
            CocycleDriver::Markov { transition, state_laws, .. } => {
                let cur = self.state.expect("markov sampler has a state");
                let next = sample_index(&transition[cur], &mut self.rng);
                self.state = Some(next);
                let law = &state_laws[next];
                let rec = law.draw(&mut self.rng);
                let g = law.materialize(&rec)?;
                Ok((rec, Some(next as u16), g))
            }
        }
    }

    /// Convenience for matrix cocycles.
    pub fn next_linear(&mut self) -> Result<Mat> {
        match self.next_increment()?.2 {
            IsometryElement::Linear(m) => Ok(m),
            _ => Err(Error::validation("driver does not produce matrix increments")),
        }
    }
}

/// Per-kind cached orbit data.
enum OrbitStore {
    Lattice { dim: usize, points: Vec<i64> },
    Words { arena: WordArena, node_at: Vec<u32> },
    HalfPlane { points: Vec<(f64, f64)>, partials: Vec<Moebius> },
    Spd { checkpoints: Vec<QrCocycleState> },
}

/// Arena of word states visited by a tree walk; each node is (parent, last
/// letter, depth), the root is node 0. Nodes are appended on every push, so
/// reconstruction of any visited word is a parent walk.
struct WordArena {
    parent: Vec<u32>,
    letter: Vec<i32>,
    depth: Vec<u32>,
}

impl WordArena {
    fn new() -> Self {
        WordArena { parent: vec![u32::MAX], letter: vec![0], depth: vec![0] }
    }

    fn push(&mut self, node: u32, letter: i32) -> u32 {
        if self.depth[node as usize] > 0 && self.letter[node as usize] == -letter {
            return self.parent[node as usize];
        }
        self.parent.push(node);
        self.letter.push(letter);
        self.depth.push(self.depth[node as usize] + 1);
        (self.parent.len() - 1) as u32
    }

    fn word(&self, mut node: u32) -> Vec<i32> {
        let mut out = Vec::with_capacity(self.depth[node as usize] as usize);
        while self.depth[node as usize] > 0 {
            out.push(self.letter[node as usize]);
            node = self.parent[node as usize];
        }
        out.reverse();
        out
    }
}

/// A seeded realization of the cocycle with cached orbit data: increments,
/// partial products at a stride, orbit points, and the radial distances
/// a(k) = d(Z_k x0, x0) for every k.
pub struct Trajectory {
    space: PointedSpace,
    driver: CocycleDriver,
    seed: u64,
    stream: u64,
    len: usize,
    stride: usize,
    records: Vec<IncrementRecord>,
    states: Option<Vec<u16>>,
    radial: Vec<f64>,
    orbit: OrbitStore,
}

/// Sample a trajectory of length `len` (stream id 0).
pub fn sample_walk(
    space: &PointedSpace,
    driver: &CocycleDriver,
    len: usize,
    seed: u64,
) -> Result<Trajectory> {
    sample_walk_stream(space, driver, len, seed, 0)
}

/// Sample a trajectory on an explicit (seed, stream) pair; distinct streams
/// are independent, so parallel trials can share one seed.
pub fn sample_walk_stream(
    space: &PointedSpace,
    driver: &CocycleDriver,
    len: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    if len < 1 {
        return Err(Error::validation("trajectory length must be >= 1"));
    }
    driver.validate(space)?;
    let mut sampler = IncrementSampler::new(driver, seed, stream)?;
    let mut records = Vec::with_capacity(len);
    let mut states: Option<Vec<u16>> =
        matches!(driver, CocycleDriver::Markov { .. }).then(|| Vec::with_capacity(len));
    let mut radial = Vec::with_capacity(len + 1);
    radial.push(0.0);
    let stride = DEFAULT_STRIDE;

    let mut orbit = match space.kind() {
        SpaceKind::ZdWord { dim } => {
            let mut points = Vec::with_capacity((len + 1) * dim);
            points.extend(std::iter::repeat(0i64).take(*dim));
            OrbitStore::Lattice { dim: *dim, points }
        }
        SpaceKind::FreeGroup { .. } => {
            OrbitStore::Words { arena: WordArena::new(), node_at: vec![0] }
        }
        SpaceKind::HyperbolicPlane => OrbitStore::HalfPlane {
            points: vec![(0.0, 1.0)],
            partials: vec![Moebius::IDENTITY],
        },
        SpaceKind::PosMatrices { size } => {
            OrbitStore::Spd { checkpoints: vec![QrCocycleState::new(*size)] }
        }
    };

    // running full products for the continuous group cases
    let mut running_moebius = Moebius::IDENTITY;
    let mut running_qr: Option<QrCocycleState> = match space.kind() {
        SpaceKind::PosMatrices { size } => Some(QrCocycleState::new(*size)),
        _ => None,
    };
    let mut lattice_current: Vec<i64> = match space.kind() {
        SpaceKind::ZdWord { dim } => vec![0; *dim],
        _ => Vec::new(),
    };
    let mut word_current: u32 = 0;

    for step in 1..=len {
        let (rec, state, g) = sampler.next_increment()?;
        records.push(rec);
        if let (Some(list), Some(s)) = (states.as_mut(), state) {
            list.push(s);
        }
        match (&mut orbit, &g) {
            (OrbitStore::Lattice { dim, points }, IsometryElement::Translation(t)) => {
                for i in 0..*dim {
                    lattice_current[i] += t[i];
                }
                points.extend_from_slice(&lattice_current);
                radial.push(lattice_current.iter().map(|x| x.abs()).sum::<i64>() as f64);
            }
            (OrbitStore::Words { arena, node_at }, IsometryElement::Word(w)) => {
                for &l in w {
                    word_current = arena.push(word_current, l);
                }
                node_at.push(word_current);
                radial.push(arena.depth[word_current as usize] as f64);
            }
            (OrbitStore::HalfPlane { points, partials }, IsometryElement::Moebius(m)) => {
                running_moebius = running_moebius.compose(m)?;
                if running_moebius.a.abs().max(running_moebius.b.abs())
                    .max(running_moebius.c.abs())
                    .max(running_moebius.d.abs())
                    > 1e150
                {
                    return Err(Error::numerical(format!(
                        "half-plane product entries exceeded 1e150 at step {step}; \
                         shorten the walk or lower the drift"
                    )));
                }
                let (re, im) = running_moebius.apply(0.0, 1.0)?;
                points.push((re, im));
                if step % stride == 0 {
                    partials.push(running_moebius);
                }
                radial.push(halfplane::distance_from_basepoint(re, im));
            }
            (OrbitStore::Spd { checkpoints }, IsometryElement::Linear(m)) => {
                let qr = running_qr.as_mut().expect("qr state for pos walks");
                qr.push(m)?;
                radial.push(qr.radial()?);
                if step % stride == 0 {
                    checkpoints.push(qr.clone());
                }
            }
            _ => {
                return Err(Error::KindMismatch {
                    expected: space.kind().name(),
                    got: "increment of another kind".to_string(),
                })
            }
        }
    }

    Ok(Trajectory {
        space: space.clone(),
        driver: driver.clone(),
        seed,
        stream,
        len,
        stride,
        records,
        states,
        radial,
        orbit,
    })
}

mod halfplane {
    pub fn distance_from_basepoint(re: f64, im: f64) -> f64 {
        super::spaces::halfplane::distance(0.0, 1.0, re, im)
    }
}

impl Trajectory {
    pub fn space(&self) -> &PointedSpace {
        &self.space
    }

    pub fn driver(&self) -> &CocycleDriver {
        &self.driver
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn records(&self) -> &[IncrementRecord] {
        &self.records
    }

    pub fn markov_states(&self) -> Option<&[u16]> {
        self.states.as_deref()
    }

    /// a(1..=T); a pure accessor into the cached values.
    pub fn radial_distances(&self) -> &[f64] {
        &self.radial[1..]
    }

    /// a(k) for 0 <= k <= T.
    pub fn radial(&self, k: usize) -> Result<f64> {
        self.radial
            .get(k)
            .copied()
            .ok_or_else(|| Error::IndexOutOfRange(format!("radial index {k} > {}", self.len)))
    }

    /// The increment g_k, 1-based.
    pub fn increment(&self, k: usize) -> Result<IsometryElement> {
        if k < 1 || k > self.len {
            return Err(Error::IndexOutOfRange(format!("increment index {k} not in 1..={}", self.len)));
        }
        let rec = &self.records[k - 1];
        self.law_for_step(k).materialize(rec)
    }

    fn law_for_step(&self, k: usize) -> &IncrementLaw {
        match &self.driver {
            CocycleDriver::Iid { law } => law,
            CocycleDriver::Markov { state_laws, .. } => {
                let s = self.states.as_ref().expect("markov trajectory stores states")[k - 1];
                &state_laws[s as usize]
            }
        }
    }

    /// The orbit point Z_k x0; recomputed from the nearest checkpoint where
    /// the store is strided.
    pub fn orbit_point(&self, k: usize) -> Result<SpacePoint> {
        if k > self.len {
            return Err(Error::IndexOutOfRange(format!("orbit index {k} > {}", self.len)));
        }
        match &self.orbit {
            OrbitStore::Lattice { dim, points } => {
                Ok(SpacePoint::Lattice(points[k * dim..(k + 1) * dim].to_vec()))
            }
            OrbitStore::Words { arena, node_at } => Ok(SpacePoint::Word(arena.word(node_at[k]))),
            OrbitStore::HalfPlane { points, .. } => {
                let (re, im) = points[k];
                Ok(SpacePoint::HalfPlane { re, im })
            }
            OrbitStore::Spd { .. } => Ok(SpacePoint::Spd(self.qr_state_at(k)?.orbit_spd()?)),
        }
    }

    /// The partial product Z_k as a group element. For pos:N this is the
    /// dense matrix and fails with `DenseOverflow` once out of f64 range; the
    /// stabilized state remains available through `qr_state_at`.
    pub fn partial_product(&self, k: usize) -> Result<IsometryElement> {
        if k > self.len {
            return Err(Error::IndexOutOfRange(format!("partial index {k} > {}", self.len)));
        }
        match &self.orbit {
            OrbitStore::Lattice { dim, points } => {
                Ok(IsometryElement::Translation(points[k * dim..(k + 1) * dim].to_vec()))
            }
            OrbitStore::Words { arena, node_at } => {
                Ok(IsometryElement::Word(arena.word(node_at[k])))
            }
            OrbitStore::HalfPlane { partials, .. } => {
                let base = k / self.stride;
                let mut acc = partials[base];
                for j in (base * self.stride + 1)..=k {
                    match self.increment(j)? {
                        IsometryElement::Moebius(m) => acc = acc.compose(&m)?,
                        _ => unreachable!(),
                    }
                }
                Ok(IsometryElement::Moebius(acc))
            }
            OrbitStore::Spd { .. } => Ok(IsometryElement::Linear(self.qr_state_at(k)?.dense()?)),
        }
    }

    /// Stabilized accumulation state for Z_k on pos:N trajectories.
    pub fn qr_state_at(&self, k: usize) -> Result<QrCocycleState> {
        let checkpoints = match &self.orbit {
            OrbitStore::Spd { checkpoints } => checkpoints,
            _ => {
                return Err(Error::validation(format!(
                    "qr_state_at applies to pos:N trajectories, not {}",
                    self.space.kind().name()
                )))
            }
        };
        if k > self.len {
            return Err(Error::IndexOutOfRange(format!("state index {k} > {}", self.len)));
        }
        let base = (k / self.stride).min(checkpoints.len() - 1);
        let mut state = checkpoints[base].clone();
        for j in (base * self.stride + 1)..=k {
            match self.increment(j)? {
                IsometryElement::Linear(m) => state.push(&m)?,
                _ => unreachable!(),
            }
        }
        Ok(state)
    }

    /// d(Z_k x0, Z_n x0) for 0 <= k <= n <= T; equals the shifted radial
    /// distance a(n-k, L^k omega) by isometry invariance.
    pub fn pair_distance(&self, k: usize, n: usize) -> Result<f64> {
        if k > n || n > self.len {
            return Err(Error::IndexOutOfRange(format!(
                "pair ({k}, {n}) not within 0 <= k <= n <= {}",
                self.len
            )));
        }
        if k == n {
            return Ok(0.0);
        }
        match &self.orbit {
            OrbitStore::Lattice { dim, points } => {
                let a = &points[k * dim..(k + 1) * dim];
                let b = &points[n * dim..(n + 1) * dim];
                Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() as f64)
            }
            OrbitStore::Words { arena, node_at } => {
                let wa = arena.word(node_at[k]);
                let wb = arena.word(node_at[n]);
                Ok(word::distance_via_prefix(&wa, &wb) as f64)
            }
            OrbitStore::HalfPlane { points, .. } => {
                let (r1, i1) = points[k];
                let (r2, i2) = points[n];
                Ok(spaces::halfplane::distance(r1, i1, r2, i2))
            }
            OrbitStore::Spd { .. } => {
                let pk = match self.orbit_point(k)? {
                    SpacePoint::Spd(p) => p,
                    _ => unreachable!(),
                };
                let pn = match self.orbit_point(n)? {
                    SpacePoint::Spd(p) => p,
                    _ => unreachable!(),
                };
                spd_distance(&pk, &pn)
            }
        }
    }

    /// Letters of the increment at step k for tree walks (fast-scan support).
    pub fn word_increment(&self, k: usize) -> Result<Vec<i32>> {
        match self.increment(k)? {
            IsometryElement::Word(w) => Ok(w),
            _ => Err(Error::validation("word_increment applies to free-group trajectories")),
        }
    }
}

fn spd_distance(a: &SpdPoint, b: &SpdPoint) -> Result<f64> {
    crate::spaces::spd::distance(a, b)
}

/// Empirical state occupation of a Markov trajectory.
pub fn state_occupation(traj: &Trajectory) -> Option<Vec<f64>> {
    let states = traj.markov_states()?;
    let k = match traj.driver() {
        CocycleDriver::Markov { transition, .. } => transition.len(),
        _ => return None,
    };
    let mut counts = vec![0.0; k];
    for &s in states {
        counts[s as usize] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    Some(counts.into_iter().map(|c| c / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z1() -> PointedSpace {
        PointedSpace::new(SpaceKind::ZdWord { dim: 1 }).unwrap()
    }

    fn deterministic_plus_one() -> CocycleDriver {
        CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![IsometryElement::Translation(vec![1])],
            probabilities: vec![1.0],
        })
    }

    #[test]
    fn deterministic_lattice_walk() {
        let traj = sample_walk(&z1(), &deterministic_plus_one(), 5, 9).unwrap();
        assert_eq!(traj.radial_distances(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(traj.radial(0).unwrap(), 0.0);
        assert!(matches!(traj.orbit_point(3).unwrap(), SpacePoint::Lattice(v) if v == vec![3]));
    }

    #[test]
    fn pair_distance_examples() {
        let z2 = PointedSpace::new(SpaceKind::ZdWord { dim: 2 }).unwrap();
        let driver = CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![IsometryElement::Translation(vec![1, 0])],
            probabilities: vec![1.0],
        });
        let traj = sample_walk(&z2, &driver, 10, 0).unwrap();
        assert_eq!(traj.pair_distance(3, 7).unwrap(), 4.0);
        assert_eq!(traj.pair_distance(4, 4).unwrap(), 0.0);
        assert_eq!(traj.pair_distance(0, 6).unwrap(), traj.radial(6).unwrap());
    }

    #[test]
    fn srw_f2_speed_near_half() {
        let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
        let law = IncrementLaw::uniform_generators(&f2).unwrap();
        let traj = sample_walk(&f2, &CocycleDriver::iid(law), 10_000, 1).unwrap();
        let speed = traj.radial(10_000).unwrap() / 10_000.0;
        assert!((0.47..=0.53).contains(&speed), "speed {speed}");
    }

    #[test]
    fn seed_determinism_and_stream_independence() {
        let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
        let law = IncrementLaw::uniform_generators(&f2).unwrap();
        let driver = CocycleDriver::iid(law);
        let a = sample_walk(&f2, &driver, 500, 7).unwrap();
        let b = sample_walk(&f2, &driver, 500, 7).unwrap();
        assert_eq!(a.records(), b.records());
        assert_eq!(a.radial_distances(), b.radial_distances());
        let c = sample_walk_stream(&f2, &driver, 500, 7, 1).unwrap();
        assert_ne!(a.records(), c.records());
    }

    #[test]
    fn markov_period_breaker_has_zero_drift() {
        let driver = CocycleDriver::Markov {
            transition: vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            state_laws: vec![
                IncrementLaw::Finite {
                    support: vec![IsometryElement::Translation(vec![1])],
                    probabilities: vec![1.0],
                },
                IncrementLaw::Finite {
                    support: vec![IsometryElement::Translation(vec![-1])],
                    probabilities: vec![1.0],
                },
            ],
            initial: vec![0.5, 0.5],
        };
        let traj = sample_walk(&z1(), &driver, 100_000, 3).unwrap();
        let speed = traj.radial(100_000).unwrap() / 100_000.0;
        assert!(speed.abs() < 0.05, "speed {speed}");
        // occupation within 0.02 total variation of the stationary (1/2, 1/2)
        let occ = state_occupation(&traj).unwrap();
        let pi = stationary_distribution(&[vec![0.9, 0.1], vec![0.1, 0.9]]);
        let tv: f64 = occ.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.02, "tv {tv}");
    }

    #[test]
    fn markov_rejects_reducible_chain() {
        let driver = CocycleDriver::Markov {
            transition: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            state_laws: vec![
                IncrementLaw::Finite {
                    support: vec![IsometryElement::Translation(vec![1])],
                    probabilities: vec![1.0],
                },
                IncrementLaw::Finite {
                    support: vec![IsometryElement::Translation(vec![-1])],
                    probabilities: vec![1.0],
                },
            ],
            initial: vec![0.5, 0.5],
        };
        assert!(driver.validate(&z1()).is_err());
    }

    #[test]
    fn subadditivity_per_step() {
        let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
        let law = IncrementLaw::uniform_generators(&f2).unwrap();
        let traj = sample_walk(&f2, &CocycleDriver::iid(law), 2000, 11).unwrap();
        let x0 = f2.basepoint();
        for k in 0..traj.len() {
            let g = traj.increment(k + 1).unwrap();
            let step = spaces::distance(&f2, &x0, &spaces::act(&f2, &g, &x0).unwrap()).unwrap();
            assert!(traj.radial(k + 1).unwrap() <= traj.radial(k).unwrap() + step + 1e-9);
        }
    }

    #[test]
    fn kind_mismatch_rejected() {
        let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
        assert!(sample_walk(&f2, &deterministic_plus_one(), 10, 0).is_err());
    }

    #[test]
    fn pos_walk_radials_and_overflow_contract() {
        let pos = PointedSpace::new(SpaceKind::PosMatrices { size: 2 }).unwrap();
        let driver = CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![IsometryElement::Linear(Mat::diag(&[2.0, 0.5]))],
            probabilities: vec![1.0],
        });
        let traj = sample_walk(&pos, &driver, 1200, 0).unwrap();
        // a(k) = 2 sqrt(2) k log 2 exactly for the diagonal cocycle
        let expect = 2.0 * (2.0_f64).sqrt() * (2.0_f64).ln();
        for k in [1usize, 10, 100, 1000, 1200] {
            let a = traj.radial(k).unwrap();
            assert!((a - expect * k as f64).abs() < 1e-6 * (1.0 + a), "a({k}) = {a}");
        }
        // dense partial product overflows past 2^1024, stabilized state does not
        assert!(traj.partial_product(1000).is_ok());
        assert!(matches!(traj.partial_product(1200), Err(Error::DenseOverflow { .. })));
        assert!(traj.qr_state_at(1200).is_ok());
        // orbit point still available in eigenform
        assert!(matches!(traj.orbit_point(1200).unwrap(), SpacePoint::Spd(_)));
    }

    #[test]
    fn word_arena_reconstruction_matches_group_ops() {
        let f2 = PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap();
        let law = IncrementLaw::uniform_generators(&f2).unwrap();
        let traj = sample_walk(&f2, &CocycleDriver::iid(law), 300, 5).unwrap();
        // reconstruct Z_k by composing increments and compare
        let mut z = f2.identity_isometry();
        for k in 1..=300 {
            z = spaces::compose(&f2, &z, &traj.increment(k).unwrap()).unwrap();
            if k % 50 == 0 {
                let via_arena = traj.partial_product(k).unwrap();
                match (&z, &via_arena) {
                    (IsometryElement::Word(a), IsometryElement::Word(b)) => assert_eq!(a, b),
                    _ => panic!("unexpected kinds"),
                }
            }
        }
    }

    #[test]
    fn halfplane_walk_checkpoints() {
        let h2 = PointedSpace::new(SpaceKind::HyperbolicPlane).unwrap();
        let g1 = Moebius::new(1.0, 0.8, 0.0, 1.0).unwrap();
        let g2 = Moebius::new(1.2, 0.0, 0.0, 1.0 / 1.2).unwrap();
        let driver = CocycleDriver::iid(IncrementLaw::Finite {
            support: vec![IsometryElement::Moebius(g1), IsometryElement::Moebius(g2)],
            probabilities: vec![0.5, 0.5],
        });
        let traj = sample_walk(&h2, &driver, 200, 2).unwrap();
        // partial product reconstruction agrees with the stored orbit
        for k in [1usize, 63, 64, 65, 130, 200] {
            let z = match traj.partial_product(k).unwrap() {
                IsometryElement::Moebius(m) => m,
                _ => unreachable!(),
            };
            let (re, im) = z.apply(0.0, 1.0).unwrap();
            match traj.orbit_point(k).unwrap() {
                SpacePoint::HalfPlane { re: r2, im: i2 } => {
                    assert!((re - r2).abs() < 1e-9 && (im - i2).abs() < 1e-9 * im.max(1.0));
                }
                _ => unreachable!(),
            }
        }
    }
}
