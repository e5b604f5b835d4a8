//! Acceptance suite: one test per numbered criterion, each asserting its
//! stated tolerance and printing a [PASS] line with the measured values.

use std::time::Instant;

use ergowalk_core::horo::{
    self, BoundaryDirection, EventuallyPeriodicWord, Horofunction, TruncationRule,
};
use ergowalk_core::linalg::{jacobi_eigen, Mat, JACOBI_TOL};
use ergowalk_core::lln::{
    self, estimate_drift, find_good_times, limit_horofunction, ray_approx_check, tail_mean,
    GoodTimeScanMode, RayApproxVerdict,
};
use ergowalk_core::matrixcocycle::{
    lyapunov_spectrum, oseledec_direction, posn_drift_identity, QrCocycleState,
};
use ergowalk_core::rng::{stream_rng, unit, WalkRng};
use ergowalk_core::shadows::{
    find_intersection_witness, in_shadow, shadow_via_horofunction, suggest_start_time,
    WitnessSearch,
};
use ergowalk_core::spaces::{
    self, act, compose, distance, inverse, sampling, IsometryElement, PointedSpace, SpaceKind,
    SpacePoint,
};
use ergowalk_core::walks::{sample_walk, CocycleDriver, IncrementLaw};
use rand::Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn f2() -> PointedSpace {
    PointedSpace::new(SpaceKind::FreeGroup { rank: 2 }).unwrap()
}

fn z1() -> PointedSpace {
    PointedSpace::new(SpaceKind::ZdWord { dim: 1 }).unwrap()
}

fn z2() -> PointedSpace {
    PointedSpace::new(SpaceKind::ZdWord { dim: 2 }).unwrap()
}

fn h2() -> PointedSpace {
    PointedSpace::new(SpaceKind::HyperbolicPlane).unwrap()
}

fn pos2() -> PointedSpace {
    PointedSpace::new(SpaceKind::PosMatrices { size: 2 }).unwrap()
}

fn srw(space: &PointedSpace) -> CocycleDriver {
    CocycleDriver::iid(IncrementLaw::uniform_generators(space).unwrap())
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

fn deterministic_diag(a: f64, b: f64) -> CocycleDriver {
    CocycleDriver::iid(IncrementLaw::Finite {
        support: vec![IsometryElement::Linear(Mat::diag(&[a, b]))],
        probabilities: vec![1.0],
    })
}

fn rotation(theta: f64) -> Mat {
    Mat::from_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]])
}

/// Criterion 1: SRW on F_2, T = 1e6, 20 seeds; the birth-death oracle gives
/// drift (2N-2)/2N = 1/2; |A_hat - 0.5| <= 0.01 within 60 s.
#[test]
fn criterion_1_drift_oracle_free_group() {
    let clock = Instant::now();
    let space = f2();
    let seeds: Vec<u64> = (0..20).collect();
    let est = estimate_drift(&space, &srw(&space), 1_000_000, &seeds).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(
        (est.a_hat - 0.5).abs() <= 0.01,
        "[FAIL] criterion 1: A_hat = {} (oracle 0.5 +- 0.01)",
        est.a_hat
    );
    assert!(elapsed <= 60.0, "[FAIL] criterion 1: runtime {elapsed:.1}s > 60s");
    println!(
        "[PASS] criterion 1: drift oracle on F_2, A_hat = {:.5} (oracle 0.5, ci {:.1e}), {:.1}s",
        est.a_hat, est.ci_half_width, elapsed
    );
}

/// Criterion 2: the horofunction law of large numbers in three spaces.
#[test]
fn criterion_2_limit_horofunctions_three_spaces() {
    // (a) biased Z walk p = 0.7, T = 1e5: terminal |-h(Z_T)/T - 0.4| <= 0.02
    let space = z1();
    let driver = biased_z1(0.7);
    let traj = sample_walk(&space, &driver, 100_000, 42).unwrap();
    let a_hat = tail_mean(&traj, 0.5).unwrap();
    let dir = limit_horofunction(&traj, a_hat).unwrap();
    let report = lln::check_lln(&traj, &dir.horofunction, 0.4).unwrap();
    assert!(
        report.terminal_deviation <= 0.02,
        "[FAIL] criterion 2a: deviation {} > 0.02",
        report.terminal_deviation
    );
    assert!(report.max_bound_violation <= 1e-9);
    let dev_a = report.terminal_deviation;

    // (b) SRW on F_2, T = 1e6: deviation <= 0.03 against the oracle drift 1/2
    let space = f2();
    let traj = sample_walk(&space, &srw(&space), 1_000_000, 7).unwrap();
    let dir = limit_horofunction(&traj, 0.5).unwrap();
    let report = lln::check_lln(&traj, &dir.horofunction, 0.5).unwrap();
    assert!(
        report.terminal_deviation <= 0.03,
        "[FAIL] criterion 2b: deviation {} > 0.03",
        report.terminal_deviation
    );
    assert!(report.max_bound_violation <= 1e-9);
    let dev_b = report.terminal_deviation;

    // (c) deterministic diag(2, 1/2) on Pos_2, T = 1e3, exact cocycle:
    // deviation <= 1e-6 against A = 2 sqrt(2) log 2
    let space = pos2();
    let a_exact = 2.0 * SQRT2 * (2.0_f64).ln();
    let traj = sample_walk(&space, &deterministic_diag(2.0, 0.5), 1_000, 0).unwrap();
    let dir = limit_horofunction(&traj, a_exact).unwrap();
    let report = lln::check_lln(&traj, &dir.horofunction, a_exact).unwrap();
    assert!(
        report.terminal_deviation <= 1e-6,
        "[FAIL] criterion 2c: deviation {} > 1e-6",
        report.terminal_deviation
    );
    println!(
        "[PASS] criterion 2: limit horofunctions; deviations {:.4} (z1), {:.4} (f2), {:.2e} (pos2)",
        dev_a, dev_b, report.terminal_deviation
    );
}

fn all_spaces() -> Vec<PointedSpace> {
    vec![z2(), f2(), h2(), pos2()]
}

/// Random horofunction over the variants exercised by the identities. SPD
/// Busemann directions are trace-free (every det-1 cocycle limit is), which
/// keeps the monotone limit in its exponentially convergent regime.
fn sample_horofunction(space: &PointedSpace, rng: &mut WalkRng) -> Horofunction {
    let season = rng.gen_range(0u8..10);
    match space.kind() {
        SpaceKind::ZdWord { dim } => {
            if season < 5 {
                horo::phi_embed(space, &sampling::sample_point(space, rng)).unwrap()
            } else if season < 8 {
                let mut sig = vec![0i8; *dim];
                while sig.iter().all(|&s| s == 0) {
                    for s in sig.iter_mut() {
                        *s = rng.gen_range(-1i8..=1);
                    }
                }
                Horofunction::busemann(space, BoundaryDirection::lattice(sig).unwrap()).unwrap()
            } else {
                let mut sig = vec![0i8; *dim];
                sig[0] = 1;
                let dir = BoundaryDirection::lattice(sig).unwrap();
                ray_approximant(space, &dir, 257)
            }
        }
        SpaceKind::FreeGroup { rank } => {
            if season < 5 {
                horo::phi_embed(space, &sampling::sample_point(space, rng)).unwrap()
            } else if season < 8 {
                Horofunction::busemann(
                    space,
                    BoundaryDirection::TreeWord(sample_tree_direction(*rank, rng)),
                )
                .unwrap()
            } else {
                let dir = BoundaryDirection::TreeWord(sample_tree_direction(*rank, rng));
                ray_approximant(space, &dir, 65)
            }
        }
        SpaceKind::HyperbolicPlane => {
            if season < 5 {
                horo::phi_embed(space, &sampling::sample_point(space, rng)).unwrap()
            } else if season < 8 {
                let xi = if rng.gen_range(0u8..10) == 0 {
                    None
                } else {
                    Some(-3.0 + 6.0 * unit(rng))
                };
                Horofunction::busemann(space, BoundaryDirection::HalfPlaneBoundary(xi)).unwrap()
            } else {
                let dir = BoundaryDirection::HalfPlaneBoundary(Some(-2.0 + 4.0 * unit(rng)));
                ray_approximant(space, &dir, 65)
            }
        }
        SpaceKind::PosMatrices { .. } => {
            if season < 6 {
                horo::phi_embed(space, &sampling::sample_point(space, rng)).unwrap()
            } else {
                Horofunction::busemann(space, sample_spd_direction(rng)).unwrap()
            }
        }
    }
}

fn sample_tree_direction(rank: usize, rng: &mut WalkRng) -> EventuallyPeriodicWord {
    loop {
        let head = sampling::sample_reduced_word(rank, rng.gen_range(0..5), rng);
        let cycle = sampling::sample_reduced_word(rank, rng.gen_range(1..4), rng);
        if cycle.is_empty() {
            continue;
        }
        if let Ok(w) = EventuallyPeriodicWord::new(head, cycle, rank) {
            return w;
        }
    }
}

/// Trace-free unit-Frobenius 2x2 direction: eigenvalues +-1/sqrt(2) in a
/// random orthogonal basis.
fn sample_spd_direction(rng: &mut WalkRng) -> BoundaryDirection {
    let basis = sampling::random_orthogonal(2, rng);
    BoundaryDirection::spd_from_eigenform(basis, vec![1.0 / SQRT2, -1.0 / SQRT2]).unwrap()
}

/// Pos_2 point with unit determinant (trace-free log), the regime of det-1
/// cocycle orbits.
fn sample_det1_point(rng: &mut WalkRng) -> SpacePoint {
    let basis = sampling::random_orthogonal(2, rng);
    let u = -1.5 + 3.0 * unit(rng);
    SpacePoint::Spd(ergowalk_core::spaces::spd::SpdPoint::from_eigenform(basis, vec![u, -u]))
}

fn ray_approximant(
    space: &PointedSpace,
    dir: &BoundaryDirection,
    count: usize,
) -> Horofunction {
    let points: Vec<SpacePoint> =
        (0..count).map(|k| horo::ray_point(space, dir, k as f64).unwrap()).collect();
    Horofunction::approximant(space, points, TruncationRule::default()).unwrap()
}

fn sample_isometry_for_h(
    space: &PointedSpace,
    h: &Horofunction,
    rng: &mut WalkRng,
) -> IsometryElement {
    let g = sampling::sample_isometry(space, rng);
    // SPD Busemann evaluations need det-1 group elements to stay in the
    // exponentially convergent regime
    let needs_det1 = matches!(space.kind(), SpaceKind::PosMatrices { .. })
        && !matches!(h, Horofunction::Interior { .. });
    if needs_det1 {
        if let IsometryElement::Linear(m) = &g {
            let d = m.det().abs();
            let n = m.n_rows as f64;
            return IsometryElement::Linear(m.scale(d.powf(-1.0 / n)));
        }
    }
    g
}

fn sample_point_for_h(
    space: &PointedSpace,
    h: &Horofunction,
    rng: &mut WalkRng,
) -> SpacePoint {
    if matches!(space.kind(), SpaceKind::PosMatrices { .. })
        && !matches!(h, Horofunction::Interior { .. })
    {
        sample_det1_point(rng)
    } else {
        sampling::sample_point(space, rng)
    }
}

/// Criterion 3: exact algebraic identities on 1e4 samples per space: the
/// F-cocycle relation, the max formula with domination, and the equivalence
/// of the shadow predicate with the horofunction inequality.
#[test]
fn criterion_3_exact_algebraic_identities() {
    let samples = 10_000usize;
    for space in all_spaces() {
        let discrete = space.kind().is_discrete();
        let tol = if discrete { 0.0 } else { 1e-9 };
        let mut rng = stream_rng(300, 0);
        let x0 = space.basepoint();

        // F-cocycle relation F(g1, g2.h) + F(g2, h) = F(g1 g2, h)
        for _ in 0..samples {
            let h = sample_horofunction(&space, &mut rng);
            let g1 = sample_isometry_for_h(&space, &h, &mut rng);
            let g2 = sample_isometry_for_h(&space, &h, &mut rng);
            let g2h = horo::act_on_h(&space, &g2, &h).unwrap();
            let lhs = horo::f_cocycle(&space, &g1, &g2h).unwrap()
                + horo::f_cocycle(&space, &g2, &h).unwrap();
            let rhs =
                horo::f_cocycle(&space, &compose(&space, &g1, &g2).unwrap(), &h).unwrap();
            assert!(
                (lhs - rhs).abs() <= tol,
                "[FAIL] criterion 3 ({}): cocycle relation off by {:.3e}",
                space.kind().name(),
                lhs - rhs
            );
        }

        // max formula and domination
        for _ in 0..samples {
            let g = sampling::sample_isometry(&space, &mut rng);
            let gi = inverse(&space, &g).unwrap();
            let at = act(&space, &gi, &x0).unwrap();
            let phi = horo::phi_embed(&space, &at).unwrap();
            let attained = horo::f_cocycle(&space, &g, &phi).unwrap();
            let dist = distance(&space, &x0, &act(&space, &g, &x0).unwrap()).unwrap();
            assert!(
                (attained - dist).abs() <= tol * (1.0 + dist),
                "[FAIL] criterion 3 ({}): max formula {} vs {}",
                space.kind().name(),
                attained,
                dist
            );
            let h = sample_horofunction(&space, &mut rng);
            let g_dom = sample_isometry_for_h(&space, &h, &mut rng);
            let f = horo::f_cocycle(&space, &g_dom, &h).unwrap();
            let d_dom =
                distance(&space, &x0, &act(&space, &g_dom, &x0).unwrap()).unwrap();
            assert!(
                f <= d_dom + 1e-9 * (1.0 + d_dom),
                "[FAIL] criterion 3 ({}): domination {} > {}",
                space.kind().name(),
                f,
                d_dom
            );
        }

        // shadow predicate <=> horofunction inequality, zero disagreements
        let mut disagreements = 0usize;
        for _ in 0..samples {
            let y = sampling::sample_point(&space, &mut rng);
            let z = sampling::sample_point(&space, &mut rng);
            let eps = rng.gen_range(1u8..8) as f64 / 8.0;
            let (inside, _) = in_shadow(&space, &y, &z, eps).unwrap();
            let via = shadow_via_horofunction(&space, &y, &z, eps).unwrap();
            if inside != via {
                disagreements += 1;
            }
        }
        assert_eq!(
            disagreements,
            0,
            "[FAIL] criterion 3 ({}): {} shadow routing disagreements",
            space.kind().name(),
            disagreements
        );
        println!(
            "[PASS] criterion 3 ({}): cocycle relation, max formula, shadow equivalence on {} samples",
            space.kind().name(),
            samples
        );
    }
}

/// Criterion 4: intersection witnesses for eps in {0.1, 0.2, 0.5} on the
/// ballistic SRW over F_2 and the biased Z walk, with the start parameters
/// from the constructive proof; the symmetric walk is refused.
#[test]
fn criterion_4_intersection_witnesses() {
    let cases: Vec<(&str, PointedSpace, CocycleDriver, u64)> = vec![
        ("f2-srw", f2(), srw(&f2()), 11),
        ("z1-biased", z1(), biased_z1(0.7), 12),
    ];
    for (name, space, driver, seed) in cases {
        let len = 200_000usize;
        let traj = sample_walk(&space, &driver, len, seed).unwrap();
        let a_hat = tail_mean(&traj, 0.5).unwrap();
        for eps in [0.1, 0.2, 0.5] {
            let s = suggest_start_time(&traj, eps, a_hat).unwrap();
            let m = s.start_n + 100;
            let horizon = 10 * m;
            assert!(
                horizon <= len,
                "[FAIL] criterion 4 ({name}, eps {eps}): horizon {horizon} exceeds T {len}"
            );
            match find_intersection_witness(&traj, eps, s.start_n, m, horizon).unwrap() {
                WitnessSearch::Found(w) => {
                    assert!(
                        w.margins.iter().all(|&x| x >= 0.0),
                        "[FAIL] criterion 4 ({name}, eps {eps}): negative margin"
                    );
                    println!(
                        "[PASS] criterion 4 ({name}, eps {eps}): witness n = {} for N = {}, M = {m} (delta {:.4})",
                        w.witness, s.start_n, s.delta
                    );
                }
                WitnessSearch::NotFound { best_n, best_min_margin, .. } => panic!(
                    "[FAIL] criterion 4 ({name}, eps {eps}): no witness; best n {best_n} margin {best_min_margin}"
                ),
            }
        }
    }
    // negative control: symmetric SRW on Z has A = 0 and must be refused
    let space = z1();
    let seeds: Vec<u64> = (0..8).collect();
    let est = estimate_drift(&space, &biased_z1(0.5), 4_000_000, &seeds).unwrap();
    let traj = sample_walk(&space, &biased_z1(0.5), 10_000, 13).unwrap();
    let refusal = suggest_start_time(&traj, 0.2, est.a_hat);
    assert!(
        matches!(refusal, Err(ergowalk_core::Error::NotBallistic { .. })),
        "[FAIL] criterion 4: symmetric walk not refused (a_hat = {})",
        est.a_hat
    );
    println!(
        "[PASS] criterion 4 (negative control): symmetric SRW refused at a_hat = {:.2e}",
        est.a_hat
    );
}

/// Criterion 5: good times of the subadditive lemma on the biased Z walk
/// (eps = 0.05, K = 50, T = 1e4): positive density and every reported time
/// re-verified independently; the deterministic walk has density one.
#[test]
fn criterion_5_good_times() {
    let traj = sample_walk(&z1(), &biased_z1(0.7), 10_000, 3).unwrap();
    let report = find_good_times(&traj, 0.05, 0.4, 50, GoodTimeScanMode::Exact).unwrap();
    assert!(
        !report.good_times.is_empty(),
        "[FAIL] criterion 5: no good times found"
    );
    for (&n, &margin) in report.good_times.iter().zip(&report.min_margins) {
        assert!(margin >= 0.0);
        let re = lln::verify_good_time(&traj, n, 0.05, 0.4, 50).unwrap();
        assert!(
            re >= -1e-9,
            "[FAIL] criterion 5: good time {n} fails re-verification (margin {re})"
        );
    }
    let det = CocycleDriver::iid(IncrementLaw::Finite {
        support: vec![IsometryElement::Translation(vec![1, 0])],
        probabilities: vec![1.0],
    });
    let dtraj = sample_walk(&z2(), &det, 1_000, 0).unwrap();
    let dreport = find_good_times(&dtraj, 0.1, 1.0, 1, GoodTimeScanMode::Exact).unwrap();
    assert!(
        (dreport.density - 1.0).abs() < 1e-12,
        "[FAIL] criterion 5: deterministic density {} != 1",
        dreport.density
    );
    println!(
        "[PASS] criterion 5: {} good times (density {:.3}) all re-verified; deterministic density 1",
        report.good_times.len(),
        report.density
    );
}

/// Criterion 6: the Oseledec suite.
#[test]
fn criterion_6_oseledec_suite() {
    let ln2 = (2.0_f64).ln();
    let ln3 = (3.0_f64).ln();

    // (a) deterministic diag(2, 1/2): spectrum exact to 1e-10
    let spec = lyapunov_spectrum(&deterministic_diag(2.0, 0.5), 2, 1_000, &[0]).unwrap();
    assert!(
        (spec.exponents[0] - ln2).abs() <= 1e-10 && (spec.exponents[1] + ln2).abs() <= 1e-10,
        "[FAIL] criterion 6a: spectrum {:?}",
        spec.exponents
    );
    assert!(spec.exponents.iter().sum::<f64>().abs() <= 1e-6);

    // (b) commuting diagonal i.i.d. law: lambda_1 = (log2 + log3)/2 within 1e-2
    let commuting = CocycleDriver::iid(IncrementLaw::Finite {
        support: vec![
            IsometryElement::Linear(Mat::diag(&[2.0, 0.5])),
            IsometryElement::Linear(Mat::diag(&[3.0, 1.0 / 3.0])),
        ],
        probabilities: vec![0.5, 0.5],
    });
    let seeds: Vec<u64> = (0..4).collect();
    let spec_b = lyapunov_spectrum(&commuting, 2, 100_000, &seeds).unwrap();
    let expect = 0.5 * (ln2 + ln3);
    assert!(
        (spec_b.exponents[0] - expect).abs() <= 1e-2,
        "[FAIL] criterion 6b: lambda_1 = {} vs {}",
        spec_b.exponents[0],
        expect
    );

    // (c) conjugated-diagonal law: residual r at n = 1e4 below 0.05
    let r = rotation(0.7);
    let conj = |d: Mat| IsometryElement::Linear(r.mul(&d).mul(&r.transpose()));
    let conjugated = CocycleDriver::iid(IncrementLaw::Finite {
        support: vec![conj(Mat::diag(&[2.0, 0.5])), conj(Mat::diag(&[3.0, 1.0 / 3.0]))],
        probabilities: vec![0.5, 0.5],
    });
    let traj = sample_walk(&pos2(), &conjugated, 10_000, 1).unwrap();
    let dir = oseledec_direction(&traj).unwrap();
    let (n_last, r_last) = *dir.residuals.last().unwrap();
    assert_eq!(n_last, 10_000);
    assert!(
        r_last <= 0.05,
        "[FAIL] criterion 6c: residual r_1e4 = {r_last} > 0.05"
    );
    assert!(dir.degenerate_warning.is_none());

    // (d) small-n dense-oracle equivalence (n <= 30) within 1e-8
    let mild = |t: f64| r.mul(&Mat::diag(&[t.exp(), (-t).exp()])).mul(&r.transpose());
    let (g1, g2) = (mild(0.1), mild(0.25));
    let mut state = QrCocycleState::new(2);
    let mut dense = Mat::identity(2);
    for k in 0..30 {
        let g = if k % 3 == 0 { &g2 } else { &g1 };
        state.push(g).unwrap();
        dense = dense.mul(g);
        let sig = state.log_singular_values().unwrap();
        let gram = dense.mul(&dense.transpose());
        let (evals, _) = jacobi_eigen(&gram, JACOBI_TOL).unwrap();
        for (s, e) in sig.iter().zip(evals.iter()) {
            assert!(
                (s - 0.5 * e.ln()).abs() <= 1e-8,
                "[FAIL] criterion 6d: step {k}: {} vs {}",
                s,
                0.5 * e.ln()
            );
        }
    }

    // (e) drift identity |A_hat - 2 sqrt(sum lambda^2)| <= 0.02
    let traj = sample_walk(&pos2(), &commuting, 100_000, 2).unwrap();
    let a_hat = tail_mean(&traj, 0.5).unwrap();
    let identity = posn_drift_identity(&spec_b, a_hat, 0.02);
    assert!(
        identity.pass,
        "[FAIL] criterion 6e: |{} - {}| = {} > 0.02",
        identity.a_hat, identity.spectrum_side, identity.deviation
    );
    println!(
        "[PASS] criterion 6: spectra ({:.6}, {:.6}), residual {:.4}, drift identity dev {:.4}",
        spec.exponents[0], spec_b.exponents[0], r_last, identity.deviation
    );
}

/// Criterion 7: the semiparallelogram law holds on 1e3 sampled midpoint
/// quadruples in H2 and Pos_2, and the (Z^2, L1) counterexample quadruple is
/// reported as a failure by the same checker.
#[test]
fn criterion_7_cat0_checks() {
    for space in [h2(), pos2()] {
        let mut rng = stream_rng(700, 0);
        let mut worst = f64::INFINITY;
        for _ in 0..1_000 {
            let x = sampling::sample_point(&space, &mut rng);
            let y = sampling::sample_point(&space, &mut rng);
            let ws: Vec<SpacePoint> =
                (0..4).map(|_| sampling::sample_point(&space, &mut rng)).collect();
            let report =
                spaces::semiparallelogram_check(&space, &x, &y, &ws, 1e-9).unwrap();
            worst = worst.min(report.worst_slack);
            assert!(
                report.holds,
                "[FAIL] criterion 7 ({}): slack {}",
                space.kind().name(),
                report.worst_slack
            );
        }
        println!(
            "[PASS] criterion 7 ({}): 1000 quadruples, worst slack {:.2e}",
            space.kind().name(),
            worst
        );
    }
    let space = z2();
    let report = spaces::semiparallelogram_check(
        &space,
        &SpacePoint::Lattice(vec![1, 0]),
        &SpacePoint::Lattice(vec![0, 1]),
        &[SpacePoint::Lattice(vec![1, 1]), SpacePoint::Lattice(vec![0, 0])],
        1e-9,
    )
    .unwrap();
    assert!(
        !report.holds,
        "[FAIL] criterion 7: L1 counterexample not detected"
    );
    println!(
        "[PASS] criterion 7 (z:2): counterexample quadruple reported as failure (slack {:.1})",
        report.worst_slack
    );
}

/// Criterion 8: the sqrt(n)-perturbed lattice sequence: premise -> 0 and
/// conclusion -> 1 within 0.02 at n = 1e4.
#[test]
fn criterion_8_ray_approximation() {
    let space = z2();
    let n_max = 10_000usize;
    let points: Vec<SpacePoint> = (1..=n_max)
        .map(|n| SpacePoint::Lattice(vec![n as i64, (n as f64).sqrt().floor() as i64]))
        .collect();
    let ray = BoundaryDirection::lattice(vec![1, 0]).unwrap();
    let report = ray_approx_check(&space, &points, &ray, 1.0, 0.1, 1e-9).unwrap();
    assert_eq!(
        report.verdict,
        RayApproxVerdict::ConclusionHolds,
        "[FAIL] criterion 8: verdict {:?}",
        report.verdict
    );
    let (_, premise_last) = *report.premise.last().unwrap();
    let (_, conclusion_last) = *report.conclusion.last().unwrap();
    assert!(
        premise_last <= 0.02,
        "[FAIL] criterion 8: premise terminal {premise_last} > 0.02"
    );
    assert!(
        (conclusion_last - 1.0).abs() <= 0.02,
        "[FAIL] criterion 8: conclusion terminal {conclusion_last} not within 0.02 of 1"
    );
    println!(
        "[PASS] criterion 8: premise terminal {:.4}, conclusion terminal {:.4}",
        premise_last, conclusion_last
    );
}

/// Criterion 9: metric axioms, isometry invariance, and the horofunction
/// bounds (vanishing at the basepoint, 1-Lipschitz, |h| <= d) on 1e4 samples
/// per space, within 5 minutes.
#[test]
fn criterion_9_metric_foundation() {
    let clock = Instant::now();
    let samples = 10_000usize;
    for space in all_spaces() {
        let name = space.kind().name();
        let discrete = space.kind().is_discrete();
        let x0 = space.basepoint();
        let mut rng = stream_rng(900, 0);

        for _ in 0..samples {
            let p = sampling::sample_point(&space, &mut rng);
            let q = sampling::sample_point(&space, &mut rng);
            let r = sampling::sample_point(&space, &mut rng);
            let dpq = distance(&space, &p, &q).unwrap();
            let dqp = distance(&space, &q, &p).unwrap();
            let sym_tol = if discrete { 0.0 } else { 1e-9 * (1.0 + dpq) };
            assert!(
                (dpq - dqp).abs() <= sym_tol,
                "[FAIL] criterion 9 ({name}): symmetry {dpq} vs {dqp}"
            );
            let dpr = distance(&space, &p, &r).unwrap();
            let dqr = distance(&space, &q, &r).unwrap();
            assert!(
                dpr <= dpq + dqr + 1e-9,
                "[FAIL] criterion 9 ({name}): triangle {dpr} > {dpq} + {dqr}"
            );
            let dpp = distance(&space, &p, &p).unwrap();
            assert!(dpp <= 1e-9, "[FAIL] criterion 9 ({name}): d(p,p) = {dpp}");
            if dpq < 1e-9 {
                assert!(
                    spaces::points_close(&space, &p, &q, 1e-6).unwrap(),
                    "[FAIL] criterion 9 ({name}): d < 1e-9 for distinct points"
                );
            }
        }

        for _ in 0..samples {
            let g = sampling::sample_isometry(&space, &mut rng);
            let p = sampling::sample_point(&space, &mut rng);
            let q = sampling::sample_point(&space, &mut rng);
            let before = distance(&space, &p, &q).unwrap();
            let after = distance(
                &space,
                &act(&space, &g, &p).unwrap(),
                &act(&space, &g, &q).unwrap(),
            )
            .unwrap();
            let tol = if discrete { 0.0 } else { 1e-9 * (1.0 + before) };
            assert!(
                (before - after).abs() <= tol,
                "[FAIL] criterion 9 ({name}): invariance {before} vs {after}"
            );
        }

        for _ in 0..samples {
            let h = sample_horofunction(&space, &mut rng);
            let z = sample_point_for_h(&space, &h, &mut rng);
            let w = sample_point_for_h(&space, &h, &mut rng);
            let hz = horo::eval(&h, &z).unwrap();
            let hw = horo::eval(&h, &w).unwrap();
            let h0 = horo::eval(&h, &x0).unwrap();
            assert!(
                h0.abs() <= if discrete { 0.0 } else { 1e-9 },
                "[FAIL] criterion 9 ({name}): h(x0) = {h0}"
            );
            let dz = distance(&space, &z, &x0).unwrap();
            assert!(
                hz.abs() <= dz + 1e-9,
                "[FAIL] criterion 9 ({name}): |h(z)| = {} > d = {}",
                hz.abs(),
                dz
            );
            let dzw = distance(&space, &z, &w).unwrap();
            assert!(
                (hz - hw).abs() <= dzw + 1e-9,
                "[FAIL] criterion 9 ({name}): Lipschitz {} > {}",
                (hz - hw).abs(),
                dzw
            );
        }
        println!("[PASS] criterion 9 ({name}): {samples} samples per block");
    }
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed <= 300.0, "[FAIL] criterion 9: runtime {elapsed:.1}s > 300s");
    println!("[PASS] criterion 9: full metric/space foundation in {elapsed:.1}s");
}

/// The correspondence between the limit horofunction and Lambda, made
/// executable: on a stock 2x2 cocycle, the LLN check with the Busemann
/// direction X / ||X||_F built from the Oseledec limit must reproduce the
/// metric drift within 0.05 at n = 1e4.
#[test]
fn oseledec_direction_matches_lln_drift() {
    let r = rotation(0.7);
    let conj = |d: Mat| IsometryElement::Linear(r.mul(&d).mul(&r.transpose()));
    let driver = CocycleDriver::iid(IncrementLaw::Finite {
        support: vec![conj(Mat::diag(&[2.0, 0.5])), conj(Mat::diag(&[3.0, 1.0 / 3.0]))],
        probabilities: vec![0.5, 0.5],
    });
    let traj = sample_walk(&pos2(), &driver, 10_000, 4).unwrap();
    let a_hat = tail_mean(&traj, 0.5).unwrap();
    let dir = limit_horofunction(&traj, a_hat).unwrap();
    let report = lln::check_lln(&traj, &dir.horofunction, a_hat).unwrap();
    assert!(
        report.terminal_deviation <= 0.05,
        "[FAIL] direction/drift correspondence: deviation {} > 0.05",
        report.terminal_deviation
    );
    assert!(report.max_bound_violation <= 1e-9);
    println!(
        "[PASS] h-corresponds-to-Lambda: deviation {:.4} at n = 1e4 (a_hat {:.4})",
        report.terminal_deviation, a_hat
    );
}

/// Tree-metric dual route at full sample count: reduce-and-count against the
/// prefix identity on 1e4 random pairs.
#[test]
fn tree_distance_dual_route_full_samples() {
    let mut rng = stream_rng(901, 0);
    for _ in 0..10_000 {
        let a = sampling::sample_reduced_word(2, rng.gen_range(0..=14), &mut rng);
        let b = sampling::sample_reduced_word(2, rng.gen_range(0..=14), &mut rng);
        let via_reduce = ergowalk_core::spaces::word::distance(&a, &b);
        let via_prefix = ergowalk_core::spaces::word::distance_via_prefix(&a, &b);
        assert_eq!(via_reduce, via_prefix, "a={a:?} b={b:?}");
    }
    println!("[PASS] tree distance: reduce-and-count matches the prefix identity on 1e4 pairs");
}

/// Extra guard: the tree-shadow cone characterization backing the witness
/// machinery (exhaustive over the radius-8 ball of F_2).
#[test]
fn tree_shadows_cone_characterization_exhaustive() {
    let space = f2();
    let mut ball: Vec<Vec<i32>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<i32>> = vec![Vec::new()];
    for _ in 0..8 {
        let mut next = Vec::new();
        for w in &frontier {
            for mag in 1..=2i32 {
                for letter in [mag, -mag] {
                    if w.last() != Some(&-letter) {
                        let mut v = w.clone();
                        v.push(letter);
                        next.push(v);
                    }
                }
            }
        }
        ball.extend(next.iter().cloned());
        frontier = next;
    }
    assert_eq!(ball.len(), 13_121);
    let mut rng = stream_rng(42, 0);
    for _ in 0..40 {
        let mut y = sampling::sample_reduced_word(2, rng.gen_range(1..=6), &mut rng);
        if y.is_empty() {
            y.push(1);
        }
        let ylen = y.len();
        let eps_grid = [0.125, 0.25, 0.5, 0.75, 0.875];
        let eps = *eps_grid
            .iter()
            .filter(|&&e| e * (ylen as f64) < 2.0)
            .last()
            .unwrap_or(&0.125);
        if eps * (ylen as f64) >= 2.0 {
            continue;
        }
        let yp = SpacePoint::Word(y.clone());
        for z in &ball {
            let (inside, _) = in_shadow(&space, &yp, &SpacePoint::Word(z.clone()), eps).unwrap();
            let cone = z.len() >= ylen && z[..ylen] == y[..];
            assert_eq!(
                inside, cone,
                "cone characterization fails for y={y:?} z={z:?} eps={eps}"
            );
        }
    }
    println!("[PASS] tree shadows match the cone characterization on the radius-8 ball");
}
