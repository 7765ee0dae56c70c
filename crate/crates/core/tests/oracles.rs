//! Worked examples checked against independent oracles with frozen values.

mod common;

use common::*;
use eigenpaths::construct::{detour, rip_to_pairing};
use eigenpaths::pairings::{apply_similarity, block_combine, concatenate, convex_scale_shift_map, reverse, scale_shift};
use eigenpaths::polypaths::{convex_reduction_poly, max_matched_deviation, track_roots_direct_on};
use eigenpaths::spectra::poly_roots;
use eigenpaths::tracker::matched_max_distance;
use eigenpaths::twobytwo::{straight_line_paths, Verdict};
use eigenpaths::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sup distance between two path sets, paths assigned to minimize it.
fn path_set_distance(a: &EigenPathSet, b: &EigenPathSet, grid: &[f64]) -> f64 {
    let n = a.n();
    let mut d = vec![vec![0.0f64; n]; n];
    for &x in grid {
        let (p, q) = (a.at(x), b.at(x));
        for j in 0..n {
            for k in 0..n {
                d[j][k] = d[j][k].max((p[j] - q[k]).norm());
            }
        }
    }
    bottleneck_assign(&d).0
}

#[test]
fn finer_initial_grid_gives_the_same_paths() {
    let mut r = rng(10);
    let path = MatrixPath::convex(random_matrix(&mut r, 3), random_matrix(&mut r, 3));
    let cfg = TrackConfig::default();
    let fine = TrackConfig {
        grid_init: 640,
        ..cfg.clone()
    };
    let t1 = track(&path, &cfg).unwrap();
    let t2 = track(&path, &fine).unwrap();
    assert!(t1.report.is_empty() && t2.report.is_empty());
    // both are interpolants of the same curves; they agree to resolution
    let d = path_set_distance(&t1.paths, &t2.paths, &t1.paths.grid);
    assert!(d < 1e-9, "{d}");
    assert!(path_set_distance(&t1.paths, &t2.paths, &uniform_grid(997)) < cfg.eps_resolution);
}

#[test]
fn eigenvalues_against_characteristic_roots() {
    let m = random_matrix(&mut rng(11), 4);
    let ev = eigenvalues(&m).unwrap().into_vec();
    let roots = poly_roots(&char_poly(&m, 64).unwrap(), 1e-14).unwrap().into_vec();
    assert!(matched_max_distance(&ev, &roots) < 1e-8);
}

#[test]
fn roots_reconstruct_coefficients() {
    let mut r = rng(12);
    let p = MonicPoly::new((0..6).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()).unwrap();
    let roots = poly_roots(&p, 1e-14).unwrap().into_vec();
    assert!(MonicPoly::from_roots(&roots).dist(&p) < 1e-7);
}

#[test]
fn discriminant_vanishes_at_the_midpoint() {
    let z = discriminant_path_2x2(c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(-1.0, 0.0), 0.5).unwrap();
    assert!(z.norm() < 1e-15);
    let mid = both_instance().evaluate(0.5).unwrap();
    assert!(eigenvalues(&mid).unwrap().min_gap() < 1e-7);
}

#[test]
fn step_bound_substitutions() {
    assert_eq!(step_bound(1.0, 2, 1.0), 1.0 / 32.0);
    assert_eq!(step_bound(1.0, 1, 1.0), 0.5);
}

#[test]
fn both_instance_ambiguity_is_singular_at_the_discriminant_root() {
    let cfg = TrackConfig::default();
    let t = track(&both_instance(), &cfg).unwrap();
    assert_eq!(t.report.len(), 1);
    let amb = &t.report.clusters[0].ambiguity;
    assert!((amb.alpha - 0.5).abs() < 1e-6);
    assert!(amb.lambda.norm() < 1e-6);
    assert!(amb.singular);
    let (singular, _) = classify_ambiguity(&both_instance(), amb, 1e-3, &cfg).unwrap();
    assert!(singular);
}

#[test]
fn triple_point_admits_every_bijection() {
    let cfg = TrackConfig::default();
    let t = track(&triple(), &cfg).unwrap();
    let ps = pairings_of(&t, cfg.pairing_cap);
    assert_eq!(ps.len(), 6);
    let mut perms: Vec<Vec<usize>> = ps.pairings.iter().map(|p| p.perm.clone()).collect();
    perms.sort();
    perms.dedup();
    assert_eq!(perms.len(), 6);
}

#[test]
fn similarity_keeps_the_eigenregion() {
    let mut r = rng(13);
    let path = MatrixPath::convex(random_matrix(&mut r, 3), random_matrix(&mut r, 3));
    let s = random_matrix(&mut r, 3).add_scalar(c(2.0, 0.0));
    let cfg = TrackConfig::default();
    let t1 = track(&path, &cfg).unwrap();
    let t2 = track(&apply_similarity(&path, &s, cfg.cond_cap).unwrap(), &cfg).unwrap();
    assert!(path_set_distance(&t1.paths, &t2.paths, &uniform_grid(500)) < 1e-6);
}

#[test]
fn scaled_and_shifted_crossing_meets_at_i() {
    let cfg = TrackConfig::default();
    let t = track(&scale_shift(&crossing(), c(2.0, 0.0), c(0.0, 1.0)), &cfg).unwrap();
    assert_eq!(t.report.len(), 1);
    let amb = &t.report.clusters[0].ambiguity;
    assert!((amb.alpha - 0.5).abs() < 1e-6);
    assert!((amb.lambda - c(0.0, 1.0)).norm() < 1e-6);
}

#[test]
fn beta_map_value() {
    assert!((convex_scale_shift_map(2.0, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn round_trip_contains_identity() {
    let cfg = TrackConfig::default();
    let mut r = rng(14);
    let path = MatrixPath::convex(random_matrix(&mut r, 3), random_matrix(&mut r, 3));
    let round = concatenate(&path, &reverse(&path), 1e-12).unwrap();
    let ps = pairings_of(&track(&round, &cfg).unwrap(), cfg.pairing_cap);
    assert!(ps.pairings.iter().any(|p| p.identity_like()));
}

#[test]
fn block_union_matches_components() {
    let cfg = TrackConfig::default();
    let mut r = rng(15);
    let p2 = MatrixPath::convex(random_matrix(&mut r, 2), random_matrix(&mut r, 2));
    let p3 = MatrixPath::convex(random_matrix(&mut r, 3).add_scalar(c(5.0, 0.0)), random_matrix(&mut r, 3).add_scalar(c(5.0, 0.0)));
    let t = track(&block_combine(&[p2.clone(), p3.clone()]).unwrap(), &cfg).unwrap();
    let t2 = track(&p2, &cfg).unwrap();
    let t3 = track(&p3, &cfg).unwrap();
    // combined grid samples against component spectra at the same α
    for (k, &x) in t.paths.grid.iter().enumerate() {
        let mut parts = eigenvalues(&p2.evaluate(x).unwrap()).unwrap().into_vec();
        parts.extend(eigenvalues(&p3.evaluate(x).unwrap()).unwrap().into_vec());
        assert!(matched_max_distance(&t.paths.column(k), &parts) < 1e-6);
    }
    // and the union of component pairings is the combined pairing
    let ps = pairings_of(&t, cfg.pairing_cap);
    assert_eq!(ps.len(), 1);
    let mut want = pairing_from_paths(&t2.paths).value_pairs();
    want.extend(pairing_from_paths(&t3.paths).value_pairs());
    assert!(want.iter().all(|&w| has_pair(&ps.pairings[0].value_pairs(), w)));
}

#[test]
fn nonnegative_weights_keep_the_convex_pairing() {
    let cfg = TrackConfig::default();
    let mut r = rng(16);
    let (a, b) = (random_matrix(&mut r, 3), random_matrix(&mut r, 3));
    // f = (1 − α)², g = 1 − (1 − α)²
    let f = RealFn::poly(&[1.0, -2.0, 1.0]);
    let g = RealFn::poly(&[0.0, 2.0, -1.0]);
    let rep = convex_reduction_check(&a, &b, &f, &g, &cfg).unwrap();
    assert!(rep.hypothesis_holds);
    assert_eq!(rep.contained, Some(true));
}

#[test]
fn dipping_weight_keeps_the_convex_pairing() {
    let cfg = TrackConfig::default();
    let mut r = rng(17);
    let (a, b) = (random_matrix(&mut r, 3), random_matrix(&mut r, 3));
    // f dips to about −0.05 around α = 0.7 while g = α stays positive
    let f = RealFn::Table {
        table: vec![(0.0, 1.0), (0.55, 0.0), (0.7, -0.05), (0.85, 0.0), (1.0, 0.0)],
    };
    let g = RealFn::poly(&[0.0, 1.0]);
    let rep = convex_reduction_check(&a, &b, &f, &g, &cfg).unwrap();
    assert!(rep.min_f < 0.0 && rep.hypothesis_holds);
    assert_eq!(rep.contained, Some(true));
}

fn unit_family(mu: Complex64) -> (CMatrix, CMatrix) {
    let b = CMatrix::from_rows(vec![vec![c(0.0, 0.0), mu], vec![mu, c(0.0, 0.0)]]).unwrap();
    (CMatrix::diag_real(&[1.0, -1.0]), b)
}

fn tracked_value_maps(a: &CMatrix, b: &CMatrix) -> Vec<Vec<(Complex64, Complex64)>> {
    let cfg = TrackConfig::default();
    let t = track(&MatrixPath::convex(a.clone(), b.clone()), &cfg).unwrap();
    pairings_of(&t, cfg.pairing_cap).pairings.iter().map(|p| p.value_pairs()).collect()
}

fn has_pair(maps: &[(Complex64, Complex64)], x: (Complex64, Complex64)) -> bool {
    maps.iter().any(|y| (x.0 - y.0).norm() < 1e-6 && (x.1 - y.1).norm() < 1e-6)
}

#[test]
fn unit_family_verdicts_against_tracker() {
    // μ/λ = 1: values stay on their lines, 1 ↦ 1 (μ = ±1 after scaling by 1)
    let (a, b) = unit_family(c(1.0, 0.0));
    let v = classify(&a, &b).unwrap();
    let tracked = tracked_value_maps(&a, &b);
    assert_eq!(tracked.len(), 1);
    assert!(v.pairings()[0].iter().all(|&x| has_pair(&tracked[0], x)));
    assert!(has_pair(&tracked[0], (c(1.0, 0.0), c(1.0, 0.0))));

    // μ/λ = −1 sends 1 to −1
    let (a, b) = unit_family(c(-1.0, 0.0));
    let v = classify(&a, &b).unwrap();
    let tracked = tracked_value_maps(&a, &b);
    assert_eq!(tracked.len(), 1);
    assert!(v.pairings()[0].iter().all(|&x| has_pair(&tracked[0], x)));

    // μ/λ = i: both, collision at α = 1/2
    let (a, b) = unit_family(c(0.0, 1.0));
    let v = classify(&a, &b).unwrap();
    assert_eq!(v.verdict, Verdict::Both);
    assert!((v.evidence.discriminant_roots[0] - 0.5).abs() < 1e-12);
    assert_eq!(tracked_value_maps(&a, &b).len(), 2);
}

#[test]
fn positive_ratio_admits_p() {
    let mut r = rng(18);
    for _ in 0..100 {
        // A = diag(λ₁, λ₂); B = V diag(μ₁, μ₂) V⁻¹ with μ₁ − μ₂ = k(λ₁ − λ₂), k > 0
        let l = (c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)), c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let k = r.gen_range(0.1..3.0);
        let m2 = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let m1 = m2 + (l.0 - l.1) * k;
        let v = random_matrix(&mut r, 2);
        let b = &(&v * &CMatrix::diag(&[m1, m2])) * &v.inverse().unwrap();
        let a = CMatrix::diag(&[l.0, l.1]);
        let tracked = tracked_value_maps(&a, &b);
        assert!(tracked.iter().any(|t| has_pair(t, (l.0, m1)) && has_pair(t, (l.1, m2))));
    }
}

#[test]
fn shared_eigenvector_paths_are_straight() {
    let mut r = rng(19);
    for _ in 0..10 {
        // common eigenvector e₁: both upper triangular
        let mut a = random_matrix(&mut r, 2);
        let mut b = random_matrix(&mut r, 2);
        a[(1, 0)] = c(0.0, 0.0);
        b[(1, 0)] = c(0.0, 0.0);
        let (s1, s2) = straight_line_paths(&a, &b).unwrap();
        let cfg = TrackConfig::default();
        let t = track(&MatrixPath::convex(a, b), &cfg).unwrap();
        for &x in &uniform_grid(200) {
            assert!(matched_max_distance(&t.paths.at(x), &[s1.at(x), s2.at(x)]) < 1e-6);
        }
    }
}

#[test]
fn detours_remove_the_collisions() {
    let cfg = TrackConfig::default();
    for (path, eps) in [(crossing(), 0.1), (both_instance(), 0.1)] {
        let (a, b) = path.endpoints();
        let d = detour(&a, &b, eps, &cfg, 1).unwrap();
        assert!(track(&d, &cfg).unwrap().report.is_empty());
        let mut gap = f64::INFINITY;
        for &x in &uniform_grid(2000) {
            gap = gap.min(eigenvalues(&d.evaluate(x).unwrap()).unwrap().min_gap());
        }
        assert!(gap > 0.0);
        assert!(sup_distance(&path, &d, &uniform_grid(2000)).unwrap() < eps);
    }
}

#[test]
fn rip_follows_the_requested_splice() {
    let cfg = TrackConfig::default();
    let path = crossing();
    let base = track(&path, &cfg).unwrap();
    let ps = pairings_of(&base, cfg.pairing_cap);
    let swapped = ps.pairings.iter().find(|p| !p.identity_like()).expect("two pairings").clone();
    let r = rip_to_pairing(&path, &swapped, 0.2, &cfg, 3).unwrap();
    let t = track(&r.new_path, &cfg).unwrap();
    assert!(t.report.is_empty() && r.min_gap > 0.0);
    assert!(r.path_dev < 0.2);
    assert!(pairing_from_paths(&t.paths).same_as(&swapped, 1e-6));
}

#[test]
fn rip_realizes_a_three_cycle() {
    let cfg = TrackConfig::default();
    let path = triple();
    let ps = pairings_of(&track(&path, &cfg).unwrap(), cfg.pairing_cap);
    let cycle = ps
        .pairings
        .iter()
        .find(|p| p.perm.iter().enumerate().all(|(i, &j)| i != j))
        .expect("a 3-cycle")
        .clone();
    let r = rip_to_pairing(&path, &cycle, 0.1, &cfg, 4).unwrap();
    let t = track(&r.new_path, &cfg).unwrap();
    assert!(t.report.is_empty());
    assert!(pairing_from_paths(&t.paths).same_as(&cycle, 1e-6));
}

#[test]
fn preserving_rip_keeps_the_crossing_endpoints() {
    let cfg = TrackConfig::default();
    let path = crossing();
    let r = rip_preserving_endpoints(&path, 0.1, &cfg).unwrap();
    assert_eq!(r.endpoint_preserved, (true, true));
    let (c0, c1) = path.endpoints();
    assert_eq!(r.new_path.evaluate(0.0).unwrap(), c0);
    assert_eq!(r.new_path.evaluate(1.0).unwrap(), c1);
    assert!(r.min_gap > 0.0);
}

fn random_convex_poly(r: &mut ChaCha8Rng, deg: usize) -> PolyPath {
    let mut draw = || (0..deg).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    PolyPath::Convex {
        coeffs: vec![draw(), draw()],
    }
}

#[test]
fn companion_round_trip_degree_five() {
    let mut r = rng(20);
    let p = MonicPoly::new((0..5).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()).unwrap();
    assert!(char_poly(&companion(&p), 64).unwrap().dist(&p) < 1e-10);
}

#[test]
fn companion_and_direct_root_regions_agree() {
    let cfg = TrackConfig::default();
    let mut r = rng(21);
    for deg in [4, 4, 5, 3] {
        let pp = random_convex_poly(&mut r, deg);
        let t = track_roots(&pp, &cfg).unwrap();
        let d = track_roots_direct_on(&pp, &t.paths.grid, &cfg).unwrap();
        assert!(max_matched_deviation(&t.paths, &d) < 1e-7);
        // the default grid is part of the refined one, so samples coincide
        let own = track_roots_direct(&pp, &cfg).unwrap();
        assert!(own.grid.iter().all(|x| t.paths.grid.contains(x)));
        assert!(path_set_distance(&own, &d, &own.grid) < 1e-7);
    }
}

#[test]
fn double_collision_polynomial_is_ripped() {
    let cfg = TrackConfig::default();
    // t² − (2α − 1)², sampled densely in the coefficients
    let grid = uniform_grid(200);
    let coeffs = grid.iter().map(|&x| vec![c(-(2.0 * x - 1.0).powi(2), 0.0), c(0.0, 0.0)]).collect();
    let pp = PolyPath::Sampled { grid, coeffs };
    let base = track_roots(&pp, &cfg).unwrap();
    assert!(!base.report.is_empty());
    let eps = 0.05;
    let r = rip_poly(&pp, eps, &cfg, 5).unwrap();
    assert!(r.coeff_dev < eps && r.root_dev < eps);
    let t = track_roots(&r.new_path, &cfg).unwrap();
    assert!(t.report.is_empty());
    for &x in &uniform_grid(2000) {
        let roots = poly_roots(&r.new_path.eval(x).unwrap(), 1e-14).unwrap();
        assert!(roots.min_gap() > 0.0);
    }
    // a tangential touch can only be opened into the bounce: roots ±|2α − 1|
    let grid = uniform_grid(2000);
    let bounce = EigenPathSet {
        paths: vec![
            grid.iter().map(|&x| c((2.0 * x - 1.0).abs(), 0.0)).collect(),
            grid.iter().map(|&x| c(-(2.0 * x - 1.0).abs(), 0.0)).collect(),
        ],
        grid: grid.clone(),
    };
    assert!(path_set_distance(&bounce, &t.paths, &grid) < eps);
}

#[test]
fn polynomial_reduction_containment() {
    let cfg = TrackConfig::default();
    let mut r = rng(22);
    let mut draw = || MonicPoly::new((0..3).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()).unwrap();
    let (q, rr) = (draw(), draw());
    // f = (1 − α)³ + α(1 − α), g = α
    let f = RealFn::poly(&[1.0, -2.0, 2.0, -1.0]);
    let g = RealFn::poly(&[0.0, 1.0]);
    let rep = convex_reduction_poly(&q, &rr, &f, &g, &cfg).unwrap();
    assert_eq!(rep.contained, Some(true));
    // f dips below zero near α = 0.8
    let f = RealFn::Table {
        table: vec![(0.0, 1.0), (0.7, 0.0), (0.8, -0.03), (0.9, 0.0), (1.0, 0.0)],
    };
    let rep = convex_reduction_poly(&q, &rr, &f, &g, &cfg).unwrap();
    assert!(rep.min_f < 0.0);
    assert_eq!(rep.contained, Some(true));
}
