//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or runs over its time budget.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use eigenpaths::pairings::{block_combine, concatenate, convex_scale_shift_map, reverse, scale_shift};
use eigenpaths::polypaths::{max_matched_deviation, track_roots_direct_on};
use eigenpaths::spectra::poly_roots;
use eigenpaths::tracker::{matched_max_distance, raw_bound};
use eigenpaths::twobytwo::{w_pair, Verdict};
use eigenpaths::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn num<T>(r: Result<T>, what: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn perturbation_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dims = [2usize, 3, 4, 6];
    let mut worst_ratio: f64 = 0.0;
    let mut worst_raw: f64 = 0.0;
    for trial in 0..500 {
        let n = dims[trial % dims.len()];
        let scale = rng.gen_range(0.2..3.0);
        let cm = random_matrix(&mut rng, n).scale_real(scale);
        let eps = rng.gen_range(0.01..0.5);
        // the bound is stated for m at least both 2-norms; ‖C′‖₂ ≤ ‖C‖₂ + ‖E‖₂
        let nc = num(cm.norm2(), "norm")?;
        let m0 = nc * 1.01 + 1e-3;
        let delta = step_bound(m0 + 1e-3, n, eps);
        let frac = rng.gen_range(0.05..0.99);
        let e = random_with_norm(&mut rng, n, delta * frac);
        let cp = &cm + &e;
        let ne = num(e.norm2(), "norm")?;
        let ncp = num(cp.norm2(), "norm")?;
        ensure!(ne < step_bound(nc.max(ncp), n, eps), "trial {trial}: perturbation not below the step bound");
        let s = num(eigenvalues(&cm), "eig")?.into_vec();
        let sp = num(eigenvalues(&cp), "eig")?.into_vec();
        let motion = matched_max_distance(&s, &sp);
        ensure!(motion < eps, "trial {trial} (n={n}): matched motion {motion:e} >= eps {eps:e}");
        worst_ratio = worst_ratio.max(motion / eps);
        // the raw bound, also on large perturbations where it is not trivially loose
        for big in [ne, rng.gen_range(0.01..2.0) * nc] {
            let e2 = if big == ne { e.clone() } else { random_with_norm(&mut rng, n, 1.0) };
            let e2 = if big == ne { e2 } else { e2.scale_real(big / num(e2.norm2(), "norm")?) };
            let c2 = &cm + &e2;
            let s2 = num(eigenvalues(&c2), "eig")?.into_vec();
            let d = matched_max_distance(&s, &s2);
            let rb = raw_bound(nc, num(c2.norm2(), "norm")?, num(e2.norm2(), "norm")?, n);
            ensure!(d <= rb, "trial {trial}: raw bound violated, {d:e} > {rb:e}");
            worst_raw = worst_raw.max(d / rb);
        }
    }
    Ok(format!("500/500 within eps (worst motion/eps {worst_ratio:.2e}), raw bound worst ratio {worst_raw:.3}"))
}

fn splice_witness() -> Outcome {
    let cfg = TrackConfig::default();
    let eps = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for (name, path) in fixtures() {
        let MatrixPath::Convex { a, b } = &path else { unreachable!() };
        let n = a.dim();
        let m = a.norm_fro().max(b.norm_fro()) + 1.0;
        let delta = step_bound(m, n, eps);
        let base = num(track(&path, &cfg), "track")?;
        let biggest = base.report.clusters.iter().map(|cl| cl.members.len()).max().unwrap_or(0);
        ensure!(biggest == n, "{name}: expected an {n}-fold collision, largest cluster has {biggest}");
        for trial in 0..100 {
            let r = delta * rng.gen_range(0.1..0.9);
            let pert = match trial % 3 {
                // constant offset
                0 => {
                    let e = random_with_norm(&mut rng, n, r);
                    MatrixPath::convex(a + &e, b + &e)
                }
                // different offsets at the two ends
                1 => MatrixPath::convex(a + &random_with_norm(&mut rng, n, r), b + &random_with_norm(&mut rng, n, r)),
                // offset oscillating along the path
                _ => {
                    let e0 = random_with_norm(&mut rng, n, r);
                    let grid = uniform_grid(32);
                    let phase = rng.gen_range(0.0..PI);
                    let matrices = grid
                        .iter()
                        .map(|&x| &path.evaluate(x).unwrap() + &e0.scale_real((7.0 * x + phase).sin()))
                        .collect();
                    // the piecewise-linear interpolant of the base stays a convex segment
                    MatrixPath::Sampled { grid, matrices }
                }
            };
            let rep = num(splice_witness_experiment(&path, &pert, eps, &cfg), "experiment")?;
            ensure!(rep.within_delta, "{name} trial {trial}: perturbation {:e} not within delta {:e}", rep.perturbation_norm, rep.delta);
            ensure!(rep.witness_found, "{name} trial {trial}: best splice deviation {:e} >= eps", rep.deviation);
            worst = worst.max(rep.deviation);
        }
    }
    Ok(format!("300/300 witnesses within eps {eps} (worst deviation {worst:.2e})"))
}

fn rip_criterion() -> Outcome {
    let cfg = TrackConfig::default();
    let check = uniform_grid(10_000);
    let mut lines = Vec::new();
    for (name, path) in fixtures() {
        let base = num(track(&path, &cfg), "track")?;
        for eps in [0.2, 0.05] {
            let r = num(rip(&path, eps, &cfg), &format!("rip {name} eps {eps}"))?;
            let t = num(track(&r.new_path, &cfg), "track ripped")?;
            ensure!(t.report.is_empty(), "{name} eps {eps}: ripped path still has {} clusters", t.report.len());
            let mut min_gap = f64::INFINITY;
            for &x in &check {
                min_gap = min_gap.min(num(eigenvalues(&num(r.new_path.evaluate(x), "eval")?), "eig")?.min_gap());
            }
            ensure!(min_gap > cfg.collision_tol, "{name} eps {eps}: gap {min_gap:e} on the check grid");
            let sup = num(sup_distance(&path, &r.new_path, &check), "sup")?;
            ensure!(sup < eps, "{name} eps {eps}: sup deviation {sup:e}");
            let n = base.paths.n();
            let mut d = vec![vec![0.0f64; n]; n];
            for &x in &check {
                let (p, q) = (base.paths.at(x), t.paths.at(x));
                for j in 0..n {
                    for k in 0..n {
                        d[j][k] = d[j][k].max((p[j] - q[k]).norm());
                    }
                }
            }
            let (pdev, _) = bottleneck_assign(&d);
            ensure!(pdev < eps, "{name} eps {eps}: path deviation {pdev:e}");
            lines.push(format!("{name}/{eps}: sup {sup:.1e} path {pdev:.1e} gap {min_gap:.1e}"));

            let (c0, c1) = path.endpoints();
            let distinct = |m: &CMatrix| eigenvalues(m).map(|s| s.min_gap() > cfg.collision_tol);
            let (d0, d1) = (num(distinct(&c0), "eig")?, num(distinct(&c1), "eig")?);
            if d0 || d1 {
                let rp = num(rip_preserving_endpoints(&path, eps, &cfg), &format!("preserving rip {name}"))?;
                let q = &rp.new_path;
                ensure!(num(track(q, &cfg), "track")?.report.is_empty(), "{name}: preserving rip left clusters");
                ensure!(num(sup_distance(&path, q, &check), "sup")? < eps, "{name}: preserving rip sup deviation");
                if d0 {
                    let e = num(q.evaluate(0.0), "eval")?.dist_max(&c0);
                    ensure!(e <= 1e-12, "{name}: start moved by {e:e}");
                }
                if d1 {
                    let e = num(q.evaluate(1.0), "eval")?.dist_max(&c1);
                    ensure!(e <= 1e-12, "{name}: end moved by {e:e}");
                }
            }
        }
    }
    Ok(format!("6/6 ripped paths verified on 10^4 points; {}", lines.join(", ")))
}

/// Classifier value maps equal the tracker's pairing set.
fn agrees(v: &twobytwo::PairingVerdict, ps: &PairingSet) -> bool {
    let mine = v.pairings();
    if mine.len() != ps.len() {
        return false;
    }
    let close = |x: &(Complex64, Complex64), y: &(Complex64, Complex64)| (x.0 - y.0).norm() < 1e-6 && (x.1 - y.1).norm() < 1e-6;
    mine.iter().all(|m| {
        ps.pairings.iter().any(|p| {
            let vp = p.value_pairs();
            m.iter().all(|x| vp.iter().any(|y| close(x, y)))
        })
    })
}

fn classifier() -> Outcome {
    let cfg = TrackConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    let mut drawn = 0;
    let mut counts = [0usize; 3];
    let mut worst_w: f64 = 0.0;
    while checked < 1000 {
        drawn += 1;
        let a = random_matrix(&mut rng, 2);
        let b = random_matrix(&mut rng, 2);
        let v = num(classify(&a, &b), "classify")?;
        let (wp, wm) = num(w_pair(v.canonical.v1, v.canonical.v2), "w pair")?;
        let w_err = (wp * wm - c(1.0, 0.0)).norm();
        ensure!(w_err <= 1e-12, "instance {drawn}: w+ w- off by {w_err:e}");
        worst_w = worst_w.max(w_err);
        if (v.arg_ratio.abs() - v.theta).abs() <= 1e-4 {
            continue;
        }
        let t = num(track(&MatrixPath::convex(a, b), &cfg), "track")?;
        let ps = pairings_of(&t, cfg.pairing_cap);
        ensure!(agrees(&v, &ps), "instance {drawn}: verdict {:?} disagrees with {} tracked pairings", v.verdict, ps.len());
        counts[v.verdict as usize] += 1;
        checked += 1;
    }
    // flip of the v1 = 1, v2 = −1 family at |arg(μ/λ)| = π/2
    let a = CMatrix::diag_real(&[1.0, -1.0]);
    let mut flips = Vec::new();
    for sign in [1.0, -1.0] {
        let mut verdicts = Vec::new();
        for phi in [PI / 2.0 - 1e-4, PI / 2.0 + 1e-4] {
            let mu = Complex64::from_polar(1.0, sign * phi);
            let b = CMatrix::from_rows(vec![vec![c(0.0, 0.0), mu], vec![mu, c(0.0, 0.0)]]).unwrap();
            let v = num(classify(&a, &b), "classify")?;
            let (v1, v2) = (v.canonical.v1, v.canonical.v2);
            ensure!((v1 * v2 + c(1.0, 0.0)).norm() < 1e-12 && (v1 + v2).norm() < 1e-12, "family not in the v = (1, -1) form");
            ensure!(v.verdict != Verdict::Both, "phi {phi}: Both away from the boundary");
            let t = num(track(&MatrixPath::convex(a.clone(), b), &cfg), "track")?;
            ensure!(agrees(&v, &pairings_of(&t, cfg.pairing_cap)), "phi {phi}: disagrees with tracker");
            verdicts.push(v.pairings()[0]);
        }
        let same = verdicts[0].iter().all(|x| verdicts[1].iter().any(|y| (x.0 - y.0).norm() < 1e-9 && (x.1 - y.1).norm() < 1e-9));
        ensure!(!same, "sign {sign}: verdict does not flip across pi/2");
        flips.push(sign);
    }
    Ok(format!(
        "1000/1000 agree ({} P_only, {} Q_only, {} Both; {drawn} drawn), max |w+w- - 1| {worst_w:.1e}, flip bracketed on both sides",
        counts[0], counts[1], counts[2]
    ))
}

fn reduction() -> Outcome {
    let cfg = TrackConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut negative = 0;
    for i in 0..50 {
        let n = 2 + i % 2;
        let a = random_matrix(&mut rng, n);
        let b = random_matrix(&mut rng, n);
        // f = (1 − α)(1 − kα), negative on (1/k, 1) once k > 1; g = α(1 + s − sα) ≥ 0
        let k = if i < 10 { rng.gen_range(1.5..4.0) } else { rng.gen_range(0.0..1.0) };
        let s = rng.gen_range(0.0..1.0);
        let f = RealFn::poly(&[1.0, -(1.0 + k), k]);
        let g = RealFn::poly(&[0.0, 1.0 + s, -s]);
        let rep = num(convex_reduction_check(&a, &b, &f, &g, &cfg), "reduction")?;
        ensure!(rep.hypothesis_holds, "instance {i}: hypothesis reported false");
        if rep.min_f < 0.0 {
            negative += 1;
        }
        ensure!(rep.contained == Some(true), "instance {i}: {} convex pairings missing", rep.missing.len());
    }
    ensure!(negative >= 10, "only {negative} instances with f negative");
    Ok(format!("50/50 contained, {negative} with f dipping negative, 0 violations"))
}

fn poly_oracle() -> Outcome {
    let cfg = TrackConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let deg = 2 + i % 5;
        let mut draw = || -> Vec<Complex64> { (0..deg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() };
        let pp = PolyPath::Convex {
            coeffs: vec![draw(), draw()],
        };
        let t = num(track_roots(&pp, &cfg), "companion tracking")?;
        if !t.report.is_empty() {
            return Err(format!("path {i}: unexpected root collision"));
        }
        let d = num(track_roots_direct_on(&pp, &t.paths.grid, &cfg), "direct continuation")?;
        let dev = max_matched_deviation(&t.paths, &d);
        ensure!(dev < 1e-6, "path {i} (degree {deg}): deviation {dev:e}");
        worst = worst.max(dev);
    }
    let mut worst_rt: f64 = 0.0;
    for i in 0..1000 {
        let deg = 1 + i % 12;
        let p = num(
            MonicPoly::new((0..deg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()),
            "poly",
        )?;
        let back = num(char_poly(&companion(&p), cfg.char_poly_cap), "char_poly")?;
        let e = back.dist(&p);
        ensure!(e <= 1e-10, "poly {i}: round trip error {e:e}");
        worst_rt = worst_rt.max(e);
        // roots are a by-product worth keeping honest too
        num(poly_roots(&p, 1e-13), "roots")?;
    }
    Ok(format!("100/100 paths agree (worst {worst:.1e}), 1000/1000 round trips (worst {worst_rt:.1e})"))
}

fn structural() -> Outcome {
    let cfg = TrackConfig::default();
    let tol = eigenpaths::pairings::PAIRING_TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut family: Vec<MatrixPath> = fixtures().into_iter().map(|f| f.1).collect();
    for n in [2usize, 3, 4] {
        for _ in 0..3 {
            family.push(MatrixPath::convex(random_matrix(&mut rng, n), random_matrix(&mut rng, n)));
        }
        // real pairs produce genuine real crossings
        family.push(MatrixPath::convex(random_real_matrix(&mut rng, n), random_real_matrix(&mut rng, n)));
    }
    let mut checks = 0usize;
    for (idx, path) in family.iter().enumerate() {
        let t = num(track(path, &cfg), "track")?;
        let ps = pairings_of(&t, cfg.pairing_cap);
        let n = path.dim();
        let MatrixPath::Convex { a, b } = path else { unreachable!() };

        // trace line
        for (k, &x) in t.paths.grid.iter().enumerate() {
            let s: Complex64 = t.paths.column(k).iter().sum();
            let line = a.trace() * (1.0 - x) + b.trace() * x;
            let scale = num(num(path.evaluate(x), "eval")?.norm2(), "norm")?;
            ensure!((s - line).norm() <= n as f64 * cfg.tol_eig(scale), "path {idx}: trace line off at {x}");
        }
        checks += 1;

        // ambiguity report empty iff gaps stay above collision_tol iff a unique pairing
        let empty = t.report.is_empty();
        let gapped = t.paths.min_gap() > cfg.collision_tol;
        let unique = ps.len() == 1;
        ensure!(empty == gapped && gapped == unique, "path {idx}: empty {empty}, gapped {gapped}, unique {unique}");
        checks += 1;

        // scale and shift relabel the pairing set
        let (sa, sb) = (c(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), 0.3));
        let ts = num(track(&scale_shift(path, sa, sb), &cfg), "track")?;
        let pss = pairings_of(&ts, cfg.pairing_cap);
        ensure!(pss.len() == ps.len(), "path {idx}: scale/shift changed the pairing count");
        for p in &ps.pairings {
            ensure!(pss.pairings.iter().any(|q| p.maps_like(q, |z| sa * z + sb, 1e-6)), "path {idx}: scale/shift image missing");
        }
        checks += 1;

        // reverse inverts every pairing
        let tr = num(track(&reverse(path), &cfg), "track")?;
        let psr = pairings_of(&tr, cfg.pairing_cap);
        ensure!(psr.len() == ps.len(), "path {idx}: reverse changed the pairing count");
        for p in &ps.pairings {
            ensure!(psr.contains(&p.inverse(tol), 1e-6), "path {idx}: inverse pairing missing after reverse");
        }
        checks += 1;

        // scaling B by c > 0 reparameterizes by β, up to the positive factor 1 − α + αc
        let cs = rng.gen_range(0.2..5.0);
        let scaled = MatrixPath::convex(a.clone(), b.scale_real(cs));
        let mut last = -1.0;
        for &x in &uniform_grid(200) {
            let beta = num(convex_scale_shift_map(cs, x), "beta")?;
            ensure!(beta > last, "beta not increasing");
            last = beta;
            let lhs = num(scaled.evaluate(x), "eval")?;
            let rhs = num(path.evaluate(beta), "eval")?.scale_real(1.0 - x + x * cs);
            ensure!(lhs.dist_max(&rhs) < 1e-12 * (1.0 + lhs.norm_max()), "path {idx}: beta identity fails at {x}");
        }
        ensure!(num(convex_scale_shift_map(cs, 0.0), "beta")? == 0.0 && num(convex_scale_shift_map(cs, 1.0), "beta")? == 1.0, "beta endpoints");
        checks += 1;
    }

    // concatenation contains every composition
    for (p1, p2) in [
        (crossing(), reverse(&crossing())),
        (both_instance(), reverse(&both_instance())),
        (triple(), MatrixPath::convex(triple().endpoints().1, random_matrix(&mut rng, 3))),
    ] {
        let s1 = pairings_of(&num(track(&p1, &cfg), "track")?, cfg.pairing_cap);
        let s2 = pairings_of(&num(track(&p2, &cfg), "track")?, cfg.pairing_cap);
        let cat = num(concatenate(&p1, &p2, 1e-12), "concatenate")?;
        let sc = pairings_of(&num(track(&cat, &cfg), "track")?, cfg.pairing_cap);
        for p in &s1.pairings {
            for q in &s2.pairings {
                let comp = num(p.then(q, tol), "compose")?;
                ensure!(sc.contains(&comp, 1e-6), "composition missing from the concatenation");
            }
        }
        checks += 1;
    }

    // block combination embeds the product of pairing sets
    let parts = [crossing(), both_instance(), MatrixPath::convex(CMatrix::diag_real(&[5.0]), CMatrix::diag_real(&[6.0]))];
    let combined = num(block_combine(&parts), "block")?;
    let sb = pairings_of(&num(track(&combined, &cfg), "track")?, cfg.pairing_cap);
    let sets: Vec<PairingSet> = parts
        .iter()
        .map(|p| track(p, &cfg).map(|t| pairings_of(&t, cfg.pairing_cap)))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let mut products = 0;
    for p in &sets[0].pairings {
        for q in &sets[1].pairings {
            for r in &sets[2].pairings {
                let mut want: Vec<(Complex64, Complex64)> = p.value_pairs();
                want.extend(q.value_pairs());
                want.extend(r.value_pairs());
                let found = sb.pairings.iter().any(|s| {
                    let have = s.value_pairs();
                    want.iter().all(|w| have.iter().any(|h| (w.0 - h.0).norm() < 1e-6 && (w.1 - h.1).norm() < 1e-6))
                });
                ensure!(found, "block product pairing missing");
                products += 1;
            }
        }
    }
    checks += 1;

    // closed-form verdict is invariant under shifts and a common positive scale
    for _ in 0..50 {
        let a = random_matrix(&mut rng, 2);
        let b = random_matrix(&mut rng, 2);
        let v = num(classify(&a, &b), "classify")?;
        if (v.arg_ratio.abs() - v.theta).abs() <= 1e-4 {
            continue;
        }
        let (s1, s2) = (c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let k = rng.gen_range(0.2..5.0);
        let w = num(classify(&a.add_scalar(s1).scale_real(k), &b.add_scalar(s2).scale_real(k)), "classify")?;
        let relabel = |x: (Complex64, Complex64)| ((x.0 + s1) * k, (x.1 + s2) * k);
        ensure!(v.pairings().len() == w.pairings().len(), "shift/scale changed the verdict count");
        for (pv, pw) in v.pairings().iter().zip(w.pairings()) {
            for x in pv {
                let y = relabel(*x);
                ensure!(pw.iter().any(|z| (z.0 - y.0).norm() < 1e-8 && (z.1 - y.1).norm() < 1e-8), "shift/scale changed a pairing");
            }
        }
    }
    checks += 1;

    Ok(format!("{checks} invariant checks over {} paths, {products} block products", family.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 7] = [
        ("1 perturbation bound", perturbation_bound, 30),
        ("2 splice witness under perturbation", splice_witness, 60),
        ("3 ripping", rip_criterion, 60),
        ("4 2x2 classifier", classifier, 60),
        ("5 convex reduction", reduction, 120),
        ("6 polynomial cross-oracle", poly_oracle, 60),
        ("7 structural invariants", structural, 30),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(budget);
        match (&out, over) {
            (Ok(msg), false) => println!("PASS criterion {name}: {msg} [{:.2}s < {budget}s]", took.as_secs_f64()),
            (Ok(msg), true) => {
                failed += 1;
                println!("FAIL criterion {name}: over budget {:.2}s > {budget}s ({msg})", took.as_secs_f64());
            }
            (Err(why), _) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{:.2}s]", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
