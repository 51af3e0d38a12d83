//! Acceptance suite. Runs every criterion in sequence (so the timings are
//! not skewed by concurrent tests) and prints one PASS/FAIL line each.
//! Built without the libtest harness so the report is always shown.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use numrange::gallery::{
    approximant_experiment, materialize, sagitta, truncation_family, Family, OperatorSpec, SpecKind, TargetShape,
};
use numrange::geometry::{
    classify_operator, classify_samples, curvature_profile, hausdorff, standard_position, Thresholds, Verdict,
};
use numrange::joint::{joint_corner_check, JointStatus, OperatorTuple};
use numrange::linalg::{hermitian_eig, random_matrix, random_unitary, ComplexMatrix, UnitVector, C64, ONE, ZERO};
use numrange::range::{boundary_curve, flat_portions, support_point};
use numrange::reducing::{corner_reducing_check, detect_corners, proof_trace, spherical_sequence, TraceMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn j2() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap()
}

fn circle(radius: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(radius, TAU * k as f64 / n as f64))
        .collect()
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn eigensolver() -> Outcome {
    let start = Instant::now();
    let mut worst_rec: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    for i in 0..200u64 {
        let n = 2 + (i as usize * 31) % 63;
        let a = random_matrix(n, 1000 + i).hermitian_part();
        let eig = hermitian_eig(&a).unwrap();
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        worst_rec = worst_rec.max(eig.reconstruct().sub(&a).frobenius_norm() / scale);
        let v = &eig.eigenvectors;
        let gram = v.adjoint().matmul(v).sub(&ComplexMatrix::identity(n));
        worst_orth = worst_orth.max(gram.frobenius_norm() / (n as f64).sqrt());
    }
    let t = start.elapsed();
    outcome(
        worst_rec <= 1e-10 && worst_orth <= 1e-10 && t < Duration::from_secs(10),
        format!(
            "reconstruction {worst_rec:.2e}, orthonormality {worst_orth:.2e}, {:.2} s",
            secs(t)
        ),
    )
}

fn disk_oracle() -> Outcome {
    let start = Instant::now();
    let curve = boundary_curve(&j2(), 720).unwrap();
    let t2 = start.elapsed();
    let on_circle = curve
        .points
        .iter()
        .map(|p| (p.point.norm() - 0.5).abs())
        .fold(0.0, f64::max);
    let support = curve.points.iter().map(|p| (p.support - 0.5).abs()).fold(0.0, f64::max);
    let polygon = hausdorff(&curve.boundary_points(), &circle(0.5, 20_000));

    let start = Instant::now();
    let j5 = materialize(&OperatorSpec::new(SpecKind::Jordan { n: 5 })).unwrap();
    let c5 = boundary_curve(&j5, 720).unwrap();
    let r5 = c5.points.iter().map(|p| p.point.norm()).fold(0.0, f64::max);
    let t5 = start.elapsed();
    let err5 = (r5 - (PI / 6.0).cos()).abs();
    let limit = Duration::from_secs(1);
    outcome(
        on_circle <= 1e-6 && support <= 1e-6 && err5 <= 1e-6 && t2 < limit && t5 < limit,
        format!(
            "J2 samples off circle {on_circle:.1e}, support error {support:.1e} (inscribed 720-gon {polygon:.2e}); \
             J5 radius error {err5:.1e}; {:.3} s / {:.3} s",
            secs(t2),
            secs(t5)
        ),
    )
}

fn normal_polygon() -> Outcome {
    let verts = [ONE, c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    let t = ComplexMatrix::from_diag(&verts);
    let curve = boundary_curve(&t, 720).unwrap();
    let h = hausdorff(&curve.boundary_points(), &verts);
    let flats = flat_portions(&t, 720, 1e-8).unwrap();
    let mut flat_err: f64 = 0.0;
    for f in &flats {
        let edge = verts
            .iter()
            .zip(verts.iter().cycle().skip(1))
            .map(|(&a, &b)| (f.start - a).norm().max((f.end - b).norm()))
            .fold(f64::INFINITY, f64::min);
        flat_err = flat_err.max(edge);
    }
    let thr = Thresholds::default();
    let verdicts: Vec<Verdict> = verts
        .iter()
        .map(|&v| classify_operator(&t, v, &thr).unwrap().verdict)
        .collect();
    let all_linear = verdicts.iter().all(|v| *v == Verdict::LinearVertex);
    outcome(
        h <= 1e-8 && flats.len() == 4 && flat_err <= 1e-8 && all_linear,
        format!(
            "hausdorff {h:.1e}, {} flats (endpoint error {flat_err:.1e}), verdicts {verdicts:?}",
            flats.len()
        ),
    )
}

/// Rectangle `[-1,0]×[0,1]` joined with `{x^{3/2} ≤ y ≤ 1, 0 ≤ x ≤ 1}`.
fn set_c_samples() -> Vec<C64> {
    let mut pts = vec![c(-1.0, 0.0), c(-1.0, 1.0), c(1.0, 1.0), c(0.0, 0.0)];
    for k in 0..=60 {
        let x = 2f64.powi(-k);
        pts.push(c(x, x.powf(1.5)));
        pts.push(c(-x, 0.0));
    }
    pts
}

fn onesided_set() -> Outcome {
    let samples = set_c_samples();
    let std = standard_position(&samples, ZERO).unwrap();
    let scales: Vec<f64> = (1..=8).map(|k| 4f64.powi(-k)).collect();
    let prof = curvature_profile(&std, &scales).unwrap();
    let mut worst: f64 = 0.0;
    for (k, q) in (1..=8).zip(&prof.right_quotients) {
        let expect = 4f64.powf(k as f64 / 2.0);
        worst = worst.max(q.map_or(f64::INFINITY, |q| (q / expect - 1.0).abs()));
    }
    let left_zero = prof.left_quotients.iter().all(|q| *q == Some(0.0));

    let thr = Thresholds {
        scales: (1..=20).map(|k| 4f64.powi(-k)).collect(),
        ..Thresholds::default()
    };
    let cl = classify_samples(&samples, ZERO, &thr).unwrap();
    let finest = cl.profile.right_quotients.last().copied().flatten().unwrap_or(0.0);
    outcome(
        worst <= 1e-6 && left_zero && finest > thr.q_max && cl.verdict == Verdict::InfiniteRighthand,
        format!(
            "right quotients within {worst:.1e} of 4^(k/2), left all zero: {left_zero}, \
             quotient {finest:.3e} at 4^-20, verdict {:?}",
            cl.verdict
        ),
    )
}

fn random_corner_sum(rng: &mut ChaCha8Rng, seed: u64) -> (OperatorSpec, C64) {
    let lam = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let k = rng.random_range(1..=11);
    let inner = match rng.random_range(0..3) {
        0 => SpecKind::Jordan { n: k },
        1 => SpecKind::CompactPerturbation {
            lam: c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            rho: rng.random_range(0.3..0.8),
            n: k,
        },
        _ => SpecKind::Normal {
            values: (0..k)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        },
    };
    let spec = OperatorSpec::new(SpecKind::CornerSum {
        lam,
        inner: Box::new(OperatorSpec::new(inner).with_seed(seed)),
        scale: rng.random_range(0.2..2.0),
        angle: None,
    })
    .with_seed(seed);
    (spec, lam)
}

fn corner_certificates() -> Outcome {
    let start = Instant::now();
    let thr = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut corners, mut bad, mut missed) = (0, 0, 0);
    for seed in 0..100 {
        let (spec, lam) = random_corner_sum(&mut rng, seed);
        let t = materialize(&spec).unwrap();
        let t_norm = t.op_norm().unwrap();
        let reports = corner_reducing_check(&t, 720, &thr).unwrap();
        corners += reports.len();
        bad += reports.iter().filter(|r| !r.is_reducing(t_norm)).count();
        if !reports.iter().any(|r| (r.lam - lam).norm() <= 1e-6 * t_norm.max(1.0)) {
            missed += 1;
        }
    }
    let mut false_corners = 0;
    for seed in 0..100u64 {
        let mut r = ChaCha8Rng::seed_from_u64(500 + seed);
        let u = random_unitary(2, 900 + seed);
        let rot = C64::from_polar(1.0, r.random_range(0.0..TAU));
        let shift = c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let t = u.matmul(&j2().scale(rot).shifted(shift)).matmul(&u.adjoint());
        false_corners += detect_corners(&t, 720).unwrap().len();
        false_corners += corner_reducing_check(&t, 720, &thr).unwrap().len();
    }
    let elapsed = start.elapsed();
    outcome(
        bad == 0 && missed == 0 && false_corners == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{corners} corners certified, {bad} without certificate, {missed} seeded corners missed, \
             {false_corners} false corners on J2 rotations, {:.2} s",
            secs(elapsed)
        ),
    )
}

fn proof_trace_decay() -> Outcome {
    let block = ComplexMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.25, 0.0)], vec![ZERO, c(0.0, 1.0)]]).unwrap();
    let t = ComplexMatrix::direct_sum(&[ComplexMatrix::zeros(1, 1), block]);
    let start = UnitVector::normalize(vec![ONE, ONE, ONE]).unwrap();
    let seq = spherical_sequence(&start, &UnitVector::basis(3, 0), 50, 1e-4).unwrap();
    let corner = proof_trace(&t, &seq, TraceMode::TwoSided, None).unwrap();

    let control = j2().shifted(c(-0.5, 0.0)).scale(c(0.0, -1.0));
    let witness = UnitVector::normalize(vec![ONE, ONE]).unwrap();
    let seq = spherical_sequence(&UnitVector::basis(2, 0), &witness, 50, 1e-4).unwrap();
    let ctl = proof_trace(&control, &seq, TraceMode::TwoSided, None).unwrap();
    outcome(
        corner.decay_ratio <= 1e-3 && corner.verdict && ctl.decay_ratio >= 0.1 && !ctl.verdict,
        format!(
            "corner decay ratio {:.2e}, J2 control ratio {:.3}",
            corner.decay_ratio, ctl.decay_ratio
        ),
    )
}

fn anderson() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut previous = f64::INFINITY;
    let mut worst: f64 = 0.0;
    let mut dims_ok = true;
    for m in [5, 9, 17, 33] {
        let rep = approximant_experiment(TargetShape::Halfdisk, m, 1e-8).unwrap();
        let d = rep.hausdorff_to_halfdisk;
        ok &= d < previous;
        previous = d;
        worst = worst.max((d - sagitta(PI, m)).abs());
        let mut dim = m;
        for s in &rep.deflation_steps {
            dims_ok &= s.dimension < dim;
            dim = s.dimension;
        }
        dims_ok &= rep.terminated && !rep.deflation_steps.is_empty();
    }
    let d3 = approximant_experiment(TargetShape::Halfdisk, 3, 1e-8)
        .unwrap()
        .hausdorff_to_halfdisk;
    let err3 = (d3 - (1.0 - 0.5f64.sqrt())).abs();
    let elapsed = start.elapsed();
    outcome(
        ok && worst <= 1e-6 && dims_ok && err3 <= 1e-6 && elapsed < Duration::from_secs(10),
        format!(
            "decreasing {ok}, sagitta error {worst:.1e}, deflation dimensions decreasing {dims_ok}, \
             m=3 error {err3:.1e}, {:.2} s",
            secs(elapsed)
        ),
    )
}

fn shift_truncations() -> Outcome {
    let sizes: Vec<usize> = (3..=24).collect();
    let rows = truncation_family(Family::ShiftTruncation, &sizes, 0).unwrap();
    let worst = rows
        .iter()
        .map(|r| (r.numerical_radius - (PI / (r.n as f64 + 1.0)).cos()).abs())
        .fold(0.0, f64::max);
    let corners: usize = rows.iter().map(|r| r.corners.len()).sum();
    outcome(
        worst <= 1e-7 && corners == 0,
        format!("radius error {worst:.1e}, {corners} corners"),
    )
}

fn joint_range() -> Outcome {
    let thr = Thresholds::default();
    let tup = OperatorTuple::new(vec![
        ComplexMatrix::from_diag(&[ONE, c(0.0, 1.0), c(-1.0, 0.0)]),
        ComplexMatrix::from_diag(&[c(2.0, 0.0), ZERO, c(-2.0, 0.0)]),
    ])
    .unwrap();
    let rep = joint_corner_check(&tup, &[ONE, c(2.0, 0.0)], &thr).unwrap();
    let dim = rep.certificate.as_ref().map_or(0, |c| c.dimension);
    let pair = OperatorTuple::new(vec![j2(), j2()]).unwrap();
    let failure = joint_corner_check(&pair, &[c(0.5, 0.0), c(0.5, 0.0)], &thr);
    let failure_status = failure.as_ref().map(|r| r.status).ok();
    outcome(
        rep.status == JointStatus::Pass && dim == 1 && failure_status == Some(JointStatus::HypothesisFailure),
        format!(
            "diagonal tuple {:?} with dimension {dim}; (J2, J2) {failure_status:?}",
            rep.status
        ),
    )
}

fn equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let n = rng.random_range(2..=8);
        let t = random_matrix(n, 7000 + i);
        let phi = rng.random_range(0.0..TAU);
        let shift = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let rot = C64::from_polar(1.0, phi);
        let moved = t.scale(rot).shifted(shift);
        let adj = t.adjoint();
        for j in 0..64 {
            let theta = TAU * j as f64 / 64.0;
            let p = support_point(&t, theta - phi).unwrap();
            let q = support_point(&moved, theta).unwrap();
            let expect = p.support + (C64::from_polar(1.0, -theta) * shift).re;
            worst = worst.max((q.support - expect).abs());
            if p.multiplicity == 1 {
                worst = worst.max((q.point - (rot * p.point + shift)).norm());
            }
            let p = support_point(&t, -theta).unwrap();
            let a = support_point(&adj, theta).unwrap();
            worst = worst.max((a.support - p.support).abs());
            if p.multiplicity == 1 {
                worst = worst.max((a.point - p.point.conj()).norm());
            }
        }
    }
    outcome(worst <= 1e-9, format!("worst deviation {worst:.1e} over 50 triples"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("hermitian eigensolver", eigensolver),
        ("disk oracle", disk_oracle),
        ("normal polygon", normal_polygon),
        ("one-sided infinite curvature", onesided_set),
        ("corner certificates", corner_certificates),
        ("proof trace decay", proof_trace_decay),
        ("anderson demonstrator", anderson),
        ("shift truncations", shift_truncations),
        ("joint corners", joint_range),
        ("equivariance", equivariance),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
