//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nikishin_hp::analysis::{
    a0_target, estimate_rate, first_level_sign_changes, pole_attraction, Experiment, GridSpec,
    Instance, PerturbationSpec, RowOutcome,
};
use nikishin_hp::hermite_pade::{
    check_orthogonality, perturbed_reduce, solve_type2, type2_remainder_tail, ForwardMoments,
    MultiIndex,
};
use nikishin_hp::measures::{inverse_measure, Literal, MeasureKind, MeasureSpec};
use nikishin_hp::nikishin::{build_system, check_chile, check_ratio_formula, SystemSpec};
use nikishin_hp::{Complex, Precision, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn lit(v: i64) -> Literal {
    Literal::from_i64(v)
}

fn sci(x: &Scalar) -> String {
    x.to_sci_string(3)
}

fn system(nodes: usize, intervals: &[(i64, i64)], scale: i64) -> SystemSpec {
    SystemSpec {
        generators: intervals
            .iter()
            .map(|&(a, b)| MeasureSpec {
                kind: MeasureKind::LegendreDensity {
                    node_count: nodes,
                    density_scale: lit(scale),
                },
                interval: (lit(a), lit(b)),
            })
            .collect(),
    }
}

/// `1 / (z - pole)^power`.
fn pole(pole: i64, power: u32) -> PerturbationSpec {
    let mut den = vec![1i64];
    for _ in 0..power {
        // multiply by (z - pole)
        let mut next = vec![0; den.len() + 1];
        for (i, c) in den.iter().enumerate() {
            next[i] -= pole * c;
            next[i + 1] += c;
        }
        den = next;
    }
    PerturbationSpec {
        num: vec![lit(1)],
        den: den.into_iter().map(lit).collect(),
    }
}

fn experiment(system: SystemSpec, perturbations: Vec<PerturbationSpec>) -> Experiment {
    Experiment {
        system,
        perturbations,
        grid: GridSpec::default(),
        pole_margin: 0.5,
    }
}

/// The two-generator fixture used by the convergence criteria.
fn convergence_fixture(perturbed: bool) -> Experiment {
    let perts = if perturbed {
        vec![pole(5, 1), pole(-5, 1)]
    } else {
        Vec::new()
    };
    experiment(system(32, &[(-1, 0), (1, 3)], 1), perts)
}

struct Sweep {
    base: Instance,
    rows: Vec<RowOutcome>,
    elapsed: Duration,
}

fn sweep(
    exp: &Experiment,
    ks: impl Iterator<Item = usize> + Clone,
    incompleteness: usize,
) -> Sweep {
    let start = Instant::now();
    let k_max = ks.clone().max().unwrap();
    let len = MultiIndex::diagonal(exp.m(), k_max).unwrap().tail_len();
    let base = exp
        .instance(Precision::default(), len)
        .expect("fixture realizes");
    let rows = ks
        .map(|k| {
            let n = MultiIndex::diagonal(exp.m(), k).unwrap();
            exp.solve_row(&base, &n, incompleteness)
                .expect("row solves")
        })
        .collect();
    Sweep {
        base,
        rows,
        elapsed: start.elapsed(),
    }
}

fn strictly_decreasing(xs: &[Scalar]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn sequence(xs: &[Scalar]) -> String {
    xs.iter().map(sci).collect::<Vec<_>>().join(" ")
}

fn rate(sw: &Sweep, pick: impl Fn(&RowOutcome) -> Scalar) -> f64 {
    let samples: Vec<(usize, Scalar)> =
        sw.rows.iter().map(|r| (r.row.n.total(), pick(r))).collect();
    estimate_rate(&samples)
        .map(|r| r.delta)
        .unwrap_or(f64::INFINITY)
}

fn atomic_exactness() -> Outcome {
    let start = Instant::now();
    let prec = Precision::default();
    let spec = system(8, &[(-1, 1)], 1);
    let sys = build_system(&spec, prec).unwrap();
    let n = MultiIndex::new(vec![8]).unwrap();
    let v = solve_type2(&sys, &n).unwrap();
    let moments = ForwardMoments::compute(&sys, 3 * n.tail_len());
    let tail = type2_remainder_tail(&moments, &v, 1, 2 * n.tail_len()).unwrap();
    let worst = tail
        .iter()
        .map(Scalar::abs)
        .fold(Scalar::zero(prec), Scalar::max);
    let elapsed = start.elapsed();
    Outcome {
        passed: worst <= Scalar::from_f64(1e-60, prec) && elapsed < Duration::from_secs(1),
        detail: format!(
            "8-point Legendre, n = (8): max tail coefficient {} over {} terms, deg Q = {}, {:.2?}",
            sci(&worst),
            tail.len(),
            v.q.degree(),
            elapsed
        ),
    }
}

fn random_points(rng: &mut ChaCha8Rng, count: usize, prec: Precision) -> Vec<Complex> {
    // box around the supports, kept at least 0.1 above or below the real axis
    (0..count)
        .map(|_| {
            let re = rng.gen_range(-3.0..9.0);
            let im = rng.gen_range(0.1..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            Complex::from_f64(re, im, prec)
        })
        .collect()
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let prec = Precision::default();
    let tol_chile = Scalar::from_f64(1e-50, prec);
    let tol_ratio = Scalar::from_f64(1e-40, prec);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = [Scalar::zero(prec), Scalar::zero(prec), Scalar::zero(prec)];
    let all = [(-1, 0), (1, 3), (4, 6)];
    for m in [2, 3] {
        let sys = build_system(&system(16, &all[..m], 1), prec).unwrap();
        let points = random_points(&mut rng, 20, prec);
        for z in &points {
            for j in 0..m {
                worst[0] = worst[0]
                    .clone()
                    .max(check_chile(&sys, j, z).unwrap().relative());
            }
            for k in 2..=m {
                worst[1] = worst[1]
                    .clone()
                    .max(check_ratio_formula(&sys, k, z).unwrap().relative());
            }
        }
        for g in sys.generators() {
            let inv = inverse_measure(g).unwrap();
            for z in &points {
                let prod = &g.cauchy(z).unwrap() * &inv.eval(z).unwrap();
                worst[2] = worst[2]
                    .clone()
                    .max(prod.sub_real(&Scalar::one(prec)).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        passed: worst[0] <= tol_chile
            && worst[1] <= tol_ratio
            && worst[2] <= tol_chile
            && elapsed < Duration::from_secs(10),
        detail: format!(
            "m = 2, 3 at 20 random points: chain identity {}, ratio formula {}, inverse round trip {}, {:.2?}",
            sci(&worst[0]),
            sci(&worst[1]),
            sci(&worst[2]),
            elapsed
        ),
    }
}

fn order_and_orthogonality(sw: &Sweep) -> Outcome {
    let prec = sw.base.precision();
    let tol = Scalar::from_f64(1e-40, prec);
    let mut passed = true;
    let mut worst_orth = Scalar::zero(prec);
    let mut min_order_gap = i64::MAX;
    let mut min_sign_gap = i64::MAX;
    for r in &sw.rows {
        let inst = r.instance(&sw.base);
        let total = r.row.n.total();
        let v = &r.vector;
        let orth = check_orthogonality(&inst.sys, &v.a, total)
            .unwrap()
            .relative();
        let changes = first_level_sign_changes(&inst.sys, &v.a, total - 1).unwrap();
        passed &= v.residual_order >= total && orth <= tol && changes + 1 >= total;
        min_order_gap = min_order_gap.min(v.residual_order as i64 - total as i64);
        min_sign_gap = min_sign_gap.min(changes as i64 - (total as i64 - 1));
        worst_orth = worst_orth.max(orth);
    }
    Outcome {
        passed,
        detail: format!(
            "unperturbed n = (k,k), k = 4..12: min(order - |n|) = {min_order_gap}, max orthogonality {}, min(sign changes - (|n|-1)) = {min_sign_gap}",
            sci(&worst_orth)
        ),
    }
}

fn ratio_limit(sw: &Sweep) -> Outcome {
    let errs: Vec<Scalar> = sw.rows.iter().map(|r| r.row.errors[0].clone()).collect();
    let delta = rate(sw, |r| r.row.errors[0].clone());
    Outcome {
        passed: strictly_decreasing(&errs) && delta < 0.9 && sw.elapsed < Duration::from_secs(120),
        detail: format!(
            "perturbed n = (k,k), k = 4..12: err_1 = [{}], rate {delta:.3}, {:.2?}",
            sequence(&errs),
            sw.elapsed
        ),
    }
}

/// Relative sup error of `a_0 / a_2` against the limit with the opposite sign
/// on the `r_2` term.
fn flipped_sign_error(r: &RowOutcome, base: &Instance) -> Scalar {
    let inst = r.instance(base);
    let v = &r.vector;
    let prec = v.precision();
    let r2 = &inst.pert.functions()[1];
    let mut err = Scalar::zero(prec);
    let mut size = Scalar::zero(prec);
    for z in &inst.grid.points {
        let target = &a0_target(&inst.sys, &inst.pert, z).unwrap()
            + &r2.eval(z).scale(&Scalar::from_i64(2, prec));
        let approx = &v.a[0].eval_complex(z) / &v.a[2].eval_complex(z);
        err = err.max((&approx - &target).abs());
        size = size.max(target.abs());
    }
    err / size
}

fn constant_limit(sw: &Sweep) -> Outcome {
    let errs: Vec<Scalar> = sw.rows.iter().map(|r| r.row.err_0.clone()).collect();
    let delta = rate(sw, |r| r.row.err_0.clone());
    let flipped: Vec<Scalar> = [0, sw.rows.len() - 1]
        .iter()
        .map(|&i| flipped_sign_error(&sw.rows[i], &sw.base))
        .collect();
    Outcome {
        passed: strictly_decreasing(&errs) && delta < 0.9,
        detail: format!(
            "perturbed n = (k,k), k = 4..12: err_0 = [{}], rate {delta:.3}; with +r_2 in the limit the error stays at {} (k = 4) and {} (k = 12)",
            sequence(&errs),
            sci(&flipped[0]),
            sci(&flipped[1])
        ),
    }
}

fn pole_counts(
    exp: &Experiment,
    r: &RowOutcome,
    base: &Instance,
    expected: usize,
) -> (bool, String) {
    let inst = r.instance(base);
    let eps = Scalar::from_f64(0.25, inst.precision());
    let mut ok = true;
    let mut parts = Vec::new();
    for j in 1..=exp.m() {
        let pa = pole_attraction(&inst.sys, &inst.pert, &r.vector, j, &eps).unwrap();
        let counts: Vec<String> = pa
            .counts
            .iter()
            .map(|(p, c)| {
                ok &= *c == expected && p.multiplicity == expected;
                format!("{}:{c}", p.location.re.to_sci_string(2))
            })
            .collect();
        ok &= pa.stray.is_empty();
        parts.push(format!(
            "a_{j} [{}] census {} escaping {}",
            counts.join(" "),
            pa.stray.len(),
            pa.escaping.len()
        ));
    }
    (ok, parts.join("; "))
}

fn pole_attraction_check(exp: &Experiment, sw: &Sweep) -> Outcome {
    let last = sw.rows.last().unwrap();
    let (simple_ok, simple) = pole_counts(exp, last, &sw.base, 1);

    let double = experiment(
        exp.system.clone(),
        vec![pole(5, 2), PerturbationSpec::zero()],
    );
    let dsw = sweep(&double, 12..=12, 0);
    let (double_ok, double_detail) = pole_counts(&double, &dsw.rows[0], &dsw.base, 2);
    Outcome {
        passed: simple_ok && double_ok,
        detail: format!(
            "n = (12,12), eps = 0.25: simple poles {simple}; double pole {double_detail}"
        ),
    }
}

fn reduction(sw: &Sweep) -> Outcome {
    let mut worst: Option<Scalar> = None;
    for r in &sw.rows {
        let inst = r.instance(&sw.base);
        let moments = inst.moments_for(r.row.n.tail_len());
        let rep = perturbed_reduce(&inst.pert, &r.vector, &moments).unwrap();
        worst = Some(match worst {
            None => rep.residual,
            Some(w) => {
                let p = w.precision();
                w.max(rep.residual.with_precision(p))
            }
        });
    }
    let worst = worst.unwrap();
    Outcome {
        passed: worst <= Scalar::from_f64(1e-40, worst.precision()),
        detail: format!(
            "perturbed n = (k,k), k = 4..12: max reduction residual {}",
            sci(&worst)
        ),
    }
}

fn incomplete() -> Outcome {
    let sw = sweep(&convergence_fixture(false), 6..=12, 3);
    let errs: Vec<Scalar> = sw.rows.iter().map(|r| r.row.errors[0].clone()).collect();
    let errs0: Vec<Scalar> = sw.rows.iter().map(|r| r.row.err_0.clone()).collect();
    let delta = rate(&sw, |r| r.row.errors[0].clone());
    let delta0 = rate(&sw, |r| r.row.err_0.clone());
    Outcome {
        passed: strictly_decreasing(&errs) && strictly_decreasing(&errs0) && delta < 0.95 && delta0 < 0.95,
        detail: format!(
            "unperturbed, 3 conditions dropped, k = 6..12: err_1 = [{}] rate {delta:.3}; err_0 = [{}] rate {delta0:.3}",
            sequence(&errs),
            sequence(&errs0)
        ),
    }
}

fn scaling(plain: &Sweep) -> Outcome {
    let scaled = sweep(
        &experiment(system(32, &[(-1, 0), (1, 3)], 7), Vec::new()),
        4..=12,
        0,
    );
    let mut passed = true;
    let mut worst: Option<Scalar> = None;
    for (a, b) in plain.rows.iter().zip(&scaled.rows) {
        let (a, b) = (&a.row, &b.row);
        passed &= a.n == b.n
            && a.skipped == b.skipped
            && a.nullity_flag == b.nullity_flag
            && a.precision_used == b.precision_used
            && a.residual_order == b.residual_order;
        let pairs = a.errors.iter().zip(&b.errors).chain([(&a.err_0, &b.err_0)]);
        for (x, y) in pairs {
            let d = (x - y).abs();
            worst = Some(match worst {
                None => d,
                Some(w) => {
                    let p = w.precision();
                    w.max(d.with_precision(p))
                }
            });
        }
    }
    let worst = worst.unwrap();
    passed &= worst <= Scalar::from_f64(1e-50, worst.precision());
    Outcome {
        passed,
        detail: format!(
            "weights times 7, k = 4..12: max change in any error {}, flags and orders identical: {}",
            sci(&worst),
            passed
        ),
    }
}

fn report(id: usize, name: &str, out: Outcome, failures: &mut usize) {
    let tag = if out.passed { "PASS" } else { "FAIL" };
    println!("criterion {id} [{tag}] {name}: {}", out.detail);
    if !out.passed {
        *failures += 1;
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        // no individually addressable tests
        return ExitCode::SUCCESS;
    }
    let mut failures = 0;
    report(1, "atomic exactness", atomic_exactness(), &mut failures);
    report(2, "identity suite", identity_suite(), &mut failures);

    let plain = sweep(&convergence_fixture(false), 4..=12, 0);
    report(
        3,
        "order and orthogonality",
        order_and_orthogonality(&plain),
        &mut failures,
    );

    let perturbed_exp = convergence_fixture(true);
    let perturbed = sweep(&perturbed_exp, 4..=12, 0);
    report(4, "ratio limits", ratio_limit(&perturbed), &mut failures);
    report(
        5,
        "constant-term limit",
        constant_limit(&perturbed),
        &mut failures,
    );
    report(
        6,
        "pole attraction",
        pole_attraction_check(&perturbed_exp, &perturbed),
        &mut failures,
    );
    report(
        7,
        "reduction consistency",
        reduction(&perturbed),
        &mut failures,
    );
    report(8, "incomplete solver", incomplete(), &mut failures);
    report(9, "scaling invariance", scaling(&plain), &mut failures);

    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
