//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! straight to stderr (so it shows without `--nocapture`) before asserting.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use dirichlet_interp::characters::{gcd, is_fundamental_discriminant, kronecker_symbol, RealPrimitiveCharacter};
use dirichlet_interp::gramzero::{find_zeros, gram_table, ZeroTable};
use dirichlet_interp::interp::{
    build_approximant, discover_zeros, error_table, evaluate, standard_points, IndexPolicy, Method, Search,
};
use dirichlet_interp::lasso::{constraint_recommendation, run_experiment, ConstraintVerdict};
use dirichlet_interp::lref::{functional_equation_relative_residual, functional_equation_residual, hardy_z};
use dirichlet_interp::mpnum::{log10_abs, to_decimal};
use dirichlet_interp::solve::{gmres_solve, lu_solve_big, DenseMatrix, SolveMethod, SolveOptions};
use dirichlet_interp::{BigComplex, BigReal, PrecisionContext};

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict} ({detail})");
}

/// The reproduction solver. GMRES stopped at a 1e-20 relative residual
/// leaves the approximant accurate to only a few digits away from the nodes.
fn lu() -> SolveOptions {
    SolveOptions {
        method: SolveMethod::Lu,
        ..SolveOptions::default()
    }
}

fn ctx(digits: u32) -> PrecisionContext {
    PrecisionContext::new(digits).unwrap()
}

fn chi(d: i64) -> RealPrimitiveCharacter {
    RealPrimitiveCharacter::from_discriminant(d).unwrap()
}

/// `x` agrees with every digit of the printed decimal `anchor`, read either
/// as truncated or as rounded.
fn matches_printed(x: &BigReal, anchor: &str) -> bool {
    let decimals = anchor.split('.').nth(1).map_or(0, str::len) as i32;
    let truncated = to_decimal(x, 30).starts_with(anchor);
    let a: f64 = anchor.parse().unwrap();
    let rounded = (x.to_f64() - a).abs() <= 0.5 * 10f64.powi(-decimals) * (1.0 + 1e-9);
    truncated || rounded
}

#[test]
fn criterion_1_character_layer() {
    let c = ctx(60);
    let tol = c.tol(10);
    let mut checked = 0;
    let mut failures = Vec::new();
    for d in -200i64..=200 {
        if !is_fundamental_discriminant(d) {
            continue;
        }
        checked += 1;
        let x = chi(d);
        let q = x.modulus() as i64;
        let lim = 10 * q;
        for n in 1..=lim {
            let v = x.chi(n);
            if v != kronecker_symbol(d, n) {
                failures.push(format!("d={d} n={n}: table disagrees with (d/n)"));
            }
            if v != x.chi(n + q) {
                failures.push(format!("d={d} n={n}: not q-periodic"));
            }
            if (v == 0) != (gcd(n as u64, q as u64) > 1) {
                failures.push(format!("d={d} n={n}: zero set is not gcd(n,q) > 1"));
            }
            for m in 1..=lim {
                if x.chi(n * m) != v * x.chi(m) {
                    failures.push(format!("d={d} n={n} m={m}: not multiplicative"));
                    break;
                }
            }
        }
        let tau = x.gauss_sum(&c);
        let sqrt_q = Float::with_val(c.prec(), q).sqrt();
        if (tau.abs() - &sqrt_q).abs() > tol {
            failures.push(format!("d={d}: |τ| − √q too large"));
        }
        let one = BigComplex::one(c.prec());
        if (&x.epsilon_factor(&c) - &one).abs() > tol {
            failures.push(format!("d={d}: |ε − 1| too large"));
        }
    }
    let pass = failures.is_empty();
    report(1, pass, &format!("{checked} fundamental discriminants, {} failures", failures.len()));
    assert!(pass, "{:?}", &failures[..failures.len().min(10)]);
}

#[test]
fn criterion_2_functional_equation() {
    let c = ctx(120);
    let bound = c.tol(20);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel = f64::NEG_INFINITY;
    let mut worst_abs = f64::NEG_INFINITY;
    let mut fails = 0;
    for d in [-3i64, -4] {
        let x = chi(d);
        for _ in 0..50 {
            let s = c.complex(rng.gen_range(-5.0..=5.0), rng.gen_range(-300.0..=300.0));
            let abs = functional_equation_residual(&x, &s, &c).unwrap();
            let rel = functional_equation_relative_residual(&x, &s, &c).unwrap();
            worst_abs = worst_abs.max(log10_abs(&abs));
            worst_rel = worst_rel.max(log10_abs(&rel));
            if rel > bound || abs > bound {
                fails += 1;
            }
        }
    }
    let pass = fails == 0;
    report(
        2,
        pass,
        &format!("100 points, worst log10 residual: absolute {worst_abs:.1}, relative {worst_rel:.1}, bound -100"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_gram_anchors() {
    let c = ctx(120);
    let g4 = gram_table(&chi(-4), 700, &c).unwrap();
    let g3 = gram_table(&chi(-3), 700, &c).unwrap();
    let checks = [
        ("d=-4 g_0", &g4.entries[0].value, "3.3697"),
        ("d=-4 g_699", &g4.entries[699].value, "831.7394"),
        ("d=-3 g_0", &g3.entries[0].value, "4.8301"),
        ("d=-3 g_499", &g3.entries[499].value, "658.4834"),
        ("d=-3 g_699", &g3.entries[699].value, "871.5669"),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for (name, value, anchor) in checks {
        let ok = matches_printed(value, anchor);
        pass &= ok;
        details.push(format!("{name}={} vs {anchor} {}", to_decimal(value, 11), if ok { "ok" } else { "MISMATCH" }));
    }
    // the mismatching anchors are the points one step earlier
    let shifted = [
        ("d=-4 g_698", &g4.entries[698].value, "831.7394"),
        ("d=-3 g_498", &g3.entries[498].value, "658.4834"),
        ("d=-3 g_698", &g3.entries[698].value, "871.5669"),
    ];
    for (name, value, anchor) in shifted {
        details.push(format!("{name}={} ({})", to_decimal(value, 11), if matches_printed(value, anchor) { "matches" } else { "no match" }));
    }
    report(3, pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_4_zero_anchors() {
    let c = ctx(120);
    let mut details = Vec::new();
    let mut pass = true;
    for (d, count, anchors) in [
        (-4i64, 450usize, vec![(1usize, "6.020948"), (450, "628.824833")]),
        (-3, 636, vec![(1, "8.039737"), (470, "660.877547"), (636, "870.903928")]),
    ] {
        let x = chi(d);
        let table = find_zeros(&x, count, &c).unwrap();
        for (m, anchor) in anchors {
            let value = &table.entries[m - 1].value;
            let ok = matches_printed(value, anchor);
            pass &= ok;
            let mut line = format!("d={d} γ_{m}={} vs {anchor}", to_decimal(value, 12));
            if !ok {
                // is the printed value a zero at all?
                let lo = c.parse(anchor).unwrap();
                let hi = &lo + c.parse("0.000001").unwrap();
                let sign_change = hardy_z(&x, &lo, &c).unwrap().is_sign_negative()
                    != hardy_z(&x, &hi, &c).unwrap().is_sign_negative();
                line.push_str(if sign_change {
                    " MISMATCH (printed value is a zero with a different index)"
                } else {
                    " MISMATCH"
                });
            }
            details.push(line);
        }
    }
    report(4, pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_5_gram_method_full_scale() {
    let c = ctx(250);
    let x = chi(-4);
    let gram = gram_table(&x, 500, &c).unwrap();
    let min_node_digits = gram
        .entries
        .iter()
        .map(|e| -log10_abs(&e.residual))
        .fold(f64::INFINITY, f64::min);
    let (f, rep) = build_approximant(&x, Method::GramImag, &gram.values(), 2, IndexPolicy::Coprime, &lu(), &c).unwrap();
    let rows = error_table(&f, &x, &standard_points(&c), &c).unwrap();
    let at_100 = rows.iter().find(|r| r.label == "1/2 + 100i").unwrap();
    let worst = rows.iter().max_by(|a, b| a.error.partial_cmp(&b.error).unwrap()).unwrap();
    let pass = min_node_digits >= 200.0
        && log10_abs(&at_100.error) <= -60.0
        && rows.iter().all(|r| log10_abs(&r.error) <= -25.0);
    report(
        5,
        pass,
        &format!(
            "node residual ≤ 1e-{min_node_digits:.0}, LU residual {}, |L−F|(1/2+100i) = {}, worst {} at {}",
            to_decimal(&rep.relative_residual, 3),
            to_decimal(&at_100.error, 6),
            to_decimal(&worst.error, 3),
            worst.label
        ),
    );
    assert!(pass);
}

fn truncated_table(table: &ZeroTable, from: usize, to: usize) -> ZeroTable {
    ZeroTable {
        d: table.d,
        digits: table.digits,
        entries: table.entries[from - 1..to].to_vec(),
    }
}

#[test]
fn criterion_6_zeros_method_discovery() {
    let c = ctx(150);
    let x = chi(-4);
    let zeros = find_zeros(&x, 150, &c).unwrap();
    let node_digits = zeros.entries[..100].iter().map(|e| e.achieved_digits).min().unwrap();
    let nodes: Vec<BigReal> = zeros.entries[..100].iter().map(|e| e.value.clone()).collect();
    let (f, rep) = build_approximant(&x, Method::FullZeros, &nodes, 1, IndexPolicy::Coprime, &lu(), &c).unwrap();
    let seeds = truncated_table(&zeros, 101, 150);
    let found = discover_zeros(&f, &x, Search::FromReference(&seeds), None, &c).unwrap();
    let bound = c.parse("1e-10").unwrap();
    let within = found
        .iter()
        .filter(|z| z.converged && z.offset_abs().is_some_and(|o| o <= bound))
        .count();
    let worst = found
        .iter()
        .filter_map(|z| z.offset_abs())
        .map(|o| log10_abs(&o))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = node_digits >= 130 && rep.converged && within == 50;
    report(
        6,
        pass,
        &format!(
            "nodes to {node_digits} digits, LU residual {}, {within}/50 seeds within 1e-10, worst log10 offset {worst:.1}",
            to_decimal(&rep.relative_residual, 3)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_gram_method_discovery() {
    let c = ctx(150);
    let x = chi(-3);
    let gram = gram_table(&x, 200, &c).unwrap();
    let (f, rep) = build_approximant(&x, Method::GramImag, &gram.values(), 2, IndexPolicy::Coprime, &lu(), &c).unwrap();
    // independent low-precision reference, extending past g_199
    let reference = find_zeros(&x, 230, &ctx(40)).unwrap();
    let found = discover_zeros(&f, &x, Search::GramIntervals(&gram), Some(&reference), &c).unwrap();
    let (lo, hi) = (&gram.entries[0].value, &gram.entries[199].value);
    let bound = c.parse("1e-8").unwrap();
    let good = found
        .iter()
        .filter(|z| {
            z.zero.as_ref().is_some_and(|v| &v.im >= lo && &v.im <= hi)
                && z.offset_abs().is_some_and(|o| o <= bound)
        })
        .count();
    let pass = rep.converged && good >= 180;
    report(
        7,
        pass,
        &format!("{} candidates, {good} zeros in [g_0, g_199] within 1e-8 of the reference (need 180)", found.len()),
    );
    assert!(pass);
}

fn residual(a: &DenseMatrix<BigReal>, x: &[BigReal], b: &[BigReal], prec: u32) -> BigReal {
    let mut num = Float::with_val(prec, 0);
    let mut den = Float::with_val(prec, 0);
    for i in 0..a.rows() {
        let mut r = b[i].clone();
        for j in 0..a.cols() {
            r -= &a[(i, j)] * &x[j];
        }
        num += &r * &r;
        den += &b[i] * &b[i];
    }
    (num / den).sqrt()
}

#[test]
fn criterion_8_solver_correctness() {
    let c = ctx(80);
    let prec = c.prec();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut worst_agreement = f64::NEG_INFINITY;
    for trial in 0..50 {
        let n = rng.gen_range(2..=100usize);
        let tol = if trial % 2 == 0 { 1e-20 } else { 10f64.powi(-rng.gen_range(10..=60)) };
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            let v: f64 = rng.gen_range(-1.0..1.0);
            Float::with_val(prec, if i == j { v + 2.0 * (n as f64).sqrt() } else { v })
        });
        let b: Vec<BigReal> = (0..n).map(|_| Float::with_val(prec, rng.gen_range(-1.0..1.0))).collect();
        let opts = SolveOptions {
            method: SolveMethod::Gmres,
            tol,
            max_iter: 1000,
        };
        let (xg, rep) = gmres_solve(&a, &b, &opts).unwrap();
        let (xl, _) = lu_solve_big(&a, &b, &c).unwrap();
        let res = residual(&a, &xg, &b, prec).to_f64();
        let diff: BigReal = xg.iter().zip(&xl).map(|(p, q)| Float::with_val(prec, p - q).square()).fold(Float::with_val(prec, 0), |acc, v| acc + v).sqrt();
        let norm: BigReal = xl.iter().map(|v| Float::with_val(prec, v * v)).fold(Float::with_val(prec, 0), |acc, v| acc + v).sqrt();
        let agreement = (diff / norm).to_f64();
        worst_agreement = worst_agreement.max(agreement / tol);
        if !rep.converged {
            failures.push(format!("trial {trial}: GMRES did not converge"));
        }
        if res > 1.01 * tol {
            failures.push(format!("trial {trial}: residual {res:e} > 1.01·{tol:e}"));
        }
        if agreement > 100.0 * tol {
            failures.push(format!("trial {trial}: GMRES/LU differ by {agreement:e}"));
        }
    }
    let pass = failures.is_empty();
    report(
        8,
        pass,
        &format!("50 systems, worst GMRES/LU difference {worst_agreement:.2e}·tol, {} failures", failures.len()),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_9_lasso_partition() {
    let mut pass = true;
    let mut details = Vec::new();
    for d in [-4i64, -3] {
        let x = chi(d);
        let rep = run_experiment(&x, 100, 60, None).unwrap();
        let verdict = constraint_recommendation(&rep, x.modulus());
        pass &= verdict.is_confirmed();
        details.push(match verdict {
            ConstraintVerdict::Confirmed { q } => format!("q={q} clean partition"),
            ConstraintVerdict::Violated { noncoprime, coprime } => {
                format!("q={} violated: n={} vs n={}", x.modulus(), noncoprime.0, coprime.0)
            }
        });
    }
    report(9, pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_10_unconstrained_failure() {
    let c = ctx(120);
    let x = chi(-4);
    let zeros = find_zeros(&x, 50, &c).unwrap();
    let rho1 = BigComplex::new(c.ratio(1, 2), zeros.entries[0].value.clone());
    let mut sizes = Vec::new();
    let mut details = Vec::new();
    for (name, opts) in [("LU", lu()), ("GMRES tol 1e-20", SolveOptions::default())] {
        let (f, rep) =
            build_approximant(&x, Method::FullZeros, &zeros.values(), 1, IndexPolicy::AllNaturals, &opts, &c).unwrap();
        let size = evaluate(&f, &rho1, &c).abs().to_f64();
        sizes.push(size);
        details.push(format!(
            "{name}: |F(ρ_1)| = {size:.3e}, relative residual {}",
            to_decimal(&rep.relative_residual, 3)
        ));
    }
    // the default (LU) pipeline decides
    let pass = sizes[0] > 0.1;
    report(10, pass, &details.join("; "));
    assert!(pass);
}
