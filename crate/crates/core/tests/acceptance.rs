use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use holobound_core::capacity::bost_charles_integral;
use holobound_core::confmaps::{eval_map, hauptmodul_at, phi_by_iteration, series_at_zero, AnalyticMap};
use holobound_core::dioph::*;
use holobound_core::holobound::{evaluate_bound, kappa_threshold, limit_bound};
use holobound_core::padiczeta::{eisenstein_pair_in_x, h_series_and_types, q_of_x, zeta2, zeta2_route_a, zeta5_inequality_scan};
use holobound_core::regressions::*;
use holobound_core::series::{rat_int, Rational};
use holobound_core::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass,
    Fail,
    /// Miss outside tolerance on a target the criterion asks to report rather than enforce.
    Discrepancy,
}

struct Check {
    outcome: Outcome,
    detail: String,
}

fn check(ok: bool, detail: String) -> Check {
    Check { outcome: if ok { Outcome::Pass } else { Outcome::Fail }, detail }
}

fn combine(parts: Vec<Check>) -> Check {
    let fail = parts.iter().any(|c| matches!(c.outcome, Outcome::Fail));
    let disc = parts.iter().any(|c| matches!(c.outcome, Outcome::Discrepancy));
    let detail = parts
        .iter()
        .map(|c| {
            let tag = match c.outcome {
                Outcome::Pass => "ok",
                Outcome::Fail => "FAIL",
                Outcome::Discrepancy => "DISCREPANCY",
            };
            format!("{} [{tag}]", c.detail)
        })
        .collect::<Vec<_>>()
        .join("; ");
    let outcome = if fail {
        Outcome::Fail
    } else if disc {
        Outcome::Discrepancy
    } else {
        Outcome::Pass
    };
    Check { outcome, detail }
}

fn exact_identities() -> Check {
    match identity_suite(2024) {
        Ok(items) => combine(
            items
                .into_iter()
                .map(|i| check(i.ok(), format!("{} {}/{}", i.name, i.checked - i.failures.len(), i.checked)))
                .collect(),
        ),
        Err(e) => check(false, format!("error: {e}")),
    }
}

fn map_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut dev: f64 = 0.0;
    for _ in 0..10 {
        let b = Complex64::from_polar(rng.gen_range(0.5..3.0), rng.gen_range(-PI..PI));
        let a = b * Complex64::from_polar(rng.gen_range(0.05..0.6), rng.gen_range(-PI..PI));
        let it = phi_by_iteration(a, b, 60, 10).expect("iteration");
        let s = series_at_zero(&AnalyticMap::phi(a, b).expect("phi"), 10).expect("series");
        for k in 0..10 {
            dev = dev.max((it.coeff(k) - s.coeff(k)).norm());
        }
    }
    let psi = AnalyticMap::psi(Complex64::new(-0.5, 0.0), Complex64::new(0.5, 0.0));
    let mut sine: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let z = Complex64::new(-1.5 + 0.3 * i as f64, -1.0 + 0.2 * j as f64);
            sine = sine.max((eval_map(&psi, z).expect("psi") - (2.0 * z).sin() / 2.0).norm());
        }
    }
    combine(vec![
        check(dev < 1e-9, format!("phi vs iteration max dev {dev:.2e}")),
        check(sine < 1e-12, format!("psi vs sin(2z)/2 max dev {sine:.2e}")),
    ])
}

fn quadrature() -> Check {
    let id = bost_charles_integral(&AnalyticMap::identity(), 4096).expect("identity");
    let circle = bost_charles_integral(&AnalyticMap::MobiusCircleX, 4096).expect("circle");
    let lune = bost_charles_integral(&AnalyticMap::LuneX, 4096).expect("lune");
    combine(vec![
        check(id.value.abs() < 1e-6, format!("identity {:.2e}", id.value)),
        check(
            (circle.value - CIRCLE_BC).abs() <= 5e-4,
            format!("circle {:.6} (est. err {:.1e}) target {CIRCLE_BC} +- 5e-4", circle.value, circle.error_estimate),
        ),
        check(
            (lune.value - LUNE_BC).abs() <= 1e-3,
            format!("lune {:.6} (est. err {:.1e}) target {LUNE_BC} +- 1e-3", lune.value, lune.error_estimate),
        ),
    ])
}

fn bounds() -> Check {
    let full = evaluate_bound(&zeta25_circle(4096)).expect("fullforce");
    let brut = evaluate_bound(&zeta25_circle_sup(4096)).expect("brutforce");
    let closed = hauptmodul_at(Complex64::new(0.2, 0.0)).expect("x(1/5)").re.ln();
    let weaker = kappa_threshold(&zeta25_weaker(4096), 6.0).map(|t| t.kappa);
    let lune = kappa_threshold(&zeta25_lune(4096), 6.0).map(|t| t.kappa);
    let chi_limit = limit_bound(&l2chi()).expect("l2chi").bound;
    let chi_kappa = kappa_threshold(&l2chi(), 14.0).map(|t| t.kappa);
    let near = |r: &Result<f64, _>, want: f64, tol: f64| r.as_ref().map(|k| (k - want).abs() <= tol).unwrap_or(false);
    combine(vec![
        check((full.bound - FULLFORCE_BOUND).abs() <= 1e-3, format!("circle bound {:.6}", full.bound)),
        check(
            (brut.bound - BRUTFORCE_BOUND).abs() <= 1e-3,
            format!("sup bound {:.6} at argmax {:.4}", brut.bound, brut.argmax.first().copied().unwrap_or(f64::NAN)),
        ),
        check(
            (brut.numerator - 12.0 * 2f64.ln() - closed).abs() < 1e-9,
            format!("sup {:.6} vs log x(1/5) {closed:.6}", brut.numerator - 12.0 * 2f64.ln()),
        ),
        check(near(&weaker, WEAKER_KAPPA, 0.05), format!("circle kappa {weaker:.4?}")),
        check(near(&lune, LUNE_KAPPA, 0.05), format!("lune kappa {lune:.4?}")),
        check((chi_limit - L2CHI_LIMIT).abs() <= 3e-3, format!("L(2,chi) limit {chi_limit:.5}")),
        check(
            chi_kappa.as_ref().map(|k| (22000.0..=27000.0).contains(k)).unwrap_or(false),
            format!("L(2,chi) kappa {chi_kappa:.1?}"),
        ),
    ])
}

fn two_adic() -> Check {
    let q = q_of_x(5).expect("q(x)");
    let want: Vec<Rational> = [0, 1, -24, 852, -35744].iter().map(|v| rat_int(*v)).collect();
    let (e2, _) = eisenstein_pair_in_x(1, 51).expect("E2");
    let e2_ok = (1..51).all(|n| e2.coeff(n).is_integer());
    let h = h_series_and_types(2, 41).expect("E'_-4");
    let b = zeta2(2, 64);
    let a = zeta2_route_a(2, 16);
    let agree = match (&a, &b) {
        (Ok(a), Ok(b)) => a.agreement(b) - a.valuation().unwrap_or(0),
        _ => -1,
    };
    let scan = zeta5_inequality_scan(100);
    combine(vec![
        check(q.coeffs() == want.as_slice(), "q(x) = x - 24x^2 + 852x^3 - 35744x^4".into()),
        check(e2_ok, "E*_2(x) integral to n=50".into()),
        check(
            h.type_single.ok,
            format!("E'_-4 type [1..5n] to n=40 (first failure {:?}; [1..n]^5 ok: {})", h.type_single.first_failure, h.type_power.ok),
        ),
        check(b.is_ok() && agree >= 16, format!("zeta_2(5) routes agree to {agree} bits")),
        check(scan.is_ok(), format!("zeta(5) scan to 100: {} exceptions", scan.map(|v| v.len()).unwrap_or(usize::MAX))),
    ])
}

fn diophantine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    for _ in 0..10_000 {
        let t = rng.gen_range(1..=4);
        let n: Vec<i64> = (0..t).map(|_| rng.gen_range(-1_000_000..1_000_000)).collect();
        let q = rng.gen_range(1..=6);
        let big_n = rng.gen_range(1..=60);
        match dirichlet_round(&n, q, big_n) {
            Ok(r) if dirichlet_ok(&n, q, &r) => {}
            _ => violations += 1,
        }
    }
    let primes = [2i64, 3, 5, 7, 11, 13];
    let mut bad_cosets = 0;
    for _ in 0..1_000 {
        let t = rng.gen_range(1..=3);
        let exps: Vec<i64> = (0..t).map(|_| rng.gen_range(-500..500)).collect();
        let gens: Vec<FactoredRational> =
            (0..t).map(|i| FactoredRational::from_ratio(primes[i], primes[i + 3]).expect("nonzero")).collect();
        let ok = coset_decompose(&exps, &gens, rng.gen_range(1..=5), rng.gen_range(1..=8)).map(|c| {
            let mut gamma = FactoredRational::one();
            for (e, g) in exps.iter().zip(&gens) {
                gamma = gamma.mul(&g.pow(*e));
            }
            c.r.to_i64().map(|r| c.a0.mul(&c.eta.pow(r)) == gamma).unwrap_or(false)
        });
        if ok != Ok(true) {
            bad_cosets += 1;
        }
    }
    let chain = effective_constant_chain(&ChainInput {
        residual_characteristic: None,
        g: GFunctionConfig::PowerLog { c: 1.0, d: 1, log_power: 0 },
        generators: vec![FactoredRational::prime_power(2, 1)],
        epsilon: 0.5,
        h_a: 0.0,
        c10: 1.0,
        c11: 1.0,
    });
    let chain_ok = chain.as_ref().map(|c| c.c8 == 16.0 && c.big_q == 23).unwrap_or(false);
    combine(vec![
        check(violations == 0, format!("Dirichlet violations {violations}/10000")),
        check(bad_cosets == 0, format!("coset mismatches {bad_cosets}/1000")),
        check(chain_ok, format!("chain c8, Q = {:?}", chain.map(|c| (c.c8, c.big_q)))),
    ])
}

fn certificates() -> Check {
    let grid = SweepGrid::default();
    let mut parts = Vec::new();
    let mut ratios = Vec::new();
    for r in [17u64, 25, 36, 49] {
        match binomial_certificate(&rat_int(2), r, &grid) {
            Ok(c) => {
                let re = revalidate(&c).unwrap_or(f64::NAN);
                let refined = revalidate_refined(&c).unwrap_or(f64::NAN);
                let lr = (r as f64).ln();
                ratios.push(c.kappa_eff / (r as f64 * lr.powi(3)).sqrt());
                parts.push(check(
                    c.kappa_eff < r as f64 && (re - c.kappa_eff).abs() < 1e-6 * c.kappa_eff,
                    format!(
                        "r={r} kappa {:.3} (R {:.1}, k {}, refined grid {refined:.3})",
                        c.kappa_eff, c.radius_star, c.k_star
                    ),
                ));
            }
            Err(e) => parts.push(check(false, format!("r={r}: {e}"))),
        }
    }
    if ratios.len() == 4 {
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
        parts.push(check(hi.is_finite(), format!("kappa/sqrt(r log^3 r) in [{lo:.3}, {hi:.3}]")));
    }
    let pi_grid = SweepGrid { radius_min: 10.0, radius_max: 1e5, radius_steps: 25, k_max: None, grid_n: 512 };
    match pi_measure_search(20, &pi_grid) {
        Ok(p) => {
            let k = p.certificate.kappa_eff;
            let within = (k - PI_KAPPA).abs() <= 0.1 * PI_KAPPA;
            parts.push(Check {
                outcome: if within { Outcome::Pass } else { Outcome::Discrepancy },
                detail: format!("pi kappa {k:.3} (R {:.1}, k {}) target {PI_KAPPA} +- 10%", p.certificate.radius_star, p.certificate.k_star),
            });
        }
        Err(e) => parts.push(check(false, format!("pi: {e}"))),
    }
    combine(parts)
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 7] = [
        ("1 exact identities", Duration::from_secs(60), exact_identities),
        ("2 map oracles", Duration::from_secs(10), map_oracles),
        ("3 Bost-Charles quadrature", Duration::from_secs(120), quadrature),
        ("4 holonomy bounds", Duration::from_secs(120), bounds),
        ("5 modular and 2-adic", Duration::from_secs(300), two_adic),
        ("6 diophantine", Duration::from_secs(30), diophantine),
        ("7 certificate searches", Duration::from_secs(600), certificates),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let mut c = f();
        let elapsed = start.elapsed();
        if elapsed > limit {
            c = combine(vec![c, check(false, format!("runtime {elapsed:.1?} over {limit:?}"))]);
        }
        let tag = match c.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => {
                failed += 1;
                "FAIL"
            }
            Outcome::Discrepancy => "PASS (documented discrepancy)",
        };
        println!("{tag}: {name} ({elapsed:.2?}): {}", c.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
