//! Scenarios for the published 2-adic zeta(5) and L(2, chi_-3) bounds.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::capacity::PlaceLedger;
use crate::confmaps::AnalyticMap;
use crate::holobound::{FixedArch, NumeratorMode, PenaltyShape, SPlace, Scenario, TauSpec};
use crate::error::Result;
use crate::hyperpade::{
    bivariate_diagonal, dihedral_generators, dihedral_monomial, dihedral_ode_residual, pade_identity_check,
};
use crate::series::{rat, rat_int, DenominatorType, Rational};

pub const CIRCLE_BC: f64 = 2.13322;
pub const LUNE_BC: f64 = 3.92881;
pub const FULLFORCE_BOUND: f64 = 4.43206;
pub const BRUTFORCE_BOUND: f64 = 5.52667;
pub const WEAKER_KAPPA: f64 = 22.0724;
pub const LUNE_KAPPA: f64 = 19.7439;
pub const L2CHI_LIMIT: f64 = 13.9938;
pub const L2CHI_KAPPA: f64 = 24781.0;
pub const PI_KAPPA: f64 = 15.086;

pub fn log_2_radius() -> f64 {
    12.0 * 2f64.ln()
}

fn zeta25(name: &str, map: AnalyticMap, grid_n: usize) -> Scenario {
    Scenario {
        name: name.into(),
        m: 6,
        m_nu: vec![1, 5],
        gamma: rat(1, 6),
        tau_b: TauSpec::Type(DenominatorType::from_columns(6, &[(1, rat_int(5))]).expect("staircase")),
        tau_sharp: rat_int(0),
        places_s: vec![],
        ledger: PlaceLedger { archimedean: vec![(map, 1.0)], nonarch_log_radius_sum: log_2_radius(), per_prime_log_radii: None },
        arch_fixed: vec![],
        numerator_mode: NumeratorMode::Integral,
        shape: PenaltyShape::Quadratic,
        grid_n,
    }
}

/// Circle template with the averaged numerator.
pub fn zeta25_circle(grid_n: usize) -> Scenario {
    zeta25("zeta25_circle", AnalyticMap::MobiusCircleX, grid_n)
}

/// Circle template with the sup-norm numerator and the coarse `tau = 5`.
pub fn zeta25_circle_sup(grid_n: usize) -> Scenario {
    let mut s = zeta25("zeta25_circle_sup", AnalyticMap::MobiusCircleX, grid_n);
    s.numerator_mode = NumeratorMode::SupNorm;
    s.tau_b = TauSpec::Explicit(rat_int(5));
    s
}

fn with_free_two_adic(mut s: Scenario) -> Scenario {
    s.places_s = vec![SPlace { label: "2".into(), log_rho_inv: log_2_radius(), kappa: None }];
    s.shape = PenaltyShape::Fractional;
    s
}

/// Circle template with the 2-adic place in `S`.
pub fn zeta25_weaker(grid_n: usize) -> Scenario {
    with_free_two_adic(zeta25("zeta25_weaker", AnalyticMap::MobiusCircleX, grid_n))
}

/// Lune template with the 2-adic place in `S`.
pub fn zeta25_lune(grid_n: usize) -> Scenario {
    with_free_two_adic(zeta25("zeta25_lune", AnalyticMap::LuneX, grid_n))
}

/// Same as [`zeta25_lune`] with the published integral in place of the map.
pub fn zeta25_lune_published() -> Scenario {
    let mut s = zeta25_lune(64);
    s.name = "zeta25_lune_published".into();
    s.ledger.archimedean.clear();
    s.arch_fixed = vec![FixedArch { label: "lune".into(), numerator: LUNE_BC, log_size: (14.0f64 / 29.0).ln() }];
    s
}

/// Same as [`zeta25_weaker`] with the published integral in place of the map.
pub fn zeta25_weaker_published() -> Scenario {
    let mut s = zeta25_weaker(64);
    s.name = "zeta25_weaker_published".into();
    s.ledger.archimedean.clear();
    s.arch_fixed = vec![FixedArch { label: "circle".into(), numerator: CIRCLE_BC, log_size: -(3f64.ln()) }];
    s
}

pub fn l2chi_log_size() -> f64 {
    let num: f64 = "5448339453535586608000000000".parse().expect("literal");
    let den: f64 = "8658833407565631122430056127".parse().expect("literal");
    256f64.ln() + num.ln() - den.ln()
}

/// `L(2, chi_-3)` from its published constants.
pub fn l2chi() -> Scenario {
    Scenario {
        name: "l2chi".into(),
        m: 14,
        m_nu: vec![],
        gamma: rat(1, 2),
        tau_b: TauSpec::Explicit(rat(27, 80) + rat(191, 49)),
        tau_sharp: rat_int(0),
        places_s: vec![SPlace { label: "S".into(), log_rho_inv: 11614f64.ln(), kappa: None }],
        ledger: PlaceLedger { archimedean: vec![], nonarch_log_radius_sum: 0.0, per_prime_log_radii: None },
        arch_fixed: vec![FixedArch { label: "published".into(), numerator: 11.845, log_size: l2chi_log_size() }],
        numerator_mode: NumeratorMode::Integral,
        shape: PenaltyShape::Fractional,
        grid_n: 64,
    }
}

/// One named exact check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteItem {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl SuiteItem {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Rational, Rational) {
    let nu = rat(rng.gen_range(1..12), rng.gen_range(1..12));
    let x = rat(rng.gen_range(-12..13), rng.gen_range(1..9));
    (nu, x)
}

/// Padé remainders, generating identity, ODE residuals, integrality and
/// denominator types, all by exact arithmetic.
pub fn identity_suite(seed: u64) -> Result<Vec<SuiteItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut item = SuiteItem { name: "pade".into(), checked: 0, failures: vec![] };
    for nu in [rat(1, 2), rat(1, 3), rat(2, 5), rat(1, 7)] {
        for m in 0..=8 {
            for n in 0..=8 {
                item.checked += 1;
                if let Err(e) = pade_identity_check(m, n, &nu, m + n + 2) {
                    item.failures.push(format!("nu={nu} m={m} n={n}: {e}"));
                }
            }
        }
    }
    out.push(item);

    let mut item = SuiteItem { name: "generating_identity".into(), checked: 0, failures: vec![] };
    for _ in 0..10 {
        let (nu, x) = random_pair(&mut rng);
        item.checked += 1;
        if dihedral_generators(&nu, &x, 13)?.a != bivariate_diagonal(&nu, &x, 13) {
            item.failures.push(format!("nu={nu} x={x}"));
        }
    }
    out.push(item);

    let mut item = SuiteItem { name: "dihedral_ode".into(), checked: 0, failures: vec![] };
    for _ in 0..20 {
        let (nu, x) = random_pair(&mut rng);
        let pair = dihedral_generators(&nu, &x, 21)?;
        item.checked += 1;
        let ra = dihedral_ode_residual(&pair.a, &nu, &x)?;
        let rb = dihedral_ode_residual(&pair.b, &nu, &x)?;
        if !ra.is_zero() || !rb.is_zero() || pair.b != dihedral_generators(&-nu.clone(), &x, 21)?.a {
            item.failures.push(format!("nu={nu} x={x}"));
        }
    }
    out.push(item);

    let mut item = SuiteItem { name: "integrality".into(), checked: 0, failures: vec![] };
    for r in [2i64, 3, 5, 6] {
        let nu = rat(1, r);
        for n in 0..=15usize {
            for j in 0..=(15 - n) {
                item.checked += 1;
                let c = dihedral_monomial(&nu, n, j) * Rational::from_integer(BigInt::from(r).pow(2 * j as u32));
                if !c.is_integer() {
                    item.failures.push(format!("r={r} n={n} j={j}"));
                }
            }
        }
    }
    out.push(item);

    let mut item = SuiteItem { name: "denominator_types".into(), checked: 0, failures: vec![] };
    let tau = DenominatorType::from_columns(6, &[(1, rat_int(5))])?.tau();
    item.checked += 1;
    if tau != rat(175, 36) {
        item.failures.push(format!("tau {tau}"));
    }
    for k in 1..=12 {
        item.checked += 1;
        let h: Rational = (1..=k).map(|j| rat(1, j as i64)).sum();
        let cols: Vec<(usize, Rational)> = (1..=k).map(|j| (j, rat(1, j as i64))).collect();
        let t = DenominatorType::from_columns(k + 1, &cols)?;
        if t.tau() != h - rat(k as i64, 2 * (k as i64 + 1)) || t.tau() != t.tau_row_form() {
            item.failures.push(format!("harmonic k={k}"));
        }
    }
    out.push(item);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holobound::{kappa_threshold, limit_bound};

    #[test]
    fn published_constants_reproduce() {
        let t = kappa_threshold(&zeta25_lune_published(), 6.0).unwrap();
        assert!((t.kappa - LUNE_KAPPA).abs() < 0.05, "{}", t.kappa);
        let t = kappa_threshold(&zeta25_weaker_published(), 6.0).unwrap();
        assert!((t.kappa - WEAKER_KAPPA).abs() < 0.05, "{}", t.kappa);
        let l = limit_bound(&l2chi()).unwrap();
        assert!((l.bound - L2CHI_LIMIT).abs() < 3e-3, "{}", l.bound);
        let t = kappa_threshold(&l2chi(), 14.0).unwrap();
        assert!((22000.0..27000.0).contains(&t.kappa), "{}", t.kappa);
    }

    #[test]
    fn suite_passes() {
        for item in identity_suite(1).unwrap() {
            assert!(item.ok(), "{item:?}");
        }
    }
}
