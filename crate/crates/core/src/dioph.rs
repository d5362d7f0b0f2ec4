//! Heights on finitely generated subgroups of `Q^*`, simultaneous Dirichlet
//! approximation, coset decomposition, the effective-constant chain, and
//! certificate sweeps for binomial roots and for pi.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::capacity::{bost_charles_integral, padic_ledger_for_root, PlaceLedger};
use crate::confmaps::{eval_map, AnalyticMap};
use crate::error::{Error, Result};
use crate::holobound::{
    assemble, kappa_threshold_assembled, Assembled, NumeratorMode, PenaltyShape, SPlace, Scenario, TauSpec,
};
use crate::numeric::bisect_predicate;
use crate::series::{prime_factors, rat, rat_int, DenominatorType, Rational};

/// `sign * prod p^{e_p}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredRational {
    pub sign: i8,
    pub exponents: BTreeMap<u64, i64>,
}

impl FactoredRational {
    pub fn one() -> Self {
        FactoredRational { sign: 1, exponents: BTreeMap::new() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Precondition("factored rational must be nonzero".into()));
        }
        let mut exponents = BTreeMap::new();
        for (n, s) in [(num.unsigned_abs(), 1i64), (den.unsigned_abs(), -1i64)] {
            for p in prime_factors(n) {
                let mut k = n;
                let mut v = 0;
                while k % p == 0 {
                    k /= p;
                    v += 1;
                }
                *exponents.entry(p).or_insert(0) += s * v;
            }
        }
        exponents.retain(|_, e| *e != 0);
        let sign = if (num < 0) ^ (den < 0) { -1 } else { 1 };
        Ok(FactoredRational { sign, exponents })
    }

    pub fn prime_power(p: u64, e: i64) -> Self {
        let mut exponents = BTreeMap::new();
        if e != 0 {
            exponents.insert(p, e);
        }
        FactoredRational { sign: 1, exponents }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut exponents = self.exponents.clone();
        for (p, e) in &o.exponents {
            *exponents.entry(*p).or_insert(0) += e;
        }
        exponents.retain(|_, e| *e != 0);
        FactoredRational { sign: self.sign * o.sign, exponents }
    }

    pub fn pow(&self, n: i64) -> Self {
        let exponents = self.exponents.iter().filter(|_| n != 0).map(|(p, e)| (*p, e * n)).collect();
        let sign = if self.sign < 0 && n.rem_euclid(2) == 1 { -1 } else { 1 };
        FactoredRational { sign, exponents }
    }

    pub fn is_one(&self) -> bool {
        self.sign == 1 && self.exponents.is_empty()
    }

    pub fn value(&self) -> Rational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &self.exponents {
            let pe = BigInt::from(*p).pow(e.unsigned_abs() as u32);
            if *e > 0 {
                num *= pe;
            } else {
                den *= pe;
            }
        }
        Rational::new(num * self.sign as i64, den)
    }
}

/// `sum c_p log p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogHeight {
    pub coefficients: BTreeMap<u64, i64>,
}

impl LogHeight {
    pub fn value(&self) -> f64 {
        self.coefficients.iter().map(|(p, c)| *c as f64 * (*p as f64).ln()).sum()
    }
}

/// `max(sum_{e_p > 0} e_p log p, sum_{e_p < 0} -e_p log p)` as a formal sum.
pub fn exact_log_height(x: &FactoredRational) -> LogHeight {
    let pos: BTreeMap<u64, i64> = x.exponents.iter().filter(|(_, e)| **e > 0).map(|(p, e)| (*p, *e)).collect();
    let neg: BTreeMap<u64, i64> = x.exponents.iter().filter(|(_, e)| **e < 0).map(|(p, e)| (*p, -*e)).collect();
    let (hp, hn) = (LogHeight { coefficients: pos }, LogHeight { coefficients: neg });
    if hp.value() >= hn.value() {
        hp
    } else {
        hn
    }
}

pub fn height(x: &FactoredRational) -> f64 {
    exact_log_height(x).value()
}

fn factorial(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// `log n!`, summed below 4096 and by Stirling's series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 4096 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletRound {
    pub r: BigInt,
    pub q: u64,
    pub p: Vec<BigInt>,
}

/// `|n_i - r p_i| <= r Q^{-1/t}` checked exactly as `Q |n_i - r p_i|^t <= r^t`.
pub fn dirichlet_ok(n: &[i64], big_q: u64, round: &DirichletRound) -> bool {
    let t = n.len() as u32;
    let rt = round.r.pow(t);
    n.iter().zip(&round.p).all(|(ni, pi)| {
        let err = (BigInt::from(*ni) - &round.r * pi).abs();
        BigInt::from(big_q) * err.pow(t) <= rt
    })
}

fn nearest(num: &BigInt, den: &BigInt) -> BigInt {
    // round(num/den) for den > 0, halves away from zero
    let two = BigInt::from(2);
    let twice = num * &two;
    let q = (&twice + den) / (&two * den);
    if num.is_negative() {
        -((-num * &two + den) / (&two * den))
    } else {
        q
    }
}

/// Exhaustive search for `q <= Q` with `r = Q! N / q` meeting the
/// simultaneous approximation bound.
pub fn dirichlet_round(n: &[i64], big_q: u64, big_n: u64) -> Result<DirichletRound> {
    if big_q == 0 || big_n == 0 || n.is_empty() {
        return Err(Error::Precondition("dirichlet_round: Q, N >= 1 and t >= 1".into()));
    }
    let total = factorial(big_q) * big_n;
    for q in 1..=big_q {
        let r = &total / q;
        let p: Vec<BigInt> = n.iter().map(|ni| nearest(&(BigInt::from(*ni) * q), &total)).collect();
        let round = DirichletRound { r, q, p };
        if dirichlet_ok(n, big_q, &round) {
            return Ok(round);
        }
    }
    Err(Error::SearchFailure(big_q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosetDecomposition {
    pub a0: FactoredRational,
    pub eta: FactoredRational,
    pub r: BigInt,
    pub c9: f64,
    pub height_a0: f64,
    pub height_bound: f64,
}

fn exponent_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::Precondition("exponent exceeds i64".into()))
}

/// `gamma = a0 eta^r` with `eta = prod xi_i^{p_i}`.
pub fn coset_decompose(
    gamma_exponents: &[i64],
    generators: &[FactoredRational],
    big_q: u64,
    big_n: u64,
) -> Result<CosetDecomposition> {
    if gamma_exponents.len() != generators.len() {
        return Err(Error::Precondition("coset_decompose: one exponent per generator".into()));
    }
    let round = dirichlet_round(gamma_exponents, big_q, big_n)?;
    let mut a0 = FactoredRational::one();
    let mut eta = FactoredRational::one();
    for ((ni, pi), xi) in gamma_exponents.iter().zip(&round.p).zip(generators) {
        let residual = BigInt::from(*ni) - &round.r * pi;
        a0 = a0.mul(&xi.pow(exponent_i64(&residual)?));
        eta = eta.mul(&xi.pow(exponent_i64(pi)?));
    }
    let c9: f64 = generators.iter().map(height).sum();
    let t = gamma_exponents.len() as f64;
    let r_f = round.r.to_f64().unwrap_or(f64::INFINITY);
    let height_bound = c9 * r_f * (big_q as f64).powf(-1.0 / t);
    let height_a0 = height(&a0);
    if height_a0 > height_bound * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::SearchFailure(big_q));
    }
    Ok(CosetDecomposition { a0, eta, r: round.r, c9, height_a0, height_bound })
}

#[derive(Clone, Debug, PartialEq)]
pub enum GFunctionConfig {
    /// `c t^{1/(2d)} (log t)^{-log_power}`.
    PowerLog { c: f64, d: u32, log_power: i32 },
    /// Piecewise linear through increasing abscissae, with the declared
    /// point beyond which it increases.
    Table { points: Vec<(f64, f64)>, onset: f64 },
}

impl GFunctionConfig {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GFunctionConfig::PowerLog { c, d, log_power } => {
                let base = c * t.powf(1.0 / (2.0 * *d as f64));
                if *log_power == 0 {
                    base
                } else {
                    base * t.ln().powi(-log_power)
                }
            }
            GFunctionConfig::Table { points: pts, .. } => {
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                for w in pts.windows(2) {
                    if t <= w[1].0 {
                        let s = (t - w[0].0) / (w[1].0 - w[0].0);
                        return w[0].1 + s * (w[1].1 - w[0].1);
                    }
                }
                pts[pts.len() - 1].1
            }
        }
    }

    /// Point beyond which `g` is increasing.
    pub fn onset(&self) -> f64 {
        match self {
            GFunctionConfig::PowerLog { d, log_power, .. } => {
                if *log_power <= 0 {
                    0.0
                } else {
                    (2.0 * *d as f64 * *log_power as f64).exp()
                }
            }
            GFunctionConfig::Table { onset, .. } => *onset,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainInput {
    /// Residual characteristic of `v`, `None` for archimedean.
    pub residual_characteristic: Option<u64>,
    pub g: GFunctionConfig,
    pub generators: Vec<FactoredRational>,
    pub epsilon: f64,
    pub h_a: f64,
    pub c10: f64,
    pub c11: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub c8: f64,
    pub c8_clamped: bool,
    pub c9: f64,
    pub big_q: u64,
    pub g_prime: u64,
    pub big_n: BigInt,
    pub c_final: f64,
    /// `N > (Q!)^2`, the regime where `r` must carry both factorizations.
    pub n_exceeds_factorial_square: bool,
}

pub fn effective_constant_chain(input: &ChainInput) -> Result<ChainReport> {
    if !(input.epsilon > 0.0) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let g = &input.g;
    let onset = g.onset();
    let target = 2.0 / input.epsilon;
    let start = onset.max(1e-12);
    let (c8, clamped) = if g.eval(start) >= target {
        (onset, true)
    } else {
        let mut hi = start.max(1.0) * 2.0;
        while g.eval(hi) < target {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Onset { lo: start, hi });
            }
        }
        let samples: Vec<f64> = (0..=64).map(|i| g.eval(start + (hi - start) * i as f64 / 64.0)).collect();
        if samples.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Onset { lo: start, hi });
        }
        let x = bisect_predicate(start, hi, 1e-14, |x| g.eval(x) >= target);
        // snap to an integer when g hits the target there
        let r = x.round();
        (if (x - r).abs() < 1e-9 * x.max(1.0) && g.eval(r) >= target { r } else { x }, false)
    };
    let c9: f64 = input.generators.iter().map(height).sum();
    let t = input.generators.len() as i32;
    let q_real = (2.0 * c8).powi(t) * c9.powi(t);
    let big_q = (q_real - 1e-9 * q_real.abs()).ceil().max(1.0) as u64;
    let g_prime = if input.residual_characteristic == Some(2) { 3 } else { 2 };
    let x = (2.0 * c8 * input.h_a).ln() - ln_factorial(big_q.saturating_sub(1));
    let mut big_n = BigInt::one();
    let mut log_n = 0.0;
    while log_n <= x {
        big_n *= g_prime;
        log_n += (g_prime as f64).ln();
    }
    let n_exceeds_factorial_square = if big_q <= 64 {
        let f = factorial(big_q);
        big_n > &f * &f
    } else {
        log_n > 2.0 * ln_factorial(big_q)
    };
    Ok(ChainReport {
        c8,
        c8_clamped: clamped,
        c9,
        big_q,
        g_prime,
        big_n,
        c_final: input.c11 * (1.0 + input.h_a),
        n_exceeds_factorial_square,
    })
}

/// One point of a certificate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub r: Option<u64>,
    pub radius: f64,
    pub k: usize,
    pub kappa: Option<f64>,
    pub numerator: f64,
    /// Denominator with the free kappa at infinity.
    pub denominator: f64,
}

impl SweepRow {
    pub fn feasible(&self) -> bool {
        self.kappa.is_some()
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Precondition(format!("csv: {e}"));
    w.write_record(["r", "R", "k", "kappa", "feasible", "numerator", "denominator"]).map_err(io)?;
    for row in rows {
        w.write_record([
            row.r.map(|r| r.to_string()).unwrap_or_default(),
            format!("{}", row.radius),
            row.k.to_string(),
            row.kappa.map(|k| format!("{k}")).unwrap_or_default(),
            row.feasible().to_string(),
            format!("{}", row.numerator),
            format!("{}", row.denominator),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Precondition(format!("csv: {e}")))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub radius_min: f64,
    pub radius_max: f64,
    pub radius_steps: usize,
    /// Largest `k`; defaults to `r - 1` for binomial roots.
    pub k_max: Option<usize>,
    pub grid_n: usize,
}

impl SweepGrid {
    pub fn radii(&self) -> Vec<f64> {
        let n = self.radius_steps.max(1);
        if n == 1 {
            return vec![self.radius_min];
        }
        let (a, b) = (self.radius_min.ln(), self.radius_max.ln());
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    }
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { radius_min: 30.0, radius_max: 3000.0, radius_steps: 25, k_max: None, grid_n: 512 }
    }
}

/// Largest `rho` with `max_{|z| = rho} |m(z)| < bound`, by bisection.
pub fn measured_radius(m: &AnalyticMap, bound: f64) -> Result<f64> {
    let samples = 2048;
    let sup = |rho: f64| -> f64 {
        (0..samples)
            .map(|k| {
                eval_map(m, Complex64::from_polar(rho, 2.0 * PI * k as f64 / samples as f64))
                    .map(|v| v.norm())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    };
    if sup(1.0) < bound {
        return Ok(1.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sup(mid) < bound {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Scenario for the system `{1, H, ..., H^k}` on `scaled(map, R)`.
pub fn power_system_scenario(
    name: &str,
    map: AnalyticMap,
    ledger_sum: f64,
    k: usize,
    tau: TauSpec,
    log_rho_inv: f64,
    grid_n: usize,
) -> Scenario {
    Scenario {
        name: name.into(),
        m: k + 1,
        m_nu: vec![1; k + 1],
        gamma: rat(1, k as i64 + 1),
        tau_b: tau,
        tau_sharp: rat_int(0),
        places_s: vec![SPlace { label: "overconvergent".into(), log_rho_inv, kappa: None }],
        ledger: PlaceLedger { archimedean: vec![(map, 1.0)], nonarch_log_radius_sum: ledger_sum, per_prime_log_radii: None },
        arch_fixed: vec![],
        numerator_mode: NumeratorMode::Integral,
        shape: PenaltyShape::Quadratic,
        grid_n,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub kappa_eff: f64,
    pub radius_star: f64,
    pub k_star: usize,
    pub rows: Vec<SweepRow>,
    /// Scenario at the optimum, for re-evaluation.
    pub scenario: Scenario,
}

struct RadiusData {
    radius: f64,
    assembled_base: Assembled,
    log_rho_inv: f64,
}

fn sweep(
    r_label: Option<u64>,
    grid: &SweepGrid,
    k_values: &[usize],
    map_at: impl Fn(f64) -> Result<AnalyticMap> + Sync,
    critical: f64,
    ledger_sum: f64,
    tau_of: impl Fn(usize) -> TauSpec + Sync,
) -> Result<Certificate> {
    let data = grid
        .radii()
        .into_par_iter()
        .map(|radius| -> Result<RadiusData> {
            let map = map_at(radius)?;
            let rho = measured_radius(&map, critical)?;
            let s = power_system_scenario("probe", map, ledger_sum, 1, TauSpec::Explicit(rat_int(0)), -rho.ln(), grid.grid_n);
            Ok(RadiusData { radius, assembled_base: assemble(&s)?, log_rho_inv: -rho.ln() })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut best: Option<(f64, f64, usize)> = None;
    for d in &data {
        for &k in k_values {
            let tau = tau_of(k);
            let s = power_system_scenario("sweep", map_at(d.radius)?, ledger_sum, k, tau.clone(), d.log_rho_inv, grid.grid_n);
            let mut a = d.assembled_base.clone();
            a.tau_total = crate::series::rational_to_f64(&tau.value());
            let kappa = kappa_threshold_assembled(&s, &a, (k + 1) as f64).ok().map(|t| t.kappa);
            let denominator = a.log_size - a.tau_total;
            rows.push(SweepRow { r: r_label, radius: d.radius, k, kappa, numerator: a.numerator, denominator });
            if let Some(kap) = kappa {
                if best.map_or(true, |(b, _, _)| kap < b) {
                    best = Some((kap, d.radius, k));
                }
            }
        }
    }
    let (kappa_eff, radius_star, k_star) = best.ok_or(Error::InfeasibleEverywhere)?;
    let d = data.iter().find(|d| d.radius == radius_star).ok_or(Error::InfeasibleEverywhere)?;
    let scenario = power_system_scenario(
        "certificate",
        map_at(radius_star)?,
        ledger_sum,
        k_star,
        tau_of(k_star),
        d.log_rho_inv,
        grid.grid_n,
    );
    Ok(Certificate { kappa_eff, radius_star, k_star, rows, scenario })
}

/// `(1 -+ sqrt(1 - x))^2 / x^2` for `x = 1 - a`.
pub fn binomial_singularities(a: f64) -> Result<(f64, f64)> {
    let x = 1.0 - a;
    if x == 0.0 || !(a > 0.0) {
        return Err(Error::Precondition("binomial root: a must be positive and different from 1".into()));
    }
    let s = (1.0 - x).sqrt();
    Ok((((1.0 - s) / x).powi(2), ((1.0 + s) / x).powi(2)))
}

/// Best certified exponent for `a^{1/r}` over the sweep grid.
pub fn binomial_certificate(a: &Rational, r: u64, grid: &SweepGrid) -> Result<Certificate> {
    if r < 3 {
        return Err(Error::Precondition("binomial_certificate: r >= 3".into()));
    }
    let af = crate::series::rational_to_f64(a);
    let (alpha, beta) = binomial_singularities(af)?;
    let phi = AnalyticMap::phi(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))?;
    let ledger = padic_ledger_for_root(r)?;
    let k_max = grid.k_max.unwrap_or(r as usize - 1).max(1);
    let ks: Vec<usize> = (1..=k_max).collect();
    sweep(
        Some(r),
        grid,
        &ks,
        |radius| Ok(phi.clone().scaled(radius)),
        alpha.abs(),
        ledger.nonarch_log_radius_sum,
        |_| TauSpec::Explicit(rat_int(0)),
    )
}

/// Re-runs the certificate scenario at its own grid and returns the kappa.
pub fn revalidate(cert: &Certificate) -> Result<f64> {
    let k = cert.scenario.m as f64;
    Ok(crate::holobound::kappa_threshold(&cert.scenario, k)?.kappa)
}

/// Re-runs the certificate scenario with the quadrature grid doubled.
pub fn revalidate_refined(cert: &Certificate) -> Result<f64> {
    let mut s = cert.scenario.clone();
    s.grid_n *= 2;
    Ok(crate::holobound::kappa_threshold(&s, s.m as f64)?.kappa)
}

/// Type `[1..n][1..n/2]...[1..n/k]` on `k + 1` functions.
pub fn pi_system_type(k: usize) -> Result<DenominatorType> {
    let cols: Vec<(usize, Rational)> = (1..=k).map(|j| (j, rat(1, j as i64))).collect();
    DenominatorType::from_columns(k + 1, &cols)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiMeasure {
    pub certificate: Certificate,
    /// Radius below which the limit denominator is nonpositive at `k_star`.
    pub feasibility_boundary: f64,
}

pub fn pi_measure_search(k_max: usize, grid: &SweepGrid) -> Result<PiMeasure> {
    if k_max < 1 {
        return Err(Error::Precondition("pi_measure_search: k_max >= 1".into()));
    }
    let alpha = Complex64::new(-0.5, 0.0);
    let phi = AnalyticMap::phi(alpha, Complex64::new(0.5, 0.0))?;
    let ks: Vec<usize> = (1..=k_max).collect();
    let types: Vec<TauSpec> =
        (0..=k_max).map(|k| pi_system_type(k.max(1)).map(TauSpec::Type)).collect::<Result<Vec<_>>>()?;
    let certificate = sweep(None, grid, &ks, |radius| Ok(phi.clone().scaled(radius)), 0.5, 0.0, |k| types[k].clone())?;
    let tau = crate::series::rational_to_f64(&types[certificate.k_star].value());
    // limit denominator is log R - tau
    let feasibility_boundary = bisect_predicate(1e-9, 1e9, 1e-12, |r: f64| r.ln() - tau > 0.0);
    Ok(PiMeasure { certificate, feasibility_boundary })
}

/// Torus average for `scaled(phi_{alpha,beta}, R)`; exposed for sweeps that
/// tabulate numerators only.
pub fn scaled_phi_numerator(alpha: f64, beta: f64, radius: f64, grid_n: usize) -> Result<f64> {
    let m = AnalyticMap::phi(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))?.scaled(radius);
    Ok(bost_charles_integral(&m, grid_n)?.value)
}
