//! Assembly of holonomy bounds, feasibility, and irrationality-exponent
//! thresholds.

use crate::capacity::{bost_charles_integral, sup_log_on_circle, PlaceLedger};
use crate::confmaps::conformal_size;
use crate::error::{Error, Result};
use crate::numeric::bisect_predicate;
use crate::series::{rational_to_f64, DenominatorType, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum TauSpec {
    Explicit(Rational),
    Type(DenominatorType),
}

impl TauSpec {
    pub fn value(&self) -> Rational {
        match self {
            TauSpec::Explicit(t) => t.clone(),
            TauSpec::Type(d) => d.tau(),
        }
    }
}

/// A place in `S` where the functions are only known to converge on a disc
/// of radius `rho`, `log_rho_inv = -log rho`.
#[derive(Clone, Debug, PartialEq)]
pub struct SPlace {
    pub label: String,
    pub log_rho_inv: f64,
    /// `None` marks the unknown solved for by [`kappa_threshold`].
    pub kappa: Option<f64>,
}

/// An archimedean place given by published constants instead of a map.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedArch {
    pub label: String,
    pub numerator: f64,
    pub log_size: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumeratorMode {
    /// Torus average of `log|phi(z) - phi(w)|`.
    Integral,
    /// `sup log|phi|` over the circle.
    SupNorm,
}

/// How the `S`-places enter the denominator.
#[derive(Clone, Debug, PartialEq)]
pub enum PenaltyShape {
    /// `- sum L + (sum kappa - E)^2 / sum(kappa^2 / L)`.
    Quadratic,
    /// `- (1 - gamma)(2/kappa - (1 - gamma)/kappa^2) L` for a single place.
    Fractional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub m: usize,
    /// `m_nu[nu]` functions of degree `nu`.
    pub m_nu: Vec<usize>,
    pub gamma: Rational,
    pub tau_b: TauSpec,
    pub tau_sharp: Rational,
    pub places_s: Vec<SPlace>,
    pub ledger: PlaceLedger,
    pub arch_fixed: Vec<FixedArch>,
    pub numerator_mode: NumeratorMode,
    pub shape: PenaltyShape,
    pub grid_n: usize,
}

impl Scenario {
    /// `E = sum nu m_nu / m`.
    pub fn degree_mean(&self) -> f64 {
        let s: usize = self.m_nu.iter().enumerate().map(|(nu, c)| nu * c).sum();
        s as f64 / self.m as f64
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Precondition("scenario: m must be positive".into()));
        }
        if !self.m_nu.is_empty() && self.m_nu.iter().sum::<usize>() != self.m {
            return Err(Error::Precondition("scenario: m_nu must sum to m".into()));
        }
        let g = rational_to_f64(&self.gamma);
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::Precondition("scenario: gamma must lie in (0, 1]".into()));
        }
        let mut reals: Vec<(String, f64)> = vec![("nonarch_log_radius_sum".into(), self.ledger.nonarch_log_radius_sum)];
        for p in &self.places_s {
            reals.push((format!("{}.log_rho_inv", p.label), p.log_rho_inv));
            if let Some(k) = p.kappa {
                reals.push((format!("{}.kappa", p.label), k));
            }
            if p.log_rho_inv < 0.0 {
                return Err(Error::Precondition(format!("{}: log_rho_inv must be nonnegative", p.label)));
            }
        }
        for a in &self.arch_fixed {
            reals.push((format!("{}.numerator", a.label), a.numerator));
            reals.push((format!("{}.log_size", a.label), a.log_size));
        }
        for (_, w) in &self.ledger.archimedean {
            reals.push(("archimedean weight".into(), *w));
        }
        for (name, v) in reals {
            if v.is_nan() {
                return Err(Error::NanInput(name));
            }
        }
        Ok(())
    }
}

/// The kappa-independent parts of a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembled {
    pub numerator: f64,
    pub numerator_error: f64,
    pub log_size: f64,
    pub tau_total: f64,
    /// Maximizer angles of the sup-norm terms, in ledger order.
    pub argmax: Vec<f64>,
}

pub fn assemble(s: &Scenario) -> Result<Assembled> {
    s.validate()?;
    let mut numerator = s.ledger.nonarch_log_radius_sum;
    let mut numerator_error = 0.0;
    let mut log_size = s.ledger.nonarch_log_radius_sum;
    let mut argmax = Vec::new();
    for (map, w) in &s.ledger.archimedean {
        match s.numerator_mode {
            NumeratorMode::Integral => {
                let bc = bost_charles_integral(map, s.grid_n)?;
                numerator += w * bc.value;
                numerator_error += w.abs() * bc.error_estimate;
            }
            NumeratorMode::SupNorm => {
                let sup = sup_log_on_circle(map, s.grid_n.max(256))?;
                numerator += w * sup.value;
                argmax.push(sup.argmax);
            }
        }
        log_size += w * conformal_size(map)?.ln();
    }
    for a in &s.arch_fixed {
        numerator += a.numerator;
        log_size += a.log_size;
    }
    let tau_total = rational_to_f64(&(s.tau_b.value() + &s.tau_sharp));
    Ok(Assembled { numerator, numerator_error, log_size, tau_total, argmax })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub numerator: f64,
    pub numerator_error: f64,
    pub denominator: f64,
    /// `numerator / denominator`, infinite when infeasible.
    pub bound: f64,
    pub feasible: bool,
    pub kappa_threshold: Option<f64>,
    pub side_condition_ok: bool,
    pub argmax: Vec<f64>,
}

/// The `S`-place contribution to the denominator for the given kappas.
pub fn penalty(s: &Scenario, kappas: &[f64]) -> f64 {
    match s.shape {
        PenaltyShape::Quadratic => {
            if s.places_s.is_empty() {
                return 0.0;
            }
            let e = s.degree_mean();
            let sum_l: f64 = s.places_s.iter().map(|p| p.log_rho_inv).sum();
            let sum_k: f64 = kappas.iter().sum();
            let sum_k2: f64 = s.places_s.iter().zip(kappas).map(|(p, k)| k * k / p.log_rho_inv).sum();
            sum_l - (sum_k - e).powi(2) / sum_k2
        }
        PenaltyShape::Fractional => {
            let g = 1.0 - rational_to_f64(&s.gamma);
            s.places_s.iter().zip(kappas).map(|(p, k)| g * (2.0 / k - g / (k * k)) * p.log_rho_inv).sum()
        }
    }
}

fn denominator_at(s: &Scenario, a: &Assembled, kappas: &[f64]) -> f64 {
    a.log_size - a.tau_total - penalty(s, kappas)
}

/// `kappa_u <= L_u sum(kappa^2/L) / (sum kappa - E)` at every place.
pub fn side_condition(s: &Scenario, kappas: &[f64]) -> bool {
    if s.places_s.is_empty() || s.shape == PenaltyShape::Fractional {
        return true;
    }
    let e = s.degree_mean();
    let sum_k: f64 = kappas.iter().sum();
    let sum_k2: f64 = s.places_s.iter().zip(kappas).map(|(p, k)| k * k / p.log_rho_inv).sum();
    if sum_k <= e {
        return false;
    }
    s.places_s.iter().zip(kappas).all(|(p, k)| *k <= p.log_rho_inv * sum_k2 / (sum_k - e))
}

fn report(s: &Scenario, a: &Assembled, kappas: &[f64]) -> BoundReport {
    let denominator = denominator_at(s, a, kappas);
    let feasible = denominator > 0.0;
    BoundReport {
        numerator: a.numerator,
        numerator_error: a.numerator_error,
        denominator,
        bound: if feasible { a.numerator / denominator } else { f64::INFINITY },
        feasible,
        kappa_threshold: None,
        side_condition_ok: side_condition(s, kappas),
        argmax: a.argmax.clone(),
    }
}

fn fixed_kappas(s: &Scenario) -> Result<Vec<f64>> {
    s.places_s
        .iter()
        .map(|p| p.kappa.ok_or_else(|| Error::Precondition(format!("{}: kappa must be fixed", p.label))))
        .collect()
}

pub fn evaluate_bound(s: &Scenario) -> Result<BoundReport> {
    let kappas = fixed_kappas(s)?;
    let a = assemble(s)?;
    Ok(report(s, &a, &kappas))
}

/// Bound with the free kappa taken to infinity.
pub fn limit_bound(s: &Scenario) -> Result<BoundReport> {
    let a = assemble(s)?;
    let (idx, kappas) = free_kappa(s)?;
    Ok(limit_report(s, &a, idx, &kappas))
}

fn limit_report(s: &Scenario, a: &Assembled, idx: usize, kappas: &[f64]) -> BoundReport {
    let mut k = kappas.to_vec();
    k[idx] = 1e15;
    report(s, a, &k)
}

fn free_kappa(s: &Scenario) -> Result<(usize, Vec<f64>)> {
    let free: Vec<usize> = (0..s.places_s.len()).filter(|&i| s.places_s[i].kappa.is_none()).collect();
    if free.len() != 1 {
        return Err(Error::Precondition("kappa_threshold: exactly one kappa must be unknown".into()));
    }
    Ok((free[0], s.places_s.iter().map(|p| p.kappa.unwrap_or(0.0)).collect()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub kappa: f64,
    /// Threshold range under the numerator's quadrature error.
    pub interval: (f64, f64),
    pub limit: BoundReport,
    pub at_threshold: BoundReport,
}

fn solve_threshold(s: &Scenario, a: &Assembled, idx: usize, kappas: &[f64], target: f64) -> Result<f64> {
    let limit = limit_report(s, a, idx, kappas);
    if !(limit.feasible && limit.bound < target) {
        return Err(Error::NoThreshold { limit: limit.bound, target });
    }
    let holds = |k: f64| {
        let mut ks = kappas.to_vec();
        ks[idx] = k;
        let r = report(s, a, &ks);
        r.feasible && r.bound < target
    };
    // the penalty is largest where kappa meets the degree offset and decreases beyond it
    let others: f64 = kappas.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, k)| k).sum();
    let offset = match s.shape {
        PenaltyShape::Quadratic => s.degree_mean() - others,
        PenaltyShape::Fractional => 1.0 - rational_to_f64(&s.gamma),
    };
    let lo = offset.max(1e-9);
    if holds(lo) {
        return Ok(lo);
    }
    let mut hi = lo.max(1.0) * 2.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > 1e14 {
            return Err(Error::NoThreshold { limit: limit.bound, target });
        }
    }
    Ok(bisect_predicate(lo, hi, 1e-9, holds))
}

/// Least `kappa` beyond which the bound stays below `target_m`.
pub fn kappa_threshold(s: &Scenario, target_m: f64) -> Result<ThresholdReport> {
    kappa_threshold_assembled(s, &assemble(s)?, target_m)
}

/// [`kappa_threshold`] with the kappa-independent parts already computed.
pub fn kappa_threshold_assembled(s: &Scenario, a: &Assembled, target_m: f64) -> Result<ThresholdReport> {
    let a = a.clone();
    let (idx, kappas) = free_kappa(s)?;
    let kappa = solve_threshold(s, &a, idx, &kappas, target_m)?;
    let mut lo_a = a.clone();
    lo_a.numerator -= a.numerator_error;
    let mut hi_a = a.clone();
    hi_a.numerator += a.numerator_error;
    let k_lo = solve_threshold(s, &lo_a, idx, &kappas, target_m).unwrap_or(kappa);
    let k_hi = solve_threshold(s, &hi_a, idx, &kappas, target_m).unwrap_or(f64::INFINITY);
    let mut ks = kappas.clone();
    ks[idx] = kappa;
    let mut at = report(s, &a, &ks);
    at.kappa_threshold = Some(kappa);
    Ok(ThresholdReport {
        kappa,
        interval: (k_lo.min(kappa), k_hi.max(kappa)),
        limit: limit_report(s, &a, idx, &kappas),
        at_threshold: at,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalQ {
    pub q: f64,
    pub chi: Vec<f64>,
    pub chi_below_m: bool,
}

/// `(q/m)^2 sum (kappa_u - eps)^2 / L_u - 2 (q/m)(sum (kappa_u - eps) - E)`.
pub fn chi_objective(s: &Scenario, epsilon: f64, q: f64) -> Result<f64> {
    let kappas = fixed_kappas(s)?;
    let e = s.degree_mean();
    let t = q / s.m as f64;
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (p, k) in s.places_s.iter().zip(&kappas) {
        if p.log_rho_inv > 0.0 {
            quad += (k - epsilon).powi(2) / p.log_rho_inv;
        }
        lin += k - epsilon;
    }
    Ok(t * t * quad - 2.0 * t * (lin - e))
}

pub fn optimal_q(s: &Scenario, epsilon: f64) -> Result<OptimalQ> {
    let kappas = fixed_kappas(s)?;
    if s.places_s.iter().all(|p| p.log_rho_inv <= 0.0) {
        return Err(Error::DivisionByZero("optimal_q: every rho equals 1".into()));
    }
    let e = s.degree_mean();
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (p, k) in s.places_s.iter().zip(&kappas) {
        if p.log_rho_inv > 0.0 {
            quad += (k - epsilon).powi(2) / p.log_rho_inv;
        }
        lin += k - epsilon;
    }
    if quad == 0.0 {
        return Err(Error::DivisionByZero("optimal_q: kappas all equal epsilon".into()));
    }
    let q = (lin - e) * s.m as f64 / quad;
    let chi: Vec<f64> = s
        .places_s
        .iter()
        .zip(&kappas)
        .map(|(p, k)| if p.log_rho_inv > 0.0 { (k - epsilon) * q / p.log_rho_inv } else { 0.0 })
        .collect();
    let chi_below_m = chi.iter().all(|c| *c < s.m as f64);
    Ok(OptimalQ { q, chi, chi_below_m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confmaps::AnalyticMap;
    use crate::numeric::golden_max;
    use crate::series::{rat, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base(places: Vec<SPlace>) -> Scenario {
        Scenario {
            name: "t".into(),
            m: 6,
            m_nu: vec![1, 1, 1, 1, 1, 1],
            gamma: rat(1, 6),
            tau_b: TauSpec::Explicit(rat(175, 36)),
            tau_sharp: rat_int(0),
            places_s: places,
            ledger: PlaceLedger {
                archimedean: vec![],
                nonarch_log_radius_sum: 12.0 * 2f64.ln(),
                per_prime_log_radii: None,
            },
            arch_fixed: vec![FixedArch { label: "inf".into(), numerator: 2.13322, log_size: -(3f64.ln()) }],
            numerator_mode: NumeratorMode::Integral,
            shape: PenaltyShape::Quadratic,
            grid_n: 256,
        }
    }

    #[test]
    fn fixed_constant_limit() {
        let r = evaluate_bound(&base(vec![])).unwrap();
        assert!((r.bound - 4.43206).abs() < 1e-4, "{r:?}");
        assert!(r.feasible && r.side_condition_ok);
    }

    #[test]
    fn trivial_is_infeasible() {
        let mut s = base(vec![]);
        s.tau_b = TauSpec::Explicit(rat_int(0));
        s.ledger = PlaceLedger { archimedean: vec![(AnalyticMap::identity(), 1.0)], nonarch_log_radius_sum: 0.0, per_prime_log_radii: None };
        s.arch_fixed.clear();
        let r = evaluate_bound(&s).unwrap();
        assert!(r.numerator.abs() < 1e-12 && r.denominator.abs() < 1e-12);
        assert!(!r.feasible);
    }

    #[test]
    fn nan_rejected() {
        let mut s = base(vec![]);
        s.arch_fixed[0].numerator = f64::NAN;
        assert!(matches!(evaluate_bound(&s), Err(Error::NanInput(_))));
    }

    #[test]
    fn fractional_matches_quadratic_single_place() {
        // with E = 1 - gamma the two shapes agree
        let mut s = base(vec![SPlace { label: "2".into(), log_rho_inv: 3.0, kappa: Some(7.0) }]);
        s.m = 6;
        s.m_nu = vec![1, 5];
        s.gamma = rat(1, 6);
        let q = penalty(&s, &[7.0]);
        s.shape = PenaltyShape::Fractional;
        let f = penalty(&s, &[7.0]);
        assert!((q - f).abs() < 1e-12);
    }

    #[test]
    fn threshold_matches_closed_form() {
        let mut s = base(vec![SPlace { label: "2".into(), log_rho_inv: 12.0 * 2f64.ln(), kappa: None }]);
        s.shape = PenaltyShape::Fractional;
        let t = kappa_threshold(&s, 6.0).unwrap();
        // solve (5/6)(2/k - (5/6)/k^2) L = slack directly
        let a = assemble(&s).unwrap();
        let slack = a.log_size - a.tau_total - a.numerator / 6.0;
        let l = 12.0 * 2f64.ln();
        let g = 5.0 / 6.0;
        let c = slack / (g * l);
        let k = (2.0 + (4.0 - 4.0 * c * g).sqrt()) / (2.0 * c);
        assert!((t.kappa - k).abs() < 1e-6 * k);
        assert!(matches!(kappa_threshold(&s, 4.0), Err(Error::NoThreshold { .. })));
    }

    #[test]
    fn threshold_decreases_with_target() {
        let mut s = base(vec![SPlace { label: "2".into(), log_rho_inv: 12.0 * 2f64.ln(), kappa: None }]);
        s.shape = PenaltyShape::Fractional;
        let a = kappa_threshold(&s, 6.0).unwrap().kappa;
        let b = kappa_threshold(&s, 7.0).unwrap().kappa;
        assert!(b < a);
    }

    #[test]
    fn optimal_q_examples() {
        let mut s = base(vec![SPlace { label: "p".into(), log_rho_inv: 2.5, kappa: Some(2.5) }]);
        s.m_nu = vec![6];
        let q = optimal_q(&s, 0.0).unwrap();
        assert!((q.q - 6.0).abs() < 1e-12);
        s.m_nu = vec![0, 0, 6];
        s.places_s[0].kappa = Some(2.0);
        assert!(optimal_q(&s, 0.0).unwrap().q.abs() < 1e-12);
        s.places_s[0].log_rho_inv = 0.0;
        assert!(matches!(optimal_q(&s, 0.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn optimal_q_minimizes_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(1..4);
            let places = (0..n)
                .map(|i| SPlace {
                    label: format!("{i}"),
                    log_rho_inv: rng.gen_range(0.5..10.0),
                    kappa: Some(rng.gen_range(3.0..20.0)),
                })
                .collect();
            let s = base(places);
            let eps = rng.gen_range(0.0..1.0);
            let q = optimal_q(&s, eps).unwrap();
            let (qn, _) = golden_max(-100.0, 400.0, 1e-12, |q| -chi_objective(&s, eps, q).unwrap());
            assert!((qn - q.q).abs() < 1e-6 * (1.0 + q.q.abs()));
        }
    }

    #[test]
    fn cauchy_schwarz_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(1..5);
            let places: Vec<SPlace> = (0..n)
                .map(|i| SPlace {
                    label: format!("{i}"),
                    log_rho_inv: rng.gen_range(0.1..20.0),
                    kappa: Some(rng.gen_range(0.1..30.0)),
                })
                .collect();
            let s = base(places);
            let ks: Vec<f64> = s.places_s.iter().map(|p| p.kappa.unwrap()).collect();
            if ks.iter().sum::<f64>() > s.degree_mean() {
                assert!(penalty(&s, &ks) >= -1e-12);
            }
        }
    }
}
