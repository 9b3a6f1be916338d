//! Queue parameters, arrival laws, the drift and diffusion coefficients of the
//! approximating diffusion, and the load-regime scenario generator.
//!
//! Time is measured in epochs of one day. A customer in service at the start
//! of an epoch leaves during that epoch with probability `service_prob`;
//! arrivals of the epoch join after the departures.

use serde::{Deserialize, Serialize};

use crate::error::{GeoqError, Result};
use crate::pmf::{self, PmfWindow, WINDOW_CUTOFF};

/// Configurations closer than this to the stability boundary are rejected.
pub const MIN_SPARE_CAPACITY: f64 = 1e-9;

/// The triple (N, Λ, μ) with its derived scalings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QueueParams {
    n_servers: u32,
    arrival_rate: f64,
    service_prob: f64,
    offered_load: f64,
    delta: f64,
    zeta: f64,
}

impl QueueParams {
    pub fn new(n_servers: u32, arrival_rate: f64, service_prob: f64) -> Result<Self> {
        check_service_prob(service_prob)?;
        if !(arrival_rate.is_finite() && arrival_rate > 0.0) {
            return Err(GeoqError::InvalidParams(format!(
                "arrival rate must be positive and finite, got {arrival_rate}"
            )));
        }
        Self::assemble(n_servers, arrival_rate, service_prob, arrival_rate / service_prob)
    }

    /// Builds the parameters from the offered load R, keeping R exactly as given.
    pub fn from_offered_load(n_servers: u32, offered_load: f64, service_prob: f64) -> Result<Self> {
        check_service_prob(service_prob)?;
        if !(offered_load.is_finite() && offered_load > 0.0) {
            return Err(GeoqError::InvalidParams(format!(
                "offered load must be positive and finite, got {offered_load}"
            )));
        }
        Self::assemble(n_servers, offered_load * service_prob, service_prob, offered_load)
    }

    /// Builds the parameters from the utilization ρ = R/N, so Λ = ρ·N·μ.
    pub fn from_utilization(n_servers: u32, utilization: f64, service_prob: f64) -> Result<Self> {
        Self::from_offered_load(n_servers, utilization * n_servers as f64, service_prob)
    }

    fn assemble(n_servers: u32, arrival_rate: f64, service_prob: f64, offered_load: f64) -> Result<Self> {
        if n_servers == 0 {
            return Err(GeoqError::InvalidParams("need at least one server".into()));
        }
        let n = n_servers as f64;
        if offered_load >= n {
            return Err(GeoqError::Unstable { offered_load, n_servers });
        }
        if n - offered_load < MIN_SPARE_CAPACITY {
            return Err(GeoqError::InvalidParams(format!(
                "offered load {offered_load} is within {MIN_SPARE_CAPACITY:e} of N = {n_servers}; \
                 the chain would be numerically unstable"
            )));
        }
        let delta = 1.0 / offered_load.sqrt();
        Ok(QueueParams {
            n_servers,
            arrival_rate,
            service_prob,
            offered_load,
            delta,
            zeta: (offered_load - n) * delta,
        })
    }

    pub fn n_servers(&self) -> u32 {
        self.n_servers
    }

    /// Λ, mean arrivals per epoch.
    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }

    /// μ, per-epoch departure probability of a customer in service.
    pub fn service_prob(&self) -> f64 {
        self.service_prob
    }

    /// R = Λ/μ.
    pub fn offered_load(&self) -> f64 {
        self.offered_load
    }

    /// δ = 1/√R.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// ζ = (R − N)/√R, negative under stability.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn sqrt_load(&self) -> f64 {
        self.offered_load.sqrt()
    }

    /// ρ = R/N.
    pub fn utilization(&self) -> f64 {
        self.offered_load / self.n_servers as f64
    }

    /// Scaled position x = δ(n − R) of customer count n.
    pub fn scale(&self, count: f64) -> f64 {
        self.delta * (count - self.offered_load)
    }
}

fn check_service_prob(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 1.0 {
        Ok(())
    } else {
        Err(GeoqError::InvalidParams(format!(
            "service probability must lie strictly inside (0, 1), got {mu}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    Poisson,
    GeneralPmf,
}

/// Distribution of the number of arrivals in one epoch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArrivalModel {
    kind: ArrivalKind,
    mean: f64,
    pmf: Option<Vec<f64>>,
    c_a: f64,
    v_a: f64,
}

impl ArrivalModel {
    pub fn poisson(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(GeoqError::InvalidParams(format!(
                "Poisson arrival rate must be positive, got {rate}"
            )));
        }
        Ok(ArrivalModel {
            kind: ArrivalKind::Poisson,
            mean: rate,
            pmf: None,
            // variance equals the mean
            c_a: 2.0,
            v_a: rate * rate + 3.0 * rate + 1.0,
        })
    }

    /// Finite-support arrival law over counts `0..pmf.len()`.
    pub fn general(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(GeoqError::InvalidParams("arrival pmf is empty".into()));
        }
        if let Some(bad) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(GeoqError::InvalidParams(format!(
                "arrival pmf entries must be finite and nonnegative, found {bad}"
            )));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GeoqError::InvalidParams(format!(
                "arrival pmf must sum to 1 within 1e-12, sums to {total}"
            )));
        }
        let moment = |j: i32| -> f64 {
            pmf.iter()
                .enumerate()
                .map(|(k, p)| (k as f64).powi(j) * p)
                .sum()
        };
        let mean = moment(1);
        if mean <= 0.0 {
            return Err(GeoqError::InvalidParams("arrival pmf has zero mean".into()));
        }
        let variance = (moment(2) - mean * mean).max(0.0);
        Ok(ArrivalModel {
            kind: ArrivalKind::GeneralPmf,
            mean,
            c_a: variance / mean + 1.0,
            v_a: moment(3) / mean,
            pmf: Some(pmf),
        })
    }

    pub fn kind(&self) -> ArrivalKind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// c_A = σ²_A/Λ + 1; exactly 2 for Poisson arrivals.
    pub fn c_a(&self) -> f64 {
        self.c_a
    }

    /// v_A = E[A³]/Λ.
    pub fn v_a(&self) -> f64 {
        self.v_a
    }

    pub fn pmf(&self) -> Option<&[f64]> {
        self.pmf.as_deref()
    }

    /// The arrival law as a window of non-negligible mass.
    pub fn window(&self) -> PmfWindow {
        match &self.pmf {
            None => pmf::poisson_window(self.mean, WINDOW_CUTOFF),
            Some(p) => PmfWindow { offset: 0, probs: p.clone() },
        }
    }

    /// E[A^j] for j = 1..=4.
    pub fn raw_moments(&self) -> [f64; 4] {
        match &self.pmf {
            None => pmf::poisson_raw_moments(self.mean),
            Some(p) => {
                let mut m = [0.0; 4];
                for (k, pk) in p.iter().enumerate() {
                    let kf = k as f64;
                    m[0] += kf * pk;
                    m[1] += kf * kf * pk;
                    m[2] += kf.powi(3) * pk;
                    m[3] += kf.powi(4) * pk;
                }
                m
            }
        }
    }

    /// Checks that the arrival mean is the Λ of `params`.
    pub fn ensure_paired(&self, params: &QueueParams) -> Result<()> {
        let lambda = params.arrival_rate();
        if (self.mean - lambda).abs() > 1e-9 * lambda.max(1.0) {
            return Err(GeoqError::InvalidParams(format!(
                "arrival mean {} does not match arrival rate {lambda}",
                self.mean
            )));
        }
        Ok(())
    }
}

/// Drift and diffusion coefficient of an approximating diffusion, with the
/// scalar constants hoisted out of the per-point evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    mu: f64,
    zeta: f64,
    delta: f64,
    lambda: f64,
    c_a: f64,
    constant: bool,
}

impl Coefficients {
    /// Piecewise a(x) built from the first two conditional moments of the jump.
    pub fn state_dependent(params: &QueueParams, arrivals: &ArrivalModel) -> Self {
        Coefficients {
            mu: params.service_prob(),
            zeta: params.zeta(),
            delta: params.delta(),
            lambda: params.arrival_rate(),
            c_a: arrivals.c_a(),
            constant: false,
        }
    }

    /// The baseline with a ≡ 2μ and the same drift.
    pub fn constant(params: &QueueParams) -> Self {
        Coefficients {
            mu: params.service_prob(),
            zeta: params.zeta(),
            delta: params.delta(),
            lambda: params.arrival_rate(),
            c_a: 2.0,
            constant: true,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// b(x) = μ[(x + ζ)⁻ − ζ⁻].
    pub fn drift(&self, x: f64) -> f64 {
        if x <= -self.zeta {
            -self.mu * x
        } else {
            self.mu * self.zeta
        }
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        let mu = self.mu;
        if self.constant {
            return 2.0 * mu;
        }
        if x <= -1.0 / self.delta {
            mu * (self.c_a - 1.0 + self.lambda)
        } else {
            let y = x.min(-self.zeta);
            mu * (self.c_a - mu + self.delta * (1.0 - mu) * y + mu * y * y)
        }
    }

    /// Integrand 2b(x)/a(x) of the density exponent.
    pub fn exponent_rate(&self, x: f64) -> f64 {
        2.0 * self.drift(x) / self.diffusion(x)
    }

    /// Points where b or a change formula: −1/δ and −ζ.
    pub fn breakpoints(&self) -> [f64; 2] {
        [-1.0 / self.delta, -self.zeta]
    }
}

/// b(x) for the queue described by `params`.
pub fn drift(x: f64, params: &QueueParams) -> f64 {
    Coefficients::constant(params).drift(x)
}

/// State-dependent a(x); the arrival law enters through c_A.
pub fn diffusion_coefficient(x: f64, params: &QueueParams, arrivals: &ArrivalModel) -> f64 {
    Coefficients::state_dependent(params, arrivals).diffusion(x)
}

/// Load regimes by the exponent q in N − R = β R^q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    /// Quality driven, q = 1.
    Qd,
    /// Quality-and-efficiency driven, q = 1/2.
    Qed,
    /// Nondegenerate slowdown, q = 0.
    Nds,
}

impl Regime {
    pub fn load_exponent(self) -> f64 {
        match self {
            Regime::Qd => 1.0,
            Regime::Qed => 0.5,
            Regime::Nds => 0.0,
        }
    }

    /// β such that the base scenario satisfies N − R = β R^q.
    pub fn infer_beta(self, base: &QueueParams) -> f64 {
        let r = base.offered_load();
        (base.n_servers() as f64 - r) / r.powf(self.load_exponent())
    }

    /// The R solving N = R + β R^q.
    pub fn offered_load_for(self, n_servers: u32, beta: f64) -> f64 {
        let n = n_servers as f64;
        match self {
            Regime::Qd => n / (1.0 + beta),
            Regime::Nds => n - beta,
            Regime::Qed => {
                let root = (-beta + (beta * beta + 4.0 * n).sqrt()) / 2.0;
                root * root
            }
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Qd => "QD",
            Regime::Qed => "QED",
            Regime::Nds => "NDS",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = GeoqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "QD" => Ok(Regime::Qd),
            "QED" => Ok(Regime::Qed),
            "NDS" => Ok(Regime::Nds),
            other => Err(GeoqError::Parse(format!("unknown regime {other:?}"))),
        }
    }
}

/// A family of scenarios scaled from a base by the relations μ = γ R^{-s} and
/// N − R = β R^q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub beta: f64,
    /// Overrides the γ otherwise inferred as μ_base · R_base^s.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub s_exponent: f64,
    pub load_multipliers: Vec<f64>,
}

impl RegimeSpec {
    /// Spec whose β is read off the base scenario.
    pub fn from_base(regime: Regime, base: &QueueParams, s_exponent: f64, load_multipliers: Vec<f64>) -> Self {
        RegimeSpec {
            regime,
            beta: regime.infer_beta(base),
            gamma: None,
            s_exponent,
            load_multipliers,
        }
    }

    pub fn gamma_for(&self, base: &QueueParams) -> f64 {
        self.gamma
            .unwrap_or_else(|| base.service_prob() * base.offered_load().powf(self.s_exponent))
    }
}

/// One scenario per load multiplier m.
///
/// N is the nearest integer to m·R_base + β(m·R_base)^q, and R is then re-solved
/// from N = R + βR^q so that every returned scenario sits exactly on the regime
/// curve. μ = γR^{-s}; with s = 0 the base μ is kept.
pub fn generate_scenarios(spec: &RegimeSpec, base: &QueueParams) -> Result<Vec<QueueParams>> {
    if !(spec.beta.is_finite() && spec.beta > 0.0) {
        return Err(GeoqError::InvalidParams(format!("beta must be positive, got {}", spec.beta)));
    }
    if !(spec.s_exponent.is_finite() && spec.s_exponent >= 0.0) {
        return Err(GeoqError::InvalidParams(format!(
            "s exponent must be nonnegative, got {}",
            spec.s_exponent
        )));
    }
    let q = spec.regime.load_exponent();
    let gamma = spec.gamma_for(base);
    spec.load_multipliers
        .iter()
        .map(|&m| {
            if !(m.is_finite() && m >= 1.0) {
                return Err(GeoqError::InvalidParams(format!(
                    "load multipliers must be at least 1, got {m}"
                )));
            }
            let target = m * base.offered_load();
            let n = (target + spec.beta * target.powf(q)).round();
            if !(1.0..=u32::MAX as f64).contains(&n) {
                return Err(GeoqError::InvalidParams(format!("multiplier {m} yields N = {n}")));
            }
            let n = n as u32;
            let identity = m == 1.0 && n == base.n_servers() && spec.gamma.is_none();
            if identity {
                return Ok(*base);
            }
            let r = spec.regime.offered_load_for(n, spec.beta);
            let mu = if spec.s_exponent == 0.0 && spec.gamma.is_none() {
                base.service_prob()
            } else {
                gamma * r.powf(-spec.s_exponent)
            };
            QueueParams::from_offered_load(n, r, mu).map_err(|e| {
                GeoqError::InvalidParams(format!(
                    "multiplier {m} (N = {n}, R = {r:.4}, mu = {mu:.5}) rejected: {e}"
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table3_base() -> QueueParams {
        QueueParams::from_offered_load(504, 482.06, 0.189).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let p = QueueParams::new(18, 16.2 / 5.3, 1.0 / 5.3).unwrap();
        assert!((p.offered_load() - 16.2).abs() < 1e-12);
        assert_eq!(p.delta(), 1.0 / p.offered_load().sqrt());
        assert_eq!(p.zeta(), (p.offered_load() - 18.0) * p.delta());
        assert!(p.zeta() < 0.0);
    }

    #[test]
    fn rejects_unstable_and_malformed() {
        assert!(matches!(
            QueueParams::new(2, 0.5, 0.2),
            Err(GeoqError::Unstable { .. })
        ));
        assert!(QueueParams::new(2, 0.5, 1.0).is_err());
        assert!(QueueParams::new(2, 0.5, 0.0).is_err());
        assert!(QueueParams::new(0, 0.5, 0.5).is_err());
        assert!(QueueParams::new(2, -1.0, 0.5).is_err());
        assert!(QueueParams::from_offered_load(10, 10.0 - 1e-11, 0.5).is_err());
        assert!(QueueParams::from_offered_load(10, 10.0 - 1e-6, 0.5).is_ok());
    }

    #[test]
    fn drift_examples() {
        let p = table3_base();
        let z = p.zeta();
        assert_eq!(drift(-z, &p), 0.189 * z);
        assert_eq!(drift(0.0, &p), 0.0);
        assert_eq!(drift(1.0 - z, &p), 0.189 * z);
        // hand evaluation of the lower branch at x = -2|ζ|
        let zeta = (482.06f64 - 504.0) / 482.06f64.sqrt();
        let expect = -0.189 * (-2.0 * zeta.abs());
        assert!((drift(-2.0 * z.abs(), &p) - expect).abs() < 1e-15);
        assert!((expect - 0.3777).abs() < 1e-4);
    }

    #[test]
    fn diffusion_examples() {
        let mu = 1.0 / 5.3;
        let p = QueueParams::from_offered_load(18, 16.2, mu).unwrap();
        let arr = ArrivalModel::poisson(p.arrival_rate()).unwrap();
        let a0 = diffusion_coefficient(0.0, &p, &arr);
        assert!((a0 - mu * (2.0 - mu)).abs() < 1e-15);
        assert!((a0 - 0.34176).abs() < 1e-5);
        // continuity at −√R: both pieces equal μ(1 + Λ)
        let x = -p.sqrt_load();
        let middle = mu * (2.0 - mu + p.delta() * (1.0 - mu) * x + mu * x * x);
        assert!((middle - mu * (1.0 + p.arrival_rate())).abs() < 1e-12);
        // plateau beyond −ζ
        let z = p.zeta();
        let plateau = diffusion_coefficient(-z, &p, &arr);
        for x in [-z + 0.1, -z + 3.0, 50.0] {
            assert_eq!(diffusion_coefficient(x, &p, &arr), plateau);
        }
    }

    #[test]
    fn poisson_arrival_moments() {
        let a = ArrivalModel::poisson(3.7).unwrap();
        assert_eq!(a.c_a(), 2.0);
        let m = a.raw_moments();
        assert!((a.v_a() - m[2] / 3.7).abs() < 1e-12);
    }

    #[test]
    fn general_pmf_validation_and_moments() {
        assert!(ArrivalModel::general(vec![]).is_err());
        assert!(ArrivalModel::general(vec![0.5, 0.6]).is_err());
        assert!(ArrivalModel::general(vec![1.2, -0.2]).is_err());
        assert!(ArrivalModel::general(vec![1.0]).is_err());
        let a = ArrivalModel::general(vec![0.25, 0.5, 0.25]).unwrap();
        assert!((a.mean() - 1.0).abs() < 1e-15);
        assert!((a.c_a() - 1.5).abs() < 1e-15);
        assert!((a.v_a() - 2.5).abs() < 1e-15);
        let p = QueueParams::new(3, 1.0, 0.5).unwrap();
        assert!(a.ensure_paired(&p).is_ok());
        let q = QueueParams::new(3, 1.1, 0.5).unwrap();
        assert!(a.ensure_paired(&q).is_err());
    }

    #[test]
    fn scenario_generation_qed_table_row() {
        let spec = RegimeSpec {
            regime: Regime::Qed,
            beta: 0.9994,
            gamma: Some(4.1426),
            s_exponent: 0.5,
            load_multipliers: vec![2.0],
        };
        let out = generate_scenarios(&spec, &QueueParams::from_offered_load(504, 482.06, 1.0 / 5.3).unwrap()).unwrap();
        assert_eq!(out[0].n_servers(), 995);
        assert!((out[0].offered_load() - 963.97).abs() < 0.005);
        assert!((out[0].service_prob() - 0.133).abs() < 5e-4);
    }

    #[test]
    fn scenario_generation_nds_identity() {
        let base = QueueParams::from_offered_load(495, 482.0, 1.0 / 5.3).unwrap();
        let spec = RegimeSpec {
            regime: Regime::Nds,
            beta: 13.0,
            gamma: None,
            s_exponent: 0.0,
            load_multipliers: vec![1.0, 2.0, 3.0],
        };
        let out = generate_scenarios(&spec, &base).unwrap();
        assert_eq!(out[0], base);
        assert_eq!(out[1].n_servers(), 977);
        assert!((out[1].offered_load() - 964.0).abs() < 1e-9);
        assert_eq!(out[2].n_servers(), 1459);
        assert!(out.iter().all(|p| p.service_prob() == base.service_prob()));
    }

    #[test]
    fn scenario_generation_rejects_bad_multiplier() {
        let base = table3_base();
        let spec = RegimeSpec::from_base(Regime::Qd, &base, 1.0, vec![0.5]);
        assert!(generate_scenarios(&spec, &base).is_err());
        // γ forcing μ ≥ 1 is rejected with a diagnostic
        let spec = RegimeSpec {
            regime: Regime::Qed,
            beta: 1.0,
            gamma: Some(100.0),
            s_exponent: 0.5,
            load_multipliers: vec![2.0],
        };
        let err = generate_scenarios(&spec, &base).unwrap_err();
        assert!(err.to_string().contains("multiplier 2"));
    }

    #[test]
    fn regime_offered_load_inverts_capacity_equation() {
        for regime in [Regime::Qd, Regime::Qed, Regime::Nds] {
            let r = regime.offered_load_for(995, 0.9994);
            let back = r + 0.9994 * r.powf(regime.load_exponent());
            assert!((back - 995.0).abs() < 1e-9, "{regime:?}");
        }
    }
}
