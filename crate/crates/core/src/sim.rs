//! Monte Carlo simulation of the census chain X_{k+1} = X_k + A_k − D_k,
//! D_k ~ Binomial(X_k ∧ N, μ), used to cross-check the exact solver.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{GeoqError, Result};
use crate::markov::metrics_of;
use crate::metrics::{MetricKind, Metrics};
use crate::model::{ArrivalKind, ArrivalModel, QueueParams};

pub const MIN_SAMPLE_EPOCHS: u64 = 1000;

/// Recorded in the metadata so a run can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), stream = replication index";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub warmup_epochs: u64,
    /// Sampled epochs per replication.
    pub sample_epochs: u64,
    pub replications: u32,
    pub seed: u64,
}

impl SimConfig {
    /// Warmup of 50 mean service times.
    pub fn default_warmup(params: &QueueParams) -> u64 {
        (50.0 / params.service_prob()).ceil() as u64
    }

    pub fn for_params(params: &QueueParams, sample_epochs: u64, replications: u32, seed: u64) -> Self {
        SimConfig {
            warmup_epochs: Self::default_warmup(params),
            sample_epochs,
            replications,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sample_epochs < MIN_SAMPLE_EPOCHS {
            return Err(GeoqError::Config(format!(
                "sample_epochs must be at least {MIN_SAMPLE_EPOCHS}, got {}",
                self.sample_epochs
            )));
        }
        if self.replications < 2 {
            return Err(GeoqError::Config("need at least two replications for a half-width".into()));
        }
        Ok(())
    }
}

/// Occupancy counts and departures of one replication. Merging is plain
/// addition, so the order replications are combined in does not matter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub visits: Vec<u64>,
    pub departures: u64,
    pub epochs: u64,
}

impl Tally {
    fn record(&mut self, state: usize, departed: u64) {
        if state >= self.visits.len() {
            self.visits.resize(state + 1, 0);
        }
        self.visits[state] += 1;
        self.departures += departed;
        self.epochs += 1;
    }

    pub fn merge(mut self, other: &Tally) -> Tally {
        if other.visits.len() > self.visits.len() {
            self.visits.resize(other.visits.len(), 0);
        }
        for (a, b) in self.visits.iter_mut().zip(&other.visits) {
            *a += b;
        }
        self.departures += other.departures;
        self.epochs += other.epochs;
        self
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let e = self.epochs as f64;
        self.visits.iter().map(|&v| v as f64 / e).collect()
    }

    pub fn departure_rate(&self) -> f64 {
        self.departures as f64 / self.epochs as f64
    }
}

enum ArrivalSampler {
    Poisson(Poisson<f64>),
    Table(WeightedIndex<f64>),
}

impl ArrivalSampler {
    fn new(arrivals: &ArrivalModel) -> Result<Self> {
        match arrivals.kind() {
            ArrivalKind::Poisson => Poisson::new(arrivals.mean())
                .map(ArrivalSampler::Poisson)
                .map_err(|e| GeoqError::InvalidParams(format!("Poisson sampler: {e}"))),
            ArrivalKind::GeneralPmf => {
                let pmf = arrivals.pmf().expect("general law carries a pmf");
                WeightedIndex::new(pmf)
                    .map(ArrivalSampler::Table)
                    .map_err(|e| GeoqError::InvalidParams(format!("arrival pmf sampler: {e}")))
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            ArrivalSampler::Poisson(d) => d.sample(rng) as u64,
            ArrivalSampler::Table(d) => d.sample(rng) as u64,
        }
    }
}

/// Runs one replication on its own stream.
pub fn run_replication(params: &QueueParams, arrivals: &ArrivalModel, cfg: &SimConfig, index: u32) -> Result<Tally> {
    let n = params.n_servers() as usize;
    let mu = params.service_prob();
    let arrive = ArrivalSampler::new(arrivals)?;
    let departures: Vec<Binomial> = (0..=n as u64)
        .map(|k| Binomial::new(k, mu))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| GeoqError::InvalidParams(format!("departure sampler: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let mut x = (params.offered_load().round() as usize).min(n);
    let mut tally = Tally::default();
    for epoch in 0..cfg.warmup_epochs + cfg.sample_epochs {
        let d = departures[x.min(n)].sample(&mut rng);
        // time average of the census seen at the start of each epoch
        if epoch >= cfg.warmup_epochs {
            tally.record(x, d);
        }
        x = x + arrive.sample(&mut rng) as usize - d as usize;
    }
    Ok(tally)
}

/// Pooled histogram plus replication-based 95% half-widths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub histogram: Vec<f64>,
    /// 95% half-width of each histogram entry across replications.
    pub histogram_half_width: Vec<f64>,
    pub metrics: Metrics,
    pub half_width: Metrics,
    pub departure_rate: f64,
    pub departure_half_width: f64,
    pub per_replication: Vec<Metrics>,
    pub rng: &'static str,
}

fn mean_and_half_width(values: &[f64], t: f64) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, t * (var / r).sqrt())
}

/// Simulates `cfg.replications` independent runs in parallel and pools them.
pub fn simulate_census(params: &QueueParams, arrivals: &ArrivalModel, cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    arrivals.ensure_paired(params)?;
    let tallies: Vec<Tally> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| run_replication(params, arrivals, cfg, i))
        .collect::<Result<_>>()?;
    let pooled = tallies.iter().fold(Tally::default(), Tally::merge);

    let t = StudentsT::new(0.0, 1.0, (cfg.replications - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    let freqs: Vec<Vec<f64>> = tallies.iter().map(Tally::frequencies).collect();
    let per_replication: Vec<Metrics> = freqs.iter().map(|f| metrics_of(f, params)).collect();

    let mut metrics = Metrics::default();
    let mut half_width = Metrics::default();
    for kind in MetricKind::ALL {
        let v: Vec<f64> = per_replication.iter().map(|m| m.get(kind)).collect();
        let (m, h) = mean_and_half_width(&v, t);
        metrics.set(kind, m);
        half_width.set(kind, h);
    }
    let rates: Vec<f64> = tallies.iter().map(Tally::departure_rate).collect();
    let (departure_rate, departure_half_width) = mean_and_half_width(&rates, t);

    let histogram = pooled.frequencies();
    let histogram_half_width = (0..histogram.len())
        .map(|s| {
            let v: Vec<f64> = freqs.iter().map(|f| f.get(s).copied().unwrap_or(0.0)).collect();
            mean_and_half_width(&v, t).1
        })
        .collect();
    Ok(SimReport {
        config: *cfg,
        histogram,
        histogram_half_width,
        metrics,
        half_width,
        departure_rate,
        departure_half_width,
        per_replication,
        rng: RNG_ALGORITHM,
    })
}

impl SimReport {
    /// `state,probability,half_width`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "state,probability,half_width")?;
        for (n, (p, h)) in self.histogram.iter().zip(&self.histogram_half_width).enumerate() {
            writeln!(out, "{n},{p:e},{h:e}")?;
        }
        Ok(())
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "warmup_epochs": self.config.warmup_epochs,
            "sample_epochs": self.config.sample_epochs,
            "replications": self.config.replications,
            "seed": self.config.seed,
            "rng": self.rng,
        })
    }

    /// Whether `value` lies within the 95% interval of `kind`.
    pub fn covers(&self, kind: MetricKind, value: f64) -> bool {
        (self.metrics.get(kind) - value).abs() <= self.half_width.get(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (QueueParams, ArrivalModel) {
        let p = QueueParams::new(4, 1.0, 0.5).unwrap();
        (p, ArrivalModel::poisson(1.0).unwrap())
    }

    #[test]
    fn warmup_default_scales_with_service_time() {
        let p = QueueParams::from_offered_load(18, 16.2, 1.0 / 5.3).unwrap();
        assert_eq!(SimConfig::default_warmup(&p), 265);
    }

    #[test]
    fn rejects_short_runs() {
        let (p, a) = small();
        let cfg = SimConfig { warmup_epochs: 10, sample_epochs: 999, replications: 4, seed: 0 };
        assert!(simulate_census(&p, &a, &cfg).is_err());
        let cfg = SimConfig { sample_epochs: 1000, replications: 1, ..cfg };
        assert!(simulate_census(&p, &a, &cfg).is_err());
    }

    #[test]
    fn same_seed_same_histogram() {
        let (p, a) = small();
        let cfg = SimConfig::for_params(&p, 2000, 3, 7);
        let x = simulate_census(&p, &a, &cfg).unwrap();
        let y = simulate_census(&p, &a, &cfg).unwrap();
        assert_eq!(x.histogram, y.histogram);
        let z = simulate_census(&p, &a, &SimConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(x.histogram, z.histogram);
    }

    #[test]
    fn streams_differ_between_replications() {
        let (p, a) = small();
        let cfg = SimConfig::for_params(&p, 2000, 2, 0);
        assert_ne!(run_replication(&p, &a, &cfg, 0).unwrap(), run_replication(&p, &a, &cfg, 1).unwrap());
    }

    #[test]
    fn merge_is_associative() {
        let t = |v: Vec<u64>, d| Tally { epochs: v.iter().sum(), visits: v, departures: d };
        let (a, b, c) = (t(vec![1, 2], 3), t(vec![0, 1, 4], 2), t(vec![5], 1));
        let left = a.clone().merge(&b).merge(&c);
        let right = a.merge(&b.merge(&c));
        assert_eq!(left, right);
    }

    #[test]
    fn general_pmf_arrivals_run() {
        let p = QueueParams::new(3, 1.0, 0.5).unwrap();
        let a = ArrivalModel::general(vec![0.25, 0.5, 0.25]).unwrap();
        let r = simulate_census(&p, &a, &SimConfig::for_params(&p, 5000, 4, 1)).unwrap();
        assert!((r.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((r.departure_rate - 1.0).abs() < 0.1);
    }
}
