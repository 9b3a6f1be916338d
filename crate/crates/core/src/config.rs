//! TOML scenario files.
//!
//! ```toml
//! n_servers = 504
//! arrival_rate = 90.9547
//! service_prob = 0.18867924528301888
//! arrival_kind = "poisson"        # or "general_pmf" together with `pmf`
//! regime = "QED"                  # optional sweep
//! beta = 0.9994                   # inferred from the base when absent
//! s = 0.5
//! multipliers = [1, 2, 3]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{GeoqError, Result};
use crate::model::{generate_scenarios, ArrivalKind, ArrivalModel, QueueParams, Regime, RegimeSpec};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_servers: u32,
    /// Optional when `pmf` is given; must then equal its mean.
    pub arrival_rate: Option<f64>,
    pub service_prob: f64,
    #[serde(default)]
    pub arrival_kind: Option<ArrivalKind>,
    #[serde(default)]
    pub pmf: Option<Vec<f64>>,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub multipliers: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GeoqError::Config(format!("scenario file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| GeoqError::Config(format!("{}: {e}", path.display())))
    }

    fn kind(&self) -> ArrivalKind {
        self.arrival_kind.unwrap_or(if self.pmf.is_some() {
            ArrivalKind::GeneralPmf
        } else {
            ArrivalKind::Poisson
        })
    }

    /// The arrival law and the rate it implies.
    pub fn arrivals(&self) -> Result<ArrivalModel> {
        match (self.kind(), &self.pmf) {
            (ArrivalKind::Poisson, Some(_)) => Err(GeoqError::Config(
                "pmf given but arrival_kind is poisson".into(),
            )),
            (ArrivalKind::Poisson, None) => {
                let rate = self
                    .arrival_rate
                    .ok_or_else(|| GeoqError::Config("arrival_rate is required for poisson arrivals".into()))?;
                ArrivalModel::poisson(rate)
            }
            (ArrivalKind::GeneralPmf, None) => {
                Err(GeoqError::Config("arrival_kind general_pmf needs a pmf".into()))
            }
            (ArrivalKind::GeneralPmf, Some(pmf)) => {
                let model = ArrivalModel::general(pmf.clone())?;
                if let Some(rate) = self.arrival_rate {
                    if (rate - model.mean()).abs() > 1e-9 * rate.max(1.0) {
                        return Err(GeoqError::Config(format!(
                            "arrival_rate {rate} differs from the pmf mean {}",
                            model.mean()
                        )));
                    }
                }
                Ok(model)
            }
        }
    }

    /// Base scenario with its arrival law.
    pub fn base(&self) -> Result<(QueueParams, ArrivalModel)> {
        let arrivals = self.arrivals()?;
        let params = QueueParams::new(self.n_servers, arrivals.mean(), self.service_prob)?;
        Ok((params, arrivals))
    }

    /// The sweep described by `regime`, if any.
    pub fn regime_spec(&self) -> Result<Option<RegimeSpec>> {
        let Some(regime) = self.regime else {
            if self.beta.is_some() || self.multipliers.is_some() || self.s.is_some() || self.gamma.is_some() {
                return Err(GeoqError::Config("beta, gamma, s and multipliers need a regime".into()));
            }
            return Ok(None);
        };
        let (base, _) = self.base()?;
        let multipliers = self.multipliers.clone().unwrap_or_else(|| vec![1.0]);
        let mut spec = RegimeSpec::from_base(regime, &base, self.s.unwrap_or(0.0), multipliers);
        if let Some(beta) = self.beta {
            spec.beta = beta;
        }
        spec.gamma = self.gamma;
        Ok(Some(spec))
    }

    /// Every scenario the file describes: the base alone, or the generated
    /// sweep. Sweeps need Poisson arrivals since the rate changes per row.
    pub fn scenarios(&self) -> Result<Vec<(QueueParams, ArrivalModel)>> {
        let (base, arrivals) = self.base()?;
        match self.regime_spec()? {
            None => Ok(vec![(base, arrivals)]),
            Some(spec) => {
                if arrivals.kind() != ArrivalKind::Poisson {
                    return Err(GeoqError::Config("regime sweeps support poisson arrivals only".into()));
                }
                generate_scenarios(&spec, &base)?
                    .into_iter()
                    .map(|p| Ok((p, ArrivalModel::poisson(p.arrival_rate())?)))
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_file() {
        let c = ScenarioConfig::from_toml_str("n_servers = 18\narrival_rate = 3.0\nservice_prob = 0.2\n").unwrap();
        let (p, a) = c.base().unwrap();
        assert_eq!(p.n_servers(), 18);
        assert_eq!(a.kind(), ArrivalKind::Poisson);
        assert!((p.offered_load() - 15.0).abs() < 1e-12);
        assert_eq!(c.scenarios().unwrap().len(), 1);
    }

    #[test]
    fn general_pmf_file() {
        let text = "n_servers = 3\nservice_prob = 0.5\npmf = [0.25, 0.5, 0.25]\n";
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        let (p, a) = c.base().unwrap();
        assert_eq!(a.kind(), ArrivalKind::GeneralPmf);
        assert!((p.arrival_rate() - 1.0).abs() < 1e-12);
        let bad = ScenarioConfig::from_toml_str(&format!("{text}arrival_rate = 1.5\n")).unwrap();
        assert!(bad.base().is_err());
    }

    #[test]
    fn sweep_file() {
        let text = r#"
            n_servers = 495
            arrival_rate = 90.94339622641509
            service_prob = 0.18867924528301888
            regime = "NDS"
            multipliers = [1, 2]
        "#;
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        let s = c.scenarios().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].0.n_servers(), 977);
        assert!((s[1].0.offered_load() - 964.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ScenarioConfig::from_toml_str("n_servers = 3\nservice_prob = 0.5\nbogus = 1\n").is_err());
        let no_rate = ScenarioConfig::from_toml_str("n_servers = 3\nservice_prob = 0.5\n").unwrap();
        assert!(no_rate.base().is_err());
        let orphan = ScenarioConfig::from_toml_str("n_servers = 3\narrival_rate = 1.0\nservice_prob = 0.5\nbeta = 1.0\n")
            .unwrap();
        assert!(orphan.regime_spec().is_err());
    }
}
