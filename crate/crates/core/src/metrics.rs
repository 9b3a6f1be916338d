use serde::{Deserialize, Serialize};

/// Steady-state performance measures of one queue.
///
/// The first three are √R·E[h(X̃)] for 1-Lipschitz h; `idle_prob` is the
/// probability that no customer waits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// E(X − N)⁺
    pub queue_len: f64,
    /// E(X − R)⁺
    pub adj_queue_len: f64,
    /// E(X ∧ N)
    pub busy: f64,
    /// P(X ≤ N)
    pub idle_prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    QueueLen,
    AdjQueueLen,
    Busy,
    IdleProb,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::QueueLen,
        MetricKind::AdjQueueLen,
        MetricKind::Busy,
        MetricKind::IdleProb,
    ];

    /// The measures of the form √R·E[h(X̃)] with h ∈ Lip(1).
    pub const LIPSCHITZ: [MetricKind; 3] =
        [MetricKind::QueueLen, MetricKind::AdjQueueLen, MetricKind::Busy];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::QueueLen => "queue_len",
            MetricKind::AdjQueueLen => "adj_queue_len",
            MetricKind::Busy => "busy",
            MetricKind::IdleProb => "idle_prob",
        }
    }

    pub fn is_lipschitz(self) -> bool {
        self != MetricKind::IdleProb
    }
}

impl std::str::FromStr for MetricKind {
    type Err = crate::GeoqError;

    fn from_str(s: &str) -> crate::Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| crate::GeoqError::Parse(format!("unknown metric {s:?}")))
    }
}

impl Metrics {
    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::QueueLen => self.queue_len,
            MetricKind::AdjQueueLen => self.adj_queue_len,
            MetricKind::Busy => self.busy,
            MetricKind::IdleProb => self.idle_prob,
        }
    }

    pub fn set(&mut self, kind: MetricKind, value: f64) {
        match kind {
            MetricKind::QueueLen => self.queue_len = value,
            MetricKind::AdjQueueLen => self.adj_queue_len = value,
            MetricKind::Busy => self.busy = value,
            MetricKind::IdleProb => self.idle_prob = value,
        }
    }
}
