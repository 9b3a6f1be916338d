//! Windowed probability mass functions for the arrival and departure counts.
//!
//! Each window starts at the mode and walks outward with the ratio recurrence
//! until the mass falls below a cutoff, so large trial counts never touch a
//! factorial directly.

use statrs::function::factorial::{ln_binomial, ln_factorial};

/// Mass below this is not materialised in a window.
pub const WINDOW_CUTOFF: f64 = 1e-20;

/// Probability mass over the contiguous counts `offset..offset + probs.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct PmfWindow {
    pub offset: usize,
    pub probs: Vec<f64>,
}

impl PmfWindow {
    pub fn point_mass(at: usize) -> Self {
        PmfWindow { offset: at, probs: vec![1.0] }
    }

    /// Largest count carried by the window.
    pub fn last(&self) -> usize {
        self.offset + self.probs.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        if k < self.offset {
            return 0.0;
        }
        self.probs.get(k - self.offset).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mass strictly above `k`.
    pub fn upper_tail(&self, k: usize) -> f64 {
        if k < self.offset {
            return self.total();
        }
        let start = k - self.offset + 1;
        self.probs.iter().skip(start).sum()
    }
}

fn walk(
    mode: usize,
    log_mode: f64,
    max: Option<usize>,
    cutoff: f64,
    up: impl Fn(usize) -> f64,
    down: impl Fn(usize) -> f64,
) -> PmfWindow {
    let at_mode = log_mode.exp();
    let mut upper = Vec::new();
    let mut p = at_mode;
    let mut k = mode;
    while max.is_none_or(|m| k < m) {
        p *= up(k);
        k += 1;
        if p < cutoff {
            break;
        }
        upper.push(p);
    }
    let mut lower = Vec::new();
    p = at_mode;
    k = mode;
    while k > 0 {
        p *= down(k);
        k -= 1;
        if p < cutoff {
            break;
        }
        lower.push(p);
    }
    let offset = mode - lower.len();
    let mut probs = Vec::with_capacity(lower.len() + 1 + upper.len());
    probs.extend(lower.into_iter().rev());
    probs.push(at_mode);
    probs.extend(upper);
    // the log-gamma mode value is only good to ~1e-12; the dropped tails are
    // far below that, so renormalising is the more accurate choice
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= total);
    PmfWindow { offset, probs }
}

/// Poisson(rate) restricted to counts whose mass is at least `cutoff`.
pub fn poisson_window(rate: f64, cutoff: f64) -> PmfWindow {
    assert!(rate > 0.0 && rate.is_finite(), "Poisson rate must be positive");
    let mode = rate.floor() as usize;
    let log_mode = mode as f64 * rate.ln() - rate - ln_factorial(mode as u64);
    walk(
        mode,
        log_mode,
        None,
        cutoff,
        |k| rate / (k + 1) as f64,
        |k| k as f64 / rate,
    )
}

/// Binomial(trials, p) restricted to counts whose mass is at least `cutoff`.
pub fn binomial_window(trials: u64, p: f64, cutoff: f64) -> PmfWindow {
    assert!(p > 0.0 && p < 1.0, "binomial success probability must be in (0,1)");
    if trials == 0 {
        return PmfWindow::point_mass(0);
    }
    let n = trials as usize;
    let mode = (((trials + 1) as f64 * p).floor() as usize).min(n);
    let log_mode = ln_binomial(trials, mode as u64)
        + mode as f64 * p.ln()
        + (n - mode) as f64 * (-p).ln_1p();
    let odds = p / (1.0 - p);
    walk(
        mode,
        log_mode,
        Some(n),
        cutoff,
        |k| (n - k) as f64 / (k + 1) as f64 * odds,
        |k| k as f64 / ((n - k + 1) as f64 * odds),
    )
}

/// First four raw moments `E[X^j]`, j = 1..=4, of a Poisson variable.
pub fn poisson_raw_moments(rate: f64) -> [f64; 4] {
    let l = rate;
    [
        l,
        l + l * l,
        l * l * l + 3.0 * l * l + l,
        l.powi(4) + 6.0 * l.powi(3) + 7.0 * l * l + l,
    ]
}

/// First four raw moments of Binomial(trials, p), from its factorial moments.
pub fn binomial_raw_moments(trials: u64, p: f64) -> [f64; 4] {
    let n = trials as f64;
    let f1 = n * p;
    let f2 = n * (n - 1.0) * p * p;
    let f3 = n * (n - 1.0) * (n - 2.0) * p.powi(3);
    let f4 = n * (n - 1.0) * (n - 2.0) * (n - 3.0) * p.powi(4);
    [f1, f2 + f1, f3 + 3.0 * f2 + f1, f4 + 6.0 * f3 + 7.0 * f2 + f1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_window_matches_closed_form() {
        let w = poisson_window(0.5, WINDOW_CUTOFF);
        assert_eq!(w.offset, 0);
        assert!((w.get(0) - (-0.5f64).exp()).abs() < 1e-16);
        assert!((w.get(1) - 0.5 * (-0.5f64).exp()).abs() < 1e-16);
        assert!((w.get(3) - 0.125 / 6.0 * (-0.5f64).exp()).abs() < 1e-16);
        assert!((w.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn large_poisson_window_is_normalised() {
        let w = poisson_window(730.0, WINDOW_CUTOFF);
        assert!((w.total() - 1.0).abs() < 1e-12);
        assert!(w.offset > 400 && w.last() < 1100);
    }

    #[test]
    fn binomial_window_small_cases() {
        let w = binomial_window(2, 0.5, WINDOW_CUTOFF);
        assert_eq!(w.offset, 0);
        assert_eq!(w.probs.len(), 3);
        for (k, expect) in [0.25, 0.5, 0.25].iter().enumerate() {
            assert!((w.get(k) - expect).abs() < 1e-15);
        }
        let w = binomial_window(0, 0.3, WINDOW_CUTOFF);
        assert_eq!(w.probs, vec![1.0]);
    }

    #[test]
    fn binomial_window_large_trials() {
        let w = binomial_window(3869, 1.0 / 5.3, WINDOW_CUTOFF);
        assert!((w.total() - 1.0).abs() < 1e-12);
        let mean: f64 = w
            .probs
            .iter()
            .enumerate()
            .map(|(i, p)| (w.offset + i) as f64 * p)
            .sum();
        assert!((mean - 3869.0 / 5.3).abs() < 1e-8);
    }

    #[test]
    fn raw_moments_agree_with_windows() {
        let w = binomial_window(17, 0.3, WINDOW_CUTOFF);
        let m = binomial_raw_moments(17, 0.3);
        for j in 1..=4 {
            let direct: f64 = w
                .probs
                .iter()
                .enumerate()
                .map(|(i, p)| ((w.offset + i) as f64).powi(j) * p)
                .sum();
            assert!((direct - m[j as usize - 1]).abs() < 1e-9 * m[j as usize - 1]);
        }
        let w = poisson_window(3.2, WINDOW_CUTOFF);
        let m = poisson_raw_moments(3.2);
        for j in 1..=4 {
            let direct: f64 = w
                .probs
                .iter()
                .enumerate()
                .map(|(i, p)| ((w.offset + i) as f64).powi(j) * p)
                .sum();
            assert!((direct - m[j as usize - 1]).abs() < 1e-9 * m[j as usize - 1]);
        }
    }
}
