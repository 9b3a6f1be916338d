//! Exact analysis of the customer-count chain X_{k+1} = X_k + A_k − D_k with
//! D_k ~ Binomial(X_k ∧ N, μ): transition kernel, stationary solve, exact
//! performance measures and the moment/idle-probability checks.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoqError, Result};
use crate::metrics::Metrics;
use crate::model::{ArrivalModel, QueueParams};
use crate::pmf::{self, PmfWindow, WINDOW_CUTOFF};

/// Kernel entries below this are dropped and their mass folded back in.
pub const ENTRY_CUTOFF: f64 = 1e-16;
/// Arrival mass allowed beyond K − N before K is enlarged.
pub const ARRIVAL_TAIL_CUTOFF: f64 = 1e-14;
/// Largest chain handed to the dense oracle.
pub const DENSE_LIMIT: usize = 2000;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 2_000_000;
/// Stationary mass allowed on the truncation state before K is grown.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-12;

/// Where probability that leaves the retained band goes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    /// Overflow above K lands on K; dropped entries are folded into the row's mode.
    #[default]
    LumpTop,
    /// Retained entries are rescaled to sum to one.
    Renormalize,
}

/// One kernel row: probabilities of states `start..start + probs.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelRow {
    pub start: usize,
    pub probs: Vec<f64>,
}

impl KernelRow {
    pub fn get(&self, m: usize) -> f64 {
        if m < self.start {
            return 0.0;
        }
        self.probs.get(m - self.start).copied().unwrap_or(0.0)
    }

    pub fn end(&self) -> usize {
        self.start + self.probs.len()
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Transition probabilities of the chain truncated to states 0..=K.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    params: QueueParams,
    rows: Vec<KernelRow>,
    policy: TruncationPolicy,
    tail_bound: f64,
}

impl TransitionKernel {
    /// Number of states, K + 1.
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn top_state(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[KernelRow] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &KernelRow {
        &self.rows[n]
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    /// Largest mass any single row lost to truncation or entry dropping
    /// before it was folded back.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn params(&self) -> &QueueParams {
        &self.params
    }

    /// One step of the chain: returns `dist · P`.
    pub fn step(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        self.step_into(dist, &mut out);
        out
    }

    fn step_into(&self, dist: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (row, &w) in self.rows.iter().zip(dist) {
            if w == 0.0 {
                continue;
            }
            let target = &mut out[row.start..row.end()];
            for (t, p) in target.iter_mut().zip(&row.probs) {
                *t += w * p;
            }
        }
    }

    /// The kernel as a dense matrix (rows = from-state).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, p) in row.probs.iter().enumerate() {
                m[(i, row.start + j)] = *p;
            }
        }
        m
    }
}

/// Smallest admissible truncation level: N + ⌈max(10√R, 20√R/|ζ|)⌉.
pub fn default_truncation(params: &QueueParams) -> usize {
    let sr = params.sqrt_load();
    let extra = (10.0 * sr).max(20.0 * sr / params.zeta().abs());
    params.n_servers() as usize + extra.ceil() as usize
}

/// Builds the kernel on states 0..=K.
///
/// K is enlarged when the arrival law puts at least 1e-14 beyond K − N.
pub fn build_kernel(
    params: &QueueParams,
    arrivals: &ArrivalModel,
    k: usize,
    policy: TruncationPolicy,
) -> Result<TransitionKernel> {
    arrivals.ensure_paired(params)?;
    let n_servers = params.n_servers() as usize;
    if k <= n_servers {
        return Err(GeoqError::Config(format!(
            "truncation level K = {k} must exceed N = {n_servers}"
        )));
    }
    let arrival = arrivals.window();
    let mut reach = 0;
    while arrival.upper_tail(reach) >= ARRIVAL_TAIL_CUTOFF {
        reach += 1;
    }
    let top = k.max(n_servers + reach);
    let mu = params.service_prob();

    let full_departures = pmf::binomial_window(n_servers as u64, mu, WINDOW_CUTOFF);
    let saturated = convolve_jump(&full_departures, &arrival);

    let built: Vec<(KernelRow, f64)> = (0..=top)
        .into_par_iter()
        .map(|n| {
            if n >= n_servers {
                place_row(n, &full_departures, &arrival, &saturated, top, policy)
            } else {
                let departures = pmf::binomial_window(n as u64, mu, WINDOW_CUTOFF);
                let jump = convolve_jump(&departures, &arrival);
                place_row(n, &departures, &arrival, &jump, top, policy)
            }
        })
        .collect();
    let tail_bound = built.iter().map(|(_, lost)| *lost).fold(0.0, f64::max);
    Ok(TransitionKernel {
        params: *params,
        rows: built.into_iter().map(|(r, _)| r).collect(),
        policy,
        tail_bound,
    })
}

/// Law of a − d for independent windows: index t ↔ jump a_lo − d_hi + t.
fn convolve_jump(departures: &PmfWindow, arrivals: &PmfWindow) -> Vec<f64> {
    let nd = departures.probs.len();
    let na = arrivals.probs.len();
    let mut out = vec![0.0; nd + na - 1];
    for (i, pd) in departures.probs.iter().rev().enumerate() {
        for (j, pa) in arrivals.probs.iter().enumerate() {
            out[i + j] += pd * pa;
        }
    }
    out
}

fn place_row(
    n: usize,
    departures: &PmfWindow,
    arrivals: &PmfWindow,
    jump: &[f64],
    top: usize,
    policy: TruncationPolicy,
) -> (KernelRow, f64) {
    // target of jump[0]; never negative since the departure window ends at or below n
    let first = n + arrivals.offset - departures.last();
    let mut overflow = 0.0;
    let mut dropped = 0.0;
    let mut probs: Vec<f64> = Vec::with_capacity(jump.len());
    for (t, &p) in jump.iter().enumerate() {
        let m = first + t;
        if m > top {
            overflow += p;
        } else if p < ENTRY_CUTOFF {
            dropped += p;
            probs.push(0.0);
        } else {
            probs.push(p);
        }
    }
    let mut start = first;
    let lead = probs.iter().take_while(|p| **p == 0.0).count();
    probs.drain(..lead);
    start += lead;
    while probs.last() == Some(&0.0) {
        probs.pop();
    }
    if overflow > 0.0 && policy == TruncationPolicy::LumpTop {
        let needed = top + 1 - start;
        if probs.len() < needed {
            probs.resize(needed, 0.0);
        }
        *probs.last_mut().expect("row reaches the top state") += overflow;
    }
    let lost = overflow + dropped;
    match policy {
        TruncationPolicy::LumpTop => {
            let (mode, _) = probs
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
            let others: f64 = probs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != mode)
                .map(|(_, p)| p)
                .sum();
            probs[mode] = 1.0 - others;
        }
        TruncationPolicy::Renormalize => {
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
        }
    }
    (KernelRow { start, probs }, lost)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    PowerIteration,
    DenseDirect,
    /// Banded GTH elimination, polished by power iteration.
    BandedDirect,
}

/// Stationary distribution of the truncated chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryPmf {
    pub probs: Vec<f64>,
    /// ‖πP − π‖∞ at termination.
    pub residual: f64,
    /// π(K), the mass sitting on the truncation state.
    pub truncation_mass: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub solver: SolverKind,
}

impl StationaryPmf {
    pub fn top_state(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Writes the `state,probability` table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "state,probability")?;
        for (n, p) in self.probs.iter().enumerate() {
            writeln!(out, "{n},{p:e}")?;
        }
        Ok(())
    }

    /// Sidecar record describing how the table was produced.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "K": self.top_state(),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "iterations": self.iterations,
            "solver": self.solver,
            "truncation_mass": self.truncation_mass,
        })
    }
}

/// Power iteration π ← πP from the kernel's default starting vector.
pub fn solve_stationary(kernel: &TransitionKernel, tol: f64, max_iters: usize) -> Result<StationaryPmf> {
    let init = initial_guess(kernel.params(), kernel.size());
    solve_stationary_from(kernel, init, tol, max_iters)
}

/// Power iteration from a caller-supplied start (normalized internally).
pub fn solve_stationary_from(
    kernel: &TransitionKernel,
    init: Vec<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<StationaryPmf> {
    if init.len() != kernel.size() {
        return Err(GeoqError::Config(format!(
            "initial vector has {} states, kernel has {}",
            init.len(),
            kernel.size()
        )));
    }
    let mut pi = init;
    normalize(&mut pi);
    let mut next = vec![0.0; pi.len()];
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iters {
        kernel.step_into(&pi, &mut next);
        residual = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(GeoqError::NonConvergence { iterations: iter, residual });
        }
        normalize(&mut next);
        std::mem::swap(&mut pi, &mut next);
        if residual <= tol {
            let truncation_mass = *pi.last().unwrap();
            return Ok(StationaryPmf {
                probs: pi,
                residual,
                truncation_mass,
                tolerance: tol,
                iterations: iter,
                solver: SolverKind::PowerIteration,
            });
        }
    }
    Err(GeoqError::NonConvergence { iterations: max_iters, residual })
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Poisson(R) below N continued by a geometric tail whose rate is the
/// constant-drift decay of the diffusion limit.
fn initial_guess(params: &QueueParams, size: usize) -> Vec<f64> {
    let n_servers = params.n_servers() as usize;
    let poisson = pmf::poisson_window(params.offered_load(), 1e-300);
    let floor = 1e-300;
    let mut v: Vec<f64> = (0..size)
        .map(|n| poisson.get(n.min(n_servers)).max(floor))
        .collect();
    let ratio = (2.0 * params.zeta() * params.delta() / (2.0 - params.service_prob())).exp();
    for n in n_servers + 1..size {
        v[n] = (v[n - 1] * ratio).max(floor);
    }
    v
}

/// Extends a solved distribution to `size` states, continuing the tail with
/// the decay observed just below the old truncation level.
pub fn extend_guess(prev: &[f64], size: usize) -> Vec<f64> {
    let mut v = prev.to_vec();
    if size <= v.len() {
        v.truncate(size);
        return v;
    }
    let k = prev.len() - 1;
    let lag = (k / 10).clamp(1, 100);
    let ratio = if k > lag + 1 && prev[k - 1] > 0.0 && prev[k - 1 - lag] > 0.0 {
        (prev[k - 1] / prev[k - 1 - lag]).powf(1.0 / lag as f64).min(0.999_999)
    } else {
        0.5
    };
    // the old top state carried the lumped overflow
    v[k] = prev[k - 1] * ratio;
    while v.len() < size {
        let last = *v.last().unwrap();
        v.push((last * ratio).max(1e-300));
    }
    v
}

/// Direct solve of πP = π, Σπ = 1 by LU factorisation. Oracle path for
/// chains up to 2000 states.
pub fn solve_dense(kernel: &TransitionKernel) -> Result<StationaryPmf> {
    let n = kernel.size();
    if n > DENSE_LIMIT {
        return Err(GeoqError::Config(format!(
            "dense solve limited to {DENSE_LIMIT} states, kernel has {n}"
        )));
    }
    let p = kernel.to_dense();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| GeoqError::Config("singular stationary system".into()))?;
    let mut probs: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    normalize(&mut probs);
    let stepped = kernel.step(&probs);
    let residual = stepped
        .iter()
        .zip(&probs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(StationaryPmf {
        truncation_mass: *probs.last().unwrap(),
        probs,
        residual,
        tolerance: 0.0,
        iterations: 0,
        solver: SolverKind::DenseDirect,
    })
}

/// Stationary vector by GTH elimination restricted to the kernel band.
///
/// GTH never subtracts, so small tail probabilities keep full relative
/// accuracy. Elimination of state n only touches pairs (i, j) with
/// i, j < n inside the original band, so no fill-in escapes it.
pub fn solve_banded(kernel: &TransitionKernel) -> Result<Vec<f64>> {
    let size = kernel.size();
    let (mut below, mut above) = (0, 0);
    for (n, row) in kernel.rows().iter().enumerate() {
        below = below.max(n.saturating_sub(row.start));
        above = above.max(row.end().saturating_sub(n));
    }
    let width = below + above + 1;
    // band[i * width + (j + below - i)] holds P[i][j]
    let mut band = vec![0.0; size * width];
    for (i, row) in kernel.rows().iter().enumerate() {
        for (t, &p) in row.probs.iter().enumerate() {
            band[i * width + row.start + t + below - i] = p;
        }
    }
    let at = |i: usize, j: usize| i * width + j + below - i;
    // With tiny entries dropped, states far below the load are never
    // re-entered; the first state whose censored chain cannot move down is
    // the bottom of the recurrent class and everything under it has mass 0.
    let mut floor = 0;
    for n in (1..size).rev() {
        let lo = n.saturating_sub(below);
        let s: f64 = (lo..n).map(|j| band[at(n, j)]).sum();
        if !s.is_finite() {
            return Err(GeoqError::Config(format!("elimination broke down at state {n}")));
        }
        if s == 0.0 {
            floor = n;
            break;
        }
        let first_row = n.saturating_sub(above);
        for i in first_row..n {
            band[at(i, n)] /= s;
        }
        let (head, tail) = band.split_at_mut(n * width);
        let pivot_row = &tail[..width];
        for i in first_row..n {
            let f = head[i * width + n + below - i];
            if f == 0.0 {
                continue;
            }
            let base = i * width + below - i;
            for j in lo..n {
                head[base + j] += f * pivot_row[j + below - n];
            }
        }
    }
    let mut pi = vec![0.0; size];
    pi[floor] = 1.0;
    for j in floor + 1..size {
        pi[j] = (j.saturating_sub(above).max(floor)..j).map(|i| pi[i] * band[at(i, j)]).sum();
        // the unnormalized vector can climb hundreds of orders of magnitude
        // from the floor to the mode
        if pi[j] > 1e200 {
            pi[floor..=j].iter_mut().for_each(|v| *v *= 1e-200);
        }
    }
    normalize(&mut pi);
    Ok(pi)
}

/// Settings for [`solve_queue`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub policy: TruncationPolicy,
    /// Fixed K; `None` starts from [`default_truncation`] and grows.
    pub truncation: Option<usize>,
    pub tail_target: f64,
    pub max_growth_rounds: usize,
    /// Start power iteration from the banded direct solution instead of
    /// the Poisson/geometric guess.
    pub direct_start: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
            policy: TruncationPolicy::LumpTop,
            truncation: None,
            tail_target: DEFAULT_TAIL_TARGET,
            max_growth_rounds: 12,
            direct_start: true,
        }
    }
}

/// Builds and solves the chain, growing K until π(K) < `tail_target`
/// unless K is pinned.
pub fn solve_queue(params: &QueueParams, arrivals: &ArrivalModel, opts: &SolveOptions) -> Result<StationaryPmf> {
    let solve = |kernel: &TransitionKernel, warm: Option<&[f64]>| -> Result<StationaryPmf> {
        if opts.direct_start {
            let start = solve_banded(kernel)?;
            let mut pmf = solve_stationary_from(kernel, start, opts.tol, opts.max_iters)?;
            pmf.solver = SolverKind::BandedDirect;
            return Ok(pmf);
        }
        let init = match warm {
            Some(prev) => extend_guess(prev, kernel.size()),
            None => initial_guess(kernel.params(), kernel.size()),
        };
        solve_stationary_from(kernel, init, opts.tol, opts.max_iters)
    };
    if let Some(k) = opts.truncation {
        let kernel = build_kernel(params, arrivals, k, opts.policy)?;
        return solve(&kernel, None);
    }
    let n = params.n_servers() as usize;
    let mut k = default_truncation(params);
    let mut warm: Option<Vec<f64>> = None;
    for _ in 0..=opts.max_growth_rounds {
        let kernel = build_kernel(params, arrivals, k, opts.policy)?;
        let pmf = solve(&kernel, warm.as_deref())?;
        if pmf.truncation_mass < opts.tail_target {
            return Ok(pmf);
        }
        k = n + ((kernel.top_state() - n) as f64 * 1.5).ceil() as usize;
        warm = Some(pmf.probs);
    }
    Err(GeoqError::Config(format!(
        "truncation level did not reach tail mass {:e} after {} growth rounds",
        opts.tail_target, opts.max_growth_rounds
    )))
}

/// E(X−N)⁺, E(X−R)⁺, E(X∧N) and P(X ≤ N) as exact sums over π.
pub fn exact_metrics(pmf: &StationaryPmf, params: &QueueParams) -> Metrics {
    metrics_of(&pmf.probs, params)
}

/// The same sums for any distribution over 0, 1, 2, ….
pub fn metrics_of(probs: &[f64], params: &QueueParams) -> Metrics {
    let n_servers = params.n_servers() as f64;
    let r = params.offered_load();
    let mut m = Metrics::default();
    for (n, &p) in probs.iter().enumerate() {
        let x = n as f64;
        m.queue_len += (x - n_servers).max(0.0) * p;
        m.adj_queue_len += (x - r).max(0.0) * p;
        m.busy += x.min(n_servers) * p;
        if x <= n_servers {
            m.idle_prob += p;
        }
    }
    m
}

/// |E[G f(X̃)]| for the polynomial f(x) = Σ c_j x^j (degree ≤ 4), where
/// G f(x) = E_n[f(x + δ(A − D)) − f(x)] is the one-step generator of the
/// scaled chain. Vanishes for the true stationary law.
pub fn check_bar(
    pmf: &StationaryPmf,
    params: &QueueParams,
    arrivals: &ArrivalModel,
    coeffs: &[f64],
) -> Result<f64> {
    if coeffs.len() > 5 {
        return Err(GeoqError::Config(format!(
            "generator check supports degree ≤ 4, got {} coefficients",
            coeffs.len()
        )));
    }
    let a_mom = arrivals.raw_moments();
    let a_raw = |j: usize| if j == 0 { 1.0 } else { a_mom[j - 1] };
    let n_servers = params.n_servers() as usize;
    let mu = params.service_prob();
    let delta = params.delta();
    let binom = |k: usize, j: usize| -> f64 {
        (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
    };

    let mut total = 0.0;
    for (n, &p) in pmf.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let d_mom = pmf::binomial_raw_moments(n.min(n_servers) as u64, mu);
        let d_raw = |j: usize| if j == 0 { 1.0 } else { d_mom[j - 1] };
        // E[(A − D)^j]
        let mut jump = [0.0; 5];
        for (j, slot) in jump.iter_mut().enumerate().skip(1) {
            *slot = (0..=j)
                .map(|i| {
                    let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                    binom(j, i) * a_raw(i) * sign * d_raw(j - i)
                })
                .sum();
        }
        let x = params.scale(n as f64);
        let mut g = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            for j in 1..=k {
                g += c * binom(k, j) * x.powi((k - j) as i32) * delta.powi(j as i32) * jump[j];
            }
        }
        total += p * g;
    }
    Ok(total.abs())
}

/// One side-by-side comparison of an analytic bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `Some(tol)` for an equality checked to within `tol`.
    pub equality_tol: Option<f64>,
    pub holds: bool,
}

impl BoundCheck {
    fn le(name: &'static str, lhs: f64, rhs: f64) -> Self {
        BoundCheck { name, lhs, rhs, equality_tol: None, holds: lhs <= rhs }
    }

    fn eq(name: &'static str, lhs: f64, rhs: f64, tol: f64) -> Self {
        BoundCheck { name, lhs, rhs, equality_tol: Some(tol), holds: (lhs - rhs).abs() < tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Tolerance on E|(X̃ + ζ)1{X̃ ≤ −ζ}| = |ζ|.
pub const EQUALITY_TOL: f64 = 1e-6;

/// Evaluates both sides of the idle-probability bound and the partial moment
/// bounds of X̃ on the solved distribution.
pub fn verify_bounds(pmf: &StationaryPmf, params: &QueueParams) -> BoundReport {
    let n_servers = params.n_servers() as usize;
    let delta = params.delta();
    let zeta = params.zeta();
    let mu = params.service_prob();
    let mut idle = 0.0;
    let mut sq_low = 0.0;
    let mut abs_low = 0.0;
    let mut abs_high = 0.0;
    let mut shifted_low = 0.0;
    for (n, &p) in pmf.probs.iter().enumerate() {
        let x = params.scale(n as f64);
        // X̃ ≤ −ζ ⇔ X ≤ N; compare counts to avoid rounding at the boundary
        if n <= n_servers {
            idle += p;
            sq_low += x * x * p;
            abs_low += x.abs() * p;
            shifted_low += (x + zeta).abs() * p;
        }
        if n >= n_servers {
            abs_high += x.abs() * p;
        }
    }
    let second = 4.0 / 3.0 + 8.0 / 3.0 * delta * delta;
    BoundReport {
        checks: vec![
            BoundCheck::le(
                "idle_probability",
                idle,
                (2.0 + delta) * (zeta.abs() + mu * params.sqrt_load()) / (1.0 - mu),
            ),
            BoundCheck::le("second_moment_below", sq_low, second),
            BoundCheck::le("first_moment_below", abs_low, second.sqrt().min(2.0 * zeta.abs())),
            BoundCheck::le("first_moment_above", abs_high, (delta * delta + 1.0) / zeta.abs() + delta),
            BoundCheck::eq("shifted_moment_below", shifted_low, zeta.abs(), EQUALITY_TOL),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (QueueParams, ArrivalModel) {
        let p = QueueParams::new(2, 0.5, 0.5).unwrap();
        let a = ArrivalModel::poisson(0.5).unwrap();
        (p, a)
    }

    fn poisson(l: f64, k: usize) -> f64 {
        (-l).exp() * l.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>()
    }

    #[test]
    fn empty_system_row_is_arrival_law() {
        let p = QueueParams::new(1, 0.3, 0.5).unwrap();
        let a = ArrivalModel::poisson(0.3).unwrap();
        let k = build_kernel(&p, &a, 40, TruncationPolicy::LumpTop).unwrap();
        let row = k.row(0);
        for m in 1..8 {
            assert!((row.get(m) - poisson(0.3, m)).abs() < 1e-15, "m = {m}");
        }
        // the mode absorbs the dropped mass
        assert!((row.get(0) - poisson(0.3, 0)).abs() < 1e-15);
    }

    #[test]
    fn two_server_row_by_enumeration() {
        let (p, a) = toy();
        let k = build_kernel(&p, &a, 50, TruncationPolicy::LumpTop).unwrap();
        // d ∈ {0,1,2}: to reach 1 from 2 need a = d − 1
        let expect = 0.5 * poisson(0.5, 0) + 0.25 * poisson(0.5, 1);
        assert!((k.row(2).get(1) - expect).abs() < 1e-15);
        assert!((k.row(2).get(0) - 0.25 * poisson(0.5, 0)).abs() < 1e-15);
    }

    #[test]
    fn rows_are_stochastic_under_both_policies() {
        let p = QueueParams::from_offered_load(18, 16.2, 1.0 / 5.3).unwrap();
        let a = ArrivalModel::poisson(p.arrival_rate()).unwrap();
        for policy in [TruncationPolicy::LumpTop, TruncationPolicy::Renormalize] {
            // a deliberately short K forces overflow on the top rows
            let k = build_kernel(&p, &a, 30, policy).unwrap();
            for row in k.rows() {
                assert!((row.sum() - 1.0).abs() < 1e-12);
                assert!(row.end() <= k.size());
                assert!(row.probs.iter().all(|&v| v >= 0.0));
            }
            assert!(k.tail_bound() > 1e-6);
        }
    }

    #[test]
    fn rejects_truncation_at_or_below_servers() {
        let (p, a) = toy();
        assert!(matches!(
            build_kernel(&p, &a, 2, TruncationPolicy::LumpTop),
            Err(GeoqError::Config(_))
        ));
    }

    #[test]
    fn truncation_grows_for_heavy_arrivals() {
        let p = QueueParams::new(2, 1.5, 0.9).unwrap();
        let a = ArrivalModel::poisson(1.5).unwrap();
        let k = build_kernel(&p, &a, 3, TruncationPolicy::LumpTop).unwrap();
        assert!(k.top_state() >= 2 + 15);
    }

    #[test]
    fn power_matches_dense_on_toy() {
        let (p, a) = toy();
        let k = build_kernel(&p, &a, 50, TruncationPolicy::LumpTop).unwrap();
        let it = solve_stationary(&k, 1e-14, 100_000).unwrap();
        let dense = solve_dense(&k).unwrap();
        for (x, y) in it.probs.iter().zip(&dense.probs) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(it.residual <= 1e-14);
        assert!((it.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn banded_matches_dense() {
        let p = QueueParams::new(6, 2.4, 0.5).unwrap();
        let a = ArrivalModel::poisson(2.4).unwrap();
        let kernel = build_kernel(&p, &a, 60, TruncationPolicy::LumpTop).unwrap();
        let dense = solve_dense(&kernel).unwrap();
        let banded = solve_banded(&kernel).unwrap();
        for (x, y) in dense.probs.iter().zip(&banded) {
            assert!((x - y).abs() < 1e-13, "{x} vs {y}");
        }
    }

    #[test]
    fn non_convergence_reports_residual() {
        let p = QueueParams::from_offered_load(18, 16.2, 1.0 / 5.3).unwrap();
        let a = ArrivalModel::poisson(p.arrival_rate()).unwrap();
        let k = build_kernel(&p, &a, 200, TruncationPolicy::LumpTop).unwrap();
        match solve_stationary(&k, 1e-14, 3) {
            Err(GeoqError::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14 && residual.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn point_mass_metrics() {
        let (p, _) = toy();
        let pmf = StationaryPmf {
            probs: vec![1.0, 0.0, 0.0],
            residual: 0.0,
            truncation_mass: 0.0,
            tolerance: 0.0,
            iterations: 0,
            solver: SolverKind::DenseDirect,
        };
        let m = exact_metrics(&pmf, &p);
        assert_eq!(m.queue_len, 0.0);
        assert_eq!(m.adj_queue_len, 0.0);
        assert_eq!(m.busy, 0.0);
        assert_eq!(m.idle_prob, 1.0);
    }

    #[test]
    fn bar_vanishes_for_constants_and_low_degree() {
        let (p, a) = toy();
        let k = build_kernel(&p, &a, 50, TruncationPolicy::LumpTop).unwrap();
        let pmf = solve_dense(&k).unwrap();
        assert_eq!(check_bar(&pmf, &p, &a, &[1.0]).unwrap(), 0.0);
        assert!(check_bar(&pmf, &p, &a, &[0.0, 1.0]).unwrap() < 1e-8);
        assert!(check_bar(&pmf, &p, &a, &[0.0, 0.0, 1.0]).unwrap() < 1e-8);
        assert!(check_bar(&pmf, &p, &a, &[0.0; 6]).is_err());
        // a perturbed distribution is detected
        let mut off = pmf.clone();
        off.probs[0] += 0.01;
        off.probs[1] -= 0.01;
        assert!(check_bar(&off, &p, &a, &[0.0, 1.0]).unwrap() > 1e-4);
    }

    #[test]
    fn csv_and_metadata() {
        let (p, a) = toy();
        let k = build_kernel(&p, &a, 20, TruncationPolicy::LumpTop).unwrap();
        let pmf = solve_stationary(&k, 1e-12, 100_000).unwrap();
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("state,probability\n0,"));
        assert_eq!(text.lines().count(), k.size() + 1);
        let meta = pmf.metadata();
        assert_eq!(meta["K"], k.top_state());
        assert_eq!(meta["solver"], "power_iteration");
    }

    #[test]
    fn extend_guess_continues_tail() {
        let prev: Vec<f64> = (0..50).map(|n| 0.5f64.powi(n)).collect();
        let ext = extend_guess(&prev, 60);
        assert_eq!(ext.len(), 60);
        assert!((ext[55] / ext[54] - 0.5).abs() < 1e-9);
    }
}
