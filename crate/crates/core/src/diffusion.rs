//! Stationary densities of the approximating diffusions and the error
//! measures against the exact chain.
//!
//! The density is p(x) = κ/a(x) · exp(∫₀ˣ 2b(y)/a(y) dy). The exponent is
//! accumulated cell by cell with Gauss–Legendre quadrature on a grid whose
//! nodes include every point where b, a or the metric integrands change
//! formula, so each cell integrand is smooth.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{GeoqError, Result};
use crate::markov::StationaryPmf;
use crate::metrics::{MetricKind, Metrics};
use crate::model::{ArrivalModel, Coefficients, QueueParams};

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];
const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Upper bound on grid cells, guarding against runaway tails.
const MAX_CELLS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityVariant {
    /// Piecewise-quadratic a(x) from the conditional jump moments.
    StateDependent,
    /// a ≡ 2μ.
    ConstantCoeff,
}

/// Grid resolution and extent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Largest cell width.
    pub spacing: f64,
    /// The grid ends where log p falls this far below its maximum.
    pub tail_nats: f64,
    /// Minimum half-width around the mode (divided by |ζ| ∧ 1 on the right).
    pub core_halfwidth: f64,
    /// Accepted disagreement between the 5- and 3-point cell rules, relative
    /// to the total mass.
    pub norm_tol: f64,
    pub max_refinements: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            spacing: 1e-3,
            tail_nats: 40.0,
            core_halfwidth: 12.0,
            norm_tol: 1e-10,
            max_refinements: 4,
        }
    }
}

/// Normalized diffusion density tabulated on a grid.
#[derive(Clone, Debug)]
pub struct DiffusionDensity {
    variant: DensityVariant,
    coeffs: Coefficients,
    grid: Vec<f64>,
    exponent: Vec<f64>,
    log_unnormalized: Vec<f64>,
    kappa: f64,
    cdf: Vec<f64>,
    /// Normalized density at the 5 Gauss nodes of each cell.
    node_pdf: Vec<[f64; 5]>,
    spacing: f64,
}

/// ∫_u^v 2b/a by 5-point Gauss–Legendre; [u, v] must not straddle a breakpoint.
fn exponent_increment(c: &Coefficients, u: f64, v: f64) -> f64 {
    let mid = 0.5 * (u + v);
    let half = 0.5 * (v - u);
    let mut s = 0.0;
    for (t, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
        s += w * c.exponent_rate(mid + half * t);
    }
    s * half
}

/// Builds the density for the given variant.
pub fn build_density(
    params: &QueueParams,
    arrivals: &ArrivalModel,
    variant: DensityVariant,
    resolution: &GridSpec,
) -> Result<DiffusionDensity> {
    arrivals.ensure_paired(params)?;
    let coeffs = match variant {
        DensityVariant::StateDependent => {
            if arrivals.c_a() <= 1.0 {
                return Err(GeoqError::InvalidParams(format!(
                    "state-dependent density needs c_A > 1, arrival law has c_A = {}",
                    arrivals.c_a()
                )));
            }
            Coefficients::state_dependent(params, arrivals)
        }
        DensityVariant::ConstantCoeff => Coefficients::constant(params),
    };
    if !(resolution.spacing > 0.0 && resolution.spacing.is_finite()) {
        return Err(GeoqError::Config(format!("grid spacing must be positive, got {}", resolution.spacing)));
    }
    let (lo, hi) = extent(&coeffs, params, resolution)?;
    let mut spacing = resolution.spacing;
    for _ in 0..=resolution.max_refinements {
        let (density, mismatch) = tabulate(variant, coeffs, lo, hi, spacing)?;
        if mismatch <= resolution.norm_tol {
            return Ok(density);
        }
        spacing *= 0.5;
    }
    Err(GeoqError::Density(format!(
        "normalization not resolved to {:e} after {} refinements",
        resolution.norm_tol, resolution.max_refinements
    )))
}

fn log_density(c: &Coefficients, exponent: f64, x: f64) -> f64 {
    exponent - c.diffusion(x).ln()
}

/// Walks outward from 0 in coarse steps until log p has dropped `tail_nats`
/// below the running maximum.
fn extent(c: &Coefficients, params: &QueueParams, spec: &GridSpec) -> Result<(f64, f64)> {
    let step = 0.05;
    let breaks = c.breakpoints();
    let walk = |dir: f64| -> Result<(f64, f64, f64)> {
        let mut x = 0.0;
        let mut e = 0.0;
        let mut best = log_density(c, 0.0, 0.0);
        let mut best_x = 0.0;
        for _ in 0..(MAX_CELLS / 10) {
            let mut next = x + dir * step;
            // stop exactly on a breakpoint so no step straddles a kink
            for b in breaks {
                if (b - x) * dir > 0.0 && (next - b) * dir > 0.0 {
                    next = b;
                }
            }
            e += if dir > 0.0 {
                exponent_increment(c, x, next)
            } else {
                -exponent_increment(c, next, x)
            };
            x = next;
            let lp = log_density(c, e, x);
            if lp > best {
                best = lp;
                best_x = x;
            }
            if lp < best - spec.tail_nats {
                return Ok((x, best, best_x));
            }
        }
        Err(GeoqError::Density("density tail does not decay".into()))
    };
    let (right, best_r, mode_r) = walk(1.0)?;
    let (left, best_l, mode_l) = walk(-1.0)?;
    let mode = if best_r >= best_l { mode_r } else { mode_l };
    let zeta = params.zeta();
    let hi = right
        .max(mode + spec.core_halfwidth / zeta.abs().min(1.0))
        .max(-zeta + 1.0);
    let lo = left.min(mode - spec.core_halfwidth);
    Ok((lo, hi))
}

fn tabulate(
    variant: DensityVariant,
    coeffs: Coefficients,
    lo: f64,
    hi: f64,
    spacing: f64,
) -> Result<(DiffusionDensity, f64)> {
    let mut cuts = vec![lo, 0.0, hi];
    for b in coeffs.breakpoints() {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut grid = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let cells = ((b - a) / spacing).ceil().max(1.0) as usize;
        if grid.len() + cells > MAX_CELLS {
            return Err(GeoqError::Density(format!(
                "grid on [{lo}, {hi}] at spacing {spacing:e} exceeds {MAX_CELLS} cells"
            )));
        }
        let h = (b - a) / cells as f64;
        grid.extend((0..cells).map(|i| a + h * i as f64));
    }
    grid.push(hi);
    // breakpoints must be exact nodes
    for b in &cuts {
        let i = grid.partition_point(|x| x < b);
        grid[i] = *b;
    }

    let origin = grid.partition_point(|&x| x < 0.0);
    let mut exponent = vec![0.0; grid.len()];
    for i in origin..grid.len() - 1 {
        exponent[i + 1] = exponent[i] + exponent_increment(&coeffs, grid[i], grid[i + 1]);
    }
    for i in (1..=origin).rev() {
        exponent[i - 1] = exponent[i] - exponent_increment(&coeffs, grid[i - 1], grid[i]);
    }
    let log_unnormalized: Vec<f64> = grid
        .iter()
        .zip(&exponent)
        .map(|(&x, &e)| log_density(&coeffs, e, x))
        .collect();

    let cells = grid.len() - 1;
    let mut node_pdf = vec![[0.0; 5]; cells];
    let mut masses = vec![0.0; cells];
    let mut mismatch = 0.0;
    for i in 0..cells {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let mid = 0.5 * (x0 + x1);
        let half = 0.5 * (x1 - x0);
        let at = |t: f64| (log_density(&coeffs, exponent[i] + exponent_increment(&coeffs, x0, t), t)).exp();
        let mut m5 = 0.0;
        for k in 0..5 {
            let v = at(mid + half * GL5_NODES[k]);
            node_pdf[i][k] = v;
            m5 += GL5_WEIGHTS[k] * v;
        }
        let mut m3 = 0.0;
        for k in 0..3 {
            m3 += GL3_WEIGHTS[k] * at(mid + half * GL3_NODES[k]);
        }
        masses[i] = m5 * half;
        mismatch += ((m5 - m3) * half).abs();
    }
    let total: f64 = masses.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(GeoqError::Density(format!("unnormalizable density (mass {total})")));
    }
    let kappa = 1.0 / total;
    for row in &mut node_pdf {
        row.iter_mut().for_each(|v| *v *= kappa);
    }
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for m in &masses {
        acc += m * kappa;
        cdf.push(acc);
    }
    Ok((
        DiffusionDensity {
            variant,
            coeffs,
            grid,
            exponent,
            log_unnormalized,
            kappa,
            cdf,
            node_pdf,
            spacing,
        },
        mismatch / total,
    ))
}

impl DiffusionDensity {
    pub fn variant(&self) -> DensityVariant {
        self.variant
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// log(exp(∫₀ˣ 2b/a)/a(x)) at the grid nodes.
    pub fn log_unnormalized(&self) -> &[f64] {
        &self.log_unnormalized
    }

    /// ∫₀ˣ 2b/a at the grid nodes.
    pub fn exponent(&self) -> &[f64] {
        &self.exponent
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// CDF at the grid nodes.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Cell width actually used (after any refinement).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn pdf_at_nodes(&self) -> Vec<f64> {
        self.log_unnormalized.iter().map(|l| self.kappa * l.exp()).collect()
    }

    /// Index of the cell containing x, or `None` outside the grid.
    fn cell_of(&self, x: f64) -> Option<usize> {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let i = self.grid.partition_point(|&g| g <= x);
        Some(i.saturating_sub(1).min(self.grid.len() - 2))
    }

    /// Density at any x (zero outside the tabulated range).
    pub fn pdf(&self, x: f64) -> f64 {
        match self.cell_of(x) {
            None => 0.0,
            Some(i) => {
                let e = self.exponent[i] + exponent_increment(&self.coeffs, self.grid[i], x);
                self.kappa * log_density(&self.coeffs, e, x).exp()
            }
        }
    }

    /// CDF at any x, by cubic Hermite interpolation inside a cell.
    pub fn cdf_at(&self, x: f64) -> f64 {
        match self.cell_of(x) {
            None if x < self.grid[0] => 0.0,
            None => 1.0,
            Some(i) => self.hermite(i).value(x),
        }
    }

    fn hermite(&self, i: usize) -> HermiteCell {
        HermiteCell {
            x0: self.grid[i],
            h: self.grid[i + 1] - self.grid[i],
            f0: self.cdf[i],
            f1: self.cdf[i + 1],
            p0: self.kappa * self.log_unnormalized[i].exp(),
            p1: self.kappa * self.log_unnormalized[i + 1].exp(),
        }
    }

    /// E[h(Y)] by 5-point Gauss–Legendre on every cell. Exact to quadrature
    /// precision for h smooth between grid nodes.
    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (i, nodes) in self.node_pdf.iter().enumerate() {
            let (x0, x1) = (self.grid[i], self.grid[i + 1]);
            let mid = 0.5 * (x0 + x1);
            let half = 0.5 * (x1 - x0);
            let mut c = 0.0;
            for k in 0..5 {
                c += GL5_WEIGHTS[k] * h(mid + half * GL5_NODES[k]) * nodes[k];
            }
            s += c * half;
        }
        s
    }

    /// Total mass by the composite Simpson rule on the grid nodes, an
    /// estimate independent of the cell rule used for κ.
    pub fn simpson_mass(&self) -> f64 {
        let pdf = self.pdf_at_nodes();
        let mut s = 0.0;
        for i in 0..self.grid.len() - 1 {
            let (x0, x1) = (self.grid[i], self.grid[i + 1]);
            let mid = self.pdf(0.5 * (x0 + x1));
            s += (x1 - x0) / 6.0 * (pdf[i] + 4.0 * mid + pdf[i + 1]);
        }
        s
    }

    /// Writes the `x,p,F` table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,p,F")?;
        for ((x, l), f) in self.grid.iter().zip(&self.log_unnormalized).zip(&self.cdf) {
            writeln!(out, "{x:e},{:e},{f:e}", self.kappa * l.exp())?;
        }
        Ok(())
    }
}

/// Cubic Hermite interpolant of the CDF on one cell.
#[derive(Clone, Copy, Debug)]
struct HermiteCell {
    x0: f64,
    h: f64,
    f0: f64,
    f1: f64,
    p0: f64,
    p1: f64,
}

impl HermiteCell {
    fn value(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.f0
            + (s3 - 2.0 * s2 + s) * self.h * self.p0
            + (-2.0 * s3 + 3.0 * s2) * self.f1
            + (s3 - s2) * self.h * self.p1
    }

    fn antiderivative(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        self.h
            * ((0.5 * s4 - s3 + s) * self.f0
                + (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * self.h * self.p0
                + (-0.5 * s4 + s3) * self.f1
                + (0.25 * s4 - s3 / 3.0) * self.h * self.p1)
    }

    /// ∫_u^v |F(t) − level| dt.
    fn abs_gap(&self, u: f64, v: f64, level: f64) -> f64 {
        let (fu, fv) = (self.value(u) - level, self.value(v) - level);
        let signed = |a: f64, b: f64| self.antiderivative(b) - self.antiderivative(a) - level * (b - a);
        if fu * fv >= 0.0 {
            return signed(u, v).abs();
        }
        let (mut a, mut b) = (u, v);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if (self.value(m) - level) * fu > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let cross = 0.5 * (a + b);
        signed(u, cross).abs() + signed(cross, v).abs()
    }
}

/// √R·E[h(Y)] for the three Lipschitz measures and P(Y ≤ −ζ).
pub fn approx_metrics(density: &DiffusionDensity, params: &QueueParams) -> Metrics {
    let zeta = params.zeta();
    let sr = params.sqrt_load();
    let dn = params.delta() * params.n_servers() as f64;
    let knot = density.grid.partition_point(|&g| g < -zeta);
    Metrics {
        queue_len: sr * density.expect(|x| (x + zeta).max(0.0)),
        adj_queue_len: sr * density.expect(|x| x.max(0.0)),
        busy: sr * density.expect(|x| dn - (-(x + zeta)).max(0.0)),
        idle_prob: density.cdf.get(knot).copied().unwrap_or(1.0),
    }
}

/// Per-metric relative errors; `None` where the exact value is zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RelativeErrors {
    pub queue_len: Option<f64>,
    pub adj_queue_len: Option<f64>,
    pub busy: Option<f64>,
    pub idle_prob: Option<f64>,
}

impl RelativeErrors {
    pub fn get(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::QueueLen => self.queue_len,
            MetricKind::AdjQueueLen => self.adj_queue_len,
            MetricKind::Busy => self.busy,
            MetricKind::IdleProb => self.idle_prob,
        }
    }
}

/// Exact-versus-approximate comparison for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub exact: Metrics,
    pub approx: Metrics,
    /// |exact − approx|/√R for the Lipschitz measures; for `idle_prob`, the
    /// plain absolute difference of the two probabilities.
    pub scaled_error: Metrics,
    pub relative_error: RelativeErrors,
    /// ∫|F_exact − F_approx| over the scaled axis.
    pub wasserstein: f64,
}

/// Compares the solved chain (mapped to x = δ(n − R)) with a density.
pub fn distance_report(pmf: &StationaryPmf, density: &DiffusionDensity, params: &QueueParams) -> ErrorReport {
    let exact = crate::markov::exact_metrics(pmf, params);
    let approx = approx_metrics(density, params);
    compare(exact, approx, params, wasserstein(pmf, density, params))
}

/// Error columns from two metric sets.
pub fn compare(exact: Metrics, approx: Metrics, params: &QueueParams, wasserstein: f64) -> ErrorReport {
    let sr = params.sqrt_load();
    let mut scaled = Metrics::default();
    let mut rel = RelativeErrors::default();
    for kind in MetricKind::ALL {
        let diff = (exact.get(kind) - approx.get(kind)).abs();
        scaled.set(kind, if kind.is_lipschitz() { diff / sr } else { diff });
        let r = (exact.get(kind) != 0.0).then(|| diff / exact.get(kind).abs());
        match kind {
            MetricKind::QueueLen => rel.queue_len = r,
            MetricKind::AdjQueueLen => rel.adj_queue_len = r,
            MetricKind::Busy => rel.busy = r,
            MetricKind::IdleProb => rel.idle_prob = r,
        }
    }
    ErrorReport { exact, approx, scaled_error: scaled, relative_error: rel, wasserstein }
}

/// 1-Wasserstein distance between the scaled chain and the density, as the
/// integral of the absolute CDF difference over the merged support.
pub fn wasserstein(pmf: &StationaryPmf, density: &DiffusionDensity, params: &QueueParams) -> f64 {
    let lattice: Vec<f64> = (0..pmf.probs.len()).map(|n| params.scale(n as f64)).collect();
    let grid = &density.grid;
    let (g_lo, g_hi) = (grid[0], *grid.last().unwrap());
    // sorted union of lattice points and grid nodes
    let mut points = Vec::with_capacity(lattice.len() + grid.len());
    let (mut i, mut j) = (0, 0);
    while i < lattice.len() || j < grid.len() {
        let take_lattice = j == grid.len() || (i < lattice.len() && lattice[i] <= grid[j]);
        if take_lattice {
            points.push(lattice[i]);
            i += 1;
        } else {
            points.push(grid[j]);
            j += 1;
        }
    }
    let mut total = 0.0;
    let mut exact_cdf = 0.0;
    let mut next_lattice = 0;
    let mut cell = 0;
    for w in points.windows(2) {
        let (u, v) = (w[0], w[1]);
        while next_lattice < lattice.len() && lattice[next_lattice] <= u {
            exact_cdf += pmf.probs[next_lattice];
            next_lattice += 1;
        }
        if v <= u {
            continue;
        }
        if v <= g_lo {
            total += exact_cdf * (v - u);
        } else if u >= g_hi {
            total += (1.0 - exact_cdf).abs() * (v - u);
        } else {
            while cell + 2 < grid.len() && grid[cell + 1] <= u {
                cell += 1;
            }
            total += density.hermite(cell).abs_gap(u, v, exact_cdf);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n18(mu: f64) -> (QueueParams, ArrivalModel) {
        let p = QueueParams::from_offered_load(18, 16.2, mu).unwrap();
        let a = ArrivalModel::poisson(p.arrival_rate()).unwrap();
        (p, a)
    }

    #[test]
    fn constant_density_is_gaussian_below_kink() {
        let (p, a) = n18(1.0 / 5.3);
        let d = build_density(&p, &a, DensityVariant::ConstantCoeff, &GridSpec::default()).unwrap();
        let (x1, x2) = (-1.3, 0.4);
        let ratio = d.pdf(x1) / d.pdf(x2);
        assert!((ratio - ((x2 * x2 - x1 * x1) / 2.0f64).exp()).abs() < 1e-10 * ratio);
    }

    #[test]
    fn constant_density_is_log_linear_above_kink() {
        let (p, a) = n18(1.0 / 5.3);
        let d = build_density(&p, &a, DensityVariant::ConstantCoeff, &GridSpec::default()).unwrap();
        let z = p.zeta();
        let (x1, x2) = (-z + 0.5, -z + 3.25);
        let slope = (d.pdf(x2).ln() - d.pdf(x1).ln()) / (x2 - x1);
        assert!((slope - z).abs() < 1e-9);
    }

    #[test]
    fn normalization_and_cdf() {
        let (p, a) = n18(1.0 / 5.3);
        for v in [DensityVariant::StateDependent, DensityVariant::ConstantCoeff] {
            let d = build_density(&p, &a, v, &GridSpec::default()).unwrap();
            assert!((d.simpson_mass() - 1.0).abs() < 1e-9);
            assert!((d.cdf().last().unwrap() - 1.0).abs() < 1e-9);
            assert!(d.cdf().windows(2).all(|w| w[1] >= w[0]));
            assert!(d.pdf_at_nodes().iter().all(|&v| v > 0.0));
            assert!(d.grid().windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn continuity_across_breakpoints() {
        let (p, a) = n18(0.5);
        let d = build_density(&p, &a, DensityVariant::StateDependent, &GridSpec::default()).unwrap();
        for b in d.coefficients().breakpoints() {
            let eps = 1e-9;
            let (l, r) = (d.pdf(b - eps), d.pdf(b + eps));
            assert!((l - r).abs() < 1e-7 * l.max(r), "jump at {b}: {l} vs {r}");
        }
    }

    #[test]
    fn requires_overdispersed_general_arrivals() {
        let p = QueueParams::new(3, 1.0, 0.5).unwrap();
        let a = ArrivalModel::general(vec![0.0, 1.0]).unwrap();
        assert!(build_density(&p, &a, DensityVariant::StateDependent, &GridSpec::default()).is_err());
        assert!(build_density(&p, &a, DensityVariant::ConstantCoeff, &GridSpec::default()).is_ok());
    }

    #[test]
    fn hermite_gap_handles_crossing() {
        let cell = HermiteCell { x0: 0.0, h: 1.0, f0: 0.0, f1: 1.0, p0: 1.0, p1: 1.0 };
        // F(t) = t, level 0.5 ⇒ two triangles of area 1/8
        assert!((cell.abs_gap(0.0, 1.0, 0.5) - 0.25).abs() < 1e-12);
        assert!((cell.abs_gap(0.0, 1.0, 0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_distributions_have_zero_error() {
        let (p, _) = n18(1.0 / 5.3);
        let m = Metrics { queue_len: 4.0, adj_queue_len: 5.0, busy: 15.0, idle_prob: 0.4 };
        let r = compare(m, m, &p, 0.0);
        for k in MetricKind::ALL {
            assert_eq!(r.scaled_error.get(k), 0.0);
            assert_eq!(r.relative_error.get(k), Some(0.0));
        }
        let zero = Metrics::default();
        let r = compare(zero, m, &p, 0.0);
        assert_eq!(r.relative_error.queue_len, None);
    }
}
