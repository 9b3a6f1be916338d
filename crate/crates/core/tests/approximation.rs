use geoq::diffusion::{approx_metrics, build_density, distance_report, DensityVariant, GridSpec};
use geoq::markov::{solve_queue, SolveOptions};
use geoq::{ArrivalModel, MetricKind, QueueParams};

fn scenario(n: u32, rho: f64, days: f64) -> (QueueParams, ArrivalModel) {
    let p = QueueParams::from_utilization(n, rho, 1.0 / days).unwrap();
    let a = ArrivalModel::poisson(p.arrival_rate()).unwrap();
    (p, a)
}

/// Independent quadrature of the unnormalised density on a uniform fine
/// grid with the trapezoid rule, straight from b and a.
fn reference_queue_len(p: &QueueParams, constant: bool) -> f64 {
    let mu = p.service_prob();
    let r = p.offered_load();
    let delta = 1.0 / r.sqrt();
    let zeta = (r - p.n_servers() as f64) * delta;
    let lambda = p.arrival_rate();
    let a = |x: f64| {
        if constant {
            2.0 * mu
        } else if x <= -1.0 / delta {
            mu * (1.0 + lambda)
        } else {
            let y = x.min(-zeta);
            mu * (2.0 - mu + delta * (1.0 - mu) * y + mu * y * y)
        }
    };
    let b = |x: f64| if x <= -zeta { -mu * x } else { mu * zeta };
    let (lo, hi, h) = (-1.0 / delta - 5.0, -zeta + 400.0, 1e-4);
    let steps = ((hi - lo) / h) as usize;
    // exponent from 0 by trapezoid, both directions
    let xs: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * h).collect();
    let zero = xs.iter().position(|&x| x >= 0.0).unwrap();
    let rate = |x: f64| 2.0 * b(x) / a(x);
    let mut expo = vec![0.0; xs.len()];
    for i in zero + 1..xs.len() {
        expo[i] = expo[i - 1] + 0.5 * h * (rate(xs[i - 1]) + rate(xs[i]));
    }
    for i in (0..zero).rev() {
        expo[i] = expo[i + 1] - 0.5 * h * (rate(xs[i]) + rate(xs[i + 1]));
    }
    let dens: Vec<f64> = xs.iter().zip(&expo).map(|(x, e)| e.exp() / a(*x)).collect();
    let trap = |f: &dyn Fn(usize) -> f64| (0..steps).map(|i| 0.5 * h * (f(i) + f(i + 1))).sum::<f64>();
    let mass = trap(&|i| dens[i]);
    let q = trap(&|i| (xs[i] + zeta).max(0.0) * dens[i]);
    r.sqrt() * q / mass
}

#[test]
fn queue_length_matches_brute_force_quadrature() {
    for (n, rho, days) in [(18, 0.9, 5.3), (66, 0.94, 5.3), (18, 0.9, 2.0)] {
        let (p, a) = scenario(n, rho, days);
        for (variant, constant) in [(DensityVariant::StateDependent, false), (DensityVariant::ConstantCoeff, true)] {
            let d = build_density(&p, &a, variant, &GridSpec::default()).unwrap();
            let got = approx_metrics(&d, &p).queue_len;
            let want = reference_queue_len(&p, constant);
            assert!((got - want).abs() < 1e-5 * want, "N={n} {variant:?}: {got} vs {want}");
        }
    }
}

#[test]
fn density_is_normalised_positive_and_monotone() {
    let (p, a) = scenario(66, 0.96, 5.3);
    for variant in [DensityVariant::StateDependent, DensityVariant::ConstantCoeff] {
        let d = build_density(&p, &a, variant, &GridSpec::default()).unwrap();
        assert!((d.simpson_mass() - 1.0).abs() < 1e-9);
        assert!(d.pdf_at_nodes().iter().all(|v| *v > 0.0));
        assert!(d.cdf().windows(2).all(|w| w[1] >= w[0]));
        assert!((d.cdf().last().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn wasserstein_dominates_every_lipschitz_scaled_error() {
    for (n, rho) in [(18, 0.88), (18, 0.96), (66, 0.9), (132, 0.94)] {
        let (p, a) = scenario(n, rho, 5.3);
        let pmf = solve_queue(&p, &a, &SolveOptions::default()).unwrap();
        for variant in [DensityVariant::StateDependent, DensityVariant::ConstantCoeff] {
            let d = build_density(&p, &a, variant, &GridSpec::default()).unwrap();
            let rep = distance_report(&pmf, &d, &p);
            for kind in MetricKind::LIPSCHITZ {
                let e = rep.scaled_error.get(kind);
                assert!(rep.wasserstein >= e - 1e-6, "N={n} {variant:?} {}: W={} < {e}", kind.name(), rep.wasserstein);
            }
        }
    }
}

#[test]
fn constant_coefficient_is_free_of_mu_at_fixed_n_and_r() {
    let base = |mu: f64| {
        let p = QueueParams::from_offered_load(18, 16.2, mu).unwrap();
        let a = ArrivalModel::poisson(p.arrival_rate()).unwrap();
        let d = build_density(&p, &a, DensityVariant::ConstantCoeff, &GridSpec::default()).unwrap();
        approx_metrics(&d, &p).queue_len
    };
    let first = base(0.5);
    for mu in [1.0 / 3.0, 0.25, 0.1] {
        assert!((base(mu) - first).abs() < 1e-9);
    }
}

#[test]
fn state_dependent_density_needs_overdispersed_arrivals() {
    // Bernoulli arrivals have c_A = 2 − p ≤ 1 only when p = 1; a point mass at 1 gives c_A = 1
    let p = QueueParams::new(3, 1.0, 0.5).unwrap();
    let a = ArrivalModel::general(vec![0.0, 1.0]).unwrap();
    assert!(build_density(&p, &a, DensityVariant::StateDependent, &GridSpec::default()).is_err());
    assert!(build_density(&p, &a, DensityVariant::ConstantCoeff, &GridSpec::default()).is_ok());
}

#[test]
fn density_csv_is_deterministic() {
    let (p, a) = scenario(18, 0.9, 5.3);
    let render = || {
        let d = build_density(&p, &a, DensityVariant::StateDependent, &GridSpec::default()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());
}
