use geoq::markov::{
    build_kernel, exact_metrics, solve_dense, solve_queue, solve_stationary, SolveOptions, TruncationPolicy,
};
use geoq::{ArrivalModel, MetricKind, QueueParams};

fn poisson(p: &QueueParams) -> ArrivalModel {
    ArrivalModel::poisson(p.arrival_rate()).unwrap()
}

/// Poisson pmf by the ratio recurrence, normalised after dropping mass
/// below 1e-22.
fn poisson_table(rate: f64) -> Vec<f64> {
    let mut p = vec![(-rate).exp()];
    let mut k = 0usize;
    loop {
        let next = p[k] * rate / (k + 1) as f64;
        k += 1;
        if k as f64 > rate && next < 1e-22 {
            break;
        }
        p.push(next);
    }
    let s: f64 = p.iter().sum();
    p.iter().map(|v| v / s).collect()
}

#[test]
fn single_server_bernoulli_matches_closed_form() {
    // N = 1 with Bernoulli(a) arrivals is a birth-death chain on the census:
    // up with prob a(1 − μ), down with prob μ(1 − a) from any busy state, up
    // with prob a from 0. Detailed balance gives π(1) = π(0)·a/(μ(1 − a)) and
    // π(n+1)/π(n) = a(1 − μ)/(μ(1 − a)) for n ≥ 1.
    let (arr, mu) = (0.5, 0.75);
    let p = QueueParams::new(1, arr, mu).unwrap();
    let a = ArrivalModel::general(vec![1.0 - arr, arr]).unwrap();
    let kernel = build_kernel(&p, &a, 80, TruncationPolicy::LumpTop).unwrap();
    let dense = solve_dense(&kernel).unwrap();
    let power = solve_stationary(&kernel, 1e-15, 1_000_000).unwrap();
    let ratio = arr * (1.0 - mu) / (mu * (1.0 - arr));
    let first = arr / (mu * (1.0 - arr));
    let pi0 = 1.0 / (1.0 + first / (1.0 - ratio));
    for (n, (x, y)) in dense.probs.iter().zip(&power.probs).enumerate().take(30) {
        let want = if n == 0 { pi0 } else { pi0 * first * ratio.powi(n as i32 - 1) };
        assert!((x - want).abs() < 1e-13, "state {n}: {x} vs {want}");
        assert!((y - want).abs() < 1e-12, "state {n}: {y} vs {want}");
    }
}

#[test]
fn truncation_doubling_moves_metrics_below_1e9() {
    for (n, rho) in [(18, 0.90), (18, 0.96), (66, 0.92), (132, 0.94)] {
        let p = QueueParams::from_utilization(n, rho, 1.0 / 5.3).unwrap();
        let a = poisson(&p);
        let base = solve_queue(&p, &a, &SolveOptions::default()).unwrap();
        let k = base.top_state();
        let doubled = solve_queue(&p, &a, &SolveOptions { truncation: Some(2 * k), ..SolveOptions::default() }).unwrap();
        let (m1, m2) = (exact_metrics(&base, &p), exact_metrics(&doubled, &p));
        for kind in MetricKind::ALL {
            let d = (m1.get(kind) - m2.get(kind)).abs();
            assert!(d < 1e-9, "N={n} rho={rho} {}: {d:e}", kind.name());
        }
    }
}

#[test]
fn truncation_policies_agree_once_the_tail_is_negligible() {
    let p = QueueParams::from_utilization(18, 0.92, 1.0 / 5.3).unwrap();
    let a = poisson(&p);
    let lump = solve_queue(&p, &a, &SolveOptions::default()).unwrap();
    let renorm = solve_queue(
        &p,
        &a,
        &SolveOptions { policy: TruncationPolicy::Renormalize, ..SolveOptions::default() },
    )
    .unwrap();
    let (x, y) = (exact_metrics(&lump, &p), exact_metrics(&renorm, &p));
    assert!((x.queue_len - y.queue_len).abs() < 1e-9);
}

#[test]
fn poisson_and_tabulated_poisson_agree() {
    for (n, rho) in [(18, 0.9), (66, 0.94)] {
        let p = QueueParams::from_utilization(n, rho, 1.0 / 5.3).unwrap();
        let table = poisson_table(p.arrival_rate());
        let general = ArrivalModel::general(table).unwrap();
        assert!((general.c_a() - 2.0).abs() < 1e-10);
        let p2 = QueueParams::new(n, general.mean(), p.service_prob()).unwrap();
        let x = exact_metrics(&solve_queue(&p, &poisson(&p), &SolveOptions::default()).unwrap(), &p);
        let y = exact_metrics(&solve_queue(&p2, &general, &SolveOptions::default()).unwrap(), &p2);
        for kind in MetricKind::ALL {
            assert!((x.get(kind) - y.get(kind)).abs() < 1e-10, "{}", kind.name());
        }
    }
}

#[test]
fn stationary_csv_is_byte_identical_across_runs() {
    let p = QueueParams::from_utilization(18, 0.9, 1.0 / 5.3).unwrap();
    let render = || {
        let pmf = solve_queue(&p, &poisson(&p), &SolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        buf
    };
    let first = render();
    assert_eq!(first, render());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("state,probability\n"));
}

#[test]
fn near_critical_load_is_rejected() {
    let mu = 0.2;
    let n = 10;
    assert!(QueueParams::new(n, n as f64 * mu * (1.0 - 1e-12), mu).is_err());
    assert!(QueueParams::new(n, n as f64 * mu, mu).is_err());
    assert!(QueueParams::new(n, n as f64 * mu * 0.999, mu).is_ok());
}
