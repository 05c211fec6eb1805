use amplify_dp::distributions::{DiscreteDist, SupportPoint};
use amplify_dp::divergences::{
    coupling_displacement, hockey_stick, hockey_stick_via_min, renyi_discrete, renyi_gaussian,
    renyi_laplace, renyi_numeric_1d, total_variation, w_inf_coupling, w_inf_discrete, Domain,
};
use amplify_dp::iteration::{
    geometric_path, iterated_gaussian_bound, iterated_laplace_bound, lipschitz_kernel_bound,
    sgd_baseline_epsilon_at_index, sgd_epsilon_at_index, winf_contractive_bound, winf_path_bound,
    IterationChain, SgdConfig,
};
use amplify_dp::mixing::{
    amplify, dobrushin_coeff, doeblin_coeff, eps_dobrushin_coeff, mixture_decompose, pushforward,
    ultra_coeff, DiscreteKernel, MixingCondition,
};
use amplify_dp::DpGuarantee;
use proptest::prelude::*;

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

/// Probability vectors of length `n`, with some exact zeros.
fn probs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 1e-3..1.0f64], n)
        .prop_filter("non-zero mass", |w| w.iter().any(|x| *x > 0.0))
        .prop_map(normalize)
}

fn pair(max: usize) -> impl Strategy<Value = (DiscreteDist, DiscreteDist)> {
    (2..=max)
        .prop_flat_map(|n| (probs(n), probs(n)))
        .prop_map(|(p, q)| {
            (
                DiscreteDist::from_probs(p).unwrap(),
                DiscreteDist::from_probs(q).unwrap(),
            )
        })
}

fn kernel(n_in: usize, n_out: usize) -> impl Strategy<Value = DiscreteKernel> {
    prop::collection::vec(probs(n_out), n_in)
        .prop_map(|rows| DiscreteKernel::from_rows(rows).unwrap())
}

fn instance(max: usize) -> impl Strategy<Value = (DiscreteDist, DiscreteDist, DiscreteKernel)> {
    (2..=max, 2..=max)
        .prop_flat_map(|(n, m)| (probs(n), probs(n), kernel(n, m)))
        .prop_map(|(p, q, k)| {
            (
                DiscreteDist::from_probs(p).unwrap(),
                DiscreteDist::from_probs(q).unwrap(),
                k,
            )
        })
}

fn on_line(coords: Vec<f64>, p: Vec<f64>) -> DiscreteDist {
    DiscreteDist::new(
        coords
            .into_iter()
            .map(|x| SupportPoint::Coords(vec![x]))
            .collect(),
        p,
    )
    .unwrap()
}

/// Distinct integer grid positions keep the support points distinct.
fn line_dist() -> impl Strategy<Value = DiscreteDist> {
    (1usize..=6)
        .prop_flat_map(|n| {
            (
                prop::collection::btree_set(-20i32..20, n),
                prop::collection::vec(0.05..1.0f64, n),
            )
        })
        .prop_map(|(xs, w)| {
            let xs: Vec<f64> = xs.into_iter().map(|x| x as f64 * 0.5).collect();
            let w = normalize(w[..xs.len()].to_vec());
            on_line(xs, w)
        })
}

const EPS_GRID: [f64; 6] = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hockey_stick_monotone_and_matches_min_form((mu, nu) in pair(10)) {
        let mut prev = f64::INFINITY;
        for e in EPS_GRID {
            let h = hockey_stick(&mu, &nu, e);
            prop_assert!(h <= prev + 1e-15);
            prop_assert!((h - hockey_stick_via_min(&mu, &nu, e)).abs() <= 1e-12);
            prev = h;
        }
        // equal up to summation order
        prop_assert!((hockey_stick(&mu, &nu, 0.0) - total_variation(&mu, &nu)).abs() <= 1e-15);
    }

    #[test]
    fn data_processing((mu, nu, k) in instance(8)) {
        let (mk, nk) = (pushforward(&mu, &k).unwrap(), pushforward(&nu, &k).unwrap());
        for e in EPS_GRID {
            prop_assert!(hockey_stick(&mk, &nk, e) <= hockey_stick(&mu, &nu, e) + 1e-12);
        }
        for a in [1.5, 2.0, 10.0, f64::INFINITY] {
            let before = renyi_discrete(&mu, &nu, a).unwrap();
            let after = renyi_discrete(&mk, &nk, a).unwrap();
            prop_assert!(after <= before + 1e-9, "alpha {}: {} > {}", a, after, before);
        }
    }

    #[test]
    fn joint_convexity((m1, n1) in pair(6), (m2, n2) in pair(6), g in 0.0..=1.0f64) {
        let mu = m1.mix(&m2, g).unwrap();
        let nu = n1.mix(&n2, g).unwrap();
        for e in EPS_GRID {
            let lhs = hockey_stick(&mu, &nu, e);
            let rhs = g * hockey_stick(&m1, &n1, e) + (1.0 - g) * hockey_stick(&m2, &n2, e);
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn renyi_monotone_in_order((mu, nu) in pair(8)) {
        let mut prev = 0.0;
        for a in [1.01, 1.5, 2.0, 4.0, 16.0, f64::INFINITY] {
            let r = renyi_discrete(&mu, &nu, a).unwrap();
            prop_assert!(r >= prev - 1e-12);
            prev = r;
        }
    }

    #[test]
    fn w_inf_metric(a in line_dist(), b in line_dist(), c in line_dist()) {
        let ab = w_inf_discrete(&a, &b).unwrap();
        let ba = w_inf_discrete(&b, &a).unwrap();
        let bc = w_inf_discrete(&b, &c).unwrap();
        let ac = w_inf_discrete(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(w_inf_discrete(&a, &a).unwrap(), 0.0);
        let (w, pi) = w_inf_coupling(&a, &b).unwrap();
        prop_assert!(coupling_displacement(&pi).unwrap() <= w + 1e-12);
    }

    #[test]
    fn coefficient_ordering(k in (2usize..=8, 2usize..=8).prop_flat_map(|(n, m)| kernel(n, m))) {
        let dob = dobrushin_coeff(&k);
        let doe = doeblin_coeff(&k).gamma;
        let ultra = ultra_coeff(&k);
        for e in EPS_GRID {
            prop_assert!(eps_dobrushin_coeff(&k, e) <= dob + 1e-12);
        }
        prop_assert!(dob <= doe + 1e-12);
        prop_assert!(doe <= ultra + 1e-12);
    }

    #[test]
    fn doeblin_witness_is_optimal(
        k in (2usize..=8, 2usize..=8).prop_flat_map(|(n, m)| (kernel(n, m), probs(m))),
    ) {
        let (k, omega) = k;
        let mass = 1.0 - doeblin_coeff(&k).gamma;
        // the largest c with K(x) >= c·ω for every x
        let c = omega
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(y, w)| k.rows().iter().map(|row| row[y]).fold(f64::INFINITY, f64::min) / w)
            .fold(f64::INFINITY, f64::min);
        prop_assert!(c <= mass + 1e-12);
        if let Some(w) = doeblin_coeff(&k).omega {
            for (row, _) in k.rows().iter().zip(0..) {
                for (y, &kxy) in row.iter().enumerate() {
                    prop_assert!(kxy + 1e-12 >= mass * w.probs()[y]);
                }
            }
        }
    }

    #[test]
    fn theorem1_soundness((mu, nu, k) in instance(8), eps in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0])) {
        let delta = hockey_stick(&mu, &nu, eps).max(hockey_stick(&nu, &mu, eps));
        let g = DpGuarantee::new(eps, delta).unwrap();
        let (mk, nk) = (pushforward(&mu, &k).unwrap(), pushforward(&nu, &k).unwrap());
        let tilde = amplify_dp::mixing::eps_tilde(&g);
        for cond in [
            MixingCondition::Dobrushin(dobrushin_coeff(&k)),
            MixingCondition::EpsDobrushin(eps_dobrushin_coeff(&k, tilde)),
            MixingCondition::Doeblin(doeblin_coeff(&k).gamma),
            MixingCondition::Ultra(ultra_coeff(&k)),
        ] {
            let a = amplify(&g, cond).unwrap();
            let measured = hockey_stick(&mk, &nk, a.epsilon).max(hockey_stick(&nk, &mk, a.epsilon));
            prop_assert!(measured <= a.delta + 1e-12, "{:?}: {} > {}", cond, measured, a.delta);
        }
    }

    #[test]
    fn mixture_decomposition((mu, nu) in pair(10), eps in 0.0..3.0f64) {
        let dec = mixture_decompose(&mu, &nu, eps).unwrap();
        let (em, en) = dec.reconstruction_error(&mu, &nu);
        prop_assert!(em <= 1e-12 && en <= 1e-12);
        prop_assert_eq!(dec.residual_overlap(), 0.0);
        prop_assert_eq!(dec.theta, hockey_stick(&mu, &nu, eps));
    }

    #[test]
    fn rdp_bounds_increase_in_order(delta in 0.0..3.0f64, s1 in 0.1..3.0f64, s2 in 0.1..3.0f64, l in 0.1..2.0f64) {
        let mut prev = [0.0; 4];
        for a in [1.1, 1.5, 2.0, 5.0, 20.0] {
            let now = [
                iterated_gaussian_bound(delta, s1, s2, a).unwrap().epsilon,
                lipschitz_kernel_bound(delta, s1, s2, l, a).unwrap().epsilon,
                iterated_laplace_bound(delta, s1, s2, a).unwrap().epsilon,
                renyi_laplace(delta, s1, a).unwrap(),
            ];
            for (n, p) in now.iter().zip(&prev) {
                prop_assert!(*n >= 0.0 && *n >= p - 1e-12);
            }
            prev = now;
        }
    }
}

#[test]
fn gaussian_closed_form_matches_quadrature() {
    for delta in [0.1, 1.0, 3.0] {
        for sigma2 in [0.25f64, 1.0, 4.0] {
            for alpha in [1.5, 2.0, 8.0] {
                let sd = sigma2.sqrt();
                let norm = 0.5 * (2.0 * std::f64::consts::PI * sigma2).ln();
                let lp = |x: f64| -0.5 * x * x / sigma2 - norm;
                let lq = |x: f64| -0.5 * (x - delta) * (x - delta) / sigma2 - norm;
                let dom = Domain::new(-40.0 * sd - delta * alpha, 40.0 * sd + delta * alpha);
                let num = renyi_numeric_1d(lp, lq, alpha, &dom).unwrap();
                let closed = renyi_gaussian(&[0.0], &[delta], sigma2, alpha).unwrap();
                assert!(
                    (num - closed).abs() <= 1e-6,
                    "{delta} {sigma2} {alpha}: {num} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn contractive_bound_dominates_geometric_path() {
    for k in 1..=9 {
        let l = k as f64 / 10.0;
        for r in [1, 2, 5, 20] {
            let chain = IterationChain::uniform(r, l, 1.3, 2.0).unwrap();
            let path = winf_path_bound(&chain, &geometric_path(r, l, 2.0), 3.0)
                .unwrap()
                .epsilon;
            let contractive = winf_contractive_bound(&chain, 3.0).unwrap().epsilon;
            assert!(
                path <= contractive * (1.0 + 1e-12),
                "L={l} r={r}: {path} > {contractive}"
            );
        }
    }
}

#[test]
fn laplace_bound_monotone_in_second_scale() {
    let mut prev = f64::INFINITY;
    for l2 in [1e-6, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let v = iterated_laplace_bound(1.0, 1.0, l2, 3.0).unwrap().epsilon;
        assert!(v <= prev + 1e-12);
        prev = v;
    }
    let tiny = iterated_laplace_bound(1.0, 1.0, 1e-9, 3.0).unwrap().epsilon;
    assert!((tiny - renyi_laplace(1.0, 1.0, 3.0).unwrap()).abs() < 1e-6);
}

#[test]
fn sgd_strong_convexity_ratio() {
    for (beta, rho, eta) in [
        (3.0, 1.0, 0.5),
        (10.0, 0.5, 0.1),
        (2.0, 2.0, 0.25),
        (4.0, 0.1, 0.3),
    ] {
        let cfg = SgdConfig {
            n: 12,
            lipschitz: 1.7,
            beta,
            rho,
            eta,
            sigma: 0.8,
            d: 1,
            radius: 1.0,
        };
        let l = cfg.contraction().unwrap();
        for i in 1..12 {
            let ratio = sgd_epsilon_at_index(&cfg, i).unwrap()
                / sgd_baseline_epsilon_at_index(&cfg, i).unwrap();
            let expected = l.powi((12 - i + 1) as i32);
            assert!(
                (ratio - expected).abs() <= 1e-12 * expected.max(1e-300),
                "{ratio} vs {expected}"
            );
        }
    }
}
