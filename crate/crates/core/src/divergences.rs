//! Exact divergences on finite distributions, closed-form Rényi divergences
//! for the noise families, a quadrature Rényi oracle and W∞ on finite supports.
//!
//! Density ratios follow the `0/0 = 0` convention; `p/0` with `p > 0` is `+∞`.

use serde::{Deserialize, Serialize};

use crate::distributions::{align, check_dim, Coupling, DiscreteDist, NoiseFamily, DOMAIN_SCALES};
use crate::error::{
    invalid, require_finite_order, require_non_negative, require_order, Error, Result,
};
use crate::flow::FlowNetwork;
use crate::quadrature::{integrate, QuadOptions};

/// Minimum flow value (out of 1) that counts as a feasible transport plan.
pub const TRANSPORT_FEASIBILITY_MARGIN: f64 = 1e-12;

/// An `(α, ε)` Rényi-DP point. `alpha` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdpPoint {
    pub alpha: f64,
    pub epsilon: f64,
}

impl RdpPoint {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        require_order(alpha)?;
        require_non_negative("epsilon", epsilon)?;
        Ok(Self { alpha, epsilon })
    }
}

/// An `(ε, δ)` differential-privacy guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpGuarantee {
    pub epsilon: f64,
    pub delta: f64,
}

impl DpGuarantee {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        require_non_negative("epsilon", epsilon)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid("delta", format!("must lie in [0, 1], got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }
}

/// `min(p, e^eps q)` with the `eps = ∞`, `q = 0` corner cases made explicit.
#[inline]
pub(crate) fn scaled_min(p: f64, q: f64, exp_eps: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else {
        p.min(exp_eps * q)
    }
}

/// `[p - e^eps q]₊`, again safe at `q = 0` and `e^eps = ∞`.
#[inline]
pub(crate) fn hinge(p: f64, q: f64, exp_eps: f64) -> f64 {
    if q == 0.0 {
        p
    } else {
        (p - exp_eps * q).max(0.0)
    }
}

/// Hockey-stick divergence Σ[p − e^ε q]₊ on aligned probability vectors.
pub fn hockey_stick_probs(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let e = eps.exp();
    p.iter()
        .zip(q)
        .map(|(&a, &b)| hinge(a, b, e))
        .sum::<f64>()
        .min(1.0)
}

/// `1 − Σ min(p, e^ε q)` on aligned probability vectors.
pub fn hockey_stick_via_min_probs(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let e = eps.exp();
    let overlap: f64 = p.iter().zip(q).map(|(&a, &b)| scaled_min(a, b, e)).sum();
    (1.0 - overlap).clamp(0.0, 1.0)
}

pub fn tv_probs(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn hockey_stick(mu: &DiscreteDist, nu: &DiscreteDist, eps: f64) -> f64 {
    let (_, p, q) = align(mu, nu);
    hockey_stick_probs(&p, &q, eps)
}

pub fn hockey_stick_via_min(mu: &DiscreteDist, nu: &DiscreteDist, eps: f64) -> f64 {
    let (_, p, q) = align(mu, nu);
    hockey_stick_via_min_probs(&p, &q, eps)
}

pub fn total_variation(mu: &DiscreteDist, nu: &DiscreteDist) -> f64 {
    let (_, p, q) = align(mu, nu);
    tv_probs(&p, &q)
}

/// Rényi divergence of order `alpha` (possibly `+∞`) on aligned vectors.
pub fn renyi_probs(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    require_order(alpha)?;
    if p.iter().zip(q).any(|(&a, &b)| a > 0.0 && b == 0.0) {
        return Ok(f64::INFINITY);
    }
    let support = p.iter().zip(q).filter(|(a, _)| **a > 0.0);
    if alpha.is_infinite() {
        let max_log_ratio = support
            .map(|(a, b)| a.ln() - b.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(max_log_ratio.max(0.0));
    }
    let logs: Vec<f64> = support
        .map(|(a, b)| alpha * a.ln() + (1.0 - alpha) * b.ln())
        .collect();
    Ok((log_sum_exp(&logs) / (alpha - 1.0)).max(0.0))
}

pub fn renyi_discrete(mu: &DiscreteDist, nu: &DiscreteDist, alpha: f64) -> Result<f64> {
    let (_, p, q) = align(mu, nu);
    renyi_probs(&p, &q, alpha)
}

pub(crate) fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Rényi divergence between 𝒩(u, σ²I) and 𝒩(v, σ²I): α‖u−v‖²/(2σ²).
pub fn renyi_gaussian(u: &[f64], v: &[f64], sigma2: f64, alpha: f64) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    require_finite_order(alpha)?;
    crate::error::require_positive("sigma2", sigma2)?;
    let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(alpha * sq / (2.0 * sigma2))
}

/// `log g_α(z)` evaluated without overflow.
pub fn ln_renyi_laplace_g(z: f64, alpha: f64) -> f64 {
    let w = 2.0 * alpha - 1.0;
    let a = (alpha / w).ln() + z * (alpha - 1.0);
    let b = ((alpha - 1.0) / w).ln() - z * alpha;
    log_sum_exp(&[a, b])
}

/// g_α(z) = α/(2α−1)·e^{z(α−1)} + (α−1)/(2α−1)·e^{−zα}.
pub fn renyi_laplace_g(z: f64, alpha: f64) -> f64 {
    let w = 2.0 * alpha - 1.0;
    alpha / w * (z * (alpha - 1.0)).exp() + (alpha - 1.0) / w * (-z * alpha).exp()
}

/// Rényi divergence between two Laplace laws of equal scale whose locations
/// differ by `delta`: log g_α(Δ/λ)/(α−1), or Δ/λ at α = ∞.
pub fn renyi_laplace(delta: f64, scale: f64, alpha: f64) -> Result<f64> {
    require_order(alpha)?;
    crate::error::require_positive("scale", scale)?;
    let z = delta.abs() / scale;
    if alpha.is_infinite() {
        return Ok(z);
    }
    Ok((ln_renyi_laplace_g(z, alpha) / (alpha - 1.0)).max(0.0))
}

/// Integration interval with interior points where the integrand may kink.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub breakpoints: Vec<f64>,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            breakpoints: Vec::new(),
        }
    }

    /// Union of `location ± 40·scale` over the families, split at their kinks.
    /// For a Gaussian pair the exponentially tilted law p^α q^{1−α} is also
    /// covered, since its mass can sit outside both windows for large α.
    pub fn covering(p: &NoiseFamily, q: &NoiseFamily, alpha: f64) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut breakpoints = Vec::new();
        for fam in [p, q] {
            let (c, s) = (fam.location(), fam.scale());
            lo = lo.min(c - DOMAIN_SCALES * s);
            hi = hi.max(c + DOMAIN_SCALES * s);
            breakpoints.extend(fam.kinks());
        }
        if let (NoiseFamily::Gaussian(g), NoiseFamily::Gaussian(h)) = (p, q) {
            let precision = alpha / g.variance + (1.0 - alpha) / h.variance;
            if precision > 0.0 && alpha.is_finite() {
                let centre = (alpha * g.mean[0] / g.variance
                    + (1.0 - alpha) * h.mean[0] / h.variance)
                    / precision;
                let sd = precision.recip().sqrt();
                lo = lo.min(centre - DOMAIN_SCALES * sd);
                hi = hi.max(centre + DOMAIN_SCALES * sd);
            }
        }
        Self {
            lo,
            hi,
            breakpoints,
        }
    }
}

/// Grid size used to locate the peak of the log-integrand before integrating.
const PEAK_GRID: usize = 4096;

/// Quadrature estimate of R_α(P‖Q) = log ∫ p^α q^{1−α} / (α−1) from
/// log-densities. The integrand is shifted by its grid maximum and integrated
/// to relative accuracy `1e-8·min(1, α−1)`, which bounds the absolute error of
/// the returned divergence near `1e-8`.
pub fn renyi_numeric_1d<P, Q>(ln_p: P, ln_q: Q, alpha: f64, domain: &Domain) -> Result<f64>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-8 * (alpha - 1.0).min(1.0),
        ..QuadOptions::default()
    };
    renyi_numeric_1d_with(ln_p, ln_q, alpha, domain, &opts)
}

pub fn renyi_numeric_1d_with<P, Q>(
    ln_p: P,
    ln_q: Q,
    alpha: f64,
    domain: &Domain,
    opts: &QuadOptions,
) -> Result<f64>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    require_finite_order(alpha)?;
    let log_integrand = |x: f64| {
        let lp = ln_p(x);
        if lp == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let lq = ln_q(x);
        if lq == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        alpha * lp + (1.0 - alpha) * lq
    };
    let step = (domain.hi - domain.lo) / PEAK_GRID as f64;
    let shift = (0..=PEAK_GRID)
        .map(|k| domain.lo + k as f64 * step)
        .chain(domain.breakpoints.iter().copied())
        .map(&log_integrand)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if shift == f64::NEG_INFINITY {
        return Err(invalid("p", "density vanishes on the whole domain"));
    }
    let r = integrate(
        |x| (log_integrand(x) - shift).exp(),
        domain.lo,
        domain.hi,
        &domain.breakpoints,
        opts,
    )?;
    if r.value == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(((shift + r.value.ln()) / (alpha - 1.0)).max(0.0))
}

/// [`renyi_numeric_1d`] between two 1-D families on [`Domain::covering`].
pub fn renyi_numeric_families(p: &NoiseFamily, q: &NoiseFamily, alpha: f64) -> Result<f64> {
    for fam in [p, q] {
        check_dim(1, fam.dim())?;
    }
    let domain = Domain::covering(p, q, alpha);
    renyi_numeric_1d(
        |x| p.ln_density_1d(x).unwrap_or(f64::NEG_INFINITY),
        |x| q.ln_density_1d(x).unwrap_or(f64::NEG_INFINITY),
        alpha,
        &domain,
    )
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

struct TransportProblem<'a> {
    left: Vec<(usize, &'a [f64], f64)>,
    right: Vec<(usize, &'a [f64], f64)>,
}

impl<'a> TransportProblem<'a> {
    fn new(mu: &'a DiscreteDist, nu: &'a DiscreteDist) -> Result<Self> {
        let mc = mu.coordinates()?;
        let nc = nu.coordinates()?;
        let dim = mc[0].len();
        for c in mc.iter().chain(&nc) {
            check_dim(dim, c.len())?;
        }
        let keep = |coords: Vec<&'a [f64]>, probs: &[f64]| {
            coords
                .into_iter()
                .zip(probs.iter().copied())
                .enumerate()
                .filter(|(_, (_, p))| *p > 0.0)
                .map(|(i, (c, p))| (i, c, p))
                .collect::<Vec<_>>()
        };
        Ok(Self {
            left: keep(mc, mu.probs()),
            right: keep(nc, nu.probs()),
        })
    }

    /// Solves the threshold-`w` flow problem; returns the flow value and the
    /// flow on every admissible pair.
    fn solve(&self, w: f64) -> (f64, Vec<(usize, usize, f64)>) {
        let (n, m) = (self.left.len(), self.right.len());
        let (source, sink) = (n + m, n + m + 1);
        let mut net = FlowNetwork::new(n + m + 2);
        for (i, &(_, _, p)) in self.left.iter().enumerate() {
            net.add_edge(source, i, p);
        }
        for (j, &(_, _, q)) in self.right.iter().enumerate() {
            net.add_edge(n + j, sink, q);
        }
        let mut pairs = Vec::new();
        for (i, &(_, x, _)) in self.left.iter().enumerate() {
            for (j, &(_, y, _)) in self.right.iter().enumerate() {
                if euclidean(x, y) <= w {
                    pairs.push((i, j, net.add_edge(i, n + j, 1.0)));
                }
            }
        }
        let value = net.max_flow(source, sink);
        let flows = pairs
            .into_iter()
            .map(|(i, j, e)| (self.left[i].0, self.right[j].0, net.flow_on(e)))
            .collect();
        (value, flows)
    }

    fn candidate_thresholds(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self
            .left
            .iter()
            .flat_map(|(_, x, _)| self.right.iter().map(move |(_, y, _)| euclidean(x, y)))
            .collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }
}

/// W∞ between finite distributions with coordinates, plus an optimal coupling.
///
/// Binary search over the sorted pairwise distances; a threshold `w` is
/// feasible when the bipartite graph of pairs at distance `≤ w` carries a
/// flow of value 1 (up to [`TRANSPORT_FEASIBILITY_MARGIN`]).
pub fn w_inf_coupling(mu: &DiscreteDist, nu: &DiscreteDist) -> Result<(f64, Coupling)> {
    let problem = TransportProblem::new(mu, nu)?;
    let thresholds = problem.candidate_thresholds();
    let feasible = |w: f64| problem.solve(w).0 >= 1.0 - TRANSPORT_FEASIBILITY_MARGIN;
    // the largest distance always admits the product coupling
    let (mut lo, mut hi) = (0usize, thresholds.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let w = thresholds[lo];
    let (_, flows) = problem.solve(w);
    let mut mass = vec![vec![0.0; nu.len()]; mu.len()];
    for (i, j, f) in flows {
        mass[i][j] += f;
    }
    // rescale the sub-1e-12 flow deficit so the plan is a probability measure
    let total: f64 = mass.iter().flatten().sum();
    mass.iter_mut().flatten().for_each(|m| *m /= total);
    let coupling = Coupling::new(mu.points().to_vec(), nu.points().to_vec(), mass)?;
    Ok((w, coupling))
}

pub fn w_inf_discrete(mu: &DiscreteDist, nu: &DiscreteDist) -> Result<f64> {
    w_inf_coupling(mu, nu).map(|(w, _)| w)
}

/// Maximal displacement under a given coupling, an upper bound on W∞.
pub fn coupling_displacement(coupling: &Coupling) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, row) in coupling.mass().iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            if m > 0.0 {
                let x = coupling.left()[i]
                    .coords()
                    .ok_or(Error::MissingCoordinates(i))?;
                let y = coupling.right()[j]
                    .coords()
                    .ok_or(Error::MissingCoordinates(j))?;
                check_dim(x.len(), y.len())?;
                worst = worst.max(euclidean(x, y));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{GaussianDist, LaplaceDist};

    fn d(p: &[f64]) -> DiscreteDist {
        DiscreteDist::from_probs(p.to_vec()).unwrap()
    }

    #[test]
    fn hockey_stick_examples() {
        let (mu, nu) = (d(&[0.5, 0.5]), d(&[0.9, 0.1]));
        assert!((hockey_stick(&mu, &nu, 0.0) - 0.4).abs() < 1e-15);
        // [0.5 − 1.8]₊ + [0.5 − 0.2]₊
        assert!((hockey_stick(&mu, &nu, 2f64.ln()) - 0.3).abs() < 1e-15);
        assert_eq!(hockey_stick(&mu, &mu, 0.7), 0.0);
        assert!((hockey_stick_via_min(&mu, &nu, 0.0) - 0.4).abs() < 1e-15);
        assert_eq!(hockey_stick_via_min(&mu, &mu, 0.0), 0.0);
        let (a, b) = (d(&[1.0, 0.0]), d(&[0.0, 1.0]));
        for eps in [0.0, 3.0, f64::INFINITY] {
            assert_eq!(hockey_stick_via_min(&a, &b, eps), 1.0);
            assert_eq!(hockey_stick(&a, &b, eps), 1.0);
        }
    }

    #[test]
    fn hockey_stick_at_infinity_is_mass_outside_support() {
        let mu = d(&[0.2, 0.5, 0.3]);
        let nu = d(&[0.0, 0.6, 0.4]);
        assert!((hockey_stick(&mu, &nu, f64::INFINITY) - 0.2).abs() < 1e-15);
        assert!((hockey_stick(&mu, &nu, 800.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn renyi_discrete_examples() {
        let (mu, nu) = (d(&[0.5, 0.5]), d(&[0.9, 0.1]));
        let expected = (0.25f64 / 0.9 + 0.25 / 0.1).ln();
        assert!((renyi_discrete(&mu, &nu, 2.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.021_651_247_531_981_4).abs() < 1e-12);
        assert!(renyi_discrete(&mu, &mu, 3.0).unwrap() < 1e-15);
        let point = d(&[1.0, 0.0]);
        let unif = d(&[0.5, 0.5]);
        assert!((renyi_discrete(&point, &unif, f64::INFINITY).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(renyi_discrete(&unif, &point, 2.0).unwrap(), f64::INFINITY);
        assert!(renyi_discrete(&unif, &point, 1.0).is_err());
    }

    #[test]
    fn renyi_discrete_large_order_does_not_overflow() {
        let v = renyi_discrete(&d(&[0.999, 0.001]), &d(&[1e-6, 1.0 - 1e-6]), 500.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn gaussian_closed_form() {
        assert!((renyi_gaussian(&[1.0], &[0.0], 2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((renyi_gaussian(&[1.0], &[0.0], 1.0, 3.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(
            renyi_gaussian(&[0.3, 2.0], &[0.3, 2.0], 1.0, 3.0).unwrap(),
            0.0
        );
        assert!(renyi_gaussian(&[1.0], &[0.0, 1.0], 1.0, 2.0).is_err());
    }

    #[test]
    fn laplace_g() {
        assert!((renyi_laplace_g(0.0, 7.0) - 1.0).abs() < 1e-15);
        let e = std::f64::consts::E;
        let expected = 2.0 / 3.0 * e + (-2.0f64).exp() / 3.0;
        assert!((renyi_laplace_g(1.0, 2.0) - expected).abs() < 1e-15);
        // mpmath: 1.85729964671823...
        assert!((expected - 1.857_299_646_718_234).abs() < 1e-12);
        assert!(renyi_laplace_g(0.5, 2.0).powi(2) <= renyi_laplace_g(1.0, 2.0));
        assert!((ln_renyi_laplace_g(1.0, 2.0) - expected.ln()).abs() < 1e-15);
        assert!(ln_renyi_laplace_g(5.0, 1e4).is_finite());
        assert_eq!(renyi_laplace(2.0, 4.0, f64::INFINITY).unwrap(), 0.5);
    }

    #[test]
    fn numeric_renyi_examples() {
        let std = NoiseFamily::Gaussian(GaussianDist::new(vec![0.0], 1.0).unwrap());
        assert!(renyi_numeric_families(&std, &std, 2.0).unwrap().abs() < 1e-8);
        let shifted = NoiseFamily::Gaussian(GaussianDist::new(vec![1.0], 1.0).unwrap());
        assert!((renyi_numeric_families(&shifted, &std, 2.0).unwrap() - 1.0).abs() < 1e-6);
        let l1 = NoiseFamily::Laplace(LaplaceDist::new(1.0, 1.0).unwrap());
        let l0 = NoiseFamily::Laplace(LaplaceDist::new(0.0, 1.0).unwrap());
        let v = renyi_numeric_families(&l1, &l0, 2.0).unwrap();
        assert!((v - renyi_laplace_g(1.0, 2.0).ln()).abs() < 1e-6);
        // mpmath quadrature of p²/q: 0.6191236299985928...
        assert!((v - 0.619_123_629_998_593).abs() < 1e-6);
    }

    #[test]
    fn numeric_renyi_reports_infinite_and_bad_order() {
        let p = |x: f64| {
            if x.abs() < 1.0 {
                -(2f64.ln())
            } else {
                f64::NEG_INFINITY
            }
        };
        let q = |x: f64| {
            if (0.0..1.0).contains(&x) {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        };
        assert_eq!(
            renyi_numeric_1d(p, q, 2.0, &Domain::new(-2.0, 2.0)).unwrap(),
            f64::INFINITY
        );
        assert!(renyi_numeric_1d(p, p, f64::INFINITY, &Domain::new(-2.0, 2.0)).is_err());
    }

    #[test]
    fn w_inf_examples() {
        let x = DiscreteDist::point_mass(vec![0.0, 0.0].into());
        let y = DiscreteDist::point_mass(vec![3.0, 4.0].into());
        assert!((w_inf_discrete(&x, &y).unwrap() - 5.0).abs() < 1e-15);
        let mu = DiscreteDist::from_coords(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let nu = DiscreteDist::from_coords(vec![vec![0.5], vec![1.5]], vec![0.5, 0.5]).unwrap();
        let (w, pi) = w_inf_coupling(&mu, &nu).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        assert!((coupling_displacement(&pi).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(w_inf_discrete(&mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn w_inf_needs_coordinates() {
        let labels = d(&[0.5, 0.5]);
        assert!(matches!(
            w_inf_discrete(&labels, &labels),
            Err(Error::MissingCoordinates(0))
        ));
        let a = DiscreteDist::point_mass(vec![0.0].into());
        let b = DiscreteDist::point_mass(vec![0.0, 1.0].into());
        assert!(matches!(
            w_inf_discrete(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn guarantee_validation() {
        assert!(DpGuarantee::new(1.0, 1.5).is_err());
        assert!(DpGuarantee::new(-1.0, 0.5).is_err());
        assert!(RdpPoint::new(1.0, 0.1).is_err());
        assert!(RdpPoint::new(f64::INFINITY, 0.1).is_ok());
    }
}
