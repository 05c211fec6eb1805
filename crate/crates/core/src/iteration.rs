//! Amplification by iteration: coupling bounds for two-stage noisy
//! mechanisms, W∞ path bounds for chains of noisy Lipschitz maps, and the
//! per-index Rényi accountant for noisy projected SGD on strongly convex
//! losses, with a reference simulator.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::seeded_rng;
use crate::divergences::{ln_renyi_laplace_g, renyi_laplace, DpGuarantee, RdpPoint};
use crate::error::{
    invalid, require_finite_order, require_non_negative, require_order, require_positive, Error,
    Result,
};

/// Grid resolution for the Laplace interpolation point.
const LAPLACE_GRID: usize = 10_000;
/// Golden-section stopping width.
const LAPLACE_REFINE_TOL: f64 = 1e-10;

/// Two Gaussian stages with standard deviations σ₁ then σ₂:
/// `R_α ≤ αΔ²/(2(σ₁² + σ₂²))`, tight for this pair.
pub fn iterated_gaussian_bound(
    delta: f64,
    sigma1: f64,
    sigma2: f64,
    alpha: f64,
) -> Result<RdpPoint> {
    require_positive("sigma1", sigma1)?;
    require_non_negative("sigma2", sigma2)?;
    require_order(alpha)?;
    RdpPoint::new(
        alpha,
        alpha * delta * delta / (2.0 * (sigma1 * sigma1 + sigma2 * sigma2)),
    )
}

/// Weight θ of the optimal intermediate point `w = θu + (1−θ)v` for the
/// Gaussian coupling: `θ = (1 + σ₂²/σ₁²)^{-1}`.
pub fn gaussian_shift_weight(sigma1: f64, sigma2: f64) -> f64 {
    1.0 / (1.0 + (sigma2 * sigma2) / (sigma1 * sigma1))
}

/// Gaussian output perturbation followed by an `L`-Lipschitz map with
/// Gaussian noise σ₂: effective variance `σ₁² + σ₂²/L²`.
pub fn lipschitz_kernel_bound(
    delta: f64,
    sigma1: f64,
    sigma2: f64,
    lipschitz: f64,
    alpha: f64,
) -> Result<RdpPoint> {
    require_positive("sigma1", sigma1)?;
    require_non_negative("sigma2", sigma2)?;
    require_positive("lipschitz", lipschitz)?;
    require_order(alpha)?;
    let effective = sigma1 * sigma1 + (sigma2 / lipschitz).powi(2);
    RdpPoint::new(alpha, alpha * delta * delta / (2.0 * effective))
}

/// Optimized two-stage Laplace bound and the split that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceSplit {
    pub bound: RdpPoint,
    /// `|w − v|`, the part of the shift charged to the first stage.
    pub first_stage_shift: f64,
}

/// Laplace(λ₁) output perturbation followed by Laplace(λ₂) noise.
///
/// Minimizes `(log g_α(a/λ₁) + log g_α((Δ−a)/λ₂))/(α−1)` over the split
/// `a ∈ [0, Δ]` on a uniform grid, then refines around the best grid point
/// by golden-section search.
pub fn iterated_laplace_split(
    delta: f64,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
) -> Result<LaplaceSplit> {
    require_positive("lambda1", lambda1)?;
    require_positive("lambda2", lambda2)?;
    require_non_negative("delta", delta)?;
    require_order(alpha)?;
    if delta == 0.0 {
        return Ok(LaplaceSplit {
            bound: RdpPoint::new(alpha, 0.0)?,
            first_stage_shift: 0.0,
        });
    }
    if alpha.is_infinite() {
        // a/λ₁ + (Δ−a)/λ₂ is linear, so an endpoint wins
        let (eps, a) = if lambda1 >= lambda2 {
            (delta / lambda1, delta)
        } else {
            (delta / lambda2, 0.0)
        };
        return Ok(LaplaceSplit {
            bound: RdpPoint::new(alpha, eps)?,
            first_stage_shift: a,
        });
    }
    let objective = |a: f64| {
        (ln_renyi_laplace_g(a / lambda1, alpha) + ln_renyi_laplace_g((delta - a) / lambda2, alpha))
            / (alpha - 1.0)
    };
    let step = delta / LAPLACE_GRID as f64;
    let (best_k, best) = (0..=LAPLACE_GRID)
        .map(|k| {
            (
                k,
                objective(if k == LAPLACE_GRID {
                    delta
                } else {
                    k as f64 * step
                }),
            )
        })
        .fold(
            (0, f64::INFINITY),
            |acc, (k, v)| if v < acc.1 { (k, v) } else { acc },
        );
    let lo = best_k.saturating_sub(1) as f64 * step;
    let hi = ((best_k + 1).min(LAPLACE_GRID) as f64 * step).min(delta);
    let (a_ref, v_ref) = golden_section(objective, lo, hi, LAPLACE_REFINE_TOL);
    let (a, v) = if v_ref < best {
        (a_ref, v_ref)
    } else {
        (best_k as f64 * step, best)
    };
    Ok(LaplaceSplit {
        bound: RdpPoint::new(alpha, v.max(0.0))?,
        first_stage_shift: a.min(delta),
    })
}

pub fn iterated_laplace_bound(
    delta: f64,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
) -> Result<RdpPoint> {
    iterated_laplace_split(delta, lambda1, lambda2, alpha).map(|s| s.bound)
}

/// Best single-stage Laplace Rényi value, `min` over charging the whole
/// shift to either stage.
pub fn best_single_stage_laplace(
    delta: f64,
    lambda1: f64,
    lambda2: f64,
    alpha: f64,
) -> Result<f64> {
    Ok(renyi_laplace(delta, lambda1, alpha)?.min(renyi_laplace(delta, lambda2, alpha)?))
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Exact pure-DP level of Lap2(λ₁, λ₂) noise: `Δ / max(λ₁, λ₂)`.
pub fn pure_dp_iterated_laplace(delta: f64, lambda1: f64, lambda2: f64) -> Result<DpGuarantee> {
    require_positive("lambda1", lambda1)?;
    require_positive("lambda2", lambda2)?;
    require_non_negative("delta", delta)?;
    DpGuarantee::new(delta / lambda1.max(lambda2), 0.0)
}

/// A chain of `r` noisy Lipschitz steps `K_i(x) = 𝒩(ψ_i(x), σ²I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationChain {
    pub r: usize,
    /// Lipschitz constant of each step, length `r`.
    pub lipschitz: Vec<f64>,
    pub sigma: f64,
    /// `W∞(μ, ν)` of the two starting distributions.
    pub delta0: f64,
}

impl IterationChain {
    pub fn new(lipschitz: Vec<f64>, sigma: f64, delta0: f64) -> Result<Self> {
        let chain = Self {
            r: lipschitz.len(),
            lipschitz,
            sigma,
            delta0,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn uniform(r: usize, lipschitz: f64, sigma: f64, delta0: f64) -> Result<Self> {
        Self::new(vec![lipschitz; r], sigma, delta0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(invalid("r", "need at least one step"));
        }
        if self.lipschitz.len() != self.r {
            return Err(Error::DimensionMismatch {
                expected: self.r,
                got: self.lipschitz.len(),
            });
        }
        for &l in &self.lipschitz {
            require_positive("lipschitz", l)?;
        }
        require_positive("sigma", self.sigma)?;
        require_non_negative("delta0", self.delta0)
    }

    /// The common Lipschitz constant, if all steps share one.
    pub fn uniform_lipschitz(&self) -> Option<f64> {
        let first = self.lipschitz[0];
        self.lipschitz.iter().all(|&l| l == first).then_some(first)
    }

    /// Weight of step `i` (0-based): product of `L_j²` over steps `j ≥ i`.
    fn step_weights(&self) -> Vec<f64> {
        let mut weights = vec![0.0; self.r];
        let mut acc = 1.0;
        for i in (0..self.r).rev() {
            acc *= self.lipschitz[i] * self.lipschitz[i];
            weights[i] = acc;
        }
        weights
    }
}

/// Path bound `α/(2σ²) Σ_i (Π_{j≥i} L_j²) W∞(μ_i, μ_{i−1})²`. With a common
/// `L` the weights are `L²·L^{2(r−i)}`.
pub fn winf_path_bound(chain: &IterationChain, increments: &[f64], alpha: f64) -> Result<RdpPoint> {
    chain.validate()?;
    require_order(alpha)?;
    if increments.len() != chain.r {
        return Err(Error::DimensionMismatch {
            expected: chain.r,
            got: increments.len(),
        });
    }
    for &w in increments {
        require_non_negative("increment", w)?;
    }
    let total: f64 = chain
        .step_weights()
        .iter()
        .zip(increments)
        .map(|(w, d)| w * d * d)
        .sum();
    RdpPoint::new(alpha, alpha * total / (2.0 * chain.sigma * chain.sigma))
}

/// Increments `Δ_i = Δ₀ L^i` summing to `delta` (uniform `Δ/r` at `L = 1`).
pub fn geometric_path(r: usize, lipschitz: f64, delta: f64) -> Vec<f64> {
    if lipschitz == 1.0 {
        return vec![delta / r as f64; r];
    }
    let l = lipschitz;
    let delta0 = delta / l * (1.0 - l) / (1.0 - l.powi(r as i32));
    (1..=r).map(|i| delta0 * l.powi(i as i32)).collect()
}

/// `αΔ²L^{r+1}/(2rσ²)` for a chain with common `L ≤ 1`, where `Δ` is the
/// chain's `delta0`.
pub fn winf_contractive_bound(chain: &IterationChain, alpha: f64) -> Result<RdpPoint> {
    chain.validate()?;
    require_order(alpha)?;
    let l = chain.uniform_lipschitz().ok_or_else(|| {
        invalid(
            "lipschitz",
            "contractive bound needs a common Lipschitz constant",
        )
    })?;
    if l > 1.0 {
        return Err(invalid(
            "lipschitz",
            format!("contractive bound needs L <= 1, got {l}"),
        ));
    }
    let r = chain.r as f64;
    let eps = alpha * chain.delta0.powi(2) * l.powf(r + 1.0) / (2.0 * r * chain.sigma.powi(2));
    RdpPoint::new(alpha, eps)
}

/// Lipschitz constant of `x ↦ x − η∇f(x)` for β-smooth, ρ-strongly convex
/// `f`: `√(1 − 2ηβρ/(β+ρ))`, valid for `η ≤ 2/(β+ρ)`.
pub fn contraction_coeff(beta: f64, rho: f64, eta: f64) -> Result<f64> {
    require_positive("rho", rho)?;
    if rho > beta {
        return Err(invalid(
            "rho",
            format!("strong convexity {rho} exceeds smoothness {beta}"),
        ));
    }
    require_positive("eta", eta)?;
    let max_eta = 2.0 / (beta + rho);
    if eta > max_eta {
        return Err(invalid(
            "eta",
            format!("must be <= 2/(beta+rho) = {max_eta}, got {eta}"),
        ));
    }
    Ok(contraction_sq(beta, rho, eta).sqrt())
}

fn contraction_sq(beta: f64, rho: f64, eta: f64) -> f64 {
    (1.0 - 2.0 * eta * beta * rho / (beta + rho)).max(0.0)
}

/// Noisy projected SGD hyper-parameters and loss constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdConfig {
    /// Dataset size; one record per step.
    pub n: usize,
    /// Lipschitz constant `C` of the loss.
    #[serde(rename = "C", alias = "c")]
    pub lipschitz: f64,
    pub beta: f64,
    pub rho: f64,
    pub eta: f64,
    pub sigma: f64,
    #[serde(default = "default_dim")]
    pub d: usize,
    /// Radius of the ball the iterates are projected onto.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_dim() -> usize {
    1
}

fn default_radius() -> f64 {
    1.0
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "dataset must be non-empty"));
        }
        if self.d == 0 {
            return Err(invalid("d", "dimension must be >= 1"));
        }
        require_positive("C", self.lipschitz)?;
        require_positive("sigma", self.sigma)?;
        require_positive("radius", self.radius)?;
        contraction_coeff(self.beta, self.rho, self.eta).map(|_| ())
    }

    /// Contraction factor of one gradient step.
    pub fn contraction(&self) -> Result<f64> {
        contraction_coeff(self.beta, self.rho, self.eta)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if (1..=self.n).contains(&i) {
            Ok(())
        } else {
            Err(invalid(
                "i",
                format!("index must lie in [1, {}], got {i}", self.n),
            ))
        }
    }
}

/// Per-unit-order privacy loss `ε_i` at index `i` (1-based):
/// `2C²/σ²` at `i = n`, otherwise `2C²/((n−i)σ²)·(1 − 2ηβρ/(β+ρ))^{(n−i+1)/2}`.
pub fn sgd_epsilon_at_index(cfg: &SgdConfig, i: usize) -> Result<f64> {
    cfg.validate()?;
    cfg.check_index(i)?;
    let base = 2.0 * cfg.lipschitz.powi(2) / cfg.sigma.powi(2);
    if i == cfg.n {
        return Ok(base);
    }
    let remaining = (cfg.n - i) as f64;
    let decay = contraction_sq(cfg.beta, cfg.rho, cfg.eta).powf((remaining + 1.0) / 2.0);
    Ok(base / remaining * decay)
}

/// The convex-only (`ρ → 0`) rate `2C²/((n−i)σ²)`, or `2C²/σ²` at `i = n`.
pub fn sgd_baseline_epsilon_at_index(cfg: &SgdConfig, i: usize) -> Result<f64> {
    cfg.validate()?;
    cfg.check_index(i)?;
    let base = 2.0 * cfg.lipschitz.powi(2) / cfg.sigma.powi(2);
    Ok(if i == cfg.n {
        base
    } else {
        base / (cfg.n - i) as f64
    })
}

/// `(α, α·ε_i)`-RDP at index `i`.
pub fn sgd_rdp_at_index(cfg: &SgdConfig, i: usize, alpha: f64) -> Result<RdpPoint> {
    require_finite_order(alpha)?;
    RdpPoint::new(alpha, alpha * sgd_epsilon_at_index(cfg, i)?)
}

/// Separable quadratic loss `ℓ(x, z) = ½ Σ_k a_k (x_k − z_k)²`.
///
/// On a ball of radius `R` containing the records it is `max a_k`-smooth,
/// `min a_k`-strongly convex and `2R·max a_k`-Lipschitz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticLoss {
    pub curvatures: Vec<f64>,
}

impl QuadraticLoss {
    pub fn isotropic(curvature: f64, d: usize) -> Self {
        Self {
            curvatures: vec![curvature; d],
        }
    }

    pub fn smoothness(&self) -> f64 {
        self.curvatures.iter().copied().fold(0.0, f64::max)
    }

    pub fn strong_convexity(&self) -> f64 {
        self.curvatures
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lipschitz_on_ball(&self, radius: f64) -> f64 {
        2.0 * radius * self.smoothness()
    }

    pub fn gradient(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        self.curvatures
            .iter()
            .zip(x.iter().zip(z))
            .map(|(a, (xi, zi))| a * (xi - zi))
            .collect()
    }
}

/// Euclidean projection onto the centred ball of radius `radius`.
pub fn project_ball(x: &mut [f64], radius: f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > radius {
        let s = radius / norm;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// One step `Π_K(x − η(∇ℓ(x, z) + noise))`.
pub fn noisy_step(
    x: &[f64],
    record: &[f64],
    loss: &QuadraticLoss,
    eta: f64,
    noise: &[f64],
    radius: f64,
) -> Vec<f64> {
    let grad = loss.gradient(x, record);
    let mut next: Vec<f64> = x
        .iter()
        .zip(grad.iter().zip(noise))
        .map(|(xi, (g, z))| xi - eta * (g + z))
        .collect();
    project_ball(&mut next, radius);
    next
}

/// Iterates `x_0, …, x_n` of one simulator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub iterates: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_iterate(&self) -> &[f64] {
        self.iterates.last().expect("trajectory holds x_0")
    }

    /// CSV with header `step,x0,x1,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let d = self.iterates[0].len();
        let mut header = vec!["step".to_string()];
        header.extend((0..d).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for (step, x) in self.iterates.iter().enumerate() {
            let mut row = vec![step.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_loss(cfg: &SgdConfig, loss: &QuadraticLoss) -> Result<()> {
    if loss.curvatures.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: loss.curvatures.len(),
        });
    }
    for &a in &loss.curvatures {
        require_positive("curvature", a)?;
    }
    if loss.smoothness() > cfg.beta {
        return Err(invalid(
            "beta",
            format!(
                "loss is {}-smooth, config claims {}",
                loss.smoothness(),
                cfg.beta
            ),
        ));
    }
    if loss.strong_convexity() < cfg.rho {
        return Err(invalid(
            "rho",
            format!(
                "loss is only {}-strongly convex, config claims {}",
                loss.strong_convexity(),
                cfg.rho
            ),
        ));
    }
    let c = loss.lipschitz_on_ball(cfg.radius);
    if c > cfg.lipschitz {
        return Err(invalid(
            "C",
            format!(
                "loss is {c}-Lipschitz on the ball, config claims {}",
                cfg.lipschitz
            ),
        ));
    }
    Ok(())
}

fn check_in_ball(name: &'static str, x: &[f64], cfg: &SgdConfig) -> Result<()> {
    if x.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: x.len(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > cfg.radius * (1.0 + 1e-12) {
        return Err(invalid(
            name,
            format!("norm {norm} exceeds radius {}", cfg.radius),
        ));
    }
    Ok(())
}

/// Runs one pass of noisy projected SGD from `x0`, one record per step,
/// with `𝒩(0, σ²I)` gradient noise drawn from `seed`.
pub fn noisy_proj_sgd(
    dataset: &[Vec<f64>],
    loss: &QuadraticLoss,
    cfg: &SgdConfig,
    x0: &[f64],
    seed: u64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_loss(cfg, loss)?;
    if dataset.len() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            got: dataset.len(),
        });
    }
    check_in_ball("x0", x0, cfg)?;
    for z in dataset {
        check_in_ball("record", z, cfg)?;
    }
    let mut rng = seeded_rng(seed);
    let mut iterates = Vec::with_capacity(cfg.n + 1);
    iterates.push(x0.to_vec());
    for z in dataset {
        let noise: Vec<f64> = (0..cfg.d)
            .map(|_| cfg.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let next = noisy_step(
            iterates.last().expect("non-empty"),
            z,
            loss,
            cfg.eta,
            &noise,
            cfg.radius,
        );
        iterates.push(next);
    }
    Ok(Trajectory { iterates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::renyi_laplace_g;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_two_stage() {
        assert!(close(
            iterated_gaussian_bound(1.0, 1.0, 1.0, 2.0).unwrap().epsilon,
            0.5,
            1e-15
        ));
        assert!(close(
            iterated_gaussian_bound(1.0, 2.0, 0.0, 3.0).unwrap().epsilon,
            3.0 / 8.0,
            1e-15
        ));
        assert_eq!(
            iterated_gaussian_bound(0.0, 1.0, 1.0, 2.0).unwrap().epsilon,
            0.0
        );
        assert!(close(gaussian_shift_weight(1.0, 1.0), 0.5, 1e-15));
    }

    #[test]
    fn lipschitz_kernel() {
        for (d, s1, s2, a) in [(1.0, 1.0, 1.0, 2.0), (0.3, 0.7, 2.0, 5.0)] {
            assert_eq!(
                lipschitz_kernel_bound(d, s1, s2, 1.0, a).unwrap(),
                iterated_gaussian_bound(d, s1, s2, a).unwrap()
            );
        }
        assert!(close(
            lipschitz_kernel_bound(1.0, 1.0, 1.0, 0.5, 2.0)
                .unwrap()
                .epsilon,
            0.2,
            1e-15
        ));
        let far = lipschitz_kernel_bound(1.0, 1.0, 1.0, 1e8, 2.0)
            .unwrap()
            .epsilon;
        assert!(close(far, 1.0, 1e-12));
    }

    #[test]
    fn laplace_two_stage_equal_scales() {
        let single = renyi_laplace_g(1.0, 2.0).ln();
        let split = iterated_laplace_split(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(split.bound.epsilon < single - 1e-3);
        // symmetric objective, so the optimum splits the shift in half
        assert!(close(split.first_stage_shift, 0.5, 1e-8));
        assert!(close(
            split.bound.epsilon,
            2.0 * renyi_laplace_g(0.5, 2.0).ln(),
            1e-12
        ));
        assert_eq!(
            iterated_laplace_bound(0.0, 1.0, 1.0, 2.0).unwrap().epsilon,
            0.0
        );
    }

    #[test]
    fn laplace_two_stage_large_order() {
        for (l1, l2) in [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)] {
            let target = 1.0 / f64::max(l1, l2);
            let v = iterated_laplace_bound(1.0, l1, l2, 1e3).unwrap().epsilon;
            assert!((v - target).abs() <= 0.05 * target, "{l1} {l2}: {v}");
            assert!(close(
                iterated_laplace_bound(1.0, l1, l2, f64::INFINITY)
                    .unwrap()
                    .epsilon,
                target,
                1e-15
            ));
        }
    }

    #[test]
    fn laplace_never_worse_than_single_stage() {
        for (l1, l2, a) in [(1.0, 2.0, 2.0), (3.0, 0.5, 4.0), (1.0, 1.0, 1.5)] {
            let two = iterated_laplace_bound(1.3, l1, l2, a).unwrap().epsilon;
            assert!(two <= best_single_stage_laplace(1.3, l1, l2, a).unwrap() + 1e-15);
        }
    }

    #[test]
    fn pure_dp_level() {
        assert_eq!(
            pure_dp_iterated_laplace(1.0, 2.0, 1.0).unwrap().epsilon,
            0.5
        );
        assert_eq!(
            pure_dp_iterated_laplace(0.0, 2.0, 1.0).unwrap().epsilon,
            0.0
        );
        assert_eq!(
            pure_dp_iterated_laplace(1.0, 1.0, 1.0).unwrap(),
            DpGuarantee {
                epsilon: 1.0,
                delta: 0.0
            }
        );
    }

    #[test]
    fn path_bound_examples() {
        let one = IterationChain::uniform(1, 1.0, 2.0, 1.0).unwrap();
        assert!(close(
            winf_path_bound(&one, &[1.5], 3.0).unwrap().epsilon,
            3.0 * 2.25 / 8.0,
            1e-15
        ));
        let two = IterationChain::uniform(2, 1.0, 1.0, 1.0).unwrap();
        assert!(close(
            winf_path_bound(&two, &[0.5, 0.5], 2.0).unwrap().epsilon,
            0.5,
            1e-15
        ));
        assert_eq!(
            winf_path_bound(&two, &[0.0, 0.0], 2.0).unwrap().epsilon,
            0.0
        );
        assert!(winf_path_bound(&two, &[1.0], 2.0).is_err());
        assert!(winf_path_bound(&two, &[-1.0, 2.0], 2.0).is_err());
    }

    #[test]
    fn path_bound_uniform_matches_closed_sum() {
        let (r, l, sigma, alpha) = (5, 0.8, 1.3, 2.5);
        let chain = IterationChain::uniform(r, l, sigma, 1.0).unwrap();
        let inc = [0.1, 0.4, 0.2, 0.3, 0.05];
        let expected = alpha * l * l / (2.0 * sigma * sigma)
            * (1..=r)
                .map(|i| l.powi(2 * (r - i) as i32) * inc[i - 1] * inc[i - 1])
                .sum::<f64>();
        assert!(close(
            winf_path_bound(&chain, &inc, alpha).unwrap().epsilon,
            expected,
            1e-15
        ));
    }

    #[test]
    fn heterogeneous_path_weights() {
        let chain = IterationChain::new(vec![2.0, 0.5, 0.9], 1.0, 1.0).unwrap();
        let inc = [1.0, 1.0, 1.0];
        let w = [4.0 * 0.25 * 0.81, 0.25 * 0.81, 0.81];
        let expected = 2.0 / 2.0 * w.iter().sum::<f64>();
        assert!(close(
            winf_path_bound(&chain, &inc, 2.0).unwrap().epsilon,
            expected,
            1e-15
        ));
    }

    #[test]
    fn contractive_examples() {
        let c = IterationChain::uniform(10, 1.0, 1.0, 1.0).unwrap();
        assert!(close(
            winf_contractive_bound(&c, 2.0).unwrap().epsilon,
            0.1,
            1e-15
        ));
        let c = IterationChain::uniform(10, 0.5, 1.0, 1.0).unwrap();
        assert!(close(
            winf_contractive_bound(&c, 2.0).unwrap().epsilon,
            2.0 * 0.5f64.powi(11) / 20.0,
            1e-18
        ));
        let c = IterationChain::uniform(1, 1.0, 2.0, 3.0).unwrap();
        assert!(close(
            winf_contractive_bound(&c, 2.0).unwrap().epsilon,
            2.0 * 9.0 / 8.0,
            1e-15
        ));
        let expanding = IterationChain::uniform(3, 1.1, 1.0, 1.0).unwrap();
        assert!(winf_contractive_bound(&expanding, 2.0).is_err());
        let mixed = IterationChain::new(vec![0.5, 0.6], 1.0, 1.0).unwrap();
        assert!(winf_contractive_bound(&mixed, 2.0).is_err());
    }

    #[test]
    fn geometric_path_sums_to_delta() {
        for l in [0.1, 0.5, 0.9, 1.0] {
            let p = geometric_path(7, l, 2.0);
            assert!(close(p.iter().sum::<f64>(), 2.0, 1e-14));
        }
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(contraction_coeff(1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(close(contraction_coeff(3.0, 1.0, 0.5).unwrap(), 0.5, 1e-15));
        assert!(contraction_coeff(3.0, 1.0, 1e-9).unwrap() > 1.0 - 1e-8);
        assert!(contraction_coeff(3.0, 1.0, 0.6).is_err());
        assert!(contraction_coeff(1.0, 3.0, 0.1).is_err());
    }

    fn cfg() -> SgdConfig {
        SgdConfig {
            n: 10,
            lipschitz: 1.0,
            beta: 3.0,
            rho: 1.0,
            eta: 0.5,
            sigma: 1.0,
            d: 1,
            radius: 1.0,
        }
    }

    #[test]
    fn sgd_accountant_examples() {
        assert!(close(
            sgd_rdp_at_index(&cfg(), 10, 1.5).unwrap().epsilon,
            3.0,
            1e-15
        ));
        assert!(close(sgd_epsilon_at_index(&cfg(), 9).unwrap(), 0.5, 1e-15));
        assert!(close(
            sgd_rdp_at_index(&cfg(), 9, 2.0).unwrap().epsilon,
            1.0,
            1e-15
        ));
        let weak = SgdConfig {
            rho: 1e-12,
            ..cfg()
        };
        for i in 1..10 {
            let v = sgd_epsilon_at_index(&weak, i).unwrap();
            assert!(close(
                v,
                sgd_baseline_epsilon_at_index(&weak, i).unwrap(),
                1e-9
            ));
        }
        assert!(sgd_epsilon_at_index(&cfg(), 0).is_err());
        assert!(sgd_epsilon_at_index(&cfg(), 11).is_err());
        assert!(sgd_rdp_at_index(&cfg(), 3, 1.0).is_err());
    }

    #[test]
    fn sgd_config_json_rejects_unknown_keys() {
        let ok: SgdConfig =
            serde_json::from_str(r#"{"n":10,"C":1,"beta":3,"rho":1,"eta":0.5,"sigma":1}"#).unwrap();
        assert_eq!(ok, cfg());
        assert!(serde_json::from_str::<SgdConfig>(
            r#"{"n":10,"C":1,"beta":3,"rho":1,"eta":0.5,"sigma":1,"oops":1}"#
        )
        .is_err());
    }

    #[test]
    fn simulator_fixed_point_and_determinism() {
        let loss = QuadraticLoss::isotropic(1.0, 1);
        let c = SgdConfig {
            lipschitz: 2.0,
            beta: 1.0,
            rho: 1.0,
            eta: 0.5,
            sigma: 1e-300,
            ..cfg()
        };
        let z = vec![vec![0.3]; 10];
        let t = noisy_proj_sgd(&z, &loss, &c, &[0.3], 1).unwrap();
        assert!(t.iterates.iter().all(|x| close(x[0], 0.3, 1e-15)));
        let noisy = SgdConfig {
            sigma: 0.7,
            ..c.clone()
        };
        assert_eq!(
            noisy_proj_sgd(&z, &loss, &noisy, &[0.0], 5).unwrap(),
            noisy_proj_sgd(&z, &loss, &noisy, &[0.0], 5).unwrap()
        );
        let t = noisy_proj_sgd(&z, &loss, &SgdConfig { sigma: 50.0, ..c }, &[0.0], 5).unwrap();
        assert!(t.iterates.iter().all(|x| x[0].abs() <= 1.0 + 1e-15));
    }

    #[test]
    fn simulator_rejects_inconsistent_constants() {
        let loss = QuadraticLoss::isotropic(2.0, 1);
        let z = vec![vec![0.0]; 10];
        // 2R·a = 4 > C = 1
        assert!(noisy_proj_sgd(
            &z,
            &loss,
            &SgdConfig {
                beta: 2.0,
                rho: 1.0,
                eta: 0.5,
                ..cfg()
            },
            &[0.0],
            0
        )
        .is_err());
        let loss = QuadraticLoss::isotropic(0.5, 1);
        assert!(noisy_proj_sgd(&z, &loss, &cfg(), &[0.0], 0).is_err());
        let loss = QuadraticLoss::isotropic(1.0, 1);
        let ok = SgdConfig {
            lipschitz: 2.0,
            beta: 1.0,
            rho: 1.0,
            eta: 0.5,
            ..cfg()
        };
        assert!(noisy_proj_sgd(&z[..3], &loss, &ok, &[0.0], 0).is_err());
        assert!(noisy_proj_sgd(&z, &loss, &ok, &[2.0], 0).is_err());
    }

    #[test]
    fn trajectory_csv() {
        let t = Trajectory {
            iterates: vec![vec![0.0, 1.0], vec![0.5, -0.25]],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,x0,x1\n0,0,1\n1,0.5,-0.25\n"
        );
    }
}
