//! Diffusion mechanisms: Brownian motion and the Ornstein-Uhlenbeck process
//! run from `f(D)`, their Rényi accounting through the intrinsic
//! sensitivity `Λ(t)`, and the OU-versus-Gaussian error comparison.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::{check_dim, seeded_rng, GaussianDist, NoiseFamily};
use crate::divergences::{renyi_numeric_families, RdpPoint};
use crate::error::{invalid, require_non_negative, require_order, require_positive, Result};

/// Tolerance on the dominance ratio `ℰ_OU/ℰ_GM ≤ 1`.
pub const DOMINANCE_TOL: f64 = 1e-12;

/// Brownian motion started at `f(D)` and stopped at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianParams {
    pub t: f64,
    pub delta: f64,
    #[serde(default = "one")]
    pub d: usize,
}

fn one() -> usize {
    1
}

impl BrownianParams {
    pub fn new(t: f64, delta: f64, d: usize) -> Result<Self> {
        let p = Self { t, delta, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("t", self.t)?;
        require_non_negative("delta", self.delta)?;
        if self.d == 0 {
            return Err(invalid("d", "dimension must be >= 1"));
        }
        Ok(())
    }

    /// `Δ²/(4t)`.
    pub fn lambda(&self) -> f64 {
        self.delta * self.delta / (4.0 * self.t)
    }
}

/// `αΔ²/(4t)`, the Gaussian mechanism with `σ² = 2t`.
pub fn brownian_rdp(p: &BrownianParams, alpha: f64) -> Result<RdpPoint> {
    p.validate()?;
    require_order(alpha)?;
    RdpPoint::new(alpha, alpha * p.lambda())
}

/// Law of the Brownian motion at time `t` started from `x`: `𝒩(x, 2t·I)`.
pub fn brownian_transition(x: &[f64], p: &BrownianParams) -> Result<GaussianDist> {
    p.validate()?;
    check_dim(p.d, x.len())?;
    GaussianDist::new(x.to_vec(), 2.0 * p.t)
}

/// Ornstein-Uhlenbeck mechanism `dX = −θX dt + √2 ρ dW` run for time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuParams {
    pub theta: f64,
    pub rho: f64,
    pub t: f64,
    pub delta: f64,
    /// Bound on `‖f(D)‖`.
    #[serde(rename = "R", alias = "r")]
    pub radius: f64,
    #[serde(default = "one")]
    pub d: usize,
}

impl OuParams {
    pub fn new(theta: f64, rho: f64, t: f64, delta: f64, radius: f64, d: usize) -> Result<Self> {
        let p = Self {
            theta,
            rho,
            t,
            delta,
            radius,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("theta", self.theta)?;
        require_positive("rho", self.rho)?;
        require_positive("t", self.t)?;
        require_non_negative("delta", self.delta)?;
        require_non_negative("R", self.radius)?;
        if self.d == 0 {
            return Err(invalid("d", "dimension must be >= 1"));
        }
        Ok(())
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.theta, self.rho, t, self.delta, self.radius, self.d)
    }

    /// `e^{−θt}`.
    pub fn decay(&self) -> f64 {
        (-self.theta * self.t).exp()
    }

    /// Per-coordinate transition variance `(ρ²/θ)(1 − e^{−2θt})`.
    pub fn variance(&self) -> f64 {
        ou_variance(self.theta, self.rho, self.t)
    }

    /// Intrinsic sensitivity `θΔ²/(2ρ²(e^{2θt} − 1))`.
    pub fn lambda(&self) -> f64 {
        self.theta * self.delta * self.delta
            / (2.0 * self.rho * self.rho * (2.0 * self.theta * self.t).exp_m1())
    }

    /// Variance `σ̃² = ρ²(e^{2θt} − 1)/θ` of the Gaussian mechanism with the
    /// same Rényi curve.
    pub fn matched_gaussian_variance(&self) -> f64 {
        self.rho * self.rho * (2.0 * self.theta * self.t).exp_m1() / self.theta
    }
}

fn ou_variance(theta: f64, rho: f64, t: f64) -> f64 {
    // expm1 keeps full precision as θt → 0
    rho * rho / theta * -(-2.0 * theta * t).exp_m1()
}

/// `𝒩(e^{−θt}x, (ρ²/θ)(1 − e^{−2θt})·I)`.
pub fn ou_transition(x: &[f64], p: &OuParams) -> Result<GaussianDist> {
    p.validate()?;
    check_dim(p.d, x.len())?;
    let k = p.decay();
    GaussianDist::new(x.iter().map(|v| k * v).collect(), p.variance())
}

/// Runs the OU dynamics for a further time `s` from an isotropic Gaussian law.
pub fn ou_propagate(law: &GaussianDist, theta: f64, rho: f64, s: f64) -> Result<GaussianDist> {
    require_positive("theta", theta)?;
    require_positive("rho", rho)?;
    require_positive("s", s)?;
    let k = (-theta * s).exp();
    GaussianDist::new(
        law.mean.iter().map(|m| k * m).collect(),
        k * k * law.variance + ou_variance(theta, rho, s),
    )
}

/// `αΛ(t)`.
pub fn ou_rdp(p: &OuParams, alpha: f64) -> Result<RdpPoint> {
    p.validate()?;
    require_order(alpha)?;
    RdpPoint::new(alpha, alpha * p.lambda())
}

/// Quadrature Rényi divergence between the one-dimensional transition laws
/// from `0` and from `Δ`.
pub fn ou_rdp_quadrature(p: &OuParams, alpha: f64) -> Result<f64> {
    let p1 = OuParams { d: 1, ..*p };
    let a = ou_transition(&[0.0], &p1)?;
    let b = ou_transition(&[p.delta], &p1)?;
    renyi_numeric_families(&NoiseFamily::Gaussian(a), &NoiseFamily::Gaussian(b), alpha)
}

/// Quadrature Rényi divergence between the Brownian laws from `0` and `Δ`.
pub fn brownian_rdp_quadrature(p: &BrownianParams, alpha: f64) -> Result<f64> {
    let p1 = BrownianParams { d: 1, ..*p };
    let a = brownian_transition(&[0.0], &p1)?;
    let b = brownian_transition(&[p.delta], &p1)?;
    renyi_numeric_families(&NoiseFamily::Gaussian(a), &NoiseFamily::Gaussian(b), alpha)
}

/// `ℰ_OU = (1 − e^{−θt})²‖f(D)‖² + (dρ²/θ)(1 − e^{−2θt})`.
pub fn ou_mse(p: &OuParams, f_norm: f64) -> Result<f64> {
    p.validate()?;
    require_non_negative("f_norm", f_norm)?;
    let bias = -(-p.theta * p.t).exp_m1();
    Ok(bias * bias * f_norm * f_norm + p.d as f64 * p.variance())
}

/// `ℰ_GM = dσ̃²`.
pub fn gm_mse(p: &OuParams) -> Result<f64> {
    p.validate()?;
    Ok(p.d as f64 * p.matched_gaussian_variance())
}

/// `ℰ_GM/(1 + ℰ_GM/R²)`, the error bound of the rescaled Gaussian mechanism.
pub fn pgm_mse_bound(p: &OuParams) -> Result<f64> {
    p.validate()?;
    require_positive("R", p.radius)?;
    let gm = gm_mse(p)?;
    let r2 = p.radius * p.radius;
    if gm.is_infinite() {
        return Ok(r2);
    }
    Ok(gm / (1.0 + gm / r2))
}

/// Parameters at `t = 1` giving `(α, αε)`-RDP for all `α` with error ratio
/// `ℰ_OU/ℰ_GM ≤ (1 + dΔ²/(2εR²))^{-1}`.
pub fn plan_ou(epsilon: f64, delta: f64, radius: f64, d: usize) -> Result<OuParams> {
    require_positive("epsilon", epsilon)?;
    require_positive("delta", delta)?;
    require_positive("R", radius)?;
    if d == 0 {
        return Err(invalid("d", "dimension must be >= 1"));
    }
    let x = plan_excess(epsilon, delta, radius, d);
    let theta = x.ln_1p();
    if theta == 0.0 {
        return Err(invalid(
            "epsilon",
            "target is so loose that the planned rate underflows to zero",
        ));
    }
    let rho2 = theta * delta * delta / (2.0 * epsilon * (2.0 * theta).exp_m1());
    OuParams::new(theta, rho2.sqrt(), 1.0, delta, radius, d)
}

/// `(1 + dΔ²/(2εR²))^{-1}`.
pub fn plan_ratio_bound(epsilon: f64, delta: f64, radius: f64, d: usize) -> f64 {
    1.0 / (1.0 + plan_excess(epsilon, delta, radius, d))
}

fn plan_excess(epsilon: f64, delta: f64, radius: f64, d: usize) -> f64 {
    d as f64 * delta * delta / (2.0 * epsilon * radius * radius)
}

/// One row of an OU sweep over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuSweepRow {
    pub t: f64,
    pub lambda_t: f64,
    pub mse_ou: f64,
    pub mse_gm: f64,
    pub mse_pgm_bound: f64,
    pub ratio: f64,
}

/// Evaluates `Λ(t)` and the three error curves at each `t`, with
/// `‖f(D)‖ = R`.
pub fn ou_sweep(p: &OuParams, t_grid: &[f64]) -> Result<Vec<OuSweepRow>> {
    t_grid
        .iter()
        .map(|&t| {
            let q = p.at_time(t)?;
            let mse_ou = ou_mse(&q, q.radius)?;
            let mse_gm = gm_mse(&q)?;
            Ok(OuSweepRow {
                t,
                lambda_t: q.lambda(),
                mse_ou,
                mse_gm,
                mse_pgm_bound: pgm_mse_bound(&q)?,
                ratio: mse_ou / mse_gm,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    /// Whether `θR² ≤ 4dρ²`.
    pub precondition: bool,
    /// Whether `ℰ_OU/ℰ_GM ≤ 1` at every grid time.
    pub dominated: bool,
    pub max_ratio: f64,
    /// Ratio at the largest grid time.
    pub final_ratio: f64,
    pub ratios: Vec<(f64, f64)>,
}

/// Evaluates `ℰ_OU/ℰ_GM` at the worst case `‖f(D)‖ = R` over `t_grid`.
pub fn mse_dominance_check(
    theta: f64,
    rho: f64,
    d: usize,
    radius: f64,
    t_grid: &[f64],
) -> Result<DominanceReport> {
    if t_grid.is_empty() {
        return Err(invalid("t_grid", "need at least one time"));
    }
    let mut ratios = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let p = OuParams::new(theta, rho, t, 0.0, radius, d)?;
        ratios.push((t, ou_mse(&p, radius)? / gm_mse(&p)?));
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let final_ratio = ratios
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|r| r.1)
        .expect("non-empty grid");
    Ok(DominanceReport {
        precondition: theta * radius * radius <= 4.0 * d as f64 * rho * rho,
        dominated: max_ratio <= 1.0 + DOMINANCE_TOL,
        max_ratio,
        final_ratio,
        ratios,
    })
}

/// `n` i.i.d. releases `e^{−θt}x + 𝒩(0, (ρ²/θ)(1 − e^{−2θt})·I)`.
pub fn ou_sample(x: &[f64], p: &OuParams, seed: u64, n: usize) -> Result<Vec<Vec<f64>>> {
    let law = ou_transition(x, p)?;
    let sd = law.variance.sqrt();
    let mut rng = seeded_rng(seed);
    Ok((0..n)
        .map(|_| {
            law.mean
                .iter()
                .map(|m| m + sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect())
}

/// Monte-Carlo estimate of `E‖X − x‖²` for `X ~ ou_transition(x)`, with its
/// standard error.
pub fn ou_mc_mse(x: &[f64], p: &OuParams, seed: u64, n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(invalid("n", "need at least two samples"));
    }
    let errs: Vec<f64> = ou_sample(x, p, seed, n)?
        .iter()
        .map(|s| s.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum())
        .collect();
    let nf = n as f64;
    let mean = errs.iter().sum::<f64>() / nf;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}
