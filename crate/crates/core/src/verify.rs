//! Randomized certification harness. Every bound in [`crate::mixing`],
//! [`crate::iteration`] and [`crate::diffusion`] is checked against an exact
//! or numerically certified oracle on seeded random instances.
//!
//! Trials run in parallel; reports are always returned in `(case, trial)`
//! order so the output depends only on the seed and the configuration.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{
    brownian_rdp, brownian_rdp_quadrature, ou_mc_mse, ou_mse, ou_rdp, ou_rdp_quadrature,
    BrownianParams, OuParams,
};
use crate::distributions::{seeded_rng, Coupling, DiscreteDist, SupportPoint};
use crate::divergences::{hockey_stick, hockey_stick_probs, DpGuarantee};
use crate::error::{invalid, Result};
use crate::iteration::{contraction_coeff, noisy_step, project_ball, QuadraticLoss, SgdConfig};
use crate::mixing::{
    amplify_with_kernel, dobrushin_coeff, doeblin_coeff, eps_dobrushin_coeff, mixture_decompose,
    pushforward, pushforward_probs, transport_operator, ultra_coeff, DiscreteKernel,
};
use crate::quadrature::{integrate, QuadOptions};

/// Tolerance for exact discrete algebra.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for quadrature-backed claims.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Monte-Carlo checks pass within this many standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Largest support size the generator will produce.
pub const MAX_SUPPORT: usize = 16;

/// One checked claim on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub case: String,
    pub check: String,
    pub trial: usize,
    /// Seed that regenerates the instance with [`random_instance`].
    pub seed: u64,
    pub nx: usize,
    pub ny: usize,
    pub eps: Option<f64>,
    pub delta_before: Option<f64>,
    pub coefficient: Option<f64>,
    pub eps_after: Option<f64>,
    pub measured: f64,
    pub bound: f64,
    /// `bound − measured`.
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const REPORT_HEADER: [&str; 15] = [
    "case",
    "check",
    "trial",
    "seed",
    "nx",
    "ny",
    "eps",
    "delta_before",
    "coefficient",
    "eps_after",
    "measured",
    "bound",
    "slack",
    "tolerance",
    "pass",
];

impl TrialReport {
    fn new(
        case: &str,
        check: &str,
        trial: usize,
        measured: f64,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        let slack = bound - measured;
        Self {
            case: case.to_string(),
            check: check.to_string(),
            trial,
            seed: 0,
            nx: 0,
            ny: 0,
            eps: None,
            delta_before: None,
            coefficient: None,
            eps_after: None,
            measured,
            bound,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        }
    }

    fn on(mut self, seed: u64, nx: usize, ny: usize) -> Self {
        self.seed = seed;
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.case.clone(),
            self.check.clone(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.nx.to_string(),
            self.ny.to_string(),
            opt(self.eps),
            opt(self.delta_before),
            opt(self.coefficient),
            opt(self.eps_after),
            self.measured.to_string(),
            self.bound.to_string(),
            self.slack.to_string(),
            self.tolerance.to_string(),
            self.pass.to_string(),
        ]
    }
}

/// Writes reports as CSV rows (header included) after whatever `out`
/// already holds.
pub fn write_reports_csv<W: Write>(
    reports: &[TrialReport],
    out: W,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    /// Distinct trials that contributed rows.
    pub trials: usize,
    pub violations: usize,
    /// Largest `−slack − tolerance` over failing rows, 0 when none fail.
    pub max_slack_deficit: f64,
}

pub fn summarize(reports: &[TrialReport]) -> BTreeMap<String, CaseSummary> {
    let mut seen: BTreeMap<&str, std::collections::BTreeSet<usize>> = BTreeMap::new();
    let mut out: BTreeMap<String, CaseSummary> = BTreeMap::new();
    for r in reports {
        seen.entry(&r.case).or_default().insert(r.trial);
        let s = out.entry(r.case.clone()).or_insert(CaseSummary {
            trials: 0,
            violations: 0,
            max_slack_deficit: 0.0,
        });
        if !r.pass {
            s.violations += 1;
            s.max_slack_deficit = s.max_slack_deficit.max(-r.slack - r.tolerance);
        }
    }
    for (case, trials) in seen {
        out.get_mut(case).expect("case recorded").trials = trials.len();
    }
    out
}

pub fn violations(reports: &[TrialReport]) -> usize {
    reports.iter().filter(|r| !r.pass).count()
}

/// Inclusive range of support sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    pub min: usize,
    pub max: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            min: 2,
            max: MAX_SUPPORT,
        }
    }
}

impl Sizes {
    fn validate(&self) -> Result<()> {
        if self.min < 2 || self.max < self.min || self.max > MAX_SUPPORT {
            return Err(invalid(
                "sizes",
                format!(
                    "need 2 <= min <= max <= {MAX_SUPPORT}, got [{}, {}]",
                    self.min, self.max
                ),
            ));
        }
        Ok(())
    }
}

/// Input laws `μ`, `ν` and a kernel from an instance seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub mu: DiscreteDist,
    pub nu: DiscreteDist,
    pub kernel: DiscreteKernel,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in the stream of case `case`.
fn trial_seed(seed: u64, case: u64, trial: usize) -> u64 {
    splitmix64(splitmix64(seed ^ case.wrapping_mul(0xA24B_AED4_963E_E407)) ^ trial as u64)
}

/// Normalized `exp(c·u)` weights with a per-draw concentration `c ∈ [0, 10)`.
fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let c = 10.0 * rng.random::<f64>();
    let w: Vec<f64> = (0..n).map(|_| (c * rng.random::<f64>()).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn labels(n: usize) -> Vec<SupportPoint> {
    (0..n).map(|i| SupportPoint::Label(i.to_string())).collect()
}

fn random_dist<R: Rng>(rng: &mut R, n: usize) -> Result<DiscreteDist> {
    DiscreteDist::normalized(labels(n), random_weights(rng, n))
}

/// Full-support `μ`, `ν` on `nx` points and an `nx × ny` kernel with
/// strictly positive entries. Deterministic in `seed`.
pub fn random_instance(nx: usize, ny: usize, seed: u64) -> Result<Instance> {
    if nx < 2 || ny < 2 {
        return Err(invalid("sizes", format!("need nx, ny >= 2, got {nx}x{ny}")));
    }
    let mut rng = seeded_rng(seed);
    let mu = random_dist(&mut rng, nx)?;
    let nu = random_dist(&mut rng, nx)?;
    let rows = (0..nx).map(|_| random_weights(&mut rng, ny)).collect();
    Ok(Instance {
        mu,
        nu,
        kernel: DiscreteKernel::new(labels(nx), labels(ny), rows)?,
    })
}

/// Draws sizes for a trial and returns them with the instance seed.
fn trial_shape(seed: u64, case: u64, trial: usize, sizes: &Sizes) -> (usize, usize, u64) {
    let mut rng = seeded_rng(trial_seed(seed, case, trial));
    let nx = rng.random_range(sizes.min..=sizes.max);
    let ny = rng.random_range(sizes.min..=sizes.max);
    (nx, ny, rng.next_u64())
}

fn sym_hockey(p: &[f64], q: &[f64], eps: f64) -> f64 {
    hockey_stick_probs(p, q, eps).max(hockey_stick_probs(q, p, eps))
}

/// For each trial and `ε`: sets `δ` to the exact two-sided hockey-stick
/// divergence of `(μ, ν)`, amplifies `(ε, δ)` under each coefficient of `K`
/// and checks `D_{e^{ε′}}(μK‖νK) ≤ δ′` in both directions. Also records the
/// coefficient ordering for each instance.
pub fn certify_theorem1(
    trials: usize,
    sizes: &Sizes,
    eps_grid: &[f64],
    seed: u64,
) -> Result<Vec<TrialReport>> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    sizes.validate()?;
    if let Some(e) = eps_grid.iter().find(|e| !(**e >= 0.0)) {
        return Err(invalid(
            "eps_grid",
            format!("entries must be >= 0, got {e}"),
        ));
    }
    let per_trial: Vec<Result<Vec<TrialReport>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (nx, ny, inst_seed) = trial_shape(seed, 1, trial, sizes);
            let inst = random_instance(nx, ny, inst_seed)?;
            theorem1_trial(&inst, trial, eps_grid)
                .map(|rows| rows.into_iter().map(|r| r.on(inst_seed, nx, ny)).collect())
        })
        .collect();
    let mut reports = Vec::new();
    for r in per_trial {
        reports.extend(r?);
    }
    // case-major order, trial order within a case
    reports.sort_by(|a, b| {
        case_rank(&a.case)
            .cmp(&case_rank(&b.case))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(reports)
}

fn case_rank(case: &str) -> usize {
    ["dobrushin", "eps_dobrushin", "doeblin", "ultra", "ordering"]
        .iter()
        .position(|c| *c == case)
        .unwrap_or(usize::MAX)
}

fn theorem1_trial(inst: &Instance, trial: usize, eps_grid: &[f64]) -> Result<Vec<TrialReport>> {
    let k = &inst.kernel;
    let p = inst.mu.probs();
    let q = inst.nu.probs();
    let pk = pushforward_probs(p, k);
    let qk = pushforward_probs(q, k);
    let mut out = Vec::new();
    for &eps in eps_grid {
        let delta = sym_hockey(p, q, eps).min(1.0);
        let g = DpGuarantee::new(eps, delta)?;
        for row in amplify_with_kernel(&g, k)? {
            let after = row.guarantee;
            let measured = sym_hockey(&pk, &qk, after.epsilon);
            let mut r = TrialReport::new(
                row.condition.name(),
                "amplified_delta",
                trial,
                measured,
                after.delta,
                EXACT_TOL,
            );
            r.eps = Some(eps);
            r.delta_before = Some(delta);
            r.coefficient = Some(row.condition.gamma());
            r.eps_after = Some(after.epsilon);
            out.push(r);
        }
    }
    out.extend(ordering_rows(k, trial, eps_grid));
    Ok(out)
}

/// `γ_{(γ,ε)-Dob} ≤ γ_Dob ≤ γ_Doe ≤ γ_ultra` as three rows per kernel, the
/// first at the worst `ε` of the grid.
fn ordering_rows(k: &DiscreteKernel, trial: usize, eps_grid: &[f64]) -> Vec<TrialReport> {
    let dob = dobrushin_coeff(k);
    let doe = doeblin_coeff(k).gamma;
    let ultra = ultra_coeff(k);
    let eps_dob = eps_grid
        .iter()
        .map(|&e| eps_dobrushin_coeff(k, e))
        .fold(eps_dobrushin_coeff(k, 0.0), f64::max);
    vec![
        TrialReport::new(
            "ordering",
            "eps_dobrushin_le_dobrushin",
            trial,
            eps_dob,
            dob,
            EXACT_TOL,
        ),
        TrialReport::new(
            "ordering",
            "dobrushin_le_doeblin",
            trial,
            dob,
            doe,
            EXACT_TOL,
        ),
        TrialReport::new("ordering", "doeblin_le_ultra", trial, doe, ultra, EXACT_TOL),
    ]
}

/// Coefficient ordering on `kernels` random kernels.
pub fn certify_ordering(
    kernels: usize,
    sizes: &Sizes,
    eps_grid: &[f64],
    seed: u64,
) -> Result<Vec<TrialReport>> {
    sizes.validate()?;
    let rows: Vec<Result<Vec<TrialReport>>> = (0..kernels)
        .into_par_iter()
        .map(|trial| {
            let (nx, ny, inst_seed) = trial_shape(seed, 2, trial, sizes);
            let inst = random_instance(nx, ny, inst_seed)?;
            Ok(ordering_rows(&inst.kernel, trial, eps_grid)
                .into_iter()
                .map(|r| r.on(inst_seed, nx, ny))
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// North-west corner coupling of two probability vectors.
fn greedy_coupling(mu: &DiscreteDist, nu: &DiscreteDist) -> Result<Coupling> {
    let (p, q) = (mu.probs(), nu.probs());
    let mut mass = vec![vec![0.0; q.len()]; p.len()];
    let (mut i, mut j) = (0, 0);
    let (mut left, mut right) = (p[0], q[0]);
    while i < p.len() && j < q.len() {
        let m = left.min(right);
        mass[i][j] += m;
        left -= m;
        right -= m;
        if left <= right {
            i += 1;
            left = p.get(i).copied().unwrap_or(0.0);
            if right <= 0.0 || i == p.len() {
                j += 1;
                right = q.get(j).copied().unwrap_or(0.0);
            }
        } else {
            j += 1;
            right = q.get(j).copied().unwrap_or(0.0);
        }
    }
    // leftover rounding dust goes to the last cell
    let total: f64 = mass.iter().flatten().sum();
    let (last_i, last_j) = (p.len() - 1, q.len() - 1);
    mass[last_i][last_j] += 1.0 - total;
    mass[last_i][last_j] = mass[last_i][last_j].max(0.0);
    Coupling::new(mu.points().to_vec(), nu.points().to_vec(), mass)
}

fn random_joint<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Result<Coupling> {
    let flat = random_weights(rng, nx * ny);
    let mass = flat.chunks(ny).map(<[f64]>::to_vec).collect();
    Coupling::new(labels(nx), labels(ny), mass)
}

fn max_abs_diff(a: &DiscreteDist, b: &DiscreteDist) -> f64 {
    let (_, p, q) = crate::distributions::align(a, b);
    p.iter()
        .zip(&q)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Transport-operator pushforward `μH_π = ν` for independent, greedy and
/// random-joint couplings, and the mixture decomposition identities at each
/// `ε` of the grid.
pub fn certify_transport_and_decompose(
    trials: usize,
    sizes: &Sizes,
    eps_grid: &[f64],
    seed: u64,
) -> Result<Vec<TrialReport>> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    sizes.validate()?;
    let per_trial: Vec<Result<Vec<TrialReport>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (nx, ny, inst_seed) = trial_shape(seed, 3, trial, sizes);
            transport_trial(nx, ny, inst_seed, trial, eps_grid)
                .map(|rows| rows.into_iter().map(|r| r.on(inst_seed, nx, ny)).collect())
        })
        .collect();
    let mut reports = Vec::new();
    for r in per_trial {
        reports.extend(r?);
    }
    reports.sort_by(|a, b| a.case.cmp(&b.case).then(a.trial.cmp(&b.trial)));
    Ok(reports)
}

fn transport_trial(
    nx: usize,
    ny: usize,
    seed: u64,
    trial: usize,
    eps_grid: &[f64],
) -> Result<Vec<TrialReport>> {
    let mut rng = seeded_rng(seed);
    let mu = random_dist(&mut rng, nx)?;
    let nu = random_dist(&mut rng, ny)?;
    let joint = random_joint(&mut rng, nx, ny)?;
    let mut out = Vec::new();
    for (check, pi, target) in [
        ("independent", Coupling::independent(&mu, &nu), nu.clone()),
        ("greedy", greedy_coupling(&mu, &nu)?, nu.clone()),
        ("random_joint", joint.clone(), joint.right_marginal()?),
    ] {
        let source = pi.left_marginal()?;
        let h = transport_operator(&pi)?;
        let err = max_abs_diff(&pushforward(&source, &h)?, &target);
        out.push(TrialReport::new(
            "transport",
            check,
            trial,
            err,
            0.0,
            EXACT_TOL,
        ));
    }

    // the decomposition runs on two laws over the same nx points
    let nu_x = random_dist(&mut rng, nx)?;
    for &eps in eps_grid {
        let dec = mixture_decompose(&mu, &nu_x, eps)?;
        let (err_mu, err_nu) = dec.reconstruction_error(&mu, &nu_x);
        let theta_gap = (dec.theta - hockey_stick(&mu, &nu_x, eps)).abs();
        for (check, measured, tol) in [
            ("mu_identity", err_mu, EXACT_TOL),
            ("nu_identity", err_nu, EXACT_TOL),
            ("residual_overlap", dec.residual_overlap(), 0.0),
            ("theta_is_hockey_stick", theta_gap, 0.0),
        ] {
            let mut r = TrialReport::new("decompose", check, trial, measured, 0.0, tol);
            r.eps = Some(eps);
            r.coefficient = Some(dec.theta);
            out.push(r);
        }
    }
    Ok(out)
}

/// Parameter grid for the diffusion checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiffusionGrid {
    pub thetas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub ts: Vec<f64>,
    pub alphas: Vec<f64>,
    pub delta: f64,
    /// Monte-Carlo draws per error check; 0 skips those checks.
    pub mc_samples: usize,
}

impl Default for DiffusionGrid {
    fn default() -> Self {
        Self {
            thetas: vec![0.5, 2.0],
            rhos: vec![0.7, 1.5],
            ts: vec![0.1, 1.0, 3.0],
            alphas: vec![2.0, 5.0],
            delta: 1.0,
            mc_samples: 100_000,
        }
    }
}

/// Quadrature Rényi divergence between OU and Brownian transition laws
/// against the closed forms, Monte-Carlo error against the OU error
/// formula, and the tail-integral identity behind the OU sensitivity.
pub fn certify_diffusion(
    grid: &DiffusionGrid,
    quad_tol: f64,
    seed: u64,
) -> Result<Vec<TrialReport>> {
    require_grid(grid)?;
    let mut cases = Vec::new();
    for &theta in &grid.thetas {
        for &rho in &grid.rhos {
            for &t in &grid.ts {
                cases.push((theta, rho, t));
            }
        }
    }
    let per_case: Vec<Result<Vec<TrialReport>>> = cases
        .par_iter()
        .enumerate()
        .map(|(trial, &(theta, rho, t))| {
            let p = OuParams::new(theta, rho, t, grid.delta, 1.0, 1)?;
            let mut rows = Vec::new();
            for &alpha in &grid.alphas {
                let closed = ou_rdp(&p, alpha)?.epsilon;
                let numeric = ou_rdp_quadrature(&p, alpha)?;
                rows.push(diffusion_row(
                    "ou_rdp",
                    "quadrature",
                    trial,
                    numeric,
                    closed,
                    quad_tol,
                    alpha,
                ));
            }
            if grid.mc_samples > 1 {
                let x = [0.8];
                let (mean, se) = ou_mc_mse(&x, &p, trial_seed(seed, 4, trial), grid.mc_samples)?;
                let exact = ou_mse(&p, 0.8)?;
                let mut r = TrialReport::new(
                    "ou_mse",
                    "monte_carlo",
                    trial,
                    (mean - exact).abs(),
                    0.0,
                    MC_SIGMAS * se,
                );
                r.coefficient = Some(exact);
                rows.push(r);
            }
            let integral = kappa_tail_integral(theta, t)?;
            let exact = 1.0 / (2.0 * theta * (2.0 * theta * t).exp_m1());
            rows.push(TrialReport::new(
                "ou_tail_integral",
                "quadrature",
                trial,
                (integral - exact).abs(),
                0.0,
                1e-8,
            ));
            Ok(rows)
        })
        .collect();
    let mut reports = Vec::new();
    for r in per_case {
        reports.extend(r?);
    }
    for (trial, &t) in grid.ts.iter().enumerate() {
        let p = BrownianParams::new(t, grid.delta, 1)?;
        for &alpha in &grid.alphas {
            let closed = brownian_rdp(&p, alpha)?.epsilon;
            let numeric = brownian_rdp_quadrature(&p, alpha)?;
            reports.push(diffusion_row(
                "brownian_rdp",
                "quadrature",
                trial,
                numeric,
                closed,
                quad_tol,
                alpha,
            ));
        }
    }
    reports.sort_by(|a, b| a.case.cmp(&b.case).then(a.trial.cmp(&b.trial)));
    Ok(reports)
}

fn require_grid(grid: &DiffusionGrid) -> Result<()> {
    if grid.thetas.is_empty()
        || grid.rhos.is_empty()
        || grid.ts.is_empty()
        || grid.alphas.is_empty()
    {
        return Err(invalid("grid", "every axis needs at least one value"));
    }
    Ok(())
}

/// Two-sided check `|numeric − closed| ≤ tol`, reported as slack.
fn diffusion_row(
    case: &str,
    check: &str,
    trial: usize,
    numeric: f64,
    closed: f64,
    tol: f64,
    alpha: f64,
) -> TrialReport {
    let mut r = TrialReport::new(case, check, trial, (numeric - closed).abs(), 0.0, tol);
    r.eps = Some(alpha);
    r.coefficient = Some(closed);
    r
}

/// `∫_t^{t+40/θ} e^{2θs}/(e^{2θs} − 1)² ds`.
pub fn kappa_tail_integral(theta: f64, t: f64) -> Result<f64> {
    let f = |s: f64| {
        let e = (2.0 * theta * s).exp_m1();
        (e + 1.0) / (e * e)
    };
    let opts = QuadOptions {
        abs_tol: 1e-12,
        ..QuadOptions::default()
    };
    Ok(integrate(f, t, t + 40.0 / theta, &[], &opts)?.value)
}

/// Shared-noise coupling of one noisy projected gradient step: for random
/// quadratic losses with curvatures in `[ρ, β]`, random iterates `X, X′` in
/// the ball, a random record and one shared noise draw, checks
/// `‖Y − Y′‖ ≤ L‖X − X′‖` with `L` the contraction coefficient of `cfg`.
/// The dataset size and `C` of `cfg` are not used.
pub fn certify_sgd_contraction(
    cfg: &SgdConfig,
    samples: usize,
    seed: u64,
) -> Result<Vec<TrialReport>> {
    let l = contraction_coeff(cfg.beta, cfg.rho, cfg.eta)?;
    crate::error::require_positive("sigma", cfg.sigma)?;
    crate::error::require_positive("radius", cfg.radius)?;
    let chunk = 1024;
    let chunks: Vec<Vec<TrialReport>> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded_rng(trial_seed(seed, 5, c));
            (c * chunk..((c + 1) * chunk).min(samples))
                .map(|trial| sgd_sample(cfg, l, trial, &mut rng))
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

fn sgd_sample<R: Rng>(cfg: &SgdConfig, l: f64, trial: usize, rng: &mut R) -> TrialReport {
    let d = cfg.d;
    let mut curvatures: Vec<f64> = (0..d)
        .map(|_| rng.random_range(cfg.rho..=cfg.beta))
        .collect();
    // pin the extreme curvatures so the worst direction is present
    curvatures[0] = cfg.beta;
    if d > 1 {
        curvatures[1] = cfg.rho;
    }
    let loss = QuadraticLoss { curvatures };
    let in_ball = |rng: &mut R| {
        let mut v: Vec<f64> = (0..d)
            .map(|_| cfg.radius * rng.random_range(-1.0..=1.0))
            .collect();
        project_ball(&mut v, cfg.radius);
        v
    };
    let x = in_ball(rng);
    let x_prime = in_ball(rng);
    let z = in_ball(rng);
    let noise: Vec<f64> = (0..d)
        .map(|_| cfg.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y = noisy_step(&x, &z, &loss, cfg.eta, &noise, cfg.radius);
    let y_prime = noisy_step(&x_prime, &z, &loss, cfg.eta, &noise, cfg.radius);
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let before = dist(&x, &x_prime);
    let mut r = TrialReport::new(
        "sgd_contraction",
        "shared_noise_step",
        trial,
        dist(&y, &y_prime),
        l * before,
        EXACT_TOL * before.max(1.0),
    );
    r.coefficient = Some(l);
    r
}

/// Full harness configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub trials: usize,
    pub sizes: Sizes,
    pub eps_grid: Vec<f64>,
    pub decompose_trials: usize,
    /// Omit to skip the diffusion checks.
    pub diffusion: Option<DiffusionGrid>,
    pub quadrature_tol: f64,
    /// SGD settings for the shared-noise check; omit to skip it.
    pub sgd: Option<SgdConfig>,
    pub sgd_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            sizes: Sizes::default(),
            eps_grid: vec![0.0, 0.5, 1.0, 2.0],
            decompose_trials: 200,
            diffusion: Some(DiffusionGrid::default()),
            quadrature_tol: QUADRATURE_TOL,
            sgd: Some(SgdConfig {
                n: 1,
                lipschitz: 1.0,
                beta: 3.0,
                rho: 1.0,
                eta: 0.5,
                sigma: 1.0,
                d: 3,
                radius: 1.0,
            }),
            sgd_samples: 10_000,
        }
    }
}

/// Runs every enabled check, in a fixed order.
pub fn run(cfg: &VerifyConfig, seed: u64) -> Result<Vec<TrialReport>> {
    let mut reports = certify_theorem1(cfg.trials, &cfg.sizes, &cfg.eps_grid, seed)?;
    if cfg.decompose_trials > 0 {
        reports.extend(certify_transport_and_decompose(
            cfg.decompose_trials,
            &cfg.sizes,
            &cfg.eps_grid,
            seed,
        )?);
    }
    if let Some(grid) = &cfg.diffusion {
        reports.extend(certify_diffusion(grid, cfg.quadrature_tol, seed)?);
    }
    if let (Some(sgd), true) = (&cfg.sgd, cfg.sgd_samples > 0) {
        reports.extend(certify_sgd_contraction(sgd, cfg.sgd_samples, seed)?);
    }
    Ok(reports)
}
