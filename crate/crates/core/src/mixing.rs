//! Finite Markov kernels, their uniform-mixing coefficients and the
//! `(ε, δ)` amplification each coefficient certifies for a post-processed
//! mechanism.
//!
//! The four coefficients are ordered for every kernel:
//! `(γ,ε)-Dobrushin ≤ Dobrushin ≤ Doeblin ≤ ultra-mixing`.

use serde::{Deserialize, Serialize};

use crate::distributions::{align, Coupling, DiscreteDist, SupportPoint};
use crate::divergences::{hinge, hockey_stick_probs, scaled_min, tv_probs, DpGuarantee};
use crate::error::{invalid, Error, Result};

/// Row-sum tolerance for a kernel built in code.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Row-sum tolerance accepted from user input before rows are renormalized.
pub const INPUT_ROW_SUM_TOL: f64 = 1e-9;

/// Above this, `e^ε` overflows and amplification formulas switch to log form.
const EXP_OVERFLOW_EPS: f64 = 700.0;

#[derive(Deserialize)]
struct RawKernel {
    #[serde(default)]
    inputs: Option<Vec<SupportPoint>>,
    #[serde(default)]
    outputs: Option<Vec<SupportPoint>>,
    rows: Vec<Vec<f64>>,
}

/// Row-stochastic matrix: row `x` is the law `K(x)` over the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel")]
pub struct DiscreteKernel {
    inputs: Vec<SupportPoint>,
    outputs: Vec<SupportPoint>,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RawKernel> for DiscreteKernel {
    type Error = Error;

    fn try_from(raw: RawKernel) -> Result<Self> {
        let n_out = raw.rows.first().map_or(0, Vec::len);
        let inputs = raw.inputs.unwrap_or_else(|| labels(raw.rows.len()));
        let outputs = raw.outputs.unwrap_or_else(|| labels(n_out));
        DiscreteKernel::with_tolerance(inputs, outputs, raw.rows, INPUT_ROW_SUM_TOL)
    }
}

fn labels(n: usize) -> Vec<SupportPoint> {
    (0..n).map(|i| SupportPoint::Label(i.to_string())).collect()
}

impl DiscreteKernel {
    pub fn new(
        inputs: Vec<SupportPoint>,
        outputs: Vec<SupportPoint>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_tolerance(inputs, outputs, rows, ROW_SUM_TOL)
    }

    /// Kernel over labelled supports `"0", "1", ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_out = rows.first().map_or(0, Vec::len);
        Self::new(labels(rows.len()), labels(n_out), rows)
    }

    /// Validates rows against `tol` and then rescales each to unit mass, so
    /// the stored kernel always meets [`ROW_SUM_TOL`].
    pub fn with_tolerance(
        inputs: Vec<SupportPoint>,
        outputs: Vec<SupportPoint>,
        mut rows: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidKernel {
                row: 0,
                reason: "kernel has no rows".into(),
            });
        }
        if rows.len() != inputs.len() {
            return Err(Error::InvalidKernel {
                row: rows.len().min(inputs.len()),
                reason: format!("{} rows for {} input points", rows.len(), inputs.len()),
            });
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() != outputs.len() {
                return Err(Error::InvalidKernel {
                    row: i,
                    reason: format!("has {} entries, expected {}", row.len(), outputs.len()),
                });
            }
            if let Some(j) = row.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidKernel {
                    row: i,
                    reason: format!("entry {j} is {} (must be finite and >= 0)", row[j]),
                });
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > tol {
                return Err(Error::InvalidKernel {
                    row: i,
                    reason: format!("sums to {total}, not 1"),
                });
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
        // reuse DiscreteDist's distinctness checks on both supports
        DiscreteDist::uniform(inputs.clone())
            .map_err(|e| Error::SupportMismatch(format!("inputs: {e}")))?;
        DiscreteDist::uniform(outputs.clone())
            .map_err(|e| Error::SupportMismatch(format!("outputs: {e}")))?;
        Ok(Self {
            inputs,
            outputs,
            rows,
        })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            inputs: labels(n),
            outputs: labels(n),
            rows,
        }
    }

    /// Every input maps to the same law `row`.
    pub fn constant(n_inputs: usize, row: &[f64]) -> Result<Self> {
        Self::from_rows(vec![row.to_vec(); n_inputs])
    }

    pub fn inputs(&self) -> &[SupportPoint] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SupportPoint] {
        &self.outputs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Law `K(x)` of the output at input index `i`.
    pub fn row_dist(&self, i: usize) -> DiscreteDist {
        DiscreteDist::new(self.outputs.clone(), self.rows[i].clone())
            .expect("kernel rows are distributions")
    }

    /// Kernel composition `self ∘ then` (first `self`, then `then`).
    pub fn compose(&self, then: &DiscreteKernel) -> Result<DiscreteKernel> {
        if self.outputs != then.inputs {
            return Err(Error::SupportMismatch(
                "output support of the first kernel must equal the input support of the second"
                    .into(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| pushforward_probs(row, then))
            .collect();
        DiscreteKernel::new(self.inputs.clone(), then.outputs.clone(), rows)
    }

    fn ordered_pairs(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.rows.iter().enumerate().flat_map(move |(i, a)| {
            self.rows
                .iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(move |(_, b)| (a.as_slice(), b.as_slice()))
        })
    }
}

/// `p K` for a probability vector indexed like the kernel's inputs.
pub fn pushforward_probs(p: &[f64], kernel: &DiscreteKernel) -> Vec<f64> {
    let mut out = vec![0.0; kernel.n_outputs()];
    for (&w, row) in p.iter().zip(&kernel.rows) {
        if w > 0.0 {
            for (o, &k) in out.iter_mut().zip(row) {
                *o += w * k;
            }
        }
    }
    out
}

/// `μK`. Every support point of `mu` must be an input of the kernel; inputs
/// `mu` does not list get mass zero.
pub fn pushforward(mu: &DiscreteDist, kernel: &DiscreteKernel) -> Result<DiscreteDist> {
    let mut p = vec![0.0; kernel.n_inputs()];
    for (pt, &m) in mu.points().iter().zip(mu.probs()) {
        let i = kernel.inputs.iter().position(|x| x == pt).ok_or_else(|| {
            Error::SupportMismatch(format!("{pt:?} is not an input of the kernel"))
        })?;
        p[i] = m;
    }
    DiscreteDist::normalized(kernel.outputs.clone(), pushforward_probs(&p, kernel))
}

/// Worst-case total variation between two rows.
pub fn dobrushin_coeff(kernel: &DiscreteKernel) -> f64 {
    kernel
        .ordered_pairs()
        .map(|(a, b)| tv_probs(a, b))
        .fold(0.0, f64::max)
}

/// Worst-case hockey-stick divergence `D_{e^ε}(K(x) ‖ K(x'))` over ordered
/// row pairs. At `ε = ∞` this is the mass of `K(x)` outside `supp K(x')`.
pub fn eps_dobrushin_coeff(kernel: &DiscreteKernel, eps: f64) -> f64 {
    kernel
        .ordered_pairs()
        .map(|(a, b)| hockey_stick_probs(a, b, eps))
        .fold(0.0, f64::max)
}

/// Minimal Doeblin coefficient and its witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Doeblin {
    pub gamma: f64,
    /// `None` when `gamma = 1` (the column minima vanish).
    pub omega: Option<DiscreteDist>,
}

/// `1 − γ = Σ_y min_x k(x, y)`; the witness is the normalized column minimum.
pub fn doeblin_coeff(kernel: &DiscreteKernel) -> Doeblin {
    let mins: Vec<f64> = (0..kernel.n_outputs())
        .map(|j| {
            kernel
                .rows
                .iter()
                .map(|r| r[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mass: f64 = mins.iter().sum();
    let gamma = (1.0 - mass).clamp(0.0, 1.0);
    let omega = if mass > 0.0 {
        DiscreteDist::normalized(kernel.outputs.clone(), mins).ok()
    } else {
        None
    };
    Doeblin { gamma, omega }
}

/// `γ = 1 − min k(x,y)/k(x',y)` over ordered row pairs; `0/0` imposes no
/// constraint and a zero against a positive entry forces `γ = 1`.
pub fn ultra_coeff(kernel: &DiscreteKernel) -> f64 {
    let mut min_ratio: f64 = 1.0;
    for (a, b) in kernel.ordered_pairs() {
        for (&num, &den) in a.iter().zip(b) {
            match (num > 0.0, den > 0.0) {
                (false, false) => {}
                (true, false) | (false, true) => return 1.0,
                (true, true) => min_ratio = min_ratio.min(num / den),
            }
        }
    }
    (1.0 - min_ratio).clamp(0.0, 1.0)
}

/// All four coefficients of one kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingCoefficients {
    pub dobrushin: f64,
    /// `(ε, coefficient)` pairs in the order requested.
    pub eps_dobrushin: Vec<(f64, f64)>,
    pub doeblin: f64,
    pub doeblin_witness: Option<DiscreteDist>,
    pub ultra: f64,
}

impl MixingCoefficients {
    pub fn measure(kernel: &DiscreteKernel, eps_grid: &[f64]) -> Self {
        let doeblin = doeblin_coeff(kernel);
        Self {
            dobrushin: dobrushin_coeff(kernel),
            eps_dobrushin: eps_grid
                .iter()
                .map(|&e| (e, eps_dobrushin_coeff(kernel, e)))
                .collect(),
            doeblin: doeblin.gamma,
            doeblin_witness: doeblin.omega,
            ultra: ultra_coeff(kernel),
        }
    }
}

/// A mixing condition together with its coefficient γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", content = "gamma", rename_all = "snake_case")]
pub enum MixingCondition {
    Dobrushin(f64),
    /// γ must be measured at [`eps_tilde`] of the guarantee being amplified.
    EpsDobrushin(f64),
    Doeblin(f64),
    Ultra(f64),
}

impl MixingCondition {
    pub fn gamma(&self) -> f64 {
        match *self {
            MixingCondition::Dobrushin(g)
            | MixingCondition::EpsDobrushin(g)
            | MixingCondition::Doeblin(g)
            | MixingCondition::Ultra(g) => g,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MixingCondition::Dobrushin(_) => "dobrushin",
            MixingCondition::EpsDobrushin(_) => "eps_dobrushin",
            MixingCondition::Doeblin(_) => "doeblin",
            MixingCondition::Ultra(_) => "ultra",
        }
    }
}

/// `ε̃ = log(1 + (e^ε − 1)/δ)`, the order at which the (γ,ε̃)-Dobrushin
/// coefficient must be measured; `+∞` when `δ = 0`.
pub fn eps_tilde(guarantee: &DpGuarantee) -> f64 {
    let (eps, delta) = (guarantee.epsilon, guarantee.delta);
    if delta == 0.0 {
        return f64::INFINITY;
    }
    let ratio = eps.exp_m1() / delta;
    if ratio.is_finite() {
        ratio.ln_1p()
    } else {
        // log(e^ε − 1 + δ) − log δ with e^ε factored out
        eps - delta.ln() + (-(1.0 - delta) * (-eps).exp()).ln_1p()
    }
}

/// `ε′ = log(1 + γ(e^ε − 1))` and `ε′ − ε`, both without overflow.
fn shrunk_epsilon(eps: f64, gamma: f64) -> (f64, f64) {
    // ε′ − ε = log(1 − (1 − γ)(1 − e^{−ε}))
    let gap = (-(1.0 - gamma) * -(-eps).exp_m1()).ln_1p();
    let eps_prime = if gamma == 0.0 {
        0.0
    } else if eps <= EXP_OVERFLOW_EPS {
        (gamma * eps.exp_m1()).ln_1p()
    } else {
        eps + gap
    };
    (eps_prime, gap)
}

/// Guarantee of `K ∘ M` when `M` satisfies `guarantee` and `K` meets `condition`.
pub fn amplify(guarantee: &DpGuarantee, condition: MixingCondition) -> Result<DpGuarantee> {
    let gamma = condition.gamma();
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid("gamma", format!("must lie in [0, 1], got {gamma}")));
    }
    let (eps, delta) = (guarantee.epsilon, guarantee.delta);
    let out = match condition {
        MixingCondition::Dobrushin(_) | MixingCondition::EpsDobrushin(_) => (eps, gamma * delta),
        MixingCondition::Doeblin(_) => {
            let (eps_prime, gap) = shrunk_epsilon(eps, gamma);
            (eps_prime, gamma * (1.0 - gap.exp() * (1.0 - delta)))
        }
        MixingCondition::Ultra(_) => {
            let (eps_prime, gap) = shrunk_epsilon(eps, gamma);
            (eps_prime, gamma * delta * gap.exp())
        }
    };
    DpGuarantee::new(out.0.max(0.0), out.1.clamp(0.0, 1.0))
}

/// One row of [`amplify_with_kernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationRow {
    pub condition: MixingCondition,
    /// Order at which γ was measured: `ε̃` for the (γ,ε)-Dobrushin row, `NaN` otherwise.
    pub measured_at: f64,
    pub guarantee: DpGuarantee,
}

/// Measures every coefficient of `kernel` (the (γ,ε)-Dobrushin one at
/// `ε̃` of `guarantee`) and amplifies under each.
pub fn amplify_with_kernel(
    guarantee: &DpGuarantee,
    kernel: &DiscreteKernel,
) -> Result<Vec<AmplificationRow>> {
    let tilde = eps_tilde(guarantee);
    let conditions = [
        (
            MixingCondition::Dobrushin(dobrushin_coeff(kernel)),
            f64::NAN,
        ),
        (
            MixingCondition::EpsDobrushin(eps_dobrushin_coeff(kernel, tilde)),
            tilde,
        ),
        (
            MixingCondition::Doeblin(doeblin_coeff(kernel).gamma),
            f64::NAN,
        ),
        (MixingCondition::Ultra(ultra_coeff(kernel)), f64::NAN),
    ];
    conditions
        .into_iter()
        .map(|(condition, measured_at)| {
            Ok(AmplificationRow {
                condition,
                measured_at,
                guarantee: amplify(guarantee, condition)?,
            })
        })
        .collect()
}

/// Transport operator of a coupling: `h(x, y) = π(x, y)/μ(x)` on `supp μ`.
/// Left points with zero marginal mass are dropped.
pub fn transport_operator(pi: &Coupling) -> Result<DiscreteKernel> {
    let mut inputs = Vec::new();
    let mut rows = Vec::new();
    for (pt, row) in pi.left().iter().zip(pi.mass()) {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            inputs.push(pt.clone());
            rows.push(row.iter().map(|m| m / total).collect());
        }
    }
    DiscreteKernel::new(inputs, pi.right().to_vec(), rows)
}

/// Overlapping mixture decomposition of `(μ, ν)` at level `ε`:
/// `μ = (1−θ)ω + θμ′` and `ν = (1−θ)e^{−ε}ω + (1 − (1−θ)e^{−ε})ν′` with
/// `θ = D_{e^ε}(μ‖ν)` and `μ′ ⊥ ν′`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDecomposition {
    pub eps: f64,
    pub theta: f64,
    /// `None` when `θ = 1`.
    pub omega: Option<DiscreteDist>,
    /// `None` when `θ = 0`.
    pub mu_prime: Option<DiscreteDist>,
    /// `None` when `ν` is exactly `e^{−ε}ω`-dominated, e.g. `μ = ν` at `ε = 0`.
    pub nu_prime: Option<DiscreteDist>,
}

pub fn mixture_decompose(
    mu: &DiscreteDist,
    nu: &DiscreteDist,
    eps: f64,
) -> Result<MixtureDecomposition> {
    if !(eps >= 0.0) {
        return Err(invalid("eps", format!("must be >= 0, got {eps}")));
    }
    let (points, p, q) = align(mu, nu);
    let e = eps.exp();
    let overlap: Vec<f64> = p
        .iter()
        .zip(&q)
        .map(|(&a, &b)| scaled_min(a, b, e))
        .collect();
    // one comparison decides which residual an atom feeds, so μ′ ⊥ ν′ exactly
    let mu_side: Vec<bool> = p
        .iter()
        .zip(&q)
        .map(|(&a, &b)| hinge(a, b, e) > 0.0)
        .collect();
    let mu_rest: Vec<f64> = p
        .iter()
        .zip(&q)
        .zip(&mu_side)
        .map(|((&a, &b), &side)| if side { hinge(a, b, e) } else { 0.0 })
        .collect();
    let nu_rest: Vec<f64> = p
        .iter()
        .zip(&q)
        .zip(&mu_side)
        .map(|((&a, &b), &side)| if side { 0.0 } else { (b - a / e).max(0.0) })
        .collect();
    let theta = hockey_stick_probs(&p, &q, eps);
    let nonzero = |v: &[f64]| v.iter().any(|x| *x > 0.0);
    let omega = nonzero(&overlap)
        .then(|| DiscreteDist::normalized(points.clone(), overlap))
        .transpose()?;
    let mu_prime = nonzero(&mu_rest)
        .then(|| DiscreteDist::normalized(points.clone(), mu_rest))
        .transpose()?;
    let nu_prime = nonzero(&nu_rest)
        .then(|| DiscreteDist::normalized(points, nu_rest))
        .transpose()?;
    Ok(MixtureDecomposition {
        eps,
        theta,
        omega,
        mu_prime,
        nu_prime,
    })
}

impl MixtureDecomposition {
    /// Largest pointwise error of the two mixture identities.
    pub fn reconstruction_error(&self, mu: &DiscreteDist, nu: &DiscreteDist) -> (f64, f64) {
        let (points, p, q) = align(mu, nu);
        let decay = (-self.eps).exp();
        let at =
            |d: &Option<DiscreteDist>, x: &SupportPoint| d.as_ref().map_or(0.0, |d| d.prob_of(x));
        let mut err_mu: f64 = 0.0;
        let mut err_nu: f64 = 0.0;
        for (i, x) in points.iter().enumerate() {
            let w = at(&self.omega, x);
            let rebuilt_mu = (1.0 - self.theta) * w + self.theta * at(&self.mu_prime, x);
            let rebuilt_nu = (1.0 - self.theta) * decay * w
                + (1.0 - (1.0 - self.theta) * decay) * at(&self.nu_prime, x);
            err_mu = err_mu.max((rebuilt_mu - p[i]).abs());
            err_nu = err_nu.max((rebuilt_nu - q[i]).abs());
        }
        (err_mu, err_nu)
    }

    /// `Σ min(μ′(x), ν′(x))`; zero whenever both residuals exist.
    pub fn residual_overlap(&self) -> f64 {
        match (&self.mu_prime, &self.nu_prime) {
            (Some(a), Some(b)) => {
                let (_, p, q) = align(a, b);
                p.iter().zip(&q).map(|(x, y)| x.min(*y)).sum()
            }
            _ => 0.0,
        }
    }
}
