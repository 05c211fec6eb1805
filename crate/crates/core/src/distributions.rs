//! Finite discrete distributions and the closed-form noise families.
//!
//! [`DiscreteDist`] is the substrate every exact oracle in this crate works
//! on. Support points are either bare labels or coordinate vectors; anything
//! that needs geometry (W∞, projections) rejects labels.
//!
//! Sampling goes through a single generator, ChaCha20 seeded with
//! `ChaCha20Rng::seed_from_u64`, so a `(seed, n)` pair always reproduces the
//! same draws.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Tolerance on the total mass of a [`DiscreteDist`].
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Relative gap below which the two Lap2 scales are treated as equal.
pub const LAP2_EQUAL_SCALE_REL: f64 = 1e-8;

/// Number of scales on each side of a location used for default quadrature domains.
pub const DOMAIN_SCALES: f64 = 40.0;

/// The generator behind every seeded operation in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A support point: either an opaque label or a coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SupportPoint {
    Coords(Vec<f64>),
    Label(String),
}

impl SupportPoint {
    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            SupportPoint::Coords(c) => Some(c),
            SupportPoint::Label(_) => None,
        }
    }

    fn key(&self) -> PointKey {
        match self {
            // +0.0 normalizes -0.0 so both hash the same
            SupportPoint::Coords(c) => {
                PointKey::Coords(c.iter().map(|x| (x + 0.0).to_bits()).collect())
            }
            SupportPoint::Label(l) => PointKey::Label(l.clone()),
        }
    }
}

impl From<Vec<f64>> for SupportPoint {
    fn from(c: Vec<f64>) -> Self {
        SupportPoint::Coords(c)
    }
}

impl From<f64> for SupportPoint {
    fn from(x: f64) -> Self {
        SupportPoint::Coords(vec![x])
    }
}

impl From<&str> for SupportPoint {
    fn from(l: &str) -> Self {
        SupportPoint::Label(l.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PointKey {
    Coords(Vec<u64>),
    Label(String),
}

#[derive(Deserialize)]
struct RawDist {
    points: Vec<SupportPoint>,
    probs: Vec<f64>,
}

/// Finite-support probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct DiscreteDist {
    points: Vec<SupportPoint>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for DiscreteDist {
    type Error = Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        DiscreteDist::new(raw.points, raw.probs)
    }
}

impl DiscreteDist {
    pub fn new(points: Vec<SupportPoint>, probs: Vec<f64>) -> Result<Self> {
        if points.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some(i) = probs.iter().position(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "probability {i} is {} (must be finite and >= 0)",
                probs[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut seen = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if let Some(j) = seen.insert(p.key(), i) {
                return Err(Error::InvalidDistribution(format!(
                    "support points {j} and {i} coincide"
                )));
            }
        }
        Ok(Self { points, probs })
    }

    /// Distribution over the labels `"0"`, `"1"`, ...
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let points = (0..probs.len())
            .map(|i| SupportPoint::Label(i.to_string()))
            .collect();
        Self::new(points, probs)
    }

    pub fn from_coords(coords: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        Self::new(
            coords.into_iter().map(SupportPoint::Coords).collect(),
            probs,
        )
    }

    pub fn point_mass(point: SupportPoint) -> Self {
        Self {
            points: vec![point],
            probs: vec![1.0],
        }
    }

    pub fn uniform(points: Vec<SupportPoint>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Rescales `weights` to unit mass. Used when the weights come out of
    /// arithmetic whose rounding would break the strict sum check.
    pub fn normalized(points: Vec<SupportPoint>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "cannot normalize weights with total {total}"
            )));
        }
        Self::new(points, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SupportPoint] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `point`, zero when it is not listed.
    pub fn prob_of(&self, point: &SupportPoint) -> f64 {
        let key = point.key();
        self.points
            .iter()
            .position(|p| p.key() == key)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn index_of(&self, point: &SupportPoint) -> Option<usize> {
        let key = point.key();
        self.points.iter().position(|p| p.key() == key)
    }

    /// Coordinates of every support point, failing on the first bare label.
    pub fn coordinates(&self) -> Result<Vec<&[f64]>> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| p.coords().ok_or(Error::MissingCoordinates(i)))
            .collect()
    }

    /// `weight * self + (1 - weight) * other` over the union of supports.
    pub fn mix(&self, other: &DiscreteDist, weight: f64) -> Result<DiscreteDist> {
        let (points, p, q) = align(self, other);
        let probs = p
            .iter()
            .zip(&q)
            .map(|(a, b)| weight * a + (1.0 - weight) * b)
            .collect();
        DiscreteDist::normalized(points, probs)
    }
}

/// Lays two distributions out over the union of their supports. Points of
/// `mu` come first in their original order, followed by points only `nu` has.
pub fn align(mu: &DiscreteDist, nu: &DiscreteDist) -> (Vec<SupportPoint>, Vec<f64>, Vec<f64>) {
    let mut index: HashMap<PointKey, usize> = HashMap::with_capacity(mu.len() + nu.len());
    let mut points = Vec::with_capacity(mu.len() + nu.len());
    let mut p = Vec::with_capacity(mu.len() + nu.len());
    for (pt, &m) in mu.points.iter().zip(&mu.probs) {
        index.insert(pt.key(), points.len());
        points.push(pt.clone());
        p.push(m);
    }
    let mut q = vec![0.0; points.len()];
    for (pt, &m) in nu.points.iter().zip(&nu.probs) {
        match index.get(&pt.key()) {
            Some(&i) => q[i] = m,
            None => {
                points.push(pt.clone());
                p.push(0.0);
                q.push(m);
            }
        }
    }
    (points, p, q)
}

/// Joint distribution on `left × right`, stored as a dense mass matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    left: Vec<SupportPoint>,
    right: Vec<SupportPoint>,
    mass: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn new(
        left: Vec<SupportPoint>,
        right: Vec<SupportPoint>,
        mass: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if mass.len() != left.len() || mass.iter().any(|row| row.len() != right.len()) {
            return Err(Error::InvalidDistribution(format!(
                "coupling mass must be {}x{}",
                left.len(),
                right.len()
            )));
        }
        if mass
            .iter()
            .flatten()
            .any(|m| !(*m >= 0.0) || !m.is_finite())
        {
            return Err(Error::InvalidDistribution(
                "coupling mass must be finite and >= 0".into(),
            ));
        }
        let total: f64 = mass.iter().flatten().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "coupling mass sums to {total}, not 1"
            )));
        }
        Ok(Self { left, right, mass })
    }

    /// The product coupling `mu ⊗ nu`.
    pub fn independent(mu: &DiscreteDist, nu: &DiscreteDist) -> Self {
        let mass = mu
            .probs()
            .iter()
            .map(|p| nu.probs().iter().map(|q| p * q).collect())
            .collect();
        Self {
            left: mu.points().to_vec(),
            right: nu.points().to_vec(),
            mass,
        }
    }

    /// Couples `mu` with itself along the diagonal.
    pub fn identity(mu: &DiscreteDist) -> Self {
        let n = mu.len();
        let mass = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { mu.probs()[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        Self {
            left: mu.points().to_vec(),
            right: mu.points().to_vec(),
            mass,
        }
    }

    pub fn left(&self) -> &[SupportPoint] {
        &self.left
    }

    pub fn right(&self) -> &[SupportPoint] {
        &self.right
    }

    pub fn mass(&self) -> &[Vec<f64>] {
        &self.mass
    }

    pub fn left_marginal(&self) -> Result<DiscreteDist> {
        let w = self.mass.iter().map(|row| row.iter().sum()).collect();
        DiscreteDist::normalized(self.left.clone(), w)
    }

    pub fn right_marginal(&self) -> Result<DiscreteDist> {
        let w = (0..self.right.len())
            .map(|j| self.mass.iter().map(|row| row[j]).sum())
            .collect();
        DiscreteDist::normalized(self.right.clone(), w)
    }
}

/// Isotropic Gaussian 𝒩(mean, variance·I).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDist {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianDist {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        require_positive("variance", variance)?;
        if mean.is_empty() {
            return Err(Error::InvalidParameter {
                name: "mean",
                reason: "dimension must be >= 1".into(),
            });
        }
        Ok(Self { mean, variance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn ln_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let sq: f64 = x.iter().zip(&self.mean).map(|(a, m)| (a - m).powi(2)).sum();
        let d = self.dim() as f64;
        Ok(-0.5 * d * (2.0 * PI * self.variance).ln() - sq / (2.0 * self.variance))
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.ln_density(x).map(f64::exp)
    }
}

/// Laplace distribution Lap(loc, scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceDist {
    pub loc: f64,
    pub scale: f64,
}

impl LaplaceDist {
    pub fn new(loc: f64, scale: f64) -> Result<Self> {
        require_positive("scale", scale)?;
        Ok(Self { loc, scale })
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        -(2.0 * self.scale).ln() - (x - self.loc).abs() / self.scale
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }
}

/// Law of `loc + X₁ + X₂` with independent `X_k ~ Lap(0, lambda_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lap2Dist {
    pub loc: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Lap2Dist {
    pub fn new(loc: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        require_positive("lambda1", lambda1)?;
        require_positive("lambda2", lambda2)?;
        Ok(Self {
            loc,
            lambda1,
            lambda2,
        })
    }

    fn scales_equal(&self) -> bool {
        let (a, b) = (self.lambda1, self.lambda2);
        (a - b).abs() < LAP2_EQUAL_SCALE_REL * a.max(b)
    }

    /// Log-density. Both branches are written with the slower-decaying
    /// exponential factored out so the value stays finite far in the tails.
    pub fn ln_density(&self, x: f64) -> f64 {
        let z = (x - self.loc).abs();
        if self.scales_equal() {
            let l = self.lambda1;
            -(4.0 * l * l).ln() - z / l + (l + z).ln()
        } else {
            let a = self.lambda1.max(self.lambda2);
            let b = self.lambda1.min(self.lambda2);
            // (a e^{-z/a} - b e^{-z/b}) / (2(a² - b²)) with e^{-z/a} pulled out
            let c = z * (1.0 / b - 1.0 / a);
            let bracket = (a - b) - b * (-c).exp_m1();
            -z / a + bracket.ln() - (2.0 * (a - b) * (a + b)).ln()
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }
}

/// Density of [`Lap2Dist`] at `x`.
pub fn lap2_density(x: f64, d: &Lap2Dist) -> f64 {
    d.density(x)
}

/// The closed-form noise families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian(GaussianDist),
    Laplace(LaplaceDist),
    Lap2(Lap2Dist),
}

impl NoiseFamily {
    pub fn dim(&self) -> usize {
        match self {
            NoiseFamily::Gaussian(g) => g.dim(),
            _ => 1,
        }
    }

    pub fn ln_density(&self, x: &[f64]) -> Result<f64> {
        match self {
            NoiseFamily::Gaussian(g) => g.ln_density(x),
            NoiseFamily::Laplace(l) => {
                check_dim(1, x.len())?;
                Ok(l.ln_density(x[0]))
            }
            NoiseFamily::Lap2(l) => {
                check_dim(1, x.len())?;
                Ok(l.ln_density(x[0]))
            }
        }
    }

    /// 1-D log-density. Panics-free only for one-dimensional families.
    pub fn ln_density_1d(&self, x: f64) -> Result<f64> {
        self.ln_density(&[x])
    }

    /// Centre of the family (first coordinate for Gaussians).
    pub fn location(&self) -> f64 {
        match self {
            NoiseFamily::Gaussian(g) => g.mean[0],
            NoiseFamily::Laplace(l) => l.loc,
            NoiseFamily::Lap2(l) => l.loc,
        }
    }

    /// Characteristic width used for quadrature domains.
    pub fn scale(&self) -> f64 {
        match self {
            NoiseFamily::Gaussian(g) => g.variance.sqrt(),
            NoiseFamily::Laplace(l) => l.scale,
            NoiseFamily::Lap2(l) => l.lambda1.max(l.lambda2),
        }
    }

    /// Points where the density is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            NoiseFamily::Gaussian(_) => Vec::new(),
            NoiseFamily::Laplace(l) => vec![l.loc],
            NoiseFamily::Lap2(l) => vec![l.loc],
        }
    }
}

/// Density of any family at `x`.
pub fn density(family: &NoiseFamily, x: &[f64]) -> Result<f64> {
    family.ln_density(x).map(f64::exp)
}

/// `n` i.i.d. draws; identical `(family, seed, n)` gives identical output.
pub fn sample(family: &NoiseFamily, seed: u64, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be >= 1".into(),
        });
    }
    let mut rng = seeded_rng(seed);
    let draws = (0..n)
        .map(|_| match family {
            NoiseFamily::Gaussian(g) => {
                let sd = g.variance.sqrt();
                g.mean
                    .iter()
                    .map(|m| m + sd * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            }
            NoiseFamily::Laplace(l) => vec![l.loc + laplace_draw(&mut rng, l.scale)],
            NoiseFamily::Lap2(l) => {
                let a = laplace_draw(&mut rng, l.lambda1);
                let b = laplace_draw(&mut rng, l.lambda2);
                vec![l.loc + a + b]
            }
        })
        .collect();
    Ok(draws)
}

/// Inverse-CDF draw from Lap(0, scale).
pub(crate) fn laplace_draw<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    // u in (-1/2, 1/2]; 1 - 2|u| is then in [0, 1) and never exactly 0 below
    let u: f64 = 0.5 - rng.random::<f64>();
    let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    -scale * u.signum() * tail.ln()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
