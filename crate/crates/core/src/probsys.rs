//! Finite probability systems: simplex vectors, two-level refinements,
//! independent products, and seeded sampling.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::sum::neumaier;
use crate::tolerances::SUM_TOL;
use crate::{Error, Result};

/// A finite probability distribution `(p_1, …, p_n)`.
///
/// Entries are non-negative and sum to one within [`SUM_TOL`]. Zero entries
/// are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProbVecRepr", into = "ProbVecRepr")]
pub struct ProbVec {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProbVecRepr {
    p: Vec<f64>,
}

impl TryFrom<ProbVecRepr> for ProbVec {
    type Error = Error;

    fn try_from(r: ProbVecRepr) -> Result<Self> {
        ProbVec::new(r.p)
    }
}

impl From<ProbVec> for ProbVecRepr {
    fn from(p: ProbVec) -> Self {
        ProbVecRepr { p: p.probs }
    }
}

/// Validates `values` and builds a [`ProbVec`].
///
/// With `normalize` set, entries are divided by their sum. Without it, the sum
/// must already be within [`SUM_TOL`] of one; such inputs are rescaled exactly
/// unless they are already normalized to rounding, in which case the bits are
/// kept so that re-validation is idempotent.
pub fn make_probvec(values: Vec<f64>, normalize: bool) -> Result<ProbVec> {
    make_probvec_with_tol(values, normalize, SUM_TOL)
}

/// [`make_probvec`] with an explicit sum tolerance.
pub fn make_probvec_with_tol(values: Vec<f64>, normalize: bool, sum_tol: f64) -> Result<ProbVec> {
    if values.is_empty() {
        return Err(Error::ZeroVector);
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue(format!("probability entry {index}")));
        }
        if value < 0.0 {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    let sum = canonical_sum(&values);
    if sum <= 0.0 {
        return Err(Error::ZeroVector);
    }
    if !normalize && (sum - 1.0).abs() > sum_tol {
        return Err(Error::NotNormalized { sum, tol: sum_tol });
    }
    // Already on the simplex to within a few ulps: keep as is.
    if (sum - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(ProbVec { probs: values });
    }
    let probs = values.into_iter().map(|v| v / sum).collect();
    Ok(ProbVec { probs })
}

/// Sum of entries in ascending order, so the result is permutation invariant.
fn canonical_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    neumaier(sorted)
}

impl ProbVec {
    /// Validates a vector that should already be on the simplex.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        make_probvec(values, false)
    }

    /// Normalizes non-negative weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        make_probvec(weights, true)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroVector);
        }
        Ok(ProbVec {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// Point mass at `index` in dimension `n`.
    pub fn degenerate(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: index + 1,
            });
        }
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Ok(ProbVec { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// Always false: a valid vector has at least one entry.
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.probs.iter().copied()
    }

    /// True when one entry carries all the mass.
    pub fn is_degenerate(&self) -> bool {
        self.probs.contains(&1.0)
    }

    /// Strictly positive entries in ascending order.
    pub fn sorted_support(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.probs.iter().copied().filter(|&p| p > 0.0).collect();
        s.sort_by(f64::total_cmp);
        s
    }

    /// Joint vectors are products of validated factors; rounding keeps them
    /// well inside the tolerance, so they are stored without rescaling.
    fn from_joint(probs: Vec<f64>) -> Result<Self> {
        let sum = canonical_sum(&probs);
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::NotNormalized { sum, tol: SUM_TOL });
        }
        Ok(ProbVec { probs })
    }
}

impl std::ops::Index<usize> for ProbVec {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// A two-level system `{p_ij}` with marginals `p_i = Σ_j p_ij`.
///
/// Stored as the marginal, one conditional block `p_ij / p_i` per marginal
/// entry, and the derived joint in row-major order
/// `(p_11, …, p_1m_1, …, p_nm_n)`. A zero marginal entry may carry an empty
/// block (`None`); a supplied block for a zero entry contributes zero mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RefinementRepr", into = "RefinementRepr")]
pub struct Refinement {
    marginal: ProbVec,
    conditionals: Vec<Option<ProbVec>>,
    joint: ProbVec,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RefinementRepr {
    marginal: Vec<f64>,
    conditionals: Vec<Vec<f64>>,
}

impl TryFrom<RefinementRepr> for Refinement {
    type Error = Error;

    fn try_from(r: RefinementRepr) -> Result<Self> {
        let marginal = ProbVec::new(r.marginal)?;
        let blocks = r
            .conditionals
            .into_iter()
            .map(|c| if c.is_empty() { Ok(None) } else { ProbVec::new(c).map(Some) })
            .collect::<Result<Vec<_>>>()?;
        Refinement::with_blocks(marginal, blocks)
    }
}

impl From<Refinement> for RefinementRepr {
    fn from(r: Refinement) -> Self {
        RefinementRepr {
            marginal: r.marginal.probs,
            conditionals: r
                .conditionals
                .into_iter()
                .map(|c| c.map(|c| c.probs).unwrap_or_default())
                .collect(),
        }
    }
}

/// Builds a refinement with one conditional per marginal entry.
pub fn make_refinement(marginal: ProbVec, conditionals: Vec<ProbVec>) -> Result<Refinement> {
    Refinement::with_blocks(marginal, conditionals.into_iter().map(Some).collect())
}

impl Refinement {
    pub fn new(marginal: ProbVec, conditionals: Vec<ProbVec>) -> Result<Self> {
        make_refinement(marginal, conditionals)
    }

    /// Builds a refinement where zero marginal entries may omit their block.
    pub fn with_blocks(marginal: ProbVec, conditionals: Vec<Option<ProbVec>>) -> Result<Self> {
        if conditionals.len() != marginal.len() {
            return Err(Error::DimensionMismatch {
                expected: marginal.len(),
                found: conditionals.len(),
            });
        }
        let mut joint = Vec::new();
        let mut offsets = Vec::with_capacity(marginal.len() + 1);
        for (index, (pi, block)) in marginal.iter().zip(&conditionals).enumerate() {
            offsets.push(joint.len());
            match block {
                Some(c) => joint.extend(c.iter().map(|cij| pi * cij)),
                None if pi > 0.0 => return Err(Error::UndefinedConditional { index }),
                None => {}
            }
        }
        offsets.push(joint.len());
        let joint = ProbVec::from_joint(joint)?;
        Ok(Refinement {
            marginal,
            conditionals,
            joint,
            offsets,
        })
    }

    pub fn marginal(&self) -> &ProbVec {
        &self.marginal
    }

    pub fn conditionals(&self) -> &[Option<ProbVec>] {
        &self.conditionals
    }

    pub fn joint(&self) -> &ProbVec {
        &self.joint
    }

    /// Joint entries `p_i1, …, p_im_i` of block `i`.
    pub fn block(&self, i: usize) -> &[f64] {
        &self.joint.probs[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Block lengths `m_i` (zero for omitted blocks).
    pub fn block_lens(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Two independent systems `A`, `B` with joint `p_ij = p_i^A p_j^B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductRepr", into = "ProductRepr")]
pub struct ProductSystem {
    a: ProbVec,
    b: ProbVec,
    joint: ProbVec,
}

#[derive(Serialize, Deserialize)]
struct ProductRepr {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<ProductRepr> for ProductSystem {
    type Error = Error;

    fn try_from(r: ProductRepr) -> Result<Self> {
        product(ProbVec::new(r.a)?, ProbVec::new(r.b)?)
    }
}

impl From<ProductSystem> for ProductRepr {
    fn from(s: ProductSystem) -> Self {
        ProductRepr {
            a: s.a.probs,
            b: s.b.probs,
        }
    }
}

/// The independent composite of `a` and `b`, row-major over `(i, j)`.
pub fn product(a: ProbVec, b: ProbVec) -> Result<ProductSystem> {
    let joint = a
        .iter()
        .flat_map(|ai| b.iter().map(move |bj| ai * bj))
        .collect();
    let joint = ProbVec::from_joint(joint)?;
    Ok(ProductSystem { a, b, joint })
}

impl ProductSystem {
    pub fn new(a: ProbVec, b: ProbVec) -> Result<Self> {
        product(a, b)
    }

    pub fn a(&self) -> &ProbVec {
        &self.a
    }

    pub fn b(&self) -> &ProbVec {
        &self.b
    }

    pub fn joint(&self) -> &ProbVec {
        &self.joint
    }

    /// The same system viewed as a refinement of `a` with every block equal to `b`.
    pub fn to_refinement(&self) -> Refinement {
        Refinement::new(self.a.clone(), vec![self.b.clone(); self.a.len()])
            .expect("product factors are valid probability vectors")
    }
}

/// Seeded generator of probability vectors with full support.
///
/// Each draw takes `dim` standard exponential variates and normalizes them,
/// which is uniform on the simplex. An optional floor `min_mass` mixes the
/// draw with the uniform vector so every entry is at least `min_mass`.
#[derive(Debug, Clone)]
pub struct SimplexSampler {
    seed: u64,
    min_mass: f64,
    rng: ChaCha8Rng,
}

impl SimplexSampler {
    pub fn new(seed: u64) -> Self {
        SimplexSampler {
            seed,
            min_mass: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Sets the per-entry floor. Requires `0 <= min_mass`; draws in dimension
    /// `d` need `d * min_mass < 1`.
    pub fn with_min_mass(mut self, min_mass: f64) -> Self {
        assert!(min_mass >= 0.0 && min_mass.is_finite(), "min_mass must be >= 0");
        self.min_mass = min_mass;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn min_mass(&self) -> f64 {
        self.min_mass
    }

    /// An independent sampler for worker or sample `stream`, derived from the
    /// same seed. Forks do not depend on how much this sampler has been used.
    pub fn fork(&self, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_add(1));
        SimplexSampler {
            seed: self.seed,
            min_mass: self.min_mass,
            rng,
        }
    }

    pub fn sample(&mut self, dim: usize) -> ProbVec {
        sample_simplex(self, dim)
    }

    /// With probability `rate` returns a point mass at a random position,
    /// otherwise a full-support draw.
    pub fn sample_maybe_degenerate(&mut self, dim: usize, rate: f64) -> ProbVec {
        if rate > 0.0 && self.rng.random::<f64>() < rate {
            let index = self.rng.random_range(0..dim);
            ProbVec::degenerate(dim, index).expect("index drawn below dim")
        } else {
            self.sample(dim)
        }
    }

    pub fn sample_dim(&mut self, range: RangeInclusive<usize>) -> usize {
        self.rng.random_range(range)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draws a probability vector of dimension `dim` from `sampler`.
pub fn sample_simplex(sampler: &mut SimplexSampler, dim: usize) -> ProbVec {
    assert!(dim >= 1, "dimension must be at least 1");
    if dim == 1 {
        return ProbVec { probs: vec![1.0] };
    }
    let floor = sampler.min_mass;
    assert!(
        floor * (dim as f64) < 1.0,
        "min_mass {floor} too large for dimension {dim}"
    );
    let draws: Vec<f64> = (0..dim)
        .map(|_| {
            let x: f64 = sampler.rng.sample(Exp1);
            // Exp1 can return exactly zero only with negligible probability;
            // keep the support full regardless.
            x.max(f64::MIN_POSITIVE)
        })
        .collect();
    let total = canonical_sum(&draws);
    let scale = 1.0 - floor * dim as f64;
    let weights = draws.into_iter().map(|x| floor + scale * x / total).collect();
    make_probvec(weights, true).expect("positive weights normalize")
}
