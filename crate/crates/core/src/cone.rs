//! Geometry of the positive cone.
//!
//! Throughout, vectors live in the simplex `S = {x ≥ 0 : |x|₁ = 1}` and
//! matrices act on the left. For an allowable nonnegative matrix `g` (every
//! row and every column contains a strictly positive entry) we use the norms
//! induced by `|·|₁`:
//!
//! * `‖g‖ = max_j Σ_i g(i,j)` — the largest column sum,
//! * `ι(g) = min_j Σ_i g(i,j)` — the smallest column sum,
//!
//! so that `ι(g)|x|₁ ≤ |gx|₁ ≤ ‖g‖|x|₁` on the cone. The projective action is
//! `g·x = gx/|gx|₁` and the norm cocycle is `σ(g, x) = log(|gx|₁/|x|₁)`, which
//! satisfies the chain rule `σ(g₂g₁, x) = σ(g₂, g₁·x) + σ(g₁, x)`.
//!
//! Distances on the simplex use a bounded variant of the projective metric.
//! With `m(x, y) = min { x_i/y_i : y_i > 0 }`,
//!
//! ```text
//! dist(x, y) = (1 − m(x,y) m(y,x)) / (1 + m(x,y) m(y,x))  ∈ [0, 1],
//! ```
//!
//! every allowable matrix acts as a weak contraction of `dist`, strictly
//! positive matrices contract strictly, and `|x − y|₁ ≤ 2 dist(x, y)` bridges
//! back to the flat metric.

use crate::rng;
use rand::Rng;
use thiserror::Error;

/// Why a matrix or direction was rejected at construction.
#[derive(Debug, Error, PartialEq)]
pub enum ConeError {
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
    #[error("expected {expected} entries for a {dim}×{dim} matrix, got {got}")]
    EntryCount {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("entry ({row},{col}) = {value} is not a finite nonnegative number")]
    BadEntry { row: usize, col: usize, value: f64 },
    #[error("row {0} has no positive entry, so the matrix is not allowable")]
    ZeroRow(usize),
    #[error("column {0} has no positive entry, so the matrix is not allowable")]
    ZeroColumn(usize),
    #[error("direction coordinates must be finite, nonnegative, with positive total mass")]
    BadDirection,
    #[error("dimension mismatch: matrix is {matrix}×{matrix}, direction has {direction} coordinates")]
    DimensionMismatch { matrix: usize, direction: usize },
}

/// A point of the simplex: nonnegative coordinates normalized to unit `L¹`
/// mass at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionVector {
    coords: Vec<f64>,
}

impl DirectionVector {
    /// Normalize `coords` onto the simplex. Rejects negative, non-finite, or
    /// all-zero input.
    pub fn new(coords: Vec<f64>) -> Result<Self, ConeError> {
        if coords.is_empty() {
            return Err(ConeError::BadDirection);
        }
        let mut mass = 0.0;
        for &c in &coords {
            if !c.is_finite() || c < 0.0 {
                return Err(ConeError::BadDirection);
            }
            mass += c;
        }
        if mass <= 0.0 || !mass.is_finite() {
            return Err(ConeError::BadDirection);
        }
        let coords = coords.into_iter().map(|c| c / mass).collect();
        Ok(DirectionVector { coords })
    }

    /// The `i`-th vertex `e_i` of the simplex.
    pub fn vertex(dim: usize, i: usize) -> Self {
        assert!(i < dim, "vertex index out of range");
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        DirectionVector { coords }
    }

    /// The barycenter `(1/d, …, 1/d)`.
    pub fn barycenter(dim: usize) -> Self {
        assert!(dim > 0);
        DirectionVector {
            coords: vec![1.0 / dim as f64; dim],
        }
    }

    /// Draw a uniformly distributed simplex point (flat Dirichlet) by
    /// normalizing independent exponentials.
    pub fn sample_uniform(dim: usize, rng: &mut impl Rng) -> Self {
        assert!(dim > 0);
        loop {
            let mut coords = vec![0.0; dim];
            let mut mass = 0.0;
            for c in coords.iter_mut() {
                let u: f64 = rng.gen::<f64>();
                *c = -(1.0 - u).ln();
                mass += *c;
            }
            if mass > 0.0 && mass.is_finite() {
                for c in coords.iter_mut() {
                    *c /= mass;
                }
                return DirectionVector { coords };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `|x − y|₁`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// An allowable nonnegative square matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl PositiveMatrix {
    /// Validate and wrap a row-major entry slice: entries must be finite and
    /// nonnegative, and every row and column must contain a positive entry.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, ConeError> {
        if dim == 0 {
            return Err(ConeError::EmptyMatrix);
        }
        if entries.len() != dim * dim {
            return Err(ConeError::EntryCount {
                dim,
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for (k, &v) in entries.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(ConeError::BadEntry {
                    row: k / dim,
                    col: k % dim,
                    value: v,
                });
            }
        }
        for i in 0..dim {
            if (0..dim).all(|j| entries[i * dim + j] == 0.0) {
                return Err(ConeError::ZeroRow(i));
            }
        }
        for j in 0..dim {
            if (0..dim).all(|i| entries[i * dim + j] == 0.0) {
                return Err(ConeError::ZeroColumn(j));
            }
        }
        Ok(PositiveMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        PositiveMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest column sum: the operator norm induced by `|·|₁` on the cone.
    pub fn op_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.entry(i, j)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest column sum: `ι(g) = min_{|x|₁=1, x ≥ 0} |gx|₁`.
    pub fn op_iota(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.entry(i, j)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Ratio of the largest to the smallest entry; `+∞` when some entry is
    /// zero. Ensembles with a uniform bound on this ratio keep the cocycle
    /// within `log K` of `log ‖g‖` at every simplex point.
    pub fn entry_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &v in &self.entries {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Entry-wise scaling `s·g`, `s > 0`.
    pub fn scale(&self, s: f64) -> Self {
        assert!(s > 0.0 && s.is_finite(), "scale factor must be positive");
        PositiveMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * s).collect(),
        }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let d = self.dim;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        PositiveMatrix { dim: d, entries }
    }

    /// Projective action `g·x = gx/|gx|₁` together with the image mass
    /// `|gx|₁` (which is the cocycle's exponential for unit `x`).
    fn act_with_mass(&self, x: &DirectionVector) -> (DirectionVector, f64) {
        assert_eq!(
            self.dim,
            x.dim(),
            "dimension mismatch between matrix and direction"
        );
        let d = self.dim;
        let mut image = vec![0.0; d];
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.entries[i * d + j] * x.coords[j];
            }
            image[i] = acc;
        }
        let mass: f64 = image.iter().sum();
        debug_assert!(
            mass > 0.0,
            "allowability guarantees positive image mass on the simplex"
        );
        for v in image.iter_mut() {
            *v /= mass;
        }
        (DirectionVector { coords: image }, mass)
    }

    /// Projective action `g·x`.
    pub fn act(&self, x: &DirectionVector) -> DirectionVector {
        self.act_with_mass(x).0
    }

    /// Norm cocycle `σ(g, x) = log |gx|₁` for a simplex point `x`.
    pub fn cocycle(&self, x: &DirectionVector) -> f64 {
        self.act_with_mass(x).1.ln()
    }

    /// Action and cocycle in one pass; the walk simulators use this to avoid
    /// touching the matrix twice per step.
    pub fn step(&self, x: &DirectionVector) -> (DirectionVector, f64) {
        let (image, mass) = self.act_with_mass(x);
        (image, mass.ln())
    }
}

/// `min { x_i / y_i : y_i > 0 }`, the cone gauge of `x` over `y`.
fn gauge(x: &DirectionVector, y: &DirectionVector) -> f64 {
    let mut m = f64::INFINITY;
    for (&xi, &yi) in x.coords.iter().zip(&y.coords) {
        if yi > 0.0 {
            m = m.min(xi / yi);
        }
    }
    debug_assert!(m.is_finite());
    m
}

/// Bounded projective distance on the simplex; see the module docs. Takes
/// values in `[0, 1]`, vanishing exactly on equal directions and reaching `1`
/// exactly when the supports are not mutually dominating.
pub fn hilbert_dist(x: &DirectionVector, y: &DirectionVector) -> f64 {
    assert_eq!(x.dim(), y.dim(), "dimension mismatch in hilbert_dist");
    let product = gauge(x, y) * gauge(y, x);
    // product ∈ [0, 1]: gauges multiply to (min x_i/y_i)(min y_j/x_j) ≤ 1
    (1.0 - product) / (1.0 + product)
}

/// Pairs with distance below this floor are discarded when estimating
/// contraction ratios; the quotient is numerically meaningless there.
const CONTRACTION_PAIR_FLOOR: f64 = 1e-10;

/// Monte Carlo upper estimate of the contraction coefficient
/// `c(g) = sup_{x≠y} dist(g·x, g·y)/dist(x, y)`.
///
/// Samples `n_pairs` uniform simplex pairs, always adding every vertex pair
/// (where the supremum often lives for sparse matrices), and returns the
/// largest observed ratio. The estimate never exceeds the true coefficient,
/// which itself is `≤ 1` for allowable matrices and `< 1` for strictly
/// positive ones.
pub fn contraction_coeff_est(g: &PositiveMatrix, n_pairs: usize, seed: u64) -> f64 {
    let d = g.dim();
    let mut best = 0.0f64;
    let mut consider = |x: &DirectionVector, y: &DirectionVector| {
        let base = hilbert_dist(x, y);
        if base < CONTRACTION_PAIR_FLOOR {
            return;
        }
        let ratio = hilbert_dist(&g.act(x), &g.act(y)) / base;
        if ratio > best {
            best = ratio;
        }
    };
    for i in 0..d {
        for j in (i + 1)..d {
            consider(&DirectionVector::vertex(d, i), &DirectionVector::vertex(d, j));
        }
    }
    let mut rng = rng::stream(seed, "cone/contraction");
    for _ in 0..n_pairs {
        let x = DirectionVector::sample_uniform(d, &mut rng);
        let y = DirectionVector::sample_uniform(d, &mut rng);
        consider(&x, &y);
    }
    best
}
