//! Radially factorized matrix ensembles and the `(S_n, X_n)` walk.
//!
//! A step matrix is `A = e^{Z'} B`, where `Z'` is drawn from a heavy-tailed
//! radial family and `B` from a finite set of strictly positive direction
//! matrices with unit operator norm and entry ratio at most `K`.  The
//! factorization buys three exact properties:
//!
//! * `log ‖A‖ = Z'` has exactly the radial law (the norm-tail condition holds
//!   with tail constants `c₊ = pc`, `c₋ = (1-p)c`);
//! * `A/‖A‖ = B` is independent of `‖A‖`, so the conditional laws of the
//!   normalized matrix given `log ‖A‖ > τ` all equal the direction law;
//! * every entry ratio is bounded by `K`, hence `ι(B) ≥ 1/K` and the cocycle
//!   gap `|σ(A, x) - log ‖A‖| ≤ log K` uniformly in `x`.
//!
//! The walk keeps only the pair `(S, X)`: `S ← S + Z' + log|B X|₁`,
//! `X ← B·X`.  Products of step matrices are never materialized, so heavy
//! radial draws cannot overflow — only logarithms accumulate.

use rand::RngCore;
use thiserror::Error;

use crate::cone::{contraction_coeff_est, DirectionVector, PositiveMatrix};
use crate::heavy_tail::SecondOrderTail;
use crate::rng::{draw_open, split, stream};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("ensemble needs at least one direction matrix")]
    NoDirections,
    #[error("direction {index} has a nonpositive entry; strict positivity is required")]
    NotStrictlyPositive { index: usize },
    #[error("direction {index} has operator norm {norm}, expected 1 within 1e-12")]
    NotNormalized { index: usize, norm: f64 },
    #[error(
        "direction {index} has entry ratio {ratio}, violating condition 3 \
         (Furstenberg-Kesten) with K = {k}"
    )]
    EntryRatioTooLarge { index: usize, ratio: f64, k: f64 },
    #[error("direction {index} is {got}x{got}, ensemble is {want}x{want}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        want: usize,
    },
    #[error("need one weight per direction: {weights} weights for {directions} directions")]
    WeightCountMismatch { weights: usize, directions: usize },
    #[error("weights must be nonnegative and sum to 1, got sum {sum}")]
    BadWeights { sum: f64 },
    #[error("comparability constant must be at least 1, got {0}")]
    BadK(f64),
}

/// One step's randomness: which direction matrix, and the radial log-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDraw {
    pub index: usize,
    pub log_norm: f64,
}

/// The state of a walk after `n` steps from `x0`: `S = log|G_n x0|₁` and
/// `X = G_n · x0`.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub x0: DirectionVector,
    pub n: usize,
    pub s: f64,
    pub x: DirectionVector,
    pub seed: u64,
}

/// Finite mixture of unit-norm strictly positive direction matrices scaled
/// by an independent heavy-tailed radial factor.
#[derive(Debug, Clone)]
pub struct RadialFKEnsemble {
    dim: usize,
    directions: Vec<PositiveMatrix>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    radial: SecondOrderTail,
    k: f64,
}

impl RadialFKEnsemble {
    pub fn new(
        directions: Vec<PositiveMatrix>,
        weights: Vec<f64>,
        radial: SecondOrderTail,
        k: f64,
    ) -> Result<Self, EnsembleError> {
        if directions.is_empty() {
            return Err(EnsembleError::NoDirections);
        }
        if !(k >= 1.0 && k.is_finite()) {
            return Err(EnsembleError::BadK(k));
        }
        let dim = directions[0].dim();
        for (index, b) in directions.iter().enumerate() {
            if b.dim() != dim {
                return Err(EnsembleError::DimensionMismatch {
                    index,
                    got: b.dim(),
                    want: dim,
                });
            }
            if b.entries().iter().any(|&v| v <= 0.0) {
                return Err(EnsembleError::NotStrictlyPositive { index });
            }
            let norm = b.op_norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(EnsembleError::NotNormalized { index, norm });
            }
            let ratio = b.entry_ratio();
            if ratio > k {
                return Err(EnsembleError::EntryRatioTooLarge { index, ratio, k });
            }
        }
        if weights.len() != directions.len() {
            return Err(EnsembleError::WeightCountMismatch {
                weights: weights.len(),
                directions: directions.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(EnsembleError::BadWeights { sum });
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc / sum);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            dim,
            directions,
            weights,
            cumulative,
            radial,
            k,
        })
    }

    /// Random ensemble: `count` direction matrices with entries i.i.d.
    /// uniform on `[1/k', 1]` (so every entry ratio is below `k' < k`), each
    /// normalized to unit operator norm, with uniform weights.
    pub fn random(
        dim: usize,
        count: usize,
        radial: SecondOrderTail,
        k: f64,
        seed: u64,
    ) -> Result<Self, EnsembleError> {
        if !(k > 1.0 && k.is_finite()) {
            return Err(EnsembleError::BadK(k));
        }
        let k_inner = 1.0 + 0.8 * (k - 1.0);
        let mut rng = stream(seed, "ensemble.random-directions");
        let mut directions = Vec::with_capacity(count);
        for _ in 0..count {
            let entries: Vec<f64> = (0..dim * dim)
                .map(|_| 1.0 / k_inner + (1.0 - 1.0 / k_inner) * draw_open(&mut rng))
                .collect();
            let raw = PositiveMatrix::new(dim, entries).expect("positive entries");
            directions.push(raw.scale(1.0 / raw.op_norm()));
        }
        let weights = vec![1.0 / count as f64; count];
        Self::new(directions, weights, radial, k)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[PositiveMatrix] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radial(&self) -> &SecondOrderTail {
        &self.radial
    }

    pub fn fk_constant(&self) -> f64 {
        self.k
    }

    /// Uniform bound on `|σ(A, x) - log ‖A‖|`.
    pub fn cocycle_gap_bound(&self) -> f64 {
        self.k.ln()
    }

    /// Draws one step's randomness: direction index, then radial log-norm.
    pub fn sample_step<R: RngCore + ?Sized>(&self, rng: &mut R) -> StepDraw {
        let u = draw_open(rng);
        let index = self.cumulative.partition_point(|&cw| cw < u);
        let index = index.min(self.directions.len() - 1);
        let log_norm = self.radial.draw(rng);
        StepDraw { index, log_norm }
    }

    /// Materializes `A = e^{Z'} B` for one draw.  Inspection only: a very
    /// heavy radial draw can overflow the scale factor, which the walk
    /// itself never forms.
    pub fn step_matrix(&self, draw: &StepDraw) -> PositiveMatrix {
        self.directions[draw.index].scale(draw.log_norm.exp())
    }

    /// One matrix sample, deterministic per seed.
    pub fn sample_matrix(&self, seed: u64) -> PositiveMatrix {
        let mut rng = stream(seed, "ensemble.matrix");
        let draw = self.sample_step(&mut rng);
        self.step_matrix(&draw)
    }

    fn walk_with_rng<R: RngCore + ?Sized>(
        &self,
        x0: &DirectionVector,
        checkpoints: &[usize],
        seed: u64,
        rng: &mut R,
    ) -> Vec<TrajectorySample> {
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut s = 0.0;
        let mut x = x0.clone();
        let mut step = 0usize;
        for &target in checkpoints {
            while step < target {
                let draw = self.sample_step(rng);
                let (next, ds) = self.directions[draw.index].step(&x);
                s += draw.log_norm + ds;
                x = next;
                step += 1;
            }
            out.push(TrajectorySample {
                x0: x0.clone(),
                n: target,
                s,
                x: x.clone(),
                seed,
            });
        }
        out
    }

    /// Runs the walk `n` steps from `x0`.
    pub fn sample_walk(&self, x0: &DirectionVector, n: usize, seed: u64) -> TrajectorySample {
        let mut rng = stream(seed, "ensemble.walk");
        self.walk_with_rng(x0, &[n], seed, &mut rng)
            .pop()
            .expect("one checkpoint")
    }

    /// Runs one walk, recording the state at each checkpoint (strictly
    /// increasing).  The draw stream is identical to [`Self::sample_walk`]
    /// with the same seed.
    pub fn sample_walk_checkpoints(
        &self,
        x0: &DirectionVector,
        checkpoints: &[usize],
        seed: u64,
    ) -> Vec<TrajectorySample> {
        assert!(
            checkpoints.windows(2).all(|w| w[0] < w[1]),
            "checkpoints must be strictly increasing"
        );
        let mut rng = stream(seed, "ensemble.walk");
        self.walk_with_rng(x0, checkpoints, seed, &mut rng)
    }

    /// Approximate draw from the stationary direction law by burn-in from
    /// the barycenter; distance to stationarity decays like the contraction
    /// coefficient to the `burn_in` power.
    pub fn sample_stationary_start(&self, burn_in: usize, seed: u64) -> DirectionVector {
        let start = DirectionVector::barycenter(self.dim);
        if burn_in == 0 {
            return start;
        }
        let mut rng = stream(seed, "ensemble.stationary");
        self.walk_with_rng(&start, &[burn_in], seed, &mut rng)
            .pop()
            .expect("one checkpoint")
            .x
    }

    /// Worst-case sampled contraction coefficient over the direction set.
    pub fn contraction_estimate(&self, n_pairs: usize, seed: u64) -> f64 {
        self.directions
            .iter()
            .enumerate()
            .map(|(i, b)| contraction_coeff_est(b, n_pairs, split(seed, &format!("contract.{i}"))))
            .fold(0.0, f64::max)
    }

    /// Empirical and structural validation of the ensemble's conditions.
    pub fn check_conditions(&self, n_samples: usize, seed: u64) -> ConditionsReport {
        let mut rng = stream(seed, "ensemble.check");
        let draws: Vec<StepDraw> = (0..n_samples).map(|_| self.sample_step(&mut rng)).collect();

        let strictly_positive = self
            .directions
            .iter()
            .all(|b| b.entries().iter().all(|&v| v > 0.0));
        let fk_satisfied = self
            .directions
            .iter()
            .all(|b| b.entry_ratio() <= self.k + 1e-12);

        let mut distinct = 0usize;
        for (i, b) in self.directions.iter().enumerate() {
            if self.directions[..i].iter().all(|a| a.entries() != b.entries()) {
                distinct += 1;
            }
        }

        let t_probe = 10.0 * self.radial.onset();
        let tail_plus = self.tail_band(&draws, t_probe, true);
        let tail_minus = self.tail_band(&draws, t_probe, false);

        let t0 = self.radial.onset();
        let thresholds = [0.0, t0, 2.0 * t0];
        let mut conditional_direction_law = Vec::with_capacity(thresholds.len());
        let mut cond5_ok = true;
        for &tau in &thresholds {
            let sub: Vec<usize> = draws
                .iter()
                .filter(|d| d.log_norm > tau)
                .map(|d| d.index)
                .collect();
            let m = sub.len().max(1) as f64;
            let mut tv = 0.0;
            let mut within = true;
            for (i, &w) in self.weights.iter().enumerate() {
                let f_hat = sub.iter().filter(|&&j| j == i).count() as f64 / m;
                tv += 0.5 * (f_hat - w).abs();
                let band = 3.0 * (w * (1.0 - w) / m).sqrt();
                if (f_hat - w).abs() > band {
                    within = false;
                }
            }
            cond5_ok &= within;
            conditional_direction_law.push(ThresholdCheck {
                threshold: tau,
                tv_distance: tv,
                conditional_count: sub.len(),
                within_band: within,
            });
        }

        let contraction = self.contraction_estimate(500, split(seed, "check.contraction"));
        let passed = strictly_positive
            && fk_satisfied
            && tail_plus.within_band
            && tail_minus.within_band
            && cond5_ok
            && contraction < 1.0;
        ConditionsReport {
            allowable: strictly_positive,
            strictly_positive,
            fk_satisfied,
            fk_constant: self.k,
            distinct_directions: distinct,
            nontrivial_mixing: distinct >= 2,
            tail_plus,
            tail_minus,
            // A/‖A‖ is independent of ‖A‖ by construction, so the exact
            // conditional law equals the direction law at every threshold
            exact_conditional_tv: 0.0,
            conditional_direction_law,
            cond5_ok,
            contraction,
            passed,
        }
    }

    /// Compares `t^α P[±Z' > t]` against its tail constant, allowing three
    /// binomial standard errors plus the known second-order bias
    /// `|c_± β t^ρ|` of the family at finite `t`.
    fn tail_band(&self, draws: &[StepDraw], t: f64, upper: bool) -> TailBandCheck {
        let n = draws.len() as f64;
        let hits = draws
            .iter()
            .filter(|d| if upper { d.log_norm > t } else { d.log_norm < -t })
            .count() as f64;
        let p_hat = hits / n;
        let scale = t.powf(self.radial.alpha());
        let estimate = scale * p_hat;
        let p_side = if upper {
            self.radial.balance()
        } else {
            1.0 - self.radial.balance()
        };
        let target = p_side * self.radial.tail_constant();
        let stderr = scale * (p_hat * (1.0 - p_hat) / n).sqrt();
        let bias = (target * self.radial.amplitude() * t.powf(self.radial.rho())).abs();
        let within_band = (estimate - target).abs() <= 3.0 * stderr + bias + 1e-12;
        TailBandCheck {
            t,
            estimate,
            target,
            stderr,
            bias_allowance: bias,
            within_band,
        }
    }
}

/// One empirical norm-tail comparison `t^α P̂ vs c_±`.
#[derive(Debug, Clone, Copy)]
pub struct TailBandCheck {
    pub t: f64,
    pub estimate: f64,
    pub target: f64,
    pub stderr: f64,
    pub bias_allowance: f64,
    pub within_band: bool,
}

/// Conditional direction law vs the mixing weights above one threshold.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdCheck {
    pub threshold: f64,
    pub tv_distance: f64,
    pub conditional_count: usize,
    pub within_band: bool,
}

/// Output of [`RadialFKEnsemble::check_conditions`].
#[derive(Debug, Clone)]
pub struct ConditionsReport {
    pub allowable: bool,
    pub strictly_positive: bool,
    pub fk_satisfied: bool,
    pub fk_constant: f64,
    pub distinct_directions: usize,
    pub nontrivial_mixing: bool,
    pub tail_plus: TailBandCheck,
    pub tail_minus: TailBandCheck,
    pub exact_conditional_tv: f64,
    pub conditional_direction_law: Vec<ThresholdCheck>,
    pub cond5_ok: bool,
    pub contraction: f64,
    pub passed: bool,
}

/// CSV export of walk states: `replica,n,S,X_1..X_d,seed`.
pub fn trajectories_to_csv(rows: &[(usize, TrajectorySample)]) -> String {
    let dim = rows.first().map_or(0, |(_, t)| t.x.dim());
    let mut out = String::from("replica,n,S");
    for i in 1..=dim {
        out.push_str(&format!(",X_{i}"));
    }
    out.push_str(",seed\n");
    for (replica, t) in rows {
        out.push_str(&format!("{replica},{},{}", t.n, t.s));
        for v in t.x.coords() {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{}\n", t.seed));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::hilbert_dist;
    use approx::assert_abs_diff_eq;

    fn radial() -> SecondOrderTail {
        SecondOrderTail::new(0.75, -0.5, 0.7, 1.0, 0.75, 3.0).unwrap()
    }

    fn two_direction_ensemble() -> RadialFKEnsemble {
        let b1 = PositiveMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let b1 = b1.scale(1.0 / b1.op_norm());
        let b2 = PositiveMatrix::new(2, vec![1.0, 3.0, 2.0, 1.0]).unwrap();
        let b2 = b2.scale(1.0 / b2.op_norm());
        RadialFKEnsemble::new(vec![b1, b2], vec![0.6, 0.4], radial(), 4.0).unwrap()
    }

    fn barycenter_ensemble(dim: usize) -> RadialFKEnsemble {
        let ones = PositiveMatrix::new(dim, vec![1.0; dim * dim]).unwrap();
        let b = ones.scale(1.0 / ones.op_norm());
        RadialFKEnsemble::new(vec![b], vec![1.0], radial(), 2.0).unwrap()
    }

    #[test]
    fn construction_rejects_invalid_inputs() {
        let good = PositiveMatrix::new(2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        // a zero entry violates strict positivity (identity-style directions)
        let zeroed = PositiveMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            RadialFKEnsemble::new(vec![zeroed], vec![1.0], radial(), 2.0),
            Err(EnsembleError::NotStrictlyPositive { index: 0 })
        ));
        let unnormalized = PositiveMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            RadialFKEnsemble::new(vec![unnormalized], vec![1.0], radial(), 4.0),
            Err(EnsembleError::NotNormalized { .. })
        ));
        let skewed = PositiveMatrix::new(2, vec![8.0, 1.0, 1.0, 2.0]).unwrap();
        let skewed = skewed.scale(1.0 / skewed.op_norm());
        assert!(matches!(
            RadialFKEnsemble::new(vec![skewed], vec![1.0], radial(), 3.0),
            Err(EnsembleError::EntryRatioTooLarge { .. })
        ));
        assert!(matches!(
            RadialFKEnsemble::new(vec![good.clone()], vec![0.7], radial(), 2.0),
            Err(EnsembleError::BadWeights { .. })
        ));
        assert!(matches!(
            RadialFKEnsemble::new(vec![good.clone()], vec![0.5, 0.5], radial(), 2.0),
            Err(EnsembleError::WeightCountMismatch { .. })
        ));
        assert!(matches!(
            RadialFKEnsemble::new(vec![good], vec![1.0], radial(), 0.5),
            Err(EnsembleError::BadK(_))
        ));
        assert!(matches!(
            RadialFKEnsemble::new(vec![], vec![], radial(), 2.0),
            Err(EnsembleError::NoDirections)
        ));
    }

    #[test]
    fn single_direction_barycenter_ensemble_is_valid_and_collapses() {
        let e = barycenter_ensemble(3);
        let x0 = DirectionVector::vertex(3, 0);
        let bary = DirectionVector::barycenter(3);
        for n in [1usize, 2, 7] {
            let t = e.sample_walk(&x0, n, 11);
            assert!(t.x.l1_distance(&bary) < 1e-14, "X_{n} left the barycenter");
        }
        let report = e.check_conditions(20_000, 5);
        assert_eq!(report.distinct_directions, 1);
        assert!(!report.nontrivial_mixing);
    }

    #[test]
    fn sample_matrix_factorizes_exactly() {
        let e = two_direction_ensemble();
        let mut rng = stream(42, "test.factorize");
        for _ in 0..200 {
            let draw = e.sample_step(&mut rng);
            let a = e.step_matrix(&draw);
            assert_abs_diff_eq!(a.op_norm(), draw.log_norm.exp(), epsilon = 1e-12 * a.op_norm());
            let b = &e.directions()[draw.index];
            let rescaled = a.scale(1.0 / a.op_norm());
            for (u, v) in rescaled.entries().iter().zip(b.entries()) {
                assert_abs_diff_eq!(u, v, epsilon = 1e-13);
            }
            assert!(a.entry_ratio() <= e.fk_constant() + 1e-12);
        }
        // deterministic per seed
        let m1 = e.sample_matrix(7).entries().to_vec();
        let m2 = e.sample_matrix(7).entries().to_vec();
        assert_eq!(m1, m2);
    }

    #[test]
    fn direction_frequencies_match_the_weights() {
        let e = two_direction_ensemble();
        let mut rng = stream(3, "test.frequencies");
        let n = 100_000usize;
        let mut counts = [0usize; 2];
        for _ in 0..n {
            counts[e.sample_step(&mut rng).index] += 1;
        }
        for (i, &w) in e.weights().iter().enumerate() {
            let f_hat = counts[i] as f64 / n as f64;
            let band = 3.0 * (w * (1.0 - w) / n as f64).sqrt();
            assert!(
                (f_hat - w).abs() <= band,
                "direction {i}: {f_hat} vs {w} (band {band})"
            );
        }
    }

    #[test]
    fn walk_with_zero_steps_returns_the_start() {
        let e = two_direction_ensemble();
        let x0 = DirectionVector::new(vec![0.3, 0.7]).unwrap();
        let t = e.sample_walk(&x0, 0, 9);
        assert_eq!(t.s, 0.0);
        assert_eq!(t.x.coords(), x0.coords());
        assert_eq!(t.n, 0);
    }

    #[test]
    fn walk_matches_the_cocycle_decomposition() {
        let e = two_direction_ensemble();
        let x0 = DirectionVector::vertex(2, 1);
        let seed = 31;
        let n = 50;
        let t = e.sample_walk(&x0, n, seed);
        // replay the same stream and accumulate the two sums separately
        let mut rng = stream(seed, "ensemble.walk");
        let mut log_norms = 0.0;
        let mut direction_cocycles = 0.0;
        let mut x = x0.clone();
        for _ in 0..n {
            let draw = e.sample_step(&mut rng);
            log_norms += draw.log_norm;
            let (next, ds) = e.directions()[draw.index].step(&x);
            direction_cocycles += ds;
            x = next;
        }
        assert_abs_diff_eq!(t.s, log_norms + direction_cocycles, epsilon = 1e-10);
        assert!(t.x.l1_distance(&x) < 1e-14);
        // the direction part is uniformly bounded by n log K
        assert!(direction_cocycles.abs() <= n as f64 * e.cocycle_gap_bound() + 1e-12);
    }

    #[test]
    fn walk_checkpoints_agree_with_single_walks() {
        let e = two_direction_ensemble();
        let x0 = DirectionVector::barycenter(2);
        let seed = 77;
        let checkpoints = [1usize, 4, 16, 64];
        let states = e.sample_walk_checkpoints(&x0, &checkpoints, seed);
        assert_eq!(states.len(), checkpoints.len());
        for st in &states {
            let solo = e.sample_walk(&x0, st.n, seed);
            assert_eq!(st.s, solo.s, "S diverged at n = {}", st.n);
            assert_eq!(st.x.coords(), solo.x.coords());
        }
    }

    #[test]
    fn cocycle_gap_is_bounded_by_log_k() {
        let e = two_direction_ensemble();
        let mut rng = stream(13, "test.gap");
        for _ in 0..300 {
            let draw = e.sample_step(&mut rng);
            let x = DirectionVector::sample_uniform(2, &mut rng);
            let b = &e.directions()[draw.index];
            let sigma = draw.log_norm + b.cocycle(&x);
            let gap = (sigma - draw.log_norm).abs();
            assert!(
                gap <= e.cocycle_gap_bound() + 1e-12,
                "gap {gap} exceeds log K = {}",
                e.cocycle_gap_bound()
            );
        }
    }

    #[test]
    fn coupled_chains_contract_monotonically() {
        let e = two_direction_ensemble();
        let seed = 19;
        let x0 = DirectionVector::vertex(2, 0);
        let y0 = DirectionVector::vertex(2, 1);
        let r = e.contraction_estimate(2000, 101);
        assert!(r < 1.0, "estimated contraction {r} is not strict");
        let mut rng = stream(seed, "test.coupled");
        let mut x = x0.clone();
        let mut y = y0.clone();
        let d0 = hilbert_dist(&x0, &y0);
        let mut prev = d0;
        for n in 1..=40 {
            let draw = e.sample_step(&mut rng);
            let b = &e.directions()[draw.index];
            x = b.act(&x);
            y = b.act(&y);
            let d = hilbert_dist(&x, &y);
            assert!(d <= prev + 1e-14, "distance grew at step {n}");
            assert!(
                d <= r.powi(n) * d0 + 1e-12,
                "step {n}: {d} > {}",
                r.powi(n) * d0
            );
            prev = d;
        }
        assert!(prev < 1e-3 * d0, "40 coupled steps only reached {prev}");
    }

    #[test]
    fn stationary_start_burn_in_zero_is_the_barycenter() {
        let e = two_direction_ensemble();
        let x = e.sample_stationary_start(0, 3);
        assert_eq!(x.coords(), DirectionVector::barycenter(2).coords());
    }

    #[test]
    fn stationary_sample_is_invariant_under_one_more_step() {
        let e = two_direction_ensemble();
        let m = 4000;
        let mut before = Vec::with_capacity(m);
        let mut after = Vec::with_capacity(m);
        for i in 0..m {
            let x = e.sample_stationary_start(60, split(500, &format!("stat.{i}")));
            before.push(x.coords()[0]);
            let mut rng = stream(split(501, &format!("extra.{i}")), "test.extra-step");
            let draw = e.sample_step(&mut rng);
            after.push(e.directions()[draw.index].act(&x).coords()[0]);
        }
        let (mb, sb) = crate::stats::mean_and_stderr(&before);
        let (ma, sa) = crate::stats::mean_and_stderr(&after);
        let gap = (mb - ma).abs();
        let band = 3.0 * (sb * sb + sa * sa).sqrt();
        assert!(gap <= band, "stationarity violated: {gap} > {band}");
    }

    #[test]
    fn check_conditions_passes_on_the_standard_ensemble() {
        let e = two_direction_ensemble();
        let report = e.check_conditions(150_000, 21);
        assert!(report.allowable && report.strictly_positive);
        assert!(report.fk_satisfied);
        assert!(report.nontrivial_mixing);
        assert_eq!(report.exact_conditional_tv, 0.0);
        assert!(report.tail_plus.within_band, "{:?}", report.tail_plus);
        assert!(report.tail_minus.within_band, "{:?}", report.tail_minus);
        assert!(report.cond5_ok);
        assert!(report.contraction < 1.0);
        assert!(report.passed);
    }

    #[test]
    fn check_conditions_sees_an_empty_left_tail_when_p_is_one() {
        let one_sided = SecondOrderTail::new(0.75, -0.5, 1.0, 1.0, 0.0, 2.5).unwrap();
        let b = PositiveMatrix::new(2, vec![1.0; 4]).unwrap();
        let b = b.scale(1.0 / b.op_norm());
        let e = RadialFKEnsemble::new(vec![b], vec![1.0], one_sided, 2.0).unwrap();
        let report = e.check_conditions(50_000, 8);
        assert_eq!(report.tail_minus.target, 0.0);
        assert!(report.tail_minus.estimate.abs() <= 3.0 * report.tail_minus.stderr + 1e-12);
        assert!(report.tail_minus.within_band);
    }

    #[test]
    fn random_ensembles_validate_and_mix() {
        let e = RadialFKEnsemble::random(3, 3, radial(), 6.0, 4242).unwrap();
        assert_eq!(e.dim(), 3);
        assert_eq!(e.directions().len(), 3);
        for b in e.directions() {
            assert_abs_diff_eq!(b.op_norm(), 1.0, epsilon = 1e-12);
            assert!(b.entry_ratio() < 6.0);
        }
        let report = e.check_conditions(30_000, 9);
        assert!(report.nontrivial_mixing);
        assert!(report.passed);
    }

    #[test]
    fn scalar_ensemble_reduces_to_radial_sums() {
        let b = PositiveMatrix::new(1, vec![1.0]).unwrap();
        let e = RadialFKEnsemble::new(vec![b], vec![1.0], radial(), 1.0).unwrap();
        let x0 = DirectionVector::barycenter(1);
        let n = 200;
        let seed = 64;
        let t = e.sample_walk(&x0, n, seed);
        let mut rng = stream(seed, "ensemble.walk");
        let mut total = 0.0;
        for _ in 0..n {
            total += e.sample_step(&mut rng).log_norm;
        }
        assert_abs_diff_eq!(t.s, total, epsilon = 1e-10);
        assert_eq!(t.x.coords(), &[1.0]);
    }

    #[test]
    fn trajectory_csv_has_the_documented_columns() {
        let e = two_direction_ensemble();
        let x0 = DirectionVector::barycenter(2);
        let rows: Vec<(usize, TrajectorySample)> = (0..3)
            .map(|r| (r, e.sample_walk(&x0, 5, split(2, &format!("csv.{r}")))))
            .collect();
        let csv = trajectories_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("replica,n,S,X_1,X_2,seed"));
        assert_eq!(lines.count(), 3);
        let reparsed: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(reparsed.len(), 6);
    }
}
