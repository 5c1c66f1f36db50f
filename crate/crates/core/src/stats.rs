//! Small statistical utilities: monotone cubic interpolation, empirical-CDF
//! distances, isotonic regression, and moment summaries.

/// Piecewise-cubic Hermite interpolant with Fritsch–Carlson slope limiting.
///
/// Given strictly increasing abscissae and monotone ordinates, the
/// interpolant is monotone on every interval; evaluation outside the
/// tabulated range clamps to the endpoint values.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() == ys.len() && xs.len() >= 2, "need two or more nodes");
        assert!(
            xs.windows(2).all(|w| w[0] < w[1]),
            "abscissae must be strictly increasing"
        );
        let n = xs.len();
        let mut secants = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            secants.push((ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]));
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            if secants[k - 1] * secants[k] <= 0.0 {
                slopes[k] = 0.0;
            } else {
                slopes[k] = 0.5 * (secants[k - 1] + secants[k]);
            }
        }
        // Fritsch–Carlson limiter: keep (m_k, m_{k+1}) inside the disc of
        // radius 3|d_k| so each cubic piece stays monotone.
        for k in 0..n - 1 {
            if secants[k] == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / secants[k];
            let b = slopes[k + 1] / secants[k];
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                slopes[k] = tau * a * secants[k];
                slopes[k + 1] = tau * b * secants[k];
            }
        }
        Self { xs, ys, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            i => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}

/// Kolmogorov–Smirnov distance between a sorted sample and a reference CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sorted.is_empty(), "empty sample");
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Isotonic regression onto nonincreasing sequences (pool adjacent violators).
pub fn pava_nonincreasing(ys: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, f64)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1.0));
        while blocks.len() >= 2 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            blocks.pop();
            blocks.push(((m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2));
        }
    }
    let mut fit = Vec::with_capacity(ys.len());
    for (m, w) in blocks {
        for _ in 0..w as usize {
            fit.push(m);
        }
    }
    fit
}

/// Sample Pearson correlation coefficient.
pub fn pearson_corr(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need paired samples");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    assert!(xs.len() >= 2, "need two or more observations");
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
