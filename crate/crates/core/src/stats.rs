//! Fixed-order reductions used by the ensemble layer.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in values {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean and standard error of the mean (`n - 1` normalization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

pub fn mean_and_stderr(values: &[f64]) -> Option<MeanEstimate> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let stderr = if n > 1 {
        let ss = compensated_sum(values.iter().map(|x| (x - mean) * (x - mean)));
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Some(MeanEstimate { mean, stderr, count: n })
}

/// Jackknife standard error of `estimator(mean of samples)`, where every
/// sample is a vector of the same length.
pub fn jackknife_stderr<F>(samples: &[&[f64]], estimator: F) -> Option<f64>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let n = samples.len();
    if n < 2 {
        return if n == 1 { Some(0.0) } else { None };
    }
    let dim = samples[0].len();
    let totals: Vec<f64> = (0..dim).map(|k| compensated_sum(samples.iter().map(|s| s[k]))).collect();
    let mut leave_one_out = Vec::with_capacity(n);
    let mut buf = vec![0.0; dim];
    for s in samples {
        for k in 0..dim {
            buf[k] = (totals[k] - s[k]) / (n - 1) as f64;
        }
        leave_one_out.push(estimator(&buf)?);
    }
    let mean = compensated_sum(leave_one_out.iter().copied()) / n as f64;
    let ss = compensated_sum(leave_one_out.iter().map(|x| (x - mean) * (x - mean)));
    Some((ss * (n - 1) as f64 / n as f64).sqrt())
}
