//! Crossover estimates from disorder sweeps and interface excitation profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ensemble::{SweepParameter, SweepTable};
use crate::error::{Error, Result};
use crate::model::SystemConfig;

/// Minimum number of sampled disorder strengths for either estimator.
pub const MIN_CURVE_SAMPLES: usize = 6;
/// Samples averaged at each end of the curve to estimate a plateau.
pub const PLATEAU_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverMethod {
    GapRatioMidpoint,
    DplrMaximum,
}

impl CrossoverMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::GapRatioMidpoint => "gap_ratio_midpoint",
            Self::DplrMaximum => "dplr_maximum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverEstimate {
    pub method: CrossoverMethod,
    pub w_star: f64,
    /// Adjacent sampled strengths enclosing `w_star`.
    pub bracket: (f64, f64),
}

/// A sampled curve `y(w)`, optionally with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl Curve {
    pub fn new(w: Vec<f64>, y: Vec<f64>) -> Self {
        Self { w, y, stderr: None }
    }

    pub fn with_stderr(mut self, stderr: Vec<f64>) -> Self {
        self.stderr = Some(stderr);
        self
    }

    /// Copy sorted by `w`, checked for length and finiteness.
    fn sorted(&self) -> Result<Curve> {
        let n = self.w.len();
        if self.y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.y.len() });
        }
        if let Some(s) = &self.stderr {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.len() });
            }
        }
        if n < MIN_CURVE_SAMPLES {
            return Err(Error::TooFewSamples { required: MIN_CURVE_SAMPLES, found: n });
        }
        if self.w.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("curve contains non-finite samples".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.w[a].total_cmp(&self.w[b]));
        if order.windows(2).any(|p| self.w[p[0]] == self.w[p[1]]) {
            return Err(Error::InvalidConfig("curve samples repeat a disorder strength".into()));
        }
        Ok(Curve {
            w: order.iter().map(|&i| self.w[i]).collect(),
            y: order.iter().map(|&i| self.y[i]).collect(),
            stderr: self.stderr.as_ref().map(|s| order.iter().map(|&i| s[i]).collect()),
        })
    }

    /// `sqrt(mean(stderr²))`, or zero without errors.
    pub fn pooled_stderr(&self) -> f64 {
        match &self.stderr {
            Some(s) if !s.is_empty() => (s.iter().map(|e| e * e).sum::<f64>() / s.len() as f64).sqrt(),
            _ => 0.0,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Disorder strength at which the gap ratio crosses the midpoint of its
/// weak- and strong-disorder plateaus, each the mean of the three samples at
/// that end. The first crossing from the weak side is reported.
pub fn crossover_from_gap_ratio(curve: &Curve) -> Result<CrossoverEstimate> {
    let c = curve.sorted()?;
    let n = c.w.len();
    let weak = mean(&c.y[..PLATEAU_SAMPLES]);
    let strong = mean(&c.y[n - PLATEAU_SAMPLES..]);
    if (weak - strong).abs() <= 2.0 * c.pooled_stderr() || weak == strong {
        return Err(Error::NoCrossing);
    }
    let mid = 0.5 * (weak + strong);
    for i in 0..n - 1 {
        let (a, b) = (c.y[i] - mid, c.y[i + 1] - mid);
        if a == 0.0 {
            return Ok(CrossoverEstimate {
                method: CrossoverMethod::GapRatioMidpoint,
                w_star: c.w[i],
                bracket: (c.w[i], c.w[i]),
            });
        }
        if a.signum() != b.signum() {
            let f = a / (a - b);
            let w_star = c.w[i] + f * (c.w[i + 1] - c.w[i]);
            return Ok(CrossoverEstimate {
                method: CrossoverMethod::GapRatioMidpoint,
                w_star: w_star.clamp(c.w[i], c.w[i + 1]),
                bracket: (c.w[i], c.w[i + 1]),
            });
        }
    }
    Err(Error::NoCrossing)
}

/// Disorder strength of the sampled emission-ratio maximum, refined by the
/// parabola through it and its neighbours and clamped between them.
pub fn crossover_from_dplr(curve: &Curve) -> Result<CrossoverEstimate> {
    let c = curve.sorted()?;
    let n = c.w.len();
    let (lo, hi) = c.y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let pooled = c.pooled_stderr();
    if hi - lo < 2.0 * pooled || hi == lo {
        return Err(Error::FlatCurve { spread: hi - lo, pooled_stderr: pooled });
    }
    let k = (0..n).fold(0, |best, i| if c.y[i] > c.y[best] { i } else { best });
    let method = CrossoverMethod::DplrMaximum;
    if k == 0 || k == n - 1 {
        return Ok(CrossoverEstimate { method, w_star: c.w[k], bracket: (c.w[k], c.w[k]) });
    }
    let (x0, x1, x2) = (c.w[k - 1], c.w[k], c.w[k + 1]);
    let (y0, y1, y2) = (c.y[k - 1], c.y[k], c.y[k + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    let w_star = if den != 0.0 { (x1 - 0.5 * num / den).clamp(x0, x2) } else { x1 };
    let bracket = if w_star < x1 {
        (x0, x1)
    } else if w_star > x1 {
        (x1, x2)
    } else {
        (x1, x1)
    };
    Ok(CrossoverEstimate { method, w_star, bracket })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteZone {
    Clean,
    Disordered,
}

/// Mean site populations with zone labels and the clean-side decay width.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceProfile {
    pub populations: Vec<f64>,
    pub zones: Vec<SiteZone>,
    /// Population of the last clean site, next to the interface.
    pub interface_value: f64,
    /// Distance into the clean zone, in sites, at which the profile first
    /// falls to `1/e` of `interface_value`, interpolated in `ln P`.
    pub width: f64,
    /// False when the profile stays above `1/e` across the whole clean zone;
    /// `width` is then the clean-zone length.
    pub decays_within_clean_zone: bool,
    pub total: f64,
}

pub fn interface_profile(config: &SystemConfig, populations: &[f64]) -> Result<InterfaceProfile> {
    if populations.len() != config.n_total {
        return Err(Error::DimensionMismatch { expected: config.n_total, found: populations.len() });
    }
    let zones = (0..config.n_total)
        .map(|mu| if mu < config.n_clean { SiteZone::Clean } else { SiteZone::Disordered })
        .collect();
    let total = populations.iter().sum();
    let mut profile = InterfaceProfile {
        populations: populations.to_vec(),
        zones,
        interface_value: 0.0,
        width: 0.0,
        decays_within_clean_zone: true,
        total,
    };
    if config.n_clean == 0 {
        return Ok(profile);
    }
    let edge = config.n_clean - 1;
    let p0 = populations[edge];
    profile.interface_value = p0;
    if !(p0 > 0.0) {
        return Ok(profile);
    }
    let target = p0 / std::f64::consts::E;
    for d in 1..config.n_clean {
        let (prev, here) = (populations[edge + 1 - d], populations[edge - d]);
        if here < target {
            let f = if here > 0.0 { (prev.ln() - target.ln()) / (prev.ln() - here.ln()) } else { 0.0 };
            profile.width = (d - 1) as f64 + f;
            return Ok(profile);
        }
    }
    profile.width = config.n_clean as f64;
    profile.decays_within_clean_zone = false;
    Ok(profile)
}

/// Crossover estimates attached to one sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCrossovers {
    pub gap_ratio: Option<Result<CrossoverEstimate>>,
    pub dplr: Option<Result<CrossoverEstimate>>,
}

/// Groups sweep rows by every axis except the disorder strength and
/// estimates both crossovers per group. Estimators whose summary is absent
/// from the table are `None`.
pub fn sweep_crossovers(table: &SweepTable) -> Vec<RowCrossovers> {
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let key = row
            .parameters
            .iter()
            .filter(|(p, _)| *p != SweepParameter::DisorderStrength)
            .map(|(_, v)| v.to_bits())
            .collect();
        groups.entry(key).or_default().push(i);
    }
    let sweeps_disorder = table
        .rows
        .first()
        .is_some_and(|r| r.parameters.iter().any(|(p, _)| *p == SweepParameter::DisorderStrength));
    let mut out = vec![RowCrossovers { gap_ratio: None, dplr: None }; table.rows.len()];
    if !sweeps_disorder {
        return out;
    }
    for members in groups.values() {
        let point = |i: usize| {
            let row = &table.rows[i];
            let w = row.parameters.iter().find(|(p, _)| *p == SweepParameter::DisorderStrength).map(|(_, v)| *v);
            (w, row.summary.as_ref())
        };
        let any_gap = members.iter().any(|&i| point(i).1.is_some_and(|s| s.gap.is_some()));
        let any_dplr = members.iter().any(|&i| point(i).1.is_some_and(|s| s.dplr.is_some()));
        let gap = any_gap.then(|| {
            let (mut w, mut y, mut e) = (vec![], vec![], vec![]);
            for &i in members {
                if let (Some(wv), Some(g)) = (point(i).0, point(i).1.and_then(|s| s.gap.as_ref())) {
                    w.push(wv);
                    y.push(g.mean_gap_ratio);
                    e.push(g.mean_gap_ratio_stderr);
                }
            }
            crossover_from_gap_ratio(&Curve::new(w, y).with_stderr(e))
        });
        let dplr = any_dplr.then(|| {
            let (mut w, mut y, mut e) = (vec![], vec![], vec![]);
            for &i in members {
                if let (Some(wv), Some(d)) = (point(i).0, point(i).1.and_then(|s| s.dplr)) {
                    w.push(wv);
                    y.push(d.value);
                    e.push(d.stderr.unwrap_or(0.0));
                }
            }
            crossover_from_dplr(&Curve::new(w, y).with_stderr(e))
        });
        for &i in members {
            out[i] = RowCrossovers { gap_ratio: gap.clone(), dplr: dplr.clone() };
        }
    }
    out
}
