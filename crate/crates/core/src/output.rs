//! CSV tables and run manifests.
//!
//! Numbers are written with 17 significant digits in scientific notation so
//! that equal results give byte-identical files. Absent values are empty
//! fields.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{CrossoverEstimate, InterfaceProfile, RowCrossovers, SiteZone};
use crate::ensemble::{SpectrumRecord, SweepTable};
use crate::error::Result as SimResult;
use crate::observables::ObservableSeries;
use crate::spectral::GapStatistics;

pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // normalizes -0.0
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    file.sync_all()
}

pub const SERIES_HEADER: [&str; 4] = ["gamma_t", "mean", "stderr", "n_surviving"];

pub fn write_series_csv(path: &Path, series: &ObservableSeries) -> std::io::Result<()> {
    let rows = series.grid.points().iter().enumerate().map(|(k, &t)| {
        vec![format_number(t), opt(series.value_at(k)), opt(series.stderr_at(k)), series.counts[k].to_string()]
    });
    write_csv(path, &SERIES_HEADER, rows)
}

pub const PROFILE_HEADER: [&str; 3] = ["site", "zone", "mean_population"];

pub fn write_profile_csv(path: &Path, profile: &InterfaceProfile) -> std::io::Result<()> {
    let rows = profile.populations.iter().zip(&profile.zones).enumerate().map(|(mu, (&p, z))| {
        let zone = match z {
            SiteZone::Clean => "clean",
            SiteZone::Disordered => "disordered",
        };
        vec![mu.to_string(), zone.to_string(), format_number(p)]
    });
    write_csv(path, &PROFILE_HEADER, rows)
}

pub const INTERFACE_HEADER: [&str; 4] = ["interface_value", "width", "decays_within_clean_zone", "total"];

pub fn write_interface_csv(path: &Path, profile: &InterfaceProfile) -> std::io::Result<()> {
    let row = vec![
        format_number(profile.interface_value),
        format_number(profile.width),
        profile.decays_within_clean_zone.to_string(),
        format_number(profile.total),
    ];
    write_csv(path, &INTERFACE_HEADER, [row])
}

pub const SPECTRUM_HEADER: [&str; 6] = ["seed", "index", "re", "im", "zone_weight", "retained"];

pub fn write_spectrum_csv(path: &Path, records: &[SpectrumRecord]) -> std::io::Result<()> {
    let rows = records.iter().flat_map(|r| {
        r.eigenvalues.iter().enumerate().map(move |(n, l)| {
            vec![
                r.seed.to_string(),
                n.to_string(),
                format_number(l.re),
                format_number(l.im),
                opt(r.zone_weights.as_ref().map(|w| w[n])),
                (r.retained[n] as u8).to_string(),
            ]
        })
    });
    write_csv(path, &SPECTRUM_HEADER, rows)
}

pub const GAP_HEADER: [&str; 7] = [
    "mean_gap_ratio",
    "mean_gap_ratio_stderr",
    "intrasample_variance",
    "retained_fraction",
    "n_realizations",
    "n_samples",
    "error",
];

pub fn write_gap_statistics_csv(path: &Path, stats: &SimResult<GapStatistics>, n_samples: usize) -> std::io::Result<()> {
    let row = match stats {
        Ok(g) => vec![
            format_number(g.mean_gap_ratio),
            format_number(g.mean_gap_ratio_stderr),
            format_number(g.intrasample_variance),
            format_number(g.retained_fraction),
            g.n_realizations.to_string(),
            n_samples.to_string(),
            String::new(),
        ],
        Err(e) => {
            let mut r = vec![String::new(); 5];
            r.push(n_samples.to_string());
            r.push(e.tag().to_string());
            r
        }
    };
    write_csv(path, &GAP_HEADER, [row])
}

/// Fixed leading columns of the sweep table; axis columns are not repeated
/// because every configuration field already has one.
pub const SWEEP_HEADER: [&str; 21] = [
    "point",
    "n_total",
    "n_clean",
    "n_disordered",
    "xi",
    "directionality",
    "disorder_strength",
    "n_realizations",
    "fallback_realizations",
    "mean_gap_ratio",
    "mean_gap_ratio_stderr",
    "intrasample_variance",
    "retained_fraction",
    "pr",
    "pr_stderr",
    "pr_over_n",
    "pr_over_nd",
    "dplr",
    "dplr_stderr",
    "imbalance",
    "error",
];

/// Crossover columns appended after [`SWEEP_HEADER`].
pub const CROSSOVER_HEADER: [&str; 8] = [
    "gap_ratio_w_star",
    "gap_ratio_bracket_low",
    "gap_ratio_bracket_high",
    "gap_ratio_status",
    "dplr_w_star",
    "dplr_bracket_low",
    "dplr_bracket_high",
    "dplr_status",
];

fn crossover_fields(c: &Option<SimResult<CrossoverEstimate>>) -> [String; 4] {
    match c {
        None => Default::default(),
        Some(Ok(e)) => [
            format_number(e.w_star),
            format_number(e.bracket.0),
            format_number(e.bracket.1),
            "ok".into(),
        ],
        Some(Err(err)) => [String::new(), String::new(), String::new(), err.tag().into()],
    }
}

pub fn write_sweep_csv(path: &Path, table: &SweepTable, crossovers: &[RowCrossovers]) -> std::io::Result<()> {
    let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
    header.insert(20, "imbalance_stderr");
    header.extend(CROSSOVER_HEADER);
    let rows = table.rows.iter().zip(crossovers).map(|(row, cross)| {
        let mut r = vec![row.index.to_string()];
        match &row.config {
            Some(c) => r.extend([
                c.n_total.to_string(),
                c.n_clean.to_string(),
                c.n_disordered.to_string(),
                format_number(c.xi),
                format_number(c.directionality),
                format_number(c.disorder_strength),
            ]),
            None => {
                let value = |name: &str| {
                    row.parameters.iter().find(|(p, _)| p.name() == name).map(|(_, v)| format_number(*v)).unwrap_or_default()
                };
                r.extend(["n_total", "n_clean", "n_disordered", "xi", "directionality", "disorder_strength"].map(value));
            }
        }
        let s = row.summary.as_ref();
        let gap = s.and_then(|s| s.gap.as_ref());
        let pr = s.and_then(|s| s.pr);
        let dplr = s.and_then(|s| s.dplr);
        let imb = s.and_then(|s| s.imbalance);
        r.extend([
            s.map(|s| s.n_realizations.to_string()).unwrap_or_default(),
            s.map(|s| s.fallback_realizations.to_string()).unwrap_or_default(),
            opt(gap.map(|g| g.mean_gap_ratio)),
            opt(gap.map(|g| g.mean_gap_ratio_stderr)),
            opt(gap.map(|g| g.intrasample_variance)),
            opt(gap.map(|g| g.retained_fraction)),
            opt(pr.map(|e| e.value)),
            opt(pr.and_then(|e| e.stderr)),
            opt(row.pr_over_n()),
            opt(row.pr_over_nd()),
            opt(dplr.map(|e| e.value)),
            opt(dplr.and_then(|e| e.stderr)),
            opt(imb.map(|e| e.value)),
            opt(imb.and_then(|e| e.stderr)),
            row.error.as_ref().map(|e| e.tag().to_string()).unwrap_or_default(),
        ]);
        r.extend(crossover_fields(&cross.gap_ratio));
        r.extend(crossover_fields(&cross.dplr));
        r
    });
    write_csv(path, &header, rows)
}

/// Per-point record of a sweep manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointManifest {
    pub index: usize,
    pub parameters: Vec<(String, f64)>,
    pub config_digest: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of `config`.
    pub config_digest: String,
    /// Canonical configuration text the digest is computed over.
    pub config: String,
    pub master_seed: u64,
    pub realizations: usize,
    pub grid: String,
    pub workers: usize,
    pub overrides: Vec<String>,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointManifest>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

/// Seconds since the Unix epoch.
pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Files written by a command, removed again if the command fails.
#[derive(Debug, Default)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Path for `name` inside the output directory, recorded for cleanup.
    pub fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    pub fn remove_all(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
    }
}
