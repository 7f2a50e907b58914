//! Multi-seed, multi-scheme experiments and their tabular output.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::ChannelModel;
use crate::optim::{solve_schemes, OptimOptions};
use crate::scenario::{generate_scenario, Scheme, SystemConfig};
use crate::{Error, Result};

/// Header of the per-run CSV.
pub const RESULTS_HEADER: &str =
    "seed,scheme,sweep_param,sweep_value,se_sum_bps_hz,se_per_sc_bps_hz,iterations,wall_time_s";

/// Header of the per-scheme summary CSV.
pub const SUMMARY_HEADER: &str = "scheme,mean_se,std_se,min_se";

/// Absolute slack allowed in the nesting and monotonicity checks.
pub const NESTING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    #[serde(rename = "total_power_w")]
    TotalPower,
    #[serde(rename = "num_bs_antennas")]
    NumAntennas,
    #[serde(rename = "num_paths_per_ue")]
    NumPaths,
    #[serde(rename = "shod_max_degree")]
    ShodDegree,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TotalPower => "total_power_w",
            SweepParam::NumAntennas => "num_bs_antennas",
            SweepParam::NumPaths => "num_paths_per_ue",
            SweepParam::ShodDegree => "shod_max_degree",
        }
    }

    /// Writes `value` into the matching config field.
    pub fn apply(self, config: &mut SystemConfig, value: f64) -> Result<()> {
        let count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value.is_finite() {
                Ok(value as usize)
            } else {
                Err(Error::validation(self.name(), format!("sweep value {value} is not a count")))
            }
        };
        match self {
            SweepParam::TotalPower => config.total_power_w = value,
            SweepParam::NumAntennas => config.num_bs_antennas = count()?,
            SweepParam::NumPaths => config.num_paths_per_ue = count()?,
            SweepParam::ShodDegree => config.shod_max_degree = count()?,
        }
        Ok(())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total_power_w" => Ok(SweepParam::TotalPower),
            "num_bs_antennas" => Ok(SweepParam::NumAntennas),
            "num_paths_per_ue" => Ok(SweepParam::NumPaths),
            "shod_max_degree" => Ok(SweepParam::ShodDegree),
            other => Err(Error::UnknownKey(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SystemConfig,
    pub seeds: Vec<u64>,
    pub schemes: Vec<Scheme>,
    pub sweep: Option<Sweep>,
    pub options: OptimOptions,
    /// Test hook: drops every MARA result below the cell's other schemes
    /// before the nesting check so the failure path can be exercised end to
    /// end.
    #[doc(hidden)]
    pub inject_nesting_violation: bool,
}

impl ExperimentSpec {
    pub fn new(base: SystemConfig, seeds: Vec<u64>) -> Self {
        let schemes = base.schemes.clone();
        ExperimentSpec {
            base,
            seeds,
            schemes,
            sweep: None,
            options: OptimOptions::default(),
            inject_nesting_violation: false,
        }
    }

    /// Reference experiment: M=4, U=2, G=8, L=6, N=2, seeds 1..=20, all four
    /// schemes, and a five-point total-power sweep from 1 W to 100 W with
    /// 1 W of noise.
    pub fn reference() -> Self {
        let mut spec = ExperimentSpec::new(SystemConfig::reference(), (1..=20).collect());
        spec.sweep = Some(Sweep {
            param: SweepParam::TotalPower,
            values: vec![1.0, 3.0, 10.0, 30.0, 100.0],
        });
        spec
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::validation("seeds", "at least one seed required"));
        }
        if self.schemes.is_empty() {
            return Err(Error::validation("schemes", "at least one scheme required"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::validation("sweep", "no sweep values"));
            }
            if sweep.values.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater)) {
                return Err(Error::validation("sweep", "values must be strictly increasing"));
            }
        }
        self.options.validate()?;
        self.base.validate()
    }

    fn sweep_points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }
}

/// Outcome attached to a row.
#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// The scheme ordering TFA ≤ SMA, ERA ≤ MARA failed in this cell.
    NestingViolation(String),
    /// A recorded objective trace decreased.
    TraceViolation(String),
    /// The cell could not be evaluated.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    /// `None` on diagnostic rows.
    pub scheme: Option<Scheme>,
    pub sweep_param: Option<SweepParam>,
    pub sweep_value: Option<f64>,
    pub se_sum: f64,
    pub se_per_subcarrier: f64,
    pub iterations: usize,
    pub wall_time: f64,
    pub se_trace: Vec<f64>,
    pub status: RowStatus,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    fn diagnostic(seed: u64, sweep: &Option<Sweep>, value: Option<f64>, status: RowStatus) -> Self {
        ResultRow {
            seed,
            scheme: None,
            sweep_param: sweep.as_ref().map(|s| s.param),
            sweep_value: value,
            se_sum: f64::NAN,
            se_per_subcarrier: f64::NAN,
            iterations: 0,
            wall_time: 0.0,
            se_trace: Vec::new(),
            status,
        }
    }

    fn scheme_label(&self) -> &'static str {
        match (&self.status, self.scheme) {
            (RowStatus::NestingViolation(_), _) => "NESTING_VIOLATION",
            (RowStatus::TraceViolation(_), _) => "TRACE_VIOLATION",
            (RowStatus::Failed(_), _) => "ERROR",
            (RowStatus::Ok, Some(s)) => s.as_str(),
            (RowStatus::Ok, None) => "",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match &self.status {
            RowStatus::Ok => None,
            RowStatus::NestingViolation(d) | RowStatus::TraceViolation(d) | RowStatus::Failed(d) => Some(d),
        }
    }
}

fn nesting_violations(rows: &[ResultRow]) -> Vec<String> {
    let se = |s: Scheme| rows.iter().find(|r| r.scheme == Some(s)).map(|r| r.se_sum);
    let pairs = [
        (Scheme::Tfa, Scheme::Sma),
        (Scheme::Tfa, Scheme::Era),
        (Scheme::Sma, Scheme::Mara),
        (Scheme::Era, Scheme::Mara),
    ];
    pairs
        .iter()
        .filter_map(|&(lo, hi)| match (se(lo), se(hi)) {
            (Some(a), Some(b)) if b < a - NESTING_TOL => Some(format!("{hi} {b} < {lo} {a}")),
            _ => None,
        })
        .collect()
}

fn run_cell(spec: &ExperimentSpec, seed: u64, value: Option<f64>) -> Vec<ResultRow> {
    let fail = |msg: String| vec![ResultRow::diagnostic(seed, &spec.sweep, value, RowStatus::Failed(msg))];
    let mut config = spec.base.clone();
    config.seed = seed;
    if let (Some(sweep), Some(v)) = (&spec.sweep, value) {
        if let Err(e) = sweep.param.apply(&mut config, v) {
            return fail(e.to_string());
        }
    }
    let scenario = match generate_scenario(&config) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let model = ChannelModel::new(&scenario);
    let opts = OptimOptions {
        seed,
        ..spec.options.clone()
    };
    let results = match solve_schemes(&model, &spec.schemes, &opts) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };

    let g = config.num_subcarriers as f64;
    let floor = results.iter().map(|r| r.final_se()).fold(f64::INFINITY, f64::min);
    let mut rows: Vec<ResultRow> = results
        .into_iter()
        .map(|r| {
            let mut se = r.final_se();
            if spec.inject_nesting_violation && r.scheme == Scheme::Mara {
                se = floor - 1.0;
            }
            ResultRow {
                seed,
                scheme: Some(r.scheme),
                sweep_param: spec.sweep.as_ref().map(|s| s.param),
                sweep_value: value,
                se_sum: se,
                se_per_subcarrier: se / g,
                iterations: r.iterations,
                wall_time: r.wall_time_s,
                se_trace: r.se_trace,
                status: RowStatus::Ok,
            }
        })
        .collect();

    let mut diagnostics = Vec::new();
    for r in &rows {
        if r.se_trace.windows(2).any(|w| w[1] < w[0] - NESTING_TOL) {
            let scheme = r.scheme.map(Scheme::as_str).unwrap_or_default();
            diagnostics.push(RowStatus::TraceViolation(format!("{scheme} trace decreased: {:?}", r.se_trace)));
        }
    }
    for v in nesting_violations(&rows) {
        diagnostics.push(RowStatus::NestingViolation(v));
    }
    rows.extend(
        diagnostics
            .into_iter()
            .map(|st| ResultRow::diagnostic(seed, &spec.sweep, value, st)),
    );
    rows
}

/// Runs every (seed, sweep value) cell. Rows come out in (seed, sweep value,
/// scheme) order regardless of how cells were scheduled; per-cell
/// diagnostics follow that cell's scheme rows.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let cells: Vec<(u64, Option<f64>)> = spec
        .seeds
        .iter()
        .flat_map(|&s| spec.sweep_points().into_iter().map(move |v| (s, v)))
        .collect();
    let rows: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(seed, value)| run_cell(spec, seed, value))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Whether the `wall_time_s` column carries measurements or zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallTime {
    Record,
    /// Writes 0 so that repeated runs produce byte-identical files.
    Omit,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn results_csv(rows: &[ResultRow], wall: WallTime) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let (param, value) = match (r.sweep_param, r.sweep_value) {
            (Some(p), Some(v)) => (p.name(), fmt_f64(v)),
            _ => ("none", String::new()),
        };
        let wall_time = match wall {
            WallTime::Record => fmt_f64(r.wall_time),
            WallTime::Omit => "0".to_string(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.seed,
            r.scheme_label(),
            param,
            value,
            fmt_f64(r.se_sum),
            fmt_f64(r.se_per_subcarrier),
            r.iterations,
            wall_time
        );
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>, wall: WallTime) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, results_csv(rows, wall)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeStats {
    pub scheme: Scheme,
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub sweep_value: Option<f64>,
    pub mean_ratio: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schemes: Vec<SchemeStats>,
    /// Mean MARA/TFA SE ratio over paired cells; `None` if either is absent.
    pub mara_over_tfa: Option<f64>,
    pub mara_over_tfa_by_sweep: Vec<RatioPoint>,
    /// Cells where ERA ≥ SMA, out of cells with both.
    pub era_at_least_sma: Option<(usize, usize)>,
    /// Cells where SMA beat ERA, as `seed@value`.
    pub era_below_sma: Vec<String>,
    pub diagnostics: usize,
    pub notices: Vec<String>,
}

fn mean_std_min(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (mean, var.sqrt(), min)
}

fn cell_label(seed: u64, value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{seed}@{v}"),
        None => seed.to_string(),
    }
}

/// Per-scheme statistics of `se_sum` plus the MARA/TFA ratio and the
/// ERA-versus-SMA tally.
pub fn summarize(rows: &[ResultRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::Contract("no rows to summarize".into()));
    }
    let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let mut notices = Vec::new();
    let mut schemes = Vec::new();
    for scheme in Scheme::ALL {
        let values: Vec<f64> = ok
            .iter()
            .filter(|r| r.scheme == Some(scheme))
            .map(|r| r.se_sum)
            .collect();
        if values.is_empty() {
            notices.push(format!("{scheme}: no results"));
            continue;
        }
        let (mean, std, min) = mean_std_min(&values);
        schemes.push(SchemeStats {
            scheme,
            count: values.len(),
            mean,
            std,
            min,
        });
    }

    // Cells keyed by (seed, sweep value) in first-appearance order.
    let mut cells: Vec<(u64, Option<f64>)> = Vec::new();
    for r in &ok {
        let key = (r.seed, r.sweep_value);
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    let lookup = |key: (u64, Option<f64>), s: Scheme| {
        ok.iter()
            .find(|r| (r.seed, r.sweep_value) == key && r.scheme == Some(s))
            .map(|r| r.se_sum)
    };

    let mut ratios: Vec<(Option<f64>, f64)> = Vec::new();
    let mut era_wins = 0;
    let mut era_cells = 0;
    let mut era_below_sma = Vec::new();
    for &key in &cells {
        if let (Some(m), Some(t)) = (lookup(key, Scheme::Mara), lookup(key, Scheme::Tfa)) {
            ratios.push((key.1, m / t));
        }
        if let (Some(e), Some(s)) = (lookup(key, Scheme::Era), lookup(key, Scheme::Sma)) {
            era_cells += 1;
            if e >= s {
                era_wins += 1;
            } else {
                era_below_sma.push(cell_label(key.0, key.1));
            }
        }
    }
    let mara_over_tfa = if ratios.is_empty() {
        notices.push("MARA/TFA ratio: not applicable".into());
        None
    } else {
        Some(ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64)
    };
    let mut sweep_values: Vec<Option<f64>> = Vec::new();
    for (v, _) in &ratios {
        if !sweep_values.contains(v) {
            sweep_values.push(*v);
        }
    }
    let mara_over_tfa_by_sweep = sweep_values
        .into_iter()
        .map(|v| {
            let at: Vec<f64> = ratios.iter().filter(|r| r.0 == v).map(|r| r.1).collect();
            RatioPoint {
                sweep_value: v,
                mean_ratio: at.iter().sum::<f64>() / at.len() as f64,
                cells: at.len(),
            }
        })
        .collect();

    Ok(Summary {
        schemes,
        mara_over_tfa,
        mara_over_tfa_by_sweep,
        era_at_least_sma: (era_cells > 0).then_some((era_wins, era_cells)),
        era_below_sma,
        diagnostics: rows.len() - ok.len(),
        notices,
    })
}

impl Summary {
    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:>6} {:>12} {:>12} {:>12}", "scheme", "n", "mean_se", "std_se", "min_se");
        for s in &self.schemes {
            let _ = writeln!(
                out,
                "{:<6} {:>6} {:>12.4} {:>12.4} {:>12.4}",
                s.scheme.as_str(),
                s.count,
                s.mean,
                s.std,
                s.min
            );
        }
        match self.mara_over_tfa {
            Some(r) => {
                let _ = writeln!(out, "MARA/TFA mean ratio: {r:.4}");
                for p in &self.mara_over_tfa_by_sweep {
                    if let Some(v) = p.sweep_value {
                        let _ = writeln!(out, "  at {v}: {:.4} ({} cells)", p.mean_ratio, p.cells);
                    }
                }
            }
            None => {
                let _ = writeln!(out, "MARA/TFA mean ratio: n/a");
            }
        }
        if let Some((wins, cells)) = self.era_at_least_sma {
            let _ = writeln!(out, "ERA >= SMA in {wins}/{cells} cells");
            if !self.era_below_sma.is_empty() {
                let _ = writeln!(out, "  SMA ahead at: {}", self.era_below_sma.join(" "));
            }
        }
        if self.diagnostics > 0 {
            let _ = writeln!(out, "diagnostic rows: {}", self.diagnostics);
        }
        for n in &self.notices {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for s in &self.schemes {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                s.scheme.as_str(),
                fmt_f64(s.mean),
                fmt_f64(s.std),
                fmt_f64(s.min)
            );
        }
        out
    }

    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        let mut base = SystemConfig::reference();
        base.num_subcarriers = 2;
        base.num_paths_per_ue = 3;
        base.shod_max_degree = 1;
        let mut spec = ExperimentSpec::new(base, vec![1]);
        spec.options.max_outer_iters = 3;
        spec.options.inner_grad_iters = 10;
        spec.options.restarts = 1;
        spec
    }

    fn row(seed: u64, scheme: Scheme, se: f64) -> ResultRow {
        ResultRow {
            seed,
            scheme: Some(scheme),
            sweep_param: None,
            sweep_value: None,
            se_sum: se,
            se_per_subcarrier: se / 8.0,
            iterations: 1,
            wall_time: 0.5,
            se_trace: vec![se],
            status: RowStatus::Ok,
        }
    }

    #[test]
    fn single_scheme_single_row() {
        let mut spec = tiny_spec();
        spec.schemes = vec![Scheme::Tfa];
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].scheme, Some(Scheme::Tfa));
        assert!((rows[0].se_per_subcarrier - rows[0].se_sum / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rows_follow_seed_then_scheme_order() {
        let mut spec = tiny_spec();
        spec.seeds = vec![3, 1, 2];
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 12);
        let order: Vec<(u64, Scheme)> = rows.iter().map(|r| (r.seed, r.scheme.unwrap())).collect();
        let want: Vec<(u64, Scheme)> = [3, 1, 2]
            .iter()
            .flat_map(|&s| Scheme::ALL.iter().map(move |&x| (s, x)))
            .collect();
        assert_eq!(order, want);
        assert!(rows.iter().all(ResultRow::is_ok));
    }

    #[test]
    fn injected_violation_adds_diagnostic_row() {
        let mut spec = tiny_spec();
        spec.inject_nesting_violation = true;
        let rows = run_experiment(&spec).unwrap();
        assert!(rows
            .iter()
            .any(|r| matches!(r.status, RowStatus::NestingViolation(_))));
        let csv = results_csv(&rows, WallTime::Omit);
        assert!(csv.contains(",NESTING_VIOLATION,"));
    }

    #[test]
    fn spec_validation() {
        let mut spec = tiny_spec();
        spec.seeds.clear();
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.sweep = Some(Sweep {
            param: SweepParam::TotalPower,
            values: vec![1.0, 1.0],
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_applies_to_config() {
        let mut cfg = SystemConfig::reference();
        SweepParam::NumAntennas.apply(&mut cfg, 6.0).unwrap();
        assert_eq!(cfg.num_bs_antennas, 6);
        assert!(SweepParam::ShodDegree.apply(&mut cfg, 1.5).is_err());
        assert_eq!("num_paths_per_ue".parse::<SweepParam>().unwrap(), SweepParam::NumPaths);
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        emit_csv(&[], &path, WallTime::Record).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{RESULTS_HEADER}\n"));

        let rows = vec![row(4, Scheme::Era, 0.1)];
        emit_csv(&rows, &path, WallTime::Record).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "4,ERA,none,,0.1,0.0125,1,0.5");
        assert!(!text.contains('\r'));

        let first = std::fs::read(&path).unwrap();
        emit_csv(&rows, &path, WallTime::Record).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        assert!(results_csv(&rows, WallTime::Omit).ends_with(",1,0\n"));
    }

    #[test]
    fn summary_statistics() {
        let same = vec![row(1, Scheme::Tfa, 2.0), row(2, Scheme::Tfa, 2.0)];
        let s = summarize(&same).unwrap();
        assert_eq!(s.schemes[0].std, 0.0);
        assert_eq!(s.mara_over_tfa, None);
        assert!(s.notices.iter().any(|n| n.contains("not applicable")));

        // Hand arithmetic: TFA {1, 3} → mean 2, std 1, min 1;
        // MARA {3, 4.5} → mean 3.75, std 0.75; ratios {3, 1.5} → 2.25.
        let rows = vec![
            row(1, Scheme::Tfa, 1.0),
            row(1, Scheme::Mara, 3.0),
            row(2, Scheme::Tfa, 3.0),
            row(2, Scheme::Mara, 4.5),
        ];
        let s = summarize(&rows).unwrap();
        let tfa = &s.schemes[0];
        assert_eq!((tfa.mean, tfa.std, tfa.min), (2.0, 1.0, 1.0));
        let mara = &s.schemes[1];
        assert_eq!((mara.mean, mara.std, mara.min), (3.75, 0.75, 3.0));
        assert_eq!(s.mara_over_tfa, Some(2.25));
        assert_eq!(s.notices.len(), 2);
        assert_eq!(s.to_csv(), "scheme,mean_se,std_se,min_se\nTFA,2,1,1\nMARA,3.75,0.75,3\n");
        assert!(summarize(&[]).is_err());
    }
}
