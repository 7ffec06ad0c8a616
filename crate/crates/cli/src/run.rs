//! Command dispatch and artifact writing.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use holosup::ensemble::{EnsembleSpec, Measure};
use holosup::entropy::{
    dudley_integral_with, predicted_envelope, sharp_upper, sudakov_sweep_with, sudakov_value,
    LogCovering,
};
use holosup::kernel::{
    diagonal_leading_term, diagonal_ratio, diagonal_value, scaling_residual, verify_decay,
    DecayParams, DecayRegime, EnvelopeRow, KernelNormalization,
};
use holosup::metric::{
    covering_csv, covering_number, covering_threshold, dn_metric, small_scale_linearized,
    small_scale_model, CoveringMethod, GeodesicCoveringModel,
};
use holosup::projective::{normalize_lift, NetParams, ProjectivePoint};
use holosup::study::{
    concentration_check, median_mean_gap, median_mean_gap_se, run_study_with, tail_csv,
    tail_integral, tail_probability_from, trials_csv, StudyOptions, StudyReport,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;

pub const TOOL: &str = "holosup";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// File name of the study summary read back by `report`.
pub const STUDY_FILE: &str = "study.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_digest: String,
    /// Values in effect for every parameter the command used, defaults
    /// included.
    pub parameters: BTreeMap<String, Value>,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn file_name(command: Command) -> String {
        format!("manifest_{}.json", command.as_str().replace('-', "_"))
    }
}

/// In-memory artifact set for one command.
struct Output {
    digest: String,
    files: Vec<(String, Vec<u8>)>,
    parameters: BTreeMap<String, Value>,
}

impl Output {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            digest: cfg.digest(),
            files: Vec::new(),
            parameters: BTreeMap::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameter serializes"),
        );
    }

    /// CSV body prefixed with the provenance comment line.
    fn csv(&mut self, name: &str, body: &str) {
        let text = format!("# {TOOL} {VERSION} config_digest={}\n{body}", self.digest);
        self.files.push((name.to_string(), text.into_bytes()));
    }

    /// JSON object with the provenance fields merged in front.
    fn json(&mut self, name: &str, payload: Value) {
        let mut obj = serde_json::Map::new();
        obj.insert("tool".into(), json!(TOOL));
        obj.insert("version".into(), json!(VERSION));
        obj.insert("config_digest".into(), json!(self.digest));
        if let Value::Object(map) = payload {
            obj.extend(map);
        } else {
            obj.insert("data".into(), payload);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serializes");
        text.push('\n');
        self.files.push((name.to_string(), text.into_bytes()));
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the configured command and writes its artifacts into `output_dir`.
pub fn execute(cfg: &ExperimentConfig, output_dir: &Path) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let mut out = Output::new(cfg);
    match cfg.command {
        Command::Study => study(cfg, &mut out)?,
        Command::Concentration => concentration(cfg, &mut out)?,
        Command::MetricTable => metric_table(cfg, &mut out)?,
        Command::Covering => covering(cfg, &mut out)?,
        Command::Dudley => dudley(cfg, &mut out)?,
        Command::Sudakov => sudakov(cfg, &mut out)?,
        Command::KernelSweep => kernel_sweep(cfg, &mut out)?,
        Command::Report => report(cfg, output_dir, &mut out)?,
    }
    let manifest = Manifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: cfg.command.as_str().into(),
        config: cfg.clone(),
        config_digest: out.digest.clone(),
        parameters: out.parameters.clone(),
        files: out
            .files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                file: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    out.files
        .push((Manifest::file_name(cfg.command), text.into_bytes()));
    write_atomically(output_dir, &out.files)?;
    Ok(manifest)
}

/// Writes every file into a scratch directory first and renames them into
/// place only once all writes succeeded.
fn write_atomically(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let scratch = tempfile::Builder::new()
        .prefix(".holosup-tmp-")
        .tempdir_in(dir)
        .map_err(|e| CliError::io(dir, e))?;
    for (name, bytes) in files {
        let path = scratch.path().join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    }
    for (name, _) in files {
        let from = scratch.path().join(name);
        let to = dir.join(name);
        fs::rename(&from, &to).map_err(|e| CliError::io(&to, e))?;
    }
    Ok(())
}

fn default_trials(spec: &EnsembleSpec) -> usize {
    if spec.m == 1 {
        400
    } else {
        200
    }
}

fn study_options(cfg: &ExperimentConfig, out: &mut Output) -> (usize, StudyOptions) {
    let spec = cfg.spec();
    let trials = cfg.usize_override("trials", default_trials(spec));
    let opts = StudyOptions {
        bootstrap_resamples: cfg.usize_override("bootstrap_resamples", 1000),
        record_wall_time: cfg.bool_override("record_wall_time", false),
    };
    out.param("trials", trials);
    out.param("bootstrap_resamples", opts.bootstrap_resamples);
    out.param("record_wall_time", opts.record_wall_time);
    (trials, opts)
}

/// Summary written by `study` and read back by `report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub report: StudyReport,
    pub normalized_mean: Option<f64>,
    pub normalized_mean_se: Option<f64>,
    pub median_mean_gap: Option<f64>,
}

impl StudySummary {
    fn new(report: StudyReport) -> Self {
        Self {
            normalized_mean: report.normalized_mean().ok(),
            normalized_mean_se: report.normalized_mean_se().ok(),
            median_mean_gap: median_mean_gap(&report).ok(),
            report,
        }
    }
}

fn study(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let (trials, opts) = study_options(cfg, out);
    let outcome = run_study_with(cfg.spec(), trials, &cfg.solver, &opts)?;
    out.csv("trials.csv", &trials_csv(&outcome.records));
    out.csv("tail.csv", &tail_csv(&outcome.report));
    let summary = StudySummary::new(outcome.report);
    out.json(
        STUDY_FILE,
        serde_json::to_value(&summary).expect("summary serializes"),
    );
    Ok(())
}

fn concentration(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec();
    let (trials, opts) = study_options(cfg, out);
    let outcome = run_study_with(spec, trials, &cfg.solver, &opts)?;
    let report = &outcome.report;
    let rows = concentration_check(report)?;
    let mut csv = String::from("# concentration v1: r,empirical,bound,se,pass\n");
    csv.push_str("r,empirical,bound,se,pass\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.r, r.empirical, r.bound, r.se, r.pass
        );
    }
    out.csv("concentration.csv", &csv);
    let default_threshold = if spec.n >= 3 {
        sharp_upper(spec.m, spec.n)?
    } else {
        report.median
    };
    let threshold = cfg.f64_override("threshold", default_threshold);
    out.param("threshold", threshold);
    let tail = tail_probability_from(&report.sup_values, threshold)?;
    let integral = tail_integral(&report.sup_values, 20_000)?;
    out.json(
        "concentration.json",
        json!({
            "spec": spec,
            "trials": report.trials,
            "rows": rows,
            "median_mean_gap": median_mean_gap(report).ok(),
            "median_mean_gap_se": median_mean_gap_se(report).ok(),
            "tail": tail,
            "tail_integral": integral,
            "mean": report.mean,
            "tail_integral_relative_gap": (integral - report.mean).abs() / report.mean,
        }),
    );
    Ok(())
}

fn metric_table(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec();
    let points = cfg.usize_override("points", 64).max(2);
    out.param("points", points);
    let base = ProjectivePoint::basis(spec.m, 0)?;
    let mut csv =
        String::from("# metric table v1: r,dn_metric,small_scale_model,small_scale_linearized\n");
    csv.push_str("r,dn_metric,small_scale_model,small_scale_linearized\n");
    for k in 0..points {
        let r = FRAC_PI_2 * k as f64 / (points - 1) as f64;
        let mut lift = vec![Complex64::new(0.0, 0.0); spec.m + 1];
        lift[0] = Complex64::new(r.cos(), 0.0);
        lift[1] = Complex64::new(r.sin(), 0.0);
        let q = normalize_lift(&lift)?;
        let d = dn_metric(spec.m, spec.n, &base, &q)?.value();
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e},{:.17e}",
            r,
            d,
            small_scale_model(spec.n, r)?,
            small_scale_linearized(spec.n, r)?
        );
    }
    out.csv("metric_table.csv", &csv);
    Ok(())
}

fn covering_model(
    cfg: &ExperimentConfig,
    out: &mut Output,
) -> Result<GeodesicCoveringModel, CliError> {
    let m = cfg.spec().m;
    let name = cfg.text_override("covering_model", "unit");
    out.param("covering_model", name);
    let model = match name {
        "calibrated" => GeodesicCoveringModel::calibrated(m)?,
        _ => GeodesicCoveringModel::unit(m),
    };
    out.param("kappa", model.kappa);
    Ok(model)
}

fn covering(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let n = cfg.spec().n;
    let model = covering_model(cfg, out)?;
    let method = match cfg.text_override("method", "formula") {
        "greedy" => CoveringMethod::Greedy,
        _ => CoveringMethod::Formula,
    };
    let points = cfg.usize_override("points", 32).max(2);
    let net = NetParams {
        probe_count: cfg.usize_override("probe_count", NetParams::default().probe_count),
        ..NetParams::default()
    };
    out.param("method", method.as_str());
    out.param("points", points);
    out.param("probe_count", net.probe_count);
    let threshold = covering_threshold(n);
    // Greedy nets at small radii are expensive, so their grid starts higher.
    let lo: f64 = if method == CoveringMethod::Greedy {
        0.5
    } else {
        0.05
    };
    let hi: f64 = 1.5;
    let mut eps: Vec<f64> = (0..points)
        .map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64))
        .filter(|&e| method == CoveringMethod::Formula || e < threshold)
        .collect();
    eps.push(threshold);
    eps.sort_by(f64::total_cmp);
    let rows = eps
        .iter()
        .map(|&e| covering_number(n, e, method, &model, &net))
        .collect::<holosup::Result<Vec<_>>>()?;
    out.csv("covering.csv", &covering_csv(&rows));
    Ok(())
}

fn dudley(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec();
    let model = covering_model(cfg, out)?;
    let quad_points = cfg.usize_override("quad_points", holosup::entropy::DUDLEY_POINTS);
    out.param("quad_points", quad_points);
    let d = dudley_integral_with(spec.n, quad_points, &model)?;
    let l = (spec.n as f64).ln().sqrt();
    let mut csv = String::from(
        "# dudley v1: n,m,i_n,ii_n,total,total_over_sqrt_log_n,ii_over_sqrt_log_n,evaluations\n",
    );
    csv.push_str("n,m,i_n,ii_n,total,total_over_sqrt_log_n,ii_over_sqrt_log_n,evaluations\n");
    let _ = writeln!(
        csv,
        "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
        spec.n,
        spec.m,
        d.i_n,
        d.ii_n,
        d.total,
        d.total / l,
        d.ii_n / l,
        d.evaluations
    );
    out.csv("dudley.csv", &csv);
    Ok(())
}

fn sudakov(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let n = cfg.spec().n;
    let model = covering_model(cfg, out)?;
    let grid = cfg.usize_override("grid_size", holosup::entropy::SUDAKOV_GRID);
    out.param("grid_size", grid);
    let best = sudakov_sweep_with(n, grid, &model)?;
    let top = covering_threshold(n);
    let mut csv = String::from("# sudakov sweep v1: epsilon,value\n");
    csv.push_str("epsilon,value\n");
    for k in 0..grid {
        let e = top * 1e-3f64.powf(1.0 - k as f64 / (grid - 1) as f64);
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e}",
            e,
            sudakov_value(n, e, &model as &dyn LogCovering)
        );
    }
    out.csv("sudakov.csv", &csv);
    out.json(
        "sudakov.json",
        json!({ "n": n, "m": cfg.spec().m, "result": best }),
    );
    Ok(())
}

fn envelope_rows_csv(rows: &[EnvelopeRow]) -> String {
    let mut csv = String::from("# kernel envelope v1: r,kernel_abs,envelope\n");
    csv.push_str("r,kernel_abs,envelope\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{:.17e},{:.17e},{:.17e}",
            r.r, r.kernel_abs, r.envelope
        );
    }
    csv
}

fn kernel_sweep(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec();
    let (m, n) = (spec.m, spec.n);
    let points = cfg.usize_override("points", 129).max(2);
    let defaults = DecayParams::default();
    let params = DecayParams {
        eps: cfg.f64_override("eps", defaults.eps),
        lambda: cfg.f64_override("lambda", defaults.lambda),
        gaussian_window: cfg.f64_override("gaussian_window", defaults.gaussian_window),
        ..defaults
    };
    out.param("points", points);
    out.param("decay", params);
    let (gauss, gauss_ok) = verify_decay(m, n, DecayRegime::Gaussian, &params, points)?;
    let (agmon, agmon_ok) = verify_decay(m, n, DecayRegime::Agmon, &params, points)?;
    out.csv("kernel_gaussian.csv", &envelope_rows_csv(&gauss));
    out.csv("kernel_agmon.csv", &envelope_rows_csv(&agmon));
    // Heisenberg residual on the unit diagonal direction.
    let u = vec![Complex64::new(1.0, 0.0); m];
    let v = vec![Complex64::new(0.0, 0.0); m];
    out.json(
        "kernel.json",
        json!({
            "m": m,
            "n": n,
            "diagonal_unit_volume": diagonal_value(m, n, KernelNormalization::UnitVolume)?,
            "diagonal_fubini_study": diagonal_value(m, n, KernelNormalization::FubiniStudy)?,
            "diagonal_leading_term": diagonal_leading_term(m, n)?,
            "diagonal_ratio": diagonal_ratio(m, n)?,
            "scaling_residual_u1_v0": scaling_residual(m, n, &u, &v)?,
            "gaussian_envelope_holds": gauss_ok,
            "agmon_envelope_holds": agmon_ok,
        }),
    );
    Ok(())
}

/// Study summaries in `dir` and its immediate subdirectories, by path.
pub fn find_studies(dir: &Path) -> Result<Vec<(PathBuf, StudySummary)>, CliError> {
    let mut paths = Vec::new();
    let own = dir.join(STUDY_FILE);
    if own.is_file() {
        paths.push(own);
    }
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let candidate = entry.path().join(STUDY_FILE);
        if entry.path().is_dir() && candidate.is_file() {
            paths.push(candidate);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            let summary: StudySummary =
                serde_json::from_str(&text).map_err(|e| CliError::Input {
                    path: p.clone(),
                    message: e.to_string(),
                })?;
            Ok((p, summary))
        })
        .collect()
}

fn report(cfg: &ExperimentConfig, output_dir: &Path, out: &mut Output) -> Result<(), CliError> {
    let input = match cfg.text_override("input_dir", "") {
        "" => output_dir.to_path_buf(),
        s => PathBuf::from(s),
    };
    let studies = find_studies(&input)?;
    if studies.is_empty() {
        return Err(CliError::Input {
            path: input,
            message: "no study.json found".into(),
        });
    }
    let measure: Measure = studies[0].1.report.spec.measure;
    if let Some((p, _)) = studies
        .iter()
        .find(|(_, s)| s.report.spec.measure != measure)
    {
        return Err(CliError::Input {
            path: p.clone(),
            message: format!(
                "refusing to mix ensemble measures ({} and {})",
                measure.as_str(),
                studies
                    .iter()
                    .map(|(_, s)| s.report.spec.measure.as_str())
                    .find(|m| *m != measure.as_str())
                    .unwrap_or("?")
            ),
        });
    }
    let mut csv = String::from(
        "# report v1: m,n,measure,trials,mean,median,std,mean_se,ratio_to_sqrt_m_log_n,sudakov,sharp_upper\n",
    );
    csv.push_str(
        "m,n,measure,trials,mean,median,std,mean_se,ratio_to_sqrt_m_log_n,sudakov,sharp_upper\n",
    );
    let mut entries = Vec::new();
    for (path, s) in &studies {
        let r = &s.report;
        let env = match r.envelope {
            Some(e) => Some(e),
            None if r.spec.n >= 3 => Some(predicted_envelope(r.spec.m, r.spec.n)?),
            None => None,
        };
        let ratio = r.normalized_mean().ok();
        let _ = writeln!(
            csv,
            "{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{}",
            r.spec.m,
            r.spec.n,
            r.spec.measure.as_str(),
            r.trials,
            r.mean,
            r.median,
            r.std,
            r.mean_se,
            ratio.map(|v| format!("{v:.17e}")).unwrap_or_default(),
            env.map(|e| format!("{:.17e}", e.sudakov_value))
                .unwrap_or_default(),
            env.map(|e| format!("{:.17e}", e.sharp_upper))
                .unwrap_or_default(),
        );
        let rel = path
            .strip_prefix(&input)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        entries.push(json!({
            "source": rel,
            "spec": r.spec,
            "trials": r.trials,
            "mean": r.mean,
            "median": r.median,
            "std": r.std,
            "mean_ci": r.mean_ci,
            "median_ci": r.median_ci,
            "envelope": env,
            "ratio_to_sqrt_m_log_n": ratio,
            "median_mean_gap": s.median_mean_gap,
        }));
    }
    out.param("input_dir", cfg.text_override("input_dir", "<output_dir>"));
    out.csv("report.csv", &csv);
    out.json(
        "report.json",
        json!({ "measure": measure, "studies": entries }),
    );
    Ok(())
}
