//! The `simulate`, `solve` and `bench` subcommands.
//!
//! Each command validates all of its inputs before computing anything and
//! writes its output files only once every result is available.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fcomp_core::{
    associate, build_grid, error_ek, run_sweep, solve as run_solver, synthesize, Algorithm,
    Measurement, RadarConfig, Scene, SolverReport, SweepSpec, TaylorDictionary,
};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::files::{
    format_measurement, format_scene, parse_measurement, parse_scene, read_text, write_text,
};
use crate::presets::{build_spec, Preset};
use crate::report::{
    format_csv, format_ratio_csv, ratio_rows, ratio_verdicts, rows_from, summary, verdicts,
    Provenance, RatioRow, ResultRow, Verdict,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `<path><suffix>`, e.g. `scene.txt` -> `scene.txt.truth`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Where the truth of `simulate --out <path>` goes.
pub fn truth_path(out: &Path) -> PathBuf {
    with_suffix(out, ".truth")
}

/// Where the fig3 ratios of `bench --out <path>` go: `results.csv` -> `results.ratios.csv`.
pub fn ratio_path(out: &Path) -> PathBuf {
    out.with_extension("ratios.csv")
}

fn check_parent_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
        )),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub measurement_path: PathBuf,
    pub truth_path: PathBuf,
    pub measurement: Measurement,
    pub scene: Scene,
}

/// Synthesizes the config's scene and writes `<out>` and `<out>.truth`.
pub fn simulate(config: &Path, out: &Path) -> Result<SimulateOutput> {
    let cfg_file = ExperimentConfig::load(config)?;
    let radar = cfg_file.radar()?;
    let scene = cfg_file.scene()?;
    scene.validate(&radar)?;
    let noise = cfg_file.noise_sigma()?;
    check_parent_dir(out)?;
    let y = synthesize(&radar, &scene, cfg_file.synthesis(), noise, cfg_file.seed.unwrap_or(0))?;
    let truth = truth_path(out);
    write_text(out, &format_measurement(&radar, &y))?;
    write_text(&truth, &format_scene(&scene))?;
    Ok(SimulateOutput {
        measurement_path: out.to_path_buf(),
        truth_path: truth,
        measurement: y,
        scene,
    })
}

fn same_radar(a: &RadarConfig, b: &RadarConfig) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
    a.ms == b.ms
        && a.mc == b.mc
        && close(a.f0, b.f0)
        && close(a.bandwidth, b.bandwidth)
        && close(a.ts, b.ts)
        && close(a.tc, b.tc)
}

/// One line of the estimates table.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub r_hat: f64,
    pub v_hat: f64,
    pub abs_alpha: f64,
    pub phase: f64,
    /// Error against the associated truth; only with a truth file.
    pub error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub report: SolverReport,
    pub rows: Vec<EstimateRow>,
    pub table: String,
}

/// Runs one algorithm on a measurement file.
pub fn solve(
    config: &Path,
    input: &Path,
    truth: Option<&Path>,
    algorithm: &str,
) -> Result<SolveOutput> {
    let cfg_file = ExperimentConfig::load(config)?;
    let algorithm: Algorithm = algorithm.parse()?;
    let radar = cfg_file.radar()?;
    let file = parse_measurement(&read_text(input)?)?;
    if !same_radar(&radar, &file.radar) {
        return Err(CliError::invalid(format!(
            "measurement was recorded with {:?}, config describes {:?}",
            file.radar, radar
        )));
    }
    let scene = truth.map(|p| read_text(p).and_then(|t| parse_scene(&t))).transpose()?;
    let k = match (cfg_file.k, &scene) {
        (Some(k), Some(s)) if k != s.len() => {
            return Err(CliError::invalid(format!(
                "config asks for k = {k} but the truth file has {} targets",
                s.len()
            )));
        }
        (Some(k), _) => k,
        (None, Some(s)) => s.len(),
        (None, None) => return Err(CliError::invalid("set 'k' in the config or pass --truth")),
    };
    let options = cfg_file.solver_options(k)?;
    let (nr, nv) = cfg_file.grid_size(&radar);
    let grid = build_grid(&radar, nr, nv, cfg_file.normalization())?;
    let dict = if algorithm.is_factorized() {
        TaylorDictionary::factorized(&radar, &grid)?
    } else {
        TaylorDictionary::with_exact(&radar, &grid)?
    };
    let report = run_solver(&file.measurement, &dict, &options, algorithm)?;
    if report
        .estimates
        .iter()
        .any(|e| !(e.r_hat.is_finite() && e.v_hat.is_finite() && e.alpha_hat.norm().is_finite()))
    {
        return Err(CliError::Numeric("solver produced non-finite estimates".into()));
    }

    let errors: Option<Vec<f64>> = match &scene {
        Some(s) => {
            let truths: Vec<(f64, f64)> = s.targets.iter().map(|t| (t.r, t.v)).collect();
            let est: Vec<(f64, f64)> = report.estimates.iter().map(|e| (e.r_hat, e.v_hat)).collect();
            let perm = associate(&radar, &truths, &est)?;
            let mut per_estimate = vec![0.0; est.len()];
            for (i, &j) in perm.iter().enumerate() {
                per_estimate[j] = error_ek(&radar, truths[i], est[j]);
            }
            Some(per_estimate)
        }
        None => None,
    };
    let rows: Vec<EstimateRow> = report
        .estimates
        .iter()
        .enumerate()
        .map(|(j, e)| EstimateRow {
            r_hat: e.r_hat,
            v_hat: e.v_hat,
            abs_alpha: e.alpha_hat.norm(),
            phase: e.alpha_hat.arg(),
            error: errors.as_ref().map(|es| es[j]),
        })
        .collect();
    let table = estimates_table(algorithm, &report, &rows);
    Ok(SolveOutput { report, rows, table })
}

fn estimates_table(algorithm: Algorithm, report: &SolverReport, rows: &[EstimateRow]) -> String {
    let mut s = format!(
        "# algorithm={} k={} residual_norm={:.6e} time_s={:.6e}\n",
        algorithm,
        rows.len(),
        report.residual_norm,
        report.wall_time
    );
    let with_error = rows.iter().any(|r| r.error.is_some());
    s.push_str("k r_hat v_hat abs_alpha phase_rad");
    if with_error {
        s.push_str(" E");
    }
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        write!(s, "{} {:.9e} {:.9e} {:.9e} {:.9e}", i + 1, r.r_hat, r.v_hat, r.abs_alpha, r.phase).unwrap();
        if let Some(e) = r.error {
            write!(s, " {e:.9e}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// SHA-256 of the resolved sweep, which fixes every non-timing output.
pub fn spec_digest(preset: Preset, spec: &SweepSpec) -> String {
    let canonical = format!("{preset}\n{:?}", SweepSpec { parallel: true, ..spec.clone() });
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub spec: SweepSpec,
    pub provenance: Provenance,
    pub rows: Vec<ResultRow>,
    pub ratios: Vec<RatioRow>,
    pub verdicts: Vec<Verdict>,
    pub summary: String,
    pub csv_path: PathBuf,
    pub ratio_path: Option<PathBuf>,
}

/// Runs a preset sweep and writes its CSV (plus the ratio CSV for fig3).
pub fn bench(
    preset: &str,
    config: Option<&Path>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<BenchOutput> {
    let preset: Preset = preset.parse()?;
    let cfg_file = config.map(ExperimentConfig::load).transpose()?;
    let spec = build_spec(preset, cfg_file.as_ref(), trials, seed)?;
    check_parent_dir(out)?;

    let result = run_sweep(&spec)?;
    if result
        .entries
        .iter()
        .any(|e| !(e.mean_mr.is_finite() && e.mean_time.is_finite()) || e.mean_ahe.is_some_and(|a| !a.is_finite()))
    {
        return Err(CliError::Numeric("sweep produced non-finite metrics".into()));
    }
    let provenance = Provenance {
        experiment: preset.name().to_string(),
        config_digest: spec_digest(preset, &spec),
        base_seed: spec.base_seed,
        version: VERSION.to_string(),
    };
    let rows = rows_from(preset.name(), &result);
    let ratios = if preset == Preset::Fig3 { ratio_rows(&result) } else { Vec::new() };
    let mut checks = verdicts(&result);
    if !ratios.is_empty() {
        checks.extend(ratio_verdicts(&ratios));
    }
    let csv = format_csv(&provenance, &rows)?;
    let ratio_csv = (!ratios.is_empty())
        .then(|| format_ratio_csv(&provenance, &ratios))
        .transpose()?;

    write_text(out, &csv)?;
    let ratio_file = match ratio_csv {
        Some(text) => {
            let p = ratio_path(out);
            write_text(&p, &text)?;
            Some(p)
        }
        None => None,
    };
    Ok(BenchOutput {
        summary: summary(&rows, &ratios, &checks),
        spec,
        provenance,
        rows,
        ratios,
        verdicts: checks,
        csv_path: out.to_path_buf(),
        ratio_path: ratio_file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(truth_path(Path::new("a/y.txt")), PathBuf::from("a/y.txt.truth"));
        assert_eq!(ratio_path(Path::new("r.csv")), PathBuf::from("r.ratios.csv"));
        assert_eq!(ratio_path(Path::new("r")), PathBuf::from("r.ratios.csv"));
    }

    #[test]
    fn digest_tracks_inputs_not_scheduling() {
        let a = build_spec(Preset::Fig3, None, Some(5), Some(1)).unwrap();
        let serial = SweepSpec { parallel: false, ..a.clone() };
        assert_eq!(spec_digest(Preset::Fig3, &a), spec_digest(Preset::Fig3, &serial));
        let b = build_spec(Preset::Fig3, None, Some(5), Some(2)).unwrap();
        assert_ne!(spec_digest(Preset::Fig3, &a), spec_digest(Preset::Fig3, &b));
        assert_eq!(spec_digest(Preset::Fig3, &a).len(), 64);
    }

    #[test]
    fn missing_output_directory_is_an_io_error() {
        let err = check_parent_dir(Path::new("/definitely/not/here/out.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(check_parent_dir(Path::new("out.csv")).is_ok());
    }
}
