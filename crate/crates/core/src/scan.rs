//! Potential-energy-curve scans with per-point checkpointing.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ansatz::{AnsatzKind, AnsatzSpec, Entangler, DEFAULT_LAYERS};
use crate::encodings::{FermionQubitMapping, MappingScheme};
use crate::hamio::{parse_fcidump, to_fermion_hamiltonian};
use crate::vqe::{
    minimize, supports_parameter_shift, GradientMode, InitialParams, Optimizer, VqeConfig,
    VqeResult,
};

pub const CHECKPOINT_VERSION: u32 = 1;
pub const CHECKPOINT_SUFFIX: &str = ".ckpt.json";
pub const CSV_HEADER: [&str; 8] = [
    "index",
    "label",
    "parameter",
    "energy_hartree",
    "iterations",
    "evals",
    "converged",
    "wall_time_s",
];

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("corrupt checkpoint {path}: {message}")]
    CorruptCheckpoint { path: PathBuf, message: String },
    #[error("checkpoint {path} has version {found}, this build reads version {expected}")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error(
        "checkpoint was written for manifest {checkpoint} but the current manifest hashes to \
         {manifest}; the manifest changed since the checkpoint, rerun without --resume to start over"
    )]
    HashMismatch { checkpoint: String, manifest: String },
    #[error("no checkpoint at {0} to resume from")]
    NoCheckpoint(PathBuf),
    #[error("parallelism must be at least 1")]
    ZeroParallelism,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScanError + '_ {
    move |source| ScanError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzEntry {
    pub kind: AnsatzKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangler: Option<Entangler>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeEntry {
    #[serde(default = "default_optimizer")]
    pub optimizer: Optimizer,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_optimizer() -> Optimizer {
    Optimizer::NelderMead
}

fn default_tol() -> f64 {
    VqeConfig::default().tol
}

fn default_max_iter() -> usize {
    VqeConfig::default().max_iter
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedSettings {
    pub mapping: MappingScheme,
    pub ansatz: AnsatzEntry,
    pub vqe: VqeEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPoint {
    pub label: String,
    pub parameter: f64,
    pub fcidump: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanManifest {
    pub shared: SharedSettings,
    #[serde(default)]
    pub warm_start: bool,
    pub points: Vec<ScanPoint>,
    /// Directory that relative `fcidump` paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ScanManifest {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, String> {
        let mut manifest: ScanManifest = serde_json::from_str(text).map_err(|e| e.to_string())?;
        manifest.base_dir = base_dir.to_path_buf();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self, ScanError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::from_json(&text, &base).map_err(|message| ScanError::Manifest {
            path: path.to_path_buf(),
            message,
        })
    }

    fn validate(&self) -> Result<(), String> {
        if self.points.is_empty() {
            return Err("no points".into());
        }
        let mut seen = BTreeSet::new();
        for p in &self.points {
            if !seen.insert(p.label.as_str()) {
                return Err(format!("duplicate label {:?}", p.label));
            }
            let path = self.resolve(&p.fcidump);
            if !path.is_file() {
                return Err(format!("point {:?}: {} does not exist", p.label, path.display()));
            }
        }
        let v = &self.shared.vqe;
        if v.tol.is_nan() || v.tol <= 0.0 || v.max_iter == 0 {
            return Err("vqe.tol must be > 0 and vqe.max_iter >= 1".into());
        }
        if self.shared.ansatz.layers == Some(0) {
            return Err("ansatz.layers must be >= 1".into());
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// sha256 over the canonical JSON re-serialization of the manifest.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("manifest serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn vqe_config(&self, init: InitialParams) -> VqeConfig {
        let v = &self.shared.vqe;
        VqeConfig {
            optimizer: v.optimizer,
            tol: v.tol,
            max_iter: v.max_iter,
            seed: v.seed,
            init,
            ..VqeConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum PointStatus {
    Pending,
    Running,
    Done { result: VqeResult, wall_time_s: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub label: String,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub manifest_hash: String,
    pub seed: u64,
    pub created_unix: u64,
    pub updated_unix: u64,
    pub points: Vec<PointRecord>,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Checkpoint {
    pub fn fresh(manifest: &ScanManifest) -> Self {
        let now = now_unix();
        Self {
            version: CHECKPOINT_VERSION,
            manifest_hash: manifest.content_hash(),
            seed: manifest.shared.vqe.seed,
            created_unix: now,
            updated_unix: now,
            points: manifest
                .points
                .iter()
                .map(|p| PointRecord {
                    label: p.label.clone(),
                    status: PointStatus::Pending,
                })
                .collect(),
        }
    }

    pub fn ensure_matches(&self, manifest: &ScanManifest) -> Result<(), ScanError> {
        let hash = manifest.content_hash();
        if self.manifest_hash != hash {
            return Err(ScanError::HashMismatch {
                checkpoint: self.manifest_hash.clone(),
                manifest: hash,
            });
        }
        Ok(())
    }

    pub fn done_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| matches!(p.status, PointStatus::Done { .. }))
            .count()
    }
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ScanError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), ScanError> {
    let mut bytes = serde_json::to_vec_pretty(checkpoint).expect("checkpoint serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ScanError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ScanError::NoCheckpoint(path.to_path_buf()))
        }
        Err(e) => return Err(io_err(path)(e)),
    };
    let corrupt = |message: String| ScanError::CorruptCheckpoint {
        path: path.to_path_buf(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let found = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| corrupt("missing version".into()))?;
    if found != CHECKPOINT_VERSION as u64 {
        return Err(ScanError::VersionMismatch {
            path: path.to_path_buf(),
            found: found as u32,
            expected: CHECKPOINT_VERSION,
        });
    }
    let checkpoint: Checkpoint =
        serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    let h = &checkpoint.manifest_hash;
    if h.len() != 64 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(corrupt(format!("manifest_hash {h:?} is not a sha256 hex digest")));
    }
    Ok(checkpoint)
}

/// `curve.csv` → `curve.ckpt.json`.
pub fn checkpoint_path_for(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_owned()).unwrap_or_default();
    let mut name = stem;
    name.push(CHECKPOINT_SUFFIX);
    csv.with_file_name(name)
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub parallelism: usize,
    pub resume: bool,
    pub out_csv: PathBuf,
    /// Defaults to [`checkpoint_path_for`] of `out_csv`.
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many points finish in this invocation, leaving the
    /// checkpoint as a killed run would.
    pub stop_after: Option<usize>,
    /// Record `wall_time_s` as 0 so the CSV depends only on the inputs.
    pub reproducible: bool,
}

impl ScanOptions {
    pub fn new(out_csv: impl Into<PathBuf>) -> Self {
        Self {
            parallelism: 1,
            resume: false,
            out_csv: out_csv.into(),
            checkpoint: None,
            stop_after: None,
            reproducible: false,
        }
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint
            .clone()
            .unwrap_or_else(|| checkpoint_path_for(&self.out_csv))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    /// Energy per manifest point; `None` for failed or unfinished points.
    pub energies: Vec<Option<f64>>,
    pub csv: Option<PathBuf>,
    pub checkpoint: PathBuf,
    /// Points minimized by this invocation.
    pub ran: usize,
    pub evals: usize,
    pub failed: usize,
    pub interrupted: bool,
}

/// Parses, maps and minimizes one point.
pub fn solve_point(
    manifest: &ScanManifest,
    point: &ScanPoint,
    init: Option<Vec<f64>>,
) -> Result<VqeResult, String> {
    let path = manifest.resolve(&point.fcidump);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let ints = parse_fcidump(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let shared = &manifest.shared;
    let mapping =
        FermionQubitMapping::new(shared.mapping, ints.modes()).map_err(|e| e.to_string())?;
    let hamiltonian = mapping
        .map_sum(&to_fermion_hamiltonian(&ints))
        .map_err(|e| e.to_string())?;
    let spec = AnsatzSpec {
        kind: shared.ansatz.kind,
        scheme: shared.mapping,
        modes: ints.modes(),
        nelec: ints.nelec,
        layers: shared.ansatz.layers.unwrap_or(DEFAULT_LAYERS),
        entangler: Some(shared.ansatz.entangler.unwrap_or(Entangler::Cnot)),
    };
    let prepared = spec.build(&mapping).map_err(|e| e.to_string())?;
    let init = match init {
        Some(v) if v.len() == prepared.circuit.n_slots() => InitialParams::Explicit(v),
        _ => InitialParams::default_for(spec.kind),
    };
    let mut config = manifest.vqe_config(init);
    if !supports_parameter_shift(&prepared.circuit) {
        config.gradient = GradientMode::FiniteDifference;
    }
    minimize(&hamiltonian, &prepared.circuit, &prepared.reference, &config)
        .map_err(|e| e.to_string())
}

enum Message {
    Started(usize),
    Finished(usize, Result<VqeResult, String>, f64),
}

/// Runs every point not already done, writing the checkpoint after each
/// state change and the CSV once all points settle.
pub fn run_scan(manifest: &ScanManifest, options: &ScanOptions) -> Result<ScanReport, ScanError> {
    if options.parallelism == 0 {
        return Err(ScanError::ZeroParallelism);
    }
    let ckpt_path = options.checkpoint_path();
    let mut checkpoint = if options.resume {
        let c = load_checkpoint(&ckpt_path)?;
        c.ensure_matches(manifest)?;
        if c.points.len() != manifest.points.len()
            || c.points.iter().zip(&manifest.points).any(|(r, p)| r.label != p.label)
        {
            return Err(ScanError::CorruptCheckpoint {
                path: ckpt_path,
                message: "point labels disagree with the manifest".into(),
            });
        }
        c
    } else {
        Checkpoint::fresh(manifest)
    };
    let todo: VecDeque<usize> = checkpoint
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| !matches!(p.status, PointStatus::Done { .. }))
        .map(|(i, _)| i)
        .collect();
    let warm = manifest.warm_start && options.parallelism == 1;
    if manifest.warm_start && options.parallelism > 1 {
        log::warn!("warm_start ignored with parallelism {}", options.parallelism);
    }
    for &i in &todo {
        checkpoint.points[i].status = PointStatus::Pending;
    }
    checkpoint.updated_unix = now_unix();
    write_checkpoint(&checkpoint, &ckpt_path)?;

    let mut ran = 0;
    let mut evals = 0;
    let mut interrupted = false;
    if warm {
        for &i in &todo {
            if options.stop_after.is_some_and(|n| ran >= n) {
                interrupted = true;
                break;
            }
            let init = i
                .checked_sub(1)
                .and_then(|k| match &checkpoint.points[k].status {
                    PointStatus::Done { result, .. } => Some(result.params.clone()),
                    _ => None,
                });
            checkpoint.points[i].status = PointStatus::Running;
            write_checkpoint(&checkpoint, &ckpt_path)?;
            let t = Instant::now();
            let outcome = solve_point(manifest, &manifest.points[i], init);
            let elapsed = if options.reproducible { 0.0 } else { t.elapsed().as_secs_f64() };
            evals += outcome.as_ref().map(|r| r.evals).unwrap_or(0);
            record(&mut checkpoint, i, outcome, elapsed, &manifest.points[i].label);
            write_checkpoint(&checkpoint, &ckpt_path)?;
            ran += 1;
        }
    } else {
        let queue = Mutex::new(todo);
        let budget = Mutex::new(options.stop_after.unwrap_or(usize::MAX));
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|s| -> Result<(), ScanError> {
            for _ in 0..options.parallelism {
                let tx = tx.clone();
                let (queue, budget) = (&queue, &budget);
                s.spawn(move || loop {
                    {
                        let mut b = budget.lock().unwrap();
                        if *b == 0 {
                            break;
                        }
                        *b -= 1;
                    }
                    let Some(i) = queue.lock().unwrap().pop_front() else {
                        break;
                    };
                    let _ = tx.send(Message::Started(i));
                    let t = Instant::now();
                    let outcome = solve_point(manifest, &manifest.points[i], None);
                    let _ = tx.send(Message::Finished(i, outcome, t.elapsed().as_secs_f64()));
                });
            }
            drop(tx);
            for msg in rx {
                match msg {
                    Message::Started(i) => checkpoint.points[i].status = PointStatus::Running,
                    Message::Finished(i, outcome, secs) => {
                        let elapsed = if options.reproducible { 0.0 } else { secs };
                        evals += outcome.as_ref().map(|r| r.evals).unwrap_or(0);
                        record(&mut checkpoint, i, outcome, elapsed, &manifest.points[i].label);
                        ran += 1;
                    }
                }
                checkpoint.updated_unix = now_unix();
                write_checkpoint(&checkpoint, &ckpt_path)?;
            }
            Ok(())
        })?;
        interrupted = !queue.into_inner().unwrap().is_empty();
    }

    let energies: Vec<Option<f64>> = checkpoint
        .points
        .iter()
        .map(|p| match &p.status {
            PointStatus::Done { result, .. } => Some(result.energy),
            _ => None,
        })
        .collect();
    let failed = checkpoint
        .points
        .iter()
        .filter(|p| matches!(p.status, PointStatus::Failed { .. }))
        .count();
    let csv = if interrupted {
        None
    } else {
        write_atomic(&options.out_csv, &render_csv(manifest, &checkpoint)?)?;
        Some(options.out_csv.clone())
    };
    Ok(ScanReport {
        energies,
        csv,
        checkpoint: ckpt_path,
        ran,
        evals,
        failed,
        interrupted,
    })
}

fn record(
    checkpoint: &mut Checkpoint,
    i: usize,
    outcome: Result<VqeResult, String>,
    wall_time_s: f64,
    label: &str,
) {
    checkpoint.points[i].status = match outcome {
        Ok(result) => {
            log::info!("point {label}: E = {} Ha", result.energy);
            PointStatus::Done {
                result,
                wall_time_s,
            }
        }
        Err(message) => {
            log::warn!("point {label} failed: {message}");
            PointStatus::Failed { message }
        }
    };
}

/// CSV in manifest order; failed or unfinished points leave the result
/// columns empty.
pub fn render_csv(manifest: &ScanManifest, checkpoint: &Checkpoint) -> Result<Vec<u8>, ScanError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for (i, (point, record)) in manifest.points.iter().zip(&checkpoint.points).enumerate() {
        let mut row = vec![i.to_string(), point.label.clone(), point.parameter.to_string()];
        match &record.status {
            PointStatus::Done {
                result,
                wall_time_s,
            } => row.extend([
                result.energy.to_string(),
                result.iterations.to_string(),
                result.evals.to_string(),
                result.converged.to_string(),
                wall_time_s.to_string(),
            ]),
            _ => row.extend(["", "", "", "false", ""].map(String::from)),
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vqe::TraceEntry;
    use tempfile::tempdir;

    fn manifest(dir: &Path, labels: &[&str]) -> ScanManifest {
        for l in labels {
            fs::write(dir.join(format!("{l}.fcidump")), "").unwrap();
        }
        let points: Vec<String> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!(r#"{{"label":"{l}","parameter":{i}.5,"fcidump":"{l}.fcidump"}}"#))
            .collect();
        let json = format!(
            r#"{{"shared":{{"mapping":"jw","ansatz":{{"kind":"uccsd"}},"vqe":{{"optimizer":"nelder-mead","tol":1e-8,"max_iter":100,"seed":3}}}},
               "warm_start":true,"points":[{}]}}"#,
            points.join(",")
        );
        ScanManifest::from_json(&json, dir).unwrap()
    }

    fn result(e: f64) -> VqeResult {
        VqeResult {
            energy: e,
            params: vec![0.1, -0.2],
            iterations: 4,
            evals: 9,
            converged: true,
            trace: vec![TraceEntry {
                it: 0,
                e,
                h: "00".into(),
            }],
        }
    }

    #[test]
    fn manifest_validation() {
        let dir = tempdir().unwrap();
        let m = manifest(dir.path(), &["a", "b"]);
        assert_eq!(m.points.len(), 2);
        assert_eq!(m.shared.mapping, MappingScheme::JordanWigner);
        assert_eq!(m.content_hash().len(), 64);

        let dup = r#"{"shared":{"mapping":"jw","ansatz":{"kind":"uccsd"},"vqe":{}},
            "points":[{"label":"a","parameter":0,"fcidump":"a.fcidump"},
                      {"label":"a","parameter":1,"fcidump":"a.fcidump"}]}"#;
        assert!(ScanManifest::from_json(dup, dir.path()).unwrap_err().contains("duplicate"));
        let missing = r#"{"shared":{"mapping":"jw","ansatz":{"kind":"uccsd"},"vqe":{}},
            "points":[{"label":"x","parameter":0,"fcidump":"nope.fcidump"}]}"#;
        assert!(ScanManifest::from_json(missing, dir.path()).unwrap_err().contains("does not exist"));
        let unknown = r#"{"shared":{"mapping":"jw","ansatz":{"kind":"uccsd"},"vqe":{"bogus":1}},
            "points":[{"label":"a","parameter":0,"fcidump":"a.fcidump"}]}"#;
        assert!(ScanManifest::from_json(unknown, dir.path()).is_err());
        let bad_scheme = r#"{"shared":{"mapping":"xx","ansatz":{"kind":"uccsd"},"vqe":{}},
            "points":[{"label":"a","parameter":0,"fcidump":"a.fcidump"}]}"#;
        assert!(ScanManifest::from_json(bad_scheme, dir.path()).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let dir = tempdir().unwrap();
        let a = manifest(dir.path(), &["a", "b"]);
        let mut b = a.clone();
        assert_eq!(a.content_hash(), b.content_hash());
        b.points[1].parameter = 9.0;
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn checkpoint_round_trip_and_errors() {
        let dir = tempdir().unwrap();
        let m = manifest(dir.path(), &["a", "b", "c"]);
        let path = dir.path().join("x.ckpt.json");
        let mut c = Checkpoint::fresh(&m);
        c.points[0].status = PointStatus::Done {
            result: result(-1.5),
            wall_time_s: 0.25,
        };
        c.points[1].status = PointStatus::Failed {
            message: "boom".into(),
        };
        c.points[2].status = PointStatus::Running;
        write_checkpoint(&c, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), c);

        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(ScanError::CorruptCheckpoint { .. })));

        fs::write(&path, text.replace("\"version\": 1", "\"version\": 7")).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(ScanError::VersionMismatch { found: 7, .. })
        ));

        fs::write(&path, &text).unwrap();
        let mut edited = m.clone();
        edited.points[0].parameter = 42.0;
        let err = load_checkpoint(&path).unwrap().ensure_matches(&edited).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(&c.manifest_hash) && msg.contains(&edited.content_hash()));

        assert!(matches!(
            load_checkpoint(&dir.path().join("none.ckpt.json")),
            Err(ScanError::NoCheckpoint(_))
        ));
    }

    #[test]
    fn checkpoint_path_suffix() {
        assert_eq!(
            checkpoint_path_for(Path::new("/tmp/out/curve.csv")),
            PathBuf::from("/tmp/out/curve.ckpt.json")
        );
    }

    #[test]
    fn csv_rows_follow_manifest_order() {
        let dir = tempdir().unwrap();
        let m = manifest(dir.path(), &["a", "b"]);
        let mut c = Checkpoint::fresh(&m);
        c.points[1].status = PointStatus::Done {
            result: result(-1.25),
            wall_time_s: 0.0,
        };
        let text = String::from_utf8(render_csv(&m, &c).unwrap()).unwrap();
        assert_eq!(
            text,
            "index,label,parameter,energy_hartree,iterations,evals,converged,wall_time_s\n\
             0,a,0.5,,,,false,\n\
             1,b,1.5,-1.25,4,9,true,0\n"
        );
    }

    #[test]
    fn failed_points_do_not_abort_the_scan() {
        let dir = tempdir().unwrap();
        let m = manifest(dir.path(), &["a", "b"]);
        let mut opts = ScanOptions::new(dir.path().join("out.csv"));
        opts.parallelism = 2;
        let report = run_scan(&m, &opts).unwrap();
        assert_eq!((report.ran, report.failed, report.interrupted), (2, 2, false));
        let c = load_checkpoint(&report.checkpoint).unwrap();
        assert!(c
            .points
            .iter()
            .all(|p| matches!(&p.status, PointStatus::Failed { message } if message.contains("fcidump"))));
        assert!(matches!(
            run_scan(&m, &ScanOptions { parallelism: 0, ..opts }),
            Err(ScanError::ZeroParallelism)
        ));
    }
}
