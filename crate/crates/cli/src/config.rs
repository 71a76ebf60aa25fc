//! Flag and config-file merging into a validated experiment description.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{Command, DistKind, Format, MatrixArgs, OutputArgs, SchemeKind};
use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "PG_PARALLEL_SEED";

/// Keys accepted in a TOML config file. Names follow the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub d: Option<u32>,
    pub q: Option<u64>,
    pub matchings: Option<bool>,
    pub edges: Option<PathBuf>,
    pub dist: Option<DistKind>,
    pub p: Option<u64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub matrix: Option<PathBuf>,
    pub gen: Option<String>,
    pub eps: Option<f64>,
    pub imax: Option<usize>,
    pub packing: Option<bool>,
    pub repeat: Option<usize>,
    pub scheme: Option<SchemeKind>,
    pub block: Option<usize>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    /// Reads `path`; relative paths inside are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let err = |msg: String| CliError::ConfigFile {
            path: path.to_path_buf(),
            msg,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.edges, &mut cfg.matrix, &mut cfg.report, &mut cfg.csv].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatrixSource {
    File { path: String },
    Generator { spec: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistSpec {
    pub kind: DistKind,
    pub processes: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A fully resolved run, echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Geometry {
        d: u32,
        q: u64,
        matchings: bool,
    },
    Distribute {
        dist: DistSpec,
    },
    Pcg {
        matrix: MatrixSource,
        dist: DistSpec,
        eps: f64,
        imax: usize,
        packing: bool,
    },
    SpmvBench {
        matrix: MatrixSource,
        p: u64,
        processes: u32,
        repeat: usize,
    },
    LuSim {
        scheme: SchemeKind,
        n: usize,
        block: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        q: Option<u32>,
        seed: u64,
    },
}

/// Where results go.
#[derive(Clone, Debug, Default)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub format: Format,
    pub edges: Option<PathBuf>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::invalid(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn seed_of(flag: Option<u64>, file: Option<u64>, default: u64) -> Result<u64> {
    Ok(env_seed()?.or(flag).or(file).unwrap_or(default))
}

fn plane_size(p: u64) -> Result<u32> {
    let n = p
        .checked_mul(p)
        .and_then(|x| x.checked_add(p + 1))
        .filter(|&n| n <= u32::MAX as u64)
        .ok_or_else(|| CliError::invalid(format!("plane order {p} is too large")))?;
    Ok(n as u32)
}

fn dist_spec(kind: DistKind, p: Option<u64>, n: Option<usize>, seed: Option<u64>) -> Result<DistSpec> {
    let n = n
        .map(|n| u32::try_from(n).map_err(|_| CliError::invalid(format!("process count {n} is too large"))))
        .transpose()?;
    match kind {
        DistKind::Projective => {
            let p = match (p, n) {
                (Some(p), _) => p,
                (None, Some(n)) => pgcomp_core::distribution::plane_order_for(n)
                    .ok_or_else(|| CliError::invalid(format!("{n} processes is not p² + p + 1 for any p")))?,
                (None, None) => 3,
            };
            if pgcomp_core::galois::prime_power(p).is_none() {
                return Err(CliError::invalid(format!("projective distribution needs a prime power p, got {p}")));
            }
            let processes = plane_size(p)?;
            if let Some(n) = n.filter(|&n| n != processes) {
                return Err(CliError::invalid(format!("p = {p} gives {processes} processes, not {n}")));
            }
            Ok(DistSpec {
                kind,
                processes,
                p: Some(p),
                seed: None,
            })
        }
        DistKind::Rowwise | DistKind::Random => {
            let processes = match (n, p) {
                (Some(n), _) => n,
                (None, Some(p)) => plane_size(p)?,
                (None, None) => 13,
            };
            if processes == 0 {
                return Err(CliError::invalid("need at least one process"));
            }
            Ok(DistSpec {
                kind,
                processes,
                p: None,
                seed: if kind == DistKind::Random { Some(seed.unwrap_or(1)) } else { None },
            })
        }
    }
}

fn matrix_source(flags: &MatrixArgs, file: &FileConfig) -> Result<MatrixSource> {
    // a source given on the command line replaces the file's entirely
    let (matrix, gen) = if flags.matrix.is_some() || flags.gen.is_some() {
        (flags.matrix.clone(), flags.gen.clone())
    } else {
        (file.matrix.clone(), file.gen.clone())
    };
    match (matrix, gen) {
        (Some(_), Some(_)) => Err(CliError::invalid("give either a matrix file or a generator, not both")),
        (Some(path), None) => Ok(MatrixSource::File {
            path: path.display().to_string(),
        }),
        (None, Some(spec)) => Ok(MatrixSource::Generator { spec }),
        (None, None) => Err(CliError::invalid("no matrix: pass --matrix <file.mtx> or --gen <spec>")),
    }
}

/// Applies `PG_PARALLEL_SEED` to the seed field of a generator spec.
fn seeded_source(src: MatrixSource) -> Result<MatrixSource> {
    match (src, env_seed()?) {
        (MatrixSource::Generator { spec }, Some(seed)) => {
            let g: pgcomp_core::MatrixGenerator = spec.parse()?;
            Ok(MatrixSource::Generator {
                spec: g.with_seed(seed).to_string(),
            })
        }
        (src, _) => Ok(src),
    }
}

fn outputs(out: &OutputArgs, file: &FileConfig, edges: Option<PathBuf>) -> Outputs {
    Outputs {
        report: out.report.clone().or(file.report.clone()),
        csv: out.csv.clone().or(file.csv.clone()),
        format: out.format.or(file.format).unwrap_or_default(),
        edges: edges.or(file.edges.clone()),
    }
}

/// Merges flags over the config file and validates the result.
pub fn resolve(cmd: &Command) -> Result<(ExperimentConfig, Outputs)> {
    let out = cmd.output();
    let file = match &out.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(c) = file.command.as_deref().filter(|&c| c != cmd.name()) {
        return Err(CliError::ConfigFile {
            path: out.config.clone().unwrap_or_default(),
            msg: format!("written for '{c}', not '{}'", cmd.name()),
        });
    }
    match cmd {
        Command::Geometry(a) => {
            let d = a.d.or(file.d).unwrap_or(4);
            let q = a.q.or(file.q).unwrap_or(2);
            let matchings = a.matchings.or(file.matchings).unwrap_or(false);
            if d == 0 {
                return Err(CliError::invalid("projective dimension must be at least 1"));
            }
            if matchings && d != 4 {
                return Err(CliError::invalid("plane-to-line matchings exist only for d = 4"));
            }
            Ok((ExperimentConfig::Geometry { d, q, matchings }, outputs(out, &file, a.edges.clone())))
        }
        Command::Distribute(a) => {
            let kind = a.dist.or(file.dist).unwrap_or(DistKind::Projective);
            let seed = if kind == DistKind::Random { Some(seed_of(a.seed, file.seed, 1)?) } else { None };
            let dist = dist_spec(kind, a.p.or(file.p), a.n.or(file.n), seed)?;
            Ok((ExperimentConfig::Distribute { dist }, outputs(out, &file, None)))
        }
        Command::Pcg(a) => {
            let matrix = seeded_source(matrix_source(&a.source, &file)?)?;
            let kind = a.dist.or(file.dist).unwrap_or(DistKind::Projective);
            let seed = if kind == DistKind::Random { Some(seed_of(a.seed, file.seed, 1)?) } else { None };
            let dist = dist_spec(kind, a.p.or(file.p), a.n.or(file.n), seed)?;
            let eps = a.eps.or(file.eps).unwrap_or(1e-8);
            let imax = a.imax.or(file.imax).unwrap_or(1000);
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::invalid(format!("--eps must lie in (0, 1), got {eps}")));
            }
            if imax == 0 {
                return Err(CliError::invalid("--imax must be at least 1"));
            }
            let packing = a.packing.or(file.packing).unwrap_or(false);
            Ok((
                ExperimentConfig::Pcg {
                    matrix,
                    dist,
                    eps,
                    imax,
                    packing,
                },
                outputs(out, &file, None),
            ))
        }
        Command::SpmvBench(a) => {
            let matrix = seeded_source(matrix_source(&a.source, &file)?)?;
            let dist = dist_spec(DistKind::Projective, a.p.or(file.p), None, None)?;
            let repeat = a.repeat.or(file.repeat).unwrap_or(5);
            if repeat == 0 {
                return Err(CliError::invalid("--repeat must be at least 1"));
            }
            Ok((
                ExperimentConfig::SpmvBench {
                    matrix,
                    p: dist.p.unwrap_or(3),
                    processes: dist.processes,
                    repeat,
                },
                outputs(out, &file, None),
            ))
        }
        Command::LuSim(a) => {
            let scheme = a.scheme.or(file.scheme).unwrap_or(SchemeKind::Pg2);
            let n = a.n.or(file.n).unwrap_or(744);
            let block = a.block.or(file.block).unwrap_or(24);
            let file_q = file.q.map(|q| u32::try_from(q).unwrap_or(u32::MAX));
            let q = (scheme == SchemeKind::Mesh).then(|| a.q.or(file_q).unwrap_or(12));
            if block == 0 || n == 0 || n % block != 0 {
                return Err(CliError::invalid(format!(
                    "matrix order {n} must be a positive multiple of the block size {block}"
                )));
            }
            if q == Some(0) {
                return Err(CliError::invalid("mesh side must be at least 1"));
            }
            let seed = seed_of(a.seed, file.seed, 1)?;
            Ok((
                ExperimentConfig::LuSim {
                    scheme,
                    n,
                    block,
                    q,
                    seed,
                },
                outputs(out, &file, None),
            ))
        }
    }
}
