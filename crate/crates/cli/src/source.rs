//! Where an instance comes from: a toy, a synthetic preset or a LIBSVM file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sparse_iscra::data::{gen_synthetic, poly_expand, read_libsvm, toy_instance, SyntheticSpec, PRESETS};
use sparse_iscra::model::{GroundTruth, ProblemInstance};

/// Environment variable consulted for relative dataset paths.
pub const DATA_DIR_VAR: &str = "SPARSE_ISCRA_DATA_DIR";

/// Largest expanded design, in matrix entries, that `--poly` will build.
const POLY_BUDGET: u128 = 400_000_000;

const TOYS: &[&str] = &["exam31", "exam41", "exam42"];

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Toy { name: String, noise: Option<f64> },
    Synthetic { name: String, m: usize },
    Libsvm { path: PathBuf, poly: Option<usize> },
}

impl InstanceSource {
    /// Resolves a preset name to a toy or synthetic source.
    pub fn preset(name: &str, noise: Option<f64>, m: Option<usize>) -> Result<Self> {
        if TOYS.contains(&name) {
            Ok(Self::Toy { name: name.to_string(), noise })
        } else if PRESETS.contains(&name) {
            let m = m.with_context(|| format!("preset {name} needs --m"))?;
            Ok(Self::Synthetic { name: name.to_string(), m })
        } else {
            bail!("unknown preset '{name}' (known: {}, {})", TOYS.join(", "), PRESETS.join(", "))
        }
    }

    /// Whether `seed` changes the instance.
    pub fn is_random(&self) -> bool {
        matches!(self, Self::Synthetic { .. })
    }

    pub fn load(&self, seed: u64) -> Result<(ProblemInstance, Option<GroundTruth>)> {
        match self {
            Self::Toy { name, noise } => {
                let (inst, truth) = toy_instance(name, *noise)?;
                Ok((inst, Some(truth)))
            }
            Self::Synthetic { name, m } => {
                let (inst, truth) = gen_synthetic(&SyntheticSpec::preset(name, *m, seed)?)?;
                Ok((inst, Some(truth)))
            }
            Self::Libsvm { path, poly } => {
                let path = resolve_data_path(path);
                let data = read_libsvm(&path, None).with_context(|| format!("reading {}", path.display()))?;
                let inst = match poly {
                    Some(p) if *p > 1 => {
                        let a = poly_expand(data.instance.a(), *p, POLY_BUDGET)?;
                        ProblemInstance::new(a, data.instance.b().clone())?
                    }
                    _ => data.instance,
                };
                Ok((inst, None))
            }
        }
    }
}

/// Relative paths are looked up under `SPARSE_ISCRA_DATA_DIR` when it is set
/// and the path does not exist as given.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
            return Path::new(&dir).join(path);
        }
    }
    path.to_path_buf()
}
