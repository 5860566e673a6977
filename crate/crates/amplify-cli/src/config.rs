//! Build configuration files (TOML) and the cascade they describe.

use std::path::{Path, PathBuf};

use amplify_core::f2::{parse_code, random_balanced_code, LinearCode};
use amplify_core::graphs::{aghp_generators, parse_graph, RotationGraph};
use amplify_core::lifting::{build_cascade_capped, Cascade};
use amplify_core::rpp::WideReplacementProduct;
use amplify_core::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{from, io, CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub width: usize,
    pub depth: usize,
    pub top_arity: usize,
    pub outer: GraphSpec,
    pub inner: GraphSpec,
    pub base: BaseSpec,
}

/// One of: a graph description (`cayley z5 1,4,2,3` or a rotation table), a graph file
/// relative to the config, or an AGHP set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aghp: Option<AghpSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AghpSpec {
    pub m: u32,
    pub beta: String,
}

/// A code file (relative to the config) or a seeded random code of the given dimension and bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<String>,
}

pub fn parse_rational(s: &str) -> CliResult<Rational> {
    s.trim().parse::<Rational>().map_err(|e| CliError::Precondition(format!("bad rational {s:?}: {e}")))
}

impl GraphSpec {
    pub fn file(name: &str) -> Self {
        GraphSpec { graph: None, file: Some(name.into()), aghp: None }
    }

    pub fn resolve(&self, dir: &Path) -> CliResult<RotationGraph> {
        match (&self.graph, &self.file, &self.aghp) {
            (Some(g), None, None) => parse_graph(g).map_err(from("graphs")),
            (None, Some(f), None) => read_graph(&dir.join(f)),
            (None, None, Some(a)) => aghp_generators(a.m, parse_rational(&a.beta)?)
                .and_then(|set| set.cayley_graph())
                .map_err(from("graphs")),
            _ => Err(CliError::Precondition("config: a graph needs exactly one of `graph`, `file` or `aghp`".into())),
        }
    }
}

/// Reads a graph file; a value naming no existing file is parsed as a description.
pub fn read_graph_arg(arg: &str) -> CliResult<RotationGraph> {
    let path = Path::new(arg);
    if path.is_file() {
        read_graph(path)
    } else {
        parse_graph(arg).map_err(from("graphs"))
    }
}

fn read_graph(path: &Path) -> CliResult<RotationGraph> {
    parse_graph(&std::fs::read_to_string(path).map_err(io(path))?).map_err(from("graphs"))
}

impl BuildConfig {
    pub fn load(path: &Path) -> CliResult<(BuildConfig, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(io(path))?;
        let config: BuildConfig = toml::from_str(&text).map_err(from("config"))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, dir))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn product(&self, dir: &Path) -> CliResult<WideReplacementProduct> {
        WideReplacementProduct::new(self.outer.resolve(dir)?, self.inner.resolve(dir)?, self.width).map_err(from("rpp"))
    }

    /// The base code: read from `code` (relative to `dir`), or drawn from `seed`.
    pub fn base_code(&self, n: usize, dir: &Path, seed: u64) -> CliResult<LinearCode> {
        match (&self.base.code, self.base.dim) {
            (Some(file), None) => {
                let path = dir.join(file);
                let code = parse_code(&std::fs::read_to_string(&path).map_err(io(&path))?).map_err(from("f2"))?;
                if code.len() != n {
                    return Err(CliError::Precondition(format!(
                        "f2: base code has length {}, outer graph has {n} vertices",
                        code.len()
                    )));
                }
                Ok(code)
            }
            (None, Some(dim)) => {
                let eps0 = parse_rational(self.base.eps0.as_deref().unwrap_or("1/2"))?;
                random_balanced_code(dim, n, eps0, seed).map_err(from("f2"))
            }
            _ => Err(CliError::Precondition("config: base needs exactly one of `code` or `dim`".into())),
        }
    }

    pub fn cascade(&self, base: &LinearCode, p: &WideReplacementProduct, cap_walks: usize) -> CliResult<Cascade> {
        build_cascade_capped(base, p, self.depth, self.top_arity, cap_walks).map_err(from("lifting"))
    }
}
