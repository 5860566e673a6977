use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io, CliResult};

/// What was run and what it wrote. Contains no timestamps or absolute paths of its own, so
/// identical runs write identical manifests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
    /// Artifact file names relative to the output directory, in write order.
    pub artifacts: Vec<String>,
    pub version: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.into(),
            flags: BTreeMap::new(),
            seed,
            artifacts: Vec::new(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(crate::error::from("manifest"))
    }
}

/// Writes artifacts into an output directory and records them for the manifest.
pub struct ArtifactWriter<'a> {
    dir: &'a Path,
    pub manifest: RunManifest,
}

impl<'a> ArtifactWriter<'a> {
    pub fn new(dir: &'a Path, manifest: RunManifest) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        Ok(ArtifactWriter { dir, manifest })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(io(&path))?;
        self.manifest.artifacts.push(name.into());
        Ok(())
    }

    pub fn finish(self) -> CliResult<RunManifest> {
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.manifest.to_json()).map_err(io(&path))?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifests_round_trip() {
        let mut m = RunManifest::new("build", 7);
        m.flags.insert("cap-walks".into(), "1000".into());
        m.artifacts.push("base.code".into());
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), m.to_json());
        assert!(RunManifest::from_json("{}").is_err());
    }
}
