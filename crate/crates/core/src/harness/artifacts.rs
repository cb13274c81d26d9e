//! Checkpoints and run-directory files.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::td3::{Mlp, Trainer};
use crate::{Error, Result};

const MAGIC: [u8; 8] = *b"BLMPINV\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Payload of a checkpoint file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Artifact {
    /// Networks, optimizer moments, hyperparameters and RNG streams.
    /// Replay contents are not stored.
    Trainer(Box<Trainer>),
    /// Actor weights only.
    Policy(Mlp<f32>),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    magic: [u8; 8],
    version: u32,
    body: Artifact,
}

impl Artifact {
    pub fn actor(&self) -> &Mlp<f32> {
        match self {
            Artifact::Trainer(t) => &t.agent.nets.actor,
            Artifact::Policy(a) => a,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let env = EnvelopeRef {
            magic: MAGIC,
            version: CHECKPOINT_VERSION,
            body: self,
        };
        bincode::serialize_into(BufWriter::new(file), &env)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let env: Envelope = bincode::deserialize_from(BufReader::new(file))
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        if env.magic != MAGIC {
            return Err(Error::Checkpoint(format!("{}: not a checkpoint", path.display())));
        }
        if env.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "{}: version {} (expected {CHECKPOINT_VERSION})",
                path.display(),
                env.version
            )));
        }
        Ok(env.body)
    }
}

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    magic: [u8; 8],
    version: u32,
    body: &'a Artifact,
}

/// Loads actor weights from either kind of checkpoint.
pub fn load_actor(path: impl AsRef<Path>) -> Result<Mlp<f32>> {
    match Artifact::load(path)? {
        Artifact::Trainer(t) => Ok(t.agent.nets.actor),
        Artifact::Policy(a) => Ok(a),
    }
}

/// An output directory; created on first use.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: impl AsRef<Path>) -> PathBuf {
        self.root.join(name)
    }

    pub fn subdir(&self, name: impl AsRef<Path>) -> Result<RunDir> {
        RunDir::create(self.root.join(name))
    }

    pub fn write(&self, name: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    pub fn create_file(&self, name: impl AsRef<Path>) -> Result<BufWriter<fs::File>> {
        let p = self.path(name);
        let f = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        Ok(BufWriter::new(f))
    }

    pub fn write_toml<T: Serialize>(&self, name: impl AsRef<Path>, value: &T) -> Result<PathBuf> {
        let s = toml::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
        self.write(name, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::td3::OutputActivation;
    use rand::SeedableRng;

    #[test]
    fn policy_round_trip_and_version_check() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let a = Mlp::<f32>::new(&[12, 8, 3], OutputActivation::Tanh, None, &mut rng);
        let p = dir.path().join("p.bin");
        Artifact::Policy(a.clone()).save(&p).unwrap();
        assert_eq!(load_actor(&p).unwrap(), a);

        let mut bytes = std::fs::read(&p).unwrap();
        bytes[8] = 99;
        std::fs::write(&p, &bytes).unwrap();
        let err = Artifact::load(&p).unwrap_err().to_string();
        assert!(err.contains("version 99"), "{err}");
        assert!(load_actor(dir.path().join("missing.bin")).is_err());
    }
}
