//! Versioned JSON documents shared by every file the toolkit reads or writes.
//!
//! Each document is an object carrying `"format"` and `"version"` next to its
//! payload fields. Writes go to a sibling temporary file that is renamed into
//! place, so readers never observe a partially written document.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{JointVector, KinematicModel};
use crate::world::Workspace;

pub const ROBOT_FORMAT: &str = "armplan.robot";
pub const WORKSPACE_FORMAT: &str = "armplan.workspace";
pub const PATH_FORMAT: &str = "armplan.path";
pub const VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeRef<'a, T> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn format_err(path: Option<&Path>, detail: impl Into<String>) -> Error {
    Error::Format {
        path: path.map(Path::to_path_buf),
        detail: detail.into(),
    }
}

pub fn to_string<T: Serialize>(format: &str, body: &T) -> Result<String> {
    let env = EnvelopeRef {
        format,
        version: VERSION,
        body,
    };
    serde_json::to_string_pretty(&env).map_err(|e| format_err(None, e.to_string()))
}

pub fn from_str<T: DeserializeOwned>(format: &str, text: &str, path: Option<&Path>) -> Result<T> {
    let header: Header =
        serde_json::from_str(text).map_err(|e| format_err(path, format!("bad header: {e}")))?;
    if header.format != format {
        return Err(format_err(
            path,
            format!("expected format {format:?}, found {:?}", header.format),
        ));
    }
    if header.version != VERSION {
        return Err(format_err(
            path,
            format!("unsupported {format} version {}", header.version),
        ));
    }
    serde_json::from_str(text).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save<T: Serialize>(path: &Path, format: &str, body: &T) -> Result<()> {
    write_atomic(path, &to_string(format, body)?)
}

pub fn load<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T> {
    from_str(format, &read_text(path)?, Some(path))
}

pub fn parse_robot(text: &str, path: Option<&Path>) -> Result<KinematicModel> {
    let model: KinematicModel = from_str(ROBOT_FORMAT, text, path)?;
    model.validate()?;
    Ok(model)
}

pub fn load_robot(path: &Path) -> Result<KinematicModel> {
    parse_robot(&read_text(path)?, Some(path))
}

pub fn save_robot(path: &Path, model: &KinematicModel) -> Result<()> {
    save(path, ROBOT_FORMAT, model)
}

pub fn load_workspace(path: &Path) -> Result<Workspace> {
    let ws: Workspace = load(path, WORKSPACE_FORMAT)?;
    ws.validate()?;
    Ok(ws)
}

pub fn save_workspace(path: &Path, ws: &Workspace) -> Result<()> {
    save(path, WORKSPACE_FORMAT, ws)
}

/// A planned path with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub robot: String,
    pub workspace: String,
    pub planner: String,
    pub seed: u64,
    pub cost: f64,
    pub waypoints: Vec<JointVector>,
}

pub fn load_path(path: &Path) -> Result<PathRecord> {
    load(path, PATH_FORMAT)
}

pub fn save_path(path: &Path, record: &PathRecord) -> Result<()> {
    save(path, PATH_FORMAT, record)
}
