#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;

/// Fresh copy of the demo scenario.
pub fn demo() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    agromcda_cli::demo::write_scenario(dir.path()).unwrap();
    dir
}

pub fn config_path(dir: &Path) -> PathBuf {
    dir.join("config.json")
}

/// Run the CLI in-process and return its exit code.
pub fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["agromcda"];
    full.extend_from_slice(args);
    agromcda_cli::run(full)
}

pub fn run_in(cmd: &str, dir: &Path, out: &Path, extra: &[&str]) -> i32 {
    let config = config_path(dir);
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cli(&args)
}

pub fn edit_config(dir: &Path, f: impl FnOnce(&mut Value)) {
    let path = config_path(dir);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    f(&mut v);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Every file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    if root.exists() {
        walk(root, root, &mut out);
    }
    out
}
