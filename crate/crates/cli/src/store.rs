//! File-backed level store.
//!
//! One JSON file per (externals, weight) level under a root directory, with
//! the format version in the file name so a change to the class layout
//! never reads stale data. Writes go through a temporary file in the same
//! directory and a rename, so a crashed run cannot leave a half-written
//! level behind. The cache is best effort: any read or write problem just
//! means the level is enumerated again.

use std::fs;
use std::path::{Path, PathBuf};

use graphstar::{GraphClass, LevelStore};

const FORMAT: u32 = 1;

pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn open(root: impl AsRef<Path>) -> std::io::Result<DirStore> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        Ok(DirStore { root })
    }

    fn level_path(&self, n_ext: usize, k: i64) -> PathBuf {
        self.root.join(format!("classes-v{FORMAT}-n{n_ext}-k{k}.json"))
    }
}

impl LevelStore for DirStore {
    fn load(&self, n_ext: usize, k: i64) -> Option<Vec<GraphClass>> {
        let text = fs::read_to_string(self.level_path(n_ext, k)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn save(&self, n_ext: usize, k: i64, classes: &[GraphClass]) {
        let Ok(json) = serde_json::to_string(classes) else {
            return;
        };
        let Ok(file) = tempfile::NamedTempFile::new_in(&self.root) else {
            return;
        };
        if fs::write(file.path(), json).is_ok() {
            let _ = file.persist(self.level_path(n_ext, k));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphstar::enumerate_classes;

    #[test]
    fn round_trips_a_level() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path()).unwrap();
        let classes = enumerate_classes(2, 2, None);
        store.save(2, 2, &classes);
        assert_eq!(store.load(2, 2), Some(classes));
        assert_eq!(store.load(2, 3), None);
    }

    #[test]
    fn ignores_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path()).unwrap();
        fs::write(store.level_path(2, 1), "not json").unwrap();
        assert_eq!(store.load(2, 1), None);
    }
}
