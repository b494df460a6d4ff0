//! Line-delimited JSON user store.
//!
//! One object per line:
//! `{"username":..,"pw_salt":<32 hex>,"pw_digest":<64 hex>,"face":"64x32\n<32 rows>","home_lat":..,"home_lon":..}`.
//! The whole file is rewritten atomically on every put.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use fourfa_core::factors::{FaceTemplate, GeoPoint, UserRecord};
use fourfa_core::store::{StoreError, UserStore};
use serde::{Deserialize, Serialize};

const FACE_HEADER: &str = "64x32";

#[derive(Debug, thiserror::Error)]
pub enum StorageError {
    #[error("user store {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("user store {path}, line {line}: {reason}")]
    Corrupt {
        path: String,
        line: usize,
        reason: String,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredUser {
    username: String,
    pw_salt: String,
    pw_digest: String,
    face: String,
    home_lat: f64,
    home_lon: f64,
}

impl From<&UserRecord> for StoredUser {
    fn from(r: &UserRecord) -> Self {
        StoredUser {
            username: r.username().into(),
            pw_salt: hex::encode(r.pw_salt()),
            pw_digest: hex::encode(r.pw_digest()),
            face: format!("{FACE_HEADER}\n{}", r.face().to_text()),
            home_lat: r.home().lat(),
            home_lon: r.home().lon(),
        }
    }
}

impl StoredUser {
    fn into_record(self) -> Result<UserRecord, String> {
        let salt: [u8; 16] = decode_hex(&self.pw_salt, "pw_salt")?;
        let digest: [u8; 32] = decode_hex(&self.pw_digest, "pw_digest")?;
        let mut lines = self.face.split('\n');
        if lines.next() != Some(FACE_HEADER) {
            return Err("face block must start with 64x32".into());
        }
        let face = FaceTemplate::from_rows(lines).map_err(|e| e.to_string())?;
        let home = GeoPoint::new(self.home_lat, self.home_lon).map_err(|e| e.to_string())?;
        UserRecord::from_parts(&self.username, salt, digest, face, home).map_err(|e| e.to_string())
    }
}

fn decode_hex<const N: usize>(s: &str, field: &str) -> Result<[u8; N], String> {
    let mut out = [0u8; N];
    if s.len() != 2 * N {
        return Err(format!("{field} must be {} hex characters", 2 * N));
    }
    hex::decode_to_slice(s, &mut out).map_err(|_| format!("{field} is not hex"))?;
    Ok(out)
}

pub struct FileUserStore {
    path: PathBuf,
    records: RwLock<BTreeMap<String, UserRecord>>,
    writer: Mutex<()>,
}

impl FileUserStore {
    /// Loads the store, creating nothing if the file does not exist yet.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StorageError> {
        let path = path.into();
        let records = match fs::read_to_string(&path) {
            Ok(text) => parse_store(&path, &text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(source) => {
                return Err(StorageError::Io {
                    path: path.display().to_string(),
                    source,
                })
            }
        };
        Ok(FileUserStore {
            path,
            records: RwLock::new(records),
            writer: Mutex::new(()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Inserts or replaces by username; durable once this returns.
    pub fn put(&self, record: UserRecord) -> Result<(), StorageError> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = self
            .records
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone();
        next.insert(record.username().into(), record);
        self.persist(&next)?;
        *self.records.write().unwrap_or_else(|e| e.into_inner()) = next;
        Ok(())
    }

    pub fn get(&self, username: &str) -> Option<UserRecord> {
        self.records
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(username)
            .cloned()
    }

    /// Moves a user's registered home. Returns false for unknown users.
    pub fn update_location(&self, username: &str, home: GeoPoint) -> Result<bool, StorageError> {
        let Some(mut record) = self.get(username) else {
            return Ok(false);
        };
        record.set_home(home);
        self.put(record)?;
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn persist(&self, records: &BTreeMap<String, UserRecord>) -> Result<(), StorageError> {
        let io = |source| StorageError::Io {
            path: self.path.display().to_string(),
            source,
        };
        let mut text = String::new();
        for record in records.values() {
            text.push_str(
                &serde_json::to_string(&StoredUser::from(record)).expect("plain struct serializes"),
            );
            text.push('\n');
        }
        let tmp = self.path.with_extension("tmp");
        {
            let mut file = fs::File::create(&tmp).map_err(io)?;
            file.write_all(text.as_bytes()).map_err(io)?;
            file.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &self.path).map_err(io)
    }
}

fn parse_store(path: &Path, text: &str) -> Result<BTreeMap<String, UserRecord>, StorageError> {
    let corrupt = |line: usize, reason: String| StorageError::Corrupt {
        path: path.display().to_string(),
        line,
        reason,
    };
    let mut records = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let stored: StoredUser =
            serde_json::from_str(line).map_err(|e| corrupt(line_no, e.to_string()))?;
        let record = stored.into_record().map_err(|e| corrupt(line_no, e))?;
        if records
            .insert(record.username().to_owned(), record)
            .is_some()
        {
            return Err(corrupt(line_no, "duplicate username".into()));
        }
    }
    Ok(records)
}

impl UserStore for FileUserStore {
    fn get(&self, username: &str) -> Result<Option<UserRecord>, StoreError> {
        Ok(FileUserStore::get(self, username))
    }
}
