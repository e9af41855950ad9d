//! On-disk storage.
//!
//! ```text
//! <root>/credentials.json                  identities and password hashes
//! <root>/users/<uid>/profile.facts
//! <root>/users/<uid>/units/<unit_id>.facts
//! <root>/users/<uid>/device/<unit_id>/...  generated devices
//! ```
//!
//! Nothing personal is written under `users/`: fact files only mention the
//! numeric uid.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use argon2::{Algorithm, Argon2, Params, Version};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::{write_bundle, DeviceBundle};
use crate::facts::{parse_facts, serialize_facts, FactParseError, FactSet};
use crate::profile::{is_name_token, TeacherIdentity, Uid};

pub const DATA_DIR_ENV: &str = "AT_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "./data";
const CREDENTIALS_FILE: &str = "credentials.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("uid {0} is not registered")]
    UnknownUser(Uid),
    #[error("email already registered")]
    DuplicateEmail,
    #[error("invalid email or password")]
    AuthFailed,
    #[error("invalid registration: {0}")]
    InvalidRegistration(String),
    #[error("invalid unit identifier {0:?}")]
    InvalidUnitId(String),
    #[error("{}: {source}", path.display())]
    Corrupt { path: PathBuf, source: FactParseError },
    #[error("{}: malformed credentials store: {message}", path.display())]
    CorruptCredentials { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Which fact file of a user.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactKind {
    Profile,
    Unit(String),
}

/// Called with the temporary file after it is written and before it is
/// renamed over the target; an error aborts the save.
pub type FaultHook = Arc<dyn Fn(&Path) -> io::Result<()> + Send + Sync>;

#[derive(Debug, Default, Serialize, Deserialize)]
struct Credentials {
    records: Vec<TeacherIdentity>,
}

pub struct UserStore {
    root: PathBuf,
    credentials: Mutex<()>,
    locks: Mutex<HashMap<Uid, Arc<Mutex<()>>>>,
    fault: Mutex<Option<FaultHook>>,
}

impl std::fmt::Debug for UserStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UserStore").field("root", &self.root).finish_non_exhaustive()
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn normalize_email(email: &str) -> String {
    email.trim().to_lowercase()
}

fn argon() -> Argon2<'static> {
    Argon2::new(Algorithm::Argon2id, Version::V0x13, Params::new(4096, 2, 1, Some(32)).expect("valid argon2 params"))
}

/// `argon2id$<salt hex>$<hash hex>` with a random 16-byte salt.
pub fn hash_password(password: &str) -> String {
    let salt: [u8; 16] = rand::rng().random();
    let mut out = [0u8; 32];
    argon().hash_password_into(password.as_bytes(), &salt, &mut out).expect("argon2 accepts a 16-byte salt");
    format!("argon2id${}${}", hex::encode(salt), hex::encode(out))
}

pub fn verify_password(password: &str, stored: &str) -> bool {
    let mut parts = stored.split('$');
    let (Some("argon2id"), Some(salt), Some(hash), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return false;
    };
    let (Ok(salt), Ok(expected)) = (hex::decode(salt), hex::decode(hash)) else { return false };
    let mut out = vec![0u8; expected.len()];
    if argon().hash_password_into(password.as_bytes(), &salt, &mut out).is_err() {
        return false;
    }
    // Constant-time comparison.
    out.len() == expected.len() && out.iter().zip(&expected).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

impl UserStore {
    /// Opens (creating if needed) the store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let users = root.join("users");
        fs::create_dir_all(&users).map_err(io_err(&users))?;
        Ok(UserStore {
            root,
            credentials: Mutex::new(()),
            locks: Mutex::new(HashMap::new()),
            fault: Mutex::new(None),
        })
    }

    /// Root from `AT_DATA_DIR`, `./data` when unset.
    pub fn data_dir_from_env() -> PathBuf {
        std::env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_DATA_DIR), PathBuf::from)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn users_dir(&self) -> PathBuf {
        self.root.join("users")
    }

    pub fn user_dir(&self, uid: Uid) -> PathBuf {
        self.users_dir().join(uid.to_string())
    }

    pub fn device_dir(&self, uid: Uid, unit_id: &str) -> PathBuf {
        self.user_dir(uid).join("device").join(unit_id)
    }

    pub fn credentials_path(&self) -> PathBuf {
        self.root.join(CREDENTIALS_FILE)
    }

    pub fn set_fault_hook(&self, hook: Option<FaultHook>) {
        *lock(&self.fault) = hook;
    }

    /// Serializes every mutation of one user's files.
    pub fn user_lock(&self, uid: Uid) -> Arc<Mutex<()>> {
        lock(&self.locks).entry(uid).or_default().clone()
    }

    fn facts_path(&self, uid: Uid, kind: &FactKind) -> Result<PathBuf, StoreError> {
        Ok(match kind {
            FactKind::Profile => self.user_dir(uid).join("profile.facts"),
            FactKind::Unit(id) => {
                if !is_name_token(id) {
                    return Err(StoreError::InvalidUnitId(id.clone()));
                }
                self.user_dir(uid).join("units").join(format!("{id}.facts"))
            }
        })
    }

    fn write_atomic(&self, path: &Path, content: &[u8]) -> Result<(), StoreError> {
        let dir = path.parent().expect("store paths have a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(content).and_then(|_| f.sync_all()).map_err(io_err(&tmp))?;
        drop(f);
        let hook = lock(&self.fault).clone();
        if let Some(hook) = hook {
            if let Err(e) = hook(&tmp) {
                let _ = fs::remove_file(&tmp);
                return Err(StoreError::Io { path: path.to_path_buf(), source: e });
            }
        }
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    fn read_credentials(&self) -> Result<Credentials, StoreError> {
        let path = self.credentials_path();
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| StoreError::CorruptCredentials { path: path.clone(), message: e.to_string() }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Credentials::default()),
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }

    pub fn is_registered(&self, uid: Uid) -> Result<bool, StoreError> {
        let _g = lock(&self.credentials);
        Ok(self.read_credentials()?.records.iter().any(|r| r.uid == uid))
    }

    fn require(&self, uid: Uid) -> Result<(), StoreError> {
        if self.is_registered(uid)? {
            Ok(())
        } else {
            Err(StoreError::UnknownUser(uid))
        }
    }

    /// Stores the identity with a salted password hash; uids are allocated
    /// as one more than the largest in use.
    pub fn register(&self, name: &str, surname: &str, email: &str, password: &str) -> Result<Uid, StoreError> {
        let email = normalize_email(email);
        for (field, value) in [("name", name), ("surname", surname)] {
            if value.trim().is_empty() {
                return Err(StoreError::InvalidRegistration(format!("{field} is empty")));
            }
        }
        if !email.contains('@') || email.starts_with('@') || email.ends_with('@') {
            return Err(StoreError::InvalidRegistration("email is not an address".into()));
        }
        if password.chars().count() < 8 {
            return Err(StoreError::InvalidRegistration("password needs at least 8 characters".into()));
        }
        let password_hash = hash_password(password);

        let _g = lock(&self.credentials);
        let mut creds = self.read_credentials()?;
        if creds.records.iter().any(|r| r.email == email) {
            return Err(StoreError::DuplicateEmail);
        }
        let uid = Uid(creds.records.iter().map(|r| r.uid.0).max().unwrap_or(0) + 1);
        creds.records.push(TeacherIdentity {
            uid,
            name: name.trim().to_string(),
            surname: surname.trim().to_string(),
            email,
            password_hash,
        });
        let text = serde_json::to_string_pretty(&creds).expect("credentials serialize");
        self.write_atomic(&self.credentials_path(), text.as_bytes())?;
        let dir = self.user_dir(uid);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(uid)
    }

    /// Unknown email and wrong password fail the same way.
    pub fn authenticate(&self, email: &str, password: &str) -> Result<Uid, StoreError> {
        let record = self.identity_by_email(email)?;
        match record {
            Some(r) if verify_password(password, &r.password_hash) => Ok(r.uid),
            Some(_) => Err(StoreError::AuthFailed),
            None => {
                // Spend the same work as a real check.
                let _ = verify_password(password, &hash_password("timing"));
                Err(StoreError::AuthFailed)
            }
        }
    }

    pub fn identity_by_email(&self, email: &str) -> Result<Option<TeacherIdentity>, StoreError> {
        let email = normalize_email(email);
        let _g = lock(&self.credentials);
        Ok(self.read_credentials()?.records.into_iter().find(|r| r.email == email))
    }

    pub fn identity(&self, uid: Uid) -> Result<Option<TeacherIdentity>, StoreError> {
        let _g = lock(&self.credentials);
        Ok(self.read_credentials()?.records.into_iter().find(|r| r.uid == uid))
    }

    /// Empty when the file was never saved.
    pub fn load_user_facts(&self, uid: Uid, kind: &FactKind) -> Result<FactSet, StoreError> {
        self.require(uid)?;
        let path = self.facts_path(uid, kind)?;
        let l = self.user_lock(uid);
        let _g = lock(&l);
        read_facts(&path)
    }

    /// `None` when the file does not exist.
    pub fn try_load_user_facts(&self, uid: Uid, kind: &FactKind) -> Result<Option<FactSet>, StoreError> {
        self.require(uid)?;
        let path = self.facts_path(uid, kind)?;
        let l = self.user_lock(uid);
        let _g = lock(&l);
        if !path.exists() {
            return Ok(None);
        }
        read_facts(&path).map(Some)
    }

    pub fn save_user_facts(&self, uid: Uid, kind: &FactKind, facts: &FactSet) -> Result<(), StoreError> {
        self.require(uid)?;
        let path = self.facts_path(uid, kind)?;
        let l = self.user_lock(uid);
        let _g = lock(&l);
        self.write_atomic(&path, serialize_facts(facts).as_bytes())
    }

    /// Removes a unit's facts and generated device. `false` if it did not exist.
    pub fn delete_unit(&self, uid: Uid, unit_id: &str) -> Result<bool, StoreError> {
        self.require(uid)?;
        let path = self.facts_path(uid, &FactKind::Unit(unit_id.to_string()))?;
        let l = self.user_lock(uid);
        let _g = lock(&l);
        if !path.exists() {
            return Ok(false);
        }
        fs::remove_file(&path).map_err(io_err(&path))?;
        let device = self.device_dir(uid, unit_id);
        if device.exists() {
            fs::remove_dir_all(&device).map_err(io_err(&device))?;
        }
        Ok(true)
    }

    /// Unit ids with a saved fact file, sorted.
    pub fn list_units(&self, uid: Uid) -> Result<Vec<String>, StoreError> {
        self.require(uid)?;
        let dir = self.user_dir(uid).join("units");
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(StoreError::Io { path: dir, source: e }),
        };
        let mut ids = Vec::new();
        for entry in entries {
            let name = entry.map_err(io_err(&dir))?.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".facts")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn write_device(&self, uid: Uid, bundle: &DeviceBundle) -> Result<PathBuf, StoreError> {
        self.require(uid)?;
        let dir = self.device_dir(uid, &bundle.unit_id);
        let l = self.user_lock(uid);
        let _g = lock(&l);
        write_bundle(bundle, &dir).map_err(io_err(&dir))?;
        Ok(dir)
    }
}

fn read_facts(path: &Path) -> Result<FactSet, StoreError> {
    match fs::read_to_string(path) {
        Ok(text) => parse_facts(&text).map_err(|source| StoreError::Corrupt { path: path.to_path_buf(), source }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(FactSet::new()),
        Err(e) => Err(StoreError::Io { path: path.to_path_buf(), source: e }),
    }
}

/// Bearer session issued at login.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionToken {
    pub token: String,
    pub uid: Uid,
    pub expires_at: Instant,
}

/// In-memory session table with a fixed lifetime.
#[derive(Debug)]
pub struct Sessions {
    ttl: Duration,
    table: Mutex<HashMap<String, (Uid, Instant)>>,
}

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(8 * 3600);

impl Sessions {
    pub fn new(ttl: Duration) -> Self {
        Sessions { ttl, table: Mutex::new(HashMap::new()) }
    }

    /// A fresh random token: 32 bytes, hex encoded.
    pub fn issue(&self, uid: Uid) -> SessionToken {
        let token = hex::encode(rand::rng().random::<[u8; 32]>());
        let expires_at = Instant::now() + self.ttl;
        let mut table = lock(&self.table);
        let now = Instant::now();
        table.retain(|_, (_, exp)| *exp > now);
        table.insert(token.clone(), (uid, expires_at));
        SessionToken { token, uid, expires_at }
    }

    /// The uid of a live token.
    pub fn resolve(&self, token: &str) -> Option<Uid> {
        let mut table = lock(&self.table);
        match table.get(token) {
            Some(&(uid, exp)) if exp > Instant::now() => Some(uid),
            Some(_) => {
                table.remove(token);
                None
            }
            None => None,
        }
    }

    pub fn revoke(&self, token: &str) {
        lock(&self.table).remove(token);
    }
}

impl Default for Sessions {
    fn default() -> Self {
        Sessions::new(DEFAULT_SESSION_TTL)
    }
}
