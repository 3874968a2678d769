use std::collections::HashMap;
use std::path::Path;
use std::sync::RwLock;
use std::time::Duration;

use chrono::{DateTime, TimeDelta, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::credential;
use crate::journal::{Entry, Journal};
use crate::{RecordsError, Result};

pub const DEFAULT_SESSION_LIFETIME: Duration = Duration::from_secs(24 * 60 * 60);
pub const MIN_CREDENTIAL_LEN: usize = 8;
const MAX_USERNAME_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Doctor,
    Patient,
}

/// Public view of an account; never carries credential material.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub user_id: u64,
    pub username: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct StoredUser {
    user_id: u64,
    username: String,
    credential_hash: String,
    role: Role,
}

impl StoredUser {
    fn public(&self) -> User {
        User {
            user_id: self.user_id,
            username: self.username.clone(),
            role: self.role,
        }
    }
}

/// A diagnosis entry. Read-only once created.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedicalRecord {
    record_id: u64,
    patient_id: u64,
    doctor_id: u64,
    symptoms: Vec<String>,
    diagnosis: String,
    notes: String,
    created_at: DateTime<Utc>,
}

impl MedicalRecord {
    pub fn record_id(&self) -> u64 {
        self.record_id
    }

    pub fn patient_id(&self) -> u64 {
        self.patient_id
    }

    pub fn doctor_id(&self) -> u64 {
        self.doctor_id
    }

    pub fn symptoms(&self) -> &[String] {
        &self.symptoms
    }

    pub fn diagnosis(&self) -> &str {
        &self.diagnosis
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }
}

/// Input of [`RecordStore::create_record`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewRecord {
    pub patient_id: u64,
    #[serde(default)]
    pub symptoms: Vec<String>,
    pub diagnosis: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    /// 128-bit random value, hex encoded.
    pub token: String,
    pub user_id: u64,
    pub role: Role,
    pub expires_at: DateTime<Utc>,
}

struct State {
    log: Vec<Entry>,
    users: Vec<StoredUser>,
    by_name: HashMap<String, usize>,
    records: Vec<MedicalRecord>,
    sessions: HashMap<String, Session>,
    journal: Journal,
}

impl State {
    fn empty(journal: Journal) -> Self {
        State {
            log: Vec::new(),
            users: Vec::new(),
            by_name: HashMap::new(),
            records: Vec::new(),
            sessions: HashMap::new(),
            journal,
        }
    }

    fn apply(&mut self, entry: Entry) {
        match &entry {
            Entry::User(u) => {
                self.by_name.insert(u.username.clone(), self.users.len());
                self.users.push(u.clone());
            }
            Entry::Record(r) => self.records.push(r.clone()),
        }
        self.log.push(entry);
    }

    fn commit(&mut self, entry: Entry) -> Result<()> {
        self.journal.append(&entry)?;
        self.apply(entry);
        Ok(())
    }

    fn user(&self, user_id: u64) -> Option<&StoredUser> {
        // ids are dense and start at 1
        let i = usize::try_from(user_id).ok()?.checked_sub(1)?;
        self.users.get(i)
    }

    fn check_replayed(&self, line: usize, entry: &Entry) -> Result<()> {
        let corrupt = |m: &str| {
            Err(RecordsError::Corrupt {
                line,
                message: m.to_string(),
            })
        };
        match entry {
            Entry::User(u) => {
                if u.user_id != self.users.len() as u64 + 1 {
                    return corrupt("user ids must be consecutive");
                }
                if self.by_name.contains_key(&u.username) {
                    return corrupt("duplicate username");
                }
            }
            Entry::Record(r) => {
                if self.records.last().is_some_and(|last| last.record_id >= r.record_id) {
                    return corrupt("record ids must increase");
                }
                let role = |id| self.user(id).map(|u| u.role);
                if role(r.patient_id) != Some(Role::Patient) || role(r.doctor_id) != Some(Role::Doctor) {
                    return corrupt("record references an unknown patient or doctor");
                }
            }
        }
        Ok(())
    }
}

/// Users, sessions and records behind a single writer lock.
pub struct RecordStore {
    state: RwLock<State>,
    session_lifetime: TimeDelta,
}

fn new_token() -> String {
    let mut bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

impl RecordStore {
    /// A store that persists nothing.
    pub fn in_memory() -> Self {
        RecordStore {
            state: RwLock::new(State::empty(Journal::in_memory())),
            session_lifetime: TimeDelta::from_std(DEFAULT_SESSION_LIFETIME).expect("fits"),
        }
    }

    /// Opens the journal at `path`, creating it if absent, and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let (journal, entries) = Journal::open(path.as_ref())?;
        let mut state = State::empty(journal);
        for (i, entry) in entries.into_iter().enumerate() {
            state.check_replayed(i + 1, &entry)?;
            state.apply(entry);
        }
        Ok(RecordStore {
            state: RwLock::new(state),
            session_lifetime: TimeDelta::from_std(DEFAULT_SESSION_LIFETIME).expect("fits"),
        })
    }

    pub fn with_session_lifetime(mut self, lifetime: Duration) -> Self {
        self.session_lifetime = TimeDelta::from_std(lifetime).unwrap_or(TimeDelta::MAX);
        self
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn register(&self, username: &str, credential: &str, role: Role) -> Result<User> {
        let username = username.trim();
        if username.is_empty() {
            return Err(RecordsError::Validation("username must not be empty".into()));
        }
        if username.chars().count() > MAX_USERNAME_LEN || username.chars().any(char::is_control) {
            return Err(RecordsError::Validation(format!(
                "username must be at most {MAX_USERNAME_LEN} printable characters"
            )));
        }
        if credential.chars().count() < MIN_CREDENTIAL_LEN {
            return Err(RecordsError::Validation(format!(
                "credential must be at least {MIN_CREDENTIAL_LEN} characters"
            )));
        }
        let credential_hash = credential::hash(credential);
        let mut state = self.write();
        if state.by_name.contains_key(username) {
            return Err(RecordsError::Conflict(username.to_string()));
        }
        let user = StoredUser {
            user_id: state.users.len() as u64 + 1,
            username: username.to_string(),
            credential_hash,
            role,
        };
        let public = user.public();
        state.commit(Entry::User(user))?;
        Ok(public)
    }

    pub fn login(&self, username: &str, credential: &str) -> Result<Session> {
        let found = {
            let state = self.read();
            state
                .by_name
                .get(username.trim())
                .map(|&i| (state.users[i].public(), state.users[i].credential_hash.clone()))
        };
        let Some((user, hash)) = found else {
            credential::verify_dummy(credential);
            return Err(RecordsError::Auth);
        };
        if !credential::verify(credential, &hash) {
            return Err(RecordsError::Auth);
        }
        let session = Session {
            token: new_token(),
            user_id: user.user_id,
            role: user.role,
            expires_at: Utc::now() + self.session_lifetime,
        };
        let mut state = self.write();
        let now = Utc::now();
        state.sessions.retain(|_, s| s.expires_at > now);
        state.sessions.insert(session.token.clone(), session.clone());
        Ok(session)
    }

    /// The live session for `token`.
    pub fn authenticate(&self, token: &str) -> Result<Session> {
        let state = self.read();
        match state.sessions.get(token) {
            Some(s) if s.expires_at > Utc::now() => Ok(s.clone()),
            _ => Err(RecordsError::Auth),
        }
    }

    pub fn logout(&self, token: &str) {
        self.write().sessions.remove(token);
    }

    pub fn user(&self, user_id: u64) -> Option<User> {
        self.read().user(user_id).map(StoredUser::public)
    }

    pub fn create_record(&self, token: &str, new: NewRecord) -> Result<MedicalRecord> {
        let session = self.authenticate(token)?;
        if session.role != Role::Doctor {
            return Err(RecordsError::Forbidden("only doctors can create records".into()));
        }
        let diagnosis = new.diagnosis.trim();
        if diagnosis.is_empty() {
            return Err(RecordsError::Validation("diagnosis must not be empty".into()));
        }
        let mut state = self.write();
        if state.user(new.patient_id).map(|u| u.role) != Some(Role::Patient) {
            return Err(RecordsError::NotFound(format!("no patient with id {}", new.patient_id)));
        }
        let last = state.records.last();
        let record = MedicalRecord {
            record_id: last.map_or(1, |r| r.record_id + 1),
            patient_id: new.patient_id,
            doctor_id: session.user_id,
            symptoms: new.symptoms,
            diagnosis: diagnosis.to_string(),
            notes: new.notes,
            created_at: last.map_or_else(Utc::now, |r| r.created_at.max(Utc::now())),
        };
        state.commit(Entry::Record(record.clone()))?;
        Ok(record)
    }

    /// Records of `patient_id`, oldest first. Doctors may read any patient's
    /// history, patients only their own.
    pub fn get_history(&self, token: &str, patient_id: u64) -> Result<Vec<MedicalRecord>> {
        let session = self.authenticate(token)?;
        if session.role == Role::Patient && session.user_id != patient_id {
            return Err(RecordsError::Forbidden("patients may only read their own history".into()));
        }
        let state = self.read();
        if state.user(patient_id).map(|u| u.role) != Some(Role::Patient) {
            return Err(RecordsError::NotFound(format!("no patient with id {patient_id}")));
        }
        let mut records: Vec<MedicalRecord> =
            state.records.iter().filter(|r| r.patient_id == patient_id).cloned().collect();
        records.sort_by_key(|r| (r.created_at, r.record_id));
        Ok(records)
    }

    /// Records cannot be changed or removed by anyone.
    pub fn attempt_mutation(&self, record_id: u64) -> Result<MedicalRecord> {
        Err(RecordsError::Immutable(record_id))
    }

    pub fn record_count(&self) -> usize {
        self.read().records.len()
    }

    pub fn user_count(&self) -> usize {
        self.read().users.len()
    }

    /// Every persisted entry rendered exactly as the journal stores it.
    pub fn snapshot(&self) -> String {
        let state = self.read();
        let mut out = String::new();
        for entry in &state.log {
            out.push_str(&serde_json::to_string(entry).expect("journal entries serialize"));
            out.push('\n');
        }
        out
    }

    /// Flushes the journal to disk.
    pub fn sync(&self) -> Result<()> {
        self.write().journal.sync()
    }
}
