//! Per-document claims. At most one claim per document is active; an active
//! claim idle for longer than the timeout counts as released.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, TimeDelta, Utc};
use serde::Serialize;
use thiserror::Error;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(Utc::now)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimState {
    Active,
    Released,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub doc_id: String,
    pub annotator_id: String,
    pub claimed_at: DateTime<Utc>,
    pub last_activity: DateTime<Utc>,
    pub state: ClaimState,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClaimError {
    #[error("document {doc_id} is claimed by {annotator_id}")]
    HeldBy { doc_id: String, annotator_id: String },
    #[error("no active claim of yours on document {doc_id}")]
    NotHeld { doc_id: String },
}

pub struct ClaimRegistry {
    claims: Mutex<HashMap<String, Claim>>,
    idle_timeout: TimeDelta,
    clock: Clock,
}

impl std::fmt::Debug for ClaimRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClaimRegistry")
            .field("claims", &self.claims)
            .field("idle_timeout", &self.idle_timeout)
            .finish_non_exhaustive()
    }
}

pub const DEFAULT_IDLE_TIMEOUT_MINUTES: i64 = 60;

impl ClaimRegistry {
    pub fn new(idle_timeout: TimeDelta, clock: Clock) -> ClaimRegistry {
        ClaimRegistry {
            claims: Mutex::new(HashMap::new()),
            idle_timeout,
            clock,
        }
    }

    fn expire(&self, claim: &mut Claim, now: DateTime<Utc>) {
        if claim.state == ClaimState::Active && now - claim.last_activity >= self.idle_timeout {
            claim.state = ClaimState::Released;
        }
    }

    /// Takes the claim, or refreshes it if the caller already holds it.
    pub fn claim(&self, doc_id: &str, annotator_id: &str) -> Result<Claim, ClaimError> {
        let now = (self.clock)();
        let mut claims = self.claims.lock().unwrap();
        if let Some(existing) = claims.get_mut(doc_id) {
            self.expire(existing, now);
            if existing.state == ClaimState::Active {
                if existing.annotator_id != annotator_id {
                    return Err(ClaimError::HeldBy {
                        doc_id: doc_id.to_string(),
                        annotator_id: existing.annotator_id.clone(),
                    });
                }
                existing.last_activity = now;
                return Ok(existing.clone());
            }
        }
        let claim = Claim {
            doc_id: doc_id.to_string(),
            annotator_id: annotator_id.to_string(),
            claimed_at: now,
            last_activity: now,
            state: ClaimState::Active,
        };
        claims.insert(doc_id.to_string(), claim.clone());
        Ok(claim)
    }

    /// Ends the caller's active claim as released or finished.
    pub fn release(
        &self,
        doc_id: &str,
        annotator_id: &str,
        finished: bool,
    ) -> Result<Claim, ClaimError> {
        let now = (self.clock)();
        let mut claims = self.claims.lock().unwrap();
        let claim = self.active_of(&mut claims, doc_id, annotator_id, now)?;
        claim.state = if finished {
            ClaimState::Finished
        } else {
            ClaimState::Released
        };
        claim.last_activity = now;
        Ok(claim.clone())
    }

    /// Checks that the caller holds the active claim and records activity.
    pub fn touch(&self, doc_id: &str, annotator_id: &str) -> Result<(), ClaimError> {
        let now = (self.clock)();
        let mut claims = self.claims.lock().unwrap();
        self.active_of(&mut claims, doc_id, annotator_id, now)?
            .last_activity = now;
        Ok(())
    }

    fn active_of<'a>(
        &self,
        claims: &'a mut HashMap<String, Claim>,
        doc_id: &str,
        annotator_id: &str,
        now: DateTime<Utc>,
    ) -> Result<&'a mut Claim, ClaimError> {
        let not_held = || ClaimError::NotHeld {
            doc_id: doc_id.to_string(),
        };
        let claim = claims.get_mut(doc_id).ok_or_else(not_held)?;
        self.expire(claim, now);
        if claim.state != ClaimState::Active {
            return Err(not_held());
        }
        if claim.annotator_id != annotator_id {
            return Err(ClaimError::HeldBy {
                doc_id: doc_id.to_string(),
                annotator_id: claim.annotator_id.clone(),
            });
        }
        Ok(claim)
    }

    /// The latest claim on a document, with idle expiry applied.
    pub fn current(&self, doc_id: &str) -> Option<Claim> {
        let now = (self.clock)();
        let mut claims = self.claims.lock().unwrap();
        let claim = claims.get_mut(doc_id)?;
        self.expire(claim, now);
        Some(claim.clone())
    }
}
