//! In-memory sessions holding frames, with per-session LRU eviction.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use luxen_core::Frame;

pub const DEFAULT_FRAMES_PER_SESSION: usize = 32;

pub type SharedFrame = Arc<Mutex<Frame>>;

#[derive(Debug)]
struct Slot {
    frame: SharedFrame,
    session: u64,
    parent: Option<u64>,
    last_used: u64,
}

#[derive(Debug)]
pub struct Session {
    pub created_at: SystemTime,
    frames: Vec<u64>,
}

#[derive(Debug, Clone)]
pub enum Lookup {
    Live(SharedFrame),
    Evicted,
    Unknown,
}

#[derive(Debug)]
pub struct Store {
    cap: usize,
    tick: u64,
    next_id: u64,
    sessions: HashMap<u64, Session>,
    frames: HashMap<u64, Slot>,
    evicted: HashSet<u64>,
}

impl Store {
    pub fn new(frames_per_session: usize) -> Store {
        Store {
            cap: frames_per_session.max(1),
            tick: 0,
            next_id: 1,
            sessions: HashMap::new(),
            frames: HashMap::new(),
            evicted: HashSet::new(),
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn create_session(&mut self) -> u64 {
        let id = self.fresh_id();
        self.sessions.insert(id, Session { created_at: SystemTime::now(), frames: Vec::new() });
        id
    }

    pub fn has_session(&self, id: u64) -> bool {
        self.sessions.contains_key(&id)
    }

    /// Adds a frame to `session`, evicting the least recently used frames
    /// that no other live frame derives from. Returns None for an unknown session.
    pub fn insert(&mut self, session: u64, frame: Frame, parent: Option<u64>) -> Option<u64> {
        if !self.sessions.contains_key(&session) {
            return None;
        }
        let id = self.fresh_id();
        self.tick += 1;
        self.frames.insert(id, Slot { frame: Arc::new(Mutex::new(frame)), session, parent, last_used: self.tick });
        self.sessions.get_mut(&session)?.frames.push(id);
        self.evict(session, id);
        Some(id)
    }

    fn evict(&mut self, session: u64, keep: u64) {
        loop {
            let ids = &self.sessions[&session].frames;
            if ids.len() <= self.cap {
                return;
            }
            let pinned: HashSet<u64> = ids.iter().filter_map(|f| self.frames[f].parent).collect();
            let victim = ids
                .iter()
                .copied()
                .filter(|f| *f != keep && !pinned.contains(f))
                .min_by_key(|f| self.frames[f].last_used);
            let Some(victim) = victim else { return };
            self.frames.remove(&victim);
            self.evicted.insert(victim);
            self.sessions.get_mut(&session).unwrap().frames.retain(|f| *f != victim);
        }
    }

    pub fn get(&mut self, id: u64) -> Lookup {
        self.tick += 1;
        match self.frames.get_mut(&id) {
            Some(slot) => {
                slot.last_used = self.tick;
                Lookup::Live(slot.frame.clone())
            }
            None if self.evicted.contains(&id) => Lookup::Evicted,
            None => Lookup::Unknown,
        }
    }

    pub fn session_of(&self, id: u64) -> Option<u64> {
        self.frames.get(&id).map(|s| s.session)
    }

    pub fn frame_ids(&self, session: u64) -> Option<&[u64]> {
        self.sessions.get(&session).map(|s| s.frames.as_slice())
    }
}
