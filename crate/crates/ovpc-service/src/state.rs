use std::collections::HashMap;
use std::sync::Arc;

use tokio::sync::{Mutex, RwLock};
use uuid::Uuid;

use ovpc_core::buffer::{BufferConfig, CloudBuffer};
use ovpc_core::ghpr::GhprConfig;
use ovpc_core::navmap::NavMap;
use ovpc_core::traversability::TraversabilityConfig;

/// One mapping session: a scan buffer plus the most recently built map.
/// Pushes and frame builds serialize on the session lock (single writer);
/// queries clone the latest map handle and run lock-free.
pub struct Session {
    pub buffer: CloudBuffer,
    pub buffer_cfg: BufferConfig,
    /// Viewpoint here is relative to the frame target.
    pub ghpr: GhprConfig,
    pub trav: TraversabilityConfig,
    pub latest: Option<Arc<NavMap>>,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<Uuid, Arc<Mutex<Session>>>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub async fn insert_session(&self, session: Session) -> Uuid {
        let id = Uuid::new_v4();
        self.sessions
            .write()
            .await
            .insert(id, Arc::new(Mutex::new(session)));
        id
    }

    pub async fn session(&self, id: Uuid) -> Option<Arc<Mutex<Session>>> {
        self.sessions.read().await.get(&id).cloned()
    }

    pub async fn remove_session(&self, id: Uuid) -> bool {
        self.sessions.write().await.remove(&id).is_some()
    }
}
