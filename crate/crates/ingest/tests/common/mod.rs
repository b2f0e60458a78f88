#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use redispatch_ingest::client::{HttpResponse, Transport};
use redispatch_ingest::{IngestError, Result};

/// Fails the test on any network use.
pub struct NoNetwork;

impl Transport for NoNetwork {
    fn get(&self, url: &str, _: &[(String, String)]) -> Result<HttpResponse> {
        panic!("unexpected network request to {url}");
    }
}

/// Replays canned responses and records the queries it saw.
#[derive(Clone, Default)]
pub struct Scripted {
    pub responses: Arc<Mutex<VecDeque<(u16, Vec<u8>)>>>,
    pub seen: Arc<Mutex<Vec<Vec<(String, String)>>>>,
}

impl Scripted {
    pub fn new(responses: Vec<(u16, Vec<u8>)>) -> Self {
        Scripted { responses: Arc::new(Mutex::new(responses.into())), ..Default::default() }
    }

    pub fn param(&self, call: usize, key: &str) -> Option<String> {
        self.seen.lock().unwrap()[call].iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    }
}

impl Transport for Scripted {
    fn get(&self, _: &str, query: &[(String, String)]) -> Result<HttpResponse> {
        self.seen.lock().unwrap().push(query.to_vec());
        let (status, body) = self
            .responses
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| IngestError::Transport("script exhausted".into()))?;
        Ok(HttpResponse { status, body })
    }
}

pub fn no_sleep(_: std::time::Duration) {}
