//! HTTP access to the transparency-platform REST API.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::Utc;
use serde::{Deserialize, Serialize};

use crate::error::{IngestError, Result};
use crate::request::{eic, Quantity, SeriesRequest};
use crate::series::{RawSeries, Source};
use crate::xml::parse_market_document;

pub const TOKEN_ENV: &str = "ENTSOE_API_TOKEN";
pub const DEFAULT_BASE_URL: &str = "https://web-api.tp.entsoe.eu/api";

pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Executes GET requests; swapped out in tests.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, query: &[(String, String)]) -> Result<HttpResponse>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| IngestError::Transport(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, query: &[(String, String)]) -> Result<HttpResponse> {
        let resp = self
            .client
            .get(url)
            .query(query)
            .send()
            .map_err(|e| IngestError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| IngestError::Transport(e.to_string()))?.to_vec();
        Ok(HttpResponse { status, body })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientConfig {
    pub base_url: String,
    /// Burst size of the token bucket.
    pub burst: u32,
    pub requests_per_second: f64,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    /// Longest interval fetched in one call.
    pub chunk_days: i64,
    pub timeout_secs: u64,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: DEFAULT_BASE_URL.into(),
            burst: 5,
            requests_per_second: 1.0,
            max_attempts: 5,
            backoff_base_ms: 1000,
            backoff_max_ms: 60_000,
            chunk_days: 365,
            timeout_secs: 60,
        }
    }
}

struct TokenBucket {
    capacity: f64,
    rate: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    fn new(capacity: u32, rate: f64) -> Self {
        TokenBucket {
            capacity: f64::from(capacity.max(1)),
            rate,
            state: Mutex::new((f64::from(capacity.max(1)), Instant::now())),
        }
    }

    /// Takes one token, returning how long the caller must wait first.
    fn take(&self) -> Duration {
        let mut s = self.state.lock().expect("bucket lock");
        let now = Instant::now();
        let refill = now.duration_since(s.1).as_secs_f64() * self.rate;
        s.0 = (s.0 + refill).min(self.capacity);
        s.1 = now;
        s.0 -= 1.0;
        if s.0 >= 0.0 || self.rate <= 0.0 {
            Duration::ZERO
        } else {
            Duration::from_secs_f64(-s.0 / self.rate)
        }
    }
}

pub struct Client {
    transport: Box<dyn Transport>,
    token: String,
    cfg: ClientConfig,
    bucket: TokenBucket,
    calls: AtomicUsize,
    sleep: fn(Duration),
}

impl Client {
    pub fn new(transport: Box<dyn Transport>, token: impl Into<String>, cfg: ClientConfig) -> Self {
        Client {
            bucket: TokenBucket::new(cfg.burst, cfg.requests_per_second),
            transport,
            token: token.into(),
            cfg,
            calls: AtomicUsize::new(0),
            sleep: std::thread::sleep,
        }
    }

    /// Live client over HTTPS with the token from [`TOKEN_ENV`].
    pub fn from_env(cfg: ClientConfig) -> Result<Self> {
        let token = std::env::var(TOKEN_ENV)
            .ok()
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| IngestError::Auth { status: 0, message: format!("{TOKEN_ENV} is not set") })?;
        let transport = HttpTransport::new(Duration::from_secs(cfg.timeout_secs))?;
        Ok(Client::new(Box::new(transport), token, cfg))
    }

    /// Replaces the sleep used for rate limiting and backoff.
    pub fn with_sleeper(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    /// Number of HTTP requests issued so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn query(&self, req: &SeriesRequest) -> Result<Vec<(String, String)>> {
        req.validate()?;
        let area = eic(&req.area)?;
        let p = |k: &str, v: &str| (k.to_string(), v.to_string());
        let mut q = vec![p("securityToken", &self.token)];
        let psr = |code: &str| vec![p("documentType", "A69"), p("processType", "A01"), p("in_Domain", area), p("psrType", code)];
        q.extend(match req.quantity {
            Quantity::LoadForecast => vec![p("documentType", "A65"), p("processType", "A01"), p("outBiddingZone_Domain", area)],
            Quantity::WindOnshoreFc => psr("B19"),
            Quantity::WindOffshoreFc => psr("B18"),
            Quantity::SolarFc => psr("B16"),
            Quantity::RorHydroFc => psr("B11"),
            Quantity::OtherGenerationFc => vec![p("documentType", "A71"), p("processType", "A01"), p("in_Domain", area)],
            Quantity::ScheduledExchange => {
                let to = eic(req.counterparty.as_deref().expect("validated"))?;
                vec![
                    p("documentType", "A09"),
                    p("contract_MarketAgreement.Type", "A01"),
                    p("out_Domain", area),
                    p("in_Domain", to),
                ]
            }
            Quantity::DayAheadPrice => vec![p("documentType", "A44"), p("in_Domain", area), p("out_Domain", area)],
        });
        q.push(p("periodStart", &req.start.format("%Y%m%d%H%M").to_string()));
        q.push(p("periodEnd", &req.end.format("%Y%m%d%H%M").to_string()));
        Ok(q)
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.cfg.backoff_base_ms.saturating_mul(1u64 << (attempt - 1).min(20));
        Duration::from_millis(ms.min(self.cfg.backoff_max_ms))
    }

    fn fetch_chunk(&self, req: &SeriesRequest) -> Result<RawSeries> {
        let query = self.query(req)?;
        let max = self.cfg.max_attempts.max(1);
        for attempt in 1..=max {
            let wait = self.bucket.take();
            if !wait.is_zero() {
                (self.sleep)(wait);
            }
            self.calls.fetch_add(1, Ordering::SeqCst);
            let resp = self.transport.get(&self.cfg.base_url, &query)?;
            match resp.status {
                200 => return RawSeries::from_xml(req, &resp.body, Source::Live),
                400 => {
                    let ack = parse_market_document(&resp.body).ok().and_then(|d| d.acknowledgement);
                    return match ack {
                        Some(text) if text.to_lowercase().contains("no matching data") => {
                            Ok(RawSeries::merge(req, Vec::new(), Source::Live))
                        }
                        other => Err(IngestError::Http {
                            status: 400,
                            message: other.unwrap_or_else(|| String::from_utf8_lossy(&resp.body).into_owned()),
                        }),
                    };
                }
                401 | 403 => {
                    return Err(IngestError::Auth {
                        status: resp.status,
                        message: String::from_utf8_lossy(&resp.body).chars().take(200).collect(),
                    })
                }
                429 | 503 => {
                    if attempt < max {
                        (self.sleep)(self.backoff(attempt));
                    }
                }
                status => {
                    return Err(IngestError::Http {
                        status,
                        message: String::from_utf8_lossy(&resp.body).chars().take(200).collect(),
                    })
                }
            }
        }
        Err(IngestError::RateLimited { attempts: max })
    }

    /// Downloads the request in chunks and merges them into one hourly series.
    pub fn fetch(&self, req: &SeriesRequest) -> Result<RawSeries> {
        req.validate()?;
        let parts = req
            .chunks(self.cfg.chunk_days.max(1))
            .iter()
            .map(|c| self.fetch_chunk(c))
            .collect::<Result<Vec<_>>>()?;
        let mut s = RawSeries::merge(req, parts, Source::Live);
        s.fetched_at = Some(Utc::now());
        s.validate()?;
        Ok(s)
    }
}
