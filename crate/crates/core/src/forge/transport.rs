use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use super::url::{Forge, ForgeRef};

/// Raw HTTP response with lowercase header names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub headers: BTreeMap<String, String>,
    pub body: String,
}

impl Response {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(&name.to_ascii_lowercase()).map(String::as_str)
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    /// Connection failures and timeouts, worth one more attempt.
    #[error("transient transport failure: {0}")]
    Transient(String),
    #[error("transport failure: {0}")]
    Fatal(String),
}

/// Fetches one forge API path such as `/repos/o/r/topics` or
/// `/api/v4/projects/o%2Fr?license=true`.
pub trait Transport: Send + Sync {
    fn get(&self, repo: &ForgeRef, path: &str) -> Result<Response, TransportError>;
}

/// Serves recorded API responses from a directory.
///
/// A path maps to `<dir>/<path>.json` with `?` written as `@`. An optional
/// `<path>.meta.json` holding `{"status": .., "headers": {..}}` overrides the
/// status and headers. Missing files answer 404.
#[derive(Debug, Clone)]
pub struct FixtureTransport {
    dir: PathBuf,
}

#[derive(Deserialize)]
struct Meta {
    #[serde(default = "ok")]
    status: u16,
    #[serde(default)]
    headers: BTreeMap<String, String>,
}

fn ok() -> u16 {
    200
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_stem(&self, path: &str) -> Result<PathBuf, TransportError> {
        let rel = path.trim_start_matches('/').replace('?', "@");
        let mut out = self.dir.clone();
        for seg in rel.split('/') {
            if seg.is_empty() || seg == "." || seg == ".." {
                return Err(TransportError::Fatal(format!("invalid fixture path `{path}`")));
            }
            out.push(seg);
        }
        Ok(out)
    }
}

impl Transport for FixtureTransport {
    fn get(&self, _repo: &ForgeRef, path: &str) -> Result<Response, TransportError> {
        let stem = self.file_stem(path)?;
        let with_ext = |ext: &str| {
            let mut p = stem.clone().into_os_string();
            p.push(ext);
            PathBuf::from(p)
        };
        let read = |p: &Path| match std::fs::read_to_string(p) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(TransportError::Fatal(format!("{}: {e}", p.display()))),
        };
        let body = read(&with_ext(".json"))?;
        let meta = match read(&with_ext(".meta.json"))? {
            Some(s) => Some(
                serde_json::from_str::<Meta>(&s)
                    .map_err(|e| TransportError::Fatal(format!("fixture meta for `{path}`: {e}")))?,
            ),
            None => None,
        };
        let (status, headers) = match (meta, &body) {
            (Some(m), _) => (m.status, m.headers),
            (None, Some(_)) => (200, BTreeMap::new()),
            (None, None) => (404, BTreeMap::new()),
        };
        Ok(Response {
            status,
            headers: headers
                .into_iter()
                .map(|(k, v)| (k.to_ascii_lowercase(), v))
                .collect(),
            body: body.unwrap_or_else(|| r#"{"message":"Not Found"}"#.to_string()),
        })
    }
}

/// Live HTTPS access to api.github.com or a GitLab instance.
///
/// Tokens are read from `ERSMETA_GITHUB_TOKEN` and `ERSMETA_GITLAB_TOKEN`.
pub struct HttpTransport {
    agent: ureq::Agent,
    github_token: Option<String>,
    gitlab_token: Option<String>,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent("ersmeta")
            .build();
        HttpTransport {
            agent: config.into(),
            github_token: std::env::var("ERSMETA_GITHUB_TOKEN").ok().filter(|t| !t.is_empty()),
            gitlab_token: std::env::var("ERSMETA_GITLAB_TOKEN").ok().filter(|t| !t.is_empty()),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(Duration::from_secs(20))
    }
}

impl Transport for HttpTransport {
    fn get(&self, repo: &ForgeRef, path: &str) -> Result<Response, TransportError> {
        let (base, token) = match repo.forge {
            Forge::Github => ("https://api.github.com".to_string(), &self.github_token),
            Forge::Gitlab => (format!("https://{}", repo.host), &self.gitlab_token),
        };
        let mut req = self.agent.get(&format!("{base}{path}"));
        if repo.forge == Forge::Github {
            req = req.header("Accept", "application/vnd.github+json");
        }
        if let Some(t) = token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req.call().map_err(|e| match e {
            ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::ConnectionFailed => {
                TransportError::Transient(e.to_string())
            }
            other => TransportError::Fatal(other.to_string()),
        })?;
        let status = resp.status().as_u16();
        let headers = resp
            .headers()
            .iter()
            .filter_map(|(k, v)| Some((k.as_str().to_ascii_lowercase(), v.to_str().ok()?.to_string())))
            .collect();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        Ok(Response {
            status,
            headers,
            body,
        })
    }
}

/// Retries transient failures and 5xx answers once, and waits out a 429 when
/// its `Retry-After` is within `max_wait`. Other 4xx answers pass through.
pub struct RetryingTransport<T> {
    inner: T,
    backoff: Duration,
    max_wait: Duration,
    sleep: Box<dyn Fn(Duration) + Send + Sync>,
}

impl<T: Transport> RetryingTransport<T> {
    pub fn new(inner: T) -> Self {
        RetryingTransport {
            inner,
            backoff: Duration::from_millis(500),
            max_wait: Duration::from_secs(5),
            sleep: Box::new(std::thread::sleep),
        }
    }

    pub fn with_sleep(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Box::new(sleep);
        self
    }

    pub fn with_max_wait(mut self, max_wait: Duration) -> Self {
        self.max_wait = max_wait;
        self
    }
}

pub(crate) fn retry_after(resp: &Response) -> Option<u64> {
    resp.header("retry-after")?.trim().parse().ok()
}

impl<T: Transport> Transport for RetryingTransport<T> {
    fn get(&self, repo: &ForgeRef, path: &str) -> Result<Response, TransportError> {
        let mut delay = self.backoff;
        for attempt in 0..2 {
            let last = attempt == 1;
            match self.inner.get(repo, path) {
                Err(TransportError::Transient(_)) if !last => {}
                Ok(r) if r.status >= 500 && !last => {}
                Ok(r) if r.status == 429 && !last => match retry_after(&r) {
                    Some(secs) if Duration::from_secs(secs) <= self.max_wait => {
                        delay = Duration::from_secs(secs);
                    }
                    _ => return Ok(r),
                },
                other => return other,
            }
            (self.sleep)(delay);
            delay *= 2;
        }
        unreachable!("the second attempt always returns")
    }
}
