use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Serialize;
use serde_json::Value as Json;

use super::transport::{retry_after, Response, Transport, TransportError};
use super::url::{Forge, ForgeRef};
use super::ForgeError;

/// API responses gathered for one repository, before any mapping.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RawForgeData {
    pub forge: Forge,
    pub repo_info: Json,
    pub license_info: Option<Json>,
    pub topics: Vec<String>,
    pub latest_release: Option<Json>,
    pub contributors: Vec<Json>,
    /// Optional endpoints that were unavailable.
    pub notes: Vec<String>,
}

/// Unreserved characters stay literal in GitLab project ids.
const PROJECT_ID: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.').remove(b'~');

struct Endpoint {
    name: &'static str,
    path: String,
}

/// Fetches every endpoint the mapping reads, concurrently.
pub fn fetch_raw(repo: &ForgeRef, transport: &dyn Transport) -> Result<RawForgeData, ForgeError> {
    let endpoints = endpoints(repo);
    let results: Vec<Result<Response, TransportError>> = std::thread::scope(|s| {
        let handles: Vec<_> = endpoints
            .iter()
            .map(|ep| s.spawn(move || transport.get(repo, &ep.path)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(TransportError::Fatal("request thread panicked".into())))
            })
            .collect()
    });

    let mut notes = Vec::new();
    let mut bodies = Vec::with_capacity(endpoints.len());
    for (i, (ep, result)) in endpoints.iter().zip(results).enumerate() {
        let required = i == 0;
        let resp = result.map_err(|e| ForgeError::Transport(e.to_string()))?;
        bodies.push(read_body(ep, &resp, required, &mut notes)?);
    }
    let mut bodies = bodies.into_iter();
    let repo_info = bodies.next().flatten().unwrap_or(Json::Null);
    if !repo_info.is_object() {
        return Err(ForgeError::MalformedResponse(format!(
            "{}: expected a JSON object",
            endpoints[0].path
        )));
    }

    Ok(match repo.forge {
        Forge::Github => {
            let topics = bodies.next().flatten();
            let license_info = bodies.next().flatten();
            let latest_release = bodies.next().flatten();
            let contributors = bodies.next().flatten();
            RawForgeData {
                forge: repo.forge,
                topics: strings(topics.as_ref().and_then(|t| t.get("names"))),
                license_info,
                latest_release,
                contributors: array(contributors),
                repo_info,
                notes,
            }
        }
        Forge::Gitlab => {
            let releases = bodies.next().flatten();
            let members = bodies.next().flatten();
            let topics = repo_info
                .get("topics")
                .filter(|t| t.as_array().is_some_and(|a| !a.is_empty()))
                .or_else(|| repo_info.get("tag_list"));
            let latest_release = releases
                .as_ref()
                .and_then(Json::as_array)
                .and_then(|a| a.first())
                .cloned();
            if releases.is_some() && latest_release.is_none() {
                notes.push("releases: none published".to_string());
            }
            RawForgeData {
                forge: repo.forge,
                topics: strings(topics),
                license_info: repo_info.get("license").filter(|l| !l.is_null()).cloned(),
                latest_release,
                contributors: array(members),
                repo_info,
                notes,
            }
        }
    })
}

fn endpoints(repo: &ForgeRef) -> Vec<Endpoint> {
    let ep = |name, path: String| Endpoint { name, path };
    match repo.forge {
        Forge::Github => {
            let base = format!("/repos/{}/{}", repo.owner, repo.repo);
            vec![
                ep("repository", base.clone()),
                ep("topics", format!("{base}/topics")),
                ep("license", format!("{base}/license")),
                ep("latest release", format!("{base}/releases/latest")),
                ep("contributors", format!("{base}/contributors")),
            ]
        }
        Forge::Gitlab => {
            let id = format!("{}/{}", repo.owner, repo.repo);
            let base = format!("/api/v4/projects/{}", utf8_percent_encode(&id, PROJECT_ID));
            vec![
                ep("repository", format!("{base}?license=true")),
                ep("releases", format!("{base}/releases")),
                ep("members", format!("{base}/members")),
            ]
        }
    }
}

fn read_body(
    ep: &Endpoint,
    resp: &Response,
    required: bool,
    notes: &mut Vec<String>,
) -> Result<Option<Json>, ForgeError> {
    let limited = |r: &Response| {
        ["x-ratelimit-remaining", "ratelimit-remaining"]
            .iter()
            .any(|h| r.header(h).is_some_and(|v| v.trim() == "0"))
    };
    match resp.status {
        204 => Ok(None),
        s if (200..300).contains(&s) => {
            if resp.body.trim().is_empty() {
                return Ok(None);
            }
            serde_json::from_str(&resp.body)
                .map(Some)
                .map_err(|e| ForgeError::MalformedResponse(format!("{}: {e}", ep.path)))
        }
        404 if required => Err(ForgeError::NotFound),
        404 => {
            notes.push(format!("{}: not available", ep.name));
            Ok(None)
        }
        429 => Err(ForgeError::RateLimited {
            retry_after: retry_after(resp),
        }),
        403 if limited(resp) => Err(ForgeError::RateLimited {
            retry_after: retry_after(resp),
        }),
        401 | 403 => Err(ForgeError::Unauthorized { status: resp.status }),
        status if required => Err(ForgeError::Upstream {
            status,
            path: ep.path.clone(),
        }),
        status => {
            notes.push(format!("{}: upstream answered {status}", ep.name));
            Ok(None)
        }
    }
}

fn strings(v: Option<&Json>) -> Vec<String> {
    v.and_then(Json::as_array)
        .map(|a| {
            a.iter()
                .filter_map(Json::as_str)
                .filter(|s| !s.trim().is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

fn array(v: Option<Json>) -> Vec<Json> {
    match v {
        Some(Json::Array(a)) => a,
        _ => Vec::new(),
    }
}
