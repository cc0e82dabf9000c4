use std::fmt;

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};

use super::ForgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Forge {
    Github,
    Gitlab,
}

impl fmt::Display for Forge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Forge::Github => "github",
            Forge::Gitlab => "gitlab",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForgeRef {
    pub forge: Forge,
    pub host: String,
    /// For GitLab, nested groups joined with `/`.
    pub owner: String,
    pub repo: String,
}

/// Recognizes GitHub and GitLab repository URLs. Accepts a missing scheme,
/// `.git` suffixes, trailing slashes and deep links into trees or blobs.
pub fn parse_repo_url(input: &str) -> Result<ForgeRef, ForgeError> {
    let input = input.trim();
    let malformed = |why: &str| ForgeError::MalformedUrl(format!("`{input}`: {why}"));
    if input.is_empty() {
        return Err(malformed("empty URL"));
    }
    let parsed = match url::Url::parse(input) {
        Ok(u) => u,
        Err(url::ParseError::RelativeUrlWithoutBase) => url::Url::parse(&format!("https://{input}"))
            .map_err(|e| malformed(&e.to_string()))?,
        Err(e) => return Err(malformed(&e.to_string())),
    };
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(malformed("only http and https URLs are supported"));
    }
    let host = parsed
        .host_str()
        .ok_or_else(|| malformed("no host"))?
        .to_ascii_lowercase();
    let segments: Vec<String> = parsed
        .path_segments()
        .into_iter()
        .flatten()
        .filter(|s| !s.is_empty())
        .map(|s| percent_decode_str(s).decode_utf8_lossy().into_owned())
        .collect();

    let (forge, mut parts) = if host == "github.com" || host == "www.github.com" {
        (Forge::Github, segments.into_iter().take(2).collect::<Vec<_>>())
    } else if host.split('.').any(|label| label.contains("gitlab")) {
        let end = segments
            .iter()
            .position(|s| s == "-" || s == "tree" || s == "blob")
            .unwrap_or(segments.len());
        (Forge::Gitlab, segments[..end].to_vec())
    } else {
        return Err(ForgeError::UnsupportedHost(host));
    };
    if parts.len() < 2 {
        return Err(malformed("expected an owner and a repository in the path"));
    }
    let mut repo = parts.pop().unwrap_or_default();
    if let Some(stripped) = repo.strip_suffix(".git") {
        repo = stripped.to_string();
    }
    if repo.is_empty() || parts.iter().any(|p| p == "." || p == "..") || repo == ".." {
        return Err(malformed("invalid repository path"));
    }
    let host = match forge {
        Forge::Github => "github.com".to_string(),
        Forge::Gitlab => host,
    };
    Ok(ForgeRef {
        forge,
        host,
        owner: parts.join("/"),
        repo,
    })
}
