//! Structural decomposition of URL strings.
//!
//! A URL is split into host, optional port, directory segments, file name,
//! file extension and query. The scheme, any `user@` prefix and the fragment
//! are removed first; everything else is kept byte-for-byte so the parts can
//! be reassembled into the stripped input.

use thiserror::Error;

/// Characters that separate tokens inside a URL.
pub const DELIMITERS: [char; 7] = ['/', '?', '.', '=', '_', '&', '-'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("empty url")]
    EmptyUrl,
    #[error("url contains whitespace")]
    Whitespace,
    #[error("url has no host")]
    MissingHost,
    #[error("malformed port `{0}`")]
    MalformedPort(String),
}

/// A validated URL string: non-empty, trimmed, no interior whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawUrl(String);

impl RawUrl {
    pub fn new(text: &str) -> Result<Self, LexError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(LexError::EmptyUrl);
        }
        if trimmed.chars().any(char::is_whitespace) {
            return Err(LexError::Whitespace);
        }
        Ok(RawUrl(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for RawUrl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UrlParts {
    pub host: String,
    pub port: Option<u16>,
    /// Whether a `/` followed the authority.
    pub path_present: bool,
    /// Segments between the host and the final path segment.
    pub directories: Vec<String>,
    pub file_name: Option<String>,
    pub file_extension: Option<String>,
    pub query: Option<String>,
    pub host_is_ip: bool,
}

impl UrlParts {
    /// Rebuilds the scheme-stripped URL from its parts.
    pub fn reassemble(&self) -> String {
        let mut out = self.host.clone();
        if let Some(port) = self.port {
            out.push(':');
            out.push_str(&port.to_string());
        }
        if self.path_present {
            out.push('/');
            for dir in &self.directories {
                out.push_str(dir);
                out.push('/');
            }
            if let Some(file) = &self.file_name {
                out.push_str(file);
                if let Some(ext) = &self.file_extension {
                    out.push('.');
                    out.push_str(ext);
                }
            }
        }
        if let Some(query) = &self.query {
            out.push('?');
            out.push_str(query);
        }
        out
    }

    /// The directory part including its bounding slashes, e.g. `/form2/paypal/`.
    /// Empty when the URL has no directories.
    pub fn directory_text(&self) -> String {
        if self.directories.is_empty() {
            return String::new();
        }
        let mut out = String::from("/");
        for dir in &self.directories {
            out.push_str(dir);
            out.push('/');
        }
        out
    }

    /// The final path segment, e.g. `webscr.php`.
    pub fn file_text(&self) -> Option<String> {
        self.file_name
            .as_ref()
            .map(|file| match &self.file_extension {
                Some(ext) => format!("{file}.{ext}"),
                None => file.clone(),
            })
    }
}

/// Removes an `http://` or `https://` prefix (case-insensitive).
pub fn strip_scheme(text: &str) -> &str {
    for scheme in ["http://", "https://"] {
        if text.len() >= scheme.len() && text[..scheme.len()].eq_ignore_ascii_case(scheme) {
            return &text[scheme.len()..];
        }
    }
    text
}

pub fn parse_url(raw: &RawUrl) -> Result<UrlParts, LexError> {
    let text = strip_scheme(raw.as_str());
    let text = text.split('#').next().unwrap_or_default();

    let (before_query, query) = match text.split_once('?') {
        Some((head, q)) => (head, Some(q.to_string())),
        None => (text, None),
    };
    let (authority, path) = match before_query.find('/') {
        Some(pos) => (&before_query[..pos], Some(&before_query[pos + 1..])),
        None => (before_query, None),
    };
    let authority = match authority.rfind('@') {
        Some(pos) => &authority[pos + 1..],
        None => authority,
    };
    let (host, port) = match authority.split_once(':') {
        Some((host, port_text)) => {
            let port = port_text
                .parse::<u16>()
                .ok()
                .filter(|&p| p > 0 && port_text.chars().all(|c| c.is_ascii_digit()))
                .ok_or_else(|| LexError::MalformedPort(port_text.to_string()))?;
            (host, Some(port))
        }
        None => (authority, None),
    };
    if host.is_empty() {
        return Err(LexError::MissingHost);
    }

    let mut parts = UrlParts {
        host: host.to_string(),
        port,
        host_is_ip: detect_ip_host(host),
        query,
        ..UrlParts::default()
    };

    if let Some(path) = path {
        parts.path_present = true;
        let mut segments: Vec<&str> = path.split('/').collect();
        // `split` always yields at least one element; the last one is the
        // file segment, empty when the path ends with '/'.
        let last = segments.pop().unwrap_or_default();
        parts.directories = segments.into_iter().map(str::to_string).collect();
        if !last.is_empty() {
            match last.rfind('.') {
                Some(dot) => {
                    parts.file_name = Some(last[..dot].to_string());
                    parts.file_extension = Some(last[dot + 1..].to_string());
                }
                None => parts.file_name = Some(last.to_string()),
            }
        }
    }
    Ok(parts)
}

/// Splits on [`DELIMITERS`], dropping empty tokens and lowercasing the rest.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c| DELIMITERS.contains(&c))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True for dotted-decimal IPv4 hosts and for dotted-hex hosts such as
/// `0xd3.0xe9.0x27.0x91`.
pub fn detect_ip_host(host: &str) -> bool {
    let groups: Vec<&str> = host.split('.').collect();
    if groups.len() != 4 {
        return false;
    }
    let decimal = groups.iter().all(|g| {
        !g.is_empty()
            && g.len() <= 3
            && g.bytes().all(|b| b.is_ascii_digit())
            && g.parse::<u16>().is_ok_and(|v| v <= 255)
    });
    if decimal {
        return true;
    }
    groups.iter().all(|g| {
        let digits = g.strip_prefix("0x").or_else(|| g.strip_prefix("0X"));
        match digits {
            Some(d) => !d.is_empty() && u32::from_str_radix(d, 16).is_ok_and(|v| v <= 255),
            None => false,
        }
    })
}
