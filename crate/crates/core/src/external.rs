//! Registration and network metadata collected ahead of time.
//!
//! Records are read from a tab-separated sidecar file, one URL per line:
//!
//! ```text
//! url=<exact url>\tregistrar=GoDaddy\tregistration_date=2009-01-02\tobserved_date=2010-06-15
//! ```
//!
//! Recognised keys: `url` (required, first), `observed_date` (required),
//! `primary_domain`, `registrar`, `registrant`, `registration_date`,
//! `bgp_prefix`, `as_number`, `country_code`. Unknown keys are ignored.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

use crate::features::scale;

/// Site ages at or beyond this many days saturate at 1.0.
pub const AGE_CAP_DAYS: u32 = 3650;

pub const MISSING_KEY: &str = "ext_missing";
pub const SITE_AGE_KEY: &str = "site_age_days";

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("reading sidecar: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalRecord {
    pub url_key: String,
    pub primary_domain: Option<String>,
    pub registrar: Option<String>,
    pub registrant: Option<String>,
    pub registration_date: Option<NaiveDate>,
    pub bgp_prefix: Option<String>,
    pub as_number: Option<u32>,
    pub country_code: Option<String>,
    pub observed_date: NaiveDate,
}

impl ExternalRecord {
    pub fn new(url_key: impl Into<String>, observed_date: NaiveDate) -> Self {
        ExternalRecord {
            url_key: url_key.into(),
            primary_domain: None,
            registrar: None,
            registrant: None,
            registration_date: None,
            bgp_prefix: None,
            as_number: None,
            country_code: None,
            observed_date,
        }
    }

    pub fn site_age_days(&self) -> Option<u32> {
        self.registration_date
            .map(|reg| (self.observed_date - reg).num_days().max(0) as u32)
    }
}

fn parse_date(value: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|e| format!("bad date `{value}`: {e}"))
}

fn category(value: &str) -> Option<String> {
    let v = value.trim().to_lowercase();
    (!v.is_empty()).then_some(v)
}

pub fn parse_record(line: &str) -> Result<ExternalRecord, String> {
    let mut fields = line.split('\t').map(|f| {
        f.split_once('=')
            .ok_or_else(|| format!("field `{f}` is not key=value"))
    });
    let url_key = match fields.next() {
        Some(Ok(("url", v))) if !v.trim().is_empty() => v.trim().to_string(),
        Some(Err(e)) => return Err(e),
        _ => return Err("first field must be url=<url>".into()),
    };

    let mut observed = None;
    let mut rec = ExternalRecord::new(url_key, NaiveDate::MIN);
    for field in fields {
        let (key, value) = field?;
        match key.trim() {
            "primary_domain" => rec.primary_domain = category(value),
            "registrar" => rec.registrar = category(value),
            "registrant" => rec.registrant = category(value),
            "bgp_prefix" => rec.bgp_prefix = category(value),
            "country_code" => rec.country_code = category(value),
            "as_number" => {
                let v = value.trim().trim_start_matches(['A', 'S', 'a', 's']);
                rec.as_number = Some(v.parse().map_err(|_| format!("bad as_number `{value}`"))?);
            }
            "registration_date" => rec.registration_date = Some(parse_date(value.trim())?),
            "observed_date" => observed = Some(parse_date(value.trim())?),
            _ => {}
        }
    }
    rec.observed_date = observed.ok_or("missing observed_date")?;
    if let Some(reg) = rec.registration_date {
        if reg > rec.observed_date {
            return Err("registration_date is after observed_date".into());
        }
    }
    Ok(rec)
}

/// Parses sidecar text. Blank lines and `#` comments are skipped; a later
/// record for the same URL replaces an earlier one.
pub fn parse_sidecar(text: &str) -> Result<HashMap<String, ExternalRecord>, SidecarError> {
    let mut records = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let rec = parse_record(line).map_err(|message| SidecarError::Parse {
            line: n + 1,
            message,
        })?;
        records.insert(rec.url_key.clone(), rec);
    }
    Ok(records)
}

pub fn load_sidecar(
    path: impl AsRef<Path>,
) -> Result<HashMap<String, ExternalRecord>, SidecarError> {
    parse_sidecar(&fs::read_to_string(path)?)
}

/// Feature keys and values for one URL's record.
pub fn extract_external(record: Option<&ExternalRecord>) -> Vec<(String, f64)> {
    let Some(rec) = record else {
        return vec![(MISSING_KEY.to_string(), 1.0)];
    };
    let mut out = Vec::new();
    let mut binary = |prefix: &str, value: &Option<String>| {
        if let Some(v) = value {
            out.push((format!("{prefix}={v}"), 1.0));
        }
    };
    binary("registrar", &rec.registrar);
    binary("registrant", &rec.registrant);
    binary("primary_domain", &rec.primary_domain);
    binary("bgp", &rec.bgp_prefix);
    binary("asn", &rec.as_number.map(|a| a.to_string()));
    binary("cc", &rec.country_code);
    if let Some(age) = rec.site_age_days() {
        out.push((SITE_AGE_KEY.to_string(), scale(age, AGE_CAP_DAYS)));
    }
    out
}
