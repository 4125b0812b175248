//! Seeded synthetic corpus with drifting phishing campaigns.
//!
//! Benign URLs come from a slowly growing pool of sites with directory-style
//! paths. Phishing URLs come from campaigns: each has a target brand, a
//! "kit" (directory and file names reused across its URLs), a hosting
//! pattern given by its obfuscation type, and a finite budget of URLs.
//! Campaigns start over time, go dormant when their budget runs out and are
//! occasionally revived. The mix of obfuscation types rotates over the
//! stream.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stream::{interleave, LabeledStream};
use crate::lexer::RawUrl;

/// Phishing host obfuscation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Obfuscation {
    /// Phishing page on a compromised site with an ordinary host.
    Plain,
    /// Host replaced by an IP address (type I).
    IpHost,
    /// Target host placed in the path of another domain (type II).
    HostInPath,
    /// Long deceptive host name (type III).
    LongHost,
    /// Unknown or misspelled domain (type IV).
    Misspelled,
}

/// Relative weights of obfuscation types I to IV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObfuscationMix(pub [f64; 4]);

impl Default for ObfuscationMix {
    fn default() -> Self {
        ObfuscationMix([1.0; 4])
    }
}

impl FromStr for ObfuscationMix {
    type Err = String;

    /// Four comma-separated non-negative weights, e.g. `1,1,2,0.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected 4 comma-separated weights, got `{s}`"));
        }
        let mut w = [0.0; 4];
        for (slot, p) in w.iter_mut().zip(parts) {
            *slot = p
                .parse::<f64>()
                .map_err(|e| format!("bad weight `{p}`: {e}"))?;
            if !(*slot >= 0.0 && slot.is_finite()) {
                return Err(format!("weights must be non-negative, got `{p}`"));
            }
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err("at least one weight must be positive".into());
        }
        Ok(ObfuscationMix(w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub seed: u64,
    /// Total number of URLs.
    pub size: usize,
    /// Fraction of phishing URLs.
    pub phish_ratio: f64,
    pub mix: ObfuscationMix,
    /// Fraction of campaigns hosted on compromised sites without host
    /// obfuscation.
    pub plain_ratio: f64,
    /// Fraction of phishing URLs that are lexically indistinguishable from
    /// benign ones (free hosting, compromised pages with ordinary paths).
    pub lookalike_ratio: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 2010,
            size: 8225,
            phish_ratio: 4082.0 / 8225.0,
            mix: ObfuscationMix::default(),
            plain_ratio: 0.4,
            lookalike_ratio: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// Benign URLs in acquisition order.
    pub benign: Vec<RawUrl>,
    /// Phishing URLs in acquisition order.
    pub malicious: Vec<RawUrl>,
    /// Obfuscation used by each phishing URL.
    pub obfuscation: Vec<Obfuscation>,
}

impl Corpus {
    /// Interleaved evaluation stream.
    pub fn stream(&self) -> LabeledStream {
        interleave(self.benign.clone(), self.malicious.clone())
    }
}

const CONSONANTS: &[u8] = b"bcdfghklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

const COMMON_WORDS: &[&str] = &[
    "about",
    "news",
    "products",
    "docs",
    "support",
    "help",
    "blog",
    "articles",
    "images",
    "contact",
    "research",
    "people",
    "events",
    "catalog",
    "shop",
    "search",
    "wiki",
    "forum",
    "library",
    "courses",
    "faculty",
    "archive",
    "home",
    "services",
    "downloads",
    "media",
    "reports",
    "projects",
    "team",
    "careers",
    "press",
    "store",
    "category",
    "item",
    "view",
    "content",
    "resources",
    "gallery",
    "music",
    "sports",
    "travel",
    "health",
    "science",
    "education",
    "history",
    "games",
    "photos",
    "recipes",
    "reviews",
    "community",
];

const BENIGN_TLDS: &[(&str, f64)] = &[
    ("com", 55.0),
    ("org", 14.0),
    ("net", 9.0),
    ("edu", 6.0),
    ("co.uk", 4.0),
    ("de", 4.0),
    ("gov", 2.0),
    ("info", 2.0),
    ("fr", 2.0),
    ("ca", 2.0),
];

const PHISH_TLDS: &[(&str, f64)] = &[
    ("com", 45.0),
    ("net", 12.0),
    ("org", 8.0),
    ("info", 8.0),
    ("ru", 6.0),
    ("biz", 4.0),
    ("cn", 4.0),
    ("br", 4.0),
    ("de", 3.0),
    ("co.uk", 3.0),
    ("pl", 2.0),
    ("in", 1.0),
];

const BRANDS: &[(&str, &str)] = &[
    ("paypal", "www.paypal.com"),
    ("ebay", "signin.ebay.com"),
    ("bankofamerica", "www.bankofamerica.com"),
    ("chase", "www.chase.com"),
    ("wellsfargo", "online.wellsfargo.com"),
    ("hsbc", "www.hsbc.co.uk"),
    ("amazon", "www.amazon.com"),
    ("apple", "appleid.apple.com"),
    ("facebook", "www.facebook.com"),
    ("barclays", "ibank.barclays.co.uk"),
    ("lloyds", "online.lloydstsb.co.uk"),
    ("halifax", "www.halifax-online.co.uk"),
    ("natwest", "www.nwolb.com"),
    ("citibank", "online.citibank.com"),
    ("usaa", "www.usaa.com"),
    ("irs", "www.irs.gov"),
    ("hmrc", "online.hmrc.gov.uk"),
    ("visa", "www.visa.com"),
    ("mastercard", "www.mastercard.com"),
    ("steam", "steamcommunity.com"),
];

const KIT_WORDS: &[&str] = &[
    "login",
    "signin",
    "secure",
    "account",
    "update",
    "verify",
    "confirm",
    "webscr",
    "cgi-bin",
    "ebayisapi",
    "banking",
    "online",
    "service",
    "customer",
    "billing",
    "validation",
    "security",
    "auth",
    "session",
    "wp-content",
    "wp-includes",
    "includes",
    "admin",
    "mail",
    "us",
    "en",
    "client",
    "myaccount",
    "ssl",
];

const KIT_FILES: &[&str] = &[
    "index", "login", "signin", "verify", "update", "webscr", "account", "confirm", "validate",
    "process",
];

const LURE_WORDS: &[&str] = &[
    "secure", "login", "verify", "account", "update", "support", "service", "online", "confirm",
    "billing",
];

fn pick_weighted<'a, R: Rng>(rng: &mut R, table: &'a [(&'a str, f64)]) -> &'a str {
    let dist = WeightedIndex::new(table.iter().map(|(_, w)| *w)).expect("positive weights");
    table[dist.sample(rng)].0
}

fn pseudo_word<R: Rng>(rng: &mut R, syllables: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.random_range(syllables);
    let mut w = String::new();
    for _ in 0..n {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    if rng.random_bool(0.4) {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
    }
    w
}

fn hex_string<R: Rng>(rng: &mut R, len: usize) -> String {
    (0..len)
        .map(|_| char::from_digit(rng.random_range(0..16), 16).unwrap())
        .collect()
}

fn word<R: Rng>(rng: &mut R, common_bias: f64) -> String {
    if rng.random_bool(common_bias) {
        COMMON_WORDS.choose(rng).unwrap().to_string()
    } else {
        pseudo_word(rng, 2..=3)
    }
}

struct Site {
    host: String,
    sections: Vec<String>,
    ext: &'static str,
}

fn new_site<R: Rng>(rng: &mut R) -> Site {
    let mut name = pseudo_word(rng, 2..=3);
    if rng.random_bool(0.3) {
        let sep = if rng.random_bool(0.3) { "-" } else { "" };
        name = format!("{name}{sep}{}", word(rng, 0.5));
    }
    let tld = pick_weighted(rng, BENIGN_TLDS);
    let prefix = match rng.random_range(0..10) {
        0..=5 => "www.",
        6 => "blog.",
        7 => "en.",
        _ => "",
    };
    let sections = (0..rng.random_range(2..=6))
        .map(|_| word(rng, 0.6))
        .collect();
    let ext = *["html", "htm", "php", "asp", "aspx", "jsp", "", ""]
        .choose(rng)
        .unwrap();
    Site {
        host: format!("{prefix}{name}.{tld}"),
        sections,
        ext,
    }
}

fn benign_url<R: Rng>(rng: &mut R, site: &Site) -> String {
    let mut url = site.host.clone();
    let hard = rng.random_bool(0.06);
    let depth = rng.random_range(0..=3);
    for d in 0..depth {
        let seg = if d == 0 {
            site.sections.choose(rng).unwrap().clone()
        } else {
            word(rng, 0.5)
        };
        url.push('/');
        url.push_str(&seg);
    }
    if hard {
        // ordinary account pages that share vocabulary with phishing kits
        url.push('/');
        url.push_str(
            [
                "account",
                "login",
                "signin",
                "secure",
                "myaccount",
                "billing",
            ]
            .choose(rng)
            .unwrap(),
        );
    }
    match rng.random_range(0..10) {
        0..=1 if !hard => url.push('/'),
        _ => {
            let stem = if hard {
                KIT_FILES.choose(rng).unwrap().to_string()
            } else {
                word(rng, 0.5)
            };
            let ext = if site.ext.is_empty() && hard {
                "php"
            } else {
                site.ext
            };
            url.push('/');
            url.push_str(&stem);
            if !ext.is_empty() {
                url.push('.');
                url.push_str(ext);
            }
        }
    }
    if rng.random_bool(if hard { 0.5 } else { 0.25 }) {
        let q = match rng.random_range(0..5) {
            0 => format!("id={}", rng.random_range(1..100_000)),
            1 => format!("page={}", rng.random_range(1..40)),
            2 => format!("q={}&lang=en", word(rng, 0.7)),
            3 => format!("cat={}&id={}", word(rng, 0.7), rng.random_range(1..5000)),
            _ => format!("returnurl=/{}/", word(rng, 0.7)),
        };
        url.push('?');
        url.push_str(&q);
    }
    if rng.random_bool(0.3) {
        url = format!("http://{url}");
    }
    url
}

struct Campaign {
    kind: Obfuscation,
    brand: usize,
    kit: Vec<String>,
    file: String,
    query: u8,
    query_key: String,
    /// Per-URL random directory, as kits use to dodge blacklists.
    random_dir: bool,
    hosts: Vec<String>,
    subnet: (u8, u8),
    tld: &'static str,
    remaining: usize,
}

fn misspell<R: Rng>(rng: &mut R, brand: &str) -> String {
    let mut chars: Vec<char> = brand.chars().collect();
    let i = rng.random_range(0..chars.len());
    match rng.random_range(0..4) {
        0 => chars[i] = *['1', '0', 'l', 'i', 'e', 'a'].choose(rng).unwrap(),
        1 => chars.insert(i, chars[i]),
        2 if chars.len() > 3 => {
            chars.remove(i);
        }
        _ => chars.push(*['s', 'z', 'x'].choose(rng).unwrap()),
    }
    chars.into_iter().collect()
}

/// `known` holds the hosts of benign sites that exist at this point of the
/// stream; compromised sites are drawn from them.
fn campaign_host<R: Rng>(
    rng: &mut R,
    kind: Obfuscation,
    brand: usize,
    tld: &str,
    known: &[String],
) -> String {
    let name = BRANDS[brand].0;
    match kind {
        Obfuscation::Plain | Obfuscation::HostInPath if rng.random_bool(0.6) => {
            known.choose(rng).expect("benign sites exist").clone()
        }
        Obfuscation::Plain | Obfuscation::HostInPath => {
            let prefix = if rng.random_bool(0.6) { "www." } else { "" };
            format!(
                "{prefix}{}.{}",
                pseudo_word(rng, 2..=3),
                pick_weighted(rng, BENIGN_TLDS)
            )
        }
        Obfuscation::LongHost => format!("{}.{tld}", pseudo_word(rng, 2..=3)),
        Obfuscation::Misspelled => {
            let base = if rng.random_bool(0.6) {
                misspell(rng, name)
            } else {
                pseudo_word(rng, 2..=3)
            };
            let host = if rng.random_bool(0.5) {
                format!("{base}-{}", LURE_WORDS.choose(rng).unwrap())
            } else {
                base
            };
            let prefix = if rng.random_bool(0.3) { "www." } else { "" };
            format!("{prefix}{host}.{tld}")
        }
        Obfuscation::IpHost => unreachable!("IP hosts are drawn per URL"),
    }
}

fn new_campaign<R: Rng>(rng: &mut R, kind: Obfuscation, known: &[String]) -> Campaign {
    let brand = rng.random_range(0..BRANDS.len());
    let tld = pick_weighted(rng, PHISH_TLDS);
    let kit = (0..rng.random_range(1..=3))
        .map(|_| {
            if rng.random_bool(0.2) {
                KIT_WORDS.choose(rng).unwrap().to_string()
            } else {
                pseudo_word(rng, 2..=3)
            }
        })
        .collect();
    let stem = if rng.random_bool(0.5) {
        KIT_FILES.choose(rng).unwrap().to_string()
    } else {
        pseudo_word(rng, 2..=3)
    };
    let file = format!(
        "{stem}.{}",
        ["php", "html", "htm", "asp"].choose(rng).unwrap()
    );
    let hosts = match kind {
        Obfuscation::IpHost => Vec::new(),
        _ => (0..rng.random_range(1..=4))
            .map(|_| campaign_host(rng, kind, brand, tld, known))
            .collect(),
    };
    Campaign {
        kind,
        brand,
        kit,
        file,
        query: [0, 0, 0, 1, 2, 2, 3, 4][rng.random_range(0..8)],
        query_key: pseudo_word(rng, 1..=2),
        random_dir: rng.random_bool(0.8),
        hosts,
        subnet: (rng.random_range(1..224), rng.random_range(0..=255)),
        tld,
        remaining: campaign_budget(rng),
    }
}

/// Heavy-tailed number of URLs per campaign activation.
fn campaign_budget<R: Rng>(rng: &mut R) -> usize {
    let u: f64 = rng.random_range(0.0..1.0);
    (10.0 / (1.0 - u).powf(0.7)).min(250.0) as usize
}

/// Deceptive labels in front of the campaign's base domain, fresh for every
/// URL.
fn long_host<R: Rng>(rng: &mut R, c: &Campaign) -> String {
    let (name, real) = BRANDS[c.brand];
    let mut labels: Vec<String> = Vec::new();
    if rng.random_bool(0.3) {
        labels.extend(real.split('.').map(str::to_string));
    } else if rng.random_bool(0.3) {
        labels.push(name.to_string());
    }
    for _ in 0..rng.random_range(2..=5) {
        labels.push(if rng.random_bool(0.2) {
            LURE_WORDS.choose(rng).unwrap().to_string()
        } else {
            pseudo_word(rng, 2..=4)
        });
    }
    let joiner = if c.query_key.len().is_multiple_of(3) {
        "-"
    } else {
        "."
    };
    format!("{}.{}", labels.join(joiner), c.hosts[0])
}

fn phish_url<R: Rng>(rng: &mut R, c: &Campaign, known: &[String]) -> String {
    let host = match c.kind {
        Obfuscation::IpHost => {
            let (a, b) = c.subnet;
            let (x, y) = (rng.random_range(0..=255u8), rng.random_range(1..=254u8));
            let mut host = if rng.random_bool(0.1) {
                format!("0x{a:x}.0x{b:x}.0x{x:x}.0x{y:x}")
            } else {
                format!("{a}.{b}.{x}.{y}")
            };
            if rng.random_bool(0.4) {
                let port = *[8080u16, 81, 8000, 8888].choose(rng).unwrap();
                host = format!("{host}:{port}");
            }
            host
        }
        // compromised sites: a fresh host per URL
        Obfuscation::Plain => campaign_host(rng, c.kind, c.brand, c.tld, known),
        Obfuscation::LongHost => long_host(rng, c),
        _ => c.hosts.choose(rng).unwrap().clone(),
    };
    let mut url = host;
    if rng.random_bool(0.5) {
        url.push('/');
        url.push_str(&word(rng, 0.7));
    }
    if c.kind == Obfuscation::HostInPath {
        let real = BRANDS[c.brand].1;
        let hidden = match rng.random_range(0..3) {
            0 => real.to_string(),
            1 => real.replace('.', "_"),
            _ => real.replace('.', "-"),
        };
        url.push('/');
        url.push_str(&hidden);
    }
    if c.random_dir {
        url.push('/');
        let len = rng.random_range(16..=40);
        url.push_str(&hex_string(rng, len));
    }
    for k in &c.kit {
        url.push('/');
        url.push_str(k);
    }
    url.push('/');
    url.push_str(&c.file);
    let name = BRANDS[c.brand].0;
    match c.query {
        0 => {}
        1 => url.push_str(&format!("?cmd=_login-run&dispatch={}", hex_string(rng, 40))),
        2 => url.push_str(&format!("?{}={}", c.query_key, hex_string(rng, 32))),
        3 => url.push_str(&format!("?id={}", rng.random_range(1..100_000))),
        _ => url.push_str(&format!("?{}={}.{}", c.query_key, name, c.tld)),
    }
    if rng.random_bool(0.3) {
        url = format!("http://{url}");
    }
    url
}

/// Generates a corpus deterministically from `config.seed`.
pub fn generate_corpus(config: &CorpusConfig) -> Corpus {
    assert!(
        (0.0..=1.0).contains(&config.phish_ratio),
        "phish ratio must be in [0, 1]"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_phish = (config.size as f64 * config.phish_ratio).round() as usize;
    let n_benign = config.size - n_phish;

    let mut sites: Vec<Site> = (0..40).map(|_| new_site(&mut rng)).collect();
    let mut benign = Vec::with_capacity(n_benign);
    let mut sites_at = Vec::with_capacity(n_benign);
    for _ in 0..n_benign {
        if rng.random_bool(0.08) {
            sites.push(new_site(&mut rng));
        }
        // recent sites are favoured, so the benign vocabulary drifts too
        let weights = (0..sites.len()).map(|i| 1.0 / ((sites.len() - i) as f64).powf(0.9));
        let dist = WeightedIndex::new(weights).expect("non-empty site pool");
        let site = dist.sample(&mut rng);
        sites_at.push(sites.len());
        let url = benign_url(&mut rng, &sites[site]);
        benign.push(RawUrl::new(&url).expect("generated URL is valid"));
    }

    let hosts: Vec<String> = sites.iter().map(|s| s.host.clone()).collect();
    let kinds = [
        Obfuscation::IpHost,
        Obfuscation::HostInPath,
        Obfuscation::LongHost,
        Obfuscation::Misspelled,
    ];
    let mut active: Vec<Campaign> = Vec::new();
    let mut dormant: Vec<Campaign> = Vec::new();
    let mut malicious = Vec::with_capacity(n_phish);
    let mut obfuscation = Vec::with_capacity(n_phish);
    for i in 0..n_phish {
        let t = i as f64 / n_phish.max(1) as f64;
        let known = &hosts[..sites_at
            .get((t * n_benign as f64) as usize)
            .copied()
            .unwrap_or(hosts.len())];
        if active.is_empty() || rng.random_bool(0.03) {
            let kind = if rng.random_bool(config.plain_ratio) {
                Obfuscation::Plain
            } else {
                // each type peaks once over the stream
                let w = (0..4).map(|k| {
                    config.mix.0[k] * (1.0 + 0.8 * (2.0 * PI * (t + k as f64 / 4.0)).sin())
                });
                kinds[WeightedIndex::new(w)
                    .expect("mix has a positive weight")
                    .sample(&mut rng)]
            };
            active.push(new_campaign(&mut rng, kind, known));
        }
        if !dormant.is_empty() && rng.random_bool(0.006) {
            let mut c = dormant.swap_remove(rng.random_range(0..dormant.len()));
            c.remaining = campaign_budget(&mut rng);
            active.push(c);
        }
        if rng.random_bool(config.lookalike_ratio) {
            let site = new_site(&mut rng);
            malicious
                .push(RawUrl::new(&benign_url(&mut rng, &site)).expect("generated URL is valid"));
            obfuscation.push(Obfuscation::Plain);
            continue;
        }
        let j = rng.random_range(0..active.len());
        let url = phish_url(&mut rng, &active[j], known);
        malicious.push(RawUrl::new(&url).expect("generated URL is valid"));
        obfuscation.push(active[j].kind);
        active[j].remaining -= 1;
        if active[j].remaining == 0 {
            dormant.push(active.swap_remove(j));
        }
    }
    Corpus {
        benign,
        malicious,
        obfuscation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::parse_url;

    #[test]
    fn deterministic_and_sized() {
        let config = CorpusConfig {
            size: 1000,
            ..CorpusConfig::default()
        };
        let a = generate_corpus(&config);
        assert_eq!(a, generate_corpus(&config));
        assert_eq!(a.benign.len() + a.malicious.len(), 1000);
        assert_eq!(a.obfuscation.len(), a.malicious.len());
        assert_ne!(a, generate_corpus(&CorpusConfig { seed: 1, ..config }));
    }

    #[test]
    fn default_sizes() {
        let c = generate_corpus(&CorpusConfig::default());
        assert_eq!((c.benign.len(), c.malicious.len()), (4143, 4082));
        for url in c.benign.iter().chain(&c.malicious) {
            parse_url(url).unwrap();
        }
        for kind in [
            Obfuscation::Plain,
            Obfuscation::IpHost,
            Obfuscation::HostInPath,
            Obfuscation::LongHost,
            Obfuscation::Misspelled,
        ] {
            assert!(c.obfuscation.contains(&kind), "{kind:?}");
        }
    }

    #[test]
    fn mix_restricts_types() {
        let config = CorpusConfig {
            size: 600,
            mix: "1,0,0,0".parse().unwrap(),
            plain_ratio: 0.0,
            lookalike_ratio: 0.0,
            ..CorpusConfig::default()
        };
        let c = generate_corpus(&config);
        assert!(c.obfuscation.iter().all(|&k| k == Obfuscation::IpHost));
        let parts = parse_url(&c.malicious[0]).unwrap();
        assert!(parts.host_is_ip);
    }

    #[test]
    fn parses_mix() {
        assert_eq!(
            "1,2,3,4".parse::<ObfuscationMix>(),
            Ok(ObfuscationMix([1.0, 2.0, 3.0, 4.0]))
        );
        assert!("1,2,3".parse::<ObfuscationMix>().is_err());
        assert!("0,0,0,0".parse::<ObfuscationMix>().is_err());
        assert!("1,-1,0,0".parse::<ObfuscationMix>().is_err());
    }
}
