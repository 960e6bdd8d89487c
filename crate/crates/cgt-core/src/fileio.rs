//! Line-oriented matrix and outcome files.
//!
//! Matrix format (UTF-8 text):
//! ```text
//! CGT1
//! method=<crs|rw|d2|d3|custom>
//! n=<int> t=<int> d=<int>
//! params=<key=value;...>
//! <t lines of space-separated sorted column indices>
//! ```
//! Method-specific params: `primepowers=2^2,3^2,5` (crs, exponent-1 entries
//! written bare), `tparam=36;k=2;seed=12345;gen=chacha8` (rw),
//! `q=5;effn=100` (d2/d3), empty for custom. An empty row line is an empty
//! test; truncated digit schemes and small CRS instances produce them
//! legitimately, so they are accepted for every method.
//!
//! Outcome files are a single line of t characters over {0,1}.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{Method, MethodParams, OutcomeVector, TestMatrix};

const MAGIC: &str = "CGT1";

/// Render a matrix in the CGT1 format.
pub fn serialize_matrix(m: &TestMatrix) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("method={}\n", m.method()));
    out.push_str(&format!("n={} t={} d={}\n", m.n(), m.t(), m.d()));
    out.push_str(&format!("params={}\n", serialize_params(m.params())));
    for row in m.rows() {
        let mut first = true;
        for &j in row {
            if !first {
                out.push(' ');
            }
            out.push_str(&j.to_string());
            first = false;
        }
        out.push('\n');
    }
    out
}

fn serialize_params(params: &MethodParams) -> String {
    match params {
        MethodParams::Crs { prime_powers } => {
            let tokens: Vec<String> = prime_powers
                .iter()
                .map(|&(p, e)| {
                    if e == 1 {
                        p.to_string()
                    } else {
                        format!("{p}^{e}")
                    }
                })
                .collect();
            format!("primepowers={}", tokens.join(","))
        }
        MethodParams::Rw {
            tparam,
            k,
            seed,
            generator,
        } => format!("tparam={tparam};k={k};seed={seed};gen={generator}"),
        MethodParams::D2 { q, effective_n } | MethodParams::D3 { q, effective_n } => {
            format!("q={q};effn={effective_n}")
        }
        MethodParams::Custom => String::new(),
    }
}

/// Parse a CGT1 matrix document.
pub fn parse_matrix(text: &str) -> Result<TestMatrix> {
    let mut lines = text.lines();
    let magic = lines
        .next()
        .ok_or_else(|| Error::malformed(1, "missing magic line"))?;
    if magic.trim_end() != MAGIC {
        return Err(Error::malformed(1, format!("expected `{MAGIC}`")));
    }

    let method_line = lines
        .next()
        .ok_or_else(|| Error::malformed(2, "missing method line"))?;
    let method: Method = method_line
        .strip_prefix("method=")
        .ok_or_else(|| Error::malformed(2, "expected `method=<tag>`"))?
        .trim()
        .parse()?;

    let size_line = lines
        .next()
        .ok_or_else(|| Error::malformed(3, "missing size line"))?;
    let (n, t, d) = parse_size_line(size_line)?;

    let params_line = lines
        .next()
        .ok_or_else(|| Error::malformed(4, "missing params line"))?;
    let params_str = params_line
        .strip_prefix("params=")
        .ok_or_else(|| Error::malformed(4, "expected `params=...`"))?;
    let params = parse_params(method, params_str)?;
    validate_params(&params, n, t, d)?;

    let mut rows = Vec::with_capacity(t);
    for (i, line) in lines.enumerate() {
        if rows.len() == t {
            if line.trim().is_empty() {
                continue; // tolerate one trailing blank line
            }
            return Err(Error::malformed(
                5 + i,
                format!("more than t={t} row lines"),
            ));
        }
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            let idx: u64 = token
                .parse()
                .map_err(|_| Error::malformed(5 + i, format!("bad index `{token}`")))?;
            row.push(idx);
        }
        rows.push(row);
    }
    if rows.len() != t {
        return Err(Error::malformed(
            5 + rows.len(),
            format!("expected t={t} rows, found {}", rows.len()),
        ));
    }
    TestMatrix::new(n, d, rows, params)
        .map_err(|e| Error::malformed(5, e.to_string()))
}

fn parse_size_line(line: &str) -> Result<(u64, usize, u32)> {
    let mut n = None;
    let mut t = None;
    let mut d = None;
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::malformed(3, format!("bad token `{token}`")))?;
        match key {
            "n" => n = Some(value.parse().map_err(|_| Error::malformed(3, "bad n"))?),
            "t" => t = Some(value.parse().map_err(|_| Error::malformed(3, "bad t"))?),
            "d" => d = Some(value.parse().map_err(|_| Error::malformed(3, "bad d"))?),
            _ => return Err(Error::malformed(3, format!("unknown key `{key}`"))),
        }
    }
    match (n, t, d) {
        (Some(n), Some(t), Some(d)) => Ok((n, t, d)),
        _ => Err(Error::malformed(3, "size line needs n=, t=, and d=")),
    }
}

fn parse_params(method: Method, s: &str) -> Result<MethodParams> {
    let s = s.trim();
    match method {
        Method::Custom => {
            if s.is_empty() {
                Ok(MethodParams::Custom)
            } else {
                Err(Error::malformed(4, "custom matrices take no params"))
            }
        }
        Method::Crs => {
            let list = s
                .strip_prefix("primepowers=")
                .ok_or_else(|| Error::malformed(4, "crs params need `primepowers=`"))?;
            let mut prime_powers = Vec::new();
            for token in list.split(',') {
                let token = token.trim();
                let (p, e) = match token.split_once('^') {
                    Some((p, e)) => (
                        p.parse()
                            .map_err(|_| Error::malformed(4, format!("bad prime `{p}`")))?,
                        e.parse()
                            .map_err(|_| Error::malformed(4, format!("bad exponent `{e}`")))?,
                    ),
                    None => (
                        token
                            .parse()
                            .map_err(|_| Error::malformed(4, format!("bad prime `{token}`")))?,
                        1,
                    ),
                };
                prime_powers.push((p, e));
            }
            Ok(MethodParams::Crs { prime_powers })
        }
        Method::Rw => {
            let kv = parse_kv(s)?;
            Ok(MethodParams::Rw {
                tparam: get_num(&kv, "tparam")?,
                k: get_num(&kv, "k")?,
                seed: get_num(&kv, "seed")?,
                generator: kv
                    .iter()
                    .find(|(key, _)| *key == "gen")
                    .map(|(_, v)| v.to_string())
                    .ok_or_else(|| Error::malformed(4, "missing `gen`"))?,
            })
        }
        Method::D2 | Method::D3 => {
            let kv = parse_kv(s)?;
            let q = get_num(&kv, "q")?;
            let effective_n = get_num(&kv, "effn")?;
            Ok(match method {
                Method::D2 => MethodParams::D2 { q, effective_n },
                _ => MethodParams::D3 { q, effective_n },
            })
        }
    }
}

fn parse_kv(s: &str) -> Result<Vec<(&str, &str)>> {
    s.split(';')
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.split_once('=')
                .ok_or_else(|| Error::malformed(4, format!("bad param `{part}`")))
        })
        .collect()
}

fn get_num<T: std::str::FromStr>(kv: &[(&str, &str)], key: &str) -> Result<T> {
    let value = kv
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::malformed(4, format!("missing `{key}`")))?;
    value
        .parse()
        .map_err(|_| Error::malformed(4, format!("bad `{key}` value `{value}`")))
}

/// Cross-field checks tying params to the declared sizes.
fn validate_params(params: &MethodParams, n: u64, t: usize, d: u32) -> Result<()> {
    match params {
        MethodParams::Crs { prime_powers } => {
            for w in prime_powers.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::malformed(4, "prime powers must ascend"));
                }
            }
            let mut sum: u64 = 0;
            for &(p, e) in prime_powers {
                if e == 0 {
                    return Err(Error::malformed(4, "zero exponent in plan"));
                }
                let value = p
                    .checked_pow(e)
                    .ok_or_else(|| Error::malformed(4, "prime power overflows"))?;
                sum = sum
                    .checked_add(value)
                    .ok_or_else(|| Error::malformed(4, "prime powers overflow"))?;
            }
            if sum as usize != t {
                return Err(Error::malformed(
                    4,
                    format!("prime powers sum to {sum}, but t={t}"),
                ));
            }
        }
        MethodParams::Rw { tparam, .. } => {
            if 2 * *tparam as usize != t {
                return Err(Error::malformed(4, format!("rw needs t=2*tparam, got t={t}")));
            }
        }
        MethodParams::D2 { q, effective_n } => {
            let expect = (*q as usize * *q as usize + 5 * *q as usize) / 2;
            if expect != t || *effective_n != n || d != 2 {
                return Err(Error::malformed(4, "inconsistent d2 header"));
            }
        }
        MethodParams::D3 { q, effective_n } => {
            let expect = 2 * *q as usize * *q as usize - 2 * *q as usize;
            if expect != t || *effective_n != n || d != 3 {
                return Err(Error::malformed(4, "inconsistent d3 header"));
            }
        }
        MethodParams::Custom => {}
    }
    Ok(())
}

pub fn write_matrix(path: &Path, m: &TestMatrix) -> Result<()> {
    std::fs::write(path, serialize_matrix(m))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<TestMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn serialize_outcomes(o: &OutcomeVector) -> String {
    format!("{o}\n")
}

pub fn parse_outcomes(text: &str) -> Result<OutcomeVector> {
    let line = text.lines().next().unwrap_or("");
    let rest_nonempty = text.lines().skip(1).any(|l| !l.trim().is_empty());
    if rest_nonempty {
        return Err(Error::malformed(2, "outcome files hold a single line"));
    }
    OutcomeVector::parse(line)
}

pub fn write_outcomes(path: &Path, o: &OutcomeVector) -> Result<()> {
    std::fs::write(path, serialize_outcomes(o))?;
    Ok(())
}

pub fn read_outcomes(path: &Path) -> Result<OutcomeVector> {
    parse_outcomes(&std::fs::read_to_string(path)?)
}
