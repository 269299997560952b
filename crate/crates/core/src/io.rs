//! Plain-text instance files.
//!
//! ```text
//! # comment
//! theta 1.2          (caps files; or `volume <δ>`, or `threshold <t>`)
//! 3 2                (<n> <m>)
//! 1 0 0
//! 0 1 0
//! ```
//!
//! Matrix files carry a `columns` tag and list one column per line.

use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `<n> <m>` header")]
    MissingHeader,
    #[error("header announces {expected} vectors, found {found}")]
    Count { expected: usize, found: usize },
}

/// Body size tag of a caps file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyTag {
    Theta(f64),
    Volume(f64),
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorsFile {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    pub body: Option<BodyTag>,
    pub columns: bool,
}

impl VectorsFile {
    pub fn new(n: usize, vectors: Vec<Vec<f64>>) -> Self {
        Self {
            n,
            vectors,
            ..Self::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut out = Self::default();
        let mut header: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ParseError::Line { line, message };
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            let fields: Vec<&str> = s.split_whitespace().collect();
            let tag_value = || -> Result<f64, ParseError> {
                if fields.len() != 2 {
                    return Err(err(format!("expected `{} <value>`", fields[0])));
                }
                fields[1]
                    .parse()
                    .map_err(|_| err(format!("bad number `{}`", fields[1])))
            };
            match fields[0] {
                "columns" if fields.len() == 1 => {
                    out.columns = true;
                    continue;
                }
                "theta" | "volume" | "threshold" => {
                    if out.body.is_some() {
                        return Err(err("more than one body tag".into()));
                    }
                    let v = tag_value()?;
                    out.body = Some(match fields[0] {
                        "theta" => BodyTag::Theta(v),
                        "volume" => BodyTag::Volume(v),
                        _ => BodyTag::Threshold(v),
                    });
                    continue;
                }
                _ => {}
            }
            if header.is_none() {
                if fields.len() != 2 {
                    return Err(err(format!("expected `<n> <m>`, got `{s}`")));
                }
                let parse = |f: &str| {
                    f.parse::<usize>()
                        .map_err(|_| err(format!("bad count `{f}`")))
                };
                out.n = parse(fields[0])?;
                header = Some(parse(fields[1])?);
                continue;
            }
            let v = fields
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| err(format!("bad number `{f}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if v.len() != out.n {
                return Err(err(format!("expected {} entries, got {}", out.n, v.len())));
            }
            out.vectors.push(v);
        }
        let m = header.ok_or(ParseError::MissingHeader)?;
        if out.vectors.len() != m {
            return Err(ParseError::Count {
                expected: m,
                found: out.vectors.len(),
            });
        }
        Ok(out)
    }

    /// Every number is written with 17 significant digits.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.columns {
            s.push_str("columns\n");
        }
        match self.body {
            Some(BodyTag::Theta(v)) => writeln!(s, "theta {v:.16e}").unwrap(),
            Some(BodyTag::Volume(v)) => writeln!(s, "volume {v:.16e}").unwrap(),
            Some(BodyTag::Threshold(v)) => writeln!(s, "threshold {v:.16e}").unwrap(),
            None => {}
        }
        writeln!(s, "{} {}", self.n, self.vectors.len()).unwrap();
        for v in &self.vectors {
            s.push_str(&render_row(v));
            s.push('\n');
        }
        s
    }
}

pub fn render_row(v: &[f64]) -> String {
    v.iter()
        .map(|a| format!("{a:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}
