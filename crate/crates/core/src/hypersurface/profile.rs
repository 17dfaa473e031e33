//! Plain-text profile files.
//!
//! ```text
//! support-euclid n=3
//! # optional comment lines
//! 0 1
//! 0.39269908169872414 1.0123
//! ...
//! ```
//!
//! The first line names the representation and the dimension. Every data
//! line holds `theta value` at the uniform nodes `θ_j = jπ/m`. Numbers are
//! written in shortest round-trip form, so reading a written file and writing
//! it again reproduces it byte for byte.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use super::{AxiConvexBody, AxiRadialGraph, Ambient, DiscreteHypersurface};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    SupportEuclid,
    RadialHemisphere,
}

impl Representation {
    fn tag(self) -> &'static str {
        match self {
            Representation::SupportEuclid => "support-euclid",
            Representation::RadialHemisphere => "radial-hemisphere",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileData {
    pub representation: Representation,
    pub n: usize,
    pub comments: Vec<String>,
    pub values: Vec<f64>,
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::Profile {
        line,
        reason: reason.into(),
    }
}

impl ProfileData {
    pub fn from_body(body: &AxiConvexBody) -> Self {
        Self {
            representation: Representation::SupportEuclid,
            n: body.dim(),
            comments: Vec::new(),
            values: body.support().iter().copied().collect(),
        }
    }

    pub fn from_graph(graph: &AxiRadialGraph) -> Result<Self> {
        if graph.ambient() != Ambient::Hemisphere {
            return Err(Error::Ambient("only hemisphere graphs have a profile format".into()));
        }
        Ok(Self {
            representation: Representation::RadialHemisphere,
            n: graph.dim(),
            comments: Vec::new(),
            values: graph.radius().iter().copied().collect(),
        })
    }

    pub fn with_comments(mut self, comments: Vec<String>) -> Self {
        self.comments = comments;
        self
    }

    pub fn intervals(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn to_body(&self) -> Result<AxiConvexBody> {
        match self.representation {
            Representation::SupportEuclid => AxiConvexBody::new(self.n, self.values.clone()),
            Representation::RadialHemisphere => Err(Error::Ambient("profile is a hemisphere graph".into())),
        }
    }

    pub fn to_graph(&self) -> Result<AxiRadialGraph> {
        match self.representation {
            Representation::RadialHemisphere => AxiRadialGraph::hemisphere(self.n, self.values.clone()),
            Representation::SupportEuclid => Err(Error::Ambient("profile is a Euclidean support function".into())),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} n={}", self.representation.tag(), self.n);
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let m = self.intervals();
        for (j, v) in self.values.iter().enumerate() {
            let theta = j as f64 * PI / m as f64;
            let _ = writeln!(out, "{theta} {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty profile"))?;
        let mut words = header.split_whitespace();
        let representation = match words.next() {
            Some("support-euclid") => Representation::SupportEuclid,
            Some("radial-hemisphere") => Representation::RadialHemisphere,
            other => return Err(bad(1, format!("unknown representation {other:?}"))),
        };
        let n = words
            .next()
            .and_then(|w| w.strip_prefix("n="))
            .and_then(|w| w.parse::<usize>().ok())
            .ok_or_else(|| bad(1, "header must end with n=<dimension>"))?;
        let mut comments = Vec::new();
        let mut thetas = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            if let Some(c) = line.strip_prefix('#') {
                comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(bad(lineno, "expected two columns: theta value"));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(lineno, format!("not a finite number: {s:?}")))
            };
            thetas.push((lineno, parse(cols[0])?));
            values.push(parse(cols[1])?);
        }
        if values.len() < 5 {
            return Err(bad(text.lines().count(), "a profile needs at least 5 nodes"));
        }
        let m = values.len() - 1;
        for (j, (lineno, t)) in thetas.iter().enumerate() {
            let expected = j as f64 * PI / m as f64;
            if (t - expected).abs() > 1e-9 {
                return Err(bad(*lineno, format!("node {j} at theta {t}, expected {expected}")));
            }
        }
        Ok(Self {
            representation,
            n,
            comments,
            values,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_round_trip() {
        let b = AxiConvexBody::sphere(3, 8, 1.25).unwrap();
        let p = ProfileData::from_body(&b).with_comments(vec!["fn=ek_root:2".into()]);
        let text = p.to_text();
        assert!(text.starts_with("support-euclid n=3\n# fn=ek_root:2\n0 1.25\n"));
        let back = ProfileData::parse(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.to_body().unwrap().support(), b.support());
        assert!(back.to_graph().is_err());
    }

    #[test]
    fn malformed_files() {
        assert!(ProfileData::parse("").is_err());
        assert!(ProfileData::parse("mesh n=3\n").is_err());
        assert!(ProfileData::parse("support-euclid\n").is_err());
        let short = "support-euclid n=2\n0 1\n1 1\n";
        assert!(ProfileData::parse(short).is_err());
        let nonuniform = "radial-hemisphere n=2\n0 1\n0.5 1\n1.5707963267948966 1\n2.356194490192345 1\n3.141592653589793 1\n";
        assert!(matches!(
            ProfileData::parse(nonuniform),
            Err(Error::Profile { line: 3, .. })
        ));
        let three_cols = "radial-hemisphere n=2\n0 1 2\n";
        assert!(ProfileData::parse(three_cols).is_err());
    }
}
