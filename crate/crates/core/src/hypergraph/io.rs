//! Plain-text graph format.
//!
//! ```text
//! # comment lines start with '#'
//! k n
//! 1 2 3
//! 1 2 4
//! ```
//!
//! The header carries the uniformity then the vertex count; each further line
//! is one edge as `k` ascending 1-based vertex ids. Serialization writes edges
//! in lexicographic order, so `parse` followed by `to_text` reproduces any
//! canonical file byte for byte.

use std::fmt;
use std::str::FromStr;

use super::KGraph;
use crate::error::{Error, Result};

impl KGraph {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.k, self.n);
        for e in self.edges() {
            let line: Vec<String> = e.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<KGraph> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges: Vec<Vec<u32>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            match header {
                None => {
                    if nums.len() != 2 {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: "header must be \"k n\"".into(),
                        });
                    }
                    header = Some((nums[0] as usize, nums[1] as usize));
                }
                Some((k, _)) => {
                    if nums.len() != k {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: format!("expected {k} vertices, found {}", nums.len()),
                        });
                    }
                    if nums.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: "edge vertices must be strictly ascending".into(),
                        });
                    }
                    let e = nums
                        .iter()
                        .map(|&v| u32::try_from(v))
                        .collect::<std::result::Result<Vec<u32>, _>>()
                        .map_err(|e| Error::Parse {
                            line: i + 1,
                            message: e.to_string(),
                        })?;
                    edges.push(e);
                }
            }
        }
        let (k, n) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing \"k n\" header".into(),
        })?;
        KGraph::new(n, k, edges)
    }
}

impl fmt::Display for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for KGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KGraph::parse(s)
    }
}
