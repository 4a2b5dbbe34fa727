//! Graph and initial-vector sources given on the command line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use consensus_core::graph::{parse_graph, random_connected};
use consensus_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    File { path: PathBuf },
    Random { n: usize, p: f64, seed: u64 },
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
            }
            GraphSource::Random { n, p, seed } => Ok(random_connected(*n, *p, *seed)?),
        }
    }
}

/// `random:N:P:SEED` or a path to a graph file.
impl FromStr for GraphSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                bail!("random graph spec is random:N:P:SEED, got {s:?}");
            }
            return Ok(GraphSource::Random {
                n: parts[0].parse().context("graph size")?,
                p: parts[1].parse().context("edge probability")?,
                seed: parts[2].parse().context("seed")?,
            });
        }
        Ok(GraphSource::File { path: s.into() })
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File { path } => write!(f, "{}", path.display()),
            GraphSource::Random { n, p, seed } => write!(f, "random:{n}:{p}:{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSource {
    /// Whitespace or comma separated values.
    File {
        path: PathBuf,
    },
    /// Uniform on `[-1, 1)`.
    Random {
        seed: u64,
    },
    Constant {
        value: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

impl InitSource {
    pub fn vector(&self, n: usize) -> Result<Vec<f64>> {
        let v = match self {
            InitSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_values(&text)?
            }
            InitSource::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
            }
            InitSource::Constant { value } => vec![*value; n],
            InitSource::Values { values } => values.clone(),
        };
        if v.len() != n {
            bail!(
                "initial vector has {} entries, graph has {n} nodes",
                v.len()
            );
        }
        Ok(v)
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad value {t:?}")))
        .collect()
}

/// `random:SEED`, `const:VALUE`, `values:a,b,c` or `file:PATH`.
impl FromStr for InitSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .with_context(|| format!("initial vector spec needs a kind prefix, got {s:?}"))?;
        Ok(match kind {
            "random" => InitSource::Random {
                seed: arg.parse().context("seed")?,
            },
            "const" => InitSource::Constant {
                value: arg.parse().context("constant")?,
            },
            "values" => InitSource::Values {
                values: parse_values(arg)?,
            },
            "file" => InitSource::File { path: arg.into() },
            _ => bail!("unknown initial vector kind {kind:?}"),
        })
    }
}
