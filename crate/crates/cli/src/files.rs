//! On-disk JSON formats. Integers only; pairs are `[a, b]` vertex indices
//! with `a < b`, listed in increasing order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use robust_matching::harness::Scenario;
use robust_matching::unknown::stage1::LaminarTree;
use robust_matching::{
    Error, ExtendedLine, LineArrivals, LineInstance, Matching, MetricInstance, Result, Tag,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Line,
    Metric,
}

/// Arrival coordinates on the line, or for a metric the distance rows of
/// the new vertices to all `n + 2k` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Arrivals {
    Points(Vec<i64>),
    Rows(Vec<Vec<i64>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrivals: Option<Arrivals>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_known: Option<usize>,
}

fn bad(msg: &str) -> Error {
    Error::Parameter(msg.into())
}

impl InstanceFile {
    pub fn line(line: &LineInstance, arrivals: Option<&LineArrivals>) -> Self {
        Self {
            kind: Kind::Line,
            points: Some(line.points().to_vec()),
            cost: None,
            arrivals: arrivals.map(|a| Arrivals::Points(a.coords().to_vec())),
            k_known: arrivals.map(LineArrivals::k),
        }
    }

    /// Checks the fields against the kind and the core constructors.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            Kind::Line => {
                if self.cost.is_some() {
                    return Err(bad("a line instance has no \"cost\" field"));
                }
                self.line_instance()?;
                if self.arrivals.is_some() {
                    self.line_arrivals()?;
                }
            }
            Kind::Metric => {
                if self.points.is_some() {
                    return Err(bad("a metric instance has no \"points\" field"));
                }
                self.g1()?;
                if self.arrivals.is_some() {
                    self.g2()?;
                }
            }
        }
        Ok(())
    }

    pub fn line_instance(&self) -> Result<LineInstance> {
        match (self.kind, &self.points) {
            (Kind::Line, Some(p)) => LineInstance::new(p.clone()),
            (Kind::Line, None) => Err(bad("line instance lacks \"points\"")),
            (Kind::Metric, _) => Err(bad("this command needs a line instance")),
        }
    }

    pub fn line_arrivals(&self) -> Result<LineArrivals> {
        match &self.arrivals {
            Some(Arrivals::Points(a)) => LineArrivals::new(a.clone()),
            Some(Arrivals::Rows(_)) => Err(bad("line arrivals must be an integer array")),
            None => Err(Error::BadArrivals(0)),
        }
    }

    /// The first-stage metric; a line becomes its distance matrix.
    pub fn g1(&self) -> Result<MetricInstance> {
        match self.kind {
            Kind::Line => MetricInstance::from_line_coords(self.line_instance()?.points()),
            Kind::Metric => {
                MetricInstance::new(self.cost.clone().ok_or_else(|| bad("metric instance lacks \"cost\""))?)
            }
        }
    }

    pub fn g2(&self) -> Result<MetricInstance> {
        match self.kind {
            Kind::Line => {
                let ext = ExtendedLine::new(&self.line_instance()?, &self.line_arrivals()?);
                MetricInstance::from_line_coords(ext.coords())
            }
            Kind::Metric => match &self.arrivals {
                Some(Arrivals::Rows(rows)) => self.g1()?.extend(rows),
                Some(Arrivals::Points(p)) if p.is_empty() => Err(Error::BadArrivals(0)),
                Some(Arrivals::Points(_)) => Err(bad("metric arrivals must be distance rows")),
                None => Err(Error::BadArrivals(0)),
            },
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Ok(match self.kind {
            Kind::Line => Scenario::Line { line: self.line_instance()?, arrivals: self.line_arrivals()? },
            Kind::Metric => Scenario::Metric { g1: self.g1()?, g2: self.g2()? },
        })
    }

    pub fn stage1_size(&self) -> usize {
        match self.kind {
            Kind::Line => self.points.as_ref().map_or(0, Vec::len),
            Kind::Metric => self.cost.as_ref().map_or(0, Vec::len),
        }
    }

    /// SHA-256 of the compact JSON of the first-stage part only, so a
    /// solution stays valid when arrivals are added.
    pub fn hash(&self) -> String {
        let stage1 = InstanceFile { arrivals: None, k_known: None, ..self.clone() };
        let bytes = serde_json::to_vec(&stage1).expect("plain data serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Known,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeNode {
    pub node: usize,
    pub lo: usize,
    pub hi: usize,
    pub parent: Option<usize>,
    pub tag: Tag,
}

pub fn tree_nodes(tree: &LaminarTree) -> Vec<TreeNode> {
    tree.nodes()
        .map(|i| {
            let iv = tree.interval(i);
            TreeNode { node: i, lo: iv.lo, hi: iv.hi, parent: tree.parent(i), tag: tree.tag(i) }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplyReport {
    pub k: usize,
    pub cost_m1: i64,
    pub cost_o1: i64,
    pub cost_m2: i64,
    pub cost_o2: i64,
    pub recourse: usize,
    /// Normalized requests as `[lo, hi]` edge ranges (unknown mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests: Option<Vec<(usize, usize)>>,
    /// Path components of `O₂ Δ M̄` (known mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_components: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub instance_hash: String,
    pub mode: Mode,
    pub m1: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bar: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<Vec<TreeNode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_prime: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReplyReport>,
}

pub fn matching_of(pairs: &[(usize, usize)]) -> Result<Matching> {
    Matching::from_pairs(pairs.iter().copied())
}
