use anyhow::Result;
use consensus_core::graph::{bandwidth, permute, rcm_order};
use consensus_core::{eig_decompose, group_eigenvalues, Graph, LaplacianKind};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphReport {
    pub n: usize,
    pub directed: bool,
    pub edges: usize,
    pub connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strongly_connected: Option<bool>,
    pub degrees: Vec<usize>,
    pub spectrum: SpectrumReport,
    pub bandwidth_before: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_after_rcm: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rcm_order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// `laplacian` for undirected graphs, `weights` for directed ones.
    pub matrix: String,
    pub distinct: usize,
    /// Real parts in ascending modulus order.
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

pub fn inspect(g: &Graph) -> Result<GraphReport> {
    let skeleton = g.skeleton_adjacency();
    let (matrix, label) = if g.is_directed() {
        (g.weight_matrix(), "weights")
    } else {
        (
            g.laplacian(LaplacianKind::UnnormalizedConstant)?,
            "laplacian",
        )
    };
    let s = eig_decompose(&matrix, !g.is_directed())?;
    let groups = group_eigenvalues(&s.values, 1e-8)?;
    let (after, order) = if g.is_connected() {
        let p = rcm_order(g)?;
        (
            Some(bandwidth(&permute(&skeleton, &p)?)),
            Some(p.to_one_based()),
        )
    } else {
        (None, None)
    };
    Ok(GraphReport {
        n: g.n(),
        directed: g.is_directed(),
        edges: g.edge_count(),
        connected: g.is_connected(),
        strongly_connected: g.is_directed().then(|| g.is_strongly_connected()),
        degrees: g.degrees(),
        spectrum: SpectrumReport {
            matrix: label.into(),
            distinct: groups.groups.len(),
            real: s.values.iter().map(|v| v.re).collect(),
            imag: s.values.iter().map(|v| v.im).collect(),
        },
        bandwidth_before: bandwidth(&skeleton),
        bandwidth_after_rcm: after,
        rcm_order: order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_report() {
        let g = Graph::new(4, false, [(1, 3, 1.0), (3, 2, 1.0), (2, 4, 1.0)]).unwrap();
        let r = inspect(&g).unwrap();
        assert!(r.connected);
        assert_eq!(r.degrees, vec![1, 2, 2, 1]);
        assert_eq!(r.spectrum.distinct, 4);
        assert_eq!(r.bandwidth_before, 2);
        assert_eq!(r.bandwidth_after_rcm, Some(1));
    }
}
