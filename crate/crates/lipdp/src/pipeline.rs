//! Glue for the standard solve path: decompose, balance, build the parse
//! tree, fill the table, extract.

use crate::dp_engine::{compute_opt, epsilon_schedule, extract, DpTable, ExtractConfig};
use crate::error::Result;
use crate::graph::{Graph, VertexSet, WeightVector};
use crate::hr_algebra::ParseTree;
use crate::problems::Problem;
use crate::tree_decomp::{balance, decompose_heuristic};

/// The structural part of a solve, reusable across weight vectors and
/// seeds: the balanced decomposition's parse tree plus achieved stats.
pub struct Pipeline {
    pub problem: Problem,
    pub tree: ParseTree,
    pub td_width: isize,
    pub td_height: usize,
    pub heuristic_width: isize,
}

impl Pipeline {
    pub fn build(g: &Graph, problem: Problem) -> Result<Pipeline> {
        let td = decompose_heuristic(g);
        let heuristic_width = td.width();
        let balanced = balance(&td)?;
        let tree = ParseTree::from_decomposition(&balanced, g)?;
        Ok(Pipeline {
            problem,
            tree,
            td_width: balanced.width(),
            td_height: balanced.height(),
            heuristic_width,
        })
    }

    pub fn table(&self, w: &WeightVector) -> Result<DpTable> {
        compute_opt(&self.tree, self.problem.spec().as_ref(), w)
    }

    /// Per-node epsilon realizing a total accuracy target for this tree.
    pub fn epsilon_per_node(&self, eps_total: f64) -> Result<f64> {
        epsilon_schedule(eps_total, &self.tree, self.problem.direction())
    }

    pub fn extract(
        &self,
        w: &WeightVector,
        table: &DpTable,
        cfg: &ExtractConfig,
    ) -> Result<VertexSet> {
        extract(&self.tree, self.problem.spec().as_ref(), w, table, cfg)
    }
}
