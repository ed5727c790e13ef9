use crate::error::{param_err, Result};

use super::{BranchSpectrum, Coordinate, SampleGenealogy};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub height: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Number of sampled leaves below this node.
    pub leaf_count: usize,
}

/// Explicit binary genealogy. Nodes `0..n` are the leaves in planar order;
/// internal nodes follow. The edge above a node runs to its parent; the
/// edge above the root runs up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct GenealogyTree {
    pub nodes: Vec<TreeNode>,
    pub n_leaves: usize,
    pub root: usize,
    pub horizon: f64,
}

impl GenealogyTree {
    /// `(child, parent, length, leaf_count)` for every edge below the root.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64, usize)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(id, node)| {
            node.parent
                .map(|p| (id, p, self.nodes[p].height - node.height, node.leaf_count))
        })
    }

    /// Length of the lineage between the root and the horizon.
    pub fn root_stem(&self) -> f64 {
        self.horizon - self.nodes[self.root].height
    }
}

/// Builds the tree by the planar drawing rule: leaf `i` sends a horizontal
/// line left from height `H_i` and joins the first lineage whose vertical
/// line reaches strictly above it (leaf 0 reaches the horizon). Lineages
/// joining the same line at equal heights merge in index order.
pub fn build_tree(g: &SampleGenealogy) -> Result<GenealogyTree> {
    if g.coordinate != Coordinate::H {
        return param_err("tree construction needs heights measured back from the sampling time");
    }
    let n = g.n();
    let h = &g.times;
    let top = |i: usize| if i == 0 { f64::INFINITY } else { h[i - 1] };

    // attachments[j]: lineages that join lineage j, as (height, index)
    let mut attachments: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    let mut stack: Vec<usize> = vec![0];
    for i in 1..n {
        let hi = top(i);
        while let Some(&j) = stack.last() {
            if top(j) > hi {
                break;
            }
            stack.pop();
        }
        let target = *stack.last().expect("leaf 0 is never popped");
        attachments[target].push((hi, i));
        stack.push(i);
    }

    let mut nodes: Vec<TreeNode> = (0..n)
        .map(|_| TreeNode {
            height: 0.0,
            parent: None,
            children: Vec::new(),
            leaf_count: 1,
        })
        .collect();
    let mut lineage_top = vec![usize::MAX; n];

    // a lineage's clade is complete once every lineage to its right that
    // attaches to it is complete, so sweep right to left
    for j in (0..n).rev() {
        let mut joins = std::mem::take(&mut attachments[j]);
        joins.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut current = j;
        for (height, i) in joins {
            let other = lineage_top[i];
            let id = nodes.len();
            nodes.push(TreeNode {
                height,
                parent: None,
                children: vec![current, other],
                leaf_count: nodes[current].leaf_count + nodes[other].leaf_count,
            });
            nodes[current].parent = Some(id);
            nodes[other].parent = Some(id);
            current = id;
        }
        lineage_top[j] = current;
    }

    Ok(GenealogyTree {
        nodes,
        n_leaves: n,
        root: lineage_top[0],
        horizon: g.horizon,
    })
}

/// Branch-length spectrum read directly off the tree: `L^k` is the total
/// length of edges with exactly `k` leaves below them.
pub fn spectrum_from_tree(t: &GenealogyTree, max_k: usize) -> BranchSpectrum {
    let mut totals = vec![0.0; max_k];
    for (_, _, len, count) in t.edges() {
        if count >= 1 && count <= max_k {
            totals[count - 1] += len;
        }
    }
    BranchSpectrum {
        totals,
        per_branch: None,
        stem: t.root_stem().max(0.0),
    }
}
