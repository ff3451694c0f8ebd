//! Automorphisms of a vertex-coloured graph by individualization-refinement.
//!
//! Colourings are refined to the coarsest equitable colouring (1-WL), with
//! new colours numbered by the rank of their signature so that refinement
//! commutes with isomorphisms. The search follows the first path of the
//! search tree to a discrete leaf; at each level it then tries the other
//! vertices of the target cell that are not yet in the orbit of the first
//! choice, and keeps any leaf that maps the first leaf by an automorphism.
//! The automorphisms collected this way generate the whole group.

/// Simple undirected graph over `0..n`.
pub struct ColouredGraph {
    adj: Vec<Vec<usize>>,
    matrix: Vec<bool>,
    colours: Vec<u32>,
}

impl ColouredGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, colours: Vec<u32>) -> Self {
        assert_eq!(colours.len(), n);
        let mut adj = vec![Vec::new(); n];
        let mut matrix = vec![false; n * n];
        for (a, b) in edges {
            if !matrix[a * n + b] {
                matrix[a * n + b] = true;
                matrix[b * n + a] = true;
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        ColouredGraph {
            adj,
            matrix,
            colours,
        }
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    fn is_automorphism(&self, perm: &[usize]) -> bool {
        let n = self.n();
        (0..n).all(|v| self.colours[v] == self.colours[perm[v]])
            && (0..n).all(|a| self.adj[a].iter().all(|&b| self.matrix[perm[a] * n + perm[b]]))
    }
}

fn rerank<K: Ord + Clone>(keys: Vec<K>) -> Vec<u32> {
    let mut distinct = keys.clone();
    distinct.sort();
    distinct.dedup();
    keys.iter()
        .map(|k| distinct.binary_search(k).expect("present") as u32)
        .collect()
}

fn num_colours(c: &[u32]) -> usize {
    c.iter().copied().max().map_or(0, |m| m as usize + 1)
}

fn refine(g: &ColouredGraph, colours: &[u32]) -> Vec<u32> {
    let mut current = colours.to_vec();
    loop {
        let keys: Vec<(u32, Vec<u32>)> = (0..g.n())
            .map(|v| {
                let mut nb: Vec<u32> = g.adj[v].iter().map(|&w| current[w]).collect();
                nb.sort_unstable();
                (current[v], nb)
            })
            .collect();
        let next = rerank(keys);
        if num_colours(&next) == num_colours(&current) {
            return next;
        }
        current = next;
    }
}

fn individualize(colours: &[u32], v: usize) -> Vec<u32> {
    rerank(
        colours
            .iter()
            .enumerate()
            .map(|(w, &c)| (c, w != v))
            .collect(),
    )
}

/// Largest non-singleton cell, lowest colour on ties; `None` if discrete.
fn target_cell(colours: &[u32]) -> Option<Vec<usize>> {
    let k = num_colours(colours);
    let mut cells = vec![Vec::new(); k];
    for (v, &c) in colours.iter().enumerate() {
        cells[c as usize].push(v);
    }
    let mut best: Option<Vec<usize>> = None;
    for cell in cells {
        if cell.len() > 1 && best.as_ref().is_none_or(|b| cell.len() > b.len()) {
            best = Some(cell);
        }
    }
    best
}

/// Vertex at each colour position of a discrete colouring.
fn leaf_order(colours: &[u32]) -> Vec<usize> {
    let mut order = vec![0; colours.len()];
    for (v, &c) in colours.iter().enumerate() {
        order[c as usize] = v;
    }
    order
}

struct Search<'a> {
    g: &'a ColouredGraph,
    first_leaf: Option<Vec<usize>>,
    generators: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn perm_to_first(&self, leaf: &[usize]) -> Vec<usize> {
        let first = self.first_leaf.as_ref().expect("first leaf known");
        let mut perm = vec![0; leaf.len()];
        for (i, &v) in first.iter().enumerate() {
            perm[v] = leaf[i];
        }
        perm
    }

    fn first_path(&mut self, colours: Vec<u32>, prefix: &mut Vec<usize>) {
        let Some(cell) = target_cell(&colours) else {
            self.first_leaf = Some(leaf_order(&colours));
            return;
        };
        let v0 = cell[0];
        prefix.push(v0);
        self.first_path(refine(self.g, &individualize(&colours, v0)), prefix);
        prefix.pop();

        for &w in &cell[1..] {
            if self.same_orbit(v0, w, prefix) {
                continue;
            }
            let child = refine(self.g, &individualize(&colours, w));
            if let Some(perm) = self.find_automorphism(child) {
                self.generators.push(perm);
            }
        }
    }

    /// Orbits under the generators found so far that fix `prefix` pointwise.
    fn same_orbit(&self, a: usize, b: usize, prefix: &[usize]) -> bool {
        let n = self.g.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for g in &self.generators {
            if prefix.iter().any(|&v| g[v] != v) {
                continue;
            }
            for v in 0..n {
                let (x, y) = (find(&mut parent, v), find(&mut parent, g[v]));
                if x != y {
                    parent[x] = y;
                }
            }
        }
        find(&mut parent, a) == find(&mut parent, b)
    }

    fn find_automorphism(&self, colours: Vec<u32>) -> Option<Vec<usize>> {
        match target_cell(&colours) {
            None => {
                let perm = self.perm_to_first(&leaf_order(&colours));
                self.g.is_automorphism(&perm).then_some(perm)
            }
            Some(cell) => cell.into_iter().find_map(|w| {
                self.find_automorphism(refine(self.g, &individualize(&colours, w)))
            }),
        }
    }
}

/// Generators of the colour-preserving automorphism group, as vertex maps.
/// Identity is never returned; a rigid graph yields an empty list.
pub fn automorphism_generators(g: &ColouredGraph) -> Vec<Vec<usize>> {
    if g.n() == 0 {
        return Vec::new();
    }
    let mut search = Search {
        g,
        first_leaf: None,
        generators: Vec::new(),
    };
    let start = refine(g, &rerank(g.colours.clone()));
    search.first_path(start, &mut Vec::new());
    search.generators
}
