//! Binary source tree with Chebyshev far-field expansions.
//!
//! Interaction lists come from a dual traversal of the tree with itself: a
//! pair of boxes is handled in the far field once the gap between them is at
//! least the larger width, otherwise the wider box is split; two leaves that
//! never separate interact directly. Expansions are Chebyshev interpolants
//! on both sides, so the three kernels share one code path.

use super::chebyshev::Chebyshev;
use super::{Kernel, Point};
use crate::flops::OpCounter;
use rayon::prelude::*;
use std::collections::HashMap;

pub const LEAF_CAPACITY: usize = 32;
const MAX_LEVEL: u32 = 60;

#[derive(Clone, Debug)]
struct Node {
    lo: f64,
    hi: f64,
    begin: usize,
    end: usize,
    level: u32,
    parent: Option<usize>,
    children: Option<[usize; 2]>,
}

impl Node {
    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    fn half(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
    fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
    /// Reference coordinate of `x` in `[-1, 1]`.
    fn reference(&self, x: Point) -> f64 {
        (((x.hi - self.center()) + x.lo) / self.half()).clamp(-1.0, 1.0)
    }
}

/// Targets bound to the leaves of a tree.
#[derive(Clone, Debug)]
pub struct TargetMap {
    targets: Vec<Point>,
    leaf: Vec<usize>,
    basis: Vec<f64>,
    /// Sorted-source position to skip for each target, if any.
    skip: Vec<Option<usize>>,
}

impl TargetMap {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

#[derive(Debug)]
pub struct FmmTree {
    kernel: Kernel,
    cheb: Chebyshev,
    nodes: Vec<Node>,
    sources: Vec<Point>,
    /// Sorted position to caller index.
    perm: Vec<usize>,
    /// Caller index to sorted position.
    rank: Vec<usize>,
    src_basis: Vec<f64>,
    src_leaf: Vec<usize>,
    m2l: Vec<Vec<(usize, usize)>>,
    p2p: Vec<Vec<usize>>,
    mats: Vec<Vec<f64>>,
}

impl FmmTree {
    /// Builds the tree over `sources`, all inside `(-bound, bound)`, with
    /// `p` Chebyshev points per box.
    pub fn new(kernel: Kernel, sources: &[Point], bound: f64, p: usize, ops: &OpCounter) -> Self {
        let n = sources.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| sources[a].value().total_cmp(&sources[b].value()));
        let mut rank = vec![0; n];
        for (pos, &i) in perm.iter().enumerate() {
            rank[i] = pos;
        }
        let sorted: Vec<Point> = perm.iter().map(|&i| sources[i]).collect();
        let mut tree = Self {
            kernel,
            cheb: Chebyshev::new(p),
            nodes: Vec::new(),
            sources: sorted,
            perm,
            rank,
            src_basis: vec![0.0; n * p],
            src_leaf: vec![0; n],
            m2l: Vec::new(),
            p2p: Vec::new(),
            mats: Vec::new(),
        };
        tree.split(-bound, bound, 0, n, 0, None);
        let nn = tree.nodes.len();
        tree.m2l = vec![Vec::new(); nn];
        tree.p2p = vec![Vec::new(); nn];
        let mut cache = HashMap::new();
        tree.interact(0, 0, &mut cache);
        for idx in 0..nn {
            if tree.nodes[idx].is_leaf() {
                let node = tree.nodes[idx].clone();
                for j in node.begin..node.end {
                    tree.src_leaf[j] = idx;
                    let t = node.reference(tree.sources[j]);
                    tree.cheb.basis(t, &mut tree.src_basis[j * p..(j + 1) * p]);
                }
            }
        }
        let (nf, pf) = (n.max(2) as u64, p as u64);
        ops.add(nf * (64 - nf.leading_zeros() as u64) + 4 * nf * pf);
        ops.add(tree.mats.len() as u64 * pf * pf * kernel.cost());
        tree
    }

    pub fn order(&self) -> usize {
        self.cheb.len()
    }

    fn split(&mut self, lo: f64, hi: f64, begin: usize, end: usize, level: u32, parent: Option<usize>) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Node { lo, hi, begin, end, level, parent, children: None });
        if end - begin > LEAF_CAPACITY && level < MAX_LEVEL {
            let mid = 0.5 * (lo + hi);
            let cut = begin + self.sources[begin..end].partition_point(|y| y.value() < mid);
            let l = self.split(lo, mid, begin, cut, level + 1, Some(idx));
            let r = self.split(mid, hi, cut, end, level + 1, Some(idx));
            self.nodes[idx].children = Some([l, r]);
        }
        idx
    }

    fn interact(&mut self, a: usize, b: usize, cache: &mut HashMap<(u32, u32, i64), usize>) {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        if nb.begin == nb.end {
            return;
        }
        let gap = (na.lo - nb.hi).max(nb.lo - na.hi);
        let width = (na.hi - na.lo).max(nb.hi - nb.lo);
        if gap >= width {
            let id = self.m2l_matrix(a, b, cache);
            self.m2l[a].push((b, id));
            return;
        }
        match (na.children, nb.children) {
            (None, None) => self.p2p[a].push(b),
            (Some([a0, a1]), None) => {
                self.interact(a0, b, cache);
                self.interact(a1, b, cache);
            }
            (None, Some([b0, b1])) => {
                self.interact(a, b0, cache);
                self.interact(a, b1, cache);
            }
            (Some([a0, a1]), Some([b0, b1])) => {
                if na.hi - na.lo >= nb.hi - nb.lo {
                    self.interact(a0, b, cache);
                    self.interact(a1, b, cache);
                } else {
                    self.interact(a, b0, cache);
                    self.interact(a, b1, cache);
                }
            }
        }
    }

    /// Kernel values between the Chebyshev points of `a` (rows) and `b`.
    fn m2l_matrix(&mut self, a: usize, b: usize, cache: &mut HashMap<(u32, u32, i64), usize>) -> usize {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let (ha, hb) = (na.half(), nb.half());
        let shift = na.center() - nb.center();
        let key = (na.level, nb.level, (shift / ha.min(hb)).round() as i64);
        if let Some(&id) = cache.get(&key) {
            return id;
        }
        let p = self.cheb.len();
        let mut m = vec![0.0; p * p];
        for l in 0..p {
            for k in 0..p {
                let r = shift + (ha * self.cheb.nodes[l] - hb * self.cheb.nodes[k]);
                m[l * p + k] = self.kernel.eval(r);
            }
        }
        self.mats.push(m);
        cache.insert(key, self.mats.len() - 1);
        self.mats.len() - 1
    }

    /// Binds targets to leaves. `skip[i]` names a source (caller index) whose
    /// term is left out of target `i`'s sum.
    pub fn locate(&self, targets: &[Point], skip: Option<&[usize]>, ops: &OpCounter) -> TargetMap {
        let p = self.order();
        let mut leaf = vec![0; targets.len()];
        let mut basis = vec![0.0; targets.len() * p];
        leaf.par_iter_mut()
            .zip(basis.par_chunks_mut(p))
            .zip(targets.par_iter())
            .for_each(|((lf, b), &x)| {
                let v = x.value();
                let mut idx = 0;
                while let Some([l, r]) = self.nodes[idx].children {
                    idx = if v < self.nodes[idx].center() { l } else { r };
                }
                *lf = idx;
                self.cheb.basis(self.nodes[idx].reference(x), b);
            });
        ops.add(targets.len() as u64 * (4 * p as u64 + 2 * self.nodes.len().ilog2() as u64 + 2));
        TargetMap {
            targets: targets.to_vec(),
            leaf,
            basis,
            skip: match skip {
                Some(s) => s.iter().map(|&i| Some(self.rank[i])).collect(),
                None => vec![None; targets.len()],
            },
        }
    }

    /// Evaluates `r` weight vectors at once. `weights` is row-major `n×r`
    /// (row = source in caller order); the result is row-major `m×r`.
    pub fn evaluate(&self, weights: &[f64], r: usize, map: &TargetMap, ops: &OpCounter) -> Vec<f64> {
        let n = self.sources.len();
        let m = map.targets.len();
        assert_eq!(weights.len(), n * r);
        let p = self.order();
        let pr = p * r;
        let nn = self.nodes.len();
        let mut c = vec![0.0; n * r];
        for (pos, &i) in self.perm.iter().enumerate() {
            c[pos * r..(pos + 1) * r].copy_from_slice(&weights[i * r..(i + 1) * r]);
        }

        // Upward pass: multipole (source-side interpolation) coefficients.
        let mut up = vec![0.0; nn * pr];
        for idx in (0..nn).rev() {
            let node = &self.nodes[idx];
            let (head, tail) = up.split_at_mut((idx + 1) * pr);
            let w = &mut head[idx * pr..];
            match node.children {
                None => {
                    for j in node.begin..node.end {
                        let lj = &self.src_basis[j * p..(j + 1) * p];
                        let cj = &c[j * r..(j + 1) * r];
                        for (mi, &l) in lj.iter().enumerate() {
                            axpy(l, cj, &mut w[mi * r..(mi + 1) * r]);
                        }
                    }
                }
                Some([a, b]) => {
                    for (child, t) in [(a, &self.cheb.left), (b, &self.cheb.right)] {
                        let wc = &tail[(child - idx - 1) * pr..(child - idx) * pr];
                        gemm_acc(t, p, p, wc, r, w);
                    }
                }
            }
        }

        // Downward pass: local coefficients from M2L plus the parent's.
        let mut down = vec![0.0; nn * pr];
        for idx in 0..nn {
            let (head, tail) = down.split_at_mut(idx * pr);
            let g = &mut tail[..pr];
            for &(b, id) in &self.m2l[idx] {
                gemm_acc(&self.mats[id], p, p, &up[b * pr..(b + 1) * pr], r, g);
            }
            if let Some(parent) = self.nodes[idx].parent {
                let [l, _] = self.nodes[parent].children.expect("parent has children");
                let t = if l == idx { &self.cheb.left } else { &self.cheb.right };
                gemm_t_acc(t, p, &head[parent * pr..(parent + 1) * pr], r, g);
            }
        }

        // Evaluation at targets: local expansion plus direct near field.
        let mut out = vec![0.0; m * r];
        out.par_chunks_mut(r).enumerate().for_each(|(i, o)| {
            let leaf = map.leaf[i];
            let g = &down[leaf * pr..(leaf + 1) * pr];
            for (l, &bv) in map.basis[i * p..(i + 1) * p].iter().enumerate() {
                axpy(bv, &g[l * r..(l + 1) * r], o);
            }
            let x = map.targets[i];
            for &b in &self.p2p[leaf] {
                let node = &self.nodes[b];
                for j in node.begin..node.end {
                    if map.skip[i] == Some(j) {
                        continue;
                    }
                    let k = self.kernel.eval(x.diff(self.sources[j]));
                    axpy(k, &c[j * r..(j + 1) * r], o);
                }
            }
        });

        let (pf, rf) = (p as u64, r as u64);
        let children = (nn - 1) as u64;
        let pairs: u64 = self.m2l.iter().map(|v| v.len() as u64).sum();
        let near: u64 = map
            .leaf
            .iter()
            .map(|&lf| self.p2p[lf].iter().map(|&b| (self.nodes[b].end - self.nodes[b].begin) as u64).sum::<u64>())
            .sum();
        ops.add(2 * rf * pf * (n as u64 + m as u64) + 2 * rf * pf * pf * (2 * children + pairs));
        ops.add(near * (self.kernel.cost() + 2 * rf));
        out
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `y (rows×r) += A (rows×cols) · x (cols×r)`, all row-major.
fn gemm_acc(a: &[f64], rows: usize, cols: usize, x: &[f64], r: usize, y: &mut [f64]) {
    for i in 0..rows {
        let yi = &mut y[i * r..(i + 1) * r];
        for k in 0..cols {
            axpy(a[i * cols + k], &x[k * r..(k + 1) * r], yi);
        }
    }
}

/// `y (p×r) += Aᵀ · x` for square row-major `A` (p×p).
fn gemm_t_acc(a: &[f64], p: usize, x: &[f64], r: usize, y: &mut [f64]) {
    for k in 0..p {
        let xk = &x[k * r..(k + 1) * r];
        for i in 0..p {
            axpy(a[k * p + i], xk, &mut y[i * r..(i + 1) * r]);
        }
    }
}
