//! P1 discretization of the unit square and of its boundary curve.
//!
//! Bulk nodes are numbered row by row, `index = i + j*n` for the node at
//! `(i*h, j*h)`. Every cell is split along its south-west/north-east
//! diagonal. The boundary is the closed chain of `4(n-1)` nodes traversed
//! counterclockwise from the origin; position `k` of the chain holds the bulk
//! node `trace_map()[k]`. Surface quantities use 1D P1 elements on that chain.
//!
//! Both mass matrices are lumped, so the bulk weights sum to `|Omega| = 1`
//! and the boundary weights to `|Gamma| = 4`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SparseLu};

#[derive(Debug)]
pub struct DiscreteDomain {
    n: usize,
    h: f64,
    coords: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_chain: Vec<usize>,
    chain_position: Vec<Option<usize>>,
    k_bulk: CsrMatrix,
    k_surf: CsrMatrix,
    m_bulk: Vec<f64>,
    m_surf: Vec<f64>,
    operators: CoupledOperators,
}

/// Operators acting on trace-consistent pairs, written in bulk-node unknowns:
/// `K = K_bulk + T' K_surf T` and `M = M_bulk + T' M_surf T`.
#[derive(Debug)]
pub(crate) struct CoupledOperators {
    pub(crate) stiffness: CsrMatrix,
    pub(crate) mass: Vec<f64>,
    /// `[K q; q' 0]` with `q = M 1`; realizes the zero-mean duality map.
    pub(crate) saddle: SparseLu,
    /// `M + K`, the Riesz map of the full `V` inner product.
    pub(crate) riesz: SparseLu,
}

impl DiscreteDomain {
    /// Structured triangulation of the unit square with `n` nodes per side.
    pub fn build_unit_square(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("mesh resolution n must be >= 3, got {n}")));
        }
        let h = 1.0 / (n - 1) as f64;
        let idx = |i: usize, j: usize| i + j * n;
        let mut coords = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                coords.push([i as f64 * h, j as f64 * h]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * (n - 1) * (n - 1));
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }

        let mut chain = Vec::with_capacity(4 * (n - 1));
        chain.extend((0..n - 1).map(|i| idx(i, 0)));
        chain.extend((0..n - 1).map(|j| idx(n - 1, j)));
        chain.extend((1..n).rev().map(|i| idx(i, n - 1)));
        chain.extend((1..n).rev().map(|j| idx(0, j)));

        let (k_bulk, m_bulk) = assemble_bulk(&coords, &triangles);
        let (k_surf, m_surf) = assemble_chain(&coords, &chain);
        Self::from_parts(n, h, coords, triangles, chain, k_bulk, k_surf, m_bulk, m_surf)
    }

    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        n: usize,
        h: f64,
        coords: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_chain: Vec<usize>,
        k_bulk: CsrMatrix,
        k_surf: CsrMatrix,
        m_bulk: Vec<f64>,
        m_surf: Vec<f64>,
    ) -> Result<Self> {
        let mut chain_position = vec![None; coords.len()];
        for (k, &node) in boundary_chain.iter().enumerate() {
            chain_position[node] = Some(k);
        }
        let operators =
            CoupledOperators::build(&k_bulk, &k_surf, &m_bulk, &m_surf, &boundary_chain)?;
        Ok(DiscreteDomain {
            n,
            h,
            coords,
            triangles,
            boundary_chain,
            chain_position,
            k_bulk,
            k_surf,
            m_bulk,
            m_surf,
            operators,
        })
    }

    /// Copy of this domain with a replaced surface stiffness matrix. No
    /// structural property is checked, which makes it usable for negative
    /// controls of the consistency checks.
    pub fn with_surface_stiffness(&self, k_surf: CsrMatrix) -> Result<Self> {
        let nb = self.num_boundary();
        if k_surf.nrows() != nb || k_surf.ncols() != nb {
            return Err(Error::shape("surface stiffness", nb, k_surf.nrows()));
        }
        Self::from_parts(
            self.n,
            self.h,
            self.coords.clone(),
            self.triangles.clone(),
            self.boundary_chain.clone(),
            self.k_bulk.clone(),
            k_surf,
            self.m_bulk.clone(),
            self.m_surf.clone(),
        )
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn mesh_width(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary_chain.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Bulk node index for every position of the boundary chain.
    pub fn trace_map(&self) -> &[usize] {
        &self.boundary_chain
    }

    pub fn chain_position(&self, node: usize) -> Option<usize> {
        self.chain_position[node]
    }

    pub fn bulk_stiffness(&self) -> &CsrMatrix {
        &self.k_bulk
    }

    pub fn surface_stiffness(&self) -> &CsrMatrix {
        &self.k_surf
    }

    pub fn bulk_mass(&self) -> &[f64] {
        &self.m_bulk
    }

    pub fn surface_mass(&self) -> &[f64] {
        &self.m_surf
    }

    /// `|Omega|` under lumped quadrature.
    pub fn area(&self) -> f64 {
        self.m_bulk.iter().sum()
    }

    /// `|Gamma|` under lumped quadrature.
    pub fn perimeter(&self) -> f64 {
        self.m_surf.iter().sum()
    }

    pub(crate) fn coupled(&self) -> &CoupledOperators {
        &self.operators
    }

    /// Restriction of a bulk nodal field to the boundary chain.
    pub fn trace(&self, bulk: &[f64]) -> Vec<f64> {
        self.boundary_chain.iter().map(|&node| bulk[node]).collect()
    }

    /// Adjoint of [`trace`](Self::trace): adds chain values onto their bulk nodes.
    pub fn scatter(&self, boundary: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_nodes()];
        for (k, &node) in self.boundary_chain.iter().enumerate() {
            out[node] += boundary[k];
        }
        out
    }

    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.coords.iter().map(|&[x, y]| f(x, y)).collect()
    }

    pub fn integrate_bulk(&self, field: &[f64]) -> Result<f64> {
        if field.len() != self.num_nodes() {
            return Err(Error::shape("bulk field", self.num_nodes(), field.len()));
        }
        Ok(self.m_bulk.iter().zip(field).map(|(w, v)| w * v).sum())
    }

    pub fn integrate_surf(&self, field: &[f64]) -> Result<f64> {
        if field.len() != self.num_boundary() {
            return Err(Error::shape("boundary field", self.num_boundary(), field.len()));
        }
        Ok(self.m_surf.iter().zip(field).map(|(w, v)| w * v).sum())
    }

    /// Plain-text mesh listing: a `nodes` block (`index x y boundary_position`,
    /// `-1` for interior nodes) followed by a `triangles` block.
    pub fn write_mesh<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "nodes {}", self.num_nodes())?;
        for (i, [x, y]) in self.coords.iter().enumerate() {
            let pos = self.chain_position[i].map_or(-1, |k| k as i64);
            writeln!(w, "{i} {x} {y} {pos}")?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for (t, [a, b, c]) in self.triangles.iter().enumerate() {
            writeln!(w, "{t} {a} {b} {c}")?;
        }
        Ok(())
    }
}

impl CoupledOperators {
    fn build(
        k_bulk: &CsrMatrix,
        k_surf: &CsrMatrix,
        m_bulk: &[f64],
        m_surf: &[f64],
        chain: &[usize],
    ) -> Result<Self> {
        let nn = m_bulk.len();
        let mut entries: Vec<(usize, usize, f64)> = k_bulk.triplets().collect();
        entries.extend(k_surf.triplets().map(|(a, b, v)| (chain[a], chain[b], v)));
        let stiffness = CsrMatrix::from_triplets(nn, nn, &entries);

        let mut mass = m_bulk.to_vec();
        for (k, &node) in chain.iter().enumerate() {
            mass[node] += m_surf[k];
        }

        let mut saddle: Vec<(usize, usize, f64)> = stiffness.triplets().collect();
        for (i, &q) in mass.iter().enumerate() {
            saddle.push((i, nn, q));
            saddle.push((nn, i, q));
        }
        let saddle = SparseLu::factor(nn + 1, &saddle)?;

        let mut riesz: Vec<(usize, usize, f64)> = stiffness.triplets().collect();
        riesz.extend(mass.iter().enumerate().map(|(i, &m)| (i, i, m)));
        let riesz = SparseLu::factor(nn, &riesz)?;

        Ok(CoupledOperators {
            stiffness,
            mass,
            saddle,
            riesz,
        })
    }
}

fn assemble_bulk(coords: &[[f64; 2]], triangles: &[[usize; 3]]) -> (CsrMatrix, Vec<f64>) {
    let mut entries = Vec::with_capacity(9 * triangles.len());
    let mut mass = vec![0.0; coords.len()];
    for tri in triangles {
        let p = tri.map(|v| coords[v]);
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let area = 0.5 * det.abs();
        // Gradient of the barycentric coordinate of vertex a, scaled by 2*area.
        let grad = |a: usize| {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            [p[b][1] - p[c][1], p[c][0] - p[b][0]]
        };
        for a in 0..3 {
            mass[tri[a]] += area / 3.0;
            let ga = grad(a);
            for b in 0..3 {
                let gb = grad(b);
                let k = (ga[0] * gb[0] + ga[1] * gb[1]) / (4.0 * area);
                entries.push((tri[a], tri[b], k));
            }
        }
    }
    (CsrMatrix::from_triplets(coords.len(), coords.len(), &entries), mass)
}

fn assemble_chain(coords: &[[f64; 2]], chain: &[usize]) -> (CsrMatrix, Vec<f64>) {
    let len = chain.len();
    let mut entries = Vec::with_capacity(4 * len);
    let mut mass = vec![0.0; len];
    for k in 0..len {
        let next = (k + 1) % len;
        let (pa, pb) = (coords[chain[k]], coords[chain[next]]);
        let seg = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        entries.push((k, k, 1.0 / seg));
        entries.push((next, next, 1.0 / seg));
        entries.push((k, next, -1.0 / seg));
        entries.push((next, k, -1.0 / seg));
        mass[k] += 0.5 * seg;
        mass[next] += 0.5 * seg;
    }
    (CsrMatrix::from_triplets(len, len, &entries), mass)
}
