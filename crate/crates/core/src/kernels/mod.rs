//! Finite symmetric kernels: the binary 3-regular tree and the integer line,
//! their killed truncations, heat kernels, Green functions, harmonic profiles
//! and Dirichlet sums.
//!
//! A [`Kernel`] is stored as a sparse symmetric off-diagonal part plus a
//! diagonal holding vector. Truncation converts the mass of jumps that would
//! leave the finite window into holding (`escape`), so every constructed
//! kernel is stochastic. [`killed_truncation`] moves that escape mass into a
//! deficit instead, which makes the walk transient and its Green function
//! finite.

mod green;
mod harmonic;
mod line;
mod quotient;
mod tree;
mod window;

use std::collections::{HashMap, VecDeque};
use std::ops::Deref;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};

pub use green::{
    green_function, green_solve, green_window_sup, heat_apply, heat_kernel, GreenSolve, GreenSup, SUP_MARGIN,
};
pub use harmonic::{
    dirichlet_sum, harmonic_extension, harmonicity_residual, line_alpha, tree_alpha, DirichletSum, HarmonicProfile,
    OpenBoundary, ProfileShape,
};
pub use line::{build_line, JumpLaw};
pub use quotient::{ClassSup, TreeQuotient};
pub use tree::build_binary_tree;
pub use window::SiteWindow;

/// Side of the basis edge a tree vertex hangs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    BinaryTree { depth: u32 },
    Line { radius: u32, law: JumpLaw },
    Custom,
}

/// Per-site metadata as serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: usize,
    pub level: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coord: Option<i64>,
}

/// JSON form: `{sites:[{id,level,side,coord}], edges:[[i,j,p]], holding:[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub sites: Vec<SiteRecord>,
    pub edges: Vec<(usize, usize, f64)>,
    pub holding: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deficit: Vec<f64>,
}

/// Symmetric transition kernel on a finite site set.
#[derive(Debug)]
pub struct Kernel {
    geometry: Geometry,
    levels: Vec<u32>,
    sides: Vec<Side>,
    coords: Vec<i64>,
    parents: Vec<u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    probs: Vec<f64>,
    holding: Vec<f64>,
    /// Portion of `holding` that stands for jumps leaving the truncation.
    escape: Vec<f64>,
    /// Killed mass per row (zero for stochastic kernels).
    deficit: Vec<f64>,
    distances: Mutex<HashMap<usize, Arc<Vec<u32>>>>,
    boundary_distance: Mutex<Option<Arc<Vec<u32>>>>,
}

impl Clone for Kernel {
    fn clone(&self) -> Self {
        Kernel {
            geometry: self.geometry.clone(),
            levels: self.levels.clone(),
            sides: self.sides.clone(),
            coords: self.coords.clone(),
            parents: self.parents.clone(),
            offsets: self.offsets.clone(),
            targets: self.targets.clone(),
            probs: self.probs.clone(),
            holding: self.holding.clone(),
            escape: self.escape.clone(),
            deficit: self.deficit.clone(),
            distances: Mutex::new(HashMap::new()),
            boundary_distance: Mutex::new(None),
        }
    }
}

pub(crate) const NO_PARENT: u32 = u32::MAX;

/// Builder input shared by the constructors.
pub(crate) struct KernelParts {
    pub geometry: Geometry,
    pub levels: Vec<u32>,
    pub sides: Vec<Side>,
    pub coords: Vec<i64>,
    pub parents: Vec<u32>,
    /// Adjacency lists with probabilities; must already be symmetric.
    pub rows: Vec<Vec<(u32, f64)>>,
    pub holding: Vec<f64>,
    pub escape: Vec<f64>,
}

impl Kernel {
    pub(crate) fn from_parts(parts: KernelParts) -> Self {
        let n = parts.rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let nnz: usize = parts.rows.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(nnz);
        let mut probs = Vec::with_capacity(nnz);
        offsets.push(0);
        for row in parts.rows {
            for (y, p) in row {
                targets.push(y);
                probs.push(p);
            }
            offsets.push(targets.len());
        }
        Kernel {
            geometry: parts.geometry,
            levels: parts.levels,
            sides: parts.sides,
            coords: parts.coords,
            parents: parts.parents,
            offsets,
            targets,
            probs,
            holding: parts.holding,
            escape: parts.escape,
            deficit: vec![0.0; n],
            distances: Mutex::new(HashMap::new()),
            boundary_distance: Mutex::new(None),
        }
    }

    /// Builds a kernel from an explicit symmetric edge list. Holding is
    /// whatever mass is left in each row; none of it is treated as escape.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(x, y, p) in edges {
            if x >= n || y >= n || x == y {
                return Err(SepError::invalid(format!("bad edge ({x},{y})")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(SepError::invalid(format!("edge ({x},{y}) has rate {p}")));
            }
            rows[x].push((y as u32, p));
            rows[y].push((x as u32, p));
        }
        let mut holding = vec![0.0; n];
        for (x, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|e| e.0);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(SepError::invalid(format!("duplicate edge at site {x}")));
            }
            let mass: f64 = row.iter().map(|e| e.1).sum();
            if mass > 1.0 + 1e-12 {
                return Err(SepError::invalid(format!("row {x} has mass {mass} > 1")));
            }
            holding[x] = (1.0 - mass).max(0.0);
        }
        Ok(Kernel::from_parts(KernelParts {
            geometry: Geometry::Custom,
            levels: vec![0; n],
            sides: Vec::new(),
            coords: Vec::new(),
            parents: Vec::new(),
            rows,
            holding,
            escape: vec![0.0; n],
        }))
    }

    pub fn len(&self) -> usize {
        self.holding.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holding.is_empty()
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Off-diagonal neighbours of `x` with their transition probabilities.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.probs[range])
            .map(|(&y, &p)| (y as usize, p))
    }

    /// p(x,y), including the diagonal holding.
    pub fn p(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return self.holding[x];
        }
        self.neighbors(x).find(|&(z, _)| z == y).map_or(0.0, |(_, p)| p)
    }

    pub fn holding(&self, x: usize) -> f64 {
        self.holding[x]
    }

    pub fn escape(&self, x: usize) -> f64 {
        self.escape[x]
    }

    pub fn deficit(&self, x: usize) -> f64 {
        self.deficit[x]
    }

    pub fn deficits(&self) -> &[f64] {
        &self.deficit
    }

    pub fn row_sum(&self, x: usize) -> f64 {
        self.holding[x] + self.neighbors(x).map(|(_, p)| p).sum::<f64>()
    }

    /// True when no row loses mass.
    pub fn is_stochastic(&self) -> bool {
        self.deficit.iter().all(|&d| d == 0.0)
    }

    pub fn level(&self, x: usize) -> u32 {
        self.levels[x]
    }

    pub fn side(&self, x: usize) -> Option<Side> {
        self.sides.get(x).copied()
    }

    pub fn coord(&self, x: usize) -> Option<i64> {
        self.coords.get(x).copied()
    }

    /// Site index of a line coordinate.
    pub fn site_at_coord(&self, c: i64) -> Option<usize> {
        match self.geometry {
            Geometry::Line { radius, .. } if c.abs() <= radius as i64 => Some((c + radius as i64) as usize),
            _ => None,
        }
    }

    /// Unordered off-diagonal edges `(x, y, p)` with `x < y`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            for (y, p) in self.neighbors(x) {
                if x < y && p > 0.0 {
                    out.push((x, y, p));
                }
            }
        }
        out
    }

    /// Interior sites carry no escape mass: their off-diagonal row equals the
    /// infinite-graph row.
    pub fn is_interior(&self, x: usize) -> bool {
        self.escape[x] == 0.0
    }

    /// y ↦ Σ_x p(x,y) v(x) (equivalently P v, by symmetry), diagonal included.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for x in 0..self.len() {
            let mut acc = self.holding[x] * v[x];
            for (y, p) in self.neighbors(x) {
                acc += p * v[y];
            }
            out[x] = acc;
        }
    }

    /// Breadth-first distances from `x`, cached per source.
    pub fn distances_from(&self, x: usize) -> Arc<Vec<u32>> {
        if let Some(d) = self.distances.lock().expect("distance cache").get(&x) {
            return Arc::clone(d);
        }
        let d = Arc::new(self.bfs(&[x]));
        self.distances.lock().expect("distance cache").insert(x, Arc::clone(&d));
        d
    }

    /// Graph distance d(x,y); `u32::MAX` when disconnected.
    pub fn distance(&self, x: usize, y: usize) -> u32 {
        if let Geometry::BinaryTree { .. } = self.geometry {
            return self.tree_distance(x, y);
        }
        self.distances_from(x)[y]
    }

    /// Distance from each site to the nearest site with escape mass.
    pub fn boundary_distance(&self) -> Arc<Vec<u32>> {
        let mut guard = self.boundary_distance.lock().expect("boundary cache");
        if let Some(d) = guard.as_ref() {
            return Arc::clone(d);
        }
        let sources: Vec<usize> = (0..self.len()).filter(|&x| !self.is_interior(x)).collect();
        let d = Arc::new(self.bfs(&sources));
        *guard = Some(Arc::clone(&d));
        d
    }

    fn bfs(&self, sources: &[usize]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(x) = queue.pop_front() {
            for (y, p) in self.neighbors(x) {
                if p > 0.0 && dist[y] == u32::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    fn tree_distance(&self, mut x: usize, mut y: usize) -> u32 {
        if self.sides[x] != self.sides[y] {
            return self.levels[x] + self.levels[y] + 1;
        }
        let mut d = 0;
        while self.levels[x] > self.levels[y] {
            x = self.parents[x] as usize;
            d += 1;
        }
        while self.levels[y] > self.levels[x] {
            y = self.parents[y] as usize;
            d += 1;
        }
        while x != y {
            x = self.parents[x] as usize;
            y = self.parents[y] as usize;
            d += 2;
        }
        d
    }

    /// Tree parent of `x` (`None` at the basis endpoints or off-tree).
    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parents.get(x).filter(|&&p| p != NO_PARENT).map(|&p| p as usize)
    }

    /// Largest |p(x,y) − p(y,x)| over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.len() {
            for (y, p) in self.neighbors(x) {
                worst = worst.max((p - self.p(y, x)).abs());
            }
        }
        worst
    }

    /// Off-diagonal support connected.
    pub fn is_irreducible(&self) -> bool {
        self.is_empty() || self.bfs(&[0]).iter().all(|&d| d != u32::MAX)
    }

    pub fn to_record(&self) -> KernelRecord {
        let sites = (0..self.len())
            .map(|x| SiteRecord {
                id: x,
                level: self.levels[x],
                side: self.side(x),
                coord: self.coord(x),
            })
            .collect();
        KernelRecord {
            sites,
            edges: self.edges(),
            holding: self.holding.clone(),
            deficit: if self.is_stochastic() {
                Vec::new()
            } else {
                self.deficit.clone()
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    /// Rebuilds a kernel from its JSON record. Geometry comes back as
    /// `Custom`; metadata is restored.
    pub fn from_record(rec: &KernelRecord) -> Result<Self> {
        let n = rec.sites.len();
        if rec.holding.len() != n {
            return Err(SepError::invalid("holding length differs from site count"));
        }
        let mut k = Kernel::from_edges(n, &rec.edges)?;
        k.levels = rec.sites.iter().map(|s| s.level).collect();
        if rec.sites.iter().all(|s| s.side.is_some()) && n > 0 {
            k.sides = rec.sites.iter().map(|s| s.side.unwrap_or(Side::L)).collect();
        }
        if rec.sites.iter().all(|s| s.coord.is_some()) && n > 0 {
            k.coords = rec.sites.iter().map(|s| s.coord.unwrap_or(0)).collect();
        }
        for x in 0..n {
            let d = rec.deficit.get(x).copied().unwrap_or(0.0);
            let diff = (k.holding[x] - rec.holding[x] - d).abs();
            if diff > 1e-9 {
                return Err(SepError::invalid(format!(
                    "row {x}: holding {} + deficit {d} does not complete the row",
                    rec.holding[x]
                )));
            }
            k.holding[x] = rec.holding[x];
            k.deficit[x] = d;
        }
        Ok(k)
    }
}

/// A kernel whose escape mass has been turned into killing: rows at the
/// truncation edge are substochastic.
#[derive(Debug, Clone)]
pub struct KilledKernel(Kernel);

impl Deref for KilledKernel {
    type Target = Kernel;
    fn deref(&self) -> &Kernel {
        &self.0
    }
}

impl KilledKernel {
    pub fn kernel(&self) -> &Kernel {
        &self.0
    }
}

/// Removes the boundary holding mass (walker dies at the truncation edge);
/// interior rows are unchanged.
pub fn killed_truncation(kernel: &Kernel) -> KilledKernel {
    let mut k = kernel.clone();
    for x in 0..k.len() {
        let e = k.escape[x];
        k.holding[x] -= e;
        if k.holding[x].abs() < 1e-15 {
            k.holding[x] = 0.0;
        }
        k.deficit[x] += e;
        k.escape[x] = e;
    }
    KilledKernel(k)
}
