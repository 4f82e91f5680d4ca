//! Hexagonal trap-array geometry and its decomposition into cluster layers.
//!
//! Trap sites sit on the vertices of a honeycomb network whose edges are the
//! transport channels; every vertex is a 120° Y-junction with at most three
//! channel neighbours at spacing `d`. The two honeycomb sublattices `A` and
//! `B` are triangular Bravais lattices. Inside one sublattice the two
//! primitive directions
//!
//! ```text
//! u = a1 = d·(√3, 0)        v = a2 = d·(√3/2, 3/2)
//! ```
//!
//! meet at 60°, so each sublattice is a rhombic lattice. Moving one step
//! along `u` or `v` means crossing one junction: the shuttling path through
//! the channels is `2d` long. Scaling the rhombic cell by `n` splits each
//! sublattice into `n²` cosets, indexed by the offset `(i mod n, j mod n)`,
//! which gives `2n²` layers whose in-layer neighbours sit `2n·d` apart along
//! the channels.
//!
//! Distances reported by this module are channel (shuttling-path) lengths
//! on the unbounded network unless the name says `euclidean`.
//!
//! Layer labels run through the `n × n` offsets in serpentine order,
//! interleaving the two families: `A(o₁), B(o₁), A(o₂), B(o₂), …`, so a site
//! in layer `ℓ` always has its layer-`ℓ+1` partner within `2n·d`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::edges::EdgeSet;
use crate::error::{Error, Result};

pub type SiteId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

/// Integer honeycomb coordinate: `A(i, j)` sits at `i·a1 + j·a2`, `B(i, j)`
/// one channel length above it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteCoord {
    pub i: i64,
    pub j: i64,
    pub sub: Sublattice,
}

impl SiteCoord {
    pub fn a(i: i64, j: i64) -> Self {
        Self { i, j, sub: Sublattice::A }
    }

    pub fn b(i: i64, j: i64) -> Self {
        Self { i, j, sub: Sublattice::B }
    }

    /// Position in units of `d`.
    pub fn unit_position(&self) -> [f64; 2] {
        let s3 = 3f64.sqrt();
        let (i, j) = (self.i as f64, self.j as f64);
        let y = 1.5 * j + if self.sub == Sublattice::B { 1.0 } else { 0.0 };
        [s3 * (i + 0.5 * j), y]
    }

    /// The three channel neighbours on the unbounded network.
    pub fn channel_neighbors(&self) -> [SiteCoord; 3] {
        let (i, j) = (self.i, self.j);
        match self.sub {
            Sublattice::A => [SiteCoord::b(i, j), SiteCoord::b(i, j - 1), SiteCoord::b(i + 1, j - 1)],
            Sublattice::B => [SiteCoord::a(i, j), SiteCoord::a(i, j + 1), SiteCoord::a(i - 1, j + 1)],
        }
    }
}

/// Hop count on the triangular lattice with moves `±a1, ±a2, ±(a1 − a2)`.
fn triangular_hops(di: i64, dj: i64) -> i64 {
    if di.signum() * dj.signum() >= 0 {
        di.abs() + dj.abs()
    } else {
        di.abs().max(dj.abs())
    }
}

/// Number of channel segments on the shortest path between two sites.
pub fn channel_hops(a: SiteCoord, b: SiteCoord) -> i64 {
    match (a.sub, b.sub) {
        (x, y) if x == y => 2 * triangular_hops(b.i - a.i, b.j - a.j),
        (Sublattice::A, Sublattice::B) => {
            1 + b
                .channel_neighbors()
                .iter()
                .map(|n| 2 * triangular_hops(n.i - a.i, n.j - a.j))
                .min()
                .expect("three neighbours")
        }
        _ => channel_hops(b, a),
    }
}

/// A block of `rows × cols` hexagonal cells arranged as a parallelogram along
/// `a1` (columns) and `a2` (rows).
#[derive(Clone, Debug, PartialEq)]
pub struct HexArray {
    rows: usize,
    cols: usize,
    d: f64,
    coords: Vec<SiteCoord>,
    index: HashMap<SiteCoord, SiteId>,
}

/// Site count of a `rows × cols` hexagon block.
pub fn hex_site_count(rows: usize, cols: usize) -> usize {
    2 * (rows + 1) * (cols + 1) - 2
}

/// Vertices of hexagon `(p, q)` in the block.
fn hexagon_vertices(p: i64, q: i64) -> [SiteCoord; 6] {
    [
        SiteCoord::a(p, q + 1),
        SiteCoord::b(p + 1, q),
        SiteCoord::a(p + 1, q),
        SiteCoord::b(p + 1, q - 1),
        SiteCoord::a(p, q),
        SiteCoord::b(p, q),
    ]
}

pub fn build_hex_array(rows: usize, cols: usize, d: f64) -> Result<HexArray> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "array extent must be at least 1x1, got {rows}x{cols}"
        )));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidArgument(format!("site spacing must be positive, got {d}")));
    }
    let mut set = BTreeSet::new();
    for q in 0..rows as i64 {
        for p in 0..cols as i64 {
            set.extend(hexagon_vertices(p, q));
        }
    }
    // Row-major order: by j, then i, A before B.
    let mut coords: Vec<SiteCoord> = set.into_iter().collect();
    coords.sort_by_key(|c| (c.j, c.i, c.sub));
    Ok(HexArray::from_coords(rows, cols, d, coords))
}

impl HexArray {
    fn from_coords(rows: usize, cols: usize, d: f64, coords: Vec<SiteCoord>) -> Self {
        let index = coords.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        Self { rows, cols, d, coords, index }
    }

    /// An array with no sites, used for degenerate schedules.
    pub fn empty(d: f64) -> Self {
        Self::from_coords(0, 0, d, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn sites(&self) -> std::ops::Range<SiteId> {
        0..self.coords.len()
    }

    pub fn coord(&self, site: SiteId) -> Result<SiteCoord> {
        self.coords.get(site).copied().ok_or(Error::Lookup(site))
    }

    pub fn coords(&self) -> &[SiteCoord] {
        &self.coords
    }

    pub fn site_at(&self, coord: SiteCoord) -> Option<SiteId> {
        self.index.get(&coord).copied()
    }

    pub fn position(&self, site: SiteId) -> Result<[f64; 2]> {
        let [x, y] = self.coord(site)?.unit_position();
        Ok([x * self.d, y * self.d])
    }

    /// Channel neighbours present in this array (at most three).
    pub fn channel_neighbors(&self, site: SiteId) -> Result<Vec<SiteId>> {
        let c = self.coord(site)?;
        Ok(c.channel_neighbors().iter().filter_map(|n| self.site_at(*n)).collect())
    }

    /// Shortest shuttling path length between two sites.
    pub fn channel_distance(&self, a: SiteId, b: SiteId) -> Result<f64> {
        Ok(channel_hops(self.coord(a)?, self.coord(b)?) as f64 * self.d)
    }

    pub fn euclidean_distance(&self, a: SiteId, b: SiteId) -> Result<f64> {
        let [xa, ya] = self.position(a)?;
        let [xb, yb] = self.position(b)?;
        Ok((xa - xb).hypot(ya - yb))
    }
}

/// Layer family and offset inside the scaled rhombic cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerLabel {
    pub family: Sublattice,
    pub offset: (i64, i64),
}

/// Assignment of every array site to one of `2n²` rhombic layers.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerAssignment {
    n: usize,
    array: HexArray,
    labels: Vec<LayerLabel>,
    layer_of: Vec<usize>,
    coord_of: Vec<(i64, i64)>,
    lookup: HashMap<(usize, i64, i64), SiteId>,
}

/// Serpentine walk over the `n × n` offsets.
fn serpentine_offsets(n: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity((n * n) as usize);
    for q in 0..n {
        if q % 2 == 0 {
            out.extend((0..n).map(|p| (p, q)));
        } else {
            out.extend((0..n).rev().map(|p| (p, q)));
        }
    }
    out
}

fn layer_labels(n: usize) -> Vec<LayerLabel> {
    serpentine_offsets(n as i64)
        .into_iter()
        .flat_map(|offset| {
            [
                LayerLabel { family: Sublattice::A, offset },
                LayerLabel { family: Sublattice::B, offset },
            ]
        })
        .collect()
}

pub fn decompose_sublattices(array: &HexArray, n: usize) -> Result<LayerAssignment> {
    if n == 0 {
        return Err(Error::InvalidArgument("cell scaling n must be at least 1".into()));
    }
    let labels = layer_labels(n);
    let layer_count = labels.len();
    let position: HashMap<LayerLabel, usize> =
        labels.iter().enumerate().map(|(k, l)| (*l, k + 1)).collect();

    let ni = n as i64;
    let mut layer_of = Vec::with_capacity(array.len());
    let mut coord_of = Vec::with_capacity(array.len());
    let mut lookup = HashMap::with_capacity(array.len());
    let mut cell_fill: HashMap<(i64, i64), usize> = HashMap::new();
    for (site, c) in array.coords().iter().enumerate() {
        let label = LayerLabel {
            family: c.sub,
            offset: (c.i.rem_euclid(ni), c.j.rem_euclid(ni)),
        };
        let layer = position[&label];
        let coord = (c.i.div_euclid(ni), c.j.div_euclid(ni));
        layer_of.push(layer);
        coord_of.push(coord);
        lookup.insert((layer, coord.0, coord.1), site);
        *cell_fill.entry(coord).or_default() += 1;
    }
    if !cell_fill.values().any(|&k| k == layer_count) {
        return Err(Error::Size(format!(
            "{}x{} array holds no complete {layer_count}-site cell for n = {n}",
            array.rows(),
            array.cols()
        )));
    }
    Ok(LayerAssignment {
        n,
        array: array.clone(),
        labels,
        layer_of,
        coord_of,
        lookup,
    })
}

/// Lattice direction inside a layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    U,
    V,
}

/// One intra-layer edge, oriented from the site with the smaller coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntraEdge {
    pub from: SiteId,
    pub to: SiteId,
    pub direction: Direction,
    /// Parity of the source coordinate along `direction`.
    pub parity: u8,
}

/// One edge between consecutive layers, oriented from `layer` to the next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterEdge {
    pub from: SiteId,
    pub to: SiteId,
    /// Source layer (1-based).
    pub layer: usize,
}

impl LayerAssignment {
    /// A zero-site assignment with `2n²` (empty) layers.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("cell scaling n must be at least 1".into()));
        }
        Ok(Self {
            n,
            array: HexArray::empty(1.0),
            labels: layer_labels(n),
            layer_of: Vec::new(),
            coord_of: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[cfg(test)]
    pub(crate) fn force_layer_count_for_test(&mut self, count: usize) {
        self.labels = (0..count)
            .map(|k| LayerLabel {
                family: if k % 2 == 0 { Sublattice::A } else { Sublattice::B },
                offset: (k as i64, 0),
            })
            .collect();
    }

    pub fn layer_count(&self) -> usize {
        self.labels.len()
    }

    pub fn array(&self) -> &HexArray {
        &self.array
    }

    pub fn len(&self) -> usize {
        self.layer_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer_of.is_empty()
    }

    pub fn label(&self, layer: usize) -> Option<LayerLabel> {
        layer.checked_sub(1).and_then(|k| self.labels.get(k)).copied()
    }

    /// Layer index in `1..=layer_count`.
    pub fn layer(&self, site: SiteId) -> Result<usize> {
        self.layer_of.get(site).copied().ok_or(Error::Lookup(site))
    }

    pub fn coord(&self, site: SiteId) -> Result<(i64, i64)> {
        self.coord_of.get(site).copied().ok_or(Error::Lookup(site))
    }

    pub fn site_in_layer(&self, layer: usize, coord: (i64, i64)) -> Option<SiteId> {
        self.lookup.get(&(layer, coord.0, coord.1)).copied()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.layer_count()];
        for &l in &self.layer_of {
            sizes[l - 1] += 1;
        }
        sizes
    }

    /// In-layer lattice spacing measured along the channels, `2n·d`.
    pub fn layer_spacing(&self) -> f64 {
        2.0 * self.n as f64 * self.array.spacing()
    }

    /// Same-layer neighbours one primitive step away along `±u` or `±v`.
    pub fn layer_neighbors(&self, site: SiteId) -> Result<BTreeSet<SiteId>> {
        let layer = self.layer(site)?;
        let (ci, cj) = self.coord(site)?;
        Ok([(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .filter_map(|(di, dj)| self.site_in_layer(layer, (ci + di, cj + dj)))
            .collect())
    }

    /// All intra-layer edges with their direction and source parity.
    pub fn intralayer_edges_tagged(&self) -> Vec<IntraEdge> {
        let mut out = Vec::new();
        for site in 0..self.len() {
            let layer = self.layer_of[site];
            let (ci, cj) = self.coord_of[site];
            if let Some(to) = self.site_in_layer(layer, (ci + 1, cj)) {
                out.push(IntraEdge { from: site, to, direction: Direction::U, parity: ci.rem_euclid(2) as u8 });
            }
            if let Some(to) = self.site_in_layer(layer, (ci, cj + 1)) {
                out.push(IntraEdge { from: site, to, direction: Direction::V, parity: cj.rem_euclid(2) as u8 });
            }
        }
        out
    }

    pub fn intralayer_edges(&self) -> EdgeSet {
        self.intralayer_edges_tagged().iter().map(|e| (e.from, e.to)).collect()
    }

    /// Edges linking each site to the same coordinate in the next layer. With
    /// `periodic`, the last layer also links back to the first; for two
    /// layers that closure coincides with the existing edges and is dropped.
    pub fn interlayer_edges_tagged(&self, periodic: bool) -> Vec<InterEdge> {
        let count = self.layer_count();
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for site in 0..self.len() {
            let layer = self.layer_of[site];
            let next = if layer < count {
                layer + 1
            } else if periodic && count > 1 {
                1
            } else {
                continue;
            };
            if let Some(to) = self.site_in_layer(next, self.coord_of[site]) {
                let key = (site.min(to), site.max(to));
                if seen.insert(key) {
                    out.push(InterEdge { from: site, to, layer });
                }
            }
        }
        out
    }

    pub fn interlayer_edges(&self, periodic: bool) -> EdgeSet {
        self.interlayer_edges_tagged(periodic).iter().map(|e| (e.from, e.to)).collect()
    }

    /// The full 3D cluster: intra-layer plus interlayer edges.
    pub fn cluster_edges(&self, periodic: bool) -> EdgeSet {
        self.intralayer_edges().union(&self.interlayer_edges(periodic))
    }

    pub fn report(&self) -> LatticeReport {
        let sites = (0..self.len())
            .map(|id| {
                let c = self.array.coords()[id];
                let [x, y] = self.array.position(id).expect("site in range");
                SiteRecord {
                    id,
                    x,
                    y,
                    sublattice: c.sub,
                    layer: self.layer_of[id],
                    coord: [self.coord_of[id].0, self.coord_of[id].1],
                }
            })
            .collect();
        LatticeReport {
            schema_version: LATTICE_SCHEMA_VERSION,
            rows: self.array.rows(),
            cols: self.array.cols(),
            d: self.array.spacing(),
            n: self.n,
            layer_count: self.layer_count(),
            site_count: self.len(),
            sites,
        }
    }
}

pub const LATTICE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: SiteId,
    pub x: f64,
    pub y: f64,
    pub sublattice: Sublattice,
    pub layer: usize,
    pub coord: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub schema_version: u32,
    pub rows: usize,
    pub cols: usize,
    pub d: f64,
    pub n: usize,
    pub layer_count: usize,
    pub site_count: usize,
    pub sites: Vec<SiteRecord>,
}
