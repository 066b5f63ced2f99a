//! Dyadic one-dimensional meshes.
//!
//! Cells are `C_{ℓ,k} = [2^-ℓ k, 2^-ℓ (k+1)]`. A mesh is a set of leaves
//! (real cells) tiling the domain exactly once, either at a single level or
//! split at an interface into a fine left part and a coarse right part.
//!
//! Ghost cells are the non-leaf cells the stream stencil reads. Which ghosts
//! exist, and how each is filled, is derived by dependency closure starting
//! from the two-cell halo of every leaf range:
//!
//! - a ghost under finer leaves, at a level that has leaves of its own, is
//!   the average of the leaf cells it covers,
//! - any other ghost inside the domain is predicted from its parent and the
//!   parent's two neighbours; this includes cells under finer leaves at
//!   levels without leaves, so that fine ghosts over a coarse leaf come from
//!   the coarse level alone, as the stream weights assume,
//! - a ghost outside the domain copies the nearest in-domain cell of its level.
//!
//! The resulting fills are stored in dependency order together with their
//! flat storage offsets, so applying them is a single linear pass.

use std::collections::HashSet;
use std::ops::Range;

use crate::error::{Error, Result};

/// Half-width of the stream stencil (`m ∈ [-2, 2]`).
pub const STENCIL_RADIUS: i64 = 2;

/// Deepest supported level; keeps every cell boundary an exact binary fraction.
pub const MAX_LEVEL: u32 = 40;

/// Width `2^-ℓ` of a cell at `level`.
#[inline]
pub fn cell_width(level: u32) -> f64 {
    2f64.powi(-(level as i32))
}

/// Center `x_{ℓ,k} = 2^-ℓ (k + 1/2)`.
#[inline]
pub fn cell_center(level: u32, k: i64) -> f64 {
    (k as f64 + 0.5) * cell_width(level)
}

/// Domain and level bounds of a mesh with at most one resolution jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Interface abscissa; left of it is meshed at `l_max`, right at `l_min`.
    pub jump_x: f64,
    pub l_min: u32,
    pub l_max: u32,
}

impl MeshConfig {
    /// Domain `[0, 3]` with the interface at `x = 2`.
    pub fn new(l_min: u32, l_max: u32) -> Self {
        Self {
            x_lo: 0.0,
            x_hi: 3.0,
            jump_x: 2.0,
            l_min,
            l_max,
        }
    }

    pub fn level_jump(&self) -> u32 {
        self.l_max.saturating_sub(self.l_min)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_min > self.l_max {
            return Err(Error::InvalidParameter(format!(
                "l_min = {} exceeds l_max = {}",
                self.l_min, self.l_max
            )));
        }
        if self.l_max > MAX_LEVEL {
            return Err(Error::InvalidParameter(format!(
                "l_max = {} exceeds {MAX_LEVEL}",
                self.l_max
            )));
        }
        if !(self.x_lo < self.jump_x && self.jump_x < self.x_hi) {
            return Err(Error::InvalidParameter(format!(
                "need x_lo < jump_x < x_hi, got {} {} {}",
                self.x_lo, self.jump_x, self.x_hi
            )));
        }
        aligned_index("x_lo", self.x_lo, self.l_min)?;
        aligned_index("x_hi", self.x_hi, self.l_min)?;
        aligned_index("jump_x", self.jump_x, self.l_min)?;
        Ok(())
    }
}

/// `x · 2^level` when it is an integer.
pub fn aligned_index(what: &'static str, x: f64, level: u32) -> Result<i64> {
    let scaled = x * 2f64.powi(level as i32);
    if !scaled.is_finite() || scaled.fract() != 0.0 || scaled.abs() > (1i64 << 52) as f64 {
        return Err(Error::Misaligned {
            what,
            value: x,
            level,
        });
    }
    Ok(scaled as i64)
}

/// A contiguous run of leaves at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaves {
    pub level: u32,
    pub cells: Range<i64>,
}

/// Storage of one level: real cells plus whatever ghosts the level needs,
/// as one contiguous index range starting at `offset` in flat storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelBlock {
    pub level: u32,
    pub real: Range<i64>,
    pub stored: Range<i64>,
    pub offset: usize,
}

impl LevelBlock {
    #[inline]
    pub fn flat(&self, k: i64) -> usize {
        debug_assert!(self.stored.contains(&k));
        self.offset + (k - self.stored.start) as usize
    }

    pub fn real_flat(&self) -> Range<usize> {
        if self.real.is_empty() {
            return self.offset..self.offset;
        }
        self.flat(self.real.start)..self.flat(self.real.start) + self.real_len()
    }

    pub fn real_len(&self) -> usize {
        (self.real.end - self.real.start).max(0) as usize
    }

    pub fn stored_len(&self) -> usize {
        (self.stored.end - self.stored.start).max(0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillRule {
    /// Copy of the in-domain cell `from` at the same level.
    Extrapolate { from: i64 },
    /// Average of the `2^depth` descendants `depth` levels finer.
    Project { depth: u32 },
    /// Interpolation from the parent triple.
    Predict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GhostCell {
    pub level: u32,
    pub index: i64,
    pub rule: FillRule,
}

/// A ghost fill resolved to flat storage offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    Copy {
        dst: usize,
        src: usize,
    },
    Predict {
        dst: usize,
        left: usize,
        parent: usize,
        right: usize,
        odd: bool,
    },
    /// Mean of `len` consecutive offsets starting at `first`.
    Project {
        dst: usize,
        first: usize,
        len: usize,
    },
}

impl Transfer {
    /// Destination and source offsets.
    pub fn endpoints(&self) -> (usize, Vec<usize>) {
        match *self {
            Transfer::Copy { dst, src } => (dst, vec![src]),
            Transfer::Predict {
                dst,
                left,
                parent,
                right,
                ..
            } => (dst, vec![left, parent, right]),
            Transfer::Project { dst, first, len } => (dst, (first..first + len).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Real,
    UnderFiner,
    OverCoarser,
    Outside,
}

/// Storage layout plus ordered ghost fills for a set of leaves.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub blocks: Vec<LevelBlock>,
    pub ghosts: Vec<GhostCell>,
    pub transfers: Vec<Transfer>,
    pub len: usize,
}

struct Resolver<'a> {
    top: u32,
    lo: i64,
    hi: i64,
    leaves: &'a [Leaves],
    visited: HashSet<(u32, i64)>,
    order: Vec<GhostCell>,
}

impl Resolver<'_> {
    fn domain_range(&self, level: u32) -> Range<i64> {
        let shift = self.top - level;
        (self.lo >> shift)..(self.hi >> shift)
    }

    fn status(&self, level: u32, k: i64) -> Status {
        let shift = self.top - level;
        let start = k << shift;
        if start < self.lo || start >= self.hi {
            return Status::Outside;
        }
        for leaf in self.leaves {
            let s = self.top - leaf.level;
            if (leaf.cells.start << s) <= start && start < (leaf.cells.end << s) {
                return match level.cmp(&leaf.level) {
                    std::cmp::Ordering::Equal => Status::Real,
                    std::cmp::Ordering::Less => Status::UnderFiner,
                    std::cmp::Ordering::Greater => Status::OverCoarser,
                };
            }
        }
        // leaves tile the domain, so this is unreachable for valid input
        Status::Outside
    }

    /// Levels between `level` and the leaf level under the first
    /// descendant of cell `k`.
    fn leaf_depth(&self, level: u32, k: i64) -> Result<u32> {
        let start = k << (self.top - level);
        self.leaves
            .iter()
            .find(|l| {
                let s = self.top - l.level;
                (l.cells.start << s) <= start && start < (l.cells.end << s)
            })
            .filter(|l| l.level > level)
            .map(|l| l.level - level)
            .ok_or(Error::UnresolvedGhost { level, index: k })
    }

    fn is_leaf_level(&self, level: u32) -> bool {
        self.leaves.iter().any(|l| l.level == level)
    }

    fn predicted(&mut self, level: u32, k: i64) -> Result<FillRule> {
        if level == 0 {
            return Err(Error::UnresolvedGhost { level, index: k });
        }
        let p = k.div_euclid(2);
        for j in p - 1..=p + 1 {
            self.visit(level - 1, j)?;
        }
        Ok(FillRule::Predict)
    }

    fn visit(&mut self, level: u32, k: i64) -> Result<()> {
        if !self.visited.insert((level, k)) {
            return Ok(());
        }
        let rule = match self.status(level, k) {
            Status::Real => return Ok(()),
            Status::UnderFiner if self.is_leaf_level(level) => {
                let depth = self.leaf_depth(level, k)?;
                let n = 1i64 << depth;
                for j in k * n..(k + 1) * n {
                    self.visit(level + depth, j)?;
                }
                FillRule::Project { depth }
            }
            Status::UnderFiner => self.predicted(level, k)?,
            Status::OverCoarser => self.predicted(level, k)?,
            Status::Outside => {
                let range = self.domain_range(level);
                if range.is_empty() {
                    return Err(Error::UnresolvedGhost { level, index: k });
                }
                let from = k.clamp(range.start, range.end - 1);
                self.visit(level, from)?;
                FillRule::Extrapolate { from }
            }
        };
        self.order.push(GhostCell {
            level,
            index: k,
            rule,
        });
        Ok(())
    }
}

impl Layout {
    /// Resolves the ghosts needed to read every cell in `required`, with
    /// levels up to `top`. `domain` is the domain in cells of level `top`.
    pub(crate) fn resolve(
        domain: Range<i64>,
        top: u32,
        leaves: &[Leaves],
        required: impl IntoIterator<Item = (u32, i64)>,
    ) -> Result<Self> {
        let bottom = leaves.iter().map(|l| l.level).min().unwrap_or(top);
        if leaves.iter().any(|l| l.level > top) {
            return Err(Error::InvalidParameter("leaf finer than layout top level".into()));
        }
        for (i, a) in leaves.iter().enumerate() {
            if leaves[i + 1..].iter().any(|b| b.level == a.level) {
                return Err(Error::InvalidParameter(format!(
                    "two leaf ranges at level {}",
                    a.level
                )));
            }
        }

        let mut resolver = Resolver {
            top,
            lo: domain.start,
            hi: domain.end,
            leaves,
            visited: HashSet::new(),
            order: Vec::new(),
        };
        for (level, k) in required {
            resolver.visit(level, k)?;
        }
        let ghosts = resolver.order;

        let mut blocks = Vec::new();
        let mut offset = 0usize;
        for level in bottom..=top {
            let real = leaves
                .iter()
                .find(|l| l.level == level)
                .map(|l| l.cells.clone())
                .unwrap_or(0..0);
            let mut lo = if real.is_empty() { i64::MAX } else { real.start };
            let mut hi = if real.is_empty() { i64::MIN } else { real.end };
            for g in ghosts.iter().filter(|g| g.level == level) {
                lo = lo.min(g.index);
                hi = hi.max(g.index + 1);
            }
            let stored = if lo < hi { lo..hi } else { 0..0 };
            let block = LevelBlock {
                level,
                real,
                stored,
                offset,
            };
            offset += block.stored_len();
            blocks.push(block);
        }

        let flat = |level: u32, k: i64| -> Result<usize> {
            blocks
                .get((level.checked_sub(bottom)).ok_or(Error::UnresolvedGhost { level, index: k })? as usize)
                .filter(|b| b.stored.contains(&k))
                .map(|b| b.flat(k))
                .ok_or(Error::UnresolvedGhost { level, index: k })
        };

        let mut transfers = Vec::with_capacity(ghosts.len());
        for g in &ghosts {
            let dst = flat(g.level, g.index)?;
            let t = match g.rule {
                FillRule::Extrapolate { from } => Transfer::Copy {
                    dst,
                    src: flat(g.level, from)?,
                },
                FillRule::Project { depth } => {
                    let n = 1i64 << depth;
                    let first = flat(g.level + depth, g.index * n)?;
                    let last = flat(g.level + depth, (g.index + 1) * n - 1)?;
                    Transfer::Project {
                        dst,
                        first,
                        len: last + 1 - first,
                    }
                }
                FillRule::Predict => {
                    let p = g.index.div_euclid(2);
                    Transfer::Predict {
                        dst,
                        left: flat(g.level - 1, p - 1)?,
                        parent: flat(g.level - 1, p)?,
                        right: flat(g.level - 1, p + 1)?,
                        odd: g.index.rem_euclid(2) == 1,
                    }
                }
            };
            transfers.push(t);
        }

        let layout = Self {
            blocks,
            ghosts,
            transfers,
            len: offset,
        };
        layout.check_fill_order()?;
        Ok(layout)
    }

    fn level_of(&self, flat: usize) -> (u32, i64) {
        let b = self
            .blocks
            .iter()
            .find(|b| (b.offset..b.offset + b.stored_len()).contains(&flat))
            .expect("flat index inside storage");
        (b.level, b.stored.start + (flat - b.offset) as i64)
    }

    /// Every fill reads only real cells or ghosts filled earlier.
    fn check_fill_order(&self) -> Result<()> {
        let mut filled = vec![false; self.len];
        for b in &self.blocks {
            filled[b.real_flat()].iter_mut().for_each(|f| *f = true);
        }
        for t in &self.transfers {
            let (dst, sources) = t.endpoints();
            if let Some(&missing) = sources.iter().find(|&&s| !filled[s]) {
                let (level, index) = self.level_of(missing);
                return Err(Error::UnresolvedGhost { level, index });
            }
            filled[dst] = true;
        }
        Ok(())
    }
}

/// Real-cell values grouped by level.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafSegment {
    pub level: u32,
    pub first: i64,
    pub values: Vec<f64>,
}

impl LeafSegment {
    pub fn cells(&self) -> Range<i64> {
        self.first..self.first + self.values.len() as i64
    }
}

/// A scalar field on the leaves of a mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LeafField {
    pub segments: Vec<LeafSegment>,
}

impl LeafField {
    /// `(level, k, value)` in increasing `x`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, i64, f64)> + '_ {
        let mut segs: Vec<&LeafSegment> = self.segments.iter().collect();
        segs.sort_by(|a, b| {
            cell_center(a.level, a.first)
                .partial_cmp(&cell_center(b.level, b.first))
                .expect("finite centers")
        });
        segs.into_iter().flat_map(|s| {
            s.values
                .iter()
                .enumerate()
                .map(move |(i, &v)| (s.level, s.first + i as i64, v))
        })
    }

    pub fn segment(&self, level: u32) -> Option<&LeafSegment> {
        self.segments.iter().find(|s| s.level == level)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| LeafSegment {
                    level: s.level,
                    first: s.first,
                    values: s.values.iter().map(|&v| f(v)).collect(),
                })
                .collect(),
        }
    }
}

/// Leaves, ghost bands and ghost-fill plan of a 1D mesh.
#[derive(Debug, Clone)]
pub struct MultiLevelGrid {
    x_lo: f64,
    x_hi: f64,
    finest: u32,
    interface: Option<f64>,
    leaves: Vec<Leaves>,
    layout: Layout,
}

impl MultiLevelGrid {
    fn from_leaves(
        x_lo: f64,
        x_hi: f64,
        finest: u32,
        interface: Option<f64>,
        leaves: Vec<Leaves>,
    ) -> Result<Self> {
        let top = leaves.iter().map(|l| l.level).max().expect("at least one leaf");
        let domain = aligned_index("x_lo", x_lo, top)?..aligned_index("x_hi", x_hi, top)?;
        let required = leaves.iter().flat_map(|l| {
            let (a, b) = (l.cells.start, l.cells.end);
            (1..=STENCIL_RADIUS).flat_map(move |d| [(l.level, a - d), (l.level, b - 1 + d)])
        });
        let layout = Layout::resolve(domain, top, &leaves, required.collect::<Vec<_>>())?;
        Ok(Self {
            x_lo,
            x_hi,
            finest,
            interface,
            leaves,
            layout,
        })
    }

    /// Single level `level` covering the whole domain; the time step is
    /// still set by `config.l_max`.
    pub fn uniform(config: &MeshConfig, level: u32) -> Result<Self> {
        if level > config.l_max {
            return Err(Error::InvalidParameter(format!(
                "uniform level {level} exceeds l_max = {}",
                config.l_max
            )));
        }
        if config.x_lo >= config.x_hi {
            return Err(Error::InvalidParameter("empty domain".into()));
        }
        let cells = aligned_index("x_lo", config.x_lo, level)?..aligned_index("x_hi", config.x_hi, level)?;
        Self::from_leaves(config.x_lo, config.x_hi, config.l_max, None, vec![Leaves { level, cells }])
    }

    /// `[x_lo, jump_x]` at `l_max`, `[jump_x, x_hi]` at `l_min`.
    pub fn jump(config: &MeshConfig) -> Result<Self> {
        config.validate()?;
        let (fine, coarse) = (config.l_max, config.l_min);
        let left = aligned_index("x_lo", config.x_lo, fine)?..aligned_index("jump_x", config.jump_x, fine)?;
        let right = aligned_index("jump_x", config.jump_x, coarse)?..aligned_index("x_hi", config.x_hi, coarse)?;
        let leaves = if fine == coarse {
            vec![Leaves {
                level: fine,
                cells: left.start..right.end,
            }]
        } else {
            vec![
                Leaves {
                    level: fine,
                    cells: left,
                },
                Leaves {
                    level: coarse,
                    cells: right,
                },
            ]
        };
        Self::from_leaves(config.x_lo, config.x_hi, config.l_max, Some(config.jump_x), leaves)
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    /// `l_max`: sets `Δx` and the global time step.
    pub fn finest_level(&self) -> u32 {
        self.finest
    }

    pub fn dx(&self) -> f64 {
        cell_width(self.finest)
    }

    pub fn interface(&self) -> Option<f64> {
        self.interface
    }

    pub fn leaves(&self) -> &[Leaves] {
        &self.leaves
    }

    pub fn blocks(&self) -> &[LevelBlock] {
        &self.layout.blocks
    }

    pub fn block(&self, level: u32) -> Option<&LevelBlock> {
        self.layout.blocks.iter().find(|b| b.level == level)
    }

    /// Ghost cells in fill order.
    pub fn ghosts(&self) -> &[GhostCell] {
        &self.layout.ghosts
    }

    pub fn transfers(&self) -> &[Transfer] {
        &self.layout.transfers
    }

    /// Length of flat per-population storage.
    pub fn storage_len(&self) -> usize {
        self.layout.len
    }

    pub fn real_cell_count(&self) -> usize {
        self.layout.blocks.iter().map(LevelBlock::real_len).sum()
    }

    pub fn flat(&self, level: u32, k: i64) -> Option<usize> {
        self.block(level)
            .filter(|b| b.stored.contains(&k))
            .map(|b| b.flat(k))
    }

    /// Leaf field from a function of `(level, k)`.
    pub fn leaf_field(&self, f: impl Fn(u32, i64) -> f64) -> LeafField {
        LeafField {
            segments: self
                .leaves
                .iter()
                .map(|l| LeafSegment {
                    level: l.level,
                    first: l.cells.start,
                    values: l.cells.clone().map(|k| f(l.level, k)).collect(),
                })
                .collect(),
        }
    }

    /// Leaf field sampled at cell centers.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> LeafField {
        self.leaf_field(|level, k| f(cell_center(level, k)))
    }

    /// Leaf values read out of flat storage.
    pub fn gather(&self, storage: &[f64]) -> LeafField {
        self.leaf_field(|level, k| storage[self.flat(level, k).expect("leaf is stored")])
    }

    /// Writes a leaf field into flat storage.
    pub fn scatter(&self, field: &LeafField, storage: &mut [f64]) -> Result<()> {
        for seg in &field.segments {
            for (k, &v) in seg.cells().zip(&seg.values) {
                let i = self
                    .flat(seg.level, k)
                    .ok_or(Error::UnresolvedGhost { level: seg.level, index: k })?;
                storage[i] = v;
            }
        }
        Ok(())
    }

    /// Leaf measure minus domain length; zero when leaves partition the
    /// domain. Overlaps are reported as an error.
    pub fn check_partition(&self) -> Result<()> {
        let top = self.leaves.iter().map(|l| l.level).max().unwrap_or(0);
        let lo = aligned_index("x_lo", self.x_lo, top)?;
        let hi = aligned_index("x_hi", self.x_hi, top)?;
        let mut spans: Vec<Range<i64>> = self
            .leaves
            .iter()
            .map(|l| {
                let s = top - l.level;
                (l.cells.start << s)..(l.cells.end << s)
            })
            .collect();
        spans.sort_by_key(|s| s.start);
        let mut cursor = lo;
        for s in spans {
            if s.start != cursor {
                return Err(Error::InvalidParameter(format!(
                    "leaves leave a gap or overlap at {} (level {top} units)",
                    cursor
                )));
            }
            cursor = s.end;
        }
        if cursor != hi {
            return Err(Error::InvalidParameter("leaves do not reach the domain end".into()));
        }
        let measure: f64 = self
            .leaves
            .iter()
            .map(|l| (l.cells.end - l.cells.start) as f64 * cell_width(l.level))
            .sum();
        if measure != self.x_hi - self.x_lo {
            return Err(Error::InvalidParameter(format!("leaf measure {measure}")));
        }
        Ok(())
    }

    /// Every real cell sees real or filled cells at `k ± 1, k ± 2`.
    pub fn check_stencil_closure(&self) -> Result<()> {
        let mut filled = vec![false; self.storage_len()];
        for b in self.blocks() {
            filled[b.real_flat()].iter_mut().for_each(|f| *f = true);
        }
        for g in self.ghosts() {
            filled[self.flat(g.level, g.index).expect("ghost is stored")] = true;
        }
        for l in &self.leaves {
            for k in [l.cells.start, l.cells.end - 1] {
                for m in -STENCIL_RADIUS..=STENCIL_RADIUS {
                    match self.flat(l.level, k + m) {
                        Some(i) if filled[i] => {}
                        _ => {
                            return Err(Error::UnresolvedGhost {
                                level: l.level,
                                index: k + m,
                            })
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
