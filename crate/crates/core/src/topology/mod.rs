//! Voxel-grid connectivity.
//!
//! Sets of interest (escape regions, image rings, engulfed neighbourhoods)
//! are rasterised onto uniform 2-D or 3-D grids as cell masks. Everything
//! topological is then combinatorial: components under face adjacency,
//! hulls obtained by filling bounded complement components, surrounds
//! relations, outer boundaries, and the nested-web detector in
//! [`spiders`].
//!
//! Boundedness on a finite window is necessarily a proxy: a component is
//! treated as bounded when it does not touch the grid border. Callers pick
//! windows large enough that this is meaningful for the sets they study.

pub mod io;
pub mod spiders;

pub use spiders::{detect_nested_web, WebRejection, WebVerdict};

use std::collections::VecDeque;

use thiserror::Error;

use crate::real::Real;

/// Hard cap on cells per grid (2^27 ≈ 1.3e8, i.e. up to 512^3 in space):
/// guards against typo-sized allocations.
pub const CELL_BUDGET: usize = 1 << 27;

/// Errors from grid construction, mask algebra and mask file I/O.
#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("grid dimension must be 2 or 3, got {0}")]
    InvalidDimension(usize),
    #[error("axis {axis} has zero cells")]
    EmptyAxis { axis: usize },
    #[error("grid of {requested} cells exceeds the budget of {budget}")]
    TooManyCells { requested: u128, budget: usize },
    #[error("grid spacing must be positive and finite")]
    InvalidSpacing,
    #[error("grid origin coordinates must be finite and match the dimension")]
    InvalidOrigin,
    #[error("operation requires masks over identical grids")]
    GridMismatch,
    #[error("bit vector has {got} entries but the grid has {expected} cells")]
    BitsLength { expected: usize, got: usize },
    #[error("slice index {index} out of range for {cells} cells along that axis")]
    SliceOutOfRange { index: usize, cells: usize },
    #[error("mask file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Geometry of a uniform voxel grid: axis-aligned, equal spacing along all
/// axes, `origin` at the minimum corner. Cell `(i, j, k)` occupies
/// `origin + spacing * [i, i+1] x [j, j+1] x [k, k+1]` and is addressed by
/// the x-fastest linear index `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    dims: [usize; 3],
    origin: [T; 3],
    spacing: T,
    dimension: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dims: &[usize], origin: &[T], spacing: T) -> Result<Self, TopologyError> {
        let dimension = dims.len();
        if !(2..=3).contains(&dimension) {
            return Err(TopologyError::InvalidDimension(dimension));
        }
        if origin.len() != dimension || origin.iter().any(|c| !c.is_finite()) {
            return Err(TopologyError::InvalidOrigin);
        }
        if !(spacing.is_finite() && spacing > T::zero()) {
            return Err(TopologyError::InvalidSpacing);
        }
        let mut d = [1usize; 3];
        let mut o = [T::zero(); 3];
        for (axis, (&n, &c)) in dims.iter().zip(origin).enumerate() {
            if n == 0 {
                return Err(TopologyError::EmptyAxis { axis });
            }
            d[axis] = n;
            o[axis] = c;
        }
        let requested = d.iter().map(|&n| n as u128).product::<u128>();
        if requested > CELL_BUDGET as u128 {
            return Err(TopologyError::TooManyCells { requested, budget: CELL_BUDGET });
        }
        Ok(Self { dims: d, origin: o, spacing, dimension })
    }

    /// Cube window centred on the coordinate origin with `cells_per_side`
    /// cells along each of `dimension` axes and half-width `half_extent`.
    pub fn centered(
        dimension: usize,
        cells_per_side: usize,
        half_extent: T,
    ) -> Result<Self, TopologyError> {
        if !(half_extent.is_finite() && half_extent > T::zero()) {
            return Err(TopologyError::InvalidSpacing);
        }
        let n = cells_per_side;
        let two = T::one() + T::one();
        let spacing = two * half_extent / T::from(n).ok_or(TopologyError::InvalidSpacing)?;
        let dims = vec![n; dimension];
        let origin = vec![-half_extent; dimension];
        Self::new(&dims, &origin, spacing)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Cells along each axis (length = `dimension`).
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.dimension]
    }

    /// Minimum corner (length = `dimension`).
    pub fn origin(&self) -> &[T] {
        &self.origin[..self.dimension]
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Linear index of an in-range cell.
    pub fn index(&self, cell: &[usize]) -> Option<usize> {
        if cell.len() != self.dimension {
            return None;
        }
        let mut c = [0usize; 3];
        for (axis, &i) in cell.iter().enumerate() {
            if i >= self.dims[axis] {
                return None;
            }
            c[axis] = i;
        }
        Some(c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2]))
    }

    /// Per-axis cell coordinates of a linear index (trailing entries 0 for
    /// 2-D grids).
    pub fn cell_coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    /// Centre of a cell; only the first `dimension` entries are meaningful.
    pub fn cell_center(&self, idx: usize) -> [T; 3] {
        let c = self.cell_coords(idx);
        let half = T::from(0.5).unwrap();
        let mut out = [T::zero(); 3];
        for axis in 0..self.dimension {
            out[axis] =
                self.origin[axis] + (T::from(c[axis]).unwrap() + half) * self.spacing;
        }
        out
    }

    /// Cell whose half-open box contains the point, if inside the window.
    pub fn cell_containing(&self, point: &[T]) -> Option<usize> {
        if point.len() != self.dimension {
            return None;
        }
        let mut cell = [0usize; 3];
        for (axis, &x) in point.iter().enumerate() {
            let t = (x - self.origin[axis]) / self.spacing;
            if !(t >= T::zero()) {
                return None;
            }
            let i = t.floor();
            let i = num_traits::cast::<T, usize>(i)?;
            if i >= self.dims[axis] {
                return None;
            }
            cell[axis] = i;
        }
        Some(cell[0] + self.dims[0] * (cell[1] + self.dims[1] * cell[2]))
    }

    /// True when the cell lies on the window's outer face along any axis.
    pub fn is_border(&self, idx: usize) -> bool {
        let c = self.cell_coords(idx);
        for (axis, &coord) in c.iter().take(self.dimension).enumerate() {
            if coord == 0 || coord + 1 == self.dims[axis] {
                return true;
            }
        }
        false
    }

    pub(crate) fn for_each_face_neighbor(&self, idx: usize, mut f: impl FnMut(usize)) {
        let [nx, ny, nz] = self.dims;
        let ix = idx % nx;
        let iy = (idx / nx) % ny;
        if ix > 0 {
            f(idx - 1);
        }
        if ix + 1 < nx {
            f(idx + 1);
        }
        if iy > 0 {
            f(idx - nx);
        }
        if iy + 1 < ny {
            f(idx + nx);
        }
        if self.dimension == 3 {
            let iz = idx / (nx * ny);
            if iz > 0 {
                f(idx - nx * ny);
            }
            if iz + 1 < nz {
                f(idx + nx * ny);
            }
        }
    }

    /// Face-adjacent neighbours of a cell (4 in the plane, 6 in space,
    /// fewer on the border).
    pub fn face_neighbors(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.dimension);
        self.for_each_face_neighbor(idx, |n| out.push(n));
        out
    }
}

/// A set of grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMask<T> {
    grid: GridSpec<T>,
    bits: Vec<bool>,
}

impl<T: Real> CellMask<T> {
    pub fn empty(grid: GridSpec<T>) -> Self {
        let bits = vec![false; grid.len()];
        Self { grid, bits }
    }

    /// Marks every cell whose centre satisfies the predicate.
    pub fn from_fn(grid: GridSpec<T>, mut pred: impl FnMut(&[T]) -> bool) -> Self {
        let dim = grid.dimension();
        let bits = (0..grid.len())
            .map(|idx| {
                let c = grid.cell_center(idx);
                pred(&c[..dim])
            })
            .collect();
        Self { grid, bits }
    }

    pub fn from_bits(grid: GridSpec<T>, bits: Vec<bool>) -> Result<Self, TopologyError> {
        if bits.len() != grid.len() {
            return Err(TopologyError::BitsLength { expected: grid.len(), got: bits.len() });
        }
        Ok(Self { grid, bits })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        self.bits[idx] = value;
    }

    /// Number of cells in the mask.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self { grid: self.grid.clone(), bits: self.bits.iter().map(|b| !b).collect() }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self, TopologyError> {
        if self.grid != other.grid {
            return Err(TopologyError::GridMismatch);
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), bits })
    }

    pub fn union(&self, other: &Self) -> Result<Self, TopologyError> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, TopologyError> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self, TopologyError> {
        self.zip_with(other, |a, b| a && !b)
    }
}

/// One face-connected component of either the mask or its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentInfo {
    /// Sequential id in discovery order (ascending linear index of seeds).
    pub id: u32,
    /// Whether the component consists of mask cells (else complement).
    pub in_mask: bool,
    /// Whether any of its cells lies on the window border; on a finite
    /// window this is the proxy for "unbounded".
    pub touches_border: bool,
    /// Cell count.
    pub cells: usize,
    /// Smallest linear index in the component.
    pub first_cell: usize,
}

/// Complete labelling of a grid into mask and complement components.
#[derive(Debug, Clone)]
pub struct Labeling {
    labels: Vec<u32>,
    components: Vec<ComponentInfo>,
}

impl Labeling {
    /// Component id of a cell.
    pub fn label(&self, idx: usize) -> u32 {
        self.labels[idx]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn components(&self) -> &[ComponentInfo] {
        &self.components
    }

    pub fn component(&self, id: u32) -> &ComponentInfo {
        &self.components[id as usize]
    }

    pub fn mask_components(&self) -> impl Iterator<Item = &ComponentInfo> {
        self.components.iter().filter(|c| c.in_mask)
    }

    pub fn complement_components(&self) -> impl Iterator<Item = &ComponentInfo> {
        self.components.iter().filter(|c| !c.in_mask)
    }

    /// Complement components that stay clear of the window border.
    pub fn bounded_complement_components(&self) -> impl Iterator<Item = &ComponentInfo> {
        self.complement_components().filter(|c| !c.touches_border)
    }
}

/// Labels every cell of the grid with its face-connected component, mask
/// and complement alike. Components are numbered in discovery order of a
/// linear scan, so ids are deterministic.
pub fn label_components<T: Real>(mask: &CellMask<T>) -> Labeling {
    const UNSEEN: u32 = u32::MAX;
    let grid = mask.grid();
    let n = grid.len();
    let mut labels = vec![UNSEEN; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if labels[seed] != UNSEEN {
            continue;
        }
        let id = components.len() as u32;
        let in_mask = mask.get(seed);
        let mut info = ComponentInfo {
            id,
            in_mask,
            touches_border: false,
            cells: 0,
            first_cell: seed,
        };
        labels[seed] = id;
        queue.push_back(seed);
        while let Some(cell) = queue.pop_front() {
            info.cells += 1;
            if grid.is_border(cell) {
                info.touches_border = true;
            }
            grid.for_each_face_neighbor(cell, |nb| {
                if labels[nb] == UNSEEN && mask.get(nb) == in_mask {
                    labels[nb] = id;
                    queue.push_back(nb);
                }
            });
        }
        components.push(info);
    }
    Labeling { labels, components }
}

/// The mask together with every bounded component of its complement: the
/// window analogue of filling the holes of a compact set.
pub fn topological_hull<T: Real>(mask: &CellMask<T>) -> CellMask<T> {
    let labeling = label_components(mask);
    let mut out = mask.clone();
    for (idx, &lab) in labeling.labels().iter().enumerate() {
        let comp = labeling.component(lab);
        if !comp.in_mask && !comp.touches_border {
            out.set(idx, true);
        }
    }
    out
}

/// True when the hull adds nothing: the complement has no bounded
/// component.
pub fn is_full<T: Real>(mask: &CellMask<T>) -> bool {
    label_components(mask).bounded_complement_components().next().is_none()
}

/// True when the mask is non-empty and its hull is strictly larger: the
/// set encloses holes.
pub fn is_hollow<T: Real>(mask: &CellMask<T>) -> bool {
    mask.any() && !is_full(mask)
}

/// True when no mask cell reaches the window border (window proxy for
/// boundedness of the whole set).
pub fn mask_is_bounded<T: Real>(mask: &CellMask<T>) -> bool {
    (0..mask.grid().len()).all(|idx| !mask.get(idx) || !mask.grid().is_border(idx))
}

/// True when the cell lies outside the mask in a bounded complement
/// component — the mask encloses it on the window.
pub fn surrounds_cell<T: Real>(mask: &CellMask<T>, idx: usize) -> bool {
    if mask.get(idx) {
        return false;
    }
    let labeling = label_components(mask);
    !labeling.component(labeling.label(idx)).touches_border
}

/// True when `inner` is non-empty, disjoint from `outer`, and every cell of
/// `inner` lies in a bounded complement component of `outer`.
pub fn surrounds_mask<T: Real>(
    outer: &CellMask<T>,
    inner: &CellMask<T>,
) -> Result<bool, TopologyError> {
    if outer.grid() != inner.grid() {
        return Err(TopologyError::GridMismatch);
    }
    if !inner.any() {
        return Ok(false);
    }
    let labeling = label_components(outer);
    for idx in 0..inner.grid().len() {
        if !inner.get(idx) {
            continue;
        }
        if outer.get(idx) {
            return Ok(false);
        }
        if labeling.component(labeling.label(idx)).touches_border {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mask cells facing the unbounded part of the complement.
#[derive(Debug, Clone)]
pub struct OuterBoundary {
    /// Ascending linear indices of outer-boundary cells.
    pub cells: Vec<usize>,
    /// Whether the mask reaches the window border, i.e. its outer boundary
    /// continues beyond the window.
    pub meets_grid_edge: bool,
}

/// Outer boundary of a mask: cells adjacent to a complement component that
/// touches the window border, plus mask cells on the border itself (beyond
/// which the complement of the window continues).
pub fn outer_boundary<T: Real>(mask: &CellMask<T>) -> OuterBoundary {
    let grid = mask.grid();
    let labeling = label_components(mask);
    let mut cells = Vec::new();
    let mut meets_grid_edge = false;
    for idx in 0..grid.len() {
        if !mask.get(idx) {
            continue;
        }
        let mut on_outer = false;
        if grid.is_border(idx) {
            on_outer = true;
            meets_grid_edge = true;
        } else {
            grid.for_each_face_neighbor(idx, |nb| {
                if !mask.get(nb) && labeling.component(labeling.label(nb)).touches_border {
                    on_outer = true;
                }
            });
        }
        if on_outer {
            cells.push(idx);
        }
    }
    OuterBoundary { cells, meets_grid_edge }
}
