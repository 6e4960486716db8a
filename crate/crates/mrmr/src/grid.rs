//! Voxel-grid index math and a compact voxel bitset.

use crate::geom::Point3;

/// Dimensions of a voxel grid plus the world-to-index mapping.
///
/// Voxel `(ix, iy, iz)` covers the axis-aligned cube
/// `[ix*cell, (ix+1)*cell) x ... x [iz*cell, (iz+1)*cell)` with its center at
/// `((ix+0.5)*cell, (iy+0.5)*cell, (iz+0.5)*cell)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub cell: f64,
}

impl GridDims {
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.ny + iy) * self.nx + ix
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let ix = idx % self.nx;
        let iy = (idx / self.nx) % self.ny;
        let iz = idx / (self.nx * self.ny);
        (ix, iy, iz)
    }

    #[inline]
    pub fn center(&self, ix: usize, iy: usize, iz: usize) -> Point3 {
        Point3::new(
            (ix as f64 + 0.5) * self.cell,
            (iy as f64 + 0.5) * self.cell,
            (iz as f64 + 0.5) * self.cell,
        )
    }

    /// Voxel containing a world point, or `None` outside the grid.
    #[inline]
    pub fn locate(&self, p: Point3) -> Option<(usize, usize, usize)> {
        if p.x < 0.0 || p.y < 0.0 || p.z < 0.0 {
            return None;
        }
        let ix = (p.x / self.cell) as usize;
        let iy = (p.y / self.cell) as usize;
        let iz = (p.z / self.cell) as usize;
        if ix < self.nx && iy < self.ny && iz < self.nz {
            Some((ix, iy, iz))
        } else {
            None
        }
    }

    /// Column (x, y) index for the 2D footprint.
    #[inline]
    pub fn col(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }
}

/// Dense bitset over the voxels of one grid.
#[derive(Debug, Clone)]
pub struct VoxelSet {
    words: Vec<u64>,
    count: usize,
}

impl VoxelSet {
    pub fn new(len: usize) -> Self {
        VoxelSet {
            words: vec![0u64; len.div_ceil(64)],
            count: 0,
        }
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.words[idx / 64] & (1u64 << (idx % 64)) != 0
    }

    /// Inserts, returning true when the voxel was new.
    #[inline]
    pub fn insert(&mut self, idx: usize) -> bool {
        let w = &mut self.words[idx / 64];
        let bit = 1u64 << (idx % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.count += 1;
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn union_with(&mut self, other: &VoxelSet) {
        debug_assert_eq!(self.words.len(), other.words.len());
        let mut count = 0usize;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
            count += a.count_ones() as usize;
        }
        self.count = count;
    }

    /// Iterate set voxel indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idx_roundtrip() {
        let d = GridDims {
            nx: 7,
            ny: 5,
            nz: 3,
            cell: 0.2,
        };
        for iz in 0..3 {
            for iy in 0..5 {
                for ix in 0..7 {
                    assert_eq!(d.coords(d.idx(ix, iy, iz)), (ix, iy, iz));
                }
            }
        }
    }

    #[test]
    fn locate_matches_center() {
        let d = GridDims {
            nx: 10,
            ny: 10,
            nz: 10,
            cell: 0.2,
        };
        assert_eq!(d.locate(d.center(3, 4, 5)), Some((3, 4, 5)));
        assert_eq!(d.locate(Point3::new(-0.1, 0.0, 0.0)), None);
        assert_eq!(d.locate(Point3::new(2.1, 0.1, 0.1)), None);
    }

    #[test]
    fn voxelset_insert_iter() {
        let mut s = VoxelSet::new(300);
        assert!(s.insert(0));
        assert!(s.insert(65));
        assert!(s.insert(299));
        assert!(!s.insert(65));
        assert_eq!(s.len(), 3);
        let v: Vec<usize> = s.iter().collect();
        assert_eq!(v, vec![0, 65, 299]);
    }

    #[test]
    fn voxelset_union_counts() {
        let mut a = VoxelSet::new(100);
        let mut b = VoxelSet::new(100);
        a.insert(1);
        a.insert(50);
        b.insert(50);
        b.insert(99);
        a.union_with(&b);
        assert_eq!(a.len(), 3);
        assert!(a.contains(99));
    }
}
