use crate::error::{Error, Result};

/// Classification of one box face: part of the true boundary of the
/// continuum domain, or an artificial cutoff of an unbounded one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    TrueBoundary,
    Truncation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// An axis-aligned box with cell-centered grid, `d` in {1, 2, 3}.
///
/// Internally everything is padded to three axes (trailing axes of length 1)
/// so that index arithmetic is uniform.
#[derive(Clone, Debug)]
pub struct Domain {
    dim: usize,
    lo: [f64; 3],
    hi: [f64; 3],
    n: [usize; 3],
    spacing: [f64; 3],
    faces: [[FaceKind; 2]; 3],
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.lo == other.lo && self.hi == other.hi && self.n == other.n
    }
}

impl Domain {
    pub fn new(
        lo: &[f64],
        hi: &[f64],
        n: &[usize],
        faces: &[[FaceKind; 2]],
    ) -> Result<Self> {
        let dim = lo.len();
        if !(1..=3).contains(&dim) || hi.len() != dim || n.len() != dim || faces.len() != dim {
            return Err(Error::Config(format!("bad domain spec: dim {dim}")));
        }
        let mut d = Domain {
            dim,
            lo: [0.0; 3],
            hi: [1.0; 3],
            n: [1; 3],
            spacing: [1.0; 3],
            faces: [[FaceKind::Truncation; 2]; 3],
        };
        for a in 0..dim {
            if !(hi[a] > lo[a]) || n[a] == 0 {
                return Err(Error::Config(format!(
                    "axis {a}: need hi > lo and at least one cell"
                )));
            }
            d.lo[a] = lo[a];
            d.hi[a] = hi[a];
            d.n[a] = n[a];
            d.spacing[a] = (hi[a] - lo[a]) / n[a] as f64;
            d.faces[a] = faces[a];
        }
        Ok(d)
    }

    /// A bounded box whose whole boundary is true boundary.
    pub fn bounded_box(lo: &[f64], hi: &[f64], n: &[usize]) -> Result<Self> {
        let faces = vec![[FaceKind::TrueBoundary; 2]; lo.len()];
        Self::new(lo, hi, n, &faces)
    }

    /// Truncated half space: the last axis spans `[0, normal_len]` with the
    /// `{x_d = 0}` face marked true boundary; transverse axes span
    /// `[-transverse_half_len, transverse_half_len]`. All other faces are
    /// truncation faces.
    pub fn half_space(
        dim: usize,
        transverse_half_len: f64,
        normal_len: f64,
        n_per_axis: usize,
    ) -> Result<Self> {
        let mut lo = vec![-transverse_half_len; dim];
        let mut hi = vec![transverse_half_len; dim];
        let n = vec![n_per_axis; dim];
        lo[dim - 1] = 0.0;
        hi[dim - 1] = normal_len;
        let mut faces = vec![[FaceKind::Truncation; 2]; dim];
        faces[dim - 1][0] = FaceKind::TrueBoundary;
        Self::new(&lo, &hi, &n, &faces)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing[a]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing[a]).fold(0.0, f64::max)
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.hi[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing[a]).product()
    }

    pub fn face_kind(&self, axis: usize, side: Side) -> FaceKind {
        self.faces[axis][match side {
            Side::Low => 0,
            Side::High => 1,
        }]
    }

    pub(crate) fn shape(&self) -> [usize; 3] {
        self.n
    }

    pub(crate) fn strides(&self) -> [usize; 3] {
        [self.n[1] * self.n[2], self.n[2], 1]
    }

    pub fn linear_index(&self, idx: &[usize; 3]) -> usize {
        (idx[0] * self.n[1] + idx[1]) * self.n[2] + idx[2]
    }

    pub fn multi_index(&self, mut lin: usize) -> [usize; 3] {
        let i2 = lin % self.n[2];
        lin /= self.n[2];
        let i1 = lin % self.n[1];
        let i0 = lin / self.n[1];
        [i0, i1, i2]
    }

    /// Coordinates of a cell center.
    pub fn cell_center(&self, lin: usize) -> [f64; 3] {
        let idx = self.multi_index(lin);
        let mut x = [0.0; 3];
        for a in 0..3 {
            x[a] = self.lo[a] + (idx[a] as f64 + 0.5) * self.spacing[a];
        }
        x
    }

    /// True if the cell is at least `margin` cells away from every face.
    pub fn is_interior(&self, lin: usize, margin: usize) -> bool {
        let idx = self.multi_index(lin);
        (0..self.dim).all(|a| idx[a] >= margin && idx[a] + margin < self.n[a])
    }

    /// Area element of a face orthogonal to `axis`.
    pub fn face_area_element(&self, axis: usize) -> f64 {
        (0..self.dim)
            .filter(|&a| a != axis)
            .map(|a| self.spacing[a])
            .product()
    }

    /// Calls `f(i0, i1, i2)` for every line of cells running inward from the
    /// given face, with `i0` the linear index of the face-adjacent cell and
    /// `i1`, `i2` the next two layers.
    pub fn for_face_lines(&self, axis: usize, side: Side, mut f: impl FnMut(usize, usize, usize)) {
        let stride = self.strides()[axis] as isize;
        let n = self.n[axis];
        assert!(n >= 3, "face extrapolation needs at least 3 cells per axis");
        let (first, step) = match side {
            Side::Low => (0isize, stride),
            Side::High => ((n as isize - 1) * stride, -stride),
        };
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        let (a, b) = (others[0], others[1]);
        let (sa, sb) = (self.strides()[a] as isize, self.strides()[b] as isize);
        for ia in 0..self.n[a] as isize {
            for ib in 0..self.n[b] as isize {
                let base = first + ia * sa + ib * sb;
                f(base as usize, (base + step) as usize, (base + 2 * step) as usize);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_space_marks_only_the_bottom_face() {
        let d = Domain::half_space(2, 4.0, 4.0, 8).unwrap();
        assert_eq!(d.face_kind(1, Side::Low), FaceKind::TrueBoundary);
        assert_eq!(d.face_kind(1, Side::High), FaceKind::Truncation);
        assert_eq!(d.face_kind(0, Side::Low), FaceKind::Truncation);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.num_cells(), 64);
    }

    #[test]
    fn index_round_trip() {
        let d = Domain::bounded_box(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], &[4, 5, 6]).unwrap();
        for lin in 0..d.num_cells() {
            assert_eq!(d.linear_index(&d.multi_index(lin)), lin);
        }
    }

    #[test]
    fn face_lines_cover_the_face() {
        let d = Domain::bounded_box(&[0.0, 0.0], &[1.0, 1.0], &[4, 5]).unwrap();
        let mut count = 0;
        d.for_face_lines(1, Side::Low, |i0, i1, i2| {
            count += 1;
            let m0 = d.multi_index(i0);
            assert_eq!(m0[1], 0);
            assert_eq!(d.multi_index(i1)[1], 1);
            assert_eq!(d.multi_index(i2)[1], 2);
        });
        assert_eq!(count, 4);
        let mut count = 0;
        d.for_face_lines(0, Side::High, |i0, _, _| {
            count += 1;
            assert_eq!(d.multi_index(i0)[0], 3);
        });
        assert_eq!(count, 5);
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(Domain::bounded_box(&[0.0], &[0.0], &[4]).is_err());
        assert!(Domain::bounded_box(&[0.0], &[1.0], &[0]).is_err());
    }
}
