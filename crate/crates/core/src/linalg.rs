//! Small dense symmetric solves for k×k systems.

/// Pivot threshold relative to the largest diagonal entry below which a
/// matrix is treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-10;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    dim: usize,
    data: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(dim: usize) -> Self {
        DenseSym {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set entry (i, j) and its mirror.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
    min_pivot: f64,
}

impl Cholesky {
    /// Factor `a`. Returns `None` when some pivot is at or below
    /// [`SINGULAR_PIVOT_RATIO`] times the largest diagonal entry.
    pub fn factor(a: &DenseSym) -> Option<Self> {
        let dim = a.dim();
        let threshold = SINGULAR_PIVOT_RATIO * a.max_diagonal();
        let mut l = vec![0.0; dim * dim];
        let mut min_pivot = f64::INFINITY;
        for j in 0..dim {
            let mut d = a.get(j, j);
            for t in 0..j {
                d -= l[j * dim + t] * l[j * dim + t];
            }
            if !(d > threshold) || !d.is_finite() {
                return None;
            }
            min_pivot = min_pivot.min(d);
            let root = d.sqrt();
            l[j * dim + j] = root;
            for i in (j + 1)..dim {
                let mut s = a.get(i, j);
                for t in 0..j {
                    s -= l[i * dim + t] * l[j * dim + t];
                }
                l[i * dim + j] = s / root;
            }
        }
        Some(Cholesky {
            dim,
            lower: l,
            min_pivot,
        })
    }

    /// Smallest pivot encountered (before the square root).
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for t in 0..i {
                s -= l[i * n + t] * y[t];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for t in (i + 1)..n {
                s -= l[t * n + i] * y[t];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }
}
