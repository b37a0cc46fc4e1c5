//! Square banded matrices and in-place LU elimination without pivoting.
//!
//! Elimination without row exchanges is stable for the (weakly diagonally
//! dominant, irreducible) M-matrices produced by the Robin assembly, which
//! is the only consumer here.

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    // row-major band storage: entry (i, j) at i * width + (j + lower - i)
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.lower < i || j > i + self.upper || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * self.width() + (j + self.lower - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`. Panics if the entry is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[s] += v;
    }

    /// Column range of the nonzero band in row `i`.
    pub fn row_span(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.n)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row_span(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Row sums of `|A| |x|`, used as the rounding floor of residual checks.
    pub fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row_span(i).map(|j| (self.get(i, j) * x[j]).abs()).sum())
            .collect()
    }

    /// LU factorization in place (Doolittle, no pivoting). Returns `None`
    /// if a zero pivot is met.
    pub fn factor(mut self) -> Option<BandedLu> {
        let w = self.width();
        for k in 0..self.n {
            let pivot = self.data[k * w + self.lower];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            let row_end = (k + self.lower + 1).min(self.n);
            let col_end = (k + self.upper + 1).min(self.n);
            for i in k + 1..row_end {
                let sik = i * w + (k + self.lower - i);
                let l = self.data[sik] / pivot;
                self.data[sik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..col_end {
                    let skj = k * w + (j + self.lower - k);
                    let sij = i * w + (j + self.lower - i);
                    self.data[sij] -= l * self.data[skj];
                }
            }
        }
        Some(BandedLu { lu: self })
    }
}

/// Packed LU factors of a [`BandedMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandedLu {
    lu: BandedMatrix,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = &self.lu;
        let w = m.width();
        let mut x = rhs.to_vec();
        for i in 0..m.n {
            let start = i.saturating_sub(m.lower);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(start) {
                s -= m.data[i * w + (j + m.lower - i)] * xj;
            }
            x[i] = s;
        }
        for i in (0..m.n).rev() {
            let end = (i + m.upper + 1).min(m.n);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(end).skip(i + 1) {
                s -= m.data[i * w + (j + m.lower - i)] * xj;
            }
            x[i] = s / m.data[i * w + m.lower];
        }
        x
    }
}
