//! Sparse and banded matrices, banded LU with partial pivoting, and a power
//! iteration for the spectral radius.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols2 = merged.iter().map(|t| t.1).collect();
        let vals2 = merged.iter().map(|t| t.2).collect();
        Self {
            n_rows,
            n_cols,
            row_ptr,
            cols: cols2,
            vals: vals2,
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_triplets(n_rows, n_cols, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(out.len(), self.n_rows);
        for (o, w) in out.iter_mut().zip(self.row_ptr.windows(2)) {
            let (cols, vals) = (&self.cols[w[0]..w[1]], &self.vals[w[0]..w[1]]);
            *o = vals.iter().zip(cols).map(|(v, &c)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `self + other`.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let t: Vec<_> = self.triplets().chain(other.triplets()).collect();
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, t)
    }

    /// `alpha * I + beta * self` (square only).
    pub fn shifted(&self, alpha: f64, beta: f64) -> CsrMatrix {
        assert_eq!(self.n_rows, self.n_cols);
        let t: Vec<_> = self
            .triplets()
            .map(|(r, c, v)| (r, c, beta * v))
            .chain((0..self.n_rows).map(|i| (i, i, alpha)))
            .collect();
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, t)
    }

    /// Coordinate text dump: one `row col value` line per stored entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (r, c, v) in self.triplets() {
            out.push_str(&format!("{r} {c} {v:.17e}\n"));
        }
        out
    }
}

/// Sparse matrix with the same number of stored entries in every row
/// (short rows are padded with zeros), for fast products.
#[derive(Debug, Clone, PartialEq)]
pub struct EllMatrix {
    n_rows: usize,
    n_cols: usize,
    width: usize,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl EllMatrix {
    pub fn from_csr(m: &CsrMatrix) -> Self {
        let width = m.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        let mut cols = vec![0u32; m.n_rows * width];
        let mut vals = vec![0.0; m.n_rows * width];
        for r in 0..m.n_rows {
            for (q, (c, v)) in m.row(r).enumerate() {
                cols[r * width + q] = c as u32;
                vals[r * width + q] = v;
            }
        }
        Self {
            n_rows: m.n_rows,
            n_cols: m.n_cols,
            width,
            cols,
            vals,
        }
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(out.len(), self.n_rows);
        if self.width == 0 {
            out.fill(0.0);
            return;
        }
        for ((o, cols), vals) in out
            .iter_mut()
            .zip(self.cols.chunks_exact(self.width))
            .zip(self.vals.chunks_exact(self.width))
        {
            *o = vals.iter().zip(cols).map(|(v, &c)| v * x[c as usize]).sum();
        }
    }
}

/// Square matrix with `lower` sub- and `upper` super-diagonals.
///
/// Row `r` stores columns `r - lower ..= r + upper + lower`; the extra `lower`
/// slots hold fill-in produced by row interchanges during factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (2 * lower + upper + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    fn stride(&self) -> usize {
        2 * self.lower + self.upper + 1
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        r * self.stride() + (c + self.lower - r)
    }

    pub fn in_band(&self, r: usize, c: usize) -> bool {
        r < self.n && c < self.n && c + self.lower >= r && c <= r + self.upper
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if self.in_band(r, c) {
            self.data[self.slot(r, c)]
        } else {
            0.0
        }
    }

    /// Panics if `(r, c)` lies outside the band.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(self.in_band(r, c), "({r}, {c}) outside band ({}, {})", self.lower, self.upper);
        let k = self.slot(r, c);
        self.data[k] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        assert!(self.in_band(r, c), "({r}, {c}) outside band ({}, {})", self.lower, self.upper);
        let k = self.slot(r, c);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.lower);
                let hi = (r + self.upper).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// LU factors of a [`BandedMatrix`] with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedFactorization {
    n: usize,
    lower: usize,
    upper: usize,
    /// Row `r` of the upper factor right of the diagonal, columns
    /// `r + 1 ..= r + lower + upper`.
    urow: Vec<f64>,
    inv_diag: Vec<f64>,
    /// Multipliers of step `k` for rows `k+1 ..= k+lower`.
    mult: Vec<f64>,
    pivots: Vec<usize>,
}

const PIVOT_RTOL: f64 = 1e-14;

pub fn banded_factor(m: &BandedMatrix) -> Result<BandedFactorization> {
    let n = m.n;
    let (l, u) = (m.lower, m.upper);
    let stride = m.stride();
    let mut a = m.data.clone();
    let mut mult = vec![0.0; n * l];
    let mut pivots = vec![0usize; n];
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let at = |r: usize, c: usize| r * stride + (c + l - r);

    for k in 0..n {
        let last_row = (k + l).min(n - 1);
        let mut p = k;
        let mut best = a[at(k, k)].abs();
        for r in k + 1..=last_row {
            let v = a[at(r, k)].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best <= PIVOT_RTOL * scale {
            return Err(Error::SingularMatrix(k));
        }
        pivots[k] = p;
        let last_col = (k + l + u).min(n - 1);
        if p != k {
            for c in k..=last_col {
                a.swap(at(k, c), at(p, c));
            }
        }
        let piv = a[at(k, k)];
        for r in k + 1..=last_row {
            let f = a[at(r, k)] / piv;
            mult[k * l + (r - k - 1)] = f;
            a[at(r, k)] = 0.0;
            if f != 0.0 {
                for c in k + 1..=last_col {
                    a[at(r, c)] -= f * a[at(k, c)];
                }
            }
        }
    }
    let w = l + u;
    let mut urow = vec![0.0; n * w];
    let mut inv_diag = vec![0.0; n];
    for r in 0..n {
        inv_diag[r] = 1.0 / a[at(r, r)];
        for c in r + 1..=(r + w).min(n - 1) {
            urow[r * w + (c - r - 1)] = a[at(r, c)];
        }
    }
    Ok(BandedFactorization {
        n,
        lower: l,
        upper: u,
        urow,
        inv_diag,
        mult,
        pivots,
    })
}

impl BandedFactorization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    /// Solves in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let l = self.lower;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                let cnt = l.min(n - 1 - k);
                let mult = &self.mult[k * l..k * l + cnt];
                for (bi, m) in b[k + 1..k + 1 + cnt].iter_mut().zip(mult) {
                    *bi -= m * bk;
                }
            }
        }
        let w = l + self.upper;
        for r in (0..n).rev() {
            let cnt = w.min(n - 1 - r);
            let row = &self.urow[r * w..r * w + cnt];
            let dot: f64 = row.iter().zip(&b[r + 1..r + 1 + cnt]).map(|(a, x)| a * x).sum();
            b[r] = (b[r] - dot) * self.inv_diag[r];
        }
        Ok(())
    }
}

/// Factorizations of equally shaped banded systems, interleaved so that all
/// of them are solved together on data laid out as `b[q * count + line]`.
#[derive(Debug, Clone)]
pub struct InterleavedFactorization {
    n: usize,
    count: usize,
    lower: usize,
    width: usize,
    urow: Vec<f64>,
    inv_diag: Vec<f64>,
    mult: Vec<f64>,
    pivots: Vec<usize>,
}

impl InterleavedFactorization {
    pub fn new(lines: &[BandedFactorization]) -> Result<Self> {
        let first = lines
            .first()
            .ok_or_else(|| Error::Config("no systems to interleave".into()))?;
        let (n, l, u) = (first.n, first.lower, first.upper);
        if let Some(f) = lines.iter().find(|f| (f.n, f.lower, f.upper) != (n, l, u)) {
            return Err(Error::Dimension {
                expected: n,
                got: f.n,
            });
        }
        let count = lines.len();
        let w = l + u;
        let gather = |len: usize, get: &dyn Fn(&BandedFactorization, usize) -> f64| {
            let mut out = vec![0.0; len * count];
            for (line, f) in lines.iter().enumerate() {
                for k in 0..len {
                    out[k * count + line] = get(f, k);
                }
            }
            out
        };
        let mut pivots = vec![0usize; n * count];
        for (line, f) in lines.iter().enumerate() {
            for k in 0..n {
                pivots[k * count + line] = f.pivots[k];
            }
        }
        Ok(Self {
            n,
            count,
            lower: l,
            width: w,
            urow: gather(n * w, &|f, k| f.urow[k]),
            inv_diag: gather(n, &|f, k| f.inv_diag[k]),
            mult: gather(n * l, &|f, k| f.mult[k]),
            pivots,
        })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let (n, c, l, w) = (self.n, self.count, self.lower, self.width);
        if b.len() != n * c {
            return Err(Error::Dimension {
                expected: n * c,
                got: b.len(),
            });
        }
        for k in 0..n {
            for line in 0..c {
                let p = self.pivots[k * c + line];
                if p != k {
                    b.swap(k * c + line, p * c + line);
                }
            }
            let (head, tail) = b.split_at_mut((k + 1) * c);
            let bk = &head[k * c..];
            for r in 0..l.min(n - 1 - k) {
                let m = &self.mult[(k * l + r) * c..(k * l + r + 1) * c];
                let br = &mut tail[r * c..(r + 1) * c];
                for ((x, &mi), &y) in br.iter_mut().zip(m).zip(bk) {
                    *x -= mi * y;
                }
            }
        }
        for r in (0..n).rev() {
            let (head, tail) = b.split_at_mut((r + 1) * c);
            let br = &mut head[r * c..];
            for q in 0..w.min(n - 1 - r) {
                let coef = &self.urow[(r * w + q) * c..(r * w + q + 1) * c];
                let bq = &tail[q * c..(q + 1) * c];
                for ((x, &a), &y) in br.iter_mut().zip(coef).zip(bq) {
                    *x -= a * y;
                }
            }
            for (x, &d) in br.iter_mut().zip(&self.inv_diag[r * c..(r + 1) * c]) {
                *x *= d;
            }
        }
        Ok(())
    }
}

pub fn banded_solve(f: &BandedFactorization, b: &[f64]) -> Result<Vec<f64>> {
    let mut x = b.to_vec();
    f.solve_in_place(&mut x)?;
    Ok(x)
}

/// Outcome of [`spectral_radius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const SPECTRAL_TOL: f64 = 1e-3;
pub const SPECTRAL_MAX_ITERS: usize = 5000;

/// Power iteration for the dominant eigenvalue magnitude of a linear operator
/// on vectors of length `dim`.
///
/// Starts from a fixed vector (ones plus a small index-dependent perturbation)
/// so results are reproducible. Stops when two successive estimates agree to
/// `tol` relatively; otherwise returns the last estimate unconverged.
pub fn spectral_radius(
    dim: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    max_iters: usize,
) -> SpectralEstimate {
    if dim == 0 {
        return SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut x: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 1e-3 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n0 = norm(&x);
    x.iter_mut().for_each(|a| *a /= n0);
    let mut y = vec![0.0; dim];
    let mut prev = f64::NAN;
    for it in 1..=max_iters {
        apply(&x, &mut y);
        let ny = norm(&y);
        if ny == 0.0 {
            return SpectralEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        if (ny - prev).abs() <= tol * ny {
            return SpectralEstimate {
                value: ny,
                iterations: it,
                converged: true,
            };
        }
        prev = ny;
        for (a, b) in x.iter_mut().zip(&y) {
            *a = b / ny;
        }
    }
    SpectralEstimate {
        value: prev,
        iterations: max_iters,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_product_matches_csr() {
        let m = CsrMatrix::from_triplets(4, 3, vec![(0, 1, 2.0), (2, 0, -1.0), (2, 2, 0.5), (3, 2, 4.0), (2, 1, 3.0)]);
        let x = [1.0, -2.0, 0.25];
        let mut out = [9.0; 4];
        EllMatrix::from_csr(&m).mul_vec_into(&x, &mut out);
        assert_eq!(out.to_vec(), m.mul_vec(&x));
        let mut out = [9.0; 2];
        EllMatrix::from_csr(&CsrMatrix::zeros(2, 2)).mul_vec_into(&[1.0, 1.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn interleaved_matches_individual() {
        let make = |shift: f64| {
            let mut m = BandedMatrix::zeros(6, 2, 1);
            for r in 0..6usize {
                for c in r.saturating_sub(2)..=(r + 1).min(5) {
                    let v = if r == c { 0.3 + shift } else { 1.0 + 0.1 * (r + 2 * c) as f64 - shift };
                    m.set(r, c, v);
                }
            }
            banded_factor(&m).unwrap()
        };
        let lines: Vec<_> = [0.0, 0.5, 2.0].iter().map(|&s| make(s)).collect();
        let inter = InterleavedFactorization::new(&lines).unwrap();
        let b: Vec<f64> = (0..18).map(|k| (k as f64 * 0.7).sin()).collect();
        let mut x = b.clone();
        inter.solve_in_place(&mut x).unwrap();
        for (line, f) in lines.iter().enumerate() {
            let own: Vec<f64> = (0..6).map(|q| b[q * 3 + line]).collect();
            let want = banded_solve(f, &own).unwrap();
            for q in 0..6 {
                assert!((x[q * 3 + line] - want[q]).abs() < 1e-13 * (1.0 + want[q].abs()));
            }
        }
        assert!(inter.solve_in_place(&mut [0.0; 17]).is_err());
    }

    #[test]
    fn identity_solve() {
        for n in [1, 2, 7] {
            let mut m = BandedMatrix::zeros(n, 1, 2);
            for i in 0..n {
                m.set(i, i, 1.0);
            }
            let f = banded_factor(&m).unwrap();
            let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
            assert_eq!(banded_solve(&f, &b).unwrap(), b);
        }
    }

    #[test]
    fn two_by_two() {
        let mut m = BandedMatrix::zeros(2, 1, 1);
        m.set(0, 0, 2.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 2.0);
        let x = banded_solve(&banded_factor(&m).unwrap(), &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pivoting_needed() {
        // Zero leading pivot forces an interchange.
        let mut m = BandedMatrix::zeros(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 1.0);
        m.set(2, 2, 3.0);
        let x_true = [1.0, -2.0, 0.5];
        let b = m.mul_vec(&x_true);
        let x = banded_solve(&banded_factor(&m).unwrap(), &b).unwrap();
        for (a, e) in x.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-14, "{x:?}");
        }
    }

    #[test]
    fn singular_detected() {
        let m = BandedMatrix::zeros(4, 1, 1);
        assert_eq!(banded_factor(&m).unwrap_err(), Error::SingularMatrix(0));
    }

    #[test]
    fn dimension_checked() {
        let mut m = BandedMatrix::zeros(2, 0, 0);
        m.set(0, 0, 1.0);
        m.set(1, 1, 1.0);
        let f = banded_factor(&m).unwrap();
        assert!(matches!(banded_solve(&f, &[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    #[should_panic]
    fn set_outside_band_panics() {
        BandedMatrix::zeros(5, 1, 1).set(0, 3, 1.0);
    }

    #[test]
    fn csr_basics() {
        let m = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (2, 1, 4.0), (0, 0, 1.0), (1, 2, 0.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![2.0, 0.0, 8.0]);
        let s = m.shifted(1.0, -2.0);
        assert_eq!(s.mul_vec(&[1.0, 1.0, 1.0]), vec![-3.0, 1.0, -7.0]);
        assert_eq!(m.to_coordinate_text().lines().count(), 2);
    }

    #[test]
    fn power_iteration_small() {
        let id = spectral_radius(5, |x, y| y.copy_from_slice(x), SPECTRAL_TOL, SPECTRAL_MAX_ITERS);
        assert!((id.value - 1.0).abs() < 1e-12 && id.converged);
        let d = [1.0, 2.0, 3.0];
        let est = spectral_radius(
            3,
            |x, y| {
                for i in 0..3 {
                    y[i] = d[i] * x[i];
                }
            },
            1e-10,
            SPECTRAL_MAX_ITERS,
        );
        assert!((est.value - 3.0).abs() < 1e-8, "{est:?}");
        assert!(est.converged);
    }
}
