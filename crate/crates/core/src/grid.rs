//! Sinh-stretched meshes in `s` and `v` and the tensor grid of unknowns.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Strictly increasing one-dimensional mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Range("a mesh needs at least two nodes".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Range("mesh nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if m == 0 || !(b > a) {
            return Err(Error::Range(format!("invalid uniform mesh [{a}, {b}] with {m} cells")));
        }
        let h = (b - a) / m as f64;
        let mut nodes: Vec<f64> = (0..=m).map(|i| a + i as f64 * h).collect();
        nodes[m] = b;
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the last node (`m` for nodes `x_0..x_m`).
    pub fn m(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Width `x_i - x_{i-1}` for `1 <= i <= m`.
    pub fn width(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,node\n");
        for (i, x) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "{i},{x}");
        }
        out
    }
}

/// `s_i = K + c sinh(xi_i)` with `xi` equidistant between `asinh((left-K)/c)`
/// and `asinh((S-K)/c)`. Endpoints are set to `left` and `S` exactly.
pub fn build_s_mesh(m1: usize, strike: f64, c: f64, s_max: f64, left: f64) -> Result<Mesh1D> {
    if m1 == 0 {
        return Err(Error::Range("m1 must be >= 1".into()));
    }
    if !(c > 0.0 && 0.0 <= left && left < strike && strike < s_max && s_max.is_finite()) {
        return Err(Error::Range(format!(
            "s-mesh needs 0 <= left < K < S and c > 0 (left={left}, K={strike}, S={s_max}, c={c})"
        )));
    }
    let xi_lo = ((left - strike) / c).asinh();
    let xi_hi = ((s_max - strike) / c).asinh();
    let dxi = (xi_hi - xi_lo) / m1 as f64;
    let mut nodes: Vec<f64> = (0..=m1)
        .map(|i| strike + c * (xi_lo + i as f64 * dxi).sinh())
        .collect();
    nodes[0] = left;
    nodes[m1] = s_max;
    Mesh1D::from_nodes(nodes)
}

/// `v_j = d sinh(j * asinh(V/d) / m2)` with endpoints pinned to `0` and `V`.
pub fn build_v_mesh(m2: usize, v_max: f64, d: f64) -> Result<Mesh1D> {
    if m2 == 0 {
        return Err(Error::Range("m2 must be >= 1".into()));
    }
    if !(v_max > 0.0 && d > 0.0 && v_max.is_finite()) {
        return Err(Error::Range(format!("v-mesh needs V > 0 and d > 0 (V={v_max}, d={d})")));
    }
    let deta = (v_max / d).asinh() / m2 as f64;
    let mut nodes: Vec<f64> = (0..=m2).map(|j| d * (j as f64 * deta).sinh()).collect();
    nodes[0] = 0.0;
    nodes[m2] = v_max;
    Mesh1D::from_nodes(nodes)
}

/// Observed smoothness constants of a mesh built from `m` equal steps of a
/// reference coordinate: the largest ratio of neighbouring widths and
/// `max |dx_{i+1} - dx_i| / h^2` with `h = 1/m`.
///
/// The second value is scale-free in `m`, so for a smooth stretching it stays
/// bounded under refinement.
pub fn smoothness_report(mesh: &Mesh1D) -> Result<(f64, f64)> {
    if mesh.nodes.len() < 3 {
        return Err(Error::Range("smoothness needs at least three nodes".into()));
    }
    let widths = mesh.widths();
    let h = 1.0 / mesh.m() as f64;
    let mut ratio: f64 = 0.0;
    let mut second: f64 = 0.0;
    for w in widths.windows(2) {
        ratio = ratio.max(w[1] / w[0]).max(w[0] / w[1]);
        second = second.max((w[1] - w[0]).abs() / (h * h));
    }
    Ok((ratio, second))
}

/// Tensor grid of unknowns `(s_i, v_j)`, `1 <= i <= m1`, `0 <= j < m2`.
///
/// Unknowns are ordered with `s` fastest: `k(i, j) = (i - 1) + j * m1`.
/// Nodes with `i = 0` and `j = m2` carry Dirichlet data and are not unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    s: Mesh1D,
    v: Mesh1D,
}

impl TensorGrid {
    pub fn new(s: Mesh1D, v: Mesh1D) -> Self {
        Self { s, v }
    }

    pub fn s_mesh(&self) -> &Mesh1D {
        &self.s
    }

    pub fn v_mesh(&self) -> &Mesh1D {
        &self.v
    }

    pub fn m1(&self) -> usize {
        self.s.m()
    }

    pub fn m2(&self) -> usize {
        self.v.m()
    }

    /// Number of unknowns, `m1 * m2`.
    pub fn len(&self) -> usize {
        self.m1() * self.m2()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.m1() && j < self.m2());
        (i - 1) + j * self.m1()
    }

    /// Inverse of [`TensorGrid::index`].
    pub fn node(&self, k: usize) -> (usize, usize) {
        let m1 = self.m1();
        (k % m1 + 1, k / m1)
    }

    /// Samples `f(s, v)` at every unknown.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        let s = self.s.nodes();
        let v = self.v.nodes();
        let mut out = Vec::with_capacity(self.len());
        for &vj in &v[..self.m2()] {
            for &si in &s[1..] {
                out.push(f(si, vj));
            }
        }
        out
    }
}
