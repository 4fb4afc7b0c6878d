//! Finite-difference stencils on non-uniform meshes and assembly of the
//! semi-discrete Heston system `U' = (A0 + A1 + A2) U + b0(t) + b1(t) + b2(t)`.
//!
//! `A0` holds the mixed derivative, `A1` every `s`-derivative and `A2` every
//! `v`-derivative; the reaction term `-r_d u` is split evenly between `A1` and
//! `A2`. Dirichlet neighbours are eliminated into the forcing of the matrix
//! that owns the stencil.

use crate::error::{Error, Result};
use crate::grid::{Mesh1D, TensorGrid};
use crate::linalg::{BandedMatrix, CsrMatrix, EllMatrix};
use crate::model::{self, boundary_values, DomainSpec, HestonParams, OptionSpec};

/// Bias of a three-point first-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D1Kind {
    /// Nodes `i-2, i-1, i`.
    Left,
    /// Nodes `i-1, i, i+1`.
    Central,
    /// Nodes `i, i+1, i+2`.
    Right,
}

/// Three-point stencil: `f'(x_i)` or `f''(x_i) ~ sum_k weights[k] f(x_{i + offsets[k]})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilWeights {
    pub offsets: [isize; 3],
    pub weights: [f64; 3],
}

impl StencilWeights {
    pub fn apply(&self, nodes_values: impl Fn(isize) -> f64) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(&o, &w)| w * nodes_values(o))
            .sum()
    }
}

fn index_err(mesh: &Mesh1D, i: usize) -> Error {
    Error::Index {
        index: i,
        nodes: mesh.nodes().len(),
    }
}

pub fn d1_weights(mesh: &Mesh1D, i: usize, kind: D1Kind) -> Result<StencilWeights> {
    let m = mesh.m();
    match kind {
        D1Kind::Left => {
            if i < 2 || i > m {
                return Err(index_err(mesh, i));
            }
            let (a, b) = (mesh.width(i - 1), mesh.width(i));
            Ok(StencilWeights {
                offsets: [-2, -1, 0],
                weights: [b / (a * (a + b)), -(a + b) / (a * b), (a + 2.0 * b) / (b * (a + b))],
            })
        }
        D1Kind::Central => {
            if i < 1 || i + 1 > m {
                return Err(index_err(mesh, i));
            }
            let (a, b) = (mesh.width(i), mesh.width(i + 1));
            Ok(StencilWeights {
                offsets: [-1, 0, 1],
                weights: [-b / (a * (a + b)), (b - a) / (a * b), a / (b * (a + b))],
            })
        }
        D1Kind::Right => {
            if i + 2 > m {
                return Err(index_err(mesh, i));
            }
            let (a, b) = (mesh.width(i + 1), mesh.width(i + 2));
            Ok(StencilWeights {
                offsets: [0, 1, 2],
                weights: [(-2.0 * a - b) / (a * (a + b)), (a + b) / (a * b), -a / (b * (a + b))],
            })
        }
    }
}

pub fn d2_weights(mesh: &Mesh1D, i: usize) -> Result<StencilWeights> {
    if i < 1 || i + 1 > mesh.m() {
        return Err(index_err(mesh, i));
    }
    let (a, b) = (mesh.width(i), mesh.width(i + 1));
    Ok(StencilWeights {
        offsets: [-1, 0, 1],
        weights: [2.0 / (a * (a + b)), -2.0 / (a * b), 2.0 / (b * (a + b))],
    })
}

/// Nine-point mixed-derivative weights, `w[k + 1][l + 1]` multiplying
/// `f(x_{i+k}, y_{j+l})`: the tensor product of the two central first-derivative
/// stencils.
pub fn mixed_weights(x_mesh: &Mesh1D, y_mesh: &Mesh1D, i: usize, j: usize) -> Result<[[f64; 3]; 3]> {
    let bx = d1_weights(x_mesh, i, D1Kind::Central)?;
    let by = d1_weights(y_mesh, j, D1Kind::Central)?;
    let mut w = [[0.0; 3]; 3];
    for (k, row) in w.iter_mut().enumerate() {
        for (l, cell) in row.iter_mut().enumerate() {
            *cell = bx.weights[k] * by.weights[l];
        }
    }
    Ok(w)
}

/// Which part of the split operator to act with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    /// `A = A0 + A1 + A2`.
    Full,
    /// `A0`, the mixed derivative.
    Mixed,
    /// `A1`, derivatives along `s`.
    AlongS,
    /// `A2`, derivatives along `v`.
    AlongV,
}

impl Part {
    pub const SPLIT: [Part; 3] = [Part::Mixed, Part::AlongS, Part::AlongV];

    fn slot(self) -> Option<usize> {
        match self {
            Part::Full => None,
            Part::Mixed => Some(0),
            Part::AlongS => Some(1),
            Part::AlongV => Some(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BoundarySource {
    /// Dirichlet node on the lower `s` edge at variance `v`.
    Left(f64),
    /// Dirichlet node on the `v = V` edge at asset price `s`.
    Top(f64),
    /// Neumann datum at `s = S`.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BoundaryTerm {
    row: usize,
    coef: f64,
    source: BoundarySource,
}

/// The assembled split semi-discrete system.
#[derive(Debug, Clone)]
pub struct OperatorSplit {
    grid: TensorGrid,
    params: HestonParams,
    spec: OptionSpec,
    mats: [CsrMatrix; 3],
    full: CsrMatrix,
    /// Copies of `mats` in fixed-width layout for the time-stepping products.
    fast: [EllMatrix; 3],
    terms: [Vec<BoundaryTerm>; 3],
    u0: Vec<f64>,
}

struct Assembler<'a> {
    grid: &'a TensorGrid,
    triplets: [Vec<(usize, usize, f64)>; 3],
    terms: [Vec<BoundaryTerm>; 3],
}

impl Assembler<'_> {
    /// Adds `coef * u(s_ii, v_jj)` to row `row` of part `slot`.
    fn couple(&mut self, slot: usize, row: usize, ii: usize, jj: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let s = self.grid.s_mesh().nodes();
        let v = self.grid.v_mesh().nodes();
        if ii == 0 {
            self.terms[slot].push(BoundaryTerm {
                row,
                coef,
                source: BoundarySource::Left(v[jj]),
            });
        } else if jj == self.grid.m2() {
            self.terms[slot].push(BoundaryTerm {
                row,
                coef,
                source: BoundarySource::Top(s[ii]),
            });
        } else {
            self.triplets[slot].push((row, self.grid.index(ii, jj), coef));
        }
    }

    fn neumann(&mut self, slot: usize, row: usize, coef: f64) {
        if coef != 0.0 {
            self.terms[slot].push(BoundaryTerm {
                row,
                coef,
                source: BoundarySource::Neumann,
            });
        }
    }
}

fn shift(i: usize, o: isize) -> usize {
    (i as isize + o) as usize
}

/// Stencil used for `dv` at row `j` of the variance mesh.
///
/// Forward (downstream-free) at the outflow boundary `v = 0`; backward where
/// `v > 1` and the drift `kappa (eta - v)` is negative; central elsewhere.
pub fn v_convection_kind(params: &HestonParams, v_mesh: &Mesh1D, j: usize) -> D1Kind {
    let v = v_mesh.nodes()[j];
    if j == 0 {
        D1Kind::Right
    } else if v > 1.0 && params.kappa * (params.eta - v) < 0.0 {
        D1Kind::Left
    } else {
        D1Kind::Central
    }
}

/// Assembles `A0, A1, A2`, the boundary forcing and the initial vector.
pub fn assemble(
    grid: &TensorGrid,
    params: &HestonParams,
    spec: &OptionSpec,
    domain: &DomainSpec,
) -> Result<OperatorSplit> {
    model::validate(*params, *spec)?;
    model::validate_domain(spec, domain)?;
    let (m1, m2) = (grid.m1(), grid.m2());
    if m1 < 2 || m2 < 2 {
        return Err(Error::Assembly(format!("grid {m1}x{m2} too small (need m1, m2 >= 2)")));
    }
    let s_mesh = grid.s_mesh();
    let v_mesh = grid.v_mesh();
    let s = s_mesh.nodes();
    let v = v_mesh.nodes();
    if (s[0] - spec.lower_s()).abs() > 1e-12 * spec.strike || (s[m1] - domain.s_max).abs() > 1e-9 * domain.s_max {
        return Err(Error::Assembly("s-mesh does not span the option's domain".into()));
    }
    if (v[m2] - domain.v_max).abs() > 1e-12 * domain.v_max || v[0] != 0.0 {
        return Err(Error::Assembly("v-mesh does not span [0, V]".into()));
    }
    let to_assembly = |e: Error| Error::Assembly(e.to_string());

    let HestonParams {
        kappa,
        eta,
        sigma,
        rho,
        r_d,
        r_f,
    } = *params;
    let mut asm = Assembler {
        grid,
        triplets: Default::default(),
        terms: Default::default(),
    };

    for j in 0..m2 {
        let vj = v[j];
        for i in 1..=m1 {
            let si = s[i];
            let row = grid.index(i, j);

            // A1: s-direction.
            let diff_s = 0.5 * si * si * vj;
            let conv_s = (r_d - r_f) * si;
            if i < m1 {
                if diff_s != 0.0 {
                    let w = d2_weights(s_mesh, i).map_err(to_assembly)?;
                    for (o, c) in w.offsets.iter().zip(w.weights) {
                        asm.couple(1, row, shift(i, *o), j, diff_s * c);
                    }
                }
                let w = d1_weights(s_mesh, i, D1Kind::Central).map_err(to_assembly)?;
                for (o, c) in w.offsets.iter().zip(w.weights) {
                    asm.couple(1, row, shift(i, *o), j, conv_s * c);
                }
            } else {
                // Virtual node S + h with u(S + h) = u(S) + h * du/ds(S).
                let h = s_mesh.width(m1);
                asm.couple(1, row, m1 - 1, j, diff_s / (h * h));
                asm.couple(1, row, m1, j, -diff_s / (h * h));
                asm.neumann(1, row, diff_s / h);
                asm.neumann(1, row, conv_s);
            }
            asm.couple(1, row, i, j, -0.5 * r_d);

            // A2: v-direction.
            let drift = kappa * (eta - vj);
            let kind = v_convection_kind(params, v_mesh, j);
            let w = d1_weights(v_mesh, j, kind).map_err(to_assembly)?;
            for (o, c) in w.offsets.iter().zip(w.weights) {
                asm.couple(2, row, i, shift(j, *o), drift * c);
            }
            if j > 0 {
                let diff_v = 0.5 * sigma * sigma * vj;
                let w = d2_weights(v_mesh, j).map_err(to_assembly)?;
                for (o, c) in w.offsets.iter().zip(w.weights) {
                    asm.couple(2, row, i, shift(j, *o), diff_v * c);
                }
            }
            asm.couple(2, row, i, j, -0.5 * r_d);

            // A0: mixed derivative; vanishes at v = 0 and on the Neumann edge.
            let mix = rho * sigma * si * vj;
            if mix != 0.0 && i < m1 && j > 0 {
                let w = mixed_weights(s_mesh, v_mesh, i, j).map_err(to_assembly)?;
                for (k, wrow) in w.iter().enumerate() {
                    for (l, c) in wrow.iter().enumerate() {
                        asm.couple(0, row, i + k - 1, j + l - 1, mix * c);
                    }
                }
            }
        }
    }

    let n = grid.len();
    let [t0, t1, t2] = asm.triplets;
    let mats = [
        CsrMatrix::from_triplets(n, n, t0),
        CsrMatrix::from_triplets(n, n, t1),
        CsrMatrix::from_triplets(n, n, t2),
    ];
    let full = mats[0].add(&mats[1]).add(&mats[2]);
    let fast = [
        EllMatrix::from_csr(&mats[0]),
        EllMatrix::from_csr(&mats[1]),
        EllMatrix::from_csr(&mats[2]),
    ];
    let u0 = grid.sample(|si, _| model::payoff(spec, si).unwrap_or(0.0));
    Ok(OperatorSplit {
        grid: grid.clone(),
        params: *params,
        spec: *spec,
        mats,
        full,
        fast,
        terms: asm.terms,
        u0,
    })
}

/// Builds the meshes from the domain and assembles in one go.
pub fn assemble_on(
    m1: usize,
    m2: usize,
    params: &HestonParams,
    spec: &OptionSpec,
    domain: &DomainSpec,
) -> Result<OperatorSplit> {
    let s = crate::grid::build_s_mesh(m1, spec.strike, domain.c, domain.s_max, spec.lower_s())?;
    let v = crate::grid::build_v_mesh(m2, domain.v_max, domain.d)?;
    assemble(&TensorGrid::new(s, v), params, spec, domain)
}

impl OperatorSplit {
    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn params(&self) -> &HestonParams {
        &self.params
    }

    pub fn spec(&self) -> &OptionSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn initial(&self) -> &[f64] {
        &self.u0
    }

    pub fn matrix(&self, part: Part) -> &CsrMatrix {
        match part.slot() {
            None => &self.full,
            Some(k) => &self.mats[k],
        }
    }

    /// `out = A_part w`.
    pub fn mul_matrix(&self, part: Part, w: &[f64], out: &mut [f64]) {
        match part.slot() {
            Some(k) => self.fast[k].mul_vec_into(w, out),
            None => self.full.mul_vec_into(w, out),
        }
    }

    /// `out += b_part(t)`.
    pub fn add_forcing(&self, part: Part, t: f64, out: &mut [f64]) {
        self.add_scaled_forcing(part, t, 1.0, out);
    }

    /// `out += scale * b_part(t)`.
    pub fn add_scaled_forcing(&self, part: Part, t: f64, scale: f64, out: &mut [f64]) {
        let bv = boundary_values(&self.params, &self.spec, t);
        let mut add = |terms: &[BoundaryTerm]| {
            for term in terms {
                let g = match term.source {
                    BoundarySource::Left(v) => bv.left_dirichlet(v),
                    BoundarySource::Top(s) => bv.top_dirichlet(s),
                    BoundarySource::Neumann => bv.right_neumann(),
                };
                out[term.row] += scale * term.coef * g;
            }
        };
        match part.slot() {
            Some(k) => add(&self.terms[k]),
            None => self.terms.iter().for_each(|t| add(t)),
        }
    }

    pub fn forcing(&self, part: Part, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.add_forcing(part, t, &mut out);
        out
    }

    /// `F_part(t, w) = A_part w + b_part(t)`.
    pub fn apply(&self, part: Part, t: f64, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: w.len(),
            });
        }
        let mut out = self.matrix(part).mul_vec(w);
        self.add_forcing(part, t, &mut out);
        Ok(out)
    }

    /// `I - alpha * A1` restricted to the `s`-line `j` (tridiagonal, unknowns
    /// `i = 1..=m1`).
    pub fn s_line_system(&self, j: usize, alpha: f64) -> BandedMatrix {
        let m1 = self.grid.m1();
        let mut band = BandedMatrix::zeros(m1, 1, 1);
        for i in 0..m1 {
            let row = self.grid.index(i + 1, j);
            band.add_to(i, i, 1.0);
            for (col, a) in self.mats[1].row(row) {
                let (ci, cj) = self.grid.node(col);
                debug_assert_eq!(cj, j, "A1 couples distinct s-lines");
                band.add_to(i, ci - 1, -alpha * a);
            }
        }
        band
    }

    /// `I - alpha * A2` restricted to the `v`-line through `s_i` (unknowns
    /// `j = 0..m2`, bandwidth two on each side).
    pub fn v_line_system(&self, i: usize, alpha: f64) -> BandedMatrix {
        let m2 = self.grid.m2();
        let mut band = BandedMatrix::zeros(m2, 2, 2);
        for j in 0..m2 {
            let row = self.grid.index(i, j);
            band.add_to(j, j, 1.0);
            for (col, a) in self.mats[2].row(row) {
                let (ci, cj) = self.grid.node(col);
                debug_assert_eq!(ci, i, "A2 couples distinct v-lines");
                band.add_to(j, cj, -alpha * a);
            }
        }
        band
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_s_mesh, build_v_mesh};
    use crate::model::benchmark_case;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn uniform_first_derivative_weights() {
        let h = 0.25;
        let m = Mesh1D::uniform(0.0, 2.0, 8).unwrap();
        let c = d1_weights(&m, 4, D1Kind::Central).unwrap();
        let l = d1_weights(&m, 4, D1Kind::Left).unwrap();
        let r = d1_weights(&m, 4, D1Kind::Right).unwrap();
        for (got, want) in c.weights.iter().zip([-1.0 / (2.0 * h), 0.0, 1.0 / (2.0 * h)]) {
            assert!(close(*got, want, 1e-13));
        }
        for (got, want) in l.weights.iter().zip([1.0 / (2.0 * h), -2.0 / h, 3.0 / (2.0 * h)]) {
            assert!(close(*got, want, 1e-13));
        }
        for (got, want) in r.weights.iter().zip([-3.0 / (2.0 * h), 2.0 / h, -1.0 / (2.0 * h)]) {
            assert!(close(*got, want, 1e-13));
        }
    }

    #[test]
    fn uneven_widths() {
        let m = Mesh1D::from_nodes(vec![0.0, 1.0, 3.0]).unwrap();
        let b = d1_weights(&m, 1, D1Kind::Central).unwrap();
        for (got, want) in b.weights.iter().zip([-2.0 / 3.0, 0.5, 1.0 / 6.0]) {
            assert!(close(*got, want, 1e-15));
        }
        let d = d2_weights(&m, 1).unwrap();
        for (got, want) in d.weights.iter().zip([2.0 / 3.0, -1.0, 1.0 / 3.0]) {
            assert!(close(*got, want, 1e-15));
        }
    }

    #[test]
    fn missing_neighbours() {
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert!(matches!(d1_weights(&m, 1, D1Kind::Left), Err(Error::Index { .. })));
        assert!(matches!(d1_weights(&m, 0, D1Kind::Central), Err(Error::Index { .. })));
        assert!(matches!(d1_weights(&m, 4, D1Kind::Central), Err(Error::Index { .. })));
        assert!(matches!(d1_weights(&m, 3, D1Kind::Right), Err(Error::Index { .. })));
        assert!(matches!(d2_weights(&m, 4), Err(Error::Index { .. })));
        assert!(d1_weights(&m, 2, D1Kind::Right).is_ok());
    }

    #[test]
    fn mixed_on_bilinear_and_quadratic() {
        let x = build_s_mesh(12, 100.0, 20.0, 800.0, 0.0).unwrap();
        let y = build_v_mesh(9, 5.0, 0.01).unwrap();
        let (xs, ys) = (x.nodes(), y.nodes());
        let w = mixed_weights(&x, &y, 5, 4).unwrap();
        let mut xy = 0.0;
        let mut sum = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                xy += w[k][l] * xs[4 + k] * ys[3 + l];
                sum += w[k][l];
            }
        }
        assert!(close(xy, 1.0, 1e-12));
        assert!(sum.abs() < 1e-9);

        let u = Mesh1D::uniform(0.0, 2.0, 4).unwrap();
        let w = mixed_weights(&u, &u, 2, 2).unwrap();
        let mut val = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                let (xx, yy) = (u.nodes()[1 + k], u.nodes()[1 + l]);
                val += w[k][l] * xx * xx * yy;
            }
        }
        assert!(close(val, 2.0, 1e-14));
    }

    fn small_case(id: u32, m1: usize, m2: usize) -> OperatorSplit {
        let (p, s, d) = benchmark_case(id).unwrap();
        assemble_on(m1, m2, &p, &s, &d).unwrap()
    }

    #[test]
    fn zero_correlation_has_no_mixed_part() {
        let (mut p, s, d) = benchmark_case(1).unwrap();
        p.rho = 0.0;
        let op = assemble_on(20, 10, &p, &s, &d).unwrap();
        assert_eq!(op.matrix(Part::Mixed).nnz(), 0);
        assert!(op.forcing(Part::Mixed, 0.5).iter().all(|&x| x == 0.0));
        let w: Vec<f64> = (0..op.dim()).map(|k| (k as f64).sin()).collect();
        assert!(op.apply(Part::Mixed, 0.3, &w).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn forcing_constant_without_foreign_rate() {
        let op = small_case(1, 20, 10);
        assert_eq!(op.forcing(Part::Full, 0.0), op.forcing(Part::Full, 0.9));
        let op = small_case(2, 20, 10);
        assert_ne!(op.forcing(Part::Full, 0.0), op.forcing(Part::Full, 0.9));
    }

    #[test]
    fn full_is_sum_of_parts() {
        let op = small_case(3, 16, 8);
        let w = op.initial().to_vec();
        let full = op.apply(Part::Full, 0.4, &w).unwrap();
        let parts: Vec<Vec<f64>> = Part::SPLIT.iter().map(|&p| op.apply(p, 0.4, &w).unwrap()).collect();
        for k in 0..op.dim() {
            let sum = parts[0][k] + parts[1][k] + parts[2][k];
            let scale: f64 = Part::SPLIT
                .iter()
                .flat_map(|&p| op.matrix(p).row(k).map(|(c, a)| (a * w[c]).abs()))
                .sum();
            assert!((full[k] - sum).abs() <= 1e-14 * (1.0 + scale));
        }
        assert!(matches!(op.apply(Part::Full, 0.0, &w[1..]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn line_structure() {
        let op = small_case(1, 12, 9);
        let g = op.grid();
        for (r, c, _) in op.matrix(Part::AlongS).triplets() {
            let ((_, jr), (_, jc)) = (g.node(r), g.node(c));
            assert_eq!(jr, jc);
            assert!(r.abs_diff(c) <= 1);
        }
        for (r, c, _) in op.matrix(Part::AlongV).triplets() {
            let ((ir, jr), (ic, jc)) = (g.node(r), g.node(c));
            assert_eq!(ir, ic);
            assert!(jr.abs_diff(jc) <= 2);
        }
    }

    #[test]
    fn v_zero_rows_only_drift() {
        let op = small_case(1, 12, 9);
        let g = op.grid();
        let p = op.params();
        for i in 1..=g.m1() {
            let row = g.index(i, 0);
            assert_eq!(op.matrix(Part::Mixed).row(row).count(), 0);
            let w = d1_weights(g.v_mesh(), 0, D1Kind::Right).unwrap();
            for (col, a) in op.matrix(Part::AlongV).row(row) {
                let (_, jj) = g.node(col);
                let mut want = p.kappa * p.eta * w.weights[jj];
                if jj == 0 {
                    want -= 0.5 * p.r_d;
                }
                assert!(close(a, want, 1e-13), "{a} {want}");
            }
        }
    }

    #[test]
    fn upwind_region() {
        let (p, _, _) = benchmark_case(1).unwrap();
        let v = build_v_mesh(50, 5.0, 0.01).unwrap();
        for j in 0..50 {
            let kind = v_convection_kind(&p, &v, j);
            let want = if j == 0 {
                D1Kind::Right
            } else if v.nodes()[j] > 1.0 {
                D1Kind::Left
            } else {
                D1Kind::Central
            };
            assert_eq!(kind, want);
        }
    }

    #[test]
    fn line_systems_match_matrices() {
        let op = small_case(4, 10, 8);
        let g = op.grid();
        let alpha = 0.37;
        for j in 0..g.m2() {
            let band = op.s_line_system(j, alpha);
            for i in 1..=g.m1() {
                for ii in 1..=g.m1() {
                    let a = op.matrix(Part::AlongS).get(g.index(i, j), g.index(ii, j));
                    let want = if i == ii { 1.0 } else { 0.0 } - alpha * a;
                    assert_eq!(band.get(i - 1, ii - 1), want);
                }
            }
        }
        for i in 1..=g.m1() {
            let band = op.v_line_system(i, alpha);
            for j in 0..g.m2() {
                for jj in 0..g.m2() {
                    let a = op.matrix(Part::AlongV).get(g.index(i, j), g.index(i, jj));
                    let want = if j == jj { 1.0 } else { 0.0 } - alpha * a;
                    assert_eq!(band.get(j, jj), want);
                }
            }
        }
    }
}
