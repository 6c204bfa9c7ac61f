//! Truncated linear systems for integral equations driven by a Hölder function.
//!
//! Unknowns are `x_1 = X(1)` (index 0) and the Schauder coefficients `c_n`,
//! `n = 2^m + k` (index `n`), of the truncated solution. Both equations are
//! projected onto the coefficients of levels `0..=p`, giving `C = A C + b` with
//! `P + 1 = 2^{p+1}` unknowns. Rows of higher levels evaluate the same right-hand
//! side for the coefficients above `p` without a further solve.
//!
//! Supported equations:
//!
//! * fractional Langevin: `X(t) = x_0 + θ I^α_{0+} X(t) + g(t)`, `0 < H < α < 1`;
//! * linear Stieltjes: `X(t) = x_0 + β ∫_0^t X ds + γ ∫_0^t X dg`, `g(0) = g(1) = 0`, `H > 1/2`.

use std::ops::Range;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::dyadic::{exp2, pow2, DyadicIndex, HolderExpansion};
use crate::error::{domain, input, Error, Result};
use crate::fraccalc::{gamma, Tau};
use crate::stieltjes::{d_constant, quadratic, tent_against};

/// `X = x_0 + θ I^α X + g`.
#[derive(Debug, Clone)]
pub struct VolterraProblem {
    x0: f64,
    theta: f64,
    alpha: f64,
    g: HolderExpansion,
}

impl VolterraProblem {
    /// The solution space has the Hurst exponent of `g`; requires `0 < H < α < 1`.
    pub fn new(x0: f64, theta: f64, alpha: f64, g: HolderExpansion) -> Result<Self> {
        if !(x0.is_finite() && theta.is_finite()) {
            return Err(input("x0 and theta must be finite"));
        }
        let hurst = g.hurst();
        if !(hurst > 0.0 && hurst < alpha && alpha < 1.0) {
            return Err(domain(format!("need 0 < H < alpha < 1, got H = {hurst}, alpha = {alpha}")));
        }
        Ok(Self { x0, theta, alpha, g })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hurst(&self) -> f64 {
        self.g.hurst()
    }

    pub fn driver(&self) -> &HolderExpansion {
        &self.g
    }
}

/// `X = x_0 + β ∫ X ds + γ ∫ X dg` with `g(0) = g(1) = 0`.
#[derive(Debug, Clone)]
pub struct LinearRSProblem {
    x0: f64,
    beta: f64,
    gamma: f64,
    g: HolderExpansion,
}

impl LinearRSProblem {
    pub fn new(x0: f64, beta: f64, gamma: f64, g: HolderExpansion) -> Result<Self> {
        if !(x0.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(input("x0, beta and gamma must be finite"));
        }
        if !(g.hurst() > 0.5) {
            return Err(domain(format!("driver needs H > 1/2, got {}", g.hurst())));
        }
        if g.f0() != 0.0 || g.f1() != 0.0 {
            return Err(input("driver must vanish at 0 and 1"));
        }
        Ok(Self { x0, beta, gamma, g })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hurst(&self) -> f64 {
        self.g.hurst()
    }

    pub fn driver(&self) -> &HolderExpansion {
        &self.g
    }
}

/// Row builder shared by assembly and coefficient extension.
pub trait TruncatedProblem: Sync {
    fn hurst(&self) -> f64;

    fn x0(&self) -> f64;

    fn kind(&self) -> &'static str;

    fn parameters(&self) -> serde_json::Value;

    /// Rows with flat indices in `rows` (0 is the `x_1` row) of the level-`p` system,
    /// over all `2^{p+1}` columns.
    fn rows(&self, p: u32, rows: Range<usize>) -> Result<(DMatrix<f64>, DVector<f64>)>;
}

/// `C = A C + b` of a truncated problem at level `p`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearSystem {
    #[serde(skip)]
    pub a: DMatrix<f64>,
    #[serde(skip)]
    pub b: DVector<f64>,
    pub p: u32,
    pub kind: String,
    pub parameters: serde_json::Value,
}

impl LinearSystem {
    /// `P + 1 = 2^{p+1}`.
    pub fn size(&self) -> usize {
        self.b.len()
    }

    /// `‖C - (A C + b)‖_∞`.
    pub fn residual(&self, c: &DVector<f64>) -> f64 {
        let r = c - (&self.a * c + &self.b);
        r.amax()
    }

    /// Writes `<stem>.csv` with `row,col,value` triplets of `A` (plus `b` in column `b`)
    /// and `<stem>.json` with the header `{p, P, kind, parameters}`.
    pub fn write_dump(&self, stem: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(stem.with_extension("csv"))?;
        w.write_record(["row", "col", "value"])?;
        for i in 0..self.size() {
            for j in 0..self.size() {
                w.write_record([i.to_string(), j.to_string(), self.a[(i, j)].to_string()])?;
            }
            w.write_record([i.to_string(), "b".to_string(), self.b[i].to_string()])?;
        }
        w.flush()?;
        let header = json!({
            "p": self.p,
            "P": self.size() - 1,
            "kind": self.kind,
            "parameters": self.parameters,
        });
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&header)?)?;
        Ok(())
    }
}

/// Truncated solution of level `system_level`, with coefficients up to the extension level.
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub expansion: HolderExpansion,
    pub x1: f64,
    pub system_level: u32,
    /// `‖C - (A C + b)‖_∞` of the solved system.
    pub residual: f64,
}

fn system_size(p: u32) -> usize {
    1usize << (p + 1)
}

fn check_level(p: u32, g: &HolderExpansion) -> Result<()> {
    if p < 1 || p > 14 {
        return Err(domain(format!("system level must lie in 1..=14, got {p}")));
    }
    if g.max_level() < p {
        return Err(input(format!(
            "driver expanded to level {} but the system needs level {p}",
            g.max_level()
        )));
    }
    Ok(())
}

/// Row cell of flat index `n >= 1`.
fn cell(n: usize) -> DyadicIndex {
    DyadicIndex::from_flat(n as u64).expect("flat index >= 1")
}

/// Grid level whose nodes contain the points of every row cell.
fn row_grid(rows: &Range<usize>) -> u32 {
    if rows.end <= 1 {
        1
    } else {
        cell(rows.end - 1).level() + 1
    }
}

/// Node index on the grid of level `q` of `k / 2^m` style points of a row cell.
fn node_indices(idx: DyadicIndex, q: u32) -> [usize; 3] {
    let stride = 1usize << (q - idx.level());
    let l = idx.shift() as usize * stride;
    [l, l + stride / 2, l + stride]
}

/// Fills columns `1..P+1`: `node_table(column cell, grid level)` tabulates a kernel on the
/// grid nodes, `column` turns the table into the entries of the requested rows.
fn fill_columns(
    a: &mut DMatrix<f64>,
    p: u32,
    rows: &Range<usize>,
    column: impl Fn(DyadicIndex, &[f64]) -> Vec<f64> + Sync,
    node_table: impl Fn(DyadicIndex, u32) -> Vec<f64> + Sync,
) {
    let q = row_grid(rows);
    let cols: Vec<Vec<f64>> = (1..system_size(p))
        .into_par_iter()
        .map(|n| {
            let col = cell(n);
            let table = node_table(col, q);
            column(col, &table)
        })
        .collect();
    for (j, col) in cols.into_iter().enumerate() {
        a.column_mut(j + 1).copy_from_slice(&col);
    }
}

impl TruncatedProblem for VolterraProblem {
    fn hurst(&self) -> f64 {
        self.g.hurst()
    }

    fn x0(&self) -> f64 {
        self.x0
    }

    fn kind(&self) -> &'static str {
        "volterra"
    }

    fn parameters(&self) -> serde_json::Value {
        json!({"x0": self.x0, "theta": self.theta, "alpha": self.alpha, "H": self.g.hurst()})
    }

    fn rows(&self, p: u32, rows: Range<usize>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        check_level(p, &self.g)?;
        let (x0, theta, alpha, hurst) = (self.x0, self.theta, self.alpha, self.g.hurst());
        let tau = Tau::new(1.0 + alpha)?;
        let tau_low = Tau::new(alpha)?;
        let q = row_grid(&rows);
        let h = pow2(-(q as i32));
        let mut a = DMatrix::zeros(rows.len(), system_size(p));
        let mut b = DVector::zeros(rows.len());
        for (i, n) in rows.clone().enumerate() {
            if n == 0 {
                a[(i, 0)] = theta / gamma(alpha + 2.0);
                b[i] = x0 + self.g.f1() + theta * x0 / gamma(1.0 + alpha) - theta * x0 / gamma(alpha + 2.0);
            } else {
                let row = cell(n);
                let scale = exp2(row.level() as f64 * hurst);
                let cubic = tau.right(row, 0.0, 1.0);
                a[(i, 0)] = scale * theta * cubic;
                b[i] = self.g.coeff(row) + scale * theta * x0 * (tau_low.right(row, 0.0, 1.0) - cubic);
            }
        }
        let rows_ref = &rows;
        fill_columns(
            &mut a,
            p,
            &rows,
            |col, table| {
                let weight = theta * exp2(col.level() as f64 * (1.0 - hurst));
                rows_ref
                    .clone()
                    .map(|n| {
                        if n == 0 {
                            weight * table[table.len() - 1]
                        } else {
                            let row = cell(n);
                            let [l, c, r] = node_indices(row, q);
                            let scale = exp2(row.level() as f64 * hurst);
                            weight * scale * (2.0 * table[c] - table[l] - table[r])
                        }
                    })
                    .collect()
            },
            |col, q| (0..=1usize << q).map(|j| tau.left(col, j as f64 * h)).collect(),
        );
        Ok((a, b))
    }
}

impl TruncatedProblem for LinearRSProblem {
    fn hurst(&self) -> f64 {
        self.g.hurst()
    }

    fn x0(&self) -> f64 {
        self.x0
    }

    fn kind(&self) -> &'static str {
        "linear-rs"
    }

    fn parameters(&self) -> serde_json::Value {
        json!({"x0": self.x0, "beta": self.beta, "gamma": self.gamma, "H": self.g.hurst()})
    }

    fn rows(&self, p: u32, rows: Range<usize>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        check_level(p, &self.g)?;
        let (x0, beta, gam, hurst) = (self.x0, self.beta, self.gamma, self.g.hurst());
        let g = self.g.truncated(p);
        let tau = quadratic();
        let q = row_grid(&rows);
        let h = pow2(-(q as i32));
        // ∫_0^1 s dS_p g = -I¹ S_p g (1) = -S
        let s_total: f64 = g
            .coefficients()
            .map(|(i, c)| exp2(-(i.level() as f64) * (1.0 + hurst) - 2.0) * c)
            .sum();
        let mut a = DMatrix::zeros(rows.len(), system_size(p));
        let mut b = DVector::zeros(rows.len());
        let driver: Vec<(DyadicIndex, f64)> = g
            .coefficients()
            .filter(|&(_, c)| c != 0.0)
            .map(|(i, c)| (i, exp2(i.level() as f64 * (0.5 - hurst)) * c))
            .collect();
        let column0: Vec<(f64, f64)> = rows
            .clone()
            .into_par_iter()
            .map(|n| {
                if n == 0 {
                    let a00 = beta / 2.0 - gam * s_total;
                    (a00, x0 + beta * x0 / 2.0 + gam * x0 * s_total)
                } else {
                    let row = cell(n);
                    let m = row.level() as f64;
                    let own = g.coeff(row);
                    let d_sum: f64 = driver.iter().map(|&(i, wc)| wc * d_constant(i, row)).sum();
                    let a0 = -beta * exp2(m * (hurst - 2.0) - 2.0)
                        + gam * (row.left() * own + exp2(m * hurst) * d_sum);
                    (a0, -x0 * a0 + gam * x0 * own)
                }
            })
            .collect();
        for (i, (a0, b0)) in column0.into_iter().enumerate() {
            a[(i, 0)] = a0;
            b[i] = b0;
        }
        let rows_ref = &rows;
        let g_ref = &g;
        fill_columns(
            &mut a,
            p,
            &rows,
            |col, table| {
                // table holds β τ²_col - γ Φ_col on the nodes
                let weight = exp2(col.level() as f64 * (1.0 - hurst));
                rows_ref
                    .clone()
                    .map(|n| {
                        if n == 0 {
                            weight * table[table.len() - 1]
                        } else {
                            let row = cell(n);
                            let [l, c, r] = node_indices(row, q);
                            let scale = exp2(row.level() as f64 * hurst);
                            weight * scale * (2.0 * table[c] - table[l] - table[r])
                        }
                    })
                    .collect()
            },
            |col, q| {
                (0..=1usize << q)
                    .map(|j| {
                        let s = j as f64 * h;
                        beta * tau.left(col, s) - gam * tent_against(&tau, col, g_ref, p, s)
                    })
                    .collect()
            },
        );
        Ok((a, b))
    }
}

/// `A_p`, `b_p` of the fractional Langevin equation.
pub fn assemble_volterra(prob: &VolterraProblem, p: u32) -> Result<LinearSystem> {
    assemble(prob, p)
}

/// `A_p`, `b_p` of the linear Stieltjes equation.
pub fn assemble_linear(prob: &LinearRSProblem, p: u32) -> Result<LinearSystem> {
    assemble(prob, p)
}

pub fn assemble<P: TruncatedProblem + ?Sized>(prob: &P, p: u32) -> Result<LinearSystem> {
    let (a, b) = prob.rows(p, 0..system_size(p))?;
    Ok(LinearSystem {
        a,
        b,
        p,
        kind: prob.kind().to_string(),
        parameters: prob.parameters(),
    })
}

/// Smallest admissible `|u_ii| / max |u_jj|` of the LU factor of `I - A`.
pub const PIVOT_RATIO_MIN: f64 = 1e-13;

/// Solves `C = A C + b` by LU with partial pivoting on `I - A`, with one step of
/// iterative refinement when the residual is above `1e-10 (1 + ‖b‖_∞)`.
pub fn solve_fixed_point(sys: &LinearSystem) -> Result<DVector<f64>> {
    let n = sys.size();
    if sys.a.nrows() != n || sys.a.ncols() != n {
        return Err(input("matrix and vector sizes differ"));
    }
    if sys.a.iter().chain(sys.b.iter()).any(|v| !v.is_finite()) {
        return Err(input("system has non-finite entries"));
    }
    let m = DMatrix::identity(n, n) - &sys.a;
    let lu = m.lu();
    let diag = lu.u().diagonal().map(f64::abs);
    let (min, max) = (diag.min(), diag.max());
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio >= PIVOT_RATIO_MIN) {
        return Err(Error::Solver {
            message: "I - A is numerically singular".into(),
            pivot_ratio: ratio,
        });
    }
    let mut c = lu.solve(&sys.b).ok_or_else(|| Error::Solver {
        message: "LU solve failed".into(),
        pivot_ratio: ratio,
    })?;
    let tol = 1e-10 * (1.0 + sys.b.amax());
    for _ in 0..2 {
        let r = &sys.b - (&c - &sys.a * &c);
        if r.amax() <= tol {
            return Ok(c);
        }
        if let Some(dc) = lu.solve(&r) {
            c += dc;
        }
    }
    let res = sys.residual(&c);
    if res <= tol {
        Ok(c)
    } else {
        Err(Error::Solver {
            message: format!("residual {res:.3e} above {tol:.3e}"),
            pivot_ratio: ratio,
        })
    }
}

/// Coefficients of rows `P+1 .. 2^{to+1}` (levels `p+1..=to`) from a solution `C` of the
/// level-`p` system: `c_N = b_N + Σ_n a_{N,n} C_n`.
pub fn extend_coeffs<P: TruncatedProblem + ?Sized>(prob: &P, p: u32, c: &DVector<f64>, to: u32) -> Result<Vec<f64>> {
    if c.len() != system_size(p) {
        return Err(input(format!("solution has {} entries, expected {}", c.len(), system_size(p))));
    }
    if to <= p {
        return Ok(Vec::new());
    }
    let (a, b) = prob.rows(p, system_size(p)..system_size(to))?;
    Ok((a * c + b).iter().copied().collect())
}

/// Solves at level `p` and extends the coefficients to level `ext >= p`.
pub fn solve<P: TruncatedProblem + ?Sized>(prob: &P, p: u32, ext: u32) -> Result<TruncatedSolution> {
    if ext < p {
        return Err(domain(format!("extension level {ext} below system level {p}")));
    }
    let sys = assemble(prob, p)?;
    let c = solve_fixed_point(&sys)?;
    let residual = sys.residual(&c);
    let extra = extend_coeffs(prob, p, &c, ext)?;
    let flat: Vec<f64> = c.iter().skip(1).copied().chain(extra).collect();
    let levels = (0..=ext)
        .map(|m| {
            let start = (1usize << m) - 1;
            flat[start..start + (1usize << m)].to_vec()
        })
        .collect();
    let x1 = c[0];
    let expansion = HolderExpansion::new(prob.hurst(), prob.x0(), x1, levels)?;
    Ok(TruncatedSolution {
        expansion,
        x1,
        system_level: p,
        residual,
    })
}

/// Truncated solution of `X = x_0 + θ I^α S_p X + g`.
pub fn solve_volterra(prob: &VolterraProblem, p: u32, ext: u32) -> Result<TruncatedSolution> {
    solve(prob, p, ext)
}

/// Truncated solution of `X = x_0 + β ∫ S_p X ds + γ ∫ S_p X dS_p g`.
pub fn solve_linear_rs(prob: &LinearRSProblem, p: u32, ext: u32) -> Result<TruncatedSolution> {
    solve(prob, p, ext)
}
