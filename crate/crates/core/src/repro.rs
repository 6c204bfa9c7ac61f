//! Benchmark tables and figure data for the two integral equations.

use std::path::Path;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::dyadic::{pow2, HolderExpansion};
use crate::error::{domain, Result};
use crate::oracle::{exact_langevin, exact_linear};
use crate::solvers::{solve_linear_rs, solve_volterra, LinearRSProblem};

/// `(H, α)` columns of the Langevin error table.
pub const TABLE1_COLUMNS: [(f64, f64); 8] = [
    (0.01, 0.05),
    (0.2, 0.3),
    (0.2, 0.5),
    (0.2, 0.8),
    (0.5, 0.51),
    (0.5, 0.8),
    (0.8, 0.81),
    (0.8, 0.9),
];

/// System levels of the Langevin error table.
pub const TABLE1_LEVELS: [u32; 8] = [3, 4, 5, 6, 7, 8, 9, 10];

/// Published sup-norm errors, row `p - 3`, column as in [`TABLE1_COLUMNS`].
pub const TABLE1_PUBLISHED: [[f64; 8]; 8] = [
    [2.33e-01, 6.76e-02, 5.83e-02, 5.04e-02, 2.38e-02, 2.04e-02, 5.60e-03, 5.39e-03],
    [1.92e-01, 4.32e-02, 2.66e-02, 2.25e-02, 9.02e-03, 7.56e-03, 1.78e-03, 1.71e-03],
    [1.62e-01, 2.83e-02, 1.53e-02, 9.96e-03, 3.34e-03, 2.76e-03, 5.50e-04, 5.28e-04],
    [1.39e-01, 1.89e-02, 9.16e-03, 4.37e-03, 1.23e-03, 9.97e-04, 1.68e-04, 1.61e-04],
    [1.21e-01, 1.28e-02, 5.53e-03, 1.91e-03, 5.97e-04, 3.58e-04, 5.06e-05, 4.85e-05],
    [1.07e-01, 8.75e-03, 3.35e-03, 8.35e-04, 2.92e-04, 1.28e-04, 1.51e-05, 1.45e-05],
    [9.48e-02, 6.02e-03, 2.04e-03, 3.64e-04, 1.43e-04, 4.54e-05, 4.50e-06, 4.31e-06],
    [8.50e-02, 4.17e-03, 1.25e-03, 1.71e-04, 7.07e-05, 1.61e-05, 1.33e-06, 1.27e-06],
];

/// Hurst exponents of the linear-equation table.
pub const TABLE2_HURST: [f64; 6] = [0.51, 0.6, 0.7, 0.8, 0.9, 0.99];
/// Published sup-norm errors of the linear-equation table.
pub const TABLE2_PUBLISHED_SUP: [f64; 6] = [0.18934, 0.08398, 0.03218, 0.01142, 0.00325, 0.00047];
/// Published maximal coefficient deviations of the linear-equation table.
pub const TABLE2_PUBLISHED_COEFF: [f64; 6] = [0.03701, 0.01305, 0.00409, 0.00124, 0.00043, 0.00028];
pub const TABLE2_LEVEL: u32 = 6;
pub const TABLE2_BETA: f64 = -2.0;
pub const TABLE2_GAMMA: f64 = 3.0;
pub const TABLE2_X0: f64 = 1.0;
/// Grid on which the linear-equation errors are measured.
pub const TABLE2_GRID: u32 = 10;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table1Row {
    pub p: u32,
    #[serde(rename = "H")]
    pub hurst: f64,
    pub alpha: f64,
    pub error: f64,
    pub published: f64,
    pub relative_deviation: f64,
}

/// Sup-norm error of the level-`p` Langevin solution against `t^H`, over the nodes
/// `j / 2^{p+1}` that determine the truncated expansion.
pub fn table1_error(hurst: f64, alpha: f64, p: u32) -> Result<f64> {
    let bench = exact_langevin(hurst, alpha, p)?;
    let sol = solve_volterra(&bench.problem()?, p, p)?;
    let q = p + 1;
    let h = pow2(-(q as i32));
    Ok((0..=1usize << q)
        .map(|j| {
            let t = j as f64 * h;
            (sol.expansion.eval(t) - bench.exact(t)).abs()
        })
        .fold(0.0, f64::max))
}

/// All `(p, H, α)` cells of the Langevin table, column by column.
pub fn table1() -> Result<Vec<Table1Row>> {
    let mut rows = Vec::with_capacity(64);
    for (col, &(hurst, alpha)) in TABLE1_COLUMNS.iter().enumerate() {
        for (row, &p) in TABLE1_LEVELS.iter().enumerate() {
            let error = table1_error(hurst, alpha, p)?;
            let published = TABLE1_PUBLISHED[row][col];
            rows.push(Table1Row {
                p,
                hurst,
                alpha,
                error,
                published,
                relative_deviation: (error - published) / published,
            });
        }
    }
    Ok(rows)
}

/// `g(t) = 0.5^H - |t - 0.5|^H`.
pub fn table2_driver(hurst: f64) -> impl Fn(f64) -> f64 + Copy {
    move |t| 0.5f64.powf(hurst) - (t - 0.5).abs().powf(hurst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table2Row {
    #[serde(rename = "H")]
    pub hurst: f64,
    pub p: u32,
    pub sup_error: f64,
    pub coeff_deviation: f64,
    pub published_sup: f64,
    pub published_coeff: f64,
}

/// Sup-norm error on the level-[`TABLE2_GRID`] grid and the largest deviation of the
/// coefficients `c_n`, `1 <= n <= P`, from those of the exact solution.
pub fn table2_errors(hurst: f64, p: u32) -> Result<(f64, f64)> {
    let g_fn = table2_driver(hurst);
    let g = HolderExpansion::expand(g_fn, hurst, p)?;
    let prob = LinearRSProblem::new(TABLE2_X0, TABLE2_BETA, TABLE2_GAMMA, g)?;
    let sol = solve_linear_rs(&prob, p, p)?;
    let exact = exact_linear(TABLE2_X0, TABLE2_BETA, TABLE2_GAMMA, g_fn);
    let sup = crate::dyadic::sup_distance_fn(&sol.expansion, &exact, TABLE2_GRID);
    let exact_coeffs = HolderExpansion::expand(&exact, hurst, p)?;
    let dev = sol
        .expansion
        .coefficients()
        .map(|(i, c)| (c - exact_coeffs.coeff(i)).abs())
        .fold(0.0, f64::max);
    Ok((sup, dev))
}

pub fn table2() -> Result<Vec<Table2Row>> {
    TABLE2_HURST
        .iter()
        .enumerate()
        .map(|(i, &hurst)| {
            let (sup_error, coeff_deviation) = table2_errors(hurst, TABLE2_LEVEL)?;
            Ok(Table2Row {
                hurst,
                p: TABLE2_LEVEL,
                sup_error,
                coeff_deviation,
                published_sup: TABLE2_PUBLISHED_SUP[i],
                published_coeff: TABLE2_PUBLISHED_COEFF[i],
            })
        })
        .collect()
}

/// Uniform draws on `[-1, 1]` from xoshiro256++ seeded by `seed_from_u64`:
/// `((next_u64 >> 11) · 2^{-53}) · 2 - 1`, level by level.
pub fn random_levels(seed: u64, depth: u32) -> Vec<Vec<f64>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..=depth)
        .map(|m| {
            (0..1usize << m)
                .map(|_| ((rng.next_u64() >> 11) as f64 * pow2(-53)) * 2.0 - 1.0)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FigureConfig {
    pub seed: u64,
    pub true_hurst: f64,
    /// Exponents assumed by the solver; the first run usually repeats `true_hurst`.
    pub assumed_hurst: Vec<f64>,
    pub driver_depth: u32,
    pub p: u32,
    pub grid_level: u32,
    pub x0: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FigureConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            true_hurst: 0.51,
            assumed_hurst: vec![0.51, 0.8],
            driver_depth: 7,
            p: 6,
            grid_level: 10,
            x0: 1.0,
            beta: -2.0,
            gamma: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub g: f64,
    pub exact: f64,
    pub approx: f64,
}

#[derive(Debug, Clone)]
pub struct FigureRun {
    pub assumed_hurst: f64,
    pub curve: Vec<CurvePoint>,
    pub sup_error: f64,
}

/// Random driver `g = Σ 2^{m(1/2-H)} c_{m,k} e_{m,k}` with the true exponent; each run
/// rebuilds the driver from the same raw coefficients with the assumed exponent, solves
/// at level `p`, and compares with `x_0 exp(βt + γ g(t))` for the true driver.
pub fn figure_data(cfg: &FigureConfig) -> Result<Vec<FigureRun>> {
    if cfg.driver_depth < cfg.p {
        return Err(domain("driver depth below system level"));
    }
    let raw = random_levels(cfg.seed, cfg.driver_depth);
    let truth = HolderExpansion::new(cfg.true_hurst, 0.0, 0.0, raw.clone())?;
    let exact = exact_linear(cfg.x0, cfg.beta, cfg.gamma, |t| truth.eval(t));
    let n = 1usize << cfg.grid_level;
    let h = pow2(-(cfg.grid_level as i32));
    cfg.assumed_hurst
        .iter()
        .map(|&assumed| {
            let driver = HolderExpansion::new(assumed, 0.0, 0.0, raw.clone())?;
            let prob = LinearRSProblem::new(cfg.x0, cfg.beta, cfg.gamma, driver)?;
            let sol = solve_linear_rs(&prob, cfg.p, cfg.p)?;
            let curve: Vec<CurvePoint> = (0..=n)
                .map(|j| {
                    let t = j as f64 * h;
                    CurvePoint {
                        t,
                        g: truth.eval(t),
                        exact: exact(t),
                        approx: sol.expansion.eval(t),
                    }
                })
                .collect();
            let sup_error = curve.iter().map(|c| (c.exact - c.approx).abs()).fold(0.0, f64::max);
            Ok(FigureRun {
                assumed_hurst: assumed,
                curve,
                sup_error,
            })
        })
        .collect()
}

/// Writes serializable rows as CSV with a header row.
pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
