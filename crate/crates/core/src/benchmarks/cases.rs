//! Analytic multi-fidelity test problems with exact gradients.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::surrogates::{GradObservationSet, MultiFidelityData};

/// The named benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    OneD1,
    OneD2,
    Branin,
    Oscillator,
    Power,
}

impl CaseName {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1d1" => Some(CaseName::OneD1),
            "1d2" => Some(CaseName::OneD2),
            "branin" => Some(CaseName::Branin),
            "oscillator" => Some(CaseName::Oscillator),
            "power" => Some(CaseName::Power),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseName::OneD1 => "1d1",
            CaseName::OneD2 => "1d2",
            CaseName::Branin => "branin",
            CaseName::Oscillator => "oscillator",
            CaseName::Power => "power",
        }
    }

    pub fn all() -> [CaseName; 5] {
        [
            CaseName::OneD1,
            CaseName::OneD2,
            CaseName::Branin,
            CaseName::Oscillator,
            CaseName::Power,
        ]
    }
}

impl std::fmt::Display for CaseName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A high/low fidelity function pair with analytic gradients.
#[derive(Clone, Copy)]
pub struct AnalyticPair {
    pub name: &'static str,
    pub dim: usize,
    f_high: fn(&Point) -> f64,
    f_low: fn(&Point) -> f64,
    grad_high: fn(&Point) -> Vec<f64>,
    grad_low: fn(&Point) -> Vec<f64>,
}

impl AnalyticPair {
    pub fn f_high(&self, p: &Point) -> f64 {
        (self.f_high)(p)
    }

    pub fn f_low(&self, p: &Point) -> f64 {
        (self.f_low)(p)
    }

    pub fn grad_high(&self, p: &Point) -> Vec<f64> {
        (self.grad_high)(p)
    }

    pub fn grad_low(&self, p: &Point) -> Vec<f64> {
        (self.grad_low)(p)
    }
}

/// A benchmark problem instance: training design, test grid and truth.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: String,
    /// Training data with gradients at every location; models that ignore
    /// gradients simply do not use them.
    pub data: MultiFidelityData,
    pub test_grid: Vec<Point>,
    pub truth_values: Vec<f64>,
    pub truth_gradients: Vec<Vec<f64>>,
}

// ---- 1D function pair ------------------------------------------------------

fn forrester_f_high(p: &Point) -> f64 {
    let x = p.coord(0);
    (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).sin()
}

fn forrester_g_high(p: &Point) -> Vec<f64> {
    let x = p.coord(0);
    let u = 6.0 * x - 2.0;
    let s = 12.0 * x - 4.0;
    vec![12.0 * u * s.sin() + 12.0 * u * u * s.cos()]
}

fn forrester_f_low1(p: &Point) -> f64 {
    let x = p.coord(0);
    0.5 * forrester_f_high(p) + 10.0 * (x - 0.5) - 5.0
}

fn forrester_g_low1(p: &Point) -> Vec<f64> {
    vec![0.5 * forrester_g_high(p)[0] + 10.0]
}

fn forrester_f_low2(p: &Point) -> f64 {
    forrester_f_low1(&Point::scalar(p.coord(0) - 0.005))
}

fn forrester_g_low2(p: &Point) -> Vec<f64> {
    forrester_g_low1(&Point::scalar(p.coord(0) - 0.005))
}

/// The 1D function pair. `case` selects the low-fidelity variant: 1 is the
/// classical linear-trend companion, 2 shifts its argument by 0.005.
pub fn forrester_pair(case: u8) -> AnalyticPair {
    match case {
        1 => AnalyticPair {
            name: "1d1",
            dim: 1,
            f_high: forrester_f_high,
            f_low: forrester_f_low1,
            grad_high: forrester_g_high,
            grad_low: forrester_g_low1,
        },
        2 => AnalyticPair {
            name: "1d2",
            dim: 1,
            f_high: forrester_f_high,
            f_low: forrester_f_low2,
            grad_high: forrester_g_high,
            grad_low: forrester_g_low2,
        },
        _ => panic!("1D case must be 1 or 2"),
    }
}

// ---- modified Branin pair --------------------------------------------------

const BRANIN_A: f64 = 1.0;
const BRANIN_G: f64 = 10.0;
const BRANIN_Q: f64 = 5.0;
const BRANIN_R: f64 = 6.0;
// low-fidelity distortion constants
const BRANIN_LO_A: f64 = 1.1;
const BRANIN_LO_B: f64 = 0.95;
const BRANIN_LO_C: f64 = 0.9;

fn branin_b() -> f64 {
    5.1 / (4.0 * std::f64::consts::PI.powi(2))
}

fn branin_c() -> f64 {
    5.0 / std::f64::consts::PI
}

fn branin_p() -> f64 {
    1.0 / (8.0 * std::f64::consts::PI)
}

fn branin_f_high(p: &Point) -> f64 {
    let (x, y) = (p.coord(0), p.coord(1));
    let x1 = 15.0 * x - 5.0;
    let x2 = 15.0 * y;
    let inner = x2 - branin_b() * x1 * x1 + branin_c() * x1 - BRANIN_R;
    BRANIN_A * inner * inner + BRANIN_G * (1.0 - branin_p()) * x1.cos() + BRANIN_G + BRANIN_Q * x
}

fn branin_g_high(p: &Point) -> Vec<f64> {
    let (x, y) = (p.coord(0), p.coord(1));
    let x1 = 15.0 * x - 5.0;
    let x2 = 15.0 * y;
    let inner = x2 - branin_b() * x1 * x1 + branin_c() * x1 - BRANIN_R;
    let dx = 2.0 * BRANIN_A * inner * (-2.0 * branin_b() * x1 + branin_c()) * 15.0
        - 15.0 * BRANIN_G * (1.0 - branin_p()) * x1.sin()
        + BRANIN_Q;
    let dy = 2.0 * BRANIN_A * inner * 15.0;
    vec![dx, dy]
}

fn branin_warp(p: &Point) -> Point {
    Point::new(vec![
        BRANIN_LO_B * p.coord(0) + (1.0 - BRANIN_LO_B),
        BRANIN_LO_C * p.coord(1),
    ])
}

fn branin_f_low(p: &Point) -> f64 {
    BRANIN_LO_A * branin_f_high(&branin_warp(p))
}

fn branin_g_low(p: &Point) -> Vec<f64> {
    let g = branin_g_high(&branin_warp(p));
    vec![
        BRANIN_LO_A * BRANIN_LO_B * g[0],
        BRANIN_LO_A * BRANIN_LO_C * g[1],
    ]
}

/// The 2D modified Branin pair.
pub fn branin_pair() -> AnalyticPair {
    AnalyticPair {
        name: "branin",
        dim: 2,
        f_high: branin_f_high,
        f_low: branin_f_low,
        grad_high: branin_g_high,
        grad_low: branin_g_low,
    }
}

// ---- underdamped oscillator -----------------------------------------------

fn osc_zeta() -> f64 {
    1.0 / 37f64.sqrt()
}

fn osc_omega0() -> f64 {
    6.0 / (1.0 - osc_zeta() * osc_zeta()).sqrt()
}

fn osc_f_high(p: &Point) -> f64 {
    let t = p.coord(0);
    let zeta = osc_zeta();
    let omega0 = osc_omega0();
    let wd = (1.0 - zeta * zeta).sqrt() * omega0;
    let phi = zeta.acos();
    (-zeta * omega0 * t).exp() * (wd * t + phi).sin() / phi.sin()
}

fn osc_g_high(p: &Point) -> Vec<f64> {
    let t = p.coord(0);
    let zeta = osc_zeta();
    let omega0 = osc_omega0();
    let sq = (1.0 - zeta * zeta).sqrt();
    let wd = sq * omega0;
    let phi = zeta.acos();
    let arg = wd * t + phi;
    vec![
        -(omega0 * (-zeta * omega0 * t).exp() / phi.sin()) * (zeta * arg.sin() - sq * arg.cos()),
    ]
}

fn osc_f_low(p: &Point) -> f64 {
    (osc_omega0() * p.coord(0)).cos()
}

fn osc_g_low(p: &Point) -> Vec<f64> {
    let omega0 = osc_omega0();
    vec![-omega0 * (omega0 * p.coord(0)).sin()]
}

/// Trajectory and velocity of the underdamped oscillator (high fidelity) and
/// its undamped simple-harmonic companion (low fidelity), as functions of
/// time.
pub fn oscillator_pair() -> AnalyticPair {
    AnalyticPair {
        name: "oscillator",
        dim: 1,
        f_high: osc_f_high,
        f_low: osc_f_low,
        grad_high: osc_g_high,
        grad_low: osc_g_low,
    }
}

// ---- synthetic power-factor sensitivity stand-in ---------------------------
//
// A smooth power-factor-like curve on the paper-shaped design (51 low-fidelity
// samples on {20 + 2j}, 5 high-fidelity samples). The real case needs an
// external power-flow simulator; this pair stands in with the same geometry
// and the same finite-difference gradient treatment.

fn power_f_high(p: &Point) -> f64 {
    let x = p.coord(0);
    0.86 + 0.09 * ((x - 70.0) / 18.0).tanh() + 0.012 * (x / 4.0).sin()
}

fn power_g_high(p: &Point) -> Vec<f64> {
    let x = p.coord(0);
    let z = (x - 70.0) / 18.0;
    let sech2 = 1.0 / z.cosh().powi(2);
    vec![0.09 / 18.0 * sech2 + 0.012 / 4.0 * (x / 4.0).cos()]
}

fn power_f_low(p: &Point) -> f64 {
    let x = p.coord(0);
    0.97 * (0.86 + 0.09 * ((x - 74.0) / 21.0).tanh()) + 0.018 + 0.01 * (x / 4.0 + 0.7).sin()
}

fn power_g_low(p: &Point) -> Vec<f64> {
    let x = p.coord(0);
    let z = (x - 74.0) / 21.0;
    let sech2 = 1.0 / z.cosh().powi(2);
    vec![0.97 * 0.09 / 21.0 * sech2 + 0.01 / 4.0 * (x / 4.0 + 0.7).cos()]
}

/// The bundled synthetic power-style pair.
pub fn power_pair() -> AnalyticPair {
    AnalyticPair {
        name: "power",
        dim: 1,
        f_high: power_f_high,
        f_low: power_f_low,
        grad_high: power_g_high,
        grad_low: power_g_low,
    }
}

/// Finite-difference step used for the power-style training gradients.
pub(crate) const POWER_FD_STEP: f64 = 0.25;

fn observation_set(
    pair: &AnalyticPair,
    points: Vec<Point>,
    high: bool,
) -> Result<GradObservationSet> {
    let values: Vec<f64> = points
        .iter()
        .map(|p| if high { pair.f_high(p) } else { pair.f_low(p) })
        .collect();
    let grads: Vec<Vec<f64>> = points
        .iter()
        .map(|p| if high { pair.grad_high(p) } else { pair.grad_low(p) })
        .collect();
    GradObservationSet::with_gradients(points, values, grads)
}

/// Like [`observation_set`] but with central finite-difference gradients of
/// the pair's own values, mirroring how tabulated data is ingested.
fn observation_set_fd(
    pair: &AnalyticPair,
    points: Vec<Point>,
    high: bool,
    h: f64,
) -> Result<GradObservationSet> {
    let f = |p: &Point| if high { pair.f_high(p) } else { pair.f_low(p) };
    let values: Vec<f64> = points.iter().map(&f).collect();
    let grads: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            (0..pair.dim)
                .map(|i| {
                    let mut hi = p.clone();
                    let mut lo = p.clone();
                    hi.set_coord(i, p.coord(i) + h);
                    lo.set_coord(i, p.coord(i) - h);
                    (f(&hi) - f(&lo)) / (2.0 * h)
                })
                .collect()
        })
        .collect();
    GradObservationSet::with_gradients(points, values, grads)
}

fn truth_on_grid(pair: &AnalyticPair, grid: &[Point]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let values = grid.iter().map(|p| pair.f_high(p)).collect();
    let grads = grid.iter().map(|p| pair.grad_high(p)).collect();
    (values, grads)
}

fn uniform_grid_1d(lo: f64, hi: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| Point::scalar(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Builds a benchmark problem instance. `design_seed` only matters for the
/// 2D case, whose nested design is drawn at random from the 41 x 41 grid.
pub fn load_case(name: CaseName, design_seed: u64) -> Result<BenchmarkCase> {
    match name {
        CaseName::OneD1 | CaseName::OneD2 => {
            let pair = forrester_pair(if name == CaseName::OneD1 { 1 } else { 2 });
            let xl: Vec<Point> = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
                .iter()
                .map(|&x| Point::scalar(x))
                .collect();
            // high-fidelity design is a subset of the low-fidelity one
            let xh: Vec<Point> = [0usize, 1, 3, 5].iter().map(|&i| xl[i].clone()).collect();
            let low = observation_set(&pair, xl, false)?;
            let high = observation_set(&pair, xh, true)?;
            let data = MultiFidelityData::new(low, high)?;
            let grid = uniform_grid_1d(0.0, 1.0, 101);
            let (truth_values, truth_gradients) = truth_on_grid(&pair, &grid);
            Ok(BenchmarkCase {
                name: pair.name.to_string(),
                data,
                test_grid: grid,
                truth_values,
                truth_gradients,
            })
        }
        CaseName::Branin => {
            let pair = branin_pair();
            let mut axis = Vec::with_capacity(41 * 41);
            for i in 0..41 {
                for j in 0..41 {
                    axis.push(Point::new(vec![i as f64 / 40.0, j as f64 / 40.0]));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(design_seed);
            let mut idx: Vec<usize> = (0..axis.len()).collect();
            idx.shuffle(&mut rng);
            let xl: Vec<Point> = idx[..30].iter().map(|&i| axis[i].clone()).collect();
            let xh: Vec<Point> = xl[..10].to_vec();
            let low = observation_set(&pair, xl, false)?;
            let high = observation_set(&pair, xh, true)?;
            let data = MultiFidelityData::new(low, high)?;
            let (truth_values, truth_gradients) = truth_on_grid(&pair, &axis);
            Ok(BenchmarkCase {
                name: pair.name.to_string(),
                data,
                test_grid: axis,
                truth_values,
                truth_gradients,
            })
        }
        CaseName::Oscillator => {
            let pair = oscillator_pair();
            let tl: Vec<Point> = (0..=10).map(|j| Point::scalar(0.3 * j as f64)).collect();
            let th: Vec<Point> = (0..=5).map(|j| tl[2 * j].clone()).collect();
            let low = observation_set(&pair, tl, false)?;
            let high = observation_set(&pair, th, true)?;
            let data = MultiFidelityData::new(low, high)?;
            let grid = uniform_grid_1d(0.0, 3.0, 301);
            let (truth_values, truth_gradients) = truth_on_grid(&pair, &grid);
            Ok(BenchmarkCase {
                name: pair.name.to_string(),
                data,
                test_grid: grid,
                truth_values,
                truth_gradients,
            })
        }
        CaseName::Power => {
            let pair = power_pair();
            let xl: Vec<Point> = (0..=50).map(|j| Point::scalar(20.0 + 2.0 * j as f64)).collect();
            let xh: Vec<Point> = [40.0, 48.0, 72.0, 98.0, 116.0]
                .iter()
                .map(|&x| Point::scalar(x))
                .collect();
            // training gradients come from central differences, as for
            // ingested tabulated data
            let low = observation_set_fd(&pair, xl, false, POWER_FD_STEP)?;
            let high = observation_set_fd(&pair, xh, true, POWER_FD_STEP)?;
            let data = MultiFidelityData::new(low, high)?;
            let grid = uniform_grid_1d(20.0, 120.0, 201);
            let (truth_values, truth_gradients) = truth_on_grid(&pair, &grid);
            Ok(BenchmarkCase {
                name: pair.name.to_string(),
                data,
                test_grid: grid,
                truth_values,
                truth_gradients,
            })
        }
    }
}

/// Writes the bundled power-style dataset: value rows at every design point
/// plus companion rows at `x +- h`, so finite-difference ingestion can
/// recover the training gradients.
pub fn write_power_dataset(path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let pair = power_pair();
    let mut out = String::new();
    out.push_str("# synthetic power-factor sensitivity samples (DC = low, AC = high)\n");
    out.push_str("# central-difference companions at +-0.25 around each design point\n");
    out.push_str("fidelity,x1,y\n");
    let mut write_rows = |fid: &str, xs: &[f64], high: bool| {
        for &x in xs {
            for xx in [x - POWER_FD_STEP, x, x + POWER_FD_STEP] {
                let p = Point::scalar(xx);
                let y = if high { pair.f_high(&p) } else { pair.f_low(&p) };
                out.push_str(&format!("{fid},{xx},{y}\n"));
            }
        }
    };
    let xl: Vec<f64> = (0..=50).map(|j| 20.0 + 2.0 * j as f64).collect();
    let xh = [40.0, 48.0, 72.0, 98.0, 116.0];
    write_rows("low", &xl, false);
    write_rows("high", &xh, true);
    let mut f = std::fs::File::create(path).map_err(Error::Io)?;
    f.write_all(out.as_bytes()).map_err(Error::Io)?;
    Ok(())
}
