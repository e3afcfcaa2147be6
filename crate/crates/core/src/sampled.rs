//! Functions on the real line: tabulated samples with interpolation, the
//! oscillator eigenstates, and plain closures behind one trait.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::ho_eigenfunction;

/// Something that can be evaluated at any real `x`.
pub trait LineFunction: Sync {
    fn eval(&self, x: f64) -> Complex64;
}

impl<F> LineFunction for F
where
    F: Fn(f64) -> Complex64 + Sync,
{
    fn eval(&self, x: f64) -> Complex64 {
        self(x)
    }
}

/// `count` equally spaced points from `min` to `max` inclusive; a single
/// point is `min`.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// The oscillator eigenfunction `φ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eigenstate(pub usize);

impl LineFunction for Eigenstate {
    fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(ho_eigenfunction(self.0, x), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Linear,
    /// Natural cubic spline (zero second derivative at both ends).
    CubicSpline,
}

/// Complex samples on a strictly increasing grid. Evaluates to zero outside
/// the sampled interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    mode: Interpolation,
    curvature: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, mode: Interpolation) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidSamples(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.is_empty() {
            return Err(Error::InvalidSamples("no samples".into()));
        }
        if let Some(i) = grid.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSamples(format!("grid point {i} is not finite")));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidSamples(format!("value {i} is not finite")));
        }
        if let Some(i) = grid.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSamples(format!(
                "grid not strictly increasing at index {}",
                i + 1
            )));
        }
        let curvature = match mode {
            Interpolation::CubicSpline if grid.len() >= 3 => natural_spline(&grid, &values),
            _ => vec![Complex64::new(0.0, 0.0); grid.len()],
        };
        Ok(Self {
            grid,
            values,
            mode,
            curvature,
        })
    }

    /// Samples `f` on `grid`.
    pub fn tabulate(f: &impl LineFunction, grid: Vec<f64>, mode: Interpolation) -> Result<Self> {
        let values = grid.iter().map(|&x| f.eval(x)).collect();
        Self::new(grid, values, mode)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mode(&self) -> Interpolation {
        self.mode
    }

    pub fn value_at(&self, x: f64) -> Complex64 {
        let g = &self.grid;
        let n = g.len();
        if n == 1 {
            return if x == g[0] { self.values[0] } else { Complex64::new(0.0, 0.0) };
        }
        if !(x >= g[0] && x <= g[n - 1]) {
            return Complex64::new(0.0, 0.0);
        }
        // index of the interval [g[i], g[i+1]] containing x
        let i = g.partition_point(|&p| p <= x).clamp(1, n - 1) - 1;
        let h = g[i + 1] - g[i];
        let a = (g[i + 1] - x) / h;
        let b = (x - g[i]) / h;
        let linear = self.values[i] * a + self.values[i + 1] * b;
        match self.mode {
            Interpolation::Linear => linear,
            Interpolation::CubicSpline => {
                linear
                    + (self.curvature[i] * (a * a * a - a) + self.curvature[i + 1] * (b * b * b - b))
                        * (h * h / 6.0)
            }
        }
    }
}

impl LineFunction for SampledFunction {
    fn eval(&self, x: f64) -> Complex64 {
        self.value_at(x)
    }
}

/// Second derivatives of the natural cubic spline (Thomas algorithm).
fn natural_spline(x: &[f64], y: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut diag = vec![0.0; n];
    let mut rhs = vec![zero; n];
    let mut upper = vec![0.0; n];
    diag[0] = 1.0;
    diag[n - 1] = 1.0;
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let lower = h0 / 6.0;
        upper[i] = h1 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        // eliminate the sub-diagonal entry against the previous row
        let factor = lower / diag[i - 1];
        diag[i] -= factor * upper[i - 1];
        rhs[i] = rhs[i] - rhs[i - 1] * factor;
    }
    let mut m = vec![zero; n];
    for i in (1..n - 1).rev() {
        m[i] = (rhs[i] - m[i + 1] * upper[i]) / diag[i];
    }
    m
}
