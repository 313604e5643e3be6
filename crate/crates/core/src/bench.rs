//! Benchmark harness for the RBF solvers: test functions, midpoint sampling,
//! shape-parameter sweeps and RMSE-versus-`n` convergence studies.
//!
//! Results are plain rows; [`write_results_csv`] and [`write_plot_files`]
//! turn them into a CSV table and a gnuplot script.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{GaussianRbf, PointSet};
use crate::rbf::{rbf_fit, rbf_predict, rmse, FitMethod};

pub const DEFAULT_TEST_POINTS: usize = 10_000;
pub const DEFAULT_REPETITIONS: usize = 100;
pub const CSV_HEADER: &str = "function,method,n,theta,k,rmse,fit_seconds,status";
/// Caps the number of benchmark cells evaluated concurrently.
pub const THREADS_ENV: &str = "PIVOTAL_THREADS";

/// `(6x−2)² sin(12x−4)` on `[0,1]`.
pub fn f1(x: f64) -> f64 {
    (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).sin()
}

/// Rosenbrock function on `[−1,1]²`.
pub fn f2(x1: f64, x2: f64) -> f64 {
    (1.0 - x1).powi(2) + 100.0 * (x2 - x1 * x1).powi(2)
}

/// `{(2i−1)/(2n) : i = 1…n}`.
pub fn midpoint_points_1d(n: usize) -> Result<PointSet<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("midpoint rule needs n >= 1".into()));
    }
    PointSet::from_values(&midpoints(n))
}

fn midpoints(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect()
}

/// `m x m` midpoint grid on `[−1,1]²` with `m = ⌈√n⌉`; the set holds `m²`
/// points.
pub fn midpoint_grid_2d(n: usize) -> Result<PointSet<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("midpoint grid needs n >= 1".into()));
    }
    let m = (1..).find(|m| m * m >= n).expect("some square exceeds n");
    let axis: Vec<f64> = midpoints(m).into_iter().map(|t| 2.0 * t - 1.0).collect();
    let mut coords = Vec::with_capacity(2 * m * m);
    for &x in &axis {
        for &y in &axis {
            coords.extend([x, y]);
        }
    }
    PointSet::new(2, coords)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    F1,
    F2,
}

impl TestFunction {
    pub fn name(self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            TestFunction::F1 => 1,
            TestFunction::F2 => 2,
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TestFunction::F1 => f1(x[0]),
            TestFunction::F2 => f2(x[0], x[1]),
        }
    }

    /// Midpoint sample of size `n` (rounded up to a square in 2-d).
    pub fn sample(self, n: usize) -> Result<PointSet<f64>> {
        match self {
            TestFunction::F1 => midpoint_points_1d(n),
            TestFunction::F2 => midpoint_grid_2d(n),
        }
    }

    pub fn values(self, points: &PointSet<f64>) -> Vec<f64> {
        points.iter().map(|x| self.eval(x)).collect()
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            other => Err(Error::InvalidParameter(format!("unknown test function '{other}' (f1, f2)"))),
        }
    }
}

/// `count` log-spaced shape parameters from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid { min: 0.001, max: 1.5, count: 200 }
    }
}

impl ThetaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        let step = (b - a) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match i {
                0 => self.min,
                i if i + 1 == self.count => self.max,
                i => (a + step * i as f64).exp(),
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "theta grid needs 0 < min <= max < inf, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count == 0 {
            return Err(Error::InvalidParameter("theta grid needs at least one point".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub function: TestFunction,
    pub n_values: Vec<usize>,
    pub grid: ThetaGrid,
    pub methods: Vec<FitMethod>,
    pub test_points: usize,
    /// Fits averaged per timing measurement in [`convergence_study`].
    pub repetitions: usize,
}

impl Experiment {
    pub fn new(function: TestFunction, n_values: Vec<usize>) -> Self {
        Experiment {
            function,
            n_values,
            grid: ThetaGrid::default(),
            methods: FitMethod::ALL.to_vec(),
            test_points: DEFAULT_TEST_POINTS,
            repetitions: DEFAULT_REPETITIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_values.is_empty() {
            return Err(Error::InvalidParameter("no sample sizes given".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidParameter(format!("sample sizes must be >= 2, got {n}")));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no fit methods selected".into()));
        }
        if self.test_points == 0 || self.repetitions == 0 {
            return Err(Error::InvalidParameter("test points and repetitions must be >= 1".into()));
        }
        Ok(())
    }

    fn test_set(&self) -> Result<(PointSet<f64>, Vec<f64>)> {
        let points = self.function.sample(self.test_points)?;
        let values = self.function.values(&points);
        Ok((points, values))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// Solver error code, e.g. `singular`.
    Failed(String),
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::Failed(code) => write!(f, "failed:{code}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub function: TestFunction,
    pub method: FitMethod,
    /// Actual number of centers.
    pub n: usize,
    pub theta: f64,
    /// Centers carrying a weight; `n` for the dense methods.
    pub k: Option<usize>,
    pub rmse: Option<f64>,
    pub fit_seconds: Option<f64>,
    pub status: CellStatus,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{:e},{},{},{},{}",
            self.function,
            self.method,
            self.n,
            self.theta,
            opt(self.k.map(|k| k.to_string())),
            opt(self.rmse.map(|r| format!("{r:e}"))),
            opt(self.fit_seconds.map(|t| format!("{t:e}"))),
            self.status
        )
    }
}

struct Problem<'a> {
    function: TestFunction,
    centers: PointSet<f64>,
    values: Vec<f64>,
    test: &'a (PointSet<f64>, Vec<f64>),
}

impl Problem<'_> {
    /// Fits `repetitions` times, reports RMSE of the last fit and mean time.
    fn run(&self, method: FitMethod, theta: f64, repetitions: usize) -> ResultRow {
        let mut row = ResultRow {
            function: self.function,
            method,
            n: self.centers.len(),
            theta,
            k: None,
            rmse: None,
            fit_seconds: None,
            status: CellStatus::Ok,
        };
        let outcome = (|| {
            let kernel = GaussianRbf::isotropic(theta)?;
            let mut total = 0.0;
            let mut model = None;
            for _ in 0..repetitions {
                let m = rbf_fit(method, &self.centers, &self.values, &kernel)?;
                total += m.diagnostics.fit_seconds;
                model = Some(m);
            }
            let model = model.expect("at least one repetition");
            let pred = rbf_predict(&model, &self.test.0)?;
            let err = rmse(&pred, &self.test.1)?;
            Ok::<_, Error>((model.diagnostics.rank, err, total / repetitions as f64))
        })();
        match outcome {
            Ok((k, err, t)) => {
                row.k = Some(k);
                row.rmse = Some(err);
                row.fit_seconds = Some(t);
                if !err.is_finite() {
                    row.status = CellStatus::Failed("non-finite".into());
                }
            }
            Err(e) => row.status = CellStatus::Failed(e.code().into()),
        }
        row
    }
}

fn problems<'a>(exp: &Experiment, test: &'a (PointSet<f64>, Vec<f64>)) -> Result<Vec<Problem<'a>>> {
    exp.n_values
        .iter()
        .map(|&n| {
            let centers = exp.function.sample(n)?;
            let values = exp.function.values(&centers);
            Ok(Problem { function: exp.function, centers, values, test })
        })
        .collect()
}

/// Worker count from `PIVOTAL_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match thread_cap() {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidParameter(format!("cannot start {t} worker threads: {e}"))),
        None => Ok(f()),
    }
}

/// Fits every `(n, θ, method)` cell once. Cells run in parallel; the
/// returned rows are ordered by n, then θ, then method. Failed fits become
/// rows with a `failed:` status.
pub fn theta_sweep(exp: &Experiment) -> Result<Vec<ResultRow>> {
    exp.validate()?;
    let test = exp.test_set()?;
    let problems = problems(exp, &test)?;
    let thetas = exp.grid.values();
    let cells: Vec<(&Problem, f64, FitMethod)> = problems
        .iter()
        .flat_map(|p| thetas.iter().flat_map(move |&t| exp.methods.iter().map(move |&m| (p, t, m))))
        .collect();
    in_pool(|| cells.par_iter().map(|&(p, t, m)| p.run(m, t, 1)).collect())
}

/// For each `n` and method: picks `θ*` minimizing RMSE over the grid, then
/// refits at `θ*` `repetitions` times, one fit at a time, and reports the
/// mean fit time. Returns one row per `(n, method)`.
pub fn convergence_study(exp: &Experiment) -> Result<Vec<ResultRow>> {
    let sweep = theta_sweep(exp)?;
    let test = exp.test_set()?;
    let problems = problems(exp, &test)?;
    let mut rows = Vec::new();
    for p in &problems {
        for &method in &exp.methods {
            let best = sweep
                .iter()
                .filter(|r| r.method == method && r.n == p.centers.len() && r.is_ok())
                .filter_map(|r| r.rmse.map(|e| (r.theta, e)))
                .fold(None, |acc: Option<(f64, f64)>, (t, e)| match acc {
                    Some((_, be)) if be <= e => acc,
                    _ => Some((t, e)),
                });
            rows.push(match best {
                Some((theta, _)) => p.run(method, theta, exp.repetitions),
                None => ResultRow {
                    function: exp.function,
                    method,
                    n: p.centers.len(),
                    theta: f64::NAN,
                    k: None,
                    rmse: None,
                    fit_seconds: None,
                    status: CellStatus::Failed("no-valid-theta".into()),
                },
            });
        }
    }
    Ok(rows)
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn write_results_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, results_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Horizontal axis of a plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    Theta,
    N,
}

/// Writes `<stem>.dat` with one gnuplot data block per `(method, n)` (sweeps)
/// or per method (convergence), and `<stem>.gp` plotting RMSE and k from it.
/// Returns the two paths.
pub fn write_plot_files(
    rows: &[ResultRow],
    axis: PlotAxis,
    dir: impl AsRef<Path>,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let (data, script) = plot_files(rows, axis, stem);
    let dat = dir.join(format!("{stem}.dat"));
    let gp = dir.join(format!("{stem}.gp"));
    std::fs::File::create(&dat).and_then(|mut f| f.write_all(data.as_bytes())).map_err(|e| Error::io(&dat, e))?;
    std::fs::write(&gp, script).map_err(|e| Error::io(&gp, e))?;
    Ok((dat, gp))
}

/// Contents of the data and script files of [`write_plot_files`].
pub fn plot_files(rows: &[ResultRow], axis: PlotAxis, stem: &str) -> (String, String) {
    let mut groups: Vec<(String, Vec<&ResultRow>)> = Vec::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        let label = match axis {
            PlotAxis::Theta => format!("{} {} n={}", r.function, r.method, r.n),
            PlotAxis::N => format!("{} {}", r.function, r.method),
        };
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, g)) => g.push(r),
            None => groups.push((label, vec![r])),
        }
    }

    let mut data = String::new();
    for (label, group) in &groups {
        let _ = writeln!(data, "# {label}");
        let _ = writeln!(data, "# x rmse k fit_seconds");
        for r in group {
            let x = match axis {
                PlotAxis::Theta => format!("{:e}", r.theta),
                PlotAxis::N => r.n.to_string(),
            };
            let _ = writeln!(
                data,
                "{x} {:e} {} {:e}",
                r.rmse.unwrap_or(f64::NAN),
                r.k.unwrap_or(0),
                r.fit_seconds.unwrap_or(f64::NAN)
            );
        }
        data.push_str("\n\n");
    }

    let xlabel = match axis {
        PlotAxis::Theta => "theta",
        PlotAxis::N => "n",
    };
    let mut script = String::new();
    let _ = writeln!(script, "set terminal pngcairo size 1000,700");
    let _ = writeln!(script, "set output '{stem}.png'");
    let _ = writeln!(script, "set logscale xy");
    let _ = writeln!(script, "set xlabel '{xlabel}'");
    let _ = writeln!(script, "set ylabel 'RMSE'");
    let _ = writeln!(script, "set y2label 'k'");
    let _ = writeln!(script, "set y2tics");
    let _ = writeln!(script, "set key outside");
    let plots: Vec<String> = groups
        .iter()
        .enumerate()
        .flat_map(|(i, (label, _))| {
            [
                format!("'{stem}.dat' index {i} using 1:2 with linespoints title '{label} rmse'"),
                format!("'{stem}.dat' index {i} using 1:3 axes x1y2 with lines dashtype 2 title '{label} k'"),
            ]
        })
        .collect();
    let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
    (data, script)
}
