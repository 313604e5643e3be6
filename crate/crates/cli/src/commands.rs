use std::path::{Path, PathBuf};
use std::time::Instant;

use pivotal::bench::{self, Experiment, PlotAxis, TestFunction, ThetaGrid};
use pivotal::kernels::read_point_csv;
use pivotal::kernels::write_point_csv;
use pivotal::loweig::RNG_ALGORITHM;
use pivotal::matcore::{matrix_to_csv, read_matrix_as, write_matrix_as, write_permutation};
use pivotal::rbf::rbf_fit_pcd_with;
use pivotal::{
    covariance_oracle, diag_pivoted_ca, fully_pivoted_ca, kle_pipeline, logdet_approx, lowrank_eigen, pcd_fullrank,
    pcd_lowrank, rbf_fit_chol, rbf_fit_lu, rbf_predict, rmse, synth_surface, CovarianceModel, DenseOracle, Error,
    FitMethod, GaussianRbf, Matrix, MatrixFormat, RbfModel64, Result, StopRule64,
};
use serde::Serialize;

use crate::args::*;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ca(a) => ca(a),
        Command::Pcd(a) => pcd(a),
        Command::Logdet(a) => logdet(a),
        Command::Rbf(RbfCommand::Fit(a)) => rbf_fit(a),
        Command::Rbf(RbfCommand::Predict(a)) => rbf_predict_cmd(a),
        Command::Eigen(a) => eigen(a),
        Command::Kle(KleCommand::Sample(a)) => kle_sample(a),
        Command::Bench(BenchCommand::Sweep(a)) => bench_run(a, false),
        Command::Bench(BenchCommand::Converge(a)) => bench_run(a, true),
    }
}

impl StopArgs {
    fn rule(self) -> StopRule64 {
        match (self.rank, self.tol) {
            (Some(k), _) => StopRule64::FixedRank(k),
            (None, Some(t)) => StopRule64::Tolerance(t),
            (None, None) => StopRule64::Dynamic,
        }
    }
}

impl From<FileFormat> for MatrixFormat {
    fn from(f: FileFormat) -> Self {
        match f {
            FileFormat::Csv => MatrixFormat::Csv,
            FileFormat::Bin => MatrixFormat::Binary,
        }
    }
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pcd => FitMethod::Pcd,
            MethodArg::Chol => FitMethod::Chol,
            MethodArg::Lu => FitMethod::Lu,
        }
    }
}

fn read_input(path: &Path) -> Result<Matrix> {
    read_matrix_as(path, MatrixFormat::from_path(path))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

struct Writer<'a> {
    out: &'a OutputArgs,
    files: Vec<String>,
}

impl<'a> Writer<'a> {
    fn new(out: &'a OutputArgs) -> Result<Self> {
        create_dir(&out.out)?;
        Ok(Writer { out, files: Vec::new() })
    }

    fn matrix(&mut self, stem: &str, m: &Matrix) -> Result<()> {
        let format = MatrixFormat::from(self.out.format);
        let name = format!("{stem}.{}", format.extension());
        write_matrix_as(m, self.out.out.join(&name), format)?;
        self.files.push(name);
        Ok(())
    }

    fn csv(&mut self, name: &str, m: &Matrix) -> Result<()> {
        write_matrix_as(m, self.out.out.join(name), MatrixFormat::Csv)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn permutation(&mut self, name: &str, p: &[usize]) -> Result<()> {
        write_permutation(p, self.out.out.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn meta(self, mut meta: Meta) -> Result<()> {
        meta.files = self.files;
        let path = self.out.out.join("meta.json");
        let text = serde_json::to_string_pretty(&meta)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::Io { path, source: e })
    }
}

/// Contents of `meta.json`, written next to every factor output.
#[derive(Serialize, Default)]
struct Meta {
    command: String,
    input: Option<PathBuf>,
    n: usize,
    k: usize,
    epsilon: Option<f64>,
    tolerance_mode: String,
    stop: String,
    pivots: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    col_pivots: Vec<usize>,
    negative_diagonal: bool,
    seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<serde_json::Value>,
    files: Vec<String>,
}

fn meta_for(command: &str, input: Option<&Path>, stop: StopRule64) -> Meta {
    Meta {
        command: command.to_string(),
        input: input.map(Path::to_path_buf),
        tolerance_mode: stop.mode_name().to_string(),
        stop: stop.to_string(),
        ..Meta::default()
    }
}

fn column_matrix(values: &[f64]) -> Matrix {
    Matrix::from_col_major(values.len(), 1, values.to_vec()).expect("column shape")
}

fn ca(a: CaArgs) -> Result<()> {
    let m = read_input(&a.input)?;
    let stop = a.stop.rule();
    let start = Instant::now();
    let result = match a.variant {
        CaVariant::Diag => diag_pivoted_ca(&DenseOracle::new(&m)?, stop)?,
        CaVariant::Full => fully_pivoted_ca(&m, stop)?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut w = Writer::new(&a.output)?;
    w.matrix("A", &result.a)?;
    if let Some(b) = &result.b {
        w.matrix("B", b)?;
    }
    w.csv("gammas.csv", &column_matrix(&result.gammas))?;
    let mut meta = meta_for("ca", Some(&a.input), stop);
    meta.n = m.rows();
    meta.k = result.rank();
    meta.epsilon = Some(result.epsilon);
    meta.pivots = result.row_pivots.clone();
    if result.b.is_some() {
        meta.col_pivots = result.col_pivots.clone();
    }
    meta.negative_diagonal = result.negative_diagonal;
    meta.seconds = seconds;
    meta.extra = Some(serde_json::json!({ "variant": format!("{:?}", a.variant).to_lowercase() }));
    println!("rank {} epsilon {:.17e}", result.rank(), result.epsilon);
    w.meta(meta)
}

fn pcd(a: PcdArgs) -> Result<()> {
    let m = read_input(&a.input)?;
    let oracle = DenseOracle::new(&m)?;
    let stop = a.stop.rule();
    let mut meta = meta_for("pcd", Some(&a.input), stop);
    meta.n = m.rows();
    let mut w = Writer::new(&a.output)?;
    let start = Instant::now();
    match a.mode {
        PcdMode::Lowrank => {
            let f = pcd_lowrank(&oracle, stop)?;
            meta.seconds = start.elapsed().as_secs_f64();
            w.matrix("L", &f.l)?;
            w.matrix("L_star", &f.l_star)?;
            w.permutation("perm.txt", f.perm.as_slice())?;
            meta.k = f.rank();
            meta.epsilon = Some(f.epsilon);
            meta.pivots = f.beta.clone();
            meta.negative_diagonal = f.negative_diagonal;
            meta.extra = Some(serde_json::json!({ "mode": "lowrank" }));
            println!("rank {} epsilon {:.17e}", f.rank(), f.epsilon);
        }
        PcdMode::Fullrank => {
            let f = pcd_fullrank(&oracle, stop)?;
            meta.seconds = start.elapsed().as_secs_f64();
            w.matrix("L_n", &f.l_n)?;
            w.permutation("perm.txt", f.perm.as_slice())?;
            meta.k = f.rank_used;
            meta.epsilon = Some(f.epsilon);
            meta.pivots = f.perm.as_slice()[..f.rank_used].to_vec();
            meta.negative_diagonal = f.clamped_fill;
            meta.extra = Some(serde_json::json!({ "mode": "fullrank" }));
            println!("rank {} epsilon {:.17e}", f.rank_used, f.epsilon);
        }
    }
    w.meta(meta)
}

fn logdet(a: LogdetArgs) -> Result<()> {
    let m = read_input(&a.input)?;
    let f = pcd_fullrank(&DenseOracle::new(&m)?, a.stop.rule())?;
    let ld = logdet_approx(&f);
    println!("logdet {:.16e}", ld.value());
    println!("log_abs_sum {:.16e}", ld.log_abs_sum);
    println!("zero_count {}", ld.zero_count);
    println!("rank {}", f.rank_used);
    Ok(())
}

fn rbf_fit(a: RbfFitArgs) -> Result<()> {
    let raw = read_matrix_as::<f64>(&a.input, MatrixFormat::Csv)?;
    if raw.cols() < 2 {
        return Err(Error::Dimension(format!(
            "sample file needs coordinates and a value column, got {} column(s)",
            raw.cols()
        )));
    }
    let (points, extra) = read_point_csv::<f64>(&a.input, raw.cols() - 1)?;
    let f = extra.column(0).to_vec();
    let kernel = GaussianRbf::new(a.theta.clone())?;
    let model = match FitMethod::from(a.method) {
        FitMethod::Pcd => rbf_fit_pcd_with(&points, &f, &kernel, a.stop.rule())?,
        FitMethod::Chol => rbf_fit_chol(&points, &f, &kernel, a.lambda)?,
        FitMethod::Lu => rbf_fit_lu(&points, &f, &kernel)?,
    };
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    model.save(&a.out)?;
    println!(
        "method {} n {} active {} fit_seconds {:.3e}",
        model.method,
        points.len(),
        model.diagnostics.rank,
        model.diagnostics.fit_seconds
    );
    Ok(())
}

fn rbf_predict_cmd(a: RbfPredictArgs) -> Result<()> {
    let model = RbfModel64::load(&a.model)?;
    let dim = model.centers.dim();
    let (queries, extra) = read_point_csv::<f64>(&a.input, dim)?;
    let pred = rbf_predict(&model, &queries)?;
    if extra.cols() > 0 {
        println!("rmse {:.16e}", rmse(&pred, extra.column(0))?);
    }
    write_point_csv(&queries, &[&pred], &a.out)
}

fn eigen(a: EigenArgs) -> Result<()> {
    let m = read_input(&a.input)?;
    let stop = a.stop.rule();
    let mut meta = meta_for("eigen", Some(&a.input), stop);
    let start = Instant::now();
    let factor = if a.factor {
        meta.tolerance_mode = "factor-input".into();
        m.clone()
    } else {
        let ca = diag_pivoted_ca(&DenseOracle::new(&m)?, stop)?;
        meta.epsilon = Some(ca.epsilon);
        meta.pivots = ca.row_pivots.clone();
        meta.negative_diagonal = ca.negative_diagonal;
        ca.a
    };
    let ca_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let eig = lowrank_eigen(&factor)?;
    let eigen_seconds = start.elapsed().as_secs_f64();
    meta.n = factor.rows();
    meta.k = eig.len();
    meta.seconds = ca_seconds + eigen_seconds;
    meta.extra = Some(serde_json::json!({ "ca_seconds": ca_seconds, "eigen_seconds": eigen_seconds }));
    let mut w = Writer::new(&a.output)?;
    w.csv("eigenvalues.csv", &column_matrix(&eig.values))?;
    w.matrix("eigenvectors", &eig.vectors)?;
    println!("k {} largest {:.16e}", eig.len(), eig.values.first().copied().unwrap_or(0.0));
    w.meta(meta)
}

fn kle_sample(a: KleSampleArgs) -> Result<()> {
    let theta: [f64; 3] = a
        .theta
        .as_slice()
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!("need 3 correlation lengths, got {}", a.theta.len())))?;
    let stop = a.stop.rule();
    let (field, report, input) = if let Some(path) = &a.input {
        let m = read_input(path)?;
        let (f, r) = kle_pipeline(&DenseOracle::new(&m)?, stop, a.k_prime, a.seed)?;
        (f, r, Some(path.clone()))
    } else {
        let (points, sigma, input) = match (&a.points, a.surface) {
            (Some(path), _) => {
                let (points, extra) = read_point_csv::<f64>(path, 3)?;
                if extra.cols() != 1 {
                    return Err(Error::Dimension(format!(
                        "point file needs x,y,z,sigma columns, got {}",
                        3 + extra.cols()
                    )));
                }
                (points, extra.column(0).to_vec(), Some(path.clone()))
            }
            (None, Some(n)) => {
                let s = synth_surface::<f64>(n, a.seed)?;
                (s.points, s.sigma, None)
            }
            (None, None) => {
                return Err(Error::InvalidParameter("give one of --input, --points or --surface".into()));
            }
        };
        let model = CovarianceModel::new(sigma, theta)?;
        let (f, r) = kle_pipeline(&covariance_oracle(&model, &points)?, stop, a.k_prime, a.seed)?;
        (f, r, input)
    };

    let mut w = Writer::new(&a.output)?;
    let samples = Matrix::from_columns(field.len(), &(0..a.samples).map(|d| field.sample(d)).collect::<Vec<_>>())?;
    let path = a.output.out.join("samples.csv");
    let mut text =
        format!("# seed {}\n# kprime {}\n# rng {}\n# one sample per line\n", a.seed, field.k_prime, RNG_ALGORITHM);
    text.push_str(&matrix_to_csv(&samples.transpose()));
    std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })?;
    w.files.push("samples.csv".into());
    w.csv("eigenvalues.csv", &column_matrix(&field.eig.values))?;

    let mut meta = meta_for("kle sample", input.as_deref(), stop);
    meta.n = field.len();
    meta.k = report.rank;
    meta.epsilon = Some(report.epsilon);
    meta.seconds = report.ca_seconds + report.eigen_seconds;
    meta.extra = Some(serde_json::json!({
        "kprime": field.k_prime,
        "seed": a.seed,
        "samples": a.samples,
        "rng": RNG_ALGORITHM,
        "max_diag": report.max_diag,
        "ca_seconds": report.ca_seconds,
        "eigen_seconds": report.eigen_seconds,
        "synthetic_surface": a.surface,
    }));
    println!("rank {} kprime {} epsilon {:.17e}", report.rank, field.k_prime, report.epsilon);
    w.meta(meta)
}

fn bench_run(a: BenchArgs, converge: bool) -> Result<()> {
    let function = match a.function {
        FunctionArg::F1 => TestFunction::F1,
        FunctionArg::F2 => TestFunction::F2,
    };
    let exp = Experiment {
        function,
        n_values: a.n.clone(),
        grid: ThetaGrid { min: a.theta_min, max: a.theta_max, count: a.theta_count },
        methods: a.methods.iter().map(|&m| FitMethod::from(m)).collect(),
        test_points: a.test_points,
        repetitions: a.repetitions,
    };
    let rows = if converge { bench::convergence_study(&exp)? } else { bench::theta_sweep(&exp)? };
    create_dir(&a.out)?;
    bench::write_results_csv(&rows, a.out.join("results.csv"))?;
    let (stem, axis) = if converge { ("converge", PlotAxis::N) } else { ("sweep", PlotAxis::Theta) };
    bench::write_plot_files(&rows, axis, &a.out, stem)?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    println!("{} rows ({failed} failed) written to {}", rows.len(), a.out.join("results.csv").display());
    Ok(())
}
