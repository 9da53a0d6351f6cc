//! Command-line front end for the slab tomography library.
//!
//! Exit codes: 0 on success (kernel membership is reported in the JSON
//! payload, never through the status), 1 when an input file is missing or
//! fails to parse/validate, 2 when a precondition is violated (bad grid or
//! tolerance, non-invariant field under a covering, ...).

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};

use slab_tomo::io::{
    self, covering_to_json, decomposition_to_json, field_to_json, DecompositionJson, FieldJson,
};
use slab_tomo::{
    deck_average, decompose, decompose_twisted, is_in_kernel, mu_min_singular,
    stability_constant, xray_quadrature, xray_sinogram, CoveringSpec, Decomposition, Error,
    FourierTensorField, Geodesic, IntervalField, Sinogram,
};

#[derive(Parser)]
#[command(
    name = "slab-tomo",
    version,
    about = "Geodesic X-ray transforms of tensor fields on periodic and twisted slabs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the forward transform at fixed slope b into `<out>.csv` with
    /// a JSON sidecar `<out>.json`.
    Forward {
        /// Field JSON file
        #[arg(long)]
        field: PathBuf,
        /// Ray slope components, comma separated (e.g. --b=0.3 or --b=-0.4,1.2)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        b: Vec<f64>,
        /// Uniform grid size per torus axis
        #[arg(long, default_value_t = 16)]
        a_grid: usize,
        /// Sample by direct quadrature with this many nodes instead of the
        /// exact Fourier assembly
        #[arg(long)]
        quad_nodes: Option<usize>,
        /// Output path prefix
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a field into zero-mean interval part, potential and
    /// residual; writes a decomposition JSON.
    Decompose {
        #[arg(long)]
        field: PathBuf,
        /// Relative tolerance for per-mode divisibility
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Test kernel membership and write a certificate JSON.
    Verify {
        #[arg(long)]
        field: PathBuf,
        /// Covering JSON: verify on the twisted slab it defines
        #[arg(long)]
        covering: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Seed for the sampled transform check
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid size for the sampled transform check
        #[arg(long, default_value_t = 16)]
        a_grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random kernel element on the Möbius strip, verify it, and
    /// write the certificate.
    MobiusDemo {
        /// Tensor order of the generated field
        #[arg(long, default_value_t = 1)]
        m: i32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 3)]
        j_band: i64,
        #[arg(long, default_value_t = 3)]
        k_band: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate σ_min and the stability constant C_g over ranges of n and m.
    Constants {
        /// Torus dimensions, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        n: Vec<usize>,
        /// Tensor orders, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        m: Vec<i32>,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn precondition(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Json { .. } | Error::Io(_) | Error::Covering(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = run(cli.command) {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Forward {
            field,
            b,
            a_grid,
            quad_nodes,
            out,
        } => forward(&field, &b, a_grid, quad_nodes, &out),
        Command::Decompose { field, tol, out } => run_decompose(&field, tol, &out),
        Command::Verify {
            field,
            covering,
            tol,
            seed,
            a_grid,
            out,
        } => verify(&field, covering.as_deref(), tol, seed, a_grid, &out),
        Command::MobiusDemo {
            m,
            seed,
            tol,
            j_band,
            k_band,
            out,
        } => mobius_demo(m, seed, tol, j_band, k_band, &out),
        Command::Constants { n, m, out } => constants(&n, &m, out.as_deref()),
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Failure::precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

fn check_a_grid(a_grid: usize, f: &FourierTensorField) -> Result<(), Failure> {
    if a_grid < 2 {
        return Err(Failure::precondition(format!(
            "a-grid must have at least 2 points per axis, got {a_grid}"
        )));
    }
    if (a_grid as i64) <= 2 * f.k_band() {
        return Err(Failure::precondition(format!(
            "a-grid of size {a_grid} cannot resolve the field's k-band {}; need more than {}",
            f.k_band(),
            2 * f.k_band()
        )));
    }
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_owned();
    os.push(ext);
    PathBuf::from(os)
}

fn forward(
    field_path: &Path,
    b: &[f64],
    a_grid: usize,
    quad_nodes: Option<usize>,
    out: &Path,
) -> Result<(), Failure> {
    let f = io::load_field(field_path)?;
    if b.len() != f.n() {
        return Err(Failure::precondition(format!(
            "slope b has {} components, the field lives on T^{}",
            b.len(),
            f.n()
        )));
    }
    check_a_grid(a_grid, &f)?;
    let sinogram = match quad_nodes {
        None => xray_sinogram(&f, b, a_grid)?,
        Some(nodes) => {
            if nodes < 2 {
                return Err(Failure::precondition(format!(
                    "quadrature needs at least 2 nodes, got {nodes}"
                )));
            }
            quadrature_sinogram(&f, b, a_grid, nodes)?
        }
    };
    io::write_sinogram_csv(&with_extension(out, ".csv"), &sinogram)?;
    io::write_json(
        &with_extension(out, ".json"),
        &io::SinogramSidecarJson {
            b: b.to_vec(),
            a_grid_size: a_grid,
        },
    )?;
    Ok(())
}

/// Sinogram assembled geodesic by geodesic through the quadrature route.
fn quadrature_sinogram(
    f: &FourierTensorField,
    b: &[f64],
    a_grid: usize,
    nodes: usize,
) -> Result<Sinogram, Error> {
    // reuse the exact-path sinogram for its grid layout, then overwrite
    let exact = xray_sinogram(f, b, a_grid)?;
    let mut values = Vec::with_capacity(exact.values().len());
    for flat in 0..exact.values().len() {
        let a = exact.grid_point(flat);
        let geo = Geodesic::new(a, b.to_vec())?;
        values.push(xray_quadrature(f, &geo, nodes)?);
    }
    Ok(Sinogram::from_values(b.to_vec(), a_grid, values))
}

fn run_decompose(field_path: &Path, tol: f64, out: &Path) -> Result<(), Failure> {
    check_tol(tol)?;
    let f = io::load_field(field_path)?;
    if f.m() < 0 {
        return Err(Failure::precondition(
            "cannot decompose a field of order below 0",
        ));
    }
    let d = decompose(&f, tol)?;
    io::write_json(out, &decomposition_to_json(&d))?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    in_kernel: bool,
    residual_norm: f64,
    boundary_defect: f64,
    #[serde(rename = "sampled_max_abs_If")]
    sampled_max_abs_if: f64,
}

fn verify(
    field_path: &Path,
    covering_path: Option<&Path>,
    tol: f64,
    seed: u64,
    a_grid: usize,
    out: &Path,
) -> Result<(), Failure> {
    check_tol(tol)?;
    let f = io::load_field(field_path)?;
    check_a_grid(a_grid, &f)?;

    let (in_kernel, d): (bool, Decomposition) = match covering_path {
        None => {
            let cert = is_in_kernel(&f, tol)?;
            (cert.in_kernel, cert.decomposition)
        }
        Some(path) => {
            let spec = io::load_covering(path)?;
            if spec.n() != f.n() {
                return Err(Failure::precondition(format!(
                    "covering is over T^{}, the field lives on T^{}",
                    spec.n(),
                    f.n()
                )));
            }
            let d = decompose_twisted(&f, &spec, tol)?;
            let norm = f.l2_norm();
            let ok = d.residual_norm <= tol * norm && d.boundary_defect <= tol * norm;
            (ok, d)
        }
    };

    // independent spot check: sample the transform at seeded random slopes
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_max = 0.0f64;
    for _ in 0..32 {
        let b: Vec<f64> = (0..f.n()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        sampled_max = sampled_max.max(xray_sinogram(&f, &b, a_grid)?.max_abs());
    }

    io::write_json(
        out,
        &VerifyReport {
            in_kernel,
            residual_norm: d.residual_norm,
            boundary_defect: d.boundary_defect,
            sampled_max_abs_if: sampled_max,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MobiusCertificate {
    m: i32,
    seed: u64,
    in_kernel: bool,
    invariant: bool,
    residual_norm: f64,
    boundary_defect: f64,
    /// ‖σ·(π*h) - π*h‖: how far the recovered interval part is from the
    /// flip symmetry the Möbius gluing forces (zero up to rounding).
    h_flip_defect: f64,
    field: FieldJson,
    decomposition: DecompositionJson,
}

fn mobius_demo(
    m: i32,
    seed: u64,
    tol: f64,
    j_band: i64,
    k_band: i64,
    out: &Path,
) -> Result<(), Failure> {
    check_tol(tol)?;
    if m < 0 {
        return Err(Failure::precondition("tensor order must be at least 0"));
    }
    let spec = CoveringSpec::mobius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // kernel element on the covering strip: zero-mean interval part plus
    // the derivative of a zero-trace potential
    let h = IntervalField::random_from(&mut rng, 1, m, j_band);
    let g = random_zero_trace_potential(&mut rng, m - 1, j_band, k_band);
    let slab_element = &h.pullback() + &g.sym_derivative();
    // averaging keeps it in the kernel and makes it descend to the quotient
    let f = deck_average(&slab_element, &spec)?;

    let invariant = slab_tomo::is_invariant(&f, &spec, tol)?;
    let d = decompose_twisted(&f, &spec, tol)?;
    let norm = f.l2_norm();
    let in_kernel = d.residual_norm <= tol * norm && d.boundary_defect <= tol * norm;

    let sigma = spec
        .elements()
        .iter()
        .find(|e| !e.is_identity(1e-12))
        .expect("Möbius group has a nontrivial element");
    let pull = d.h.pullback();
    let h_flip_defect = (&sigma.apply_field(&pull)? - &pull).l2_norm();

    io::write_json(
        out,
        &MobiusCertificate {
            m,
            seed,
            in_kernel,
            invariant,
            residual_norm: d.residual_norm,
            boundary_defect: d.boundary_defect,
            h_flip_defect,
            field: field_to_json(&f),
            decomposition: decomposition_to_json(&d),
        },
    )?;
    // the covering used, for reproducibility
    io::write_json(&with_extension(out, ".covering.json"), &covering_to_json(&spec))?;
    Ok(())
}

fn random_zero_trace_potential(
    rng: &mut ChaCha8Rng,
    degree: i32,
    j_band: i64,
    k_band: i64,
) -> FourierTensorField {
    if degree < 0 {
        return FourierTensorField::new(1, degree);
    }
    let raw = FourierTensorField::random_from(rng, 1, degree, j_band, k_band);
    let mut g = FourierTensorField::new(1, degree);
    for (mode, p) in raw.iter() {
        if !mode.is_k_zero() {
            g.set_mode(mode.j, &mode.k, p.clone()).expect("valid mode");
        }
    }
    for (k, trace) in g.boundary_trace(0.0) {
        g.add_mode(0, &k, trace.scaled(Complex64::new(-1.0, 0.0)))
            .expect("valid mode");
    }
    g
}

#[derive(Serialize)]
struct ConstantsEntry {
    n: usize,
    m: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_min: Option<f64>,
    #[serde(rename = "C_g")]
    c_g: f64,
}

fn constants(ns: &[usize], ms: &[i32], out: Option<&Path>) -> Result<(), Failure> {
    let mut entries = Vec::new();
    for &n in ns {
        if n == 0 {
            return Err(Failure::precondition(
                "constants need n >= 1 (n = 0 has no transverse directions)",
            ));
        }
        for &m in ms {
            if m < 0 {
                return Err(Failure::precondition("tensor order must be at least 0"));
            }
            let sigma_min = if m >= 1 {
                Some(mu_min_singular(n, m)?)
            } else {
                None
            };
            entries.push(ConstantsEntry {
                n,
                m,
                sigma_min,
                c_g: stability_constant(n, m),
            });
        }
    }
    match out {
        Some(path) => io::write_json(path, &entries)?,
        None => println!("{}", io::to_json_string(&entries)?),
    }
    Ok(())
}
