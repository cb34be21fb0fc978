//! Discriminative Kronecker dictionary learning (K-SLD2).
//!
//! Each class keeps a factor pair `(A_i, B_i)`. Training minimizes, over all
//! labeled signals, the sum of an overcomplete residual (all classes jointly
//! reconstruct the signal), an in-class residual (the signal's own class
//! reconstructs it alone), and a weighted penalty on off-class energy:
//!
//! `F = Σ_j ‖Y_j − Σ_l A_l X_j^l B_l^T‖² + ‖Y_j − A_c X_j^c B_c^T‖²
//!        + μ Σ_{l≠c} ‖A_l X_j^l B_l^T‖²`,   c = label of signal j.
//!
//! Every block of variables (one A, one B, or one coefficient block) enters
//! F quadratically, so each is updated to its exact stationary point given
//! the rest; sweeps are Gauss-Seidel and the objective never increases.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::linalg::Cholesky;
use nalgebra::Dyn;

use crate::dataio::{push_matrix_block, read_matrix_block, LabeledDataset, LineReader};
use crate::error::{Error, Result};
use crate::model::{sample_ensemble, Dims, KSClass, RngStream};
use crate::tensorlin::Matrix;

/// Training settings. `mu` weighs the off-class energy penalty; `ridge`
/// regularizes every Gram inverse, scaled by the Gram's mean diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct KSLD2Config {
    pub n1: usize,
    pub n2: usize,
    pub mu: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub ridge: f64,
    pub init_seed: u64,
}

impl KSLD2Config {
    /// Defaults: mu 0.9, max_iters 200, rel_tol 1e-6, ridge 1e-8, seed 0.
    pub fn new(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            mu: 0.9,
            max_iters: 200,
            rel_tol: 1e-6,
            ridge: 1e-8,
            init_seed: 0,
        }
    }

    /// Invariants: mu >= 0, ridge >= 0, rel_tol > 0.
    fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::InvalidRatio {
                context: format!("mu must be nonnegative, got {}", self.mu),
            });
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::InvalidRatio {
                context: format!("ridge must be nonnegative, got {}", self.ridge),
            });
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidRatio {
                context: format!("rel_tol must be positive, got {}", self.rel_tol),
            });
        }
        Ok(())
    }
}

/// Coefficient blocks, one n1 x n2 block per (signal, dictionary) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    blocks: Vec<Vec<Matrix>>,
}

impl CoefficientSet {
    /// Invariants: at least one signal, every signal has the same positive
    /// number of blocks, all blocks share one shape, all entries finite.
    pub fn new(blocks: Vec<Vec<Matrix>>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::ShapeMismatch {
            context: "coefficient set must cover at least one signal".into(),
        })?;
        let per_signal = first.len();
        if per_signal == 0 {
            return Err(Error::ShapeMismatch {
                context: "coefficient set needs at least one block per signal".into(),
            });
        }
        let shape = first[0].shape();
        for (j, sig) in blocks.iter().enumerate() {
            if sig.len() != per_signal {
                return Err(Error::ShapeMismatch {
                    context: format!(
                        "signal {j} has {} blocks, expected {per_signal}",
                        sig.len()
                    ),
                });
            }
            for (l, blk) in sig.iter().enumerate() {
                if blk.shape() != shape {
                    return Err(Error::ShapeMismatch {
                        context: format!(
                            "block ({j},{l}) is {}x{}, expected {}x{}",
                            blk.nrows(),
                            blk.ncols(),
                            shape.0,
                            shape.1
                        ),
                    });
                }
                if blk.iter().any(|v| !v.is_finite()) {
                    return Err(Error::ShapeMismatch {
                        context: format!("block ({j},{l}) has non-finite entries"),
                    });
                }
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Vec<Matrix>] {
        &self.blocks
    }

    /// Blocks of signal `j`, one per dictionary.
    pub fn signal(&self, j: usize) -> &[Matrix] {
        &self.blocks[j]
    }

    /// Number of signals covered.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.blocks[0][0].shape()
    }

    /// Dictionaries each signal is expanded over.
    pub fn dictionaries(&self) -> usize {
        self.blocks[0].len()
    }
}

/// A fitted set of class dictionaries with its training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    pub dicts: Vec<KSClass>,
    pub mu: f64,
    /// Objective after initialization and after each full sweep;
    /// nonincreasing within 1e-9 * |history[0]|.
    pub history: Vec<f64>,
    pub config: KSLD2Config,
}

/// Sum of class reconstructions `A_l X_l B_l^T` for one signal, optionally
/// leaving one class out.
fn recon_sum(a: &[Matrix], b: &[Matrix], xj: &[Matrix], skip: Option<usize>) -> Matrix {
    let mut s = Matrix::zeros(a[0].nrows(), b[0].nrows());
    for l in 0..a.len() {
        if Some(l) == skip {
            continue;
        }
        s += &a[l] * &xj[l] * b[l].transpose();
    }
    s
}

fn objective_raw(
    signals: &[Matrix],
    labels: &[usize],
    a: &[Matrix],
    b: &[Matrix],
    x: &[Vec<Matrix>],
    mu: f64,
) -> f64 {
    let mut total = 0.0;
    for (j, y) in signals.iter().enumerate() {
        let c = labels[j];
        total += (y - recon_sum(a, b, &x[j], None)).norm_squared();
        total += (y - &a[c] * &x[j][c] * b[c].transpose()).norm_squared();
        for l in 0..a.len() {
            if l != c {
                total += mu * (&a[l] * &x[j][l] * b[l].transpose()).norm_squared();
            }
        }
    }
    total
}

fn split_factors(dicts: &[KSClass]) -> (Vec<Matrix>, Vec<Matrix>) {
    let a = dicts.iter().map(|d| d.a.clone()).collect();
    let b = dicts.iter().map(|d| d.b.clone()).collect();
    (a, b)
}

/// Checks that dictionaries agree with the data shape and share one
/// coefficient shape; returns (n1, n2).
fn check_dicts(dicts: &[KSClass], m1: usize, m2: usize) -> Result<(usize, usize)> {
    let first = dicts.first().ok_or_else(|| Error::DimensionMismatch {
        context: "need at least one dictionary".into(),
    })?;
    let (_, _, n1, n2) = first.factor_dims();
    for (l, d) in dicts.iter().enumerate() {
        if d.factor_dims() != (m1, m2, n1, n2) {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "dictionary {l} has factor dims {:?}, expected {:?}",
                    d.factor_dims(),
                    (m1, m2, n1, n2)
                ),
            });
        }
    }
    Ok((n1, n2))
}

/// Training objective: overcomplete residual + in-class residual + mu times
/// off-class reconstruction energy, summed over all labeled signals.
pub fn objective(
    data: &LabeledDataset,
    dicts: &[KSClass],
    coeffs: &CoefficientSet,
    mu: f64,
) -> Result<f64> {
    let (m1, m2) = data.shape();
    let (n1, n2) = check_dicts(dicts, m1, m2)?;
    if dicts.len() != data.classes() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "{} dictionaries for {} classes",
                dicts.len(),
                data.classes()
            ),
        });
    }
    if coeffs.len() != data.len() || coeffs.dictionaries() != dicts.len() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "coefficients cover {} signals x {} dictionaries, data has {} x {}",
                coeffs.len(),
                coeffs.dictionaries(),
                data.len(),
                dicts.len()
            ),
        });
    }
    if coeffs.block_shape() != (n1, n2) {
        return Err(Error::DimensionMismatch {
            context: format!(
                "coefficient blocks are {:?}, dictionaries expect {:?}",
                coeffs.block_shape(),
                (n1, n2)
            ),
        });
    }
    let (a, b) = split_factors(dicts);
    Ok(objective_raw(
        data.signals(),
        data.labels(),
        &a,
        &b,
        coeffs.blocks(),
        mu,
    ))
}

/// Cholesky of `gram + ridge * mean(diag) * I`. The ridge keeps rank-deficient
/// Grams invertible without changing the scale of the problem.
fn ridged_cholesky(gram: &Matrix, ridge: f64) -> Result<Cholesky<f64, Dyn>> {
    let q = gram.nrows();
    let mut g = gram.clone();
    if ridge > 0.0 {
        let scale = g.trace() / q as f64;
        for i in 0..q {
            g[(i, i)] += ridge * scale;
        }
    }
    g.cholesky().ok_or(Error::SingularGram)
}

/// Solves `num * (gram + ridge)^-1` for a row-space update.
fn solve_right(num: &Matrix, gram: &Matrix, ridge: f64) -> Result<Matrix> {
    let chol = ridged_cholesky(gram, ridge)?;
    Ok(chol.solve(&num.transpose()).transpose())
}

fn infer_raw(y: &Matrix, a: &[Matrix], b: &[Matrix], ridge: f64) -> Result<Vec<Matrix>> {
    let l_cnt = a.len();
    let n1 = a[0].ncols();
    let n2 = b[0].ncols();
    let nl = n1 * n2;
    let dim = l_cnt * nl;
    // Normal equations of the stacked dictionary [B_1 kron A_1 ... B_L kron A_L]:
    // Gram block (l, k) is (B_l^T B_k) kron (A_l^T A_k), rhs block l is
    // vec(A_l^T Y B_l).
    let mut gram = Matrix::zeros(dim, dim);
    let mut rhs = nalgebra::DVector::<f64>::zeros(dim);
    for l in 0..l_cnt {
        for k in 0..l_cnt {
            let block = crate::tensorlin::kron(
                &(b[l].transpose() * &b[k]),
                &(a[l].transpose() * &a[k]),
            );
            gram.view_mut((l * nl, k * nl), (nl, nl)).copy_from(&block);
        }
        let r = a[l].transpose() * y * &b[l];
        rhs.rows_mut(l * nl, nl).copy_from_slice(r.as_slice());
    }
    let chol = ridged_cholesky(&gram, ridge)?;
    let sol = chol.solve(&rhs);
    Ok((0..l_cnt)
        .map(|l| Matrix::from_column_slice(n1, n2, &sol.as_slice()[l * nl..(l + 1) * nl]))
        .collect())
}

/// Jointly fits all coefficient blocks of one signal by least squares over
/// the stacked Kronecker dictionary, with a relative ridge on the Gram.
/// Returns one block per dictionary.
pub fn infer_coefficients(y: &Matrix, dicts: &[KSClass], ridge: f64) -> Result<Vec<Matrix>> {
    check_dicts(dicts, y.nrows(), y.ncols())?;
    if !(ridge >= 0.0) {
        return Err(Error::InvalidRatio {
            context: format!("ridge must be nonnegative, got {ridge}"),
        });
    }
    infer_raw(y, &split_factors(dicts).0, &split_factors(dicts).1, ridge)
}

/// Objective watchdog active in debug builds: every block update must not
/// increase the objective beyond ridge slack. The absolute floor covers
/// rounding once the objective approaches zero.
struct MonotoneGuard {
    last: f64,
    floor: f64,
}

impl MonotoneGuard {
    fn new(f0: f64) -> Self {
        Self { last: f0, floor: 1e-13 * f0.abs().max(1.0) }
    }

    fn check(&mut self, f: f64, what: &str) {
        debug_assert!(
            f <= self.last + 1e-9 * self.last.abs() + self.floor,
            "objective rose after {what}: {} -> {}",
            self.last,
            f
        );
        self.last = f;
    }
}

/// Alternating closed-form minimization of the training objective.
///
/// Initialization: factor pairs drawn from the dictionary prior with
/// `init_seed` (stream 0), columns orthonormalized; coefficients by
/// `infer_coefficients`. Each sweep updates all A factors, then all B
/// factors, then all coefficient blocks (each signal's own class first),
/// sequentially, so every update sees the latest values. Stops when the
/// relative objective change drops below `rel_tol` or after `max_iters`
/// sweeps; `history` holds the objective after initialization and after
/// each sweep.
pub fn fit(data: &LabeledDataset, config: &KSLD2Config) -> Result<LearnedModel> {
    config.validate()?;
    let (m1, m2) = data.shape();
    let l_cnt = data.classes();
    let dims = Dims::new(m1, m2, config.n1, config.n2, l_cnt)?;
    for c in 0..l_cnt {
        if data.class_indices(c).is_empty() {
            return Err(Error::EmptyClass { class: c });
        }
    }
    let mu = config.mu;
    let ridge = config.ridge;
    let k_total = data.len();
    let signals = data.signals();
    let labels = data.labels();

    let init = sample_ensemble(dims, RngStream::new(config.init_seed, 0));
    let mut a: Vec<Matrix> = init.classes.iter().map(|c| c.a.clone().qr().q()).collect();
    let mut b: Vec<Matrix> = init.classes.iter().map(|c| c.b.clone().qr().q()).collect();
    let mut x: Vec<Vec<Matrix>> = signals
        .iter()
        .map(|y| infer_raw(y, &a, &b, ridge))
        .collect::<Result<_>>()?;

    let f0 = objective_raw(signals, labels, &a, &b, &x, mu);
    let mut history = vec![f0];
    let mut guard = MonotoneGuard::new(f0);

    for _ in 0..config.max_iters {
        // A updates. For class c the stationary point satisfies
        // A_c * sum_j w_j M_j M_j^T = sum_j R_j M_j^T + sum_{j in c} Y_j M_j^T
        // with M_j = X_j^c B_c^T, R_j the residual excluding class c, and
        // w_j = 2 in class, 1 + mu out of class.
        for c in 0..l_cnt {
            let bc_t = b[c].transpose();
            let mut num = Matrix::zeros(m1, a[c].ncols());
            let mut gram = Matrix::zeros(a[c].ncols(), a[c].ncols());
            for j in 0..k_total {
                let m_j = &x[j][c] * &bc_t;
                let r_j = &signals[j] - recon_sum(&a, &b, &x[j], Some(c));
                num += r_j * m_j.transpose();
                let w = if labels[j] == c {
                    num += &signals[j] * m_j.transpose();
                    2.0
                } else {
                    1.0 + mu
                };
                gram += w * (&m_j * m_j.transpose());
            }
            a[c] = solve_right(&num, &gram, ridge)?;
            if cfg!(debug_assertions) {
                guard.check(
                    objective_raw(signals, labels, &a, &b, &x, mu),
                    "a-factor update",
                );
            }
        }
        // B updates, the transposed mirror of the A updates.
        for c in 0..l_cnt {
            let mut num = Matrix::zeros(m2, b[c].ncols());
            let mut gram = Matrix::zeros(b[c].ncols(), b[c].ncols());
            for j in 0..k_total {
                let n_j = &a[c] * &x[j][c];
                let r_j = &signals[j] - recon_sum(&a, &b, &x[j], Some(c));
                num += r_j.transpose() * &n_j;
                let w = if labels[j] == c {
                    num += signals[j].transpose() * &n_j;
                    2.0
                } else {
                    1.0 + mu
                };
                gram += w * (n_j.transpose() * n_j);
            }
            b[c] = solve_right(&num, &gram, ridge)?;
            if cfg!(debug_assertions) {
                guard.check(
                    objective_raw(signals, labels, &a, &b, &x, mu),
                    "b-factor update",
                );
            }
        }
        // Coefficient updates. The in-class block balances the overcomplete
        // and in-class residuals; off-class blocks trade the overcomplete
        // residual against the mu penalty.
        let chol_a: Vec<_> = a
            .iter()
            .map(|m| ridged_cholesky(&(m.transpose() * m), ridge))
            .collect::<Result<_>>()?;
        let chol_b: Vec<_> = b
            .iter()
            .map(|m| ridged_cholesky(&(m.transpose() * m), ridge))
            .collect::<Result<_>>()?;
        let solve_both = |l: usize, rhs: &Matrix| -> Matrix {
            let t = chol_a[l].solve(rhs);
            chol_b[l].solve(&t.transpose()).transpose()
        };
        for j in 0..k_total {
            let c = labels[j];
            let half_rest = 0.5 * recon_sum(&a, &b, &x[j], Some(c));
            let rhs = a[c].transpose() * (&signals[j] - half_rest) * &b[c];
            x[j][c] = solve_both(c, &rhs);
            if cfg!(debug_assertions) {
                guard.check(
                    objective_raw(signals, labels, &a, &b, &x, mu),
                    "in-class coefficient update",
                );
            }
            for l in 0..l_cnt {
                if l == c {
                    continue;
                }
                let rest = recon_sum(&a, &b, &x[j], Some(l));
                let rhs = a[l].transpose() * ((&signals[j] - rest) / (1.0 + mu)) * &b[l];
                x[j][l] = solve_both(l, &rhs);
                if cfg!(debug_assertions) {
                    guard.check(
                        objective_raw(signals, labels, &a, &b, &x, mu),
                        "off-class coefficient update",
                    );
                }
            }
        }
        let f = objective_raw(signals, labels, &a, &b, &x, mu);
        let prev = *history.last().expect("history starts nonempty");
        debug_assert!(
            f <= prev + 1e-9 * history[0].abs(),
            "sweep raised the objective: {prev} -> {f}"
        );
        history.push(f);
        if (prev - f).abs() <= config.rel_tol * prev.abs() {
            break;
        }
    }

    let dicts = a
        .into_iter()
        .zip(b)
        .map(|(fa, fb)| KSClass::new(fa, fb))
        .collect::<Result<Vec<_>>>()?;
    Ok(LearnedModel { dicts, mu, history, config: config.clone() })
}

/// Classifies by per-class reconstruction error: coefficients are inferred
/// jointly, then e_i uses only class i's own block. Returns the lowest-error
/// label (lowest index on ties) and the full error vector.
pub fn classify_by_reconstruction(y: &Matrix, model: &LearnedModel) -> Result<(usize, Vec<f64>)> {
    let (a, b) = split_factors(&model.dicts);
    check_dicts(&model.dicts, y.nrows(), y.ncols())?;
    let blocks = infer_raw(y, &a, &b, model.config.ridge)?;
    let errors: Vec<f64> = (0..a.len())
        .map(|i| (y - &a[i] * &blocks[i] * b[i].transpose()).norm_squared())
        .collect();
    let mut label = 0;
    for (i, &e) in errors.iter().enumerate() {
        if e < errors[label] {
            label = i;
        }
    }
    Ok((label, errors))
}

/// Normalized reconstruction error `‖Y − Yhat‖² / ‖Y‖²`.
pub fn nre(y: &Matrix, yhat: &Matrix) -> Result<f64> {
    assert_eq!(y.shape(), yhat.shape(), "nre needs equal shapes");
    let denom = y.norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok((y - yhat).norm_squared() / denom)
}

/// Renders a learned model as text: one header line of dimensions, the
/// settings, the objective history, then each class's A and B factor as
/// value blocks. Lossless for 64-bit floats.
pub fn format_model(model: &LearnedModel) -> String {
    let (m1, m2, n1, n2) = model.dicts[0].factor_dims();
    let mut out = String::new();
    let _ = writeln!(out, "ksld2 1 {} {} {} {} {}", m1, m2, n1, n2, model.dicts.len());
    let _ = writeln!(out, "mu {:.16e}", model.mu);
    let c = &model.config;
    let _ = writeln!(
        out,
        "config {} {} {:.16e} {} {:.16e} {:.16e} {}",
        c.n1, c.n2, c.mu, c.max_iters, c.rel_tol, c.ridge, c.init_seed
    );
    let hist: Vec<String> = model.history.iter().map(|v| format!("{v:.16e}")).collect();
    let _ = writeln!(out, "history {} {}", model.history.len(), hist.join(" "));
    for d in &model.dicts {
        out.push('\n');
        push_matrix_block(&mut out, &d.a);
        out.push('\n');
        push_matrix_block(&mut out, &d.b);
    }
    out
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("{what}: `{tok}` is not a decimal number"),
    })
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("{what}: `{tok}` is not a nonnegative integer"),
    })
}

/// Parses the text form produced by [`format_model`].
pub fn parse_model(text: &str) -> Result<LearnedModel> {
    let mut reader = LineReader::new(text);
    let (hline, header) = reader.next_content().ok_or_else(|| Error::ParseError {
        line: 1,
        message: "empty model file".into(),
    })?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 7 || tok[0] != "ksld2" || tok[1] != "1" {
        return Err(Error::ParseError {
            line: hline,
            message: "header must be `ksld2 1 m1 m2 n1 n2 L`".into(),
        });
    }
    let m1 = parse_usize(tok[2], hline, "m1")?;
    let m2 = parse_usize(tok[3], hline, "m2")?;
    let n1 = parse_usize(tok[4], hline, "n1")?;
    let n2 = parse_usize(tok[5], hline, "n2")?;
    let l_cnt = parse_usize(tok[6], hline, "class count")?;

    let (mline, mu_line) = reader.next_content().ok_or_else(|| Error::ParseError {
        line: reader.line_no(),
        message: "missing mu line".into(),
    })?;
    let mtok: Vec<&str> = mu_line.split_whitespace().collect();
    if mtok.len() != 2 || mtok[0] != "mu" {
        return Err(Error::ParseError {
            line: mline,
            message: "expected `mu <value>`".into(),
        });
    }
    let mu = parse_f64(mtok[1], mline, "mu")?;

    let (cline, cfg_line) = reader.next_content().ok_or_else(|| Error::ParseError {
        line: reader.line_no(),
        message: "missing config line".into(),
    })?;
    let ctok: Vec<&str> = cfg_line.split_whitespace().collect();
    if ctok.len() != 8 || ctok[0] != "config" {
        return Err(Error::ParseError {
            line: cline,
            message: "expected `config n1 n2 mu max_iters rel_tol ridge init_seed`".into(),
        });
    }
    let config = KSLD2Config {
        n1: parse_usize(ctok[1], cline, "config n1")?,
        n2: parse_usize(ctok[2], cline, "config n2")?,
        mu: parse_f64(ctok[3], cline, "config mu")?,
        max_iters: parse_usize(ctok[4], cline, "config max_iters")?,
        rel_tol: parse_f64(ctok[5], cline, "config rel_tol")?,
        ridge: parse_f64(ctok[6], cline, "config ridge")?,
        init_seed: ctok[7].parse().map_err(|_| Error::ParseError {
            line: cline,
            message: format!("config init_seed: `{}` is not an integer", ctok[7]),
        })?,
    };

    let (yline, hist_line) = reader.next_content().ok_or_else(|| Error::ParseError {
        line: reader.line_no(),
        message: "missing history line".into(),
    })?;
    let htok: Vec<&str> = hist_line.split_whitespace().collect();
    if htok.len() < 2 || htok[0] != "history" {
        return Err(Error::ParseError {
            line: yline,
            message: "expected `history <count> <values...>`".into(),
        });
    }
    let hcount = parse_usize(htok[1], yline, "history count")?;
    if htok.len() != 2 + hcount {
        return Err(Error::ParseError {
            line: yline,
            message: format!("history declares {hcount} values, line has {}", htok.len() - 2),
        });
    }
    let history = htok[2..]
        .iter()
        .map(|t| parse_f64(t, yline, "history value"))
        .collect::<Result<Vec<_>>>()?;

    let mut dicts = Vec::with_capacity(l_cnt);
    for i in 0..l_cnt {
        let fa = read_matrix_block(&mut reader, m1, n1, &format!("factor A of class {i}"))?;
        let fb = read_matrix_block(&mut reader, m2, n2, &format!("factor B of class {i}"))?;
        dicts.push(KSClass::new(fa, fb)?);
    }
    if let Some((line_no, _)) = reader.next_content() {
        return Err(Error::ParseError {
            line: line_no,
            message: format!("trailing content after {l_cnt} declared classes"),
        });
    }
    Ok(LearnedModel { dicts, mu, history, config })
}

/// Writes a learned model to `path` in the text form of [`format_model`].
pub fn save_model<P: AsRef<Path>>(path: P, model: &LearnedModel) -> Result<()> {
    fs::write(path, format_model(model))?;
    Ok(())
}

/// Reads a learned model written by [`save_model`].
pub fn load_model<P: AsRef<Path>>(path: P) -> Result<LearnedModel> {
    let text = fs::read_to_string(path)?;
    parse_model(&text)
}
