//! Model bundles: one or more binary models sharing a kernel context, stored as text.
//!
//! Layout (one item per line, numbers in `{:.16e}`):
//!
//! ```text
//! hfa-model 1
//! source_kernel rbf <gamma> | source_kernel linear
//! target_kernel ...
//! ridges <source> <target>
//! standardize none | standardize <dim>, then vector mean and vector scale
//! matrix source_x <rows> <cols>      followed by <rows> lines of <cols> numbers
//! matrix target_x ...
//! matrix ks_sqrt ...
//! matrix kt_sqrt ...
//! matrix kt_inv_sqrt ...
//! classes <count>
//! class <label>                      then, per class:
//! lambda <x>
//! bias <x>
//! converged <true|false>
//! vector labels <n>                  followed by one line of <n> numbers
//! vector alpha <n>
//! vector beta <n>
//! vector objective_trace <len>
//! matrix metric <order> <order>
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::metric::TransformMetric;
use super::model::{HfaModel, KernelContext};
use crate::atomic::write_atomic;
use crate::data::Standardizer;
use crate::error::{HfaError, Result};
use crate::linalg::{dot, KernelSpec, Matrix, SymMatrix};
use crate::svm::DualSolution;

const MAGIC: &str = "hfa-model 1";

/// Per-class binary models over one shared training context.
#[derive(Clone, Debug)]
pub struct ModelBundle {
    entries: Vec<(u32, HfaModel)>,
    input: Option<Standardizer>,
}

impl ModelBundle {
    /// Entries are sorted by class; every model must share the same context.
    pub fn new(mut entries: Vec<(u32, HfaModel)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(HfaError::input("model bundle needs at least one model"));
        }
        entries.sort_by_key(|(c, _)| *c);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(HfaError::input("model bundle has duplicate classes"));
        }
        let ctx = entries[0].1.context();
        if entries.iter().any(|(_, m)| !Arc::ptr_eq(m.context(), ctx)) {
            return Err(HfaError::input(
                "bundled models must share one kernel context",
            ));
        }
        Ok(ModelBundle {
            entries,
            input: None,
        })
    }

    /// Attaches the standardization applied to target inputs before scoring.
    pub fn with_input_standardizer(mut self, s: Standardizer) -> Result<Self> {
        if s.mean.len() != self.target_dim() || s.scale.len() != self.target_dim() {
            return Err(HfaError::input(
                "standardizer dimension does not match the target domain",
            ));
        }
        self.input = Some(s);
        Ok(self)
    }

    pub fn input_standardizer(&self) -> Option<&Standardizer> {
        self.input.as_ref()
    }

    pub fn entries(&self) -> &[(u32, HfaModel)] {
        &self.entries
    }

    pub fn classes(&self) -> Vec<u32> {
        self.entries.iter().map(|(c, _)| *c).collect()
    }

    pub fn context(&self) -> &Arc<KernelContext> {
        self.entries[0].1.context()
    }

    pub fn target_dim(&self) -> usize {
        self.context().target_dim()
    }

    /// Decision value of every model at `x`, in class order; the kernel column is computed once.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let k = match &self.input {
            Some(s) if x.len() == s.mean.len() => {
                let z: Vec<f64> = x
                    .iter()
                    .zip(&s.mean)
                    .zip(&s.scale)
                    .map(|((v, m), c)| (v - m) / c)
                    .collect();
                self.context().target_kernel_column(&z)?
            }
            _ => self.context().target_kernel_column(x)?,
        };
        Ok(self
            .entries
            .iter()
            .map(|(_, m)| dot(m.target_coefficients(), &k) + m.bias())
            .collect())
    }

    pub fn to_text(&self) -> String {
        let ctx = self.context();
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        write_kernel(&mut out, "source_kernel", ctx.source_kernel());
        write_kernel(&mut out, "target_kernel", ctx.target_kernel());
        let (rs, rt) = ctx.ridges();
        writeln!(out, "ridges {rs:.16e} {rt:.16e}").unwrap();
        match &self.input {
            None => out.push_str("standardize none\n"),
            Some(s) => {
                writeln!(out, "standardize {}", s.mean.len()).unwrap();
                write_vector(&mut out, "mean", &s.mean);
                write_vector(&mut out, "scale", &s.scale);
            }
        }
        write_rows(&mut out, "source_x", ctx.source_x(), ctx.source_dim());
        write_rows(&mut out, "target_x", ctx.target_x(), ctx.target_dim());
        write_matrix(&mut out, "ks_sqrt", ctx.factors().lift_source());
        write_matrix(&mut out, "kt_sqrt", ctx.factors().lift_target());
        write_matrix(&mut out, "kt_inv_sqrt", ctx.kt_inv_sqrt().as_matrix());
        writeln!(out, "classes {}", self.entries.len()).unwrap();
        for (class, m) in &self.entries {
            writeln!(out, "class {class}").unwrap();
            writeln!(out, "lambda {:.16e}", m.metric().lambda()).unwrap();
            writeln!(out, "bias {:.16e}", m.bias()).unwrap();
            writeln!(out, "converged {}", m.converged()).unwrap();
            write_vector(&mut out, "labels", m.labels());
            write_vector(&mut out, "alpha", m.alpha());
            write_vector(&mut out, "beta", m.beta());
            write_vector(&mut out, "objective_trace", m.objective_trace());
            write_matrix(&mut out, "metric", m.metric().matrix().as_matrix());
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str, name: &str) -> Result<Self> {
        let mut r = Reader::new(text, name);
        let magic = r.line()?;
        if magic != MAGIC {
            return Err(r.error(format!("expected \"{MAGIC}\"")));
        }
        let source_kernel = r.kernel("source_kernel")?;
        let target_kernel = r.kernel("target_kernel")?;
        let ridges = r.keyed("ridges")?;
        let ridges = match ridges.as_slice() {
            [s, t] => (r.number(s)?, r.number(t)?),
            _ => return Err(r.error("expected two ridge values")),
        };
        let input = match r.single("standardize")?.as_str() {
            "none" => None,
            _ => Some(Standardizer {
                mean: r.vector("mean")?,
                scale: r.vector("scale")?,
            }),
        };
        let source_x = r.matrix("source_x")?;
        let target_x = r.matrix("target_x")?;
        let ks_sqrt = r.sym_matrix("ks_sqrt")?;
        let kt_sqrt = r.sym_matrix("kt_sqrt")?;
        let kt_inv_sqrt = r.sym_matrix("kt_inv_sqrt")?;
        let rows = |m: Matrix| (0..m.rows()).map(|i| m.row(i).to_vec()).collect::<Vec<_>>();
        let context = Arc::new(
            KernelContext::from_parts(
                rows(source_x),
                rows(target_x),
                source_kernel,
                target_kernel,
                ks_sqrt,
                kt_sqrt,
                kt_inv_sqrt,
                ridges,
            )
            .map_err(|e| r.error(e.to_string()))?,
        );

        let count = r.single_usize("classes")?;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let class_field = r.single("class")?;
            let class: u32 = class_field
                .parse()
                .map_err(|_| r.error(format!("bad class label {class_field:?}")))?;
            let lambda = r.single_number("lambda")?;
            let bias = r.single_number("bias")?;
            let converged = match r.single("converged")?.as_str() {
                "true" => true,
                "false" => false,
                other => return Err(r.error(format!("expected true or false, found {other:?}"))),
            };
            let labels = r.vector("labels")?;
            let alpha = r.vector("alpha")?;
            let beta = r.vector("beta")?;
            let trace = r.vector("objective_trace")?;
            if trace.is_empty() {
                return Err(r.error("objective trace is empty"));
            }
            let metric = TransformMetric::new(r.sym_matrix("metric")?, lambda)
                .map_err(|e| r.error(e.to_string()))?;
            let solution = DualSolution {
                alpha,
                beta,
                bias,
                objective: *trace.last().expect("nonempty"),
                iterations: 0,
                gap: 0.0,
            };
            let model = HfaModel::from_parts(
                Arc::clone(&context),
                labels,
                metric,
                solution,
                trace,
                converged,
            )
            .map_err(|e| r.error(e.to_string()))?;
            entries.push((class, model));
        }
        if r.line()? != "end" {
            return Err(r.error("expected \"end\""));
        }
        let bundle = ModelBundle::new(entries)?;
        match input {
            Some(s) => bundle
                .with_input_standardizer(s)
                .map_err(|e| r.error(e.to_string())),
            None => Ok(bundle),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HfaError::io(path, e))?;
        ModelBundle::from_text(&text, &path.display().to_string())
    }
}

fn write_kernel(out: &mut String, key: &str, spec: KernelSpec) {
    match spec {
        KernelSpec::Linear => writeln!(out, "{key} linear").unwrap(),
        KernelSpec::Rbf { gamma } => writeln!(out, "{key} rbf {gamma:.16e}").unwrap(),
    }
}

fn write_numbers(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:.16e}").unwrap();
    }
    out.push('\n');
}

fn write_vector(out: &mut String, key: &str, values: &[f64]) {
    writeln!(out, "vector {key} {}", values.len()).unwrap();
    write_numbers(out, values);
}

fn write_rows(out: &mut String, key: &str, rows: &[Vec<f64>], cols: usize) {
    writeln!(out, "matrix {key} {} {cols}", rows.len()).unwrap();
    for row in rows {
        write_numbers(out, row);
    }
}

fn write_matrix(out: &mut String, key: &str, m: &Matrix) {
    writeln!(out, "matrix {key} {} {}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        write_numbers(out, m.row(i));
    }
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    name: &'a str,
    lineno: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str, name: &'a str) -> Self {
        Reader {
            lines: text.lines().enumerate(),
            name,
            lineno: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> HfaError {
        HfaError::parse(self.name, self.lineno.max(1), message)
    }

    fn line(&mut self) -> Result<String> {
        match self.lines.next() {
            Some((i, l)) => {
                self.lineno = i + 1;
                Ok(l.trim().to_string())
            }
            None => {
                self.lineno += 1;
                Err(self.error("unexpected end of file"))
            }
        }
    }

    /// Reads `key rest...` and returns the remaining fields.
    fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let line = self.line()?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(key) {
            return Err(self.error(format!("expected \"{key}\"")));
        }
        Ok(fields.map(str::to_string).collect())
    }

    fn single(&mut self, key: &str) -> Result<String> {
        let mut fields = self.keyed(key)?;
        if fields.len() != 1 {
            return Err(self.error(format!("\"{key}\" takes one value")));
        }
        Ok(fields.remove(0))
    }

    fn number(&self, field: &str) -> Result<f64> {
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(format!("{field:?} is not a finite number"))),
        }
    }

    fn count(&self, field: &str) -> Result<usize> {
        field
            .parse()
            .map_err(|_| self.error(format!("{field:?} is not a count")))
    }

    fn single_number(&mut self, key: &str) -> Result<f64> {
        let f = self.single(key)?;
        self.number(&f)
    }

    fn single_usize(&mut self, key: &str) -> Result<usize> {
        let f = self.single(key)?;
        self.count(&f)
    }

    fn kernel(&mut self, key: &str) -> Result<KernelSpec> {
        let fields = self.keyed(key)?;
        match fields.as_slice() {
            [f] if f == "linear" => Ok(KernelSpec::Linear),
            [f, g] if f == "rbf" => {
                let g = self.number(g)?;
                KernelSpec::rbf(g).map_err(|e| self.error(e.to_string()))
            }
            _ => Err(self.error("expected \"linear\" or \"rbf <gamma>\"")),
        }
    }

    fn numbers(&mut self, expected: usize) -> Result<Vec<f64>> {
        let line = self.line()?;
        let values = line
            .split_whitespace()
            .map(|f| self.number(f))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != expected {
            return Err(self.error(format!(
                "expected {expected} numbers, found {}",
                values.len()
            )));
        }
        Ok(values)
    }

    fn vector(&mut self, key: &str) -> Result<Vec<f64>> {
        let fields = self.keyed("vector")?;
        match fields.as_slice() {
            [k, n] if k == key => {
                let n = self.count(n)?;
                self.numbers(n)
            }
            _ => Err(self.error(format!("expected \"vector {key} <len>\""))),
        }
    }

    fn matrix(&mut self, key: &str) -> Result<Matrix> {
        let fields = self.keyed("matrix")?;
        let (rows, cols) = match fields.as_slice() {
            [k, r, c] if k == key => (self.count(r)?, self.count(c)?),
            _ => return Err(self.error(format!("expected \"matrix {key} <rows> <cols>\""))),
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.numbers(cols)?);
        }
        Matrix::from_vec(rows, cols, data)
    }

    fn sym_matrix(&mut self, key: &str) -> Result<SymMatrix> {
        let m = self.matrix(key)?;
        if !m.is_square() {
            return Err(self.error(format!("{key} must be square")));
        }
        if m.max_abs_diff(&m.transpose()) != 0.0 {
            return Err(self.error(format!("{key} must be symmetric")));
        }
        SymMatrix::from_matrix(m)
    }
}
