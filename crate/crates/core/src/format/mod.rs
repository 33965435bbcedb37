//! JSON model files.
//!
//! Every file is one object with a `"kind"` field (`falpv`, `lft`,
//! `psi-realization`, `psi-taylor` or `signals`), explicit dimensions, and
//! matrices as arrays of rows. Shapes are validated against the dimensions
//! on load, so empty matrices are unambiguous. Numbers are written in the
//! shortest form that parses back to the identical `f64`.

mod expr;

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BlockStructure, FalpvDims, FalpvModel, LftModel, PsiEvaluator, PsiRealization,
    TruncatedSeries, Word,
};
use crate::transform::AssembledLft;

pub use expr::Expr;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelFile {
    Falpv(FalpvFile),
    Lft(LftFile),
    PsiRealization(PsiRealizationFile),
    PsiTaylor(PsiTaylorFile),
    Signals(SignalsFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FalpvFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub n_p: usize,
    pub n_psi: usize,
    /// `A_0 .. A_{n_psi}`.
    pub a: Vec<Rows>,
    pub b: Vec<Rows>,
    pub c: Vec<Rows>,
    pub d: Vec<Rows>,
}

/// Dimensions of the FALPV model an assembled LFT came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssembledInfo {
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub n_p: usize,
    pub n_psi: usize,
    pub scheduling_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LftFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub blocks: Vec<usize>,
    pub outputs: usize,
    pub inputs: usize,
    pub a: Rows,
    pub b: Rows,
    pub c: Rows,
    pub d: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assembled: Option<AssembledInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiRealizationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub blocks: Vec<usize>,
    pub n_psi: usize,
    pub f: Rows,
    pub g: Rows,
    pub h: Rows,
    /// Optional closed form of each component, used only for verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorTerm {
    /// Letters `1..=n_p`, first letter applied first; `[]` is the constant term.
    pub word: Vec<usize>,
    /// One entry per psi component.
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiTaylorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n_p: usize,
    pub n_psi: usize,
    pub depth: usize,
    /// Hankel order bound; the command line `--order` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub coefficients: Vec<TaylorTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n_u: usize,
    pub n_p: usize,
    pub u: Rows,
    pub p: Rows,
}

impl ModelFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::Falpv(_) => "falpv",
            ModelFile::Lft(_) => "lft",
            ModelFile::PsiRealization(_) => "psi-realization",
            ModelFile::PsiTaylor(_) => "psi-taylor",
            ModelFile::Signals(_) => "signals",
        }
    }

    pub fn from_json(text: &str) -> Result<ModelFile> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let value = serde_json::to_value(self).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(to_pretty_json(&value))
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path)?;
        ModelFile::from_json(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Check every shape against the declared dimensions.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelFile::Falpv(f) => f.to_model().map(|_| ()),
            ModelFile::Lft(f) => f.to_model().map(|_| ()),
            ModelFile::PsiRealization(f) => {
                f.to_model()?;
                f.closed_form_evaluator().map(|_| ())
            }
            ModelFile::PsiTaylor(f) => {
                f.to_series()?;
                f.closed_form_evaluator().map(|_| ())
            }
            ModelFile::Signals(f) => f.to_signals().map(|_| ()),
        }
    }
}

/// Indented JSON with every array of scalars on a single line, so each
/// matrix row occupies one line. Ends with a newline.
pub fn to_pretty_json(value: &serde_json::Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &serde_json::Value, indent: usize) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Array(items) if items.iter().all(|v| !v.is_array() && !v.is_object()) => {
            let parts: Vec<String> = items.iter().map(|v| v.to_string()).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, v, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::from(k.as_str()).to_string());
                out.push_str(": ");
                write_value(out, v, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Build an `r x c` matrix from rows; a matrix with no rows is written `[]`.
pub fn rows_to_matrix(what: &str, rows: &Rows, r: usize, c: usize) -> Result<DMatrix<f64>> {
    if rows.len() != r {
        return Err(Error::shape(format!("{what} rows"), r, rows.len()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::shape(format!("{what} row {i}"), c, row.len()));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("{what} row {i}: non-finite value {v}")));
        }
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn coefficient_list(what: &str, seq: &[Rows], count: usize, r: usize, c: usize) -> Result<Vec<DMatrix<f64>>> {
    if seq.len() != count {
        return Err(Error::shape(format!("{what} coefficient count"), count, seq.len()));
    }
    seq.iter()
        .enumerate()
        .map(|(l, rows)| rows_to_matrix(&format!("{what}_{l}"), rows, r, c))
        .collect()
}

impl FalpvFile {
    pub fn from_model(m: &FalpvModel, description: Option<String>) -> FalpvFile {
        let d = m.dims();
        FalpvFile {
            description,
            n_x: d.n_x,
            n_u: d.n_u,
            n_y: d.n_y,
            n_p: d.n_p,
            n_psi: d.n_psi,
            a: m.a_all().iter().map(matrix_to_rows).collect(),
            b: m.b_all().iter().map(matrix_to_rows).collect(),
            c: m.c_all().iter().map(matrix_to_rows).collect(),
            d: m.d_all().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_model(&self) -> Result<FalpvModel> {
        let count = self.n_psi + 1;
        FalpvModel::new(
            self.n_p,
            coefficient_list("A", &self.a, count, self.n_x, self.n_x)?,
            coefficient_list("B", &self.b, count, self.n_x, self.n_u)?,
            coefficient_list("C", &self.c, count, self.n_y, self.n_x)?,
            coefficient_list("D", &self.d, count, self.n_y, self.n_u)?,
        )
    }
}

impl LftFile {
    pub fn from_model(m: &LftModel, description: Option<String>) -> LftFile {
        LftFile {
            description,
            blocks: m.blocks().dims().to_vec(),
            outputs: m.outputs(),
            inputs: m.inputs(),
            a: matrix_to_rows(m.a()),
            b: matrix_to_rows(m.b()),
            c: matrix_to_rows(m.c()),
            d: matrix_to_rows(m.d()),
            assembled: None,
        }
    }

    pub fn from_assembled(m: &AssembledLft, description: Option<String>) -> LftFile {
        let mut f = LftFile::from_model(m.lft(), description);
        let d = m.dims();
        f.assembled = Some(AssembledInfo {
            n_x: d.n_x,
            n_u: d.n_u,
            n_y: d.n_y,
            n_p: d.n_p,
            n_psi: d.n_psi,
            scheduling_scale: m.scheduling_scale(),
        });
        f
    }

    pub fn to_model(&self) -> Result<LftModel> {
        let blocks = BlockStructure::new(self.blocks.clone())?;
        let n = blocks.total();
        let lft = LftModel::new(
            blocks,
            rows_to_matrix("A", &self.a, n, n)?,
            rows_to_matrix("B", &self.b, n, self.inputs)?,
            rows_to_matrix("C", &self.c, self.outputs, n)?,
            rows_to_matrix("D", &self.d, self.outputs, self.inputs)?,
        )?;
        if self.assembled.is_some() {
            self.assembled_with(lft.clone())?;
        }
        Ok(lft)
    }

    fn assembled_with(&self, lft: LftModel) -> Result<AssembledLft> {
        let info = self
            .assembled
            .ok_or_else(|| Error::Precondition("LFT file carries no FALPV provenance".into()))?;
        let dims = FalpvDims {
            n_x: info.n_x,
            n_u: info.n_u,
            n_y: info.n_y,
            n_p: info.n_p,
            n_psi: info.n_psi,
        };
        AssembledLft::new(lft, dims, info.scheduling_scale)
    }

    pub fn to_assembled(&self) -> Result<AssembledLft> {
        self.assembled_with(self.to_model()?)
    }
}

impl PsiRealizationFile {
    pub fn from_model(psi: &PsiRealization, description: Option<String>) -> PsiRealizationFile {
        PsiRealizationFile {
            description,
            blocks: psi.blocks().dims().to_vec(),
            n_psi: psi.n_psi(),
            f: matrix_to_rows(psi.f()),
            g: matrix_to_rows(psi.g()),
            h: matrix_to_rows(psi.h()),
            closed_form: None,
        }
    }

    pub fn to_model(&self) -> Result<PsiRealization> {
        let blocks = BlockStructure::new(self.blocks.clone())?;
        let n = blocks.total();
        PsiRealization::new(
            blocks,
            rows_to_matrix("F", &self.f, n, n)?,
            rows_to_matrix("G", &self.g, n, 1)?,
            rows_to_matrix("H", &self.h, self.n_psi, n)?,
        )
    }

    pub fn closed_form_evaluator(&self) -> Result<Option<ClosedForm>> {
        closed_form(&self.closed_form, self.blocks.len(), self.n_psi)
    }
}

impl PsiTaylorFile {
    pub fn from_series(s: &TruncatedSeries, order: Option<usize>, description: Option<String>) -> Result<PsiTaylorFile> {
        if s.shape().1 != 1 {
            return Err(Error::shape("psi series columns", 1, s.shape().1));
        }
        Ok(PsiTaylorFile {
            description,
            n_p: s.alphabet(),
            n_psi: s.shape().0,
            depth: s.depth(),
            order,
            coefficients: s
                .iter()
                .map(|(w, v)| TaylorTerm {
                    word: w.letters().to_vec(),
                    value: v.iter().copied().collect(),
                })
                .collect(),
            closed_form: None,
        })
    }

    pub fn to_series(&self) -> Result<TruncatedSeries> {
        let mut s = TruncatedSeries::new(self.n_p, self.depth, self.n_psi, 1)?;
        for term in &self.coefficients {
            let w = Word::new(term.word.clone());
            if term.value.len() != self.n_psi {
                return Err(Error::shape(format!("coefficient of {w}"), self.n_psi, term.value.len()));
            }
            if term.value.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse(format!("coefficient of {w} is not finite")));
            }
            let existing = s.get(&w)?;
            if existing.iter().any(|v| *v != 0.0) {
                return Err(Error::Parse(format!("word {w} listed twice")));
            }
            s.insert(w, DMatrix::from_column_slice(self.n_psi, 1, &term.value))?;
        }
        Ok(s)
    }

    pub fn closed_form_evaluator(&self) -> Result<Option<ClosedForm>> {
        closed_form(&self.closed_form, self.n_p, self.n_psi)
    }
}

/// Parsed `u` and `p` sequences.
pub type Signals = (Vec<DVector<f64>>, Vec<Vec<f64>>);

impl SignalsFile {
    pub fn from_signals(u: &[DVector<f64>], p: &[Vec<f64>], description: Option<String>) -> SignalsFile {
        SignalsFile {
            description,
            n_u: u.first().map_or(0, |v| v.len()),
            n_p: p.first().map_or(0, |v| v.len()),
            u: u.iter().map(|v| v.iter().copied().collect()).collect(),
            p: p.to_vec(),
        }
    }

    pub fn to_signals(&self) -> Result<Signals> {
        if self.u.len() != self.p.len() {
            return Err(Error::shape("signal lengths", self.u.len(), self.p.len()));
        }
        let u = rows_to_matrix("u", &self.u, self.u.len(), self.n_u)?;
        let p = rows_to_matrix("p", &self.p, self.p.len(), self.n_p)?;
        Ok((
            (0..u.nrows()).map(|t| u.row(t).transpose()).collect(),
            (0..p.nrows()).map(|t| p.row(t).iter().copied().collect()).collect(),
        ))
    }
}

/// psi given by one expression per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    n_p: usize,
    components: Vec<Expr>,
}

impl ClosedForm {
    pub fn parse(n_p: usize, sources: &[String]) -> Result<ClosedForm> {
        let components = sources.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
        if let Some(bad) = components.iter().find(|e| e.max_var() > n_p) {
            return Err(Error::Parse(format!(
                "closed form uses p{} but there are only {n_p} scheduling variables",
                bad.max_var()
            )));
        }
        Ok(ClosedForm { n_p, components })
    }
}

impl PsiEvaluator for ClosedForm {
    fn n_p(&self) -> usize {
        self.n_p
    }
    fn n_psi(&self) -> usize {
        self.components.len()
    }
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.n_p {
            return Err(Error::shape("scheduling point", self.n_p, p.len()));
        }
        Ok(self.components.iter().map(|e| e.eval(p)).collect())
    }
}

fn closed_form(src: &Option<Vec<String>>, n_p: usize, n_psi: usize) -> Result<Option<ClosedForm>> {
    match src {
        None => Ok(None),
        Some(list) => {
            if list.len() != n_psi {
                return Err(Error::shape("closed form components", n_psi, list.len()));
            }
            ClosedForm::parse(n_p, list).map(Some)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn falpv_round_trip_is_exact() {
        let m = FalpvModel::new(
            1,
            vec![dmatrix![0.1, 1.0 / 3.0; -2e-17, 5e300], dmatrix![0.0, 0.0; 0.0, 0.0]],
            vec![dmatrix![1.0; 0.0], dmatrix![0.0; std::f64::consts::PI]],
            vec![dmatrix![1.0, 0.0], dmatrix![0.0, 0.0]],
            vec![dmatrix![0.0], dmatrix![0.0]],
        )
        .unwrap();
        let file = ModelFile::Falpv(FalpvFile::from_model(&m, Some("demo".into())));
        let text = file.to_json().unwrap();
        let back = ModelFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        let ModelFile::Falpv(f) = back else { panic!() };
        assert_eq!(f.to_model().unwrap(), m);
    }

    #[test]
    fn empty_lft_round_trip() {
        let lft = LftModel::new(
            BlockStructure::new(vec![0, 0]).unwrap(),
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, 2),
            DMatrix::zeros(1, 0),
            dmatrix![1.0, 2.0],
        )
        .unwrap();
        let file = ModelFile::Lft(LftFile::from_model(&lft, None));
        let text = file.to_json().unwrap();
        let ModelFile::Lft(back) = ModelFile::from_json(&text).unwrap() else { panic!() };
        assert_eq!(back.to_model().unwrap(), lft);
    }

    #[test]
    fn shape_errors_are_reported() {
        let text = r#"{"kind":"lft","blocks":[1],"outputs":1,"inputs":1,
            "a":[[0.5]],"b":[[1.0]],"c":[[1.0, 2.0]],"d":[[0.0]]}"#;
        assert!(matches!(ModelFile::from_json(text), Err(Error::Shape { .. })));
        let text = r#"{"kind":"lft","blocks":[1],"outputs":1,"inputs":1,
            "a":[[0.5]],"b":[[1.0]],"c":[[1.0]],"d":[[0.0]],"extra":1}"#;
        assert!(matches!(ModelFile::from_json(text), Err(Error::Parse(_))));
        assert!(ModelFile::from_json(r#"{"kind":"banana"}"#).is_err());
    }

    #[test]
    fn taylor_file_with_closed_form() {
        let text = r#"{"kind":"psi-taylor","n_p":1,"n_psi":2,"depth":5,"order":2,
            "coefficients":[{"word":[1],"value":[1,0]},{"word":[1,1],"value":[0,1]}],
            "closed_form":["p1","p1^2"]}"#;
        let ModelFile::PsiTaylor(f) = ModelFile::from_json(text).unwrap() else { panic!() };
        let s = f.to_series().unwrap();
        assert_eq!(s.get(&Word::repeat(1, 2)).unwrap(), dmatrix![0.0; 1.0]);
        let cf = f.closed_form_evaluator().unwrap().unwrap();
        assert_eq!(cf.eval(&[0.5]).unwrap(), vec![0.5, 0.25]);
        let back = PsiTaylorFile::from_series(&s, Some(2), None).unwrap();
        assert_eq!(back.to_series().unwrap(), s);
    }

    #[test]
    fn closed_form_variable_range_checked() {
        let text = r#"{"kind":"psi-taylor","n_p":1,"n_psi":1,"depth":3,
            "coefficients":[],"closed_form":["p2"]}"#;
        assert!(ModelFile::from_json(text).is_err());
    }
}
