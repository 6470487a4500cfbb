//! `f(x) = x^T A x / 2 + b^T x + c` read from a whitespace-separated text file:
//!
//! ```text
//! # comments run to the end of the line
//! dim 2
//! 1 0        # n rows of A
//! 0 -2
//! 1 1        # b
//! 0          # c
//! 0.5 0.5    # optional start point
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::oracle::{symmetrize, Objective};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
    pub x1: Option<DVector<f64>>,
}

impl QuadraticProblem {
    /// Symmetrizes `a`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Self {
        Self {
            a: symmetrize(a),
            b,
            c,
            x1: None,
        }
    }

    pub fn start(&self) -> DVector<f64> {
        self.x1.clone().unwrap_or_else(|| DVector::zeros(self.b.len()))
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }
}

#[derive(Debug, Error)]
pub enum QuadraticParseError {
    #[error("line {line}: expected header `dim <n>`, found `{found}`")]
    BadHeader { line: usize, found: String },
    #[error("line {line}: {field}: cannot parse `{token}` as a number")]
    BadNumber {
        line: usize,
        field: String,
        token: String,
    },
    #[error("line {line}: {field}: expected {expected} values, found {found}")]
    WrongCount {
        line: usize,
        field: String,
        expected: usize,
        found: usize,
    },
    #[error("unexpected end of input while reading {field}")]
    UnexpectedEof { field: String },
    #[error("line {line}: unexpected trailing content")]
    Trailing { line: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub fn load_quadratic(path: impl AsRef<Path>) -> Result<QuadraticProblem, QuadraticParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| QuadraticParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_quadratic(&text)
}

fn parse_row(
    line: usize,
    content: &str,
    field: &str,
    expected: usize,
) -> Result<Vec<f64>, QuadraticParseError> {
    let values = content
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| QuadraticParseError::BadNumber {
                line,
                field: field.to_string(),
                token: tok.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(QuadraticParseError::WrongCount {
            line,
            field: field.to_string(),
            expected,
            found: values.len(),
        });
    }
    Ok(values)
}

pub fn parse_quadratic(text: &str) -> Result<QuadraticProblem, QuadraticParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, content)| !content.is_empty());
    let mut next = |field: &str| {
        lines.next().ok_or_else(|| QuadraticParseError::UnexpectedEof {
            field: field.to_string(),
        })
    };

    let (line, header) = next("header")?;
    let bad_header = || QuadraticParseError::BadHeader {
        line,
        found: header.to_string(),
    };
    let mut parts = header.split_whitespace();
    if parts.next() != Some("dim") {
        return Err(bad_header());
    }
    let n = parts
        .next()
        .and_then(|t| t.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(bad_header)?;
    if parts.next().is_some() {
        return Err(bad_header());
    }

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let field = format!("row {} of A", i + 1);
        let (line, content) = next(&field)?;
        for (j, v) in parse_row(line, content, &field, n)?.into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let (line, content) = next("b")?;
    let b = DVector::from_vec(parse_row(line, content, "b", n)?);
    let (line, content) = next("c")?;
    let c = parse_row(line, content, "c", 1)?[0];

    let mut problem = QuadraticProblem::new(a, b, c);
    if let Ok((line, content)) = next("x1") {
        problem.x1 = Some(DVector::from_vec(parse_row(line, content, "x1", n)?));
        if let Ok((line, _)) = next("") {
            return Err(QuadraticParseError::Trailing { line });
        }
    }
    Ok(problem)
}
