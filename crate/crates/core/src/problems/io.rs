use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeasibleSet, LocalOperator, Piece, ProblemInstance, ProblemMeta};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LocalRecord {
    Bilinear {
        rows: usize,
        cols: usize,
        /// Row-major entries of `A`.
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
    },
    Regularized {
        base: Box<LocalRecord>,
        mu: f64,
        anchor: Vec<f64>,
    },
    LowerBoundPiece {
        piece: Piece,
        l: f64,
        mu: f64,
        scale: f64,
        n: usize,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemRecord {
    meta: ProblemMeta,
    set: FeasibleSet,
    locals: Vec<LocalRecord>,
}

fn to_record(op: &LocalOperator) -> LocalRecord {
    match op {
        LocalOperator::Bilinear { a, b, c } => LocalRecord::Bilinear {
            rows: a.nrows(),
            cols: a.ncols(),
            a: a.transpose().iter().copied().collect(),
            b: b.iter().copied().collect(),
            c: c.iter().copied().collect(),
        },
        LocalOperator::Regularized { base, mu, anchor } => LocalRecord::Regularized {
            base: Box::new(to_record(base)),
            mu: *mu,
            anchor: anchor.iter().copied().collect(),
        },
        LocalOperator::LowerBoundPiece {
            piece,
            l,
            mu,
            scale,
            n,
        } => LocalRecord::LowerBoundPiece {
            piece: *piece,
            l: *l,
            mu: *mu,
            scale: *scale,
            n: *n,
        },
    }
}

fn from_record(rec: LocalRecord) -> Result<LocalOperator> {
    Ok(match rec {
        LocalRecord::Bilinear { rows, cols, a, b, c } => {
            if a.len() != rows * cols {
                return Err(Error::Parse(format!(
                    "matrix has {} entries, expected {rows}x{cols}",
                    a.len()
                )));
            }
            LocalOperator::bilinear(
                DMatrix::from_row_slice(rows, cols, &a),
                DVector::from_vec(b),
                DVector::from_vec(c),
            )?
        }
        LocalRecord::Regularized { base, mu, anchor } => {
            let base = from_record(*base)?;
            if anchor.len() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    got: anchor.len(),
                });
            }
            LocalOperator::Regularized {
                base: Box::new(base),
                mu,
                anchor: DVector::from_vec(anchor),
            }
        }
        LocalRecord::LowerBoundPiece {
            piece,
            l,
            mu,
            scale,
            n,
        } => LocalOperator::LowerBoundPiece {
            piece,
            l,
            mu,
            scale,
            n,
        },
    })
}

/// JSON document with a `meta` block, the feasible set and row-major matrices.
pub fn problem_to_json(problem: &ProblemInstance) -> Result<String> {
    let rec = ProblemRecord {
        meta: problem.meta().clone(),
        set: problem.set().clone(),
        locals: problem.locals().iter().map(to_record).collect(),
    };
    Ok(serde_json::to_string_pretty(&rec)?)
}

pub fn problem_from_json(text: &str) -> Result<ProblemInstance> {
    let rec: ProblemRecord = serde_json::from_str(text)?;
    let locals = rec
        .locals
        .into_iter()
        .map(from_record)
        .collect::<Result<Vec<_>>>()?;
    ProblemInstance::new(locals, rec.set, rec.meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_bilinear, regularize_with_modulus};
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn round_trip_is_exact() {
        let p = gen_bilinear(3, 2, 10.0, 1.0, 5).unwrap();
        let r = regularize_with_modulus(&p, 0.25, &DVector::from_element(6, 0.5)).unwrap();
        for inst in [p, r] {
            let back = problem_from_json(&problem_to_json(&inst).unwrap()).unwrap();
            assert_eq!(back, inst);
        }
    }

    #[test]
    fn matrices_are_row_major() {
        let op = LocalOperator::bilinear(dmatrix![1.0, 2.0; 3.0, 4.0], dvector![0.0, 0.0], dvector![0.0, 0.0])
            .unwrap();
        let p = ProblemInstance::with_exact_constants(vec![op], FeasibleSet::unconstrained(4), 0.0, 0.0)
            .unwrap();
        let json: serde_json::Value = serde_json::from_str(&problem_to_json(&p).unwrap()).unwrap();
        assert_eq!(json["locals"][0]["a"], serde_json::json!([1.0, 2.0, 3.0, 4.0]));
        assert_eq!(json["set"]["kind"], "unconstrained");
    }

    #[test]
    fn malformed_matrix_rejected() {
        let text = r#"{"meta":{"l":1,"l_max":1,"mu":0,"sigma2":0,"heterogeneity":null},
            "set":{"kind":"unconstrained","dim":2},
            "locals":[{"type":"bilinear","rows":1,"cols":1,"a":[1,2],"b":[0],"c":[0]}]}"#;
        assert!(matches!(problem_from_json(text), Err(Error::Parse(_))));
    }
}
