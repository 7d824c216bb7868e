//! Normalization and principal-component projection for chart output.
//!
//! Rows are z-scored per column, the sample covariance matrix is
//! eigen-decomposed, and the leading components give the 2-D coordinates
//! behind the cluster scatter chart.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Per-column mean and population standard deviation used for z-scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

fn check_rect(rows: &[Vec<f64>]) -> Result<usize, Error> {
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    for row in rows {
        if row.len() != width {
            return Err(Error::RaggedMatrix(width, row.len()));
        }
    }
    Ok(width)
}

/// Z-scores every column to mean 0 and population standard deviation 1.
/// Zero-variance columns map to all zeros. Needs at least two rows.
pub fn zscore_normalize(rows: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, ColumnStats), Error> {
    if rows.len() < 2 {
        return Err(Error::TooFewRows(rows.len()));
    }
    let width = check_rect(rows)?;
    let n = rows.len() as f64;
    let mut means = vec![0.0; width];
    for row in rows {
        for (m, x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut variances = vec![0.0; width];
    for row in rows {
        for ((v, x), m) in variances.iter_mut().zip(row).zip(&means) {
            *v += (x - m) * (x - m);
        }
    }
    let stddevs: Vec<f64> = variances.iter().map(|v| (v / n).sqrt()).collect();

    let normalized = rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, x)| {
                    if stddevs[j] > 0.0 {
                        (x - means[j]) / stddevs[j]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok((normalized, ColumnStats { means, stddevs }))
}

/// Ordered eigenpairs of the sample covariance matrix of normalized data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// Non-increasing, non-negative.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`; the largest-magnitude
    /// component of each is positive so charts are reproducible.
    pub components: Vec<Vec<f64>>,
}

/// Eigen-decomposes the sample covariance of an already-normalized matrix.
/// Tiny negative eigenvalues from floating-point round-off clamp to zero.
pub fn pca_fit(normalized: &[Vec<f64>]) -> Result<Pca, Error> {
    if normalized.len() < 2 {
        return Err(Error::TooFewRows(normalized.len()));
    }
    let width = check_rect(normalized)?;
    let n = normalized.len();

    let data = DMatrix::from_row_iterator(n, width, normalized.iter().flatten().copied());
    let means = data.row_mean();
    let mut centered = data;
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let covariance = centered.transpose() * &centered / (n as f64 - 1.0);

    let eigen = covariance.symmetric_eigen();
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .expect("covariance eigenvalues are finite")
    });

    let mut eigenvalues = Vec::with_capacity(width);
    let mut components = Vec::with_capacity(width);
    for &idx in &order {
        eigenvalues.push(eigen.eigenvalues[idx].max(0.0));
        let column = eigen.eigenvectors.column(idx);
        let mut vector: Vec<f64> = column.iter().copied().collect();
        let dominant = vector
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if vector[dominant] < 0.0 {
            for x in &mut vector {
                *x = -*x;
            }
        }
        components.push(vector);
    }
    Ok(Pca {
        eigenvalues,
        components,
    })
}

/// Projects normalized rows onto the top `k` components.
pub fn project(normalized: &[Vec<f64>], pca: &Pca, k: usize) -> Result<Vec<Vec<f64>>, Error> {
    if k > pca.components.len() {
        return Err(Error::InvalidComponentCount {
            requested: k,
            available: pca.components.len(),
        });
    }
    let width = check_rect(normalized)?;
    if pca.components.iter().any(|c| c.len() != width) {
        return Err(Error::RaggedMatrix(
            width,
            pca.components.first().map(|c| c.len()).unwrap_or(0),
        ));
    }
    Ok(normalized
        .iter()
        .map(|row| {
            let r = DVector::from_column_slice(row);
            pca.components[..k]
                .iter()
                .map(|component| r.dot(&DVector::from_column_slice(component)))
                .collect()
        })
        .collect())
}
