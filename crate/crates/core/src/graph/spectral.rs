use nalgebra::{DMatrix, DVector};

use super::network::Network;
use crate::error::{Error, Result};

const SIGN_EPS: f64 = 1e-10;

/// Flips `v` so that its first entry with magnitude above 1e-10 is positive.
fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Second-smallest Laplacian eigenvalue and its unit eigenvector.
pub fn fiedler_pair(g: &Network) -> Result<(f64, Vec<f64>)> {
    let n = g.n_vertices();
    if n < 2 {
        return Err(Error::Graph("Fiedler vector needs at least two vertices".into()));
    }
    if !g.is_connected() {
        return Err(Error::Graph("Fiedler vector of a disconnected graph".into()));
    }
    let eig = g.laplacian().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[1];
    let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    normalize_sign(&mut v);
    Ok((eig.eigenvalues[k], v))
}

/// Unit eigenvector of `L = D - A` for its second-smallest eigenvalue, with
/// its first non-negligible entry positive.
pub fn fiedler_vector(g: &Network) -> Result<Vec<f64>> {
    Ok(fiedler_pair(g)?.1)
}

/// `U_d Σ_d^{1/2}` from the SVD of a square matrix, singular values taken in
/// non-increasing order and each singular vector sign-normalized.
pub fn spectral_embedding(a: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if d == 0 || d > n {
        return Err(Error::Invalid(format!(
            "embedding dimension {d} outside 1..={n}"
        )));
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut out = DMatrix::zeros(n, d);
    for (c, &k) in order.iter().take(d).enumerate() {
        let mut col: Vec<f64> = u.column(k).iter().copied().collect();
        normalize_sign(&mut col);
        let s = svd.singular_values[k].max(0.0).sqrt();
        out.set_column(c, &(DVector::from_vec(col) * s));
    }
    Ok(out)
}

/// Adjacency spectral embedding: one `d`-dimensional row per vertex.
pub fn adjacency_spectral_embedding(g: &Network, d: usize) -> Result<DMatrix<f64>> {
    spectral_embedding(&g.adjacency(), d)
}
