//! Gram matrices and the factorization test `G_in = G_out ∘ D`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{QuantumError, CERT_TOL, PSD_FLOOR, ZERO_TOL};

pub type State = DVector<C64>;
pub type Gram = DMatrix<C64>;

/// `G[i][j] = ⟨s_i|s_j⟩`.
pub fn gram(states: &[State]) -> Result<Gram, QuantumError> {
    let n = states.len();
    if let Some(first) = states.first() {
        let d = first.len();
        if let Some(bad) = states.iter().find(|s| s.len() != d) {
            return Err(QuantumError::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
    }
    Ok(Gram::from_fn(n, n, |i, j| states[i].dotc(&states[j])))
}

pub fn min_eigenvalue(m: &Gram) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn is_psd(m: &Gram) -> bool {
    min_eigenvalue(m) >= PSD_FLOOR
}

/// Why no unit-diagonal PSD `D` satisfies `G_in = G_out ∘ D`.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstruction {
    /// Outputs `i`, `j` are orthogonal but the inputs are not.
    OrthogonalOutputs { i: usize, j: usize, input_overlap: f64 },
    /// `|G_in[i][j]| > |G_out[i][j]|`; a residual overlap above 1 would be needed.
    OverlapGrows {
        i: usize,
        j: usize,
        input_overlap: f64,
        output_overlap: f64,
    },
    /// Every pairwise entry fits but no positive completion exists.
    NotPositive { min_eigenvalue: f64 },
}

#[derive(Debug, Clone)]
pub struct Factorization {
    /// Gram matrix of the constructor's residual states, when one exists.
    pub certificate: Option<Gram>,
    pub obstruction: Option<Obstruction>,
    /// `max_{i<j} |G_in[i][j]| − |G_out[i][j]|`. Positive values bound how far
    /// any physical attempt stays from the task; nonpositive when every pair
    /// is individually realizable.
    pub margin: f64,
}

impl Factorization {
    pub fn feasible(&self) -> bool {
        self.certificate.is_some()
    }
}

pub fn pairwise_margin(g_in: &Gram, g_out: &Gram) -> f64 {
    let n = g_in.nrows();
    let mut m = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(g_in[(i, j)].norm() - g_out[(i, j)].norm());
        }
    }
    if m == f64::NEG_INFINITY {
        0.0
    } else {
        m
    }
}

/// Looks for a Hermitian PSD `D` with unit diagonal and `G_in = G_out ∘ D`.
///
/// Entries where both Gram matrices vanish are free; they start at 0 and are
/// only moved if the zero completion is not positive.
pub fn factorize(g_in: &Gram, g_out: &Gram) -> Factorization {
    let n = g_in.nrows();
    assert_eq!(g_out.nrows(), n);
    let margin = pairwise_margin(g_in, g_out);
    let mut d = Gram::identity(n, n);
    let mut free = Vec::new();

    for i in 0..n {
        for j in i + 1..n {
            let gi = g_in[(i, j)];
            let go = g_out[(i, j)];
            if go.norm() < ZERO_TOL {
                if gi.norm() >= ZERO_TOL {
                    return Factorization {
                        certificate: None,
                        obstruction: Some(Obstruction::OrthogonalOutputs {
                            i,
                            j,
                            input_overlap: gi.norm(),
                        }),
                        margin,
                    };
                }
                free.push((i, j));
                continue;
            }
            let v = gi / go;
            if v.norm() > 1.0 + CERT_TOL {
                return Factorization {
                    certificate: None,
                    obstruction: Some(Obstruction::OverlapGrows {
                        i,
                        j,
                        input_overlap: gi.norm(),
                        output_overlap: go.norm(),
                    }),
                    margin,
                };
            }
            d[(i, j)] = v;
            d[(j, i)] = v.conj();
        }
    }

    let lam = min_eigenvalue(&d);
    if lam >= PSD_FLOOR {
        return Factorization {
            certificate: Some(d),
            obstruction: None,
            margin,
        };
    }
    if !free.is_empty() {
        if let Some(c) = complete_psd(&d, &free) {
            return Factorization {
                certificate: Some(c),
                obstruction: None,
                margin,
            };
        }
    }
    Factorization {
        certificate: None,
        obstruction: Some(Obstruction::NotPositive { min_eigenvalue: lam }),
        margin,
    }
}

/// Alternating projections between the PSD cone and the affine set of
/// matrices agreeing with `fixed` outside the `free` entries.
fn complete_psd(fixed: &Gram, free: &[(usize, usize)]) -> Option<Gram> {
    let n = fixed.nrows();
    let is_free = |i: usize, j: usize| free.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i));
    let mut x = fixed.clone();
    for _ in 0..5000 {
        let eig = x.clone().symmetric_eigen();
        let clamped = eig.eigenvalues.map(|l| if l < 0.0 { 0.0 } else { l });
        let mut p = &eig.eigenvectors
            * Gram::from_diagonal(&clamped.map(|l| C64::new(l, 0.0)))
            * eig.eigenvectors.adjoint();
        for i in 0..n {
            for j in 0..n {
                if !is_free(i, j) {
                    p[(i, j)] = fixed[(i, j)];
                }
            }
        }
        // Keep exact Hermitian symmetry on the free entries.
        for &(i, j) in free {
            let v = (p[(i, j)] + p[(j, i)].conj()) * 0.5;
            p[(i, j)] = v;
            p[(j, i)] = v.conj();
        }
        x = p;
        if min_eigenvalue(&x) >= PSD_FLOOR {
            return Some(x);
        }
    }
    None
}

/// Entrywise check `|G_in − G_out ∘ D| ≤ CERT_TOL`, plus the shape of `D`.
pub fn verify_certificate(g_in: &Gram, g_out: &Gram, d: &Gram) -> bool {
    let n = g_in.nrows();
    for i in 0..n {
        if (d[(i, i)] - C64::new(1.0, 0.0)).norm() > CERT_TOL {
            return false;
        }
        for j in 0..n {
            if (d[(i, j)] - d[(j, i)].conj()).norm() > CERT_TOL {
                return false;
            }
            if (g_in[(i, j)] - g_out[(i, j)] * d[(i, j)]).norm() > CERT_TOL {
                return false;
            }
        }
    }
    is_psd(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(v: &[f64]) -> State {
        State::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn orthonormal_pair_gives_identity() {
        let g = gram(&[ket(&[1.0, 0.0]), ket(&[0.0, 1.0])]).unwrap();
        assert!((g - Gram::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn plus_overlap() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = gram(&[ket(&[1.0, 0.0]), ket(&[h, h])]).unwrap();
        assert!((g[(0, 1)].re - h).abs() < 1e-15);
        assert!((g[(1, 0)].re - h).abs() < 1e-15);
    }

    #[test]
    fn single_state() {
        let g = gram(&[ket(&[0.6, 0.8])]).unwrap();
        assert_eq!(g.nrows(), 1);
        assert!((g[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            gram(&[ket(&[1.0]), ket(&[1.0, 0.0])]),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_completion_fails_but_search_succeeds() {
        // D12 = D23 = 0.9 fixed, D13 free: zero is not PSD, ~0.62 is.
        let c = |x: f64| C64::new(x, 0.0);
        let g_out = Gram::from_row_slice(3, 3, &[c(1.0), c(0.5), c(0.0), c(0.5), c(1.0), c(0.5), c(0.0), c(0.5), c(1.0)]);
        let g_in = Gram::from_row_slice(3, 3, &[c(1.0), c(0.45), c(0.0), c(0.45), c(1.0), c(0.45), c(0.0), c(0.45), c(1.0)]);
        let f = factorize(&g_in, &g_out);
        let d = f.certificate.expect("completion exists");
        assert!(verify_certificate(&g_in, &g_out, &d));
        assert!(d[(0, 2)].re > 0.5);
    }
}
