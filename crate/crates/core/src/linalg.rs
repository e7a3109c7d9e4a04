//! Dense complex linear algebra shared by every module.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let mut m = zeros(values.len());
    for (k, v) in values.iter().enumerate() {
        m[(k, k)] = Complex64::new(*v, 0.0);
    }
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// ‖M − M†‖_F relative to ‖M‖_F (absolute when M vanishes).
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let diff = (m - m.adjoint()).norm();
    let scale = m.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// f(M) for Hermitian M through its eigendecomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let mut scaled = vectors.clone();
    for (col, v) in values.iter().enumerate() {
        let fv = f(*v);
        scaled.column_mut(col).scale_mut_complex(fv);
    }
    scaled * vectors.adjoint()
}

/// exp(−i 2π H t) for a Hermitian H in GHz and t in ns.
pub fn propagator(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_function(h, |e| Complex64::from_polar(1.0, -2.0 * PI * e * t))
}

/// General matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues from round-off are clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |v| Complex64::new(v.max(0.0).sqrt(), 0.0))
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, factor: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, factor: Complex64) {
        for x in self.iter_mut() {
            *x *= factor;
        }
    }
}

/// Column-stacking vectorisation.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Expectation ⟨v|M|v⟩ for a column vector.
pub fn expectation(m: &CMatrix, v: &nalgebra::DVector<Complex64>) -> Complex64 {
    (v.adjoint() * m * v)[(0, 0)]
}
