//! Two-sided linear measurement operators `C(X) = C_x X C_y^H`.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::model::{complex_gaussian, trial_rng};

/// Ensemble that produced an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompressionKind {
    Identity,
    /// i.i.d. ±1/√K entries.
    Bernoulli,
    /// i.i.d. circular complex Gaussian entries of variance 1/K.
    Gaussian,
    /// Distinct rows of the identity.
    RowSelect,
    /// `C_x = I`, `C_y` from a pilot block (`Y = X P` ⇔ `C_y = P^H`).
    Pilot,
}

impl std::str::FromStr for CompressionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "identity" => Ok(CompressionKind::Identity),
            "bernoulli" => Ok(CompressionKind::Bernoulli),
            "gaussian" => Ok(CompressionKind::Gaussian),
            "select" | "row_select" => Ok(CompressionKind::RowSelect),
            "pilot" => Ok(CompressionKind::Pilot),
            other => Err(Error::Domain(format!("unknown compression kind '{other}'"))),
        }
    }
}

/// The operator `X ↦ C_x X C_y^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionOperator {
    cx: ComplexMatrix,
    cy: ComplexMatrix,
    kind: CompressionKind,
}

impl CompressionOperator {
    pub fn identity(n: usize, m: usize) -> Self {
        Self { cx: ComplexMatrix::identity(n), cy: ComplexMatrix::identity(m), kind: CompressionKind::Identity }
    }

    /// Operator from explicit factors.
    pub fn from_matrices(cx: ComplexMatrix, cy: ComplexMatrix, kind: CompressionKind) -> Result<Self> {
        if cx.rows() == 0 || cy.rows() == 0 || cx.rows() > cx.cols() || cy.rows() > cy.cols() {
            return Err(Error::Domain(format!(
                "factors {:?} and {:?} do not compress",
                cx.shape(),
                cy.shape()
            )));
        }
        Ok(Self { cx, cy, kind })
    }

    /// Keeps the given rows (x) and columns (y) of the data matrix.
    pub fn row_select(n: usize, m: usize, rows_x: &[usize], rows_y: &[usize]) -> Result<Self> {
        let sel = |dim: usize, rows: &[usize]| -> Result<ComplexMatrix> {
            if rows.is_empty() || rows.iter().any(|&r| r >= dim) {
                return Err(Error::Domain(format!("row selection {rows:?} invalid for dimension {dim}")));
            }
            Ok(ComplexMatrix::from_fn(rows.len(), dim, |i, j| C64::new(if rows[i] == j { 1.0 } else { 0.0 }, 0.0)))
        };
        Self::from_matrices(sel(n, rows_x)?, sel(m, rows_y)?, CompressionKind::RowSelect)
    }

    /// Pilot model `Y = X P` with `P` of size `M x K`.
    pub fn pilot(n: usize, pilots: &ComplexMatrix) -> Result<Self> {
        Self::from_matrices(ComplexMatrix::identity(n), pilots.adjoint(), CompressionKind::Pilot)
    }

    pub fn cx(&self) -> &ComplexMatrix {
        &self.cx
    }

    pub fn cy(&self) -> &ComplexMatrix {
        &self.cy
    }

    pub fn kind(&self) -> CompressionKind {
        self.kind
    }

    /// `(N, M)`.
    pub fn input_dims(&self) -> (usize, usize) {
        (self.cx.cols(), self.cy.cols())
    }

    /// `(K_x, K_y)`.
    pub fn output_dims(&self) -> (usize, usize) {
        (self.cx.rows(), self.cy.rows())
    }

    /// `ρ = K_x K_y / (N M)`.
    pub fn ratio(&self) -> f64 {
        let (kx, ky) = self.output_dims();
        let (n, m) = self.input_dims();
        (kx * ky) as f64 / (n * m) as f64
    }

    pub fn is_identity(&self) -> bool {
        self.kind == CompressionKind::Identity
    }

    /// `C_x X C_y^H`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != self.input_dims() {
            return Err(Error::Dimension(format!("operator expects {:?}, got {:?}", self.input_dims(), x.shape())));
        }
        if self.is_identity() {
            return Ok(x.clone());
        }
        Ok(self.cx.matmul(x).matmul_adjoint(&self.cy))
    }

    /// `C_x^H Y C_y`.
    pub fn adjoint(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if y.shape() != self.output_dims() {
            return Err(Error::Dimension(format!("adjoint expects {:?}, got {:?}", self.output_dims(), y.shape())));
        }
        if self.is_identity() {
            return Ok(y.clone());
        }
        Ok(self.cx.adjoint_matmul(y).matmul(&self.cy))
    }
}

/// Draws an operator of the requested ensemble. `Pilot` draws unit-modulus
/// random-phase pilots.
pub fn make_operator(
    kind: CompressionKind,
    n: usize,
    m: usize,
    kx: usize,
    ky: usize,
    seed: u64,
) -> Result<CompressionOperator> {
    let mut rng = trial_rng(seed, 0);
    make_operator_with(kind, n, m, kx, ky, &mut rng)
}

pub fn make_operator_with<R: Rng + ?Sized>(
    kind: CompressionKind,
    n: usize,
    m: usize,
    kx: usize,
    ky: usize,
    rng: &mut R,
) -> Result<CompressionOperator> {
    if kx == 0 || ky == 0 || kx > n || ky > m {
        return Err(Error::Domain(format!("need 1 ≤ kx ≤ {n} and 1 ≤ ky ≤ {m}, got kx={kx}, ky={ky}")));
    }
    match kind {
        CompressionKind::Identity => {
            if kx != n || ky != m {
                return Err(Error::Domain("identity operator requires kx = n and ky = m".into()));
            }
            Ok(CompressionOperator::identity(n, m))
        }
        CompressionKind::Bernoulli => {
            let mut draw = |k: usize, d: usize| {
                let s = 1.0 / (k as f64).sqrt();
                ComplexMatrix::from_fn(k, d, |_, _| C64::new(if rng.gen::<bool>() { s } else { -s }, 0.0))
            };
            let cx = draw(kx, n);
            let cy = draw(ky, m);
            CompressionOperator::from_matrices(cx, cy, kind)
        }
        CompressionKind::Gaussian => {
            let mut draw = |k: usize, d: usize| {
                let s = 1.0 / (k as f64).sqrt();
                ComplexMatrix::from_fn(k, d, |_, _| complex_gaussian(rng) * s)
            };
            let cx = draw(kx, n);
            let cy = draw(ky, m);
            CompressionOperator::from_matrices(cx, cy, kind)
        }
        CompressionKind::RowSelect => {
            let mut rows = |d: usize, k: usize| {
                let mut r = sample(rng, d, k).into_vec();
                r.sort_unstable();
                r
            };
            let rx = rows(n, kx);
            let ry = rows(m, ky);
            CompressionOperator::row_select(n, m, &rx, &ry)
        }
        CompressionKind::Pilot => {
            let p = ComplexMatrix::from_fn(m, ky, |_, _| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.gen::<f64>()));
            if kx != n {
                return Err(Error::Domain("pilot model keeps all rows (kx = n)".into()));
            }
            CompressionOperator::pilot(n, &p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{atom, steering_vector, FrequencyPair};

    fn probe(r: usize, c: usize, seed: u64) -> ComplexMatrix {
        let mut rng = trial_rng(seed, 7);
        ComplexMatrix::from_fn(r, c, |_, _| complex_gaussian(&mut rng))
    }

    #[test]
    fn identity_and_selection() {
        let x = probe(5, 4, 1);
        let id = make_operator(CompressionKind::Identity, 5, 4, 5, 4, 0).unwrap();
        assert_eq!(id.apply(&x).unwrap(), x);
        assert_eq!(id.adjoint(&id.apply(&x).unwrap()).unwrap(), x);
        let sel = CompressionOperator::row_select(5, 4, &[0, 1, 2], &[0, 1]).unwrap();
        assert_eq!(sel.apply(&x).unwrap(), x.submatrix(0, 0, 3, 2));
        assert!((sel.ratio() - 6.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(make_operator(CompressionKind::Bernoulli, 4, 4, 5, 2, 0), Err(Error::Domain(_))));
        let op = make_operator(CompressionKind::Gaussian, 4, 4, 2, 2, 0).unwrap();
        assert!(matches!(op.apply(&probe(3, 4, 0)), Err(Error::Dimension(_))));
    }

    #[test]
    fn adjoint_identity_on_random_probes() {
        for kind in [CompressionKind::Bernoulli, CompressionKind::Gaussian, CompressionKind::RowSelect] {
            let op = make_operator(kind, 8, 6, 5, 3, 11).unwrap();
            let x = probe(8, 6, 2);
            let y = probe(5, 3, 3);
            let lhs = op.apply(&x).unwrap().inner(&y);
            let rhs = x.inner(&op.adjoint(&y).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn compressed_atom_factorizes() {
        let op = make_operator(CompressionKind::Gaussian, 8, 8, 4, 5, 5).unwrap();
        let f = FrequencyPair::new(0.3, 0.8).unwrap();
        let lhs = op.apply(&atom(8, 8, f)).unwrap();
        let ax = op.cx().matmul(&steering_vector(8, 0.3).unwrap());
        let ay = op.cy().matmul(&steering_vector(8, 0.8).unwrap());
        assert!((&lhs - &ax.matmul_adjoint(&ay)).max_abs() < 1e-12);
    }

    #[test]
    fn linearity() {
        let op = make_operator(CompressionKind::Bernoulli, 6, 6, 3, 4, 9).unwrap();
        let (x1, x2) = (probe(6, 6, 1), probe(6, 6, 2));
        let a = C64::new(0.3, -1.2);
        let lhs = op.apply(&(&x1.scale(a) + &x2)).unwrap();
        let rhs = &op.apply(&x1).unwrap().scale(a) + &op.apply(&x2).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-12);
    }

    #[test]
    fn pilot_model_right_multiplies() {
        let p = probe(4, 3, 8);
        let op = CompressionOperator::pilot(5, &p).unwrap();
        let x = probe(5, 4, 4);
        assert!((&op.apply(&x).unwrap() - &x.matmul(&p)).max_abs() < 1e-12);
    }

    #[test]
    fn bernoulli_rows_are_isotropic() {
        // rows rescaled to the data length satisfy E[ĉĉ^H] = I/N
        let (n, kx) = (512usize, 64usize);
        let block = 16;
        let draws = 10_000;
        let mut acc = vec![C64::new(0.0, 0.0); block * block];
        let mut seen = 0;
        let mut seed = 0;
        while seen < draws {
            let op = make_operator(CompressionKind::Bernoulli, n, 1, kx, 1, seed).unwrap();
            seed += 1;
            for r in 0..kx {
                if seen == draws {
                    break;
                }
                let scale = (kx as f64 / n as f64).sqrt();
                for i in 0..block {
                    for j in 0..block {
                        acc[i * block + j] += op.cx()[(r, i)] * op.cx()[(r, j)].conj() * (scale * scale);
                    }
                }
                seen += 1;
            }
        }
        let se = (1.0 / n as f64) / (draws as f64).sqrt();
        for i in 0..block {
            for j in 0..block {
                let mean = acc[i * block + j] / draws as f64;
                let expect = if i == j { 1.0 / n as f64 } else { 0.0 };
                assert!((mean - expect).norm() <= 4.5 * se, "({i},{j}) {mean}");
            }
        }
    }
}
