//! Spectra of finite unitary and Hermitian matrices as multisets over the
//! circle or line modulo a designated essential set, Schatten norms, and
//! numerical checks of the eigenvalue perturbation bounds.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::error::{Error, Result};
use crate::multiset::{distance_phi, Multiset};
use crate::norms::NormSpec;
use crate::quotient::CompactSet;
use crate::space::{wrap_angle, Ambient, BasedSpace};
use crate::TOL_BASE;

pub type CMatrix = DMatrix<Complex64>;

const KIND_TOL: f64 = 1e-10;
const NORMAL_TOL: f64 = 1e-8;
const SCHUR_EPS: [f64; 4] = [1e-15, 1e-14, 1e-13, 1e-12];
const SCHUR_MAX_ITER: usize = 10_000;

/// Row-major `[[re, im], ...]` rows.
pub mod matrix_json {
    use super::{CMatrix, Complex64};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
        m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, String> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMatrix::from_fn(n, cols, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(to_rows(m))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(ms.len()))?;
            for m in ms {
                seq.serialize_element(&to_rows(m))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
            let all = Vec::<Vec<Vec<[f64; 2]>>>::deserialize(d)?;
            all.iter().map(|r| from_rows(r).map_err(D::Error::custom)).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Unitary,
    Hermitian,
}

/// Finite-dimensional stand-in for `U₀ + Schatten class` (or `H₀ + ...`):
/// the whole spectrum of the reference is declared essential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorModel {
    pub dimension: usize,
    pub kind: OperatorKind,
    #[serde(with = "matrix_json")]
    pub reference: CMatrix,
    pub essential_set: CompactSet,
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn kind_defect(a: &CMatrix, kind: OperatorKind) -> f64 {
    match kind {
        OperatorKind::Unitary => {
            frobenius(&(a.adjoint() * a - CMatrix::identity(a.nrows(), a.ncols())))
        }
        OperatorKind::Hermitian => frobenius(&(a - a.adjoint())),
    }
}

/// `‖A*A − AA*‖_F`.
pub fn normality_defect(a: &CMatrix) -> f64 {
    let adj = a.adjoint();
    frobenius(&(&adj * a - a * &adj))
}

impl OperatorModel {
    pub fn new(kind: OperatorKind, reference: CMatrix, essential_set: CompactSet) -> Result<Self> {
        if !reference.is_square() || reference.nrows() == 0 {
            return Err(Error::Parameter("reference must be a nonempty square matrix".into()));
        }
        let defect = kind_defect(&reference, kind);
        if defect > KIND_TOL {
            return Err(Error::Parameter(format!("reference is not {kind:?} (defect {defect:e})")));
        }
        let expected = match kind {
            OperatorKind::Unitary => Ambient::Circle,
            OperatorKind::Hermitian => Ambient::Line,
        };
        if essential_set.ambient() != expected {
            return Err(Error::Parameter("essential set lives in the wrong space".into()));
        }
        let model = OperatorModel { dimension: reference.nrows(), kind, reference, essential_set };
        for x in model.raw_spectrum(&model.reference)? {
            if model.essential_set.distance_to(x) > TOL_BASE {
                return Err(Error::Parameter(format!(
                    "reference eigenvalue {x} lies outside the essential set"
                )));
            }
        }
        Ok(model)
    }

    /// `U₀ = I` with essential set `{1}`.
    pub fn unitary_identity(d: usize) -> Self {
        OperatorModel {
            dimension: d,
            kind: OperatorKind::Unitary,
            reference: CMatrix::identity(d, d),
            essential_set: CompactSet::point(Ambient::Circle, 0.0),
        }
    }

    /// `H₀ = 0` with essential set `{0}`.
    pub fn hermitian_zero(d: usize) -> Self {
        OperatorModel {
            dimension: d,
            kind: OperatorKind::Hermitian,
            reference: CMatrix::zeros(d, d),
            essential_set: CompactSet::point(Ambient::Line, 0.0),
        }
    }

    /// Space the spectra live in: the plain circle/line when the essential
    /// set is a single point, the quotient otherwise.
    pub fn spectrum_space(&self) -> BasedSpace {
        match (self.essential_set.as_point(), self.kind) {
            (Some(x), OperatorKind::Unitary) => BasedSpace::circle(x),
            (Some(x), OperatorKind::Hermitian) => BasedSpace::line(x),
            (None, _) => BasedSpace::quotient(self.essential_set.clone()),
        }
    }

    fn check(&self, a: &CMatrix) -> Result<()> {
        if a.nrows() != self.dimension || a.ncols() != self.dimension {
            return Err(Error::Parameter(format!(
                "expected {d}×{d}, got {}×{}",
                a.nrows(),
                a.ncols(),
                d = self.dimension
            )));
        }
        let defect = normality_defect(a);
        if defect > NORMAL_TOL {
            return Err(Error::NotNormal(defect));
        }
        let defect = kind_defect(a, self.kind);
        if defect > NORMAL_TOL {
            return Err(Error::Parameter(format!("matrix is not {:?} (defect {defect:e})", self.kind)));
        }
        Ok(())
    }

    /// Eigenvalue coordinates: angles in `[0, 2π)` or real eigenvalues.
    fn raw_spectrum(&self, a: &CMatrix) -> Result<Vec<f64>> {
        match self.kind {
            OperatorKind::Unitary => unitary_angles(a),
            OperatorKind::Hermitian => Ok(hermitian_eigenvalues(a)),
        }
    }
}

/// Complex Schur form `(Q, T)`. Near-scalar matrices carrying rounding
/// noise can stall at the tightest tolerance, so it is relaxed step by step.
fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    SCHUR_EPS
        .iter()
        .find_map(|&eps| Schur::try_new(a.clone(), eps, SCHUR_MAX_ITER))
        .map(Schur::unpack)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))
}

/// Eigenvalues of a square complex matrix from its complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigen-angles of a unitary matrix, after checking each eigenvalue lies
/// within 1e-8 of the circle and projecting it radially.
pub fn unitary_angles(a: &CMatrix) -> Result<Vec<f64>> {
    eigenvalues(a)?
        .into_iter()
        .map(|z| {
            if (z.norm() - 1.0).abs() > 1e-8 {
                Err(Error::Numeric(format!("eigenvalue {z} is off the unit circle")))
            } else {
                Ok(wrap_angle(z.arg()))
            }
        })
        .collect()
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()).scale(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Spectrum of `a` as a multiset modulo the model's essential set.
pub fn operator_spectrum(a: &CMatrix, model: &OperatorModel) -> Result<Multiset> {
    model.check(a)?;
    let coords = model.raw_spectrum(a)?;
    Multiset::from_points(model.spectrum_space(), &coords)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    SVD::new(a.clone(), false, false).singular_values.iter().copied().collect()
}

/// Schatten p-norm: Φ_p of the singular values.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    NormSpec::p(p)?.eval(&singular_values(a))
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    fn new(lhs: f64, rhs: f64) -> Self {
        Check { lhs, rhs, holds: lhs <= rhs + 1e-9 }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `d_p(σ(U), σ(V)) ≤ (π/2)‖U − V‖_p`.
pub fn verify_bhatia_sinha(u: &CMatrix, v: &CMatrix, p: f64, model: &OperatorModel) -> Result<Check> {
    if model.kind != OperatorKind::Unitary {
        return Err(Error::Parameter("unitary model required".into()));
    }
    let spec = NormSpec::p(p)?;
    let lhs = distance_phi(&operator_spectrum(u, model)?, &operator_spectrum(v, model)?, spec)?;
    let rhs = FRAC_PI_2 * schatten_norm(&(u - v), p)?;
    Ok(Check::new(lhs, rhs))
}

/// `d_p(σ(H), σ(G)) ≤ ‖H − G‖_p` over the line modulo the essential set.
pub fn verify_kato_selfadjoint(h: &CMatrix, g: &CMatrix, p: f64, model: &OperatorModel) -> Result<Check> {
    if model.kind != OperatorKind::Hermitian {
        return Err(Error::Parameter("Hermitian model required".into()));
    }
    let spec = NormSpec::p(p)?;
    let lhs = distance_phi(&operator_spectrum(h, model)?, &operator_spectrum(g, model)?, spec)?;
    let rhs = schatten_norm(&(h - g), p)?;
    Ok(Check::new(lhs, rhs))
}

/// `min_π (Σ|λ_i − μ_π(i)|²)^{1/2} ≤ ‖N − M‖_2` for normal `N`, `M`.
pub fn verify_hoffman_wielandt(n: &CMatrix, m: &CMatrix) -> Result<Check> {
    if n.shape() != m.shape() || !n.is_square() {
        return Err(Error::Parameter("matrices must be square of equal size".into()));
    }
    for a in [n, m] {
        let defect = normality_defect(a);
        if defect > NORMAL_TOL {
            return Err(Error::NotNormal(defect));
        }
    }
    let (ln, lm) = (eigenvalues(n)?, eigenvalues(m)?);
    let cost: Vec<Vec<f64>> = ln.iter().map(|a| lm.iter().map(|b| (a - b).norm_sqr()).collect()).collect();
    let lhs = assignment::min_sum(&cost).total(&cost).sqrt();
    let rhs = schatten_norm(&(n - m), 2.0)?;
    Ok(Check::new(lhs, rhs))
}

/// How to build a sampled operator path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum Recipe {
    /// `U(t) = U₀·exp(2πi t A)`; a loop when `A` has integer spectrum.
    ExpLoop {
        #[serde(with = "matrix_json")]
        generator: CMatrix,
    },
    /// `U(t) = U₀·V exp(2πi t D) V*·exp(i H(t))` with random unitary `V`,
    /// random integer diagonal `D` (entries in `[-max_winding, max_winding]`)
    /// and a trigonometric Hermitian loop `H` with `H(0) = H(1) = 0`.
    RandomLoop {
        seed: u64,
        amplitude: f64,
        #[serde(default)]
        max_winding: u32,
    },
    /// Geodesic `U(t) = U_s·exp(t·log(U_s* U_e))`.
    Segment {
        #[serde(with = "matrix_json")]
        start: CMatrix,
        #[serde(with = "matrix_json")]
        end: CMatrix,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledOperatorPath {
    pub model: OperatorModel,
    pub params: Vec<f64>,
    #[serde(with = "matrix_json::vec")]
    pub matrices: Vec<CMatrix>,
}

impl SampledOperatorPath {
    pub fn new(model: OperatorModel, params: Vec<f64>, matrices: Vec<CMatrix>) -> Result<Self> {
        let path = SampledOperatorPath { model, params, matrices };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.len() != self.matrices.len() || self.params.len() < 2 {
            return Err(Error::Parameter("need matching params and at least two matrices".into()));
        }
        if self.params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Parameter("parameters must be strictly increasing".into()));
        }
        for (j, a) in self.matrices.iter().enumerate() {
            if a.shape() != (self.model.dimension, self.model.dimension) {
                return Err(Error::Parameter(format!("matrix {j} has the wrong shape")));
            }
            let defect = kind_defect(a, self.model.kind);
            if defect > KIND_TOL {
                return Err(Error::Parameter(format!(
                    "matrix {j} is not {:?} (defect {defect:e})",
                    self.model.kind
                )));
            }
        }
        Ok(())
    }

    pub fn spectra(&self) -> Result<Vec<Multiset>> {
        self.matrices.iter().map(|a| operator_spectrum(a, &self.model)).collect()
    }

    /// Time-reversed path on the same parameter grid.
    pub fn reversed(&self) -> Self {
        let mut matrices = self.matrices.clone();
        matrices.reverse();
        let (a, b) = (self.params[0], *self.params.last().unwrap());
        let params = self.params.iter().rev().map(|t| a + b - t).collect();
        SampledOperatorPath { model: self.model.clone(), params, matrices }
    }

    /// `self` followed by `other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.model != other.model {
            return Err(Error::Parameter("paths use different operator models".into()));
        }
        let end = self.matrices.last().unwrap();
        if frobenius(&(end - &other.matrices[0])) > 1e-10 {
            return Err(Error::Parameter("paths are not concatenable".into()));
        }
        let shift = self.params.last().unwrap() - other.params[0];
        let mut params = self.params.clone();
        params.extend(other.params[1..].iter().map(|t| t + shift));
        let mut matrices = self.matrices.clone();
        matrices.extend(other.matrices[1..].iter().cloned());
        Ok(SampledOperatorPath { model: self.model.clone(), params, matrices })
    }
}

/// `exp(i·s·H)` for Hermitian `H` through its eigendecomposition.
pub fn exp_i_hermitian(h: &CMatrix, s: f64) -> CMatrix {
    let eig = SymmetricEigen::new((h + h.adjoint()).scale(0.5));
    let q = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, s * l)));
    q * phases * q.adjoint()
}

/// Principal logarithm of a unitary matrix, `i·Q diag(arg λ) Q*`.
pub fn log_unitary(u: &CMatrix) -> Result<CMatrix> {
    let (q, t) = schur(u)?;
    let logs = CMatrix::from_diagonal(&t.diagonal().map(|z| Complex64::new(0.0, z.arg())));
    Ok(&q * logs * q.adjoint())
}

fn grid(steps: usize) -> Vec<f64> {
    (0..steps).map(|j| j as f64 / (steps - 1) as f64).collect()
}

/// Samples `recipe` at `steps` equally spaced parameters in `[0, 1]`.
pub fn generate_path(recipe: &Recipe, model: &OperatorModel, steps: usize) -> Result<SampledOperatorPath> {
    if steps < 2 {
        return Err(Error::Parameter("need at least two steps".into()));
    }
    if model.kind != OperatorKind::Unitary {
        return Err(Error::Parameter("path recipes produce unitary paths".into()));
    }
    let d = model.dimension;
    let params = grid(steps);
    let u0 = &model.reference;
    let matrices = match recipe {
        Recipe::ExpLoop { generator } => {
            if generator.shape() != (d, d) {
                return Err(Error::Parameter("generator has the wrong shape".into()));
            }
            let defect = kind_defect(generator, OperatorKind::Hermitian);
            if defect > KIND_TOL {
                return Err(Error::Parameter(format!("generator is not Hermitian (defect {defect:e})")));
            }
            params.iter().map(|t| u0 * exp_i_hermitian(generator, TAU * t)).collect()
        }
        Recipe::RandomLoop { seed, amplitude, max_winding } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let v = random_unitary(d, &mut rng);
            let w = *max_winding as i64;
            let windings = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
                Complex64::new(rng.random_range(-w..=w) as f64, 0.0)
            }));
            let generator = &v * windings * v.adjoint();
            let modes: Vec<(CMatrix, CMatrix)> = (0..3)
                .map(|_| (random_hermitian(d, &mut rng), random_hermitian(d, &mut rng)))
                .collect();
            params
                .iter()
                .map(|&t| {
                    let mut h = CMatrix::zeros(d, d);
                    for (k, (a, b)) in modes.iter().enumerate() {
                        let f = TAU * (k + 1) as f64 * t;
                        h += a.scale(f.sin() / (k + 1) as f64);
                        h += b.scale((f.cos() - 1.0) / (k + 1) as f64);
                    }
                    u0 * exp_i_hermitian(&generator, TAU * t) * exp_i_hermitian(&h, *amplitude)
                })
                .collect()
        }
        Recipe::Segment { start, end } => {
            for m in [start, end] {
                if m.shape() != (d, d) || kind_defect(m, OperatorKind::Unitary) > KIND_TOL {
                    return Err(Error::Parameter("segment endpoints must be unitary".into()));
                }
            }
            let log = log_unitary(&(start.adjoint() * end))?;
            // log is i·(Hermitian); recover the Hermitian part for exp
            let h = log.map(|z| Complex64::new(z.im, -z.re));
            params.iter().map(|t| start * exp_i_hermitian(&h, *t)).collect()
        }
    };
    SampledOperatorPath::new(model.clone(), params, matrices)
}

fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&r.diagonal().map(|z| {
        let n = z.norm();
        if n == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            z / n
        }
    }));
    q * phases
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(d, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// `Q diag(λ) Q*` with Haar `Q` and complex Gaussian `λ`.
pub fn random_normal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let q = random_unitary(d, rng);
    let lambda = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }));
    &q * lambda * q.adjoint()
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

pub fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Largest singular value by power iteration on `A*A`.
    fn power_norm(a: &CMatrix) -> f64 {
        let ata = a.adjoint() * a;
        let mut x = nalgebra::DVector::from_fn(a.ncols(), |i, _| re(1.0 + i as f64 * 0.37));
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let y = &ata * &x;
            let n = y.norm();
            if n == 0.0 {
                return 0.0;
            }
            lambda = n;
            x = y / re(n);
        }
        lambda.sqrt()
    }

    #[test]
    fn identity_has_trivial_spectrum() {
        let model = OperatorModel::unitary_identity(3);
        assert!(operator_spectrum(&CMatrix::identity(3, 3), &model).unwrap().is_trivial());
        assert_eq!(model.spectrum_space(), BasedSpace::circle(0.0));
    }

    #[test]
    fn diagonal_read_off() {
        let model = OperatorModel::unitary_identity(3);
        let a = diag(&[phase(FRAC_PI_2), re(1.0), re(1.0)]);
        let s = operator_spectrum(&a, &model).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.points()[0].0 - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_rank_matches_raw_eigenvalues() {
        let model = OperatorModel::unitary_identity(8);
        let mut r = rng(7);
        for _ in 0..20 {
            let u = random_unitary(8, &mut r);
            let raw = unitary_angles(&u).unwrap();
            let outside = raw.iter().filter(|&&a| crate::space::chord(a, 0.0) > TOL_BASE).count();
            assert_eq!(operator_spectrum(&u, &model).unwrap().rank(), outside);
            for z in eigenvalues(&u).unwrap() {
                assert!((z.norm() - 1.0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn rejects_non_normal() {
        let model = OperatorModel::unitary_identity(2);
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = re(1.0);
        assert!(matches!(operator_spectrum(&a, &model), Err(Error::NotNormal(_))));
        assert!(matches!(verify_hoffman_wielandt(&a, &a), Err(Error::NotNormal(_))));
    }

    #[test]
    fn model_validation() {
        assert!(OperatorModel::new(OperatorKind::Unitary, diag(&[re(2.0)]), CompactSet::point(Ambient::Circle, 0.0)).is_err());
        // reference eigenvalue -1 is not in K = {1}
        assert!(OperatorModel::new(OperatorKind::Unitary, diag(&[re(-1.0)]), CompactSet::point(Ambient::Circle, 0.0)).is_err());
        let arc = CompactSet::new(Ambient::Circle, [(PI - 0.1, PI + 0.1)]).unwrap();
        let model = OperatorModel::new(OperatorKind::Unitary, diag(&[re(-1.0)]), arc).unwrap();
        assert!(operator_spectrum(&model.reference, &model).unwrap().is_trivial());
        assert!(matches!(model.spectrum_space(), BasedSpace::QuotientCircle { .. }));
    }

    #[test]
    fn schatten_examples() {
        assert_eq!(schatten_norm(&CMatrix::zeros(3, 3), 2.0).unwrap(), 0.0);
        let d = diag(&[re(3.0), re(4.0)]);
        assert!((schatten_norm(&d, 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((schatten_norm(&d, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!(schatten_norm(&d, 0.5).is_err());
        let mut r = rng(3);
        for _ in 0..10 {
            let a = random_unitary(5, &mut r) - random_unitary(5, &mut r);
            let s = schatten_norm(&a, f64::INFINITY).unwrap();
            assert!((s - power_norm(&a)).abs() < 1e-8 * s.max(1.0), "{s} vs {}", power_norm(&a));
        }
    }

    #[test]
    fn bhatia_sinha_cases() {
        let model = OperatorModel::unitary_identity(2);
        let u = random_unitary(2, &mut rng(1));
        let c = verify_bhatia_sinha(&u, &u, 2.0, &model).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));

        // rank-one diagonal difference: lhs = |e^{iθ} − 1|, rhs = (π/2)|e^{iθ} − 1|
        for theta in [0.3, 1.0, 2.5, PI] {
            let u = diag(&[phase(theta), re(1.0)]);
            let v = CMatrix::identity(2, 2);
            for p in [1.0, 2.0, f64::INFINITY] {
                let c = verify_bhatia_sinha(&u, &v, p, &model).unwrap();
                let chord = (phase(theta) - re(1.0)).norm();
                assert!((c.lhs - chord).abs() < 1e-12);
                assert!((c.rhs - FRAC_PI_2 * chord).abs() < 1e-12);
                assert!(c.holds);
            }
        }
    }

    #[test]
    fn hoffman_wielandt_cases() {
        let n = random_normal(4, &mut rng(2));
        let c = verify_hoffman_wielandt(&n, &n).unwrap();
        assert!(c.lhs < 1e-10 && c.rhs == 0.0 && c.holds);
        let a = diag(&[Complex64::new(1.0, 2.0), re(-1.0), Complex64::new(0.0, 3.0)]);
        let b = diag(&[Complex64::new(1.5, 2.0), re(-1.25), Complex64::new(0.0, 2.0)]);
        let c = verify_hoffman_wielandt(&a, &b).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn kato_cases() {
        let model = OperatorModel::hermitian_zero(3);
        let h = random_hermitian(3, &mut rng(4));
        assert_eq!(verify_kato_selfadjoint(&h, &h, 2.0, &model).unwrap().lhs, 0.0);

        // K far away: d_p = ε·d^{1/p} = ‖H − G‖_p
        let k = CompactSet::new(Ambient::Line, [(100.0, 101.0)]).unwrap();
        let far = OperatorModel::new(OperatorKind::Hermitian, CMatrix::identity(3, 3).scale(100.0), k).unwrap();
        let eps = 0.01;
        let h = diag(&[re(1.0), re(2.0), re(3.0)]);
        let g = diag(&[re(1.0 + eps), re(2.0 + eps), re(3.0 + eps)]);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let c = verify_kato_selfadjoint(&h, &g, p, &far).unwrap();
            let expected = eps * 3f64.powf(1.0 / p);
            assert!((c.lhs - expected).abs() < 1e-12 && (c.rhs - expected).abs() < 1e-12, "{p}: {c:?}");
        }
    }

    #[test]
    fn exp_loop_diagonal() {
        let model = OperatorModel::unitary_identity(3);
        let gen = diag(&[re(1.0), re(0.0), re(0.0)]);
        let path = generate_path(&Recipe::ExpLoop { generator: gen }, &model, 9).unwrap();
        for (t, u) in path.params.iter().zip(&path.matrices) {
            let expected = diag(&[phase(TAU * t), re(1.0), re(1.0)]);
            assert!(frobenius(&(u - expected)) < 1e-12);
        }
        let two = generate_path(&Recipe::ExpLoop { generator: CMatrix::zeros(3, 3) }, &model, 2).unwrap();
        assert_eq!(two.params, vec![0.0, 1.0]);
        let mut bad = CMatrix::zeros(3, 3);
        bad[(0, 1)] = re(1.0);
        assert!(generate_path(&Recipe::ExpLoop { generator: bad }, &model, 4).is_err());
    }

    #[test]
    fn random_loop_closes() {
        let model = OperatorModel::unitary_identity(5);
        let recipe = Recipe::RandomLoop { seed: 11, amplitude: 0.7, max_winding: 2 };
        let path = generate_path(&recipe, &model, 33).unwrap();
        let gap = path.matrices.last().unwrap() - &path.matrices[0];
        assert!(schatten_norm(&gap, f64::INFINITY).unwrap() <= 1e-10);
    }

    #[test]
    fn segment_reaches_endpoint() {
        let model = OperatorModel::unitary_identity(4);
        let mut r = rng(5);
        let (a, b) = (random_unitary(4, &mut r), random_unitary(4, &mut r));
        let path = generate_path(&Recipe::Segment { start: a.clone(), end: b.clone() }, &model, 5).unwrap();
        assert!(frobenius(&(&path.matrices[0] - a)) < 1e-10);
        assert!(frobenius(&(path.matrices.last().unwrap() - b)) < 1e-10);
    }

    #[test]
    fn path_json_roundtrip() {
        let model = OperatorModel::unitary_identity(2);
        let path = generate_path(&Recipe::RandomLoop { seed: 1, amplitude: 0.2, max_winding: 1 }, &model, 3).unwrap();
        let json = serde_json::to_string(&path).unwrap();
        let back: SampledOperatorPath = serde_json::from_str(&json).unwrap();
        assert_eq!(back.params, path.params);
        for (a, b) in back.matrices.iter().zip(&path.matrices) {
            assert!(frobenius(&(a - b)) == 0.0);
        }
    }
}
