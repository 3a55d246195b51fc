//! Commutants, bicommutants and generated von Neumann algebras.
//!
//! Algebras are represented by a Hilbert–Schmidt orthonormal basis of their
//! span. The commutant of a finite set is the joint kernel of the maps
//! `R ↦ RT − TR`, assembled as one linear system on the `n²`-dimensional
//! matrix space.

use crate::error::{Error, Result};
use crate::numkernel::{nullspace, orthonormalize_hs, ComplexMatrix, RectMatrix, Tolerances, C64, ONE, ZERO};

/// A finite list of `n × n` operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    dim: usize,
    members: Vec<ComplexMatrix>,
}

impl OperatorSet {
    pub fn new(dim: usize, members: Vec<ComplexMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("operator dimension must be at least 1".into()));
        }
        for m in &members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            if !m.is_finite() {
                return Err(Error::InvalidMatrix("entries must be finite".into()));
            }
        }
        Ok(Self { dim, members })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            members: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[ComplexMatrix] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn push(&mut self, m: ComplexMatrix) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        self.members.push(m);
        Ok(())
    }

    /// Union of two sets on the same space.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for m in &other.members {
            out.push(m.clone())?;
        }
        Ok(out)
    }

    /// `X ∪ X*`; adjoints already present (within tolerance) are not repeated.
    pub fn adjoint_closure(&self, tol: &Tolerances) -> Self {
        let mut members = self.members.clone();
        for t in &self.members {
            let adj = t.adjoint();
            let cutoff = tol.residual_tol * (1.0 + adj.frobenius_norm());
            if !members.iter().any(|m| (m - &adj).frobenius_norm() <= cutoff) {
                members.push(adj);
            }
        }
        Self {
            dim: self.dim,
            members,
        }
    }
}

/// Hilbert–Schmidt orthonormal basis of a unital, multiplicatively closed
/// operator algebra. Involutive algebras (`is_star_closed`) are the von
/// Neumann algebras of this finite setting.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraBasis {
    dim: usize,
    basis: Vec<ComplexMatrix>,
    star_closed: bool,
}

impl AlgebraBasis {
    /// Validates orthonormality, the identity, and multiplicative closure;
    /// records whether the span is closed under adjoints.
    pub fn from_orthonormal(dim: usize, basis: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        for b in &basis {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim(),
                });
            }
        }
        let eps = tol.residual_tol;
        for i in 0..basis.len() {
            for j in 0..=i {
                let expected = if i == j { ONE } else { ZERO };
                if (basis[i].hs_inner(&basis[j]) - expected).norm() > eps {
                    return Err(Error::InvalidAlgebra(format!(
                        "basis elements {j} and {i} are not orthonormal"
                    )));
                }
            }
        }
        let mut alg = Self {
            dim,
            basis,
            star_closed: false,
        };
        if !alg.contains_unchecked(&ComplexMatrix::identity(dim), tol) {
            return Err(Error::InvalidAlgebra("span does not contain the identity".into()));
        }
        for a in &alg.basis {
            for b in &alg.basis {
                if !alg.contains_unchecked(&(a * b), tol) {
                    return Err(Error::InvalidAlgebra(
                        "span is not closed under multiplication".into(),
                    ));
                }
            }
        }
        alg.star_closed = alg
            .basis
            .iter()
            .all(|b| alg.contains_unchecked(&b.adjoint(), tol));
        Ok(alg)
    }

    /// Orthonormalizes a spanning list, then validates as
    /// [`from_orthonormal`](Self::from_orthonormal).
    pub fn from_spanning(dim: usize, mats: &[ComplexMatrix], tol: &Tolerances) -> Result<Self> {
        let basis = orthonormalize_hs(mats, tol)?;
        Self::from_orthonormal(dim, basis, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the span.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_star_closed(&self) -> bool {
        self.star_closed
    }

    pub fn as_operator_set(&self) -> OperatorSet {
        OperatorSet {
            dim: self.dim,
            members: self.basis.clone(),
        }
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, t: &ComplexMatrix) -> ComplexMatrix {
        project_onto(&self.basis, t, self.dim)
    }

    /// HS distance from `t` to the span.
    pub fn residual(&self, t: &ComplexMatrix) -> f64 {
        (t - &self.project(t)).frobenius_norm()
    }

    fn contains_unchecked(&self, t: &ComplexMatrix, tol: &Tolerances) -> bool {
        self.residual(t) <= tol.residual_tol * (1.0 + t.frobenius_norm())
    }
}

fn project_onto(basis: &[ComplexMatrix], t: &ComplexMatrix, dim: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(dim);
    for b in basis {
        p = &p + &b.scale(b.hs_inner(t));
    }
    p
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Row-major `vec` identification of `n × n` matrices with `C^{n²}`.
fn to_matrix(n: usize, v: Vec<C64>) -> ComplexMatrix {
    ComplexMatrix::from_vec(n, v).expect("kernel vectors are finite and sized n²")
}

/// Basis of the joint kernel of `R ↦ RT − TR` over the given members only.
///
/// The kernel is narrowed one member at a time: with `K` an HS-orthonormal
/// basis of the operators commuting with the members seen so far, the next
/// member `T` restricts it to the kernel of `c ↦ Σ c_k (K_k T − T K_k)`.
pub fn commutant_span(x: &OperatorSet, tol: &Tolerances) -> Vec<ComplexMatrix> {
    let n = x.dim;
    let nn = n * n;
    let mut kernel: Vec<ComplexMatrix> = (0..nn)
        .map(|k| {
            let mut e = ComplexMatrix::zeros(n);
            e[(k / n, k % n)] = ONE;
            e
        })
        .collect();
    for t in &x.members {
        // Only the scalars are left, and they commute with everything.
        if kernel.len() <= 1 {
            break;
        }
        let r = kernel.len();
        let mut l = RectMatrix::zeros(nn, r);
        for (c, k) in kernel.iter().enumerate() {
            let d = &(k * t) - &(t * k);
            for (row, z) in d.as_slice().iter().enumerate() {
                l.set(row, c, *z);
            }
        }
        kernel = nullspace(&l, tol)
            .into_iter()
            .map(|coeffs| {
                let mut m = ComplexMatrix::zeros(n);
                for (c, k) in coeffs.iter().zip(&kernel) {
                    if *c != ZERO {
                        m = &m + &k.scale(*c);
                    }
                }
                m
            })
            .collect();
    }
    kernel
}

/// `X'`: every operator commuting with each listed member. Callers wanting
/// the commutant of `X ∪ X*` must adjoint-close first.
pub fn commutant(x: &OperatorSet, tol: &Tolerances) -> Result<AlgebraBasis> {
    AlgebraBasis::from_orthonormal(x.dim, commutant_span(x, tol), tol)
}

/// `X''` for the set exactly as given.
pub fn bicommutant(x: &OperatorSet, tol: &Tolerances) -> Result<AlgebraBasis> {
    let first = commutant(x, tol)?;
    commutant(&first.as_operator_set(), tol)
}

/// `A(X) = (X ∪ X*)''`, the smallest von Neumann algebra containing `X`.
pub fn generated_algebra(x: &OperatorSet, tol: &Tolerances) -> Result<AlgebraBasis> {
    let alg = bicommutant(&x.adjoint_closure(tol), tol)?;
    if !alg.is_star_closed() {
        return Err(Error::InvalidAlgebra("generated algebra is not *-closed".into()));
    }
    if let Some(i) = x.members.iter().position(|t| !alg.contains_unchecked(t, tol)) {
        return Err(Error::InvalidAlgebra(format!(
            "generated algebra does not contain generator {i}"
        )));
    }
    Ok(alg)
}

pub fn contains(a: &AlgebraBasis, t: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    check_dim(a.dim, t.dim())?;
    Ok(a.contains_unchecked(t, tol))
}

/// Equal dimensions and mutual containment of the bases.
pub fn algebra_equal(a: &AlgebraBasis, b: &AlgebraBasis, tol: &Tolerances) -> Result<bool> {
    check_dim(a.dim, b.dim)?;
    if a.dimension() != b.dimension() {
        return Ok(false);
    }
    Ok(a.basis.iter().all(|m| b.contains_unchecked(m, tol))
        && b.basis.iter().all(|m| a.contains_unchecked(m, tol)))
}

/// Span of `a` contained in span of `b`.
pub fn span_included(a: &[ComplexMatrix], b: &AlgebraBasis, tol: &Tolerances) -> bool {
    a.iter().all(|m| b.contains_unchecked(m, tol))
}

pub fn is_abelian(a: &AlgebraBasis, tol: &Tolerances) -> bool {
    let cutoff = 2.0 * tol.residual_tol;
    for (i, x) in a.basis.iter().enumerate() {
        for y in &a.basis[..i] {
            if x.commutator(y).frobenius_norm() > cutoff {
                return false;
            }
        }
    }
    true
}

/// `T` commutes with every element of `M'`.
pub fn is_affiliated(t: &ComplexMatrix, m: &AlgebraBasis, tol: &Tolerances) -> Result<bool> {
    Ok(affiliated_each(std::slice::from_ref(t), m, tol)?[0])
}

/// [`is_affiliated`] for several operators, sharing one commutant computation.
pub fn affiliated_each(ts: &[ComplexMatrix], m: &AlgebraBasis, tol: &Tolerances) -> Result<Vec<bool>> {
    for t in ts {
        check_dim(m.dim, t.dim())?;
    }
    let outer = commutant_span(&m.as_operator_set(), tol);
    Ok(ts
        .iter()
        .map(|t| {
            let cutoff = tol.residual_tol * (1.0 + t.frobenius_norm());
            outer.iter().all(|c| t.commutator(c).frobenius_norm() <= cutoff)
        })
        .collect())
}

/// Orthonormal basis of span(`a`) ∩ span(`b`) for HS-orthonormal inputs,
/// computed as the kernel of `(I − P_a)` stacked on `(I − P_b)`.
pub fn span_intersection(
    dim: usize,
    a: &[ComplexMatrix],
    b: &[ComplexMatrix],
    tol: &Tolerances,
) -> Vec<ComplexMatrix> {
    let nn = dim * dim;
    let mut l = RectMatrix::zeros(2 * nn, nn);
    for (block, basis) in [a, b].into_iter().enumerate() {
        let off = block * nn;
        for r in 0..nn {
            l.set(off + r, r, ONE);
        }
        for m in basis {
            let v = m.as_slice();
            for r in 0..nn {
                for c in 0..nn {
                    l.set(off + r, c, l.get(off + r, c) - v[r] * v[c].conj());
                }
            }
        }
    }
    nullspace(&l, tol).into_iter().map(|v| to_matrix(dim, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sx() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn sz() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    fn diagonals() -> AlgebraBasis {
        AlgebraBasis::from_orthonormal(
            2,
            vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)],
            &tol(),
        )
        .unwrap()
    }

    fn set(ms: Vec<ComplexMatrix>) -> OperatorSet {
        OperatorSet::new(ms[0].dim(), ms).unwrap()
    }

    #[test]
    fn adjoint_closure_examples() {
        let t = tol();
        assert_eq!(set(vec![sx()]).adjoint_closure(&t).len(), 1);
        let nil = ComplexMatrix::unit(2, 0, 1);
        let closed = set(vec![nil]).adjoint_closure(&t);
        assert_eq!(closed.members()[1], ComplexMatrix::unit(2, 1, 0));
        assert_eq!(closed.adjoint_closure(&t), closed);
        assert!(OperatorSet::empty(3).adjoint_closure(&t).is_empty());
    }

    #[test]
    fn commutant_examples() {
        let t = tol();
        assert_eq!(commutant(&OperatorSet::empty(3), &t).unwrap().dimension(), 9);

        let c = commutant(&set(vec![ComplexMatrix::from_real_diag(&[1.0, 2.0])]), &t).unwrap();
        assert!(algebra_equal(&c, &diagonals(), &t).unwrap());

        let c = commutant(&set(vec![sx(), sz()]), &t).unwrap();
        assert_eq!(c.dimension(), 1);
        assert!(contains(&c, &ComplexMatrix::identity(2), &t).unwrap());
    }

    #[test]
    fn commutant_of_non_involutive_set_is_not_star_closed() {
        let c = commutant(&set(vec![ComplexMatrix::unit(2, 0, 1)]), &tol()).unwrap();
        // span{I, E12}
        assert_eq!(c.dimension(), 2);
        assert!(!c.is_star_closed());
    }

    #[test]
    fn generated_algebra_examples() {
        let t = tol();
        assert_eq!(generated_algebra(&OperatorSet::empty(3), &t).unwrap().dimension(), 1);
        let a = generated_algebra(&set(vec![ComplexMatrix::from_real_diag(&[1.0, 2.0])]), &t).unwrap();
        assert!(algebra_equal(&a, &diagonals(), &t).unwrap());
        let a = generated_algebra(&set(vec![sx()]), &t).unwrap();
        assert_eq!(a.dimension(), 2);
        assert!(contains(&a, &sx(), &t).unwrap());
        assert!(contains(&a, &ComplexMatrix::identity(2), &t).unwrap());
    }

    #[test]
    fn algebra_equal_examples() {
        let t = tol();
        let d = diagonals();
        assert!(algebra_equal(&d, &d, &t).unwrap());
        let scalars = generated_algebra(&OperatorSet::empty(2), &t).unwrap();
        assert!(!algebra_equal(&scalars, &d, &t).unwrap());
        // conjugate the diagonals by a rotation
        let (c, s) = (0.6, 0.8);
        let u = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).unwrap();
        let rotated = AlgebraBasis::from_spanning(
            2,
            &d.basis().iter().map(|b| b.conjugate_by(&u)).collect::<Vec<_>>(),
            &t,
        )
        .unwrap();
        assert!(!algebra_equal(&d, &rotated, &t).unwrap());
        let three = generated_algebra(&OperatorSet::empty(3), &t).unwrap();
        assert!(algebra_equal(&d, &three, &t).is_err());
    }

    #[test]
    fn membership_and_abelianness() {
        let t = tol();
        let d = diagonals();
        assert!(contains(&d, &ComplexMatrix::identity(2), &t).unwrap());
        assert!(!contains(&d, &sx(), &t).unwrap());
        assert!(is_abelian(&d, &t));
        let full = commutant(&OperatorSet::empty(2), &t).unwrap();
        assert!(!is_abelian(&full, &t));
        assert!(is_abelian(&generated_algebra(&OperatorSet::empty(2), &t).unwrap(), &t));
    }

    #[test]
    fn affiliation_examples() {
        let t = tol();
        let d = diagonals();
        assert!(is_affiliated(&ComplexMatrix::identity(2), &d, &t).unwrap());
        assert!(!is_affiliated(&sx(), &d, &t).unwrap());
        let member = ComplexMatrix::from_diag(&[C64::new(1.5, -2.0), C64::new(0.0, 4.0)]);
        assert!(is_affiliated(&member, &d, &t).unwrap());
        assert!(is_affiliated(&ComplexMatrix::identity(3), &d, &t).is_err());
    }

    #[test]
    fn intersection_of_diagonals_and_span_i_sx() {
        let t = tol();
        let a = generated_algebra(&set(vec![sx()]), &t).unwrap();
        let meet = span_intersection(2, a.basis(), diagonals().basis(), &t);
        assert_eq!(meet.len(), 1);
        let i = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!((meet[0].hs_inner(&i).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_bases_are_rejected() {
        let t = tol();
        let r = AlgebraBasis::from_orthonormal(2, vec![ComplexMatrix::unit(2, 0, 0)], &t);
        assert!(matches!(r, Err(Error::InvalidAlgebra(_))));
        let r = AlgebraBasis::from_spanning(2, &[ComplexMatrix::identity(2), sx(), sz()], &t);
        assert!(matches!(r, Err(Error::InvalidAlgebra(_))));
    }
}
