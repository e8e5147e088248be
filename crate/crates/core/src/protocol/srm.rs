use super::signals::{Convention, SignalStateSet};
use super::spectrum::RhoEigenbasis;
use crate::error::{Error, Result};
use crate::linalg::{psd_check, CMatrix, TensorSpace, DEFAULT_RANK_TOL};

/// Default slack on minimum eigenvalues of operators that must be PSD.
pub const PSD_TOL: f64 = 1e-9;

/// Allowed entrywise deviation of `Σ elements` from the identity.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// A measurement on a labeled space.
#[derive(Clone, Debug)]
pub struct Povm {
    space: TensorSpace,
    elements: Vec<CMatrix>,
    completeness_defect: f64,
}

fn completeness_defect(elements: &[CMatrix], dim: usize) -> f64 {
    let mut sum = CMatrix::identity(dim).scale(-1.0);
    for e in elements {
        sum += e;
    }
    sum.max_abs()
}

impl Povm {
    /// Checks dimensions, Hermiticity, positivity and completeness.
    pub fn new(space: TensorSpace, elements: Vec<CMatrix>) -> Result<Self> {
        let povm = Self::from_parts(space, elements)?;
        for (k, e) in povm.elements.iter().enumerate() {
            let (ok, min) = psd_check(e, PSD_TOL)?;
            if !ok {
                return Err(Error::validation(format!(
                    "POVM element {} has eigenvalue {min:e}",
                    k + 1
                )));
            }
        }
        if povm.completeness_defect > COMPLETENESS_TOL {
            return Err(Error::validation(format!(
                "POVM elements sum to the identity only within {:e}",
                povm.completeness_defect
            )));
        }
        Ok(povm)
    }

    /// Checks shapes only; positivity is the caller's responsibility.
    pub fn from_parts(space: TensorSpace, elements: Vec<CMatrix>) -> Result<Self> {
        let dim = space.total_dim();
        if elements.is_empty() {
            return Err(Error::validation("a POVM needs at least one element"));
        }
        for e in &elements {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.rows(),
                });
            }
        }
        let completeness_defect = completeness_defect(&elements, dim);
        Ok(Povm {
            space,
            elements,
            completeness_defect,
        })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<CMatrix> {
        self.elements
    }

    /// `Π_i` for `i` in `1..=N`.
    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i - 1]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    /// `U Π_i U†` for every element.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Povm> {
        Povm::from_parts(
            self.space.clone(),
            self.elements.iter().map(|e| e.conjugate_by(u)).collect(),
        )
    }
}

/// The pieces of the square-root measurement.
#[derive(Clone, Debug)]
pub struct SrmParts {
    /// `ρ^{-½}` on the support of `ρ`.
    pub inv_sqrt_rho: CMatrix,
    /// `Π^SQ_i = ρ^{-½} σ(i) ρ^{-½}`.
    pub pretty_good: Vec<CMatrix>,
    /// `(1 - Σ Π^SQ_i)/N`, added to every element.
    pub delta: CMatrix,
    /// `max_i |tr(σ(i) Δ)|`.
    pub delta_overlap: f64,
    pub povm: Povm,
}

pub fn srm_parts(states: &SignalStateSet) -> Result<SrmParts> {
    let n = states.n_ports;
    let dim = states.dim();
    let inv_sqrt_rho = if states.qudit_dim == 2 && states.convention == Convention::Singlet {
        RhoEigenbasis::new(n)?.inv_sqrt_rho(DEFAULT_RANK_TOL)?
    } else {
        states.rho().inv_sqrt_on_support(DEFAULT_RANK_TOL)?.into_matrix()
    };
    let pretty_good: Vec<CMatrix> = (1..=n)
        .map(|i| inv_sqrt_rho.matmul(states.sigma(i)).matmul(&inv_sqrt_rho))
        .map(|m| m.hermitian_part())
        .collect();
    let mut delta = CMatrix::identity(dim);
    for p in &pretty_good {
        delta -= p;
    }
    let delta = delta.scale(1.0 / n as f64);
    let delta_overlap = (1..=n)
        .map(|i| states.sigma(i).trace_product(&delta).norm())
        .fold(0.0, f64::max);
    let elements = pretty_good.iter().map(|p| p + &delta).collect();
    let povm = Povm::from_parts(states.space().clone(), elements)?;
    Ok(SrmParts {
        inv_sqrt_rho,
        pretty_good,
        delta,
        delta_overlap,
        povm,
    })
}

/// The square-root ("pretty good") measurement completed by `Δ`.
///
/// Positivity holds by construction: each `Π^SQ_i` is a congruence of a PSD
/// operator and `Δ` is `1/N` times the projector onto the kernel of `ρ`.
pub fn srm_povm(states: &SignalStateSet) -> Result<Povm> {
    let parts = srm_parts(states)?;
    if parts.delta_overlap > 1e-12 {
        return Err(Error::validation(format!(
            "completion term overlaps the signals: {:e}",
            parts.delta_overlap
        )));
    }
    Ok(parts.povm)
}
