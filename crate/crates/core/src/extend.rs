//! Extensions of a Drinfeld A-module along the cover x = p(y): all φ' with
//! p(φ'(y)) = φ(x), their isomorphism classes, and how both change under
//! extension of the base field.

use rayon::prelude::*;
use thiserror::Error;

use crate::drinfeld::{aut_group, iso_solver, CoverMap, DrinfeldError, DrinfeldModule, RingTag};
use crate::ff::{FfError, FieldElement, FieldTower};
use crate::poly::Poly;
use crate::skew::{substitute, SkewPoly};
use crate::Caps;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtendError {
    #[error("candidate space has {required} elements, above the cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error("inconsistent problem: {0}")]
    Inconsistent(String),
    #[error("conjugate of solution {0} by an automorphism is not a solution")]
    ClosureViolation(usize),
    #[error(transparent)]
    Drinfeld(#[from] DrinfeldError),
}

impl From<FfError> for ExtendError {
    fn from(e: FfError) -> Self {
        match e {
            FfError::CapExceeded { required, cap } => ExtendError::CapExceeded { required, cap },
            other => ExtendError::Drinfeld(DrinfeldError::Field(other)),
        }
    }
}

impl ExtendError {
    pub fn is_cap_exceeded(&self) -> bool {
        match self {
            ExtendError::CapExceeded { .. } => true,
            ExtendError::Drinfeld(d) => d.is_cap_exceeded(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionProblem {
    base: DrinfeldModule,
    cover: CoverMap,
    target_rank: usize,
    caps: Caps,
}

impl ExtensionProblem {
    /// Validates that `base` is a verified A-module of rank `n·target_rank`.
    pub fn new(
        base: DrinfeldModule,
        cover: CoverMap,
        target_rank: usize,
    ) -> Result<ExtensionProblem, ExtendError> {
        if base.ring() != RingTag::A {
            return Err(ExtendError::Inconsistent("base module must be over F_q[x]".into()));
        }
        let rep = base.verify_standard_form();
        if let Some(c) = rep.failures().next() {
            return Err(ExtendError::Drinfeld(DrinfeldError::Unverified(c.name.clone())));
        }
        if target_rank == 0 || base.rank() != cover.degree() * target_rank {
            return Err(ExtendError::Inconsistent(format!(
                "rank {} is not {} · {}",
                base.rank(),
                cover.degree(),
                target_rank
            )));
        }
        cover.poly_over(base.tower())?;
        Ok(ExtensionProblem {
            base,
            cover,
            target_rank,
            caps: Caps::default(),
        })
    }

    /// The target rank `rank / deg p`.
    pub fn with_inferred_rank(base: DrinfeldModule, cover: CoverMap) -> Result<ExtensionProblem, ExtendError> {
        let n = cover.degree();
        if base.rank() % n != 0 {
            return Err(ExtendError::Inconsistent(format!(
                "rank {} is not divisible by the cover degree {n}",
                base.rank()
            )));
        }
        let r = base.rank() / n;
        ExtensionProblem::new(base, cover, r)
    }

    pub fn with_caps(mut self, caps: Caps) -> ExtensionProblem {
        self.caps = caps;
        self
    }

    pub fn base(&self) -> &DrinfeldModule {
        &self.base
    }

    pub fn cover(&self) -> &CoverMap {
        &self.cover
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn tower(&self) -> &FieldTower {
        self.base.tower()
    }

    /// The same problem over a larger field.
    pub fn base_change(&self, target: &FieldTower) -> Result<ExtensionProblem, ExtendError> {
        Ok(ExtensionProblem {
            base: self.base.base_change(target)?,
            cover: self.cover.clone(),
            target_rank: self.target_rank,
            caps: self.caps,
        })
    }

    fn check_cap(&self) -> Result<u128, ExtendError> {
        let size = self.tower().size() as u128;
        let required = size
            .checked_pow(self.target_rank as u32 + 1)
            .unwrap_or(u128::MAX);
        if required > self.caps.candidates as u128 {
            return Err(ExtendError::CapExceeded {
                required,
                cap: self.caps.candidates,
            });
        }
        Ok(required)
    }

    fn p_poly(&self) -> Poly {
        self.cover
            .poly_over(self.tower())
            .expect("checked at construction")
    }
}

/// One extension φ'(y) = `delta`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtensionSolution {
    pub delta: SkewPoly,
    pub lifted_characteristic: FieldElement,
}

impl ExtensionSolution {
    fn from_delta(delta: SkewPoly) -> ExtensionSolution {
        let lifted_characteristic = delta.coeff(0);
        ExtensionSolution {
            delta,
            lifted_characteristic,
        }
    }

    /// The solution as a Drinfeld module over F_q[y].
    pub fn module(&self) -> DrinfeldModule {
        DrinfeldModule::from_generator(RingTag::APrime, self.delta.clone())
            .expect("solutions have positive degree")
    }
}

/// All extensions in canonical order, by a coefficientwise descent.
///
/// The top coefficient solves the norm equation `a^(1 + q^r' + … + q^((n-1) r')) = lead φ(x)`.
/// Each further coefficient `a_{r'-j}` is scanned against the coefficient of
/// `τ^(n r' - j)` in `p(δ')`, which depends only on `a_{r'}, …, a_{r'-j}`.
/// Survivors are checked exactly.
pub fn enumerate_extensions(prob: &ExtensionProblem) -> Result<Vec<ExtensionSolution>, ExtendError> {
    prob.check_cap()?;
    let t = prob.tower();
    let p = prob.p_poly();
    let n = prob.cover.degree();
    let r = prob.target_rank;
    let target = prob.base.gen_image();
    let lead = target.leading().expect("verified module has a leading coefficient");
    let order = t.size() - 1;
    let norm_exp = (0..n).fold(0u64, |acc, k| {
        (acc + t.frobenius_exponent((k * r) as u64)) % order
    });
    // partial solutions store coefficients a_r, a_{r-1}, ... (top first)
    let mut partials: Vec<Vec<FieldElement>> = t
        .power_preimages(norm_exp, lead)
        .into_iter()
        .map(|a| vec![a])
        .collect();
    let elements: Vec<FieldElement> = t.elements().collect();
    for j in 1..=r {
        let idx = n * r - j;
        let want = target.coeff(idx);
        partials = partials
            .par_iter()
            .flat_map_iter(|partial| {
                let p = &p;
                elements.iter().filter_map(move |&a| {
                    let mut coeffs = vec![t.zero(); r + 1];
                    for (k, &c) in partial.iter().enumerate() {
                        coeffs[r - k] = c;
                    }
                    coeffs[r - j] = a;
                    let image = substitute(p, &SkewPoly::new(t, coeffs)).ok()?;
                    (image.coeff(idx) == want).then(|| {
                        let mut next = partial.clone();
                        next.push(a);
                        next
                    })
                })
            })
            .collect();
    }
    let mut out: Vec<ExtensionSolution> = partials
        .into_par_iter()
        .filter_map(|top_first| {
            let coeffs: Vec<FieldElement> = top_first.into_iter().rev().collect();
            let delta = SkewPoly::new(t, coeffs);
            (substitute(&p, &delta).ok()? == *target).then(|| ExtensionSolution::from_delta(delta))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Exhaustive scan over all coefficient tuples in K^(r'+1).
pub fn brute_oracle(prob: &ExtensionProblem) -> Result<Vec<ExtensionSolution>, ExtendError> {
    let total = prob.check_cap()? as u64;
    let t = prob.tower();
    let p = prob.p_poly();
    let size = t.size();
    let r = prob.target_rank;
    let target = prob.base.gen_image();
    let mut out: Vec<ExtensionSolution> = (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let mut coeffs = Vec::with_capacity(r + 1);
            for _ in 0..=r {
                coeffs.push(t.element((code % size) as u32).ok()?);
                code /= size;
            }
            if coeffs[r].is_zero() {
                return None;
            }
            let delta = SkewPoly::new(t, coeffs);
            (substitute(&p, &delta).ok()? == *target).then(|| ExtensionSolution::from_delta(delta))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Orbits of Aut(φ) acting on the sorted solutions by conjugation, as index
/// lists. Each class is ascending and classes are ordered by their smallest
/// member, which is the canonical representative.
pub fn extension_iso_classes(
    prob: &ExtensionProblem,
    solutions: &[ExtensionSolution],
) -> Result<Vec<Vec<usize>>, ExtendError> {
    let aut = aut_group(prob.base())?;
    let mut class_of = vec![usize::MAX; solutions.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..solutions.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let mut orbit = Vec::new();
        for &eps in &aut.elements {
            let image = ExtensionSolution::from_delta(
                solutions[i].delta.conjugate(eps).map_err(DrinfeldError::from)?,
            );
            let j = solutions
                .binary_search(&image)
                .map_err(|_| ExtendError::ClosureViolation(i))?;
            if class_of[j] == usize::MAX {
                class_of[j] = classes.len();
                orbit.push(j);
            }
        }
        orbit.sort_unstable();
        classes.push(orbit);
    }
    Ok(classes)
}

/// The partition of `solutions` by pairwise scalar isomorphism.
pub fn iso_partition(solutions: &[ExtensionSolution]) -> Result<Vec<Vec<usize>>, ExtendError> {
    let modules: Vec<DrinfeldModule> = solutions.iter().map(ExtensionSolution::module).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for (i, m) in modules.iter().enumerate() {
        for class in classes.iter_mut() {
            let rep = &modules[class[0]];
            if rep.characteristic() == m.characteristic() && !iso_solver(rep, m)?.is_empty() {
                class.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }
    Ok(classes)
}

/// Solution and class counts over the degree-`s` extension of K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisRow {
    pub degree: usize,
    pub field_size: u64,
    pub solutions: usize,
    pub classes: usize,
}

pub fn galois_merge_report(prob: &ExtensionProblem, s_max: usize) -> Result<Vec<GaloisRow>, ExtendError> {
    (1..=s_max)
        .map(|s| {
            let ext = prob.tower().extension(s, prob.caps.field_size)?;
            let sub = prob.base_change(&ext)?;
            let sols = enumerate_extensions(&sub)?;
            let classes = extension_iso_classes(&sub, &sols)?;
            Ok(GaloisRow {
                degree: s,
                field_size: ext.size(),
                solutions: sols.len(),
                classes: classes.len(),
            })
        })
        .collect()
}
