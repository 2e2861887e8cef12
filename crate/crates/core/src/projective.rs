//! Projectivity by splitting: a finite module is projective iff the canonical
//! surjection from the free module on its generators has a right inverse.

use std::sync::Arc;

use crate::error::Result;
use crate::hom::{find_right_inverse, Hom, SearchOptions};
use crate::module::{free_module, Distributivity, FinModule, Flavor, FreeModule};

#[derive(Debug, Clone)]
pub struct ProjectivityReport {
    pub free: FreeModule,
    /// Generator `i` of `free` goes to `m.generators()[i]`.
    pub surjection: Hom,
    /// A right inverse of `surjection` if one exists; `None` certifies that
    /// the search was exhausted.
    pub section: Option<Hom>,
    /// Lattice distributivity, for flavor `B`.
    pub distributivity: Option<Distributivity>,
}

impl ProjectivityReport {
    pub fn is_projective(&self) -> bool {
        self.section.is_some()
    }

    /// For `B`, whether the splitting verdict and the distributivity test
    /// agree. Always true for `F_inf`.
    pub fn criteria_agree(&self) -> bool {
        self.distributivity.as_ref().is_none_or(|d| d.holds() == self.is_projective())
    }
}

pub fn projectivity(m: &Arc<FinModule>, opts: SearchOptions) -> Result<ProjectivityReport> {
    let gens = m.generators();
    let free = free_module(m.flavor(), gens.len())?;
    let surjection = Hom::from_generator_images(&free, m.clone(), &gens)?;
    debug_assert!(surjection.is_surjective());
    let section = find_right_inverse(&surjection, opts)?;
    let surjection = match &section {
        Some(s) => surjection.with_right_inverse(s.clone())?,
        None => surjection,
    };
    let distributivity = match m.flavor() {
        Flavor::B => Some(m.is_distributive_lattice()?),
        Flavor::Finf => None,
    };
    Ok(ProjectivityReport { free, surjection, section, distributivity })
}
