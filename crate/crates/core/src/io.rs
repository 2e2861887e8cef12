//! JSON documents for modules, morphisms, constraints and matrices, and
//! resolution of module references.
//!
//! A module reference is either an inline module document or a string: a
//! family name (`D4`, `E_3`, `D0`, `E0`), `free:<flavor>:<rank>`, one of
//! `B`, `Finf`, `M3`, `N5`, `chain:<k>`, `trivial:<flavor>`, or otherwise a
//! path to a module document.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::families::Family;
use crate::hom::{Hom, HomConstraints};
use crate::linear::Matrix;
use crate::module::{boolean, chain, diamond_m3, finf, free_module, pentagon_n5, trivial, FinModule, Flavor};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDoc {
    pub flavor: Flavor,
    pub elements: Vec<String>,
    pub zero: usize,
    pub add: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neg: Option<Vec<usize>>,
    /// Present for free modules; checked against the tables on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_rank: Option<usize>,
}

impl ModuleDoc {
    pub fn from_module(m: &FinModule) -> Self {
        ModuleDoc {
            flavor: m.flavor(),
            elements: m.names().to_vec(),
            zero: m.zero(),
            add: m.add_table(),
            neg: m.neg_table(),
            free_rank: m.free_rank(),
        }
    }

    /// Elements sorted by name and renumbered, for byte-stable output.
    /// Drops the free-rank marker, whose meaning depends on the numbering.
    pub fn canonical(m: &FinModule) -> Self {
        let mut order: Vec<usize> = m.elements().collect();
        order.sort_by(|&a, &b| m.name(a).cmp(m.name(b)));
        let mut new_id = vec![0; m.len()];
        for (k, &old) in order.iter().enumerate() {
            new_id[old] = k;
        }
        ModuleDoc {
            flavor: m.flavor(),
            elements: order.iter().map(|&a| m.name(a).to_string()).collect(),
            zero: new_id[m.zero()],
            add: order.iter().map(|&a| order.iter().map(|&b| new_id[m.add(a, b)]).collect()).collect(),
            neg: m.neg_table().map(|t| order.iter().map(|&a| new_id[t[a]]).collect()),
            free_rank: None,
        }
    }

    pub fn into_module(self) -> Result<FinModule> {
        let m = FinModule::from_tables(self.flavor, self.elements, self.zero, self.add, self.neg)?;
        match self.free_rank {
            Some(k) => m.certify_free(k),
            None => Ok(m),
        }
    }
}

pub fn module_to_json(m: &FinModule, canonical: bool) -> String {
    let doc = if canonical { ModuleDoc::canonical(m) } else { ModuleDoc::from_module(m) };
    serde_json::to_string_pretty(&doc).expect("module documents serialize")
}

pub fn module_from_json(text: &str) -> Result<FinModule> {
    serde_json::from_str::<ModuleDoc>(text)?.into_module()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn read_module(path: &Path) -> Result<FinModule> {
    module_from_json(&read(path)?)
}

/// A module by name, or `None` if the string is not a known name.
pub fn named_module(name: &str) -> Result<Option<FinModule>> {
    let parts: Vec<&str> = name.split(':').collect();
    let m = match parts.as_slice() {
        ["free", flavor, rank] => {
            let rank = rank.parse().map_err(|_| Error::InvalidParameter(format!("bad rank in {name:?}")))?;
            free_module(flavor.parse()?, rank)?.module.as_ref().clone()
        }
        ["chain", k] => {
            let k: usize = k.parse().map_err(|_| Error::InvalidParameter(format!("bad length in {name:?}")))?;
            if k == 0 {
                return Err(Error::InvalidParameter("a chain needs at least one element".into()));
            }
            chain(k)
        }
        ["trivial", flavor] => trivial(flavor.parse()?),
        ["B"] | ["boolean"] => boolean(),
        ["Finf"] | ["F_inf"] | ["finf"] => finf(),
        ["M3"] | ["M_3"] => diamond_m3(),
        ["N5"] | ["N_5"] => pentagon_n5(),
        [single] => match single.parse::<Family>() {
            Ok(fam) => fam.build()?.module.as_ref().clone(),
            Err(_) => return Ok(None),
        },
        _ => return Ok(None),
    };
    Ok(Some(m))
}

/// Resolves a module reference; relative paths are taken from `base`.
pub fn resolve_module(r: &Value, base: &Path) -> Result<Arc<FinModule>> {
    match r {
        Value::String(s) => match named_module(s)? {
            Some(m) => Ok(Arc::new(m)),
            None => Ok(Arc::new(read_module(&base.join(s))?)),
        },
        Value::Object(_) => Ok(Arc::new(serde_json::from_value::<ModuleDoc>(r.clone())?.into_module()?)),
        _ => Err(Error::Format("module reference must be a string or a module document".into())),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub source: Value,
    pub target: Value,
    pub map: Vec<usize>,
}

impl MorphismDoc {
    /// A document with both endpoints inlined.
    pub fn inline(f: &Hom) -> Self {
        MorphismDoc {
            source: serde_json::to_value(ModuleDoc::from_module(f.source())).expect("serializable"),
            target: serde_json::to_value(ModuleDoc::from_module(f.target())).expect("serializable"),
            map: f.map().to_vec(),
        }
    }

    pub fn to_hom(&self, base: &Path) -> Result<Hom> {
        let source = resolve_module(&self.source, base)?;
        let target = resolve_module(&self.target, base)?;
        Hom::new(source, target, self.map.clone())
    }
}

pub fn read_morphism(path: &Path) -> Result<Hom> {
    let doc: MorphismDoc = serde_json::from_str(&read(path)?)?;
    doc.to_hom(path.parent().unwrap_or(Path::new(".")))
}

/// `{"pins": [[a, b], ...], "restrict": [[a, [b, ...]], ...], "injective": bool}`,
/// all fields optional, elements given by ID.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsDoc {
    #[serde(default)]
    pub pins: Vec<(usize, usize)>,
    #[serde(default)]
    pub restrict: Vec<(usize, Vec<usize>)>,
    #[serde(default)]
    pub injective: bool,
}

impl ConstraintsDoc {
    pub fn to_constraints(&self, source: &FinModule, target: &FinModule) -> Result<HomConstraints> {
        let mut c = HomConstraints::new();
        let check = |a: usize, b: usize| {
            if a >= source.len() || b >= target.len() {
                Err(Error::InvalidParameter(format!("constraint ({a}, {b}) is out of range")))
            } else {
                Ok(())
            }
        };
        for &(a, b) in &self.pins {
            check(a, b)?;
            c = c.pin(a, b);
        }
        for (a, values) in &self.restrict {
            for &b in values {
                check(*a, b)?;
            }
            c = c.restrict(*a, values.clone());
        }
        if self.injective {
            c = c.injective();
        }
        Ok(c)
    }
}

pub fn read_constraints(path: &Path) -> Result<ConstraintsDoc> {
    Ok(serde_json::from_str(&read(path)?)?)
}

/// A matrix document: either a bare array of rows (flavor taken from
/// `default_flavor`) or `{"flavor": ..., "rows": [...]}`.
pub fn matrix_from_json(text: &str, default_flavor: Flavor) -> Result<Matrix> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Bare(Vec<Vec<i8>>),
        Tagged { flavor: Flavor, rows: Vec<Vec<i8>>, #[serde(default)] cols: usize },
    }
    match serde_json::from_str::<Doc>(text)? {
        Doc::Bare(rows) => Matrix::new(default_flavor, rows, 0),
        Doc::Tagged { flavor, rows, cols } => Matrix::new(flavor, rows, cols),
    }
}

pub fn read_matrix(path: &Path, default_flavor: Flavor) -> Result<Matrix> {
    matrix_from_json(&read(path)?, default_flavor)
}

pub fn matrix_to_json(a: &Matrix) -> Value {
    Value::from(a.to_rows())
}
