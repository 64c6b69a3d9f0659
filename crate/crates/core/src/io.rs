//! JSON input and result documents. Every number is written as a string so
//! rationals and big integers round-trip exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::averaging::{det_table, grid_sums, lefschetz_from, nielsen_from, InvariantData};
use crate::crystal::{AffineElement, CrystGroup, GroupReport, IDENTITY_NAME};
use crate::error::{Error, Result};
use crate::exact::rational::{format_rational, parse_rational};
use crate::exact::{Int, RatMatrix, RatVec};
use crate::nvmorph::{MorphismReport, NvMorphism, Permutation, PermutedTuple};
use crate::oracle::{
    bound_is_stable, enumerate_fixed_points, fiber_counts, oracle_invariants, verify_lift, AffineLift, AffineMap,
    LiftReport, OracleOptions,
};
use crate::trace::{reidemeister_trace_with, ClassContext, ReidClass, TraceVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub group: GroupDoc,
    pub morphism: MorphismDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub dimension: usize,
    pub lattice: Vec<LatticeGeneratorDoc>,
    #[serde(default)]
    pub holonomy: Vec<HolonomyDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeGeneratorDoc {
    pub name: String,
    pub vector: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyDoc {
    pub name: String,
    pub translation: Vec<String>,
    /// Row-major.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub n: usize,
    /// Keyed by generator name.
    pub images: BTreeMap<String, ImageDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageDoc {
    pub components: Vec<ComponentDoc>,
    /// One-line notation, 1-based; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentDoc {
    /// A word in the group's generators, e.g. `[["b", 1], ["a", -2]]`.
    Word { word: Vec<(String, i64)> },
    /// An explicit affine element; the matrix defaults to the identity.
    Explicit {
        translation: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<String>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftDoc {
    pub branches: Vec<BranchDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchDoc {
    pub matrix: Vec<Vec<String>>,
    pub translation: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_bound: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinctness_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_check: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_check: Option<bool>,
}

fn parse_vec(xs: &[String]) -> Result<RatVec> {
    xs.iter().map(|s| parse_rational(s)).collect()
}

fn parse_matrix(rows: &[Vec<String>], dim: usize, what: &str) -> Result<RatMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Dimension(format!("{what} must be {dim}x{dim}")));
    }
    RatMatrix::from_rows(rows.iter().map(|r| parse_vec(r)).collect::<Result<_>>()?)
}

fn parse_vector(xs: &[String], dim: usize, what: &str) -> Result<RatVec> {
    if xs.len() != dim {
        return Err(Error::Dimension(format!("{what} must have length {dim}")));
    }
    parse_vec(xs)
}

fn fmt_vec(v: &[crate::exact::Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn fmt_ints(v: &[Int]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn fmt_matrix(m: &RatMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| fmt_vec(r)).collect()
}

/// A parsed, not yet validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub morphism: NvMorphism,
    pub lift: Option<AffineLift>,
    pub oracle: OracleOptions,
    pub fiber_check: bool,
    pub bound_check: bool,
}

impl InputDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn build_group(&self) -> Result<CrystGroup> {
        let g = &self.group;
        let m = g.dimension;
        let lattice = g
            .lattice
            .iter()
            .map(|l| Ok((l.name.clone(), parse_vector(&l.vector, m, &format!("lattice vector {}", l.name))?)))
            .collect::<Result<Vec<_>>>()?;
        let reps = g
            .holonomy
            .iter()
            .map(|h| {
                let v = parse_vector(&h.translation, m, &format!("translation of {}", h.name))?;
                let a = parse_matrix(&h.matrix, m, &format!("matrix of {}", h.name))?;
                Ok((h.name.clone(), AffineElement::new(v, a)?))
            })
            .collect::<Result<Vec<_>>>()?;
        CrystGroup::new(m, lattice, reps)
    }

    pub fn build(&self) -> Result<Problem> {
        let group = self.build_group()?;
        let m = group.dim();
        let n = self.morphism.n;
        let known: Vec<String> = group.generators().iter().map(|&g| group.generator_name(g).to_string()).collect();
        if let Some(extra) = self.morphism.images.keys().find(|k| !known.contains(k)) {
            return Err(Error::InvalidMorphism(format!("image given for unknown generator {extra}")));
        }
        let mut images = Vec::new();
        for name in &known {
            let img = self
                .morphism
                .images
                .get(name)
                .ok_or_else(|| Error::InvalidMorphism(format!("no image for generator {name}")))?;
            let components = img
                .components
                .iter()
                .map(|c| match c {
                    ComponentDoc::Word { word } => {
                        let w = word
                            .iter()
                            .map(|(g, e)| {
                                let gen = group
                                    .generator_by_name(g)
                                    .ok_or_else(|| Error::InvalidMorphism(format!("unknown generator {g} in a word")))?;
                                Ok((gen, *e))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        group.evaluate_word(&w)
                    }
                    ComponentDoc::Explicit { translation, matrix } => {
                        let v = parse_vector(translation, m, &format!("component of the image of {name}"))?;
                        let a = match matrix {
                            Some(rows) => parse_matrix(rows, m, &format!("component of the image of {name}"))?,
                            None => RatMatrix::identity(m),
                        };
                        AffineElement::new(v, a)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let perm = match &img.permutation {
                Some(p) if p.len() != n => {
                    return Err(Error::InvalidMorphism(format!("permutation of {name} has length {}", p.len())))
                }
                Some(p) => Permutation::from_one_line(p).map_err(|e| Error::InvalidMorphism(e.to_string()))?,
                None => Permutation::identity(n),
            };
            images.push(PermutedTuple::new(components, perm)?);
        }
        let morphism = NvMorphism::new(group, n, images)?;
        let lift = match &self.lift {
            None => None,
            Some(l) => Some(AffineLift::new(
                l.branches
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let what = format!("lift branch {}", i + 1);
                        AffineMap::new(parse_matrix(&b.matrix, m, &what)?, parse_vector(&b.translation, m, &what)?)
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?),
        };
        let o = self.options.clone().unwrap_or_default();
        let defaults = OracleOptions::default();
        let oracle = OracleOptions {
            bound: o.oracle_bound,
            max_cells: o.max_cells.unwrap_or(defaults.max_cells),
            grid: o.distinctness_grid.unwrap_or(defaults.grid),
        };
        Ok(Problem {
            morphism,
            lift,
            oracle,
            fiber_check: o.fiber_check.unwrap_or(true),
            bound_check: o.bound_check.unwrap_or(true),
        })
    }

    /// Writes a morphism (and optional lift) with explicit components.
    pub fn from_parts(f: &NvMorphism, lift: Option<&AffineLift>) -> Self {
        let g = f.group();
        let group = GroupDoc {
            dimension: g.dim(),
            lattice: g
                .generators()
                .iter()
                .take(g.dim())
                .zip(g.lattice_generators())
                .map(|(&gen, v)| LatticeGeneratorDoc { name: g.generator_name(gen).to_string(), vector: fmt_vec(v) })
                .collect(),
            holonomy: g
                .reps()
                .iter()
                .skip(1)
                .map(|r| HolonomyDoc {
                    name: r.name.clone(),
                    translation: fmt_vec(r.element.translation_part()),
                    matrix: fmt_matrix(r.element.linear_part()),
                })
                .collect(),
        };
        let images = g
            .generators()
            .iter()
            .map(|&gen| {
                let img = f.image(gen);
                let components = img
                    .components
                    .iter()
                    .map(|c| ComponentDoc::Explicit {
                        translation: fmt_vec(c.translation_part()),
                        matrix: if c.linear_part().is_identity() { None } else { Some(fmt_matrix(c.linear_part())) },
                    })
                    .collect();
                let permutation = if img.perm.is_identity() { None } else { Some(img.perm.one_line()) };
                (g.generator_name(gen).to_string(), ImageDoc { components, permutation })
            })
            .collect();
        let lift = lift.map(|l| LiftDoc {
            branches: l
                .branches
                .iter()
                .map(|b| BranchDoc { matrix: fmt_matrix(&b.matrix), translation: fmt_vec(&b.translation) })
                .collect(),
        });
        InputDocument { group, morphism: MorphismDoc { n: f.n(), images }, lift, options: None }
    }
}

/// Outcome of all structural checks.
#[derive(Clone, Debug)]
pub struct Validation {
    pub group: GroupReport,
    pub morphism: Option<MorphismReport>,
    pub lift: Option<LiftReport>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.group.is_valid()
            && self.morphism.as_ref().is_some_and(|m| m.is_valid())
            && self.lift.as_ref().is_none_or(|l| l.is_equivariant())
    }

    pub fn messages(&self) -> Vec<String> {
        let mut out: Vec<String> = self.group.violations.iter().map(|v| format!("group: {v}")).collect();
        if let Some(m) = &self.morphism {
            out.extend(m.violations.iter().map(|v| format!("morphism: {v}")));
        }
        if let Some(l) = &self.lift {
            out.extend(l.equivariance.iter().map(|e| {
                format!("lift: branch {} is not equivariant under generator {}", e.branch + 1, e.generator)
            }));
        }
        out
    }

    pub fn warnings(&self) -> Vec<String> {
        let Some(l) = &self.lift else { return Vec::new() };
        l.collisions
            .iter()
            .map(|c| {
                format!(
                    "lift: branches {} and {} agree mod the group at ({})",
                    c.branches.0 + 1,
                    c.branches.1 + 1,
                    fmt_vec(&c.point).join(", ")
                )
            })
            .collect()
    }

    pub fn ensure(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidMorphism(self.messages().join("; ")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationDoc {
    pub valid: bool,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(if self.valid { "valid\n" } else { "invalid\n" });
        for v in &self.violations {
            out += &format!("violation: {v}\n");
        }
        for w in &self.warnings {
            out += &format!("warning: {w}\n");
        }
        out
    }
}

impl From<&Validation> for ValidationDoc {
    fn from(v: &Validation) -> Self {
        ValidationDoc { valid: v.is_valid(), violations: v.messages(), warnings: v.warnings() }
    }
}

impl Problem {
    pub fn validate(&self) -> Result<Validation> {
        let group = self.morphism.group().validate();
        if !group.is_valid() {
            return Ok(Validation { group, morphism: None, lift: None });
        }
        let morphism = self.morphism.validate()?;
        let lift = match &self.lift {
            Some(l) if morphism.is_valid() => Some(verify_lift(&self.morphism, l, self.oracle.grid)?),
            _ => None,
        };
        Ok(Validation { group, morphism: Some(morphism), lift })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub lefschetz: bool,
    pub nielsen: bool,
    pub trace: bool,
}

impl Selection {
    pub const ALL: Selection = Selection { lefschetz: true, nielsen: true, trace: true };
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceTermDoc {
    pub branch: String,
    pub holonomy_rep: String,
    pub lattice_coords: Vec<String>,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DetDoc {
    pub branch: String,
    pub holonomy_rep: String,
    pub det: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagnosticsDoc {
    pub s_basis: Vec<Vec<String>>,
    pub index_pi_gamma: String,
    pub index_gamma_s: String,
    pub index_pi_s: String,
    pub determinants: Vec<DetDoc>,
    pub det_sum: String,
    pub abs_det_sum: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeckDoc {
    pub lattice_coords: Vec<String>,
    pub holonomy_rep: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordDoc {
    pub point: Vec<String>,
    pub branch: String,
    pub deck: DeckDoc,
    pub index: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberDoc {
    pub record: String,
    pub geometric: String,
    pub algebraic: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleDoc {
    pub bound: String,
    pub bound_stable: Option<bool>,
    pub records: Vec<RecordDoc>,
    pub lefschetz: String,
    pub nielsen: String,
    pub trace: Vec<TraceTermDoc>,
    pub fiber_counts: Option<Vec<FiberDoc>>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonDoc {
    pub agree: bool,
    pub differences: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResultDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lefschetz: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nielsen: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceTermDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonDoc>,
}

fn trace_doc(group: &CrystGroup, t: &TraceVector) -> Vec<TraceTermDoc> {
    t.iter()
        .map(|(c, k)| TraceTermDoc {
            branch: (c.branch + 1).to_string(),
            holonomy_rep: group.reps()[c.rep_index].name.clone(),
            lattice_coords: fmt_ints(&c.lattice_coords),
            coefficient: k.to_string(),
        })
        .collect()
}

/// The algebraic pipeline: averaged determinants and the averaged trace.
pub struct Algebraic {
    pub inv: InvariantData,
    pub lefschetz: Int,
    pub nielsen: Int,
    pub trace: Option<TraceVector>,
}

pub fn algebraic(f: &NvMorphism, ctx: Option<&ClassContext<'_>>) -> Result<(Algebraic, DiagnosticsDoc)> {
    let inv = match ctx {
        Some(c) => c.invariant().clone(),
        None => InvariantData::new(f)?,
    };
    let table = det_table(&inv)?;
    let lefschetz = lefschetz_from(&inv, &table)?;
    let nielsen = nielsen_from(&inv, &table)?;
    let trace = match ctx {
        Some(c) => Some(reidemeister_trace_with(c, &inv, &crate::trace::default_reps(f))?),
        None => None,
    };
    let (sum, abs_sum) = grid_sums(&table);
    let group = f.group();
    let diag = DiagnosticsDoc {
        s_basis: inv.s.basis().iter().map(|v| fmt_vec(v)).collect(),
        index_pi_gamma: inv.index_pi_gamma.to_string(),
        index_gamma_s: inv.index_gamma_s.to_string(),
        index_pi_s: inv.index_pi_s.to_string(),
        determinants: table
            .iter()
            .map(|t| DetDoc {
                branch: (t.branch + 1).to_string(),
                holonomy_rep: group.reps()[t.rep_index].name.clone(),
                det: format_rational(&t.det),
            })
            .collect(),
        det_sum: format_rational(&sum),
        abs_det_sum: format_rational(&abs_sum),
    };
    Ok((Algebraic { inv, lefschetz, nielsen, trace }, diag))
}

/// `compute`: the requested invariants plus diagnostics.
pub fn compute_document(p: &Problem, sel: Selection) -> Result<ResultDocument> {
    let f = &p.morphism;
    let ctx = if sel.trace { Some(ClassContext::new(f)?) } else { None };
    let (alg, diag) = algebraic(f, ctx.as_ref())?;
    Ok(ResultDocument {
        lefschetz: sel.lefschetz.then(|| alg.lefschetz.to_string()),
        nielsen: sel.nielsen.then(|| alg.nielsen.to_string()),
        trace: alg.trace.as_ref().map(|t| trace_doc(f.group(), t)),
        diagnostics: Some(diag),
        oracle: None,
        comparison: None,
    })
}

/// Geometric invariants recovered from the lift.
pub struct Geometric {
    pub lefschetz: Int,
    pub nielsen: Int,
    pub trace: TraceVector,
}

pub fn oracle_section(p: &Problem, ctx: &ClassContext<'_>, warnings: Vec<String>) -> Result<(Geometric, OracleDoc)> {
    let f = &p.morphism;
    let lift = p.lift.as_ref().ok_or_else(|| Error::Config("the input has no lift block".into()))?;
    let e = enumerate_fixed_points(f, lift, &p.oracle)?;
    let bound_stable = if p.bound_check { Some(bound_is_stable(f, lift, &e, p.oracle.max_cells)?) } else { None };
    if bound_stable == Some(false) {
        return Err(Error::Inconsistency(format!("doubling the deck bound {} changed the fixed point set", e.bound)));
    }
    let o = oracle_invariants(ctx, &e.records)?;
    let fibers = if p.fiber_check {
        Some(fiber_counts(f, lift, ctx.invariant(), ctx.cosets(), &e.records)?)
    } else {
        None
    };
    let group = f.group();
    let doc = OracleDoc {
        bound: e.bound.to_string(),
        bound_stable,
        records: e
            .records
            .iter()
            .map(|r| RecordDoc {
                point: fmt_vec(&r.point),
                branch: (r.branch + 1).to_string(),
                deck: DeckDoc {
                    lattice_coords: fmt_ints(&r.deck_decomposition.lattice_coords),
                    holonomy_rep: group.reps()[r.deck_decomposition.rep_index].name.clone(),
                },
                index: r.index.to_string(),
            })
            .collect(),
        lefschetz: o.lefschetz.to_string(),
        nielsen: o.nielsen.to_string(),
        trace: trace_doc(group, &o.trace),
        fiber_counts: fibers.map(|fs| {
            fs.iter()
                .map(|c| FiberDoc {
                    record: (c.record + 1).to_string(),
                    geometric: c.geometric.to_string(),
                    algebraic: c.algebraic.to_string(),
                })
                .collect()
        }),
        warnings,
    };
    Ok((Geometric { lefschetz: o.lefschetz, nielsen: o.nielsen, trace: o.trace }, doc))
}

/// `oracle`: geometric invariants only.
pub fn oracle_document(p: &Problem, warnings: Vec<String>) -> Result<ResultDocument> {
    let ctx = ClassContext::new(&p.morphism)?;
    let (_, doc) = oracle_section(p, &ctx, warnings)?;
    Ok(ResultDocument { lefschetz: None, nielsen: None, trace: None, diagnostics: None, oracle: Some(doc), comparison: None })
}

fn class_name(group: &CrystGroup, c: &ReidClass) -> String {
    let name = &group.reps()[c.rep_index].name;
    let coords = fmt_ints(&c.lattice_coords).join(",");
    if name == IDENTITY_NAME {
        format!("[({coords}), branch {}]", c.branch + 1)
    } else {
        format!("[({coords})·{name}, branch {}]", c.branch + 1)
    }
}

pub fn differences(group: &CrystGroup, alg: &Algebraic, geo: &Geometric) -> Vec<String> {
    let mut out = Vec::new();
    if alg.lefschetz != geo.lefschetz {
        out.push(format!("lefschetz: algebraic {} vs geometric {}", alg.lefschetz, geo.lefschetz));
    }
    if alg.nielsen != geo.nielsen {
        out.push(format!("nielsen: algebraic {} vs geometric {}", alg.nielsen, geo.nielsen));
    }
    let empty = TraceVector::new();
    let t = alg.trace.as_ref().unwrap_or(&empty);
    let classes: std::collections::BTreeSet<&ReidClass> = t.iter().chain(geo.trace.iter()).map(|(c, _)| c).collect();
    for c in classes {
        let (a, b) = (t.get(c), geo.trace.get(c));
        if a != b {
            out.push(format!("trace {}: algebraic {a} vs geometric {b}", class_name(group, c)));
        }
    }
    out
}

/// `compare`: both pipelines and their differences.
pub fn compare_document(p: &Problem, warnings: Vec<String>) -> Result<ResultDocument> {
    let f = &p.morphism;
    let ctx = ClassContext::new(f)?;
    let (alg, diag) = algebraic(f, Some(&ctx))?;
    let (geo, odoc) = oracle_section(p, &ctx, warnings)?;
    let diffs = differences(f.group(), &alg, &geo);
    Ok(ResultDocument {
        lefschetz: Some(alg.lefschetz.to_string()),
        nielsen: Some(alg.nielsen.to_string()),
        trace: alg.trace.as_ref().map(|t| trace_doc(f.group(), t)),
        diagnostics: Some(diag),
        oracle: Some(odoc),
        comparison: Some(ComparisonDoc { agree: diffs.is_empty(), differences: diffs }),
    })
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let term = |t: &TraceTermDoc| {
            let rep = if t.holonomy_rep == IDENTITY_NAME { String::new() } else { format!("·{}", t.holonomy_rep) };
            format!("{:>6} [({}){}, branch {}]\n", t.coefficient, t.lattice_coords.join(","), rep, t.branch)
        };
        if let Some(l) = &self.lefschetz {
            out += &format!("lefschetz  {l}\n");
        }
        if let Some(n) = &self.nielsen {
            out += &format!("nielsen    {n}\n");
        }
        if let Some(t) = &self.trace {
            out += &format!("trace      {} classes\n", t.len());
            for x in t {
                out += &term(x);
            }
        }
        if let Some(d) = &self.diagnostics {
            let basis: Vec<String> = d.s_basis.iter().map(|v| format!("({})", v.join(","))).collect();
            out += &format!("S          <{}>\n", basis.join(", "));
            out += &format!("[pi:Gamma] {}  [Gamma:S] {}  [pi:S] {}\n", d.index_pi_gamma, d.index_gamma_s, d.index_pi_s);
            for t in &d.determinants {
                out += &format!("det(I - M[{},{}]) = {}\n", t.branch, t.holonomy_rep, t.det);
            }
        }
        if let Some(o) = &self.oracle {
            out += &format!("oracle     bound {}, {} fixed points\n", o.bound, o.records.len());
            for r in &o.records {
                out += &format!("  ({}) branch {} index {}\n", r.point.join(","), r.branch, r.index);
            }
            out += &format!("oracle lefschetz {}  nielsen {}\n", o.lefschetz, o.nielsen);
            for x in &o.trace {
                out += &term(x);
            }
            for w in &o.warnings {
                out += &format!("warning: {w}\n");
            }
        }
        if let Some(c) = &self.comparison {
            if c.agree {
                out += "algebraic == geometric\n";
            } else {
                for d in &c.differences {
                    out += &format!("mismatch: {d}\n");
                }
            }
        }
        out
    }
}
