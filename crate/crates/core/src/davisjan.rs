//! Cohomology of quasitoric manifolds over products of simplices, computed from
//! the characteristic matrix via the Davis–Januszkiewicz face ring.
//!
//! Column layout: for blocks `(n_1, ..., n_s)` with `n = sum n_i`, the first `n`
//! columns are the first `n_i` facets of each block in order, and column `n + b`
//! is the last facet of block `b`. Facet variables are named `v1..vm` by column.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{Family, ManifoldDescriptor};
use crate::intpoly::{generators, CoeffDomain, Generators, GradedPoly, PolyError};
use crate::quotient::{NormalElement, QuotientError, RingPresentation};

#[derive(Debug, Error)]
pub enum DjError {
    #[error("simplex blocks must be non-empty with every size >= 1")]
    InvalidBlocks,
    #[error("characteristic matrix has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    Shape {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("linear form is not a homogeneous linear combination of facet variables")]
    NotLinear,
    #[error("matrix is not in reduced form: no pivot columns forming a signed permutation (general integer elimination is not supported)")]
    NoUnimodularPivot,
    #[error("block {block} keeps {count} surviving variables after elimination, expected 1")]
    BlockSurvivors { block: usize, count: usize },
    #[error("unsupported elimination: {0}")]
    Unsupported(String),
    #[error("{0} is not one of the quasitoric members covered by the characteristic matrix")]
    NotQuasitoric(ManifoldDescriptor),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

/// Orbit space `Δ^{n_1} × … × Δ^{n_s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexBlocks {
    sizes: Vec<u32>,
}

impl SimplexBlocks {
    pub fn new(sizes: Vec<u32>) -> Result<Self, DjError> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(DjError::InvalidBlocks);
        }
        Ok(SimplexBlocks { sizes })
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// `n = sum n_i`.
    pub fn dim(&self) -> usize {
        self.sizes.iter().map(|&s| s as usize).sum()
    }

    /// `m = sum (n_i + 1)`.
    pub fn facet_count(&self) -> usize {
        self.dim() + self.count()
    }

    /// Column indices of block `b`, its last facet last.
    pub fn columns(&self, b: usize) -> Vec<usize> {
        let start: usize = self.sizes[..b].iter().map(|&s| s as usize).sum();
        let mut cols: Vec<usize> = (start..start + self.sizes[b] as usize).collect();
        cols.push(self.dim() + b);
        cols
    }

    pub fn block_of(&self, col: usize) -> usize {
        let n = self.dim();
        if col >= n {
            return col - n;
        }
        let mut acc = 0;
        for (b, &s) in self.sizes.iter().enumerate() {
            acc += s as usize;
            if col < acc {
                return b;
            }
        }
        unreachable!("column {col} out of range")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CharMatrixJson", into = "CharMatrixJson")]
pub struct CharMatrix {
    blocks: SimplexBlocks,
    rows: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct CharMatrixJson {
    blocks: Vec<u32>,
    rows: Vec<Vec<i64>>,
}

impl TryFrom<CharMatrixJson> for CharMatrix {
    type Error = DjError;

    fn try_from(j: CharMatrixJson) -> Result<Self, DjError> {
        CharMatrix::new(SimplexBlocks::new(j.blocks)?, j.rows)
    }
}

impl From<CharMatrix> for CharMatrixJson {
    fn from(m: CharMatrix) -> Self {
        CharMatrixJson {
            blocks: m.blocks.sizes,
            rows: m.rows,
        }
    }
}

impl CharMatrix {
    pub fn new(blocks: SimplexBlocks, rows: Vec<Vec<i64>>) -> Result<Self, DjError> {
        let (want_rows, want_cols) = (blocks.dim(), blocks.facet_count());
        let cols = rows.first().map_or(want_cols, Vec::len);
        if rows.len() != want_rows || rows.iter().any(|r| r.len() != want_cols) {
            return Err(DjError::Shape {
                rows: rows.len(),
                cols,
                want_rows,
                want_cols,
            });
        }
        Ok(CharMatrix { blocks, rows })
    }

    pub fn blocks(&self) -> &SimplexBlocks {
        &self.blocks
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }
}

/// `Z[v1..vm]/I` together with the linear ideal `J` (possibly empty).
#[derive(Clone, Debug)]
pub struct FaceRingPresentation {
    pub blocks: SimplexBlocks,
    pub gens: Generators,
    pub monomials: Vec<GradedPoly>,
    pub linear: Vec<GradedPoly>,
}

fn facet_gens(m: usize) -> Generators {
    let names: Vec<String> = (1..=m).map(|i| format!("v{i}")).collect();
    let list: Vec<(&str, u32)> = names.iter().map(|n| (n.as_str(), 2)).collect();
    generators(&list).expect("distinct facet names")
}

fn unit_exps(m: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; m];
    e[j] = 1;
    e
}

pub fn face_ring(blocks: &SimplexBlocks) -> FaceRingPresentation {
    let m = blocks.facet_count();
    let gens = facet_gens(m);
    let monomials = (0..blocks.count())
        .map(|b| {
            let mut e = vec![0; m];
            for c in blocks.columns(b) {
                e[c] = 1;
            }
            GradedPoly::monomial(&gens, CoeffDomain::Integers, &e, 1).unwrap()
        })
        .collect();
    FaceRingPresentation {
        blocks: blocks.clone(),
        gens,
        monomials,
        linear: Vec::new(),
    }
}

/// Row `i` contracted with the facet variables: `sum_j λ_ij v_j`.
pub fn linear_ideal(matrix: &CharMatrix) -> Vec<GradedPoly> {
    let m = matrix.blocks.facet_count();
    let gens = facet_gens(m);
    matrix
        .rows
        .iter()
        .map(|row| {
            let terms = row.iter().enumerate().map(|(j, &c)| (unit_exps(m, j), c));
            GradedPoly::from_terms(&gens, CoeffDomain::Integers, terms).unwrap()
        })
        .collect()
}

/// Output of the elimination: the ordinary cohomology presentation plus the
/// image of every facet variable in it.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub presentation: RingPresentation,
    pub images: Vec<GradedPoly>,
    /// Surviving column of each block.
    pub survivors: Vec<usize>,
}

fn coefficient_rows(
    fr: &FaceRingPresentation,
    forms: &[GradedPoly],
) -> Result<Vec<Vec<i64>>, DjError> {
    let m = fr.blocks.facet_count();
    forms
        .iter()
        .map(|f| {
            if f.gens().len() != m || f.degrees().iter().any(|&d| d != 2) {
                return Err(DjError::NotLinear);
            }
            (0..m)
                .map(|j| {
                    i64::try_from(f.coefficient(&unit_exps(m, j))).map_err(|_| DjError::NotLinear)
                })
                .collect()
        })
        .collect()
}

/// Row holding the single `±1` entry of column `c`, if the column has that shape.
fn unit_row(rows: &[Vec<i64>], c: usize) -> Option<usize> {
    let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
    match nz[..] {
        [i] if rows[i][c].abs() == 1 => Some(i),
        _ => None,
    }
}

fn survivor_counts(blocks: &SimplexBlocks, pivots: &[usize]) -> Vec<usize> {
    let mut counts: Vec<usize> = blocks.sizes.iter().map(|&s| s as usize + 1).collect();
    for &p in pivots {
        counts[blocks.block_of(p)] -= 1;
    }
    counts
}

fn first_bad_block(counts: &[usize]) -> Option<(usize, usize)> {
    counts.iter().copied().enumerate().find(|&(_, c)| c != 1)
}

/// Pivot column per row. The search walks columns in increasing order, so the
/// layout's last facets survive whenever they can.
fn find_pivots(blocks: &SimplexBlocks, rows: &[Vec<i64>]) -> Result<Vec<usize>, DjError> {
    let n = rows.len();
    let m = blocks.facet_count();
    let mut candidates = vec![Vec::new(); n];
    for c in 0..m {
        if let Some(i) = unit_row(rows, c) {
            candidates[i].push(c);
        }
    }
    if candidates.iter().any(Vec::is_empty) {
        return Err(DjError::NoUnimodularPivot);
    }

    fn dfs(
        i: usize,
        cands: &[Vec<usize>],
        chosen: &mut Vec<usize>,
        blocks: &SimplexBlocks,
        first_bad: &mut Option<(usize, usize)>,
    ) -> bool {
        if i == cands.len() {
            match first_bad_block(&survivor_counts(blocks, chosen)) {
                None => return true,
                Some(bad) => {
                    first_bad.get_or_insert(bad);
                    return false;
                }
            }
        }
        for &c in &cands[i] {
            chosen.push(c);
            if dfs(i + 1, cands, chosen, blocks, first_bad) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::with_capacity(n);
    let mut bad = None;
    if dfs(0, &candidates, &mut chosen, blocks, &mut bad) {
        return Ok(chosen);
    }
    let (block, count) = bad.expect("every row has a candidate");
    Err(DjError::BlockSurvivors { block, count })
}

pub fn eliminate(fr: &FaceRingPresentation, forms: &[GradedPoly]) -> Result<Elimination, DjError> {
    let rows = coefficient_rows(fr, forms)?;
    if rows.len() != fr.blocks.dim() {
        return Err(DjError::Shape {
            rows: rows.len(),
            cols: fr.blocks.facet_count(),
            want_rows: fr.blocks.dim(),
            want_cols: fr.blocks.facet_count(),
        });
    }
    let pivots = find_pivots(&fr.blocks, &rows)?;
    eliminate_with_pivots(fr, &rows, &pivots)
}

/// Elimination keeping the given columns (one per block) as survivors.
pub fn eliminate_with_survivors(
    fr: &FaceRingPresentation,
    forms: &[GradedPoly],
    survivors: &[usize],
) -> Result<Elimination, DjError> {
    let rows = coefficient_rows(fr, forms)?;
    let m = fr.blocks.facet_count();
    let pivots: Vec<usize> = (0..m).filter(|c| !survivors.contains(c)).collect();
    if pivots.len() != rows.len() {
        return Err(DjError::NoUnimodularPivot);
    }
    let mut seen = vec![false; rows.len()];
    let mut ordered = vec![usize::MAX; rows.len()];
    for &p in &pivots {
        let i = unit_row(&rows, p).ok_or(DjError::NoUnimodularPivot)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(DjError::NoUnimodularPivot);
        }
        ordered[i] = p;
    }
    if let Some((block, count)) = first_bad_block(&survivor_counts(&fr.blocks, &pivots)) {
        return Err(DjError::BlockSurvivors { block, count });
    }
    eliminate_with_pivots(fr, &rows, &ordered)
}

/// `rel` equals `±var^e` exactly.
fn pure_power_sign(rel: &GradedPoly, var: usize, e: u32) -> Option<i64> {
    if rel.len() != 1 {
        return None;
    }
    let (mono, c) = rel.terms().next()?;
    let ok = mono
        .exps()
        .iter()
        .enumerate()
        .all(|(i, &k)| k == if i == var { e } else { 0 });
    match (ok, i64::try_from(c.clone()).ok()) {
        (true, Some(s @ (1 | -1))) => Some(s),
        _ => None,
    }
}

/// `pivots[i]` is the pivot column of row `i`.
fn eliminate_with_pivots(
    fr: &FaceRingPresentation,
    rows: &[Vec<i64>],
    pivots: &[usize],
) -> Result<Elimination, DjError> {
    let blocks = &fr.blocks;
    let s = blocks.count();
    if s > 2 {
        return Err(DjError::Unsupported(format!(
            "{s} simplex factors; only one or two are presented as a two-generator ring"
        )));
    }
    let m = blocks.facet_count();
    let survivors: Vec<usize> = (0..s)
        .map(|b| {
            blocks
                .columns(b)
                .into_iter()
                .find(|c| !pivots.contains(c))
                .unwrap()
        })
        .collect();

    let gens = generators(&[("x", 2), ("y", 2)]).unwrap();
    let int = CoeffDomain::Integers;
    let var = |b: usize| GradedPoly::monomial(&gens, int, &unit_exps(2, b), 1).unwrap();

    let mut images = vec![GradedPoly::zero(&gens, int); m];
    for (b, &c) in survivors.iter().enumerate() {
        images[c] = var(b);
    }
    for (i, &p) in pivots.iter().enumerate() {
        // λ_ip v_p + sum_{survivors} λ_ij v_j = 0 with λ_ip = ±1.
        let mut img = GradedPoly::zero(&gens, int);
        for (b, &c) in survivors.iter().enumerate() {
            img = img.add(&var(b).scale(&(-rows[i][p] * rows[i][c]).into()))?;
        }
        images[p] = img;
    }

    let mut relations: Vec<GradedPoly> = fr
        .monomials
        .iter()
        .map(|mono| mono.substitute(&images))
        .collect::<Result<_, _>>()?;

    if s == 1 {
        let n = blocks.sizes[0];
        pure_power_sign(&relations[0], 0, n + 1).ok_or_else(|| {
            DjError::Unsupported("single block relation is not a power of its survivor".into())
        })?;
        let presentation = RingPresentation::raw(n, var(1))?.canonicalize();
        return Ok(Elimination {
            presentation,
            images,
            survivors,
        });
    }

    // The block whose relation is a unit times a pure power becomes x.
    let x_block = (0..2)
        .find(|&b| pure_power_sign(&relations[b], b, blocks.sizes[b] + 1).is_some())
        .ok_or_else(|| DjError::Unsupported("neither block relation is a pure power".into()))?;
    if x_block == 1 {
        let swap = [var(1), var(0)];
        for p in images.iter_mut().chain(relations.iter_mut()) {
            *p = p.substitute(&swap)?;
        }
    }
    let w_block = 1 - x_block;
    let mut rel = relations[w_block].clone();
    let lead = rel.coefficient(&[0, blocks.sizes[w_block] + 1]);
    if lead == (-1).into() {
        rel = rel.neg();
    }
    let presentation = RingPresentation::raw(blocks.sizes[x_block], rel)?.canonicalize();
    let survivors = if x_block == 1 {
        vec![survivors[1], survivors[0]]
    } else {
        survivors
    };
    Ok(Elimination {
        presentation,
        images,
        survivors,
    })
}

/// The characteristic matrix of `A(l,rho,k1,k2)` over `Δ^l × Δ^{k1+k2-1}`:
///
/// ```text
/// ( I_l  0       0          1    0 )
/// ( 0    I_k1    0          rho  1 )
/// ( 0    0       I_{k2-1}   0    1 )
/// ```
///
/// `B(l,rho,1,0)` shares its orbit space and characteristic function with
/// `A(l,rho,1,1)`.
pub fn char_matrix_for(d: &ManifoldDescriptor) -> Result<CharMatrix, DjError> {
    let d = match d.family() {
        Family::A => *d,
        Family::B if d.k1() == 1 && d.k2() == 0 => {
            ManifoldDescriptor::a(d.ell().into(), d.rho(), 1, 1).expect("valid A parameters")
        }
        Family::B => return Err(DjError::NotQuasitoric(*d)),
    };
    let (ell, k1) = (d.ell() as usize, d.k1() as usize);
    let fiber = d.fiber_sum() as usize - 1;
    let blocks = SimplexBlocks::new(vec![ell as u32, fiber as u32])?;
    let n = blocks.dim();
    let mut rows = vec![vec![0i64; n + 2]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 1;
        if i < ell {
            row[n] = 1;
        } else {
            if i < ell + k1 {
                row[n] = d.rho();
            }
            row[n + 1] = 1;
        }
    }
    CharMatrix::new(blocks, rows)
}

#[derive(Clone, Debug)]
pub struct DjClasses {
    pub elimination: Elimination,
    pub pontrjagin: NormalElement,
    pub stiefel_whitney: NormalElement,
}

/// `p = prod (1 + v_i^2)` and `w = prod (1 + v_i)` pulled back to the
/// ordinary cohomology.
pub fn dj_characteristic_classes(matrix: &CharMatrix) -> Result<DjClasses, DjError> {
    let fr = face_ring(&matrix.blocks);
    let elimination = eliminate(&fr, &linear_ideal(matrix))?;
    let ring = &elimination.presentation;
    let one = GradedPoly::one(ring.gens(), CoeffDomain::Integers);
    let mut p = one.clone();
    let mut w = one.clone();
    for v in &elimination.images {
        p = p.mul(&one.add(&v.mul(v)?)?)?;
        w = w.mul(&one.add(v)?)?;
    }
    let pontrjagin = ring.normal_form(&p)?;
    let stiefel_whitney = ring.reduce_mod2().normal_form(&w.reduce_mod2())?;
    Ok(DjClasses {
        elimination,
        pontrjagin,
        stiefel_whitney,
    })
}
