//! One-critical simplicial bifiltrations over a grid interval, with per-point
//! homology bases and inclusion-induced maps.
//!
//! Simplices are kept in a single global order (grade lexicographic, then
//! dimension, then id), so the complex at any grade is a subsequence of it and
//! faces always precede their cofaces.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{GridInterval, GridPoint};
use crate::linalg::{Matrix, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    pub id: u32,
    /// Sorted, distinct vertex labels.
    pub vertices: Vec<u32>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// A finite abstract simplicial complex, closed under faces.
#[derive(Debug, Clone, Default)]
pub struct SimplicialComplex {
    simplices: Vec<Simplex>,
    by_vertices: HashMap<Vec<u32>, usize>,
    by_id: HashMap<u32, usize>,
}

impl SimplicialComplex {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn find(&self, vertices: &[u32]) -> Option<usize> {
        self.by_vertices.get(vertices).copied()
    }

    pub fn index_of_id(&self, id: u32) -> Option<usize> {
        self.by_id.get(&id).copied()
    }

    /// Codimension-one faces with their boundary signs.
    fn boundary(&self, idx: usize) -> Vec<(usize, bool)> {
        let s = &self.simplices[idx];
        if s.vertices.len() == 1 {
            return Vec::new();
        }
        (0..s.vertices.len())
            .map(|i| {
                let mut f = s.vertices.clone();
                f.remove(i);
                (self.by_vertices[&f], i % 2 == 1)
            })
            .collect()
    }
}

/// A simplicial complex whose simplices carry entry grades in a grid interval.
#[derive(Debug, Clone)]
pub struct Bifiltration {
    field: PrimeField,
    domain: GridInterval,
    complex: SimplicialComplex,
    grades: Vec<GridPoint>,
    /// Global order: indices into `complex.simplices`.
    order: Vec<usize>,
    /// Position of each simplex in `order`.
    rank_in_order: Vec<usize>,
    /// Codimension-one faces (simplex index, negative sign).
    faces: Vec<Vec<(usize, bool)>>,
}

/// Incremental builder shared by the text parser and programmatic callers.
#[derive(Debug)]
pub struct BifiltrationBuilder {
    field: PrimeField,
    domain: GridInterval,
    complex: SimplicialComplex,
    grades: Vec<GridPoint>,
}

impl BifiltrationBuilder {
    pub fn new(field: PrimeField, domain: GridInterval) -> Self {
        BifiltrationBuilder {
            field,
            domain,
            complex: SimplicialComplex::default(),
            grades: Vec::new(),
        }
    }

    /// Adds a simplex. Faces must already be present. Rules are checked in a
    /// fixed order and the first violation is reported.
    pub fn add(&mut self, id: u32, vertices: &[u32], grade: GridPoint) -> Result<()> {
        if vertices.is_empty() {
            return Err(Error::validation(format!("simplex {id} has no vertices")));
        }
        if self.complex.by_id.contains_key(&id) {
            return Err(Error::validation(format!("duplicate simplex id {id}")));
        }
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        if vs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation(format!("simplex {id} repeats a vertex")));
        }
        if let Some(&other) = self.complex.by_vertices.get(&vs) {
            return Err(Error::validation(format!(
                "simplex {id} duplicates simplex {}",
                self.complex.simplices[other].id
            )));
        }
        if !self.domain.contains(grade) {
            return Err(Error::validation(format!(
                "grade {grade} of simplex {id} lies outside the grid"
            )));
        }
        if vs.len() > 1 {
            for i in 0..vs.len() {
                let mut face = vs.clone();
                face.remove(i);
                let Some(&fidx) = self.complex.by_vertices.get(&face) else {
                    return Err(Error::validation(format!(
                        "face {face:?} of simplex {id} is not declared"
                    )));
                };
                let fgrade = self.grades[fidx];
                if !fgrade.leq(grade) {
                    return Err(Error::validation(format!(
                        "monotonicity violation: face {} at {fgrade} is not below coface {id} at {grade}",
                        self.complex.simplices[fidx].id
                    )));
                }
            }
        }
        let idx = self.complex.simplices.len();
        self.complex.by_vertices.insert(vs.clone(), idx);
        self.complex.by_id.insert(id, idx);
        self.complex.simplices.push(Simplex { id, vertices: vs });
        self.grades.push(grade);
        Ok(())
    }

    pub fn build(self) -> Result<Bifiltration> {
        if self.complex.is_empty() {
            return Err(Error::validation("no simplices"));
        }
        let n = self.complex.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| {
            let g = self.grades[i];
            (g.x, g.y, self.complex.simplices[i].dim(), self.complex.simplices[i].id)
        });
        let mut rank_in_order = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            rank_in_order[i] = pos;
        }
        let faces = (0..n).map(|i| self.complex.boundary(i)).collect();
        Ok(Bifiltration {
            field: self.field,
            domain: self.domain,
            complex: self.complex,
            grades: self.grades,
            order,
            rank_in_order,
            faces,
        })
    }
}

impl Bifiltration {
    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// grid rect: 0 0 3 3
    /// field 2
    /// simplex 0 : 0 @ 0 0
    /// simplex 3 : 0 1 @ 1 2
    /// ```
    ///
    /// `default_field` applies when no `field` line is present.
    pub fn parse(text: &str, default_field: PrimeField) -> Result<Bifiltration> {
        let mut domain: Option<GridInterval> = None;
        let mut field: Option<PrimeField> = None;
        let mut builder: Option<BifiltrationBuilder> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match head {
                "grid" => {
                    if domain.is_some() {
                        return Err(perr("duplicate grid line".into()));
                    }
                    let g: GridInterval = rest.parse().map_err(|e: Error| match e {
                        Error::Syntax(m) => perr(m),
                        other => Error::validation(format!("line {line_no}: {other}")),
                    })?;
                    domain = Some(g);
                }
                "field" => {
                    if field.is_some() {
                        return Err(perr("duplicate field line".into()));
                    }
                    if builder.is_some() {
                        return Err(perr("field must precede simplices".into()));
                    }
                    let p: u32 = rest
                        .trim()
                        .parse()
                        .map_err(|_| perr(format!("bad field modulus `{}`", rest.trim())))?;
                    field = Some(
                        PrimeField::new(p)
                            .map_err(|e| Error::validation(format!("line {line_no}: {e}")))?,
                    );
                }
                "simplex" => {
                    let (id, verts, grade) = parse_simplex_line(rest).map_err(perr)?;
                    if builder.is_none() {
                        let Some(d) = domain.clone() else {
                            return Err(perr("simplex before grid line".into()));
                        };
                        builder = Some(BifiltrationBuilder::new(field.unwrap_or(default_field), d));
                    }
                    builder
                        .as_mut()
                        .unwrap()
                        .add(id, &verts, grade)
                        .map_err(|e| Error::validation(format!("line {line_no}: {e}")))?;
                }
                other => return Err(perr(format!("unknown directive `{other}`"))),
            }
        }
        match builder {
            Some(b) => b.build(),
            None => Err(Error::validation("no simplices")),
        }
    }

    /// Serializes back to the text format, simplices in global order.
    pub fn to_text(&self) -> String {
        let mut s = format!("grid {}\nfield {}\n", self.domain, self.field.modulus());
        // faces first: sort by dimension then global order
        let mut idx: Vec<usize> = self.order.clone();
        idx.sort_by_key(|&i| (self.complex.simplices[i].dim(), self.rank_in_order[i]));
        for i in idx {
            let sx = &self.complex.simplices[i];
            let vs: Vec<String> = sx.vertices.iter().map(u32::to_string).collect();
            let g = self.grades[i];
            s.push_str(&format!("simplex {} : {} @ {} {}\n", sx.id, vs.join(" "), g.x, g.y));
        }
        s
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn domain(&self) -> &GridInterval {
        &self.domain
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn grade(&self, simplex: usize) -> GridPoint {
        self.grades[simplex]
    }

    /// Simplex indices in the global filtration order.
    pub fn global_order(&self) -> &[usize] {
        &self.order
    }

    /// `max(|K|, |P|)`
    pub fn size_parameter(&self) -> usize {
        self.complex.len().max(self.domain.len())
    }

    pub fn max_dim(&self) -> usize {
        self.complex.simplices.iter().map(Simplex::dim).max().unwrap_or(0)
    }

    pub(crate) fn faces(&self, simplex: usize) -> &[(usize, bool)] {
        &self.faces[simplex]
    }

    /// Simplices present at `p`, in global order.
    pub fn complex_at(&self, p: GridPoint) -> Result<Vec<usize>> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain(p));
        }
        Ok(self
            .order
            .iter()
            .copied()
            .filter(|&i| self.grades[i].leq(p))
            .collect())
    }

    /// Homology basis of `H_degree(F(p))`.
    pub fn homology_basis(&self, p: GridPoint, degree: usize) -> Result<HomologyBasis> {
        let members = self.complex_at(p)?;
        Ok(self.homology_of(&members, degree))
    }

    /// Homology basis of an arbitrary subcomplex given by simplex indices.
    pub fn homology_of(&self, members: &[usize], degree: usize) -> HomologyBasis {
        let f = self.field;
        let dim_of = |i: usize| self.complex.simplices[i].dim();
        let mut sorted: Vec<usize> = members.to_vec();
        sorted.sort_by_key(|&i| self.rank_in_order[i]);
        let chains: Vec<usize> = sorted.iter().copied().filter(|&i| dim_of(i) == degree).collect();
        let lower: Vec<usize> = if degree == 0 {
            Vec::new()
        } else {
            sorted.iter().copied().filter(|&i| dim_of(i) == degree - 1).collect()
        };
        let upper: Vec<usize> = sorted.iter().copied().filter(|&i| dim_of(i) == degree + 1).collect();
        let pos = |list: &[usize]| -> HashMap<usize, usize> {
            list.iter().enumerate().map(|(k, &i)| (i, k)).collect()
        };
        let lower_pos = pos(&lower);
        let chain_pos = pos(&chains);

        let mut dd = Matrix::zeros(f, lower.len(), chains.len());
        if degree > 0 {
            for (c, &s) in chains.iter().enumerate() {
                for &(face, neg) in &self.faces[s] {
                    dd.set(lower_pos[&face], c, if neg { f.neg(1) } else { 1 });
                }
            }
        }
        let mut du = Matrix::zeros(f, chains.len(), upper.len());
        for (c, &s) in upper.iter().enumerate() {
            for &(face, neg) in &self.faces[s] {
                du.set(chain_pos[&face], c, if neg { f.neg(1) } else { 1 });
            }
        }
        let cycles = if degree == 0 {
            Matrix::identity(f, chains.len())
        } else {
            dd.kernel_basis()
        };
        let boundaries = du.column_space();
        let stacked = boundaries.hstack(&cycles);
        let reps: Vec<usize> = stacked
            .independent_columns()
            .into_iter()
            .filter(|&c| c >= boundaries.cols())
            .collect();
        let representatives = stacked.select_cols(&reps);
        let solver = boundaries.hstack(&representatives);
        HomologyBasis {
            degree,
            chains,
            chain_pos,
            n_boundaries: boundaries.cols(),
            representatives,
            solver,
        }
    }

    /// Matrix of `H_degree(F(p) ⊆ F(q))` in the bases of [`homology_basis`](Self::homology_basis).
    pub fn induced_map(&self, p: GridPoint, q: GridPoint, degree: usize) -> Result<Matrix> {
        if !p.leq(q) {
            return Err(Error::NotOrdered(p, q));
        }
        let hp = self.homology_basis(p, degree)?;
        let hq = self.homology_basis(q, degree)?;
        Ok(hp.map_into(&hq))
    }
}

fn parse_simplex_line(rest: &str) -> std::result::Result<(u32, Vec<u32>, GridPoint), String> {
    let (id_part, tail) = rest
        .split_once(':')
        .ok_or("expected `simplex <id> : <vertices> @ <x> <y>`")?;
    let id: u32 = id_part
        .trim()
        .parse()
        .map_err(|_| format!("bad simplex id `{}`", id_part.trim()))?;
    let (vpart, gpart) = tail.split_once('@').ok_or("missing `@ <x> <y>`")?;
    let verts = vpart
        .split_whitespace()
        .map(|t| t.parse::<u32>().map_err(|_| format!("bad vertex `{t}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let g: Vec<i32> = gpart
        .split_whitespace()
        .map(|t| t.parse::<i32>().map_err(|_| format!("bad coordinate `{t}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if g.len() != 2 {
        return Err(format!("grade needs two coordinates, found {}", g.len()));
    }
    if verts.is_empty() {
        return Err("empty vertex list".into());
    }
    Ok((id, verts, GridPoint::new(g[0], g[1])))
}

/// Cycle representatives of a homology group modulo boundaries.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    pub degree: usize,
    /// Degree-`d` simplices of the subcomplex, in global order.
    chains: Vec<usize>,
    chain_pos: HashMap<usize, usize>,
    n_boundaries: usize,
    /// Columns are cycles in `chains` coordinates.
    representatives: Matrix,
    /// `[boundary basis | representatives]`, a basis of the cycle space.
    solver: Matrix,
}

impl HomologyBasis {
    pub fn dim(&self) -> usize {
        self.representatives.cols()
    }

    pub fn chains(&self) -> &[usize] {
        &self.chains
    }

    pub fn representatives(&self) -> &Matrix {
        &self.representatives
    }

    /// Coordinates in this basis of a cycle given over `chains`. Panics if the
    /// chain is not a cycle of this subcomplex.
    pub fn coordinates(&self, cycle: &[u32]) -> Vec<u32> {
        let x = self
            .solver
            .solve(cycle)
            .expect("chain is not a cycle of the target complex");
        x[self.n_boundaries..].to_vec()
    }

    /// Map induced by inclusion of this subcomplex into `target`.
    pub fn map_into(&self, target: &HomologyBasis) -> Matrix {
        let f = self.representatives.field();
        let mut out = Matrix::zeros(f, target.dim(), self.dim());
        if self.dim() == 0 || target.dim() == 0 {
            return out;
        }
        let mut embedded = Matrix::zeros(f, target.chains.len(), self.dim());
        for (k, &s) in self.chains.iter().enumerate() {
            let row = *target
                .chain_pos
                .get(&s)
                .expect("source subcomplex not contained in target");
            for c in 0..self.dim() {
                embedded.set(row, c, self.representatives.get(k, c));
            }
        }
        let x = target
            .solver
            .solve_matrix(&embedded)
            .expect("image of a cycle is a cycle");
        for r in 0..target.dim() {
            for c in 0..self.dim() {
                out.set(r, c, x.get(target.n_boundaries + r, c));
            }
        }
        out
    }
}
