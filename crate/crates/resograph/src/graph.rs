//! Metric graphs and their reduction to flower normal form.
//!
//! A metric graph consists of finitely many vertices, finite edges of
//! positive length and semi-infinite leads. The Hamiltonian acts as
//! `-d^2/dx^2` on every edge; each vertex `v` of degree `d` carries a
//! `d x d` unitary `U_v` encoding the boundary condition
//! `(U_v - I) psi + i (U_v + I) psi' = 0`, where `psi` collects the boundary
//! values at `v` and `psi'` the outward derivatives.
//!
//! Any such graph is unitarily equivalent to a "flower": a single vertex
//! carrying all 2N edge ends and M lead ends, whose coupling matrix is the
//! block-diagonal stack of the vertex couplings conjugated by a slot
//! permutation. All spectral routines in this crate consume the flower form.
//!
//! Slot conventions (fixed, relied upon by the rest of the crate):
//! * internal edges are stably sorted by their source vertex index; edge `j`
//!   of the flower occupies slots `2j` and `2j + 1` (0-based) for its
//!   `x = 0` and `x = length` ends respectively;
//! * leads are stably sorted by anchor vertex and occupy the trailing `M`
//!   slots;
//! * within a vertex, ports are ordered edge-ends first (scanning the edge
//!   list in input order, source end before target end for self-loops),
//!   then leads in input order. Per-vertex coupling matrices are read in
//!   this basis.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Max-norm tolerance for accepting a matrix as unitary.
pub const TAU_UNIT: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeEnd {
    /// The `x = 0` end (at the edge's source vertex).
    Start,
    /// The `x = length` end (at the edge's target vertex).
    End,
}

/// Where a flower slot came from in the source graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotSource {
    Edge { edge: usize, end: EdgeEnd },
    Lead { lead: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

/// Families of vertex boundary conditions.
///
/// `Delta` enforces continuity plus a total-derivative condition of strength
/// `alpha`; `DeltaPrimeS` is its derivative-side counterpart. Both are
/// special cases of `PermutationInvariant`, i.e. `U = a J + b I` with `J`
/// the all-ones matrix. `Dirichlet` and `Neumann` decouple the vertex
/// entirely. `Custom` supplies the unitary directly.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec {
    Delta { alpha: f64 },
    DeltaPrimeS { alpha: f64 },
    PermutationInvariant { a: Complex64, b: Complex64 },
    Dirichlet,
    Neumann,
    Custom(DMatrix<Complex64>),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph validation failed:\n{}", format_diagnostics(.0))]
    InvalidGraph(Vec<Diagnostic>),
    #[error("coupling at vertex {vertex} is {got}x{got} but the vertex has degree {expected}")]
    SizeMismatch {
        vertex: usize,
        expected: usize,
        got: usize,
    },
    #[error("coupling matrix departs from unitarity by {defect:.3e} (tolerance {tol:.1e})")]
    NonUnitary { defect: f64, tol: f64 },
    #[error("boundary conditions are not self-adjoint: A + iB is singular or U defect {defect:.3e}")]
    ConditionsNotSelfAdjoint { defect: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A single validation finding, pointing at the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Build the unitary for a coupling family at the given vertex degree.
pub fn build_coupling(spec: &CouplingSpec, degree: usize) -> Result<DMatrix<Complex64>, GraphError> {
    let d = degree;
    let u = match spec {
        CouplingSpec::Delta { alpha } => rank_one_family(c(2.0, 0.0) / c(d as f64, *alpha), -1.0, d),
        CouplingSpec::DeltaPrimeS { alpha } => {
            rank_one_family(c(-2.0, 0.0) / c(d as f64, -alpha), 1.0, d)
        }
        CouplingSpec::PermutationInvariant { a, b } => {
            let u = DMatrix::from_fn(d, d, |i, j| if i == j { a + b } else { *a });
            let b_ok = (b.norm() - 1.0).abs() <= TAU_UNIT;
            let row_ok = ((b + a * c(d as f64, 0.0)).norm() - 1.0).abs() <= TAU_UNIT;
            if !b_ok || !row_ok {
                return Err(GraphError::NonUnitary {
                    defect: linalg::unitarity_defect(&u),
                    tol: TAU_UNIT,
                });
            }
            u
        }
        CouplingSpec::Dirichlet => DMatrix::from_diagonal_element(d, d, c(-1.0, 0.0)),
        CouplingSpec::Neumann => DMatrix::from_diagonal_element(d, d, c(1.0, 0.0)),
        CouplingSpec::Custom(m) => {
            if m.nrows() != d || m.ncols() != d {
                return Err(GraphError::SizeMismatch {
                    vertex: usize::MAX,
                    expected: d,
                    got: m.nrows(),
                });
            }
            let defect = linalg::unitarity_defect(m);
            if defect > TAU_UNIT {
                return Err(GraphError::NonUnitary {
                    defect,
                    tol: TAU_UNIT,
                });
            }
            m.clone()
        }
    };
    Ok(u)
}

fn rank_one_family(a: Complex64, b: f64, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            a + c(b, 0.0)
        } else {
            a
        }
    })
}

/// Convert linear boundary conditions `A psi + B psi' = 0` (with outward
/// derivatives) into the unitary of the normal form, `U = -(A + iB)^{-1}(A - iB)`.
///
/// Fails when `A + iB` is singular or the resulting matrix is not unitary,
/// which happens exactly when the conditions do not define a self-adjoint
/// vertex.
pub fn coupling_from_conditions(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>, GraphError> {
    assert_eq!(a.shape(), b.shape(), "condition matrices must match in shape");
    assert!(a.is_square(), "need as many conditions as boundary values");
    let i = Complex64::i();
    let plus = a.map(|z| z) + b.map(|z| i * z);
    let minus = a.map(|z| z) - b.map(|z| i * z);
    let u = match linalg::solve(&plus, &minus) {
        Some(x) => -x,
        None => return Err(GraphError::ConditionsNotSelfAdjoint { defect: f64::INFINITY }),
    };
    let defect = linalg::unitarity_defect(&u);
    if defect > 1e-10 {
        return Err(GraphError::ConditionsNotSelfAdjoint { defect });
    }
    Ok(u)
}

/// A metric graph with vertex couplings.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    /// Anchor vertex of each lead.
    pub leads: Vec<usize>,
    /// One coupling per vertex, in vertex order.
    pub couplings: Vec<CouplingSpec>,
}

impl MetricGraph {
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        leads: Vec<usize>,
        couplings: Vec<CouplingSpec>,
    ) -> Self {
        Self {
            vertex_count,
            edges,
            leads,
            couplings,
        }
    }

    /// Ports incident to `v`, in the order the vertex coupling matrix reads
    /// them: edge ends first (edge list order, `Start` before `End` for
    /// self-loops), then leads.
    pub fn ports(&self, v: usize) -> Vec<SlotSource> {
        let mut out = Vec::new();
        for (idx, e) in self.edges.iter().enumerate() {
            if e.from == v {
                out.push(SlotSource::Edge {
                    edge: idx,
                    end: EdgeEnd::Start,
                });
            }
            if e.to == v {
                out.push(SlotSource::Edge {
                    edge: idx,
                    end: EdgeEnd::End,
                });
            }
        }
        for (idx, anchor) in self.leads.iter().enumerate() {
            if *anchor == v {
                out.push(SlotSource::Lead { lead: idx });
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.ports(v).len()
    }

    /// Structural and numerical checks. Returns all findings instead of
    /// stopping at the first so a config file can be fixed in one pass.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut push = |path: String, message: String| diags.push(Diagnostic { path, message });

        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= self.vertex_count || e.to >= self.vertex_count {
                push(
                    format!("edges[{i}]"),
                    format!(
                        "endpoint out of range: from={} to={} with {} vertices",
                        e.from, e.to, self.vertex_count
                    ),
                );
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                push(
                    format!("edges[{i}].length"),
                    format!("length must be finite and positive, got {}", e.length),
                );
            }
        }
        for (i, anchor) in self.leads.iter().enumerate() {
            if *anchor >= self.vertex_count {
                push(
                    format!("leads[{i}].vertex"),
                    format!("vertex {} out of range", anchor),
                );
            }
        }
        if self.couplings.len() != self.vertex_count {
            push(
                "couplings".into(),
                format!(
                    "expected one coupling per vertex ({}), got {}",
                    self.vertex_count,
                    self.couplings.len()
                ),
            );
            return diags;
        }
        for v in 0..self.vertex_count {
            let deg = self.degree(v);
            if deg == 0 {
                push(
                    format!("couplings.{v}"),
                    "vertex has no incident edges or leads".into(),
                );
                continue;
            }
            match build_coupling(&self.couplings[v], deg) {
                Ok(u) => {
                    let defect = linalg::unitarity_defect(&u);
                    if defect > TAU_UNIT {
                        push(
                            format!("couplings.{v}"),
                            format!("coupling departs from unitarity by {defect:.3e}"),
                        );
                    }
                }
                Err(err) => push(format!("couplings.{v}"), err.to_string()),
            }
        }
        diags
    }

    /// Reduce to flower normal form.
    pub fn flowerize(&self) -> Result<FlowerGraph, GraphError> {
        let diags = self.validate();
        if !diags.is_empty() {
            return Err(GraphError::InvalidGraph(diags));
        }

        let mut edge_order: Vec<usize> = (0..self.edges.len()).collect();
        edge_order.sort_by_key(|&i| self.edges[i].from);
        let mut lead_order: Vec<usize> = (0..self.leads.len()).collect();
        lead_order.sort_by_key(|&i| self.leads[i]);

        let mut slot_map = Vec::with_capacity(2 * self.edges.len() + self.leads.len());
        for &e in &edge_order {
            slot_map.push(SlotSource::Edge {
                edge: e,
                end: EdgeEnd::Start,
            });
            slot_map.push(SlotSource::Edge {
                edge: e,
                end: EdgeEnd::End,
            });
        }
        for &m in &lead_order {
            slot_map.push(SlotSource::Lead { lead: m });
        }

        // Vertex-grouped basis: concatenate each vertex's ports, and place
        // that vertex's unitary as a diagonal block.
        let mut port_index = BTreeMap::new();
        let mut blocks = Vec::with_capacity(self.vertex_count);
        let mut offset = 0usize;
        for v in 0..self.vertex_count {
            let ports = self.ports(v);
            for (k, p) in ports.iter().enumerate() {
                port_index.insert(*p, offset + k);
            }
            let u_v = build_coupling(&self.couplings[v], ports.len())?;
            offset += ports.len();
            blocks.push(u_v);
        }
        let dim = offset;
        let mut u_grouped = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        let mut at = 0usize;
        for b in &blocks {
            let d = b.nrows();
            u_grouped.view_mut((at, at), (d, d)).copy_from(b);
            at += d;
        }

        let coupling = DMatrix::from_fn(dim, dim, |s, t| {
            u_grouped[(port_index[&slot_map[s]], port_index[&slot_map[t]])]
        });

        Ok(FlowerGraph {
            lengths: edge_order.iter().map(|&e| self.edges[e].length).collect(),
            lead_count: self.leads.len(),
            coupling,
            slot_map,
        })
    }
}

/// Flower normal form: one vertex, `N` internal edges, `M` leads, and a
/// `(2N + M) x (2N + M)` unitary coupling them all.
#[derive(Debug, Clone)]
pub struct FlowerGraph {
    /// Internal edge lengths, in flower edge order.
    pub lengths: Vec<f64>,
    pub lead_count: usize,
    pub coupling: DMatrix<Complex64>,
    /// For each flower slot, the edge end or lead of the source graph.
    pub slot_map: Vec<SlotSource>,
}

impl FlowerGraph {
    pub fn n_edges(&self) -> usize {
        self.lengths.len()
    }

    pub fn m_leads(&self) -> usize {
        self.lead_count
    }

    pub fn dim(&self) -> usize {
        2 * self.n_edges() + self.m_leads()
    }

    /// Construct directly from flower data (single-vertex graph).
    pub fn from_parts(
        lengths: Vec<f64>,
        lead_count: usize,
        coupling: DMatrix<Complex64>,
    ) -> Result<Self, GraphError> {
        let dim = 2 * lengths.len() + lead_count;
        if coupling.nrows() != dim || coupling.ncols() != dim {
            return Err(GraphError::SizeMismatch {
                vertex: 0,
                expected: dim,
                got: coupling.nrows(),
            });
        }
        let defect = linalg::unitarity_defect(&coupling);
        if defect > TAU_UNIT {
            return Err(GraphError::NonUnitary {
                defect,
                tol: TAU_UNIT,
            });
        }
        let mut slot_map = Vec::with_capacity(dim);
        for e in 0..lengths.len() {
            slot_map.push(SlotSource::Edge {
                edge: e,
                end: EdgeEnd::Start,
            });
            slot_map.push(SlotSource::Edge {
                edge: e,
                end: EdgeEnd::End,
            });
        }
        for m in 0..lead_count {
            slot_map.push(SlotSource::Lead { lead: m });
        }
        Ok(Self {
            lengths,
            lead_count,
            coupling,
            slot_map,
        })
    }

    /// View the flower as a one-vertex metric graph (self-loops plus leads).
    pub fn to_metric_graph(&self) -> MetricGraph {
        MetricGraph::new(
            1,
            self.lengths
                .iter()
                .map(|&l| Edge {
                    from: 0,
                    to: 0,
                    length: l,
                })
                .collect(),
            vec![0; self.lead_count],
            vec![CouplingSpec::Custom(self.coupling.clone())],
        )
    }

    /// Copy with every internal edge length multiplied by `1 + eps`.
    pub fn scaled_lengths(&self, eps: f64) -> Self {
        let mut out = self.clone();
        for l in &mut out.lengths {
            *l *= 1.0 + eps;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Graph definition files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: usize,
    #[serde(default)]
    edges: Vec<EdgeFile>,
    #[serde(default)]
    leads: Vec<LeadFile>,
    couplings: BTreeMap<String, CouplingFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: usize,
    to: usize,
    length: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadFile {
    vertex: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum CouplingFile {
    Delta { alpha: f64 },
    DeltaPrimeS { alpha: f64 },
    PermutationInvariant { a: [f64; 2], b: [f64; 2] },
    Dirichlet,
    Neumann,
    Custom { matrix: Vec<Vec<[f64; 2]>> },
}

impl MetricGraph {
    /// Parse a JSON graph definition. Structural problems are reported with
    /// the offending line or field.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;

        let mut couplings = Vec::with_capacity(file.vertices);
        for v in 0..file.vertices {
            let key = v.to_string();
            let Some(entry) = file.couplings.get(&key) else {
                return Err(GraphError::Parse(format!(
                    "couplings.{key}: missing coupling for vertex {v}"
                )));
            };
            couplings.push(match entry {
                CouplingFile::Delta { alpha } => CouplingSpec::Delta { alpha: *alpha },
                CouplingFile::DeltaPrimeS { alpha } => CouplingSpec::DeltaPrimeS { alpha: *alpha },
                CouplingFile::PermutationInvariant { a, b } => CouplingSpec::PermutationInvariant {
                    a: c(a[0], a[1]),
                    b: c(b[0], b[1]),
                },
                CouplingFile::Dirichlet => CouplingSpec::Dirichlet,
                CouplingFile::Neumann => CouplingSpec::Neumann,
                CouplingFile::Custom { matrix } => {
                    let rows = matrix.len();
                    let mut m = DMatrix::from_element(rows, rows, c(0.0, 0.0));
                    for (i, row) in matrix.iter().enumerate() {
                        if row.len() != rows {
                            return Err(GraphError::Parse(format!(
                                "couplings.{key}.matrix[{i}]: expected {rows} entries, got {}",
                                row.len()
                            )));
                        }
                        for (j, z) in row.iter().enumerate() {
                            m[(i, j)] = c(z[0], z[1]);
                        }
                    }
                    CouplingSpec::Custom(m)
                }
            });
        }
        for (key, _) in &file.couplings {
            match key.parse::<usize>() {
                Ok(v) if v < file.vertices => {}
                _ => {
                    return Err(GraphError::Parse(format!(
                        "couplings.{key}: not a vertex index below {}",
                        file.vertices
                    )))
                }
            }
        }

        let graph = MetricGraph::new(
            file.vertices,
            file.edges
                .iter()
                .map(|e| Edge {
                    from: e.from,
                    to: e.to,
                    length: e.length,
                })
                .collect(),
            file.leads.iter().map(|l| l.vertex).collect(),
            couplings,
        );
        let diags = graph.validate();
        if diags.is_empty() {
            Ok(graph)
        } else {
            Err(GraphError::InvalidGraph(diags))
        }
    }

    /// Serialize to the JSON graph definition format read by `from_json`.
    pub fn to_json(&self) -> Result<String, GraphError> {
        let couplings = self
            .couplings
            .iter()
            .enumerate()
            .map(|(v, spec)| {
                let entry = match spec {
                    CouplingSpec::Delta { alpha } => CouplingFile::Delta { alpha: *alpha },
                    CouplingSpec::DeltaPrimeS { alpha } => {
                        CouplingFile::DeltaPrimeS { alpha: *alpha }
                    }
                    CouplingSpec::PermutationInvariant { a, b } => {
                        CouplingFile::PermutationInvariant {
                            a: [a.re, a.im],
                            b: [b.re, b.im],
                        }
                    }
                    CouplingSpec::Dirichlet => CouplingFile::Dirichlet,
                    CouplingSpec::Neumann => CouplingFile::Neumann,
                    CouplingSpec::Custom(m) => CouplingFile::Custom {
                        matrix: (0..m.nrows())
                            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                            .collect(),
                    },
                };
                (v.to_string(), entry)
            })
            .collect();
        let file = GraphFile {
            vertices: self.vertex_count,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    from: e.from,
                    to: e.to,
                    length: e.length,
                })
                .collect(),
            leads: self.leads.iter().map(|&vertex| LeadFile { vertex }).collect(),
            couplings,
        };
        serde_json::to_string_pretty(&file).map_err(|e| GraphError::Parse(e.to_string()))
    }
}
