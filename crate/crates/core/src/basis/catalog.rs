use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BasisFamily, BoundaryOp, BoundaryPlane, FamilyKind, FreqExpr, Operator, Term};
use crate::error::Error;

macro_rules! families {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum FamilyId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl FamilyId {
            pub const ALL: [FamilyId; [$($name),*].len()] = [$(FamilyId::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(FamilyId::$variant => $name,)*
                }
            }
        }

        impl FromStr for FamilyId {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self, Error> {
                match s {
                    $($name => Ok(FamilyId::$variant),)*
                    other => Err(Error::Invalid(format!("unknown family `{other}`"))),
                }
            }
        }
    };
}

families! {
    Heat1dHalflineDirichlet => "heat1d_halfline_dirichlet",
    Heat1dHalflineNeumann => "heat1d_halfline_neumann",
    Heat2dWedge90Dirichlet => "heat2d_wedge90_dirichlet",
    Heat2dWedge90Neumann => "heat2d_wedge90_neumann",
    Heat2dFree => "heat2d_free",
    Wave1dFree => "wave1d_free",
    Wave1dHalflineNeumann => "wave1d_halfline_neumann",
    Wave1dSlabDirichlet => "wave1d_slab_dirichlet",
    Wave1dSlabNeumann => "wave1d_slab_neumann",
    Wave2dFree => "wave2d_free",
    Wave2dHalfplaneDirichlet => "wave2d_halfplane_dirichlet",
    Wave2dHalfplaneNeumann => "wave2d_halfplane_neumann",
    Wave2dWedge90Mixed => "wave2d_wedge90_mixed",
    Wave2dWedge90Dirichlet => "wave2d_wedge90_dirichlet",
    Wave2dWedge90Neumann => "wave2d_wedge90_neumann",
    Wave2dWedge45Neumann => "wave2d_wedge45_neumann",
    Wave2dRectangleDirichlet => "wave2d_rectangle_dirichlet",
    Wave2dTriangleDirichlet => "wave2d_triangle_dirichlet",
    Wave3dFree => "wave3d_free",
    Wave3dTwoNeumannPlanes => "wave3d_two_neumann_planes",
    Laplace2dFree => "laplace2d_free",
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The family for `id`; discrete families default to side length π.
pub fn catalog_lookup(id: FamilyId) -> BasisFamily {
    build(id, PI)
}

impl BasisFamily {
    /// Multi-line summary: id, PDE, kind, formula, domain and boundary pieces.
    pub fn describe(&self) -> String {
        let kind = if self.is_discrete() { "discrete" } else { "continuous" };
        let mut out = format!(
            "{}\n  pde:        {} in {} coordinates\n  kind:       {kind}, {} free parameter(s), {} term(s)\n  element:    {}\n  domain:     {}\n",
            self.id,
            self.operator,
            self.dim,
            self.free_params,
            self.terms.len(),
            self.formula,
            self.domain,
        );
        if self.boundaries.is_empty() {
            out.push_str("  boundary:   none\n");
        }
        for b in &self.boundaries {
            let op = match b.op {
                BoundaryOp::Dirichlet => "u = 0",
                BoundaryOp::Neumann => "∂ₙu = 0",
            };
            out.push_str(&format!("  boundary:   {op} on {}\n", b.label));
        }
        if self.is_discrete() {
            out.push_str(&format!("  length:     L = {} (configurable)\n", self.length));
        }
        out
    }
}

/// Markdown table of the whole catalog: id, PDE, element formula, domain.
pub fn reference_table() -> String {
    let mut out = String::from("| id | pde | element | domain |\n|---|---|---|---|\n");
    for id in FamilyId::ALL {
        let f = catalog_lookup(id);
        out.push_str(&format!("| `{}` | {} | {} | {} |\n", id, f.operator, f.formula, f.domain));
    }
    out
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

fn lin(coef: Complex64, param: usize) -> FreqExpr {
    FreqExpr::Linear {
        coef,
        param,
        branched: false,
    }
}

fn branched(coef: Complex64, param: usize) -> FreqExpr {
    FreqExpr::Linear {
        coef,
        param,
        branched: true,
    }
}

fn sq(params: &[usize]) -> FreqExpr {
    FreqExpr::SumSquares {
        coef: c(1.0),
        params: params.to_vec(),
    }
}

fn root(coef: Complex64, params: &[usize]) -> FreqExpr {
    FreqExpr::Root {
        coef,
        params: params.to_vec(),
    }
}

fn term(coef: f64, freq: Vec<FreqExpr>) -> Term {
    Term { coef: c(coef), freq }
}

fn plane(dim: usize, axis: usize, offset: f64, op: BoundaryOp, label: &'static str) -> BoundaryPlane {
    let mut normal = vec![0.0; dim];
    normal[axis] = 1.0;
    BoundaryPlane {
        normal,
        offset,
        op,
        label,
    }
}

fn diagonal(op: BoundaryOp) -> BoundaryPlane {
    BoundaryPlane {
        normal: vec![0.0, 1.0, -1.0],
        offset: 0.0,
        op,
        label: "y = x",
    }
}

struct Spec {
    dim: usize,
    free_params: usize,
    kind: FamilyKind,
    operator: Operator,
    terms: Vec<Term>,
    boundaries: Vec<BoundaryPlane>,
    domain: &'static str,
    formula: &'static str,
}

/// Terms `(τ, s_x a, s_y b)` for the listed `(sign, s_x, s_y)` triples.
fn wave2d_signed(signs: &[(f64, f64, f64)]) -> Vec<Term> {
    signs
        .iter()
        .map(|&(s, sx, sy)| term(s, vec![root(c(1.0), &[0, 1]), lin(c(sx), 0), lin(c(sy), 1)]))
        .collect()
}

fn heat2d_signed(signs: &[(f64, f64, f64)]) -> Vec<Term> {
    signs
        .iter()
        .map(|&(s, sx, sy)| term(s, vec![sq(&[0, 1]), lin(c(sx), 0), lin(c(sy), 1)]))
        .collect()
}

/// `sin(jπx/L) sin(kπy/L) e^{±iπ√(j²+k²)t/L}` expanded into four
/// exponentials, with `x` driven by parameter `px` and `y` by `py`.
fn sine_pair(sign: f64, px: usize, py: usize, w: f64) -> Vec<Term> {
    [(1.0, 1.0, -0.25), (1.0, -1.0, 0.25), (-1.0, 1.0, 0.25), (-1.0, -1.0, -0.25)]
        .into_iter()
        .map(|(sx, sy, coef)| {
            term(
                sign * coef,
                vec![root(ci(w), &[0, 1]), lin(ci(sx * w), px), lin(ci(sy * w), py)],
            )
        })
        .collect()
}

pub(super) fn build(id: FamilyId, length: f64) -> BasisFamily {
    use BoundaryOp::{Dirichlet as D, Neumann as N};
    use FamilyId::*;
    use FamilyKind::{Continuous, Discrete};

    let w = PI / length;
    let spec = match id {
        Heat1dHalflineDirichlet | Heat1dHalflineNeumann => {
            let (s, op, formula) = if id == Heat1dHalflineDirichlet {
                (-1.0, D, "e^{tζ²+xζ} − e^{tζ²−xζ}")
            } else {
                (1.0, N, "e^{tζ²+xζ} + e^{tζ²−xζ}")
            };
            Spec {
                dim: 2,
                free_params: 1,
                kind: Continuous,
                operator: Operator::Heat,
                terms: vec![
                    term(1.0, vec![sq(&[0]), lin(c(1.0), 0)]),
                    term(s, vec![sq(&[0]), lin(c(-1.0), 0)]),
                ],
                boundaries: vec![plane(2, 1, 0.0, op, "x = 0")],
                domain: "half-line x > 0",
                formula,
            }
        }
        Heat2dWedge90Dirichlet | Heat2dWedge90Neumann => {
            let dirichlet = id == Heat2dWedge90Dirichlet;
            let (s, op) = if dirichlet { (-1.0, D) } else { (1.0, N) };
            Spec {
                dim: 3,
                free_params: 2,
                kind: Continuous,
                operator: Operator::Heat,
                terms: heat2d_signed(&[
                    (1.0, 1.0, 1.0),
                    (s, -1.0, 1.0),
                    (s, 1.0, -1.0),
                    (1.0, -1.0, -1.0),
                ]),
                boundaries: vec![plane(3, 1, 0.0, op, "x = 0"), plane(3, 2, 0.0, op, "y = 0")],
                domain: "quadrant x > 0, y > 0",
                formula: if dirichlet {
                    "e^{(a²+b²)t} (e^{ax+by} − e^{−ax+by} − e^{ax−by} + e^{−ax−by})"
                } else {
                    "e^{(a²+b²)t} (e^{ax+by} + e^{−ax+by} + e^{ax−by} + e^{−ax−by})"
                },
            }
        }
        Heat2dFree => Spec {
            dim: 3,
            free_params: 2,
            kind: Continuous,
            operator: Operator::Heat,
            terms: heat2d_signed(&[(1.0, 1.0, 1.0)]),
            boundaries: vec![],
            domain: "whole plane",
            formula: "e^{(a²+b²)t + ax + by}",
        },
        Wave1dFree => Spec {
            dim: 2,
            free_params: 1,
            kind: Continuous,
            operator: Operator::Wave,
            terms: vec![term(1.0, vec![branched(c(1.0), 0), lin(c(1.0), 0)])],
            boundaries: vec![],
            domain: "whole line",
            formula: "e^{θ(x ± t)}",
        },
        Wave1dHalflineNeumann => Spec {
            dim: 2,
            free_params: 1,
            kind: Continuous,
            operator: Operator::Wave,
            terms: vec![
                term(1.0, vec![lin(c(1.0), 0), lin(c(1.0), 0)]),
                term(1.0, vec![lin(c(1.0), 0), lin(c(-1.0), 0)]),
            ],
            boundaries: vec![plane(2, 1, 0.0, N, "x = 0")],
            domain: "half-line x > 0",
            formula: "e^{αt+αx} + e^{αt−αx}",
        },
        Wave1dSlabDirichlet | Wave1dSlabNeumann => {
            let dirichlet = id == Wave1dSlabDirichlet;
            // sin u = (e^{iu} − e^{−iu}) / 2i, cos u = (e^{iu} + e^{−iu}) / 2
            let (a, b, op) = if dirichlet {
                (ci(-0.5), ci(0.5), D)
            } else {
                (c(0.5), c(0.5), N)
            };
            Spec {
                dim: 2,
                free_params: 1,
                kind: Discrete,
                operator: Operator::Wave,
                terms: vec![
                    Term {
                        coef: a,
                        freq: vec![branched(ci(w), 0), lin(ci(w), 0)],
                    },
                    Term {
                        coef: b,
                        freq: vec![branched(ci(w), 0), lin(ci(-w), 0)],
                    },
                ],
                boundaries: vec![plane(2, 1, 0.0, op, "x = 0"), plane(2, 1, length, op, "x = L")],
                domain: "slab 0 < x < L",
                formula: if dirichlet {
                    "e^{±ijπt/L} sin(jπx/L), j ≥ 1"
                } else {
                    "e^{±ijπt/L} cos(jπx/L), j ≥ 0"
                },
            }
        }
        Wave2dFree => Spec {
            dim: 3,
            free_params: 2,
            kind: Continuous,
            operator: Operator::Wave,
            terms: wave2d_signed(&[(1.0, 1.0, 1.0)]),
            boundaries: vec![],
            domain: "whole plane",
            formula: "e^{±τt+ax+by}, τ = √(a²+b²)",
        },
        Wave2dHalfplaneDirichlet => Spec {
            dim: 3,
            free_params: 2,
            kind: Continuous,
            operator: Operator::Wave,
            terms: wave2d_signed(&[(1.0, 1.0, 1.0), (-1.0, -1.0, 1.0)]),
            boundaries: vec![plane(3, 1, 0.0, D, "x = 0")],
            domain: "half-plane x > 0",
            formula: "e^{±τt+ax+by} − e^{±τt−ax+by}, τ = √(a²+b²)",
        },
        Wave2dHalfplaneNeumann => {
            let mut terms = Vec::new();
            for st in [1.0, -1.0] {
                for sx in [1.0, -1.0] {
                    terms.push(term(
                        1.0,
                        vec![root(c(st), &[0, 1]), lin(c(sx), 0), lin(c(1.0), 1)],
                    ));
                }
            }
            Spec {
                dim: 3,
                free_params: 2,
                kind: Continuous,
                operator: Operator::Wave,
                terms,
                boundaries: vec![plane(3, 1, 0.0, N, "x = 0")],
                domain: "half-plane x > 0",
                formula: "e^{τt+ax+by} + e^{τt−ax+by} + e^{−τt+ax+by} + e^{−τt−ax+by}, τ = √(a²+b²)",
            }
        }
        Wave2dWedge90Mixed => Spec {
            dim: 3,
            free_params: 2,
            kind: Continuous,
            operator: Operator::Wave,
            terms: wave2d_signed(&[
                (1.0, 1.0, 1.0),
                (-1.0, -1.0, 1.0),
                (1.0, 1.0, -1.0),
                (-1.0, -1.0, -1.0),
            ]),
            boundaries: vec![plane(3, 1, 0.0, D, "x = 0"), plane(3, 2, 0.0, N, "y = 0")],
            domain: "quadrant x > 0, y > 0",
            formula: "e^{τt+ax+by} − e^{τt−ax+by} + e^{τt+ax−by} − e^{τt−ax−by}, τ = ±√(a²+b²)",
        },
        Wave2dWedge90Dirichlet | Wave2dWedge90Neumann => {
            let dirichlet = id == Wave2dWedge90Dirichlet;
            let (s, op) = if dirichlet { (-1.0, D) } else { (1.0, N) };
            Spec {
                dim: 3,
                free_params: 2,
                kind: Continuous,
                operator: Operator::Wave,
                terms: wave2d_signed(&[
                    (1.0, 1.0, 1.0),
                    (s, -1.0, 1.0),
                    (s, 1.0, -1.0),
                    (1.0, -1.0, -1.0),
                ]),
                boundaries: vec![plane(3, 1, 0.0, op, "x = 0"), plane(3, 2, 0.0, op, "y = 0")],
                domain: "quadrant x > 0, y > 0",
                formula: if dirichlet {
                    "e^{τt+ax+by} − e^{τt−ax+by} − e^{τt+ax−by} + e^{τt−ax−by}, τ = ±√(a²+b²)"
                } else {
                    "e^{τt+ax+by} + e^{τt−ax+by} + e^{τt+ax−by} + e^{τt−ax−by}, τ = ±√(a²+b²)"
                },
            }
        }
        Wave2dWedge45Neumann => {
            let mut terms = Vec::new();
            for st in [1.0, -1.0] {
                for (px, py) in [(0, 1), (1, 0)] {
                    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                        terms.push(term(
                            1.0,
                            vec![root(c(st), &[0, 1]), lin(c(sx), px), lin(c(sy), py)],
                        ));
                    }
                }
            }
            Spec {
                dim: 3,
                free_params: 2,
                kind: Continuous,
                operator: Operator::Wave,
                terms,
                boundaries: vec![plane(3, 1, 0.0, N, "x = 0"), diagonal(N)],
                domain: "wedge x > 0, y < x",
                formula: "Σ e^{±τt ± z₁x ± z₂y} + Σ e^{±τt ± z₂x ± z₁y} (16 terms), τ² = z₁² + z₂²",
            }
        }
        Wave2dRectangleDirichlet => Spec {
            dim: 3,
            free_params: 2,
            kind: Discrete,
            operator: Operator::Wave,
            terms: sine_pair(1.0, 0, 1, w),
            boundaries: vec![
                plane(3, 1, 0.0, D, "x = 0"),
                plane(3, 1, length, D, "x = L"),
                plane(3, 2, 0.0, D, "y = 0"),
                plane(3, 2, length, D, "y = L"),
            ],
            domain: "square (0, L)²",
            formula: "e^{±iπ√(j²+k²)t/L} sin(jπx/L) sin(kπy/L), j, k ≥ 1",
        },
        Wave2dTriangleDirichlet => {
            let mut terms = sine_pair(1.0, 0, 1, w);
            terms.extend(sine_pair(-1.0, 1, 0, w));
            Spec {
                dim: 3,
                free_params: 2,
                kind: Discrete,
                operator: Operator::Wave,
                terms,
                boundaries: vec![
                    plane(3, 2, 0.0, D, "y = 0"),
                    plane(3, 1, length, D, "x = L"),
                    diagonal(D),
                ],
                domain: "triangle 0 < y < x < L",
                formula: "e^{±iπ√(j²+k²)t/L} (sin(jπx/L) sin(kπy/L) − sin(kπx/L) sin(jπy/L)), 1 ≤ j < k",
            }
        }
        Wave3dFree => Spec {
            dim: 4,
            free_params: 3,
            kind: Continuous,
            operator: Operator::Wave,
            terms: vec![term(
                1.0,
                vec![root(c(1.0), &[0, 1, 2]), lin(c(1.0), 0), lin(c(1.0), 1), lin(c(1.0), 2)],
            )],
            boundaries: vec![],
            domain: "whole space",
            formula: "e^{±dt+ax+by+cz}, d = √(a²+b²+c²)",
        },
        Wave3dTwoNeumannPlanes => {
            let mut terms = Vec::new();
            for st in [1.0, -1.0] {
                for sy in [1.0, -1.0] {
                    for sz in [1.0, -1.0] {
                        terms.push(term(
                            1.0,
                            vec![
                                root(c(st), &[0, 1, 2]),
                                lin(c(1.0), 0),
                                lin(c(sy), 1),
                                lin(c(sz), 2),
                            ],
                        ));
                    }
                }
            }
            Spec {
                dim: 4,
                free_params: 3,
                kind: Continuous,
                operator: Operator::Wave,
                terms,
                boundaries: vec![plane(4, 2, 0.0, N, "y = 0"), plane(4, 3, 0.0, N, "z = 0")],
                domain: "y > 0, z > 0",
                formula: "Σ e^{±dt + ax ± by ± cz} (8 terms), d² = a² + b² + c²",
            }
        }
        Laplace2dFree => Spec {
            dim: 2,
            free_params: 1,
            kind: Continuous,
            operator: Operator::Laplace,
            terms: vec![term(1.0, vec![lin(c(1.0), 0), branched(ci(1.0), 0)])],
            boundaries: vec![],
            domain: "whole plane",
            formula: "e^{a(x ± iy)}",
        },
    };
    BasisFamily {
        id,
        dim: spec.dim,
        free_params: spec.free_params,
        kind: spec.kind,
        terms: spec.terms,
        operator: spec.operator,
        boundaries: spec.boundaries,
        length,
        domain: spec.domain,
        formula: spec.formula,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_strings() {
        for id in FamilyId::ALL {
            assert_eq!(id.as_str().parse::<FamilyId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
        }
        assert!("heat9d".parse::<FamilyId>().is_err());
    }

    #[test]
    fn mixed_wedge_description_lists_four_terms_and_both_conditions() {
        let d = catalog_lookup(FamilyId::Wave2dWedge90Mixed).describe();
        assert!(d.contains("4 term(s)"));
        assert!(d.contains("u = 0 on x = 0"));
        assert!(d.contains("∂ₙu = 0 on y = 0"));
    }

    #[test]
    fn reference_table_has_a_row_per_family() {
        let t = reference_table();
        assert_eq!(t.lines().count(), FamilyId::ALL.len() + 2);
    }

    #[test]
    fn heat_dirichlet_term_list() {
        let f = catalog_lookup(FamilyId::Heat1dHalflineDirichlet);
        let signs: Vec<f64> = f.terms.iter().map(|t| t.coef.re).collect();
        assert_eq!(signs, vec![1.0, -1.0]);
    }

    #[test]
    fn three_dim_neumann_planes_has_eight_positive_terms() {
        let f = catalog_lookup(FamilyId::Wave3dTwoNeumannPlanes);
        assert_eq!(f.terms.len(), 8);
        assert!(f.terms.iter().all(|t| t.coef == c(1.0)));
    }

    #[test]
    fn rectangle_is_discrete_with_two_params() {
        let f = catalog_lookup(FamilyId::Wave2dRectangleDirichlet);
        assert_eq!(f.kind, FamilyKind::Discrete);
        assert_eq!(f.free_params, 2);
        assert!(f.uses_branch());
    }

    #[test]
    fn wedge45_has_sixteen_terms() {
        assert_eq!(catalog_lookup(FamilyId::Wave2dWedge45Neumann).terms.len(), 16);
        assert_eq!(catalog_lookup(FamilyId::Wave2dHalfplaneNeumann).terms.len(), 4);
    }
}
