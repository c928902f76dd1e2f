//! Independent Galerkin oracle: fine five-point matrix, tile summation and
//! hat-function interpolation multiplied out as sparse matrices.

use std::collections::BTreeMap;

use ismg_core::coarsening::{build_acm_hierarchy, build_ismg_operator, CoarseOperator, STENCIL_OFFSETS};
use ismg_core::field::{BoundaryCondition, GridSpec, Sides};
use ismg_core::smoother::StencilKind;

type Sparse = Vec<BTreeMap<usize, f64>>;

#[derive(Clone, Copy, PartialEq, Debug)]
enum End {
    Neumann,
    Dirichlet,
    Periodic,
}

fn end_of(bc: &BoundaryCondition) -> End {
    match bc {
        BoundaryCondition::Periodic => End::Periodic,
        BoundaryCondition::SymmetryVelocityFixedPressure { .. } => End::Dirichlet,
        _ => End::Neumann,
    }
}

fn ends(spec: &GridSpec) -> [End; 4] {
    [end_of(&spec.bc.west), end_of(&spec.bc.east), end_of(&spec.bc.south), end_of(&spec.bc.north)]
}

/// Fine flux-form five-point matrix.
fn fine_matrix(spec: &GridSpec) -> Sparse {
    let (nx, ny) = (spec.nx, spec.ny);
    let [w, e, s, n] = ends(spec);
    let mut a: Sparse = vec![BTreeMap::new(); nx * ny];
    let id = |i: usize, j: usize| j * nx + i;
    for j in 0..ny {
        for i in 0..nx {
            let row = &mut a[id(i, j)];
            let mut face = |nb: Option<(usize, usize)>, end: End, wrap: (usize, usize)| {
                let target = match (nb, end) {
                    (Some(c), _) => Some(c),
                    (None, End::Periodic) => Some(wrap),
                    (None, End::Dirichlet) => {
                        *row.entry(id(i, j)).or_insert(0.0) -= 2.0;
                        None
                    }
                    (None, End::Neumann) => None,
                };
                if let Some((p, q)) = target {
                    *row.entry(id(p, q)).or_insert(0.0) += 1.0;
                    *row.entry(id(i, j)).or_insert(0.0) -= 1.0;
                }
            };
            face((i > 0).then(|| (i - 1, j)), w, (nx - 1, j));
            face((i + 1 < nx).then(|| (i + 1, j)), e, (0, j));
            face((j > 0).then(|| (i, j - 1)), s, (i, ny - 1));
            face((j + 1 < ny).then(|| (i, j + 1)), n, (i, 0));
        }
    }
    a
}

/// 1D interpolation weights (fine x coarse) by hat functions through the tile
/// centres, closed at the walls by a repeated value (Neumann), a zero value on
/// the wall (Dirichlet) or periodic images.
fn interp_1d(n: usize, tile: usize, lo: End, hi: End) -> Vec<Vec<(usize, f64)>> {
    let nc = n.div_ceil(tile);
    let centre = |k: usize| {
        let start = k * tile;
        let w = tile.min(n - start);
        start as f64 + 0.5 * w as f64
    };
    // nodes: (position, Some(coarse index) | None for a zero value)
    let mut nodes: Vec<(f64, Option<usize>)> = Vec::new();
    nodes.push(match lo {
        End::Neumann => (0.0, Some(0)),
        End::Dirichlet => (0.0, None),
        End::Periodic => (centre(nc - 1) - n as f64, Some(nc - 1)),
    });
    for k in 0..nc {
        nodes.push((centre(k), Some(k)));
    }
    nodes.push(match hi {
        End::Neumann => (n as f64, Some(nc - 1)),
        End::Dirichlet => (n as f64, None),
        End::Periodic => (centre(0) + n as f64, Some(0)),
    });
    (0..n)
        .map(|i| {
            let x = i as f64 + 0.5;
            let m = (0..nodes.len() - 1)
                .find(|&m| nodes[m].0 <= x && x <= nodes[m + 1].0)
                .expect("fine centre inside the node range");
            let (x0, a) = nodes[m];
            let (x1, b) = nodes[m + 1];
            let t = (x - x0) / (x1 - x0);
            let mut w = Vec::new();
            if let Some(a) = a {
                w.push((a, 1.0 - t));
            }
            if let Some(b) = b {
                w.push((b, t));
            }
            w
        })
        .collect()
}

fn triple_product(a: &Sparse, spec: &GridSpec, px: &[Vec<(usize, f64)>], py: &[Vec<(usize, f64)>], owner: impl Fn(usize, usize) -> (usize, usize), ncx: usize, ncy: usize) -> Sparse {
    let (nx, ny) = (spec.nx, spec.ny);
    let mut out: Sparse = vec![BTreeMap::new(); ncx * ncy];
    for j in 0..ny {
        for i in 0..nx {
            let (ci, cj) = owner(i, j);
            let row = &mut out[cj * ncx + ci];
            for (&col, &v) in &a[j * nx + i] {
                let (fi, fj) = (col % nx, col / nx);
                for &(qx, wx) in &px[fi] {
                    for &(qy, wy) in &py[fj] {
                        *row.entry(qy * ncx + qx).or_insert(0.0) += v * wx * wy;
                    }
                }
            }
        }
    }
    out
}

/// Operator rows folded onto target cells (periodic wraps summed).
fn operator_rows(op: &CoarseOperator<f64>) -> Sparse {
    let mut out: Sparse = vec![BTreeMap::new(); op.ncx * op.ncy];
    for cj in 0..op.ncy {
        for ci in 0..op.ncx {
            for (k, &(dx, dy)) in STENCIL_OFFSETS.iter().enumerate() {
                let c = op.row(ci, cj)[k];
                if c == 0.0 {
                    continue;
                }
                let ti = ci as isize + dx;
                let tj = cj as isize + dy;
                let inside = ti >= 0 && tj >= 0 && (ti as usize) < op.ncx && (tj as usize) < op.ncy;
                assert!(
                    inside || (op.periodic_x || ti >= 0 && (ti as usize) < op.ncx) && (op.periodic_y || tj >= 0 && (tj as usize) < op.ncy),
                    "coupling leaves the domain at ({ci},{cj}) slot {k}"
                );
                let ti = ti.rem_euclid(op.ncx as isize) as usize;
                let tj = tj.rem_euclid(op.ncy as isize) as usize;
                *out[cj * op.ncx + ci].entry(tj * op.ncx + ti).or_insert(0.0) += c;
            }
        }
    }
    out
}

fn assert_same(got: &Sparse, want: &Sparse, label: &str) {
    assert_eq!(got.len(), want.len());
    for (r, (g, w)) in got.iter().zip(want).enumerate() {
        let scale = w.values().fold(1.0f64, |m, v| m.max(v.abs()));
        let keys: std::collections::BTreeSet<_> = g.keys().chain(w.keys()).collect();
        for k in keys {
            let a = g.get(k).copied().unwrap_or(0.0);
            let b = w.get(k).copied().unwrap_or(0.0);
            assert!(
                (a - b).abs() <= 1e-12 * scale,
                "{label}: row {r} col {k}: operator {a} vs triple product {b}"
            );
        }
    }
}

pub fn check_ismg(spec: &GridSpec) {
    let op = build_ismg_operator::<f64>(spec).unwrap();
    let [w, e, s, n] = ends(spec);
    let px = interp_1d(spec.nx, spec.tile, w, e);
    let py = interp_1d(spec.ny, spec.tile, s, n);
    let (ncx, ncy) = (spec.nx.div_ceil(spec.tile), spec.ny.div_ceil(spec.tile));
    let t = spec.tile;
    let rap = triple_product(&fine_matrix(spec), spec, &px, &py, |i, j| (i / t, j / t), ncx, ncy);
    assert_same(&operator_rows(&op), &rap, &format!("{}x{} tile {} {:?}", spec.nx, spec.ny, t, ends(spec)));
}

pub fn check_acm(spec: &GridSpec, depth: usize) {
    let h = build_acm_hierarchy::<f64>(spec, depth).unwrap();
    let a = fine_matrix(spec);
    for level in 1..depth {
        let b = 1usize << level;
        let (ncx, ncy) = (spec.nx.div_ceil(b), spec.ny.div_ceil(b));
        let px: Vec<Vec<(usize, f64)>> = (0..spec.nx).map(|i| vec![(i / b, 1.0)]).collect();
        let py: Vec<Vec<(usize, f64)>> = (0..spec.ny).map(|j| vec![(j / b, 1.0)]).collect();
        let rap = triple_product(&a, spec, &px, &py, |i, j| (i / b, j / b), ncx, ncy);
        let op = match &h.levels[level].stencil {
            StencilKind::NinePointPerCell(op) => op,
            _ => panic!("coarse level is not per-cell"),
        };
        assert_same(&operator_rows(op), &rap, &format!("ACM level {level} of {}x{}", spec.nx, spec.ny));
    }
}

pub fn bc_sets() -> Vec<Sides<BoundaryCondition>> {
    let wall = BoundaryCondition::NO_SLIP;
    let open = BoundaryCondition::SymmetryVelocityFixedPressure { p_wall: 0.0 };
    let per = BoundaryCondition::Periodic;
    vec![
        Sides::all(wall),
        Sides { north: open, ..Sides::all(wall) },
        Sides::all(open),
        Sides { west: per, east: per, ..Sides::all(wall) },
        Sides { west: per, east: per, north: open, ..Sides::all(wall) },
        Sides::all(per),
    ]
}

