//! Small hand-built modules and intervals used by tests, docs and the CLI.

use crate::grid::{GridInterval, GridPoint};
use crate::linalg::{Matrix, PrimeField};
use crate::module::ExplicitModule;

fn pt(x: i32, y: i32) -> GridPoint {
    GridPoint::new(x, y)
}

/// Module on `[1,2]^2` that is `F` everywhere except `F^2` at `(2,1)`.
/// The maps into and out of `(2,1)` are `(1,0)^T` and `(1 1)`.
pub fn section_square() -> ExplicitModule {
    let f = PrimeField::F2;
    let dom = GridInterval::rect(1, 1, 2, 2).unwrap();
    ExplicitModule::from_fn(
        f,
        dom,
        |p| if p == pt(2, 1) { 2 } else { 1 },
        |p, q| {
            Some(match (p, q) {
                (a, b) if a == pt(1, 1) && b == pt(2, 1) => Matrix::from_rows(f, 1, &[[1], [0]]),
                (a, b) if a == pt(2, 1) && b == pt(2, 2) => Matrix::from_rows(f, 2, &[[1, 1]]),
                _ => Matrix::identity(f, 1),
            })
        },
    )
    .unwrap()
}

/// The grid `{1,2,3} x {1,2}`.
pub fn small_grid() -> GridInterval {
    GridInterval::rect(1, 1, 3, 2).unwrap()
}

/// The whole grid, its top row, and the middle point of the top row.
pub fn nested_barcode() -> Vec<(GridInterval, usize)> {
    vec![
        (small_grid(), 1),
        (GridInterval::rect(1, 2, 3, 2).unwrap(), 1),
        (GridInterval::singleton(pt(2, 2)), 1),
    ]
}

/// Direct sum of the interval modules in [`nested_barcode`].
pub fn nested_intervals() -> ExplicitModule {
    let f = PrimeField::F2;
    let grid = small_grid();
    let parts: Vec<ExplicitModule> = nested_barcode()
        .iter()
        .map(|(i, _)| ExplicitModule::interval_module(f, i, &grid).unwrap())
        .collect();
    ExplicitModule::direct_sum(&parts).unwrap()
}

/// An indecomposable module on [`small_grid`] that is not an interval module:
/// `F^2` at `(2,2)` receives the lines `e1` and `e1 + e2` and sends the line
/// `e2` to zero.
pub fn indecomposable_core() -> ExplicitModule {
    let f = PrimeField::F2;
    ExplicitModule::from_fn(
        f,
        small_grid(),
        |p| match (p.x, p.y) {
            (1, 1) => 0,
            (2, 2) => 2,
            _ => 1,
        },
        |p, q| {
            let m = match ((p.x, p.y), (q.x, q.y)) {
                ((1, 2), (2, 2)) => Matrix::from_rows(f, 1, &[[1], [0]]),
                ((2, 1), (2, 2)) => Matrix::from_rows(f, 1, &[[1], [1]]),
                ((2, 2), (3, 2)) => Matrix::from_rows(f, 2, &[[1, 0]]),
                ((2, 1), (3, 1)) | ((3, 1), (3, 2)) => Matrix::identity(f, 1),
                _ => return None,
            };
            Some(m)
        },
    )
    .unwrap()
}

/// [`indecomposable_core`] plus the interval module of the top row. Not
/// interval decomposable.
pub fn three_lines_module() -> ExplicitModule {
    let f = PrimeField::F2;
    let top = GridInterval::rect(1, 2, 3, 2).unwrap();
    ExplicitModule::direct_sum(&[
        indecomposable_core(),
        ExplicitModule::interval_module(f, &top, &small_grid()).unwrap(),
    ])
    .unwrap()
}

/// Five staircase shapes: a point, a square, two two-step staircases and a
/// wider staircase.
pub fn cap_gallery() -> Vec<GridInterval> {
    vec![
        GridInterval::singleton(pt(0, 0)),
        GridInterval::rect(0, 0, 1, 1).unwrap(),
        GridInterval::from_columns(&[(0, 1, 2), (1, 0, 1)]).unwrap(),
        GridInterval::from_columns(&[(0, 1, 2), (1, 0, 2), (2, 0, 1)]).unwrap(),
        GridInterval::from_columns(&[(0, 2, 4), (1, 0, 4), (2, 0, 3)]).unwrap(),
    ]
}
