//! Published submartingale boundaries for `N = 128`, `d = 2`.

/// One reference row: `alpha`, `lambda` and `g1..g4`, blank cells as `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub alpha: f64,
    pub lambda: f64,
    pub g: [Option<usize>; 4],
}

pub const N: usize = 128;
pub const D: usize = 2;

const fn row(alpha: f64, lambda: f64, g: [Option<usize>; 4]) -> ReferenceRow {
    ReferenceRow { alpha, lambda, g }
}

pub const ROWS: [ReferenceRow; 14] = [
    row(5.0, 7.0, [Some(39), None, None, Some(89)]),
    row(5.0, 8.0, [Some(39), Some(44), Some(54), Some(89)]),
    row(5.0, 9.0, [Some(39), Some(40), Some(56), Some(89)]),
    row(5.0, 10.0, [None, None, Some(57), Some(89)]),
    row(5.0, 64.0, [None, None, Some(63), Some(109)]),
    row(4.1, 7.0, [Some(33), None, None, Some(95)]),
    row(4.1, 8.0, [Some(33), Some(44), Some(54), Some(95)]),
    row(4.1, 9.0, [Some(33), Some(40), Some(56), Some(95)]),
    row(4.1, 10.0, [Some(33), Some(38), Some(57), Some(95)]),
    row(4.1, 11.0, [Some(33), Some(36), Some(58), Some(95)]),
    row(4.1, 12.0, [Some(33), Some(34), Some(59), Some(95)]),
    row(4.1, 13.0, [Some(33), Some(33), Some(59), Some(95)]),
    row(4.1, 14.0, [None, None, Some(60), Some(95)]),
    row(4.1, 64.0, [None, None, Some(63), Some(109)]),
];
