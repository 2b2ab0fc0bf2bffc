//! Brute-force Conway reference on a torus, independent of the agent code:
//! 2-D rows, signed offsets, `rem_euclid` wrapping.

pub type Grid = Vec<Vec<bool>>;

pub fn from_flat(cells: &[bool], width: usize) -> Grid {
    cells.chunks(width).map(<[bool]>::to_vec).collect()
}

pub fn to_flat(grid: &Grid) -> Vec<bool> {
    grid.concat()
}

pub fn live_neighbours(grid: &Grid, row: usize, col: usize) -> usize {
    let h = grid.len() as i64;
    let w = grid[0].len() as i64;
    let mut n = 0;
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            if (dr, dc) == (0, 0) {
                continue;
            }
            let r = (row as i64 + dr).rem_euclid(h) as usize;
            let c = (col as i64 + dc).rem_euclid(w) as usize;
            if grid[r][c] {
                n += 1;
            }
        }
    }
    n
}

pub fn generation(grid: &Grid) -> Grid {
    let mut next = grid.clone();
    for (r, row) in grid.iter().enumerate() {
        for (c, &alive) in row.iter().enumerate() {
            next[r][c] = matches!((alive, live_neighbours(grid, r, c)), (true, 2) | (_, 3));
        }
    }
    next
}

/// Shifts every cell by (`dx`, `dy`) with wrap-around.
pub fn translate(grid: &Grid, dx: i64, dy: i64) -> Grid {
    let h = grid.len() as i64;
    let w = grid[0].len() as i64;
    let mut out = vec![vec![false; w as usize]; h as usize];
    for (r, row) in grid.iter().enumerate() {
        for (c, &alive) in row.iter().enumerate() {
            let nr = (r as i64 + dy).rem_euclid(h) as usize;
            let nc = (c as i64 + dx).rem_euclid(w) as usize;
            out[nr][nc] = alive;
        }
    }
    out
}

#[test]
fn oracle_sanity() {
    // blinker on a 5x5 torus flips orientation
    let mut g = vec![vec![false; 5]; 5];
    g[2][1..4].fill(true);
    let next = generation(&g);
    let live: Vec<(usize, usize)> = (0..5)
        .flat_map(|r| (0..5).map(move |c| (r, c)))
        .filter(|&(r, c)| next[r][c])
        .collect();
    assert_eq!(live, [(1, 2), (2, 2), (3, 2)]);
    assert_eq!(generation(&next), g);
}
