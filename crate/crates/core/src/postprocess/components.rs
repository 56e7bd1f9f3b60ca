//! Connected-component counting on a binary mask.

use crate::postprocess::Mask;

/// Number of 8-connected components of the mask's true pixels. This is
/// the count estimate Ĉ; an empty mask yields zero.
pub fn estimate_count(mask: &Mask) -> usize {
    let grid = mask.grid();
    let (height, width) = (grid.height(), grid.width());
    let mut visited = vec![false; grid.num_pixels()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut count = 0;

    for start_row in 0..height {
        for start_col in 0..width {
            let start = grid.index(start_row, start_col);
            if !mask.values()[start] || visited[start] {
                continue;
            }
            count += 1;
            visited[start] = true;
            stack.push((start_row, start_col));
            while let Some((r, c)) = stack.pop() {
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let nr = r as i64 + dr;
                        let nc = c as i64 + dc;
                        if nr < 0 || nc < 0 || nr >= height as i64 || nc >= width as i64 {
                            continue;
                        }
                        let (nr, nc) = (nr as usize, nc as usize);
                        let idx = grid.index(nr, nc);
                        if mask.values()[idx] && !visited[idx] {
                            visited[idx] = true;
                            stack.push((nr, nc));
                        }
                    }
                }
            }
        }
    }
    count
}
