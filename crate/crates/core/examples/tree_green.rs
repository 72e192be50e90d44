//! Green function of the nearest-neighbour walk on the binary tree, solved on
//! the (side, level) quotient of a deep killed tree.
use sepkit::kernels::{Side, SiteWindow, TreeQuotient};

fn main() -> sepkit::Result<()> {
    let q = TreeQuotient::new(30, true);
    let g = q.green_to_left_endpoint()?;
    for d in 0..6u32 {
        println!(
            "G(x, left endpoint), x in L at level {d}: {:.6}",
            g[q.index(Side::L, d)]
        );
    }
    for n in [2u32, 4, 6] {
        let all = q.green_window_sup(&SiteWindow::below_level(None, n))?;
        let left = q.green_window_sup(&SiteWindow::below_level(Some(Side::L), n))?;
        let level = q.green_window_sup(&SiteWindow::at_level(Some(Side::L), n))?;
        println!(
            "n={n}: sup over l<n {:.4}, over L with l<n {:.4}, over L with l=n {:.4}",
            all.value, left.value, level.value
        );
    }
    Ok(())
}
