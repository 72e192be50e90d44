//! Stationary covariances of the open exclusion process from the two-particle
//! dual, on a killed line and on the binary tree (lumped pair chain).
use sepkit::dualcorr::{dual_integral, TreePairChain};
use sepkit::kernels::{build_line, killed_truncation, line_alpha, tree_alpha, JumpLaw, Side, SiteWindow};

fn main() -> sepkit::Result<()> {
    let k = killed_truncation(&build_line(4, &JumpLaw::simple())?);
    let alpha = line_alpha(0.0, 1.0, 4)?.values(&k);
    let d = dual_integral(&k, &alpha, 1e-11)?;
    println!("line of 9 sites, horizon T={}", d.horizon);
    for y in 1..k.len() {
        println!("  -Cov(site 0, site {y}) = {:.3e}", d.field.get(0, y));
    }
    let chain = TreePairChain::new(40);
    let profile = tree_alpha(0.0, 1.0)?;
    for n in [4u32, 8, 12] {
        let v = chain.window_variance(&profile, &SiteWindow::below_level(Some(Side::L), n), 1e-12)?;
        println!(
            "tree window L, l<{n}: Var = {:.4}, Var/n = {:.4}, ratio = {:.4}",
            v.variance,
            v.variance / n as f64,
            v.ratio
        );
    }
    Ok(())
}
