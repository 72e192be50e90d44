use num_complex::Complex64;

use crate::error::{Result, SepError};
use crate::kernels::{
    killed_truncation, line_alpha, tree_alpha, HarmonicProfile, Kernel, OpenBoundary, Side, SiteWindow,
};
use crate::simulate::{BoundarySpec, InitialLaw, KernelSpec, Statistic};

fn bad(what: &str, s: &str) -> SepError {
    SepError::invalid(format!("cannot parse {what} from {s:?}"))
}

pub(crate) fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad("a number", v)))
        .collect()
}

fn parse_usizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<usize>().map_err(|_| bad("a site index", v)))
        .collect()
}

pub(crate) fn parse_pair_f64(s: &str) -> Result<(f64, f64)> {
    match parse_floats(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(bad("two numbers", s)),
    }
}

pub(crate) fn parse_pair_usize(s: &str) -> Result<(usize, usize)> {
    match parse_usizes(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(bad("two site indices", s)),
    }
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    match parse_floats(s)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(bad("a complex number", s)),
    }
}

/// Graph families accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphArg {
    /// Simple random walk on {−R..R}.
    Line(u32),
    Tree(u32),
    /// Path on N sites, p = 1/2 to each neighbour.
    Path(usize),
    Cycle(usize),
    /// Complete graph, p = 1/(N−1).
    Complete(usize),
}

pub fn parse_graph(s: &str) -> Result<GraphArg> {
    let (kind, arg) = s.split_once(':').ok_or_else(|| bad("a graph (kind:size)", s))?;
    let n: u64 = arg.trim().parse().map_err(|_| bad("a graph size", s))?;
    let g = match kind.trim() {
        "line" => GraphArg::Line(n as u32),
        "tree" => GraphArg::Tree(n as u32),
        "path" => GraphArg::Path(n as usize),
        "cycle" => GraphArg::Cycle(n as usize),
        "complete" => GraphArg::Complete(n as usize),
        _ => return Err(bad("a graph kind (line, tree, path, cycle, complete)", s)),
    };
    match g {
        GraphArg::Path(n) | GraphArg::Complete(n) if n < 2 => Err(SepError::invalid("need at least 2 sites")),
        GraphArg::Cycle(n) if n < 3 => Err(SepError::invalid("a cycle needs at least 3 sites")),
        _ => Ok(g),
    }
}

impl GraphArg {
    pub fn spec(self) -> Result<KernelSpec> {
        let edges = |n: usize, list: Vec<(usize, usize, f64)>| KernelSpec::Edges { n, edges: list };
        Ok(match self {
            GraphArg::Line(radius) => KernelSpec::Line { radius, law: None },
            GraphArg::Tree(depth) => KernelSpec::Tree { depth },
            GraphArg::Path(n) => edges(n, (0..n - 1).map(|x| (x, x + 1, 0.5)).collect()),
            GraphArg::Cycle(n) => edges(
                n,
                (0..n).map(|x| (x.min((x + 1) % n), x.max((x + 1) % n), 0.5)).collect(),
            ),
            GraphArg::Complete(n) => {
                let p = 1.0 / (n - 1) as f64;
                edges(n, (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y, p))).collect())
            }
        })
    }

    pub fn kernel(self) -> Result<Kernel> {
        self.spec()?.build()
    }

    /// Killed truncation of a line or tree.
    pub fn killed(self) -> Result<Kernel> {
        match self {
            GraphArg::Line(_) | GraphArg::Tree(_) => Ok(killed_truncation(&self.kernel()?).kernel().clone()),
            _ => Err(SepError::Recurrent),
        }
    }

    pub fn profile(self, lambda: f64, rho: f64) -> Result<HarmonicProfile> {
        match self {
            GraphArg::Line(r) => line_alpha(lambda, rho, r),
            GraphArg::Tree(_) => tree_alpha(lambda, rho),
            _ => Err(SepError::invalid("harmonic profiles need a line or tree graph")),
        }
    }

    /// Killed truncation with the reservoirs that keep the profile stationary.
    pub fn open(self, lambda: f64, rho: f64) -> Result<(Kernel, OpenBoundary)> {
        let k = self.killed()?;
        let ob = self.profile(lambda, rho)?.open_boundary(&k);
        Ok((k, ob))
    }
}

/// `L<n`, `R<n`, `<n`, `L=n`, `R=n`, `=n`, `coords:a..b` or `sites:1,2,3`.
pub fn parse_window(s: &str) -> Result<SiteWindow> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("coords:") {
        let (a, b) = rest.split_once("..").ok_or_else(|| bad("a coordinate range", s))?;
        let min = a.trim().parse().map_err(|_| bad("a coordinate", a))?;
        let max = b.trim().parse().map_err(|_| bad("a coordinate", b))?;
        return Ok(SiteWindow::Coords { min, max });
    }
    if let Some(rest) = s.strip_prefix("sites:") {
        return Ok(SiteWindow::Sites(parse_usizes(rest)?));
    }
    let (side, rest) = match s.chars().next() {
        Some('L') => (Some(Side::L), &s[1..]),
        Some('R') => (Some(Side::R), &s[1..]),
        _ => (None, s),
    };
    let level = |t: &str| t.trim().parse::<u32>().map_err(|_| bad("a level", s));
    if let Some(n) = rest.strip_prefix('<') {
        let n = level(n)?;
        if n == 0 {
            return Err(SepError::invalid("window l < 0 is empty"));
        }
        Ok(SiteWindow::below_level(side, n))
    } else if let Some(n) = rest.strip_prefix('=') {
        Ok(SiteWindow::at_level(side, level(n)?))
    } else {
        Err(bad("a window", s))
    }
}

pub fn parse_boundary(s: &str) -> Result<BoundarySpec> {
    if s.trim() == "closed" {
        return Ok(BoundarySpec::Closed);
    }
    let rest = s
        .trim()
        .strip_prefix("reservoirs:")
        .ok_or_else(|| bad("a boundary", s))?;
    let (lambda, rho) = parse_pair_f64(rest)?;
    Ok(BoundarySpec::Reservoirs { lambda, rho })
}

pub fn parse_initial(s: &str) -> Result<InitialLaw> {
    let s = s.trim();
    if s == "step" {
        return Ok(InitialLaw::Step);
    }
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad("an initial law", s))?;
    match kind {
        "constant" => Ok(InitialLaw::Constant {
            density: rest.trim().parse().map_err(|_| bad("a density", rest))?,
        }),
        "harmonic" => {
            let (lambda, rho) = parse_pair_f64(rest)?;
            Ok(InitialLaw::Harmonic { lambda, rho })
        }
        "product" => Ok(InitialLaw::Product {
            alpha: parse_floats(rest)?,
        }),
        "occupied" => Ok(InitialLaw::Occupied {
            sites: parse_usizes(rest)?,
        }),
        _ => Err(bad("an initial law", s)),
    }
}

pub fn parse_statistic(s: &str) -> Result<Statistic> {
    match s.trim() {
        "w_plus" => Ok(Statistic::WPlus),
        "occupancy" => Ok(Statistic::Occupancy),
        other => {
            let w = other.strip_prefix("window:").ok_or_else(|| bad("a statistic", s))?;
            Ok(Statistic::WindowSum {
                window: parse_window(w)?,
            })
        }
    }
}
