use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Kernel, Side};

/// A set of sites, kept symbolic where possible so tree windows can be
/// evaluated on level quotients without listing members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteWindow {
    /// Tree sites with `min_level <= l(x) <= max_level`, optionally one side.
    Levels {
        side: Option<Side>,
        min_level: u32,
        max_level: u32,
    },
    /// Line sites with coordinate in `min..=max`.
    Coords {
        min: i64,
        max: i64,
    },
    Sites(Vec<usize>),
}

impl SiteWindow {
    /// {x : l(x) < n}, optionally restricted to one side.
    pub fn below_level(side: Option<Side>, n: u32) -> Self {
        assert!(n >= 1, "window {{l < n}} needs n >= 1");
        SiteWindow::Levels {
            side,
            min_level: 0,
            max_level: n - 1,
        }
    }

    /// {x : l(x) = n}, optionally restricted to one side.
    pub fn at_level(side: Option<Side>, n: u32) -> Self {
        SiteWindow::Levels {
            side,
            min_level: n,
            max_level: n,
        }
    }

    pub fn contains(&self, kernel: &Kernel, x: usize) -> bool {
        match self {
            SiteWindow::Levels {
                side,
                min_level,
                max_level,
            } => {
                let l = kernel.level(x);
                (*min_level..=*max_level).contains(&l) && side.is_none_or(|s| kernel.side(x) == Some(s))
            }
            SiteWindow::Coords { min, max } => kernel.coord(x).is_some_and(|c| (*min..=*max).contains(&c)),
            SiteWindow::Sites(v) => v.contains(&x),
        }
    }

    /// Whether a (side, level) class lies in the window; `None` for windows
    /// that are not level-defined.
    pub fn contains_class(&self, side: Side, level: u32) -> Option<bool> {
        match self {
            SiteWindow::Levels {
                side: s,
                min_level,
                max_level,
            } => Some((*min_level..=*max_level).contains(&level) && s.is_none_or(|s| s == side)),
            _ => None,
        }
    }

    pub fn members(&self, kernel: &Kernel) -> Vec<usize> {
        match self {
            SiteWindow::Sites(v) => {
                let mut v: Vec<usize> = v.iter().copied().filter(|&x| x < kernel.len()).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            _ => (0..kernel.len()).filter(|&x| self.contains(kernel, x)).collect(),
        }
    }

    pub fn indicator(&self, kernel: &Kernel) -> Vec<f64> {
        (0..kernel.len())
            .map(|x| if self.contains(kernel, x) { 1.0 } else { 0.0 })
            .collect()
    }
}

impl fmt::Display for SiteWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteWindow::Levels {
                side,
                min_level,
                max_level,
            } => {
                if let Some(s) = side {
                    write!(f, "{s:?}, ")?;
                }
                if min_level == max_level {
                    write!(f, "l(x)={min_level}")
                } else if *min_level == 0 {
                    write!(f, "l(x)<{}", max_level + 1)
                } else {
                    write!(f, "{min_level}<=l(x)<={max_level}")
                }
            }
            SiteWindow::Coords { min, max } => write!(f, "{min}<=x<={max}"),
            SiteWindow::Sites(v) => write!(f, "{} explicit sites", v.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::build_binary_tree;

    #[test]
    fn level_windows_count() {
        let k = build_binary_tree(5);
        assert_eq!(SiteWindow::below_level(None, 3).members(&k).len(), 2 * 7);
        assert_eq!(SiteWindow::below_level(Some(Side::L), 3).members(&k).len(), 7);
        assert_eq!(SiteWindow::at_level(Some(Side::L), 4).members(&k).len(), 16);
        assert_eq!(SiteWindow::below_level(Some(Side::L), 3).to_string(), "L, l(x)<3");
    }
}
