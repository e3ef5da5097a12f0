//! Parsers for the map and grid arguments.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapSpec {
    GStar,
    GN(i32),
    GEps(f64),
    FStar,
    FEps(f64),
    Identity,
    Conj,
    PhiEps(f64),
}

fn number<T: FromStr>(name: &str, text: &str) -> Result<T, String> {
    text.parse()
        .map_err(|_| format!("bad value '{}' in map '{}'", text, name))
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let need = |a: Option<&'_ str>| -> Result<String, String> {
            a.map(str::to_string)
                .ok_or_else(|| format!("map '{}' needs a parameter ({}:value)", name, name))
        };
        match (name, arg) {
            ("gstar", None) => Ok(Self::GStar),
            ("fstar", None) => Ok(Self::FStar),
            ("identity", None) => Ok(Self::Identity),
            ("conj", None) => Ok(Self::Conj),
            ("gN", a) => Ok(Self::GN(number(name, &need(a)?)?)),
            ("geps", a) => Ok(Self::GEps(number(name, &need(a)?)?)),
            ("feps", a) => Ok(Self::FEps(number(name, &need(a)?)?)),
            ("phi-eps", a) => Ok(Self::PhiEps(number(name, &need(a)?)?)),
            _ => Err(format!(
                "unknown map '{}' (gstar|gN:N|geps:eps|fstar|feps:eps|identity|conj|phi-eps:eps)",
                s
            )),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GStar => write!(f, "gstar"),
            Self::GN(n) => write!(f, "gN:{}", n),
            Self::GEps(e) => write!(f, "geps:{}", e),
            Self::FStar => write!(f, "fstar"),
            Self::FEps(e) => write!(f, "feps:{}", e),
            Self::Identity => write!(f, "identity"),
            Self::Conj => write!(f, "conj"),
            Self::PhiEps(e) => write!(f, "phi-eps:{}", e),
        }
    }
}

/// `RxA`: axis cells by transverse cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSize {
    pub axis: usize,
    pub transverse: usize,
}

impl GridSize {
    pub fn halved(self) -> Self {
        Self {
            axis: (self.axis / 2).max(1),
            transverse: (self.transverse / 2).max(1),
        }
    }
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("grid must look like 512x512, got '{}'", s);
        let (a, b) = s.split_once('x').ok_or_else(bad)?;
        let axis: usize = a.parse().map_err(|_| bad())?;
        let transverse: usize = b.parse().map_err(|_| bad())?;
        if axis == 0 || transverse == 0 {
            return Err(bad());
        }
        Ok(Self { axis, transverse })
    }
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.axis, self.transverse)
    }
}

/// `lo:hi:count`, geometric.
pub fn geometric_list(s: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("eps-geom must look like 1e-4:1e-2:5, got '{}'", s);
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(format!(
            "eps-geom needs 0 < lo < hi and count >= 2, got '{}'",
            s
        ));
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect())
}

pub fn comma_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| format!("bad number '{}' in eps-list", t))
        })
        .collect()
}
