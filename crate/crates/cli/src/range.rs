//! Parsing of `a..b` ranges and comma lists.

use std::str::FromStr;

/// A list argument as typed: either explicit values or a range `a..b`.
#[derive(Clone, Debug, PartialEq)]
pub enum ListArg<T> {
    Values(Vec<T>),
    Range(T, T),
}

impl<T: FromStr> FromStr for ListArg<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |p: &str| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}"));
        if let Some((a, b)) = s.split_once("..") {
            return Ok(ListArg::Range(parse(a)?, parse(b)?));
        }
        let values = s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
        Ok(ListArg::Values(values))
    }
}

impl ListArg<u64> {
    /// Expands to the listed values, or to `{a, 2a, 4a, … ≤ b}` when `dyadic`.
    pub fn expand(&self, dyadic: bool, what: &str) -> Result<Vec<u64>, String> {
        match *self {
            ListArg::Values(ref v) => Ok(v.clone()),
            ListArg::Range(a, b) => {
                if !dyadic {
                    return Err(format!("{what}: a range needs --dyadic (or give a comma list)"));
                }
                if a == 0 || b < a {
                    return Err(format!("{what}: dyadic range needs 1 <= a <= b"));
                }
                let mut out = vec![a];
                while let Some(next) = out.last().unwrap().checked_mul(2).filter(|&n| n <= b) {
                    out.push(next);
                }
                Ok(out)
            }
        }
    }
}

impl ListArg<f64> {
    pub fn values(&self, what: &str) -> Result<Vec<f64>, String> {
        match self {
            ListArg::Values(v) => Ok(v.clone()),
            ListArg::Range(..) => Err(format!("{what}: expected a comma list, not a range")),
        }
    }

    pub fn interval(&self, what: &str) -> Result<(f64, f64), String> {
        match *self {
            ListArg::Range(a, b) if a < b => Ok((a, b)),
            _ => Err(format!("{what}: expected an interval lo..hi with lo < hi")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic() {
        let r: ListArg<u64> = "256..1048576".parse().unwrap();
        let v = r.expand(true, "T").unwrap();
        assert_eq!(v.len(), 13);
        assert_eq!(*v.last().unwrap(), 1 << 20);
        assert_eq!("3..10".parse::<ListArg<u64>>().unwrap().expand(true, "T").unwrap(), vec![3, 6]);
        assert!(r.expand(false, "T").is_err());
    }

    #[test]
    fn lists() {
        let v: ListArg<u64> = "3".parse().unwrap();
        assert_eq!(v.expand(false, "T").unwrap(), vec![3]);
        let v: ListArg<f64> = "0.1,0.3".parse().unwrap();
        assert_eq!(v.values("delta").unwrap(), vec![0.1, 0.3]);
        assert!("1..x".parse::<ListArg<u64>>().is_err());
        let x: ListArg<f64> = "10000..20000".parse().unwrap();
        assert_eq!(x.interval("x").unwrap(), (1e4, 2e4));
    }
}
