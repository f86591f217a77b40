//! Value lists on the command line: `3,5,7`, `2..5` (inclusive), `-8..8`,
//! or mixtures like `0,2..4`.

use std::fmt::Display;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<i64>);

impl IntList {
    pub fn values<T: TryFrom<i64>>(&self, flag: &str) -> Result<Vec<T>, String> {
        self.0
            .iter()
            .map(|&v| T::try_from(v).map_err(|_| format!("--{flag}: {v} is out of range")))
            .collect()
    }
}

fn parse_int<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| format!("bad number {s:?}: {e}"))
}

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(format!("empty item in {s:?}"));
            }
            // a leading '-' belongs to the first bound
            match part[1..].find("..").map(|k| k + 1) {
                Some(k) => {
                    let lo: i64 = parse_int(&part[..k])?;
                    let hi: i64 = parse_int(&part[k + 2..])?;
                    if lo > hi {
                        return Err(format!("empty range {part:?}"));
                    }
                    if hi - lo > 1_000_000 {
                        return Err(format!("range {part:?} is too long"));
                    }
                    out.extend(lo..=hi);
                }
                None => out.push(parse_int(part)?),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(IntList(out))
    }
}

/// `true`, `false`, `both`, or a comma list of booleans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolList(pub Vec<bool>);

impl FromStr for BoolList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',') {
            match part.trim() {
                "both" => out.extend([false, true]),
                "true" | "ram" | "1" => out.push(true),
                "false" | "unram" | "0" => out.push(false),
                other => return Err(format!("expected true, false or both, got {other:?}")),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(BoolList(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!("3,5,7".parse::<IntList>().unwrap().0, vec![3, 5, 7]);
        assert_eq!("2..5".parse::<IntList>().unwrap().0, vec![2, 3, 4, 5]);
        assert_eq!("-2..1".parse::<IntList>().unwrap().0, vec![-2, -1, 0, 1]);
        assert_eq!("-3..-1".parse::<IntList>().unwrap().0, vec![-3, -2, -1]);
        assert_eq!("4,0..2,1".parse::<IntList>().unwrap().0, vec![0, 1, 2, 4]);
        assert_eq!("-4".parse::<IntList>().unwrap().0, vec![-4]);
    }

    #[test]
    fn malformed() {
        for bad in ["", "3,,5", "5..2", "a..3", "1..", "x", "1...3"] {
            assert!(bad.parse::<IntList>().is_err(), "{bad}");
        }
        assert!("maybe".parse::<BoolList>().is_err());
    }

    #[test]
    fn bools() {
        assert_eq!("both".parse::<BoolList>().unwrap().0, vec![false, true]);
        assert_eq!("true".parse::<BoolList>().unwrap().0, vec![true]);
    }

    #[test]
    fn narrowing() {
        let l: IntList = "-1..2".parse().unwrap();
        assert!(l.values::<u32>("i").is_err());
        assert_eq!(l.values::<i32>("vb").unwrap(), vec![-1, 0, 1, 2]);
    }
}
