use anyhow::{bail, Context, Result};

/// A parsed integer list, kept as one clap value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsizeList(pub Vec<usize>);

pub fn parse_list_arg(s: &str) -> Result<UsizeList> {
    parse_usize_list(s).map(UsizeList)
}

/// Parses `a..b` (inclusive), `a..=b`, a comma list, or a single integer.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: usize = lo.trim().parse().with_context(|| format!("bad range start in '{s}'"))?;
        let hi: usize = hi.trim().parse().with_context(|| format!("bad range end in '{s}'"))?;
        if hi < lo {
            bail!("empty range '{s}'");
        }
        return Ok((lo..=hi).collect());
    }
    let values = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad integer '{t}'")))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty list");
    }
    Ok(values)
}
